//! Key generation, encryption, decryption and the two homomorphic
//! operations. Keys serialize as hex-encoded big integers in JSON.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Public key with n = p·q and g = n+1 implicit; n² is cached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierPublicKey {
    pub n: BigUint,
    pub nn: BigUint,
    fingerprint: u64,
}

/// Private key: λ = lcm(p−1, q−1) and μ = λ⁻¹ mod n.
#[derive(Debug, Clone)]
pub struct PaillierPrivateKey {
    pub lambda: BigUint,
    pub mu: BigUint,
    pub public: PaillierPublicKey,
}

/// A Paillier ciphertext bound to its key by fingerprint; operations
/// between ciphertexts of different keys are rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub value: BigUint,
    key_fp: u64,
}

fn fingerprint_of(n: &BigUint) -> u64 {
    let digest = Sha256::digest(n.to_bytes_be());
    u64::from_be_bytes(digest[..8].try_into().unwrap())
}

impl PaillierPublicKey {
    pub fn from_n(n: BigUint) -> Self {
        let nn = &n * &n;
        let fingerprint = fingerprint_of(&n);
        Self { n, nn, fingerprint }
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Randomized encryption: c = (1 + m·n)·rⁿ mod n².
    pub fn encrypt<R: Rng>(&self, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
        if m >= &self.n {
            return Err(Error::Crypto("plaintext outside [0, n)".into()));
        }
        let r = loop {
            let candidate = rng.gen_biguint_range(&BigUint::one(), &self.n);
            if candidate.gcd(&self.n).is_one() {
                break candidate;
            }
        };
        let gm = (BigUint::one() + m * &self.n) % &self.nn;
        let rn = r.modpow(&self.n, &self.nn);
        Ok(Ciphertext {
            value: (gm * rn) % &self.nn,
            key_fp: self.fingerprint,
        })
    }

    /// Dec(he_add(Enc(a), Enc(b))) = a + b mod n.
    pub fn he_add(&self, c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
        if c1.key_fp != self.fingerprint || c2.key_fp != self.fingerprint {
            return Err(Error::Crypto("ciphertexts bound to a different key".into()));
        }
        Ok(Ciphertext {
            value: (&c1.value * &c2.value) % &self.nn,
            key_fp: self.fingerprint,
        })
    }

    /// Add a plaintext constant: Dec = m + k mod n (cheap, no modpow).
    pub fn he_add_plain(&self, c: &Ciphertext, k: &BigUint) -> Result<Ciphertext> {
        if c.key_fp != self.fingerprint {
            return Err(Error::Crypto("ciphertext bound to a different key".into()));
        }
        let gm = (BigUint::one() + (k % &self.n) * &self.n) % &self.nn;
        Ok(Ciphertext {
            value: (&c.value * gm) % &self.nn,
            key_fp: self.fingerprint,
        })
    }

    /// Dec(he_scalar_mul(k, Enc(a))) = k·a mod n.
    pub fn he_scalar_mul(&self, k: &BigUint, c: &Ciphertext) -> Result<Ciphertext> {
        if c.key_fp != self.fingerprint {
            return Err(Error::Crypto("ciphertext bound to a different key".into()));
        }
        Ok(Ciphertext {
            value: c.value.modpow(&(k % &self.n), &self.nn),
            key_fp: self.fingerprint,
        })
    }

    /// Enc(0) with fixed randomness 1; additive identity for bucket sums.
    pub fn zero(&self) -> Ciphertext {
        Ciphertext {
            value: BigUint::one(),
            key_fp: self.fingerprint,
        }
    }
}

impl PaillierPrivateKey {
    /// m = L(c^λ mod n²)·μ mod n with L(x) = (x−1)/n.
    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigUint> {
        if c.key_fp != self.public.fingerprint {
            return Err(Error::Crypto("ciphertext bound to a different key".into()));
        }
        let x = c.value.modpow(&self.lambda, &self.public.nn);
        let l = (x - BigUint::one()) / &self.public.n;
        Ok((l * &self.mu) % &self.public.n)
    }
}

/// Deterministic Miller–Rabin with 40 rounds from the caller's generator:
/// composite-acceptance probability below 4⁻⁴⁰ = 2⁻⁸⁰.
fn is_probable_prime<R: Rng>(candidate: &BigUint, rng: &mut R) -> bool {
    const SMALL_PRIMES: [u32; 15] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if candidate == &p {
            return true;
        }
        if (candidate % &p).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let minus_one = candidate - &one;
    let mut d = minus_one.clone();
    let mut s = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        s += 1;
    }
    'witness: for _ in 0..40 {
        let a = rng.gen_biguint_range(&two, &minus_one);
        let mut x = a.modpow(&d, candidate);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 0..s - 1 {
            x = x.modpow(&two, candidate);
            if x == minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gen_prime<R: Rng>(bits: u64, rng: &mut R) -> BigUint {
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, rng) {
            return candidate;
        }
    }
}

/// Generate a key pair with an n of `bits` bits from a seeded generator.
pub fn keygen<R: Rng>(bits: u64, rng: &mut R) -> Result<(PaillierPublicKey, PaillierPrivateKey)> {
    if bits < 256 {
        return Err(Error::Crypto("key size below 256 bits".into()));
    }
    let half = bits / 2;
    let (p, q) = loop {
        let p = gen_prime(half, rng);
        let q = gen_prime(bits - half, rng);
        if p != q {
            break (p, q);
        }
    };
    let n = &p * &q;
    let one = BigUint::one();
    let lambda = (&p - &one).lcm(&(&q - &one));
    let public = PaillierPublicKey::from_n(n.clone());
    // μ = λ⁻¹ mod n exists because gcd(λ, n) = 1 for distinct primes
    let mu = mod_inverse(&lambda, &n)
        .ok_or_else(|| Error::Crypto("lambda not invertible mod n".into()))?;
    Ok((
        public.clone(),
        PaillierPrivateKey { lambda, mu, public },
    ))
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let e = a.extended_gcd(&m_int);
    if !e.gcd.is_one() {
        return None;
    }
    let mut x = e.x % &m_int;
    if x < BigInt::zero() {
        x += &m_int;
    }
    x.to_biguint()
}

/// Hex-encoded JSON form of a public key.
#[derive(Debug, Serialize, Deserialize)]
pub struct PublicKeyJson {
    pub n: String,
}

/// Hex-encoded JSON form of a private key.
#[derive(Debug, Serialize, Deserialize)]
pub struct PrivateKeyJson {
    pub n: String,
    pub lambda: String,
    pub mu: String,
}

impl PaillierPublicKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PublicKeyJson {
            n: self.n.to_str_radix(16),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PublicKeyJson =
            serde_json::from_str(s).map_err(|e| Error::Data(format!("bad key JSON: {e}")))?;
        let n = BigUint::parse_bytes(raw.n.as_bytes(), 16)
            .ok_or_else(|| Error::Data("bad hex modulus".into()))?;
        Ok(Self::from_n(n))
    }
}

impl PaillierPrivateKey {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&PrivateKeyJson {
            n: self.public.n.to_str_radix(16),
            lambda: self.lambda.to_str_radix(16),
            mu: self.mu.to_str_radix(16),
        })
        .expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: PrivateKeyJson =
            serde_json::from_str(s).map_err(|e| Error::Data(format!("bad key JSON: {e}")))?;
        let parse = |txt: &str| {
            BigUint::parse_bytes(txt.as_bytes(), 16)
                .ok_or_else(|| Error::Data("bad hex integer".into()))
        };
        Ok(Self {
            lambda: parse(&raw.lambda)?,
            mu: parse(&raw.mu)?,
            public: PaillierPublicKey::from_n(parse(&raw.n)?),
        })
    }
}
