//! Fixed-point encoding of reals into the Paillier plaintext space.
//! Negatives are represented as n − |m| (symmetric encoding); products of
//! encoded values carry the summed scale exponents.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::paillier::PaillierPublicKey;

#[derive(Debug, Clone, Copy)]
pub struct FixedPointCodec {
    pub scale_bits: u32,
}

impl Default for FixedPointCodec {
    fn default() -> Self {
        Self { scale_bits: 40 }
    }
}

impl FixedPointCodec {
    pub fn new(scale_bits: u32) -> Self {
        Self { scale_bits }
    }

    pub fn scale(&self) -> f64 {
        (self.scale_bits as f64).exp2()
    }

    /// Encode x at this codec's scale; |x|·2^scale must stay below n/2.
    pub fn encode(&self, x: f64, pk: &PaillierPublicKey) -> Result<BigUint> {
        if !x.is_finite() {
            return Err(Error::Numeric("cannot encode non-finite value".into()));
        }
        let scaled = (x * self.scale()).round();
        if scaled.abs() >= 9.0e18 {
            return Err(Error::Numeric(format!("fixed-point overflow encoding {x}")));
        }
        let magnitude = BigUint::from(scaled.abs() as u64);
        let half_n = &pk.n >> 1;
        if magnitude > half_n {
            return Err(Error::Numeric("encoded magnitude exceeds n/2".into()));
        }
        Ok(if scaled < 0.0 {
            &pk.n - magnitude
        } else {
            magnitude
        })
    }

    /// Encode at an explicit total scale (used for constants that join
    /// products of encoded values, e.g. ½ − y at two codec scales). Exact
    /// for dyadic rationals; rounds at 2⁻⁵² relative otherwise.
    pub fn encode_with_total_bits(
        &self,
        x: f64,
        total_bits: u32,
        pk: &PaillierPublicKey,
    ) -> Result<BigUint> {
        if !x.is_finite() {
            return Err(Error::Numeric("cannot encode non-finite value".into()));
        }
        let negative = x < 0.0;
        let m = x.abs();
        if m >= 7.0e22 {
            return Err(Error::Numeric(format!("fixed-point overflow encoding {x}")));
        }
        let mant = (m * (52f64).exp2()).round() as u128;
        let mut big = BigUint::from(mant);
        if total_bits >= 52 {
            big <<= (total_bits - 52) as usize;
        } else {
            big >>= (52 - total_bits) as usize;
        }
        let half_n = &pk.n >> 1;
        if big > half_n {
            return Err(Error::Numeric("encoded magnitude exceeds n/2".into()));
        }
        Ok(if negative { &pk.n - big } else { big })
    }

    /// Decode a residue that carries `total_scale_bits` of accumulated
    /// scale (scale_bits per encoded factor in a product).
    pub fn decode_with_scale(
        &self,
        value: &BigUint,
        total_scale_bits: u32,
        pk: &PaillierPublicKey,
    ) -> f64 {
        let half_n = &pk.n >> 1;
        let (negative, magnitude) = if value > &half_n {
            (true, &pk.n - value)
        } else {
            (false, value.clone())
        };
        let mut x = 0.0f64;
        // big-endian digit fold; magnitudes stay far below f64 range here
        for digit in magnitude.to_u64_digits().iter().rev() {
            x = x * (64f64).exp2() + *digit as f64;
        }
        let scaled = x / (total_scale_bits as f64).exp2();
        if negative {
            -scaled
        } else {
            scaled
        }
    }

    pub fn decode(&self, value: &BigUint, pk: &PaillierPublicKey) -> f64 {
        self.decode_with_scale(value, self.scale_bits, pk)
    }

    /// Encode a non-negative integer directly (no scaling).
    pub fn encode_raw_u64(&self, v: u64) -> BigUint {
        if v == 0 {
            BigUint::zero()
        } else {
            BigUint::from(v)
        }
    }
}
