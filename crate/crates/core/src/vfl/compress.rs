//! Embedding compression for the communication-efficient protocols.
//! Compression applies to the passive→active (embedding) direction only;
//! gradients travel uncompressed.

use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Per-matrix uniform affine quantization to b-bit integers over
/// [min, max], dequantized before use.
///
/// Wire size: count·b/8 bytes plus two 32-bit scale constants.
pub fn quantize_embedding(h: &Matrix, bits: u8) -> Result<(Matrix, u64)> {
    if bits != 8 && bits != 16 {
        return Err(Error::Config(format!("quantize bits must be 8 or 16, got {bits}")));
    }
    let levels = ((1u32 << bits) - 1) as f64;
    let (lo, hi) = h.min_max();
    let span = hi - lo;
    let mut out = h.clone();
    if span > 0.0 {
        for v in out.data_mut() {
            let q = (((*v - lo) / span) * levels).round();
            *v = lo + (q / levels) * span;
        }
    }
    let bytes = (h.data().len() as u64) * (bits as u64) / 8 + 8;
    Ok((out, bytes))
}

/// Keep the ⌈r·count⌉ largest-magnitude entries, zero the rest.
///
/// Wire size counts the kept 32-bit values only (the accounting that
/// reproduces the published per-round amounts).
pub fn topk_sparsify(m: &Matrix, keep_ratio: f64) -> Result<(Matrix, u64)> {
    if !(keep_ratio > 0.0 && keep_ratio <= 1.0) {
        return Err(Error::Config(format!("top-k ratio must be in (0,1], got {keep_ratio}")));
    }
    let len = m.data().len();
    let keep = ((keep_ratio * len as f64) - 1e-9).ceil().max(0.0) as usize;
    let keep = keep.min(len).max(1);
    let mut out = m.clone();
    if keep < len {
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| {
            let ka = m.data()[a].abs();
            let kb = m.data()[b].abs();
            kb.partial_cmp(&ka).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().skip(keep) {
            out.data_mut()[i] = 0.0;
        }
    }
    Ok((out, keep as u64 * 4))
}
