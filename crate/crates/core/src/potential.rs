//! Fixed-point membrane arithmetic.
//!
//! Potentials, weights, and thresholds are held as integer multiples of
//! 1e-9 potential units. Integer addition is associative, so the input
//! current of a neuron does not depend on the order in which synapses are
//! summed, and a population whose contributions cancel reproduces the
//! original current bit for bit.

/// Quanta per potential unit.
pub const SCALE: i64 = 1_000_000_000;

/// Nearest fixed-point value of a real potential (ties away from zero).
pub fn quantize(x: f64) -> i64 {
    (x * SCALE as f64).round() as i64
}

pub fn to_real(q: i64) -> f64 {
    q as f64 / SCALE as f64
}

/// `leak * v` rounded to the nearest quantum, ties away from zero.
/// `leak_q` is the quantized leak factor; `SCALE` means no leak.
pub fn apply_leak(v: i64, leak_q: i64) -> i64 {
    if leak_q == SCALE {
        return v;
    }
    let p = v as i128 * leak_q as i128;
    let s = SCALE as i128;
    let (q, r) = (p / s, p % s);
    let q = if 2 * r.abs() >= s { q + r.signum() } else { q };
    q as i64
}
