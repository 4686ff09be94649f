//! Halton low-discrepancy points.

use crate::points::{Bounds, Points};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// First `n` Halton points (skipping the origin) mapped into `bounds`.
///
/// # Panics
/// If the dimension exceeds the number of tabulated prime bases.
pub fn halton(n: usize, bounds: &Bounds) -> Points {
    let d = bounds.dim();
    assert!(d <= PRIMES.len(), "halton supports up to {} dimensions", PRIMES.len());
    let mut pts = Points::new(d);
    for i in 1..=n as u64 {
        let u: Vec<f64> = (0..d).map(|k| radical_inverse(i, PRIMES[k])).collect();
        pts.push(&bounds.from_unit(&u)).expect("dimension matches");
    }
    pts
}
