use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Relative diagonal jitter first tried on every factorization.
pub const JITTER_START: f64 = 1e-10;
/// Largest relative jitter before giving up.
pub const JITTER_MAX: f64 = 1e-4;

/// Cholesky factorization with diagonal jitter escalation.
///
/// Adds `JITTER_START * scale` to the diagonal and multiplies by ten on each
/// failure until `JITTER_MAX * scale`. Returns the factor and the absolute
/// jitter actually used.
pub fn jittered_cholesky(a: &DMatrix<f64>, scale: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut rel = JITTER_START;
    loop {
        let jitter = rel * scale;
        let mut m = a.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(m) {
            return Ok((ch, jitter));
        }
        if rel >= JITTER_MAX * (1.0 - 1e-12) {
            return Err(Error::SingularModel { jitter });
        }
        rel *= 10.0;
    }
}

/// `log|A|` from a Cholesky factor of `A`.
pub fn log_det(ch: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

/// Solves `L x = b` for lower-triangular `L`, column by column.
pub fn solve_lower(l: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(b).expect("triangular factor has non-zero diagonal")
}

pub fn solve_lower_vec(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(b).expect("triangular factor has non-zero diagonal")
}

/// Solves `L^T x = b` for lower-triangular `L`.
pub fn solve_upper_t_vec(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    l.tr_solve_lower_triangular(b).expect("triangular factor has non-zero diagonal")
}
