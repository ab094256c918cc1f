use nalgebra::DMatrix;
use num_complex::Complex;

use super::{truncation_unreliable, PhasePoint, TruncatedOperator};
use crate::error::{Error, Result};
use crate::scalar::{cis, czero, from_usize, lit, log_factorials, Real};

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence
/// `(j+1) L_{j+1} = (2j + 1 + k - x) L_j - (j + k) L_{j-1}`.
pub fn laguerre<T: Real>(n: i64, k: i64, x: T) -> Result<T> {
    if n < 0 {
        return Err(Error::domain(format!(
            "Laguerre degree must be >= 0, got {n}"
        )));
    }
    if k < 0 {
        return Err(Error::domain(format!(
            "Laguerre order must be >= 0, got {k}"
        )));
    }
    let kf: T = lit(k as f64);
    let mut prev = T::one();
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = T::one() + kf - x;
    for j in 1..n {
        let jf: T = lit(j as f64);
        let next =
            ((lit::<T>(2.0) * jf + T::one() + kf - x) * cur - (jf + kf) * prev) / (jf + T::one());
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

// Values are carried as `mantissa * exp(log_scale)` so columns whose first
// element underflows are still resolved where they become significant.
const RESCALE_ABOVE: f64 = 1e30;

/// Matrix elements `<m|D(alpha)|n>` for `m < rows`, `n < cols`.
///
/// Uses the closed form
/// `<m|D|n> = sqrt(n!/m!) alpha^{m-n} e^{-|alpha|^2/2} L_n^{(m-n)}(|alpha|^2)` (m >= n)
/// evaluated through the normalized Laguerre recurrence along each
/// sub-diagonal, and `<n|D|m> = (-1)^{m-n} conj(...)` for the upper triangle.
/// The entries are exact matrix elements of the untruncated operator.
pub fn displacement_block<T: Real>(
    alpha: PhasePoint<T>,
    rows: usize,
    cols: usize,
) -> DMatrix<Complex<T>> {
    let mut out = DMatrix::from_element(rows, cols, czero());
    let x = alpha.norm_sqr();
    if x == T::zero() {
        for i in 0..rows.min(cols) {
            out[(i, i)] = Complex::new(T::one(), T::zero());
        }
        return out;
    }
    let theta = alpha.arg();
    let ln_x = x.ln();
    let half: T = lit(0.5);
    let two: T = lit(2.0);
    let big: T = lit(RESCALE_ABOVE);
    let ln_big = big.ln();
    let lf = log_factorials::<T>(rows.max(cols) + 1);
    let span = rows.max(cols);

    for k in 0..span {
        // Lower part: (j + k, j) with j < cols, j + k < rows.
        let lower_len = if k < rows { (rows - k).min(cols) } else { 0 };
        // Upper part: (j, j + k) with j < rows, j + k < cols.
        let upper_len = if k == 0 || k >= cols {
            0
        } else {
            (cols - k).min(rows)
        };
        let len = lower_len.max(upper_len);
        if len == 0 {
            continue;
        }
        let kf: T = from_usize(k);
        let phase_lower = cis(kf * theta);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let phase_upper = cis(-kf * theta).scale(sign);

        let mut log_scale = -half * x + half * kf * ln_x - half * lf[k];
        let mut prev = T::zero();
        let mut cur = T::one();
        for j in 0..len {
            if j > 0 {
                let jf: T = from_usize(j - 1);
                let a = two * jf + T::one() + kf - x;
                let b = (jf * (jf + kf)).sqrt();
                let c = ((jf + T::one()) * (jf + kf + T::one())).sqrt();
                let next = (a * cur - b * prev) / c;
                prev = cur;
                cur = next;
                if cur.abs() > big {
                    cur /= big;
                    prev /= big;
                    log_scale += ln_big;
                }
            }
            let value = cur * log_scale.exp();
            if j < lower_len {
                out[(j + k, j)] = phase_lower.scale(value);
            }
            if j < upper_len {
                out[(j, j + k)] = phase_upper.scale(value);
            }
        }
    }
    out
}

/// Displacement operator `D(alpha) = exp(alpha a^dagger - alpha^* a)` on the
/// truncated space. Flags the result when `|alpha|^2 > cutoff / 4`.
pub fn displacement<T: Real>(alpha: PhasePoint<T>, cutoff: usize) -> Result<TruncatedOperator<T>> {
    if cutoff < 2 {
        return Err(Error::InvalidDimension {
            what: "displacement",
            got: cutoff,
            min: 2,
        });
    }
    alpha.ensure_finite()?;
    let m = displacement_block(alpha, cutoff, cutoff);
    let warn = truncation_unreliable(alpha.norm_sqr(), cutoff);
    Ok(TruncatedOperator::from_matrix(m)?.with_warning(warn))
}
