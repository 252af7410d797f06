//! Lanczos approximation of `exp(i t H) v` for Hermitian operators given
//! only through their action.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Default Krylov subspace dimension.
pub const KRYLOV_DIM: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    /// Sum of the per-step a-posteriori error estimates.
    pub error_estimate: f64,
    pub substeps: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Computes `exp(i t H) v` where `apply(x, y)` overwrites `y` with `H x`.
///
/// `norm_bound` is any upper bound on `‖H‖₂`; it seeds the first step
/// size. Steps are accepted when the local error estimate is below the
/// share `tol * tau / |t|` of the total budget.
pub fn expi_action<F>(
    apply: F,
    v: &[Complex64],
    t: f64,
    tol: f64,
    norm_bound: f64,
    max_dim: usize,
) -> Result<(Vec<Complex64>, KrylovStats)>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = v.len();
    let mut w = v.to_vec();
    let mut stats = KrylovStats {
        error_estimate: 0.0,
        substeps: 0,
    };
    let span = t.abs();
    if n == 0 || span == 0.0 {
        return Ok((w, stats));
    }
    let sign = t.signum();
    let m = max_dim.min(n).max(1);
    let anorm = norm_bound.max(f64::MIN_POSITIVE);
    let breakdown_tol = 1e-13 * anorm.max(1.0);
    let mut tau = span.min(0.5 * m as f64 / anorm);
    let mut done = 0.0;

    while done < span {
        let beta = norm(&w);
        if beta == 0.0 {
            break;
        }
        // Lanczos with full reorthogonalization.
        let mut basis: Vec<Vec<Complex64>> = vec![w.iter().map(|z| z / beta).collect()];
        let mut alphas = Vec::with_capacity(m);
        let mut offs = Vec::with_capacity(m);
        let mut next_norm = 0.0;
        let mut happy = false;
        let mut scratch = vec![Complex64::default(); n];
        for j in 0..m {
            apply(&basis[j], &mut scratch);
            let alpha = dot(&basis[j], &scratch).re;
            alphas.push(alpha);
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(b, &scratch);
                    for (s, x) in scratch.iter_mut().zip(b) {
                        *s -= proj * x;
                    }
                }
            }
            let b_next = norm(&scratch);
            if b_next < breakdown_tol {
                happy = true;
                break;
            }
            if j + 1 == m {
                next_norm = b_next;
                break;
            }
            offs.push(b_next);
            basis.push(scratch.iter().map(|z| z / b_next).collect());
        }
        let dim = alphas.len();
        let mut tri = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            tri[(i, i)] = alphas[i];
            if i + 1 < dim {
                tri[(i, i + 1)] = offs[i];
                tri[(i + 1, i)] = offs[i];
            }
        }
        let (theta, q) = symmetric_eigen(&tri);

        let mut halvings = 0;
        loop {
            let step = tau.min(span - done);
            // y = Q exp(i s step Θ) Qᵀ e1
            let y: Vec<Complex64> = (0..dim)
                .map(|r| {
                    (0..dim)
                        .map(|c| {
                            Complex64::from_polar(q[(0, c)] * q[(r, c)], sign * step * theta[c])
                        })
                        .sum()
                })
                .collect();
            let err = if happy {
                0.0
            } else {
                beta * next_norm * y[dim - 1].norm()
            };
            let budget = tol * step / span;
            if err <= budget || step <= f64::EPSILON * span {
                w.iter_mut().for_each(|z| *z = Complex64::default());
                for (coef, b) in y.iter().zip(&basis) {
                    let c = coef * beta;
                    for (z, x) in w.iter_mut().zip(b) {
                        *z += c * x;
                    }
                }
                done += step;
                stats.error_estimate += err;
                stats.substeps += 1;
                let growth = if err > 0.0 {
                    (0.9 * (budget / err).powf(1.0 / dim as f64)).min(2.0)
                } else {
                    2.0
                };
                tau = step * growth.max(0.5);
                break;
            }
            halvings += 1;
            if halvings > 60 {
                return Err(Error::Numerical(
                    "Krylov step size underflow while meeting the tolerance".into(),
                ));
            }
            tau = step * 0.5;
        }
    }
    Ok((w, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{to_complex, unitary_from_symmetric};
    use nalgebra::DVector;

    #[test]
    fn matches_dense_exponential() {
        let n = 40;
        let mut h = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = 2.0 + (i % 3) as f64;
            if i + 1 < n {
                h[(i, i + 1)] = -1.0;
                h[(i + 1, i)] = -1.0;
            }
        }
        let v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).sin(), (0.3 * i as f64).cos()))
            .collect();
        let hc = to_complex(&h);
        let apply = |x: &[Complex64], y: &mut [Complex64]| {
            let out = &hc * DVector::from_column_slice(x);
            y.copy_from_slice(out.as_slice());
        };
        for &t in &[0.5, -3.0, 25.0] {
            let (got, stats) = expi_action(apply, &v, t, 1e-12, 6.0, 20).unwrap();
            let (vals, vecs) = symmetric_eigen(&h);
            let u = unitary_from_symmetric(&vals, &vecs, t);
            let want = &u * DVector::from_column_slice(&v);
            let dev = got
                .iter()
                .zip(want.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(dev < 1e-10, "t={t} dev={dev}");
            assert!(stats.error_estimate <= 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let v = vec![Complex64::new(1.0, 2.0)];
        let (w, stats) = expi_action(|x, y| y.copy_from_slice(x), &v, 0.0, 1e-12, 1.0, 5).unwrap();
        assert_eq!(w, v);
        assert_eq!(stats.substeps, 0);
    }
}
