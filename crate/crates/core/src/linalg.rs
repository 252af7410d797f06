//! Dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::SEMISIMPLE_COND;
use crate::error::{Error, Result};

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_complex(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Symmetric eigendecomposition with eigenvalues in ascending order.
///
/// The input is symmetrized first, so tiny asymmetries from assembly do
/// not leak into the spectrum.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(m.nrows(), m.ncols());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn smallest_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetric_eigen(m).0[0]
}

/// Eigenvalues of a general real matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Eigendecomposition of a general real matrix.
#[derive(Debug, Clone)]
pub struct GeneralEigen {
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors as columns, absent when some eigenvalue
    /// cluster lacks a full set of eigenvectors.
    pub vectors: Option<DMatrix<Complex64>>,
    /// 2-norm condition number of `vectors` (infinite when defective).
    pub condition: f64,
    pub semisimple: bool,
}

/// Eigenvalues from the real Schur form; eigenvectors from the null spaces
/// of `m - mu I`, one per cluster of nearby eigenvalues.
///
/// A cluster of size k is semisimple when `m - mu I` has k singular values
/// below the null tolerance. Diagonalizability is then confirmed with the
/// condition number of the assembled eigenvector matrix.
pub fn general_eigen(m: &DMatrix<f64>) -> Result<GeneralEigen> {
    let n = m.nrows();
    let values = eigenvalues(m)?;
    if n == 0 {
        return Ok(GeneralEigen {
            values,
            vectors: Some(DMatrix::zeros(0, 0)),
            condition: 1.0,
            semisimple: true,
        });
    }
    let scale = max_abs(m).max(1.0);
    let cluster_tol = 1e-6 * scale;
    let null_tol = 1e-7 * scale;

    let clusters = cluster_indices(&values, cluster_tol);
    let mc = to_complex(m);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let mut col = 0;
    let mut complete = true;
    for cluster in &clusters {
        let k = cluster.len();
        let mu = cluster.iter().map(|&i| values[i]).sum::<Complex64>() / k as f64;
        let mut shifted = mc.clone();
        for i in 0..n {
            shifted[(i, i)] -= mu;
        }
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        // Singular values are sorted descending, so the null space is the tail.
        if svd.singular_values[n - k] > null_tol {
            complete = false;
        }
        for row in (n - k)..n {
            let v = v_t.row(row).transpose().map(|z| z.conj());
            let norm = v.norm();
            vectors.set_column(col, &(v / Complex64::new(norm, 0.0)));
            col += 1;
        }
    }
    if !complete {
        return Ok(GeneralEigen {
            values,
            vectors: None,
            condition: f64::INFINITY,
            semisimple: false,
        });
    }
    // Eigenvalues reordered to match the cluster-major column layout.
    let ordered = clusters.iter().flatten().map(|&i| values[i]).collect();
    let condition = condition_number(&vectors);
    Ok(GeneralEigen {
        values: ordered,
        vectors: Some(vectors),
        condition,
        semisimple: condition < SEMISIMPLE_COND,
    })
}

fn cluster_indices(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// Matrix exponential by scaling and squaring with Padé approximants.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.exp()
}

pub fn expm_complex(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.exp()
}

/// `exp(i t H)` for real symmetric `H`, through its eigenbasis.
pub fn unitary_from_symmetric(values: &[f64], vectors: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let n = values.len();
    let v = to_complex(vectors);
    let mut scaled = v.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lambda * t);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * v.transpose()
}

/// Applies the same `k x k` matrix to every slot of a rank-`r` tensor stored
/// row-major (first slot most significant), i.e. `u ⊗ u ⊗ ... ⊗ u`.
pub fn apply_on_all_slots(u: &DMatrix<Complex64>, rank: usize, x: &[Complex64]) -> Vec<Complex64> {
    let k = u.nrows();
    let mut cur = x.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); x.len()];
    for slot in 0..rank {
        let stride = k.pow((rank - 1 - slot) as u32);
        let block = stride * k;
        next.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for outer in (0..cur.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for r in 0..k {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for c in 0..k {
                        acc += u[(r, c)] * cur[base + c * stride];
                    }
                    next[base + r * stride] = acc;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_eigen_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let (vals, _) = symmetric_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rotation_generator_is_semisimple() {
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let eig = general_eigen(&g).unwrap();
        assert!(eig.semisimple);
        assert!(eig.condition < 1.0 + 1e-10);
        for v in eig.values {
            assert!(v.re.abs() < 1e-12 && (v.im.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jordan_block_is_defective() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let eig = general_eigen(&j).unwrap();
        assert!(!eig.semisimple);
        assert!(eig.vectors.is_none());
    }

    #[test]
    fn repeated_eigenvalue_with_full_eigenspace() {
        let g = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        let eig = general_eigen(&g).unwrap();
        assert!(eig.semisimple);
        let v = eig.vectors.unwrap();
        let gc = to_complex(&g);
        for (j, lambda) in eig.values.iter().enumerate() {
            let col = v.column(j);
            let resid = (&gc * col - col * *lambda).norm();
            assert!(resid < 1e-10);
        }
    }

    #[test]
    fn slot_application_matches_kronecker_product() {
        let u = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let uc = to_complex(&u);
        let x: Vec<Complex64> = (0..8).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let got = apply_on_all_slots(&uc, 3, &x);
        let full = to_complex(&kron(&kron(&u, &u), &u));
        let want = &full * nalgebra::DVector::from_vec(x);
        for i in 0..8 {
            assert!((got[i] - want[i]).norm() < 1e-12);
        }
    }
}
