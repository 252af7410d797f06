//! Quadratic bosonic Hamiltonians
//! `H = ½ qᵀAq + ½ pᵀCp + ½ Σ F_jk (q_j p_k + p_k q_j)`
//! and their first-moment (Heisenberg) generator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Limits, EXACT_TOL};
use crate::error::{Error, Result};
use crate::linalg::{self, GeneralEigen};
use crate::sparse::{SparseMatrix, SparseSymmetricMatrix};

/// The kernel `{A, C, F}` of a quadratic Hamiltonian on `M` modes.
///
/// `A` couples positions, `C` momenta; `F` is the mixed coupling under the
/// symmetrized ordering `½ F_jk (q_j p_k + p_k q_j)`. Its symmetric part is
/// `E⁺` and its antisymmetric part `E⁻`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    a: SparseSymmetricMatrix,
    c: SparseSymmetricMatrix,
    f: SparseMatrix,
}

impl QuadraticHamiltonian {
    pub fn new(a: SparseSymmetricMatrix, c: SparseSymmetricMatrix, f: SparseMatrix) -> Result<Self> {
        if a.dim() != c.dim() || a.dim() != f.dim() {
            return Err(Error::Structural(format!(
                "dimension mismatch: A is {}, C is {}, F is {}",
                a.dim(),
                c.dim(),
                f.dim()
            )));
        }
        Ok(QuadraticHamiltonian { a, c, f })
    }

    /// Inertially coupled bosons: `F = 0`.
    pub fn inertial(a: SparseSymmetricMatrix, c: SparseSymmetricMatrix) -> Result<Self> {
        let m = a.dim();
        Self::new(a, c, SparseMatrix::zeros(m))
    }

    pub fn modes(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &SparseSymmetricMatrix {
        &self.a
    }

    pub fn c(&self) -> &SparseSymmetricMatrix {
        &self.c
    }

    pub fn f(&self) -> &SparseMatrix {
        &self.f
    }

    /// Same Hamiltonian with modes relabelled by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        QuadraticHamiltonian {
            a: self.a.permuted(perm),
            c: self.c.permuted(perm),
            f: self.f.permuted(perm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub modes: usize,
    /// Largest mirrored-entry mismatch in the input of A and C.
    pub a_asymmetry: f64,
    pub c_asymmetry: f64,
    pub symmetric: bool,
    /// Maximum nonzeros per row/column over A, C and F.
    pub sparsity: usize,
    pub a_laplacian: bool,
    pub c_laplacian: bool,
    /// Smallest eigenvalues, absent when M exceeds the dense cap.
    pub a_min_eigenvalue: Option<f64>,
    pub c_min_eigenvalue: Option<f64>,
    pub a_psd: bool,
    pub c_psd: bool,
}

/// Structural and numeric checks on a Hamiltonian.
///
/// PSD flags come from a dense eigendecomposition when `M` is within
/// `limits.dense_modes`; above it they fall back to the Laplacian check,
/// which implies PSD by diagonal dominance.
pub fn validate(h: &QuadraticHamiltonian, tol: f64, limits: &Limits) -> Result<ValidationReport> {
    let m = h.modes();
    if h.c.dim() != m || h.f.dim() != m {
        return Err(Error::Structural("dimension mismatch between A, C, F".into()));
    }
    let a_laplacian = h.a.is_laplacian_stiffness(tol);
    let c_laplacian = h.c.is_laplacian_stiffness(tol);
    let dense = m <= limits.dense_modes;
    let a_min = dense.then(|| linalg::smallest_symmetric_eigenvalue(&h.a.to_dense()));
    let c_min = dense.then(|| linalg::smallest_symmetric_eigenvalue(&h.c.to_dense()));
    Ok(ValidationReport {
        modes: m,
        a_asymmetry: h.a.asymmetry(),
        c_asymmetry: h.c.asymmetry(),
        symmetric: h.a.asymmetry() <= tol && h.c.asymmetry() <= tol,
        sparsity: h.a.sparsity().max(h.c.sparsity()).max(h.f.sparsity()),
        a_laplacian,
        c_laplacian,
        a_min_eigenvalue: a_min,
        c_min_eigenvalue: c_min,
        a_psd: a_min.map_or(a_laplacian, |v| v >= -tol),
        c_psd: c_min.map_or(c_laplacian, |v| v >= -tol),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HamiltonianTag {
    Inertial,
    HoppingNumberPreserving,
    GeneralQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianClass {
    pub tag: HamiltonianTag,
    pub a_laplacian: bool,
    pub c_laplacian: bool,
    pub a_psd: bool,
    pub c_psd: bool,
    pub ac_positive_spectrum: bool,
    pub bounded_dynamics: bool,
}

/// Places `H` in the class hierarchy.
///
/// * `Inertial`: `F = 0` with `A` and `C` both PSD.
/// * `HoppingNumberPreserving`: otherwise, `E⁺ = 0` and `A = C`.
/// * `GeneralQuadratic`: everything else.
///
/// `bounded_dynamics` holds iff every generator eigenvalue has
/// `|Re λ| <= tol` and the generator is semisimple.
pub fn classify(h: &QuadraticHamiltonian, tol: f64, limits: &Limits) -> Result<HamiltonianClass> {
    let m = h.modes();
    if m > limits.dense_modes {
        return Err(Error::scale("dense classification (modes)", m, limits.dense_modes));
    }
    let report = validate(h, tol, limits)?;
    let f = h.f.to_dense();
    let e_plus = (&f + f.transpose()) * 0.5;
    let a = h.a.to_dense();
    let c = h.c.to_dense();
    let f_zero = linalg::max_abs(&f) <= tol;
    let tag = if f_zero && report.a_psd && report.c_psd {
        HamiltonianTag::Inertial
    } else if linalg::max_abs(&e_plus) <= tol && linalg::max_abs(&(&a - &c)) <= tol {
        HamiltonianTag::HoppingNumberPreserving
    } else {
        HamiltonianTag::GeneralQuadratic
    };

    let ac = linalg::eigenvalues(&(&a * &c))?;
    let ac_positive_spectrum = ac.iter().all(|z| z.im.abs() <= tol && z.re >= -tol);

    let generator = first_moment_generator(h)?;
    let bounded_dynamics = generator.eigen.semisimple
        && generator.eigen.values.iter().all(|z| z.re.abs() <= tol);

    Ok(HamiltonianClass {
        tag,
        a_laplacian: report.a_laplacian,
        c_laplacian: report.c_laplacian,
        a_psd: report.a_psd,
        c_psd: report.c_psd,
        ac_positive_spectrum,
        bounded_dynamics,
    })
}

/// Real generator `G` of `d/dt (q, p) = G (q, p)`.
#[derive(Debug, Clone)]
pub struct FirstMomentGenerator {
    pub matrix: DMatrix<f64>,
    pub eigen: GeneralEigen,
}

/// Generator matrix only, without the eigen analysis.
pub fn generator_matrix(h: &QuadraticHamiltonian) -> DMatrix<f64> {
    let m = h.modes();
    let mut g = DMatrix::zeros(2 * m, 2 * m);
    // q' = Fᵀ q + C p
    for (r, c, v) in h.f.entries() {
        g[(c, r)] += v;
        // p' = -A q - F p
        g[(m + r, m + c)] -= v;
    }
    for (j, k, v) in h.c.upper_entries() {
        g[(j, m + k)] = v;
        g[(k, m + j)] = v;
    }
    for (j, k, v) in h.a.upper_entries() {
        g[(m + j, k)] = -v;
        g[(m + k, j)] = -v;
    }
    g
}

/// Heisenberg generator derived from `[q_j, p_k] = i δ_jk`:
/// `q̇ = Fᵀq + Cp`, `ṗ = −Aq − Fp`; for `F = 0` this is `[[0, C], [−A, 0]]`.
pub fn first_moment_generator(h: &QuadraticHamiltonian) -> Result<FirstMomentGenerator> {
    let matrix = generator_matrix(h);
    let eigen = linalg::general_eigen(&matrix)?;
    Ok(FirstMomentGenerator { matrix, eigen })
}

/// `Σ = ½(A+C)`, `Δ = ½(A−C)`, `E⁺ = sym F`, `E⁻ = antisym F`, with the
/// residual of re-assembling the generator from its Pauli-block form.
#[derive(Debug, Clone)]
pub struct GeneratorDecomposition {
    pub sigma: DMatrix<f64>,
    pub delta: DMatrix<f64>,
    pub e_plus: DMatrix<f64>,
    pub e_minus: DMatrix<f64>,
    /// `‖V G V⁻¹ − (−i)(𝟙⊗E⁻ + iZ⊗E⁺ + iY⊗Δ − X⊗Σ)‖_max` with `V = diag(i𝟙, 𝟙)`.
    /// Diagnostic only: it vanishes for `E⁻ = 0` and equals `√2·‖E⁻‖_max`
    /// otherwise, because the block form treats `E⁻` as carrying a factor `i`.
    pub reassembly_residual: f64,
}

pub fn decompose_generator(h: &QuadraticHamiltonian) -> GeneratorDecomposition {
    let m = h.modes();
    let a = h.a.to_dense();
    let c = h.c.to_dense();
    let f = h.f.to_dense();
    let sigma = (&a + &c) * 0.5;
    let delta = (&a - &c) * 0.5;
    let e_plus = (&f + f.transpose()) * 0.5;
    let e_minus = (&f - f.transpose()) * 0.5;

    let g = linalg::to_complex(&generator_matrix(h));
    let i = Complex64::i();
    let mut v = DMatrix::<Complex64>::identity(2 * m, 2 * m);
    let mut v_inv = DMatrix::<Complex64>::identity(2 * m, 2 * m);
    for j in 0..m {
        v[(j, j)] = i;
        v_inv[(j, j)] = -i;
    }
    let transformed = &v * g * &v_inv;

    let one = DMatrix::<Complex64>::identity(2, 2);
    let iz = DMatrix::from_row_slice(2, 2, &[i, 0.0.into(), 0.0.into(), -i]);
    let iy = DMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), (-1.0).into(), 0.0.into()]);
    let x = DMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), 1.0.into(), 0.0.into()]);
    let assembled = one.kronecker(&linalg::to_complex(&e_minus))
        + iz.kronecker(&linalg::to_complex(&e_plus))
        + iy.kronecker(&linalg::to_complex(&delta))
        - x.kronecker(&linalg::to_complex(&sigma));
    let residual = linalg::max_abs_complex(&(transformed - assembled * (-i)));

    GeneratorDecomposition {
        sigma,
        delta,
        e_plus,
        e_minus,
        reassembly_residual: residual,
    }
}

/// Default tolerance wrapper for the common case.
pub fn classify_default(h: &QuadraticHamiltonian) -> Result<HamiltonianClass> {
    classify(h, EXACT_TOL, &Limits::default())
}
