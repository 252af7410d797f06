//! Tolerances and size caps shared by every module.

/// Tolerance for identities that hold exactly in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance for time-evolved quantities.
pub const EVOLVED_TOL: f64 = 1e-8;
/// Eigenvector-matrix condition number above which a matrix counts as defective.
pub const SEMISIMPLE_COND: f64 = 1e8;
/// Eigenvalues of magnitude below this are treated as zero in the
/// closed-form second-order evolution.
pub const ZERO_EIGEN_CUTOFF: f64 = 1e-12;
/// Smallest magnitude for which a sign is asserted during reconstruction.
pub const SIGN_THRESHOLD: f64 = 1e-6;

/// Environment variable overriding [`Limits::dense_sector`].
pub const CAP_ENV_VAR: &str = "BOSON_MOMENTS_CAP";

/// Size limits for the dense code paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest mode count M for dense spectral checks on the Hamiltonian.
    pub dense_modes: usize,
    /// Largest rank-r sector evolved through the eigenbasis of H0;
    /// larger sectors use the matrix-free Krylov action.
    pub dense_sector: usize,
    /// Hard cap on the number of amplitudes in a single sector.
    pub max_sector: usize,
    /// Cap on the number of explicitly listed initial moments.
    pub max_moments: usize,
    /// Cap on the mode count (L+2)*2^n of a Feynman-Kitaev gadget.
    pub max_gadget_modes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            dense_modes: 64,
            dense_sector: 4096,
            max_sector: 1 << 22,
            max_moments: 1 << 16,
            max_gadget_modes: 4096,
        }
    }
}

impl Limits {
    /// Defaults with `dense_sector` taken from `BOSON_MOMENTS_CAP` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var(CAP_ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.dense_sector = cap;
        }
        limits
    }
}
