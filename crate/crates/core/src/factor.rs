//! Incidence factors `A = B Bᵀ`, greek coordinates and the encoded
//! moment vector.
//!
//! Greek coordinates are `z_κ = i Σ_j B_jκ q_j` (position type) and
//! `z_κ̄ = Σ_j D_jκ p_j` (momentum type), with `κ` running over the pairs
//! `(j, k)`, `j <= k`. A greek index is linearized as
//! `bar * P + pair_index` with `P = M(M+1)/2`, so the bar flag is the most
//! significant part and pairs follow lexicographic order.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::sparse::SparseSymmetricMatrix;

/// Number of pairs `(j, k)` with `j <= k` over `m` modes.
pub fn pair_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Linear index of the pair `(j, k)`, 0-based, `j <= k`.
pub fn pair_index(m: usize, j: usize, k: usize) -> usize {
    debug_assert!(j <= k && k < m);
    // pairs in rows before j, then the offset within row j
    j * m - (j * j.saturating_sub(1)) / 2 + k - j
}

/// Inverse of [`pair_index`].
pub fn pair_from_index(m: usize, mut idx: usize) -> (usize, usize) {
    for j in 0..m {
        let row = m - j;
        if idx < row {
            return (j, j + idx);
        }
        idx -= row;
    }
    panic!("pair index out of range for {m} modes");
}

/// A greek coordinate label: the pair `(j, k)` (0-based, `j <= k`) and
/// whether it is momentum-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GreekIndex {
    pub j: usize,
    pub k: usize,
    pub bar: bool,
}

impl GreekIndex {
    pub fn new(j: usize, k: usize, bar: bool) -> Self {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        GreekIndex { j, k, bar }
    }

    pub fn is_diagonal(&self) -> bool {
        self.j == self.k
    }
}

impl fmt::Display for GreekIndex {
    /// 1-based, e.g. `(1,2)` or `(1,2)bar`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j + 1, self.k + 1)?;
        if self.bar {
            write!(f, "bar")?;
        }
        Ok(())
    }
}

/// The greek label space for `M` modes: `2 * M(M+1)/2` labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreekSpace {
    pub modes: usize,
}

impl GreekSpace {
    pub fn new(modes: usize) -> Self {
        GreekSpace { modes }
    }

    pub fn pairs(&self) -> usize {
        pair_count(self.modes)
    }

    /// Total number of greek labels.
    pub fn dim(&self) -> usize {
        2 * self.pairs()
    }

    pub fn linear(&self, g: GreekIndex) -> Result<u32> {
        if g.k >= self.modes || g.j > g.k {
            return Err(Error::IndexOutOfRange(format!(
                "greek index {g} outside {} modes",
                self.modes
            )));
        }
        let base = if g.bar { self.pairs() } else { 0 };
        Ok((base + pair_index(self.modes, g.j, g.k)) as u32)
    }

    pub fn label(&self, linear: u32) -> GreekIndex {
        let linear = linear as usize;
        let p = self.pairs();
        let bar = linear >= p;
        let (j, k) = pair_from_index(self.modes, if bar { linear - p } else { linear });
        GreekIndex { j, k, bar }
    }
}

/// Sparse factor `F` of a Laplacian-type matrix, `F Fᵀ = A`, with one
/// column per pair `(j, k)`; zero columns are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct IncidenceFactor {
    modes: usize,
    /// Pair index → nonzero rows `(mode, value)`; at most two per column.
    columns: BTreeMap<usize, Vec<(usize, f64)>>,
    /// Mode → nonzero `(pair index, value)`.
    rows: Vec<Vec<(usize, f64)>>,
}

impl IncidenceFactor {
    pub fn source_dim(&self) -> usize {
        self.modes
    }

    pub fn target_dim(&self) -> usize {
        pair_count(self.modes)
    }

    /// Nonzero entries of column `(j, k)`, 0-based.
    pub fn column(&self, j: usize, k: usize) -> &[(usize, f64)] {
        let (j, k) = if j <= k { (j, k) } else { (k, j) };
        self.columns
            .get(&pair_index(self.modes, j, k))
            .map_or(&[], Vec::as_slice)
    }

    /// Stored (nonzero) columns as `((j, k), entries)`.
    pub fn columns(&self) -> impl Iterator<Item = ((usize, usize), &[(usize, f64)])> + '_ {
        self.columns
            .iter()
            .map(|(&p, e)| (pair_from_index(self.modes, p), e.as_slice()))
    }

    /// Nonzero entries of row `mode` as `(pair index, value)`.
    pub fn row(&self, mode: usize) -> &[(usize, f64)] {
        &self.rows[mode]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.modes, self.target_dim());
        for (&p, entries) in &self.columns {
            for &(r, v) in entries {
                m[(r, p)] = v;
            }
        }
        m
    }
}

/// Builds the incidence factor of a Laplacian-type stiffness matrix:
/// column `(j,k)`, `j<k`, is `√(−A_jk)(e_j − e_k)` and column `(j,j)` is
/// `√(A_jj + Σ_{k≠j} A_jk) e_j`.
pub fn build_incidence_factor(a: &SparseSymmetricMatrix) -> Result<IncidenceFactor> {
    let m = a.dim();
    let mut columns = BTreeMap::new();
    for (j, k, v) in a.upper_entries() {
        if j == k {
            continue;
        }
        if v > 0.0 {
            return Err(Error::SignConvention(format!(
                "positive off-diagonal entry A[{},{}] = {v}",
                j + 1,
                k + 1
            )));
        }
        let w = (-v).sqrt();
        columns.insert(pair_index(m, j, k), vec![(j, w), (k, -w)]);
    }
    for j in 0..m {
        let slack = a.slack(j);
        if slack < 0.0 {
            return Err(Error::SignConvention(format!(
                "negative diagonal slack {slack} at mode {}",
                j + 1
            )));
        }
        if slack > 0.0 {
            columns.insert(pair_index(m, j, j), vec![(j, slack.sqrt())]);
        }
    }
    let mut rows = vec![Vec::new(); m];
    for (&p, entries) in &columns {
        for &(r, v) in entries {
            rows[r].push((p, v));
        }
    }
    Ok(IncidenceFactor {
        modes: m,
        columns,
        rows,
    })
}

/// Moment tensors over the original canonical operators. Index `a < M`
/// is `q_a`, index `M + a` is `p_a`; keys are ordered operator products.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CartesianMoments {
    pub modes: usize,
    pub entries: BTreeMap<Vec<usize>, Complex64>,
}

impl CartesianMoments {
    pub fn new(modes: usize) -> Self {
        CartesianMoments {
            modes,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, index: Vec<usize>, value: Complex64) -> Result<()> {
        if index.is_empty() {
            return Err(Error::Parameter("moments start at order 1".into()));
        }
        if let Some(&bad) = index.iter().find(|&&a| a >= 2 * self.modes) {
            return Err(Error::IndexOutOfRange(format!(
                "canonical index {bad} outside {} modes",
                self.modes
            )));
        }
        *self.entries.entry(index).or_default() += value;
        Ok(())
    }

    pub fn max_order(&self) -> usize {
        self.entries.keys().map(Vec::len).max().unwrap_or(0)
    }
}

/// Moment tensors over greek labels (linearized).
#[derive(Debug, Clone, PartialEq)]
pub struct GreekMoments {
    pub space: GreekSpace,
    pub entries: BTreeMap<Vec<u32>, Complex64>,
}

impl GreekMoments {
    pub fn new(space: GreekSpace) -> Self {
        GreekMoments {
            space,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, labels: &[GreekIndex], value: Complex64) -> Result<()> {
        if labels.is_empty() {
            return Err(Error::Parameter(
                "the vacuum amplitude is fixed; moments start at order 1".into(),
            ));
        }
        let key = labels
            .iter()
            .map(|&g| self.space.linear(g))
            .collect::<Result<Vec<_>>>()?;
        *self.entries.entry(key).or_default() += value;
        Ok(())
    }

    pub fn get(&self, labels: &[GreekIndex]) -> Complex64 {
        labels
            .iter()
            .map(|&g| self.space.linear(g))
            .collect::<Result<Vec<_>>>()
            .ok()
            .and_then(|k| self.entries.get(&k).copied())
            .unwrap_or_default()
    }

    pub fn max_order(&self) -> usize {
        self.entries.keys().map(Vec::len).max().unwrap_or(0)
    }
}

/// Contracts every slot of every cartesian moment tensor with
/// `W = iBᵀ ⊕ Dᵀ`, mapping `⟨z_a1 … z_ar⟩` to greek moments.
pub fn to_greek_moments(
    b: &IncidenceFactor,
    d: &IncidenceFactor,
    cartesian: &CartesianMoments,
) -> Result<GreekMoments> {
    let m = b.source_dim();
    if d.source_dim() != m || cartesian.modes != m {
        return Err(Error::Structural(format!(
            "mode counts differ: B {m}, D {}, moments {}",
            d.source_dim(),
            cartesian.modes
        )));
    }
    let space = GreekSpace::new(m);
    let p = space.pairs();
    // Column a of W as (greek linear index, weight).
    let column = |a: usize| -> Vec<(u32, Complex64)> {
        if a < m {
            b.row(a)
                .iter()
                .map(|&(pair, v)| (pair as u32, Complex64::new(0.0, v)))
                .collect()
        } else {
            d.row(a - m)
                .iter()
                .map(|&(pair, v)| ((p + pair) as u32, Complex64::new(v, 0.0)))
                .collect()
        }
    };
    let mut out = GreekMoments::new(space);
    for (index, &value) in &cartesian.entries {
        if let Some(&bad) = index.iter().find(|&&a| a >= 2 * m) {
            return Err(Error::IndexOutOfRange(format!("canonical index {bad}")));
        }
        let mut partial: Vec<(Vec<u32>, Complex64)> = vec![(Vec::with_capacity(index.len()), value)];
        for &a in index {
            let col = column(a);
            partial = partial
                .into_iter()
                .flat_map(|(key, w)| {
                    col.iter().map(move |&(g, c)| {
                        let mut key = key.clone();
                        key.push(g);
                        (key, w * c)
                    })
                })
                .collect();
        }
        for (key, w) in partial {
            *out.entries.entry(key).or_default() += w;
        }
    }
    Ok(out)
}

/// Normalized amplitude vector over all greek multi-indices of order
/// `0..=order_max`. The order-0 key (empty) is the vacuum component.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub space: GreekSpace,
    pub order_max: usize,
    /// `N`: norm of the unnormalized amplitudes.
    pub normalization: f64,
    pub amplitudes: BTreeMap<Vec<u32>, Complex64>,
}

impl MomentVector {
    pub fn norm(&self) -> f64 {
        self.amplitudes.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn amplitude(&self, key: &[u32]) -> Complex64 {
        self.amplitudes.get(key).copied().unwrap_or_default()
    }

    /// Un-normalized moment `⟨z_α1 … z_αr⟩ = N · amplitude`.
    pub fn moment(&self, labels: &[GreekIndex]) -> Complex64 {
        labels
            .iter()
            .map(|&g| self.space.linear(g))
            .collect::<Result<Vec<_>>>()
            .map(|k| self.amplitude(&k) * self.normalization)
            .unwrap_or_default()
    }

    pub fn vacuum(&self) -> Complex64 {
        self.amplitude(&[])
    }

    pub fn nonzeros(&self) -> usize {
        self.amplitudes.len()
    }

    /// Amplitudes of one order as a dense row-major tensor of length `K^r`.
    pub fn sector_dense(&self, order: usize) -> Vec<Complex64> {
        let k = self.space.dim();
        let mut out = vec![Complex64::default(); k.pow(order as u32)];
        for (key, &z) in self.amplitudes.iter().filter(|(key, _)| key.len() == order) {
            out[linearize(key, k)] = z;
        }
        out
    }

    pub(crate) fn set_sector_dense(&mut self, order: usize, data: &[Complex64]) {
        let k = self.space.dim();
        self.amplitudes.retain(|key, _| key.len() != order);
        for (idx, &z) in data.iter().enumerate() {
            if z != Complex64::default() {
                self.amplitudes.insert(delinearize(idx, k, order), z);
            }
        }
    }
}

pub(crate) fn linearize(key: &[u32], k: usize) -> usize {
    key.iter().fold(0usize, |acc, &g| acc * k + g as usize)
}

pub(crate) fn delinearize(mut idx: usize, k: usize, order: usize) -> Vec<u32> {
    let mut key = vec![0u32; order];
    for slot in (0..order).rev() {
        key[slot] = (idx % k) as u32;
        idx /= k;
    }
    key
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodeOptions {
    /// Include the order-0 vacuum amplitude (unnormalized value 1).
    pub vacuum: bool,
    /// Highest order kept in the state; defaults to the largest order present.
    pub order_max: Option<usize>,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions {
            vacuum: true,
            order_max: None,
        }
    }
}

/// Encodes greek moments (plus the vacuum) into a normalized state.
pub fn encode_state(moments: &GreekMoments, limits: &Limits) -> Result<MomentVector> {
    encode_state_with(moments, EncodeOptions::default(), limits)
}

pub fn encode_state_with(
    moments: &GreekMoments,
    options: EncodeOptions,
    limits: &Limits,
) -> Result<MomentVector> {
    let nonzero = moments.entries.values().filter(|z| z.norm() > 0.0).count();
    if nonzero > limits.max_moments {
        return Err(Error::scale("initial moment list", nonzero, limits.max_moments));
    }
    let order_max = options.order_max.unwrap_or(moments.max_order());
    if moments.max_order() > order_max {
        return Err(Error::Parameter(format!(
            "moments of order {} exceed order_max {order_max}",
            moments.max_order()
        )));
    }
    let mut amplitudes: BTreeMap<Vec<u32>, Complex64> = moments
        .entries
        .iter()
        .filter(|(k, z)| !k.is_empty() && z.norm() > 0.0)
        .map(|(k, &z)| (k.clone(), z))
        .collect();
    if options.vacuum {
        amplitudes.insert(Vec::new(), Complex64::new(1.0, 0.0));
    }
    let n = amplitudes.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::DegenerateState("all amplitudes are zero".into()));
    }
    for z in amplitudes.values_mut() {
        *z /= n;
    }
    Ok(MomentVector {
        space: moments.space,
        order_max,
        normalization: n,
        amplitudes,
    })
}


#[cfg(test)]
mod properties {
    use crate::build_incidence_factor;
    use crate::testutil::{dense_from, random_laplacian, sparse_from};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn incidence_factor_reproduces_matrix(seed in any::<u64>(), m in 1usize..20, d in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trip = random_laplacian(&mut rng, m, d, 0.4);
            let b = build_incidence_factor(&sparse_from(m, &trip)).unwrap().to_dense();
            prop_assert!((&b * b.transpose() - dense_from(m, &trip)).amax() <= 1e-12);
            // At most two nonzeros per column.
            for col in b.column_iter() {
                prop_assert!(col.iter().filter(|v| **v != 0.0).count() <= 2);
            }
        }
    }
}
