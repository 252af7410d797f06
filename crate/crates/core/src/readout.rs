//! Population readouts, the threshold decision, and reconstruction of
//! cartesian moments from greek amplitudes.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::SIGN_THRESHOLD;
use crate::error::{Error, Result};
use crate::factor::{GreekIndex, MomentVector};
use crate::sparse::SparseSymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairPattern {
    Any,
    /// Exactly the pair `(j, k)`, 0-based.
    Fixed(usize, usize),
    /// Any pair with `j` as one of its two modes.
    Touching(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotPattern {
    pub pair: PairPattern,
    /// `None` accepts both position- and momentum-type labels.
    pub bar: Option<bool>,
}

impl SlotPattern {
    pub const ANY: SlotPattern = SlotPattern {
        pair: PairPattern::Any,
        bar: None,
    };

    pub fn matches(&self, g: GreekIndex) -> bool {
        let pair = match self.pair {
            PairPattern::Any => true,
            PairPattern::Fixed(j, k) => {
                let (j, k) = if j <= k { (j, k) } else { (k, j) };
                g.j == j && g.k == k
            }
            PairPattern::Touching(j) => g.j == j || g.k == j,
        };
        pair && self.bar.is_none_or(|b| b == g.bar)
    }
}

/// A multi-index template: one pattern per slot. With `repeat_last` the
/// final slot pattern also covers every further slot, so the template
/// matches all orders `>= slots.len()`. An empty template is the vacuum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub slots: Vec<SlotPattern>,
    pub repeat_last: bool,
}

impl Template {
    pub fn vacuum() -> Self {
        Template {
            slots: Vec::new(),
            repeat_last: false,
        }
    }

    pub fn matches(&self, labels: &[GreekIndex]) -> bool {
        let n = self.slots.len();
        let order_ok = if self.repeat_last && n > 0 {
            labels.len() >= n
        } else {
            labels.len() == n
        };
        order_ok
            && labels
                .iter()
                .enumerate()
                .all(|(i, &g)| self.slots[i.min(n.saturating_sub(1))].matches(g))
    }
}

/// Set of greek multi-indices: a union of templates restricted to an order
/// range, optionally complemented within that range.
///
/// Textual form (mode numbers 1-based):
///
/// ```text
/// spec     := ["!"] ["r=" MIN ".." MAX ";"] body
/// body     := "all" | "none" | template ("|" template)*
/// template := "vac" | slot+ ["..."]
/// slot     := pair [":" kind] | kind
/// pair     := "*" | "(" J "," K ")" | "(" J ",*)"
/// kind     := "bar" | "nobar"
/// ```
///
/// Slots are separated by whitespace. A trailing `...` repeats the last
/// slot, e.g. `*...` is every multi-index of order at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSetSpec {
    pub templates: Vec<Template>,
    pub order_min: usize,
    /// `None` means up to the state's maximal order.
    pub order_max: Option<usize>,
    pub negated: bool,
    source: Option<String>,
}

impl IndexSetSpec {
    pub fn new(templates: Vec<Template>) -> Self {
        IndexSetSpec {
            templates,
            order_min: 0,
            order_max: None,
            negated: false,
            source: None,
        }
    }

    /// The vacuum plus every multi-index.
    pub fn all() -> Self {
        IndexSetSpec::new(vec![
            Template::vacuum(),
            Template {
                slots: vec![SlotPattern::ANY],
                repeat_last: true,
            },
        ])
    }

    pub fn empty() -> Self {
        IndexSetSpec::new(Vec::new())
    }

    /// A single exact multi-index.
    pub fn exact(labels: &[GreekIndex]) -> Self {
        IndexSetSpec::new(vec![Template {
            slots: labels
                .iter()
                .map(|g| SlotPattern {
                    pair: PairPattern::Fixed(g.j, g.k),
                    bar: Some(g.bar),
                })
                .collect(),
            repeat_last: false,
        }])
    }

    pub fn with_orders(mut self, min: usize, max: usize) -> Self {
        self.order_min = min;
        self.order_max = Some(max);
        self
    }

    pub fn complement(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    /// Membership within the order range `order_min..=order_max`, where an
    /// open upper end is `state_order`.
    pub fn contains(&self, labels: &[GreekIndex], state_order: usize) -> bool {
        let r = labels.len();
        let hi = self.order_max.unwrap_or(state_order);
        if r < self.order_min || r > hi {
            return false;
        }
        self.templates.iter().any(|t| t.matches(labels)) != self.negated
    }
}

impl fmt::Display for IndexSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.source {
            return f.write_str(s);
        }
        if self.negated {
            f.write_str("!")?;
        }
        if self.order_min != 0 || self.order_max.is_some() {
            match self.order_max {
                Some(hi) => write!(f, "r={}..{};", self.order_min, hi)?,
                None => write!(f, "r={}..;", self.order_min)?,
            }
        }
        if self.templates.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = self
            .templates
            .iter()
            .map(|t| {
                if t.slots.is_empty() {
                    return "vac".to_string();
                }
                let mut s = t.slots.iter().map(slot_text).collect::<Vec<_>>().join(" ");
                if t.repeat_last {
                    s.push_str("...");
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" | "))
    }
}

fn slot_text(s: &SlotPattern) -> String {
    let pair = match s.pair {
        PairPattern::Any => "*".to_string(),
        PairPattern::Fixed(j, k) => format!("({},{})", j + 1, k + 1),
        PairPattern::Touching(j) => format!("({},*)", j + 1),
    };
    match s.bar {
        None => pair,
        Some(true) => format!("{pair}:bar"),
        Some(false) => format!("{pair}:nobar"),
    }
}

fn spec_error(text: &str, message: impl Into<String>) -> Error {
    Error::parse(format!("readout spec `{text}`"), message)
}

fn parse_mode(text: &str, tok: &str) -> Result<usize> {
    let v: usize = tok
        .trim()
        .parse()
        .map_err(|_| spec_error(text, format!("bad mode number `{tok}`")))?;
    v.checked_sub(1)
        .ok_or_else(|| spec_error(text, "mode numbers are 1-based"))
}

fn parse_slot(text: &str, tok: &str) -> Result<SlotPattern> {
    let kind = |k: &str| match k {
        "bar" => Ok(Some(true)),
        "nobar" => Ok(Some(false)),
        _ => Err(spec_error(text, format!("unknown kind `{k}`"))),
    };
    if tok == "bar" || tok == "nobar" {
        return Ok(SlotPattern {
            pair: PairPattern::Any,
            bar: kind(tok)?,
        });
    }
    let (pair_tok, bar) = match tok.split_once(':') {
        Some((p, k)) => (p, kind(k)?),
        None => (tok, None),
    };
    let pair = if pair_tok == "*" {
        PairPattern::Any
    } else {
        let inner = pair_tok
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| spec_error(text, format!("bad slot `{tok}`")))?;
        let (a, b) = inner
            .split_once(',')
            .ok_or_else(|| spec_error(text, format!("bad pair `{pair_tok}`")))?;
        let j = parse_mode(text, a)?;
        if b.trim() == "*" {
            PairPattern::Touching(j)
        } else {
            PairPattern::Fixed(j, parse_mode(text, b)?)
        }
    };
    Ok(SlotPattern { pair, bar })
}

fn parse_template(text: &str, part: &str) -> Result<Template> {
    let part = part.trim();
    if part == "vac" {
        return Ok(Template::vacuum());
    }
    let (body, repeat_last) = match part.strip_suffix("...") {
        Some(b) => (b.trim_end(), true),
        None => (part, false),
    };
    let slots = body
        .split_whitespace()
        .map(|tok| parse_slot(text, tok))
        .collect::<Result<Vec<_>>>()?;
    if slots.is_empty() {
        return Err(spec_error(text, "empty template"));
    }
    Ok(Template { slots, repeat_last })
}

impl FromStr for IndexSetSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut rest = text.trim();
        let negated = match rest.strip_prefix('!') {
            Some(r) => {
                rest = r.trim_start();
                true
            }
            None => false,
        };
        let (mut order_min, mut order_max) = (0, None);
        if let Some(r) = rest.strip_prefix("r=") {
            let (range, body) = r
                .split_once(';')
                .ok_or_else(|| spec_error(text, "order range must end with `;`"))?;
            let (lo, hi) = range
                .split_once("..")
                .ok_or_else(|| spec_error(text, "order range must be `MIN..MAX`"))?;
            order_min = lo
                .trim()
                .parse()
                .map_err(|_| spec_error(text, format!("bad order `{lo}`")))?;
            if !hi.trim().is_empty() {
                let hi: usize = hi
                    .trim()
                    .parse()
                    .map_err(|_| spec_error(text, format!("bad order `{hi}`")))?;
                if hi < order_min {
                    return Err(spec_error(text, "empty order range"));
                }
                order_max = Some(hi);
            }
            rest = body.trim();
        }
        let mut spec = match rest {
            "all" => IndexSetSpec::all(),
            "none" | "" => IndexSetSpec::empty(),
            _ => IndexSetSpec::new(
                rest.split('|')
                    .map(|part| parse_template(text, part))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        spec.order_min = order_min;
        spec.order_max = order_max;
        spec.negated = negated;
        spec.source = Some(text.trim().to_string());
        Ok(spec)
    }
}

/// `ζ(I) = N² Σ_{α ∈ I} |ψ_α|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationResult {
    pub zeta: f64,
    pub contributing_count: usize,
    pub time: f64,
}

pub fn zeta(psi: &MomentVector, set: &IndexSetSpec, time: f64) -> Result<PopulationResult> {
    if let Some(hi) = set.order_max {
        if hi > psi.order_max {
            return Err(Error::Parameter(format!(
                "readout order {hi} exceeds the state's maximal order {}",
                psi.order_max
            )));
        }
    }
    if set.order_min > psi.order_max {
        return Err(Error::Parameter(format!(
            "readout order {} exceeds the state's maximal order {}",
            set.order_min, psi.order_max
        )));
    }
    let mut sum = 0.0;
    let mut count = 0;
    let mut labels = Vec::with_capacity(psi.order_max);
    for (key, amp) in &psi.amplitudes {
        labels.clear();
        labels.extend(key.iter().map(|&g| psi.space.label(g)));
        if set.contains(&labels, psi.order_max) {
            sum += amp.norm_sqr();
            count += 1;
        }
    }
    Ok(PopulationResult {
        zeta: sum * psi.normalization * psi.normalization,
        contributing_count: count,
        time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    AboveA,
    BelowB,
    PromiseViolation,
}

pub fn decide(zeta: f64, a: f64, b: f64) -> Result<Decision> {
    decide_with_gap(zeta, a, b, 0.0)
}

/// Three-way decision; `min_gap` is the smallest admissible `a − b`.
pub fn decide_with_gap(zeta: f64, a: f64, b: f64, min_gap: f64) -> Result<Decision> {
    if !(a > b) {
        return Err(Error::Parameter(format!("need a > b, got a={a}, b={b}")));
    }
    if a - b < min_gap {
        return Err(Error::Parameter(format!(
            "gap a-b={} is below the configured minimum {min_gap}",
            a - b
        )));
    }
    Ok(if zeta > a {
        Decision::AboveA
    } else if zeta < b {
        Decision::BelowB
    } else {
        Decision::PromiseViolation
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReconstructionTarget {
    /// `⟨q_mode⟩`, or `⟨p_mode⟩` when `bar`.
    First { mode: usize, bar: bool },
    /// `⟨q_j q_k⟩`, or `⟨p_j p_k⟩` when `bar`.
    Second { j: usize, k: usize, bar: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReconstructionPath {
    /// From the diagonal coordinate(s) of the target modes.
    Diagonal,
    /// Through relative coordinates along the coupling graph to `anchor`.
    Relative { anchor: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionEstimate {
    pub target: ReconstructionTarget,
    pub magnitude: f64,
    /// `+1`/`-1` from the vacuum interference; `None` below the threshold.
    pub sign: Option<i8>,
    pub value: f64,
    /// Second moments: the estimate through the three squared
    /// coordinates, when the pair is coupled.
    pub value_squares: Option<f64>,
    /// `|value − value_squares|`.
    pub discrepancy: Option<f64>,
    pub path: ReconstructionPath,
}

/// A greek moment with its `i^s` phase removed, `s` the number of
/// position-type slots, so that real cartesian moments give real values.
fn stripped(psi: &MomentVector, labels: &[GreekIndex]) -> Result<Complex64> {
    let keys = labels
        .iter()
        .map(|&g| psi.space.linear(g))
        .collect::<Result<Vec<_>>>()?;
    if keys.len() > psi.order_max {
        return Err(Error::Parameter(format!(
            "moment of order {} not stored (order_max {})",
            keys.len(),
            psi.order_max
        )));
    }
    let s = labels.iter().filter(|g| !g.bar).count();
    let phase = Complex64::i().powu(s as u32);
    Ok(psi.amplitude(&keys) / phase)
}

/// Sign from the Hadamard-mixed probabilities `|v ± a|²/2`.
fn interference_sign(vacuum: Complex64, amp: Complex64, moment: f64) -> Option<i8> {
    if moment.abs() < SIGN_THRESHOLD || vacuum.norm() == 0.0 {
        return None;
    }
    let plus = (vacuum + amp).norm_sqr() / 2.0;
    let minus = (vacuum - amp).norm_sqr() / 2.0;
    if plus > minus {
        Some(1)
    } else if minus > plus {
        Some(-1)
    } else {
        None
    }
}

fn signed_value(magnitude: f64, sign: Option<i8>) -> f64 {
    match sign {
        Some(-1) => -magnitude,
        _ => magnitude,
    }
}

/// Reconstructs cartesian first or second moments. Positions use the
/// stiffness matrix `a`, momenta use `c`.
pub fn reconstruct(
    psi: &MomentVector,
    a: &SparseSymmetricMatrix,
    c: &SparseSymmetricMatrix,
    target: ReconstructionTarget,
) -> Result<ReconstructionEstimate> {
    let m = psi.space.modes;
    if a.dim() != m || c.dim() != m {
        return Err(Error::Structural(format!(
            "matrices are {}x{} and {}x{} for {m} modes",
            a.dim(),
            a.dim(),
            c.dim(),
            c.dim()
        )));
    }
    match target {
        ReconstructionTarget::First { mode, bar } => {
            if mode >= m {
                return Err(Error::IndexOutOfRange(format!("mode {mode}")));
            }
            first_moment(psi, if bar { c } else { a }, mode, bar, target)
        }
        ReconstructionTarget::Second { j, k, bar } => {
            if j >= m || k >= m {
                return Err(Error::IndexOutOfRange(format!("modes ({j},{k})")));
            }
            second_moment(psi, if bar { c } else { a }, j, k, bar, target)
        }
    }
}

fn first_moment(
    psi: &MomentVector,
    stiff: &SparseSymmetricMatrix,
    mode: usize,
    bar: bool,
    target: ReconstructionTarget,
) -> Result<ReconstructionEstimate> {
    let vacuum = psi.vacuum();
    let n = psi.normalization;
    let slack = stiff.slack(mode);
    if slack > 0.0 {
        let amp = stripped(psi, &[GreekIndex::new(mode, mode, bar)])?;
        let magnitude = amp.norm() * n / slack.sqrt();
        let sign = interference_sign(vacuum, amp, magnitude);
        return Ok(ReconstructionEstimate {
            target,
            magnitude,
            sign,
            value: signed_value(magnitude, sign),
            value_squares: None,
            discrepancy: None,
            path: ReconstructionPath::Diagonal,
        });
    }
    // Breadth-first search through couplings to a mode with positive slack.
    let dim = stiff.dim();
    let mut parent = vec![usize::MAX; dim];
    let mut seen = BTreeSet::from([mode]);
    let mut queue = VecDeque::from([mode]);
    let mut anchor = None;
    while let Some(u) = queue.pop_front() {
        if stiff.slack(u) > 0.0 {
            anchor = Some(u);
            break;
        }
        let mut nbrs: Vec<usize> = stiff
            .row(u)
            .iter()
            .filter(|&&(v, w)| v != u && w < 0.0)
            .map(|&(v, _)| v)
            .collect();
        nbrs.sort_unstable();
        for v in nbrs {
            if seen.insert(v) {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    let anchor = anchor.ok_or_else(|| {
        Error::NotReconstructible(format!(
            "mode {} has zero slack and no coupled mode with positive slack",
            mode + 1
        ))
    })?;
    let anchor_amp = stripped(psi, &[GreekIndex::new(anchor, anchor, bar)])?;
    let mut value = (anchor_amp * n / stiff.slack(anchor).sqrt()).re;
    // Walk back from the anchor: x_u = x_v + (x_u − x_v).
    let mut v = anchor;
    while v != mode {
        let u = parent[v];
        let (lo, hi) = (u.min(v), u.max(v));
        let rel = stripped(psi, &[GreekIndex::new(lo, hi, bar)])?.re * n / (-stiff.get(lo, hi)).sqrt();
        // rel = x_lo − x_hi
        value += if u == lo { rel } else { -rel };
        v = u;
    }
    let magnitude = value.abs();
    let sign = if magnitude < SIGN_THRESHOLD {
        None
    } else {
        Some(if value > 0.0 { 1 } else { -1 })
    };
    Ok(ReconstructionEstimate {
        target,
        magnitude,
        sign,
        value: signed_value(magnitude, sign),
        value_squares: None,
        discrepancy: None,
        path: ReconstructionPath::Relative { anchor },
    })
}

fn second_moment(
    psi: &MomentVector,
    stiff: &SparseSymmetricMatrix,
    j: usize,
    k: usize,
    bar: bool,
    target: ReconstructionTarget,
) -> Result<ReconstructionEstimate> {
    let (sj, sk) = (stiff.slack(j), stiff.slack(k));
    if sj <= 0.0 || sk <= 0.0 {
        return Err(Error::NotReconstructible(format!(
            "second moment of modes ({},{}) needs positive slack on both",
            j + 1,
            k + 1
        )));
    }
    let n = psi.normalization;
    let zj = GreekIndex::new(j, j, bar);
    let zk = GreekIndex::new(k, k, bar);
    let amp = stripped(psi, &[zj, zk])?;
    let scale = n / (sj.sqrt() * sk.sqrt());
    let magnitude = amp.norm() * scale;
    let sign = interference_sign(psi.vacuum(), amp, magnitude);
    let value = signed_value(magnitude, sign);

    let coupling = stiff.get(j, k);
    let value_squares = if j != k && coupling < 0.0 {
        let sq = |g: GreekIndex| stripped(psi, &[g, g]).map(|z| z.re * n);
        let jj = sq(zj)? / sj;
        let kk = sq(zk)? / sk;
        // (x_j − x_k)² through the relative coordinate; its stripped square
        // carries −A_jk.
        let rel = sq(GreekIndex::new(j, k, bar))? / -coupling;
        Some(0.5 * (jj + kk - rel))
    } else {
        None
    };
    Ok(ReconstructionEstimate {
        target,
        magnitude,
        sign,
        value,
        value_squares,
        discrepancy: value_squares.map(|v| (v - value).abs()),
        path: ReconstructionPath::Diagonal,
    })
}


#[cfg(test)]
mod properties {
    use crate::testutil::instance;
    use crate::{build_incidence_factor, effective_hamiltonian, evolve_moment_vector, zeta, GreekIndex, IndexSetSpec, Limits};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn populations_sum_and_nest(seed in any::<u64>(), t in 0.0f64..5.0) {
            let (h, psi) = instance(seed, 3, 2);
            let h0 = effective_hamiltonian(
                &build_incidence_factor(h.a()).unwrap(),
                &build_incidence_factor(h.c()).unwrap(),
            ).unwrap();
            let state = evolve_moment_vector(&h0, &psi, t, 1e-9, &Limits::default()).unwrap().state;
            let n2 = state.normalization.powi(2);
            let all = zeta(&state, &IndexSetSpec::all(), t).unwrap().zeta;
            prop_assert!((all - n2).abs() <= 1e-9 * n2);
            // A single-slot template without `...` selects exactly order one.
            let first: IndexSetSpec = "*".parse().unwrap();
            let z1 = zeta(&state, &first, t).unwrap().zeta;
            let rest = zeta(&state, &first.clone().complement(), t).unwrap().zeta;
            prop_assert!((z1 + rest - all).abs() <= 1e-9 * n2);
            let narrower: IndexSetSpec = "(1,*)".parse().unwrap();
            prop_assert!(zeta(&state, &narrower, t).unwrap().zeta <= z1 + 1e-12);
            // Each order sector evolves on its own, so its population is conserved.
            let z1_initial = zeta(&psi, &first, 0.0).unwrap().zeta;
            prop_assert!((z1 - z1_initial).abs() <= 1e-9 * n2);
        }

        #[test]
        fn index_set_text_round_trip(
            lo in 0usize..3,
            span in 0usize..3,
            negate in any::<bool>(),
            j in 1usize..4,
            k in 1usize..4,
            bar in proptest::option::of(any::<bool>()),
            repeat in any::<bool>(),
        ) {
            let slot = match bar {
                None => format!("({j},{k})"),
                Some(true) => format!("({j},{k}):bar"),
                Some(false) => format!("({j},*):nobar"),
            };
            let text = format!(
                "{}r={}..{}; {}{} | vac",
                if negate { "!" } else { "" },
                lo,
                lo + span,
                slot,
                if repeat { "..." } else { "" },
            );
            let spec: IndexSetSpec = text.parse().unwrap();
            let again: IndexSetSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(spec.to_string(), again.to_string());
            let probes = [
                vec![],
                vec![GreekIndex::new(0, 1, false)],
                vec![GreekIndex::new(j - 1, k - 1, true), GreekIndex::new(j - 1, k - 1, true)],
                vec![GreekIndex::new(j - 1, 3, false); 3],
            ];
            for labels in &probes {
                prop_assert_eq!(spec.contains(labels, 4), again.contains(labels, 4));
            }
        }
    }
}
