//! Instance files, graph and circuit text formats, and CSV helpers.
//!
//! All indices in files are 1-based.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{
    build_incidence_factor, to_greek_moments, CartesianMoments, GreekIndex, GreekMoments, GreekSpace,
};
use crate::gadget::{Circuit, Gate};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::readout::IndexSetSpec;
use crate::sparse::{SparseMatrix, SparseSymmetricMatrix};
use crate::walk::WalkGraph;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    #[default]
    Cartesian,
    Greek,
}

/// One initial moment. Exactly one of `cartesian` (`[mode, bar]` per slot,
/// `bar` selecting momentum) or `greek` (`[j, k, bar]` per slot) is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartesian: Option<Vec<(usize, bool)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greek: Option<Vec<(usize, usize, bool)>>,
    /// `[re, im]`.
    pub value: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionParams {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub modes: usize,
    #[serde(rename = "A")]
    pub a: Vec<(usize, usize, f64)>,
    #[serde(rename = "C")]
    pub c: Vec<(usize, usize, f64)>,
    #[serde(rename = "F", default)]
    pub f: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub mode: InputMode,
    #[serde(default)]
    pub moments: Vec<MomentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<String>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_max: Option<usize>,
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::parse(field, message)
}

fn zero_based(field: &str, v: usize, bound: usize) -> Result<usize> {
    if v == 0 || v > bound {
        return Err(field_error(field, format!("index {v} outside 1..={bound}")));
    }
    Ok(v - 1)
}

fn triplets(field: &str, list: &[(usize, usize, f64)], m: usize) -> Result<Vec<(usize, usize, f64)>> {
    list.iter()
        .enumerate()
        .map(|(i, &(j, k, v))| {
            let at = format!("{field}[{i}]");
            if !v.is_finite() {
                return Err(field_error(at, "value is not finite"));
            }
            Ok((zero_based(&at, j, m)?, zero_based(&at, k, m)?, v))
        })
        .collect()
}

fn with_field(field: &str, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => field_error(field, other.to_string()),
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
            field_error(format!("line {}, column {}", e.line(), e.column()), e.to_string())
        })?;
        file.check()?;
        Ok(file)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| field_error(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { location, message } => Error::Parse {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(field_error(
                "version",
                format!("unsupported version {}, expected {FORMAT_VERSION}", self.version),
            ));
        }
        if self.modes == 0 {
            return Err(field_error("modes", "must be at least 1"));
        }
        for (i, m) in self.moments.iter().enumerate() {
            let at = format!("moments[{i}]");
            match (&m.cartesian, &m.greek, self.mode) {
                (Some(_), None, InputMode::Cartesian) | (None, Some(_), InputMode::Greek) => {}
                (Some(_), Some(_), _) | (None, None, _) => {
                    return Err(field_error(at, "exactly one of `cartesian` or `greek` is required"))
                }
                _ => {
                    return Err(field_error(
                        at,
                        format!("index kind does not match mode `{:?}`", self.mode).to_lowercase(),
                    ))
                }
            }
            if !m.value.iter().all(|v| v.is_finite()) {
                return Err(field_error(format!("{at}.value"), "value is not finite"));
            }
        }
        for (i, t) in self.times.iter().enumerate() {
            if !t.is_finite() {
                return Err(field_error(format!("times[{i}]"), "time is not finite"));
            }
        }
        if let Some(r) = &self.readout {
            r.parse::<IndexSetSpec>().map_err(|e| with_field("readout", e))?;
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        let m = self.modes;
        let a = SparseSymmetricMatrix::from_triplets(m, triplets("A", &self.a, m)?)
            .map_err(|e| with_field("A", e))?;
        let c = SparseSymmetricMatrix::from_triplets(m, triplets("C", &self.c, m)?)
            .map_err(|e| with_field("C", e))?;
        let f = SparseMatrix::from_triplets(m, triplets("F", &self.f, m)?).map_err(|e| with_field("F", e))?;
        QuadraticHamiltonian::new(a, c, f)
    }

    pub fn cartesian_moments(&self) -> Result<CartesianMoments> {
        let m = self.modes;
        let mut out = CartesianMoments::new(m);
        for (i, entry) in self.moments.iter().enumerate() {
            let at = format!("moments[{i}].cartesian");
            let slots = entry
                .cartesian
                .as_ref()
                .ok_or_else(|| field_error(&at, "missing"))?;
            let index = slots
                .iter()
                .map(|&(mode, bar)| Ok(zero_based(&at, mode, m)? + if bar { m } else { 0 }))
                .collect::<Result<Vec<_>>>()?;
            out.insert(index, Complex64::new(entry.value[0], entry.value[1]))
                .map_err(|e| with_field(&at, e))?;
        }
        Ok(out)
    }

    /// Greek moments: given directly, or pushed through the incidence
    /// factors of `A` and `C` for cartesian input.
    pub fn greek_moments(&self, h: &QuadraticHamiltonian) -> Result<GreekMoments> {
        let m = self.modes;
        match self.mode {
            InputMode::Cartesian => {
                let b = build_incidence_factor(h.a())?;
                let d = build_incidence_factor(h.c())?;
                to_greek_moments(&b, &d, &self.cartesian_moments()?)
            }
            InputMode::Greek => {
                let mut out = GreekMoments::new(GreekSpace::new(m));
                for (i, entry) in self.moments.iter().enumerate() {
                    let at = format!("moments[{i}].greek");
                    let slots = entry.greek.as_ref().ok_or_else(|| field_error(&at, "missing"))?;
                    let labels = slots
                        .iter()
                        .map(|&(j, k, bar)| Ok(GreekIndex::new(zero_based(&at, j, m)?, zero_based(&at, k, m)?, bar)))
                        .collect::<Result<Vec<_>>>()?;
                    out.insert(&labels, Complex64::new(entry.value[0], entry.value[1]))
                        .map_err(|e| with_field(&at, e))?;
                }
                Ok(out)
            }
        }
    }

    pub fn readout_spec(&self) -> Result<Option<IndexSetSpec>> {
        self.readout
            .as_deref()
            .map(|r| r.parse().map_err(|e| with_field("readout", e)))
            .transpose()
    }

    /// Sorted triplets; symmetric matrices keep only `j <= k`.
    pub fn canonicalize(&mut self) {
        let sym = |list: &mut Vec<(usize, usize, f64)>| {
            for t in list.iter_mut() {
                if t.0 > t.1 {
                    *t = (t.1, t.0, t.2);
                }
            }
            list.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
            list.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1 && x.2 == y.2);
        };
        sym(&mut self.a);
        sym(&mut self.c);
        self.f.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    }

    pub fn to_json(&self) -> String {
        let mut canon = self.clone();
        canon.canonicalize();
        serde_json::to_string_pretty(&canon).expect("instance serialization cannot fail")
    }
}

fn line_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::parse(format!("{source}:{line}"), message)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Edge list: `j k [weight]` per line, 1-based, weight 1 by default;
/// an optional `vertices M` line fixes the vertex count, otherwise it is
/// the largest index seen. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<WalkGraph> {
    let src = "edge list";
    let mut vertices = None;
    let mut edges = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "vertices" {
            if toks.len() != 2 || vertices.is_some() || !edges.is_empty() {
                return Err(line_error(src, ln, "`vertices M` must appear once, before any edge"));
            }
            vertices = Some(
                toks[1]
                    .parse::<usize>()
                    .map_err(|_| line_error(src, ln, format!("bad vertex count `{}`", toks[1])))?,
            );
            continue;
        }
        if toks.len() < 2 || toks.len() > 3 {
            return Err(line_error(src, ln, "expected `j k [weight]`"));
        }
        let idx = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(line_error(src, ln, format!("bad vertex `{t}` (1-based)"))),
            }
        };
        let (j, k) = (idx(toks[0])?, idx(toks[1])?);
        let w = match toks.get(2) {
            Some(t) => t
                .parse::<f64>()
                .map_err(|_| line_error(src, ln, format!("bad weight `{t}`")))?,
            None => 1.0,
        };
        edges.push((ln, j, k, w));
    }
    let m = vertices.unwrap_or_else(|| edges.iter().map(|e| e.1.max(e.2)).max().unwrap_or(0));
    if m == 0 {
        return Err(line_error(src, 1, "graph has no vertices"));
    }
    if let Some(&(ln, j, k, _)) = edges.iter().find(|e| e.1 > m || e.2 > m) {
        return Err(line_error(src, ln, format!("edge ({j},{k}) exceeds {m} vertices")));
    }
    WalkGraph::from_edges(m, edges.iter().map(|&(_, j, k, w)| (j - 1, k - 1, w))).map_err(|e| match e {
        Error::Parse { .. } => e,
        other => Error::parse(src, other.to_string()),
    })
}

/// Circuit file: `qubits n` header, then `H t` or `CCX c1 c2 t` per line,
/// 1-based qubits.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let src = "circuit";
    let mut qubits = None;
    let mut gates = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let nums = |want: usize| -> Result<Vec<usize>> {
            if toks.len() != want + 1 {
                return Err(line_error(src, ln, format!("`{}` takes {want} operand(s)", toks[0])));
            }
            toks[1..]
                .iter()
                .map(|t| match t.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(line_error(src, ln, format!("bad qubit `{t}` (1-based)"))),
                })
                .collect()
        };
        match toks[0].to_ascii_lowercase().as_str() {
            "qubits" => {
                if qubits.is_some() || !gates.is_empty() {
                    return Err(line_error(src, ln, "`qubits n` must come first, once"));
                }
                qubits = Some(nums(1)?[0] + 1);
            }
            "h" => {
                let q = nums(1)?;
                gates.push(Gate::H { target: q[0] });
            }
            "ccx" | "toffoli" => {
                let q = nums(3)?;
                gates.push(Gate::Ccx {
                    c1: q[0],
                    c2: q[1],
                    target: q[2],
                });
            }
            other => {
                return Err(Error::Unsupported(format!(
                    "{src}:{ln}: gate `{other}` is not in the real gate set {{H, CCX}}"
                )))
            }
        }
    }
    let n = qubits.ok_or_else(|| line_error(src, 1, "missing `qubits n` header"))?;
    Circuit::new(n, gates).map_err(|e| Error::parse(src, e.to_string()))
}

pub fn circuit_to_text(circuit: &Circuit) -> String {
    let mut s = format!("qubits {}\n", circuit.qubits());
    for g in circuit.gates() {
        s.push_str(&g.to_string());
        s.push('\n');
    }
    s
}

/// 17 significant digits, so values survive a text round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Minimal CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        CsvTable {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}


#[cfg(test)]
mod properties {
    use super::InstanceFile;
    use crate::testutil::random_laplacian;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn instance_json_round_trip(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.gen_range(1..6);
            let one_based = |v: Vec<(usize, usize, f64)>| v.into_iter().map(|(j, k, x)| (j + 1, k + 1, x)).collect::<Vec<_>>();
            let text = serde_json::json!({
                "version": 1,
                "modes": m,
                "A": one_based(random_laplacian(&mut rng, m, m, 0.3)),
                "C": one_based(random_laplacian(&mut rng, m, m, 0.3)),
                "moments": [{"cartesian": [[1, false]], "value": [rng.gen_range(-1.0..1.0), 0.0]}],
                "times": [rng.gen_range(0.0..10.0)],
            })
            .to_string();
            let file = InstanceFile::from_json(&text).unwrap();
            let again = InstanceFile::from_json(&file.to_json()).unwrap();
            prop_assert_eq!(file.to_json(), again.to_json());
            let (h1, h2) = (file.hamiltonian().unwrap(), again.hamiltonian().unwrap());
            prop_assert_eq!(h1.a().to_dense(), h2.a().to_dense());
            prop_assert_eq!(h1.c().to_dense(), h2.c().to_dense());
        }
    }
}
