use std::path::Path;

use boson_moments::dynamics::{effective_hamiltonian, evolve_moment_vector, resource_estimate, EvolutionResult};
use boson_moments::factor::{build_incidence_factor, encode_state_with, EncodeOptions, IncidenceFactor, MomentVector};
use boson_moments::gadget::alt::{build_alt_family, AltFamily};
use boson_moments::gadget::{build_fk, run_postbqp, solve_clock_spectrum, FinalTime, FkOptions};
use boson_moments::hamiltonian::{classify, validate};
use boson_moments::io::{fmt_f64, parse_circuit, parse_edge_list, CsvTable, InstanceFile};
use boson_moments::readout::{decide, reconstruct, zeta, ReconstructionTarget};
use boson_moments::walk::{embed_walk, verify_walk_equivalence, Shift};
use boson_moments::{EffectiveHamiltonian, Error, QuadraticHamiltonian, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::output::Report;
use crate::{Command, GlobalArgs, PostbqpCommand};

pub fn run(command: &Command, global: &GlobalArgs) -> Result<Report> {
    match command {
        Command::Validate { instance } => validate_cmd(instance, global),
        Command::Factor { instance } => factor_cmd(instance),
        Command::Evolve { instance, times, eps } => evolve_cmd(instance, times, *eps, global),
        Command::Readout { instance, times, eps } => readout_cmd(instance, times, *eps, global),
        Command::Walk {
            graph,
            shift,
            strict,
            times,
            random,
        } => walk_cmd(graph, shift, *strict, times, *random, global),
        Command::Postbqp { action } => postbqp_cmd(action, global),
        Command::Estimate {
            instance,
            time,
            eps,
            k,
            d,
            h0max,
            modes,
        } => estimate_cmd(instance.as_deref(), *time, *eps, *k, (*d, *h0max, *modes), global),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        location: path.display().to_string(),
        message: e.to_string(),
    })
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn validate_cmd(path: &Path, global: &GlobalArgs) -> Result<Report> {
    let file = InstanceFile::from_path(path)?;
    let h = file.hamiltonian()?;
    let limits = global.limits();
    let report = validate(&h, global.tol, &limits)?;
    let class = if h.modes() <= limits.dense_modes {
        Some(classify(&h, global.tol, &limits)?)
    } else {
        None
    };
    let mut table = CsvTable::new("validation", &["field", "value"]);
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt_f64);
    for (k, v) in [
        ("modes", report.modes.to_string()),
        ("a_asymmetry", fmt_f64(report.a_asymmetry)),
        ("c_asymmetry", fmt_f64(report.c_asymmetry)),
        ("sparsity", report.sparsity.to_string()),
        ("a_laplacian", report.a_laplacian.to_string()),
        ("c_laplacian", report.c_laplacian.to_string()),
        ("a_min_eigenvalue", opt(report.a_min_eigenvalue)),
        ("c_min_eigenvalue", opt(report.c_min_eigenvalue)),
        ("a_psd", report.a_psd.to_string()),
        ("c_psd", report.c_psd.to_string()),
    ] {
        table.push(vec![k.to_string(), v]);
    }
    Ok(Report {
        tables: vec![table],
        summary: json!({
            "command": "validate",
            "laplacian": report.a_laplacian && report.c_laplacian,
            "psd": report.a_psd && report.c_psd,
            "symmetric": report.symmetric,
            "d": report.sparsity,
            "class": class.map(|c| to_json(&c)),
        }),
    })
}

fn factor_table(name: &str, f: &IncidenceFactor) -> CsvTable {
    let mut t = CsvTable::new(name, &["mode", "pair_j", "pair_k", "value"]);
    for ((j, k), entries) in f.columns() {
        for &(row, v) in entries {
            t.push(vec![
                (row + 1).to_string(),
                (j + 1).to_string(),
                (k + 1).to_string(),
                fmt_f64(v),
            ]);
        }
    }
    t.rows.sort();
    t
}

fn factor_cmd(path: &Path) -> Result<Report> {
    let file = InstanceFile::from_path(path)?;
    let h = file.hamiltonian()?;
    let b = build_incidence_factor(h.a())?;
    let d = build_incidence_factor(h.c())?;
    let resid = |f: &IncidenceFactor, m: &boson_moments::SparseSymmetricMatrix| {
        let fd = f.to_dense();
        (&fd * fd.transpose() - m.to_dense()).amax()
    };
    Ok(Report {
        summary: json!({
            "command": "factor",
            "modes": h.modes(),
            "pairs": b.target_dim(),
            "b_residual": resid(&b, h.a()),
            "d_residual": resid(&d, h.c()),
        }),
        tables: vec![factor_table("B", &b), factor_table("D", &d)],
    })
}

struct Prepared {
    file: InstanceFile,
    h: QuadraticHamiltonian,
    h0: EffectiveHamiltonian,
    psi: MomentVector,
}

fn prepare(path: &Path, global: &GlobalArgs) -> Result<Prepared> {
    let file = InstanceFile::from_path(path)?;
    let h = file.hamiltonian()?;
    if !h.f().is_zero() {
        return Err(Error::Unsupported(
            "moment-vector evolution needs F = 0 (inertial coupling)".into(),
        ));
    }
    let b = build_incidence_factor(h.a())?;
    let d = build_incidence_factor(h.c())?;
    let h0 = effective_hamiltonian(&b, &d)?;
    let greek = file.greek_moments(&h)?;
    let options = EncodeOptions {
        vacuum: true,
        order_max: file.order_max,
    };
    let psi = encode_state_with(&greek, options, &global.limits())?;
    Ok(Prepared { file, h, h0, psi })
}

fn times_or(file: &InstanceFile, times: &[f64]) -> Vec<f64> {
    if !times.is_empty() {
        times.to_vec()
    } else if !file.times.is_empty() {
        file.times.clone()
    } else {
        vec![0.0]
    }
}

fn evolve_all(p: &Prepared, times: &[f64], eps: f64, global: &GlobalArgs) -> Result<Vec<EvolutionResult>> {
    let limits = global.limits();
    times
        .iter()
        .map(|&t| evolve_moment_vector(&p.h0, &p.psi, t, eps, &limits))
        .collect()
}

fn evolve_cmd(path: &Path, times: &[f64], eps: f64, global: &GlobalArgs) -> Result<Report> {
    let p = prepare(path, global)?;
    let times = times_or(&p.file, times);
    let results = evolve_all(&p, &times, eps, global)?;
    let spec = p.file.readout_spec()?;

    let mut zeta_table = CsvTable::new("zeta", &["time", "zeta", "contributing", "decision"]);
    let mut moments = CsvTable::new("moments", &["time", "order", "labels", "re", "im"]);
    let mut zetas = Vec::new();
    let mut decisions = Vec::new();
    for res in &results {
        let state = &res.state;
        if let Some(spec) = &spec {
            let pop = zeta(state, spec, res.time)?;
            let decision = match p.file.decision {
                Some(dp) => Some(decide(pop.zeta, dp.a, dp.b)?),
                None => None,
            };
            zeta_table.push(vec![
                fmt_f64(res.time),
                fmt_f64(pop.zeta),
                pop.contributing_count.to_string(),
                decision.map_or("NA".to_string(), |d| to_json(&d).as_str().unwrap_or("").to_string()),
            ]);
            zetas.push(pop.zeta);
            decisions.push(decision.map(|d| to_json(&d)));
        }
        for (key, amp) in &state.amplitudes {
            let labels: Vec<String> = key.iter().map(|&g| state.space.label(g).to_string()).collect();
            let z: Complex64 = amp * state.normalization;
            moments.push(vec![
                fmt_f64(res.time),
                key.len().to_string(),
                if labels.is_empty() { "vac".to_string() } else { labels.join(" ") },
                fmt_f64(z.re),
                fmt_f64(z.im),
            ]);
        }
    }
    let mut tables = Vec::new();
    if spec.is_some() {
        tables.push(zeta_table);
    }
    tables.push(moments);
    Ok(Report {
        tables,
        summary: json!({
            "command": "evolve",
            "modes": p.h.modes(),
            "order_max": p.psi.order_max,
            "normalization": p.psi.normalization,
            "times": times,
            "zeta": zetas,
            "decision": decisions,
            "method": results.iter().map(|r| to_json(&r.method)).collect::<Vec<_>>(),
            "residual_estimate": results.iter().map(|r| r.residual_estimate).fold(0.0, f64::max),
            "norm_drift": results.iter().map(|r| (r.state.norm() - 1.0).abs()).fold(0.0, f64::max),
        }),
    })
}

fn readout_cmd(path: &Path, times: &[f64], eps: f64, global: &GlobalArgs) -> Result<Report> {
    let p = prepare(path, global)?;
    let times = times_or(&p.file, times);
    let results = evolve_all(&p, &times, eps, global)?;
    let m = p.h.modes();
    let mut targets = Vec::new();
    for bar in [false, true] {
        targets.extend((0..m).map(|mode| ReconstructionTarget::First { mode, bar }));
    }
    if p.psi.order_max >= 2 {
        for bar in [false, true] {
            for j in 0..m {
                targets.extend((j..m).map(|k| ReconstructionTarget::Second { j, k, bar }));
            }
        }
    }
    let mut table = CsvTable::new(
        "reconstruction",
        &["time", "target", "j", "k", "value", "sign", "value_squares", "discrepancy", "status"],
    );
    let mut failures = 0;
    let mut worst_discrepancy = 0.0f64;
    for res in &results {
        for &target in &targets {
            let (name, j, k) = match target {
                ReconstructionTarget::First { mode, bar } => (if bar { "p" } else { "q" }, mode, mode),
                ReconstructionTarget::Second { j, k, bar } => (if bar { "pp" } else { "qq" }, j, k),
            };
            let mut row = vec![fmt_f64(res.time), name.to_string(), (j + 1).to_string(), (k + 1).to_string()];
            match reconstruct(&res.state, p.h.a(), p.h.c(), target) {
                Ok(est) => {
                    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt_f64);
                    worst_discrepancy = worst_discrepancy.max(est.discrepancy.unwrap_or(0.0));
                    row.extend([
                        fmt_f64(est.value),
                        est.sign.map_or("NA".to_string(), |s| s.to_string()),
                        opt(est.value_squares),
                        opt(est.discrepancy),
                        "ok".to_string(),
                    ]);
                }
                Err(Error::NotReconstructible(_)) => {
                    failures += 1;
                    row.extend(["NA", "NA", "NA", "NA", "not-reconstructible"].map(String::from));
                }
                Err(e) => return Err(e),
            }
            table.push(row);
        }
    }
    Ok(Report {
        tables: vec![table],
        summary: json!({
            "command": "readout",
            "times": times,
            "targets": targets.len(),
            "not_reconstructible": failures,
            "max_discrepancy": worst_discrepancy,
        }),
    })
}

fn walk_cmd(
    path: &Path,
    shift: &str,
    strict: bool,
    times: &[f64],
    random: bool,
    global: &GlobalArgs,
) -> Result<Report> {
    let graph = parse_edge_list(&read_text(path)?)?;
    let shift = match shift {
        "auto" => Shift::Auto,
        s => Shift::Fixed(s.parse().map_err(|_| Error::Parse {
            location: "--shift".into(),
            message: format!("expected a number or `auto`, got `{s}`"),
        })?),
    };
    let embedding = embed_walk(&graph, shift, strict, &global.limits())?;
    let m = graph.vertices();
    let amp0: Vec<Complex64> = if random {
        let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
        let v: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / n).collect()
    } else {
        let mut v = vec![Complex64::default(); m];
        v[0] = Complex64::new(1.0, 0.0);
        v
    };
    let mut springs = CsvTable::new("springs", &["j", "k", "constant"]);
    for (key, &v) in &embedding.spring_constants {
        springs.push(vec![(key.j + 1).to_string(), (key.k + 1).to_string(), fmt_f64(v)]);
    }
    let mut eq = CsvTable::new("equivalence", &["time", "deviation", "norm_drift"]);
    let mut worst = 0.0f64;
    let mut drift = 0.0f64;
    for &t in times {
        let c = verify_walk_equivalence(&embedding, &amp0, t)?;
        worst = worst.max(c.deviation);
        drift = drift.max(c.norm_drift);
        eq.push(vec![fmt_f64(t), fmt_f64(c.deviation), fmt_f64(c.norm_drift)]);
    }
    Ok(Report {
        tables: vec![springs, eq],
        summary: json!({
            "command": "walk",
            "vertices": m,
            "max_degree": graph.max_degree(),
            "shift": embedding.shift,
            "min_eigenvalue": embedding.min_eigenvalue,
            "max_deviation": worst,
            "max_norm_drift": drift,
        }),
    })
}

/// `"0..20"` (inclusive) or `"0,2,5"`.
fn parse_gate_counts(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse {
        location: "--L".into(),
        message: format!("expected `a..b` or a comma list, got `{s}`"),
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn postbqp_cmd(action: &PostbqpCommand, global: &GlobalArgs) -> Result<Report> {
    let limits = global.limits();
    match action {
        PostbqpCommand::Build {
            circuit,
            beta,
            allow_weak_beta,
        } => {
            let circuit = parse_circuit(&read_text(circuit)?)?;
            let options = FkOptions {
                beta: *beta,
                allow_weak_beta: *allow_weak_beta,
            };
            let fk = build_fk(&circuit, options, &limits)?;
            let clock = fk.clock_transform();
            let doubled = build_alt_family(&circuit, options, AltFamily::EminusDoubled, &limits)?;
            let indefinite = build_alt_family(&circuit, options, AltFamily::IndefiniteA, &limits)?;
            let mut a = CsvTable::new("a_matrix", &["row", "col", "value"]);
            let dense = fk.a();
            for r in 0..fk.modes() {
                for c in 0..fk.modes() {
                    if dense[(r, c)] != 0.0 {
                        a.push(vec![(r + 1).to_string(), (c + 1).to_string(), fmt_f64(dense[(r, c)])]);
                    }
                }
            }
            let mut pi = CsvTable::new("projector", &["mode", "layer", "basis"]);
            let dim = circuit.basis_dim();
            for &m in fk.projector_modes() {
                pi.push(vec![(m + 1).to_string(), (m / dim + 1).to_string(), (m % dim).to_string()]);
            }
            Ok(Report {
                tables: vec![a, pi],
                summary: json!({
                    "command": "postbqp build",
                    "qubits": circuit.qubits(),
                    "gates": circuit.len(),
                    "modes": fk.modes(),
                    "beta": fk.beta(),
                    "projector_rank": fk.projector_modes().len(),
                    "clock_transform": to_json(&clock),
                    "eminus_doubled": to_json(&doubled.report),
                    "indefinite_a": to_json(&indefinite.report),
                }),
            })
        }
        PostbqpCommand::Run {
            circuit,
            beta,
            allow_weak_beta,
            tf,
        } => {
            let circuit = parse_circuit(&read_text(circuit)?)?;
            let options = FkOptions {
                beta: *beta,
                allow_weak_beta: *allow_weak_beta,
            };
            let final_time = tf.map_or(FinalTime::Auto, FinalTime::Fixed);
            let d = run_postbqp(&circuit, options, final_time, &limits)?;
            let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt_f64);
            let mut t = CsvTable::new(
                "decision",
                &["t_final", "zeta_num", "zeta_den", "ratio", "accept", "oracle", "delta", "status"],
            );
            t.push(vec![
                fmt_f64(d.t_final),
                fmt_f64(d.zeta_num),
                fmt_f64(d.zeta_den),
                fmt_f64(d.ratio),
                d.accept.to_string(),
                opt(d.oracle_value),
                opt(d.delta),
                to_json(&d.status).as_str().unwrap_or("").to_string(),
            ]);
            let mut summary = to_json(&d);
            summary["command"] = json!("postbqp run");
            Ok(Report {
                tables: vec![t],
                summary,
            })
        }
        PostbqpCommand::Spectrum { beta, gates } => {
            let counts = parse_gate_counts(gates)?;
            let mut x0 = CsvTable::new("x0_modes", &["L", "l", "gamma"]);
            let mut bound = CsvTable::new(
                "bound_state",
                &["beta", "L", "kappa1", "alpha1", "overlap_bound", "overlap_first", "overlap_readout", "beta_threshold"],
            );
            let mut last = Value::Null;
            for &l in &counts {
                let s = solve_clock_spectrum(0.0, l)?;
                for (i, mode) in s.x0_modes.iter().enumerate() {
                    x0.push(vec![l.to_string(), (i + 1).to_string(), fmt_f64(mode.gamma)]);
                }
            }
            for &b in beta {
                for &l in &counts {
                    let s = solve_clock_spectrum(b, l)?;
                    let cells = match s.bound_state {
                        Some(bs) => vec![
                            fmt_f64(bs.kappa1),
                            fmt_f64(bs.alpha1),
                            fmt_f64(4.0 - b * b),
                            fmt_f64(bs.overlap_first),
                            fmt_f64(bs.overlap_readout),
                        ],
                        None => vec!["NA".to_string(); 5],
                    };
                    let mut row = vec![fmt_f64(b), l.to_string()];
                    row.extend(cells);
                    row.push(fmt_f64(s.beta_threshold));
                    bound.push(row);
                    last = json!({"beta": b, "L": l, "bound_state": to_json(&s.bound_state), "beta_threshold": s.beta_threshold});
                }
            }
            let summary = if beta.len() * counts.len() == 1 {
                let mut v = last;
                v["alpha1"] = v["bound_state"]["alpha1"].clone();
                v["command"] = json!("postbqp spectrum");
                v
            } else {
                json!({"command": "postbqp spectrum", "beta": beta, "L": counts, "rows": bound.rows.len()})
            };
            Ok(Report {
                tables: vec![x0, bound],
                summary,
            })
        }
    }
}

fn estimate_cmd(
    instance: Option<&Path>,
    t: f64,
    eps: f64,
    k: f64,
    explicit: (Option<f64>, Option<f64>, Option<f64>),
    global: &GlobalArgs,
) -> Result<Report> {
    let (mut d, mut h0max, mut modes) = explicit;
    if let Some(path) = instance {
        let p = prepare(path, global)?;
        d.get_or_insert(p.h0.matrix().max_row_nnz() as f64);
        h0max.get_or_insert(p.h0.max_abs_entry());
        modes.get_or_insert(p.h.modes() as f64);
    }
    let missing = |name: &str| Error::Parameter(format!("--{name} is required without an instance"));
    let (d, h0max, modes) = (
        d.ok_or_else(|| missing("d"))?,
        h0max.ok_or_else(|| missing("h0max"))?,
        modes.ok_or_else(|| missing("modes"))?,
    );
    let est = resource_estimate(t, k, d, h0max, eps, modes)?;
    let mut table = CsvTable::new("estimate", &["t", "K", "d", "h0max", "eps", "modes", "queries", "gates"]);
    table.push([t, k, d, h0max, eps, modes, est.queries, est.gates].iter().map(|&v| fmt_f64(v)).collect());
    Ok(Report {
        tables: vec![table],
        summary: json!({
            "command": "estimate",
            "queries": est.queries,
            "gates": est.gates,
            "note": "unit constants; order-of-magnitude indicator of asymptotic bounds",
        }),
    })
}
