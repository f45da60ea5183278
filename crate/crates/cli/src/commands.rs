use num_bigint::BigInt;
use num_traits::One;
use serde_json::json;

use extremal_core::criteria::{
    check_subgroup_criterion, column_vector_suite, corank_one_suite, fit_loglog_slope, hyperplane_extremal_evidence,
    line_origin_extremal_evidence, measure_a_set, strong_hyperplane_verdict, CriterionParams, SubspaceSpec,
    SuiteConfig, SuiteOutcome,
};
use extremal_core::diophantine::{exponent_estimate, flow_converse, ExponentOptions, Mode, TrailEntry};
use extremal_core::goodness::{demonstrate_not_good, dyadic_radii, goodness_profile};
use extremal_core::lattice::growth_exponent_estimate;
use extremal_core::report::CriterionReport;
use extremal_core::scalar::{self, int, ExactScalar};
use extremal_core::{Error, Result};

use crate::config::{
    Command, CriterionArgs, ExperimentConfig, ExponentArgs, FlowArgs, GoodnessArgs, HyperplaneArgs, LemmaArgs,
    LineArgs, MeasureArgs, ModeArg, StrongArgs, SuiteArg,
};
use crate::progress::Progress;
use crate::selftest;
use crate::table::{Artifact, Cell, Table};
use crate::values::{self, Value};

pub fn run(config: &ExperimentConfig, progress: &Progress) -> Result<Artifact> {
    let bits = config.precision;
    match &config.command {
        Command::Exponent(a) => exponent(a, bits, progress),
        Command::Flow(a) => flow(a, bits, progress),
        Command::Criterion(a) => criterion(a, bits, config.seed, progress),
        Command::Hyperplane(a) => hyperplane(a, bits, progress),
        Command::Line(a) => line(a, bits, progress),
        Command::Measure48(a) => measure(a, bits, config.seed, progress),
        Command::Strong(a) => strong(a, bits, progress),
        Command::Goodness(a) => goodness(a, progress),
        Command::Lemmas(a) => lemmas(a, config.seed, progress),
        Command::Selftest(a) => selftest::run(a, config.seed, progress),
    }
}

fn joined(xs: &[BigInt]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn trail_table(trail: &[TrailEntry]) -> Table {
    let mut t = Table::new(&["q", "p", "quality", "size", "slope", "injected"]);
    for e in trail {
        t.push(vec![
            joined(&e.witness.q).into(),
            joined(&e.witness.p).into(),
            e.witness.quality.clone().into(),
            e.witness.size.clone().into(),
            e.slope.into(),
            e.injected.into(),
        ]);
    }
    t
}

fn violation_table(report: &CriterionReport) -> Table {
    let mut t = Table::new(&["I", "w", "lhs", "rhs"]);
    for v in &report.violations {
        let w = v
            .w_coeffs
            .iter()
            .map(|(k, c)| format!("{k}={c}"))
            .collect::<Vec<_>>()
            .join(" ");
        let lhs = if v.lhs_den == "1" {
            v.lhs_num.clone()
        } else {
            format!("{}/{}", v.lhs_num, v.lhs_den)
        };
        t.push(vec![
            v.index_set.clone().unwrap_or_default().into(),
            w.into(),
            lhs.into(),
            v.rhs_expr.clone().into(),
        ]);
    }
    t
}

fn report_artifact(report: CriterionReport) -> Artifact {
    let violated = report.is_violated();
    let table = violation_table(&report);
    let mut summary = serde_json::to_value(&report).expect("report serializes");
    if let Some(m) = summary.as_object_mut() {
        // rows carry the violations
        m.remove("violations");
    }
    Artifact {
        summary,
        table,
        violated,
    }
}

fn provenance(values: &[Value]) -> Vec<String> {
    values.iter().map(|v| v.number.provenance.clone()).collect()
}

fn exponent(a: &ExponentArgs, bits: u32, progress: &Progress) -> Result<Artifact> {
    let texts: Vec<String> = match (&a.kind, a.y.is_empty()) {
        (Some(k), true) => vec![k.clone()],
        (None, false) => a.y.clone(),
        (Some(_), false) => return Err(Error::InvalidParameter("give either --kind or --y".into())),
        (None, true) => return Err(Error::InvalidParameter("missing --kind or --y".into())),
    };
    let vals = values::parse_values(&texts, bits)?;
    let n = vals.len();
    let q_max = *a.q.last().ok_or_else(|| Error::InvalidParameter("empty Q schedule".into()))?;
    // Slopes up to n + 1 must be decided correctly.
    values::check_precision(&vals, q_max, &int(n as i64 + 1))?;
    let mode = match a.mode {
        ModeArg::Standard => Mode::Standard,
        ModeArg::Multiplicative => Mode::Multiplicative,
    };
    let options = ExponentOptions {
        min_size: a.min_size.map(BigInt::from),
        injected: if mode == Mode::Standard {
            values::row_injections(&vals)
        } else {
            Vec::new()
        },
    };
    progress.note(&format!("exponent: n = {n}, Q schedule {:?}", a.q));
    let est = exponent_estimate(&[values::exact_all(&vals)], &a.q, mode, &options)?;
    Ok(Artifact {
        summary: json!({
            "omega_hat": est.omega_hat,
            "omega_exact": est.omega_exact,
            "per_cutoff": est.per_cutoff,
            "cutoff_q": est.cutoff_q,
            "min_size": est.min_size,
            "inputs": provenance(&vals),
        }),
        table: trail_table(&est.witness_trail),
        violated: false,
    })
}

fn flow(a: &FlowArgs, bits: u32, progress: &Progress) -> Result<Artifact> {
    let vals = values::parse_values(&a.y, bits)?;
    let y = values::exact_all(&vals);
    progress.note(&format!("flow: n = {}, t_max = {}", y.len(), a.t_max));
    let est = growth_exponent_estimate(&y, a.t_max, a.base, a.search_bound)?;
    let gamma = a.gamma.as_deref().map(values::parse_exact).transpose()?;
    let mut cols = vec!["step", "t", "delta", "log_delta"];
    if gamma.is_some() {
        cols.extend(["converse_q", "converse_p", "v_prime", "converse_holds"]);
    }
    let mut t = Table::new(&cols);
    let mut converse_failures = 0;
    for s in &est.delta_log_series {
        let mut row: Vec<Cell> = vec![s.step.into(), s.t.into(), s.delta.clone().into(), s.log_delta.into()];
        if let Some(g) = &gamma {
            match flow_converse(&y, a.base, s.step, g, a.search_bound)? {
                Some(c) => {
                    converse_failures += usize::from(!c.holds);
                    row.extend([
                        joined(&c.q).into(),
                        c.p.to_string().into(),
                        c.v_prime.into(),
                        c.holds.into(),
                    ]);
                }
                None => row.extend([Cell::from(""), Cell::from(""), Cell::from(""), Cell::from("")]),
            }
        }
        t.push(row);
    }
    Ok(Artifact {
        summary: json!({
            "gamma_hat": est.gamma_hat,
            "achieving_times": est.achieving_times,
            "window_start": est.window_start,
            "converse_failures": converse_failures,
            "inputs": provenance(&vals),
        }),
        table: t,
        violated: false,
    })
}

fn criterion(a: &CriterionArgs, bits: u32, seed: u64, progress: &Progress) -> Result<Artifact> {
    let matrix = match (&a.a_file, &a.a) {
        (Some(path), None) => values::parse_matrix_file(path, bits)?,
        (None, Some(text)) => values::parse_matrix_inline(text, bits)?,
        _ => return Err(Error::InvalidParameter("give exactly one of --A <file> or --a <rows>".into())),
    };
    let spec = SubspaceSpec::new(a.n, a.s, matrix)?;
    if a.j == 0 {
        return Err(Error::InvalidParameter("j must be at least 1".into()));
    }
    let v = match &a.v {
        Some(v) => values::parse_exact(v)?,
        None => ExactScalar::new(BigInt::from(a.n + 1 - a.j.min(a.n + 1)), BigInt::from(a.j)) + ExactScalar::one(),
    };
    let mut params = CriterionParams::new(v, a.j, a.bound);
    params.n_cut = values::parse_exact(&a.n_cut)?;
    params.plan.random_bases = a.random_bases;
    params.plan.seed = seed;
    progress.note(&format!("criterion: n = {}, s = {}, j = {}, bound = {}", a.n, a.s, a.j, a.bound));
    let mut report = check_subgroup_criterion(&spec, &params)?;
    report.seed = Some(seed);
    Ok(report_artifact(report))
}

fn hyperplane(a: &HyperplaneArgs, bits: u32, progress: &Progress) -> Result<Artifact> {
    let vals = values::parse_values(&a.a, bits)?;
    let v = values::parse_exact(&a.v)?;
    values::check_precision(&vals, a.q, &v)?;
    let injected = values::liouville_injections(&vals);
    progress.note(&format!("hyperplane: n = {}, Q = {}, {} injected", vals.len(), a.q, injected.len()));
    let report = hyperplane_extremal_evidence(&values::exact_all(&vals), a.q, &v, &injected)?;
    Ok(report_artifact(report))
}

fn line(a: &LineArgs, bits: u32, progress: &Progress) -> Result<Artifact> {
    let vals = values::parse_values(&a.b, bits)?;
    let v = values::parse_exact(&a.v)?;
    values::check_precision(&vals, a.q, &v)?;
    progress.note(&format!("line: n = {}, Q = {}", vals.len() + 1, a.q));
    let report = line_origin_extremal_evidence(&values::exact_all(&vals), a.q, &v, &[])?;
    Ok(report_artifact(report))
}

fn measure(a: &MeasureArgs, bits: u32, seed: u64, progress: &Progress) -> Result<Artifact> {
    let vals = values::parse_values(&a.b, bits)?;
    let v = values::parse_exact(&a.v)?;
    let b = values::exact_all(&vals);
    let q_max = a.qs.iter().copied().max().unwrap_or(0);
    values::check_precision(&vals, q_max.saturating_mul(2), &v)?;
    let mut t = Table::new(&[
        "Q",
        "samples",
        "hits",
        "measure",
        "halfwidth",
        "wilson_low",
        "wilson_high",
        "exact_rechecks",
    ]);
    let mut points = Vec::new();
    for &q in &a.qs {
        progress.note(&format!("measure48: Q = {q}, {} samples", a.samples));
        let m = measure_a_set(&b, &v, q, a.samples, seed)?;
        points.push((q as f64, m.measure_hat));
        t.push(vec![
            q.into(),
            m.samples.into(),
            m.hits.into(),
            m.measure_hat.into(),
            m.halfwidth.into(),
            m.wilson_low.into(),
            m.wilson_high.into(),
            m.exact_rechecks.into(),
        ]);
    }
    Ok(Artifact {
        summary: json!({
            "loglog_slope": fit_loglog_slope(&points),
            "inputs": provenance(&vals),
        }),
        table: t,
        violated: false,
    })
}

fn strong(a: &StrongArgs, bits: u32, progress: &Progress) -> Result<Artifact> {
    let vals = values::parse_values(&a.a, bits)?;
    let margin = values::parse_exact(&a.margin)?;
    let exact = values::exact_all(&vals);
    let q_max = *a.q.last().ok_or_else(|| Error::InvalidParameter("empty Q schedule".into()))?;
    let k = values::nonzero_count(&exact[1.min(exact.len())..]);
    values::check_precision(&vals, q_max, &(int(k as i64 + 1) + &margin))?;
    let options = ExponentOptions {
        min_size: None,
        injected: values::liouville_injections(&vals),
    };
    progress.note(&format!("strong: n = {}, k = {k}, Q schedule {:?}", exact.len(), a.q));
    let verdict = strong_hyperplane_verdict(&exact, &a.q, &options, &margin)?;
    Ok(Artifact {
        summary: json!({
            "k": verdict.k,
            "threshold": verdict.threshold,
            "extremal_threshold": verdict.extremal_threshold,
            "omega_hat": verdict.estimate.omega_hat,
            "not_strongly_extremal_evidence": verdict.not_strongly_extremal_evidence,
            "evidence_q": verdict.evidence_q,
            "margin": verdict.margin,
            "inputs": provenance(&vals),
        }),
        table: trail_table(&verdict.estimate.witness_trail),
        violated: verdict.not_strongly_extremal_evidence,
    })
}

fn goodness(a: &GoodnessArgs, progress: &Progress) -> Result<Artifact> {
    let f = values::parse_function(&a.f)?;
    let alphas: Vec<ExactScalar> = a.alpha.iter().map(|x| values::parse_exact(x)).collect::<Result<_>>()?;
    if let Some(x0) = &a.x0 {
        let x0 = values::parse_exact(x0)?;
        let radii = dyadic_radii(&values::parse_exact(&a.r0)?, a.halvings);
        progress.note(&format!("goodness: shrinking balls at {}", scalar::fmt_exact(&x0)));
        let table = demonstrate_not_good(&f, &x0, &alphas, &radii)?;
        let mut t = Table::new(&["alpha", "radius", "c_hat", "c_hat_lower"]);
        for r in &table.rows {
            t.push(vec![
                r.alpha.clone().into(),
                r.radius.clone().into(),
                r.c_hat.into(),
                r.c_hat_lower.into(),
            ]);
        }
        return Ok(Artifact {
            summary: json!({ "x0": scalar::fmt_exact(&x0), "summary": table.summary }),
            table: t,
            violated: false,
        });
    }
    if a.balls.is_empty() {
        return Err(Error::InvalidParameter("give --ball lo:hi (repeatable) or --x0".into()));
    }
    let balls = a.balls.iter().map(|b| values::parse_ball(b)).collect::<Result<Vec<_>>>()?;
    let eps: Vec<ExactScalar> = a.eps.iter().map(|x| values::parse_exact(x)).collect::<Result<_>>()?;
    let mut t = Table::new(&["ball", "radius", "alpha", "eps", "ratio", "ratio_lower"]);
    let mut c_hats = Vec::new();
    for alpha in &alphas {
        progress.note(&format!("goodness: alpha = {}", scalar::fmt_exact(alpha)));
        let p = goodness_profile(&f, &balls, alpha, &eps)?;
        for r in &p.rows {
            t.push(vec![
                r.ball_center.clone().into(),
                r.radius.clone().into(),
                r.alpha.clone().into(),
                r.eps.clone().into(),
                r.ratio.into(),
                r.ratio_lower.into(),
            ]);
        }
        c_hats.push(json!({
            "alpha": scalar::fmt_exact(alpha),
            "c_hat": p.c_hat,
            "c_hat_lower": p.c_hat_lower,
        }));
    }
    Ok(Artifact {
        summary: json!({ "c_hat": c_hats }),
        table: t,
        violated: false,
    })
}

pub fn suite_table(outcomes: &[SuiteOutcome]) -> Table {
    let mut t = Table::new(&["suite", "n", "s", "j", "matrices", "reps", "evaluations", "violations"]);
    for o in outcomes {
        t.push(vec![
            o.suite.clone().into(),
            o.n.into(),
            o.s.into(),
            o.j.into(),
            o.matrices.into(),
            o.reps.into(),
            o.evaluations.into(),
            o.violations.into(),
        ]);
    }
    t
}

fn lemmas(a: &LemmaArgs, seed: u64, progress: &Progress) -> Result<Artifact> {
    let mut cfg = SuiteConfig::new(a.matrices, a.bound, seed);
    cfg.plan.random_bases = a.random_bases;
    let mut outcomes = Vec::new();
    for &n in &a.dims {
        if matches!(a.suite, SuiteArg::CorankOne | SuiteArg::Both) {
            for s in 1..n {
                progress.note(&format!("lemmas: corank-one n = {n}, s = {s}"));
                outcomes.push(corank_one_suite(n, s, &cfg)?);
            }
        }
        if matches!(a.suite, SuiteArg::ColumnVector | SuiteArg::Both) {
            for j in 2..=n {
                progress.note(&format!("lemmas: column-vector n = {n}, j = {j}"));
                outcomes.push(column_vector_suite(n, j, &cfg)?);
            }
        }
    }
    let violated = outcomes.iter().any(|o| o.violations > 0);
    Ok(Artifact {
        summary: json!({
            "search_spaces": outcomes.iter().map(|o| &o.search_space).collect::<Vec<_>>(),
            "first_violations": outcomes.iter().filter_map(|o| o.first_violation.as_ref()).collect::<Vec<_>>(),
        }),
        table: suite_table(&outcomes),
        violated,
    })
}
