//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs as a plain binary so the summary is always printed.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use extremal_core::criteria::{
    column_vector_suite, corank_one_suite, fit_loglog_slope, hyperplane_extremal_evidence, measure_a_set,
    strong_hyperplane_verdict, SuiteConfig,
};
use extremal_core::diophantine::{
    best_approx, exponent_estimate, flow_certificate, flow_converse, liouville_witnesses, make_test_number,
    ExponentOptions, Mode, TestNumberKind,
};
use extremal_core::exterior::{IndexSet, MultiVector};
use extremal_core::goodness::{
    build_cantor_bad, demonstrate_not_good, dyadic_radii, goodness_profile, Ball, FunctionSpec, Poly,
};
use extremal_core::lattice::{act_flow_unipotent, FlowSpec};
use extremal_core::logspace::{LogLinear, ScaledValue};
use extremal_core::scalar::{self, int, ratio, ExactScalar};

const SEED: u64 = 20_240_601;

/// Criterion 3: number of random oracle comparisons.
const FLOW_CASES: usize = 1000;
/// Criterion 4: random `y`, enumeration bound and converse parameters.
const ROUND_TRIP_CASES: usize = 200;
const ROUND_TRIP_Q: u64 = 200;
const CONVERSE_STEPS: u64 = 4;
const SVP_BOUND: u64 = 1_000_000;
/// Criterion 5.
const GOLDEN_Q: u64 = 10_000;
const GOLDEN_BAND: (f64, f64) = (0.9, 1.1);
const LIOUVILLE_FLOOR: f64 = 4.0 - 1e-9;
/// Criterion 6.
const MC_QS: [u64; 4] = [16, 64, 256, 1024];
const MC_SAMPLES: u64 = 100_000;
const MC_SLOPE_MAX: f64 = -0.35;
/// Criterion 7.
const SEPARATION_Q: u64 = 1000;
/// Criterion 8.
const MONOMIAL_TOL: f64 = 1e-6;
const CANTOR_GROWTH: f64 = 10.0;
/// Criterion 9.
const DIRICHLET_CASES: usize = 500;
const DIRICHLET_Q: u64 = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rand_ratio(rng: &mut ChaCha8Rng, num: i64, den: i64) -> ExactScalar {
    ratio(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

fn corank_suites() -> Outcome {
    let mut runs = 0;
    let mut evaluations = 0u64;
    let mut failures = Vec::new();
    for n in 2..=4 {
        for s in 1..n {
            match corank_one_suite(n, s, &SuiteConfig::new(100, 5, SEED + (10 * n + s) as u64)) {
                Ok(o) => {
                    runs += 1;
                    evaluations += o.evaluations;
                    if !o.passed() {
                        failures.push(format!("(n={n}, s={s}): {} violations", o.violations));
                    }
                }
                Err(e) => failures.push(format!("(n={n}, s={s}): {e}")),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("corank-one lower bound >= 1: {runs} suites, {evaluations} evaluations {failures:?}"),
    )
}

fn column_suites() -> Outcome {
    let mut runs = 0;
    let mut evaluations = 0u64;
    let mut spaces = Vec::new();
    let mut failures = Vec::new();
    for n in 2..=4 {
        for j in 2..=n {
            match column_vector_suite(n, j, &SuiteConfig::new(20, 4, SEED + (10 * n + j) as u64)) {
                Ok(o) => {
                    runs += 1;
                    evaluations += o.evaluations;
                    spaces.push(format!("n={n},j={j}: {}", o.search_space));
                    if !o.passed() {
                        failures.push(format!("(n={n}, j={j}): {} violations", o.violations));
                    }
                }
                Err(e) => failures.push(format!("(n={n}, j={j}): {e}")),
            }
        }
    }
    for s in &spaces {
        println!("    {s}");
    }
    outcome(
        failures.is_empty(),
        format!("column-vector higher-rank bound: {runs} suites, {evaluations} evaluations {failures:?}"),
    )
}

/// Laplace expansion, kept independent of the library determinant.
fn laplace_det(m: &[Vec<ExactScalar>]) -> ExactScalar {
    if m.is_empty() {
        return ExactScalar::one();
    }
    let mut acc = ExactScalar::zero();
    for (col, x) in m[0].iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let minor: Vec<Vec<ExactScalar>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = x * laplace_det(&minor);
        if col % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Coefficients of `g_t u_y (b_1 ∧ … ∧ b_j)` computed by applying the matrix
/// to each basis vector and taking minors.
fn flow_oracle(
    basis: &[Vec<i64>],
    y: &[ExactScalar],
    exps: &[LogLinear],
    set: &IndexSet,
) -> Option<ScaledValue> {
    let rows: Vec<Vec<ExactScalar>> = basis
        .iter()
        .map(|b| {
            let mut r: Vec<ExactScalar> = b.iter().map(|&x| int(x)).collect();
            let shift = y.iter().zip(&b[1..]).fold(ExactScalar::zero(), |acc, (yi, bi)| acc + yi * int(*bi));
            r[0] += shift;
            r
        })
        .collect();
    let cols: Vec<usize> = set.members().collect();
    let minor: Vec<Vec<ExactScalar>> = rows.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
    let det = laplace_det(&minor);
    if det.is_zero() {
        return None;
    }
    let scale = cols.iter().fold(LogLinear::zero(), |acc, &c| &acc + &exps[c]);
    Some(ScaledValue::new(det, scale))
}

fn flow_action_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut compared = 0u64;
    let mut cases = 0;
    let mut mismatch = None;
    while cases < FLOW_CASES {
        let n = rng.gen_range(1..=4usize);
        let j = rng.gen_range(1..=n);
        let basis: Vec<Vec<i64>> = (0..j).map(|_| (0..=n).map(|_| rng.gen_range(-5..=5)).collect()).collect();
        let mut w = MultiVector::from_int_vector(&basis[0].iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
            .expect("vector");
        for b in &basis[1..] {
            let v = MultiVector::from_int_vector(&b.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
                .expect("vector");
            w = w.wedge(&v).expect("wedge");
        }
        if w.is_zero() {
            continue;
        }
        cases += 1;
        let y: Vec<ExactScalar> = (0..n).map(|_| rand_ratio(&mut rng, 20, 9)).collect();
        let times: Vec<LogLinear> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    LogLinear::zero()
                } else {
                    let d = rng.gen_range(1..=7);
                    LogLinear::ln_of(&ratio(d + rng.gen_range(1..=30), d)).expect("positive")
                }
            })
            .collect();
        let spec = FlowSpec::multi_parameter(times).expect("times");
        let exps = spec.coordinate_exponents();
        let got = act_flow_unipotent(&spec, &y, &w).expect("action");
        for set in IndexSet::all_of_size(n, j) {
            compared += 1;
            let want = flow_oracle(&basis, &y, &exps, &set);
            if got.coefficient(&set) != want.as_ref() && mismatch.is_none() {
                mismatch = Some(format!("n={n} j={j} basis={basis:?} I={set}"));
            }
        }
    }
    outcome(
        mismatch.is_none(),
        format!("{cases} cases, {compared} coefficients equal exactly {}", mismatch.unwrap_or_default()),
    )
}

fn flow_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut certified = 0u64;
    let mut converse = 0u64;
    let mut failures = Vec::new();
    for case in 0..ROUND_TRIP_CASES {
        let n = rng.gen_range(1..=3usize);
        let y: Vec<ExactScalar> = (0..n)
            .map(|_| ratio(rng.gen_range(1..1_000_000), rng.gen_range(1..=1_000_000)))
            .collect();
        let n_q = int(n as i64);
        let grid = [n_q.clone(), &n_q + ratio(1, 2), &n_q + int(1), &n_q * int(2), &n_q * int(3)];
        let frontier = best_approx(&[y.clone()], ROUND_TRIP_Q).expect("enumeration");
        for w in frontier.iter().filter(|w| w.size >= int(2)) {
            let Some(v) = grid.iter().rev().find(|v| w.satisfies(v)) else {
                continue;
            };
            match flow_certificate(&y, &w.q, &w.p[0], v) {
                Ok(c) if c.forward.holds() && c.vector_ok => certified += 1,
                Ok(_) => failures.push(format!("case {case}: certificate fails at v={v}")),
                Err(e) => failures.push(format!("case {case}: {e}")),
            }
        }
        let gamma = ratio(1, 4 * n as i64);
        for step in 1..=CONVERSE_STEPS {
            match flow_converse(&y, 2, step, &gamma, SVP_BOUND) {
                Ok(Some(c)) if c.holds => converse += 1,
                Ok(Some(_)) => failures.push(format!("case {case} step {step}: converse witness misses v'")),
                Ok(None) => {}
                Err(e) => failures.push(format!("case {case} step {step}: {e}")),
            }
        }
    }
    outcome(
        failures.is_empty() && certified > 0 && converse > 0,
        format!(
            "{certified} witnesses certified in log-space, {converse} grid certificates mapped back {}",
            failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

fn exponent_oracles() -> Outcome {
    let golden = make_test_number(&TestNumberKind::Golden { digits: 40 }).expect("golden").value;
    let est = exponent_estimate(&[vec![golden]], &[GOLDEN_Q], Mode::Standard, &ExponentOptions::default())
        .expect("golden estimate");
    let golden_ok = (GOLDEN_BAND.0..=GOLDEN_BAND.1).contains(&est.omega_hat);

    let l = make_test_number(&TestNumberKind::Liouville { base: 10, depth: 5 }).expect("liouville").value;
    let options = ExponentOptions {
        min_size: None,
        injected: liouville_witnesses(10, 5).into_iter().map(|w| (w.q, w.p)).collect(),
    };
    let lest = exponent_estimate(&[vec![l]], &[1000], Mode::Standard, &options).expect("liouville estimate");
    let liouville_ok = lest.omega_hat >= LIOUVILLE_FLOOR;

    let rationals: Vec<Vec<ExactScalar>> = vec![
        vec![ratio(355, 113)],
        vec![ratio(-7, 19)],
        vec![ratio(1, 2), ratio(2, 5)],
        vec![ratio(3, 11), ratio(-4, 7), ratio(5, 13)],
    ];
    let zero_ok = rationals.iter().all(|y| {
        best_approx(&[y.clone()], 200)
            .expect("enumeration")
            .last()
            .is_some_and(|w| w.quality.is_zero())
    });
    outcome(
        golden_ok && liouville_ok && zero_ok,
        format!(
            "golden omega_hat = {:.4} at Q = {GOLDEN_Q}; Liouville omega_hat = {:.4}; rationals reach quality 0: {zero_ok}",
            est.omega_hat, lest.omega_hat
        ),
    )
}

fn monte_carlo_measure() -> Outcome {
    let b = make_test_number(&TestNumberKind::Sqrt2 { digits: 40 }).expect("sqrt2").value;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &q in &MC_QS {
        match measure_a_set(&[b.clone()], &int(3), q, MC_SAMPLES, SEED + q) {
            Ok(m) => {
                rows.push(format!(
                    "Q={q}: {:.5} in [{:.5}, {:.5}]",
                    m.measure_hat, m.wilson_low, m.wilson_high
                ));
                points.push((q as f64, m.measure_hat));
            }
            Err(e) => return outcome(false, format!("Q={q}: {e}")),
        }
    }
    for r in &rows {
        println!("    {r}");
    }
    let slope = fit_loglog_slope(&points);
    outcome(
        slope.is_some_and(|s| s <= MC_SLOPE_MAX),
        format!("log-log slope {slope:?} (need <= {MC_SLOPE_MAX})"),
    )
}

fn separations() -> Outcome {
    let l = make_test_number(&TestNumberKind::Liouville { base: 10, depth: 5 }).expect("liouville").value;
    let a = [l, int(0)];
    let w = &liouville_witnesses(10, 5)[3];
    let injected = vec![(w.q.clone(), vec![w.p[0].clone(), BigInt::zero()])];
    let non_extremal = hyperplane_extremal_evidence(&a, SEPARATION_Q, &int(3), &injected).expect("evidence");
    let exact_witness = non_extremal.violations.iter().any(|v| v.lhs() == scalar::pow10(-96));

    let options = ExponentOptions {
        min_size: None,
        injected: injected.clone(),
    };
    let strong = strong_hyperplane_verdict(&a, &[SEPARATION_Q], &options, &ratio(1, 2)).expect("verdict");
    let plain = hyperplane_extremal_evidence(&a, SEPARATION_Q, &ratio(5, 2), &[]).expect("search");
    let separated = strong.threshold == 1 && strong.not_strongly_extremal_evidence && !plain.is_violated();
    outcome(
        exact_witness && separated,
        format!(
            "(i) exact witness |p + aq| = 10^-96 at q = 10^24: {exact_witness}; \
             (ii) k + 1 = {}, exceeded at q = {:?}, no standard witness at v = 5/2 up to Q = {SEPARATION_Q}: {}",
            strong.threshold,
            strong.evidence_q,
            !plain.is_violated()
        ),
    )
}

fn goodness_laws() -> Outcome {
    let balls = [
        Ball::interval(int(-1), int(1)).expect("ball"),
        Ball::interval(int(0), int(1)).expect("ball"),
    ];
    let eps = [ratio(1, 2), ratio(1, 10), ratio(1, 100), ratio(1, 1000)];
    let mut worst = 0.0f64;
    for l in 1..=5 {
        let f = FunctionSpec::Polynomial(Poly::monomial(l));
        match goodness_profile(&f, &balls, &ratio(1, l as i64), &eps) {
            Ok(p) => worst = worst.max((p.c_hat - 1.0).abs()),
            Err(e) => return outcome(false, format!("x^{l}: {e}")),
        }
    }
    let cantor = FunctionSpec::CantorBad(build_cantor_bad(4).expect("construction"));
    let table = demonstrate_not_good(&cantor, &ratio(4, 27), &[ratio(1, 2)], &dyadic_radii(&ratio(1, 64), 4));
    let growth = match table {
        Ok(t) => t.summary[0].growth,
        Err(e) => return outcome(false, format!("Cantor demonstration: {e}")),
    };
    outcome(
        worst <= MONOMIAL_TOL && growth >= CANTOR_GROWTH,
        format!("x^l: max |C_hat - 1| = {worst:.2e}; Cantor growth at x0 = 4/27 over 4 halvings = {growth:.1}"),
    )
}

fn dirichlet_floor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut misses = Vec::new();
    for _ in 0..DIRICHLET_CASES {
        let y: Vec<ExactScalar> = (0..2)
            .map(|_| {
                let d = rng.gen_range(51..=1000i64);
                ratio(rng.gen_range(-5 * d..=5 * d), d)
            })
            .collect();
        let frontier = best_approx(&[y.clone()], DIRICHLET_Q).expect("enumeration");
        let ok = frontier.iter().any(|w| &w.quality * &w.size * &w.size <= int(2));
        if !ok {
            misses.push(y.iter().map(scalar::fmt_exact).collect::<Vec<_>>().join(","));
        }
    }
    outcome(
        misses.is_empty(),
        format!("{DIRICHLET_CASES} runs at Q = {DIRICHLET_Q}, {} without a witness {misses:?}", misses.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "corank-one suite", corank_suites),
        (2, "column-vector suite", column_suites),
        (3, "flow action oracle", flow_action_oracle),
        (4, "flow round trip", flow_round_trip),
        (5, "exponent oracles", exponent_oracles),
        (6, "Monte-Carlo measure decay", monte_carlo_measure),
        (7, "extremality separations", separations),
        (8, "goodness laws", goodness_laws),
        (9, "Dirichlet floor", dirichlet_floor),
    ];
    // Optional numeric arguments select criteria, e.g. `-- 3 4`.
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "criterion {id} [{name}]: {verdict} ({:.1}s) {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
