//! Small-scale oracle suites: lower bounds, the flow action against a
//! matrix-then-wedge computation, and the witness/flow round trip.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use extremal_core::criteria::{column_vector_suite, corank_one_suite, SuiteConfig};
use extremal_core::diophantine::{best_approx, flow_certificate};
use extremal_core::exterior::{IndexSet, MultiVector};
use extremal_core::lattice::{act_flow_unipotent, FlowSpec};
use extremal_core::logspace::{LogLinear, ScaledValue};
use extremal_core::scalar::{int, ratio, ExactScalar};
use extremal_core::Result;

use crate::config::SelftestArgs;
use crate::progress::Progress;
use crate::table::{Artifact, Table};

struct SuiteResult {
    name: &'static str,
    passed: bool,
    checked: u64,
    detail: String,
}

pub fn run(args: &SelftestArgs, seed: u64, progress: &Progress) -> Result<Artifact> {
    let mut results = Vec::new();
    let mut cfg = SuiteConfig::new(args.matrices, args.bound, seed);
    cfg.plan.random_bases = 500;

    progress.note("selftest: corank-one lower bound");
    let mut checked = 0;
    let mut bad = 0;
    for n in 2..=3 {
        for s in 1..n {
            let o = corank_one_suite(n, s, &cfg)?;
            checked += o.evaluations;
            bad += o.violations;
        }
    }
    results.push(SuiteResult {
        name: "corank-one",
        passed: bad == 0 && checked > 0,
        checked,
        detail: format!("{bad} violations"),
    });

    progress.note("selftest: column-vector lower bound");
    let (mut checked, mut bad) = (0, 0);
    for n in 2..=3 {
        for j in 2..=n {
            let o = column_vector_suite(n, j, &cfg)?;
            checked += o.evaluations;
            bad += o.violations;
        }
    }
    results.push(SuiteResult {
        name: "column-vector",
        passed: bad == 0 && checked > 0,
        checked,
        detail: format!("{bad} violations"),
    });

    progress.note("selftest: flow action oracle");
    results.push(flow_action_suite(args.cases, seed)?);
    progress.note("selftest: witness round trip");
    results.push(round_trip_suite(args.cases / 4 + 1, seed)?);

    let mut t = Table::new(&["suite", "passed", "checked", "detail"]);
    for r in &results {
        t.push(vec![r.name.into(), r.passed.into(), r.checked.into(), r.detail.clone().into()]);
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    Ok(Artifact {
        summary: json!({ "failed": failed }),
        table: t,
        violated: !failed.is_empty(),
    })
}

/// `g_t u_y (b_1 ∧ … ∧ b_j)`: each `b` is moved by `u_y` first, then wedged,
/// then every coefficient is scaled by the sum of its coordinate exponents.
pub fn flow_oracle(basis: &[Vec<i64>], y: &[ExactScalar], spec: &FlowSpec) -> Result<Vec<(IndexSet, ScaledValue)>> {
    let mut acc: Option<MultiVector> = None;
    for b in basis {
        let mut v: Vec<ExactScalar> = b.iter().map(|&x| int(x)).collect();
        for (yi, bi) in y.iter().zip(&b[1..]) {
            v[0] += yi * int(*bi);
        }
        let mv = MultiVector::from_vector(&v)?;
        acc = Some(match acc {
            None => mv,
            Some(w) => w.wedge(&mv)?,
        });
    }
    let w = acc.expect("nonempty basis");
    let exps = spec.coordinate_exponents();
    Ok(w.terms()
        .filter(|(_, c)| !c.is_zero())
        .map(|(set, c)| {
            let scale = set.members().fold(LogLinear::zero(), |a, k| &a + &exps[k]);
            (*set, ScaledValue::new(c.clone(), scale))
        })
        .collect())
}

fn flow_action_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut checked = 0;
    let mut mismatch = None;
    let mut done = 0;
    while done < cases {
        let n = rng.gen_range(1..=4usize);
        let j = rng.gen_range(1..=n);
        let basis: Vec<Vec<i64>> = (0..j).map(|_| (0..=n).map(|_| rng.gen_range(-4..=4)).collect()).collect();
        let big: Vec<Vec<BigInt>> = basis.iter().map(|b| b.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let mut w = MultiVector::from_int_vector(&big[0])?;
        for b in &big[1..] {
            w = w.wedge(&MultiVector::from_int_vector(b)?)?;
        }
        if w.is_zero() {
            continue;
        }
        done += 1;
        let y: Vec<ExactScalar> = (0..n)
            .map(|_| ratio(rng.gen_range(-12..=12), rng.gen_range(1..=7)))
            .collect();
        let times: Vec<LogLinear> = (0..n)
            .map(|_| LogLinear::ln_of(&ratio(rng.gen_range(2..=9), rng.gen_range(1..=2))))
            .collect::<Result<_>>()?;
        let spec = FlowSpec::multi_parameter(times)?;
        let got = act_flow_unipotent(&spec, &y, &w)?;
        let want = flow_oracle(&basis, &y, &spec)?;
        checked += IndexSet::all_of_size(n, j).len() as u64;
        let same = want.len() == got.coeffs.len() && want.iter().all(|(set, v)| got.coefficient(set) == Some(v));
        if !same && mismatch.is_none() {
            mismatch = Some(format!("basis {basis:?}"));
        }
    }
    Ok(SuiteResult {
        name: "flow-action-oracle",
        passed: mismatch.is_none(),
        checked,
        detail: mismatch.unwrap_or_else(|| format!("{cases} cases agree exactly")),
    })
}

fn round_trip_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7219);
    let mut checked = 0;
    let mut failures = 0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=2usize);
        let y: Vec<ExactScalar> = (0..n)
            .map(|_| ratio(rng.gen_range(1..100_000), rng.gen_range(1..=100_000)))
            .collect();
        let v = int(n as i64);
        for w in best_approx(&[y.clone()], 60)? {
            if w.size < int(2) || !w.satisfies(&v) {
                continue;
            }
            let c = flow_certificate(&y, &w.q, &w.p[0], &v)?;
            checked += 1;
            failures += u64::from(!(c.forward.holds() && c.vector_ok));
        }
    }
    Ok(SuiteResult {
        name: "round-trip",
        passed: failures == 0 && checked > 0,
        checked,
        detail: format!("{failures} certificates failed"),
    })
}
