use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Precision used when the environment does not set one.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputSpec {
    /// `None` writes to standard output.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Adds a decimal rendering next to every exact column.
    #[serde(default)]
    pub decimal: bool,
}

/// A fully resolved run: everything that determines the output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    pub output: OutputSpec,
    /// Bits of precision for truncated irrationals.
    pub precision: u32,
}

/// The same record as read from a `--config` file, where everything except
/// the command may be omitted.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub precision: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Command {
    /// Diophantine exponent estimate of a row vector y.
    ///
    /// CSV columns: q, p, quality, size, slope, injected (the witness trail).
    Exponent(ExponentArgs),
    /// Shortest vector of g_t u_y Z^{n+1} along the one-parameter flow.
    ///
    /// CSV columns: step, t, delta, log_delta, and with --gamma also
    /// converse_q, converse_p, v_prime, converse_holds.
    Flow(FlowArgs),
    /// Subgroup criterion of rank j for the subspace x -> (x, x~A).
    ///
    /// CSV columns: I, w, lhs, rhs (one row per violation).
    Criterion(CriterionArgs),
    /// Witness search |q| <= Q, ||p + a q|| <= |q|^-v for a hyperplane.
    ///
    /// CSV columns: I, w, lhs, rhs (one row per violation).
    Hyperplane(HyperplaneArgs),
    /// Witness search ||q|| <= Q, |p + b.q| <= ||q||^-v for a line through 0.
    ///
    /// CSV columns: I, w, lhs, rhs (one row per violation).
    Line(LineArgs),
    /// Monte-Carlo measure of the sets A(b, v, Q) over a Q schedule.
    ///
    /// CSV columns: Q, samples, hits, measure, halfwidth, wilson_low,
    /// wilson_high, exact_rechecks.
    Measure48(MeasureArgs),
    /// Strong extremality verdict for a hyperplane: exponent against k + 1.
    ///
    /// CSV columns: q, p, quality, size, slope, injected (the witness trail).
    Strong(StrongArgs),
    /// Sublevel-set profile of a function, or a not-good demonstration at x0.
    ///
    /// CSV columns: ball, radius, alpha, eps, ratio, ratio_lower (profile);
    /// alpha, radius, c_hat, c_hat_lower (demonstration).
    Goodness(GoodnessArgs),
    /// Exhaustive lower-bound suites over random rational matrices.
    ///
    /// CSV columns: suite, n, s, j, matrices, reps, evaluations, violations.
    Lemmas(LemmaArgs),
    /// Small-scale run of the oracle suites; fails loudly on any mismatch.
    ///
    /// CSV columns: suite, passed, checked, detail.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exponent(_) => "exponent",
            Command::Flow(_) => "flow",
            Command::Criterion(_) => "criterion",
            Command::Hyperplane(_) => "hyperplane",
            Command::Line(_) => "line",
            Command::Measure48(_) => "measure48",
            Command::Strong(_) => "strong",
            Command::Goodness(_) => "goodness",
            Command::Lemmas(_) => "lemmas",
            Command::Selftest(_) => "selftest",
        }
    }
}

fn default_q_schedule() -> Vec<u64> {
    vec![10_000]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    #[default]
    Standard,
    Multiplicative,
}

/// Numbers are exact rationals (`3/7`, `0.125`) or named constants:
/// `golden`, `sqrt2`, `liouville[:base:depth]`, `random:seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct ExponentArgs {
    /// Shorthand for a one-dimensional y.
    #[arg(long)]
    #[serde(default)]
    pub kind: Option<String>,
    /// Entries of y, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub y: Vec<String>,
    /// Increasing cutoff schedule.
    #[arg(long = "Q", value_delimiter = ',', default_value = "10000")]
    #[serde(rename = "Q", default = "default_q_schedule")]
    pub q: Vec<u64>,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub mode: ModeArg,
    /// Smallest size entering the estimate.
    #[arg(long)]
    #[serde(default)]
    pub min_size: Option<u64>,
}

fn default_base() -> u32 {
    2
}

fn default_t_max() -> u64 {
    40
}

fn default_search_bound() -> u64 {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct FlowArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub y: Vec<String>,
    /// Times are t = step * n * ln(base).
    #[arg(long, default_value_t = default_base())]
    #[serde(default = "default_base")]
    pub base: u32,
    #[arg(long, default_value_t = default_t_max())]
    #[serde(default = "default_t_max")]
    pub t_max: u64,
    /// Also map each delta <= e^{-gamma t} back to an approximation.
    #[arg(long)]
    #[serde(default)]
    pub gamma: Option<String>,
    #[arg(long, default_value_t = default_search_bound())]
    #[serde(default = "default_search_bound")]
    pub search_bound: u64,
}

fn default_random_bases() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct CriterionArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub j: usize,
    /// Basis entries range over [-bound, bound].
    #[arg(long)]
    pub bound: i64,
    /// JSON file holding A as rows of numbers or strings.
    #[arg(long = "A", conflicts_with = "a")]
    #[serde(rename = "A", default)]
    pub a_file: Option<PathBuf>,
    /// A inline: rows separated by ';', entries by ','.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub a: Option<String>,
    /// Defaults to (n+1-j)/j + 1.
    #[arg(long)]
    #[serde(default)]
    pub v: Option<String>,
    /// Only representatives with max_{0 not in I}|w_I| > N count.
    #[arg(long = "N", default_value = "1")]
    #[serde(rename = "N", default = "one")]
    pub n_cut: String,
    /// Random bases drawn when the literal box exceeds the budget.
    #[arg(long, default_value_t = default_random_bases())]
    #[serde(default = "default_random_bases")]
    pub random_bases: usize,
}

fn one() -> String {
    "1".into()
}

fn default_search_q() -> u64 {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct HyperplaneArgs {
    /// Coefficients a_0, ..., a_{n-1}.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub a: Vec<String>,
    #[arg(long = "Q", default_value_t = default_search_q())]
    #[serde(rename = "Q", default = "default_search_q")]
    pub q: u64,
    /// Must exceed n.
    #[arg(long)]
    pub v: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct LineArgs {
    /// Slopes b_1, ..., b_{n-1}.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub b: Vec<String>,
    #[arg(long = "Q", default_value_t = default_search_q())]
    #[serde(rename = "Q", default = "default_search_q")]
    pub q: u64,
    /// Must exceed n.
    #[arg(long)]
    pub v: String,
}

fn default_sqrt2() -> Vec<String> {
    vec!["sqrt2".into()]
}

fn default_three() -> String {
    "3".into()
}

fn default_measure_qs() -> Vec<u64> {
    vec![16, 64, 256, 1024]
}

fn default_samples() -> u64 {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct MeasureArgs {
    #[arg(long, value_delimiter = ',', default_value = "sqrt2", allow_hyphen_values = true)]
    #[serde(default = "default_sqrt2")]
    pub b: Vec<String>,
    #[arg(long, default_value = "3")]
    #[serde(default = "default_three")]
    pub v: String,
    #[arg(long = "Qs", value_delimiter = ',', default_value = "16,64,256,1024")]
    #[serde(rename = "Qs", default = "default_measure_qs")]
    pub qs: Vec<u64>,
    #[arg(long, default_value_t = default_samples())]
    #[serde(default = "default_samples")]
    pub samples: u64,
}

fn default_half() -> String {
    "1/2".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct StrongArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub a: Vec<String>,
    #[arg(long = "Q", value_delimiter = ',', default_value = "1000")]
    #[serde(rename = "Q", default = "default_strong_q")]
    pub q: Vec<u64>,
    /// Evidence needs ||p + a q|| <= |q|^-(k+1+margin).
    #[arg(long, default_value = "1/2")]
    #[serde(default = "default_half")]
    pub margin: String,
}

fn default_strong_q() -> Vec<u64> {
    vec![1000]
}

fn default_eps() -> Vec<String> {
    ["1/2", "1/10", "1/100", "1/1000"].map(String::from).to_vec()
}

fn default_halvings() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct GoodnessArgs {
    /// `poly:c0,c1,...`, `monomial:l`, `shifted:a:l` for (x-a)^l, or
    /// `cantor:levels`.
    #[arg(long, allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<String>,
    /// Balls as `lo:hi`, repeatable (profile mode).
    #[arg(long = "ball", allow_hyphen_values = true)]
    #[serde(default)]
    pub balls: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "1/2,1/10,1/100,1/1000")]
    #[serde(default = "default_eps")]
    pub eps: Vec<String>,
    /// Centre for the shrinking-ball demonstration.
    #[arg(long, conflicts_with = "balls", allow_hyphen_values = true)]
    #[serde(default)]
    pub x0: Option<String>,
    #[arg(long, default_value = "1/64")]
    #[serde(default = "default_r0")]
    pub r0: String,
    #[arg(long, default_value_t = default_halvings())]
    #[serde(default = "default_halvings")]
    pub halvings: u32,
}

fn default_r0() -> String {
    "1/64".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    CorankOne,
    ColumnVector,
    #[default]
    Both,
}

fn default_dims() -> Vec<usize> {
    vec![2, 3, 4]
}

fn default_matrices() -> usize {
    20
}

fn default_suite_bound() -> i64 {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct LemmaArgs {
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub suite: SuiteArg,
    #[arg(long = "n", value_delimiter = ',', default_value = "2,3,4")]
    #[serde(rename = "n", default = "default_dims")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = default_matrices())]
    #[serde(default = "default_matrices")]
    pub matrices: usize,
    #[arg(long, default_value_t = default_suite_bound())]
    #[serde(default = "default_suite_bound")]
    pub bound: i64,
    #[arg(long, default_value_t = 10_000)]
    #[serde(default = "default_suite_random")]
    pub random_bases: usize,
}

fn default_suite_random() -> usize {
    10_000
}

fn default_cases() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct SelftestArgs {
    /// Random matrices per lower-bound suite.
    #[arg(long, default_value_t = 5)]
    #[serde(default = "default_selftest_matrices")]
    pub matrices: usize,
    #[arg(long, default_value_t = 2)]
    #[serde(default = "default_selftest_bound")]
    pub bound: i64,
    /// Random cases for the flow-action oracle and the round trip.
    #[arg(long, default_value_t = default_cases())]
    #[serde(default = "default_cases")]
    pub cases: usize,
}

fn default_selftest_matrices() -> usize {
    5
}

fn default_selftest_bound() -> i64 {
    2
}
