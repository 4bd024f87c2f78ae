//! Verification suites behind the `curvature-gauge` binary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use curvature_gauge::constants::{
    constraint_holds, estimate_constant, example_beta_sequence, example_sequence, omega_ratio, EstimateConfig,
    ExamplePattern, Mode, SequenceRecord,
};
use curvature_gauge::geometry::{
    functional_comparison, pinch_ratio, total_abs_curvature, CatalogImmersion, CurvatureRules, FunctionalMode,
};
use curvature_gauge::morse::{chern_lashof_check, morse_inequality_check, shiohama_xu_check};
use curvature_gauge::quadrature::{fiber_rule, sphere_volume};
use curvature_gauge::report::{format_value, Provenance, VerificationReport};
use curvature_gauge::tensor::sc;
use curvature_gauge::topology::poincare;
use curvature_gauge::Result;

pub const THREADS_ENV: &str = "CURVATURE_GAUGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "curvature-gauge", version, about = "Total-curvature and curvature-gap verification suites")]
pub struct Cli {
    /// Directory receiving report.json and series.csv.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the curvature-gap ratio over admissible forms.
    EstimateConstant(EstimateArgs),
    /// Tabulate the degenerating sequence.
    Counterexample(SequenceArgs),
    /// Unit normal bundle integral against the Morse-count integral.
    ChernLashof(ManifoldArgs),
    /// Index-resolved version of chern-lashof.
    ShiohamaXu(IndexArgs),
    /// Curvature functional, its closed form and the estimated lower bound.
    TheoremFunctional(FunctionalArgs),
    /// Morse counts of height functions.
    Morse(MorseArgs),
    /// Every suite on the default catalog.
    All(AllArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ManifoldChoice {
    /// S^2(r1) x S^2(r2) in R^6.
    S2xs2,
    /// S^4(r) in codimension p.
    S4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    /// Fixed curvature constant `k`.
    #[value(name = "prop23", alias = "fixed-k")]
    FixedK,
    /// Constant taken from the scalar curvature.
    #[value(name = "prop24", alias = "scal-normalized")]
    ScalNormalized,
}

impl ModeChoice {
    fn mode(self, k: f64) -> Mode {
        match self {
            Self::FixedK => Mode::FixedK { k },
            Self::ScalNormalized => Mode::ScalNormalized,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ManifoldArgs {
    #[arg(long, value_enum, default_value = "s2xs2")]
    pub manifold: ManifoldChoice,
    #[arg(long, default_value_t = 1.0)]
    pub r1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r2: f64,
    /// Radius of S^4.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Codimension of S^4.
    #[arg(long = "codim", default_value_t = 2)]
    pub codim: usize,
    #[arg(long = "fiber-n", default_value_t = 256)]
    pub fiber_n: usize,
    #[arg(long = "fiber-level", default_value_t = 3)]
    pub fiber_level: usize,
    #[arg(long, default_value_t = 3)]
    pub level: usize,
    #[arg(long = "direction-level", default_value_t = 3)]
    pub direction_level: usize,
}

impl ManifoldArgs {
    fn immersion(&self) -> Result<CatalogImmersion> {
        match self.manifold {
            ManifoldChoice::S2xs2 => CatalogImmersion::product_of_spheres(2, self.r1, 2, self.r2),
            ManifoldChoice::S4 => CatalogImmersion::sphere_in_codim(4, self.r, self.codim),
        }
    }

    fn rules(&self) -> CurvatureRules {
        CurvatureRules {
            manifold_level: self.level,
            fiber_nodes: self.fiber_n,
            fiber_level: self.fiber_level,
            direction_level: self.direction_level,
        }
    }

    fn with_manifold(&self, manifold: ManifoldChoice) -> Self {
        Self { manifold, ..self.clone() }
    }
}

#[derive(Debug, Clone, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Single index; all indices `0..=n` when omitted.
    #[arg(long)]
    pub i: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, value_enum, default_value = "prop24")]
    pub mode: ModeChoice,
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 20000)]
    pub budget: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Circle nodes of the fiber rule.
    #[arg(long = "fiber-n", default_value_t = 64)]
    pub fiber_n: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SequenceArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Largest power of two in the table; rows start at m = 8.
    #[arg(long = "m-max", default_value_t = 64)]
    pub m_max: usize,
    /// Curvature constant for the rescaled sequence.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long = "fiber-n", default_value_t = 4096)]
    pub fiber_n: usize,
    #[arg(long = "fiber-level", default_value_t = 4)]
    pub fiber_level: usize,
}

#[derive(Debug, Clone, Args)]
pub struct FunctionalArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    /// Fixed curvature constant; the scalar-curvature normalization when omitted.
    #[arg(long)]
    pub k: Option<f64>,
    /// Objective evaluations for the estimated constant; 0 skips it.
    #[arg(long, default_value_t = 20000)]
    pub budget: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct MorseArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct AllArgs {
    #[command(flatten)]
    pub manifold: ManifoldArgs,
    #[arg(long, default_value_t = 20000)]
    pub budget: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long = "m-max", default_value_t = 64)]
    pub m_max: usize,
}

/// Report plus the optional plot-ready table.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: VerificationReport,
    pub series: Option<String>,
}

impl Outcome {
    fn report(report: VerificationReport) -> Self {
        Self { report, series: None }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::EstimateConstant(a) => estimate_suite(a).map(Outcome::report),
        Command::Counterexample(a) => sequence_suite(a).map(|(report, csv)| Outcome { report, series: Some(csv) }),
        Command::ChernLashof(a) => chern_lashof_suite(a).map(Outcome::report),
        Command::ShiohamaXu(a) => shiohama_xu_suite(a).map(Outcome::report),
        Command::TheoremFunctional(a) => functional_suite(a).map(Outcome::report),
        Command::Morse(a) => morse_inequality_check(&a.manifold.immersion()?, a.directions, a.seed).map(Outcome::report),
        Command::All(a) => all_suite(a),
    }
}

/// JSON with a trailing newline.
pub fn render_report(report: &VerificationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `report.json` and, if present, `series.csv` into `dir`.
pub fn write_outputs(dir: &Path, outcome: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), render_report(&outcome.report))?;
    if let Some(csv) = &outcome.series {
        fs::write(dir.join("series.csv"), csv)?;
    }
    Ok(())
}

fn estimate_suite(a: &EstimateArgs) -> Result<VerificationReport> {
    let clock = Instant::now();
    let mut cfg = EstimateConfig::new(a.n, a.p, a.mode.mode(a.k), a.delta, a.budget, a.seed);
    cfg.fiber_nodes = a.fiber_n;
    let est = estimate_constant(&cfg)?;
    let rule = fiber_rule(cfg.p, cfg.fiber_nodes, cfg.fiber_level)?;
    let rescored = omega_ratio(&est.argmin_form, cfg.mode, cfg.delta, &rule)?;

    let mut r = VerificationReport::new("estimate-constant");
    r.input("n", a.n)
        .input("p", a.p)
        .input("mode", cfg.mode.label())
        .input("delta", format_value(a.delta))
        .input("budget", a.budget)
        .input("seed", a.seed)
        .input("fiber_nodes", cfg.fiber_nodes)
        .input("starts", cfg.starts)
        .input("argmin_form", format_form(est.argmin_form.to_params().into_iter()));
    if let Mode::FixedK { k } = cfg.mode {
        r.input("k", format_value(k));
    }
    r.quantity("estimated_min", est.estimated_min, None, Provenance::EmpiricalEstimate)
        .quantity("min_sample_ratio", est.min_sample_ratio, None, Provenance::EmpiricalEstimate)
        .quantity("sample_count", est.sample_count as f64, None, Provenance::Exact)
        .quantity("admissible_samples", est.admissible_samples as f64, None, Provenance::Exact)
        .quantity("evaluations", est.evaluations as f64, None, Provenance::Exact)
        .quantity("winning_start", est.winning_start as f64, None, Provenance::Exact);
    if let Some(c) = est.candidate_ratio {
        r.quantity("candidate_ratio", c, None, Provenance::Quadrature);
    }
    r.check("estimate_positive", est.estimated_min > 0.0, format_value(est.estimated_min))
        .check("argmin_admissible", constraint_holds(&est.argmin_form, cfg.delta), "|sc| >= delta^2 |beta|^2 at the minimizer")
        .check_relative("argmin_rescores", rescored, est.estimated_min, 1e-12)
        .check("within_budget", est.evaluations <= cfg.budget, format!("{} of {}", est.evaluations, cfg.budget));
    match est.candidate_ratio {
        Some(c) => r.check("below_candidate", est.estimated_min <= c, format!("{} <= {}", format_value(est.estimated_min), format_value(c))),
        None => r.reported("below_candidate", "no admissible split-form candidate"),
    };
    r.caveat(est.label);
    r.wall_time = clock.elapsed().as_secs_f64();
    Ok(r)
}

fn format_form(values: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = values.map(format_value).collect();
    format!("[{}]", parts.join(","))
}

pub const SERIES_HEADER: &str = "m,gamma_norm,sc,rho,sigma,ratio";

fn sequence_suite(a: &SequenceArgs) -> Result<(VerificationReport, String)> {
    let clock = Instant::now();
    let pattern = ExamplePattern::default_for(a.n, a.p);
    let rule = fiber_rule(a.p, a.fiber_n, a.fiber_level)?;
    let ms: Vec<usize> = std::iter::successors(Some(8usize), |m| m.checked_mul(2)).take_while(|&m| m <= a.m_max.max(8)).collect();
    let rows: Vec<(SequenceRecord, f64, f64)> = ms
        .iter()
        .map(|&m| {
            let (_, rec) = example_sequence(m, &pattern, &rule)?;
            let beta = example_beta_sequence(m, a.k, &pattern)?;
            let transferred = omega_ratio(&beta, Mode::FixedK { k: a.k }, 0.0, &rule)?;
            Ok((rec, transferred, sc(&beta)))
        })
        .collect::<Result<_>>()?;

    let mut csv = String::from(SERIES_HEADER);
    csv.push('\n');
    for (rec, _, _) in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            rec.m,
            format_value(rec.gamma_norm),
            format_value(rec.sc_value),
            format_value(rec.rho),
            format_value(rec.sigma),
            format_value(rec.ratio)
        )
        .expect("writing to a String");
    }

    let mut r = VerificationReport::new("counterexample");
    r.input("n", a.n)
        .input("p", a.p)
        .input("m_values", format!("{ms:?}"))
        .input("k", format_value(a.k))
        .input("fiber_nodes", a.fiber_n)
        .input("fiber_level", a.fiber_level);
    let nn1 = (a.n * (a.n - 1)) as f64;
    let (mut norm_ok, mut transfer_worst, mut rho_worst, mut sigma_worst, mut cone_ok) = (true, 0f64, 0f64, 0f64, true);
    for (rec, transferred, sc_beta) in &rows {
        r.quantity(&format!("ratio_m{}", rec.m), rec.ratio, None, Provenance::Quadrature)
            .quantity(&format!("sc_m{}", rec.m), rec.sc_value, None, Provenance::Exact);
        norm_ok &= (rec.gamma_norm - 1.0).abs() <= 1e-12;
        transfer_worst = transfer_worst.max((sc_beta - nn1 * a.k).abs() / (nn1 * a.k).abs());
        transfer_worst = transfer_worst.max((transferred - rec.ratio).abs() / rec.ratio.abs());
        rho_worst = rho_worst.max(rec.rho_residual);
        sigma_worst = sigma_worst.max(rec.sigma_residual);
        cone_ok &= rec.cone_inside_omega;
    }
    let sc_decreasing = rows.windows(2).all(|w| w[1].0.sc_value.abs() < w[0].0.sc_value.abs());
    let ratio_decreasing = rows.windows(2).all(|w| w[1].0.ratio < w[0].0.ratio);
    r.check("unit_norm", norm_ok, "|gamma_m| = 1 within 1e-12")
        .check("sc_strictly_decreasing", sc_decreasing, "|sc(gamma_m)| over the table")
        .check("ratio_decreasing", ratio_decreasing, "ratio over the table")
        .check(
            "transfer_identity",
            transfer_worst <= 1e-8,
            format!("fixed-k ratio of beta_m against ratio of gamma_m, sc(beta_m) against n(n-1)k; worst relative residual {}", format_value(transfer_worst)),
        )
        .quantity("rho_residual_max", rho_worst, None, Provenance::Quadrature)
        .quantity("sigma_residual_max", sigma_worst, None, Provenance::Quadrature)
        .reported("cone_inside_omega", format!("{cone_ok}"));
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        if last.0.m >= 8 * first.0.m {
            r.check(
                "ratio_collapses",
                last.0.ratio < 0.25 * first.0.ratio,
                format!("ratio_{} = {} < 0.25 ratio_{} = {}", last.0.m, format_value(last.0.ratio), first.0.m, format_value(0.25 * first.0.ratio)),
            );
        }
    }
    r.wall_time = clock.elapsed().as_secs_f64();
    Ok((r, csv))
}

fn chern_lashof_suite(a: &ManifoldArgs) -> Result<VerificationReport> {
    let clock = Instant::now();
    let imm = a.immersion()?;
    let rules = a.rules();
    let mut r = chern_lashof_check(&imm, &rules)?;
    let tau = r.value_of("lhs").expect("identity reports carry lhs") / sphere_volume(imm.ambient_dim() - 1);
    let betti = poincare(&imm).total() as f64;
    r.quantity("total_abs_curvature", tau, Some(1e-3), Provenance::Quadrature)
        .quantity("betti_total", betti, None, Provenance::Exact)
        .check("tau_at_least_betti_total", tau >= betti - 1e-3, format!("{} >= {betti}", format_value(tau)));
    if (tau - betti).abs() <= 1e-3 {
        r.reported("tight", "tau equals the Betti total");
    }
    r.wall_time = clock.elapsed().as_secs_f64();
    Ok(r)
}

fn shiohama_xu_suite(a: &IndexArgs) -> Result<VerificationReport> {
    let imm = a.manifold.immersion()?;
    let rules = a.manifold.rules();
    if let Some(i) = a.i {
        return shiohama_xu_check(&imm, i, &rules);
    }
    let clock = Instant::now();
    let mut r = VerificationReport::new("shiohama-xu-all");
    let (mut lhs_sum, mut rhs_sum) = (0.0, 0.0);
    for i in 0..=imm.n() {
        let child = shiohama_xu_check(&imm, i, &rules)?;
        lhs_sum += child.value_of("lhs").unwrap_or(f64::NAN);
        rhs_sum += child.value_of("rhs").unwrap_or(f64::NAN);
        r.child(child);
    }
    let tau = total_abs_curvature(&imm, &rules)?.value * sphere_volume(imm.ambient_dim() - 1);
    r.input("manifold", format!("{:?}", imm.kind()))
        .quantity("lhs_sum", lhs_sum, None, Provenance::Quadrature)
        .quantity("rhs_sum", rhs_sum, None, Provenance::Quadrature)
        .check_relative("slices_partition_lhs", lhs_sum, tau, 1e-9)
        .check_relative("slices_partition_rhs", rhs_sum, lhs_sum, 1e-3);
    r.wall_time = clock.elapsed().as_secs_f64();
    Ok(r)
}

/// `epsilon = (c / 4)^{n/4} Vol(S^{n+p-1})`, minimized over `2 <= p <= n/2`,
/// with `c` the estimated ratio at `delta^2 = lambda`.
fn empirical_epsilon(n: usize, mode: Mode, lambda: f64, budget: usize, seed: u64) -> std::result::Result<f64, String> {
    let mut best: Option<f64> = None;
    for p in 2..=n / 2 {
        let cfg = EstimateConfig::new(n, p, mode, lambda.sqrt(), budget, seed);
        let est = estimate_constant(&cfg).map_err(|e| e.to_string())?;
        let eps = (est.estimated_min / 4.0).powf(n as f64 / 4.0) * sphere_volume(n + p - 1);
        best = Some(best.map_or(eps, |b: f64| b.min(eps)));
    }
    best.ok_or_else(|| format!("no codimension 2 <= p <= {}/2", n))
}

fn functional_suite(a: &FunctionalArgs) -> Result<VerificationReport> {
    let clock = Instant::now();
    let imm = a.manifold.immersion()?;
    let rules = a.manifold.rules();
    let (fmode, cmode) = match a.k {
        Some(k) => (FunctionalMode::FixedK(k), Mode::FixedK { k }),
        None => (FunctionalMode::ScalNormalized, Mode::ScalNormalized),
    };
    let x = imm.manifold_rule(1)?.point(0).to_vec();
    let lambda = pinch_ratio(&imm, &x).ok();
    let epsilon = match lambda {
        Some(l) if a.budget > 0 => empirical_epsilon(imm.n(), cmode, l, a.budget, a.seed),
        Some(_) => Err("skipped (budget 0)".into()),
        None => Err("second fundamental form vanishes".into()),
    };
    let mut r = functional_comparison(&imm, fmode, &rules, epsilon.as_ref().ok().copied())?;
    r.input("budget", a.budget).input("seed", a.seed);
    if let Err(why) = epsilon {
        r.reported("epsilon_unavailable", why);
    }
    r.wall_time = clock.elapsed().as_secs_f64();
    Ok(r)
}

fn all_suite(a: &AllArgs) -> Result<Outcome> {
    let clock = Instant::now();
    let product = a.manifold.with_manifold(ManifoldChoice::S2xs2);
    let sphere = a.manifold.with_manifold(ManifoldChoice::S4);
    let mut r = VerificationReport::new("all");
    r.input("budget", a.budget).input("seed", a.seed).input("m_max", a.m_max);
    r.child(chern_lashof_suite(&product)?);
    r.child(chern_lashof_suite(&sphere)?);
    r.child(shiohama_xu_suite(&IndexArgs { manifold: product.clone(), i: None })?);
    r.child(functional_suite(&FunctionalArgs { manifold: product.clone(), k: None, budget: a.budget, seed: a.seed })?);
    r.child(functional_suite(&FunctionalArgs { manifold: sphere.clone(), k: Some(1.0 / (sphere.r * sphere.r)), budget: 0, seed: a.seed })?);
    r.child(morse_inequality_check(&product.immersion()?, 64, a.seed)?);
    r.child(morse_inequality_check(&sphere.immersion()?, 64, a.seed)?);
    let (seq, csv) = sequence_suite(&SequenceArgs { n: 4, p: 2, m_max: a.m_max, k: 1.0, fiber_n: 4096, fiber_level: 4 })?;
    r.child(seq);
    r.child(estimate_suite(&EstimateArgs {
        n: 4,
        p: 2,
        mode: ModeChoice::ScalNormalized,
        k: 1.0,
        delta: 0.5,
        budget: a.budget,
        seed: a.seed,
        fiber_n: 64,
    })?);
    r.wall_time = clock.elapsed().as_secs_f64();
    Ok(Outcome { report: r, series: Some(csv) })
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}
