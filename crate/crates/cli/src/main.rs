//! Command-line front end: scenario configuration, sweeps over energies and
//! phases, and CSV/JSON report emission for offline plotting.

mod output;
mod scenario;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use output::{csv_document, emit, fmt_f64, write_atomic};
use scenario::{effective_site_budget, Scenario};
use serde::Serialize;
use spectral_lab::potentials::{Perturbation, PotentialSpec, SignPattern};
use spectral_lab::propagator::{
    canonical_pair_with_budget, default_checkpoints, log_checkpoints, propagate_with_budget,
    Direction,
};
use spectral_lab::{
    bounded_density_statistic, classify_subordinate, continued_fraction,
    fibonacci_report, fit_growth_exponents, phase_grid, sparse_report, subordinacy_ratio,
    wronskian, NormProfile, Theta,
};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "spectral-lab",
    version,
    about = "Numerical laboratory for discrete Schrödinger operators: \
             quasiperiodic/sparse potentials, transfer-matrix propagation, \
             growth-exponent and subordinacy diagnostics, perturbation \
             stability, and decay-threshold calculators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON scenario file (stability subcommand); flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for grid sweeps (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed recorded in every output; feeds seeded-random sign patterns
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted); files are written atomically
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the subcommand's natural output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate V(n) over a site range
    Potential(PotentialCmd),
    /// Continued-fraction coefficients and running means of theta
    Cf(CfCmd),
    /// Propagate the canonical solution pair and write norm curves
    Solve(SolveCmd),
    /// Fit the growth exponents gamma1, gamma2 over a phase grid
    Exponents(ExponentsCmd),
    /// Subordinacy ratio diagnostics at one energy and phase
    Subordinacy(SubordinacyCmd),
    /// Variation-of-parameters stability pipeline (scenario-driven)
    Stability(StabilityCmd),
    /// Closed-form decay thresholds and exponent bounds
    Thresholds(ThresholdsCmd),
    /// Exploratory access to the verification oracles
    Oracle(OracleCmd),
}

/// Potential selection shared by several subcommands.
#[derive(Args, Clone)]
struct PotentialFlags {
    /// Family: free | sturmian | sparse
    #[arg(long, default_value = "free")]
    potential: String,
    /// Sturmian coupling
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Rotation number: golden, sqrt2-1, p/q, or a high-precision decimal
    #[arg(long, default_value = "golden")]
    theta: String,
    /// Sturmian phase (exact rational: decimal or p/q)
    #[arg(long, default_value = "0")]
    rho: String,
    /// Sparse exponent in (0,1)
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// JSON potential spec file; overrides the family flags
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Perturbation amplitude C (> 0); requires --perturb-p
    #[arg(long)]
    perturb_c: Option<f64>,
    /// Perturbation decay exponent p (> 0)
    #[arg(long)]
    perturb_p: Option<f64>,
    /// Perturbation sign pattern: plus | alternating | random
    #[arg(long, default_value = "plus")]
    sign_pattern: String,
}

impl PotentialFlags {
    fn base_spec(&self) -> Result<PotentialSpec> {
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let spec: PotentialSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            return Ok(spec);
        }
        Ok(match self.potential.as_str() {
            "free" => PotentialSpec::Free,
            "sturmian" => PotentialSpec::Sturmian {
                lambda: self.lambda,
                theta: Theta::from_str(&self.theta).map_err(|e| anyhow!("--theta: {e}"))?,
                rho: spectral_lab::theta::parse_rational(&self.rho)
                    .map_err(|e| anyhow!("--rho: {e}"))?,
            },
            "sparse" => PotentialSpec::Sparse { alpha: self.alpha },
            other => bail!("unknown potential family {other:?} (try free|sturmian|sparse)"),
        })
    }

    fn build(&self, seed: u64) -> Result<PotentialSpec> {
        let base = self.base_spec()?;
        let spec = match (self.perturb_c, self.perturb_p) {
            (None, None) => base,
            (Some(c), Some(p)) => PotentialSpec::perturbed(
                base,
                Perturbation::new(c, p, parse_pattern(&self.sign_pattern)?, seed),
            ),
            _ => bail!("--perturb-c and --perturb-p must be given together"),
        };
        spec.validate().map_err(|e| anyhow!("invalid potential: {e}"))?;
        Ok(spec)
    }
}

fn parse_pattern(s: &str) -> Result<SignPattern> {
    Ok(match s {
        "plus" => SignPattern::Plus,
        "alternating" => SignPattern::Alternating,
        "random" | "seeded-random" => SignPattern::Random,
        other => bail!("unknown sign pattern {other:?} (try plus|alternating|random)"),
    })
}

#[derive(Args)]
struct PotentialCmd {
    #[command(flatten)]
    flags: PotentialFlags,
    #[arg(long, default_value_t = 0)]
    n_min: i64,
    #[arg(long, default_value_t = 100)]
    n_max: i64,
}

#[derive(Args)]
struct CfCmd {
    /// Rotation number descriptor
    #[arg(long)]
    theta: String,
    /// Number of certified partial quotients
    #[arg(long, default_value_t = 32)]
    terms: usize,
}

#[derive(Args)]
struct SolveCmd {
    #[command(flatten)]
    flags: PotentialFlags,
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long = "L-max", default_value_t = 1e6)]
    l_max: f64,
    /// Propagate toward negative sites (whole-line potentials only)
    #[arg(long)]
    left: bool,
}

#[derive(Args)]
struct ExponentsCmd {
    #[command(flatten)]
    flags: PotentialFlags,
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 32)]
    phases: usize,
    #[arg(long = "L-min", default_value_t = 1e3)]
    l_min: f64,
    #[arg(long = "L-max", default_value_t = 1e6)]
    l_max: f64,
    #[arg(long, default_value_t = 64)]
    checkpoints: usize,
}

#[derive(Args)]
struct SubordinacyCmd {
    #[command(flatten)]
    flags: PotentialFlags,
    #[arg(long)]
    energy: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Ratio exponent; defaults to alpha/(2-alpha) of the fitted exponents
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 16)]
    phases: usize,
    #[arg(long = "L-max", default_value_t = 1e6)]
    l_max: f64,
    #[arg(long, default_value_t = 0.5)]
    tail_fraction: f64,
    #[arg(long, default_value_t = 0.1)]
    drop_threshold: f64,
}

#[derive(Args)]
struct StabilityCmd {
    #[command(flatten)]
    flags: PotentialFlags,
    /// Energy grid point(s); overrides the scenario file
    #[arg(long, num_args = 1..)]
    energy: Vec<f64>,
    /// Phase grid point(s)
    #[arg(long, num_args = 1..)]
    phi: Vec<f64>,
    #[arg(long)]
    perturbation_c: Option<f64>,
    #[arg(long)]
    perturbation_p: Option<f64>,
    /// Window exponent gamma (default: midpoint of the admissible window)
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long = "L-max")]
    l_max: Option<f64>,
    /// Ratio curves CSV path
    #[arg(long)]
    curves: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdsCmd {
    /// Model: sturmian-fibonacci | sparse
    #[arg(long)]
    model: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct OracleCmd {
    #[command(subcommand)]
    which: OracleSub,
}

#[derive(Subcommand)]
enum OracleSub {
    /// Abel-summation bound on the canonical premise-saturating instance
    /// xi(n) = (1+n)^-a, psi(n) = sqrt((1+n)^b - n^b)
    Abel(AbelCmd),
}

#[derive(Args)]
struct AbelCmd {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long = "L", default_value_t = 100)]
    l: usize,
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("rayon pool");
    }
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Potential(cmd) => cmd_potential(cli, cmd),
        Command::Cf(cmd) => cmd_cf(cli, cmd),
        Command::Solve(cmd) => cmd_solve(cli, cmd),
        Command::Exponents(cmd) => cmd_exponents(cli, cmd),
        Command::Subordinacy(cmd) => cmd_subordinacy(cli, cmd),
        Command::Stability(cmd) => cmd_stability(cli, cmd),
        Command::Thresholds(cmd) => cmd_thresholds(cli, cmd),
        Command::Oracle(cmd) => match &cmd.which {
            OracleSub::Abel(abel) => cmd_abel(cli, abel),
        },
    }
}

fn reject_config(cli: &Cli) -> Result<()> {
    if cli.config.is_some() {
        bail!("--config is consumed by the stability subcommand only");
    }
    Ok(())
}

/// Rows become CSV or a JSON array of objects, honoring --format.
fn emit_rows(
    cli: &Cli,
    natural: Format,
    header: &[&str],
    rows: Vec<Vec<String>>,
    json_rows: Vec<serde_json::Value>,
) -> Result<i32> {
    let format = cli.format.unwrap_or(natural);
    let content = match format {
        Format::Csv => csv_document(cli.seed, header, &rows),
        Format::Json => {
            let doc = serde_json::json!({ "seed": cli.seed, "rows": json_rows });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(cli.out.as_deref(), &content)?;
    Ok(0)
}

fn cmd_potential(cli: &Cli, cmd: &PotentialCmd) -> Result<i32> {
    reject_config(cli)?;
    if cmd.n_min > cmd.n_max {
        bail!("--n-min must not exceed --n-max");
    }
    let spec = cmd.flags.build(cli.seed)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for n in cmd.n_min..=cmd.n_max {
        let v = spec.value(n).map_err(|e| anyhow!("V({n}): {e}"))?;
        rows.push(vec![n.to_string(), fmt_f64(v)]);
        json_rows.push(serde_json::json!({ "n": n, "V": v }));
    }
    emit_rows(cli, Format::Csv, &["n", "V"], rows, json_rows)
}

fn cmd_cf(cli: &Cli, cmd: &CfCmd) -> Result<i32> {
    reject_config(cli)?;
    if cmd.terms == 0 {
        bail!("--terms must be at least 1");
    }
    let theta = Theta::from_str(&cmd.theta).map_err(|e| anyhow!("--theta: {e}"))?;
    let cf = continued_fraction(&theta, cmd.terms)?;
    let means = bounded_density_statistic(&cf);
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (i, (&a, &mean)) in cf.coefficients.iter().zip(&means).enumerate() {
        rows.push(vec![(i + 1).to_string(), a.to_string(), fmt_f64(mean)]);
        json_rows.push(serde_json::json!({ "n": i + 1, "a_n": a, "mean_n": mean }));
    }
    emit_rows(cli, Format::Csv, &["n", "a_n", "mean_n"], rows, json_rows)
}

fn cmd_solve(cli: &Cli, cmd: &SolveCmd) -> Result<i32> {
    reject_config(cli)?;
    let spec = cmd.flags.build(cli.seed)?;
    let budget = effective_site_budget(spectral_lab::DEFAULT_SITE_BUDGET.max(cmd.l_max))?;
    let cps = default_checkpoints(cmd.l_max);
    let (norms1, norms2, wronskians) = if cmd.left {
        let init1 = (-cmd.phi.sin(), cmd.phi.cos());
        let init2 = (cmd.phi.cos(), cmd.phi.sin());
        let t1 = propagate_with_budget(&spec, cmd.energy, init1, &cps, Direction::Left, budget)?;
        let t2 = propagate_with_budget(&spec, cmd.energy, init2, &cps, Direction::Left, budget)?;
        let w: Vec<f64> = (0..cps.len())
            .map(|i| {
                let raw = wronskian(t1.windows[i], t2.windows[i]);
                let total = t1.window_scales[i] + t2.window_scales[i];
                let products = (t1.windows[i].1 * t2.windows[i].0)
                    .abs()
                    .max((t1.windows[i].0 * t2.windows[i].1).abs());
                if !spectral_lab::propagator::wronskian_resolvable(
                    f64::exp2(-(total as f64)),
                    products,
                ) {
                    f64::NAN
                } else if total == 0 || raw == 0.0 {
                    raw
                } else {
                    raw.signum() * f64::exp2(raw.abs().log2() + total as f64)
                }
            })
            .collect();
        (t1.norms, t2.norms, w)
    } else {
        let pair = canonical_pair_with_budget(&spec, cmd.energy, cmd.phi, &cps, budget)?;
        let w = pair.adjusted_wronskians();
        (pair.u1.norms, pair.u2.norms, w)
    };
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for i in 0..cps.len() {
        rows.push(vec![
            fmt_f64(cps[i]),
            fmt_f64(norms1[i]),
            fmt_f64(norms2[i]),
            fmt_f64(wronskians[i]),
        ]);
        json_rows.push(serde_json::json!({
            "L": cps[i],
            "norm_u1": norms1[i],
            "norm_u2": norms2[i],
            "wronskian": wronskians[i],
        }));
    }
    emit_rows(
        cli,
        Format::Csv,
        &["L", "norm_u1", "norm_u2", "wronskian"],
        rows,
        json_rows,
    )
}

fn phase_profiles(
    spec: &PotentialSpec,
    energy: f64,
    phases: usize,
    cps: &[f64],
    budget: f64,
) -> Result<Vec<NormProfile>> {
    phase_grid(phases)
        .into_iter()
        .map(|phi| {
            let pair = canonical_pair_with_budget(spec, energy, phi, cps, budget)?;
            Ok(NormProfile::from_trace(&pair.u1))
        })
        .collect()
}

#[derive(Serialize)]
struct ExponentsOut {
    seed: u64,
    gamma1: f64,
    gamma2: f64,
    alpha: f64,
    residual: f64,
    phases: usize,
    tail_window: (f64, f64),
}

fn cmd_exponents(cli: &Cli, cmd: &ExponentsCmd) -> Result<i32> {
    reject_config(cli)?;
    let spec = cmd.flags.build(cli.seed)?;
    let budget = effective_site_budget(spectral_lab::DEFAULT_SITE_BUDGET.max(cmd.l_max))?;
    let cps = log_checkpoints(cmd.l_min, cmd.l_max, cmd.checkpoints);
    let profiles = phase_profiles(&spec, cmd.energy, cmd.phases, &cps, budget)?;
    let fit = fit_growth_exponents(&profiles)?;
    let out = ExponentsOut {
        seed: cli.seed,
        gamma1: fit.gamma1,
        gamma2: fit.gamma2,
        alpha: fit.alpha,
        residual: fit.max_residual,
        phases: cmd.phases,
        tail_window: fit.tail_window,
    };
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => {
            emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))?;
        }
        Format::Csv => {
            let rows = vec![vec![
                fmt_f64(out.gamma1),
                fmt_f64(out.gamma2),
                fmt_f64(out.alpha),
                fmt_f64(out.residual),
            ]];
            let content =
                csv_document(cli.seed, &["gamma1", "gamma2", "alpha", "residual"], &rows);
            emit(cli.out.as_deref(), &content)?;
        }
    }
    Ok(0)
}

fn cmd_subordinacy(cli: &Cli, cmd: &SubordinacyCmd) -> Result<i32> {
    reject_config(cli)?;
    let spec = cmd.flags.build(cli.seed)?;
    let budget = effective_site_budget(spectral_lab::DEFAULT_SITE_BUDGET.max(cmd.l_max))?;
    let cps = default_checkpoints(cmd.l_max);
    let kappa = match cmd.kappa {
        Some(k) => k,
        None => {
            let profiles = phase_profiles(&spec, cmd.energy, cmd.phases, &cps, budget)?;
            let fit = fit_growth_exponents(&profiles)?;
            spectral_lab::alpha_exponent(fit.alpha)?
        }
    };
    let pair = canonical_pair_with_budget(&spec, cmd.energy, cmd.phi, &cps, budget)?;
    let num = NormProfile::from_trace(&pair.u1);
    let den = NormProfile::from_trace(&pair.u2);
    let ratios = subordinacy_ratio(&num, &den, kappa)?;
    let verdict = classify_subordinate(&ratios, cmd.tail_fraction, cmd.drop_threshold)?;
    let tail_min = ratios
        .iter()
        .skip(ratios.len() / 2)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);

    let rows: Vec<Vec<String>> =
        ratios.iter().map(|(l, r)| vec![fmt_f64(*l), fmt_f64(*r)]).collect();
    let mut content = csv_document(cli.seed, &["L", "ratio"], &rows);
    content.push_str(&format!(
        "# kappa={} verdict={} tail_min={} tail_fraction={} drop_threshold={}\n",
        fmt_f64(kappa),
        verdict,
        fmt_f64(tail_min),
        fmt_f64(cmd.tail_fraction),
        fmt_f64(cmd.drop_threshold)
    ));
    emit(cli.out.as_deref(), &content)?;
    Ok(0)
}

#[derive(Serialize)]
#[serde(untagged)]
enum PointResult {
    Ok(Box<spectral_lab::StabilityReport>),
    Err { energy: f64, phi: f64, error: String },
}

fn cmd_stability(cli: &Cli, cmd: &StabilityCmd) -> Result<i32> {
    use rayon::prelude::*;

    let mut scenario = match &cli.config {
        Some(path) => Scenario::load(path)?,
        None => {
            let c = cmd
                .perturbation_c
                .or(cmd.flags.perturb_c)
                .ok_or_else(|| anyhow!("missing --perturbation-c (or a --config scenario)"))?;
            let p = cmd
                .perturbation_p
                .or(cmd.flags.perturb_p)
                .ok_or_else(|| anyhow!("missing --perturbation-p (or a --config scenario)"))?;
            let l_max = cmd.l_max.unwrap_or(1e4);
            Scenario {
                potential: cmd.flags.base_spec()?,
                perturbation: scenario::PerturbationSpec {
                    c,
                    p,
                    sign_pattern: parse_pattern(&cmd.flags.sign_pattern)?,
                    seed: None,
                },
                energies: vec![],
                phases: vec![],
                checkpoints: scenario::ScheduleSpec { l_min: 100.0, l_max, count: 64 },
                cutoff: None,
                gamma: None,
                kappa: None,
                site_budget: spectral_lab::DEFAULT_SITE_BUDGET,
                tolerances: Default::default(),
                out: None,
                curves_out: None,
                seed: None,
            }
        }
    };
    // flags override scenario values
    if !cmd.energy.is_empty() {
        scenario.energies = cmd.energy.clone();
    }
    if !cmd.phi.is_empty() {
        scenario.phases = cmd.phi.clone();
    }
    if scenario.phases.is_empty() {
        scenario.phases = vec![0.0];
    }
    if let Some(c) = cmd.perturbation_c {
        scenario.perturbation.c = c;
    }
    if let Some(p) = cmd.perturbation_p {
        scenario.perturbation.p = p;
    }
    if let Some(g) = cmd.gamma {
        scenario.gamma = Some(g);
    }
    if let Some(k) = cmd.kappa {
        scenario.kappa = Some(k);
    }
    if let Some(n) = cmd.cutoff {
        scenario.cutoff = Some(n);
    }
    if let Some(l) = cmd.l_max {
        scenario.checkpoints.l_max = l;
    }
    if cli.out.is_some() {
        scenario.out = cli.out.clone();
    }
    if cmd.curves.is_some() {
        scenario.curves_out = cmd.curves.clone();
    }
    let seed = scenario.seed.unwrap_or(cli.seed);
    scenario.validate()?;

    let cps = scenario.checkpoints.build()?;
    let cutoff = scenario.cutoff_or_default();
    let perturbation = scenario.perturbation(seed);
    let tolerances = spectral_lab::stability::StabilityTolerances {
        ratio: scenario.tolerances.ratio,
        reconstruction: scenario.tolerances.reconstruction,
        doubling: scenario.tolerances.doubling,
        summability: scenario.tolerances.summability,
    };
    let grid: Vec<(f64, f64)> = scenario
        .energies
        .iter()
        .flat_map(|&e| scenario.phases.iter().map(move |&p| (e, p)))
        .collect();

    // dispatched to the worker pool; results collected in grid order
    let results: Vec<PointResult> = grid
        .par_iter()
        .map(|&(energy, phi)| {
            match spectral_lab::run_stability_with_tolerances(
                &scenario.potential,
                perturbation,
                energy,
                phi,
                cutoff,
                &cps,
                scenario.gamma,
                scenario.kappa,
                tolerances,
            ) {
                Ok(report) => PointResult::Ok(Box::new(report)),
                Err(e) => PointResult::Err { energy, phi, error: e.to_string() },
            }
        })
        .collect();

    let mut failures = 0usize;
    for r in &results {
        match r {
            PointResult::Ok(rep) => println!(
                "E={} phi={} verdict={} ratio_dev=({},{}) eqlimites_dev={}",
                fmt_f64(rep.energy),
                fmt_f64(rep.phi),
                rep.verdict,
                fmt_f64(rep.ratio.tail_max_dev_v1),
                fmt_f64(rep.ratio.tail_max_dev_v2),
                fmt_f64(rep.ratio.eqlimites_tail_max)
            ),
            PointResult::Err { energy, phi, error } => {
                failures += 1;
                println!("E={} phi={} error: {error}", fmt_f64(*energy), fmt_f64(*phi));
            }
        }
    }

    let doc = serde_json::json!({ "seed": seed, "results": results });
    let json = serde_json::to_string_pretty(&doc)? + "\n";
    match &scenario.out {
        Some(path) => write_atomic(path, &json)?,
        None => print!("{json}"),
    }

    if let Some(path) = &scenario.curves_out {
        let mut rows = Vec::new();
        for r in &results {
            if let PointResult::Ok(rep) = r {
                for row in &rep.ratio.rows {
                    rows.push(vec![
                        fmt_f64(rep.energy),
                        fmt_f64(rep.phi),
                        fmt_f64(row.l),
                        fmt_f64(row.ratio_v1_u1),
                        fmt_f64(row.ratio_v2_u2),
                        fmt_f64(row.eqlimites_dev),
                    ]);
                }
            }
        }
        let content = csv_document(
            seed,
            &["energy", "phi", "L", "ratio_v1_u1", "ratio_v2_u2", "eqlimites_dev"],
            &rows,
        );
        write_atomic(path, &content)?;
    }

    Ok(if failures > 0 { 2 } else { 0 })
}

fn cmd_thresholds(cli: &Cli, cmd: &ThresholdsCmd) -> Result<i32> {
    reject_config(cli)?;
    let report = match cmd.model.as_str() {
        "sturmian-fibonacci" => {
            let lambda = cmd.lambda.ok_or_else(|| anyhow!("--lambda required"))?;
            fibonacci_report(lambda)?
        }
        "sparse" => {
            let alpha = cmd.alpha.ok_or_else(|| anyhow!("--alpha required"))?;
            sparse_report(alpha)?
        }
        other => bail!("unknown model {other:?} (try sturmian-fibonacci|sparse)"),
    };
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => {
            let doc = serde_json::json!({ "seed": cli.seed, "report": report });
            emit(cli.out.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
        }
        Format::Csv => {
            let rows = vec![vec![
                report.model.clone(),
                fmt_f64(report.gamma1_sup_bound),
                fmt_f64(report.gamma2_inf_bound),
                fmt_f64(report.threshold_p),
            ]];
            let content = csv_document(
                cli.seed,
                &["model", "gamma1_sup", "gamma2_inf", "threshold_p"],
                &rows,
            );
            emit(cli.out.as_deref(), &content)?;
        }
    }
    Ok(0)
}

fn cmd_abel(cli: &Cli, cmd: &AbelCmd) -> Result<i32> {
    reject_config(cli)?;
    if cmd.l == 0 {
        bail!("--L must be at least 1");
    }
    // premise-saturating instance: |xi| hits its envelope exactly and the
    // psi norms telescope to (1+L)^b - 2^b < (1+L)^b
    let xi: Vec<f64> = (1..=cmd.l).map(|n| (1.0 + n as f64).powf(-cmd.a)).collect();
    let psi: Vec<f64> = (1..=cmd.l)
        .map(|n| ((1.0 + n as f64).powf(cmd.b) - (n as f64).powf(cmd.b)).max(0.0).sqrt())
        .collect();
    let report = spectral_lab::abel_sum_bound(&xi, &psi, &psi, cmd.a, cmd.b, cmd.l)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for n in 1..=cmd.l {
        rows.push(vec![
            n.to_string(),
            fmt_f64(report.lhs_partials[n - 1]),
            fmt_f64(report.rhs_partials[n - 1]),
        ]);
        json_rows.push(serde_json::json!({
            "n": n,
            "lhs_partial": report.lhs_partials[n - 1],
            "rhs_partial": report.rhs_partials[n - 1],
        }));
    }
    emit_rows(cli, Format::Csv, &["n", "lhs_partial", "rhs_partial"], rows, json_rows)
}
