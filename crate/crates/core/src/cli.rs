//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and maps outcomes to exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | output could not be written |
//! | 2    | invalid input (unreadable or malformed file, failed validation or precondition) |
//! | 3    | an optimizer did not converge and `--strict` was given |
//! | 64   | usage error |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adequacy::{
    commutation_residual, critical_residual, descend, descend_from, rank_one_start, AdequacyResult,
    DescentConfig,
};
use crate::constructions::{
    appendix_fixture, block_compose, build_minimal, interior_campaign, minimality_probe,
    sweep_curve, Appendix, CampaignStats, CertifiedSupport, CompositionSummary, MinimalMatrixSpec,
    ProbeResult, SupportEvidence, SweepSpec,
};
use crate::domain::{ComplexMatrix, OrthoPair, PairFile, SpherePoint, SpherePointFile, Tolerances};
use crate::error::Error;
use crate::linalg::{eigh, random_hermitian};
use crate::moment::{CertificateConfig, CertificateSummary};
use crate::oracle::{fw_distance, FwConfig};
use crate::rank_one::{
    lift_rank_one, rank_one_vectors, verify_characterization, CharacterizationReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "minsupport",
    version,
    about = "Supports of minimal hermitian matrices"
)]
struct Cli {
    /// Seed for every random draw of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for restarts, trials and sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Exit with code 3 when an optimizer does not converge.
    #[arg(long, global = true)]
    strict: bool,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate δ(V, W) by multi-start descent on the spheres.
    Adequacy {
        #[arg(long)]
        pair: PathBuf,
        #[command(flatten)]
        descent: DescentArgs,
    },
    /// Estimate δ(V, W) as a convex set distance by Frank-Wolfe.
    Oracle {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, default_value_t = 1e-9, value_parser = positive_f64)]
        gap_tol: f64,
        #[arg(long, default_value_t = 50_000, value_parser = positive_usize)]
        max_iters: usize,
        /// Use the 2/(k+2) step rule instead of exact line search.
        #[arg(long)]
        no_line_search: bool,
    },
    /// Residual report of the rank-one critical point equations.
    Critical {
        #[arg(long)]
        pair: PathBuf,
        /// Locate the point by descent from rank-one starts.
        #[arg(long, conflicts_with = "point", required_unless_present = "point")]
        from_descent: bool,
        /// Evaluate at a given sphere point (JSON {"a": …, "b": …}).
        #[arg(long)]
        point: Option<PathBuf>,
        /// Tolerance of the characterization residuals.
        #[arg(long, default_value_t = 1e-8, value_parser = positive_f64)]
        char_tol: f64,
        #[command(flatten)]
        descent: DescentArgs,
    },
    /// Check the moment certificate of a fixture (a3, b4 or c5).
    VerifyAppendix {
        #[arg(value_parser = parse_appendix)]
        which: Appendix,
        /// Also write the example as a pair file with its spanning system.
        #[arg(long)]
        pair_out: Option<PathBuf>,
    },
    /// Block-diagonal support in C^(3h+4k+5l); the result is a pair file.
    Compose {
        #[arg(long, default_value_t = 0)]
        h: usize,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        l: usize,
    },
    /// Recompute the certificate under random unitary perturbations.
    Perturb {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, value_parser = nonnegative_f64)]
        eps: f64,
        #[arg(long, default_value_t = 100, value_parser = positive_usize)]
        trials: usize,
    },
    /// Sample δ along x ↦ e^{ixA}(V, W); CSV x,delta,grad_norm,converged.
    Sweep {
        #[arg(long)]
        pair: PathBuf,
        /// Hermitian generator A (matrix JSON); seeded random when absent.
        #[arg(long)]
        gen: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01, value_parser = positive_f64)]
        dx: f64,
        #[arg(long, default_value_t = 650, value_parser = positive_usize)]
        steps: usize,
        /// Independent multi-start descent per sample instead of warm starts.
        #[arg(long)]
        cold: bool,
        #[command(flatten)]
        descent: DescentArgs,
    },
    /// Build Z = λ(P_V − P_W) for a certified support and probe minimality.
    Minimal {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, default_value_t = 1.0, value_parser = positive_f64)]
        lambda: f64,
        #[arg(long, default_value_t = 200, value_parser = positive_usize)]
        samples: usize,
        #[command(flatten)]
        descent: DescentArgs,
    },
}

#[derive(Debug, Args)]
struct DescentArgs {
    #[arg(long, default_value_t = 16, value_parser = positive_usize)]
    restarts: usize,
    #[arg(long, default_value_t = 5000, value_parser = positive_usize)]
    max_iters: usize,
    /// Gradient norm tolerance.
    #[arg(long, default_value_t = 1e-11, value_parser = positive_f64)]
    tol: f64,
    #[arg(long, default_value_t = 1.0, value_parser = unit_step)]
    step: f64,
    #[arg(long)]
    line_search: bool,
    /// Skip the projected-gradient refinement phase.
    #[arg(long)]
    no_refine: bool,
}

impl DescentArgs {
    fn config(&self, seed: u64) -> DescentConfig {
        DescentConfig {
            max_iters: self.max_iters,
            step: self.step,
            grad_tol: self.tol,
            restarts: self.restarts,
            seed,
            line_search: self.line_search,
            refine: !self.no_refine,
        }
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn nonnegative_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a nonnegative number, got {s}"))
    }
}

fn unit_step(s: &str) -> Result<f64, String> {
    let x = positive_f64(s)?;
    if x <= 1.0 {
        Ok(x)
    } else {
        Err(format!("step must lie in (0, 1], got {s}"))
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("expected a positive integer".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(format!("{e}")),
    }
}

fn parse_appendix(s: &str) -> Result<Appendix, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Outcome of a subcommand: the serialized result and whether an optimizer
/// fell short of its tolerance.
struct Outcome {
    body: String,
    converged: bool,
}

impl Outcome {
    fn json<T: Serialize>(value: &T, converged: bool) -> Result<Self, Failure> {
        let body =
            serde_json::to_string_pretty(value).map_err(|e| Failure::Output(e.to_string()))?;
        Ok(Self {
            body: body + "\n",
            converged,
        })
    }
}

enum Failure {
    Input(String),
    Output(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_pair_file(path: &Path) -> Result<PairFile, Failure> {
    read_json(path)
}

fn read_pair(path: &Path) -> Result<OrthoPair, Failure> {
    Ok(read_pair_file(path)?.validate(Tolerances::default().ortho_tol)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = pool.install(|| dispatch(&cli));
    let outcome = match outcome {
        Ok(o) => o,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_INPUT;
        }
        Err(Failure::Output(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_OUTPUT;
        }
    };
    let written = match &cli.out {
        Some(path) => write_file(path, &outcome.body),
        None => std::io::stdout()
            .write_all(outcome.body.as_bytes())
            .map_err(|e| Failure::Output(e.to_string())),
    };
    if let Err(Failure::Output(msg) | Failure::Input(msg)) = written {
        eprintln!("error: {msg}");
        return EXIT_OUTPUT;
    }
    if !outcome.converged {
        eprintln!("warning: optimizer did not reach its tolerance");
        if cli.strict {
            return EXIT_NO_CONVERGENCE;
        }
    }
    EXIT_OK
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Adequacy { pair, descent } => {
            let pair = read_pair(pair)?;
            let res = descend(&pair, &descent.config(cli.seed))?;
            Outcome::json(&res.report(), res.converged)
        }
        Command::Oracle {
            pair,
            gap_tol,
            max_iters,
            no_line_search,
        } => {
            let pair = read_pair(pair)?;
            let cfg = FwConfig {
                max_iters: *max_iters,
                gap_tol: *gap_tol,
                line_search: !no_line_search,
            };
            let res = fw_distance(&pair, &cfg)?;
            Outcome::json(&res.report(), res.converged)
        }
        Command::Critical {
            pair,
            from_descent,
            point,
            char_tol,
            descent,
        } => {
            let pair = read_pair(pair)?;
            critical(
                &pair,
                *from_descent,
                point.as_deref(),
                *char_tol,
                &descent.config(cli.seed),
            )
        }
        Command::VerifyAppendix { which, pair_out } => verify_appendix(*which, pair_out.as_deref()),
        Command::Compose { h, k, l } => {
            let comp = block_compose(*h, *k, *l)?;
            let mut file = comp.pair.to_file();
            file.columns = Some(ComplexMatrix::new(comp.columns.clone())?);
            Outcome::json(
                &ComposeOutput {
                    pair: file,
                    summary: comp.summary(),
                },
                true,
            )
        }
        Command::Perturb { pair, eps, trials } => {
            let file = read_pair_file(pair)?;
            let support = CertifiedSupport::from_pair_file(&file, Tolerances::default().ortho_tol)?;
            let stats: CampaignStats = interior_campaign(&support, *eps, *trials, cli.seed)?;
            Outcome::json(&stats, true)
        }
        Command::Sweep {
            pair,
            gen,
            dx,
            steps,
            cold,
            descent,
        } => {
            let pair = read_pair(pair)?;
            let generator = match gen {
                Some(path) => read_json::<ComplexMatrix>(path)?.into_inner(),
                None => random_hermitian(pair.n(), &mut ChaCha8Rng::seed_from_u64(cli.seed)),
            };
            let spec = SweepSpec::new(pair, generator, *dx, *steps)?;
            let table = sweep_curve(&spec, &descent.config(cli.seed), !cold)?;
            let converged = table.samples.iter().all(|s| s.converged);
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            let body = String::from_utf8(buf).map_err(|e| Failure::Output(e.to_string()))?;
            Ok(Outcome { body, converged })
        }
        Command::Minimal {
            pair,
            lambda,
            samples,
            descent,
        } => {
            let file = read_pair_file(pair)?;
            minimal(
                &file,
                *lambda,
                *samples,
                &descent.config(cli.seed),
                cli.seed,
            )
        }
    }
}

#[derive(Serialize)]
struct ComposeOutput {
    #[serde(flatten)]
    pair: PairFile,
    summary: CompositionSummary,
}

#[derive(Serialize)]
struct AppendixReport {
    fixture: Appendix,
    #[serde(flatten)]
    certificate: CertificateSummary,
    expected_x: Vec<f64>,
    expected_x_exact: Vec<String>,
    max_abs_error: f64,
    sum_x: f64,
    expected_sum_is_one: bool,
}

fn verify_appendix(which: Appendix, pair_out: Option<&Path>) -> Result<Outcome, Failure> {
    let fx = appendix_fixture(which);
    let cert = fx.certificate(&CertificateConfig::default());
    let expected = fx.expected_x_f64();
    let max_abs_error = cert
        .solution
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if let Some(path) = pair_out {
        let mut file = fx.pair.to_file();
        file.columns = Some(ComplexMatrix::new(fx.columns.clone())?);
        let text =
            serde_json::to_string_pretty(&file).map_err(|e| Failure::Output(e.to_string()))?;
        write_file(path, &(text + "\n"))?;
    }
    let report = AppendixReport {
        fixture: which,
        certificate: cert.summary(),
        expected_x_exact: fx.expected_x.iter().map(|q| q.to_string()).collect(),
        expected_x: expected,
        max_abs_error,
        sum_x: cert.solution.iter().sum(),
        expected_sum_is_one: fx.expected_sum() == num_rational::BigRational::from_integer(1.into()),
    };
    Outcome::json(&report, true)
}

#[derive(Serialize)]
struct CriticalOutput {
    delta: f64,
    converged: Option<bool>,
    lambda: f64,
    mu: f64,
    res_a: f64,
    res_b: f64,
    commutation_a: f64,
    commutation_b: f64,
    spectrum_a: Vec<f64>,
    spectrum_b: Vec<f64>,
    rank_one: bool,
    identity_defect: Option<f64>,
    report: Option<CharacterizationReport>,
}

fn best_rank_one_descent(pair: &OrthoPair, cfg: &DescentConfig) -> Result<AdequacyResult, Error> {
    let mut best: Option<AdequacyResult> = None;
    for i in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let start = rank_one_start(pair.r(), pair.s(), &mut rng);
        let mut res = descend_from(pair, cfg, &start)?;
        res.restart_index = i;
        if best.as_ref().is_none_or(|b| res.delta < b.delta) {
            best = Some(res);
        }
    }
    Ok(best.expect("restarts is positive"))
}

fn critical(
    pair: &OrthoPair,
    from_descent: bool,
    point: Option<&Path>,
    tol: f64,
    cfg: &DescentConfig,
) -> Result<Outcome, Failure> {
    let (p, converged) = if from_descent {
        let res = best_rank_one_descent(pair, cfg)?;
        (res.minimizer, Some(res.converged))
    } else {
        let path = point.expect("clap requires --point without --from-descent");
        let file: SpherePointFile = read_json(path)?;
        (
            SpherePoint::new(
                file.a.into_inner(),
                file.b.into_inner(),
                &Tolerances::default(),
            )?,
            None,
        )
    };
    let crit = critical_residual(pair, &p);
    let (commutation_a, commutation_b) = commutation_residual(pair, &p);
    let (report, identity_defect) = match rank_one_vectors(&p) {
        Some((a, b)) => {
            let cand = lift_rank_one(pair, &a, &b)?;
            (
                Some(verify_characterization(pair, &cand, tol)?),
                Some(cand.identity_defect()),
            )
        }
        None => (None, None),
    };
    let out = CriticalOutput {
        delta: crate::adequacy::objective(pair, &p),
        converged,
        lambda: crit.lambda,
        mu: crit.mu,
        res_a: crit.res_a,
        res_b: crit.res_b,
        commutation_a,
        commutation_b,
        spectrum_a: eigh(p.a()).0,
        spectrum_b: eigh(p.b()).0,
        rank_one: report.is_some(),
        identity_defect,
        report,
    };
    Outcome::json(&out, converged.unwrap_or(true))
}

#[derive(Serialize)]
struct MinimalOutput {
    evidence: &'static str,
    z: ComplexMatrix,
    spectrum: Vec<f64>,
    probe: ProbeResult,
}

fn minimal(
    file: &PairFile,
    lambda: f64,
    samples: usize,
    cfg: &DescentConfig,
    seed: u64,
) -> Result<Outcome, Failure> {
    let pair = file.validate(Tolerances::default().ortho_tol)?;
    let spec = MinimalMatrixSpec::projector_difference(pair.clone(), lambda)?;
    let (z, evidence, converged) = match &file.columns {
        Some(cols) => {
            let w = pair.w().clone();
            let z = build_minimal(
                &spec,
                SupportEvidence::Certificate {
                    columns: cols.as_mat(),
                    w: &w,
                },
            )?;
            (z, "certificate", true)
        }
        None => {
            let res = descend(&pair, cfg)?;
            let z = build_minimal(&spec, SupportEvidence::Minimizer(&res.minimizer))?;
            (z, "minimizer", res.converged)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probe = minimality_probe(&z, 2.0 * lambda, samples, 1e-9, &mut rng);
    let out = MinimalOutput {
        evidence,
        spectrum: eigh(&z).0,
        z: ComplexMatrix::new(z)?,
        probe,
    };
    Outcome::json(&out, converged)
}
