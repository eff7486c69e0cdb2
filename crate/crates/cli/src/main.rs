mod args;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use lazymc::chain::{self, inf_norm_distance, Distribution, StochasticMatrix};
use lazymc::error::{Error, Result};
use lazymc::harness::suite::{self, ClaimStatus, SuiteConfig};
use lazymc::harness::{
    self, EstimatorConfig, ExperimentConfig, FamilyParams, FamilySource, TaggedChain,
};
use lazymc::io::{self, format_float};
use lazymc::{estimators, lazy, projection};
use serde::Serialize;
use serde_json::json;

use args::*;

/// Everything a subcommand can emit.
enum Output {
    Json(String),
    /// JSON and CSV renderings of the same document.
    Both {
        json: String,
        csv: String,
    },
}

struct Done {
    output: Output,
    code: u8,
}

fn ok(output: Output) -> Result<Done> {
    Ok(Done { output, code: 0 })
}

fn json<T: Serialize>(value: &T) -> Result<Output> {
    Ok(Output::Json(io::to_json_string(value)?))
}

fn both<T: Serialize>(value: &T, csv: String) -> Result<Output> {
    Ok(Output::Both {
        json: io::to_json_string(value)?,
        csv,
    })
}

fn read_initial(path: Option<&Path>, d: usize) -> Result<Distribution> {
    match path {
        Some(p) => {
            let mu = Distribution::new(io::read_vector(p)?)?;
            if mu.dim() != d {
                return Err(Error::ShapeMismatch {
                    left: d,
                    right: mu.dim(),
                });
            }
            Ok(mu)
        }
        None => Ok(Distribution::uniform(d)),
    }
}

fn states_csv(states: &[usize]) -> String {
    let mut out = String::from("t,state\n");
    for (t, s) in states.iter().enumerate() {
        let _ = writeln!(out, "{},{s}", t + 1);
    }
    out
}

fn read_path(path: &Path) -> Result<Vec<usize>> {
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let states = match value {
        serde_json::Value::Object(mut o) => o.remove("states").unwrap_or_default(),
        v => v,
    };
    Ok(serde_json::from_value(states)?)
}

#[derive(Serialize)]
struct Trajectory<'a> {
    states: &'a [usize],
    m: usize,
    seed: u64,
    rng: &'static str,
    initial_law: &'a Distribution,
}

#[derive(Serialize)]
struct Unlazied {
    matrix: lazymc::Matrix,
    in_lazy_range: bool,
}

#[derive(Serialize)]
struct ProjectedMatrix {
    matrix: StochasticMatrix,
    distances: Vec<f64>,
}

#[derive(Serialize)]
struct Learned {
    report: estimators::LearnReport,
    /// `‖M̂ − M‖∞`, when the true chain is known.
    error_inf: Option<f64>,
}

#[derive(Serialize)]
struct PiStarEstimate {
    estimate: f64,
    pi_star: f64,
    relative_error: f64,
    m: usize,
    alpha: Option<f64>,
    seed: u64,
}

#[derive(Serialize)]
struct IdentityOutcome {
    decision: u8,
    #[serde(flatten)]
    report: estimators::IdentityTestReport,
    alpha: Option<f64>,
    eps: f64,
    m: usize,
    seed: u64,
}

fn experiment(a: &ExperimentArgs) -> Result<(ExperimentConfig, Vec<TaggedChain>)> {
    let mut config = match &a.config {
        Some(p) => serde_json::from_str::<ExperimentConfig>(&fs::read_to_string(p)?)?,
        None => ExperimentConfig {
            estimator: EstimatorConfig::Oracle,
            families: vec![],
            m: None,
            grid: None,
            eps: 0.1,
            delta: 0.25,
            trials: 100,
            seed: 0,
        },
    };
    if let Some(kind) = a.estimator {
        let need_alpha = || {
            a.alpha
                .ok_or_else(|| Error::BadSpec("the extended estimators need --alpha".into()))
        };
        config.estimator = match kind {
            EstimatorKind::Oracle => EstimatorConfig::Oracle,
            EstimatorKind::MatrixDirect => EstimatorConfig::MatrixDirect,
            EstimatorKind::PiStarDirect => EstimatorConfig::PiStarDirect,
            EstimatorKind::MatrixExtended => EstimatorConfig::MatrixExtended {
                alpha: need_alpha()?,
            },
            EstimatorKind::PiStarExtended => EstimatorConfig::PiStarExtended {
                alpha: need_alpha()?,
            },
        };
    } else if a.config.is_none() {
        return Err(Error::BadSpec("give --estimator or --config".into()));
    }
    if let Some(kind) = a.family {
        config.families.push(FamilySource {
            kind,
            count: a.count,
            d_min: a.d_min,
            d_max: a.d_max,
            params: FamilyParams::default(),
            seed: a.seed.unwrap_or(config.seed),
        });
    }
    if let Some(eps) = a.eps {
        config.eps = eps;
    }
    if let Some(trials) = a.trials {
        config.trials = trials;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let mut family = if config.families.is_empty() {
        vec![]
    } else {
        config.build_family()?
    };
    for p in &a.matrix {
        family.push(TaggedChain::new(
            p.display().to_string(),
            io::read_stochastic(p)?,
        ));
    }
    if family.is_empty() {
        return Err(Error::BadSpec(
            "no chains: give --matrix, --family or a config with families".into(),
        ));
    }
    Ok((config, family))
}

fn run(cli: &Cli) -> Result<Done> {
    match &cli.command {
        Command::Analyze(a) => ok(json(&chain::profile(&io::read_stochastic(&a.matrix)?)?)?),
        Command::Lazy(a) => {
            let n = lazy::lazy(&io::read_stochastic(&a.matrix)?, a.alpha)?;
            ok(both(&n, io::matrix_to_csv(n.matrix()))?)
        }
        Command::Unlazy(a) => {
            let n = io::read_stochastic(&a.matrix)?;
            let matrix = lazy::unlazy(&n, a.alpha)?;
            let csv = io::matrix_to_csv(&matrix);
            ok(both(
                &Unlazied {
                    in_lazy_range: lazy::in_lazy_range(&n, a.alpha)?,
                    matrix,
                },
                csv,
            )?)
        }
        Command::Project(a) => match (&a.matrix, &a.vector) {
            (Some(p), _) => {
                let raw = io::read_matrix(p)?;
                let rows = projection::project_matrix_rows(&raw)?;
                let distances = rows.iter().map(|r| r.distance).collect();
                let probs: Vec<&[f64]> = rows.iter().map(|r| r.point.probs()).collect();
                let matrix = StochasticMatrix::from_rows(&probs)?;
                let csv = io::matrix_to_csv(matrix.matrix());
                ok(both(&ProjectedMatrix { matrix, distances }, csv)?)
            }
            (None, Some(p)) => ok(json(&projection::project_simplex_general(
                &io::read_vector(p)?,
            )?)?),
            (None, None) => unreachable!("clap requires one of --matrix and --vector"),
        },
        Command::Simulate(a) => {
            let m = io::read_stochastic(&a.matrix)?;
            let mu = read_initial(a.initial.as_deref(), m.dim())?;
            let states = lazy::simulate(&m, &mu, a.m, a.seed)?;
            let doc = Trajectory {
                states: &states,
                m: a.m,
                seed: a.seed,
                rng: lazy::RNG_ALGORITHM,
                initial_law: &mu,
            };
            ok(both(&doc, states_csv(&states))?)
        }
        Command::SimulateLazy(a) => {
            let b = &a.base;
            let m = io::read_stochastic(&b.matrix)?;
            let mu = read_initial(b.initial.as_deref(), m.dim())?;
            let t = lazy::simulate_lazy(&m, &mu, a.alpha, b.m, b.seed)?;
            ok(both(&t, states_csv(&t.states))?)
        }
        Command::Learn(a) => {
            let truth = a.matrix.as_deref().map(io::read_stochastic).transpose()?;
            let report = match (&a.path, &truth) {
                (Some(p), _) => {
                    let d = a.states.expect("clap requires --states with --path");
                    let path = read_path(p)?;
                    match a.alpha {
                        Some(alpha) => {
                            let lazy_est = estimators::learn_matrix_direct(&path, d)?;
                            let mut r = estimators::learn_direct_report(&path, d, None)?;
                            r.estimate = estimators::pull_back(&lazy_est, alpha)?;
                            r.lazy_estimate = Some(lazy_est);
                            r.alpha = alpha;
                            r
                        }
                        None => estimators::learn_direct_report(&path, d, None)?,
                    }
                }
                (None, Some(m)) => {
                    let mu = read_initial(a.initial.as_deref(), m.dim())?;
                    let len = a.m.expect("clap requires --m without --path");
                    match a.alpha {
                        Some(alpha) => {
                            estimators::learn_matrix_extended(m, &mu, alpha, len, a.seed)?
                        }
                        None => {
                            let path = lazy::simulate(m, &mu, len, a.seed)?;
                            estimators::learn_direct_report(&path, m.dim(), Some(a.seed))?
                        }
                    }
                }
                (None, None) => unreachable!("clap requires --matrix or --path"),
            };
            let error_inf = match &truth {
                Some(m) if m.dim() == report.estimate.dim() => {
                    Some(inf_norm_distance(report.estimate.matrix(), m.matrix())?)
                }
                _ => None,
            };
            let csv = io::matrix_to_csv(report.estimate.matrix());
            ok(both(&Learned { report, error_inf }, csv)?)
        }
        Command::EstimatePistar(a) => {
            let m = io::read_stochastic(&a.matrix)?;
            let mu = read_initial(a.initial.as_deref(), m.dim())?;
            let path = match a.alpha {
                Some(alpha) => lazy::simulate_lazy(&m, &mu, alpha, a.m, a.seed)?.states,
                None => lazy::simulate(&m, &mu, a.m, a.seed)?,
            };
            let estimate = estimators::estimate_pi_star(&path, m.dim())?;
            let pi_star = chain::stationary(&m)?.min();
            ok(json(&PiStarEstimate {
                estimate,
                pi_star,
                relative_error: (estimate / pi_star - 1.0).abs(),
                m: a.m,
                alpha: a.alpha,
                seed: a.seed,
            })?)
        }
        Command::TestIdentity(a) => {
            let b = &a.base;
            let m = io::read_stochastic(&b.matrix)?;
            let reference = io::read_stochastic(&a.reference)?;
            let mu = read_initial(b.initial.as_deref(), m.dim())?;
            let report = match b.alpha {
                Some(alpha) => estimators::identity_test_extended(
                    &m, &mu, &reference, alpha, a.eps, b.m, b.seed,
                )?,
                None => estimators::identity_test(
                    &lazy::simulate(&m, &mu, b.m, b.seed)?,
                    &reference,
                    a.eps,
                )?,
            };
            ok(json(&IdentityOutcome {
                decision: report.decision(),
                report,
                alpha: b.alpha,
                eps: a.eps,
                m: b.m,
                seed: b.seed,
            })?)
        }
        Command::Risk(a) => {
            let (config, family) = experiment(&a.experiment)?;
            let m =
                a.m.or(config.m)
                    .ok_or_else(|| Error::BadSpec("give --m or m in the config".into()))?;
            let r = harness::empirical_risk(
                &config.estimator,
                &family,
                m,
                config.eps,
                config.trials,
                config.seed,
            )?;
            let mut csv = String::from("tag,failures,errors,risk\n");
            for c in &r.per_chain {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    c.tag,
                    c.failures,
                    c.errors,
                    format_float(c.risk)
                );
            }
            ok(both(&r, csv)?)
        }
        Command::Complexity(a) => {
            let (config, family) = experiment(&a.experiment)?;
            let grid = a
                .grid
                .clone()
                .or(config.grid.clone())
                .ok_or_else(|| Error::BadGrid("give --grid or grid in the config".into()))?;
            let delta = a.delta.unwrap_or(config.delta);
            let c = harness::empirical_sample_complexity(
                &config.estimator,
                &family,
                config.eps,
                delta,
                &grid,
                config.trials,
                config.seed,
            )?;
            let mut csv = String::from("m,risk,worst_chain_tag\n");
            for ((m, r), tag) in c.grid.iter().zip(&c.risks).zip(&c.worst_tags) {
                let _ = writeln!(csv, "{m},{},{tag}", format_float(*r));
            }
            ok(both(&c, csv)?)
        }
        Command::ScanConjecture(a) => {
            let mut family = match a.count {
                0 => vec![],
                n => harness::generate_family(
                    a.family,
                    n,
                    a.d_min,
                    a.d_max,
                    &FamilyParams::default(),
                    a.seed,
                )?,
            };
            for p in &a.matrix {
                family.push(TaggedChain::new(
                    p.display().to_string(),
                    io::read_stochastic(p)?,
                ));
            }
            let scan = harness::scan_pseudo_gap_ratios(&family, &a.alpha_grid)?;
            let mut csv = String::from("tag,d,alpha,gamma_ps,gamma_ps_lazy,argmax_k,ratio\n");
            for e in &scan.entries {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    e.tag,
                    e.d,
                    format_float(e.alpha),
                    format_float(e.gamma_ps),
                    format_float(e.gamma_ps_lazy),
                    e.argmax_k.map_or(String::new(), |k| k.to_string()),
                    e.ratio.map_or(String::new(), format_float)
                );
            }
            ok(both(&scan, csv)?)
        }
        Command::VerifyPaper(a) => {
            let mut config = match (&a.config, a.quick) {
                (Some(p), _) => serde_json::from_str::<SuiteConfig>(&fs::read_to_string(p)?)?,
                (None, true) => SuiteConfig::quick(a.seed),
                (None, false) => SuiteConfig::default(),
            };
            config.seed = a.seed;
            let report = suite::run_claim_suite(&config)?;
            for c in &report.claims {
                eprintln!("{:<8} {:<32} {}", c.status.label(), c.id, c.summary);
            }
            let failed = report
                .claims
                .iter()
                .filter(|c| c.status == ClaimStatus::Fail)
                .count();
            eprintln!("{} claims, {failed} failed", report.claims.len());
            Ok(Done {
                output: json(&report)?,
                code: if report.passed() { 0 } else { 3 },
            })
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Lazy(_) => "lazy",
        Command::Unlazy(_) => "unlazy",
        Command::Project(_) => "project",
        Command::Simulate(_) => "simulate",
        Command::SimulateLazy(_) => "simulate-lazy",
        Command::Learn(_) => "learn",
        Command::EstimatePistar(_) => "estimate-pistar",
        Command::TestIdentity(_) => "test-identity",
        Command::Risk(_) => "risk",
        Command::Complexity(_) => "complexity",
        Command::ScanConjecture(_) => "scan-conjecture",
        Command::VerifyPaper(_) => "verify-paper",
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn domain_error(e: &Error, subcommand: &str) -> ExitCode {
    let doc = json!({
        "code": e.code(),
        "message": e.to_string(),
        "context": { "subcommand": subcommand },
    });
    eprintln!("{doc}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = subcommand_name(&cli.command);
    if let Some(n) = cli.threads {
        if n == 0 {
            Cli::command()
                .error(
                    clap::error::ErrorKind::InvalidValue,
                    "--threads must be at least 1",
                )
                .exit();
        }
        // Only fails if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let done = match run(&cli) {
        Ok(d) => d,
        Err(e) => return domain_error(&e, name),
    };
    let text = match (done.output, cli.format) {
        (Output::Json(j), Format::Json) | (Output::Both { json: j, .. }, Format::Json) => j,
        (Output::Both { csv, .. }, Format::Csv) => csv,
        (Output::Json(_), Format::Csv) => {
            Cli::command()
                .error(
                    clap::error::ErrorKind::InvalidValue,
                    format!("--format csv is not available for `{name}`"),
                )
                .exit();
        }
    };
    if let Err(e) = write_output(cli.output.as_ref(), &text) {
        return domain_error(&e, name);
    }
    ExitCode::from(done.code)
}
