//! One function per subcommand; each returns its artifacts.

use serde::Serialize;
use serde_json::{json, Value};
use smallball::bounds::{
    bound_fbm_holder_norm, bound_gaussian_class, certify_iid_sum, representation_feasibility,
    Certificate, ConstantsMode, GaussianClassProblem, IidMode, Regime,
};
use smallball::concentration::TailModel;
use smallball::gauss::{
    fgn_autocovariances, fgn_symbol, symbol_sup, ClassParams, IncrementCovariance, SymbolSup,
    DEFAULT_TRUNCATION,
};
use smallball::mc::{
    csv_number, estimate_smallball, fit_rate, fit_window, statistical_certificates, validate,
    FitMode, NormKind, SmallBallEstimate,
};
use smallball::simulate::{DriftSpec, PathSampler, ProcessKind, ProcessSpec};
use smallball::{Error, SeedSpec, UniformGrid};

use crate::config::{Command, FitSource, ProcessConfig, RunConfig};
use crate::error::CliError;

/// Offset between the seed of a verification sample and the seed of the
/// independent sample behind statistical certificates.
const CERTIFICATE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

pub struct Artifacts {
    pub csv: String,
    pub result: Value,
    /// Printed to stdout in addition to the files.
    pub stdout: Option<String>,
    /// A non-vacuous certificate was contradicted.
    pub failed: bool,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    match command {
        Command::Simulate => simulate(cfg),
        Command::Bound => bound(cfg),
        Command::Estimate => estimate(cfg),
        Command::Rate => rate(cfg),
        Command::Verify => verify(cfg),
        Command::Toeplitz => toeplitz(cfg),
        Command::Feasibility => feasibility(cfg),
    }
}

fn is_iid(spec: &ProcessSpec) -> bool {
    matches!(spec.kind, ProcessKind::IidSum(_))
}

/// Simulation grid; an i.i.d. sum of `n` terms lives on `0, 1, …, n`.
fn simulation_grid(cfg: &RunConfig, spec: &ProcessSpec) -> Result<UniformGrid, CliError> {
    let n = cfg.steps();
    let horizon = if is_iid(spec) { n as f64 } else { cfg.horizon };
    Ok(UniformGrid::new(horizon, n)?)
}

fn regime(norm: NormKind) -> Result<Regime, CliError> {
    match norm {
        NormKind::Sup => Ok(Regime::Sup),
        NormKind::Holder { beta } => Ok(Regime::Holder { beta }),
        NormKind::L1 => Err(CliError::Usage(
            "no certificate family bounds the L1 norm of the path".into(),
        )),
    }
}

#[derive(Serialize)]
struct Bounded {
    status: &'static str,
    certificate: Certificate,
}

fn settle(
    result: smallball::Result<Certificate>,
    regime: Regime,
    eps: f64,
    horizon: f64,
) -> Result<Bounded, CliError> {
    match result {
        Ok(certificate) => Ok(Bounded {
            status: "ok",
            certificate,
        }),
        Err(e @ Error::Infeasible(_)) => Ok(Bounded {
            status: "infeasible",
            certificate: Certificate::trivial(regime, eps, horizon, e.to_string()),
        }),
        Err(e @ Error::EpsilonTooLarge { .. }) => Ok(Bounded {
            status: "inapplicable",
            certificate: Certificate::trivial(regime, eps, horizon, e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

fn drift_model(drift: DriftSpec) -> Result<Option<TailModel>, CliError> {
    match drift {
        DriftSpec::None => Ok(None),
        DriftSpec::Constant { .. } | DriftSpec::BoundedWave { .. } => {
            Ok(Some(TailModel::DriftBounded {
                bound: drift.sup_bound().expect("bounded drift"),
            }))
        }
        DriftSpec::FbmDrift { .. } | DriftSpec::SharedFbmDrift => Err(CliError::Usage(
            "this drift has no closed-form tail model; use constants_mode \"statistical\"".into(),
        )),
    }
}

/// Certificates for every configured `ε`; `lattice` forces partitions onto
/// a simulation grid.
fn certificates(
    cfg: &RunConfig,
    spec: &ProcessSpec,
    grid: UniformGrid,
    lattice: Option<f64>,
) -> Result<Vec<Bounded>, CliError> {
    let eps = cfg.require_epsilon()?;
    let regime = regime(cfg.norm)?;
    let horizon = grid.horizon();
    if cfg.constants_mode == ConstantsMode::Statistical {
        let seed = cfg.seed.wrapping_add(CERTIFICATE_SEED_OFFSET);
        let certs = statistical_certificates(
            spec,
            regime,
            eps,
            cfg.paths(Command::Verify),
            grid,
            seed,
            cfg.confidence,
        )?;
        return certs
            .into_iter()
            .zip(eps)
            .map(|(c, &e)| settle(c, regime, e, horizon))
            .collect();
    }
    let settle_all =
        |f: &dyn Fn(f64) -> smallball::Result<Certificate>| -> Result<Vec<Bounded>, CliError> {
            eps.iter()
                .map(|&e| settle(f(e), regime, e, horizon))
                .collect()
        };
    match (&spec.kind, regime) {
        (ProcessKind::IidSum(dist), Regime::Sup) => {
            let mode = match cfg.constants_mode {
                ConstantsMode::Paper => IidMode::PaperConstants,
                _ => IidMode::Sharp,
            };
            let (m, r, n) = (dist.mean_abs(), dist.range_bound(), grid.steps());
            settle_all(&|e| certify_iid_sum(n, m, r, e, mode))
        }
        (ProcessKind::IidSum(_), _) => Err(CliError::Usage("i.i.d. sums are certified in the supremum norm only".into())),
        _ if cfg.constants_mode == ConstantsMode::Paper => Err(CliError::Usage(
            "closed-form paper constants exist only for i.i.d. sums; use \"explicit\" or \"statistical\"".into(),
        )),
        (_, Regime::Sup) => {
            let class = spec
                .incremental_variance()
                .and_then(|iv| iv.class_on(horizon))
                .ok_or_else(|| CliError::Usage("process has no class parameters".into()))?;
            let drift = drift_model(cfg.drift)?;
            settle_all(&|e| {
                bound_gaussian_class(&GaussianClassProblem {
                    class,
                    horizon,
                    epsilon: e,
                    drift: drift.clone(),
                    lattice,
                })
            })
        }
        (ProcessKind::Fbm { hurst }, Regime::Holder { beta }) => {
            if cfg.drift != DriftSpec::None {
                return Err(CliError::Usage("the Hölder-norm certificate takes no drift".into()));
            }
            if horizon != 1.0 {
                return Err(CliError::Usage("the Hölder-norm certificate is stated on [0, 1]".into()));
            }
            let c_deriv = ClassParams::fbm(*hurst).c_deriv;
            settle_all(&|e| bound_fbm_holder_norm(*hurst, beta, e, c_deriv, lattice))
        }
        _ => Err(CliError::Usage("Hölder-norm certificates are available for fBm only".into())),
    }
}

fn csv_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn simulate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let spec = cfg.process_spec()?;
    let grid = simulation_grid(cfg, &spec)?;
    let paths = cfg.paths(Command::Simulate);
    let sampler = PathSampler::new(&spec, grid)?;
    let ys: Vec<Vec<f64>> = (0..paths as u64)
        .map(|i| sampler.sample_y(SeedSpec::new(cfg.seed, i)))
        .collect();
    let mut csv = String::from("t");
    for i in 0..paths {
        csv.push_str(&format!(",y_{i}"));
    }
    csv.push('\n');
    for k in 0..=grid.steps() {
        csv.push_str(&csv_number(grid.time(k)));
        for y in &ys {
            csv.push(',');
            csv.push_str(&csv_number(y[k]));
        }
        csv.push('\n');
    }
    Ok(Artifacts {
        csv,
        result: json!({ "paths": paths, "steps": grid.steps(), "horizon": grid.horizon() }),
        stdout: None,
        failed: false,
    })
}

fn bound(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let spec = cfg.process_spec()?;
    let grid = simulation_grid(cfg, &spec)?;
    let certs = certificates(cfg, &spec, grid, None)?;
    let mut csv = String::from(
        "epsilon,total,term_concentration,term_drift,p,steps,delta,level,vacuous,status\n",
    );
    for b in &certs {
        let c = &b.certificate;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            csv_number(c.epsilon),
            csv_number(c.total),
            csv_number(c.term_concentration),
            csv_number(c.term_drift),
            csv_number(c.p),
            c.steps,
            csv_number(c.delta),
            csv_number(c.level),
            csv_bool(c.vacuous),
            b.status
        ));
    }
    Ok(Artifacts {
        csv,
        result: json!({ "certificates": certs }),
        stdout: None,
        failed: false,
    })
}

fn run_estimate(
    cfg: &RunConfig,
    command: Command,
) -> Result<(ProcessSpec, UniformGrid, SmallBallEstimate), CliError> {
    let spec = cfg.process_spec()?;
    let grid = simulation_grid(cfg, &spec)?;
    let est = estimate_smallball(
        &spec,
        cfg.norm,
        cfg.require_epsilon()?,
        cfg.paths(command),
        grid,
        cfg.seed,
        cfg.confidence,
    )?;
    Ok((spec, grid, est))
}

fn estimate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (_, _, est) = run_estimate(cfg, Command::Estimate)?;
    Ok(Artifacts {
        csv: est.to_csv(),
        result: json!({ "estimate": est }),
        stdout: None,
        failed: false,
    })
}

fn rate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    type Pairs = Vec<(f64, f64)>;
    let (all, used): (Pairs, Pairs) = match cfg.fit.source {
        FitSource::Estimate => {
            let (_, _, est) = run_estimate(cfg, Command::Rate)?;
            let all = est
                .epsilon
                .iter()
                .cloned()
                .zip(est.p_hat.iter().cloned())
                .collect();
            (all, fit_window(&est))
        }
        FitSource::Bound => {
            let spec = cfg.process_spec()?;
            let grid = simulation_grid(cfg, &spec)?;
            let certs = certificates(cfg, &spec, grid, None)?;
            let all: Vec<(f64, f64)> = certs
                .iter()
                .map(|b| (b.certificate.epsilon, b.certificate.total))
                .collect();
            let used = certs
                .iter()
                .filter(|b| b.status == "ok" && !b.certificate.vacuous)
                .map(|b| (b.certificate.epsilon, b.certificate.total))
                .collect();
            (all, used)
        }
    };
    let fit = fit_rate(&used, cfg.fit.mode)?;
    let mut csv = String::from("epsilon,value,in_fit\n");
    for (e, v) in &all {
        let inside = used.iter().any(|u| u.0 == *e);
        csv.push_str(&format!(
            "{},{},{}\n",
            csv_number(*e),
            csv_number(*v),
            csv_bool(inside)
        ));
    }
    let stdout = Some(format!(
        "gamma_hat = {}, c2_hat = {}, r_squared = {} over {} points\n",
        fit.gamma_hat, fit.c2_hat, fit.r_squared, fit.points
    ));
    Ok(Artifacts {
        csv,
        result: json!({ "fit": fit, "source": cfg.fit.source, "mode": cfg.fit.mode as FitMode }),
        stdout,
        failed: false,
    })
}

fn verify(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let (spec, grid, est) = run_estimate(cfg, Command::Verify)?;
    let certs = certificates(cfg, &spec, grid, Some(grid.delta()))?;
    let plain: Vec<Certificate> = certs.iter().map(|b| b.certificate.clone()).collect();
    let report = validate(&plain, &est)?;
    let failed = report.failures() > 0;
    let stdout = Some(format!(
        "{} rows, {} FAIL, {} VACUOUS\n",
        report.rows.len(),
        report.failures(),
        report
            .rows
            .iter()
            .filter(|r| r.verdict.as_str() == "VACUOUS")
            .count()
    ));
    Ok(Artifacts {
        csv: report.to_csv(),
        result: json!({ "report": report, "certificates": certs, "estimate": est }),
        stdout,
        failed,
    })
}

fn toeplitz(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let hurst = match cfg.require_process()? {
        ProcessConfig::Fbm { hurst } => *hurst,
        ProcessConfig::Brownian => 0.5,
        _ => {
            return Err(CliError::Usage(
                "toeplitz needs an fbm or brownian process".into(),
            ))
        }
    };
    let sup = symbol_sup(
        &fgn_symbol(hurst, DEFAULT_TRUNCATION)?,
        cfg.toeplitz.symbol_points,
    );
    let mut csv = String::from("N,lambda_max,symbol_sup,ratio\n");
    let mut rows = Vec::new();
    for &n in &cfg.toeplitz.sizes {
        let lambda = IncrementCovariance::toeplitz(fgn_autocovariances(hurst, n))
            .norms()
            .two;
        let ratio = match sup {
            SymbolSup::Finite(s) => lambda / s,
            SymbolSup::Infinite => 0.0,
        };
        csv.push_str(&format!(
            "{n},{},{},{}\n",
            csv_number(lambda),
            csv_number(sup.value()),
            csv_number(ratio)
        ));
        rows.push(json!({ "N": n, "lambda_max": lambda, "ratio": ratio }));
    }
    Ok(Artifacts {
        csv,
        result: json!({ "H": hurst, "symbol_sup": sup, "rows": rows }),
        stdout: None,
        failed: false,
    })
}

fn feasibility(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let f = cfg.feasibility.ok_or_else(|| CliError::Config {
        pointer: "/feasibility".into(),
        message: "a feasibility section {H, beta, theta} is required".into(),
    })?;
    let w = representation_feasibility(f.hurst, f.beta, f.theta);
    let mut csv = String::from("parameter,value\n");
    for (k, v) in [
        ("H", w.hurst),
        ("beta", w.beta),
        ("theta", w.theta),
        ("mu", w.mu),
        ("gamma", w.gamma_repr),
        ("kappa", w.kappa),
        ("eta", w.eta),
        ("slack", w.slack),
    ] {
        csv.push_str(&format!("{k},{}\n", csv_number(v)));
    }
    csv.push_str(&format!("feasible,{}\n", csv_bool(w.feasible)));
    let text = serde_json::to_string_pretty(&w).expect("witness serializes");
    Ok(Artifacts {
        csv,
        result: json!({ "witness": w }),
        stdout: Some(format!(
            "{}\n{text}\n",
            if w.feasible { "feasible" } else { "infeasible" }
        )),
        failed: false,
    })
}
