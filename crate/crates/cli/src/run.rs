//! Orchestration of the three run modes.

use std::time::Instant;

use anyhow::Result;
use boxtorus_core::boxop::{box_apply, box_invert};
use boxtorus_core::model::Nonlinearity;
use boxtorus_core::solver::{multi_start, ContinuationSchedule, MultiStartOptions};
use boxtorus_core::verify::{
    bootstrap_report, c0_bound_diagnostic, run_estimate, Ensemble, Estimate, EstimateParams, EstimateReport, Sweep,
    SMOOTH_DECAY,
};

use crate::artifacts::{CheckLine, Diagnostics, Manifest, RunDir, Status};
use crate::config::{Mode, RunConfig};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    CheckFailed = 1,
    InvalidConfig = 2,
    NonConvergence = 3,
    Failure = 4,
}

impl From<Status> for Exit {
    fn from(s: Status) -> Self {
        match s {
            Status::Ok => Exit::Success,
            Status::CheckFailed => Exit::CheckFailed,
            Status::NonConvergence => Exit::NonConvergence,
        }
    }
}

/// Runs `config` and writes its artifacts under `config.out_dir`.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    config.validate()?;
    let dir = RunDir::create(&config.out_dir)?;
    let mut manifest = Manifest::new(config);
    // written up front so that a failing run still leaves its config behind
    dir.write_manifest(&manifest)?;
    let started = Instant::now();
    match config.mode {
        Mode::Solve => solve(config, &dir, &mut manifest)?,
        Mode::VerifyEstimates => verify(config, &dir, &mut manifest)?,
        Mode::Selftest => selftest(&mut manifest)?,
    }
    manifest.timings.insert("total_s".into(), started.elapsed().as_secs_f64());
    dir.write_manifest(&manifest)?;
    Ok(manifest)
}

fn solve(config: &RunConfig, dir: &RunDir, manifest: &mut Manifest) -> Result<()> {
    let nl = config.nonlinearity()?;
    let t = Instant::now();
    let records = multi_start(&nl, &config.schedule, &config.multistart_options())?;
    manifest.timings.insert("solve_s".into(), t.elapsed().as_secs_f64());
    let t = Instant::now();
    for (i, record) in records.iter().enumerate() {
        let diagnostics = Diagnostics {
            bootstrap: bootstrap_report(&nl, record)?,
            c0: c0_bound_diagnostic(&nl, record, None)?,
        };
        manifest.branches.push(dir.write_branch(i, record, &diagnostics)?);
        dir.write_manifest(manifest)?;
    }
    manifest.timings.insert("diagnostics_s".into(), t.elapsed().as_secs_f64());
    if records.is_empty() {
        manifest.status = Status::NonConvergence;
    }
    Ok(())
}

fn sweep_for(config: &RunConfig, estimate: Estimate, radius: usize, samples: usize) -> Sweep {
    let decay = config.verify.decay.unwrap_or_else(|| estimate.default_decay());
    Sweep {
        ensemble: Ensemble::new(decay, config.seed),
        samples,
        radius,
    }
}

fn verify(config: &RunConfig, dir: &RunDir, manifest: &mut Manifest) -> Result<()> {
    let params = config.estimate_params();
    for estimate in config.estimates() {
        let t = Instant::now();
        let sweep = sweep_for(config, estimate, config.verify.m, config.verify.samples);
        let report = run_estimate(estimate, &sweep, &params)?;
        manifest.estimates.push(dir.write_estimate(&report)?);
        manifest
            .timings
            .insert(format!("{}_s", estimate.name()), t.elapsed().as_secs_f64());
        dir.write_manifest(manifest)?;
    }
    if manifest.estimates.iter().any(|e| !e.pass) {
        manifest.status = Status::CheckFailed;
    }
    Ok(())
}

fn check(name: &str, pass: bool, detail: String) -> CheckLine {
    CheckLine {
        name: name.to_owned(),
        pass,
        detail,
    }
}

fn estimate_line(report: &EstimateReport) -> CheckLine {
    check(
        &report.name,
        report.pass,
        format!(
            "worst ratio {:.6e} in [{:.6e}, {:.6e}]",
            report.worst_ratio, report.envelope_lower, report.envelope
        ),
    )
}

/// Reduced-size property suite: every estimate sweep, the operator round
/// trip, and two small solves.
pub fn selftest_checks() -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();

    let ens = Ensemble::new(SMOOTH_DECAY, 1);
    let worst = (0..20)
        .map(|i| {
            let f = ens.sample::<f64>(i, 32);
            let back = box_apply(&box_invert(&f)?);
            Ok((&back - &f).l2_norm() / f.l2_norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    lines.push(check("box_round_trip", worst < 1e-12, format!("relative error {worst:.3e}")));

    let params = EstimateParams::default();
    for estimate in Estimate::ALL {
        let sweep = Sweep {
            ensemble: Ensemble::new(estimate.default_decay(), 1),
            samples: 40,
            radius: 32,
        };
        lines.push(estimate_line(&run_estimate(estimate, &sweep, &params)?));
    }

    let sched = ContinuationSchedule {
        m: 8,
        beta_min: 0.125,
        ..ContinuationSchedule::default()
    };
    let opts = MultiStartOptions {
        l_max: 1,
        starts_per_level: 2,
        ..MultiStartOptions::default()
    };
    let linear = multi_start(&Nonlinearity::linear(0.5, vec![])?, &sched, &opts)?;
    lines.push(check(
        "linear_solve",
        linear.len() == 1 && linear[0].field().max_abs() < 1e-12,
        format!("{} branch(es)", linear.len()),
    ));
    let cubic = multi_start(&Nonlinearity::power(3.0, 1.0, 0.5)?, &sched, &opts)?;
    let worst = cubic.iter().map(|r| r.residual_norm).fold(0.0, f64::max);
    lines.push(check(
        "cubic_solve",
        !cubic.is_empty() && cubic.iter().all(|r| r.converged()),
        format!("{} branch(es), largest residual {worst:.3e}", cubic.len()),
    ));
    Ok(lines)
}

fn selftest(manifest: &mut Manifest) -> Result<()> {
    manifest.checks = selftest_checks()?;
    if manifest.checks.iter().any(|c| !c.pass) {
        manifest.status = Status::CheckFailed;
    }
    Ok(())
}
