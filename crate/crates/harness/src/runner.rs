//! Single runs and k-sweeps comparing a free-boundary model with a
//! fixed-domain reference started from the same `u0`.

use std::time::Instant;

use captension_core::disk_field::{gradient, sobolev_norm_vector, DiskGrid, VectorField};
use captension_core::dynamics::{solid_rotation, stream_velocity_field};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, InitialFlow};
use crate::error::{HarnessError, Result};
use crate::fit::{fit_rate, Fit};
use crate::models::{model, ModelOptions, Trajectory};

/// Diagnostics at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSample {
    pub time: f64,
    /// `||grad f||_s` for `s = 0, 1, 2`.
    pub nabla_f: [f64; 3],
    /// `||eta - zeta||_s` for `s = 0, 1`.
    pub eta_gap: [f64; 2],
    pub etadot_gap_h1: f64,
    pub energy: f64,
}

/// One CSV row: sups over the output times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub sup_nabla_f: [f64; 3],
    pub sup_eta_gap: [f64; 2],
    pub sup_etadot_gap_h1: f64,
    pub energy_drift: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub row: SweepRow,
    pub samples: Vec<OutputSample>,
    /// Time and message of the step that failed, if any.
    pub failure: Option<(f64, String)>,
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub wall_times: Vec<f64>,
    /// `(quantity, fit)` over the converged rows, only where a fit is possible.
    pub fits: Vec<(&'static str, Fit)>,
}

pub fn initial_velocity(cfg: &ExperimentConfig) -> Result<VectorField> {
    let g = DiskGrid::new(cfg.n_theta, cfg.n_r).map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(match cfg.initial_flow {
        InitialFlow::Stream => stream_velocity_field(&g, cfg.amplitude, cfg.stream_mode),
        InitialFlow::Rotation => solid_rotation(&g).scale(cfg.amplitude),
        InitialFlow::Rest => VectorField::zeros(&g),
    })
}

/// Output times `T j / n`, `n = ceil(T / cadence)`.
pub fn output_times(cfg: &ExperimentConfig) -> Vec<f64> {
    let n = (cfg.t_final / cfg.output_cadence).ceil().max(1.0) as usize;
    (0..=n).map(|j| cfg.t_final * j as f64 / n as f64).collect()
}

fn advance(run: &mut dyn Trajectory, target: f64) -> captension_core::Result<()> {
    let span = target - run.time();
    if span <= 0.0 {
        return Ok(());
    }
    let n = (span / run.max_step()).ceil().max(1.0) as usize;
    let dt = span / n as f64;
    for _ in 0..n {
        run.step(dt)?;
    }
    Ok(())
}

fn sample(a: &dyn Trajectory, b: &dyn Trajectory) -> captension_core::Result<OutputSample> {
    let (eta, etadot) = a.particle_map()?;
    let (zeta, zetadot) = b.particle_map()?;
    let gap = eta.displacement() - zeta.displacement();
    let nabla_f = match a.shape_potential() {
        Some(f) => {
            let g = gradient(f);
            [
                sobolev_norm_vector(&g, 0)?,
                sobolev_norm_vector(&g, 1)?,
                sobolev_norm_vector(&g, 2)?,
            ]
        }
        None => [0.0; 3],
    };
    Ok(OutputSample {
        time: a.time(),
        nabla_f,
        eta_gap: [sobolev_norm_vector(&gap, 0)?, sobolev_norm_vector(&gap, 1)?],
        etadot_gap_h1: sobolev_norm_vector(&(&etadot - &zetadot), 1)?,
        energy: a.energy()?,
    })
}

/// Integrates `model_a` and `model_b` from the configured `u0` at surface
/// tension `k`. Solver failures end the run early and flag the row.
pub fn run_pair(cfg: &ExperimentConfig, k: f64, model_a: &str, model_b: &str) -> Result<RunRecord> {
    let u0 = initial_velocity(cfg)?;
    let opts = ModelOptions {
        c_cfl: cfg.c_cfl,
        tol: cfg.tolerances,
    };
    let mut a = model(model_a)?.start(&u0, k, &opts);
    let mut b = model(model_b)?.start(&u0, k, &opts);
    let clock = Instant::now();
    let mut samples = Vec::new();
    let mut failure = None;
    for t in output_times(cfg) {
        let res = advance(a.as_mut(), t)
            .and_then(|_| advance(b.as_mut(), t))
            .and_then(|_| sample(a.as_ref(), b.as_ref()));
        match res {
            Ok(s) if s.energy.is_finite() && s.eta_gap[1].is_finite() => samples.push(s),
            Ok(_) => {
                failure = Some((t, "non-finite diagnostics".to_string()));
                break;
            }
            Err(e) => {
                failure = Some((a.time().min(b.time()), e.to_string()));
                break;
            }
        }
    }
    let sup = |f: &dyn Fn(&OutputSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let e0 = samples.first().map_or(0.0, |s| s.energy);
    let scale = if e0.abs() > 0.0 { e0.abs() } else { 1.0 };
    let row = SweepRow {
        k,
        sup_nabla_f: [0, 1, 2].map(|i| sup(&|s| s.nabla_f[i])),
        sup_eta_gap: [0, 1].map(|i| sup(&|s| s.eta_gap[i])),
        sup_etadot_gap_h1: sup(&|s| s.etadot_gap_h1),
        energy_drift: sup(&|s| (s.energy - e0).abs() / scale),
        converged: failure.is_none(),
    };
    Ok(RunRecord {
        row,
        samples,
        failure,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

/// The configured free-boundary model against the configured reference.
pub fn run_single(cfg: &ExperimentConfig, k: f64) -> Result<RunRecord> {
    run_pair(cfg, k, &cfg.free_boundary_model, &cfg.reference_model)
}

/// Worker count from `CAPTENSION_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("CAPTENSION_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let mut records = pool.install(|| {
        cfg.k_list
            .par_iter()
            .map(|&k| run_single(cfg, k))
            .collect::<Result<Vec<_>>>()
    })?;
    records.sort_by(|a, b| a.row.k.total_cmp(&b.row.k));
    let rows: Vec<SweepRow> = records.iter().map(|r| r.row).collect();
    Ok(SweepResult {
        fits: fit_rows(&rows),
        wall_times: records.iter().map(|r| r.wall_time).collect(),
        rows,
    })
}

pub const FIT_QUANTITIES: [&str; 5] = [
    "sup_nabla_f_L2",
    "sup_nabla_f_H1",
    "sup_nabla_f_H2",
    "sup_eta_gap_H1",
    "sup_etadot_gap_H1",
];

pub fn quantity(row: &SweepRow, name: &str) -> f64 {
    match name {
        "sup_nabla_f_L2" => row.sup_nabla_f[0],
        "sup_nabla_f_H1" => row.sup_nabla_f[1],
        "sup_nabla_f_H2" => row.sup_nabla_f[2],
        "sup_eta_gap_L2" => row.sup_eta_gap[0],
        "sup_eta_gap_H1" => row.sup_eta_gap[1],
        "sup_etadot_gap_H1" => row.sup_etadot_gap_h1,
        "energy_drift" => row.energy_drift,
        _ => f64::NAN,
    }
}

/// Decay exponents over converged rows; quantities that cannot be fitted
/// (too few rows, zero values) are left out.
pub fn fit_rows(rows: &[SweepRow]) -> Vec<(&'static str, Fit)> {
    FIT_QUANTITIES
        .iter()
        .filter_map(|&q| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.converged)
                .map(|r| (r.k, quantity(r, q)))
                .collect();
            fit_rate(&pts).ok().map(|f| (q, f))
        })
        .collect()
}
