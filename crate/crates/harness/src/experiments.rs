//! Property and oracle checks at the reference resolution, shared by
//! `selftest` and the acceptance suite.

use std::f64::consts::PI;
use std::sync::Arc;

use captension_core::disk_field::{
    divergence, jacobian_det, restrict_boundary, sobolev_norm_boundary, sobolev_norm_vector,
    BoundaryFunction, DiskGrid, DiskMap, MapKind, ScalarField, VectorField,
};
use captension_core::dynamics::{
    dt_max, reconstruct_eta, step_fixed_euler_with, step_free_boundary, stream_function,
    solid_rotation, EulerZ, FixedEulerState, FreeBoundaryState, StepOptions,
    VorticityState,
};
use captension_core::projections::{hodge_p, hodge_q};
use captension_core::shape::{curvature_exact, curvature_expansion, solve_volume_constraint, VolumePotential};
use captension_core::disk_field::{laplacian, rotated_gradient};
use captension_core::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::csv_string;
use crate::runner::{run_pair, run_sweep, SweepResult};

pub const N_THETA: usize = 32;
pub const N_R: usize = 16;
pub const T_FINAL: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn grid() -> Arc<DiskGrid> {
    DiskGrid::new(N_THETA, N_R).expect("reference grid")
}

/// Random boundary data with decaying spectrum, `H^{5/2}` norm in `(0.2, 1) bound`.
pub fn random_admissible(g: &DiskGrid, rng: &mut ChaCha8Rng, bound: f64) -> BoundaryFunction {
    let mut cos = vec![0.0; 7];
    let mut sin = vec![0.0; 7];
    for m in 1..7 {
        cos[m] = rng.gen_range(-1.0..1.0) / (m * m * m) as f64;
        sin[m] = rng.gen_range(-1.0..1.0) / (m * m * m) as f64;
    }
    let h = BoundaryFunction::from_trig(g.n_theta(), &cos, &sin);
    let n = sobolev_norm_boundary(&h, 2.5);
    h.scale(bound * rng.gen_range(0.2..1.0) / n)
}

fn random_poly(g: &Arc<DiskGrid>, rng: &mut ChaCha8Rng) -> ScalarField {
    let c: Vec<f64> = (0..21).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_fn(g, |x, y| {
        let mut s = 0.0;
        let mut i = 0;
        for d in 0..6 {
            for a in 0..=d {
                s += c[i] * x.powi(a) * y.powi(d - a);
                i += 1;
            }
        }
        s
    })
}

fn admissible_set(g: &Arc<DiskGrid>, seed: u64, tol: &Tolerances) -> Vec<BoundaryFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20).map(|_| random_admissible(g, &mut rng, tol.delta0 / 2.0)).collect()
}

pub fn volume_constraint(seed: u64) -> Check {
    let g = grid();
    let tol = Tolerances::default();
    let (mut worst_j, mut worst_trace) = (0.0f64, 0.0f64);
    for h in admissible_set(&g, seed, &tol) {
        match solve_volume_constraint(&g, &h, &tol) {
            Ok(p) => {
                worst_j = worst_j.max(jacobian_det(&p.map()).map(|v| v - 1.0).max_abs());
                worst_trace = worst_trace.max((&restrict_boundary(&p.f) - &h).max_abs(&g));
            }
            Err(e) => return Check::new("volume constraint", false, format!("solver failed: {e}")),
        }
    }
    Check::new(
        "volume constraint",
        worst_j < 1e-7 && worst_trace < 1e-10,
        format!("20 random h: max |J-1| = {worst_j:.2e}, max trace error = {worst_trace:.2e}"),
    )
}

pub fn projection_algebra(seed: u64) -> Check {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 6];
    for _ in 0..100 {
        let w = VectorField::new(random_poly(&g, &mut rng), random_poly(&g, &mut rng)).expect("same grid");
        let scale = w.l2_norm().max(1.0);
        let q = hodge_q(&w);
        let p = hodge_p(&w);
        let e = [
            (&(&p + &q) - &w).l2_norm(),
            (&hodge_p(&p) - &p).l2_norm(),
            (&hodge_q(&q) - &q).l2_norm(),
            p.dot(&q).abs() / scale,
            divergence(&p).l2_norm(),
            p.normal_component().iter().fold(0.0, |m, v| m.max(v.abs())),
        ];
        for (a, b) in worst.iter_mut().zip(e) {
            *a = a.max(b / scale);
        }
    }
    let names = ["P+Q-I", "P^2-P", "Q^2-Q", "<Pw,Qw>", "div Pw", "Pw.nu"];
    let detail = names
        .iter()
        .zip(&worst)
        .map(|(n, v)| format!("{n} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Check::new("projection algebra", worst.iter().all(|v| *v < 1e-8), format!("100 fields: {detail}"))
}

fn curvature_gap(p: &VolumePotential) -> captension_core::Result<f64> {
    let g = p.grid();
    let e = curvature_expansion(p)?;
    let k = curvature_exact(p)?.samples(g);
    Ok(e.m5.samples(g).iter().zip(&k).map(|(a, b)| (a + 1.0 - b).abs()).fold(0.0, f64::max))
}

pub fn curvature(seed: u64) -> Check {
    let g = grid();
    let tol = Tolerances::default();
    let run = || -> captension_core::Result<(f64, f64)> {
        let mut worst = 0.0f64;
        for h in admissible_set(&g, seed, &tol) {
            worst = worst.max(curvature_gap(&solve_volume_constraint(&g, &h, &tol)?)?);
        }
        let mut circle = 0.0f64;
        for h in [
            BoundaryFunction::zeros(N_THETA),
            BoundaryFunction::from_trig(N_THETA, &[0.0, 0.01], &[0.0, -0.005]),
        ] {
            let p = solve_volume_constraint(&g, &h, &tol)?;
            let k = curvature_exact(&p)?.samples(&g);
            let m5 = curvature_expansion(&p)?.m5.samples(&g);
            for (a, b) in k.iter().zip(&m5) {
                circle = circle.max((a - 1.0).abs()).max(b.abs());
            }
        }
        Ok((worst, circle))
    };
    match run() {
        Ok((worst, circle)) => Check::new(
            "curvature exactness",
            worst < 1e-9 && circle < 1e-10,
            format!("max |M5+1-curvature| = {worst:.2e}; circle and translated circle: max |curvature-1|, |M5| = {circle:.2e}"),
        ),
        Err(e) => Check::new("curvature exactness", false, format!("failed: {e}")),
    }
}

fn steps_to(t: f64, k: f64) -> (usize, f64) {
    let n = (t / dt_max(k, N_THETA, 0.5)).ceil() as usize;
    (n, t / n as f64)
}

pub fn equilibrium_and_rotation() -> Check {
    let g = grid();
    let opts = StepOptions::default();
    let run = || -> captension_core::Result<(f64, f64, f64)> {
        let rest = FreeBoundaryState::at_rest(&g, 100.0);
        let (_, dt) = steps_to(T_FINAL, 100.0);
        let mut s = rest.clone();
        let mut rest_move = 0.0f64;
        for _ in 0..5 {
            let next = step_free_boundary(&s, dt, &opts)?;
            rest_move = rest_move
                .max((&next.f - &s.f).max_abs())
                .max((&next.fdot - &s.fdot).max_abs())
                .max((&next.v - &s.v).max_abs())
                .max((next.beta.displacement() - s.beta.displacement()).max_abs());
            s = next;
        }
        let (mut grad_f, mut rot_err) = (0.0f64, 0.0f64);
        for k in [10.0, 1000.0] {
            let (n, dt) = steps_to(T_FINAL, k);
            let mut s = FreeBoundaryState::initial(&solid_rotation(&g), k);
            for _ in 0..n {
                s = step_free_boundary(&s, dt, &opts)?;
                grad_f = grad_f.max(sobolev_norm_vector(&captension_core::disk_field::gradient(&s.f), 0)?);
            }
            let (eta, _) = reconstruct_eta(&s)?;
            let exact = DiskMap::rotation(&g, T_FINAL);
            rot_err = rot_err.max((eta.displacement() - exact.displacement()).max_abs());
        }
        Ok((rest_move, grad_f, rot_err))
    };
    match run() {
        Ok((rest, grad_f, rot)) => Check::new(
            "equilibrium and rigid rotation",
            rest < 1e-12 && grad_f < 1e-7 && rot < 1e-6,
            format!(
                "rest change per step {rest:.1e}; rotation k in {{10, 1000}}: sup ||grad f||_0 = {grad_f:.1e}, map error at T = {rot:.1e}"
            ),
        ),
        Err(e) => Check::new("equilibrium and rigid rotation", false, format!("failed: {e}")),
    }
}

pub fn energy_conservation() -> Check {
    let cfg = ExperimentConfig {
        k_list: vec![100.0],
        ..ExperimentConfig::default()
    };
    match run_pair(&cfg, 100.0, "split", "fixed-euler") {
        Ok(r) => Check::new(
            "energy conservation",
            r.row.converged && r.row.energy_drift < 1e-4,
            format!("mode-2 stream, k = 100: relative drift {:.2e}", r.row.energy_drift),
        ),
        Err(e) => Check::new("energy conservation", false, format!("failed: {e}")),
    }
}

/// `H^1` gaps between the Lagrangian `Z` flow and the vorticity oracle's
/// particle map at `T`, for `steps` uniform steps each.
pub fn particle_map_gaps(step_counts: &[usize]) -> captension_core::Result<Vec<f64>> {
    let g = grid();
    let psi = stream_function(&g, 0.5, 2);
    let omega = laplacian(&psi);
    step_counts
        .iter()
        .map(|&n| {
            let dt = T_FINAL / n as f64;
            let z = EulerZ::new();
            let mut fe = FixedEulerState::initial(&rotated_gradient(&psi));
            let mut vs = VorticityState::with_node_particles(omega.clone());
            for _ in 0..n {
                fe = step_fixed_euler_with(&z, &fe, dt)?;
                vs = vs.step(dt)?;
            }
            let pm = DiskMap::from_points(&g, &vs.particles, MapKind::Embedding);
            sobolev_norm_vector(&(pm.displacement() - fe.zeta.displacement()), 1)
        })
        .collect()
}

pub fn fixed_domain_cross_check() -> Check {
    match particle_map_gaps(&[1, 2, 4]) {
        Ok(gaps) => {
            let orders: Vec<f64> = gaps.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
            Check::new(
                "fixed-domain cross-check",
                gaps[gaps.len() - 1] < 1e-3 && orders.iter().all(|o| *o >= 2.0),
                format!(
                    "H1 gaps at dt = T/1, T/2, T/4: {}; observed orders {}",
                    gaps.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(", "),
                    orders.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(", ")
                ),
            )
        }
        Err(e) => Check::new("fixed-domain cross-check", false, format!("failed: {e}")),
    }
}

/// Angular frequency from the first two zero crossings of a sampled signal.
pub fn crossing_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    let mut crossings = Vec::new();
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        if a != 0.0 && a.signum() != b.signum() {
            crossings.push(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
        }
    }
    (crossings.len() >= 2).then(|| PI / (crossings[1] - crossings[0]))
}

/// Linearized boundary mode `a'' = -k m (m^2 - 1) a`, integrated by RK4 on
/// the same steps as the full solver.
pub fn linear_mode_oracle(k: f64, m: u32, a0: f64, dt: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = m as f64;
    let c = k * m * (m * m - 1.0);
    let rhs = |a: f64, b: f64| (b, -c * a);
    let (mut a, mut b) = (a0, 0.0);
    let mut ts = vec![0.0];
    let mut vs = vec![a];
    for i in 0..n {
        let k1 = rhs(a, b);
        let k2 = rhs(a + 0.5 * dt * k1.0, b + 0.5 * dt * k1.1);
        let k3 = rhs(a + 0.5 * dt * k2.0, b + 0.5 * dt * k2.1);
        let k4 = rhs(a + dt * k3.0, b + dt * k3.1);
        a += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        b += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        ts.push((i + 1) as f64 * dt);
        vs.push(a);
    }
    (ts, vs)
}

/// Measured, oracle and closed-form frequencies of boundary mode `m`.
pub fn dispersion_frequencies(k: f64, m: u32, amplitude: f64) -> captension_core::Result<(f64, f64, f64)> {
    let g = grid();
    let mut cos = vec![0.0; m as usize + 1];
    cos[m as usize] = amplitude;
    let h = BoundaryFunction::from_trig(N_THETA, &cos, &[]);
    let mut s = FreeBoundaryState::from_shape(&g, &h, k, &Tolerances::default())?;
    let predicted = (k * (m * (m * m - 1)) as f64).sqrt();
    // long enough for two zero crossings
    let (n, dt) = steps_to(1.6 * PI / predicted, k);
    let mode = |s: &FreeBoundaryState| restrict_boundary(&s.f).coefficients()[m as usize].re;
    let mut ts = vec![0.0];
    let mut vs = vec![mode(&s)];
    for _ in 0..n {
        s = step_free_boundary(&s, dt, &StepOptions::default())?;
        ts.push(s.time);
        vs.push(mode(&s));
    }
    let (ots, ovs) = linear_mode_oracle(k, m, amplitude, dt, n);
    Ok((
        crossing_frequency(&ts, &vs).unwrap_or(f64::NAN),
        crossing_frequency(&ots, &ovs).unwrap_or(f64::NAN),
        predicted,
    ))
}

pub fn capillary_dispersion() -> Check {
    let mut passed = true;
    let mut parts = Vec::new();
    for m in [2, 3] {
        match dispersion_frequencies(400.0, m, 1e-4) {
            Ok((meas, ode, pred)) => {
                let rel = (meas - pred).abs() / pred;
                let ode_rel = (ode - pred).abs() / pred;
                passed &= rel < 0.05 && ode_rel < 0.05 && (meas - ode).abs() / ode < 0.05;
                parts.push(format!(
                    "m={m}: measured {meas:.3}, ODE oracle {ode:.3}, sqrt(k m(m^2-1)) {pred:.3} (rel {rel:.1e})"
                ));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("m={m}: failed: {e}"));
            }
        }
    }
    Check::new("capillary dispersion", passed, parts.join("; "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Judges a sweep over increasing `k`.
pub fn judge_sweep(res: &SweepResult) -> Check {
    let col = |f: &dyn Fn(&crate::runner::SweepRow) -> f64| res.rows.iter().map(f).collect::<Vec<_>>();
    let nf = col(&|r| r.sup_nabla_f[0]);
    let eg = col(&|r| r.sup_eta_gap[1]);
    let ed = col(&|r| r.sup_etadot_gap_h1);
    let fit = res.fits.iter().find(|(q, _)| *q == "sup_nabla_f_L2").map(|(_, f)| *f);
    let all_conv = res.rows.iter().all(|r| r.converged);
    let mono = strictly_decreasing(&nf) && strictly_decreasing(&eg) && strictly_decreasing(&ed);
    let fit_ok = fit.is_some_and(|f| f.slope >= 1.0 && f.r2 >= 0.9);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    let eta_fit = res.fits.iter().find(|(q, _)| *q == "sup_eta_gap_H1").map(|(_, f)| *f);
    Check::new(
        "decay in k",
        all_conv && mono && fit_ok,
        format!(
            "sup||grad f||_0 [{}]; sup||eta-zeta||_1 [{}]; sup||etadot-zetadot||_1 [{}]; exponent of ||grad f||_0 = {} (r2 {}); exponent of ||eta-zeta||_1 = {}",
            fmt(&nf),
            fmt(&eg),
            fmt(&ed),
            fit.map_or("n/a".into(), |f| format!("{:.4}", f.slope)),
            fit.map_or("n/a".into(), |f| format!("{:.4}", f.r2)),
            eta_fit.map_or("n/a".into(), |f| format!("{:.4}", f.slope)),
        ),
    )
}

pub fn reference_sweep_config() -> ExperimentConfig {
    ExperimentConfig::default()
}

pub fn decay_sweep() -> (Check, Option<SweepResult>) {
    match run_sweep(&reference_sweep_config()) {
        Ok(res) => (judge_sweep(&res), Some(res)),
        Err(e) => (Check::new("decay in k", false, format!("failed: {e}")), None),
    }
}

/// One row of the arbitration table: `model` against the unsplit law.
#[derive(Debug, Clone)]
pub struct OracleGap {
    pub model: &'static str,
    pub k: f64,
    pub sup_eta_gap_h1: f64,
    pub sup_etadot_gap_h1: f64,
    pub converged: bool,
}

pub fn oracle_compare(cfg: &ExperimentConfig) -> Result<Vec<OracleGap>> {
    let mut out = Vec::new();
    for model in ["split", "split-as-printed"] {
        for &k in &cfg.k_list {
            let r = run_pair(cfg, k, model, "unsplit-lagrangian")?;
            out.push(OracleGap {
                model,
                k,
                sup_eta_gap_h1: r.row.sup_eta_gap[1],
                sup_etadot_gap_h1: r.row.sup_etadot_gap_h1,
                converged: r.row.converged,
            });
        }
    }
    Ok(out)
}

pub fn arbitration_config() -> ExperimentConfig {
    ExperimentConfig {
        t_final: 0.05,
        k_list: vec![100.0],
        ..ExperimentConfig::default()
    }
}

pub fn arbitration() -> Check {
    match oracle_compare(&arbitration_config()) {
        Ok(rows) => {
            let split = rows.iter().find(|r| r.model == "split").expect("split row");
            let detail = rows
                .iter()
                .map(|r| {
                    format!(
                        "{} vs unsplit: sup||eta gap||_1 {:.2e}, sup||etadot gap||_1 {:.2e}{}",
                        r.model,
                        r.sup_eta_gap_h1,
                        r.sup_etadot_gap_h1,
                        if r.converged { "" } else { " (aborted)" }
                    )
                })
                .collect::<Vec<_>>()
                .join("; ");
            Check::new("arbitration oracle", split.converged && split.sup_eta_gap_h1 < 1e-2, detail)
        }
        Err(e) => Check::new("arbitration oracle", false, format!("failed: {e}")),
    }
}

/// Repeats a sweep and compares the CSV text byte for byte.
pub fn determinism(first: Option<&SweepResult>) -> Check {
    let cfg = reference_sweep_config();
    let a = match first {
        Some(r) => csv_string(&r.rows),
        None => match run_sweep(&cfg) {
            Ok(r) => csv_string(&r.rows),
            Err(e) => return Check::new("determinism", false, format!("failed: {e}")),
        },
    };
    match run_sweep(&cfg) {
        Ok(r) => {
            let b = csv_string(&r.rows);
            Check::new("determinism", a == b, format!("{} bytes, identical: {}", a.len(), a == b))
        }
        Err(e) => Check::new("determinism", false, format!("failed: {e}")),
    }
}

/// Every check, in order.
pub fn all(seed: u64) -> Vec<Check> {
    let (sweep, res) = decay_sweep();
    vec![
        volume_constraint(seed),
        projection_algebra(seed),
        curvature(seed),
        equilibrium_and_rotation(),
        energy_conservation(),
        fixed_domain_cross_check(),
        capillary_dispersion(),
        sweep,
        arbitration(),
        determinism(res.as_ref()),
    ]
}
