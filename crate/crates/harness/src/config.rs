//! Flat `key = value` experiment configuration.

use std::path::{Path, PathBuf};

use captension_core::Tolerances;

use crate::error::{HarnessError, Result};

/// Initial velocity of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialFlow {
    /// `psi0 = amplitude (1 - r^2)^2 r^m cos(m theta)`.
    Stream,
    /// Solid rotation `(-y, x)`; `amplitude` scales it.
    Rotation,
    Rest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_theta: usize,
    pub n_r: usize,
    pub t_final: f64,
    pub c_cfl: f64,
    pub k_list: Vec<f64>,
    pub initial_flow: InitialFlow,
    pub stream_mode: u32,
    pub amplitude: f64,
    /// Spacing of the output times the sup over `t` is taken on.
    pub output_cadence: f64,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub free_boundary_model: String,
    pub reference_model: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_theta: 32,
            n_r: 16,
            t_final: 0.1,
            c_cfl: 0.5,
            k_list: vec![100.0, 200.0, 400.0, 800.0],
            initial_flow: InitialFlow::Stream,
            stream_mode: 2,
            amplitude: 0.05,
            output_cadence: 0.0025,
            tolerances: Tolerances::default(),
            out_dir: PathBuf::from("out"),
            seed: 7,
            free_boundary_model: "split".into(),
            reference_model: "fixed-euler".into(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| HarnessError::ConfigLine {
        line,
        msg: format!("bad value `{v}` for `{key}`"),
    })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses config text on top of the defaults; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| HarnessError::ConfigLine {
                line,
                msg: "expected `key = value`".into(),
            })?;
            let (key, v) = (key.trim(), value.trim());
            let t = &mut c.tolerances;
            match key {
                "n_theta" => c.n_theta = num(key, v, line)?,
                "n_r" => c.n_r = num(key, v, line)?,
                "t_final" | "T" => c.t_final = num(key, v, line)?,
                "c_cfl" => c.c_cfl = num(key, v, line)?,
                "k_list" => {
                    c.k_list = v
                        .split(',')
                        .map(|s| num(key, s.trim(), line))
                        .collect::<Result<_>>()?
                }
                "initial_flow" => {
                    c.initial_flow = match v {
                        "stream" => InitialFlow::Stream,
                        "rotation" => InitialFlow::Rotation,
                        "rest" => InitialFlow::Rest,
                        _ => {
                            return Err(HarnessError::ConfigLine {
                                line,
                                msg: format!("unknown initial_flow `{v}`"),
                            })
                        }
                    }
                }
                "stream_mode" => c.stream_mode = num(key, v, line)?,
                "amplitude" => c.amplitude = num(key, v, line)?,
                "output_cadence" => c.output_cadence = num(key, v, line)?,
                "tol_ell" => t.tol_ell = num(key, v, line)?,
                "tol_vol" => t.tol_vol = num(key, v, line)?,
                "tol_l1" => t.tol_l1 = num(key, v, line)?,
                "delta0" => t.delta0 = num(key, v, line)?,
                "out_dir" => c.out_dir = PathBuf::from(v),
                "seed" => c.seed = num(key, v, line)?,
                "free_boundary_model" => c.free_boundary_model = v.to_string(),
                "reference_model" => c.reference_model = v.to_string(),
                _ => {
                    return Err(HarnessError::ConfigLine {
                        line,
                        msg: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if !(self.t_final > 0.0) {
            return bad("t_final must be positive");
        }
        if !(self.c_cfl > 0.0) {
            return bad("c_cfl must be positive");
        }
        if !(self.output_cadence > 0.0) {
            return bad("output_cadence must be positive");
        }
        if self.k_list.is_empty() || self.k_list.iter().any(|k| !(*k > 0.0)) {
            return bad("k_list must be non-empty and positive");
        }
        if self.k_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad("k_list must be strictly increasing");
        }
        if !self.amplitude.is_finite() || self.stream_mode == 0 {
            return bad("stream needs a finite amplitude and mode >= 1");
        }
        captension_core::disk_field::DiskGrid::new(self.n_theta, self.n_r)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        crate::models::model(&self.free_boundary_model)?;
        crate::models::model(&self.reference_model)?;
        Ok(())
    }
}
