//! Run configuration and its line-based file format.
//!
//! The format is `key = value` lines with `#` comments; `[section]` headers
//! are accepted as visual grouping and do not scope the keys (all keys are
//! globally unique). An empty file yields the full defaults of the growing
//! circle scenario at ε = 1/8, M = 10⁷, θ = 0.004. Configurations round-trip
//! losslessly through [`RunConfig::to_text`] / [`parse_config`].

use std::path::PathBuf;

use crate::flow::{FlowParams, StopRule};
use crate::grid::{BoundaryMode, Grid2};
use crate::scenarios::{ScenarioConfig, ScenarioKind};
use crate::shapes::ShapeSpec;
use crate::{Error, Result};

/// Environment variable overriding `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "WILLMORE2D_OUT";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopMode {
    Time,
    Stationarity,
}

/// Everything a `run` invocation needs, flat and file-backed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub output_dir: PathBuf,
    pub deterministic: bool,
    pub threads: usize,
    pub report_interval: usize,
    /// Field snapshots every this many reports; 0 disables them.
    pub snapshot_interval: usize,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub lx: f64,
    pub ly: f64,
    pub bc: BoundaryMode,
    pub epsilon: f64,
    pub tau: f64,
    pub m_penalty: f64,
    pub theta: f64,
    pub penalty_exponent: u32,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    pub stationarity_tol: f64,
    pub stop_mode: StopMode,
    pub t_end: f64,
    pub max_steps: u64,
    pub circle_center: (f64, f64),
    pub circle_radius: f64,
    pub circle2_center: (f64, f64),
    pub circle2_radius: f64,
    pub ellipse_semi_axes: (f64, f64),
    pub array_count: usize,
    pub array_spacing: f64,
    pub array_radius: f64,
    pub piriform_a: f64,
    pub piriform_b: f64,
    pub cusp_offset: f64,
    pub inclusion_radius: f64,
    pub adhesion_weight: f64,
    pub confinement_strength: f64,
    pub volume_strength: f64,
    pub fidelity_scale: f64,
    pub eps_list: Vec<f64>,
    pub gs_direction: (f64, f64),
    pub gs_offset: f64,
}

impl RunConfig {
    /// Defaults for a scenario, mirroring [`ScenarioConfig::defaults`].
    pub fn for_scenario(kind: ScenarioKind) -> Self {
        let sc = ScenarioConfig::defaults(kind);
        let (t_end, stop_mode, max_time) = match sc.stop {
            StopRule::Time(t) => (t, StopMode::Time, t),
            StopRule::Stationarity { max_time } => (max_time, StopMode::Stationarity, max_time),
        };
        let _ = max_time;
        let mut cfg = RunConfig {
            scenario: kind,
            output_dir: PathBuf::from("out"),
            deterministic: true,
            threads: 1,
            report_interval: sc.report_interval,
            snapshot_interval: 0,
            nx: sc.grid.nx(),
            ny: sc.grid.ny(),
            x0: sc.grid.x0(),
            y0: sc.grid.y0(),
            lx: sc.grid.lx(),
            ly: sc.grid.ly(),
            bc: sc.grid.bc(),
            epsilon: sc.flow.epsilon,
            tau: sc.flow.tau,
            m_penalty: sc.flow.m_penalty,
            theta: sc.flow.theta,
            penalty_exponent: sc.flow.penalty_exponent,
            solver_tol: sc.flow.solver_tol,
            solver_max_iter: sc.flow.solver_max_iter,
            stationarity_tol: sc.flow.stationarity_tol,
            stop_mode,
            t_end,
            max_steps: sc.max_steps,
            circle_center: (0.5, 0.5),
            circle_radius: 0.25,
            circle2_center: (0.7, 0.5),
            circle2_radius: 0.18,
            ellipse_semi_axes: (0.85, 1.4),
            array_count: 3,
            array_spacing: 0.25,
            array_radius: 0.08,
            piriform_a: 0.18,
            piriform_b: 0.18,
            cusp_offset: 0.07,
            inclusion_radius: 0.15,
            adhesion_weight: sc.adhesion_weight,
            confinement_strength: sc.confinement_strength,
            volume_strength: sc.volume_strength,
            fidelity_scale: sc.fidelity_scale,
            eps_list: sc.eps_list,
            gs_direction: sc.gs_direction,
            gs_offset: sc.gs_offset,
        };
        // keep shape-specific defaults in sync with the scenario table
        match &sc.shape {
            ShapeSpec::Circle { center, radius } => {
                cfg.circle_center = *center;
                cfg.circle_radius = *radius;
            }
            ShapeSpec::TwoCircles { c1, r1, c2, r2 } => {
                cfg.circle_center = *c1;
                cfg.circle_radius = *r1;
                cfg.circle2_center = *c2;
                cfg.circle2_radius = *r2;
            }
            ShapeSpec::Ellipse { semi_axes, .. } => cfg.ellipse_semi_axes = *semi_axes,
            ShapeSpec::CircleArray {
                spacing,
                count,
                radius,
                ..
            } => {
                cfg.array_spacing = *spacing;
                cfg.array_count = *count;
                cfg.array_radius = *radius;
            }
            _ => {}
        }
        cfg
    }

    /// Resolves the typed scenario setup this configuration describes.
    pub fn to_scenario(&self) -> Result<ScenarioConfig> {
        let grid = Grid2::new(self.nx, self.ny, self.x0, self.y0, self.lx, self.ly, self.bc)?;
        let flow = FlowParams {
            epsilon: self.epsilon,
            tau: self.tau,
            m_penalty: self.m_penalty,
            theta: self.theta,
            penalty_exponent: self.penalty_exponent,
            solver_tol: self.solver_tol,
            solver_max_iter: self.solver_max_iter,
            bc: self.bc,
            stationarity_tol: self.stationarity_tol,
        };
        flow.validate()?;
        let mut sc = ScenarioConfig::defaults(self.scenario);
        let domain_center = (self.x0 + 0.5 * self.lx, self.y0 + 0.5 * self.ly);
        sc.grid = grid;
        sc.flow = flow;
        sc.stop = match self.stop_mode {
            StopMode::Time => StopRule::Time(self.t_end),
            StopMode::Stationarity => StopRule::Stationarity {
                max_time: self.t_end,
            },
        };
        sc.max_steps = self.max_steps;
        sc.report_interval = self.report_interval;
        sc.adhesion_weight = self.adhesion_weight;
        sc.confinement_strength = self.confinement_strength;
        sc.volume_strength = self.volume_strength;
        sc.fidelity_scale = self.fidelity_scale;
        sc.eps_list = self.eps_list.clone();
        sc.gs_direction = self.gs_direction;
        sc.gs_offset = self.gs_offset;
        sc.shape = match self.scenario {
            ScenarioKind::CollidingCircles => ShapeSpec::TwoCircles {
                c1: self.circle_center,
                r1: self.circle_radius,
                c2: self.circle2_center,
                r2: self.circle2_radius,
            },
            ScenarioKind::CircleArray => ShapeSpec::CircleArray {
                first: (
                    domain_center.0 - 0.5 * (self.array_count - 1) as f64 * self.array_spacing,
                    domain_center.1 - 0.5 * (self.array_count - 1) as f64 * self.array_spacing,
                ),
                spacing: self.array_spacing,
                count: self.array_count,
                radius: self.array_radius,
            },
            ScenarioKind::LiJeGraph => ShapeSpec::Ellipse {
                center: domain_center,
                semi_axes: self.ellipse_semi_axes,
            },
            _ => ShapeSpec::Circle {
                center: self.circle_center,
                radius: self.circle_radius,
            },
        };
        if matches!(
            self.scenario,
            ScenarioKind::CloverleafStandard
                | ScenarioKind::CloverleafModified
                | ScenarioKind::CloverleafTwoComponent
        ) {
            sc.fidelity_shape = Some(ShapeSpec::CloverLeaf {
                center: domain_center,
                a: self.piriform_a,
                b: self.piriform_b,
                cusp_offset: self.cusp_offset,
            });
        }
        if self.scenario == ScenarioKind::Adhesion {
            sc.inclusion = Some(ShapeSpec::Circle {
                center: domain_center,
                radius: self.inclusion_radius,
            });
        }
        if self.scenario == ScenarioKind::LiJeGraph && self.bc != BoundaryMode::Periodic {
            return Err(Error::Grid(
                "the lije scenario requires periodic boundaries".into(),
            ));
        }
        Ok(sc)
    }

    /// Canonical text form; `parse_config(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        s.push_str("[run]\n");
        kv(&mut s, "scenario", self.scenario.name().into());
        kv(&mut s, "output_dir", self.output_dir.display().to_string());
        kv(&mut s, "deterministic", self.deterministic.to_string());
        kv(&mut s, "threads", self.threads.to_string());
        kv(&mut s, "report_interval", self.report_interval.to_string());
        kv(&mut s, "snapshot_interval", self.snapshot_interval.to_string());
        s.push_str("\n[grid]\n");
        kv(&mut s, "nx", self.nx.to_string());
        kv(&mut s, "ny", self.ny.to_string());
        kv(&mut s, "x0", format!("{}", self.x0));
        kv(&mut s, "y0", format!("{}", self.y0));
        kv(&mut s, "lx", format!("{}", self.lx));
        kv(&mut s, "ly", format!("{}", self.ly));
        kv(&mut s, "bc", self.bc.name().into());
        s.push_str("\n[flow]\n");
        kv(&mut s, "epsilon", format!("{}", self.epsilon));
        kv(&mut s, "tau", format!("{}", self.tau));
        kv(&mut s, "m_penalty", format!("{}", self.m_penalty));
        kv(&mut s, "theta", format!("{}", self.theta));
        kv(&mut s, "penalty_exponent", self.penalty_exponent.to_string());
        kv(&mut s, "solver_tol", format!("{}", self.solver_tol));
        kv(&mut s, "solver_max_iter", self.solver_max_iter.to_string());
        kv(&mut s, "stationarity_tol", format!("{}", self.stationarity_tol));
        s.push_str("\n[stop]\n");
        kv(
            &mut s,
            "stop",
            match self.stop_mode {
                StopMode::Time => "time".into(),
                StopMode::Stationarity => "stationarity".into(),
            },
        );
        kv(&mut s, "t_end", format!("{}", self.t_end));
        kv(&mut s, "max_steps", self.max_steps.to_string());
        s.push_str("\n[shape]\n");
        kv(&mut s, "circle_cx", format!("{}", self.circle_center.0));
        kv(&mut s, "circle_cy", format!("{}", self.circle_center.1));
        kv(&mut s, "circle_radius", format!("{}", self.circle_radius));
        kv(&mut s, "circle2_cx", format!("{}", self.circle2_center.0));
        kv(&mut s, "circle2_cy", format!("{}", self.circle2_center.1));
        kv(&mut s, "circle2_radius", format!("{}", self.circle2_radius));
        kv(&mut s, "ellipse_ax", format!("{}", self.ellipse_semi_axes.0));
        kv(&mut s, "ellipse_ay", format!("{}", self.ellipse_semi_axes.1));
        kv(&mut s, "array_count", self.array_count.to_string());
        kv(&mut s, "array_spacing", format!("{}", self.array_spacing));
        kv(&mut s, "array_radius", format!("{}", self.array_radius));
        kv(&mut s, "piriform_a", format!("{}", self.piriform_a));
        kv(&mut s, "piriform_b", format!("{}", self.piriform_b));
        kv(&mut s, "cusp_offset", format!("{}", self.cusp_offset));
        kv(&mut s, "inclusion_radius", format!("{}", self.inclusion_radius));
        s.push_str("\n[forces]\n");
        kv(&mut s, "adhesion_weight", format!("{}", self.adhesion_weight));
        kv(
            &mut s,
            "confinement_strength",
            format!("{}", self.confinement_strength),
        );
        kv(&mut s, "volume_strength", format!("{}", self.volume_strength));
        kv(&mut s, "fidelity_scale", format!("{}", self.fidelity_scale));
        s.push_str("\n[sweep]\n");
        kv(
            &mut s,
            "eps_list",
            self.eps_list
                .iter()
                .map(|e| format!("{e}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        kv(&mut s, "gs_dir_x", format!("{}", self.gs_direction.0));
        kv(&mut s, "gs_dir_y", format!("{}", self.gs_direction.1));
        kv(&mut s, "gs_offset", format!("{}", self.gs_offset));
        s
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::for_scenario(ScenarioKind::GrowingCircle)
    }
}

/// Parses the line-based configuration text. The scenario key (wherever it
/// appears) selects the defaults; every other key overrides one field.
/// Unknown keys, type mismatches and out-of-range values fail with the
/// offending line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    // find the scenario first so defaults come from the right table
    let mut kind = ScenarioKind::GrowingCircle;
    for (ln, raw) in text.lines().enumerate() {
        if let Some((k, v)) = split_kv(raw) {
            if k == "scenario" {
                kind = ScenarioKind::parse(v).ok_or_else(|| Error::Config {
                    line: ln + 1,
                    message: format!("unknown scenario '{v}'"),
                })?;
            }
        }
    }
    let mut cfg = RunConfig::for_scenario(kind);
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if trimmed.starts_with('[') {
            if trimmed.ends_with(']') {
                continue; // cosmetic section header
            }
            return Err(Error::Config {
                line,
                message: "unterminated section header".into(),
            });
        }
        let Some((key, value)) = split_kv(raw) else {
            return Err(Error::Config {
                line,
                message: "expected 'key = value'".into(),
            });
        };
        apply_key(&mut cfg, key, value, line)?;
    }
    Ok(cfg)
}

fn split_kv(raw: &str) -> Option<(&str, &str)> {
    let body = match raw.find('#') {
        Some(p) => &raw[..p],
        None => raw,
    };
    let (k, v) = body.split_once('=')?;
    let k = k.trim();
    let v = v.trim();
    if k.is_empty() {
        None
    } else {
        Some((k, v))
    }
}

fn apply_key(cfg: &mut RunConfig, key: &str, value: &str, line: usize) -> Result<()> {
    let bad = |message: String| Error::Config { line, message };
    let f = |v: &str| -> Result<f64> {
        v.parse()
            .map_err(|_| bad(format!("expected a number, got '{v}'")))
    };
    let pos = |v: &str| -> Result<f64> {
        let x = f(v)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(bad(format!("value must be positive, got {x}")))
        }
    };
    let nonneg = |v: &str| -> Result<f64> {
        let x = f(v)?;
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(bad(format!("value must be nonnegative, got {x}")))
        }
    };
    let int = |v: &str| -> Result<usize> {
        v.parse()
            .map_err(|_| bad(format!("expected an integer, got '{v}'")))
    };
    match key {
        "scenario" => {} // handled by the pre-scan
        "output_dir" => cfg.output_dir = PathBuf::from(value),
        "deterministic" => {
            cfg.deterministic = value
                .parse()
                .map_err(|_| bad(format!("expected true/false, got '{value}'")))?
        }
        "threads" => {
            cfg.threads = int(value)?;
            if cfg.threads == 0 {
                return Err(bad("threads must be >= 1".into()));
            }
        }
        "report_interval" => {
            cfg.report_interval = int(value)?;
            if cfg.report_interval == 0 {
                return Err(bad("report_interval must be >= 1".into()));
            }
        }
        "snapshot_interval" => cfg.snapshot_interval = int(value)?,
        "nx" => cfg.nx = require_min(int(value)?, 3, "nx", line)?,
        "ny" => cfg.ny = require_min(int(value)?, 3, "ny", line)?,
        "x0" => cfg.x0 = f(value)?,
        "y0" => cfg.y0 = f(value)?,
        "lx" => cfg.lx = pos(value)?,
        "ly" => cfg.ly = pos(value)?,
        "bc" => {
            cfg.bc = BoundaryMode::parse(value)
                .ok_or_else(|| bad(format!("unknown boundary mode '{value}'")))?
        }
        "epsilon" => cfg.epsilon = pos(value)?,
        "tau" => cfg.tau = pos(value)?,
        "m_penalty" => cfg.m_penalty = nonneg(value)?,
        "theta" => cfg.theta = nonneg(value)?,
        "penalty_exponent" => {
            let k = int(value)? as u32;
            if k < 2 || k % 2 != 0 {
                return Err(bad("penalty_exponent must be even and >= 2".into()));
            }
            cfg.penalty_exponent = k;
        }
        "solver_tol" => cfg.solver_tol = pos(value)?,
        "solver_max_iter" => cfg.solver_max_iter = require_min(int(value)?, 1, "solver_max_iter", line)?,
        "stationarity_tol" => cfg.stationarity_tol = pos(value)?,
        "stop" => {
            cfg.stop_mode = match value {
                "time" => StopMode::Time,
                "stationarity" => StopMode::Stationarity,
                _ => return Err(bad(format!("unknown stop mode '{value}'"))),
            }
        }
        "t_end" => cfg.t_end = pos(value)?,
        "max_steps" => {
            cfg.max_steps = value
                .parse()
                .map_err(|_| bad(format!("expected an integer, got '{value}'")))?
        }
        "circle_cx" => cfg.circle_center.0 = f(value)?,
        "circle_cy" => cfg.circle_center.1 = f(value)?,
        "circle_radius" => cfg.circle_radius = pos(value)?,
        "circle2_cx" => cfg.circle2_center.0 = f(value)?,
        "circle2_cy" => cfg.circle2_center.1 = f(value)?,
        "circle2_radius" => cfg.circle2_radius = pos(value)?,
        "ellipse_ax" => cfg.ellipse_semi_axes.0 = pos(value)?,
        "ellipse_ay" => cfg.ellipse_semi_axes.1 = pos(value)?,
        "array_count" => cfg.array_count = require_min(int(value)?, 1, "array_count", line)?,
        "array_spacing" => cfg.array_spacing = pos(value)?,
        "array_radius" => cfg.array_radius = pos(value)?,
        "piriform_a" => cfg.piriform_a = pos(value)?,
        "piriform_b" => cfg.piriform_b = pos(value)?,
        "cusp_offset" => cfg.cusp_offset = nonneg(value)?,
        "inclusion_radius" => cfg.inclusion_radius = pos(value)?,
        "adhesion_weight" => cfg.adhesion_weight = nonneg(value)?,
        "confinement_strength" => cfg.confinement_strength = nonneg(value)?,
        "volume_strength" => cfg.volume_strength = nonneg(value)?,
        "fidelity_scale" => cfg.fidelity_scale = nonneg(value)?,
        "eps_list" => {
            let mut list = Vec::new();
            for tok in value.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let e: f64 = tok
                    .parse()
                    .map_err(|_| bad(format!("bad epsilon '{tok}'")))?;
                if !(e > 0.0 && e < 1.0) {
                    return Err(bad(format!("epsilon {e} out of (0, 1)")));
                }
                list.push(e);
            }
            if list.is_empty() {
                return Err(bad("eps_list must not be empty".into()));
            }
            cfg.eps_list = list;
        }
        "gs_dir_x" => cfg.gs_direction.0 = f(value)?,
        "gs_dir_y" => cfg.gs_direction.1 = f(value)?,
        "gs_offset" => cfg.gs_offset = f(value)?,
        _ => return Err(bad(format!("unknown key '{key}'"))),
    }
    Ok(())
}

fn require_min(v: usize, min: usize, key: &str, line: usize) -> Result<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(Error::Config {
            line,
            message: format!("{key} must be >= {min}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_table_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.epsilon, 0.125);
        assert_eq!(cfg.m_penalty, 1e7);
        assert_eq!(cfg.theta, 0.004);
        assert_eq!(cfg.scenario, ScenarioKind::GrowingCircle);
        assert_eq!(cfg.tau, 1e-5);
    }

    #[test]
    fn single_override() {
        let cfg = parse_config("epsilon = 0.0625").unwrap();
        assert_eq!(cfg.epsilon, 0.0625);
        assert_eq!(cfg.m_penalty, 1e7);
        assert_eq!(cfg.theta, 0.004);
    }

    #[test]
    fn range_and_unknown_key_errors() {
        match parse_config("epsilon = -1") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected range error, got {other:?}"),
        }
        match parse_config("# comment\nnot_a_key = 3") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected unknown key error, got {other:?}"),
        }
        match parse_config("tau 3") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn roundtrip_is_lossless() {
        for kind in ScenarioKind::all() {
            let mut cfg = RunConfig::for_scenario(kind);
            cfg.epsilon = 0.1;
            cfg.tau = 3.5e-6;
            cfg.eps_list = vec![0.0625, 1.0 / 48.0];
            cfg.gs_direction = (1.0, 1.0);
            let text = cfg.to_text();
            let back = parse_config(&text).unwrap();
            assert_eq!(back, cfg, "round trip for {kind:?}");
        }
    }

    #[test]
    fn scenario_selection_and_sections() {
        let text = "[run]\nscenario = collide\n[flow]\nepsilon = 0.125\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::CollidingCircles);
        assert_eq!(cfg.stop_mode, StopMode::Stationarity);
        // lije rejects non-periodic boundaries at scenario build
        let cfg = parse_config("scenario = lije\nbc = neumann").unwrap();
        assert!(cfg.to_scenario().is_err());
    }
}
