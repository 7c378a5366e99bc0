//! Scenario configuration: one flat JSON document, strict keys, validated
//! before any numerical work starts.
//!
//! The same `validate` pass backs both the `validate` subcommand and the
//! loading step of `run`, so a config that validates also runs. Unknown
//! keys are errors, not warnings: a silently ignored typo would change
//! which physics a run reports on.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use zitterlab::grid::MomentumGrid;

/// Configuration failures, with enough context to fix the file.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// The file could not be read at all.
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// The JSON is malformed or violates the schema.
    #[error("invalid config at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// A field parsed but carries an unusable value.
    #[error("invalid field `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

/// The available scenarios; serialized names are the CLI-facing ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Wavepacket trajectory with the velocity split into classic +
    /// trembling parts; gates the split identity (and trembling-free
    /// purity when the pair mixing is zero).
    ZbQmTrajectory,
    /// Dominant trembling frequency versus twice the energy over a fixed
    /// |p| sweep.
    ZbSpectrumSweep,
    /// Ladder-operator identity battery on a small line grid.
    FockIdentities,
    /// Transverse circle traced by the equal-weight pair superposition.
    PairZb,
    /// Second-order convergence of the moment-current continuity residual.
    NoetherConvergence,
    /// Randomized audit of the polarization triads and helicity bases.
    SpinorBasisAudit,
}

impl Scenario {
    /// The serialized (config-file) name.
    pub fn name(self) -> &'static str {
        match self {
            Scenario::ZbQmTrajectory => "zb_qm_trajectory",
            Scenario::ZbSpectrumSweep => "zb_spectrum_sweep",
            Scenario::FockIdentities => "fock_identities",
            Scenario::PairZb => "pair_zb",
            Scenario::NoetherConvergence => "noether_convergence",
            Scenario::SpinorBasisAudit => "spinor_basis_audit",
        }
    }
}

/// Physical packet parameters. Complex values are `[re, im]` pairs.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    /// Particle mass (natural units).
    pub m: f64,
    /// Packet center momentum.
    pub p0: [f64; 3],
    /// Momentum-space packet width.
    pub sigma: f64,
    /// Complex particle/antiparticle mixing angle; `[0, 0]` keeps the
    /// antiparticle branch empty.
    pub pair_mix: [f64; 2],
    /// Complex weights of the two spin components.
    pub spin_weights: [[f64; 2]; 2],
}

impl Physics {
    /// Center momentum as a vector.
    pub fn p0_vec(&self) -> Vector3<f64> {
        Vector3::new(self.p0[0], self.p0[1], self.p0[2])
    }

    /// Mixing angle as a complex number.
    pub fn mix(&self) -> Complex64 {
        Complex64::new(self.pair_mix[0], self.pair_mix[1])
    }

    /// Spin weights as complex numbers.
    pub fn weights(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.spin_weights[0][0], self.spin_weights[0][1]),
            Complex64::new(self.spin_weights[1][0], self.spin_weights[1][1]),
        ]
    }
}

/// Resolution parameters.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Active spatial dimensions (1, 2, or 3).
    pub dim: usize,
    /// Half-width of the symmetric momentum grid per axis.
    pub p_max: f64,
    /// Momentum nodes per axis (even, zero excluded).
    pub n_per_axis: usize,
    /// Box points per axis (the minimum, for auto-sized boxes).
    #[serde(rename = "spatial_N")]
    pub spatial_n: usize,
    /// Box edge length; 0 requests an auto-sized commensurate box.
    #[serde(rename = "box_L")]
    pub box_l: f64,
    /// Sampled time interval [0, t_span].
    pub t_span: f64,
    /// Number of time samples across t_span.
    pub n_times: usize,
}

/// Artifact destinations.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Scenario data table (schema depends on the scenario).
    pub csv_path: String,
    /// Gate summary report.
    pub json_path: String,
}

/// One fully described run.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Which scenario to run.
    pub scenario: Scenario,
    /// Seed of the named 64-bit generator (chacha12); recorded in the
    /// summary so sweeps are reproducible bit for bit.
    #[serde(default)]
    pub seed: u64,
    /// Physical packet parameters.
    pub physics: Physics,
    /// Resolution parameters.
    pub numerics: Numerics,
    /// Artifact destinations.
    pub outputs: Outputs,
}

impl ScenarioConfig {
    /// Reads, parses, and validates a config file.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                // serde_json appends its own " at line L column C" clause;
                // drop it since the error display re-adds the position.
                message: e
                    .to_string()
                    .split(" at line ")
                    .next()
                    .unwrap_or_default()
                    .to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Semantic validation beyond the JSON shape.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = |field, message: String| Err(ConfigError::Field { field, message });
        let p = &self.physics;
        if !(p.m > 0.0) || !p.m.is_finite() {
            return field("physics.m", format!("mass must be positive and finite, got {}", p.m));
        }
        if !(p.sigma > 0.0) || !p.sigma.is_finite() {
            return field(
                "physics.sigma",
                format!("width must be positive and finite, got {}", p.sigma),
            );
        }
        if p.p0.iter().any(|x| !x.is_finite()) {
            return field("physics.p0", "components must be finite".into());
        }
        if p.pair_mix.iter().any(|x| !x.is_finite()) {
            return field("physics.pair_mix", "components must be finite".into());
        }
        let w = p.weights();
        if w.iter().all(|z| z.norm() == 0.0) {
            return field(
                "physics.spin_weights",
                "at least one spin weight must be nonzero".into(),
            );
        }
        let n = &self.numerics;
        if !(1..=3).contains(&n.dim) {
            return field("numerics.dim", format!("must be 1, 2, or 3, got {}", n.dim));
        }
        if !(n.p_max > 0.0) || !n.p_max.is_finite() {
            return field(
                "numerics.p_max",
                format!("must be positive and finite, got {}", n.p_max),
            );
        }
        if n.n_per_axis < 2 || n.n_per_axis % 2 != 0 {
            return field(
                "numerics.n_per_axis",
                format!("must be even and at least 2, got {}", n.n_per_axis),
            );
        }
        if n.spatial_n < 4 {
            return field(
                "numerics.spatial_N",
                format!("must be at least 4, got {}", n.spatial_n),
            );
        }
        if !(n.box_l >= 0.0) || !n.box_l.is_finite() {
            return field(
                "numerics.box_L",
                format!("must be nonnegative and finite (0 = auto), got {}", n.box_l),
            );
        }
        if !(n.t_span > 0.0) || !n.t_span.is_finite() {
            return field(
                "numerics.t_span",
                format!("must be positive and finite, got {}", n.t_span),
            );
        }
        if n.n_times < 2 {
            return field(
                "numerics.n_times",
                format!("must be at least 2, got {}", n.n_times),
            );
        }
        if self.outputs.csv_path.is_empty() || self.outputs.json_path.is_empty() {
            return field("outputs", "artifact paths must be nonempty".into());
        }

        // Time-sampling guard for the scenarios that sample [0, t_span]
        // directly: the fastest oscillation 2 E_max must stay resolvable.
        if matches!(self.scenario, Scenario::ZbQmTrajectory | Scenario::PairZb) {
            let corner = n.p_max * (n.dim as f64).sqrt();
            let e_bound = (corner * corner + p.m * p.m).sqrt();
            let dt = n.t_span / (n.n_times - 1) as f64;
            if 2.0 * e_bound * dt > std::f64::consts::PI {
                return field(
                    "numerics.n_times",
                    format!(
                        "time step t_span/(n_times-1) = {dt:.3e} undersamples the fastest oscillation 2*E_max = {:.3e}; raise n_times or shrink t_span",
                        2.0 * e_bound
                    ),
                );
            }
        }

        match self.scenario {
            Scenario::ZbSpectrumSweep => {
                if n.n_times < 64 {
                    return field(
                        "numerics.n_times",
                        format!("the frequency estimator needs at least 64 samples, got {}", n.n_times),
                    );
                }
            }
            Scenario::FockIdentities => {
                if n.dim != 1 {
                    return field("numerics.dim", "ladder identities run on line grids (dim = 1)".into());
                }
                if n.n_per_axis > 4 {
                    return field(
                        "numerics.n_per_axis",
                        format!(
                            "at most 4 nodes (16 ladder modes) fit the exact-diagonalization cap, got {}",
                            n.n_per_axis
                        ),
                    );
                }
            }
            Scenario::PairZb => {
                if n.dim != 1 || n.n_per_axis != 2 {
                    return field(
                        "numerics.dim",
                        "the pair scenario runs on the minimal line grid (dim = 1, n_per_axis = 2)".into(),
                    );
                }
                if p.p0[0] != 0.0 || p.p0[1] != 0.0 || !(p.p0[2] > 0.0) {
                    return field(
                        "physics.p0",
                        "the pair scenario needs p0 = (0, 0, z) with z > 0".into(),
                    );
                }
            }
            Scenario::NoetherConvergence => {
                if n.dim != 3 {
                    return field(
                        "numerics.dim",
                        "the convergence study needs all four current components live (dim = 3)".into(),
                    );
                }
                if !(4..=24).contains(&n.spatial_n) {
                    return field(
                        "numerics.spatial_N",
                        format!(
                            "base resolution must be in 4..=24 (it is refined x2 and x4), got {}",
                            n.spatial_n
                        ),
                    );
                }
            }
            _ => {}
        }

        // The grid itself must build: surfaces step-size and stencil
        // problems at validation time rather than mid-run.
        MomentumGrid::build_symmetric(n.dim, n.p_max, n.n_per_axis, p.m).map_err(|e| {
            ConfigError::Field {
                field: "numerics",
                message: e.to_string(),
            }
        })?;
        Ok(())
    }
}

/// The JSON schema printed by `zitterlab schema`.
pub const SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "zitterlab scenario configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["scenario", "physics", "numerics", "outputs"],
  "properties": {
    "scenario": {
      "enum": [
        "zb_qm_trajectory",
        "zb_spectrum_sweep",
        "fock_identities",
        "pair_zb",
        "noether_convergence",
        "spinor_basis_audit"
      ]
    },
    "seed": {
      "type": "integer",
      "minimum": 0,
      "default": 0,
      "description": "64-bit seed of the chacha12 generator recorded in the summary"
    },
    "physics": {
      "type": "object",
      "additionalProperties": false,
      "required": ["m", "p0", "sigma", "pair_mix", "spin_weights"],
      "properties": {
        "m": { "type": "number", "exclusiveMinimum": 0 },
        "p0": { "type": "array", "items": { "type": "number" }, "minItems": 3, "maxItems": 3 },
        "sigma": { "type": "number", "exclusiveMinimum": 0 },
        "pair_mix": {
          "type": "array",
          "items": { "type": "number" },
          "minItems": 2,
          "maxItems": 2,
          "description": "complex mixing angle as [re, im]; [0, 0] keeps the antiparticle branch empty"
        },
        "spin_weights": {
          "type": "array",
          "items": { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 },
          "minItems": 2,
          "maxItems": 2,
          "description": "complex weights of the two spin components as [[re, im], [re, im]]"
        }
      }
    },
    "numerics": {
      "type": "object",
      "additionalProperties": false,
      "required": ["dim", "p_max", "n_per_axis", "spatial_N", "box_L", "t_span", "n_times"],
      "properties": {
        "dim": { "type": "integer", "minimum": 1, "maximum": 3 },
        "p_max": { "type": "number", "exclusiveMinimum": 0 },
        "n_per_axis": { "type": "integer", "minimum": 2, "multipleOf": 2 },
        "spatial_N": { "type": "integer", "minimum": 4 },
        "box_L": { "type": "number", "minimum": 0, "description": "0 requests an auto-sized commensurate box" },
        "t_span": { "type": "number", "exclusiveMinimum": 0 },
        "n_times": { "type": "integer", "minimum": 2 }
      }
    },
    "outputs": {
      "type": "object",
      "additionalProperties": false,
      "required": ["csv_path", "json_path"],
      "properties": {
        "csv_path": { "type": "string", "minLength": 1 },
        "json_path": { "type": "string", "minLength": 1 }
      }
    }
  }
}
"#;

#[cfg(test)]
mod tests {
    use super::*;

    fn base_json() -> serde_json::Value {
        serde_json::json!({
            "scenario": "zb_qm_trajectory",
            "physics": {
                "m": 1.0,
                "p0": [0.0, 0.0, 0.4],
                "sigma": 0.45,
                "pair_mix": [0.35, 0.1],
                "spin_weights": [[1.0, 0.0], [0.3, -0.5]]
            },
            "numerics": {
                "dim": 1,
                "p_max": 2.0,
                "n_per_axis": 8,
                "spatial_N": 256,
                "box_L": 0.0,
                "t_span": 2.0,
                "n_times": 17
            },
            "outputs": { "csv_path": "out.csv", "json_path": "out.json" }
        })
    }

    #[test]
    fn a_complete_config_parses_and_validates() {
        let cfg: ScenarioConfig = serde_json::from_value(base_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.scenario.name(), "zb_qm_trajectory");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = base_json();
        v["numerics"]["extra_knob"] = serde_json::json!(1);
        let err = serde_json::from_value::<ScenarioConfig>(v).unwrap_err();
        assert!(err.to_string().contains("extra_knob"));
    }

    #[test]
    fn undersampled_time_grid_is_named_in_the_error() {
        let mut v = base_json();
        v["numerics"]["n_times"] = serde_json::json!(2);
        v["numerics"]["t_span"] = serde_json::json!(50.0);
        let cfg: ScenarioConfig = serde_json::from_value(v).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("n_times"), "{err}");
    }

    #[test]
    fn the_printed_schema_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(SCHEMA).unwrap();
        assert_eq!(v["title"], "zitterlab scenario configuration");
    }
}
