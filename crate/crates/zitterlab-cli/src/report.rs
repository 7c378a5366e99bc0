//! Gate bookkeeping and artifact writing.
//!
//! Artifacts must be byte-identical across runs of the same config and
//! seed, so everything here is deterministic: fixed field order in the
//! summary (serde structs, not maps), `{:.16e}` floats in CSVs, LF line
//! endings, and no timestamps, durations, or machine facts.

use serde::Serialize;

use crate::config::ScenarioConfig;

/// One tolerance gate: passes when `measured <= tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct GateResult {
    /// Stable gate name, also usable as a CSV lookup key.
    pub name: String,
    /// The measured value.
    pub measured: f64,
    /// The pinned tolerance.
    pub tolerance: f64,
    /// Verdict.
    pub pass: bool,
}

impl GateResult {
    /// Builds a gate with the `measured <= tolerance` verdict.
    pub fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        GateResult {
            name: name.to_string(),
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }
}

/// Everything a scenario hands back for reporting.
#[derive(Debug)]
pub struct ScenarioOutput {
    /// The CSV artifact body (header line included).
    pub csv: String,
    /// All gates, in a stable order.
    pub gates: Vec<GateResult>,
}

#[derive(Serialize)]
struct RngStamp {
    name: &'static str,
    seed: u64,
}

#[derive(Serialize)]
struct Artifacts<'a> {
    csv: &'a str,
    json: &'a str,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a str,
    rng: RngStamp,
    gates: &'a [GateResult],
    all_pass: bool,
    artifacts: Artifacts<'a>,
}

/// Writes the CSV and the JSON summary; returns whether all gates passed.
pub fn write_artifacts(cfg: &ScenarioConfig, out: &ScenarioOutput) -> std::io::Result<bool> {
    std::fs::write(&cfg.outputs.csv_path, &out.csv)?;
    let all_pass = out.gates.iter().all(|g| g.pass);
    let summary = Summary {
        scenario: cfg.scenario.name(),
        rng: RngStamp {
            name: "chacha12",
            seed: cfg.seed,
        },
        gates: &out.gates,
        all_pass,
        artifacts: Artifacts {
            csv: &cfg.outputs.csv_path,
            json: &cfg.outputs.json_path,
        },
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serialization");
    text.push('\n');
    std::fs::write(&cfg.outputs.json_path, text)?;
    Ok(all_pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_pass_exactly_on_the_tolerance_boundary() {
        assert!(GateResult::new("x", 1e-10, 1e-10).pass);
        assert!(GateResult::new("x", 0.0, 0.0).pass);
        assert!(!GateResult::new("x", 1.0000001e-10, 1e-10).pass);
    }

    #[test]
    fn summaries_serialize_with_stable_field_order() {
        let gates = vec![GateResult::new("a", 0.5, 1.0)];
        let summary = Summary {
            scenario: "pair_zb",
            rng: RngStamp {
                name: "chacha12",
                seed: 7,
            },
            gates: &gates,
            all_pass: true,
            artifacts: Artifacts {
                csv: "a.csv",
                json: "a.json",
            },
        };
        let text = serde_json::to_string(&summary).unwrap();
        let scenario_at = text.find("\"scenario\"").unwrap();
        let rng_at = text.find("\"rng\"").unwrap();
        let gates_at = text.find("\"gates\"").unwrap();
        let all_at = text.find("\"all_pass\"").unwrap();
        assert!(scenario_at < rng_at && rng_at < gates_at && gates_at < all_at);
    }
}
