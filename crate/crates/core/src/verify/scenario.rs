use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    check_confinement, check_directrix, check_foci_circle, check_foci_on_curve, check_foci_slope,
    check_oracle, matched_level, CheckResult, VerificationReport, ORACLE_SCENARIOS,
};
use crate::caustics::{ConfinedDomain, EnvelopePair, FociCurve};
use crate::dynamics::{simulate, DynamicsError, State};
use crate::mirror::{Mirror, MirrorError};
use crate::par::Execution;
use crate::Vec2;

pub const DEFAULT_SEED: u64 = 0xB177A4D;

/// Check names with their default tolerances.
pub const CHECK_NAMES: [(&str, f64); 6] = [
    ("directrix", 1e-9),
    ("foci_circle", 1e-8),
    ("foci_slope", 1e-8),
    ("foci_on_curve", 1e-7),
    ("confinement", 1e-6),
    ("oracle", 1e-7),
];

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("cannot read scenario {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn default_gravity() -> f64 {
    1.0
}

/// A verification scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub id: Option<String>,
    pub mirror: String,
    #[serde(default)]
    pub domain: Option<(f64, f64)>,
    pub x0: f64,
    pub y0: f64,
    pub vx: f64,
    pub vy: f64,
    #[serde(default = "default_gravity")]
    pub g: f64,
    pub bounces: usize,
    /// Checks to run; all of [`CHECK_NAMES`] when empty.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples_per_arc: Option<usize>,
    #[serde(default)]
    pub oracle_scenarios: Option<usize>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, VerifyError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario file; the id defaults to the file stem.
    pub fn load(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| VerifyError::Io { path: path.display().to_string(), source })?;
        let mut s = Self::from_json(&text)?;
        if s.id.is_none() {
            s.id = path.file_stem().map(|f| f.to_string_lossy().into_owned());
        }
        Ok(s)
    }

    fn validate(&self) -> Result<(), VerifyError> {
        for name in self.checks.iter().chain(self.tolerances.keys()) {
            if !CHECK_NAMES.iter().any(|(n, _)| n == name) {
                let known: Vec<&str> = CHECK_NAMES.iter().map(|c| c.0).collect();
                return Err(VerifyError::Invalid(format!(
                    "unknown check `{name}` (known: {})",
                    known.join(", ")
                )));
            }
        }
        if let Some((name, tol)) = self.tolerances.iter().find(|(_, t)| !(**t >= 0.0)) {
            return Err(VerifyError::Invalid(format!("tolerance for `{name}` must be >= 0, got {tol}")));
        }
        Ok(())
    }

    pub fn mirror(&self) -> Result<Mirror, VerifyError> {
        let m = Mirror::parse(&self.mirror)?;
        Ok(match self.domain {
            Some((lo, hi)) => m.with_domain(lo, hi)?,
            None => m,
        })
    }

    pub fn initial(&self) -> State {
        State::new(Vec2::new(self.x0, self.y0), Vec2::new(self.vx, self.vy))
    }

    pub fn tolerance(&self, check: &str) -> f64 {
        self.tolerances.get(check).copied().unwrap_or_else(|| {
            CHECK_NAMES.iter().find(|(n, _)| *n == check).map_or(0.0, |c| c.1)
        })
    }

    fn selected(&self) -> Vec<&str> {
        CHECK_NAMES
            .iter()
            .map(|c| c.0)
            .filter(|n| self.checks.is_empty() || self.checks.iter().any(|c| c == n))
            .collect()
    }
}

/// Simulates the scenario and runs the selected checks in a fixed order.
pub fn run_suite(s: &Scenario, exec: Execution) -> Result<VerificationReport, VerifyError> {
    s.validate()?;
    let m = s.mirror()?;
    let t = simulate(s.initial(), &m, s.g, s.bounces)?;
    let seed = s.seed.unwrap_or(DEFAULT_SEED);
    let level = matched_level(&t, &m);

    let mut checks = Vec::new();
    for name in s.selected() {
        let tol = s.tolerance(name);
        let result = match name {
            "directrix" => check_directrix(&t, tol),
            "foci_circle" => check_foci_circle(&t, &m, tol),
            "foci_slope" => check_foci_slope(&t, tol),
            "foci_on_curve" => check_foci_on_curve(&t, &m, tol, exec),
            "confinement" => match level {
                Some(l) => {
                    let pair = EnvelopePair::new(FociCurve::new(m.clone(), l.level), t.directrix());
                    let domain = ConfinedDomain::new(pair, exec);
                    check_confinement(&t, &domain, s.samples_per_arc.unwrap_or(64), tol, exec)
                }
                None => CheckResult {
                    notice: Some("skipped: no regular focus to match".into()),
                    ..CheckResult::new(name, tol)
                },
            },
            "oracle" => check_oracle(seed, s.oracle_scenarios.unwrap_or(ORACLE_SCENARIOS), tol, exec),
            _ => unreachable!("names come from CHECK_NAMES"),
        };
        checks.push(result);
    }

    Ok(VerificationReport {
        scenario_id: s.id.clone().unwrap_or_else(|| "scenario".into()),
        seed,
        bounces: t.bounces.len(),
        termination: t.termination.clone(),
        directrix: t.directrix(),
        level,
        checks,
    })
}
