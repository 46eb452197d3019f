//! Run configuration: a flat TOML table with every key optional.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::global_dynamics::Dynamics;
use crate::local_map::LocalMap;
use crate::norms::Norms;
use crate::scalar_flow::{FlowParams, ScalarFlow};
use crate::verifier::{SampleBox, Verifier};

/// Checks the suite can run, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Feasibility,
    Conjugacies,
    C1Seams,
    StableContraction,
    UnstableExpansion,
    FinalNormRatios,
    Hyperbolicity,
    NoFixedPoints,
    Verticality,
    ReebLeafOffsets,
    CrossingStrips,
    MetricLowerBound,
    MetricContinuity,
    Witness,
}

impl CheckName {
    pub const ALL: [CheckName; 14] = [
        CheckName::Feasibility,
        CheckName::Conjugacies,
        CheckName::C1Seams,
        CheckName::StableContraction,
        CheckName::UnstableExpansion,
        CheckName::FinalNormRatios,
        CheckName::Hyperbolicity,
        CheckName::NoFixedPoints,
        CheckName::Verticality,
        CheckName::ReebLeafOffsets,
        CheckName::CrossingStrips,
        CheckName::MetricLowerBound,
        CheckName::MetricContinuity,
        CheckName::Witness,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub lambda: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub k: f64,
    pub w0: f64,
    pub r0: f64,
    pub ode_step: f64,
    pub ode_tol: f64,
    pub root_tol: f64,
    /// Sampling box `[x_min, x_max, y_min, y_max]`.
    #[serde(rename = "box")]
    pub sample_box: [f64; 4],
    /// Lattice size per axis for the fixed-point scan.
    pub grid: usize,
    pub seed: u64,
    pub suite: Vec<CheckName>,
    /// Points per sampled check.
    pub samples: usize,
    /// Points per seam, zone or strip for the checks sampled along curves.
    pub seam_samples: usize,
    pub orbits: usize,
    pub orbit_steps: usize,
    pub fixed_point_box: [f64; 4],
    pub witness_tol: f64,
    pub witness_steps: usize,
    pub witness_eta: f64,
}

impl Default for Config {
    fn default() -> Self {
        let flow = FlowParams::default();
        Config {
            lambda: flow.lambda,
            delta: flow.delta,
            epsilon: 0.01,
            k: 1.0,
            w0: 0.5,
            r0: 0.25,
            ode_step: flow.ode_step,
            ode_tol: flow.ode_tol,
            root_tol: 1e-13,
            sample_box: [-12.0, 12.0, -12.0, 12.0],
            grid: 1000,
            seed: 1,
            suite: CheckName::ALL.to_vec(),
            samples: 10_000,
            seam_samples: 1000,
            orbits: 500,
            orbit_steps: 12,
            fixed_point_box: [-30.0, 30.0, -30.0, 30.0],
            witness_tol: 1e-3,
            witness_steps: 60,
            witness_eta: 1e-2,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sample_box(&self) -> Result<SampleBox> {
        to_box("box", self.sample_box)
    }

    pub fn fixed_point_box(&self) -> Result<SampleBox> {
        to_box("fixed_point_box", self.fixed_point_box)
    }

    /// Checks the counts and tolerances here; the construction parameters are
    /// checked by building the verifier.
    pub fn validate(&self) -> Result<()> {
        self.sample_box()?;
        self.fixed_point_box()?;
        let counts = [
            ("grid", self.grid),
            ("samples", self.samples),
            ("seam_samples", self.seam_samples),
            ("orbits", self.orbits),
            ("orbit_steps", self.orbit_steps),
        ];
        for (what, n) in counts {
            if n == 0 {
                return Err(Error::Config(format!("{what} must be positive")));
            }
        }
        if !(self.witness_tol > 0.0 && self.witness_eta > 1e-12 && self.witness_eta < 1.0) {
            return Err(Error::Config(format!(
                "witness_tol must be positive and witness_eta in (1e-12, 1), got {} and {}",
                self.witness_tol, self.witness_eta
            )));
        }
        self.build().map(|_| ())
    }

    /// Builds the construction, checking every parameter precondition, including
    /// solvability of the derivative profile and `ε ≤ λ/20`.
    pub fn build(&self) -> Result<Verifier> {
        let mut fp = FlowParams::new(self.lambda, self.delta);
        fp.ode_step = self.ode_step;
        fp.ode_tol = self.ode_tol;
        let flow = ScalarFlow::new(fp)?;
        let geo = Geometry::new(flow, self.k)?;
        let lm = LocalMap::new(geo, self.w0, self.r0, self.root_tol)?;
        let dynamics = Dynamics::new(lm)?;
        if !(dynamics.alpha_hat() > 0.0) {
            return Err(Error::Config(format!(
                "minimal displacement alpha_hat = {} must be positive",
                dynamics.alpha_hat()
            )));
        }
        let norms = Norms::new(dynamics, self.epsilon)?;
        Ok(Verifier::new(norms, self.seed))
    }
}

fn to_box(key: &str, [a, b, c, d]: [f64; 4]) -> Result<SampleBox> {
    SampleBox::new(a, b, c, d).map_err(|_| {
        Error::Config(format!(
            "{key} = [{a}, {b}, {c}, {d}] must be finite with x_min < x_max and y_min < y_max"
        ))
    })
}
