//! Suite runner and the JSON and CSV artifacts.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{CheckName, Config};
use crate::error::{Error, Result};
use crate::geometry::PlanePoint;
use crate::global_dynamics::Dynamics;
use crate::verifier::{CheckReport, HyperbolicityReport, Seam, Verifier, VerticalZone, WitnessReport};

pub const SCHEMA: &str = "anosov-forge/report";
pub const SCHEMA_VERSION: u32 = 1;

/// Grid for the profile feasibility check.
const FEASIBILITY_GRID: usize = 1000;
/// Strips `Q_n` with `|n|` up to this are sampled for the metric bounds.
const STRIP_RANGE: i64 = 5;
const LOWER_BOUND_RANGE: i64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTiming {
    pub check: CheckName,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub schema_version: u32,
    pub config: Config,
    /// True iff every entry of `checks` passed.
    pub pass: bool,
    pub checks: Vec<CheckReport>,
    #[serde(with = "crate::json_float")]
    pub alpha_hat: f64,
    pub hyperbolicity: Option<HyperbolicityReport>,
    pub witness: Option<WitnessReport>,
    /// Wall-clock seconds per check; omitted unless requested, since it breaks
    /// byte-for-byte reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<CheckTiming>>,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument =
            serde_json::from_str(text).map_err(|e| Error::Io(format!("malformed report: {e}")))?;
        if doc.schema != SCHEMA || doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Io(format!(
                "unsupported report schema {} v{}",
                doc.schema, doc.schema_version
            )));
        }
        Ok(doc)
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Runs one named check, appending its reports.
fn run_check(
    v: &Verifier,
    cfg: &Config,
    name: CheckName,
    doc: &mut ReportDocument,
) -> Result<()> {
    let b = cfg.sample_box()?;
    let n = cfg.samples;
    let m = cfg.seam_samples;
    match name {
        CheckName::Feasibility => doc.checks.push(v.check_feasibility(FEASIBILITY_GRID)?),
        CheckName::Conjugacies => doc.checks.push(v.check_conjugacies(&b, n)?),
        CheckName::C1Seams => doc.checks.extend(v.check_c1_seams(&Seam::ALL, m)?),
        CheckName::StableContraction => {
            let (domain, collar) = v.check_stable_contraction(n, m)?;
            doc.checks.push(domain);
            doc.checks.push(collar);
        }
        CheckName::UnstableExpansion => doc.checks.push(v.check_unstable_expansion(&b, n)?),
        CheckName::FinalNormRatios => doc.checks.extend(v.check_final_norm_ratios(&b, n)?),
        CheckName::Hyperbolicity => {
            let h = v.check_hyperbolicity(&b, cfg.orbits, cfg.orbit_steps)?;
            doc.checks.push(h.report.clone());
            doc.hyperbolicity = Some(h);
        }
        CheckName::NoFixedPoints => doc.checks.push(v.check_no_fixed_points(&cfg.fixed_point_box()?, cfg.grid)?),
        CheckName::Verticality => {
            for z in VerticalZone::ALL {
                doc.checks.push(v.check_verticality(z, m)?);
            }
        }
        CheckName::ReebLeafOffsets => doc.checks.push(v.check_reeb_leaf_offsets(m.div_ceil(20))?),
        CheckName::CrossingStrips => doc.checks.push(v.check_crossing_strips(STRIP_RANGE, m)?),
        CheckName::MetricLowerBound => {
            doc.checks
                .push(v.check_metric_lower_bound(LOWER_BOUND_RANGE, n, b.x_max.max(1.0))?)
        }
        CheckName::MetricContinuity => doc.checks.push(v.check_metric_continuity(m)?),
        CheckName::Witness => {
            let w = v.find_non_hausdorff_witness(cfg.witness_tol, cfg.witness_steps, cfg.witness_eta)?;
            doc.checks.push(w.report.clone());
            doc.witness = Some(w);
        }
    }
    Ok(())
}

/// Runs the configured suite. Checks run in the fixed order of [`CheckName::ALL`]
/// whatever the order in the config, and each at most once.
pub fn run_suite(cfg: &Config, with_timing: bool) -> Result<ReportDocument> {
    let v = cfg.build()?;
    let mut doc = ReportDocument {
        schema: SCHEMA.to_string(),
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        pass: false,
        checks: Vec::new(),
        alpha_hat: v.estimate_alpha()?,
        hyperbolicity: None,
        witness: None,
        timing: with_timing.then(Vec::new),
    };
    for name in CheckName::ALL.into_iter().filter(|c| cfg.suite.contains(c)) {
        let start = Instant::now();
        run_check(&v, cfg, name, &mut doc)?;
        if let Some(t) = doc.timing.as_mut() {
            t.push(CheckTiming {
                check: name,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    doc.pass = doc.checks.iter().all(|c| c.pass);
    Ok(doc)
}

#[derive(Debug, Serialize)]
struct OrbitRow {
    n: i64,
    x: f64,
    y: f64,
}

/// Orbit of `p` as CSV with header `n,x,y`: rows `0..=steps` for nonnegative
/// `steps`, otherwise `steps..=0`.
pub fn orbit_csv(d: &Dynamics, p: PlanePoint, steps: i64) -> Result<String> {
    let seg = if steps >= 0 { d.orbit(p, 0, steps)? } else { d.orbit(p, steps, 0)? };
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, q) in seg.points.iter().enumerate() {
        w.serialize(OrbitRow {
            n: seg.start_index + i as i64,
            x: q.x,
            y: q.y,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses an orbit CSV back into `(n, point)` rows.
pub fn parse_orbit_csv(text: &str) -> Result<Vec<(i64, PlanePoint)>> {
    #[derive(Deserialize)]
    struct Row {
        n: i64,
        x: f64,
        y: f64,
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<Row>()
        .map(|row| {
            row.map(|r| (r.n, PlanePoint::new(r.x, r.y)))
                .map_err(|e| Error::Io(format!("malformed orbit csv: {e}")))
        })
        .collect()
}
