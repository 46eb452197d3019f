//! Sampled verification of the construction: conjugacies, seam smoothness,
//! contraction and expansion rates, fixed-point freeness, verticality,
//! completeness proxies and the non-Hausdorff witness.
//!
//! Every check reports a score per sample oriented so that larger is better;
//! `worst_margin` is the smallest score and the check passes when it is at least
//! `threshold`. Upper bounds `q ≤ b` are therefore scored as `−q ≥ −b`.

mod ratios;
pub mod sampling;
mod seams;
mod witness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sigma, tau, tau_pow, Geometry, PlanePoint, Vec2};
use crate::global_dynamics::{Dynamics, PullbackMode};
use crate::norms::Norms;

pub use ratios::{HyperbolicityEstimate, HyperbolicityReport};
pub use sampling::SampleBox;
pub use seams::Seam;
pub use witness::WitnessReport;

const WITNESS_SLOTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: PlanePoint,
    #[serde(with = "crate::json_float")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub n_samples: usize,
    #[serde(with = "crate::json_float")]
    pub worst_margin: f64,
    #[serde(with = "crate::json_float")]
    pub threshold: f64,
    pub pass: bool,
    /// Worst samples first; `value` is the raw quantity, not the score.
    pub witnesses: Vec<Witness>,
}

impl CheckReport {
    /// Report for a check whose samples all failed to evaluate.
    pub fn failed(name: &str, threshold: f64, note: PlanePoint) -> Self {
        CheckReport {
            name: name.to_string(),
            n_samples: 0,
            worst_margin: f64::NEG_INFINITY,
            threshold,
            pass: false,
            witnesses: vec![Witness {
                point: note,
                value: f64::NAN,
            }],
        }
    }

    /// Conjunction of several reports under a new name; margins are compared as
    /// distances above their own thresholds.
    pub fn all_of(name: &str, parts: &[CheckReport]) -> CheckReport {
        let worst = parts
            .iter()
            .min_by(|a, b| {
                (a.worst_margin - a.threshold)
                    .partial_cmp(&(b.worst_margin - b.threshold))
                    .unwrap_or(std::cmp::Ordering::Less)
            })
            .expect("at least one part");
        CheckReport {
            name: name.to_string(),
            n_samples: parts.iter().map(|p| p.n_samples).sum(),
            worst_margin: worst.worst_margin - worst.threshold,
            threshold: 0.0,
            pass: parts.iter().all(|p| p.pass),
            witnesses: worst.witnesses.clone(),
        }
    }
}

/// Running minimum of scores with the worst few samples kept.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    name: String,
    threshold: f64,
    n: usize,
    worst: Vec<(f64, Witness)>,
}

impl Tally {
    pub(crate) fn new(name: &str, threshold: f64) -> Self {
        Tally {
            name: name.to_string(),
            threshold,
            n: 0,
            worst: Vec::with_capacity(WITNESS_SLOTS + 1),
        }
    }

    pub(crate) fn add(&mut self, point: PlanePoint, score: f64, value: f64) {
        self.n += 1;
        let score = if score.is_nan() { f64::NEG_INFINITY } else { score };
        if self.worst.len() == WITNESS_SLOTS && score >= self.worst[WITNESS_SLOTS - 1].0 {
            return;
        }
        let at = self.worst.partition_point(|(s, _)| *s <= score);
        self.worst.insert(at, (score, Witness { point, value }));
        self.worst.truncate(WITNESS_SLOTS);
    }

    pub(crate) fn finish(self) -> CheckReport {
        let worst_margin = self.worst.first().map_or(f64::INFINITY, |w| w.0);
        CheckReport {
            name: self.name,
            n_samples: self.n,
            worst_margin,
            threshold: self.threshold,
            pass: worst_margin >= self.threshold,
            witnesses: self.worst.into_iter().map(|(_, w)| w).collect(),
        }
    }
}

/// Zones where the unstable direction must be vertical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerticalZone {
    /// `[−2, ∞) × [¾, 1]`
    UpperBand,
    /// `[−2, 3] × [0, ½]`
    LowerBlock,
    /// `[2, 4] × (¼ − δ, ¼ + δ)`
    StripE,
}

impl VerticalZone {
    pub const ALL: [VerticalZone; 3] = [VerticalZone::UpperBand, VerticalZone::LowerBlock, VerticalZone::StripE];

    fn label(self) -> &'static str {
        match self {
            VerticalZone::UpperBand => "upper_band",
            VerticalZone::LowerBlock => "lower_block",
            VerticalZone::StripE => "strip_e",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Verifier {
    norms: Norms,
    seed: u64,
}

impl Verifier {
    pub fn new(norms: Norms, seed: u64) -> Self {
        Verifier { norms, seed }
    }

    pub fn norms(&self) -> &Norms {
        &self.norms
    }

    pub fn dynamics(&self) -> &Dynamics {
        self.norms.dynamics()
    }

    pub fn geometry(&self) -> &Geometry {
        self.norms.dynamics().geometry()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `τF = Fτ` and `F⁻¹ = σFσ` at `n` stratified points of the box.
    pub fn check_conjugacies(&self, b: &SampleBox, n: usize) -> Result<CheckReport> {
        b.validate()?;
        let d = self.dynamics();
        let pts = sampling::stratified(b, n, self.seed, 1);
        let res = sampling::par_map(&pts, |&p| -> Result<f64> {
            let a = tau(d.f(p)?).sup_dist(&d.f(tau(p))?);
            let c = d.f_inv(p)?.sup_dist(&sigma(d.f(sigma(p))?));
            Ok(a.max(c))
        });
        let mut t = Tally::new("conjugacies", -1e-8);
        for (p, r) in pts.iter().zip(res) {
            let r = r?;
            t.add(*p, -r, r);
        }
        Ok(t.finish())
    }

    /// Minimum over a `grid × grid` lattice of the sup-norm displacement `|F(p) − p|`.
    pub fn check_no_fixed_points(&self, b: &SampleBox, grid: usize) -> Result<CheckReport> {
        b.validate()?;
        let d = self.dynamics();
        let pts: Vec<PlanePoint> = b.lattice(grid).collect();
        let res = sampling::par_map(&pts, |&p| d.f(p).map(|q| q.sup_dist(&p)));
        let mut t = Tally::new("no_fixed_points", 0.7);
        for (p, r) in pts.iter().zip(res) {
            let r = r?;
            t.add(*p, r, r);
        }
        Ok(t.finish())
    }

    /// Unstable direction computed without shortcuts, compared with `(0, 1)` on
    /// `n` points of the zone spread over rows `−5..=5`.
    pub fn check_verticality(&self, zone: VerticalZone, n: usize) -> Result<CheckReport> {
        let delta = self.geometry().flow().delta();
        let reduced = match zone {
            VerticalZone::UpperBand => SampleBox::new(-2.0, 12.0, 0.75, 1.0)?,
            VerticalZone::LowerBlock => SampleBox::new(-2.0, 3.0, 0.0, 0.5)?,
            VerticalZone::StripE => SampleBox::new(2.0, 4.0, 0.25 - delta, 0.25 + delta)?,
        };
        let pts: Vec<PlanePoint> = sampling::stratified(&reduced, n, self.seed, 2)
            .into_iter()
            .enumerate()
            .map(|(i, q)| {
                let q = match zone {
                    // the open strip
                    VerticalZone::StripE if (q.y - 0.25).abs() >= delta => PlanePoint::new(q.x, 0.25),
                    VerticalZone::UpperBand if q.y >= 1.0 => PlanePoint::new(q.x, 0.75),
                    _ => q,
                };
                tau_pow(q, i as i64 % 11 - 5)
            })
            .collect();
        let d = self.dynamics();
        let res = sampling::par_map(&pts, |&p| d.fu_dir_with(p, PullbackMode::Definition).map(|u| u.dir));
        let mut t = Tally::new(&format!("verticality_{}", zone.label()), -1e-8);
        for (p, r) in pts.iter().zip(res) {
            let u = r?;
            let off = u.x.abs().max((u.y - 1.0).abs());
            t.add(*p, -off, off);
        }
        Ok(t.finish())
    }

    /// Unstable leaves traced inside the Reeb component keep a constant offset
    /// `x − θ(y)` from its boundary.
    pub fn check_reeb_leaf_offsets(&self, n_leaves: usize) -> Result<CheckReport> {
        let geo = *self.geometry();
        let ys = sampling::stratified_1d(0.05, 0.45, n_leaves, self.seed, 3);
        let cs = sampling::stratified_1d(0.1, 3.0, n_leaves, self.seed, 4);
        let starts: Vec<(PlanePoint, f64)> = ys
            .iter()
            .zip(&cs)
            .map(|(&y, &c)| (PlanePoint::new(geo.theta_unchecked(y) + c, y), c))
            .collect();
        let d = self.dynamics();
        let res = sampling::par_map(&starts, |&(p, c)| -> Result<f64> {
            let trace = d.leaf_trace(p, crate::global_dynamics::Bundle::Unstable, 1.0, 0.01)?;
            Ok(trace
                .iter()
                .filter(|q| q.y > 0.0 && q.y < 0.5)
                .map(|q| (q.x - geo.theta_unchecked(q.y) - c).abs())
                .fold(0.0, f64::max))
        });
        let mut t = Tally::new("reeb_leaf_offsets", -1e-6);
        for ((p, _), r) in starts.iter().zip(res) {
            let r = r?;
            t.add(*p, -r, r);
        }
        Ok(t.finish())
    }

    /// Vertical unit vectors on the crossing strips `Q_n` (and horizontal ones on
    /// their mirror images) have metric length at least 1.
    pub fn check_crossing_strips(&self, n_max: i64, per_strip: usize) -> Result<CheckReport> {
        if n_max < 1 {
            return Err(Error::Domain {
                what: "n_max",
                value: n_max as f64,
                domain: "n_max >= 1",
            });
        }
        let mut pts = Vec::new();
        for n in -n_max..=n_max {
            let nf = n as f64;
            let b = SampleBox::new(-nf + 0.25, -nf + 12.0, nf - 0.25, nf)?;
            for q in sampling::stratified(&b, per_strip, self.seed, 100 + (n + n_max) as u64) {
                let q = PlanePoint::new(q.x, q.y.min(nf - 1e-12).max(nf - 0.25 + 1e-12));
                pts.push((q, Vec2::VERTICAL));
                pts.push((sigma(q), Vec2::HORIZONTAL));
            }
        }
        let nm = &self.norms;
        let res = sampling::par_map(&pts, |&(p, v)| nm.metric_norm(p, v));
        let mut t = Tally::new("crossing_strips", 1.0 - 1e-9);
        for ((p, _), r) in pts.iter().zip(res) {
            let r = r?;
            t.add(*p, r, r);
        }
        Ok(t.finish())
    }

    /// Lower bound `ĉ` of the metric on unit vectors over the region between the
    /// strips `Q_{±n}` and their mirror images, truncated at `x ≤ x_max` on the
    /// half-plane side.
    pub fn check_metric_lower_bound(&self, n_max: i64, n: usize, x_max: f64) -> Result<CheckReport> {
        let nf = n_max as f64;
        let b = SampleBox::new(-nf, x_max, -nf, nf)?;
        let mut pts = Vec::new();
        for q in sampling::stratified(&b, n, self.seed, 5) {
            if q.x + q.y >= 0.0 {
                pts.push(q);
                pts.push(sigma(q));
            }
        }
        let dirs: Vec<Vec2> = (0..8)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 8.0;
                Vec2::new(a.cos(), a.sin())
            })
            .collect();
        let nm = &self.norms;
        let res = sampling::par_map(&pts, |&p| -> Result<f64> {
            let mut lo = f64::INFINITY;
            for v in &dirs {
                lo = lo.min(nm.metric_norm(p, *v)?);
            }
            Ok(lo)
        });
        let mut t = Tally::new("metric_lower_bound", f64::MIN_POSITIVE);
        for (p, r) in pts.iter().zip(res) {
            let r = r?;
            t.add(*p, r, r);
        }
        Ok(t.finish())
    }

    /// Profile solvable on a `n`-point time grid and `α̂ > 0`; the score is the
    /// smallest of the floor slope, its gap to 1 and `α̂`.
    pub fn check_feasibility(&self, n: usize) -> Result<CheckReport> {
        let lm = self.dynamics().local_map();
        let t0 = self.geometry().t0();
        let mut t = Tally::new("feasibility", f64::MIN_POSITIVE);
        for i in 0..n {
            let time = t0 - 2.0 + 22.0 * i as f64 / (n - 1).max(1) as f64;
            let score = match lm.profile_params(time) {
                Ok(p) => p.floor.min(p.floor_gap),
                Err(_) => f64::NEG_INFINITY,
            };
            // the time sits in the x slot of the witness point
            t.add(PlanePoint::new(time, 0.0), score, score);
        }
        let alpha = self.estimate_alpha()?;
        t.add(PlanePoint::new(0.0, 0.0), alpha, alpha);
        Ok(t.finish())
    }

    /// `α̂`, the smallest rightward displacement of `φ` outside the collar and the
    /// Reeb component.
    pub fn estimate_alpha(&self) -> Result<f64> {
        self.dynamics().local_map().alpha_estimate(200, 100)
    }
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier::new(Norms::default(), 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v() -> Verifier {
        Verifier::default()
    }

    #[test]
    fn tally_keeps_worst_in_order() {
        let mut t = Tally::new("t", 0.0);
        for (i, s) in [3.0, -1.0, 2.0, 0.5, -4.0, 7.0, 1.0, f64::NAN].iter().enumerate() {
            t.add(PlanePoint::new(i as f64, 0.0), *s, *s);
        }
        let r = t.finish();
        assert_eq!(r.n_samples, 8);
        assert_eq!(r.worst_margin, f64::NEG_INFINITY);
        assert!(!r.pass);
        let xs: Vec<f64> = r.witnesses.iter().map(|w| w.point.x).collect();
        assert_eq!(xs, vec![7.0, 4.0, 1.0, 3.0, 6.0]);
    }

    #[test]
    fn pass_iff_margin_reaches_threshold() {
        let mut t = Tally::new("t", 0.7);
        t.add(PlanePoint::new(0.0, 0.0), 0.7, 0.7);
        assert!(t.clone().finish().pass);
        t.add(PlanePoint::new(0.0, 0.0), 0.6999, 0.6999);
        assert!(!t.finish().pass);
    }

    #[test]
    fn conjugacy_residual_at_half() {
        let d = Dynamics::default();
        let p = PlanePoint::new(0.5, 0.5);
        let a = tau(d.f(p).unwrap()).sup_dist(&d.f(tau(p)).unwrap());
        let b = d.f_inv(p).unwrap().sup_dist(&sigma(d.f(sigma(p)).unwrap()));
        assert!(a <= 1e-10 && b <= 1e-10, "{a} {b}");
        // on the anti-diagonal σFσF(p) = p
        let q = PlanePoint::new(1.3, -1.3);
        let back = sigma(d.f(sigma(d.f(q).unwrap())).unwrap());
        assert!(back.sup_dist(&q) < 1e-12);
    }

    #[test]
    fn small_suite_passes() {
        let v = v();
        let b = SampleBox::square(12.0);
        assert!(v.check_conjugacies(&b, 400).unwrap().pass);
        let fp = v.check_no_fixed_points(&SampleBox::square(30.0), 60).unwrap();
        assert!(fp.pass, "{fp:?}");
        for z in VerticalZone::ALL {
            let r = v.check_verticality(z, 100).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert!(v.check_reeb_leaf_offsets(5).unwrap().pass);
        assert!(v.check_crossing_strips(1, 30).unwrap().pass);
        let c = v.check_metric_lower_bound(3, 200, 12.0).unwrap();
        assert!(c.pass && c.worst_margin > 0.0);
        assert!(v.check_feasibility(50).unwrap().pass);
    }

    #[test]
    fn fixed_point_displacement_examples() {
        let d = Dynamics::default();
        // upper half of a row is a pure translate by (1, 1)
        let p = PlanePoint::new(5.0, 0.9);
        let q = d.f(p).unwrap();
        assert!((q.x - p.x - 1.0).abs() < 1e-12 && (q.y - p.y - 1.0).abs() < 1e-12);
        // mirror side displacement mirrors the half-plane side
        let m = d.f(sigma(p)).unwrap();
        let back = d.f_inv(p).unwrap();
        assert!(m.sup_dist(&sigma(back)) < 1e-12);
    }

    #[test]
    fn stable_vector_weight_on_lower_half() {
        let n = Norms::default();
        let p = PlanePoint::new(2.0, -2.0);
        let m = n.metric_norm(p, Vec2::HORIZONTAL).unwrap();
        assert!((m - (2.0 * 0.01f64).exp()).abs() < 1e-12, "{m}");
    }
}
