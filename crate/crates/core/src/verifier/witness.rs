//! Search for an orbit through the stable leaf of a Reeb boundary point and the
//! unstable leaf of its mirror image.

use serde::{Deserialize, Serialize};

use super::{CheckReport, Tally, Verifier};
use crate::error::{Error, Result};
use crate::geometry::PlanePoint;
use crate::numeric::bisect;

const BASE_HEIGHT: f64 = 0.125;
const ETA_MIN: f64 = 1e-12;
const SCAN_POINTS: usize = 240;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// Boundary point `p = (θ(⅛), ⅛)`.
    pub base: PlanePoint,
    /// Offset of the start `q = p − (η, 0)` on the horizontal stable leaf of `p`.
    #[serde(with = "crate::json_float")]
    pub eta: f64,
    /// Number of backward steps.
    pub steps: usize,
    /// `F^{−m}(q)`, if a crossing was found.
    pub hit: Option<PlanePoint>,
    /// Horizontal distance from `F^{−m}(q)` to the vertical unstable leaf `x = −⅛`
    /// through `σ(p)`.
    #[serde(with = "crate::json_float")]
    pub distance: f64,
    /// Distance along that leaf from the hit to `σ(p)`.
    #[serde(with = "crate::json_float")]
    pub leaf_offset: f64,
    pub report: CheckReport,
}

impl Verifier {
    fn backward(&self, q: PlanePoint, m: usize) -> Option<PlanePoint> {
        let d = self.dynamics();
        let mut z = q;
        for _ in 0..m {
            z = d.f_inv(z).ok()?;
        }
        z.is_finite().then_some(z)
    }

    /// For each backward step count `m ≤ m_max`, scans `η ∈ [10⁻¹², η_max]` on a
    /// logarithmic grid for a sign change of `x(F^{−m}(q_η)) + ⅛` and bisects it.
    /// The first `m` whose root lands within `tol` of the leaf is reported.
    pub fn find_non_hausdorff_witness(&self, tol: f64, m_max: usize, eta_max: f64) -> Result<WitnessReport> {
        if !(tol > 0.0 && eta_max > ETA_MIN) {
            return Err(Error::Domain {
                what: "tol",
                value: tol,
                domain: "tol > 0 and eta_max > 1e-12",
            });
        }
        let geo = self.geometry();
        let base = PlanePoint::new(geo.theta(BASE_HEIGHT)?, BASE_HEIGHT);
        let start = |eta: f64| PlanePoint::new(base.x - eta, base.y);
        let target_x = -BASE_HEIGHT;
        let log_lo = ETA_MIN.ln();
        let log_hi = eta_max.ln();
        let etas: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| (log_hi + (log_lo - log_hi) * i as f64 / (SCAN_POINTS - 1) as f64).exp())
            .collect();
        let mut best: Option<(f64, usize, PlanePoint, f64)> = None;
        for m in 0..=m_max {
            let gap = |eta: f64| self.backward(start(eta), m).map(|z| z.x - target_x);
            let mut prev: Option<(f64, f64)> = None;
            for &eta in &etas {
                let Some(g) = gap(eta) else {
                    prev = None;
                    continue;
                };
                if let Some((e0, g0)) = prev {
                    if g0.signum() != g.signum() || g == 0.0 {
                        let root = bisect(gap, e0.min(eta), e0.max(eta), 1e-16, 200).unwrap_or(eta);
                        if let Some(z) = self.backward(start(root), m) {
                            let dist = (z.x - target_x).abs();
                            if best.is_none_or(|b| dist < b.3) {
                                best = Some((root, m, z, dist));
                            }
                            if dist < tol {
                                break;
                            }
                        }
                    }
                }
                prev = Some((eta, g));
            }
            if best.is_some_and(|b| b.3 < tol) {
                break;
            }
        }
        let mut t = Tally::new("non_hausdorff_witness", -tol);
        let report = match best {
            Some((eta, steps, hit, distance)) => {
                t.add(hit, -distance, distance);
                let mut report = t.finish();
                // strict: the distance must be below tol
                report.pass = distance < tol;
                WitnessReport {
                    base,
                    eta,
                    steps,
                    hit: Some(hit),
                    distance,
                    leaf_offset: (hit.y + base.x).abs(),
                    report,
                }
            }
            None => WitnessReport {
                base,
                eta: f64::NAN,
                steps: 0,
                hit: None,
                distance: f64::INFINITY,
                leaf_offset: f64::INFINITY,
                report: CheckReport::failed("non_hausdorff_witness", -tol, base),
            },
        };
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sigma;

    #[test]
    fn stable_piece_mirrors_to_target_line() {
        let v = Verifier::default();
        let base = PlanePoint::new(v.geometry().theta(BASE_HEIGHT).unwrap(), BASE_HEIGHT);
        for dx in [-0.3, 0.0, 0.2] {
            let m = sigma(PlanePoint::new(base.x + dx, BASE_HEIGHT));
            assert_eq!(m.x, -BASE_HEIGHT);
        }
        // zero backward steps leave q on the far side of the plane
        let q = v.backward(PlanePoint::new(base.x - 1e-3, BASE_HEIGHT), 0).unwrap();
        assert!((q.x + BASE_HEIGHT).abs() > 6.0);
    }

    #[test]
    fn witness_found() {
        let v = Verifier::default();
        let w = v.find_non_hausdorff_witness(1e-3, 60, 1e-2).unwrap();
        assert!(w.report.pass, "{w:?}");
        assert!(w.steps <= 60 && w.eta <= 1e-2 && w.eta > 0.0);
        let again = v.backward(PlanePoint::new(w.base.x - w.eta, BASE_HEIGHT), w.steps).unwrap();
        assert!((again.x + BASE_HEIGHT).abs() < 1e-3);
    }
}
