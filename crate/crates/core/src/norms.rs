//! Adapted norms on the two bundles and the orthogonal metric built from them.
//!
//! The unstable weight `ω` (so that `‖v‖ = ω|v|`) starts as the Euclidean norm on
//! the seed curve, is interpolated across the strip between the seed curve and
//! its image, and is pushed forward by
//! `ω(φ(q)) = ω(q) · max(e^λ / ρ, 1)` with `ρ` the Euclidean stretch of the
//! unstable direction. On the half-plane `x + y ≥ 0` the final norms add
//! exponential weights; the other half-plane is handled by the reflection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    reduce_row, seed_curve_x, sigma, Geometry, PlanePoint, Vec2,
};
use crate::global_dynamics::{Bundle, Dynamics, PullbackMode, TangentVector};

/// Unstable weight: `‖v‖ = omega·|v|` on the unstable line at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightU {
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalNormSpec {
    pub epsilon: f64,
    pub alpha_hat: f64,
}

/// The curve bounding the stable-weight growth in row `n ≥ 0`: vertical from
/// `(n, n)` to the middle of the row, then slanted to `(n + 1, n + 1)`, cut off by
/// the Reeb boundary where the vertical part would enter the Reeb component.
#[derive(Debug, Clone, Copy)]
pub struct BnCurve {
    pub n: i64,
    geo: Geometry,
}

impl BnCurve {
    /// Row-relative abscissa of the curve at row-relative height `y ∈ [0, 1]`.
    pub fn x_at(&self, y: f64) -> f64 {
        let n = self.n as f64;
        if y <= 0.5 {
            if y > 0.0 {
                (2.0 * n).min(self.geo.theta_unchecked(y))
            } else {
                2.0 * n
            }
        } else {
            2.0 * n + 2.0 * y - 1.0
        }
    }

    /// Horizontal distance from the seed curve to this curve.
    pub fn cap(&self, y: f64) -> f64 {
        self.x_at(y) - seed_curve_x(y)
    }

    /// Whether the Reeb boundary replaces part of the vertical segment.
    pub fn has_reeb_arc(&self) -> bool {
        2.0 * self.n as f64 > self.geo.curve().x_base
    }

    /// Polyline in plane coordinates, `samples + 1` points from bottom to top.
    pub fn polyline(&self, samples: usize) -> Vec<PlanePoint> {
        let n = self.n as f64;
        (0..=samples)
            .map(|i| {
                let y = i as f64 / samples as f64;
                PlanePoint::new(self.x_at(y) - n, y + n)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Norms {
    dynamics: Dynamics,
    spec: FinalNormSpec,
    growth: f64,
}

impl Norms {
    pub fn new(dynamics: Dynamics, epsilon: f64) -> Result<Self> {
        let lambda = dynamics.geometry().flow().lambda();
        if !(epsilon > 0.0 && epsilon <= lambda / 20.0) {
            return Err(Error::Config(format!(
                "epsilon = {epsilon} must lie in (0, lambda/20 = {}]",
                lambda / 20.0
            )));
        }
        Ok(Norms {
            spec: FinalNormSpec {
                epsilon,
                alpha_hat: dynamics.alpha_hat(),
            },
            dynamics,
            growth: lambda.exp(),
        })
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn spec(&self) -> &FinalNormSpec {
        &self.spec
    }

    fn geo(&self) -> &Geometry {
        self.dynamics.geometry()
    }

    pub fn b_curve(&self, n: i64) -> BnCurve {
        BnCurve { n, geo: *self.geo() }
    }

    /// Horizontal distance from the seed curve of the row, capped at `B_n` and
    /// clamped at zero. Rows below zero have no cap and are treated as zero.
    pub fn ell(&self, p: PlanePoint) -> f64 {
        let (n, q) = reduce_row(p);
        if n < 0 {
            return 0.0;
        }
        let from_seed = q.x - seed_curve_x(q.y);
        from_seed.min(self.b_curve(n).cap(q.y)).max(0.0)
    }

    /// Abscissa of the image of the seed curve at height `y ∈ [0, 1]`.
    pub fn seed_image_x(&self, y: f64) -> f64 {
        if y <= 0.5 {
            2.0
        } else if y < 0.75 {
            let lm = self.dynamics.local_map();
            lm.phi_unchecked(PlanePoint::new(1.0 - 2.0 * y, y)).x
        } else {
            3.0 - 2.0 * y
        }
    }

    /// Weight on the image of the seed curve at height `y`.
    fn seed_image_weight(&self, y: f64) -> f64 {
        let lm = self.dynamics.local_map();
        let yp = self.geo().flow().flow_unchecked(y, -1.0);
        let base = PlanePoint::new(seed_curve_x(yp), yp);
        let rho = lm.dphi_unchecked(base).apply(Vec2::VERTICAL).norm();
        (self.growth / rho).max(1.0)
    }

    fn interpolation_weight(&self, q: PlanePoint) -> f64 {
        let x0 = seed_curve_x(q.y);
        let x1 = self.seed_image_x(q.y);
        let frac = ((q.x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        1.0 + (self.seed_image_weight(q.y) - 1.0) * frac
    }

    /// Unstable weight at a row-reduced point known to lie in `P̆`, if it is
    /// available without pulling back.
    fn terminal_weight(&self, q: PlanePoint) -> Option<f64> {
        if q.x <= self.seed_image_x(q.y) {
            return Some(self.interpolation_weight(q));
        }
        let geo = self.geo();
        if geo.in_e(q) && q.x <= geo.theta_unchecked(q.y) {
            return Some(1.0);
        }
        None
    }

    /// The unstable weight `ω ≥ 1`; equal to 1 off the row translates of `P̆`.
    pub fn weight_u(&self, p: PlanePoint) -> Result<WeightU> {
        if !(p.is_finite() && p.x + p.y >= 0.0) {
            return Err(Error::PointDomain {
                x: p.x,
                y: p.y,
                domain: "x + y >= 0",
            });
        }
        Ok(WeightU {
            omega: self.omega(p)?,
        })
    }

    fn omega(&self, p: PlanePoint) -> Result<f64> {
        let geo = *self.geo();
        let (_, mut q) = reduce_row(p);
        if q.x < seed_curve_x(q.y) {
            return Ok(1.0);
        }
        let on_boundary = q.y > 0.0 && q.y < 0.5 && q.x >= geo.theta_unchecked(q.y);
        if on_boundary {
            q.x = geo.theta_unchecked(q.y);
        }
        let lm = self.dynamics.local_map();
        let flow = geo.flow();
        let cap = (q.x / self.spec.alpha_hat).ceil().max(0.0) as usize + 8;
        let mut chain = Vec::with_capacity(16);
        let mut cur = q;
        let start_weight = loop {
            if let Some(w) = self.terminal_weight(cur) {
                break w;
            }
            if chain.len() >= cap {
                return Err(Error::PullbackCap {
                    x: q.x,
                    y: q.y,
                    cap,
                    last_x: cur.x,
                    last_y: cur.y,
                });
            }
            cur = if on_boundary {
                // φ preserves the boundary curve; pulling back along it with φ⁻¹
                // would double the rounding error at every step
                let y = flow.flow_unchecked(cur.y, -1.0);
                PlanePoint::new(geo.theta_unchecked(y), y)
            } else {
                lm.phi_inv_unchecked(cur)?
            };
            chain.push(cur);
        };
        if chain.is_empty() {
            return Ok(start_weight);
        }
        let mut u = self
            .dynamics
            .fu_dir_with(cur, PullbackMode::Shortcuts)?
            .dir;
        let mut omega = start_weight;
        for r in chain.iter().rev() {
            let w = lm.dphi_unchecked(*r).apply(u);
            let rho = w.norm();
            omega *= (self.growth / rho).max(1.0);
            u = (1.0 / rho) * w;
        }
        Ok(omega)
    }

    /// Factor `c` with `⦀v⦀ = c|v|` for `v` in the given bundle at `p`.
    pub fn final_weight(&self, p: PlanePoint, bundle: Bundle) -> Result<f64> {
        if !p.is_finite() {
            return Err(Error::PointDomain {
                x: p.x,
                y: p.y,
                domain: "finite plane",
            });
        }
        if p.x + p.y < 0.0 {
            let swapped = match bundle {
                Bundle::Stable => Bundle::Unstable,
                Bundle::Unstable => Bundle::Stable,
                Bundle::Untagged => return Err(Error::Untagged),
            };
            return self.final_weight(sigma(p), swapped);
        }
        let eps = self.spec.epsilon;
        match bundle {
            Bundle::Untagged => Err(Error::Untagged),
            Bundle::Stable if p.y < 0.0 => Ok((-eps * p.y).exp()),
            Bundle::Unstable if p.y < 0.0 => Ok((-eps * p.y).exp() * self.omega(p)?),
            Bundle::Stable => Ok((-eps * self.ell(p)).exp()),
            Bundle::Unstable => self.omega(p),
        }
    }

    pub fn final_norm(&self, v: &TangentVector) -> Result<f64> {
        Ok(self.final_weight(v.base, v.bundle)? * v.dir.norm())
    }

    /// Decomposes `v` in the frame (stable, unstable) at `p`; returns the two
    /// coefficients and the frame.
    pub fn split(&self, p: PlanePoint, v: Vec2) -> Result<((f64, Vec2), (f64, Vec2))> {
        let s = self.dynamics.fs_dir(p)?.dir;
        let u = self.dynamics.fu_dir(p)?.dir;
        let det = s.cross(&u);
        if det.abs() < 1e-9 {
            return Err(Error::DegenerateFrame { x: p.x, y: p.y, det });
        }
        Ok(((v.cross(&u) / det, s), (s.cross(&v) / det, u)))
    }

    /// Norm of an arbitrary tangent vector in the metric that makes the two
    /// bundles orthogonal.
    pub fn metric_norm(&self, p: PlanePoint, v: Vec2) -> Result<f64> {
        let ((a, _), (b, _)) = self.split(p, v)?;
        let ws = self.final_weight(p, Bundle::Stable)?;
        let wu = self.final_weight(p, Bundle::Unstable)?;
        Ok((a * ws).hypot(b * wu))
    }
}

impl Default for Norms {
    fn default() -> Self {
        Norms::new(Dynamics::default(), 0.01).expect("default norms are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{in_u, tau};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norms() -> Norms {
        Norms::default()
    }

    #[test]
    fn weight_examples() {
        let n = norms();
        assert_eq!(n.weight_u(PlanePoint::new(0.0, 0.3)).unwrap().omega, 1.0);
        assert_eq!(n.weight_u(PlanePoint::new(3.0, 0.25)).unwrap().omega, 1.0);
        assert!(n.weight_u(PlanePoint::new(-3.0, 0.25)).is_err());
        // bottom edge: Dφ is an isometry on vertical vectors, so the seed image carries e^λ
        for &x in &[0.25, 0.5, 1.0, 1.5] {
            let w = n.weight_u(PlanePoint::new(x, 0.0)).unwrap().omega;
            assert!((w - (1.0 + (2.0 - 1.0) * x / 2.0)).abs() < 1e-12, "x={x} w={w}");
        }
        // recursion evaluated directly at (2, 0)
        let rho = n
            .dynamics()
            .df(PlanePoint::new(0.0, 0.0))
            .unwrap()
            .apply(Vec2::VERTICAL)
            .norm();
        assert!((n.weight_u(PlanePoint::new(2.0, 0.0)).unwrap().omega - 2.0 / rho).abs() < 1e-12);
    }

    #[test]
    fn weight_is_at_least_one_and_trivial_on_diagonal() {
        let n = norms();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let x: f64 = rng.gen_range(-12.0..12.0);
            let y: f64 = rng.gen_range(-12.0..12.0);
            let p = if x + y >= 0.0 { PlanePoint::new(x, y) } else { sigma(PlanePoint::new(x, y)) };
            let w = n.weight_u(p).unwrap().omega;
            assert!(w >= 1.0 - 1e-12);
            let d = PlanePoint::new(x, -x);
            assert_eq!(n.weight_u(d).unwrap().omega, 1.0);
        }
    }

    #[test]
    fn weight_is_row_invariant() {
        let n = norms();
        for i in 0..200 {
            let p = PlanePoint::new(0.07 * i as f64, 0.013 * i as f64 % 1.0);
            let a = n.weight_u(p).unwrap().omega;
            let b = n.weight_u(tau(tau(p))).unwrap().omega;
            // the Reeb-side jacobian carries finite-difference noise in t
            assert!((a - b).abs() < 1e-8 * a, "{p:?}: {a} vs {b}");
        }
    }

    #[test]
    fn unstable_weight_expands_on_samples() {
        let n = norms();
        let d = n.dynamics();
        let e = 2.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut count = 0;
        while count < 2000 {
            let p = PlanePoint::new(rng.gen_range(-12.0..12.0), rng.gen_range(-12.0..12.0));
            if d.geometry().in_breve_p_row(p).is_none() {
                continue;
            }
            count += 1;
            let u = d.fu_dir(p).unwrap().dir;
            let q = d.f(p).unwrap();
            let du = d.df(p).unwrap().apply(u);
            let ratio = n.weight_u(q).unwrap().omega * du.norm() / n.weight_u(p).unwrap().omega;
            assert!(ratio >= e * (1.0 - 1e-6), "{p:?}: {ratio}");
        }
    }

    #[test]
    fn final_norm_examples() {
        let n = norms();
        let eps: f64 = 0.01;
        let w = n.final_weight(PlanePoint::new(5.0, -2.0), Bundle::Stable).unwrap();
        assert!((w - (2.0 * eps).exp()).abs() < 1e-15);
        for &x in &[0.5, 2.0, 7.3] {
            let p = PlanePoint::new(x, -x);
            let s = n.final_weight(p, Bundle::Stable).unwrap();
            let u = n.final_weight(p, Bundle::Unstable).unwrap();
            assert!((s - (eps * x).exp()).abs() < 1e-14);
            assert!((u - s).abs() < 1e-14);
        }
        let v = TangentVector::new(PlanePoint::new(1.0, 1.0), Vec2::VERTICAL, Bundle::Untagged);
        assert!(matches!(n.final_norm(&v), Err(Error::Untagged)));
    }

    #[test]
    fn upper_half_stable_ratio_is_two_epsilon() {
        let n = norms();
        let d = n.dynamics();
        for &(x, y) in &[(3.0, 2.7), (9.0, 1.9), (1.0, 3.6), (20.0, 4.8)] {
            let p = PlanePoint::new(x, y);
            let q = d.f(p).unwrap();
            let r = n.final_weight(q, Bundle::Stable).unwrap() / n.final_weight(p, Bundle::Stable).unwrap();
            assert!((r - (-0.02f64).exp()).abs() < 1e-12, "{p:?}: {r}");
        }
    }

    #[test]
    fn ell_and_b_curve() {
        let n = norms();
        assert_eq!(n.ell(PlanePoint::new(1.0, 0.2)), 0.0);
        let b3 = n.b_curve(3);
        assert!(b3.has_reeb_arc());
        assert!(!n.b_curve(2).has_reeb_arc());
        let th = n.geo().theta(0.25).unwrap();
        assert_eq!(b3.x_at(0.25), th);
        assert_eq!(b3.x_at(0.05), 6.0);
        // left of the seed curve the weight is Euclidean
        assert_eq!(n.ell(PlanePoint::new(-2.85, 2.9)), 0.0);
        // continuity of ℓ across the row seam
        for i in 0..50 {
            let x = -3.0 + 0.2 * i as f64;
            let lo = n.ell(PlanePoint::new(x, 2.0 - 1e-12));
            let hi = n.ell(PlanePoint::new(x, 2.0));
            assert!((lo - hi).abs() < 1e-9, "x={x}: {lo} vs {hi}");
        }
        let poly = b3.polyline(10);
        assert_eq!(poly.first().unwrap(), &PlanePoint::new(3.0, 3.0));
        assert_eq!(poly.last().unwrap(), &PlanePoint::new(4.0, 4.0));
    }

    #[test]
    fn metric_norm_properties() {
        let n = norms();
        let d = n.dynamics();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let p = PlanePoint::new(rng.gen_range(-12.0..12.0), rng.gen_range(-12.0..12.0));
            let v = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = n.metric_norm(p, v).unwrap();
            let ((a, s), (b, u)) = n.split(p, v).unwrap();
            let ws = n.final_weight(p, Bundle::Stable).unwrap();
            let wu = n.final_weight(p, Bundle::Unstable).unwrap();
            assert!(m >= (a * ws).abs() - 1e-12 && m >= (b * wu).abs() - 1e-12);
            let recomposed = a * s + b * u;
            assert!((recomposed - v).norm() < 1e-12);
            let fu = d.fu_dir(p).unwrap().dir;
            let mu = n.metric_norm(p, 2.5 * fu).unwrap();
            assert!((mu - 2.5 * wu).abs() < 1e-9 * mu);
        }
        let p = PlanePoint::new(0.2, 0.9);
        assert!(n.metric_norm(p, Vec2::VERTICAL).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn bounded_near_band() {
        let n = norms();
        let d = n.dynamics();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut seen = 0;
        while seen < 500 {
            let p = PlanePoint::new(rng.gen_range(-12.0..12.0), rng.gen_range(-12.0..12.0));
            let q = d.f(p).unwrap();
            if !(in_u(p) || in_u(q)) {
                continue;
            }
            seen += 1;
            let j = d.df(p).unwrap();
            for b in [Bundle::Stable, Bundle::Unstable] {
                let v = d.bundle_dir(p, b).unwrap();
                let r = n.final_weight(q, b).unwrap() * j.apply(v).norm() / n.final_weight(p, b).unwrap();
                assert!((1e-3..=1e3).contains(&r), "{p:?} {b:?} {r}");
            }
        }
    }

    #[test]
    fn rejects_large_epsilon() {
        assert!(Norms::new(Dynamics::default(), 0.1).is_err());
    }
}
