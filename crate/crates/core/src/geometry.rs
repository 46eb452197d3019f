//! Plane symmetries, the fixed regions of the construction, the Reeb boundary
//! curve and point classification.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar_flow::ScalarFlow;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        PlanePoint { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Sup-norm distance.
    pub fn sup_dist(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn dist(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl Add<Vec2> for PlanePoint {
    type Output = PlanePoint;
    fn add(self, v: Vec2) -> PlanePoint {
        PlanePoint::new(self.x + v.x, self.y + v.y)
    }
}

impl Sub for PlanePoint {
    type Output = Vec2;
    fn sub(self, o: PlanePoint) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// A tangent vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const VERTICAL: Vec2 = Vec2 { x: 0.0, y: 1.0 };
    pub const HORIZONTAL: Vec2 = Vec2 { x: 1.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(&self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn dot(&self, o: &Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(&self, o: &Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    /// Unsigned angle between the lines spanned by `self` and `o`, in `[0, π/2]`.
    pub fn line_angle(&self, o: &Vec2) -> f64 {
        self.cross(o).abs().atan2(self.dot(o).abs())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

/// Translation by `(−1, 1)`.
pub fn tau(p: PlanePoint) -> PlanePoint {
    PlanePoint::new(p.x - 1.0, p.y + 1.0)
}

pub fn tau_pow(p: PlanePoint, n: i64) -> PlanePoint {
    let n = n as f64;
    PlanePoint::new(p.x - n, p.y + n)
}

/// Reflection `(x, y) ↦ (−y, −x)` in the anti-diagonal.
pub fn sigma(p: PlanePoint) -> PlanePoint {
    PlanePoint::new(-p.y, -p.x)
}

/// Differential of [`sigma`] (constant).
pub fn dsigma(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, -v.x)
}

/// Reduces `p` to the fundamental row `y ∈ [0, 1)`, returning the row index `n`
/// and `τ^{−n}(p)`.
pub fn reduce_row(p: PlanePoint) -> (i64, PlanePoint) {
    let n = p.y.floor();
    (n as i64, PlanePoint::new(p.x + n, p.y - n))
}

/// Row-relative abscissa of the seed curve: `0` on the lower half, `1 − 2y` above.
pub fn seed_curve_x(y: f64) -> f64 {
    if y <= 0.5 {
        0.0
    } else {
        1.0 - 2.0 * y
    }
}

/// `|x + y| < 1`: the band around the anti-diagonal where ratios are not estimated.
pub fn in_u(p: PlanePoint) -> bool {
    (p.x + p.y).abs() < 1.0
}

/// Half-plane `x + y ≥ 0` on which the norms are built directly.
pub fn in_half_plane(p: PlanePoint) -> bool {
    p.x + p.y >= 0.0
}

/// The crossing strip `{n − ¼ < y < n, x + y ≥ 0}`.
pub fn in_crossing_strip(p: PlanePoint, n: i64) -> bool {
    let n = n as f64;
    p.y > n - 0.25 && p.y < n && in_half_plane(p)
}

/// Whether `p` lies in some row translate `τⁿ([−2, ∞) × [0, 1])` of the domain of φ.
pub fn in_domain_union(p: PlanePoint) -> bool {
    reduce_row(p).1.x >= -2.0
}

/// Whether `p` lies in some row translate of the image `[0, ∞) × [0, 1]` of φ.
pub fn in_image_union(p: PlanePoint) -> bool {
    reduce_row(p).1.x >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionId {
    A,
    B,
    Dblend,
    Ctranslate,
    Goutside,
    Rinside,
    SigmaSide,
    OffDomain,
}

/// Shape of the Reeb boundary curve `x(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReebCurveParams {
    /// Rate in `x′(t) = 2(1 − e^{−k(t − t0)})`.
    pub k: f64,
    /// Onset time, `t_of_y(¼ − δ)`.
    pub t0: f64,
    pub x_base: f64,
}

/// The flow together with the Reeb boundary curve; everything region-shaped
/// derives from it.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    flow: ScalarFlow,
    curve: ReebCurveParams,
}

impl Geometry {
    pub fn new(flow: ScalarFlow, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Config(format!("k must be positive, got {k}")));
        }
        let t0 = flow.t_of_y(0.25 - flow.delta())?;
        if !(t0 < 0.0) {
            return Err(Error::Config(format!("onset time t0 = {t0} must be negative")));
        }
        Ok(Geometry {
            flow,
            curve: ReebCurveParams { k, t0, x_base: 4.0 },
        })
    }

    pub fn flow(&self) -> &ScalarFlow {
        &self.flow
    }

    pub fn curve(&self) -> &ReebCurveParams {
        &self.curve
    }

    pub fn t0(&self) -> f64 {
        self.curve.t0
    }

    pub fn x_curve(&self, t: f64) -> f64 {
        let s = t - self.curve.t0;
        if s <= 0.0 {
            return self.curve.x_base;
        }
        let k = self.curve.k;
        self.curve.x_base + 2.0 * s + (2.0 / k) * (-k * s).exp_m1()
    }

    pub fn x_curve_prime(&self, t: f64) -> f64 {
        let s = t - self.curve.t0;
        if s <= 0.0 {
            0.0
        } else {
            -2.0 * (-self.curve.k * s).exp_m1()
        }
    }

    /// `2 − (x(t+1) − x(t))`, evaluated without cancellation.
    pub fn slack(&self, t: f64) -> f64 {
        let k = self.curve.k;
        let s = t - self.curve.t0;
        if s >= 0.0 {
            (2.0 / k) * (-k * s).exp() * (-(-k).exp_m1())
        } else if s >= -1.0 {
            let u = s + 1.0;
            2.0 - 2.0 * u - (2.0 / k) * (-k * u).exp_m1()
        } else {
            2.0
        }
    }

    fn check_half(y: f64) -> Result<()> {
        if y > 0.0 && y < 0.5 {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "y",
                value: y,
                domain: "(0, 1/2)",
            })
        }
    }

    /// Curve time of the height `y ∈ (0, ½)`, folded at `¼`.
    pub(crate) fn time_of_height(&self, y: f64) -> f64 {
        self.flow.time_coordinate(y.min(0.5 - y))
    }

    /// Abscissa of the Reeb boundary at height `y`.
    pub fn theta(&self, y: f64) -> Result<f64> {
        Self::check_half(y)?;
        Ok(self.theta_unchecked(y))
    }

    pub(crate) fn theta_unchecked(&self, y: f64) -> f64 {
        if (y - 0.25).abs() <= self.flow.delta() {
            return self.curve.x_base;
        }
        self.x_curve(self.time_of_height(y))
    }

    pub fn theta_prime(&self, y: f64) -> Result<f64> {
        Self::check_half(y)?;
        Ok(self.theta_prime_unchecked(y))
    }

    pub(crate) fn theta_prime_unchecked(&self, y: f64) -> f64 {
        if (y - 0.25).abs() <= self.flow.delta() {
            return 0.0;
        }
        let xp = self.x_curve_prime(self.time_of_height(y));
        if xp == 0.0 {
            return 0.0;
        }
        xp / self.flow.field(y)
    }

    pub fn row_index(&self, p: PlanePoint) -> i64 {
        reduce_row(p).0
    }

    /// Whether `p` lies in a row translate of the Reeb component.
    pub fn in_reeb(&self, p: PlanePoint) -> bool {
        let (_, q) = reduce_row(p);
        q.y > 0.0 && q.y < 0.5 && q.x >= self.theta_unchecked(q.y)
    }

    /// Row index `n` such that `p ∈ τⁿ(P̆)`, where
    /// `P̆ = [0, ∞) × [0, ½] ∪ {x ≥ 1 − 2y, ½ ≤ y ≤ 1}`.
    pub fn in_breve_p_row(&self, p: PlanePoint) -> Option<i64> {
        let (n, q) = reduce_row(p);
        (q.x >= seed_curve_x(q.y)).then_some(n)
    }

    /// The strip `[2, 4] × (¼ − δ, ¼ + δ)`, in any row.
    pub fn in_e(&self, p: PlanePoint) -> bool {
        let (_, q) = reduce_row(p);
        (2.0..=4.0).contains(&q.x) && (q.y - 0.25).abs() < self.flow.delta()
    }

    /// The strip `[0, 4] × (¼ − e^{−λ}δ, ¼ + e^{−λ}δ)`, in any row.
    pub fn in_e_prime(&self, p: PlanePoint) -> bool {
        let (_, q) = reduce_row(p);
        (0.0..=4.0).contains(&q.x) && (q.y - 0.25).abs() < self.flow.delta() / self.flow.growth()
    }

    /// Zones where the unstable foliation is vertical for structural reasons:
    /// `[−2, ∞) × [¾, 1]` and `[−2, 3] × [0, ½]`, in any row.
    pub fn in_vertical_zone(&self, p: PlanePoint) -> bool {
        let (_, q) = reduce_row(p);
        q.x >= -2.0 && (q.y >= 0.75 || (q.x <= 3.0 && q.y <= 0.5))
    }

    /// Region of a point already reduced to `y ∈ [0, 1)`, assuming `x ≥ −2`.
    pub(crate) fn classify_reduced(&self, x: f64, y: f64) -> RegionId {
        if x <= -1.0 {
            RegionId::A
        } else if x <= 0.0 && y <= 0.5 {
            RegionId::B
        } else if x <= 0.0 && y <= 0.75 {
            RegionId::Dblend
        } else if (x >= -1.0 && y >= 0.75) || y >= 0.5 || y == 0.0 || x <= 1.0 {
            RegionId::Ctranslate
        } else if x < self.theta_unchecked(y) {
            RegionId::Goutside
        } else {
            RegionId::Rinside
        }
    }

    pub fn classify(&self, p: PlanePoint) -> RegionId {
        if !p.is_finite() {
            return RegionId::OffDomain;
        }
        let (_, q) = reduce_row(p);
        if q.x >= -2.0 {
            self.classify_reduced(q.x, q.y)
        } else if in_image_union(sigma(p)) {
            RegionId::SigmaSide
        } else {
            RegionId::OffDomain
        }
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::new(ScalarFlow::default(), 1.0).expect("default geometry is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geo() -> Geometry {
        Geometry::default()
    }

    #[test]
    fn symmetries() {
        assert_eq!(tau(PlanePoint::new(0.0, 0.0)), PlanePoint::new(-1.0, 1.0));
        let p = PlanePoint::new(2.0, -3.0);
        assert_eq!(sigma(tau(p)), tau(sigma(p)));
        assert_eq!(sigma(sigma(p)), p);
        assert_eq!(sigma(PlanePoint::new(-0.3, -1.7)), PlanePoint::new(1.7, 0.3));
        assert_eq!(tau_pow(p, 3), tau(tau(tau(p))));
        assert_eq!(tau_pow(tau_pow(p, -4), 4), p);
        assert_eq!(dsigma(Vec2::HORIZONTAL), Vec2::new(-0.0, -1.0));
    }

    #[test]
    fn onset_time_for_defaults() {
        // ¼ − δ = 7/32 sits in the linear zone, ⅛ does not; t0 ≈ −2.
        let g = geo();
        assert!(g.t0() < 0.0);
        assert_eq!(g.flow().y_of_t(g.t0()).unwrap(), 0.25 - 1.0 / 32.0);
    }

    #[test]
    fn x_curve_closed_form_and_quadrature() {
        let g = geo();
        let t0 = g.t0();
        assert_eq!(g.x_curve(t0 - 7.0), 4.0);
        let expect = 6.0 - 2.0 * (1.0 - (-1.0f64).exp());
        assert!((g.x_curve(t0 + 1.0) - expect).abs() < 1e-14);
        // Simpson on x′ over [t0, t0 + 1]
        let n = 2000;
        let h = 1.0 / n as f64;
        let mut acc = g.x_curve_prime(t0) + g.x_curve_prime(t0 + 1.0);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * g.x_curve_prime(t0 + i as f64 * h);
        }
        assert!((4.0 + acc * h / 3.0 - expect).abs() < 1e-10);
        assert_eq!(g.x_curve_prime(t0), 0.0);
        assert!((g.x_curve_prime(t0 + 1e-9)).abs() < 1e-8);
    }

    #[test]
    fn x_curve_increments_below_two_and_shrinking_gap() {
        let g = geo();
        let t = g.t0() + 3.0;
        let d = g.x_curve(t + 1.0) - g.x_curve(t);
        assert!(d < 2.0);
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let t = g.t0() - 2.0 + 0.5 * i as f64;
            let gap = g.slack(t);
            let direct = 2.0 - (g.x_curve(t + 1.0) - g.x_curve(t));
            assert!((gap - direct).abs() < 1e-12, "t={t}");
            assert!(gap > 0.0 && gap <= prev);
            prev = gap;
        }
    }

    #[test]
    fn theta_values() {
        let g = geo();
        let d = g.flow().delta();
        assert_eq!(g.theta(0.25).unwrap(), 4.0);
        assert_eq!(g.theta(0.25 + d / 2.0).unwrap(), 4.0);
        assert_eq!(g.theta(0.25 - d / 2.0).unwrap(), 4.0);
        assert_eq!(g.theta(0.125).unwrap(), g.x_curve(0.0));
        assert_eq!(g.theta(0.375).unwrap(), g.theta(0.125).unwrap());
        assert!((g.theta(0.125).unwrap() - (6.0 + 2.0 * (-2.0f64).exp())).abs() < 1e-9);
        assert!(g.theta(0.0).is_err());
        assert!(g.theta(0.5).is_err());
    }

    #[test]
    fn theta_shape() {
        let g = geo();
        let d = g.flow().delta();
        let mut prev = f64::INFINITY;
        for i in 1..1000 {
            let y = (0.25 - d) * i as f64 / 1000.0;
            let th = g.theta(y).unwrap();
            assert!(th < prev);
            prev = th;
        }
        for i in 0..=20 {
            let y = 0.25 - d + 2.0 * d * i as f64 / 20.0;
            assert_eq!(g.theta_prime(y).unwrap(), 0.0);
        }
    }

    #[test]
    fn theta_prime_matches_finite_differences() {
        let g = geo();
        let h = 1e-6;
        for i in 1..200 {
            let y = 0.5 * i as f64 / 200.0;
            let fd = (g.theta(y + h).unwrap() - g.theta(y - h).unwrap()) / (2.0 * h);
            let an = g.theta_prime(y).unwrap();
            assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "y={y}: {fd} vs {an}");
        }
    }

    #[test]
    fn boundary_map_consistency() {
        let g = geo();
        for i in 1..400 {
            let y = 0.25 * i as f64 / 400.0;
            let t = g.flow().t_of_y(y).unwrap();
            let gy = g.flow().g(y).unwrap();
            assert!((g.theta(gy).unwrap() - g.x_curve(t + 1.0)).abs() < 1e-8, "y={y}");
        }
    }

    #[test]
    fn classify_examples() {
        let g = geo();
        assert_eq!(g.classify(PlanePoint::new(-1.5, 0.3)), RegionId::A);
        assert_eq!(g.classify(PlanePoint::new(10.0, 0.26)), RegionId::Rinside);
        assert_eq!(g.classify(PlanePoint::new(3.0, 0.875)), RegionId::Ctranslate);
        assert_eq!(g.classify(PlanePoint::new(-0.5, 0.3)), RegionId::B);
        assert_eq!(g.classify(PlanePoint::new(-0.5, 0.6)), RegionId::Dblend);
        assert_eq!(g.classify(PlanePoint::new(2.0, 0.3)), RegionId::Goutside);
        assert_eq!(g.classify(PlanePoint::new(0.5, 0.3)), RegionId::Ctranslate);
        assert_eq!(g.classify(PlanePoint::new(7.0, 0.0)), RegionId::Ctranslate);
        assert_eq!(g.classify(PlanePoint::new(-5.0, 0.3)), RegionId::SigmaSide);
        // row translate of A
        assert_eq!(g.classify(PlanePoint::new(-4.5, 3.3)), RegionId::A);
        assert_eq!(g.classify(PlanePoint::new(f64::NAN, 0.0)), RegionId::OffDomain);
    }

    #[test]
    fn classification_is_total() {
        let g = geo();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let p = PlanePoint::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            assert_ne!(g.classify(p), RegionId::OffDomain, "{p:?}");
        }
    }

    #[test]
    fn region_predicates() {
        let g = geo();
        assert!(in_u(PlanePoint::new(0.4, 0.5)));
        assert!(!in_u(PlanePoint::new(0.5, 0.5)));
        assert!(!in_u(PlanePoint::new(-0.5, -0.5)));
        assert!(g.in_e(PlanePoint::new(3.0, 0.25)));
        assert!(g.in_e(PlanePoint::new(2.0, 1.25)));
        assert!(!g.in_e(PlanePoint::new(4.5, 0.25)));
        assert!(g.in_e_prime(PlanePoint::new(0.5, 0.26)));
        assert!(!g.in_e_prime(PlanePoint::new(0.5, 0.25 + 0.02)));
        assert_eq!(g.in_breve_p_row(PlanePoint::new(0.0, 0.3)), Some(0));
        assert_eq!(g.in_breve_p_row(PlanePoint::new(-0.6, 0.75)), None);
        assert_eq!(g.in_breve_p_row(PlanePoint::new(-0.5, 0.75)), Some(0));
        assert_eq!(g.in_breve_p_row(PlanePoint::new(-2.0, 2.2)), Some(2));
        assert!(g.in_reeb(PlanePoint::new(5.0, 0.25)));
        assert!(g.in_reeb(PlanePoint::new(4.0, 1.25)));
        assert!(!g.in_reeb(PlanePoint::new(5.0, 0.6)));
        assert!(in_crossing_strip(PlanePoint::new(0.0, 0.9), 1));
        assert!(!in_crossing_strip(PlanePoint::new(-1.0, 0.9), 1));
        assert!(g.in_vertical_zone(PlanePoint::new(10.0, 0.875)));
        assert!(g.in_vertical_zone(PlanePoint::new(2.5, 0.2)));
        assert!(!g.in_vertical_zone(PlanePoint::new(3.5, 0.2)));
    }

    #[test]
    fn row_reduction_at_integer_heights() {
        let (n, q) = reduce_row(PlanePoint::new(1.0, 2.0));
        assert_eq!(n, 2);
        assert_eq!(q, PlanePoint::new(3.0, 0.0));
        let (n, q) = reduce_row(PlanePoint::new(0.0, -0.5));
        assert_eq!(n, -1);
        assert_eq!(q, PlanePoint::new(-1.0, 0.5));
    }

    #[test]
    fn vector_helpers() {
        let a = Vec2::new(1.0, 0.0);
        let b = Vec2::new(-1.0, 1e-9);
        assert!(a.line_angle(&b) < 1.1e-9);
        assert!((Vec2::new(3.0, 4.0).norm() - 5.0).abs() < 1e-15);
    }
}
