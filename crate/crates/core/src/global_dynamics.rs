//! The global map `F = τ∘Φ`, its mirror extension through `σ`, and the tangent
//! fields of the two invariant foliations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dsigma, in_domain_union, in_image_union, reduce_row, sigma, tau_pow, Geometry, PlanePoint, Vec2,
};
use crate::local_map::{Jacobian2, LocalMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bundle {
    Unstable,
    Stable,
    Untagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: PlanePoint,
    pub dir: Vec2,
    pub bundle: Bundle,
}

impl TangentVector {
    pub fn new(base: PlanePoint, dir: Vec2, bundle: Bundle) -> Self {
        TangentVector { base, dir, bundle }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub points: Vec<PlanePoint>,
    /// Iterate index of `points[0]`.
    pub start_index: i64,
}

/// How far `fu_dir` may shortcut the pullback.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullbackMode {
    /// Stop at any zone where the unstable direction is known.
    Shortcuts,
    /// Stop only on the mirror side, where the unstable foliation is vertical by
    /// definition, or on the Reeb component.
    Definition,
}

const LEAF_TOL: f64 = 1e-11;
/// Step-doubling differences below this are treated as roundoff in the field.
const LEAF_NOISE: f64 = 1e-13;
const LEAF_MAX_DEPTH: u32 = 16;

#[derive(Debug, Clone, Copy)]
pub struct Dynamics {
    lm: LocalMap,
    alpha_hat: f64,
}

impl Dynamics {
    pub fn new(lm: LocalMap) -> Result<Self> {
        let alpha_hat = lm.alpha_estimate(200, 100)?;
        Ok(Dynamics { lm, alpha_hat })
    }

    pub fn local_map(&self) -> &LocalMap {
        &self.lm
    }

    pub fn geometry(&self) -> &Geometry {
        self.lm.geometry()
    }

    pub fn alpha_hat(&self) -> f64 {
        self.alpha_hat
    }

    fn check_finite(p: PlanePoint) -> Result<()> {
        if p.is_finite() {
            Ok(())
        } else {
            Err(Error::PointDomain {
                x: p.x,
                y: p.y,
                domain: "finite plane",
            })
        }
    }

    /// `F` on the row translates of `P`.
    fn f_domain(&self, p: PlanePoint) -> PlanePoint {
        let (n, q) = reduce_row(p);
        tau_pow(self.lm.phi_unchecked(q), n + 1)
    }

    /// `σ Φ⁻¹ τ⁻¹ σ`, valid wherever `σ(p)` lies in a row translate of `P′`.
    fn f_mirror(&self, p: PlanePoint) -> Result<PlanePoint> {
        let (n, q) = reduce_row(tau_pow(sigma(p), -1));
        let r = self.lm.phi_inv_unchecked(q)?;
        Ok(sigma(tau_pow(r, n)))
    }

    pub fn f(&self, p: PlanePoint) -> Result<PlanePoint> {
        Self::check_finite(p)?;
        if in_domain_union(p) {
            Ok(self.f_domain(p))
        } else {
            self.f_mirror(p)
        }
    }

    /// Both branch formulas at a point covered by both; used by the overlap check.
    pub fn f_both_branches(&self, p: PlanePoint) -> Option<Result<(PlanePoint, PlanePoint)>> {
        if !(in_domain_union(p) && in_image_union(sigma(p))) {
            return None;
        }
        Some(self.f_mirror(p).map(|m| (self.f_domain(p), m)))
    }

    pub fn f_inv(&self, p: PlanePoint) -> Result<PlanePoint> {
        Self::check_finite(p)?;
        if in_image_union(p) {
            let (n, q) = reduce_row(p);
            Ok(tau_pow(self.lm.phi_inv_unchecked(q)?, n - 1))
        } else {
            Ok(sigma(self.f_domain(sigma(p))))
        }
    }

    pub fn df(&self, p: PlanePoint) -> Result<Jacobian2> {
        Self::check_finite(p)?;
        if in_domain_union(p) {
            Ok(self.lm.dphi_unchecked(reduce_row(p).1))
        } else {
            let (_, q) = reduce_row(tau_pow(sigma(p), -1));
            let r = self.lm.phi_inv_unchecked(q)?;
            let inner = self.lm.dphi_unchecked(r).inverse();
            Ok(Jacobian2::REFLECTION.compose(&inner).compose(&Jacobian2::REFLECTION))
        }
    }

    pub fn orbit(&self, p: PlanePoint, n_from: i64, n_to: i64) -> Result<OrbitSegment> {
        if n_from > n_to {
            return Err(Error::Domain {
                what: "n_from - n_to",
                value: (n_from - n_to) as f64,
                domain: "n_from <= n_to",
            });
        }
        let mut start = p;
        let mut k = 0;
        while k > n_from {
            start = self.f_inv(start)?;
            k -= 1;
        }
        while k < n_from {
            start = self.f(start)?;
            k += 1;
        }
        let mut points = Vec::with_capacity((n_to - n_from + 1) as usize);
        points.push(start);
        for _ in n_from..n_to {
            let next = self.f(*points.last().expect("nonempty"))?;
            points.push(next);
        }
        Ok(OrbitSegment {
            points,
            start_index: n_from,
        })
    }

    /// Unstable direction at a row-reduced point if it is known without pulling back.
    fn known_unstable(&self, q: PlanePoint, mode: PullbackMode) -> Option<Vec2> {
        if q.x <= 0.0 {
            return Some(Vec2::VERTICAL);
        }
        let geo = self.geometry();
        if q.y > 0.0 && q.y < 0.5 && q.x >= geo.theta_unchecked(q.y) {
            return Some(Vec2::new(geo.theta_prime_unchecked(q.y), 1.0).normalized());
        }
        if mode == PullbackMode::Shortcuts && (geo.in_vertical_zone(q) || geo.in_e(q)) {
            return Some(Vec2::VERTICAL);
        }
        None
    }

    /// Unit unstable direction with positive `y` component.
    pub fn fu_dir(&self, p: PlanePoint) -> Result<TangentVector> {
        self.fu_dir_with(p, PullbackMode::Shortcuts)
    }

    pub fn fu_dir_with(&self, p: PlanePoint, mode: PullbackMode) -> Result<TangentVector> {
        Self::check_finite(p)?;
        let dir = if in_domain_union(p) {
            self.unstable_on_domain(reduce_row(p).1, mode)?
        } else {
            Vec2::VERTICAL
        };
        Ok(TangentVector::new(p, dir, Bundle::Unstable))
    }

    fn unstable_on_domain(&self, q0: PlanePoint, mode: PullbackMode) -> Result<Vec2> {
        if let Some(d) = self.known_unstable(q0, mode) {
            return Ok(d);
        }
        let cap = 64usize.max((q0.x / self.alpha_hat).ceil() as usize + 8);
        let mut chain = Vec::with_capacity(32);
        let mut q = q0;
        let base = loop {
            if chain.len() >= cap {
                return Err(Error::PullbackCap {
                    x: q0.x,
                    y: q0.y,
                    cap,
                    last_x: q.x,
                    last_y: q.y,
                });
            }
            let prev = reduce_row(self.lm.phi_inv_unchecked(q)?).1;
            chain.push(prev);
            if let Some(d) = self.known_unstable(prev, mode) {
                break d;
            }
            q = prev;
        };
        let mut v = base;
        for r in chain.iter().rev() {
            v = self.lm.dphi_unchecked(*r).apply(v).normalized();
        }
        Ok(v)
    }

    /// Unit stable direction with positive `x` component.
    pub fn fs_dir(&self, p: PlanePoint) -> Result<TangentVector> {
        Self::check_finite(p)?;
        let dir = if in_domain_union(p) {
            Vec2::HORIZONTAL
        } else {
            let u = self.fu_dir(sigma(p))?.dir;
            let m = dsigma(u);
            if m.x < 0.0 {
                -m
            } else {
                m
            }
        };
        Ok(TangentVector::new(p, dir, Bundle::Stable))
    }

    pub fn bundle_dir(&self, p: PlanePoint, bundle: Bundle) -> Result<Vec2> {
        match bundle {
            Bundle::Unstable => Ok(self.fu_dir(p)?.dir),
            Bundle::Stable => Ok(self.fs_dir(p)?.dir),
            Bundle::Untagged => Err(Error::Untagged),
        }
    }

    /// Polyline along the leaf through `p`, integrated with classical RK4 on the unit
    /// direction field for `arclength` in both directions. Ordered from the backward
    /// end to the forward end, with vertices `step` apart in arclength; each step is
    /// subdivided by step doubling where the field turns sharply.
    pub fn leaf_trace(&self, p: PlanePoint, bundle: Bundle, arclength: f64, step: f64) -> Result<Vec<PlanePoint>> {
        if !(step > 0.0 && step <= arclength) {
            return Err(Error::Domain {
                what: "step",
                value: step,
                domain: "(0, arclength]",
            });
        }
        let n = (arclength / step).ceil() as usize;
        let h = arclength / n as f64;
        let walk = |sign: f64| -> Result<Vec<PlanePoint>> {
            let mut pts = Vec::with_capacity(n);
            let mut q = p;
            for _ in 0..n {
                q = self.leaf_step(q, bundle, sign, h, 0)?;
                pts.push(q);
            }
            Ok(pts)
        };
        let mut back = walk(-1.0)?;
        back.reverse();
        back.push(p);
        back.extend(walk(1.0)?);
        Ok(back)
    }

    fn leaf_step(&self, q: PlanePoint, bundle: Bundle, sign: f64, h: f64, depth: u32) -> Result<PlanePoint> {
        let rk4 = |z: PlanePoint, h: f64| -> Result<PlanePoint> {
            let field = |z: PlanePoint| self.bundle_dir(z, bundle).map(|d| sign * d);
            let k1 = field(z)?;
            let k2 = field(z + (0.5 * h) * k1)?;
            let k3 = field(z + (0.5 * h) * k2)?;
            let k4 = field(z + h * k3)?;
            Ok(z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        };
        let whole = rk4(q, h)?;
        let half = rk4(rk4(q, 0.5 * h)?, 0.5 * h)?;
        let err = whole.dist(&half);
        if err <= LEAF_TOL * h || err <= LEAF_NOISE || depth >= LEAF_MAX_DEPTH {
            return Ok(half + (1.0 / 15.0) * (half - whole));
        }
        let mid = self.leaf_step(q, bundle, sign, 0.5 * h, depth + 1)?;
        self.leaf_step(mid, bundle, sign, 0.5 * h, depth + 1)
    }
}

impl Default for Dynamics {
    fn default() -> Self {
        Dynamics::new(LocalMap::default()).expect("default dynamics are valid")
    }
}
