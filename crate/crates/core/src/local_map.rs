//! The product map `φ(x, y) = (h_y(x), g(y))` from `P = [−2, ∞) × [0, 1]` onto
//! `P′ = [0, ∞) × [0, 1]`, its inverse and Jacobian.
//!
//! On the lower half of the row the horizontal map `h_y` is built from a
//! five-piece derivative profile: slope 1 up to `X/4`, a smoothstep ramp down to
//! a floor slope `f`, a flat stretch, a ramp to `e^{−λ}`, and an `e^{−λ}` plateau
//! of width `w` ending at the Reeb boundary `X = θ(y)`. Beyond `X` the map keeps
//! slope `e^{−λ}`, which is the contraction on the Reeb component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{reduce_row, Geometry, PlanePoint, RegionId, Vec2};
use crate::numeric::{newton_bracketed, smoothstep, smoothstep_integral, smoothstep_prime};

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Jacobian2 {
    pub const IDENTITY: Jacobian2 = Jacobian2::new(1.0, 0.0, 0.0, 1.0);
    /// Differential of the reflection `(x, y) ↦ (−y, −x)`.
    pub const REFLECTION: Jacobian2 = Jacobian2::new(0.0, -1.0, -1.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Jacobian2 { a11, a12, a21, a22 }
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a21 * v.x + self.a22 * v.y,
        )
    }

    /// `self · other`.
    pub fn compose(&self, o: &Jacobian2) -> Jacobian2 {
        Jacobian2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn inverse(&self) -> Jacobian2 {
        let d = self.det();
        Jacobian2::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    pub fn max_abs_diff(&self, o: &Jacobian2) -> f64 {
        (self.a11 - o.a11)
            .abs()
            .max((self.a12 - o.a12).abs())
            .max((self.a21 - o.a21).abs())
            .max((self.a22 - o.a22).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

/// Data of one member `h_y` of the horizontal family, indexed by curve time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub t: f64,
    /// Right end `x(t)` of the domain, the Reeb boundary abscissa.
    pub x_end: f64,
    /// Image of the right end, `x(t+1)`.
    pub x_image_end: f64,
    /// Floor slope of the middle stretch.
    pub floor: f64,
    /// `1 − floor`, kept separately for precision when the floor is close to 1.
    pub floor_gap: f64,
    pub ramp: f64,
    /// Width of the `e^{−λ}` plateau.
    pub plateau: f64,
    pub contraction: f64,
    /// `0, X/4, X/4 + r, X − w − r, X − w, X`.
    pub knots: [f64; 6],
    /// Values of `h` at the knots.
    pub values: [f64; 6],
}

impl ProfileParams {
    /// Derivative profile `s(x)`, extended by `e^{−λ}` beyond the right end.
    pub fn slope(&self, x: f64) -> f64 {
        let k = &self.knots;
        let e = self.contraction;
        if x <= k[1] {
            1.0
        } else if x >= k[4] {
            // first, so a collar narrower than an ulp still ends at e
            e
        } else if x < k[2] {
            1.0 - self.floor_gap * smoothstep((x - k[1]) / self.ramp)
        } else if x <= k[3] {
            self.floor
        } else {
            self.floor + (e - self.floor) * smoothstep((x - k[3]) / self.ramp)
        }
    }

    /// `h(x) = 2 + ∫₀ˣ s`, extended affinely with slope `e^{−λ}` beyond the right end.
    pub fn value(&self, x: f64) -> f64 {
        let k = &self.knots;
        let v = &self.values;
        if x <= k[1] {
            2.0 + x
        } else if x < k[2] {
            let u = (x - k[1]) / self.ramp;
            v[1] + self.ramp * (u - self.floor_gap * smoothstep_integral(u))
        } else if x <= k[3] {
            v[2] + self.floor * (x - k[2])
        } else if x < k[4] {
            let u = (x - k[3]) / self.ramp;
            v[3] + self.ramp * (self.floor * u + (self.contraction - self.floor) * smoothstep_integral(u))
        } else {
            self.x_image_end - self.contraction * (self.x_end - x)
        }
    }

    /// Inverse of [`Self::value`] on `[2, ∞)`.
    pub fn inverse(&self, xp: f64, tol: f64) -> Option<f64> {
        let k = &self.knots;
        let v = &self.values;
        if xp <= v[1] {
            Some(xp - 2.0)
        } else if xp < v[2] {
            newton_bracketed(|x| (self.value(x) - xp, self.slope(x)), k[1], k[2], tol, 100)
        } else if xp <= v[3] {
            Some(k[2] + (xp - v[2]) / self.floor)
        } else if xp < v[4] {
            newton_bracketed(|x| (self.value(x) - xp, self.slope(x)), k[3], k[4], tol, 100)
        } else {
            Some(self.x_end - (self.x_image_end - xp) / self.contraction)
        }
    }

    /// Left edge `X − w` of the plateau collar.
    pub fn collar_edge(&self) -> f64 {
        self.knots[4]
    }
}

/// The local map together with its profile schedule.
#[derive(Debug, Clone, Copy)]
pub struct LocalMap {
    geo: Geometry,
    w0: f64,
    r0: f64,
    contraction: f64,
    schedule_c: f64,
    root_tol: f64,
}

const DT_FD: f64 = 1e-4;

impl LocalMap {
    pub fn new(geo: Geometry, w0: f64, r0: f64, root_tol: f64) -> Result<Self> {
        if !(w0 > 0.0 && r0 > 0.0 && 2.0 * r0 + w0 < 3.0) {
            return Err(Error::Config(format!(
                "plateau width w0 = {w0} and ramp width r0 = {r0} must be positive with 2 r0 + w0 < 3"
            )));
        }
        if !(root_tol > 0.0 && root_tol < 1e-6) {
            return Err(Error::Config(format!("root_tol must lie in (0, 1e-6), got {root_tol}")));
        }
        let contraction = (-geo.flow().lambda()).exp();
        let map = LocalMap {
            geo,
            w0,
            r0,
            contraction,
            schedule_c: 4.0 * w0 * (1.0 - contraction),
            root_tol,
        };
        map.check_feasibility(1000)?;
        Ok(map)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geo
    }

    /// `e^{−λ}`.
    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    /// Solves the profile on a grid of `n` times spanning `[t0 − 2, t0 + 20]`.
    pub fn check_feasibility(&self, n: usize) -> Result<()> {
        let t0 = self.geo.t0();
        for i in 0..n {
            let t = t0 - 2.0 + 22.0 * i as f64 / (n - 1).max(1) as f64;
            self.profile_params(t)?;
        }
        Ok(())
    }

    /// Profile at curve time `t`, with the floor slope checked to lie in `(0, 1)`.
    pub fn profile_params(&self, t: f64) -> Result<ProfileParams> {
        let p = self.profile(t);
        if !(p.floor > 0.0 && p.floor_gap > 0.0 && p.floor.is_finite()) {
            return Err(Error::Infeasible { t, floor: p.floor });
        }
        Ok(p)
    }

    pub(crate) fn profile(&self, t: f64) -> ProfileParams {
        let e = self.contraction;
        let frozen = t <= self.geo.t0() - 1.0;
        let (x_end, x_image_end, plateau, ramp, slack) = if frozen {
            let x = self.geo.curve().x_base;
            (x, x, self.w0, self.r0, 2.0)
        } else {
            let slack = self.geo.slack(t);
            let c = self.schedule_c;
            let w = self.w0 * slack * (2.0 + c) / (2.0 * (slack + c));
            (
                self.geo.x_curve(t),
                self.geo.x_curve(t + 1.0),
                w,
                self.r0 * w / self.w0,
                slack,
            )
        };
        let span = 0.75 * x_end - ramp - plateau;
        let floor_gap = (slack - ramp * (1.0 - e) / 2.0 - plateau * (1.0 - e)) / span;
        let floor = 1.0 - floor_gap;
        let knots = [
            0.0,
            0.25 * x_end,
            0.25 * x_end + ramp,
            x_end - plateau - ramp,
            x_end - plateau,
            x_end,
        ];
        let mut values = [2.0; 6];
        values[1] = 2.0 + knots[1];
        values[2] = values[1] + ramp * (1.0 + floor) / 2.0;
        values[3] = values[2] + floor * (knots[3] - knots[2]);
        values[4] = x_image_end - e * plateau;
        values[5] = x_image_end;
        ProfileParams {
            t,
            x_end,
            x_image_end,
            floor,
            floor_gap,
            ramp,
            plateau,
            contraction: e,
            knots,
            values,
        }
    }

    /// Profile of `h_y` for a height `y ∈ (0, ½)`.
    pub fn profile_for_height(&self, y: f64) -> ProfileParams {
        self.profile(self.geo.time_of_height(y))
    }

    fn check_height(y: f64) -> Result<()> {
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

    fn check_extent(&self, y: f64, x: f64) -> Result<ProfileParams> {
        Self::check_height(y)?;
        let p = self.profile_for_height(y);
        if !(x >= 0.0 && x <= p.x_end + 1e-9) {
            return Err(Error::PointDomain {
                x,
                y,
                domain: "0 <= x <= theta(y)",
            });
        }
        Ok(p)
    }

    pub fn h(&self, y: f64, x: f64) -> Result<f64> {
        Ok(self.check_extent(y, x)?.value(x))
    }

    pub fn h_prime(&self, y: f64, x: f64) -> Result<f64> {
        Ok(self.check_extent(y, x)?.slope(x))
    }

    pub fn h_inv(&self, y: f64, xp: f64) -> Result<f64> {
        Self::check_height(y)?;
        let p = self.profile_for_height(y);
        if !(xp >= 2.0 && xp <= p.x_image_end + 1e-9) {
            return Err(Error::PointDomain {
                x: xp,
                y,
                domain: "2 <= x' <= theta(g(y))",
            });
        }
        p.inverse(xp, self.root_tol).ok_or(Error::RootFind {
            what: "h inverse",
            x: xp,
            y,
        })
    }

    /// `∂h/∂y` at fixed `x`, by a central difference in curve time.
    pub fn dh_dy(&self, y: f64, x: f64) -> f64 {
        let t = self.geo.time_of_height(y);
        if !t.is_finite() || t + 2.0 * DT_FD <= self.geo.t0() - 1.0 {
            return 0.0;
        }
        let at = |s: f64| self.profile(t + s * DT_FD).value(x);
        // five-point stencil; the profile inherits root-finding noise from the flow
        let dt = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * DT_FD);
        if dt == 0.0 {
            return 0.0;
        }
        dt / self.geo.flow().field(y)
    }

    /// Left edge `θ(y) − w(y)` of the plateau collar at height `y ∈ (0, ½)`.
    pub fn collar_edge(&self, y: f64) -> f64 {
        self.profile_for_height(y).collar_edge()
    }

    /// Whether a row-reduced point lies in the collar `θ − w ≤ x ≤ θ`.
    pub fn in_collar(&self, p: PlanePoint) -> bool {
        let (_, q) = reduce_row(p);
        if !(q.y > 0.0 && q.y < 0.5) {
            return false;
        }
        let prof = self.profile_for_height(q.y);
        q.x >= prof.collar_edge() && q.x <= prof.x_end
    }

    fn blend_weight(y: f64) -> (f64, f64) {
        let u = (y - 0.5) * 4.0;
        (smoothstep(u), 4.0 * smoothstep_prime(u))
    }

    fn check_domain(p: PlanePoint) -> Result<()> {
        if p.x >= -2.0 && p.x.is_finite() && (0.0..=1.0).contains(&p.y) {
            Ok(())
        } else {
            Err(Error::PointDomain {
                x: p.x,
                y: p.y,
                domain: "P = [-2, inf) x [0, 1]",
            })
        }
    }

    fn check_image(q: PlanePoint) -> Result<()> {
        if q.x >= 0.0 && q.x.is_finite() && (0.0..=1.0).contains(&q.y) {
            Ok(())
        } else {
            Err(Error::PointDomain {
                x: q.x,
                y: q.y,
                domain: "P' = [0, inf) x [0, 1]",
            })
        }
    }

    pub fn region(&self, p: PlanePoint) -> RegionId {
        self.geo.classify_reduced(p.x, p.y)
    }

    pub fn phi(&self, p: PlanePoint) -> Result<PlanePoint> {
        Self::check_domain(p)?;
        Ok(self.phi_unchecked(p))
    }

    pub(crate) fn phi_unchecked(&self, p: PlanePoint) -> PlanePoint {
        let flow = self.geo.flow();
        let (x, y) = (p.x, p.y);
        let gy = flow.flow_unchecked(y, 1.0);
        let nx = match self.region(p) {
            RegionId::A => 1.0 - flow.flow_unchecked(-x - 1.0, -1.0),
            RegionId::B => 2.0 - flow.flow_unchecked(-x, -1.0),
            RegionId::Dblend => {
                let (beta, _) = Self::blend_weight(y);
                let hb = 2.0 - flow.flow_unchecked(-x, -1.0);
                (1.0 - beta) * hb + beta * (x + 2.0)
            }
            RegionId::Goutside | RegionId::Rinside => self.profile_for_height(y).value(x),
            _ => x + 2.0,
        };
        PlanePoint::new(nx, gy)
    }

    pub fn phi_inv(&self, q: PlanePoint) -> Result<PlanePoint> {
        Self::check_image(q)?;
        self.phi_inv_unchecked(q)
    }

    pub(crate) fn phi_inv_unchecked(&self, q: PlanePoint) -> Result<PlanePoint> {
        let flow = self.geo.flow();
        let (xp, yp) = (q.x, q.y);
        let y = flow.flow_unchecked(yp, -1.0);
        let x = if xp <= 1.0 {
            -1.0 - flow.flow_unchecked(1.0 - xp, 1.0)
        } else if xp <= 2.0 {
            if y <= 0.5 {
                -flow.flow_unchecked(2.0 - xp, 1.0)
            } else if y < 0.75 {
                let (beta, _) = Self::blend_weight(y);
                let f = |x: f64| {
                    let hb = 2.0 - flow.flow_unchecked(-x, -1.0);
                    let dhb = flow.flow_dy(-x, -1.0);
                    (
                        (1.0 - beta) * hb + beta * (x + 2.0) - xp,
                        (1.0 - beta) * dhb + beta,
                    )
                };
                newton_bracketed(f, -1.0, 0.0, self.root_tol, 200).ok_or(Error::RootFind {
                    what: "blend inverse",
                    x: xp,
                    y: yp,
                })?
            } else {
                xp - 2.0
            }
        } else if y > 0.0 && y < 0.5 {
            let prof = self.profile_for_height(y);
            prof.inverse(xp, self.root_tol).ok_or(Error::RootFind {
                what: "h inverse",
                x: xp,
                y: yp,
            })?
        } else {
            xp - 2.0
        };
        Ok(PlanePoint::new(x, y))
    }

    pub fn dphi(&self, p: PlanePoint) -> Result<Jacobian2> {
        Self::check_domain(p)?;
        Ok(self.dphi_unchecked(p))
    }

    pub(crate) fn dphi_unchecked(&self, p: PlanePoint) -> Jacobian2 {
        let flow = self.geo.flow();
        let (x, y) = (p.x, p.y);
        let gp = flow.flow_dy(y, 1.0);
        let (a11, a12) = match self.region(p) {
            RegionId::A => (flow.flow_dy(-x - 1.0, -1.0), 0.0),
            RegionId::B => (flow.flow_dy(-x, -1.0), 0.0),
            RegionId::Dblend => {
                let (beta, dbeta) = Self::blend_weight(y);
                let hb = 2.0 - flow.flow_unchecked(-x, -1.0);
                let dhb = flow.flow_dy(-x, -1.0);
                ((1.0 - beta) * dhb + beta, dbeta * (x + 2.0 - hb))
            }
            RegionId::Goutside => {
                let prof = self.profile_for_height(y);
                (prof.slope(x), self.dh_dy(y, x))
            }
            RegionId::Rinside => {
                let gy = flow.flow_unchecked(y, 1.0);
                let geo = &self.geo;
                let dy = geo.theta_prime_unchecked(gy) * gp - self.contraction * geo.theta_prime_unchecked(y);
                (self.contraction, dy)
            }
            _ => (1.0, 0.0),
        };
        Jacobian2::new(a11, a12, 0.0, gp)
    }

    /// Lower bound on the rightward displacement `h_y(x) − x` away from the collar
    /// and the Reeb component, minimized over a grid of `ny` heights and `nx`
    /// abscissas per height. The collar edge itself is always included.
    pub fn alpha_estimate(&self, ny: usize, nx: usize) -> Result<f64> {
        let mut best = f64::INFINITY;
        for i in 0..ny {
            let y = (i as f64 + 0.5) / ny as f64;
            if y < 0.5 {
                let prof = self.profile_for_height(y);
                let edge = prof.collar_edge();
                for j in 0..=nx {
                    let x = edge * j as f64 / nx as f64;
                    best = best.min(prof.value(x) - x);
                }
            }
            for j in 0..=nx {
                let x = -2.0 + 2.0 * j as f64 / nx as f64;
                let q = self.phi_unchecked(PlanePoint::new(x, y));
                best = best.min(q.x - x);
            }
        }
        // the minimum over the collar edge is attained in the frozen zone near ¼
        let prof = self.profile(self.geo.t0() - 1.0);
        best = best.min(prof.value(prof.collar_edge()) - prof.collar_edge());
        if !(best > 0.0) {
            return Err(Error::Infeasible { t: f64::NAN, floor: best });
        }
        Ok(best)
    }
}

impl Default for LocalMap {
    fn default() -> Self {
        LocalMap::new(Geometry::default(), 0.5, 0.25, 1e-13).expect("default local map is valid")
    }
}
