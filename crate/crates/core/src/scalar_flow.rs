//! The interval map `g` as the time-one map of an explicit C¹ flow on `[0, 1]`.
//!
//! The vector field is `v(y) = λ(y − ¼)·S(y/a)` on `[0, ¼]` with `S` the cubic
//! smoothstep and `a = ¼ − 4δ`, exactly linear on `[a, ¼]`, extended to `[¼, ½]`
//! by antisymmetry about `¼` and set to zero on `[½, 1]`.
//!
//! Because the field is scalar and autonomous, the flow is the level-set map of
//! the time potential `Θ = ∫ dy / v(y)`. On the blend zone `Θ` has a closed form
//! by partial fractions, so `g^t(y) = Θ⁻¹(Θ(y) + t)` is evaluated exactly up to a
//! Newton inversion. The classical RK4 integrator with a step-halving error
//! estimate is kept alongside as an independent route.

use crate::error::{Error, Result};
use crate::numeric::newton_bracketed;

/// Parameters of the scalar flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    /// Expansion exponent λ; `g` has slope `e^λ` at `¼`.
    pub lambda: f64,
    /// Half-width δ of the affine zone of `g`.
    pub delta: f64,
    /// Half-width of the zone where the field is exactly linear.
    pub linear_zone_margin: f64,
    pub ode_step: f64,
    pub ode_tol: f64,
}

impl FlowParams {
    pub fn new(lambda: f64, delta: f64) -> Self {
        FlowParams {
            lambda,
            delta,
            linear_zone_margin: 4.0 * delta,
            ode_step: 1e-3,
            ode_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / 16.0) {
            return bad(format!("delta must lie in (0, 1/16), got {}", self.delta));
        }
        if self.linear_zone_margin < self.lambda.exp() * self.delta {
            return bad(format!(
                "linear_zone_margin {} must be at least e^lambda * delta = {}",
                self.linear_zone_margin,
                self.lambda.exp() * self.delta
            ));
        }
        if !(self.linear_zone_margin < 0.25) {
            return bad(format!(
                "linear_zone_margin must be below 1/4, got {}",
                self.linear_zone_margin
            ));
        }
        if !(self.ode_step > 0.0 && self.ode_tol > 0.0) {
            return bad("ode_step and ode_tol must be positive".into());
        }
        Ok(())
    }
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams::new(std::f64::consts::LN_2, 1.0 / 32.0)
    }
}

/// Partial-fraction coefficients of `1 / ((u − b) u² (3 − 2u))`.
#[derive(Debug, Clone, Copy)]
enum TimePotential {
    /// `A/u + B/u² + C/(u − b) + D/(3 − 2u)` with `b ≠ 3/2`.
    Distinct { a: f64, b2: f64, c: f64, d: f64, b: f64 },
    /// `b = 3/2`: the quadratic factor has a double root.
    Double,
}

impl TimePotential {
    fn new(b: f64) -> Self {
        if (2.0 * b - 3.0).abs() < 1e-9 {
            return TimePotential::Double;
        }
        let q0 = -3.0 * b;
        TimePotential::Distinct {
            a: -(3.0 + 2.0 * b) / (q0 * q0),
            b2: 1.0 / q0,
            c: 1.0 / (b * b * (3.0 - 2.0 * b)),
            d: 4.0 / (9.0 * (1.5 - b)),
            b,
        }
    }

    /// Antiderivative in `u` of the partial-fraction sum.
    fn value(&self, u: f64) -> f64 {
        match *self {
            TimePotential::Distinct { a, b2, c, d, b } => {
                a * u.ln() - b2 / u + c * (b - u).ln() - 0.5 * d * (3.0 - 2.0 * u).ln()
            }
            TimePotential::Double => {
                let cc = 1.5_f64;
                -0.5 * ((2.0 / (cc * cc * cc)) * (u.ln() - (cc - u).ln()) - 1.0 / (cc * cc * u)
                    + 1.0 / (cc * cc * (cc - u)))
            }
        }
    }

    fn slope(&self, u: f64, b: f64) -> f64 {
        1.0 / ((u - b) * u * u * (3.0 - 2.0 * u))
    }

    /// `value(u) ≈ -b2/u + const` as `u → 0`.
    fn pole_coefficient(&self) -> f64 {
        match *self {
            TimePotential::Distinct { b2, .. } => -b2,
            TimePotential::Double => 0.5 / (1.5 * 1.5),
        }
    }
}

/// The flow `g^t` and its time-one map `g`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarFlow {
    params: FlowParams,
    /// Lower end of the linear zone, `¼ − margin`.
    blend_end: f64,
    /// `1 / (4 a)`; the field is `λ a (u − b) S(u)` in `u = y/a`.
    b: f64,
    potential: TimePotential,
    /// `Θ` at the lower end of the linear zone.
    theta_blend_end: f64,
    /// `Θ(⅛)`, the origin of the curve parameter `t`.
    theta_eighth: f64,
    growth: f64,
}

impl ScalarFlow {
    pub fn new(params: FlowParams) -> Result<Self> {
        params.validate()?;
        let blend_end = 0.25 - params.linear_zone_margin;
        let b = 1.0 / (4.0 * blend_end);
        let mut flow = ScalarFlow {
            params,
            blend_end,
            b,
            potential: TimePotential::new(b),
            theta_blend_end: (0.25 - blend_end).ln() / params.lambda,
            theta_eighth: 0.0,
            growth: params.lambda.exp(),
        };
        flow.theta_eighth = flow.potential_at(0.125);
        Ok(flow)
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    /// `e^λ`.
    pub fn growth(&self) -> f64 {
        self.growth
    }

    /// Lower end `¼ − margin` of the zone where the field is linear.
    pub fn blend_end(&self) -> f64 {
        self.blend_end
    }

    fn check_unit(y: f64) -> Result<()> {
        if (0.0..=1.0).contains(&y) {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "y",
                value: y,
                domain: "[0, 1]",
            })
        }
    }

    /// Flow velocity `v(y)`.
    pub fn vector_field(&self, y: f64) -> Result<f64> {
        Self::check_unit(y)?;
        Ok(self.field(y))
    }

    pub(crate) fn field(&self, y: f64) -> f64 {
        if y >= 0.5 {
            0.0
        } else if y > 0.25 {
            -self.field_lower(0.5 - y)
        } else {
            self.field_lower(y)
        }
    }

    fn field_lower(&self, y: f64) -> f64 {
        let lin = self.params.lambda * (y - 0.25);
        if y >= self.blend_end {
            lin
        } else {
            let u = y / self.blend_end;
            lin * u * u * (3.0 - 2.0 * u)
        }
    }

    /// Time potential `Θ` on `(0, ¼)`: decreasing, `+∞` at 0, `−∞` at `¼`.
    fn potential_at(&self, y: f64) -> f64 {
        if y >= self.blend_end {
            (0.25 - y).ln() / self.params.lambda
        } else {
            let u = y / self.blend_end;
            self.theta_blend_end
                + (self.potential.value(u) - self.potential.value(1.0)) / self.params.lambda
        }
    }

    /// Inverse of [`Self::potential_at`].
    fn potential_inverse(&self, s: f64) -> f64 {
        if s <= self.theta_blend_end {
            return 0.25 - (self.params.lambda * s).exp();
        }
        if s == f64::INFINITY {
            return 0.0;
        }
        let target = self.params.lambda * (s - self.theta_blend_end) + self.potential.value(1.0);
        let b = self.b;
        let pole = self.potential.pole_coefficient();
        let f = |u: f64| (self.potential.value(u) - target, self.potential.slope(u, b));
        // bracket: value is +inf at 0 and value(1) at 1
        let guess_lo = {
            let tail = target - self.potential.value(1.0);
            (pole / (tail + pole + 1.0)).clamp(f64::MIN_POSITIVE, 0.5)
        };
        let mut lo = guess_lo;
        while f(lo).0 < 0.0 {
            lo *= 0.5;
            if lo < 1e-300 {
                return lo * self.blend_end;
            }
        }
        let u = newton_bracketed(f, lo, 1.0, 1e-16, 200).unwrap_or(lo);
        u * self.blend_end
    }

    /// `g^t(y)`.
    pub fn flow(&self, y: f64, t: f64) -> Result<f64> {
        Self::check_unit(y)?;
        if !t.is_finite() {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "finite reals",
            });
        }
        Ok(self.flow_unchecked(y, t))
    }

    pub(crate) fn flow_unchecked(&self, y: f64, t: f64) -> f64 {
        if y <= 0.0 || y >= 0.5 || y == 0.25 || t == 0.0 {
            y
        } else if y > 0.25 {
            0.5 - self.flow_lower(0.5 - y, t)
        } else {
            self.flow_lower(y, t)
        }
    }

    fn flow_lower(&self, y: f64, t: f64) -> f64 {
        if y >= self.blend_end {
            let z = 0.25 + (y - 0.25) * (self.params.lambda * t).exp();
            if z >= self.blend_end {
                return z;
            }
        }
        self.potential_inverse(self.potential_at(y) + t)
    }

    /// `∂g^t/∂y = v(g^t(y)) / v(y)`.
    pub(crate) fn flow_dy(&self, y: f64, t: f64) -> f64 {
        if y <= 0.0 || y >= 0.5 || t == 0.0 {
            return 1.0;
        }
        if y == 0.25 {
            return (self.params.lambda * t).exp();
        }
        let z = self.flow_unchecked(y, t);
        let (ly, lz) = ((y - 0.25).abs(), (z - 0.25).abs());
        let margin = self.params.linear_zone_margin;
        if ly <= margin && lz <= margin {
            return (self.params.lambda * t).exp();
        }
        let vy = self.field(y);
        if vy.abs() < 1e-280 {
            return 1.0;
        }
        self.field(z) / vy
    }

    pub fn g(&self, y: f64) -> Result<f64> {
        self.flow(y, 1.0)
    }

    pub fn g_inv(&self, y: f64) -> Result<f64> {
        self.flow(y, -1.0)
    }

    pub fn g_prime(&self, y: f64) -> Result<f64> {
        Self::check_unit(y)?;
        Ok(self.flow_dy(y, 1.0))
    }

    /// Derivative of `g⁻¹` at `z`.
    pub fn g_inv_prime(&self, z: f64) -> Result<f64> {
        Self::check_unit(z)?;
        Ok(self.flow_dy(z, -1.0))
    }

    /// `y(t) = g^t(⅛)`, strictly decreasing from `¼` to `0`.
    pub fn y_of_t(&self, t: f64) -> Result<f64> {
        self.flow(0.125, t)
    }

    /// Inverse of [`Self::y_of_t`] on `(0, ¼)`.
    pub fn t_of_y(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y < 0.25) {
            return Err(Error::Domain {
                what: "y",
                value: y,
                domain: "(0, 1/4)",
            });
        }
        Ok(self.time_coordinate(y))
    }

    /// `t_of_y` extended to `[0, ¼]` with `+∞` at 0 and `−∞` at `¼`.
    pub(crate) fn time_coordinate(&self, y: f64) -> f64 {
        if y <= 0.0 {
            f64::INFINITY
        } else if y >= 0.25 {
            f64::NEG_INFINITY
        } else {
            self.potential_at(y) - self.theta_eighth
        }
    }

    /// Classical RK4 with a step-halving Richardson error estimate.
    ///
    /// Steps that stay inside the linear zone use the exact affine solution.
    pub fn integrate_rk4(&self, y: f64, t: f64) -> Result<f64> {
        Self::check_unit(y)?;
        if t == 0.0 {
            return Ok(y);
        }
        let n = (t.abs() / self.params.ode_step).ceil().max(1.0) as usize;
        let coarse = self.rk4_fixed(y, t, n);
        let fine = self.rk4_fixed(y, t, 2 * n);
        let estimate = (fine - coarse).abs() / 15.0;
        if estimate > self.params.ode_tol {
            return Err(Error::Integration {
                y,
                t,
                estimate,
                tol: self.params.ode_tol,
            });
        }
        Ok(fine)
    }

    fn rk4_fixed(&self, y0: f64, t: f64, n: usize) -> f64 {
        let h = t / n as f64;
        let margin = self.params.linear_zone_margin;
        let affine = (self.params.lambda * h).exp();
        let mut y = y0;
        for _ in 0..n {
            let z = 0.25 + (y - 0.25) * affine;
            if (y - 0.25).abs() <= margin && (z - 0.25).abs() <= margin {
                y = z;
                continue;
            }
            let f = |s: f64| self.field(s.clamp(0.0, 1.0));
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y
    }
}

impl Default for ScalarFlow {
    fn default() -> Self {
        ScalarFlow::new(FlowParams::default()).expect("default flow parameters are valid")
    }
}
