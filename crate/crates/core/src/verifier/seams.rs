//! One-sided finite-difference Jacobians on either side of every construction seam.

use serde::{Deserialize, Serialize};

use super::{sampling, CheckReport, Tally, Verifier};
use crate::error::Result;
use crate::geometry::{tau_pow, PlanePoint, Vec2};
use crate::local_map::Jacobian2;

const FD_STEP: f64 = 1e-5;
const SEAM_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Seam {
    /// `x = −1`, between the left translate and the blend.
    XMinusOne,
    /// `x = 0` for `y ≤ ¾`.
    XZero,
    /// `y = ½`.
    BlendLower,
    /// `y = ¾` for `−1 ≤ x ≤ 0`.
    BlendUpper,
    /// The Reeb boundary curve.
    ReebBoundary,
    /// `y = 0`, between consecutive rows.
    RowSeam,
    /// `x = −2`, where the half-plane formula hands over to the mirrored one.
    HalfPlaneOverlap,
}

impl Seam {
    pub const ALL: [Seam; 7] = [
        Seam::XMinusOne,
        Seam::XZero,
        Seam::BlendLower,
        Seam::BlendUpper,
        Seam::ReebBoundary,
        Seam::RowSeam,
        Seam::HalfPlaneOverlap,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Seam::XMinusOne => "x_minus_one",
            Seam::XZero => "x_zero",
            Seam::BlendLower => "blend_half",
            Seam::BlendUpper => "blend_three_quarters",
            Seam::ReebBoundary => "reeb_boundary",
            Seam::RowSeam => "row_seam",
            Seam::HalfPlaneOverlap => "half_plane_overlap",
        }
    }

    /// Parameter range along the seam.
    fn range(self) -> (f64, f64) {
        match self {
            Seam::XMinusOne | Seam::HalfPlaneOverlap => (1e-3, 1.0 - 1e-3),
            Seam::XZero => (1e-3, 0.75 - 1e-3),
            Seam::BlendLower => (-1.0, 6.0),
            Seam::BlendUpper => (-1.0, 0.0),
            Seam::ReebBoundary => (0.02, 0.48),
            Seam::RowSeam => (-1.0, 12.0),
        }
    }
}

impl Verifier {
    /// Seam point with a transversal and a tangent direction, in row 0.
    fn seam_frame(&self, seam: Seam, s: f64) -> (PlanePoint, Vec2, Vec2) {
        let (h, v) = (Vec2::HORIZONTAL, Vec2::VERTICAL);
        match seam {
            Seam::XMinusOne => (PlanePoint::new(-1.0, s), h, v),
            Seam::XZero => (PlanePoint::new(0.0, s), h, v),
            Seam::HalfPlaneOverlap => (PlanePoint::new(-2.0, s), h, v),
            Seam::BlendLower => (PlanePoint::new(s, 0.5), v, h),
            Seam::BlendUpper => (PlanePoint::new(s, 0.75), v, h),
            Seam::RowSeam => (PlanePoint::new(s, 0.0), v, h),
            Seam::ReebBoundary => {
                let geo = self.geometry();
                (
                    PlanePoint::new(geo.theta_unchecked(s), s),
                    h,
                    Vec2::new(geo.theta_prime_unchecked(s), 1.0),
                )
            }
        }
    }

    /// Jacobians of `F` at `p` from the `−n` and `+n` sides, each using second-order
    /// one-sided differences across the seam and a central difference along it.
    pub fn one_sided_jacobians(&self, p: PlanePoint, n: Vec2, t: Vec2, h: f64) -> Result<(Jacobian2, Jacobian2)> {
        let d = self.dynamics();
        let f = |s: f64, dir: Vec2| -> Result<Vec2> {
            let q = d.f(p + s * dir)?;
            Ok(Vec2::new(q.x, q.y))
        };
        let f0 = f(0.0, n)?;
        let plus = (1.0 / (2.0 * h)) * (-3.0 * f0 + 4.0 * f(h, n)? - f(2.0 * h, n)?);
        let minus = (1.0 / (2.0 * h)) * (3.0 * f0 - 4.0 * f(-h, n)? + f(-2.0 * h, n)?);
        let along = (1.0 / (2.0 * h)) * (f(h, t)? - f(-h, t)?);
        let basis = Jacobian2::new(n.x, t.x, n.y, t.y).inverse();
        let with = |col: Vec2| Jacobian2::new(col.x, along.x, col.y, along.y).compose(&basis);
        Ok((with(minus), with(plus)))
    }

    /// Largest entrywise gap between one-sided Jacobians at `n` points of the seam,
    /// cycled through rows `−2..=2`.
    pub fn check_c1_seam(&self, seam: Seam, n: usize) -> Result<CheckReport> {
        let (a, b) = seam.range();
        let params = sampling::stratified_1d(a, b, n, self.seed, 10 + seam as u64);
        let frames: Vec<(PlanePoint, Vec2, Vec2)> = params
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let (p, nv, tv) = self.seam_frame(seam, s);
                (tau_pow(p, i as i64 % 5 - 2), nv, tv)
            })
            .collect();
        let res = sampling::par_map(&frames, |&(p, nv, tv)| {
            self.one_sided_jacobians(p, nv, tv, FD_STEP)
                .map(|(l, r)| l.max_abs_diff(&r))
        });
        let mut t = Tally::new(&format!("c1_seam_{}", seam.label()), -SEAM_TOL);
        for ((p, _, _), r) in frames.iter().zip(res) {
            let r = r?;
            t.add(*p, -r, r);
        }
        Ok(t.finish())
    }

    pub fn check_c1_seams(&self, seams: &[Seam], n: usize) -> Result<Vec<CheckReport>> {
        seams.iter().map(|s| self.check_c1_seam(*s, n)).collect()
    }
}
