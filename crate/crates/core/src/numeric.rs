//! Small scalar numerics shared by the map and the verifier.

/// Cubic smoothstep `3u² − 2u³`, clamped to `[0, 1]` outside the unit interval.
#[inline]
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * (3.0 - 2.0 * u)
    }
}

#[inline]
pub fn smoothstep_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        6.0 * u * (1.0 - u)
    }
}

/// `∫₀ᵘ smoothstep`, for `u ∈ [0, 1]`.
#[inline]
pub fn smoothstep_integral(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (1.0 - 0.5 * u)
}

/// Safeguarded Newton iteration for a root of `f` inside `[lo, hi]`.
///
/// `f` returns the value and derivative. The bracket must contain a sign change;
/// Newton steps that leave the current bracket or stall fall back to bisection. Stops once
/// the bracket or the step is below `tol`.
pub fn newton_bracketed<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    let lo_negative = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut last_step = hi - lo;
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / dfx;
        // bisect when Newton leaves the bracket or fails to halve the last step
        if !next.is_finite() || next <= lo || next >= hi || (next - x).abs() > 0.5 * last_step {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        last_step = step;
        x = next;
        if step <= tol * (1.0 + x.abs()) || (hi - lo) <= tol * (1.0 + x.abs()) {
            return Some(x);
        }
    }
    None
}

/// Plain bisection for a continuous `f` with a sign change on `[lo, hi]`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Option<f64>
where
    F: Fn(f64) -> Option<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 || (hi - lo) <= tol {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_endpoints_and_integral() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
        assert_eq!(smoothstep_integral(1.0), 0.5);
        // midpoint rule on a fine grid
        let n = 20_000;
        let quad: f64 = (0..n)
            .map(|i| smoothstep((i as f64 + 0.5) / n as f64) / n as f64)
            .sum();
        assert!((quad - 0.5).abs() < 1e-9);
    }

    #[test]
    fn newton_finds_cube_root() {
        let r = newton_bracketed(|x| (x * x * x - 2.0, 3.0 * x * x), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_survives_a_cycling_start() {
        // plain Newton from the midpoint bounces between the two kinks forever
        let f = |x: f64| {
            if x < -0.1 {
                (0.5 * (x + 0.1) - 0.05, 0.5)
            } else {
                (2.0 * (x + 0.1) - 0.05, 2.0)
            }
        };
        let r = newton_bracketed(f, -1.0, 0.0, 1e-14, 200).unwrap();
        assert!((r + 0.075).abs() < 1e-13, "{r}");
    }

    #[test]
    fn newton_rejects_missing_sign_change() {
        assert!(newton_bracketed(|x| (x * x + 1.0, 2.0 * x), -1.0, 1.0, 1e-12, 50).is_none());
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| Some(x.cos() - x), 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((r.cos() - r).abs() < 1e-12);
    }
}
