//! Double-integrator steering with bounded constant-acceleration inputs.
//!
//! Each axis is driven by two pieces of equal-magnitude, opposite-sign
//! acceleration. For a fixed duration the magnitude and switch time are
//! determined uniquely by the position and velocity boundary conditions; the
//! connection is feasible when that magnitude stays within `a_max`.

use super::State;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisProfile {
    pub x0: f64,
    pub v0: f64,
    /// Signed acceleration of the first piece; the second piece uses `-accel`.
    pub accel: f64,
    pub switch: f64,
    pub duration: f64,
}

impl AxisProfile {
    /// Position and velocity `tau` seconds into the profile.
    pub fn eval(&self, tau: f64) -> (f64, f64) {
        let tau = tau.clamp(0.0, self.duration);
        let a = self.accel;
        if tau <= self.switch {
            (self.x0 + self.v0 * tau + 0.5 * a * tau * tau, self.v0 + a * tau)
        } else {
            let ts = self.switch;
            let xs = self.x0 + self.v0 * ts + 0.5 * a * ts * ts;
            let vs = self.v0 + a * ts;
            let r = tau - ts;
            (xs + vs * r - 0.5 * a * r * r, vs - a * r)
        }
    }

    pub fn max_speed(&self) -> f64 {
        let (_, vs) = self.eval(self.switch);
        let (_, ve) = self.eval(self.duration);
        self.v0.abs().max(vs.abs()).max(ve.abs())
    }

    /// Profile reaching `(x1, v1)` from `(x0, v0)` in exactly `duration`
    /// seconds, or `None` when it would need more than `a_max`.
    pub fn solve(x0: f64, v0: f64, x1: f64, v1: f64, duration: f64, a_max: f64) -> Option<Self> {
        if !(duration > 0.0) {
            return None;
        }
        let t = duration;
        let d = x1 - x0 - v0 * t;
        let dv = v1 - v0;
        let scale = 1.0 + x1.abs().max(x0.abs()) + v0.abs().max(v1.abs()) * t;
        let tol = 1e-9 * scale;
        // With first-piece acceleration a: T²a² + (2TΔv − 4D)a − Δv² = 0.
        let qa = t * t;
        let qb = 2.0 * t * dv - 4.0 * d;
        let qc = -dv * dv;
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
        let mut roots = [0.0f64; 2];
        if qb == 0.0 && qc == 0.0 {
            roots = [0.0, 0.0];
        } else {
            let q = -0.5 * (qb + qb.signum_or_one() * disc.sqrt());
            roots[0] = q / qa;
            roots[1] = if q != 0.0 { qc / q } else { 0.0 };
        }
        let mut best: Option<Self> = None;
        for a in roots {
            let switch = if a == 0.0 { 0.5 * t } else { 0.5 * (t + dv / a) };
            if !(switch >= -1e-12 * t && switch <= t * (1.0 + 1e-12)) {
                continue;
            }
            let prof = Self { x0, v0, accel: a, switch: switch.clamp(0.0, t), duration: t };
            let (xe, ve) = prof.eval(t);
            if (xe - x1).abs() > tol || (ve - v1).abs() > tol {
                continue;
            }
            if best.map_or(true, |b| a.abs() < b.accel.abs()) {
                best = Some(prof);
            }
        }
        let prof = best?;
        if prof.accel.abs() > a_max * (1.0 + 1e-9) {
            return None;
        }
        Some(prof)
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Minimum time to move one axis from `(x0, v0)` to `(x1, v1)` with
/// `|a| <= a_max` (bang-bang with a single switch).
pub fn min_time_1d(x0: f64, v0: f64, x1: f64, v1: f64, a_max: f64) -> Option<f64> {
    let dx = x1 - x0;
    let mut best: Option<f64> = None;
    for sigma in [1.0f64, -1.0] {
        let peak_sq = sigma * a_max * dx + 0.5 * (v0 * v0 + v1 * v1);
        if peak_sq < 0.0 {
            continue;
        }
        let peak = sigma * peak_sq.sqrt();
        let t1 = (peak - v0) / (sigma * a_max);
        let t2 = (peak - v1) / (sigma * a_max);
        let eps = 1e-12 * (1.0 + v0.abs() + v1.abs()) / a_max;
        if t1 >= -eps && t2 >= -eps {
            let total = t1.max(0.0) + t2.max(0.0);
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
    }
    best
}

/// Earliest-arrival connection to a target whose time is free.
///
/// Starts from the larger of the two single-axis minimum times and, when the
/// other axis cannot match that duration, scans forward then bisects to the
/// first duration both axes accept. Gives up beyond `horizon` seconds.
pub fn steer_free_time(
    from: &State,
    to: &State,
    a_max: f64,
    horizon: f64,
) -> Option<(f64, AxisProfile, AxisProfile)> {
    let tx = min_time_1d(from.x, from.vx, to.x, to.vx, a_max)?;
    let ty = min_time_1d(from.y, from.vy, to.y, to.vy, a_max)?;
    let t0 = tx.max(ty);
    if t0 <= 1e-12 {
        let still = |x0: f64, v0: f64| AxisProfile { x0, v0, accel: 0.0, switch: 0.0, duration: 0.0 };
        return Some((0.0, still(from.x, from.vx), still(from.y, from.vy)));
    }
    let attempt = |t: f64| -> Option<(AxisProfile, AxisProfile)> {
        let ax = AxisProfile::solve(from.x, from.vx, to.x, to.vx, t, a_max)?;
        let ay = AxisProfile::solve(from.y, from.vy, to.y, to.vy, t, a_max)?;
        Some((ax, ay))
    };
    if let Some((ax, ay)) = attempt(t0) {
        return Some((t0, ax, ay));
    }
    let step = (0.01 * t0).max(1e-3);
    let mut lo = t0;
    let mut hi = t0 + step;
    while attempt(hi).is_none() {
        lo = hi;
        hi += step;
        if hi > t0 + horizon {
            return None;
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if attempt(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (ax, ay) = attempt(hi)?;
    Some((hi, ax, ay))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Forward Euler integration of a profile's piecewise-constant input.
    fn simulate(p: &AxisProfile, dt: f64) -> (f64, f64) {
        let steps = (p.duration / dt).round() as usize;
        let h = p.duration / steps as f64;
        let (mut x, mut v) = (p.x0, p.v0);
        for i in 0..steps {
            // split the step that straddles the switch
            let (t0, t1) = (i as f64 * h, (i + 1) as f64 * h);
            for (lo, hi, a) in [(t0, t1.min(p.switch), p.accel), (t0.max(p.switch), t1, -p.accel)] {
                if hi > lo {
                    let dt = hi - lo;
                    x += v * dt + 0.5 * a * dt * dt;
                    v += a * dt;
                }
            }
        }
        (x, v)
    }

    #[test]
    fn rest_to_rest_bang_bang() {
        assert!((min_time_1d(0.0, 0.0, 1.0, 0.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let p = AxisProfile::solve(0.0, 0.0, 1.0, 0.0, 2.0, 1.0).unwrap();
        assert!((p.accel - 1.0).abs() < 1e-12);
        assert!((p.switch - 1.0).abs() < 1e-12);
        let (x, v) = simulate(&p, 1e-4);
        assert!((x - 1.0).abs() < 1e-6 && v.abs() < 1e-6);
    }

    #[test]
    fn zero_motion_needs_no_thrust() {
        let p = AxisProfile::solve(3.0, 0.0, 3.0, 0.0, 1.5, 1.0).unwrap();
        assert_eq!(p.accel, 0.0);
        // coasting at constant velocity is also thrust-free
        let p = AxisProfile::solve(0.0, 2.0, 4.0, 2.0, 2.0, 1.0).unwrap();
        assert!(p.accel.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn solved_profiles_hit_the_boundary(
            x0 in -20.0..20.0f64, v0 in -5.0..5.0f64,
            x1 in -20.0..20.0f64, v1 in -5.0..5.0f64,
            t in 0.2..10.0f64,
        ) {
            if let Some(p) = AxisProfile::solve(x0, v0, x1, v1, t, 1e6) {
                let (xe, ve) = p.eval(t);
                prop_assert!((xe - x1).abs() < 1e-6);
                prop_assert!((ve - v1).abs() < 1e-6);
                let (xs, vs) = simulate(&p, 1e-3);
                prop_assert!((xs - x1).abs() < 1e-3 * (1.0 + p.accel.abs()));
                prop_assert!((vs - v1).abs() < 1e-3 * (1.0 + p.accel.abs()));
            } else {
                prop_assert!(false, "unbounded thrust must always connect");
            }
        }

        #[test]
        fn min_time_is_tight(
            x0 in -20.0..20.0f64, v0 in -5.0..5.0f64,
            x1 in -20.0..20.0f64, v1 in -5.0..5.0f64,
        ) {
            let a = 2.0;
            let t = min_time_1d(x0, v0, x1, v1, a).unwrap();
            if t > 1e-6 {
                prop_assert!(AxisProfile::solve(x0, v0, x1, v1, t, a).is_some());
                prop_assert!(AxisProfile::solve(x0, v0, x1, v1, t * 0.99, a).is_none());
            }
        }
    }
}
