//! Shortest planar curves of bounded curvature between two poses.
//!
//! All six candidate words are evaluated in normalized form (turning radius
//! one) and the shortest feasible one is kept.

use std::f64::consts::TAU;

use super::{normalize_angle, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Left,
    Straight,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Word {
    Lsl,
    Lsr,
    Rsl,
    Rsr,
    Rlr,
    Lrl,
}

impl Word {
    pub const ALL: [Word; 6] = [Word::Lsl, Word::Lsr, Word::Rsl, Word::Rsr, Word::Rlr, Word::Lrl];

    pub fn segments(self) -> [Segment; 3] {
        use Segment::*;
        match self {
            Word::Lsl => [Left, Straight, Left],
            Word::Lsr => [Left, Straight, Right],
            Word::Rsl => [Right, Straight, Left],
            Word::Rsr => [Right, Straight, Right],
            Word::Rlr => [Right, Left, Right],
            Word::Lrl => [Left, Right, Left],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DubinsPath {
    pub origin: (f64, f64, f64),
    pub rho: f64,
    pub word: Word,
    /// Segment lengths in units of `rho`.
    pub params: [f64; 3],
}

struct Normalized {
    alpha: f64,
    beta: f64,
    d: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
    cab: f64,
}

impl Normalized {
    fn new(from: &State, to: &State, rho: f64) -> Self {
        let dx = to.x - from.x;
        let dy = to.y - from.y;
        let d = dx.hypot(dy) / rho;
        let theta = if d > 0.0 { normalize_angle(dy.atan2(dx)) } else { 0.0 };
        let alpha = normalize_angle(from.heading - theta);
        let beta = normalize_angle(to.heading - theta);
        Self {
            alpha,
            beta,
            d,
            sa: alpha.sin(),
            sb: beta.sin(),
            ca: alpha.cos(),
            cb: beta.cos(),
            cab: (alpha - beta).cos(),
        }
    }
}

/// Angle in `[0, 2π)`, with values within rounding of a full turn snapped
/// to zero so that an exact arc does not pick up a spurious loop.
fn mod2pi(a: f64) -> f64 {
    let r = normalize_angle(a);
    if TAU - r < 1e-9 {
        0.0
    } else {
        r
    }
}

/// Normalized segment lengths of one word, if that word connects the poses.
pub fn solve_word(word: Word, from: &State, to: &State, rho: f64) -> Option<[f64; 3]> {
    let n = Normalized::new(from, to, rho);
    let Normalized { alpha, beta, d, sa, sb, ca, cb, cab } = n;
    match word {
        Word::Lsl => {
            let tmp0 = d + sa - sb;
            let p_sq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb);
            if p_sq < -1e-10 {
                return None;
            }
            let p_sq = p_sq.max(0.0);
            let tmp1 = (cb - ca).atan2(tmp0);
            Some([mod2pi(tmp1 - alpha), p_sq.sqrt(), mod2pi(beta - tmp1)])
        }
        Word::Rsr => {
            let tmp0 = d - sa + sb;
            let p_sq = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa);
            if p_sq < -1e-10 {
                return None;
            }
            let p_sq = p_sq.max(0.0);
            let tmp1 = (ca - cb).atan2(tmp0);
            Some([mod2pi(alpha - tmp1), p_sq.sqrt(), mod2pi(tmp1 - beta)])
        }
        Word::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb);
            if p_sq < -1e-10 {
                return None;
            }
            let p_sq = p_sq.max(0.0);
            let p = p_sq.sqrt();
            let tmp0 = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(tmp0 - alpha), p, mod2pi(tmp0 - beta)])
        }
        Word::Rsl => {
            let p_sq = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb);
            if p_sq < -1e-10 {
                return None;
            }
            let p_sq = p_sq.max(0.0);
            let p = p_sq.sqrt();
            let tmp0 = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
            Some([mod2pi(alpha - tmp0), p, mod2pi(beta - tmp0)])
        }
        Word::Rlr => {
            let tmp0 = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0;
            if tmp0.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d - sa + sb);
            let p = mod2pi(TAU - tmp0.acos());
            let t = mod2pi(alpha - phi + mod2pi(p / 2.0));
            Some([t, p, mod2pi(alpha - beta - t + mod2pi(p))])
        }
        Word::Lrl => {
            let tmp0 = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0;
            if tmp0.abs() > 1.0 {
                return None;
            }
            let phi = (ca - cb).atan2(d + sa - sb);
            let p = mod2pi(TAU - tmp0.acos());
            let t = mod2pi(-alpha - phi + p / 2.0);
            Some([t, p, mod2pi(beta - alpha - t + mod2pi(p))])
        }
    }
}

/// Advance a normalized pose `(x, y, θ)` along one segment of length `s`.
fn advance(seg: Segment, (x, y, th): (f64, f64, f64), s: f64) -> (f64, f64, f64) {
    match seg {
        Segment::Left => (x + (th + s).sin() - th.sin(), y - (th + s).cos() + th.cos(), th + s),
        Segment::Right => (x - (th - s).sin() + th.sin(), y + (th - s).cos() - th.cos(), th - s),
        Segment::Straight => (x + s * th.cos(), y + s * th.sin(), th),
    }
}

impl DubinsPath {
    /// Shortest of the six words from `from` to `to` at turning radius `rho`.
    pub fn shortest(from: &State, to: &State, rho: f64) -> Option<Self> {
        let mut best: Option<Self> = None;
        for word in Word::ALL {
            if let Some(params) = solve_word(word, from, to, rho) {
                let cand = Self { origin: (from.x, from.y, from.heading), rho, word, params };
                if best.as_ref().map_or(true, |b| cand.length() < b.length()) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    pub fn length(&self) -> f64 {
        (self.params[0] + self.params[1] + self.params[2]) * self.rho
    }

    /// Pose `(x, y, θ)` after travelling `dist` metres along the path.
    pub fn sample(&self, dist: f64) -> (f64, f64, f64) {
        let mut remaining = (dist / self.rho).clamp(0.0, self.params.iter().sum());
        let mut q = (0.0, 0.0, self.origin.2);
        for (seg, len) in self.word.segments().into_iter().zip(self.params) {
            let step = remaining.min(len);
            q = advance(seg, q, step);
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        (self.origin.0 + q.0 * self.rho, self.origin.1 + q.1 * self.rho, normalize_angle(q.2))
    }

    pub fn endpoint(&self) -> (f64, f64, f64) {
        self.sample(self.length())
    }
}
