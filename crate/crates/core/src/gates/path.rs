//! Piecewise root trajectories `α_ν(t)`.

use crate::error::{Error, Result};
use crate::fockspace::C64;
use crate::liouvillian::RootTrajectory;

/// Time-reparametrization inside a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Linear,
    /// `3s² − 2s³`: zero velocity at both ends.
    Smoothstep,
}

impl Profile {
    fn map(self, s: f64) -> f64 {
        match self {
            Profile::Linear => s,
            Profile::Smoothstep => s * s * (3.0 - 2.0 * s),
        }
    }
}

/// One root's curve over a segment, parametrized by `s ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curve {
    Hold(C64),
    Line { from: C64, to: C64 },
    /// `center + (from − center)·e^{i·angle·s}`; negative angle is clockwise.
    Arc { center: C64, from: C64, angle: f64 },
    /// `origin + r e^{iθ}` with `r` and `θ` interpolated linearly. A pure
    /// radial ramp keeps the phase fixed and passes through `origin`
    /// without ambiguity.
    RadialRamp { origin: C64, r_from: f64, r_to: f64, phase_from: f64, phase_to: f64 },
    /// `origin + radius·e^{iθ}`, linear `θ`.
    PhaseRotation { origin: C64, radius: f64, phase_from: f64, phase_to: f64 },
}

impl Curve {
    pub fn kind(&self) -> &'static str {
        match self {
            Curve::Hold(_) => "hold",
            Curve::Line { .. } => "line",
            Curve::Arc { .. } => "circular-arc",
            Curve::RadialRamp { .. } => "radial-ramp",
            Curve::PhaseRotation { .. } => "phase-rotation",
        }
    }

    pub fn at(&self, s: f64) -> C64 {
        match *self {
            Curve::Hold(z) => z,
            Curve::Line { from, to } => from + (to - from) * s,
            Curve::Arc { center, from, angle } => center + (from - center) * C64::from_polar(1.0, angle * s),
            Curve::RadialRamp { origin, r_from, r_to, phase_from, phase_to } => {
                origin + C64::from_polar(r_from + (r_to - r_from) * s, phase_from + (phase_to - phase_from) * s)
            }
            Curve::PhaseRotation { origin, radius, phase_from, phase_to } => {
                origin + C64::from_polar(radius, phase_from + (phase_to - phase_from) * s)
            }
        }
    }

    /// `d/ds` of [`Curve::at`].
    pub fn velocity(&self, s: f64) -> C64 {
        let i = C64::new(0.0, 1.0);
        match *self {
            Curve::Hold(_) => C64::new(0.0, 0.0),
            Curve::Line { from, to } => to - from,
            Curve::Arc { center, from, angle } => (from - center) * i * angle * C64::from_polar(1.0, angle * s),
            Curve::RadialRamp { r_from, r_to, phase_from, phase_to, .. } => {
                let r = r_from + (r_to - r_from) * s;
                let ph = phase_from + (phase_to - phase_from) * s;
                C64::from_polar(1.0, ph) * (C64::from(r_to - r_from) + i * r * (phase_to - phase_from))
            }
            Curve::PhaseRotation { radius, phase_from, phase_to, .. } => {
                let ph = phase_from + (phase_to - phase_from) * s;
                i * (phase_to - phase_from) * C64::from_polar(radius, ph)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.at(0.0)
    }

    pub fn end(&self) -> C64 {
        self.at(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Share of the total duration.
    pub fraction: f64,
    pub profile: Profile,
    /// One curve per root.
    pub curves: Vec<Curve>,
}

/// Continuous, piecewise-defined trajectory of all `d` roots.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    pub d: usize,
    pub segments: Vec<Segment>,
    pub total_t: f64,
}

const CONTINUITY_TOL: f64 = 1e-12;

impl ParameterPath {
    pub fn new(d: usize, segments: Vec<Segment>, total_t: f64) -> Result<Self> {
        let path = Self { d, segments, total_t };
        path.validate()?;
        Ok(path)
    }

    /// Roots held at `roots` for `total_t`.
    pub fn hold(roots: &[C64], total_t: f64) -> Result<Self> {
        Self::new(
            roots.len(),
            vec![Segment {
                fraction: 1.0,
                profile: Profile::Linear,
                curves: roots.iter().map(|&z| Curve::Hold(z)).collect(),
            }],
            total_t,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.segments.is_empty() {
            return Err(Error::InvalidSpec("path needs at least one root and one segment".into()));
        }
        if !(self.total_t >= 0.0) {
            return Err(Error::InvalidSpec(format!("duration must be nonnegative, got {}", self.total_t)));
        }
        let total: f64 = self.segments.iter().map(|s| s.fraction).sum();
        if (total - 1.0).abs() > 1e-12 || self.segments.iter().any(|s| !(s.fraction > 0.0)) {
            return Err(Error::InvalidSpec(format!("segment fractions must be positive and sum to 1, got {total}")));
        }
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.curves.len() != self.d {
                return Err(Error::InvalidSpec(format!(
                    "segment {k} has {} curves for {} roots",
                    seg.curves.len(),
                    self.d
                )));
            }
        }
        for (k, pair) in self.segments.windows(2).enumerate() {
            for (nu, (a, b)) in pair[0].curves.iter().zip(&pair[1].curves).enumerate() {
                let gap = (a.end() - b.start()).norm();
                if gap > CONTINUITY_TOL {
                    return Err(Error::InvalidSpec(format!(
                        "root {nu} jumps by {gap:.3e} between segments {k} and {}",
                        k + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn start_roots(&self) -> Vec<C64> {
        self.segments[0].curves.iter().map(Curve::start).collect()
    }

    pub fn end_roots(&self) -> Vec<C64> {
        self.segments[self.segments.len() - 1].curves.iter().map(Curve::end).collect()
    }

    /// Every root returns to its start within 1e-12.
    pub fn is_closed(&self) -> bool {
        self.start_roots()
            .iter()
            .zip(self.end_roots())
            .all(|(a, b)| (a - b).norm() <= CONTINUITY_TOL)
    }

    fn locate(&self, t: f64) -> (&Segment, f64) {
        let u = if self.total_t > 0.0 { (t / self.total_t).clamp(0.0, 1.0) } else { 1.0 };
        let mut acc = 0.0;
        for (k, seg) in self.segments.iter().enumerate() {
            let last = k + 1 == self.segments.len();
            if u <= acc + seg.fraction || last {
                let s = ((u - acc) / seg.fraction).clamp(0.0, 1.0);
                return (seg, s);
            }
            acc += seg.fraction;
        }
        unreachable!("segments are nonempty")
    }

    /// Root positions at normalized time `u ∈ [0, 1]`.
    pub fn roots_at_fraction(&self, u: f64) -> Vec<C64> {
        self.roots_at(u * self.total_t)
    }

    /// Closest approach of any two roots over `samples + 1` time points.
    pub fn min_pair_distance(&self, samples: usize) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..=samples {
            let roots = self.roots_at_fraction(k as f64 / samples as f64);
            for i in 0..roots.len() {
                for j in i + 1..roots.len() {
                    best = best.min((roots[i] - roots[j]).norm());
                }
            }
        }
        best
    }

    pub fn max_abs_root(&self, samples: usize) -> f64 {
        (0..=samples)
            .flat_map(|k| self.roots_at_fraction(k as f64 / samples as f64))
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Signed area swept by root `nu`, `½∮(P dX − X dP)`, positive for
    /// clockwise traversal (composite Simpson per segment).
    pub fn clockwise_area(&self, nu: usize) -> f64 {
        const INTERVALS: usize = 2048;
        let mut total = 0.0;
        for seg in &self.segments {
            let curve = &seg.curves[nu];
            let f = |s: f64| {
                let z = curve.at(s);
                let v = curve.velocity(s);
                0.5 * (z.im * v.re - z.re * v.im)
            };
            let h = 1.0 / INTERVALS as f64;
            let mut acc = f(0.0) + f(1.0);
            for k in 1..INTERVALS {
                acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += acc * h / 3.0;
        }
        total
    }
}

impl RootTrajectory for ParameterPath {
    fn d(&self) -> usize {
        self.d
    }

    fn duration(&self) -> f64 {
        self.total_t
    }

    fn roots_at(&self, t: f64) -> Vec<C64> {
        let (seg, s) = self.locate(t);
        let s = seg.profile.map(s);
        seg.curves.iter().map(|c| c.at(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arc_area_matches_circle() {
        let from = C64::new(-2.0, 0.0);
        let center = C64::new(-2.5, 0.0);
        for (angle, sign) in [(-2.0 * PI, 1.0), (2.0 * PI, -1.0)] {
            let path = ParameterPath::new(
                1,
                vec![Segment {
                    fraction: 1.0,
                    profile: Profile::Smoothstep,
                    curves: vec![Curve::Arc { center, from, angle }],
                }],
                10.0,
            )
            .unwrap();
            assert!(path.is_closed());
            let area = path.clockwise_area(0);
            assert!((area - sign * PI * 0.25).abs() < 1e-8, "{area}");
        }
    }

    #[test]
    fn discontinuous_segments_rejected() {
        let segs = vec![
            Segment {
                fraction: 0.5,
                profile: Profile::Linear,
                curves: vec![Curve::Line { from: C64::new(0.0, 0.0), to: C64::new(1.0, 0.0) }],
            },
            Segment {
                fraction: 0.5,
                profile: Profile::Linear,
                curves: vec![Curve::Hold(C64::new(1.5, 0.0))],
            },
        ];
        assert!(matches!(ParameterPath::new(1, segs, 1.0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn segment_lookup_and_profiles() {
        let segs = vec![
            Segment {
                fraction: 0.25,
                profile: Profile::Linear,
                curves: vec![Curve::Line { from: C64::new(0.0, 0.0), to: C64::new(1.0, 0.0) }],
            },
            Segment {
                fraction: 0.75,
                profile: Profile::Smoothstep,
                curves: vec![Curve::Line { from: C64::new(1.0, 0.0), to: C64::new(4.0, 0.0) }],
            },
        ];
        let path = ParameterPath::new(1, segs, 8.0).unwrap();
        assert!((path.roots_at(1.0)[0].re - 0.5).abs() < 1e-15);
        assert!((path.roots_at(2.0)[0].re - 1.0).abs() < 1e-15);
        assert!((path.roots_at(5.0)[0].re - 2.5).abs() < 1e-12);
        assert!((path.roots_at(8.0)[0].re - 4.0).abs() < 1e-15);
    }

    #[test]
    fn velocities_match_finite_differences() {
        let curves = [
            Curve::Arc { center: C64::new(0.3, 0.1), from: C64::new(1.0, -0.2), angle: -1.3 },
            Curve::RadialRamp { origin: C64::new(0.5, 0.0), r_from: 2.0, r_to: 0.5, phase_from: 0.2, phase_to: 1.1 },
            Curve::PhaseRotation { origin: C64::new(0.0, -1.0), radius: 1.5, phase_from: 0.7, phase_to: -0.4 },
            Curve::Line { from: C64::new(0.0, 1.0), to: C64::new(2.0, -1.0) },
        ];
        for c in curves {
            let s = 0.37;
            let h = 1e-6;
            let fd = (c.at(s + h) - c.at(s - h)) / (2.0 * h);
            assert!((fd - c.velocity(s)).norm() < 1e-8, "{}", c.kind());
        }
    }
}
