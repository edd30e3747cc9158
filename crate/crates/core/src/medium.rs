//! Radially symmetric media and sources.
//!
//! Profiles are closed-form piecewise evaluators; grids sample them at
//! assembly time, so refinement studies always see the exact coefficients.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Formula used on one radial segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SegmentShape {
    Constant {
        value: f64,
    },
    /// `offset + amplitude * cos(frequency * (r - shift))`
    RaisedCosine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
        shift: f64,
    },
}

impl SegmentShape {
    fn value(&self, r: f64) -> f64 {
        match *self {
            SegmentShape::Constant { value } => value,
            SegmentShape::RaisedCosine {
                offset,
                amplitude,
                frequency,
                shift,
            } => offset + amplitude * (frequency * (r - shift)).cos(),
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        match *self {
            SegmentShape::Constant { .. } => 0.0,
            SegmentShape::RaisedCosine {
                amplitude,
                frequency,
                shift,
                ..
            } => -amplitude * frequency * (frequency * (r - shift)).sin(),
        }
    }
}

/// Half-open radial interval `[lo, hi)` carrying a formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    #[serde(flatten)]
    pub shape: SegmentShape,
}

impl Segment {
    pub fn constant(lo: f64, hi: f64, value: f64) -> Self {
        Segment {
            lo,
            hi,
            shape: SegmentShape::Constant { value },
        }
    }

    pub fn raised_cosine(lo: f64, hi: f64, offset: f64, amplitude: f64, frequency: f64, shift: f64) -> Self {
        Segment {
            lo,
            hi,
            shape: SegmentShape::RaisedCosine {
                offset,
                amplitude,
                frequency,
                shift,
            },
        }
    }
}

/// Piecewise real profile of the radius. The first segment containing `r`
/// wins; outside every segment the profile equals `background`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub segments: Vec<Segment>,
    pub background: f64,
}

impl RadialProfile {
    pub fn constant(value: f64) -> Self {
        RadialProfile {
            segments: Vec::new(),
            background: value,
        }
    }

    pub fn new(segments: Vec<Segment>, background: f64) -> Self {
        RadialProfile { segments, background }
    }

    fn segment_at(&self, r: f64) -> Option<&Segment> {
        self.segments.iter().find(|s| r >= s.lo && r < s.hi)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.segment_at(r).map_or(self.background, |s| s.shape.value(r))
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.segment_at(r).map_or(0.0, |s| s.shape.derivative(r))
    }

    /// Sorted, deduplicated positive segment end points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.lo, s.hi])
            .filter(|x| x.is_finite() && *x > 0.0)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// |left formula - right value| at a break point `b`: the left formula is
    /// the segment ending at `b` evaluated at `b` itself.
    pub fn jump_at(&self, b: f64) -> f64 {
        let left = match self.segments.iter().find(|s| s.hi == b && s.lo < b) {
            Some(s) => s.shape.value(b),
            None => match self.segments.iter().find(|s| s.lo < b && b < s.hi) {
                Some(s) => s.shape.value(b),
                None => self.background,
            },
        };
        (left - self.eval(b)).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumProfile {
    pub alpha: RadialProfile,
    pub beta: RadialProfile,
    pub alpha0: f64,
    pub beta0: f64,
    pub r_inhom: f64,
}

impl MediumProfile {
    /// The benchmark medium: alpha = 2 on [0,2), a cosine ramp down to 1 on
    /// [2,4); beta = 1 plus a cosine bump on (3,7). Background alpha0 = beta0 = 1.
    pub fn benchmark() -> Self {
        let alpha = RadialProfile::new(
            vec![
                Segment::constant(0.0, 2.0, 2.0),
                Segment::raised_cosine(2.0, 4.0, 1.5, 0.5, PI / 2.0, 2.0),
            ],
            1.0,
        );
        let beta = RadialProfile::new(vec![Segment::raised_cosine(3.0, 7.0, 2.0, 1.0, PI / 2.0, 5.0)], 1.0);
        MediumProfile {
            alpha,
            beta,
            alpha0: 1.0,
            beta0: 1.0,
            r_inhom: 7.0,
        }
    }

    pub fn constant(alpha0: f64, beta0: f64) -> Self {
        MediumProfile {
            alpha: RadialProfile::constant(alpha0),
            beta: RadialProfile::constant(beta0),
            alpha0,
            beta0,
            r_inhom: 0.0,
        }
    }

    pub fn alpha(&self, r: f64) -> f64 {
        self.alpha.eval(r)
    }

    pub fn beta(&self, r: f64) -> f64 {
        self.beta.eval(r)
    }

    /// Background speed c0 = sqrt(alpha0 / beta0).
    pub fn c0(&self) -> f64 {
        (self.alpha0 / self.beta0).sqrt()
    }

    pub fn wave_speed(&self, r: f64) -> f64 {
        (self.alpha(r) / self.beta(r)).sqrt()
    }

    pub fn is_constant(&self) -> bool {
        self.alpha.segments.is_empty() && self.beta.segments.is_empty()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: MediumFile = toml::from_str(text).map_err(|e| Error::Config(format!("medium file: {e}")))?;
        Ok(cfg.into())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        let file = MediumFile {
            alpha0: self.alpha0,
            beta0: self.beta0,
            r_inhom: self.r_inhom,
            alpha: self.alpha.segments.clone(),
            beta: self.beta.segments.clone(),
        };
        toml::to_string(&file).expect("medium serializes")
    }
}

/// On-disk layout of a custom medium.
///
/// ```toml
/// alpha0 = 1.0
/// beta0 = 1.0
/// r_inhom = 4.0
///
/// [[alpha]]
/// lo = 0.0
/// hi = 4.0
/// kind = "raised-cosine"
/// offset = 1.5
/// amplitude = 0.5
/// frequency = 0.7853981633974483
/// shift = 0.0
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MediumFile {
    pub alpha0: f64,
    pub beta0: f64,
    pub r_inhom: f64,
    #[serde(default)]
    pub alpha: Vec<Segment>,
    #[serde(default)]
    pub beta: Vec<Segment>,
}

impl From<MediumFile> for MediumProfile {
    fn from(f: MediumFile) -> Self {
        MediumProfile {
            alpha: RadialProfile::new(f.alpha, f.alpha0),
            beta: RadialProfile::new(f.beta, f.beta0),
            alpha0: f.alpha0,
            beta0: f.beta0,
            r_inhom: f.r_inhom,
        }
    }
}

/// Time-harmonic source amplitude `F(r) = scale * profile(r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    pub profile: RadialProfile,
    pub scale: Complex64,
    pub r_supp: f64,
    pub omega: f64,
}

impl SourceProfile {
    /// F(r) = 10 (1 + cos(pi (3r/4 - 1))) on (0, 8/3), omega = pi/4.
    pub fn benchmark() -> Self {
        let profile = RadialProfile::new(
            vec![Segment::raised_cosine(0.0, 8.0 / 3.0, 10.0, 10.0, 0.75 * PI, 4.0 / 3.0)],
            0.0,
        );
        SourceProfile {
            profile,
            scale: Complex64::new(1.0, 0.0),
            r_supp: 8.0 / 3.0,
            omega: PI / 4.0,
        }
    }

    pub fn zero(omega: f64) -> Self {
        SourceProfile {
            profile: RadialProfile::constant(0.0),
            scale: Complex64::new(1.0, 0.0),
            r_supp: 0.0,
            omega,
        }
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        if r > self.r_supp {
            return Complex64::new(0.0, 0.0);
        }
        self.scale * self.profile.eval(r)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        SourceProfile {
            scale: self.scale * c,
            ..self.clone()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let f: SourceFile = toml::from_str(text).map_err(|e| Error::Config(format!("source file: {e}")))?;
        Ok(f.into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SourceFile {
    pub omega: f64,
    pub r_supp: f64,
    #[serde(default)]
    pub segments: Vec<Segment>,
}

impl From<SourceFile> for SourceProfile {
    fn from(f: SourceFile) -> Self {
        SourceProfile {
            profile: RadialProfile::new(f.segments, 0.0),
            scale: Complex64::new(1.0, 0.0),
            r_supp: f.r_supp,
            omega: f.omega,
        }
    }
}

pub fn wave_speed(medium: &MediumProfile, r: f64) -> f64 {
    medium.wave_speed(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    AlphaPositivity,
    BetaPositivity,
    AlphaExterior,
    BetaExterior,
    SourceOutsideSupport,
    SupportOutsideInhomogeneity,
    AlphaContinuity,
    BetaContinuity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub check: Check,
    /// Number of failing samples (1 for the structural checks).
    pub count: usize,
    pub first_r: f64,
    pub worst: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn find(&self, check: Check) -> Option<&Violation> {
        self.violations.iter().find(|v| v.check == check)
    }

    fn record(&mut self, check: Check, r: f64, value: f64) {
        if let Some(v) = self.violations.iter_mut().find(|v| v.check == check) {
            v.count += 1;
            if value.abs() > v.worst.abs() {
                v.worst = value;
            }
        } else {
            self.violations.push(Violation {
                check,
                count: 1,
                first_r: r,
                worst: value,
            });
        }
    }
}

/// Tolerance for continuity at profile break points.
pub const CONTINUITY_TOL: f64 = 1e-12;

/// Samples the medium and source on `n_samples` uniform radii in
/// `[0, r_max]` and reports every violated assumption. Violations are
/// aggregated per check.
pub fn validate(medium: &MediumProfile, source: &SourceProfile, r_max: f64, n_samples: usize) -> Result<ValidationReport> {
    if n_samples < 2 {
        return Err(Error::Domain(format!("validate needs at least 2 samples, got {n_samples}")));
    }
    let mut report = ValidationReport::default();
    for k in 0..n_samples {
        let r = r_max * k as f64 / (n_samples - 1) as f64;
        let a = medium.alpha(r);
        let b = medium.beta(r);
        if !(a > 0.0) {
            report.record(Check::AlphaPositivity, r, a);
        }
        if !(b > 0.0) {
            report.record(Check::BetaPositivity, r, b);
        }
        if r > medium.r_inhom {
            if a != medium.alpha0 {
                report.record(Check::AlphaExterior, r, a - medium.alpha0);
            }
            if b != medium.beta0 {
                report.record(Check::BetaExterior, r, b - medium.beta0);
            }
        }
        if r > source.r_supp {
            let f = source.scale * source.profile.eval(r);
            if f.norm() != 0.0 {
                report.record(Check::SourceOutsideSupport, r, f.norm());
            }
        }
    }
    if source.r_supp > medium.r_inhom {
        report.record(
            Check::SupportOutsideInhomogeneity,
            source.r_supp,
            source.r_supp - medium.r_inhom,
        );
    }
    for (profile, check) in [(&medium.alpha, Check::AlphaContinuity), (&medium.beta, Check::BetaContinuity)] {
        for b in profile.breakpoints() {
            let jump = profile.jump_at(b);
            if jump > CONTINUITY_TOL {
                report.record(check, b, jump);
            }
        }
    }
    Ok(report)
}
