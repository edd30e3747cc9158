//! Run configuration: an optional TOML file with one table per subcommand,
//! overridden field by field by command-line flags.

use std::path::{Path, PathBuf};

use lapsim::medium::{MediumFile, SourceFile};
use lapsim::{MediumProfile, SourceProfile};
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub out_dir: Option<PathBuf>,
    pub sequential: Option<bool>,
    pub medium: Option<MediumFile>,
    pub source: Option<SourceFile>,
    #[serde(default)]
    pub figure_b: FigureBSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub raytrace: RaytraceSection,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub helmholtz: HelmholtzSection,
    #[serde(default)]
    pub wave: WaveSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureBSection {
    pub dims: Option<Vec<usize>>,
    pub r0: Option<f64>,
    pub r_max: Option<f64>,
    pub dr: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub every: Option<usize>,
    pub fast_window: Option<(f64, f64)>,
    pub slow_window: Option<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub only: Option<Vec<String>>,
    pub wave_tolerance: Option<f64>,
    pub helmholtz_tolerance: Option<f64>,
    pub oscillatory_bound: Option<f64>,
    pub hankel_tolerance: Option<f64>,
    pub ray_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaytraceSection {
    pub fixture: Option<String>,
    pub positions: Option<usize>,
    pub directions: Option<usize>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub r_escape: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub mode: Option<String>,
    pub dims: Option<Vec<usize>>,
    pub r_max: Option<f64>,
    pub dr: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub r0: Option<f64>,
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub p: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelmholtzSection {
    pub d: Option<usize>,
    pub r_max: Option<f64>,
    pub dr: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    pub d: Option<usize>,
    pub r_max: Option<f64>,
    pub dr: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub forcing: Option<String>,
    pub snapshots: Option<Vec<f64>>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text =
            std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Config(format!("config {}: {e}", path.display())))
    }

    pub fn medium(&self) -> MediumProfile {
        self.medium.clone().map_or_else(MediumProfile::benchmark, Into::into)
    }

    pub fn source(&self) -> SourceProfile {
        self.source.clone().map_or_else(SourceProfile::benchmark, Into::into)
    }
}

/// Flag, then file, then default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::Config(format!("{name} must be positive (got {v})")))
    }
}

pub fn dims(v: &[usize]) -> Result<Vec<usize>, Failure> {
    if v.is_empty() || v.iter().any(|d| !(1..=3).contains(d)) {
        return Err(Failure::Config(format!("dimensions must be drawn from 1, 2, 3 (got {v:?})")));
    }
    let mut out = v.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn window(name: &str, w: (f64, f64)) -> Result<(f64, f64), Failure> {
    if w.0 >= 0.0 && w.0 < w.1 {
        Ok(w)
    } else {
        Err(Failure::Config(format!("{name} must satisfy 0 <= lo < hi (got {w:?})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse_and_unknown_keys_fail() {
        let cfg: ConfigFile = toml::from_str("out_dir = \"x\"\n[figure_b]\ndims = [1, 3]\ndr = 0.1\n").unwrap();
        assert_eq!(cfg.figure_b.dims, Some(vec![1, 3]));
        assert!(toml::from_str::<ConfigFile>("[figure_b]\nbogus = 1\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        assert_eq!(pick(Some(1.0), Some(2.0), 3.0), 1.0);
        assert_eq!(pick(None, Some(2.0), 3.0), 2.0);
        assert_eq!(pick(None, None, 3.0), 3.0);
    }

    #[test]
    fn validation_helpers() {
        assert!(positive("dr", 0.0).is_err());
        assert_eq!(dims(&[3, 1, 3]).unwrap(), vec![1, 3]);
        assert!(dims(&[4]).is_err());
        assert!(window("w", (5.0, 1.0)).is_err());
    }
}
