//! Output directory handling and artifact writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lapsim::{MediumProfile, SourceProfile};
use serde::Serialize;

use crate::Failure;

pub const OUT_ENV: &str = "LAPSIM_OUT";
const DEFAULT_OUT: &str = "lapsim-out";

/// Collects the files written by one run for the manifest.
pub struct Output {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Output {
    /// Flag, then config file, then `$LAPSIM_OUT`, then `./lapsim-out`.
    pub fn create(flag: Option<PathBuf>, file: Option<PathBuf>) -> Result<Self, Failure> {
        let dir = flag
            .or(file)
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        std::fs::create_dir_all(&dir)
            .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Output { dir, files: Vec::new() })
    }

    /// Creates `name` in the output directory and hands a buffered writer to `f`.
    pub fn write<F>(&mut self, name: &str, f: F) -> Result<(), Failure>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let io = |e: std::io::Error| Failure::Config(format!("cannot write {}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        f(&mut w).and_then(|_| w.flush()).map_err(io)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(std::io::Error::other)?;
            writeln!(w)
        })
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        self.write(name, |w| writeln!(w, "{body}"))
    }

    /// Writes `manifest.json` listing the parameters and every artifact.
    pub fn finish<T: Serialize>(mut self, command: &str, config: Option<&Path>, parameters: &T) -> Result<PathBuf, Failure> {
        #[derive(Serialize)]
        struct Manifest<'a, T> {
            command: &'a str,
            version: &'a str,
            config_file: Option<String>,
            parallel: bool,
            parameters: &'a T,
            outputs: &'a [String],
        }
        let files = std::mem::take(&mut self.files);
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            config_file: config.map(|p| p.display().to_string()),
            parallel: cfg!(feature = "parallel"),
            parameters,
            outputs: &files,
        };
        self.json("manifest.json", &manifest)?;
        Ok(self.dir)
    }
}

/// `r,alpha,beta,F` sampled on `[0, r_max]`.
pub fn write_medium_csv<W: Write>(
    medium: &MediumProfile,
    source: &SourceProfile,
    r_max: f64,
    n: usize,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "r,alpha,beta,F")?;
    for j in 0..=n {
        let r = r_max * j as f64 / n as f64;
        writeln!(
            w,
            "{:e},{:e},{:e},{:e}",
            r,
            medium.alpha(r),
            medium.beta(r),
            source.eval(r).re
        )?;
    }
    Ok(())
}
