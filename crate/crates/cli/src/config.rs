//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use theta_forge::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every field is optional; unset fields fall back to per-command defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub k: Option<i64>,
    pub tau: Option<String>,
    pub t: Option<f64>,
    pub tol: Option<f64>,
    #[serde(rename = "N")]
    pub grid_n: Option<usize>,
    pub radius_cap: Option<usize>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            n: over.n.or(self.n),
            k: over.k.or(self.k),
            tau: over.tau.or(self.tau),
            t: over.t.or(self.t),
            tol: over.tol.or(self.tol),
            grid_n: over.grid_n.or(self.grid_n),
            radius_cap: over.radius_cap.or(self.radius_cap),
            format: over.format.or(self.format),
            output: over.output.or(self.output),
            seed: over.seed.or(self.seed),
            threads: over.threads.or(self.threads),
        }
    }

    pub fn tau(&self) -> Result<Complex64, String> {
        parse_tau(self.tau.as_deref().unwrap_or("0+1i"))
    }

    pub fn validate(&self) -> Result<(), String> {
        self.tau()?;
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(format!("tolerance must be positive, got {tol}"));
            }
        }
        if let Some(n) = self.grid_n {
            if n < 4 {
                return Err(format!("quadrature N must be >= 4, got {n}"));
            }
        }
        Ok(())
    }
}

/// `a+bi` with `Im τ > 0`.
pub fn parse_tau(s: &str) -> Result<Complex64, String> {
    let tau = parse_complex(s)?;
    if !(tau.im > 0.0) {
        return Err(format!("Im τ must be positive, got {s}"));
    }
    Ok(tau)
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    cleaned.parse::<Complex64>().map_err(|_| format!("cannot parse {s:?} as a complex number"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_forms() {
        assert_eq!(parse_tau("0+1i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_tau("0.3+0.8i").unwrap(), Complex64::new(0.3, 0.8));
        assert_eq!(parse_tau("-0.5 + 2i").unwrap(), Complex64::new(-0.5, 2.0));
        assert!(parse_tau("1-1i").is_err());
        assert!(parse_tau("abc").is_err());
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = RunConfig { n: Some(3), k: Some(1), ..Default::default() };
        let flags = RunConfig { k: Some(2), ..Default::default() };
        let m = file.overlay(flags);
        assert_eq!((m.n, m.k), (Some(3), Some(2)));
    }

    #[test]
    fn config_file_round_trip() {
        let c: RunConfig = serde_json::from_str(r#"{"n": 4, "tau": "0.3+0.8i", "N": 12, "format": "csv"}"#).unwrap();
        assert_eq!(c.grid_n, Some(12));
        assert_eq!(c.format, Some(Format::Csv));
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
