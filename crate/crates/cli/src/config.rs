//! Flat key = value experiment configuration; unknown keys are errors.

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use std::path::{Path, PathBuf};

/// How the fit window is chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WindowSpec {
    /// physics-derived window from the box count θ₀(1+L²)/2
    Auto,
    /// fractions of the spectrum length
    Fractions(f64, f64),
    /// absolute indices
    Absolute(usize, usize),
}

/// One experiment's knobs; every run echoes these into its report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub dim: usize,
    pub theta0: f64,
    pub grid_l: f64,
    pub grid_n: usize,
    pub grid_scheme: String,
    pub truncation: usize,
    pub sphere_nodes: usize,
    pub window: WindowSpec,
    pub stencil: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// element selector for spectrum/qd: "e00", "random", or a JSON file path
    pub x_spec: String,
    /// refinement ladder fractions applied to (L, n)
    pub refine: Vec<f64>,
    /// dump assembled operators as .bin + .json sidecars into out_dir
    pub export_operators: bool,
    /// the quantized-derivative grid is this fraction of (L, n·f) — the spin-2
    /// matrices are twice the grid dimension, so the default shrinks the box
    pub qd_grid_frac: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "default".into(),
            dim: 2,
            theta0: 2.0,
            grid_l: 9.0,
            grid_n: 64,
            grid_scheme: "midpoint-offset-uniform".into(),
            truncation: 16,
            sphere_nodes: 256,
            window: WindowSpec::Auto,
            stencil: vec![0.4, 0.2, 0.1, 0.05],
            seed: 1234,
            out_dir: PathBuf::from("out"),
            x_spec: "e00".into(),
            refine: vec![0.75, 0.875, 1.0],
            export_operators: false,
            qd_grid_frac: 0.75,
        }
    }
}

impl ExperimentConfig {
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{raw}'", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            cfg.set(key, value)
                .with_context(|| format!("line {}: key '{key}'", lineno + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "name" => self.name = value.to_string(),
            "d" => self.dim = value.parse()?,
            "theta0" => self.theta0 = value.parse()?,
            "grid_l" => self.grid_l = value.parse()?,
            "grid_n" => self.grid_n = value.parse()?,
            "grid_scheme" => self.grid_scheme = value.to_string(),
            "truncation" => self.truncation = value.parse()?,
            "sphere_nodes" => self.sphere_nodes = value.parse()?,
            "window" => {
                self.window = if value == "auto" {
                    WindowSpec::Auto
                } else if let Some(rest) = value.strip_prefix("frac:") {
                    let (a, b) = rest
                        .split_once(',')
                        .ok_or_else(|| anyhow!("window fractions need 'frac:lo,hi'"))?;
                    WindowSpec::Fractions(a.trim().parse()?, b.trim().parse()?)
                } else {
                    let (a, b) = value
                        .split_once(',')
                        .ok_or_else(|| anyhow!("absolute window needs 'lo,hi'"))?;
                    WindowSpec::Absolute(a.trim().parse()?, b.trim().parse()?)
                }
            }
            "stencil" => {
                self.stencil = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<_>>()?;
            }
            "seed" => self.seed = value.parse()?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "x_spec" => self.x_spec = value.to_string(),
            "qd_grid_frac" => self.qd_grid_frac = value.parse()?,
            "export_operators" => {
                self.export_operators = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => bail!("export_operators must be true/false, got '{other}'"),
                }
            }
            "refine" => {
                self.refine = value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("{e}")))
                    .collect::<Result<_>>()?;
            }
            other => bail!("unknown configuration key '{other}'"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim % 2 != 0 || self.dim == 0 || self.dim > 4 {
            bail!("d must be 2 or 4, got {}", self.dim);
        }
        if !(self.theta0 > 0.0) {
            bail!("theta0 must be positive");
        }
        if !(self.grid_l > 0.0) || self.grid_n < 2 {
            bail!("grid needs positive halfwidth and at least 2 points per axis");
        }
        if self.truncation == 0 || self.truncation > 32 {
            bail!("truncation must be in 1..=32");
        }
        if self.sphere_nodes < 8 {
            bail!("need at least 8 sphere nodes");
        }
        if self.stencil.len() < 4 {
            bail!("stencil needs at least 4 offsets");
        }
        let mut prev = f64::INFINITY;
        for &e in &self.stencil {
            if !(e > 0.0) || e >= prev {
                bail!("stencil offsets must be positive and strictly decreasing");
            }
            prev = e;
        }
        if !(0.1..=1.0).contains(&self.qd_grid_frac) {
            bail!("qd_grid_frac must lie in [0.1, 1]");
        }
        if self.refine.is_empty() || self.refine.iter().any(|&f| !(0.1..=1.0).contains(&f)) {
            bail!("refine fractions must lie in [0.1, 1]");
        }
        Ok(())
    }

    /// Canonical one-line-per-key form used for hashing and echoing.
    pub fn canonical_string(&self) -> String {
        let window = match &self.window {
            WindowSpec::Auto => "auto".to_string(),
            WindowSpec::Fractions(a, b) => format!("frac:{a},{b}"),
            WindowSpec::Absolute(a, b) => format!("{a},{b}"),
        };
        format!(
            "name = {}\nd = {}\ntheta0 = {}\ngrid_l = {}\ngrid_n = {}\ngrid_scheme = {}\n\
             truncation = {}\nsphere_nodes = {}\nwindow = {}\nstencil = {}\nseed = {}\n\
             out_dir = {}\nx_spec = {}\nrefine = {}\nexport_operators = {}\nqd_grid_frac = {}\n",
            self.name,
            self.dim,
            self.theta0,
            self.grid_l,
            self.grid_n,
            self.grid_scheme,
            self.truncation,
            self.sphere_nodes,
            window,
            self.stencil.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
            self.seed,
            self.out_dir.display(),
            self.x_spec,
            self.refine.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
            self.export_operators,
            self.qd_grid_frac,
        )
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.canonical_string().as_bytes());
        format!("sha256:{:x}", h.finalize())
    }

    /// The refinement ladder: L_k = f·L, n_k = even(round(f²·n)) so the
    /// phase-Nyquist margin n/L² stays constant across stages.
    pub fn ladder(&self) -> Vec<(f64, usize)> {
        self.refine
            .iter()
            .map(|&f| {
                let l = f * self.grid_l;
                let mut n = (f * f * self.grid_n as f64).round() as usize;
                if n % 2 == 1 {
                    n += 1;
                }
                (l, n.max(8))
            })
            .collect()
    }

    /// Physics window from the box count n_box = θ₀(1+L²)/2, scaled by `spin`.
    pub fn window_for(&self, l: f64, spectrum_len: usize, spin: usize) -> (usize, usize) {
        match self.window {
            WindowSpec::Auto => {
                let n_box = spin as f64 * self.theta0 * (1.0 + l * l) / 2.0;
                let lo = ((0.15 * n_box).round() as usize).max(12);
                let hi = (((0.7 * n_box).round() as usize).max(lo + 21)).min(spectrum_len);
                (lo, hi)
            }
            WindowSpec::Fractions(a, b) => {
                let lo = ((a * spectrum_len as f64).round() as usize).max(11);
                let hi = ((b * spectrum_len as f64).round() as usize).min(spectrum_len);
                (lo, hi)
            }
            WindowSpec::Absolute(a, b) => (a, b.min(spectrum_len)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = ExperimentConfig::parse_str("seed = 7\ngrid_n = 32\n# comment\n").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid_n, 32);
        assert!(ExperimentConfig::parse_str("unknown_key = 3\n").is_err());
        assert!(ExperimentConfig::parse_str("grid_n 32\n").is_err());
        assert!(ExperimentConfig::parse_str("stencil = 0.1,0.2,0.3,0.4\n").is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = ExperimentConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.seed = 99;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn ladder_keeps_nyquist_margin() {
        let cfg = ExperimentConfig::default();
        for (l, n) in cfg.ladder() {
            let nyquist = cfg.theta0 * l * l / std::f64::consts::PI;
            assert!(n as f64 > 1.15 * nyquist, "(L={l}, n={n})");
            assert_eq!(n % 2, 0);
        }
    }
}
