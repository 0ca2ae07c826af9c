//! Machine-readable run reports: one JSON document per experiment, every
//! numeric value stamped with the config hash that produced it.

use crate::config::ExperimentConfig;
use anyhow::Result;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct ReportValue {
    pub name: String,
    pub value: f64,
    pub provenance: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: String,
    pub description: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub config_hash: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: String,
    pub experiment: String,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub values: Vec<ReportValue>,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
    pub wall_clock_s: f64,
}

pub struct ReportBuilder {
    experiment: String,
    config: ExperimentConfig,
    hash: String,
    values: Vec<ReportValue>,
    criteria: Vec<Criterion>,
    started: Instant,
}

impl ReportBuilder {
    pub fn new(experiment: impl Into<String>, config: &ExperimentConfig) -> Self {
        ReportBuilder {
            experiment: experiment.into(),
            hash: config.hash(),
            config: config.clone(),
            values: Vec::new(),
            criteria: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn value(&mut self, name: impl Into<String>, value: f64, provenance: impl Into<String>) {
        self.values.push(ReportValue {
            name: name.into(),
            value,
            provenance: provenance.into(),
            config_hash: self.hash.clone(),
        });
    }

    /// value ≤ bound criterion.
    pub fn criterion_upper(
        &mut self,
        id: impl Into<String>,
        description: impl Into<String>,
        value: f64,
        bound: f64,
    ) -> bool {
        let pass = value <= bound && value.is_finite();
        self.criteria.push(Criterion {
            id: id.into(),
            description: description.into(),
            value,
            target: 0.0,
            tolerance: bound,
            pass,
            config_hash: self.hash.clone(),
        });
        pass
    }

    pub fn finish(self) -> Report {
        let pass = self.criteria.iter().all(|c| c.pass);
        Report {
            schema: "moyal-lab-report-v1".into(),
            experiment: self.experiment,
            config: self.config,
            config_hash: self.hash,
            values: self.values,
            criteria: self.criteria,
            pass,
            wall_clock_s: self.started.elapsed().as_secs_f64(),
        }
    }
}

impl Report {
    pub fn print_summary(&self) {
        for c in &self.criteria {
            println!(
                "[{}] {}: value={:.6e} target={:.6e} tol={:.2e} -- {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.value,
                c.target,
                c.tolerance,
                c.description
            );
        }
        println!(
            "{}: {} ({} criteria, {:.1}s)",
            self.experiment,
            if self.pass { "PASS" } else { "FAIL" },
            self.criteria.len(),
            self.wall_clock_s
        );
    }

    pub fn write_json(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.json", self.experiment));
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }
}

/// Temp-plus-rename write.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
