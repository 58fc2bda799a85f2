//! Run configuration: a flat JSON file (one nesting level, one section per
//! concern) merged with command-line flags. Flags win over the file, the
//! file wins over defaults, and the defaults describe the chain the rest of
//! the suite studies: N = 1000, δ = 0.8, J = 1 on the periodic grid.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;
use xychain::{Grid, ModelParams};

use crate::{Error, Overrides, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    scan: ScanSection,
    #[serde(default)]
    stats: StatsSection,
    output_dir: Option<String>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    j: Option<f64>,
    delta: Option<f64>,
    h: Option<f64>,
    n: Option<usize>,
    grid: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    h_lo: Option<f64>,
    h_hi: Option<f64>,
    h_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanSection {
    m: Option<usize>,
    budget: Option<u64>,
    sample_count: Option<u64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsSection {
    bins_energy: Option<usize>,
    bins_concurrence: Option<usize>,
    tol_ent: Option<f64>,
}

/// Everything a run needs, fully validated. `model` carries the default
/// field value; sweeps replace it point by point and subcommand flags may
/// replace it outright.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub model: ModelParams,
    pub h_lo: f64,
    pub h_hi: f64,
    pub h_step: f64,
    pub m: usize,
    pub budget: u64,
    pub sample_count: u64,
    pub seed: u64,
    pub bins_energy: usize,
    pub bins_concurrence: usize,
    pub tol_ent: f64,
    pub out: PathBuf,
    pub workers: usize,
}

pub fn resolve(file_text: Option<&str>, ov: &Overrides) -> Result<Resolved> {
    let file: FileConfig = match file_text {
        // serde_json errors carry "at line L column C"; keep that anchor
        Some(text) => serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config file: {e}")))?,
        None => FileConfig::default(),
    };

    let j = file.model.j.unwrap_or(1.0);
    let delta = ov.delta.or(file.model.delta).unwrap_or(0.8);
    let h = file.model.h.unwrap_or(1.2);
    let n = ov.n.or(file.model.n).unwrap_or(1000);
    let grid_name =
        ov.grid.clone().or(file.model.grid).unwrap_or_else(|| "periodic".to_string());
    let grid = Grid::from_str(&grid_name).map_err(Error::from)?;
    let model = ModelParams::new(j, delta, h, n, grid).map_err(Error::from)?;

    let h_lo = file.sweep.h_lo.unwrap_or(0.0);
    let h_hi = file.sweep.h_hi.unwrap_or(3.0);
    let h_step = file.sweep.h_step.unwrap_or(0.01);
    if !(h_step > 0.0) {
        return Err(Error::Config(format!("sweep step must be positive, got {h_step}")));
    }

    let workers = ov.workers.or(file.workers).unwrap_or(1);
    if workers == 0 {
        return Err(Error::Config("worker count must be at least 1".to_string()));
    }

    let bins_energy = file.stats.bins_energy.unwrap_or(50);
    let bins_concurrence = file.stats.bins_concurrence.unwrap_or(10_000);
    if bins_energy == 0 || bins_concurrence == 0 {
        return Err(Error::Config("bin counts must be at least 1".to_string()));
    }
    let tol_ent = file.stats.tol_ent.unwrap_or(1e-12);
    if tol_ent < 0.0 {
        return Err(Error::Config("entanglement tolerance must be nonnegative".to_string()));
    }

    Ok(Resolved {
        model,
        h_lo,
        h_hi,
        h_step,
        m: file.scan.m.unwrap_or(2),
        budget: ov.budget.or(file.scan.budget).unwrap_or(10_000_000),
        sample_count: file.scan.sample_count.unwrap_or(1_000_000),
        seed: ov.seed.or(file.scan.seed).unwrap_or(1),
        bins_energy,
        bins_concurrence,
        tol_ent,
        out: ov
            .out
            .clone()
            .or_else(|| file.output_dir.map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out")),
        workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_describe_the_reference_chain() {
        let r = resolve(None, &Overrides::default()).unwrap();
        assert_eq!(r.model.n, 1000);
        assert_eq!(r.model.delta, 0.8);
        assert_eq!(r.model.j, 1.0);
        assert_eq!(r.model.grid, Grid::Periodic);
        assert_eq!((r.h_lo, r.h_hi, r.h_step), (0.0, 3.0, 0.01));
        assert_eq!(r.m, 2);
        assert_eq!(r.budget, 10_000_000);
        assert_eq!(r.sample_count, 1_000_000);
        assert_eq!(r.seed, 1);
        assert_eq!(r.bins_energy, 50);
        assert_eq!(r.bins_concurrence, 10_000);
        assert_eq!(r.tol_ent, 1e-12);
        assert_eq!(r.workers, 1);
        assert_eq!(r.out, PathBuf::from("out"));
    }

    #[test]
    fn flags_override_the_file() {
        let text = r#"{
            "model": {"n": 200, "delta": 0.5, "grid": "antiperiodic"},
            "scan": {"seed": 9, "budget": 5},
            "workers": 2,
            "output_dir": "from_file"
        }"#;
        let ov = Overrides {
            n: Some(300),
            delta: Some(0.25),
            grid: Some("periodic".to_string()),
            seed: Some(11),
            budget: Some(7),
            workers: Some(4),
            out: Some(PathBuf::from("from_flag")),
        };
        let r = resolve(Some(text), &ov).unwrap();
        assert_eq!(r.model.n, 300);
        assert_eq!(r.model.delta, 0.25);
        assert_eq!(r.model.grid, Grid::Periodic);
        assert_eq!(r.seed, 11);
        assert_eq!(r.budget, 7);
        assert_eq!(r.workers, 4);
        assert_eq!(r.out, PathBuf::from("from_flag"));

        // absent flags fall back to the file
        let r = resolve(Some(text), &Overrides::default()).unwrap();
        assert_eq!(r.model.n, 200);
        assert_eq!(r.model.grid, Grid::Antiperiodic);
        assert_eq!(r.seed, 9);
        assert_eq!(r.out, PathBuf::from("from_file"));
    }

    #[test]
    fn malformed_json_reports_the_line() {
        let err = resolve(Some("{\n  \"model\": {\n    \"delta\": oops\n"), &Overrides::default())
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = resolve(Some(r#"{"model": {"gamma": 0.8}}"#), &Overrides::default())
            .unwrap_err();
        assert!(err.to_string().contains("gamma"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn out_of_domain_values_are_rejected() {
        for text in [
            r#"{"model": {"delta": 1.5}}"#,
            r#"{"model": {"h": -0.2}}"#,
            r#"{"sweep": {"h_step": 0.0}}"#,
            r#"{"workers": 0}"#,
            r#"{"model": {"grid": "moebius"}}"#,
        ] {
            let err = resolve(Some(text), &Overrides::default()).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text} should be a config error, got {err}");
        }
    }
}
