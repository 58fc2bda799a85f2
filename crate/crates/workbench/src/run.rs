//! Subcommand implementations. Each one resolves its parameters, computes,
//! writes one or more CSV files plus `run_manifest.json`, and prints a line
//! per file written. Scan-backed commands collect records in memory, sort
//! by (energy, rank), and only then touch the filesystem, so a failed run
//! never leaves a half-written table behind.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use xychain::scanner::{scan_subspace, state_at_rank, OCC_ECHO_MAX};
use xychain::stats::{derivative_series, dis_histogram, does_histogram, extract_series};
use xychain::{Histogram, ModeTable, ModelParams, OccupationSet, ScanPolicy, StateRecord};

use crate::config::{resolve, Resolved};
use crate::report::{write_csv, Cell, Manifest, OutputMeta};
use crate::{io_err, Command, Error, Request, Result};

/// Runs one full invocation: config resolution, compute, file emission.
pub fn execute(req: &Request) -> Result<()> {
    let file_text = match &req.config_path {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let cfg = resolve(file_text.as_deref(), &req.overrides)?;
    fs::create_dir_all(&cfg.out).map_err(|e| io_err("creating", &cfg.out, e))?;

    match &req.command {
        Command::GroundSweep { h_lo, h_hi, h_step } => run_ground_sweep(
            &cfg,
            h_lo.unwrap_or(cfg.h_lo),
            h_hi.unwrap_or(cfg.h_hi),
            h_step.unwrap_or(cfg.h_step),
        ),
        Command::ExcitedScan { h, nb } => {
            run_excited_scan(&cfg, h.unwrap_or(cfg.model.h), nb.unwrap_or(cfg.m))
        }
        Command::MaxCSweep { nb, h_lo, h_hi, h_step } => run_max_c_sweep(
            &cfg,
            nb.unwrap_or(cfg.m),
            h_lo.unwrap_or(cfg.h_lo),
            h_hi.unwrap_or(cfg.h_hi),
            h_step.unwrap_or(cfg.h_step),
        ),
        Command::Does { bins } => run_does(&cfg, bins.unwrap_or(cfg.bins_energy)),
        Command::Dis { bins } => run_dis(&cfg, bins.unwrap_or(cfg.bins_concurrence)),
        Command::OracleCheck { n, h, nb_list, tol } => run_oracle_check(
            &cfg,
            n.unwrap_or(8),
            h.unwrap_or(cfg.model.h),
            nb_list.clone().unwrap_or_else(|| (0..=n.unwrap_or(8)).collect()),
            tol.unwrap_or(1e-8),
        ),
    }
}

/// Parameters every manifest records, before subcommand-specific ones.
fn base_params(cfg: &Resolved) -> serde_json::Value {
    json!({
        "j": cfg.model.j,
        "delta": cfg.model.delta,
        "h": cfg.model.h,
        "n": cfg.model.n,
        "grid": cfg.model.grid.to_string(),
        "m": cfg.m,
        "budget": cfg.budget,
        "sample_count": cfg.sample_count,
        "seed": cfg.seed,
        "bins_energy": cfg.bins_energy,
        "bins_concurrence": cfg.bins_concurrence,
        "tol_ent": cfg.tol_ent,
        "workers": cfg.workers,
        "output_dir": cfg.out.display().to_string(),
    })
}

fn set_param(params: &mut serde_json::Value, key: &str, value: serde_json::Value) {
    params[key] = value;
}

fn policy_for(cfg: &Resolved, m: usize) -> ScanPolicy {
    ScanPolicy {
        m,
        budget: cfg.budget,
        sample_count: cfg.sample_count,
        seed: cfg.seed,
        tol_ent: cfg.tol_ent,
        workers: cfg.workers,
    }
}

fn announce(path: &Path, rows: usize) {
    println!("wrote {} ({rows} rows)", path.display());
}

fn occ_text(occ: &OccupationSet) -> String {
    if occ.is_empty() {
        return "-".to_string();
    }
    occ.indices().iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

/// Rebuilds the model at a different field (and optionally size). Domain
/// checks run again, so a sweep endpoint outside the model's domain fails
/// as a config error, not deep inside the math.
fn model_at(cfg: &Resolved, h: f64, n: usize) -> Result<ModelParams> {
    ModelParams::new(cfg.model.j, cfg.model.delta, h, n, cfg.model.grid).map_err(Error::from)
}

fn run_ground_sweep(cfg: &Resolved, h_lo: f64, h_hi: f64, h_step: f64) -> Result<()> {
    let mut params = base_params(cfg);
    set_param(&mut params, "h_lo", json!(h_lo));
    set_param(&mut params, "h_hi", json!(h_hi));
    set_param(&mut params, "h_step", json!(h_step));
    let mut manifest = Manifest::new("ground-sweep", params);

    let t = Instant::now();
    let points = xychain::stats::ground_sweep(&cfg.model, h_lo, h_hi, h_step)?;
    manifest.time("compute", t.elapsed().as_millis());

    let t = Instant::now();
    let rows: Vec<Vec<Cell>> = points
        .iter()
        .map(|p| {
            vec![
                Cell::Float(p.h),
                Cell::Float(p.e_per_site),
                Cell::Float(p.corr.f0),
                Cell::Float(p.corr.f1.re),
                Cell::Float(p.corr.f1.im),
                Cell::Float(p.corr.f2),
                Cell::Float(p.rdm.xp),
                Cell::Float(p.rdm.xm),
                Cell::Float(p.rdm.yp),
                Cell::Float(p.rdm.ym),
                Cell::Float(p.conc.c1),
                Cell::Float(p.conc.c2),
                Cell::Float(p.conc.c),
            ]
        })
        .collect();
    let path = cfg.out.join("ground_sweep.csv");
    write_csv(
        &path,
        &[
            "h", "E_per_site", "f0", "f1_re", "f1_im", "f2", "Xp", "Xm", "Yp", "Ym", "C1",
            "C2", "C",
        ],
        &rows,
    )?;
    manifest.output("ground_sweep.csv", OutputMeta::plain(rows.len()));
    announce(&path, rows.len());

    // the finite-difference stencil needs three points; shorter sweeps
    // just omit the derivative file
    if points.len() >= 3 {
        let series = extract_series(&points, "C", |p| p.conc.c)?;
        let deriv = derivative_series(&series)?;
        let rows: Vec<Vec<Cell>> = deriv
            .h
            .iter()
            .zip(&deriv.values)
            .map(|(&h, &d)| vec![Cell::Float(h), Cell::Float(d)])
            .collect();
        let path = cfg.out.join("derivative.csv");
        write_csv(&path, &["h", "dC_dh"], &rows)?;
        manifest.output("derivative.csv", OutputMeta::plain(rows.len()));
        announce(&path, rows.len());
    }
    manifest.time("write", t.elapsed().as_millis());
    manifest.write(&cfg.out)?;
    Ok(())
}

/// Scans the m-quasiparticle subspace at field h, collecting every record.
fn collect_scan(
    cfg: &Resolved,
    h: f64,
    m: usize,
) -> Result<(ModeTable, Vec<StateRecord>, xychain::ScanSummary)> {
    let params = model_at(cfg, h, cfg.model.n)?;
    let table = ModeTable::build(&params)?;
    let policy = policy_for(cfg, m);
    let mut records = Vec::new();
    let summary = scan_subspace(&table, &policy, |rec| {
        records.push(rec);
        Ok(())
    })?;
    Ok((table, records, summary))
}

/// Scan outputs are sorted by (energy, rank): reproducible across worker
/// counts and convenient for spectral plots.
fn sort_records(records: &mut [StateRecord]) -> Result<()> {
    if let Some(bad) =
        records.iter().find(|r| !r.energy.is_finite() || !r.concurrence.is_finite())
    {
        return Err(Error::Integrity(format!(
            "non-finite record for state of rank {}",
            bad.rank
        )));
    }
    records.sort_by(|a, b| {
        a.energy
            .partial_cmp(&b.energy)
            .expect("energies checked finite")
            .then_with(|| a.rank.cmp(&b.rank))
    });
    Ok(())
}

fn run_excited_scan(cfg: &Resolved, h: f64, nb: usize) -> Result<()> {
    let mut params = base_params(cfg);
    set_param(&mut params, "h", json!(h));
    set_param(&mut params, "nb", json!(nb));
    let mut manifest = Manifest::new("excited-scan", params);

    let t = Instant::now();
    let (_, mut records, summary) = collect_scan(cfg, h, nb)?;
    sort_records(&mut records)?;
    manifest.time("scan", t.elapsed().as_millis());

    let t = Instant::now();
    let echo_occ = nb <= OCC_ECHO_MAX;
    let header: &[&str] =
        if echo_occ { &["rank", "E", "C", "occ_modes"] } else { &["rank", "E", "C"] };
    let rows: Vec<Vec<Cell>> = records
        .iter()
        .map(|r| {
            let mut row = vec![
                Cell::Text(r.rank.to_string()),
                Cell::Float(r.energy),
                Cell::Float(r.concurrence),
            ];
            if echo_occ {
                let occ = r.occ.as_ref().expect("echoed occupations for small m");
                row.push(Cell::Text(occ_text(occ)));
            }
            row
        })
        .collect();
    let path = cfg.out.join("excited_scan.csv");
    write_csv(&path, header, &rows)?;
    manifest.output("excited_scan.csv", OutputMeta::scanned(rows.len(), summary.exhaustive));
    manifest.time("write", t.elapsed().as_millis());
    manifest.write(&cfg.out)?;
    announce(&path, rows.len());
    Ok(())
}

fn run_max_c_sweep(cfg: &Resolved, nb: usize, h_lo: f64, h_hi: f64, h_step: f64) -> Result<()> {
    let mut params = base_params(cfg);
    set_param(&mut params, "nb", json!(nb));
    set_param(&mut params, "h_lo", json!(h_lo));
    set_param(&mut params, "h_hi", json!(h_hi));
    set_param(&mut params, "h_step", json!(h_step));
    let mut manifest = Manifest::new("max-c-sweep", params);

    if !(h_step > 0.0) {
        return Err(Error::Config(format!("sweep step must be positive, got {h_step}")));
    }
    if !(h_hi > h_lo) {
        return Err(Error::Config("sweep range is empty".to_string()));
    }

    let t = Instant::now();
    let count = ((h_hi - h_lo) / h_step + 1e-9).floor() as usize + 1;
    let mut rows = Vec::with_capacity(count);
    let mut all_exhaustive = true;
    for i in 0..count {
        let h = h_lo + h_step * i as f64;
        let table = ModeTable::build(&model_at(cfg, h, cfg.model.n)?)?;
        let policy = policy_for(cfg, nb);
        // same fold max_concurrence uses; running it through scan_subspace
        // directly keeps the summary, which the manifest needs
        let mut best = None;
        let summary = scan_subspace(&table, &policy, |rec| {
            let better = match &best {
                None => true,
                Some((c, rank)) => {
                    rec.concurrence > *c || (rec.concurrence == *c && rec.rank < *rank)
                }
            };
            if better {
                best = Some((rec.concurrence, rec.rank));
            }
            Ok(())
        })?;
        all_exhaustive &= summary.exhaustive;
        let (c_max, rank) = best.expect("subspace scans visit at least one state");
        let occ = state_at_rank(cfg.model.n, nb, &rank)?;
        rows.push(vec![Cell::Float(h), Cell::Float(c_max), Cell::Text(occ_text(&occ))]);
    }
    manifest.time("scan", t.elapsed().as_millis());

    let t = Instant::now();
    let path = cfg.out.join("max_c_sweep.csv");
    write_csv(&path, &["h", "C_max", "argmax_occ"], &rows)?;
    manifest.output("max_c_sweep.csv", OutputMeta::scanned(rows.len(), all_exhaustive));
    manifest.time("write", t.elapsed().as_millis());
    manifest.write(&cfg.out)?;
    announce(&path, rows.len());
    Ok(())
}

/// Sample size to hand the estimators: None when the scan was exhaustive.
fn sample_size(summary: &xychain::ScanSummary) -> Option<u64> {
    if summary.exhaustive {
        None
    } else {
        Some(summary.visited)
    }
}

fn run_does(cfg: &Resolved, bins: usize) -> Result<()> {
    let mut params = base_params(cfg);
    set_param(&mut params, "bins", json!(bins));
    let mut manifest = Manifest::new("does", params);

    let t = Instant::now();
    let (table, records, summary) = collect_scan(cfg, cfg.model.h, cfg.m)?;
    manifest.time("scan", t.elapsed().as_millis());

    let t = Instant::now();
    // analytic subspace bounds, so sampled runs bin like exhaustive ones
    let (e_min, e_max) = table.energy_bounds(cfg.m);
    let hist = does_histogram(
        &records,
        e_min,
        e_max,
        bins,
        cfg.model.n,
        cfg.m,
        cfg.tol_ent,
        sample_size(&summary),
    )?;
    let rows: Vec<Vec<Cell>> = (0..hist.bins)
        .map(|i| {
            let (lo, hi) = hist.edges(i);
            vec![
                Cell::Float(lo),
                Cell::Float(hi),
                Cell::Float(hist.center(i)),
                Cell::Int(hist.counts[i]),
                Cell::Int(hist.totals[i]),
                Cell::Float(hist.weights[i]),
                Cell::Bool(hist.estimated),
            ]
        })
        .collect();
    let path = cfg.out.join("does.csv");
    write_csv(
        &path,
        &["bin_lo", "bin_hi", "bin_center", "count_entangled", "count_total", "weight", "estimated"],
        &rows,
    )?;
    manifest.output("does.csv", OutputMeta::scanned(rows.len(), summary.exhaustive));
    manifest.time("histogram", t.elapsed().as_millis());
    manifest.write(&cfg.out)?;
    announce(&path, rows.len());
    Ok(())
}

fn run_dis(cfg: &Resolved, bins: usize) -> Result<()> {
    let mut params = base_params(cfg);
    set_param(&mut params, "bins", json!(bins));
    let mut manifest = Manifest::new("dis", params);

    let t = Instant::now();
    let (_, records, summary) = collect_scan(cfg, cfg.model.h, cfg.m)?;
    manifest.time("scan", t.elapsed().as_millis());

    let t = Instant::now();
    let hist: Histogram =
        dis_histogram(&records, bins, cfg.model.n, cfg.m, cfg.tol_ent, sample_size(&summary))?;
    let rows: Vec<Vec<Cell>> = (0..hist.bins)
        .map(|i| {
            let (lo, hi) = hist.edges(i);
            vec![
                Cell::Float(lo),
                Cell::Float(hi),
                Cell::Int(hist.counts[i]),
                Cell::Float(hist.weights[i]),
                Cell::Bool(hist.estimated),
            ]
        })
        .collect();
    let path = cfg.out.join("dis.csv");
    write_csv(&path, &["bin_lo", "bin_hi", "count", "weight", "estimated"], &rows)?;
    manifest.output("dis.csv", OutputMeta::scanned(rows.len(), summary.exhaustive));
    manifest.time("histogram", t.elapsed().as_millis());
    manifest.write(&cfg.out)?;
    announce(&path, rows.len());
    Ok(())
}

fn run_oracle_check(
    cfg: &Resolved,
    n: usize,
    h: f64,
    nb_list: Vec<usize>,
    tol: f64,
) -> Result<()> {
    let mut params = base_params(cfg);
    set_param(&mut params, "n", json!(n));
    set_param(&mut params, "h", json!(h));
    set_param(&mut params, "nb_list", json!(nb_list));
    set_param(&mut params, "tol", json!(tol));
    let mut manifest = Manifest::new("oracle-check", params);

    let t = Instant::now();
    let model = model_at(cfg, h, n)?;
    let report = xychain::oracle::cross_check(&model, &nb_list, tol)?;
    manifest.time("compute", t.elapsed().as_millis());

    let t = Instant::now();
    let rows: Vec<Vec<Cell>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                Cell::Text(c.kind.to_string()),
                Cell::Text(c.label.clone()),
                Cell::Float(c.analytic),
                Cell::Float(c.oracle),
                Cell::Float(c.residual),
                Cell::Text(c.status.to_string()),
            ]
        })
        .collect();
    let path = cfg.out.join("oracle_report.csv");
    write_csv(
        &path,
        &["check_kind", "label", "analytic", "oracle", "residual", "status"],
        &rows,
    )?;
    manifest.output("oracle_report.csv", OutputMeta::plain(rows.len()));
    manifest.time("write", t.elapsed().as_millis());
    manifest.write(&cfg.out)?;
    announce(&path, rows.len());
    println!(
        "oracle-check: {} energies matched (max residual {:.3e}), {} failures, {} skipped",
        report.matched_energies, report.max_energy_residual, report.failures, report.skipped
    );
    if report.failures > 0 {
        return Err(Error::Integrity(format!(
            "oracle cross-check failed {} comparisons (see {})",
            report.failures,
            path.display()
        )));
    }
    Ok(())
}
