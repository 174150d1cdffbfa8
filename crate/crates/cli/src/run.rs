use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use boussinesq_core::besov::{equivalence_table, random_corpus};
use boussinesq_core::checks::{harmonic_checks, single_mode_checks, CheckRow};
use boussinesq_core::config::{RunConfig, SweepSpec};
use boussinesq_core::duhamel::probe::{damped_slope_suite, standard_suite};
use boussinesq_core::field::io::write_binary;
use boussinesq_core::monitor::{ledger_rows, theorem_report, write_ledger_csv, LedgerRow};
use boussinesq_core::solver::{epsilon_sweep, picard_solve, InitialData, PicardRun, RunStatus};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::Failure;

const DIVERGENCE_TOL: f64 = 1e-8;
const REFINEMENT_TOL: f64 = 0.1;
const SLOPE_MARGIN: f64 = 0.1;
const BESOV_BAND: (f64, f64) = (0.1, 10.0);
const BESOV_SPREAD: f64 = 20.0;

fn format_err(e: csv::Error) -> Failure {
    Failure::Invalid(format!("csv: {e}"))
}

pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(format_err)?;
    for r in rows {
        w.serialize(r).map_err(format_err)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Invalid(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceRow {
    n: usize,
    delta_u: Option<f64>,
    delta_u_damped: Option<f64>,
    ratio: Option<f64>,
    gronwall_4: Option<f64>,
    gronwall_2: Option<f64>,
    inner_iterations: Option<usize>,
    inner_max_factor: Option<f64>,
    transport_substeps: Option<usize>,
    theta_sup: Option<f64>,
}

#[derive(Serialize)]
struct NormRow<'a> {
    iteration: usize,
    quantity: &'a str,
    value: f64,
}

fn snapshot(path: &Path, f: &boussinesq_core::SpectralField64) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    write_binary(&f.to_physical(), &mut w)?;
    w.flush()?;
    Ok(())
}

/// History, ledgers and snapshots of one run; returns its theorem ledger rows.
fn write_run(dir: &Path, run_id: &str, run: &PicardRun<f64>, data: &InitialData<f64>) -> Result<Vec<LedgerRow>, Failure> {
    fs::create_dir_all(dir.join("snapshots"))?;
    let h = &run.history;
    write_json(&dir.join("history.json"), h)?;
    let len = h.delta_u.len().max(h.theta_sup.len());
    let rows: Vec<_> = (0..len)
        .map(|n| ConvergenceRow {
            n,
            delta_u: h.delta_u.get(n).copied(),
            delta_u_damped: h.delta_u_damped.get(n).copied(),
            ratio: n.checked_sub(1).and_then(|i| h.ratios.get(i)).copied(),
            gronwall_4: h.gronwall_4.get(n).copied(),
            gronwall_2: h.gronwall_2.get(n).copied(),
            inner_iterations: h.inner_iterations.get(n).copied(),
            inner_max_factor: h.inner_max_factor.get(n).copied(),
            transport_substeps: h.transport_substeps.get(n).copied(),
            theta_sup: h.theta_sup.get(n).copied(),
        })
        .collect();
    write_csv(&dir.join("convergence.csv"), &rows)?;
    let norms: Vec<_> = h
        .ledgers
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |(k, v)| NormRow { iteration: i, quantity: k, value: *v }))
        .collect();
    write_csv(&dir.join("ledger.csv"), &norms)?;

    let last = run.final_state();
    let reports = theorem_report(&last.norm_ledger, &h.eta, data.theta_sup, h.status.tag());
    write_json(&dir.join("theorem_report.json"), &reports)?;
    let rows = ledger_rows(run_id, &reports);
    write_ledger_csv(&rows, BufWriter::new(File::create(dir.join("theorem_ledger.csv"))?))?;

    let snaps = dir.join("snapshots");
    snapshot(&snaps.join("theta_0.bin"), &data.theta0)?;
    snapshot(&snaps.join("u_0.bin"), &data.u0)?;
    snapshot(&snaps.join("theta_T.bin"), last.theta.last())?;
    snapshot(&snaps.join("u_T.bin"), last.u.last())?;
    snapshot(&snaps.join("pi_T.bin"), last.pi.last())?;
    Ok(rows)
}

fn check_invariants(run: &PicardRun<f64>) -> Result<(), Failure> {
    let h = &run.history;
    if h.status == RunStatus::Converged && !h.max_principle_ok {
        return Err(Failure::Invariant(format!(
            "maximum principle: sup theta {:e} above bound {:e}",
            h.theta_sup.iter().fold(0.0f64, |a, b| a.max(*b)),
            h.theta_bound
        )));
    }
    if h.status != RunStatus::Diverged && h.max_divergence > DIVERGENCE_TOL {
        return Err(Failure::Invariant(format!("relative divergence {:e} above {DIVERGENCE_TOL:e}", h.max_divergence)));
    }
    Ok(())
}

fn summarize(label: &str, run: &PicardRun<f64>) {
    let h = &run.history;
    info!(
        "{label}: status {} after {} iterations, eta {:.4e}, lambda {:.4e}, last dU {:.3e}",
        h.status.tag(),
        h.iterations,
        h.eta.eta,
        h.lambda,
        h.delta_u.last().copied().unwrap_or(0.0)
    );
    if let Some(m) = &h.message {
        warn!("{label}: {m}");
    }
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;
    let data = cfg.initial_data::<f64>()?;
    let run = picard_solve(&data, &cfg.viscosity, &cfg.solver)?;
    summarize("simulate", &run);
    write_run(out, &format!("seed={}", cfg.seed), &run, &data)?;
    println!("status: {}", run.history.status.tag());
    check_invariants(&run)
}

#[derive(Serialize)]
struct SlopeRow<'a> {
    operator: &'a str,
    r: f64,
    slope: f64,
    predicted: f64,
    limit: f64,
    max_bound_ratio: f64,
    passed: bool,
}

#[derive(Serialize)]
struct DampedRow<'a> {
    operator: &'a str,
    lambda: f64,
    ratio: f64,
}

pub fn verify_ops(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    let g = &cfg.grid;
    let t = &cfg.solver.time;
    let mut checks = single_mode_checks::<f64>(g.dim, g.n, t.horizon, t.intervals, 1e-6)?;
    checks.extend(harmonic_checks::<f64>(g.dim, g.n, cfg.seed, 1e-10)?);
    write_csv(&out.join("checks.csv"), &checks)?;
    let mut failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(describe).collect();

    let pg = cfg.probes.grid(g);
    let probes = standard_suite(cfg.seed, &pg, cfg.probes.ensemble)?;
    write_csv(&out.join("probes.csv"), &probes)?;
    for p in &probes {
        if !((p.refinement_ratio - 1.0).abs() < REFINEMENT_TOL) {
            failed.push(format!("{}: refinement ratio {:.4}", p.operator, p.refinement_ratio));
        }
    }

    let slopes = damped_slope_suite(cfg.seed, &pg, cfg.probes.ensemble, &cfg.probes.lambdas)?;
    let rows: Vec<_> = slopes
        .iter()
        .map(|s| {
            let limit = s.predicted + SLOPE_MARGIN;
            SlopeRow {
                operator: &s.operator,
                r: s.r,
                slope: s.slope,
                predicted: s.predicted,
                limit,
                max_bound_ratio: s.max_bound_ratio,
                passed: s.slope <= limit,
            }
        })
        .collect();
    write_csv(&out.join("slopes.csv"), &rows)?;
    failed.extend(rows.iter().filter(|r| !r.passed).map(|r| format!("{}: slope {:.4} > {:.4}", r.operator, r.slope, r.limit)));
    let damped: Vec<_> = slopes
        .iter()
        .flat_map(|s| s.lambdas.iter().zip(&s.ratios).map(move |(l, r)| DampedRow { operator: &s.operator, lambda: *l, ratio: *r }))
        .collect();
    write_csv(&out.join("damped.csv"), &damped)?;

    info!("verify-ops: {} checks, {} probes, {} slopes, {} failures", checks.len(), probes.len(), rows.len(), failed.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(failed.join("; ")))
    }
}

fn describe(c: &CheckRow) -> String {
    let op = if c.lower_bound { ">=" } else { "<=" };
    format!("{}: {:.3e} not {op} {:.3e}", c.name, c.value, c.tolerance)
}

#[derive(Serialize)]
struct SpreadRow {
    s: f64,
    min_ratio: f64,
    max_ratio: f64,
    spread: f64,
}

pub fn besov(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    let grid = cfg.make_grid::<f64>()?;
    let corpus = random_corpus(&grid, cfg.seed, cfg.besov.corpus)?;
    let indices = cfg.besov.indices(grid.dim())?;
    let table = equivalence_table(&corpus, &indices)?;
    write_csv(&out.join("besov.csv"), &table)?;
    let spreads: Vec<_> = indices
        .iter()
        .map(|idx| {
            let r: Vec<f64> = table.iter().filter(|row| row.s == idx.s).map(|row| row.ratio).collect();
            let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = r.iter().copied().fold(0.0, f64::max);
            SpreadRow { s: idx.s, min_ratio: lo, max_ratio: hi, spread: hi / lo }
        })
        .collect();
    write_csv(&out.join("besov_summary.csv"), &spreads)?;
    let mut failed = Vec::new();
    for s in &spreads {
        info!("besov s={:.4}: ratios in [{:.4}, {:.4}], spread {:.3}", s.s, s.min_ratio, s.max_ratio, s.spread);
        if s.min_ratio < BESOV_BAND.0 || s.max_ratio > BESOV_BAND.1 || !(s.spread < BESOV_SPREAD) {
            failed.push(format!("s={}: ratios [{:.4}, {:.4}], spread {:.3}", s.s, s.min_ratio, s.max_ratio, s.spread));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(failed.join("; ")))
    }
}

#[derive(Serialize)]
struct EpsRow {
    eps_a: f64,
    eps_b: f64,
    u_difference: f64,
    theta_difference: f64,
}

#[derive(Serialize)]
struct ScaleRow {
    scale: f64,
    status: &'static str,
    iterations: usize,
    eta: f64,
    uh_besov: f64,
    ud_besov: f64,
    horizontal: f64,
    vertical: f64,
    pressure: f64,
    c1: f64,
    c2: f64,
    c4: f64,
}

pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;
    let data = cfg.initial_data::<f64>()?;
    let spec = cfg.sweep.clone().unwrap_or(SweepSpec::Epsilon { values: vec![0.1, 0.01, 0.001, 0.0] });
    match spec {
        SweepSpec::Epsilon { values } => {
            let rep = epsilon_sweep(&data, &cfg.viscosity, &cfg.solver, &values)?;
            write_json(&out.join("sweep.json"), &rep)?;
            let rows: Vec<_> = (0..rep.u_differences.len())
                .map(|i| EpsRow {
                    eps_a: rep.eps[i],
                    eps_b: rep.eps[i + 1],
                    u_difference: rep.u_differences[i],
                    theta_difference: rep.theta_differences[i],
                })
                .collect();
            write_csv(&out.join("sweep.csv"), &rows)?;
            info!("epsilon sweep: differences {:?}, monotone {}", rep.u_differences, rep.monotone);
            println!("monotone: {}", rep.monotone);
            Ok(())
        }
        SweepSpec::HorizontalScale { values } => {
            let runs = values
                .par_iter()
                .map(|&s| -> Result<_, Failure> {
                    let d = data.with_horizontal_scaled(s)?;
                    let run = picard_solve(&d, &cfg.viscosity, &cfg.solver)?;
                    let rows = write_run(&out.join(format!("scale_{s}")), &format!("scale={s}"), &run, &d)?;
                    Ok((s, run, rows))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let mut all = Vec::new();
            let mut table = Vec::new();
            for (s, run, rows) in &runs {
                summarize(&format!("scale {s}"), run);
                check_invariants(run)?;
                let h = &run.history;
                let find = |name: &str| rows.iter().find(|r| r.inequality == name).map_or((0.0, 0.0), |r| (r.lhs, r.inferred_c));
                let (hz, c1) = find("horizontal velocity");
                let (vt, c2) = find("vertical velocity");
                let (pr, c4) = find("pressure");
                table.push(ScaleRow {
                    scale: *s,
                    status: h.status.tag(),
                    iterations: h.iterations,
                    eta: h.eta.eta,
                    uh_besov: h.eta.uh_besov,
                    ud_besov: h.eta.ud_besov,
                    horizontal: hz,
                    vertical: vt,
                    pressure: pr,
                    c1,
                    c2,
                    c4,
                });
                all.extend(rows.iter().cloned());
            }
            write_csv(&out.join("scales.csv"), &table)?;
            write_ledger_csv(&all, BufWriter::new(File::create(out.join("theorem_ledger.csv"))?))
                .map_err(Failure::from)
        }
    }
}
