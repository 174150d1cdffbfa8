use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use boussinesq_core::monitor::LedgerRow;
use log::info;
use serde::Serialize;

use crate::run::write_csv;
use crate::Failure;

fn find(dir: &Path, name: &str, skip: &Path, acc: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let p = e.path();
        if p == skip {
            continue;
        }
        if p.is_dir() {
            find(&p, name, skip, acc)?;
        } else if p.file_name().is_some_and(|f| f == name) {
            acc.push(p);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantRow {
    inequality: String,
    runs: usize,
    min_c: f64,
    max_c: f64,
    spread: f64,
}

#[derive(Serialize)]
struct RunRow {
    index: usize,
    run_id: String,
    inequality: String,
    lhs: f64,
    inferred_c: f64,
}

const PLOT: &str = "\
set datafile separator ','
set key outside right
set logscale y
set xlabel 'run'
set ylabel 'inferred constant'
set terminal pngcairo size 900,600
set output 'constants.png'
";

const CONVERGENCE_PLOT: &str = "\
set datafile separator ','
set logscale y
set xlabel 'iteration'
set ylabel 'dU'
set terminal pngcairo size 900,600
set output 'convergence.png'
plot for [f in FILES] f using 1:2 skip 1 with linespoints title f
";

/// Collects every theorem ledger below `out` into `out/report`.
pub fn report(out: &Path) -> Result<(), Failure> {
    if !out.is_dir() {
        return Err(Failure::Invalid(format!("{} is not a directory", out.display())));
    }
    let dest = out.join("report");
    let mut ledgers = Vec::new();
    find(out, "theorem_ledger.csv", &dest, &mut ledgers)?;
    if ledgers.is_empty() {
        return Err(Failure::Invalid(format!("no theorem_ledger.csv under {}", out.display())));
    }
    let mut rows: BTreeMap<(String, String), LedgerRow> = BTreeMap::new();
    for path in &ledgers {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        for r in rdr.deserialize::<LedgerRow>() {
            let r = r.map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
            rows.insert((r.run_id.clone(), r.inequality.clone()), r);
        }
    }
    fs::create_dir_all(&dest)?;
    let mut run_index = BTreeMap::new();
    for (run, _) in rows.keys() {
        let n = run_index.len();
        run_index.entry(run.clone()).or_insert(n);
    }
    let runs: Vec<_> = rows
        .values()
        .map(|r| RunRow {
            index: run_index[&r.run_id],
            run_id: r.run_id.clone(),
            inequality: r.inequality.clone(),
            lhs: r.lhs,
            inferred_c: r.inferred_c,
        })
        .collect();
    write_csv(&dest.join("runs.csv"), &runs)?;

    let mut by_ineq: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows.values() {
        by_ineq.entry(&r.inequality).or_default().push(r.inferred_c);
    }
    let constants: Vec<_> = by_ineq
        .iter()
        .map(|(k, v)| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(0.0, f64::max);
            ConstantRow { inequality: (*k).into(), runs: v.len(), min_c: lo, max_c: hi, spread: if lo > 0.0 { hi / lo } else { f64::NAN } }
        })
        .collect();
    write_csv(&dest.join("constants.csv"), &constants)?;
    let names: Vec<String> = by_ineq.keys().map(|k| (*k).to_string()).collect();
    let curves: Vec<String> = names
        .iter()
        .map(|n| format!("'runs.csv' using (strcol(3) eq '{n}' ? $1 : 1/0):5 with linespoints title '{n}'"))
        .collect();
    fs::write(dest.join("constants.gp"), format!("{PLOT}plot {}\n", curves.join(", \\\n     ")))?;

    let mut conv = Vec::new();
    find(out, "convergence.csv", &dest, &mut conv)?;
    if !conv.is_empty() {
        let files: Vec<String> = conv.iter().map(|p| format!("{}", p.display())).collect();
        fs::write(dest.join("convergence.gp"), format!("FILES = \"{}\"\n{CONVERGENCE_PLOT}", files.join(" ")))?;
    }
    info!("report: {} ledgers, {} runs, {} inequalities", ledgers.len(), run_index.len(), names.len());
    println!("report written to {}", dest.display());
    Ok(())
}
