use crate::config::{load_suggest, load_suite};
use crate::csvio::{read_history, read_rounds, write_rounds, RoundRow};
use crate::error::{CliError, Result};
use crate::format::g17;
use gpest::bandit::select_next;
use gpest::benchmarks::{run_suite, AcquisitionStats, Curve, Trace};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SUMMARY_HEADER: [&str; 5] = ["acquisition", "t_min_mean", "t_min_median", "r_min_mean", "r_min_median"];

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn write_summary(path: &Path, stats: &[AcquisitionStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| CliError::runtime(format!("{}: {e}", path.display()));
    w.write_record(SUMMARY_HEADER).map_err(io)?;
    for s in stats {
        w.write_record([s.label.clone(), g17(s.t_min_mean), g17(s.t_min_median), g17(s.r_min_mean), g17(s.r_min_median)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn bench(config: &Path, out: &Path, jobs: Option<usize>, stderr: &mut impl Write) -> Result<()> {
    let spec = load_suite(config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(CliError::runtime)?;
    let outcome = pool.install(|| run_suite(&spec)).map_err(CliError::runtime)?;
    for f in &outcome.failures {
        let _ = writeln!(stderr, "warning: {} on function {} failed: {}", f.label, f.function_id, f.message);
    }
    if outcome.runs.is_empty() {
        return Err(CliError::runtime(format!("all {} runs failed", outcome.failures.len())));
    }

    fs::create_dir_all(out).map_err(|e| CliError::runtime(format!("{}: {e}", out.display())))?;
    write_rounds(create(&out.join("rounds.csv"))?, spec.family.dim(), &outcome.runs)?;
    write_summary(&out.join("summary.csv"), &outcome.stats)?;
    let json = serde_json::to_string_pretty(&spec).map_err(CliError::runtime)?;
    fs::write(out.join("suite.json"), json + "\n").map_err(|e| CliError::runtime(format!("suite.json: {e}")))?;
    if !outcome.failures.is_empty() {
        let _ = writeln!(stderr, "warning: {} failed runs excluded from the summary", outcome.failures.len());
    }
    Ok(())
}

pub fn suggest(config: &Path, history: &Path, stdout: &mut impl Write, stderr: &mut impl Write) -> Result<()> {
    let config = load_suggest(config)?;
    let probe = config.run_config(1)?;
    let name = history.display().to_string();
    let file = fs::File::open(history).map_err(|e| CliError::usage(format!("{name}: {e}")))?;
    let history = read_history(file, probe.grid.dim(), &name)?;
    let t = history.len() + 1;
    let run_config = config.run_config(t)?;
    let step = select_next(&run_config, &history, t).map_err(CliError::runtime)?;
    let x = run_config.grid.point(step.selection.index);
    let row: Vec<String> = x.iter().map(|v| g17(*v)).collect();
    writeln!(stdout, "{}", row.join(",")).map_err(CliError::runtime)?;
    let diag = serde_json::json!({
        "acquisition": run_config.acquisition.label(),
        "t": t,
        "index": step.selection.index,
        "m_hat": step.selection.m_hat,
        "nu_t": step.selection.nu_t,
        "mu": step.mu,
        "sigma": step.sigma,
    });
    writeln!(stderr, "{diag}").map_err(CliError::runtime)?;
    Ok(())
}

/// Regroup rounds into per-run traces, keeping acquisitions in order of
/// first appearance and runs in function order.
pub fn traces_from_rows(rows: &[RoundRow]) -> Vec<(String, Vec<Trace>)> {
    let mut order: Vec<String> = Vec::new();
    let mut runs: BTreeMap<(usize, usize), Vec<&RoundRow>> = BTreeMap::new();
    for r in rows {
        let a = order.iter().position(|l| *l == r.acquisition).unwrap_or_else(|| {
            order.push(r.acquisition.clone());
            order.len() - 1
        });
        runs.entry((a, r.function_id)).or_default().push(r);
    }
    let mut grouped: Vec<(String, Vec<Trace>)> = order.into_iter().map(|l| (l, Vec::new())).collect();
    for ((a, _), mut rows) in runs {
        rows.sort_by_key(|r| r.t);
        let simple: Vec<f64> = rows.iter().map(|r| r.simple_regret).collect();
        let r_min = simple.iter().copied().fold(f64::INFINITY, f64::min);
        let t_min = rows.iter().find(|r| r.simple_regret == r_min).map_or(1, |r| r.t);
        grouped[a].1.push(Trace {
            r_min,
            t_min,
            simple_regret: simple,
            cumulative_regret: rows.iter().map(|r| r.cumulative_regret).collect(),
        });
    }
    grouped
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn write_curve(path: &Path, curve: &Curve) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| CliError::runtime(format!("{}: {e}", path.display()));
    w.write_record(["round", "mean", "std"]).map_err(io)?;
    for (i, (m, s)) in curve.mean.iter().zip(&curve.std).enumerate() {
        w.write_record([(i + 1).to_string(), g17(*m), g17(*s)]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

pub fn report(rounds: &Path, out: Option<&Path>, stdout: &mut impl Write) -> Result<Vec<AcquisitionStats>> {
    let name = rounds.display().to_string();
    let file = fs::File::open(rounds).map_err(|e| CliError::usage(format!("{name}: {e}")))?;
    let rows = read_rounds(file, &name)?;
    let stats: Vec<AcquisitionStats> =
        traces_from_rows(&rows).into_iter().map(|(label, traces)| AcquisitionStats::from_traces(label, &traces)).collect();

    let out: PathBuf = match out {
        Some(p) => p.to_path_buf(),
        None => rounds.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    fs::create_dir_all(&out).map_err(|e| CliError::runtime(format!("{}: {e}", out.display())))?;
    write_summary(&out.join("report_summary.csv"), &stats)?;
    for s in &stats {
        let stem = file_label(&s.label);
        write_curve(&out.join(format!("{stem}_simple_regret.csv")), &s.simple_regret)?;
        write_curve(&out.join(format!("{stem}_cumulative_regret.csv")), &s.cumulative_regret)?;
    }

    let w = |e: std::io::Error| CliError::runtime(e);
    writeln!(stdout, "{:<10} {:>6} {:>10} {:>10} {:>12} {:>12} {:>12}", "", "runs", "T_min mean", "T_min med", "r_min mean", "r_min med", "R_T").map_err(w)?;
    for s in &stats {
        writeln!(
            stdout,
            "{:<10} {:>6} {:>10.2} {:>10} {:>12.6} {:>12.6} {:>12.6}",
            s.label,
            s.n_runs,
            s.t_min_mean,
            s.t_min_median,
            s.r_min_mean,
            s.r_min_median,
            s.final_average_regret()
        )
        .map_err(w)?;
    }
    Ok(stats)
}
