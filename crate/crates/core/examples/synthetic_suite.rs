//! Scaled-down 1-D synthetic suite: prints the summary table.

use gpest::acquisition::AcquisitionKind;
use gpest::benchmarks::{run_suite, FunctionFamily, SuiteSpec};

fn main() -> gpest::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let spec = SuiteSpec::new(
        FunctionFamily::GpSample1D,
        n,
        150,
        vec![AcquisitionKind::EstNumeric, AcquisitionKind::ucb(), AcquisitionKind::pi(), AcquisitionKind::ei()],
    );
    let start = std::time::Instant::now();
    let outcome = run_suite(&spec)?;
    println!("{:<6} {:>8} {:>8} {:>10} {:>10} {:>10}", "", "T_mean", "T_med", "r_mean", "r_med", "R_T");
    for s in &outcome.stats {
        println!(
            "{:<6} {:>8.1} {:>8.0} {:>10.4} {:>10.4} {:>10.4}",
            s.label,
            s.t_min_mean,
            s.t_min_median,
            s.r_min_mean,
            s.r_min_median,
            s.final_average_regret()
        );
    }
    eprintln!("{} failures, {:.1?}", outcome.failures.len(), start.elapsed());
    Ok(())
}
