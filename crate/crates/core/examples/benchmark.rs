//! Small NMSE benchmark over a sample-size grid, written as CSV and plot JSON.

use decomposable_ggm::bench::{emit_plot_data, run_benchmark, write_results, BenchConfig, EstimatorKind};
use decomposable_ggm::{ModelSpec, Result};

fn main() -> Result<()> {
    let config = BenchConfig {
        model: ModelSpec::banded(15, 2, 1),
        n_grid: vec![10, 20, 40],
        trials: 100,
        estimators: EstimatorKind::ALL.to_vec(),
        master_seed: 1,
        positive_part_fallback: true,
        full_projection: false,
    };
    let result = run_benchmark(&config)?;
    for row in &result.rows {
        println!(
            "{:<12} n = {:>3}  nmse {:.4} ± {:.4}  psd failures {:.2}",
            row.estimator, row.n, row.nmse_mean, row.nmse_stderr, row.psd_failure_rate
        );
    }
    let dir = std::env::temp_dir();
    write_results(&result, dir.join("ggm_bench.csv"))?;
    emit_plot_data(&result, dir.join("ggm_bench.json"))?;
    println!("wrote {}", dir.join("ggm_bench.csv").display());
    Ok(())
}
