//! Tune the shrinkage coefficient `d` and inspect the risk estimate around it.

use std::sync::Arc;

use decomposable_ggm::estimators::BlockInverses;
use decomposable_ggm::sure::{compute_d, dominance_gap_mle, numeric_nabla_trace, sure_risk_proxy, DEFAULT_STEP};
use decomposable_ggm::{make_model, sample_gaussian, ModelKind, ModelSpec, Result, SufficientStats};

fn main() -> Result<()> {
    let truth = make_model(&ModelSpec::new(ModelKind::TwoCoupledBlocks { first: 5, overlap: 2 }, 8, 3))?;
    let data = sample_gaussian(&truth, 20, 7)?;
    let stats = SufficientStats::from_data(&data, Arc::clone(&truth.graph))?;

    let tuning = compute_d(&stats)?;
    let numeric = numeric_nabla_trace(|s| Ok(BlockInverses::new(s)?.d_matrix()), &stats, DEFAULT_STEP)?;
    println!("d = {:.6} (numeric {:.6})", tuning.d, -2.0 * numeric / tuning.denominator);
    for scale in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let d = scale * tuning.d;
        println!("  d = {d:8.4}  risk proxy {:.6}", sure_risk_proxy(d, &stats)?);
    }
    let gap = dominance_gap_mle(&stats)?;
    println!("MSE(MVUE) - MSE(MLE) estimate {:.6}, Tr(grad H) = {:.6}", gap.gap, gap.trace_nabla_h);
    Ok(())
}
