//! Simulate a banded model and compare the closed-form estimators.

use std::sync::Arc;

use decomposable_ggm::estimators::BlockInverses;
use decomposable_ggm::{make_model, sample_gaussian, ModelSpec, Result, SufficientStats};

fn main() -> Result<()> {
    let truth = make_model(&ModelSpec::banded(20, 2, 1))?;
    let data = sample_gaussian(&truth, 30, 42)?;
    let stats = SufficientStats::from_data(&data, Arc::clone(&truth.graph))?;
    let inv = BlockInverses::new(&stats)?;
    let k_norm = truth.k_true.frobenius_norm_sq();
    for est in [inv.mle()?, inv.mvue()?, inv.be()?, inv.sure_tuned()?] {
        let nmse = (&est.matrix - &truth.k_true).frobenius_norm_sq() / k_norm;
        println!("{:<8} nmse {nmse:.4}  psd {:?}", est.method.tag(), est.psd);
    }
    Ok(())
}
