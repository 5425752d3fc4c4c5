//! Repair an indefinite estimate by positive-part clipping and by projection
//! onto pattern-conforming PSD matrices.

use std::sync::Arc;

use decomposable_ggm::estimators::mvue;
use decomposable_ggm::projection::{project_to_pattern_psd_against, DEFAULT_MAX_ITER, DEFAULT_TOL};
use decomposable_ggm::{make_model, positive_part, sample_gaussian, ModelSpec, Result, SufficientStats};

fn main() -> Result<()> {
    let truth = make_model(&ModelSpec::banded(30, 2, 2))?;
    let data = sample_gaussian(&truth, 8, 3)?;
    let stats = SufficientStats::from_data(&data, Arc::clone(&truth.graph))?;
    let est = mvue(&stats)?;
    let err = |m: &decomposable_ggm::SymMatrix| (m - &truth.k_true).frobenius_norm();
    println!("|K|       {:.4}", truth.k_true.frobenius_norm());
    println!("MVUE      min eig {:+.4}  error {:.4}", est.matrix.min_eigenvalue()?, err(&est.matrix));

    let clipped = positive_part(&est, &truth.graph)?;
    println!(
        "positive  min eig {:+.4}  error {:.4}  conforms {}",
        clipped.matrix.min_eigenvalue()?,
        err(&clipped.matrix),
        clipped.pattern_conforming
    );

    let (proj, report) =
        project_to_pattern_psd_against(&est, &truth.graph, DEFAULT_TOL, DEFAULT_MAX_ITER, &truth.k_true)?;
    println!(
        "projected min eig {:+.4}  error {:.4}  conforms {}  ({} iterations)",
        proj.matrix.min_eigenvalue()?,
        err(&proj.matrix),
        truth.graph.conforms(&proj.matrix),
        report.iterations
    );
    Ok(())
}
