//! Feasibility repair: positive-part clipping and projection onto the set of
//! positive semidefinite matrices with the graph's zero pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{Adjustment, ConcentrationEstimate, PsdStatus};
use crate::graph::DecomposableGraph;
use crate::linalg::SymMatrix;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub iterations: usize,
    /// Frobenius norm of the last iterate step.
    pub final_change: f64,
    pub converged: bool,
    /// `‖input - K_ref‖_F` when a reference was supplied.
    pub input_error: Option<f64>,
    /// `‖output - K_ref‖_F` when a reference was supplied.
    pub output_error: Option<f64>,
}

/// Frobenius projection onto the PSD cone, returning the number of clipped
/// eigenvalues alongside the result.
fn clip_to_psd(m: &SymMatrix) -> Result<(SymMatrix, usize)> {
    let eig = m.eigen()?;
    let mut clipped = 0;
    let values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l < 0.0 {
                clipped += 1;
                0.0
            } else {
                l
            }
        })
        .collect();
    if clipped == 0 {
        return Ok((m.clone(), 0));
    }
    Ok((SymMatrix::from_eigen(&eig.eigenvectors, &values)?, clipped))
}

/// PSD projection of `m` (negative eigenvalues set to zero).
pub fn psd_part(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(clip_to_psd(m)?.0)
}

/// Positive-part estimator: negative eigenvalues of the estimate clipped to
/// zero. The result is PSD but generally fills in entries outside the graph,
/// which `pattern_conforming` reports.
pub fn positive_part(est: &ConcentrationEstimate, graph: &DecomposableGraph) -> Result<ConcentrationEstimate> {
    let (matrix, clipped) = clip_to_psd(&est.matrix)?;
    if clipped == 0 {
        return Ok(est.clone());
    }
    Ok(ConcentrationEstimate {
        pattern_conforming: graph.conforms(&matrix),
        psd: PsdStatus::VerifiedPsd,
        matrix,
        method: est.method,
        n_used: est.n_used,
        adjustment: Adjustment::PositivePart,
    })
}

fn in_constraint_set(m: &SymMatrix, graph: &DecomposableGraph, tol: f64) -> Result<bool> {
    Ok(graph.conforms(m) && m.min_eigenvalue()? >= -tol)
}

/// Projection onto `{K PSD, K_ij = 0 off the edge set}` by Dykstra's
/// alternating projections between the PSD cone and the pattern subspace,
/// run in its dual form with momentum.
///
/// The returned matrix always has the exact pattern; it is accepted once an
/// iterate moves by at most `tol`, the PSD step leaves at most `tol` of mass
/// off the pattern and the smallest eigenvalue is at least `-tol`. Exhausting `max_iter` yields [`Error::NotConverged`] carrying the
/// last iterate.
pub fn project_to_pattern_psd(
    est: &ConcentrationEstimate,
    graph: &DecomposableGraph,
    tol: f64,
    max_iter: usize,
) -> Result<(ConcentrationEstimate, ProjectionReport)> {
    project_impl(est, graph, tol, max_iter, None)
}

/// [`project_to_pattern_psd`] with distances to `reference` recorded in the report.
pub fn project_to_pattern_psd_against(
    est: &ConcentrationEstimate,
    graph: &DecomposableGraph,
    tol: f64,
    max_iter: usize,
    reference: &SymMatrix,
) -> Result<(ConcentrationEstimate, ProjectionReport)> {
    if reference.dim() != est.matrix.dim() {
        return Err(Error::DimensionMismatch(format!(
            "reference is {0}x{0}, estimate is {1}x{1}",
            reference.dim(),
            est.matrix.dim()
        )));
    }
    project_impl(est, graph, tol, max_iter, Some(reference))
}

fn project_impl(
    est: &ConcentrationEstimate,
    graph: &DecomposableGraph,
    tol: f64,
    max_iter: usize,
    reference: Option<&SymMatrix>,
) -> Result<(ConcentrationEstimate, ProjectionReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    if max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }
    let input = &est.matrix;
    if input.dim() != graph.p() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {0}x{0}, graph has {1} nodes",
            input.dim(),
            graph.p()
        )));
    }
    if !input.is_finite() {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let distance = |m: &SymMatrix| reference.map(|r| (m - r).frobenius_norm());
    let finish = |matrix: SymMatrix, iterations: usize, final_change: f64, converged: bool| {
        let report = ProjectionReport {
            iterations,
            final_change,
            converged,
            input_error: distance(input),
            output_error: distance(&matrix),
        };
        let estimate = ConcentrationEstimate {
            psd: PsdStatus::check(&matrix),
            matrix,
            method: est.method,
            n_used: est.n_used,
            pattern_conforming: true,
            adjustment: Adjustment::PatternPsd,
        };
        (estimate, report)
    };

    if in_constraint_set(input, graph, 0.0)? {
        let (mut estimate, report) = finish(input.clone(), 1, 0.0, true);
        estimate.adjustment = est.adjustment;
        estimate.psd = match est.psd {
            PsdStatus::VerifiedPd => PsdStatus::VerifiedPd,
            _ => estimate.psd,
        };
        return Ok((estimate, report));
    }

    // Dykstra's iteration between the cone and a subspace is unit-step
    // gradient ascent on a multiplier `w` supported off the pattern:
    // `y = psd(X + w)`, `w <- w - offpattern(y)`. Nesterov momentum with
    // gradient restarts accelerates it; `offpattern(y)` is the infeasibility.
    let p = graph.p();
    let mut w = SymMatrix::zeros(p);
    let mut v = SymMatrix::zeros(p);
    let mut t = 1.0_f64;
    let mut x = graph.restrict_to_pattern(input);
    let mut change = f64::INFINITY;
    for iter in 1..=max_iter {
        let y = psd_part(&(input + &v))?;
        let next = graph.restrict_to_pattern(&y);
        let off = &y - &next;
        change = (&next - &x).frobenius_norm();
        x = next;
        if change <= tol && off.frobenius_norm() <= tol && x.min_eigenvalue()? >= -tol {
            return Ok(finish(x, iter, change, true));
        }
        let w_next = &v - &off;
        let step = &w_next - &w;
        if off.trace_product(&step) > 0.0 {
            t = 1.0;
            v = w_next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            v = &w_next + &(&step * ((t - 1.0) / t_next));
            t = t_next;
        }
        w = w_next;
    }
    let best = finish(x, max_iter, change, false);
    Err(Error::NotConverged {
        iterations: max_iter,
        best: Box::new(best),
    })
}
