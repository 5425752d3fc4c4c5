//! Monte Carlo check of the unbiased risk identity for the built-in test functions.

use decomposable_ggm::sure::sure_identity_check;
use decomposable_ggm::{make_model, ModelKind, ModelSpec, Result};

fn main() -> Result<()> {
    let truth = make_model(&ModelSpec::new(ModelKind::Arrow { hub: 1 }, 6, 9))?;
    let report = sure_identity_check(&truth, 14, 5000, 1)?;
    for e in &report.entries {
        println!(
            "{:<8} lhs {:.5} rhs {:.5}  z = {:+.2}  {}",
            e.function,
            e.lhs_mean,
            e.rhs_mean,
            e.z,
            if e.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
