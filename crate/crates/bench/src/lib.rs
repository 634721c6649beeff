//! Fixtures shared by the benchmarks.

use fsomc_core::Scenario;

/// Reference scenario plus the two variants the figures stress: a tall
/// altitude range and a small, dense service disk.
pub fn scenarios() -> Vec<(&'static str, Scenario)> {
    let base = Scenario::default();
    let mut tall = base;
    tall.geom.h_max = 600.0;
    let mut dense = base;
    dense.geom.r0 = 30.0;
    dense.geom.lambda_g = 5e-3;
    vec![("default", base), ("h_max_600", tall), ("r0_30_dense", dense)]
}
