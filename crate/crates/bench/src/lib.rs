//! Shared input builders for the criterion benches.

use hcf_core::grid::{line_pattern, orbit};
use hcf_core::{ImageDomain, Partition};

/// Orbit partitions of the first `elevations` cyclic lines on an n x n grid.
pub fn line_partitions(n: u32, elevations: u32) -> Vec<Partition> {
    let domain = ImageDomain::new(n, n).expect("positive dims");
    (0..elevations)
        .map(|e| {
            Partition::new(orbit(&line_pattern(e, 0, domain).expect("wide enough")))
                .expect("orbit of a graph partitions the image")
        })
        .collect()
}
