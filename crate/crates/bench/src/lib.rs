//! Fixed benchmark inputs shared by the criterion benches.

use robustcut::generate::{box_spec, budget_spec, ellipsoid_spec, gnp, wasserstein_spec};
use robustcut::{Instance, UncertaintySpec};

/// Weighted `G(n, 0.5)` with a fixed seed.
pub fn graph(n: usize) -> Instance {
    gnp(n, 0.5, 0.5, 1.5, n as u64).expect("valid generator parameters")
}

/// One set of each robust kind for `inst`.
pub fn specs(inst: &Instance) -> Vec<(&'static str, UncertaintySpec)> {
    vec![
        ("box", box_spec(inst, 0.2).expect("valid box")),
        ("budget", budget_spec(inst, 0.5, 2.0).expect("valid budget")),
        ("ellipsoid", ellipsoid_spec(inst, 0.3, 1).expect("valid ellipsoid")),
        ("wasserstein", wasserstein_spec(inst, 4, 0.3, 0.2, 1).expect("valid ball")),
    ]
}
