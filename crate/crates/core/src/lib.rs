//! Robust and distributionally robust Max-Cut, Max-DiCut and Max k-AllEqual
//! via low-rank SDP relaxations and randomized hyperplane rounding, with
//! brute-force oracles for checking the rounding guarantees on small inputs.

pub mod error;
pub mod generate;
pub mod instance;
pub mod numerics;
pub mod oracle;
pub mod relaxation;
pub mod rng;
pub mod robust;
pub mod rounding;
pub mod sdp;
pub mod uncertainty;

pub use error::{Error, Result};
pub use instance::{Clause, Cut, Edge, Instance, Literal, ProblemKind, WeightAssignment};
pub use oracle::{CertifyConfig, Check, McEstimate, OracleResult, SandwichReport};
pub use robust::{SaddleMethod, SaddleSolution, SolverConfig, Worst};
pub use rounding::{RoundConfig, Scheme};
pub use sdp::{GramFactor, SdpConfig, SolveReport};
pub use uncertainty::{Coords, InnerSolution, Metric, UncertaintySpec};
