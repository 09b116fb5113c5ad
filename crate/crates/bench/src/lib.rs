//! Shared fixtures for the criterion benchmarks.

use goldbach_core::residue_system::{build_system, ConstructionParams};
use goldbach_core::AdmissibleSystem;

/// The modulus-30 system used as the reference workload.
pub fn reference_system() -> AdmissibleSystem {
    build_system(&ConstructionParams::new(1, 100).with_basis(vec![2, 3, 5])).unwrap()
}
