//! Benchmark fixtures shared by the criterion targets.

use cifc_core::dmc_regions::{
    inner_bound_terms, sample_aux_instance, AuxAssignment, InnerBoundTerms,
};
use cifc_core::dpc::DpcConfig;
use cifc_core::gaussian::{CovMatrix, GaussianMultiPrimary};
use cifc_core::DmcChannel;

pub const SEED: u64 = 7;

pub fn aux_instance() -> (AuxAssignment, DmcChannel) {
    sample_aux_instance(SEED, 0).expect("fixture instance")
}

pub fn inner_terms() -> InnerBoundTerms {
    let (aux, chan) = aux_instance();
    inner_bound_terms(&aux, &chan).expect("fixture terms")
}

/// Two weak primaries with the interference below both gains.
pub fn weak_channel() -> GaussianMultiPrimary {
    GaussianMultiPrimary {
        b: vec![0.5, 0.9],
        a: 0.3,
        p1: 1.0,
        p2: 1.0,
    }
}

pub fn dpc_config() -> DpcConfig {
    DpcConfig::comparison(1.0).with_eta(0.5)
}

/// Secondary input as a mix of its own source and the primary one.
pub fn dpc_like_covariance() -> CovMatrix {
    CovMatrix::from_linear(
        &[("S", 3.0), ("U", 0.5), ("N", 1.0)],
        &[
            ("X", vec![("S", 0.4), ("U", 1.0)]),
            ("V", vec![("U", 1.0), ("S", 0.6)]),
            ("Y", vec![("S", 1.0), ("U", 1.0), ("N", 1.0)]),
        ],
    )
    .expect("fixture covariance")
}
