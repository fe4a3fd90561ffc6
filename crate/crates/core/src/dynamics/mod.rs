// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Generators of the diagonal sector and of coherence blocks, their time
//! integration, and decay fits.

mod fit;
mod generator;
mod implicit;
mod integrate;

pub use fit::{fit_decay, DecayFit};
pub use generator::{
    build_coherence_generator, build_coherence_generator_with, build_diag_generator, build_diag_generator_with,
    Boundary, GeneratorCoherence, GeneratorDiag, BLOCK_STENCIL, DIAG_STENCIL,
};
pub use implicit::integrate_block_implicit;
pub use integrate::{integrate, steady_by_integration, steady_residual, IntegrateControls, LinearSystem, Scalar, Trajectory};
