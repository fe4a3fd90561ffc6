// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Single-atom kick, τ-averaged gain kernel and the bare-mode loss term.

mod gain;
mod kick;
mod loss;
pub mod quadrature;

pub use gain::{gain_quadrature, gain_quadrature_block, GainKernel, Provenance};
pub use kick::{lambda_kick, lambda_kick_block, KickOperators};
pub use loss::{loss_apply_bare, rotate_loss_to_composite, BareState, CompositeDamping};
