// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Two-mode open-cavity laser: composite-mode master-equation generators,
//! steady-state photon statistics, linewidth and Petermann factor.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod observables;
pub mod output;
pub mod params;
pub mod steady;
pub mod superop;
pub mod validation;

pub use error::{Error, Mode, Result};
