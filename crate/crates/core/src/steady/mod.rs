// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Stationary photon statistics.

mod km;
mod oracle;
mod recurrence;

pub use km::{k_factor, KMTable};
pub use oracle::{liouvillian_steady_oracle, ORACLE_SIZE_LIMIT};
pub use recurrence::{
    self_consistent_solve, self_consistent_solve_with, solve_alpha_recurrence, solve_beta_recurrence, solve_steady,
    solve_steady_from, BetaPolicy, SelfConsistentSolution, SolveControls,
};
