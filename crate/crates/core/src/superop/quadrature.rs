// Copyright 2026 OpenLaser Contributors
// SPDX-License-Identifier: Apache-2.0

//! Rules for ∫₀^∞ e^{−τ} f(τ) dτ.

use gauss_quad::{GaussLaguerre, GaussLegendre};

/// Nodes and weights with the exponential weight folded in.
#[derive(Debug, Clone)]
pub struct TauRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const PANEL_SPAN: f64 = 48.0;
const PANEL_ORDER: usize = 20;
const TAIL_ORDER: usize = 32;

impl TauRule {
    pub fn laguerre(order: usize) -> Self {
        let rule = GaussLaguerre::new(order, 0.0).expect("order >= 2");
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        TauRule { nodes, weights }
    }

    /// Composite Gauss–Legendre on [0, 48] in `panels` equal pieces, plus a
    /// shifted Laguerre tail beyond.
    pub fn panelled(panels: usize) -> Self {
        let leg = GaussLegendre::new(PANEL_ORDER).expect("order >= 2");
        let h = PANEL_SPAN / panels as f64;
        let mut nodes = Vec::with_capacity(panels * PANEL_ORDER + TAIL_ORDER);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for &(x, w) in leg.as_node_weight_pairs() {
                let t = mid + 0.5 * h * x;
                nodes.push(t);
                weights.push(0.5 * h * w * (-t).exp());
            }
        }
        let tail = (-PANEL_SPAN).exp();
        let lag = GaussLaguerre::new(TAIL_ORDER, 0.0).expect("order >= 2");
        for &(x, w) in lag.as_node_weight_pairs() {
            nodes.push(PANEL_SPAN + x);
            weights.push(tail * w);
        }
        TauRule { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * f(*t)).sum()
    }
}

/// Successively finer rules for integrands oscillating up to angular frequency `omega_max`:
/// Laguerre 64 and 128, then panelled rules with doubling panel counts.
pub fn refinement_sequence(omega_max: f64) -> Vec<TauRule> {
    let base = ((omega_max * PANEL_SPAN / std::f64::consts::TAU).ceil() as usize).max(16);
    let mut rules = vec![TauRule::laguerre(64), TauRule::laguerre(128)];
    for level in 0..4 {
        rules.push(TauRule::panelled(base << level));
    }
    rules
}
