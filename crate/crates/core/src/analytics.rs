//! Closed-form biases and the oracle table.
//!
//! The formula functions accept the closed range `1/2 <= alpha2 <= 1` so the
//! degenerate limits can be evaluated; protocol states still need the open
//! range enforced by [`crate::catalog::Alpha2`].

use serde::Serialize;

use crate::error::{Error, Result};

fn check(alpha2: f64) -> Result<f64> {
    if (0.5..=1.0).contains(&alpha2) {
        Ok(alpha2)
    } else {
        Err(Error::OutOfRange(format!("alpha^2 = {alpha2} must lie in [1/2, 1]")))
    }
}

/// Upper bound on Alice's bias against the loss-tolerant protocol,
/// `(1 + 2 alpha beta) / 4`.
pub fn alice_bias_bound(alpha2: f64) -> Result<f64> {
    let t = check(alpha2)?;
    Ok((1.0 + 2.0 * (t * (1.0 - t)).sqrt()) / 4.0)
}

/// Bob's optimal bias against the loss-tolerant protocol, `alpha^2 - 1/2`.
pub fn bob_bias(alpha2: f64) -> Result<f64> {
    Ok(check(alpha2)? - 0.5)
}

/// The `alpha^2` at which both biases agree.
///
/// `(1 + 2 alpha beta)/4 = alpha^2 - 1/2` gives `2 alpha beta = 4t - 3` with
/// `t = alpha^2`; squaring yields `20t^2 - 28t + 9 = 0`. Squaring is only
/// reversible where `4t - 3 >= 0`, which discards the root `t = 1/2`.
pub fn fair_alpha2() -> f64 {
    let (a, b, c) = (20.0f64, -28.0f64, 9.0f64);
    let disc = (b * b - 4.0 * a * c).sqrt();
    [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)]
        .into_iter()
        .find(|&t| 4.0 * t - 3.0 >= 0.0 && t > 0.5 && t < 1.0)
        .expect("the fairness quartic has exactly one admissible root")
}

/// Probability that the cunning son's `b` equals Alice's `x`,
/// `1/2 + (2 alpha^2 - 1)^2 / 2`.
pub fn cunning_agreement(alpha2: f64) -> Result<f64> {
    let t = check(alpha2)?;
    Ok(0.5 + 0.5 * (2.0 * t - 1.0).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasReport {
    pub alpha2: f64,
    pub alice_bias_bound: f64,
    pub bob_bias: f64,
    pub fair: bool,
}

impl BiasReport {
    pub fn new(alpha2: f64) -> Result<Self> {
        let alice = alice_bias_bound(alpha2)?;
        let bob = bob_bias(alpha2)?;
        Ok(Self {
            alpha2,
            alice_bias_bound: alice,
            bob_bias: bob,
            fair: (alice - bob).abs() < 1e-12,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TableEntry {
    pub label: &'static str,
    pub value: f64,
}

/// Every reference number, in a fixed order.
pub fn paper_table() -> Vec<TableEntry> {
    let sqrt2 = 2f64.sqrt();
    let fair = fair_alpha2();
    let lt_bias = bob_bias(fair).expect("fair alpha^2 is in range");
    [
        ("bb84_postpone_lie_bias", 0.375),
        ("bb84_rotated_success", (6.0 + sqrt2) / 8.0),
        ("bb84_rotated_caught", (2.0 - sqrt2) / 8.0),
        ("bb84_epr_success", 1.0),
        ("ambainis_alice_bias", 0.25),
        ("ambainis_restart_bob_bias", 0.5),
        ("ambainis_send_nothing_bias", 0.5),
        ("ambainis_usd_conclusive", 0.5),
        ("lt_fair_alpha2", fair),
        ("lt_fair_bias", lt_bias),
        ("lt_alice_success", 0.5 + lt_bias),
        ("lt_bob_success", 0.5 + lt_bias),
        (
            "cunning_agreement",
            cunning_agreement(fair).expect("fair alpha^2 is in range"),
        ),
        ("twophoton_usd_conclusive", 0.64),
        ("twophoton_honest_apparatus_conclusive", 0.32),
        ("trace_distance_mcqm", 0.47),
        ("helstrom_mcqm", 0.735),
        ("mcqm_conclusive", 0.49),
        ("mcqm_confidence", 0.49 / 0.51),
        ("mcqm_bob_bias_floor", 0.46),
        ("usd_0_plus", 1.0 - 1.0 / sqrt2),
        // documented constant only
        ("kitaev_lower_bound", (sqrt2 - 1.0) / 2.0),
    ]
    .into_iter()
    .map(|(label, value)| TableEntry { label, value })
    .collect()
}

pub fn paper_value(label: &str) -> Option<f64> {
    paper_table().into_iter().find(|e| e.label == label).map(|e| e.value)
}
