//! Unambiguous and maximum-confidence discrimination between two hypotheses
//! with equal priors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{c, DensityMatrix, Label, Matrix, Povm, QuantumState};

/// Exact statistics of a POVM used to tell `r0` from `r1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscriminationStats {
    pub p_inconclusive: f64,
    /// Probability the maximum-posterior guess is right, given a conclusive outcome.
    pub confidence: f64,
    pub per_outcome: Vec<OutcomeStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeStats {
    pub label: Label,
    pub probability: f64,
    pub p_correct: f64,
}

/// Optimal (IDP) unambiguous discrimination of two pure states.
///
/// `E0` projects onto the direction orthogonal to `s1` and `E1` onto the
/// direction orthogonal to `s0`, both scaled by `1/(1 + |<s0|s1>|)`;
/// the remainder is the `?` element. Each state is identified with
/// probability `1 - |<s0|s1>|`.
pub fn usd_pure_pair(s0: &QuantumState, s1: &QuantumState) -> Result<Povm> {
    let overlap = s0.inner(s1)?;
    let s = overlap.norm();
    if s > 1.0 - 1e-9 {
        return Err(Error::ParallelStates(s));
    }
    let perp = |keep: &QuantumState, remove: &QuantumState, proj: num_complex::Complex64| -> Vec<_> {
        keep.amplitudes()
            .iter()
            .zip(remove.amplitudes())
            .map(|(k, r)| k - proj * r)
            .collect::<Vec<_>>()
    };
    // component of s0 orthogonal to s1, and vice versa
    let s0_perp = perp(s0, s1, overlap.conj());
    let s1_perp = perp(s1, s0, overlap);
    let scale = 1.0 / (1.0 + s);
    let n0 = 1.0 - s * s;
    let e0 = Matrix::outer(&s0_perp).scale(scale / n0);
    let e1 = Matrix::outer(&s1_perp).scale(scale / n0);
    let dim = s0.dim();
    let inconclusive = Matrix::identity(dim).sub(&e0)?.sub(&e1)?;
    Povm::new(
        vec![e0, e1, inconclusive],
        vec![Label::Value(0), Label::Value(1), Label::Inconclusive],
    )
}

/// Computational-basis measurement of Ambainis' qutrit: `|1>` means `a = 0`,
/// `|2>` means `a = 1`, `|0>` is inconclusive.
pub fn computational_usd_ambainis() -> Povm {
    let proj = |i: usize| {
        let mut v = vec![c(0.0); 3];
        v[i] = c(1.0);
        Matrix::outer(&v)
    };
    Povm::new(
        vec![proj(1), proj(2), proj(0)],
        vec![Label::Value(0), Label::Value(1), Label::Inconclusive],
    )
    .expect("computational projectors form a POVM")
}

/// Exact per-outcome statistics of `p` on equiprobable `r0`, `r1`.
pub fn stats(p: &Povm, r0: &DensityMatrix, r1: &DensityMatrix) -> Result<DiscriminationStats> {
    let q0 = p.probabilities(r0)?;
    let q1 = p.probabilities(r1)?;
    let mut p_inconclusive = 0.0;
    let mut conclusive = 0.0;
    let mut correct = 0.0;
    let mut per_outcome = Vec::with_capacity(q0.len());
    for ((&label, a), b) in p.labels().iter().zip(q0).zip(q1) {
        let probability = 0.5 * (a + b);
        let best = 0.5 * a.max(b);
        let p_correct = if probability > 0.0 { best / probability } else { 0.5 };
        if label == Label::Inconclusive {
            p_inconclusive += probability;
        } else {
            conclusive += probability;
            correct += best;
        }
        per_outcome.push(OutcomeStats {
            label,
            probability,
            p_correct,
        });
    }
    let confidence = if conclusive > 0.0 { correct / conclusive } else { 0.5 };
    Ok(DiscriminationStats {
        p_inconclusive,
        confidence,
        per_outcome,
    })
}
