//! Named states, measurement bases and committed density matrices for each
//! protocol family.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{mix, DensityMatrix, Label, ProjectiveMeasurement, QuantumState};

/// `alpha^2` of the loss-tolerant states, restricted to `1/2 < alpha^2 < 1`
/// so that `1 > alpha > beta > 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Alpha2(f64);

impl Alpha2 {
    pub fn new(alpha2: f64) -> Result<Self> {
        if alpha2 > 0.5 && alpha2 < 1.0 {
            Ok(Self(alpha2))
        } else {
            Err(Error::OutOfRange(format!("alpha^2 = {alpha2} must lie in (1/2, 1)")))
        }
    }

    /// The fair parameter `alpha^2 = 0.9`.
    pub fn fair() -> Self {
        Self(0.9)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn alpha(self) -> f64 {
        self.0.sqrt()
    }

    pub fn beta(self) -> f64 {
        (1.0 - self.0).sqrt()
    }
}

/// Which set of states a protocol uses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateFamily {
    Bb84,
    Ambainis,
    LossTolerant(Alpha2),
    /// Ambainis' qutrit states extended with `|phi_{0,2}> = |2>` and
    /// `|phi_{1,2}> = |1>`.
    McqmExample,
}

/// `a` selects the basis, `x` the encoded value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StateLabel {
    pub a: u8,
    pub x: u8,
}

impl StateLabel {
    pub fn new(a: u8, x: u8) -> Self {
        Self { a, x }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.x)
    }
}

/// Prior weights of `x` for honest Alice in the MCQM example.
pub const MCQM_X_WEIGHTS: [f64; 3] = [0.49, 0.49, 0.02];

impl StateFamily {
    pub fn dim(self) -> usize {
        match self {
            StateFamily::Bb84 | StateFamily::LossTolerant(_) => 2,
            StateFamily::Ambainis | StateFamily::McqmExample => 3,
        }
    }

    /// Number of distinct `x` values.
    pub fn x_range(self) -> u8 {
        match self {
            StateFamily::McqmExample => 3,
            _ => 2,
        }
    }

    /// Honest prior over `x`.
    pub fn x_weights(self) -> &'static [f64] {
        match self {
            StateFamily::McqmExample => &MCQM_X_WEIGHTS,
            _ => &[0.5, 0.5],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StateFamily::Bb84 => "bb84",
            StateFamily::Ambainis => "ambainis",
            StateFamily::LossTolerant(_) => "loss_tolerant",
            StateFamily::McqmExample => "mcqm_example",
        }
    }

    fn check(self, label: StateLabel) -> Result<()> {
        if label.a > 1 || label.x >= self.x_range() {
            return Err(Error::InvalidLabel(format!("{label} for family {}", self.name())));
        }
        Ok(())
    }

    /// `|psi_{a,x}>`, `|phi_{a,x}>` or `|varphi_{a,x}>` depending on family.
    pub fn state(self, label: StateLabel) -> Result<QuantumState> {
        self.check(label)?;
        let h = FRAC_1_SQRT_2;
        let sign = if label.x == 0 { 1.0 } else { -1.0 };
        let amplitudes: Vec<f64> = match self {
            StateFamily::Bb84 => match label.a {
                0 => {
                    let mut v = vec![0.0; 2];
                    v[label.x as usize] = 1.0;
                    v
                }
                _ => vec![h, sign * h],
            },
            StateFamily::Ambainis | StateFamily::McqmExample => match (label.a, label.x) {
                (0, 2) => vec![0.0, 0.0, 1.0],
                (1, 2) => vec![0.0, 1.0, 0.0],
                (0, _) => vec![h, sign * h, 0.0],
                _ => vec![h, 0.0, sign * h],
            },
            StateFamily::LossTolerant(p) => {
                let (al, be) = (p.alpha(), p.beta());
                match (label.a, label.x) {
                    (0, 0) => vec![al, be],
                    (1, 0) => vec![al, -be],
                    (0, _) => vec![be, -al],
                    _ => vec![be, al],
                }
            }
        };
        QuantumState::from_real(&amplitudes)
    }

    /// Measurement basis indexed by `a`.
    ///
    /// Ambainis: `{|phi_{a,0}>, |phi_{a,1}>, |2-a>}` with the last vector
    /// labelled [`Label::Reject`]. MCQM example: the same vectors, but the
    /// third is `|phi_{a,2}>` and is labelled as `x = 2`.
    pub fn basis(self, a: u8) -> Result<ProjectiveMeasurement> {
        if a > 1 {
            return Err(Error::InvalidLabel(format!("basis {a}")));
        }
        match self {
            StateFamily::Ambainis => {
                let basis = vec![
                    self.state(StateLabel::new(a, 0))?,
                    self.state(StateLabel::new(a, 1))?,
                    QuantumState::basis_vector(3, 2 - a as usize)?,
                ];
                ProjectiveMeasurement::new(basis, vec![Label::Value(0), Label::Value(1), Label::Reject])
            }
            _ => {
                let xs = 0..self.x_range();
                let basis = xs
                    .clone()
                    .map(|x| self.state(StateLabel::new(a, x)))
                    .collect::<Result<Vec<_>>>()?;
                ProjectiveMeasurement::new(basis, xs.map(Label::Value).collect())
            }
        }
    }

    /// The honest ensemble Bob faces when Alice commits to `commit`: over `x`
    /// for BB84 / Ambainis / MCQM (commit is `a`), over `a` for loss-tolerant
    /// (commit is `x`).
    pub fn honest_ensemble(self, commit: u8) -> Result<Vec<(f64, QuantumState)>> {
        if commit > 1 {
            return Err(Error::InvalidLabel(format!("commitment {commit}")));
        }
        match self {
            StateFamily::LossTolerant(_) => (0..2)
                .map(|a| Ok((0.5, self.state(StateLabel::new(a, commit))?)))
                .collect(),
            _ => self
                .x_weights()
                .iter()
                .enumerate()
                .map(|(x, &w)| Ok((w, self.state(StateLabel::new(commit, x as u8))?)))
                .collect(),
        }
    }

    /// Closed-form density matrix for commitment `commit`.
    pub fn committed_density(self, commit: u8) -> Result<DensityMatrix> {
        if commit > 1 {
            return Err(Error::InvalidLabel(format!("commitment {commit}")));
        }
        let diag: Vec<f64> = match self {
            StateFamily::Bb84 => vec![0.5, 0.5],
            StateFamily::Ambainis => match commit {
                0 => vec![0.5, 0.5, 0.0],
                _ => vec![0.5, 0.0, 0.5],
            },
            StateFamily::LossTolerant(p) => {
                let (a2, b2) = (p.get(), 1.0 - p.get());
                match commit {
                    0 => vec![a2, b2],
                    _ => vec![b2, a2],
                }
            }
            StateFamily::McqmExample => {
                let [w0, _, w2] = MCQM_X_WEIGHTS;
                match commit {
                    0 => vec![w0, w0, w2],
                    _ => vec![w0, w2, w0],
                }
            }
        };
        DensityMatrix::diagonal(&diag)
    }

    /// Same as [`StateFamily::committed_density`] but computed by mixing the
    /// honest ensemble.
    pub fn mixed_density(self, commit: u8) -> Result<DensityMatrix> {
        mix(&self.honest_ensemble(commit)?)
    }

    /// Every valid label of this family.
    pub fn labels(self) -> impl Iterator<Item = StateLabel> {
        let xr = self.x_range();
        (0..2u8).flat_map(move |a| (0..xr).map(move |x| StateLabel::new(a, x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::trace_distance;

    fn lt() -> StateFamily {
        StateFamily::LossTolerant(Alpha2::new(0.9).unwrap())
    }

    fn assert_amps(s: &QuantumState, expected: &[f64]) {
        assert_eq!(s.dim(), expected.len());
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0, "{s:?} vs {expected:?}");
        }
    }

    #[test]
    fn alpha2_range() {
        assert!(Alpha2::new(0.5).is_err());
        assert!(Alpha2::new(1.0).is_err());
        assert!(Alpha2::new(0.5 + 1e-9).is_ok());
        assert!(matches!(Alpha2::new(f64::NAN), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn state_examples() {
        let h = FRAC_1_SQRT_2;
        assert_amps(&StateFamily::Bb84.state(StateLabel::new(1, 0)).unwrap(), &[h, h]);
        assert_amps(
            &lt().state(StateLabel::new(1, 1)).unwrap(),
            &[0.1f64.sqrt(), 0.9f64.sqrt()],
        );
        assert_amps(
            &StateFamily::Ambainis.state(StateLabel::new(1, 1)).unwrap(),
            &[h, 0.0, -h],
        );
        assert_amps(
            &StateFamily::McqmExample.state(StateLabel::new(0, 2)).unwrap(),
            &[0.0, 0.0, 1.0],
        );
        assert_amps(
            &StateFamily::McqmExample.state(StateLabel::new(1, 2)).unwrap(),
            &[0.0, 1.0, 0.0],
        );
    }

    #[test]
    fn invalid_labels() {
        assert!(matches!(
            StateFamily::Bb84.state(StateLabel::new(0, 2)),
            Err(Error::InvalidLabel(_))
        ));
        assert!(matches!(
            StateFamily::Ambainis.state(StateLabel::new(2, 0)),
            Err(Error::InvalidLabel(_))
        ));
        assert!(StateFamily::McqmExample.state(StateLabel::new(1, 2)).is_ok());
        assert!(matches!(lt().basis(2), Err(Error::InvalidLabel(_))));
        assert!(matches!(
            StateFamily::Ambainis.committed_density(2),
            Err(Error::InvalidLabel(_))
        ));
    }

    #[test]
    fn basis_examples() {
        assert_eq!(
            StateFamily::Bb84.basis(0).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap()
        );
        let b = lt().basis(0).unwrap();
        assert_amps(&b.basis()[0], &[0.9f64.sqrt(), 0.1f64.sqrt()]);
        assert_amps(&b.basis()[1], &[0.1f64.sqrt(), -(0.9f64.sqrt())]);
        assert!(b.basis()[0].inner(&b.basis()[1]).unwrap().norm() < 1e-15);

        let amb = StateFamily::Ambainis.basis(1).unwrap();
        assert_eq!(amb.basis()[2], QuantumState::basis_vector(3, 1).unwrap());
        assert_eq!(amb.labels()[2], Label::Reject);
    }

    #[test]
    fn committed_density_examples() {
        assert_eq!(
            StateFamily::Ambainis.committed_density(0).unwrap(),
            DensityMatrix::diagonal(&[0.5, 0.5, 0.0]).unwrap()
        );
        let d = lt().committed_density(1).unwrap();
        assert!((d.get(0, 0).re - 0.1).abs() < 1e-15 && (d.get(1, 1).re - 0.9).abs() < 1e-15);
        assert_eq!(
            StateFamily::McqmExample.committed_density(1).unwrap(),
            DensityMatrix::diagonal(&[0.49, 0.02, 0.49]).unwrap()
        );
    }

    #[test]
    fn bb84_committed_densities_coincide() {
        let f = StateFamily::Bb84;
        let d = trace_distance(&f.committed_density(0).unwrap(), &f.committed_density(1).unwrap()).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn ambainis_supports_overlap_only_on_zero() {
        let f = StateFamily::Ambainis;
        let (r0, r1) = (f.committed_density(0).unwrap(), f.committed_density(1).unwrap());
        for i in 0..3 {
            let both = r0.get(i, i).re > 1e-12 && r1.get(i, i).re > 1e-12;
            assert_eq!(both, i == 0);
        }
    }
}
