//! Named cheating strategies.
//!
//! Each strategy is a stateful hook object for one run. A strategy only sees
//! what its hooks are handed by the engine: Bob's announced `b` for Alice, the
//! received signal and Alice's claim for Bob.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::catalog::{StateFamily, StateLabel};
use crate::discrimination::computational_usd_ambainis;
use crate::error::{Error, Result};
use crate::protocols::{
    prepare_honest, receive_honest, AliceHooks, AlicePort, BobHooks, BobPort, Emission, HonestAlice, HonestBob,
    PlayerHooks, ProtocolId, ReceiveAction, VariantFlags, VerifyContext, VerifyDecision,
};
use crate::quantum::{normalize_real, Label, ProjectiveMeasurement, QuantumState};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    Alice,
    Bob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    Bb84PostponeLie,
    Bb84Rotated,
    Bb84Epr,
    AmbainisOptimal,
    LtOptimal,
    SendNothing,
    CunningMother,
    AmbainisRestartAbuse,
    AmbainisConclusive,
    LtHelstrom,
    McqmRestart,
    CunningSon,
    TwophotonUsd,
    TwophotonHonestApparatus,
}

impl StrategyName {
    pub const ALL: [StrategyName; 14] = [
        StrategyName::Bb84PostponeLie,
        StrategyName::Bb84Rotated,
        StrategyName::Bb84Epr,
        StrategyName::AmbainisOptimal,
        StrategyName::LtOptimal,
        StrategyName::SendNothing,
        StrategyName::CunningMother,
        StrategyName::AmbainisRestartAbuse,
        StrategyName::AmbainisConclusive,
        StrategyName::LtHelstrom,
        StrategyName::McqmRestart,
        StrategyName::CunningSon,
        StrategyName::TwophotonUsd,
        StrategyName::TwophotonHonestApparatus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyName::Bb84PostponeLie => "bb84_postpone_lie",
            StrategyName::Bb84Rotated => "bb84_rotated",
            StrategyName::Bb84Epr => "bb84_epr",
            StrategyName::AmbainisOptimal => "ambainis_optimal",
            StrategyName::LtOptimal => "lt_optimal",
            StrategyName::SendNothing => "send_nothing",
            StrategyName::CunningMother => "cunning_mother",
            StrategyName::AmbainisRestartAbuse => "ambainis_restart_abuse",
            StrategyName::AmbainisConclusive => "ambainis_conclusive",
            StrategyName::LtHelstrom => "lt_helstrom",
            StrategyName::McqmRestart => "mcqm_restart",
            StrategyName::CunningSon => "cunning_son",
            StrategyName::TwophotonUsd => "twophoton_usd",
            StrategyName::TwophotonHonestApparatus => "twophoton_honest_apparatus",
        }
    }

    pub fn side(self) -> Side {
        match self {
            StrategyName::Bb84PostponeLie
            | StrategyName::Bb84Rotated
            | StrategyName::Bb84Epr
            | StrategyName::AmbainisOptimal
            | StrategyName::LtOptimal
            | StrategyName::SendNothing
            | StrategyName::CunningMother => Side::Alice,
            _ => Side::Bob,
        }
    }

    pub fn compatible_with(self, protocol: ProtocolId) -> bool {
        use ProtocolId::*;
        match self {
            StrategyName::Bb84PostponeLie | StrategyName::Bb84Rotated | StrategyName::Bb84Epr => protocol == Bb84Cf,
            StrategyName::AmbainisOptimal => matches!(protocol, AmbainisCf | AmbainisCfVariant),
            StrategyName::SendNothing => true,
            StrategyName::AmbainisRestartAbuse | StrategyName::AmbainisConclusive => protocol == AmbainisCfVariant,
            StrategyName::McqmRestart => protocol == McqmContrivedCf,
            StrategyName::LtOptimal
            | StrategyName::CunningMother
            | StrategyName::LtHelstrom
            | StrategyName::CunningSon
            | StrategyName::TwophotonUsd
            | StrategyName::TwophotonHonestApparatus => protocol == LossTolerantCf,
        }
    }
}

impl fmt::Display for StrategyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::InvalidLabel(format!("unknown strategy `{s}`")))
    }
}

/// A strategy together with the coin value `target` the cheater wants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct StrategyId {
    pub name: StrategyName,
    pub target: u8,
}

impl StrategyId {
    pub fn new(name: StrategyName, target: u8) -> Self {
        Self {
            name,
            target: target & 1,
        }
    }

    pub fn side(self) -> Side {
        self.name.side()
    }
}

/// The `x` whose basis-`a` state overlaps most with `state`.
pub fn nearest_x(family: StateFamily, a: u8, state: &QuantumState) -> Result<u8> {
    let mut best = (0u8, f64::NEG_INFINITY);
    for x in 0..family.x_range() {
        let overlap = family.state(StateLabel::new(a, x))?.overlap(state)?;
        if overlap > best.1 {
            best = (x, overlap);
        }
    }
    Ok(best.0)
}

/// Basis `a` revealed by the loss-tolerant optimal cheat for `x`, given that
/// `|+>` (or `|->`) was sent. `|<+|varphi_{x,x}>|^2 = |<-|varphi_{1-x,x}>|^2
/// = 1/2 + alpha*beta`, the larger of the two overlaps for each `x`.
pub fn lt_optimal_basis(sent_plus: bool, x: u8) -> u8 {
    if sent_plus {
        x
    } else {
        1 ^ x
    }
}

fn incompatible(name: StrategyName, protocol: ProtocolId) -> Error {
    Error::IncompatibleProtocol {
        strategy: name.name().to_owned(),
        protocol: protocol.name().to_owned(),
    }
}

struct PostponeLie {
    family: StateFamily,
    target: u8,
    committed: StateLabel,
}

impl AliceHooks for PostponeLie {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission> {
        let (label, emission) = prepare_honest(self.family, 1, randomness)?;
        self.committed = label;
        Ok(emission)
    }

    fn reveal(&mut self, b: u8, _: &mut AlicePort<'_>, randomness: &mut RandomStream) -> Result<StateLabel> {
        let StateLabel { a, .. } = self.committed;
        if a ^ b == self.target {
            Ok(self.committed)
        } else {
            Ok(StateLabel::new(1 ^ a, randomness.bit()))
        }
    }
}

struct Rotated {
    target: u8,
    state: Option<QuantumState>,
}

impl AliceHooks for Rotated {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission> {
        let k = [1.0, 3.0, 5.0, 7.0][randomness.below(4)];
        let theta = k * PI / 8.0;
        let state = QuantumState::from_real(&[theta.cos(), theta.sin()])?;
        self.state = Some(state.clone());
        Ok(Emission::Single {
            state,
            tag: format!("rotated(k={k})"),
        })
    }

    fn reveal(&mut self, b: u8, _: &mut AlicePort<'_>, _: &mut RandomStream) -> Result<StateLabel> {
        let a = self.target ^ b;
        let state = self
            .state
            .as_ref()
            .ok_or(Error::InvalidLabel("reveal before prepare".into()))?;
        Ok(StateLabel::new(a, nearest_x(StateFamily::Bb84, a, state)?))
    }
}

struct EprSteer {
    target: u8,
}

impl AliceHooks for EprSteer {
    fn prepare(&mut self, _: &mut RandomStream) -> Result<Emission> {
        Ok(Emission::EprHalf)
    }

    fn reveal(&mut self, b: u8, kept: &mut AlicePort<'_>, randomness: &mut RandomStream) -> Result<StateLabel> {
        let a = self.target ^ b;
        let x = kept.measure_kept(&StateFamily::Bb84.basis(a)?, randomness)?;
        Ok(StateLabel::new(a, 1 ^ x))
    }
}

struct AmbainisOptimal {
    target: u8,
    state: Option<QuantumState>,
}

impl AliceHooks for AmbainisOptimal {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission> {
        let sign = |r: &mut RandomStream| if r.bit() == 0 { 1.0 } else { -1.0 };
        let (s1, s2) = (sign(randomness), sign(randomness));
        let state = normalize_real(&[2.0, s1, s2])?;
        self.state = Some(state.clone());
        Ok(Emission::Single {
            state,
            tag: format!("ambainis_cheat({s1:+},{s2:+})"),
        })
    }

    fn reveal(&mut self, b: u8, _: &mut AlicePort<'_>, _: &mut RandomStream) -> Result<StateLabel> {
        let a = self.target ^ b;
        let state = self
            .state
            .as_ref()
            .ok_or(Error::InvalidLabel("reveal before prepare".into()))?;
        Ok(StateLabel::new(a, nearest_x(StateFamily::Ambainis, a, state)?))
    }
}

struct LtOptimal {
    target: u8,
    sent_plus: bool,
}

impl AliceHooks for LtOptimal {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission> {
        self.sent_plus = randomness.bit() == 0;
        let sign = if self.sent_plus { 1.0 } else { -1.0 };
        Ok(Emission::Single {
            state: normalize_real(&[1.0, sign])?,
            tag: if self.sent_plus { "plus" } else { "minus" }.to_owned(),
        })
    }

    fn reveal(&mut self, b: u8, _: &mut AlicePort<'_>, _: &mut RandomStream) -> Result<StateLabel> {
        let x = self.target ^ b;
        Ok(StateLabel::new(lt_optimal_basis(self.sent_plus, x), x))
    }
}

struct SendNothing {
    target: u8,
}

impl AliceHooks for SendNothing {
    fn prepare(&mut self, _: &mut RandomStream) -> Result<Emission> {
        Ok(Emission::Vacuum)
    }

    fn reveal(&mut self, b: u8, _: &mut AlicePort<'_>, randomness: &mut RandomStream) -> Result<StateLabel> {
        Ok(StateLabel::new(self.target ^ b, randomness.bit()))
    }
}

/// Honest emission; lies about `x` only when `b` shows Bob could not have
/// measured in her basis.
struct CunningMother {
    family: StateFamily,
    target: u8,
    committed: StateLabel,
}

impl AliceHooks for CunningMother {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission> {
        let (label, emission) = prepare_honest(self.family, 1, randomness)?;
        self.committed = label;
        Ok(emission)
    }

    fn reveal(&mut self, b: u8, _: &mut AlicePort<'_>, _: &mut RandomStream) -> Result<StateLabel> {
        let StateLabel { a, x } = self.committed;
        if x ^ b == self.target {
            Ok(self.committed)
        } else {
            Ok(StateLabel::new(a, self.target ^ b))
        }
    }
}

struct RestartAbuse {
    target: u8,
    p_honest: f64,
    b: u8,
}

impl BobHooks for RestartAbuse {
    fn receive(&mut self, _: &mut BobPort<'_>, _: &mut RandomStream) -> Result<ReceiveAction> {
        Ok(ReceiveAction::StoreUnmeasured)
    }

    fn choose_b(&mut self, randomness: &mut RandomStream) -> u8 {
        self.b = randomness.bit();
        self.b
    }

    fn verify(&mut self, ctx: &mut VerifyContext<'_>, randomness: &mut RandomStream) -> Result<VerifyDecision> {
        if ctx.claim.a ^ self.b != self.target {
            return Ok(VerifyDecision::ClaimLossFalsely);
        }
        // keep the apparent detection rate at p_honest
        let camouflage = (1.0 - 2.0 * self.p_honest).max(0.0);
        if randomness.bernoulli(camouflage) {
            Ok(VerifyDecision::ClaimLossFalsely)
        } else {
            Ok(VerifyDecision::Accept)
        }
    }
}

/// Measures on reception with `measurement`; a conclusive `Value(v)` maps to
/// the guessed bit `v`, anything else triggers a restart. Sends `b` so that
/// the coin lands on `target`.
struct GuessThenSteer {
    target: u8,
    guess: u8,
    measurement: GuessMeasurement,
}

enum GuessMeasurement {
    AmbainisUsd,
    Computational2,
    /// Computational qutrit basis; `|0>` inconclusive, `|1>` -> a=0, `|2>` -> a=1.
    McqmComputational,
}

impl BobHooks for GuessThenSteer {
    fn receive(&mut self, signal: &mut BobPort<'_>, randomness: &mut RandomStream) -> Result<ReceiveAction> {
        let outcome = match self.measurement {
            GuessMeasurement::AmbainisUsd => signal.measure_povm(&computational_usd_ambainis(), randomness)?,
            GuessMeasurement::Computational2 => {
                signal.measure(&ProjectiveMeasurement::computational(2)?, randomness)?
            }
            GuessMeasurement::McqmComputational => {
                let m = ProjectiveMeasurement::new(
                    ProjectiveMeasurement::computational(3)?.basis().to_vec(),
                    vec![Label::Inconclusive, Label::Value(0), Label::Value(1)],
                )?;
                signal.measure(&m, randomness)?
            }
        };
        match outcome {
            Some(Label::Value(v)) => {
                self.guess = v;
                Ok(ReceiveAction::Measured { basis: None, outcome })
            }
            _ => Ok(ReceiveAction::RequestRestart),
        }
    }

    fn choose_b(&mut self, _: &mut RandomStream) -> u8 {
        self.target ^ self.guess
    }
}

/// Honest measurement, but `b` copied from the outcome.
struct CunningSon {
    family: StateFamily,
    flags: VariantFlags,
    target: u8,
    x_hat: u8,
}

impl BobHooks for CunningSon {
    fn receive(&mut self, signal: &mut BobPort<'_>, randomness: &mut RandomStream) -> Result<ReceiveAction> {
        let action = receive_honest(self.family, self.flags, signal, randomness)?;
        if let ReceiveAction::Measured {
            outcome: Some(Label::Value(v)),
            ..
        } = action
        {
            self.x_hat = v;
        }
        Ok(action)
    }

    fn choose_b(&mut self, _: &mut RandomStream) -> u8 {
        self.target ^ self.x_hat
    }
}

/// Two-photon side channel: one photon in each loss-tolerant basis; equal
/// outcomes reveal `x` with certainty.
struct TwoPhoton {
    family: StateFamily,
    target: u8,
    random_routing: bool,
    guess: u8,
}

impl BobHooks for TwoPhoton {
    fn receive(&mut self, signal: &mut BobPort<'_>, randomness: &mut RandomStream) -> Result<ReceiveAction> {
        if signal.photon_count() < 2 {
            return Ok(ReceiveAction::RequestRestart);
        }
        let (b1, b2) = if self.random_routing {
            (randomness.bit(), randomness.bit())
        } else {
            (0, 1)
        };
        let first = signal.measure(&self.family.basis(b1)?, randomness)?;
        let second = signal.measure(&self.family.basis(b2)?, randomness)?;
        match (first, second) {
            (Some(Label::Value(u)), Some(Label::Value(v))) if b1 != b2 && u == v => {
                self.guess = u;
                Ok(ReceiveAction::Measured {
                    basis: None,
                    outcome: first,
                })
            }
            _ => Ok(ReceiveAction::RequestRestart),
        }
    }

    fn choose_b(&mut self, _: &mut RandomStream) -> u8 {
        self.target ^ self.guess
    }
}

pub fn make_alice(id: StrategyId, protocol: ProtocolId, family: StateFamily) -> Result<Box<dyn AliceHooks>> {
    if id.side() != Side::Alice || !id.name.compatible_with(protocol) {
        return Err(incompatible(id.name, protocol));
    }
    let target = id.target;
    let committed = StateLabel::new(0, 0);
    Ok(match id.name {
        StrategyName::Bb84PostponeLie => Box::new(PostponeLie {
            family,
            target,
            committed,
        }),
        StrategyName::Bb84Rotated => Box::new(Rotated { target, state: None }),
        StrategyName::Bb84Epr => Box::new(EprSteer { target }),
        StrategyName::AmbainisOptimal => Box::new(AmbainisOptimal { target, state: None }),
        StrategyName::LtOptimal => Box::new(LtOptimal {
            target,
            sent_plus: true,
        }),
        StrategyName::SendNothing => Box::new(SendNothing { target }),
        StrategyName::CunningMother => Box::new(CunningMother {
            family,
            target,
            committed,
        }),
        _ => unreachable!("Bob strategies are filtered above"),
    })
}

/// `p_honest` is the honest detection probability (the channel's `eta`); only
/// the restart-abuse camouflage uses it.
pub fn make_bob(
    id: StrategyId,
    protocol: ProtocolId,
    flags: VariantFlags,
    family: StateFamily,
    p_honest: f64,
) -> Result<Box<dyn BobHooks>> {
    if id.side() != Side::Bob || !id.name.compatible_with(protocol) {
        return Err(incompatible(id.name, protocol));
    }
    let target = id.target;
    let guesser = |measurement| -> Box<dyn BobHooks> {
        Box::new(GuessThenSteer {
            target,
            guess: 0,
            measurement,
        })
    };
    Ok(match id.name {
        StrategyName::AmbainisRestartAbuse => Box::new(RestartAbuse { target, p_honest, b: 0 }),
        StrategyName::AmbainisConclusive => guesser(GuessMeasurement::AmbainisUsd),
        StrategyName::LtHelstrom => guesser(GuessMeasurement::Computational2),
        StrategyName::McqmRestart => guesser(GuessMeasurement::McqmComputational),
        StrategyName::CunningSon => Box::new(CunningSon {
            family,
            flags,
            target,
            x_hat: 0,
        }),
        StrategyName::TwophotonUsd | StrategyName::TwophotonHonestApparatus => Box::new(TwoPhoton {
            family,
            target,
            random_routing: id.name == StrategyName::TwophotonHonestApparatus,
            guess: 0,
        }),
        _ => unreachable!("Alice strategies are filtered above"),
    })
}

/// Hooks for one cheater against an honest counterpart.
pub fn make(
    id: StrategyId,
    protocol: ProtocolId,
    flags: VariantFlags,
    family: StateFamily,
    p_honest: f64,
) -> Result<PlayerHooks> {
    Ok(match id.side() {
        Side::Alice => PlayerHooks {
            alice: make_alice(id, protocol, family)?,
            bob: Box::new(HonestBob::new(family, flags)),
        },
        Side::Bob => PlayerHooks {
            alice: Box::new(HonestAlice::new(family)),
            bob: make_bob(id, protocol, flags, family, p_honest)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Alpha2;

    #[test]
    fn names_round_trip() {
        for n in StrategyName::ALL {
            assert_eq!(n.name().parse::<StrategyName>().unwrap(), n);
        }
        assert!("honest".parse::<StrategyName>().is_err());
    }

    #[test]
    fn incompatible_protocols_are_rejected() {
        let id = StrategyId::new(StrategyName::LtOptimal, 0);
        let flags = VariantFlags::default_for(ProtocolId::Bb84Cf);
        let r = make(id, ProtocolId::Bb84Cf, flags, StateFamily::Bb84, 1.0);
        assert!(matches!(r, Err(Error::IncompatibleProtocol { .. })));
        let r = make_bob(
            StrategyId::new(StrategyName::Bb84Epr, 0),
            ProtocolId::Bb84Cf,
            flags,
            StateFamily::Bb84,
            1.0,
        );
        assert!(matches!(r, Err(Error::IncompatibleProtocol { .. })));
    }

    // Brute-force check of the reveal tables: for every sign pattern and
    // claimed basis, the chosen x maximizes the pass probability, which is 3/4.
    #[test]
    fn ambainis_reveal_table_by_overlap() {
        let f = StateFamily::Ambainis;
        for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let state = normalize_real(&[2.0, s1, s2]).unwrap();
            for a in 0..2u8 {
                let x = nearest_x(f, a, &state).unwrap();
                let sign = if a == 0 { s1 } else { s2 };
                assert_eq!(x, if sign > 0.0 { 0 } else { 1 });
                let pass = f.state(StateLabel::new(a, x)).unwrap().overlap(&state).unwrap();
                assert!((pass - 0.75).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lt_reveal_table_by_overlap() {
        for alpha2 in [0.55, 0.7, 0.9, 0.95] {
            let p = Alpha2::new(alpha2).unwrap();
            let f = StateFamily::LossTolerant(p);
            for sent_plus in [true, false] {
                let state = normalize_real(&[1.0, if sent_plus { 1.0 } else { -1.0 }]).unwrap();
                for x in 0..2u8 {
                    let overlaps: Vec<f64> = (0..2u8)
                        .map(|a| f.state(StateLabel::new(a, x)).unwrap().overlap(&state).unwrap())
                        .collect();
                    let a = lt_optimal_basis(sent_plus, x);
                    assert!(overlaps[a as usize] >= overlaps[1 - a as usize]);
                    assert!((overlaps[a as usize] - (0.5 + p.alpha() * p.beta())).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rotated_reveal_is_never_a_tie() {
        for k in [1.0f64, 3.0, 5.0, 7.0] {
            let t = k * PI / 8.0;
            let state = QuantumState::from_real(&[t.cos(), t.sin()]).unwrap();
            for a in 0..2u8 {
                let overlaps: Vec<f64> = (0..2u8)
                    .map(|x| {
                        StateFamily::Bb84
                            .state(StateLabel::new(a, x))
                            .unwrap()
                            .overlap(&state)
                            .unwrap()
                    })
                    .collect();
                assert!((overlaps[0] - overlaps[1]).abs() > 0.5);
                let x = nearest_x(StateFamily::Bb84, a, &state).unwrap();
                assert!((overlaps[x as usize] - (PI / 8.0).cos().powi(2)).abs() < 1e-12);
            }
        }
    }
}
