//! Protocol state machines.
//!
//! Every protocol is a sequence of the same six steps: Alice emits a signal,
//! Bob receives it (measuring right away or storing it), Bob announces `b`,
//! Alice reveals `(a, x)`, Bob verifies, and the coin is computed. They differ
//! in which states are used, when Bob measures, how a non-detection is handled
//! and which bit the coin is built from. Player behaviour is supplied through
//! [`AliceHooks`] and [`BobHooks`], so honest players and cheaters run on the
//! same engine.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::catalog::{Alpha2, StateFamily, StateLabel};
use crate::channel::{emit_pulse, transmit_pulse, ChannelParams, Pulse};
use crate::error::{Error, Result};
use crate::quantum::{
    measure_povm_pure, measure_projective, steer_epr, Label, Povm, ProjectiveMeasurement, QuantumState,
};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolId {
    /// Single-qubit BB84 coin flip; coin is `a xor b`.
    Bb84Cf,
    /// Ambainis' qutrit protocol; Bob stores the qutrit and measures in the
    /// declared basis. Assumes a lossless channel.
    AmbainisCf,
    /// Ambainis' states with an explicit rule for non-detections.
    AmbainisCfVariant,
    /// Loss-tolerant protocol; coin is `x xor b`.
    LossTolerantCf,
    /// Ambainis' states plus `|phi_{a,2}>` on the measure-on-reception
    /// template, honest `x` drawn with weights (0.49, 0.49, 0.02).
    McqmContrivedCf,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 5] = [
        ProtocolId::Bb84Cf,
        ProtocolId::AmbainisCf,
        ProtocolId::AmbainisCfVariant,
        ProtocolId::LossTolerantCf,
        ProtocolId::McqmContrivedCf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::Bb84Cf => "bb84_cf",
            ProtocolId::AmbainisCf => "ambainis_cf",
            ProtocolId::AmbainisCfVariant => "ambainis_cf_variant",
            ProtocolId::LossTolerantCf => "loss_tolerant_cf",
            ProtocolId::McqmContrivedCf => "mcqm_contrived_cf",
        }
    }

    /// State family used by this protocol. `alpha2` only matters for the
    /// loss-tolerant protocol.
    pub fn family(self, alpha2: Alpha2) -> StateFamily {
        match self {
            ProtocolId::Bb84Cf => StateFamily::Bb84,
            ProtocolId::AmbainisCf | ProtocolId::AmbainisCfVariant => StateFamily::Ambainis,
            ProtocolId::LossTolerantCf => StateFamily::LossTolerant(alpha2),
            ProtocolId::McqmContrivedCf => StateFamily::McqmExample,
        }
    }

    fn accepts_family(self, family: StateFamily) -> bool {
        matches!(
            (self, family),
            (ProtocolId::Bb84Cf, StateFamily::Bb84)
                | (
                    ProtocolId::AmbainisCf | ProtocolId::AmbainisCfVariant,
                    StateFamily::Ambainis
                )
                | (ProtocolId::LossTolerantCf, StateFamily::LossTolerant(_))
                | (ProtocolId::McqmContrivedCf, StateFamily::McqmExample)
        )
    }

    /// Coin value of an accepted run.
    pub fn coin(self, revealed: StateLabel, b: u8) -> u8 {
        match self {
            ProtocolId::LossTolerantCf => (revealed.x ^ b) & 1,
            _ => (revealed.a ^ b) & 1,
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidLabel(format!("unknown protocol `{s}`")))
    }
}

/// What Bob does when nothing registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LossPolicy {
    /// No rule: a non-detection is an error. Only meaningful on a lossless channel.
    None,
    /// Accept Alice's declaration without evidence.
    BelieveOnFaith,
    /// Ask Alice to start over with a fresh state.
    RestartOnLoss,
}

impl LossPolicy {
    pub fn name(self) -> &'static str {
        match self {
            LossPolicy::None => "none",
            LossPolicy::BelieveOnFaith => "believe_on_faith",
            LossPolicy::RestartOnLoss => "restart_on_loss",
        }
    }
}

impl FromStr for LossPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [LossPolicy::None, LossPolicy::BelieveOnFaith, LossPolicy::RestartOnLoss]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidLabel(format!("unknown loss policy `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VariantFlags {
    pub loss_policy: LossPolicy,
    pub bob_measures_on_reception: bool,
}

impl VariantFlags {
    pub fn new(loss_policy: LossPolicy, bob_measures_on_reception: bool) -> Self {
        Self {
            loss_policy,
            bob_measures_on_reception,
        }
    }

    pub fn default_for(protocol: ProtocolId) -> Self {
        match protocol {
            ProtocolId::AmbainisCf => Self::new(LossPolicy::None, false),
            _ => Self::new(LossPolicy::RestartOnLoss, true),
        }
    }

    /// Default reception mode of `protocol` under `policy`.
    pub fn with_policy(protocol: ProtocolId, policy: LossPolicy) -> Self {
        match (protocol, policy) {
            (ProtocolId::AmbainisCf, _) | (ProtocolId::AmbainisCfVariant, LossPolicy::BelieveOnFaith) => {
                Self::new(policy, false)
            }
            _ => Self::new(policy, true),
        }
    }

    pub fn validate(self, protocol: ProtocolId) -> Result<()> {
        let fail = |why: &str| Err(Error::InvalidFlags(format!("{protocol}: {why}")));
        match protocol {
            ProtocolId::Bb84Cf if !self.bob_measures_on_reception => fail("Bob measures on reception"),
            ProtocolId::AmbainisCf if self.bob_measures_on_reception => fail("Bob stores the qutrit"),
            ProtocolId::AmbainisCf if self.loss_policy != LossPolicy::None => {
                fail("the original protocol has no loss rule; use ambainis_cf_variant")
            }
            ProtocolId::AmbainisCfVariant if self.loss_policy == LossPolicy::None => {
                fail("the variant needs a loss policy")
            }
            ProtocolId::LossTolerantCf | ProtocolId::McqmContrivedCf
                if !self.bob_measures_on_reception || self.loss_policy != LossPolicy::RestartOnLoss =>
            {
                fail("Bob measures on reception and restarts on loss")
            }
            _ => Ok(()),
        }
    }
}

/// What Alice puts on the channel in step 1.
#[derive(Clone, Debug)]
pub enum Emission {
    Single {
        state: QuantumState,
        tag: String,
    },
    /// One half of the singlet; Alice keeps the other.
    EprHalf,
    /// Nothing at all.
    Vacuum,
    MultiPhoton {
        pulse: Pulse,
        tag: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Carrier {
    Empty,
    State(QuantumState),
    Pulse(Pulse),
    EprHalf,
}

#[derive(Clone, Debug, PartialEq)]
enum Link {
    Unentangled,
    Entangled,
    /// Bob measured first; Alice's half collapsed to this state.
    AliceCollapsed(QuantumState),
    /// Alice measured first; Bob's half collapsed to this state.
    BobCollapsed(QuantumState),
}

#[derive(Debug)]
struct Wire {
    carrier: Carrier,
    link: Link,
}

/// Bob's view of whatever reached him (or sits in his quantum memory).
pub struct BobPort<'a> {
    wire: &'a mut Wire,
}

impl BobPort<'_> {
    /// Nothing left to measure.
    pub fn is_empty(&self) -> bool {
        match &self.wire.carrier {
            Carrier::Empty => true,
            Carrier::Pulse(p) => p.is_vacuum(),
            _ => false,
        }
    }

    pub fn photon_count(&self) -> usize {
        match &self.wire.carrier {
            Carrier::Empty => 0,
            Carrier::Pulse(p) => p.photon_count(),
            _ => 1,
        }
    }

    /// Measures one photon of the signal, consuming it. `None` when nothing
    /// registers.
    pub fn measure(&mut self, basis: &ProjectiveMeasurement, randomness: &mut RandomStream) -> Result<Option<Label>> {
        match std::mem::replace(&mut self.wire.carrier, Carrier::Empty) {
            Carrier::Empty => Ok(None),
            Carrier::State(s) => Ok(Some(measure_projective(&s, basis, randomness)?.label)),
            Carrier::Pulse(mut p) => {
                let photon = p.take_photon();
                if !p.is_vacuum() {
                    self.wire.carrier = Carrier::Pulse(p);
                }
                match photon {
                    Some(s) => Ok(Some(measure_projective(&s, basis, randomness)?.label)),
                    None => Ok(None),
                }
            }
            Carrier::EprHalf => match std::mem::replace(&mut self.wire.link, Link::Unentangled) {
                Link::Entangled => {
                    let (k, alice_half) = steer_epr(basis, randomness)?;
                    self.wire.link = Link::AliceCollapsed(alice_half);
                    Ok(Some(basis.labels()[k as usize]))
                }
                Link::BobCollapsed(s) => Ok(Some(measure_projective(&s, basis, randomness)?.label)),
                other => {
                    self.wire.link = other;
                    Err(Error::InvalidMeasurement("entangled half already measured"))
                }
            },
        }
    }

    /// POVM on one photon of the signal.
    pub fn measure_povm(&mut self, povm: &Povm, randomness: &mut RandomStream) -> Result<Option<Label>> {
        let state = match std::mem::replace(&mut self.wire.carrier, Carrier::Empty) {
            Carrier::Empty => None,
            Carrier::State(s) => Some(s),
            Carrier::Pulse(mut p) => {
                let photon = p.take_photon();
                if !p.is_vacuum() {
                    self.wire.carrier = Carrier::Pulse(p);
                }
                photon
            }
            Carrier::EprHalf => match &self.wire.link {
                Link::BobCollapsed(s) => Some(s.clone()),
                _ => {
                    self.wire.carrier = Carrier::EprHalf;
                    return Err(Error::InvalidMeasurement("POVM on an unmeasured entangled half"));
                }
            },
        };
        state
            .map(|s| Ok(measure_povm_pure(&s, povm, randomness)?.label))
            .transpose()
    }
}

/// Alice's access to the half of an EPR pair she kept.
pub struct AlicePort<'a> {
    wire: &'a mut Wire,
}

impl AlicePort<'_> {
    pub fn has_kept_half(&self) -> bool {
        self.wire.link != Link::Unentangled
    }

    /// Measures the kept half and returns the outcome index.
    pub fn measure_kept(&mut self, basis: &ProjectiveMeasurement, randomness: &mut RandomStream) -> Result<u8> {
        match std::mem::replace(&mut self.wire.link, Link::Unentangled) {
            Link::Unentangled => Err(Error::InvalidMeasurement("Alice kept no entangled half")),
            Link::Entangled => {
                let (k, bob_half) = steer_epr(basis, randomness)?;
                self.wire.link = Link::BobCollapsed(bob_half);
                Ok(k)
            }
            Link::AliceCollapsed(s) => Ok(measure_projective(&s, basis, randomness)?.index as u8),
            Link::BobCollapsed(s) => {
                self.wire.link = Link::BobCollapsed(s);
                Err(Error::InvalidMeasurement("kept half already measured"))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReceiveAction {
    /// Bob measured. `basis` is the protocol basis `a-hat` when he used one.
    Measured {
        basis: Option<u8>,
        outcome: Option<Label>,
    },
    StoreUnmeasured,
    /// Nothing registered (or Bob wants a new state): start over.
    RequestRestart,
    /// Bob pretends nothing registered.
    ClaimLossFalsely,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyDecision {
    Accept,
    Abort,
    RequestRestart,
    ClaimLossFalsely,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accepted,
    AbortCheater,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuantumRound {
    pub sent_description: String,
    pub delivered: bool,
    pub stored: bool,
    pub bob_basis: Option<u8>,
    pub bob_outcome: Option<Label>,
    pub restart_requested: bool,
    /// Bob claimed a loss that did not happen. Never shown to Alice's hooks.
    pub false_loss_claim: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transcript {
    pub protocol: ProtocolId,
    pub rounds: Vec<QuantumRound>,
    pub b: u8,
    pub revealed: StateLabel,
    pub verdict: Verdict,
    pub outcome: Option<u8>,
    pub restart_count: u64,
}

impl Transcript {
    pub fn final_round(&self) -> &QuantumRound {
        self.rounds.last().expect("a finished run has at least one round")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

/// Everything honest verification needs.
pub struct VerifyContext<'a> {
    pub protocol: ProtocolId,
    pub flags: VariantFlags,
    pub family: StateFamily,
    pub claim: StateLabel,
    pub b: u8,
    pub round: &'a mut QuantumRound,
    pub memory: BobPort<'a>,
}

impl VerifyContext<'_> {
    /// Verification as prescribed by the protocol.
    ///
    /// Measure-on-reception: abort iff `a-hat = a` and `x-hat != x`.
    /// Stored signal: measure it in the declared basis and abort iff
    /// `x-hat != x`. A non-detection is handled by the loss policy.
    pub fn honest_decision(&mut self, randomness: &mut RandomStream) -> Result<VerifyDecision> {
        let on_loss = |policy: LossPolicy| match policy {
            LossPolicy::None => Err(Error::UnhandledLoss),
            LossPolicy::BelieveOnFaith => Ok(VerifyDecision::Accept),
            LossPolicy::RestartOnLoss => Ok(VerifyDecision::RequestRestart),
        };
        if self.round.stored {
            let basis = self.family.basis(self.claim.a)?;
            let outcome = self.memory.measure(&basis, randomness)?;
            self.round.bob_basis = Some(self.claim.a);
            self.round.bob_outcome = outcome;
            return match outcome {
                None => on_loss(self.flags.loss_policy),
                Some(l) if l == Label::Value(self.claim.x) => Ok(VerifyDecision::Accept),
                Some(_) => Ok(VerifyDecision::Abort),
            };
        }
        match (self.round.bob_basis, self.round.bob_outcome) {
            (Some(_), None) => on_loss(self.flags.loss_policy),
            (Some(basis), Some(outcome)) if basis == self.claim.a && outcome != Label::Value(self.claim.x) => {
                Ok(VerifyDecision::Abort)
            }
            _ => Ok(VerifyDecision::Accept),
        }
    }
}

pub trait AliceHooks {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission>;
    fn reveal(&mut self, b: u8, kept: &mut AlicePort<'_>, randomness: &mut RandomStream) -> Result<StateLabel>;
}

pub trait BobHooks {
    fn receive(&mut self, signal: &mut BobPort<'_>, randomness: &mut RandomStream) -> Result<ReceiveAction>;
    fn choose_b(&mut self, randomness: &mut RandomStream) -> u8;
    fn verify(&mut self, ctx: &mut VerifyContext<'_>, randomness: &mut RandomStream) -> Result<VerifyDecision> {
        ctx.honest_decision(randomness)
    }
}

pub struct PlayerHooks {
    pub alice: Box<dyn AliceHooks>,
    pub bob: Box<dyn BobHooks>,
}

/// Honest Alice: uniform `a`, `x` drawn from the family's prior.
pub struct HonestAlice {
    family: StateFamily,
    photons: usize,
    committed: Option<StateLabel>,
}

impl HonestAlice {
    pub fn new(family: StateFamily) -> Self {
        Self {
            family,
            photons: 1,
            committed: None,
        }
    }

    /// Emit every state as a pulse of `photons` identical copies.
    pub fn with_photons(mut self, photons: usize) -> Self {
        self.photons = photons;
        self
    }
}

pub(crate) fn prepare_honest(
    family: StateFamily,
    photons: usize,
    randomness: &mut RandomStream,
) -> Result<(StateLabel, Emission)> {
    let a = randomness.bit();
    let x = randomness.weighted(family.x_weights()) as u8;
    let label = StateLabel::new(a, x);
    let state = family.state(label)?;
    let tag = format!("{}{}", family.name(), label);
    let emission = if photons == 1 {
        Emission::Single { state, tag }
    } else {
        Emission::MultiPhoton {
            pulse: emit_pulse(&state, photons),
            tag: format!("{tag}x{photons}"),
        }
    };
    Ok((label, emission))
}

impl AliceHooks for HonestAlice {
    fn prepare(&mut self, randomness: &mut RandomStream) -> Result<Emission> {
        let (label, emission) = prepare_honest(self.family, self.photons, randomness)?;
        self.committed = Some(label);
        Ok(emission)
    }

    fn reveal(&mut self, _b: u8, _kept: &mut AlicePort<'_>, _randomness: &mut RandomStream) -> Result<StateLabel> {
        self.committed
            .ok_or(Error::InvalidLabel("reveal before prepare".into()))
    }
}

/// Honest Bob: random `a-hat` measurement (or storage), random `b`, default
/// verification.
pub struct HonestBob {
    family: StateFamily,
    flags: VariantFlags,
}

impl HonestBob {
    pub fn new(family: StateFamily, flags: VariantFlags) -> Self {
        Self { family, flags }
    }
}

pub(crate) fn receive_honest(
    family: StateFamily,
    flags: VariantFlags,
    signal: &mut BobPort<'_>,
    randomness: &mut RandomStream,
) -> Result<ReceiveAction> {
    if !flags.bob_measures_on_reception {
        return Ok(ReceiveAction::StoreUnmeasured);
    }
    let a_hat = randomness.bit();
    let outcome = signal.measure(&family.basis(a_hat)?, randomness)?;
    if outcome.is_none() && flags.loss_policy == LossPolicy::RestartOnLoss {
        return Ok(ReceiveAction::RequestRestart);
    }
    Ok(ReceiveAction::Measured {
        basis: Some(a_hat),
        outcome,
    })
}

impl BobHooks for HonestBob {
    fn receive(&mut self, signal: &mut BobPort<'_>, randomness: &mut RandomStream) -> Result<ReceiveAction> {
        receive_honest(self.family, self.flags, signal, randomness)
    }

    fn choose_b(&mut self, randomness: &mut RandomStream) -> u8 {
        randomness.bit()
    }
}

pub fn honest_hooks(flags: VariantFlags, family: StateFamily) -> PlayerHooks {
    PlayerHooks {
        alice: Box::new(HonestAlice::new(family)),
        bob: Box::new(HonestBob::new(family, flags)),
    }
}

fn deliver(emission: Emission, ch: ChannelParams, nature: &mut RandomStream) -> (Wire, String) {
    match emission {
        Emission::Single { state, tag } => {
            let carrier = if ch.survives(nature) {
                Carrier::State(state)
            } else {
                Carrier::Empty
            };
            (
                Wire {
                    carrier,
                    link: Link::Unentangled,
                },
                tag,
            )
        }
        Emission::EprHalf => {
            let carrier = if ch.survives(nature) {
                Carrier::EprHalf
            } else {
                Carrier::Empty
            };
            (
                Wire {
                    carrier,
                    link: Link::Entangled,
                },
                "epr_half".to_owned(),
            )
        }
        Emission::Vacuum => (
            Wire {
                carrier: Carrier::Empty,
                link: Link::Unentangled,
            },
            "vacuum".to_owned(),
        ),
        Emission::MultiPhoton { pulse, tag } => (
            Wire {
                carrier: Carrier::Pulse(transmit_pulse(&pulse, ch, nature)),
                link: Link::Unentangled,
            },
            tag,
        ),
    }
}

/// Runs one coin flip to completion.
///
/// A restart (genuine loss, or a claimed one) sends the protocol back to
/// step 1 with a fresh emission; hooks keep whatever memory they like across
/// restarts. Alice, Bob and the channel each draw from their own substream of
/// `randomness`.
pub fn run(
    protocol: ProtocolId,
    flags: VariantFlags,
    hooks: PlayerHooks,
    ch: ChannelParams,
    family: StateFamily,
    max_restarts: u64,
    randomness: &mut RandomStream,
) -> Result<Transcript> {
    flags.validate(protocol)?;
    if !protocol.accepts_family(family) {
        return Err(Error::InvalidFlags(format!(
            "{protocol} cannot use {} states",
            family.name()
        )));
    }
    if max_restarts < 1 {
        return Err(Error::OutOfRange("max_restarts must be at least 1".into()));
    }
    let PlayerHooks { mut alice, mut bob } = hooks;
    let mut alice_rng = randomness.split(0);
    let mut bob_rng = randomness.split(1);
    let mut nature = randomness.split(2);

    let mut rounds = Vec::new();
    let mut restart_count = 0u64;
    let mut restart = |rounds: &mut Vec<QuantumRound>, mut round: QuantumRound, claimed: bool| -> Result<()> {
        if flags.loss_policy != LossPolicy::RestartOnLoss {
            return Err(Error::RestartNotPermitted);
        }
        round.restart_requested = true;
        round.false_loss_claim = claimed;
        rounds.push(round);
        restart_count += 1;
        if restart_count > max_restarts {
            return Err(Error::RestartLimitExceeded(max_restarts));
        }
        Ok(())
    };

    loop {
        // step 1
        let emission = alice.prepare(&mut alice_rng)?;
        let (mut wire, sent_description) = deliver(emission, ch, &mut nature);
        let mut round = QuantumRound {
            sent_description,
            delivered: !BobPort { wire: &mut wire }.is_empty(),
            stored: false,
            bob_basis: None,
            bob_outcome: None,
            restart_requested: false,
            false_loss_claim: false,
        };

        // step 2
        match bob.receive(&mut BobPort { wire: &mut wire }, &mut bob_rng)? {
            ReceiveAction::Measured { basis, outcome } => {
                round.bob_basis = basis;
                round.bob_outcome = outcome;
            }
            ReceiveAction::StoreUnmeasured => round.stored = true,
            ReceiveAction::RequestRestart => {
                restart(&mut rounds, round, false)?;
                continue;
            }
            ReceiveAction::ClaimLossFalsely => {
                let claimed = round.delivered;
                restart(&mut rounds, round, claimed)?;
                continue;
            }
        }

        // steps 3 and 4
        let b = bob.choose_b(&mut bob_rng) & 1;
        let claim = alice.reveal(b, &mut AlicePort { wire: &mut wire }, &mut alice_rng)?;

        // step 5
        let decision = if claim.a > 1 || claim.x >= family.x_range() {
            VerifyDecision::Abort
        } else {
            let mut ctx = VerifyContext {
                protocol,
                flags,
                family,
                claim,
                b,
                round: &mut round,
                memory: BobPort { wire: &mut wire },
            };
            bob.verify(&mut ctx, &mut bob_rng)?
        };

        // step 6
        let (verdict, outcome) = match decision {
            VerifyDecision::Accept => (Verdict::Accepted, Some(protocol.coin(claim, b))),
            VerifyDecision::Abort => (Verdict::AbortCheater, None),
            VerifyDecision::RequestRestart => {
                restart(&mut rounds, round, false)?;
                continue;
            }
            VerifyDecision::ClaimLossFalsely => {
                let claimed = round.delivered;
                restart(&mut rounds, round, claimed)?;
                continue;
            }
        };
        rounds.push(round);
        return Ok(Transcript {
            protocol,
            rounds,
            b,
            revealed: claim,
            verdict,
            outcome,
            restart_count,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt_family() -> StateFamily {
        StateFamily::LossTolerant(Alpha2::fair())
    }

    fn run_honest(protocol: ProtocolId, flags: VariantFlags, eta: f64, seed: u64) -> Result<Transcript> {
        let family = protocol.family(Alpha2::fair());
        run(
            protocol,
            flags,
            honest_hooks(flags, family),
            ChannelParams::new(eta).unwrap(),
            family,
            10_000,
            &mut RandomStream::new(seed),
        )
    }

    #[test]
    fn protocol_names_round_trip() {
        for p in ProtocolId::ALL {
            assert_eq!(p.name().parse::<ProtocolId>().unwrap(), p);
        }
        assert!("bb85".parse::<ProtocolId>().is_err());
        assert_eq!(
            "believe_on_faith".parse::<LossPolicy>().unwrap(),
            LossPolicy::BelieveOnFaith
        );
    }

    #[test]
    fn flag_validation() {
        let f = VariantFlags::new;
        assert!(f(LossPolicy::RestartOnLoss, false)
            .validate(ProtocolId::Bb84Cf)
            .is_err());
        assert!(f(LossPolicy::None, true).validate(ProtocolId::AmbainisCf).is_err());
        assert!(f(LossPolicy::RestartOnLoss, false)
            .validate(ProtocolId::AmbainisCf)
            .is_err());
        assert!(f(LossPolicy::None, false)
            .validate(ProtocolId::AmbainisCfVariant)
            .is_err());
        assert!(f(LossPolicy::BelieveOnFaith, true)
            .validate(ProtocolId::LossTolerantCf)
            .is_err());
        for p in ProtocolId::ALL {
            VariantFlags::default_for(p).validate(p).unwrap();
        }
    }

    #[test]
    fn family_must_match_protocol() {
        let flags = VariantFlags::default_for(ProtocolId::LossTolerantCf);
        let err = run(
            ProtocolId::LossTolerantCf,
            flags,
            honest_hooks(flags, StateFamily::Bb84),
            ChannelParams::lossless(),
            StateFamily::Bb84,
            10,
            &mut RandomStream::new(0),
        );
        assert!(matches!(err, Err(Error::InvalidFlags(_))));
    }

    #[test]
    fn honest_loss_tolerant_transcript_shape() {
        let flags = VariantFlags::default_for(ProtocolId::LossTolerantCf);
        for seed in 0..200 {
            let t = run_honest(ProtocolId::LossTolerantCf, flags, 0.3, seed).unwrap();
            assert_eq!(t.verdict, Verdict::Accepted);
            assert_eq!(t.outcome, Some(t.revealed.x ^ t.b));
            assert_eq!(
                t.restart_count as usize,
                t.rounds.iter().filter(|r| r.restart_requested).count()
            );
            assert_eq!(t.rounds.len() as u64, t.restart_count + 1);
            assert!(t.rounds[..t.rounds.len() - 1].iter().all(|r| !r.delivered));
            assert!(t.final_round().delivered);
        }
    }

    #[test]
    fn lossless_original_ambainis_rejects_loss() {
        let flags = VariantFlags::default_for(ProtocolId::AmbainisCf);
        let errors = (0..200)
            .filter(|&s| run_honest(ProtocolId::AmbainisCf, flags, 0.2, s) == Err(Error::UnhandledLoss))
            .count();
        assert!(errors > 100);
        for s in 0..200 {
            let t = run_honest(ProtocolId::AmbainisCf, flags, 1.0, s).unwrap();
            assert_eq!(t.verdict, Verdict::Accepted);
            assert_eq!(t.final_round().bob_outcome, Some(Label::Value(t.revealed.x)));
        }
    }

    #[test]
    fn restart_limit() {
        struct Stubborn;
        impl BobHooks for Stubborn {
            fn receive(&mut self, _: &mut BobPort<'_>, _: &mut RandomStream) -> Result<ReceiveAction> {
                Ok(ReceiveAction::RequestRestart)
            }
            fn choose_b(&mut self, _: &mut RandomStream) -> u8 {
                0
            }
        }
        let flags = VariantFlags::default_for(ProtocolId::LossTolerantCf);
        let hooks = PlayerHooks {
            alice: Box::new(HonestAlice::new(lt_family())),
            bob: Box::new(Stubborn),
        };
        let r = run(
            ProtocolId::LossTolerantCf,
            flags,
            hooks,
            ChannelParams::lossless(),
            lt_family(),
            5,
            &mut RandomStream::new(1),
        );
        assert_eq!(r, Err(Error::RestartLimitExceeded(5)));
    }

    #[test]
    fn restart_not_permitted_under_faith() {
        struct Restarter;
        impl BobHooks for Restarter {
            fn receive(&mut self, _: &mut BobPort<'_>, _: &mut RandomStream) -> Result<ReceiveAction> {
                Ok(ReceiveAction::ClaimLossFalsely)
            }
            fn choose_b(&mut self, _: &mut RandomStream) -> u8 {
                0
            }
        }
        let flags = VariantFlags::new(LossPolicy::BelieveOnFaith, true);
        let hooks = PlayerHooks {
            alice: Box::new(HonestAlice::new(StateFamily::Bb84)),
            bob: Box::new(Restarter),
        };
        let r = run(
            ProtocolId::Bb84Cf,
            flags,
            hooks,
            ChannelParams::lossless(),
            StateFamily::Bb84,
            5,
            &mut RandomStream::new(1),
        );
        assert_eq!(r, Err(Error::RestartNotPermitted));
    }

    #[test]
    fn transcript_json_line() {
        let flags = VariantFlags::default_for(ProtocolId::LossTolerantCf);
        let t = run_honest(ProtocolId::LossTolerantCf, flags, 1.0, 9).unwrap();
        let line = t.to_json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["protocol"], "loss_tolerant_cf");
        assert_eq!(v["verdict"], "ACCEPTED");
        assert_eq!(v["rounds"][0]["restart_requested"], false);
    }
}
