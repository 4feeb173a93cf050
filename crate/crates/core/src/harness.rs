//! Monte Carlo estimation of cheating probabilities.
//!
//! Trial `i` of an experiment draws only from `RandomStream::new(seed).split(i)`,
//! so counts do not depend on how trials are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::paper_value;
use crate::catalog::Alpha2;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::protocols::{
    run, AliceHooks, BobHooks, HonestAlice, HonestBob, LossPolicy, PlayerHooks, ProtocolId, Transcript, VariantFlags,
    Verdict,
};
use crate::rng::RandomStream;
use crate::strategies::{make_alice, make_bob, Side, StrategyId, StrategyName};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_MAX_RESTARTS: u64 = 10_000;
/// Largest fraction of trials allowed to hit the restart limit.
pub const RESTART_BUDGET: f64 = 0.001;
const Z95: f64 = 1.959_963_984_540_054;

/// Who plays one side of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Honest,
    Cheat(StrategyName),
}

impl Player {
    pub fn name(self) -> &'static str {
        match self {
            Player::Honest => "honest",
            Player::Cheat(s) => s.name(),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Player {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "honest" {
            Ok(Player::Honest)
        } else {
            s.parse().map(Player::Cheat)
        }
    }
}

impl Serialize for Player {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

/// One Monte Carlo experiment.
///
/// `target` is the outcome the cheater wants. When both sides cheat, Alice
/// aims for `target` and Bob for its complement; success is counted for Alice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: ProtocolId,
    pub variant: VariantFlags,
    pub alice: Player,
    pub bob: Player,
    pub target: u8,
    pub trials: u64,
    pub seed: u64,
    pub alpha2: Alpha2,
    pub eta: f64,
    pub max_restarts: u64,
    /// Photons per honest emission; only honest Alice uses it.
    pub photon_count: Option<usize>,
}

impl ExperimentConfig {
    /// Honest players, lossless channel, fair `alpha^2`.
    pub fn new(protocol: ProtocolId) -> Self {
        Self {
            protocol,
            variant: VariantFlags::default_for(protocol),
            alice: Player::Honest,
            bob: Player::Honest,
            target: 0,
            trials: DEFAULT_TRIALS,
            seed: 0,
            alpha2: Alpha2::fair(),
            eta: 1.0,
            max_restarts: DEFAULT_MAX_RESTARTS,
            photon_count: None,
        }
    }

    pub fn alice(self, strategy: StrategyName) -> Self {
        Self {
            alice: Player::Cheat(strategy),
            ..self
        }
    }

    pub fn bob(self, strategy: StrategyName) -> Self {
        Self {
            bob: Player::Cheat(strategy),
            ..self
        }
    }

    pub fn eta(self, eta: f64) -> Self {
        Self { eta, ..self }
    }

    pub fn policy(self, policy: LossPolicy) -> Self {
        Self {
            variant: VariantFlags::with_policy(self.protocol, policy),
            ..self
        }
    }

    pub fn photons(self, n: usize) -> Self {
        Self {
            photon_count: Some(n),
            ..self
        }
    }

    pub fn trials(self, trials: u64) -> Self {
        Self { trials, ..self }
    }

    pub fn seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::OutOfRange("trials must be at least 1".into()));
        }
        if self.target > 1 {
            return Err(Error::OutOfRange(format!("target = {} is not a bit", self.target)));
        }
        if self.max_restarts < 1 {
            return Err(Error::OutOfRange("max_restarts must be at least 1".into()));
        }
        match (self.photon_count, self.alice) {
            (Some(0), _) => return Err(Error::OutOfRange("photon_count must be at least 1".into())),
            (Some(n), Player::Cheat(s)) if n != 1 => {
                return Err(Error::InvalidFlags(format!(
                    "photon_count applies to honest Alice, not {s}"
                )))
            }
            _ => {}
        }
        for (player, side) in [(self.alice, Side::Alice), (self.bob, Side::Bob)] {
            if let Player::Cheat(s) = player {
                if s.side() != side || !s.compatible_with(self.protocol) {
                    return Err(Error::IncompatibleProtocol {
                        strategy: s.name().to_owned(),
                        protocol: self.protocol.name().to_owned(),
                    });
                }
            }
        }
        self.variant.validate(self.protocol)?;
        ChannelParams::new(self.eta)?;
        Ok(())
    }

    fn hooks(&self) -> Result<PlayerHooks> {
        let family = self.protocol.family(self.alpha2);
        let alice: Box<dyn AliceHooks> = match self.alice {
            Player::Honest => Box::new(HonestAlice::new(family).with_photons(self.photon_count.unwrap_or(1))),
            Player::Cheat(s) => make_alice(StrategyId::new(s, self.target), self.protocol, family)?,
        };
        let bob_target = match self.alice {
            Player::Honest => self.target,
            Player::Cheat(_) => 1 ^ self.target,
        };
        let bob: Box<dyn BobHooks> = match self.bob {
            Player::Honest => Box::new(HonestBob::new(family, self.variant)),
            Player::Cheat(s) => make_bob(
                StrategyId::new(s, bob_target),
                self.protocol,
                self.variant,
                family,
                self.eta,
            )?,
        };
        Ok(PlayerHooks { alice, bob })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    successes: u64,
    failures: u64,
    aborts: u64,
    restart_total: u64,
    restart_limit_hits: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            successes: self.successes + o.successes,
            failures: self.failures + o.failures,
            aborts: self.aborts + o.aborts,
            restart_total: self.restart_total + o.restart_total,
            restart_limit_hits: self.restart_limit_hits + o.restart_limit_hits,
        }
    }
}

/// Counts over terminating trials. Trials that hit the restart limit are
/// excluded from every other field and tallied in `restart_limit_hits`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BiasEstimate {
    pub successes: u64,
    pub failures: u64,
    pub aborts: u64,
    pub restart_total: u64,
    pub restart_limit_hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    pub bias_hat: f64,
}

impl BiasEstimate {
    pub fn from_counts(
        successes: u64,
        failures: u64,
        aborts: u64,
        restart_total: u64,
        restart_limit_hits: u64,
    ) -> Self {
        let trials = successes + failures + aborts;
        let p_hat = successes as f64 / trials as f64;
        Self {
            successes,
            failures,
            aborts,
            restart_total,
            restart_limit_hits,
            trials,
            p_hat,
            ci95: wilson_interval(successes, trials),
            bias_hat: p_hat - 0.5,
        }
    }

    pub fn abort_rate(&self) -> f64 {
        self.aborts as f64 / self.trials as f64
    }

    pub fn mean_restarts(&self) -> f64 {
        self.restart_total as f64 / self.trials as f64
    }

    /// Fraction of quantum rounds that did not end in a restart.
    pub fn conclusive_rate(&self) -> f64 {
        self.trials as f64 / (self.trials + self.restart_total) as f64
    }

    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // the bounds are exactly 0 and 1 at the extremes
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Whether two success probabilities agree within `sigmas` joint standard
/// errors.
pub fn consistent(a: &BiasEstimate, b: &BiasEstimate, sigmas: f64) -> bool {
    let joint = (a.std_error().powi(2) + b.std_error().powi(2)).sqrt();
    (a.p_hat - b.p_hat).abs() <= sigmas * joint
}

/// Trial `index` of the experiment `cfg`, exactly as `run_experiment` plays it.
pub fn run_trial(cfg: &ExperimentConfig, index: u64) -> Result<Transcript> {
    let ch = ChannelParams::new(cfg.eta)?;
    let family = cfg.protocol.family(cfg.alpha2);
    let mut randomness = RandomStream::new(cfg.seed).split(index);
    run(
        cfg.protocol,
        cfg.variant,
        cfg.hooks()?,
        ch,
        family,
        cfg.max_restarts,
        &mut randomness,
    )
}

fn trial(cfg: &ExperimentConfig, index: u64) -> Result<Tally> {
    let mut tally = Tally::default();
    match run_trial(cfg, index) {
        Ok(t) => {
            tally.restart_total = t.restart_count;
            match (t.verdict, t.outcome) {
                (Verdict::Accepted, Some(o)) if o == cfg.target => tally.successes = 1,
                (Verdict::Accepted, _) => tally.failures = 1,
                (Verdict::AbortCheater, _) => tally.aborts = 1,
            }
        }
        Err(Error::RestartLimitExceeded(_)) => tally.restart_limit_hits = 1,
        Err(e) => return Err(e),
    }
    Ok(tally)
}

/// Runs `cfg.trials` independent coin flips in parallel.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BiasEstimate> {
    cfg.validate()?;
    let total = (0..cfg.trials)
        .into_par_iter()
        .map(|i| trial(cfg, i))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    if total.restart_limit_hits as f64 > RESTART_BUDGET * cfg.trials as f64 {
        return Err(Error::RestartBudgetExceeded {
            count: total.restart_limit_hits,
            trials: cfg.trials,
        });
    }
    Ok(BiasEstimate::from_counts(
        total.successes,
        total.failures,
        total.aborts,
        total.restart_total,
        total.restart_limit_hits,
    ))
}

/// One output record; field order is the serialization order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub protocol: ProtocolId,
    pub variant: LossPolicy,
    pub alice: Player,
    pub bob: Player,
    pub target: u8,
    pub trials: u64,
    pub seed: u64,
    pub alpha2: f64,
    pub eta: f64,
    pub successes: u64,
    pub failures: u64,
    pub aborts: u64,
    pub restart_total: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    pub bias_hat: f64,
}

pub const CSV_HEADER: &str =
    "protocol,variant,alice,bob,target,trials,seed,alpha2,eta,successes,failures,aborts,restart_total,p_hat,ci95_lo,ci95_hi,bias_hat";

impl ExperimentReport {
    pub fn new(cfg: &ExperimentConfig, est: &BiasEstimate) -> Self {
        Self {
            protocol: cfg.protocol,
            variant: cfg.variant.loss_policy,
            alice: cfg.alice,
            bob: cfg.bob,
            target: cfg.target,
            trials: est.trials,
            seed: cfg.seed,
            alpha2: cfg.alpha2.get(),
            eta: cfg.eta,
            successes: est.successes,
            failures: est.failures,
            aborts: est.aborts,
            restart_total: est.restart_total,
            p_hat: est.p_hat,
            ci95: est.ci95,
            bias_hat: est.bias_hat,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.protocol,
            self.variant.name(),
            self.alice,
            self.bob,
            self.target,
            self.trials,
            self.seed,
            self.alpha2,
            self.eta,
            self.successes,
            self.failures,
            self.aborts,
            self.restart_total,
            self.p_hat,
            self.ci95.0,
            self.ci95.1,
            self.bias_hat
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Alpha2,
    Eta,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha2" => Ok(SweepParam::Alpha2),
            "eta" => Ok(SweepParam::Eta),
            _ => Err(Error::InvalidLabel(format!("unknown sweep parameter `{s}`"))),
        }
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive, written `a:b:n`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidLabel(format!("grid `{text}` is not of the form a:b:n"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

/// The configuration `base` with `param` set to `value`.
pub fn with_param(base: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = *base;
    match param {
        SweepParam::Alpha2 => cfg.alpha2 = Alpha2::new(value)?,
        SweepParam::Eta => cfg.eta = ChannelParams::new(value)?.eta(),
    }
    Ok(cfg)
}

pub fn sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    grid: &[f64],
) -> Result<Vec<(ExperimentConfig, BiasEstimate)>> {
    grid.iter()
        .map(|&v| {
            let cfg = with_param(base, param, v)?;
            Ok((cfg, run_experiment(&cfg)?))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Success,
    AbortRate,
    MeanRestarts,
    ConclusiveRate,
}

impl Metric {
    pub fn measure(self, est: &BiasEstimate) -> f64 {
        match self {
            Metric::Success => est.p_hat,
            Metric::AbortRate => est.abort_rate(),
            Metric::MeanRestarts => est.mean_restarts(),
            Metric::ConclusiveRate => est.conclusive_rate(),
        }
    }
}

/// A Monte Carlo check against an oracle value.
#[derive(Clone, Debug, PartialEq)]
pub struct AcceptanceRow {
    pub label: String,
    /// Key into the oracle table, when the expectation comes from there.
    pub oracle: Option<&'static str>,
    pub metric: Metric,
    pub expected: f64,
    pub tolerance: f64,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowResult {
    pub label: String,
    pub oracle: Option<&'static str>,
    pub metric: Metric,
    pub expected: f64,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub estimate: BiasEstimate,
}

pub const DEFAULT_TOLERANCE: f64 = 0.01;

fn oracle(label: &str) -> f64 {
    paper_value(label).unwrap_or_else(|| panic!("missing oracle entry {label}"))
}

/// Every strategy row with its expected value. Rows with `tolerance == 0`
/// must match exactly.
pub fn acceptance_matrix(trials: u64, seed: u64) -> Vec<AcceptanceRow> {
    use Metric::*;
    use ProtocolId::*;
    use StrategyName::*;
    let tol = DEFAULT_TOLERANCE;
    let lt = ExperimentConfig::new(LossTolerantCf).trials(trials).seed(seed);
    let bb84 = ExperimentConfig::new(Bb84Cf).trials(trials).seed(seed);
    let amb_var = ExperimentConfig::new(AmbainisCfVariant).trials(trials).seed(seed);
    let row = |label: &str, oracle: Option<&'static str>, metric, expected, tolerance, config| AcceptanceRow {
        label: label.to_owned(),
        oracle,
        metric,
        expected,
        tolerance,
        config,
    };

    let mut rows = vec![row("honest_lt_fair_coin", None, Success, 0.5, tol, lt)];
    for eta in [1.0, 0.5, 0.1] {
        rows.push(row(
            &format!("lt_alice_optimal_eta{eta}"),
            Some("lt_alice_success"),
            Success,
            oracle("lt_alice_success"),
            tol,
            lt.alice(LtOptimal).eta(eta),
        ));
    }
    for eta in [1.0, 0.5, 0.1] {
        rows.push(row(
            &format!("lt_bob_helstrom_eta{eta}"),
            Some("lt_bob_success"),
            Success,
            oracle("lt_bob_success"),
            tol,
            lt.bob(LtHelstrom).eta(eta),
        ));
    }
    rows.extend([
        row(
            "bb84_postpone_lie",
            Some("bb84_postpone_lie_bias"),
            Success,
            0.5 + oracle("bb84_postpone_lie_bias"),
            tol,
            bb84.alice(Bb84PostponeLie),
        ),
        row(
            "bb84_rotated",
            Some("bb84_rotated_success"),
            Success,
            oracle("bb84_rotated_success"),
            tol,
            bb84.alice(Bb84Rotated),
        ),
        row(
            "bb84_rotated_caught",
            Some("bb84_rotated_caught"),
            AbortRate,
            oracle("bb84_rotated_caught"),
            tol,
            bb84.alice(Bb84Rotated),
        ),
        row(
            "bb84_epr",
            Some("bb84_epr_success"),
            Success,
            oracle("bb84_epr_success"),
            0.0,
            bb84.alice(Bb84Epr),
        ),
        row("bb84_epr_aborts", None, AbortRate, 0.0, 0.0, bb84.alice(Bb84Epr)),
        row(
            "ambainis_alice_optimal",
            Some("ambainis_alice_bias"),
            Success,
            0.5 + oracle("ambainis_alice_bias"),
            tol,
            ExperimentConfig::new(AmbainisCf)
                .trials(trials)
                .seed(seed)
                .alice(AmbainisOptimal),
        ),
        row(
            "ambainis_bob_conclusive",
            Some("ambainis_restart_bob_bias"),
            Success,
            0.5 + oracle("ambainis_restart_bob_bias"),
            0.0,
            amb_var.bob(AmbainisConclusive),
        ),
        row(
            "ambainis_bob_conclusive_restarts",
            Some("ambainis_usd_conclusive"),
            MeanRestarts,
            1.0 / oracle("ambainis_usd_conclusive") - 1.0,
            tol,
            amb_var.bob(AmbainisConclusive),
        ),
        row(
            "ambainis_bob_restart_abuse",
            Some("ambainis_restart_bob_bias"),
            Success,
            0.5 + oracle("ambainis_restart_bob_bias"),
            0.0,
            amb_var.bob(AmbainisRestartAbuse),
        ),
        row(
            "ambainis_send_nothing_faith",
            Some("ambainis_send_nothing_bias"),
            Success,
            0.5 + oracle("ambainis_send_nothing_bias"),
            0.0,
            amb_var.policy(LossPolicy::BelieveOnFaith).alice(SendNothing),
        ),
        row(
            "mcqm_bob_restart",
            Some("mcqm_confidence"),
            Success,
            oracle("mcqm_confidence"),
            tol,
            ExperimentConfig::new(McqmContrivedCf)
                .trials(trials)
                .seed(seed)
                .bob(McqmRestart),
        ),
        row(
            "lt_cunning_son",
            Some("cunning_agreement"),
            Success,
            oracle("cunning_agreement"),
            tol,
            lt.bob(CunningSon),
        ),
        row(
            "twophoton_usd_conclusive",
            Some("twophoton_usd_conclusive"),
            ConclusiveRate,
            oracle("twophoton_usd_conclusive"),
            tol,
            lt.photons(2).bob(TwophotonUsd),
        ),
        row(
            "twophoton_usd_correct",
            None,
            Success,
            1.0,
            0.0,
            lt.photons(2).bob(TwophotonUsd),
        ),
        row(
            "twophoton_honest_apparatus_conclusive",
            Some("twophoton_honest_apparatus_conclusive"),
            ConclusiveRate,
            oracle("twophoton_honest_apparatus_conclusive"),
            tol,
            lt.photons(2).bob(TwophotonHonestApparatus),
        ),
        row(
            "twophoton_honest_apparatus_correct",
            None,
            Success,
            1.0,
            0.0,
            lt.photons(2).bob(TwophotonHonestApparatus),
        ),
    ]);
    rows
}

pub fn evaluate(row: &AcceptanceRow) -> Result<RowResult> {
    let estimate = run_experiment(&row.config)?;
    let measured = row.metric.measure(&estimate);
    Ok(RowResult {
        label: row.label.clone(),
        oracle: row.oracle,
        metric: row.metric,
        expected: row.expected,
        measured,
        tolerance: row.tolerance,
        pass: (measured - row.expected).abs() <= row.tolerance,
        estimate,
    })
}
