//! Checks shared by the property tests and the acceptance suite. Each returns
//! `Err` with a description of the first violation.

#![allow(dead_code)]

use num_complex::Complex64;
use qcoinflip::analytics::alice_bias_bound;
use qcoinflip::catalog::{Alpha2, StateFamily, StateLabel};
use qcoinflip::discrimination::usd_pure_pair;
use qcoinflip::harness::{run_experiment, ExperimentConfig, Player};
use qcoinflip::protocols::{LossPolicy, ProtocolId};
use qcoinflip::quantum::{normalize, DensityMatrix, Matrix, Povm, QuantumState};
use qcoinflip::rng::RandomStream;
use qcoinflip::strategies::StrategyName;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const ALPHA2_GRID: [f64; 9] = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
pub const ETA_GRID: [f64; 3] = [1.0, 0.5, 0.1];
/// Two-sided tail probability of a 5 sigma normal deviation.
pub const FIVE_SIGMA_P: f64 = 5.733_031_437_583_866e-7;

pub fn families() -> Vec<StateFamily> {
    let mut out = vec![StateFamily::Bb84, StateFamily::Ambainis, StateFamily::McqmExample];
    out.extend(
        ALPHA2_GRID
            .iter()
            .map(|&t| StateFamily::LossTolerant(Alpha2::new(t).unwrap())),
    );
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Validity of a POVM: elements PSD and summing to the identity.
pub fn povm_is_valid(p: &Povm) -> bool {
    let dim = p.dim();
    let mut sum = Matrix::zeros(dim);
    for e in p.elements() {
        if !e.is_hermitian(1e-10) || !e.is_psd(1e-10) {
            return false;
        }
        sum = sum.add(e).unwrap();
    }
    sum.max_abs_diff(&Matrix::identity(dim)).unwrap() < 1e-10
}

pub fn density_is_valid(r: &DensityMatrix) -> bool {
    let m = r.matrix();
    m.is_hermitian(1e-10) && m.is_psd(1e-10) && close(m.trace().re, 1.0, 1e-10) && m.trace().im.abs() < 1e-10
}

/// Every state, basis, committed density and USD pair of every catalog family.
pub fn catalog_invariants() -> Result<(), String> {
    for f in families() {
        let name = f.name();
        for a in 0..2u8 {
            let basis = f.basis(a).map_err(|e| format!("{name} basis {a}: {e}"))?;
            check(povm_is_valid(&basis.to_povm()), || {
                format!("{name} basis {a} is not a POVM")
            })?;
            for x in 0..f.x_range() {
                let label = StateLabel::new(a, x);
                let s = f.state(label).map_err(|e| e.to_string())?;
                let norm: f64 = s.amplitudes().iter().map(|z| z.norm_sqr()).sum();
                check(close(norm, 1.0, 1e-12), || format!("{name} {label} has norm {norm}"))?;
                let p = basis.probabilities(&s).map_err(|e| e.to_string())?;
                check(close(p.iter().sum(), 1.0, 1e-12), || format!("{name} {label} Born sum"))?;
                check(close(p[x as usize], 1.0, 1e-12), || {
                    format!("{name} {label} not an eigenstate of its basis")
                })?;
            }
        }
        for commit in 0..2u8 {
            let r = f.committed_density(commit).map_err(|e| e.to_string())?;
            check(density_is_valid(&r), || {
                format!("{name} committed density {commit} invalid")
            })?;
            let m = f.mixed_density(commit).map_err(|e| e.to_string())?;
            let diff = r.matrix().max_abs_diff(m.matrix()).unwrap();
            check(diff < 1e-12, || {
                format!("{name} committed density {commit} differs from mixture by {diff}")
            })?;
        }
        // unambiguous discrimination of the two bases' x = 0 states
        let s0 = f.state(StateLabel::new(0, 0)).unwrap();
        let s1 = f.state(StateLabel::new(1, 0)).unwrap();
        if let Ok(usd) = usd_pure_pair(&s0, &s1) {
            check(povm_is_valid(&usd), || format!("{name} USD is not a POVM"))?;
            let p0 = usd.probabilities_pure(&s0).unwrap();
            let p1 = usd.probabilities_pure(&s1).unwrap();
            check(p0[1].abs() < 1e-12 && p1[0].abs() < 1e-12, || {
                format!("{name} USD makes errors")
            })?;
        }
    }
    Ok(())
}

pub fn random_state(dim: usize, randomness: &mut RandomStream) -> QuantumState {
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(randomness.uniform() - 0.5, randomness.uniform() - 0.5))
            .collect();
        if let Ok(s) = normalize(&amps) {
            return s;
        }
    }
}

/// Born-rule normalization on `n` random states against every catalog basis
/// of the same dimension and a USD POVM built from a second random state.
pub fn born_fuzz(n: usize, seed: u64) -> Result<(), String> {
    let mut r = RandomStream::new(seed);
    let fams = families();
    for i in 0..n {
        let dim = 2 + r.below(2);
        let s = random_state(dim, &mut r);
        for f in fams.iter().filter(|f| f.dim() == dim) {
            for a in 0..2u8 {
                let p = f.basis(a).unwrap().probabilities(&s).unwrap();
                check(
                    p.iter().all(|&q| q >= -1e-15) && close(p.iter().sum(), 1.0, 1e-12),
                    || format!("state {i}: Born probabilities {p:?}"),
                )?;
            }
        }
        let other = random_state(dim, &mut r);
        if let Ok(usd) = usd_pure_pair(&s, &other) {
            let p = usd.probabilities_pure(&s).unwrap();
            check(
                p.iter().all(|&q| q >= -1e-12) && close(p.iter().sum(), 1.0, 1e-10),
                || format!("state {i}: USD probabilities {p:?}"),
            )?;
        }
    }
    Ok(())
}

/// Honest configurations for every protocol and loss policy over `ETA_GRID`.
/// The original Ambainis protocol has no loss handling and runs only at
/// `eta = 1`.
pub fn honest_configs(trials: u64) -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    for protocol in ProtocolId::ALL {
        for eta in ETA_GRID {
            let base = ExperimentConfig::new(protocol).trials(trials).seed(11).eta(eta);
            match protocol {
                ProtocolId::AmbainisCf if eta < 1.0 => {}
                ProtocolId::AmbainisCfVariant => {
                    out.push(base.policy(LossPolicy::RestartOnLoss));
                    out.push(base.policy(LossPolicy::BelieveOnFaith));
                }
                _ => out.push(base),
            }
        }
    }
    out
}

/// Honest players never abort, and the coin is fair at 5 sigma.
pub fn honest_zero_abort(trials: u64) -> Result<(), String> {
    for cfg in honest_configs(trials) {
        let est = run_experiment(&cfg).map_err(|e| format!("{:?}: {e}", cfg.protocol))?;
        let label = format!("{} {} eta={}", cfg.protocol, cfg.variant.loss_policy.name(), cfg.eta);
        check(est.aborts == 0, || format!("{label}: {} aborts", est.aborts))?;
        let n = est.trials as f64;
        let sigma = (n * 0.25).sqrt();
        check((est.successes as f64 - 0.5 * n).abs() < 5.0 * sigma, || {
            format!("{label}: {} zeros of {n}", est.successes)
        })?;
    }
    Ok(())
}

/// Alice's optimal loss-tolerant cheat meets, but never beats, the bound
/// `1/2 + (1 + 2 alpha beta)/4` across the alpha^2 grid.
pub fn alice_bound_grid(trials: u64) -> Result<(), String> {
    for t in ALPHA2_GRID {
        let cfg = ExperimentConfig {
            alpha2: Alpha2::new(t).unwrap(),
            alice: Player::Cheat(StrategyName::LtOptimal),
            ..ExperimentConfig::new(ProtocolId::LossTolerantCf).trials(trials).seed(8)
        };
        let est = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let bound = 0.5 + alice_bias_bound(t).unwrap();
        let sigma = (bound * (1.0 - bound) / est.trials as f64).sqrt();
        check(est.p_hat <= bound + 3.0 * sigma, || {
            format!("alpha2={t}: {} beats {bound}", est.p_hat)
        })?;
        check(est.p_hat >= bound - 5.0 * sigma, || {
            format!("alpha2={t}: {} falls short of {bound}", est.p_hat)
        })?;
    }
    Ok(())
}

/// Success of the two-outcome POVM `{E, I - E}` guessing `r0` on `E`.
pub fn guess_success(e: &Matrix, r0: &DensityMatrix, r1: &DensityMatrix) -> f64 {
    let dim = e.dim();
    let rest = Matrix::identity(dim).sub(e).unwrap();
    0.5 * (e.trace_product(r0.matrix()).unwrap().re + rest.trace_product(r1.matrix()).unwrap().re)
}

/// Grid search over diagonal two-outcome POVMs on the committed loss-tolerant
/// densities: nothing beats `alpha^2`, and the grid reaches it. Returns the
/// number of POVMs tried.
pub fn helstrom_grid(steps: usize) -> Result<usize, String> {
    let mut tried = 0;
    for t in ALPHA2_GRID {
        let f = StateFamily::LossTolerant(Alpha2::new(t).unwrap());
        let r0 = f.committed_density(0).unwrap();
        let r1 = f.committed_density(1).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..=steps {
            for j in 0..=steps {
                let e = Matrix::diagonal(&[i as f64 / steps as f64, j as f64 / steps as f64]);
                let p = guess_success(&e, &r0, &r1);
                check(p <= t + 1e-12, || format!("alpha2={t}: POVM ({i},{j}) reaches {p}"))?;
                best = best.max(p);
                tried += 1;
            }
        }
        check(close(best, t, 1e-12), || format!("alpha2={t}: grid best {best}"))?;
    }
    Ok(tried)
}

/// Pearson chi-square statistic and degrees of freedom for homogeneity of
/// the rows of a contingency table.
pub fn chi2_homogeneity(table: &[Vec<u64>]) -> (f64, f64) {
    let rows = table.len();
    let cols = table[0].len();
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let total: f64 = row_sums.iter().sum();
    let mut stat = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let expected = row_sums[i] * col_sums[j] / total;
            if expected > 0.0 {
                stat += (table[i][j] as f64 - expected).powi(2) / expected;
            }
        }
    }
    (stat, ((rows - 1) * (cols - 1)) as f64)
}

/// Whether the rows of `table` are homogeneous at the 5 sigma level.
pub fn homogeneous_5sigma(table: &[Vec<u64>]) -> bool {
    let (stat, df) = chi2_homogeneity(table);
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(1.0 - FIVE_SIGMA_P);
    stat < critical
}
