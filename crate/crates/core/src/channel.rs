//! Erasure-only quantum channel and multi-photon pulses.

use crate::error::{Error, Result};
use crate::quantum::QuantumState;
use crate::rng::RandomStream;

/// Overall survival probability of a signal: channel transmittance times
/// detector efficiency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    eta: f64,
}

impl ChannelParams {
    pub fn new(eta: f64) -> Result<Self> {
        if eta > 0.0 && eta <= 1.0 {
            Ok(Self { eta })
        } else {
            Err(Error::OutOfRange(format!("eta = {eta} must lie in (0, 1]")))
        }
    }

    pub fn lossless() -> Self {
        Self { eta: 1.0 }
    }

    pub fn eta(self) -> f64 {
        self.eta
    }

    /// Whether one signal survives. Independent of what the signal carries.
    pub fn survives(self, randomness: &mut RandomStream) -> bool {
        self.eta >= 1.0 || randomness.bernoulli(self.eta)
    }
}

/// Delivers `state` untouched with probability `eta`.
pub fn transmit(state: &QuantumState, ch: ChannelParams, randomness: &mut RandomStream) -> Option<QuantumState> {
    ch.survives(randomness).then(|| state.clone())
}

/// `photon_count` identical copies of one pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct Pulse {
    photon_count: usize,
    state: Option<QuantumState>,
}

impl Pulse {
    pub fn vacuum() -> Self {
        Self {
            photon_count: 0,
            state: None,
        }
    }

    pub fn photon_count(&self) -> usize {
        self.photon_count
    }

    pub fn state(&self) -> Option<&QuantumState> {
        self.state.as_ref()
    }

    pub fn is_vacuum(&self) -> bool {
        self.photon_count == 0
    }

    /// Removes one photon and returns its state.
    pub fn take_photon(&mut self) -> Option<QuantumState> {
        if self.photon_count == 0 {
            return None;
        }
        self.photon_count -= 1;
        let s = self.state.clone();
        if self.photon_count == 0 {
            self.state = None;
        }
        s
    }
}

pub fn emit_pulse(state: &QuantumState, n: usize) -> Pulse {
    Pulse {
        photon_count: n,
        state: (n > 0).then(|| state.clone()),
    }
}

/// Each photon of the pulse is lost independently with probability `1 - eta`.
pub fn transmit_pulse(pulse: &Pulse, ch: ChannelParams, randomness: &mut RandomStream) -> Pulse {
    let survivors = (0..pulse.photon_count).filter(|_| ch.survives(randomness)).count();
    Pulse {
        photon_count: survivors,
        state: if survivors > 0 { pulse.state.clone() } else { None },
    }
}
