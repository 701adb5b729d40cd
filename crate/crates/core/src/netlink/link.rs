use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{encode_thrust_frame, NetError, ThrustDecoder, ThrustFrame, THRUST_FRAME_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkConfig {
    pub drop_probability: f64,
    /// One-way delay, seconds.
    pub latency: f64,
    pub seed: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            drop_probability: 0.0,
            latency: 0.0,
            seed: 0,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(NetError::InvalidConfig("drop_probability must be in [0, 1]"));
        }
        if !(self.latency >= 0.0 && self.latency.is_finite()) {
            return Err(NetError::InvalidConfig("latency must be >= 0"));
        }
        Ok(())
    }
}

/// Simulated one-way radio from the controller to every vehicle.
///
/// Whole frames are dropped independently; survivors arrive `latency`
/// seconds after sending, in sending order.
#[derive(Debug, Clone)]
pub struct LossyLink {
    cfg: LinkConfig,
    rng: ChaCha8Rng,
    in_flight: VecDeque<(f64, [u8; THRUST_FRAME_LEN])>,
    sent: u64,
    dropped: u64,
}

impl LossyLink {
    pub fn new(cfg: LinkConfig) -> Result<Self, NetError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            in_flight: VecDeque::new(),
            sent: 0,
            dropped: 0,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.cfg
    }

    /// Sends one encoded frame at time `now`. Returns whether it survived.
    pub fn transmit(&mut self, now: f64, bytes: [u8; THRUST_FRAME_LEN]) -> bool {
        self.sent += 1;
        // One draw per frame keeps the loss pattern independent of content.
        let u: f64 = self.rng.gen();
        if u < self.cfg.drop_probability {
            self.dropped += 1;
            return false;
        }
        self.in_flight.push_back((now + self.cfg.latency, bytes));
        true
    }

    pub fn send_frames(&mut self, now: f64, frames: &[ThrustFrame]) {
        for f in frames {
            self.transmit(now, encode_thrust_frame(f));
        }
    }

    /// Bytes that have arrived by `now`, in order.
    pub fn receive(&mut self, now: f64) -> Vec<u8> {
        let mut out = Vec::new();
        while let Some(&(at, bytes)) = self.in_flight.front() {
            if at > now {
                break;
            }
            out.extend_from_slice(&bytes);
            self.in_flight.pop_front();
        }
        out
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}

/// Pushes `frames` through a fresh link in one burst and decodes what
/// arrives once the latency has elapsed.
pub fn lossy_send(frames: &[ThrustFrame], cfg: &LinkConfig) -> Result<Vec<ThrustFrame>, NetError> {
    let mut link = LossyLink::new(*cfg)?;
    link.send_frames(0.0, frames);
    let mut dec = ThrustDecoder::new();
    dec.push(&link.receive(cfg.latency));
    Ok(dec.drain_frames())
}
