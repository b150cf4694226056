//! Erasure simulation.
//!
//! Each trial encodes a random message, erases every symbol independently
//! with probability `p`, repairs singly-erased groups locally and hands
//! whatever is left to the global decoder.
//!
//! Randomness comes from `ChaCha20Rng::seed_from_u64(seed)` (rand_chacha
//! 0.3). Per trial, the `k` message symbols are drawn first with
//! `gen_range(0..q)`, then one `f64` per position in column order; a
//! position is erased when that draw is below `p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{ErasurePattern, MrCode};

pub const GENERATOR_NAME: &str = "chacha20 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("erasure probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub p: f64,
    pub seed: u64,
    pub generator: String,
    /// Trials with no erasures.
    pub intact: u64,
    /// Trials fully restored by local repair alone.
    pub local_only: u64,
    /// Trials that needed (and passed) the global decoder.
    pub global_decodes: u64,
    /// Trials where the message could not be recovered.
    pub failures: u64,
    /// Repair groups restored locally, over all trials.
    pub locally_repaired_groups: u64,
    pub symbols_read: u64,
    pub average_symbols_read_per_repair: f64,
}

impl SimReport {
    pub fn failure_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.trials as f64
        }
    }
}

pub fn simulate(code: &MrCode, p: f64, trials: u64, seed: u64) -> Result<SimReport, SimError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SimError::InvalidProbability(p));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let q = code.field().modulus();
    let n = code.len();
    let mut report = SimReport {
        trials,
        p,
        seed,
        generator: GENERATOR_NAME.to_string(),
        intact: 0,
        local_only: 0,
        global_decodes: 0,
        failures: 0,
        locally_repaired_groups: 0,
        symbols_read: 0,
        average_symbols_read_per_repair: 0.0,
    };

    for _ in 0..trials {
        let message: Vec<u64> = (0..code.dimension()).map(|_| rng.gen_range(0..q)).collect();
        let codeword = code.encode(&message).expect("message is in range");
        let erased: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < p).collect();
        if erased.is_empty() {
            report.intact += 1;
            continue;
        }
        let pattern = ErasurePattern::new(n, erased).expect("indices are distinct and in range");
        let mut received = pattern.apply(&codeword);

        let original = received.clone();
        for g in 0..code.group_count() {
            let missing: Vec<usize> = code.group_columns(g).filter(|&i| original[i].is_none()).collect();
            if let [position] = missing[..] {
                let mut reads = 0;
                let repaired = code.local_repair_with(g, position, |i| {
                    reads += 1;
                    original[i]
                });
                if let Ok(v) = repaired {
                    received[position] = Some(v);
                    report.locally_repaired_groups += 1;
                    report.symbols_read += reads;
                }
            }
        }

        if received.iter().all(Option::is_some) {
            let restored: Vec<u64> = received.iter().map(|s| s.expect("all known")).collect();
            if restored == codeword {
                report.local_only += 1;
            } else {
                report.failures += 1;
            }
            continue;
        }
        match code.decode(&received) {
            Ok(decoded) if decoded == message => report.global_decodes += 1,
            _ => report.failures += 1,
        }
    }
    if report.locally_repaired_groups > 0 {
        report.average_symbols_read_per_repair =
            report.symbols_read as f64 / report.locally_repaired_groups as f64;
    }
    Ok(report)
}
