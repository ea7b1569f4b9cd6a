use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regime::{grid_dists, sampled_dist, RegimeCheck};
use super::{check_regime, ChannelClass, Regime};
use crate::error::{Error, Result};
use crate::info_theory::{
    axes, compose_outputs, sample_dirichlet, stream_rng, DmcChannel, JointDist,
};

/// Smallest violation a witness must carry.
pub const WITNESS_MARGIN: f64 = 1e-6;
const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleSearch {
    pub x1: usize,
    pub x2: usize,
    /// Alphabet size of each of `Y1`, `Y2`, `Z`.
    pub outputs: usize,
    /// Number of channels tried.
    pub budget: usize,
    /// Dirichlet `(U, X1, X2)` laws tried per channel after the grid.
    pub aux_samples: usize,
    /// Draws of the VSI check per channel.
    pub check_samples: usize,
    pub seed: u64,
}

impl Default for CounterexampleSearch {
    fn default() -> Self {
        CounterexampleSearch {
            x1: 2,
            x2: 2,
            outputs: 3,
            budget: 100_000,
            aux_samples: 64,
            check_samples: 256,
            seed: 0,
        }
    }
}

/// A channel that passes the VSI check but violates the weak condition
/// `I(U;Yj|X1) ≤ I(U;Z|X1)` at `dist` by `margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub channel: DmcChannel,
    pub dist: JointDist,
    pub receiver: String,
    pub margin: f64,
    pub channel_index: u64,
    pub check: RegimeCheck,
}

/// `Y2` drawn at random given the inputs, `Y1` a random degradation of `Y2`
/// and `Z` an exact copy of `Y1`.
pub fn degraded_copy_channel<R: Rng + ?Sized>(
    x1: usize,
    x2: usize,
    q: usize,
    rng: &mut R,
) -> Result<DmcChannel> {
    let y2: Vec<Vec<f64>> = (0..x1 * x2).map(|_| sample_dirichlet(rng, q)).collect();
    let d: Vec<Vec<f64>> = (0..q).map(|_| sample_dirichlet(rng, q)).collect();
    let outs = axes(&[("Y1", q), ("Y2", q), ("Z", q)]);
    DmcChannel::from_fn(x1, x2, outs, |a, b| {
        let law = &y2[a * x2 + b];
        let mut v = vec![0.0; q * q * q];
        for s1 in 0..q {
            for s2 in 0..q {
                v[(s1 * q + s2) * q + s1] = law[s2] * d[s2][s1];
            }
        }
        v
    })
}

fn candidate_channel(cfg: &CounterexampleSearch, k: u64) -> Result<DmcChannel> {
    let mut rng = stream_rng(cfg.seed, k);
    let q = cfg.outputs;
    if k.is_multiple_of(2) {
        degraded_copy_channel(cfg.x1, cfg.x2, q, &mut rng)
    } else {
        DmcChannel::random(
            cfg.x1,
            cfg.x2,
            axes(&[("Y1", q), ("Y2", q), ("Z", q)]),
            &mut rng,
        )
    }
}

/// `max_j I(U;Yj|X1) - I(U;Z|X1)` and the receiver attaining it.
fn weak_violation(chan: &DmcChannel, dist: &JointDist) -> Result<(String, f64)> {
    let at = |o: &str| -> Result<f64> {
        compose_outputs(dist, chan, &[o])?.mutual_information(&["U"], &[o], &["X1"])
    };
    let z = at(&chan.secondary()[0])?;
    let mut best = (String::new(), f64::NEG_INFINITY);
    for y in chan.primary() {
        let m = at(&y)? - z;
        if m > best.1 {
            best = (y, m);
        }
    }
    Ok(best)
}

fn try_channel(cfg: &CounterexampleSearch, k: u64) -> Result<Option<Witness>> {
    let chan = candidate_channel(cfg, k)?;
    let check = RegimeCheck {
        samples: cfg.check_samples.max(1),
        aux_card: 1,
        seed: cfg.seed.wrapping_add(k),
    };
    if !check_regime(&chan, ChannelClass::MultiPrimary, &Regime::Vsi, &check)?.passed() {
        return Ok(None);
    }
    let mut cands = grid_dists(cfg.x1, cfg.x2, 4, true)?;
    let card = cfg.x1 * cfg.x2 + 1;
    for s in 0..cfg.aux_samples {
        cands.push(sampled_dist(
            cfg.x1,
            cfg.x2,
            Some(card),
            cfg.seed.wrapping_add(k << 20),
            s as u64,
        )?);
    }
    for dist in cands {
        let (receiver, margin) = weak_violation(&chan, &dist)?;
        if margin > WITNESS_MARGIN {
            return Ok(Some(Witness {
                channel: chan,
                dist,
                receiver,
                margin,
                channel_index: k,
                check,
            }));
        }
    }
    Ok(None)
}

/// Seeded search for a multi-primary channel with two primary receivers that
/// passes the VSI check yet violates the weak condition. Channel `k` uses
/// the stream `seed + k`; even indices draw degraded-copy channels, odd
/// indices unstructured ones. Returns the lowest-index witness.
pub fn counterexample_search(cfg: &CounterexampleSearch) -> Result<Option<Witness>> {
    if cfg.x1 == 0 || cfg.x2 == 0 || cfg.outputs == 0 {
        return Err(Error::InvalidConfig(
            "alphabet sizes must be positive".into(),
        ));
    }
    let mut start = 0usize;
    while start < cfg.budget {
        let end = (start + CHUNK).min(cfg.budget);
        let found: Vec<Result<Option<Witness>>> = (start..end)
            .into_par_iter()
            .map(|k| try_channel(cfg, k as u64))
            .collect();
        for r in found {
            if let Some(w) = r? {
                return Ok(Some(w));
            }
        }
        start = end;
    }
    Ok(None)
}

/// Re-runs the VSI check recorded in the witness and recomputes its margin.
pub fn verify_counterexample(w: &Witness) -> Result<bool> {
    if w.channel.primary().len() < 2 {
        return Ok(false);
    }
    let report = check_regime(
        &w.channel,
        ChannelClass::MultiPrimary,
        &Regime::Vsi,
        &w.check,
    )?;
    let z = w.channel.secondary()[0].clone();
    let j = compose_outputs(&w.dist, &w.channel, &[&w.receiver])?;
    let jz = compose_outputs(&w.dist, &w.channel, &[&z])?;
    let margin = j.mutual_information(&["U"], &[&w.receiver], &["X1"])?
        - jz.mutual_information(&["U"], &[&z], &["X1"])?;
    Ok(report.passed() && margin > WITNESS_MARGIN && (margin - w.margin).abs() <= 1e-9)
}
