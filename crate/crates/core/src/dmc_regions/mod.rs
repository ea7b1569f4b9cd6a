//! Discrete-memoryless regions: the superposition/binning inner bound, its
//! binning-rate derivation, regime checks, regime capacity regions and the
//! search for VSI channels that are not weak.

mod capacity;
mod counterexample;
mod inner;
mod regime;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info_theory::{axes, DmcChannel, JointDist};

pub use capacity::{
    capacity_region_unchecked, dmc_capacity_region, mixed_achievable_region, vsi_achievable_region,
    CapacitySearch,
};
pub use counterexample::{
    counterexample_search, degraded_copy_channel, verify_counterexample, CounterexampleSearch,
    Witness,
};
pub use inner::{
    binning_system, fme_equivalence_run, inner_bound_region, inner_bound_system, inner_bound_terms,
    project_binning, projection_matches, sample_aux_instance, verify_inner_bound_fme, BoundRow,
    FmeCheck, FmeRunReport, InnerBoundTerms, BINNING_VARS,
};
pub use regime::{
    check_regime, condition_margins, ConditionMargin, RegimeCheck, RegimeReport, RegimeWitness,
};

/// Names of the axes of an auxiliary assignment.
pub const AUX_AXES: [&str; 6] = ["Q1", "Q", "U", "V", "X1", "X2"];

/// Joint law of `(Q1, Q, U, V, X1, X2)`; outputs attach through the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JointDist", into = "JointDist")]
pub struct AuxAssignment {
    joint: JointDist,
}

impl TryFrom<JointDist> for AuxAssignment {
    type Error = Error;
    fn try_from(joint: JointDist) -> Result<Self> {
        AuxAssignment::new(joint)
    }
}

impl From<AuxAssignment> for JointDist {
    fn from(a: AuxAssignment) -> Self {
        a.joint
    }
}

impl AuxAssignment {
    pub fn new(joint: JointDist) -> Result<Self> {
        let names: Vec<&str> = joint.axes().iter().map(|(n, _)| n.as_str()).collect();
        if names.len() != AUX_AXES.len() || AUX_AXES.iter().any(|a| !names.contains(a)) {
            return Err(Error::InvalidDistribution(format!(
                "auxiliary joint needs exactly the axes {AUX_AXES:?}, got {names:?}"
            )));
        }
        Ok(AuxAssignment { joint })
    }

    /// Assignment obtained by mapping each outcome of `base` to
    /// `(q1, q, u, v, x1, x2)` with the given alphabet sizes.
    pub fn from_map<F>(base: &JointDist, sizes: [usize; 6], map: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> [usize; 6],
    {
        let ax: Vec<(&str, usize)> = AUX_AXES.iter().copied().zip(sizes).collect();
        AuxAssignment::new(JointDist::push_forward(base, axes(&ax), |c| {
            map(c).to_vec()
        })?)
    }

    pub fn joint(&self) -> &JointDist {
        &self.joint
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelClass {
    /// Several primary receivers, one secondary receiver.
    MultiPrimary,
    /// One primary receiver, several secondary receivers.
    MultiSecondary,
}

impl ChannelClass {
    /// Class implied by the receiver counts; a single `Z` is multi-primary.
    pub fn infer(chan: &DmcChannel) -> ChannelClass {
        if chan.secondary().len() == 1 {
            ChannelClass::MultiPrimary
        } else {
            ChannelClass::MultiSecondary
        }
    }

    pub fn validate(self, chan: &DmcChannel) -> Result<()> {
        let (n, m) = (chan.primary().len(), chan.secondary().len());
        match self {
            ChannelClass::MultiPrimary if m != 1 => Err(Error::InvalidChannel(format!(
                "multi-primary class needs one Z output, got {m}"
            ))),
            ChannelClass::MultiSecondary if n != 1 => Err(Error::InvalidChannel(format!(
                "multi-secondary class needs one Y output, got {n}"
            ))),
            _ => Ok(()),
        }
    }

    /// Receivers the mixed-regime partition refers to.
    pub fn partitioned(self, chan: &DmcChannel) -> Vec<String> {
        match self {
            ChannelClass::MultiPrimary => chan.primary(),
            ChannelClass::MultiSecondary => chan.secondary(),
        }
    }
}

/// Split of the multicast receivers into weak (`W`) and strong (`S`) sets,
/// as 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub weak: Vec<usize>,
    pub strong: Vec<usize>,
}

impl Partition {
    /// Parses `"W|S"` with comma-separated 1-based receiver indices, e.g.
    /// `"1,2|3"`. Either side may be empty.
    pub fn parse(s: &str) -> Result<Partition> {
        let (w, st) = s
            .split_once('|')
            .ok_or_else(|| Error::InvalidPartition(format!("expected `W|S`, got `{s}`")))?;
        let side = |t: &str| -> Result<Vec<usize>> {
            t.split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| match x.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(k - 1),
                    _ => Err(Error::InvalidPartition(format!("bad receiver index `{x}`"))),
                })
                .collect()
        };
        Ok(Partition {
            weak: side(w)?,
            strong: side(st)?,
        })
    }

    /// Checks that the two sets partition `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &k in self.weak.iter().chain(&self.strong) {
            if k >= n {
                return Err(Error::InvalidPartition(format!(
                    "receiver {} out of range 1..={n}",
                    k + 1
                )));
            }
            if seen[k] {
                return Err(Error::InvalidPartition(format!(
                    "receiver {} listed twice",
                    k + 1
                )));
            }
            seen[k] = true;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "receiver {} not assigned",
                k + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Vsi,
    Vwi,
    Mixed(Partition),
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Vsi => "VSI",
            Regime::Vwi => "VWI",
            Regime::Mixed(_) => "mixed",
        }
    }

    /// Parses `VSI`, `VWI` or `mixed` (the latter needs a partition).
    pub fn parse(name: &str, partition: Option<&str>) -> Result<Regime> {
        match name.to_ascii_lowercase().as_str() {
            "vsi" => Ok(Regime::Vsi),
            "vwi" => Ok(Regime::Vwi),
            "mixed" => {
                let p = partition.ok_or_else(|| {
                    Error::InvalidPartition("mixed regime needs a partition".into())
                })?;
                Ok(Regime::Mixed(Partition::parse(p)?))
            }
            other => Err(Error::InvalidConfig(format!("unknown regime `{other}`"))),
        }
    }

    fn needs_aux(&self) -> bool {
        !matches!(self, Regime::Vsi)
    }
}

/// Minimum over a list, `+∞` when empty.
fn min_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}
