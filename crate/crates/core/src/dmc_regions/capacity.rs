use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::regime::{composition_count, grid_dists, sampled_dist, RegimeCheck};
use super::{check_regime, min_of, ChannelClass, Partition, Regime};
use crate::error::{Error, Result};
use crate::info_theory::{compose_outputs, DmcChannel, JointDist};
use crate::polytope::{frontier_from_halfplanes, Frontier2D, Halfplane};

/// Largest deterministic grid the region search accepts.
pub const MAX_SEARCH_GRID: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacitySearch {
    /// Cardinality of sampled `U`; `None` means `|X1|·|X2| + 1`.
    pub aux_card: Option<usize>,
    /// Denominator of the deterministic grid over P_{X1X2}.
    pub grid: usize,
    /// Dirichlet draws on top of the grid.
    pub samples: usize,
    /// Draws used by the preceding regime check.
    pub check_samples: usize,
    pub seed: u64,
}

impl Default for CapacitySearch {
    fn default() -> Self {
        CapacitySearch {
            aux_card: None,
            grid: 16,
            samples: 2000,
            check_samples: 1000,
            seed: 0,
        }
    }
}

impl CapacitySearch {
    pub fn aux_card_for(&self, chan: &DmcChannel) -> usize {
        self.aux_card.unwrap_or(chan.x1_size() * chan.x2_size() + 1)
    }
}

struct Terms {
    /// I(X2; o | X1)
    x2_given_x1: f64,
    /// I(X1 X2; o)
    x1x2: f64,
    /// I(U X1; o)
    ux1: f64,
    /// I(X2; o | U X1)
    x2_given_ux1: f64,
}

fn terms(dist: &JointDist, chan: &DmcChannel, out: &str) -> Result<Terms> {
    let j = compose_outputs(dist, chan, &[out])?;
    let o: &[&str] = &[out];
    let has_u = dist.index_of("U").is_ok();
    let (ux1, x2_given_ux1) = if has_u {
        (
            j.mutual_information(&["U", "X1"], o, &[])?,
            j.mutual_information(&["X2"], o, &["U", "X1"])?,
        )
    } else {
        (
            j.mutual_information(&["X1"], o, &[])?,
            j.mutual_information(&["X2"], o, &["X1"])?,
        )
    };
    Ok(Terms {
        x2_given_x1: j.mutual_information(&["X2"], o, &["X1"])?,
        x1x2: j.mutual_information(&["X1", "X2"], o, &[])?,
        ux1,
        x2_given_ux1,
    })
}

fn all_terms(dist: &JointDist, chan: &DmcChannel, names: &[String]) -> Result<Vec<Terms>> {
    names.iter().map(|n| terms(dist, chan, n)).collect()
}

fn pick<'a>(t: &'a [Terms], set: &'a [usize]) -> impl Iterator<Item = &'a Terms> + 'a {
    set.iter().map(move |&k| &t[k])
}

/// Half-planes of the capacity formula of `regime` at one input law.
fn regime_halfplanes(
    chan: &DmcChannel,
    class: ChannelClass,
    regime: &Regime,
    dist: &JointDist,
) -> Result<Vec<Halfplane>> {
    let ys = all_terms(dist, chan, &chan.primary())?;
    let zs = all_terms(dist, chan, &chan.secondary())?;
    let r1 = |b| Halfplane::new(1.0, 0.0, b);
    let r2 = |b| Halfplane::new(0.0, 1.0, b);
    let sum = |b| Halfplane::new(1.0, 1.0, b);
    Ok(match (class, regime) {
        (ChannelClass::MultiPrimary, Regime::Vsi) => {
            vec![
                r2(zs[0].x2_given_x1),
                sum(min_of(ys.iter().map(|t| t.x1x2))),
            ]
        }
        (ChannelClass::MultiPrimary, Regime::Vwi) => {
            vec![r1(min_of(ys.iter().map(|t| t.ux1))), r2(zs[0].x2_given_ux1)]
        }
        (ChannelClass::MultiPrimary, Regime::Mixed(p)) => vec![
            r1(min_of(pick(&ys, &p.weak).map(|t| t.ux1))),
            r2(zs[0].x2_given_ux1),
            sum(min_of(pick(&ys, &p.strong).map(|t| t.x1x2))),
        ],
        (ChannelClass::MultiSecondary, Regime::Vsi) => {
            vec![
                r2(min_of(zs.iter().map(|t| t.x2_given_x1))),
                sum(ys[0].x1x2),
            ]
        }
        (ChannelClass::MultiSecondary, Regime::Mixed(p)) => {
            vec![
                r2(min_of(pick(&zs, &p.strong).map(|t| t.x2_given_x1))),
                sum(ys[0].x1x2),
            ]
        }
        (ChannelClass::MultiSecondary, Regime::Vwi) => {
            vec![r1(ys[0].ux1), r2(min_of(zs.iter().map(|t| t.x2_given_ux1)))]
        }
    })
}

fn uses_aux(class: ChannelClass, regime: &Regime) -> bool {
    matches!(
        (class, regime),
        (_, Regime::Vwi) | (ChannelClass::MultiPrimary, Regime::Mixed(_))
    )
}

/// Union over searched input laws of the capacity formula of `regime`,
/// convexified by time sharing. Does not check the regime.
pub fn capacity_region_unchecked(
    chan: &DmcChannel,
    class: ChannelClass,
    regime: &Regime,
    search: &CapacitySearch,
) -> Result<Frontier2D> {
    class.validate(chan)?;
    if let Regime::Mixed(p) = regime {
        p.validate(class.partitioned(chan).len())?;
    }
    let (x1, x2) = (chan.x1_size(), chan.x2_size());
    let aux = uses_aux(class, regime);
    if search.grid == 0 {
        return Err(Error::InvalidConfig("grid must be at least 1".into()));
    }
    let count = composition_count(search.grid, x1 * x2);
    if count > MAX_SEARCH_GRID {
        return Err(Error::InvalidConfig(format!(
            "grid has {count} points, limit is {MAX_SEARCH_GRID}"
        )));
    }
    let grid = grid_dists(x1, x2, search.grid, aux)?;
    let card = aux.then(|| search.aux_card_for(chan));
    let total = grid.len() + search.samples;
    let pts: Vec<Vec<(f64, f64)>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let dist = if i < grid.len() {
                grid[i].clone()
            } else {
                sampled_dist(x1, x2, card, search.seed, (i - grid.len()) as u64)?
            };
            let f = frontier_from_halfplanes(&regime_halfplanes(chan, class, regime, &dist)?)?;
            Ok(f.points().to_vec())
        })
        .collect::<Result<_>>()?;
    Ok(Frontier2D::hull_of(pts.into_iter().flatten().collect()))
}

/// Capacity region of a channel in `regime`, after a passing regime check.
pub fn dmc_capacity_region(
    chan: &DmcChannel,
    class: ChannelClass,
    regime: &Regime,
    search: &CapacitySearch,
) -> Result<Frontier2D> {
    let check = RegimeCheck {
        samples: search.check_samples.max(1),
        aux_card: search.aux_card_for(chan),
        seed: search.seed,
    };
    let report = check_regime(chan, class, regime, &check)?;
    if let Some(w) = report.witness {
        return Err(Error::WrongRegime(format!(
            "{} condition violated at {} by {:.3e}",
            w.condition, w.receiver, -w.margin
        )));
    }
    capacity_region_unchecked(chan, class, regime, search)
}

/// Region obtained when every receiver decodes both inputs, for a law over
/// `(X1, X2)`. With `drop_implied`, only `R2 ≤ I(X2;Z|X1)` and the primary
/// sum-rate bound are kept; otherwise the individual primary bound, the
/// primary bound on `R2` and the secondary sum-rate bound are included.
pub fn vsi_achievable_region(
    chan: &DmcChannel,
    dist: &JointDist,
    drop_implied: bool,
) -> Result<Frontier2D> {
    ChannelClass::MultiPrimary.validate(chan)?;
    let ys = all_terms(dist, chan, &chan.primary())?;
    let z = terms(dist, chan, &chan.secondary()[0])?;
    let y_sum = min_of(ys.iter().map(|t| t.x1x2));
    let mut hs = vec![
        Halfplane::new(0.0, 1.0, z.x2_given_x1),
        Halfplane::new(1.0, 1.0, y_sum),
    ];
    if !drop_implied {
        hs.push(Halfplane::new(1.0, 0.0, y_sum));
        hs.push(Halfplane::new(
            0.0,
            1.0,
            min_of(ys.iter().map(|t| t.x2_given_x1)),
        ));
        hs.push(Halfplane::new(1.0, 1.0, z.x1x2));
    }
    frontier_from_halfplanes(&hs)
}

/// Region of interference decoding for a law over `(U, X1, X2)`: weak
/// receivers decode `(U, X1)`, strong receivers and `Z` decode everything.
/// `with_z_sum` keeps the sum-rate bound at `Z`.
pub fn mixed_achievable_region(
    chan: &DmcChannel,
    dist: &JointDist,
    partition: &Partition,
    with_z_sum: bool,
) -> Result<Frontier2D> {
    ChannelClass::MultiPrimary.validate(chan)?;
    partition.validate(chan.primary().len())?;
    let ys = all_terms(dist, chan, &chan.primary())?;
    let z = terms(dist, chan, &chan.secondary()[0])?;
    let mut hs = vec![
        Halfplane::new(1.0, 0.0, min_of(pick(&ys, &partition.weak).map(|t| t.ux1))),
        Halfplane::new(0.0, 1.0, z.x2_given_ux1),
        Halfplane::new(
            1.0,
            1.0,
            min_of(pick(&ys, &partition.strong).map(|t| t.x1x2)),
        ),
    ];
    if with_z_sum {
        hs.push(Halfplane::new(1.0, 1.0, z.x1x2));
    }
    frontier_from_halfplanes(&hs)
}
