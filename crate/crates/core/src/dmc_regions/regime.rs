use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{min_of, ChannelClass, Regime};
use crate::error::{Error, Result};
use crate::info_theory::{
    axes, compose_outputs, sample_dist_with, stream_rng, DmcChannel, JointDist,
};

/// A condition counts as violated when its margin is below `-MARGIN_TOL`.
pub const MARGIN_TOL: f64 = 1e-9;
/// Denominator of the deterministic simplex grid.
pub const GRID_STEP: usize = 8;
/// Grids with more points than this are skipped.
pub const MAX_GRID_POINTS: usize = 20_000;
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub samples: usize,
    pub aux_card: usize,
    pub seed: u64,
}

impl Default for RegimeCheck {
    fn default() -> Self {
        RegimeCheck {
            samples: 1000,
            aux_card: 5,
            seed: 0,
        }
    }
}

/// Slack `rhs - lhs` of one regime condition at one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMargin {
    pub condition: String,
    pub receiver: String,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeWitness {
    pub dist: JointDist,
    pub receiver: String,
    pub condition: String,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// Requested regime when no violation was found, otherwise `none`.
    pub regime: String,
    pub verdict: String,
    pub samples_checked: usize,
    pub grid_points: usize,
    pub witness: Option<RegimeWitness>,
}

impl RegimeReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Per-output terms: I(X2;o|X1), I(X1X2;o), I(U;o|X1), I(UX1;o).
#[derive(Clone, Copy)]
struct OutputTerms {
    x2_given_x1: f64,
    x1x2: f64,
    u_given_x1: f64,
    ux1: f64,
}

fn output_terms(dist: &JointDist, chan: &DmcChannel, out: &str) -> Result<OutputTerms> {
    let j = compose_outputs(dist, chan, &[out])?;
    let o: &[&str] = &[out];
    let has_u = dist.index_of("U").is_ok();
    Ok(OutputTerms {
        x2_given_x1: j.mutual_information(&["X2"], o, &["X1"])?,
        x1x2: j.mutual_information(&["X1", "X2"], o, &[])?,
        u_given_x1: if has_u {
            j.mutual_information(&["U"], o, &["X1"])?
        } else {
            0.0
        },
        ux1: if has_u {
            j.mutual_information(&["U", "X1"], o, &[])?
        } else {
            j.mutual_information(&["X1"], o, &[])?
        },
    })
}

fn validate(chan: &DmcChannel, class: ChannelClass, regime: &Regime) -> Result<()> {
    class.validate(chan)?;
    if let Regime::Mixed(p) = regime {
        p.validate(class.partitioned(chan).len())?;
    }
    Ok(())
}

/// Margins of every condition of `regime` at one input distribution over
/// `(X1, X2)` or `(U, X1, X2)`.
pub fn condition_margins(
    chan: &DmcChannel,
    class: ChannelClass,
    regime: &Regime,
    dist: &JointDist,
) -> Result<Vec<ConditionMargin>> {
    validate(chan, class, regime)?;
    let ys = chan.primary();
    let zs = chan.secondary();
    let yt: Vec<OutputTerms> = ys
        .iter()
        .map(|y| output_terms(dist, chan, y))
        .collect::<Result<_>>()?;
    let zt: Vec<OutputTerms> = zs
        .iter()
        .map(|z| output_terms(dist, chan, z))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut push = |c: &str, r: &str, m: f64| {
        out.push(ConditionMargin {
            condition: c.into(),
            receiver: r.into(),
            margin: m,
        })
    };
    let argmin =
        |set: &[usize], f: &dyn Fn(&OutputTerms) -> f64, t: &[OutputTerms]| -> Option<usize> {
            set.iter()
                .copied()
                .min_by(|&a, &b| f(&t[a]).total_cmp(&f(&t[b])))
        };
    match class {
        ChannelClass::MultiPrimary => {
            let z = &zt[0];
            let all: Vec<usize> = (0..ys.len()).collect();
            let strong = |j: usize| yt[j].x2_given_x1 - z.x2_given_x1;
            let weak = |j: usize| z.u_given_x1 - yt[j].u_given_x1;
            let very_weak = |j: usize| z.ux1 - yt[j].ux1;
            match regime {
                Regime::Vsi => {
                    for &j in &all {
                        push("strong", &ys[j], strong(j));
                    }
                    let jm = argmin(&all, &|t| t.x1x2, &yt).expect("at least one primary receiver");
                    push("very_strong", &ys[jm], z.x1x2 - yt[jm].x1x2);
                }
                Regime::Vwi => {
                    for &j in &all {
                        push("weak", &ys[j], weak(j));
                        push("very_weak", &ys[j], very_weak(j));
                    }
                }
                Regime::Mixed(p) => {
                    for &j in &p.weak {
                        push("weak", &ys[j], weak(j));
                    }
                    for &j in &p.strong {
                        push("strong", &ys[j], strong(j));
                    }
                    let s = z.x1x2 - min_of(p.strong.iter().map(|&j| yt[j].x1x2));
                    let w = z.ux1 - min_of(p.weak.iter().map(|&j| yt[j].ux1));
                    push("either", &zs[0], s.max(w));
                }
            }
        }
        ChannelClass::MultiSecondary => {
            let y = &yt[0];
            let strong = |k: usize| y.x2_given_x1 - zt[k].x2_given_x1;
            let very_strong = |k: usize| zt[k].x1x2 - y.x1x2;
            let weak = |k: usize| zt[k].u_given_x1 - y.u_given_x1;
            let very_weak = |k: usize| zt[k].ux1 - y.ux1;
            let (w, s): (Vec<usize>, Vec<usize>) = match regime {
                Regime::Vsi => (vec![], (0..zs.len()).collect()),
                Regime::Vwi => ((0..zs.len()).collect(), vec![]),
                Regime::Mixed(p) => (p.weak.clone(), p.strong.clone()),
            };
            for &k in &w {
                push("weak", &zs[k], weak(k));
                push("very_weak", &zs[k], very_weak(k));
            }
            for &k in &s {
                push("strong", &zs[k], strong(k));
                push("very_strong", &zs[k], very_strong(k));
            }
        }
    }
    Ok(out)
}

/// All compositions of `total` into `parts` nonnegative integers, in
/// lexicographic order.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of compositions of `total` into `parts`, saturating.
pub(crate) fn composition_count(total: usize, parts: usize) -> usize {
    // C(total + parts - 1, parts - 1)
    let (n, k) = (total + parts - 1, parts - 1);
    let mut c: u128 = 1;
    for i in 0..k.min(n - k) {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

/// Input laws on the grid with step `1/step` over P_{X1X2}; when `with_aux`,
/// each grid law appears with a constant `U` and with `U` an injective label
/// of `(X1, X2)`.
pub(crate) fn grid_dists(
    x1: usize,
    x2: usize,
    step: usize,
    with_aux: bool,
) -> Result<Vec<JointDist>> {
    let n = x1 * x2;
    let mut out = Vec::new();
    for c in compositions(step, n) {
        let w: Vec<f64> = c.iter().map(|&k| k as f64).collect();
        let base = JointDist::from_weights(axes(&[("X1", x1), ("X2", x2)]), w)?;
        if with_aux {
            out.push(JointDist::push_forward(
                &base,
                axes(&[("U", 1), ("X1", x1), ("X2", x2)]),
                |c| vec![0, c[0], c[1]],
            )?);
            out.push(JointDist::push_forward(
                &base,
                axes(&[("U", n), ("X1", x1), ("X2", x2)]),
                |c| vec![c[0] * x2 + c[1], c[0], c[1]],
            )?);
        } else {
            out.push(base);
        }
    }
    Ok(out)
}

/// Dirichlet input law number `k` of the stream `seed`.
pub(crate) fn sampled_dist(
    x1: usize,
    x2: usize,
    aux_card: Option<usize>,
    seed: u64,
    k: u64,
) -> Result<JointDist> {
    let mut rng = stream_rng(seed, k);
    match aux_card {
        Some(u) => sample_dist_with(&axes(&[("U", u), ("X1", x1), ("X2", x2)]), &mut rng),
        None => sample_dist_with(&axes(&[("X1", x1), ("X2", x2)]), &mut rng),
    }
}

fn first_violation(margins: Vec<ConditionMargin>) -> Option<ConditionMargin> {
    margins.into_iter().find(|m| m.margin < -MARGIN_TOL)
}

/// Falsification check of a regime: the step-1/8 grid over P_{X1X2} (when
/// small enough) followed by `samples` Dirichlet draws, sample `i` seeded
/// with `seed + i`. The first violated condition in that order is the
/// witness.
pub fn check_regime(
    chan: &DmcChannel,
    class: ChannelClass,
    regime: &Regime,
    check: &RegimeCheck,
) -> Result<RegimeReport> {
    validate(chan, class, regime)?;
    if check.samples == 0 || check.aux_card == 0 {
        return Err(Error::InvalidConfig(
            "samples and aux_card must be at least 1".into(),
        ));
    }
    let (x1, x2) = (chan.x1_size(), chan.x2_size());
    let with_aux = regime.needs_aux();
    let grid = if composition_count(GRID_STEP, x1 * x2) <= MAX_GRID_POINTS {
        grid_dists(x1, x2, GRID_STEP, with_aux)?
    } else {
        Vec::new()
    };
    let total = grid.len() + check.samples;
    let aux = with_aux.then_some(check.aux_card);
    let eval = |i: usize| -> Result<Option<RegimeWitness>> {
        let dist = if i < grid.len() {
            grid[i].clone()
        } else {
            sampled_dist(x1, x2, aux, check.seed, (i - grid.len()) as u64)?
        };
        let bad = first_violation(condition_margins(chan, class, regime, &dist)?);
        Ok(bad.map(|m| RegimeWitness {
            dist,
            receiver: m.receiver,
            condition: m.condition,
            margin: m.margin,
        }))
    };
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let results: Vec<Result<Option<RegimeWitness>>> =
            (start..end).into_par_iter().map(eval).collect();
        for (off, r) in results.into_iter().enumerate() {
            if let Some(w) = r? {
                return Ok(RegimeReport {
                    regime: "none".into(),
                    verdict: "violation found".into(),
                    samples_checked: start + off + 1,
                    grid_points: grid.len(),
                    witness: Some(w),
                });
            }
        }
        start = end;
    }
    Ok(RegimeReport {
        regime: regime.label().into(),
        verdict: "no violation found".into(),
        samples_checked: total,
        grid_points: grid.len(),
        witness: None,
    })
}
