use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{min_of, AuxAssignment, AUX_AXES};
use crate::error::Result;
use crate::info_theory::{axes, compose_outputs, sample_dist_with, stream_rng, DmcChannel};
use crate::polytope::{
    fme_eliminate_all, project_to_frontier, rat, rationalize, region_equal, Frontier2D, IneqSystem,
    LinIneq,
};

/// Rate variables of the binning system; all but the first two are
/// eliminated.
pub const BINNING_VARS: [&str; 9] = ["R1", "R2", "R01", "R11", "R02", "R22", "T02", "T11", "T22"];

const EQUAL_TOL: f64 = 1e-9;

/// Every information term the inner bound and its binning system use.
/// Receiver-dependent terms are already minimized over the receivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerBoundTerms {
    /// min_j I(Q1 X1 Q U; Yj)
    pub y_full: f64,
    /// min_j I(X1 U; Yj | Q1 Q)
    pub y_given_q1q: f64,
    /// min_j I(X1 Q U; Yj | Q1)
    pub y_given_q1: f64,
    /// min_j I(X1 U; Yj | Q)
    pub y_given_q: f64,
    /// min_k I(Q1 Q V; Zk)
    pub z_full: f64,
    /// min_k I(Q V; Zk | Q1)
    pub z_given_q1: f64,
    /// min_k I(V; Zk | Q1 Q)
    pub z_given_q1q: f64,
    /// I(V; X1 U | Q1 Q)
    pub v_x1u: f64,
    /// I(Q; X1 | Q1)
    pub q_x1: f64,
    /// I(Q V; X1 | Q1)
    pub qv_x1: f64,
    /// I(Q U; X1 | Q1)
    pub qu_x1: f64,
    /// I(U; X1 | Q1 Q)
    pub u_x1: f64,
    /// I(V; X1 | Q1 Q)
    pub v_x1: f64,
    /// I(U; V | Q1 Q) + I(U V; X1 | Q1 Q)
    pub uv_x1: f64,
}

/// `r1·R1 + r2·R2 ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub name: String,
    pub r1: i64,
    pub r2: i64,
    pub rhs: f64,
}

impl InnerBoundTerms {
    /// The eleven rate constraints of the inner bound.
    pub fn rows(&self) -> Vec<BoundRow> {
        let t = self;
        let row = |name: &str, r1, r2, rhs| BoundRow {
            name: name.into(),
            r1,
            r2,
            rhs,
        };
        vec![
            row("r1", 1, 0, t.y_full),
            row("r2_cloud", 0, 1, t.z_given_q1 - t.qv_x1),
            row("r2_y_inner", 0, 1, t.y_given_q1q + t.z_given_q1 - t.v_x1u),
            row("r2_z_inner", 0, 1, t.y_given_q1 + t.z_given_q1q - t.v_x1u),
            row(
                "r2_both_cloud",
                0,
                1,
                t.y_given_q1 + t.z_given_q1 - t.v_x1u - t.q_x1,
            ),
            row("sum_y_inner", 1, 1, t.y_given_q1q + t.z_full - t.v_x1u),
            row("sum_z_inner", 1, 1, t.y_full + t.z_given_q1q - t.v_x1u),
            row(
                "sum_z_cloud",
                1,
                1,
                t.y_full + t.z_given_q1 - t.v_x1u - t.q_x1,
            ),
            row(
                "sum_y_cloud",
                1,
                1,
                t.y_given_q1 + t.z_full - t.v_x1u - t.q_x1,
            ),
            row(
                "double_y_cloud",
                1,
                2,
                t.y_given_q1 + t.z_full + t.z_given_q1q - t.v_x1u - t.q_x1,
            ),
            row(
                "double_z_cloud",
                1,
                2,
                t.y_full + t.z_given_q1 + t.z_given_q1q - t.v_x1u - t.q_x1,
            ),
        ]
    }

    /// True when the inner bound contains the origin, hence is nonempty.
    pub fn is_nonempty(&self) -> bool {
        self.rows().iter().all(|r| r.rhs >= 0.0)
    }
}

/// Evaluates all terms of the inner bound for the given assignment.
pub fn inner_bound_terms(aux: &AuxAssignment, chan: &DmcChannel) -> Result<InnerBoundTerms> {
    let p = aux.joint();
    let mut ys = Vec::new();
    for y in chan.primary() {
        let j = compose_outputs(p, chan, &[&y])?;
        let yv: &[&str] = &[&y];
        ys.push([
            j.mutual_information(&["Q1", "X1", "Q", "U"], yv, &[])?,
            j.mutual_information(&["X1", "U"], yv, &["Q1", "Q"])?,
            j.mutual_information(&["X1", "Q", "U"], yv, &["Q1"])?,
            j.mutual_information(&["X1", "U"], yv, &["Q"])?,
        ]);
    }
    let mut zs = Vec::new();
    for z in chan.secondary() {
        let j = compose_outputs(p, chan, &[&z])?;
        let zv: &[&str] = &[&z];
        zs.push([
            j.mutual_information(&["Q1", "Q", "V"], zv, &[])?,
            j.mutual_information(&["Q", "V"], zv, &["Q1"])?,
            j.mutual_information(&["V"], zv, &["Q1", "Q"])?,
        ]);
    }
    let ymin = |k: usize| min_of(ys.iter().map(|v| v[k]));
    let zmin = |k: usize| min_of(zs.iter().map(|v| v[k]));
    Ok(InnerBoundTerms {
        y_full: ymin(0),
        y_given_q1q: ymin(1),
        y_given_q1: ymin(2),
        y_given_q: ymin(3),
        z_full: zmin(0),
        z_given_q1: zmin(1),
        z_given_q1q: zmin(2),
        v_x1u: p.mutual_information(&["V"], &["X1", "U"], &["Q1", "Q"])?,
        q_x1: p.mutual_information(&["Q"], &["X1"], &["Q1"])?,
        qv_x1: p.mutual_information(&["Q", "V"], &["X1"], &["Q1"])?,
        qu_x1: p.mutual_information(&["Q", "U"], &["X1"], &["Q1"])?,
        u_x1: p.mutual_information(&["U"], &["X1"], &["Q1", "Q"])?,
        v_x1: p.mutual_information(&["V"], &["X1"], &["Q1", "Q"])?,
        uv_x1: p.mutual_information(&["U"], &["V"], &["Q1", "Q"])?
            + p.mutual_information(&["U", "V"], &["X1"], &["Q1", "Q"])?,
    })
}

/// Exact system over `R1, R2` from constraint rows, with nonnegative rates.
pub fn inner_bound_system(rows: &[BoundRow]) -> Result<IneqSystem> {
    let mut sys = IneqSystem::new(["R1", "R2"]);
    for r in rows {
        sys.push(LinIneq::new(
            [("R1", rat(r.r1)), ("R2", rat(r.r2))],
            rationalize(r.rhs),
        ))?;
    }
    sys.push_nonneg(&["R1", "R2"])?;
    Ok(sys)
}

/// The inner bound region for one auxiliary assignment.
pub fn inner_bound_region(aux: &AuxAssignment, chan: &DmcChannel) -> Result<Frontier2D> {
    let terms = inner_bound_terms(aux, chan)?;
    project_to_frontier(&inner_bound_system(&terms.rows())?, "R1", "R2")
}

/// Encoding and decoding constraints on split and binning rates, with the
/// rate-split identities and nonnegativity of every split/bin rate.
pub fn binning_system(t: &InnerBoundTerms) -> Result<IneqSystem> {
    let mut sys = IneqSystem::new(BINNING_VARS);
    let c = |terms: &[(&str, i64)], rhs: f64| LinIneq::int(terms, rationalize(rhs));
    // encoding
    sys.push(c(&[("R02", 1), ("T02", -1)], -t.q_x1))?;
    sys.push(c(&[("R11", 1), ("T11", -1)], -t.u_x1))?;
    sys.push(c(&[("R22", 1), ("T22", -1)], -t.v_x1))?;
    sys.push(c(
        &[("R11", 1), ("T11", -1), ("R22", 1), ("T22", -1)],
        -t.uv_x1,
    ))?;
    // decoding at Z
    sys.push(c(&[("T22", 1)], t.z_given_q1q))?;
    sys.push(c(&[("T02", 1), ("T22", 1)], t.z_given_q1))?;
    sys.push(c(&[("R01", 1), ("T02", 1), ("T22", 1)], t.z_full))?;
    // decoding at Y
    sys.push(c(&[("T11", 1)], t.y_given_q + t.qu_x1))?;
    sys.push(c(&[("T02", 1), ("T11", 1)], t.y_given_q1 + t.qu_x1))?;
    sys.push(c(&[("R01", 1), ("T02", 1), ("T11", 1)], t.y_full + t.qu_x1))?;
    // rate splits
    sys.push_eq(LinIneq::int(&[("R1", 1), ("R01", -1), ("R11", -1)], rat(0)))?;
    sys.push_eq(LinIneq::int(&[("R2", 1), ("R02", -1), ("R22", -1)], rat(0)))?;
    sys.push_nonneg(&BINNING_VARS)?;
    Ok(sys)
}

/// Projects the binning system onto `(R1, R2)` by exact elimination.
pub fn project_binning(t: &InnerBoundTerms) -> Result<Frontier2D> {
    let projected = fme_eliminate_all(&binning_system(t)?, &BINNING_VARS[2..])?;
    project_to_frontier(&projected, "R1", "R2")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmeCheck {
    pub equal: bool,
    pub nonempty: bool,
    pub max_gap: f64,
    pub projected: Vec<(f64, f64)>,
    pub direct: Vec<(f64, f64)>,
}

/// Compares the eliminated binning system with the direct inner bound.
pub fn verify_inner_bound_fme(aux: &AuxAssignment, chan: &DmcChannel) -> Result<FmeCheck> {
    let terms = inner_bound_terms(aux, chan)?;
    compare_terms(&terms)
}

fn compare_terms(terms: &InnerBoundTerms) -> Result<FmeCheck> {
    let direct = project_to_frontier(&inner_bound_system(&terms.rows())?, "R1", "R2")?;
    let projected = project_binning(terms)?;
    Ok(FmeCheck {
        equal: region_equal(&direct, &projected, EQUAL_TOL),
        nonempty: !direct.is_empty(),
        max_gap: direct.max_gap(&projected),
        projected: projected.points().to_vec(),
        direct: direct.points().to_vec(),
    })
}

/// Random binary-alphabet instance number `k` of the stream `seed`: a
/// Dirichlet auxiliary joint and a Dirichlet channel to binary `Y`, `Z`.
pub fn sample_aux_instance(seed: u64, k: u64) -> Result<(AuxAssignment, DmcChannel)> {
    let mut rng = stream_rng(seed, k);
    let ax: Vec<(&str, usize)> = AUX_AXES.iter().map(|a| (*a, 2)).collect();
    let aux = AuxAssignment::new(sample_dist_with(&axes(&ax), &mut rng)?)?;
    let chan = DmcChannel::random(2, 2, axes(&[("Y", 2), ("Z", 2)]), &mut rng)?;
    Ok((aux, chan))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmeRunReport {
    pub instances: usize,
    pub draws: u64,
    pub nonempty_instances: usize,
    pub passed: usize,
    /// Stream indices of the instances whose regions differ.
    pub failed: Vec<u64>,
    pub max_gap: f64,
}

const DRAW_CHUNK: u64 = 512;

/// Runs the elimination check on `samples` seeded instances. With
/// `nonempty_only`, draws whose inner bound is empty are skipped and do not
/// count towards `samples`.
pub fn fme_equivalence_run(samples: usize, seed: u64, nonempty_only: bool) -> Result<FmeRunReport> {
    let mut chosen: Vec<(u64, InnerBoundTerms)> = Vec::with_capacity(samples);
    let mut next = 0u64;
    while chosen.len() < samples {
        let batch = if nonempty_only {
            DRAW_CHUNK
        } else {
            (samples - chosen.len()) as u64
        };
        let terms: Vec<(u64, InnerBoundTerms)> = (next..next + batch)
            .into_par_iter()
            .map(|k| {
                let (aux, chan) = sample_aux_instance(seed, k)?;
                Ok((k, inner_bound_terms(&aux, &chan)?))
            })
            .collect::<Result<_>>()?;
        next += batch;
        chosen.extend(
            terms
                .into_iter()
                .filter(|(_, t)| !nonempty_only || t.is_nonempty()),
        );
    }
    chosen.truncate(samples);
    let draws = if nonempty_only {
        chosen.last().map_or(0, |(k, _)| k + 1)
    } else {
        samples as u64
    };
    let checks: Vec<(u64, FmeCheck)> = chosen
        .par_iter()
        .map(|(k, t)| Ok((*k, compare_terms(t)?)))
        .collect::<Result<_>>()?;
    Ok(FmeRunReport {
        instances: checks.len(),
        draws,
        nonempty_instances: checks.iter().filter(|(_, c)| c.nonempty).count(),
        passed: checks.iter().filter(|(_, c)| c.equal).count(),
        failed: checks
            .iter()
            .filter(|(_, c)| !c.equal)
            .map(|(k, _)| *k)
            .collect(),
        max_gap: checks.iter().map(|(_, c)| c.max_gap).fold(0.0, f64::max),
    })
}

/// Whether the eliminated binning system equals the region of `rows`.
pub fn projection_matches(rows: &[BoundRow], terms: &InnerBoundTerms) -> Result<bool> {
    let direct = project_to_frontier(&inner_bound_system(rows)?, "R1", "R2")?;
    Ok(region_equal(&direct, &project_binning(terms)?, EQUAL_TOL))
}
