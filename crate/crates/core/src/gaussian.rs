//! Gaussian channels with unit noise: log-det information, regime
//! classification and closed-form capacity regions.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dmc_regions::Partition;
use crate::error::{Error, Result};
use crate::polytope::{frontier_intersect, Frontier2D};

/// Diagonal loading applied to every conditional covariance before its log-det.
pub const REGULARIZATION: f64 = 1e-12;
/// Relative singular-value cutoff when pseudo-inverting a conditioning block.
const PINV_TOL: f64 = 1e-12;
/// Tolerance of the regime inequalities.
const REGIME_TOL: f64 = 1e-12;
const SYM_TOL: f64 = 1e-9;
const DEFAULT_GRID: usize = 201;

/// Symmetric positive-semidefinite covariance over named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    names: Vec<String>,
    m: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(names: Vec<String>, m: DMatrix<f64>) -> Result<Self> {
        let n = names.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::InvalidCovariance(format!(
                "{n} names for a {}x{} matrix",
                m.nrows(),
                m.ncols()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::DuplicateAxis(a.clone()));
            }
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidCovariance("non-finite entry".into()));
        }
        let scale = 1.0 + m.amax();
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > SYM_TOL * scale {
                    return Err(Error::InvalidCovariance(format!(
                        "not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if n > 0 && m.clone().symmetric_eigenvalues().min() < -SYM_TOL * scale {
            return Err(Error::InvalidCovariance("not positive semidefinite".into()));
        }
        Ok(CovMatrix { names, m })
    }

    pub fn from_rows(names: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        let n = names.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCovariance(
                "matrix must be square and match the names".into(),
            ));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        CovMatrix::new(names.iter().map(|s| s.to_string()).collect(), m)
    }

    /// Covariance of linear combinations of independent zero-mean sources
    /// with the given variances. Positive semidefinite by construction.
    pub fn from_linear(sources: &[(&str, f64)], vars: &[(&str, Vec<(&str, f64)>)]) -> Result<Self> {
        if let Some((s, v)) = sources.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidCovariance(format!(
                "source `{s}` has variance {v}"
            )));
        }
        let k = sources.len();
        let mut a = DMatrix::<f64>::zeros(vars.len(), k);
        for (i, (_, combo)) in vars.iter().enumerate() {
            for (src, c) in combo {
                let j = sources
                    .iter()
                    .position(|(s, _)| s == src)
                    .ok_or_else(|| Error::UnknownVariable(src.to_string()))?;
                a[(i, j)] += c;
            }
        }
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            k,
            sources.iter().map(|(_, v)| *v),
        ));
        let m = &a * d * a.transpose();
        let names: Vec<String> = vars.iter().map(|(n, _)| n.to_string()).collect();
        for (i, x) in names.iter().enumerate() {
            if names[..i].contains(x) {
                return Err(Error::DuplicateAxis(x.clone()));
            }
        }
        Ok(CovMatrix { names, m })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.m[(rows[i], cols[j])])
    }

    /// Covariance of `target` given `cond`. The conditioning block is
    /// pseudo-inverted, so exact linear relations inside it cost no precision.
    fn conditional(&self, target: &[usize], cond: &[usize]) -> Result<DMatrix<f64>> {
        let mut c = self.block(target, target);
        if !cond.is_empty() {
            let cross = self.block(target, cond);
            let scale = cond
                .iter()
                .map(|&k| self.m[(k, k)].abs())
                .fold(1.0, f64::max);
            let pinv = self
                .block(cond, cond)
                .pseudo_inverse(PINV_TOL * scale)
                .map_err(|e| Error::SingularCovariance(e.to_string()))?;
            c -= &cross * pinv * cross.transpose();
        }
        Ok((&c + c.transpose()) * 0.5)
    }
}

/// Natural log-determinant of `m + REGULARIZATION·I`.
fn reg_log_det(m: DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    let chol = Cholesky::new(m + DMatrix::<f64>::identity(n, n) * REGULARIZATION)
        .ok_or_else(|| Error::SingularCovariance(format!("{n}x{n} conditional block")))?;
    Ok(2.0
        * chol
            .l_dirty()
            .diagonal()
            .iter()
            .map(|d| d.ln())
            .sum::<f64>())
}

/// I(left; right | given) in bits for jointly Gaussian variables.
pub fn gaussian_mi(cov: &CovMatrix, left: &[&str], right: &[&str], given: &[&str]) -> Result<f64> {
    let idx = |v: &[&str]| -> Result<Vec<usize>> { v.iter().map(|n| cov.index(n)).collect() };
    let (l, r, g) = (idx(left)?, idx(right)?, idx(given)?);
    for (a, b) in [(&l, &r), (&l, &g), (&r, &g)] {
        if let Some(k) = a.iter().find(|k| b.contains(k)) {
            return Err(Error::OverlappingSets(cov.names[*k].clone()));
        }
    }
    if l.is_empty() || r.is_empty() {
        return Ok(0.0);
    }
    let lg: Vec<usize> = l.iter().chain(&g).copied().collect();
    let (outer, inner) = (cov.conditional(&r, &g)?, cov.conditional(&r, &lg)?);
    // Directions of `right` fixed by `given` carry no information: keep the
    // range of the outer conditional covariance only.
    let eig = outer.clone().symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > PINV_TOL * scale)
        .collect();
    if keep.is_empty() {
        return Ok(0.0);
    }
    let q = eig.eigenvectors.select_columns(&keep);
    let project = |m: &DMatrix<f64>| q.transpose() * m * &q;
    let nats = 0.5 * (reg_log_det(project(&outer))? - reg_log_det(project(&inner))?);
    let bits = nats / std::f64::consts::LN_2;
    if bits < -1e-9 {
        return Err(Error::NegativeInformation(bits));
    }
    Ok(bits.max(0.0))
}

fn check_power(p1: f64, p2: f64) -> Result<()> {
    if !(p1.is_finite() && p2.is_finite() && p1 >= 0.0 && p2 >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "powers must be finite and nonnegative, got P1={p1}, P2={p2}"
        )));
    }
    Ok(())
}

/// `Y_j = b_j X2 + X1 + N_j`, `Z = X2 + a X1 + N_z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMultiPrimary {
    pub b: Vec<f64>,
    pub a: f64,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
}

/// `Y = X1 + b X2 + N`, `Z_k = X2 + a_k X1 + N_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMultiSecondary {
    pub b: f64,
    pub a: Vec<f64>,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GaussianChannel {
    MultiPrimary(GaussianMultiPrimary),
    MultiSecondary(GaussianMultiSecondary),
}

impl GaussianChannel {
    pub fn validate(&self) -> Result<()> {
        match self {
            GaussianChannel::MultiPrimary(c) => c.validate(),
            GaussianChannel::MultiSecondary(c) => c.validate(),
        }
    }
}

impl GaussianMultiPrimary {
    pub fn new(b: Vec<f64>, a: f64, p1: f64, p2: f64) -> Result<Self> {
        let c = GaussianMultiPrimary { b, a, p1, p2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_power(self.p1, self.p2)?;
        if self.b.is_empty() || !self.a.is_finite() || self.b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(
                "need at least one finite b and a finite a".into(),
            ));
        }
        Ok(())
    }

    /// Channel to `Z` and the single primary receiver `j`.
    pub fn single(&self, j: usize) -> GaussianMultiPrimary {
        GaussianMultiPrimary {
            b: vec![self.b[j]],
            ..self.clone()
        }
    }

    fn with_b(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&j| self.b[j]).collect()
    }
}

impl GaussianMultiSecondary {
    pub fn new(b: f64, a: Vec<f64>, p1: f64, p2: f64) -> Result<Self> {
        let c = GaussianMultiSecondary { b, a, p1, p2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_power(self.p1, self.p2)?;
        if self.a.is_empty() || !self.b.is_finite() || self.a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(
                "need at least one finite a and a finite b".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussianRegime {
    #[serde(rename = "VSI")]
    Vsi,
    #[serde(rename = "WI")]
    Wi,
    #[serde(rename = "mixed")]
    Mixed,
    #[serde(rename = "none")]
    None,
}

impl GaussianRegime {
    pub fn label(self) -> &'static str {
        match self {
            GaussianRegime::Vsi => "VSI",
            GaussianRegime::Wi => "WI",
            GaussianRegime::Mixed => "mixed",
            GaussianRegime::None => "none",
        }
    }
}

/// `(1-a²)P1 + (b²-1)P2 + 2ρ(b-a)√(P1P2)`, affine in ρ.
fn vsi_slack(b: f64, a: f64, p1: f64, p2: f64, rho: f64) -> f64 {
    (1.0 - a * a) * p1 + (b * b - 1.0) * p2 + 2.0 * rho * (b - a) * (p1 * p2).sqrt()
}

/// `max_{ρ∈[-1,1]} min_j slack_j(ρ)`, exact: the maximum of a minimum of
/// affine functions sits at an endpoint or at a pairwise crossing.
pub fn vsi_worst_slack(bs: &[f64], a: f64, p1: f64, p2: f64) -> f64 {
    if bs.is_empty() {
        return f64::NEG_INFINITY;
    }
    let s = (p1 * p2).sqrt();
    let mut cands = vec![-1.0, 1.0];
    for i in 0..bs.len() {
        for j in i + 1..bs.len() {
            // slack_i - slack_j = c + ρ d
            let c = (bs[i] * bs[i] - bs[j] * bs[j]) * p2;
            let d = 2.0 * (bs[i] - bs[j]) * s;
            if d != 0.0 {
                let r = -c / d;
                if (-1.0..=1.0).contains(&r) {
                    cands.push(r);
                }
            }
        }
    }
    cands
        .into_iter()
        .map(|r| {
            bs.iter()
                .map(|&b| vsi_slack(b, a, p1, p2, r))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn regime_tol(bs: &[f64], a: f64, p1: f64, p2: f64) -> f64 {
    let bmax = bs.iter().map(|b| b * b).fold(0.0, f64::max);
    REGIME_TOL * (1.0 + p1 * (1.0 + a * a) + p2 * (1.0 + bmax))
}

impl GaussianMultiPrimary {
    /// All `|b_j| ≥ 1` and the slack condition holds for every ρ.
    pub fn is_vsi(&self) -> bool {
        self.b.iter().all(|b| b.abs() >= 1.0)
            && vsi_worst_slack(&self.b, self.a, self.p1, self.p2)
                <= regime_tol(&self.b, self.a, self.p1, self.p2)
    }

    pub fn is_wi(&self) -> bool {
        self.b.iter().all(|b| b.abs() <= 1.0)
    }

    /// Weak set has `|b_j| ≤ 1`; strong set has `|b_j| ≥ 1` and satisfies
    /// the slack condition for every ρ (vacuous when empty).
    pub fn is_mixed(&self, p: &Partition) -> Result<bool> {
        p.validate(self.b.len())?;
        let strong = self.with_b(&p.strong);
        Ok(p.weak.iter().all(|&j| self.b[j].abs() <= 1.0)
            && strong.iter().all(|b| b.abs() >= 1.0)
            && (strong.is_empty()
                || vsi_worst_slack(&strong, self.a, self.p1, self.p2)
                    <= regime_tol(&strong, self.a, self.p1, self.p2)))
    }

    /// All gains share one sign (zero is compatible with either).
    pub fn is_coherent(&self) -> bool {
        self.b.iter().all(|&b| b >= 0.0) || self.b.iter().all(|&b| b <= 0.0)
    }
}

impl GaussianMultiSecondary {
    /// `|b| > 1` and every slack, affine in ρ, is nonpositive at ρ = ±1.
    pub fn is_vsi(&self) -> bool {
        let tol = regime_tol(
            &[self.b],
            self.a.iter().fold(0.0, |m: f64, a| m.max(a.abs())),
            self.p1,
            self.p2,
        );
        self.b.abs() > 1.0
            && self.a.iter().all(|&a| {
                [-1.0, 1.0].iter().all(|&r| {
                    (1.0 - a * a) * self.p1
                        + (self.b * self.b - 1.0) * self.p2
                        + 2.0 * r * (self.b - a) * (self.p1 * self.p2).sqrt()
                        <= tol
                })
            })
    }

    pub fn is_wi(&self) -> bool {
        self.b.abs() <= 1.0
    }
}

/// Regime label: VSI first, then WI, then mixed (only when a partition is
/// supplied), otherwise none.
pub fn classify_gaussian(
    chan: &GaussianChannel,
    partition: Option<&Partition>,
) -> Result<GaussianRegime> {
    chan.validate()?;
    match chan {
        GaussianChannel::MultiPrimary(c) => {
            if c.is_vsi() {
                Ok(GaussianRegime::Vsi)
            } else if c.is_wi() {
                Ok(GaussianRegime::Wi)
            } else if let Some(p) = partition {
                Ok(if c.is_mixed(p)? {
                    GaussianRegime::Mixed
                } else {
                    GaussianRegime::None
                })
            } else {
                Ok(GaussianRegime::None)
            }
        }
        GaussianChannel::MultiSecondary(c) => {
            if partition.is_some() {
                return Err(Error::InvalidPartition(
                    "the multi-secondary Gaussian class has no mixed regime".into(),
                ));
            }
            Ok(if c.is_vsi() {
                GaussianRegime::Vsi
            } else if c.is_wi() {
                GaussianRegime::Wi
            } else {
                GaussianRegime::None
            })
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianGrids {
    pub eta: usize,
    pub rho: usize,
}

impl Default for GaussianGrids {
    fn default() -> Self {
        GaussianGrids {
            eta: DEFAULT_GRID,
            rho: DEFAULT_GRID,
        }
    }
}

impl GaussianGrids {
    pub fn uniform(n: usize) -> Self {
        GaussianGrids { eta: n, rho: n }
    }

    fn validate(&self) -> Result<()> {
        if self.eta < 2 || self.rho < 2 {
            return Err(Error::InvalidConfig("grids need at least 2 points".into()));
        }
        Ok(())
    }
}

fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

/// `½ log2⁺(x) = max(0, ½ log2 x)`.
pub fn half_log2_plus(x: f64) -> f64 {
    half_log2(x).max(0.0)
}

/// ½log2(1 + b²P2 + P1 + 2bρ√((1-η)P1P2)): rate of `(X1, X2)` at `Y_j`
/// when a share `η` of P2 is private.
pub fn sum_rate_term(b: f64, p1: f64, p2: f64, eta: f64, rho: f64) -> f64 {
    half_log2(1.0 + b * b * p2 + p1 + 2.0 * b * rho * ((1.0 - eta) * p1 * p2).sqrt())
}

/// ½log2((1 + b²P2 + P1 + 2bρ√((1-η)P1P2)) / (1 + b²ηP2)): primary rate
/// at `Y_j` under weak interference.
pub fn weak_r1_term(b: f64, p1: f64, p2: f64, eta: f64, rho: f64) -> f64 {
    sum_rate_term(b, p1, p2, eta, rho) - half_log2(1.0 + b * b * eta * p2)
}

/// ½log2(1 + ηP2).
pub fn r2_private(p2: f64, eta: f64) -> f64 {
    half_log2(1.0 + eta * p2)
}

/// Frontier of `{R1 ≤ r1, R2 ≤ r2, R1 + R2 ≤ s}` with nonnegative rates.
pub fn pentagon(r1: f64, r2: f64, s: f64) -> Frontier2D {
    let (r1, r2, s) = (r1.max(0.0), r2.max(0.0), s.max(0.0));
    let top = r1.min(s);
    let knee = (s - top).min(r2).max(0.0);
    let end = r2.min(s);
    let mut pts = vec![(0.0, top), (knee, top)];
    if end > knee {
        pts.push((end, (s - end).min(top).max(0.0)));
    }
    Frontier2D::from_vertices(pts)
}

fn union_all(parts: Vec<Frontier2D>) -> Frontier2D {
    parts
        .iter()
        .fold(Frontier2D::empty(), |acc, f| acc.union(f))
}

fn wrong(what: &str) -> Error {
    Error::WrongRegime(what.into())
}

/// Multi-primary VSI region: union over the ρ grid of
/// `R2 ≤ ½log2(1+(1-ρ²)P2)`, `R1+R2 ≤ min_j ½log2(1+b_j²P2+P1+2b_jρ√(P1P2))`.
pub fn region_mp_vsi(chan: &GaussianMultiPrimary, rho_grid: usize) -> Result<Frontier2D> {
    chan.validate()?;
    if !chan.is_vsi() {
        return Err(wrong(
            "channel is not in the very strong interference regime",
        ));
    }
    if rho_grid < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points".into()));
    }
    let parts = linspace(-1.0, 1.0, rho_grid)
        .into_iter()
        .map(|rho| {
            let r2 = half_log2(1.0 + (1.0 - rho * rho) * chan.p2);
            let s = chan
                .b
                .iter()
                .map(|&b| sum_rate_term(b, chan.p1, chan.p2, 0.0, rho))
                .fold(f64::INFINITY, f64::min);
            pentagon(f64::INFINITY, r2, s)
        })
        .collect();
    Ok(union_all(parts))
}

/// Weak-interference primary rate at one η: max over the ρ grid of the
/// minimum over receivers.
pub fn wi_r1_at(bs: &[f64], p1: f64, p2: f64, eta: f64, rho_grid: usize) -> f64 {
    linspace(-1.0, 1.0, rho_grid)
        .into_iter()
        .map(|rho| {
            bs.iter()
                .map(|&b| weak_r1_term(b, p1, p2, eta, rho))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Multi-primary weak-interference region: union over η of boxes.
pub fn region_mp_wi(chan: &GaussianMultiPrimary, grids: GaussianGrids) -> Result<Frontier2D> {
    chan.validate()?;
    grids.validate()?;
    if !chan.is_wi() {
        return Err(wrong("weak interference needs every |b_j| ≤ 1"));
    }
    let boxes: Vec<Frontier2D> = linspace(0.0, 1.0, grids.eta)
        .into_par_iter()
        .map(|eta| {
            Frontier2D::rect(
                r2_private(chan.p2, eta),
                wi_r1_at(&chan.b, chan.p1, chan.p2, eta, grids.rho),
            )
        })
        .collect();
    Ok(union_all(boxes))
}

/// Mixed-regime region for the partition: union over (η, ρ) of the
/// three-inequality regions, unioned over ρ first.
pub fn region_mp_mixed(
    chan: &GaussianMultiPrimary,
    partition: &Partition,
    grids: GaussianGrids,
) -> Result<Frontier2D> {
    chan.validate()?;
    grids.validate()?;
    if !chan.is_mixed(partition)? {
        return Err(wrong(
            "partition does not satisfy the mixed regime conditions",
        ));
    }
    let weak = chan.with_b(&partition.weak);
    let strong = chan.with_b(&partition.strong);
    let (p1, p2) = (chan.p1, chan.p2);
    let rhos = linspace(-1.0, 1.0, grids.rho);
    let per_eta: Vec<Frontier2D> = linspace(0.0, 1.0, grids.eta)
        .into_par_iter()
        .map(|eta| {
            let r2 = r2_private(p2, eta);
            let parts = rhos
                .iter()
                .map(|&rho| {
                    let r1 = weak
                        .iter()
                        .map(|&b| weak_r1_term(b, p1, p2, eta, rho))
                        .fold(f64::INFINITY, f64::min);
                    let s = strong
                        .iter()
                        .map(|&b| sum_rate_term(b, p1, p2, eta, rho))
                        .fold(f64::INFINITY, f64::min);
                    pentagon(r1, r2, s)
                })
                .collect();
            union_all(parts)
        })
        .collect();
    Ok(union_all(per_eta))
}

/// Coherent strong-interference region with `|b_*| = min_j |b_j|`: union over
/// η of `R2 ≤ ½log2(1+ηP2)`, `R1+R2 ≤ ½log2(1+b_*²P2+P1+2|b_*|√((1-η)P1P2))`.
pub fn region_coherent_si(chan: &GaussianMultiPrimary, eta_grid: usize) -> Result<Frontier2D> {
    chan.validate()?;
    let bstar = chan.b.iter().map(|b| b.abs()).fold(f64::INFINITY, f64::min);
    let parts = linspace(0.0, 1.0, eta_grid)
        .into_iter()
        .map(|eta| {
            pentagon(
                f64::INFINITY,
                r2_private(chan.p2, eta),
                sum_rate_term(bstar, chan.p1, chan.p2, eta, 1.0),
            )
        })
        .collect();
    Ok(union_all(parts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentReport {
    pub regime: GaussianRegime,
    pub equal: bool,
    pub max_gap: f64,
}

/// Tolerance of the coherent intersection comparison.
pub const COHERENT_TOL: f64 = 1e-6;

/// Multicast region against the intersection of the single-receiver regions
/// of the same regime, on shared grids.
pub fn intersection_gap(
    chan: &GaussianMultiPrimary,
    grids: GaussianGrids,
) -> Result<CoherentReport> {
    chan.validate()?;
    let (regime, multicast, singles) = if chan.is_vsi() {
        let singles = (0..chan.b.len())
            .map(|j| region_mp_vsi(&chan.single(j), grids.rho))
            .collect::<Result<Vec<_>>>()?;
        (
            GaussianRegime::Vsi,
            region_mp_vsi(chan, grids.rho)?,
            singles,
        )
    } else if chan.is_wi() {
        let singles = (0..chan.b.len())
            .map(|j| region_mp_wi(&chan.single(j), grids))
            .collect::<Result<Vec<_>>>()?;
        (GaussianRegime::Wi, region_mp_wi(chan, grids)?, singles)
    } else {
        return Err(wrong("intersection check needs the VSI or WI regime"));
    };
    let mut inter = singles[0].clone();
    for s in &singles[1..] {
        inter = frontier_intersect(&inter, s);
    }
    let max_gap = multicast.max_gap(&inter);
    Ok(CoherentReport {
        regime,
        equal: max_gap <= COHERENT_TOL,
        max_gap,
    })
}

/// Coherent-case check that the multicast region equals the intersection of
/// the single-receiver regions.
pub fn coherent_intersection_check(
    chan: &GaussianMultiPrimary,
    grids: GaussianGrids,
) -> Result<CoherentReport> {
    if !chan.is_coherent() {
        return Err(Error::InvalidConfig(
            "gains b_j do not share one sign".into(),
        ));
    }
    intersection_gap(chan, grids)
}

/// Multi-secondary VSI region: union over η of
/// `R2 ≤ ½log2(1+ηP2)`, `R1+R2 ≤ ½log2(1+b²P2+P1+2|b|√((1-η)P1P2))`.
pub fn region_ms_vsi(chan: &GaussianMultiSecondary, eta_grid: usize) -> Result<Frontier2D> {
    chan.validate()?;
    if !chan.is_vsi() {
        return Err(wrong(
            "channel is not in the very strong interference regime",
        ));
    }
    if eta_grid < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points".into()));
    }
    let parts = linspace(0.0, 1.0, eta_grid)
        .into_iter()
        .map(|eta| {
            pentagon(
                f64::INFINITY,
                r2_private(chan.p2, eta),
                sum_rate_term(chan.b.abs(), chan.p1, chan.p2, eta, 1.0),
            )
        })
        .collect();
    Ok(union_all(parts))
}

/// Rates of the weak-interference scheme computed from covariances:
/// `X2 = Xv + Xu` with `Xu` of power `(1-η)P2` correlated `ρ` with `X1`,
/// `Xv` of power `ηP2` independent, and `V = Xv + β(Xu + aX1)` with
/// `β = ηP2/(ηP2+1)`. Returns `I(Xu X1; Y_j)` per receiver and
/// `I(V; Z) - I(V; Xu X1)`.
pub fn wi_rates_via_covariance(
    chan: &GaussianMultiPrimary,
    eta: f64,
    rho: f64,
) -> Result<(Vec<f64>, f64)> {
    chan.validate()?;
    let (p1, p2) = (chan.p1, chan.p2);
    let (pu, pv) = ((1.0 - eta) * p2, eta * p2);
    let beta = pv / (pv + 1.0);
    let cu = ((1.0 - rho * rho) * pu).max(0.0).sqrt();
    let x1 = vec![("S1", p1.sqrt())];
    let xu = vec![("S1", rho * pu.sqrt()), ("S2", cu)];
    let mut sources = vec![("S1", 1.0), ("S2", 1.0), ("SV", pv), ("NZ", 1.0)];
    let noise: Vec<String> = (0..chan.b.len()).map(|j| format!("N{j}")).collect();
    sources.extend(noise.iter().map(|n| (n.as_str(), 1.0)));
    let lin = |parts: &[(&Vec<(&'static str, f64)>, f64)], extra: Vec<(&'static str, f64)>| {
        let mut v: Vec<(&str, f64)> = extra;
        for (p, c) in parts {
            v.extend(p.iter().map(|(s, w)| (*s, w * c)));
        }
        v
    };
    let names: Vec<String> = (0..chan.b.len()).map(|j| format!("Y{j}")).collect();
    let mut vars: Vec<(&str, Vec<(&str, f64)>)> = vec![
        ("X1", x1.clone()),
        ("XU", xu.clone()),
        (
            "V",
            lin(&[(&xu, beta), (&x1, beta * chan.a)], vec![("SV", 1.0)]),
        ),
        (
            "Z",
            lin(&[(&xu, 1.0), (&x1, chan.a)], vec![("SV", 1.0), ("NZ", 1.0)]),
        ),
    ];
    for (j, &b) in chan.b.iter().enumerate() {
        let mut y = lin(&[(&xu, b), (&x1, 1.0)], vec![("SV", b)]);
        y.push((noise[j].as_str(), 1.0));
        vars.push((names[j].as_str(), y));
    }
    let cov = CovMatrix::from_linear(&sources, &vars)?;
    let r1 = names
        .iter()
        .map(|y| gaussian_mi(&cov, &["XU", "X1"], &[y], &[]))
        .collect::<Result<Vec<_>>>()?;
    let r2 =
        gaussian_mi(&cov, &["V"], &["Z"], &[])? - gaussian_mi(&cov, &["V"], &["XU", "X1"], &[])?;
    Ok((r1, r2))
}
