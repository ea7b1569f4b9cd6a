//! Dirty-paper coding bounds for the multi-secondary Gaussian channel with
//! two secondary receivers under weak interference.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{gaussian_mi, half_log2_plus, linspace, CovMatrix};
use crate::io::{fmt_sig, write_json};
use crate::polytope::Frontier2D;

/// Which term closes the log of the multiple-description rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdTerm {
    /// `√(x+1)`, as displayed in the closed form.
    #[default]
    Sqrt,
    /// `x+1`, for sensitivity runs.
    Linear,
}

/// `Y = X1 + bX2 + N`, `Z_k = X2 + a_k X1 + N_k`, with `X2 = Xv + Xu`,
/// `P_v = ηP2`, `P_u = (1-η)P2` and `ρ` the `X1`-`Xu` correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcConfig {
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub eta: f64,
    #[serde(default)]
    pub rho: f64,
    /// Power of the private descriptions, in `[0, P_v]`.
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub md_term: MdTerm,
}

impl DpcConfig {
    /// Comparison parameters `P1 = 3P2`, `a1 = .75`, `a2 = -.5`, `b = .1`.
    pub fn comparison(p2: f64) -> DpcConfig {
        DpcConfig {
            p1: 3.0 * p2,
            p2,
            a1: 0.75,
            a2: -0.5,
            b: 0.1,
            eta: 0.5,
            rho: 0.0,
            x: 0.0,
            md_term: MdTerm::Sqrt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.p1, self.p2, self.a1, self.a2, self.b, self.eta, self.rho, self.x,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.p1 < 0.0 || self.p2 < 0.0 {
            return Err(Error::InvalidConfig(
                "parameters must be finite with nonnegative powers".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidConfig(format!(
                "eta = {} outside [0, 1]",
                self.eta
            )));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!(
                "rho = {} outside [-1, 1]",
                self.rho
            )));
        }
        if self.x < 0.0 || self.x > self.pv() {
            return Err(Error::InvalidConfig(format!(
                "x = {} outside [0, P_v = {}]",
                self.x,
                self.pv()
            )));
        }
        Ok(())
    }

    pub fn pv(&self) -> f64 {
        self.eta * self.p2
    }

    pub fn pu(&self) -> f64 {
        (1.0 - self.eta) * self.p2
    }

    pub fn with_eta(&self, eta: f64) -> DpcConfig {
        DpcConfig {
            eta,
            x: self.x.min(eta * self.p2),
            ..*self
        }
    }

    pub fn with_x(&self, x: f64) -> DpcConfig {
        DpcConfig { x, ..*self }
    }

    /// `Var(Z_k) = P2 + a_k²P1 + 2a_kρ√(P1P_u) + 1`.
    pub fn z_variance(&self, a: f64) -> f64 {
        self.p2 + a * a * self.p1 + 2.0 * a * self.rho * (self.p1 * self.pu()).sqrt() + 1.0
    }
}

/// `I(U X1; Y) = ½log2((b²P2+P1+2bρ√(P1(1-η)P2)+1)/(b²ηP2+1))`, at least 0.
pub fn r1_weak(cfg: &DpcConfig) -> Result<f64> {
    cfg.validate()?;
    let b = cfg.b;
    let num = b * b * cfg.p2 + cfg.p1 + 2.0 * b * cfg.rho * (cfg.p1 * cfg.pu()).sqrt() + 1.0;
    Ok(half_log2_plus(num / (b * b * cfg.pv() + 1.0)))
}

/// Mismatch coefficient `P1(P_v+(1-ρ²)P_u+1)(a1-a2)² / ((P_v+1)(√v1+√v2)²)`.
pub fn mismatch_coefficient(cfg: &DpcConfig) -> Result<f64> {
    cfg.validate()?;
    let (v1, v2) = (cfg.z_variance(cfg.a1), cfg.z_variance(cfg.a2));
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "nonpositive output variance ({v1}, {v2})"
        )));
    }
    let pv = cfg.pv();
    let d = cfg.a1 - cfg.a2;
    let s = v1.sqrt() + v2.sqrt();
    Ok(cfg.p1 * (pv + (1.0 - cfg.rho * cfg.rho) * cfg.pu() + 1.0) * d * d / ((pv + 1.0) * s * s))
}

/// Common-description rate `½log2(P_v+1) - ½log2(c·P_v + 1)`, at least 0.
pub fn cd_dpc_rate(cfg: &DpcConfig) -> Result<f64> {
    let c = mismatch_coefficient(cfg)?;
    let pv = cfg.pv();
    Ok((0.5 * (pv + 1.0).log2() - 0.5 * (c * pv + 1.0).log2()).max(0.0))
}

/// Multiple-description rate `½log2(P_v+1) - ½log2(c·P(x) + √(x+1))` with
/// `P(x) = (P_v-x)/√(x+1)`, at least 0. At `x = 0` the arithmetic is the
/// common-description expression operation for operation.
pub fn md_dpc_rate(cfg: &DpcConfig) -> Result<f64> {
    let c = mismatch_coefficient(cfg)?;
    let (pv, x) = (cfg.pv(), cfg.x);
    let root = (x + 1.0).sqrt();
    let tail = match cfg.md_term {
        MdTerm::Sqrt => root,
        MdTerm::Linear => x + 1.0,
    };
    Ok((0.5 * (pv + 1.0).log2() - 0.5 * (c * ((pv - x) / root) + tail).log2()).max(0.0))
}

const GOLDEN_ITERS: usize = 100;

/// Best private power: `scan` evenly spaced points on `[0, P_v]` (including
/// 0), then golden-section search on the bracket around the best one.
/// Returns `(x*, rate)`.
pub fn best_md_x(cfg: &DpcConfig, scan: usize) -> Result<(f64, f64)> {
    cfg.validate()?;
    let pv = cfg.pv();
    let f = |x: f64| md_dpc_rate(&cfg.with_x(x.clamp(0.0, pv)));
    let xs = linspace(0.0, pv, scan.max(2));
    let vals = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let (mut bi, mut best) = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate() {
        if v > best {
            (bi, best) = (i, v);
        }
    }
    let mut best_x = xs[bi];
    let (mut lo, mut hi) = (xs[bi.saturating_sub(1)], xs[(bi + 1).min(xs.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            hi = d;
            (d, fd) = (c, fc);
            c = hi - g * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            (c, fc) = (d, fd);
            d = lo + g * (hi - lo);
            fd = f(d)?;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best {
            (best_x, best) = (x, v);
        }
    }
    Ok((best_x, best))
}

/// Outer-bound rates at one η: `R1 ≤ ½log2((b²P2+P1+2|b|√((1-η)P1P2)+1)/(b²ηP2+1))`,
/// `R2 ≤ ½log2(ηP2+1)`.
pub fn outer_point(cfg: &DpcConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let b = cfg.b.abs();
    let num = b * b * cfg.p2 + cfg.p1 + 2.0 * b * (cfg.p1 * cfg.pu()).sqrt() + 1.0;
    Ok((
        half_log2_plus(num / (b * b * cfg.pv() + 1.0)),
        half_log2_plus(cfg.pv() + 1.0),
    ))
}

/// Weak-interference outer bound: union over the η grid of the boxes of
/// [`outer_point`].
pub fn weak_outer_bound(cfg: &DpcConfig, eta_grid: usize) -> Result<Frontier2D> {
    cfg.validate()?;
    if cfg.b.abs() > 1.0 {
        return Err(Error::WrongRegime(format!(
            "outer bound needs |b| ≤ 1, got b = {}",
            cfg.b
        )));
    }
    if eta_grid < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points".into()));
    }
    let mut out = Frontier2D::empty();
    for eta in linspace(0.0, 1.0, eta_grid) {
        let (r1, r2) = outer_point(&cfg.with_eta(eta))?;
        out = out.union(&Frontier2D::rect(r2, r1));
    }
    Ok(out)
}

/// Covariance of `(V, Z1, Z2, X1, Xu)` with `V = Xv + γXu + αX1`.
pub fn dpc_covariance(cfg: &DpcConfig, gamma: f64, alpha: f64) -> Result<CovMatrix> {
    let (p1, pu) = (cfg.p1, cfg.pu());
    let x1 = [("S1", p1.sqrt())];
    let xu = [
        ("S1", cfg.rho * pu.sqrt()),
        ("S2", ((1.0 - cfg.rho * cfg.rho) * pu).max(0.0).sqrt()),
    ];
    let combo = |cx1: f64, cxu: f64, extra: &[(&'static str, f64)]| -> Vec<(&'static str, f64)> {
        let mut v: Vec<(&str, f64)> = extra.to_vec();
        v.extend(x1.iter().map(|(s, w)| (*s, w * cx1)));
        v.extend(xu.iter().map(|(s, w)| (*s, w * cxu)));
        v
    };
    CovMatrix::from_linear(
        &[
            ("S1", 1.0),
            ("S2", 1.0),
            ("XV", cfg.pv()),
            ("N1", 1.0),
            ("N2", 1.0),
        ],
        &[
            ("V", combo(alpha, gamma, &[("XV", 1.0)])),
            ("Z1", combo(cfg.a1, 1.0, &[("XV", 1.0), ("N1", 1.0)])),
            ("Z2", combo(cfg.a2, 1.0, &[("XV", 1.0), ("N2", 1.0)])),
            ("X1", combo(1.0, 0.0, &[])),
            ("XU", combo(0.0, 1.0, &[])),
        ],
    )
}

/// `I(V; Z_k) - I(V; Xu X1)` for `k = 1, 2`.
pub fn dpc_user_rates(cfg: &DpcConfig, gamma: f64, alpha: f64) -> Result<[f64; 2]> {
    let cov = dpc_covariance(cfg, gamma, alpha)?;
    let cost = gaussian_mi(&cov, &["V"], &["XU", "X1"], &[])?;
    Ok([
        gaussian_mi(&cov, &["V"], &["Z1"], &[])? - cost,
        gaussian_mi(&cov, &["V"], &["Z2"], &[])? - cost,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub rate: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Grid spacing along γ and α.
    pub gamma_step: f64,
    pub alpha_step: f64,
}

/// Brute-force common-description rate: max over a `grid × grid` lattice of
/// `γ ∈ [0,1]`, `α ∈ [-A, A]` (`A = max|a_k|`, or 1 when both vanish) of
/// `min_k I(V;Z_k) - I(V;Xu X1)`. Ties keep the first lattice point.
pub fn numeric_dpc_oracle(cfg: &DpcConfig, grid: usize) -> Result<OracleResult> {
    cfg.validate()?;
    if grid < 101 {
        return Err(Error::InvalidConfig(format!(
            "oracle grid needs at least 101 points, got {grid}"
        )));
    }
    let amax = cfg.a1.abs().max(cfg.a2.abs());
    let amax = if amax > 0.0 { amax } else { 1.0 };
    let gammas = linspace(0.0, 1.0, grid);
    let alphas = linspace(-amax, amax, grid);
    let rows: Vec<(f64, f64, f64)> = gammas
        .par_iter()
        .map(|&g| {
            let mut best = (f64::NEG_INFINITY, g, 0.0);
            for &a in &alphas {
                let [r1, r2] = dpc_user_rates(cfg, g, a)?;
                let r = r1.min(r2);
                if r > best.0 {
                    best = (r, g, a);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let mut best = rows[0];
    for r in &rows[1..] {
        if r.0 > best.0 {
            best = *r;
        }
    }
    Ok(OracleResult {
        rate: best.0.max(0.0),
        gamma: best.1,
        alpha: best.2,
        gamma_step: 1.0 / (grid - 1) as f64,
        alpha_step: 2.0 * amax / (grid - 1) as f64,
    })
}

/// Points of the time-sharing grid used by [`block_expansion_baseline`].
pub const BLOCK_T_GRID: usize = 1001;

/// Time sharing of two common-description slots, slot `k` tuned to user `k`
/// (`γ = P_v/(P_v+1)`, `α = a_k P_v/(P_v+1)`); the other user decodes the
/// slot with the residual as noise. Max over `t` of the worse user's
/// average rate.
pub fn block_expansion_baseline(cfg: &DpcConfig) -> Result<f64> {
    cfg.validate()?;
    let pv = cfg.pv();
    let gamma = pv / (pv + 1.0);
    let slot = |a: f64| -> Result<[f64; 2]> {
        let [r1, r2] = dpc_user_rates(cfg, gamma, a * gamma)?;
        Ok([r1.max(0.0), r2.max(0.0)])
    };
    let (s1, s2) = (slot(cfg.a1)?, slot(cfg.a2)?);
    Ok(linspace(0.0, 1.0, BLOCK_T_GRID)
        .into_iter()
        .map(|t| {
            (0..2)
                .map(|k| t * s1[k] + (1.0 - t) * s2[k])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// One row of the comparison sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eta: f64,
    pub r1: f64,
    pub r2_cd: f64,
    pub r2_md: f64,
    pub x_star: f64,
    pub r2_block: f64,
    pub r2_outer: f64,
}

/// Kinds of bound reported by the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Cd,
    Md,
    Outer,
    BlockExpansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcBoundPoint {
    pub r1: f64,
    pub r2: f64,
    pub kind: BoundKind,
}

/// The four bound points of a sweep row; the outer point uses `|b|`.
pub fn bound_points(base: &DpcConfig, row: &SweepRow) -> Result<[DpcBoundPoint; 4]> {
    let outer_r1 = outer_point(&base.with_eta(row.eta))?.0;
    let p = |r1, r2, kind| DpcBoundPoint { r1, r2, kind };
    Ok([
        p(row.r1, row.r2_cd, BoundKind::Cd),
        p(row.r1, row.r2_md, BoundKind::Md),
        p(row.r1, row.r2_block, BoundKind::BlockExpansion),
        p(outer_r1, row.r2_outer, BoundKind::Outer),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// `cd ≤ md ≤ outer` and `block ≤ outer` at every row, within 1e-9.
    pub ordered: bool,
    pub max_md_gain: f64,
}

/// Per-η comparison of the common- and multiple-description rates, the
/// block-expansion baseline and the outer bound. Rows are computed in
/// parallel and kept in η order.
pub fn comparison_sweep(base: &DpcConfig, eta_grid: usize, x_scan: usize) -> Result<SweepReport> {
    base.validate()?;
    if eta_grid < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points".into()));
    }
    let rows: Vec<SweepRow> = linspace(0.0, 1.0, eta_grid)
        .into_par_iter()
        .map(|eta| {
            let cfg = base.with_eta(eta).with_x(0.0);
            let (x_star, r2_md) = best_md_x(&cfg, x_scan)?;
            Ok(SweepRow {
                eta,
                r1: r1_weak(&cfg)?,
                r2_cd: cd_dpc_rate(&cfg)?,
                r2_md,
                x_star,
                r2_block: block_expansion_baseline(&cfg)?,
                r2_outer: outer_point(&cfg)?.1,
            })
        })
        .collect::<Result<_>>()?;
    let ordered = rows.iter().all(|r| {
        r.r2_cd <= r.r2_md + 1e-9 && r.r2_md <= r.r2_outer + 1e-9 && r.r2_block <= r.r2_outer + 1e-9
    });
    let max_md_gain = rows.iter().map(|r| r.r2_md - r.r2_cd).fold(0.0, f64::max);
    Ok(SweepReport {
        rows,
        ordered,
        max_md_gain,
    })
}

pub const SWEEP_HEADER: &str = "eta,R1,R2_cd,R2_md,x_star,R2_block,R2_outer";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        let cells = [
            r.eta, r.r1, r.r2_cd, r.r2_md, r.x_star, r.r2_block, r.r2_outer,
        ];
        s.push_str(
            &cells
                .iter()
                .map(|v| fmt_sig(*v, 12))
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('\n');
    }
    s
}

/// Writes the sweep CSV and `<path>.cfg.json` with the base configuration.
pub fn write_sweep(path: &Path, base: &DpcConfig, report: &SweepReport) -> Result<()> {
    std::fs::write(path, sweep_csv(&report.rows))?;
    let mut side = path.as_os_str().to_owned();
    side.push(".cfg.json");
    write_json(Path::new(&side), base)
}
