//! Acceptance report: one PASS/FAIL line per criterion. Exits 0 unless
//! `CIFC_ACCEPTANCE_STRICT=1` is set, in which case any FAIL exits 1.

use std::path::Path;
use std::time::Instant;

use cifc_core::dmc_regions::{
    check_regime, fme_equivalence_run, verify_counterexample, vsi_achievable_region, ChannelClass,
    Partition, Regime, RegimeCheck, Witness,
};
use cifc_core::dpc::{
    cd_dpc_rate, comparison_sweep, md_dpc_rate, numeric_dpc_oracle, write_sweep, DpcConfig,
};
use cifc_core::gaussian::{
    coherent_intersection_check, intersection_gap, linspace, region_coherent_si, region_mp_mixed,
    region_mp_vsi, region_mp_wi, wi_rates_via_covariance, GaussianGrids, GaussianMultiPrimary,
};
use cifc_core::info_theory::{axes, sample_input_dist, stream_rng};
use cifc_core::polytope::region_equal;
use cifc_core::{DmcChannel, Frontier2D};
use rand::Rng;

const SEED: u64 = 20240;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn hl(x: f64) -> f64 {
    0.5 * x.log2()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let rep = fme_equivalence_run(100, SEED, true).expect("fme run");
    let secs = t.elapsed().as_secs_f64();
    let pass = rep.failed.is_empty() && rep.passed == rep.instances && secs < 60.0;
    outcome(
        pass,
        format!(
            "{}/{} nonempty instances region-equal, {} draws, max gap {:.3e}, {:.1}s",
            rep.passed, rep.instances, rep.draws, rep.max_gap, secs
        ),
    )
}

fn bsc_row(p: f64, bit: usize) -> [f64; 2] {
    if bit == 0 {
        [1.0 - p, p]
    } else {
        [p, 1.0 - p]
    }
}

/// Y1 is a random channel; Y2 and Z append a BSC view of X1 to it, the view
/// at Z less noisy. The extra view carries nothing about X2 beyond X1, and Z
/// dominates Y2, so both VSI conditions hold for every input law.
fn vsi_by_construction(k: u64) -> DmcChannel {
    let mut rng = stream_rng(SEED + 2, k);
    let y1: Vec<f64> = (0..4)
        .flat_map(|_| {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
            let t: f64 = w.iter().sum();
            w.into_iter().map(move |x| x / t)
        })
        .collect();
    let p2: f64 = rng.random_range(0.05..0.5);
    let pz: f64 = rng.random_range(0.0..p2);
    DmcChannel::from_fn(2, 2, axes(&[("Y1", 3), ("Y2", 6), ("Z", 6)]), |a, b| {
        let base = &y1[(a * 2 + b) * 3..(a * 2 + b + 1) * 3];
        let (w2, wz) = (bsc_row(p2, a), bsc_row(pz, a));
        let mut v = vec![0.0; 3 * 6 * 6];
        for (y, &py) in base.iter().enumerate() {
            for (i, &q2) in w2.iter().enumerate() {
                for (j, &qz) in wz.iter().enumerate() {
                    v[(y * 6 + y * 2 + i) * 6 + y * 2 + j] += py * q2 * qz;
                }
            }
        }
        v
    })
    .unwrap()
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    let mut equal = 0;
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let chan = vsi_by_construction(k);
        let check = RegimeCheck {
            samples: 200,
            aux_card: 1,
            seed: SEED + k,
        };
        if !check_regime(&chan, ChannelClass::MultiPrimary, &Regime::Vsi, &check)
            .unwrap()
            .passed()
        {
            continue;
        }
        checked += 1;
        let dist = sample_input_dist(&axes(&[("X1", 2), ("X2", 2)]), SEED + 1000 + k).unwrap();
        let full = vsi_achievable_region(&chan, &dist, false).unwrap();
        let reduced = vsi_achievable_region(&chan, &dist, true).unwrap();
        worst = worst.max(full.max_gap(&reduced));
        if region_equal(&full, &reduced, 1e-9) {
            equal += 1;
        }
    }
    outcome(
        checked == 50 && equal == 50,
        format!("{equal}/{checked} VSI instances unchanged, max gap {worst:.3e}"),
    )
}

fn coherent_instance(k: u64, strong: bool) -> GaussianMultiPrimary {
    let mut rng = stream_rng(SEED + 3 + strong as u64, k);
    loop {
        let n = rng.random_range(2..=4);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let (p1, p2) = (rng.random_range(0.2..4.0), rng.random_range(0.2..4.0));
        if !strong {
            let b = (0..n).map(|_| sign * rng.random_range(0.05..1.0)).collect();
            return GaussianMultiPrimary::new(b, rng.random_range(-1.5..1.5), p1, p2).unwrap();
        }
        let b: Vec<f64> = (0..n).map(|_| sign * rng.random_range(1.0..3.0)).collect();
        let top = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let a = sign * (top + rng.random_range(0.5..4.0));
        let c = GaussianMultiPrimary::new(b, a, p1, p2).unwrap();
        if c.is_vsi() && (0..n).all(|j| c.single(j).is_vsi()) {
            return c;
        }
    }
}

fn criterion_3() -> Outcome {
    let grids = GaussianGrids::default();
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for strong in [false, true] {
        for k in 0..20 {
            let r = coherent_intersection_check(&coherent_instance(k, strong), grids).unwrap();
            worst = worst.max(r.max_gap);
            ok += r.equal as usize;
        }
    }
    let nc = GaussianMultiPrimary::new(vec![0.5, -0.5], 0.0, 1.0, 1.0).unwrap();
    let gap = intersection_gap(&nc, grids).unwrap().max_gap;
    outcome(
        ok == 40 && worst <= 1e-6 && gap > 1e-4,
        format!(
            "{ok}/40 coherent instances equal (max gap {worst:.3e}), non-coherent gap {gap:.4}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = stream_rng(SEED + 4, 0);
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let cfg = DpcConfig {
            p1: rng.random_range(0.0..5.0),
            p2: rng.random_range(0.1..5.0),
            a1: rng.random_range(-1.5..1.5),
            a2: rng.random_range(-1.5..1.5),
            b: rng.random_range(-1.0..1.0),
            eta: rng.random_range(0.0..=1.0),
            rho: rng.random_range(-1.0..=1.0),
            ..DpcConfig::comparison(1.0)
        };
        let o = numeric_dpc_oracle(&cfg, 201).unwrap();
        let d = (o.rate - cd_dpc_rate(&cfg).unwrap()).abs();
        worst = worst.max(d);
        within += (d <= 2e-3) as usize;
    }
    let mut matched = 0;
    for k in 0..5 {
        let a = -1.0 + 0.5 * k as f64;
        let cfg = DpcConfig {
            a1: a,
            a2: a,
            eta: 0.2 + 0.15 * k as f64,
            ..DpcConfig::comparison(2.0)
        };
        let o = numeric_dpc_oracle(&cfg, 201).unwrap();
        let g = cfg.pv() / (cfg.pv() + 1.0);
        let near = (o.gamma - g).abs() <= o.gamma_step + 1e-12
            && (o.alpha - a * g).abs() <= o.alpha_step + 1e-12;
        matched += near as usize;
    }
    outcome(
        within == 200 && matched == 5,
        format!("{within}/200 configs within 2e-3 (max diff {worst:.4}); matched optimizers {matched}/5"),
    )
}

fn criterion_5() -> Outcome {
    let base = DpcConfig::comparison(1.0);
    let rep = comparison_sweep(&base, 101, 64).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep(&path, &base, &rep).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    // Columns: eta, R1, R2_cd, R2_md, x_star, R2_block, R2_outer.
    let md_ge_cd = rows.iter().all(|r| r[3] >= r[2]);
    let below = rows
        .iter()
        .all(|r| r[2] <= r[6] + 1e-9 && r[3] <= r[6] + 1e-9);
    let gain = rows.iter().map(|r| r[3] - r[2]).fold(0.0, f64::max);
    outcome(
        rows.len() == 101 && md_ge_cd && below && gain > 1e-4,
        format!(
            "{} rows, md >= cd: {md_ge_cd}, below outer: {below}, max gain {gain:.4}",
            rows.len()
        ),
    )
}

/// Frontier of `{R1 ≤ c1, R2 ≤ c2, R1 + R2 ≤ s}` from its vertices.
fn polygon(c1: f64, c2: f64, s: f64) -> Frontier2D {
    let top = c1.min(s).max(0.0);
    let end = c2.min(s).max(0.0);
    Frontier2D::from_vertices(vec![
        (0.0, top),
        ((s - top).clamp(0.0, end), top),
        (end, (s - end).min(top).max(0.0)),
    ])
}

fn sum_direct(b: f64, p1: f64, p2: f64, eta: f64, rho: f64) -> f64 {
    hl(1.0 + b * b * p2 + p1 + 2.0 * b * rho * ((1.0 - eta) * p1 * p2).sqrt())
}

fn weak_direct(b: f64, p1: f64, p2: f64, eta: f64, rho: f64) -> f64 {
    hl(
        (1.0 + b * b * p2 + p1 + 2.0 * b * rho * ((1.0 - eta) * p1 * p2).sqrt())
            / (1.0 + b * b * eta * p2),
    )
}

fn criterion_6() -> Outcome {
    let n = 101;
    let (etas, rhos) = (linspace(0.0, 1.0, n), linspace(-1.0, 1.0, n));
    let union = |parts: Vec<Frontier2D>| Frontier2D::union_all(&parts);
    let mut ok = 0;
    let mut total = 0;
    let mut check = |label: &str, got: Frontier2D, want: Frontier2D, fails: &mut Vec<String>| {
        total += 1;
        if region_equal(&got, &want, 1e-9) {
            ok += 1;
        } else {
            fails.push(format!("{label} gap {:.2e}", got.max_gap(&want)));
        }
    };
    let mut fails = Vec::new();
    let g = GaussianGrids::uniform(n);
    for (b, a, p1, p2) in [
        (2.0, 2.5, 1.0, 1.0),
        (-1.5, -3.0, 2.0, 0.5),
        (3.0, 6.0, 2.0, 1.0),
    ] {
        let c = GaussianMultiPrimary::new(vec![b], a, p1, p2).unwrap();
        let vsi = union(
            rhos.iter()
                .map(|&r| {
                    polygon(
                        f64::INFINITY,
                        hl(1.0 + (1.0 - r * r) * p2),
                        sum_direct(b, p1, p2, 0.0, r),
                    )
                })
                .collect(),
        );
        check("vsi", region_mp_vsi(&c, n).unwrap(), vsi, &mut fails);
        let si = union(
            etas.iter()
                .map(|&e| {
                    polygon(
                        f64::INFINITY,
                        hl(1.0 + e * p2),
                        sum_direct(b.abs(), p1, p2, e, 1.0),
                    )
                })
                .collect(),
        );
        check(
            "coherent-si",
            region_coherent_si(&c, n).unwrap(),
            si,
            &mut fails,
        );
        let strong = Partition::parse("|1").unwrap();
        if c.is_mixed(&strong).unwrap() {
            let want = union(
                etas.iter()
                    .map(|&e| {
                        union(
                            rhos.iter()
                                .map(|&r| {
                                    polygon(
                                        f64::INFINITY,
                                        hl(1.0 + e * p2),
                                        sum_direct(b, p1, p2, e, r),
                                    )
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            );
            check(
                "mixed-strong",
                region_mp_mixed(&c, &strong, g).unwrap(),
                want,
                &mut fails,
            );
        }
    }
    for (b, p1, p2) in [(0.5, 1.0, 1.0), (-0.8, 3.0, 2.0), (0.0, 1.0, 4.0)] {
        let c = GaussianMultiPrimary::new(vec![b], 0.3, p1, p2).unwrap();
        let best = |e: f64| {
            rhos.iter()
                .map(|&r| weak_direct(b, p1, p2, e, r))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let wi = union(
            etas.iter()
                .map(|&e| Frontier2D::rect(hl(1.0 + e * p2), best(e)))
                .collect(),
        );
        check("wi", region_mp_wi(&c, g).unwrap(), wi, &mut fails);
        let weak = Partition::parse("1|").unwrap();
        let want = union(
            etas.iter()
                .map(|&e| {
                    union(
                        rhos.iter()
                            .map(|&r| {
                                polygon(
                                    weak_direct(b, p1, p2, e, r),
                                    hl(1.0 + e * p2),
                                    f64::INFINITY,
                                )
                            })
                            .collect(),
                    )
                })
                .collect(),
        );
        check(
            "mixed-weak",
            region_mp_mixed(&c, &weak, g).unwrap(),
            want,
            &mut fails,
        );
    }
    let bitwise = (0..50).all(|k| {
        let cfg = DpcConfig::comparison(0.2 + 0.1 * k as f64).with_eta(k as f64 / 49.0);
        md_dpc_rate(&cfg).unwrap().to_bits() == cd_dpc_rate(&cfg).unwrap().to_bits()
    });
    outcome(
        ok == total && bitwise,
        format!("{ok}/{total} single-receiver regions equal direct formulas{}; md(x=0) == cd bitwise: {bitwise}", if fails.is_empty() { String::new() } else { format!(" ({})", fails.join(", ")) }),
    )
}

fn criterion_7() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/counterexample.json");
    let t = Instant::now();
    let w: Witness = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let verified = verify_counterexample(&w).unwrap();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        verified && w.margin > 1e-6 && secs < 10.0,
        format!(
            "witness channel {} at {}, margin {:.4}, verified {verified} in {secs:.2}s",
            w.channel_index, w.receiver, w.margin
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = stream_rng(SEED + 8, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let b = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let c = GaussianMultiPrimary::new(
            b,
            rng.random_range(-2.0..2.0),
            rng.random_range(0.0..5.0),
            rng.random_range(0.0..5.0),
        )
        .unwrap();
        let (eta, rho) = (rng.random_range(0.0..=1.0), rng.random_range(-1.0..=1.0));
        let (r1, r2) = wi_rates_via_covariance(&c, eta, rho).unwrap();
        for (j, &b) in c.b.iter().enumerate() {
            worst = worst.max((r1[j] - weak_direct(b, c.p1, c.p2, eta, rho)).abs());
        }
        worst = worst.max((r2 - hl(1.0 + eta * c.p2)).abs());
    }
    outcome(
        worst <= 1e-9,
        format!("100 configs, max deviation {worst:.3e}"),
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let mut passed = 0;
    for (k, c) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = c();
        passed += o.pass as usize;
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {tag} ({}) [{:.1}s]",
            k + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/8 PASS");
    if passed < 8 && std::env::var("CIFC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
