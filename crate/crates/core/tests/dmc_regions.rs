use std::time::Instant;

use cifc_core::dmc_regions::{
    check_regime, condition_margins, counterexample_search, dmc_capacity_region,
    fme_equivalence_run, inner_bound_region, inner_bound_terms, projection_matches,
    sample_aux_instance, verify_counterexample, verify_inner_bound_fme, vsi_achievable_region,
    AuxAssignment, CapacitySearch, ChannelClass, CounterexampleSearch, Partition, Regime,
    RegimeCheck, Witness,
};
use cifc_core::info_theory::{
    axes, compose_outputs, sample_dirichlet, sample_dist_with, sample_input_dist, stream_rng,
    DmcChannel, JointDist,
};
use cifc_core::io::read_json;
use cifc_core::polytope::{frontier_from_halfplanes, region_equal, Frontier2D, Halfplane};
use cifc_core::Error;

const TOL: f64 = 1e-9;

fn mi(j: &JointDist, l: &[&str], r: &[&str], g: &[&str]) -> f64 {
    j.mutual_information(l, r, g).unwrap()
}

/// With `Q1` and `X1` constant the inner bound reduces to Marton's region
/// with a common message `Q`.
fn marton_region(aux: &AuxAssignment, chan: &DmcChannel) -> Frontier2D {
    let jy = compose_outputs(aux.joint(), chan, &["Y"]).unwrap();
    let jz = compose_outputs(aux.joint(), chan, &["Z"]).unwrap();
    let p = aux.joint();
    let uv = mi(p, &["U"], &["V"], &["Q"]);
    let quy = mi(&jy, &["Q", "U"], &["Y"], &[]);
    let qvz = mi(&jz, &["Q", "V"], &["Z"], &[]);
    let uy = mi(&jy, &["U"], &["Y"], &["Q"]);
    let vz = mi(&jz, &["V"], &["Z"], &["Q"]);
    let common = mi(&jy, &["Q"], &["Y"], &[]).min(mi(&jz, &["Q"], &["Z"], &[]));
    let sum = (quy + vz - uv)
        .min(uy + qvz - uv)
        .min(common + uy + vz - uv);
    if [quy, qvz, sum].iter().any(|v| *v < 0.0) {
        return Frontier2D::empty();
    }
    frontier_from_halfplanes(&[
        Halfplane::new(1.0, 0.0, quy),
        Halfplane::new(0.0, 1.0, qvz),
        Halfplane::new(1.0, 1.0, sum),
    ])
    .unwrap()
}

#[test]
fn inner_bound_reduces_to_marton_region() {
    let mut nonempty = 0;
    for k in 0..60u64 {
        let mut rng = stream_rng(21, k);
        let base =
            sample_dist_with(&axes(&[("Q", 2), ("U", 2), ("V", 2), ("X2", 2)]), &mut rng).unwrap();
        let aux = AuxAssignment::from_map(&base, [1, 2, 2, 2, 1, 2], |c| {
            [0, c[0], c[1], c[2], 0, c[3]]
        })
        .unwrap();
        let chan = DmcChannel::random(1, 2, axes(&[("Y", 2), ("Z", 2)]), &mut rng).unwrap();
        let direct = inner_bound_region(&aux, &chan).unwrap();
        let oracle = marton_region(&aux, &chan);
        assert!(
            region_equal(&direct, &oracle, TOL),
            "instance {k}: {direct:?} vs {oracle:?}"
        );
        nonempty += usize::from(!direct.is_empty());
    }
    assert!(nonempty > 10, "only {nonempty} nonempty instances");
}

#[test]
fn full_decoding_substitution_gives_five_constraint_region() {
    for k in 0..30u64 {
        let mut rng = stream_rng(5, k);
        let chan = DmcChannel::random(2, 2, axes(&[("Y", 2), ("Z", 2)]), &mut rng).unwrap();
        let law = sample_dist_with(&axes(&[("X1", 2), ("X2", 2)]), &mut rng).unwrap();
        // Q1 = X1 and Q = U = V = X2.
        let aux = AuxAssignment::from_map(&law, [2, 2, 2, 2, 2, 2], |c| {
            [c[0], c[1], c[1], c[1], c[0], c[1]]
        })
        .unwrap();
        let direct = inner_bound_region(&aux, &chan).unwrap();
        let five = vsi_achievable_region(&chan, &law, false).unwrap();
        assert!(region_equal(&direct, &five, TOL), "instance {k}");
    }
}

#[test]
fn corrupting_a_binding_row_breaks_the_projection_match() {
    let (k, terms) = (0..5000u64)
        .find_map(|k| {
            let (aux, chan) = sample_aux_instance(3, k).unwrap();
            let check = verify_inner_bound_fme(&aux, &chan).unwrap();
            (check.nonempty && check.equal).then(|| (k, inner_bound_terms(&aux, &chan).unwrap()))
        })
        .expect("a matching nonempty instance");
    let rows = terms.rows();
    assert!(projection_matches(&rows, &terms).unwrap(), "instance {k}");
    let scale = rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    let broken = (0..rows.len()).filter(|&i| {
        let mut m = rows.clone();
        m[i].rhs -= 0.1 * scale;
        !projection_matches(&m, &terms).unwrap()
    });
    assert!(broken.count() >= 1);
}

#[test]
fn unconditioned_run_is_mostly_empty() {
    let r = fme_equivalence_run(200, 0, false).unwrap();
    assert_eq!(r.instances, 200);
    assert_eq!(r.draws, 200);
    assert!(
        r.nonempty_instances < 20,
        "{} nonempty",
        r.nonempty_instances
    );
    assert!(r.passed >= r.instances - r.nonempty_instances);
}

#[test]
fn conditioned_run_counts_only_nonempty_instances() {
    let r = fme_equivalence_run(5, 0, true).unwrap();
    assert_eq!(r.instances, 5);
    assert_eq!(r.nonempty_instances, 5);
    assert!(r.draws >= 5);
    assert_eq!(r.passed + r.failed.len(), 5);
}

fn noiseless_pair_channel() -> DmcChannel {
    // Y and Z both see (X1, X2) exactly.
    DmcChannel::deterministic(2, 2, axes(&[("Y", 4), ("Z", 4)]), |a, b| {
        vec![a * 2 + b, a * 2 + b]
    })
    .unwrap()
}

#[test]
fn vsi_capacity_of_noiseless_channel() {
    let chan = noiseless_pair_channel();
    let search = CapacitySearch {
        samples: 50,
        check_samples: 100,
        ..Default::default()
    };
    let f = dmc_capacity_region(&chan, ChannelClass::MultiPrimary, &Regime::Vsi, &search).unwrap();
    // R2 ≤ H(X2|X1) ≤ 1 and R1 + R2 ≤ H(X1 X2) ≤ 2
    let want = Frontier2D::from_vertices(vec![(0.0, 2.0), (1.0, 1.0)]);
    assert!(region_equal(&f, &want, TOL), "{f:?}");
}

#[test]
fn regime_check_finds_strong_violation() {
    // Y sees only X1, Z sees X2.
    let chan =
        DmcChannel::deterministic(2, 2, axes(&[("Y", 2), ("Z", 2)]), |a, b| vec![a, b]).unwrap();
    let rep = check_regime(
        &chan,
        ChannelClass::MultiPrimary,
        &Regime::Vsi,
        &RegimeCheck::default(),
    )
    .unwrap();
    assert!(!rep.passed());
    assert_eq!(rep.regime, "none");
    let w = rep.witness.unwrap();
    assert_eq!(w.condition, "strong");
    assert!(w.margin < -0.1);
    let search = CapacitySearch {
        samples: 10,
        check_samples: 10,
        ..Default::default()
    };
    assert!(matches!(
        dmc_capacity_region(&chan, ChannelClass::MultiPrimary, &Regime::Vsi, &search),
        Err(Error::WrongRegime(_))
    ));
}

#[test]
fn identical_outputs_satisfy_every_regime() {
    let mut rng = stream_rng(2, 0);
    let laws: Vec<Vec<f64>> = (0..4).map(|_| sample_dirichlet(&mut rng, 3)).collect();
    // Z is an exact copy of Y.
    let chan = DmcChannel::from_fn(2, 2, axes(&[("Y", 3), ("Z", 3)]), |a, b| {
        let mut v = vec![0.0; 9];
        for (y, p) in laws[a * 2 + b].iter().enumerate() {
            v[y * 3 + y] = *p;
        }
        v
    })
    .unwrap();
    let check = RegimeCheck {
        samples: 200,
        aux_card: 3,
        seed: 4,
    };
    for regime in [Regime::Vsi, Regime::Vwi] {
        let rep = check_regime(&chan, ChannelClass::MultiPrimary, &regime, &check).unwrap();
        assert!(rep.passed(), "{regime:?}");
        assert_eq!(rep.verdict, "no violation found");
        assert!(rep.grid_points > 0);
        assert_eq!(
            rep,
            check_regime(&chan, ChannelClass::MultiPrimary, &regime, &check).unwrap()
        );
    }
}

#[test]
fn margins_list_every_condition() {
    let mut rng = stream_rng(8, 1);
    let chan = DmcChannel::random(2, 2, axes(&[("Y1", 2), ("Y2", 2), ("Z", 2)]), &mut rng).unwrap();
    let dist = sample_input_dist(&axes(&[("U", 3), ("X1", 2), ("X2", 2)]), 3).unwrap();
    let names = |r: &Regime| -> Vec<String> {
        condition_margins(&chan, ChannelClass::MultiPrimary, r, &dist)
            .unwrap()
            .into_iter()
            .map(|m| m.condition)
            .collect()
    };
    assert_eq!(names(&Regime::Vsi), ["strong", "strong", "very_strong"]);
    assert_eq!(
        names(&Regime::Vwi),
        ["weak", "very_weak", "weak", "very_weak"]
    );
    assert_eq!(
        names(&Regime::Mixed(Partition::parse("1|2").unwrap())),
        ["weak", "strong", "either"]
    );
}

#[test]
fn class_and_partition_validation() {
    let mut rng = stream_rng(8, 2);
    let ms = DmcChannel::random(2, 2, axes(&[("Y", 2), ("Z1", 2), ("Z2", 2)]), &mut rng).unwrap();
    assert_eq!(ChannelClass::infer(&ms), ChannelClass::MultiSecondary);
    assert!(matches!(
        ChannelClass::MultiPrimary.validate(&ms),
        Err(Error::InvalidChannel(_))
    ));
    let p = Partition::parse("2|1").unwrap();
    assert_eq!((p.weak.clone(), p.strong.clone()), (vec![1], vec![0]));
    assert!(p.validate(2).is_ok());
    assert!(matches!(
        Partition::parse("1|1").unwrap().validate(2),
        Err(Error::InvalidPartition(_))
    ));
    assert!(matches!(
        Partition::parse("1|").unwrap().validate(2),
        Err(Error::InvalidPartition(_))
    ));
    assert!(matches!(
        Partition::parse("0|1"),
        Err(Error::InvalidPartition(_))
    ));
    assert!(matches!(
        Partition::parse("12"),
        Err(Error::InvalidPartition(_))
    ));
    assert!(matches!(
        Regime::parse("mixed", None),
        Err(Error::InvalidPartition(_))
    ));
    assert_eq!(Regime::parse("VsI", None).unwrap(), Regime::Vsi);
    let rep = check_regime(
        &ms,
        ChannelClass::MultiSecondary,
        &Regime::Mixed(Partition::parse("|1,2").unwrap()),
        &RegimeCheck {
            samples: 10,
            ..Default::default()
        },
    );
    assert!(rep.is_ok());
}

#[test]
fn aux_assignment_needs_all_axes() {
    let d =
        JointDist::uniform(axes(&[("Q1", 2), ("Q", 2), ("U", 2), ("X1", 2), ("X2", 2)])).unwrap();
    assert!(matches!(
        AuxAssignment::new(d),
        Err(Error::InvalidDistribution(_))
    ));
}

#[test]
fn search_grid_limit_is_enforced() {
    let chan = noiseless_pair_channel();
    let search = CapacitySearch {
        grid: 200,
        ..Default::default()
    };
    assert!(matches!(
        cifc_core::dmc_regions::capacity_region_unchecked(
            &chan,
            ChannelClass::MultiPrimary,
            &Regime::Vsi,
            &search
        ),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn stored_counterexample_still_verifies() {
    let start = Instant::now();
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/counterexample.json"
    );
    let w: Witness = read_json(path).unwrap();
    assert!(w.margin > 1e-6);
    assert!(w.channel.primary().len() >= 2);
    assert!(verify_counterexample(&w).unwrap());
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn counterexample_search_is_reproducible() {
    let cfg = CounterexampleSearch {
        budget: 64,
        ..Default::default()
    };
    let a = counterexample_search(&cfg)
        .unwrap()
        .expect("witness within 64 channels");
    let b = counterexample_search(&cfg).unwrap().unwrap();
    assert_eq!(a, b);
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/counterexample.json"
    );
    let stored: Witness = read_json(path).unwrap();
    assert_eq!(a.channel_index, stored.channel_index);
    assert!((a.margin - stored.margin).abs() < 1e-12);
}

#[test]
fn tampered_witness_fails_verification() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/counterexample.json"
    );
    let mut w: Witness = read_json(path).unwrap();
    w.margin += 1e-3;
    assert!(!verify_counterexample(&w).unwrap());
}
