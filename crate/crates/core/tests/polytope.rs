use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use cifc_core::polytope::{
    fme_eliminate, fme_eliminate_all, frontier_contains, frontier_from_halfplanes,
    frontier_intersect, frontier_union, project_to_frontier, rat, region_equal, Frontier2D,
    Halfplane, IneqSystem, LinIneq, Rat,
};
use cifc_core::Error;
use num_traits::Zero;
use proptest::prelude::*;

type Row = (i64, i64, i64, i64);

fn system(rows: &[Row]) -> IneqSystem {
    let mut s = IneqSystem::new(["x", "y", "z"]);
    for &(a, b, c, d) in rows {
        s.push(LinIneq::int(&[("x", a), ("y", b), ("z", c)], rat(d)))
            .unwrap();
    }
    s
}

/// Whether some z satisfies every row at (x, y): an interval test.
fn exists_z(rows: &[Row], x: &Rat, y: &Rat) -> bool {
    let (mut lo, mut hi): (Option<Rat>, Option<Rat>) = (None, None);
    for &(a, b, c, d) in rows {
        let rest = rat(d) - rat(a) * x - rat(b) * y;
        if c == 0 {
            if rest < Rat::zero() {
                return false;
            }
        } else if c > 0 {
            let v = rest / rat(c);
            hi = Some(hi.map_or(v.clone(), |h| if v < h { v.clone() } else { h }));
        } else {
            let v = rest / rat(c);
            lo = Some(lo.map_or(v.clone(), |l| if v > l { v.clone() } else { l }));
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => l <= h,
        _ => true,
    }
}

fn point(x: &Rat, y: &Rat) -> BTreeMap<String, Rat> {
    [("x".to_string(), x.clone()), ("y".to_string(), y.clone())]
        .into_iter()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elimination_matches_interval_oracle(
        rows in prop::collection::vec((-3i64..=3, -3i64..=3, -3i64..=3, -4i64..=6), 2..7),
        pts in prop::collection::vec((-8i64..=8, -8i64..=8), 30),
    ) {
        let projected = fme_eliminate(&system(&rows), "z").unwrap();
        for (px, py) in pts {
            let (x, y) = (Rat::new(px.into(), 2.into()), Rat::new(py.into(), 2.into()));
            prop_assert_eq!(projected.holds_at(&point(&x, &y)), exists_z(&rows, &x, &y));
        }
    }

    #[test]
    fn frontier_matches_pointwise_optimum(
        rows in prop::collection::vec((0i64..=3, 0i64..=3, 1i64..=12), 1..5),
    ) {
        // R1 coef, R2 coef, bound with nonnegative coefficients: bounded.
        prop_assume!(rows.iter().any(|r| r.0 > 0) && rows.iter().any(|r| r.1 > 0));
        let mut s = IneqSystem::new(["R1", "R2"]);
        for &(a, b, d) in &rows {
            s.push(LinIneq::int(&[("R1", a), ("R2", b)], rat(d))).unwrap();
        }
        s.push_nonneg(&["R1", "R2"]).unwrap();
        let f = project_to_frontier(&s, "R1", "R2").unwrap();
        // R1 ≥ 0 makes every row with an R2 term a cap on R2.
        let r2max = rows.iter().filter(|r| r.1 > 0).map(|r| r.2 as f64 / r.1 as f64).fold(f64::INFINITY, f64::min);
        for k in 0..=20 {
            let r2 = r2max * k as f64 / 20.0;
            let best = rows.iter().filter(|r| r.0 > 0)
                .map(|&(a, b, d)| (d as f64 - b as f64 * r2) / a as f64)
                .fold(f64::INFINITY, f64::min);
            prop_assert!((f.r1_at(r2).unwrap() - best).abs() < 1e-9, "r2={} got {:?} want {}", r2, f.r1_at(r2), best);
        }
        prop_assert!((f.r2_max().unwrap() - r2max).abs() < 1e-9);
    }
}

#[test]
fn eliminating_everything_leaves_constant_rows() {
    let s = system(&[(1, 0, 0, 2), (-1, 0, 0, -3)]);
    let out = fme_eliminate_all(&s, &["x", "y", "z"]).unwrap();
    assert!(out.has_contradiction());
    let ok = fme_eliminate_all(&system(&[(1, 1, 1, 2), (-1, 0, 0, 0)]), &["x", "y", "z"]).unwrap();
    assert!(!ok.has_contradiction());
}

#[test]
fn unknown_variable_is_rejected() {
    let s = system(&[(1, 0, 0, 1)]);
    assert!(matches!(
        fme_eliminate(&s, "w"),
        Err(Error::UnknownVariable(_))
    ));
    let mut t = IneqSystem::new(["R1", "R2"]);
    assert!(t.push(LinIneq::int(&[("Q", 1)], rat(1))).is_err());
}

#[test]
fn pentagon_projection() {
    let mut s = IneqSystem::new(["R1", "R2"]);
    s.push(LinIneq::int(&[("R1", 1)], rat(2))).unwrap();
    s.push(LinIneq::int(&[("R2", 1)], rat(2))).unwrap();
    s.push(LinIneq::int(&[("R1", 1), ("R2", 1)], rat(3)))
        .unwrap();
    s.push_nonneg(&["R1", "R2"]).unwrap();
    let f = project_to_frontier(&s, "R1", "R2").unwrap();
    assert_eq!(f.points(), &[(0.0, 2.0), (1.0, 2.0), (2.0, 1.0)]);
}

#[test]
fn infeasible_and_unbounded_systems() {
    let mut s = IneqSystem::new(["R1", "R2"]);
    s.push(LinIneq::int(&[("R1", 1)], rat(-1))).unwrap();
    s.push_nonneg(&["R1", "R2"]).unwrap();
    assert!(project_to_frontier(&s, "R1", "R2").unwrap().is_empty());
    let mut u = IneqSystem::new(["R1", "R2"]);
    u.push(LinIneq::int(&[("R1", 1)], rat(1))).unwrap();
    u.push_nonneg(&["R1", "R2"]).unwrap();
    assert!(matches!(
        project_to_frontier(&u, "R1", "R2"),
        Err(Error::Unbounded)
    ));
    assert!(matches!(
        frontier_from_halfplanes(&[Halfplane::new(1.0, 0.0, 1.0)]),
        Err(Error::Unbounded)
    ));
}

#[test]
fn halfplanes_match_exact_projection() {
    let f = frontier_from_halfplanes(&[
        Halfplane::new(1.0, 0.0, 2.0),
        Halfplane::new(0.0, 1.0, 2.0),
        Halfplane::new(1.0, 1.0, 3.0),
        Halfplane::new(1.0, 2.0, f64::INFINITY),
    ])
    .unwrap();
    assert_eq!(f.points(), &[(0.0, 2.0), (1.0, 2.0), (2.0, 1.0)]);
}

#[test]
fn empty_frontier_conventions() {
    let e = Frontier2D::empty();
    let r = Frontier2D::rect(1.0, 1.0);
    assert!(frontier_contains(&r, &e, 0.0));
    assert!(!frontier_contains(&e, &r, 0.0));
    assert!(frontier_intersect(&r, &e).is_empty());
    assert!(region_equal(&frontier_union(&r, &e), &r, 0.0));
}

#[test]
fn new_rejects_non_monotone_points() {
    assert!(matches!(
        Frontier2D::new(vec![(0.0, 1.0), (1.0, 2.0)]),
        Err(Error::InvalidFrontier(_))
    ));
    assert!(matches!(
        Frontier2D::new(vec![(1.0, 1.0), (0.5, 0.0)]),
        Err(Error::InvalidFrontier(_))
    ));
}

#[test]
fn hull_of_time_sharing() {
    let f = Frontier2D::hull_of(vec![(0.0, 1.0), (1.0, 0.0), (0.4, 0.4), (0.5, 0.5)]);
    assert_eq!(f.points(), &[(0.0, 1.0), (1.0, 0.0)]);
    assert_abs_diff_eq!(f.r1_at(0.25).unwrap(), 0.75, epsilon = 1e-12);
}

#[test]
fn csv_round_trip() {
    let f = Frontier2D::from_vertices(vec![(0.0, 1.0 / 3.0), (0.2, 0.3), (0.7, 0.0)]);
    let csv = f.to_csv();
    assert!(csv.starts_with("R2,R1\n"));
    let g = Frontier2D::read_csv(csv.as_bytes()).unwrap();
    assert!(region_equal(&f, &g, 1e-11));
    assert!(Frontier2D::read_csv("R1,R2\n0,1\n".as_bytes()).is_err());
}

fn on_grid() -> impl Strategy<Value = Frontier2D> {
    // Values on the shared breakpoints 0, .25, .5, .75, 1.
    prop::collection::vec(0.0f64..1.0, 5).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        Frontier2D::new(
            v.into_iter()
                .enumerate()
                .map(|(k, r1)| (k as f64 / 4.0, r1))
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn intersection_and_union_bound_their_operands(a in on_grid(), b in on_grid()) {
        let i = frontier_intersect(&a, &b);
        let u = frontier_union(&a, &b);
        prop_assert!(frontier_contains(&a, &i, 1e-12) && frontier_contains(&b, &i, 1e-12));
        prop_assert!(frontier_contains(&u, &a, 1e-12) && frontier_contains(&u, &b, 1e-12));
        prop_assert!(region_equal(&frontier_intersect(&a, &a), &a, 1e-12));
    }

    #[test]
    fn operations_are_associative_on_shared_grid(a in on_grid(), b in on_grid(), c in on_grid()) {
        let l = frontier_intersect(&frontier_intersect(&a, &b), &c);
        let r = frontier_intersect(&a, &frontier_intersect(&b, &c));
        prop_assert!(region_equal(&l, &r, 1e-12));
        let l = frontier_union(&frontier_union(&a, &b), &c);
        let r = frontier_union(&a, &frontier_union(&b, &c));
        prop_assert!(region_equal(&l, &r, 1e-12));
    }

    #[test]
    fn convexify_contains_original(a in on_grid()) {
        prop_assert!(frontier_contains(&a.convexify(), &a, 1e-12));
    }
}

#[test]
fn union_of_boxes_is_a_staircase() {
    let u = frontier_union(&Frontier2D::rect(1.0, 2.0), &Frontier2D::rect(2.0, 1.0));
    assert_eq!(
        u.points(),
        &[(0.0, 2.0), (1.0, 2.0), (1.0, 1.0), (2.0, 1.0)]
    );
    assert_eq!(u.r1_at(1.0), Some(2.0));
    assert_eq!(u.r1_right(1.0), Some(1.0));
    assert_eq!(u.r1_right(2.0), None);
    assert!(!u.contains_point(1.5, 1.5, 1e-9));
    let i = frontier_intersect(&u, &Frontier2D::rect(2.0, 1.5));
    assert_eq!(
        i.points(),
        &[(0.0, 1.5), (1.0, 1.5), (1.0, 1.0), (2.0, 1.0)]
    );
}

#[test]
fn union_of_pentagons_is_the_pointwise_maximum() {
    // Slope -1 edges never cross, so the union is exact at every R2.
    let parts: Vec<(f64, f64)> = (0..50)
        .map(|k| {
            let t = k as f64 / 49.0;
            (0.3 + 0.7 * (1.0 - t * t), 1.2 + 0.8 * t)
        })
        .collect();
    let u = Frontier2D::union_all(
        &parts
            .iter()
            .map(|&(r2, s)| Frontier2D::from_vertices(vec![(0.0, s), (r2, s - r2)]))
            .collect::<Vec<_>>(),
    );
    let top = parts.iter().map(|p| p.0).fold(0.0, f64::max);
    for k in 0..=512 {
        let x = top * k as f64 / 512.0;
        let want = parts
            .iter()
            .filter(|p| p.0 >= x)
            .map(|&(_, s)| s - x)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((u.r1_at(x).unwrap() - want).abs() < 1e-9, "x={x}");
    }
}
