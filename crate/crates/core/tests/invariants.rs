mod common;

use common::*;
use lidless::norming::{embed, sandwich_holds, NormedSpaceModel, NormingSet};
use lidless::{
    build_pairs, check_norming, locate_sigma, locate_tau, sigma_spec, tau_in_window, tau_spec,
    BoxSpec, IntervalSpec, OpenSide, Point, RefinementSchedule, Scalar, TileWindow,
};
use proptest::prelude::*;

fn eighth(k: i64) -> Scalar {
    Scalar::ratio(k, 8)
}

fn interval() -> impl Strategy<Value = IntervalSpec> {
    (-12i64..12, 1i64..12, 0u8..3).prop_map(|(lo, len, open)| {
        let side = match open {
            0 => OpenSide::None,
            1 => OpenSide::Lower,
            _ => OpenSide::Upper,
        };
        IntervalSpec::new(eighth(lo), eighth(lo + len), side).unwrap()
    })
}

/// A planar box with at most one open side.
fn planar_box() -> impl Strategy<Value = BoxSpec> {
    (interval(), interval(), any::<bool>()).prop_map(|(a, b, first)| {
        let (a, b) = if first {
            (a, b.closure())
        } else {
            (a.closure(), b)
        };
        BoxSpec::new(vec![a, b]).unwrap()
    })
}

/// Points of the 1/16 lattice covering the bounds used above.
fn lattice() -> Vec<Scalar> {
    (-400..=400).map(|k| Scalar::ratio(k, 16)).collect()
}

fn rational(range: i64) -> impl Strategy<Value = Scalar> {
    (1i64..=64).prop_flat_map(move |d| (-range * d..=range * d).prop_map(move |n| Scalar::ratio(n, d)))
}

fn point(dim: usize, range: i64) -> impl Strategy<Value = Point> {
    prop::collection::vec(rational(range), dim).prop_map(|c| Point::new(c).unwrap())
}

/// Coordinates on or next to breakpoints of the default schedule.
fn edgy(range: i64) -> impl Strategy<Value = Scalar> {
    prop_oneof![
        rational(range),
        (0..3u32, 0u32..6, any::<bool>()).prop_map(|(n, j, neg)| {
            let v = two_to(n) + default_a(n, j);
            if neg {
                -v
            } else {
                v
            }
        }),
        (0..5u32, any::<bool>()).prop_map(|(n, neg)| if neg { -two_to(n) } else { two_to(n) }),
    ]
}

fn edgy_point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(edgy(8), dim).prop_map(|c| Point::new(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn interval_intersection_matches_lattice(a in interval(), b in interval()) {
        let grid = lattice();
        let shared = grid.iter().any(|x| a.contains(x) && b.contains(x));
        prop_assert_eq!(a.intersects(&b), shared);
        prop_assert_eq!(a.intersects(&b), b.intersects(&a));
        let inner = grid.iter().any(|x| a.interior_contains(x) && b.interior_contains(x));
        prop_assert_eq!(a.interiors_overlap(&b), inner);
    }

    #[test]
    fn reflection_flips_membership(a in interval(), k in -200i64..200) {
        let x = Scalar::ratio(k, 16);
        prop_assert_eq!(a.contains(&x), a.reflected().contains(&-&x));
    }

    #[test]
    fn interiors_disjoint_matches_lattice(a in planar_box(), b in planar_box()) {
        let grid: Vec<Scalar> = (-30..30).map(|k| Scalar::ratio(2 * k + 1, 16)).collect();
        let mut overlap = false;
        'outer: for x in &grid {
            for y in &grid {
                let p = Point::new(vec![x.clone(), y.clone()]).unwrap();
                if a.interior_contains(&p).unwrap() && b.interior_contains(&p).unwrap() {
                    overlap = true;
                    break 'outer;
                }
            }
        }
        prop_assert_eq!(a.interiors_disjoint(&b).unwrap(), !overlap);
    }

    #[test]
    fn box_intersection_matches_lattice(a in planar_box(), b in planar_box()) {
        let grid: Vec<Scalar> = (-200..=200).map(|k| Scalar::ratio(k, 16)).collect();
        let xs: Vec<&Scalar> = grid.iter().filter(|x| a.axis(1).contains(x) && b.axis(1).contains(x)).collect();
        let ys: Vec<&Scalar> = grid.iter().filter(|y| a.axis(2).contains(y) && b.axis(2).contains(y)).collect();
        prop_assert_eq!(a.intersects(&b).unwrap(), !xs.is_empty() && !ys.is_empty());
    }

    #[test]
    fn covering_is_a_partition(p in prop_oneof![point(3, 20), edgy_point(3)]) {
        let id = locate_sigma(&p);
        prop_assert_eq!(members_containing(&p, 6), vec![id]);
        prop_assert!(sigma_spec(id, 3).unwrap().contains(&p).unwrap());
        prop_assert!(sigma_spec(id.with_sign_flipped(), 3).unwrap().contains(&-&p).unwrap());
    }

    #[test]
    fn refinement_has_order_two(p in prop_oneof![point(2, 10), edgy_point(2)]) {
        let sched = RefinementSchedule::default();
        let ids = locate_tau(&p, &sched);
        prop_assert!((1..=2).contains(&ids.len()));
        prop_assert_eq!(&ids, &default_tiles_containing(&p, 5));
        for id in &ids {
            prop_assert!(tau_spec(*id, 2, &sched).unwrap().contains(&p).unwrap());
            prop_assert_eq!(id.parent(), locate_sigma(&p));
        }
        if ids.len() == 2 {
            let a = tau_spec(ids[0], 2, &sched).unwrap();
            let b = tau_spec(ids[1], 2, &sched).unwrap();
            prop_assert!(a.interiors_disjoint(&b).unwrap());
        }
    }

    #[test]
    fn double_points_sit_on_inner_breakpoints(n in 0u32..4, j in 1u32..8, axis in 1usize..=2, neg: bool, other in -64i64..=64) {
        let sched = RefinementSchedule::default();
        let mut c = vec![Scalar::ratio(other, 64); 2];
        let v = two_to(n) + default_a(n, j);
        c[axis - 1] = if neg { -v } else { v };
        let p = Point::new(c).unwrap();
        prop_assert_eq!(locate_tau(&p, &sched).len(), 2);
        let mut c = p.coords().to_vec();
        c[axis - 1] = &c[axis - 1] + Scalar::pow2(-40);
        prop_assert_eq!(locate_tau(&Point::new(c).unwrap(), &sched).len(), 1);
    }

    #[test]
    fn window_lists_every_tile_it_meets(lo in point(2, 6), w in 1i64..16, h in 1i64..16, probes in prop::collection::vec((0i64..=64, 0i64..=64), 8)) {
        let sched = RefinementSchedule::default();
        let width = Scalar::ratio(w, 8);
        let height = Scalar::ratio(h, 8);
        let window = BoxSpec::closed(vec![
            (lo.coord(1).clone(), lo.coord(1) + &width),
            (lo.coord(2).clone(), lo.coord(2) + &height),
        ]).unwrap();
        match tau_in_window(&window, &sched, 5_000) {
            TileWindow::Complete(ids) => {
                for (a, b) in probes {
                    let p = Point::new(vec![
                        lo.coord(1) + &width * Scalar::ratio(a, 64),
                        lo.coord(2) + &height * Scalar::ratio(b, 64),
                    ]).unwrap();
                    for id in locate_tau(&p, &sched) {
                        prop_assert!(ids.contains(&id), "{} missing for {}", id, p);
                    }
                }
                for (i, a) in ids.iter().enumerate() {
                    for b in &ids[i + 1..] {
                        let ta = tau_spec(*a, 2, &sched).unwrap();
                        let tb = tau_spec(*b, 2, &sched).unwrap();
                        prop_assert!(ta.interiors_disjoint(&tb).unwrap());
                    }
                }
            }
            TileWindow::Overflow(_) => {
                // Only a window reaching a face |t| = 2^k can overflow.
                let touches = window.axes().iter().any(|a| {
                    (0..5).any(|k| {
                        let f = two_to(k);
                        a.contains(&f) || a.contains(&-f)
                    })
                });
                prop_assert!(touches);
            }
        }
    }

    #[test]
    fn sandwich_holds_on_standard_spaces(dim in 1usize..=4, x in point(4, 10), ell in any::<bool>()) {
        let x = Point::new(x.coords()[..dim].to_vec()).unwrap();
        let (space, set) = if ell {
            (NormedSpaceModel::ell1(dim).unwrap(), NormingSet::sign_vectors(dim))
        } else {
            (NormedSpaceModel::sup(dim).unwrap(), NormingSet::coordinates(dim))
        };
        let model = build_pairs(&space, &set).unwrap();
        prop_assert!(sandwich_holds(&model, &x).unwrap());
        let image = embed(&model, &x).unwrap();
        let norm = if ell { ell1(x.coords()) } else { sup(x.coords()) };
        prop_assert!(sup(image.coords()) <= norm);
        let twice = embed(&model, &x.scaled(&Scalar::from_int(2))).unwrap();
        prop_assert_eq!(twice, image.scaled(&Scalar::from_int(2)));
    }

    #[test]
    fn norming_check_matches_vertex_enumeration(
        picks in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 1..5),
        alpha in prop_oneof![Just((1i64, 1i64)), Just((1, 2)), Just((3, 4))],
    ) {
        // Functionals on the l1 plane, rescaled to dual norm 1.
        let fs: Vec<Vec<Scalar>> = picks
            .into_iter()
            .filter(|c| c.iter().any(|&v| v != 0))
            .map(|c| {
                let m = c.iter().map(|v| v.abs()).max().unwrap();
                c.into_iter().map(|v| Scalar::ratio(v, m)).collect()
            })
            .collect();
        prop_assume!(!fs.is_empty());
        let space = NormedSpaceModel::ell1(2).unwrap();
        let alpha = Scalar::ratio(alpha.0, alpha.1);
        let set = NormingSet::new(fs.iter().cloned().map(lidless::Functional::new).collect(), alpha.clone());
        prop_assert_eq!(check_norming(&set, &space).unwrap(), is_norming(&fs, &alpha, ell1));
    }

    #[test]
    fn scalars_round_trip_through_text(n in -100_000i64..100_000, d in 1i64..100_000) {
        let x = Scalar::ratio(n, d);
        prop_assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
    }
}
