use std::f64::consts::PI;

use agentmandering::grid::{build_grid_from_cells, build_grid_state, VoteModel};
use agentmandering::metrics::{
    district_geometry, metrics_report, partisan_bias, polsby_popper, population_deviation, population_deviation_of,
    unfairness, MetricsError, PdNormalization,
};
use agentmandering::{DualGraph, MetricsReport32, Plan, Region};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

/// Perimeter of a set of unit cells on a rows×cols grid, counted cell side
/// by cell side: a side is boundary when the cell across it is outside the
/// grid or in another district.
fn cell_perimeter(labels: &[u32], rows: usize, cols: usize, label: u32) -> f64 {
    let at = |r: isize, c: isize| -> Option<u32> {
        (r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols).then(|| labels[r as usize * cols + c as usize])
    };
    let mut sides = 0;
    for r in 0..rows as isize {
        for c in 0..cols as isize {
            if at(r, c) != Some(label) {
                continue;
            }
            for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                if at(r + dr, c + dc) != Some(label) {
                    sides += 1;
                }
            }
        }
    }
    sides as f64
}

#[test]
fn geometry_examples() {
    let g = build_grid_state(2, 2, 100, VoteModel::Uniform5050, 0).unwrap();
    let whole = Plan::whole(&g, &Region::all(&g));
    let geo = district_geometry::<f64>(&whole, &g);
    assert_eq!((geo[0].area, geo[0].perimeter), (4.0, 8.0));
    assert!(close(polsby_popper::<f64>(&whole, &g).unwrap().avg, PI / 4.0));

    let rows = Plan::from_labels(vec![1, 1, 2, 2], 2).unwrap();
    for d in district_geometry::<f64>(&rows, &g) {
        assert_eq!((d.area, d.perimeter), (2.0, 6.0));
    }
    assert!(close(polsby_popper::<f64>(&rows, &g).unwrap().min, 8.0 * PI / 36.0));

    let g3 = build_grid_state(3, 3, 1, VoteModel::Uniform5050, 0).unwrap();
    let ell = Plan::from_labels(vec![1, 2, 2, 1, 1, 2, 2, 2, 2], 2).unwrap();
    let d = &district_geometry::<f64>(&ell, &g3)[0];
    assert_eq!((d.area, d.perimeter), (3.0, 8.0));
    assert!(close(d.polsby_popper().unwrap(), 12.0 * PI / 64.0));
}

#[test]
fn population_deviation_examples() {
    let rel = PdNormalization::Relative;
    assert_eq!(population_deviation_of::<f64>(&[100, 100], rel), 0.0);
    assert!(close(population_deviation_of::<f64>(&[110, 90], rel), 0.10));
    assert!(close(population_deviation_of::<f64>(&[95, 100, 105], rel), 10.0 / 3.0 / 100.0));
    assert!(close(population_deviation_of::<f64>(&[110, 90], PdNormalization::RawPersons), 10.0));
}

fn strip(cells: &[(u64, f64)]) -> (DualGraph, Plan) {
    let g = build_grid_from_cells(1, cells.len(), cells).unwrap();
    let n = cells.len() as u32;
    (g, Plan::from_labels((1..=n).collect(), n).unwrap())
}

#[test]
fn bias_and_unfairness_examples() {
    let (g, p) = strip(&[(100, 0.5), (100, 0.5)]);
    assert_eq!(partisan_bias::<f64>(&p, &g).unwrap(), 0.0);
    assert_eq!(unfairness::<f64>(&p, &g).unwrap(), 0.5);

    let (g, p) = strip(&[(100, 0.6)]);
    assert!(close(partisan_bias::<f64>(&p, &g).unwrap(), 0.2));
    assert!(close(unfairness::<f64>(&p, &g).unwrap(), 0.4));

    let (g, p) = strip(&[(100, 0.55), (100, 0.40)]);
    assert!(close(partisan_bias::<f64>(&p, &g).unwrap(), -0.05));

    let (g, p) = strip(&[(100, 0.7), (300, 0.4)]);
    assert!(close(unfairness::<f64>(&p, &g).unwrap(), 0.375));
}

#[test]
fn silent_district_is_an_error() {
    let (g, p) = strip(&[(0, 0.5), (100, 0.5)]);
    let err = partisan_bias::<f64>(&p, &g).unwrap_err();
    assert_eq!(err, MetricsError::NoVotes { label: 1 });
    assert!(unfairness::<f64>(&p, &g).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let g = build_grid_state(4, 4, 37, VoteModel::Clustered { p_core: 0.7, p_fringe: 0.3 }, 9).unwrap();
    let plan = Plan::from_labels(vec![1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4], 4).unwrap();
    let r64 = metrics_report::<f64>(&plan, &g, PdNormalization::Relative).unwrap();
    let r32: MetricsReport32 = metrics_report::<f32>(&plan, &g, PdNormalization::Relative).unwrap();
    for (a, b) in r64.headline().iter().zip(r32.headline()) {
        assert!((a - b as f64).abs() < 1e-5, "{a} vs {b}");
    }
}

fn labels_strategy() -> impl Strategy<Value = Vec<u32>> {
    // 3x4 grid with 3 districts; every label present
    proptest::collection::vec(1u32..=3, 12).prop_filter("all labels", |v| (1..=3).all(|l| v.contains(&l)))
}

proptest! {
    #[test]
    fn perimeter_matches_cell_count(labels in labels_strategy()) {
        let g = build_grid_state(3, 4, 10, VoteModel::Uniform5050, 0).unwrap();
        let plan = Plan::from_labels(labels.clone(), 3).unwrap();
        for d in district_geometry::<f64>(&plan, &g) {
            prop_assert_eq!(d.perimeter, cell_perimeter(&labels, 3, 4, d.label));
            prop_assert_eq!(d.area, labels.iter().filter(|&&l| l == d.label).count() as f64);
        }
    }

    #[test]
    fn perimeter_accounting_identity(labels in labels_strategy()) {
        let g = build_grid_state(3, 4, 10, VoteModel::Uniform5050, 0).unwrap();
        let plan = Plan::from_labels(labels, 3).unwrap();
        let geo = district_geometry::<f64>(&plan, &g);
        let cut: f64 = g.edges().iter().zip(g.endpoints())
            .filter(|(_, &(a, b))| plan.label(a) != plan.label(b))
            .map(|(e, _)| e.shared_boundary)
            .sum();
        let outer: f64 = g.units().iter().map(|u| u.outer_boundary).sum();
        let per: f64 = geo.iter().map(|d| d.perimeter).sum();
        prop_assert!(close(per - 2.0 * cut, outer));
        prop_assert!(close(geo.iter().map(|d| d.area).sum::<f64>(), 12.0));
    }

    #[test]
    fn pps_is_dimensionless(labels in labels_strategy(), s in 0.01f64..100.0) {
        let g = build_grid_state(3, 4, 10, VoteModel::Uniform5050, 0).unwrap();
        let mut raw = g.raw().clone();
        let k = s.sqrt();
        for u in &mut raw.units {
            u.area *= s;
            u.outer_boundary *= k;
        }
        for e in &mut raw.edges {
            e.shared_boundary *= k;
        }
        let scaled = DualGraph::new(raw).unwrap();
        let plan = Plan::from_labels(labels, 3).unwrap();
        let a = polsby_popper::<f64>(&plan, &g).unwrap();
        let b = polsby_popper::<f64>(&plan, &scaled).unwrap();
        for (x, y) in a.per_district.iter().zip(&b.per_district) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs());
            prop_assert!(*x > 0.0 && *x <= 1.0);
        }
        prop_assert!(a.min <= a.avg);
    }

    #[test]
    fn vote_swap_negates_bias(
        shares in proptest::collection::vec(0.0f64..=1.0, 12),
        labels in labels_strategy(),
        scale in 1u64..50,
    ) {
        let cells: Vec<(u64, f64)> = shares.iter().map(|&s| (10, s)).collect();
        let g = build_grid_from_cells(3, 4, &cells).unwrap();
        let mut raw = g.raw().clone();
        for u in &mut raw.units {
            std::mem::swap(&mut u.dem_votes, &mut u.rep_votes);
        }
        let swapped = DualGraph::new(raw).unwrap();
        let plan = Plan::from_labels(labels, 3).unwrap();
        prop_assert_eq!(partisan_bias::<f64>(&plan, &g).unwrap(), -partisan_bias::<f64>(&plan, &swapped).unwrap());
        let u = unfairness::<f64>(&plan, &g).unwrap();
        prop_assert!(close(u, unfairness::<f64>(&plan, &swapped).unwrap()));
        prop_assert!((0.0..=1.0).contains(&u));

        // uniform population scaling leaves unfairness unchanged
        let big: Vec<(u64, f64)> = shares.iter().map(|&s| (10 * scale, s)).collect();
        let gb = build_grid_from_cells(3, 4, &big).unwrap();
        prop_assert!(close(u, unfairness::<f64>(&plan, &gb).unwrap()));
    }

    #[test]
    fn one_district_has_no_deviation(rows in 1usize..5, cols in 1usize..5) {
        let g = build_grid_state(rows, cols, 13, VoteModel::Uniform5050, 0).unwrap();
        let plan = Plan::whole(&g, &Region::all(&g));
        prop_assert_eq!(population_deviation::<f64>(&plan, &g, PdNormalization::Relative), 0.0);
    }
}
