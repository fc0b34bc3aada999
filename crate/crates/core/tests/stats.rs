use knotscope::classify::KnotType;
use knotscope::features::FeatureRecord;
use knotscope::geometry::GeometryRecord;
use knotscope::stats::{
    average_feature_by_type, correlate_by_group, linear_fit, pearson, spearman, GroupBy, JoinedRecord, Method,
    Variable, DEFAULT_PAIRS,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn record(id: usize, length: usize, t: Option<KnotType>, i: f64, hull: f64) -> JoinedRecord {
    JoinedRecord {
        id: format!("k{id}"),
        length,
        knot_type: t,
        features: FeatureRecord {
            integral_i: i,
            n_bars: id % 7 + 1,
            max_bar: i / 2.0,
            delta_eps: Some(0.1),
            spike_filtered: false,
        },
        geometry: GeometryRecord {
            rs_radius: hull.cbrt(),
            rs_volume: 4.0 * hull,
            hull_volume: hull,
            rg: hull.sqrt(),
            total_curvature: 10.0 + (id as f64).sin(),
            total_torsion: 5.0 + (id as f64 * 1.7).cos(),
            acn: 2.0 + i,
        },
    }
}

#[test]
fn pearson_examples() {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
    assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    assert_eq!(pearson(&[1.0], &[1.0]), None);
    assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 8.0, 27.0, 64.0]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn linear_fit_examples() {
    let exact: Vec<(f64, f64)> = (1..=5).map(|x| (x as f64, 2.0 * x as f64)).collect();
    let f = linear_fit(&exact).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-12 && f.intercept.abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    assert!((linear_fit(&[(0.0, 1.0), (1.0, 5.0)]).unwrap().r_squared - 1.0).abs() < 1e-12);
    assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    assert!(linear_fit(&[(1.0, 1.0)]).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noisy: Vec<(f64, f64)> = (1..=10).map(|x| (x as f64, x as f64 + rng.gen_range(-0.01..0.01))).collect();
    let f = linear_fit(&noisy).unwrap();
    assert!((0.99..=1.01).contains(&f.slope));
}

#[test]
fn anticorrelated_group_gives_minus_one() {
    let recs: Vec<JoinedRecord> = (0..10).map(|i| record(i, 50, None, i as f64, 100.0 - 3.0 * i as f64)).collect();
    let table = correlate_by_group(&recs, GroupBy::Length, &[(Variable::I, Variable::HullVolume)], Method::Pearson);
    assert_eq!(table.len(), 1);
    assert!((table[0].r + 1.0).abs() < 1e-12);
    assert_eq!((table[0].length, table[0].group.as_str(), table[0].n), (50, "all", 10));
}

#[test]
fn grouping_by_type_and_small_groups() {
    let mut recs = Vec::new();
    for i in 0..12 {
        let t = if i % 2 == 0 { Some(KnotType::Unknot) } else { Some(KnotType::K3_1) };
        recs.push(record(i, 20 + 20 * (i % 3), t, (i * i) as f64, 1.0 + i as f64));
    }
    // a lone trefoil at a new length is too small to correlate
    recs.push(record(99, 500, Some(KnotType::K3_1), 1.0, 1.0));
    let table = correlate_by_group(&recs, GroupBy::KnotTypeLength, &DEFAULT_PAIRS, Method::Pearson);
    assert!(table.iter().all(|r| r.length != 500));
    assert!(table.iter().all(|r| r.n >= 2 && (-1.0..=1.0).contains(&r.r)));
    let groups: std::collections::BTreeSet<(usize, String)> = table.iter().map(|r| (r.length, r.group.clone())).collect();
    assert_eq!(groups.len(), 6);

    // every row can be recomputed from the records it summarises
    for row in &table {
        let x: Variable = row.x.parse().unwrap();
        let y: Variable = row.y.parse().unwrap();
        let members: Vec<&JoinedRecord> = recs
            .iter()
            .filter(|r| r.length == row.length && r.knot_type.map(|t| t.label()) == Some(row.group.as_str()))
            .collect();
        let xs: Vec<f64> = members.iter().map(|r| x.value(r).unwrap()).collect();
        let ys: Vec<f64> = members.iter().map(|r| y.value(r).unwrap()).collect();
        assert_eq!(members.len(), row.n);
        assert_eq!(pearson(&xs, &ys).unwrap(), row.r);
    }
    let again = correlate_by_group(&recs, GroupBy::KnotTypeLength, &DEFAULT_PAIRS, Method::Pearson);
    assert_eq!(table, again);
}

#[test]
fn averages_by_type() {
    let recs: Vec<JoinedRecord> = (0..6)
        .map(|i| record(i, 100, Some(if i < 3 { KnotType::Unknot } else { KnotType::K4_1 }), 7.0, 1.0))
        .collect();
    let rows = average_feature_by_type(&recs, Variable::I);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!((r.mean, r.stderr, r.n, r.length), (7.0, 0.0, 3, 100));
        assert_eq!(r.feature, "I");
    }
    assert_eq!(rows[0].knot_type, "0_1");
    assert_eq!(rows[1].knot_type, "4_1");
    let spread: Vec<JoinedRecord> = [1.0, 2.0, 3.0, 4.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| record(i, 10, None, v, 1.0))
        .collect();
    let row = &average_feature_by_type(&spread, Variable::I)[0];
    // sample standard deviation of 1..4 is sqrt(5/3); stderr divides by sqrt(4)
    assert!((row.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
    assert_eq!(row.knot_type, "unclassified");
}

fn sample() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-100.0..100.0f64, -100.0..100.0f64), 3..40)
}

proptest! {
    #[test]
    fn pearson_affine_invariance(pts in sample(), a in 0.1..10.0f64, b in -50.0..50.0f64) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let Some(r) = pearson(&xs, &ys) else { return Ok(()) };
        let xt: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        prop_assert!((pearson(&xt, &ys).unwrap() - r).abs() < 1e-9);
        let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
        prop_assert!((pearson(&xs, &neg).unwrap() + r).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&r));
    }
}
