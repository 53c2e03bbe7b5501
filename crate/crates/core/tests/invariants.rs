use modmetric::fixedpoint::{check_fund1, check_fund2, estimate_min_k, solve, verify_contraction, ContractionMode, ContractionParams, SelfMap, StopReason};
use modmetric::induced::{d_w, d_w_star, BisectionConfig};
use modmetric::sampling::SamplingPlan;
use modmetric::sets::{default_schedule, member_star, member_zero, partition_star, DEFAULT_ZERO_TOL};
use modmetric::spaces::build_euclidean;
use modmetric::{builtin_modular, check_property, Property, BuiltinKind, Cell, ExtReal, LandmassGrid, Point, PointSpace};
use proptest::prelude::*;

fn ext() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        4 => (0.0..1e6f64).prop_map(ExtReal::of),
        1 => Just(ExtReal::INFINITY),
        1 => Just(ExtReal::ZERO),
    ]
}

fn mask() -> impl Strategy<Value = (usize, usize, Vec<bool>)> {
    (1..=8usize, 1..=8usize)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), proptest::collection::vec(proptest::bool::weighted(0.6), r * c)))
        .prop_filter("needs land", |(_, _, land)| land.iter().any(|&b| b))
}

// all-pairs hop counts by Floyd-Warshall over the land mask
fn floyd(rows: usize, cols: usize, land: &[bool]) -> Vec<Vec<f64>> {
    let n = rows * cols;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        if !land[i] {
            continue;
        }
        d[i][i] = 0.0;
        let (r, c) = (i / cols, i % cols);
        let mut link = |j: usize| {
            if land[j] {
                d[i][j] = 1.0;
            }
        };
        if r > 0 {
            link(i - cols);
        }
        if r + 1 < rows {
            link(i + cols);
        }
        if c > 0 {
            link(i - 1);
        }
        if c + 1 < cols {
            link(i + 1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    parent[i] = root;
    root
}

// land components by union-find, as sorted lists of (row, col)
fn components(rows: usize, cols: usize, land: &[bool]) -> Vec<Vec<(usize, usize)>> {
    let n = rows * cols;
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        let right = (i % cols + 1 < cols).then_some(i + 1);
        let down = (i + cols < n).then_some(i + cols);
        for j in [right, down].into_iter().flatten() {
            if land[i] && land[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for i in (0..n).filter(|&i| land[i]) {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push((i / cols, i % cols));
    }
    let mut out: Vec<_> = groups.into_values().collect();
    out.sort();
    out
}

fn cell(p: &Point) -> (usize, usize) {
    match p {
        Point::Cell(c) => (c.row, c.col),
        other => panic!("not a cell: {other}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extreal_addition_commutes_and_absorbs(a in ext(), b in ext(), c in ext()) {
        prop_assert_eq!(a + b, b + a);
        prop_assert!(a <= a + b);
        if a <= b {
            prop_assert!(a + c <= b + c);
        }
        prop_assert_eq!(a + ExtReal::INFINITY, ExtReal::INFINITY);
        prop_assert_eq!(a + ExtReal::ZERO, a);
    }

    #[test]
    fn geodesic_matches_floyd_warshall((rows, cols, land) in mask(), size in 0.1..5.0f64) {
        let grid = LandmassGrid::from_mask(rows, cols, land.clone(), size).unwrap();
        let oracle = floyd(rows, cols, &land);
        let cells = grid.land_cells().to_vec();
        for &a in &cells {
            for &b in &cells {
                let got = grid.geodesic(a, b).unwrap();
                let hops = oracle[a.row * cols + a.col][b.row * cols + b.col];
                if hops.is_finite() {
                    prop_assert_eq!(got, ExtReal::of(hops * size));
                } else {
                    prop_assert!(got.is_infinite());
                }
                prop_assert_eq!(got, grid.geodesic(b, a).unwrap());
                prop_assert_eq!(got.is_zero(), a == b);
            }
        }
    }

    #[test]
    fn geodesic_triangle((rows, cols, land) in mask()) {
        let grid = LandmassGrid::from_mask(rows, cols, land, 1.0).unwrap();
        let cells = grid.land_cells();
        for &a in cells.iter().take(12) {
            for &b in cells {
                for &c in cells.iter().take(12) {
                    let ab = grid.geodesic(a, b).unwrap();
                    prop_assert!(ab <= grid.geodesic(a, c).unwrap() + grid.geodesic(c, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn speed_partition_is_the_component_partition((rows, cols, land) in mask()) {
        let grid = LandmassGrid::from_mask(rows, cols, land.clone(), 1.0).unwrap();
        let space = PointSpace::from_landmass(grid);
        let w = builtin_modular(&space, BuiltinKind::AverageSpeed);
        let partition = partition_star(&w, &space, &SamplingPlan::default().lambda_grid).unwrap();
        let mut got: Vec<Vec<(usize, usize)>> = partition
            .classes
            .iter()
            .map(|class| {
                let mut c: Vec<_> = class.iter().map(cell).collect();
                c.sort();
                c
            })
            .collect();
        got.sort();
        prop_assert_eq!(got, components(rows, cols, &land));
    }

    #[test]
    fn average_speed_is_scaled_metric(x in -10.0..10.0f64, y in -10.0..10.0f64, lambda in 1e-6..1e6f64) {
        let line = build_euclidean(1).unwrap();
        let speed = builtin_modular(&line, BuiltinKind::AverageSpeed);
        let scaled = builtin_modular(&line, BuiltinKind::MetricAsModular).scaled();
        let (px, py) = (Point::real(x), Point::real(y));
        prop_assert_eq!(speed.eval(lambda, &px, &py).unwrap(), scaled.eval(lambda, &px, &py).unwrap());
    }

    #[test]
    fn zero_membership_implies_star(x in -10.0..10.0f64, y in -10.0..10.0f64, kind in 0..3usize) {
        let line = build_euclidean(1).unwrap();
        let w = builtin_modular(&line, BuiltinKind::ALL[kind]);
        let (px, py) = (Point::real(x), Point::real(y));
        let grid = SamplingPlan::default().lambda_grid;
        if member_zero(&w, &px, &py, &default_schedule(), DEFAULT_ZERO_TOL).unwrap() {
            prop_assert!(member_star(&w, &px, &py, &grid).unwrap());
        }
    }

    #[test]
    fn induced_metrics_of_average_speed(d in 1e-3..1e3f64) {
        let line = build_euclidean(1).unwrap();
        let w = builtin_modular(&line, BuiltinKind::AverageSpeed);
        let cfg = BisectionConfig::default();
        let (x, y) = (Point::real(0.0), Point::real(d));
        let dw = d_w(&w, &x, &y, &cfg).unwrap().value.to_f64();
        let dws = d_w_star(&w, &x, &y, &cfg).unwrap().value.to_f64();
        // bisection returns a point within tol above the infimum
        prop_assert!(dw >= d.sqrt() - 1e-12 && dw - d.sqrt() <= 1e-6, "{} vs {}", dw, d.sqrt());
        prop_assert!(dws >= d - 1e-12 && dws - d <= 1e-6, "{} vs {}", dws, d);
    }

    #[test]
    fn contraction_is_monotone_in_k(a in 0.05..0.95f64, k in 0.05..0.95f64, bump in 0.0..1.0f64, seed in any::<u64>()) {
        let line = build_euclidean(1).unwrap();
        let w = builtin_modular(&line, BuiltinKind::AverageSpeed);
        let t = SelfMap::affine(&line, a, 0.5).unwrap();
        let plan = SamplingPlan::with_seed(seed).samples(100);
        let k2 = k + bump * (1.0 - k) * 0.99;
        let lo = verify_contraction(&w, &t, ContractionParams::new(k, 1.0).unwrap(), &plan).unwrap();
        let hi = verify_contraction(&w, &t, ContractionParams::new(k2, 1.0).unwrap(), &plan).unwrap();
        if lo.passed() {
            prop_assert!(hi.passed());
        }
        // closed form: passes iff a <= k
        prop_assert_eq!(lo.passed(), a <= k * (1.0 + 1e-9));
    }

    #[test]
    fn solve_meets_its_tolerance(a in 0.05..0.9f64, x0 in -10.0..10.0f64, tol in 1e-10..1e-2f64) {
        let line = build_euclidean(1).unwrap();
        let w = builtin_modular(&line, BuiltinKind::AverageSpeed);
        let t = SelfMap::affine(&line, a, 1.0).unwrap();
        let s = solve(&w, &t, &Point::real(x0), 1.0, tol, 10_000).unwrap();
        prop_assert_eq!(s.stop_reason, StopReason::ResidualMet);
        let last = *s.residual_trace.last().unwrap();
        prop_assert!(last <= ExtReal::of(tol));
        // strict contraction: residuals never increase
        for pair in s.residual_trace.windows(2) {
            prop_assert!(pair[1] <= pair[0]);
        }
        let fixed = 1.0 / (1.0 - a);
        let x = s.approx_fixed_point.unwrap().as_vector().unwrap()[0];
        prop_assert!((x - fixed).abs() <= tol * a / (1.0 - a) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fundamental_inequalities_hold_for_contractions(a in 0.05..0.9f64, b in -2.0..2.0f64, seed in any::<u64>()) {
        let line = build_euclidean(1).unwrap();
        let w = builtin_modular(&line, BuiltinKind::AverageSpeed);
        let t = SelfMap::affine(&line, a, b).unwrap();
        let plan = SamplingPlan::with_seed(seed).samples(200);
        let plain = ContractionParams::new((a + 0.05).min(0.95), 1.0).unwrap();
        let r1 = check_fund1(&w, &t, plain, &plan).unwrap();
        prop_assert!(r1.passed(), "{:?}", r1.violations.first());
        let strong = ContractionParams::new((a.sqrt() + 0.02).min(0.99), 1.0).unwrap();
        let r2 = check_fund2(&w, &t, strong, &plan).unwrap();
        prop_assert!(r2.passed(), "{:?}", r2.violations.first());
    }

    #[test]
    fn axioms_hold_for_every_seed(seed in any::<u64>(), kind in 0..3usize) {
        let line = build_euclidean(1).unwrap();
        let w = builtin_modular(&line, BuiltinKind::ALL[kind]);
        let plan = SamplingPlan::with_seed(seed).samples(200);
        for property in [Property::Axiom1, Property::Symmetry, Property::Triangle3, Property::MonotoneLambda] {
            let report = check_property(&w, &line, property, &plan).unwrap();
            prop_assert!(report.passed(), "{:?} {:?}", property, report.violations.first());
        }
    }
}

#[test]
fn min_k_for_affine_maps() {
    let line = build_euclidean(1).unwrap();
    let w = builtin_modular(&line, BuiltinKind::AverageSpeed);
    let plan = SamplingPlan::default().samples(200);
    for a in [0.2, 0.5, 0.8] {
        let t = SelfMap::affine(&line, a, -1.0).unwrap();
        let plain = estimate_min_k(&w, &t, 1.0, ContractionMode::Plain, &plan, 1e-4).unwrap().unwrap();
        assert!((plain - a).abs() <= 1e-4, "{a}: {plain}");
        let strong = estimate_min_k(&w, &t, 1.0, ContractionMode::Strong, &plan, 1e-4).unwrap().unwrap();
        assert!((strong - a.sqrt()).abs() <= 1e-4, "{a}: {strong}");
    }
}

#[test]
fn two_islands_are_two_classes() {
    let map = "##..\n##..\n...#\n...#\n";
    let grid = LandmassGrid::parse(map).unwrap();
    assert_eq!(grid.component_count(), 2);
    let space = PointSpace::from_landmass(grid);
    let w = builtin_modular(&space, BuiltinKind::AverageSpeed);
    let p = partition_star(&w, &space, &[1.0]).unwrap();
    assert_eq!(p.classes.len(), 2);
    let far = w.eval(1e6, &Point::Cell(Cell::new(0, 0)), &Point::Cell(Cell::new(3, 3))).unwrap();
    assert!(far.is_infinite());
}
