//! Cross-module property suites: randomized geometry invariants and
//! deterministic sweeps over every bundled system.

use divpoint::geometry::{
    apply_isometry, Isometry, Location, Point, Polygon, VertexMerger,
};
use divpoint::measures::{self, BoundaryPolicy, MeasureKind};
use divpoint::spectral::{
    build_matrix, count_subtiles, count_tiles, count_tiles_per_type, spectral_data,
};
use divpoint::substitution::SubstitutionSystem;
use divpoint::sysfile::{parse_system, serialize_system, systems_structurally_equal};
use divpoint::systems;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use proptest::prelude::*;

type Sys = SubstitutionSystem<f64>;

fn builtins() -> Vec<Sys> {
    vec![
        systems::penrose(),
        systems::square4(),
        systems::halfsquare(),
        systems::pinwheel(),
    ]
}

/// Largest level whose tile count stays under `cap`.
fn max_level(sys: &Sys, hard: usize, cap: u64) -> usize {
    let a = build_matrix(sys);
    (0..=hard)
        .take_while(|&k| count_tiles(&a, k).to_u64().is_some_and(|c| c <= cap))
        .last()
        .unwrap_or(0)
}

// --- randomized geometry ---------------------------------------------------

/// Random simple polygon, star-shaped around the origin: vertices at
/// jittered equally-spaced angles (every angular gap stays below π, so edges
/// live in disjoint sectors) with independent radii.
fn star_polygon() -> impl Strategy<Value = Polygon<f64>> {
    proptest::collection::vec((0.2f64..3.0, -0.3f64..0.3), 4..12).prop_map(|polar| {
        let n = polar.len();
        let step = std::f64::consts::TAU / n as f64;
        let verts: Vec<Point<f64>> = polar
            .into_iter()
            .enumerate()
            .map(|(i, (r, jitter))| {
                let t = (i as f64 + jitter) * step;
                Point::new(r * t.cos(), r * t.sin())
            })
            .collect();
        Polygon::new(verts).expect("star-shaped polygon around the origin is simple")
    })
}

fn random_isometry() -> impl Strategy<Value = Isometry<f64>> {
    (
        0.0f64..std::f64::consts::TAU,
        any::<bool>(),
        -5.0f64..5.0,
        -5.0f64..5.0,
    )
        .prop_map(|(theta, reflect, tx, ty)| {
            let base = if reflect {
                Isometry::reflection(theta)
            } else {
                Isometry::rotation(theta)
            };
            base.with_translation(Point::new(tx, ty))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn area_is_isometry_invariant(p in star_polygon(), h in random_isometry()) {
        let q = apply_isometry(&h, &p);
        prop_assert!((q.area() - p.area()).abs() <= 1e-10 * p.area());
    }
}

proptest! {
    #[test]
    fn self_intersection_area_is_area(p in star_polygon()) {
        prop_assert!((p.intersection_area(&p) - p.area()).abs() <= 1e-10 * p.area());
    }

    #[test]
    fn intersection_area_is_symmetric(p in star_polygon(), q in star_polygon()) {
        let pq = p.intersection_area(&q);
        let qp = q.intersection_area(&p);
        prop_assert!((pq - qp).abs() <= 1e-10 * p.area().max(q.area()));
        prop_assert!(pq >= 0.0);
    }

    #[test]
    fn vertex_merge_bounds(
        x in -10.0f64..10.0,
        y in -10.0f64..10.0,
        dir in 0.0f64..std::f64::consts::TAU,
        near in 0.0f64..0.2499,
        far in 4.001f64..50.0,
    ) {
        let pitch = 1e-7;
        let p = Point::new(x, y);
        // closer than pitch/4: always unified
        let q = p + Point::new(dir.cos(), dir.sin()) * (near * pitch);
        let mut m = VertexMerger::new(pitch);
        prop_assert_eq!(m.insert(p), m.insert(q));
        // farther than 4×pitch: never unified
        let r = p + Point::new(dir.cos(), dir.sin()) * (far * pitch);
        let mut m = VertexMerger::new(pitch);
        prop_assert_ne!(m.insert(p), m.insert(r));
    }

    #[test]
    fn expression_evaluator_handles_random_arithmetic(
        a in -100i32..100, b in -100i32..100, c in 1i32..100,
    ) {
        let src = format!("({a} + {b}) * {b} - {a} / {c}");
        let expect = (a as f64 + b as f64) * b as f64 - a as f64 / c as f64;
        let got: f64 = divpoint::expr::eval_expr(&src).unwrap();
        prop_assert!((got - expect).abs() <= 1e-9 * expect.abs().max(1.0));
    }
}

// --- deterministic sweeps over the bundled systems --------------------------

#[test]
fn builtin_validation_and_eigendata() {
    for sys in builtins() {
        let report = sys.validate();
        assert!(report.passed(), "{}:\n{report}", sys.name());
        let sd = spectral_data(&sys).unwrap();
        let lambda_sq = sys.lambda() * sys.lambda();
        assert!(
            (sd.gamma - lambda_sq).abs() <= 1e-9,
            "{}: gamma vs lambda^2",
            sys.name()
        );
        for (i, p) in sys.prototiles().iter().enumerate() {
            assert!(
                (sd.v_left[i] - p.shape.area()).abs() <= 1e-9,
                "{}: v_L({i}) vs area of {}",
                sys.name(),
                p.label
            );
        }
    }
}

#[test]
fn builtin_centroids_are_interior() {
    for sys in builtins() {
        for p in sys.prototiles() {
            assert_eq!(
                p.shape.locate(p.shape.centroid(), 1e-12),
                Location::Inside,
                "{}: centroid of {}",
                sys.name(),
                p.label
            );
            assert_eq!(
                p.shape.locate(p.puncture, 1e-12),
                Location::Inside,
                "{}: puncture of {}",
                sys.name(),
                p.label
            );
        }
    }
}

#[test]
fn builtin_counting_identities() {
    for sys in builtins() {
        let a = build_matrix(&sys);
        let kmax = max_level(&sys, 6, 200_000);
        for k in 0..=kmax {
            let level = sys.generate_level(k).unwrap();
            assert_eq!(
                level.len() as u64,
                count_tiles(&a, k).to_u64().unwrap(),
                "{} k={k}",
                sys.name()
            );
            let histogram = level.type_histogram(sys.prototiles().len());
            let per_type = count_tiles_per_type(&a, k);
            for (j, (got, want)) in histogram.iter().zip(&per_type).enumerate() {
                assert_eq!(*got, want.to_u64().unwrap(), "{} k={k} type {j}", sys.name());
            }
        }
        // per-root subtile counts
        for (i, root) in sys.roots().tiles.iter().enumerate() {
            let k = kmax.min(4);
            let subs = sys.subtiles_of(root, k).unwrap();
            assert_eq!(
                subs.len() as u64,
                count_subtiles(&a, k, i).to_u64().unwrap(),
                "{} root {i}",
                sys.name()
            );
        }
    }
}

#[test]
fn builtin_measure_normalization_is_exact() {
    let one = Ratio::new(1u64, 1u64);
    for sys in builtins() {
        let kmax = max_level(&sys, 4, 50_000);
        let mut level = sys.roots();
        for k in 0..=kmax {
            if k > 0 {
                level = sys.refine(&level).unwrap();
            }
            for kind in [MeasureKind::Xi, MeasureKind::Rho, MeasureKind::Sigma] {
                let mu = measures::build(kind, &sys, &level);
                assert_eq!(mu.total_exact(), one, "{} {kind} k={k}", sys.name());
                assert!(mu.atoms.iter().all(|a| a.numerator > 0));
            }
        }
    }
}

#[test]
fn builtin_hierarchy_containment() {
    for sys in builtins() {
        let k = max_level(&sys, 3, 2_000).min(3);
        if k == 0 {
            continue;
        }
        let parents = sys.generate_level(k - 1).unwrap();
        let children = sys.refine(&parents).unwrap();
        for child in &children.tiles {
            let cp = child.polygon(&sys);
            let parent = parents
                .tiles
                .iter()
                .filter(|p| p.address.is_prefix_of(&child.address))
                .collect::<Vec<_>>();
            assert_eq!(parent.len(), 1, "{}: unique parent", sys.name());
            let inter = parent[0].polygon(&sys).intersection_area(&cp);
            assert!(
                (inter - cp.area()).abs() < 1e-9,
                "{}: containment of {:?}",
                sys.name(),
                child.address
            );
        }
    }
}

#[test]
fn builtin_address_bijection() {
    for sys in builtins() {
        let k = max_level(&sys, 3, 1_000).min(3);
        let level = sys.generate_level(k).unwrap();
        // no duplicates
        let mut addresses: Vec<_> = level.tiles.iter().map(|t| t.address.clone()).collect();
        addresses.sort();
        addresses.dedup();
        assert_eq!(addresses.len(), level.len(), "{}", sys.name());
        // exactly the valid digit strings: count by walking the rules
        fn count_strings(sys: &Sys, ptype: usize, depth: usize) -> usize {
            if depth == 0 {
                return 1;
            }
            sys.rules()[ptype]
                .iter()
                .map(|cp| count_strings(sys, cp.child, depth - 1))
                .sum()
        }
        let expect: usize = (0..sys.prototiles().len())
            .map(|i| count_strings(&sys, i, k))
            .sum();
        assert_eq!(level.len(), expect, "{}", sys.name());
        // and every one resolves
        for t in &level.tiles {
            assert!(sys.tile_at(&t.address).is_ok());
        }
    }
}

#[test]
fn builtin_parse_roundtrip() {
    for sys in builtins() {
        let text = serialize_system(&sys);
        let back: Sys = parse_system(&text).unwrap();
        assert!(
            systems_structurally_equal(&sys, &back, 1e-12),
            "{} round-trip",
            sys.name()
        );
    }
}

#[test]
fn builtin_edge_mass_decay() {
    // ρ mass on every prototile edge decays: ρ_{k+2}(L) < ρ_k(L) for
    // 2 ≤ k ≤ 8, and ρ_k(L) stays under a λ^{-k} envelope fitted at k = 2
    // (with headroom: the normalized sequence may still rise toward its
    // limit after k = 2).
    for sys in builtins() {
        let top = max_level(&sys, 10, 500_000);
        let edges: Vec<_> = sys
            .roots()
            .tiles
            .iter()
            .flat_map(|t| {
                let n = sys.prototiles()[t.ptype].shape.vertices().len();
                let address = t.address.clone();
                let sys = &sys;
                (0..n).map(move |e| {
                    measures::EdgeRef::resolve(sys, address.clone(), e).unwrap()
                })
            })
            .collect();
        let mut masses: Vec<Vec<f64>> = vec![Vec::new(); edges.len()];
        let mut level = sys.roots();
        for k in 0..=top {
            if k > 0 {
                level = sys.refine(&level).unwrap();
            }
            let rho = measures::build_rho(&sys, &level);
            for (ei, edge) in edges.iter().enumerate() {
                masses[ei].push(rho.evaluate_on_edge(edge));
            }
        }
        let lambda = sys.lambda();
        for (ei, series) in masses.iter().enumerate() {
            for k in 2..=8usize.min(top.saturating_sub(2)) {
                assert!(
                    series[k + 2] < series[k],
                    "{} edge {ei}: rho_{}={} !< rho_{}={}",
                    sys.name(),
                    k + 2,
                    series[k + 2],
                    k,
                    series[k]
                );
            }
            if top >= 2 {
                let envelope = 1.5 * series[2] * lambda.powi(2);
                for (k, &mass) in series.iter().enumerate().skip(2) {
                    assert!(
                        mass <= envelope * lambda.powi(-(k as i32)),
                        "{} edge {ei} k={k}: {mass} above envelope",
                        sys.name()
                    );
                }
            }
        }
    }
}

#[test]
fn weak_star_proxy_on_level3_tiles() {
    // every level-3 tile: |μ_k(t) − m(t)| small at the largest feasible k,
    // for all three measures (convergence tested on the generating family)
    let sys: Sys = systems::penrose();
    let sd = spectral_data(&sys).unwrap();
    let targets = sys.generate_level(3).unwrap();
    let k = max_level(&sys, 16, 500_000);
    assert_eq!(k, 12);
    let level = sys.generate_level(k).unwrap();
    let xi = measures::build_xi(&sys, &level);
    let (rho, sigma) = measures::build_rho_sigma(&sys, &level);
    let mut worst = 0.0f64;
    for t in &targets.tiles {
        let m = measures::lebesgue_of_tile(&sd, t);
        let poly = t.polygon(&sys);
        for mu in [&xi, &rho, &sigma] {
            let gap = (mu.evaluate(&poly, BoundaryPolicy::Include) - m).abs();
            worst = worst.max(gap);
        }
    }
    assert!(worst <= 0.01, "worst level-3 gap {worst}");
}

#[test]
fn f32_pipeline_smoke() {
    let sys = systems::square4::<f32>();
    let level = sys.generate_level(3).unwrap();
    assert_eq!(level.len(), 64);
    let sd = spectral_data(&sys).unwrap();
    assert!((sd.gamma - 4.0).abs() < 1e-5);
    let xi = measures::build_xi(&sys, &level);
    assert_eq!(xi.total_exact(), Ratio::new(1, 1));
}
