//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its timing. Thresholds and tolerances are pinned in the assertions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use punfold::coloring::{
    colored_cone_ball, extend_coloring, find_foldable_coloring, round_invariant_holds,
    ExtendOptions, VertexColoring,
};
use punfold::complex::{
    cone, find_shelling, generate, is_closed_surface_sphere, is_cycle_graph_faces, polygon,
    Face, GeneratorKind, SimplicialComplex, VertexId,
};
use punfold::cover::{
    build_cover, check_color_equivalence, Correspondence, ReferenceOracle, TrivialOracle,
};
use punfold::planner::{search_cycle_plan, CyclePlan, CycleSearchSpec};
use punfold::projectivity::{odd_subcomplex, projectivity, projectivity_group, FacetPath};
use punfold::subdivision::{fresh_vertex_id, stellar_subdivide_edge};
use punfold::unfolding::{
    component_complex, components, partial_unfold, resolve_component, verify_cover,
};

fn boundary_simplex(d: usize) -> SimplicialComplex {
    generate(&GeneratorKind::BoundarySimplex { d }).unwrap()
}

fn cross_polytope(d: usize) -> SimplicialComplex {
    generate(&GeneratorKind::CrossPolytope { d }).unwrap()
}

fn cyclic_sphere(polytope_dim: usize, n: usize) -> SimplicialComplex {
    generate(&GeneratorKind::CyclicSphere { polytope_dim, n }).unwrap()
}

fn starred_simplex(d: usize) -> SimplicialComplex {
    generate(&GeneratorKind::StarredSimplex { d }).unwrap()
}

/// Closed corpus members plus seeded single-edge perturbations of them.
fn corpus() -> Vec<(String, SimplicialComplex)> {
    let mut out: Vec<(String, SimplicialComplex)> = vec![
        ("octahedron".into(), cross_polytope(2)),
        ("cross_polytope_3".into(), cross_polytope(3)),
        ("cross_polytope_4".into(), cross_polytope(4)),
        ("boundary_simplex_2".into(), boundary_simplex(2)),
        ("boundary_simplex_3".into(), boundary_simplex(3)),
        ("boundary_simplex_4".into(), boundary_simplex(4)),
        ("cyclic_3_6".into(), cyclic_sphere(3, 6)),
        ("cyclic_4_7".into(), cyclic_sphere(4, 7)),
        ("cyclic_4_8".into(), cyclic_sphere(4, 8)),
        (
            "barycentric_boundary_simplex_2".into(),
            punfold::subdivision::barycentric_subdivide(&boundary_simplex(2)).complex,
        ),
        ("starred_triangle".into(), starred_simplex(2)),
        ("starred_simplex_3".into(), starred_simplex(3)),
        ("cone_7gon".into(), cone(&polygon(7).unwrap()).unwrap()),
        ("cone_octahedron".into(), cone(&cross_polytope(2)).unwrap()),
    ];
    // ten random edge-subdivision perturbations of closed members, seed fixed
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let closed: Vec<SimplicialComplex> =
        out.iter().filter(|(_, k)| k.is_closed_pseudomanifold()).map(|(_, k)| k.clone()).collect();
    for i in 0..10 {
        let base = &closed[rng.gen_range(0..closed.len())];
        let edges: Vec<Face> = base.edges().into_iter().collect();
        let e = edges[rng.gen_range(0..edges.len())].clone();
        let (refined, _) = stellar_subdivide_edge(base, &e, fresh_vertex_id(base)).unwrap();
        out.push((format!("perturbed_{i}"), refined));
    }
    out
}

fn trefoil() -> &'static CyclePlan {
    static PLAN: OnceLock<CyclePlan> = OnceLock::new();
    PLAN.get_or_init(|| {
        let c = cyclic_sphere(4, 7);
        let spec = CycleSearchSpec {
            cycle_len: 7,
            max_script_edges: 10,
            single_closed_curve: true,
            group_order: Some(6),
            orbit_sizes: Some(vec![1, 3]),
            seed: 0,
        };
        search_cycle_plan(&c, &spec).expect("the trefoil pipeline must succeed")
    })
}

fn pass(criterion: usize, detail: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("PASS criterion {criterion}: {detail} ({elapsed:.2?})");
    assert!(elapsed < budget, "criterion {criterion} exceeded {budget:?}: {elapsed:?}");
}

#[test]
fn criterion_01_starred_triangle_unfolding() {
    let started = Instant::now();
    let t = starred_simplex(2);
    let u = partial_unfold(&t).unwrap();
    let report = components(&u);
    assert_eq!(report.cell_counts(), vec![3, 6]);
    let cover = verify_cover(&u);
    assert!(cover.passed(), "failures: {:?}", cover.failures);
    assert_eq!(cover.branching, BTreeSet::from([Face::vertex(0)]));
    let base = t.facet_index(&Face::from([0, 1, 2])).unwrap();
    let group = projectivity_group(&t, base).unwrap();
    assert_eq!(group.order(), 2);
    let orbits = group.orbits();
    assert!(orbits.contains(&vec![0]) && orbits.contains(&vec![1, 2]));
    pass(
        1,
        "starred triangle: components {3,6}, branching {0}, group of order 2 with orbits {0},{1,2}",
        started,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_02_foldability_suite() {
    let started = Instant::now();
    let suite: Vec<(String, SimplicialComplex)> = vec![
        ("octahedron".into(), cross_polytope(2)),
        ("cross_polytope_2".into(), cross_polytope(2)),
        ("cross_polytope_3".into(), cross_polytope(3)),
        ("cross_polytope_4".into(), cross_polytope(4)),
        (
            "barycentric(∂Δ³)".into(),
            punfold::subdivision::barycentric_subdivide(&boundary_simplex(2)).complex,
        ),
        (
            "barycentric(∂C(4,7))".into(),
            punfold::subdivision::barycentric_subdivide(&cyclic_sphere(4, 7)).complex,
        ),
    ];
    for (name, k) in suite {
        let d = k.dim();
        assert!(odd_subcomplex(&k).unwrap().is_empty(), "{name}: odd subcomplex not empty");
        assert!(projectivity_group(&k, 0).unwrap().is_trivial(), "{name}: group not trivial");
        let u = partial_unfold(&k).unwrap();
        let report = components(&u);
        assert_eq!(report.components.len(), d + 1, "{name}: expected d+1 components");
        for c in &report.components {
            assert_eq!(c.cells_per_facet, 1, "{name}: component is not a single copy");
            assert_eq!(
                c.face_counts,
                k.f_vector(),
                "{name}: component f-vector differs from the base"
            );
        }
    }
    pass(
        2,
        "foldable suite: empty odd subcomplexes, trivial groups, d+1 disjoint base copies",
        started,
        Duration::from_secs(5),
    );
}

#[test]
fn criterion_03_orbit_component_correspondence() {
    let started = Instant::now();
    let corpus = corpus();
    assert!(corpus.len() >= 20);
    for (name, k) in &corpus {
        let u = partial_unfold(k).unwrap();
        let group = projectivity_group(k, 0).unwrap();
        // orbit partition at the base facet matches the component partition
        let mut orbit_of: BTreeMap<VertexId, usize> = BTreeMap::new();
        for (i, orbit) in group.orbits().into_iter().enumerate() {
            for v in orbit {
                orbit_of.insert(v, i);
            }
        }
        let mut component_to_orbit: BTreeMap<usize, usize> = BTreeMap::new();
        for &v in k.facet(0).vertices() {
            let comp = u.component_of(u.cell(0, v));
            let orbit = orbit_of[&v];
            let prev = component_to_orbit.insert(comp, orbit);
            assert!(
                prev.is_none() || prev == Some(orbit),
                "{name}: two orbits share an unfolding component"
            );
        }
        assert_eq!(
            component_to_orbit.len(),
            group.orbits().len(),
            "{name}: component and orbit counts differ"
        );
        // transported along a spanning tree, the per-facet label partition
        // matches the orbit partition
        let dual = k.dual_graph();
        let parent = dual.spanning_tree(0);
        for target in 0..k.num_facets() {
            let path =
                FacetPath::new(punfold::complex::DualGraph::tree_path(&parent, 0, target));
            let bij = projectivity(k, &path).unwrap();
            for &v in k.facet(0).vertices() {
                assert_eq!(
                    u.component_of(u.cell(target, bij.apply(v))),
                    u.component_of(u.cell(0, v)),
                    "{name}: transported label leaves its component"
                );
            }
        }
    }
    pass(
        3,
        &format!("orbit–component correspondence on {} corpus members", corpus.len()),
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_04_covering_checks() {
    let started = Instant::now();
    let corpus = corpus();
    for (name, k) in &corpus {
        let u = partial_unfold(k).unwrap();
        let report = verify_cover(&u);
        assert!(report.passed(), "{name}: cover verification failures {:?}", report.failures);
        let odd = odd_subcomplex(k).unwrap().odd_faces;
        assert_eq!(report.branching, odd, "{name}: branching differs from the odd subcomplex");
    }
    pass(
        4,
        &format!("covering structure verified on {} corpus members", corpus.len()),
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_05_parity_flip() {
    let started = Instant::now();
    // closed-manifold corpus members: the parity-flip statement is about
    // complexes whose edge links are spheres
    let closed: Vec<(String, SimplicialComplex)> =
        corpus().into_iter().filter(|(_, k)| k.is_closed_pseudomanifold()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..100 {
        let (name, k) = &closed[rng.gen_range(0..closed.len())];
        let edges: Vec<Face> = k.edges().into_iter().collect();
        let e = edges[rng.gen_range(0..edges.len())].clone();
        let odd_before = odd_subcomplex(k).unwrap().odd_faces;
        let (refined, _) = stellar_subdivide_edge(k, &e, fresh_vertex_id(k)).unwrap();
        let odd_after = odd_subcomplex(&refined).unwrap().odd_faces;
        let base_codim2 = k.codim2_faces();
        let expected_flips: BTreeSet<Face> = base_codim2
            .iter()
            .filter(|f| f.is_disjoint_from(&e) && k.facet_index(&f.union(&e)).is_some())
            .cloned()
            .collect();
        let mut actual_flips = BTreeSet::new();
        for f in refined.codim2_faces() {
            if base_codim2.contains(&f)
                && odd_before.contains(&f) != odd_after.contains(&f)
            {
                actual_flips.insert(f);
            }
        }
        assert_eq!(
            actual_flips, expected_flips,
            "trial {trial} on {name}, edge {:?}: flips differ",
            e.vertices()
        );
    }
    pass(
        5,
        "100 random subdivisions flip exactly the surviving codimension-2 link faces",
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_06_coloring_extension() {
    let started = Instant::now();
    // the 3-colored 7-gon over its cone
    let sphere = polygon(7).unwrap();
    let colors: BTreeMap<VertexId, usize> =
        [(0, 0), (1, 1), (2, 0), (3, 1), (4, 0), (5, 1), (6, 2)].into_iter().collect();
    let coloring = VertexColoring::new(colors);
    let out = colored_cone_ball(&sphere, &coloring, 3, ExtendOptions::default()).unwrap();
    assert!(out.coloring.is_total_proper_on(&out.ball));
    assert!(out.coloring.num_colors() <= 3, "a 3-colored ball over the 3-colored 7-gon");
    assert_eq!(out.ball.boundary(), sphere, "the 7-gon stays the boundary");
    for v in sphere.vertices() {
        assert_eq!(out.coloring.color(v), coloring.color(v), "colors on the 7-gon preserved");
    }
    assert!(out.ball.num_facets() <= 4 * 7, "facet bound 2^d × input");
    assert!(round_invariant_holds(&out.ball, &out.coloring.colors, &sphere, out.ball.dim()));

    // ∂Δ³ with the empty subcomplex (greedy pre-coloring pass)
    let k = boundary_simplex(2);
    let empty = SimplicialComplex::build(0, Vec::<Face>::new()).unwrap();
    let opts = ExtendOptions { greedy_precolor: true, ..Default::default() };
    let ext = extend_coloring(&k, &empty, &VertexColoring::default(), 0, opts).unwrap();
    assert!(ext.coloring.is_total_proper_on(&ext.complex));
    assert!(ext.complex.num_facets() <= 4 * k.num_facets(), "facet bound 2^d × input");
    assert!(round_invariant_holds(&ext.complex, &ext.coloring.colors, &empty, ext.complex.dim()));
    assert!(find_foldable_coloring(&ext.complex).is_foldable());
    pass(
        6,
        "coloring extensions: proper, subcomplex preserved, facet bounds and round invariants hold",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_07_builder_unbranched() {
    let started = Instant::now();
    for d in [2usize, 3] {
        let sprime = boundary_simplex(d);
        let shelling = find_shelling(&sprime).unwrap();
        let sigma0 = shelling[0];
        let iota = sprime.facet(sigma0).vertices().to_vec();
        let oracle = TrivialOracle::new(d + 1);
        let out =
            build_cover(&sprime, &shelling, &BTreeSet::new(), &oracle, sigma0, iota).unwrap();
        assert!(out.certificate.total_loop_checks > 0, "loop checks ran");
        assert!(odd_subcomplex(&out.sphere).unwrap().is_empty(), "d={d}: odd subcomplex empty");
        assert!(find_foldable_coloring(&out.sphere).is_foldable(), "d={d}: output foldable");
        let u = partial_unfold(&out.sphere).unwrap();
        let report = components(&u);
        assert_eq!(report.components.len(), d + 1, "d={d}: d+1 unfolding copies");
        for c in &report.components {
            assert_eq!(c.cells_per_facet, 1);
            assert_eq!(c.face_counts, out.sphere.f_vector());
        }
    }
    pass(
        7,
        "unbranched builds for d=2,3: foldable spheres, empty odd subcomplexes, d+1 copies, loop checks pass",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_08_builder_round_trip() {
    let started = Instant::now();
    let sprime = boundary_simplex(2);
    let shelling = find_shelling(&sprime).unwrap();
    let sigma0 = shelling[0];
    let iota = sprime.facet(sigma0).vertices().to_vec();
    let branching: BTreeSet<Face> =
        odd_subcomplex(&sprime).unwrap().odd_faces.into_iter().collect();
    let oracle = ReferenceOracle::new(sprime.clone(), sigma0, iota.clone());
    let out = build_cover(&sprime, &shelling, &branching, &oracle, sigma0, iota).unwrap();

    // (a) odd(S) is the carrier image of odd(∂Δ³): the four original vertices
    let odd_after = odd_subcomplex(&out.sphere).unwrap().odd_faces;
    assert_eq!(odd_after, branching);

    // (b) color equivalence on all fundamental cycles
    let sigma0_refined = out.sphere.facet_index(sprime.facet(sigma0)).unwrap();
    let psi: BTreeMap<VertexId, VertexId> =
        sprime.facet(sigma0).vertices().iter().map(|v| (*v, *v)).collect();
    let eq = check_color_equivalence(
        &sprime,
        &out.sphere,
        &Correspondence::Refinement(out.carrier.clone()),
        sigma0,
        sigma0_refined,
        &psi,
    )
    .unwrap();
    assert!(eq.passed(), "equivalence mismatches: {:?}", eq.mismatches);
    assert!(eq.cycles_checked > 0);

    // (c) connected unfolding with Euler characteristic 2, like the base's
    let u = partial_unfold(&out.sphere).unwrap();
    let report = components(&u);
    assert_eq!(report.components.len(), 1);
    assert_eq!(report.components[0].euler, 2);
    let base_unfolding = components(&partial_unfold(&sprime).unwrap());
    assert_eq!(base_unfolding.components.len(), 1);
    assert_eq!(base_unfolding.components[0].euler, 2);
    pass(
        8,
        "round trip on ∂Δ³: odd set preserved, homomorphisms equivalent, unfolding a connected 2-sphere",
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_09_trefoil_pipeline() {
    let started = Instant::now();
    let found = trefoil();
    assert!(found.plan.script.len() <= 10, "verified script of ≤ 10 edges");
    let s = &found.plan.refined;
    let f0 = s.f_vector()[0];
    assert!(7 < f0 && f0 <= 17, "f0 = {f0} outside (7, 17]");
    let odd = odd_subcomplex(s).unwrap().odd_faces;
    assert_eq!(odd, found.plan.refined_target, "odd subcomplex equals the refined cycle");
    assert!(is_cycle_graph_faces(&odd), "odd subcomplex is a single closed curve");
    let curve_vertices: BTreeSet<VertexId> =
        odd.iter().flat_map(|f| f.vertices().iter().copied()).collect();
    assert!((7..=15).contains(&curve_vertices.len()), "curve has between 7 and 15 vertices");
    let group = projectivity_group(s, 0).unwrap();
    assert_eq!(group.order(), 6, "Π(S) of order 6");
    assert_eq!(group.orbit_sizes(), vec![1, 3], "orbits of sizes 1 and 3");
    // an order-6 subgroup of Sym(4) is Sym(3): it has no element of order 6
    assert!(group.elements.iter().all(|img| {
        let order_divides = |k: usize| {
            let mut acc: Vec<usize> = (0..img.len()).collect();
            for _ in 0..k {
                acc = acc.iter().map(|&x| img[x]).collect();
            }
            acc.iter().enumerate().all(|(i, x)| i == *x)
        };
        order_divides(6) && (order_divides(2) || order_divides(3))
    }));
    pass(
        9,
        &format!(
            "trefoil cycle {:?}: {} subdivisions, f0 = {f0}, Π ≅ Sym(3) with orbits {{1,3}}",
            found.cycle,
            found.plan.script.len()
        ),
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_10_trefoil_unfolding_is_a_manifold() {
    let started = Instant::now();
    let found = trefoil();
    let s = &found.plan.refined;
    let u = partial_unfold(s).unwrap();
    let report = components(&u);
    let (idx, stats) = report
        .components
        .iter()
        .enumerate()
        .find(|(_, c)| c.cells_per_facet == 3)
        .expect("nontrivial component covers with degree 3");
    let complex = if stats.simplicial {
        component_complex(&u, idx).unwrap()
    } else {
        resolve_component(&u, idx)
    };
    assert!(complex.is_closed_pseudomanifold(), "every ridge in exactly two facets");
    assert!(complex.dual_graph().is_connected());
    for v in complex.vertices() {
        let link = complex.link(&Face::vertex(v)).unwrap();
        assert!(
            is_closed_surface_sphere(&link),
            "link of vertex {v} is not a 2-sphere (Euler {})",
            link.euler_characteristic()
        );
    }
    pass(
        10,
        &format!(
            "nontrivial trefoil cover component ({} facets) is a closed combinatorial 3-manifold",
            complex.num_facets()
        ),
        started,
        Duration::from_secs(300),
    );
}

// keep the corpus deterministic: the same seeds always give the same complexes
#[test]
fn corpus_is_deterministic() {
    let a = corpus();
    let b = corpus();
    assert_eq!(a.len(), b.len());
    for ((na, ka), (nb, kb)) in a.iter().zip(&b) {
        assert_eq!(na, nb);
        assert_eq!(ka, kb);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut names: Vec<String> = a.into_iter().map(|(n, _)| n).collect();
    names.shuffle(&mut rng);
    assert!(!names.is_empty());
}
