//! Planning stellar edge subdivisions so that a prescribed set of
//! codimension-2 faces becomes the odd subcomplex.
//!
//! Subdividing an edge e of a closed combinatorial manifold flips the parity
//! of exactly the codimension-2 faces in lk(e). This sets up a linear system
//! over GF(2): one variable per candidate edge, one constraint per
//! codimension-2 face. A solution is only a first-order prediction (chosen
//! edges sharing a facet interact through the faces they create), so every
//! emitted script is verified by recomputing the odd subcomplex on the
//! refined complex; candidate solutions are walked in order of weight until
//! one survives. For targets none of whose solutions compose cleanly, the
//! cycle search falls back to the shelling construction with a synthesized
//! monodromy representation.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::complex::{is_cycle_graph_faces, Face, SimplicialComplex, VertexId};
use crate::projectivity::{odd_subcomplex, projectivity_group, ProjectivityError};
use crate::subdivision::{apply_script, fresh_vertex_id, CarrierMap, SubdivisionScript};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("target face {0:?} is not a codimension-2 face of the complex")]
    NotCodim2Target(Vec<VertexId>),
    #[error("no subdivision plan exists: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Projectivity(#[from] ProjectivityError),
}

/// A verified subdivision plan: replaying `script` on the input complex gives
/// `refined`, whose odd subcomplex equals `refined_target` (the carrier
/// refinement of the requested target).
#[derive(Clone, Debug)]
pub struct Plan {
    pub script: SubdivisionScript,
    pub refined: SimplicialComplex,
    pub carrier: CarrierMap,
    pub refined_target: BTreeSet<Face>,
}

/// Options for [`plan_make_odd_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct PlanOptions {
    /// Reject candidate scripts with more edges than this.
    pub max_edges: Option<usize>,
    /// Give up after verifying this many candidate solutions (all of them
    /// when unset).
    pub max_attempts: Option<usize>,
}

/// Chooses a set of edges to stellarly subdivide so that the odd subcomplex
/// of the refined complex is exactly the (refined) target, and verifies that
/// claim by recomputation before returning.
pub fn plan_make_odd(
    complex: &SimplicialComplex,
    target: &BTreeSet<Face>,
) -> Result<Plan, PlanError> {
    plan_make_odd_with(complex, target, PlanOptions::default())
}

/// [`plan_make_odd`] with a script-size budget.
///
/// The GF(2) system is a first-order model: it predicts the parities of the
/// original codimension-2 faces (and of the halves of subdivided ones)
/// exactly, but faces created by the subdivisions can be thrown odd when two
/// chosen edges meet a common facet. The whole solution coset is therefore
/// walked in order of increasing weight, verifying each candidate script by
/// recomputing the odd subcomplex, until one candidate survives.
pub fn plan_make_odd_with(
    complex: &SimplicialComplex,
    target: &BTreeSet<Face>,
    options: PlanOptions,
) -> Result<Plan, PlanError> {
    let codim2: Vec<Face> = complex.codim2_faces().into_iter().collect();
    for f in target {
        if f.len() + 2 != complex.dim() + 1 || !complex.is_face(f) {
            return Err(PlanError::NotCodim2Target(f.vertices().to_vec()));
        }
    }
    let odd_now = odd_subcomplex(complex)?.odd_faces;

    // desired parity change per codimension-2 face
    let flip: Vec<bool> = codim2
        .iter()
        .map(|f| odd_now.contains(f) != target.contains(f))
        .collect();

    // Candidate edges: all edges. A subdivided codimension-2 face is covered
    // by its own row: the two halves inherit its parity plus the same flips,
    // since rows only involve edges disjoint from the face.
    let edges: Vec<Face> = complex.edges().into_iter().collect();
    // rows: Σ over chosen edges e with f ∈ lk(e) of x_e = flip(f);
    // f ∈ lk(e) iff e and f are disjoint and f ∪ e is a facet
    let rows: Vec<Vec<bool>> = codim2
        .iter()
        .map(|f| {
            edges
                .iter()
                .map(|e| e.is_disjoint_from(f) && complex.facet_index(&f.union(e)).is_some())
                .collect()
        })
        .collect();
    let Some((particular, nullspace)) = solve_gf2(&rows, &flip) else {
        return Err(PlanError::Infeasible("no GF(2) solution".into()));
    };

    let mut verified_failures = 0usize;
    for solution in solution_coset_by_weight(&particular, &nullspace) {
        if options.max_attempts.is_some_and(|m| verified_failures >= m) {
            break;
        }
        let weight = solution.iter().filter(|b| **b).count();
        if options.max_edges.is_some_and(|m| weight > m) {
            break; // sorted by weight: everything further is larger
        }
        let chosen: Vec<Face> = edges
            .iter()
            .zip(&solution)
            .filter(|(_, x)| **x)
            .map(|(e, _)| e.clone())
            .collect();
        // deterministic script: lexicographic edge order, sequential fresh ids
        let mut script = SubdivisionScript::new();
        let first_id = fresh_vertex_id(complex);
        for (offset, e) in chosen.iter().enumerate() {
            script.push(e, first_id + offset as u32);
        }
        let (refined, carrier) =
            apply_script(complex, &script).expect("planned edges exist in the complex");
        let refined_target = refine_target(&refined, &carrier, target);
        let odd_after = odd_subcomplex(&refined)?.odd_faces;
        if odd_after == refined_target {
            return Ok(Plan { script, refined, carrier, refined_target });
        }
        verified_failures += 1;
    }
    Err(PlanError::Infeasible(format!(
        "all {verified_failures} GF(2) solutions within budget fail odd-subcomplex verification"
    )))
}

/// Every solution of the system, in order of increasing weight (ties broken
/// lexicographically for determinism). Falls back to the single min-weight
/// solution when the nullspace is too large to enumerate.
fn solution_coset_by_weight(particular: &[bool], nullspace: &[Vec<bool>]) -> Vec<Vec<bool>> {
    const MAX_NULLSPACE_DIM: usize = 16;
    if nullspace.len() > MAX_NULLSPACE_DIM {
        let mut x = particular.to_vec();
        let weight = |v: &[bool]| v.iter().filter(|b| **b).count();
        let mut improved = true;
        while improved {
            improved = false;
            for b in nullspace {
                let cand: Vec<bool> = x.iter().zip(b).map(|(a, c)| a ^ c).collect();
                if weight(&cand) < weight(&x) {
                    x = cand;
                    improved = true;
                }
            }
        }
        return vec![x];
    }
    let mut out: Vec<Vec<bool>> = Vec::with_capacity(1 << nullspace.len());
    for pick in 0..(1u64 << nullspace.len()) {
        let mut x = particular.to_vec();
        for (i, z) in nullspace.iter().enumerate() {
            if pick >> i & 1 == 1 {
                for (a, b) in x.iter_mut().zip(z) {
                    *a ^= b;
                }
            }
        }
        out.push(x);
    }
    out.sort_by_key(|v| (v.iter().filter(|b| **b).count(), v.clone()));
    out
}

/// The carrier refinement of a set of codimension-2 faces: the codimension-2
/// faces of the refined complex whose carrier is one of the target faces.
pub fn refine_target(
    refined: &SimplicialComplex,
    carrier: &CarrierMap,
    target: &BTreeSet<Face>,
) -> BTreeSet<Face> {
    refined
        .codim2_faces()
        .into_iter()
        .filter(|g| target.contains(&carrier.face_carrier(g)))
        .collect()
}

// ---------------------------------------------------------------------------
// GF(2) linear algebra
// ---------------------------------------------------------------------------

/// Solves `rows · x = rhs` over GF(2) and reduces the solution weight by
/// greedy descent over the nullspace basis. Returns `None` when inconsistent.
pub fn solve_gf2_min_weight(rows: &[Vec<bool>], rhs: &[bool]) -> Option<Vec<bool>> {
    let (mut x, basis) = solve_gf2(rows, rhs)?;
    let weight = |v: &[bool]| v.iter().filter(|b| **b).count();
    let mut improved = true;
    while improved {
        improved = false;
        for b in &basis {
            let candidate: Vec<bool> = x.iter().zip(b).map(|(a, c)| a ^ c).collect();
            if weight(&candidate) < weight(&x) {
                x = candidate;
                improved = true;
            }
        }
    }
    Some(x)
}

/// Gaussian elimination over GF(2): returns a particular solution (free
/// variables zero) and a nullspace basis, or `None` when inconsistent.
pub fn solve_gf2(rows: &[Vec<bool>], rhs: &[bool]) -> Option<(Vec<bool>, Vec<Vec<bool>>)> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let nrows = rows.len();
    // augmented matrix
    let mut m: Vec<Vec<bool>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(*b);
            row
        })
        .collect();

    let mut pivot_col_of_row: Vec<usize> = Vec::new();
    let mut pivot_row_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| m[r][col]) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in 0..nrows {
            if r != rank && m[r][col] {
                let (head, tail) = m.split_at_mut(rank.max(r));
                let (src, dst) = if r < rank {
                    (&tail[0], &mut head[r])
                } else {
                    (&head[rank], &mut tail[0])
                };
                for c in col..=ncols {
                    dst[c] ^= src[c];
                }
            }
        }
        pivot_col_of_row.push(col);
        pivot_row_of_col[col] = Some(rank);
        rank += 1;
    }
    // inconsistent when a zero row has rhs 1
    if m[rank..nrows].iter().any(|row| row[ncols]) {
        return None;
    }

    // particular solution: free variables zero
    let mut x = vec![false; ncols];
    for (r, &col) in pivot_col_of_row.iter().enumerate() {
        x[col] = m[r][ncols];
    }

    // nullspace basis: one vector per free column
    let mut basis: Vec<Vec<bool>> = Vec::new();
    for free in 0..ncols {
        if pivot_row_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![false; ncols];
        v[free] = true;
        for (r, &col) in pivot_col_of_row.iter().enumerate() {
            if m[r][free] {
                v[col] = true;
            }
        }
        basis.push(v);
    }
    Some((x, basis))
}

// ---------------------------------------------------------------------------
// Cycle search
// ---------------------------------------------------------------------------

/// What the cycle search must deliver. Candidate cycles in the 1-skeleton are
/// tried in a seed-shuffled order until one admits a verified plan meeting
/// every requirement.
#[derive(Clone, Debug)]
pub struct CycleSearchSpec {
    /// Cycle length (number of vertices = number of edges).
    pub cycle_len: usize,
    /// Upper bound on the number of subdivided edges.
    pub max_script_edges: usize,
    /// Require the refined odd subcomplex to be a single closed curve.
    pub single_closed_curve: bool,
    /// Required order of the projectivity group of the refined complex.
    pub group_order: Option<usize>,
    /// Required sorted orbit sizes of the projectivity group.
    pub orbit_sizes: Option<Vec<usize>>,
    pub seed: u64,
}

impl CycleSearchSpec {
    pub fn new(cycle_len: usize, max_script_edges: usize) -> Self {
        CycleSearchSpec {
            cycle_len,
            max_script_edges,
            single_closed_curve: true,
            group_order: None,
            orbit_sizes: None,
            seed: 0,
        }
    }
}

/// Result of a successful cycle search.
#[derive(Clone, Debug)]
pub struct CyclePlan {
    /// The chosen cycle as a closed vertex sequence (first vertex not
    /// repeated).
    pub cycle: Vec<VertexId>,
    pub plan: Plan,
    pub group_order: usize,
    pub orbit_sizes: Vec<usize>,
    /// How many candidate cycles were examined (including the successful one).
    pub candidates_tried: usize,
}

/// Searches the 1-skeleton for a cycle whose verified subdivision plan meets
/// `spec`. Only meaningful on 3-dimensional complexes, where codimension-2
/// faces are edges.
///
/// Per candidate cycle, planning proceeds in two phases. The one-shot GF(2)
/// coset walk handles targets whose flips compose cleanly. When every small
/// solution breaks on interactions, the fallback is the construction route:
/// solve the complement presentation of the cycle for a monodromy
/// representation with transposition meridians and run the shelling-driven
/// builder with it, which subdivides adaptively and stays within the budget
/// whenever the cycle genuinely supports such a cover (a knotted cycle).
pub fn search_cycle_plan(
    complex: &SimplicialComplex,
    spec: &CycleSearchSpec,
) -> Result<CyclePlan, PlanError> {
    assert_eq!(complex.dim(), 3, "cycle targets need codimension-2 faces to be edges");
    let mut cycles = enumerate_cycles(complex, spec.cycle_len);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    cycles.shuffle(&mut rng);

    let mut tried = 0;
    let mut last_reason = format!("no cycles of length {} in the 1-skeleton", spec.cycle_len);
    for cycle in cycles {
        tried += 1;
        let target: BTreeSet<Face> = cycle_edges(&cycle).into_iter().collect();
        let options = PlanOptions {
            max_edges: Some(spec.max_script_edges),
            max_attempts: Some(12),
        };
        let plan = match plan_make_odd_with(complex, &target, options) {
            Ok(p) => p,
            Err(PlanError::Infeasible(r)) => {
                last_reason = r;
                continue;
            }
            Err(e) => return Err(e),
        };
        if plan.script.len() > spec.max_script_edges {
            last_reason = format!(
                "smallest verified script for {:?} has {} edges (> {})",
                cycle,
                plan.script.len(),
                spec.max_script_edges
            );
            continue;
        }
        if spec.single_closed_curve && !is_cycle_graph_faces(&plan.refined_target) {
            last_reason = format!("refined target of {cycle:?} is not a single closed curve");
            continue;
        }
        let group = projectivity_group(&plan.refined, 0)?;
        if let Some(order) = spec.group_order {
            if group.order() != order {
                last_reason =
                    format!("cycle {:?} gives group order {}, wanted {}", cycle, group.order(), order);
                continue;
            }
        }
        if let Some(ref sizes) = spec.orbit_sizes {
            if &group.orbit_sizes() != sizes {
                last_reason = format!(
                    "cycle {:?} gives orbit sizes {:?}, wanted {:?}",
                    cycle,
                    group.orbit_sizes(),
                    sizes
                );
                continue;
            }
        }
        return Ok(CyclePlan {
            cycle,
            group_order: group.order(),
            orbit_sizes: group.orbit_sizes(),
            plan,
            candidates_tried: tried,
        });
    }

    // construction fallback: monodromy representation plus the builder
    let mut cycles = enumerate_cycles(complex, spec.cycle_len);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    cycles.shuffle(&mut rng);
    for cycle in cycles {
        tried += 1;
        let target: BTreeSet<Face> = cycle_edges(&cycle).into_iter().collect();
        match plan_via_builder(complex, &target, spec) {
            Ok(Some((plan, group_order, orbit_sizes))) => {
                return Ok(CyclePlan {
                    cycle,
                    plan,
                    group_order,
                    orbit_sizes,
                    candidates_tried: tried,
                });
            }
            Ok(None) => continue,
            Err(e) => {
                last_reason = format!("{e}");
                continue;
            }
        }
    }
    Err(PlanError::Infeasible(format!(
        "no cycle of length {} satisfies the search spec after {} candidates; last: {}",
        spec.cycle_len, tried, last_reason
    )))
}

/// Plans a target curve through the theorem machinery: extracts the dual
/// presentation of the complement, finds a representation with transposition
/// meridians matching the wanted orbit profile, and runs the builder on a
/// shelling starting at a facet avoiding the curve.
fn plan_via_builder(
    complex: &SimplicialComplex,
    target: &BTreeSet<Face>,
    spec: &CycleSearchSpec,
) -> Result<Option<(Plan, usize, Vec<usize>)>, PlanError> {
    use crate::complex::find_shelling_from;
    use crate::cover::{
        build_cover, complement_presentation, find_transposition_representation, image_order,
    };

    let degree = complex.dim() + 1;
    let presentation = complement_presentation(complex, target)
        .map_err(|e| PlanError::Infeasible(format!("presentation: {e}")))?;
    let oracle = match find_transposition_representation(
        complex,
        &presentation,
        degree,
        spec.orbit_sizes.as_deref(),
    ) {
        Ok(o) => o,
        Err(_) => return Ok(None), // no admissible monodromy: unknotted or filtered out
    };
    if let Some(order) = spec.group_order {
        if image_order(oracle.values(), degree) != order {
            return Ok(None);
        }
    }
    // candidate base facets: those away from the curve first
    let curve_vertices: BTreeSet<VertexId> =
        target.iter().flat_map(|f| f.vertices().iter().copied()).collect();
    let mut base_candidates: Vec<usize> = (0..complex.num_facets()).collect();
    base_candidates.sort_by_key(|&i| {
        complex.facet(i).vertices().iter().filter(|v| curve_vertices.contains(v)).count()
    });

    let mut last: Option<PlanError> = None;
    for sigma0 in base_candidates {
        // the base bijection must respect the oracle's subgroup structure
        let iotas = crate::cover::compatible_base_bijections(complex, sigma0, &oracle)
            .map_err(|e| PlanError::Infeasible(format!("base bijection: {e}")))?;
        let Some(iota) = iotas.into_iter().next() else {
            continue;
        };
        let Some(shelling) = find_shelling_from(complex, Some(sigma0)) else {
            continue;
        };
        let out = match build_cover(complex, &shelling, target, &oracle, sigma0, iota) {
            Ok(out) => out,
            Err(e) => {
                last = Some(PlanError::Infeasible(format!("builder: {e}")));
                continue;
            }
        };
        if out.script.len() > spec.max_script_edges {
            last = Some(PlanError::Infeasible(format!(
                "builder used {} subdivisions (> {})",
                out.script.len(),
                spec.max_script_edges
            )));
            continue;
        }
        let refined_target = refine_target(&out.sphere, &out.carrier, target);
        let odd_after = odd_subcomplex(&out.sphere)?.odd_faces;
        if odd_after != refined_target {
            last = Some(PlanError::Infeasible(
                "builder output's odd subcomplex differs from the refined target".into(),
            ));
            continue;
        }
        if spec.single_closed_curve && !is_cycle_graph_faces(&refined_target) {
            return Ok(None);
        }
        let group = projectivity_group(&out.sphere, 0)?;
        if let Some(order) = spec.group_order {
            if group.order() != order {
                return Ok(None);
            }
        }
        if let Some(ref sizes) = spec.orbit_sizes {
            if &group.orbit_sizes() != sizes {
                return Ok(None);
            }
        }
        let plan = Plan {
            script: out.script,
            refined: out.sphere,
            carrier: out.carrier,
            refined_target,
        };
        return Ok(Some((plan, group.order(), group.orbit_sizes())));
    }
    match last {
        Some(e) => Err(e),
        None => Ok(None),
    }
}

/// All simple cycles of the given length in the 1-skeleton, as canonical
/// vertex sequences: smallest vertex first, second vertex smaller than the
/// last (killing rotations and reflections).
pub fn enumerate_cycles(complex: &SimplicialComplex, len: usize) -> Vec<Vec<VertexId>> {
    assert!(len >= 3);
    let vertices: Vec<VertexId> = complex.vertices().into_iter().collect();
    let edges = complex.edges();
    let adjacent = |a: VertexId, b: VertexId| edges.contains(&Face::edge(a, b));

    let mut out = Vec::new();
    let mut path: Vec<VertexId> = Vec::with_capacity(len);

    fn extend(
        path: &mut Vec<VertexId>,
        len: usize,
        vertices: &[VertexId],
        adjacent: &dyn Fn(VertexId, VertexId) -> bool,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        if path.len() == len {
            let first = path[0];
            let last = *path.last().unwrap();
            if adjacent(last, first) && path[1] < last {
                out.push(path.clone());
            }
            return;
        }
        let prev = *path.last().unwrap();
        for &v in vertices {
            if v > path[0] && !path.contains(&v) && adjacent(prev, v) {
                path.push(v);
                extend(path, len, vertices, adjacent, out);
                path.pop();
            }
        }
    }

    for &start in &vertices {
        path.clear();
        path.push(start);
        extend(&mut path, len, &vertices, &adjacent, &mut out);
    }
    out
}

fn cycle_edges(cycle: &[VertexId]) -> Vec<Face> {
    (0..cycle.len())
        .map(|i| Face::edge(cycle[i], cycle[(i + 1) % cycle.len()]))
        .collect()
}
