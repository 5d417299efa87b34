//! Constructing spheres whose partial unfolding realizes a prescribed simple
//! branched cover.
//!
//! Given a shellable d-sphere, a codimension-2 branching subcomplex and a
//! monodromy oracle for a simple (d+1)-fold cover, [`build_cover`] walks a
//! shelling and refines each attached facet by stellar edge subdivisions so
//! that every projectivity of the growing ball agrees with the oracle. The
//! certificate records, per step, the case applied, the subdivisions made and
//! the loop checks performed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::complex::{verify_shelling, Face, SimplicialComplex, VertexId};
use crate::projectivity::{
    close_permutations, compose_images, projectivity, star_cycle, FacetPath, ProjectivityError,
    VertexBijection,
};
use crate::subdivision::{
    fresh_vertex_id, stellar_subdivide_edge, CarrierMap, SubdivisionError, SubdivisionScript,
};

/// A permutation of the colors 0..degree as an image vector.
pub type ColorPerm = Vec<usize>;

pub fn color_identity(degree: usize) -> ColorPerm {
    (0..degree).collect()
}

pub fn color_inverse(p: &ColorPerm) -> ColorPerm {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

pub fn is_color_transposition(p: &ColorPerm) -> bool {
    p.iter().enumerate().filter(|(i, x)| *i != **x).count() == 2
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("oracle violated its contract: {0}")]
    OracleInconsistent(String),
    #[error("the given facet order is not a shelling (step {0})")]
    NotAShelling(usize),
    #[error("branching face {0:?} is not a codimension-2 face")]
    BranchingNotCodim2(Vec<VertexId>),
    #[error("carrier projection failed: {0}")]
    CarrierProjectionFailed(String),
    #[error("no admissible representation of the complement found")]
    NoRepresentation,
    #[error(transparent)]
    Projectivity(#[from] ProjectivityError),
    #[error(transparent)]
    Subdivision(#[from] SubdivisionError),
    #[error("internal: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// The artifact's stand-in for the monodromy homomorphism of a simple
/// branched cover: answers permutation queries on closed facet paths. Queries
/// receive the complex the loop lives in together with the carrier map back
/// to the original sphere, so refinements are transparent.
///
/// Contract: `query(γδ) = query(δ) ∘ query(γ)` and `query(γ⁻) = query(γ)⁻¹`
/// for composable closed loops, loops once around a non-singular branching
/// face map to transpositions (identity elsewhere), and a loop gives the same
/// value as its carrier projection.
pub trait MonodromyOracle {
    fn degree(&self) -> usize;
    fn query(
        &self,
        complex: &SimplicialComplex,
        loop_path: &FacetPath,
        carrier: &CarrierMap,
    ) -> Result<ColorPerm, CoverError>;
}

/// The unbranched cover: every loop maps to the identity.
#[derive(Clone, Debug)]
pub struct TrivialOracle {
    degree: usize,
}

impl TrivialOracle {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 2);
        TrivialOracle { degree }
    }
}

impl MonodromyOracle for TrivialOracle {
    fn degree(&self) -> usize {
        self.degree
    }

    fn query(
        &self,
        _complex: &SimplicialComplex,
        _loop_path: &FacetPath,
        _carrier: &CarrierMap,
    ) -> Result<ColorPerm, CoverError> {
        Ok(color_identity(self.degree))
    }
}

/// Projects a facet path to the base complex along a carrier map: carriers of
/// consecutive facets are deduplicated, and any non-adjacent jump is bridged
/// by a shortest dual path inside the star of the crossed face's carrier.
pub fn project_path(
    complex: &SimplicialComplex,
    path: &FacetPath,
    carrier: &CarrierMap,
    base: &SimplicialComplex,
) -> Result<FacetPath, CoverError> {
    let mut projected: Vec<usize> = vec![carrier.facet_carrier[path.0[0]]];
    for pair in path.0.windows(2) {
        let next = carrier.facet_carrier[pair[1]];
        let prev = *projected.last().unwrap();
        if next == prev {
            continue;
        }
        let shared = base
            .facet(prev)
            .intersection(base.facet(next))
            .ok_or_else(|| {
                CoverError::CarrierProjectionFailed(format!(
                    "carriers {prev} and {next} share no face"
                ))
            })?;
        if shared.len() == base.dim() {
            projected.push(next);
            continue;
        }
        // bridge inside the star of the carrier of the crossed ridge
        let ridge = complex
            .facet(pair[0])
            .intersection(complex.facet(pair[1]))
            .ok_or_else(|| CoverError::CarrierProjectionFailed("path step without ridge".into()))?;
        let pivot = carrier.face_carrier(&ridge);
        let bridge = star_path(base, &pivot, prev, next).ok_or_else(|| {
            CoverError::CarrierProjectionFailed(format!(
                "cannot connect carriers {prev} and {next} inside the star of {:?}",
                pivot.vertices()
            ))
        })?;
        projected.extend(bridge.into_iter().skip(1));
    }
    Ok(FacetPath::new(projected))
}

/// Shortest dual path between two facets of st(f), moving only across ridges
/// that contain `f`.
fn star_path(
    complex: &SimplicialComplex,
    f: &Face,
    from: usize,
    to: usize,
) -> Option<Vec<usize>> {
    let star: Vec<usize> = complex.facets_containing(f);
    if !star.contains(&from) || !star.contains(&to) {
        return None;
    }
    let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    prev.insert(from, from);
    while let Some(cur) = queue.pop_front() {
        if cur == to {
            let mut path = vec![to];
            let mut c = to;
            while c != from {
                c = prev[&c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        for &nb in &star {
            if prev.contains_key(&nb) {
                continue;
            }
            if let Some(inter) = complex.facet(cur).intersection(complex.facet(nb)) {
                if inter.len() == complex.dim() && f.is_subset_of(&inter) {
                    prev.insert(nb, cur);
                    queue.push_back(nb);
                }
            }
        }
    }
    None
}

/// Oracle backed by a reference complex: a query projects the loop along the
/// carrier map and returns the projectivity of the projected loop, conjugated
/// into color space by the reference base bijection. The carrier target must
/// be the reference complex itself.
#[derive(Clone, Debug)]
pub struct ReferenceOracle {
    kref: SimplicialComplex,
    /// `iota[c]` is the vertex of the base facet colored `c`.
    iota: Vec<VertexId>,
}

impl ReferenceOracle {
    pub fn new(kref: SimplicialComplex, base_facet: usize, iota: Vec<VertexId>) -> Self {
        let base = kref.facet(base_facet).clone();
        assert_eq!(iota.len(), kref.dim() + 1);
        assert!(iota.iter().all(|v| base.contains(*v)), "iota must enumerate the base facet");
        ReferenceOracle { kref, iota }
    }
}

impl MonodromyOracle for ReferenceOracle {
    fn degree(&self) -> usize {
        self.kref.dim() + 1
    }

    fn query(
        &self,
        complex: &SimplicialComplex,
        loop_path: &FacetPath,
        carrier: &CarrierMap,
    ) -> Result<ColorPerm, CoverError> {
        let projected = project_path(complex, loop_path, carrier, &self.kref)?;
        let bij = projectivity(&self.kref, &projected)?;
        let color_of: BTreeMap<VertexId, usize> =
            self.iota.iter().enumerate().map(|(c, v)| (*v, c)).collect();
        Ok(self.iota.iter().map(|v| color_of[&bij.apply(*v)]).collect())
    }
}

// ---------------------------------------------------------------------------
// Complement presentations and representation oracles
// ---------------------------------------------------------------------------

/// A presentation of the fundamental group of the complement of a
/// codimension-2 subcomplex, read off the dual 2-complex: generators are the
/// non-tree dual edges, and the dual loop around every codimension-2 face off
/// the branching set is a relator. Loops around branching faces are the
/// meridians.
#[derive(Clone, Debug)]
pub struct ComplementPresentation {
    /// Oriented generator per dual edge `(a, b)` with `a < b`; `None` marks
    /// spanning-tree edges.
    pub generator_of: BTreeMap<(usize, usize), Option<usize>>,
    pub num_generators: usize,
    /// Cyclic relator words around the faces off the branching set.
    pub relators: Vec<Vec<(usize, bool)>>,
    /// Meridian words around the branching faces.
    pub meridians: Vec<(Face, Vec<(usize, bool)>)>,
}

/// Reads the complement presentation of `branching` off the dual structure
/// of `complex`. Every codimension-2 face must have a closed star.
pub fn complement_presentation(
    complex: &SimplicialComplex,
    branching: &BTreeSet<Face>,
) -> Result<ComplementPresentation, CoverError> {
    let dual = complex.dual_graph();
    let parent = dual.spanning_tree(0);
    let mut generator_of: BTreeMap<(usize, usize), Option<usize>> = BTreeMap::new();
    let mut num_generators = 0;
    for (a, b, _) in dual.edges() {
        let tree = parent[a] == Some(b) || parent[b] == Some(a);
        let gen = if tree {
            None
        } else {
            num_generators += 1;
            Some(num_generators - 1)
        };
        generator_of.insert((a, b), gen);
    }
    let mut relators = Vec::new();
    let mut meridians = Vec::new();
    for f in complex.codim2_faces() {
        let sigma = complex.facets_containing(&f)[0];
        let cycle = star_cycle(complex, &f, sigma)?;
        let word = path_word(&cycle, &generator_of);
        if branching.contains(&f) {
            meridians.push((f, word));
        } else {
            relators.push(word);
        }
    }
    Ok(ComplementPresentation { generator_of, num_generators, relators, meridians })
}

fn path_word(
    path: &FacetPath,
    generator_of: &BTreeMap<(usize, usize), Option<usize>>,
) -> Vec<(usize, bool)> {
    let mut word = Vec::new();
    for pair in path.0.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if let Some(g) = generator_of[&(a.min(b), a.max(b))] {
            word.push((g, a < b));
        }
    }
    word
}

fn eval_word(word: &[(usize, bool)], values: &[ColorPerm], degree: usize) -> ColorPerm {
    let mut acc = color_identity(degree);
    for (g, forward) in word {
        let v = if *forward { values[*g].clone() } else { color_inverse(&values[*g]) };
        acc = compose_images(&v, &acc);
    }
    acc
}

/// A monodromy oracle evaluating an explicit representation of the
/// complement presentation of the base sphere: loops are carrier-projected
/// and read off as words in the dual-edge generators.
#[derive(Clone, Debug)]
pub struct RepresentationOracle {
    base: SimplicialComplex,
    generator_of: BTreeMap<(usize, usize), Option<usize>>,
    values: Vec<ColorPerm>,
    degree: usize,
}

impl RepresentationOracle {
    /// The generator values of the underlying representation.
    pub fn values(&self) -> &[ColorPerm] {
        &self.values
    }

    /// Values of the meridian words: the monodromy around each branching face.
    pub fn meridian_values(&self, presentation: &ComplementPresentation) -> Vec<(Face, ColorPerm)> {
        presentation
            .meridians
            .iter()
            .map(|(f, w)| (f.clone(), eval_word(w, &self.values, self.degree)))
            .collect()
    }
}

impl MonodromyOracle for RepresentationOracle {
    fn degree(&self) -> usize {
        self.degree
    }

    fn query(
        &self,
        complex: &SimplicialComplex,
        loop_path: &FacetPath,
        carrier: &CarrierMap,
    ) -> Result<ColorPerm, CoverError> {
        let projected = project_path(complex, loop_path, carrier, &self.base)?;
        let word = path_word(&projected, &self.generator_of);
        Ok(eval_word(&word, &self.values, self.degree))
    }
}

/// Searches for a representation of the complement presentation into the
/// symmetric group on `degree` colors that kills every relator and sends
/// every meridian to a transposition. When `orbit_sizes` is given, only
/// representations whose image has that sorted orbit-size profile are
/// accepted. Returns the first representation in a deterministic order.
///
/// The backtracking assigns generators in an order that completes words as
/// early as possible, checking each word the moment its last generator gets a
/// value, so inconsistent branches die within a few levels.
pub fn find_transposition_representation(
    base: &SimplicialComplex,
    presentation: &ComplementPresentation,
    degree: usize,
    orbit_sizes: Option<&[usize]>,
) -> Result<RepresentationOracle, CoverError> {
    let perms = all_permutations(degree);
    let n = presentation.num_generators;

    // words as (is_meridian, generator word); generator assignment order
    // greedily completes short words first
    let words: Vec<(bool, &Vec<(usize, bool)>)> = presentation
        .relators
        .iter()
        .map(|w| (false, w))
        .chain(presentation.meridians.iter().map(|(_, w)| (true, w)))
        .collect();
    let mut order: Vec<usize> = Vec::new();
    let mut placed = vec![false; n];
    let mut remaining: Vec<BTreeSet<usize>> = words
        .iter()
        .map(|(_, w)| w.iter().map(|(g, _)| *g).collect::<BTreeSet<usize>>())
        .collect();
    while order.len() < n {
        // the generator finishing the most nearly-complete word
        let next = (0..n)
            .filter(|g| !placed[*g])
            .min_by_key(|g| {
                remaining
                    .iter()
                    .filter(|r| r.contains(g))
                    .map(|r| r.len())
                    .min()
                    .unwrap_or(usize::MAX)
            })
            .expect("unplaced generator exists");
        placed[next] = true;
        order.push(next);
        for r in &mut remaining {
            r.remove(&next);
        }
    }
    // words checked at each level: those fully assigned once order[..=level] is set
    let level_of: Vec<usize> = {
        let mut level = vec![0; n];
        for (l, g) in order.iter().enumerate() {
            level[*g] = l;
        }
        level
    };
    let mut checks_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (wi, (_, w)) in words.iter().enumerate() {
        if let Some(last) = w.iter().map(|(g, _)| level_of[*g]).max() {
            checks_at[last].push(wi);
        }
        // empty words (all generators in the tree) must be trivially fine;
        // they contain no generators and evaluate to the identity
    }

    struct Dfs<'a> {
        words: &'a [(bool, &'a Vec<(usize, bool)>)],
        checks_at: &'a [Vec<usize>],
        order: &'a [usize],
        perms: &'a [ColorPerm],
        degree: usize,
        orbit_sizes: Option<&'a [usize]>,
        values: Vec<ColorPerm>,
    }

    impl Dfs<'_> {
        fn run(&mut self, level: usize) -> bool {
            if level == self.order.len() {
                if let Some(want) = self.orbit_sizes {
                    if image_orbit_sizes(&self.values, self.degree) != want {
                        return false;
                    }
                }
                return true;
            }
            let g = self.order[level];
            for pi in 0..self.perms.len() {
                self.values[g] = self.perms[pi].clone();
                let ok = self.checks_at[level].iter().all(|&wi| {
                    let (meridian, w) = &self.words[wi];
                    let val = eval_word(w, &self.values, self.degree);
                    if *meridian {
                        is_color_transposition(&val)
                    } else {
                        val == color_identity(self.degree)
                    }
                });
                if ok && self.run(level + 1) {
                    return true;
                }
            }
            false
        }
    }

    // words with no generators at all must already be satisfied
    for (meridian, w) in &words {
        if w.is_empty() && *meridian {
            return Err(CoverError::NoRepresentation);
        }
    }
    let mut dfs = Dfs {
        words: &words,
        checks_at: &checks_at,
        order: &order,
        perms: &perms,
        degree,
        orbit_sizes,
        values: vec![color_identity(degree); n],
    };
    if !dfs.run(0) {
        return Err(CoverError::NoRepresentation);
    }
    Ok(RepresentationOracle {
        base: base.clone(),
        generator_of: presentation.generator_of.clone(),
        values: dfs.values,
        degree,
    })
}

fn all_permutations(n: usize) -> Vec<ColorPerm> {
    let mut out = vec![color_identity(n)];
    let mut i = 0;
    while i < out.len() {
        let p = out[i].clone();
        for a in 0..n {
            for b in (a + 1)..n {
                let mut q = p.clone();
                q.swap(a, b);
                if !out.contains(&q) {
                    out.push(q);
                }
            }
        }
        i += 1;
    }
    out.sort();
    out
}

/// Base bijections ι compatible with the oracle: assignments of colors to the
/// base facet's vertices such that every vertex's color is a trivial orbit of
/// the subgroup induced by loops in its star. The construction's inductive
/// color invariant needs this at the base facet; a representation-backed
/// oracle is only defined up to conjugation, so the bijection must be matched
/// to it.
pub fn compatible_base_bijections(
    complex: &SimplicialComplex,
    sigma0: usize,
    oracle: &dyn MonodromyOracle,
) -> Result<Vec<Vec<VertexId>>, CoverError> {
    let carrier = CarrierMap::identity(complex);
    let gamma = FacetPath::new(vec![sigma0]);
    let vertices: Vec<VertexId> = complex.facet(sigma0).vertices().to_vec();
    let mut allowed: Vec<BTreeSet<usize>> = Vec::new();
    for v in &vertices {
        let h = subgroup_h(complex, &Face::vertex(*v), &gamma, oracle, &carrier)?;
        allowed.push(h.trivial_orbits);
    }
    // enumerate bijections color -> vertex with color(v) allowed for v
    let degree = oracle.degree();
    let mut out = Vec::new();
    let mut assignment: Vec<Option<usize>> = vec![None; degree]; // color -> vertex position
    fn rec(
        c: usize,
        degree: usize,
        allowed: &[BTreeSet<usize>],
        used: &mut Vec<bool>,
        assignment: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if c == degree {
            out.push(assignment.iter().map(|p| p.unwrap()).collect());
            return;
        }
        for pos in 0..degree {
            if !used[pos] && allowed[pos].contains(&c) {
                used[pos] = true;
                assignment[c] = Some(pos);
                rec(c + 1, degree, allowed, used, assignment, out);
                assignment[c] = None;
                used[pos] = false;
            }
        }
    }
    let mut positions = Vec::new();
    let mut used = vec![false; degree];
    rec(0, degree, &allowed, &mut used, &mut assignment, &mut positions);
    for p in positions {
        out.push(p.into_iter().map(|pos| vertices[pos]).collect());
    }
    Ok(out)
}

fn image_orbit_sizes(generators: &[ColorPerm], degree: usize) -> Vec<usize> {
    let elements = close_permutations(degree, generators);
    let mut seen = vec![false; degree];
    let mut sizes = Vec::new();
    for start in 0..degree {
        if seen[start] {
            continue;
        }
        let mut orbit = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(x) = queue.pop_front() {
            for g in &elements {
                if !seen[g[x]] {
                    seen[g[x]] = true;
                    orbit.insert(g[x]);
                    queue.push_back(g[x]);
                }
            }
        }
        sizes.push(orbit.len());
    }
    sizes.sort_unstable();
    sizes
}

/// Order of the group generated by the given color permutations.
pub fn image_order(generators: &[ColorPerm], degree: usize) -> usize {
    close_permutations(degree, generators).len()
}

// ---------------------------------------------------------------------------
// Subgroups H_{f,γ}
// ---------------------------------------------------------------------------

/// The subgroup of the monodromy group induced by loops of the form γ δ γ⁻,
/// where δ ranges over closed facet paths in st(f) based at γ's endpoint.
#[derive(Clone, Debug)]
pub struct SubgroupH {
    pub generators: Vec<ColorPerm>,
    pub elements: BTreeSet<ColorPerm>,
    /// Sorted orbit sizes of the subgroup action on the colors.
    pub orbit_partition: Vec<Vec<usize>>,
    /// Colors forming singleton orbits.
    pub trivial_orbits: BTreeSet<usize>,
}

/// Computes H_{f,γ} by querying the oracle on γ δ γ⁻ for every fundamental
/// cycle δ of the dual graph of st(f), based at γ's endpoint.
pub fn subgroup_h(
    complex: &SimplicialComplex,
    f: &Face,
    gamma: &FacetPath,
    oracle: &dyn MonodromyOracle,
    carrier: &CarrierMap,
) -> Result<SubgroupH, CoverError> {
    let sigma = gamma.end();
    debug_assert!(f.is_subset_of(complex.facet(sigma)));
    let degree = oracle.degree();
    let star_ids = complex.facets_containing(f);
    let pos: BTreeMap<usize, usize> = star_ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    // dual graph of the star (all shared ridges)
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); star_ids.len()];
    for (i, &a) in star_ids.iter().enumerate() {
        for &b in star_ids.iter().skip(i + 1) {
            if let Some(inter) = complex.facet(a).intersection(complex.facet(b)) {
                if inter.len() == complex.dim() {
                    adj[pos[&a]].push(pos[&b]);
                    adj[pos[&b]].push(pos[&a]);
                }
            }
        }
    }
    // spanning tree from sigma and one cycle per chord
    let root = pos[&sigma];
    let mut parent: Vec<Option<usize>> = vec![None; star_ids.len()];
    let mut seen = vec![false; star_ids.len()];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                parent[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    let tree_path = |mut i: usize| -> Vec<usize> {
        let mut p = vec![star_ids[i]];
        while i != root {
            i = parent[i].expect("star is connected");
            p.push(star_ids[i]);
        }
        p.reverse();
        p
    };
    let mut generators = Vec::new();
    for i in 0..star_ids.len() {
        for &j in &adj[i] {
            if i < j && parent[i] != Some(j) && parent[j] != Some(i) && seen[i] && seen[j] {
                let mut delta = tree_path(i);
                let mut back = tree_path(j);
                back.reverse();
                delta.extend(back);
                let delta = FacetPath::new(delta);
                let loop_path = gamma.concat(&delta).concat(&gamma.reversed());
                generators.push(oracle.query(complex, &loop_path, carrier)?);
            }
        }
    }
    let elements = close_permutations(degree, &generators);
    // orbits of the subgroup on colors
    let mut orbit_partition: Vec<Vec<usize>> = Vec::new();
    let mut assigned = vec![false; degree];
    for start in 0..degree {
        if assigned[start] {
            continue;
        }
        let mut orbit = BTreeSet::from([start]);
        assigned[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for g in &elements {
                if !assigned[g[x]] {
                    assigned[g[x]] = true;
                    orbit.insert(g[x]);
                    queue.push_back(g[x]);
                }
            }
        }
        orbit_partition.push(orbit.into_iter().collect());
    }
    let trivial_orbits =
        orbit_partition.iter().filter(|o| o.len() == 1).map(|o| o[0]).collect();
    Ok(SubgroupH { generators, elements, orbit_partition, trivial_orbits })
}

// ---------------------------------------------------------------------------
// The shelling-driven construction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttachCase {
    First,
    Ridge,
    TwoRidges,
    Other,
}

/// What happened at one facet attachment.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub facet: Vec<VertexId>,
    pub case: AttachCase,
    /// Edges subdivided during this step with the new vertex and its color.
    pub subdivided: Vec<([VertexId; 2], VertexId, usize)>,
    /// Codimension-2 faces whose stars closed at this step.
    pub closed_faces: Vec<Vec<VertexId>>,
    /// Number of loop checks performed (all passed).
    pub loop_checks: usize,
}

/// The builder's verification data: per-step trace, the final bookkeeping
/// coloring with the facet path recorded for every vertex, and the
/// terminal color-admissibility spot-checks.
#[derive(Clone, Debug)]
pub struct BuildCertificate {
    pub steps: Vec<StepRecord>,
    pub coloring: BTreeMap<VertexId, usize>,
    pub vertex_paths: BTreeMap<VertexId, Vec<Vec<VertexId>>>,
    pub total_loop_checks: usize,
}

/// Output of [`build_cover`]: the refined sphere, the subdivision script from
/// the input sphere, a shelling of the output extending the construction
/// order, the carrier map back to the input, and the certificate.
#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub sphere: SimplicialComplex,
    pub script: SubdivisionScript,
    pub shelling: Vec<usize>,
    pub carrier: CarrierMap,
    pub certificate: BuildCertificate,
}

struct Builder<'a> {
    oracle: &'a dyn MonodromyOracle,
    dim: usize,
    current: SimplicialComplex,
    carrier: CarrierMap,
    attached: Vec<Face>,
    attached_set: BTreeSet<Face>,
    sigma0: Face,
    iota: Vec<VertexId>,
    colors: BTreeMap<VertexId, usize>,
    vertex_paths: BTreeMap<VertexId, Vec<Face>>,
    script: SubdivisionScript,
    steps: Vec<StepRecord>,
    total_loop_checks: usize,
}

/// Runs the construction: iterates the shelling of `sprime`; each facet is
/// colored along a path from the base facet, recolored through the oracle's
/// subgroups, and stellarly subdivided on its at most d−1 conflicting edges
/// until the refinement is consistently colored; loop checks assert the
/// oracle agreement incrementally at every step.
pub fn build_cover(
    sprime: &SimplicialComplex,
    shelling: &[usize],
    branching: &BTreeSet<Face>,
    oracle: &dyn MonodromyOracle,
    sigma0: usize,
    iota: Vec<VertexId>,
) -> Result<BuildOutput, CoverError> {
    let d = sprime.dim();
    if oracle.degree() != d + 1 {
        return Err(CoverError::Internal(format!(
            "oracle degree {} does not match dimension {}",
            oracle.degree(),
            d
        )));
    }
    for f in branching {
        if f.len() != d.saturating_sub(1) || !sprime.is_face(f) {
            return Err(CoverError::BranchingNotCodim2(f.vertices().to_vec()));
        }
    }
    match verify_shelling(sprime, shelling) {
        Ok(Ok(_)) => {}
        Ok(Err(v)) => return Err(CoverError::NotAShelling(v.index)),
        Err(_) => return Err(CoverError::NotAShelling(0)),
    }
    if shelling.first() != Some(&sigma0) {
        return Err(CoverError::Internal("the shelling must start at the base facet".into()));
    }
    // The branching set lives in the codimension-2 skeleton, so it never
    // meets the open base facet; the loop checks below validate the
    // construction even when it touches the closed one.
    let sigma0_face = sprime.facet(sigma0).clone();
    assert_eq!(iota.len(), d + 1);
    assert!(iota.iter().all(|v| sigma0_face.contains(*v)));

    let mut builder = Builder {
        oracle,
        dim: d,
        current: sprime.clone(),
        carrier: CarrierMap::identity(sprime),
        attached: Vec::new(),
        attached_set: BTreeSet::new(),
        sigma0: sigma0_face,
        iota,
        colors: BTreeMap::new(),
        vertex_paths: BTreeMap::new(),
        script: SubdivisionScript::new(),
        steps: Vec::new(),
        total_loop_checks: 0,
    };
    builder.run(shelling)?;

    let shelling_out: Vec<usize> = builder
        .attached
        .iter()
        .map(|f| builder.current.facet_index(f).expect("attached facet"))
        .collect();
    match verify_shelling(&builder.current, &shelling_out) {
        Ok(Ok(_)) => {}
        _ => return Err(CoverError::Internal("construction order is not a shelling".into())),
    }
    let certificate = BuildCertificate {
        steps: builder.steps,
        coloring: builder.colors,
        vertex_paths: builder
            .vertex_paths
            .iter()
            .map(|(v, path)| (*v, path.iter().map(|f| f.vertices().to_vec()).collect()))
            .collect(),
        total_loop_checks: builder.total_loop_checks,
    };
    Ok(BuildOutput {
        sphere: builder.current,
        script: builder.script,
        shelling: shelling_out,
        carrier: builder.carrier,
        certificate,
    })
}

impl<'a> Builder<'a> {
    fn run(&mut self, shelling: &[usize]) -> Result<(), CoverError> {
        for &orig in shelling {
            loop {
                let block: Vec<Face> = self
                    .current
                    .facets()
                    .iter()
                    .enumerate()
                    .filter(|(i, f)| {
                        self.carrier.facet_carrier[*i] == orig && !self.attached_set.contains(*f)
                    })
                    .map(|(_, f)| f.clone())
                    .collect();
                if block.is_empty() {
                    break;
                }
                let sigma = self.pick_attachable(&block)?;
                self.attach_one(&sigma)?;
            }
        }
        self.terminal_color_checks()?;
        Ok(())
    }

    /// First facet of the block (lexicographically) whose intersection with
    /// the attached region is pure of ridges.
    fn pick_attachable(&self, block: &[Face]) -> Result<Face, CoverError> {
        if self.attached.is_empty() {
            return Ok(block[0].clone());
        }
        for f in block {
            if !self.maximal_intersections(f).is_empty() {
                return Ok(f.clone());
            }
        }
        Err(CoverError::Internal("no attachable facet in the current block".into()))
    }

    /// Maximal faces of σ ∩ D when they are all ridges; empty otherwise.
    fn maximal_intersections(&self, sigma: &Face) -> Vec<Face> {
        let mut inters: Vec<Face> =
            self.attached.iter().filter_map(|g| sigma.intersection(g)).collect();
        inters.sort();
        inters.dedup();
        let maximal: Vec<Face> = inters
            .iter()
            .filter(|f| !inters.iter().any(|g| *f != g && f.is_subset_of(g)))
            .cloned()
            .collect();
        if maximal.is_empty() || maximal.iter().any(|f| f.len() != self.dim) {
            Vec::new()
        } else {
            maximal
        }
    }

    fn attach_one(&mut self, sigma: &Face) -> Result<(), CoverError> {
        if self.attached.is_empty() {
            // base facet: color via iota
            for (c, v) in self.iota.clone().into_iter().enumerate() {
                self.colors.insert(v, c);
                self.vertex_paths.insert(v, vec![self.sigma0.clone()]);
            }
            self.mark_attached(sigma.clone());
            self.steps.push(StepRecord {
                facet: sigma.vertices().to_vec(),
                case: AttachCase::First,
                subdivided: Vec::new(),
                closed_faces: Vec::new(),
                loop_checks: 0,
            });
            return Ok(());
        }

        let ridges = self.maximal_intersections(sigma);
        if ridges.is_empty() {
            return Err(CoverError::Internal("attachment is not a shelling step".into()));
        }
        let step_index = self.steps.len();
        match ridges.len() {
            1 => self.attach_case_ridge(sigma, &ridges[0])?,
            2 => self.attach_case_two_ridges(sigma, &ridges[0], &ridges[1])?,
            _ => self.attach_case_other(sigma)?,
        }
        // incremental oracle agreement over all fundamental cycles of D
        let checks = self.assert_loop_invariant()?;
        self.total_loop_checks += checks;
        if let Some(step) = self.steps.get_mut(step_index) {
            step.loop_checks = checks;
        }
        Ok(())
    }

    fn mark_attached(&mut self, f: Face) {
        self.attached_set.insert(f.clone());
        self.attached.push(f);
    }

    /// Codimension-2 faces of σ whose star lies in D ∪ σ.
    fn closing_faces(&self, sigma: &Face) -> Vec<Face> {
        let mut out = Vec::new();
        for f in sigma.subsets_of_len(self.dim - 1) {
            let star = self.current.facets_containing(&f);
            let complete = star.iter().all(|&i| {
                let g = self.current.facet(i);
                g == sigma || self.attached_set.contains(g)
            });
            // σ always lies in the star of its own faces, so completeness
            // here means f closes exactly at this step
            if complete && star.len() >= 3 {
                out.push(f);
            }
        }
        out
    }

    /// Dual-graph adjacency among the attached facets plus optional extras,
    /// by current facet ids.
    fn region_adjacency(&self, extra: Option<&Face>) -> BTreeMap<usize, Vec<usize>> {
        let mut ids: Vec<usize> = self
            .attached
            .iter()
            .map(|f| self.current.facet_index(f).expect("attached facet"))
            .collect();
        if let Some(f) = extra {
            ids.push(self.current.facet_index(f).expect("extra facet"));
        }
        let mut adj: BTreeMap<usize, Vec<usize>> = ids.iter().map(|i| (*i, Vec::new())).collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in ids.iter().skip(i + 1) {
                if let Some(inter) = self.current.facet(a).intersection(self.current.facet(b)) {
                    if inter.len() == self.dim {
                        adj.get_mut(&a).unwrap().push(b);
                        adj.get_mut(&b).unwrap().push(a);
                    }
                }
            }
        }
        adj
    }

    /// Tree path between two facets within the given adjacency.
    fn region_path(
        adj: &BTreeMap<usize, Vec<usize>>,
        from: usize,
        to: usize,
    ) -> Result<Vec<usize>, CoverError> {
        let mut prev: BTreeMap<usize, usize> = BTreeMap::from([(from, from)]);
        let mut queue = VecDeque::from([from]);
        while let Some(cur) = queue.pop_front() {
            if cur == to {
                let mut path = vec![to];
                let mut c = to;
                while c != from {
                    c = prev[&c];
                    path.push(c);
                }
                path.reverse();
                return Ok(path);
            }
            for &nb in adj.get(&cur).into_iter().flatten() {
                prev.entry(nb).or_insert_with(|| {
                    queue.push_back(nb);
                    cur
                });
            }
        }
        Err(CoverError::Internal("attached region is not connected".into()))
    }

    fn sigma0_id(&self) -> usize {
        self.current.facet_index(&self.sigma0).expect("base facet is never subdivided")
    }

    /// Transport of the base coloring along a facet path: the vertex mapped
    /// from the base vertex colored c gets color c.
    fn induced_coloring(&self, path: &FacetPath) -> Result<BTreeMap<VertexId, usize>, CoverError> {
        let bij = projectivity(&self.current, path)?;
        Ok(self
            .iota
            .iter()
            .enumerate()
            .map(|(c, v)| (bij.apply(*v), c))
            .collect())
    }

    fn iota_star(&self, perm: &ColorPerm) -> VertexBijection {
        let sigma0_id = self.sigma0_id();
        let mut map = BTreeMap::new();
        let color_of: BTreeMap<VertexId, usize> =
            self.iota.iter().enumerate().map(|(c, v)| (*v, c)).collect();
        for v in self.sigma0.vertices() {
            map.insert(*v, self.iota[perm[color_of[v]]]);
        }
        VertexBijection::from_map(sigma0_id, sigma0_id, map)
    }

    fn attach_case_ridge(&mut self, sigma: &Face, ridge: &Face) -> Result<(), CoverError> {
        let apex = sigma.difference(ridge).expect("proper ridge");
        let apex = apex.vertices()[0];
        // path σ0 → σ inside D ∪ σ
        let adj = self.region_adjacency(Some(sigma));
        let sigma_id = self.current.facet_index(sigma).unwrap();
        let gamma = FacetPath::new(Self::region_path(&adj, self.sigma0_id(), sigma_id)?);
        let induced = self.induced_coloring(&gamma)?;
        let snapshot = self.snapshot();
        let h = subgroup_h(
            &snapshot.complex,
            &Face::vertex(apex),
            &gamma,
            self.oracle,
            &snapshot.carrier,
        )?;
        if h.trivial_orbits.is_empty() {
            return Err(CoverError::OracleInconsistent(format!(
                "H for vertex {apex} has no trivial orbit"
            )));
        }
        let induced_apex = induced[&apex];
        let apex_color = if h.trivial_orbits.contains(&induced_apex) {
            induced_apex
        } else {
            *h.trivial_orbits.iter().next().unwrap()
        };
        let mut decision = induced;
        decision.insert(apex, apex_color);
        let closed = self.closing_faces(sigma);
        let new_vertices =
            self.resolve_conflicts(sigma, decision, &gamma, &snapshot, AttachCase::Ridge, closed)?;
        self.colors.insert(apex, apex_color);
        let mut record_for: Vec<VertexId> = vec![apex];
        record_for.extend(new_vertices);
        self.record_paths(&record_for)?;
        Ok(())
    }

    fn attach_case_two_ridges(
        &mut self,
        sigma: &Face,
        ridge_a: &Face,
        ridge_b: &Face,
    ) -> Result<(), CoverError> {
        let f = ridge_a.intersection(ridge_b).expect("two ridges of a simplex meet");
        debug_assert_eq!(f.len(), self.dim - 1);
        let w = ridge_b.difference(&f).unwrap().vertices()[0];
        let sigma_id = self.current.facet_index(sigma).unwrap();
        // neighbors of σ across the two ridges (both attached)
        let neighbor_across = |ridge: &Face| -> Result<usize, CoverError> {
            self.current
                .facets_containing(ridge)
                .into_iter()
                .find(|&i| i != sigma_id && self.attached_set.contains(self.current.facet(i)))
                .ok_or_else(|| CoverError::Internal("missing neighbor across ridge".into()))
        };
        let sigma_v = neighbor_across(ridge_a)?;
        let sigma_w = neighbor_across(ridge_b)?;
        // γ: σ0 → σ_v in D; δ: σ_v → σ_w in st_D(f)
        let adj = self.region_adjacency(None);
        let gamma = FacetPath::new(Self::region_path(&adj, self.sigma0_id(), sigma_v)?);
        let delta = self.star_path_in_attached(&f, sigma_v, sigma_w)?;
        let hook = FacetPath::new(vec![sigma_w, sigma_id, sigma_v]);
        let lambda = gamma.concat(&delta).concat(&hook).concat(&gamma.reversed());
        let snapshot = self.snapshot();
        let a = self.oracle.query(&snapshot.complex, &lambda, &snapshot.carrier)?;

        // decision coloring: f ∪ v along γ crossed into σ, w twisted by a
        let gamma_sigma = gamma.concat(&FacetPath::new(vec![sigma_v, sigma_id]));
        let induced_sigma = self.induced_coloring(&gamma_sigma)?;
        let gamma_delta = gamma.concat(&delta);
        let induced_w = self.induced_coloring(&gamma_delta)?[&w];
        let mut decision = induced_sigma;
        decision.insert(w, a[induced_w]);
        let closed = self.closing_faces(sigma);
        let new_vertices = self.resolve_conflicts(
            sigma,
            decision,
            &gamma_sigma,
            &snapshot,
            AttachCase::TwoRidges,
            closed,
        )?;
        self.record_paths(&new_vertices)?;
        Ok(())
    }

    fn attach_case_other(&mut self, sigma: &Face) -> Result<(), CoverError> {
        let closed = self.closing_faces(sigma);
        self.mark_attached(sigma.clone());
        self.steps.push(StepRecord {
            facet: sigma.vertices().to_vec(),
            case: AttachCase::Other,
            subdivided: Vec::new(),
            closed_faces: closed.iter().map(|f| f.vertices().to_vec()).collect(),
            loop_checks: 0,
        });
        Ok(())
    }

    /// Closed dual path from one attached star facet to another, moving only
    /// across ridges containing f within the attached region.
    fn star_path_in_attached(
        &self,
        f: &Face,
        from: usize,
        to: usize,
    ) -> Result<FacetPath, CoverError> {
        let star: Vec<usize> = self
            .current
            .facets_containing(f)
            .into_iter()
            .filter(|&i| self.attached_set.contains(self.current.facet(i)))
            .collect();
        let mut prev: BTreeMap<usize, usize> = BTreeMap::from([(from, from)]);
        let mut queue = VecDeque::from([from]);
        while let Some(cur) = queue.pop_front() {
            if cur == to {
                let mut path = vec![to];
                let mut c = to;
                while c != from {
                    c = prev[&c];
                    path.push(c);
                }
                path.reverse();
                return Ok(FacetPath::new(path));
            }
            for &nb in &star {
                if prev.contains_key(&nb) {
                    continue;
                }
                if let Some(inter) = self.current.facet(cur).intersection(self.current.facet(nb)) {
                    if inter.len() == self.dim && f.is_subset_of(&inter) {
                        prev.insert(nb, cur);
                        queue.push_back(nb);
                    }
                }
            }
        }
        Err(CoverError::Internal("star of the closing face is not connected in D".into()))
    }

    /// Snapshot of the complex at step start, for oracle and subgroup queries.
    fn snapshot(&self) -> Snapshot {
        Snapshot { complex: self.current.clone(), carrier: self.carrier.clone() }
    }

    /// Iterated conflict resolution: subdivide the (at most one at a time,
    /// at most d−1 overall) monochromatic edges of σ's refinement, coloring
    /// each new vertex from the trivial orbits of its carrier-face subgroup,
    /// then attach the refinement in a shelling-compatible order.
    /// Returns the new vertices introduced.
    fn resolve_conflicts(
        &mut self,
        sigma: &Face,
        decision: BTreeMap<VertexId, usize>,
        gamma_sigma: &FacetPath,
        snapshot: &Snapshot,
        case: AttachCase,
        closed_faces: Vec<Face>,
    ) -> Result<Vec<VertexId>, CoverError> {
        let mut local_colors = decision.clone();
        // the color missing from σ's decision coloring
        let used: BTreeSet<usize> = decision.values().copied().collect();
        let missing: Vec<usize> = (0..=self.dim).filter(|c| !used.contains(c)).collect();

        let mut pieces: Vec<Face> = vec![sigma.clone()];
        let mut step_carrier: BTreeMap<VertexId, Face> =
            sigma.vertices().iter().map(|v| (*v, Face::vertex(*v))).collect();
        let mut assigned: Vec<(Face, usize)> = Vec::new(); // (f_e, color of v_e)
        let mut subdivided: Vec<([VertexId; 2], VertexId, usize)> = Vec::new();
        let mut new_vertices: Vec<VertexId> = Vec::new();

        for round in 0..=self.dim {
            // conflicting edges within the refinement pieces
            let mut conflicts: BTreeSet<Face> = BTreeSet::new();
            for piece in &pieces {
                for e in piece.subsets_of_len(2) {
                    let (x, y) = (e.vertices()[0], e.vertices()[1]);
                    if local_colors[&x] == local_colors[&y] {
                        conflicts.insert(e);
                    }
                }
            }
            if conflicts.is_empty() {
                break;
            }
            if round == self.dim {
                return Err(CoverError::OracleInconsistent(format!(
                    "conflicts persist after {} subdivisions of {:?}",
                    self.dim - 1,
                    sigma.vertices()
                )));
            }
            if conflicts.len() != 1 {
                return Err(CoverError::OracleInconsistent(format!(
                    "{} conflicting edges in the refinement of {:?}, expected one",
                    conflicts.len(),
                    sigma.vertices()
                )));
            }
            let e = conflicts.into_iter().next().unwrap();
            // carrier of the conflicting edge inside σ
            let f_e = {
                let (x, y) = (e.vertices()[0], e.vertices()[1]);
                step_carrier[&x].union(&step_carrier[&y])
            };
            let h = subgroup_h(&snapshot.complex, &f_e, gamma_sigma, self.oracle, &snapshot.carrier)?;
            if h.trivial_orbits.len() < f_e.len() {
                return Err(CoverError::OracleInconsistent(format!(
                    "H for {:?} has {} trivial orbits, expected at least {}",
                    f_e.vertices(),
                    h.trivial_orbits.len(),
                    f_e.len()
                )));
            }
            let blocked: BTreeSet<usize> = assigned
                .iter()
                .filter(|(g, _)| g != &f_e && g.is_subset_of(&f_e))
                .map(|(_, c)| *c)
                .collect();
            let admissible: Vec<usize> =
                h.trivial_orbits.iter().copied().filter(|c| !blocked.contains(c)).collect();
            if admissible.is_empty() {
                return Err(CoverError::OracleInconsistent(format!(
                    "no admissible color for the vertex subdividing {:?}",
                    e.vertices()
                )));
            }
            let color = match missing.iter().find(|x| admissible.contains(x)) {
                Some(x) => *x,
                None => admissible[0],
            };
            // the conflicting edge is free: it is never part of the attached region
            debug_assert!(self.attached.iter().all(|g| !e.is_subset_of(g)));
            let fresh = fresh_vertex_id(&self.current);
            let (next, delta) = stellar_subdivide_edge(&self.current, &e, fresh)?;
            self.script.push(&e, fresh);
            self.carrier = self.carrier.compose(&delta);
            self.current = next;
            local_colors.insert(fresh, color);
            self.colors.insert(fresh, color);
            step_carrier.insert(fresh, f_e.clone());
            assigned.push((f_e, color));
            subdivided.push(([e.vertices()[0], e.vertices()[1]], fresh, color));
            new_vertices.push(fresh);
            // split the affected pieces
            let (a, b) = (e.vertices()[0], e.vertices()[1]);
            let mut next_pieces = Vec::new();
            for piece in pieces {
                if e.is_subset_of(&piece) {
                    for endpoint in [a, b] {
                        next_pieces.push(Face::new(piece.vertices().iter().copied().map(|u| {
                            if u == endpoint {
                                fresh
                            } else {
                                u
                            }
                        })));
                    }
                } else {
                    next_pieces.push(piece);
                }
            }
            pieces = next_pieces;
        }

        // attach the refinement pieces in a shelling-compatible order
        let mut remaining: Vec<Face> = pieces;
        remaining.sort();
        while !remaining.is_empty() {
            let idx = remaining
                .iter()
                .position(|p| !self.maximal_intersections(p).is_empty())
                .ok_or_else(|| {
                    CoverError::Internal("refinement pieces admit no shelling order".into())
                })?;
            let piece = remaining.remove(idx);
            self.mark_attached(piece);
        }

        self.steps.push(StepRecord {
            facet: sigma.vertices().to_vec(),
            case,
            subdivided,
            closed_faces: closed_faces.iter().map(|f| f.vertices().to_vec()).collect(),
            loop_checks: 0,
        });
        Ok(new_vertices)
    }

    /// Records, for each listed vertex, a facet path from σ0 to an attached
    /// facet containing it (used by the terminal color spot-checks).
    fn record_paths(&mut self, vertices: &[VertexId]) -> Result<(), CoverError> {
        if vertices.is_empty() {
            return Ok(());
        }
        let adj = self.region_adjacency(None);
        for &v in vertices {
            let target = self
                .attached
                .iter()
                .find(|f| f.contains(v))
                .cloned()
                .ok_or_else(|| CoverError::Internal(format!("vertex {v} not attached")))?;
            let target_id = self.current.facet_index(&target).unwrap();
            let path = Self::region_path(&adj, self.sigma0_id(), target_id)?;
            self.vertex_paths
                .insert(v, path.into_iter().map(|i| self.current.facet(i).clone()).collect());
        }
        Ok(())
    }

    /// Checks ⟨γ⟩ = ı∗(oracle(γ)) for every fundamental cycle of the dual
    /// graph of the attached region. Returns the number of checks.
    fn assert_loop_invariant(&self) -> Result<usize, CoverError> {
        let adj = self.region_adjacency(None);
        let root = self.sigma0_id();
        // spanning tree over the region
        let mut parent: BTreeMap<usize, usize> = BTreeMap::from([(root, root)]);
        let mut queue = VecDeque::from([root]);
        while let Some(cur) = queue.pop_front() {
            for &nb in adj.get(&cur).into_iter().flatten() {
                parent.entry(nb).or_insert_with(|| {
                    queue.push_back(nb);
                    cur
                });
            }
        }
        let tree_path = |mut i: usize| -> Vec<usize> {
            let mut p = vec![i];
            while i != root {
                i = parent[&i];
                p.push(i);
            }
            p.reverse();
            p
        };
        let mut checks = 0;
        for (&a, nbrs) in &adj {
            for &b in nbrs {
                if a >= b || parent.get(&a) == Some(&b) || parent.get(&b) == Some(&a) {
                    continue;
                }
                let mut cycle = tree_path(a);
                let mut back = tree_path(b);
                back.reverse();
                cycle.extend(back);
                let cycle = FacetPath::new(cycle);
                let expected = self.iota_star(&self.oracle.query(
                    &self.current,
                    &cycle,
                    &self.carrier,
                )?);
                let actual = projectivity(&self.current, &cycle)?;
                if actual.map() != expected.map() {
                    return Err(CoverError::OracleInconsistent(format!(
                        "loop invariant fails on a fundamental cycle through facets {:?}",
                        cycle.0
                    )));
                }
                checks += 1;
            }
        }
        Ok(checks)
    }

    /// Terminal spot-check: every vertex's color is a trivial orbit of its
    /// subgroup for the recorded path, evaluated on the final sphere.
    fn terminal_color_checks(&self) -> Result<(), CoverError> {
        for (v, path_faces) in &self.vertex_paths {
            let ids: Vec<usize> = path_faces
                .iter()
                .map(|f| {
                    self.current
                        .facet_index(f)
                        .ok_or_else(|| CoverError::Internal("recorded path facet vanished".into()))
                })
                .collect::<Result<_, _>>()?;
            let gamma = FacetPath::new(ids);
            let h = subgroup_h(&self.current, &Face::vertex(*v), &gamma, self.oracle, &self.carrier)?;
            if !h.trivial_orbits.contains(&self.colors[v]) {
                return Err(CoverError::OracleInconsistent(format!(
                    "terminal check: color of vertex {v} is not a trivial orbit of its subgroup"
                )));
            }
        }
        Ok(())
    }
}

struct Snapshot {
    complex: SimplicialComplex,
    carrier: CarrierMap,
}

// ---------------------------------------------------------------------------
// Color equivalence
// ---------------------------------------------------------------------------

/// How two complexes correspond for the equivalence check.
pub enum Correspondence {
    /// The second complex refines the first; the carrier map goes from the
    /// refinement back to the base.
    Refinement(CarrierMap),
    /// Only unfolding statistics are compared.
    StatisticsOnly,
}

#[derive(Clone, Debug, Default)]
pub struct EquivalenceReport {
    /// Fundamental cycles of the refinement on which the projectivity
    /// homomorphisms disagree.
    pub mismatches: Vec<Vec<usize>>,
    pub cycles_checked: usize,
    pub statistics_equal: bool,
    /// Orbit size multisets of the two groups.
    pub orbit_sizes: (Vec<usize>, Vec<usize>),
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.statistics_equal
    }
}

/// Verifies color equivalence on a generating set: for every fundamental
/// cycle γ' of the refinement's dual graph, the projectivity of the projected
/// loop, transported through ψ, must equal ⟨γ'⟩. On success the unfolding
/// statistics (component count, per-component cell counts and Euler
/// characteristics) are compared as the observable consequence.
pub fn check_color_equivalence(
    base: &SimplicialComplex,
    refined: &SimplicialComplex,
    correspondence: &Correspondence,
    sigma0: usize,
    sigma0_refined: usize,
    psi: &BTreeMap<VertexId, VertexId>,
) -> Result<EquivalenceReport, CoverError> {
    let mut report = EquivalenceReport::default();
    if let Correspondence::Refinement(carrier) = correspondence {
        if carrier.facet_carrier[sigma0_refined] != sigma0 {
            return Err(CoverError::Internal(
                "the refined base facet must project onto the base facet".into(),
            ));
        }
        let dual = refined.dual_graph();
        for cycle in dual.fundamental_cycles(sigma0_refined) {
            let path = FacetPath::new(cycle.clone());
            let here = projectivity(refined, &path)?;
            let projected = project_path(refined, &path, carrier, base)?;
            let below = projectivity(base, &projected)?;
            // ψ∗(⟨projected⟩) = ψ ∘ ⟨projected⟩ ∘ ψ⁻¹
            let psi_inv: BTreeMap<VertexId, VertexId> =
                psi.iter().map(|(a, b)| (*b, *a)).collect();
            let transported: BTreeMap<VertexId, VertexId> = refined
                .facet(sigma0_refined)
                .vertices()
                .iter()
                .map(|v| (*v, psi[&below.apply(psi_inv[v])]))
                .collect();
            report.cycles_checked += 1;
            if here.map() != &transported {
                report.mismatches.push(cycle);
            }
        }
    }
    // observable statistics of the two unfoldings
    let stats = |k: &SimplicialComplex, s0: usize| -> Result<(usize, Vec<usize>, Vec<i64>), CoverError> {
        let u = crate::unfolding::partial_unfold_unchecked(k);
        let comps = crate::unfolding::components(&u);
        let mut eulers: Vec<i64> = comps.components.iter().map(|c| c.euler).collect();
        eulers.sort_unstable();
        let g = crate::projectivity::projectivity_group(k, s0)?;
        Ok((comps.components.len(), g.orbit_sizes(), eulers))
    };
    let (nb, ob, eb) = stats(base, sigma0)?;
    let (nr, or_, er) = stats(refined, sigma0_refined)?;
    report.orbit_sizes = (ob.clone(), or_.clone());
    report.statistics_equal = nb == nr && ob == or_ && eb == er;
    Ok(report)
}
