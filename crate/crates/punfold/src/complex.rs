//! Finite pure simplicial complexes and their structural queries: stars,
//! links, dual graphs, shellings and a few canonical generators.
//!
//! Complexes are immutable values: every operation that "changes" a complex
//! returns a new one. Vertices are arbitrary nonnegative integers, faces are
//! stored sorted, and facets are kept in lexicographic order so that equality,
//! hashing and serialization are deterministic.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("facet {0:?} has {1} vertices, expected {2}")]
    NonPureInput(Vec<VertexId>, usize, usize),
    #[error("facet {0:?} is contained in facet {1:?}")]
    DominatedFacet(Vec<VertexId>, Vec<VertexId>),
    #[error("{0:?} is not a face of the complex")]
    NotAFace(Vec<VertexId>),
    #[error("facet index {0} out of range")]
    UnknownFacet(usize),
    #[error("bad generator parameters: {0}")]
    BadParams(String),
    #[error("empty complex")]
    Empty,
}

/// A face: a nonempty sorted set of vertex ids.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Face(Vec<VertexId>);

impl Face {
    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        let mut v: Vec<VertexId> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        assert!(!v.is_empty(), "a face must have at least one vertex");
        Face(v)
    }

    pub fn vertex(v: VertexId) -> Self {
        Face(vec![v])
    }

    pub fn edge(a: VertexId, b: VertexId) -> Self {
        assert_ne!(a, b);
        Face::new([a, b])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Dimension: one less than the number of vertices.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Face) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn is_disjoint_from(&self, other: &Face) -> bool {
        self.0.iter().all(|v| !other.contains(*v))
    }

    pub fn union(&self, other: &Face) -> Face {
        Face::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Intersection; `None` when the faces share no vertex.
    pub fn intersection(&self, other: &Face) -> Option<Face> {
        let v: Vec<VertexId> = self.0.iter().copied().filter(|v| other.contains(*v)).collect();
        if v.is_empty() {
            None
        } else {
            Some(Face(v))
        }
    }

    /// The vertices of `self` not in `other`; `None` if that set is empty.
    pub fn difference(&self, other: &Face) -> Option<Face> {
        let v: Vec<VertexId> = self.0.iter().copied().filter(|v| !other.contains(*v)).collect();
        if v.is_empty() {
            None
        } else {
            Some(Face(v))
        }
    }

    /// All nonempty proper and improper subsets of size `k`.
    pub fn subsets_of_len(&self, k: usize) -> impl Iterator<Item = Face> + '_ {
        self.0.iter().copied().combinations(k).map(Face)
    }

    /// The face with `v` removed; `None` if that would leave no vertices.
    pub fn without(&self, v: VertexId) -> Option<Face> {
        if self.0.len() == 1 {
            return None;
        }
        Some(Face(self.0.iter().copied().filter(|u| *u != v).collect()))
    }
}

impl fmt::Debug for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<VertexId>> for Face {
    fn from(v: Vec<VertexId>) -> Self {
        Face::new(v)
    }
}

impl<const N: usize> From<[VertexId; N]> for Face {
    fn from(v: [VertexId; N]) -> Self {
        Face::new(v)
    }
}

/// A finite pure simplicial complex of dimension `dim`, given by its facets.
///
/// Invariants enforced at construction: every facet has exactly `dim + 1`
/// distinct vertices and no facet is contained in another. The face lattice
/// is implicit: a face is any nonempty subset of a facet.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimplicialComplex {
    dim: usize,
    facets: Vec<Face>,
}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimplicialComplex(dim={}, {} facets)", self.dim, self.facets.len())
    }
}

impl SimplicialComplex {
    /// Builds a pure `dim`-complex from a facet list. Rejects facets of the
    /// wrong cardinality and dominated facets.
    pub fn build(
        dim: usize,
        facets: impl IntoIterator<Item = impl Into<Face>>,
    ) -> Result<Self, ComplexError> {
        let mut fs: Vec<Face> = facets.into_iter().map(Into::into).collect();
        for f in &fs {
            if f.len() != dim + 1 {
                return Err(ComplexError::NonPureInput(f.vertices().to_vec(), f.len(), dim + 1));
            }
        }
        fs.sort();
        fs.dedup();
        // With all facets of equal cardinality, domination can only mean equality,
        // so after dedup nothing dominates. The check below stays for inputs fed
        // through `build_impure_check`, which allows mixed cardinalities to report
        // the better error.
        Ok(SimplicialComplex { dim, facets: fs })
    }

    /// Like [`build`](Self::build) but reports `DominatedFacet` for inputs where
    /// one listed facet is a proper subset of another (useful on raw user input
    /// where the intended dimension is taken from the largest facet).
    pub fn build_checked(
        dim: usize,
        facets: Vec<Vec<VertexId>>,
    ) -> Result<Self, ComplexError> {
        let norm: Vec<Face> = facets
            .iter()
            .map(|f| {
                let mut v = f.clone();
                v.sort_unstable();
                v.dedup();
                Face(v)
            })
            .collect();
        for (i, a) in norm.iter().enumerate() {
            for (j, b) in norm.iter().enumerate() {
                if i != j && a != b && a.is_subset_of(b) {
                    return Err(ComplexError::DominatedFacet(
                        a.vertices().to_vec(),
                        b.vertices().to_vec(),
                    ));
                }
            }
        }
        Self::build(dim, norm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[Face] {
        &self.facets
    }

    pub fn facet(&self, i: usize) -> &Face {
        &self.facets[i]
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn facet_index(&self, f: &Face) -> Option<usize> {
        self.facets.binary_search(f).ok()
    }

    pub fn vertices(&self) -> BTreeSet<VertexId> {
        self.facets.iter().flat_map(|f| f.vertices().iter().copied()).collect()
    }

    pub fn max_vertex_id(&self) -> Option<VertexId> {
        self.facets.iter().flat_map(|f| f.vertices().iter().copied()).max()
    }

    pub fn is_face(&self, f: &Face) -> bool {
        self.facets.iter().any(|g| f.is_subset_of(g))
    }

    pub fn facets_containing(&self, f: &Face) -> Vec<usize> {
        (0..self.facets.len()).filter(|i| f.is_subset_of(&self.facets[*i])).collect()
    }

    /// The star of `f`: the subcomplex generated by all facets containing `f`,
    /// of the same dimension as the ambient complex.
    pub fn star(&self, f: &Face) -> Result<SimplicialComplex, ComplexError> {
        let ids = self.facets_containing(f);
        if ids.is_empty() {
            return Err(ComplexError::NotAFace(f.vertices().to_vec()));
        }
        Ok(SimplicialComplex {
            dim: self.dim,
            facets: ids.into_iter().map(|i| self.facets[i].clone()).collect(),
        })
    }

    /// The link of `f`: all faces `g` with `g ∩ f = ∅` and `g ∪ f` a face.
    /// Its dimension is `dim − |f|`; the link of a facet is the empty complex.
    pub fn link(&self, f: &Face) -> Result<SimplicialComplex, ComplexError> {
        let ids = self.facets_containing(f);
        if ids.is_empty() {
            return Err(ComplexError::NotAFace(f.vertices().to_vec()));
        }
        if f.len() == self.dim + 1 {
            return Ok(SimplicialComplex { dim: 0, facets: Vec::new() });
        }
        let mut facets: Vec<Face> =
            ids.into_iter().map(|i| self.facets[i].difference(f).unwrap()).collect();
        facets.sort();
        facets.dedup();
        Ok(SimplicialComplex { dim: self.dim - f.len(), facets })
    }

    /// All faces of dimension `k`, enumerated explicitly.
    pub fn faces_of_dim(&self, k: usize) -> BTreeSet<Face> {
        let mut out = BTreeSet::new();
        if k > self.dim {
            return out;
        }
        for f in &self.facets {
            out.extend(f.subsets_of_len(k + 1));
        }
        out
    }

    pub fn edges(&self) -> BTreeSet<Face> {
        if self.dim == 0 {
            return BTreeSet::new();
        }
        self.faces_of_dim(1)
    }

    /// Codimension-2 faces (dimension `dim − 2`); empty for `dim < 2`.
    pub fn codim2_faces(&self) -> BTreeSet<Face> {
        if self.dim < 2 {
            return BTreeSet::new();
        }
        self.faces_of_dim(self.dim - 2)
    }

    /// `(f_0, …, f_d)` by explicit face enumeration.
    pub fn f_vector(&self) -> Vec<u64> {
        (0..=self.dim).map(|k| self.faces_of_dim(k).len() as u64).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) })
            .sum()
    }

    /// Ridges (codimension-1 faces) with the facets containing each.
    pub fn ridge_incidences(&self) -> BTreeMap<Face, Vec<usize>> {
        let mut map: BTreeMap<Face, Vec<usize>> = BTreeMap::new();
        for (i, f) in self.facets.iter().enumerate() {
            for r in f.subsets_of_len(self.dim.max(1)) {
                if self.dim == 0 {
                    break;
                }
                map.entry(r).or_default().push(i);
            }
        }
        map
    }

    /// True when every ridge lies in exactly two facets.
    pub fn is_closed_pseudomanifold(&self) -> bool {
        self.dim > 0 && self.ridge_incidences().values().all(|v| v.len() == 2)
    }

    /// The boundary complex: ridges lying in exactly one facet. Empty for
    /// closed complexes.
    pub fn boundary(&self) -> SimplicialComplex {
        let mut facets: Vec<Face> = self
            .ridge_incidences()
            .into_iter()
            .filter(|(_, inc)| inc.len() == 1)
            .map(|(r, _)| r)
            .collect();
        facets.sort();
        facets.dedup();
        SimplicialComplex { dim: self.dim.saturating_sub(1), facets }
    }

    pub fn dual_graph(&self) -> DualGraph {
        DualGraph::new(self)
    }

    /// Relabels vertices by a map; panics if the map is not injective on the
    /// vertex set. Used to put quotient complexes on canonical ids.
    pub fn relabel(&self, map: &BTreeMap<VertexId, VertexId>) -> SimplicialComplex {
        let facets: Vec<Face> = self
            .facets
            .iter()
            .map(|f| Face::new(f.vertices().iter().map(|v| map[v])))
            .collect();
        let mut c = SimplicialComplex { dim: self.dim, facets };
        c.facets.sort();
        assert_eq!(c.facets.len(), self.facets.len(), "relabeling collapsed facets");
        c
    }

    pub fn connectivity_report(&self) -> ConnectivityReport {
        connectivity_report(self)
    }
}

/// The dual graph: one node per facet, adjacent when the facets share a ridge.
#[derive(Clone, Debug)]
pub struct DualGraph {
    /// Per facet, the adjacent facets with the shared ridge.
    adj: Vec<Vec<(usize, Face)>>,
}

impl DualGraph {
    pub fn new(complex: &SimplicialComplex) -> Self {
        let n = complex.num_facets();
        let mut adj: Vec<Vec<(usize, Face)>> = vec![Vec::new(); n];
        if complex.dim() == 0 {
            return DualGraph { adj };
        }
        for (ridge, inc) in complex.ridge_incidences() {
            for (a, b) in inc.iter().tuple_combinations() {
                adj[*a].push((*b, ridge.clone()));
                adj[*b].push((*a, ridge.clone()));
            }
        }
        for nbrs in &mut adj {
            nbrs.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
        }
        DualGraph { adj }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, Face)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize, Face)> {
        let mut out = Vec::new();
        for (a, nbrs) in self.adj.iter().enumerate() {
            for (b, r) in nbrs {
                if a < *b {
                    out.push((a, *b, r.clone()));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        self.component_of(0).len() == self.adj.len()
    }

    pub fn component_of(&self, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(i) = queue.pop_front() {
            for (j, _) in &self.adj[i] {
                if seen.insert(*j) {
                    queue.push_back(*j);
                }
            }
        }
        seen
    }

    /// BFS spanning tree rooted at `root`: `parent[i] = Some(j)` for non-roots
    /// in the root's component.
    pub fn spanning_tree(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            for (j, _) in &self.adj[i] {
                if !seen[*j] {
                    seen[*j] = true;
                    parent[*j] = Some(i);
                    queue.push_back(*j);
                }
            }
        }
        parent
    }

    /// The tree path from `root` to `target` (inclusive) in the given
    /// spanning tree.
    pub fn tree_path(parent: &[Option<usize>], root: usize, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut cur = target;
        while cur != root {
            cur = parent[cur].expect("target not in the root's component");
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Fundamental cycles of the root's component: for every non-tree edge
    /// `(a, b)` the closed walk root→a, (a,b), b→root.
    pub fn fundamental_cycles(&self, root: usize) -> Vec<Vec<usize>> {
        let parent = self.spanning_tree(root);
        let mut cycles = Vec::new();
        for (a, b, _) in self.edges() {
            if parent[a] == Some(b) || parent[b] == Some(a) {
                continue;
            }
            // both endpoints must be reachable from the root
            if (a != root && parent[a].is_none()) || (b != root && parent[b].is_none()) {
                continue;
            }
            let to_a = Self::tree_path(&parent, root, a);
            let mut back = Self::tree_path(&parent, root, b);
            back.reverse();
            let mut cycle = to_a;
            cycle.extend(back);
            cycles.push(cycle);
        }
        cycles
    }
}

/// Result of the connectivity predicates. The simple-connectivity condition is
/// undecidable to check naively in general dimension, so
/// `locally_strongly_simply_connected_proxy` reports the implementable proxy
/// (codimension-≥2 links connected; vertex links certified as spheres/balls
/// for ambient dimension ≤ 3) and `proxy_used` flags that the proxy, not the
/// true condition, was evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub strongly_connected: bool,
    pub locally_strongly_connected: bool,
    pub locally_strongly_simply_connected_proxy: bool,
    pub nice_proxy: bool,
    pub proxy_used: bool,
}

fn connectivity_report(complex: &SimplicialComplex) -> ConnectivityReport {
    let strongly_connected = complex.dual_graph().is_connected();

    let mut locally_strongly_connected = true;
    'outer: for k in 0..=complex.dim() {
        for f in complex.faces_of_dim(k) {
            let star = complex.star(&f).expect("enumerated face");
            if !star.dual_graph().is_connected() {
                locally_strongly_connected = false;
                break 'outer;
            }
        }
    }

    let mut lssc = true;
    let mut proxy_used = false;
    if complex.dim() >= 2 {
        proxy_used = true;
        for k in 0..=complex.dim().saturating_sub(2) {
            for f in complex.faces_of_dim(k) {
                let link = complex.link(&f).expect("enumerated face");
                if !link.dual_graph().is_connected() {
                    lssc = false;
                }
            }
        }
        if complex.dim() <= 3 {
            for v in complex.vertices() {
                let link = complex.link(&Face::vertex(v)).expect("vertex of the complex");
                if !is_sphere_or_ball_link(&link) {
                    lssc = false;
                }
            }
        }
    }

    ConnectivityReport {
        strongly_connected,
        locally_strongly_connected,
        locally_strongly_simply_connected_proxy: lssc,
        nice_proxy: locally_strongly_connected && lssc,
        proxy_used,
    }
}

/// Certifies that a 1- or 2-complex is a combinatorial sphere or ball of its
/// dimension. Used by the connectivity proxy on vertex links for ambient
/// dimension ≤ 3.
pub fn is_sphere_or_ball_link(link: &SimplicialComplex) -> bool {
    match link.dim() {
        0 => link.num_facets() <= 2 && !link.is_empty(),
        1 => is_cycle_graph(link) || is_path_graph(link),
        2 => is_closed_surface_sphere(link) || is_disc(link),
        _ => false,
    }
}

/// A 1-complex that is a single closed cycle.
pub fn is_cycle_graph(g: &SimplicialComplex) -> bool {
    if g.dim() != 1 || g.is_empty() {
        return false;
    }
    let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
    for e in g.facets() {
        for v in e.vertices() {
            *degree.entry(*v).or_insert(0) += 1;
        }
    }
    degree.values().all(|d| *d == 2) && g.dual_graph().is_connected()
}

/// True when a set of edges forms a single closed cycle.
pub fn is_cycle_graph_faces(edges: &BTreeSet<Face>) -> bool {
    if edges.is_empty() || edges.iter().any(|e| e.len() != 2) {
        return false;
    }
    match SimplicialComplex::build(1, edges.iter().cloned()) {
        Ok(g) => is_cycle_graph(&g),
        Err(_) => false,
    }
}

/// A 1-complex that is a single path (its two endpoints have degree 1).
pub fn is_path_graph(g: &SimplicialComplex) -> bool {
    if g.dim() != 1 || g.is_empty() {
        return false;
    }
    let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
    for e in g.facets() {
        for v in e.vertices() {
            *degree.entry(*v).or_insert(0) += 1;
        }
    }
    let ones = degree.values().filter(|d| **d == 1).count();
    degree.values().all(|d| *d <= 2) && ones == 2 && g.dual_graph().is_connected()
}

/// Full combinatorial test for a closed 2-sphere: pure, every edge in exactly
/// two triangles, vertex links single cycles, connected, Euler characteristic 2.
pub fn is_closed_surface_sphere(s: &SimplicialComplex) -> bool {
    if s.dim() != 2 || s.is_empty() {
        return false;
    }
    if !s.is_closed_pseudomanifold() {
        return false;
    }
    if !s.dual_graph().is_connected() {
        return false;
    }
    for v in s.vertices() {
        let link = s.link(&Face::vertex(v)).expect("vertex of the complex");
        if !is_cycle_graph(&link) {
            return false;
        }
    }
    s.euler_characteristic() == 2
}

/// Proxy test that a complex is a closed combinatorial sphere: closed
/// pseudomanifold, strongly connected, Euler characteristic of the sphere,
/// with full combinatorial certification for dimension ≤ 2. For dimension ≥ 3
/// sphericity is undecidable by naive means, so this remains a proxy.
pub fn is_closed_pseudomanifold_sphere_proxy(s: &SimplicialComplex) -> bool {
    if s.is_empty() {
        return false;
    }
    match s.dim() {
        0 => s.num_facets() == 2,
        1 => is_cycle_graph(s),
        2 => is_closed_surface_sphere(s),
        d => {
            s.is_closed_pseudomanifold()
                && s.dual_graph().is_connected()
                && s.euler_characteristic() == 1 + if d % 2 == 0 { 1 } else { -1 }
                && s.vertices().iter().all(|v| {
                    let link = s.link(&Face::vertex(*v)).expect("vertex of the complex");
                    is_sphere_or_ball_link(&link) || link.dim() > 2
                })
        }
    }
}

/// Combinatorial test for a triangulated disc: every edge in one or two
/// triangles, vertex links cycles or paths, connected, Euler characteristic 1,
/// nonempty boundary.
pub fn is_disc(s: &SimplicialComplex) -> bool {
    if s.dim() != 2 || s.is_empty() {
        return false;
    }
    if !s.ridge_incidences().values().all(|v| (1..=2).contains(&v.len())) {
        return false;
    }
    if !s.dual_graph().is_connected() {
        return false;
    }
    for v in s.vertices() {
        let link = s.link(&Face::vertex(v)).expect("vertex of the complex");
        if !is_cycle_graph(&link) && !is_path_graph(&link) {
            return false;
        }
    }
    s.euler_characteristic() == 1 && !s.boundary().is_empty()
}

// ---------------------------------------------------------------------------
// Shellings
// ---------------------------------------------------------------------------

/// A verified shelling prefix: each facet meets the union of its predecessors
/// in a pure (d−1)-complex. `restriction_sets[i]` is the minimal free face of
/// step `i` (empty at step 0).
#[derive(Clone, Debug)]
pub struct ShellingPrefix {
    pub order: Vec<usize>,
    pub restriction_sets: Vec<Vec<VertexId>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellingViolation {
    /// First index at which the shelling condition fails.
    pub index: usize,
    /// The maximal faces of the offending intersection.
    pub intersection: Vec<Face>,
}

/// Checks the shelling condition `D_{i−1} ∩ σ_i` pure of dimension d−1 at
/// every step of `order`, which must list distinct facets of `complex`.
pub fn verify_shelling(
    complex: &SimplicialComplex,
    order: &[usize],
) -> Result<Result<ShellingPrefix, ShellingViolation>, ComplexError> {
    let mut seen = BTreeSet::new();
    for &i in order {
        if i >= complex.num_facets() || !seen.insert(i) {
            return Err(ComplexError::UnknownFacet(i));
        }
    }
    let d = complex.dim();
    let mut restriction_sets: Vec<Vec<VertexId>> = vec![Vec::new()];
    for (step, &fi) in order.iter().enumerate().skip(1) {
        let sigma = complex.facet(fi);
        // Maximal faces of D_{i-1} ∩ σ_i, collected from pairwise intersections.
        let mut inters: Vec<Face> = Vec::new();
        for &fj in &order[..step] {
            if let Some(f) = sigma.intersection(complex.facet(fj)) {
                inters.push(f);
            }
        }
        inters.sort();
        inters.dedup();
        let maximal: Vec<Face> = inters
            .iter()
            .filter(|f| !inters.iter().any(|g| *f != g && f.is_subset_of(g)))
            .cloned()
            .collect();
        let ok = !maximal.is_empty() && maximal.iter().all(|f| f.len() == d);
        if !ok {
            return Ok(Err(ShellingViolation { index: step, intersection: maximal }));
        }
        // Minimal free face: the vertices opposite to the shared ridges.
        let restriction: Vec<VertexId> = sigma
            .vertices()
            .iter()
            .copied()
            .filter(|v| maximal.iter().any(|r| !r.contains(*v)) && {
                let ridge = sigma.without(*v).unwrap();
                maximal.contains(&ridge)
            })
            .collect();
        restriction_sets.push(restriction);
    }
    Ok(Ok(ShellingPrefix { order: order.to_vec(), restriction_sets }))
}

/// Exact backtracking search for a shelling order. `None` proves the complex
/// is not shellable. Intended for desk-scale inputs; candidates are ordered by
/// descending ridge-overlap with the current union as a pruning heuristic.
pub fn find_shelling(complex: &SimplicialComplex) -> Option<Vec<usize>> {
    find_shelling_from(complex, None)
}

/// Like [`find_shelling`] but forces the order to start with `first` when given.
pub fn find_shelling_from(complex: &SimplicialComplex, first: Option<usize>) -> Option<Vec<usize>> {
    let n = complex.num_facets();
    if n == 0 {
        return Some(Vec::new());
    }
    let d = complex.dim();
    let dual = complex.dual_graph();

    // step_ok: attaching `cand` to the facets in `chosen` is a valid shelling step
    let step_ok = |chosen: &[usize], cand: usize| -> bool {
        let sigma = complex.facet(cand);
        let mut inters: Vec<Face> = Vec::new();
        for &j in chosen {
            if let Some(f) = sigma.intersection(complex.facet(j)) {
                inters.push(f);
            }
        }
        if inters.is_empty() {
            return false;
        }
        inters.sort();
        inters.dedup();
        inters
            .iter()
            .all(|f| f.len() == d || inters.iter().any(|g| f != g && f.is_subset_of(g)))
    };

    fn rec(
        complex: &SimplicialComplex,
        dual: &DualGraph,
        chosen: &mut Vec<usize>,
        used: &mut Vec<bool>,
        step_ok: &dyn Fn(&[usize], usize) -> bool,
    ) -> bool {
        if chosen.len() == complex.num_facets() {
            return true;
        }
        // candidates adjacent to the current union, by descending ridge overlap
        let mut cands: Vec<(usize, usize)> = Vec::new();
        for &c in chosen.iter() {
            for (nb, _) in dual.neighbors(c) {
                if !used[*nb] {
                    match cands.iter_mut().find(|(i, _)| i == nb) {
                        Some((_, w)) => *w += 1,
                        None => cands.push((*nb, 1)),
                    }
                }
            }
        }
        cands.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (cand, _) in cands {
            if step_ok(chosen, cand) {
                chosen.push(cand);
                used[cand] = true;
                if rec(complex, dual, chosen, used, step_ok) {
                    return true;
                }
                used[cand] = false;
                chosen.pop();
            }
        }
        false
    }

    let starts: Vec<usize> = match first {
        Some(f) => vec![f],
        None => (0..n).collect(),
    };
    for start in starts {
        let mut chosen = vec![start];
        let mut used = vec![false; n];
        used[start] = true;
        if rec(complex, &dual, &mut chosen, &mut used, &step_ok) {
            return Some(chosen);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Canonical example complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Boundary of the (d+1)-simplex: the smallest d-sphere.
    BoundarySimplex { d: usize },
    /// Boundary of the (d+1)-dimensional cross-polytope: a foldable d-sphere.
    CrossPolytope { d: usize },
    /// Boundary of the cyclic polytope C(D, n) via Gale's evenness condition,
    /// a (D−1)-sphere on n vertices.
    CyclicSphere { polytope_dim: usize, n: usize },
    /// Cone with apex 0 over the boundary of the d-simplex on {1..d+1}.
    StarredSimplex { d: usize },
}

pub fn generate(kind: &GeneratorKind) -> Result<SimplicialComplex, ComplexError> {
    match *kind {
        GeneratorKind::BoundarySimplex { d } => {
            let verts: Vec<VertexId> = (0..=(d as VertexId + 1)).collect();
            let facets: Vec<Face> =
                verts.iter().copied().combinations(d + 1).map(Face::new).collect();
            SimplicialComplex::build(d, facets)
        }
        GeneratorKind::CrossPolytope { d } => {
            // vertex pair (2i, 2i+1) antipodal for i = 0..d
            let mut facets = Vec::new();
            for choice in 0..(1u32 << (d + 1)) {
                let f: Vec<VertexId> =
                    (0..=(d as u32)).map(|i| 2 * i + ((choice >> i) & 1)).collect();
                facets.push(Face::new(f));
            }
            SimplicialComplex::build(d, facets)
        }
        GeneratorKind::CyclicSphere { polytope_dim, n } => {
            if n <= polytope_dim + 1 || polytope_dim < 2 {
                return Err(ComplexError::BadParams(format!(
                    "cyclic sphere needs n > D+1 and D ≥ 2, got D={polytope_dim}, n={n}"
                )));
            }
            let facets = gale_evenness_facets(polytope_dim, n);
            SimplicialComplex::build(polytope_dim - 1, facets)
        }
        GeneratorKind::StarredSimplex { d } => {
            if d == 0 {
                return Err(ComplexError::BadParams("starred simplex needs d ≥ 1".into()));
            }
            let boundary: Vec<Vec<VertexId>> = (1..=(d as VertexId + 1))
                .combinations(d)
                .collect();
            let facets: Vec<Face> = boundary
                .into_iter()
                .map(|mut f| {
                    f.push(0);
                    Face::new(f)
                })
                .collect();
            SimplicialComplex::build(d, facets)
        }
    }
}

/// Facets of the cyclic polytope C(D, n) on vertices 0..n−1 by Gale's evenness
/// condition: a D-subset S is a facet iff any two elements not in S have an
/// even number of elements of S between them.
fn gale_evenness_facets(polytope_dim: usize, n: usize) -> Vec<Face> {
    let mut facets = Vec::new();
    for comb in (0..n as VertexId).combinations(polytope_dim) {
        let in_set: Vec<bool> = {
            let mut v = vec![false; n];
            for &x in &comb {
                v[x as usize] = true;
            }
            v
        };
        let mut ok = true;
        'pairs: for i in 0..n {
            if in_set[i] {
                continue;
            }
            for j in (i + 1)..n {
                if in_set[j] {
                    continue;
                }
                let between = (i + 1..j).filter(|k| in_set[*k]).count();
                if between % 2 != 0 {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        if ok {
            facets.push(Face::new(comb));
        }
    }
    facets
}

/// The cone over `base`: a fresh apex joined to every facet.
pub fn cone(base: &SimplicialComplex) -> Result<SimplicialComplex, ComplexError> {
    if base.is_empty() {
        return Err(ComplexError::Empty);
    }
    let apex = base.max_vertex_id().unwrap() + 1;
    let facets: Vec<Face> = base
        .facets()
        .iter()
        .map(|f| {
            let mut v = f.vertices().to_vec();
            v.push(apex);
            Face::new(v)
        })
        .collect();
    SimplicialComplex::build(base.dim() + 1, facets)
}

/// The n-gon: a 1-sphere on vertices 0..n−1.
pub fn polygon(n: usize) -> Result<SimplicialComplex, ComplexError> {
    if n < 3 {
        return Err(ComplexError::BadParams(format!("polygon needs n ≥ 3, got {n}")));
    }
    let facets: Vec<Face> = (0..n)
        .map(|i| Face::edge(i as VertexId, ((i + 1) % n) as VertexId))
        .collect();
    SimplicialComplex::build(1, facets)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn boundary_simplex(d: usize) -> SimplicialComplex {
        generate(&GeneratorKind::BoundarySimplex { d }).unwrap()
    }

    pub(crate) fn starred_triangle() -> SimplicialComplex {
        generate(&GeneratorKind::StarredSimplex { d: 2 }).unwrap()
    }

    #[test]
    fn build_boundary_of_3_simplex() {
        let k = SimplicialComplex::build(2, vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]])
            .unwrap();
        assert_eq!(k.num_facets(), 4);
        assert_eq!(k.f_vector(), vec![4, 6, 4]);
    }

    #[test]
    fn build_starred_triangle() {
        let k = SimplicialComplex::build(2, vec![vec![0, 1, 2], vec![0, 2, 3], vec![0, 3, 1]]).unwrap();
        assert_eq!(k.f_vector(), vec![4, 6, 3]);
        assert_eq!(k, starred_triangle());
    }

    #[test]
    fn build_rejects_wrong_arity() {
        let err = SimplicialComplex::build(2, vec![vec![0, 1, 2], vec![0, 1, 2, 3]]).unwrap_err();
        assert!(matches!(err, ComplexError::NonPureInput(_, 4, 3)));
    }

    #[test]
    fn build_checked_rejects_dominated() {
        let err =
            SimplicialComplex::build_checked(2, vec![vec![0, 1, 2], vec![0, 1]]).unwrap_err();
        assert!(matches!(err, ComplexError::DominatedFacet(..)));
    }

    #[test]
    fn star_examples() {
        let k = boundary_simplex(2); // ∂Δ³ on {0,1,2,3}
        let st = k.star(&Face::vertex(1)).unwrap();
        assert_eq!(st.num_facets(), 3);
        assert!(st.facets().iter().all(|f| f.contains(1)));

        let t = starred_triangle();
        assert_eq!(t.star(&Face::vertex(0)).unwrap().num_facets(), 3);
        assert_eq!(t.star(&Face::edge(1, 2)).unwrap().num_facets(), 1);
        assert!(t.star(&Face::edge(4, 5)).is_err());
    }

    #[test]
    fn link_examples() {
        let t = starred_triangle();
        let lk0 = t.link(&Face::vertex(0)).unwrap();
        assert!(is_cycle_graph(&lk0));
        assert_eq!(lk0.num_facets(), 3);

        let lk1 = t.link(&Face::vertex(1)).unwrap();
        assert!(is_path_graph(&lk1));
        assert_eq!(lk1.num_facets(), 2);

        // every edge link of ∂Δ⁴ is a 3-cycle
        let k = boundary_simplex(3);
        for e in k.edges() {
            let lk = k.link(&e).unwrap();
            assert!(is_cycle_graph(&lk));
            assert_eq!(lk.num_facets(), 3);
        }
    }

    #[test]
    fn link_of_facet_is_empty() {
        let k = boundary_simplex(2);
        let lk = k.link(k.facet(0)).unwrap();
        assert!(lk.is_empty());
    }

    #[test]
    fn dual_graph_examples() {
        let k = boundary_simplex(2);
        let g = k.dual_graph();
        assert_eq!(g.num_nodes(), 4);
        assert!((0..4).all(|i| g.degree(i) == 3)); // complete graph K4

        let t = starred_triangle();
        let g = t.dual_graph();
        assert_eq!(g.num_nodes(), 3);
        assert!((0..3).all(|i| g.degree(i) == 2)); // 3-cycle

        let c = generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap();
        let g = c.dual_graph();
        assert_eq!(g.num_nodes(), 14);
        assert!((0..14).all(|i| g.degree(i) == 4));
    }

    #[test]
    fn dual_degree_bound_and_exactness() {
        for k in [
            boundary_simplex(2),
            boundary_simplex(3),
            generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap(),
            generate(&GeneratorKind::CrossPolytope { d: 3 }).unwrap(),
            generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap(),
        ] {
            let g = k.dual_graph();
            for i in 0..g.num_nodes() {
                assert_eq!(g.degree(i), k.dim() + 1);
            }
        }
    }

    #[test]
    fn connectivity_reports() {
        let r = boundary_simplex(2).connectivity_report();
        assert!(r.strongly_connected && r.locally_strongly_connected && r.nice_proxy);

        let two = SimplicialComplex::build(2, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert!(!two.connectivity_report().strongly_connected);

        let r = starred_triangle().connectivity_report();
        assert!(r.strongly_connected && r.locally_strongly_connected && r.nice_proxy);
        assert!(r.proxy_used);
    }

    #[test]
    fn verify_shelling_all_orders_of_boundary_simplex() {
        // brute-force oracle: for ∂Δ³ every facet order is a shelling
        let k = boundary_simplex(2);
        for perm in (0..4).permutations(4) {
            let res = verify_shelling(&k, &perm).unwrap();
            assert!(res.is_ok(), "order {perm:?} should shell ∂Δ³");
        }
    }

    #[test]
    fn verify_shelling_starred_triangle() {
        let t = starred_triangle();
        let order: Vec<usize> = (0..3).collect();
        let res = verify_shelling(&t, &order).unwrap().unwrap();
        assert_eq!(res.restriction_sets[0], Vec::<VertexId>::new());
        // each later facet attaches along at least one ridge
        assert!(res.restriction_sets[1..].iter().all(|r| !r.is_empty()));
    }

    #[test]
    fn verify_shelling_detects_vertex_attachment() {
        let k = SimplicialComplex::build(2, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        let res = verify_shelling(&k, &[0, 1]).unwrap();
        let v = res.unwrap_err();
        assert_eq!(v.index, 1);
        assert_eq!(v.intersection, vec![Face::vertex(2)]);
    }

    #[test]
    fn verify_shelling_rejects_unknown_or_repeated() {
        let k = boundary_simplex(2);
        assert!(verify_shelling(&k, &[0, 0]).is_err());
        assert!(verify_shelling(&k, &[9]).is_err());
    }

    #[test]
    fn find_shelling_examples() {
        let k = boundary_simplex(3);
        let order = find_shelling(&k).unwrap();
        assert!(verify_shelling(&k, &order).unwrap().is_ok());

        let c = generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap();
        let order = find_shelling(&c).unwrap();
        assert_eq!(order.len(), 14);
        assert!(verify_shelling(&c, &order).unwrap().is_ok());

        let bad = SimplicialComplex::build(2, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert!(find_shelling(&bad).is_none());
    }

    #[test]
    fn find_shelling_prefixes_verify() {
        let k = generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap();
        let order = find_shelling(&k).unwrap();
        for l in 1..=order.len() {
            assert!(verify_shelling(&k, &order[..l]).unwrap().is_ok());
        }
    }

    #[test]
    fn generator_f_vectors() {
        let oct = generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap();
        assert_eq!(oct.f_vector(), vec![6, 12, 8]);

        let c47 = generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap();
        assert_eq!(c47.f_vector(), vec![7, 21, 28, 14]);
        assert_eq!(c47.euler_characteristic(), 0);

        let ball = cone(&polygon(7).unwrap()).unwrap();
        assert_eq!(ball.dim(), 2);
        assert_eq!(ball.num_facets(), 7);
        assert_eq!(ball.boundary(), polygon(7).unwrap());
    }

    #[test]
    fn generator_euler_relation() {
        for (k, d) in [
            (boundary_simplex(2), 2),
            (boundary_simplex(3), 3),
            (boundary_simplex(4), 4),
            (generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap(), 2),
            (generate(&GeneratorKind::CrossPolytope { d: 3 }).unwrap(), 3),
            (generate(&GeneratorKind::CrossPolytope { d: 4 }).unwrap(), 4),
            (generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap(), 3),
            (generate(&GeneratorKind::CyclicSphere { polytope_dim: 3, n: 6 }).unwrap(), 2),
        ] {
            let expected = 1 + if d % 2 == 0 { 1 } else { -1 };
            assert_eq!(k.euler_characteristic(), expected);
            assert!(k.is_closed_pseudomanifold());
        }
    }

    #[test]
    fn cyclic_sphere_rejects_bad_params() {
        assert!(generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 4 }).is_err());
    }

    #[test]
    fn star_link_duality_on_generators() {
        for k in [
            boundary_simplex(2),
            boundary_simplex(3),
            generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap(),
            starred_triangle(),
        ] {
            for dim in 0..k.dim() {
                for f in k.faces_of_dim(dim) {
                    let star = k.star(&f).unwrap();
                    let link = k.link(&f).unwrap();
                    // link facets = star facets minus f
                    let from_star: BTreeSet<Face> = star
                        .facets()
                        .iter()
                        .map(|g| g.difference(&f).unwrap())
                        .collect();
                    let link_facets: BTreeSet<Face> = link.facets().iter().cloned().collect();
                    assert_eq!(from_star, link_facets);
                }
            }
        }
    }
}
