//! The partial unfolding of a simplicial complex as a pseudo-simplicial
//! complex: labeled facet copies glued along ridges whenever the perspectivity
//! carries one label to the other, with vertex and face classes tracked by
//! union-find and a projection back to the base complex.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::complex::{Face, SimplicialComplex, VertexId};
use crate::projectivity::{odd_subcomplex_unchecked, perspectivity};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnfoldError {
    #[error("complex is not locally strongly connected")]
    NotLocallyStronglyConnected,
}

/// Plain union-find with path compression.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

/// A cell of the unfolding: a copy of a base facet labeled by one of its
/// vertices. Cells are indexed by `facet * (d+1) + label_position`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub usize);

/// The partial unfolding of a base complex.
///
/// Cells `(σ, v)` and `(τ, w)` are glued along their shared ridge exactly when
/// σ, τ are neighbors and the perspectivity sends v to w. The quotient's faces
/// are never materialized globally; vertex and face classes live in union-find
/// structures, so pseudo-simplicial quotients are first-class.
#[derive(Clone, Debug)]
pub struct Unfolding {
    base: SimplicialComplex,
    /// Glued pairs (a < b) with the base ridge they are glued along.
    gluings: Vec<(Cell, Cell, Face)>,
    /// Union-find over (cell, vertex position) pairs.
    vertex_classes: UnionFind,
    /// Component index per cell.
    component_of: Vec<usize>,
    num_components: usize,
}

impl Unfolding {
    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    fn labels_per_facet(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn num_cells(&self) -> usize {
        self.base.num_facets() * self.labels_per_facet()
    }

    pub fn cell(&self, facet: usize, label: VertexId) -> Cell {
        let pos = self
            .base
            .facet(facet)
            .vertices()
            .iter()
            .position(|v| *v == label)
            .expect("label must be a vertex of the facet");
        Cell(facet * self.labels_per_facet() + pos)
    }

    /// The base facet a cell projects to.
    pub fn projection(&self, cell: Cell) -> usize {
        cell.0 / self.labels_per_facet()
    }

    /// The vertex label of a cell.
    pub fn label(&self, cell: Cell) -> VertexId {
        let facet = self.projection(cell);
        self.base.facet(facet).vertices()[cell.0 % self.labels_per_facet()]
    }

    pub fn gluings(&self) -> &[(Cell, Cell, Face)] {
        &self.gluings
    }

    pub fn component_of(&self, cell: Cell) -> usize {
        self.component_of[cell.0]
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    /// Representative of the vertex class of base vertex `v` inside `cell`.
    pub fn vertex_class(&mut self, cell: Cell, v: VertexId) -> usize {
        let facet = self.projection(cell);
        let pos = self
            .base
            .facet(facet)
            .vertices()
            .iter()
            .position(|u| *u == v)
            .expect("vertex of the projected facet");
        let k = self.labels_per_facet();
        self.vertex_classes.find(cell.0 * k + pos)
    }

    /// The vertex-class ids of a cell, in base-vertex order.
    pub fn cell_vertex_classes(&mut self, cell: Cell) -> Vec<usize> {
        let k = self.labels_per_facet();
        (0..k).map(|pos| self.vertex_classes.find(cell.0 * k + pos)).collect()
    }
}

/// Constructs the partial unfolding of `complex`.
pub fn partial_unfold(complex: &SimplicialComplex) -> Result<Unfolding, UnfoldError> {
    if !complex.connectivity_report().locally_strongly_connected {
        return Err(UnfoldError::NotLocallyStronglyConnected);
    }
    Ok(partial_unfold_unchecked(complex))
}

/// [`partial_unfold`] without the connectivity precondition check.
pub fn partial_unfold_unchecked(complex: &SimplicialComplex) -> Unfolding {
    let k = complex.dim() + 1;
    let n_cells = complex.num_facets() * k;
    let mut cell_adj: Vec<Vec<Cell>> = vec![Vec::new(); n_cells];
    let mut gluings = Vec::new();
    let mut vertex_classes = UnionFind::new(n_cells * k);

    let dual = complex.dual_graph();
    for (a, b, ridge) in dual.edges() {
        let persp = perspectivity(complex, a, b).expect("dual edge endpoints are neighbors");
        let fa = complex.facet(a);
        let fb = complex.facet(b);
        for (pos_a, &v) in fa.vertices().iter().enumerate() {
            let w = persp.apply(v);
            let pos_b = fb.vertices().iter().position(|u| *u == w).expect("perspectivity image");
            let ca = Cell(a * k + pos_a);
            let cb = Cell(b * k + pos_b);
            cell_adj[ca.0].push(cb);
            cell_adj[cb.0].push(ca);
            gluings.push((ca.min(cb), ca.max(cb), ridge.clone()));
            // the gluing identifies the shared ridge pointwise
            for u in ridge.vertices() {
                let pa = fa.vertices().iter().position(|x| x == u).unwrap();
                let pb = fb.vertices().iter().position(|x| x == u).unwrap();
                vertex_classes.union(ca.0 * k + pa, cb.0 * k + pb);
            }
        }
    }
    gluings.sort();

    // connected components of the gluing graph
    let mut component_of = vec![usize::MAX; n_cells];
    let mut num_components = 0;
    for start in 0..n_cells {
        if component_of[start] != usize::MAX {
            continue;
        }
        let id = num_components;
        num_components += 1;
        component_of[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for nb in &cell_adj[c] {
                if component_of[nb.0] == usize::MAX {
                    component_of[nb.0] = id;
                    queue.push_back(nb.0);
                }
            }
        }
    }

    Unfolding { base: complex.clone(), gluings, vertex_classes, component_of, num_components }
}

// ---------------------------------------------------------------------------
// Quotient faces
// ---------------------------------------------------------------------------

/// Union-find over (cell, vertex-subset) pairs: the faces of the quotient.
/// Masks are nonempty subsets of the cell's d+1 vertex positions.
struct FaceClasses {
    uf: UnionFind,
    masks: usize,
}

impl FaceClasses {
    fn build(u: &Unfolding) -> FaceClasses {
        let k = u.labels_per_facet();
        let masks = 1usize << k;
        let mut uf = UnionFind::new(u.num_cells() * masks);
        for (ca, cb, ridge) in &u.gluings {
            let fa = u.base.facet(u.projection(*ca));
            let fb = u.base.facet(u.projection(*cb));
            let pos_a: Vec<usize> = ridge
                .vertices()
                .iter()
                .map(|v| fa.vertices().iter().position(|x| x == v).unwrap())
                .collect();
            let pos_b: Vec<usize> = ridge
                .vertices()
                .iter()
                .map(|v| fb.vertices().iter().position(|x| x == v).unwrap())
                .collect();
            // all nonempty subsets of the ridge, identified pointwise
            let r = ridge.len();
            for sub in 1..(1usize << r) {
                let mut mask_a = 0usize;
                let mut mask_b = 0usize;
                for (bit, (pa, pb)) in pos_a.iter().zip(&pos_b).enumerate() {
                    if sub & (1 << bit) != 0 {
                        mask_a |= 1 << pa;
                        mask_b |= 1 << pb;
                    }
                }
                uf.union(ca.0 * masks + mask_a, cb.0 * masks + mask_b);
            }
        }
        FaceClasses { uf, masks }
    }

    fn find(&mut self, cell: Cell, mask: usize) -> usize {
        self.uf.find(cell.0 * self.masks + mask)
    }
}

// ---------------------------------------------------------------------------
// Components
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStats {
    pub cells: usize,
    /// Number of cells over each base facet; uniform on strongly connected
    /// bases and equal to the size of the matching projectivity orbit.
    pub cells_per_facet: usize,
    /// Euler characteristic of the quotient, via face classes.
    pub euler: i64,
    /// Face counts per dimension of the quotient (the f-vector when the
    /// component is simplicial).
    pub face_counts: Vec<u64>,
    pub simplicial: bool,
}

#[derive(Clone, Debug)]
pub struct ComponentReport {
    pub components: Vec<ComponentStats>,
}

impl ComponentReport {
    pub fn cell_counts(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.components.iter().map(|c| c.cells).collect();
        v.sort_unstable();
        v
    }
}

/// Per-component statistics of the unfolding.
pub fn components(u: &Unfolding) -> ComponentReport {
    let mut fc = FaceClasses::build(u);
    let k = u.labels_per_facet();
    let mut comps = vec![
        ComponentStats {
            cells: 0,
            cells_per_facet: 0,
            euler: 0,
            face_counts: vec![0; k],
            simplicial: true,
        };
        u.num_components
    ];
    for c in 0..u.num_cells() {
        comps[u.component_of[c]].cells += 1;
    }
    // face classes per component, counted once per representative
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for c in 0..u.num_cells() {
        let comp = u.component_of[c];
        for mask in 1..(1usize << k) {
            let root = fc.find(Cell(c), mask);
            if seen.insert(root) {
                let dim = (mask.count_ones() - 1) as usize;
                comps[comp].face_counts[dim] += 1;
            }
        }
    }
    for (comp, stats) in comps.iter_mut().enumerate() {
        stats.cells_per_facet = stats.cells / u.base.num_facets();
        stats.euler = stats
            .face_counts
            .iter()
            .enumerate()
            .map(|(d, n)| if d % 2 == 0 { *n as i64 } else { -(*n as i64) })
            .sum();
        stats.simplicial = simplicial_violation(u, Some(comp)).is_none();
    }
    ComponentReport { components: comps }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplicialViolation {
    /// A cell whose d+1 vertices are identified in the quotient.
    RepeatedVertexClass { cell: Cell },
    /// Two distinct cells with the same vertex-class set.
    DuplicateCell { first: Cell, second: Cell },
    /// Two cells whose vertex-class sets share a subset that is not glued as
    /// a common face.
    UnsharedFace { first: Cell, second: Cell, shared: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimplicialVerdict {
    Simplicial,
    Violation(SimplicialViolation),
}

impl SimplicialVerdict {
    pub fn is_simplicial(&self) -> bool {
        matches!(self, SimplicialVerdict::Simplicial)
    }
}

/// Tests whether the quotient is a genuine simplicial complex: (a) every cell
/// keeps d+1 distinct vertex classes, (b) no two cells share their whole
/// vertex-class set, (c) any two cells sharing vertex classes are glued along
/// the corresponding common face. Returns the first violation found.
pub fn is_simplicial(u: &Unfolding) -> SimplicialVerdict {
    match simplicial_violation(u, None) {
        None => SimplicialVerdict::Simplicial,
        Some(v) => SimplicialVerdict::Violation(v),
    }
}

fn simplicial_violation(u: &Unfolding, only_component: Option<usize>) -> Option<SimplicialViolation> {
    let mut work = u.clone();
    let mut fc = FaceClasses::build(u);
    let k = u.labels_per_facet();
    let in_scope = |c: usize| only_component.is_none_or(|comp| u.component_of[c] == comp);

    // (a) distinct vertex classes within each cell
    let mut classes_per_cell: Vec<Vec<usize>> = Vec::with_capacity(u.num_cells());
    for c in 0..u.num_cells() {
        let classes = work.cell_vertex_classes(Cell(c));
        if in_scope(c) {
            let set: BTreeSet<usize> = classes.iter().copied().collect();
            if set.len() != k {
                return Some(SimplicialViolation::RepeatedVertexClass { cell: Cell(c) });
            }
        }
        classes_per_cell.push(classes);
    }

    // (b) distinct cells have distinct vertex-class sets
    let mut by_set: HashMap<Vec<usize>, Cell> = HashMap::new();
    for (c, classes) in classes_per_cell.iter().enumerate() {
        if !in_scope(c) {
            continue;
        }
        let mut key = classes.clone();
        key.sort_unstable();
        if let Some(prev) = by_set.insert(key, Cell(c)) {
            return Some(SimplicialViolation::DuplicateCell { first: prev, second: Cell(c) });
        }
    }

    // (c) shared vertex classes span a common glued face
    let mut cells_of_class: HashMap<usize, Vec<Cell>> = HashMap::new();
    for (c, classes) in classes_per_cell.iter().enumerate() {
        if !in_scope(c) {
            continue;
        }
        for &cls in classes {
            cells_of_class.entry(cls).or_default().push(Cell(c));
        }
    }
    let mut checked: BTreeSet<(Cell, Cell)> = BTreeSet::new();
    for cells in cells_of_class.values() {
        for (i, &a) in cells.iter().enumerate() {
            for &b in cells.iter().skip(i + 1) {
                let pair = (a.min(b), a.max(b));
                if !checked.insert(pair) {
                    continue;
                }
                let set_a: BTreeSet<usize> = classes_per_cell[a.0].iter().copied().collect();
                let shared: Vec<usize> = classes_per_cell[b.0]
                    .iter()
                    .copied()
                    .filter(|cls| set_a.contains(cls))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let mask_of = |cell: Cell| -> usize {
                    classes_per_cell[cell.0]
                        .iter()
                        .enumerate()
                        .filter(|(_, cls)| shared.contains(cls))
                        .map(|(pos, _)| 1usize << pos)
                        .sum()
                };
                let (ma, mb) = (mask_of(a), mask_of(b));
                if fc.find(a, ma) != fc.find(b, mb) {
                    return Some(SimplicialViolation::UnsharedFace {
                        first: a,
                        second: b,
                        shared,
                    });
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Resolution (barycentric subdivision of the quotient)
// ---------------------------------------------------------------------------

/// A resolved (barycentrically subdivided) unfolding: always a genuine
/// simplicial complex. Its vertices are the quotient face classes; each facet
/// is a flag of faces within some cell and remembers the cell's base facet
/// and component.
#[derive(Clone, Debug)]
pub struct ResolvedUnfolding {
    pub complex: SimplicialComplex,
    /// For every facet of `complex`: the base facet it projects to.
    pub facet_projection: Vec<usize>,
    /// For every facet of `complex`: the unfolding component it comes from.
    pub facet_component: Vec<usize>,
    /// For every vertex: the dimension of the quotient face it subdivides
    /// (a canonical (d+1)-coloring).
    pub vertex_dim: BTreeMap<VertexId, usize>,
}

/// Barycentric subdivision of the quotient: the order complex of its face
/// poset. Works uniformly for simplicial and pseudo-simplicial unfoldings.
pub fn resolve(u: &Unfolding) -> ResolvedUnfolding {
    let mut fc = FaceClasses::build(u);
    let k = u.labels_per_facet();

    // canonical ids for face classes
    let mut class_dim: BTreeMap<usize, usize> = BTreeMap::new();
    for c in 0..u.num_cells() {
        for mask in 1..(1usize << k) {
            let root = fc.find(Cell(c), mask);
            class_dim.entry(root).or_insert((mask.count_ones() - 1) as usize);
        }
    }
    let class_id: BTreeMap<usize, VertexId> =
        class_dim.keys().enumerate().map(|(i, root)| (*root, i as VertexId)).collect();

    let mut facets: Vec<(Face, usize, usize)> = Vec::new();
    for c in 0..u.num_cells() {
        let cell = Cell(c);
        // flags of masks: chains m_1 ⊂ m_2 ⊂ … ⊂ full, one per permutation
        let mut positions: Vec<usize> = (0..k).collect();
        loop {
            let mut mask = 0usize;
            let mut flag: Vec<VertexId> = Vec::with_capacity(k);
            for &p in &positions {
                mask |= 1 << p;
                flag.push(class_id[&fc.find(cell, mask)]);
            }
            facets.push((Face::new(flag), u.projection(cell), u.component_of(cell)));
            if !next_permutation(&mut positions) {
                break;
            }
        }
    }
    facets.sort();
    facets.dedup_by(|a, b| a.0 == b.0);
    let complex = SimplicialComplex::build(u.base.dim(), facets.iter().map(|(f, _, _)| f.clone()))
        .expect("flags form a pure complex");
    let mut facet_projection = vec![0; complex.num_facets()];
    let mut facet_component = vec![0; complex.num_facets()];
    for (f, proj, comp) in &facets {
        let i = complex.facet_index(f).unwrap();
        facet_projection[i] = *proj;
        facet_component[i] = *comp;
    }
    let vertex_dim = class_dim.iter().map(|(root, dim)| (class_id[root], *dim)).collect();
    ResolvedUnfolding { complex, facet_projection, facet_component, vertex_dim }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Extracts one component of the unfolding as a complex on vertex class ids;
/// `None` when the component is pseudo-simplicial.
pub fn component_complex(u: &Unfolding, comp: usize) -> Option<SimplicialComplex> {
    if simplicial_violation(u, Some(comp)).is_some() {
        return None;
    }
    let mut work = u.clone();
    let mut class_ids: BTreeMap<usize, VertexId> = BTreeMap::new();
    let mut facets = Vec::new();
    for c in 0..u.num_cells() {
        if u.component_of[c] != comp {
            continue;
        }
        let classes = work.cell_vertex_classes(Cell(c));
        let verts: Vec<VertexId> = classes
            .into_iter()
            .map(|cls| {
                let next = class_ids.len() as VertexId;
                *class_ids.entry(cls).or_insert(next)
            })
            .collect();
        facets.push(Face::new(verts));
    }
    SimplicialComplex::build(u.base.dim(), facets).ok()
}

/// The resolved barycentric complex restricted to one component.
pub fn resolve_component(u: &Unfolding, comp: usize) -> SimplicialComplex {
    let resolved = resolve(u);
    let facets: Vec<Face> = resolved
        .complex
        .facets()
        .iter()
        .enumerate()
        .filter(|(i, _)| resolved.facet_component[*i] == comp)
        .map(|(_, f)| f.clone())
        .collect();
    SimplicialComplex::build(u.base.dim(), facets).expect("component of a pure complex")
}

// ---------------------------------------------------------------------------
// Covering verification
// ---------------------------------------------------------------------------

/// Result of the combinatorial covering checks away from and over the odd
/// subcomplex.
#[derive(Clone, Debug, Default)]
pub struct CoverReport {
    /// Faces over which some sheet is branched (local degree 2); must equal
    /// the odd subcomplex.
    pub branching: BTreeSet<Face>,
    /// Human-readable failures; empty means the cover structure is clean.
    pub failures: Vec<String>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies the combinatorial covering structure of the unfolding:
/// (a) over every interior ridge the 2(d+1) incident cells glue in d+1
/// disjoint pairs; (b) over every even codimension-2 face the cells decompose
/// into sheets mapping isomorphically onto the star; (c) over every odd face
/// at least one sheet is branched, with local degree exactly 2 (simplicity).
pub fn verify_cover(u: &Unfolding) -> CoverReport {
    let mut report = CoverReport::default();
    let base = &u.base;
    let k = u.labels_per_facet();

    // (a) ridge-level pairing
    let mut pairs_per_ridge: BTreeMap<Face, usize> = BTreeMap::new();
    for (_, _, ridge) in &u.gluings {
        *pairs_per_ridge.entry(ridge.clone()).or_insert(0) += 1;
    }
    for (ridge, inc) in base.ridge_incidences() {
        if inc.len() == 2 {
            let got = pairs_per_ridge.get(&ridge).copied().unwrap_or(0);
            if got != k {
                report.failures.push(format!("ridge {ridge:?} glues {got} pairs, expected {k}"));
            }
        }
    }

    // (b)/(c) local sheets around codimension-2 faces
    let odd = odd_subcomplex_unchecked(base);
    for f in base.codim2_faces() {
        let star_ids = base.facets_containing(&f);
        let mut local_cells: Vec<Cell> = Vec::new();
        for &fi in &star_ids {
            for pos in 0..k {
                local_cells.push(Cell(fi * k + pos));
            }
        }
        let index: BTreeMap<Cell, usize> =
            local_cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let mut uf = UnionFind::new(local_cells.len());
        for (a, b, ridge) in &u.gluings {
            if f.is_subset_of(ridge) {
                if let (Some(&ia), Some(&ib)) = (index.get(a), index.get(b)) {
                    uf.union(ia, ib);
                }
            }
        }
        let mut sheets: BTreeMap<usize, Vec<Cell>> = BTreeMap::new();
        for (i, c) in local_cells.iter().enumerate() {
            sheets.entry(uf.find(i)).or_default().push(*c);
        }
        let mut branched_degrees: Vec<usize> = Vec::new();
        for cells in sheets.values() {
            // local degree: number of cells over a fixed star facet
            let deg = cells.iter().filter(|c| u.projection(**c) == star_ids[0]).count();
            let uniform = star_ids
                .iter()
                .all(|fi| cells.iter().filter(|c| u.projection(**c) == *fi).count() == deg);
            if !uniform {
                report.failures.push(format!("sheet over {f:?} does not cover the star uniformly"));
                continue;
            }
            if deg > 1 {
                branched_degrees.push(deg);
            }
        }
        let is_odd = odd.odd_faces.contains(&f);
        if is_odd {
            report.branching.insert(f.clone());
            if branched_degrees.is_empty() {
                report.failures.push(format!("odd face {f:?} has no branched sheet"));
            }
            if branched_degrees.iter().any(|d| *d != 2) {
                report.failures.push(format!(
                    "odd face {f:?} has branched sheets of local degrees {branched_degrees:?}, expected 2"
                ));
            }
        } else if !branched_degrees.is_empty() {
            report
                .failures
                .push(format!("even face {f:?} has a branched sheet (degrees {branched_degrees:?})"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{generate, GeneratorKind};
    use crate::projectivity::projectivity_group;
    use crate::subdivision::barycentric_subdivide;

    fn boundary_simplex(d: usize) -> SimplicialComplex {
        generate(&GeneratorKind::BoundarySimplex { d }).unwrap()
    }

    fn octahedron() -> SimplicialComplex {
        generate(&GeneratorKind::CrossPolytope { d: 2 }).unwrap()
    }

    fn starred_triangle() -> SimplicialComplex {
        generate(&GeneratorKind::StarredSimplex { d: 2 }).unwrap()
    }

    #[test]
    fn starred_triangle_unfolds_into_3_plus_6() {
        let u = partial_unfold(&starred_triangle()).unwrap();
        assert_eq!(u.num_cells(), 9);
        let report = components(&u);
        assert_eq!(report.cell_counts(), vec![3, 6]);
        assert!(report.components.iter().all(|c| c.simplicial));
        assert!(is_simplicial(&u).is_simplicial());
    }

    #[test]
    fn octahedron_unfolds_into_three_copies() {
        let k = octahedron();
        let u = partial_unfold(&k).unwrap();
        assert_eq!(u.num_cells(), 24);
        let report = components(&u);
        assert_eq!(report.components.len(), 3);
        for c in &report.components {
            assert_eq!(c.cells, 8);
            assert_eq!(c.cells_per_facet, 1);
            assert_eq!(c.face_counts, vec![6, 12, 8]);
            assert_eq!(c.euler, 2);
            assert!(c.simplicial);
        }
        for comp in 0..3 {
            let c = component_complex(&u, comp).unwrap();
            assert_eq!(c.f_vector(), vec![6, 12, 8]);
        }
    }

    #[test]
    fn boundary_simplex_unfolds_into_one_sphere() {
        let u = partial_unfold(&boundary_simplex(2)).unwrap();
        assert_eq!(u.num_cells(), 12);
        let report = components(&u);
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].euler, 2);
    }

    #[test]
    fn unfold_of_boundary_simplex_simpliciality_verdict() {
        // direct execution of the three checks; the quotient is a 2-sphere on
        // 8 vertex classes and 12 triangles and comes out simplicial
        let u = partial_unfold(&boundary_simplex(2)).unwrap();
        assert_eq!(is_simplicial(&u), SimplicialVerdict::Simplicial);
        let report = components(&u);
        assert_eq!(report.components[0].face_counts, vec![8, 18, 12]);
    }

    #[test]
    fn cyclic_sphere_unfolding_is_pseudo_simplicial() {
        // the unfolding of ∂C(4,7) is connected but not simplicial: two cells
        // share a pair of vertex classes without being glued along that edge
        let k = generate(&GeneratorKind::CyclicSphere { polytope_dim: 4, n: 7 }).unwrap();
        let u = partial_unfold(&k).unwrap();
        assert_eq!(u.num_components(), 1);
        let verdict = is_simplicial(&u);
        assert!(matches!(
            verdict,
            SimplicialVerdict::Violation(SimplicialViolation::UnsharedFace { .. })
        ));
        assert!(component_complex(&u, 0).is_none());
        // barycentric resolution repairs it
        let r = resolve(&u);
        assert_eq!(r.complex.num_facets(), 56 * 24);
        assert!(r.complex.is_closed_pseudomanifold());
        for f in r.complex.facets().iter().take(50) {
            let mut dims: Vec<usize> = f.vertices().iter().map(|v| r.vertex_dim[v]).collect();
            dims.sort_unstable();
            assert_eq!(dims, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn orbit_component_correspondence() {
        for k in [starred_triangle(), boundary_simplex(2), boundary_simplex(3), octahedron()] {
            let u = partial_unfold(&k).unwrap();
            let g = projectivity_group(&k, 0).unwrap();
            // components of cells over the base facet = orbits on its vertices
            let mut by_component: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
            for &v in k.facet(0).vertices() {
                by_component.entry(u.component_of(u.cell(0, v))).or_default().insert(v);
            }
            let from_unfolding: BTreeSet<Vec<VertexId>> =
                by_component.values().map(|s| s.iter().copied().collect()).collect();
            let from_group: BTreeSet<Vec<VertexId>> = g.orbits().into_iter().collect();
            assert_eq!(from_unfolding, from_group);
        }
    }

    #[test]
    fn cell_count_conservation() {
        for k in [starred_triangle(), boundary_simplex(3), octahedron()] {
            let u = partial_unfold(&k).unwrap();
            let report = components(&u);
            let total: usize = report.components.iter().map(|c| c.cells).sum();
            assert_eq!(total, (k.dim() + 1) * k.num_facets());
        }
    }

    #[test]
    fn every_base_dual_edge_lifts_into_each_component() {
        for k in [starred_triangle(), boundary_simplex(2), octahedron()] {
            let u = partial_unfold(&k).unwrap();
            let dual_edges = k.dual_graph().edges();
            for comp in 0..u.num_components() {
                for (a, b, _) in &dual_edges {
                    let lifted = u
                        .gluings()
                        .iter()
                        .filter(|(ca, _, _)| u.component_of(*ca) == comp)
                        .any(|(ca, cb, _)| {
                            let (pa, pb) = (u.projection(*ca), u.projection(*cb));
                            (pa, pb) == (*a, *b) || (pa, pb) == (*b, *a)
                        });
                    assert!(lifted, "dual edge ({a},{b}) does not lift into component {comp}");
                }
            }
        }
    }

    #[test]
    fn resolve_octahedron_unfolding() {
        let u = partial_unfold(&octahedron()).unwrap();
        let r = resolve(&u);
        assert_eq!(r.complex.num_facets(), 144); // 3 components × 8 facets × 3!
        // the resolved complex is foldable by face dimension
        for f in r.complex.facets() {
            let mut dims: Vec<usize> = f.vertices().iter().map(|v| r.vertex_dim[v]).collect();
            dims.sort_unstable();
            assert_eq!(dims, vec![0, 1, 2]);
        }
    }

    #[test]
    fn resolve_preserves_euler_characteristic() {
        let u = partial_unfold(&boundary_simplex(2)).unwrap();
        let r = resolve(&u);
        assert_eq!(r.complex.euler_characteristic(), 2);
        assert!(r.complex.is_closed_pseudomanifold());
    }

    #[test]
    fn resolve_matches_barycentric_on_simplicial_components() {
        let u = partial_unfold(&starred_triangle()).unwrap();
        for comp in 0..u.num_components() {
            let direct = component_complex(&u, comp).unwrap();
            let resolved = resolve_component(&u, comp);
            let bary = barycentric_subdivide(&direct);
            assert_eq!(resolved.f_vector(), bary.complex.f_vector());
        }
    }

    #[test]
    fn verify_cover_on_foldable_base() {
        let u = partial_unfold(&octahedron()).unwrap();
        let report = verify_cover(&u);
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert!(report.branching.is_empty());
    }

    #[test]
    fn verify_cover_on_starred_triangle() {
        let u = partial_unfold(&starred_triangle()).unwrap();
        let report = verify_cover(&u);
        assert!(report.passed(), "failures: {:?}", report.failures);
        assert_eq!(report.branching, BTreeSet::from([Face::vertex(0)]));
    }

    #[test]
    fn verify_cover_on_boundary_simplex() {
        let k = boundary_simplex(2);
        let u = partial_unfold(&k).unwrap();
        let report = verify_cover(&u);
        assert!(report.passed(), "failures: {:?}", report.failures);
        let all_vertices: BTreeSet<Face> = k.vertices().into_iter().map(Face::vertex).collect();
        assert_eq!(report.branching, all_vertices);
    }

    #[test]
    fn unfold_rejects_disconnected_stars() {
        // two triangles sharing only a vertex: the star of that vertex is not
        // strongly connected
        let k = SimplicialComplex::build(2, vec![vec![0, 1, 2], vec![2, 3, 4]]).unwrap();
        assert_eq!(partial_unfold(&k).unwrap_err(), UnfoldError::NotLocallyStronglyConnected);
    }
}
