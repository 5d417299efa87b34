//! Perspectivities, projectivities along facet paths, the (reduced) group of
//! projectivities and the odd subcomplex.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::complex::{DualGraph, Face, SimplicialComplex, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProjectivityError {
    #[error("facets {0} and {1} do not share a ridge")]
    NotNeighbors(usize, usize),
    #[error("invalid facet path at position {0}")]
    InvalidPath(usize),
    #[error("complex is not strongly connected")]
    NotStronglyConnected,
    #[error("complex is not locally strongly connected")]
    NotLocallyStronglyConnected,
    #[error("complex fails the niceness proxy")]
    NotNice,
    #[error("{0:?} is not a codimension-2 face")]
    NotCodim2(Vec<VertexId>),
    #[error("the star of {0:?} is not a closed cycle of facets")]
    StarNotCycle(Vec<VertexId>),
    #[error("facet index {0} out of range")]
    UnknownFacet(usize),
}

/// A sequence of facet ids in which consecutive facets share a ridge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetPath(pub Vec<usize>);

impl FacetPath {
    pub fn new(facets: Vec<usize>) -> Self {
        assert!(!facets.is_empty());
        FacetPath(facets)
    }

    pub fn start(&self) -> usize {
        self.0[0]
    }

    pub fn end(&self) -> usize {
        *self.0.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, other: &FacetPath) -> FacetPath {
        assert_eq!(self.end(), other.start(), "paths do not compose");
        let mut v = self.0.clone();
        v.extend(other.0.iter().skip(1));
        FacetPath(v)
    }

    pub fn reversed(&self) -> FacetPath {
        let mut v = self.0.clone();
        v.reverse();
        FacetPath(v)
    }

    /// Checks that consecutive facets are neighbors in `complex`.
    pub fn validate(&self, complex: &SimplicialComplex) -> Result<(), ProjectivityError> {
        if let Some(&f) = self.0.iter().find(|&&f| f >= complex.num_facets()) {
            return Err(ProjectivityError::UnknownFacet(f));
        }
        for (pos, w) in self.0.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let fa = complex.facet(a);
            let fb = complex.facet(b);
            if a == b || fa.intersection(fb).map_or(0, |f| f.len()) != complex.dim() {
                return Err(ProjectivityError::InvalidPath(pos));
            }
        }
        Ok(())
    }
}

/// A bijection between the vertex sets of two facets. For a perspectivity it
/// fixes every vertex of the shared ridge and sends the opposite vertices to
/// each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexBijection {
    pub source: usize,
    pub target: usize,
    map: BTreeMap<VertexId, VertexId>,
}

impl VertexBijection {
    pub fn identity(facet_id: usize, facet: &Face) -> Self {
        VertexBijection {
            source: facet_id,
            target: facet_id,
            map: facet.vertices().iter().map(|v| (*v, *v)).collect(),
        }
    }

    pub fn from_map(source: usize, target: usize, map: BTreeMap<VertexId, VertexId>) -> Self {
        let images: BTreeSet<VertexId> = map.values().copied().collect();
        assert_eq!(images.len(), map.len(), "vertex bijections must be injective");
        VertexBijection { source, target, map }
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.map[&v]
    }

    pub fn map(&self) -> &BTreeMap<VertexId, VertexId> {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    /// `other ∘ self`: apply `self` first. Requires `other.source == self.target`.
    pub fn then(&self, other: &VertexBijection) -> VertexBijection {
        assert_eq!(self.target, other.source, "bijections do not compose");
        VertexBijection {
            source: self.source,
            target: other.target,
            map: self.map.iter().map(|(v, w)| (*v, other.apply(*w))).collect(),
        }
    }

    pub fn inverse(&self) -> VertexBijection {
        VertexBijection {
            source: self.target,
            target: self.source,
            map: self.map.iter().map(|(v, w)| (*w, *v)).collect(),
        }
    }

    /// Cycles of length ≥ 2 (requires source == target).
    pub fn nontrivial_cycles(&self) -> Vec<Vec<VertexId>> {
        assert_eq!(self.source, self.target);
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut cycles = Vec::new();
        for &v in self.map.keys() {
            if seen.contains(&v) {
                continue;
            }
            let mut cycle = vec![v];
            seen.insert(v);
            let mut cur = self.apply(v);
            while cur != v {
                cycle.push(cur);
                seen.insert(cur);
                cur = self.apply(cur);
            }
            if cycle.len() >= 2 {
                cycles.push(cycle);
            }
        }
        cycles
    }

    pub fn is_transposition(&self) -> bool {
        let c = self.nontrivial_cycles();
        c.len() == 1 && c[0].len() == 2
    }
}

/// The perspectivity from facet `s` to facet `t`: identity on the shared
/// ridge, the opposite vertices mapped to each other.
pub fn perspectivity(
    complex: &SimplicialComplex,
    s: usize,
    t: usize,
) -> Result<VertexBijection, ProjectivityError> {
    if s >= complex.num_facets() || t >= complex.num_facets() {
        return Err(ProjectivityError::UnknownFacet(s.max(t)));
    }
    if s == t {
        return Err(ProjectivityError::NotNeighbors(s, t));
    }
    let fs = complex.facet(s);
    let ft = complex.facet(t);
    let ridge = fs.intersection(ft).ok_or(ProjectivityError::NotNeighbors(s, t))?;
    if ridge.len() != complex.dim() {
        return Err(ProjectivityError::NotNeighbors(s, t));
    }
    let from = fs.difference(ft).expect("distinct facets").vertices()[0];
    let to = ft.difference(fs).expect("distinct facets").vertices()[0];
    let mut map: BTreeMap<VertexId, VertexId> =
        ridge.vertices().iter().map(|v| (*v, *v)).collect();
    map.insert(from, to);
    Ok(VertexBijection { source: s, target: t, map })
}

/// The projectivity along a facet path: the composite of the perspectivities
/// between consecutive facets.
pub fn projectivity(
    complex: &SimplicialComplex,
    path: &FacetPath,
) -> Result<VertexBijection, ProjectivityError> {
    path.validate(complex)?;
    let mut acc = VertexBijection::identity(path.start(), complex.facet(path.start()));
    for w in path.0.windows(2) {
        acc = acc.then(&perspectivity(complex, w[0], w[1])?);
    }
    Ok(acc)
}

/// The group of projectivities Π(K, σ0): all permutations of V(σ0) induced by
/// closed facet paths based at σ0. Generated by projectivities along the
/// fundamental cycles of the dual graph and closed by breadth-first products.
#[derive(Clone, Debug)]
pub struct ProjectivityGroup {
    pub base_facet: usize,
    /// Sorted vertex set of the base facet; elements are image vectors over
    /// positions in this domain.
    pub domain: Vec<VertexId>,
    pub elements: BTreeSet<Vec<usize>>,
    pub generators: Vec<(FacetPath, VertexBijection)>,
}

impl ProjectivityGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    /// Orbits of the group action on the base facet's vertices, each sorted,
    /// ordered by smallest member.
    pub fn orbits(&self) -> Vec<Vec<VertexId>> {
        let n = self.domain.len();
        let mut orbit_of: Vec<Option<usize>> = vec![None; n];
        let mut orbits: Vec<Vec<VertexId>> = Vec::new();
        for i in 0..n {
            if orbit_of[i].is_some() {
                continue;
            }
            let id = orbits.len();
            let mut members = BTreeSet::from([i]);
            let mut queue = VecDeque::from([i]);
            orbit_of[i] = Some(id);
            while let Some(j) = queue.pop_front() {
                for img in &self.elements {
                    let k = img[j];
                    if orbit_of[k].is_none() {
                        orbit_of[k] = Some(id);
                        members.insert(k);
                        queue.push_back(k);
                    }
                }
            }
            orbits.push(members.into_iter().map(|j| self.domain[j]).collect());
        }
        orbits
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.orbits().iter().map(|o| o.len()).collect();
        sizes.sort_unstable();
        sizes
    }

    /// The orbit containing a given base-facet vertex.
    pub fn orbit_of(&self, v: VertexId) -> Vec<VertexId> {
        self.orbits().into_iter().find(|o| o.contains(&v)).expect("vertex of the base facet")
    }
}

/// Closes a set of permutations (image vectors over positions 0..n) under
/// composition. On n ≤ 7 points this stays below |Sym(n)| = 5040 elements.
pub fn close_permutations(n: usize, generators: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    let identity: Vec<usize> = (0..n).collect();
    let mut elements: BTreeSet<Vec<usize>> = BTreeSet::from([identity]);
    elements.extend(generators.iter().cloned());
    let mut queue: VecDeque<Vec<usize>> = elements.iter().cloned().collect();
    while let Some(g) = queue.pop_front() {
        for h in elements.clone() {
            for comp in [compose_images(&g, &h), compose_images(&h, &g)] {
                if elements.insert(comp.clone()) {
                    queue.push_back(comp);
                }
            }
        }
    }
    elements
}

/// `(g ∘ h)(x) = g(h(x))` on position-image vectors.
pub fn compose_images(g: &[usize], h: &[usize]) -> Vec<usize> {
    h.iter().map(|&x| g[x]).collect()
}

/// Computes Π(K, σ0). Generators are projectivities along the fundamental
/// cycles of the dual graph (spanning tree plus one chord each).
pub fn projectivity_group(
    complex: &SimplicialComplex,
    base: usize,
) -> Result<ProjectivityGroup, ProjectivityError> {
    if base >= complex.num_facets() {
        return Err(ProjectivityError::UnknownFacet(base));
    }
    let dual = complex.dual_graph();
    if !dual.is_connected() {
        return Err(ProjectivityError::NotStronglyConnected);
    }
    let domain: Vec<VertexId> = complex.facet(base).vertices().to_vec();
    let mut generators = Vec::new();
    let mut gen_images: Vec<Vec<usize>> = Vec::new();
    for cycle in dual.fundamental_cycles(base) {
        let path = FacetPath::new(cycle);
        let bij = projectivity(complex, &path)?;
        let img: Vec<usize> = domain
            .iter()
            .map(|v| domain.binary_search(&bij.apply(*v)).unwrap())
            .collect();
        gen_images.push(img);
        generators.push((path, bij));
    }
    let elements = close_permutations(domain.len(), &gen_images);
    Ok(ProjectivityGroup { base_facet: base, domain, elements, generators })
}

/// The odd subcomplex: all codimension-2 faces whose link graph is not
/// bipartite. Requires the complex to be locally strongly connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddSubcomplex {
    pub odd_faces: BTreeSet<Face>,
}

impl OddSubcomplex {
    pub fn is_empty(&self) -> bool {
        self.odd_faces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.odd_faces.len()
    }
}

pub fn odd_subcomplex(complex: &SimplicialComplex) -> Result<OddSubcomplex, ProjectivityError> {
    if !complex.connectivity_report().locally_strongly_connected {
        return Err(ProjectivityError::NotLocallyStronglyConnected);
    }
    Ok(odd_subcomplex_unchecked(complex))
}

/// Same as [`odd_subcomplex`] but skips the connectivity precondition; used
/// internally where the caller already knows the complex is admissible.
pub fn odd_subcomplex_unchecked(complex: &SimplicialComplex) -> OddSubcomplex {
    let mut odd_faces = BTreeSet::new();
    for f in complex.codim2_faces() {
        let link = complex.link(&f).expect("enumerated face");
        if !is_bipartite_graph(&link) {
            odd_faces.insert(f);
        }
    }
    OddSubcomplex { odd_faces }
}

/// Bipartiteness of a 1-complex by BFS 2-coloring.
pub fn is_bipartite_graph(g: &SimplicialComplex) -> bool {
    debug_assert!(g.dim() <= 1);
    let mut color: BTreeMap<VertexId, bool> = BTreeMap::new();
    let adj: BTreeMap<VertexId, Vec<VertexId>> = {
        let mut m: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for e in g.facets() {
            if e.len() == 2 {
                let (a, b) = (e.vertices()[0], e.vertices()[1]);
                m.entry(a).or_default().push(b);
                m.entry(b).or_default().push(a);
            }
        }
        m
    };
    for &start in adj.keys() {
        if color.contains_key(&start) {
            continue;
        }
        color.insert(start, false);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let c = color[&v];
            for w in adj[&v].clone() {
                match color.get(&w) {
                    None => {
                        color.insert(w, !c);
                        queue.push_back(w);
                    }
                    Some(&cw) if cw == c => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

/// The facet path γ δ γ⁻ around the codimension-2 face `f`: δ walks once
/// around `f` inside its star, starting at γ's endpoint. The orientation is
/// fixed by taking the lexicographically smallest neighbor first.
pub fn loop_around(
    complex: &SimplicialComplex,
    f: &Face,
    gamma: &FacetPath,
) -> Result<FacetPath, ProjectivityError> {
    gamma.validate(complex)?;
    if complex.dim() < 2 || f.len() != complex.dim() - 1 || !complex.is_face(f) {
        return Err(ProjectivityError::NotCodim2(f.vertices().to_vec()));
    }
    let sigma = gamma.end();
    if !f.is_subset_of(complex.facet(sigma)) {
        return Err(ProjectivityError::InvalidPath(gamma.0.len() - 1));
    }
    let delta = star_cycle(complex, f, sigma)?;
    Ok(gamma.concat(&delta).concat(&gamma.reversed()))
}

/// The closed facet path once around `f` inside st(f), based at `sigma`.
/// Fails with `StarNotCycle` when the star's dual graph is not a single
/// closed cycle (boundary faces, non-manifold stars).
pub fn star_cycle(
    complex: &SimplicialComplex,
    f: &Face,
    sigma: usize,
) -> Result<FacetPath, ProjectivityError> {
    let star_ids = complex.facets_containing(f);
    if star_ids.len() < 3 {
        return Err(ProjectivityError::StarNotCycle(f.vertices().to_vec()));
    }
    // adjacency inside the star: facets sharing a ridge that contains f
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &a) in star_ids.iter().enumerate() {
        for &b in star_ids.iter().skip(i + 1) {
            if let Some(inter) = complex.facet(a).intersection(complex.facet(b)) {
                if inter.len() == complex.dim() && f.is_subset_of(&inter) {
                    adj.entry(a).or_default().push(b);
                    adj.entry(b).or_default().push(a);
                }
            }
        }
    }
    if adj.len() != star_ids.len() || adj.values().any(|v| v.len() != 2) {
        return Err(ProjectivityError::StarNotCycle(f.vertices().to_vec()));
    }
    let mut path = vec![sigma];
    let mut prev = sigma;
    let mut cur = *adj[&sigma].iter().min().unwrap();
    path.push(cur);
    while cur != sigma {
        let next = *adj[&cur].iter().find(|&&n| n != prev).unwrap();
        prev = cur;
        cur = next;
        path.push(cur);
    }
    if path.len() != star_ids.len() + 1 {
        return Err(ProjectivityError::StarNotCycle(f.vertices().to_vec()));
    }
    Ok(FacetPath::new(path))
}

/// One loop per odd codimension-2 face with a closed star, reached by a tree
/// path from the base facet; each projectivity is a transposition.
pub fn reduced_group_generators(
    complex: &SimplicialComplex,
    base: usize,
) -> Result<Vec<(Face, FacetPath, VertexBijection)>, ProjectivityError> {
    if !complex.connectivity_report().nice_proxy {
        return Err(ProjectivityError::NotNice);
    }
    let odd = odd_subcomplex(complex)?;
    let dual = complex.dual_graph();
    if !dual.is_connected() {
        return Err(ProjectivityError::NotStronglyConnected);
    }
    let parent = dual.spanning_tree(base);
    let mut out = Vec::new();
    for f in &odd.odd_faces {
        let sigma = *complex.facets_containing(f).first().expect("odd face has a star");
        let gamma = FacetPath::new(DualGraph::tree_path(&parent, base, sigma));
        let lp = loop_around(complex, f, &gamma)?;
        let bij = projectivity(complex, &lp)?;
        out.push((f.clone(), lp, bij));
    }
    Ok(out)
}
