//! Stellar subdivisions of edges and barycentric subdivision, with carrier
//! tracking so refinements remember where each new facet and vertex came from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, Face, SimplicialComplex, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubdivisionError {
    #[error("{0:?} is not an edge of the complex")]
    NotAnEdge(Vec<VertexId>),
    #[error("vertex id {0} is already in use")]
    IdCollision(VertexId),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// One stellar edge subdivision: `edge` is replaced by the new vertex and two
/// half edges in every facet containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionStep {
    pub edge: [VertexId; 2],
    pub new: VertexId,
}

/// An ordered list of stellar edge subdivisions. Each step's edge must be an
/// edge of the complex obtained after the preceding steps, and each new vertex
/// id must be fresh; both are checked on replay.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionScript {
    pub steps: Vec<SubdivisionStep>,
}

impl SubdivisionScript {
    pub fn new() -> Self {
        SubdivisionScript { steps: Vec::new() }
    }

    pub fn push(&mut self, edge: &Face, new: VertexId) {
        assert_eq!(edge.len(), 2);
        self.steps.push(SubdivisionStep { edge: [edge.vertices()[0], edge.vertices()[1]], new });
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Maps a refined complex back to the base it was obtained from: every facet
/// to the base facet whose refinement contains it, and every vertex to the
/// minimal base face containing it (an original vertex maps to itself; a
/// vertex subdividing an edge maps to that edge's carrier).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarrierMap {
    pub facet_carrier: Vec<usize>,
    pub vertex_carrier: BTreeMap<VertexId, Face>,
}

impl CarrierMap {
    /// The identity carrier of a complex.
    pub fn identity(complex: &SimplicialComplex) -> Self {
        CarrierMap {
            facet_carrier: (0..complex.num_facets()).collect(),
            vertex_carrier: complex
                .vertices()
                .into_iter()
                .map(|v| (v, Face::vertex(v)))
                .collect(),
        }
    }

    /// Minimal base face containing the given refined face: the union of its
    /// vertex carriers.
    pub fn face_carrier(&self, f: &Face) -> Face {
        let mut it = f.vertices().iter();
        let mut acc = self.vertex_carrier[it.next().unwrap()].clone();
        for v in it {
            acc = acc.union(&self.vertex_carrier[v]);
        }
        acc
    }

    /// Composes `self : base → mid` with `finer : mid → fine` into
    /// `base → fine`.
    pub fn compose(&self, finer: &CarrierMap) -> CarrierMap {
        let facet_carrier =
            finer.facet_carrier.iter().map(|&m| self.facet_carrier[m]).collect();
        let vertex_carrier = finer
            .vertex_carrier
            .iter()
            .map(|(v, mid_face)| (*v, self.face_carrier(mid_face)))
            .collect();
        CarrierMap { facet_carrier, vertex_carrier }
    }
}

/// Smallest vertex id not used by the complex.
pub fn fresh_vertex_id(complex: &SimplicialComplex) -> VertexId {
    complex.max_vertex_id().map_or(0, |m| m + 1)
}

/// Stellar subdivision of the edge `e`: every facet containing `e` is replaced
/// by two facets, each obtained by swapping one endpoint of `e` for
/// `fresh_id`. Returns the refined complex together with the carrier map
/// (relative to the input complex).
pub fn stellar_subdivide_edge(
    complex: &SimplicialComplex,
    e: &Face,
    fresh_id: VertexId,
) -> Result<(SimplicialComplex, CarrierMap), SubdivisionError> {
    if e.len() != 2 || !complex.is_face(e) {
        return Err(SubdivisionError::NotAnEdge(e.vertices().to_vec()));
    }
    if complex.vertices().contains(&fresh_id) {
        return Err(SubdivisionError::IdCollision(fresh_id));
    }
    let (a, b) = (e.vertices()[0], e.vertices()[1]);
    let mut facets: Vec<(Face, usize)> = Vec::new();
    for (i, f) in complex.facets().iter().enumerate() {
        if e.is_subset_of(f) {
            for endpoint in [a, b] {
                let g = Face::new(
                    f.vertices().iter().copied().map(|v| if v == endpoint { fresh_id } else { v }),
                );
                facets.push((g, i));
            }
        } else {
            facets.push((f.clone(), i));
        }
    }
    facets.sort();
    let refined = SimplicialComplex::build(complex.dim(), facets.iter().map(|(f, _)| f.clone()))?;
    let facet_carrier = facets.into_iter().map(|(_, i)| i).collect();
    let mut vertex_carrier: BTreeMap<VertexId, Face> =
        complex.vertices().into_iter().map(|v| (v, Face::vertex(v))).collect();
    vertex_carrier.insert(fresh_id, e.clone());
    Ok((refined, CarrierMap { facet_carrier, vertex_carrier }))
}

/// Replays a script against `base`, composing the per-step carrier maps into
/// a single map from the final refinement back to `base`.
pub fn apply_script(
    base: &SimplicialComplex,
    script: &SubdivisionScript,
) -> Result<(SimplicialComplex, CarrierMap), SubdivisionError> {
    let mut current = base.clone();
    let mut carrier = CarrierMap::identity(base);
    for step in &script.steps {
        let e = Face::edge(step.edge[0], step.edge[1]);
        let (next, delta) = stellar_subdivide_edge(&current, &e, step.new)?;
        carrier = carrier.compose(&delta);
        current = next;
    }
    Ok((current, carrier))
}

/// Barycentric subdivision data: the new complex, the base face each new
/// vertex subdivides, and the dimension coloring it inherits.
#[derive(Clone, Debug)]
pub struct Barycentric {
    pub complex: SimplicialComplex,
    /// New vertex → the base face whose barycenter it is.
    pub vertex_face: BTreeMap<VertexId, Face>,
    /// New vertex → dimension of that face, a canonical (d+1)-coloring.
    pub vertex_color: BTreeMap<VertexId, usize>,
}

/// Barycentric subdivision: the order complex of the face poset. Facets are
/// the maximal flags of faces; vertices carry the dimension of the face they
/// subdivide, giving a canonical (d+1)-coloring.
pub fn barycentric_subdivide(complex: &SimplicialComplex) -> Barycentric {
    let mut faces: Vec<Face> = Vec::new();
    for k in 0..=complex.dim() {
        faces.extend(complex.faces_of_dim(k));
    }
    faces.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    let index: BTreeMap<&Face, VertexId> =
        faces.iter().enumerate().map(|(i, f)| (f, i as VertexId)).collect();

    let mut new_facets: Vec<Face> = Vec::new();
    for facet in complex.facets() {
        flags_of(facet, &mut |flag: &[Face]| {
            new_facets.push(Face::new(flag.iter().map(|f| index[f])));
        });
    }
    let refined = SimplicialComplex::build(complex.dim(), new_facets)
        .expect("barycentric subdivision is a pure complex");
    let vertex_face: BTreeMap<VertexId, Face> =
        faces.iter().enumerate().map(|(i, f)| (i as VertexId, f.clone())).collect();
    let vertex_color =
        vertex_face.iter().map(|(v, f)| (*v, f.dim())).collect();
    Barycentric { complex: refined, vertex_face, vertex_color }
}

/// Enumerates the maximal flags (chains of proper subfaces) of a simplex by
/// walking vertex orderings.
fn flags_of(facet: &Face, emit: &mut impl FnMut(&[Face])) {
    let n = facet.len();
    let verts = facet.vertices().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let flag: Vec<Face> = (1..=n)
            .map(|k| Face::new(perm[..k].iter().map(|&i| verts[i])))
            .collect();
        emit(&flag);
        if !next_permutation(&mut perm) {
            break;
        }
    }
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
