//! Foldability and coloring extension: testing for (d+1)-colorings and
//! extending a k-colored induced subcomplex to a properly colored refinement
//! using only stellar subdivisions of edges.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::complex::{is_closed_pseudomanifold_sphere_proxy, Face, SimplicialComplex, VertexId};
use crate::subdivision::{
    apply_script, fresh_vertex_id, stellar_subdivide_edge, SubdivisionError, SubdivisionScript,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ColoringError {
    #[error("subcomplex is not induced: edge {0:?} has both endpoints in it")]
    NotInduced(Vec<VertexId>),
    #[error("input coloring is not proper on edge {0:?}")]
    ImproperInputColoring(Vec<VertexId>),
    #[error("input coloring does not cover vertex {0}")]
    UncoloredVertex(VertexId),
    #[error("input coloring uses color {0}, expected colors below {1}")]
    ColorOutOfRange(usize, usize),
    #[error("input is not a sphere of the expected dimension")]
    NotASphere,
    #[error(transparent)]
    Subdivision(#[from] SubdivisionError),
}

/// A vertex coloring with 0-based color indices, proper on its domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexColoring {
    pub colors: BTreeMap<VertexId, usize>,
}

impl VertexColoring {
    pub fn new(colors: BTreeMap<VertexId, usize>) -> Self {
        VertexColoring { colors }
    }

    pub fn color(&self, v: VertexId) -> Option<usize> {
        self.colors.get(&v).copied()
    }

    pub fn num_colors(&self) -> usize {
        self.colors.values().max().map_or(0, |m| m + 1)
    }

    /// True when no edge of `complex` with both endpoints in the domain is
    /// monochromatic.
    pub fn is_proper_on(&self, complex: &SimplicialComplex) -> bool {
        complex.edges().iter().all(|e| {
            let (a, b) = (e.vertices()[0], e.vertices()[1]);
            match (self.colors.get(&a), self.colors.get(&b)) {
                (Some(ca), Some(cb)) => ca != cb,
                _ => true,
            }
        })
    }

    /// True when every vertex of `complex` is colored and the coloring is
    /// proper.
    pub fn is_total_proper_on(&self, complex: &SimplicialComplex) -> bool {
        complex.vertices().iter().all(|v| self.colors.contains_key(v))
            && self.is_proper_on(complex)
    }
}

/// Result of [`find_foldable_coloring`]: either a proper (d+1)-coloring or a
/// certificate that none exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Foldability {
    Foldable(VertexColoring),
    /// Propagation along the dual graph reached a facet whose induced colors
    /// clash; on strongly connected complexes this proves non-foldability.
    NotFoldable,
}

impl Foldability {
    pub fn is_foldable(&self) -> bool {
        matches!(self, Foldability::Foldable(_))
    }

    pub fn coloring(self) -> Option<VertexColoring> {
        match self {
            Foldability::Foldable(c) => Some(c),
            Foldability::NotFoldable => None,
        }
    }
}

/// Exact foldability test for pure, strongly connected complexes: color the
/// first facet by vertex order and propagate along the dual graph by
/// perspectivities. A (d+1)-coloring is unique up to renaming on strongly
/// connected complexes, so a propagation conflict proves non-foldability.
pub fn find_foldable_coloring(complex: &SimplicialComplex) -> Foldability {
    use crate::projectivity::perspectivity;
    if complex.is_empty() {
        return Foldability::Foldable(VertexColoring::default());
    }
    let dual = complex.dual_graph();
    assert!(dual.is_connected(), "find_foldable_coloring needs a strongly connected complex");
    let mut colors: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (i, v) in complex.facet(0).vertices().iter().enumerate() {
        colors.insert(*v, i);
    }
    let mut visited = vec![false; complex.num_facets()];
    visited[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (j, _) in dual.neighbors(i) {
            let persp = perspectivity(complex, i, *j).expect("dual neighbors");
            for v in complex.facet(i).vertices() {
                let w = persp.apply(*v);
                let cv = colors[v];
                match colors.get(&w) {
                    Some(&cw) if cw != cv => return Foldability::NotFoldable,
                    Some(_) => {}
                    None => {
                        colors.insert(w, cv);
                    }
                }
            }
            if !visited[*j] {
                visited[*j] = true;
                queue.push_back(*j);
            }
        }
    }
    let coloring = VertexColoring::new(colors);
    if coloring.is_total_proper_on(complex) {
        Foldability::Foldable(coloring)
    } else {
        Foldability::NotFoldable
    }
}

/// Options for [`extend_coloring`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtendOptions {
    /// When the subcomplex is not induced, first stellarly subdivide every
    /// edge outside it whose endpoints both lie in it (opt-in; off by default
    /// so the induced precondition stays honest).
    pub pre_subdivide_non_induced: bool,
    /// Greedily color the vertices outside the subcomplex before running the
    /// rounds, as a size optimization (off by default).
    pub greedy_precolor: bool,
}

/// Output of [`extend_coloring`].
#[derive(Clone, Debug)]
pub struct ExtendedColoring {
    pub complex: SimplicialComplex,
    pub coloring: VertexColoring,
    pub script: SubdivisionScript,
}

/// Extends a proper `k`-coloring of the induced subcomplex `sub` to a proper
/// max{k, d+1}-coloring of a refinement obtained by stellar edge subdivisions
/// only. The subcomplex is left untouched (none of its edges are subdivided),
/// stays induced, and keeps its colors.
///
/// Round `i` (for i = 1..d) subdivides every edge whose endpoints are both
/// colored i−1, in lexicographic order, coloring the new vertices `i`;
/// vertices outside `sub` initially get color 0. After round `i`, every facet
/// not inside `sub` has exactly one vertex of each color below `i`.
pub fn extend_coloring(
    complex: &SimplicialComplex,
    sub: &SimplicialComplex,
    coloring: &VertexColoring,
    k: usize,
    options: ExtendOptions,
) -> Result<ExtendedColoring, ColoringError> {
    // the input coloring must cover sub's vertices with colors below k, properly
    for v in sub.vertices() {
        match coloring.color(v) {
            None => return Err(ColoringError::UncoloredVertex(v)),
            Some(c) if c >= k => return Err(ColoringError::ColorOutOfRange(c, k)),
            _ => {}
        }
    }
    for e in sub.edges() {
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        if coloring.color(a) == coloring.color(b) {
            return Err(ColoringError::ImproperInputColoring(e.vertices().to_vec()));
        }
    }

    let sub_vertices = sub.vertices();
    let mut current = complex.clone();
    let mut script = SubdivisionScript::new();

    // induced check: an edge of the ambient complex with both endpoints in sub
    // must be an edge of sub
    let non_induced: Vec<Face> = current
        .edges()
        .into_iter()
        .filter(|e| {
            e.vertices().iter().all(|v| sub_vertices.contains(v)) && !sub.is_face(e)
        })
        .collect();
    if !non_induced.is_empty() {
        if !options.pre_subdivide_non_induced {
            return Err(ColoringError::NotInduced(non_induced[0].vertices().to_vec()));
        }
        for e in non_induced {
            let fresh = fresh_vertex_id(&current);
            let (next, _) = stellar_subdivide_edge(&current, &e, fresh)?;
            script.push(&e, fresh);
            current = next;
        }
    }

    let d = current.dim();
    let n_colors = k.max(d + 1);
    let mut colors: BTreeMap<VertexId, usize> = coloring
        .colors
        .iter()
        .filter(|(v, _)| sub_vertices.contains(v))
        .map(|(v, c)| (*v, *c))
        .collect();

    // initial colors outside the subcomplex
    let outside: Vec<VertexId> =
        current.vertices().into_iter().filter(|v| !sub_vertices.contains(v)).collect();
    if options.greedy_precolor {
        let adjacency = edge_adjacency(&current);
        for v in outside {
            let used: BTreeSet<usize> = adjacency
                .get(&v)
                .into_iter()
                .flatten()
                .filter_map(|w| colors.get(w).copied())
                .collect();
            let c = (0..n_colors).find(|c| !used.contains(c)).unwrap_or(0);
            colors.insert(v, c);
        }
    } else {
        for v in outside {
            colors.insert(v, 0);
        }
    }

    // rounds: kill the monochromatic edges of color i−1, coloring new vertices i
    for round in 1..=d {
        let target_color = round - 1;
        let to_split: Vec<Face> = current
            .edges()
            .into_iter()
            .filter(|e| {
                let (a, b) = (e.vertices()[0], e.vertices()[1]);
                colors[&a] == target_color && colors[&b] == target_color
            })
            .collect();
        for e in to_split {
            let fresh = fresh_vertex_id(&current);
            let (next, _) = stellar_subdivide_edge(&current, &e, fresh)?;
            script.push(&e, fresh);
            current = next;
            colors.insert(fresh, round);
        }
        debug_assert!(round_invariant_holds(&current, &colors, sub, round));
    }

    let out = VertexColoring::new(colors);
    assert!(out.is_total_proper_on(&current), "rounds must end in a proper coloring");
    Ok(ExtendedColoring { complex: current, coloring: out, script })
}

fn edge_adjacency(complex: &SimplicialComplex) -> BTreeMap<VertexId, Vec<VertexId>> {
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for e in complex.edges() {
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    adj
}

/// Loop invariant of the rounds: after round `i`, every facet not contained in
/// the fixed subcomplex has exactly one vertex of each color below `i`.
pub fn round_invariant_holds(
    complex: &SimplicialComplex,
    colors: &BTreeMap<VertexId, usize>,
    sub: &SimplicialComplex,
    round: usize,
) -> bool {
    complex.facets().iter().all(|f| {
        if sub.is_face(f) {
            return true;
        }
        (0..round).all(|c| f.vertices().iter().filter(|v| colors[v] == c).count() == 1)
    })
}

/// Output of [`colored_cone_ball`].
#[derive(Clone, Debug)]
pub struct ColoredBall {
    pub ball: SimplicialComplex,
    pub coloring: VertexColoring,
    pub script: SubdivisionScript,
}

/// Builds a colored d-ball over a properly k-colored (d−1)-sphere: extends the
/// coloring over the cone by edge subdivisions. The result's boundary equals
/// the input sphere, and the coloring restricts to the input coloring on it.
pub fn colored_cone_ball(
    sphere: &SimplicialComplex,
    coloring: &VertexColoring,
    k: usize,
    options: ExtendOptions,
) -> Result<ColoredBall, ColoringError> {
    if !is_closed_pseudomanifold_sphere_proxy(sphere) {
        return Err(ColoringError::NotASphere);
    }
    let cone = crate::complex::cone(sphere).expect("nonempty sphere");
    let extended = extend_coloring(&cone, sphere, coloring, k, options)?;
    assert_eq!(
        extended.complex.boundary(),
        *sphere,
        "edge subdivisions of cone interiors must preserve the boundary"
    );
    Ok(ColoredBall {
        ball: extended.complex,
        coloring: extended.coloring,
        script: extended.script,
    })
}

/// Replays an extension script (for reproducibility checks).
pub fn replay_extension(
    base: &SimplicialComplex,
    script: &SubdivisionScript,
) -> Result<SimplicialComplex, ColoringError> {
    Ok(apply_script(base, script)?.0)
}
