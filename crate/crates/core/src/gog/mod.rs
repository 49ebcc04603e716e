//! Finite graphs of finite p-groups.
//!
//! A [`GraphOfGroups`] attaches a group to every vertex and edge of a
//! connected [`OrientedGraph`], with injective boundary maps from each edge
//! group into the groups at its two ends.

mod morphism;
mod presentation;
mod reduce;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, EdgeId, GraphError, OrientedGraph, Side, VertexId};
use crate::pgroup::{is_p_group, is_prime, FiniteGroup, GroupError, GroupHom, Subgroup};

pub use morphism::{validate_morphism, EdgeImage, GogMorphism, MorphismReport, MorphismViolation};
pub use presentation::{
    fundamental_presentation, Letter, Presentation, Relator, RelatorKind, Symbol, Word,
};
pub use reduce::{collapse_edge, collapse_edge_logged, reduce, Merge, Reduction, ReductionPolicy};

#[derive(Debug, Error, Clone)]
pub enum GogError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("malformed graph of groups: {0}")]
    Structure(String),
    #[error("invalid graph of groups: {0}")]
    Invalid(ValidationReport),
    #[error("edge {0} is a loop")]
    LoopEdge(EdgeId),
    #[error("edge {0} is not fictitious")]
    NotFictitious(EdgeId),
    #[error("{0} is not injective")]
    NotInjective(String),
}

/// A vertex or an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum ObjectId {
    Vertex(VertexId),
    Edge(EdgeId),
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectId::Vertex(v) => v.fmt(f),
            ObjectId::Edge(e) => e.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NotPrime { p: u32 },
    NonInjectiveBoundary { edge: EdgeId, side: usize },
    NotPGroup { object: ObjectId, order: usize },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPrime { p } => write!(f, "{p} is not prime"),
            Violation::NonInjectiveBoundary { edge, side } => {
                write!(f, "boundary d{side} of edge {edge} is not injective")
            }
            Violation::NotPGroup { object, order } => {
                write!(f, "group at {object} has order {order}, not a power of p")
            }
            Violation::Disconnected { components } => {
                write!(f, "graph has {components} components")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone)]
pub struct GraphOfGroups {
    p: u32,
    graph: OrientedGraph,
    vgroups: BTreeMap<VertexId, Arc<FiniteGroup>>,
    egroups: BTreeMap<EdgeId, Arc<FiniteGroup>>,
    boundaries: BTreeMap<EdgeId, [GroupHom; 2]>,
}

impl GraphOfGroups {
    /// Assemble without checking the graph-of-groups invariants; only the
    /// shapes (every object has a group, boundary maps between the right
    /// groups) are checked.
    pub fn from_parts(
        p: u32,
        graph: OrientedGraph,
        vgroups: BTreeMap<VertexId, Arc<FiniteGroup>>,
        egroups: BTreeMap<EdgeId, Arc<FiniteGroup>>,
        boundaries: BTreeMap<EdgeId, [GroupHom; 2]>,
    ) -> Result<GraphOfGroups, GogError> {
        let structure = |msg: String| Err(GogError::Structure(msg));
        if vgroups.len() != graph.vertex_count()
            || graph.vertices().any(|v| !vgroups.contains_key(&v))
        {
            return structure("vertex groups do not match the vertex set".into());
        }
        if egroups.len() != graph.edge_count() || boundaries.len() != graph.edge_count() {
            return structure("edge groups or boundaries do not match the edge set".into());
        }
        for e in graph.edges() {
            let (Some(ge), Some(bs)) = (egroups.get(&e.id), boundaries.get(&e.id)) else {
                return structure(format!("edge {} lacks a group or boundary maps", e.id));
            };
            for side in Side::BOTH {
                let b = &bs[side.index()];
                if !b.domain().same_as(ge) {
                    return structure(format!(
                        "d{} of {} does not start at the edge group",
                        side.index(),
                        e.id
                    ));
                }
                if !b.codomain().same_as(&vgroups[&e.end(side)]) {
                    return structure(format!(
                        "d{} of {} does not land in the group of {}",
                        side.index(),
                        e.id,
                        e.end(side)
                    ));
                }
            }
        }
        Ok(GraphOfGroups {
            p,
            graph,
            vgroups,
            egroups,
            boundaries,
        })
    }

    /// Assemble and require every invariant to hold.
    pub fn new(
        p: u32,
        graph: OrientedGraph,
        vgroups: BTreeMap<VertexId, Arc<FiniteGroup>>,
        egroups: BTreeMap<EdgeId, Arc<FiniteGroup>>,
        boundaries: BTreeMap<EdgeId, [GroupHom; 2]>,
    ) -> Result<GraphOfGroups, GogError> {
        let g = Self::from_parts(p, graph, vgroups, egroups, boundaries)?;
        let report = validate_gog(&g);
        if report.is_valid() {
            Ok(g)
        } else {
            Err(GogError::Invalid(report))
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn graph(&self) -> &OrientedGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn vertex_group(&self, v: VertexId) -> &Arc<FiniteGroup> {
        &self.vgroups[&v]
    }

    pub fn edge_group(&self, e: EdgeId) -> &Arc<FiniteGroup> {
        &self.egroups[&e]
    }

    pub fn boundary(&self, e: EdgeId, side: Side) -> &GroupHom {
        &self.boundaries[&e][side.index()]
    }

    pub fn boundaries(&self, e: EdgeId) -> &[GroupHom; 2] {
        &self.boundaries[&e]
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge, GogError> {
        Ok(self.graph.edge(e)?)
    }

    pub(crate) fn into_parts(
        self,
    ) -> (
        u32,
        OrientedGraph,
        BTreeMap<VertexId, Arc<FiniteGroup>>,
        BTreeMap<EdgeId, Arc<FiniteGroup>>,
        BTreeMap<EdgeId, [GroupHom; 2]>,
    ) {
        (
            self.p,
            self.graph,
            self.vgroups,
            self.egroups,
            self.boundaries,
        )
    }

    /// Vertex group orders in ascending order.
    pub fn vertex_orders(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.vgroups.values().map(|g| g.order()).collect();
        v.sort_unstable();
        v
    }

    pub fn edge_orders(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.egroups.values().map(|g| g.order()).collect();
        v.sort_unstable();
        v
    }

    pub fn is_reduced(&self) -> bool {
        fictitious_edges(self).is_empty()
    }
}

pub fn validate_gog(g: &GraphOfGroups) -> ValidationReport {
    let mut violations = Vec::new();
    if !is_prime(g.p) {
        violations.push(Violation::NotPrime { p: g.p });
    }
    for e in g.graph.edges() {
        for side in Side::BOTH {
            if !g.boundary(e.id, side).is_injective() {
                violations.push(Violation::NonInjectiveBoundary {
                    edge: e.id,
                    side: side.index(),
                });
            }
        }
    }
    if is_prime(g.p) {
        for (v, grp) in &g.vgroups {
            if !is_p_group(grp, g.p) {
                violations.push(Violation::NotPGroup {
                    object: ObjectId::Vertex(*v),
                    order: grp.order(),
                });
            }
        }
        for (e, grp) in &g.egroups {
            if !is_p_group(grp, g.p) {
                violations.push(Violation::NotPGroup {
                    object: ObjectId::Edge(*e),
                    order: grp.order(),
                });
            }
        }
    }
    let components = g.graph.components().len();
    if components != 1 {
        violations.push(Violation::Disconnected { components });
    }
    ValidationReport { violations }
}

/// Non-loop edges with a boundary map that is an isomorphism.
pub fn fictitious_edges(g: &GraphOfGroups) -> Vec<EdgeId> {
    g.graph
        .edges()
        .filter(|e| !e.is_loop())
        .filter(|e| g.boundaries[&e.id].iter().any(|b| b.is_isomorphism()))
        .map(|e| e.id)
        .collect()
}

/// `Σ_v 1/|G(v)| − Σ_e 1/|G(e)|`, exactly.
pub fn euler_characteristic(g: &GraphOfGroups) -> BigRational {
    let recip = |n: usize| BigRational::new(BigInt::from(1), BigInt::from(n));
    let vertices = g
        .vgroups
        .values()
        .fold(BigRational::zero(), |acc, grp| acc + recip(grp.order()));
    let edges = g
        .egroups
        .values()
        .fold(BigRational::zero(), |acc, grp| acc + recip(grp.order()));
    vertices - edges
}

/// Two vertices `0 → 1` joined by one edge carrying `k`.
pub fn amalgam_gog(
    p: u32,
    g1: Arc<FiniteGroup>,
    g2: Arc<FiniteGroup>,
    k: Arc<FiniteGroup>,
    f1: GroupHom,
    f2: GroupHom,
) -> Result<GraphOfGroups, GogError> {
    for (name, f) in [("f1", &f1), ("f2", &f2)] {
        if !f.is_injective() {
            return Err(GogError::NotInjective(name.into()));
        }
    }
    let graph = OrientedGraph::new([VertexId(0), VertexId(1)], [Edge::new(0, 0, 1)])?;
    GraphOfGroups::new(
        p,
        graph,
        BTreeMap::from([(VertexId(0), g1), (VertexId(1), g2)]),
        BTreeMap::from([(EdgeId(0), k)]),
        BTreeMap::from([(EdgeId(0), [f1, f2])]),
    )
}

/// One vertex carrying `A`'s parent group with one loop carrying `A`;
/// `d0` is the inclusion of `A`, `d1` is `f`.
///
/// `f` must be defined on `A` viewed as a group (see [`Subgroup::to_group`]).
pub fn hnn_gog(p: u32, a: &Subgroup, f: GroupHom) -> Result<GraphOfGroups, GogError> {
    let g = a.parent().clone();
    if !f.is_injective() {
        return Err(GogError::NotInjective("f".into()));
    }
    if f.domain().order() != a.order() || !f.codomain().same_as(&g) {
        return Err(GogError::Structure(
            "f must map the subgroup into its parent".into(),
        ));
    }
    let (a_group, _) = a.to_group()?;
    if !a_group.same_as(f.domain()) {
        return Err(GogError::Structure(
            "f is not defined on the subgroup".into(),
        ));
    }
    let edge_group = f.domain().clone();
    let inclusion = GroupHom::from_map(edge_group.clone(), g.clone(), a.elements().to_vec())?;
    let graph = OrientedGraph::new([VertexId(0)], [Edge::new(0, 0, 0)])?;
    GraphOfGroups::new(
        p,
        graph,
        BTreeMap::from([(VertexId(0), g)]),
        BTreeMap::from([(EdgeId(0), edge_group)]),
        BTreeMap::from([(EdgeId(0), [inclusion, f])]),
    )
}

/// Every group trivial: the graph itself, as a graph of groups.
pub fn trivial_gog(p: u32, graph: OrientedGraph) -> Result<GraphOfGroups, GogError> {
    let one = crate::pgroup::group_from_spec(&crate::pgroup::GroupSpec::cyclic(1))?;
    let id = GroupHom::identity(one.clone());
    let vgroups = graph.vertices().map(|v| (v, one.clone())).collect();
    let egroups = graph.edges().map(|e| (e.id, one.clone())).collect();
    let boundaries = graph
        .edges()
        .map(|e| (e.id, [id.clone(), id.clone()]))
        .collect();
    GraphOfGroups::new(p, graph, vgroups, egroups, boundaries)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::pgroup::{group_from_spec, GroupSpec};

    pub(crate) fn cyc(n: u32) -> Arc<FiniteGroup> {
        group_from_spec(&GroupSpec::cyclic(n)).unwrap()
    }

    pub(crate) fn hom(
        d: &Arc<FiniteGroup>,
        c: &Arc<FiniteGroup>,
        gens: &[u32],
        imgs: &[u32],
    ) -> GroupHom {
        GroupHom::from_generator_images(d.clone(), c.clone(), gens, imgs).unwrap()
    }

    /// `Cn ∐_{Ck} Cn` with the edge generator sent to `image` on both sides.
    pub(crate) fn cyclic_amalgam(p: u32, n: u32, k: u32, image: u32) -> GraphOfGroups {
        let (a, b, e) = (cyc(n), cyc(n), cyc(k));
        let gens: Vec<u32> = if k > 1 { vec![1] } else { vec![] };
        let imgs: Vec<u32> = if k > 1 { vec![image] } else { vec![] };
        let f1 = hom(&e, &a, &gens, &imgs);
        let f2 = hom(&e, &b, &gens, &imgs);
        amalgam_gog(p, a, b, e, f1, f2).unwrap()
    }

    pub(crate) fn graph(nv: u32, edges: &[(u32, u32)]) -> OrientedGraph {
        OrientedGraph::new(
            (0..nv).map(VertexId),
            edges
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| Edge::new(i as u32, a, b)),
        )
        .unwrap()
    }

    #[test]
    fn amalgam_validation() {
        let g = cyclic_amalgam(2, 4, 2, 2);
        assert!(validate_gog(&g).is_valid());

        let (a, e) = (cyc(4), cyc(2));
        let collapsing = hom(&e, &a, &[1], &[0]);
        let good = hom(&e, &a, &[1], &[2]);
        let graph = graph(2, &[(0, 1)]);
        let bad = GraphOfGroups::from_parts(
            2,
            graph,
            BTreeMap::from([(VertexId(0), a.clone()), (VertexId(1), a.clone())]),
            BTreeMap::from([(EdgeId(0), e.clone())]),
            BTreeMap::from([(EdgeId(0), [collapsing, good])]),
        )
        .unwrap();
        let report = validate_gog(&bad);
        assert_eq!(
            report.violations,
            vec![Violation::NonInjectiveBoundary {
                edge: EdgeId(0),
                side: 0
            }]
        );
    }

    #[test]
    fn hnn_shapes() {
        let c2 = cyc(2);
        // A = G = C2, f = identity
        let whole = Subgroup::whole(c2.clone());
        let (a_group, _) = whole.to_group().unwrap();
        let f = hom(&a_group, &c2, &[1], &[1]);
        let g = hnn_gog(2, &whole, f).unwrap();
        assert!(validate_gog(&g).is_valid());
        assert!(fictitious_edges(&g).is_empty());

        // trivial A
        let triv = Subgroup::trivial(c2.clone());
        let (t_group, _) = triv.to_group().unwrap();
        let g = hnn_gog(2, &triv, GroupHom::trivial(t_group, c2)).unwrap();
        assert!(validate_gog(&g).is_valid());

        // A = {0,2} ≤ C4 embedded into {0,2}
        let c4 = cyc(4);
        let a = Subgroup::generated(c4.clone(), &[2]).unwrap();
        let (a_group, _) = a.to_group().unwrap();
        let f = hom(&a_group, &c4, &[1], &[2]);
        assert!(validate_gog(&hnn_gog(2, &a, f).unwrap()).is_valid());
    }

    #[test]
    fn p_group_violation() {
        let (c3, one) = (cyc(3), cyc(1));
        let b = GroupHom::trivial(one.clone(), c3.clone());
        let g = GraphOfGroups::from_parts(
            2,
            graph(2, &[(0, 1)]),
            BTreeMap::from([(VertexId(0), c3.clone()), (VertexId(1), c3.clone())]),
            BTreeMap::from([(EdgeId(0), one)]),
            BTreeMap::from([(EdgeId(0), [b.clone(), b])]),
        )
        .unwrap();
        let report = validate_gog(&g);
        assert!(matches!(
            amalgam_gog(
                2,
                c3.clone(),
                c3,
                g.edge_group(EdgeId(0)).clone(),
                g.boundary(EdgeId(0), Side::D0).clone(),
                g.boundary(EdgeId(0), Side::D1).clone()
            ),
            Err(GogError::Invalid(_))
        ));
        assert_eq!(report.violations.len(), 2);
        assert!(matches!(report.violations[0], Violation::NotPGroup { .. }));
    }

    #[test]
    fn fictitious_examples() {
        assert!(fictitious_edges(&cyclic_amalgam(2, 4, 2, 2)).is_empty());

        let (c2, c4, e) = (cyc(2), cyc(4), cyc(2));
        let f1 = hom(&e, &c2, &[1], &[1]);
        let f2 = hom(&e, &c4, &[1], &[2]);
        let g = amalgam_gog(2, c2, c4, e, f1, f2).unwrap();
        assert_eq!(fictitious_edges(&g), vec![EdgeId(0)]);
    }

    #[test]
    fn loops_are_never_fictitious() {
        let c2 = cyc(2);
        let whole = Subgroup::whole(c2.clone());
        let (a_group, _) = whole.to_group().unwrap();
        let g = hnn_gog(2, &whole, hom(&a_group, &c2, &[1], &[1])).unwrap();
        assert!(g.boundary(EdgeId(0), Side::D0).is_isomorphism());
        assert!(fictitious_edges(&g).is_empty());
    }

    #[test]
    fn euler_characteristic_examples() {
        let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(euler_characteristic(&cyclic_amalgam(2, 2, 1, 0)), r(0, 1));
        assert_eq!(euler_characteristic(&cyclic_amalgam(3, 3, 1, 0)), r(-1, 3));
        assert_eq!(euler_characteristic(&cyclic_amalgam(2, 4, 2, 2)), r(0, 1));
    }

    #[test]
    fn amalgam_constructor_shapes() {
        // infinite dihedral shape
        let g = cyclic_amalgam(2, 2, 1, 0);
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 1));
        assert!(g.is_reduced());
        // fully fictitious C2 ∐_{C2} C2
        let g = cyclic_amalgam(2, 2, 2, 1);
        assert!(validate_gog(&g).is_valid());
        assert_eq!(fictitious_edges(&g), vec![EdgeId(0)]);
        // non-injective input
        let (c4, c2) = (cyc(4), cyc(2));
        let bad = hom(&c4, &c2, &[1], &[1]);
        let ok = GroupHom::identity(c4.clone());
        assert!(matches!(
            amalgam_gog(2, c2.clone(), c4.clone(), c4, bad, ok),
            Err(GogError::NotInjective(_))
        ));
    }
}
