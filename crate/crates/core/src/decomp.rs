//! The finite quotient graph `H\S` of the standard tree by an open subgroup
//! `H = φ⁻¹(Q)`, and the graph of groups it carries.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::gog::{GogError, GraphOfGroups, ObjectId};
use crate::graph::{Edge, EdgeId, GraphError, OrientedGraph, Side, VertexId};
use crate::pgroup::{double_cosets_within, Elem, FiniteGroup, GroupError, GroupHom, Subgroup};
use crate::quotient::{OpenSubgroupSpec, PQuotientMap};

#[derive(Debug, Error, Clone)]
pub enum DecompError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gog(#[from] GogError),
    #[error("quotient graph is disconnected")]
    Disconnected,
    #[error("no conjugator at end d{side} of lifted edge {edge}")]
    NoConjugator { edge: EdgeId, side: usize },
    #[error("edge stabilizer of {0} differs between its two ends")]
    StabilizerMismatch(EdgeId),
}

/// A vertex of the quotient graph: a double coset `Q' r R_v` over a
/// source vertex, with its transversal representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LiftedVertex {
    pub id: VertexId,
    pub over: VertexId,
    pub rep: Elem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LiftedEdge {
    pub id: EdgeId,
    pub over: EdgeId,
    pub rep: Elem,
    /// Element `u` of the vertex group at each end; the induced boundary is
    /// `x ↦ u ∂_i(x) u⁻¹`.
    pub conjugators: [Elem; 2],
}

/// The quotient graph with its transversal, before groups are attached.
#[derive(Debug, Clone)]
pub struct StandardGraph {
    pub graph: OrientedGraph,
    pub vertices: Vec<LiftedVertex>,
    pub edges: Vec<LiftedEdge>,
    /// Lifted edges along which the transversal is connected.
    pub tree_edges: Vec<EdgeId>,
}

impl StandardGraph {
    pub fn vertex(&self, v: VertexId) -> &LiftedVertex {
        &self.vertices[v.0 as usize]
    }

    pub fn edge(&self, e: EdgeId) -> &LiftedEdge {
        &self.edges[e.0 as usize]
    }

    /// Source object of a lifted object.
    pub fn orbit_map(&self, object: ObjectId) -> ObjectId {
        match object {
            ObjectId::Vertex(v) => ObjectId::Vertex(self.vertex(v).over),
            ObjectId::Edge(e) => ObjectId::Edge(self.edge(e).over),
        }
    }
}

/// Double-coset bookkeeping for one source object.
struct Fibre {
    /// Element of `P` to position of its double coset in this fibre.
    coset_of: Vec<u32>,
    /// First lifted id of this fibre.
    first: u32,
    count: u32,
}

impl Fibre {
    fn new(image: &Subgroup, q: &Subgroup, r: Subgroup, first: u32) -> Result<Fibre, GroupError> {
        let cosets = double_cosets_within(image, q, &r)?;
        let mut coset_of = vec![u32::MAX; image.parent().order()];
        for (i, c) in cosets.iter().enumerate() {
            for &x in &c.elements {
                coset_of[x as usize] = i as u32;
            }
        }
        Ok(Fibre { coset_of, first, count: cosets.len() as u32 })
    }

    fn lifted(&self, x: Elem) -> u32 {
        self.first + self.coset_of[x as usize]
    }
}

fn vertex_image(phi: &PQuotientMap, v: VertexId) -> Subgroup {
    phi.vmap(v).image().clone()
}

fn edge_image(phi: &PQuotientMap, e: EdgeId) -> Subgroup {
    let g = phi.gog();
    let edge = g.edge(e).expect("edge of this gog");
    let f = phi.vmap(edge.d0);
    let b = g.boundary(e, Side::D0);
    let elems: Vec<Elem> = g.edge_group(e).elements().map(|x| f.apply(b.apply(x))).collect();
    Subgroup::generated(phi.target().clone(), &elems).expect("images in range")
}

/// The quotient graph `H\S` with a connected transversal.
///
/// Lifted ids are assigned fibre by fibre in source id order, and within a
/// fibre by the minimal element of each double coset.
pub fn standard_graph(spec: &OpenSubgroupSpec) -> Result<StandardGraph, DecompError> {
    let phi = &spec.phi;
    let g = phi.gog();
    let target = phi.target();
    let image = phi.image();
    let q = &spec.q_image;

    let mut vfibres = BTreeMap::new();
    let mut next = 0;
    for v in g.graph().vertices() {
        let fibre = Fibre::new(image, q, vertex_image(phi, v), next)?;
        next += fibre.count;
        vfibres.insert(v, fibre);
    }
    let mut efibres = BTreeMap::new();
    let mut next_edge = 0;
    for e in g.graph().edges() {
        let fibre = Fibre::new(image, q, edge_image(phi, e.id), next_edge)?;
        next_edge += fibre.count;
        efibres.insert(e.id, fibre);
    }

    // lifted objects with their minimal double coset elements
    let mut vertex_over = Vec::with_capacity(next as usize);
    for (&v, fibre) in &vfibres {
        vertex_over.extend(std::iter::repeat_n(v, fibre.count as usize));
    }
    let mut edge_over = Vec::with_capacity(next_edge as usize);
    let mut edge_min = vec![Elem::MAX; next_edge as usize];
    for (&e, fibre) in &efibres {
        edge_over.extend(std::iter::repeat_n(e, fibre.count as usize));
        for &x in image.elements() {
            let slot = &mut edge_min[fibre.lifted(x) as usize];
            *slot = (*slot).min(x);
        }
    }

    let mut lifted_edges = Vec::with_capacity(next_edge as usize);
    for (i, &e) in edge_over.iter().enumerate() {
        let edge = g.edge(e)?;
        let c = edge_min[i];
        let d0 = vfibres[&edge.d0].lifted(c);
        let d1 = vfibres[&edge.d1].lifted(target.mul(c, phi.tau(e)));
        lifted_edges.push(Edge::new(i as u32, d0, d1));
    }
    let graph = OrientedGraph::new((0..next).map(VertexId), lifted_edges.clone())?;

    // breadth-first transversal from the lift of the root through 1
    let root = phi.tree().root();
    let start = vfibres[&root].lifted(target.identity());
    let mut vrep: Vec<Option<Elem>> = vec![None; next as usize];
    let mut erep: Vec<Option<Elem>> = vec![None; next_edge as usize];
    let mut tree_edges = Vec::new();
    vrep[start as usize] = Some(target.identity());
    let mut queue = VecDeque::from([VertexId(start)]);
    while let Some(w) = queue.pop_front() {
        let rw = vrep[w.0 as usize].expect("queued vertices have representatives");
        let v = vertex_over[w.0 as usize];
        let fv = phi.vmap(v);
        for lifted in graph.incident(w) {
            let m = lifted.id.0 as usize;
            if erep[m].is_some() {
                continue;
            }
            let e = edge_over[m];
            let t = phi.tau(e);
            let fibre = &efibres[&e];
            let side = if lifted.d0 == w { Side::D0 } else { Side::D1 };
            let rm = g
                .vertex_group(v)
                .elements()
                .map(|y| {
                    let base = target.mul(rw, fv.apply(y));
                    match side {
                        Side::D0 => base,
                        Side::D1 => target.mul(base, target.inv(t)),
                    }
                })
                .find(|&r| fibre.lifted(r) == lifted.id.0)
                .expect("end coset meets the edge coset");
            erep[m] = Some(rm);
            let (far, far_rep) = match side {
                Side::D0 => (lifted.d1, target.mul(rm, t)),
                Side::D1 => (lifted.d0, rm),
            };
            if vrep[far.0 as usize].is_none() {
                vrep[far.0 as usize] = Some(far_rep);
                tree_edges.push(lifted.id);
                queue.push_back(far);
            }
        }
    }
    if vrep.iter().any(Option::is_none) {
        return Err(DecompError::Disconnected);
    }

    let vertices: Vec<LiftedVertex> = (0..next as usize)
        .map(|i| LiftedVertex { id: VertexId(i as u32), over: vertex_over[i], rep: vrep[i].expect("all reached") })
        .collect();
    let mut edges = Vec::with_capacity(next_edge as usize);
    for (i, lifted) in lifted_edges.iter().enumerate() {
        let e = edge_over[i];
        let rm = erep[i].expect("all reached");
        let mut conjugators = [0; 2];
        for side in Side::BOTH {
            let w = lifted.end(side);
            let rw = vertices[w.0 as usize].rep;
            let aligned = match side {
                Side::D0 => rm,
                Side::D1 => target.mul(rm, phi.tau(e)),
            };
            let v = vertex_over[w.0 as usize];
            let fv = phi.vmap(v);
            let rw_inv = target.inv(rw);
            // aligned = q·rw·φ(u) for some q ∈ Q
            let vg = g.vertex_group(v);
            let u = std::iter::once(vg.identity())
                .chain(vg.elements())
                .find(|&u| {
                    let q_elem = target.mul(target.mul(aligned, target.inv(fv.apply(u))), rw_inv);
                    spec.q.contains(q_elem)
                })
                .ok_or(DecompError::NoConjugator { edge: lifted.id, side: side.index() })?;
            conjugators[side.index()] = u;
        }
        edges.push(LiftedEdge { id: lifted.id, over: e, rep: rm, conjugators });
    }
    Ok(StandardGraph { graph, vertices, edges, tree_edges })
}

/// The decomposition of `H` carried by the quotient graph.
#[derive(Debug, Clone)]
pub struct InducedDecomposition {
    pub source: Arc<GraphOfGroups>,
    pub spec: OpenSubgroupSpec,
    pub standard: StandardGraph,
    pub delta0: GraphOfGroups,
    /// Each lifted vertex group as a subgroup of the source vertex group.
    pub vertex_stabilizers: BTreeMap<VertexId, Subgroup>,
    pub edge_stabilizers: BTreeMap<EdgeId, Subgroup>,
}

/// `{x ∈ G : r·f(x)·r⁻¹ ∈ Q}`.
fn stabilizer(group: &Arc<FiniteGroup>, f: impl Fn(Elem) -> Elem, r: Elem, spec: &OpenSubgroupSpec) -> Subgroup {
    let p = spec.phi.target();
    Subgroup::from_member_iter(group.clone(), group.elements().filter(|&x| spec.q.contains(p.conj(r, f(x)))))
}

/// The stabilizer as a group in its own right; element `i` is the `i`-th
/// smallest member, so a whole group is reused as is.
fn materialize(s: &Subgroup) -> Result<Arc<FiniteGroup>, GroupError> {
    if s.is_whole() {
        Ok(s.parent().clone())
    } else {
        s.to_group().map(|(g, _)| g)
    }
}

pub fn induced_gog(spec: &OpenSubgroupSpec) -> Result<InducedDecomposition, DecompError> {
    let standard = standard_graph(spec)?;
    let phi = &spec.phi;
    let g = phi.gog();
    let target = phi.target();

    let mut vertex_stabilizers = BTreeMap::new();
    let mut vgroups = BTreeMap::new();
    for lv in &standard.vertices {
        let f = phi.vmap(lv.over);
        let s = stabilizer(g.vertex_group(lv.over), |x| f.apply(x), lv.rep, spec);
        vgroups.insert(lv.id, materialize(&s)?);
        vertex_stabilizers.insert(lv.id, s);
    }

    let mut edge_stabilizers = BTreeMap::new();
    let mut egroups = BTreeMap::new();
    let mut boundaries = BTreeMap::new();
    for le in &standard.edges {
        let e = le.over;
        let edge = g.edge(e)?;
        let b0 = g.boundary(e, Side::D0);
        let b1 = g.boundary(e, Side::D1);
        let f0 = phi.vmap(edge.d0);
        let f1 = phi.vmap(edge.d1);
        let grp = g.edge_group(e);
        let s0 = stabilizer(grp, |x| f0.apply(b0.apply(x)), le.rep, spec);
        let s1 = stabilizer(grp, |x| f1.apply(b1.apply(x)), target.mul(le.rep, phi.tau(e)), spec);
        if s0 != s1 {
            return Err(DecompError::StabilizerMismatch(le.id));
        }
        let egrp = materialize(&s0)?;
        let lifted = standard.graph.edge(le.id)?;
        let mut bs = Vec::with_capacity(2);
        for side in Side::BOTH {
            let w = lifted.end(side);
            let vgrp = g.vertex_group(edge.end(side));
            let b = g.boundary(e, side);
            let u = le.conjugators[side.index()];
            let vstab = &vertex_stabilizers[&w];
            let map: Vec<Elem> = s0
                .elements()
                .iter()
                .map(|&x| {
                    let y = vgrp.conj(u, b.apply(x));
                    vstab.position(y).map(|i| i as Elem)
                })
                .collect::<Option<_>>()
                .ok_or(DecompError::NoConjugator { edge: le.id, side: side.index() })?;
            bs.push(GroupHom::from_map(egrp.clone(), vgroups[&w].clone(), map)?);
        }
        let b1 = bs.pop().expect("two sides");
        let b0 = bs.pop().expect("two sides");
        egroups.insert(le.id, egrp);
        boundaries.insert(le.id, [b0, b1]);
        edge_stabilizers.insert(le.id, s0);
    }
    let delta0 = GraphOfGroups::new(g.p(), standard.graph.clone(), vgroups, egroups, boundaries)?;
    Ok(InducedDecomposition {
        source: g.clone(),
        spec: spec.clone(),
        standard,
        delta0,
        vertex_stabilizers,
        edge_stabilizers,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibreAccount {
    pub object: ObjectId,
    /// `Σ [G(m) : ℋ(m')]` over the lifts `m'` of `m`.
    pub total: usize,
    pub index: usize,
    pub ok: bool,
}

/// Orbit counting: the lifts of each source object account for the index.
pub fn index_accounting(d: &InducedDecomposition) -> Vec<FibreAccount> {
    let mut totals: BTreeMap<ObjectId, usize> = BTreeMap::new();
    for v in d.source.graph().vertices() {
        totals.insert(ObjectId::Vertex(v), 0);
    }
    for e in d.source.graph().edges() {
        totals.insert(ObjectId::Edge(e.id), 0);
    }
    for lv in &d.standard.vertices {
        *totals.get_mut(&ObjectId::Vertex(lv.over)).expect("source vertex") += d.vertex_stabilizers[&lv.id].index();
    }
    for le in &d.standard.edges {
        *totals.get_mut(&ObjectId::Edge(le.over)).expect("source edge") += d.edge_stabilizers[&le.id].index();
    }
    totals
        .into_iter()
        .map(|(object, total)| FibreAccount { object, total, index: d.spec.index, ok: total == d.spec.index })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::{euler_characteristic, validate_gog};
    use crate::graph::{free_rank, graphs_isomorphic};
    use crate::pgroup::double_cosets_within;
    use crate::quotient::tests::cyclic_quotient;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn decompose(phi: PQuotientMap, q: &[Elem]) -> InducedDecomposition {
        let phi = Arc::new(phi);
        let q = Subgroup::generated(phi.target().clone(), q).unwrap();
        let spec = OpenSubgroupSpec::new(phi, q).unwrap();
        induced_gog(&spec).unwrap()
    }

    /// `|V(Δ₀)|` and `|E(Δ₀)|` straight from double coset counts.
    fn coset_oracle(d: &InducedDecomposition) -> (usize, usize) {
        let phi = &d.spec.phi;
        let count = |r: &Subgroup| double_cosets_within(phi.image(), &d.spec.q_image, r).unwrap().len();
        let v = d.source.graph().vertices().map(|v| count(&vertex_image(phi, v))).sum();
        let e = d.source.graph().edges().map(|e| count(&edge_image(phi, e.id))).sum();
        (v, e)
    }

    fn check_common(d: &InducedDecomposition) {
        assert!(validate_gog(&d.delta0).is_valid());
        assert_eq!(coset_oracle(d), (d.delta0.vertex_count(), d.delta0.edge_count()));
        let index = BigRational::from_integer(BigInt::from(d.spec.index));
        assert_eq!(euler_characteristic(&d.delta0), index * euler_characteristic(&d.source));
        assert!(index_accounting(d).iter().all(|a| a.ok));
    }

    #[test]
    fn free_product_of_two_c2() {
        let d = decompose(cyclic_quotient(2, 2, 1, 0, 2), &[]);
        check_common(&d);
        assert_eq!((d.delta0.vertex_count(), d.delta0.edge_count()), (2, 2));
        assert_eq!(free_rank(d.delta0.graph()).unwrap(), 1);
        assert_eq!(d.delta0.vertex_orders(), vec![1, 1]);
        let accounts = index_accounting(&d);
        assert_eq!(accounts[0].total, 2);
    }

    #[test]
    fn free_product_of_two_c3() {
        let d = decompose(cyclic_quotient(3, 3, 1, 0, 3), &[]);
        check_common(&d);
        assert_eq!((d.delta0.vertex_count(), d.delta0.edge_count()), (2, 3));
    }

    #[test]
    fn amalgam_mod_two() {
        let d = decompose(cyclic_quotient(2, 4, 2, 2, 2), &[]);
        check_common(&d);
        assert_eq!(d.delta0.vertex_orders(), vec![2, 2]);
        assert_eq!(d.delta0.edge_orders(), vec![2, 2]);
        for e in d.delta0.graph().edges() {
            for side in Side::BOTH {
                assert!(d.delta0.boundary(e.id, side).is_isomorphism());
            }
        }
        for s in d.vertex_stabilizers.values() {
            assert_eq!(s.elements(), &[0, 2]);
        }
    }

    #[test]
    fn whole_image_reproduces_source() {
        let d = decompose(cyclic_quotient(2, 4, 2, 2, 2), &[1]);
        check_common(&d);
        assert_eq!(d.spec.index, 1);
        assert!(graphs_isomorphic(d.delta0.graph(), d.source.graph()));
        assert_eq!(d.delta0.vertex_orders(), d.source.vertex_orders());
        assert!(d.standard.vertices.iter().all(|v| v.rep == 0));
    }

    #[test]
    fn transversal_is_connected() {
        let d = decompose(cyclic_quotient(3, 9, 3, 3, 9), &[]);
        check_common(&d);
        assert_eq!(d.standard.tree_edges.len() + 1, d.delta0.vertex_count());
        for &e in &d.standard.tree_edges {
            let le = d.standard.edge(e);
            assert!(le.conjugators.contains(&0));
        }
    }
}
