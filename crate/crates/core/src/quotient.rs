//! Finite p-quotients of the fundamental group of a graph of groups, and the
//! open subgroups they define.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::gog::{GogError, GraphOfGroups, Letter, Word};
use crate::graph::{EdgeId, GraphError, Side, SpanningTree, VertexId};
use crate::pgroup::{is_p_group, Elem, FiniteGroup, GroupError, GroupHom, Subgroup};

#[derive(Debug, Error, Clone)]
pub enum QuotientError {
    #[error(transparent)]
    Gog(#[from] GogError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("target of order {order} is not a {p}-group")]
    WrongPrime { p: u32, order: usize },
    #[error("{0}")]
    Shape(String),
    #[error("tree edge {0} has a non-identity stable letter image")]
    TreeEdgeTau(EdgeId),
    #[error("relation fails at edge {edge}, element {elem}")]
    Compatibility { edge: EdgeId, elem: Elem },
    #[error("letter {0} does not belong to the graph of groups")]
    ForeignLetter(String),
    #[error("subgroup does not live in the target group")]
    ForeignSubgroup,
}

/// A homomorphism from the fundamental group onto (part of) a finite
/// p-group, given by vertex group maps and stable letter images relative
/// to a spanning tree.
#[derive(Debug, Clone)]
pub struct PQuotientMap {
    gog: Arc<GraphOfGroups>,
    tree: SpanningTree,
    target: Arc<FiniteGroup>,
    vmaps: BTreeMap<VertexId, GroupHom>,
    tau: BTreeMap<EdgeId, Elem>,
    image: Subgroup,
}

impl PQuotientMap {
    pub fn gog(&self) -> &Arc<GraphOfGroups> {
        &self.gog
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn vmap(&self, v: VertexId) -> &GroupHom {
        &self.vmaps[&v]
    }

    pub fn tau(&self, e: EdgeId) -> Elem {
        self.tau[&e]
    }

    pub fn image(&self) -> &Subgroup {
        &self.image
    }

    /// `φ(∂_side(x))` for an edge element.
    pub fn edge_image(&self, e: EdgeId, side: Side, x: Elem) -> Elem {
        let edge = self.gog.edge(e).expect("edge of this gog");
        self.vmaps[&edge.end(side)].apply(self.gog.boundary(e, side).apply(x))
    }
}

/// Validate and assemble a quotient map. Edges missing from `tau` get the
/// identity.
pub fn build_quotient_map(
    gog: Arc<GraphOfGroups>,
    tree: &SpanningTree,
    target: Arc<FiniteGroup>,
    vmaps: BTreeMap<VertexId, GroupHom>,
    tau: BTreeMap<EdgeId, Elem>,
) -> Result<PQuotientMap, QuotientError> {
    let tree = SpanningTree::from_edges(gog.graph(), tree.root(), tree.edges())?;
    if !is_p_group(&target, gog.p()) {
        return Err(QuotientError::WrongPrime { p: gog.p(), order: target.order() });
    }
    if vmaps.len() != gog.vertex_count() {
        return Err(QuotientError::Shape("one vertex map per vertex required".into()));
    }
    for v in gog.graph().vertices() {
        let Some(f) = vmaps.get(&v) else {
            return Err(QuotientError::Shape(format!("no map for vertex {v}")));
        };
        if !f.domain().same_as(gog.vertex_group(v)) || !f.codomain().same_as(&target) {
            return Err(QuotientError::Shape(format!("map for vertex {v} has the wrong groups")));
        }
    }
    for &e in tau.keys() {
        gog.edge(e)?;
    }
    let mut full_tau = BTreeMap::new();
    for edge in gog.graph().edges() {
        let t = tau.get(&edge.id).copied().unwrap_or(target.identity());
        if !target.contains(t) {
            return Err(GroupError::OutOfRange { elem: t, order: target.order() }.into());
        }
        if tree.contains(edge.id) && t != target.identity() {
            return Err(QuotientError::TreeEdgeTau(edge.id));
        }
        full_tau.insert(edge.id, t);
    }
    for edge in gog.graph().edges() {
        let t = full_tau[&edge.id];
        let f0 = &vmaps[&edge.d0];
        let f1 = &vmaps[&edge.d1];
        let b0 = gog.boundary(edge.id, Side::D0);
        let b1 = gog.boundary(edge.id, Side::D1);
        let grp = gog.edge_group(edge.id);
        let check = |x: Elem| target.conj(t, f1.apply(b1.apply(x))) == f0.apply(b0.apply(x));
        // a homomorphism identity, so generators suffice
        for &x in grp.generators() {
            if !check(x) {
                return Err(QuotientError::Compatibility { edge: edge.id, elem: x });
            }
        }
    }
    let mut gens: Vec<Elem> = Vec::new();
    for f in vmaps.values() {
        gens.extend(f.image().generators());
    }
    gens.extend(full_tau.values().copied());
    gens.sort_unstable();
    gens.dedup();
    let image = Subgroup::generated(target.clone(), &gens)?;
    Ok(PQuotientMap { gog, tree, target, vmaps, tau: full_tau, image })
}

/// The map onto the trivial group.
pub fn trivial_quotient(gog: Arc<GraphOfGroups>, tree: &SpanningTree) -> Result<PQuotientMap, QuotientError> {
    let one = crate::pgroup::group_from_spec(&crate::pgroup::GroupSpec::cyclic(1))?;
    let vmaps = gog
        .graph()
        .vertices()
        .map(|v| (v, GroupHom::trivial(gog.vertex_group(v).clone(), one.clone())))
        .collect();
    build_quotient_map(gog, tree, one, vmaps, BTreeMap::new())
}

/// Evaluate a word of the fundamental group presentation.
pub fn eval_word(phi: &PQuotientMap, w: &Word) -> Result<Elem, QuotientError> {
    let target = &phi.target;
    let mut acc = target.identity();
    for letter in &w.0 {
        let y = match *letter {
            Letter::Vgen { vertex, elem } => {
                let f = phi.vmaps.get(&vertex).ok_or_else(|| QuotientError::ForeignLetter(letter.to_string()))?;
                if !f.domain().contains(elem) {
                    return Err(QuotientError::ForeignLetter(letter.to_string()));
                }
                f.apply(elem)
            }
            Letter::Stable { edge, exp } => {
                let t = *phi.tau.get(&edge).ok_or_else(|| QuotientError::ForeignLetter(letter.to_string()))?;
                if exp >= 0 {
                    target.pow(t, exp as u64)
                } else {
                    target.pow(target.inv(t), (-(exp as i64)) as u64)
                }
            }
        };
        acc = target.mul(acc, y);
    }
    Ok(acc)
}

/// An open subgroup `H = φ⁻¹(Q)`; all indices are taken inside `im φ`.
#[derive(Debug, Clone)]
pub struct OpenSubgroupSpec {
    pub phi: Arc<PQuotientMap>,
    pub q: Subgroup,
    /// `Q ∩ im φ`.
    pub q_image: Subgroup,
    pub index: usize,
    pub normal_in_image: bool,
}

impl OpenSubgroupSpec {
    pub fn new(phi: Arc<PQuotientMap>, q: Subgroup) -> Result<OpenSubgroupSpec, QuotientError> {
        if !q.parent().same_as(&phi.target) {
            return Err(QuotientError::ForeignSubgroup);
        }
        let q_image = q.intersection(&phi.image)?;
        let index = phi.image.order() / q_image.order();
        let normal_in_image = q_image.is_normal_in(&phi.image)?;
        Ok(OpenSubgroupSpec { phi, q, q_image, index, normal_in_image })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageDecomposition {
    pub image_order: usize,
    /// Order of the normal closure in `im φ` of the vertex group images.
    pub normal_closure_order: usize,
    /// Order of the subgroup generated by the stable letter images.
    pub stable_order: usize,
    /// Whether `im φ = N·T`.
    pub holds: bool,
}

/// Check `im φ = N·T` with `N` the normal closure of the vertex images and
/// `T` generated by the stable letters.
pub fn image_decomposition_check(phi: &PQuotientMap) -> ImageDecomposition {
    let target = &phi.target;
    let mut vgens: Vec<Elem> = phi.vmaps.values().flat_map(|f| f.image().generators()).collect();
    vgens.sort_unstable();
    vgens.dedup();
    let n = phi.image.normal_closure(&vgens).expect("vertex images lie in the image");
    let taus: Vec<Elem> = phi.tau.values().copied().collect();
    let t = Subgroup::generated(target.clone(), &taus).expect("elements in range");
    let mut all = n.generators();
    all.extend(&taus);
    let nt = Subgroup::generated(target.clone(), &all).expect("elements in range");
    ImageDecomposition {
        image_order: phi.image.order(),
        normal_closure_order: n.order(),
        stable_order: t.order(),
        holds: nt == phi.image,
    }
}
