use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{GraphOfGroups, ObjectId};
use crate::graph::{EdgeId, Side, VertexId};
use crate::pgroup::{Elem, GroupHom};

/// Where an edge goes: an edge, or a vertex when the edge is collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum EdgeImage {
    Edge(EdgeId),
    Vertex(VertexId),
}

#[derive(Debug, Clone)]
pub struct GogMorphism {
    pub source: Arc<GraphOfGroups>,
    pub target: Arc<GraphOfGroups>,
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeImage>,
    pub vertex_homs: BTreeMap<VertexId, GroupHom>,
    pub edge_homs: BTreeMap<EdgeId, GroupHom>,
}

impl GogMorphism {
    pub fn identity(g: Arc<GraphOfGroups>) -> GogMorphism {
        let vertex_map = g.graph().vertices().map(|v| (v, v)).collect();
        let edge_map = g
            .graph()
            .edges()
            .map(|e| (e.id, EdgeImage::Edge(e.id)))
            .collect();
        let vertex_homs = g
            .graph()
            .vertices()
            .map(|v| (v, GroupHom::identity(g.vertex_group(v).clone())))
            .collect();
        let edge_homs = g
            .graph()
            .edges()
            .map(|e| (e.id, GroupHom::identity(g.edge_group(e.id).clone())))
            .collect();
        GogMorphism {
            source: g.clone(),
            target: g,
            vertex_map,
            edge_map,
            vertex_homs,
            edge_homs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum MorphismViolation {
    Unmapped {
        object: ObjectId,
    },
    UnknownImage {
        object: ObjectId,
    },
    WrongGroups {
        object: ObjectId,
    },
    /// `α(d_i e) ≠ d_i α(e)`.
    Incidence {
        edge: EdgeId,
        side: usize,
    },
    /// `ν(∂_i x) ≠ ∂_i ν(x)` at edge element `elem`.
    Boundary {
        edge: EdgeId,
        side: usize,
        elem: Elem,
    },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismViolation::Unmapped { object } => write!(f, "{object} has no image"),
            MorphismViolation::UnknownImage { object } => {
                write!(f, "image of {object} is not in the target")
            }
            MorphismViolation::WrongGroups { object } => {
                write!(f, "group map at {object} has the wrong domain or codomain")
            }
            MorphismViolation::Incidence { edge, side } => {
                write!(f, "d{side} does not commute with the map at {edge}")
            }
            MorphismViolation::Boundary { edge, side, elem } => {
                write!(
                    f,
                    "boundary d{side} of {edge} does not commute at element {elem}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MorphismReport {
    pub violations: Vec<MorphismViolation>,
}

impl MorphismReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check that incidence and boundary maps commute with the morphism, on
/// every edge and every edge-group element.
pub fn validate_morphism(m: &GogMorphism) -> MorphismReport {
    let (src, tgt) = (&m.source, &m.target);
    let mut violations = Vec::new();

    for v in src.graph().vertices() {
        let object = ObjectId::Vertex(v);
        let (Some(&w), Some(h)) = (m.vertex_map.get(&v), m.vertex_homs.get(&v)) else {
            violations.push(MorphismViolation::Unmapped { object });
            continue;
        };
        if !tgt.graph().has_vertex(w) {
            violations.push(MorphismViolation::UnknownImage { object });
        } else if !h.domain().same_as(src.vertex_group(v))
            || !h.codomain().same_as(tgt.vertex_group(w))
        {
            violations.push(MorphismViolation::WrongGroups { object });
        }
    }
    if !violations.is_empty() {
        return MorphismReport { violations };
    }

    for e in src.graph().edges() {
        let object = ObjectId::Edge(e.id);
        let (Some(&image), Some(h)) = (m.edge_map.get(&e.id), m.edge_homs.get(&e.id)) else {
            violations.push(MorphismViolation::Unmapped { object });
            continue;
        };
        let target_group = match image {
            EdgeImage::Edge(f) if tgt.graph().edge(f).is_ok() => tgt.edge_group(f),
            EdgeImage::Vertex(w) if tgt.graph().has_vertex(w) => tgt.vertex_group(w),
            _ => {
                violations.push(MorphismViolation::UnknownImage { object });
                continue;
            }
        };
        if !h.domain().same_as(src.edge_group(e.id)) || !h.codomain().same_as(target_group) {
            violations.push(MorphismViolation::WrongGroups { object });
            continue;
        }
        for side in Side::BOTH {
            let end = e.end(side);
            let mapped_end = m.vertex_map[&end];
            let expected_end = match image {
                EdgeImage::Edge(f) => tgt.graph().edge(f).expect("checked").end(side),
                EdgeImage::Vertex(w) => w,
            };
            if mapped_end != expected_end {
                violations.push(MorphismViolation::Incidence {
                    edge: e.id,
                    side: side.index(),
                });
                continue;
            }
            let nu_v = &m.vertex_homs[&end];
            let src_b = src.boundary(e.id, side);
            for x in src.edge_group(e.id).elements() {
                let lhs = nu_v.apply(src_b.apply(x));
                let rhs = match image {
                    EdgeImage::Edge(f) => tgt.boundary(f, side).apply(h.apply(x)),
                    EdgeImage::Vertex(_) => h.apply(x),
                };
                if lhs != rhs {
                    violations.push(MorphismViolation::Boundary {
                        edge: e.id,
                        side: side.index(),
                        elem: x,
                    });
                    break;
                }
            }
        }
    }
    MorphismReport { violations }
}
