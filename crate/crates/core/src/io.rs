//! JSON instance and quotient files.
//!
//! Emitters are canonical: maps are keyed by numeric id in increasing
//! order, groups keep their constructor records, and the output is pretty
//! printed with a trailing newline, so `emit(parse(emit(x)))` reproduces
//! the bytes of `emit(x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomp::StandardGraph;
use crate::gog::{validate_gog, GogError, GraphOfGroups, ValidationReport};
use crate::graph::{EdgeId, GraphError, OrientedGraph, Side, SpanningTree, VertexId};
use crate::pgroup::{
    group_from_spec_with, Elem, FiniteGroup, GroupError, GroupHom, GroupLimits, GroupSpec, Subgroup,
};
use crate::quotient::{build_quotient_map, OpenSubgroupSpec, QuotientError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{object}: {source}")]
    Group { object: String, source: GroupError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Gog(GogError),
    #[error("{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

impl From<GogError> for IoError {
    fn from(e: GogError) -> Self {
        match e {
            GogError::Invalid(r) => IoError::Invalid(r),
            other => IoError::Gog(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomRecord {
    pub gens: Vec<Elem>,
    pub images: Vec<Elem>,
}

impl HomRecord {
    pub fn of(f: &GroupHom) -> HomRecord {
        let (gens, images) = f.generator_images();
        HomRecord { gens, images }
    }

    fn build(
        &self,
        object: impl Fn() -> String,
        domain: &Arc<FiniteGroup>,
        codomain: &Arc<FiniteGroup>,
    ) -> Result<GroupHom, IoError> {
        GroupHom::from_generator_images(domain.clone(), codomain.clone(), &self.gens, &self.images)
            .map_err(|source| IoError::Group { object: object(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: u32,
    pub d0: u32,
    pub d1: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub vertices: Vec<u32>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRecord {
    pub d0: HomRecord,
    pub d1: HomRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub p: u32,
    pub graph: GraphRecord,
    pub vertex_groups: BTreeMap<u32, GroupSpec>,
    pub edge_groups: BTreeMap<u32, GroupSpec>,
    pub boundaries: BTreeMap<u32, BoundaryRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientFile {
    pub target: GroupSpec,
    pub tree: Vec<u32>,
    pub vertex_maps: BTreeMap<u32, HomRecord>,
    #[serde(default)]
    pub stable_letters: BTreeMap<u32, Elem>,
    /// Generators of `Q`; a full element list is accepted too.
    pub subgroup: Vec<Elem>,
}

fn to_text<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("plain data serializes");
    s.push('\n');
    s
}

fn build_group(
    spec: &GroupSpec,
    object: String,
    limits: &GroupLimits,
) -> Result<Arc<FiniteGroup>, IoError> {
    group_from_spec_with(spec, limits).map_err(|source| IoError::Group { object, source })
}

impl InstanceFile {
    pub fn of(g: &GraphOfGroups) -> InstanceFile {
        let graph = g.graph();
        InstanceFile {
            p: g.p(),
            graph: GraphRecord {
                vertices: graph.vertices().map(|v| v.0).collect(),
                edges: graph
                    .edges()
                    .map(|e| EdgeRecord { id: e.id.0, d0: e.d0.0, d1: e.d1.0 })
                    .collect(),
            },
            vertex_groups: graph.vertices().map(|v| (v.0, g.vertex_group(v).to_spec())).collect(),
            edge_groups: graph.edges().map(|e| (e.id.0, g.edge_group(e.id).to_spec())).collect(),
            boundaries: graph
                .edges()
                .map(|e| {
                    let [b0, b1] = g.boundaries(e.id);
                    (e.id.0, BoundaryRecord { d0: HomRecord::of(b0), d1: HomRecord::of(b1) })
                })
                .collect(),
        }
    }

    /// Build the graph of groups without checking its invariants.
    pub fn assemble(&self, limits: &GroupLimits) -> Result<GraphOfGroups, IoError> {
        let graph = OrientedGraph::new(
            self.graph.vertices.iter().map(|&v| VertexId(v)),
            self.graph.edges.iter().map(|e| crate::graph::Edge::new(e.id, e.d0, e.d1)),
        )?;
        let mut vgroups = BTreeMap::new();
        for (&v, spec) in &self.vertex_groups {
            vgroups.insert(VertexId(v), build_group(spec, format!("vertex v{v}"), limits)?);
        }
        let mut egroups = BTreeMap::new();
        let mut boundaries = BTreeMap::new();
        for (&e, spec) in &self.edge_groups {
            let id = EdgeId(e);
            let ge = build_group(spec, format!("edge e{e}"), limits)?;
            let edge = graph.edge(id)?;
            let Some(rec) = self.boundaries.get(&e) else {
                return Err(GogError::Structure(format!("edge e{e} has no boundary record")).into());
            };
            let mut maps = Vec::with_capacity(2);
            for (side, hr) in [(Side::D0, &rec.d0), (Side::D1, &rec.d1)] {
                let end = edge.end(side);
                let Some(gv) = vgroups.get(&end) else {
                    return Err(GogError::Structure(format!("no group at {end}")).into());
                };
                maps.push(hr.build(|| format!("boundary d{} of e{e}", side.index()), &ge, gv)?);
            }
            let b1 = maps.pop().expect("two maps");
            let b0 = maps.pop().expect("two maps");
            egroups.insert(id, ge);
            boundaries.insert(id, [b0, b1]);
        }
        if self.boundaries.keys().any(|e| !self.edge_groups.contains_key(e)) {
            return Err(GogError::Structure("boundary record for an unknown edge".into()).into());
        }
        Ok(GraphOfGroups::from_parts(self.p, graph, vgroups, egroups, boundaries)?)
    }
}

/// Parse without running [`validate_gog`]; the report is returned alongside.
pub fn parse_instance_unchecked(
    text: &str,
    limits: &GroupLimits,
) -> Result<(GraphOfGroups, ValidationReport), IoError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let g = file.assemble(limits)?;
    let report = validate_gog(&g);
    Ok((g, report))
}

pub fn parse_instance_with(text: &str, limits: &GroupLimits) -> Result<GraphOfGroups, IoError> {
    let (g, report) = parse_instance_unchecked(text, limits)?;
    if report.is_valid() {
        Ok(g)
    } else {
        Err(IoError::Invalid(report))
    }
}

pub fn parse_instance(text: &str) -> Result<GraphOfGroups, IoError> {
    parse_instance_with(text, &GroupLimits::default())
}

pub fn emit_instance(g: &GraphOfGroups) -> String {
    to_text(&InstanceFile::of(g))
}

impl QuotientFile {
    pub fn of(spec: &OpenSubgroupSpec) -> QuotientFile {
        let phi = &spec.phi;
        let g = phi.gog();
        QuotientFile {
            target: phi.target().to_spec(),
            tree: phi.tree().edges().map(|e| e.0).collect(),
            vertex_maps: g.graph().vertices().map(|v| (v.0, HomRecord::of(phi.vmap(v)))).collect(),
            stable_letters: g
                .graph()
                .edges()
                .filter(|e| !phi.tree().contains(e.id))
                .map(|e| (e.id.0, phi.tau(e.id)))
                .collect(),
            subgroup: spec.q.generators().to_vec(),
        }
    }

    /// Build the quotient map and subgroup over `gog`; the tree is rooted
    /// at the smallest vertex id.
    pub fn assemble(&self, gog: Arc<GraphOfGroups>) -> Result<OpenSubgroupSpec, IoError> {
        let target = build_group(&self.target, "target".into(), &GroupLimits::default())?;
        let root = gog
            .graph()
            .vertices()
            .min()
            .ok_or_else(|| GogError::Structure("empty graph".into()))?;
        let tree = SpanningTree::from_edges(gog.graph(), root, self.tree.iter().map(|&e| EdgeId(e)))?;
        let mut vmaps = BTreeMap::new();
        for (&v, rec) in &self.vertex_maps {
            let v = VertexId(v);
            if !gog.graph().has_vertex(v) {
                return Err(GraphError::UnknownVertex(v).into());
            }
            vmaps.insert(v, rec.build(|| format!("vertex map of {v}"), gog.vertex_group(v), &target)?);
        }
        let tau = self.stable_letters.iter().map(|(&e, &t)| (EdgeId(e), t)).collect();
        let phi = build_quotient_map(gog, &tree, target.clone(), vmaps, tau)?;
        let q = Subgroup::generated(target, &self.subgroup)
            .map_err(|source| IoError::Group { object: "subgroup".into(), source })?;
        Ok(OpenSubgroupSpec::new(Arc::new(phi), q)?)
    }
}

pub fn parse_quotient(gog: Arc<GraphOfGroups>, text: &str) -> Result<OpenSubgroupSpec, IoError> {
    let file: QuotientFile = serde_json::from_str(text)?;
    file.assemble(gog)
}

pub fn emit_quotient(spec: &OpenSubgroupSpec) -> String {
    to_text(&QuotientFile::of(spec))
}

#[derive(Serialize)]
struct Annex<'a> {
    vertices: &'a [crate::decomp::LiftedVertex],
    edges: &'a [crate::decomp::LiftedEdge],
    tree_edges: &'a [EdgeId],
}

/// The transversal of a decomposition: which source object and which
/// representative each new object comes from.
pub fn emit_annex(s: &StandardGraph) -> String {
    to_text(&Annex { vertices: &s.vertices, edges: &s.edges, tree_edges: &s.tree_edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::tests::cyclic_amalgam;
    use crate::gog::Violation;

    #[test]
    fn amalgam_round_trip() {
        let g = cyclic_amalgam(2, 4, 2, 2);
        let text = emit_instance(&g);
        let back = parse_instance(&text).unwrap();
        assert_eq!(emit_instance(&back), text);
        assert!(text.ends_with("}\n"));
        assert!(text.contains("\"kind\": \"cyclic\""));
    }

    #[test]
    fn quotient_round_trip() {
        let phi = crate::quotient::tests::cyclic_quotient(3, 3, 1, 1, 3);
        let phi = Arc::new(phi);
        let q = Subgroup::trivial(phi.target().clone());
        let spec = OpenSubgroupSpec::new(phi.clone(), q).unwrap();
        let text = emit_quotient(&spec);
        let back = parse_quotient(phi.gog().clone(), &text).unwrap();
        assert_eq!(back.index, 3);
        assert_eq!(emit_quotient(&back), text);
    }

    #[test]
    fn non_injective_boundary_names_edge() {
        let mut file = InstanceFile::of(&cyclic_amalgam(2, 2, 1, 1));
        file.edge_groups.insert(0, GroupSpec::cyclic(2));
        let rec = HomRecord { gens: vec![1], images: vec![0] };
        file.boundaries.insert(0, BoundaryRecord { d0: rec.clone(), d1: rec });
        let err = parse_instance(&to_text(&file)).unwrap_err();
        let IoError::Invalid(report) = err else { panic!("{err}") };
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonInjectiveBoundary { edge, .. } if *edge == EdgeId(0))));
        assert!(report.to_string().contains("e0"));
    }

    #[test]
    fn wrong_prime_vertex_group() {
        let mut file = InstanceFile::of(&cyclic_amalgam(2, 2, 1, 1));
        file.vertex_groups.insert(1, GroupSpec::cyclic(3));
        file.boundaries.get_mut(&0).unwrap().d1 = HomRecord { gens: vec![], images: vec![] };
        let err = parse_instance(&to_text(&file)).unwrap_err();
        let IoError::Invalid(report) = err else { panic!("{err}") };
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NotPGroup { .. })));
    }

    #[test]
    fn syntax_error_is_positioned() {
        let err = parse_instance("{\n  \"p\": 2,\n  oops\n}").unwrap_err();
        assert!(matches!(err, IoError::Syntax(_)));
        assert!(err.to_string().contains("line 3"));
    }
}
