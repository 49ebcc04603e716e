use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{fictitious_edges, GogError, GraphOfGroups};
use crate::graph::{Edge, EdgeId, OrientedGraph, Side, VertexId};
use crate::pgroup::{Elem, GroupHom};

/// Which fictitious edge to collapse next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionPolicy {
    /// Always the lowest edge id.
    Canonical,
    /// Uniformly at random, from a seeded generator.
    Random(u64),
}

/// One collapse: `edge` was removed and `absorbed` merged into `survivor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Merge {
    pub edge: EdgeId,
    pub absorbed: VertexId,
    pub survivor: VertexId,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub gog: GraphOfGroups,
    pub merges: Vec<Merge>,
}

impl Reduction {
    /// Collapsed edge ids in collapse order.
    pub fn collapsed(&self) -> Vec<EdgeId> {
        self.merges.iter().map(|m| m.edge).collect()
    }

    /// Where each vertex of the input ended up.
    pub fn vertex_fate(&self, original: &OrientedGraph) -> BTreeMap<VertexId, VertexId> {
        let step: BTreeMap<VertexId, VertexId> = self
            .merges
            .iter()
            .map(|m| (m.absorbed, m.survivor))
            .collect();
        original
            .vertices()
            .map(|v| {
                let mut w = v;
                while let Some(&next) = step.get(&w) {
                    w = next;
                }
                (v, w)
            })
            .collect()
    }
}

fn inverse_map(iso: &GroupHom) -> Vec<Elem> {
    let mut inv = vec![0; iso.codomain().order()];
    for x in iso.domain().elements() {
        inv[iso.apply(x) as usize] = x;
    }
    inv
}

/// Collapse a fictitious edge, merging its ends.
///
/// If `∂₀` is an isomorphism the `d0` end is absorbed into the `d1` end
/// through `∂₁∘∂₀⁻¹`; otherwise the `d1` end is absorbed into the `d0` end
/// through `∂₀∘∂₁⁻¹`. The surviving vertex keeps its id.
pub fn collapse_edge_logged(
    g: &GraphOfGroups,
    e: EdgeId,
) -> Result<(GraphOfGroups, Merge), GogError> {
    let edge = *g.edge(e)?;
    if edge.is_loop() {
        return Err(GogError::LoopEdge(e));
    }
    let [b0, b1] = g.boundaries(e);
    let (absorbed, survivor, iso, other) = if b0.is_isomorphism() {
        (edge.d0, edge.d1, b0, b1)
    } else if b1.is_isomorphism() {
        (edge.d1, edge.d0, b1, b0)
    } else {
        return Err(GogError::NotFictitious(e));
    };
    let embed_map: Vec<Elem> = inverse_map(iso)
        .into_iter()
        .map(|x| other.apply(x))
        .collect();
    let embed = GroupHom::from_trusted_map(
        g.vertex_group(absorbed).clone(),
        g.vertex_group(survivor).clone(),
        embed_map,
    );

    let (p, graph, mut vgroups, mut egroups, mut boundaries) = g.clone().into_parts();
    vgroups.remove(&absorbed);
    egroups.remove(&e);
    boundaries.remove(&e);
    let rename = |v: VertexId| if v == absorbed { survivor } else { v };
    let edges: Vec<Edge> = graph
        .edges()
        .filter(|f| f.id != e)
        .map(|f| Edge {
            id: f.id,
            d0: rename(f.d0),
            d1: rename(f.d1),
        })
        .collect();
    for f in graph.edges().filter(|f| f.id != e) {
        for side in Side::BOTH {
            if f.end(side) == absorbed {
                let slot =
                    &mut boundaries.get_mut(&f.id).expect("edge has boundaries")[side.index()];
                *slot = slot.then(&embed)?;
            }
        }
    }
    let graph = OrientedGraph::new(graph.vertices().filter(|&v| v != absorbed), edges)?;
    let out = GraphOfGroups::from_parts(p, graph, vgroups, egroups, boundaries)?;
    Ok((
        out,
        Merge {
            edge: e,
            absorbed,
            survivor,
        },
    ))
}

pub fn collapse_edge(g: &GraphOfGroups, e: EdgeId) -> Result<GraphOfGroups, GogError> {
    collapse_edge_logged(g, e).map(|(out, _)| out)
}

/// Collapse fictitious edges until none remain.
pub fn reduce(g: &GraphOfGroups, policy: ReductionPolicy) -> Reduction {
    let mut rng = match policy {
        ReductionPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        ReductionPolicy::Canonical => None,
    };
    let mut current = g.clone();
    let mut merges = Vec::new();
    loop {
        let candidates = fictitious_edges(&current);
        let pick = match rng.as_mut() {
            None => candidates.first().copied(),
            Some(rng) => candidates.choose(rng).copied(),
        };
        let Some(e) = pick else { break };
        let (next, merge) = collapse_edge_logged(&current, e).expect("fictitious edges collapse");
        merges.push(merge);
        current = next;
    }
    Reduction {
        gog: current,
        merges,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::gog::tests::{cyc, cyclic_amalgam, graph, hom};
    use crate::gog::{amalgam_gog, euler_characteristic, trivial_gog, validate_gog};
    use crate::graph::free_rank;

    #[test]
    fn absorbs_the_iso_side() {
        let (c2, c4, e) = (cyc(2), cyc(4), cyc(2));
        let g = amalgam_gog(
            2,
            c2.clone(),
            c4.clone(),
            e.clone(),
            hom(&e, &c2, &[1], &[1]),
            hom(&e, &c4, &[1], &[2]),
        )
        .unwrap();
        let (out, merge) = collapse_edge_logged(&g, EdgeId(0)).unwrap();
        assert_eq!(
            merge,
            Merge {
                edge: EdgeId(0),
                absorbed: VertexId(0),
                survivor: VertexId(1)
            }
        );
        assert_eq!(out.vertex_count(), 1);
        assert_eq!(out.edge_count(), 0);
        assert_eq!(out.vertex_group(VertexId(1)).order(), 4);
        assert_eq!(euler_characteristic(&out), euler_characteristic(&g));
    }

    #[test]
    fn both_iso_keeps_d1() {
        let g = cyclic_amalgam(2, 2, 2, 1);
        let (out, merge) = collapse_edge_logged(&g, EdgeId(0)).unwrap();
        assert_eq!(merge.survivor, VertexId(1));
        assert_eq!(
            out.graph().vertices().collect::<Vec<_>>(),
            vec![VertexId(1)]
        );
    }

    #[test]
    fn rejects_loops_and_proper_edges() {
        let g = cyclic_amalgam(2, 4, 2, 2);
        assert!(matches!(
            collapse_edge(&g, EdgeId(0)),
            Err(GogError::NotFictitious(_))
        ));
        let t = trivial_gog(2, graph(1, &[(0, 0)])).unwrap();
        assert!(matches!(
            collapse_edge(&t, EdgeId(0)),
            Err(GogError::LoopEdge(_))
        ));
    }

    #[test]
    fn parallel_edges_become_a_loop() {
        let g = trivial_gog(2, graph(2, &[(0, 1), (0, 1)])).unwrap();
        let out = collapse_edge(&g, EdgeId(0)).unwrap();
        assert_eq!((out.vertex_count(), out.edge_count()), (1, 1));
        assert!(out.graph().edges().next().unwrap().is_loop());
        assert_eq!(
            free_rank(out.graph()).unwrap(),
            free_rank(g.graph()).unwrap()
        );

        let r = reduce(&g, ReductionPolicy::Canonical);
        assert_eq!(r.collapsed(), vec![EdgeId(0)]);
        assert_eq!(r.gog.edge_count(), 1);
    }

    #[test]
    fn theta_becomes_two_loops() {
        let g = trivial_gog(2, graph(2, &[(0, 1), (0, 1), (0, 1)])).unwrap();
        let out = collapse_edge(&g, EdgeId(1)).unwrap();
        assert_eq!((out.vertex_count(), out.edge_count()), (1, 2));
        assert_eq!(free_rank(out.graph()).unwrap(), 2);
    }

    #[test]
    fn recomposes_boundaries_at_absorbed_end() {
        // v0 = C2 --e0 (C2, iso at d0)--> v1 = C4, plus loop e1 at v0 with C2 ≅ C2
        let (c2, c4, k) = (cyc(2), cyc(4), cyc(2));
        let g = GraphOfGroups::new(
            2,
            graph(2, &[(0, 1), (0, 0)]),
            BTreeMap::from([(VertexId(0), c2.clone()), (VertexId(1), c4.clone())]),
            BTreeMap::from([(EdgeId(0), k.clone()), (EdgeId(1), k.clone())]),
            BTreeMap::from([
                (
                    EdgeId(0),
                    [hom(&k, &c2, &[1], &[1]), hom(&k, &c4, &[1], &[2])],
                ),
                (
                    EdgeId(1),
                    [hom(&k, &c2, &[1], &[1]), hom(&k, &c2, &[1], &[1])],
                ),
            ]),
        )
        .unwrap();
        let out = collapse_edge(&g, EdgeId(0)).unwrap();
        assert!(validate_gog(&out).is_valid());
        let loop_edge = out.edge(EdgeId(1)).unwrap();
        assert_eq!((loop_edge.d0, loop_edge.d1), (VertexId(1), VertexId(1)));
        for side in Side::BOTH {
            let b = out.boundary(EdgeId(1), side);
            assert!(Arc::ptr_eq(b.codomain(), &c4));
            assert_eq!(b.map(), &[0, 2]);
        }
        assert!(out.is_reduced());
    }

    #[test]
    fn reduced_input_is_fixed() {
        let g = cyclic_amalgam(2, 4, 2, 2);
        let r = reduce(&g, ReductionPolicy::Random(7));
        assert!(r.merges.is_empty());
        assert_eq!(r.gog.edge_count(), 1);
    }

    #[test]
    fn random_policy_is_seeded() {
        let g = trivial_gog(2, graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])).unwrap();
        let a = reduce(&g, ReductionPolicy::Random(11));
        let b = reduce(&g, ReductionPolicy::Random(11));
        assert_eq!(a.merges, b.merges);
        assert_eq!(a.gog.vertex_count(), 1);
        assert_eq!(a.gog.edge_count(), 2);
        let fate = a.vertex_fate(g.graph());
        let survivor = a.gog.graph().vertices().next().unwrap();
        assert!(fate.values().all(|&v| v == survivor));
    }
}
