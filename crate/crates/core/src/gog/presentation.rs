use std::fmt;

use serde::Serialize;

use super::{GogError, GraphOfGroups};
use crate::graph::{EdgeId, Side, SpanningTree, VertexId};
use crate::pgroup::Elem;

/// A generator of the fundamental group presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "symbol", rename_all = "snake_case")]
pub enum Symbol {
    Vgen { vertex: VertexId, elem: Elem },
    Stable { edge: EdgeId },
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Vgen { vertex, elem } => write!(f, "g{}_{}", vertex.0, elem),
            Symbol::Stable { edge } => write!(f, "t{}", edge.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "letter", rename_all = "snake_case")]
pub enum Letter {
    Vgen { vertex: VertexId, elem: Elem },
    Stable { edge: EdgeId, exp: i8 },
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Vgen { vertex, elem } => write!(f, "g{}_{}", vertex.0, elem),
            Letter::Stable { edge, exp: 1 } => write!(f, "t{}", edge.0),
            Letter::Stable { edge, exp } => write!(f, "t{}^{}", edge.0, exp),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RelatorKind {
    /// `x·y·(xy)⁻¹` in a vertex group.
    Cayley { vertex: VertexId },
    /// `t ∂₁(x) t⁻¹ ∂₀(x)⁻¹` for an edge element.
    Edge { edge: EdgeId, elem: Elem },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Relator {
    pub kind: RelatorKind,
    pub word: Word,
}

#[derive(Debug, Clone, Serialize)]
pub struct Presentation {
    pub generators: Vec<Symbol>,
    pub relators: Vec<Relator>,
    pub basepoint: VertexId,
    #[serde(skip)]
    pub tree: SpanningTree,
}

impl Presentation {
    pub fn stable_letters(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.generators.iter().filter_map(|s| match s {
            Symbol::Stable { edge } => Some(*edge),
            Symbol::Vgen { .. } => None,
        })
    }

    pub fn edge_relators(&self) -> impl Iterator<Item = &Relator> + '_ {
        self.relators
            .iter()
            .filter(|r| matches!(r.kind, RelatorKind::Edge { .. }))
    }

    /// Whether every letter of every relator is a listed generator.
    pub fn is_closed(&self) -> bool {
        let known: std::collections::BTreeSet<Symbol> = self.generators.iter().copied().collect();
        self.relators.iter().flat_map(|r| &r.word.0).all(|l| {
            let s = match *l {
                Letter::Vgen { vertex, elem } => Symbol::Vgen { vertex, elem },
                Letter::Stable { edge, .. } => Symbol::Stable { edge },
            };
            known.contains(&s)
        })
    }
}

/// The standard presentation of the fundamental group relative to a
/// spanning tree: vertex group elements as generators, one stable letter
/// per edge off the tree.
pub fn fundamental_presentation(
    g: &GraphOfGroups,
    tree: &SpanningTree,
    basepoint: VertexId,
) -> Result<Presentation, GogError> {
    if !g.graph().has_vertex(basepoint) {
        return Err(crate::graph::GraphError::UnknownVertex(basepoint).into());
    }
    // re-derive against this graph so a tree of some other graph is rejected
    let tree = SpanningTree::from_edges(g.graph(), tree.root(), tree.edges())?;

    let mut generators = Vec::new();
    let mut relators = Vec::new();
    for v in g.graph().vertices() {
        let grp = g.vertex_group(v);
        let e = grp.identity();
        let letter = |x: Elem| Letter::Vgen { vertex: v, elem: x };
        generators.extend(
            grp.elements()
                .filter(|&x| x != e)
                .map(|x| Symbol::Vgen { vertex: v, elem: x }),
        );
        for x in grp.elements().filter(|&x| x != e) {
            for y in grp.elements().filter(|&y| y != e) {
                let xy = grp.mul(x, y);
                let mut word = vec![letter(x), letter(y)];
                if xy != e {
                    word.push(letter(grp.inv(xy)));
                }
                relators.push(Relator {
                    kind: RelatorKind::Cayley { vertex: v },
                    word: Word(word),
                });
            }
        }
    }
    for edge in g.graph().edges() {
        if !tree.contains(edge.id) {
            generators.push(Symbol::Stable { edge: edge.id });
        }
    }
    for edge in g.graph().edges() {
        let stable = !tree.contains(edge.id);
        let grp = g.edge_group(edge.id);
        let b0 = g.boundary(edge.id, Side::D0);
        let b1 = g.boundary(edge.id, Side::D1);
        for x in grp.elements().filter(|&x| x != grp.identity()) {
            let mut word = Vec::with_capacity(4);
            if stable {
                word.push(Letter::Stable {
                    edge: edge.id,
                    exp: 1,
                });
            }
            word.push(Letter::Vgen {
                vertex: edge.d1,
                elem: b1.apply(x),
            });
            if stable {
                word.push(Letter::Stable {
                    edge: edge.id,
                    exp: -1,
                });
            }
            let g0 = g.vertex_group(edge.d0);
            word.push(Letter::Vgen {
                vertex: edge.d0,
                elem: g0.inv(b0.apply(x)),
            });
            relators.push(Relator {
                kind: RelatorKind::Edge {
                    edge: edge.id,
                    elem: x,
                },
                word: Word(word),
            });
        }
    }
    Ok(Presentation {
        generators,
        relators,
        basepoint,
        tree,
    })
}
