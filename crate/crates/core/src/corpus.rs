//! Seeded random instances: a reduced graph of small p-groups, a
//! compatible map onto a small p-group, and a normal subgroup of its image.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::gog::{fictitious_edges, GraphOfGroups};
use crate::graph::{spanning_tree, Edge, OrientedGraph, VertexId};
use crate::pgroup::{group_from_spec, ActionSpec, Elem, FiniteGroup, GroupHom, GroupSpec, Subgroup};
use crate::quotient::{build_quotient_map, OpenSubgroupSpec};

pub const MAX_VERTICES: usize = 6;
pub const MAX_INDEX: usize = 9;

#[derive(Debug, Clone)]
pub struct CorpusInstance {
    pub index: usize,
    pub seed: u64,
    pub spec: OpenSubgroupSpec,
}

impl CorpusInstance {
    pub fn gog(&self) -> &Arc<GraphOfGroups> {
        self.spec.phi.gog()
    }

    pub fn p(&self) -> u32 {
        self.gog().p()
    }
}

/// The quaternion group `{±1, ±i, ±j, ±k}` as a table; element `2u + s`
/// is unit `u` (1, i, j, k) with sign `s` (0 for +).
pub fn quaternion_spec() -> GroupSpec {
    // unit products: (sign, unit)
    const UNIT: [[(u32, u32); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let table = (0..8u32)
        .map(|a| {
            (0..8u32)
                .map(|b| {
                    let (s, u) = UNIT[(a / 2) as usize][(b / 2) as usize];
                    2 * u + ((s + a % 2 + b % 2) % 2)
                })
                .collect()
        })
        .collect();
    GroupSpec::Table { table }
}

pub fn dihedral8_spec() -> GroupSpec {
    GroupSpec::semidirect(
        GroupSpec::cyclic(4),
        GroupSpec::cyclic(2),
        vec![ActionSpec { by: 1, gens: vec![1], images: vec![3] }],
    )
}

pub fn heisenberg27_spec() -> GroupSpec {
    GroupSpec::semidirect(
        GroupSpec::elementary_abelian(3, 2),
        GroupSpec::cyclic(3),
        vec![ActionSpec { by: 1, gens: vec![3, 1], images: vec![4, 1] }],
    )
}

fn vertex_library(p: u32) -> Vec<GroupSpec> {
    use GroupSpec as S;
    match p {
        2 => vec![
            S::cyclic(2),
            S::cyclic(4),
            S::cyclic(8),
            S::elementary_abelian(2, 2),
            S::product(vec![S::cyclic(4), S::cyclic(2)]),
            dihedral8_spec(),
            quaternion_spec(),
            S::elementary_abelian(2, 3),
            S::product(vec![S::cyclic(4), S::cyclic(4)]),
            S::product(vec![dihedral8_spec(), S::cyclic(2)]),
            S::cyclic(16),
            S::product(vec![S::cyclic(8), S::cyclic(2), S::cyclic(2)]),
        ],
        _ => vec![
            S::cyclic(3),
            S::cyclic(9),
            S::elementary_abelian(3, 2),
            S::cyclic(27),
            S::product(vec![S::cyclic(9), S::cyclic(3)]),
            heisenberg27_spec(),
        ],
    }
}

fn target_library(p: u32) -> Vec<GroupSpec> {
    use GroupSpec as S;
    match p {
        2 => vec![
            S::cyclic(2),
            S::cyclic(4),
            S::elementary_abelian(2, 2),
            S::cyclic(8),
            dihedral8_spec(),
            quaternion_spec(),
            S::product(vec![S::cyclic(4), S::cyclic(2)]),
            S::elementary_abelian(2, 3),
        ],
        _ => vec![S::cyclic(3), S::cyclic(9), S::elementary_abelian(3, 2)],
    }
}

fn random_hom(rng: &mut ChaCha8Rng, g: &Arc<FiniteGroup>, target: &Arc<FiniteGroup>) -> GroupHom {
    let gens = g.generators().to_vec();
    for _ in 0..40 {
        let images: Vec<Elem> = gens.iter().map(|_| rng.gen_range(0..target.order() as Elem)).collect();
        if let Ok(f) = GroupHom::from_generator_images(g.clone(), target.clone(), &gens, &images) {
            return f;
        }
    }
    GroupHom::trivial(g.clone(), target.clone())
}

/// An injective `f: A → G(d1)` with `t·φ₁(f(a))·t⁻¹ = φ₀(a)`, by random
/// search over generator images.
fn compatible_embedding(
    rng: &mut ChaCha8Rng,
    a: &Arc<FiniteGroup>,
    phi0_on_a: &[Elem],
    g1: &Arc<FiniteGroup>,
    phi1: &GroupHom,
    t: Elem,
    target: &Arc<FiniteGroup>,
) -> Option<GroupHom> {
    let gens = a.generators().to_vec();
    let t_inv = target.inv(t);
    let candidates: Vec<Vec<Elem>> = gens
        .iter()
        .map(|&x| {
            let want = target.mul(target.mul(t_inv, phi0_on_a[x as usize]), t);
            let ord = a.element_order(x);
            g1.elements().filter(|&y| phi1.apply(y) == want && g1.element_order(y) == ord).collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    for _ in 0..60 {
        let images: Vec<Elem> = candidates.iter().map(|c| *c.choose(rng).expect("non-empty")).collect();
        if let Ok(f) = GroupHom::from_generator_images(a.clone(), g1.clone(), &gens, &images) {
            if f.is_injective() {
                return Some(f);
            }
        }
    }
    None
}

/// All subgroups of `image` generated by at most two elements, plus `image`.
fn small_subgroups(image: &Subgroup) -> Vec<Subgroup> {
    let parent = image.parent();
    let mut out: Vec<Subgroup> = vec![image.clone()];
    let elems = image.elements();
    for (i, &x) in elems.iter().enumerate() {
        for &y in &elems[i..] {
            let s = Subgroup::generated(parent.clone(), &[x, y]).expect("elements in range");
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

struct Attempt {
    spec: OpenSubgroupSpec,
}

fn try_instance(rng: &mut ChaCha8Rng, p: u32) -> Option<Attempt> {
    let vlib = vertex_library(p);
    let tlib = target_library(p);
    let target = group_from_spec(tlib.choose(rng)?).ok()?;
    let nv = rng.gen_range(1..=MAX_VERTICES) as u32;

    let mut vgroups = BTreeMap::new();
    let mut vmaps = BTreeMap::new();
    for v in 0..nv {
        let g = group_from_spec(vlib.choose(rng)?).ok()?;
        let f = random_hom(rng, &g, &target);
        vgroups.insert(VertexId(v), g);
        vmaps.insert(VertexId(v), f);
    }

    // random spanning tree, then extra edges and loops
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for v in 1..nv {
        let u = rng.gen_range(0..v);
        edges.push(if rng.gen_bool(0.5) { (u, v) } else { (v, u) });
    }
    let extra = rng.gen_range(0..=2);
    for _ in 0..extra {
        edges.push((rng.gen_range(0..nv), rng.gen_range(0..nv)));
    }
    if edges.is_empty() {
        edges.push((0, 0));
    }
    let graph = OrientedGraph::new(
        (0..nv).map(VertexId),
        edges.iter().enumerate().map(|(i, &(a, b))| Edge::new(i as u32, a, b)),
    )
    .ok()?;
    let tree = spanning_tree(&graph, VertexId(0)).ok()?;

    let mut tau = BTreeMap::new();
    let mut egroups = BTreeMap::new();
    let mut boundaries = BTreeMap::new();
    for edge in graph.edges() {
        let t = if tree.contains(edge.id) { target.identity() } else { rng.gen_range(0..target.order() as Elem) };
        let g0 = &vgroups[&edge.d0];
        let g1 = &vgroups[&edge.d1];
        let (phi0, phi1) = (&vmaps[&edge.d0], &vmaps[&edge.d1]);
        let mut found = None;
        for _ in 0..12 {
            let k = rng.gen_range(0..=2);
            let gens: Vec<Elem> = (0..k).map(|_| rng.gen_range(0..g0.order() as Elem)).collect();
            let a = Subgroup::generated(g0.clone(), &gens).ok()?;
            if !edge.is_loop() && (a.order() == g0.order() || a.order() >= g1.order()) {
                continue;
            }
            let (a_group, incl) = a.to_group().ok()?;
            let phi0_on_a: Vec<Elem> = a.elements().iter().map(|&x| phi0.apply(x)).collect();
            if let Some(f) = compatible_embedding(rng, &a_group, &phi0_on_a, g1, phi1, t, &target) {
                found = Some((a_group, incl, f));
                break;
            }
        }
        let (a_group, incl, f) = match found {
            Some(x) => x,
            None => {
                // the trivial edge group always fits
                let one = group_from_spec(&GroupSpec::cyclic(1)).ok()?;
                let b0 = GroupHom::trivial(one.clone(), g0.clone());
                let b1 = GroupHom::trivial(one.clone(), g1.clone());
                (one, b0, b1)
            }
        };
        tau.insert(edge.id, t);
        egroups.insert(edge.id, a_group);
        boundaries.insert(edge.id, [incl, f]);
    }
    let gog = GraphOfGroups::new(p, graph, vgroups, egroups, boundaries).ok()?;
    if !fictitious_edges(&gog).is_empty() {
        return None;
    }
    let gog = Arc::new(gog);
    let phi = Arc::new(build_quotient_map(gog, &tree, target, vmaps, tau).ok()?);

    let mut normal: Vec<Subgroup> = small_subgroups(phi.image())
        .into_iter()
        .filter(|q| q.is_normal_in(phi.image()).unwrap_or(false) && phi.image().order() / q.order() <= MAX_INDEX)
        .collect();
    normal.sort_by_key(|q| q.elements().to_vec());
    let proper: Vec<Subgroup> = normal.iter().filter(|q| q.order() < phi.image().order()).cloned().collect();
    let q = if !proper.is_empty() && rng.gen_bool(0.9) { proper.choose(rng)? } else { normal.choose(rng)? };
    let spec = OpenSubgroupSpec::new(phi, q.clone()).ok()?;
    Some(Attempt { spec })
}

/// Seed of instance `index` of a corpus.
pub fn instance_seed(corpus_seed: u64, index: usize) -> u64 {
    corpus_seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One instance; `p` alternates between 2 and 3 with the index.
pub fn generate_instance(corpus_seed: u64, index: usize) -> CorpusInstance {
    let seed = instance_seed(corpus_seed, index);
    let p = if index.is_multiple_of(2) { 2 } else { 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(a) = try_instance(&mut rng, p) {
            return CorpusInstance { index, seed, spec: a.spec };
        }
    }
}

/// `count` instances, generated in parallel, in index order.
pub fn generate_corpus(count: usize, seed: u64) -> Vec<CorpusInstance> {
    (0..count).into_par_iter().map(|i| generate_instance(seed, i)).collect()
}
