//! Finite stages `H_n ≤ K_n ≤ G_n` of the inaccessible chain, their
//! connecting maps, and the chain graphs of groups built from them.
//!
//! Element conventions, with `q = p^n`:
//! - `H_n` is elementary abelian of rank `q`; `h_i` is the `i`-th basis
//!   vector (coordinate 0 most significant).
//! - `K_n = C_p × H_n`; `k_n` generates the first factor.
//! - `G_1 = K_1 × C_p`, the second factor generated by `k_0`.
//! - For `n > 1`, `G_n = N ⋊ ⟨k_{n−1}⟩` with `N` elementary abelian on
//!   `h_0, …, h_{q−1}, k_n`, where `k_{n−1}` fixes every basis vector except
//!   `h_{p^{n−1}} ↦ h_{p^{n−1}} + k_n`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::gog::{EdgeImage, GogError, GogMorphism, GraphOfGroups};
use crate::graph::{Edge, EdgeId, OrientedGraph, VertexId};
use crate::pgroup::{
    group_from_spec_with, is_prime, ActionSpec, Elem, FiniteGroup, GroupError, GroupHom, GroupLimits, GroupSpec,
    Subgroup,
};

#[derive(Debug, Error, Clone)]
pub enum WilkesError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("stage must be at least 1")]
    ZeroStage,
    #[error("chain length must be at least 1")]
    ZeroLength,
    #[error("stage {n} has order {p}^{exponent}, above the cap {cap}")]
    Cap { p: u32, n: u32, exponent: u64, cap: usize },
    #[error("{k} is outside 0..{bound}")]
    Range { k: u64, bound: u64 },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Gog(#[from] GogError),
}

/// `k mod p^n`, for `0 ≤ k < p^{n+1}`.
pub fn mu(n: u32, p: u32, k: u64) -> Result<u64, WilkesError> {
    let pn = (p as u64).pow(n);
    let bound = pn * p as u64;
    if k >= bound {
        return Err(WilkesError::Range { k, bound });
    }
    Ok(k % pn)
}

/// Names of the designated generators inside `G_n`.
#[derive(Debug, Clone, Serialize)]
pub struct StageNames {
    /// `h_0, …, h_{p^n−1}`.
    pub h: Vec<Elem>,
    pub k_n: Elem,
    pub k_prev: Elem,
}

#[derive(Debug, Clone)]
pub struct WilkesStage {
    pub p: u32,
    pub n: u32,
    pub h: Arc<FiniteGroup>,
    pub k: Arc<FiniteGroup>,
    pub g: Arc<FiniteGroup>,
    pub h_prev: Arc<FiniteGroup>,
    pub k_prev: Arc<FiniteGroup>,
    pub incl_h: GroupHom,
    pub incl_k: GroupHom,
    pub incl_kprev: GroupHom,
    /// `G_n → K_{n−1}`.
    pub rho: GroupHom,
    /// `H_n → H_{n−1}`.
    pub eta: GroupHom,
    pub names: StageNames,
}

fn rank(p: u32, n: u32) -> u32 {
    p.pow(n)
}

fn h_spec(p: u32, n: u32) -> GroupSpec {
    GroupSpec::elementary_abelian(p, rank(p, n))
}

fn k_spec(p: u32, n: u32) -> GroupSpec {
    GroupSpec::product(vec![GroupSpec::cyclic(p), h_spec(p, n)])
}

/// Basis vector `i` of an elementary abelian group of rank `k`.
fn basis(p: u32, k: u32, i: u32) -> Elem {
    p.pow(k - 1 - i)
}

/// `G_n` as a constructor record.
pub fn g_spec(p: u32, n: u32) -> GroupSpec {
    if n == 1 {
        return GroupSpec::product(vec![k_spec(p, 1), GroupSpec::cyclic(p)]);
    }
    let q = rank(p, n);
    let dim = q + 1;
    let moved = rank(p, n - 1);
    let gens: Vec<Elem> = (0..dim).map(|i| basis(p, dim, i)).collect();
    let mut images = gens.clone();
    // h_moved ↦ h_moved + k_n, written as a vector sum
    images[moved as usize] = basis(p, dim, moved) + basis(p, dim, q);
    GroupSpec::semidirect(
        GroupSpec::elementary_abelian(p, dim),
        GroupSpec::cyclic(p),
        vec![ActionSpec { by: 1, gens, images }],
    )
}

fn stage_exponent(p: u32, n: u32) -> u64 {
    (p as u64).pow(n) + 2
}

/// Generator names of `K_n`: `(k_n, [h_i])`.
fn k_names(p: u32, n: u32) -> (Elem, Vec<Elem>) {
    let q = rank(p, n);
    let h_order = p.pow(q);
    (h_order, (0..q).map(|i| basis(p, q, i)).collect())
}

fn g_names(p: u32, n: u32) -> StageNames {
    let q = rank(p, n);
    if n == 1 {
        let (k1, hs) = k_names(p, 1);
        return StageNames { h: hs.iter().map(|&h| h * p).collect(), k_n: k1 * p, k_prev: 1 };
    }
    let dim = q + 1;
    StageNames {
        h: (0..q).map(|i| basis(p, dim, i) * p).collect(),
        k_n: basis(p, dim, q) * p,
        k_prev: 1,
    }
}

pub fn build_stage(p: u32, n: u32, limits: &GroupLimits) -> Result<WilkesStage, WilkesError> {
    if !is_prime(p) {
        return Err(WilkesError::NotPrime(p));
    }
    if n == 0 {
        return Err(WilkesError::ZeroStage);
    }
    let exponent = stage_exponent(p, n);
    let fits = u32::try_from(exponent)
        .ok()
        .and_then(|e| (p as usize).checked_pow(e))
        .is_some_and(|order| order <= limits.order_cap);
    if !fits {
        return Err(WilkesError::Cap { p, n, exponent, cap: limits.order_cap });
    }
    let build = |spec: GroupSpec| group_from_spec_with(&spec, limits);
    let h = build(h_spec(p, n))?;
    let k = build(k_spec(p, n))?;
    let h_prev = build(h_spec(p, n - 1))?;
    let k_prev = build(k_spec(p, n - 1))?;
    let g = build(g_spec(p, n))?;
    let names = g_names(p, n);
    let q = rank(p, n);
    let q_prev = rank(p, n - 1);

    let h_basis: Vec<Elem> = (0..q).map(|i| basis(p, q, i)).collect();
    let incl_h = GroupHom::from_generator_images(h.clone(), g.clone(), &h_basis, &names.h)?;

    let (kn, k_hs) = k_names(p, n);
    let mut gens = vec![kn];
    gens.extend(&k_hs);
    let mut imgs = vec![names.k_n];
    imgs.extend(&names.h);
    let incl_k = GroupHom::from_generator_images(k.clone(), g.clone(), &gens, &imgs)?;

    let (kp, kp_hs) = k_names(p, n - 1);
    let mut gens = vec![kp];
    gens.extend(&kp_hs);
    let mut imgs = vec![names.k_prev];
    imgs.extend(&names.h[..q_prev as usize]);
    let incl_kprev = GroupHom::from_generator_images(k_prev.clone(), g.clone(), &gens, &imgs)?;

    let mut gens = vec![names.k_prev, names.k_n];
    gens.extend(&names.h);
    let mut imgs = vec![kp, k_prev.identity()];
    imgs.extend((0..q).map(|i| kp_hs[(i % q_prev) as usize]));
    let rho = GroupHom::from_generator_images(g.clone(), k_prev.clone(), &gens, &imgs)?;

    let hp_basis: Vec<Elem> = (0..q_prev).map(|i| basis(p, q_prev, i)).collect();
    let imgs: Vec<Elem> = (0..q).map(|i| hp_basis[(i % q_prev) as usize]).collect();
    let eta = GroupHom::from_generator_images(h.clone(), h_prev.clone(), &h_basis, &imgs)?;

    Ok(WilkesStage { p, n, h, k, g, h_prev, k_prev, incl_h, incl_k, incl_kprev, rho, eta, names })
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub p: u32,
    pub n: u32,
    pub order_h: usize,
    pub order_k: usize,
    pub order_g: usize,
    pub expected_exponent: u64,
    pub checks: Vec<(String, bool)>,
}

impl StageReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Check every defining relation and every map property of a stage.
pub fn verify_stage(s: &WilkesStage) -> StageReport {
    let g = &s.g;
    let p = s.p;
    let names = &s.names;
    let e = g.identity();
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut check = |name: &str, ok: bool| checks.push((name.to_string(), ok));

    let exponent = stage_exponent(p, s.n);
    check("order", g.order() as u128 == (p as u128).pow(exponent as u32));
    check("order of H", s.h.order() as u128 == (p as u128).pow(rank(p, s.n)));
    check("order of K", s.k.order() as u128 == (p as u128).pow(rank(p, s.n) + 1));

    let mut gens = vec![names.k_prev, names.k_n];
    gens.extend(&names.h);
    check("generator orders", gens.iter().all(|&x| g.pow(x, p as u64) == e && x != e));
    let hs = &names.h;
    check(
        "h commute",
        hs.iter().all(|&a| hs.iter().all(|&b| g.mul(a, b) == g.mul(b, a))),
    );
    if s.n == 1 {
        check("abelian", g.is_abelian());
    } else {
        let moved = rank(p, s.n - 1) as usize;
        check(
            "k_prev commutes with h_i, i != p^(n-1)",
            hs.iter()
                .enumerate()
                .filter(|&(i, _)| i != moved)
                .all(|(_, &h)| g.mul(names.k_prev, h) == g.mul(h, names.k_prev)),
        );
        check("[k_prev, h_moved] = k_n", g.commutator(names.k_prev, hs[moved]) == names.k_n);
        check(
            "k_n central",
            gens.iter().all(|&x| g.mul(names.k_n, x) == g.mul(x, names.k_n)),
        );
    }
    let generated = Subgroup::generated(g.clone(), &gens).map(|sg| sg.order() == g.order());
    check("generation", generated.unwrap_or(false));

    check("incl_H injective", s.incl_h.is_injective());
    check("incl_K injective", s.incl_k.is_injective());
    check("incl_Kprev injective", s.incl_kprev.is_injective());
    check(
        "rho retracts incl_Kprev",
        s.k_prev.elements().all(|x| s.rho.apply(s.incl_kprev.apply(x)) == x),
    );
    let (kp, kp_hs) = k_names(p, s.n - 1);
    let q_prev = rank(p, s.n - 1);
    let hp_basis: Vec<Elem> = (0..q_prev).map(|i| basis(p, q_prev, i)).collect();
    let h_into_k = GroupHom::from_generator_images(s.h_prev.clone(), s.k_prev.clone(), &hp_basis, &kp_hs);
    let square = h_into_k.is_ok_and(|hk| s.h.elements().all(|x| s.rho.apply(s.incl_h.apply(x)) == hk.apply(s.eta.apply(x))));
    check("rho/eta square commutes", square);
    check("rho kills k_n", s.rho.apply(names.k_n) == s.k_prev.identity());
    check("rho fixes k_prev", s.rho.apply(names.k_prev) == kp);

    StageReport {
        p,
        n: s.n,
        order_h: s.h.order(),
        order_k: s.k.order(),
        order_g: g.order(),
        expected_exponent: exponent,
        checks,
    }
}

/// Build stages `1..=m`.
pub fn build_stages(p: u32, m: u32, limits: &GroupLimits) -> Result<Vec<WilkesStage>, WilkesError> {
    (1..=m).map(|n| build_stage(p, n, limits)).collect()
}

/// The path `G_1 — K_1 → G_2 — … → G_m`: vertex `i` carries `G_i`, edge `i`
/// joins vertex `i` to `i + 1` and carries `K_i`.
pub fn build_chain_gog(p: u32, m: u32, limits: &GroupLimits) -> Result<GraphOfGroups, WilkesError> {
    if m == 0 {
        return Err(WilkesError::ZeroLength);
    }
    let stages = build_stages(p, m, limits)?;
    chain_from_stages(p, &stages)
}

fn chain_from_stages(p: u32, stages: &[WilkesStage]) -> Result<GraphOfGroups, WilkesError> {
    let m = stages.len() as u32;
    let graph = OrientedGraph::new((1..=m).map(VertexId), (1..m).map(|i| Edge::new(i, i, i + 1)))
        .map_err(GogError::from)?;
    let vgroups = stages.iter().map(|s| (VertexId(s.n), s.g.clone())).collect();
    let mut egroups = BTreeMap::new();
    let mut boundaries = BTreeMap::new();
    for i in 1..m as usize {
        let (lower, upper) = (&stages[i - 1], &stages[i]);
        let k = lower.k.clone();
        let b1 = GroupHom::from_trusted_map(k.clone(), upper.g.clone(), upper.incl_kprev.map().to_vec());
        egroups.insert(EdgeId(i as u32), k);
        boundaries.insert(EdgeId(i as u32), [lower.incl_k.clone(), b1]);
    }
    Ok(GraphOfGroups::new(p, graph, vgroups, egroups, boundaries)?)
}

/// The morphism from the chain of length `m + 1` onto the chain of length
/// `m` that collapses the last edge onto vertex `m` through `ρ_{m+1}`.
pub fn chain_retraction_morphism(p: u32, m: u32, limits: &GroupLimits) -> Result<GogMorphism, WilkesError> {
    if m == 0 {
        return Err(WilkesError::ZeroLength);
    }
    let stages = build_stages(p, m + 1, limits)?;
    let source = Arc::new(chain_from_stages(p, &stages)?);
    let target = Arc::new(chain_from_stages(p, &stages[..m as usize])?);

    let mut vertex_map = BTreeMap::new();
    let mut vertex_homs = BTreeMap::new();
    for i in 1..=m {
        let v = VertexId(i);
        vertex_map.insert(v, v);
        vertex_homs.insert(v, GroupHom::identity(target.vertex_group(v).clone()));
    }
    let last = &stages[m as usize];
    let prev = &stages[m as usize - 1];
    let top = VertexId(m);
    vertex_map.insert(VertexId(m + 1), top);
    let collapse = GroupHom::from_trusted_map(
        source.vertex_group(VertexId(m + 1)).clone(),
        target.vertex_group(top).clone(),
        last.rho.map().iter().map(|&x| prev.incl_k.apply(x)).collect(),
    );
    vertex_homs.insert(VertexId(m + 1), collapse);

    let mut edge_map = BTreeMap::new();
    let mut edge_homs = BTreeMap::new();
    for i in 1..m {
        let e = EdgeId(i);
        edge_map.insert(e, EdgeImage::Edge(e));
        edge_homs.insert(e, GroupHom::identity(target.edge_group(e).clone()));
    }
    let last_edge = EdgeId(m);
    edge_map.insert(last_edge, EdgeImage::Vertex(top));
    edge_homs.insert(
        last_edge,
        GroupHom::from_trusted_map(
            source.edge_group(last_edge).clone(),
            target.vertex_group(top).clone(),
            prev.incl_k.map().to_vec(),
        ),
    );
    Ok(GogMorphism { source, target, vertex_map, edge_map, vertex_homs, edge_homs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gog::{fictitious_edges, validate_gog, validate_morphism};

    fn limits() -> GroupLimits {
        GroupLimits::default()
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mu(1, 2, 3).unwrap(), 1);
        assert_eq!(mu(3, 2, 8).unwrap(), 0);
        assert!(matches!(mu(2, 2, 8), Err(WilkesError::Range { k: 8, bound: 8 })));
        for k in 0..4 {
            assert_eq!(mu(2, 2, k).unwrap(), k);
        }
        assert!(mu(1, 2, 4).is_err());
    }

    #[test]
    fn first_stage() {
        let s = build_stage(2, 1, &limits()).unwrap();
        assert_eq!(s.g.order(), 16);
        assert!(s.g.is_abelian());
        let report = verify_stage(&s);
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn second_stage() {
        let s = build_stage(2, 2, &limits()).unwrap();
        assert_eq!(s.g.order(), 64);
        let report = verify_stage(&s);
        assert!(report.passed(), "{:?}", report.checks);
        let n = &s.names;
        assert_eq!(s.g.commutator(n.k_prev, n.h[2]), n.k_n);
        // ρ₂(h₃) = h₁, ρ₂(k₂) = 1, ρ₂(k₁) = k₁ inside K₁
        let (k1, k1_hs) = k_names(2, 1);
        assert_eq!(s.rho.apply(n.h[3]), k1_hs[1]);
        assert_eq!(s.rho.apply(n.k_n), s.k_prev.identity());
        assert_eq!(s.rho.apply(n.k_prev), k1);
    }

    #[test]
    fn odd_prime_first_stage() {
        let s = build_stage(3, 1, &limits()).unwrap();
        assert_eq!(s.g.order(), 243);
        assert!(verify_stage(&s).passed());
        assert!(matches!(build_stage(3, 2, &limits()), Err(WilkesError::Cap { .. })));
    }

    #[test]
    fn chain_shapes() {
        let c1 = build_chain_gog(2, 1, &limits()).unwrap();
        assert_eq!((c1.vertex_count(), c1.edge_count()), (1, 0));
        let c2 = build_chain_gog(2, 2, &limits()).unwrap();
        assert!(validate_gog(&c2).is_valid());
        assert_eq!(c2.vertex_orders(), vec![16, 64]);
        assert_eq!(c2.edge_orders(), vec![8]);
        let e = EdgeId(1);
        let b = c2.boundaries(e);
        assert_eq!(b[0].codomain().order() / b[0].image().order(), 2);
        assert_eq!(b[1].codomain().order() / b[1].image().order(), 8);
        assert!(fictitious_edges(&c2).is_empty());
        let c3 = build_chain_gog(2, 3, &limits()).unwrap();
        assert_eq!(c3.edge_count(), 2);
        assert!(fictitious_edges(&c3).is_empty());
    }

    #[test]
    fn retractions() {
        for m in 1..=2 {
            let r = chain_retraction_morphism(2, m, &limits()).unwrap();
            let report = validate_morphism(&r);
            assert!(report.is_valid(), "m = {m}: {:?}", report.violations);
        }
        assert!(matches!(chain_retraction_morphism(2, 0, &limits()), Err(WilkesError::ZeroLength)));
    }

    #[test]
    fn broken_retraction_is_caught() {
        let mut r = chain_retraction_morphism(2, 1, &limits()).unwrap();
        let top = VertexId(1);
        let g1 = r.target.vertex_group(top).clone();
        let g2 = r.source.vertex_group(VertexId(2)).clone();
        r.vertex_homs.insert(VertexId(2), GroupHom::trivial(g2, g1));
        assert!(!validate_morphism(&r).is_valid());
    }
}
