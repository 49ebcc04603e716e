//! Checks of the edge-count inequalities, the fixed-vertex partition bound,
//! reduction confluence and decomposition bookkeeping.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::decomp::{index_accounting, induced_gog, DecompError, FibreAccount, InducedDecomposition};
use crate::gog::{euler_characteristic, reduce, GraphOfGroups, ReductionPolicy};
use crate::graph::{graphs_isomorphic, EdgeId, Side, VertexId};
use crate::pgroup::{double_cosets_within, Elem};
use crate::quotient::OpenSubgroupSpec;

#[derive(Debug, Error, Clone)]
pub enum VerifyError {
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error("the graph of groups is not reduced (fictitious edges {0:?})")]
    NotReduced(Vec<EdgeId>),
    #[error("index {index} is not p = {p}")]
    IndexNotP { index: usize, p: u32 },
    #[error("Q ∩ im φ is not normal in im φ")]
    NotNormal,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitationReport {
    pub p: u32,
    pub index: usize,
    pub normal: bool,
    pub v_gamma: usize,
    pub e_gamma: usize,
    pub v_delta0: usize,
    pub e_delta0: usize,
    pub v_delta: usize,
    pub e_delta: usize,
    /// `None` when `Q` is not normal in the image.
    pub holds_lower: Option<bool>,
    pub strict_expected: bool,
    /// `None` unless strictness is expected.
    pub holds_strict: Option<bool>,
    pub holds_upper_edges: bool,
    pub holds_upper_vertices: bool,
    pub holds_upper_total: bool,
    pub euler_multiplicative: bool,
    pub collapsed: Vec<EdgeId>,
}

impl LimitationReport {
    /// Names of every failed hard check.
    pub fn findings(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.holds_lower == Some(false) {
            out.push("lower bound");
        }
        if self.holds_strict == Some(false) {
            out.push("strict inequality");
        }
        if !self.holds_upper_edges {
            out.push("edge upper bound");
        }
        if !self.holds_upper_vertices {
            out.push("vertex upper bound");
        }
        if !self.holds_upper_total {
            out.push("size upper bound");
        }
        if !self.euler_multiplicative {
            out.push("euler characteristic");
        }
        out
    }
}

fn limitation_from(d: &InducedDecomposition) -> LimitationReport {
    let gamma = &d.source;
    let spec = &d.spec;
    let p = gamma.p();
    let reduction = reduce(&d.delta0, ReductionPolicy::Canonical);
    let delta = &reduction.gog;
    let index = spec.index;
    let (vg, eg) = (gamma.vertex_count(), gamma.edge_count());
    let (v0, e0) = (d.delta0.vertex_count(), d.delta0.edge_count());
    let (vd, ed) = (delta.vertex_count(), delta.edge_count());
    let normal = spec.normal_in_image;
    let strict_expected = normal && p > 2 && index > 1 && !graphs_isomorphic(delta.graph(), gamma.graph());
    let index_q = BigRational::from_integer(BigInt::from(index));
    LimitationReport {
        p,
        index,
        normal,
        v_gamma: vg,
        e_gamma: eg,
        v_delta0: v0,
        e_delta0: e0,
        v_delta: vd,
        e_delta: ed,
        holds_lower: normal.then_some(ed >= eg),
        strict_expected,
        holds_strict: strict_expected.then_some(ed > eg),
        holds_upper_edges: e0 <= index * eg,
        holds_upper_vertices: v0 <= index * vg,
        holds_upper_total: v0 + e0 <= index * (vg + eg),
        euler_multiplicative: euler_characteristic(&d.delta0) == index_q * euler_characteristic(gamma),
        collapsed: reduction.collapsed(),
    }
}

/// Decompose, reduce, and compare edge counts.
pub fn check_limitation(spec: &OpenSubgroupSpec) -> Result<LimitationReport, VerifyError> {
    let gamma = spec.phi.gog();
    let fictitious = crate::gog::fictitious_edges(gamma);
    if !fictitious.is_empty() {
        return Err(VerifyError::NotReduced(fictitious));
    }
    let d = induced_gog(spec)?;
    Ok(limitation_from(&d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeClass {
    V1V1,
    V2V2,
    E12,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionReport {
    pub p: u32,
    /// Quotient-graph vertices fixed by `im φ / (Q ∩ im φ)`.
    pub v1: Vec<VertexId>,
    pub v2: Vec<VertexId>,
    pub edge_classes: BTreeMap<EdgeId, EdgeClass>,
    /// `[G(d0 e) : G(e)]` for each mixed edge.
    pub e12_indices: BTreeMap<EdgeId, usize>,
    pub bound: usize,
    pub e_gamma: usize,
    pub e_delta: usize,
    /// Fixedness agrees with singleton fibres.
    pub orbits_consistent: bool,
}

impl PartitionReport {
    pub fn holds(&self) -> bool {
        self.orbits_consistent && self.bound <= self.e_delta && self.bound >= self.e_gamma
    }
}

/// Partition the quotient graph into fixed and moved vertices under the
/// order-`p` quotient `im φ / Q` and bound the reduced edge count.
pub fn partition_diagnostics(spec: &OpenSubgroupSpec) -> Result<PartitionReport, VerifyError> {
    let gamma = spec.phi.gog().clone();
    let p = gamma.p();
    if spec.index != p as usize {
        return Err(VerifyError::IndexNotP { index: spec.index, p });
    }
    if !spec.normal_in_image {
        return Err(VerifyError::NotNormal);
    }
    let d = induced_gog(spec)?;
    let phi = &spec.phi;
    let target = phi.target();
    let image = phi.image();
    let q = &spec.q_image;
    let g = *image.elements().iter().find(|&&x| !q.contains(x)).expect("index p > 1");

    let mut fibre_size: BTreeMap<VertexId, usize> = BTreeMap::new();
    for lv in &d.standard.vertices {
        *fibre_size.entry(lv.over).or_default() += 1;
    }
    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    let mut source_fixed: BTreeMap<VertexId, bool> = BTreeMap::new();
    let mut consistent = true;
    for v in gamma.graph().vertices() {
        let cosets = double_cosets_within(image, q, phi.vmap(v).image()).expect("subgroups of the image");
        let mut coset_of = vec![usize::MAX; target.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &x in &c.elements {
                coset_of[x as usize] = i;
            }
        }
        let lifts: Vec<_> = d.standard.vertices.iter().filter(|lv| lv.over == v).collect();
        let fixed: Vec<bool> = lifts
            .iter()
            .map(|lv| coset_of[target.mul(g, lv.rep) as usize] == coset_of[lv.rep as usize])
            .collect();
        let all_fixed = fixed.iter().all(|&f| f);
        consistent &= fixed.iter().all(|&f| f == all_fixed) && all_fixed == (fibre_size[&v] == 1);
        for (lv, f) in lifts.iter().zip(&fixed) {
            if *f { v1.push(lv.id) } else { v2.push(lv.id) }
        }
        source_fixed.insert(v, all_fixed);
    }

    let mut edge_classes = BTreeMap::new();
    let mut e12_indices = BTreeMap::new();
    let (mut n11, mut n22, mut n12) = (0, 0, 0);
    for e in gamma.graph().edges() {
        let class = match (source_fixed[&e.d0], source_fixed[&e.d1]) {
            (true, true) => {
                n11 += 1;
                EdgeClass::V1V1
            }
            (false, false) => {
                n22 += 1;
                EdgeClass::V2V2
            }
            _ => {
                n12 += 1;
                let b = gamma.boundary(e.id, Side::D0);
                e12_indices.insert(e.id, b.codomain().order() / b.domain().order());
                EdgeClass::E12
            }
        };
        edge_classes.insert(e.id, class);
    }
    let p_us = p as usize;
    let bound = n11 + p_us * n22 + (p_us - 1) * n12;
    let delta = reduce(&d.delta0, ReductionPolicy::Canonical).gog;
    Ok(PartitionReport {
        p,
        v1,
        v2,
        edge_classes,
        e12_indices,
        bound,
        e_gamma: gamma.edge_count(),
        e_delta: delta.edge_count(),
        orbits_consistent: consistent,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionOutcome {
    /// `None` for the canonical order.
    pub seed: Option<u64>,
    pub vertices: usize,
    pub edges: usize,
    pub vertex_orders: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfluenceReport {
    pub outcomes: Vec<ReductionOutcome>,
    pub confluent: bool,
    pub euler_preserved: bool,
}

/// Reduce in canonical order and in `trials` random orders and compare
/// the vertex and edge counts.
pub fn check_reduction_confluence(g: &GraphOfGroups, trials: usize, seed: u64) -> ConfluenceReport {
    let chi = euler_characteristic(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let policies: Vec<(Option<u64>, ReductionPolicy)> = std::iter::once((None, ReductionPolicy::Canonical))
        .chain((0..trials).map(|_| {
            let s: u64 = rng.gen();
            (Some(s), ReductionPolicy::Random(s))
        }))
        .collect();
    let mut euler_preserved = true;
    let outcomes: Vec<ReductionOutcome> = policies
        .into_iter()
        .map(|(seed, policy)| {
            let r = reduce(g, policy);
            euler_preserved &= euler_characteristic(&r.gog) == chi;
            ReductionOutcome {
                seed,
                vertices: r.gog.vertex_count(),
                edges: r.gog.edge_count(),
                vertex_orders: r.gog.vertex_orders(),
            }
        })
        .collect();
    let first = (outcomes[0].vertices, outcomes[0].edges);
    let confluent = outcomes.iter().all(|o| (o.vertices, o.edges) == first);
    ConfluenceReport { outcomes, confluent, euler_preserved }
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub name: String,
    pub e_gamma: usize,
    pub e_delta: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub nondecreasing: bool,
    pub strictly_increasing: bool,
}

/// Edge counts before and after passing to each open subgroup.
pub fn accessibility_growth(series: &[(String, OpenSubgroupSpec)]) -> Result<GrowthTable, VerifyError> {
    let mut rows = Vec::with_capacity(series.len());
    for (name, spec) in series {
        let report = check_limitation(spec)?;
        rows.push(GrowthRow { name: name.clone(), e_gamma: report.e_gamma, e_delta: report.e_delta });
    }
    let nondecreasing = rows.windows(2).all(|w| w[0].e_delta <= w[1].e_delta);
    let strictly_increasing = rows.windows(2).all(|w| w[0].e_delta < w[1].e_delta);
    Ok(GrowthTable { rows, nondecreasing, strictly_increasing })
}

/// Structural checks on a decomposition: connectivity, injective
/// boundaries, the two-sided edge stabilizer description, and orbit
/// counting.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionAudit {
    pub connected: bool,
    pub boundaries_injective: bool,
    pub two_sided: bool,
    pub accounting: Vec<FibreAccount>,
}

impl DecompositionAudit {
    pub fn holds(&self) -> bool {
        self.connected && self.boundaries_injective && self.two_sided && self.accounting.iter().all(|a| a.ok)
    }
}

pub fn audit_decomposition(d: &InducedDecomposition) -> DecompositionAudit {
    let delta0 = &d.delta0;
    let boundaries_injective = delta0
        .graph()
        .edges()
        .all(|e| Side::BOTH.iter().all(|&s| delta0.boundary(e.id, s).is_injective()));
    let phi = &d.spec.phi;
    let target = phi.target();
    let two_sided = d.standard.edges.iter().all(|le| {
        let e = le.over;
        let r1 = target.mul(le.rep, phi.tau(e));
        let grp = d.source.edge_group(e);
        grp.elements().all(|x: Elem| {
            let a = d.spec.q.contains(target.conj(le.rep, phi.edge_image(e, Side::D0, x)));
            let b = d.spec.q.contains(target.conj(r1, phi.edge_image(e, Side::D1, x)));
            a == b && a == d.edge_stabilizers[&le.id].contains(x)
        })
    });
    DecompositionAudit {
        connected: delta0.graph().is_connected(),
        boundaries_injective,
        two_sided,
        accounting: index_accounting(d),
    }
}

/// Everything checked for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceAudit {
    pub limitation: LimitationReport,
    pub decomposition: DecompositionAudit,
    pub partition: Option<PartitionReport>,
}

impl InstanceAudit {
    pub fn findings(&self) -> Vec<&'static str> {
        let mut out = self.limitation.findings();
        if !self.decomposition.holds() {
            out.push("decomposition");
        }
        if self.partition.as_ref().is_some_and(|p| !p.holds()) {
            out.push("partition bound");
        }
        out
    }
}

pub fn audit_instance(spec: &OpenSubgroupSpec) -> Result<InstanceAudit, VerifyError> {
    let gamma = spec.phi.gog();
    let fictitious = crate::gog::fictitious_edges(gamma);
    if !fictitious.is_empty() {
        return Err(VerifyError::NotReduced(fictitious));
    }
    let d = induced_gog(spec)?;
    let limitation = limitation_from(&d);
    let decomposition = audit_decomposition(&d);
    let partition = if spec.normal_in_image && spec.index == gamma.p() as usize {
        Some(partition_diagnostics(spec)?)
    } else {
        None
    };
    Ok(InstanceAudit { limitation, decomposition, partition })
}
