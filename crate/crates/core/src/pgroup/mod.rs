//! Finite groups over enumerated elements.
//!
//! Every group has elements `0..order`. Small groups keep a dense Cayley
//! table; constructor-built groups above [`DENSE_TABLE_LIMIT`] keep their
//! structure (product or semidirect law) and multiply on demand. Element
//! enumerations are fixed per constructor so that files and reports are
//! byte-stable:
//!
//! * `cyclic(n)`: residues `0..n` under addition;
//! * `elementary_abelian(p, k)`: vectors in lexicographic order, coordinate 0
//!   most significant, so basis vector `i` has index `p^(k-1-i)`;
//! * `product` and `semidirect`: tuples in lexicographic order, first
//!   component most significant.

mod hom;
mod subgroup;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hom::{hom_from_generator_images, preimage_subgroup, GroupHom};
pub use subgroup::{
    double_cosets, double_cosets_within, is_normal, subgroup_generated, DoubleCoset, Subgroup,
};

/// Index of a group element.
pub type Elem = u32;

pub const DEFAULT_ORDER_CAP: usize = 4096;

/// Groups up to this order store a dense Cayley table.
pub const DENSE_TABLE_LIMIT: usize = 4096;

const EXHAUSTIVE_ASSOC_LIMIT: usize = 256;
const ASSOC_SAMPLES: usize = 100_000;
const ASSOC_SEED: u64 = 0x5eed_a550c;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),
    #[error("multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(Elem, Elem, Elem),
    #[error("invalid group constructor: {0}")]
    InvalidSpec(String),
    #[error("invalid semidirect action: {0}")]
    BadAction(String),
    #[error("element {elem} out of range for a group of order {order}")]
    OutOfRange { elem: Elem, order: usize },
    #[error("generators do not generate the domain ({reached} of {order} elements reached)")]
    NotGenerating { reached: usize, order: usize },
    #[error("generator images do not extend to a homomorphism (conflict at element {0})")]
    NotHomomorphism(Elem),
    #[error("{0} generators but {1} images")]
    LengthMismatch(usize, usize),
    #[error("subgroup or homomorphism belongs to a different group")]
    ParentMismatch,
    #[error("elements do not form a subgroup: {0}")]
    NotSubgroup(String),
}

/// Limits applied when building groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupLimits {
    pub order_cap: usize,
}

impl Default for GroupLimits {
    fn default() -> Self {
        GroupLimits {
            order_cap: DEFAULT_ORDER_CAP,
        }
    }
}

impl GroupLimits {
    pub fn with_cap(order_cap: usize) -> Self {
        GroupLimits { order_cap }
    }
}

/// Constructor record for a finite group. This is also the on-disk form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic {
        n: u32,
    },
    ElementaryAbelian {
        p: u32,
        k: u32,
    },
    Product {
        factors: Vec<GroupSpec>,
    },
    Semidirect {
        normal: Box<GroupSpec>,
        acting: Box<GroupSpec>,
        action: Vec<ActionSpec>,
    },
    Table {
        table: Vec<Vec<Elem>>,
    },
}

/// The automorphism of the normal factor induced by one acting element,
/// given by generator images.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub by: Elem,
    pub gens: Vec<Elem>,
    pub images: Vec<Elem>,
}

impl GroupSpec {
    pub fn cyclic(n: u32) -> Self {
        GroupSpec::Cyclic { n }
    }

    pub fn elementary_abelian(p: u32, k: u32) -> Self {
        GroupSpec::ElementaryAbelian { p, k }
    }

    pub fn product(factors: Vec<GroupSpec>) -> Self {
        GroupSpec::Product { factors }
    }

    pub fn semidirect(normal: GroupSpec, acting: GroupSpec, action: Vec<ActionSpec>) -> Self {
        GroupSpec::Semidirect {
            normal: Box::new(normal),
            acting: Box::new(acting),
            action,
        }
    }

    /// Order the constructor would produce, `None` on overflow.
    pub fn order(&self) -> Option<usize> {
        match self {
            GroupSpec::Cyclic { n } => Some(*n as usize),
            GroupSpec::ElementaryAbelian { p, k } => (*p as usize).checked_pow(*k),
            GroupSpec::Product { factors } => factors
                .iter()
                .try_fold(1usize, |acc, f| acc.checked_mul(f.order()?)),
            GroupSpec::Semidirect { normal, acting, .. } => {
                normal.order()?.checked_mul(acting.order()?)
            }
            GroupSpec::Table { table } => Some(table.len()),
        }
    }
}

#[derive(Clone)]
enum Law {
    Table(Vec<Elem>),
    Cyclic(u32),
    Elementary {
        p: u32,
        k: u32,
    },
    Product(Vec<Arc<FiniteGroup>>),
    Semidirect {
        normal: Arc<FiniteGroup>,
        acting: Arc<FiniteGroup>,
        /// `action[a][n]` is the image of `n` under the automorphism of `a`.
        action: Vec<Vec<Elem>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Provenance {
    Constructed(GroupSpec),
    Table,
}

/// A validated finite group.
#[derive(Clone)]
pub struct FiniteGroup {
    order: usize,
    identity: Elem,
    inverse: Vec<Elem>,
    law: Law,
    generators: Vec<Elem>,
    provenance: Provenance,
    label: String,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.label, self.order)
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Build a group from its constructor record under the default order cap.
pub fn group_from_spec(spec: &GroupSpec) -> Result<Arc<FiniteGroup>, GroupError> {
    group_from_spec_with(spec, &GroupLimits::default())
}

pub fn group_from_spec_with(
    spec: &GroupSpec,
    limits: &GroupLimits,
) -> Result<Arc<FiniteGroup>, GroupError> {
    FiniteGroup::build(spec, limits).map(Arc::new)
}

/// True iff the order of `g` is a power of `p` (the trivial group counts).
pub fn is_p_group(g: &FiniteGroup, p: u32) -> bool {
    is_power_of(g.order(), p)
}

pub(crate) fn is_power_of(mut n: usize, p: u32) -> bool {
    let p = p as usize;
    if p < 2 || n == 0 {
        return false;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Canonical generating set (constructor generators, or a greedy
    /// ascending generating set for table groups).
    pub fn generators(&self) -> &[Elem] {
        &self.generators
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    pub fn has_dense_table(&self) -> bool {
        matches!(self.law, Law::Table(_))
    }

    pub fn contains(&self, x: Elem) -> bool {
        (x as usize) < self.order
    }

    pub(crate) fn check_elem(&self, x: Elem) -> Result<(), GroupError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GroupError::OutOfRange {
                elem: x,
                order: self.order,
            })
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.law {
            Law::Table(t) => t[a as usize * self.order + b as usize],
            Law::Cyclic(n) => ((a as u64 + b as u64) % *n as u64) as Elem,
            Law::Elementary { p, k } => elementary_add(*p, *k, a, b),
            Law::Product(factors) => {
                let xa = split_product(factors, a);
                let xb = split_product(factors, b);
                let parts: Vec<Elem> = factors
                    .iter()
                    .zip(xa.iter().zip(&xb))
                    .map(|(f, (&u, &v))| f.mul(u, v))
                    .collect();
                join_product(factors, &parts)
            }
            Law::Semidirect {
                normal,
                acting,
                action,
            } => {
                let na = acting.order as Elem;
                let (n1, a1) = (a / na, a % na);
                let (n2, a2) = (b / na, b % na);
                let n = normal.mul(n1, action[a1 as usize][n2 as usize]);
                n * na + acting.mul(a1, a2)
            }
        }
    }

    #[inline]
    pub fn inv(&self, x: Elem) -> Elem {
        self.inverse[x as usize]
    }

    /// Product of a sequence of elements, left to right.
    pub fn product<I: IntoIterator<Item = Elem>>(&self, xs: I) -> Elem {
        xs.into_iter()
            .fold(self.identity, |acc, x| self.mul(acc, x))
    }

    pub fn pow(&self, x: Elem, e: u64) -> Elem {
        let mut acc = self.identity;
        for _ in 0..e {
            acc = self.mul(acc, x);
        }
        acc
    }

    /// `x y x⁻¹`.
    pub fn conj(&self, x: Elem, y: Elem) -> Elem {
        self.mul(self.mul(x, y), self.inv(x))
    }

    /// `[x, y] = x y x⁻¹ y⁻¹`.
    pub fn commutator(&self, x: Elem, y: Elem) -> Elem {
        self.mul(self.conj(x, y), self.inv(y))
    }

    pub fn element_order(&self, x: Elem) -> usize {
        let mut k = 1;
        let mut y = x;
        while y != self.identity {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let gens = &self.generators;
        gens.iter()
            .all(|&a| gens.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    /// The constructor record of this group; groups without constructor
    /// provenance fall back to their full table.
    pub fn to_spec(&self) -> GroupSpec {
        match &self.provenance {
            Provenance::Constructed(spec) => spec.clone(),
            Provenance::Table => GroupSpec::Table {
                table: self
                    .elements()
                    .map(|a| self.elements().map(|b| self.mul(a, b)).collect())
                    .collect(),
            },
        }
    }

    /// Structural equality: same order and same multiplication.
    pub fn same_as(self: &Arc<Self>, other: &Arc<FiniteGroup>) -> bool {
        if Arc::ptr_eq(self, other) {
            return true;
        }
        if self.order != other.order || self.identity != other.identity {
            return false;
        }
        match (&self.provenance, &other.provenance) {
            (Provenance::Constructed(a), Provenance::Constructed(b)) if a == b => true,
            _ if self.order <= DENSE_TABLE_LIMIT => self
                .elements()
                .all(|a| self.elements().all(|b| self.mul(a, b) == other.mul(a, b))),
            _ => false,
        }
    }

    /// Build from a raw Cayley table (row `x`, column `y` holds `x·y`).
    pub fn from_table(table: Vec<Vec<Elem>>) -> Result<FiniteGroup, GroupError> {
        Self::build(&GroupSpec::Table { table }, &GroupLimits::default())
    }

    pub(crate) fn from_flat_table(
        order: usize,
        flat: Vec<Elem>,
    ) -> Result<FiniteGroup, GroupError> {
        let mut g = FiniteGroup {
            order,
            identity: 0,
            inverse: Vec::new(),
            law: Law::Table(flat),
            generators: Vec::new(),
            provenance: Provenance::Table,
            label: format!("T{order}"),
        };
        g.check_table()?;
        g.generators = greedy_generators(&g);
        Ok(g)
    }

    fn build(spec: &GroupSpec, limits: &GroupLimits) -> Result<FiniteGroup, GroupError> {
        let order = spec.order().ok_or(GroupError::OrderCap {
            order: usize::MAX,
            cap: limits.order_cap,
        })?;
        if order > limits.order_cap {
            return Err(GroupError::OrderCap {
                order,
                cap: limits.order_cap,
            });
        }
        if order == 0 {
            return Err(GroupError::InvalidSpec("empty group".into()));
        }
        let (law, generators, label) = match spec {
            GroupSpec::Table { table } => {
                let n = table.len();
                if table.iter().any(|row| row.len() != n) {
                    return Err(GroupError::InvalidTable("table is not square".into()));
                }
                let flat: Vec<Elem> = table.iter().flatten().copied().collect();
                if let Some(&bad) = flat.iter().find(|&&x| x as usize >= n) {
                    return Err(GroupError::OutOfRange {
                        elem: bad,
                        order: n,
                    });
                }
                return Self::from_flat_table(n, flat);
            }
            GroupSpec::Cyclic { n } => {
                let gens = if *n > 1 { vec![1] } else { vec![] };
                (Law::Cyclic(*n), gens, format!("C{n}"))
            }
            GroupSpec::ElementaryAbelian { p, k } => {
                if !is_prime(*p) {
                    return Err(GroupError::InvalidSpec(format!("{p} is not prime")));
                }
                let gens = (0..*k).map(|i| p.pow(k - 1 - i)).collect();
                let label = match k {
                    1 => format!("C{p}"),
                    _ => format!("C{p}^{k}"),
                };
                (Law::Elementary { p: *p, k: *k }, gens, label)
            }
            GroupSpec::Product { factors } => {
                let built: Vec<Arc<FiniteGroup>> = factors
                    .iter()
                    .map(|f| Self::build(f, limits).map(Arc::new))
                    .collect::<Result<_, _>>()?;
                let ids: Vec<Elem> = built.iter().map(|f| f.identity).collect();
                let mut gens = Vec::new();
                for (i, f) in built.iter().enumerate() {
                    for &g in &f.generators {
                        let mut parts = ids.clone();
                        parts[i] = g;
                        gens.push(join_product(&built, &parts));
                    }
                }
                let label = if built.is_empty() {
                    "1".to_string()
                } else {
                    built
                        .iter()
                        .map(|f| f.label.as_str())
                        .collect::<Vec<_>>()
                        .join(" x ")
                };
                (Law::Product(built), gens, label)
            }
            GroupSpec::Semidirect {
                normal,
                acting,
                action,
            } => {
                let normal = Arc::new(Self::build(normal, limits)?);
                let acting = Arc::new(Self::build(acting, limits)?);
                let action = build_action(&normal, &acting, action)?;
                let na = acting.order as Elem;
                let mut gens: Vec<Elem> = normal
                    .generators
                    .iter()
                    .map(|&g| g * na + acting.identity)
                    .collect();
                gens.extend(acting.generators.iter().map(|&a| normal.identity * na + a));
                let label = format!("({}) : ({})", normal.label, acting.label);
                (
                    Law::Semidirect {
                        normal,
                        acting,
                        action,
                    },
                    gens,
                    label,
                )
            }
        };
        let mut g = FiniteGroup {
            order,
            identity: 0,
            inverse: Vec::new(),
            law,
            generators,
            provenance: Provenance::Constructed(spec.clone()),
            label,
        };
        g.identity = g.structural_identity();
        if order <= DENSE_TABLE_LIMIT {
            let mut flat = Vec::with_capacity(order * order);
            for a in 0..order as Elem {
                for b in 0..order as Elem {
                    flat.push(g.mul(a, b));
                }
            }
            g.law = Law::Table(flat);
            g.check_table()?;
        } else {
            g.inverse = (0..order as Elem)
                .map(|x| g.structural_inverse(x))
                .collect();
            g.check_structural()?;
        }
        Ok(g)
    }

    fn structural_identity(&self) -> Elem {
        match &self.law {
            Law::Table(_) => unreachable!("table groups find their identity by search"),
            Law::Cyclic(_) | Law::Elementary { .. } => 0,
            Law::Product(factors) => {
                let ids: Vec<Elem> = factors.iter().map(|f| f.identity).collect();
                join_product(factors, &ids)
            }
            Law::Semidirect { normal, acting, .. } => {
                normal.identity * acting.order as Elem + acting.identity
            }
        }
    }

    fn structural_inverse(&self, x: Elem) -> Elem {
        match &self.law {
            Law::Table(_) => unreachable!("table groups find inverses by search"),
            Law::Cyclic(n) => (*n - x) % *n,
            Law::Elementary { p, k } => elementary_neg(*p, *k, x),
            Law::Product(factors) => {
                let parts: Vec<Elem> = factors
                    .iter()
                    .zip(split_product(factors, x))
                    .map(|(f, c)| f.inv(c))
                    .collect();
                join_product(factors, &parts)
            }
            Law::Semidirect {
                normal,
                acting,
                action,
            } => {
                let na = acting.order as Elem;
                let (n, a) = (x / na, x % na);
                let ai = acting.inv(a);
                action[ai as usize][normal.inv(n) as usize] * na + ai
            }
        }
    }

    /// Latin square, identity, inverses and associativity for a dense table.
    fn check_table(&mut self) -> Result<(), GroupError> {
        let n = self.order;
        let Law::Table(t) = &self.law else {
            unreachable!()
        };
        let mut seen = vec![usize::MAX; n];
        for x in 0..n {
            for y in 0..n {
                let v = t[x * n + y] as usize;
                if v >= n {
                    return Err(GroupError::OutOfRange {
                        elem: v as Elem,
                        order: n,
                    });
                }
                if seen[v] == x {
                    return Err(GroupError::InvalidTable(format!("row {x} repeats {v}")));
                }
                seen[v] = x;
            }
        }
        seen.fill(usize::MAX);
        for y in 0..n {
            for x in 0..n {
                let v = t[x * n + y] as usize;
                if seen[v] == y {
                    return Err(GroupError::InvalidTable(format!("column {y} repeats {v}")));
                }
                seen[v] = y;
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| t[e * n + x] as usize == x && t[x * n + e] as usize == x))
            .ok_or_else(|| GroupError::InvalidTable("no two-sided identity".into()))?;
        let mut inverse = vec![0; n];
        for x in 0..n {
            let y = (0..n)
                .find(|&y| t[x * n + y] as usize == e)
                .expect("Latin rows contain the identity");
            if t[y * n + x] as usize != e {
                return Err(GroupError::InvalidTable(format!(
                    "{x} has no two-sided inverse"
                )));
            }
            inverse[x] = y as Elem;
        }
        self.identity = e as Elem;
        self.inverse = inverse;
        self.check_associativity()
    }

    fn check_structural(&self) -> Result<(), GroupError> {
        let e = self.identity;
        for x in self.elements() {
            if self.mul(e, x) != x || self.mul(x, e) != x {
                return Err(GroupError::InvalidTable(format!("identity fails at {x}")));
            }
            if self.mul(self.inv(x), x) != e || self.mul(x, self.inv(x)) != e {
                return Err(GroupError::InvalidTable(format!("inverse fails at {x}")));
            }
        }
        self.check_associativity()
    }

    fn check_associativity(&self) -> Result<(), GroupError> {
        let n = self.order as Elem;
        let check = |a, b, c| {
            if self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c)) {
                Ok(())
            } else {
                Err(GroupError::NotAssociative(a, b, c))
            }
        };
        if self.order <= EXHAUSTIVE_ASSOC_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(ASSOC_SEED);
            for _ in 0..ASSOC_SAMPLES {
                check(
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                )?;
            }
        }
        Ok(())
    }
}

fn elementary_add(p: u32, k: u32, a: Elem, b: Elem) -> Elem {
    if p == 2 {
        return a ^ b;
    }
    let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
    for _ in 0..k {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn elementary_neg(p: u32, k: u32, a: Elem) -> Elem {
    if p == 2 {
        return a;
    }
    let (mut a, mut out, mut place) = (a, 0, 1);
    for _ in 0..k {
        out += ((p - a % p) % p) * place;
        a /= p;
        place *= p;
    }
    out
}

fn split_product(factors: &[Arc<FiniteGroup>], mut x: Elem) -> Vec<Elem> {
    let mut parts = vec![0; factors.len()];
    for (i, f) in factors.iter().enumerate().rev() {
        let n = f.order as Elem;
        parts[i] = x % n;
        x /= n;
    }
    parts
}

fn join_product(factors: &[Arc<FiniteGroup>], parts: &[Elem]) -> Elem {
    factors
        .iter()
        .zip(parts)
        .fold(0, |acc, (f, &c)| acc * f.order as Elem + c)
}

/// Extend per-generator automorphisms of `normal` to a homomorphism from
/// `acting` into the automorphism group.
fn build_action(
    normal: &Arc<FiniteGroup>,
    acting: &Arc<FiniteGroup>,
    specs: &[ActionSpec],
) -> Result<Vec<Vec<Elem>>, GroupError> {
    let nn = normal.order;
    let identity_perm: Vec<Elem> = normal.elements().collect();
    let mut gens: Vec<(Elem, Vec<Elem>)> = Vec::new();
    if specs.is_empty() {
        for &a in acting.generators() {
            gens.push((a, identity_perm.clone()));
        }
    }
    for s in specs {
        acting.check_elem(s.by)?;
        let hom =
            GroupHom::from_generator_images(normal.clone(), normal.clone(), &s.gens, &s.images)
                .map_err(|e| {
                    GroupError::BadAction(format!("automorphism of element {}: {e}", s.by))
                })?;
        if !hom.is_injective() {
            return Err(GroupError::BadAction(format!(
                "map for acting element {} is not an automorphism",
                s.by
            )));
        }
        gens.push((s.by, hom.map().to_vec()));
    }
    let mut table: Vec<Option<Vec<Elem>>> = vec![None; acting.order];
    table[acting.identity as usize] = Some(identity_perm);
    let mut queue = std::collections::VecDeque::from([acting.identity]);
    while let Some(x) = queue.pop_front() {
        for (g, sigma_g) in &gens {
            let y = acting.mul(x, *g);
            let sigma_x = table[x as usize]
                .as_ref()
                .expect("queued elements are assigned");
            let composed: Vec<Elem> = (0..nn).map(|n| sigma_x[sigma_g[n] as usize]).collect();
            match &table[y as usize] {
                None => {
                    table[y as usize] = Some(composed);
                    queue.push_back(y);
                }
                Some(existing) if *existing != composed => {
                    return Err(GroupError::BadAction(format!(
                        "not a homomorphism into the automorphisms (conflict at acting element {y})"
                    )));
                }
                Some(_) => {}
            }
        }
    }
    let reached = table.iter().filter(|t| t.is_some()).count();
    if reached != acting.order {
        return Err(GroupError::BadAction(format!(
            "action elements generate {reached} of {} acting elements",
            acting.order
        )));
    }
    Ok(table.into_iter().map(|t| t.expect("all reached")).collect())
}

/// Ascending greedy generating set.
fn greedy_generators(g: &FiniteGroup) -> Vec<Elem> {
    let mut gens = Vec::new();
    let mut member = vec![false; g.order];
    member[g.identity as usize] = true;
    let mut elems = vec![g.identity];
    for x in g.elements() {
        if member[x as usize] {
            continue;
        }
        gens.push(x);
        // extend the closure by the new generator
        let mut queue: std::collections::VecDeque<Elem> = elems.iter().copied().collect();
        while let Some(y) = queue.pop_front() {
            for &s in &gens {
                let z = g.mul(y, s);
                if !member[z as usize] {
                    member[z as usize] = true;
                    elems.push(z);
                    queue.push_back(z);
                }
            }
        }
        if elems.len() == g.order {
            break;
        }
    }
    gens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(spec: GroupSpec) -> Arc<FiniteGroup> {
        group_from_spec(&spec).unwrap()
    }

    #[test]
    fn cyclic_four() {
        let c4 = g(GroupSpec::cyclic(4));
        assert_eq!(c4.order(), 4);
        assert_eq!(c4.identity(), 0);
        assert_eq!(c4.mul(1, 3), 0);
        assert_eq!(c4.inv(1), 3);
    }

    #[test]
    fn klein_group_is_self_inverse() {
        let v = g(GroupSpec::elementary_abelian(2, 2));
        assert_eq!(v.order(), 4);
        for x in v.elements() {
            assert_eq!(v.mul(x, x), v.identity());
        }
    }

    #[test]
    fn elementary_abelian_odd_prime() {
        let e = g(GroupSpec::elementary_abelian(3, 2));
        assert_eq!(e.order(), 9);
        // (1,2) + (2,2) = (0,1)
        assert_eq!(e.mul(5, 8), 1);
        assert_eq!(e.generators(), &[3, 1]);
    }

    #[test]
    fn product_is_lexicographic() {
        let p = g(GroupSpec::product(vec![
            GroupSpec::cyclic(2),
            GroupSpec::cyclic(3),
        ]));
        // (1,2)·(1,2) = (0,1)
        assert_eq!(p.mul(5, 5), 1);
        assert_eq!(p.generators(), &[3, 1]);
    }

    fn dihedral8() -> Arc<FiniteGroup> {
        // C4 ⋊ C2 with the reflection inverting the rotation
        g(GroupSpec::semidirect(
            GroupSpec::cyclic(4),
            GroupSpec::cyclic(2),
            vec![ActionSpec {
                by: 1,
                gens: vec![1],
                images: vec![3],
            }],
        ))
    }

    #[test]
    fn dihedral_is_nonabelian() {
        let d = dihedral8();
        assert_eq!(d.order(), 8);
        assert!(!d.is_abelian());
        // rotation (1,0) has order 4, reflection (0,1) order 2
        assert_eq!(d.element_order(2), 4);
        assert_eq!(d.element_order(1), 2);
    }

    #[test]
    fn semidirect_rejects_non_automorphism() {
        let err = group_from_spec(&GroupSpec::semidirect(
            GroupSpec::cyclic(4),
            GroupSpec::cyclic(2),
            vec![ActionSpec {
                by: 1,
                gens: vec![1],
                images: vec![2],
            }],
        ))
        .unwrap_err();
        assert!(matches!(err, GroupError::BadAction(_)), "{err}");
    }

    #[test]
    fn semidirect_rejects_action_of_wrong_order() {
        // an order-4 automorphism cannot be the image of the C2 generator
        let err = group_from_spec(&GroupSpec::semidirect(
            GroupSpec::elementary_abelian(2, 2),
            GroupSpec::cyclic(2),
            vec![ActionSpec {
                by: 1,
                gens: vec![2, 1],
                images: vec![1, 3],
            }],
        ));
        assert!(matches!(err, Err(GroupError::BadAction(_))));
    }

    #[test]
    fn order_cap_is_enforced() {
        let err = group_from_spec(&GroupSpec::cyclic(5000)).unwrap_err();
        assert_eq!(
            err,
            GroupError::OrderCap {
                order: 5000,
                cap: 4096
            }
        );
        assert!(
            group_from_spec_with(&GroupSpec::cyclic(5000), &GroupLimits::with_cap(8192)).is_ok()
        );
    }

    #[test]
    fn raw_table_validation() {
        let ok = FiniteGroup::from_table(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(ok.order(), 2);
        let not_latin = FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]]);
        assert!(matches!(not_latin, Err(GroupError::InvalidTable(_))));
        // Latin square with identity 0 that is not associative
        let quasi = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::from_table(quasi),
            Err(GroupError::NotAssociative(..))
        ));
    }

    #[test]
    fn table_identity_need_not_be_zero() {
        // C2 with the identity stored at index 1
        let t = FiniteGroup::from_table(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(t.identity(), 1);
        assert_eq!(t.inv(0), 0);
    }

    #[test]
    fn p_group_detection() {
        let c4 = g(GroupSpec::cyclic(4));
        assert!(is_p_group(&c4, 2));
        assert!(!is_p_group(&c4, 3));
        assert!(is_p_group(&g(GroupSpec::cyclic(1)), 3));
        assert!(!is_p_group(&g(GroupSpec::cyclic(6)), 2));
    }

    #[test]
    fn structural_group_above_dense_limit() {
        let limits = GroupLimits::with_cap(1 << 14);
        let big = group_from_spec_with(
            &GroupSpec::product(vec![
                GroupSpec::elementary_abelian(2, 12),
                GroupSpec::cyclic(2),
            ]),
            &limits,
        )
        .unwrap();
        assert_eq!(big.order(), 8192);
        assert!(!big.has_dense_table());
        assert_eq!(big.mul(3, 3), big.identity());
        assert_eq!(big.to_spec().order(), Some(8192));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = GroupSpec::semidirect(
            GroupSpec::cyclic(4),
            GroupSpec::cyclic(2),
            vec![ActionSpec {
                by: 1,
                gens: vec![1],
                images: vec![3],
            }],
        );
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"semidirect\""));
        let back: GroupSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
