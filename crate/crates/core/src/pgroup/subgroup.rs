use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use super::{Elem, FiniteGroup, GroupError, GroupHom, DENSE_TABLE_LIMIT};

/// A subgroup of a finite group, as a sorted element set.
#[derive(Clone)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    elements: Vec<Elem>,
    member: Vec<bool>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subgroup(order {} in {}",
            self.order(),
            self.parent.label()
        )?;
        if self.elements.len() <= 16 {
            write!(f, ", {:?}", self.elements)?;
        }
        write!(f, ")")
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.parent.same_as(&other.parent) && self.elements == other.elements
    }
}

impl Subgroup {
    /// Trusted constructor: the iterator must enumerate a subgroup.
    pub(crate) fn from_member_iter(
        parent: Arc<FiniteGroup>,
        elems: impl IntoIterator<Item = Elem>,
    ) -> Subgroup {
        let mut member = vec![false; parent.order()];
        for x in elems {
            member[x as usize] = true;
        }
        let elements = (0..parent.order() as Elem)
            .filter(|&x| member[x as usize])
            .collect();
        Subgroup {
            parent,
            elements,
            member,
        }
    }

    pub fn trivial(parent: Arc<FiniteGroup>) -> Subgroup {
        let e = parent.identity();
        Self::from_member_iter(parent, [e])
    }

    pub fn whole(parent: Arc<FiniteGroup>) -> Subgroup {
        let n = parent.order() as Elem;
        Self::from_member_iter(parent, 0..n)
    }

    /// Smallest subgroup containing `gens`.
    pub fn generated(parent: Arc<FiniteGroup>, gens: &[Elem]) -> Result<Subgroup, GroupError> {
        for &g in gens {
            parent.check_elem(g)?;
        }
        let mut member = vec![false; parent.order()];
        let e = parent.identity();
        member[e as usize] = true;
        let mut queue = VecDeque::from([e]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = parent.mul(x, g);
                if !member[y as usize] {
                    member[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
        let elements = (0..parent.order() as Elem)
            .filter(|&x| member[x as usize])
            .collect();
        Ok(Subgroup {
            parent,
            elements,
            member,
        })
    }

    /// Validate an explicit element set.
    pub fn from_elements(parent: Arc<FiniteGroup>, elems: &[Elem]) -> Result<Subgroup, GroupError> {
        for &x in elems {
            parent.check_elem(x)?;
        }
        let s = Self::from_member_iter(parent, elems.iter().copied());
        let g = &s.parent;
        if !s.contains(g.identity()) {
            return Err(GroupError::NotSubgroup("missing the identity".into()));
        }
        for &x in &s.elements {
            if !s.contains(g.inv(x)) {
                return Err(GroupError::NotSubgroup(format!("inverse of {x} missing")));
            }
            for &y in &s.elements {
                if !s.contains(g.mul(x, y)) {
                    return Err(GroupError::NotSubgroup(format!("{x}·{y} missing")));
                }
            }
        }
        Ok(s)
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn contains(&self, x: Elem) -> bool {
        self.member.get(x as usize).copied().unwrap_or(false)
    }

    /// Index in the parent group.
    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.order() == self.parent.order()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.parent.same_as(&other.parent) && self.elements.iter().all(|&x| other.contains(x))
    }

    /// Position of `x` in the sorted element list.
    pub fn position(&self, x: Elem) -> Option<usize> {
        self.elements.binary_search(&x).ok()
    }

    pub fn intersection(&self, other: &Subgroup) -> Result<Subgroup, GroupError> {
        if !self.parent.same_as(&other.parent) {
            return Err(GroupError::ParentMismatch);
        }
        Ok(Self::from_member_iter(
            self.parent.clone(),
            self.elements.iter().copied().filter(|&x| other.contains(x)),
        ))
    }

    /// `x S x⁻¹`.
    pub fn conjugate(&self, x: Elem) -> Subgroup {
        let g = &self.parent;
        Self::from_member_iter(g.clone(), self.elements.iter().map(|&s| g.conj(x, s)))
    }

    /// Ascending greedy generating set.
    pub fn generators(&self) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut current = Subgroup::trivial(self.parent.clone());
        for &x in &self.elements {
            if current.is_whole_of(self) {
                break;
            }
            if !current.contains(x) {
                gens.push(x);
                current =
                    Subgroup::generated(self.parent.clone(), &gens).expect("elements in range");
            }
        }
        gens
    }

    fn is_whole_of(&self, s: &Subgroup) -> bool {
        self.order() == s.order()
    }

    /// True iff `a S a⁻¹ = S` for every `a` in `ambient`.
    pub fn is_normal_in(&self, ambient: &Subgroup) -> Result<bool, GroupError> {
        if !self.parent.same_as(&ambient.parent) {
            return Err(GroupError::ParentMismatch);
        }
        let g = &self.parent;
        Ok(ambient
            .generators()
            .iter()
            .all(|&a| self.elements.iter().all(|&s| self.contains(g.conj(a, s)))))
    }

    /// Normal closure of `gens` inside `self`.
    pub fn normal_closure(&self, gens: &[Elem]) -> Result<Subgroup, GroupError> {
        let g = &self.parent;
        let ambient_gens = self.generators();
        let mut current = Subgroup::generated(g.clone(), gens)?;
        loop {
            let extra: Vec<Elem> = ambient_gens
                .iter()
                .flat_map(|&a| current.elements.iter().map(move |&s| g.conj(a, s)))
                .filter(|&c| !current.contains(c))
                .collect();
            if extra.is_empty() {
                return Ok(current);
            }
            let mut all = current.generators();
            all.extend(extra);
            current = Subgroup::generated(g.clone(), &all)?;
        }
    }

    /// This subgroup as a group in its own right, with element `i` standing
    /// for the `i`-th smallest element, plus the inclusion into the parent.
    pub fn to_group(&self) -> Result<(Arc<FiniteGroup>, GroupHom), GroupError> {
        let n = self.order();
        if n > DENSE_TABLE_LIMIT {
            return Err(GroupError::OrderCap {
                order: n,
                cap: DENSE_TABLE_LIMIT,
            });
        }
        let g = &self.parent;
        let mut flat = Vec::with_capacity(n * n);
        for &x in &self.elements {
            for &y in &self.elements {
                let z = g.mul(x, y);
                flat.push(self.position(z).expect("closed under multiplication") as Elem);
            }
        }
        let group = Arc::new(FiniteGroup::from_flat_table(n, flat)?);
        let inclusion = GroupHom::from_trusted_map(group.clone(), g.clone(), self.elements.clone());
        Ok((group, inclusion))
    }
}

pub fn subgroup_generated(g: Arc<FiniteGroup>, gens: &[Elem]) -> Result<Subgroup, GroupError> {
    Subgroup::generated(g, gens)
}

/// True iff `x S x⁻¹ = S` for all `x` in `p`.
pub fn is_normal(p: &Arc<FiniteGroup>, s: &Subgroup) -> bool {
    s.is_normal_in(&Subgroup::whole(p.clone())).unwrap_or(false)
}

/// One double coset `Q x R`, with its minimal element as representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCoset {
    pub rep: Elem,
    pub elements: Vec<Elem>,
}

impl DoubleCoset {
    pub fn size(&self) -> usize {
        self.elements.len()
    }
}

/// The double cosets `Q\P/R`, sorted by their minimal representatives.
pub fn double_cosets(
    p: &Arc<FiniteGroup>,
    q: &Subgroup,
    r: &Subgroup,
) -> Result<Vec<DoubleCoset>, GroupError> {
    double_cosets_within(&Subgroup::whole(p.clone()), q, r)
}

/// The double cosets `Q\A/R` for subgroups `Q, R ≤ A`.
pub fn double_cosets_within(
    ambient: &Subgroup,
    q: &Subgroup,
    r: &Subgroup,
) -> Result<Vec<DoubleCoset>, GroupError> {
    if !q.is_subset_of(ambient) || !r.is_subset_of(ambient) {
        return Err(GroupError::ParentMismatch);
    }
    let g = ambient.parent();
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for &x in ambient.elements() {
        if seen[x as usize] {
            continue;
        }
        let mut elements = Vec::new();
        for &a in q.elements() {
            let ax = g.mul(a, x);
            for &b in r.elements() {
                let y = g.mul(ax, b);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    elements.push(y);
                }
            }
        }
        elements.sort_unstable();
        out.push(DoubleCoset { rep: x, elements });
    }
    Ok(out)
}
