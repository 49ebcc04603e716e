use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use super::{Elem, FiniteGroup, GroupError, Subgroup, DENSE_TABLE_LIMIT};

/// A homomorphism between finite groups, stored as a full element map.
#[derive(Clone)]
pub struct GroupHom {
    domain: Arc<FiniteGroup>,
    codomain: Arc<FiniteGroup>,
    map: Vec<Elem>,
    injective: bool,
    image: Subgroup,
}

impl fmt::Debug for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GroupHom({} -> {}",
            self.domain.label(),
            self.codomain.label()
        )?;
        if self.map.len() <= 16 {
            write!(f, ", {:?}", self.map)?;
        }
        write!(f, ")")
    }
}

impl GroupHom {
    /// The unique homomorphism sending `gens[i]` to `images[i]`.
    ///
    /// Walks the Cayley graph of the domain over `gens`, so every edge
    /// `x -> x·g` is checked against `map(x)·map(g)`; groups small enough
    /// for a dense table are then also checked on every pair.
    pub fn from_generator_images(
        domain: Arc<FiniteGroup>,
        codomain: Arc<FiniteGroup>,
        gens: &[Elem],
        images: &[Elem],
    ) -> Result<GroupHom, GroupError> {
        if gens.len() != images.len() {
            return Err(GroupError::LengthMismatch(gens.len(), images.len()));
        }
        for &g in gens {
            domain.check_elem(g)?;
        }
        for &h in images {
            codomain.check_elem(h)?;
        }
        const UNSET: Elem = Elem::MAX;
        let mut map = vec![UNSET; domain.order()];
        map[domain.identity() as usize] = codomain.identity();
        let mut reached = 1;
        let mut queue = VecDeque::from([domain.identity()]);
        while let Some(x) = queue.pop_front() {
            let fx = map[x as usize];
            for (&g, &h) in gens.iter().zip(images) {
                let y = domain.mul(x, g);
                let fy = codomain.mul(fx, h);
                let slot = &mut map[y as usize];
                if *slot == UNSET {
                    *slot = fy;
                    reached += 1;
                    queue.push_back(y);
                } else if *slot != fy {
                    return Err(GroupError::NotHomomorphism(y));
                }
            }
        }
        if reached != domain.order() {
            return Err(GroupError::NotGenerating {
                reached,
                order: domain.order(),
            });
        }
        Self::from_map(domain, codomain, map)
    }

    /// Wrap a full element map, verifying the homomorphism property.
    pub fn from_map(
        domain: Arc<FiniteGroup>,
        codomain: Arc<FiniteGroup>,
        map: Vec<Elem>,
    ) -> Result<GroupHom, GroupError> {
        if map.len() != domain.order() {
            return Err(GroupError::LengthMismatch(map.len(), domain.order()));
        }
        for &y in &map {
            codomain.check_elem(y)?;
        }
        if map[domain.identity() as usize] != codomain.identity() {
            return Err(GroupError::NotHomomorphism(domain.identity()));
        }
        if domain.order() <= DENSE_TABLE_LIMIT {
            for x in domain.elements() {
                for y in domain.elements() {
                    let xy = domain.mul(x, y);
                    if map[xy as usize] != codomain.mul(map[x as usize], map[y as usize]) {
                        return Err(GroupError::NotHomomorphism(xy));
                    }
                }
            }
        } else {
            // the canonical generators generate, so checking every Cayley
            // edge is a complete check
            for x in domain.elements() {
                for &g in domain.generators() {
                    let xg = domain.mul(x, g);
                    if map[xg as usize] != codomain.mul(map[x as usize], map[g as usize]) {
                        return Err(GroupError::NotHomomorphism(xg));
                    }
                }
            }
        }
        Ok(Self::assemble(domain, codomain, map))
    }

    fn assemble(domain: Arc<FiniteGroup>, codomain: Arc<FiniteGroup>, map: Vec<Elem>) -> GroupHom {
        let image = Subgroup::from_member_iter(codomain.clone(), map.iter().copied());
        let injective = image.order() == domain.order();
        GroupHom {
            domain,
            codomain,
            map,
            injective,
            image,
        }
    }

    pub fn identity(g: Arc<FiniteGroup>) -> GroupHom {
        let map = g.elements().collect();
        Self::assemble(g.clone(), g, map)
    }

    /// The map sending everything to the identity.
    pub fn trivial(domain: Arc<FiniteGroup>, codomain: Arc<FiniteGroup>) -> GroupHom {
        let map = vec![codomain.identity(); domain.order()];
        Self::assemble(domain, codomain, map)
    }

    pub fn domain(&self) -> &Arc<FiniteGroup> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteGroup> {
        &self.codomain
    }

    pub fn map(&self) -> &[Elem] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.map[x as usize]
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    /// Injective and onto the codomain.
    pub fn is_isomorphism(&self) -> bool {
        self.injective && self.domain.order() == self.codomain.order()
    }

    pub fn image(&self) -> &Subgroup {
        &self.image
    }

    pub fn kernel(&self) -> Subgroup {
        let e = self.codomain.identity();
        Subgroup::from_member_iter(
            self.domain.clone(),
            self.domain
                .elements()
                .filter(|&x| self.map[x as usize] == e),
        )
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &GroupHom) -> Result<GroupHom, GroupError> {
        if !self.codomain.same_as(&next.domain) {
            return Err(GroupError::ParentMismatch);
        }
        let map = self.map.iter().map(|&x| next.apply(x)).collect();
        Ok(Self::assemble(
            self.domain.clone(),
            next.codomain.clone(),
            map,
        ))
    }

    /// The same element map with the codomain replaced by `codomain`,
    /// which must contain the image (used when a subgroup is viewed as a
    /// group in its own right).
    pub(crate) fn from_trusted_map(
        domain: Arc<FiniteGroup>,
        codomain: Arc<FiniteGroup>,
        map: Vec<Elem>,
    ) -> GroupHom {
        Self::assemble(domain, codomain, map)
    }

    /// Generator images of this map on the canonical generators of the domain.
    pub fn generator_images(&self) -> (Vec<Elem>, Vec<Elem>) {
        let gens = self.domain.generators().to_vec();
        let images = gens.iter().map(|&g| self.apply(g)).collect();
        (gens, images)
    }

    /// `{x : f(x) ∈ S}`.
    pub fn preimage(&self, s: &Subgroup) -> Result<Subgroup, GroupError> {
        if !s.parent().same_as(&self.codomain) {
            return Err(GroupError::ParentMismatch);
        }
        Ok(Subgroup::from_member_iter(
            self.domain.clone(),
            self.domain
                .elements()
                .filter(|&x| s.contains(self.map[x as usize])),
        ))
    }

    pub fn same_map(&self, other: &GroupHom) -> bool {
        self.domain.same_as(&other.domain)
            && self.codomain.same_as(&other.codomain)
            && self.map == other.map
    }
}

pub fn hom_from_generator_images(
    domain: Arc<FiniteGroup>,
    codomain: Arc<FiniteGroup>,
    gens: &[Elem],
    images: &[Elem],
) -> Result<GroupHom, GroupError> {
    GroupHom::from_generator_images(domain, codomain, gens, images)
}

pub fn preimage_subgroup(f: &GroupHom, s: &Subgroup) -> Result<Subgroup, GroupError> {
    f.preimage(s)
}
