//! Generator-presented matrix groups: explicit enumeration, stabilizer-chain
//! orders, the subgroup generated by order-l elements, and a brute-force
//! composition-series oracle.
//!
//! Everything below the public surface works with the Weil restriction of
//! the generators to F_l, packed into `u64` keys. A group over F_{l^f} of
//! side `n` is therefore handled as a subgroup of GL_{nf}(F_l); the two are
//! isomorphic, so orders and composition factors agree.

mod composition;
mod packed;
mod schreier;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::certify::AmbientSpec;
use crate::gf::{Field, GfError, Mat};

pub use composition::{composition_series, composition_series_with};
pub use packed::Codec;
pub use schreier::{Perm, StabilizerChain};

/// Default bound on the size of an explicitly enumerated group.
pub const DEFAULT_ORACLE_CAP: u64 = 2_000_000;
/// Default bound on the number of nonzero vectors acted on by `group_order`.
pub const DEFAULT_DOMAIN_BOUND: u64 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrpError {
    #[error("group has more than {cap} elements")]
    CapExceeded { cap: u64 },
    #[error("permutation domain of {size} points exceeds bound {bound}")]
    DomainTooLarge { size: u64, bound: u64 },
    #[error("matrices of side {side} over F_{ell} do not fit the packed representation")]
    TooWide { side: usize, ell: u64 },
    #[error("generator list is empty")]
    NoGenerators,
    #[error("generator {0} is not invertible")]
    NotInvertible(usize),
    #[error("generator {index} has side {found}, expected {expected}")]
    SideMismatch { index: usize, found: usize, expected: usize },
    #[error("composition factor of order {0} is outside the supported catalogue")]
    UnknownFactor(u128),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A subgroup of GL_n(F_{l^f}) given by generators.
#[derive(Clone, Debug)]
pub struct GroupInstance {
    pub field: Field,
    pub n: usize,
    pub generators: Vec<Mat>,
    pub ambient: Option<AmbientSpec>,
}

impl GroupInstance {
    pub fn new(field: Field, n: usize, generators: Vec<Mat>) -> Result<GroupInstance, GrpError> {
        if generators.is_empty() {
            return Err(GrpError::NoGenerators);
        }
        for (index, g) in generators.iter().enumerate() {
            if g.side() != n {
                return Err(GrpError::SideMismatch {
                    index,
                    found: g.side(),
                    expected: n,
                });
            }
            if !field.is_invertible(g) {
                return Err(GrpError::NotInvertible(index));
            }
        }
        Ok(GroupInstance {
            field,
            n,
            generators,
            ambient: None,
        })
    }

    pub fn with_ambient(mut self, ambient: AmbientSpec) -> GroupInstance {
        self.ambient = Some(ambient);
        self
    }

    pub fn ell(&self) -> u64 {
        self.field.ell()
    }

    /// Side of the Weil-restricted matrices, `n f`.
    pub fn restricted_side(&self) -> usize {
        self.n * self.field.degree()
    }

    pub fn restricted_generators(&self) -> Vec<Mat> {
        self.generators.iter().map(|g| self.field.weil_restrict(g)).collect()
    }

    /// Same group conjugated by `c`: every generator `g` becomes `c g c^-1`.
    pub fn conjugate(&self, c: &Mat) -> Result<GroupInstance, GrpError> {
        let ci = self.field.mat_inv(c)?;
        let gens = self
            .generators
            .iter()
            .map(|g| self.field.mat_mul(&self.field.mat_mul(c, g), &ci))
            .collect();
        Ok(GroupInstance {
            generators: gens,
            ..self.clone()
        })
    }

    fn codec(&self) -> Result<Codec, GrpError> {
        let side = self.restricted_side();
        Codec::new(side, self.ell()).ok_or(GrpError::TooWide { side, ell: self.ell() })
    }
}

pub(crate) struct Conjugator {
    s: [u32; packed::MAX_SIDE * packed::MAX_SIDE],
    si: [u32; packed::MAX_SIDE * packed::MAX_SIDE],
}

/// The full element set of a finite matrix group.
pub struct EnumeratedGroup {
    field: Field,
    n: usize,
    codec: Codec,
    elements: Vec<u64>,
    index: FxHashMap<u64, u32>,
    generators: Vec<u32>,
}

impl std::fmt::Debug for EnumeratedGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnumeratedGroup")
            .field("field", &self.field)
            .field("n", &self.n)
            .field("order", &self.elements.len())
            .finish()
    }
}

/// Breadth-first closure of the generators under right multiplication.
pub fn enumerate(g: &GroupInstance, cap: u64) -> Result<EnumeratedGroup, GrpError> {
    let codec = g.codec()?;
    let gens: Vec<u64> = g.restricted_generators().iter().map(|m| codec.encode(m)).collect();
    let id = codec.identity();
    let mut elements = vec![id];
    let mut index = FxHashMap::default();
    index.insert(id, 0u32);
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head];
        for &s in &gens {
            let y = codec.mul(x, s);
            if let std::collections::hash_map::Entry::Vacant(v) = index.entry(y) {
                if elements.len() as u64 >= cap {
                    return Err(GrpError::CapExceeded { cap });
                }
                v.insert(elements.len() as u32);
                elements.push(y);
            }
        }
        head += 1;
    }
    let generators = gens.iter().map(|k| index[k]).collect();
    Ok(EnumeratedGroup {
        field: g.field.clone(),
        n: g.n,
        codec,
        elements,
        index,
        generators,
    })
}

impl EnumeratedGroup {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn ell(&self) -> u64 {
        self.codec.ell()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Matrix side over the original field.
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    pub fn contains(&self, m: &Mat) -> bool {
        if m.side() != self.n {
            return false;
        }
        let key = self.codec.encode(&self.field.weil_restrict(m));
        self.index.contains_key(&key)
    }

    /// Element `i` over the original field.
    pub fn element(&self, i: usize) -> Mat {
        self.field.weil_unrestrict(&self.codec.decode(self.elements[i]))
    }

    /// Element `i` as a matrix over F_l of side `n f`.
    pub fn restricted_element(&self, i: usize) -> Mat {
        self.codec.decode(self.elements[i])
    }

    pub fn elements(&self) -> impl Iterator<Item = Mat> + '_ {
        (0..self.elements.len()).map(|i| self.element(i))
    }

    pub fn generator_indices(&self) -> &[u32] {
        &self.generators
    }

    #[inline]
    pub(crate) fn mul(&self, a: u32, b: u32) -> u32 {
        let k = self.codec.mul(self.elements[a as usize], self.elements[b as usize]);
        *self.index.get(&k).expect("enumerated group is closed under products")
    }

    pub(crate) fn inv(&self, a: u32) -> u32 {
        let k = self.codec.inv(self.elements[a as usize]).expect("group elements are invertible");
        *self.index.get(&k).expect("enumerated group is closed under inverses")
    }

    /// Unpacked `(s, s^-1)` for repeated conjugation by `s`.
    pub(crate) fn conjugator(&self, s: u32) -> Conjugator {
        let mut c = Conjugator {
            s: [0; packed::MAX_SIDE * packed::MAX_SIDE],
            si: [0; packed::MAX_SIDE * packed::MAX_SIDE],
        };
        self.codec.unpack(self.elements[s as usize], &mut c.s);
        self.codec.unpack(self.elements[self.inv(s) as usize], &mut c.si);
        c
    }

    /// `s a s^-1`.
    #[inline]
    pub(crate) fn conj(&self, c: &Conjugator, a: u32) -> u32 {
        let k = self.codec.conj_unpacked(&c.s, self.elements[a as usize], &c.si);
        *self.index.get(&k).expect("enumerated group is closed under conjugation")
    }

    pub(crate) fn identity(&self) -> u32 {
        0
    }

    /// Element order, found by repeated multiplication.
    pub fn element_order(&self, a: u32) -> u64 {
        let mut k = 1;
        let mut cur = a;
        while cur != self.identity() {
            cur = self.mul(cur, a);
            k += 1;
        }
        k
    }

    /// Indices of the elements of exact order `p` (`p` prime).
    pub fn elements_of_prime_order(&self, p: u64) -> Vec<u32> {
        let id = self.codec.identity();
        (0..self.elements.len() as u32)
            .filter(|&i| {
                let k = self.elements[i as usize];
                k != id && self.codec.pow(k, p) == id
            })
            .collect()
    }

    /// Re-index a closed subset of this group as a group of its own.
    pub(crate) fn restrict_to(&self, members: &[u32], gens: &[u32]) -> EnumeratedGroup {
        let mut elements = Vec::with_capacity(members.len());
        let mut index = FxHashMap::default();
        index.reserve(members.len());
        let id = self.codec.identity();
        elements.push(id);
        index.insert(id, 0);
        for &m in members {
            let k = self.elements[m as usize];
            if k != id {
                index.insert(k, elements.len() as u32);
                elements.push(k);
            }
        }
        let generators = gens.iter().map(|&g| index[&self.elements[g as usize]]).collect();
        EnumeratedGroup {
            field: self.field.clone(),
            n: self.n,
            codec: self.codec,
            elements,
            index,
            generators,
        }
    }
}

/// The subgroup generated by all elements of exact order `ell`.
pub fn plus_subgroup(e: &EnumeratedGroup, ell: u64) -> EnumeratedGroup {
    let mut sub = composition::Subgroup::trivial(e);
    for u in e.elements_of_prime_order(ell) {
        sub.add_generator(e, u);
    }
    e.restrict_to(sub.elements(), sub.generators())
}

/// Group order from a base and strong generating set of the permutation
/// action on nonzero vectors of F_l^{nf}.
pub fn group_order(g: &GroupInstance) -> Result<u128, GrpError> {
    group_order_with_bound(g, DEFAULT_DOMAIN_BOUND)
}

pub fn group_order_with_bound(g: &GroupInstance, bound: u64) -> Result<u128, GrpError> {
    let side = g.restricted_side() as u32;
    let ell = g.ell();
    let size = ell
        .checked_pow(side)
        .map(|v| v - 1)
        .filter(|&v| v <= bound)
        .ok_or(GrpError::DomainTooLarge {
            size: ell.saturating_pow(side).saturating_sub(1),
            bound,
        })?;
    let perms: Vec<Perm> = g
        .restricted_generators()
        .iter()
        .map(|m| vector_action(m, ell, side as usize, size))
        .collect();
    Ok(StabilizerChain::new(size as usize, &perms).order())
}

/// Permutation of `F_l^side \ {0}` induced by `v -> m v`; point `k` is the
/// vector with base-`l` digits of `k + 1`.
fn vector_action(m: &Mat, ell: u64, side: usize, size: u64) -> Perm {
    let mut out = Vec::with_capacity(size as usize);
    let mut v = vec![0u64; side];
    for k in 1..=size {
        let mut t = k;
        for d in v.iter_mut() {
            *d = t % ell;
            t /= ell;
        }
        let mut img = 0u64;
        for i in (0..side).rev() {
            let mut acc = 0u64;
            for (j, &vj) in v.iter().enumerate() {
                acc += m.get(i, j).0 as u64 * vj;
            }
            img = img * ell + acc % ell;
        }
        out.push((img - 1) as u32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{make_field, FieldElement};

    fn sl2(p: u64) -> GroupInstance {
        let k = Field::prime(p).unwrap();
        let gens = vec![k.mat_from_ints(&[&[1, 1], &[0, 1]]), k.mat_from_ints(&[&[1, 0], &[1, 1]])];
        GroupInstance::new(k, 2, gens).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let k = Field::prime(7).unwrap();
        let triv = GroupInstance::new(k, 2, vec![Mat::identity(2)]).unwrap();
        assert_eq!(enumerate(&triv, 10).unwrap().order(), 1);
        assert_eq!(enumerate(&sl2(5), 1000).unwrap().order(), 5 * 24);
        assert_eq!(enumerate(&sl2(7), 1000).unwrap().order(), 7 * 48);
        assert_eq!(enumerate(&sl2(7), 100).unwrap_err(), GrpError::CapExceeded { cap: 100 });
    }

    #[test]
    fn group_order_examples() {
        assert_eq!(group_order(&sl2(5)).unwrap(), 120);
        let k = Field::prime(7).unwrap();
        let t = GroupInstance::new(k.clone(), 2, vec![k.mat_from_ints(&[&[3, 0], &[0, 5]])]).unwrap();
        assert_eq!(group_order(&t).unwrap(), 6);
        let triv = GroupInstance::new(k, 3, vec![Mat::identity(3)]).unwrap();
        assert_eq!(group_order(&triv).unwrap(), 1);
        assert!(matches!(
            group_order_with_bound(&sl2(7), 10),
            Err(GrpError::DomainTooLarge { size: 48, bound: 10 })
        ));
    }

    #[test]
    fn instance_validation() {
        let k = Field::prime(7).unwrap();
        assert_eq!(GroupInstance::new(k.clone(), 2, vec![]).unwrap_err(), GrpError::NoGenerators);
        let sing = k.mat_from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(
            GroupInstance::new(k.clone(), 2, vec![Mat::identity(2), sing]).unwrap_err(),
            GrpError::NotInvertible(1)
        );
        assert!(matches!(
            GroupInstance::new(k, 2, vec![Mat::identity(3)]),
            Err(GrpError::SideMismatch { index: 0, .. })
        ));
    }

    #[test]
    fn plus_subgroup_examples() {
        let k = Field::prime(7).unwrap();
        let e = enumerate(&sl2(7), 1000).unwrap();
        let plus = plus_subgroup(&e, 7);
        assert_eq!(plus.order(), 336);

        let torus = GroupInstance::new(k.clone(), 2, vec![k.mat_from_ints(&[&[3, 0], &[0, 5]])]).unwrap();
        assert_eq!(plus_subgroup(&enumerate(&torus, 100).unwrap(), 7).order(), 1);

        let borel = GroupInstance::new(
            k.clone(),
            2,
            vec![k.mat_from_ints(&[&[3, 0], &[0, 5]]), k.mat_from_ints(&[&[1, 1], &[0, 1]])],
        )
        .unwrap();
        let b = enumerate(&borel, 100).unwrap();
        assert_eq!(b.order(), 42);
        let u = plus_subgroup(&b, 7);
        assert_eq!(u.order(), 7);
        // normality, exhaustively
        for i in 0..b.order() as u32 {
            for m in u.elements() {
                let h = b.element(i as usize);
                let c = k.mat_mul(&k.mat_mul(&h, &m), &k.mat_inv(&h).unwrap());
                assert!(u.contains(&c));
            }
        }
    }

    #[test]
    fn extension_field_groups() {
        let k = make_field(5, 2).unwrap();
        // t = 1 + x; t^2 is not in F_5 so the conjugates of u span F_25
        let t = k.add(k.generator(), FieldElement::ONE);
        let ord = (1..=24u64).find(|&e| k.pow(t, e) == FieldElement::ONE).unwrap();
        let a = Mat::from_entries(2, vec![t, k.from_int(0), k.from_int(0), k.inv(t).unwrap()]).unwrap();
        let u = k.mat_from_ints(&[&[1, 1], &[0, 1]]);
        let g = GroupInstance::new(k, 2, vec![a, u]).unwrap();
        assert_eq!(group_order(&g).unwrap(), 25 * ord as u128);
        assert_eq!(enumerate(&g, 10_000).unwrap().order(), 25 * ord);
    }
}
