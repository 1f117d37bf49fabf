//! Subgroups of an enumerated group and the composition-series oracle.
//!
//! Composition factors of `H/K` (with `K` normal in `H`) are found by
//! looking for a normal subgroup `M` of `H` strictly between `K` and `H`.
//! Any such `M` contains an element whose order modulo `K` is prime, so it
//! suffices to try `M = <K, x^H>` for one `x` per conjugacy class of `H`
//! with prime order modulo `K`. When every such closure is all of `H`, the
//! quotient is simple and is classified by its order.

use crate::gf::is_prime;
use crate::lietypes::{shared_tables, CompositionFactor, LieTables, LieTypeError};

use super::{Conjugator, EnumeratedGroup, GrpError, DEFAULT_ORACLE_CAP};

/// A subgroup stored as a membership map over the ambient group's indices.
#[derive(Clone)]
pub(crate) struct Subgroup {
    member: Vec<bool>,
    elems: Vec<u32>,
    gens: Vec<u32>,
}

impl Subgroup {
    pub(crate) fn trivial(g: &EnumeratedGroup) -> Subgroup {
        let mut member = vec![false; g.order() as usize];
        member[g.identity() as usize] = true;
        Subgroup {
            member,
            elems: vec![g.identity()],
            gens: Vec::new(),
        }
    }

    pub(crate) fn whole(g: &EnumeratedGroup) -> Subgroup {
        Subgroup {
            member: vec![true; g.order() as usize],
            elems: (0..g.order() as u32).collect(),
            gens: g.generator_indices().to_vec(),
        }
    }

    pub(crate) fn order(&self) -> u64 {
        self.elems.len() as u64
    }

    pub(crate) fn contains(&self, x: u32) -> bool {
        self.member[x as usize]
    }

    pub(crate) fn elements(&self) -> &[u32] {
        &self.elems
    }

    pub(crate) fn generators(&self) -> &[u32] {
        &self.gens
    }

    /// Dimino's step: the new subgroup is a union of right cosets of the old
    /// one, and a union of right cosets closed under right multiplication by
    /// the generators is the generated subgroup.
    pub(crate) fn add_generator(&mut self, g: &EnumeratedGroup, c: u32) {
        self.add_generator_until(g, c, &mut |_, _| false);
    }

    /// As `add_generator`, but gives up (leaving `self` half-built) as soon
    /// as `stop(new_element, order_so_far)` holds. Returns whether it stopped.
    fn add_generator_until(&mut self, g: &EnumeratedGroup, c: u32, stop: &mut dyn FnMut(u32, usize) -> bool) -> bool {
        if self.member[c as usize] {
            return false;
        }
        let old_len = self.elems.len();
        self.gens.push(c);
        let mut reps = vec![g.identity()];
        let mut add_coset = |sub: &mut Subgroup, r: u32, reps: &mut Vec<u32>| -> bool {
            for i in 0..old_len {
                let y = g.mul(sub.elems[i], r);
                sub.member[y as usize] = true;
                sub.elems.push(y);
                if stop(y, sub.elems.len()) {
                    return true;
                }
            }
            reps.push(r);
            false
        };
        if add_coset(self, c, &mut reps) {
            return true;
        }
        let mut i = 0;
        while i < reps.len() {
            let r = reps[i];
            for k in 0..self.gens.len() {
                let y = g.mul(r, self.gens[k]);
                if !self.member[y as usize] && add_coset(self, y, &mut reps) {
                    return true;
                }
            }
            i += 1;
        }
        false
    }
}

/// Conjugacy classes of `h` under its own generators: `(representative,
/// size)` per class, and the class index of every element of `h`.
fn conjugacy_classes(g: &EnumeratedGroup, h: &Subgroup) -> (Vec<(u32, u64)>, Vec<u32>) {
    let conj: Vec<Conjugator> = h.gens.iter().map(|&s| g.conjugator(s)).collect();
    let mut class_of = vec![u32::MAX; g.order() as usize];
    let mut out = Vec::new();
    let mut queue = Vec::new();
    for &x in &h.elems {
        if class_of[x as usize] != u32::MAX {
            continue;
        }
        let id = out.len() as u32;
        class_of[x as usize] = id;
        queue.clear();
        queue.push(x);
        let mut head = 0;
        while head < queue.len() {
            let y = queue[head];
            for c in &conj {
                let z = g.conj(c, y);
                if class_of[z as usize] == u32::MAX {
                    class_of[z as usize] = id;
                    queue.push(z);
                }
            }
            head += 1;
        }
        out.push((x, queue.len() as u64));
    }
    (out, class_of)
}

/// Smallest `k` with `x^k` in `k_sub`.
fn order_modulo(g: &EnumeratedGroup, x: u32, k_sub: &Subgroup) -> u64 {
    let mut cur = x;
    let mut k = 1;
    while !k_sub.contains(cur) {
        cur = g.mul(cur, x);
        k += 1;
    }
    k
}

/// Conjugacy classes of `H`: representatives with sizes, and the class of
/// every element.
struct Classes {
    reps: Vec<(u32, u64)>,
    class_of: Vec<u32>,
}

/// `<K, x^H>`, or `None` as soon as it is known to be all of `H`: either
/// it passes half of `H`, or it meets a class whose normal closure is `H`.
fn normal_closure(
    g: &EnumeratedGroup,
    x: u32,
    h: &Subgroup,
    k_sub: &Subgroup,
    classes: &Classes,
    full: &[bool],
) -> Option<Subgroup> {
    let conj: Vec<Conjugator> = h.gens.iter().map(|&s| g.conjugator(s)).collect();
    let half = h.order() as usize / 2;
    let mut stop = |y: u32, len: usize| len > half || full[classes.class_of[y as usize] as usize];
    let mut m = k_sub.clone();
    let mut i = 0;
    let mut pending = vec![x];
    loop {
        for c in pending.drain(..) {
            if m.add_generator_until(g, c, &mut stop) {
                return None;
            }
        }
        if i == m.gens.len() {
            break;
        }
        let t = m.gens[i];
        pending.extend(conj.iter().map(|c| g.conj(c, t)));
        i += 1;
    }
    if m.order() == h.order() {
        None
    } else {
        Some(m)
    }
}

fn factors_of_quotient(
    g: &EnumeratedGroup,
    h: &Subgroup,
    k_sub: &Subgroup,
    known: Option<&Classes>,
    ell: u64,
    tables: &LieTables,
    out: &mut Vec<CompositionFactor>,
) -> Result<(), GrpError> {
    let index = h.order() / k_sub.order();
    if index == 1 {
        return Ok(());
    }
    if is_prime(index) {
        out.push(tables.classify_factor(index as u128, ell).map_err(lie_err)?);
        return Ok(());
    }
    let computed;
    let classes = match known {
        Some(c) => c,
        None => {
            let (reps, class_of) = conjugacy_classes(g, h);
            computed = Classes { reps, class_of };
            &computed
        }
    };
    let mut candidates: Vec<(u64, u64, u32)> = classes
        .reps
        .iter()
        .filter(|&&(x, _)| !k_sub.contains(x))
        .filter_map(|&(x, size)| {
            let p = order_modulo(g, x, k_sub);
            is_prime(p).then_some((size, p, x))
        })
        .collect();
    candidates.sort_unstable();
    let mut full = vec![false; classes.reps.len()];
    for (_, _, x) in candidates {
        match normal_closure(g, x, h, k_sub, classes, &full) {
            Some(m) => {
                factors_of_quotient(g, &m, k_sub, None, ell, tables, out)?;
                return factors_of_quotient(g, h, &m, Some(classes), ell, tables, out);
            }
            None => full[classes.class_of[x as usize] as usize] = true,
        }
    }
    out.push(tables.classify_factor(index as u128, ell).map_err(lie_err)?);
    Ok(())
}

fn lie_err(e: LieTypeError) -> GrpError {
    match e {
        LieTypeError::UnknownFactor(order) => GrpError::UnknownFactor(order),
        other => unreachable!("classification only reports unknown factors: {other}"),
    }
}

/// Composition factors of `e` (as a sorted multiset), with the default
/// tables and oracle cap.
pub fn composition_series(e: &EnumeratedGroup, ell: u64) -> Result<Vec<CompositionFactor>, GrpError> {
    composition_series_with(e, ell, shared_tables(), DEFAULT_ORACLE_CAP)
}

pub fn composition_series_with(
    e: &EnumeratedGroup,
    ell: u64,
    tables: &LieTables,
    cap: u64,
) -> Result<Vec<CompositionFactor>, GrpError> {
    if e.order() > cap {
        return Err(GrpError::CapExceeded { cap });
    }
    let mut out = Vec::new();
    factors_of_quotient(e, &Subgroup::whole(e), &Subgroup::trivial(e), None, ell, tables, &mut out)?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{make_field, Field, FieldElement, Mat};
    use crate::grp::{enumerate, GroupInstance};
    use crate::lietypes::{FactorKind, LieTypeTag};

    fn cyc(p: u64) -> CompositionFactor {
        CompositionFactor {
            kind: FactorKind::Cyclic { p },
            order: p as u128,
        }
    }

    fn inst(p: u64, rows: &[&[&[i64]]]) -> GroupInstance {
        let k = Field::prime(p).unwrap();
        let gens: Vec<Mat> = rows.iter().map(|r| k.mat_from_ints(r)).collect();
        GroupInstance::new(k, rows[0].len(), gens).unwrap()
    }

    #[test]
    fn sl2_f5() {
        let g = inst(5, &[&[&[1, 1], &[0, 1]], &[&[1, 0], &[1, 1]]]);
        let e = enumerate(&g, 1000).unwrap();
        let f = composition_series(&e, 5).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0], cyc(2));
        assert!(matches!(f[1].kind, FactorKind::LieCharEll { lie_type, f: 1, .. } if lie_type == LieTypeTag::a(1)));
        assert_eq!(f[1].order, 60);
    }

    #[test]
    fn s3_as_permutation_matrices() {
        let g = inst(
            7,
            &[
                &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]],
                &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]],
            ],
        );
        let e = enumerate(&g, 100).unwrap();
        assert_eq!(composition_series(&e, 7).unwrap(), vec![cyc(2), cyc(3)]);
    }

    #[test]
    fn abelian_non_cyclic() {
        // diag(+-1, +-1, +-1) over F_7: elementary abelian of order 8
        let g = inst(
            7,
            &[
                &[&[6, 0, 0], &[0, 1, 0], &[0, 0, 1]],
                &[&[1, 0, 0], &[0, 6, 0], &[0, 0, 1]],
                &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 6]],
            ],
        );
        let e = enumerate(&g, 100).unwrap();
        assert_eq!(composition_series(&e, 7).unwrap(), vec![cyc(2), cyc(2), cyc(2)]);
    }

    #[test]
    fn weil_restricted_sl2_f25() {
        let k = make_field(5, 2).unwrap();
        let x = k.generator();
        let u = Mat::from_entries(2, vec![FieldElement::ONE, FieldElement::ONE, FieldElement::ZERO, FieldElement::ONE]).unwrap();
        let ux = Mat::from_entries(2, vec![FieldElement::ONE, x, FieldElement::ZERO, FieldElement::ONE]).unwrap();
        let l = Mat::from_entries(2, vec![FieldElement::ONE, FieldElement::ZERO, FieldElement::ONE, FieldElement::ONE]).unwrap();
        let g = GroupInstance::new(k, 2, vec![u, ux, l]).unwrap();
        let e = enumerate(&g, 100_000).unwrap();
        assert_eq!(e.order(), 15600);
        let f = composition_series(&e, 5).unwrap();
        assert_eq!(f[0], cyc(2));
        assert!(matches!(f[1].kind, FactorKind::LieCharEll { f: 2, .. }));
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let g = inst(7, &[&[&[1, 1], &[0, 1]], &[&[1, 0], &[1, 1]]]);
        let e = enumerate(&g, 1000).unwrap();
        assert_eq!(
            composition_series_with(&e, 7, shared_tables(), 100),
            Err(GrpError::CapExceeded { cap: 100 })
        );
    }

    #[test]
    fn unknown_factor_is_reported() {
        // PSL_2(7) seen from characteristic 5 is named; a crippled catalogue
        // reports rather than guesses.
        let g = inst(7, &[&[&[1, 1], &[0, 1]], &[&[1, 0], &[1, 1]]]);
        let e = enumerate(&g, 1000).unwrap();
        let broken = LieTables::with_mutation(Some(crate::lietypes::Mutation::SlOrder));
        assert_eq!(
            composition_series_with(&e, 7, &broken, 1000),
            Err(GrpError::UnknownFactor(168))
        );
    }

    #[test]
    fn dimino_matches_bfs() {
        let g = inst(7, &[&[&[1, 1], &[0, 1]], &[&[1, 0], &[1, 1]]]);
        let e = enumerate(&g, 1000).unwrap();
        let mut s = Subgroup::trivial(&e);
        for &x in e.generator_indices() {
            s.add_generator(&e, x);
        }
        assert_eq!(s.order(), 336);
        let mut sorted = s.elements().to_vec();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 336);
    }
}
