//! Generator sets for the groups the self-test and the examples use:
//! special linear groups, their Borel, torus, unipotent, Levi and parabolic
//! subgroups, principal SL_2's, and the isometry groups of small forms.

use crate::certify::{AmbientSpec, FieldSpec};
use crate::gf::{make_field, Field, FieldElement, Mat};
use crate::grp::GroupInstance;
use crate::lietypes::LieTypeTag;

fn prime_field(ell: u64) -> Field {
    Field::prime(ell).expect("corpus primes are prime")
}

/// Smallest generator of the multiplicative group of F_l.
pub fn primitive_root(k: &Field) -> FieldElement {
    let q1 = k.order() - 1;
    k.elements()
        .skip(1)
        .find(|&a| (1..q1).all(|e| q1 % e != 0 || k.pow(a, e) != FieldElement::ONE))
        .expect("multiplicative group is cyclic")
}

/// `1 + a E_ij`.
pub fn elementary(n: usize, i: usize, j: usize, a: FieldElement) -> Mat {
    let mut m = Mat::identity(n);
    m.set(i, j, a);
    m
}

fn diag_units(k: &Field, n: usize, i: usize, t: FieldElement) -> Mat {
    // t at i, t^-1 at i + 1
    let mut d = vec![FieldElement::ONE; n];
    d[i] = t;
    d[i + 1] = k.inv(t).expect("nonzero");
    k.diag(&d)
}

fn instance(k: Field, n: usize, gens: Vec<Mat>) -> GroupInstance {
    GroupInstance::new(k, n, gens).expect("corpus generators are invertible")
}

pub fn ambient(tags: &[&str], prime: u64, ext_degree: u32) -> AmbientSpec {
    AmbientSpec::new(
        tags.iter().map(|t| t.parse::<LieTypeTag>().expect("valid tag")).collect(),
        FieldSpec { prime, ext_degree },
    )
    .expect("nonempty")
}

/// SL_m(F_{l^f}) from the root elements `1 + x^k E_ij`.
pub fn sl(m: usize, ell: u64, f: usize) -> GroupInstance {
    let k = make_field(ell, f).expect("small field");
    let x = k.generator();
    let mut gens = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            for e in 0..f {
                gens.push(elementary(m, i, j, k.pow(x, e as u64)));
            }
        }
    }
    let tag = format!("A_{}", m - 1);
    instance(k, m, gens).with_ambient(ambient(&[&tag], ell, f as u32))
}

/// The same group as `sl(m, l, f)`, written as `mf x mf` matrices over F_l.
pub fn sl_restricted(m: usize, ell: u64, f: usize) -> GroupInstance {
    let g = sl(m, ell, f);
    let gens = g.restricted_generators();
    let ambient = g.ambient.clone().expect("sl carries an ambient");
    instance(prime_field(ell), m * f, gens).with_ambient(ambient)
}

pub fn torus(m: usize, ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    let w = primitive_root(&k);
    let gens = (0..m - 1).map(|i| diag_units(&k, m, i, w)).collect();
    instance(k, m, gens)
}

pub fn unipotent(m: usize, ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    let gens = (0..m - 1).map(|i| elementary(m, i, i + 1, FieldElement::ONE)).collect();
    instance(k, m, gens)
}

pub fn borel(m: usize, ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    let w = primitive_root(&k);
    let mut gens: Vec<Mat> = (0..m - 1).map(|i| diag_units(&k, m, i, w)).collect();
    gens.extend((0..m - 1).map(|i| elementary(m, i, i + 1, FieldElement::ONE)));
    instance(k, m, gens)
}

/// S(GL_2 x GL_1) inside SL_3.
pub fn levi_21(ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    let w = primitive_root(&k);
    let gens = vec![
        elementary(3, 0, 1, FieldElement::ONE),
        elementary(3, 1, 0, FieldElement::ONE),
        k.diag(&[w, FieldElement::ONE, k.inv(w).expect("unit")]),
    ];
    instance(k, 3, gens)
}

/// Stabilizer of a plane in SL_3: the Levi above with its unipotent radical.
pub fn parabolic_21(ell: u64) -> GroupInstance {
    let mut g = levi_21(ell);
    g.generators.push(elementary(3, 0, 2, FieldElement::ONE));
    g.generators.push(elementary(3, 1, 2, FieldElement::ONE));
    g
}

/// SL_2 x SL_2 as diagonal blocks of SL_4.
pub fn block_sl2_sl2(ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    let gens = vec![
        elementary(4, 0, 1, FieldElement::ONE),
        elementary(4, 1, 0, FieldElement::ONE),
        elementary(4, 2, 3, FieldElement::ONE),
        elementary(4, 3, 2, FieldElement::ONE),
    ];
    instance(k, 4, gens).with_ambient(ambient(&["A_1", "A_1"], ell, 1))
}

/// `Sym^{n-1}` of a 2x2 matrix: action on binary forms of degree `n - 1`
/// through `x -> a x + c y`, `y -> b x + d y`.
pub fn sym_power(k: &Field, g: &Mat, n: usize) -> Mat {
    let deg = n - 1;
    let (a, b, c, d) = (g.get(0, 0), g.get(0, 1), g.get(1, 0), g.get(1, 1));
    // polynomial in x, y as coefficients of x^{deg-i} y^i
    let pow_lin = |p: FieldElement, q: FieldElement, e: usize| {
        let mut poly = vec![FieldElement::ONE];
        for _ in 0..e {
            let mut next = vec![FieldElement::ZERO; poly.len() + 1];
            for (i, &cf) in poly.iter().enumerate() {
                next[i] = k.add(next[i], k.mul(cf, p));
                next[i + 1] = k.add(next[i + 1], k.mul(cf, q));
            }
            poly = next;
        }
        poly
    };
    let mut m = Mat::zero(n);
    for j in 0..n {
        let u = pow_lin(a, c, deg - j);
        let v = pow_lin(b, d, j);
        for (s, &us) in u.iter().enumerate() {
            for (t, &vt) in v.iter().enumerate() {
                let i = s + t;
                m.set(i, j, k.add(m.get(i, j), k.mul(us, vt)));
            }
        }
    }
    m
}

/// Image of SL_2(F_l) in SL_n under the irreducible representation of
/// dimension `n` (requires `l >= n`).
pub fn principal_sl2(n: usize, ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    let e = k.mat_from_ints(&[&[1, 1], &[0, 1]]);
    let f = k.mat_from_ints(&[&[1, 0], &[1, 1]]);
    let gens = vec![sym_power(&k, &e, n), sym_power(&k, &f, n)];
    instance(k, n, gens)
}

/// Frobenius `a -> a^l` applied entrywise.
fn frobenius(k: &Field, m: &Mat) -> Mat {
    let n = m.side();
    let entries = m.entries().iter().map(|&a| k.pow(a, k.ell())).collect();
    Mat::from_entries(n, entries).expect("same shape")
}

fn transpose(m: &Mat) -> Mat {
    let n = m.side();
    let mut t = Mat::zero(n);
    for i in 0..n {
        for j in 0..n {
            t.set(j, i, m.get(i, j));
        }
    }
    t
}

/// A few unitriangular matrices (upper and lower) `g` with
/// `sigma(g)^T J g = J`, where `sigma` is the identity or the Frobenius of a
/// quadratic extension. Two spread-out elements of each unipotent group are
/// enough to generate; keeping all of them makes stabilizer chains crawl.
fn form_unipotents(k: &Field, form: &Mat, hermitian: bool) -> Vec<Mat> {
    let n = form.side();
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let q = k.order();
    let total = q.pow(slots.len() as u32);
    let mut out = Vec::new();
    for upper in [true, false] {
        let mut found = Vec::new();
        for code in 1..total {
            let mut m = Mat::identity(n);
            let mut c = code;
            for &(i, j) in &slots {
                let v = FieldElement((c % q) as u32);
                c /= q;
                if upper {
                    m.set(i, j, v);
                } else {
                    m.set(j, i, v);
                }
            }
            let s = if hermitian { frobenius(k, &m) } else { m.clone() };
            if k.mat_mul(&k.mat_mul(&transpose(&s), form), &m) == *form {
                found.push(m);
            }
        }
        let step = (found.len() / 2).max(1);
        out.extend(found.into_iter().step_by(step).take(2));
    }
    out
}

/// Sp_4(F_l) for the form with blocks `[[0, I], [-I, 0]]`, after a
/// reordering of coordinates that makes the upper unitriangular isometries
/// a Sylow subgroup.
pub fn sp4(ell: u64) -> GroupInstance {
    let k = prime_field(ell);
    // antidiagonal (1, 1, -1, -1): symplectic in the basis order e1, e2, f2, f1
    let form = k.mat_from_ints(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, -1, 0, 0], &[-1, 0, 0, 0]]);
    let gens = form_unipotents(&k, &form, false);
    instance(k, 4, gens).with_ambient(ambient(&["C_2"], ell, 1))
}

/// SU_3 over F_l, as matrices over F_{l^2} preserving the antidiagonal
/// Hermitian form.
pub fn su3(ell: u64) -> GroupInstance {
    let k = make_field(ell, 2).expect("small field");
    let form = Mat::from_entries(
        3,
        (0..9)
            .map(|i| if i == 2 || i == 4 || i == 6 { FieldElement::ONE } else { FieldElement::ZERO })
            .collect(),
    )
    .expect("3x3");
    let gens = form_unipotents(&k, &form, true);
    let mut a = ambient(&["A_2"], ell, 1);
    a.unitary = true;
    instance(k, 3, gens).with_ambient(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grp::group_order;
    use crate::lietypes::{chevalley_order, ChevalleyFamily};

    #[test]
    fn orders_by_stabilizer_chain() {
        assert_eq!(group_order(&sl(2, 7, 1)).unwrap(), 336);
        assert_eq!(group_order(&sl(2, 5, 2)).unwrap(), 15600);
        assert_eq!(group_order(&sl_restricted(2, 7, 2)).unwrap(), 117600);
        assert_eq!(group_order(&borel(3, 7)).unwrap(), 343 * 36);
        assert_eq!(group_order(&torus(3, 7)).unwrap(), 36);
        assert_eq!(group_order(&unipotent(3, 7)).unwrap(), 343);
        assert_eq!(group_order(&levi_21(7)).unwrap(), 336 * 6);
        assert_eq!(group_order(&parabolic_21(7)).unwrap(), 49 * 336 * 6);
        assert_eq!(group_order(&block_sl2_sl2(7)).unwrap(), 336 * 336);
        // PSL_2(7) in SL_3, SL_2(7) in SL_4
        assert_eq!(group_order(&principal_sl2(3, 7)).unwrap(), 168);
        assert_eq!(group_order(&principal_sl2(4, 7)).unwrap(), 336);
    }

    #[test]
    fn isometry_groups_match_formulas() {
        assert_eq!(
            group_order(&sp4(5)).unwrap(),
            chevalley_order(ChevalleyFamily::Sp(4), 5).unwrap()
        );
        assert_eq!(
            group_order(&su3(5)).unwrap(),
            chevalley_order(ChevalleyFamily::Su(3), 5).unwrap()
        );
    }

    #[test]
    fn sym_power_is_multiplicative() {
        let k = prime_field(11);
        let a = k.mat_from_ints(&[&[2, 3], &[5, 7]]);
        let b = k.mat_from_ints(&[&[1, 4], &[0, 6]]);
        for n in 1..5 {
            let lhs = sym_power(&k, &k.mat_mul(&a, &b), n);
            let rhs = k.mat_mul(&sym_power(&k, &a, n), &sym_power(&k, &b, n));
            assert_eq!(lhs, rhs, "n = {n}");
        }
    }
}
