//! Exact arithmetic in F_l and F_{l^f}, dense square matrices over those
//! fields, and Weil restriction of matrices down to the prime field.
//!
//! A field element is stored as one integer in `[0, l^f)` whose base-`l`
//! digits are its coefficients in the power basis `1, x, ..., x^{f-1}` of
//! the defining modulus. Multiplication in proper extensions goes through
//! discrete-log tables built once per field.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `l^f` for which a field is built.
pub const MAX_FIELD_SIZE: u64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is below 5")]
    CharacteristicTooSmall(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("field of size {0} exceeds the supported bound")]
    FieldTooLarge(u64),
    #[error("matrix is singular")]
    Singular,
    #[error("element order exceeds cap {0}")]
    Overflow(u64),
    #[error("matrix side mismatch: {0} vs {1}")]
    SideMismatch(usize, usize),
    #[error("matrix is not square or has {0} entries")]
    BadShape(usize),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of some `Field`. Meaningless without the field it came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Debug)]
struct FieldInner {
    ell: u32,
    f: usize,
    q: u32,
    /// Monic modulus, low degree first, length `f + 1`.
    modulus: Vec<u32>,
    /// `powers[i] = g^i` for a fixed primitive element `g` (extensions only).
    powers: Vec<u32>,
    logs: Vec<u32>,
}

/// The field F_{l^f} together with its defining modulus.
///
/// Cloning is cheap; all clones share the same tables.
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.inner.ell, self.inner.f)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.ell == other.inner.ell && self.inner.modulus == other.inner.modulus
    }
}

impl Eq for Field {}

fn digits(mut v: u32, ell: u32, f: usize) -> Vec<u32> {
    let mut out = vec![0; f];
    for d in out.iter_mut() {
        *d = v % ell;
        v /= ell;
    }
    out
}

fn undigits(d: &[u32], ell: u32) -> u32 {
    d.iter().rev().fold(0, |acc, &c| acc * ell + c)
}

/// `a * b mod modulus` on coefficient vectors of length `f`.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], ell: u32) -> Vec<u32> {
    let f = modulus.len() - 1;
    let p = ell as u64;
    let mut prod = vec![0u64; 2 * f];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
        }
    }
    for k in (f..2 * f).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for (i, &m) in modulus[..f].iter().enumerate() {
            let idx = k - f + i;
            prod[idx] = (prod[idx] + (p - c) * m as u64) % p;
        }
    }
    prod.truncate(f);
    prod.into_iter().map(|c| c as u32).collect()
}

/// Remainder of `num` modulo the monic `den` over F_ell.
fn poly_rem(num: &[u32], den: &[u32], ell: u32) -> Vec<u32> {
    let p = ell as u64;
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = r.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = r.len() - dd;
        for (i, &c) in den[..dd].iter().enumerate() {
            r[shift + i] = (r[shift + i] + (p - lead) * c as u64 % p) % p;
        }
    }
    r.into_iter().map(|c| c as u32).collect()
}

/// Exhaustive trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(poly: &[u32], ell: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (ell as u64).pow(d as u32);
        for idx in 0..count {
            let mut div = digits(idx as u32, ell, d);
            div.push(1);
            if poly_rem(poly, &div, ell).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Build F_{ell^f}. The modulus is the first monic irreducible polynomial of
/// degree `f` when candidates `x^f + c_{f-1} x^{f-1} + ... + c_0` are ordered
/// by the integer `sum c_i ell^i`, i.e. compared from `c_{f-1}` down to `c_0`.
pub fn make_field(ell: u64, f: usize) -> Result<Field, GfError> {
    if !is_prime(ell) {
        return Err(GfError::NotPrime(ell));
    }
    if ell < 5 {
        return Err(GfError::CharacteristicTooSmall(ell));
    }
    if f == 0 {
        return Err(GfError::DegreeZero);
    }
    let q = (ell as u128).checked_pow(f as u32).unwrap_or(u128::MAX);
    if q > MAX_FIELD_SIZE as u128 {
        return Err(GfError::FieldTooLarge(q.min(u64::MAX as u128) as u64));
    }
    let (ell, q) = (ell as u32, q as u32);
    let modulus = (0..q)
        .map(|idx| {
            let mut m = digits(idx, ell, f);
            m.push(1);
            m
        })
        .find(|m| f == 1 || is_irreducible(m, ell))
        .expect("an irreducible polynomial of every degree exists");

    let (powers, logs) = if f == 1 {
        (Vec::new(), Vec::new())
    } else {
        log_tables(ell, f, q, &modulus)
    };
    Ok(Field {
        inner: Arc::new(FieldInner {
            ell,
            f,
            q,
            modulus,
            powers,
            logs,
        }),
    })
}

fn log_tables(ell: u32, f: usize, q: u32, modulus: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let one = {
        let mut d = vec![0; f];
        d[0] = 1;
        d
    };
    for g in 2..q {
        let gd = digits(g, ell, f);
        let mut powers = Vec::with_capacity(q as usize - 1);
        let mut cur = one.clone();
        loop {
            powers.push(undigits(&cur, ell));
            cur = poly_mulmod(&cur, &gd, modulus, ell);
            if cur == one {
                break;
            }
        }
        if powers.len() == q as usize - 1 {
            let mut logs = vec![0u32; q as usize];
            for (i, &p) in powers.iter().enumerate() {
                logs[p as usize] = i as u32;
            }
            return (powers, logs);
        }
    }
    unreachable!("multiplicative group of a finite field is cyclic")
}

impl Field {
    pub fn prime(ell: u64) -> Result<Field, GfError> {
        make_field(ell, 1)
    }

    pub fn ell(&self) -> u64 {
        self.inner.ell as u64
    }

    pub fn degree(&self) -> usize {
        self.inner.f
    }

    pub fn order(&self) -> u64 {
        self.inner.q as u64
    }

    /// Monic modulus coefficients, low degree first.
    pub fn modulus(&self) -> &[u32] {
        &self.inner.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.inner.f == 1
    }

    pub fn prime_field(&self) -> Field {
        if self.is_prime_field() {
            self.clone()
        } else {
            make_field(self.ell(), 1).expect("prime subfield of a valid field")
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.inner.q).map(FieldElement)
    }

    /// The image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.inner.ell as i64) as u32)
    }

    /// Element with the given power-basis coefficients (reduced mod l).
    pub fn from_coeffs(&self, coeffs: &[i64]) -> FieldElement {
        let ell = self.inner.ell as i64;
        let mut d = vec![0u32; self.inner.f];
        for (i, &c) in coeffs.iter().enumerate().take(self.inner.f) {
            d[i] = c.rem_euclid(ell) as u32;
        }
        FieldElement(undigits(&d, self.inner.ell))
    }

    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        digits(a.0, self.inner.ell, self.inner.f)
    }

    /// The primitive element `x` of the power basis (or 1 in a prime field).
    pub fn generator(&self) -> FieldElement {
        if self.is_prime_field() {
            FieldElement::ONE
        } else {
            FieldElement(self.inner.ell)
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let ell = self.inner.ell;
        if self.inner.f == 1 {
            let s = a.0 + b.0;
            return FieldElement(if s >= ell { s - ell } else { s });
        }
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0u32, 1u32);
        for _ in 0..self.inner.f {
            out += ((x % ell + y % ell) % ell) * place;
            x /= ell;
            y /= ell;
            place = place.wrapping_mul(ell);
        }
        FieldElement(out)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let ell = self.inner.ell;
        if self.inner.f == 1 {
            return FieldElement(if a.0 == 0 { 0 } else { ell - a.0 });
        }
        let (mut x, mut out, mut place) = (a.0, 0u32, 1u32);
        for _ in 0..self.inner.f {
            out += ((ell - x % ell) % ell) * place;
            x /= ell;
            place = place.wrapping_mul(ell);
        }
        FieldElement(out)
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let inner = &*self.inner;
        if inner.f == 1 {
            return FieldElement(((a.0 as u64 * b.0 as u64) % inner.ell as u64) as u32);
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        let n = inner.q - 1;
        let e = (inner.logs[a.0 as usize] + inner.logs[b.0 as usize]) % n;
        FieldElement(inner.powers[e as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            return None;
        }
        let inner = &*self.inner;
        if inner.f == 1 {
            return Some(FieldElement(
                pow_mod(a.0 as u64, inner.ell as u64 - 2, inner.ell as u64) as u32,
            ));
        }
        let n = inner.q - 1;
        let e = (n - inner.logs[a.0 as usize]) % n;
        Some(FieldElement(inner.powers[e as usize]))
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplication-by-`a` on F_{l^f} as an `f x f` matrix over F_l,
    /// columns indexed by the power basis. Entries are prime-field residues.
    pub fn mult_matrix(&self, a: FieldElement) -> Vec<u32> {
        let f = self.inner.f;
        let mut out = vec![0u32; f * f];
        let mut basis = FieldElement::ONE;
        let x = self.generator();
        for col in 0..f {
            let image = self.coeffs(self.mul(a, basis));
            for (row, c) in image.into_iter().enumerate() {
                out[row * f + col] = c;
            }
            basis = self.mul(basis, x);
        }
        out
    }
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Dense square matrix over a `Field`, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat {
    n: usize,
    entries: Vec<FieldElement>,
}

impl Mat {
    pub fn from_entries(n: usize, entries: Vec<FieldElement>) -> Result<Mat, GfError> {
        if entries.len() != n * n {
            return Err(GfError::BadShape(entries.len()));
        }
        Ok(Mat { n, entries })
    }

    pub fn zero(n: usize) -> Mat {
        Mat {
            n,
            entries: vec![FieldElement::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zero(n);
        for i in 0..n {
            m.entries[i * n + i] = FieldElement::ONE;
        }
        m
    }

    /// Matrix unit `E_{ij}` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Mat {
        let mut m = Mat::zero(n);
        m.entries[i * n + j] = FieldElement::ONE;
        m
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.entries[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| self.get(i, j) == if i == j { FieldElement::ONE } else { FieldElement::ZERO })
        })
    }
}

impl Field {
    /// Matrix from integer rows; entries reduced into the prime subfield.
    pub fn mat_from_ints(&self, rows: &[&[i64]]) -> Mat {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix literal must be square");
            entries.extend(r.iter().map(|&v| self.from_int(v)));
        }
        Mat { n, entries }
    }

    pub fn diag(&self, d: &[FieldElement]) -> Mat {
        let mut m = Mat::zero(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn mat_add(&self, a: &Mat, b: &Mat) -> Mat {
        debug_assert_eq!(a.n, b.n);
        Mat {
            n: a.n,
            entries: a
                .entries
                .iter()
                .zip(&b.entries)
                .map(|(&x, &y)| self.add(x, y))
                .collect(),
        }
    }

    pub fn mat_sub(&self, a: &Mat, b: &Mat) -> Mat {
        debug_assert_eq!(a.n, b.n);
        Mat {
            n: a.n,
            entries: a
                .entries
                .iter()
                .zip(&b.entries)
                .map(|(&x, &y)| self.sub(x, y))
                .collect(),
        }
    }

    pub fn mat_scale(&self, t: FieldElement, a: &Mat) -> Mat {
        Mat {
            n: a.n,
            entries: a.entries.iter().map(|&x| self.mul(t, x)).collect(),
        }
    }

    pub fn mat_mul(&self, a: &Mat, b: &Mat) -> Mat {
        debug_assert_eq!(a.n, b.n);
        let n = a.n;
        let mut out = Mat::zero(n);
        if self.is_prime_field() {
            let p = self.ell();
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0u64;
                    for k in 0..n {
                        acc += a.entries[i * n + k].0 as u64 * b.entries[k * n + j].0 as u64;
                    }
                    out.entries[i * n + j] = FieldElement((acc % p) as u32);
                }
            }
            return out;
        }
        for i in 0..n {
            for k in 0..n {
                let x = a.entries[i * n + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let prod = self.mul(x, b.entries[k * n + j]);
                    out.entries[i * n + j] = self.add(out.entries[i * n + j], prod);
                }
            }
        }
        out
    }

    pub fn mat_pow(&self, a: &Mat, mut e: u64) -> Mat {
        let mut base = a.clone();
        let mut acc = Mat::identity(a.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mat_mul(&acc, &base);
            }
            base = self.mat_mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `a b - b a`.
    pub fn bracket(&self, a: &Mat, b: &Mat) -> Mat {
        self.mat_sub(&self.mat_mul(a, b), &self.mat_mul(b, a))
    }

    pub fn trace(&self, a: &Mat) -> FieldElement {
        (0..a.n).fold(FieldElement::ZERO, |acc, i| self.add(acc, a.get(i, i)))
    }

    pub fn mat_inv(&self, a: &Mat) -> Result<Mat, GfError> {
        let n = a.n;
        let mut m = a.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.get(r, col).is_zero()).ok_or(GfError::Singular)?;
            if pivot != col {
                for j in 0..n {
                    m.entries.swap(pivot * n + j, col * n + j);
                    inv.entries.swap(pivot * n + j, col * n + j);
                }
            }
            let s = self.inv(m.get(col, col)).expect("nonzero pivot");
            for j in 0..n {
                m.entries[col * n + j] = self.mul(s, m.entries[col * n + j]);
                inv.entries[col * n + j] = self.mul(s, inv.entries[col * n + j]);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = m.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let t = self.mul(factor, m.entries[col * n + j]);
                    m.entries[r * n + j] = self.sub(m.entries[r * n + j], t);
                    let t = self.mul(factor, inv.entries[col * n + j]);
                    inv.entries[r * n + j] = self.sub(inv.entries[r * n + j], t);
                }
            }
        }
        Ok(inv)
    }

    pub fn det(&self, a: &Mat) -> FieldElement {
        let n = a.n;
        let mut m = a.clone();
        let mut det = FieldElement::ONE;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return FieldElement::ZERO;
            };
            if pivot != col {
                for j in 0..n {
                    m.entries.swap(pivot * n + j, col * n + j);
                }
                det = self.neg(det);
            }
            let p = m.get(col, col);
            det = self.mul(det, p);
            let pinv = self.inv(p).expect("nonzero pivot");
            for r in col + 1..n {
                let factor = self.mul(m.get(r, col), pinv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let t = self.mul(factor, m.entries[col * n + j]);
                    m.entries[r * n + j] = self.sub(m.entries[r * n + j], t);
                }
            }
        }
        det
    }

    pub fn is_invertible(&self, a: &Mat) -> bool {
        !self.det(a).is_zero()
    }

    /// Least `k >= 1` with `m^k = 1`.
    pub fn mat_order(&self, m: &Mat, cap: u64) -> Result<u64, GfError> {
        if !self.is_invertible(m) {
            return Err(GfError::Singular);
        }
        let mut acc = m.clone();
        let mut k = 1;
        while !acc.is_identity() {
            k += 1;
            if k > cap {
                return Err(GfError::Overflow(cap));
            }
            acc = self.mat_mul(&acc, m);
        }
        Ok(k)
    }

    /// Replace each entry by its `f x f` multiplication matrix, giving a matrix
    /// of side `n f` over the prime field.
    pub fn weil_restrict(&self, m: &Mat) -> Mat {
        let f = self.degree();
        if f == 1 {
            return m.clone();
        }
        let n = m.n;
        let big = n * f;
        let mut out = Mat::zero(big);
        for i in 0..n {
            for j in 0..n {
                let block = self.mult_matrix(m.get(i, j));
                for r in 0..f {
                    for c in 0..f {
                        out.entries[(i * f + r) * big + j * f + c] = FieldElement(block[r * f + c]);
                    }
                }
            }
        }
        out
    }

    /// Inverse of `weil_restrict` on its image: reads each block's first column.
    pub fn weil_unrestrict(&self, m: &Mat) -> Mat {
        let f = self.degree();
        if f == 1 {
            return m.clone();
        }
        let n = m.n / f;
        let mut out = Mat::zero(n);
        for i in 0..n {
            for j in 0..n {
                let coeffs: Vec<i64> = (0..f).map(|r| m.get(i * f + r, j * f).0 as i64).collect();
                out.set(i, j, self.from_coeffs(&coeffs));
            }
        }
        out
    }
}
