//! Truncated exponential and logarithm of mod-l nilpotents, Lie-bracket
//! closure of harvested logarithms, the Killing-radical quotient, and the
//! rank of the resulting algebra.
//!
//! All spans are taken over the prime field: matrices over F_{l^f} are
//! Weil-restricted before any linear algebra happens.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FieldElement, Mat};
use crate::grp::{EnumeratedGroup, GroupInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("matrix is not nilpotent")]
    NotNilpotent,
    #[error("matrix is not unipotent")]
    NotUnipotent,
    #[error("characteristic {ell} is not above {bound}")]
    CharTooSmall { ell: u64, bound: u64 },
    #[error("seed list is empty")]
    EmptySeed,
}

fn factorial_inverse(field: &Field, k: u64) -> FieldElement {
    let fact = (1..=k).fold(FieldElement::ONE, |acc, i| field.mul(acc, field.from_int(i as i64)));
    field.inv(fact).expect("k! is a unit when l > k")
}

fn check_char(field: &Field, n: usize) -> Result<(), LieError> {
    if field.ell() <= n as u64 {
        return Err(LieError::CharTooSmall {
            ell: field.ell(),
            bound: n as u64,
        });
    }
    Ok(())
}

/// `1 + t x + (t x)^2 / 2! + ... + (t x)^{n-1} / (n-1)!` for nilpotent `x`.
pub fn nil_exp(field: &Field, x: &Mat, t: FieldElement) -> Result<Mat, LieError> {
    let n = x.side();
    check_char(field, n)?;
    if !field.mat_pow(x, n as u64).is_zero() {
        return Err(LieError::NotNilpotent);
    }
    let tx = field.mat_scale(t, x);
    let mut acc = Mat::identity(n);
    let mut power = Mat::identity(n);
    for k in 1..n as u64 {
        power = field.mat_mul(&power, &tx);
        if power.is_zero() {
            break;
        }
        acc = field.mat_add(&acc, &field.mat_scale(factorial_inverse(field, k), &power));
    }
    Ok(acc)
}

/// `(u-1) - (u-1)^2 / 2 + ... +- (u-1)^{n-1} / (n-1)` for unipotent `u`.
pub fn nil_log(field: &Field, u: &Mat) -> Result<Mat, LieError> {
    let n = u.side();
    check_char(field, n)?;
    let y = field.mat_sub(u, &Mat::identity(n));
    if !field.mat_pow(&y, n as u64).is_zero() {
        return Err(LieError::NotUnipotent);
    }
    let mut acc = Mat::zero(n);
    let mut power = Mat::identity(n);
    for k in 1..n as u64 {
        power = field.mat_mul(&power, &y);
        if power.is_zero() {
            break;
        }
        let mut c = field.inv(field.from_int(k as i64)).expect("k < l");
        if k % 2 == 0 {
            c = field.neg(c);
        }
        acc = field.mat_add(&acc, &field.mat_scale(c, &power));
    }
    Ok(acc)
}

/// Reduced row echelon form over F_l, grown one vector at a time.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    ell: u64,
    width: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub(crate) fn new(ell: u64, width: usize) -> Echelon {
        Echelon {
            ell,
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut [u32]) {
        let p = self.ell;
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            let c = v[piv] as u64;
            if c == 0 {
                continue;
            }
            for (x, &r) in v.iter_mut().zip(row) {
                *x = ((*x as u64 + (p - c) * r as u64) % p) as u32;
            }
        }
    }

    /// Adds `v` if it is outside the span; returns whether it was added.
    pub(crate) fn insert(&mut self, v: &[u32]) -> bool {
        debug_assert_eq!(v.len(), self.width);
        let p = self.ell;
        let mut w = v.to_vec();
        self.reduce(&mut w);
        let Some(piv) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = crate::gf::pow_mod(w[piv] as u64, p - 2, p);
        for x in w.iter_mut() {
            *x = (*x as u64 * s % p) as u32;
        }
        for row in self.rows.iter_mut() {
            let c = row[piv] as u64;
            if c == 0 {
                continue;
            }
            for (x, &r) in row.iter_mut().zip(&w) {
                *x = ((*x as u64 + (p - c) * r as u64) % p) as u32;
            }
        }
        let at = self.pivots.partition_point(|&q| q < piv);
        self.pivots.insert(at, piv);
        self.rows.insert(at, w);
        true
    }

    /// Coordinates of `v` in the row basis, if `v` lies in the span.
    pub(crate) fn coords(&self, v: &[u32]) -> Option<Vec<u32>> {
        let c: Vec<u32> = self.pivots.iter().map(|&p| v[p]).collect();
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0).then_some(c)
    }

    pub(crate) fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub(crate) fn pivots(&self) -> &[usize] {
        &self.pivots
    }
}

/// Rank of a `rows x cols` matrix over F_l (destroys the input).
pub(crate) fn rank_mod(m: &mut [u32], rows: usize, cols: usize, p: u64) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        for j in 0..cols {
            m.swap(piv * cols + j, rank * cols + j);
        }
        let s = crate::gf::pow_mod(m[rank * cols + col] as u64, p - 2, p);
        for r in rank + 1..rows {
            let c = m[r * cols + col] as u64 * s % p;
            if c == 0 {
                continue;
            }
            for j in col..cols {
                m[r * cols + j] = ((m[r * cols + j] as u64 + (p - c) * m[rank * cols + j] as u64) % p) as u32;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

fn flatten(m: &Mat) -> Vec<u32> {
    m.entries().iter().map(|e| e.0).collect()
}

/// A bracket-closed span of `n x n` matrices over F_l, stored as its
/// reduced row echelon basis.
#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    field: Field,
    n: usize,
    basis: Vec<Mat>,
}

impl LieAlgebraBasis {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.field.ell(), self.n * self.n);
        for b in &self.basis {
            e.insert(&flatten(b));
        }
        e
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.echelon().coords(&flatten(m)).is_some()
    }

    /// Structure constants in this basis.
    pub fn structure(&self) -> LieAlgebra {
        let d = self.dim();
        let e = self.echelon();
        let mut c = vec![0u32; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = self.field.bracket(&self.basis[i], &self.basis[j]);
                let coords = e.coords(&flatten(&br)).expect("basis is bracket closed");
                c[(i * d + j) * d..(i * d + j + 1) * d].copy_from_slice(&coords);
            }
        }
        LieAlgebra {
            ell: self.field.ell(),
            dim: d,
            structure: c,
        }
    }
}

/// Smallest bracket-closed F_l-subspace containing `seed`.
pub fn bracket_closure(field: &Field, seed: &[Mat]) -> Result<LieAlgebraBasis, LieError> {
    let first = seed.first().ok_or(LieError::EmptySeed)?;
    let pf = field.prime_field();
    let restrict = |m: &Mat| field.weil_restrict(m);
    let n = first.side() * field.degree();
    let mut e = Echelon::new(pf.ell(), n * n);
    let mut found: Vec<Mat> = Vec::new();
    for s in seed {
        let r = restrict(s);
        if e.insert(&flatten(&r)) {
            found.push(r);
        }
    }
    let mut i = 0;
    while i < found.len() {
        for j in 0..i {
            let br = pf.bracket(&found[j], &found[i]);
            if e.insert(&flatten(&br)) {
                found.push(br);
            }
        }
        i += 1;
    }
    let basis = e
        .rows()
        .iter()
        .map(|r| Mat::from_entries(n, r.iter().map(|&x| FieldElement(x)).collect()).expect("n*n row"))
        .collect();
    Ok(LieAlgebraBasis { field: pf, n, basis })
}

/// An abstract Lie algebra over F_l by structure constants:
/// `[b_i, b_j] = sum_k c[(i d + j) d + k] b_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    ell: u64,
    dim: usize,
    structure: Vec<u32>,
}

impl LieAlgebra {
    pub fn zero(ell: u64) -> LieAlgebra {
        LieAlgebra {
            ell,
            dim: 0,
            structure: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ell(&self) -> u64 {
        self.ell
    }

    fn c(&self, i: usize, j: usize, k: usize) -> u64 {
        self.structure[(i * self.dim + j) * self.dim + k] as u64
    }

    /// Matrix of `ad x` in the basis, row-major, for coordinates `x`.
    pub fn ad(&self, x: &[u32]) -> Vec<u32> {
        let d = self.dim;
        let p = self.ell;
        let mut out = vec![0u64; d * d];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    out[k * d + j] += xi as u64 * self.c(i, j, k);
                }
            }
        }
        out.into_iter().map(|v| (v % p) as u32).collect()
    }

    /// Gram matrix of `tr(ad a ad b)`.
    pub fn killing_form(&self) -> Vec<u32> {
        let d = self.dim;
        let p = self.ell;
        let mut g = vec![0u32; d * d];
        for i in 0..d {
            for j in i..d {
                let mut acc = 0u64;
                for k in 0..d {
                    for l in 0..d {
                        acc = (acc + self.c(i, l, k) * self.c(j, k, l)) % p;
                    }
                }
                g[i * d + j] = acc as u32;
                g[j * d + i] = acc as u32;
            }
        }
        g
    }

    /// Checks antisymmetry and the Jacobi identity on basis triples.
    pub fn is_lie(&self) -> bool {
        let d = self.dim;
        let p = self.ell;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if (self.c(i, j, k) + self.c(j, i, k)) % p != 0 {
                        return false;
                    }
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for out in 0..d {
                        let mut acc = 0u64;
                        for m in 0..d {
                            acc += self.c(b, c, m) * self.c(a, m, out)
                                + self.c(c, a, m) * self.c(b, m, out)
                                + self.c(a, b, m) * self.c(c, m, out);
                        }
                        if acc % p != 0 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Null space of a `d x d` matrix, as an echelon basis.
fn null_space(m: &[u32], d: usize, p: u64) -> Echelon {
    let mut rows = Echelon::new(p, d);
    for r in 0..d {
        rows.insert(&m[r * d..(r + 1) * d]);
    }
    let mut out = Echelon::new(p, d);
    let pivots = rows.pivots().to_vec();
    for free in (0..d).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; d];
        v[free] = 1;
        for (row, &piv) in rows.rows().iter().zip(&pivots) {
            v[piv] = ((p - row[free] as u64) % p) as u32;
        }
        out.insert(&v);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KillingOptions {
    /// Good-characteristic margin: the regime is trusted when `l > mult * dim`.
    pub threshold_mult: u64,
    /// Refuse to run below the margin instead of flagging.
    pub strict: bool,
}

impl Default for KillingOptions {
    fn default() -> Self {
        KillingOptions {
            threshold_mult: 4,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KillingQuotient {
    pub algebra: LieAlgebra,
    pub radical_dim: usize,
    pub heuristic_regime: bool,
}

/// Quotient of `l` by the radical of its Killing form, on the complement
/// spanned by the non-pivot basis vectors of the radical.
pub fn killing_radical_quotient(l: &LieAlgebra, opts: KillingOptions) -> Result<KillingQuotient, LieError> {
    let d = l.dim;
    let p = l.ell;
    let bound = opts.threshold_mult * d as u64;
    let heuristic_regime = p <= bound;
    if opts.strict && heuristic_regime {
        return Err(LieError::CharTooSmall { ell: p, bound });
    }
    let radical = null_space(&l.killing_form(), d, p);
    let keep: Vec<usize> = (0..d).filter(|c| !radical.pivots().contains(c)).collect();
    let m = keep.len();
    let mut c = vec![0u32; m * m * m];
    for (a, &ia) in keep.iter().enumerate() {
        for (b, &ib) in keep.iter().enumerate() {
            let mut w: Vec<u32> = (0..d).map(|k| l.c(ia, ib, k) as u32).collect();
            radical.reduce(&mut w);
            for (k, &ik) in keep.iter().enumerate() {
                c[(a * m + b) * m + k] = w[ik];
            }
        }
    }
    Ok(KillingQuotient {
        algebra: LieAlgebra {
            ell: p,
            dim: m,
            structure: c,
        },
        radical_dim: radical.dim(),
        heuristic_regime,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOptions {
    pub seed: u64,
    /// Sweep every element when the algebra has at most this many.
    pub exhaustive_limit: u64,
    pub samples: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            seed: 0x6e6f7269,
            exhaustive_limit: 1_000_000,
            samples: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieRank {
    pub rank: usize,
    /// Seed used when the sweep was sampled; `None` for an exhaustive sweep.
    pub sample_seed: Option<u64>,
}

fn kernel_dim(l: &LieAlgebra, x: &[u32]) -> usize {
    let d = l.dim;
    let mut ad = l.ad(x);
    d - rank_mod(&mut ad, d, d, l.ell)
}

/// Minimum of `dim ker(ad x)` over the algebra (or over a seeded sample).
pub fn lie_rank(l: &LieAlgebra, opts: RankOptions) -> LieRank {
    let d = l.dim;
    if d == 0 {
        return LieRank {
            rank: 0,
            sample_seed: None,
        };
    }
    let p = l.ell;
    let total = (p as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if total <= opts.exhaustive_limit as u128 {
        let rank = (0..total as u64)
            .into_par_iter()
            .map(|idx| {
                let mut t = idx;
                let x: Vec<u32> = (0..d)
                    .map(|_| {
                        let c = (t % p) as u32;
                        t /= p;
                        c
                    })
                    .collect();
                kernel_dim(l, &x)
            })
            .min()
            .unwrap_or(d);
        return LieRank {
            rank,
            sample_seed: None,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples: Vec<Vec<u32>> = (0..opts.samples)
        .map(|_| (0..d).map(|_| rng.gen_range(0..p) as u32).collect())
        .collect();
    let rank = samples.par_iter().map(|x| kernel_dim(l, x)).min().unwrap_or(d);
    LieRank {
        rank,
        sample_seed: Some(opts.seed),
    }
}

/// Dimension and rank data of the algebra generated by the logarithms of
/// the order-l elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoriEnvelope {
    pub dim_full: usize,
    pub dim_ss: usize,
    pub rank: usize,
    pub heuristic_regime: bool,
    pub sample_seed: Option<u64>,
}

impl NoriEnvelope {
    pub fn zero() -> NoriEnvelope {
        NoriEnvelope {
            dim_full: 0,
            dim_ss: 0,
            rank: 0,
            heuristic_regime: false,
            sample_seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    pub killing: KillingOptions,
    pub rank: RankOptions,
}

/// Envelope of an enumerated group: every element of order `l` contributes
/// its logarithm.
pub fn nori_envelope(e: &EnumeratedGroup, opts: EnvelopeOptions) -> Result<NoriEnvelope, LieError> {
    let unipotents: Vec<Mat> = e
        .elements_of_prime_order(e.ell())
        .into_iter()
        .map(|i| e.element(i as usize))
        .collect();
    nori_envelope_from_unipotents(e.field(), e.side(), &unipotents, opts)
}

/// Envelope from an explicit list of order-l elements. With a partial list
/// the algebra can only come out smaller than the true envelope.
pub fn nori_envelope_from_unipotents(
    field: &Field,
    n: usize,
    unipotents: &[Mat],
    opts: EnvelopeOptions,
) -> Result<NoriEnvelope, LieError> {
    check_char(field, n)?;
    if unipotents.is_empty() {
        return Ok(NoriEnvelope::zero());
    }
    let pf = field.prime_field();
    // log(u^k) = k log(u), so one log per cyclic subgroup would do; the
    // echelon insert drops the rest cheaply anyway.
    let mut span = Echelon::new(pf.ell(), (n * field.degree()).pow(2));
    let mut seed = Vec::new();
    for u in unipotents {
        let x = nil_log(field, u)?;
        if span.insert(&flatten(&field.weil_restrict(&x))) {
            seed.push(x);
        }
    }
    let closure = bracket_closure(field, &seed)?;
    let q = killing_radical_quotient(&closure.structure(), opts.killing)?;
    let r = lie_rank(&q.algebra, opts.rank);
    let side = (n * field.degree()) as u64;
    let heuristic_regime = field.ell() <= side.max(opts.killing.threshold_mult * closure.dim() as u64);
    Ok(NoriEnvelope {
        dim_full: closure.dim(),
        dim_ss: q.algebra.dim(),
        rank: r.rank,
        heuristic_regime,
        sample_seed: r.sample_seed,
    })
}

/// Order-l elements found as powers of the generators and of seeded random
/// words in them, for groups too large to enumerate.
pub fn harvest_unipotents(g: &GroupInstance, seed: u64, words: usize) -> Vec<Mat> {
    const ORDER_CAP: u64 = 1_000_000;
    let k = &g.field;
    let ell = k.ell();
    let mut letters = g.generators.clone();
    letters.extend(g.generators.iter().filter_map(|m| k.mat_inv(m).ok()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = g.generators.clone();
    for _ in 0..words {
        let len = rng.gen_range(2..=6);
        let mut w = Mat::identity(g.n);
        for _ in 0..len {
            w = k.mat_mul(&w, &letters[rng.gen_range(0..letters.len())]);
        }
        candidates.push(w);
    }
    candidates
        .iter()
        .filter_map(|w| {
            let o = k.mat_order(w, ORDER_CAP).ok()?;
            (o % ell == 0).then(|| k.mat_pow(w, o / ell))
        })
        .collect()
}
