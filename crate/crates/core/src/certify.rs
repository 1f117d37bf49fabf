//! Declared ambient groups, the four certificate checks, and the l-adic
//! front door (lattice stabilization and reduction mod l).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf::{make_field, Field, Mat};
use crate::grp::{group_order, GroupInstance, GrpError};
use crate::lietypes::{shared_tables, ChevalleyFamily, Family, LieTables, LieTypeTag, RankProfile};

/// Default good-characteristic margin: trusted regime is `l > mult * dim`.
pub const DEFAULT_THRESHOLD_MULT: u64 = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("instance declares no ambient group")]
    MissingAmbient,
    #[error("ambient group has no factors")]
    EmptyAmbient,
    #[error("group order {group_order} disagrees with the formula value {expected} for a certified ambient")]
    CrossCheckFailed { group_order: u128, expected: u128 },
    #[error("no stable lattice after {iterations} iterations (valuation spread {spread})")]
    NonCompact { iterations: usize, spread: i64 },
    #[error("entry ({row}, {col}) of generator {generator} is not l-integral")]
    NotIntegral { generator: usize, row: usize, col: usize },
    #[error("generator {0} is singular mod l")]
    SingularReduction(usize),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Group(#[from] GrpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub prime: u64,
    pub ext_degree: u32,
}

impl FieldSpec {
    pub fn of(field: &Field) -> FieldSpec {
        FieldSpec {
            prime: field.ell(),
            ext_degree: field.degree() as u32,
        }
    }

    pub fn field(&self) -> Result<Field, crate::gf::GfError> {
        make_field(self.prime, self.ext_degree as usize)
    }
}

/// A user-declared connected ambient group: a product of simple factors,
/// optionally times a central torus of the given dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientSpec {
    pub factors: Vec<LieTypeTag>,
    #[serde(default = "yes")]
    pub simply_connected: bool,
    #[serde(default)]
    pub central_torus: u32,
    /// The type A factors are unitary groups SU_{r+1} over F_q, split over
    /// F_{q^2}, rather than SL_{r+1}. Ranks and dimensions are unchanged.
    #[serde(default)]
    pub unitary: bool,
    pub field: FieldSpec,
}

fn yes() -> bool {
    true
}

impl AmbientSpec {
    pub fn new(factors: Vec<LieTypeTag>, field: FieldSpec) -> Result<AmbientSpec, CertifyError> {
        if factors.is_empty() {
            return Err(CertifyError::EmptyAmbient);
        }
        Ok(AmbientSpec {
            factors,
            simply_connected: true,
            central_torus: 0,
            unitary: false,
            field,
        })
    }

    pub fn is_semisimple(&self) -> bool {
        self.central_torus == 0
    }

    /// Per-type rank over F_l: each factor counts `f * rank`.
    pub fn per_type(&self, tables: &LieTables) -> BTreeMap<LieTypeTag, u64> {
        let f = self.field.ext_degree as u64;
        let mut out = BTreeMap::new();
        for t in &self.factors {
            *out.entry(*t).or_insert(0) += f * tables.type_rank(*t);
        }
        out
    }
}

/// `(rank, dim, is_type_A)` of a declared ambient, over its own field.
pub fn ambient_invariants(a: &AmbientSpec) -> (u64, u64, bool) {
    ambient_invariants_with(a, shared_tables())
}

pub fn ambient_invariants_with(a: &AmbientSpec, tables: &LieTables) -> (u64, u64, bool) {
    let t = a.central_torus as u64;
    let rank = a.factors.iter().map(|&x| tables.type_rank(x)).sum::<u64>() + t;
    let dim = a.factors.iter().map(|&x| tables.type_dim(x)).sum::<u64>() + t;
    let type_a = a.factors.iter().all(|x| x.family() == Family::A);
    (rank, dim, type_a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    RankBound,
    TypeAFullness,
    PerTypeFullness,
    DimCriterion,
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rank" => Ok(Criterion::RankBound),
            "typea" => Ok(Criterion::TypeAFullness),
            "pertype" => Ok(Criterion::PerTypeFullness),
            "dim" => Ok(Criterion::DimCriterion),
            _ => Err(format!("unknown criterion {s}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub group_order: u128,
    pub chevalley_order: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub profile: RankProfile,
    pub f: u64,
    /// Ambient rank and dimension scaled by `f`.
    pub ambient_rank: u64,
    pub ambient_dim: u64,
    pub threshold_mult: u64,
    pub heuristic_regime: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub criterion: Criterion,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Tables and thresholds the checks run against.
#[derive(Clone, Copy)]
pub struct Certifier<'a> {
    pub tables: &'a LieTables,
    pub threshold_mult: u64,
}

impl Default for Certifier<'static> {
    fn default() -> Self {
        Certifier {
            tables: shared_tables(),
            threshold_mult: DEFAULT_THRESHOLD_MULT,
        }
    }
}

impl fmt::Debug for Certifier<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Certifier")
            .field("mutation", &self.tables.mutation())
            .field("threshold_mult", &self.threshold_mult)
            .finish()
    }
}

impl Certifier<'_> {
    fn evidence(&self, profile: &RankProfile, a: &AmbientSpec, f: u64, note: String) -> Evidence {
        let (rank, dim, _) = ambient_invariants_with(a, self.tables);
        Evidence {
            profile: profile.clone(),
            f,
            ambient_rank: f * rank,
            ambient_dim: f * dim,
            threshold_mult: self.threshold_mult,
            heuristic_regime: a.field.prime <= self.threshold_mult * f * dim,
            cross_check: None,
            note,
        }
    }

    pub fn check_rank_bound(&self, profile: &RankProfile, a: &AmbientSpec, f: u64) -> Certificate {
        let ev = self.evidence(profile, a, f, String::new());
        let (verdict, note) = if profile.rk_ell <= ev.ambient_rank {
            (Verdict::Certified, format!("slack {}", ev.ambient_rank - profile.rk_ell))
        } else {
            let why = if ev.heuristic_regime {
                "l is below the threshold"
            } else {
                "the declared ambient is too small"
            };
            (
                Verdict::Refuted,
                format!("rk_ell {} exceeds {}; {why}", profile.rk_ell, ev.ambient_rank),
            )
        };
        Certificate {
            criterion: Criterion::RankBound,
            verdict,
            evidence: Evidence { note, ..ev },
        }
    }

    pub fn check_dim_criterion(&self, profile: &RankProfile, a: &AmbientSpec, f: u64) -> Certificate {
        let ev = self.evidence(profile, a, f, String::new());
        let (verdict, note) = if profile.dim_ell < ev.ambient_dim {
            (Verdict::Inconclusive, format!("dim_ell {} below {}", profile.dim_ell, ev.ambient_dim))
        } else if !a.is_semisimple() {
            (Verdict::Refuted, "declared ambient is not semisimple".to_string())
        } else if profile.dim_ell == ev.ambient_dim {
            (Verdict::Certified, "equality".to_string())
        } else {
            (
                Verdict::Refuted,
                format!("dim_ell {} exceeds {}", profile.dim_ell, ev.ambient_dim),
            )
        };
        Certificate {
            criterion: Criterion::DimCriterion,
            verdict,
            evidence: Evidence { note, ..ev },
        }
    }

    /// Order of the declared ambient's group of F_{l^f}-points, when every
    /// factor has an order formula here (type A only).
    fn ambient_points_order(&self, a: &AmbientSpec) -> Option<u128> {
        let q = a.field.prime.checked_pow(a.field.ext_degree)?;
        a.factors.iter().try_fold(1u128, |acc, t| {
            if t.family() != Family::A {
                return None;
            }
            let family = if a.unitary {
                ChevalleyFamily::Su(t.rank() + 1)
            } else {
                ChevalleyFamily::Sl(t.rank() + 1)
            };
            let o = self.tables.chevalley_order(family, q).ok()?;
            acc.checked_mul(o)
        })
    }

    pub fn certify_fullness_type_a(&self, g: &GroupInstance, profile: &RankProfile) -> Result<Certificate, CertifyError> {
        let a = g.ambient.as_ref().ok_or(CertifyError::MissingAmbient)?;
        let f = a.field.ext_degree as u64;
        let (_, _, type_a) = ambient_invariants_with(a, self.tables);
        let mut ev = self.evidence(profile, a, f, String::new());
        let (verdict, note) = if profile.rk_ell > ev.ambient_rank {
            (Verdict::Refuted, "rk_ell exceeds the ambient rank".to_string())
        } else if !a.simply_connected || !type_a || !a.is_semisimple() {
            (Verdict::Inconclusive, "ambient is not simply connected of type A".to_string())
        } else if profile.rk_ell < ev.ambient_rank {
            (
                Verdict::Inconclusive,
                format!("rk_ell {} below {}", profile.rk_ell, ev.ambient_rank),
            )
        } else {
            (Verdict::Certified, "rk_ell equals f * rank".to_string())
        };
        ev.note = note;
        if verdict == Verdict::Certified {
            if let Some(expected) = self.ambient_points_order(a) {
                match group_order(g) {
                    Ok(order) => {
                        ev.cross_check = Some(CrossCheck {
                            group_order: order,
                            chevalley_order: expected,
                        });
                        if order != expected {
                            return Err(CertifyError::CrossCheckFailed {
                                group_order: order,
                                expected,
                            });
                        }
                    }
                    Err(GrpError::DomainTooLarge { .. } | GrpError::TooWide { .. }) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Ok(Certificate {
            criterion: Criterion::TypeAFullness,
            verdict,
            evidence: ev,
        })
    }

    pub fn certify_fullness_pertype(&self, g: &GroupInstance, profile: &RankProfile) -> Result<Certificate, CertifyError> {
        let a = g.ambient.as_ref().ok_or(CertifyError::MissingAmbient)?;
        let f = a.field.ext_degree as u64;
        let mut ev = self.evidence(profile, a, f, String::new());
        let expected = a.per_type(self.tables);
        let observed: BTreeMap<LieTypeTag, u64> =
            profile.per_type.iter().filter(|(_, &v)| v > 0).map(|(k, v)| (*k, *v)).collect();
        let (verdict, note) = if profile.rk_ell > ev.ambient_rank {
            (Verdict::Refuted, "rk_ell exceeds the ambient rank".to_string())
        } else if !a.simply_connected || !a.is_semisimple() {
            (Verdict::Inconclusive, "ambient is not simply connected semisimple".to_string())
        } else if observed == expected {
            (Verdict::Certified, "per-type ranks match".to_string())
        } else {
            (Verdict::Inconclusive, format!("per-type ranks {observed:?} differ from {expected:?}"))
        };
        ev.note = note;
        Ok(Certificate {
            criterion: Criterion::PerTypeFullness,
            verdict,
            evidence: ev,
        })
    }

    pub fn run(&self, criterion: Criterion, g: &GroupInstance, profile: &RankProfile) -> Result<Certificate, CertifyError> {
        let a = g.ambient.as_ref().ok_or(CertifyError::MissingAmbient)?;
        let f = a.field.ext_degree as u64;
        match criterion {
            Criterion::RankBound => Ok(self.check_rank_bound(profile, a, f)),
            Criterion::DimCriterion => Ok(self.check_dim_criterion(profile, a, f)),
            Criterion::TypeAFullness => self.certify_fullness_type_a(g, profile),
            Criterion::PerTypeFullness => self.certify_fullness_pertype(g, profile),
        }
    }
}

pub fn check_rank_bound(profile: &RankProfile, a: &AmbientSpec, f: u64) -> Certificate {
    Certifier::default().check_rank_bound(profile, a, f)
}

pub fn check_dim_criterion(profile: &RankProfile, a: &AmbientSpec, f: u64) -> Certificate {
    Certifier::default().check_dim_criterion(profile, a, f)
}

pub fn certify_fullness_type_a(g: &GroupInstance, profile: &RankProfile) -> Result<Certificate, CertifyError> {
    Certifier::default().certify_fullness_type_a(g, profile)
}

pub fn certify_fullness_pertype(g: &GroupInstance, profile: &RankProfile) -> Result<Certificate, CertifyError> {
    Certifier::default().certify_fullness_pertype(g, profile)
}

/// A square matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMat {
    n: usize,
    entries: Vec<BigRational>,
}

impl RationalMat {
    pub fn new(n: usize, entries: Vec<BigRational>) -> Result<RationalMat, CertifyError> {
        if entries.len() != n * n {
            return Err(CertifyError::Shape(format!("{} entries for side {n}", entries.len())));
        }
        Ok(RationalMat { n, entries })
    }

    pub fn identity(n: usize) -> RationalMat {
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigRational::one();
        }
        RationalMat { n, entries }
    }

    /// From `(numerator, denominator)` pairs.
    pub fn from_fracs(rows: &[&[(i64, i64)]]) -> RationalMat {
        let n = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&(a, b)| BigRational::new(a.into(), b.into())))
            .collect();
        RationalMat { n, entries }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn mul(&self, other: &RationalMat) -> RationalMat {
        let n = self.n;
        let mut entries = vec![BigRational::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * &other.entries[k * n + j];
                }
            }
        }
        RationalMat { n, entries }
    }

    pub fn inverse(&self) -> Option<RationalMat> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = RationalMat::identity(n).entries;
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r * n + col].is_zero())?;
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
                inv.swap(piv * n + j, col * n + j);
            }
            let s = a[col * n + col].recip();
            for j in 0..n {
                a[col * n + j] *= &s;
                inv[col * n + j] *= &s;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let c = a[r * n + col].clone();
                for j in 0..n {
                    let t = &c * &a[col * n + j];
                    a[r * n + j] -= t;
                    let t = &c * &inv[col * n + j];
                    inv[r * n + j] -= t;
                }
            }
        }
        Some(RationalMat { n, entries: inv })
    }

    fn from_columns(cols: &[Vec<BigRational>]) -> RationalMat {
        let n = cols.len();
        let mut entries = vec![BigRational::zero(); n * n];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                entries[i * n + j] = c[i].clone();
            }
        }
        RationalMat { n, entries }
    }

    fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.n)
            .map(|i| {
                let mut acc = BigRational::zero();
                for (k, x) in v.iter().enumerate() {
                    acc += &self.entries[i * self.n + k] * x;
                }
                acc
            })
            .collect()
    }
}

impl fmt::Display for RationalMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.n)
            .map(|i| {
                let r: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Rows of rational strings such as `"1/7"`.
impl Serialize for RationalMat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<String>>::deserialize(d)?;
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(serde::de::Error::custom("matrix is not square"));
            }
            for s in r {
                entries.push(parse_rational(s).map_err(serde::de::Error::custom)?);
            }
        }
        Ok(RationalMat { n, entries })
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    let (a, b) = s.split_once('/').unwrap_or((s, "1"));
    let a: BigInt = a.trim().parse().map_err(|_| format!("bad rational {s:?}"))?;
    let b: BigInt = b.trim().parse().map_err(|_| format!("bad rational {s:?}"))?;
    if b.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(BigRational::new(a, b))
}

/// l-adic valuation of a nonzero rational.
fn valuation(x: &BigRational, ell: &BigInt) -> i64 {
    fn v(mut n: BigInt, ell: &BigInt) -> i64 {
        let mut k = 0;
        loop {
            let (q, r) = n.div_rem(ell);
            if !r.is_zero() {
                return k;
            }
            n = q;
            k += 1;
        }
    }
    v(x.numer().abs(), ell) - v(x.denom().abs(), ell)
}

fn ell_power(ell: &BigInt, k: i64) -> BigRational {
    let p = num_traits::pow(ell.clone(), k.unsigned_abs() as usize);
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Basis of the Z_(l)-module spanned by `vectors` (assumed of full rank),
/// in triangular form: column `i` has zeros above row `i` and `l^{v_i}` on
/// the diagonal. Returns the columns and the diagonal valuations.
fn localized_hnf(mut vectors: Vec<Vec<BigRational>>, n: usize, ell: &BigInt) -> Option<(Vec<Vec<BigRational>>, Vec<i64>)> {
    let mut basis = Vec::with_capacity(n);
    let mut vals = Vec::with_capacity(n);
    for i in 0..n {
        let (best, v) = vectors
            .iter()
            .enumerate()
            .filter(|(_, x)| !x[i].is_zero())
            .map(|(k, x)| (k, valuation(&x[i], ell)))
            .min_by_key(|&(k, v)| (v, k))?;
        let mut piv = vectors.swap_remove(best);
        let scale = ell_power(ell, v) / &piv[i];
        for x in piv.iter_mut() {
            *x *= &scale;
        }
        let pv = ell_power(ell, v);
        for w in vectors.iter_mut() {
            if w[i].is_zero() {
                continue;
            }
            let c = &w[i] / &pv;
            for (a, b) in w.iter_mut().zip(&piv) {
                *a -= &c * b;
            }
        }
        vectors.retain(|w| w.iter().any(|x| !x.is_zero()));
        basis.push(piv);
        vals.push(v);
    }
    // Reduce below-diagonal entries into a fixed residue range so the
    // representative depends only on the lattice.
    for j in (0..n).rev() {
        for i in j + 1..n {
            let pv = ell_power(ell, vals[i]);
            let c = &basis[j][i] / &pv;
            let fl = c.floor();
            if fl.is_zero() {
                continue;
            }
            let col_i = basis[i].clone();
            for (a, b) in basis[j].iter_mut().zip(&col_i) {
                *a -= &fl * b;
            }
        }
    }
    Some((basis, vals))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableLattice {
    /// Columns are a basis of the stable lattice.
    pub basis: RationalMat,
    /// `B^-1 g B` for each input generator.
    pub generators: Vec<RationalMat>,
    /// Passes of `L <- L + sum g L`, counting the pass that confirmed stability.
    pub iterations: usize,
}

/// Finds a lattice stable under the generators and their inverses.
pub fn stabilize_lattice(gens: &[RationalMat], ell: u64, max_iter: usize) -> Result<StableLattice, CertifyError> {
    let Some(first) = gens.first() else {
        return Err(CertifyError::Shape("no generators".into()));
    };
    let n = first.side();
    if let Some(g) = gens.iter().find(|g| g.side() != n) {
        return Err(CertifyError::Shape(format!("generator of side {} among side {n}", g.side())));
    }
    let mut acting = Vec::with_capacity(2 * gens.len());
    for (i, g) in gens.iter().enumerate() {
        acting.push(g.clone());
        acting.push(g.inverse().ok_or_else(|| CertifyError::Shape(format!("generator {i} is singular")))?);
    }
    let ell_big = BigInt::from(ell);
    let mut basis: Vec<Vec<BigRational>> = RationalMat::identity(n).entries.chunks(n).map(|c| c.to_vec()).collect();
    let mut total: i64 = 0;
    for iter in 1..=max_iter.max(1) {
        let mut span = basis.clone();
        for g in &acting {
            for b in &basis {
                span.push(g.apply(b));
            }
        }
        let (next, vals) = localized_hnf(span, n, &ell_big).expect("lattice contains the previous full-rank lattice");
        let next_total: i64 = vals.iter().sum();
        let spread = -next_total;
        if spread > (n * max_iter) as i64 {
            return Err(CertifyError::NonCompact { iterations: iter, spread });
        }
        if next_total == total && iter > 1 {
            let b = RationalMat::from_columns(&next);
            let bi = b.inverse().expect("lattice basis is invertible");
            let conj = gens.iter().map(|g| bi.mul(&g.mul(&b))).collect();
            return Ok(StableLattice {
                basis: b,
                generators: conj,
                iterations: iter,
            });
        }
        basis = next;
        total = next_total;
    }
    Err(CertifyError::NonCompact {
        iterations: max_iter,
        spread: -total,
    })
}

/// Entrywise reduction of l-integral rational matrices.
pub fn reduce_mod_ell(gens: &[RationalMat], ell: u64) -> Result<GroupInstance, CertifyError> {
    let field = Field::prime(ell).map_err(GrpError::from)?;
    let Some(first) = gens.first() else {
        return Err(GrpError::NoGenerators.into());
    };
    let n = first.side();
    let ell_big = BigInt::from(ell);
    let mut out = Vec::with_capacity(gens.len());
    for (gi, g) in gens.iter().enumerate() {
        if g.side() != n {
            return Err(GrpError::SideMismatch {
                index: gi,
                found: g.side(),
                expected: n,
            }
            .into());
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let x = g.get(i, j);
                if x.denom().mod_floor(&ell_big).is_zero() {
                    return Err(CertifyError::NotIntegral {
                        generator: gi,
                        row: i,
                        col: j,
                    });
                }
                let a = i64::try_from(x.numer().mod_floor(&ell_big)).expect("residue fits");
                let b = i64::try_from(x.denom().mod_floor(&ell_big)).expect("residue fits");
                let v = field.mul(field.from_int(a), field.inv(field.from_int(b)).expect("unit"));
                row.push(v.0 as i64);
            }
            rows.push(row);
        }
        let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let m: Mat = field.mat_from_ints(&refs);
        if !field.is_invertible(&m) {
            return Err(CertifyError::SingularReduction(gi));
        }
        out.push(m);
    }
    Ok(GroupInstance::new(field, n, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lietypes::Mutation;

    fn spec(tags: &[&str], p: u64, f: u32) -> AmbientSpec {
        AmbientSpec::new(
            tags.iter().map(|t| t.parse().unwrap()).collect(),
            FieldSpec {
                prime: p,
                ext_degree: f,
            },
        )
        .unwrap()
    }

    fn profile(dim: u64, rk: u64, per: &[(&str, u64)]) -> RankProfile {
        RankProfile {
            dim_ell: dim,
            rk_ell: rk,
            per_type: per.iter().map(|(t, v)| (t.parse().unwrap(), *v)).collect(),
        }
    }

    #[test]
    fn invariants_examples() {
        assert_eq!(ambient_invariants(&spec(&["A_1"], 7, 1)), (1, 3, true));
        assert_eq!(ambient_invariants(&spec(&["A_1", "A_1"], 7, 1)), (2, 6, true));
        assert_eq!(ambient_invariants(&spec(&["C_2"], 7, 1)), (2, 10, false));
        assert_eq!(
            AmbientSpec::new(vec![], FieldSpec { prime: 7, ext_degree: 1 }),
            Err(CertifyError::EmptyAmbient)
        );
    }

    #[test]
    fn ambient_json() {
        let a: AmbientSpec =
            serde_json::from_str(r#"{"factors":["A_1","C_2"],"field":{"prime":7,"ext_degree":1}}"#).unwrap();
        assert!(a.simply_connected);
        assert_eq!(a.factors.len(), 2);
        assert!(serde_json::from_str::<AmbientSpec>(r#"{"factors":["C_1"],"field":{"prime":7,"ext_degree":1}}"#).is_err());
    }

    #[test]
    fn rank_bound_examples() {
        let a1 = spec(&["A_1"], 7, 1);
        let c = check_rank_bound(&profile(3, 1, &[("A_1", 1)]), &a1, 1);
        assert_eq!(c.verdict, Verdict::Certified);
        assert_eq!(c.evidence.note, "slack 0");
        let c = check_rank_bound(&RankProfile::default(), &a1, 1);
        assert_eq!((c.verdict, c.evidence.note.as_str()), (Verdict::Certified, "slack 1"));
        let c = check_rank_bound(&profile(0, 3, &[]), &spec(&["A_2"], 7, 1), 1);
        assert_eq!(c.verdict, Verdict::Refuted);
    }

    #[test]
    fn dim_examples() {
        let a1 = spec(&["A_1"], 7, 1);
        assert_eq!(check_dim_criterion(&profile(3, 1, &[]), &a1, 1).verdict, Verdict::Certified);
        assert_eq!(check_dim_criterion(&RankProfile::default(), &a1, 1).verdict, Verdict::Inconclusive);
        assert_eq!(check_dim_criterion(&profile(4, 1, &[]), &a1, 1).verdict, Verdict::Refuted);
        let mut gl = a1.clone();
        gl.central_torus = 1;
        assert_eq!(check_dim_criterion(&profile(4, 1, &[]), &gl, 1).verdict, Verdict::Refuted);
    }

    #[test]
    fn heuristic_flag() {
        let a1 = spec(&["A_1"], 7, 1);
        assert!(check_rank_bound(&RankProfile::default(), &a1, 1).evidence.heuristic_regime);
        let a1 = spec(&["A_1"], 13, 1);
        assert!(!check_rank_bound(&RankProfile::default(), &a1, 1).evidence.heuristic_regime);
    }

    #[test]
    fn mutated_tables_change_dim_verdict() {
        let t = LieTables::with_mutation(Some(Mutation::TypeDim));
        let c = Certifier {
            tables: &t,
            threshold_mult: 4,
        };
        let v = c.check_dim_criterion(&profile(3, 1, &[]), &spec(&["A_1"], 7, 1), 1).verdict;
        assert_eq!(v, Verdict::Inconclusive);
    }

    #[test]
    fn missing_ambient() {
        let k = Field::prime(7).unwrap();
        let g = GroupInstance::new(k.clone(), 2, vec![k.mat_from_ints(&[&[1, 1], &[0, 1]])]).unwrap();
        assert_eq!(
            certify_fullness_type_a(&g, &RankProfile::default()),
            Err(CertifyError::MissingAmbient)
        );
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/7").unwrap(), BigRational::new(1.into(), 7.into()));
        assert_eq!(parse_rational("-3").unwrap(), BigRational::from_integer((-3).into()));
        assert!(parse_rational("1/0").is_err());
        let m = RationalMat::from_fracs(&[&[(1, 1), (1, 7)], &[(0, 1), (1, 1)]]);
        let back: RationalMat = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        assert_eq!(m.mul(&m.inverse().unwrap()), RationalMat::identity(2));
    }

    #[test]
    fn lattice_examples() {
        let id = RationalMat::identity(2);
        let u = RationalMat::from_fracs(&[&[(1, 1), (1, 1)], &[(0, 1), (1, 1)]]);
        let s = stabilize_lattice(&[u.clone()], 7, 4).unwrap();
        assert_eq!(s.basis, id);
        assert_eq!(s.generators, vec![u]);

        let g1 = RationalMat::from_fracs(&[&[(1, 1), (1, 7)], &[(0, 1), (1, 1)]]);
        let g2 = RationalMat::from_fracs(&[&[(1, 1), (0, 1)], &[(7, 1), (1, 1)]]);
        let s = stabilize_lattice(&[g1, g2], 7, 8).unwrap();
        assert!(s.iterations <= 2);
        assert_eq!(s.basis, RationalMat::from_fracs(&[&[(1, 7), (0, 1)], &[(0, 1), (1, 1)]]));
        assert_eq!(
            s.generators,
            vec![
                RationalMat::from_fracs(&[&[(1, 1), (1, 1)], &[(0, 1), (1, 1)]]),
                RationalMat::from_fracs(&[&[(1, 1), (0, 1)], &[(1, 1), (1, 1)]]),
            ]
        );

        let d = RationalMat::from_fracs(&[&[(5, 1), (0, 1)], &[(0, 1), (1, 5)]]);
        assert!(matches!(stabilize_lattice(&[d], 5, 8), Err(CertifyError::NonCompact { .. })));
    }

    #[test]
    fn lattice_is_independent_of_max_iter() {
        let g1 = RationalMat::from_fracs(&[&[(1, 1), (1, 49)], &[(0, 1), (1, 1)]]);
        let a = stabilize_lattice(&[g1.clone()], 7, 3).unwrap();
        let b = stabilize_lattice(&[g1], 7, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduction_examples() {
        let u = RationalMat::from_fracs(&[&[(1, 1), (1, 1)], &[(0, 1), (1, 1)]]);
        let g = reduce_mod_ell(&[u], 7).unwrap();
        let k = Field::prime(7).unwrap();
        assert_eq!(g.generators[0], k.mat_from_ints(&[&[1, 1], &[0, 1]]));
        let h = RationalMat::from_fracs(&[&[(1, 2), (0, 1)], &[(0, 1), (2, 1)]]);
        assert_eq!(
            reduce_mod_ell(&[h], 7).unwrap().generators[0],
            k.mat_from_ints(&[&[4, 0], &[0, 2]])
        );
        let s = RationalMat::from_fracs(&[&[(7, 1), (1, 1)], &[(0, 1), (1, 1)]]);
        assert_eq!(reduce_mod_ell(&[s], 7).unwrap_err(), CertifyError::SingularReduction(0));
        let t = RationalMat::from_fracs(&[&[(1, 1), (1, 7)], &[(0, 1), (1, 1)]]);
        assert_eq!(
            reduce_mod_ell(&[t], 7).unwrap_err(),
            CertifyError::NotIntegral {
                generator: 0,
                row: 0,
                col: 1
            }
        );
    }
}
