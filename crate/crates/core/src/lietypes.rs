//! Lie-type tables, Chevalley group orders, classification of simple
//! composition factors by order, and rank-profile assembly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gf::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieTypeError {
    #[error("invalid Lie type {0}")]
    InvalidTag(String),
    #[error("unsupported Chevalley family {0}")]
    UnsupportedFamily(String),
    #[error("order of {family}({q}) overflows")]
    Overflow { family: String, q: u64 },
    #[error("no catalogue entry for a simple group of order {0}")]
    UnknownFactor(u128),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E6,
    E7,
    E8,
    F4,
    G2,
}

/// A simple Lie type such as `A_2` or `E8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LieTypeTag {
    family: Family,
    rank: u32,
}

impl LieTypeTag {
    pub fn new(family: Family, rank: u32) -> Result<LieTypeTag, LieTypeError> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::E6 => rank == 6,
            Family::E7 => rank == 7,
            Family::E8 => rank == 8,
            Family::F4 => rank == 4,
            Family::G2 => rank == 2,
        };
        if ok {
            Ok(LieTypeTag { family, rank })
        } else {
            Err(LieTypeError::InvalidTag(format!("{family:?}_{rank}")))
        }
    }

    pub fn a(rank: u32) -> LieTypeTag {
        LieTypeTag::new(Family::A, rank).expect("A_n needs n >= 1")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }
}

impl fmt::Display for LieTypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::A | Family::B | Family::C | Family::D => write!(f, "{:?}_{}", self.family, self.rank),
            other => write!(f, "{other:?}"),
        }
    }
}

impl FromStr for LieTypeTag {
    type Err = LieTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LieTypeError::InvalidTag(s.to_string());
        let fixed = match s {
            "E6" => Some((Family::E6, 6)),
            "E7" => Some((Family::E7, 7)),
            "E8" => Some((Family::E8, 8)),
            "F4" => Some((Family::F4, 4)),
            "G2" => Some((Family::G2, 2)),
            _ => None,
        };
        if let Some((fam, r)) = fixed {
            return LieTypeTag::new(fam, r);
        }
        let (fam, rank) = s.split_once('_').ok_or_else(bad)?;
        let family = match fam {
            "A" => Family::A,
            "B" => Family::B,
            "C" => Family::C,
            "D" => Family::D,
            _ => return Err(bad()),
        };
        LieTypeTag::new(family, rank.parse().map_err(|_| bad())?)
    }
}

impl Serialize for LieTypeTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LieTypeTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Simply connected classical Chevalley groups with known order formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChevalleyFamily {
    /// `SL_m`
    Sl(u32),
    /// `Sp_{2n}`, carrying `2n`
    Sp(u32),
    /// `SU_m` (unitary over F_{q^2})
    Su(u32),
    /// `Spin_{2n+1}` or split `Spin_{2n}`, carrying the dimension of the quadratic space
    Spin(u32),
}

impl fmt::Display for ChevalleyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChevalleyFamily::Sl(m) => write!(f, "SL_{m}"),
            ChevalleyFamily::Sp(m) => write!(f, "Sp_{m}"),
            ChevalleyFamily::Su(m) => write!(f, "SU_{m}"),
            ChevalleyFamily::Spin(m) => write!(f, "Spin_{m}"),
        }
    }
}

impl FromStr for ChevalleyFamily {
    type Err = LieTypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LieTypeError::UnsupportedFamily(s.to_string());
        let (name, m) = s.split_once('_').ok_or_else(bad)?;
        let m: u32 = m.parse().map_err(|_| bad())?;
        let fam = match name {
            "SL" => ChevalleyFamily::Sl(m),
            "Sp" => ChevalleyFamily::Sp(m),
            "SU" => ChevalleyFamily::Su(m),
            "Spin" => ChevalleyFamily::Spin(m),
            _ => return Err(bad()),
        };
        fam.validate()?;
        Ok(fam)
    }
}

impl ChevalleyFamily {
    fn validate(&self) -> Result<(), LieTypeError> {
        let ok = match *self {
            ChevalleyFamily::Sl(m) | ChevalleyFamily::Su(m) => m >= 2,
            ChevalleyFamily::Sp(m) => m >= 2 && m % 2 == 0,
            ChevalleyFamily::Spin(m) => m >= 5,
        };
        if ok {
            Ok(())
        } else {
            Err(LieTypeError::UnsupportedFamily(self.to_string()))
        }
    }
}

/// Injected table defects, used to check that the acceptance corpus notices
/// a wrong formula. `LieTables::default()` carries none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    TypeDim,
    TypeRank,
    SlOrder,
    SpOrder,
    SuOrder,
    SpinOrder,
}

impl Mutation {
    pub const ALL: [Mutation; 6] = [
        Mutation::TypeDim,
        Mutation::TypeRank,
        Mutation::SlOrder,
        Mutation::SpOrder,
        Mutation::SuOrder,
        Mutation::SpinOrder,
    ];
}

impl FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown mutation {s}"))
    }
}

/// What a simple composition factor is.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FactorKind {
    Cyclic { p: u64 },
    Alternating { m: u32 },
    /// Simple group of Lie type in the working characteristic, over F_{l^f}.
    LieCharEll { lie_type: LieTypeTag, f: u32, name: String },
    OtherSimple { name: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CompositionFactor {
    #[serde(flatten)]
    pub kind: FactorKind,
    pub order: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RankProfile {
    pub dim_ell: u64,
    pub rk_ell: u64,
    pub per_type: BTreeMap<LieTypeTag, u64>,
}

impl RankProfile {
    pub fn is_zero(&self) -> bool {
        self.dim_ell == 0 && self.rk_ell == 0 && self.per_type.values().all(|&v| v == 0)
    }

    /// Componentwise sum.
    pub fn add(&self, other: &RankProfile) -> RankProfile {
        let mut per_type = self.per_type.clone();
        for (t, v) in &other.per_type {
            *per_type.entry(*t).or_insert(0) += v;
        }
        RankProfile {
            dim_ell: self.dim_ell + other.dim_ell,
            rk_ell: self.rk_ell + other.rk_ell,
            per_type,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CatalogueKind {
    Alternating(u32),
    Lie { lie_type: LieTypeTag, char_p: u64, f: u32, name: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogueEntry {
    pub order: u128,
    pub kind: CatalogueKind,
}

/// Largest simple-group order kept in the catalogue.
pub const CATALOGUE_ORDER_BOUND: u128 = 10_000_000_000_000;

/// Prime powers `p^f <= bound` as `(q, p, f)`, ascending in `q`.
fn prime_powers(bound: u64) -> Vec<(u64, u64, u32)> {
    let mut out = Vec::new();
    for p in 2..=bound {
        if !is_prime(p) {
            continue;
        }
        let (mut q, mut f) = (p, 1);
        while q <= bound {
            out.push((q, p, f));
            q = match q.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
            f += 1;
        }
    }
    out.sort();
    out
}

/// Dimension, rank and order tables. Holds an optional injected defect.
#[derive(Default)]
pub struct LieTables {
    mutation: Option<Mutation>,
    catalogue: OnceLock<Vec<CatalogueEntry>>,
}

impl LieTables {
    pub fn with_mutation(mutation: Option<Mutation>) -> LieTables {
        LieTables {
            mutation,
            catalogue: OnceLock::new(),
        }
    }

    pub fn mutation(&self) -> Option<Mutation> {
        self.mutation
    }

    pub fn type_dim(&self, t: LieTypeTag) -> u64 {
        let n = t.rank as u64;
        let d = match t.family {
            Family::A => n * (n + 2),
            Family::B | Family::C => n * (2 * n + 1),
            Family::D => n * (2 * n - 1),
            Family::G2 => 14,
            Family::F4 => 52,
            Family::E6 => 78,
            Family::E7 => 133,
            Family::E8 => 248,
        };
        d + (self.mutation == Some(Mutation::TypeDim)) as u64
    }

    pub fn type_rank(&self, t: LieTypeTag) -> u64 {
        t.rank as u64 + (self.mutation == Some(Mutation::TypeRank)) as u64
    }

    /// Order of the simply connected group of the given family over F_q.
    pub fn chevalley_order(&self, family: ChevalleyFamily, q: u64) -> Result<u128, LieTypeError> {
        family.validate()?;
        let overflow = || LieTypeError::Overflow {
            family: family.to_string(),
            q,
        };
        let qq = q as u128;
        let pow = |e: u32| qq.checked_pow(e).ok_or_else(overflow);
        let mut order: u128;
        let bump;
        match family {
            ChevalleyFamily::Sl(m) => {
                order = pow(m * (m - 1) / 2)?;
                for i in 2..=m {
                    order = order.checked_mul(pow(i)? - 1).ok_or_else(overflow)?;
                }
                bump = Mutation::SlOrder;
            }
            ChevalleyFamily::Sp(two_n) => {
                let n = two_n / 2;
                order = pow(n * n)?;
                for i in 1..=n {
                    order = order.checked_mul(pow(2 * i)? - 1).ok_or_else(overflow)?;
                }
                bump = Mutation::SpOrder;
            }
            ChevalleyFamily::Su(m) => {
                order = pow(m * (m - 1) / 2)?;
                for i in 2..=m {
                    let term = if i % 2 == 0 { pow(i)? - 1 } else { pow(i)? + 1 };
                    order = order.checked_mul(term).ok_or_else(overflow)?;
                }
                bump = Mutation::SuOrder;
            }
            ChevalleyFamily::Spin(dim) => {
                let n = dim / 2;
                if dim % 2 == 1 {
                    order = pow(n * n)?;
                    for i in 1..=n {
                        order = order.checked_mul(pow(2 * i)? - 1).ok_or_else(overflow)?;
                    }
                } else {
                    order = pow(n * (n - 1))?.checked_mul(pow(n)? - 1).ok_or_else(overflow)?;
                    for i in 1..n {
                        order = order.checked_mul(pow(2 * i)? - 1).ok_or_else(overflow)?;
                    }
                }
                bump = Mutation::SpinOrder;
            }
        }
        Ok(order + (self.mutation == Some(bump)) as u128)
    }

    fn simple_lie_order(&self, family: ChevalleyFamily, q: u64, center: u64) -> Option<u128> {
        let order = self.chevalley_order(family, q).ok()?;
        (order % center as u128 == 0).then(|| order / center as u128)
    }

    /// Alternating groups A_5..A_9 and PSL_2, PSL_3, PSU_3, PSp_4 over every
    /// prime power, up to `CATALOGUE_ORDER_BOUND`.
    pub fn catalogue(&self) -> &[CatalogueEntry] {
        self.catalogue.get_or_init(|| {
            let mut out = Vec::new();
            let mut fact: u128 = 24;
            for m in 5..=9u32 {
                fact *= m as u128;
                out.push(CatalogueEntry {
                    order: fact / 2,
                    kind: CatalogueKind::Alternating(m),
                });
            }
            // q^3 / 2 bounds |PSL_2(q)| from below.
            let qmax = 30_000;
            for (q, p, f) in prime_powers(qmax) {
                let rows = [
                    ("PSL_2", ChevalleyFamily::Sl(2), LieTypeTag::a(1), (q - 1).gcd(&2)),
                    ("PSL_3", ChevalleyFamily::Sl(3), LieTypeTag::a(2), (q - 1).gcd(&3)),
                    ("PSU_3", ChevalleyFamily::Su(3), LieTypeTag::a(2), (q + 1).gcd(&3)),
                    (
                        "PSp_4",
                        ChevalleyFamily::Sp(4),
                        LieTypeTag::new(Family::C, 2).unwrap(),
                        (q - 1).gcd(&2),
                    ),
                ];
                for (name, fam, tag, center) in rows {
                    // small-q groups that are not simple
                    if (name == "PSL_2" && q < 4) || (name == "PSU_3" && q == 2) || (name == "PSp_4" && q == 2) {
                        continue;
                    }
                    let Some(order) = self.simple_lie_order(fam, q, center) else {
                        continue;
                    };
                    if order > CATALOGUE_ORDER_BOUND {
                        continue;
                    }
                    out.push(CatalogueEntry {
                        order,
                        kind: CatalogueKind::Lie {
                            lie_type: tag,
                            char_p: p,
                            f,
                            name: format!("{name}({q})"),
                        },
                    });
                }
            }
            out.sort_by(|a, b| a.order.cmp(&b.order));
            out
        })
    }

    /// Classify a simple group of the given order. Prime orders are cyclic.
    /// A characteristic-`ell` Lie-type reading wins over every other
    /// catalogue reading of the same order (so order 60 at `ell = 5` is
    /// PSL_2(5), not A_5).
    pub fn classify_factor(&self, order: u128, ell: u64) -> Result<CompositionFactor, LieTypeError> {
        if order <= u64::MAX as u128 && is_prime(order as u64) {
            return Ok(CompositionFactor {
                kind: FactorKind::Cyclic { p: order as u64 },
                order,
            });
        }
        let cat = self.catalogue();
        let start = cat.partition_point(|e| e.order < order);
        let matches: Vec<&CatalogueEntry> = cat[start..].iter().take_while(|e| e.order == order).collect();
        if order % ell as u128 == 0 {
            let lie: Vec<_> = matches
                .iter()
                .filter_map(|e| match &e.kind {
                    CatalogueKind::Lie {
                        lie_type,
                        char_p,
                        f,
                        name,
                    } if *char_p == ell => Some((*lie_type, *f, name.clone())),
                    _ => None,
                })
                .collect();
            debug_assert!(lie.len() <= 1, "catalogue collision at order {order}");
            if let Some((lie_type, f, name)) = lie.into_iter().next() {
                return Ok(CompositionFactor {
                    kind: FactorKind::LieCharEll { lie_type, f, name },
                    order,
                });
            }
        }
        if let Some(m) = matches.iter().find_map(|e| match e.kind {
            CatalogueKind::Alternating(m) => Some(m),
            _ => None,
        }) {
            return Ok(CompositionFactor {
                kind: FactorKind::Alternating { m },
                order,
            });
        }
        if let Some(name) = matches.iter().find_map(|e| match &e.kind {
            CatalogueKind::Lie { name, .. } => Some(name.clone()),
            _ => None,
        }) {
            return Ok(CompositionFactor {
                kind: FactorKind::OtherSimple { name: Some(name) },
                order,
            });
        }
        Err(LieTypeError::UnknownFactor(order))
    }

    /// l-dimension, per-type l-ranks and total l-rank of a factor multiset.
    pub fn rank_profile(&self, factors: &[CompositionFactor], _ell: u64) -> RankProfile {
        let mut profile = RankProfile::default();
        for fac in factors {
            if let FactorKind::LieCharEll { lie_type, f, .. } = &fac.kind {
                let f = *f as u64;
                profile.dim_ell += f * self.type_dim(*lie_type);
                let r = f * self.type_rank(*lie_type);
                *profile.per_type.entry(*lie_type).or_insert(0) += r;
                profile.rk_ell += r;
            }
        }
        profile
    }

    /// Pairs of characteristic-`p` Lie entries (`p >= 5`) sharing an order.
    pub fn catalogue_collisions(&self) -> Vec<(String, String)> {
        let cat = self.catalogue();
        let mut out = Vec::new();
        for w in cat.windows(2) {
            if w[0].order != w[1].order {
                continue;
            }
            if let (
                CatalogueKind::Lie { char_p: p0, name: n0, .. },
                CatalogueKind::Lie { char_p: p1, name: n1, .. },
            ) = (&w[0].kind, &w[1].kind)
            {
                if p0 == p1 && *p0 >= 5 {
                    out.push((n0.clone(), n1.clone()));
                }
            }
        }
        out
    }
}

fn default_tables() -> &'static LieTables {
    static TABLES: OnceLock<LieTables> = OnceLock::new();
    TABLES.get_or_init(LieTables::default)
}

pub fn type_dim(t: LieTypeTag) -> u64 {
    default_tables().type_dim(t)
}

pub fn type_rank(t: LieTypeTag) -> u64 {
    default_tables().type_rank(t)
}

pub fn chevalley_order(family: ChevalleyFamily, q: u64) -> Result<u128, LieTypeError> {
    default_tables().chevalley_order(family, q)
}

pub fn classify_factor(order: u128, ell: u64) -> Result<CompositionFactor, LieTypeError> {
    default_tables().classify_factor(order, ell)
}

pub fn rank_profile(factors: &[CompositionFactor], ell: u64) -> RankProfile {
    default_tables().rank_profile(factors, ell)
}

pub(crate) fn shared_tables() -> &'static LieTables {
    default_tables()
}
