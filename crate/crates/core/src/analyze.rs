//! One pass over an instance: both routes, their comparison, and every
//! certificate the declared ambient allows. Produces the report document.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::certify::{CertifyError, Certificate, Certifier, Criterion, StableLattice, Verdict};
use crate::grp::{composition_series_with, enumerate, group_order, GroupInstance, GrpError, DEFAULT_ORACLE_CAP};
use crate::liealg::{
    harvest_unipotents, nori_envelope, nori_envelope_from_unipotents, EnvelopeOptions, LieError, NoriEnvelope,
};
use crate::lietypes::{shared_tables, CompositionFactor, LieTables, LieTypeTag, RankProfile};

pub const TOOL: &str = concat!("ellrank ", env!("CARGO_PKG_VERSION"));

/// Exit statuses shared by the CLI and the self-test runner.
pub mod exit {
    pub const CLEAN: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const REFUTED: i32 = 2;
    pub const CAP_EXCEEDED: i32 = 3;
    pub const NON_COMPACT: i32 = 4;
    pub const UNKNOWN_FACTOR: i32 = 5;
    pub const CERTIFIED_WITH_FLAG: i32 = 6;
    pub const BAD_INPUT: i32 = 7;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub oracle_cap: u64,
    pub envelope: EnvelopeOptions,
    /// Random words tried when the group is too large to enumerate.
    pub harvest_words: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            oracle_cap: DEFAULT_ORACLE_CAP,
            envelope: EnvelopeOptions::default(),
            harvest_words: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RouteStatus {
    Ok,
    CapExceeded { cap: u64 },
    TooWide,
    UnknownFactor { order: u128 },
    CharTooSmall { bound: u64 },
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    Composition,
    Envelope,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub source: ProfileSource,
    pub dim_ell: u64,
    pub rk_ell: u64,
    pub per_type: BTreeMap<LieTypeTag, u64>,
    pub group_order: Option<u128>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<CompositionFactor>>,
}

impl Profile {
    pub fn rank_profile(&self) -> RankProfile {
        RankProfile {
            dim_ell: self.dim_ell,
            rk_ell: self.rk_ell,
            per_type: self.per_type.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub route_a: RouteStatus,
    pub route_b: RouteStatus,
    /// `(dim_ss, rank)` of the envelope equals `(dim_ell, rk_ell)`.
    pub routes_agree: Option<bool>,
    pub heuristic_regime: bool,
    pub sampled_rank: bool,
    /// The envelope was built from harvested elements only: a lower bound.
    pub partial_envelope: bool,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub profile: Option<Profile>,
    pub envelope: Option<NoriEnvelope>,
    pub certificates: Vec<Certificate>,
    pub flags: Flags,
    pub timings: BTreeMap<String, f64>,
}

impl Analysis {
    pub fn exit_code(&self) -> i32 {
        if matches!(self.flags.route_a, RouteStatus::UnknownFactor { .. }) {
            return exit::UNKNOWN_FACTOR;
        }
        if self.certificates.iter().any(|c| c.verdict == Verdict::Refuted) {
            return exit::REFUTED;
        }
        if matches!(self.flags.route_a, RouteStatus::CapExceeded { .. } | RouteStatus::TooWide) {
            return exit::CAP_EXCEEDED;
        }
        if self
            .certificates
            .iter()
            .any(|c| c.verdict == Verdict::Certified && c.evidence.heuristic_regime)
        {
            return exit::CERTIFIED_WITH_FLAG;
        }
        exit::CLEAN
    }

    pub fn certificate(&self, criterion: Criterion) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.criterion == criterion)
    }
}

fn route_b_status(e: &LieError) -> RouteStatus {
    match e {
        LieError::CharTooSmall { bound, .. } => RouteStatus::CharTooSmall { bound: *bound },
        _ => RouteStatus::Skipped,
    }
}

pub fn analyze(g: &GroupInstance, opts: &AnalyzeOptions) -> Result<Analysis, CertifyError> {
    analyze_with(g, opts, shared_tables())
}

/// Runs Route A (composition factors) and Route B (envelope) and evaluates
/// the certificates. Only a failed order cross-check is an error; every
/// other obstacle is recorded in the flags.
pub fn analyze_with(g: &GroupInstance, opts: &AnalyzeOptions, tables: &LieTables) -> Result<Analysis, CertifyError> {
    let ell = g.ell();
    let mut timings = BTreeMap::new();
    let mut warnings = Vec::new();
    let t0 = Instant::now();
    let enumerated = enumerate(g, opts.oracle_cap);
    timings.insert("enumerate".to_string(), t0.elapsed().as_secs_f64());

    let (route_a, envelope, route_b, partial, order) = match &enumerated {
        Ok(e) => {
            let t1 = Instant::now();
            let (factors, env) = rayon::join(
                || composition_series_with(e, ell, tables, opts.oracle_cap),
                || nori_envelope(e, opts.envelope),
            );
            timings.insert("routes".to_string(), t1.elapsed().as_secs_f64());
            let (env, status_b) = match env {
                Ok(v) => (Some(v), RouteStatus::Ok),
                Err(err) => (None, route_b_status(&err)),
            };
            (factors, env, status_b, false, Some(e.order() as u128))
        }
        Err(err) => {
            let err = err.clone();
            let t1 = Instant::now();
            let us = harvest_unipotents(g, opts.envelope.rank.seed, opts.harvest_words);
            let env = nori_envelope_from_unipotents(&g.field, g.n, &us, opts.envelope);
            timings.insert("routes".to_string(), t1.elapsed().as_secs_f64());
            let (env, status_b) = match env {
                Ok(v) => (Some(v), RouteStatus::Ok),
                Err(e) => (None, route_b_status(&e)),
            };
            let order = match group_order(g) {
                Ok(o) => Some(o),
                Err(GrpError::DomainTooLarge { .. } | GrpError::TooWide { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            warnings.push("envelope built from harvested order-l elements; it may be too small".to_string());
            (Err(err), env, status_b, true, order)
        }
    };

    let (profile, status_a) = match route_a {
        Ok(factors) => {
            let rp = tables.rank_profile(&factors, ell);
            (
                Some(Profile {
                    source: ProfileSource::Composition,
                    dim_ell: rp.dim_ell,
                    rk_ell: rp.rk_ell,
                    per_type: rp.per_type,
                    group_order: order,
                    factors: Some(factors),
                }),
                RouteStatus::Ok,
            )
        }
        Err(err) => {
            let status = match err {
                GrpError::CapExceeded { cap } => RouteStatus::CapExceeded { cap },
                GrpError::TooWide { .. } => RouteStatus::TooWide,
                GrpError::UnknownFactor(order) => RouteStatus::UnknownFactor { order },
                other => return Err(other.into()),
            };
            let fallback = envelope.as_ref().map(|env| Profile {
                source: ProfileSource::Envelope,
                dim_ell: env.dim_ss as u64,
                rk_ell: env.rank as u64,
                per_type: BTreeMap::new(),
                group_order: order,
                factors: None,
            });
            (fallback, status)
        }
    };

    let routes_agree = match (&profile, &envelope) {
        (Some(p), Some(env)) if p.source == ProfileSource::Composition => {
            Some(p.dim_ell == env.dim_ss as u64 && p.rk_ell == env.rank as u64)
        }
        _ => None,
    };

    let certifier = Certifier {
        tables,
        threshold_mult: opts.envelope.killing.threshold_mult,
    };
    let mut certificates = Vec::new();
    if let (Some(_), Some(p)) = (&g.ambient, &profile) {
        let rp = p.rank_profile();
        for c in [
            Criterion::RankBound,
            Criterion::TypeAFullness,
            Criterion::PerTypeFullness,
            Criterion::DimCriterion,
        ] {
            certificates.push(certifier.run(c, g, &rp)?);
        }
    }

    let heuristic_regime = envelope.as_ref().is_some_and(|e| e.heuristic_regime)
        || certificates.iter().any(|c| c.evidence.heuristic_regime);
    let sampled_rank = envelope.as_ref().is_some_and(|e| e.sample_seed.is_some());
    Ok(Analysis {
        profile,
        envelope,
        certificates,
        flags: Flags {
            route_a: status_a,
            route_b,
            routes_agree,
            heuristic_regime,
            sampled_rank,
            partial_envelope: partial,
            warnings,
        },
        timings,
    })
}

/// The emitted document. Timings are left out unless asked for, so equal
/// inputs and seeds give equal bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub input_digest: String,
    pub profile: Option<Profile>,
    pub envelope: Option<NoriEnvelope>,
    pub certificates: Vec<Certificate>,
    pub flags: Flags,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<StableLattice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn new(analysis: Analysis, input_digest: String, with_timings: bool) -> Report {
        Report {
            tool: TOOL.to_string(),
            input_digest,
            profile: analysis.profile,
            envelope: analysis.envelope,
            certificates: analysis.certificates,
            flags: analysis.flags,
            lattice: None,
            timings: with_timings.then_some(analysis.timings),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{AmbientSpec, FieldSpec};
    use crate::gf::Field;

    fn sl2(p: u64) -> GroupInstance {
        let k = Field::prime(p).unwrap();
        GroupInstance::new(
            k.clone(),
            2,
            vec![k.mat_from_ints(&[&[1, 1], &[0, 1]]), k.mat_from_ints(&[&[1, 0], &[1, 1]])],
        )
        .unwrap()
        .with_ambient(AmbientSpec::new(vec![LieTypeTag::a(1)], FieldSpec { prime: p, ext_degree: 1 }).unwrap())
    }

    #[test]
    fn sl2_f7_report() {
        let a = analyze(&sl2(7), &AnalyzeOptions::default()).unwrap();
        let p = a.profile.as_ref().unwrap();
        assert_eq!((p.dim_ell, p.rk_ell), (3, 1));
        assert_eq!(p.per_type.get(&LieTypeTag::a(1)), Some(&1));
        assert_eq!(p.group_order, Some(336));
        assert_eq!(a.flags.routes_agree, Some(true));
        assert!(a.certificates.iter().all(|c| c.verdict == Verdict::Certified));
        assert_eq!(
            a.certificate(Criterion::TypeAFullness).unwrap().evidence.cross_check.unwrap().group_order,
            336
        );
        assert_eq!(a.exit_code(), exit::CERTIFIED_WITH_FLAG);
    }

    #[test]
    fn torus_report() {
        let k = Field::prime(7).unwrap();
        let g = GroupInstance::new(k.clone(), 2, vec![k.mat_from_ints(&[&[3, 0], &[0, 5]])])
            .unwrap()
            .with_ambient(AmbientSpec::new(vec![LieTypeTag::a(1)], FieldSpec { prime: 7, ext_degree: 1 }).unwrap());
        let a = analyze(&g, &AnalyzeOptions::default()).unwrap();
        assert!(a.profile.as_ref().unwrap().rank_profile().is_zero());
        assert_eq!(a.certificate(Criterion::RankBound).unwrap().verdict, Verdict::Certified);
        assert_ne!(a.certificate(Criterion::TypeAFullness).unwrap().verdict, Verdict::Certified);
        assert_eq!(a.certificate(Criterion::DimCriterion).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn small_characteristic_is_flagged() {
        // SL_2 x SL_2 block in SL_4(F_5): l = 5 is not above 4 * dim
        let k = Field::prime(5).unwrap();
        let g = GroupInstance::new(
            k.clone(),
            4,
            vec![
                k.mat_from_ints(&[&[1, 1, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]),
                k.mat_from_ints(&[&[1, 0, 0, 0], &[1, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]),
            ],
        )
        .unwrap();
        let a = analyze(&g, &AnalyzeOptions::default()).unwrap();
        assert!(a.flags.heuristic_regime);
        assert!(a.certificates.is_empty());
        assert_eq!(a.exit_code(), exit::CLEAN);
    }

    #[test]
    fn over_cap_falls_back_to_envelope() {
        let opts = AnalyzeOptions {
            oracle_cap: 100,
            ..Default::default()
        };
        let a = analyze(&sl2(7), &opts).unwrap();
        assert_eq!(a.flags.route_a, RouteStatus::CapExceeded { cap: 100 });
        assert!(a.flags.partial_envelope);
        let p = a.profile.unwrap();
        assert_eq!(p.source, ProfileSource::Envelope);
        assert_eq!((p.dim_ell, p.rk_ell), (3, 1));
        assert_eq!(p.group_order, Some(336));
    }

    #[test]
    fn report_bytes_are_stable() {
        let a = analyze(&sl2(11), &AnalyzeOptions::default()).unwrap();
        let b = analyze(&sl2(11), &AnalyzeOptions::default()).unwrap();
        let ra = Report::new(a, "x".into(), false).to_json();
        let rb = Report::new(b, "x".into(), false).to_json();
        assert_eq!(ra, rb);
        assert!(!ra.contains("timings"));
    }
}
