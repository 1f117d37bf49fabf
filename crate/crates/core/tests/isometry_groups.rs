//! Groups outside type A, through the full pipeline.

use ellrank::analyze::{analyze, AnalyzeOptions, ProfileSource, RouteStatus};
use ellrank::certify::{CertifyError, Criterion, Verdict};
use ellrank::corpus;
use ellrank::lietypes::LieTypeTag;

fn opts() -> AnalyzeOptions {
    AnalyzeOptions {
        oracle_cap: 10_000_000,
        ..AnalyzeOptions::default()
    }
}

#[test]
fn sp4_f5_is_certified_per_type() {
    let g = corpus::sp4(5);
    let a = analyze(&g, &opts()).unwrap();
    let p = a.profile.as_ref().unwrap();
    let c2: LieTypeTag = "C_2".parse().unwrap();
    assert_eq!(p.group_order, Some(9_360_000));
    assert_eq!((p.dim_ell, p.rk_ell), (10, 2));
    assert_eq!(p.per_type.get(&c2), Some(&2));
    assert_eq!(a.flags.routes_agree, Some(true));
    assert_eq!(a.certificate(Criterion::PerTypeFullness).unwrap().verdict, Verdict::Certified);
    // not type A: the type-A criterion stays silent
    assert_eq!(a.certificate(Criterion::TypeAFullness).unwrap().verdict, Verdict::Inconclusive);
}

#[test]
fn su3_f5_is_certified_as_unitary_type_a() {
    let g = corpus::su3(5);
    let a = analyze(&g, &opts()).unwrap();
    let p = a.profile.as_ref().unwrap();
    assert_eq!(p.group_order, Some(378_000));
    assert_eq!((p.dim_ell, p.rk_ell), (8, 2));
    // 6x6 over F_5 is too wide to enumerate; the envelope stands in
    assert_eq!(a.flags.route_a, RouteStatus::TooWide);
    assert_eq!(p.source, ProfileSource::Envelope);
    let typea = a.certificate(Criterion::TypeAFullness).unwrap();
    assert_eq!(typea.verdict, Verdict::Certified);
    assert_eq!(typea.evidence.cross_check.unwrap().chevalley_order, 378_000);
}

#[test]
fn split_declaration_of_a_unitary_group_fails_the_cross_check() {
    let g = corpus::su3(5).with_ambient(corpus::ambient(&["A_2"], 5, 1));
    match analyze(&g, &opts()) {
        Err(CertifyError::CrossCheckFailed { group_order, expected }) => {
            assert_eq!((group_order, expected), (378_000, 372_000));
        }
        other => panic!("expected a cross-check failure, got {other:?}"),
    }
}

#[test]
fn block_group_in_sl4_is_not_full() {
    let g = corpus::block_sl2_sl2(7).with_ambient(corpus::ambient(&["A_3"], 7, 1));
    let a = analyze(&g, &opts()).unwrap();
    assert_eq!(a.certificate(Criterion::PerTypeFullness).unwrap().verdict, Verdict::Inconclusive);
    assert_eq!(a.certificate(Criterion::TypeAFullness).unwrap().verdict, Verdict::Inconclusive);
    assert_eq!(a.certificate(Criterion::RankBound).unwrap().verdict, Verdict::Certified);
}
