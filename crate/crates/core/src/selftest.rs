//! The built-in acceptance corpus. Each criterion runs in isolation (a panic
//! fails that criterion only) and reports one line.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analyze::{analyze_with, AnalyzeOptions, Report};
use crate::certify::{
    reduce_mod_ell, stabilize_lattice, CertifyError, Certifier, RationalMat, Verdict, DEFAULT_THRESHOLD_MULT,
};
use crate::corpus;
use crate::gf::{Field, FieldElement, Mat};
use crate::grp::{composition_series_with, enumerate, group_order, EnumeratedGroup, GroupInstance};
use crate::instance::{canonical_digest, instance_to_json};
use crate::liealg::{nil_exp, nil_log, nori_envelope, EnvelopeOptions, NoriEnvelope};
use crate::lietypes::{ChevalleyFamily, LieTables, LieTypeTag, Mutation, RankProfile};

/// Enumeration cap used throughout the corpus; SL_3(F_7) needs more than the
/// library default.
pub const CORPUS_CAP: u64 = 10_000_000;

pub const DEFAULT_SEED: u64 = 0x5e1f_7e57;

#[derive(Clone, Debug)]
pub struct SelftestConfig {
    /// Defect injected into every table the criteria consult.
    pub mutation: Option<Mutation>,
    /// Seed for the randomized criteria.
    pub seed: u64,
    pub subgroup_samples: usize,
    pub exp_log_samples: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            mutation: None,
            seed: DEFAULT_SEED,
            subgroup_samples: 200,
            exp_log_samples: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl Outcome {
    /// `PASS [3] title: detail`, with the elapsed time appended on request.
    pub fn line(&self, timings: bool) -> String {
        let mut s = format!(
            "{} [{}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail
        );
        if timings {
            s.push_str(&format!(" ({:.2} s of {:.0} s)", self.seconds, self.budget));
        }
        s
    }
}

pub const CRITERIA: [(u32, &str, f64); 10] = [
    (1, "exp and log are mutually inverse", 5.0),
    (2, "profiles of SL_2(F_7) and SL_2(F_25)", 60.0),
    (3, "l-rank of SL_m(F_q) is f(m-1)", 600.0),
    (4, "solvable groups have zero profile", 10.0),
    (5, "composition and envelope routes agree", 900.0),
    (6, "random subgroups of SL_3(F_7) have l-rank at most 2", 600.0),
    (7, "certified fullness matches the group order", 120.0),
    (8, "proper subgroups have smaller l-rank", 300.0),
    (9, "lattice stabilization and reduction", 5.0),
    (10, "determinism and mutation sensitivity", 1200.0),
];

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// State shared between criteria: the tables in force and the expensive
/// SL_3(F_7) computations, done at most once.
struct Ctx {
    cfg: SelftestConfig,
    tables: LieTables,
    sl37: OnceLock<Result<EnumeratedGroup, String>>,
    sl37_profile: OnceLock<Result<RankProfile, String>>,
}

impl Ctx {
    fn new(cfg: SelftestConfig) -> Ctx {
        Ctx {
            tables: LieTables::with_mutation(cfg.mutation),
            cfg,
            sl37: OnceLock::new(),
            sl37_profile: OnceLock::new(),
        }
    }

    fn sl37(&self) -> Result<&EnumeratedGroup, String> {
        self.sl37
            .get_or_init(|| enumerate(&corpus::sl(3, 7, 1), CORPUS_CAP).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn sl37_profile(&self) -> Result<RankProfile, String> {
        self.sl37_profile
            .get_or_init(|| {
                let e = self.sl37()?;
                let f = composition_series_with(e, 7, &self.tables, CORPUS_CAP).map_err(|e| e.to_string())?;
                Ok(self.tables.rank_profile(&f, 7))
            })
            .clone()
    }

    /// Route A profile and order, reusing the SL_3(F_7) cache.
    fn route_a(&self, g: &GroupInstance) -> Result<(RankProfile, u64), String> {
        let e = enumerate(g, CORPUS_CAP).map_err(|e| e.to_string())?;
        let f = composition_series_with(&e, g.ell(), &self.tables, CORPUS_CAP).map_err(|e| e.to_string())?;
        Ok((self.tables.rank_profile(&f, g.ell()), e.order()))
    }
}

fn short(p: &RankProfile) -> String {
    format!("({}, {})", p.dim_ell, p.rk_ell)
}

fn envelope(e: &EnumeratedGroup) -> Result<NoriEnvelope, String> {
    nori_envelope(e, EnvelopeOptions::default()).map_err(|e| e.to_string())
}

/// Runs the criteria whose ids are in `only` (all when `None`), in order.
pub fn run(cfg: &SelftestConfig, only: Option<&[u32]>) -> Vec<Outcome> {
    let ctx = Ctx::new(cfg.clone());
    CRITERIA
        .iter()
        .filter(|(id, _, _)| only.is_none_or(|o| o.contains(id)))
        .map(|&(id, title, budget)| {
            let t = Instant::now();
            let res = catch_unwind(AssertUnwindSafe(|| dispatch(&ctx, id)));
            let seconds = t.elapsed().as_secs_f64();
            let (passed, detail) = match res {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(p) => {
                    let msg = p
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_else(|| "panic".to_string());
                    (false, format!("panicked: {msg}"))
                }
            };
            let (passed, detail) = if passed && seconds > budget {
                (false, format!("{detail}; over the {budget:.0} s budget"))
            } else {
                (passed, detail)
            };
            Outcome {
                id,
                title,
                passed,
                detail,
                seconds,
                budget,
            }
        })
        .collect()
}

fn dispatch(ctx: &Ctx, id: u32) -> Check {
    match id {
        1 => exp_log(ctx),
        2 => small_profiles(ctx),
        3 => sl_ranks(ctx, true),
        4 => solvable(ctx),
        5 => dual_route(ctx),
        6 => random_subgroups(ctx),
        7 => fullness(ctx),
        8 => proper_subgroups(ctx),
        9 => lattice(ctx),
        10 => determinism_and_mutations(ctx),
        _ => Err(format!("no criterion {id}")),
    }
}

fn random_invertible(k: &Field, n: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        let entries = (0..n * n).map(|_| FieldElement(rng.gen_range(0..k.order()) as u32)).collect();
        let m = Mat::from_entries(n, entries).expect("n x n");
        if k.is_invertible(&m) {
            return m;
        }
    }
}

fn random_special(k: &Field, n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut m = random_invertible(k, n, rng);
    let d = k.inv(k.det(&m)).expect("invertible");
    for j in 0..n {
        m.set(0, j, k.mul(d, m.get(0, j)));
    }
    m
}

fn random_conjugated_nilpotent(k: &Field, n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let mut x = Mat::zero(n);
    for i in 0..n {
        for j in i + 1..n {
            x.set(i, j, FieldElement(rng.gen_range(0..k.order()) as u32));
        }
    }
    let p = random_invertible(k, n, rng);
    let pi = k.mat_inv(&p).expect("invertible");
    k.mat_mul(&k.mat_mul(&p, &x), &pi)
}

fn exp_log(ctx: &Ctx) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut checked = 0usize;
    for ell in [5u64, 7, 11, 13] {
        let k = Field::prime(ell).map_err(|e| e.to_string())?;
        for n in 1..=4 {
            for _ in 0..ctx.cfg.exp_log_samples {
                let x = random_conjugated_nilpotent(&k, n, &mut rng);
                let u = nil_exp(&k, &x, FieldElement::ONE).map_err(|e| e.to_string())?;
                let back = nil_log(&k, &u).map_err(|e| e.to_string())?;
                ensure!(back == x, "log(exp(x)) != x at l = {ell}, n = {n}");
                let v = k.mat_add(&Mat::identity(n), &random_conjugated_nilpotent(&k, n, &mut rng));
                let y = nil_log(&k, &v).map_err(|e| e.to_string())?;
                let again = nil_exp(&k, &y, FieldElement::ONE).map_err(|e| e.to_string())?;
                ensure!(again == v, "exp(log(u)) != u at l = {ell}, n = {n}");
                checked += 2;
            }
        }
    }
    Ok(format!("{checked} round trips exact"))
}

fn small_profiles(ctx: &Ctx) -> Check {
    let (p, order) = ctx.route_a(&corpus::sl(2, 7, 1))?;
    let a1 = LieTypeTag::a(1);
    ensure!(
        p.dim_ell == 3 && p.rk_ell == 1 && p.per_type.get(&a1) == Some(&1) && p.per_type.len() == 1,
        "SL_2(F_7) gave {p:?}"
    );
    ensure!(order == 336, "SL_2(F_7) enumerated to {order} elements");
    let (q, order) = ctx.route_a(&corpus::sl(2, 5, 2))?;
    ensure!(q.dim_ell == 6 && q.rk_ell == 2, "SL_2(F_25) gave {q:?}");
    ensure!(order == 15600, "SL_2(F_25) enumerated to {order} elements");
    Ok(format!("SL_2(F_7) {} with A_1: 1, SL_2(F_25) {}", short(&p), short(&q)))
}

fn sl_ranks(ctx: &Ctx, with_sl37: bool) -> Check {
    let mut cases: Vec<(usize, u64, usize)> = vec![(2, 5, 1), (2, 7, 1), (2, 11, 1), (2, 5, 2), (3, 5, 1)];
    if with_sl37 {
        cases.push((3, 7, 1));
    }
    let mut seen = Vec::new();
    for &(m, ell, f) in &cases {
        let p = if (m, ell, f) == (3, 7, 1) {
            ctx.sl37_profile()?
        } else {
            ctx.route_a(&corpus::sl(m, ell, f))?.0
        };
        let want = (f * (m - 1)) as u64;
        ensure!(p.rk_ell == want, "SL_{m}(F_{ell}^{f}) has rk_ell {} not {want}", p.rk_ell);
        seen.push(format!("SL_{m}({}^{f})={}", ell, p.rk_ell));
    }
    Ok(seen.join(" "))
}

fn solvable(ctx: &Ctx) -> Check {
    let mut count = 0;
    for ell in [5u64, 7] {
        for m in [2usize, 3] {
            for (name, g) in [
                ("Borel", corpus::borel(m, ell)),
                ("torus", corpus::torus(m, ell)),
                ("unipotent", corpus::unipotent(m, ell)),
            ] {
                let e = enumerate(&g, CORPUS_CAP).map_err(|e| e.to_string())?;
                let f = composition_series_with(&e, ell, &ctx.tables, CORPUS_CAP).map_err(|e| e.to_string())?;
                let p = ctx.tables.rank_profile(&f, ell);
                ensure!(p.is_zero(), "{name} of SL_{m}(F_{ell}) has profile {p:?}");
                let env = envelope(&e)?;
                ensure!(
                    env.dim_ss == 0 && env.rank == 0,
                    "{name} of SL_{m}(F_{ell}) has envelope ({}, {})",
                    env.dim_ss,
                    env.rank
                );
                count += 1;
            }
        }
    }
    Ok(format!("{count} groups, both routes zero"))
}

fn dual_route(ctx: &Ctx) -> Check {
    let mut corpus_list: Vec<(String, GroupInstance)> = Vec::new();
    for ell in [7u64, 11] {
        corpus_list.push((format!("SL_2(F_{ell})"), corpus::sl(2, ell, 1)));
        corpus_list.push((format!("Borel of SL_2(F_{ell})"), corpus::borel(2, ell)));
        corpus_list.push((format!("torus of SL_2(F_{ell})"), corpus::torus(2, ell)));
    }
    corpus_list.push(("Borel of SL_3(F_7)".into(), corpus::borel(3, 7)));
    corpus_list.push(("torus of SL_3(F_7)".into(), corpus::torus(3, 7)));
    corpus_list.push(("SL_2 x SL_2 in SL_4(F_7)".into(), corpus::block_sl2_sl2(7)));
    corpus_list.push(("principal SL_2 in SL_3(F_7)".into(), corpus::principal_sl2(3, 7)));
    corpus_list.push(("principal SL_2 in SL_3(F_11)".into(), corpus::principal_sl2(3, 11)));
    corpus_list.push(("SL_2(F_49)".into(), corpus::sl(2, 7, 2)));
    let mut agreed = 0;
    for (name, g) in &corpus_list {
        let e = enumerate(g, CORPUS_CAP).map_err(|e| e.to_string())?;
        let f = composition_series_with(&e, g.ell(), &ctx.tables, CORPUS_CAP).map_err(|e| e.to_string())?;
        let p = ctx.tables.rank_profile(&f, g.ell());
        let env = envelope(&e)?;
        ensure!(
            (p.dim_ell, p.rk_ell) == (env.dim_ss as u64, env.rank as u64),
            "{name}: composition {} but envelope ({}, {})",
            short(&p),
            env.dim_ss,
            env.rank
        );
        agreed += 1;
    }
    let p = ctx.sl37_profile()?;
    let env = envelope(ctx.sl37()?)?;
    ensure!(
        (p.dim_ell, p.rk_ell) == (env.dim_ss as u64, env.rank as u64),
        "SL_3(F_7): composition {} but envelope ({}, {})",
        short(&p),
        env.dim_ss,
        env.rank
    );
    agreed += 1;
    Ok(format!("{agreed} instances agree"))
}

fn random_subgroups(ctx: &Ctx) -> Check {
    let k = Field::prime(7).map_err(|e| e.to_string())?;
    let full = ctx.tables.chevalley_order(ChevalleyFamily::Sl(3), 7).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed ^ 0x53_4c_33);
    let (mut n_full, mut n_proper, mut max_rk) = (0, 0, 0);
    for i in 0..ctx.cfg.subgroup_samples {
        let gens = vec![random_special(&k, 3, &mut rng), random_special(&k, 3, &mut rng)];
        let g = GroupInstance::new(k.clone(), 3, gens).map_err(|e| e.to_string())?;
        let order = group_order(&g).map_err(|e| e.to_string())?;
        let p = if order == full {
            n_full += 1;
            ctx.sl37_profile()?
        } else {
            n_proper += 1;
            ctx.route_a(&g).map_err(|e| format!("sample {i}: {e}"))?.0
        };
        ensure!(p.rk_ell <= 2, "sample {i} (order {order}) has rk_ell {}", p.rk_ell);
        max_rk = max_rk.max(p.rk_ell);
    }
    Ok(format!("{n_full} full, {n_proper} proper, largest rk_ell {max_rk}"))
}

fn fullness(ctx: &Ctx) -> Check {
    let certifier = Certifier {
        tables: &ctx.tables,
        threshold_mult: DEFAULT_THRESHOLD_MULT,
    };
    let a2 = |ell| corpus::ambient(&["A_2"], ell, 1);
    let expect_full = [
        ("SL_2(F_5)", corpus::sl(2, 5, 1), Some(120u128)),
        ("SL_2(F_7)", corpus::sl(2, 7, 1), Some(336)),
        ("SL_2(F_11)", corpus::sl(2, 11, 1), None),
        ("SL_2(F_25)", corpus::sl(2, 5, 2), None),
        ("SL_3(F_5)", corpus::sl(3, 5, 1), None),
        ("SL_2 x SL_2", corpus::block_sl2_sl2(7), None),
    ];
    let never = [
        ("Borel of SL_3(F_7)", corpus::borel(3, 7).with_ambient(a2(7))),
        ("torus of SL_3(F_7)", corpus::torus(3, 7).with_ambient(a2(7))),
        ("Levi of SL_3(F_7)", corpus::levi_21(7).with_ambient(a2(7))),
        ("principal SL_2 in SL_3(F_7)", corpus::principal_sl2(3, 7).with_ambient(a2(7))),
    ];
    let mut certified = 0;
    for (name, g, literal) in &expect_full {
        let (p, _) = ctx.route_a(g)?;
        let cert = match certifier.certify_fullness_type_a(g, &p) {
            Ok(c) => c,
            Err(CertifyError::CrossCheckFailed { group_order, expected }) => {
                return Err(format!("{name}: certified but |G| = {group_order}, formula {expected}"))
            }
            Err(e) => return Err(format!("{name}: {e}")),
        };
        ensure!(cert.verdict == Verdict::Certified, "{name}: {:?} ({})", cert.verdict, cert.evidence.note);
        let cc = cert.evidence.cross_check.ok_or(format!("{name}: no order cross-check"))?;
        ensure!(cc.group_order == cc.chevalley_order, "{name}: {cc:?}");
        if let Some(v) = literal {
            ensure!(cc.group_order == *v, "{name}: order {} not {v}", cc.group_order);
        }
        certified += 1;
    }
    for (name, g) in &never {
        let (p, _) = ctx.route_a(g)?;
        let cert = certifier.certify_fullness_type_a(g, &p).map_err(|e| format!("{name}: {e}"))?;
        ensure!(cert.verdict != Verdict::Certified, "{name} was certified full");
    }
    // formulas outside type A, against stabilizer chains
    let t = &ctx.tables;
    let order = |g: &GroupInstance| group_order(g).map_err(|e| e.to_string());
    let formula = |f, q| t.chevalley_order(f, q).map_err(|e| e.to_string());
    let sp45 = order(&corpus::sp4(5))?;
    ensure!(sp45 == formula(ChevalleyFamily::Sp(4), 5)?, "|Sp_4(F_5)| = {sp45} disagrees with the formula");
    let su35 = order(&corpus::su3(5))?;
    ensure!(su35 == formula(ChevalleyFamily::Su(3), 5)?, "|SU_3(F_5)| = {su35} disagrees with the formula");
    let sl45 = order(&corpus::sl(4, 5, 1))?;
    ensure!(formula(ChevalleyFamily::Spin(5), 5)? == sp45, "|Spin_5(F_5)| != |Sp_4(F_5)| = {sp45}");
    ensure!(formula(ChevalleyFamily::Spin(6), 5)? == sl45, "|Spin_6(F_5)| != |SL_4(F_5)| = {sl45}");
    Ok(format!(
        "{certified} certified with matching orders, {} subgroups refused; Sp_4, SU_3, Spin orders match",
        never.len()
    ))
}

fn proper_subgroups(ctx: &Ctx) -> Check {
    let mut count = 0;
    for ell in [7u64, 11] {
        let cases: Vec<(&str, usize, GroupInstance)> = vec![
            ("Borel", 2, corpus::borel(2, ell)),
            ("torus", 2, corpus::torus(2, ell)),
            ("Borel", 3, corpus::borel(3, ell)),
            ("torus", 3, corpus::torus(3, ell)),
            ("unipotent", 3, corpus::unipotent(3, ell)),
            ("Levi", 3, corpus::levi_21(ell)),
            ("parabolic", 3, corpus::parabolic_21(ell)),
            ("principal SL_2", 3, corpus::principal_sl2(3, ell)),
            ("SL_2 x SL_2", 4, corpus::block_sl2_sl2(ell)),
            ("principal SL_2", 4, corpus::principal_sl2(4, ell)),
        ];
        for (name, m, g) in cases {
            let (p, _) = ctx.route_a(&g)?;
            ensure!(
                p.rk_ell < (m - 1) as u64,
                "{name} in SL_{m}(F_{ell}) has rk_ell {} >= {}",
                p.rk_ell,
                m - 1
            );
            count += 1;
        }
    }
    Ok(format!("{count} subgroups strictly below"))
}

fn lattice(ctx: &Ctx) -> Check {
    let gens = [
        RationalMat::from_fracs(&[&[(1, 1), (1, 7)], &[(0, 1), (1, 1)]]),
        RationalMat::from_fracs(&[&[(1, 1), (0, 1)], &[(7, 1), (1, 1)]]),
    ];
    let st = stabilize_lattice(&gens, 7, 10).map_err(|e| e.to_string())?;
    ensure!(st.iterations <= 2, "took {} iterations", st.iterations);
    let g = reduce_mod_ell(&st.generators, 7).map_err(|e| e.to_string())?;
    let (p, order) = ctx.route_a(&g)?;
    let (want, _) = ctx.route_a(&corpus::sl(2, 7, 1))?;
    ensure!(p == want, "reduction has profile {p:?}, SL_2(F_7) has {want:?}");
    ensure!(order == 336, "reduction has order {order}");
    let d = [RationalMat::from_fracs(&[&[(5, 1), (0, 1)], &[(0, 1), (1, 5)]])];
    match stabilize_lattice(&d, 5, 10) {
        Err(CertifyError::NonCompact { .. }) => {}
        other => return Err(format!("diag(5, 1/5) gave {other:?}")),
    }
    Ok(format!(
        "{} iterations, reduction {}, diag(5, 1/5) non-compact",
        st.iterations,
        short(&p)
    ))
}

fn report_bytes(ctx: &Ctx, g: &GroupInstance) -> Result<String, String> {
    let opts = AnalyzeOptions {
        oracle_cap: CORPUS_CAP,
        ..AnalyzeOptions::default()
    };
    let a = analyze_with(g, &opts, &ctx.tables).map_err(|e| e.to_string())?;
    Ok(Report::new(a, canonical_digest(&instance_to_json(g)), false).to_json())
}

fn determinism_and_mutations(ctx: &Ctx) -> Check {
    let samples = [
        corpus::sl(2, 7, 1),
        corpus::sl(2, 5, 2),
        corpus::borel(3, 7),
        corpus::block_sl2_sl2(7),
        // beyond the rank sampling threshold
        corpus::sl(3, 5, 1),
    ];
    for g in &samples {
        let first = report_bytes(ctx, g)?;
        let second = report_bytes(ctx, g)?;
        ensure!(first == second, "reports differ between runs for {}", instance_to_json(g));
    }
    let mut caught = Vec::new();
    for m in Mutation::ALL {
        let mutated = Ctx::new(SelftestConfig {
            mutation: Some(m),
            ..ctx.cfg.clone()
        });
        let failing: Vec<u32> = [(2, small_profiles(&mutated)), (3, sl_ranks(&mutated, false)), (7, fullness(&mutated))]
            .into_iter()
            .filter(|(_, r)| r.is_err())
            .map(|(id, _)| id)
            .collect();
        ensure!(!failing.is_empty(), "mutation {m:?} went unnoticed");
        caught.push(format!("{m:?}->{failing:?}"));
    }
    Ok(format!("{} reports stable; {}", samples.len(), caught.join(" ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        let cfg = SelftestConfig {
            exp_log_samples: 50,
            ..SelftestConfig::default()
        };
        for o in run(&cfg, Some(&[1, 2, 4, 9])) {
            assert!(o.passed, "{}", o.line(true));
        }
    }

    #[test]
    fn mutation_fails_a_line() {
        let cfg = SelftestConfig {
            mutation: Some(Mutation::SlOrder),
            ..SelftestConfig::default()
        };
        let out = run(&cfg, Some(&[2]));
        assert!(!out[0].passed);
        assert!(out[0].line(false).starts_with("FAIL [2]"));
    }
}
