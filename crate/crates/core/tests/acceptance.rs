//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N ...: PASS|FAIL` line before asserting.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracepp::families::{self, enumerate_family, family_instances, Case, Tag, TraceForm};
use tracepp::permcheck::{self, Domain};
use tracepp::ratmaps;
use tracepp::reductions;
use tracepp::search::{self, CensusOptions};
use tracepp::{Elem, FieldCtx};

fn report(n: u32, what: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n} ({what}): {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn is_prime_power(q: u64) -> bool {
    (2..=q).find(|d| q % d == 0).is_some_and(|p| {
        let mut r = q;
        while r % p == 0 {
            r /= p;
        }
        r == 1
    })
}

fn prime_and_degree(q: u64) -> (u64, u32) {
    let p = (2..=q).find(|d| q % d == 0).unwrap();
    let mut s = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        s += 1;
    }
    (p, s)
}

fn field(q: u64, n: u32) -> FieldCtx {
    let (p, s) = prime_and_degree(q);
    FieldCtx::new(p, s * n).unwrap()
}

/// Full image count, independent of the early-abort path.
fn bijective_by_count(ctx: &FieldCtx, form: &TraceForm) -> bool {
    let mut hit = vec![false; ctx.order() as usize];
    for x in ctx.elements() {
        hit[form.eval(ctx, x).index() as usize] = true;
    }
    hit.iter().all(|&h| h)
}

#[test]
fn criterion_1_family_verification() {
    let start = Instant::now();
    let mut covered: BTreeMap<char, BTreeSet<(u64, u32)>> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut instances = 0;
    for case in Case::ALL {
        for set in enumerate_family(case, 4096).unwrap() {
            if set.instances.is_empty() {
                continue;
            }
            let verdicts = set.verify_all().unwrap();
            for (inst, ok) in set.instances.iter().zip(verdicts) {
                instances += 1;
                let by_count = bijective_by_count(&set.ctx, &inst.form);
                if !ok || !by_count {
                    failures.push((case, set.q, set.n, inst.form.gamma.index()));
                }
            }
            covered
                .entry(case.letter())
                .or_default()
                .insert((set.q, set.n));
        }
    }
    let want: [(char, &[u64], u32); 9] = [
        (
            'a',
            &[
                5, 7, 11, 13, 17, 19, 23, 25, 29, 31, 37, 41, 43, 47, 49, 53, 59, 61,
            ],
            2,
        ),
        ('b', &[5, 11, 17, 23, 29], 2),
        ('c', &[7, 13, 19], 2),
        ('d', &[5, 13, 17], 2),
        ('e', &[9, 25, 49], 2),
        ('f', &[9, 25, 49], 2),
        ('g', &[3, 5, 7, 9, 11, 13], 3),
        ('h', &[3, 5, 7, 9, 11, 13], 3),
        ('i', &[3, 5, 7], 4),
    ];
    let mut missing = Vec::new();
    for (c, qs, n) in want {
        for &q in qs {
            if !covered.get(&c).is_some_and(|s| s.contains(&(q, n))) {
                missing.push((c, q, n));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && missing.is_empty();
    report(
        1,
        "family verification, q^n <= 4096",
        ok,
        &format!("{instances} instances, {secs:.1}s, failures {failures:?}, missing {missing:?}"),
    );
    assert!(ok);
}

/// `(q, n, k list, condition)` for each known exceptional form.
type Bullet = (u64, u32, &'static [u64], fn(&FieldCtx, Elem) -> bool);

fn bullets() -> Vec<Bullet> {
    fn g4_is_1(f: &FieldCtx, g: Elem) -> bool {
        f.pow_u(g, 4) == Elem::ONE
    }
    fn golden(f: &FieldCtx, g: Elem) -> bool {
        f.sub(f.mul(g, g), g) == Elem::ONE
    }
    fn shifted13(f: &FieldCtx, g: Elem) -> bool {
        f.pow_u(f.sub(g, Elem::ONE), 13) == f.pow_u(g, 13)
    }
    fn g4_is_minus1(f: &FieldCtx, g: Elem) -> bool {
        f.pow_u(g, 4) == f.neg(Elem::ONE)
    }
    fn g5_is_minus1(f: &FieldCtx, g: Elem) -> bool {
        f.pow_u(g, 5) == f.neg(Elem::ONE)
    }
    vec![
        (7, 2, &[10], g4_is_1),
        (9, 2, &[33], golden),
        (27, 2, &[261], shifted13),
        (9, 3, &[11, 19, 33, 57], g4_is_minus1),
        (49, 2, &[385], g5_is_minus1),
    ]
}

fn orbit_min(k: u64, q: u64, n: u32) -> u64 {
    let m = q.pow(n) - 1;
    let mut best = k % m;
    let mut cur = k % m;
    for _ in 0..n {
        cur = cur * q % m;
        best = best.min(cur);
    }
    if best == 0 {
        m
    } else {
        best
    }
}

#[test]
fn criterion_2_census_reproduction() {
    let start = Instant::now();
    let run = search::census(&CensusOptions::default(), None, false).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let records = &run.records;

    let found: BTreeSet<(u64, u32, u64)> = records
        .iter()
        .filter(|r| matches!(r.classification, Tag::Sporadic(_)))
        .map(|r| (r.q, r.n, r.k_min))
        .collect();
    let mut expected = BTreeSet::new();
    let mut gamma_problems = Vec::new();
    for (q, n, ks, cond) in bullets() {
        let spec = &records
            .iter()
            .find(|r| (r.q, r.n) == (q, n))
            .expect("field searched")
            .field_spec;
        let ctx = FieldCtx::from_spec(spec).unwrap();
        let solutions: BTreeSet<u32> = ctx
            .nonzero()
            .filter(|&g| cond(&ctx, g))
            .map(|g| g.index())
            .collect();
        for &k in ks {
            let km = orbit_min(k, q, n);
            expected.insert((q, n, km));
            let hits: BTreeSet<u32> = records
                .iter()
                .filter(|r| (r.q, r.n, r.k_min) == (q, n, km))
                .map(|r| r.gamma_index)
                .filter(|&g| cond(&ctx, ctx.elem(g as u64).unwrap()))
                .collect();
            if hits != solutions || solutions.is_empty() {
                gamma_problems.push((q, n, k));
            }
        }
    }
    let unexplained = run.report.unexplained.len();
    let library_cmp = search::compare_sporadics(records, 5000).unwrap();
    let bad = search::reverify(records).unwrap();
    let ok = unexplained == 0
        && found == expected
        && gamma_problems.is_empty()
        && library_cmp.is_exact()
        && bad.is_empty();
    report(
        2,
        "census q^n < 5000",
        ok,
        &format!(
            "{} fields, {} records, {unexplained} unexplained, sporadic orbits {found:?}, gamma mismatches {gamma_problems:?}, {secs:.1}s",
            run.report.fields.len(),
            records.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_proposition_equivalences() {
    let fields: Vec<(u64, u32)> = (3..=729u64)
        .filter(|&q| q % 2 == 1 && is_prime_power(q))
        .flat_map(|q| {
            (2..=6u32)
                .filter(move |&n| q.pow(n) <= 729)
                .map(move |n| (q, n))
        })
        .collect();
    let surj = reductions::surj_suite(&fields, 500, 2024).unwrap();
    let surj_fam = reductions::surj_family_suite(729).unwrap();
    let mut zlem = reductions::SuiteReport::default();
    for (q, n) in [(3, 2), (5, 2), (3, 3), (7, 2)] {
        let rep = reductions::zlem_suite(q, n, 200, q * 10 + n as u64).unwrap();
        zlem.cases += rep.cases;
        zlem.failures.extend(rep.failures);
    }
    let sq2 = reductions::red_sq2_suites(&[3, 5, 7, 9, 11, 13]).unwrap();
    // every N in [1, q+1] and every nonzero gamma of F_{q^2}
    let sq2_expected: u64 = [3u64, 5, 7, 9, 11, 13]
        .iter()
        .map(|q| (q + 1) * (q * q - 1))
        .sum();
    let ok = surj.passed()
        && surj.cases == 500
        && surj_fam.passed()
        && zlem.passed()
        && zlem.cases == 800
        && sq2.passed()
        && sq2.cases == sq2_expected;
    report(
        3,
        "proposition equivalences",
        ok,
        &format!(
            "surj {}+{} cases, zlem {} cases, red-sq2 {} cases; failures {:?}",
            surj.cases,
            surj_fam.cases,
            zlem.cases,
            sq2.cases,
            [
                surj.failures,
                surj_fam.failures,
                zlem.failures,
                sq2.failures
            ]
            .concat()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_rational_maps() {
    let mut bad = Vec::new();
    let qs: Vec<u64> = (5..=199)
        .filter(|&q| q % 2 != 0 && q % 3 != 0 && is_prime_power(q))
        .collect();
    for &q in &qs {
        let f = field(q, 1);
        let squares: BTreeSet<Elem> = f.elements().map(|x| f.mul(x, x)).collect();
        for nu in f.nonzero().filter(|nu| !squares.contains(nu)) {
            let map = ratmaps::theorem1_b_map(&f, nu).unwrap();
            if !permcheck::is_permutation(&f, &map, Domain::Field).unwrap() {
                bad.push(format!("b q={q} nu={}", nu.index()));
            }
        }
        let f2 = field(q, 2);
        let g = ratmaps::theorem1_c_map(&f2).unwrap();
        if !permcheck::permutes_mu(&f2, &g, q + 1)
            .unwrap()
            .is_permutation()
        {
            bad.push(format!("c q={q}"));
        }
    }
    for big_q in [3, 5, 7] {
        for (name, maps) in [
            ("case5", ratmaps::case5_maps(big_q)),
            ("case6", ratmaps::case6_maps(big_q)),
        ] {
            let rep = maps.unwrap().verify().unwrap();
            if !rep.all_pass() || rep.nonsquares_tested == 0 {
                bad.push(format!("{name} Q={big_q} {rep:?}"));
            }
        }
    }
    for q in [5, 7, 11, 13] {
        if !ratmaps::gdiff_factor_check(&field(q, 1), 7).unwrap() {
            bad.push(format!("gdiff q={q}"));
        }
    }
    let ok = bad.is_empty();
    report(
        4,
        "rational-map theorems",
        ok,
        &format!("{} q values, failures {bad:?}", qs.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_5_structure_checks() {
    let mut bad = Vec::new();
    for q in [7, 13, 19] {
        if !families::case_c_power_check(q).unwrap() {
            bad.push(format!("c q={q}"));
        }
    }
    for q in [5, 13] {
        if !families::case_d_split_check(q).unwrap() {
            bad.push(format!("d split q={q}"));
        }
        if !families::case_d_remark_check(q).unwrap() {
            bad.push(format!("d remark q={q}"));
        }
    }
    for q in [3, 5, 7] {
        if !ratmaps::case7_mu_identity_check(q).unwrap().all_pass() {
            bad.push(format!("g(x^2q) q={q}"));
        }
    }
    for q in [3, 5, 7, 9, 11] {
        if !ratmaps::case8_identity_check(q).unwrap().all_pass() {
            bad.push(format!("G(x^2) q={q}"));
        }
    }
    for (q, ell, n) in [(3u64, 1u32, 4u32), (5, 1, 4), (3, 1, 8)] {
        let set = family_instances(Case::I, q, Some((ell, n / (2 * ell)))).unwrap();
        let s = set.ctx.m() / n;
        let ok = !set.instances.is_empty()
            && set
                .instances
                .iter()
                .all(|i| ratmaps::case9_trace_identities(&set.ctx, s, ell, i.form.gamma).unwrap());
        if !ok {
            bad.push(format!("trace vanishing ({q},{ell},{n})"));
        }
    }
    let ok = bad.is_empty();
    report(
        5,
        "pointwise structure checks",
        ok,
        &format!("failures {bad:?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_6_lemma_checks() {
    let mut bad = Vec::new();
    for big_q in [3u64, 5, 7] {
        let rep = ratmaps::case5_lemma_checks(big_q).unwrap();
        if rep.roots != vec![Elem::ZERO] {
            bad.push(format!("Q={big_q} roots {:?}", rep.roots));
        }
        if big_q == 3 {
            // (Q^2-1)-th roots of -1 in F_81, counted directly
            let f = field(3, 4);
            let minus_one = f.neg(Elem::ONE);
            let direct: Vec<Elem> = f
                .nonzero()
                .filter(|&x| f.pow_u(x, 8) == minus_one)
                .collect();
            if direct.len() != 8 || rep.s_set != direct || !rep.s_fixed {
                bad.push(format!("Q=3 S has {} elements", rep.s_set.len()));
            }
        } else if !rep.s_set.is_empty() {
            bad.push(format!("Q={big_q} S nonempty"));
        }
    }
    let ok = bad.is_empty();
    report(6, "lemma-level checks", ok, &format!("failures {bad:?}"));
    assert!(ok);
}

/// `Some(delta)` when `Tr(x + u gamma) - Tr(x) = u delta` for all x, u,
/// straight from the trace form.
fn translator_delta(ctx: &FieldCtx, form: &TraceForm) -> Option<Elem> {
    let s = form.sub_degree(ctx);
    let delta = ctx.sub(
        form.trace_part(ctx, form.gamma),
        form.trace_part(ctx, Elem::ZERO),
    );
    let sub: Vec<Elem> = ctx
        .elements()
        .filter(|&u| ctx.in_subfield(u, s).unwrap())
        .collect();
    let ok = sub.iter().all(|&u| {
        ctx.elements().all(|x| {
            ctx.sub(
                form.trace_part(ctx, ctx.add(x, ctx.mul(u, form.gamma))),
                form.trace_part(ctx, x),
            ) == ctx.mul(u, delta)
        })
    });
    ok.then_some(delta)
}

#[test]
fn criterion_7_translator_dichotomy() {
    let mut bad = Vec::new();
    for (q, ell, r) in [(3u64, 1u32, 2u32), (5, 1, 2), (7, 1, 2)] {
        let set = family_instances(Case::I, q, Some((ell, r))).unwrap();
        let lib = reductions::family_translators(&set).unwrap();
        for (inst, d) in set.instances.iter().zip(&lib) {
            if *d != Some(Elem::ZERO) || translator_delta(&set.ctx, &inst.form) != Some(Elem::ZERO)
            {
                bad.push(format!("i q={q} gamma={}", inst.form.gamma.index()));
            }
        }
        if set.instances.is_empty() {
            bad.push(format!("i q={q} has no instances"));
        }
    }
    let samples: [(Case, u64); 8] = [
        (Case::A, 5),
        (Case::B, 5),
        (Case::C, 7),
        (Case::D, 5),
        (Case::E, 9),
        (Case::F, 9),
        (Case::G, 3),
        (Case::H, 3),
    ];
    for (case, q) in samples {
        let set = family_instances(case, q, None).unwrap();
        let lib = reductions::family_translators(&set).unwrap();
        let direct: Vec<Option<Elem>> = set
            .instances
            .iter()
            .map(|i| translator_delta(&set.ctx, &i.form))
            .collect();
        if lib != direct || !lib.iter().any(Option::is_none) {
            bad.push(format!("{case} q={q} {lib:?}"));
        }
    }
    let ok = bad.is_empty();
    report(7, "translator dichotomy", ok, &format!("failures {bad:?}"));
    assert!(ok);
}

#[test]
fn criterion_8_early_abort_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(2401);
    let fields = [(7u64, 4u32, field(7, 4)), (49, 2, field(49, 2))];
    let (mut rejected, mut total) = (0u64, 0u64);
    while rejected < 10_000 {
        let (q, n, ctx) = &fields[rng.gen_range(0..2)];
        let k = rng.gen_range(1..2401u64);
        let gamma = ctx.elem(rng.gen_range(1..2401)).unwrap();
        let form = TraceForm::new(ctx, *q, *n, k as u128, gamma).unwrap();
        if bijective_by_count(ctx, &form) {
            continue;
        }
        let out = permcheck::check_permutation(ctx, &form.as_map(ctx), Domain::Field).unwrap();
        assert!(!out.verdict.is_permutation());
        rejected += 1;
        total += out.evaluations;
    }
    let avg = total as f64 / rejected as f64;
    let ok = avg <= 490.0;
    report(
        8,
        "early-abort cost on F_2401",
        ok,
        &format!("average {avg:.1} evaluations over {rejected} rejections"),
    );
    assert!(ok);
}
