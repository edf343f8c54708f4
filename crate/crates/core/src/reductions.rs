//! Criteria that reduce bijectivity of `x + gamma f(x)` (with `f` landing in
//! the subfield F_q) to smaller problems: one map per line `alpha + gamma F_q`,
//! a map on the subgroup mu_{(q^n-1)/(q-1)}, and a rational map on mu_{q+1}
//! when n = 2. Plus the linear-translator test.
//!
//! Functions `f: F_{q^n} -> F_q` are passed as value tables indexed by
//! [`Elem::index`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::families::{enumerate_family, Case, FamilySet};
use crate::ffield::{Elem, FieldCtx};
use crate::permcheck::{self, Domain, SeenSet, Total};
use crate::poly::Poly;
use crate::ratmaps::{half_degree_order, RationalMap};

/// Which form of the line criterion to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineMode {
    /// `x -> x + f(alpha + gamma x)` permutes F_q.
    Bijective,
    /// `x + f(alpha + gamma x) = 0` has exactly one solution in F_q.
    UniqueRoot,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineCriterionReport {
    pub alpha: Elem,
    pub holds: bool,
    /// Two distinct points of F_q with equal value under the line map,
    /// present exactly when `holds` is false.
    pub witness: Option<(Elem, Elem)>,
}

#[derive(Clone, Debug)]
pub struct SurjOutcome {
    pub holds: bool,
    pub reports: Vec<LineCriterionReport>,
}

fn check_subfield_table(ctx: &FieldCtx, sub_degree: u32, f: &[Elem]) -> Result<()> {
    if f.len() != ctx.order() as usize {
        return Err(Error::Precondition(format!(
            "table has {} entries, field has {}",
            f.len(),
            ctx.order()
        )));
    }
    for (i, &v) in f.iter().enumerate() {
        if !ctx.in_subfield(v, sub_degree)? {
            return Err(Error::OutsideSubfield(format!(
                "f({i}) = {} is not in the subfield of degree {sub_degree}",
                ctx.format(v)
            )));
        }
    }
    Ok(())
}

/// First colliding pair of `line` over `sub`, if any.
fn line_collision(
    ctx: &FieldCtx,
    sub: &[Elem],
    line: impl Fn(Elem) -> Elem,
) -> Option<(Elem, Elem)> {
    let mut seen = SeenSet::new(ctx.order() as usize);
    for (i, &x) in sub.iter().enumerate() {
        let y = line(x);
        if !seen.insert(y.index()) {
            let first = sub[..i].iter().copied().find(|&z| line(z) == y)?;
            return Some((first, x));
        }
    }
    None
}

/// Evaluates the line criterion for every `alpha` in F_{q^n}. The verdict
/// equals bijectivity of `x -> x + gamma f(x)` on F_{q^n}.
pub fn surj_criterion(
    ctx: &FieldCtx,
    sub_degree: u32,
    f: &[Elem],
    gamma: Elem,
    mode: LineMode,
) -> Result<SurjOutcome> {
    if gamma.is_zero() {
        return Err(Error::Precondition("gamma must be nonzero".into()));
    }
    if ctx.m() / sub_degree < 2 {
        return Err(Error::Precondition("need n >= 2".into()));
    }
    check_subfield_table(ctx, sub_degree, f)?;
    let sub = ctx.subfield_elements(sub_degree)?;
    let reports: Vec<LineCriterionReport> = ctx
        .elements()
        .map(|alpha| {
            let line = |x: Elem| ctx.add(x, f[ctx.add(alpha, ctx.mul(gamma, x)).index() as usize]);
            let witness = match mode {
                LineMode::Bijective => line_collision(ctx, &sub, line),
                LineMode::UniqueRoot => {
                    let zeros: Vec<Elem> =
                        sub.iter().copied().filter(|&x| line(x).is_zero()).collect();
                    match zeros.len() {
                        1 => None,
                        0 => line_collision(ctx, &sub, line),
                        _ => Some((zeros[0], zeros[1])),
                    }
                }
            };
            LineCriterionReport {
                alpha,
                holds: witness.is_none(),
                witness,
            }
        })
        .collect();
    Ok(SurjOutcome {
        holds: reports.iter().all(|r| r.holds),
        reports,
    })
}

/// Bijectivity of `x -> x + gamma f(x)` on the whole field, by direct check.
pub fn form_permutes(ctx: &FieldCtx, f: &[Elem], gamma: Elem) -> Result<bool> {
    let map = Total(|x: Elem| ctx.add(x, ctx.mul(gamma, f[x.index() as usize])));
    permcheck::is_permutation(ctx, &map, Domain::Field)
}

/// Returns `(left, right)`: whether `X h(X^{q-1})` permutes F_{q^n} and
/// whether `X h(X)^{q-1}` permutes mu_{(q^n-1)/(q-1)}. The two always agree.
pub fn zlem_check(ctx: &FieldCtx, sub_degree: u32, h: &Poly) -> Result<(bool, bool)> {
    let q = ctx.subfield_order(sub_degree)?;
    let d = ctx.group_order() as u64 / (q - 1);
    let left = Total(|x: Elem| ctx.mul(x, h.eval(ctx, ctx.pow_u(x, q - 1))));
    let right = Total(|x: Elem| ctx.mul(x, ctx.pow_u(h.eval(ctx, x), q - 1)));
    Ok((
        permcheck::is_permutation(ctx, &left, Domain::Field)?,
        permcheck::permutes_mu(ctx, &right, d)?.is_permutation(),
    ))
}

/// For n = 2, a homogeneous `f` (f(ux) = u f(x) for u in F_q) and `omega`
/// independent of `gamma` over F_q: `f(gamma) != -1` and the line map at
/// `omega` permutes F_q.
pub fn red_sq1_check(
    ctx: &FieldCtx,
    sub_degree: u32,
    f: &[Elem],
    gamma: Elem,
    omega: Elem,
    seed: u64,
) -> Result<bool> {
    if ctx.m() != 2 * sub_degree {
        return Err(Error::Precondition("need n = 2".into()));
    }
    check_subfield_table(ctx, sub_degree, f)?;
    let sub = ctx.subfield_elements(sub_degree)?;
    if gamma.is_zero() || omega.is_zero() || ctx.in_subfield(ctx.div(omega, gamma)?, sub_degree)? {
        return Err(Error::Precondition(
            "gamma and omega are linearly dependent over F_q".into(),
        ));
    }
    let at = |x: Elem| f[x.index() as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let x = Elem::from_raw(rng.gen_range(0..ctx.order()));
        if let Some(&u) = sub
            .iter()
            .find(|&&u| at(ctx.mul(u, x)) != ctx.mul(u, at(x)))
        {
            return Err(Error::Precondition(format!(
                "f is not homogeneous: f({} * {}) != {} * f(x)",
                ctx.format(u),
                ctx.format(x),
                ctx.format(u)
            )));
        }
    }
    if at(gamma) == ctx.from_int(-1) {
        return Ok(false);
    }
    let line = |x: Elem| ctx.add(x, at(ctx.add(omega, ctx.mul(gamma, x))));
    Ok(line_collision(ctx, &sub, line).is_none())
}

/// `H(X) = (X^N + gamma^q (1 + X^{2N-1})) / (X^{N-1} + gamma (X^{2N-1} + 1))`
/// over F_{q^2}. It permutes mu_{q+1} exactly when
/// `X + gamma Tr(X^{(q-1)N+1})` permutes F_{q^2}.
pub fn red_sq2_h(ctx: &FieldCtx, n_exp: usize, gamma: Elem) -> Result<RationalMap<'_>> {
    let q = half_degree_order(ctx)?;
    if gamma.is_zero() {
        return Err(Error::Precondition("gamma must be nonzero".into()));
    }
    if n_exp == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    let gq = ctx.pow_u(gamma, q);
    let num = Poly::from_terms(ctx, &[(n_exp, Elem::ONE), (0, gq), (2 * n_exp - 1, gq)]);
    let den = Poly::from_terms(
        ctx,
        &[(n_exp - 1, Elem::ONE), (2 * n_exp - 1, gamma), (0, gamma)],
    );
    RationalMap::new(ctx, num, den)
}

/// The exponent `k = (q-1)N + 1` paired with [`red_sq2_h`].
pub fn red_sq2_k(q: u64, n_exp: u64) -> u64 {
    (q - 1) * n_exp + 1
}

/// `delta` with `f(x + u gamma) - f(x) = u delta` for all x and all u in F_q,
/// if it exists. `delta` is read off at x = 0, u = 1 and then checked.
pub fn is_linear_translator(
    ctx: &FieldCtx,
    sub_degree: u32,
    f: &[Elem],
    gamma: Elem,
) -> Result<Option<Elem>> {
    if gamma.is_zero() {
        return Err(Error::Precondition("gamma must be nonzero".into()));
    }
    check_subfield_table(ctx, sub_degree, f)?;
    let at = |x: Elem| f[x.index() as usize];
    let delta = ctx.sub(at(gamma), at(Elem::ZERO));
    let sub = ctx.subfield_elements(sub_degree)?;
    for &u in &sub {
        let shift = ctx.mul(u, gamma);
        let ud = ctx.mul(u, delta);
        if ctx
            .elements()
            .any(|x| ctx.sub(at(ctx.add(x, shift)), at(x)) != ud)
        {
            return Ok(None);
        }
    }
    Ok(Some(delta))
}

/// Outcome of a randomized or exhaustive agreement suite.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub cases: u64,
    /// Human-readable counterexamples.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, other: SuiteReport) {
        self.cases += other.cases;
        self.failures.extend(other.failures);
    }
}

fn field_for(q: u64, n: u32) -> Result<(FieldCtx, u32)> {
    let (p, s) = crate::numtheory::prime_power(q)
        .ok_or_else(|| Error::Precondition(format!("q = {q} is not a prime power")))?;
    Ok((FieldCtx::new(p, s * n)?, s))
}

fn trace_table(ctx: &FieldCtx, sub_degree: u32, k: u64) -> Result<Vec<Elem>> {
    ctx.elements()
        .map(|x| ctx.trace(ctx.pow_u(x, k), sub_degree))
        .collect()
}

/// Line criterion in both modes against direct bijectivity (no early abort)
/// for one trace form.
pub fn surj_three_way(
    ctx: &FieldCtx,
    sub_degree: u32,
    k: u64,
    gamma: Elem,
) -> Result<(bool, bool, bool)> {
    let f = trace_table(ctx, sub_degree, k)?;
    let direct = Total(|x: Elem| ctx.add(x, ctx.mul(gamma, f[x.index() as usize])));
    Ok((
        surj_criterion(ctx, sub_degree, &f, gamma, LineMode::Bijective)?.holds,
        surj_criterion(ctx, sub_degree, &f, gamma, LineMode::UniqueRoot)?.holds,
        permcheck::is_permutation_exhaustive(ctx, &direct, Domain::Field)?,
    ))
}

/// `samples` random `(field, k, gamma)` drawn from `fields`.
pub fn surj_suite(fields: &[(u64, u32)], samples: usize, seed: u64) -> Result<SuiteReport> {
    let ctxs = fields
        .iter()
        .map(|&(q, n)| field_for(q, n).map(|(c, s)| (q, n, c, s)))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::default();
    for _ in 0..samples {
        let (q, n, ctx, s) = &ctxs[rng.gen_range(0..ctxs.len())];
        let k = rng.gen_range(1..ctx.order() as u64);
        let gamma = Elem::from_raw(rng.gen_range(1..ctx.order()));
        let (b, c, d) = surj_three_way(ctx, *s, k, gamma)?;
        rep.cases += 1;
        if !(b == c && c == d) {
            rep.failures.push(format!(
                "q={q} n={n} k={k} gamma={}: lines {b}, unique roots {c}, direct {d}",
                gamma.index()
            ));
        }
    }
    Ok(rep)
}

/// Random `h` of degree at most 6 over F_{q^n}; both sides of the
/// mu-subgroup criterion must agree.
pub fn zlem_suite(q: u64, n: u32, samples: usize, seed: u64) -> Result<SuiteReport> {
    let (ctx, s) = field_for(q, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::default();
    for _ in 0..samples {
        let deg = rng.gen_range(0..=6);
        let h = Poly::new(
            (0..=deg)
                .map(|_| Elem::from_raw(rng.gen_range(0..ctx.order())))
                .collect(),
        );
        let (left, right) = zlem_check(&ctx, s, &h)?;
        rep.cases += 1;
        if left != right {
            let coeffs: Vec<u32> = h.coeffs().iter().map(|c| c.index()).collect();
            rep.failures.push(format!(
                "q={q} n={n} h={coeffs:?}: left {left}, right {right}"
            ));
        }
    }
    Ok(rep)
}

/// A random `f: F_{q^n} -> F_q` with `f(ux) = u f(x)` for u in F_q: one free
/// value per class `x F_q^*`.
pub fn random_homogeneous_table(
    ctx: &FieldCtx,
    sub_degree: u32,
    rng: &mut impl Rng,
) -> Result<Vec<Elem>> {
    let sub = ctx.subfield_elements(sub_degree)?;
    let mut f = vec![None; ctx.order() as usize];
    f[0] = Some(Elem::ZERO);
    for x in ctx.nonzero() {
        if f[x.index() as usize].is_some() {
            continue;
        }
        let v = sub[rng.gen_range(0..sub.len())];
        for &u in &sub[1..] {
            f[ctx.mul(u, x).index() as usize] = Some(ctx.mul(u, v));
        }
    }
    Ok(f.into_iter()
        .map(|v| v.expect("every class assigned"))
        .collect())
}

/// Random homogeneous `f` on F_{q^2} with random independent `gamma`,
/// `omega`: the n = 2 criterion must equal direct bijectivity.
pub fn red_sq1_suite(q: u64, samples: usize, seed: u64) -> Result<SuiteReport> {
    let (ctx, s) = field_for(q, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport::default();
    let pick = |rng: &mut ChaCha8Rng| Elem::from_raw(rng.gen_range(1..ctx.order()));
    for _ in 0..samples {
        let f = random_homogeneous_table(&ctx, s, &mut rng)?;
        let gamma = pick(&mut rng);
        let omega = loop {
            let w = pick(&mut rng);
            if !ctx.in_subfield(ctx.div(w, gamma)?, s)? {
                break w;
            }
        };
        let criterion = red_sq1_check(&ctx, s, &f, gamma, omega, rng.gen())?;
        let direct = form_permutes(&ctx, &f, gamma)?;
        rep.cases += 1;
        if criterion != direct {
            rep.failures.push(format!(
                "q={q} gamma={} omega={}: criterion {criterion}, direct {direct}",
                gamma.index(),
                omega.index()
            ));
        }
    }
    Ok(rep)
}

/// Every `N` in `[1, q+1]` and every nonzero `gamma` in F_{q^2}: `H` permutes
/// mu_{q+1} exactly when `X + gamma Tr(X^{(q-1)N+1})` permutes F_{q^2}.
pub fn red_sq2_suite(q: u64) -> Result<SuiteReport> {
    let (ctx, s) = field_for(q, 2)?;
    let mut rep = SuiteReport::default();
    for n_exp in 1..=q + 1 {
        let f = trace_table(&ctx, s, red_sq2_k(q, n_exp))?;
        for gamma in ctx.nonzero() {
            let h = red_sq2_h(&ctx, n_exp as usize, gamma)?;
            let via_h = permcheck::permutes_mu(&ctx, &h, q + 1)?.is_permutation();
            let direct = form_permutes(&ctx, &f, gamma)?;
            rep.cases += 1;
            if via_h != direct {
                rep.failures.push(format!(
                    "q={q} N={n_exp} gamma={}: H {via_h}, direct {direct}",
                    gamma.index()
                ));
            }
        }
    }
    Ok(rep)
}

/// Three-way agreement on every family instance with q^n <= `max_order`;
/// all three verdicts must also say "permutation".
pub fn surj_family_suite(max_order: u64) -> Result<SuiteReport> {
    let mut rep = SuiteReport::default();
    for case in Case::ALL {
        for set in enumerate_family(case, max_order)? {
            let s = set.ctx.m() / set.n;
            for inst in &set.instances {
                let verdicts = surj_three_way(&set.ctx, s, inst.form.k, inst.form.gamma)?;
                rep.cases += 1;
                if verdicts != (true, true, true) {
                    rep.failures.push(format!(
                        "case {case} q={} n={} gamma={}: {verdicts:?}",
                        set.q,
                        set.n,
                        inst.form.gamma.index()
                    ));
                }
            }
        }
    }
    Ok(rep)
}

/// Translator `delta` of each instance in `set`, `None` where the instance's
/// gamma is not a linear translator of its trace part.
pub fn family_translators(set: &FamilySet) -> Result<Vec<Option<Elem>>> {
    let s = set.ctx.m() / set.n;
    set.instances
        .iter()
        .map(|inst| {
            is_linear_translator(
                &set.ctx,
                s,
                &inst.form.trace_table(&set.ctx),
                inst.form.gamma,
            )
        })
        .collect()
}

/// [`red_sq2_suite`] over several q.
pub fn red_sq2_suites(qs: &[u64]) -> Result<SuiteReport> {
    let mut rep = SuiteReport::default();
    for &q in qs {
        rep.absorb(red_sq2_suite(q)?);
    }
    Ok(rep)
}
