//! Trace forms `F(X) = X + gamma Tr_{q^n/q}(X^k)`, the nine known families of
//! permutation trace forms (cases a to i), and classification of arbitrary
//! parameters against them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ffield::{Elem, FieldCtx};
use crate::numtheory::{exact_sqrt, prime_power, prime_powers_in, reduce_exponent};
use crate::permcheck::{self, Domain, EvalMap};
use crate::ratmaps::RationalMap;
use crate::reductions::red_sq2_h;

/// `q^n`, or `None` on overflow.
pub fn checked_order(q: u64, n: u32) -> Option<u64> {
    q.checked_pow(n)
}

/// Sub-degree `s` with `q = p^s`, after checking that `ctx` is F_{q^n}.
fn field_sub_degree(ctx: &FieldCtx, q: u64, n: u32) -> Result<u32> {
    let (p, s) = prime_power(q)
        .ok_or_else(|| Error::Precondition(format!("q = {q} is not a prime power")))?;
    if p != ctx.p() as u64 || s * n != ctx.m() {
        return Err(Error::Precondition(format!(
            "field {} is not F_{{{q}^{n}}}",
            ctx.spec_string()
        )));
    }
    Ok(s)
}

/// Orbit of `k` under multiplication by `q` modulo `q^n - 1`, with residues
/// taken in `[1, q^n - 1]`, sorted.
pub fn k_orbit(k: u128, q: u64, n: u32) -> Vec<u64> {
    let modulus = q.pow(n) - 1;
    let start = reduce_exponent(k, modulus);
    let mut orbit = vec![start];
    let mut cur = start;
    loop {
        cur = reduce_exponent(cur as u128 * q as u128, modulus);
        if cur == start {
            break;
        }
        orbit.push(cur);
    }
    orbit.sort_unstable();
    orbit
}

/// The form `X + gamma Tr_{q^n/q}(X^k)` with `k` stored in `[1, q^n - 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceForm {
    pub q: u64,
    pub n: u32,
    pub k: u64,
    pub gamma: Elem,
}

impl TraceForm {
    pub fn new(ctx: &FieldCtx, q: u64, n: u32, k: u128, gamma: Elem) -> Result<Self> {
        field_sub_degree(ctx, q, n)?;
        if k == 0 {
            return Err(Error::Precondition("k must be positive".into()));
        }
        if gamma.is_zero() {
            return Err(Error::Precondition("gamma must be nonzero".into()));
        }
        ctx.elem(gamma.index() as u64)?;
        Ok(TraceForm {
            q,
            n,
            k: reduce_exponent(k, ctx.group_order() as u64),
            gamma,
        })
    }

    pub fn sub_degree(&self, ctx: &FieldCtx) -> u32 {
        ctx.m() / self.n
    }

    /// `Tr(x^k)`.
    pub fn trace_part(&self, ctx: &FieldCtx, x: Elem) -> Elem {
        ctx.trace(ctx.pow_u(x, self.k), self.sub_degree(ctx))
            .expect("n divides the field degree")
    }

    pub fn eval(&self, ctx: &FieldCtx, x: Elem) -> Elem {
        ctx.add(x, ctx.mul(self.gamma, self.trace_part(ctx, x)))
    }

    /// `x -> Tr(x^k)` as a table indexed by element index.
    pub fn trace_table(&self, ctx: &FieldCtx) -> Vec<Elem> {
        ctx.elements().map(|x| self.trace_part(ctx, x)).collect()
    }

    pub fn as_map<'a>(&'a self, ctx: &'a FieldCtx) -> impl EvalMap + 'a {
        permcheck::Total(move |x| self.eval(ctx, x))
    }

    pub fn is_permutation(&self, ctx: &FieldCtx) -> Result<bool> {
        permcheck::is_permutation(ctx, &self.as_map(ctx), Domain::Field)
    }
}

/// Per-field tables for fast evaluation of many trace forms: each element's
/// trace is stored as a slot number into the list of subfield elements.
pub struct TraceTables<'a> {
    ctx: &'a FieldCtx,
    sub: Vec<Elem>,
    trace_slot: Vec<u16>,
}

impl<'a> TraceTables<'a> {
    pub fn new(ctx: &'a FieldCtx, sub_degree: u32) -> Result<Self> {
        let sub = ctx.subfield_elements(sub_degree)?;
        let mut pos = vec![u16::MAX; ctx.order() as usize];
        for (i, &e) in sub.iter().enumerate() {
            pos[e.index() as usize] = i as u16;
        }
        let trace_slot = ctx
            .elements()
            .map(|y| ctx.trace(y, sub_degree).map(|t| pos[t.index() as usize]))
            .collect::<Result<Vec<u16>>>()?;
        Ok(TraceTables {
            ctx,
            sub,
            trace_slot,
        })
    }

    pub fn ctx(&self) -> &'a FieldCtx {
        self.ctx
    }

    pub fn subfield(&self) -> &[Elem] {
        &self.sub
    }

    /// Slot of `Tr(x^k)` for every `x`, by index.
    pub fn power_slots(&self, k: u64) -> Vec<u16> {
        self.ctx
            .elements()
            .map(|x| self.trace_slot[self.ctx.pow_u(x, k).index() as usize])
            .collect()
    }

    /// `gamma * c` for every subfield element `c`, by slot.
    pub fn gamma_row(&self, gamma: Elem) -> Vec<Elem> {
        self.sub.iter().map(|&c| self.ctx.mul(gamma, c)).collect()
    }
}

/// A trace form evaluated through [`TraceTables`].
pub struct FastForm<'t> {
    ctx: &'t FieldCtx,
    slots: &'t [u16],
    row: Vec<Elem>,
}

impl<'t> FastForm<'t> {
    pub fn new(tables: &TraceTables<'t>, slots: &'t [u16], gamma: Elem) -> Self {
        FastForm {
            ctx: tables.ctx,
            slots,
            row: tables.gamma_row(gamma),
        }
    }

    #[inline]
    pub fn apply(&self, x: Elem) -> Elem {
        self.ctx
            .add(x, self.row[self.slots[x.index() as usize] as usize])
    }
}

impl EvalMap for FastForm<'_> {
    fn eval(&self, x: Elem) -> Option<Elem> {
        Some(self.apply(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Case {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
}

impl Case {
    pub const ALL: [Case; 9] = [
        Case::A,
        Case::B,
        Case::C,
        Case::D,
        Case::E,
        Case::F,
        Case::G,
        Case::H,
        Case::I,
    ];

    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Case::ALL
            .into_iter()
            .find(|c| s.len() == 1 && s.starts_with(c.letter()))
            .ok_or_else(|| Error::Parse(format!("unknown case {s:?}, expected a..i")))
    }
}

/// Side data of an instance beyond `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Witness {
    None,
    /// `q = Q^2` for cases e and f.
    BigQ(u64),
    /// `n = 2 l r` for case i.
    Ell {
        ell: u32,
        r: u32,
    },
}

/// `(n, k, witness)` for `case` over F_q, or the violated condition.
/// `ell_r` is required for case i and ignored otherwise.
pub fn admissible(case: Case, q: u64, ell_r: Option<(u32, u32)>) -> Result<(u32, u128, Witness)> {
    if prime_power(q).is_none() {
        return Err(Error::Inadmissible(format!("q = {q} is not a prime power")));
    }
    let need = |ok: bool, cond: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!(
                "case {case}: q = {q} violates {cond}"
            )))
        }
    };
    let q128 = q as u128;
    match case {
        Case::A => {
            need(q % 6 == 1 || q % 6 == 5, "q ≡ ±1 (mod 6)")?;
            Ok((2, 2 * q128 - 1, Witness::None))
        }
        Case::B => {
            need(q % 6 == 5, "q ≡ 5 (mod 6)")?;
            Ok((2, 2 * q128 - 1, Witness::None))
        }
        Case::C => {
            need(q % 3 == 1, "q ≡ 1 (mod 3)")?;
            Ok((2, (q128 * q128 + q128 + 1) / 3, Witness::None))
        }
        Case::D => {
            need(q % 4 == 1, "q ≡ 1 (mod 4)")?;
            Ok((2, (q128 + 1) * (q128 + 1) / 4, Witness::None))
        }
        Case::E | Case::F => {
            let big_q = exact_sqrt(q).filter(|r| r % 2 == 1);
            need(big_q.is_some(), "q = Q^2 with Q odd")?;
            let b = big_q.unwrap() as u128;
            let k = if case == Case::E {
                b * b * b - b + 1
            } else {
                b * b * b + b * b - b
            };
            Ok((2, k, Witness::BigQ(b as u64)))
        }
        Case::G => {
            need(q % 2 == 1, "q odd")?;
            Ok((3, (q128 * q128 + 1) / 2, Witness::None))
        }
        Case::H => {
            need(q % 2 == 1, "q odd")?;
            Ok((3, q128 * q128 - q128 + 1, Witness::None))
        }
        Case::I => {
            let (ell, r) =
                ell_r.ok_or_else(|| Error::Inadmissible("case i needs l and r".into()))?;
            if ell == 0 || r == 0 {
                return Err(Error::Inadmissible("case i needs l, r >= 1".into()));
            }
            Ok((2 * ell * r, q128.pow(ell) + 1, Witness::Ell { ell, r }))
        }
    }
}

/// The condition on gamma for `case` in F_{q^n}, after [`admissible`] passed.
pub fn gamma_condition<'c>(
    case: Case,
    ctx: &'c FieldCtx,
    q: u64,
    witness: Witness,
) -> Box<dyn Fn(Elem) -> bool + 'c> {
    let c = |v: i64| ctx.from_int(v);
    let ratio = |a: i64, b: i64| {
        ctx.div(c(a), c(b))
            .expect("denominator is a unit in this characteristic")
    };
    match case {
        Case::A => {
            let t = ratio(-1, 3);
            Box::new(move |g| g == t)
        }
        Case::B => {
            let t = ratio(-1, 27);
            Box::new(move |g| ctx.pow_u(g, 3) == t)
        }
        Case::C | Case::G => Box::new(|g| g == Elem::ONE),
        Case::D => {
            let two = c(2);
            Box::new(move |g| ctx.pow_u(ctx.mul(two, g), (q + 1) / 2) == Elem::ONE)
        }
        Case::E | Case::F => {
            let t = c(-1);
            Box::new(move |g| g == t)
        }
        Case::H => {
            let t = ratio(-1, 2);
            Box::new(move |g| g == t)
        }
        Case::I => {
            let Witness::Ell { ell, .. } = witness else {
                panic!("case i condition needs l");
            };
            let e = (q as u128).pow(2 * ell) - 1;
            let t = c(-1);
            Box::new(move |g| ctx.pow_big(g, e) == t)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub case: Case,
    pub form: TraceForm,
    pub witness: Witness,
}

/// All instances of one case for one `(q, n)`, sharing a field.
pub struct FamilySet {
    pub case: Case,
    pub q: u64,
    pub n: u32,
    pub witness: Witness,
    pub ctx: FieldCtx,
    pub instances: Vec<FamilyInstance>,
}

impl FamilySet {
    pub fn verify(&self, inst: &FamilyInstance) -> Result<bool> {
        verify_family(&self.ctx, inst)
    }

    pub fn verify_all(&self) -> Result<Vec<bool>> {
        self.instances.iter().map(|i| self.verify(i)).collect()
    }
}

/// Every gamma meeting the side condition of `case` over F_q, found by scanning
/// F_{q^n}^*.
pub fn family_instances(case: Case, q: u64, ell_r: Option<(u32, u32)>) -> Result<FamilySet> {
    let (n, k, witness) = admissible(case, q, ell_r)?;
    let (p, s) = prime_power(q).expect("checked by admissible");
    let ctx = FieldCtx::new(p, s * n)?;
    let instances = {
        let cond = gamma_condition(case, &ctx, q, witness);
        ctx.nonzero()
            .filter(|&g| cond(g))
            .map(|g| {
                Ok(FamilyInstance {
                    case,
                    form: TraceForm::new(&ctx, q, n, k, g)?,
                    witness,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(FamilySet {
        case,
        q,
        n,
        witness,
        ctx,
        instances,
    })
}

/// All instance sets of `case` with `q^n <= q_max`. Odd q only, except for
/// case i which also runs over even q. Sets whose gamma condition has no
/// solution are kept with an empty instance list.
pub fn enumerate_family(case: Case, q_max: u64) -> Result<Vec<FamilySet>> {
    let mut out = Vec::new();
    for q in prime_powers_in(2, q_max) {
        if case == Case::I {
            let mut ell = 1;
            while checked_order(q, 2 * ell).is_some_and(|o| o <= q_max) {
                let mut r = 1;
                while checked_order(q, 2 * ell * r).is_some_and(|o| o <= q_max) {
                    out.push(family_instances(case, q, Some((ell, r)))?);
                    r += 1;
                }
                ell += 1;
            }
        } else if q % 2 == 1 {
            if let Ok((n, _, _)) = admissible(case, q, None) {
                if checked_order(q, n).is_some_and(|o| o <= q_max) {
                    out.push(family_instances(case, q, None)?);
                }
            }
        }
    }
    Ok(out)
}

pub fn verify_family(ctx: &FieldCtx, inst: &FamilyInstance) -> Result<bool> {
    inst.form.is_permutation(ctx)
}

/// One entry of the list of exceptional permutation trace forms found by
/// exhaustive search that no family explains.
pub struct Sporadic {
    pub q: u64,
    pub n: u32,
    pub ks: &'static [u64],
    pub label: &'static str,
    /// Human-readable gamma condition.
    pub condition: &'static str,
    test: fn(&FieldCtx, Elem) -> bool,
}

impl Sporadic {
    pub fn holds(&self, ctx: &FieldCtx, gamma: Elem) -> bool {
        (self.test)(ctx, gamma)
    }
}

pub static SPORADICS: [Sporadic; 5] = [
    Sporadic {
        q: 7,
        n: 2,
        ks: &[10],
        label: "q=7,n=2,k=10",
        condition: "g^4 = 1",
        test: |f, g| f.pow_u(g, 4) == Elem::ONE,
    },
    Sporadic {
        q: 9,
        n: 2,
        ks: &[33],
        label: "q=9,n=2,k=33",
        condition: "g^2 - g = 1",
        test: |f, g| f.sub(f.mul(g, g), g) == Elem::ONE,
    },
    Sporadic {
        q: 27,
        n: 2,
        ks: &[261],
        label: "q=27,n=2,k=261",
        condition: "(g - 1)^13 = g^13",
        test: |f, g| f.pow_u(f.sub(g, Elem::ONE), 13) == f.pow_u(g, 13),
    },
    Sporadic {
        q: 9,
        n: 3,
        ks: &[11, 19, 33, 57],
        label: "q=9,n=3,k=11|19|33|57",
        condition: "g^4 = -1",
        test: |f, g| f.pow_u(g, 4) == f.from_int(-1),
    },
    Sporadic {
        q: 49,
        n: 2,
        ks: &[385],
        label: "q=49,n=2,k=385",
        condition: "g^5 = -1",
        test: |f, g| f.pow_u(g, 5) == f.from_int(-1),
    },
];

/// Classification tag. The derived order is the priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Identity,
    Additive,
    Family(Case),
    /// Index into [`SPORADICS`].
    Sporadic(usize),
    Unexplained,
    NotPermutation,
}

impl Tag {
    /// Coarse kind for histograms.
    pub fn kind(&self) -> &'static str {
        match self {
            Tag::Identity => "identity",
            Tag::Additive => "additive",
            Tag::Family(_) => "family",
            Tag::Sporadic(_) => "sporadic",
            Tag::Unexplained => "unexplained",
            Tag::NotPermutation => "not-a-PP",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Family(c) => write!(f, "family({c})"),
            Tag::Sporadic(i) => write!(f, "sporadic({})", SPORADICS[*i].label),
            other => f.write_str(other.kind()),
        }
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        if let Some(c) = inner("family(") {
            return Ok(Tag::Family(c.parse()?));
        }
        if let Some(label) = inner("sporadic(") {
            return SPORADICS
                .iter()
                .position(|sp| sp.label == label)
                .map(Tag::Sporadic)
                .ok_or_else(|| Error::Parse(format!("unknown sporadic label {label:?}")));
        }
        match s {
            "identity" => Ok(Tag::Identity),
            "additive" => Ok(Tag::Additive),
            "unexplained" => Ok(Tag::Unexplained),
            "not-a-PP" => Ok(Tag::NotPermutation),
            _ => Err(Error::Parse(format!("unknown classification {s:?}"))),
        }
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub primary: Tag,
    /// Every matching tag, in priority order.
    pub matches: Vec<Tag>,
}

/// The part of a classification that depends only on `(q, n, k)`.
#[derive(Clone, Debug)]
pub struct KProfile {
    pub q: u64,
    pub n: u32,
    pub orbit: Vec<u64>,
    pub identity: bool,
    pub additive: bool,
    pub families: Vec<(Case, Witness)>,
    pub sporadics: Vec<usize>,
}

impl KProfile {
    pub fn new(ctx: &FieldCtx, q: u64, n: u32, k: u64) -> Result<Self> {
        let s = field_sub_degree(ctx, q, n)?;
        let group = ctx.group_order() as u64;
        let orbit = k_orbit(k as u128, q, n);
        let k = orbit[0];
        let in_orbit = |e: u128| orbit.binary_search(&reduce_exponent(e, group)).is_ok();

        let p = ctx.p() as u64;
        let identity = n as u64 % p == 0
            && (k as u128 * ((q as u128).pow(n / p as u32) - 1)) % group as u128 == 0;
        if identity {
            if let Some(x) = ctx
                .elements()
                .find(|&x| !ctx.trace(ctx.pow_u(x, k), s).unwrap().is_zero())
            {
                return Err(Error::Inconsistent(format!(
                    "identity condition holds for k = {k} but Tr(x^k) != 0 at x = {}",
                    ctx.format(x)
                )));
            }
        }
        let additive = (0..ctx.m()).any(|i| in_orbit((p as u128).pow(i)));

        let mut families = Vec::new();
        for case in Case::ALL {
            if case == Case::I {
                for ell in (1..=n / 2).filter(|ell| n % (2 * ell) == 0) {
                    let r = n / (2 * ell);
                    if let Ok((_, kc, w)) = admissible(case, q, Some((ell, r))) {
                        if in_orbit(kc) {
                            families.push((case, w));
                        }
                    }
                }
            } else if let Ok((nc, kc, w)) = admissible(case, q, None) {
                if nc == n && in_orbit(kc) {
                    families.push((case, w));
                }
            }
        }
        let sporadics = SPORADICS
            .iter()
            .enumerate()
            .filter(|(_, sp)| {
                sp.q == q && sp.n == n && sp.ks.iter().any(|&kk| in_orbit(kk as u128))
            })
            .map(|(i, _)| i)
            .collect();
        Ok(KProfile {
            q,
            n,
            orbit,
            identity,
            additive,
            families,
            sporadics,
        })
    }

    /// Classifies `gamma`, assuming the form is already known to permute.
    pub fn classify(&self, ctx: &FieldCtx, gamma: Elem) -> Classification {
        let mut matches = Vec::new();
        if self.identity {
            matches.push(Tag::Identity);
        }
        if self.additive {
            matches.push(Tag::Additive);
        }
        for &(case, w) in &self.families {
            if gamma_condition(case, ctx, self.q, w)(gamma) && !matches.contains(&Tag::Family(case))
            {
                matches.push(Tag::Family(case));
            }
        }
        for &i in &self.sporadics {
            if SPORADICS[i].holds(ctx, gamma) {
                matches.push(Tag::Sporadic(i));
            }
        }
        Classification {
            primary: matches.first().copied().unwrap_or(Tag::Unexplained),
            matches,
        }
    }
}

/// Tests bijectivity, then classifies.
pub fn classify(ctx: &FieldCtx, form: &TraceForm) -> Result<Classification> {
    if !form.is_permutation(ctx)? {
        return Ok(Classification {
            primary: Tag::NotPermutation,
            matches: Vec::new(),
        });
    }
    Ok(KProfile::new(ctx, form.q, form.n, form.k)?.classify(ctx, form.gamma))
}

/// Case b as a rescaling of case a: with `gamma = -omega/3`, `omega^3 = 1`,
/// checks `F_gamma(omega x) = omega F_a(x)` for every x in F_{q^2}.
pub fn case_b_scaling_check(q: u64) -> Result<bool> {
    let set_a = family_instances(Case::A, q, None)?;
    let set_b = family_instances(Case::B, q, None)?;
    let ctx = &set_b.ctx;
    let fa = set_a.instances[0].form;
    let minus_three = ctx.from_int(-3);
    Ok(set_b.instances.len() == 3
        && set_b.instances.iter().all(|inst| {
            let omega = ctx.mul(minus_three, inst.form.gamma);
            ctx.pow_u(omega, 3) == Elem::ONE
                && ctx.elements().all(|x| {
                    inst.form.eval(ctx, ctx.mul(omega, x)) == ctx.mul(omega, fa.eval(ctx, x))
                })
        }))
}

/// Case c: the rational map attached to `N = (q+2)/3`, `gamma = 1` agrees
/// with `X^N` on mu_{q+1}.
pub fn case_c_power_check(q: u64) -> Result<bool> {
    let (_, _, _) = admissible(Case::C, q, None)?;
    let (p, s) = prime_power(q).expect("checked");
    let ctx = FieldCtx::new(p, 2 * s)?;
    let n_exp = (q + 2) / 3;
    let h: RationalMap<'_> = red_sq2_h(&ctx, n_exp as usize, Elem::ONE)?;
    Ok(ctx
        .unity_roots(q + 1)?
        .into_iter()
        .all(|x| h.eval(x) == Some(ctx.pow_u(x, n_exp))))
}

/// Case d: `g(X) = X (gamma^{-1} + X^N + X^{qN+1})^{q-1}` with `N = (q+3)/4`
/// sends `y^2 -> 2 gamma y` and `-y^2 -> -(2 gamma y)^2` for y in
/// mu_{(q+1)/2}, for every admissible gamma.
pub fn case_d_split_check(q: u64) -> Result<bool> {
    let set = family_instances(Case::D, q, None)?;
    let ctx = &set.ctx;
    let n_exp = (q + 3) / 4;
    let two = ctx.from_int(2);
    let half_mu = ctx.unity_roots((q + 1) / 2)?;
    let mut ok = !set.instances.is_empty();
    for inst in &set.instances {
        let gamma = inst.form.gamma;
        let gi = ctx.inv(gamma)?;
        let g = |x: Elem| {
            let inner = ctx.add(
                ctx.add(gi, ctx.pow_u(x, n_exp)),
                ctx.pow_u(x, q * n_exp + 1),
            );
            ctx.mul(x, ctx.pow_u(inner, q - 1))
        };
        for &y in &half_mu {
            let y2 = ctx.mul(y, y);
            let t = ctx.mul(ctx.mul(two, gamma), y);
            ok &= g(y2) == t && g(ctx.neg(y2)) == ctx.neg(ctx.mul(t, t));
        }
    }
    Ok(ok)
}

/// Case d: the form fixes every nonsquare of F_{q^2} and sends a square x
/// to `x + 2 gamma x^k`.
pub fn case_d_remark_check(q: u64) -> Result<bool> {
    let set = family_instances(Case::D, q, None)?;
    let ctx = &set.ctx;
    let classes = ctx.squares()?;
    let two = ctx.from_int(2);
    let mut ok = !set.instances.is_empty();
    for inst in &set.instances {
        let f = &inst.form;
        let fixed = permcheck::fixed_points(ctx, &f.as_map(ctx), Domain::Field)?;
        ok &= classes
            .nonsquares
            .iter()
            .all(|x| fixed.binary_search(x).is_ok());
        ok &= classes.squares.iter().all(|&x| {
            f.eval(ctx, x) == ctx.add(x, ctx.mul(ctx.mul(two, f.gamma), ctx.pow_u(x, f.k)))
        });
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eval_on_prime_subfield_q5() {
        let f = FieldCtx::new(5, 2).unwrap();
        let form = TraceForm::new(&f, 5, 2, 9, f.from_int(3)).unwrap();
        assert_eq!(form.eval(&f, Elem::ZERO), Elem::ZERO);
        for c in 0..5 {
            let x = f.from_int(c);
            // x^9 = x on F_5, Tr(x) = 2x, so F(x) = x + 6x = 2x
            assert_eq!(form.eval(&f, x), f.from_int(2 * c));
        }
    }

    #[test]
    fn k_is_reduced_and_equivalent() {
        let f = FieldCtx::new(3, 3).unwrap();
        let a = TraceForm::new(&f, 3, 3, 5, Elem::ONE).unwrap();
        let b = TraceForm::new(&f, 3, 3, 5 + 26 * 7, Elem::ONE).unwrap();
        assert_eq!(a.k, b.k);
        let c = TraceForm::new(&f, 3, 3, 26, Elem::ONE).unwrap();
        assert_eq!(c.k, 26);
        for x in f.elements() {
            let direct = f.add(x, f.trace(f.pow_big(x, 5 + 26 * 7), 1).unwrap());
            assert_eq!(a.eval(&f, x), direct);
        }
        assert!(TraceForm::new(&f, 9, 2, 5, Elem::ONE).is_err());
        assert!(TraceForm::new(&f, 3, 3, 0, Elem::ONE).is_err());
    }

    #[test]
    fn fast_tables_agree_with_definition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (q, n) in [(3u64, 4u32), (9, 2), (5, 3), (4, 3)] {
            let (p, s) = prime_power(q).unwrap();
            let f = FieldCtx::new(p, s * n).unwrap();
            let tables = TraceTables::new(&f, s).unwrap();
            for _ in 0..20 {
                let k = rng.gen_range(1..f.order() as u64);
                let g = Elem::from_raw(rng.gen_range(1..f.order()));
                let slots = tables.power_slots(k);
                let fast = FastForm::new(&tables, &slots, g);
                let form = TraceForm::new(&f, q, n, k as u128, g).unwrap();
                assert!(f.elements().all(|x| fast.apply(x) == form.eval(&f, x)));
            }
        }
    }

    #[test]
    fn k_orbit_examples() {
        assert_eq!(k_orbit(10, 7, 2), vec![10, 22]);
        assert_eq!(k_orbit(3, 3, 2), vec![1, 3]);
        assert_eq!(k_orbit(8, 3, 2), vec![8]);
        assert_eq!(k_orbit(11, 9, 3), vec![11, 99, 163]);
    }

    #[test]
    fn enumeration_examples() {
        let a5 = family_instances(Case::A, 5, None).unwrap();
        assert_eq!(a5.instances.len(), 1);
        assert_eq!(a5.instances[0].form.k, 9);
        assert_eq!(a5.instances[0].form.gamma, a5.ctx.from_int(3));

        assert_eq!(
            family_instances(Case::B, 5, None).unwrap().instances.len(),
            3
        );
        assert_eq!(
            family_instances(Case::D, 5, None).unwrap().instances.len(),
            3
        );
        assert!(family_instances(Case::I, 3, Some((1, 1)))
            .unwrap()
            .instances
            .is_empty());
        assert_eq!(
            family_instances(Case::I, 3, Some((1, 2)))
                .unwrap()
                .instances
                .len(),
            8
        );

        let err = family_instances(Case::C, 5, None)
            .err()
            .unwrap()
            .to_string();
        assert!(err.contains("q ≡ 1 (mod 3)"), "{err}");
        assert!(matches!(
            admissible(Case::E, 25, None),
            Ok((2, 121, Witness::BigQ(5)))
        ));
        assert!(admissible(Case::E, 27, None).is_err());
        assert!(admissible(Case::I, 3, None).is_err());
    }

    #[test]
    fn small_instances_permute() {
        for (case, q) in [
            (Case::G, 3u64),
            (Case::H, 3),
            (Case::D, 5),
            (Case::A, 7),
            (Case::C, 7),
        ] {
            let set = family_instances(case, q, None).unwrap();
            assert!(!set.instances.is_empty());
            assert!(
                set.verify_all().unwrap().into_iter().all(|b| b),
                "case {case} q={q}"
            );
        }
        let g3 = family_instances(Case::G, 3, None).unwrap();
        assert_eq!(g3.instances[0].form.k, 5);
        let h3 = family_instances(Case::H, 3, None).unwrap();
        assert_eq!(
            (h3.instances[0].form.k, h3.instances[0].form.gamma),
            (7, Elem::ONE)
        );
    }

    #[test]
    fn enumerate_respects_bound() {
        let sets = enumerate_family(Case::I, 100).unwrap();
        let fields: Vec<(u64, u32, Witness)> = sets.iter().map(|s| (s.q, s.n, s.witness)).collect();
        let w = |ell, r| Witness::Ell { ell, r };
        assert_eq!(
            fields,
            vec![
                (2, 2, w(1, 1)),
                (2, 4, w(1, 2)),
                (2, 6, w(1, 3)),
                (2, 4, w(2, 1)),
                (2, 6, w(3, 1)),
                (3, 2, w(1, 1)),
                (3, 4, w(1, 2)),
                (3, 4, w(2, 1)),
                (4, 2, w(1, 1)),
                (5, 2, w(1, 1)),
                (7, 2, w(1, 1)),
                (8, 2, w(1, 1)),
                (9, 2, w(1, 1)),
            ]
        );
        let a = enumerate_family(Case::A, 200).unwrap();
        assert_eq!(
            a.iter().map(|s| s.q).collect::<Vec<_>>(),
            vec![5, 7, 11, 13]
        );
    }

    #[test]
    fn classify_examples() {
        let f49 = FieldCtx::new(7, 2).unwrap();
        let g = f49
            .nonzero()
            .find(|&g| f49.pow_u(g, 4) == Elem::ONE && g != Elem::ONE)
            .unwrap();
        let form = TraceForm::new(&f49, 7, 2, 10, g).unwrap();
        let c = classify(&f49, &form).unwrap();
        assert_eq!(c.primary, Tag::Sporadic(0));

        let f25 = FieldCtx::new(5, 2).unwrap();
        let form = TraceForm::new(&f25, 5, 2, 9, f25.from_int(3)).unwrap();
        assert_eq!(classify(&f25, &form).unwrap().primary, Tag::Family(Case::A));

        let f9 = FieldCtx::new(3, 2).unwrap();
        let pp = f9
            .nonzero()
            .map(|g| TraceForm::new(&f9, 3, 2, 3, g).unwrap())
            .find(|t| t.is_permutation(&f9).unwrap())
            .unwrap();
        assert_eq!(classify(&f9, &pp).unwrap().primary, Tag::Additive);

        let not_pp = TraceForm::new(&f9, 3, 2, 2, Elem::ONE).unwrap();
        let by_hand = {
            let mut v: Vec<Elem> = f9.elements().map(|x| not_pp.eval(&f9, x)).collect();
            v.sort_unstable();
            v.dedup();
            v.len() == 9
        };
        assert_eq!(
            classify(&f9, &not_pp).unwrap().primary == Tag::NotPermutation,
            !by_hand
        );
    }

    #[test]
    fn identity_case_is_detected() {
        // p = 3 divides n = 3; (27 - 1) | k (3 - 1) for k = 13
        let f = FieldCtx::new(3, 3).unwrap();
        let prof = KProfile::new(&f, 3, 3, 13).unwrap();
        assert!(prof.identity);
        let form = TraceForm::new(&f, 3, 3, 13, Elem::ONE).unwrap();
        assert!(f.elements().all(|x| form.eval(&f, x) == x));
    }

    #[test]
    fn instances_classify_as_their_own_family() {
        for case in Case::ALL {
            for set in enumerate_family(case, 729).unwrap() {
                for inst in &set.instances {
                    let c = classify(&set.ctx, &inst.form).unwrap();
                    assert!(
                        c.matches.contains(&Tag::Family(case)),
                        "{case} q={} {:?}",
                        set.q,
                        c
                    );
                }
            }
        }
    }

    #[test]
    fn tag_strings_round_trip() {
        let mut tags = vec![
            Tag::Identity,
            Tag::Additive,
            Tag::Unexplained,
            Tag::NotPermutation,
        ];
        tags.extend(Case::ALL.map(Tag::Family));
        tags.extend((0..SPORADICS.len()).map(Tag::Sporadic));
        for t in tags {
            assert_eq!(t.to_string().parse::<Tag>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(serde_json::from_str::<Tag>(&json).unwrap(), t);
        }
        assert!("family(z)".parse::<Tag>().is_err());
    }

    #[test]
    fn structure_checks() {
        assert!(case_b_scaling_check(5).unwrap());
        assert!(case_c_power_check(7).unwrap());
        assert!(case_d_split_check(5).unwrap());
        assert!(case_d_remark_check(5).unwrap());
        assert!(case_c_power_check(5).is_err());
    }
}
