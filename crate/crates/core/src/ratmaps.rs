//! Rational maps that permute a field or a group of roots of unity, and the
//! polynomial identities behind several of the trace-form families.
//!
//! Every check here is by evaluation over the whole domain. The only
//! randomized check is [`gdiff_factor_check`] on large fields: both sides are
//! polynomials in two variables of total degree at most 6, so by
//! Schwartz-Zippel a nonzero difference vanishes at a random pair with
//! probability at most 6/q, and 10^4 independent pairs leave a false
//! acceptance chance below (6/q)^10000.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ffield::{Elem, FieldCtx};
use crate::numtheory::prime_power;
use crate::permcheck::{self, Domain, EvalMap, Total};
use crate::poly::Poly;

/// `num / den` over a field, evaluated by Horner with one inversion.
#[derive(Clone, Debug)]
pub struct RationalMap<'a> {
    ctx: &'a FieldCtx,
    num: Poly,
    den: Poly,
}

impl<'a> RationalMap<'a> {
    pub fn new(ctx: &'a FieldCtx, num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Precondition(
                "denominator is identically zero".into(),
            ));
        }
        Ok(RationalMap { ctx, num, den })
    }

    pub fn ctx(&self) -> &'a FieldCtx {
        self.ctx
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    /// `None` where the denominator vanishes.
    pub fn eval(&self, x: Elem) -> Option<Elem> {
        let d = self.den.eval(self.ctx, x);
        if d.is_zero() {
            return None;
        }
        let n = self.num.eval(self.ctx, x);
        Some(self.ctx.mul(n, self.ctx.inv(d).ok()?))
    }

    /// Points of mu_d where the denominator vanishes.
    pub fn denominator_roots_in_mu(&self, d: u64) -> Result<Vec<Elem>> {
        Ok(self
            .ctx
            .unity_roots(d)?
            .into_iter()
            .filter(|&x| self.den.eval(self.ctx, x).is_zero())
            .collect())
    }
}

impl EvalMap for RationalMap<'_> {
    fn eval(&self, x: Elem) -> Option<Elem> {
        RationalMap::eval(self, x)
    }
}

fn require_coprime_to_six(ctx: &FieldCtx) -> Result<()> {
    if ctx.p() == 2 || ctx.p() == 3 {
        return Err(Error::Precondition(format!(
            "need gcd(q, 6) = 1, characteristic is {}",
            ctx.p()
        )));
    }
    Ok(())
}

fn require_nonsquare(ctx: &FieldCtx, nu: Elem) -> Result<()> {
    if nu.is_zero() || ctx.is_square(nu) {
        return Err(Error::Precondition(format!(
            "{} is not a nonsquare",
            ctx.format(nu)
        )));
    }
    Ok(())
}

/// `X (X^2 - 9 nu) / (X^2 - nu)` over F_q, which permutes F_q for every
/// nonsquare `nu` when gcd(q, 6) = 1.
pub fn theorem1_b_map(ctx: &FieldCtx, nu: Elem) -> Result<RationalMap<'_>> {
    require_coprime_to_six(ctx)?;
    require_nonsquare(ctx, nu)?;
    let nine_nu = ctx.mul(ctx.from_int(9), nu);
    let num = Poly::from_terms(ctx, &[(3, Elem::ONE), (1, ctx.neg(nine_nu))]);
    let den = Poly::from_terms(ctx, &[(2, Elem::ONE), (0, ctx.neg(nu))]);
    RationalMap::new(ctx, num, den)
}

/// The `q` with `ctx = F_{q^2}`.
pub fn half_degree_order(ctx: &FieldCtx) -> Result<u64> {
    if ctx.m() % 2 != 0 {
        return Err(Error::Precondition(format!(
            "F_{}^{} is not a quadratic extension",
            ctx.p(),
            ctx.m()
        )));
    }
    Ok((ctx.p() as u64).pow(ctx.m() / 2))
}

/// `g(X) = (X^3 - 3X^2 + 1) / (X^3 - 3X + 1)` over F_{q^2}; permutes mu_{q+1}.
pub fn theorem1_c_map(ctx: &FieldCtx) -> Result<RationalMap<'_>> {
    require_coprime_to_six(ctx)?;
    half_degree_order(ctx)?;
    let num = Poly::from_int_terms(ctx, &[(3, 1), (2, -3), (0, 1)]);
    let den = Poly::from_int_terms(ctx, &[(3, 1), (1, -3), (0, 1)]);
    RationalMap::new(ctx, num, den)
}

/// Checks that the numerator of `g(X) - g(Y)` equals
/// `3 (X - Y)(XY - X + 1)(XY - Y + 1)` on F_q x F_q: exhaustively when
/// q^2 <= 2^16, otherwise on 10^4 random pairs.
pub fn gdiff_factor_check(ctx: &FieldCtx, seed: u64) -> Result<bool> {
    require_coprime_to_six(ctx)?;
    let upper = Poly::from_int_terms(ctx, &[(3, 1), (2, -3), (0, 1)]);
    let lower = Poly::from_int_terms(ctx, &[(3, 1), (1, -3), (0, 1)]);
    let three = ctx.from_int(3);
    let holds = |x: Elem, y: Elem| {
        let lhs = ctx.sub(
            ctx.mul(upper.eval(ctx, x), lower.eval(ctx, y)),
            ctx.mul(upper.eval(ctx, y), lower.eval(ctx, x)),
        );
        let xy = ctx.mul(x, y);
        let rhs = [
            three,
            ctx.sub(x, y),
            ctx.add(ctx.sub(xy, x), Elem::ONE),
            ctx.add(ctx.sub(xy, y), Elem::ONE),
        ]
        .into_iter()
        .fold(Elem::ONE, |acc, f| ctx.mul(acc, f));
        lhs == rhs
    };
    let q = ctx.order() as u64;
    if q * q <= 1 << 16 {
        Ok(ctx.elements().all(|x| ctx.elements().all(|y| holds(x, y))))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..10_000).all(|_| {
            let x = Elem::from_raw(rng.gen_range(0..ctx.order()));
            let y = Elem::from_raw(rng.gen_range(0..ctx.order()));
            holds(x, y)
        }))
    }
}

/// Which of the two Q^4 families a [`CompanionMaps`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Companion {
    /// k = Q^3 - Q + 1
    Case5,
    /// k = Q^3 + Q^2 - Q
    Case6,
}

/// The rational maps attached to `X - Tr_{Q^4/Q^2}(X^k)`: a family over
/// F_{Q^2} indexed by nonsquares, and one map on mu_{Q^2+1} in F_{Q^4}.
pub struct CompanionMaps {
    variant: Companion,
    big_q: u64,
    small: FieldCtx,
    large: FieldCtx,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompanionReport {
    pub nonsquares_tested: usize,
    pub b_maps_permute: bool,
    pub c_map_permutes: bool,
    pub c_denominator_clear: bool,
}

impl CompanionReport {
    pub fn all_pass(&self) -> bool {
        self.b_maps_permute && self.c_map_permutes && self.c_denominator_clear
    }
}

impl CompanionMaps {
    pub fn new(variant: Companion, big_q: u64) -> Result<Self> {
        let (p, s) = prime_power(big_q)
            .ok_or_else(|| Error::Precondition(format!("{big_q} is not a prime power")))?;
        if p == 2 {
            return Err(Error::Precondition(format!("Q = {big_q} must be odd")));
        }
        Ok(CompanionMaps {
            variant,
            big_q,
            small: FieldCtx::new(p, 2 * s)?,
            large: FieldCtx::new(p, 4 * s)?,
        })
    }

    /// F_{Q^2}
    pub fn small_field(&self) -> &FieldCtx {
        &self.small
    }

    /// F_{Q^4}
    pub fn large_field(&self) -> &FieldCtx {
        &self.large
    }

    /// `(X^{Q+2} + 3 nu X^Q +- 4 nu^{(Q+1)/2} X) / (X^2 - nu)` over F_{Q^2},
    /// with `+` for case 5 and `-` for case 6.
    pub fn b_map(&self, nu: Elem) -> Result<RationalMap<'_>> {
        let f = &self.small;
        require_nonsquare(f, nu)?;
        let q = self.big_q as usize;
        let mut lin = f.mul(f.from_int(4), f.pow_u(nu, (self.big_q + 1) / 2));
        if self.variant == Companion::Case6 {
            lin = f.neg(lin);
        }
        let num = Poly::from_terms(
            f,
            &[(q + 2, Elem::ONE), (q, f.mul(f.from_int(3), nu)), (1, lin)],
        );
        let den = Poly::from_terms(f, &[(2, Elem::ONE), (0, f.neg(nu))]);
        RationalMap::new(f, num, den)
    }

    /// Case 5: `(X^{2Q-1} - X^Q + 1) / (X^{2Q-1} - X^{Q-1} + 1)`;
    /// case 6: `(X^{2Q+1} - X^{Q+1} + 1) / (X^{2Q+1} - X^Q + 1)`, over F_{Q^4}.
    pub fn c_map(&self) -> RationalMap<'_> {
        let f = &self.large;
        let q = self.big_q as usize;
        let (num, den) = match self.variant {
            Companion::Case5 => (
                [(2 * q - 1, 1), (q, -1), (0, 1)],
                [(2 * q - 1, 1), (q - 1, -1), (0, 1)],
            ),
            Companion::Case6 => (
                [(2 * q + 1, 1), (q + 1, -1), (0, 1)],
                [(2 * q + 1, 1), (q, -1), (0, 1)],
            ),
        };
        RationalMap::new(
            f,
            Poly::from_int_terms(f, &num),
            Poly::from_int_terms(f, &den),
        )
        .expect("denominator has a nonzero constant term")
    }

    pub fn verify(&self) -> Result<CompanionReport> {
        let nonsquares = self.small.squares()?.nonsquares;
        let mut b_ok = true;
        for &nu in &nonsquares {
            b_ok &= permcheck::is_permutation(&self.small, &self.b_map(nu)?, Domain::Field)?;
        }
        let d = self.big_q * self.big_q + 1;
        let c = self.c_map();
        Ok(CompanionReport {
            nonsquares_tested: nonsquares.len(),
            b_maps_permute: b_ok,
            c_map_permutes: permcheck::permutes_mu(&self.large, &c, d)?.is_permutation(),
            c_denominator_clear: c.denominator_roots_in_mu(d)?.is_empty(),
        })
    }
}

pub fn case5_maps(big_q: u64) -> Result<CompanionMaps> {
    CompanionMaps::new(Companion::Case5, big_q)
}

pub fn case6_maps(big_q: u64) -> Result<CompanionMaps> {
    CompanionMaps::new(Companion::Case6, big_q)
}

/// Facts about `F5(X) = X - Tr_{Q^4/Q^2}(X^{Q^3-Q+1})` on F_{Q^4}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case5LemmaReport {
    /// All roots of F5.
    pub roots: Vec<Elem>,
    /// Nonzero x with x^{2Q^2} - x^{Q^2+1} + x^2 = 0.
    pub s_set: Vec<Elem>,
    /// S equals the set of (Q^2-1)-th roots of -1.
    pub s_is_roots_of_minus_one: bool,
    /// F5 fixes every element of S.
    pub s_fixed: bool,
}

pub fn case5_lemma_checks(big_q: u64) -> Result<Case5LemmaReport> {
    let maps = case5_maps(big_q)?;
    let f = maps.large_field();
    let q2 = big_q * big_q;
    let s = f.m() / 2;
    let k = big_q.pow(3) - big_q + 1;
    let f5 = Total(|x: Elem| f.sub(x, f.trace(f.pow_u(x, k), s).expect("m/2 divides m")));
    let roots = permcheck::roots(f, &f5, Domain::Field)?;
    let s_set: Vec<Elem> = f
        .nonzero()
        .filter(|&x| {
            let v = f.add(f.sub(f.pow_u(x, 2 * q2), f.pow_u(x, q2 + 1)), f.mul(x, x));
            v.is_zero()
        })
        .collect();
    let minus_one = f.from_int(-1);
    let roots_of_minus_one: Vec<Elem> = f
        .nonzero()
        .filter(|&x| f.pow_u(x, q2 - 1) == minus_one)
        .collect();
    let fixed = permcheck::fixed_points(f, &f5, Domain::Field)?;
    Ok(Case5LemmaReport {
        s_fixed: s_set.iter().all(|x| fixed.contains(x)),
        s_is_roots_of_minus_one: s_set == roots_of_minus_one,
        roots,
        s_set,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case8Report {
    /// G(x^2) = L(x)^2 for every x in F_{q^3}.
    pub identity_holds: bool,
    /// L = 2X^q - Tr has kernel {0}.
    pub l_permutes: bool,
}

impl Case8Report {
    pub fn all_pass(&self) -> bool {
        self.identity_holds && self.l_permutes
    }
}

/// Builds `L(X) = 2X^q - Tr(X)`, `H(X) = 2X^{(q^4+q^2)/2} - Tr(X)` and
/// `G = L o H` as value tables on F_{q^3} and checks `G(x^2) = L(x)^2`.
pub fn case8_identity_check(q: u64) -> Result<Case8Report> {
    let (p, s) = odd_prime_power(q)?;
    let f = FieldCtx::new(p, 3 * s)?;
    let two = f.from_int(2);
    let tr = |x: Elem| f.trace(x, s).expect("s divides 3s");
    let l_table: Vec<Elem> = f
        .elements()
        .map(|x| f.sub(f.mul(two, f.pow_u(x, q)), tr(x)))
        .collect();
    let h_exp = (q as u128).pow(4) / 2 + (q as u128).pow(2) / 2 + 1;
    let h = |x: Elem| f.sub(f.mul(two, f.pow_big(x, h_exp)), tr(x));
    let g = |x: Elem| l_table[h(x).index() as usize];
    let identity_holds = f.elements().all(|x| {
        let lx = l_table[x.index() as usize];
        g(f.mul(x, x)) == f.mul(lx, lx)
    });
    let kernel = f
        .elements()
        .filter(|&x| l_table[x.index() as usize].is_zero())
        .count();
    Ok(Case8Report {
        identity_holds,
        l_permutes: kernel == 1,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Case7Report {
    /// g(x^{2q})^{-q} = x (x + 1)^{q-1} on mu_{q^2+q+1}.
    pub identity_holds: bool,
    /// X (X + 1)^{q-1} permutes mu_{q^2+q+1}.
    pub companion_permutes_mu: bool,
    /// X^q + X permutes F_{q^3}.
    pub additive_permutes: bool,
}

impl Case7Report {
    pub fn all_pass(&self) -> bool {
        self.identity_holds && self.companion_permutes_mu && self.additive_permutes
    }
}

/// `g(X) = X (1 + X^{(q+1)/2} + X^{(q^2+q+2)/2} + X^{(q^2+2)(q+1)/2})^{q-1}`
/// checked against `x (x+1)^{q-1}` after the substitution `x -> x^{2q}`.
pub fn case7_mu_identity_check(q: u64) -> Result<Case7Report> {
    let (p, s) = odd_prime_power(q)?;
    let f = FieldCtx::new(p, 3 * s)?;
    let d = q * q + q + 1;
    let exps = [(q + 1) / 2, (q * q + q + 2) / 2, (q * q + 2) * (q + 1) / 2];
    let g = |x: Elem| {
        let inner = exps
            .iter()
            .fold(Elem::ONE, |acc, &e| f.add(acc, f.pow_u(x, e)));
        f.mul(x, f.pow_u(inner, q - 1))
    };
    let target = |x: Elem| f.mul(x, f.pow_u(f.add(x, Elem::ONE), q - 1));
    let mu = f.unity_roots(d)?;
    let identity_holds = mu.iter().all(|&x| {
        let gx = g(f.pow_u(x, 2 * q));
        !gx.is_zero() && f.pow(gx, -(q as i64)).ok() == Some(target(x))
    });
    let companion = permcheck::permutes_mu(&f, &Total(target), d)?.is_permutation();
    let additive =
        permcheck::is_permutation(&f, &Total(|x| f.add(f.pow_u(x, q), x)), Domain::Field)?;
    Ok(Case7Report {
        identity_holds,
        companion_permutes_mu: companion,
        additive_permutes: additive,
    })
}

/// For `gamma^{q^{2l}-1} = -1` in F_{q^n} with `2l | n` and `Q = q^l`: checks
/// `Tr(gamma^{Q+1}) = 0`, `Tr(alpha gamma^Q + alpha^Q gamma) = 0` for every
/// alpha, and that `x -> x + Tr((alpha + gamma x)^{Q+1})` agrees with
/// `x -> x + Tr(alpha^{Q+1})` on F_q.
pub fn case9_trace_identities(
    ctx: &FieldCtx,
    sub_degree: u32,
    ell: u32,
    gamma: Elem,
) -> Result<bool> {
    let q = ctx.subfield_order(sub_degree)?;
    let n = ctx.m() / sub_degree;
    if ell == 0 || n % (2 * ell) != 0 {
        return Err(Error::NotADivisor {
            what: "2l must divide n",
            divisor: 2 * ell as u64,
            value: n as u64,
        });
    }
    let cap_q = q.pow(ell);
    if ctx.pow_big(gamma, (cap_q as u128).pow(2) - 1) != ctx.from_int(-1) {
        return Err(Error::Precondition(format!(
            "gamma = {} does not satisfy gamma^(q^(2l)-1) = -1",
            ctx.format(gamma)
        )));
    }
    let tr = |x: Elem| ctx.trace(x, sub_degree).expect("checked divisor");
    if !tr(ctx.pow_u(gamma, cap_q + 1)).is_zero() {
        return Ok(false);
    }
    let gamma_q = ctx.pow_u(gamma, cap_q);
    let sub = ctx.subfield_elements(sub_degree)?;
    for alpha in ctx.elements() {
        let alpha_q = ctx.pow_u(alpha, cap_q);
        if !tr(ctx.add(ctx.mul(alpha, gamma_q), ctx.mul(alpha_q, gamma))).is_zero() {
            return Ok(false);
        }
        let shift = tr(ctx.pow_u(alpha, cap_q + 1));
        for &x in &sub {
            let lhs = ctx.add(
                x,
                tr(ctx.pow_u(ctx.add(alpha, ctx.mul(gamma, x)), cap_q + 1)),
            );
            if lhs != ctx.add(x, shift) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn odd_prime_power(q: u64) -> Result<(u64, u32)> {
    match prime_power(q) {
        Some((p, s)) if p != 2 => Ok((p, s)),
        _ => Err(Error::Precondition(format!(
            "q = {q} must be an odd prime power"
        ))),
    }
}
