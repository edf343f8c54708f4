//! Finite fields F_{p^m} with p^m <= 2^20, backed by discrete-log tables.
//!
//! Elements are stored by their integer index `sum c_i p^i`, where `c_i` are
//! the coefficients of the element as a polynomial in the modulus root `t`.
//! Multiplication, powers and Frobenius are one table lookup after an
//! exponent update; addition goes through a Zech-logarithm table.

mod embed;
mod fp_poly;

pub use embed::{embed, Embedding};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{is_prime, pow_mod, prime_factors};

pub const MAX_ORDER: u64 = 1 << 20;

const NO_LOG: u32 = u32::MAX;

/// A field element, identified by its integer index `sum c_i p^i`.
#[derive(
    Copy, Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Elem(u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub(crate) fn from_raw(idx: u32) -> Elem {
        Elem(idx)
    }
}

/// Squares and nonsquares of F_{p^m}^*, each sorted by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareClasses {
    pub squares: Vec<Elem>,
    pub nonsquares: Vec<Elem>,
}

/// Immutable description of F_{p^m}: modulus, generator and log/antilog tables.
pub struct FieldCtx {
    p: u32,
    m: u32,
    order: u32,
    modulus: Vec<u32>,
    gen: Elem,
    // exp[j] = gen^j for j in [0, order - 1)
    exp: Vec<u32>,
    // log[x] for x != 0; log[0] = NO_LOG
    log: Vec<u32>,
    // zech[j] = log(1 + gen^j), NO_LOG when 1 + gen^j = 0
    zech: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .field("gen", &self.gen)
            .finish()
    }
}

impl FieldCtx {
    /// Builds F_{p^m} with the default modulus: the lexicographically smallest
    /// monic irreducible of degree `m`, coefficients compared from the constant
    /// term upward.
    pub fn new(p: u64, m: u32) -> Result<Self> {
        Self::build(p, m, None)
    }

    /// Builds F_{p^m} over a caller-supplied monic modulus (ascending coefficients).
    pub fn with_modulus(p: u64, m: u32, modulus: &[u64]) -> Result<Self> {
        Self::build(p, m, Some(modulus))
    }

    /// Parses `"p^m"` or `"p^m:c0,c1,...,cm"`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (head, tail) = match spec.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (spec, None),
        };
        let (p, m) = match head.trim().split_once('^') {
            Some((p, m)) => (p, m),
            None => (head.trim(), "1"),
        };
        let p: u64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad characteristic in field spec {spec:?}")))?;
        let m: u32 = m
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad degree in field spec {spec:?}")))?;
        match tail {
            None => Self::new(p, m),
            Some(t) => {
                let coeffs = t
                    .split(',')
                    .map(|c| c.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Parse(format!("bad modulus in field spec {spec:?}")))?;
                Self::with_modulus(p, m, &coeffs)
            }
        }
    }

    fn build(p: u64, m: u32, modulus: Option<&[u64]>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::Precondition(
                "extension degree must be positive".into(),
            ));
        }
        let order = (p as u128)
            .checked_pow(m)
            .filter(|&o| o <= MAX_ORDER as u128);
        let order = order.ok_or(Error::OrderTooLarge { p, m })? as u64;

        let modulus: Vec<u64> = match modulus {
            Some(f) => {
                if f.len() != m as usize + 1 || f[m as usize] != 1 || f.iter().any(|&c| c >= p) {
                    return Err(Error::BadModulus {
                        expected: m,
                        got: f.iter().map(|&c| c as u32).collect(),
                    });
                }
                if !fp_poly::is_irreducible(f, p) {
                    return Err(Error::ReducibleModulus(poly_string(f)));
                }
                f.to_vec()
            }
            None => fp_poly::smallest_irreducible(p, m),
        };

        let n = order - 1;
        let to_coeffs = |mut idx: u64| -> Vec<u64> {
            let mut c = Vec::with_capacity(m as usize);
            while idx > 0 {
                c.push(idx % p);
                idx /= p;
            }
            c
        };
        let from_coeffs =
            |c: &[u64]| -> u32 { c.iter().rev().fold(0u64, |acc, &d| acc * p + d) as u32 };

        // Smallest-index primitive element.
        let factors = prime_factors(n);
        let gen_idx = (1..order)
            .find(|&cand| {
                let g = to_coeffs(cand);
                factors
                    .iter()
                    .all(|&r| fp_poly::pow_mod(&g, n / r, &modulus, p) != vec![1])
            })
            .expect("multiplicative group is cyclic");
        let g = to_coeffs(gen_idx);

        let mut exp = Vec::with_capacity(n as usize);
        let mut log = vec![NO_LOG; order as usize];
        let mut cur = vec![1u64];
        for j in 0..n {
            let idx = from_coeffs(&cur);
            if log[idx as usize] != NO_LOG {
                return Err(Error::Inconsistent(format!(
                    "generator {gen_idx} repeats at exponent {j}"
                )));
            }
            exp.push(idx);
            log[idx as usize] = j as u32;
            cur = fp_poly::mul_mod(&cur, &g, &modulus, p);
        }

        // 1 + x only touches the constant coefficient.
        let p32 = p as u32;
        let zech = exp
            .iter()
            .map(|&x| {
                let one_plus = if x % p32 == p32 - 1 {
                    x - (p32 - 1)
                } else {
                    x + 1
                };
                log[one_plus as usize]
            })
            .collect();

        Ok(FieldCtx {
            p: p32,
            m,
            order: order as u32,
            modulus: modulus.iter().map(|&c| c as u32).collect(),
            gen: Elem(gen_idx as u32),
            exp,
            log,
            zech,
        })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of elements p^m.
    #[inline]
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Order of the multiplicative group, p^m - 1.
    #[inline]
    pub fn group_order(&self) -> u32 {
        self.order - 1
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Elem {
        self.gen
    }

    /// `"p^m:c0,c1,...,cm"`, accepted back by [`FieldCtx::from_spec`].
    pub fn spec_string(&self) -> String {
        let coeffs: Vec<String> = self.modulus.iter().map(|c| c.to_string()).collect();
        format!("{}^{}:{}", self.p, self.m, coeffs.join(","))
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    pub fn elem(&self, idx: u64) -> Result<Elem> {
        if idx < self.order as u64 {
            Ok(Elem(idx as u32))
        } else {
            Err(Error::BadElement(idx, self.order))
        }
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem> {
        if coeffs.len() > self.m as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!(
                "coefficient vector {coeffs:?} is not an element of F_{}^{}",
                self.p, self.m
            )));
        }
        let idx = coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64);
        Ok(Elem(idx as u32))
    }

    /// Coefficient vector of length `m` over the prime field.
    pub fn coeffs(&self, x: Elem) -> Vec<u32> {
        let mut idx = x.0;
        (0..self.m)
            .map(|_| {
                let c = idx % self.p;
                idx /= self.p;
                c
            })
            .collect()
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, c: i64) -> Elem {
        Elem(c.rem_euclid(self.p as i64) as u32)
    }

    /// Every element in index order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.order).map(Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + '_ {
        (1..self.order).map(Elem)
    }

    #[inline]
    pub fn log(&self, x: Elem) -> Option<u32> {
        let l = self.log[x.0 as usize];
        (l != NO_LOG).then_some(l)
    }

    /// gen^j for any j.
    #[inline]
    pub fn exp(&self, j: u64) -> Elem {
        Elem(self.exp[(j % self.group_order() as u64) as usize])
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let n = self.order - 1;
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let d = if lb >= la { lb - la } else { lb + n - la };
        let z = self.zech[d as usize];
        if z == NO_LOG {
            return Elem::ZERO;
        }
        let s = la + z;
        Elem(self.exp[(if s >= n { s - n } else { s }) as usize])
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if a.0 == 0 || self.p == 2 {
            return a;
        }
        let n = self.order - 1;
        let s = self.log[a.0 as usize] + n / 2;
        Elem(self.exp[(if s >= n { s - n } else { s }) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        let n = self.order - 1;
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        Elem(self.exp[(if s >= n { s - n } else { s }) as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let n = self.order - 1;
        let l = self.log[a.0 as usize];
        Ok(Elem(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `x^e` for any integer `e`; zero may only be raised to positive powers.
    pub fn pow(&self, x: Elem, e: i64) -> Result<Elem> {
        if x.0 == 0 {
            return if e > 0 {
                Ok(Elem::ZERO)
            } else {
                Err(Error::ZeroPower(e))
            };
        }
        let n = self.group_order() as i128;
        let l = self.log[x.0 as usize] as i128;
        let j = (l * (e as i128)).rem_euclid(n);
        Ok(Elem(self.exp[j as usize]))
    }

    /// `x^e` for `e >= 0` with the polynomial convention `x^0 = 1` (also for `x = 0`).
    #[inline]
    pub fn pow_u(&self, x: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if x.0 == 0 {
            return Elem::ZERO;
        }
        let n = self.group_order() as u64;
        let e = e % n;
        let j = (self.log[x.0 as usize] as u64 * e) % n;
        Elem(self.exp[j as usize])
    }

    /// `x^e` for exponents that may exceed `u64`, same convention as [`FieldCtx::pow_u`].
    pub fn pow_big(&self, x: Elem, e: u128) -> Elem {
        self.pow_u(
            x,
            crate::numtheory::reduce_exponent(e, self.group_order() as u64),
        )
    }

    /// `x^{p^j}`.
    pub fn frobenius(&self, x: Elem, j: u32) -> Elem {
        match self.log(x) {
            None => x,
            Some(l) => {
                let n = self.group_order() as u64;
                self.exp(l as u64 * pow_mod(self.p as u64, j as u64, n) % n)
            }
        }
    }

    /// Order of the subfield of degree `sub_degree`, checking divisibility.
    pub fn subfield_order(&self, sub_degree: u32) -> Result<u64> {
        if sub_degree == 0 || self.m % sub_degree != 0 {
            return Err(Error::NotADivisor {
                what: "subfield degree",
                divisor: sub_degree as u64,
                value: self.m as u64,
            });
        }
        Ok((self.p as u64).pow(sub_degree))
    }

    /// `Tr_{p^m / q}(x) = sum_{i<n} x^{q^i}` with `q = p^sub_degree`, `n = m / sub_degree`.
    pub fn trace(&self, x: Elem, sub_degree: u32) -> Result<Elem> {
        let q = self.subfield_order(sub_degree)?;
        let n = self.m / sub_degree;
        if x.is_zero() {
            return Ok(Elem::ZERO);
        }
        let gorder = self.group_order() as u64;
        let l = self.log[x.0 as usize] as u64;
        let mut acc = Elem::ZERO;
        let mut qpow = 1u64;
        for _ in 0..n {
            acc = self.add(acc, self.exp(l * qpow % gorder));
            qpow = qpow * (q % gorder) % gorder;
        }
        Ok(acc)
    }

    /// Whether `x` lies in the subfield of degree `sub_degree`, i.e. `x^q = x`.
    pub fn in_subfield(&self, x: Elem, sub_degree: u32) -> Result<bool> {
        let q = self.subfield_order(sub_degree)?;
        Ok(self.pow_u(x, q) == x)
    }

    /// The subfield of degree `sub_degree`: zero followed by
    /// `gen^{j (p^m-1)/(q-1)}` for `j = 0..q-1`.
    pub fn subfield_elements(&self, sub_degree: u32) -> Result<Vec<Elem>> {
        let q = self.subfield_order(sub_degree)?;
        let step = self.group_order() as u64 / (q - 1);
        let mut out = Vec::with_capacity(q as usize);
        out.push(Elem::ZERO);
        out.extend((0..q - 1).map(|j| self.exp(j * step)));
        Ok(out)
    }

    /// The subgroup of d-th roots of unity, `gen^{j (p^m-1)/d}` for `j = 0..d`.
    pub fn unity_roots(&self, d: u64) -> Result<Vec<Elem>> {
        let n = self.group_order() as u64;
        if d == 0 || n % d != 0 {
            return Err(Error::NotADivisor {
                what: "roots of unity",
                divisor: d,
                value: n,
            });
        }
        let step = n / d;
        Ok((0..d).map(|j| self.exp(j * step)).collect())
    }

    /// `x^d = 1`.
    pub fn in_mu(&self, x: Elem, d: u64) -> bool {
        !x.is_zero() && self.pow_u(x, d) == Elem::ONE
    }

    /// Quadratic character check; only meaningful for odd p.
    pub fn is_square(&self, x: Elem) -> bool {
        match self.log(x) {
            None => false,
            Some(l) => self.p == 2 || l % 2 == 0,
        }
    }

    /// Partitions F^* by `x^{(p^m-1)/2} = +-1`.
    pub fn squares(&self) -> Result<SquareClasses> {
        if self.p == 2 {
            return Err(Error::Precondition(
                "square classes need odd characteristic".into(),
            ));
        }
        let half = self.group_order() as u64 / 2;
        let (squares, nonsquares) = self
            .nonzero()
            .partition(|&x| self.pow_u(x, half) == Elem::ONE);
        Ok(SquareClasses {
            squares,
            nonsquares,
        })
    }

    /// `"c0+c1*t+c2*t^2+..."`, zero terms omitted; `"0"` for zero.
    pub fn format(&self, x: Elem) -> String {
        let c: Vec<u64> = self.coeffs(x).into_iter().map(u64::from).collect();
        poly_string(&c)
    }
}

fn poly_string(coeffs: &[u64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| match i {
            0 => c.to_string(),
            1 => format!("{c}*t"),
            _ => format!("{c}*t^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}
