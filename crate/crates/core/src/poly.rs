//! Dense univariate polynomials over a [`FieldCtx`], ascending coefficients.

use crate::ffield::{Elem, FieldCtx};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Elem>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Elem) -> Self {
        Self::new(vec![c])
    }

    /// Sum of `c * X^deg` terms; repeated degrees are added together.
    pub fn from_terms(ctx: &FieldCtx, terms: &[(usize, Elem)]) -> Self {
        let len = terms.iter().map(|&(d, _)| d + 1).max().unwrap_or(0);
        let mut coeffs = vec![Elem::ZERO; len];
        for &(d, c) in terms {
            coeffs[d] = ctx.add(coeffs[d], c);
        }
        Self::new(coeffs)
    }

    /// Like [`Poly::from_terms`] with integer coefficients taken mod p.
    pub fn from_int_terms(ctx: &FieldCtx, terms: &[(usize, i64)]) -> Self {
        let terms: Vec<(usize, Elem)> = terms.iter().map(|&(d, c)| (d, ctx.from_int(c))).collect();
        Self::from_terms(ctx, &terms)
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, ctx: &FieldCtx, x: Elem) -> Elem {
        self.coeffs
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }
}
