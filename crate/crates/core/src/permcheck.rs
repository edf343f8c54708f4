//! Bijectivity checks for maps on a finite field or on a subgroup mu_d.
//!
//! The main check walks the domain once and records images in a bitmap,
//! stopping at the first repeated image. For a map that behaves like a random
//! function this stops after about sqrt(|domain|) evaluations.
//!
//! The field is walked as 0, g^0, g^1, ... rather than in index order. Index
//! order visits whole F_p-subspaces first, and maps of the form
//! `x + gamma * (subfield value)` can only collide along lines in direction
//! gamma, so an index-order scan would often see no collision until it had
//! covered a large part of the field.

use crate::error::Result;
use crate::ffield::{Elem, FieldCtx};

/// A pure single-argument map. `None` means the map is undefined at the
/// point, e.g. a rational function whose denominator vanishes there.
pub trait EvalMap: Sync {
    fn eval(&self, x: Elem) -> Option<Elem>;
}

impl<F> EvalMap for F
where
    F: Fn(Elem) -> Option<Elem> + Sync,
{
    fn eval(&self, x: Elem) -> Option<Elem> {
        self(x)
    }
}

/// Adapter for maps defined everywhere.
pub struct Total<F>(pub F);

impl<F> EvalMap for Total<F>
where
    F: Fn(Elem) -> Elem + Sync,
{
    fn eval(&self, x: Elem) -> Option<Elem> {
        Some((self.0)(x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// The whole field.
    Field,
    /// The d-th roots of unity.
    Mu(u64),
}

impl Domain {
    pub fn elements(&self, ctx: &FieldCtx) -> Result<Vec<Elem>> {
        match *self {
            Domain::Field => Ok(scan_order(ctx)),
            Domain::Mu(d) => ctx.unity_roots(d),
        }
    }

    pub fn contains(&self, ctx: &FieldCtx, x: Elem) -> bool {
        match *self {
            Domain::Field => true,
            Domain::Mu(d) => ctx.in_mu(x, d),
        }
    }
}

/// 0 followed by the powers of the generator.
pub fn scan_order(ctx: &FieldCtx) -> Vec<Elem> {
    std::iter::once(Elem::ZERO)
        .chain((0..ctx.group_order() as u64).map(|j| ctx.exp(j)))
        .collect()
}

/// Why a map failed to permute its domain, or that it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Permutation,
    Collision {
        first: Elem,
        second: Elem,
        image: Elem,
    },
    EscapeFromDomain {
        point: Elem,
        image: Elem,
    },
    DenominatorRoot {
        point: Elem,
    },
}

impl Verdict {
    pub fn is_permutation(&self) -> bool {
        matches!(self, Verdict::Permutation)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Permutation => "permutation",
            Verdict::Collision { .. } => "collision",
            Verdict::EscapeFromDomain { .. } => "escape-from-mu",
            Verdict::DenominatorRoot { .. } => "denominator-root",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    /// Map evaluations performed before deciding.
    pub evaluations: u64,
}

/// Fixed-capacity bitmap over field indices.
#[derive(Clone, Debug)]
pub struct SeenSet {
    words: Vec<u64>,
}

impl SeenSet {
    pub fn new(capacity: usize) -> Self {
        SeenSet {
            words: vec![0; capacity.div_ceil(64)],
        }
    }

    /// Marks `idx`; returns false if it was already marked.
    #[inline]
    pub fn insert(&mut self, idx: u32) -> bool {
        let w = &mut self.words[(idx >> 6) as usize];
        let bit = 1u64 << (idx & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }
}

/// Early-abort bijectivity test.
pub fn check_permutation<M: EvalMap + ?Sized>(
    ctx: &FieldCtx,
    map: &M,
    domain: Domain,
) -> Result<CheckOutcome> {
    let points = domain.elements(ctx)?;
    let mut seen = SeenSet::new(ctx.order() as usize);
    for (i, &x) in points.iter().enumerate() {
        let evaluations = i as u64 + 1;
        let Some(y) = map.eval(x) else {
            return Ok(CheckOutcome {
                verdict: Verdict::DenominatorRoot { point: x },
                evaluations,
            });
        };
        if !domain.contains(ctx, y) {
            return Ok(CheckOutcome {
                verdict: Verdict::EscapeFromDomain { point: x, image: y },
                evaluations,
            });
        }
        if !seen.insert(y.index()) {
            let first = points[..i]
                .iter()
                .copied()
                .find(|&z| map.eval(z) == Some(y))
                .expect("an earlier point produced this image");
            return Ok(CheckOutcome {
                verdict: Verdict::Collision {
                    first,
                    second: x,
                    image: y,
                },
                evaluations,
            });
        }
    }
    Ok(CheckOutcome {
        verdict: Verdict::Permutation,
        evaluations: points.len() as u64,
    })
}

pub fn is_permutation<M: EvalMap + ?Sized>(
    ctx: &FieldCtx,
    map: &M,
    domain: Domain,
) -> Result<bool> {
    Ok(check_permutation(ctx, map, domain)?
        .verdict
        .is_permutation())
}

/// Full-image check with no early abort: every point is evaluated and the
/// image is compared with the domain after sorting.
pub fn is_permutation_exhaustive<M: EvalMap + ?Sized>(
    ctx: &FieldCtx,
    map: &M,
    domain: Domain,
) -> Result<bool> {
    let points = domain.elements(ctx)?;
    let mut image = Vec::with_capacity(points.len());
    for &x in &points {
        match map.eval(x) {
            Some(y) => image.push(y),
            None => return Ok(false),
        }
    }
    image.sort_unstable();
    let mut sorted = points;
    sorted.sort_unstable();
    Ok(image == sorted)
}

/// Bijectivity on mu_d for a map that may be undefined at some points. On
/// success the image is checked to be exactly mu_d.
pub fn permutes_mu<M: EvalMap + ?Sized>(ctx: &FieldCtx, map: &M, d: u64) -> Result<Verdict> {
    let outcome = check_permutation(ctx, map, Domain::Mu(d))?;
    if outcome.verdict.is_permutation() {
        let mut image: Vec<Elem> = ctx
            .unity_roots(d)?
            .into_iter()
            .filter_map(|x| map.eval(x))
            .collect();
        image.sort_unstable();
        let mut mu = ctx.unity_roots(d)?;
        mu.sort_unstable();
        assert_eq!(image, mu, "injective map into mu_{d} must be onto");
    }
    Ok(outcome.verdict)
}

fn solutions<M: EvalMap + ?Sized>(
    ctx: &FieldCtx,
    map: &M,
    domain: Domain,
    target: impl Fn(Elem) -> Elem,
) -> Result<Vec<Elem>> {
    let mut out: Vec<Elem> = domain
        .elements(ctx)?
        .into_iter()
        .filter(|&x| map.eval(x) == Some(target(x)))
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Points of the domain with `map(x) = x`, by increasing index.
pub fn fixed_points<M: EvalMap + ?Sized>(
    ctx: &FieldCtx,
    map: &M,
    domain: Domain,
) -> Result<Vec<Elem>> {
    solutions(ctx, map, domain, |x| x)
}

/// Points of the domain with `map(x) = 0`, by increasing index.
pub fn roots<M: EvalMap + ?Sized>(ctx: &FieldCtx, map: &M, domain: Domain) -> Result<Vec<Elem>> {
    solutions(ctx, map, domain, |_| Elem::ZERO)
}
