use super::{Elem, FieldCtx};
use crate::error::{Error, Result};

/// A ring embedding F_{p^s} -> F_{p^m}, materialized as a lookup table.
///
/// The modulus root of the small field is sent to the smallest-index root of
/// the same modulus in the big field. The map is checked to be additive on a
/// basis and multiplicative along the powers of the small field's generator.
#[derive(Clone, Debug)]
pub struct Embedding {
    table: Vec<Elem>,
}

impl Embedding {
    pub fn new(sub: &FieldCtx, big: &FieldCtx) -> Result<Self> {
        if sub.p() != big.p() || big.m() % sub.m() != 0 {
            return Err(Error::Precondition(format!(
                "F_{}^{} does not embed into F_{}^{}",
                sub.p(),
                sub.m(),
                big.p(),
                big.m()
            )));
        }
        let modulus: Vec<Elem> = sub
            .modulus()
            .iter()
            .map(|&c| big.from_int(c as i64))
            .collect();
        let root = big
            .elements()
            .find(|&x| {
                modulus
                    .iter()
                    .rev()
                    .fold(Elem::ZERO, |acc, &c| big.add(big.mul(acc, x), c))
                    .is_zero()
            })
            .ok_or_else(|| Error::Inconsistent("subfield modulus has no root".into()))?;

        let root_powers: Vec<Elem> = (0..sub.m()).map(|i| big.pow_u(root, i as u64)).collect();
        let table: Vec<Elem> = sub
            .elements()
            .map(|x| {
                sub.coeffs(x)
                    .iter()
                    .zip(&root_powers)
                    .fold(Elem::ZERO, |acc, (&c, &r)| {
                        big.add(acc, big.mul(big.from_int(c as i64), r))
                    })
            })
            .collect();
        let emb = Embedding { table };

        let g = sub.generator();
        let g_img = emb.map(g);
        for j in 0..sub.group_order() as u64 {
            if emb.map(sub.exp(j)) != big.pow_u(g_img, j) {
                return Err(Error::Inconsistent(format!(
                    "embedding not multiplicative at g^{j}"
                )));
            }
        }
        for i in 0..sub.m() {
            // t^i has index p^i
            let basis = Elem::from_raw(sub.p().pow(i));
            for x in sub.elements() {
                if emb.map(sub.add(x, basis)) != big.add(emb.map(x), emb.map(basis)) {
                    return Err(Error::Inconsistent("embedding not additive".into()));
                }
            }
        }
        Ok(emb)
    }

    #[inline]
    pub fn map(&self, x: Elem) -> Elem {
        self.table[x.index() as usize]
    }
}

/// One-shot embedding of `x` from `sub` into `big`.
pub fn embed(sub: &FieldCtx, big: &FieldCtx, x: Elem) -> Result<Elem> {
    Ok(Embedding::new(sub, big)?.map(x))
}
