//! Dense polynomials over a prime field F_p, ascending coefficients.
//!
//! Only what modulus selection needs: products and powers modulo a monic
//! polynomial, gcd, and Rabin's irreducibility test.

use crate::numtheory::prime_factors;

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Remainder of `a` modulo the monic polynomial `f`.
fn rem_monic(mut a: Vec<u64>, f: &[u64], p: u64) -> Vec<u64> {
    let d = f.len() - 1;
    while a.len() > d {
        let lead = a.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = a.len() - d;
        for (i, &c) in f[..d].iter().enumerate() {
            a[shift + i] = (a[shift + i] + p - lead * c % p) % p;
        }
    }
    trim(a)
}

pub(crate) fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    rem_monic(out, f, p)
}

pub(crate) fn pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = rem_monic(base.to_vec(), f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, f, p);
        }
        b = mul_mod(&b, &b, f, p);
        e >>= 1;
    }
    rem_monic(acc, f, p)
}

fn inv_mod_p(a: u64, p: u64) -> u64 {
    crate::numtheory::pow_mod(a, p - 2, p)
}

fn gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    a = trim(a);
    b = trim(b);
    while !b.is_empty() {
        let lead_inv = inv_mod_p(*b.last().unwrap(), p);
        let monic: Vec<u64> = b.iter().map(|&c| c * lead_inv % p).collect();
        let r = rem_monic(a, &monic, p);
        a = monic;
        b = r;
    }
    a
}

/// Rabin's test: a monic `f` of degree `m` is irreducible over F_p iff
/// `X^{p^m} = X mod f` and `gcd(X^{p^{m/r}} - X, f) = 1` for every prime `r | m`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // frob[j] = X^{p^j} mod f
    let mut frob = vec![rem_monic(x.clone(), f, p)];
    for _ in 0..m {
        let next = pow_mod(frob.last().unwrap(), p, f, p);
        frob.push(next);
    }
    if frob[m] != rem_monic(x.clone(), f, p) {
        return false;
    }
    for r in prime_factors(m as u64) {
        let mut g = frob[m / r as usize].clone();
        g.resize(g.len().max(2), 0);
        g[1] = (g[1] + p - 1) % p;
        let d = gcd(f.to_vec(), g, p);
        if d.len() != 1 {
            return false;
        }
    }
    true
}

/// The irreducible monic polynomial of degree `m` that is smallest when
/// coefficient vectors are compared lexicographically from the constant term up.
pub(crate) fn smallest_irreducible(p: u64, m: u32) -> Vec<u64> {
    let m = m as usize;
    let total = p.pow(m as u32);
    // Enumerate (c0, c1, ..., c_{m-1}) in lexicographic order with c0 most significant.
    for code in 0..total {
        let mut coeffs = vec![0u64; m + 1];
        let mut r = code;
        for i in (0..m).rev() {
            coeffs[i] = r % p;
            r /= p;
        }
        coeffs[m] = 1;
        if is_irreducible(&coeffs, p) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials of every degree exist over F_p")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_irreducibility() {
        assert!(is_irreducible(&[1, 0, 1], 3));
        assert!(!is_irreducible(&[2, 0, 1], 3));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        // X^4 + X + 1 over F_2
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        // (X^2 + X + 1)^2 = X^4 + X^2 + 1
        assert!(!is_irreducible(&[1, 0, 1, 0, 1], 2));
    }

    #[test]
    fn lexicographic_default() {
        assert_eq!(smallest_irreducible(3, 2), vec![1, 0, 1]);
        assert_eq!(smallest_irreducible(5, 2), vec![1, 1, 1]);
        assert_eq!(smallest_irreducible(7, 1), vec![0, 1]);
    }

    /// Irreducible counts agree with Gauss's formula (1/m) sum mu(d) p^(m/d).
    #[test]
    fn irreducible_counts_match_necklace_formula() {
        for &(p, m, expected) in &[(2u64, 4u32, 3usize), (3, 3, 8), (5, 2, 10), (3, 4, 18)] {
            let count = (0..p.pow(m))
                .filter(|&code| {
                    let mut c = vec![0u64; m as usize + 1];
                    let mut r = code;
                    for slot in c.iter_mut().take(m as usize) {
                        *slot = r % p;
                        r /= p;
                    }
                    c[m as usize] = 1;
                    is_irreducible(&c, p)
                })
                .count();
            assert_eq!(count, expected, "p={p} m={m}");
        }
    }
}
