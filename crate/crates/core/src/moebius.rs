#![allow(non_snake_case)]

//! From prescribed-trace counts F to prescribed-coefficient counts I of
//! irreducibles, by Möbius inversion over the subfields.
//!
//! An element a ∈ F_{q^n} with minimal polynomial f of degree n/d has
//! T(a) = T(f^d), and the multinomial theorem gives T(f^d) = θ_d(T(f)).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{domain, Error, Result};
use crate::expr::{Expr, Monomial};
use crate::ff_core::{divisors, moebius_mu, prime_power, Fq, PrimeField};
use crate::trace_lab::binom_mod_p;

/// A count F_q(m, t) for a full trace vector t.
pub type FProvider<'a> = dyn Fn(u32, &[u32]) -> Result<BigInt> + 'a;

/// Partitions of k as multiplicity vectors ν (ν[j-1] parts of size j).
fn partitions(k: usize) -> Vec<Vec<u32>> {
    fn go(rest: usize, largest: usize, nu: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(nu.clone());
            return;
        }
        for j in (1..=largest.min(rest)).rev() {
            nu[j - 1] += 1;
            go(rest - j, j, nu, out);
            nu[j - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    go(k, k, &mut vec![0; k], &mut out);
    out
}

/// u = θ_d(t): u_k = Σ_{ν₁+2ν₂+..+kν_k = k} d^{(ν₁+..+ν_k)} Π t_j^{ν_j}/ν_j!, over F_q.
pub fn theta_d(t: &[u32], d: u64, q: u32) -> Result<Vec<u32>> {
    let (p, r) = prime_power(q)?;
    let fq = Fq::new(p, r)?;
    let fp = PrimeField::new(p)?;
    if t.len() >= p as usize {
        return domain(format!("θ_d needs l < p, got l = {} and p = {p}", t.len()));
    }
    if d == 0 {
        return domain("d must be positive");
    }
    let mut u = Vec::with_capacity(t.len());
    for k in 1..=t.len() {
        let mut acc = 0u32;
        for nu in partitions(k) {
            let m: u32 = nu.iter().sum();
            // d^{(m)} / Π ν_j! in F_p
            let mut c = 1u32;
            for i in 0..m as u64 {
                c = fp.mul(c, ((d as i64 - i as i64).rem_euclid(p as i64)) as u32);
            }
            for &v in &nu {
                for i in 2..=v {
                    c = fp.mul(c, fp.inv(i)?);
                }
            }
            if c == 0 {
                continue;
            }
            let mut term = c;
            for (j, &v) in nu.iter().enumerate() {
                term = fq.mul(term, fq.pow(t[j], v as u64));
            }
            acc = fq.add(acc, term);
        }
        u.push(acc);
    }
    Ok(u)
}

/// Correction [pd | n] q^{n/(pd)} in the t = 0 branch; zero whenever p ∤ n.
fn pd_correction(q: u64, p: u64, n: u64, d: u64, zero_target: bool) -> BigInt {
    if zero_target && n % (p * d) == 0 {
        BigInt::from(q).pow((n / (p * d)) as u32)
    } else {
        BigInt::zero()
    }
}

/// I_q(n, t) = (1/n) Σ_{d | n} μ(d) F_q(n/d, θ_{d^{-1}}(t)) for l < p and p ∤ n.
pub fn I_from_F(q: u32, n: u32, t: &[u32], f: &FProvider) -> Result<BigInt> {
    let (p, _) = prime_power(q)?;
    if t.len() >= p as usize {
        return domain(format!("generic transform needs l < p, got l = {}", t.len()));
    }
    if n == 0 || n % p == 0 {
        return domain(format!("n must be positive and coprime to p = {p}"));
    }
    let fp = PrimeField::new(p)?;
    let zero = t.iter().all(|&x| x == 0);
    let mut s = BigInt::zero();
    for d in divisors(n as u64) {
        let mu = moebius_mu(d);
        if mu == 0 || d % p as u64 == 0 {
            continue;
        }
        let dinv = fp.inv((d % p as u64) as u32)?;
        let u = theta_d(t, dinv as u64, q)?;
        let val = f(n / d as u32, &u)? - pd_correction(q as u64, p as u64, n as u64, d, zero);
        s += BigInt::from(mu) * val;
    }
    let (quo, rem) = s.div_rem(&BigInt::from(n));
    if !rem.is_zero() {
        return Err(Error::NonIntegral(format!("Σ μ(d) F = {s} is not divisible by n = {n}")));
    }
    Ok(quo)
}

/// T_l(f^d) over F_2 as a polynomial in T1..Tl (exponents reduced, since T_j ∈ F_2).
pub fn trace_of_power_identities(l: usize, d: u64) -> Result<Expr> {
    if !(1..=5).contains(&l) {
        return domain(format!("identities are provided for l = 1..5, got {l}"));
    }
    if d == 0 {
        return domain("d must be positive");
    }
    let mut e = Expr::zero();
    for nu in partitions(l) {
        let m: u32 = nu.iter().sum();
        // multinomial(d; ν, d - m) = binom(d, m) · m!/Π ν_j!
        let mut c = binom_mod_p(d, m as u64, 2);
        let mut rest = m as u64;
        for &v in &nu {
            c *= binom_mod_p(rest, v as u64, 2);
            rest -= v as u64;
        }
        if c % 2 == 0 {
            continue;
        }
        let mono: Monomial = nu
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(j, _)| (format!("T{}", j + 1), 1))
            .collect();
        let mut term = Expr::zero();
        term.terms.insert(mono, 1);
        e = e.add(&term);
    }
    // coefficients live in F_2
    e.terms.retain(|_, c| c.rem_euclid(2) == 1);
    e.terms.values_mut().for_each(|c| *c = 1);
    Ok(e)
}

/// One sum of a binary four-coefficient transform: Σ_{d | n, d ≡ res mod m} ±μ(d) F_2(n/d, t),
/// or with `half`, over d with n/d even, of F_2(n/2d, (t_1, t_2)).
struct Piece {
    modulus: u64,
    residue: u64,
    half: bool,
    target: &'static [u32],
}

const fn pc(modulus: u64, residue: u64, target: &'static [u32]) -> Piece {
    Piece { modulus, residue, half: false, target }
}

const fn hf(modulus: u64, residue: u64, target: &'static [u32]) -> Piece {
    Piece { modulus, residue, half: true, target }
}

/// The sixteen cases, keyed by (t1, t2, t3, t4); `half` pieces are subtracted.
const BINARY4: [([u32; 4], &[Piece]); 16] = [
    ([1, 1, 1, 0], &[pc(8, 1, &[1, 1, 1, 0]), pc(8, 3, &[1, 0, 0, 0]), pc(8, 5, &[1, 1, 1, 1]), pc(8, 7, &[1, 0, 0, 1])]),
    ([1, 0, 0, 0], &[pc(8, 1, &[1, 0, 0, 0]), pc(8, 3, &[1, 1, 1, 0]), pc(8, 5, &[1, 0, 0, 1]), pc(8, 7, &[1, 1, 1, 1])]),
    ([1, 1, 1, 1], &[pc(8, 1, &[1, 1, 1, 1]), pc(8, 3, &[1, 0, 0, 1]), pc(8, 5, &[1, 1, 1, 0]), pc(8, 7, &[1, 0, 0, 0])]),
    ([1, 0, 0, 1], &[pc(8, 1, &[1, 0, 0, 1]), pc(8, 3, &[1, 1, 1, 1]), pc(8, 5, &[1, 0, 0, 0]), pc(8, 7, &[1, 1, 1, 0])]),
    ([1, 1, 0, 0], &[pc(8, 1, &[1, 1, 0, 0]), pc(8, 3, &[1, 0, 1, 0]), pc(8, 5, &[1, 1, 0, 1]), pc(8, 7, &[1, 0, 1, 1])]),
    ([1, 0, 1, 0], &[pc(8, 1, &[1, 0, 1, 0]), pc(8, 3, &[1, 1, 0, 0]), pc(8, 5, &[1, 0, 1, 1]), pc(8, 7, &[1, 1, 0, 1])]),
    ([1, 1, 0, 1], &[pc(8, 1, &[1, 1, 0, 1]), pc(8, 3, &[1, 0, 1, 1]), pc(8, 5, &[1, 1, 0, 0]), pc(8, 7, &[1, 0, 1, 0])]),
    ([1, 0, 1, 1], &[pc(8, 1, &[1, 0, 1, 1]), pc(8, 3, &[1, 1, 0, 1]), pc(8, 5, &[1, 0, 1, 0]), pc(8, 7, &[1, 1, 0, 0])]),
    ([0, 0, 1, 0], &[pc(2, 1, &[0, 0, 1, 0])]),
    ([0, 0, 1, 1], &[pc(2, 1, &[0, 0, 1, 1])]),
    ([0, 1, 1, 1], &[pc(4, 1, &[0, 1, 1, 1]), pc(4, 3, &[0, 1, 1, 0])]),
    ([0, 1, 1, 0], &[pc(4, 1, &[0, 1, 1, 0]), pc(4, 3, &[0, 1, 1, 1])]),
    ([0, 0, 0, 0], &[pc(2, 1, &[0, 0, 0, 0]), hf(2, 1, &[0, 0])]),
    ([0, 0, 0, 1], &[pc(2, 1, &[0, 0, 0, 1]), hf(2, 1, &[0, 1])]),
    ([0, 1, 0, 0], &[pc(4, 1, &[0, 1, 0, 0]), hf(4, 1, &[1, 0]), pc(4, 3, &[0, 1, 0, 1]), hf(4, 3, &[1, 1])]),
    ([0, 1, 0, 1], &[pc(4, 1, &[0, 1, 0, 1]), hf(4, 1, &[1, 1]), pc(4, 3, &[0, 1, 0, 0]), hf(4, 3, &[1, 0])]),
];

/// I_2(n, t) for t ∈ F_2^4 from F_2 counts at n/d and n/2d.
pub fn I2_from_F2_l4(n: u32, t: &[u32], f: &FProvider) -> Result<BigInt> {
    if n < 4 {
        return domain("the binary four-coefficient transform needs n ≥ 4");
    }
    if t.len() != 4 || t.iter().any(|&x| x > 1) {
        return domain("need four traces in F_2");
    }
    let (_, pieces) = BINARY4.iter().find(|(k, _)| k == t).expect("all 16 cases listed");
    let mut s = BigInt::zero();
    for d in divisors(n as u64) {
        let mu = moebius_mu(d);
        if mu == 0 {
            continue;
        }
        for pc in pieces.iter() {
            if d % pc.modulus != pc.residue {
                continue;
            }
            if pc.half {
                if (n as u64 / d) % 2 == 0 {
                    s -= BigInt::from(mu) * f((n as u64 / (2 * d)) as u32, pc.target)?;
                }
            } else {
                s += BigInt::from(mu) * f((n as u64 / d) as u32, pc.target)?;
            }
        }
    }
    let (quo, rem) = s.div_rem(&BigInt::from(n));
    if !rem.is_zero() {
        return Err(Error::NonIntegral(format!("n·I = {s} is not divisible by n = {n}")));
    }
    Ok(quo)
}

/// T_5(f^d) as printed in closed form: binom(d,5)T1 + dT5 + (d-2)binom(d,2)(T1T2 + T1T3).
pub fn t5_of_power(t: &[u32], d: u64) -> u32 {
    let b = |k| binom_mod_p(d, k, 2) as u32;
    // d - 2 ≡ d mod 2
    let dd = (d % 2) as u32;
    (b(5) * t[0] + dd * t[4] + dd * b(2) * (t[0] * t[1] + t[0] * t[2])) % 2
}
