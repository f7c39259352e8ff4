#![allow(non_snake_case)]

//! Brute-force ground truth: F_q(n, t) by enumerating F_{q^n}, I_q(n, t) by
//! enumerating irreducibles, and Gauss's count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::Result;
use crate::ff_core::{check_budget, divisors, is_irreducible, moebius_mu, Tower};
use crate::trace_lab::{char_poly, trace_vector, TraceSpec};

/// Index of a trace vector (t_1, ..., t_l): t_1 is the least significant base-q digit.
pub fn trace_index(t: &[u32], q: u32) -> usize {
    t.iter().rev().fold(0usize, |acc, &d| acc * q as usize + d as usize)
}

/// Orbit size of `a` if `a` is the least element of its Frobenius orbit.
fn orbit_if_min(t: &Tower, a: u32) -> Option<u32> {
    if a == 0 {
        return Some(1);
    }
    let order = t.order as u64;
    let q = t.q as u64;
    let l = t.log(a) as u64;
    let mut c = l;
    let mut size = 0;
    loop {
        c = c * q % order;
        size += 1;
        if c == l {
            return Some(size);
        }
        if t.exp(c) < a {
            return None;
        }
    }
}

const CHUNK: u32 = 1 << 14;

/// Fold over Frobenius orbits (least element, orbit size) in parallel chunks.
fn orbit_histogram(t: &Tower, l: usize, want_size: Option<u32>) -> Result<Vec<u64>> {
    check_budget(t.size as u128)?;
    let cells = (t.q as usize).pow(l as u32);
    let chunks: Vec<u32> = (0..t.size.div_ceil(CHUNK)).collect();
    let hist = chunks
        .par_iter()
        .map(|&c| {
            let mut h = vec![0u64; cells];
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(t.size);
            for a in lo..hi {
                if let Some(sz) = orbit_if_min(t, a) {
                    match want_size {
                        Some(w) if w != sz => continue,
                        Some(_) => h[trace_index(&trace_vector(t, a, l).values, t.q)] += 1,
                        None => h[trace_index(&trace_vector(t, a, l).values, t.q)] += sz as u64,
                    }
                }
            }
            h
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(hist)
}

type Memo = Mutex<HashMap<(u32, u32, u32, usize, bool), Arc<Vec<u64>>>>;

fn memo() -> &'static Memo {
    static M: OnceLock<Memo> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memoised(t: &Tower, l: usize, irreducible: bool) -> Result<Arc<Vec<u64>>> {
    let key = (t.p, t.r, t.n, l, irreducible);
    if let Some(v) = memo().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(orbit_histogram(t, l, irreducible.then_some(t.n))?);
    memo().lock().unwrap().insert(key, v.clone());
    Ok(v)
}

/// Counts of a ∈ F_{q^n} per full trace vector (t_1..t_l), indexed by [`trace_index`].
pub fn count_all_F_brute(t: &Tower, l: usize) -> Result<Vec<u64>> {
    Ok(memoised(t, l, false)?.as_ref().clone())
}

/// Number of a ∈ F_{q^n} whose traces match `spec`.
pub fn count_F_brute(t: &Tower, spec: &TraceSpec) -> Result<u64> {
    let table = memoised(t, spec.max_position(), false)?;
    Ok(sum_matching(&table, spec, t.q))
}

/// Counts of monic irreducibles of degree n per trace vector of their roots.
pub fn count_all_I_brute(t: &Tower, l: usize) -> Result<Vec<u64>> {
    Ok(memoised(t, l, true)?.as_ref().clone())
}

/// Number of monic degree-n irreducibles over F_q whose roots have traces matching `spec`.
pub fn count_I_brute(q: u32, n: u32, spec: &TraceSpec) -> Result<u64> {
    let t = Tower::for_q(q, n)?;
    let table = memoised(&t, spec.max_position(), true)?;
    Ok(sum_matching(&table, spec, q))
}

fn sum_matching(table: &[u64], spec: &TraceSpec, q: u32) -> u64 {
    let l = spec.max_position();
    (0..table.len())
        .filter(|&i| spec.matches(&crate::ff_core::digits(i as u64, q as u64, l)))
        .map(|i| table[i])
        .sum()
}

/// Monic irreducibles of degree n over F_q (low degree first), in code order.
pub fn enumerate_irreducibles(q: u32, n: u32) -> Result<Vec<Vec<u32>>> {
    let t = Tower::for_q(q, n)?;
    let total = (q as u128).pow(n);
    check_budget(total)?;
    let mut out = Vec::new();
    if total <= 1 << 16 {
        for code in 0..total as u64 {
            let mut f = crate::ff_core::digits(code, q as u64, n as usize);
            f.push(1);
            if is_irreducible(&t.fq, &f) {
                out.push(f);
            }
        }
    } else {
        t.for_each_orbit(|a, size| {
            if size == t.n {
                out.push(char_poly(&t, a));
            }
        })?;
        out.sort_by_key(|f| crate::ff_core::undigits(&f[..n as usize], q as u64));
    }
    Ok(out)
}

/// Gauss: (1/n) Σ_{d | n} μ(d) q^{n/d}.
pub fn gauss_count(q: u64, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    for d in divisors(n) {
        let mu = moebius_mu(d);
        if mu != 0 {
            s += BigInt::from(mu) * num_traits::pow(BigInt::from(q), (n / d) as usize);
        }
    }
    debug_assert!((&s % BigInt::from(n)).is_zero());
    s / BigInt::from(n)
}

/// Gauss count as u64 where it fits.
pub fn gauss_count_u64(q: u64, n: u64) -> Option<u64> {
    gauss_count(q, n).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_counts_small() {
        let t = Tower::get(2, 1, 3).unwrap();
        assert_eq!(count_F_brute(&t, &TraceSpec::full(&[0, 0, 0])).unwrap(), 1);
        assert_eq!(count_F_brute(&t, &TraceSpec::default()).unwrap(), 8);
        for n in 1..=8 {
            let t = Tower::get(2, 1, n).unwrap();
            assert_eq!(count_F_brute(&t, &TraceSpec::full(&[0])).unwrap(), 1 << (n - 1));
        }
        let t = Tower::get(3, 1, 3).unwrap();
        assert_eq!(count_all_F_brute(&t, 1).unwrap(), vec![9, 9, 9]);
        let t = Tower::get(2, 1, 4).unwrap();
        let tab = count_all_F_brute(&t, 4).unwrap();
        assert_eq!(tab.len(), 16);
        assert_eq!(tab.iter().sum::<u64>(), 16);
    }

    #[test]
    fn histogram_matches_plain_enumeration() {
        for (q, n, l) in [(2u32, 7u32, 4usize), (3, 5, 3), (4, 3, 3), (5, 3, 2), (9, 2, 2)] {
            let t = Tower::for_q(q, n).unwrap();
            let mut want = vec![0u64; (q as usize).pow(l as u32)];
            for a in t.enumerate_elements().unwrap() {
                want[trace_index(&trace_vector(&t, a, l).values, q)] += 1;
            }
            assert_eq!(count_all_F_brute(&t, l).unwrap(), want);
        }
    }

    #[test]
    fn wildcard_spec() {
        let t = Tower::get(2, 1, 6).unwrap();
        let tab = count_all_F_brute(&t, 3).unwrap();
        let spec = TraceSpec::parse("1,*,0", 2).unwrap();
        // t1 = 1, t3 = 0: indices with bit0 = 1, bit2 = 0
        assert_eq!(count_F_brute(&t, &spec).unwrap(), tab[1] + tab[3]);
    }

    #[test]
    fn irreducibles() {
        assert_eq!(enumerate_irreducibles(2, 2).unwrap(), vec![vec![1, 1, 1]]);
        assert_eq!(
            enumerate_irreducibles(2, 4).unwrap(),
            vec![vec![1, 1, 0, 0, 1], vec![1, 0, 0, 1, 1], vec![1, 1, 1, 1, 1]]
        );
        assert_eq!(enumerate_irreducibles(3, 2).unwrap().len(), 3);
        assert_eq!(count_I_brute(2, 4, &TraceSpec::full(&[0, 0, 0, 0])).unwrap(), 0);
        assert_eq!(count_I_brute(2, 4, &TraceSpec::full(&[0, 0, 1, 1])).unwrap(), 1);
        for (q, n) in [(2u32, 17u32), (2, 20), (3, 9), (4, 8), (5, 6), (3, 6)] {
            let g = gauss_count_u64(q as u64, n as u64).unwrap();
            assert_eq!(enumerate_irreducibles(q, n).unwrap().len() as u64, g, "q={q} n={n}");
            let t = Tower::for_q(q, n).unwrap();
            assert_eq!(count_all_I_brute(&t, 2).unwrap().iter().sum::<u64>(), g);
        }
    }

    #[test]
    fn both_enumeration_strategies_agree() {
        // 2^16 uses polynomial testing, so compare against root-based enumeration
        let t = Tower::get(2, 1, 16).unwrap();
        let mut via_roots = Vec::new();
        t.for_each_orbit(|a, s| {
            if s == 16 {
                via_roots.push(char_poly(&t, a));
            }
        })
        .unwrap();
        via_roots.sort_by_key(|f| crate::ff_core::undigits(&f[..16], 2));
        assert_eq!(enumerate_irreducibles(2, 16).unwrap(), via_roots);
    }

    #[test]
    fn gauss() {
        assert_eq!(gauss_count(2, 1), BigInt::from(2));
        assert_eq!(gauss_count(2, 4), BigInt::from(3));
        assert_eq!(gauss_count(5, 2), BigInt::from(10));
        assert_eq!(gauss_count(2, 100) * BigInt::from(100) % BigInt::from(100), BigInt::zero());
    }

    #[test]
    fn budget_is_enforced() {
        let r = crate::ff_core::with_budget(1000, || Tower::build(2, 1, 11));
        assert!(matches!(r, Err(crate::Error::BudgetExceeded { .. })));
    }
}
