#![allow(non_snake_case)]

//! Counting transforms between N(j) = #{a : f(a) = j} and the evaluation
//! counts V(i) = #{a : i·f(a) = 1} (general q) or #{a : i·f(a) = 0} (q = 2).
//!
//! Tables are indexed by the base-q integer of the index vector, with digit 0
//! pairing with the first function.

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ff_core::{digits, prime_power, Fq};

type Q = Ratio<i128>;

fn field(q: u32) -> Result<Fq> {
    let (p, r) = prime_power(q)?;
    Fq::new(p, r)
}

/// i·j in F_q via the base-q digits of both indices.
pub fn dot(f: &Fq, i: usize, j: usize, m: usize) -> u32 {
    let di = digits(i as u64, f.q as u64, m);
    let dj = digits(j as u64, f.q as u64, m);
    di.iter().zip(&dj).fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
}

fn check_len(len: usize, q: u32, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("transforms need m ≥ 1".into()));
    }
    if len != (q as usize).pow(m as u32) {
        return Err(Error::Domain(format!("table of length {len} is not q^m = {q}^{m}")));
    }
    Ok(())
}

fn to_integers(v: Vec<Q>, what: &str) -> Result<Vec<i128>> {
    v.into_iter()
        .enumerate()
        .map(|(j, x)| {
            if !x.is_integer() {
                Err(Error::NonIntegral(format!("{what}: entry {j} is {x}")))
            } else if x < Q::zero() {
                Err(Error::NonIntegral(format!("{what}: entry {j} is negative ({x})")))
            } else {
                Ok(x.to_integer())
            }
        })
        .collect()
}

/// V_1(i) = Σ_{i·j=1} N(j) for i ≠ 0, and V_1(0) = Σ_j N(j).
pub fn forward_V1_from_N(n: &[i128], q: u32, m: usize) -> Result<Vec<i128>> {
    check_len(n.len(), q, m)?;
    let f = field(q)?;
    let mut v = vec![0i128; n.len()];
    v[0] = n.iter().sum();
    for (i, vi) in v.iter_mut().enumerate().skip(1) {
        *vi = (0..n.len()).filter(|&j| dot(&f, i, j, m) == 1).map(|j| n[j]).sum();
    }
    Ok(v)
}

/// Inverse of [`forward_V1_from_N`].
pub fn solve_N_from_V1(v: &[i128], q: u32, m: usize) -> Result<Vec<i128>> {
    check_len(v.len(), q, m)?;
    let f = field(q)?;
    let scale = Q::new(1, (q as i128).pow(m as u32 - 1));
    let mut out = vec![Q::zero(); v.len()];
    let rest: i128 = v[1..].iter().sum();
    out[0] = Q::from(v[0]) - scale * Q::from(rest);
    for (j, o) in out.iter_mut().enumerate().skip(1) {
        let mut s = 0i128;
        for (i, &vi) in v.iter().enumerate().skip(1) {
            match dot(&f, i, j, m) {
                1 => s += vi,
                0 => s -= vi,
                _ => {}
            }
        }
        *o = scale * Q::from(s);
    }
    to_integers(out, "solve_N_from_V1")
}

/// q = 2 zero-counting form: V(i) = Σ_{i·j=0} N(j).
pub fn forward_V0_from_N(n: &[i128], m: usize) -> Result<Vec<i128>> {
    check_len(n.len(), 2, m)?;
    Ok((0..n.len())
        .map(|i| (0..n.len()).filter(|&j| (i & j).count_ones() % 2 == 0).map(|j| n[j]).sum())
        .collect())
}

fn apply_s_inverse(v: &[i128], m: usize) -> Vec<Q> {
    // S^{-1} = (1/2^{m-1}) H - E_00 with H the Hadamard matrix
    let scale = Q::new(1, 1i128 << (m - 1));
    (0..v.len())
        .map(|j| {
            let h: i128 =
                v.iter().enumerate().map(|(i, &vi)| if (i & j).count_ones() % 2 == 0 { vi } else { -vi }).sum();
            let mut x = scale * Q::from(h);
            if j == 0 {
                x -= Q::from(v[0]);
            }
            x
        })
        .collect()
}

/// Inverse of [`forward_V0_from_N`].
pub fn solve_N_from_V0(v: &[i128], m: usize) -> Result<Vec<i128>> {
    check_len(v.len(), 2, m)?;
    to_integers(apply_s_inverse(v, m), "solve_N_from_V0")
}

/// Zero-counting transform over a parameterised domain A: V(0) is |A| and
/// every count carries a factor 2^s from the parameterisation.
pub fn solve_restricted_domain(v: &[i128], m: usize, domain_size: i128, s: u32) -> Result<Vec<i128>> {
    check_len(v.len(), 2, m)?;
    let mut w = v.to_vec();
    w[0] = domain_size;
    let d = Q::new(1, 1i128 << s);
    to_integers(apply_s_inverse(&w, m).into_iter().map(|x| x * d).collect(), "solve_restricted_domain")
}

/// Dense S_{q,m} with entries [i·j = 1] for i ≠ 0 and a row of ones at i = 0.
pub fn s_matrix_v1(q: u32, m: usize) -> Result<Vec<Vec<i128>>> {
    let f = field(q)?;
    let size = (q as usize).pow(m as u32);
    Ok((0..size)
        .map(|i| (0..size).map(|j| if i == 0 || dot(&f, i, j, m) == 1 { 1 } else { 0 }).collect())
        .collect())
}

/// Dense closed-form inverse of [`s_matrix_v1`], as rationals.
pub fn s_inverse_v1(q: u32, m: usize) -> Result<Vec<Vec<Q>>> {
    let f = field(q)?;
    let size = (q as usize).pow(m as u32);
    let c = Q::new(1, (q as i128).pow(m as u32 - 1));
    Ok((0..size)
        .map(|j| {
            (0..size)
                .map(|i| {
                    if j == 0 {
                        if i == 0 {
                            Q::one()
                        } else {
                            -c
                        }
                    } else if i == 0 {
                        Q::zero()
                    } else {
                        match dot(&f, i, j, m) {
                            1 => c,
                            0 => -c,
                            _ => Q::zero(),
                        }
                    }
                })
                .collect()
        })
        .collect())
}
