//! Artin-Schreier curves y^e - y = f(x) and systems of such equations:
//! affine point counts, the reduction from y^q - y to y^p - y, Frobenius
//! characteristic polynomials from point counts, and power sums of their roots.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::expr::{Compiled, Expr};
use crate::ff_core::{Fq, Tower, NO_SOLUTION};

/// y^e - y = f(x) over F_q, q = p^r, with f given by F_q coefficients (low degree first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ASCurve {
    pub p: u32,
    pub r: u32,
    pub e: u32,
    pub f: Vec<u32>,
}

impl ASCurve {
    pub fn new(p: u32, r: u32, e: u32, f: Vec<u32>) -> Result<Self> {
        let q = p.pow(r);
        if e != p && e != q {
            return domain(format!("exponent {e} must be p = {p} or q = {q}"));
        }
        let f = crate::ff_core::poly_trim(f);
        if f.len() < 2 {
            return domain("the right-hand side must have degree ≥ 1");
        }
        if f.iter().any(|&c| c >= q) {
            return domain("coefficient outside F_q");
        }
        Ok(Self { p, r, e, f })
    }
    pub fn q(&self) -> u32 {
        self.p.pow(self.r)
    }
    pub fn degree(&self) -> usize {
        self.f.len() - 1
    }
}

fn eval_f(t: &Tower, f: &[u32], x: u32) -> u32 {
    f.iter().rev().fold(0, |acc, &c| t.add(t.mul(acc, x), c))
}

/// Number of affine points over F_{q^n}.
pub fn affine_count(c: &ASCurve, n: u32) -> Result<u64> {
    let t = Tower::get(c.p, c.r, n)?;
    let q = c.q();
    let mut zeros = 0u64;
    // f has F_q coefficients, so the trace condition is constant on Frobenius orbits
    t.for_each_orbit(|x, size| {
        let v = eval_f(&t, &c.f, x);
        let tr = if c.e == q { t.trace(v) } else { t.abs_trace(v) };
        if tr == 0 {
            zeros += size as u64;
        }
    })?;
    Ok(zeros * c.e as u64)
}

/// The q - 1 curves y^p - y = α f, α ∈ F_q^×.
pub fn reduce_to_prime(c: &ASCurve) -> Result<Vec<ASCurve>> {
    if c.r == 1 {
        return domain("reduction needs a proper prime power q");
    }
    let fq = Fq::new(c.p, c.r)?;
    (1..c.q()).map(|alpha| ASCurve::new(c.p, c.r, c.p, c.f.iter().map(|&x| fq.mul(alpha, x)).collect())).collect()
}

/// Checks (p - 1)#C - Σ_α #C_α = (p - q) q^n for y^q - y = f.
pub fn check_reduction(c: &ASCurve, n: u32) -> Result<bool> {
    let q_curve = ASCurve::new(c.p, c.r, c.q(), c.f.clone())?;
    let lhs = (c.p as i128 - 1) * affine_count(&q_curve, n)? as i128
        - reduce_to_prime(c)?.iter().map(|a| affine_count(a, n).map(|x| x as i128)).sum::<Result<i128>>()?;
    Ok(lhs == (c.p as i128 - c.q() as i128) * (c.q() as i128).pow(n))
}

/// (p - 1)(d - 1)/2 for y^p - y = f with deg f = d prime to p.
pub fn genus_as(p: u32, d: usize) -> Result<usize> {
    if d == 0 || d % p as usize == 0 {
        return domain(format!("degree {d} must be positive and prime to p = {p}"));
    }
    Ok((p as usize - 1) * (d - 1) / 2)
}

/// Monic integer polynomial X^{2g} + c_1 X^{2g-1} + ... + c_{2g} (coefficients high degree first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusPoly {
    pub coeffs: Vec<BigInt>,
    pub q: u64,
    pub genus: usize,
}

impl FrobeniusPoly {
    /// c_{2g-k} = q^{g-k} c_k.
    pub fn satisfies_functional_equation(&self) -> bool {
        let g = self.genus;
        (0..=g).all(|k| self.coeffs[2 * g - k] == num_traits::pow(BigInt::from(self.q), g - k) * &self.coeffs[k])
    }
}

/// ρ_0..ρ_{nmax}: power sums of the roots of a monic integer polynomial (high degree first).
pub fn power_sums(coeffs: &[BigInt], nmax: usize) -> Vec<BigInt> {
    let d = coeffs.len() - 1;
    let mut rho = vec![BigInt::from(d)];
    for k in 1..=nmax {
        let mut s = BigInt::zero();
        for j in 1..=d.min(k - 1) {
            s += &coeffs[j] * &rho[k - j];
        }
        if k <= d {
            s += &coeffs[k] * BigInt::from(k);
        }
        rho.push(-s);
    }
    rho
}

/// ρ_n of a monic integer polynomial.
pub fn power_sum_eval(coeffs: &[BigInt], n: usize) -> BigInt {
    power_sums(coeffs, n).pop().unwrap()
}

/// Recover the Frobenius polynomial from S_m = q^m - #C_aff(F_{q^m}) for m = 1..g+2.
pub fn charpoly_from_sums(q: u64, g: usize, s: &[BigInt]) -> Result<FrobeniusPoly> {
    if s.len() < g + 2 {
        return domain(format!("need {} point counts, got {}", g + 2, s.len()));
    }
    let mut c = vec![BigInt::one()];
    for k in 1..=g {
        let mut acc = s[k - 1].clone();
        for j in 1..k {
            acc += &c[j] * &s[k - j - 1];
        }
        let (quo, rem) = (-acc).div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::Validation(format!("non-integral coefficient c_{k}")));
        }
        c.push(quo);
    }
    for k in (0..g).rev() {
        c.push(num_traits::pow(BigInt::from(q), g - k) * &c[k]);
    }
    let poly = FrobeniusPoly { coeffs: c, q, genus: g };
    let pred = power_sums(&poly.coeffs, g + 2);
    for m in g + 1..=g + 2 {
        if pred[m] != s[m - 1] {
            return Err(Error::Validation(format!(
                "predicted S_{m} = {} but counted {}",
                pred[m],
                s[m - 1]
            )));
        }
    }
    Ok(poly)
}

/// Frobenius polynomial of y^p - y = f over F_q with p ∤ deg f.
pub fn frobenius_charpoly(c: &ASCurve) -> Result<FrobeniusPoly> {
    if c.e != c.p {
        return domain("charpoly recovery needs the exponent p");
    }
    let g = genus_as(c.p, c.degree())?;
    let q = c.q() as u64;
    let mut s = Vec::with_capacity(g + 2);
    for m in 1..=g as u32 + 2 {
        let count = affine_count(c, m)?;
        s.push(BigInt::from(q).pow(m) - BigInt::from(count));
    }
    charpoly_from_sums(q, g, &s)
}

/// p^{⌈k r / 2⌉} | c_k for 1 ≤ k ≤ g.
pub fn is_supersingular(poly: &FrobeniusPoly, p: u64, r: u32) -> bool {
    (1..=poly.genus).all(|k| {
        let e = (k as u32 * r).div_ceil(2);
        (&poly.coeffs[k] % num_traits::pow(BigInt::from(p), e as usize)).is_zero()
    })
}

/// Parse an integer polynomial written high degree first, e.g. "X^2 + 2*X + 2".
pub fn parse_int_poly(s: &str) -> Result<Vec<BigInt>> {
    let e = Expr::parse(s)?;
    let vars = e.variables();
    if vars.len() > 1 {
        return domain(format!("expected a univariate polynomial, found {vars:?}"));
    }
    let deg = e.terms.keys().map(|m| m.values().sum::<u32>()).max().unwrap_or(0) as usize;
    let mut c = vec![BigInt::zero(); deg + 1];
    for (m, &k) in &e.terms {
        let d = m.values().sum::<u32>() as usize;
        c[deg - d] += BigInt::from(k);
    }
    Ok(c)
}

/// One equation y^e - y = g(vars) of a system.
#[derive(Clone, Debug)]
pub struct ASEquation {
    pub var: usize,
    pub e: u32,
    pub g: Compiled,
}

/// Free variable (index 0) plus equations in dependency order; `s` counts the
/// parameterising variables, so counts carry a factor q^s or 2^s.
#[derive(Clone, Debug)]
pub struct ASSystem {
    pub p: u32,
    pub r: u32,
    pub vars: Vec<String>,
    pub equations: Vec<ASEquation>,
    pub s: u32,
}

impl ASSystem {
    /// Build from text: `eqs` are (variable, exponent, right-hand side). Named
    /// constants in `consts` are substituted before compiling.
    pub fn parse(
        p: u32,
        r: u32,
        free: &str,
        eqs: &[(&str, u32, &str)],
        consts: &HashMap<String, i64>,
    ) -> Result<Self> {
        let fq = Fq::new(p, r)?;
        let mut vars = vec![free.to_string()];
        vars.extend(eqs.iter().map(|(v, _, _)| v.to_string()));
        let names: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        let mut equations = Vec::new();
        for (k, (v, e, rhs)) in eqs.iter().enumerate() {
            let ex = Expr::parse(rhs)?.substitute(consts);
            // only the free variable and earlier unknowns may appear
            for name in ex.variables() {
                let pos = names.iter().position(|x| *x == name);
                match pos {
                    Some(i) if i <= k => {}
                    _ => return domain(format!("equation for {v} uses {name} out of order")),
                }
            }
            equations.push(ASEquation { var: k + 1, e: *e, g: ex.compile(&names, &fq)? });
        }
        Ok(Self { p, r, vars, equations, s: 0 })
    }
    pub fn q(&self) -> u32 {
        self.p.pow(self.r)
    }
}

/// Number of full solution tuples over F_{q^n}.
pub fn affine_count_system(sys: &ASSystem, n: u32) -> Result<u64> {
    let t = Tower::get(sys.p, sys.r, n)?;
    let xs = t.enumerate_elements()?;
    let neq = sys.equations.len();
    // whether a later equation reads each unknown
    let used_later: Vec<bool> =
        (0..neq).map(|k| sys.equations[k + 1..].iter().any(|eq| eq.g.uses(sys.equations[k].var))).collect();
    for eq in &sys.equations {
        if eq.e != sys.p && eq.e != sys.q() {
            return domain(format!("exponent {} must be p or q", eq.e));
        }
    }
    let mut vals = vec![0u32; sys.vars.len()];
    let mut total = 0u64;
    for x in xs {
        vals[0] = x;
        total += fiber(&t, sys, &used_later, 0, &mut vals);
    }
    Ok(total)
}

fn fiber(t: &Tower, sys: &ASSystem, used_later: &[bool], k: usize, vals: &mut [u32]) -> u64 {
    if k == sys.equations.len() {
        return 1;
    }
    let eq = &sys.equations[k];
    let c = eq.g.eval(t, vals);
    let y0 = t.as_solve(c, eq.e);
    if y0 == NO_SOLUTION {
        return 0;
    }
    if !used_later[k] {
        vals[eq.var] = y0;
        return eq.e as u64 * fiber(t, sys, used_later, k + 1, vals);
    }
    let mut s = 0;
    for beta in 0..eq.e {
        vals[eq.var] = t.add(y0, beta);
        s += fiber(t, sys, used_later, k + 1, vals);
    }
    s
}

/// Affine count by brute force over all variable tuples (for testing the fiber logic).
pub fn affine_count_system_exhaustive(sys: &ASSystem, n: u32) -> Result<u64> {
    let t = Tower::get(sys.p, sys.r, n)?;
    let nv = sys.vars.len();
    crate::ff_core::check_budget((t.size as u128).pow(nv as u32))?;
    let total = (t.size as u64).pow(nv as u32);
    let mut count = 0;
    let mut vals = vec![0u32; nv];
    for code in 0..total {
        let mut c = code;
        for v in vals.iter_mut() {
            *v = (c % t.size as u64) as u32;
            c /= t.size as u64;
        }
        if sys.equations.iter().all(|eq| {
            let y = vals[eq.var];
            t.sub(t.pow(y, eq.e as u64), y) == eq.g.eval(&t, &vals)
        }) {
            count += 1;
        }
    }
    Ok(count)
}

/// Integer value of a power sum, if it fits.
pub fn rho_i128(coeffs: &[BigInt], n: usize) -> Option<i128> {
    power_sum_eval(coeffs, n).to_i128()
}
