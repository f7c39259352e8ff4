//! Prescribed-trace formulas for l < p via Artin-Schreier curves.
//!
//! For a ∈ F_{q^n} put f_k = T_1(a^k). By Newton's identities the first l
//! traces of a determine and are determined by (f_1..f_l), so F_q(n, t) counts
//! the a with f = newton_forward(t). For an index vector i ≠ 0 the number of a
//! with i·f = 1 is read off the curves y^p - y = α(-1/n̄ + Σ i_k a^{k+1}),
//! one α per coset of F_p^× in F_q^×, and the V_1 transform inverts these.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::artin_schreier::{charpoly_from_sums, genus_as, ASEquation, ASSystem, FrobeniusPoly};
use crate::error::{domain, Result};
use crate::expr::Compiled;
use crate::ff_core::{digits, Fq, Tower};
use crate::formula::{CountFormula, FormulaSet, Term, Validity};
use crate::oracle::{count_all_F_brute, trace_index};
use crate::trace_lab::{newton_forward, newton_inverse};
use crate::transforms::dot;

fn check_params(fq: &Fq, l: usize, nbar: u32) -> Result<()> {
    if l == 0 || l >= fq.p as usize {
        return domain(format!("need 1 ≤ l < p, got l = {l}, p = {}", fq.p));
    }
    if nbar == 0 || nbar >= fq.p {
        return domain(format!("n̄ must lie in 1..{}, got {nbar}", fq.p - 1));
    }
    Ok(())
}

/// -1/n̄ + Σ_k i_k a^{k+1} as F_q coefficients, low degree first, trimmed.
pub fn build_indicator_poly(fq: &Fq, i: u64, l: usize, nbar: u32) -> Result<Vec<u32>> {
    if i == 0 || i >= (fq.q as u64).pow(l as u32) {
        return domain(format!("index {i} must lie in 1..q^l - 1"));
    }
    if nbar % fq.p == 0 {
        return domain("n̄ must be prime to p");
    }
    let mut poly = vec![fq.neg(fq.inv(nbar % fq.p)?)];
    poly.extend(digits(i, fq.q as u64, l));
    while poly.last() == Some(&0) {
        poly.pop();
    }
    Ok(poly)
}

/// Representatives of F_q^× / F_p^×: the least element of each coset.
pub fn coset_reps(fq: &Fq) -> Vec<u32> {
    (1..fq.q)
        .filter(|&a| (2..fq.p).all(|c| fq.mul(c, a) > a))
        .collect()
}

/// Histogram over a ∈ F_{q^m} of (T_1(a), T_1(a^2), .., T_1(a^l)), indexed by [`trace_index`].
pub fn power_trace_histogram(t: &Tower, l: usize) -> Result<Vec<u64>> {
    let mut h = vec![0u64; (t.q as usize).pow(l as u32)];
    t.for_each_orbit(|a, size| {
        let mut pw = 1u32;
        let mut v = Vec::with_capacity(l);
        for _ in 0..l {
            pw = t.mul(pw, a);
            v.push(t.trace(pw));
        }
        h[trace_index(&v, t.q)] += size as u64;
    })?;
    Ok(h)
}

/// One Artin-Schreier curve y^p - y = α·P_i(a) with its Frobenius polynomial.
#[derive(Clone, Debug)]
pub struct CurveRecord {
    pub index: u64,
    pub alpha: u32,
    pub degree: usize,
    pub frobenius: FrobeniusPoly,
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub set: FormulaSet,
    pub curves: Vec<CurveRecord>,
}

impl Derivation {
    /// Total number of Frobenius roots over all curves, with multiplicity.
    pub fn root_count(&self) -> usize {
        self.curves.iter().map(|c| c.frobenius.coeffs.len() - 1).sum()
    }
}

/// Coefficient of R_i (the summed ρ_n over the cosets of index i) in q^l F(n, t), where j = newton_forward(t).
pub fn index_weight(fq: &Fq, i: usize, j: usize, l: usize) -> i64 {
    if i == 0 {
        return 0;
    }
    if j == 0 {
        return 1;
    }
    match dot(fq, i, j, l) {
        1 => -1,
        0 => 1,
        _ => 0,
    }
}

/// Closed-form counts for all q^l trace vectors with n ≡ n̄ (mod p).
pub fn derive_formula_set(q: u32, l: usize, nbar: u32) -> Result<Derivation> {
    let (p, r) = crate::ff_core::prime_power(q)?;
    let fq = Fq::new(p, r)?;
    check_params(&fq, l, nbar)?;
    let size = (q as usize).pow(l as u32);
    let gmax = genus_as(p, l)?;
    let hists: Vec<Vec<u64>> = (1..=gmax as u32 + 2)
        .map(|m| Tower::get(p, r, m).and_then(|t| power_trace_histogram(&t, l)))
        .collect::<Result<_>>()?;
    let alphas = coset_reps(&fq);
    let ninv = fq.inv(nbar)?;
    let jobs: Vec<(u64, u32)> =
        (1..size as u64).flat_map(|i| alphas.iter().map(move |&a| (i, a))).collect();
    let curves: Vec<CurveRecord> = jobs
        .par_iter()
        .map(|&(i, alpha)| {
            let poly = build_indicator_poly(&fq, i, l, nbar)?;
            let degree = poly.len() - 1;
            let g = genus_as(p, degree)?;
            let iv = digits(i, q as u64, l);
            let mut sums = Vec::with_capacity(g + 2);
            for m in 1..=g + 2 {
                // T_rel(P_i(a)) over F_{q^m} is -m/n̄ + i·f
                let c = fq.neg(fq.mul(fq.from_i64(m as i64), ninv));
                let mut zeros = 0u64;
                for (v, &cnt) in hists[m - 1].iter().enumerate() {
                    if cnt == 0 {
                        continue;
                    }
                    let f = digits(v as u64, q as u64, l);
                    let mut s = c;
                    for k in 0..l {
                        s = fq.add(s, fq.mul(iv[k], f[k]));
                    }
                    if fq.abs_trace(fq.mul(alpha, s)) == 0 {
                        zeros += cnt;
                    }
                }
                let affine = BigInt::from(zeros) * p;
                sums.push(BigInt::from(q).pow(m as u32) - affine);
            }
            let frobenius = charpoly_from_sums(q as u64, g, &sums)?;
            Ok(CurveRecord { index: i, alpha, degree, frobenius })
        })
        .collect::<Result<_>>()?;

    let mut by_index: HashMap<u64, Vec<&CurveRecord>> = HashMap::new();
    for c in &curves {
        by_index.entry(c.index).or_default().push(c);
    }
    let validity = Validity { modulus: p as u64, classes: vec![nbar as u64], min_n: 1 };
    let mut formulas = Vec::with_capacity(size);
    for tix in 0..size {
        let t = digits(tix as u64, q as u64, l);
        let j = trace_index(&newton_forward(&t, &fq)?, q);
        let mut terms = Vec::new();
        for i in 1..size {
            let w = index_weight(&fq, i, j, l);
            if w == 0 {
                continue;
            }
            for c in &by_index[&(i as u64)] {
                if c.degree > 1 {
                    terms.push(Term { coef: BigRational::from_integer(w.into()), poly: c.frobenius.coeffs.clone() });
                }
            }
        }
        formulas.push(CountFormula::new(q as u64, l as u32, validity.clone(), terms)?);
    }
    let set = FormulaSet { q: q as u64, p: p as u64, r, l, nbar: nbar as u64, formulas };
    Ok(Derivation { set, curves })
}

/// a_k^q - a_k = a^k - t'_k/n̄ (k = 1..l) with t' = newton_forward(t); count / q^l = F_q(n, t).
pub fn build_direct_system(q: u32, l: usize, t: &[u32], nbar: u32) -> Result<ASSystem> {
    let (p, r) = crate::ff_core::prime_power(q)?;
    let fq = Fq::new(p, r)?;
    if t.len() != l {
        return domain(format!("trace vector has {} entries, expected {l}", t.len()));
    }
    let tp = newton_forward(t, &fq)?;
    let zero = tp.iter().all(|&x| x == 0);
    // the n̄ shift is only needed for nonzero targets
    let ninv = if zero { 0 } else {
        check_params(&fq, l, nbar)?;
        fq.inv(nbar)?
    };
    let mut vars = vec!["a".to_string()];
    let mut equations = Vec::new();
    for k in 1..=l {
        vars.push(format!("a{k}"));
        let mut mono = vec![0u32; l + 1];
        mono[0] = k as u32;
        let mut terms = vec![(1u32, mono)];
        let c = fq.mul(tp[k - 1], ninv);
        if c != 0 {
            terms.push((fq.neg(c), vec![0u32; l + 1]));
        }
        equations.push(ASEquation { var: k, e: q, g: Compiled { terms } });
    }
    Ok(ASSystem { p, r, vars, equations, s: l as u32 })
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checked: usize,
    /// (n, t, formula value, oracle value)
    pub mismatches: Vec<(u32, Vec<u32>, String, u64)>,
    pub skipped: Vec<(u32, String)>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty() && self.skipped.is_empty() && self.checked > 0
    }
}

/// Compare every formula of the set against the brute-force table at each n.
pub fn verify_formula_set(fs: &FormulaSet, ns: &[u32]) -> VerifyReport {
    let mut rep = VerifyReport::default();
    for &n in ns {
        let table = Tower::get(fs.p as u32, fs.r, n).and_then(|t| count_all_F_brute(&t, fs.l));
        let table = match table {
            Ok(tb) => tb,
            Err(e) => {
                rep.skipped.push((n, e.to_string()));
                continue;
            }
        };
        for (ix, f) in fs.formulas.iter().enumerate() {
            let t = digits(ix as u64, fs.q, fs.l);
            rep.checked += 1;
            match f.eval(n as u64) {
                Ok(v) if v == BigInt::from(table[ix]) => {}
                Ok(v) => rep.mismatches.push((n, t, v.to_string(), table[ix])),
                Err(e) => rep.mismatches.push((n, t, e.to_string(), table[ix])),
            }
        }
    }
    rep
}

/// Inverse of the Newton map on a whole index: the trace vector whose power traces are `pv`.
pub fn traces_from_power_traces(pv: &[u32], fq: &Fq) -> Result<Vec<u32>> {
    newton_inverse(pv, fq)
}
