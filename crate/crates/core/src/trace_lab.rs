//! Trace functions T_l, characteristic polynomials, Newton's identities,
//! binomials mod p and the degree-lowered trace identities in
//! characteristics 2 and 3.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use crate::error::{domain, Error, Result};
use crate::expr::Expr;
use crate::ff_core::{Fq, Tower};

/// (T_1(a), ..., T_l(a)) as F_q codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceVector {
    pub values: Vec<u32>,
}

impl TraceVector {
    pub fn l(&self) -> usize {
        self.values.len()
    }
}

/// Prescribed values at some trace positions (1-based); missing positions are free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceSpec {
    pub entries: BTreeMap<usize, u32>,
}

impl TraceSpec {
    /// All of t_1..t_l prescribed.
    pub fn full(t: &[u32]) -> Self {
        Self { entries: t.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect() }
    }
    pub fn from_options(t: &[Option<u32>]) -> Self {
        Self { entries: t.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i + 1, v))).collect() }
    }
    /// Comma separated values with `*` for a free position, e.g. `1,0,*,1`.
    pub fn parse(s: &str, q: u32) -> Result<Self> {
        let mut v = Vec::new();
        let mut pos = 0usize;
        for part in s.split(',') {
            let p = part.trim();
            if p == "*" {
                v.push(None);
            } else {
                let x: u32 = p.parse().map_err(|_| Error::Parse { pos, msg: format!("bad trace value {p:?}") })?;
                if x >= q {
                    return domain(format!("trace value {x} is not in F_{q}"));
                }
                v.push(Some(x));
            }
            pos += part.len() + 1;
        }
        Ok(Self::from_options(&v))
    }
    /// Largest prescribed position (0 if empty).
    pub fn max_position(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }
    pub fn is_full(&self) -> bool {
        self.entries.len() == self.max_position()
    }
    pub fn positions(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }
    /// Prescribed values in position order.
    pub fn values(&self) -> Vec<u32> {
        self.entries.values().copied().collect()
    }
    /// Whether a full trace vector T_1..T_L (L ≥ max position) satisfies the spec.
    pub fn matches(&self, t: &[u32]) -> bool {
        self.entries.iter().all(|(&k, &v)| t.get(k - 1).copied().unwrap_or(0) == v)
    }
}

impl std::fmt::Display for TraceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = (1..=self.max_position())
            .map(|k| self.entries.get(&k).map(|v| v.to_string()).unwrap_or_else(|| "*".into()))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Product of (x - a^{q^i}) over i < n, low degree first, coefficients in F_q.
pub fn char_poly(t: &Tower, a: u32) -> Vec<u32> {
    let n = t.n as usize;
    let mut c = vec![0u32; n + 1];
    c[0] = 1;
    let mut conj = a;
    for i in 0..n {
        // multiply by (x - conj)
        let m = t.neg(conj);
        for k in (0..=i + 1).rev() {
            let hi = if k > 0 { c[k - 1] } else { 0 };
            c[k] = t.add(hi, t.mul(m, c[k]));
        }
        conj = t.pow(conj, t.q as u64);
    }
    debug_assert!(c.iter().all(|&x| x < t.q));
    c
}

/// T_1..T_l via elementary symmetric functions of the conjugates; T_k = 0 for k > n.
pub fn trace_vector(t: &Tower, a: u32, l: usize) -> TraceVector {
    let mut e = vec![0u32; l + 1];
    e[0] = 1;
    let mut conj = a;
    for _ in 0..t.n {
        for k in (1..=l).rev() {
            e[k] = t.add(e[k], t.mul(conj, e[k - 1]));
        }
        conj = t.pow(conj, t.q as u64);
    }
    TraceVector { values: e[1..].to_vec() }
}

/// T_1(a^k).
pub fn power_trace(t: &Tower, a: u32, k: u64) -> u32 {
    t.trace(t.pow(a, k))
}

fn check_newton(l: usize, fq: &Fq) -> Result<()> {
    if l >= fq.p as usize {
        return domain(format!("Newton change of variable needs l < p (l={l}, p={})", fq.p));
    }
    Ok(())
}

/// Power sums p_k(t_1..t_k) from elementary symmetric values.
pub fn newton_forward(tv: &[u32], fq: &Fq) -> Result<Vec<u32>> {
    check_newton(tv.len(), fq)?;
    Ok(newton_forward_unchecked(tv, fq))
}

pub(crate) fn newton_forward_unchecked(tv: &[u32], fq: &Fq) -> Vec<u32> {
    // p_k = (-1)^{k-1} k t_k + sum_{j<k} (-1)^{k-1+j} t_{k-j} p_j
    let mut p: Vec<u32> = Vec::with_capacity(tv.len());
    for k in 1..=tv.len() {
        let mut s = fq.mul(fq.from_i64(k as i64), tv[k - 1]);
        for j in 1..k {
            let term = fq.mul(tv[k - j - 1], p[j - 1]);
            s = if j % 2 == 1 { fq.sub(s, term) } else { fq.add(s, term) };
        }
        if k % 2 == 0 {
            s = fq.neg(s);
        }
        p.push(s);
    }
    p
}

/// Inverse of [`newton_forward`].
pub fn newton_inverse(pv: &[u32], fq: &Fq) -> Result<Vec<u32>> {
    check_newton(pv.len(), fq)?;
    let mut tv: Vec<u32> = Vec::with_capacity(pv.len());
    for k in 1..=pv.len() {
        // k t_k = (-1)^{k-1} p_k + sum_{j<k} (-1)^{j-1} t_{k-j} p_j
        let mut s = if k % 2 == 1 { pv[k - 1] } else { fq.neg(pv[k - 1]) };
        for j in 1..k {
            let term = fq.mul(tv[k - j - 1], pv[j - 1]);
            s = if j % 2 == 1 { fq.add(s, term) } else { fq.sub(s, term) };
        }
        tv.push(fq.mul(s, fq.inv(fq.from_i64(k as i64))?));
    }
    Ok(tv)
}

/// binom(n, k) mod p by Lucas' theorem.
pub fn binom_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut res = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        res = res * small_binom_mod(nd, kd, p) % p;
        n /= p;
        k /= p;
    }
    res % p
}

fn small_binom_mod(n: u64, k: u64, p: u64) -> u64 {
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * crate::ff_core::mod_pow(den, p - 2, p) % p
}

/// Period in n of (binom(n,j), ..., binom(n,1)) mod p.
pub fn binom_period(j: u64, p: u64) -> u64 {
    let mut e = 0u32;
    let mut x = j;
    while x >= p {
        x /= p;
        e += 1;
    }
    p.pow(1 + e)
}

/// Which substitution list an identity uses for its auxiliary variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Param {
    /// a_0 = a_1²+a_1+r_1, a_0³ = a_2²+a_2+r_2, a_0⁵ = a_3²+a_3+r_3.
    Primary,
    /// a_0³+a_0 = a_1²+a_1+r_1, a_0⁵+a_0 = a_2²+a_2+r_2 (l = 4, 5 only).
    Alternative,
}

/// Right-hand sides w_k with a_0 ↦ w_k = a_k² + a_k + r_k under each parameterisation.
pub fn char2_substitutions(param: Param) -> &'static [&'static str] {
    match param {
        Param::Primary => &["a0", "a0^3", "a0^5"],
        Param::Alternative => &["a0^3 + a0", "a0^5 + a0"],
    }
}

/// Linearised argument of T_1 equal to T_l(a_0² + a_0 + r_0) for odd n.
/// Variables a0..a3, r0..r3, and Bk = binom(n, k) mod 2.
pub fn char2_template(l: usize, param: Param) -> Result<&'static str> {
    Ok(match (l, param) {
        (1, _) => "r0",
        (2, _) => "a0^3 + a0 + r0*B2",
        (3, _) => "a0^5 + a0 + r0*(a0^3 + a0 + B3)",
        (4, Param::Primary) => {
            "a2^3 + a2 + a1^3 + a1 + a0^7 + a0^5 + (r0 + 1)*(r1 + r2)*B2 + r0*r1 + r0*r2 + r1*r2 + r2 + r0*B4"
        }
        (4, Param::Alternative) => {
            "a1^3 + a1 + a0^7 + a0^5 + a0^3 + a0 + r0*(a0^3 + a0 + (a0^3 + a0)*B2 + B4) + r1*B2"
        }
        (5, Param::Primary) => {
            "r0*(a2^3 + a2 + a1^3 + a1) + a0^9 + r0*a0^7 + (r1 + r2)*a0^5 + r1 + r2 + r1*r2 + r0*r1*r2 \
             + (r0*a0^5 + r0*r2)*B2 + (r0*r1 + r0*r2)*B3 + r0*B5"
        }
        (5, Param::Alternative) => {
            "a1^2*a2 + a1*a2^2 + a0^9 + a0 + r0*(a1^3 + a1 + a0^7 + a0 + (a0^5 + a0 + r1)*B2 + (a0^3 + a0)*B3 + B5)"
        }
        (6, Param::Primary) => {
            "a3^3 + a3 + (r1 + r2)*(a2^3 + a2 + a1^3 + a1 + a0^7) + a1^5 + a1^3 + a0^11 + a0^7 \
             + r0*r1 + r0*r2 + r1*r2 + r2*r3 \
             + (r0*(a2^3 + a2 + a1^3 + a1 + a0^7 + r1 + r2 + r1*r2 + 1) + r1 + r2 + r3)*B2 \
             + (r0 + r0*r1 + r0*r3 + r1)*B3 + r0*(r1 + r2)*B4 + r0*B6"
        }
        (7, Param::Primary) => {
            "r0*(a3^3 + a3) + (r0*r1 + r0*r2 + r1 + r3 + r0*B3)*(a2^3 + a2) + r0*(a1^5 + a1^3) \
             + (r0*r1 + r0*r2 + r1 + r3 + r0*B3)*(a1^3 + a1) + a0^13 + (r0 + 1)*a0^11 \
             + (r1 + r2 + 1 + r0*B2)*a0^9 + (r0 + r1 + r3 + r0*r1 + r0*r2 + r0*B3)*a0^7 \
             + r1 + r0*r2 + r0*r3 + r1*r2 + r1*r3 + r2*r3 + r0*r1*r2 + r0*r2*r3 + r1*r2*r3 \
             + (r1 + r0*r3 + r1*r2 + r1*r3 + r2*r3 + r0*r1*r2 + r0*r1*r3 + r0*r2*r3)*B2 \
             + (r0*r1 + r0*r1*r2)*B3 + (r0*r1 + r0*r2)*B2*B3 + (r0*r1 + r0*r3)*B4 \
             + (r0*r1 + r0*r2)*B5 + r0*B7"
        }
        (l, Param::Alternative) if (6..=7).contains(&l) => {
            return domain(format!("no alternative parameterisation for l = {l}"))
        }
        (l, _) => return domain(format!("lowered char-2 identities exist for l = 1..7, got {l}")),
    })
}

/// Parsed template, cached.
pub fn char2_expr(l: usize, param: Param) -> Result<&'static Expr> {
    static CACHE: OnceLock<HashMap<(usize, bool), Expr>> = OnceLock::new();
    let map = CACHE.get_or_init(|| {
        let mut m = HashMap::new();
        for l in 1..=7 {
            for (alt, p) in [(false, Param::Primary), (true, Param::Alternative)] {
                if let Ok(s) = char2_template(l, p) {
                    m.insert((l, alt), Expr::parse(s).expect("template parses"));
                }
            }
        }
        m
    });
    let key = (l, param == Param::Alternative);
    char2_template(l, param)?;
    Ok(&map[&key])
}

/// Values B_1..B_7 = binom(n, k) mod 2 as named constants.
pub fn char2_binomials(n: u64) -> HashMap<String, i64> {
    (1..=7).map(|k| (format!("B{k}"), binom_mod_p(n, k, 2) as i64)).collect()
}

/// Auxiliary variables for the lowered identities: `a[k-1]` is a_k, `r[k-1]` is r_k.
#[derive(Clone, Debug, Default)]
pub struct Char2Aux {
    pub a: Vec<u32>,
    pub r: Vec<u32>,
}

impl Char2Aux {
    /// A valid auxiliary assignment for a_0 in F_{2^n}, n odd; `choice` bit k picks the root for a_{k+1}.
    pub fn solve(t: &Tower, a0: u32, param: Param, choice: u32) -> Result<Self> {
        if t.q != 2 || t.n % 2 == 0 {
            return domain("auxiliary substitution needs F_{2^n} with n odd");
        }
        let mut aux = Char2Aux::default();
        for (k, w) in char2_substitutions(param).iter().enumerate() {
            let c = Expr::parse(w)?.compile(&["a0"], &t.fq)?.eval(t, &[a0]);
            let r = t.trace(c);
            let y = t.as_solve(t.add(c, r), 2);
            debug_assert_ne!(y, crate::ff_core::NO_SOLUTION);
            aux.a.push(if choice >> k & 1 == 1 { t.add(y, 1) } else { y });
            aux.r.push(r);
        }
        Ok(aux)
    }
}

/// The linearised value of T_l(a_0² + a_0 + r_0) over F_{2^n}, n odd.
pub fn lowered_trace_char2(t: &Tower, l: usize, a0: u32, r0: u32, aux: &Char2Aux, param: Param) -> Result<u32> {
    if t.q != 2 {
        return domain("characteristic-2 identity needs q = 2");
    }
    if l >= 2 && t.n % 2 == 0 {
        return domain("lowered identities need n odd");
    }
    let e = char2_expr(l, param)?;
    let mut consts = char2_binomials(t.n as u64);
    consts.insert("r0".into(), (r0 & 1) as i64);
    for (k, &r) in aux.r.iter().enumerate() {
        consts.insert(format!("r{}", k + 1), r as i64);
    }
    let spec = e.substitute(&consts);
    let mut vars = vec!["a0".to_string()];
    let mut vals = vec![a0];
    for (k, &a) in aux.a.iter().enumerate() {
        vars.push(format!("a{}", k + 1));
        vals.push(a);
    }
    let vr: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let c = spec.compile(&vr, &t.fq)?;
    Ok(t.trace(c.eval(t, &vals)))
}

/// Linearised argument of T_1 equal to T_l(a_0³ - a_0 + r_0) over F_{3^n}, 3 ∤ n.
/// Constants: C2 = binom(n,2)/n, C3 = binom(n,3)/n, N1 = n + 1, all mod 3.
pub fn char3_template(l: usize) -> Result<&'static str> {
    Ok(match l {
        1 => "r0",
        2 => "a0^4 - a0^2 + r0^2*C2",
        3 => "a0^5 - a0^7 + r0*N1*(a0^4 - a0^2) + r0*C3",
        _ => return domain(format!("lowered char-3 identities exist for l = 1..3, got {l}")),
    })
}

/// C2, C3, N1 for the char-3 templates.
pub fn char3_constants(n: u64) -> Result<HashMap<String, i64>> {
    if n % 3 == 0 {
        return domain("char-3 identities need n coprime to 3");
    }
    // n ≡ ±1 mod 3 is its own inverse
    let ninv = n % 3;
    Ok(HashMap::from([
        ("C2".to_string(), (binom_mod_p(n, 2, 3) * ninv % 3) as i64),
        ("C3".to_string(), (binom_mod_p(n, 3, 3) * ninv % 3) as i64),
        ("N1".to_string(), ((n + 1) % 3) as i64),
    ]))
}

/// The linearised value of T_l(a_0³ - a_0 + r_0) over F_{3^n}.
pub fn lowered_trace_char3(t: &Tower, l: usize, a0: u32, r0: u32) -> Result<u32> {
    if t.q != 3 {
        return domain("characteristic-3 identity needs q = 3");
    }
    let e = Expr::parse(char3_template(l)?)?;
    let mut consts = if r0 == 0 && l >= 2 {
        // the 1/n factors only appear multiplied by r_0
        HashMap::from([("C2".into(), 0), ("C3".into(), 0), ("N1".into(), 0)])
    } else {
        char3_constants(t.n as u64)?
    };
    consts.insert("r0".into(), r0 as i64);
    let c = e.substitute(&consts).compile(&["a0"], &t.fq)?;
    Ok(t.trace(c.eval(t, &[a0])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn esym_direct(t: &Tower, a: u32, l: usize) -> Vec<u32> {
        // sum over l-subsets of conjugates
        let n = t.n as usize;
        let conj: Vec<u32> = (0..n).map(|i| t.frobenius(a, i as u64)).collect();
        let mut out = vec![0u32; l];
        for mask in 0u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k == 0 || k > l {
                continue;
            }
            let mut prod = 1u32;
            for (i, &c) in conj.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    prod = t.mul(prod, c);
                }
            }
            out[k - 1] = t.add(out[k - 1], prod);
        }
        out
    }

    #[test]
    fn trace_vector_matches_subset_sums() {
        for (q, n) in [(2, 5), (3, 4), (4, 3), (5, 3), (9, 2)] {
            let t = Tower::for_q(q, n).unwrap();
            for a in 0..t.size {
                let l = n as usize + 1;
                let mut want = esym_direct(&t, a, l);
                want[l - 1] = 0;
                assert_eq!(trace_vector(&t, a, l).values, want, "q={q} n={n} a={a}");
            }
        }
    }

    #[test]
    fn char_poly_examples() {
        let t = Tower::get(2, 1, 3).unwrap();
        // the modulus is x^3+x+1, whose root is the element x
        assert_eq!(t.modulus_qn, vec![1, 1, 0, 1]);
        assert_eq!(char_poly(&t, 2), vec![1, 1, 0, 1]);
        assert_eq!(char_poly(&t, 0), vec![0, 0, 0, 1]);
        assert!((1..8).all(|a| trace_vector(&t, a, 3).values[2] == 1));
        assert_eq!(power_trace(&t, 2, 2), power_trace(&t, 2, 1));
        assert_eq!(power_trace(&t, 2, 1), 0);
        let t4 = Tower::get(2, 1, 4).unwrap();
        assert_eq!(trace_vector(&t4, 1, 4).values, vec![0, 0, 0, 1]);
        // sign convention: coefficient of x^{n-l} is (-1)^l T_l
        let t5 = Tower::get(5, 1, 3).unwrap();
        for a in [1, 7, 33, 124] {
            let cp = char_poly(&t5, a);
            let tv = trace_vector(&t5, a, 3).values;
            for l in 1..=3 {
                let c = cp[3 - l];
                let want = if l % 2 == 1 { t5.fq.neg(tv[l - 1]) } else { tv[l - 1] };
                assert_eq!(c, want);
            }
        }
    }

    #[test]
    fn newton_examples_and_roundtrip() {
        let f5 = Fq::prime(5).unwrap();
        assert_eq!(newton_forward(&[2, 0, 0], &f5).unwrap(), vec![2, 4, 3]);
        assert_eq!(newton_inverse(&[0, 0, 0, 0], &f5).unwrap(), vec![0; 4]);
        let t = newton_inverse(&[1, 0, 0, 0], &f5).unwrap();
        assert_eq!(&t[..2], &[1, 3]);
        assert_eq!(newton_forward(&t, &f5).unwrap(), vec![1, 0, 0, 0]);
        // p3 = 3t3 + t1^3 - 3 t1 t2
        let f7 = Fq::prime(7).unwrap();
        let (a, b, c) = (3u32, 5u32, 6u32);
        let want = (3 * c as i64 + (a as i64).pow(3) - 3 * (a * b) as i64).rem_euclid(7) as u32;
        assert_eq!(newton_forward(&[a, b, c], &f7).unwrap()[2], want);
        for q in [3u32, 5, 7] {
            let f = Fq::new(q, 1).unwrap();
            for l in 1..q as usize {
                if (q as u64).pow(l as u32) > 10_000 {
                    continue;
                }
                for code in 0..(q as u64).pow(l as u32) {
                    let v = crate::ff_core::digits(code, q as u64, l);
                    assert_eq!(newton_inverse(&newton_forward(&v, &f).unwrap(), &f).unwrap(), v);
                }
            }
            assert!(newton_forward(&vec![0; q as usize], &f).is_err());
        }
        let f9 = Fq::new(3, 2).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for _ in 0..200 {
            let v: Vec<u32> = (0..2).map(|_| rng.gen_range(0..9)).collect();
            assert_eq!(newton_inverse(&newton_forward(&v, &f9).unwrap(), &f9).unwrap(), v);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binom_period(3, 2), 4);
        assert_eq!(binom_period(1, 2), 2);
        assert_eq!(binom_period(3, 3), 9);
        assert_eq!(binom_mod_p(5, 3, 3), 1);
        for n in [3u64, 7, 11, 15] {
            assert_eq!((1..=3).map(|k| binom_mod_p(n, k, 2)).collect::<Vec<_>>(), vec![1, 1, 1]);
        }
        for p in [2u64, 3, 5, 7] {
            let mut row = vec![1u64];
            for n in 0..=200u64 {
                for (k, &v) in row.iter().enumerate() {
                    assert_eq!(binom_mod_p(n, k as u64, p), v, "n={n} k={k} p={p}");
                }
                let mut next = vec![1u64; row.len() + 1];
                for k in 1..row.len() {
                    next[k] = (row[k - 1] + row[k]) % p;
                }
                row = next;
            }
            for j in 1..=7u64 {
                let per = binom_period(j, p);
                for n in 0..200u64 {
                    for k in 1..=j {
                        assert_eq!(binom_mod_p(n, k, p), binom_mod_p(n + per, k, p));
                    }
                }
            }
        }
    }

    #[test]
    fn trace_spec_roundtrip() {
        let s = TraceSpec::parse("1,0,*,1", 2).unwrap();
        assert_eq!(s.positions(), vec![1, 2, 4]);
        assert_eq!(s.to_string(), "1,0,*,1");
        assert!(!s.is_full());
        assert!(s.matches(&[1, 0, 1, 1]));
        assert!(!s.matches(&[1, 1, 1, 1]));
        assert!(TraceSpec::parse("2", 2).is_err());
    }

    #[test]
    fn lowered_char2_pointwise() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in (3..=15u32).step_by(2) {
            let t = Tower::get(2, 1, n).unwrap();
            for l in 1..=7usize {
                let params: &[Param] = if l == 4 || l == 5 { &[Param::Primary, Param::Alternative] } else { &[Param::Primary] };
                for &param in params {
                    for _ in 0..1000 {
                        let a0 = rng.gen_range(0..t.size);
                        let r0 = rng.gen_range(0..2);
                        let aux = Char2Aux::solve(&t, a0, param, rng.gen()).unwrap();
                        let a = t.add(t.add(t.mul(a0, a0), a0), r0);
                        let direct = trace_vector(&t, a, l).values[l - 1];
                        let low = lowered_trace_char2(&t, l, a0, r0, &aux, param).unwrap();
                        assert_eq!(low, direct, "n={n} l={l} {param:?} a0={a0} r0={r0}");
                    }
                }
            }
        }
    }

    #[test]
    fn lowered_char2_errors() {
        let t = Tower::get(2, 1, 5).unwrap();
        let aux = Char2Aux::solve(&t, 3, Param::Primary, 0).unwrap();
        assert!(lowered_trace_char2(&t, 8, 3, 0, &aux, Param::Primary).is_err());
        assert!(lowered_trace_char2(&t, 6, 3, 0, &aux, Param::Alternative).is_err());
        let short = Char2Aux { a: vec![1], r: vec![0] };
        assert!(lowered_trace_char2(&t, 4, 3, 0, &short, Param::Primary).is_err());
        assert_eq!(lowered_trace_char2(&t, 3, 0, 0, &Char2Aux::solve(&t, 0, Param::Primary, 0).unwrap(), Param::Primary), Ok(0));
    }

    #[test]
    fn lowered_char3_pointwise() {
        for n in [4u32, 5, 7, 8] {
            let t = Tower::get(3, 1, n).unwrap();
            for a0 in 0..t.size {
                for r0 in 0..3 {
                    let a = t.add(t.sub(t.pow(a0, 3), a0), r0);
                    let tv = trace_vector(&t, a, 3).values;
                    for l in 1..=3 {
                        assert_eq!(lowered_trace_char3(&t, l, a0, r0).unwrap(), tv[l - 1], "n={n} l={l} a0={a0} r0={r0}");
                    }
                }
            }
        }
        let t6 = Tower::get(3, 1, 6).unwrap();
        assert!(lowered_trace_char3(&t6, 2, 5, 1).is_err());
        assert_eq!(lowered_trace_char3(&t6, 3, 0, 0), Ok(0));
    }
}
