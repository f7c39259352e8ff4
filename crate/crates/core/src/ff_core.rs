//! Finite field arithmetic for the tower F_p ⊂ F_q ⊂ F_{q^n}.
//!
//! Elements of F_q are encoded as integers in `0..q` whose base-p digits are
//! the coefficients of the residue polynomial (constant term least
//! significant). Elements of F_{q^n} are encoded the same way one level up:
//! `index = c_0 + c_1 q + ... + c_{n-1} q^{n-1}` with each `c_j` an F_q code.
//! The zero element is always 0 and F_q sits inside F_{q^n} as `0..q`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{domain, Error, Result};

pub const DEFAULT_BUDGET: u64 = 1 << 28;
/// Largest field that gets log/exp tables.
pub const TABLE_LIMIT: u64 = 1 << 24;

static BUDGET: AtomicU64 = AtomicU64::new(0);

/// Current enumeration budget: explicit override, else `IRRCOUNT_BUDGET`, else 2^28.
pub fn budget() -> u64 {
    let b = BUDGET.load(Ordering::Relaxed);
    if b != 0 {
        return b;
    }
    let b = std::env::var("IRRCOUNT_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_BUDGET);
    BUDGET.store(b, Ordering::Relaxed);
    b
}

pub fn set_budget(b: u64) {
    BUDGET.store(b.max(1), Ordering::Relaxed);
}

thread_local! {
    static LOCAL_BUDGET: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Run `f` with a budget override visible only on the current thread.
pub fn with_budget<T>(b: u64, f: impl FnOnce() -> T) -> T {
    let old = LOCAL_BUDGET.with(|c| c.replace(b.max(1)));
    let out = f();
    LOCAL_BUDGET.with(|c| c.set(old));
    out
}

pub fn check_budget(needed: u128) -> Result<()> {
    let local = LOCAL_BUDGET.with(|c| c.get());
    let b = if local != 0 { local } else { budget() };
    if needed > b as u128 {
        Err(Error::BudgetExceeded { needed, budget: b })
    } else {
        Ok(())
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut v: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    v.sort_unstable();
    v
}

pub fn moebius_mu(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Base-`base` digits of `i`, least significant first, padded to `m`.
pub fn digits(mut i: u64, base: u64, m: usize) -> Vec<u32> {
    let mut d = Vec::with_capacity(m);
    for _ in 0..m {
        d.push((i % base) as u32);
        i /= base;
    }
    d
}

pub fn undigits(d: &[u32], base: u64) -> u64 {
    d.iter().rev().fold(0u64, |acc, &x| acc * base + x as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Result<Self> {
        if p > (1 << 20) || !is_prime(p as u64) {
            return domain(format!("{p} is not an accepted prime"));
        }
        Ok(Self { p })
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - b as u64) % self.p as u64) as u32
    }
    pub fn neg(&self, a: u32) -> u32 {
        (self.p - a % self.p) % self.p
    }
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }
    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a as u64 % self.p as u64;
        let mut acc = 1u64 % self.p as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p as u64;
            }
            base = base * base % self.p as u64;
            e >>= 1;
        }
        acc as u32
    }
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a % self.p == 0 {
            return domain("inverse of zero");
        }
        Ok(self.pow(a, self.p as u64 - 2))
    }
    /// Reduce a signed integer into F_p.
    pub fn from_i64(&self, k: i64) -> u32 {
        k.rem_euclid(self.p as i64) as u32
    }
}

/// F_q = F_p[y]/(m(y)) with m the least monic irreducible of degree r.
#[derive(Clone, Debug)]
pub struct Fq {
    pub fp: PrimeField,
    pub p: u32,
    pub r: u32,
    pub q: u32,
    /// Monic modulus over F_p, low degree first (empty when r = 1).
    pub modulus: Vec<u32>,
    mul_t: Vec<u32>,
    inv_t: Vec<u32>,
    abs_tr: Vec<u32>,
}

impl Fq {
    pub fn new(p: u32, r: u32) -> Result<Self> {
        let fp = PrimeField::new(p)?;
        if r == 0 {
            return domain("extension degree must be positive");
        }
        let q64 = (p as u64).checked_pow(r).unwrap_or(u64::MAX);
        if r > 1 && q64 > 4096 {
            return domain(format!("F_{{{p}^{r}}} too large for table arithmetic"));
        }
        let q = q64 as u32;
        let mut f = Fq { fp, p, r, q, modulus: Vec::new(), mul_t: Vec::new(), inv_t: Vec::new(), abs_tr: Vec::new() };
        if r > 1 {
            let prime = Fq::new(p, 1)?;
            f.modulus = find_irreducible(&prime, r as usize);
            let qs = q as usize;
            let mut mul_t = vec![0u32; qs * qs];
            for a in 0..q {
                let av = digits(a as u64, p as u64, r as usize);
                for b in a..q {
                    let bv = digits(b as u64, p as u64, r as usize);
                    let prod = poly_rem(&prime, &poly_mul(&prime, &av, &bv), &f.modulus);
                    let mut pv = prod;
                    pv.resize(r as usize, 0);
                    let c = undigits(&pv, p as u64) as u32;
                    mul_t[a as usize * qs + b as usize] = c;
                    mul_t[b as usize * qs + a as usize] = c;
                }
            }
            f.mul_t = mul_t;
            let mut inv_t = vec![0u32; qs];
            for a in 1..q {
                for b in 1..q {
                    if f.mul_t[a as usize * qs + b as usize] == 1 {
                        inv_t[a as usize] = b;
                        break;
                    }
                }
            }
            f.inv_t = inv_t;
            // Tr_{q/p}(a) = a + a^p + ... + a^{p^{r-1}}
            let mut abs_tr = vec![0u32; qs];
            for a in 0..q {
                let mut s = 0u32;
                let mut c = a;
                for _ in 0..r {
                    s = f.add(s, c);
                    c = f.pow(c, p as u64);
                }
                debug_assert!(s < p);
                abs_tr[a as usize] = s;
            }
            f.abs_tr = abs_tr;
        }
        Ok(f)
    }

    pub fn prime(p: u32) -> Result<Self> {
        Fq::new(p, 1)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            return self.fp.add(a, b);
        }
        if self.p == 2 {
            return a ^ b;
        }
        digit_add(a, b, self.p, self.r)
    }
    pub fn neg(&self, a: u32) -> u32 {
        if self.r == 1 {
            return self.fp.neg(a);
        }
        if self.p == 2 {
            return a;
        }
        digit_neg(a, self.p, self.r)
    }
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.r == 1 {
            return self.fp.mul(a, b);
        }
        self.mul_t[a as usize * self.q as usize + b as usize]
    }
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return domain("inverse of zero");
        }
        if self.r == 1 {
            return self.fp.inv(a);
        }
        Ok(self.inv_t[a as usize])
    }
    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    /// Absolute trace Tr_{q/p}, an element of F_p.
    pub fn abs_trace(&self, a: u32) -> u32 {
        if self.r == 1 {
            a
        } else {
            self.abs_tr[a as usize]
        }
    }
    /// Image of an integer in the prime subfield.
    pub fn from_i64(&self, k: i64) -> u32 {
        self.fp.from_i64(k)
    }
}

fn digit_add(mut a: u32, mut b: u32, p: u32, len: u32) -> u32 {
    let mut out = 0u32;
    let mut place = 1u32;
    for _ in 0..len {
        let s = a % p + b % p;
        out += if s >= p { s - p } else { s } * place;
        a /= p;
        b /= p;
        place = place.wrapping_mul(p);
    }
    out
}

fn digit_neg(mut a: u32, p: u32, len: u32) -> u32 {
    let mut out = 0u32;
    let mut place = 1u32;
    for _ in 0..len {
        let d = a % p;
        out += if d == 0 { 0 } else { p - d } * place;
        a /= p;
        place = place.wrapping_mul(p);
    }
    out
}

// ---- dense polynomials over F_q, coefficients low degree first ----

pub fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub fn poly_add(f: &Fq, a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    poly_trim(out)
}

pub fn poly_sub(f: &Fq, a: &[u32], b: &[u32]) -> Vec<u32> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| f.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
        .collect();
    poly_trim(out)
}

pub fn poly_mul(f: &Fq, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                out[i + j] = f.add(out[i + j], f.mul(x, y));
            }
        }
    }
    poly_trim(out)
}

/// Quotient and remainder; `m` must have an invertible leading coefficient.
pub fn poly_divrem(f: &Fq, a: &[u32], m: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let m = poly_trim(m.to_vec());
    assert!(!m.is_empty(), "division by zero polynomial");
    let mut r = poly_trim(a.to_vec());
    let dm = m.len() - 1;
    if r.len() < m.len() {
        return (Vec::new(), r);
    }
    let lead_inv = f.inv(m[dm]).expect("nonzero leading coefficient");
    let mut qt = vec![0u32; r.len() - dm];
    while r.len() >= m.len() {
        let k = r.len() - 1 - dm;
        let c = f.mul(r[r.len() - 1], lead_inv);
        qt[k] = c;
        for (i, &mi) in m.iter().enumerate() {
            r[k + i] = f.sub(r[k + i], f.mul(c, mi));
        }
        r = poly_trim(r);
    }
    (poly_trim(qt), r)
}

pub fn poly_rem(f: &Fq, a: &[u32], m: &[u32]) -> Vec<u32> {
    poly_divrem(f, a, m).1
}

pub fn poly_gcd(f: &Fq, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut x = poly_trim(a.to_vec());
    let mut y = poly_trim(b.to_vec());
    while !y.is_empty() {
        let r = poly_rem(f, &x, &y);
        x = y;
        y = r;
    }
    if let Some(&l) = x.last() {
        let li = f.inv(l).expect("nonzero");
        x = x.iter().map(|&c| f.mul(c, li)).collect();
    }
    x
}

pub fn poly_powmod(f: &Fq, a: &[u32], mut e: u64, m: &[u32]) -> Vec<u32> {
    let mut base = poly_rem(f, a, m);
    let mut acc = poly_rem(f, &[1], m);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(f, &poly_mul(f, &acc, &base), m);
        }
        base = poly_rem(f, &poly_mul(f, &base, &base), m);
        e >>= 1;
    }
    acc
}

/// Irreducibility of a monic polynomial over F_q: gcd(x^{q^i} - x, f) = 1 for i ≤ deg/2.
pub fn is_irreducible(f: &Fq, poly: &[u32]) -> bool {
    let poly = poly_trim(poly.to_vec());
    if poly.len() < 2 {
        return false;
    }
    let d = poly.len() - 1;
    if d == 1 {
        return true;
    }
    let x = vec![0u32, 1];
    let mut h = poly_rem(f, &x, &poly);
    for _ in 0..d / 2 {
        h = poly_powmod(f, &h, f.q as u64, &poly);
        let g = poly_gcd(f, &poly_sub(f, &h, &x), &poly);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Least monic irreducible of the given degree, ordered by code
/// `c_0 + c_1 q + ... + c_{d-1} q^{d-1}` of its non-leading coefficients.
pub fn find_irreducible(f: &Fq, degree: usize) -> Vec<u32> {
    assert!(degree >= 1);
    let q = f.q as u64;
    let mut code = 0u64;
    loop {
        let mut poly = digits(code, q, degree);
        poly.push(1);
        if is_irreducible(f, &poly) {
            return poly;
        }
        code += 1;
    }
}

/// The field F_{q^n} with log/exp tables over a primitive element.
pub struct Tower {
    pub fq: Fq,
    pub p: u32,
    pub r: u32,
    pub q: u32,
    pub n: u32,
    /// Monic modulus of F_{q^n} over F_q, low degree first.
    pub modulus_qn: Vec<u32>,
    pub size: u32,
    pub order: u32,
    pub generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    tr: Vec<u32>,
    solve_p: OnceLock<Vec<u32>>,
    solve_q: OnceLock<Vec<u32>>,
}

pub const NO_SOLUTION: u32 = u32::MAX;

static TOWERS: OnceLock<Mutex<HashMap<(u32, u32, u32), Arc<Tower>>>> = OnceLock::new();

impl Tower {
    /// Shared, cached tower for (p, r, n).
    pub fn get(p: u32, r: u32, n: u32) -> Result<Arc<Tower>> {
        let cache = TOWERS.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().unwrap().get(&(p, r, n)) {
            return Ok(t.clone());
        }
        let t = Arc::new(Tower::build(p, r, n)?);
        cache.lock().unwrap().insert((p, r, n), t.clone());
        Ok(t)
    }

    /// Tower for F_q with q given as a prime power.
    pub fn for_q(q: u32, n: u32) -> Result<Arc<Tower>> {
        let (p, r) = prime_power(q)?;
        Tower::get(p, r, n)
    }

    pub fn build(p: u32, r: u32, n: u32) -> Result<Tower> {
        if n == 0 {
            return domain("extension degree must be positive");
        }
        let fq = Fq::new(p, r)?;
        let q = fq.q;
        let size128 = (q as u128).pow(n);
        check_budget(size128)?;
        if size128 > TABLE_LIMIT as u128 {
            return Err(Error::BudgetExceeded { needed: size128, budget: TABLE_LIMIT });
        }
        let size = size128 as u32;
        let order = size - 1;
        let modulus_qn = find_irreducible(&fq, n as usize);
        let nn = n as usize;

        // primitive element search: X + c first, then anything
        let ofac = factorize(order as u64);
        let is_primitive = |g: &[u32]| -> bool {
            if order == 1 {
                return g == [1];
            }
            ofac.iter().all(|&(l, _)| {
                let h = poly_powmod(&fq, g, order as u64 / l, &modulus_qn);
                h != [1]
            })
        };
        let mut gen_poly: Option<Vec<u32>> = None;
        if nn == 1 {
            for c in 1..q {
                if is_primitive(&[c]) {
                    gen_poly = Some(vec![c]);
                    break;
                }
            }
        } else {
            'outer: for deg in 1..nn {
                let count = (q as u64).pow(deg as u32);
                for code in 0..count {
                    let mut g = digits(code, q as u64, deg);
                    g.push(1);
                    if is_primitive(&g) {
                        gen_poly = Some(poly_trim(g));
                        break 'outer;
                    }
                }
            }
        }
        let g = gen_poly.expect("primitive element exists");
        let generator = undigits(&pad(&g, nn), q as u64) as u32;

        let mut exp = vec![0u32; 2 * order as usize + 1];
        let mut log = vec![0u32; size as usize];
        let mut cur = vec![0u32; nn];
        cur[0] = 1;
        let gnz: Vec<(usize, u32)> = g.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i, c)).collect();
        let dg = g.len() - 1;
        let mut buf = vec![0u32; nn + dg];
        for k in 0..order as usize {
            let idx = undigits(&cur, q as u64) as u32;
            exp[k] = idx;
            log[idx as usize] = k as u32;
            // cur <- cur * g mod modulus
            buf.iter_mut().for_each(|x| *x = 0);
            for (i, &ci) in cur.iter().enumerate() {
                if ci == 0 {
                    continue;
                }
                for &(j, gj) in &gnz {
                    buf[i + j] = fq.add(buf[i + j], fq.mul(ci, gj));
                }
            }
            for top in (nn..nn + dg).rev() {
                let c = buf[top];
                if c != 0 {
                    buf[top] = 0;
                    for (i, &mi) in modulus_qn[..nn].iter().enumerate() {
                        if mi != 0 {
                            let pos = top - nn + i;
                            buf[pos] = fq.sub(buf[pos], fq.mul(c, mi));
                        }
                    }
                }
            }
            cur.copy_from_slice(&buf[..nn]);
        }
        for k in order as usize..exp.len() {
            exp[k] = exp[k - order as usize];
        }
        let mut t = Tower {
            p,
            r,
            q,
            n,
            fq,
            modulus_qn,
            size,
            order,
            generator,
            exp,
            log,
            tr: Vec::new(),
            solve_p: OnceLock::new(),
            solve_q: OnceLock::new(),
        };
        // trace table by linearity over the polynomial basis
        let mut basis_tr = Vec::with_capacity(nn);
        let mut xj = 1u32;
        for _ in 0..nn {
            let mut s = 0u32;
            for i in 0..n {
                s = t.add(s, t.frobenius(xj, i as u64));
            }
            assert!(s < q, "trace left the subfield");
            basis_tr.push(s);
            xj = t.mul(xj, if nn > 1 { q } else { 1 });
        }
        let mut tr = vec![0u32; size as usize];
        let mut block = 1usize;
        for j in 0..nn {
            for c in 1..q as usize {
                let shift = fqmul_scalar(&t.fq, c as u32, basis_tr[j]);
                for low in 0..block {
                    tr[c * block + low] = t.fq.add(tr[low], shift);
                }
            }
            block *= q as usize;
        }
        t.tr = tr;
        Ok(t)
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            a ^ b
        } else {
            digit_add(a, b, self.p, self.r * self.n)
        }
    }
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            a
        } else {
            digit_neg(a, self.p, self.r * self.n)
        }
    }
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            a ^ b
        } else {
            digit_add(a, digit_neg(b, self.p, self.r * self.n), self.p, self.r * self.n)
        }
    }
    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }
    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return domain("inverse of zero");
        }
        Ok(self.exp[(self.order - self.log[a as usize]) as usize % self.order as usize])
    }
    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = (self.log[a as usize] as u128 * (e % self.order as u64) as u128) % self.order as u128;
        self.exp[l as usize]
    }
    /// Discrete log to the base `generator` (a ≠ 0).
    #[inline]
    pub fn log(&self, a: u32) -> u32 {
        self.log[a as usize]
    }
    #[inline]
    pub fn exp(&self, k: u64) -> u32 {
        self.exp[(k % self.order as u64) as usize]
    }
    /// a^{q^i}.
    pub fn frobenius(&self, a: u32, i: u64) -> u32 {
        if a == 0 {
            return 0;
        }
        let i = i % self.n as u64;
        let e = mod_pow(self.q as u64, i, self.order as u64);
        self.pow(a, if self.order == 1 { 0 } else { e })
    }
    /// Relative trace Tr_{q^n/q}(a), an F_q code.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        self.tr[a as usize]
    }
    /// Absolute trace Tr_{q^n/p}(a), an F_p value.
    #[inline]
    pub fn abs_trace(&self, a: u32) -> u32 {
        self.fq.abs_trace(self.tr[a as usize])
    }
    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        digits(a as u64, self.q as u64, self.n as usize)
    }
    pub fn from_coeffs(&self, c: &[u32]) -> u32 {
        undigits(&pad(c, self.n as usize), self.q as u64) as u32
    }
    /// All elements in canonical order, subject to the enumeration budget.
    pub fn enumerate_elements(&self) -> Result<std::ops::Range<u32>> {
        check_budget(self.size as u128)?;
        Ok(0..self.size)
    }

    /// One root of y^e - y = c for e ∈ {p, q}, or `NO_SOLUTION`.
    pub fn as_solve(&self, c: u32, e: u32) -> u32 {
        let table = if e == self.p {
            self.solve_p.get_or_init(|| self.build_solve(self.p as u64))
        } else {
            assert_eq!(e, self.q, "exponent must be p or q");
            self.solve_q.get_or_init(|| self.build_solve(self.q as u64))
        };
        table[c as usize]
    }

    fn build_solve(&self, e: u64) -> Vec<u32> {
        let mut t = vec![NO_SOLUTION; self.size as usize];
        for y in 0..self.size {
            let c = self.sub(self.pow(y, e), y);
            if t[c as usize] == NO_SOLUTION {
                t[c as usize] = y;
            }
        }
        t
    }

    /// Least element of the Frobenius orbit of `a`, and the orbit size.
    pub fn orbit_rep(&self, a: u32) -> (u32, u32) {
        if a == 0 {
            return (0, 1);
        }
        let mut best = a;
        let mut c = a;
        for i in 1..=self.n {
            c = self.pow(c, self.q as u64);
            if c == a {
                return (best, i);
            }
            best = best.min(c);
        }
        unreachable!("Frobenius has order dividing n")
    }

    /// Calls `f(a, orbit_size)` once per Frobenius orbit, on its least element.
    pub fn for_each_orbit(&self, mut f: impl FnMut(u32, u32)) -> Result<()> {
        check_budget(self.size as u128)?;
        f(0, 1);
        let order = self.order as u64;
        let q = self.q as u64;
        for a in 1..self.size {
            // work on logs: the orbit of g^L is {g^{L q^i}}
            let l = self.log[a as usize] as u64;
            let mut c = l;
            let mut size = 0u32;
            let mut is_min = true;
            loop {
                c = c * q % order;
                size += 1;
                if c == l {
                    break;
                }
                if self.exp[c as usize] < a {
                    is_min = false;
                    break;
                }
            }
            if is_min {
                f(a, size);
            }
        }
        Ok(())
    }
}

fn fqmul_scalar(f: &Fq, c: u32, t: u32) -> u32 {
    f.mul(c, t)
}

fn pad(v: &[u32], n: usize) -> Vec<u32> {
    let mut w = v.to_vec();
    w.resize(n.max(w.len()), 0);
    w.truncate(n);
    w
}

pub fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut base = (b % m) as u128;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    acc as u64
}

/// Split a prime power q = p^r.
pub fn prime_power(q: u32) -> Result<(u32, u32)> {
    let f = factorize(q as u64);
    if f.len() != 1 {
        return domain(format!("{q} is not a prime power"));
    }
    Ok((f[0].0 as u32, f[0].1))
}
