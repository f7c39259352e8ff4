//! Closed-form count formulas F(n) = (q^n + Σ c_k ρ_n(γ_k)) / q^e with exact
//! evaluation and a canonical JSON encoding.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::artin_schreier::power_sums;
use crate::error::{Error, Result};

/// Residue classes of n mod `modulus` on which a formula holds, from `min_n` on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validity {
    pub modulus: u64,
    pub classes: Vec<u64>,
    pub min_n: u64,
}

impl Validity {
    pub fn all(min_n: u64) -> Self {
        Self { modulus: 1, classes: vec![0], min_n }
    }
    pub fn contains(&self, n: u64) -> bool {
        n >= self.min_n && self.classes.contains(&(n % self.modulus))
    }
    /// The n covered by both.
    pub fn intersect(&self, other: &Validity) -> Validity {
        let modulus = self.modulus.lcm(&other.modulus);
        let classes = (0..modulus)
            .filter(|c| self.classes.contains(&(c % self.modulus)) && other.classes.contains(&(c % other.modulus)))
            .collect();
        Validity { modulus, classes, min_n: self.min_n.max(other.min_n) }
    }
}

/// coefficient · ρ_n(poly), poly monic and high degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coef: BigRational,
    pub poly: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountFormula {
    pub q: u64,
    pub p: u64,
    pub r: u32,
    pub divisor_exp: u32,
    pub validity: Validity,
    pub terms: Vec<Term>,
}

fn poly_key(p: &[BigInt]) -> (usize, Vec<BigInt>) {
    (p.len(), p.to_vec())
}

impl CountFormula {
    pub fn new(q: u64, divisor_exp: u32, validity: Validity, terms: Vec<Term>) -> Result<Self> {
        let (p, r) = crate::ff_core::prime_power(q as u32)?;
        let mut f = Self { q, p: p as u64, r, divisor_exp, validity, terms };
        f.canonicalize();
        Ok(f)
    }

    /// Merge equal polynomials, drop zero terms and sort by degree then coefficients.
    pub fn canonicalize(&mut self) {
        let mut acc: BTreeMap<(usize, Vec<BigInt>), BigRational> = BTreeMap::new();
        for t in self.terms.drain(..) {
            *acc.entry(poly_key(&t.poly)).or_insert_with(BigRational::zero) += t.coef;
        }
        self.terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|((_, poly), coef)| Term { coef, poly })
            .collect();
    }

    /// Sum of two formulas with the same base and divisor (used for wildcard marginals).
    /// The second q^n is carried by the term ρ_n(X - q).
    pub fn add(&self, other: &CountFormula) -> Result<CountFormula> {
        if self.q != other.q || self.divisor_exp != other.divisor_exp {
            return Err(Error::Domain("formulas with different bases or divisors".into()));
        }
        let mut f = self.clone();
        f.validity = self.validity.intersect(&other.validity);
        f.terms.extend(other.terms.iter().cloned());
        f.terms.push(Term { coef: BigRational::one(), poly: vec![BigInt::one(), -BigInt::from(self.q)] });
        f.canonicalize();
        Ok(f)
    }

    /// q^e · F(n) - q^n as an exact rational.
    pub fn fluctuation(&self, n: u64) -> BigRational {
        let mut s = BigRational::zero();
        for t in &self.terms {
            let rho = power_sums(&t.poly, n as usize).pop().unwrap();
            s += &t.coef * BigRational::from_integer(rho);
        }
        s
    }

    /// Exact value at n; the result must be an integer.
    pub fn eval(&self, n: u64) -> Result<BigInt> {
        if !self.validity.contains(n) {
            return Err(Error::Validity(format!(
                "n = {n} is outside the classes {:?} mod {} with n ≥ {}",
                self.validity.classes, self.validity.modulus, self.validity.min_n
            )));
        }
        self.eval_unchecked(n)
    }

    pub fn eval_unchecked(&self, n: u64) -> Result<BigInt> {
        let qn = BigRational::from_integer(num_traits::pow(BigInt::from(self.q), n as usize));
        let num = qn + self.fluctuation(n);
        let v = num / BigRational::from_integer(num_traits::pow(BigInt::from(self.q), self.divisor_exp as usize));
        if !v.is_integer() {
            return Err(Error::NonIntegral(format!("formula value at n = {n} is {v}")));
        }
        Ok(v.to_integer())
    }

    /// Terms whose polynomial fails the q-Weil functional equation (auxiliary factors).
    pub fn auxiliary_terms(&self) -> Vec<&Term> {
        self.terms.iter().filter(|t| !weil_symmetric(&t.poly, self.q)).collect()
    }

    /// Σ |coef| · deg, the constant in |q^e F(n) - q^n| ≤ C q^{n/2}.
    pub fn weil_constant(&self) -> BigRational {
        self.terms.iter().map(|t| t.coef.abs() * BigRational::from_integer(BigInt::from(t.poly.len() - 1))).sum()
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|t| {
                json!({
                    "num": t.coef.numer().to_string(),
                    "den": t.coef.denom().to_string(),
                    "poly": t.poly.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "q": self.q,
            "p": self.p,
            "r": self.r,
            "divisor_exp": self.divisor_exp,
            "validity": {
                "modulus": self.validity.modulus,
                "classes": self.validity.classes,
                "min_n": self.validity.min_n,
            },
            "terms": terms,
        })
    }

    /// Canonical text: sorted keys, no whitespace.
    pub fn serialize(&self) -> String {
        self.to_json().to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(json_err)?;
        Self::from_json(&v)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| perr("formula must be an object"))?;
        let q = get_u64(obj, "q")?;
        let p = get_u64(obj, "p")?;
        let r = get_u64(obj, "r")? as u32;
        let (pp, rr) = crate::ff_core::prime_power(q as u32).map_err(|_| perr("q is not a prime power"))?;
        if pp as u64 != p || rr != r {
            return Err(perr("p and r do not match q"));
        }
        let divisor_exp = get_u64(obj, "divisor_exp")? as u32;
        let val = obj.get("validity").and_then(|x| x.as_object()).ok_or_else(|| perr("missing validity"))?;
        let modulus = get_u64(val, "modulus")?;
        if modulus == 0 {
            return Err(perr("validity modulus must be positive"));
        }
        let classes = val
            .get("classes")
            .and_then(|c| c.as_array())
            .ok_or_else(|| perr("missing validity.classes"))?
            .iter()
            .map(|c| c.as_u64().ok_or_else(|| perr("class must be an integer")))
            .collect::<Result<Vec<_>>>()?;
        let min_n = get_u64(val, "min_n")?;
        let mut terms = Vec::new();
        for (k, t) in obj.get("terms").and_then(|t| t.as_array()).ok_or_else(|| perr("missing terms"))?.iter().enumerate() {
            let to = t.as_object().ok_or_else(|| perr(format!("term {k} must be an object")))?;
            let num = get_big(to, "num", k)?;
            let den = get_big(to, "den", k)?;
            if den.is_zero() {
                return Err(perr(format!("term {k}: zero denominator")));
            }
            let poly = to
                .get("poly")
                .and_then(|p| p.as_array())
                .ok_or_else(|| perr(format!("term {k}: missing poly")))?
                .iter()
                .map(|c| {
                    c.as_str()
                        .and_then(|s| s.parse::<BigInt>().ok())
                        .ok_or_else(|| perr(format!("term {k}: bad coefficient {c}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if poly.first() != Some(&BigInt::one()) {
                return Err(perr(format!("term {k}: polynomial is not monic")));
            }
            terms.push(Term { coef: BigRational::new(num, den), poly });
        }
        let mut f = Self { q, p, r, divisor_exp, validity: Validity { modulus, classes, min_n }, terms };
        f.canonicalize();
        Ok(f)
    }
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse { pos: 0, msg: msg.into() }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Parse { pos: e.column(), msg: format!("line {}: {e}", e.line()) }
}

fn get_u64(obj: &Map<String, Value>, key: &str) -> Result<u64> {
    obj.get(key).and_then(|v| v.as_u64()).ok_or_else(|| perr(format!("missing or invalid {key:?}")))
}

fn get_big(obj: &Map<String, Value>, key: &str, k: usize) -> Result<BigInt> {
    obj.get(key)
        .and_then(|v| v.as_str())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(format!("term {k}: missing or invalid {key:?}")))
}

/// c_{d-k} = q^{d/2-k} c_k for a monic polynomial of even degree d (high first).
pub fn weil_symmetric(poly: &[BigInt], q: u64) -> bool {
    let d = poly.len() - 1;
    d % 2 == 0
        && (0..=d / 2).all(|k| poly[d - k] == num_traits::pow(BigInt::from(q), d / 2 - k) * &poly[k])
}

/// Human-readable polynomial in X.
pub fn poly_to_string(p: &[BigInt]) -> String {
    let d = p.len() - 1;
    let mut s = String::new();
    for (k, c) in p.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = d - k;
        let neg = c.is_negative();
        let a = c.abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mono = match e {
            0 => String::new(),
            1 => "X".into(),
            _ => format!("X^{e}"),
        };
        if e == 0 || !a.is_one() {
            s.push_str(&a.to_string());
            if e > 0 {
                s.push('*');
            }
        }
        s.push_str(&mono);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

impl fmt::Display for CountFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}^n", self.q)?;
        for t in &self.terms {
            let c = &t.coef;
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            if a.is_one() {
                write!(f, " {sign} rho_n({})", poly_to_string(&t.poly))?;
            } else {
                write!(f, " {sign} {a}*rho_n({})", poly_to_string(&t.poly))?;
            }
        }
        write!(f, ") / {}^{}", self.q, self.divisor_exp)
    }
}

/// Formulas for every full trace vector (t_1..t_l) on one residue class n̄ mod p,
/// indexed by base-q integer with t_1 least significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaSet {
    pub q: u64,
    pub p: u64,
    pub r: u32,
    pub l: usize,
    pub nbar: u64,
    pub formulas: Vec<CountFormula>,
}

impl FormulaSet {
    pub fn get(&self, t: &[u32]) -> Result<&CountFormula> {
        if t.len() != self.l || t.iter().any(|&x| x as u64 >= self.q) {
            return Err(Error::Domain(format!("trace vector must have {} entries in F_{}", self.l, self.q)));
        }
        Ok(&self.formulas[crate::oracle::trace_index(t, self.q as u32)])
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (i, f) in self.formulas.iter().enumerate() {
            let t = crate::ff_core::digits(i as u64, self.q, self.l);
            let key: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            m.insert(key.join(","), f.to_json());
        }
        json!({ "q": self.q, "p": self.p, "r": self.r, "l": self.l, "nbar": self.nbar, "formulas": Value::Object(m) })
    }

    pub fn serialize(&self) -> String {
        self.to_json().to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(json_err)?;
        let obj = v.as_object().ok_or_else(|| perr("formula set must be an object"))?;
        let q = get_u64(obj, "q")?;
        let p = get_u64(obj, "p")?;
        let r = get_u64(obj, "r")? as u32;
        let l = get_u64(obj, "l")? as usize;
        let nbar = get_u64(obj, "nbar")?;
        if l > 16 || (q as u128).pow(l as u32) > 1 << 20 {
            return Err(perr("formula set too large"));
        }
        let fm = obj.get("formulas").and_then(|f| f.as_object()).ok_or_else(|| perr("missing formulas"))?;
        let size = (q as usize).pow(l as u32);
        let mut slots: Vec<Option<CountFormula>> = vec![None; size];
        for (key, val) in fm {
            let t: Vec<u32> = key
                .split(',')
                .map(|s| s.trim().parse::<u32>().map_err(|_| perr(format!("bad trace key {key:?}"))))
                .collect::<Result<_>>()?;
            if t.len() != l || t.iter().any(|&x| x as u64 >= q) {
                return Err(perr(format!("bad trace key {key:?}")));
            }
            slots[crate::oracle::trace_index(&t, q as u32)] = Some(CountFormula::from_json(val)?);
        }
        let formulas = slots
            .into_iter()
            .enumerate()
            .map(|(i, f)| f.ok_or_else(|| perr(format!("missing formula for index {i}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { q, p, r, l, nbar, formulas })
    }
}

/// Exact integer division helper for callers that assemble formulas by hand.
pub fn exact_div(a: &BigInt, b: &BigInt) -> Result<BigInt> {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        Ok(q)
    } else {
        Err(Error::NonIntegral(format!("{a} / {b}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn three_trace_zero() -> CountFormula {
        // 2^{n-3} + (1/8)(... ) style: F_2(n,0,0,0) for odd n is 1 at n = 3
        CountFormula::new(
            2,
            3,
            Validity { modulus: 2, classes: vec![1], min_n: 1 },
            vec![
                Term { coef: rat(-1, 1), poly: big(&[1, 2, 2]) },
                Term { coef: rat(-1, 1), poly: big(&[1, 0, 2]) },
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_basics() {
        let f = CountFormula::new(3, 0, Validity::all(1), vec![]).unwrap();
        assert_eq!(f.eval(5).unwrap(), BigInt::from(243));
        let g = three_trace_zero();
        // ρ_3(X^2+2X+2) = 4, ρ_3(X^2+2) = 0: (8 - 4)/8 is not integral
        assert!(matches!(g.eval(3), Err(Error::NonIntegral(_))));
        assert!(matches!(g.eval(4), Err(Error::Validity(_))));
    }

    #[test]
    fn canonical_roundtrip() {
        let mut f = three_trace_zero();
        f.terms.push(Term { coef: rat(1, 3), poly: big(&[1, 2, 2]) });
        f.canonicalize();
        assert_eq!(f.terms.len(), 2);
        let s = f.serialize();
        assert!(!s.contains(' '));
        let g = CountFormula::parse(&s).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.serialize(), s);
        let keys: Vec<&str> = ["\"divisor_exp\"", "\"p\"", "\"q\"", "\"r\"", "\"terms\"", "\"validity\""].to_vec();
        let pos: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn parse_errors() {
        let bad = r#"{"divisor_exp":1,"p":2,"q":2,"r":1,"terms":[{"den":"1","num":"1","poly":["2","1"]}],"validity":{"classes":[0],"min_n":1,"modulus":1}}"#;
        assert!(matches!(CountFormula::parse(bad), Err(Error::Parse { .. })));
        match CountFormula::parse("{\"q\": 2,, }") {
            Err(Error::Parse { pos, .. }) => assert!(pos > 0),
            other => panic!("{other:?}"),
        }
        let wrong_p = r#"{"divisor_exp":1,"p":3,"q":2,"r":1,"terms":[],"validity":{"classes":[0],"min_n":1,"modulus":1}}"#;
        assert!(CountFormula::parse(wrong_p).is_err());
    }

    #[test]
    fn linearity() {
        let a = three_trace_zero();
        let b = CountFormula::new(
            2,
            3,
            Validity { modulus: 2, classes: vec![1], min_n: 1 },
            vec![Term { coef: rat(3, 1), poly: big(&[1, 2, 2]) }],
        )
        .unwrap();
        let s = a.add(&b).unwrap();
        for n in [5u64, 7, 9, 31] {
            let qn = BigRational::from_integer(num_traits::pow(BigInt::from(2), n as usize));
            assert_eq!(s.fluctuation(n), a.fluctuation(n) + b.fluctuation(n) + qn);
            let sum = a.eval_unchecked(n).unwrap() + b.eval_unchecked(n).unwrap();
            assert_eq!(s.eval(n).unwrap(), sum);
        }
        assert!(s.eval(4).is_err());
        let v = Validity { modulus: 4, classes: vec![1, 3], min_n: 2 }.intersect(&Validity { modulus: 3, classes: vec![0], min_n: 5 });
        assert_eq!(v, Validity { modulus: 12, classes: vec![3, 9], min_n: 5 });
    }

    #[test]
    fn display() {
        assert_eq!(poly_to_string(&big(&[1, 0, 2, -4, 0])), "X^4 + 2*X^2 - 4*X");
        let f = three_trace_zero();
        assert_eq!(f.to_string(), "(2^n - rho_n(X^2 + 2) - rho_n(X^2 + 2*X + 2)) / 2^3");
    }
}
