//! Multivariate integer polynomials in named variables, parsed from text and
//! specialised into compiled evaluators over a field tower.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ff_core::{Fq, Tower};

/// Monomial: variable name -> exponent (no zero exponents).
pub type Monomial = BTreeMap<String, u32>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expr {
    pub terms: BTreeMap<Monomial, i64>,
}

impl Expr {
    pub fn zero() -> Self {
        Self::default()
    }
    pub fn constant(c: i64) -> Self {
        let mut e = Self::zero();
        if c != 0 {
            e.terms.insert(Monomial::new(), c);
        }
        e
    }
    pub fn var(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        let mut e = Self::zero();
        e.terms.insert(m, 1);
        e
    }
    pub fn add(&self, o: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, &c) in &o.terms {
            let v = out.terms.entry(m.clone()).or_insert(0);
            *v += c;
            if *v == 0 {
                out.terms.remove(m);
            }
        }
        out
    }
    pub fn scale(&self, k: i64) -> Expr {
        let mut out = Expr::zero();
        if k != 0 {
            for (m, &c) in &self.terms {
                out.terms.insert(m.clone(), c * k);
            }
        }
        out
    }
    pub fn mul(&self, o: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &o.terms {
                let mut m = m1.clone();
                for (v, &e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                let t = Expr { terms: BTreeMap::from([(m, c1 * c2)]) };
                out = out.add(&t);
            }
        }
        out
    }
    pub fn pow(&self, e: u32) -> Expr {
        let mut acc = Expr::constant(1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.keys().flat_map(|m| m.keys().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Replace variables by integer constants.
    pub fn substitute(&self, consts: &HashMap<String, i64>) -> Expr {
        let mut out = Expr::zero();
        for (m, &c) in &self.terms {
            let mut coef = c;
            let mut rest = Monomial::new();
            for (v, &e) in m {
                match consts.get(v) {
                    Some(&k) => coef *= k.pow(e),
                    None => {
                        rest.insert(v.clone(), e);
                    }
                }
            }
            out = out.add(&Expr { terms: BTreeMap::from([(rest, coef)]) });
        }
        out
    }

    /// Compile over `vars` with coefficients reduced into the prime field of `fq`.
    /// Every variable must be listed in `vars`.
    pub fn compile(&self, vars: &[&str], fq: &Fq) -> Result<Compiled> {
        let mut terms = Vec::new();
        for (m, &c) in &self.terms {
            let coef = fq.from_i64(c);
            if coef == 0 {
                continue;
            }
            let mut ex = vec![0u32; vars.len()];
            for (v, &e) in m {
                match vars.iter().position(|x| x == v) {
                    Some(i) => ex[i] = e,
                    None => return Err(Error::Domain(format!("missing value for variable {v}"))),
                }
            }
            terms.push((coef, ex));
        }
        Ok(Compiled { terms })
    }

    pub fn parse(s: &str) -> Result<Expr> {
        let toks = tokenize(s)?;
        let mut p = Parser { toks, i: 0 };
        let e = p.expr()?;
        if p.i != p.toks.len() {
            return Err(Error::Parse { pos: p.pos(), msg: "trailing input".into() });
        }
        Ok(e)
    }
}

/// Polynomial with F_q-coded coefficients over an ordered variable list.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub terms: Vec<(u32, Vec<u32>)>,
}

impl Compiled {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn uses(&self, var: usize) -> bool {
        self.terms.iter().any(|(_, e)| e.get(var).copied().unwrap_or(0) > 0)
    }
    pub fn eval(&self, t: &Tower, vals: &[u32]) -> u32 {
        let order = t.order as u64;
        let mut acc = 0u32;
        'term: for (c, ex) in &self.terms {
            let mut l = 0u64;
            for (i, &e) in ex.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = vals[i];
                if v == 0 {
                    continue 'term;
                }
                l += t.log(v) as u64 * e as u64;
            }
            let mono = if order == 0 { 1 } else { t.exp(l % order) };
            acc = t.add(acc, t.mul(*c, mono));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let b: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let t: String = b[st..i].iter().collect();
            let v = t.parse().map_err(|_| Error::Parse { pos: st, msg: "bad number".into() })?;
            out.push((Tok::Num(v), st));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(b[st..i].iter().collect()), st));
        } else if "+-*^()".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(Error::Parse { pos: i, msg: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|t| t.1).unwrap_or(usize::MAX)
    }
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }
    fn expr(&mut self) -> Result<Expr> {
        let mut acc = if self.peek() == Some(&Tok::Sym('-')) {
            self.i += 1;
            self.term()?.scale(-1)
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some(Tok::Sym('+')) => {
                    self.i += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Sym('-')) => {
                    self.i += 1;
                    acc = acc.add(&self.term()?.scale(-1));
                }
                _ => return Ok(acc),
            }
        }
    }
    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Sym('*')) {
            self.i += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }
    fn factor(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let base = match self.toks.get(self.i).cloned() {
            Some((Tok::Num(v), _)) => {
                self.i += 1;
                Expr::constant(v)
            }
            Some((Tok::Ident(name), _)) => {
                self.i += 1;
                Expr::var(&name)
            }
            Some((Tok::Sym('('), _)) => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::Sym(')')) {
                    return Err(Error::Parse { pos: self.pos(), msg: "expected ')'".into() });
                }
                self.i += 1;
                e
            }
            _ => return Err(Error::Parse { pos, msg: "expected a factor".into() }),
        };
        if self.peek() == Some(&Tok::Sym('^')) {
            self.i += 1;
            match self.toks.get(self.i).cloned() {
                Some((Tok::Num(e), _)) if e >= 0 => {
                    self.i += 1;
                    Ok(base.pow(e as u32))
                }
                _ => Err(Error::Parse { pos: self.pos(), msg: "expected exponent".into() }),
            }
        } else {
            Ok(base)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_expand() {
        let e = Expr::parse("(x + 1)^2 - 2*x").unwrap();
        assert_eq!(e, Expr::parse("x^2 + 1").unwrap());
        let f = Expr::parse("(r0 + 1)*(r1 + r2)*B2").unwrap();
        let consts: HashMap<String, i64> =
            [("r0", 1), ("r1", 1), ("r2", 0), ("B2", 1)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(f.substitute(&consts), Expr::constant(2));
    }

    #[test]
    fn parse_errors_have_positions() {
        match Expr::parse("a0^3 + $") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("(a0 + 1").is_err());
    }

    #[test]
    fn compiled_eval() {
        let t = Tower::get(2, 1, 5).unwrap();
        let e = Expr::parse("a0^3 + a0*a1 + 1").unwrap();
        let c = e.compile(&["a0", "a1"], &t.fq).unwrap();
        for a in 0..t.size {
            for b in [0, 1, 7, 30] {
                let direct = t.add(t.add(t.pow(a, 3), t.mul(a, b)), 1);
                assert_eq!(c.eval(&t, &[a, b]), direct);
            }
        }
        assert!(e.compile(&["a0"], &t.fq).is_err());
    }
}
