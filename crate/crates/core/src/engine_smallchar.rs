#![allow(non_snake_case)]

//! Characteristic 2 (l ≤ 7) and 3 (l = 3): curve systems from the lowered
//! trace identities, V-counts, the built-in formula tables and Kloosterman sums.
//!
//! For n odd write a = a_0² + a_0 + r_0 with r_0 = T_1(a); each such a has two
//! preimages a_0. The higher traces of a become T_1 of polynomials in a_0 and
//! auxiliary a_k with a_k² + a_k = w_k(a_0) + r_k, so #{a : i·f = 0} is a point
//! count on a system of Artin-Schreier equations averaged over the r's.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::artin_schreier::{affine_count_system, power_sums, ASSystem};
use crate::error::{domain, Error, Result};
use crate::expr::Expr;
use crate::ff_core::{digits, Tower};
use crate::formula::{CountFormula, Term, Validity};
use crate::trace_lab::{
    char2_binomials, char2_expr, char2_substitutions, char3_constants, char3_template, trace_vector,
    Param, TraceSpec,
};
use crate::transforms::{solve_N_from_V0, solve_N_from_V1};

// ---------------------------------------------------------------------------
// formula tables

#[derive(Clone, Debug)]
pub struct TableRow {
    pub spec: TraceSpec,
    pub formula: CountFormula,
}

/// A family of closed formulas F_q(n, t) keyed by trace pattern and residue of n.
#[derive(Clone, Debug)]
pub struct PaperFormulaTable {
    pub name: String,
    pub q: u64,
    pub modulus: u64,
    /// Largest trace position the table prescribes.
    pub width: usize,
    pub polys: BTreeMap<String, Vec<BigInt>>,
    pub rows: Vec<TableRow>,
}

const SOURCES: [(&str, &str); 8] = [
    ("3traces", include_str!("../data/three_traces.tbl")),
    ("4traces", include_str!("../data/four_traces.tbl")),
    ("5traces", include_str!("../data/five_traces.tbl")),
    ("4coeffsgeneral", include_str!("../data/four_coeffs_general.tbl")),
    ("5coeffsgeneral", include_str!("../data/five_coeffs_general.tbl")),
    ("char3_3traces", include_str!("../data/char3_three_traces.tbl")),
    ("char3_3traces_new", include_str!("../data/char3_three_traces_new.tbl")),
    ("q5l4", include_str!("../data/q5_four_traces.tbl")),
];

/// Names of the built-in tables.
pub fn table_names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { pos: line, msg: msg.into() })
}

fn header<'a>(h: &HashMap<&str, &'a str>, key: &str) -> Result<&'a str> {
    h.get(key).copied().ok_or_else(|| Error::Parse { pos: 0, msg: format!("missing header {key}") })
}

fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse { pos: line, msg: format!("bad number {s:?}") })
}

/// Parse the table text format.
///
/// Header lines `key value` (name, q, lead, denominator, sign, min_n, modulus),
/// then `poly NAME = c_d .. c_0` lines and rows `t | classes | expr [| lead den]`.
/// A row means F = q^{n-lead} ± expr/den, sign from the header.
pub fn parse_table(text: &str) -> Result<PaperFormulaTable> {
    let mut hdr: HashMap<&str, &str> = HashMap::new();
    let mut polys = BTreeMap::new();
    let mut raw_rows = Vec::new();
    for (ln, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.contains('|') {
            raw_rows.push((ln, line));
        } else if let Some(rest) = line.strip_prefix("poly ") {
            let (name, coeffs) = rest.split_once('=').ok_or_else(|| Error::Parse { pos: ln, msg: "poly needs '='".into() })?;
            let c: Vec<BigInt> = coeffs.split_whitespace().map(|x| num(x, ln)).collect::<Result<_>>()?;
            if c.first() != Some(&BigInt::one()) {
                return perr(ln, format!("polynomial {} is not monic", name.trim()));
            }
            polys.insert(name.trim().to_string(), c);
        } else {
            let (k, v) = line.split_once(' ').ok_or_else(|| Error::Parse { pos: ln, msg: format!("bad line {line:?}") })?;
            hdr.insert(k, v.trim());
        }
    }
    let q: u64 = num(header(&hdr, "q")?, 0)?;
    let lead: u32 = num(header(&hdr, "lead")?, 0)?;
    let den: i64 = num(header(&hdr, "denominator")?, 0)?;
    let sign: i64 = if header(&hdr, "sign")? == "+" { 1 } else { -1 };
    let min_n: u64 = num(header(&hdr, "min_n")?, 0)?;
    let modulus: u64 = num(header(&hdr, "modulus")?, 0)?;
    let mut rows = Vec::new();
    let mut width = 0;
    for (ln, line) in raw_rows {
        let f: Vec<&str> = line.split('|').map(str::trim).collect();
        if f.len() != 3 && f.len() != 4 {
            return perr(ln, "row needs 3 or 4 fields");
        }
        let spec = TraceSpec::parse(f[0], q as u32)?;
        width = width.max(spec.max_position());
        let classes: Vec<u64> = f[1].split_whitespace().map(|x| num(x, ln)).collect::<Result<_>>()?;
        if classes.iter().any(|&c| c >= modulus) {
            return perr(ln, "residue class out of range");
        }
        let (e, d) = if f.len() == 4 {
            let ov: Vec<i64> = f[3].split_whitespace().map(|x| num(x, ln)).collect::<Result<_>>()?;
            if ov.len() != 2 {
                return perr(ln, "override needs lead and denominator");
            }
            (ov[0] as u32, ov[1])
        } else {
            (lead, den)
        };
        let ex = Expr::parse(f[2])?;
        // q^{n-e} ± (1/d) Σ c ρ = (q^n ± (q^e/d) Σ c ρ) / q^e
        let scale = BigRational::new(BigInt::from(q).pow(e) * sign, BigInt::from(d));
        let mut terms = Vec::new();
        for (mono, &c) in &ex.terms {
            let mut it = mono.iter();
            let (name, pw) = match (it.next(), it.next()) {
                (Some(v), None) => v,
                _ => return perr(ln, "expression must be linear in the polynomial names"),
            };
            if *pw != 1 {
                return perr(ln, "expression must be linear in the polynomial names");
            }
            let poly = polys.get(name).ok_or_else(|| Error::Parse { pos: ln, msg: format!("unknown polynomial {name}") })?;
            terms.push(Term { coef: &scale * BigInt::from(c), poly: poly.clone() });
        }
        let validity = Validity { modulus, classes, min_n };
        rows.push(TableRow { spec, formula: CountFormula::new(q, e, validity, terms)? });
    }
    Ok(PaperFormulaTable { name: header(&hdr, "name")?.to_string(), q, modulus, width, polys, rows })
}

/// A built-in table by name; a leading `thm:` is accepted.
pub fn paper_table(id: &str) -> Result<&'static PaperFormulaTable> {
    static TABLES: OnceLock<BTreeMap<&'static str, PaperFormulaTable>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        SOURCES.iter().map(|(n, src)| (*n, parse_table(src).expect("built-in table parses"))).collect()
    });
    let key = id.strip_prefix("thm:").unwrap_or(id);
    tables.get(key).ok_or_else(|| Error::Domain(format!("unknown table {id:?}; known: {}", table_names().join(", "))))
}

impl PaperFormulaTable {
    /// The formula for `spec` at n, marginalising free positions (up to the
    /// table width) over rows when no row carries the pattern itself.
    pub fn formula_for(&self, spec: &TraceSpec, n: u64) -> Result<CountFormula> {
        if spec.max_position() > self.width {
            return domain(format!("table {} prescribes at most {} traces", self.name, self.width));
        }
        let exact: Vec<&TableRow> = self.rows.iter().filter(|r| &r.spec == spec).collect();
        if let Some(r) = exact.iter().find(|r| r.formula.validity.contains(n)) {
            return Ok(r.formula.clone());
        }
        let free = (1..=self.width).find(|k| !spec.entries.contains_key(k));
        match free {
            Some(k) if exact.is_empty() || !spec.is_full() => {
                let mut acc: Option<CountFormula> = None;
                for v in 0..self.q as u32 {
                    let mut s = spec.clone();
                    s.entries.insert(k, v);
                    let f = self.formula_for(&s, n)?;
                    acc = Some(match acc {
                        None => f,
                        Some(a) => a.add(&f)?,
                    });
                }
                Ok(acc.unwrap())
            }
            _ if exact.is_empty() => domain(format!("table {} has no formula for {spec}", self.name)),
            _ => Err(Error::Validity(format!("table {} has no formula for {spec} at n = {n}", self.name))),
        }
    }
}

/// Evaluate a built-in table at (t, n).
pub fn eval_paper_formula(table: &PaperFormulaTable, t: &TraceSpec, n: u64) -> Result<BigInt> {
    table.formula_for(t, n)?.eval(n)
}

// ---------------------------------------------------------------------------
// characteristic 2

/// Auxiliary equations the lowered identity for position `pos` needs.
fn aux_needed(pos: usize, param: Param) -> usize {
    match (param, pos) {
        (_, 0..=3) => 0,
        (Param::Primary, 4 | 5) => 2,
        (Param::Primary, _) => 3,
        (Param::Alternative, 4) => 1,
        (Param::Alternative, _) => 2,
    }
}

/// Number s_i of auxiliary parameters for index `i` over `positions`.
pub fn aux_count_char2(positions: &[usize], i: u64, param: Param) -> usize {
    positions
        .iter()
        .enumerate()
        .filter(|(k, _)| i >> k & 1 == 1)
        .map(|(_, &pos)| aux_needed(pos, param))
        .max()
        .unwrap_or(0)
}

/// The system for a_0 ∈ F_{2^n} with a = a_0² + a_0 + r_0 and Σ_k i_k T_{pos_k}(a) = 0:
/// auxiliary a_k² + a_k = w_k(a_0) + r_k, then y² + y = Σ_k i_k L_{pos_k}.
/// `r` holds r_0..r_s; bit k of `i` selects `positions[k]`.
pub fn build_system_char2(positions: &[usize], i: u64, r: &[u32], nbar: u64, param: Param) -> Result<ASSystem> {
    if nbar % 2 == 0 {
        return domain("characteristic-2 systems need n odd");
    }
    if positions.iter().any(|&p| p == 0 || p > 7) {
        return domain("trace positions must lie in 1..7");
    }
    if i >> positions.len() != 0 {
        return domain(format!("index {i} has more bits than positions"));
    }
    let s = aux_count_char2(positions, i, param);
    if param == Param::Alternative && positions.iter().any(|&p| p > 5) {
        return domain("the alternative parameterisation covers positions up to 5");
    }
    if r.len() != s + 1 {
        return domain(format!("expected {} parameters r_0..r_{s}, got {}", s + 1, r.len()));
    }
    let mut consts = char2_binomials(nbar);
    for (k, &v) in r.iter().enumerate() {
        consts.insert(format!("r{k}"), (v & 1) as i64);
    }
    let mut lin = Expr::zero();
    for (k, &pos) in positions.iter().enumerate() {
        if i >> k & 1 == 1 {
            lin = lin.add(char2_expr(pos, param)?);
        }
    }
    let lin = format_expr(&lin.substitute(&consts));
    let subs = char2_substitutions(param);
    let aux: Vec<(String, String)> =
        (1..=s).map(|k| (format!("a{k}"), format!("{} + r{k}", subs[k - 1]))).collect();
    let mut eqs: Vec<(&str, u32, &str)> = aux.iter().map(|(v, rhs)| (v.as_str(), 2, rhs.as_str())).collect();
    if i != 0 {
        eqs.push(("y", 2, lin.as_str()));
    }
    let mut sys = ASSystem::parse(2, 1, "a0", &eqs, &consts)?;
    sys.s = s as u32;
    Ok(sys)
}

fn format_expr(e: &Expr) -> String {
    let mut out = String::new();
    for (m, c) in &e.terms {
        let mut parts = vec![c.abs().to_string()];
        parts.extend(m.iter().map(|(v, p)| format!("{v}^{p}")));
        let sep = match (out.is_empty(), *c < 0) {
            (true, false) => "",
            (true, true) => "-",
            (false, false) => " + ",
            (false, true) => " - ",
        };
        out.push_str(sep);
        out.push_str(&parts.join("*"));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// V(i) = #{a ∈ F_{2^n} : Σ_k i_k T_{pos_k}(a) = 0}, from the curve systems.
pub fn V_count_char2(positions: &[usize], i: u64, n: u32, param: Param) -> Result<i128> {
    if n % 2 == 0 {
        return domain("the characteristic-2 parameterisation needs n odd");
    }
    if i == 0 {
        crate::ff_core::check_budget(1u128 << n)?;
        return Ok(1i128 << n);
    }
    let s = aux_count_char2(positions, i, param);
    let mut total: u64 = 0;
    for code in 0..(1u64 << (s + 1)) {
        let r = digits(code, 2, s + 1);
        let sys = build_system_char2(positions, i, &r, n as u64, param)?;
        total += affine_count_system(&sys, n)?;
    }
    // two a_0 per a, two roots per auxiliary and two y
    let d = 1u64 << (s + 2);
    if total % d != 0 {
        return Err(Error::NonIntegral(format!("V count {total} not divisible by {d}")));
    }
    Ok((total / d) as i128)
}

/// All V(i) for positions 1..l.
pub fn V_table_char2(l: usize, n: u32) -> Result<Vec<i128>> {
    let positions: Vec<usize> = (1..=l).collect();
    let param = Param::Primary;
    (0..1u64 << l).into_par_iter().map(|i| V_count_char2(&positions, i, n, param)).collect()
}

// ---------------------------------------------------------------------------
// characteristic 3

/// a_1³ - a_1 = Σ_k i_k L_k(a_0, r_0) - 1/n over F_{3^n}: 9·V_1(i) summed over r_0.
pub fn build_system_char3(i: u64, r0: u32, nbar: u64) -> Result<ASSystem> {
    if i == 0 || i >= 27 {
        return domain("index must lie in 1..26");
    }
    let mut consts = char3_constants(nbar)?;
    consts.insert("r0".into(), (r0 % 3) as i64);
    let mut lin = Expr::zero();
    for (k, d) in digits(i, 3, 3).into_iter().enumerate() {
        if d != 0 {
            lin = lin.add(&Expr::parse(char3_template(k + 1)?)?.scale(d as i64));
        }
    }
    // 1/n ≡ n mod 3
    lin = lin.add(&Expr::constant(-((nbar % 3) as i64)));
    let rhs = format_expr(&lin.substitute(&consts));
    ASSystem::parse(3, 1, "a0", &[("a1", 3, &rhs)], &consts)
}

/// V_1(i) = #{a ∈ F_{3^n} : Σ_k i_k T_{k+1}(a) = 1}.
pub fn V_count_char3(i: u64, n: u32) -> Result<i128> {
    if n % 3 == 0 {
        return domain("the characteristic-3 parameterisation needs n coprime to 3");
    }
    if i == 0 {
        crate::ff_core::check_budget(3u128.pow(n))?;
        return Ok(3i128.pow(n));
    }
    let mut total = 0u64;
    for r0 in 0..3 {
        total += affine_count_system(&build_system_char3(i, r0, n as u64)?, n)?;
    }
    if total % 9 != 0 {
        return Err(Error::NonIntegral(format!("V_1 count {total} not divisible by 9")));
    }
    Ok((total / 9) as i128)
}

/// Direct system over F_3 for F_3(n, t_1, t_2, t_3), with r_0 = t_1/n:
/// a_1³ - a_1 = L_2 - t_2/n, a_2³ - a_2 = L_3 - t_3/n; count / 27 = F.
/// The binomial constants depend on n mod 9, so this takes n itself.
pub fn build_direct_system_char3(t: &[u32], n: u64) -> Result<ASSystem> {
    if t.len() != 3 || t.iter().any(|&x| x >= 3) {
        return domain("need three traces in F_3");
    }
    let mut consts = char3_constants(n)?;
    let ninv = (n % 3) as i64;
    consts.insert("r0".into(), t[0] as i64 * ninv % 3);
    let rhs: Vec<String> = (2..=3)
        .map(|k| {
            let e = Expr::parse(char3_template(k).unwrap()).unwrap();
            format_expr(&e.add(&Expr::constant(-(t[k - 1] as i64) * ninv)).substitute(&consts))
        })
        .collect();
    let mut sys = ASSystem::parse(3, 1, "a0", &[("a1", 3, &rhs[0]), ("a2", 3, &rhs[1])], &consts)?;
    sys.s = 3;
    Ok(sys)
}

/// Exact F_q(n, t) for every t ∈ F_q^l (indexed as [`crate::oracle::trace_index`])
/// from curve counts: q = 2 with n odd and l ≤ 7, or q = 3 with 3 ∤ n and l = 3.
pub fn F_smallchar_counts(q: u32, l: usize, n: u32) -> Result<Vec<i128>> {
    match q {
        2 => {
            if !(1..=7).contains(&l) {
                return domain("characteristic 2 supports l = 1..7");
            }
            solve_N_from_V0(&V_table_char2(l, n)?, l)
        }
        3 => {
            if l != 3 {
                return domain("characteristic 3 supports l = 3");
            }
            let v: Vec<i128> = (0..27u64).into_par_iter().map(|i| V_count_char3(i, n)).collect::<Result<_>>()?;
            solve_N_from_V1(&v, 3, 3)
        }
        _ => domain("small-characteristic pipeline needs q = 2 or 3"),
    }
}

// ---------------------------------------------------------------------------
// identities among power sums

/// Whether Σ c_k ρ_n(P_k) = 0 for every n ≤ horizon in `classes`.
pub fn root_identity_check(terms: &[(i64, &[BigInt])], classes: &Validity, horizon: usize) -> bool {
    let sums: Vec<Vec<BigInt>> = terms.iter().map(|(_, p)| power_sums(p, horizon)).collect();
    (1..=horizon).filter(|&n| classes.contains(n as u64)).all(|n| {
        let s: BigInt = terms.iter().zip(&sums).map(|((c, _), r)| BigInt::from(*c) * &r[n]).sum();
        s.is_zero()
    })
}

/// ρ_{n+P}(poly) = q^{P/2} ρ_n(poly) for all n ≤ horizon: the roots are √q times
/// roots of unity of order dividing P.
pub fn has_scaled_period(poly: &[BigInt], q: u64, period: usize, horizon: usize) -> bool {
    if period % 2 == 1 {
        return false;
    }
    let r = power_sums(poly, horizon + period);
    let k = BigInt::from(q).pow((period / 2) as u32);
    (0..=horizon).all(|n| r[n + period] == &k * &r[n])
}

// ---------------------------------------------------------------------------
// Kloosterman sums

/// K(a) = #E(F_{2^n}) - 2^n for E: y² + xy = x³ + a (projective count).
pub fn kloosterman(t: &Tower, a: u32) -> Result<i64> {
    if t.q != 2 {
        return domain("Kloosterman sums are over F_{2^n}");
    }
    if a == 0 {
        return domain("a must be nonzero");
    }
    // x = 0 gives y = √a; for x ≠ 0, y = xz with z² + z = x + a/x²
    let mut affine: i64 = 1;
    for x in 1..t.size {
        let c = t.add(x, t.mul(a, t.inv(t.mul(x, x))?));
        if t.abs_trace(c) == 0 {
            affine += 2;
        }
    }
    Ok(affine + 1 - (1i64 << t.n))
}

/// The congruence for K(a) mod 32 (n ≥ 4) or mod 64 (n ≥ 6) in terms of the
/// traces e_k = T_k(a) read as 0/1 integers.
pub fn kloosterman_congruence(t: &Tower, a: u32, modulus: u32) -> Result<u32> {
    if t.q != 2 {
        return domain("Kloosterman congruences are over F_{2^n}");
    }
    let e: Vec<u32> = trace_vector(t, a, 8).values;
    let e = |k: usize| e[k - 1];
    let v = match modulus {
        32 if t.n >= 4 => 28 * e(1) + 8 * e(2) + 16 * (e(1) * e(2) + e(1) * e(3) + e(4)),
        64 if t.n >= 6 => {
            28 * e(1)
                + 40 * e(2)
                + 16 * (e(1) * e(2) + e(1) * e(3) + e(4))
                + 32 * (e(1) * e(4)
                    + e(1) * e(5)
                    + e(1) * e(6)
                    + e(1) * e(7)
                    + e(2) * e(3)
                    + e(2) * e(4)
                    + e(2) * e(6)
                    + e(3) * e(5)
                    + e(1) * e(2) * e(3)
                    + e(1) * e(2) * e(4)
                    + e(8))
        }
        32 | 64 => return domain(format!("the mod-{modulus} congruence needs larger n")),
        _ => return domain("modulus must be 32 or 64"),
    };
    Ok(v % modulus)
}

/// #{a ∈ F_{2^n} : K(a) ≡ 0 mod 32}, counting a = 0, via F_2(n, 0, 0, *, 0).
pub fn count_kloosterman_zero_mod32(n: u64) -> Result<BigInt> {
    if n < 5 {
        return domain("need n ≥ 5");
    }
    let tab = paper_table("4coeffsgeneral")?;
    eval_paper_formula(tab, &TraceSpec::parse("0,0,*,0", 2)?, n)
}

/// The same count by enumerating K(a) (a = 0 included).
pub fn count_kloosterman_zero_brute(n: u32, modulus: i64) -> Result<u64> {
    let t = Tower::get(2, 1, n)?;
    t.enumerate_elements()?;
    let c = (1..t.size)
        .into_par_iter()
        .map(|a| kloosterman(&t, a).map(|k| (k.rem_euclid(modulus) == 0) as u64))
        .sum::<Result<u64>>()?;
    Ok(c + 1)
}

/// Value distribution of K(a) over a ≠ 0.
pub fn kloosterman_distribution(n: u32) -> Result<BTreeMap<i64, u64>> {
    let t = Tower::get(2, 1, n)?;
    t.enumerate_elements()?;
    let ks: Vec<i64> = (1..t.size).into_par_iter().map(|a| kloosterman(&t, a)).collect::<Result<_>>()?;
    let mut out = BTreeMap::new();
    for k in ks {
        *out.entry(k).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{count_F_brute, trace_index};
    use rand::{Rng, SeedableRng};

    fn oracle_table(q: u32, l: usize, n: u32) -> Vec<i128> {
        let t = Tower::for_q(q, n).unwrap();
        crate::oracle::count_all_F_brute(&t, l).unwrap().into_iter().map(|x| x as i128).collect()
    }

    #[test]
    fn tables_load_and_reference_known_polys() {
        for name in table_names() {
            let t = paper_table(name).unwrap();
            assert!(!t.rows.is_empty(), "{name}");
            for row in &t.rows {
                for term in &row.formula.terms {
                    assert!(t.polys.values().any(|p| p == &term.poly), "{name}");
                }
            }
        }
        assert!(paper_table("thm:4traces").is_ok());
        assert!(paper_table("nope").is_err());
        let d = &paper_table("4traces").unwrap().polys;
        let d82: Vec<BigInt> = [1, 0, 2, 4, 2, 8, 8, 0, 16].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(d["d8_2"], d82);
        // constant terms are q^{g}
        assert_eq!(d["d8_1"][8], BigInt::from(16));
        assert_eq!(paper_table("char3_3traces_new").unwrap().polys["e12_4"][12], BigInt::from(729));
    }

    #[test]
    fn three_traces_at_n3() {
        let t = paper_table("thm:3traces").unwrap();
        assert_eq!(eval_paper_formula(t, &TraceSpec::full(&[0, 0, 0]), 3).unwrap(), BigInt::from(1));
        // outside the odd classes only t = 0 has a formula
        assert!(matches!(eval_paper_formula(t, &TraceSpec::full(&[1, 0, 0]), 4), Err(Error::Validity(_))));
        assert!(eval_paper_formula(t, &TraceSpec::full(&[0, 0, 0]), 4).is_ok());
    }

    #[test]
    fn char2_tables_small_n_against_oracle() {
        for (name, l, ns) in [("3traces", 3usize, 3..=11u32), ("4traces", 4, 5..=11), ("5traces", 5, 5..=11)] {
            let tab = paper_table(name).unwrap();
            for n in ns.step_by(2) {
                let want = oracle_table(2, l, n);
                for ix in 0..1usize << l {
                    let t = digits(ix as u64, 2, l);
                    let got = eval_paper_formula(tab, &TraceSpec::full(&t), n as u64).unwrap();
                    assert_eq!(got, BigInt::from(want[ix]), "{name} t={t:?} n={n}");
                }
            }
        }
    }

    #[test]
    fn marginalising_matches_explicit_row() {
        let tab = paper_table("4coeffsgeneral").unwrap();
        for n in 4..=14u64 {
            let spec = TraceSpec::parse("0,0,*,0", 2).unwrap();
            let stored = eval_paper_formula(tab, &spec, n).unwrap();
            let a = eval_paper_formula(tab, &TraceSpec::full(&[0, 0, 0, 0]), n).unwrap();
            let b = eval_paper_formula(tab, &TraceSpec::full(&[0, 0, 1, 0]), n).unwrap();
            assert_eq!(stored, a + b, "n={n}");
        }
        // patterns without a stored row are summed from full rows
        let tab = paper_table("3traces").unwrap();
        for n in [5u32, 7, 9] {
            let tw = Tower::get(2, 1, n).unwrap();
            for pat in ["0,0,*", "*,1,*", "*,*,*", "1", "*,*,0"] {
                let spec = TraceSpec::parse(pat, 2).unwrap();
                let want = count_F_brute(&tw, &spec).unwrap();
                assert_eq!(eval_paper_formula(tab, &spec, n as u64).unwrap(), BigInt::from(want), "{pat} n={n}");
            }
        }
    }

    #[test]
    fn char2_system_shapes() {
        let sys = build_system_char2(&[1, 2, 3], 0b100, &[1], 5, Param::Primary).unwrap();
        assert_eq!(sys.equations.len(), 1);
        assert_eq!(sys.s, 0);
        let sys = build_system_char2(&[1, 2, 3, 4], 0b1000, &[0, 0], 7, Param::Alternative).unwrap();
        assert_eq!(sys.equations.len(), 2);
        assert_eq!(build_system_char2(&[1, 2, 3], 0, &[0], 3, Param::Primary).unwrap().equations.len(), 0);
        assert!(build_system_char2(&[1, 2, 3], 1, &[0], 4, Param::Primary).is_err());
        assert!(build_system_char2(&[1, 6], 2, &[0, 0, 0, 0], 5, Param::Alternative).is_err());
    }

    #[test]
    fn v_count_simple_cases() {
        for n in [3u32, 5, 7] {
            assert_eq!(V_count_char2(&[1], 1, n, Param::Primary).unwrap(), 1 << (n - 1));
            assert_eq!(V_count_char2(&[1, 2], 0, n, Param::Primary).unwrap(), 1 << n);
        }
    }

    #[test]
    fn v_counts_agree_with_oracle_both_parameterisations() {
        let n = 7;
        let t = Tower::get(2, 1, n).unwrap();
        let positions = [1usize, 2, 3, 4, 5];
        for i in 1..32u64 {
            // #{a : Σ i_k T_k(a) = 0} directly
            let mut want = 0;
            for a in 0..t.size {
                let tv = trace_vector(&t, a, 5).values;
                let s: u32 = (0..5).filter(|k| i >> k & 1 == 1).map(|k| tv[k]).sum();
                want += (s % 2 == 0) as i128;
            }
            for param in [Param::Primary, Param::Alternative] {
                assert_eq!(V_count_char2(&positions, i, n, param).unwrap(), want, "i={i} {param:?}");
            }
        }
    }

    #[test]
    fn char2_pipeline_matches_oracle() {
        for (l, n) in [(3usize, 5u32), (4, 7), (5, 9), (6, 7), (7, 9)] {
            assert_eq!(F_smallchar_counts(2, l, n).unwrap(), oracle_table(2, l, n), "l={l} n={n}");
        }
    }

    #[test]
    fn char3_pipeline_matches_oracle() {
        for n in [4u32, 5] {
            assert_eq!(F_smallchar_counts(3, 3, n).unwrap(), oracle_table(3, 3, n), "n={n}");
        }
        assert!(F_smallchar_counts(3, 3, 6).is_err());
    }

    #[test]
    fn char3_direct_system() {
        for n in [4u32, 5] {
            let tw = Tower::get(3, 1, n).unwrap();
            for ix in 0..27u64 {
                let t = digits(ix, 3, 3);
                let sys = build_direct_system_char3(&t, n as u64).unwrap();
                let c = affine_count_system(&sys, n).unwrap();
                assert_eq!(c % 27, 0);
                assert_eq!(c / 27, count_F_brute(&tw, &TraceSpec::full(&t)).unwrap(), "n={n} t={t:?}");
            }
        }
    }

    #[test]
    fn char3_new_table_small_n() {
        let tab = paper_table("char3_3traces_new").unwrap();
        for n in [4u32, 5] {
            let want = oracle_table(3, 3, n);
            for ix in 0..27u64 {
                let t = digits(ix, 3, 3);
                let got = eval_paper_formula(tab, &TraceSpec::full(&t), n as u64).unwrap();
                assert_eq!(got, BigInt::from(want[trace_index(&t, 3)]), "t={t:?} n={n}");
            }
        }
    }

    #[test]
    fn char3_t1_two_labels_are_shifted() {
        // with the source labels, F(n, 2, t2 + 1, t3) would be listed as F(n, 2, t2, t3)
        let tab = paper_table("char3_3traces").unwrap();
        let want = oracle_table(3, 3, 5);
        let mut differs = 0;
        for s in 0..3u32 {
            for t3 in 0..3u32 {
                let v = eval_paper_formula(tab, &TraceSpec::full(&[2, s, t3]), 5).unwrap();
                assert_eq!(v, BigInt::from(want[trace_index(&[2, s, t3], 3)]));
                differs += (v != BigInt::from(want[trace_index(&[2, (s + 1) % 3, t3], 3)])) as u32;
            }
        }
        assert!(differs > 0);
    }

    #[test]
    fn root_identities() {
        let tab = paper_table("char3_3traces_new").unwrap();
        let e = |k: &str| tab.polys[k].as_slice();
        let coprime = Validity { modulus: 3, classes: vec![1, 2], min_n: 1 };
        let five = [(1, e("e6")), (1, e("e12_1")), (1, e("e12_2")), (1, e("e12_3")), (1, e("e12_4"))];
        assert!(root_identity_check(&five, &coprime, 200));
        let multiples = Validity { modulus: 3, classes: vec![0], min_n: 1 };
        assert!(!root_identity_check(&five, &multiples, 200));
        assert!(root_identity_check(&[], &coprime, 200));
        let pair = [(1, e("e6")), (1, e("e12_1"))];
        assert!(root_identity_check(&pair, &Validity { modulus: 9, classes: vec![2, 5, 8], min_n: 1 }, 200));
    }

    #[test]
    fn periodicity() {
        let tab = paper_table("3traces").unwrap();
        for p in tab.polys.values() {
            assert!(has_scaled_period(p, 2, 24, 300));
        }
        let x2p2: Vec<BigInt> = [1, 1, 2].iter().map(|&x| BigInt::from(x)).collect();
        assert!(!has_scaled_period(&x2p2, 2, 24, 100));
    }

    #[test]
    fn kloosterman_basics() {
        let t1 = Tower::get(2, 1, 1).unwrap();
        assert_eq!(kloosterman(&t1, 1).unwrap(), 2);
        assert!(kloosterman(&t1, 0).is_err());
        for n in 3..=9u32 {
            let t = Tower::get(2, 1, n).unwrap();
            for a in 1..t.size {
                let k = kloosterman(&t, a).unwrap();
                assert_eq!(k.rem_euclid(4), 0);
                let order = (1i64 << n) + k;
                assert_eq!(order % 8 == 0, t.abs_trace(a) == 0, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn kloosterman_congruences_random() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for n in 6..=11u32 {
            let t = Tower::get(2, 1, n).unwrap();
            for _ in 0..100 {
                let a = rng.gen_range(1..t.size);
                let k = kloosterman(&t, a).unwrap();
                assert_eq!(kloosterman_congruence(&t, a, 32).unwrap() as i64, k.rem_euclid(32));
                assert_eq!(kloosterman_congruence(&t, a, 64).unwrap() as i64, k.rem_euclid(64));
            }
        }
        let t = Tower::get(2, 1, 5).unwrap();
        assert!(kloosterman_congruence(&t, 3, 64).is_err());
    }

    #[test]
    fn kloosterman_zero_count() {
        assert_eq!(count_kloosterman_zero_mod32(5).unwrap(), BigInt::from(6));
        for n in 5..=10u32 {
            let brute = count_kloosterman_zero_brute(n, 32).unwrap();
            assert_eq!(count_kloosterman_zero_mod32(n as u64).unwrap(), BigInt::from(brute), "n={n}");
        }
    }
}
