use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use irrcount::artin_schreier::{frobenius_charpoly, ASCurve};
use irrcount::engine_main::{derive_formula_set, verify_formula_set};
use irrcount::engine_smallchar::{
    count_kloosterman_zero_brute, count_kloosterman_zero_mod32, eval_paper_formula, kloosterman_distribution,
    paper_table,
};
use irrcount::expr::Expr;
use irrcount::ff_core::{prime_power, set_budget, Tower};
use irrcount::formula::{CountFormula, FormulaSet};
use irrcount::oracle::{count_F_brute, count_I_brute, gauss_count};
use irrcount::trace_lab::TraceSpec;
use irrcount::{Error, Result};

#[derive(Parser)]
#[command(name = "irrcount", version, about = "Exact counts of finite-field elements with prescribed traces")]
struct Cli {
    /// Machine-readable output (errors go to stderr as JSON too).
    #[arg(long, global = true)]
    json: bool,
    /// Enumeration budget (number of field elements); defaults to IRRCOUNT_BUDGET or 2^28.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads for parallel counting.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum BruteKind {
    /// Elements of F_{q^n} with prescribed traces.
    #[value(name = "F")]
    F,
    /// Monic irreducibles of degree n with prescribed traces of their roots.
    #[value(name = "I")]
    I,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count by exhaustive enumeration.
    Brute {
        #[arg(value_enum)]
        kind: BruteKind,
        #[arg(long)]
        q: u32,
        #[arg(long)]
        n: u32,
        /// "1=0,2=1,4=*" or "0,1,*,1" (position k holds T_k).
        #[arg(long, visible_alias = "coeffs")]
        traces: String,
    },
    /// Number of monic irreducibles of degree n over F_q.
    Gauss {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u64,
    },
    /// Frobenius polynomial of y^e - y = f(x) over F_q.
    Zeta {
        #[arg(long)]
        q: u32,
        /// Either an integer polynomial such as "x^3 + x", or F_q codes low degree first ("0,1,0,1").
        #[arg(long)]
        curve: String,
        /// Exponent e (p or q); defaults to p.
        #[arg(long)]
        e: Option<u32>,
    },
    /// Derive closed formulas for every trace vector of length l with n ≡ nbar mod p.
    Derive {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        nbar: u32,
        #[arg(long)]
        out: Option<String>,
    },
    /// Evaluate a formula file.
    Eval {
        #[arg(long)]
        formula: String,
        /// Trace vector, required for formula sets.
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        n: u64,
    },
    /// Compare a formula set against the oracle.
    Verify {
        #[arg(long)]
        formula: String,
        /// Inclusive range such as "4..16".
        #[arg(long, default_value = "4..12")]
        n_range: String,
        #[arg(long, default_value = "oracle")]
        against: String,
    },
    /// Evaluate a built-in table.
    Table {
        #[arg(long)]
        name: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        n: u64,
    },
    /// Kloosterman sums over F_{2^n}.
    Kloosterman {
        #[arg(long)]
        n: u32,
        /// Count a ∈ F_{2^n} (a = 0 included) with K(a) ≡ 0 mod this.
        #[arg(long)]
        zeros_mod: Option<i64>,
    },
}

enum Failure {
    Lib(Error),
    Usage(String),
    Mismatch(Value, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

struct Output {
    json: Value,
    text: String,
}

fn out(json: Value, text: impl Into<String>) -> Output {
    Output { json, text: text.into() }
}

fn parse_spec(s: &str, q: u32) -> Result<TraceSpec> {
    if !s.contains('=') {
        return TraceSpec::parse(s, q);
    }
    let mut spec = TraceSpec::default();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Parse { pos: 0, msg: format!("bad trace entry {part:?}") };
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        let v = v.trim();
        if v == "*" {
            continue;
        }
        let v: u32 = v.parse().map_err(|_| bad())?;
        if v >= q {
            return Err(Error::Domain(format!("trace value {v} is not in F_{q}")));
        }
        spec.entries.insert(k, v);
    }
    Ok(spec)
}

fn parse_vector(s: &str, q: u64) -> Result<Vec<u32>> {
    s.split(',')
        .map(|p| {
            let v: u32 = p.trim().parse().map_err(|_| Error::Parse { pos: 0, msg: format!("bad entry {p:?}") })?;
            if v as u64 >= q {
                return Err(Error::Domain(format!("{v} is not in F_{q}")));
            }
            Ok(v)
        })
        .collect()
}

fn parse_curve(s: &str, q: u32) -> Result<Vec<u32>> {
    let (p, _) = prime_power(q)?;
    if !s.chars().any(|c| c.is_ascii_alphabetic()) {
        return parse_vector(s, q as u64);
    }
    let e = Expr::parse(s)?;
    let vars = e.variables();
    if vars.len() > 1 {
        return Err(Error::Domain(format!("expected one variable, found {vars:?}")));
    }
    let deg = e.terms.keys().map(|m| m.values().sum::<u32>()).max().unwrap_or(0) as usize;
    let mut f = vec![0u32; deg + 1];
    for (m, &c) in &e.terms {
        let d = m.values().sum::<u32>() as usize;
        f[d] = ((f[d] as i64 + c).rem_euclid(p as i64)) as u32;
    }
    Ok(f)
}

fn parse_range(s: &str) -> std::result::Result<Vec<u32>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("bad range {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|_| format!("bad range {s:?}"))?;
    let b: u32 = b.trim().parse().map_err(|_| format!("bad range {s:?}"))?;
    Ok((a..=b).collect())
}

fn read_file(path: &str) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn run(cmd: Cmd) -> std::result::Result<Output, Failure> {
    match cmd {
        Cmd::Brute { kind, q, n, traces } => {
            let spec = parse_spec(&traces, q)?;
            let (c, label) = match kind {
                BruteKind::F => (count_F_brute(&*Tower::for_q(q, n)?, &spec)?, "F"),
                BruteKind::I => (count_I_brute(q, n, &spec)?, "I"),
            };
            let t: BTreeMap<String, u32> = spec.entries.iter().map(|(k, v)| (k.to_string(), *v)).collect();
            Ok(out(json!({ "kind": label, "q": q, "n": n, "traces": t, "count": c }), c.to_string()))
        }
        Cmd::Gauss { q, n } => {
            prime_power(u32::try_from(q).map_err(|_| Error::Domain("q too large".into()))?)?;
            if n == 0 {
                return Err(Error::Domain("n must be positive".into()).into());
            }
            let c = gauss_count(q, n);
            Ok(out(json!({ "q": q, "n": n, "count": c.to_string() }), c.to_string()))
        }
        Cmd::Zeta { q, curve, e } => {
            let (p, r) = prime_power(q)?;
            let c = ASCurve::new(p, r, e.unwrap_or(p), parse_curve(&curve, q)?)?;
            let fp = frobenius_charpoly(&c)?;
            let coeffs: Vec<String> = fp.coeffs.iter().map(BigInt::to_string).collect();
            let j = json!({ "q": fp.q, "genus": fp.genus, "coeffs": coeffs });
            Ok(out(j.clone(), j.to_string()))
        }
        Cmd::Derive { q, l, nbar, out: path } => {
            let d = derive_formula_set(q, l, nbar)?;
            let text = d.set.serialize();
            match path {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
                    let j = json!({
                        "out": path,
                        "formulas": d.set.formulas.len(),
                        "curves": d.curves.len(),
                        "roots": d.root_count(),
                    });
                    let msg = format!(
                        "wrote {} formulas to {path} ({} curves, {} roots)",
                        d.set.formulas.len(),
                        d.curves.len(),
                        d.root_count()
                    );
                    Ok(out(j, msg))
                }
                None => Ok(out(d.set.to_json(), text)),
            }
        }
        Cmd::Eval { formula, t, n } => {
            let text = read_file(&formula)?;
            let (v, tv) = match FormulaSet::parse(&text) {
                Ok(fs) => {
                    let t = t.ok_or_else(|| Failure::Usage("--t is required for a formula set".into()))?;
                    let tv = parse_vector(&t, fs.q)?;
                    (fs.get(&tv)?.eval(n)?, Some(tv))
                }
                Err(_) => (CountFormula::parse(&text)?.eval(n)?, None),
            };
            Ok(out(json!({ "n": n, "t": tv, "count": v.to_string() }), v.to_string()))
        }
        Cmd::Verify { formula, n_range, against } => {
            if against != "oracle" {
                return Err(Failure::Usage(format!("unknown reference {against:?}; only \"oracle\" is available")));
            }
            let fs = FormulaSet::parse(&read_file(&formula)?)?;
            let ns: Vec<u32> = parse_range(&n_range)
                .map_err(Failure::Usage)?
                .into_iter()
                .filter(|&n| fs.formulas.first().is_some_and(|f| f.validity.contains(n as u64)))
                .collect();
            let rep = verify_formula_set(&fs, &ns);
            let mism: Vec<Value> = rep
                .mismatches
                .iter()
                .map(|(n, t, f, o)| json!({ "n": n, "t": t, "formula": f, "oracle": o }))
                .collect();
            let skipped: Vec<Value> = rep.skipped.iter().map(|(n, e)| json!({ "n": n, "reason": e })).collect();
            let j = json!({ "ns": ns, "checked": rep.checked, "mismatches": mism, "skipped": skipped });
            let mut text = format!("checked {} (n, t) pairs for n in {:?}", rep.checked, ns);
            for (n, t, f, o) in &rep.mismatches {
                text.push_str(&format!("\nmismatch n={n} t={t:?}: formula {f}, oracle {o}"));
            }
            for (n, e) in &rep.skipped {
                text.push_str(&format!("\nskipped n={n}: {e}"));
            }
            if rep.ok() {
                text.push_str("\nclean");
                Ok(out(j, text))
            } else {
                Err(Failure::Mismatch(j, text))
            }
        }
        Cmd::Table { name, t, n } => {
            let tab = paper_table(&name)?;
            let spec = TraceSpec::parse(&t, tab.q as u32)?;
            let v = eval_paper_formula(tab, &spec, n)?;
            Ok(out(json!({ "table": tab.name, "t": t, "n": n, "count": v.to_string() }), v.to_string()))
        }
        Cmd::Kloosterman { n, zeros_mod } => match zeros_mod {
            Some(m) if m <= 0 => Err(Failure::Usage("--zeros-mod must be positive".into())),
            Some(32) if n >= 5 => {
                let c = count_kloosterman_zero_mod32(n as u64)?;
                Ok(out(json!({ "n": n, "modulus": 32, "count": c.to_string() }), c.to_string()))
            }
            Some(m) => {
                let c = count_kloosterman_zero_brute(n, m)?;
                Ok(out(json!({ "n": n, "modulus": m, "count": c }), c.to_string()))
            }
            None => {
                let dist = kloosterman_distribution(n)?;
                let j: BTreeMap<String, u64> = dist.iter().map(|(k, c)| (k.to_string(), *c)).collect();
                let text: Vec<String> = dist.iter().map(|(k, c)| format!("{k:>8} {c}")).collect();
                Ok(out(json!({ "n": n, "distribution": j }), format!("{:>8} count\n{}", "K(a)", text.join("\n"))))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(b) = cli.budget {
        set_budget(b);
    }
    if let Some(j) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let json = cli.json;
    match run(cli.cmd) {
        Ok(o) => {
            if json {
                println!("{}", o.json);
            } else {
                println!("{}", o.text);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (code, kind, msg, detail) = match f {
                Failure::Lib(e) => {
                    let kind = match &e {
                        Error::Domain(_) => "domain",
                        Error::BudgetExceeded { .. } => "budget",
                        Error::NonIntegral(_) => "non_integral",
                        Error::Validation(_) => "validation",
                        Error::Validity(_) => "validity",
                        Error::Parse { .. } => "parse",
                    };
                    (1, kind, e.to_string(), Value::Null)
                }
                Failure::Usage(m) => (1, "usage", m, Value::Null),
                Failure::Mismatch(j, text) => {
                    if !json {
                        println!("{text}");
                    }
                    (2, "mismatch", "verification found mismatches".to_string(), j)
                }
            };
            if json {
                eprintln!("{}", json!({ "error": kind, "message": msg, "detail": detail }));
            } else {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}
