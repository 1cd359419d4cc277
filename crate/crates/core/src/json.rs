//! JSON wire format.
//!
//! | value | shape |
//! |---|---|
//! | `MuElement` | `{"[e1,e2,...]": "p/q"}` (exponents of `m_1, m_2, ...`); a number or a string like `"2*m1^2 - m2"` is also accepted |
//! | `Weight` | `"(1,-2)"` (an integer array is also accepted) |
//! | `BorelSeries` | `{"rank", "trunc", "n", "terms": {"[a,b]": MuElement}}` |
//! | `LocalizedBorel` | `{"num": BorelSeries, "den": [["(1)", k], ...], "precision"}` |
//! | `FixedDatum` | `{"rank", "terms": [{"coef", "e": {"(1)": -1}, "y": [["(1)", d, k]]}]}`; a bare term or term array is also accepted |
//! | `ManifoldExpr` | `"point"`, `["proj", [[0],[1]]]`, `["prod", A, B]`, `["union", A, B, ...]` |
//! | `Verdict` | `{"realizable", "cone_ok", "integrality": {"status", "precision", "witness"?}, "constant_term", "components"}` |

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::borel::{BorelSeries, CMonomial, LocalizedBorel, Obstruction, Weight};
use crate::error::{Error, Result};
use crate::fixedring::{FixedDatum, FixedMonomial};
use crate::geometry::ManifoldExpr;
use crate::lazard::{MuElement, MuMonomial};
use crate::realizability::{ComponentVerdict, Verdict};
use crate::sexpr::parse_mu;

fn malformed<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Malformed(msg.into()))
}

/// Parse JSON text, reporting syntax errors by byte offset.
pub fn parse(src: &str) -> Result<Value> {
    serde_json::from_str(src).map_err(|e| {
        let pos = src.split_inclusive('\n').take(e.line().saturating_sub(1)).map(str::len).sum::<usize>()
            + e.column().saturating_sub(1);
        Error::Parse { pos, msg: e.to_string() }
    })
}

fn index_key(exps: &[u32]) -> String {
    let parts: Vec<String> = exps.iter().map(|e| e.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn parse_index_key(k: &str) -> Result<Vec<u32>> {
    let inner = k
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Malformed(format!("bad exponent key '{}'", k)))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Malformed(format!("bad exponent key '{}'", k))))
        .collect()
}

pub fn mu_to_json(x: &MuElement) -> Value {
    let map: Map<String, Value> =
        x.terms().map(|(m, c)| (index_key(m.exponents()), Value::String(c.to_string()))).collect();
    Value::Object(map)
}

fn rational_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => s.trim().parse().or_else(|_| malformed(format!("bad rational '{}'", s))),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(BigRational::from_integer(i.into())),
            None => malformed(format!("non-integer number {}; write rationals as \"p/q\"", n)),
        },
        _ => malformed("expected a rational"),
    }
}

pub fn mu_from_json(v: &Value, n: u32) -> Result<MuElement> {
    match v {
        Value::Object(map) => {
            let mut out = MuElement::zero(n);
            for (k, c) in map {
                out.add_term(MuMonomial::new(parse_index_key(k)?), rational_from_json(c)?);
            }
            Ok(out)
        }
        Value::Number(_) => Ok(MuElement::from_rational(rational_from_json(v)?, n)),
        Value::String(s) => parse_mu(s, n),
        _ => malformed("expected a coefficient object, number or string"),
    }
}

pub fn weight_to_json(w: &Weight) -> Value {
    Value::String(w.to_string())
}

pub fn weight_from_json(v: &Value) -> Result<Weight> {
    match v {
        Value::String(s) => s.parse(),
        Value::Array(xs) => Weight::new(
            xs.iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Malformed("weight entries must be integers".into())))
                .collect::<Result<_>>()?,
        ),
        _ => malformed("expected a weight"),
    }
}

pub fn borel_to_json(s: &BorelSeries) -> Value {
    let terms: Map<String, Value> = s.terms().map(|(m, c)| (index_key(m), mu_to_json(c))).collect();
    json!({"rank": s.rank(), "trunc": s.trunc(), "n": s.coeff_trunc(), "terms": terms})
}

fn get_u64(v: &Value, key: &str) -> Result<u64> {
    v.get(key).and_then(Value::as_u64).ok_or_else(|| Error::Malformed(format!("missing integer field '{}'", key)))
}

pub fn borel_from_json(v: &Value) -> Result<BorelSeries> {
    let rank = get_u64(v, "rank")? as usize;
    let trunc = get_u64(v, "trunc")? as u32;
    let n = get_u64(v, "n")? as u32;
    let mut terms: Vec<(CMonomial, MuElement)> = Vec::new();
    if let Some(map) = v.get("terms").and_then(Value::as_object) {
        for (k, c) in map {
            let mut alpha = parse_index_key(k)?;
            if alpha.len() > rank {
                return Err(Error::RankMismatch(alpha.len(), rank));
            }
            alpha.resize(rank, 0);
            terms.push((alpha, mu_from_json(c, n)?));
        }
    }
    BorelSeries::from_terms(rank, trunc, n, terms)
}

pub fn localized_to_json(x: &LocalizedBorel) -> Value {
    let den: Vec<Value> = x.denominator().iter().map(|(w, k)| json!([w.to_string(), k])).collect();
    json!({"num": borel_to_json(x.numerator()), "den": den, "precision": x.precision()})
}

pub fn localized_from_json(v: &Value) -> Result<LocalizedBorel> {
    let num = borel_from_json(v.get("num").ok_or_else(|| Error::Malformed("missing 'num'".into()))?)?;
    let mut den = BTreeMap::new();
    for pair in v.get("den").and_then(Value::as_array).into_iter().flatten() {
        let (w, k) = match pair.as_array().map(Vec::as_slice) {
            Some([w, k]) => (weight_from_json(w)?, k.as_u64()),
            _ => return malformed("denominator entries are [weight, exponent]"),
        };
        let k = k.ok_or_else(|| Error::Malformed("denominator exponent must be a nonnegative integer".into()))?;
        *den.entry(w).or_insert(0) += k as u32;
    }
    LocalizedBorel::from_parts(num, den)
}

pub fn datum_to_json(x: &FixedDatum) -> Value {
    let terms: Vec<Value> = x
        .terms()
        .map(|(m, c)| {
            let e: Map<String, Value> = m.e_exponents().iter().map(|(w, k)| (w.to_string(), json!(k))).collect();
            let y: Vec<Value> = m.y_exponents().iter().map(|((w, d), k)| json!([w.to_string(), d, k])).collect();
            json!({"coef": mu_to_json(c), "e": e, "y": y})
        })
        .collect();
    json!({"rank": x.rank(), "terms": terms})
}

fn term_from_json(v: &Value, rank: usize, n: u32) -> Result<FixedDatum> {
    let obj = v.as_object().ok_or_else(|| Error::Malformed("a term is a JSON object".into()))?;
    if let Some(bad) = obj.keys().find(|k| !matches!(k.as_str(), "coef" | "e" | "y")) {
        return malformed(format!("unknown term field '{}'", bad));
    }
    let coef = match obj.get("coef") {
        Some(c) => mu_from_json(c, n)?,
        None => MuElement::one(n),
    };
    let mut m = FixedMonomial::one();
    if let Some(e) = obj.get("e") {
        let e = e.as_object().ok_or_else(|| Error::Malformed("'e' maps weights to exponents".into()))?;
        for (w, k) in e {
            let k = k.as_i64().ok_or_else(|| Error::Malformed("Euler exponents are integers".into()))?;
            m = m.mul(&FixedMonomial::euler(w.parse()?, k as i32));
        }
    }
    if let Some(y) = obj.get("y") {
        let y = y.as_array().ok_or_else(|| Error::Malformed("'y' is a list of [weight, d, k?]".into()))?;
        for entry in y {
            let parts = entry.as_array().map(Vec::as_slice).unwrap_or(&[]);
            let (w, d, k) = match parts {
                [w, d] => (w, d.as_u64(), Some(1)),
                [w, d, k] => (w, d.as_u64(), k.as_u64()),
                _ => return malformed("'y' entries are [weight, d] or [weight, d, k]"),
            };
            let (Some(d), Some(k)) = (d, k) else {
                return malformed("Y level and exponent are nonnegative integers");
            };
            m = m.mul(&FixedMonomial::y(weight_from_json(w)?, d as u32, k as u32)?);
        }
    }
    FixedDatum::term(rank, m, coef)
}

/// Parse a datum; `rank` is used when the JSON does not state one.
pub fn datum_from_json(v: &Value, rank: usize, n: u32) -> Result<FixedDatum> {
    let (rank, terms): (usize, Vec<&Value>) = match v {
        Value::Object(map) if map.contains_key("terms") => {
            let r = match map.get("rank") {
                Some(r) => r.as_u64().ok_or_else(|| Error::Malformed("'rank' is an integer".into()))? as usize,
                None => rank,
            };
            let ts = map["terms"].as_array().ok_or_else(|| Error::Malformed("'terms' is a list".into()))?;
            (r, ts.iter().collect())
        }
        Value::Object(_) => (rank, vec![v]),
        Value::Array(ts) => (rank, ts.iter().collect()),
        _ => return malformed("expected a datum object, term object or term list"),
    };
    terms.into_iter().try_fold(FixedDatum::zero(rank, n), |acc, t| acc.add(&term_from_json(t, rank, n)?))
}

pub fn manifold_to_json(m: &ManifoldExpr) -> Value {
    match m {
        ManifoldExpr::Point => json!("point"),
        ManifoldExpr::Proj(lines) => json!(["proj", lines]),
        ManifoldExpr::Product(a, b) => json!(["prod", manifold_to_json(a), manifold_to_json(b)]),
        ManifoldExpr::DisjointUnion(parts) => {
            let mut v = vec![json!("union")];
            v.extend(parts.iter().map(manifold_to_json));
            Value::Array(v)
        }
    }
}

pub fn manifold_from_json(v: &Value) -> Result<ManifoldExpr> {
    match v {
        Value::String(s) if s == "point" => Ok(ManifoldExpr::Point),
        Value::Array(items) => match items.split_first() {
            Some((Value::String(head), args)) => match (head.as_str(), args) {
                ("proj", [Value::Array(lines)]) => {
                    let lines = lines
                        .iter()
                        .map(|l| {
                            l.as_array()
                                .and_then(|xs| xs.iter().map(Value::as_i64).collect::<Option<Vec<_>>>())
                                .ok_or_else(|| Error::Malformed("proj lines are integer arrays".into()))
                        })
                        .collect::<Result<_>>()?;
                    Ok(ManifoldExpr::Proj(lines))
                }
                ("prod", [first, rest @ ..]) => rest.iter().try_fold(manifold_from_json(first)?, |acc, p| {
                    Ok(ManifoldExpr::product(acc, manifold_from_json(p)?))
                }),
                ("union", parts) => {
                    Ok(ManifoldExpr::DisjointUnion(parts.iter().map(manifold_from_json).collect::<Result<_>>()?))
                }
                (other, _) => malformed(format!("bad '{}' expression", other)),
            },
            _ => malformed("manifold arrays start with \"proj\", \"prod\" or \"union\""),
        },
        _ => malformed("expected \"point\" or a manifold array"),
    }
}

pub fn obstruction_to_json(o: &Obstruction) -> Value {
    json!({
        "kind": o.kind.to_string(),
        "c_degree": o.degree,
        "monomial": o.monomial,
        "coefficient": mu_to_json(&o.coefficient),
    })
}

fn component_to_json(c: &ComponentVerdict) -> Value {
    let mut v = json!({
        "degree": c.degree,
        "cone_ok": c.cone_ok,
        "status": if c.integrality_ok() { "pass" } else { "fail" },
        "precision": c.precision,
    });
    if let Some(w) = c.witness() {
        v["witness"] = obstruction_to_json(w);
    }
    v
}

pub fn verdict_to_json(v: &Verdict, n: u32) -> Value {
    let mut integrality = json!({
        "status": if v.integrality_ok() { "pass" } else { "fail" },
        "precision": v.precision(),
    });
    if let Some((deg, w)) = v.witness() {
        let mut wj = obstruction_to_json(w);
        wj["degree"] = json!(deg);
        integrality["witness"] = wj;
    }
    json!({
        "realizable": v.realizable(),
        "cone_ok": v.cone_ok(),
        "integrality": integrality,
        "constant_term": v.constant_term(n).map(|c| mu_to_json(&c)),
        "requested_precision": v.requested,
        "components": v.components.iter().map(component_to_json).collect::<Vec<_>>(),
    })
}
