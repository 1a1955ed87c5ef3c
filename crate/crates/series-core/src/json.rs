//! Canonical JSON encoding for rational-coefficient series:
//! `{"vars": [...], "orders": [...], "terms": [{"exp": [..], "num": "..", "den": ".."}]}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::series::Series;
use crate::SeriesError;

pub fn rational_to_json(r: &BigRational) -> Value {
    json!({ "num": r.numer().to_string(), "den": r.denom().to_string() })
}

pub fn series_to_json(s: &Series<BigRational>) -> Value {
    let terms: Vec<Value> = s
        .iter()
        .map(|(exp, c)| {
            json!({
                "exp": exp,
                "num": c.numer().to_string(),
                "den": c.denom().to_string(),
            })
        })
        .collect();
    json!({ "vars": s.vars(), "orders": s.orders(), "terms": terms })
}

pub fn series_from_json(v: &Value) -> Result<Series<BigRational>, SeriesError> {
    let bad = |m: &str| SeriesError::BadJson(m.to_string());
    let vars: Vec<String> = v
        .get("vars")
        .and_then(|x| x.as_array())
        .ok_or_else(|| bad("missing vars"))?
        .iter()
        .map(|x| x.as_str().map(|s| s.to_string()).ok_or_else(|| bad("non-string var")))
        .collect::<Result<_, _>>()?;
    let orders: Vec<u32> = v
        .get("orders")
        .and_then(|x| x.as_array())
        .ok_or_else(|| bad("missing orders"))?
        .iter()
        .map(|x| x.as_u64().map(|n| n as u32).ok_or_else(|| bad("bad order")))
        .collect::<Result<_, _>>()?;
    if vars.len() != orders.len() {
        return Err(bad("vars/orders length mismatch"));
    }
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let mut s = Series::zero(&var_refs, &orders);
    for t in v
        .get("terms")
        .and_then(|x| x.as_array())
        .ok_or_else(|| bad("missing terms"))?
    {
        let exp: Vec<u32> = t
            .get("exp")
            .and_then(|x| x.as_array())
            .ok_or_else(|| bad("missing exp"))?
            .iter()
            .map(|x| x.as_u64().map(|n| n as u32).ok_or_else(|| bad("bad exp")))
            .collect::<Result<_, _>>()?;
        if exp.len() != vars.len() {
            return Err(bad("exp length mismatch"));
        }
        let num: BigInt = t
            .get("num")
            .and_then(|x| x.as_str())
            .ok_or_else(|| bad("missing num"))?
            .parse()
            .map_err(|_| bad("bad num"))?;
        let den: BigInt = t
            .get("den")
            .and_then(|x| x.as_str())
            .ok_or_else(|| bad("missing den"))?
            .parse()
            .map_err(|_| bad("bad den"))?;
        if den <= BigInt::from(0) {
            return Err(bad("nonpositive den"));
        }
        s.add_term(exp, BigRational::new(num, den));
    }
    Ok(s)
}
