//! Parsing of JSON input files and inline value syntax: rationals as
//! `{"num": "...", "den": "..."}` objects or `a/b` strings, matrices as
//! row arrays, plus the file formats consumed by the quantize, ancestor,
//! and reconstruct subcommands.

use ancestor::{canonical_gram, SemisimpleData};
use fermat_weights::Narrow;
use givental_fock::{TamePotential, UpperTriangularR};
use j_reconstruction::BCoefficient;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::Value;
use series_core::QMatrix;
use std::path::Path;

use crate::CliError;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| config(format!("{} is not valid JSON: {e}", path.display())))
}

/// Accepts `"a/b"`, `"a"`, a JSON integer, or `{"num": "...", "den": "..."}`.
pub fn rational(v: &Value) -> Result<BigRational, CliError> {
    match v {
        Value::String(s) => rational_str(s),
        Value::Number(n) => {
            let i = n
                .as_i64()
                .ok_or_else(|| config(format!("expected an integer, got {n}")))?;
            Ok(BigRational::from_integer(i.into()))
        }
        Value::Object(o) => {
            let field = |name: &str| -> Result<BigInt, CliError> {
                o.get(name)
                    .and_then(|x| x.as_str())
                    .ok_or_else(|| config(format!("rational object is missing \"{name}\"")))?
                    .parse()
                    .map_err(|_| config(format!("bad integer in \"{name}\"")))
            };
            let den = field("den")?;
            if den <= BigInt::zero() {
                return Err(config("denominator must be positive"));
            }
            Ok(BigRational::new(field("num")?, den))
        }
        other => Err(config(format!("cannot parse {other} as a rational"))),
    }
}

pub fn rational_str(s: &str) -> Result<BigRational, CliError> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| config(format!("bad rational numerator in \"{s}\"")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| config(format!("bad rational denominator in \"{s}\"")))?;
    if d <= BigInt::zero() {
        return Err(config(format!("denominator must be positive in \"{s}\"")));
    }
    Ok(BigRational::new(n, d))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a [Value], CliError> {
    v.as_array()
        .map(|a| a.as_slice())
        .ok_or_else(|| config(format!("expected an array for {what}")))
}

pub fn rational_vec(v: &Value, what: &str) -> Result<Vec<BigRational>, CliError> {
    array(v, what)?.iter().map(rational).collect()
}

pub fn matrix(v: &Value, what: &str) -> Result<QMatrix, CliError> {
    let rows: Vec<Vec<BigRational>> = array(v, what)?
        .iter()
        .map(|row| rational_vec(row, what))
        .collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(config(format!("{what} must have at least one row")));
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(config(format!("{what} has ragged rows")));
    }
    Ok(QMatrix::from_rows(rows))
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value, CliError> {
    v.get(name)
        .ok_or_else(|| config(format!("missing field \"{name}\"")))
}

/// `{"gram": [[...]], "mats": [[[...]]]}` with mats[k] the z^k coefficient.
pub fn upper_triangular_r(v: &Value) -> Result<UpperTriangularR, CliError> {
    let gram = matrix(field(v, "gram")?, "gram")?;
    let mats: Vec<QMatrix> = array(field(v, "mats")?, "mats")?
        .iter()
        .map(|m| matrix(m, "mats entry"))
        .collect::<Result<_, _>>()?;
    UpperTriangularR::new(gram, mats).map_err(|e| config(format!("invalid series: {e}")))
}

/// `{"rank": n, "genus_cap": g, "gram": [[...]], "unit": [...],
///   "terms": [{"genus": g, "key": [[jet, slot], ...], "value": rat}]}`.
pub fn potential(v: &Value) -> Result<TamePotential, CliError> {
    let rank = field(v, "rank")?
        .as_u64()
        .ok_or_else(|| config("rank must be a nonnegative integer"))? as usize;
    let genus_cap = field(v, "genus_cap")?
        .as_u64()
        .ok_or_else(|| config("genus_cap must be a nonnegative integer"))? as u32;
    let gram = matrix(field(v, "gram")?, "gram")?;
    let unit = rational_vec(field(v, "unit")?, "unit")?;
    let mut f = TamePotential::new(rank, genus_cap, gram, unit)
        .map_err(|e| config(format!("invalid potential frame: {e}")))?;
    for term in array(field(v, "terms")?, "terms")? {
        let genus = field(term, "genus")?
            .as_u64()
            .ok_or_else(|| config("term genus must be a nonnegative integer"))?
            as u32;
        let key: Vec<(u32, usize)> = array(field(term, "key")?, "term key")?
            .iter()
            .map(|pair| {
                let p = array(pair, "key pair")?;
                if p.len() != 2 {
                    return Err(config("key pairs are [jet, slot]"));
                }
                let jet = p[0].as_u64().ok_or_else(|| config("bad jet"))? as u32;
                let slot = p[1].as_u64().ok_or_else(|| config("bad slot"))? as usize;
                Ok((jet, slot))
            })
            .collect::<Result<_, _>>()?;
        let value = rational(field(term, "value")?)?;
        f.add_term(genus, key, value)
            .map_err(|e| config(format!("invalid potential term: {e}")))?;
    }
    Ok(f)
}

pub fn potential_to_json(f: &TamePotential) -> Value {
    let terms: Vec<Value> = f
        .iter()
        .map(|((genus, key), value)| {
            serde_json::json!({
                "genus": genus,
                "key": key.iter().map(|&(k, s)| vec![k as u64, s as u64]).collect::<Vec<_>>(),
                "value": crate::emit::rational(value),
            })
        })
        .collect();
    serde_json::json!({
        "rank": f.rank(),
        "genus_cap": f.genus_cap(),
        "gram": crate::emit::matrix(f.gram()),
        "unit": crate::emit::rational_vec(f.unit()),
        "terms": terms,
    })
}

/// `{"u": [...], "delta": [...], "psi": [[...]], "r_mats": [[[...]]]}`;
/// the pairing for the series is the canonical one attached to delta.
pub fn semisimple_data(v: &Value) -> Result<SemisimpleData, CliError> {
    let u = rational_vec(field(v, "u")?, "u")?;
    let delta = rational_vec(field(v, "delta")?, "delta")?;
    let psi = matrix(field(v, "psi")?, "psi")?;
    let mats: Vec<QMatrix> = array(field(v, "r_mats")?, "r_mats")?
        .iter()
        .map(|m| matrix(m, "r_mats entry"))
        .collect::<Result<_, _>>()?;
    let r = UpperTriangularR::new(canonical_gram(&delta), mats)
        .map_err(|e| config(format!("invalid series: {e}")))?;
    SemisimpleData::new(u, delta, psi, r).map_err(|e| config(format!("invalid data: {e}")))
}

/// `[{"t_slots": [{"jet": j, "label": [...], "mult": c}], "z_power": -1,
///    "label": [...], "value": rat}, ...]`.
pub fn b_seed(v: &Value) -> Result<Vec<BCoefficient>, CliError> {
    array(v, "seed")?
        .iter()
        .map(|entry| {
            let t_slots = array(field(entry, "t_slots")?, "t_slots")?
                .iter()
                .map(|slot| {
                    let jet = field(slot, "jet")?
                        .as_u64()
                        .ok_or_else(|| config("bad jet"))? as u32;
                    let label = nums(field(slot, "label")?)?;
                    let mult = field(slot, "mult")?
                        .as_u64()
                        .ok_or_else(|| config("bad mult"))? as u32;
                    Ok((jet, Narrow { nums: label }, mult))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(BCoefficient {
                t_slots,
                z_power: field(entry, "z_power")?
                    .as_i64()
                    .ok_or_else(|| config("bad z_power"))?,
                label: Narrow { nums: nums(field(entry, "label")?)? },
                value: rational(field(entry, "value")?)?,
            })
        })
        .collect()
}

fn nums(v: &Value) -> Result<Vec<u64>, CliError> {
    array(v, "label")?
        .iter()
        .map(|x| x.as_u64().ok_or_else(|| config("bad label entry")))
        .collect()
}

/// A continuation path as a list of `[re, im]` waypoints.
pub fn waypoints(v: &Value) -> Result<Vec<Complex64>, CliError> {
    array(v, "path")?
        .iter()
        .map(|p| {
            let pair = array(p, "waypoint")?;
            if pair.len() != 2 {
                return Err(config("waypoints are [re, im] pairs"));
            }
            let re = pair[0].as_f64().ok_or_else(|| config("bad waypoint"))?;
            let im = pair[1].as_f64().ok_or_else(|| config("bad waypoint"))?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}
