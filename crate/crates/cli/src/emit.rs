//! JSON emission helpers shared by every subcommand: a versioned schema
//! header plus canonical encodings for rationals, matrices, and series
//! with z-Laurent coefficients. Scalar series reuse the encoding from
//! series-core so emitted payloads round-trip through it.

use num_rational::BigRational;
use serde_json::{json, Map, Value};
use series_core::{QMatrix, Series, ZLaurent};

pub const SCHEMA_VERSION: u32 = 1;

/// Wraps a payload object with the schema header every emission carries.
pub fn with_header(command: &str, payload: Value) -> Value {
    let mut out = Map::new();
    out.insert(
        "schema".to_string(),
        json!({ "name": command, "version": SCHEMA_VERSION }),
    );
    if let Value::Object(fields) = payload {
        for (k, v) in fields {
            out.insert(k, v);
        }
    } else {
        out.insert("result".to_string(), payload);
    }
    Value::Object(out)
}

pub fn rational(r: &BigRational) -> Value {
    series_core::json::rational_to_json(r)
}

pub fn rational_vec(v: &[BigRational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn matrix(m: &QMatrix) -> Value {
    Value::Array(
        (0..m.rows)
            .map(|i| Value::Array((0..m.cols).map(|j| rational(&m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn zlaurent(zl: &ZLaurent<BigRational>) -> Value {
    Value::Array(
        zl.iter()
            .map(|(e, c)| {
                json!({ "z": e, "num": c.numer().to_string(), "den": c.denom().to_string() })
            })
            .collect(),
    )
}

/// A truncated multivariate series whose coefficients are z-Laurent
/// polynomials, encoded alongside its frame of variables and orders.
pub fn laurent_series(s: &Series<ZLaurent<BigRational>>) -> Value {
    let terms: Vec<Value> = s
        .iter()
        .map(|(exp, zl)| json!({ "exp": exp, "z_terms": zlaurent(zl) }))
        .collect();
    json!({ "vars": s.vars(), "orders": s.orders(), "terms": terms })
}

pub fn scalar_series(s: &Series<BigRational>) -> Value {
    series_core::json::series_to_json(s)
}

pub fn complex(c: num_complex::Complex64) -> Value {
    json!({ "re": c.re, "im": c.im })
}
