//! JSON reading and writing for instances, price vectors and equilibria.
//!
//! Numeric entries may be JSON numbers or strings holding exact rationals
//! (`"9/19"`, `"0.25"`). Instance entries may also be the string `"-inf"`,
//! which is replaced by the instance's `neg_infinity` value.

use serde_json::{json, Map, Value};

use super::{Allocation, EquilibriumPoint, MarketInstance, PriceVector, Rat, Scalar};
use crate::error::{Error, Result};

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn scalar(v: &Value, what: &str) -> Result<Rat> {
    match v {
        Value::Number(n) => n.to_string().parse(),
        Value::String(s) => s.parse(),
        other => Err(Error::Parse(format!(
            "{what}: expected a number, got {other}"
        ))),
    }
}

fn is_neg_inf(v: &Value) -> bool {
    matches!(v, Value::String(s) if matches!(s.trim(), "-inf" | "-infinity" | "-Infinity"))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what}: expected an array")))
}

fn matrix(
    v: &Value,
    what: &str,
    mut entry: impl FnMut(&Value) -> Result<Rat>,
) -> Result<Vec<Vec<Rat>>> {
    array(v, what)?
        .iter()
        .map(|row| array(row, what)?.iter().map(&mut entry).collect())
        .collect()
}

pub fn load_instance(text: &str) -> Result<MarketInstance> {
    let doc = parse_json(text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("instance: expected a JSON object".into()))?;
    let neg_infinity = match obj.get("neg_infinity") {
        None | Some(Value::Null) => Rat::from_int(MarketInstance::DEFAULT_NEG_INFINITY),
        Some(v) => -scalar(v, "neg_infinity")?.abs(),
    };
    let utilities = obj
        .get("utilities")
        .ok_or_else(|| Error::Parse("instance: missing \"utilities\"".into()))?;
    let utilities = matrix(utilities, "utilities", |v| {
        if is_neg_inf(v) {
            Ok(neg_infinity.clone())
        } else {
            scalar(v, "utilities")
        }
    })?;
    if let Some(n) = obj.get("n") {
        let n = n
            .as_u64()
            .ok_or_else(|| Error::Parse("instance: \"n\" must be a positive integer".into()))?;
        if n as usize != utilities.len() {
            return Err(Error::InvalidInstance(format!(
                "\"n\" is {n} but the utility matrix has {} rows",
                utilities.len()
            )));
        }
    }
    MarketInstance::with_neg_infinity(utilities, neg_infinity)
}

pub fn save_instance(inst: &MarketInstance) -> String {
    let utilities: Vec<Vec<Value>> = inst
        .utilities()
        .iter()
        .map(|row| row.iter().map(Scalar::to_json).collect())
        .collect();
    let neg_inf = inst.neg_infinity();
    let neg_inf = if neg_inf.is_integer() {
        json!(neg_inf.to_f64() as i64)
    } else {
        neg_inf.to_json()
    };
    let doc = json!({
        "n": inst.n(),
        "utilities": utilities,
        "neg_infinity": neg_inf,
    });
    serde_json::to_string_pretty(&doc).expect("serializing a JSON value cannot fail")
}

/// Parsed equilibrium document with exact entries. Use
/// [`EquilibriumPoint::to_real`] for binary64 checks.
pub type EquilibriumFile = EquilibriumPoint<Rat>;

pub fn load_equilibrium(text: &str) -> Result<EquilibriumFile> {
    let doc = parse_json(text)?;
    let prices = doc
        .get("prices")
        .ok_or_else(|| Error::Parse("equilibrium: missing \"prices\"".into()))?;
    let allocation = doc
        .get("allocation")
        .ok_or_else(|| Error::Parse("equilibrium: missing \"allocation\"".into()))?;
    let prices = array(prices, "prices")?
        .iter()
        .map(|v| scalar(v, "prices"))
        .collect::<Result<Vec<_>>>()?;
    let allocation = matrix(allocation, "allocation", |v| scalar(v, "allocation"))?;
    EquilibriumPoint::new(PriceVector::new(prices)?, Allocation::new(allocation)?)
}

/// Accepts either a bare array or an object with a `"prices"` array.
pub fn load_prices(text: &str) -> Result<PriceVector<Rat>> {
    let doc = parse_json(text)?;
    let arr = match &doc {
        Value::Array(_) => &doc,
        Value::Object(o) => o
            .get("prices")
            .ok_or_else(|| Error::Parse("prices: missing \"prices\"".into()))?,
        _ => return Err(Error::Parse("prices: expected an array or object".into())),
    };
    let prices = array(arr, "prices")?
        .iter()
        .map(|v| scalar(v, "prices"))
        .collect::<Result<Vec<_>>>()?;
    PriceVector::new(prices)
}

pub fn equilibrium_to_json<S: Scalar>(point: &EquilibriumPoint<S>) -> Value {
    let mut m = Map::new();
    m.insert(
        "prices".into(),
        Value::Array(
            point
                .prices
                .as_slice()
                .iter()
                .map(Scalar::to_json)
                .collect(),
        ),
    );
    m.insert(
        "allocation".into(),
        Value::Array(
            point
                .allocation
                .rows()
                .iter()
                .map(|r| Value::Array(r.iter().map(Scalar::to_json).collect()))
                .collect(),
        ),
    );
    Value::Object(m)
}

pub fn save_equilibrium<S: Scalar>(point: &EquilibriumPoint<S>) -> String {
    serde_json::to_string_pretty(&equilibrium_to_json(point))
        .expect("serializing a JSON value cannot fail")
}
