//! Instance documents and machine-readable reports.
//!
//! Integers are written as JSON numbers while they stay within `2^53` and
//! as decimal strings beyond that; both forms are accepted on input.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::engine::Analysis;
use crate::lattice::{GramMatrix3, LatticeError, ShiftVector};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{field}: {message}")]
pub struct InputError {
    pub field: String,
    pub message: String,
}

impl InputError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

/// Upper triangle of a Gram matrix plus a shift `(n1, n2, n3) / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceDocument {
    pub label: Option<String>,
    pub gram: [i128; 6],
    pub numerators: [i128; 3],
    pub denominator: i128,
}

const SAFE: i128 = 1 << 53;

/// JSON form of an integer.
pub fn int_value(v: i128) -> Value {
    if v.abs() <= SAFE {
        json!(v as i64)
    } else {
        Value::String(v.to_string())
    }
}

fn parse_int(v: &Value, field: &str) -> Result<i128, InputError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(i128::from)
            .ok_or_else(|| InputError::new(field, format!("{n} is not an integer"))),
        Value::String(s) => s.trim().parse().map_err(|_| InputError::new(field, format!("{s:?} is not an integer"))),
        other => Err(InputError::new(field, format!("expected an integer, found {other}"))),
    }
}

fn parse_array<const N: usize>(v: Option<&Value>, field: &str) -> Result<[i128; N], InputError> {
    let arr = v
        .and_then(Value::as_array)
        .ok_or_else(|| InputError::new(field, format!("expected an array of {N} integers")))?;
    if arr.len() != N {
        return Err(InputError::new(field, format!("expected {N} entries, found {}", arr.len())));
    }
    let mut out = [0i128; N];
    for (k, item) in arr.iter().enumerate() {
        out[k] = parse_int(item, &format!("{field}[{k}]"))?;
    }
    Ok(out)
}

impl InstanceDocument {
    pub fn from_json(v: &Value) -> Result<Self, InputError> {
        let obj = v.as_object().ok_or_else(|| InputError::new("document", "expected a JSON object"))?;
        let label = match obj.get("label") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(InputError::new("label", "expected a string")),
        };
        let gram = parse_array::<6>(obj.get("gram"), "gram")?;
        let shift = obj.get("shift").and_then(Value::as_object).ok_or_else(|| InputError::new("shift", "expected an object"))?;
        let numerators = parse_array::<3>(shift.get("num"), "shift.num")?;
        let denominator = parse_int(shift.get("den").ok_or_else(|| InputError::new("shift.den", "missing"))?, "shift.den")?;
        Ok(Self { label, gram, numerators, denominator })
    }

    pub fn from_json_str(s: &str) -> Result<Self, InputError> {
        let v: Value = serde_json::from_str(s).map_err(|e| InputError::new("document", e.to_string()))?;
        Self::from_json(&v)
    }

    /// Parses the columns `g11,g12,g13,g22,g23,g33,n1,n2,n3,den[,label]`.
    pub fn from_fields(fields: &[&str]) -> Result<Self, InputError> {
        const NAMES: [&str; 10] = ["g11", "g12", "g13", "g22", "g23", "g33", "n1", "n2", "n3", "den"];
        if fields.len() != 10 && fields.len() != 11 {
            return Err(InputError::new("row", format!("expected 10 or 11 columns, found {}", fields.len())));
        }
        let mut ints = [0i128; 10];
        for (k, name) in NAMES.iter().enumerate() {
            ints[k] = fields[k].trim().parse().map_err(|_| InputError::new(*name, format!("{:?} is not an integer", fields[k])))?;
        }
        let label = fields.get(10).map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
        Ok(Self {
            label,
            gram: [ints[0], ints[1], ints[2], ints[3], ints[4], ints[5]],
            numerators: [ints[6], ints[7], ints[8]],
            denominator: ints[9],
        })
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        if let Some(l) = &self.label {
            obj.insert("label".into(), Value::String(l.clone()));
        }
        obj.insert("gram".into(), Value::Array(self.gram.iter().map(|&v| int_value(v)).collect()));
        obj.insert(
            "shift".into(),
            json!({
                "num": self.numerators.iter().map(|&v| int_value(v)).collect::<Vec<_>>(),
                "den": int_value(self.denominator),
            }),
        );
        Value::Object(obj)
    }

    pub fn parse(&self) -> Result<(GramMatrix3<i128>, ShiftVector<i128>), InputError> {
        let gram = GramMatrix3::from_upper(self.gram).map_err(|e| InputError::new("gram", e.to_string()))?;
        let shift = ShiftVector::new(self.numerators, self.denominator).map_err(|e: LatticeError| InputError::new("shift", e.to_string()))?;
        Ok((gram, shift))
    }

    /// Document for an existing pair.
    pub fn from_parts(gram: &GramMatrix3<i128>, shift: &ShiftVector<i128>, label: Option<String>) -> Self {
        Self { label, gram: gram.upper(), numerators: *shift.numerators(), denominator: *shift.denominator() }
    }
}

fn opt_int(v: Option<i128>) -> Value {
    v.map(int_value).unwrap_or(Value::Null)
}

/// Report for one analyzed instance. `instance` is the submitted document.
pub fn report(analysis: &Analysis, instance: &InstanceDocument) -> Value {
    let mut obj = Map::new();
    obj.insert("decision".into(), serde_json::to_value(analysis.decision).expect("plain enum"));
    obj.insert("branch".into(), analysis.branch.map(|b| Value::String(b.to_string())).unwrap_or(Value::Null));
    if let Some(r) = &analysis.rejection {
        obj.insert("rejection".into(), Value::String(r.clone()));
    }
    if let Some(s) = analysis.service_assessment {
        obj.insert("service_assessment".into(), serde_json::to_value(s).expect("plain enum"));
    }
    obj.insert("p".into(), opt_int(analysis.p.map(|p| p as i128)));
    obj.insert("alpha".into(), analysis.alpha.map(|a| json!(a)).unwrap_or(Value::Null));
    obj.insert("epsilon".into(), opt_int(analysis.epsilon));
    obj.insert("dN".into(), int_value(analysis.dn));
    obj.insert("rad".into(), int_value(analysis.rad as i128));
    obj.insert("rad_prime".into(), opt_int(analysis.rad_prime.map(|v| v as i128)));
    obj.insert("trace".into(), serde_json::to_value(&analysis.trace).expect("plain data"));
    let locals: Vec<Value> = analysis
        .locals
        .iter()
        .map(|r| {
            json!({
                "prime": int_value(r.prime as i128),
                "universal": r.universal,
                "missed_class": r.missed_class.map(|c| int_value(c.representative as i128)),
                "precision_used": r.precision_used,
                "method": r.method,
            })
        })
        .collect();
    obj.insert("locals".into(), Value::Array(locals));
    if let Some(w) = analysis.witness {
        obj.insert("witness".into(), Value::Array(w.iter().map(|&v| int_value(v)).collect()));
    }
    if let Some(f) = &analysis.family {
        obj.insert(
            "exceptions".into(),
            json!({
                "t": int_value(f.t as i128),
                "mu": int_value(f.mu as i128),
                "rho": int_value(f.rho as i128),
                "modulus": int_value(f.modulus as i128),
                "split_condition": f.split_condition,
                "primes": analysis.predictions.iter().map(|p| int_value(p.q as i128)).collect::<Vec<_>>(),
                "values": analysis.predictions.iter().map(|p| int_value(p.value as i128)).collect::<Vec<_>>(),
            }),
        );
    }
    obj.insert("instance".into(), instance.to_json());
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::analyze;

    #[test]
    fn documents_round_trip() {
        let doc = InstanceDocument::from_json_str(r#"{"label":"x","gram":[49,0,0,7,0,"14"],"shift":{"num":[1,0,0],"den":7}}"#).unwrap();
        assert_eq!(doc.gram, [49, 0, 0, 7, 0, 14]);
        let again = InstanceDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(doc, again);
        let big = InstanceDocument { label: None, gram: [1 << 60, 0, 0, 1, 0, 1], numerators: [0; 3], denominator: 1 };
        assert_eq!(big.to_json()["gram"][0], Value::String((1i128 << 60).to_string()));
        assert_eq!(InstanceDocument::from_json(&big.to_json()).unwrap(), big);
    }

    #[test]
    fn field_errors() {
        let e = InstanceDocument::from_json_str(r#"{"gram":[1,0,0,1,0],"shift":{"num":[0,0,0],"den":1}}"#).unwrap_err();
        assert_eq!(e.field, "gram");
        let e = InstanceDocument::from_json_str(r#"{"gram":[1,0,0,1,0,"a"],"shift":{"num":[0,0,0],"den":1}}"#).unwrap_err();
        assert_eq!(e.field, "gram[5]");
        let e = InstanceDocument::from_fields(&["1", "0", "0", "1", "0", "1", "0", "0", "x", "1"]).unwrap_err();
        assert_eq!(e.field, "n3");
        let doc = InstanceDocument::from_fields(&["1", "2", "0", "1", "0", "1", "0", "0", "0", "1"]).unwrap();
        assert_eq!(doc.parse().unwrap_err().field, "gram");
    }

    #[test]
    fn report_keys() {
        let doc = InstanceDocument::from_fields(&["2450", "0", "0", "791", "0", "49", "1", "0", "0", "7", "f"]).unwrap();
        let (g, s) = doc.parse().unwrap();
        let r = report(&analyze(&g, &s).unwrap(), &doc);
        assert_eq!(r["decision"], "NotAlmostUniversal");
        assert_eq!(r["branch"], "2d-fails");
        assert_eq!(r["exceptions"]["t"], 226);
        assert_eq!(r["exceptions"]["primes"][0], 23);
        let doc2 = InstanceDocument::from_json(&r["instance"]).unwrap();
        let (g2, s2) = doc2.parse().unwrap();
        assert_eq!(report(&analyze(&g2, &s2).unwrap(), &doc2), r);
    }
}
