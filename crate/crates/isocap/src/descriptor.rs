//! JSON descriptors for test sets.
//!
//! ```json
//! {"shape": "cap", "pole_axis": 0, "theta": 1.2}
//! {"shape": "cap", "pole": [0.6, 0.8, 0.0], "theta": 0.4}
//! {"shape": "band", "pole_axis": 0, "theta1": 0.9, "theta2": 1.3}
//! [{"shape": "cap", "pole_axis": 0, "theta": 0.6},
//!  {"shape": "cap", "pole_axis": 0, "negative": true, "theta": 0.6}]
//! {"complement": {"shape": "cap", "pole_axis": 0, "theta": 1.9}}
//! ```
//!
//! A bare array is a union of caps. `"negative": true` flips an axis pole.

use isocap_core::{CapSpec, Pole, Shape, Sphere, SphereSet};
use serde_json::{json, Map, Value};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq)]
pub enum PoleDescriptor {
    Axis { index: usize, negative: bool },
    Direction(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapDescriptor {
    pub pole: PoleDescriptor,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    Cap(CapDescriptor),
    Band {
        pole: PoleDescriptor,
        theta1: f64,
        theta2: f64,
    },
    Union(Vec<CapDescriptor>),
    Complement(Box<SetDescriptor>),
}

fn bad(msg: impl Into<String>) -> AppError {
    AppError::Descriptor(msg.into())
}

fn number(obj: &Map<String, Value>, key: &str) -> AppResult<f64> {
    obj.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| bad(format!("missing or non-numeric \"{key}\"")))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str]) -> AppResult<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(bad(format!("unknown key \"{k}\""))),
        None => Ok(()),
    }
}

fn pole_from(obj: &Map<String, Value>) -> AppResult<PoleDescriptor> {
    let negative = match obj.get("negative") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| bad("\"negative\" must be a boolean"))?,
    };
    match (obj.get("pole_axis"), obj.get("pole")) {
        (Some(a), None) => {
            let index = a
                .as_u64()
                .ok_or_else(|| bad("\"pole_axis\" must be a nonnegative integer"))?;
            Ok(PoleDescriptor::Axis {
                index: index as usize,
                negative,
            })
        }
        (None, Some(Value::Array(xs))) => {
            if negative {
                return Err(bad("\"negative\" only applies to \"pole_axis\""));
            }
            let v = xs
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| bad("\"pole\" entries must be numbers")))
                .collect::<AppResult<Vec<f64>>>()?;
            Ok(PoleDescriptor::Direction(v))
        }
        (None, Some(_)) => Err(bad("\"pole\" must be an array of numbers")),
        (Some(_), Some(_)) => Err(bad("give either \"pole_axis\" or \"pole\", not both")),
        (None, None) => Err(bad("missing \"pole_axis\" or \"pole\"")),
    }
}

fn cap_from(v: &Value) -> AppResult<CapDescriptor> {
    match SetDescriptor::from_value(v)? {
        SetDescriptor::Cap(c) => Ok(c),
        _ => Err(bad("union members must be caps")),
    }
}

impl SetDescriptor {
    pub fn parse(text: &str) -> AppResult<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> AppResult<Self> {
        match v {
            Value::Array(items) => {
                if items.is_empty() {
                    return Err(bad("empty union"));
                }
                Ok(SetDescriptor::Union(
                    items.iter().map(cap_from).collect::<AppResult<_>>()?,
                ))
            }
            Value::Object(obj) => {
                if let Some(inner) = obj.get("complement") {
                    check_keys(obj, &["complement"])?;
                    return Ok(SetDescriptor::Complement(Box::new(Self::from_value(inner)?)));
                }
                let shape = obj
                    .get("shape")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("missing \"shape\""))?;
                match shape {
                    "cap" => {
                        check_keys(obj, &["shape", "pole_axis", "pole", "negative", "theta"])?;
                        Ok(SetDescriptor::Cap(CapDescriptor {
                            pole: pole_from(obj)?,
                            theta: number(obj, "theta")?,
                        }))
                    }
                    "band" => {
                        check_keys(obj, &["shape", "pole_axis", "pole", "negative", "theta1", "theta2"])?;
                        Ok(SetDescriptor::Band {
                            pole: pole_from(obj)?,
                            theta1: number(obj, "theta1")?,
                            theta2: number(obj, "theta2")?,
                        })
                    }
                    "union" => {
                        check_keys(obj, &["shape", "caps"])?;
                        match obj.get("caps") {
                            Some(caps @ Value::Array(_)) => Self::from_value(caps),
                            _ => Err(bad("\"caps\" must be an array")),
                        }
                    }
                    other => Err(bad(format!("unknown shape \"{other}\""))),
                }
            }
            _ => Err(bad("expected an object or an array")),
        }
    }

    pub fn to_value(&self) -> Value {
        fn pole_fields(p: &PoleDescriptor, obj: &mut Map<String, Value>) {
            match p {
                PoleDescriptor::Axis { index, negative } => {
                    obj.insert("pole_axis".into(), json!(index));
                    if *negative {
                        obj.insert("negative".into(), json!(true));
                    }
                }
                PoleDescriptor::Direction(v) => {
                    obj.insert("pole".into(), json!(v));
                }
            }
        }
        fn cap(c: &CapDescriptor) -> Value {
            let mut obj = Map::new();
            obj.insert("shape".into(), json!("cap"));
            pole_fields(&c.pole, &mut obj);
            obj.insert("theta".into(), json!(c.theta));
            Value::Object(obj)
        }
        match self {
            SetDescriptor::Cap(c) => cap(c),
            SetDescriptor::Band { pole, theta1, theta2 } => {
                let mut obj = Map::new();
                obj.insert("shape".into(), json!("band"));
                pole_fields(pole, &mut obj);
                obj.insert("theta1".into(), json!(theta1));
                obj.insert("theta2".into(), json!(theta2));
                Value::Object(obj)
            }
            SetDescriptor::Union(caps) => Value::Array(caps.iter().map(cap).collect()),
            SetDescriptor::Complement(inner) => json!({ "complement": inner.to_value() }),
        }
    }

    /// Compact JSON text, as stored in CSV records.
    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    fn shape(&self) -> AppResult<Shape> {
        Ok(match self {
            SetDescriptor::Cap(c) => Shape::Cap(c.spec()?),
            SetDescriptor::Band { pole, theta1, theta2 } => Shape::Band {
                pole: pole.pole()?,
                theta1: *theta1,
                theta2: *theta2,
            },
            SetDescriptor::Union(caps) => Shape::Union(caps.iter().map(CapDescriptor::spec).collect::<AppResult<_>>()?),
            SetDescriptor::Complement(inner) => Shape::Complement(Box::new(inner.shape()?)),
        })
    }

    pub fn build(&self, sphere: Sphere) -> AppResult<SphereSet> {
        Ok(SphereSet::new(sphere, self.shape()?)?)
    }
}

impl serde::Serialize for SetDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl PoleDescriptor {
    pub fn pole(&self) -> AppResult<Pole> {
        Ok(match self {
            PoleDescriptor::Axis { index, negative: false } => Pole::axis(*index),
            PoleDescriptor::Axis { index, negative: true } => Pole::negative_axis(*index),
            PoleDescriptor::Direction(v) => Pole::direction(v.clone())?,
        })
    }
}

impl CapDescriptor {
    pub fn spec(&self) -> AppResult<CapSpec> {
        Ok(CapSpec::new(self.pole.pole()?, self.theta)?)
    }
}
