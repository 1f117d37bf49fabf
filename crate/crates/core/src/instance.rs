//! Instance files: parsing, validation with JSON-pointer diagnostics, and
//! the canonical digest.
//!
//! ```json
//! {"prime": 7, "ext_degree": 1, "dim": 2,
//!  "generators": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]],
//!  "ambient": {"factors": ["A_1"]}}
//! ```
//!
//! Over F_{l^f} an entry may be an integer (a prime-field element) or a list
//! of `f` power-basis coefficients. With `"rational": true` entries are
//! integers or strings such as `"1/7"`, and `prime` may be left out.

use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::certify::{parse_rational, AmbientSpec, FieldSpec, RationalMat};
use crate::gf::{make_field, Field, FieldElement, Mat};
use crate::grp::GroupInstance;
use crate::lietypes::{Family, LieTypeTag};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("schema error at {pointer}: {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

fn err<T>(pointer: impl Into<String>, message: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError {
        pointer: pointer.into(),
        message: message.into(),
    })
}

/// Ambient as written in a file; the field is filled in from the instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientDecl {
    pub factors: Vec<LieTypeTag>,
    pub simply_connected: bool,
    pub central_torus: u32,
    pub unitary: bool,
    pub ext_degree: Option<u32>,
}

impl AmbientDecl {
    pub fn resolve(&self, prime: u64, default_degree: u32) -> AmbientSpec {
        AmbientSpec {
            factors: self.factors.clone(),
            simply_connected: self.simply_connected,
            central_torus: self.central_torus,
            unitary: self.unitary,
            field: FieldSpec {
                prime,
                ext_degree: self.ext_degree.unwrap_or(default_degree),
            },
        }
    }
}

#[derive(Clone, Debug)]
pub enum Instance {
    Finite(GroupInstance),
    Rational {
        prime: Option<u64>,
        generators: Vec<RationalMat>,
        ambient: Option<AmbientDecl>,
    },
}

#[derive(Clone, Debug)]
pub struct ParsedInstance {
    pub instance: Instance,
    pub digest: String,
    pub warnings: Vec<String>,
}

/// SHA-256 of the value printed with sorted keys and no whitespace.
pub fn canonical_digest(v: &Value) -> String {
    // serde_json's default map is ordered by key, so to_string is canonical.
    let text = serde_json::to_string(v).expect("values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn parse_instance_file(path: &Path) -> Result<ParsedInstance, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_instance(&text)?)
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance, SchemaError> {
    let root: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return err("", format!("invalid JSON: {e}")),
    };
    let digest = canonical_digest(&root);
    let Some(obj) = root.as_object() else {
        return err("", "expected an object");
    };
    for key in obj.keys() {
        if !["prime", "ext_degree", "dim", "generators", "ambient", "rational"].contains(&key.as_str()) {
            return err(format!("/{key}"), "unknown field");
        }
    }
    let rational = match obj.get("rational") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return err("/rational", "expected a boolean"),
    };
    let prime = match obj.get("prime") {
        None if rational => None,
        None => return err("/prime", "missing"),
        Some(v) => Some(v.as_u64().filter(|&p| crate::gf::is_prime(p)).ok_or_else(|| SchemaError {
            pointer: "/prime".into(),
            message: "expected a prime".into(),
        })?),
    };
    let ext_degree = match obj.get("ext_degree") {
        None => 1,
        Some(v) => match v.as_u64() {
            Some(f) if f >= 1 && !rational || f == 1 => f as u32,
            _ => return err("/ext_degree", "expected a positive integer (1 for rational instances)"),
        },
    };
    let dim = match obj.get("dim").and_then(Value::as_u64) {
        Some(n) if n >= 1 => n as usize,
        _ => return err("/dim", "expected a positive integer"),
    };
    let ambient = match obj.get("ambient") {
        None | Some(Value::Null) => None,
        Some(v) => Some(parse_ambient(v)?),
    };
    let gens = match obj.get("generators") {
        Some(Value::Array(a)) if !a.is_empty() => a,
        _ => return err("/generators", "expected a nonempty list of matrices"),
    };
    let mut warnings = Vec::new();
    if rational {
        let generators = gens
            .iter()
            .enumerate()
            .map(|(i, g)| parse_rational_matrix(g, dim, i))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(ParsedInstance {
            instance: Instance::Rational {
                prime,
                generators,
                ambient,
            },
            digest,
            warnings,
        });
    }
    let prime = prime.expect("finite instances require a prime");
    let field = match make_field(prime, ext_degree as usize) {
        Ok(k) => k,
        Err(e) => return err("/ext_degree", e.to_string()),
    };
    let mut mats = Vec::with_capacity(gens.len());
    for (i, g) in gens.iter().enumerate() {
        let m = parse_matrix(g, dim, &field, i, &mut warnings)?;
        if !field.is_invertible(&m) {
            return err(format!("/generators/{i}"), "matrix is not invertible");
        }
        mats.push(m);
    }
    let mut g = GroupInstance::new(field, dim, mats).expect("validated above");
    if let Some(a) = ambient {
        g = g.with_ambient(a.resolve(prime, ext_degree));
    }
    Ok(ParsedInstance {
        instance: Instance::Finite(g),
        digest,
        warnings,
    })
}

fn parse_ambient(v: &Value) -> Result<AmbientDecl, SchemaError> {
    let Some(obj) = v.as_object() else {
        return err("/ambient", "expected an object");
    };
    for key in obj.keys() {
        if !["factors", "simply_connected", "central_torus", "unitary", "ext_degree"].contains(&key.as_str()) {
            return err(format!("/ambient/{key}"), "unknown field");
        }
    }
    let factors = match obj.get("factors") {
        Some(Value::Array(a)) if !a.is_empty() => a,
        _ => return err("/ambient/factors", "expected a nonempty list of Lie types"),
    };
    let mut tags = Vec::with_capacity(factors.len());
    for (i, f) in factors.iter().enumerate() {
        match f.as_str().map(str::parse::<LieTypeTag>) {
            Some(Ok(t)) => tags.push(t),
            _ => return err(format!("/ambient/factors/{i}"), "expected a Lie type such as \"A_2\""),
        }
    }
    let simply_connected = match obj.get("simply_connected") {
        None => true,
        Some(Value::Bool(b)) => *b,
        Some(_) => return err("/ambient/simply_connected", "expected a boolean"),
    };
    let central_torus = match obj.get("central_torus") {
        None => 0,
        Some(v) => v.as_u64().ok_or_else(|| SchemaError {
            pointer: "/ambient/central_torus".into(),
            message: "expected a nonnegative integer".into(),
        })? as u32,
    };
    let unitary = match obj.get("unitary") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return err("/ambient/unitary", "expected a boolean"),
    };
    if unitary && tags.iter().any(|t| t.family() != Family::A) {
        return err("/ambient/unitary", "only type A factors have unitary forms");
    }
    let ext_degree = match obj.get("ext_degree") {
        None => None,
        Some(v) => Some(v.as_u64().filter(|&f| f >= 1).ok_or_else(|| SchemaError {
            pointer: "/ambient/ext_degree".into(),
            message: "expected a positive integer".into(),
        })? as u32),
    };
    Ok(AmbientDecl {
        factors: tags,
        simply_connected,
        central_torus,
        unitary,
        ext_degree,
    })
}

fn rows_of(g: &Value, dim: usize, i: usize) -> Result<&Vec<Value>, SchemaError> {
    let here = format!("/generators/{i}");
    let Some(rows) = g.as_array() else {
        return err(here, "expected a matrix (list of rows)");
    };
    if rows.len() != dim || rows.iter().any(|r| r.as_array().map(Vec::len) != Some(dim)) {
        return err(here, format!("expected a square {dim}x{dim} matrix"));
    }
    Ok(rows)
}

fn parse_matrix(g: &Value, dim: usize, field: &Field, i: usize, warnings: &mut Vec<String>) -> Result<Mat, SchemaError> {
    let rows = rows_of(g, dim, i)?;
    let ell = field.ell() as i64;
    let f = field.degree();
    let mut entries = Vec::with_capacity(dim * dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, x) in row.as_array().expect("checked").iter().enumerate() {
            let here = format!("/generators/{i}/{r}/{c}");
            let coeffs: Vec<i64> = match x {
                Value::Number(_) => vec![x.as_i64().ok_or_else(|| SchemaError {
                    pointer: here.clone(),
                    message: "expected an integer".into(),
                })?],
                Value::Array(a) if a.len() == f => a
                    .iter()
                    .map(|v| v.as_i64())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| SchemaError {
                        pointer: here.clone(),
                        message: "expected integer coefficients".into(),
                    })?,
                _ => return err(here, format!("expected an integer or {f} coefficients")),
            };
            if coeffs.iter().any(|&v| !(0..ell).contains(&v)) {
                warnings.push(format!("entry at {here} reduced mod {ell}"));
            }
            entries.push(field.from_coeffs(&coeffs));
        }
    }
    Ok(Mat::from_entries(dim, entries).expect("dim*dim entries"))
}

fn parse_rational_matrix(g: &Value, dim: usize, i: usize) -> Result<RationalMat, SchemaError> {
    let rows = rows_of(g, dim, i)?;
    let mut entries = Vec::with_capacity(dim * dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, x) in row.as_array().expect("checked").iter().enumerate() {
            let here = format!("/generators/{i}/{r}/{c}");
            let parsed = match x {
                Value::Number(n) if n.is_i64() => parse_rational(&n.to_string()),
                Value::String(s) => parse_rational(s),
                _ => Err("expected an integer or a string \"a/b\"".to_string()),
            };
            match parsed {
                Ok(q) => entries.push(q),
                Err(m) => return err(here, m),
            }
        }
    }
    Ok(RationalMat::new(dim, entries).expect("dim*dim entries"))
}

/// Entry list for a finite matrix, as written in instance files.
pub fn matrix_to_json(field: &Field, m: &Mat) -> Value {
    let n = m.side();
    Value::Array(
        (0..n)
            .map(|i| {
                Value::Array(
                    (0..n)
                        .map(|j| {
                            let e: FieldElement = m.get(i, j);
                            if field.is_prime_field() {
                                Value::from(e.0)
                            } else {
                                Value::from(field.coeffs(e))
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// An instance file for `g`, the inverse of `parse_instance`.
pub fn instance_to_json(g: &GroupInstance) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("prime".into(), g.ell().into());
    obj.insert("ext_degree".into(), (g.field.degree() as u64).into());
    obj.insert("dim".into(), (g.n as u64).into());
    obj.insert(
        "generators".into(),
        Value::Array(g.generators.iter().map(|m| matrix_to_json(&g.field, m)).collect()),
    );
    if let Some(a) = &g.ambient {
        let mut amb = serde_json::Map::new();
        amb.insert(
            "factors".into(),
            Value::Array(a.factors.iter().map(|t| Value::from(t.to_string())).collect()),
        );
        amb.insert("simply_connected".into(), a.simply_connected.into());
        amb.insert("central_torus".into(), a.central_torus.into());
        if a.unitary {
            amb.insert("unitary".into(), true.into());
        }
        amb.insert("ext_degree".into(), a.field.ext_degree.into());
        obj.insert("ambient".into(), Value::Object(amb));
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SL2_7: &str = r#"{"prime": 7, "dim": 2, "generators": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]],
        "ambient": {"factors": ["A_1"]}}"#;

    fn finite(p: &ParsedInstance) -> &GroupInstance {
        match &p.instance {
            Instance::Finite(g) => g,
            other => panic!("expected a finite instance, got {other:?}"),
        }
    }

    #[test]
    fn parses_sl2() {
        let p = parse_instance(SL2_7).unwrap();
        let g = finite(&p);
        assert_eq!((g.ell(), g.n, g.generators.len()), (7, 2, 2));
        assert_eq!(g.ambient.as_ref().unwrap().field, FieldSpec { prime: 7, ext_degree: 1 });
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn out_of_range_entries_reduce_with_warning() {
        let p = parse_instance(r#"{"prime": 7, "dim": 2, "generators": [[[1, 7], [-6, 1]]]}"#).unwrap();
        let k = Field::prime(7).unwrap();
        assert_eq!(finite(&p).generators[0], k.mat_from_ints(&[&[1, 0], &[1, 1]]));
        assert_eq!(p.warnings.len(), 2);
    }

    #[test]
    fn schema_pointers() {
        let e = parse_instance(r#"{"prime": 7, "dim": 2, "generators": [[[1, 1, 0], [0, 1, 0]]]}"#).unwrap_err();
        assert_eq!(e.pointer, "/generators/0");
        let e = parse_instance(r#"{"prime": 8, "dim": 2, "generators": [[[1, 0], [0, 1]]]}"#).unwrap_err();
        assert_eq!(e.pointer, "/prime");
        let e = parse_instance(r#"{"prime": 7, "dim": 2, "generators": [[[1, 0], [0, 1]], [[1, "a"], [0, 1]]]}"#)
            .unwrap_err();
        assert_eq!(e.pointer, "/generators/1/0/1");
        let e = parse_instance(r#"{"prime": 7, "dim": 2, "generators": [[[1, 1], [1, 1]]]}"#).unwrap_err();
        assert_eq!(e.pointer, "/generators/0");
        let e = parse_instance(r#"{"prime": 7, "dim": 2, "generators": []}"#).unwrap_err();
        assert_eq!(e.pointer, "/generators");
        let e = parse_instance(r#"{"prime": 7, "dim": 2, "generators": [[[1, 0], [0, 1]]], "ambient": {"factors": ["Q_1"]}}"#)
            .unwrap_err();
        assert_eq!(e.pointer, "/ambient/factors/0");
        let e = parse_instance(
            r#"{"prime": 7, "dim": 2, "generators": [[[1, 0], [0, 1]]], "ambient": {"factors": ["C_2"], "unitary": true}}"#,
        )
        .unwrap_err();
        assert_eq!(e.pointer, "/ambient/unitary");
        let e = parse_instance("[1, 2").unwrap_err();
        assert_eq!(e.pointer, "");
    }

    #[test]
    fn unitary_ambient() {
        let p = parse_instance(
            r#"{"prime": 5, "ext_degree": 2, "dim": 1, "generators": [[[1]]], "ambient": {"factors": ["A_2"], "unitary": true, "ext_degree": 1}}"#,
        )
        .unwrap();
        let a = finite(&p).ambient.clone().unwrap();
        assert!(a.unitary);
        assert_eq!(a.field.ext_degree, 1);
    }

    #[test]
    fn extension_entries() {
        let p = parse_instance(r#"{"prime": 5, "ext_degree": 2, "dim": 2, "generators": [[[1, [0, 1]], [0, 1]]]}"#).unwrap();
        let g = finite(&p);
        assert_eq!(g.generators[0].get(0, 1), g.field.generator());
    }

    #[test]
    fn rational_instances() {
        let p = parse_instance(r#"{"rational": true, "dim": 2, "generators": [[[1, "1/7"], [0, 1]], [[1, 0], [7, 1]]]}"#)
            .unwrap();
        match p.instance {
            Instance::Rational { prime, generators, .. } => {
                assert_eq!(prime, None);
                assert_eq!(generators[0], RationalMat::from_fracs(&[&[(1, 1), (1, 7)], &[(0, 1), (1, 1)]]));
            }
            _ => panic!("expected rational"),
        }
    }

    #[test]
    fn digest_ignores_layout() {
        let a = parse_instance(SL2_7).unwrap().digest;
        let b = parse_instance(
            r#"{"ambient":{"factors":["A_1"]},"generators":[[[1,1],[0,1]],[[1,0],[1,1]]],"dim":2,"prime":7}"#,
        )
        .unwrap()
        .digest;
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn round_trip() {
        let g = finite(&parse_instance(SL2_7).unwrap()).clone();
        let back = parse_instance(&instance_to_json(&g).to_string()).unwrap();
        assert_eq!(finite(&back).generators, g.generators);
        assert_eq!(finite(&back).ambient, g.ambient);
    }
}
