//! JSON interchange documents.
//!
//! ```text
//! {"format":1,"kind":"matrix","rows":r,"cols":c,"data":[[re,im],...]}      row-major
//! {"format":1,"kind":"family","ambient":n,"weights":[...],"subspaces":[{"rows":..,"cols":..,"data":..},...]}
//! {"format":1,"kind":"pair","first":{family body},"second":{family body}}
//! ```
//!
//! Every double is written as `{:.16e}` (17 significant digits), so parsing
//! gives back the same bits. Documents end with a single newline.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::error::Category;
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::frames::WeightedFamily;
use crate::hilbert::Subspace;
use crate::linalg::{CMatrix, TolerancePolicy, C64};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Matrix(CMatrix),
    Family(WeightedFamily),
    Pair(WeightedFamily, WeightedFamily),
}

/// Compact JSON with doubles in round-trip scientific notation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes any value (reports included) in canonical form, newline-terminated.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter);
    value.serialize(&mut ser).map_err(|e| Error::InvalidDocument(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::InvalidDocument(e.to_string()))
}

#[derive(Serialize, Deserialize)]
struct MatrixBody {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct FamilyBody {
    ambient: usize,
    weights: Vec<f64>,
    subspaces: Vec<MatrixBody>,
}

#[derive(Serialize)]
struct Tagged<'a, B> {
    format: u64,
    kind: &'a str,
    #[serde(flatten)]
    body: B,
}

#[derive(Serialize, Deserialize)]
struct PairBody {
    first: FamilyBody,
    second: FamilyBody,
}

fn matrix_body(m: &CMatrix) -> MatrixBody {
    let mut data = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            data.push([z.re, z.im]);
        }
    }
    MatrixBody {
        rows: m.nrows(),
        cols: m.ncols(),
        data,
    }
}

fn family_body(f: &WeightedFamily) -> FamilyBody {
    FamilyBody {
        ambient: f.ambient_dim(),
        weights: f.weights().to_vec(),
        subspaces: f.subspaces().iter().map(|s| matrix_body(s.basis())).collect(),
    }
}

/// A matrix as the JSON object used inside documents and reports.
pub fn matrix_value(m: &CMatrix) -> Value {
    serde_json::to_value(matrix_body(m)).expect("matrix body is plain data")
}

pub fn serialize(doc: &Document) -> String {
    let text = match doc {
        Document::Matrix(m) => to_canonical_json(&Tagged {
            format: FORMAT_VERSION,
            kind: "matrix",
            body: matrix_body(m),
        }),
        Document::Family(f) => to_canonical_json(&Tagged {
            format: FORMAT_VERSION,
            kind: "family",
            body: family_body(f),
        }),
        Document::Pair(a, b) => to_canonical_json(&Tagged {
            format: FORMAT_VERSION,
            kind: "pair",
            body: PairBody {
                first: family_body(a),
                second: family_body(b),
            },
        }),
    };
    text.expect("documents hold only finite doubles")
}

pub fn serialize_matrix(m: &CMatrix) -> String {
    serialize(&Document::Matrix(m.clone()))
}

pub fn serialize_family(f: &WeightedFamily) -> String {
    serialize(&Document::Family(f.clone()))
}

fn json_error(e: serde_json::Error) -> Error {
    match e.classify() {
        Category::Syntax | Category::Eof => Error::Parse {
            line: e.line(),
            column: e.column(),
            reason: e.to_string(),
        },
        Category::Io => Error::Io(e.to_string()),
        Category::Data => Error::InvalidDocument(e.to_string()),
    }
}

fn to_matrix(b: MatrixBody) -> Result<CMatrix> {
    if b.data.len() != b.rows * b.cols {
        return Err(Error::InvalidDocument(format!(
            "{}x{} matrix with {} entries",
            b.rows,
            b.cols,
            b.data.len()
        )));
    }
    let entries: Vec<C64> = b.data.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(CMatrix::from_row_slice(b.rows, b.cols, &entries))
}

fn to_family(b: FamilyBody, tol: &TolerancePolicy) -> Result<WeightedFamily> {
    if b.weights.len() != b.subspaces.len() {
        return Err(Error::InvalidDocument(format!(
            "{} weights for {} subspaces",
            b.weights.len(),
            b.subspaces.len()
        )));
    }
    let mut subs = Vec::with_capacity(b.subspaces.len());
    for (i, m) in b.subspaces.into_iter().enumerate() {
        let m = to_matrix(m)?;
        if m.nrows() != b.ambient {
            return Err(Error::InvalidDocument(format!(
                "subspace {i} has {} rows, ambient is {}",
                m.nrows(),
                b.ambient
            )));
        }
        // stored bases are orthonormal; anything else is re-orthonormalized
        let sub = match Subspace::from_orthonormal(m.clone(), tol) {
            Ok(s) => s,
            Err(_) => Subspace::from_span(&m, tol)?,
        };
        if sub.dim() != m.ncols() {
            return Err(Error::InvalidDocument(format!("subspace {i} is rank deficient")));
        }
        subs.push(sub);
    }
    WeightedFamily::new(subs, b.weights).map_err(|e| Error::InvalidDocument(e.to_string()))
}

fn body<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::InvalidDocument(e.to_string()))
}

pub fn parse(text: &str, tol: &TolerancePolicy) -> Result<Document> {
    let value: Value = serde_json::from_str(text).map_err(json_error)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::InvalidDocument("top level must be an object".into()))?;
    match obj.get("format").and_then(Value::as_u64) {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::InvalidDocument(format!("unsupported format {v}"))),
        None => return Err(Error::InvalidDocument("missing \"format\":1".into())),
    }
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidDocument("missing \"kind\"".into()))?
        .to_string();
    match kind.as_str() {
        "matrix" => Ok(Document::Matrix(to_matrix(body(value)?)?)),
        "family" => Ok(Document::Family(to_family(body(value)?, tol)?)),
        "pair" => {
            let p: PairBody = body(value)?;
            Ok(Document::Pair(to_family(p.first, tol)?, to_family(p.second, tol)?))
        }
        other => Err(Error::InvalidDocument(format!("unknown kind '{other}'"))),
    }
}

pub fn read_document(path: &Path, tol: &TolerancePolicy) -> Result<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse(&text, tol)
}

pub fn write_document(path: &Path, doc: &Document) -> Result<()> {
    std::fs::write(path, serialize(doc)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate::{generate, InstanceSpec};
    use crate::linalg::identity;

    const IDENTITY2: &str = include_str!("../../testdata/identity2.json");

    #[test]
    fn identity_matches_golden_file() {
        assert_eq!(serialize_matrix(&identity(2)), IDENTITY2);
    }

    #[test]
    fn golden_file_parses() {
        let doc = parse(IDENTITY2, &TolerancePolicy::default()).unwrap();
        assert_eq!(doc, Document::Matrix(identity(2)));
    }

    #[test]
    fn family_round_trip_is_bit_exact() {
        let tol = TolerancePolicy::default();
        let spec: InstanceSpec = "dual_pair:seed=4,n=5,dims=2,2,3,weights=uniform:0.3:3".parse().unwrap();
        let g = generate(&spec).unwrap();
        let doc = Document::Pair(g.first().clone(), g.second().unwrap().clone());
        let text = serialize(&doc);
        assert_eq!(parse(&text, &tol).unwrap(), doc);
        assert_eq!(serialize(&parse(&text, &tol).unwrap()), text);
    }

    #[test]
    fn extreme_doubles_round_trip() {
        let vals = [
            f64::MIN_POSITIVE,
            5e-324,
            -0.0,
            f64::MAX,
            0.1 + 0.2,
            -1.0 / 3.0,
            std::f64::consts::PI * 1e-200,
        ];
        let m = CMatrix::from_fn(1, vals.len(), |_, c| C64::new(vals[c], -vals[c]));
        let back = parse(&serialize_matrix(&m), &TolerancePolicy::default()).unwrap();
        let Document::Matrix(b) = back else { panic!() };
        for (x, y) in m.iter().zip(b.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn truncated_input_reports_position() {
        let text = serialize_matrix(&identity(2));
        match parse(&text[..40], &TolerancePolicy::default()) {
            Err(Error::Parse { line, column, .. }) => assert!(line == 1 && column >= 40),
            other => panic!("{other:?}"),
        }
        match parse("{\n  \"format\": 1,\n  \"kind\": \"matrix\",\n  \"rows\": 1 2", &TolerancePolicy::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors() {
        let tol = TolerancePolicy::default();
        for bad in [
            r#"[1,2]"#,
            r#"{"kind":"matrix","rows":1,"cols":1,"data":[[1,0]]}"#,
            r#"{"format":2,"kind":"matrix","rows":1,"cols":1,"data":[[1,0]]}"#,
            r#"{"format":1,"kind":"tensor"}"#,
            r#"{"format":1,"kind":"matrix","rows":2,"cols":1,"data":[[1,0]]}"#,
            r#"{"format":1,"kind":"family","ambient":2,"weights":[1],"subspaces":[]}"#,
            r#"{"format":1,"kind":"family","ambient":2,"weights":[1],"subspaces":[{"rows":2,"cols":2,"data":[[1,0],[1,0],[1,0],[1,0]]}]}"#,
        ] {
            assert!(matches!(parse(bad, &tol), Err(Error::InvalidDocument(_))), "{bad}");
        }
    }

    #[test]
    fn non_orthonormal_spans_are_accepted() {
        let text = r#"{"format":1,"kind":"family","ambient":2,"weights":[1.5],"subspaces":[{"rows":2,"cols":1,"data":[[3,0],[4,0]]}]}"#;
        let Document::Family(f) = parse(text, &TolerancePolicy::default()).unwrap() else { panic!() };
        assert!((f.subspaces()[0].basis().norm() - 1.0).abs() < 1e-15);
    }
}
