//! JSON documents for soft objects and frame specs.
//!
//! Encodings:
//! - soft real: `{"<label>": number, ...}`
//! - complex number: `[re, im]`
//! - soft vector: `{"dim": n, "values": {"<label>": [[re, im], ...]}}`
//! - soft operator: `{"rows": m, "cols": n, "values": {"<label>": [[[re, im], ...], ...]}}`
//!   (row-major)
//! - frame spec: `{"parameters": [...], "ambient_dim": n, "blocks": [{"rows": d_j, "values": {...}}, ...]}`
//!   with optional `name`, `description`, `index` and `certificate`
//! - local frames: `{"families": [{"vectors": [<soft vector>, ...], "tight": bool}, ...]}`
//!
//! Every float is written with 17 significant digits, so writing and
//! re-reading a document reproduces it bit for bit.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::{DeserializeOwned, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SoftError;
use crate::gframe::{FrameBoundsCertificate, SoftGFrame};
use crate::operators::SoftOperator;
use crate::soft_core::{ParameterSet, SoftReal, SoftVector};

/// A document that could not be read, with the location of the problem.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

impl InputError {
    fn at(location: impl Into<String>, message: impl fmt::Display) -> Self {
        InputError::Invalid {
            location: location.into(),
            message: message.to_string(),
        }
    }

    /// Prefixes the document path (file name) to the location.
    fn in_file(self, path: &Path) -> Self {
        match self {
            InputError::Invalid { location, message } => InputError::Invalid {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        }
    }
}

// ---------------------------------------------------------------- formatting

/// Objects are indented one key per line; arrays stay on one line unless
/// they hold objects. Floats get 17 significant digits.
#[derive(Default)]
struct DocFormatter {
    stack: Vec<Container>,
}

struct Container {
    object: bool,
    has_value: bool,
    has_object_child: bool,
}

impl DocFormatter {
    fn newline<W: ?Sized + Write>(&self, w: &mut W, depth: usize) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for DocFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.stack.push(Container {
            object: false,
            has_value: false,
            has_object_child: false,
        });
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        let c = self.stack.pop().expect("balanced arrays");
        if c.has_object_child {
            self.newline(w, self.stack.len())?;
        }
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        Ok(())
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        if let Some(parent) = self.stack.last_mut() {
            if !parent.object {
                parent.has_object_child = true;
                self.newline(w, self.stack.len())?;
            }
        }
        self.stack.push(Container {
            object: true,
            has_value: false,
            has_object_child: false,
        });
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        let c = self.stack.pop().expect("balanced objects");
        if c.has_value {
            self.newline(w, self.stack.len())?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w, self.stack.len())
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        if let Some(c) = self.stack.last_mut() {
            c.has_value = true;
        }
        Ok(())
    }
}

/// Serializes with the document layout; non-finite floats become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, DocFormatter::default());
    value.serialize(&mut ser).expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// `x` with 6 significant digits, fixed notation for moderate magnitudes.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let s = format!("{:.*}", (5 - exp) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific notation");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        InputError::at(path, e.into_inner())
    })?;
    Ok(value)
}

fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `text` to `path` or stdout.
pub fn write_output(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

// ------------------------------------------------------------- label maps

/// A JSON object keyed by parameter label, kept in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap<T>(pub Vec<(String, T)>);

impl<T: Serialize> Serialize for LabelMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for LabelMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V<T>(PhantomData<T>);
        impl<'de, T: Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = LabelMap<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object keyed by parameter label")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut entries: Vec<(String, T)> = Vec::new();
                while let Some(key) = access.next_key::<String>()? {
                    if entries.iter().any(|(k, _)| *k == key) {
                        return Err(serde::de::Error::custom(format!("duplicate label {key:?}")));
                    }
                    let value = access.next_value()?;
                    entries.push((key, value));
                }
                Ok(LabelMap(entries))
            }
        }
        d.deserialize_map(V(PhantomData))
    }
}

impl<T> LabelMap<T> {
    /// Reorders entries to `params`, failing on missing or unknown labels.
    fn aligned(self, params: &ParameterSet, location: &str) -> Result<Vec<T>, InputError> {
        let mut slots: Vec<Option<T>> = (0..params.len()).map(|_| None).collect();
        for (label, value) in self.0 {
            match params.index_of(&label) {
                Some(i) => slots[i] = Some(value),
                None => return Err(InputError::at(format!("{location}.{label}"), "unknown parameter label")),
            }
        }
        slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| InputError::at(location, format!("missing parameter label {:?}", params.label(i))))
            })
            .collect()
    }
}

fn label_map<T>(params: &ParameterSet, mut f: impl FnMut(usize) -> T) -> LabelMap<T> {
    LabelMap(
        params
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), f(i)))
            .collect(),
    )
}

type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

// ------------------------------------------------------------- raw documents

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub dim: usize,
    pub values: LabelMap<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub rows: usize,
    pub cols: usize,
    pub values: LabelMap<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BlockDoc {
    rows: usize,
    values: LabelMap<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub lower: LabelMap<f64>,
    pub upper: LabelMap<f64>,
    pub is_frame: bool,
    pub is_tight: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FrameDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    parameters: Vec<String>,
    ambient_dim: usize,
    blocks: Vec<BlockDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LocalFamilyDoc {
    vectors: Vec<VectorDoc>,
    #[serde(default)]
    tight: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LocalsDoc {
    families: Vec<LocalFamilyDoc>,
}

// ------------------------------------------------------------- soft objects

pub fn soft_real_doc(x: &SoftReal) -> LabelMap<f64> {
    label_map(x.params(), |i| x.get(i))
}

pub fn soft_real_from_doc(doc: LabelMap<f64>, params: &ParameterSet, location: &str) -> Result<SoftReal, InputError> {
    let values = doc.aligned(params, location)?;
    SoftReal::new(params.clone(), values).map_err(|e| InputError::at(location, e))
}

pub fn vector_doc(x: &SoftVector) -> VectorDoc {
    VectorDoc {
        dim: x.dim(),
        values: label_map(x.params(), |i| x.at(i).iter().copied().map(pair).collect()),
    }
}

pub fn vector_from_doc(doc: VectorDoc, params: &ParameterSet, location: &str) -> Result<SoftVector, InputError> {
    let dim = doc.dim;
    let values_at = format!("{location}.values");
    let labels: Vec<String> = doc.values.0.iter().map(|(l, _)| l.clone()).collect();
    let rows = doc.values.aligned(params, &values_at)?;
    let values = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != dim {
                let label = &labels.iter().find(|l| params.index_of(l) == Some(i)).expect("aligned");
                return Err(InputError::at(
                    format!("{values_at}.{label}"),
                    format!("expected {dim} entries, found {}", row.len()),
                ));
            }
            Ok(DVector::from_iterator(dim, row.into_iter().map(complex)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    SoftVector::new(params.clone(), dim, values).map_err(|e| InputError::at(location, e))
}

/// A vector document whose parameter set is its own label order.
pub fn vector_from_str(text: &str, params: Option<&ParameterSet>) -> Result<SoftVector, InputError> {
    let doc: VectorDoc = parse(text)?;
    let params = match params {
        Some(p) => p.clone(),
        None => {
            ParameterSet::new(doc.values.0.iter().map(|(l, _)| l.clone())).map_err(|e| InputError::at("values", e))?
        }
    };
    vector_from_doc(doc, &params, "")
}

pub fn read_vector(path: &Path, params: Option<&ParameterSet>) -> Result<SoftVector, InputError> {
    vector_from_str(&read_text(path)?, params).map_err(|e| e.in_file(path))
}

fn matrix_rows(m: &DMatrix<Complex64>) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
        .collect()
}

fn matrices_from_rows(
    values: LabelMap<Vec<Vec<Pair>>>,
    params: &ParameterSet,
    rows: usize,
    cols: usize,
    location: &str,
) -> Result<Vec<DMatrix<Complex64>>, InputError> {
    let labels: Vec<String> = params.labels().to_vec();
    let data = values.aligned(params, location)?;
    data.into_iter()
        .enumerate()
        .map(|(i, m)| {
            let at = format!("{location}.{}", labels[i]);
            if m.len() != rows {
                return Err(InputError::at(at, format!("expected {rows} rows, found {}", m.len())));
            }
            for (r, row) in m.iter().enumerate() {
                if row.len() != cols {
                    return Err(InputError::at(
                        format!("{at}[{r}]"),
                        format!("expected {cols} columns, found {}", row.len()),
                    ));
                }
            }
            Ok(DMatrix::from_row_iterator(
                rows,
                cols,
                m.into_iter().flatten().map(complex),
            ))
        })
        .collect()
}

pub fn operator_doc(op: &SoftOperator) -> OperatorDoc {
    OperatorDoc {
        rows: op.rows(),
        cols: op.cols(),
        values: label_map(op.params(), |i| matrix_rows(op.at(i))),
    }
}

pub fn operator_from_doc(doc: OperatorDoc, params: &ParameterSet, location: &str) -> Result<SoftOperator, InputError> {
    let values = matrices_from_rows(doc.values, params, doc.rows, doc.cols, &format!("{location}.values"))?;
    SoftOperator::new(params.clone(), doc.rows, doc.cols, values).map_err(|e| InputError::at(location, e))
}

pub fn operator_from_str(text: &str, params: &ParameterSet) -> Result<SoftOperator, InputError> {
    operator_from_doc(parse(text)?, params, "")
}

pub fn certificate_doc(c: &FrameBoundsCertificate) -> CertificateDoc {
    CertificateDoc {
        lower: soft_real_doc(&c.lower),
        upper: soft_real_doc(&c.upper),
        is_frame: c.is_frame,
        is_tight: c.is_tight,
    }
}

fn certificate_from_doc(
    doc: CertificateDoc,
    params: &ParameterSet,
    location: &str,
) -> Result<FrameBoundsCertificate, InputError> {
    Ok(FrameBoundsCertificate {
        lower: soft_real_from_doc(doc.lower, params, &format!("{location}.lower"))?,
        upper: soft_real_from_doc(doc.upper, params, &format!("{location}.upper"))?,
        is_frame: doc.is_frame,
        is_tight: doc.is_tight,
    })
}

// ------------------------------------------------------------- frame specs

/// A g-frame together with the optional metadata of its document.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub frame: SoftGFrame,
    pub name: Option<String>,
    pub description: Option<String>,
    /// `(j, k)` origin of each block for frames built by composition.
    pub index: Option<Vec<(usize, usize)>>,
    pub certificate: Option<FrameBoundsCertificate>,
}

impl FrameSpec {
    pub fn new(frame: SoftGFrame) -> Self {
        FrameSpec {
            frame,
            name: None,
            description: None,
            index: None,
            certificate: None,
        }
    }

    pub fn with_certificate(mut self, cert: FrameBoundsCertificate) -> Self {
        self.certificate = Some(cert);
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self, InputError> {
        let doc: FrameDoc = parse(text)?;
        let params = ParameterSet::new(doc.parameters).map_err(|e| InputError::at("parameters", e))?;
        let n = doc.ambient_dim;
        if n == 0 {
            return Err(InputError::at("ambient_dim", "must be positive"));
        }
        if doc.blocks.is_empty() {
            return Err(InputError::at("blocks", "at least one block is required"));
        }
        let blocks = doc
            .blocks
            .into_iter()
            .enumerate()
            .map(|(j, b)| {
                let at = format!("blocks[{j}]");
                if b.rows == 0 {
                    return Err(InputError::at(format!("{at}.rows"), "must be positive"));
                }
                let values = matrices_from_rows(b.values, &params, b.rows, n, &format!("{at}.values"))?;
                SoftOperator::new(params.clone(), b.rows, n, values).map_err(|e| InputError::at(at, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let len = blocks.len();
        let frame = SoftGFrame::new(params.clone(), n, blocks).map_err(|e| InputError::at("blocks", e))?;
        let index = match doc.index {
            Some(ix) if ix.len() != len => {
                return Err(InputError::at(
                    "index",
                    format!("expected {len} entries, found {}", ix.len()),
                ))
            }
            Some(ix) => Some(ix.into_iter().map(|[j, k]| (j, k)).collect()),
            None => None,
        };
        let certificate = doc
            .certificate
            .map(|c| certificate_from_doc(c, &params, "certificate"))
            .transpose()?;
        Ok(FrameSpec {
            frame,
            name: doc.name,
            description: doc.description,
            index,
            certificate,
        })
    }

    pub fn read(path: &Path) -> Result<Self, InputError> {
        Self::from_json_str(&read_text(path)?).map_err(|e| e.in_file(path))
    }

    pub fn to_json_string(&self) -> String {
        let fr = &self.frame;
        let doc = FrameDoc {
            name: self.name.clone(),
            description: self.description.clone(),
            parameters: fr.params().labels().to_vec(),
            ambient_dim: fr.ambient_dim(),
            blocks: fr
                .blocks()
                .iter()
                .map(|b| BlockDoc {
                    rows: b.rows(),
                    values: label_map(fr.params(), |i| matrix_rows(b.at(i))),
                })
                .collect(),
            index: self.index.as_ref().map(|ix| ix.iter().map(|&(j, k)| [j, k]).collect()),
            certificate: self.certificate.as_ref().map(certificate_doc),
        };
        to_json_string(&doc)
    }
}

// ------------------------------------------------------------- local frames

/// Local frame families as read from a document, with the declared
/// tightness of each family.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFramesSpec {
    pub families: Vec<Vec<SoftVector>>,
    pub declared_tight: Vec<bool>,
}

impl LocalFramesSpec {
    pub fn from_json_str(text: &str, params: &ParameterSet) -> Result<Self, InputError> {
        let doc: LocalsDoc = parse(text)?;
        if doc.families.is_empty() {
            return Err(InputError::at("families", "at least one family is required"));
        }
        let mut families = Vec::with_capacity(doc.families.len());
        let mut declared_tight = Vec::with_capacity(doc.families.len());
        for (j, fam) in doc.families.into_iter().enumerate() {
            if fam.vectors.is_empty() {
                return Err(InputError::at(format!("families[{j}].vectors"), "family is empty"));
            }
            let vectors = fam
                .vectors
                .into_iter()
                .enumerate()
                .map(|(k, v)| vector_from_doc(v, params, &format!("families[{j}].vectors[{k}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let dim = vectors[0].dim();
            if let Some(k) = vectors.iter().position(|v| v.dim() != dim) {
                return Err(InputError::at(
                    format!("families[{j}].vectors[{k}].dim"),
                    format!("family mixes dimensions {dim} and {}", vectors[k].dim()),
                ));
            }
            families.push(vectors);
            declared_tight.push(fam.tight);
        }
        Ok(LocalFramesSpec {
            families,
            declared_tight,
        })
    }

    pub fn read(path: &Path, params: &ParameterSet) -> Result<Self, InputError> {
        Self::from_json_str(&read_text(path)?, params).map_err(|e| e.in_file(path))
    }

    pub fn to_json_string(&self) -> String {
        let doc = LocalsDoc {
            families: self
                .families
                .iter()
                .zip(&self.declared_tight)
                .map(|(fam, &tight)| LocalFamilyDoc {
                    vectors: fam.iter().map(vector_doc).collect(),
                    tight,
                })
                .collect(),
        };
        to_json_string(&doc)
    }
}

impl From<SoftError> for InputError {
    fn from(e: SoftError) -> Self {
        InputError::at(".", e)
    }
}
