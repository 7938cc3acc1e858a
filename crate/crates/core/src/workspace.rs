//! JSON workspaces.
//!
//! A workspace is one JSON document holding a spectrum and named modules,
//! algebra elements, module elements, operators, frames, tensors and matrix
//! tensors. Complex numbers are `[re, im]`, matrices are
//! `{"rows", "cols", "data"}` in row-major order, and per-point arrays follow
//! the order of `spectrum.points`, with the value at infinity kept in a separate
//! `infinity` field.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "spectrum": { "points": ["x1", "x2"], "infinity": false },
//!   "modules": { "F": { "dim": 2 } },
//!   "elements": { "e1": { "module": "F", "vectors": [[[1, 0], [0, 0]], [[1, 0], [0, 0]]] } },
//!   "frames": { "std": { "module": "F", "members": ["e1", "e2"] } }
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::frames::FrameOfMultipliers;
use crate::haagerup::{MatrixTensor, TensorElement};
use crate::linalg::{CMatrix, C64};
use crate::module::{AdjointableOperator, HilbertModule, ModuleElement, ModuleRef, STRUCTURE_TOL};
use crate::spectrum::{Field, Spectrum};

pub const SCHEMA_VERSION: u32 = 1;

pub type Complex = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumJson {
    pub points: Vec<String>,
    #[serde(default)]
    pub infinity: bool,
}

/// Free module when `projections` is absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleJson {
    pub dim: usize,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity_projection: Option<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub values: Vec<Complex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity: Option<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFieldJson {
    pub vectors: Vec<Vec<Complex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity: Option<Vec<Complex>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementJson {
    pub module: String,
    #[serde(flatten)]
    pub field: VectorFieldJson,
}

/// `infinity` defaults to zero; `compact` defaults to whether it vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub domain: String,
    pub codomain: String,
    pub matrices: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infinity: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_at_infinity: Option<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameJson {
    pub module: String,
    pub members: Vec<String>,
}

/// A term `⟨ξ| ⊗ |η⟩`, either by element names or with inline fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermJson {
    Named([String; 2]),
    Inline { xi: VectorFieldJson, eta: VectorFieldJson },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub module: String,
    pub terms: Vec<TermJson>,
}

/// `entries` are tensor names in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixTensorJson {
    pub module: String,
    pub n: usize,
    pub entries: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceDoc {
    pub schema: u32,
    pub spectrum: SpectrumJson,
    #[serde(default)]
    pub modules: BTreeMap<String, ModuleJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub algebra_elements: BTreeMap<String, AlgebraJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub elements: BTreeMap<String, ElementJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub operators: BTreeMap<String, OperatorJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub frames: BTreeMap<String, FrameJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tensors: BTreeMap<String, TensorJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub matrix_tensors: BTreeMap<String, MatrixTensorJson>,
}

impl WorkspaceDoc {
    pub fn new(spectrum: &Spectrum) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            spectrum: SpectrumJson {
                points: spectrum.labels().to_vec(),
                infinity: spectrum.has_infinity(),
            },
            modules: BTreeMap::new(),
            algebra_elements: BTreeMap::new(),
            elements: BTreeMap::new(),
            operators: BTreeMap::new(),
            frames: BTreeMap::new(),
            tensors: BTreeMap::new(),
            matrix_tensors: BTreeMap::new(),
        }
    }

    pub fn insert_module(&mut self, name: &str, module: &HilbertModule) {
        let (projections, infinity_projection) = if module.is_free() {
            (None, None)
        } else {
            let p = module.projections();
            (
                Some(p.finite().iter().map(matrix_to_json).collect()),
                p.infinity().map(matrix_to_json),
            )
        };
        self.modules.insert(
            name.to_string(),
            ModuleJson {
                dim: module.dim(),
                truncated: module.is_truncated(),
                projections,
                infinity_projection,
            },
        );
    }

    pub fn insert_algebra_element(&mut self, name: &str, a: &AlgebraElement) {
        self.algebra_elements.insert(
            name.to_string(),
            AlgebraJson {
                values: a.field().finite().iter().map(complex_to_json).collect(),
                infinity: a.field().infinity().map(complex_to_json),
            },
        );
    }

    pub fn insert_element(&mut self, name: &str, module: &str, e: &ModuleElement) {
        self.elements.insert(
            name.to_string(),
            ElementJson {
                module: module.to_string(),
                field: vector_field_to_json(e),
            },
        );
    }

    pub fn insert_operator(&mut self, name: &str, domain: &str, codomain: &str, t: &AdjointableOperator) {
        self.operators.insert(
            name.to_string(),
            OperatorJson {
                domain: domain.to_string(),
                codomain: codomain.to_string(),
                matrices: t.field().finite().iter().map(matrix_to_json).collect(),
                infinity: t.field().infinity().map(matrix_to_json),
                compact: Some(t.is_compact()),
                trace_at_infinity: t.trace_at_infinity().map(|z| complex_to_json(&z)),
            },
        );
    }

    pub fn insert_frame(&mut self, name: &str, module: &str, members: &[&str]) {
        self.frames.insert(
            name.to_string(),
            FrameJson {
                module: module.to_string(),
                members: members.iter().map(|s| s.to_string()).collect(),
            },
        );
    }

    /// Stores the frame members as elements `{name}.{i}` and the frame itself.
    pub fn insert_frame_members(&mut self, name: &str, module: &str, frame: &FrameOfMultipliers) {
        let names: Vec<String> = (0..frame.len()).map(|i| format!("{name}.{i}")).collect();
        for (n, b) in names.iter().zip(frame.members()) {
            self.insert_element(n, module, b);
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.insert_frame(name, module, &refs);
    }

    pub fn insert_tensor(&mut self, name: &str, module: &str, u: &TensorElement) {
        self.tensors.insert(name.to_string(), tensor_to_json(module, u));
    }

    pub fn insert_matrix_tensor(&mut self, name: &str, module: &str, entries: &[&str], n: usize) {
        self.matrix_tensors.insert(
            name.to_string(),
            MatrixTensorJson {
                module: module.to_string(),
                n,
                entries: entries.iter().map(|s| s.to_string()).collect(),
            },
        );
    }
}

pub fn complex_to_json(z: &C64) -> Complex {
    [z.re, z.im]
}

fn complex_from_json(z: &Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    MatrixJson {
        rows: m.rows(),
        cols: m.cols(),
        data: m.data().iter().map(complex_to_json).collect(),
    }
}

fn matrix_from_json(m: &MatrixJson) -> Result<CMatrix> {
    CMatrix::new(m.rows, m.cols, m.data.iter().map(complex_from_json).collect())
}

pub fn vector_field_to_json(e: &ModuleElement) -> VectorFieldJson {
    let v = |x: &Vec<C64>| x.iter().map(complex_to_json).collect::<Vec<_>>();
    VectorFieldJson {
        vectors: e.field().finite().iter().map(v).collect(),
        infinity: e.field().infinity().map(v),
    }
}

/// Inline JSON for a tensor over the module called `module`.
pub fn tensor_to_json(module: &str, u: &TensorElement) -> TensorJson {
    TensorJson {
        module: module.to_string(),
        terms: u
            .terms()
            .iter()
            .map(|(xi, eta)| TermJson::Inline {
                xi: vector_field_to_json(xi),
                eta: vector_field_to_json(eta),
            })
            .collect(),
    }
}

fn per_point<'a, T>(
    spectrum: &Spectrum,
    what: &str,
    finite: &'a [T],
    infinity: Option<&'a T>,
) -> Result<(&'a [T], Option<&'a T>)> {
    if finite.len() != spectrum.len() {
        return Err(Error::Workspace(format!(
            "{what}: {} values for {} points",
            finite.len(),
            spectrum.len()
        )));
    }
    if infinity.is_some() && !spectrum.has_infinity() {
        return Err(Error::Workspace(format!("{what}: value at infinity on a spectrum without one")));
    }
    Ok((finite, infinity))
}

fn with_context<T>(what: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Workspace(_) => e,
        other => Error::Workspace(format!("{what}: {other}")),
    })
}

/// A loaded and validated workspace.
#[derive(Clone, Debug)]
pub struct Workspace {
    doc: WorkspaceDoc,
    spectrum: Arc<Spectrum>,
    modules: BTreeMap<String, ModuleRef>,
    algebra_elements: BTreeMap<String, AlgebraElement>,
    elements: BTreeMap<String, ModuleElement>,
    operators: BTreeMap<String, AdjointableOperator>,
    frames: BTreeMap<String, (String, Vec<ModuleElement>)>,
    tensors: BTreeMap<String, TensorElement>,
    matrix_tensors: BTreeMap<String, MatrixTensor>,
}

impl Workspace {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    /// Builds every object and checks cross-references and structural invariants.
    ///
    /// Frames are only checked for membership here; whether they satisfy the
    /// frame identity is what `frame-check` reports.
    pub fn from_doc(doc: WorkspaceDoc) -> Result<Self> {
        if doc.schema != SCHEMA_VERSION {
            return Err(Error::Workspace(format!(
                "unsupported schema {}, expected {SCHEMA_VERSION}",
                doc.schema
            )));
        }
        let spectrum = Arc::new(Spectrum::new(doc.spectrum.points.clone(), doc.spectrum.infinity)?);

        let mut modules = BTreeMap::new();
        for (name, m) in &doc.modules {
            let what = format!("module `{name}`");
            let module = with_context(&what, build_module(&spectrum, m))?;
            modules.insert(name.clone(), module.into_ref());
        }
        let module = |what: &str, name: &str| -> Result<ModuleRef> {
            modules
                .get(name)
                .cloned()
                .ok_or_else(|| Error::Workspace(format!("{what}: unknown module `{name}`")))
        };

        let mut algebra_elements = BTreeMap::new();
        for (name, a) in &doc.algebra_elements {
            let what = format!("algebra element `{name}`");
            let (fin, inf) = per_point(&spectrum, &what, &a.values, a.infinity.as_ref())?;
            let value = with_context(
                &what,
                AlgebraElement::new(
                    spectrum.clone(),
                    fin.iter().map(complex_from_json).collect(),
                    inf.map(complex_from_json).or(spectrum.has_infinity().then_some(C64::new(0.0, 0.0))),
                ),
            )?;
            algebra_elements.insert(name.clone(), value);
        }

        let mut elements = BTreeMap::new();
        for (name, e) in &doc.elements {
            let what = format!("element `{name}`");
            let m = module(&what, &e.module)?;
            elements.insert(name.clone(), with_context(&what, build_field(&m, &e.field))?);
        }
        let element = |what: &str, name: &str| -> Result<ModuleElement> {
            elements
                .get(name)
                .cloned()
                .ok_or_else(|| Error::Workspace(format!("{what}: unknown element `{name}`")))
        };

        let mut operators = BTreeMap::new();
        for (name, o) in &doc.operators {
            let what = format!("operator `{name}`");
            let domain = module(&what, &o.domain)?;
            let codomain = module(&what, &o.codomain)?;
            operators.insert(name.clone(), with_context(&what, build_operator(&domain, &codomain, o))?);
        }

        let mut frames = BTreeMap::new();
        for (name, f) in &doc.frames {
            let what = format!("frame `{name}`");
            let m = module(&what, &f.module)?;
            let members = f
                .members
                .iter()
                .map(|e| element(&what, e))
                .collect::<Result<Vec<_>>>()?;
            if let Some(i) = f.members.iter().zip(&members).position(|(_, b)| b.module() != &m) {
                return Err(Error::Workspace(format!(
                    "{what}: member `{}` is not over module `{}`",
                    f.members[i], f.module
                )));
            }
            frames.insert(name.clone(), (f.module.clone(), members));
        }

        let mut tensors = BTreeMap::new();
        for (name, t) in &doc.tensors {
            let what = format!("tensor `{name}`");
            let m = module(&what, &t.module)?;
            let terms = t
                .terms
                .iter()
                .map(|term| match term {
                    TermJson::Named([xi, eta]) => Ok((element(&what, xi)?, element(&what, eta)?)),
                    TermJson::Inline { xi, eta } => Ok((
                        with_context(&what, build_field(&m, xi))?,
                        with_context(&what, build_field(&m, eta))?,
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            tensors.insert(name.clone(), with_context(&what, TensorElement::new(&m, terms))?);
        }

        let mut matrix_tensors = BTreeMap::new();
        for (name, mt) in &doc.matrix_tensors {
            let what = format!("matrix tensor `{name}`");
            let m = module(&what, &mt.module)?;
            let entries = mt
                .entries
                .iter()
                .map(|e| {
                    tensors
                        .get(e)
                        .cloned()
                        .ok_or_else(|| Error::Workspace(format!("{what}: unknown tensor `{e}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            matrix_tensors.insert(name.clone(), with_context(&what, MatrixTensor::new(&m, mt.n, entries))?);
        }

        Ok(Self {
            doc,
            spectrum,
            modules,
            algebra_elements,
            elements,
            operators,
            frames,
            tensors,
            matrix_tensors,
        })
    }

    pub fn doc(&self) -> &WorkspaceDoc {
        &self.doc
    }

    /// Indented JSON with arrays of plain values kept on one line.
    pub fn to_json(&self) -> Result<String> {
        let mut out = String::new();
        write_value(&mut out, &serde_json::to_value(&self.doc)?, 0)?;
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn spectrum(&self) -> &Arc<Spectrum> {
        &self.spectrum
    }

    pub fn modules(&self) -> &BTreeMap<String, ModuleRef> {
        &self.modules
    }

    pub fn algebra_elements(&self) -> &BTreeMap<String, AlgebraElement> {
        &self.algebra_elements
    }

    pub fn elements(&self) -> &BTreeMap<String, ModuleElement> {
        &self.elements
    }

    pub fn operators(&self) -> &BTreeMap<String, AdjointableOperator> {
        &self.operators
    }

    pub fn tensors(&self) -> &BTreeMap<String, TensorElement> {
        &self.tensors
    }

    pub fn matrix_tensors(&self) -> &BTreeMap<String, MatrixTensor> {
        &self.matrix_tensors
    }

    pub fn module(&self, name: &str) -> Result<&ModuleRef> {
        lookup(&self.modules, "module", name)
    }

    pub fn element(&self, name: &str) -> Result<&ModuleElement> {
        lookup(&self.elements, "element", name)
    }

    pub fn operator(&self, name: &str) -> Result<&AdjointableOperator> {
        lookup(&self.operators, "operator", name)
    }

    pub fn tensor(&self, name: &str) -> Result<&TensorElement> {
        lookup(&self.tensors, "tensor", name)
    }

    pub fn matrix_tensor(&self, name: &str) -> Result<&MatrixTensor> {
        lookup(&self.matrix_tensors, "matrix tensor", name)
    }

    /// Name of the module an object of this workspace lives on.
    pub fn module_name(&self, module: &ModuleRef) -> Option<&str> {
        self.modules
            .iter()
            .find(|(_, m)| Arc::ptr_eq(m, module))
            .map(|(n, _)| n.as_str())
    }

    /// The module and members of a stored frame, without the frame check.
    pub fn frame_members(&self, name: &str) -> Result<(&ModuleRef, &[ModuleElement])> {
        let (module, members) = lookup(&self.frames, "frame", name)?;
        Ok((self.module(module)?, members))
    }

    /// A stored frame, or the built-in `standard` / `canonical` frame of `module`.
    pub fn frame_for(&self, name: &str, module: &ModuleRef) -> Result<FrameOfMultipliers> {
        if self.frames.contains_key(name) {
            let (m, members) = self.frame_members(name)?;
            if m != module {
                return Err(Error::ModuleMismatch(format!("frame `{name}` is over another module")));
            }
            return FrameOfMultipliers::new(m, members.to_vec());
        }
        match name {
            "standard" => FrameOfMultipliers::standard(module),
            "canonical" => FrameOfMultipliers::canonical(module),
            _ => Err(Error::Workspace(format!("unknown frame `{name}`"))),
        }
    }

    /// Counts of the loaded objects, as reported by `validate`.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "valid": true,
            "points": self.spectrum.len(),
            "infinity": self.spectrum.has_infinity(),
            "modules": self.modules.len(),
            "elements": self.elements.len(),
            "operators": self.operators.len(),
            "frames": self.frames.len(),
            "tensors": self.tensors.len(),
            "matrix_tensors": self.matrix_tensors.len(),
        })
    }

    /// The level-n instance checked by `verify-isometry`: a stored matrix
    /// tensor, a stored tensor in the top-left corner, or a random instance
    /// over the first module drawn from `seed`. Returns a description and the
    /// instance.
    pub fn isometry_instance(
        &self,
        level: usize,
        seed: u64,
        matrix: Option<&str>,
        tensor: Option<&str>,
    ) -> Result<(String, MatrixTensor)> {
        match (matrix, tensor) {
            (Some(_), Some(_)) => Err(Error::Workspace("give a matrix tensor or a tensor, not both".into())),
            (Some(name), None) => {
                let u = self.matrix_tensor(name)?.clone();
                if u.n() != level {
                    return Err(Error::Workspace(format!(
                        "matrix tensor `{name}` has level {}, not {level}",
                        u.n()
                    )));
                }
                Ok((format!("matrix tensor {name}"), u))
            }
            (None, Some(name)) => {
                let t = self.tensor(name)?;
                let mut diag = vec![TensorElement::zero(t.module()); level];
                if let Some(first) = diag.first_mut() {
                    *first = t.clone();
                }
                Ok((format!("corner embedding of tensor {name}"), MatrixTensor::diagonal(t.module(), &diag)?))
            }
            (None, None) => {
                let (name, module) = self
                    .modules
                    .iter()
                    .next()
                    .ok_or_else(|| Error::Workspace("workspace has no module".into()))?;
                let u = crate::random::random_matrix_tensor(&mut crate::random::rng(seed), module, level, 2)?;
                Ok((format!("random instance over module {name}"), u))
            }
        }
    }
}

fn contains_object(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Object(_) => true,
        serde_json::Value::Array(items) => items.iter().any(contains_object),
        _ => false,
    }
}

fn write_value(out: &mut String, v: &serde_json::Value, depth: usize) -> Result<()> {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k)?);
                out.push_str(": ");
                write_value(out, item, depth + 1)?;
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        Value::Array(items) if contains_object(v) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, item, depth + 1)?;
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        _ => out.push_str(&serde_json::to_string(v)?),
    }
    Ok(())
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str) -> Result<&'a T> {
    map.get(name)
        .ok_or_else(|| Error::Workspace(format!("unknown {kind} `{name}`")))
}

fn build_module(spectrum: &Arc<Spectrum>, m: &ModuleJson) -> Result<HilbertModule> {
    let module = match &m.projections {
        None => {
            if m.infinity_projection.is_some() {
                return Err(Error::Workspace("infinity_projection without projections".into()));
            }
            HilbertModule::free(spectrum.clone(), m.dim)
        }
        Some(ps) => {
            let (fin, inf) = per_point(spectrum, "projections", ps, m.infinity_projection.as_ref())?;
            if spectrum.has_infinity() && inf.is_none() {
                return Err(Error::Workspace("infinity_projection is required".into()));
            }
            let finite = fin.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
            let infinity = inf.map(matrix_from_json).transpose()?;
            HilbertModule::new(spectrum.clone(), m.dim, Field::new(finite, infinity))?
        }
    };
    Ok(module.truncated(m.truncated))
}

fn build_field(module: &ModuleRef, f: &VectorFieldJson) -> Result<ModuleElement> {
    let spectrum = module.spectrum();
    let (fin, inf) = per_point(spectrum, "vectors", &f.vectors, f.infinity.as_ref())?;
    let v = |x: &Vec<Complex>| x.iter().map(complex_from_json).collect::<Vec<_>>();
    let infinity = spectrum
        .has_infinity()
        .then(|| inf.map(v).unwrap_or_else(|| vec![C64::new(0.0, 0.0); module.dim()]));
    ModuleElement::new(module, Field::new(fin.iter().map(v).collect(), infinity))
}

fn build_operator(domain: &ModuleRef, codomain: &ModuleRef, o: &OperatorJson) -> Result<AdjointableOperator> {
    let spectrum = domain.spectrum();
    let (fin, inf) = per_point(spectrum, "matrices", &o.matrices, o.infinity.as_ref())?;
    let finite = fin.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    let infinity = match inf {
        Some(m) => Some(matrix_from_json(m)?),
        None => spectrum
            .has_infinity()
            .then(|| CMatrix::zeros(codomain.dim(), domain.dim())),
    };
    let vanishes = infinity
        .as_ref()
        .is_none_or(|m| m.max_abs() <= STRUCTURE_TOL * (1.0 + m.max_abs()));
    let t = AdjointableOperator::new(domain, codomain, Field::new(finite, infinity))?
        .with_compact(o.compact.unwrap_or(vanishes))?;
    t.with_trace_at_infinity(o.trace_at_infinity.as_ref().map(complex_from_json))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "schema": 1,
        "spectrum": { "points": ["a", "b"] },
        "modules": { "F": { "dim": 2 } },
        "elements": {
            "e1": { "module": "F", "vectors": [[[1, 0], [0, 0]], [[1, 0], [0, 0]]] },
            "e2": { "module": "F", "vectors": [[[0, 0], [1, 0]], [[0, 0], [1, 0]]] }
        },
        "operators": {
            "t": { "domain": "F", "codomain": "F", "matrices": [
                { "rows": 2, "cols": 2, "data": [[2, 0], [0, 0], [0, 0], [1, 0]] },
                { "rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0], [1, 0]] }
            ] }
        },
        "frames": { "std": { "module": "F", "members": ["e1", "e2"] } },
        "tensors": { "u": { "module": "F", "terms": [["e1", "e2"]] } },
        "matrix_tensors": { "U": { "module": "F", "n": 1, "entries": ["u"] } }
    }"#;

    #[test]
    fn loads_and_resolves() {
        let ws = Workspace::from_json(SMALL).unwrap();
        let t = ws.operator("t").unwrap();
        let f = ws.frame_for("std", ws.module("F").unwrap()).unwrap();
        assert_eq!(f.len(), 2);
        assert!(t.is_compact());
        assert_eq!(ws.tensor("u").unwrap().len(), 1);
        assert_eq!(ws.matrix_tensor("U").unwrap().n(), 1);
        assert_eq!(ws.module_name(ws.module("F").unwrap()), Some("F"));
    }

    #[test]
    fn round_trip_is_exact() {
        let ws = Workspace::from_json(SMALL).unwrap();
        let again = Workspace::from_json(&ws.to_json().unwrap()).unwrap();
        assert_eq!(ws.doc(), again.doc());
    }

    #[test]
    fn rejects_dangling_references() {
        let bad = SMALL.replace(r#"["e1", "e2"]] }"#, r#"["e1", "nope"]] }"#);
        assert!(matches!(Workspace::from_json(&bad), Err(Error::Workspace(_))));
        let bad = SMALL.replace(r#""members": ["e1", "e2"]"#, r#""members": ["e1", "zz"]"#);
        assert!(Workspace::from_json(&bad).is_err());
    }

    #[test]
    fn rejects_non_idempotent_projection() {
        let bad = SMALL.replace(
            r#""F": { "dim": 2 }"#,
            r#""F": { "dim": 2, "projections": [
                { "rows": 2, "cols": 2, "data": [[2, 0], [0, 0], [0, 0], [0, 0]] },
                { "rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0], [1, 0]] }
            ] }"#,
        );
        assert!(Workspace::from_json(&bad).is_err());
    }

    #[test]
    fn rejects_wrong_schema_and_unknown_fields() {
        assert!(Workspace::from_json(&SMALL.replace(r#""schema": 1"#, r#""schema": 2"#)).is_err());
        assert!(Workspace::from_json(&SMALL.replace(r#""schema": 1"#, r#""schema": 1, "extra": 0"#)).is_err());
    }

    #[test]
    fn inline_tensor_terms() {
        let ws = Workspace::from_json(SMALL).unwrap();
        let mut doc = ws.doc().clone();
        doc.insert_tensor("v", "F", ws.tensor("u").unwrap());
        let again = Workspace::from_doc(doc).unwrap();
        assert_eq!(again.tensor("v").unwrap().terms(), ws.tensor("u").unwrap().terms());
    }
}
