use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::BracketMode;
use crate::chain::{Monomial, SparsePoly};
use crate::error::{Error, Result};
use crate::network::{Architecture, Jet, NetworkDocument, NetworkSpec};

/// One coordinate function `X_{i,p}` of a vector field.
#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Network(Arc<NetworkSpec>),
    Polynomial(SparsePoly),
}

impl Component {
    /// Taylor jet of the component at `z`.
    pub fn jet(&self, z: &[f64], order: usize) -> Result<Jet> {
        match self {
            Component::Network(net) => Ok(net.jet_forward(z, order)?.output),
            Component::Polynomial(p) => Ok(polynomial_jet(p, z, order)),
        }
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        match self {
            Component::Network(net) => net.output(z),
            Component::Polynomial(p) => Ok(p.eval(z)),
        }
    }
}

/// Polynomial components of one field: per coordinate, a list of
/// `(exponents, coefficient)` pairs.
pub type FieldTerms = Vec<Vec<(Vec<u32>, f64)>>;

/// Expansion of a polynomial at `z`, computed with jet arithmetic.
pub fn polynomial_jet(p: &SparsePoly, z: &[f64], order: usize) -> Jet {
    let d = z.len();
    let vars: Vec<Jet> = (0..d).map(|b| Jet::variable(d, order, b, z[b])).collect();
    let mut out = Jet::constant(d, order, 0.0);
    for (mono, c) in p.terms() {
        let mut term = Jet::constant(d, order, c);
        for &(v, e) in mono.factors() {
            for _ in 0..e {
                term = term.mul(&vars[v as usize]);
            }
        }
        out = out.add(&term);
    }
    out
}

/// `m` vector fields on `ℝ^d` with components `fields[i][p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldFamily {
    d: usize,
    fields: Vec<Vec<Component>>,
    /// Enumeration mode declared with the family.
    pub mode: BracketMode,
}

impl VectorFieldFamily {
    /// Validates the component grid. Network components must all take `d`
    /// inputs and share one architecture.
    pub fn new(d: usize, fields: Vec<Vec<Component>>) -> Result<Self> {
        if d == 0 || fields.is_empty() {
            return Err(Error::InvalidArgument("need d ≥ 1 and at least one field".into()));
        }
        let mut reference: Option<(Vec<usize>, String)> = None;
        for (i, field) in fields.iter().enumerate() {
            if field.len() != d {
                return Err(Error::Shape(format!(
                    "field {} has {} components, expected {d}",
                    i + 1,
                    field.len()
                )));
            }
            for (p, comp) in field.iter().enumerate() {
                match comp {
                    Component::Network(net) => {
                        if net.input_dim() != d {
                            return Err(Error::Shape(format!(
                                "component ({}, {}) takes {} inputs, expected {d}",
                                i + 1,
                                p + 1,
                                net.input_dim()
                            )));
                        }
                        let key = (net.widths(), net.activation().name().to_string());
                        match &reference {
                            None => reference = Some(key),
                            Some(r) if *r != key => {
                                return Err(Error::Shape(format!(
                                    "component ({}, {}) has architecture {:?}/{} but the family uses {:?}/{}",
                                    i + 1,
                                    p + 1,
                                    key.0,
                                    key.1,
                                    r.0,
                                    r.1
                                )))
                            }
                            Some(_) => {}
                        }
                    }
                    Component::Polynomial(poly) => {
                        if let Some(v) = poly.max_var() {
                            if v as usize >= d {
                                return Err(Error::Shape(format!(
                                    "component ({}, {}) uses variable {v} in dimension {d}",
                                    i + 1,
                                    p + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            d,
            fields,
            mode: BracketMode::Hall,
        })
    }

    /// Every component is an independent random network of `arch`.
    pub fn random_networks(arch: &Architecture, m: usize, seed: u64, scale: f64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields = (0..m)
            .map(|_| {
                (0..arch.d)
                    .map(|_| Component::Network(Arc::new(NetworkSpec::sample(arch, rng.gen(), scale))))
                    .collect()
            })
            .collect();
        Self::new(arch.d, fields)
    }

    /// Fields given by polynomial components, one [`FieldTerms`] per field.
    pub fn polynomial(d: usize, terms: &[FieldTerms]) -> Result<Self> {
        let fields = terms
            .iter()
            .map(|field| {
                field
                    .iter()
                    .map(|list| {
                        Component::Polynomial(SparsePoly::from_terms(
                            list.iter().map(|(e, c)| (Monomial::from_exponents(e), *c)),
                        ))
                    })
                    .collect()
            })
            .collect();
        Self::new(d, fields)
    }

    /// `X1 = ∂x − (y/2)∂t`, `X2 = ∂y + (x/2)∂t` on `ℝ³` with coordinates
    /// `(x, y, t)`.
    pub fn heisenberg() -> Self {
        Self::polynomial(
            3,
            &[
                vec![vec![(vec![0, 0, 0], 1.0)], vec![], vec![(vec![0, 1, 0], -0.5)]],
                vec![vec![], vec![(vec![0, 0, 0], 1.0)], vec![(vec![1, 0, 0], 0.5)]],
            ],
        )
        .expect("fixture is well formed")
    }

    /// `X1 = ∂x`, `X2 = x ∂y` on `ℝ²`.
    pub fn grushin() -> Self {
        Self::polynomial(
            2,
            &[
                vec![vec![(vec![0, 0], 1.0)], vec![]],
                vec![vec![], vec![(vec![1, 0], 1.0)]],
            ],
        )
        .expect("fixture is well formed")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_fields(&self) -> usize {
        self.fields.len()
    }

    pub fn component(&self, field: usize, coord: usize) -> &Component {
        &self.fields[field][coord]
    }

    /// Jets of every component at `z`, indexed `[field][coordinate]`.
    pub fn jets(&self, z: &[f64], order: usize) -> Result<Vec<Vec<Jet>>> {
        if z.len() != self.d {
            return Err(Error::Shape(format!(
                "point has length {}, expected {}",
                z.len(),
                self.d
            )));
        }
        Jet::check_order(order)?;
        self.fields
            .iter()
            .map(|f| f.iter().map(|c| c.jet(z, order)).collect())
            .collect()
    }

    /// Field values at `z`, indexed `[field][coordinate]`.
    pub fn values(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.fields
            .iter()
            .map(|f| f.iter().map(|c| c.eval(z)).collect())
            .collect()
    }

    pub fn to_document(&self) -> FamilyDocument {
        FamilyDocument {
            d: self.d,
            m: self.fields.len(),
            mode: self.mode,
            fields: self
                .fields
                .iter()
                .map(|f| {
                    f.iter()
                        .map(|c| match c {
                            Component::Network(net) => ComponentDocument::Network(net.to_document()),
                            Component::Polynomial(p) => ComponentDocument::Polynomial(p.dense_terms(self.d)),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &FamilyDocument) -> Result<Self> {
        if doc.fields.len() != doc.m {
            return Err(Error::Shape(format!(
                "m = {} but {} fields given",
                doc.m,
                doc.fields.len()
            )));
        }
        let fields = doc
            .fields
            .iter()
            .map(|f| {
                f.iter()
                    .map(|c| match c {
                        ComponentDocument::Network(n) => {
                            Ok(Component::Network(Arc::new(NetworkSpec::from_document(n)?)))
                        }
                        ComponentDocument::Polynomial(terms) => {
                            if let Some((e, _)) = terms.iter().find(|(e, _)| e.len() != doc.d) {
                                return Err(Error::Shape(format!(
                                    "exponent vector {e:?} does not have length {}",
                                    doc.d
                                )));
                            }
                            Ok(Component::Polynomial(SparsePoly::from_terms(
                                terms.iter().map(|(e, c)| (Monomial::from_exponents(e), *c)),
                            )))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut family = Self::new(doc.d, fields)?;
        family.mode = doc.mode;
        Ok(family)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("family documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FamilyDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// A component in a family file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentDocument {
    Network(NetworkDocument),
    /// `(exponents, coefficient)` pairs; exponent vectors have length `d`.
    Polynomial(Vec<(Vec<u32>, f64)>),
}

/// Family declaration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub d: usize,
    pub m: usize,
    #[serde(default = "default_mode")]
    pub mode: BracketMode,
    /// `fields[i][p]` is the `p`-th coordinate of the `i`-th field.
    pub fields: Vec<Vec<ComponentDocument>>,
}

fn default_mode() -> BracketMode {
    BracketMode::Hall
}
