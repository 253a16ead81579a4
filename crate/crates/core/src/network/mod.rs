//! Feedforward networks `h^(ℓ) = σ(W^(ℓ) h^(ℓ−1) + b^(ℓ))` with a scalar
//! affine head `F = c0 + c·h^(L)`.

mod jet;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activations::{ActivationRef, RiccatiActivation};
use crate::error::{Error, Result};

pub use jet::{Jet, JetLayout, MAX_JET_ORDER};

/// Axis-aligned box `∏ (lo_i, hi_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Shape(format!(
                "box bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidArgument(format!("empty box side ({a}, {b})")));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `(lo, hi)^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }
}

/// Architecture `(d, L, n_1..n_L)` plus activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub d: usize,
    pub widths: Vec<usize>,
    pub activation: Arc<RiccatiActivation>,
}

impl Architecture {
    pub fn new(d: usize, widths: Vec<usize>, activation: RiccatiActivation) -> Result<Self> {
        validate_widths(d, &widths)?;
        Ok(Self {
            d,
            widths,
            activation: Arc::new(activation),
        })
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }
}

pub(crate) fn validate_widths(d: usize, widths: &[usize]) -> Result<()> {
    if d == 0 {
        return Err(Error::Shape("input dimension must be at least 1".into()));
    }
    if widths.is_empty() {
        return Err(Error::Shape("depth must be at least 1".into()));
    }
    if let Some(l) = widths.iter().position(|&n| n == 0) {
        return Err(Error::Shape(format!("layer {} has width 0", l + 1)));
    }
    Ok(())
}

/// One affine layer; `weights` is row-major `rows × cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.cols + col]
    }
}

/// A fully specified network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    d: usize,
    layers: Vec<Layer>,
    c0: f64,
    head: Vec<f64>,
    activation: Arc<RiccatiActivation>,
}

/// Per-layer affine inputs `s^(ℓ)` and activations `h^(ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub preactivations: Vec<Vec<f64>>,
    pub activations: Vec<Vec<f64>>,
    pub output: f64,
}

/// Jets of `F` and of every affine input `s^(ℓ)_k`.
#[derive(Debug, Clone)]
pub struct NetworkJet {
    pub output: Jet,
    pub preactivations: Vec<Vec<Jet>>,
}

/// Outcome of [`NetworkSpec::analyticity_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticityReport {
    pub ok: bool,
    /// Minimum distance of any affine input to the boundary of the analytic
    /// interval (`+∞` when unbounded, negative when outside).
    pub worst_margin: f64,
}

fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidArgument(format!("{what}[{i}] is not finite"))),
        None => Ok(()),
    }
}

impl NetworkSpec {
    /// Validates shapes and finiteness.
    pub fn new(
        d: usize,
        layers: Vec<Layer>,
        c0: f64,
        head: Vec<f64>,
        activation: Arc<RiccatiActivation>,
    ) -> Result<Self> {
        let widths: Vec<usize> = layers.iter().map(|l| l.rows).collect();
        validate_widths(d, &widths)?;
        let mut prev = d;
        for (l, layer) in layers.iter().enumerate() {
            if layer.cols != prev {
                return Err(Error::Shape(format!(
                    "layer {} expects {} inputs but the previous width is {prev}",
                    l + 1,
                    layer.cols
                )));
            }
            if layer.weights.len() != layer.rows * layer.cols {
                return Err(Error::Shape(format!(
                    "layer {} has {} weights, expected {}x{}",
                    l + 1,
                    layer.weights.len(),
                    layer.rows,
                    layer.cols
                )));
            }
            if layer.biases.len() != layer.rows {
                return Err(Error::Shape(format!(
                    "layer {} has {} biases, expected {}",
                    l + 1,
                    layer.biases.len(),
                    layer.rows
                )));
            }
            check_finite(&format!("weights[{l}]"), &layer.weights)?;
            check_finite(&format!("biases[{l}]"), &layer.biases)?;
            prev = layer.rows;
        }
        if head.len() != prev {
            return Err(Error::Shape(format!(
                "head has {} coefficients, expected {prev}",
                head.len()
            )));
        }
        check_finite("head.c", &head)?;
        check_finite("head.c0", &[c0])?;
        Ok(Self {
            d,
            layers,
            c0,
            head,
            activation,
        })
    }

    /// Deterministic i.i.d. uniform draw on `[−scale, scale]` of every
    /// weight, bias and head coefficient.
    pub fn sample(arch: &Architecture, seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| scale * (2.0 * rng.gen::<f64>() - 1.0)).collect() };
        let mut layers = Vec::with_capacity(arch.depth());
        let mut prev = arch.d;
        for &n in &arch.widths {
            let weights = draw(n * prev);
            let biases = draw(n);
            layers.push(Layer {
                rows: n,
                cols: prev,
                weights,
                biases,
            });
            prev = n;
        }
        let head = draw(prev);
        let c0 = draw(1)[0];
        Self {
            d: arch.d,
            layers,
            c0,
            head,
            activation: arch.activation.clone(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.rows).collect()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn head(&self) -> (f64, &[f64]) {
        (self.c0, &self.head)
    }

    pub fn activation(&self) -> &RiccatiActivation {
        &self.activation
    }

    pub fn architecture(&self) -> Architecture {
        Architecture {
            d: self.d,
            widths: self.widths(),
            activation: self.activation.clone(),
        }
    }

    /// Same network with a different head.
    pub fn with_head(&self, c0: f64, c: Vec<f64>) -> Result<Self> {
        Self::new(self.d, self.layers.clone(), c0, c, self.activation.clone())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::Shape(format!(
                "input has length {}, expected {}",
                x.len(),
                self.d
            )));
        }
        Ok(())
    }

    /// Forward pass recording every layer.
    pub fn forward(&self, x: &[f64]) -> Result<LayerTrace> {
        self.check_input(x)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let input = act.last().map(Vec::as_slice).unwrap_or(x);
            let s: Vec<f64> = (0..layer.rows)
                .map(|k| {
                    let row = &layer.weights[k * layer.cols..(k + 1) * layer.cols];
                    layer.biases[k] + row.iter().zip(input).map(|(w, h)| w * h).sum::<f64>()
                })
                .collect();
            let h = s
                .iter()
                .map(|&t| self.activation.eval(t))
                .collect::<Result<Vec<f64>>>()?;
            pre.push(s);
            act.push(h);
        }
        let output = self.c0
            + self
                .head
                .iter()
                .zip(act.last().unwrap())
                .map(|(c, h)| c * h)
                .sum::<f64>();
        Ok(LayerTrace {
            preactivations: pre,
            activations: act,
            output,
        })
    }

    /// `F(x)` without keeping the trace.
    pub fn output(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut buf: Vec<f64> = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            next.clear();
            for k in 0..layer.rows {
                let row = &layer.weights[k * layer.cols..(k + 1) * layer.cols];
                let s = layer.biases[k] + row.iter().zip(&buf).map(|(w, h)| w * h).sum::<f64>();
                next.push(self.activation.eval(s)?);
            }
            std::mem::swap(&mut buf, &mut next);
        }
        Ok(self.c0 + self.head.iter().zip(&buf).map(|(c, h)| c * h).sum::<f64>())
    }

    /// Propagates truncated Taylor expansions through the network.
    pub fn jet_forward(&self, x: &[f64], order: usize) -> Result<NetworkJet> {
        self.check_input(x)?;
        Jet::check_order(order)?;
        let d = self.d;
        let mut current: Vec<Jet> = x
            .iter()
            .enumerate()
            .map(|(p, &v)| Jet::variable(d, order, p, v))
            .collect();
        let mut pre_all = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let mut pre = Vec::with_capacity(layer.rows);
            let mut next = Vec::with_capacity(layer.rows);
            for k in 0..layer.rows {
                let mut s = Jet::constant(d, order, layer.biases[k]);
                for (m, h) in current.iter().enumerate() {
                    s.add_scaled(layer.weight(k, m), h);
                }
                let derivs = self.activation.derivatives(s.value(), order)?;
                next.push(s.compose(&derivs));
                pre.push(s);
            }
            pre_all.push(pre);
            current = next;
        }
        let mut out = Jet::constant(d, order, self.c0);
        for (c, h) in self.head.iter().zip(&current) {
            out.add_scaled(*c, h);
        }
        Ok(NetworkJet {
            output: out,
            preactivations: pre_all,
        })
    }

    /// Samples `samples` Halton points of `domain` (offset by `seed`) and
    /// reports the smallest distance of any affine input to the edge of the
    /// activation's analytic interval.
    pub fn analyticity_check(&self, domain: &BoxDomain, samples: usize, seed: u64) -> AnalyticityReport {
        let interval = self.activation.analytic_interval();
        if interval.is_real_line() {
            return AnalyticityReport {
                ok: true,
                worst_margin: f64::INFINITY,
            };
        }
        let mut worst = f64::INFINITY;
        for i in 0..samples {
            let x = halton_point(domain, seed.wrapping_add(i as u64 + 1));
            let mut h = x;
            for layer in &self.layers {
                let mut next = Vec::with_capacity(layer.rows);
                for k in 0..layer.rows {
                    let row = &layer.weights[k * layer.cols..(k + 1) * layer.cols];
                    let s = layer.biases[k] + row.iter().zip(&h).map(|(w, v)| w * v).sum::<f64>();
                    worst = worst.min(interval.margin(s));
                    // Past the boundary the activation is undefined; stop here.
                    next.push(self.activation.eval(s).unwrap_or(f64::NAN));
                }
                h = next;
            }
        }
        AnalyticityReport {
            ok: worst > 0.0,
            worst_margin: worst,
        }
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            d: self.d,
            depth: self.layers.len(),
            widths: self.widths(),
            activation: self.activation.to_reference(),
            weights: self.layers.iter().map(|l| l.weights.clone()).collect(),
            biases: self.layers.iter().map(|l| l.biases.clone()).collect(),
            head: Head {
                c0: self.c0,
                c: self.head.clone(),
            },
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self> {
        if doc.depth != doc.widths.len() {
            return Err(Error::Shape(format!(
                "L = {} but {} widths given",
                doc.depth,
                doc.widths.len()
            )));
        }
        if doc.weights.len() != doc.depth || doc.biases.len() != doc.depth {
            return Err(Error::Shape(format!(
                "expected {} weight and bias arrays, got {} and {}",
                doc.depth,
                doc.weights.len(),
                doc.biases.len()
            )));
        }
        let activation = Arc::new(doc.activation.resolve()?);
        let mut prev = doc.d;
        let mut layers = Vec::with_capacity(doc.depth);
        for (l, &n) in doc.widths.iter().enumerate() {
            layers.push(Layer {
                rows: n,
                cols: prev,
                weights: doc.weights[l].clone(),
                biases: doc.biases[l].clone(),
            });
            prev = n;
        }
        Self::new(doc.d, layers, doc.head.c0, doc.head.c.clone(), activation)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// Scalar head `(c0, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Head {
    pub c0: f64,
    pub c: Vec<f64>,
}

/// Serialized network; weights are row-major per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub d: usize,
    #[serde(rename = "L")]
    pub depth: usize,
    pub widths: Vec<usize>,
    pub activation: ActivationRef,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub head: Head,
}

const HALTON_PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut f = inv;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// `index`-th Halton point mapped into `domain`.
pub fn halton_point(domain: &BoxDomain, index: u64) -> Vec<f64> {
    (0..domain.dim())
        .map(|a| {
            let u = radical_inverse(index, HALTON_PRIMES[a % HALTON_PRIMES.len()]);
            domain.lo[a] + u * domain.width(a)
        })
        .collect()
}
