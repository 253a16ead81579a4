//! The ordered Pfaffian chain of a network and its derivative certificates.
//!
//! For every neuron `(ℓ, k)` the chain holds the block
//! `s^(ℓ)_k, u^(ℓ)_{k,r}, …, u^(ℓ)_{k,0}` where `u_{k,q} = σ^(q)(s_k)`.
//! Blocks are concatenated layer by layer, neuron by neuron. Every
//! `∂_p f_i` is then a polynomial in `x` and `f_1..f_i`:
//!
//! - `∂_p s^(1)_k = W^(1)_{kp}`,
//! - `∂_p s^(ℓ)_k = Σ_m W^(ℓ)_{km} ∂_p u^(ℓ−1)_{m,0}`,
//! - `∂_p u_{k,q} = u_{k,q+1} · ∂_p s_k` for `q < r`,
//! - `∂_p u_{k,r} = (a0 + a1 u_{k,r} + a2 u_{k,r}²) · ∂_p s_k`.
//!
//! Polynomial variables are numbered `x_1..x_d → 0..d−1` and
//! `f_i → d + i` (0-based `i`).

mod format;
mod poly;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkSpec;

pub use format::{bracket_format, compute_format, concat_chains, format_combine, FormatOp, PfaffianFormat};
pub use poly::{Monomial, SparsePoly};

/// What a chain entry computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainKind {
    /// The affine input `s^(ℓ)_k`.
    Affine,
    /// `u^(ℓ)_{k,q} = σ^(q)(s^(ℓ)_k)`.
    JetDeriv { order: usize },
}

/// One entry `f_i` of the chain; `layer` and `neuron` are 1-based, `index`
/// is the 0-based position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainFunction {
    #[serde(flatten)]
    pub kind: ChainKind,
    pub layer: usize,
    pub neuron: usize,
    pub index: usize,
}

/// Index arithmetic for the block layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLayout {
    widths: Vec<usize>,
    r: usize,
    layer_offsets: Vec<usize>,
}

impl ChainLayout {
    pub fn new(widths: &[usize], r: usize) -> Self {
        let mut layer_offsets = Vec::with_capacity(widths.len());
        let mut acc = 0;
        for &n in widths {
            layer_offsets.push(acc);
            acc += n;
        }
        Self {
            widths: widths.to_vec(),
            r,
            layer_offsets,
        }
    }

    pub fn block_len(&self) -> usize {
        self.r + 2
    }

    pub fn len(&self) -> usize {
        self.block_len() * self.widths.iter().sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn block_start(&self, layer: usize, neuron: usize) -> usize {
        self.block_len() * (self.layer_offsets[layer - 1] + neuron - 1)
    }

    /// Position of `s^(layer)_neuron`.
    pub fn affine(&self, layer: usize, neuron: usize) -> usize {
        self.block_start(layer, neuron)
    }

    /// Position of `u^(layer)_{neuron,order}`.
    pub fn deriv(&self, layer: usize, neuron: usize, order: usize) -> usize {
        debug_assert!(order <= self.r);
        self.block_start(layer, neuron) + 1 + (self.r - order)
    }

    pub fn entries(&self) -> Vec<ChainFunction> {
        let mut out = Vec::with_capacity(self.len());
        for (l, &n) in self.widths.iter().enumerate() {
            for k in 1..=n {
                out.push(ChainFunction {
                    kind: ChainKind::Affine,
                    layer: l + 1,
                    neuron: k,
                    index: out.len(),
                });
                for q in (0..=self.r).rev() {
                    out.push(ChainFunction {
                        kind: ChainKind::JetDeriv { order: q },
                        layer: l + 1,
                        neuron: k,
                        index: out.len(),
                    });
                }
            }
        }
        out
    }
}

/// The ordered chain `f_1..f_R` of a network.
pub fn build_chain(net: &NetworkSpec) -> Vec<ChainFunction> {
    ChainLayout::new(&net.widths(), net.activation().riccati_index()).entries()
}

/// Values `f_1(x)..f_R(x)`.
pub fn chain_values(net: &NetworkSpec, x: &[f64]) -> Result<Vec<f64>> {
    let trace = net.forward(x)?;
    let r = net.activation().riccati_index();
    let mut out = Vec::with_capacity(build_chain_len(net));
    for layer in &trace.preactivations {
        for &s in layer {
            out.push(s);
            let derivs = net.activation().derivatives(s, r)?;
            out.extend(derivs.iter().rev());
        }
    }
    Ok(out)
}

fn build_chain_len(net: &NetworkSpec) -> usize {
    ChainLayout::new(&net.widths(), net.activation().riccati_index()).len()
}

/// Polynomial derivative certificates `P_{i,p}` for every chain entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificates {
    d: usize,
    r: usize,
    chain: Vec<ChainFunction>,
    polys: Vec<Vec<Arc<SparsePoly>>>,
}

/// Derives all certificates of `net`. The expansion of `∂_p s^(ℓ)_k` is
/// memoized per `(ℓ, k, p)` and shared with the entries that reuse it.
pub fn derive_certificates(net: &NetworkSpec) -> Certificates {
    let d = net.input_dim();
    let r = net.activation().riccati_index();
    let widths = net.widths();
    let layout = ChainLayout::new(&widths, r);
    let chain = layout.entries();
    let coeffs = net.activation().coefficients();
    let y = |i: usize| SparsePoly::var((d + i) as u32);

    let mut polys: Vec<Vec<Arc<SparsePoly>>> = vec![Vec::new(); chain.len()];
    // ds[(ℓ, k, p)] = ∂_p s^(ℓ)_k
    let mut ds: HashMap<(usize, usize, usize), Arc<SparsePoly>> = HashMap::new();
    // du0[(ℓ, k, p)] = ∂_p u^(ℓ)_{k,0}
    let mut du0: HashMap<(usize, usize, usize), Arc<SparsePoly>> = HashMap::new();

    for (li, layer) in net.layers().iter().enumerate() {
        let l = li + 1;
        for k in 1..=layer.rows {
            for p in 0..d {
                let ds_poly = if l == 1 {
                    Arc::new(SparsePoly::constant(layer.weight(k - 1, p)))
                } else {
                    let mut acc = SparsePoly::zero();
                    for m in 1..=layer.cols {
                        acc.add_assign_scaled(&du0[&(l - 1, m, p)], layer.weight(k - 1, m - 1));
                    }
                    Arc::new(acc)
                };
                ds.insert((l, k, p), ds_poly.clone());
                polys[layout.affine(l, k)].push(ds_poly.clone());

                // Riccati entry first; lower orders follow in chain order.
                let top = layout.deriv(l, k, r);
                let riccati = SparsePoly::constant(coeffs.a0)
                    .add(&y(top).scale(coeffs.a1))
                    .add(&y(top).pow(2).scale(coeffs.a2));
                polys[top].push(Arc::new(riccati.mul(&ds_poly)));
                for q in (0..r).rev() {
                    let idx = layout.deriv(l, k, q);
                    let cert = y(layout.deriv(l, k, q + 1)).mul(&ds_poly);
                    polys[idx].push(Arc::new(cert));
                }
                du0.insert((l, k, p), polys[layout.deriv(l, k, 0)][p].clone());
            }
        }
    }
    Certificates { d, r, chain, polys }
}

/// `F = c0 + Σ_k c_k u^(L)_{k,0}` as a polynomial over the chain.
pub fn output_polynomial(net: &NetworkSpec) -> SparsePoly {
    let d = net.input_dim();
    let layout = ChainLayout::new(&net.widths(), net.activation().riccati_index());
    let (c0, c) = net.head();
    let mut q = SparsePoly::constant(c0);
    for (k, &ck) in c.iter().enumerate() {
        q.add_term(Monomial::var((d + layout.deriv(net.depth(), k + 1, 0)) as u32), ck);
    }
    q
}

impl Certificates {
    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn riccati_index(&self) -> usize {
        self.r
    }

    pub fn chain(&self) -> &[ChainFunction] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// `P_{i,p}`.
    pub fn get(&self, i: usize, p: usize) -> &SparsePoly {
        &self.polys[i][p]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.polys[i].iter().map(|p| p.total_degree()).max().unwrap_or(0)
    }

    /// Largest certificate degree among entries of each layer.
    pub fn degree_by_layer(&self) -> Vec<u32> {
        let layers = self.chain.last().map(|f| f.layer).unwrap_or(0);
        let mut out = vec![0; layers];
        for f in &self.chain {
            out[f.layer - 1] = out[f.layer - 1].max(self.degree(f.index));
        }
        out
    }

    /// Adds `delta` to the first stored coefficient of `P_{i,p}`; used to
    /// confirm that verification notices a wrong certificate.
    pub fn perturb(&mut self, i: usize, p: usize, delta: f64) {
        let poly = Arc::make_mut(&mut self.polys[i][p]);
        match poly.first_coefficient_mut() {
            Some(c) => *c += delta,
            None => *poly = SparsePoly::constant(delta),
        }
    }

    /// Total derivative along the chain of `Q(x, f)`: `∂Q/∂x_p + Σ_i ∂Q/∂y_i · P_{i,p}`.
    pub fn chain_derivative(&self, q: &SparsePoly, p: usize) -> SparsePoly {
        let mut out = q.derivative(p as u32);
        for i in 0..self.chain.len() {
            let dq = q.derivative((self.d + i) as u32);
            if !dq.is_zero() {
                out = out.add(&dq.mul(self.get(i, p)));
            }
        }
        out
    }

    /// Audit document: chain entries and `[exponents, coefficient]` terms of
    /// every `P_{i,p}` over `(x_1..x_d, y_1..y_{i+1})`.
    pub fn to_document(&self) -> CertificateDocument {
        let mut certificates = Vec::new();
        for (i, per_p) in self.polys.iter().enumerate() {
            for (p, poly) in per_p.iter().enumerate() {
                certificates.push(CertificateEntry {
                    i,
                    p,
                    degree: poly.total_degree(),
                    terms: poly.dense_terms(self.d + i + 1),
                });
            }
        }
        CertificateDocument {
            d: self.d,
            r: self.r,
            chain_len: self.chain.len(),
            chain: self.chain.clone(),
            certificates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub i: usize,
    pub p: usize,
    pub degree: u32,
    pub terms: Vec<(Vec<u32>, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub d: usize,
    pub r: usize,
    #[serde(rename = "R")]
    pub chain_len: usize,
    pub chain: Vec<ChainFunction>,
    pub certificates: Vec<CertificateEntry>,
}

/// Outcome of [`verify_chain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainReport {
    /// Max of `|∂_p f_i − P_{i,p}(x, f)| / (1 + |∂_p f_i|)`.
    pub max_residual: f64,
    /// `(i, p, point index)` of the worst residual.
    pub worst: Option<(usize, usize, usize)>,
    pub ok: bool,
}

/// Compares every certificate with the gradient obtained from first-order
/// jets at each point.
pub fn verify_chain(net: &NetworkSpec, certs: &Certificates, points: &[Vec<f64>], tol: f64) -> Result<ChainReport> {
    let d = net.input_dim();
    let r = net.activation().riccati_index();
    if certs.input_dim() != d || certs.len() != build_chain_len(net) {
        return Err(Error::Shape("certificates do not belong to this network".into()));
    }
    let mut max_residual = 0.0f64;
    let mut worst = None;
    for (pi, x) in points.iter().enumerate() {
        let values = chain_values(net, x)?;
        let mut point = x.clone();
        point.extend_from_slice(&values);

        let jets = net.jet_forward(x, 1)?;
        let mut gradients: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for layer in &jets.preactivations {
            for s in layer {
                gradients.push((0..d).map(|p| s.gradient_component(p)).collect());
                let derivs = net.activation().derivatives(s.value(), r + 1)?;
                for q in (0..=r).rev() {
                    let u = s.compose(&derivs[q..q + 2]);
                    gradients.push((0..d).map(|p| u.gradient_component(p)).collect());
                }
            }
        }
        for (i, grad) in gradients.iter().enumerate() {
            for (p, &g) in grad.iter().enumerate() {
                let predicted = certs.get(i, p).eval(&point);
                let res = (g - predicted).abs() / (1.0 + g.abs());
                let res = if res.is_nan() { f64::INFINITY } else { res };
                if res > max_residual || worst.is_none() {
                    max_residual = max_residual.max(res);
                    worst = Some((i, p, pi));
                }
            }
        }
    }
    Ok(ChainReport {
        max_residual,
        worst,
        ok: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::RiccatiActivation;
    use crate::network::{Architecture, Layer};

    fn single(act: RiccatiActivation, w: f64) -> NetworkSpec {
        NetworkSpec::new(
            1,
            vec![Layer {
                rows: 1,
                cols: 1,
                weights: vec![w],
                biases: vec![0.2],
            }],
            0.0,
            vec![1.0],
            Arc::new(act),
        )
        .unwrap()
    }

    #[test]
    fn chain_lengths_and_order() {
        let net = single(RiccatiActivation::tanh(), 1.0);
        let chain = build_chain(&net);
        assert_eq!(chain.len(), 2);
        assert_eq!(chain[0].kind, ChainKind::Affine);
        assert_eq!(chain[1].kind, ChainKind::JetDeriv { order: 0 });

        let arch = Architecture::new(2, vec![2, 1], RiccatiActivation::softplus()).unwrap();
        let net = NetworkSpec::sample(&arch, 0, 1.0);
        let chain = build_chain(&net);
        assert_eq!(chain.len(), 9);
        assert!(chain[..6].iter().all(|f| f.layer == 1));
        assert!(chain[6..].iter().all(|f| f.layer == 2));
        let orders: Vec<ChainKind> = chain[..3].iter().map(|f| f.kind).collect();
        assert_eq!(
            orders,
            vec![
                ChainKind::Affine,
                ChainKind::JetDeriv { order: 1 },
                ChainKind::JetDeriv { order: 0 }
            ]
        );
    }

    #[test]
    fn single_neuron_certificates() {
        let w = 1.7;
        let lg = derive_certificates(&single(RiccatiActivation::logistic(), w));
        // y index of u_{1,0} is d + 1 = 2
        let expect = SparsePoly::from_terms([(Monomial::var(2), w), (Monomial::from_exponents(&[0, 0, 2]), -w)]);
        assert_eq!(lg.get(1, 0), &expect);
        assert_eq!(lg.degree(1), 2);
        assert_eq!(lg.get(0, 0), &SparsePoly::constant(w));

        let th = derive_certificates(&single(RiccatiActivation::tanh(), w));
        let expect = SparsePoly::from_terms([(Monomial::one(), w), (Monomial::from_exponents(&[0, 0, 2]), -w)]);
        assert_eq!(th.get(1, 0), &expect);
    }

    #[test]
    fn verify_detects_corruption() {
        let arch = Architecture::new(2, vec![3, 2], RiccatiActivation::tanh()).unwrap();
        let net = NetworkSpec::sample(&arch, 4, 1.0);
        let mut certs = derive_certificates(&net);
        let points: Vec<Vec<f64>> = (0..10).map(|i| vec![0.1 * i as f64, -0.05 * i as f64]).collect();
        let ok = verify_chain(&net, &certs, &points, 1e-10).unwrap();
        assert!(ok.ok, "{ok:?}");
        certs.perturb(7, 1, 0.1);
        let bad = verify_chain(&net, &certs, &points, 1e-10).unwrap();
        assert!(!bad.ok);
        assert_eq!(bad.worst.map(|w| (w.0, w.1)), Some((7, 1)));
    }

    #[test]
    fn derivative_of_output_has_degree_at_most_alpha() {
        let net = single(RiccatiActivation::logistic(), 0.9);
        let certs = derive_certificates(&net);
        let q = output_polynomial(&net);
        let fmt = compute_format(1, &[1], 0).unwrap();
        let dq = certs.chain_derivative(&q, 0);
        let derived = format_combine(FormatOp::Derivative, &[fmt]).unwrap();
        assert_eq!(derived.beta, fmt.alpha);
        assert!(dq.total_degree() as usize <= derived.beta);
        // value check: F' = w σ'(s)
        let x = [0.3];
        let mut pt = x.to_vec();
        pt.extend(chain_values(&net, &x).unwrap());
        let s: f64 = 0.9 * 0.3 + 0.2;
        let sig = 1.0 / (1.0 + (-s).exp());
        assert!((dq.eval(&pt) - 0.9 * sig * (1.0 - sig)).abs() < 1e-15);
    }

    #[test]
    fn document_has_prefix_exponents() {
        let net = single(RiccatiActivation::softplus(), 1.0);
        let doc = derive_certificates(&net).to_document();
        assert_eq!(doc.chain_len, 3);
        for e in &doc.certificates {
            for (exps, _) in &e.terms {
                assert_eq!(exps.len(), doc.d + e.i + 1);
            }
        }
        let js = serde_json::to_string(&doc).unwrap();
        assert!(js.contains("\"kind\":\"jet_deriv\""));
    }
}
