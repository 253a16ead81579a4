//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] stores the Taylor coefficients `∂^α f(x) / α!` for every
//! multi-index `|α| ≤ order` in `dim` variables. Monomials are laid out in
//! graded order (by total degree, then lexicographically descending), so the
//! layout of a lower order is a prefix of every higher one and truncation is
//! a slice.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest supported jet order.
pub const MAX_JET_ORDER: usize = 6;

/// Monomial table for a given `(dim, order)`.
#[derive(Debug)]
pub struct JetLayout {
    dim: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// `(lhs, rhs, target)` triples with `deg(lhs) + deg(rhs) ≤ order`,
    /// sorted by target then lhs.
    products: Vec<(u32, u32, u32)>,
    /// `shift[var][i]` is the index of monomial `i + e_var` when it exists.
    shift: Vec<Vec<Option<u32>>>,
    /// `α!` per monomial.
    factorials: Vec<f64>,
}

fn compositions(dim: usize, total: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if prefix.len() + 1 == dim {
        prefix.push(total as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u8);
        compositions(dim, total - first, prefix, out);
        prefix.pop();
    }
}

impl JetLayout {
    fn new(dim: usize, order: usize) -> Self {
        let mut exponents = Vec::new();
        for deg in 0..=order {
            compositions(dim, deg, &mut Vec::with_capacity(dim), &mut exponents);
        }
        let index: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &[u8]| e.iter().map(|&v| v as usize).sum::<usize>();
        let mut products = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            for (j, b) in exponents.iter().enumerate() {
                if degree(a) + degree(b) <= order {
                    let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                    products.push((i as u32, j as u32, index[&sum] as u32));
                }
            }
        }
        products.sort_by_key(|&(i, _, t)| (t, i));
        let shift = (0..dim)
            .map(|var| {
                exponents
                    .iter()
                    .map(|e| {
                        let mut up = e.clone();
                        up[var] += 1;
                        index.get(&up).map(|&i| i as u32)
                    })
                    .collect()
            })
            .collect();
        let factorials = exponents
            .iter()
            .map(|e| e.iter().map(|&v| (1..=v as u32).product::<u32>() as f64).product())
            .collect();
        Self {
            dim,
            order,
            exponents,
            index,
            products,
            shift,
            factorials,
        }
    }

    /// Shared layout for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<JetLayout> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<JetLayout>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(JetLayout::new(dim, order)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.exponents
    }

    /// Number of monomials of total degree `≤ order` in `dim` variables.
    pub fn len_for(dim: usize, order: usize) -> usize {
        // C(dim + order, order)
        (1..=order).fold(1usize, |acc, j| acc * (dim + j) / j)
    }
}

/// Truncated Taylor expansion of a scalar function at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn check_order(order: usize) -> Result<()> {
        if order > MAX_JET_ORDER {
            Err(Error::InvalidArgument(format!(
                "jet order {order} exceeds the supported maximum {MAX_JET_ORDER}"
            )))
        } else {
            Ok(())
        }
    }

    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        let layout = JetLayout::get(dim, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Self { layout, coeffs }
    }

    /// The coordinate function `x_var` expanded at a point whose `var`-th
    /// coordinate is `value`.
    pub fn variable(dim: usize, order: usize, var: usize, value: f64) -> Self {
        let mut j = Self::constant(dim, order, value);
        if order > 0 {
            j.coeffs[1 + var] = 1.0;
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &JetLayout {
        &self.layout
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficients in layout order.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, exponents: &[u8]) -> Option<f64> {
        self.layout.index.get(exponents).map(|&i| self.coeffs[i])
    }

    /// The partial derivative `∂^α f` at the expansion point.
    pub fn partial(&self, exponents: &[u8]) -> Option<f64> {
        self.layout
            .index
            .get(exponents)
            .map(|&i| self.coeffs[i] * self.layout.factorials[i])
    }

    /// First partial derivative `∂_var f` at the expansion point.
    pub fn gradient_component(&self, var: usize) -> f64 {
        if self.order() == 0 {
            return f64::NAN;
        }
        self.coeffs[1 + var]
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = JetLayout::get(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    fn aligned<'a>(&'a self, other: &'a Jet) -> (Jet, Jet) {
        let order = self.order().min(other.order());
        (self.truncate(order), other.truncate(order))
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let (mut a, b) = self.aligned(other);
        a.coeffs.iter_mut().zip(&b.coeffs).for_each(|(x, y)| *x += y);
        a
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let (mut a, b) = self.aligned(other);
        a.coeffs.iter_mut().zip(&b.coeffs).for_each(|(x, y)| *x -= y);
        a
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `self += factor · other` at matching orders.
    pub fn add_scaled(&mut self, factor: f64, other: &Jet) {
        debug_assert_eq!(self.order(), other.order());
        self.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(x, y)| *x += factor * y);
    }

    pub fn add_constant(&mut self, value: f64) {
        self.coeffs[0] += value;
    }

    /// Truncated product at the lower of the two orders.
    pub fn mul(&self, other: &Jet) -> Jet {
        let (a, b) = self.aligned(other);
        let mut out = vec![0.0; a.coeffs.len()];
        for &(i, j, t) in &a.layout.products {
            out[t as usize] += a.coeffs[i as usize] * b.coeffs[j as usize];
        }
        Jet {
            layout: a.layout,
            coeffs: out,
        }
    }

    /// `g ∘ self` where `derivs[j] = g^(j)(self.value())` for `j ≤ order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let order = self.order();
        assert!(derivs.len() > order, "compose needs {} derivatives", order + 1);
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut inv_fact = vec![1.0; order + 1];
        for j in 1..=order {
            inv_fact[j] = inv_fact[j - 1] / j as f64;
        }
        let mut acc = Jet::constant(self.dim(), order, derivs[order] * inv_fact[order]);
        for j in (0..order).rev() {
            acc = acc.mul(&delta);
            acc.coeffs[0] += derivs[j] * inv_fact[j];
        }
        acc
    }

    /// `∂_var` of the expansion; the result has one order less.
    pub fn differentiate(&self, var: usize) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::InvalidArgument("cannot differentiate an order-0 jet".into()));
        }
        let layout = JetLayout::get(self.dim(), self.order() - 1);
        let coeffs = (0..layout.len())
            .map(|i| {
                let up = self.layout.shift[var][i].expect("graded layout has the shifted monomial");
                let e = self.layout.exponents[i][var] as f64 + 1.0;
                e * self.coeffs[up as usize]
            })
            .collect();
        Ok(Jet { layout, coeffs })
    }
}
