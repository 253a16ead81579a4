use std::collections::BTreeMap;
use std::fmt;

/// Sparse monomial: sorted `(variable, exponent)` pairs with exponent ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(u32, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: u32) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// From dense exponents; zero entries are dropped.
    pub fn from_exponents(exps: &[u32]) -> Self {
        Monomial(
            exps.iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| (v as u32, e))
                .collect(),
        )
    }

    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, var: u32) -> u32 {
        self.0.iter().find(|&&(v, _)| v == var).map(|&(_, e)| e).unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<u32> {
        self.0.last().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `∂/∂var` as `(multiplier, monomial)`, or `None` when it vanishes.
    pub fn derivative(&self, var: u32) -> Option<(u32, Monomial)> {
        let pos = self.0.iter().position(|&(v, _)| v == var)?;
        let e = self.0[pos].1;
        let mut rest = self.0.clone();
        if e == 1 {
            rest.remove(pos);
        } else {
            rest[pos].1 = e - 1;
        }
        Some((e, Monomial(rest)))
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0.iter().map(|&(v, e)| point[v as usize].powi(e as i32)).product()
    }

    /// Dense exponent vector of length `nvars`.
    pub fn dense(&self, nvars: usize) -> Vec<u32> {
        let mut out = vec![0; nvars];
        for &(v, e) in &self.0 {
            out[v as usize] = e;
        }
        out
    }
}

/// Sparse multivariate polynomial with `f64` coefficients. Exact zeros are
/// never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparsePoly {
    terms: BTreeMap<Monomial, f64>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), 1.0);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, f64)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn max_var(&self) -> Option<u32> {
        self.terms.keys().filter_map(Monomial::max_var).max()
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        out.add_assign_scaled(other, 1.0);
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        out.add_assign_scaled(other, -1.0);
        out
    }

    pub fn add_assign_scaled(&mut self, other: &SparsePoly, factor: f64) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * factor);
        }
    }

    pub fn scale(&self, factor: f64) -> SparsePoly {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c * factor)))
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> SparsePoly {
        (0..e).fold(SparsePoly::constant(1.0), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self, var: u32) -> SparsePoly {
        Self::from_terms(
            self.terms
                .iter()
                .filter_map(|(m, c)| m.derivative(var).map(|(e, dm)| (dm, c * e as f64))),
        )
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    /// Terms as `(dense exponent vector, coefficient)` pairs.
    pub fn dense_terms(&self, nvars: usize) -> Vec<(Vec<u32>, f64)> {
        self.terms.iter().map(|(m, &c)| (m.dense(nvars), c)).collect()
    }

    /// Mutable access to the coefficient of the first stored term.
    pub(crate) fn first_coefficient_mut(&mut self) -> Option<&mut f64> {
        self.terms.values_mut().next()
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for &(v, e) in m.factors() {
                if e == 1 {
                    write!(f, "*v{v}")?;
                } else {
                    write!(f, "*v{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_degree() {
        let x = SparsePoly::var(0);
        let y = SparsePoly::var(1);
        let p = x.add(&y).pow(2);
        assert_eq!(p.num_terms(), 3);
        assert_eq!(p.total_degree(), 2);
        assert_eq!(p.coefficient(&Monomial::from_exponents(&[1, 1])), 2.0);
        assert_eq!(p.eval(&[1.5, -0.5]), 1.0);
        assert!(p.sub(&p).is_zero());
        assert_eq!(SparsePoly::zero().total_degree(), 0);
    }

    #[test]
    fn sum_degree_is_max_product_degree_is_sum() {
        let a = SparsePoly::var(0).pow(3).add(&SparsePoly::constant(1.0));
        let b = SparsePoly::var(1).pow(2);
        assert_eq!(a.add(&b).total_degree(), a.total_degree().max(b.total_degree()));
        assert_eq!(a.mul(&b).total_degree(), a.total_degree() + b.total_degree());
        assert_eq!(a.pow(4).total_degree(), 4 * a.total_degree());
    }

    #[test]
    fn derivative_matches_power_rule() {
        // d/dx (3 x^2 y + x) = 6 x y + 1
        let p = SparsePoly::from_terms([(Monomial::from_exponents(&[2, 1]), 3.0), (Monomial::var(0), 1.0)]);
        let dp = p.derivative(0);
        assert_eq!(dp.eval(&[2.0, 5.0]), 61.0);
        assert!(p.derivative(7).is_zero());
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = SparsePoly::var(3);
        p.add_term(Monomial::var(3), -1.0);
        assert!(p.is_zero());
        assert_eq!(p.max_var(), None);
    }
}
