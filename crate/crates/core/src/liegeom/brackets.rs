use std::collections::HashMap;
use std::fmt;

use crate::bounds::BracketMode;
use crate::error::{Error, Result};
use crate::network::Jet;

use super::family::VectorFieldFamily;

/// An iterated bracket of the generating fields. Generators are numbered
/// from 0 internally and printed from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BracketTerm {
    Generator(usize),
    Bracket(Box<BracketTerm>, Box<BracketTerm>),
}

impl BracketTerm {
    pub fn bracket(left: BracketTerm, right: BracketTerm) -> Self {
        BracketTerm::Bracket(Box::new(left), Box::new(right))
    }

    /// Number of leaves.
    pub fn length(&self) -> usize {
        match self {
            BracketTerm::Generator(_) => 1,
            BracketTerm::Bracket(a, b) => a.length() + b.length(),
        }
    }

    /// Leaf labels from left to right.
    pub fn word(&self) -> Vec<usize> {
        match self {
            BracketTerm::Generator(i) => vec![*i],
            BracketTerm::Bracket(a, b) => {
                let mut w = a.word();
                w.extend(b.word());
                w
            }
        }
    }

    pub fn max_generator(&self) -> usize {
        self.word().into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for BracketTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketTerm::Generator(i) => write!(f, "X{}", i + 1),
            BracketTerm::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// Lyndon words over `0..m` of length `1..=n`, in lexicographic order
/// (Duval's algorithm).
pub fn lyndon_words(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 || n == 0 {
        return out;
    }
    let mut w: Vec<usize> = vec![0];
    loop {
        out.push(w.clone());
        let len = w.len();
        while w.len() < n {
            let c = w[w.len() - len];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == m - 1 {
                w.pop();
            } else {
                break;
            }
        }
        match w.last_mut() {
            Some(last) => *last += 1,
            None => break,
        }
    }
    out
}

fn is_lyndon(w: &[usize]) -> bool {
    (1..w.len()).all(|i| w[i..] > *w)
}

/// Standard bracketing: `w = u v` with `v` the longest proper Lyndon
/// suffix, bracketed as `[std(u), std(v)]`.
pub fn standard_bracketing(w: &[usize]) -> BracketTerm {
    if w.len() == 1 {
        return BracketTerm::Generator(w[0]);
    }
    let split = (1..w.len())
        .find(|&i| is_lyndon(&w[i..]))
        .expect("a single letter is always a Lyndon suffix");
    BracketTerm::bracket(standard_bracketing(&w[..split]), standard_bracketing(&w[split..]))
}

fn all_trees_of_length(m: usize, len: usize, memo: &mut HashMap<usize, Vec<BracketTerm>>) -> Vec<BracketTerm> {
    if let Some(v) = memo.get(&len) {
        return v.clone();
    }
    let out = if len == 1 {
        (0..m).map(BracketTerm::Generator).collect()
    } else {
        let mut out = Vec::new();
        for left_len in 1..len {
            let lefts = all_trees_of_length(m, left_len, memo);
            let rights = all_trees_of_length(m, len - left_len, memo);
            for l in &lefts {
                for r in &rights {
                    out.push(BracketTerm::bracket(l.clone(), r.clone()));
                }
            }
        }
        out
    };
    memo.insert(len, out.clone());
    out
}

/// The bracket set of length `≤ k`, ordered by length.
pub fn enumerate_brackets(m: usize, k: usize, mode: BracketMode) -> Vec<BracketTerm> {
    match mode {
        BracketMode::Hall => {
            let mut words = lyndon_words(m, k);
            words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            words.iter().map(|w| standard_bracketing(w)).collect()
        }
        BracketMode::AllTrees => {
            let mut memo = HashMap::new();
            (1..=k).flat_map(|len| all_trees_of_length(m, len, &mut memo)).collect()
        }
    }
}

/// `[X, Y]_a = Σ_b X_b ∂_b Y_a − Y_b ∂_b X_a` on jets. The result has one
/// order less than the lower of the inputs.
pub fn bracket_jets(x: &[Jet], y: &[Jet]) -> Result<Vec<Jet>> {
    let d = x.len();
    let order = x[0].order().min(y[0].order());
    if order == 0 {
        return Err(Error::InvalidArgument("bracket needs jets of order at least 1".into()));
    }
    let mut dy = Vec::with_capacity(d);
    let mut dx = Vec::with_capacity(d);
    for b in 0..d {
        dy.push(y.iter().map(|ya| ya.differentiate(b)).collect::<Result<Vec<_>>>()?);
        dx.push(x.iter().map(|xa| xa.differentiate(b)).collect::<Result<Vec<_>>>()?);
    }
    (0..d)
        .map(|a| {
            let mut acc = Jet::constant(x[0].dim(), order - 1, 0.0);
            for b in 0..d {
                acc = acc.add(&x[b].mul(&dy[b][a])).sub(&y[b].mul(&dx[b][a]));
            }
            Ok(acc.truncate(order - 1))
        })
        .collect()
}

/// Evaluates bracket terms at one point, sharing sub-brackets.
pub struct BracketEvaluator {
    generators: Vec<Vec<Jet>>,
    top_order: usize,
    cache: HashMap<BracketTerm, Vec<Jet>>,
}

impl BracketEvaluator {
    /// Expands every component at `z` to the order needed for brackets of
    /// length up to `max_len`.
    pub fn new(family: &VectorFieldFamily, z: &[f64], max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::InvalidArgument("bracket length must be at least 1".into()));
        }
        let top_order = max_len - 1;
        Ok(Self {
            generators: family.jets(z, top_order)?,
            top_order,
            cache: HashMap::new(),
        })
    }

    fn jets(&mut self, term: &BracketTerm) -> Result<Vec<Jet>> {
        if let Some(v) = self.cache.get(term) {
            return Ok(v.clone());
        }
        let out = match term {
            BracketTerm::Generator(i) => self
                .generators
                .get(*i)
                .ok_or_else(|| Error::InvalidArgument(format!("generator X{} does not exist", i + 1)))?
                .clone(),
            BracketTerm::Bracket(a, b) => {
                if term.length() > self.top_order + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "bracket {term} is longer than the prepared jet order allows"
                    )));
                }
                let ja = self.jets(a)?;
                let jb = self.jets(b)?;
                let keep = self.top_order + 1 - term.length();
                bracket_jets(&ja, &jb)?.into_iter().map(|j| j.truncate(keep)).collect()
            }
        };
        self.cache.insert(term.clone(), out.clone());
        Ok(out)
    }

    /// Coordinate vector of the bracket at the expansion point.
    pub fn value(&mut self, term: &BracketTerm) -> Result<Vec<f64>> {
        Ok(self.jets(term)?.iter().map(Jet::value).collect())
    }
}

/// Coordinate vector of one bracket at `z`.
pub fn bracket_eval(family: &VectorFieldFamily, term: &BracketTerm, z: &[f64]) -> Result<Vec<f64>> {
    BracketEvaluator::new(family, z, term.length())?.value(term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bracket_count;

    #[test]
    fn lyndon_enumeration() {
        let w = lyndon_words(2, 3);
        assert_eq!(w, vec![vec![0], vec![0, 0, 1], vec![0, 1], vec![0, 1, 1], vec![1]]);
        for m in 1..=3 {
            for k in 1..=5 {
                for mode in [BracketMode::Hall, BracketMode::AllTrees] {
                    let n = enumerate_brackets(m, k, mode).len();
                    assert_eq!(num_bigint::BigUint::from(n), bracket_count(m as u64, k as u64, mode));
                }
            }
        }
    }

    #[test]
    fn hall_order_and_bracketing() {
        let names: Vec<String> = enumerate_brackets(2, 3, BracketMode::Hall)
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(names, ["X1", "X2", "[X1,X2]", "[X1,[X1,X2]]", "[[X1,X2],X2]"]);
        assert_eq!(enumerate_brackets(1, 3, BracketMode::Hall).len(), 1);
        let t = enumerate_brackets(2, 2, BracketMode::AllTrees);
        assert_eq!(t.len(), 6);
        assert_eq!(t[2].to_string(), "[X1,X1]");
    }

    #[test]
    fn grushin_and_heisenberg_brackets() {
        let g = VectorFieldFamily::grushin();
        let t = BracketTerm::bracket(BracketTerm::Generator(0), BracketTerm::Generator(1));
        assert_eq!(bracket_eval(&g, &t, &[0.3, -2.0]).unwrap(), vec![0.0, 1.0]);
        let h = VectorFieldFamily::heisenberg();
        assert_eq!(bracket_eval(&h, &t, &[0.3, -2.0, 5.0]).unwrap(), vec![0.0, 0.0, 1.0]);
        let self_bracket = BracketTerm::bracket(BracketTerm::Generator(1), BracketTerm::Generator(1));
        assert_eq!(
            bracket_eval(&h, &self_bracket, &[0.3, -2.0, 5.0]).unwrap(),
            vec![0.0, 0.0, 0.0]
        );
    }
}
