//! Pfaffian formats and the degree calculus that tracks them through
//! polynomial combination, differentiation, Lie brackets and minors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Format `(d, R, α, β)`: input dimension, chain length, chain degree and
/// degree of the outer polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PfaffianFormat {
    pub d: usize,
    #[serde(rename = "R")]
    pub chain_len: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl PfaffianFormat {
    pub fn new(d: usize, chain_len: usize, alpha: usize, beta: usize) -> Result<Self> {
        if alpha < 1 {
            return Err(Error::InvalidArgument("chain degree α must be at least 1".into()));
        }
        Ok(Self {
            d,
            chain_len,
            alpha,
            beta,
        })
    }

    fn same_chain(&self, other: &PfaffianFormat) -> bool {
        self.d == other.d && self.chain_len == other.chain_len && self.alpha == other.alpha
    }
}

/// Format of a network output: `(d, (r+2)·Σ n_ℓ, 1+2L, 1)`.
pub fn compute_format(d: usize, widths: &[usize], r: usize) -> Result<PfaffianFormat> {
    crate::network::validate_widths(d, widths)?;
    let neurons: usize = widths.iter().sum();
    PfaffianFormat::new(d, (r + 2) * neurons, 1 + 2 * widths.len(), 1)
}

/// Operations of the format calculus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatOp {
    /// `G1 + G2 + …`: β = max βi.
    Sum,
    /// `G1 · G2 · …`: β = Σ βi.
    Product,
    /// `G^e`: β = e·β.
    Power(usize),
    /// `∂_p G = ∂Q/∂x_p + Σ ∂Q/∂y_i · P_{i,p}`: β = β − 1 + α, no chain
    /// extension needed because the certificates already live on the chain.
    Derivative,
    /// `[X, Y]_a = Σ_b X_b ∂_b Y_a − Y_b ∂_b X_a` with inputs `(β_X, β_Y)`:
    /// β = β_X + β_Y + α − 1.
    BracketCoeff,
    /// Determinant of a `size × size` block of entries of degree β:
    /// β = size·β.
    Minor(usize),
}

/// Applies one rule of the calculus. All inputs must share `(d, R, α)`.
pub fn format_combine(op: FormatOp, inputs: &[PfaffianFormat]) -> Result<PfaffianFormat> {
    let first = *inputs
        .first()
        .ok_or_else(|| Error::InvalidArgument("format_combine needs at least one input".into()))?;
    if let Some(bad) = inputs.iter().find(|f| !f.same_chain(&first)) {
        return Err(Error::MismatchedChains(format!(
            "(d, R, α) = ({}, {}, {}) vs ({}, {}, {})",
            first.d, first.chain_len, first.alpha, bad.d, bad.chain_len, bad.alpha
        )));
    }
    let arity = |n: usize| -> Result<()> {
        if inputs.len() == n {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{op:?} takes {n} input(s), got {}",
                inputs.len()
            )))
        }
    };
    let beta = match op {
        FormatOp::Sum => inputs.iter().map(|f| f.beta).max().unwrap(),
        FormatOp::Product => inputs.iter().map(|f| f.beta).sum(),
        FormatOp::Power(e) => {
            arity(1)?;
            e * first.beta
        }
        FormatOp::Derivative => {
            arity(1)?;
            (first.beta + first.alpha).saturating_sub(1)
        }
        FormatOp::BracketCoeff => {
            arity(2)?;
            let (bx, by) = (inputs[0].beta, inputs[1].beta);
            // X_b ∂_b Y_a and Y_b ∂_b X_a have the same degree bound.
            (bx + by + first.alpha - 1).max(by + bx + first.alpha - 1)
        }
        FormatOp::Minor(size) => {
            arity(1)?;
            size * first.beta
        }
    };
    Ok(PfaffianFormat { beta, ..first })
}

/// Concatenates the chains of several functions into one shared chain:
/// lengths add, α and β are the maxima.
pub fn concat_chains(inputs: &[PfaffianFormat]) -> Result<PfaffianFormat> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
    if inputs.iter().any(|f| f.d != first.d) {
        return Err(Error::MismatchedChains("input dimensions differ".into()));
    }
    Ok(PfaffianFormat {
        d: first.d,
        chain_len: inputs.iter().map(|f| f.chain_len).sum(),
        alpha: inputs.iter().map(|f| f.alpha).max().unwrap(),
        beta: inputs.iter().map(|f| f.beta).max().unwrap(),
    })
}

/// Format shared by all coefficients of brackets of length ≤ `k` built from
/// degree-β₀ generator coefficients: `β_j = β_{j−1} + β₀ + α − 1`.
pub fn bracket_format(generator: PfaffianFormat, k: usize) -> Result<PfaffianFormat> {
    if k == 0 {
        return Err(Error::InvalidArgument("bracket length must be at least 1".into()));
    }
    let mut current = generator;
    for _ in 1..k {
        current = format_combine(FormatOp::BracketCoeff, &[current, generator])?;
    }
    Ok(current)
}
