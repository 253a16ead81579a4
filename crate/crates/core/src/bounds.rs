//! Exact evaluation of the architecture-only bounds.
//!
//! All values are arbitrary-precision integers `⌈C · N⌉` where `N` is the
//! integer part of the bound and `C` the (unspecified) domain constant,
//! taken as a positive rational that defaults to 1. Every bound carries a
//! constant tag saying so.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::{bracket_format, compute_format, concat_chains, format_combine, FormatOp, PfaffianFormat};
use crate::error::{Error, Result};

/// Which formula produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// `2^{R(R+1)/2} (1+L)^{R+1}`: zeros of a 1-D network.
    ZeroBound,
    /// `2^{R(R−1)/2} (d + min(d,R)(1+2L))^{d+R}`: total Betti number of a
    /// superlevel set.
    BettiBound,
    /// `2^{R(R−1)/2} s^d (dβ + min(d,R)α)^{d+R}`: generic semi-Pfaffian set.
    GvBound,
    /// The generic bound applied to the minors of the bracket matrix.
    RankdropBound,
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FormulaId::ZeroBound => "zero_bound",
            FormulaId::BettiBound => "betti_bound",
            FormulaId::GvBound => "gv_bound",
            FormulaId::RankdropBound => "rankdrop_bound",
        };
        f.write_str(s)
    }
}

/// An exact bound value with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct BigBound {
    pub value: BigUint,
    pub log10: f64,
    pub formula: FormulaId,
    /// Ordered `(name, value)` inputs.
    pub inputs: Vec<(String, String)>,
    pub constant_tag: String,
}

impl BigBound {
    fn new(
        formula: FormulaId,
        integer_part: BigUint,
        constant: &BigRational,
        constant_name: &str,
        inputs: Vec<(String, String)>,
    ) -> Self {
        let value = ceil_times(constant, &integer_part);
        let log10 = log10_big(&value);
        let constant_tag = if constant.is_one() {
            format!("{constant_name}=1 (unspecified domain constant; value is modulo {constant_name})")
        } else {
            format!("{constant_name}={constant} (user-supplied domain constant)")
        };
        Self {
            value,
            log10,
            formula,
            inputs,
            constant_tag,
        }
    }

    pub fn decimal(&self) -> String {
        self.value.to_str_radix(10)
    }

    pub fn inputs_string(&self) -> String {
        self.inputs
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// `log10` of a big integer from its leading bits.
pub fn log10_big(value: &BigUint) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().unwrap().log10();
    }
    let shift = bits - 64;
    let top: BigUint = value >> shift;
    top.to_f64().unwrap().log10() + shift as f64 * std::f64::consts::LOG10_2
}

fn ceil_times(c: &BigRational, n: &BigUint) -> BigUint {
    let prod = c * BigRational::from_integer(BigInt::from(n.clone()));
    let (q, r) = prod.numer().div_rem(prod.denom());
    let q = if r.is_zero() { q } else { q + 1 };
    q.to_biguint().unwrap_or_default()
}

fn check_constant(c: &BigRational) -> Result<()> {
    if c.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("constant must be positive, got {c}")))
    }
}

fn pow2(e: u64) -> BigUint {
    BigUint::one() << e
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// `⌈C · 2^{R(R+1)/2} · (1+L)^{R+1}⌉`.
pub fn zero_bound(chain_len: u64, depth: u64, c: &BigRational) -> Result<BigBound> {
    check_constant(c)?;
    if depth < 1 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    let r = chain_len;
    let n = pow2(r * (r + 1) / 2) * BigUint::from(1 + depth).pow(u32_exp(r + 1)?);
    Ok(BigBound::new(
        FormulaId::ZeroBound,
        n,
        c,
        "C_I",
        vec![kv("R", r), kv("L", depth), kv("C", c)],
    ))
}

fn u32_exp(e: u64) -> Result<u32> {
    u32::try_from(e).map_err(|_| Error::InvalidArgument(format!("exponent {e} too large")))
}

/// `⌈C · 2^{R(R−1)/2} · (d + min(d,R)(1+2L))^{d+R}⌉`.
pub fn betti_bound(d: u64, chain_len: u64, depth: u64, c: &BigRational) -> Result<BigBound> {
    check_constant(c)?;
    if d < 1 || depth < 1 {
        return Err(Error::InvalidArgument("d and L must be at least 1".into()));
    }
    let r = chain_len;
    let base = d + d.min(r) * (1 + 2 * depth);
    let n = pow2(r * r.saturating_sub(1) / 2) * BigUint::from(base).pow(u32_exp(d + r)?);
    Ok(BigBound::new(
        FormulaId::BettiBound,
        n,
        c,
        "C_V",
        vec![kv("d", d), kv("R", r), kv("L", depth), kv("C", c)],
    ))
}

/// `2^{R(R−1)/2} · s^d · (dβ + min(d,R)α)^{d+R}` without the constant.
fn gv_integer(d: u64, s: &BigUint, r: u64, alpha: u64, beta: u64) -> Result<BigUint> {
    let base = d * beta + d.min(r) * alpha;
    Ok(pow2(r * r.saturating_sub(1) / 2) * s.pow(u32_exp(d)?) * BigUint::from(base).pow(u32_exp(d + r)?))
}

/// `⌈C · 2^{R(R−1)/2} · s^d · (dβ + min(d,R)α)^{d+R}⌉`.
pub fn gv_bound(d: u64, s: u64, chain_len: u64, alpha: u64, beta: u64, c: &BigRational) -> Result<BigBound> {
    check_constant(c)?;
    if s < 1 {
        return Err(Error::InvalidArgument("s must be at least 1".into()));
    }
    let n = gv_integer(d, &BigUint::from(s), chain_len, alpha, beta)?;
    Ok(BigBound::new(
        FormulaId::GvBound,
        n,
        c,
        "C_V",
        vec![
            kv("d", d),
            kv("s", s),
            kv("R", chain_len),
            kv("alpha", alpha),
            kv("beta", beta),
            kv("C", c),
        ],
    ))
}

/// How the bracket set is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BracketMode {
    /// Hall/Lyndon basis of the free Lie algebra.
    Hall,
    /// Every binary bracket tree with labelled leaves.
    AllTrees,
}

impl fmt::Display for BracketMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BracketMode::Hall => "hall",
            BracketMode::AllTrees => "all-trees",
        })
    }
}

impl std::str::FromStr for BracketMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hall" => Ok(BracketMode::Hall),
            "all-trees" | "all_trees" => Ok(BracketMode::AllTrees),
            other => Err(Error::InvalidArgument(format!("unknown bracket mode `{other}`"))),
        }
    }
}

fn mobius(mut n: u64) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of Lyndon words of length exactly `n` over `m` letters.
pub fn witt_count(m: u64, n: u64) -> BigUint {
    let mut acc = BigInt::zero();
    for div in (1..=n).filter(|k| n.is_multiple_of(*k)) {
        let mu = mobius(div);
        if mu != 0 {
            acc += BigInt::from(mu) * BigInt::from(m).pow(u32::try_from(n / div).unwrap());
        }
    }
    (acc / BigInt::from(n)).to_biguint().unwrap_or_default()
}

fn catalan(n: u64) -> BigUint {
    // C(2n, n) / (n + 1)
    binomial(2 * n, n) / BigUint::from(n + 1)
}

/// Exact binomial coefficient; 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn binomial_big(n: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// `|ℬ_k|` for `m` generators.
pub fn bracket_count(m: u64, k: u64, mode: BracketMode) -> BigUint {
    (1..=k)
        .map(|j| match mode {
            BracketMode::Hall => witt_count(m, j),
            BracketMode::AllTrees => BigUint::from(m).pow(u32::try_from(j).unwrap()) * catalan(j - 1),
        })
        .sum()
}

/// `s_{k,ρ} = C(d, ρ+1) · C(|ℬ_k|, ρ+1)`.
pub fn s_count(d: u64, rho: u64, bracket_total: &BigUint) -> BigUint {
    binomial(d, rho + 1) * binomial_big(bracket_total, rho + 1)
}

/// Constants used for the rank-drop bound, all derived by the format
/// calculus rather than supplied externally.
#[derive(Debug, Clone, PartialEq)]
pub struct RankdropConstants {
    /// Shared chain after concatenating the `d·m` coefficient networks.
    pub entry_format: PfaffianFormat,
    /// Format of every `(ρ+1)`-minor.
    pub minor_format: PfaffianFormat,
    pub bracket_total: BigUint,
    pub s: BigUint,
}

/// Derives `(R_k, α_k, β_k)` and `s_{k,ρ}`.
pub fn rankdrop_constants(
    d: u64,
    m: u64,
    k: u64,
    rho: u64,
    widths: &[usize],
    r: usize,
    mode: BracketMode,
) -> Result<RankdropConstants> {
    if m < 1 || k < 1 {
        return Err(Error::InvalidArgument("m and k must be at least 1".into()));
    }
    let single = compute_format(d as usize, widths, r)?;
    let shared = concat_chains(&vec![single; (d * m) as usize])?;
    let entry = bracket_format(shared, k as usize)?;
    let minor = format_combine(FormatOp::Minor((rho + 1) as usize), &[entry])?;
    let bracket_total = bracket_count(m, k, mode);
    let s = s_count(d, rho, &bracket_total);
    Ok(RankdropConstants {
        entry_format: entry,
        minor_format: minor,
        bracket_total,
        s,
    })
}

/// Betti bound for the rank-drop locus `Z^k_ρ`. When `s_{k,ρ} = 0` (no
/// minors of that size exist) the locus is the whole domain and the bound
/// is reported with `s = 1`.
#[allow(clippy::too_many_arguments)]
pub fn rankdrop_bound(
    d: u64,
    m: u64,
    k: u64,
    rho: u64,
    widths: &[usize],
    r: usize,
    c: &BigRational,
    mode: BracketMode,
) -> Result<BigBound> {
    check_constant(c)?;
    let consts = rankdrop_constants(d, m, k, rho, widths, r, mode)?;
    let f = consts.minor_format;
    let s_eff = if consts.s.is_zero() {
        BigUint::one()
    } else {
        consts.s.clone()
    };
    let n = gv_integer(d, &s_eff, f.chain_len as u64, f.alpha as u64, f.beta as u64)?;
    Ok(BigBound::new(
        FormulaId::RankdropBound,
        n,
        c,
        "C_V",
        vec![
            kv("d", d),
            kv("m", m),
            kv("k", k),
            kv("rho", rho),
            kv(
                "widths",
                widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","),
            ),
            kv("r", r),
            kv("mode", mode),
            kv("B_k", &consts.bracket_total),
            kv("s", &consts.s),
            kv("R_k", f.chain_len),
            kv("alpha_k", f.alpha),
            kv("beta_k", f.beta),
            kv("constants", "implementation-derived"),
            kv("C", c),
        ],
    ))
}
