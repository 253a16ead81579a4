//! Riccati-class activations.
//!
//! An activation `σ` belongs to the class when it is nondecreasing and its
//! `r`-th derivative `ζ = σ^(r)` solves `ζ' = a0 + a1 ζ + a2 ζ²` with
//! `a2 ≠ 0`. Derivatives of order `q ≤ r` come from closed forms; every
//! higher order is a polynomial in `ζ` obtained from the recurrence
//! `Q_1(y) = a0 + a1 y + a2 y²`, `Q_{j+1} = Q_j' · Q_1`.
//!
//! Builtins (`logistic`, `tanh`, `softplus`) are registry data whose
//! coefficients are certified at construction. Custom activations are
//! restricted to `r = 0` and are given by their Riccati coefficients plus an
//! anchor value `ζ(t0) = y0`; the constant-coefficient Riccati equation is
//! then solved in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order served from the cached Riccati recurrence.
pub const MAX_DERIVATIVE_ORDER: usize = 24;

/// Residual tolerance used when certifying an activation.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const MONOTONE_SLACK: f64 = 1e-12;
const CERTIFY_SAMPLES: usize = 100;

/// Coefficients of the Riccati right-hand side `a0 + a1 y + a2 y²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiccatiCoefficients {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
}

impl RiccatiCoefficients {
    pub fn new(a0: f64, a1: f64, a2: f64) -> Self {
        Self { a0, a1, a2 }
    }

    #[inline]
    pub fn rhs(&self, y: f64) -> f64 {
        self.a0 + y * (self.a1 + self.a2 * y)
    }
}

/// Open interval `(lo, hi)`, either end possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AnalyticInterval {
    pub const REAL_LINE: AnalyticInterval = AnalyticInterval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "analytic interval ({lo}, {hi}) is empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }

    /// Distance from `t` to the nearest endpoint; negative when outside,
    /// `+∞` for the whole real line.
    pub fn margin(&self, t: f64) -> f64 {
        (t - self.lo).min(self.hi - t)
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    /// Compact window used for sampling-based certification.
    pub(crate) fn certification_window(&self) -> (f64, f64) {
        let lo = self.lo.max(-5.0);
        let hi = self.hi.min(5.0);
        let inset = 0.05 * (hi - lo);
        let lo = if self.lo > -5.0 { lo + inset } else { lo };
        let hi = if self.hi < 5.0 { hi - inset } else { hi };
        (lo, hi)
    }
}

/// Closed-form solution of a constant-coefficient Riccati equation through a
/// given anchor point. With `w = ζ + a1/(2 a2)` the equation becomes
/// `w' = a2 (w² − D)`, `D = (a1² − 4 a0 a2) / (4 a2²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RiccatiSolution {
    Constant(f64),
    /// `ζ = −k tanh(a2 k (t + shift)) − offset`
    Tanh {
        k: f64,
        a2: f64,
        shift: f64,
        offset: f64,
    },
    /// `ζ = −k coth(a2 k (t + shift)) − offset`
    Coth {
        k: f64,
        a2: f64,
        shift: f64,
        offset: f64,
    },
    /// `ζ = k tan(a2 k (t + shift)) − offset`
    Tan {
        k: f64,
        a2: f64,
        shift: f64,
        offset: f64,
    },
    /// `ζ = −1 / (a2 (t + shift)) − offset`
    Rational {
        a2: f64,
        shift: f64,
        offset: f64,
    },
}

impl RiccatiSolution {
    fn through(coeffs: RiccatiCoefficients, t0: f64, y0: f64) -> Self {
        let RiccatiCoefficients { a0, a1, a2 } = coeffs;
        let offset = a1 / (2.0 * a2);
        let w0 = y0 + offset;
        let disc = (a1 * a1 - 4.0 * a0 * a2) / (4.0 * a2 * a2);
        if disc > 0.0 {
            let k = disc.sqrt();
            if (w0.abs() - k).abs() <= 1e-15 * k.max(1.0) {
                RiccatiSolution::Constant(y0)
            } else if w0.abs() < k {
                let u0 = (-w0 / k).atanh() / (a2 * k);
                RiccatiSolution::Tanh {
                    k,
                    a2,
                    shift: u0 - t0,
                    offset,
                }
            } else {
                let u0 = (-k / w0).atanh() / (a2 * k);
                RiccatiSolution::Coth {
                    k,
                    a2,
                    shift: u0 - t0,
                    offset,
                }
            }
        } else if disc < 0.0 {
            let k = (-disc).sqrt();
            let u0 = (w0 / k).atan() / (a2 * k);
            RiccatiSolution::Tan {
                k,
                a2,
                shift: u0 - t0,
                offset,
            }
        } else if w0 == 0.0 {
            RiccatiSolution::Constant(y0)
        } else {
            let u0 = -1.0 / (a2 * w0);
            RiccatiSolution::Rational {
                a2,
                shift: u0 - t0,
                offset,
            }
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            RiccatiSolution::Constant(v) => v,
            RiccatiSolution::Tanh { k, a2, shift, offset } => -k * (a2 * k * (t + shift)).tanh() - offset,
            RiccatiSolution::Coth { k, a2, shift, offset } => -k / (a2 * k * (t + shift)).tanh() - offset,
            RiccatiSolution::Tan { k, a2, shift, offset } => k * (a2 * k * (t + shift)).tan() - offset,
            RiccatiSolution::Rational { a2, shift, offset } => -1.0 / (a2 * (t + shift)) - offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ClosedForm {
    Logistic,
    Tanh,
    Softplus,
    Custom(RiccatiSolution),
}

/// Declaration record for a user-defined activation (`r = 0` only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivationDeclaration {
    pub name: String,
    #[serde(default)]
    pub r: usize,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// `[lo, hi]`; `null` stands for an infinite end.
    pub interval: [Option<f64>; 2],
    /// `[t0, y0]` with `σ(t0) = y0`.
    pub anchor: [f64; 2],
}

/// An activation of the Riccati class together with its certified data.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiActivation {
    name: String,
    r: usize,
    coeffs: RiccatiCoefficients,
    interval: AnalyticInterval,
    closed_form: ClosedForm,
    declaration: Option<ActivationDeclaration>,
    /// `recurrence[j]` holds the coefficients of `Q_{j+1}` in ascending powers.
    recurrence: Vec<Vec<f64>>,
}

#[inline]
fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn riccati_recurrence(coeffs: RiccatiCoefficients, count: usize) -> Vec<Vec<f64>> {
    let q1 = vec![coeffs.a0, coeffs.a1, coeffs.a2];
    let mut out = Vec::with_capacity(count);
    out.push(q1.clone());
    for _ in 1..count {
        let prev = out.last().unwrap();
        let deriv: Vec<f64> = prev.iter().enumerate().skip(1).map(|(i, c)| c * i as f64).collect();
        let mut next = vec![0.0; deriv.len() + q1.len() - 1];
        for (i, a) in deriv.iter().enumerate() {
            for (j, b) in q1.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        out.push(next);
    }
    out
}

#[inline]
fn horner(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
}

/// Eighth-order central difference of `f` at `t`.
pub(crate) fn central_difference(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    const W: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    let mut acc = 0.0;
    for (j, w) in W.iter().enumerate() {
        let s = (j + 1) as f64 * h;
        acc += w * (f(t + s) - f(t - s));
    }
    acc / h
}

impl RiccatiActivation {
    fn build(
        name: &str,
        r: usize,
        coeffs: RiccatiCoefficients,
        interval: AnalyticInterval,
        closed_form: ClosedForm,
        declaration: Option<ActivationDeclaration>,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::Activation {
            name: name.to_string(),
            reason,
        };
        if !(coeffs.a0.is_finite() && coeffs.a1.is_finite() && coeffs.a2.is_finite()) {
            return Err(invalid("non-finite Riccati coefficient".into()));
        }
        if coeffs.a2 == 0.0 {
            return Err(invalid("a2 must be nonzero".into()));
        }
        let act = Self {
            name: name.to_string(),
            r,
            coeffs,
            interval,
            closed_form,
            declaration,
            recurrence: riccati_recurrence(coeffs, MAX_DERIVATIVE_ORDER),
        };
        act.certify()?;
        Ok(act)
    }

    /// Checks the Riccati residual and monotonicity on the certification
    /// window of the analytic interval.
    fn certify(&self) -> Result<()> {
        let (lo, hi) = self.interval.certification_window();
        let samples: Vec<f64> = (0..CERTIFY_SAMPLES)
            .map(|i| lo + (hi - lo) * i as f64 / (CERTIFY_SAMPLES - 1) as f64)
            .collect();
        let mut worst = 0.0f64;
        for &t in &samples {
            let res = self.residual_at(self.coeffs, t)?;
            let scale = 1.0 + self.coeffs.rhs(self.zeta(t)?).abs();
            let res = if self.declaration.is_some() { res / scale } else { res };
            if !res.is_finite() {
                worst = f64::INFINITY;
            } else {
                worst = worst.max(res);
            }
        }
        if worst > RESIDUAL_TOLERANCE {
            return Err(Error::Activation {
                name: self.name.clone(),
                reason: format!("Riccati residual {worst:e} exceeds {RESIDUAL_TOLERANCE:e}"),
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let t = lo + (hi - lo) * i as f64 / 999.0;
            let v = self.eval(t)?;
            if v + MONOTONE_SLACK < prev {
                return Err(Error::Activation {
                    name: self.name.clone(),
                    reason: format!("not nondecreasing near t = {t}"),
                });
            }
            prev = v;
        }
        Ok(())
    }

    pub fn logistic() -> Self {
        Self::build(
            "logistic",
            0,
            RiccatiCoefficients::new(0.0, 1.0, -1.0),
            AnalyticInterval::REAL_LINE,
            ClosedForm::Logistic,
            None,
        )
        .expect("logistic certifies")
    }

    pub fn tanh() -> Self {
        Self::build(
            "tanh",
            0,
            RiccatiCoefficients::new(1.0, 0.0, -1.0),
            AnalyticInterval::REAL_LINE,
            ClosedForm::Tanh,
            None,
        )
        .expect("tanh certifies")
    }

    pub fn softplus() -> Self {
        Self::build(
            "softplus",
            1,
            RiccatiCoefficients::new(0.0, 1.0, -1.0),
            AnalyticInterval::REAL_LINE,
            ClosedForm::Softplus,
            None,
        )
        .expect("softplus certifies")
    }

    /// Builds and certifies a custom `r = 0` activation.
    pub fn from_declaration(decl: &ActivationDeclaration) -> Result<Self> {
        if decl.r != 0 {
            return Err(Error::Activation {
                name: decl.name.clone(),
                reason: "custom activations must have Riccati index 0".into(),
            });
        }
        if builtin_names().contains(&decl.name.as_str()) {
            return Err(Error::Activation {
                name: decl.name.clone(),
                reason: "name collides with a builtin".into(),
            });
        }
        let interval = AnalyticInterval::new(
            decl.interval[0].unwrap_or(f64::NEG_INFINITY),
            decl.interval[1].unwrap_or(f64::INFINITY),
        )?;
        let coeffs = RiccatiCoefficients::new(decl.a0, decl.a1, decl.a2);
        if coeffs.a2 == 0.0 {
            return Err(Error::Activation {
                name: decl.name.clone(),
                reason: "a2 must be nonzero".into(),
            });
        }
        let [t0, y0] = decl.anchor;
        if !interval.contains(t0) {
            return Err(Error::Activation {
                name: decl.name.clone(),
                reason: "anchor lies outside the analytic interval".into(),
            });
        }
        let solution = RiccatiSolution::through(coeffs, t0, y0);
        Self::build(
            &decl.name,
            0,
            coeffs,
            interval,
            ClosedForm::Custom(solution),
            Some(decl.clone()),
        )
    }

    /// Looks up a builtin by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "logistic" => Ok(Self::logistic()),
            "tanh" => Ok(Self::tanh()),
            "softplus" => Ok(Self::softplus()),
            other => Err(Error::UnknownActivation(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Riccati index `r`.
    pub fn riccati_index(&self) -> usize {
        self.r
    }

    pub fn coefficients(&self) -> RiccatiCoefficients {
        self.coeffs
    }

    pub fn analytic_interval(&self) -> AnalyticInterval {
        self.interval
    }

    pub fn declaration(&self) -> Option<&ActivationDeclaration> {
        self.declaration.as_ref()
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if self.interval.contains(t) {
            Ok(())
        } else {
            Err(Error::Domain {
                activation: self.name.clone(),
                value: t,
                lo: self.interval.lo,
                hi: self.interval.hi,
            })
        }
    }

    fn closed(&self, t: f64, q: usize) -> Result<f64> {
        match (&self.closed_form, q) {
            (ClosedForm::Logistic, 0) => Ok(logistic(t)),
            (ClosedForm::Tanh, 0) => Ok(t.tanh()),
            (ClosedForm::Softplus, 0) => Ok(softplus(t)),
            (ClosedForm::Softplus, 1) => Ok(logistic(t)),
            (ClosedForm::Custom(sol), 0) => Ok(sol.eval(t)),
            _ => Err(Error::MissingClosedForm {
                activation: self.name.clone(),
                order: q,
            }),
        }
    }

    /// `σ(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_derivative(t, 0)
    }

    /// `ζ(t) = σ^(r)(t)`.
    pub fn zeta(&self, t: f64) -> Result<f64> {
        self.eval_derivative(t, self.r)
    }

    /// `σ^(q)(t)`: closed forms for `q ≤ r`, the Riccati recurrence beyond.
    pub fn eval_derivative(&self, t: f64, q: usize) -> Result<f64> {
        self.check_domain(t)?;
        if q <= self.r {
            return self.closed(t, q);
        }
        let zeta = self.closed(t, self.r)?;
        let j = q - self.r;
        if j <= self.recurrence.len() {
            Ok(horner(&self.recurrence[j - 1], zeta))
        } else {
            let polys = riccati_recurrence(self.coeffs, j);
            Ok(horner(&polys[j - 1], zeta))
        }
    }

    /// All derivatives `σ^(0..=max_q)(t)` in one pass.
    pub fn derivatives(&self, t: f64, max_q: usize) -> Result<Vec<f64>> {
        self.check_domain(t)?;
        let mut out = Vec::with_capacity(max_q + 1);
        for q in 0..=max_q.min(self.r) {
            out.push(self.closed(t, q)?);
        }
        if max_q > self.r {
            let zeta = out[self.r];
            let need = max_q - self.r;
            if need <= self.recurrence.len() {
                out.extend(self.recurrence[..need].iter().map(|p| horner(p, zeta)));
            } else {
                let polys = riccati_recurrence(self.coeffs, need);
                out.extend(polys.iter().map(|p| horner(p, zeta)));
            }
        }
        Ok(out)
    }

    fn residual_at(&self, coeffs: RiccatiCoefficients, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let margin = self.interval.margin(t);
        let h = (margin / 5.0).min(1e-2);
        let zeta = |s: f64| self.closed(s, self.r).unwrap_or(f64::NAN);
        let dz = central_difference(zeta, t, h);
        Ok((dz - coeffs.rhs(zeta(t))).abs())
    }

    /// Maximum of `|ζ'(t) − (a0 + a1 ζ + a2 ζ²)|` over `samples`, with `ζ'`
    /// taken by finite differences of the closed form of `ζ`.
    pub fn riccati_residual(&self, samples: &[f64]) -> Result<f64> {
        self.riccati_residual_with(self.coeffs, samples)
    }

    /// Same as [`riccati_residual`](Self::riccati_residual) against arbitrary
    /// coefficients, e.g. to confirm that wrong coefficients are rejected.
    pub fn riccati_residual_with(&self, coeffs: RiccatiCoefficients, samples: &[f64]) -> Result<f64> {
        samples
            .iter()
            .try_fold(0.0f64, |acc, &t| Ok(acc.max(self.residual_at(coeffs, t)?)))
    }

    /// Registry reference used in serialized documents: the builtin name, or
    /// the full declaration record for custom entries.
    pub fn to_reference(&self) -> ActivationRef {
        match &self.declaration {
            Some(decl) => ActivationRef::Custom(decl.clone()),
            None => ActivationRef::Name(self.name.clone()),
        }
    }
}

/// How a configuration or network document refers to an activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActivationRef {
    Name(String),
    Custom(ActivationDeclaration),
}

impl ActivationRef {
    pub fn resolve(&self) -> Result<RiccatiActivation> {
        match self {
            ActivationRef::Name(n) => RiccatiActivation::by_name(n),
            ActivationRef::Custom(d) => RiccatiActivation::from_declaration(d),
        }
    }
}

pub fn builtin_names() -> [&'static str; 3] {
    ["logistic", "tanh", "softplus"]
}

/// The builtin registry.
pub fn builtins() -> Vec<RiccatiActivation> {
    vec![
        RiccatiActivation::logistic(),
        RiccatiActivation::tanh(),
        RiccatiActivation::softplus(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn builtin_registry_contents() {
        let b = builtins();
        let find = |n: &str| b.iter().find(|a| a.name() == n).unwrap();
        assert_eq!(find("logistic").riccati_index(), 0);
        assert_eq!(
            find("logistic").coefficients(),
            RiccatiCoefficients::new(0.0, 1.0, -1.0)
        );
        assert_eq!(find("tanh").riccati_index(), 0);
        assert_eq!(find("tanh").coefficients(), RiccatiCoefficients::new(1.0, 0.0, -1.0));
        assert_eq!(find("softplus").riccati_index(), 1);
        assert_eq!(
            find("softplus").coefficients(),
            RiccatiCoefficients::new(0.0, 1.0, -1.0)
        );
        for a in &b {
            assert!(a.analytic_interval().is_real_line());
        }
    }

    #[test]
    fn point_values() {
        assert_eq!(RiccatiActivation::logistic().eval_derivative(0.0, 0).unwrap(), 0.5);
        assert_eq!(RiccatiActivation::tanh().eval_derivative(0.0, 1).unwrap(), 1.0);
        assert_relative_eq!(
            RiccatiActivation::softplus().eval_derivative(0.0, 0).unwrap(),
            std::f64::consts::LN_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn residual_rejects_wrong_coefficients() {
        let act = RiccatiActivation::logistic();
        let samples = grid(-5.0, 5.0, 100);
        assert!(act.riccati_residual(&samples).unwrap() <= 1e-10);
        let mut c = act.coefficients();
        c.a0 += 0.1;
        assert!(act.riccati_residual_with(c, &samples).unwrap() > 0.05);
        assert!(RiccatiActivation::tanh().riccati_residual(&[0.0]).unwrap() < 1e-14);
    }

    #[test]
    fn softplus_zeta_is_logistic() {
        let sp = RiccatiActivation::softplus();
        let lg = RiccatiActivation::logistic();
        for t in grid(-6.0, 6.0, 41) {
            assert_relative_eq!(sp.zeta(t).unwrap(), lg.eval(t).unwrap(), max_relative = 1e-15);
            assert_relative_eq!(
                sp.eval_derivative(t, 3).unwrap(),
                lg.eval_derivative(t, 2).unwrap(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn custom_logistic_matches_builtin() {
        let decl = ActivationDeclaration {
            name: "my-logistic".into(),
            r: 0,
            a0: 0.0,
            a1: 1.0,
            a2: -1.0,
            interval: [None, None],
            anchor: [0.0, 0.5],
        };
        let act = RiccatiActivation::from_declaration(&decl).unwrap();
        for t in grid(-8.0, 8.0, 33) {
            assert_relative_eq!(act.eval(t).unwrap(), logistic(t), epsilon = 1e-15, max_relative = 1e-13);
        }
    }

    #[test]
    fn custom_tan_on_bounded_interval() {
        let decl = ActivationDeclaration {
            name: "tan".into(),
            r: 0,
            a0: 1.0,
            a1: 0.0,
            a2: 1.0,
            interval: [Some(-1.0), Some(1.0)],
            anchor: [0.0, 0.0],
        };
        let act = RiccatiActivation::from_declaration(&decl).unwrap();
        assert_relative_eq!(act.eval(0.7).unwrap(), 0.7f64.tan(), max_relative = 1e-14);
        assert!(act.eval(1.0).unwrap_err().is_domain());
        assert!(act.eval(-1.5).is_err());
    }

    #[test]
    fn custom_declarations_rejected() {
        let base = ActivationDeclaration {
            name: "x".into(),
            r: 0,
            a0: 1.0,
            a1: 0.0,
            a2: -1.0,
            interval: [None, None],
            anchor: [0.0, 0.0],
        };
        let mut d = base.clone();
        d.r = 1;
        assert!(RiccatiActivation::from_declaration(&d).is_err());
        let mut d = base.clone();
        d.a2 = 0.0;
        assert!(RiccatiActivation::from_declaration(&d).is_err());
        // Decreasing solution: ζ' = -(1 - ζ²) through 0 is -tanh.
        let mut d = base.clone();
        d.a0 = -1.0;
        d.a2 = 1.0;
        assert!(matches!(
            RiccatiActivation::from_declaration(&d),
            Err(Error::Activation { .. })
        ));
        let mut d = base;
        d.name = "tanh".into();
        assert!(RiccatiActivation::from_declaration(&d).is_err());
    }

    #[test]
    fn derivatives_agree_with_single_evaluations() {
        for act in builtins() {
            for t in [-2.5, -0.3, 0.0, 1.7] {
                let all = act.derivatives(t, 8).unwrap();
                for (q, v) in all.iter().enumerate() {
                    assert_eq!(*v, act.eval_derivative(t, q).unwrap());
                }
            }
        }
    }

    #[test]
    fn reference_round_trip() {
        let r = RiccatiActivation::tanh().to_reference();
        let js = serde_json::to_string(&r).unwrap();
        assert_eq!(js, "\"tanh\"");
        let back: ActivationRef = serde_json::from_str(&js).unwrap();
        assert_eq!(back.resolve().unwrap(), RiccatiActivation::tanh());
        assert!(matches!(
            ActivationRef::Name("relu".into()).resolve(),
            Err(Error::UnknownActivation(_))
        ));
    }
}
