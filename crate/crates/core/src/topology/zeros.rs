//! Zeros and superlevel intervals of scalar functions on an interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tuning for [`count_zeros_1d`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroOptions {
    /// Uniform samples before refinement.
    pub initial_samples: usize,
    /// Width to which each sign change is bisected.
    pub tol: f64,
    /// Values with `|f| ≤ floor` count as numerically zero.
    pub floor: f64,
    /// Maximum nesting of local refinement around dips of `|f|`.
    pub max_depth: usize,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self {
            initial_samples: 8192,
            tol: 1e-12,
            floor: 1e-13,
            max_depth: 8,
        }
    }
}

/// Zeros found on an open interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    /// Sign-change zeros, increasing.
    pub zeros: Vec<f64>,
    /// Points where `|f|` touches the floor without a sign change. Reported
    /// only; they are not counted.
    pub tangential: Vec<f64>,
    /// Every sample was below the floor: `f ≡ 0` is a candidate.
    pub identically_zero: bool,
    pub evaluations: usize,
}

impl ZeroReport {
    pub fn count(&self) -> usize {
        self.zeros.len()
    }
}

struct Scanner<'a, F> {
    f: &'a F,
    opts: ZeroOptions,
    evaluations: usize,
}

impl<F: Fn(f64) -> Result<f64>> Scanner<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(x)?;
        if v.is_nan() {
            return Err(Error::InvalidArgument(format!("evaluator returned NaN at {x}")));
        }
        Ok(v)
    }

    fn sign(&self, v: f64) -> i8 {
        if v.abs() <= self.opts.floor {
            0
        } else if v > 0.0 {
            1
        } else {
            -1
        }
    }

    fn bisect(&mut self, mut a: f64, mut b: f64, fa: f64) -> Result<f64> {
        let sa = fa > 0.0;
        while b - a > self.opts.tol {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.eval(m)?;
            if fm == 0.0 {
                return Ok(m);
            }
            if (fm > 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }

    fn is_dip(&self, a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
        let same = a.1.signum() == b.1.signum() && b.1.signum() == c.1.signum();
        same && self.sign(b.1) != 0 && b.1.abs() < a.1.abs() && b.1.abs() < c.1.abs() && c.0 - a.0 > 4.0 * self.opts.tol
    }

    /// Samples `[a, b]` at `n + 1` points, resampling recursively around
    /// local minima of `|f|` that might hide a close pair of zeros.
    fn sample(&mut self, a: f64, b: f64, n: usize, depth: usize) -> Result<Vec<(f64, f64)>> {
        let mut pts = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
            pts.push((x, self.eval(x)?));
        }
        if depth >= self.opts.max_depth {
            return Ok(pts);
        }
        let mut out = vec![pts[0]];
        let mut i = 1;
        while i < pts.len() {
            if i + 1 < pts.len() && self.is_dip(pts[i - 1], pts[i], pts[i + 1]) {
                let sub = self.sample(pts[i - 1].0, pts[i + 1].0, 16, depth + 1)?;
                out.extend_from_slice(&sub[1..]);
                i += 2;
            } else {
                out.push(pts[i]);
                i += 1;
            }
        }
        Ok(out)
    }
}

/// Counts the sign-change zeros of `f` on the open interval `(lo, hi)`.
pub fn count_zeros_1d<F>(f: F, lo: f64, hi: f64, opts: ZeroOptions) -> Result<ZeroReport>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("bad interval ({lo}, {hi})")));
    }
    if opts.initial_samples < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let mut scan = Scanner {
        f: &f,
        opts,
        evaluations: 0,
    };
    let samples = scan.sample(lo, hi, opts.initial_samples, 0)?;
    if samples.iter().all(|&(_, v)| scan.sign(v) == 0) {
        return Ok(ZeroReport {
            zeros: Vec::new(),
            tangential: Vec::new(),
            identically_zero: true,
            evaluations: scan.evaluations,
        });
    }

    let mut zeros = Vec::new();
    let mut tangential = Vec::new();
    // Previous nonzero sample and the run of numerically zero samples since.
    let mut prev: Option<(f64, f64)> = None;
    let mut zero_run: Vec<f64> = Vec::new();
    for &(x, v) in &samples {
        let s = scan.sign(v);
        if s == 0 {
            if prev.is_some() {
                zero_run.push(x);
            }
            continue;
        }
        if let Some((px, pv)) = prev {
            let ps = scan.sign(pv);
            if ps != s {
                if zero_run.is_empty() {
                    zeros.push(scan.bisect(px, x, pv)?);
                } else {
                    zeros.push(zero_run[zero_run.len() / 2]);
                }
            } else if !zero_run.is_empty() {
                tangential.push(zero_run[zero_run.len() / 2]);
            }
        }
        zero_run.clear();
        prev = Some((x, v));
    }
    zeros.retain(|&z| z > lo && z < hi);
    Ok(ZeroReport {
        zeros,
        tangential,
        identically_zero: false,
        evaluations: scan.evaluations,
    })
}

/// Maximal subintervals of `{f ≥ 0}` on `(lo, hi)` as `[a, b]` pairs.
pub fn superlevel_intervals_1d<F>(f: F, lo: f64, hi: f64, opts: ZeroOptions) -> Result<Vec<[f64; 2]>>
where
    F: Fn(f64) -> Result<f64>,
{
    let report = count_zeros_1d(&f, lo, hi, opts)?;
    if report.identically_zero {
        return Ok(vec![[lo, hi]]);
    }
    let mut cuts = vec![lo];
    cuts.extend(&report.zeros);
    cuts.push(hi);
    let mut out: Vec<[f64; 2]> = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if f(mid)? >= 0.0 {
            match out.last_mut() {
                Some(last) if last[1] == w[0] => last[1] = w[1],
                _ => out.push([w[0], w[1]]),
            }
        }
    }
    Ok(out)
}
