use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use pfaffnet_core::bounds::{betti_bound, gv_bound, rankdrop_bound, zero_bound, BigBound};
use pfaffnet_core::chain::{compute_format, derive_certificates, verify_chain};
use pfaffnet_core::liegeom::{locus_sweep, LocusOptions};
use pfaffnet_core::topology::{
    betti_with_stability, betti_z2, components, count_zeros_1d, superlevel_intervals_1d, BettiReport, ZeroOptions,
};
use pfaffnet_core::{Architecture, NetworkSpec, VectorFieldFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::*;
use crate::report::{num, Report};
use crate::CliError;

fn schema<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Schema(format!("{context}: {e}"))
}

fn parse_constant(text: &str) -> Result<BigRational, CliError> {
    let c = BigRational::from_str(text.trim())
        .map_err(|_| CliError::Schema(format!("constant: `{text}` is not a rational such as 1 or 3/2")))?;
    if c <= BigRational::from_integer(BigInt::from(0)) {
        return Err(CliError::Schema(format!("constant: `{text}` must be positive")));
    }
    Ok(c)
}

fn architecture(
    d: usize,
    widths: &[usize],
    activation: &pfaffnet_core::ActivationRef,
) -> Result<Architecture, CliError> {
    let act = activation.resolve().map_err(schema("activation"))?;
    Architecture::new(d, widths.to_vec(), act).map_err(schema("architecture"))
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Schema(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_resolution(n: usize) -> Result<(), CliError> {
    if n >= 2 {
        Ok(())
    } else {
        Err(CliError::Schema(format!("resolution must be at least 2, got {n}")))
    }
}

fn log10_cell(b: &BigBound) -> String {
    format!("{:.6}", b.log10)
}

/// `log10(measured) ≤ log10(bound)` with a tiny allowance for rounding of
/// the bound's logarithm.
fn within(measured: usize, bound: &BigBound) -> bool {
    measured == 0 || (measured as f64).log10() <= bound.log10 + 1e-12
}

pub fn format(cfg: &FormatConfig) -> Result<Report, CliError> {
    let act = cfg.activation.resolve().map_err(schema("activation"))?;
    let f = compute_format(cfg.d, &cfg.widths, act.riccati_index()).map_err(schema("architecture"))?;
    let mut report = Report::new(
        "format",
        &["d", "L", "widths", "activation", "r", "R", "alpha", "beta"],
        cfg,
    );
    report.push(vec![
        f.d.to_string(),
        cfg.widths.len().to_string(),
        join(&cfg.widths),
        act.name().to_string(),
        act.riccati_index().to_string(),
        f.chain_len.to_string(),
        f.alpha.to_string(),
        f.beta.to_string(),
    ]);
    report.summary = json!({ "format": f });
    Ok(report)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

pub fn bound(cfg: &BoundConfig) -> Result<Report, CliError> {
    let c = parse_constant(&cfg.constant)?;
    let mut report = Report::new("bound", &["formula", "inputs", "value", "log10", "constant_tag"], cfg);
    let mut bounds = Vec::new();
    for req in &cfg.requests {
        match req {
            BoundRequest::ZeroBound { chain_len, depth } => {
                bounds.push(zero_bound(*chain_len, *depth, &c).map_err(schema("zero_bound"))?)
            }
            BoundRequest::BettiBound { d, chain_len, depth } => {
                bounds.push(betti_bound(*d, *chain_len, *depth, &c).map_err(schema("betti_bound"))?)
            }
            BoundRequest::GvBound {
                d,
                s,
                chain_len,
                alpha,
                beta,
            } => bounds.push(gv_bound(*d, *s, *chain_len, *alpha, *beta, &c).map_err(schema("gv_bound"))?),
            BoundRequest::RankdropBound {
                d,
                m,
                k,
                rho,
                widths,
                r,
            } => bounds
                .push(rankdrop_bound(*d, *m, *k, *rho, widths, *r, &c, cfg.mode).map_err(schema("rankdrop_bound"))?),
            BoundRequest::Network { d, widths, activation } => {
                let arch = architecture(*d, widths, activation)?;
                let f = compute_format(arch.d, &arch.widths, arch.activation.riccati_index())
                    .map_err(schema("architecture"))?;
                let (r, l) = (f.chain_len as u64, widths.len() as u64);
                if *d == 1 {
                    bounds.push(zero_bound(r, l, &c).map_err(schema("zero_bound"))?);
                }
                bounds.push(betti_bound(*d as u64, r, l, &c).map_err(schema("betti_bound"))?);
            }
        }
    }
    for b in &bounds {
        report.push(vec![
            b.formula.to_string(),
            b.inputs_string(),
            b.decimal(),
            log10_cell(b),
            b.constant_tag.clone(),
        ]);
    }
    Ok(report)
}

pub fn verify_chain_cmd(cfg: &VerifyConfig) -> Result<Report, CliError> {
    let arch = architecture(
        cfg.architecture.d,
        &cfg.architecture.widths,
        &cfg.architecture.activation,
    )?;
    let seeds = parse_seeds(&cfg.seeds)?;
    check_positive("tol", cfg.tol)?;
    check_positive("half_width", cfg.half_width)?;
    if cfg.points == 0 || cfg.scale.is_nan() || cfg.scale < 0.0 {
        return Err(CliError::Schema("points must be ≥ 1 and scale ≥ 0".into()));
    }
    let rows: Vec<(u64, f64, Vec<u32>, bool, bool)> = seeds
        .par_iter()
        .map(|&seed| -> Result<_, CliError> {
            let net = NetworkSpec::sample(&arch, seed, cfg.scale);
            let mut certs = derive_certificates(&net);
            if cfg.self_test {
                let last = certs.len() - 1;
                certs.perturb(last, 0, 0.1);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let points: Vec<Vec<f64>> = (0..cfg.points)
                .map(|_| {
                    (0..arch.d)
                        .map(|_| cfg.half_width * (2.0 * rng.gen::<f64>() - 1.0))
                        .collect()
                })
                .collect();
            let rep = verify_chain(&net, &certs, &points, cfg.tol)?;
            let degrees = certs.degree_by_layer();
            let degree_ok = degrees
                .iter()
                .enumerate()
                .all(|(l, &deg)| deg as usize <= 1 + 2 * (l + 1));
            Ok((seed, rep.max_residual, degrees, degree_ok, rep.ok && degree_ok))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new(
        "verify-chain",
        &["seed", "max_residual", "layer_degrees", "degree_ok", "ok"],
        cfg,
    );
    let mut worst = 0.0f64;
    for (seed, res, degs, deg_ok, ok) in &rows {
        worst = worst.max(*res);
        report.conformant &= *ok;
        report.push(vec![
            seed.to_string(),
            num(*res),
            join(degs),
            deg_ok.to_string(),
            ok.to_string(),
        ]);
    }
    report.summary = json!({ "max_residual": worst, "networks": rows.len(), "self_test": cfg.self_test });
    Ok(report)
}

pub fn zeros(cfg: &ZerosConfig) -> Result<Report, CliError> {
    let arch = architecture(1, &cfg.widths, &cfg.activation)?;
    let seeds = parse_seeds(&cfg.seeds)?;
    let c = parse_constant(&cfg.constant)?;
    let [lo, hi] = cfg.interval;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Schema(format!("interval: ({lo}, {hi}) is empty")));
    }
    check_positive("tol", cfg.tol)?;
    if cfg.initial_samples < 2 {
        return Err(CliError::Schema("initial_samples must be at least 2".into()));
    }
    let f = compute_format(1, &arch.widths, arch.activation.riccati_index()).map_err(schema("architecture"))?;
    let bound = zero_bound(f.chain_len as u64, arch.depth() as u64, &c).map_err(schema("zero_bound"))?;
    let opts = ZeroOptions {
        initial_samples: cfg.initial_samples,
        tol: cfg.tol,
        ..ZeroOptions::default()
    };
    let rows = seeds
        .par_iter()
        .map(|&seed| -> Result<_, CliError> {
            let net = NetworkSpec::sample(&arch, seed, cfg.scale);
            let eval = |x: f64| net.output(&[x]);
            let zr = count_zeros_1d(eval, lo, hi, opts)?;
            let intervals = superlevel_intervals_1d(eval, lo, hi, opts)?;
            Ok((seed, zr, intervals.len()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new(
        "zeros",
        &[
            "seed",
            "zeros",
            "tangential",
            "identically_zero",
            "intervals",
            "locations",
            "log10_bound",
            "conformant",
        ],
        cfg,
    );
    let mut max_count = 0;
    for (seed, zr, intervals) in &rows {
        // Intervals of {F ≥ 0} are bounded by the zero bound; so is count + 1.
        let ok = within(zr.count() + 1, &bound) && within(*intervals, &bound);
        report.conformant &= ok;
        max_count = max_count.max(zr.count());
        report.push(vec![
            seed.to_string(),
            zr.count().to_string(),
            zr.tangential.len().to_string(),
            zr.identically_zero.to_string(),
            intervals.to_string(),
            zr.zeros.iter().map(|z| num(*z)).collect::<Vec<_>>().join(";"),
            log10_cell(&bound),
            ok.to_string(),
        ]);
    }
    report.summary = json!({
        "max_zeros": max_count,
        "zero_bound": bound.decimal(),
        "zero_bound_log10": bound.log10,
        "constant_tag": bound.constant_tag,
    });
    Ok(report)
}

fn betti_columns(d: usize, lead: &[&'static str], tail: &[&'static str]) -> Vec<String> {
    let mut cols: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    cols.extend((0..=d).map(|i| format!("b{i}")));
    cols.extend(tail.iter().map(|s| s.to_string()));
    cols
}

pub fn betti(cfg: &BettiConfig) -> Result<Report, CliError> {
    let domain = cfg.domain.domain()?;
    let d = domain.dim();
    check_resolution(cfg.resolution)?;
    let res = vec![cfg.resolution; d];
    let c = parse_constant(&cfg.constant)?;
    let columns = betti_columns(
        d,
        &["experiment", "seed", "resolution"],
        &["total", "components", "stable", "partial", "log10_bound", "conformant"],
    );
    let mut report = Report::new("betti", &[], cfg);
    report.columns = columns;
    let push = |report: &mut Report, exp: &str, seed: String, br: &BettiReport, bound: Option<&BigBound>| {
        let total = br.betti.total();
        let ok = bound.map(|b| within(total, b)).unwrap_or(true);
        report.conformant &= ok;
        let mut row = vec![exp.to_string(), seed, cfg.resolution.to_string()];
        row.extend(br.betti.betti.iter().map(ToString::to_string));
        row.extend([
            total.to_string(),
            br.components.to_string(),
            br.stable.to_string(),
            br.betti.partial.to_string(),
            bound.map(log10_cell).unwrap_or_else(|| "NA".into()),
            ok.to_string(),
        ]);
        report.push(row);
    };
    match &cfg.source {
        BettiSource::Fixture { name } => {
            if d != 2 {
                return Err(CliError::Schema("shape fixtures live in a 2-dimensional box".into()));
            }
            let name = *name;
            let br = betti_with_stability(|x: &[f64]| Ok(name.eval(x)), &domain, &res, cfg.threshold)?;
            let exp = serde_json::to_value(name).unwrap();
            push(&mut report, exp.as_str().unwrap(), "-".into(), &br, None);
            report.summary = json!({ "betti": br.betti.betti, "stable": br.stable });
        }
        BettiSource::Network {
            d: nd,
            widths,
            activation,
            scale,
        } => {
            if *nd != d {
                return Err(CliError::Schema(format!(
                    "network input dimension {nd} does not match the {d}-dimensional box"
                )));
            }
            let arch = architecture(d, widths, activation)?;
            let f = compute_format(d, widths, arch.activation.riccati_index()).map_err(schema("architecture"))?;
            let bound =
                betti_bound(d as u64, f.chain_len as u64, widths.len() as u64, &c).map_err(schema("betti_bound"))?;
            let seeds = parse_seeds(&cfg.seeds)?;
            let results = seeds
                .iter()
                .map(|&seed| {
                    let net = NetworkSpec::sample(&arch, seed, *scale);
                    betti_with_stability(|x: &[f64]| net.output(x), &domain, &res, cfg.threshold).map(|br| (seed, br))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut unstable = 0;
            for (seed, br) in &results {
                unstable += usize::from(!br.stable);
                push(&mut report, "network", seed.to_string(), br, Some(&bound));
            }
            report.summary = json!({
                "networks": results.len(),
                "unstable": unstable,
                "betti_bound_log10": bound.log10,
                "constant_tag": bound.constant_tag,
            });
        }
    }
    Ok(report)
}

struct PreparedFamily {
    label: String,
    seed: Option<u64>,
    family: VectorFieldFamily,
    /// `(widths, r)` when the bound applies.
    network: Option<(Vec<usize>, usize)>,
}

fn prepare_families(cfg: &RankdropConfig) -> Result<Vec<PreparedFamily>, CliError> {
    match &cfg.family {
        FamilySource::Fixture { name } => {
            let family = match name {
                FieldFixture::Grushin => VectorFieldFamily::grushin(),
                FieldFixture::Heisenberg => VectorFieldFamily::heisenberg(),
            };
            let label = serde_json::to_value(name).unwrap().as_str().unwrap().to_string();
            Ok(vec![PreparedFamily {
                label,
                seed: None,
                family,
                network: None,
            }])
        }
        FamilySource::File { path } => {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("family file {path}: {e}")))?;
            let family = VectorFieldFamily::from_json(&text).map_err(schema(&format!("family file {path}")))?;
            Ok(vec![PreparedFamily {
                label: "file".into(),
                seed: None,
                family,
                network: None,
            }])
        }
        FamilySource::Random {
            d,
            m,
            widths,
            activation,
            scale,
        } => {
            let arch = architecture(*d, widths, activation)?;
            if *m == 0 {
                return Err(CliError::Schema("m must be at least 1".into()));
            }
            parse_seeds(&cfg.seeds)?
                .into_iter()
                .map(|seed| {
                    Ok(PreparedFamily {
                        label: "random".into(),
                        seed: Some(seed),
                        family: VectorFieldFamily::random_networks(&arch, *m, seed, *scale)?,
                        network: Some((widths.clone(), arch.activation.riccati_index())),
                    })
                })
                .collect()
        }
    }
}

pub fn rankdrop(cfg: &RankdropConfig, out: Option<&Path>) -> Result<Report, CliError> {
    let domain = cfg.domain.domain()?;
    let d = domain.dim();
    check_resolution(cfg.resolution)?;
    check_positive("tol", cfg.tol)?;
    if let Some(e) = cfg.epsilon {
        if e.is_nan() || e < 0.0 {
            return Err(CliError::Schema(format!("epsilon must be nonnegative, got {e}")));
        }
    }
    if cfg.k_min == 0 || cfg.k_min > cfg.k_max {
        return Err(CliError::Schema(format!(
            "need 1 ≤ k_min ≤ k_max, got {}..{}",
            cfg.k_min, cfg.k_max
        )));
    }
    let c = parse_constant(&cfg.constant)?;
    let families = prepare_families(cfg)?;
    if let Some(f) = families.iter().find(|f| f.family.dim() != d) {
        return Err(CliError::Schema(format!(
            "family dimension {} does not match the {d}-dimensional box",
            f.family.dim()
        )));
    }
    let opts = LocusOptions {
        resolution: vec![cfg.resolution; d],
        criterion: cfg.locus_criterion(),
        mode: cfg.mode,
        thicken: cfg.thicken,
    };
    let mut report = Report::new("rankdrop", &[], cfg);
    report.columns = betti_columns(
        d,
        &[
            "family", "seed", "k", "columns", "minors", "flagged", "margin", "fraction",
        ],
        &["total", "components", "partial", "log10_bound", "conformant", "nested"],
    );
    let mut all_nested = true;
    let mut epsilons = Vec::new();
    for fam in &families {
        let sweep = locus_sweep(&fam.family, cfg.k_min, cfg.k_max, cfg.rho, &domain, &opts)?;
        let nested = sweep.nested();
        all_nested &= nested;
        epsilons.push(sweep.epsilon);
        let seed = fam.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        for layer in &sweep.layers {
            let betti = betti_z2(&layer.grid)?;
            let bound = match &fam.network {
                Some((widths, r)) => Some(
                    rankdrop_bound(
                        d as u64,
                        fam.family.num_fields() as u64,
                        layer.k as u64,
                        cfg.rho as u64,
                        widths,
                        *r,
                        &c,
                        cfg.mode,
                    )
                    .map_err(schema("rankdrop_bound"))?,
                ),
                None => None,
            };
            let ok = bound.as_ref().map(|b| within(betti.total(), b)).unwrap_or(true) && nested;
            report.conformant &= ok;
            let mut row = vec![
                fam.label.clone(),
                seed.clone(),
                layer.k.to_string(),
                layer.columns.to_string(),
                layer.minors.to_string(),
                layer.grid.count_flagged().to_string(),
                layer.count(pfaffnet_core::liegeom::CellLabel::Margin).to_string(),
                format!("{:.6}", layer.grid.flagged_fraction()),
            ];
            row.extend(betti.betti.iter().map(ToString::to_string));
            row.extend([
                betti.total().to_string(),
                components(&layer.grid).to_string(),
                betti.partial.to_string(),
                bound.as_ref().map(log10_cell).unwrap_or_else(|| "NA".into()),
                ok.to_string(),
                nested.to_string(),
            ]);
            report.push(row);
            if cfg.export_grids {
                if let Some(path) = out {
                    let stem = path.with_extension("");
                    let tag = fam.seed.map(|s| format!(".seed{s}")).unwrap_or_default();
                    let name = format!("{}.{}{tag}.k{}.grid.csv", stem.display(), fam.label, layer.k);
                    std::fs::write(name, layer.grid.to_rle_csv())?;
                }
            }
        }
    }
    report.summary = json!({
        "families": families.len(),
        "nested": all_nested,
        "epsilon": epsilons,
        "mode": cfg.mode,
        "constants": "implementation-derived",
    });
    Ok(report)
}
