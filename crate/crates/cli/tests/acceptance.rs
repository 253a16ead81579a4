//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure or runtime overrun.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use pfaffnet_core::bounds::{betti_bound, gv_bound, zero_bound, BracketMode};
use pfaffnet_core::chain::{compute_format, derive_certificates, verify_chain, ChainKind, Monomial, SparsePoly};
use pfaffnet_core::liegeom::{
    bracket_eval, bracket_matrix, enumerate_brackets, locus_sample, locus_sweep, rank_at, BracketEvaluator,
    BracketTerm, LocusCriterion, LocusOptions,
};
use pfaffnet_core::topology::{betti_z2, components, count_zeros_1d, sign_grid, ZeroOptions};
use pfaffnet_core::{builtins, Architecture, BoxDomain, NetworkSpec, RiccatiCoefficients, VectorFieldFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn one() -> BigRational {
    BigRational::from_integer(1.into())
}

fn criterion_1() -> Outcome {
    let f = compute_format(1, &[1], 0).map_err(|e| e.to_string())?;
    ensure((f.d, f.chain_len, f.alpha, f.beta) == (1, 2, 3, 1), || {
        format!("format {f:?}")
    })?;
    let f = compute_format(2, &[4, 4, 2], 1).map_err(|e| e.to_string())?;
    ensure((f.d, f.chain_len, f.alpha, f.beta) == (2, 30, 7, 1), || {
        format!("format {f:?}")
    })?;
    let z = zero_bound(2, 1, &one()).unwrap().value;
    ensure(z == BigUint::from(64u32), || format!("zero_bound(2,1,1) = {z}"))?;
    let b = betti_bound(1, 2, 1, &one()).unwrap().value;
    ensure(b == BigUint::from(128u32), || format!("betti_bound(1,2,1,1) = {b}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (d, r, l) = (
            rng.gen_range(1..=8u64),
            rng.gen_range(0..=64u64),
            rng.gen_range(1..=8u64),
        );
        let gv = gv_bound(d, 1, r, 1 + 2 * l, 1, &one()).unwrap().value;
        let betti = betti_bound(d, r, l, &one()).unwrap().value;
        ensure(gv == betti, || format!("gv ≠ betti at (d={d}, R={r}, L={l})"))?;
    }
    Ok("formats (1,2,3,1) (2,30,7,1); bounds 64, 128; 200 specializations exact".into())
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..50u64 {
        let d = 1 + (i % 3) as usize;
        let depth = 1 + ((i / 3) % 3) as usize;
        let act = builtins()[((i / 9) % 3) as usize].clone();
        let r = act.riccati_index();
        let widths: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=4)).collect();
        let arch = Architecture::new(d, widths.clone(), act).unwrap();
        let net = NetworkSpec::sample(&arch, 1000 + i, 1.0);
        let certs = derive_certificates(&net);
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let rep = verify_chain(&net, &certs, &pts, 1e-8).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_residual);
        ensure(rep.ok, || {
            format!("network {i} ({d}, {widths:?}): residual {:e}", rep.max_residual)
        })?;
        for f in certs.chain() {
            let deg = certs.degree(f.index) as usize;
            ensure(deg <= 1 + 2 * f.layer, || {
                format!("network {i}: entry {} has degree {deg}", f.index)
            })?;
            if f.layer == 1 && f.kind == (ChainKind::JetDeriv { order: r }) {
                ensure(deg == 2, || {
                    format!("network {i}: layer-1 Riccati certificate has degree {deg}")
                })?;
            }
        }
    }
    Ok(format!("50 networks, max residual {worst:.2e}"))
}

fn dense_oracle(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut zeros = Vec::new();
    let x = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut prev = f(x(0));
    for i in 1..n {
        let cur = f(x(i));
        if (prev < 0.0 && cur > 0.0) || (prev > 0.0 && cur < 0.0) {
            let (mut a, mut b, mut fa) = (x(i - 1), x(i), prev);
            while b - a > 1e-13 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if (fm < 0.0) == (fa < 0.0) && fm != 0.0 {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        if cur != 0.0 {
            prev = cur;
        }
    }
    zeros
}

fn criterion_3() -> Outcome {
    let (lo, hi) = (-4.0, 4.0);
    let mut total = 0;
    let mut most = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3c3c);
        let depth = rng.gen_range(1..=3);
        let widths: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=5)).collect();
        let act = builtins()[(seed % 3) as usize].clone();
        let r = act.riccati_index();
        let arch = Architecture::new(1, widths.clone(), act).unwrap();
        let net = NetworkSpec::sample(&arch, seed, 2.0);
        let oracle = dense_oracle(&|x| net.output(&[x]).unwrap(), lo, hi, 1_000_000);
        let got = count_zeros_1d(|x| net.output(&[x]), lo, hi, ZeroOptions::default()).map_err(|e| e.to_string())?;
        ensure(got.count() == oracle.len(), || {
            format!("seed {seed}: counted {} zeros, oracle {}", got.count(), oracle.len())
        })?;
        for (a, b) in got.zeros.iter().zip(&oracle) {
            ensure((a - b).abs() < 1e-9, || {
                format!("seed {seed}: zero at {a} vs oracle {b}")
            })?;
        }
        let f = compute_format(1, &widths, r).unwrap();
        let bound = zero_bound(f.chain_len as u64, depth as u64, &one()).unwrap();
        let lhs = ((got.count() + 1) as f64).log10();
        ensure(lhs <= bound.log10, || {
            format!("seed {seed}: log10(count+1) = {lhs} > {}", bound.log10)
        })?;
        total += got.count();
        most = most.max(got.count());
    }
    Ok(format!(
        "100 networks, {total} zeros (max {most}), all match the oracle and the bound"
    ))
}

fn criterion_4() -> Outcome {
    let domain = BoxDomain::cube(2, -2.0, 2.0).unwrap();
    let r2 = |x: &[f64], cx: f64| (x[0] - cx).powi(2) + x[1] * x[1];
    type Shape = Box<dyn Fn(&[f64]) -> f64 + Sync>;
    let shapes: Vec<(&str, Shape, Vec<usize>)> = vec![
        ("disk", Box::new(move |x| 1.0 - r2(x, 0.0)), vec![1, 0, 0]),
        (
            "annulus",
            Box::new(move |x| (r2(x, 0.0) - 0.25).min(1.0 - r2(x, 0.0))),
            vec![1, 1, 0],
        ),
        (
            "two disks",
            Box::new(move |x| (0.25 - r2(x, -1.0)).max(0.25 - r2(x, 1.0))),
            vec![2, 0, 0],
        ),
    ];
    let mut grids = 0;
    for (name, f, expect) in &shapes {
        for res in [64, 128] {
            let grid = sign_grid(|x: &[f64]| Ok(f(x)), &domain, &[res, res], 0.0).map_err(|e| e.to_string())?;
            let b = betti_z2(&grid).map_err(|e| e.to_string())?;
            ensure(&b.betti == expect, || format!("{name} at {res}: {:?}", b.betti))?;
            ensure(components(&grid) == b.b(0), || {
                format!("{name} at {res}: components ≠ b0")
            })?;
            grids += 1;
        }
    }
    Ok(format!(
        "disk (1,0), annulus (1,1), two disks (2,0), stable at 64→128 over {grids} grids"
    ))
}

fn symbolic_term(fields: &[Vec<SparsePoly>], t: &BracketTerm) -> Vec<SparsePoly> {
    match t {
        BracketTerm::Generator(i) => fields[*i].clone(),
        BracketTerm::Bracket(a, b) => {
            let (x, y) = (symbolic_term(fields, a), symbolic_term(fields, b));
            (0..x.len())
                .map(|i| {
                    let mut acc = SparsePoly::zero();
                    for j in 0..x.len() {
                        acc = acc.add(&x[j].mul(&y[i].derivative(j as u32)));
                        acc = acc.sub(&y[j].mul(&x[i].derivative(j as u32)));
                    }
                    acc
                })
                .collect()
        }
    }
}

type Terms = Vec<Vec<Vec<(Vec<u32>, f64)>>>;

fn polys(terms: &Terms) -> Vec<Vec<SparsePoly>> {
    terms
        .iter()
        .map(|f| {
            f.iter()
                .map(|c| SparsePoly::from_terms(c.iter().map(|(e, v)| (Monomial::from_exponents(e), *v))))
                .collect()
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gen = BracketTerm::Generator;
    let br = BracketTerm::bracket;
    let (mut anti_worst, mut jacobi_worst) = (0.0f64, 0.0f64);
    for fam_seed in 0..20u64 {
        let d = 1 + (fam_seed % 3) as usize;
        let depth = rng.gen_range(1..=2);
        let widths: Vec<usize> = (0..depth).map(|_| rng.gen_range(1..=3)).collect();
        let arch = Architecture::new(d, widths, builtins()[(fam_seed % 3) as usize].clone()).unwrap();
        let fam = VectorFieldFamily::random_networks(&arch, 3, fam_seed, 1.0).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let z: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut ev = BracketEvaluator::new(&fam, &z, 3).map_err(|e| e.to_string())?;
            let xy = ev.value(&br(gen(0), gen(1))).unwrap();
            let yx = ev.value(&br(gen(1), gen(0))).unwrap();
            let j: Vec<Vec<f64>> = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
                .iter()
                .map(|&(a, b, c)| ev.value(&br(gen(a), br(gen(b), gen(c)))).unwrap())
                .collect();
            for i in 0..d {
                anti_worst = anti_worst.max((xy[i] + yx[i]).abs());
                jacobi_worst = jacobi_worst.max((j[0][i] + j[1][i] + j[2][i]).abs());
            }
        }
    }
    ensure(anti_worst <= 1e-9, || format!("antisymmetry residual {anti_worst:e}"))?;
    ensure(jacobi_worst <= 1e-7, || format!("Jacobi residual {jacobi_worst:e}"))?;

    let grushin: Terms = vec![
        vec![vec![(vec![0, 0], 1.0)], vec![]],
        vec![vec![], vec![(vec![1, 0], 1.0)]],
    ];
    let heisenberg: Terms = vec![
        vec![vec![(vec![0, 0, 0], 1.0)], vec![], vec![(vec![0, 1, 0], -0.5)]],
        vec![vec![], vec![(vec![0, 0, 0], 1.0)], vec![(vec![1, 0, 0], 0.5)]],
    ];
    let mut fixtures = vec![(2usize, grushin), (3usize, heisenberg)];
    for _ in 0..10 {
        let d = rng.gen_range(1..=3);
        let terms: Terms = (0..2)
            .map(|_| {
                (0..d)
                    .map(|_| {
                        (0..rng.gen_range(0..=3))
                            .map(|_| ((0..d).map(|_| rng.gen_range(0..=2)).collect(), rng.gen_range(-1.5..1.5)))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        fixtures.push((d, terms));
    }
    let mut poly_worst = 0.0f64;
    for (d, terms) in &fixtures {
        let fam = VectorFieldFamily::polynomial(*d, terms).map_err(|e| e.to_string())?;
        let sym = polys(terms);
        for t in enumerate_brackets(2, 4, BracketMode::Hall) {
            let s = symbolic_term(&sym, &t);
            for _ in 0..10 {
                let z: Vec<f64> = (0..*d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let got = bracket_eval(&fam, &t, &z).map_err(|e| e.to_string())?;
                for a in 0..*d {
                    let want = s[a].eval(&z);
                    poly_worst = poly_worst.max((got[a] - want).abs() / want.abs().max(1.0));
                }
            }
        }
    }
    ensure(poly_worst <= 1e-12, || {
        format!("polynomial oracle residual {poly_worst:e}")
    })?;

    let h = VectorFieldFamily::heisenberg();
    let n = 11;
    for idx in 0..n * n * n {
        let z: Vec<f64> = [idx % n, (idx / n) % n, idx / (n * n)]
            .iter()
            .map(|&i| -5.0 + 10.0 * i as f64 / (n - 1) as f64)
            .collect();
        let rank = rank_at(&bracket_matrix(&h, 2, &z, BracketMode::Hall).unwrap(), 1e-8);
        ensure(rank == 3, || format!("Heisenberg rank {rank} at {z:?}"))?;
    }
    Ok(format!(
        "antisymmetry {anti_worst:.1e}, Jacobi {jacobi_worst:.1e}, polynomial {poly_worst:.1e}, Heisenberg rank 3 on {} points",
        n * n * n
    ))
}

fn criterion_6() -> Outcome {
    let g = VectorFieldFamily::grushin();
    let domain = BoxDomain::cube(2, -1.0, 1.0).unwrap();
    let opts = LocusOptions {
        resolution: vec![64, 64],
        criterion: LocusCriterion::default(),
        mode: BracketMode::Hall,
        thicken: true,
    };
    let z1 = locus_sample(&g, 1, 1, &domain, &opts).map_err(|e| e.to_string())?;
    let w = z1.grid.cell_width(0);
    for cell in z1.grid.flagged() {
        let (lo, hi) = z1.grid.cell_bounds(cell);
        // distance from the cell to the line x = 0
        let dist = if lo[0] > 0.0 {
            lo[0]
        } else if hi[0] < 0.0 {
            -hi[0]
        } else {
            0.0
        };
        ensure(dist <= w * (1.0 + 1e-9), || {
            format!("cell {cell} lies {dist} from x = 0")
        })?;
    }
    for row in 0..64 {
        let hit = (0..64).any(|col| {
            let cell = z1.grid.linear_index(&[col, row]);
            let (lo, hi) = z1.grid.cell_bounds(cell);
            z1.grid.get(cell) && lo[0] <= 0.0 && hi[0] >= 0.0
        });
        ensure(hit, || format!("row {row}: the cell on x = 0 is not flagged"))?;
    }
    let z2 = locus_sample(&g, 2, 1, &domain, &opts).map_err(|e| e.to_string())?;
    ensure(z2.grid.count_flagged() == 0, || {
        format!("Z²₁ has {} cells", z2.grid.count_flagged())
    })?;

    let mut flagged = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6666);
        let d = 2;
        let widths: Vec<usize> = (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(1..=3)).collect();
        let arch = Architecture::new(d, widths, builtins()[(seed % 3) as usize].clone()).unwrap();
        let fam = VectorFieldFamily::random_networks(&arch, 2, seed, 1.0).map_err(|e| e.to_string())?;
        let opts = LocusOptions {
            resolution: vec![32, 32],
            ..opts.clone()
        };
        let sweep =
            locus_sweep(&fam, 1, 3, 1, &BoxDomain::cube(2, -2.0, 2.0).unwrap(), &opts).map_err(|e| e.to_string())?;
        for pair in sweep.layers.windows(2) {
            for cell in pair[1].grid.flagged() {
                ensure(pair[0].grid.get(cell), || {
                    format!("family {seed}: cell {cell} in Z^{} but not Z^{}", pair[1].k, pair[0].k)
                })?;
            }
        }
        flagged += sweep.layers[0].grid.count_flagged();
    }
    Ok(format!(
        "Z¹₁ = {} cells on x = 0, Z²₁ = ∅; nesting holds for k = 1..3 on 20 families ({flagged} cells in Z¹)",
        z1.grid.count_flagged()
    ))
}

fn criterion_7() -> Outcome {
    let pts: Vec<f64> = (0..100).map(|i| -5.0 + 10.0 * i as f64 / 99.0).collect();
    let mut notes = Vec::new();
    for act in builtins() {
        let res = act.riccati_residual(&pts).map_err(|e| e.to_string())?;
        ensure(res <= 1e-10, || format!("{}: residual {res:e}", act.name()))?;
        let c = act.coefficients();
        let bad = act
            .riccati_residual_with(RiccatiCoefficients::new(c.a0 + 0.1, c.a1, c.a2), &pts)
            .map_err(|e| e.to_string())?;
        ensure(bad > 0.05, || format!("{}: perturbed residual {bad}", act.name()))?;
        notes.push(format!("{} {res:.1e}/{bad:.2}", act.name()));
    }
    Ok(notes.join(", "))
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pfaffnet"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn without_timestamp(path: &Path) -> Result<serde_json::Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v.as_object_mut()
        .ok_or("sidecar is not an object")?
        .remove("generated_unix");
    Ok(v)
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs: [(&str, &str, &[&str]); 7] = [
        ("format", r#"{"d":2,"widths":[4,4,2],"activation":"softplus"}"#, &[]),
        (
            "bound",
            r#"{"requests":[{"formula":"zero_bound","R":30,"L":3},{"formula":"rankdrop_bound","d":2,"m":2,"k":3,"rho":1,"widths":[2],"r":0},{"formula":"network","d":1,"widths":[3,3]}]}"#,
            &[],
        ),
        ("verify-chain", r#"{"points":50}"#, &["--seeds", "0..6"]),
        ("zeros", r#"{"initial_samples":4096}"#, &["--seeds", "0..20"]),
        (
            "betti",
            r#"{"source":{"kind":"network","d":2,"widths":[3,3],"scale":2.0},"box":{"lo":[-3,-3],"hi":[3,3]}}"#,
            &["--seeds", "0..4", "--resolution", "48"],
        ),
        (
            "rankdrop",
            r#"{"k_max":2,"export_grids":true}"#,
            &["--seed", "0", "--resolution", "40"],
        ),
        (
            "rankdrop",
            r#"{"family":{"kind":"random","d":2,"m":2,"widths":[2]},"k_max":3}"#,
            &["--seeds", "3..5", "--resolution", "24", "--mode", "all-trees"],
        ),
    ];
    for (n, (cmd, cfg, flags)) in configs.iter().enumerate() {
        let cfg_path = dir.path().join(format!("c{n}.json"));
        std::fs::write(&cfg_path, cfg).map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("r{n}_{run}.csv"));
            let mut args = vec![
                *cmd,
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ];
            args.extend_from_slice(flags);
            run_cli(&args, dir.path())?;
            outputs.push(out);
        }
        let a = std::fs::read(&outputs[0]).map_err(|e| e.to_string())?;
        let b = std::fs::read(&outputs[1]).map_err(|e| e.to_string())?;
        ensure(a == b && !a.is_empty(), || format!("{cmd}: CSV reports differ"))?;
        let sa = without_timestamp(&outputs[0].with_extension("json"))?;
        let sb = without_timestamp(&outputs[1].with_extension("json"))?;
        ensure(sa == sb, || format!("{cmd}: sidecars differ"))?;
        ensure(sa["config"].is_object() && sa["version"].is_string(), || {
            format!("{cmd}: sidecar lacks provenance")
        })?;
    }
    let grids: Vec<_> = std::fs::read_dir(dir.path())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".grid.csv") && p.to_string_lossy().contains("r5_0."))
        .collect();
    ensure(grids.len() == 2, || {
        format!("expected 2 exported grids per run, found {}", grids.len())
    })?;
    for first in &grids {
        let second = first.with_file_name(first.file_name().unwrap().to_string_lossy().replace("r5_0.", "r5_1."));
        let same = std::fs::read(first).ok() == std::fs::read(&second).ok();
        ensure(same, || {
            format!("grid exports differ: {} vs {}", first.display(), second.display())
        })?;
    }
    Ok(format!(
        "{} configurations × 6 subcommands byte-identical across reruns",
        configs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "formula exactness", 1, criterion_1),
        (2, "chain certification", 60, criterion_2),
        (3, "zero-count oracle", 120, criterion_3),
        (4, "homology fixtures", 30, criterion_4),
        (5, "bracket engine", 600, criterion_5),
        (6, "rank-drop loci", 120, criterion_6),
        (7, "activation certification", 600, criterion_7),
        (8, "determinism", 600, criterion_8),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; took longer than {budget} s"))
            }
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {id} {tag} {name} [{:.2} s]: {detail}", elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
