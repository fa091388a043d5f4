use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use wigrot_core::analysis::{
    benchmark, bound_b12, cross_error, ellipse_contains, fit_power_law, lambda_exponent, noise_amplification,
    noise_realization, unitarity_error, NoiseKind, NoiseModel,
};
use wigrot_core::fft::compute_subspace_fft_modified;
use wigrot_core::oracle::{flip_reconstruct, h_direct, wigner_d_from_h, DIRECT_RELIABLE_MAX};
use wigrot_core::special::parity;
use wigrot_core::{compute_any_beta, compute_subspace, full_matrix, reduce_beta, Algorithm, CoeffTriangle};

use crate::format::{
    csv_line, dense_entries, num, triangle_entries, write_bin_block, Entry, Layout, OutputHeader, BIN_VERSION,
    CSV_HEADER,
};
use crate::{
    BenchArgs, BoundsArgs, CheckArg, CliError, ComputeArgs, FormatArg, ModelArg, NoiseArgs, TableFormat, ValidateArgs,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn angle(v: f64, degrees: bool) -> Result<f64, CliError> {
    if !v.is_finite() {
        return Err(CliError::Usage(format!("angle {v} is not finite")));
    }
    Ok(if degrees { v.to_radians() } else { v })
}

fn json_line<T: Serialize>(w: &mut dyn Write, doc: &T) -> Result<(), CliError> {
    serde_json::to_writer(&mut *w, doc).map_err(std::io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct ComputeDoc<'a> {
    algo: &'static str,
    beta: f64,
    beta_reduced: f64,
    beta_negated: bool,
    version: &'static str,
    layout: &'static str,
    d_matrix: bool,
    values: &'a [Entry],
}

pub fn compute(a: &ComputeArgs, w: &mut dyn Write) -> Result<(), CliError> {
    let beta = angle(a.beta, a.degrees)?;
    let red = reduce_beta(beta)?;
    let algo: Algorithm = a.algo.into();
    let degrees: Vec<usize> = match (a.n, a.p) {
        (Some(n), _) => vec![n as usize],
        (None, Some(p)) => (0..=p as usize).collect(),
        (None, None) => return Err(CliError::Usage("one of --n or --p is required".into())),
    };
    let layout = if a.dense { Layout::Dense } else { Layout::Triangle };
    let blocks = degrees
        .par_iter()
        .map(|&n| {
            let (t, _) = compute_any_beta(algo, n, beta)?;
            let mut entries = if a.dense { dense_entries(&full_matrix(&t)?) } else { triangle_entries(&t) };
            if a.d_matrix {
                for e in &mut entries {
                    e.value = wigner_d_from_h(n, e.m_prime, e.m, e.value);
                }
            }
            Ok(entries)
        })
        .collect::<wigrot_core::Result<Vec<_>>>()?;

    match a.format {
        FormatArg::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            for e in blocks.iter().flatten() {
                writeln!(w, "{}", csv_line(e))?;
            }
        }
        FormatArg::Json => {
            let values: Vec<Entry> = blocks.into_iter().flatten().collect();
            let doc = ComputeDoc {
                algo: algo.name(),
                beta,
                beta_reduced: red.reduced,
                beta_negated: red.negated,
                version: VERSION,
                layout: layout.name(),
                d_matrix: a.d_matrix,
                values: &values,
            };
            json_line(w, &doc)?;
        }
        FormatArg::Bin => {
            for (n, entries) in degrees.iter().zip(&blocks) {
                let header = OutputHeader { version: BIN_VERSION, n: *n as u32, beta, layout };
                let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
                write_bin_block(w, &header, &values)?;
            }
        }
    }
    Ok(())
}

/// Check names as emitted; `identity` is the exact pattern at `beta = 0`.
fn check_name(c: CheckArg) -> &'static str {
    match c {
        CheckArg::Unitarity => "unitarity",
        CheckArg::Symmetry => "symmetry",
        CheckArg::Oracle => "oracle",
        CheckArg::Flip => "flip",
        CheckArg::Cross => "cross",
        CheckArg::Bounds => "bounds",
    }
}

fn threshold(check: &str, n: usize) -> f64 {
    match check {
        "unitarity" if n <= 64 => 1e-12,
        "unitarity" if n <= 1024 => 1e-10,
        "unitarity" => 1e-9,
        "identity" => 1e-13,
        "oracle" | "bounds" => 1e-12,
        "cross" => 1e-7,
        _ => 1e-10,
    }
}

#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    check: &'static str,
    n: usize,
    value: f64,
    threshold: f64,
    pass: bool,
}

fn symmetry_metric(n: usize, beta: f64) -> wigrot_core::Result<f64> {
    let t = compute_subspace(n, beta)?;
    let r = compute_subspace(n, PI - beta)?;
    let (neg, _) = compute_any_beta(Algorithm::Recursive, n, -beta)?;
    let mut w = 0.0f64;
    for (mp, m, v) in t.iter() {
        w = w.max((r.get(mp, m) - parity(n as i64 + mp + m) * t.get(-mp, m)).abs());
        w = w.max((neg.get(mp, m) - parity(mp + m) * v).abs());
    }
    Ok(w)
}

fn identity_metric(n: usize) -> wigrot_core::Result<f64> {
    let t = compute_subspace(n, 0.0)?;
    let ni = n as i64;
    let mut w = 0.0f64;
    for mp in -ni..=ni {
        for m in -ni..=ni {
            let want = if mp == m { parity(mp) } else { 0.0 };
            w = w.max((t.get(mp, m) - want).abs());
        }
    }
    Ok(w)
}

fn oracle_metric(t: &CoeffTriangle) -> wigrot_core::Result<f64> {
    let mut w = 0.0f64;
    for (mp, m, v) in t.iter() {
        w = w.max((v - h_direct(t.n(), mp, m, t.beta())?).abs());
    }
    Ok(w)
}

fn bounds_metric(t: &CoeffTriangle) -> wigrot_core::Result<f64> {
    let mut w = 0.0f64;
    for (mp, m, v) in t.iter() {
        w = w.max(v.abs() - bound_b12(t.n(), mp, m, t.beta())?.min(1.0));
    }
    Ok(w)
}

/// Worst metric of one check at degree `n` over the angles, or `None` when
/// the check does not apply at that degree.
fn run_check(check: &'static str, n: usize, betas: &[f64]) -> wigrot_core::Result<Option<f64>> {
    if check == "oracle" && n > DIRECT_RELIABLE_MAX {
        return Ok(None);
    }
    if check == "identity" {
        return identity_metric(n).map(Some);
    }
    let mut worst = 0.0f64;
    for &beta in betas {
        let v = match check {
            "unitarity" => unitarity_error(&compute_subspace(n, beta)?),
            "symmetry" => symmetry_metric(n, beta)?,
            "oracle" => oracle_metric(&compute_subspace(n, beta)?)?,
            "flip" => {
                let half = compute_subspace(n, FRAC_PI_2)?;
                cross_error(&flip_reconstruct(&half, n, beta)?, &compute_subspace(n, beta)?)?
            }
            "cross" => cross_error(&compute_subspace(n, beta)?, &compute_subspace_fft_modified(n, beta)?)?,
            "bounds" => bounds_metric(&compute_subspace(n, beta)?)?,
            _ => unreachable!("unknown check {check}"),
        };
        worst = worst.max(v);
    }
    Ok(Some(worst))
}

#[derive(Serialize)]
struct ValidateDoc<'a> {
    version: &'static str,
    betas: &'a [f64],
    passed: bool,
    rows: &'a [CheckRow],
}

pub fn validate(a: &ValidateArgs, w: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let raw = a.beta_list.clone().unwrap_or_else(|| vec![0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI]);
    let betas =
        raw.iter().map(|&b| Ok(reduce_beta(angle(b, a.degrees)?)?.reduced)).collect::<Result<Vec<f64>, CliError>>()?;
    if betas.is_empty() {
        return Err(CliError::Usage("--beta-list is empty".into()));
    }
    let mut checks: Vec<CheckArg> = a.checks.clone();
    checks.sort();
    checks.dedup();
    let mut names: Vec<&'static str> = Vec::new();
    for c in checks {
        names.push(check_name(c));
        if c == CheckArg::Symmetry && betas.contains(&0.0) {
            names.push("identity");
        }
    }
    let tasks: Vec<(&'static str, usize)> =
        names.iter().flat_map(|&c| (0..=a.n_max as usize).map(move |n| (c, n))).collect();
    let rows = tasks
        .par_iter()
        .map(|&(check, n)| {
            run_check(check, n, &betas).map(|v| {
                v.map(|value| {
                    let threshold = threshold(check, n);
                    CheckRow { check, n, value, threshold, pass: value <= threshold }
                })
            })
        })
        .collect::<wigrot_core::Result<Vec<_>>>()?;
    let rows: Vec<CheckRow> = rows.into_iter().flatten().collect();
    let passed = rows.iter().all(|r| r.pass);

    match a.format {
        TableFormat::Csv => {
            writeln!(w, "check,n,value,threshold,status")?;
            for r in &rows {
                let status = if r.pass { "pass" } else { "fail" };
                writeln!(w, "{},{},{},{},{status}", r.check, r.n, num(r.value), num(r.threshold))?;
            }
        }
        TableFormat::Json => json_line(w, &ValidateDoc { version: VERSION, betas: &betas, passed, rows: &rows })?,
    }

    if passed {
        return Ok(());
    }
    let mut failed = 0;
    for &name in &names {
        let bad: Vec<&CheckRow> = rows.iter().filter(|r| r.check == name && !r.pass).collect();
        if let Some(worst) = bad.iter().max_by(|x, y| x.value.total_cmp(&y.value)) {
            failed += 1;
            writeln!(
                stderr,
                "{name}: {} degrees above threshold, worst {} at n = {}",
                bad.len(),
                num(worst.value),
                worst.n
            )?;
        }
    }
    Err(CliError::Validation(format!("{failed} checks failed")))
}

#[derive(Serialize)]
struct GrowthRow {
    n: usize,
    growth: f64,
}

#[derive(Serialize)]
struct NoiseDoc<'a> {
    model: &'static str,
    seed: u64,
    trials: u32,
    rows: &'a [GrowthRow],
    exponent: Option<f64>,
}

#[derive(Serialize)]
struct GridRow {
    m_prime: i64,
    m: i64,
    abs_eta: f64,
}

/// Fits use degrees of at least this size only.
const FIT_MIN_N: usize = 64;

pub fn noise(a: &NoiseArgs, w: &mut dyn Write) -> Result<(), CliError> {
    if let Some(n) = a.n_list.iter().find(|&&n| n < 2) {
        return Err(CliError::Usage(format!("noise degrees must be at least 2, got {n}")));
    }
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let kind = match a.model {
        ModelArg::Uniform => NoiseKind::Uniform,
        ModelArg::Coherent => NoiseKind::Coherent,
    };

    if a.dump_grid {
        let n = a.n_list[0] as usize;
        let (t, init) = noise_realization(n, kind, a.seed, 0)?;
        let rows: Vec<GridRow> =
            t.iter().map(|(m_prime, m, v)| GridRow { m_prime, m, abs_eta: v.abs() / init }).collect();
        match a.format {
            TableFormat::Csv => {
                writeln!(w, "m_prime,m,abs_eta")?;
                for r in &rows {
                    writeln!(w, "{},{},{}", r.m_prime, r.m, num(r.abs_eta))?;
                }
            }
            TableFormat::Json => json_line(w, &rows)?,
        }
        return Ok(());
    }

    let model = NoiseModel { kind, seed: a.seed, trials: a.trials };
    let mut ns: Vec<usize> = a.n_list.iter().map(|&n| n as usize).collect();
    ns.sort_unstable();
    ns.dedup();
    let rows = ns
        .iter()
        .map(|&n| noise_amplification(n, &model).map(|growth| GrowthRow { n, growth }))
        .collect::<wigrot_core::Result<Vec<_>>>()?;
    let fit_points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.n >= FIT_MIN_N).map(|r| (r.n as f64, r.growth)).collect();
    let exponent = if fit_points.len() >= 2 { Some(fit_power_law(&fit_points)?) } else { None };

    match a.format {
        TableFormat::Csv => {
            writeln!(w, "n,growth")?;
            for r in &rows {
                writeln!(w, "{},{}", r.n, num(r.growth))?;
            }
            if let Some(p) = exponent {
                writeln!(w, "exponent,{}", num(p))?;
            }
        }
        TableFormat::Json => {
            let doc = NoiseDoc { model: kind.name(), seed: a.seed, trials: a.trials, rows: &rows, exponent };
            json_line(w, &doc)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundsRow {
    mu_prime: f64,
    mu: f64,
    m_prime: i64,
    m: i64,
    log10_abs_h: f64,
    lambda: f64,
    lambda_sign: i8,
    region: &'static str,
}

pub fn bounds(a: &BoundsArgs, w: &mut dyn Write) -> Result<(), CliError> {
    if a.grid.is_multiple_of(2) {
        return Err(CliError::Usage(format!("--grid must be odd, got {}", a.grid)));
    }
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let beta = reduce_beta(angle(a.beta, a.degrees)?)?.reduced;
    let n = a.n as usize;
    let t = compute_subspace(n, beta)?;
    let g = a.grid as usize;
    let coord = |i: usize| if g == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (g - 1) as f64 };
    let rows = (0..g * g)
        .into_par_iter()
        .map(|k| {
            let (mu_prime, mu) = (coord(k / g), coord(k % g));
            let (m_prime, m) = ((mu_prime * n as f64).round() as i64, (mu * n as f64).round() as i64);
            let lambda = lambda_exponent(mu, mu_prime, beta)?;
            Ok(BoundsRow {
                mu_prime,
                mu,
                m_prime,
                m,
                log10_abs_h: t.get(m_prime, m).abs().log10(),
                lambda,
                lambda_sign: if lambda > 0.0 {
                    1
                } else if lambda < 0.0 {
                    -1
                } else {
                    0
                },
                region: ellipse_contains(mu, mu_prime, beta).name(),
            })
        })
        .collect::<wigrot_core::Result<Vec<_>>>()?;

    match a.format {
        TableFormat::Csv => {
            writeln!(w, "mu_prime,mu,m_prime,m,log10_abs_h,lambda,lambda_sign,region")?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    num(r.mu_prime),
                    num(r.mu),
                    r.m_prime,
                    r.m,
                    num(r.log10_abs_h),
                    num(r.lambda),
                    r.lambda_sign,
                    r.region
                )?;
            }
        }
        TableFormat::Json => json_line(w, &rows)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchRow {
    algo: &'static str,
    n: usize,
    median_seconds: f64,
    ratio: Option<f64>,
}

pub fn bench(a: &BenchArgs, w: &mut dyn Write) -> Result<(), CliError> {
    if a.repeat == 0 {
        return Err(CliError::Usage("--repeat must be positive".into()));
    }
    let beta = reduce_beta(angle(a.beta, false)?)?.reduced;
    let ns: Vec<usize> = a.n_list.iter().map(|&n| n as usize).collect();
    let mut rows = Vec::new();
    for &algo in &a.algos {
        let algo: Algorithm = algo.into();
        let recs = benchmark(algo, &ns, beta, a.repeat as usize)?;
        let mut prev: Option<f64> = None;
        for r in recs {
            rows.push(BenchRow {
                algo: algo.name(),
                n: r.n,
                median_seconds: r.value,
                ratio: prev.map(|p| r.value / p),
            });
            prev = Some(r.value);
        }
    }

    match a.format {
        TableFormat::Csv => {
            writeln!(w, "algo,n,median_seconds,ratio")?;
            for r in &rows {
                let ratio = r.ratio.map(num).unwrap_or_default();
                writeln!(w, "{},{},{},{ratio}", r.algo, r.n, num(r.median_seconds))?;
            }
        }
        TableFormat::Json => json_line(w, &rows)?,
    }
    Ok(())
}
