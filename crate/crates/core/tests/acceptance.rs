//! Acceptance report. Prints one PASS/FAIL line per criterion. Exits nonzero
//! on any failure when `WIGROT_ACCEPTANCE_STRICT=1`, and zero otherwise so the
//! report runs as part of the ordinary test suite.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use wigrot_core::analysis::{
    bound_b12, cross_error, ellipse_contains, fit_power_law, lambda_exponent, noise_amplification, unitarity_error,
    unitarity_error_sampled, NoiseKind, NoiseModel, Region,
};
use wigrot_core::fft::compute_subspace_fft_modified;
use wigrot_core::oracle::{flip_reconstruct, h_direct};
use wigrot_core::rotation::{rotate_expansion, PrecomputedCoeffs, RotationAngles, SHExpansion};
use wigrot_core::special::parity;
use wigrot_core::{compute_subspace, full_matrix, Algorithm, CoeffTriangle};

const FIVE_BETAS: [f64; 5] = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI];

/// Degrees above 64 are sampled; every degree up to 64 is checked.
fn ladder(max: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (0..=64.min(max)).collect();
    ns.extend([96, 128, 192, 256, 384, 512, 768, 1024].into_iter().filter(|&n| n <= max));
    ns
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn max_over<I: IntoParallelIterator<Item = f64>>(it: I) -> f64 {
    it.into_par_iter().reduce(|| 0.0, f64::max)
}

fn oracle_equivalence() -> Outcome {
    let betas = [0.1, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, PI - 0.1];
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 0..=16usize {
        for beta in betas {
            let t = compute_subspace(n, beta).unwrap();
            for (mp, m, v) in t.iter() {
                worst = worst.max((v - h_direct(n, mp, m, beta).unwrap()).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 1.0, format!("max |recursive - direct| = {worst:.3e}, {secs:.3} s"))
}

fn recursive_unitarity() -> Outcome {
    let errs: Vec<(usize, f64)> = ladder(1024)
        .into_iter()
        .map(|n| (n, FIVE_BETAS.iter().map(|&b| unitarity_error(&compute_subspace(n, b).unwrap())).fold(0.0, f64::max)))
        .collect();
    let small = errs.iter().filter(|(n, _)| *n <= 64).map(|e| e.1).fold(0.0, f64::max);
    let large = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    outcome(small <= 1e-12 && large <= 1e-10, format!("n <= 64: {small:.3e}; n <= 1024: {large:.3e}"))
}

fn fft_unitarity() -> Outcome {
    let mut worst = (0usize, 0.0f64);
    for n in ladder(1024) {
        for b in FIVE_BETAS {
            let e = unitarity_error(&compute_subspace_fft_modified(n, b).unwrap());
            if e > worst.1 {
                worst = (n, e);
            }
        }
    }
    outcome(worst.1 <= 1e-7, format!("max eps0 = {:.3e} (at n = {})", worst.1, worst.0))
}

fn cross_validation() -> Outcome {
    let worst = max_over((0..=512usize).into_par_iter().flat_map_iter(|n| {
        [FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4].into_iter().map(move |b| {
            cross_error(&compute_subspace(n, b).unwrap(), &compute_subspace_fft_modified(n, b).unwrap()).unwrap()
        })
    }));
    outcome(worst <= 1e-7, format!("max eps1 = {worst:.3e} over n <= 512"))
}

fn flip_reconstruction() -> Outcome {
    let betas = [0.0, 0.3, FRAC_PI_4, 1.2, FRAC_PI_2, 2.0, 3.0 * FRAC_PI_4, PI];
    let worst = max_over((0..=128usize).into_par_iter().flat_map_iter(|n| {
        let half = compute_subspace(n, FRAC_PI_2).unwrap();
        betas
            .iter()
            .map(|&b| cross_error(&flip_reconstruct(&half, n, b).unwrap(), &compute_subspace(n, b).unwrap()).unwrap())
            .collect::<Vec<_>>()
    }));
    outcome(worst <= 1e-10, format!("max |flip - recursive| = {worst:.3e}"))
}

fn symmetry_suite() -> Outcome {
    let betas = [0.2, FRAC_PI_4, 1.1, FRAC_PI_2, 2.5];
    // Swap and negation: on the dense expansion for all n, and against the
    // direct sum off the stored triangle where that is exact enough.
    let dense = max_over((0..=256usize).into_par_iter().flat_map_iter(|n| {
        betas
            .iter()
            .map(|&b| {
                let d = full_matrix(&compute_subspace(n, b).unwrap()).unwrap();
                let ni = n as i64;
                let mut w = 0.0f64;
                for mp in -ni..=ni {
                    for m in -ni..=ni {
                        let v = d.get(mp, m);
                        w = w.max((v - d.get(m, mp)).abs()).max((v - d.get(-mp, -m)).abs());
                    }
                }
                w
            })
            .collect::<Vec<_>>()
    }));
    let mut direct = 0.0f64;
    for n in 0..=16usize {
        let ni = n as i64;
        for b in betas {
            let t = compute_subspace(n, b).unwrap();
            for mp in -ni..=ni {
                for m in -ni..=ni {
                    direct = direct.max((t.get(m, mp) - h_direct(n, mp, m, b).unwrap()).abs());
                    direct = direct.max((t.get(-mp, -m) - h_direct(n, mp, m, b).unwrap()).abs());
                }
            }
        }
    }
    // Reflection and negative angle against separate computations.
    let reflect = max_over((0..=256usize).into_par_iter().flat_map_iter(|n| {
        betas
            .iter()
            .map(|&b| {
                let t = compute_subspace(n, b).unwrap();
                let r = compute_subspace(n, PI - b).unwrap();
                let (neg, _) = wigrot_core::compute_any_beta(Algorithm::Recursive, n, -b).unwrap();
                let mut w = 0.0f64;
                for (mp, m, v) in t.iter() {
                    let want = parity(n as i64 + mp + m) * t.get(-mp, m);
                    w = w.max((r.get(mp, m) - want).abs());
                    w = w.max((neg.get(mp, m) - parity(mp + m) * v).abs());
                }
                w
            })
            .collect::<Vec<_>>()
    }));
    let zero = max_over((0..=256usize).into_par_iter().map(|n| {
        let t = compute_subspace(n, 0.0).unwrap();
        let ni = n as i64;
        let mut w = 0.0f64;
        for mp in -ni..=ni {
            for m in -ni..=ni {
                let want = if mp == m { parity(mp) } else { 0.0 };
                w = w.max((t.get(mp, m) - want).abs());
            }
        }
        w
    }));
    let pass = dense <= 1e-10 && direct <= 1e-10 && reflect <= 1e-10 && zero <= 1e-13;
    outcome(
        pass,
        format!("swap/negate {dense:.1e} (vs direct {direct:.1e}), reflect/negative angle {reflect:.1e}, beta = 0 pattern {zero:.1e}"),
    )
}

fn bound_compliance() -> Outcome {
    let rows: Vec<(f64, f64)> = (0..=128usize)
        .into_par_iter()
        .flat_map_iter(|n| {
            [FRAC_PI_6, FRAC_PI_4, FRAC_PI_2]
                .into_iter()
                .map(|b| {
                    let t = compute_subspace(n, b).unwrap();
                    let ni = n as i64;
                    let (mut excess, mut gap) = (f64::NEG_INFINITY, 0.0f64);
                    for (mp, m, v) in t.iter() {
                        let bound = bound_b12(n, mp, m, b).unwrap();
                        excess = excess.max(v.abs() - bound.min(1.0));
                        if m == ni {
                            gap = gap.max((bound - v.abs()).abs());
                        }
                    }
                    (excess, gap)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let excess = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let gap = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    outcome(excess <= 1e-12 && gap <= 1e-12, format!("max |H| - bound = {excess:.3e}, max gap at m = n: {gap:.3e}"))
}

fn noise_trend() -> Outcome {
    let ns = [64usize, 128, 256, 512, 1024];
    let run = |kind| {
        let model = NoiseModel { kind, seed: 20240611, trials: 10 };
        ns.iter().map(|&n| (n as f64, noise_amplification(n, &model).unwrap())).collect::<Vec<_>>()
    };
    let coherent = run(NoiseKind::Coherent);
    let uniform = run(NoiseKind::Uniform);
    let pc = fit_power_law(&coherent).unwrap();
    let pu = fit_power_law(&uniform).unwrap();
    let bounded = coherent.iter().chain(&uniform).all(|(n, g)| *g <= 10.0 * n.powf(0.7));
    let pass = (0.3..=0.7).contains(&pc) && pu <= pc && bounded;
    let worst = coherent.iter().chain(&uniform).map(|(n, g)| g / (10.0 * n.powf(0.7))).fold(0.0, f64::max);
    outcome(pass, format!("coherent exponent {pc:.3}, uniform exponent {pu:.3}, max growth / (10 n^0.7) = {worst:.3}"))
}

fn decay_region() -> Outcome {
    let n = 100usize;
    let beta = FRAC_PI_4;
    let t = compute_subspace(n, beta).unwrap();
    let ni = n as i64;
    let nf = n as f64;
    let (mut worst_decay, mut inside, mut total) = (0.0f64, 0.0f64, 0.0f64);
    for mp in -ni..=ni {
        for m in -ni..=ni {
            let v = t.get(mp, m).abs();
            let (mu, mup) = (m as f64 / nf, mp as f64 / nf);
            if lambda_exponent(mu, mup, beta).unwrap() <= -0.2 {
                worst_decay = worst_decay.max(v);
            }
            if v >= 1e-6 {
                total += v * v;
                if ellipse_contains(mu, mup, beta) != Region::Outside {
                    inside += v * v;
                }
            }
        }
    }
    let frac = inside / total;
    outcome(
        worst_decay < 1e-6 && frac >= 0.99,
        format!("max |H| where lambda <= -0.2: {worst_decay:.3e}; interior mass fraction {frac:.5}"),
    )
}

fn timed(n: usize) -> (f64, CoeffTriangle) {
    let mut best = None;
    let mut times = Vec::new();
    for _ in 0..3 {
        let start = Instant::now();
        let t = compute_subspace(n, 1.0).unwrap();
        times.push(start.elapsed().as_secs_f64());
        best = Some(t);
    }
    times.sort_by(f64::total_cmp);
    (times[1], best.unwrap())
}

fn performance() -> Outcome {
    let (t1, _) = timed(1024);
    let (t2, _) = timed(2048);
    let (t4, _) = timed(4096);
    let (r1, r2) = (t2 / t1, t4 / t2);
    let start = Instant::now();
    let big = compute_subspace(8192, 1.0);
    let t8 = start.elapsed().as_secs_f64();
    let eps8 = match &big {
        Ok(t) => {
            let rows: Vec<i64> = (-8192..=8192).step_by(257).chain([-8192, -1, 0, 1, 8192]).collect();
            unitarity_error_sampled(t, &rows).unwrap()
        }
        Err(_) => f64::INFINITY,
    };
    let pass = (3.0..=6.0).contains(&r1) && (3.0..=6.0).contains(&r2) && t4 <= 10.0 && big.is_ok() && eps8 <= 1e-9;
    outcome(
        pass,
        format!(
            "T(2048)/T(1024) = {r1:.2}, T(4096)/T(2048) = {r2:.2}, T(4096) = {t4:.2} s, n = 8192 in {t8:.2} s with sampled eps0 {eps8:.2e}"
        ),
    )
}

fn random_expansion(p: usize, rng: &mut ChaCha8Rng) -> SHExpansion {
    let coeffs = (0..p * p).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    SHExpansion::from_coeffs(p, coeffs).unwrap()
}

fn rotation_application() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut norm_err, mut round_err) = (0.0f64, 0.0f64);
    for p in [1usize, 2, 3, 6, 17, 33, 64] {
        for _ in 0..3 {
            let f = random_expansion(p, &mut rng);
            let angles =
                RotationAngles::new(rng.gen_range(-PI..PI), rng.gen_range(0.0..PI), rng.gen_range(-PI..PI)).unwrap();
            let inv = angles.inverse();
            let g = rotate_expansion(&f, &angles, &PrecomputedCoeffs::new(p, angles.beta).unwrap()).unwrap();
            let back = rotate_expansion(&g, &inv, &PrecomputedCoeffs::new(p, inv.beta).unwrap()).unwrap();
            for n in 0..p {
                let (a, b) = (f.degree_norm(n), g.degree_norm(n));
                norm_err = norm_err.max((a - b).abs() / a.max(1.0));
            }
            for (x, y) in f.as_slice().iter().zip(back.as_slice()) {
                round_err = round_err.max((x - y).norm());
            }
        }
    }
    outcome(
        norm_err <= 1e-10 && round_err <= 1e-10,
        format!("per-degree norm drift {norm_err:.3e}, round trip {round_err:.3e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence", oracle_equivalence),
        ("recursive unitarity", recursive_unitarity),
        ("fft unitarity", fft_unitarity),
        ("cross-validation", cross_validation),
        ("flip reconstruction", flip_reconstruction),
        ("symmetry suite", symmetry_suite),
        ("bound compliance", bound_compliance),
        ("noise trend", noise_trend),
        ("decay region", decay_region),
        ("performance scaling", performance),
        ("rotation application", rotation_application),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:>2} {name}: {} [{:.1} s]", i + 1, o.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    let strict = std::env::var("WIGROT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
