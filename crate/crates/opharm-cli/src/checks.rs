//! The invariant suite behind `opharm check`: exact identities, closed-form
//! quantitative cases and seed-stability of the measured equivalence bands.
//!
//! Each check pins its tolerances in code; measured constants that have no
//! closed form are only required to be finite and reproducible.

use std::time::Instant;

use num_complex::Complex;
use opharm_core::bmo::{bmo_norm, carleson_norm};
use opharm_core::companion::{build_companion, EtaSpec, PairMode};
use opharm_core::cone::{unit_ball_volume, ConeSpec};
use opharm_core::cubes::{CubeFamily, ShiftPolicy};
use opharm_core::error::Result;
use opharm_core::field::{
    fft_forward, fft_inverse, lp_field_norm, plancherel_pairing, spectral_pairing, OperatorField,
    SpectrumField,
};
use opharm_core::grid::GridSpec;
use opharm_core::hardy::{hardy_norm, HardyMethod, HardyOptions};
use opharm_core::matrix::op_norm;
use opharm_core::qtorus::{
    clock_shift_rep, qt_cond_expectation, qt_hardy_norm, qt_lp_norm, qt_poisson, qt_transfer,
    rep_product_residual, QtHardyMethod, Theta,
};
use opharm_core::riesz::bessel_decay_report;
use opharm_core::scale::ScaleGrid;
use opharm_core::scalefield::ScaleSpec;
use opharm_core::square::{poisson_deriv_identity_check, square_fn_of_field, SquareKind};
use opharm_core::symbols::RadialSymbol;
use opharm_core::MatrixValue;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::corpus::{gen_corpus, randn_c64};
use crate::experiment::{run_experiment, run_experiment_on};
use crate::report::EquivalenceReport;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn random_band_field(
    rng: &mut ChaCha8Rng,
    grid: GridSpec,
    n: usize,
    band: usize,
    zero_mean: bool,
) -> OperatorField {
    let mut modes = Vec::new();
    for idx in 0..grid.num_points() {
        let m = grid.freq(idx);
        if grid.freq_band(&m) <= band && !(zero_mean && grid.freq_band(&m) == 0) {
            modes.push((m, MatrixValue::from_fn(n, n, |_, _| randn_c64(rng))));
        }
    }
    fft_inverse(&SpectrumField::from_modes(grid, n, &modes).unwrap())
}

fn check_fft_plancherel() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut worst_rt = 0.0f64;
    let mut worst_pair = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for d in [1usize, 2] {
        for n_axis in [8usize, 16, 32, 64] {
            for n in [1usize, 2, 4] {
                let grid = GridSpec::new(d, n_axis)?;
                let band = (n_axis / 4).max(1).min(7);
                let f = random_band_field(&mut rng, grid, n, band, false);
                let g = random_band_field(&mut rng, grid, n, band, false);
                let back = fft_inverse(&fft_forward(&f));
                let scale = lp_field_norm(&f, f64::INFINITY)?;
                for s in 0..grid.num_points() {
                    worst_rt = worst_rt.max((back.value(s) - f.value(s)).norm() / (1.0 + scale));
                }
                let spatial = plancherel_pairing(&f, &g)?;
                let spectral = spectral_pairing(&fft_forward(&f), &fft_forward(&g))?;
                worst_pair = worst_pair.max((spatial - spectral).norm() / (1.0 + scale));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_rt <= 1e-10 && worst_pair <= 1e-10 && secs < 10.0;
    Ok((
        pass,
        format!("roundtrip {worst_rt:.2e}, pairing {worst_pair:.2e}, {secs:.2}s"),
    ))
}

fn check_reproducing_pairs() -> Result<(bool, String)> {
    // discrete pair on the 64-point lattice
    let grid64 = GridSpec::new(1, 64)?;
    let radii64 = grid64.frequency_radii(32.0);
    let sgrid64 = ScaleGrid::default_for_reproducing(64);
    let disc = build_companion(
        RadialSymbol::AnnulusBump,
        PairMode::Discrete,
        EtaSpec::default(),
        &radii64,
        &sgrid64,
    )?;
    let mut detail = format!("discrete annulus {:.2e}", disc.residual());
    let mut pass = disc.residual() <= 1e-10;
    // continuous pairs on the 32-point lattice, d = 1 and 2
    for d in [1usize, 2] {
        let grid = GridSpec::new(d, 32)?;
        let radii = grid.frequency_radii(16.0);
        let sgrid = ScaleGrid::default_for_reproducing(32);
        for sym in [
            RadialSymbol::DPoisson,
            RadialSymbol::GaussLp,
            RadialSymbol::RieszPoisson(1.0),
        ] {
            let pair = build_companion(
                sym,
                PairMode::Continuous,
                EtaSpec::default(),
                &radii,
                &sgrid,
            )?;
            pass &= pair.residual() <= 1e-6;
            detail.push_str(&format!(", {} d={d} {:.2e}", sym.label(), pair.residual()));
        }
    }
    Ok((pass, detail))
}

fn check_p2_half_identity() -> Result<(bool, String)> {
    let grid = GridSpec::new(1, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let f = random_band_field(&mut rng, grid, 2, 10, true);
        let h = hardy_norm(
            &f,
            2.0,
            HardyMethod::PoissonRadial,
            &HardyOptions::default(),
        )?;
        let l2 = lp_field_norm(&f, 2.0)?;
        worst = worst.max((h / l2 - 0.5).abs());
    }
    Ok((
        worst <= 1e-3,
        format!("max |ratio - 1/2| = {worst:.2e} over 50 fields"),
    ))
}

fn check_cone_factorization() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut detail = String::new();
    let mut pass = true;
    for (d, n_axis, m) in [(1usize, 32usize, [3i64, 0, 0]), (2, 16, [1, 2, 0])] {
        let grid = GridSpec::new(d, n_axis)?;
        let coeff = MatrixValue::from_fn(2, 2, |_, _| randn_c64(&mut rng));
        let f = fft_inverse(&SpectrumField::from_modes(grid, 2, &[(m, coeff)])?);
        let spec = ScaleSpec::Log(ScaleGrid::new(1e-3 / 4.0, 8.0, 128)?);
        let radial = square_fn_of_field(
            &f,
            &RadialSymbol::DPoisson,
            &spec,
            SquareKind::Radial,
            &ConeSpec::default(),
        )?;
        let conic = square_fn_of_field(
            &f,
            &RadialSymbol::DPoisson,
            &spec,
            SquareKind::Conic,
            &ConeSpec::default(),
        )?;
        let cd = unit_ball_volume(d).sqrt();
        let mut worst = 0.0f64;
        for s in 0..grid.num_points() {
            let r = op_norm(radial.value(s));
            let c = op_norm(conic.value(s));
            worst = worst.max((c - cd * r).abs() / (cd * r));
        }
        pass &= worst <= 0.02;
        detail.push_str(&format!("d={d}: {:.3}% ", worst * 100.0));
    }
    Ok((pass, detail))
}

fn check_deriv_identity() -> Result<(bool, String)> {
    let grid = GridSpec::new(1, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let f = random_band_field(&mut rng, grid, 2, 10, false);
    let eps = [0.05, 0.1, 0.2];
    let r1 = poisson_deriv_identity_check(&f, 1, &eps)?;
    let r2 = poisson_deriv_identity_check(&f, 2, &eps)?;
    let worst = r1.max_rel_error.max(r2.max_rel_error);
    Ok((
        worst <= 1e-4,
        format!(
            "k=1: {:.2e}, k=2: {:.2e}",
            r1.max_rel_error, r2.max_rel_error
        ),
    ))
}

fn check_kernel_decay() -> Result<(bool, String)> {
    let radii: Vec<f64> = (0..=30).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
    let mut detail = String::new();
    let mut pass = true;
    for (alpha, sigma, d) in [(1.0, 0.5, 1usize), (2.0, 1.0, 1), (1.0, 0.5, 2)] {
        let rep = bessel_decay_report(alpha, sigma, d, &radii)?;
        pass &= rep.bounded;
        detail.push_str(&format!(
            "(α={alpha},σ={sigma},d={d}): max {:.3e} slope {:+.3} ",
            rep.max_weighted, rep.tail_slope
        ));
    }
    Ok((pass, detail))
}

/// Band endpoints of ln(norm_a/norm_b) per seed and their stability: each
/// endpoint may move by at most 10% of the larger of the band width and
/// the endpoint magnitude.
fn band_stability(reports: &[EquivalenceReport]) -> (f64, f64, f64, bool) {
    let bands: Vec<(f64, f64)> = reports.iter().map(|r| r.log_ratio_band()).collect();
    let max_width = bands.iter().map(|(lo, hi)| hi - lo).fold(0.0f64, f64::max);
    let spread = |pick: fn(&(f64, f64)) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = bands.iter().map(pick).collect();
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        (max - min, mean.abs())
    };
    let (lo_spread, lo_mag) = spread(|b| b.0);
    let (hi_spread, hi_mag) = spread(|b| b.1);
    let stable =
        lo_spread <= 0.1 * max_width.max(lo_mag) && hi_spread <= 0.1 * max_width.max(hi_mag);
    (max_width, lo_spread, hi_spread, stable)
}

fn check_carleson_bmo_band() -> Result<(bool, String)> {
    let grid = GridSpec::new(1, 32)?;
    let radii = grid.frequency_radii(16.0);
    let sgrid = ScaleGrid::default_for_reproducing(32);
    let pair = build_companion(
        RadialSymbol::DPoisson,
        PairMode::Continuous,
        EtaSpec::default(),
        &radii,
        &sgrid,
    )?;
    let family = CubeFamily::new(grid, 5, ShiftPolicy::None)?;
    let mut reports = Vec::new();
    for seed in [2001u64, 2002, 2003] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rep = EquivalenceReport::default();
        for i in 0..50 {
            let f = random_band_field(&mut rng, grid, 2, 10, true);
            let c = carleson_norm(&f, &pair, &family, &sgrid, f64::INFINITY)?.sup_norm;
            let b = bmo_norm(&f, &family, f64::INFINITY)?;
            rep.push(i, f64::INFINITY, "carleson", "bmo_sq", c, b * b);
        }
        reports.push(rep);
    }
    let (width, lo_spread, hi_spread, stable) = band_stability(&reports);
    let pass = width <= 3.0 && stable;
    Ok((
        pass,
        format!("band width {width:.3} ln-units, endpoint spreads {lo_spread:.3}/{hi_spread:.3}"),
    ))
}

fn check_equivalence_bands() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = String::new();
    for kind in [
        ExperimentKind::HardyEquiv,
        ExperimentKind::HardyEquivDiscrete,
    ] {
        let mut reports = Vec::new();
        for seed in [3001u64, 3002, 3003] {
            let mut cfg = ExperimentConfig::desk_default(kind, seed);
            cfg.corpus_size = 50;
            cfg.p_list = vec![1.0, 2.0, 4.0];
            cfg.symbols = vec![RadialSymbol::DPoisson];
            if kind == ExperimentKind::HardyEquivDiscrete {
                cfg.symbols = vec![RadialSymbol::AnnulusBump];
            }
            reports.push(run_experiment(&cfg)?);
        }
        for rep in &reports {
            pass &= rep
                .rows
                .iter()
                .all(|r| r.ratio.is_finite() && r.ratio > 0.0);
        }
        let (width, lo_spread, hi_spread, stable) = band_stability(&reports);
        pass &= stable;
        detail.push_str(&format!(
            "{}: width {width:.3}, spreads {lo_spread:.3}/{hi_spread:.3}; ",
            kind.label()
        ));

        // exact scaling invariance of every ratio under corpus scaling
        let mut cfg = ExperimentConfig::desk_default(kind, 3001);
        cfg.corpus_size = 10;
        if kind == ExperimentKind::HardyEquivDiscrete {
            cfg.symbols = vec![RadialSymbol::AnnulusBump];
        }
        let corpus = gen_corpus(&cfg)?;
        let a = run_experiment_on(&cfg, &corpus)?;
        let b = run_experiment_on(&cfg, &corpus.scaled(7.3))?;
        let drift = a
            .rows
            .iter()
            .zip(&b.rows)
            .map(|(ra, rb)| (ra.ratio - rb.ratio).abs() / (1.0 + ra.ratio))
            .fold(0.0f64, f64::max);
        pass &= drift <= 1e-10;
        detail.push_str(&format!("scale drift {drift:.2e}; "));
    }
    Ok((pass, detail))
}

fn check_quantum_torus() -> Result<(bool, String)> {
    let mut pass = true;
    let mut detail = String::new();
    let grid = GridSpec::new(2, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(107);

    for (p, q) in [(0i64, 1i64), (1, 3), (1, 5)] {
        let theta = Theta::rational_2d(p, q)?;
        let rep = clock_shift_rep(&theta)?;
        // commutation residual
        let comm = rep.commutation_residual(p as f64 / q as f64);
        pass &= comm <= 1e-12;
        // product oracle on the support window
        let band = (q - 1).max(1);
        let mut worst_prod = 0.0f64;
        for _ in 0..5 {
            let mk = |rng: &mut ChaCha8Rng| {
                let coeffs: Vec<([i64; 3], Complex<f64>)> = (0..8)
                    .map(|_| {
                        (
                            [
                                rand::Rng::gen_range(rng, -band..=band),
                                rand::Rng::gen_range(rng, -band..=band),
                                0,
                            ],
                            randn_c64(rng),
                        )
                    })
                    .collect();
                opharm_core::qtorus::QTElement::from_coeffs(theta.clone(), &coeffs)
            };
            let x = mk(&mut rng);
            let y = mk(&mut rng);
            worst_prod = worst_prod.max(rep_product_residual(&x, &y, &rep)?);
        }
        pass &= worst_prod <= 1e-10;

        // transference isometry at p = 2
        let coeffs: Vec<([i64; 3], Complex<f64>)> = (0..20)
            .map(|_| {
                (
                    [
                        rand::Rng::gen_range(&mut rng, -5i64..=5),
                        rand::Rng::gen_range(&mut rng, -5i64..=5),
                        0,
                    ],
                    randn_c64(&mut rng),
                )
            })
            .collect();
        let x = opharm_core::qtorus::QTElement::from_coeffs(theta.clone(), &coeffs);
        let two_route =
            ((rep.dim() as f64).sqrt() * x.coeff_l2() - qt_lp_norm(&x, 2.0, grid, &rep)?).abs();
        pass &= two_route <= 1e-10 * (1.0 + x.coeff_l2());

        // conditional expectation: idempotence and contraction
        let f = qt_transfer(&x, grid, &rep)?;
        let ef = qt_cond_expectation(&f, &rep)?;
        let eef = qt_cond_expectation(&ef, &rep)?;
        let mut idem = 0.0f64;
        for s in 0..grid.num_points() {
            idem = idem.max((eef.value(s) - ef.value(s)).norm());
        }
        pass &= idem <= 1e-10;
        let g = random_band_field(&mut rng, grid, rep.dim(), 3, false);
        for pp in [1.0, 2.0, f64::INFINITY] {
            pass &= lp_field_norm(&qt_cond_expectation(&g, &rep)?, pp)?
                <= lp_field_norm(&g, pp)? * (1.0 + 1e-10);
        }

        // Poisson semigroup law
        let ab = qt_poisson(&qt_poisson(&x, 0.8)?, 0.55)?;
        let direct = qt_poisson(&x, 0.44)?;
        let mut semi = 0.0f64;
        for (m, &v) in ab.coeffs() {
            semi = semi.max((v - direct.coeff(m)).norm() / (1.0 + v.norm()));
        }
        pass &= semi <= 1e-12;
        detail.push_str(&format!(
            "θ={p}/{q}: comm {comm:.1e}, oracle {worst_prod:.1e}; "
        ));
    }

    // θ = 0 commutative limit through the full Hardy pipeline
    let theta0 = Theta::rational_2d(0, 1)?;
    let rep0 = clock_shift_rep(&theta0)?;
    let coeffs: Vec<([i64; 3], Complex<f64>)> = (0..12)
        .map(|_| {
            (
                [
                    rand::Rng::gen_range(&mut rng, -3i64..=3),
                    rand::Rng::gen_range(&mut rng, -3i64..=3),
                    0,
                ],
                randn_c64(&mut rng),
            )
        })
        .collect();
    let x0 = opharm_core::qtorus::QTElement::from_coeffs(theta0.clone(), &coeffs);
    let sgrid = ScaleGrid::default_for_hardy(x0.support_band());
    let qt = qt_hardy_norm(
        &x0,
        2.0,
        QtHardyMethod::PhiRadial(RadialSymbol::DPoisson),
        grid,
        &rep0,
        Some(&sgrid),
    )?;
    let comm_route = hardy_norm(
        &qt_transfer(&x0, grid, &rep0)?,
        2.0,
        HardyMethod::PhiRadial(RadialSymbol::DPoisson),
        &HardyOptions {
            sgrid: Some(sgrid),
            levels: None,
            cone: None,
        },
    )?;
    let limit_err = (qt - comm_route).abs() / (1.0 + comm_route);
    pass &= limit_err <= 1e-8;
    detail.push_str(&format!("θ=0 limit {limit_err:.1e}; "));

    // ratio bands seed-stable over θ ∈ {0, 1/3, 1/5}
    for (p, q) in [(0i64, 1i64), (1, 3), (1, 5)] {
        let mut reports = Vec::new();
        for seed in [4001u64, 4002, 4003] {
            let mut cfg = ExperimentConfig::desk_default(ExperimentKind::QtHardy, seed);
            cfg.theta = Some((p, q));
            cfg.corpus_size = 12;
            cfg.band_m = 4;
            cfg.p_list = vec![1.0, 2.0];
            reports.push(run_experiment(&cfg)?);
        }
        let (width, lo_spread, hi_spread, stable) = band_stability(&reports);
        pass &= stable;
        detail.push_str(&format!(
            "θ={p}/{q} band {width:.3}±({lo_spread:.3},{hi_spread:.3}); "
        ));
    }
    Ok((pass, detail))
}

/// Runs every invariant check, printing one line per check.
pub fn run_all_checks(verbose: bool) -> Vec<CheckResult> {
    type Check = (&'static str, fn() -> Result<(bool, String)>);
    let checks: Vec<Check> = vec![
        ("fft_plancherel", check_fft_plancherel),
        ("reproducing_pairs", check_reproducing_pairs),
        ("p2_half_identity", check_p2_half_identity),
        ("cone_factorization", check_cone_factorization),
        ("deriv_identity", check_deriv_identity),
        ("kernel_decay", check_kernel_decay),
        ("carleson_bmo_band", check_carleson_bmo_band),
        ("equivalence_bands", check_equivalence_bands),
        ("quantum_torus", check_quantum_torus),
    ];
    let mut results = Vec::new();
    for (name, run) in checks {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok((p, d)) => (p, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let seconds = start.elapsed().as_secs_f64();
        if verbose {
            println!(
                "[{}] {name} ({seconds:.2}s): {detail}",
                if passed { "PASS" } else { "FAIL" }
            );
        }
        results.push(CheckResult {
            name,
            passed,
            detail,
            seconds,
        });
    }
    results
}
