//! Experiment runner: evaluates competing norm routes over a corpus and
//! fills an equivalence report. Measured constants are reported, never
//! asserted.

use opharm_core::bmo::{bmo_norm, carleson_norm, default_poisson_nodes, poisson_bmo_norm};
use opharm_core::companion::{build_companion, EtaSpec, PairMode};
use opharm_core::cone::ConeSpec;
use opharm_core::cubes::{CubeFamily, ShiftPolicy};
use opharm_core::error::{Error, Result};
use opharm_core::field::OperatorField;
use opharm_core::grid::GridSpec;
use opharm_core::hardy::{hardy_norm, HardyMethod, HardyOptions};
use opharm_core::qtorus::{clock_shift_rep, qt_hardy_norm, QtHardyMethod};
use opharm_core::scale::ScaleGrid;
use opharm_core::scalefield::ScaleSpec;
use opharm_core::square::radial_conic_domination_check;
use opharm_core::symbols::RadialSymbol;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::corpus::{gen_corpus, Corpus};
use crate::report::EquivalenceReport;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

fn map_corpus<T: Send, F: Fn(usize) -> Result<T> + Sync + Send>(
    len: usize,
    f: F,
) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    let out: Vec<Result<T>> = (0..len).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    let out: Vec<Result<T>> = (0..len).map(f).collect();
    out.into_iter().collect()
}

fn hardy_methods(cfg: &ExperimentConfig, discrete: bool) -> Vec<HardyMethod> {
    let mut methods = vec![HardyMethod::PoissonRadial];
    for &sym in &cfg.symbols {
        if discrete {
            methods.push(HardyMethod::PhiRadialDiscrete(sym));
            methods.push(HardyMethod::PhiConicDiscrete(sym));
        } else {
            methods.push(HardyMethod::PhiRadial(sym));
            methods.push(HardyMethod::PhiConic(sym));
        }
    }
    if !discrete {
        methods.push(HardyMethod::RieszPoissonK(1.0));
    }
    methods
}

fn run_hardy_equiv(
    cfg: &ExperimentConfig,
    fields: &[OperatorField],
    discrete: bool,
) -> Result<EquivalenceReport> {
    let methods = hardy_methods(cfg, discrete);
    let opts = HardyOptions {
        sgrid: Some(cfg.scale_grid()?),
        levels: None,
        cone: None,
    };
    let norms: Vec<Vec<Vec<f64>>> = map_corpus(fields.len(), |i| {
        let mut per_p = Vec::new();
        for &p in &cfg.p_list {
            let mut per_method = Vec::new();
            for method in &methods {
                per_method.push(hardy_norm(&fields[i], p, *method, &opts)?);
            }
            per_p.push(per_method);
        }
        Ok(per_p)
    })?;
    let mut rep = EquivalenceReport::default();
    let baseline = methods[0].label();
    for (i, per_p) in norms.iter().enumerate() {
        for (pi, &p) in cfg.p_list.iter().enumerate() {
            for (mi, method) in methods.iter().enumerate().skip(1) {
                rep.push(
                    i,
                    p,
                    &method.label(),
                    &baseline,
                    per_p[pi][mi],
                    per_p[pi][0],
                );
            }
        }
    }
    rep.summarize();
    Ok(rep)
}

fn run_carleson(cfg: &ExperimentConfig, fields: &[OperatorField]) -> Result<EquivalenceReport> {
    let grid = GridSpec::new(cfg.d, cfg.n_axis)?;
    let radii = grid.frequency_radii(cfg.n_axis as f64 / 2.0);
    let sgrid = ScaleGrid::default_for_reproducing(cfg.n_axis);
    let sym = cfg
        .symbols
        .first()
        .copied()
        .unwrap_or(RadialSymbol::DPoisson);
    let pair = build_companion(
        sym,
        PairMode::Continuous,
        EtaSpec::default(),
        &radii,
        &sgrid,
    )?;
    let max_level = cfg.n_axis.ilog2().min(5);
    let family = CubeFamily::new(grid, max_level, ShiftPolicy::None)?;
    let results: Vec<(f64, f64)> = map_corpus(fields.len(), |i| {
        let c = carleson_norm(&fields[i], &pair, &family, &sgrid, f64::INFINITY)?.sup_norm;
        let b = bmo_norm(&fields[i], &family, f64::INFINITY)?;
        Ok((c, b))
    })?;
    let mut rep = EquivalenceReport::default();
    for (i, &(c, b)) in results.iter().enumerate() {
        rep.push(
            i,
            f64::INFINITY,
            &format!("carleson:{}", sym.label()),
            "bmo_oscillation_sq",
            c,
            b * b,
        );
    }
    rep.summarize();
    Ok(rep)
}

fn run_bmo_poisson(cfg: &ExperimentConfig, fields: &[OperatorField]) -> Result<EquivalenceReport> {
    let grid = GridSpec::new(cfg.d, cfg.n_axis)?;
    let max_level = cfg.n_axis.ilog2().min(5);
    let family = CubeFamily::new(grid, max_level, ShiftPolicy::HalfCell)?;
    let nodes = default_poisson_nodes();
    let results: Vec<(f64, f64)> = map_corpus(fields.len(), |i| {
        Ok((
            poisson_bmo_norm(&fields[i], &nodes)?,
            bmo_norm(&fields[i], &family, f64::INFINITY)?,
        ))
    })?;
    let mut rep = EquivalenceReport::default();
    for (i, &(a, b)) in results.iter().enumerate() {
        rep.push(i, f64::INFINITY, "poisson_bmo", "cube_bmo", a, b);
    }
    rep.summarize();
    Ok(rep)
}

fn run_radial_conic(cfg: &ExperimentConfig, fields: &[OperatorField]) -> Result<EquivalenceReport> {
    let sym = cfg
        .symbols
        .first()
        .copied()
        .unwrap_or(RadialSymbol::DPoisson);
    let spec = ScaleSpec::Log(cfg.scale_grid()?);
    let cone = ConeSpec::default();
    let results: Vec<f64> = map_corpus(fields.len(), |i| {
        let r = radial_conic_domination_check(&fields[i], sym, &spec, &cone)?;
        if !r.finite {
            return Err(Error::Accuracy(format!(
                "infinite domination constant at item {i}"
            )));
        }
        Ok(r.max_constant)
    })?;
    let mut rep = EquivalenceReport::default();
    for (i, &c) in results.iter().enumerate() {
        rep.push(
            i,
            f64::INFINITY,
            &format!("radial_sq:{}", sym.label()),
            "conic_derivative_family_sq",
            c,
            1.0,
        );
    }
    rep.summarize();
    Ok(rep)
}

fn run_qt_hardy(cfg: &ExperimentConfig, items: &Corpus) -> Result<EquivalenceReport> {
    let Corpus::Quantum(elements) = items else {
        return Err(Error::Domain("qt_hardy needs a quantum corpus".into()));
    };
    let (p_num, q_den) = cfg
        .theta
        .ok_or_else(|| Error::Domain("theta required".into()))?;
    let theta = opharm_core::qtorus::Theta::rational_2d(p_num, q_den)?;
    let rep_mat = clock_shift_rep(&theta)?;
    let grid = GridSpec::new(2, cfg.n_axis)?;
    let sgrid = cfg.scale_grid()?;
    let sym = cfg
        .symbols
        .first()
        .copied()
        .unwrap_or(RadialSymbol::DPoisson);
    let methods = [
        QtHardyMethod::PoissonRadial,
        QtHardyMethod::PhiRadial(sym),
        QtHardyMethod::PhiRadialDiscrete(RadialSymbol::AnnulusBump),
    ];
    let norms: Vec<Vec<Vec<f64>>> = map_corpus(elements.len(), |i| {
        let mut per_p = Vec::new();
        for &p in &cfg.p_list {
            let mut per_m = Vec::new();
            for m in &methods {
                per_m.push(qt_hardy_norm(
                    &elements[i],
                    p,
                    *m,
                    grid,
                    &rep_mat,
                    Some(&sgrid),
                )?);
            }
            per_p.push(per_m);
        }
        Ok(per_p)
    })?;
    let mut rep = EquivalenceReport::default();
    for (i, per_p) in norms.iter().enumerate() {
        for (pi, &p) in cfg.p_list.iter().enumerate() {
            for (mi, m) in methods.iter().enumerate().skip(1) {
                rep.push(
                    i,
                    p,
                    &m.label(),
                    &methods[0].label(),
                    per_p[pi][mi],
                    per_p[pi][0],
                );
            }
        }
    }
    rep.summarize();
    Ok(rep)
}

/// Runs the configured experiment over a freshly generated corpus.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EquivalenceReport> {
    cfg.validate()?;
    let corpus = gen_corpus(cfg)?;
    run_experiment_on(cfg, &corpus)
}

/// Runs the configured experiment over a caller-supplied corpus (used for
/// the scaling and adjoint invariance checks).
pub fn run_experiment_on(cfg: &ExperimentConfig, corpus: &Corpus) -> Result<EquivalenceReport> {
    match (cfg.kind, corpus) {
        (ExperimentKind::HardyEquiv, Corpus::Fields(f)) => run_hardy_equiv(cfg, f, false),
        (ExperimentKind::HardyEquivDiscrete, Corpus::Fields(f)) => run_hardy_equiv(cfg, f, true),
        (ExperimentKind::Carleson, Corpus::Fields(f)) => run_carleson(cfg, f),
        (ExperimentKind::BmoPoisson, Corpus::Fields(f)) => run_bmo_poisson(cfg, f),
        (ExperimentKind::RadialConic, Corpus::Fields(f)) => run_radial_conic(cfg, f),
        (ExperimentKind::QtHardy, q @ Corpus::Quantum(_)) => run_qt_hardy(cfg, q),
        _ => Err(Error::Domain(
            "corpus type does not match the experiment kind".into(),
        )),
    }
}
