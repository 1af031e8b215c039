//! Deterministic corpus generation: random band-limited fields (or quantum
//! torus elements) plus two structured exemplars per corpus.

use num_complex::Complex;
use opharm_core::error::{Error, Result};
use opharm_core::field::{fft_inverse, OperatorField, SpectrumField};
use opharm_core::grid::GridSpec;
use opharm_core::qtorus::{QTElement, Theta};
use opharm_core::{MatrixValue, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone)]
pub enum Corpus {
    Fields(Vec<OperatorField>),
    Quantum(Vec<QTElement>),
}

impl Corpus {
    pub fn len(&self) -> usize {
        match self {
            Corpus::Fields(v) => v.len(),
            Corpus::Quantum(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scales every item by a real factor.
    pub fn scaled(&self, lambda: f64) -> Corpus {
        let z = C64::new(lambda, 0.0);
        match self {
            Corpus::Fields(v) => Corpus::Fields(v.iter().map(|f| f.scaled(z)).collect()),
            Corpus::Quantum(v) => Corpus::Quantum(v.iter().map(|x| x.scaled(z)).collect()),
        }
    }

    /// Pointwise adjoints of every item.
    pub fn adjoint(&self) -> Corpus {
        match self {
            Corpus::Fields(v) => Corpus::Fields(v.iter().map(|f| f.adjoint()).collect()),
            Corpus::Quantum(v) => {
                Corpus::Quantum(v.iter().map(opharm_core::qtorus::qt_adjoint).collect())
            }
        }
    }
}

/// Standard complex Gaussian via Box-Muller; E|z|² = 1.
pub fn randn_c64<R: Rng>(rng: &mut R) -> C64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    Complex::new(
        r * (std::f64::consts::TAU * u2).cos(),
        r * (std::f64::consts::TAU * u2).sin(),
    ) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> MatrixValue {
    MatrixValue::from_fn(n, n, |_, _| randn_c64(rng))
}

fn band_freqs(grid: GridSpec, band: usize) -> Vec<[i64; 3]> {
    (0..grid.num_points())
        .map(|i| grid.freq(i))
        .filter(|m| grid.freq_band(m) <= band)
        .collect()
}

fn random_field(
    rng: &mut ChaCha8Rng,
    grid: GridSpec,
    n: usize,
    band: usize,
    zero_mean: bool,
    hermitian: bool,
) -> Result<OperatorField> {
    let freqs = band_freqs(grid, band);
    let mut modes: Vec<([i64; 3], MatrixValue)> =
        freqs.iter().map(|&m| (m, random_matrix(rng, n))).collect();
    if hermitian {
        // f(s) = f(s)* pointwise iff coefficients satisfy c(-m) = c(m)*
        let spec = SpectrumField::from_modes(grid, n, &modes)?;
        modes = freqs
            .iter()
            .map(|&m| {
                let neg = [-m[0], -m[1], -m[2]];
                let sym = (spec.coeff(&m[..grid.d()]) + spec.coeff(&neg[..grid.d()]).adjoint())
                    * C64::new(0.5, 0.0);
                (m, sym)
            })
            .collect();
    }
    if zero_mean {
        modes.retain(|(m, _)| m.iter().any(|&x| x != 0));
    }
    Ok(fft_inverse(&SpectrumField::from_modes(grid, n, &modes)?))
}

/// Lacunary exemplar: identity coefficients on the modes (2^j, 0, ...) that
/// fit inside the band.
fn lacunary_field(grid: GridSpec, n: usize, band: usize) -> Result<OperatorField> {
    let mut modes = Vec::new();
    let mut j = 0u32;
    while 2i64.pow(j) <= band.max(1) as i64 {
        modes.push(([2i64.pow(j), 0, 0], opharm_core::matrix::identity(n)));
        j += 1;
    }
    Ok(fft_inverse(&SpectrumField::from_modes(grid, n, &modes)?))
}

fn single_mode_field(
    rng: &mut ChaCha8Rng,
    grid: GridSpec,
    n: usize,
    band: usize,
) -> Result<OperatorField> {
    let m = [(band.max(2) / 2) as i64, 0, 0];
    Ok(fft_inverse(&SpectrumField::from_modes(
        grid,
        n,
        &[(m, random_matrix(rng, n))],
    )?))
}

fn quantum_corpus(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> Result<Vec<QTElement>> {
    let (p, q) = cfg
        .theta
        .ok_or_else(|| Error::Domain("quantum corpus needs theta".into()))?;
    let theta = Theta::rational_2d(p, q)?;
    let band = cfg.band_m as i64;
    let mut items = Vec::with_capacity(cfg.corpus_size);
    // lacunary exemplar
    let mut lac = Vec::new();
    let mut j = 0u32;
    while 2i64.pow(j) <= band.max(1) {
        lac.push(([2i64.pow(j), 0, 0], C64::new(1.0, 0.0)));
        j += 1;
    }
    items.push(QTElement::from_coeffs(theta.clone(), &lac));
    // single mode
    items.push(QTElement::monomial(
        theta.clone(),
        [band.max(2) / 2, 1, 0],
        randn_c64(rng),
    ));
    while items.len() < cfg.corpus_size {
        let mut coeffs = Vec::new();
        for m1 in -band..=band {
            for m2 in -band..=band {
                if cfg.zero_mean && m1 == 0 && m2 == 0 {
                    continue;
                }
                coeffs.push(([m1, m2, 0], randn_c64(rng)));
            }
        }
        let mut x = QTElement::from_coeffs(theta.clone(), &coeffs);
        if cfg.hermitian {
            // self-adjoint part (x + x*) / 2
            x = x
                .add(&opharm_core::qtorus::qt_adjoint(&x))
                .expect("same twist")
                .scaled(C64::new(0.5, 0.0));
        }
        items.push(x);
    }
    items.truncate(cfg.corpus_size);
    Ok(items)
}

/// Deterministic corpus for a configuration: same seed, same bytes.
pub fn gen_corpus(cfg: &ExperimentConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if cfg.kind == ExperimentKind::QtHardy {
        return Ok(Corpus::Quantum(quantum_corpus(cfg, &mut rng)?));
    }
    let grid = GridSpec::new(cfg.d, cfg.n_axis)?;
    let mut fields = Vec::with_capacity(cfg.corpus_size);
    fields.push(lacunary_field(grid, cfg.n, cfg.band_m)?);
    fields.push(single_mode_field(&mut rng, grid, cfg.n, cfg.band_m)?);
    while fields.len() < cfg.corpus_size {
        fields.push(random_field(
            &mut rng,
            grid,
            cfg.n,
            cfg.band_m,
            cfg.zero_mean,
            cfg.hermitian,
        )?);
    }
    fields.truncate(cfg.corpus_size);
    Ok(Corpus::Fields(fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use opharm_core::field::fft_forward;
    use opharm_core::matrix::max_abs;

    fn base_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk_default(ExperimentKind::HardyEquiv, 11);
        cfg.corpus_size = 8;
        cfg
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = base_cfg();
        let (a, b) = (gen_corpus(&cfg).unwrap(), gen_corpus(&cfg).unwrap());
        let (Corpus::Fields(a), Corpus::Fields(b)) = (a, b) else {
            panic!()
        };
        for (fa, fb) in a.iter().zip(&b) {
            for s in 0..fa.grid().num_points() {
                assert_eq!(fa.value(s), fb.value(s));
            }
        }
    }

    #[test]
    fn zero_mean_flag_is_exact() {
        let mut cfg = base_cfg();
        cfg.zero_mean = true;
        let Corpus::Fields(fields) = gen_corpus(&cfg).unwrap() else {
            panic!()
        };
        // structured exemplars may carry means; random items must not
        for f in &fields[2..] {
            assert!(max_abs(fft_forward(f).mean()) < 1e-13);
        }
    }

    #[test]
    fn hermitian_flag_gives_hermitian_fields() {
        let mut cfg = base_cfg();
        cfg.hermitian = true;
        cfg.zero_mean = false;
        let Corpus::Fields(fields) = gen_corpus(&cfg).unwrap() else {
            panic!()
        };
        for f in &fields[2..] {
            for s in 0..f.grid().num_points() {
                assert!(opharm_core::matrix::hermitian_violation(f.value(s)) < 1e-10);
            }
        }
    }

    #[test]
    fn coefficient_power_within_gaussian_model() {
        // mean |z|^2 over all random coefficients is 1 within 3 sigma
        let mut cfg = base_cfg();
        cfg.corpus_size = 30;
        cfg.zero_mean = false;
        let Corpus::Fields(fields) = gen_corpus(&cfg).unwrap() else {
            panic!()
        };
        let mut acc = 0.0;
        let mut count = 0usize;
        for f in &fields[2..] {
            let spec = fft_forward(f);
            let grid = f.grid();
            for (idx, c) in spec.coeffs().iter().enumerate() {
                if grid.freq_band(&grid.freq(idx)) > cfg.band_m {
                    continue;
                }
                for z in c.iter() {
                    acc += z.norm_sqr();
                    count += 1;
                }
            }
        }
        let mean = acc / count as f64;
        // var(|z|^2) = 1 for complex Gaussian with E|z|^2 = 1
        let sigma = 1.0 / (count as f64).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * sigma,
            "mean power {mean}, 3σ = {}",
            3.0 * sigma
        );
    }

    #[test]
    fn quantum_corpus_deterministic() {
        let mut cfg = ExperimentConfig::desk_default(ExperimentKind::QtHardy, 3);
        cfg.corpus_size = 5;
        let (Corpus::Quantum(a), Corpus::Quantum(b)) =
            (gen_corpus(&cfg).unwrap(), gen_corpus(&cfg).unwrap())
        else {
            panic!()
        };
        for (xa, xb) in a.iter().zip(&b) {
            assert_eq!(xa.coeffs(), xb.coeffs());
        }
    }
}
