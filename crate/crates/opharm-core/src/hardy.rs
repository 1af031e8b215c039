//! Composite Hardy-norm evaluator: ||f̂(0)||_p plus the L_p norm of a
//! square function, for every shipped square-function route.

use serde::{Deserialize, Serialize};

use crate::cone::ConeSpec;
use crate::error::{Error, Result};
use crate::field::{fft_forward, lp_field_norm, OperatorField};
use crate::matrix::schatten_norm;
use crate::scale::{DyadicLevels, ScaleGrid};
use crate::scalefield::{PoissonRadialDeriv, ScaleMultiplier, ScaleSpec};
use crate::square::{square_fn_of_field, SquareKind};
use crate::symbols::RadialSymbol;

/// Square-function route used by [`hardy_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "param", rename_all = "snake_case")]
pub enum HardyMethod {
    /// Radial derivative of the circular Poisson kernel on the r-grid
    /// mapped from ε nodes by r = e^{-2πε}, exact-Jacobian weights.
    PoissonRadial,
    /// Same kernel, conic aggregation over the aperture-2 Stoltz cone.
    PoissonConic,
    PhiRadial(RadialSymbol),
    PhiConic(RadialSymbol),
    PhiRadialDiscrete(RadialSymbol),
    PhiConicDiscrete(RadialSymbol),
    /// Radial route with the Riesz-of-Poisson symbol of order α.
    RieszPoissonK(f64),
}

impl HardyMethod {
    pub fn label(&self) -> String {
        match self {
            HardyMethod::PoissonRadial => "poisson_radial".into(),
            HardyMethod::PoissonConic => "poisson_conic".into(),
            HardyMethod::PhiRadial(s) => format!("phi_radial:{}", s.label()),
            HardyMethod::PhiConic(s) => format!("phi_conic:{}", s.label()),
            HardyMethod::PhiRadialDiscrete(s) => format!("phi_radial_discrete:{}", s.label()),
            HardyMethod::PhiConicDiscrete(s) => format!("phi_conic_discrete:{}", s.label()),
            HardyMethod::RieszPoissonK(a) => format!("riesz_poisson_k:{a}"),
        }
    }

    fn kind(&self) -> SquareKind {
        match self {
            HardyMethod::PoissonRadial
            | HardyMethod::PhiRadial(_)
            | HardyMethod::RieszPoissonK(_) => SquareKind::Radial,
            HardyMethod::PoissonConic | HardyMethod::PhiConic(_) => SquareKind::Conic,
            HardyMethod::PhiRadialDiscrete(_) => SquareKind::RadialDiscrete,
            HardyMethod::PhiConicDiscrete(_) => SquareKind::ConicDiscrete,
        }
    }

    fn multiplier(&self) -> Result<Box<dyn ScaleMultiplier>> {
        let sym = match self {
            HardyMethod::PoissonRadial | HardyMethod::PoissonConic => {
                return Ok(Box::new(PoissonRadialDeriv))
            }
            HardyMethod::PhiRadial(s)
            | HardyMethod::PhiConic(s)
            | HardyMethod::PhiRadialDiscrete(s)
            | HardyMethod::PhiConicDiscrete(s) => *s,
            HardyMethod::RieszPoissonK(a) => {
                if *a <= 0.0 {
                    return Err(Error::Domain("Riesz order must be positive".into()));
                }
                RadialSymbol::RieszPoisson(*a)
            }
        };
        if !sym.vanishing_mean() {
            return Err(Error::Degenerate(format!(
                "{} does not have vanishing mean",
                sym.label()
            )));
        }
        Ok(Box::new(sym))
    }
}

/// Scale-axis and cone options; `None` fields pick the defaults for the
/// field at hand.
#[derive(Debug, Clone, Default)]
pub struct HardyOptions {
    pub sgrid: Option<ScaleGrid>,
    pub levels: Option<DyadicLevels>,
    pub cone: Option<ConeSpec>,
}

/// ||f̂(0)||_p + ||square function||_p for the chosen route.
pub fn hardy_norm(
    f: &OperatorField,
    p: f64,
    method: HardyMethod,
    opts: &HardyOptions,
) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Domain(format!("Hardy norm needs p >= 1, got {p}")));
    }
    let spectrum = fft_forward(f);
    spectrum.check_band()?;
    let zero_term = schatten_norm(spectrum.mean(), p)?;

    let kind = method.kind();
    let spec = if kind.is_discrete() {
        ScaleSpec::Dyadic(
            opts.levels
                .unwrap_or_else(|| DyadicLevels::default_for_grid(f.grid().n_axis())),
        )
    } else {
        ScaleSpec::Log(match &opts.sgrid {
            Some(g) => g.clone(),
            None => ScaleGrid::default_for_hardy(spectrum.band()),
        })
    };
    let cone = match method {
        // Stoltz aperture 2 for the torus Poisson cone
        HardyMethod::PoissonConic => {
            let mut c = opts.cone.unwrap_or_default();
            c.stoltz = true;
            c
        }
        _ => opts.cone.unwrap_or_default(),
    };
    let mult = method.multiplier()?;
    let sq = square_fn_of_field(f, mult.as_ref(), &spec, kind, &cone)?;
    Ok(zero_term + lp_field_norm(&sq, p)?)
}
