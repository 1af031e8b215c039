//! The twisted Fourier algebra of the quantum torus: symbolic elements,
//! clock-and-shift matrix representations for rational twists in d = 2,
//! the transference embedding into matrix fields, the circular Poisson
//! semigroup and the quantum Hardy norms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cone::ConeSpec;
use crate::error::{Error, Result};
use crate::field::{fft_forward, fft_inverse, lp_field_norm, OperatorField, SpectrumField};
use crate::grid::GridSpec;
use crate::matrix::{self, max_abs};
use crate::scale::{DyadicLevels, ScaleGrid};
use crate::scalefield::{PoissonRadialDeriv, ScaleMultiplier, ScaleSpec};
use crate::square::{square_fn_of_field, SquareKind};
use crate::symbols::RadialSymbol;
use crate::{MatrixValue, C64};

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Real skew-symmetric twist matrix; entries below the diagonal determine
/// everything. Rational entries carry exact (p, q) descriptors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    d: usize,
    /// row-major d×d entries, θ_kj = -θ_jk
    entries: Vec<f64>,
    /// exact fraction for θ_21 when rational (d = 2)
    rational_21: Option<(i64, i64)>,
}

impl Theta {
    pub fn zero(d: usize) -> Self {
        let rational_21 = if d == 2 { Some((0, 1)) } else { None };
        Theta {
            d,
            entries: vec![0.0; d * d],
            rational_21,
        }
    }

    /// d = 2 twist with θ_21 = p/q (reduced on construction).
    pub fn rational_2d(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = gcd(p, q).max(1);
        let (p, q) = (p / g * q.signum(), q / g * q.signum());
        let t = p as f64 / q as f64;
        // row-major [ [0, -t], [t, 0] ]: θ_21 = t
        Ok(Theta {
            d: 2,
            entries: vec![0.0, -t, t, 0.0],
            rational_21: Some((p, q)),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, k: usize, j: usize) -> f64 {
        self.entries[k * self.d + j]
    }

    pub fn rational_21(&self) -> Option<(i64, i64)> {
        self.rational_21
    }

    /// Phase Σ_{k>j} θ_kj a_k b_j entering the normal-ordering rules.
    fn ordering_form(&self, a: &[i64; 3], b: &[i64; 3]) -> f64 {
        let mut acc = 0.0;
        for k in 1..self.d {
            for j in 0..k {
                acc += self.entry(k, j) * a[k] as f64 * b[j] as f64;
            }
        }
        acc
    }
}

/// Finitely supported twisted Fourier series Σ α_m U^m.
#[derive(Debug, Clone, PartialEq)]
pub struct QTElement {
    theta: Theta,
    coeffs: BTreeMap<[i64; 3], C64>,
}

const COEFF_EPS: f64 = 0.0;

impl QTElement {
    pub fn zero(theta: Theta) -> Self {
        QTElement {
            theta,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(theta: Theta) -> Self {
        Self::monomial(theta, [0, 0, 0], C64::new(1.0, 0.0))
    }

    /// α U^m.
    pub fn monomial(theta: Theta, m: [i64; 3], alpha: C64) -> Self {
        let mut coeffs = BTreeMap::new();
        if alpha.norm() > COEFF_EPS {
            coeffs.insert(m, alpha);
        }
        QTElement { theta, coeffs }
    }

    pub fn from_coeffs(theta: Theta, list: &[([i64; 3], C64)]) -> Self {
        let mut out = Self::zero(theta);
        for &(m, a) in list {
            out.add_term(m, a);
        }
        out
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn coeffs(&self) -> &BTreeMap<[i64; 3], C64> {
        &self.coeffs
    }

    pub fn coeff(&self, m: &[i64; 3]) -> C64 {
        self.coeffs.get(m).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Largest |m_i| over the support.
    pub fn support_band(&self) -> usize {
        self.coeffs
            .keys()
            .map(|m| m.iter().map(|x| x.unsigned_abs() as usize).max().unwrap())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, m: [i64; 3], a: C64) {
        let slot = self.coeffs.entry(m).or_insert(C64::new(0.0, 0.0));
        *slot += a;
        if slot.norm() <= COEFF_EPS {
            self.coeffs.remove(&m);
        }
    }

    pub fn add(&self, other: &QTElement) -> Result<QTElement> {
        if self.theta != other.theta {
            return Err(Error::Domain("twist matrices differ".into()));
        }
        let mut out = self.clone();
        for (&m, &a) in &other.coeffs {
            out.add_term(m, a);
        }
        Ok(out)
    }

    pub fn scaled(&self, lambda: C64) -> QTElement {
        let coeffs = self.coeffs.iter().map(|(&m, &a)| (m, a * lambda)).collect();
        QTElement {
            theta: self.theta.clone(),
            coeffs,
        }
    }

    /// ℓ² norm of the coefficients, the normalized-trace L₂ norm.
    pub fn coeff_l2(&self) -> f64 {
        self.coeffs
            .values()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Product with the normal-ordering phase
/// U^m U^n = exp(2πi Σ_{k>j} θ_kj m_k n_j) U^{m+n}.
///
/// The phase is derived by moving each U_j^{n_j} left through the higher
/// generators of U^m and is certified against the clock-and-shift matrix
/// product in the tests.
pub fn qt_mul(x: &QTElement, y: &QTElement) -> Result<QTElement> {
    if x.theta != y.theta {
        return Err(Error::Domain("twist matrices differ".into()));
    }
    let mut out = QTElement::zero(x.theta.clone());
    for (&m, &a) in &x.coeffs {
        for (&n, &b) in &y.coeffs {
            let phase = std::f64::consts::TAU * x.theta.ordering_form(&m, &n);
            let lambda = C64::from_polar(1.0, phase);
            let sum = [m[0] + n[0], m[1] + n[1], m[2] + n[2]];
            out.add_term(sum, a * b * lambda);
        }
    }
    Ok(out)
}

/// Adjoint: (Σ α_m U^m)* = Σ conj(α_m) μ(m) U^{-m} with
/// μ(m) = exp(2πi Σ_{k>j} θ_kj m_k m_j), the reversal phase of the
/// normal ordering.
pub fn qt_adjoint(x: &QTElement) -> QTElement {
    let mut out = QTElement::zero(x.theta.clone());
    for (&m, &a) in &x.coeffs {
        let phase = std::f64::consts::TAU * x.theta.ordering_form(&m, &m);
        let mu = C64::from_polar(1.0, phase);
        out.add_term([-m[0], -m[1], -m[2]], a.conj() * mu);
    }
    out
}

/// The tracial state: τ(x) = α_0.
pub fn qt_trace(x: &QTElement) -> C64 {
    x.coeff(&[0, 0, 0])
}

/// Fourier coefficient x̂(m) = τ((U^m)* x).
pub fn qt_fourier(x: &QTElement, m: [i64; 3]) -> C64 {
    let um = QTElement::monomial(x.theta.clone(), m, C64::new(1.0, 0.0));
    qt_trace(&qt_mul(&qt_adjoint(&um), x).expect("same twist"))
}

/// Circular Poisson semigroup: coefficientwise r^{|m|}, Euclidean |m|.
pub fn qt_poisson(x: &QTElement, r: f64) -> Result<QTElement> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!(
            "Poisson parameter must be in [0,1), got {r}"
        )));
    }
    let d = x.theta.d();
    let coeffs = x
        .coeffs
        .iter()
        .filter_map(|(&m, &a)| {
            let norm = (0..d).map(|i| (m[i] * m[i]) as f64).sum::<f64>().sqrt();
            let factor = if r == 0.0 {
                if norm == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                r.powf(norm)
            };
            let v = a * factor;
            (v.norm() > COEFF_EPS).then_some((m, v))
        })
        .collect();
    Ok(QTElement {
        theta: x.theta.clone(),
        coeffs,
    })
}

/// Coefficient multiplier |m| r^{|m|-1}, the r-derivative of the Poisson
/// semigroup.
pub fn qt_poisson_deriv(x: &QTElement, r: f64) -> Result<QTElement> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!(
            "Poisson parameter must be in [0,1), got {r}"
        )));
    }
    let d = x.theta.d();
    let coeffs = x
        .coeffs
        .iter()
        .filter_map(|(&m, &a)| {
            let norm = (0..d).map(|i| (m[i] * m[i]) as f64).sum::<f64>().sqrt();
            if norm == 0.0 {
                return None;
            }
            Some((m, a * (norm * r.powf(norm - 1.0))))
        })
        .collect();
    Ok(QTElement {
        theta: x.theta.clone(),
        coeffs,
    })
}

/// Clock and shift unitaries for θ_21 = p/q: U1 = diag(1, ω, …, ω^{q-1}),
/// U2 the cyclic shift with U2 U1 = e^{2πi p/q} U1 U2.
#[derive(Debug, Clone)]
pub struct ClockShiftRep {
    q: usize,
    u1: MatrixValue,
    u2: MatrixValue,
}

impl ClockShiftRep {
    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn u1(&self) -> &MatrixValue {
        &self.u1
    }

    pub fn u2(&self) -> &MatrixValue {
        &self.u2
    }

    /// rep(U^m) = U1^{m_1} U2^{m_2}; powers reduce mod q exactly.
    pub fn monomial(&self, m: &[i64; 3]) -> MatrixValue {
        let q = self.q as i64;
        let p1 = m[0].rem_euclid(q) as usize;
        let p2 = m[1].rem_euclid(q) as usize;
        let mut out = matrix::identity(self.q);
        for _ in 0..p1 {
            out = &out * &self.u1;
        }
        for _ in 0..p2 {
            out = &out * &self.u2;
        }
        out
    }

    /// rep extended linearly to a whole element.
    pub fn element(&self, x: &QTElement) -> MatrixValue {
        let mut acc = matrix::zero(self.q);
        for (m, &a) in x.coeffs() {
            acc += self.monomial(m) * a;
        }
        acc
    }

    /// Worst deviation of U2 U1 - e^{2πi θ} U1 U2 from zero.
    pub fn commutation_residual(&self, theta_21: f64) -> f64 {
        let lhs = &self.u2 * &self.u1;
        let rhs = (&self.u1 * &self.u2) * C64::from_polar(1.0, std::f64::consts::TAU * theta_21);
        max_abs(&(lhs - rhs))
    }
}

/// Builds the q×q clock-and-shift representation for a rational d = 2
/// twist.
pub fn clock_shift_rep(theta: &Theta) -> Result<ClockShiftRep> {
    if theta.d() != 2 {
        return Err(Error::Unsupported(format!(
            "matrix representations need d = 2, got d = {}",
            theta.d()
        )));
    }
    let Some((p, q)) = theta.rational_21() else {
        return Err(Error::Unsupported(
            "irrational twist has no finite representation".into(),
        ));
    };
    let q = q.unsigned_abs() as usize;
    let omega = std::f64::consts::TAU * p as f64 / q as f64;
    let u1 = MatrixValue::from_fn(q, q, |i, j| {
        if i == j {
            C64::from_polar(1.0, omega * i as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // U2 e_j = e_{j-1 mod q} so that U2 U1 = e^{2πi p/q} U1 U2
    let u2 = MatrixValue::from_fn(q, q, |i, j| {
        if j == (i + 1) % q {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(ClockShiftRep { q, u1, u2 })
}

/// Transference: the matrix field z ↦ Σ α_m z^m rep(U^m) sampled on the
/// lattice.
pub fn qt_transfer(x: &QTElement, grid: GridSpec, rep: &ClockShiftRep) -> Result<OperatorField> {
    if grid.d() != 2 {
        return Err(Error::Domain("transference needs a d = 2 grid".into()));
    }
    let band = x.support_band();
    if band >= grid.n_axis() / 2 {
        return Err(Error::Band {
            band,
            limit: grid.n_axis() / 2,
        });
    }
    let modes: Vec<([i64; 3], MatrixValue)> = x
        .coeffs()
        .iter()
        .map(|(&m, &a)| (m, rep.monomial(&m) * a))
        .collect();
    Ok(fft_inverse(&SpectrumField::from_modes(
        grid,
        rep.dim(),
        &modes,
    )?))
}

/// Mode-wise compression back onto the transferred subalgebra:
/// each Fourier coefficient is projected onto the line C·rep(U^m).
///
/// This is the conditional expectation onto the transferred subalgebra,
/// computed through lattice quadrature in w; idempotent and a contraction
/// in every computed p-norm.
pub fn qt_cond_expectation(f: &OperatorField, rep: &ClockShiftRep) -> Result<OperatorField> {
    if f.n() != rep.dim() {
        return Err(Error::Shape(format!(
            "field size {} does not match the representation dimension {}",
            f.n(),
            rep.dim()
        )));
    }
    let spectrum = fft_forward(f);
    let grid = f.grid();
    let q = rep.dim() as f64;
    let coeffs: Vec<MatrixValue> = (0..grid.num_points())
        .map(|idx| {
            let m = grid.freq(idx);
            let basis = rep.monomial(&m);
            // component along rep(U^m): tr(rep(U^m)* F̂(m)) / q
            let inner: C64 = (basis.adjoint() * &spectrum.coeffs()[idx]).trace();
            basis * (inner / q)
        })
        .collect();
    Ok(fft_inverse(&SpectrumField::new(grid, f.n(), coeffs)?))
}

/// Extracts the symbolic element from a transferred field.
pub fn qt_untransfer(f: &OperatorField, rep: &ClockShiftRep, theta: &Theta) -> Result<QTElement> {
    if f.n() != rep.dim() {
        return Err(Error::Shape(
            "field size does not match the representation".into(),
        ));
    }
    let spectrum = fft_forward(f);
    let grid = f.grid();
    let q = rep.dim() as f64;
    let mut out = QTElement::zero(theta.clone());
    for idx in 0..grid.num_points() {
        let m = grid.freq(idx);
        let basis = rep.monomial(&m);
        let inner: C64 = (basis.adjoint() * &spectrum.coeffs()[idx]).trace();
        let alpha = inner / q;
        if alpha.norm() > 1e-15 {
            out.add_term(m, alpha);
        }
    }
    Ok(out)
}

/// L_p norm of x through transference (unnormalized matrix trace on the
/// rep side; the p = 2 bridge constant is sqrt(q)).
pub fn qt_lp_norm(x: &QTElement, p: f64, grid: GridSpec, rep: &ClockShiftRep) -> Result<f64> {
    lp_field_norm(&qt_transfer(x, grid, rep)?, p)
}

/// Square-function route for the quantum Hardy norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "param", rename_all = "snake_case")]
pub enum QtHardyMethod {
    PoissonRadial,
    PhiRadial(RadialSymbol),
    PhiRadialDiscrete(RadialSymbol),
    /// Lusin analogue defined through transference of the commutative conic
    /// square function; an extension beyond the radial routes.
    PhiConicTransferred(RadialSymbol),
}

impl QtHardyMethod {
    pub fn label(&self) -> String {
        match self {
            QtHardyMethod::PoissonRadial => "poisson_radial".into(),
            QtHardyMethod::PhiRadial(s) => format!("phi_radial:{}", s.label()),
            QtHardyMethod::PhiRadialDiscrete(s) => format!("phi_radial_discrete:{}", s.label()),
            QtHardyMethod::PhiConicTransferred(s) => format!("phi_conic:{}", s.label()),
        }
    }
}

/// |x̂(0)| + ‖s^c(x)‖_{L_p}: the square function is computed on the
/// transferred field, scale node by scale node.
pub fn qt_hardy_norm(
    x: &QTElement,
    p: f64,
    method: QtHardyMethod,
    grid: GridSpec,
    rep: &ClockShiftRep,
    sgrid: Option<&ScaleGrid>,
) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Domain(format!("Hardy norm needs p >= 1, got {p}")));
    }
    let transferred = qt_transfer(x, grid, rep)?;
    let (mult, spec, kind): (Box<dyn ScaleMultiplier>, ScaleSpec, SquareKind) = match method {
        QtHardyMethod::PoissonRadial => (
            Box::new(PoissonRadialDeriv),
            ScaleSpec::Log(match sgrid {
                Some(g) => g.clone(),
                None => ScaleGrid::default_for_hardy(x.support_band()),
            }),
            SquareKind::Radial,
        ),
        QtHardyMethod::PhiRadial(s) => (
            Box::new(s),
            ScaleSpec::Log(match sgrid {
                Some(g) => g.clone(),
                None => ScaleGrid::default_for_hardy(x.support_band()),
            }),
            SquareKind::Radial,
        ),
        QtHardyMethod::PhiRadialDiscrete(s) => (
            Box::new(s),
            ScaleSpec::Dyadic(DyadicLevels::default_for_grid(grid.n_axis())),
            SquareKind::RadialDiscrete,
        ),
        QtHardyMethod::PhiConicTransferred(s) => (
            Box::new(s),
            ScaleSpec::Log(match sgrid {
                Some(g) => g.clone(),
                None => ScaleGrid::default_for_hardy(x.support_band()),
            }),
            SquareKind::Conic,
        ),
    };
    if let QtHardyMethod::PhiRadial(s)
    | QtHardyMethod::PhiRadialDiscrete(s)
    | QtHardyMethod::PhiConicTransferred(s) = method
    {
        if !s.vanishing_mean() {
            return Err(Error::Degenerate(format!(
                "{} does not have vanishing mean",
                s.label()
            )));
        }
        // torus-mode nondegeneracy on the support radii
        let radii: Vec<f64> = (1..=x.support_band().max(1)).map(|k| k as f64).collect();
        let nd = crate::symbols::check_nondegenerate(
            &s,
            crate::symbols::NondegeneracyMode::Torus,
            &radii,
        );
        if !nd.passed {
            return Err(Error::Degenerate(format!(
                "{} fails torus nondegeneracy on the support",
                s.label()
            )));
        }
    }
    let sq = square_fn_of_field(
        &transferred,
        mult.as_ref(),
        &spec,
        kind,
        &ConeSpec::default(),
    )?;
    Ok(qt_trace(x).norm() + lp_field_norm(&sq, p)?)
}

/// Residual of rep(x y) - rep(x) rep(y) over random support windows; the
/// release gate for the normal-ordering phases.
pub fn rep_product_residual(x: &QTElement, y: &QTElement, rep: &ClockShiftRep) -> Result<f64> {
    let sym = rep.element(&qt_mul(x, y)?);
    let mat = rep.element(x) * rep.element(y);
    Ok(max_abs(&(sym - mat)))
}

/// Serialized element: {d, theta (exact rationals as "p/q"), coeffs rows}.
#[derive(Debug, Serialize, Deserialize)]
pub struct QtElementJson {
    pub d: usize,
    pub theta: Vec<Vec<String>>,
    pub coeffs: Vec<QtCoeffJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QtCoeffJson {
    pub m: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

pub fn qt_element_to_json(x: &QTElement) -> QtElementJson {
    let d = x.theta.d();
    let fraction = |k: usize, j: usize| -> String {
        match (d, x.theta.rational_21()) {
            (2, Some((p, q))) => {
                if k == j {
                    "0/1".into()
                } else if k > j {
                    format!("{p}/{q}")
                } else {
                    format!("{}/{q}", -p)
                }
            }
            _ => format!("{}", x.theta.entry(k, j)),
        }
    };
    let theta = (0..d)
        .map(|k| (0..d).map(|j| fraction(k, j)).collect())
        .collect();
    let coeffs = x
        .coeffs
        .iter()
        .map(|(m, a)| QtCoeffJson {
            m: m[..d].to_vec(),
            re: a.re,
            im: a.im,
        })
        .collect();
    QtElementJson { d, theta, coeffs }
}

pub fn qt_element_from_json(j: &QtElementJson) -> Result<QTElement> {
    if j.d != 2 {
        return Err(Error::Unsupported(
            "element parsing is implemented for d = 2".into(),
        ));
    }
    let fraction = j
        .theta
        .get(1)
        .and_then(|row| row.first())
        .ok_or_else(|| Error::Domain("theta matrix too small".into()))?;
    let (p, q) = fraction
        .split_once('/')
        .ok_or_else(|| Error::Domain(format!("`{fraction}` is not a p/q fraction")))?;
    let (p, q): (i64, i64) = (
        p.trim()
            .parse()
            .map_err(|_| Error::Domain("bad numerator".into()))?,
        q.trim()
            .parse()
            .map_err(|_| Error::Domain("bad denominator".into()))?,
    );
    let theta = Theta::rational_2d(p, q)?;
    let mut out = QTElement::zero(theta);
    for c in &j.coeffs {
        if c.m.len() != j.d {
            return Err(Error::Shape("frequency arity mismatch".into()));
        }
        let mut m = [0i64; 3];
        m[..j.d].copy_from_slice(&c.m);
        out.add_term(m, C64::new(c.re, c.im));
    }
    Ok(out)
}
