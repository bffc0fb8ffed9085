//! Brute-force quadrature of the Wightman-function integrals behind `A`, `X`,
//! `Y` and the response rates `Re I±`.
//!
//! Each integral is evaluated at a ladder of regulators `dt -> dt - i eps` and
//! extrapolated polynomially to `eps = 0`. Time is measured in units of the
//! lab-frame window `xi' = gamma xi`; in those units the single-detector and
//! cross denominators read
//!
//! ```text
//! (tau - i eps)^2 - 4 rho^2 sin^2(tau / 2s)     (same detector)
//! (tau - i eps)^2 - 4 rho^2 cos^2(tau / 2s)     (opposite detectors)
//! ```
//!
//! with `rho = r / gamma` and `1/s = sqrt(alpha / r)`. The Gaussian centre of
//! mass integral is done analytically, leaving one-dimensional integrals:
//!
//! ```text
//! A = -1/(4 pi^1.5 gamma^2) int_R    e^{-tau^2/4 - i y tau} / single
//! X = e^{-y^2}/(2 pi^1.5 gamma^2) int_0^inf e^{-tau^2/4} / cross
//! Y = -1/(2 pi^1.5 gamma^2) Re int_0^inf e^{-tau^2/4 - i y tau} / cross
//! ```
//!
//! All amplitudes are in units of `eta_0^2`.

use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Execution};
use crate::params::{derive_orbit_point, OrbitPoint, PhysicalParams};
use crate::quad::{integrate, Integral};
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Regularization and resolution settings shared by every oracle integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Regulator {
    /// Strictly decreasing `eps` values in units of `(1 - beta) xi'`. The
    /// near-coincidence zero of the same-detector denominator sits at
    /// `tau = i eps / (1 - beta)`, so this keeps the ladder equally far inside
    /// the linear regime at every speed; for inertial points it is `xi'`.
    pub epsilon_ladder: Vec<f64>,
    /// Half-width of the integration window in units of `xi'`.
    pub truncation: f64,
    /// Maximum number of quadrature panels per integral.
    pub node_budget: usize,
}

impl Default for Regulator {
    fn default() -> Self {
        Regulator {
            epsilon_ladder: vec![1e-2, 5e-3, 2.5e-3],
            truncation: 12.0,
            node_budget: 10_000,
        }
    }
}

impl Regulator {
    pub fn new(epsilon_ladder: Vec<f64>, truncation: f64, node_budget: usize) -> Result<Self> {
        let reg = Regulator {
            epsilon_ladder,
            truncation,
            node_budget,
        };
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.epsilon_ladder;
        if l.len() < 3 {
            return Err(Error::param("epsilon_ladder", "needs at least 3 entries"));
        }
        if l.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::param("epsilon_ladder", "entries must be finite and > 0"));
        }
        if l.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::param("epsilon_ladder", "must be strictly decreasing"));
        }
        if !(self.truncation.is_finite() && self.truncation >= 6.0) {
            return Err(Error::param("truncation", "must be >= 6"));
        }
        if self.node_budget < 16 {
            return Err(Error::param("node_budget", "must be at least 16"));
        }
        Ok(())
    }

    /// Same settings with twice the panel budget.
    pub fn doubled(&self) -> Self {
        Regulator {
            node_budget: 2 * self.node_budget,
            ..self.clone()
        }
    }

    /// Short stable hash identifying these settings in corpus files.
    pub fn fingerprint(&self) -> String {
        let ladder: Vec<String> = self.epsilon_ladder.iter().map(|e| format!("{e:e}")).collect();
        let canon = format!(
            "ladder={};truncation={:e};budget={}",
            ladder.join(","),
            self.truncation,
            self.node_budget
        );
        Sha256::digest(canon.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Outcome of one extrapolated oracle integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport {
    /// Value at the smallest regulator on the ladder.
    pub value: Complex64,
    /// Polynomial extrapolation of the ladder to `eps = 0`.
    pub eps_extrapolated: Complex64,
    /// Observed order `p` in `I(eps) - I(0) ~ eps^p`.
    pub convergence_order: f64,
    pub error_estimate: f64,
    /// One value per ladder rung.
    pub ladder_values: Vec<Complex64>,
    /// Largest panel count used by any rung.
    pub panels: usize,
    /// Imaginary parts of the half-line response integral per rung. They
    /// diverge as `eps -> 0` and are never extrapolated.
    pub diagnostic_imag: Option<Vec<f64>>,
}

fn wightman_prefactor(den: Complex64) -> Complex64 {
    -1.0 / (4.0 * PI * PI * den)
}

/// `D+` between opposite detectors for a lab time difference `dt`.
pub fn wightman_cross(dt: f64, radius: f64, omega: f64, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be > 0"));
    }
    let c = 2.0 * radius * (0.5 * omega * dt).cos();
    let z = Complex64::new(dt, -eps);
    Ok(wightman_prefactor(z * z - c * c))
}

/// `D+` along one detector's worldline for a lab time difference `dt`.
pub fn wightman_single(dt: f64, radius: f64, omega: f64, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be > 0"));
    }
    let s = 2.0 * radius * (0.5 * omega * dt).sin();
    let z = Complex64::new(dt, -eps);
    Ok(wightman_prefactor(z * z - s * s))
}

/// `1 - sinc(x)^2` without cancellation near zero.
fn one_minus_sinc_sq(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x2 * (1.0 / 3.0 - x2 * (2.0 / 45.0 - x2 / 315.0))
    } else {
        let s = x.sin() / x;
        1.0 - s * s
    }
}

/// Orbit geometry in `xi'` units.
#[derive(Debug, Clone, Copy)]
struct Geometry {
    rho: f64,
    inv_s: f64,
    beta_sq: f64,
    inv_gamma_sq: f64,
    eps_unit: f64,
}

impl Geometry {
    fn new(pt: &OrbitPoint) -> Self {
        let g2 = pt.gamma_sq();
        Geometry {
            rho: pt.r() / g2.sqrt(),
            inv_s: if pt.is_inertial() {
                0.0
            } else {
                (pt.alpha() / pt.r()).sqrt()
            },
            beta_sq: pt.beta() * pt.beta(),
            inv_gamma_sq: 1.0 / g2,
            eps_unit: 1.0 / (g2 * (1.0 + pt.beta())),
        }
    }

    /// `4 rho^2 sin^2(tau / 2s)`.
    fn single_gap(&self, tau: f64) -> f64 {
        let s = 2.0 * self.rho * (0.5 * tau * self.inv_s).sin();
        s * s
    }

    fn single_den(&self, tau: f64, eps: f64) -> Complex64 {
        // tau^2 - 4 rho^2 sin^2 = tau^2 (1/gamma^2 + beta^2 (1 - sinc^2))
        let x = 0.5 * tau * self.inv_s;
        let spacelike = tau * tau * (self.inv_gamma_sq + self.beta_sq * one_minus_sinc_sq(x));
        Complex64::new(spacelike - eps * eps, -2.0 * eps * tau)
    }

    fn cross_den(&self, tau: f64, eps: f64) -> Complex64 {
        let c = 2.0 * self.rho * (0.5 * tau * self.inv_s).cos();
        let z = Complex64::new(tau, -eps);
        z * z - c * c
    }

    /// Real root of `tau = 2 rho cos(tau / 2s)`: the light-cone crossing
    /// between the two detectors.
    fn light_cone_root(&self) -> f64 {
        let f = |t: f64| t - 2.0 * self.rho * (0.5 * t * self.inv_s).cos();
        let (mut lo, mut hi) = (0.0, 2.0 * self.rho);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Breakpoints on `[lo, hi]` that resolve a near-singular peak of width
/// `eps` centred at `c`.
fn peak_breakpoints(lo: f64, hi: f64, c: f64, eps: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for k in [0.0, 1.0, 10.0, 100.0] {
        for sgn in [-1.0, 1.0] {
            let p = c + sgn * k * eps;
            if p > lo && p < hi {
                pts.push(p);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    pts
}

fn rung(f: impl Fn(f64) -> Complex64, pts: &[f64], reg: &Regulator) -> Result<Integral> {
    integrate(f, pts, 1e-15, 1e-12, reg.node_budget)
}

/// Neville evaluation at zero of the interpolant through `(xs, fs)`.
fn neville_at_zero(xs: &[f64], fs: &[Complex64]) -> Complex64 {
    let mut p = fs.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * xs[i] - p[i] * xs[i + m]) / (xs[i] - xs[i + m]);
        }
    }
    p[0]
}

/// Build the report from per-rung integrals and check the ladder behaves.
fn extrapolate(
    ladder: &[f64],
    rungs: &[Integral],
    scale: impl Fn(Complex64, f64) -> Complex64,
) -> Result<QuadratureReport> {
    let vals: Vec<Complex64> = rungs.iter().zip(ladder).map(|(r, &e)| scale(r.value, e)).collect();
    let errs: Vec<f64> = rungs
        .iter()
        .zip(ladder)
        .map(|(r, &e)| (scale(Complex64::new(r.error, 0.0), e) - scale(C0, e)).norm())
        .collect();
    let n = ladder.len();
    let extrap = neville_at_zero(ladder, &vals);
    let lower = neville_at_zero(&ladder[1..], &vals[1..]);

    // propagate quadrature noise through the Lagrange weights at zero
    let mut noise = 0.0;
    for k in 0..n {
        let mut w = 1.0;
        for j in 0..n {
            if j != k {
                w *= ladder[j] / (ladder[j] - ladder[k]);
            }
        }
        noise += w.abs() * errs[k];
    }
    let error_estimate = (extrap - lower).norm() + noise + 4.0 * f64::EPSILON * extrap.norm().max(f64::MIN_POSITIVE);

    let d1 = (vals[0] - vals[1]).norm();
    let d2 = (vals[1] - vals[2]).norm();
    let convergence_order = if d1 > 0.0 && d2 > 0.0 {
        let q = (ladder[0] - ladder[1]) / (ladder[1] - ladder[2]);
        (d1 / d2).ln() / q.ln()
    } else {
        f64::NAN
    };

    let floor = 10.0 * errs.iter().cloned().fold(0.0, f64::max) + 1e-13 * extrap.norm();
    let residuals: Vec<f64> = vals.iter().map(|v| (v - extrap).norm()).collect();
    for k in 0..n - 1 {
        if residuals[k + 1] > residuals[k] && residuals[k] > floor {
            return Err(Error::Extrapolation(format!(
                "residuals not monotone along the ladder: {residuals:?}"
            )));
        }
    }
    if !(extrap.re.is_finite() && extrap.im.is_finite()) {
        return Err(Error::Extrapolation("non-finite extrapolated value".into()));
    }
    Ok(QuadratureReport {
        value: vals[n - 1],
        eps_extrapolated: extrap,
        convergence_order,
        error_estimate,
        ladder_values: vals,
        panels: rungs.iter().map(|r| r.panels).max().unwrap_or(0),
        diagnostic_imag: None,
    })
}

fn run_ladder(
    reg: &Regulator,
    geo: &Geometry,
    rung_fn: impl Fn(f64) -> Result<Integral> + Sync + Send,
) -> Result<Vec<Integral>> {
    map_indexed(reg.epsilon_ladder.len(), Execution::default(), |i| {
        rung_fn(reg.epsilon_ladder[i] * geo.eps_unit)
    })
    .into_iter()
    .collect()
}

/// `A(eps)` before extrapolation: `int_0^T` of the integrand, doubled real
/// part supplies the mirror half-line.
fn a_rung(geo: &Geometry, y: f64, eps: f64, reg: &Regulator) -> Result<Integral> {
    let f = |t: f64| {
        let num = Complex64::from_polar((-0.25 * t * t).exp(), -y * t);
        num / geo.single_den(t, eps)
    };
    rung(f, &peak_breakpoints(0.0, reg.truncation, 0.0, eps), reg)
}

/// Transition amplitude `A` of one detector.
pub fn quad_a(pt: &OrbitPoint, reg: &Regulator) -> Result<QuadratureReport> {
    reg.validate()?;
    let geo = Geometry::new(pt);
    let pref = -1.0 / (4.0 * PI.powf(1.5) * pt.gamma_sq());
    let rungs = run_ladder(reg, &geo, |eps| a_rung(&geo, pt.y(), eps, reg))?;
    extrapolate(&reg.epsilon_ladder, &rungs, |v, _| {
        Complex64::new(2.0 * pref * v.re, 0.0)
    })
}

/// `quad_a` from dimensionful input.
pub fn quad_a_physical(p: &PhysicalParams, reg: &Regulator) -> Result<QuadratureReport> {
    quad_a(&derive_orbit_point(p)?, reg)
}

/// `A` at a fixed regulator from the one-dimensional reduced integral.
pub fn a_reduced_at(pt: &OrbitPoint, eps: f64, reg: &Regulator) -> Result<f64> {
    let geo = Geometry::new(pt);
    let r = a_rung(&geo, pt.y(), eps, reg)?;
    Ok(-2.0 * r.value.re / (4.0 * PI.powf(1.5) * pt.gamma_sq()))
}

/// `A` at a fixed regulator straight from the double time integral, with the
/// Gaussian windows `e^{-tau^2/2}` on both times.
pub fn a_double_at(pt: &OrbitPoint, eps: f64, reg: &Regulator) -> Result<Complex64> {
    let geo = Geometry::new(pt);
    let y = pt.y();
    let t = reg.truncation;
    let inner = |t1: f64| -> Result<Complex64> {
        let f = |t2: f64| {
            let d = t1 - t2;
            let w = (-0.5 * (t1 * t1 + t2 * t2)).exp();
            Complex64::from_polar(w, -y * d) * wightman_prefactor(geo.single_den(d, eps))
        };
        Ok(rung(f, &peak_breakpoints(-t, t, t1, eps), reg)?.value)
    };
    // errors inside the outer integrand are carried out through a cell
    let failure = std::cell::RefCell::new(None);
    let outer = integrate(
        |t1| match inner(t1) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C0
            }
        },
        &[-t, 0.0, t],
        1e-15,
        1e-11,
        reg.node_budget,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer.value / pt.gamma_sq())
}

fn cross_breakpoints(geo: &Geometry, eps: f64, reg: &Regulator) -> Vec<f64> {
    peak_breakpoints(0.0, reg.truncation, geo.light_cone_root(), eps)
}

/// Correlation amplitude `X` between the detectors.
pub fn quad_x(pt: &OrbitPoint, reg: &Regulator) -> Result<QuadratureReport> {
    reg.validate()?;
    let geo = Geometry::new(pt);
    let pref = (-pt.y() * pt.y()).exp() / (2.0 * PI.powf(1.5) * pt.gamma_sq());
    let rungs = run_ladder(reg, &geo, |eps| {
        let f = |t: f64| Complex64::new((-0.25 * t * t).exp(), 0.0) / geo.cross_den(t, eps);
        rung(f, &cross_breakpoints(&geo, eps, reg), reg)
    })?;
    extrapolate(&reg.epsilon_ladder, &rungs, |v, _| v * pref)
}

/// Cross term `Y`; real by construction.
pub fn quad_y(pt: &OrbitPoint, reg: &Regulator) -> Result<QuadratureReport> {
    reg.validate()?;
    let geo = Geometry::new(pt);
    let y = pt.y();
    let pref = -1.0 / (2.0 * PI.powf(1.5) * pt.gamma_sq());
    let rungs = run_ladder(reg, &geo, |eps| {
        let f = |t: f64| Complex64::from_polar((-0.25 * t * t).exp(), -y * t) / geo.cross_den(t, eps);
        rung(f, &cross_breakpoints(&geo, eps, reg), reg)
    })?;
    extrapolate(&reg.epsilon_ladder, &rungs, |v, _| Complex64::new(pref * v.re, 0.0))
}

/// Which response integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    /// `I+`, phase `e^{-i Omega' s}`: excitation.
    Plus,
    /// `I-`, phase `e^{+i Omega' s}`: de-excitation.
    Minus,
}

/// Markovian response rate `Re I±` along one detector's orbit.
///
/// `omega_lab` is the lab-frame gap `Omega'` in units of `1/xi'` (equal to
/// `y` for the point's own gap); the result is in units of `1/xi'`. Only the
/// orbit geometry of `pt` is used.
///
/// The inertial piece `-1/(4 pi^2 (tau - i eps)^2)` is subtracted and added
/// back exactly, leaving an integrand that decays like `tau^-4`.
pub fn quad_i_pm(sign: Response, omega_lab: f64, pt: &OrbitPoint, reg: &Regulator) -> Result<QuadratureReport> {
    reg.validate()?;
    if !(omega_lab.is_finite() && omega_lab >= 0.0) {
        return Err(Error::param("omega_lab", "must be finite and >= 0"));
    }
    let geo = Geometry::new(pt);
    let phase = match sign {
        Response::Plus => -omega_lab,
        Response::Minus => omega_lab,
    };
    let span = 50.0 * reg.truncation;
    // |remainder| <= 4 rho^2 / tau^4 beyond the window, both half-lines
    let tail = 2.0 * 4.0 * geo.rho * geo.rho / (3.0 * span.powi(3)) / (8.0 * PI * PI);
    let budget = Regulator {
        node_budget: reg.node_budget.max(16) * 4,
        ..reg.clone()
    };
    let rungs = run_ladder(reg, &geo, |eps| {
        let f = |t: f64| {
            let z = Complex64::new(t, -eps);
            let z2 = z * z;
            let gap = geo.single_gap(t);
            let rem = gap / (geo.single_den(t, eps) * z2);
            Complex64::from_polar(1.0, phase * t) * rem
        };
        let mut r = rung(f, &peak_breakpoints(0.0, span, 0.0, eps), &budget)?;
        r.error += tail * 8.0 * PI * PI;
        Ok(r)
    })?;
    // the subtracted inertial piece contributes Omega' e^{-Omega' eps} / 4pi
    // to I- and nothing to I+; its eps -> 0 limit is taken exactly
    let inertial = match sign {
        Response::Minus => omega_lab / (4.0 * PI),
        Response::Plus => 0.0,
    };
    let mut report = extrapolate(&reg.epsilon_ladder, &rungs, |v, _| {
        Complex64::new(-2.0 * v.re / (8.0 * PI * PI), 0.0)
    })?;
    report.value += inertial;
    report.eps_extrapolated += inertial;
    for v in &mut report.ladder_values {
        *v += inertial;
    }

    // half-line imaginary parts, for diagnostics only
    let imag = map_indexed(reg.epsilon_ladder.len(), Execution::default(), |i| {
        let eps = reg.epsilon_ladder[i] * geo.eps_unit;
        let f = |t: f64| Complex64::from_polar(1.0, phase * t) * wightman_prefactor(geo.single_den(t, eps));
        rung(f, &peak_breakpoints(0.0, span, 0.0, eps), &budget).map(|r| r.value.im)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    report.diagnostic_imag = Some(imag);
    Ok(report)
}
