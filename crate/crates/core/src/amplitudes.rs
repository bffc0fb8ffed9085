//! Closed-form second-order amplitudes `A` and `X` from pole sums.
//!
//! All results are in units of `eta_0^2`. With `s = sqrt(r/alpha)` and the
//! identity `exp(-q^2) erfc(-iq) = w(q)`, the contour-integral results read
//!
//! ```text
//! 4π A = e^{-y²} - √π y erfc(y)
//!      + √π/(4γ²s) · e^{-y²} [w(i(y0 s + y)) + w(i(y0 s - y))] / (y0 (y0 coth y0 - 1))
//!      + √π/(2γ²s) · Im Σ_p e^{-y²} [w(s z_p + iy) + w(s z_p - iy)] / (z_p (1 - z_p cot z_p))
//!
//! X = -1/(4√π γ² s) · e^{-y²} [ -i w(s x0) / (2 x0 (1 + x0 tan x0))
//!                               + Im Σ_p w(s z_p) / (z_p (1 + z_p tan z_p)) ]
//! ```
//!
//! where `p` runs over both branches of the sine family for `A` and the cosine
//! family for `X`, up to `k_max` roots each. `alpha = 0` dispatches to the
//! inertial forms.
//!
//! The pole sums converge algebraically in `k`, so the truncation error is
//! estimated from a power law fitted to the last few terms.

use crate::cerf::{erfc_real, faddeeva, faddeeva_scaled};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, Execution};
use crate::params::OrbitPoint;
use crate::poles::{self, PoleSet, DEFAULT_K_MAX};
use num_complex::Complex64;
use std::f64::consts::PI;

const SQRT_PI: f64 = 1.772_453_850_905_516;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Truncation controls for the pole sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeOptions {
    pub k_max: usize,
    /// When set, `k_max` is doubled until the tail estimate drops below it.
    pub tolerance: Option<f64>,
    /// Hard ceiling for adaptive deepening.
    pub k_limit: usize,
}

impl Default for AmplitudeOptions {
    fn default() -> Self {
        AmplitudeOptions {
            k_max: DEFAULT_K_MAX,
            tolerance: None,
            k_limit: 1280,
        }
    }
}

impl AmplitudeOptions {
    pub fn with_k_max(k_max: usize) -> Self {
        AmplitudeOptions {
            k_max,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeResult {
    pub a_val: f64,
    pub x_val: Complex64,
    pub k_used: usize,
    /// Estimated magnitude of the neglected pole terms (max over A and X).
    pub tail_estimate: f64,
    /// Imaginary residue of the nominally real parts, a health metric.
    pub imag_leak: f64,
}

/// `A` at `alpha = 0`: `(e^{-y²} - √π y erfc y) / 4π`.
pub fn inertial_a(_r: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::param("y", format!("must be > 0, got {y}")));
    }
    Ok(window_term(y)? / (4.0 * PI))
}

/// `X` at `alpha = 0`: `-(1/4√π)(1/2r) e^{-r²-y²} (erfi r - i)`.
pub fn inertial_x(r: f64, y: f64) -> Result<Complex64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::param("r", format!("must be > 0, got {r}")));
    }
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::param("y", format!("must be > 0, got {y}")));
    }
    // e^{-r²} erfi(r) = Im w(r)
    let w = faddeeva(Complex64::new(r, 0.0))?;
    let pre = -(-y * y).exp() / (8.0 * SQRT_PI * r);
    Ok(pre * Complex64::new(w.im, -w.re))
}

fn window_term(y: f64) -> Result<f64> {
    // e^{-y²} - √π y erfc(y) = e^{-y²} (1 - √π y erfcx(y))
    let g = (-y * y).exp();
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(g - SQRT_PI * y * erfc_real(y)?)
}

/// Long-time transition rate `eta0² a exp(-√12 Ω/a) / (8√3 π)`; the limit of
/// `A / (√π xi)` as `xi → ∞` at fixed `R`, `a`.
pub fn longtime_rate_a(omega_gap: f64, accel: f64, eta0: f64) -> Result<f64> {
    if !(accel > 0.0 && accel.is_finite()) {
        return Err(Error::param("accel", format!("must be > 0, got {accel}")));
    }
    if !(omega_gap >= 0.0 && omega_gap.is_finite()) {
        return Err(Error::param("omega_gap", format!("must be >= 0, got {omega_gap}")));
    }
    let s3 = 3f64.sqrt();
    Ok(eta0 * eta0 * accel * (-2.0 * s3 * omega_gap / accel).exp() / (8.0 * s3 * PI))
}

/// `y coth y - 1`, with a series near zero.
fn ycoth_minus_one(y: f64) -> f64 {
    if y.abs() < 0.25 {
        let t = y * y;
        t * (1.0 / 3.0
            + t * (-1.0 / 45.0
                + t * (2.0 / 945.0 + t * (-1.0 / 4725.0 + t * (2.0 / 93555.0 - t * 1382.0 / 638_512_875.0)))))
    } else {
        y / y.tanh() - 1.0
    }
}

/// `e^{-y²} w(i t)` for real `t` (any sign) without forming `e^{±y²}`.
fn gauss_w_imag(t: f64, y: f64) -> Result<f64> {
    if t >= 0.0 {
        Ok(faddeeva_scaled(Complex64::new(0.0, t), -y * y)?.re)
    } else {
        // w(-iu) = 2 e^{u²} - w(iu) with u = -t, and u² - y² = (u - y)(u + y)
        let u = -t;
        let lead = 2.0 * ((u - y) * (u + y)).exp();
        if !lead.is_finite() {
            return Err(Error::Overflow {
                what: "pole term",
                arg: Complex64::new(0.0, t),
            });
        }
        Ok(lead - faddeeva_scaled(Complex64::new(0.0, u), -y * y)?.re)
    }
}

/// `e^{-y²} w(s z + σ i y)` for `Im z > 0`.
fn gauss_w_shifted(sz: Complex64, y: f64, sigma: f64) -> Result<Complex64> {
    let q = sz + sigma * y * I;
    if q.im >= 0.0 {
        return faddeeva_scaled(q, -y * y);
    }
    // e^{-y²} 2 e^{-q²} = 2 exp(-(sz)² - 2σ i y sz)
    let expo = -sz * sz - 2.0 * sigma * y * I * sz;
    if expo.re > 709.0 {
        return Err(Error::Overflow {
            what: "pole term",
            arg: q,
        });
    }
    let lead = 2.0 * expo.exp();
    Ok(lead - faddeeva_scaled(-q, -y * y)?)
}

/// `z (1 - z cot z)` via sin/cos.
fn a_denominator(z: Complex64) -> Complex64 {
    let (s, c) = (z.sin(), z.cos());
    z * (s - z * c) / s
}

/// `z (1 + z tan z)` via sin/cos.
fn x_denominator(z: Complex64) -> Complex64 {
    let (s, c) = (z.sin(), z.cos());
    z * (c + z * s) / c
}

struct PoleSum {
    value: f64,
    leak: f64,
    per_k: Vec<f64>,
}

fn a_term(z: Complex64, s: f64, y: f64) -> Result<Complex64> {
    let sz = s * z;
    let num = gauss_w_shifted(sz, y, 1.0)? + gauss_w_shifted(sz, y, -1.0)?;
    Ok(num / a_denominator(z))
}

fn x_term(z: Complex64, s: f64) -> Result<Complex64> {
    Ok(faddeeva(s * z)? / x_denominator(z))
}

/// `Im Σ term(z)`, evaluated as `(term(z) + term(-conj z)) / 2i` so that the
/// leftover imaginary part measures how well the four-fold symmetry holds.
fn pole_sum(set: &PoleSet, term: impl Fn(Complex64) -> Result<Complex64>) -> Result<PoleSum> {
    let k_max = set.k_max();
    let mut per_k = vec![0.0; k_max];
    let mut total = Complex64::new(0.0, 0.0);
    for (index, p) in set.members.iter().enumerate() {
        let wrap = |e| Error::PoleTerm {
            index,
            source: Box::new(e),
        };
        let t = term(p.z).map_err(wrap)?;
        let partner = term(-p.z.conj()).map_err(wrap)?;
        let pair = (t + partner) / (2.0 * I);
        per_k[p.k - 1] += pair.re;
        total += pair;
    }
    Ok(PoleSum {
        value: total.re,
        leak: total.im.abs(),
        per_k,
    })
}

/// Power-law tail `Σ_{k>K} c_k` from the last few per-k contributions.
fn tail_estimate(per_k: &[f64]) -> f64 {
    let n = per_k.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let last = per_k[n - 1].abs();
    if n < 4 {
        return last * n as f64;
    }
    let m = |i: usize| per_k[i].abs().max(per_k[i - 1].abs());
    let (k1, k2) = ((n - 2) as f64, n as f64);
    let (m1, m2) = (m(n - 3), m(n - 1));
    let p = if m1 > 0.0 && m2 > 0.0 {
        (m1 / m2).ln() / (k2 / k1).ln()
    } else {
        2.0
    };
    let p = p.clamp(1.5, 8.0);
    m2 * k2 / (p - 1.0)
}

struct Evaluated {
    a: f64,
    x: Complex64,
    a_tail: f64,
    x_tail: f64,
    leak: f64,
}

fn evaluate(pt: &OrbitPoint, k_max: usize) -> Result<Evaluated> {
    let (r, y, alpha) = (pt.r(), pt.y(), pt.alpha());
    let g2 = pt.gamma_sq();
    let beta = pt.beta();
    let s = (r / alpha).sqrt();

    let aset = poles::solve_a_poles(beta, k_max)?;
    let y0 = aset.special.im;
    let u = y0 * s;
    let z0 = (gauss_w_imag(u + y, y)? + gauss_w_imag(u - y, y)?) / (y0 * ycoth_minus_one(y0));
    let asum = pole_sum(&aset, |z| a_term(z, s, y))?;
    let pre = SQRT_PI / (g2 * s);
    let a4pi = window_term(y)? + 0.25 * pre * z0 + 0.5 * pre * asum.value;
    let a_scale = 0.5 * pre / (4.0 * PI);

    let xset = poles::solve_x_poles(beta, k_max)?;
    let x0 = xset.special.re;
    let head = -I * faddeeva(Complex64::new(s * x0, 0.0))? / (2.0 * x0 * (1.0 + x0 * x0.tan()));
    let xsum = pole_sum(&xset, |z| x_term(z, s))?;
    let xpre = -(-y * y).exp() / (4.0 * SQRT_PI * g2 * s);
    let x = xpre * (head + xsum.value);

    Ok(Evaluated {
        a: a4pi / (4.0 * PI),
        x,
        a_tail: a_scale * tail_estimate(&asum.per_k),
        x_tail: xpre.abs() * tail_estimate(&xsum.per_k),
        leak: (a_scale * asum.leak).max(xpre.abs() * xsum.leak),
    })
}

/// `A` and `X` at one point.
pub fn amplitudes(pt: &OrbitPoint, opts: &AmplitudeOptions) -> Result<AmplitudeResult> {
    if pt.is_inertial() {
        return Ok(AmplitudeResult {
            a_val: inertial_a(pt.r(), pt.y())?,
            x_val: inertial_x(pt.r(), pt.y())?,
            k_used: 0,
            tail_estimate: 0.0,
            imag_leak: 0.0,
        });
    }
    if opts.k_max == 0 {
        return Err(Error::param("k_max", "must be at least 1"));
    }
    let mut k = opts.k_max;
    loop {
        let e = evaluate(pt, k)?;
        let tail = e.a_tail.max(e.x_tail);
        let done = match opts.tolerance {
            None => true,
            Some(tol) if tail <= tol => true,
            Some(tol) if 2 * k > opts.k_limit => return Err(Error::TailNotConverged { tail, tol, k_max: k }),
            Some(_) => false,
        };
        if done {
            return Ok(AmplitudeResult {
                a_val: e.a,
                x_val: e.x,
                k_used: k,
                tail_estimate: tail,
                imag_leak: e.leak,
            });
        }
        k *= 2;
    }
}

pub fn amplitude_a(pt: &OrbitPoint, k_max: usize) -> Result<f64> {
    amplitudes(pt, &AmplitudeOptions::with_k_max(k_max)).map(|a| a.a_val)
}

pub fn amplitude_x(pt: &OrbitPoint, k_max: usize) -> Result<Complex64> {
    amplitudes(pt, &AmplitudeOptions::with_k_max(k_max)).map(|a| a.x_val)
}

/// Coefficient `c` in `|X| → c (1/4√π) e^{-y²} r^{-3/2} alpha^{-1/2}` as
/// `alpha → ∞`, from the `β → 1` pole sum truncated at `k_max`.
pub fn large_alpha_x_coefficient(k_max: usize) -> Result<f64> {
    let beta = 1.0 - 1e-13;
    let xset = poles::solve_x_poles(beta, k_max)?;
    let x0 = xset.special.re;
    let head = -I / (2.0 * x0 * (1.0 + x0 * x0.tan()));
    let sum = pole_sum(&xset, |z| Ok(1.0 / x_denominator(z)))?;
    Ok((head + sum.value).norm())
}

/// One point of an entanglement scan. A failed evaluation is kept in-band
/// with `error` set, `margin = NaN` and `entangled = false`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSample {
    pub point: OrbitPoint,
    pub entangled: bool,
    /// `|X| - A`
    pub margin: f64,
    pub amplitudes: Option<AmplitudeResult>,
    pub error: Option<String>,
}

impl RegionSample {
    fn from_result(point: OrbitPoint, res: Result<AmplitudeResult>) -> Self {
        match res {
            Ok(a) => {
                let margin = a.x_val.norm() - a.a_val;
                RegionSample {
                    point,
                    entangled: margin > 0.0,
                    margin,
                    amplitudes: Some(a),
                    error: None,
                }
            }
            Err(e) => RegionSample {
                point,
                entangled: false,
                margin: f64::NAN,
                amplitudes: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Entanglement criterion `|X| > A` at one point.
pub fn entangled(pt: &OrbitPoint, opts: &AmplitudeOptions) -> Result<RegionSample> {
    let a = amplitudes(pt, opts)?;
    Ok(RegionSample::from_result(*pt, Ok(a)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Sample positions along one scan axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            lo,
            hi,
            n,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(lo: f64, hi: f64, n: usize) -> Self {
        Axis {
            lo,
            hi,
            n,
            spacing: Spacing::Log,
        }
    }

    fn validate(&self, name: &'static str, allow_zero: bool) -> Result<()> {
        let ok_lo = if allow_zero && self.spacing == Spacing::Linear {
            self.lo >= 0.0
        } else {
            self.lo > 0.0
        };
        if !(self.lo.is_finite() && self.hi.is_finite() && ok_lo && self.hi >= self.lo) {
            return Err(Error::param(name, format!("bad range [{}, {}]", self.lo, self.hi)));
        }
        match self.n {
            0 => Err(Error::param(name, "needs at least one sample")),
            1 if self.lo != self.hi => Err(Error::param(name, "a single sample needs lo == hi")),
            _ => Ok(()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let t = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.lo + (self.hi - self.lo) * t,
                    Spacing::Log => (self.lo.ln() + (self.hi / self.lo).ln() * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub r: Axis,
    pub y: Axis,
    pub alpha: Axis,
}

impl Grid3 {
    pub fn len(&self) -> usize {
        self.r.n * self.y.n * self.alpha.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dense `|X| > A` scan, ordered row-major with `r` fastest, then `y`, then
/// `alpha`. Values do not depend on `exec`.
pub fn region_scan(grid: &Grid3, opts: &AmplitudeOptions, exec: Execution) -> Result<Vec<RegionSample>> {
    grid.r.validate("r", false)?;
    grid.y.validate("y", false)?;
    grid.alpha.validate("alpha", true)?;
    let (rs, ys, als) = (grid.r.values(), grid.y.values(), grid.alpha.values());
    let (nr, ny) = (rs.len(), ys.len());
    Ok(map_indexed(grid.len(), exec, |i| {
        let (ir, iy, ia) = (i % nr, (i / nr) % ny, i / (nr * ny));
        match OrbitPoint::new(rs[ir], ys[iy], als[ia]) {
            Ok(pt) => RegionSample::from_result(pt, amplitudes(&pt, opts)),
            Err(e) => RegionSample {
                point: OrbitPoint::new(1.0, 1.0, 0.0).expect("valid placeholder"),
                entangled: false,
                margin: f64::NAN,
                amplitudes: None,
                error: Some(e.to_string()),
            },
        }
    }))
}
