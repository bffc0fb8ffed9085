//! Markovian open-system evolution of the detector pair.
//!
//! Each detector couples to the field through its own response rates
//! `Re I±`; cross-detector vacuum terms (`X`, `Y`) are dropped, which is
//! justified once `a` is large compared with the gap. The jump operators are
//! `eta' sqrt(Re I-) sigma_-` and `eta' sqrt(Re I+) sigma_+` on each
//! detector, with `eta' = eta_0 / gamma` the lab-frame coupling.
//!
//! Basis and Pauli conventions: single-qubit index 0 is the ground state and
//! index 1 the excited state, so `sigma_z = diag(1, -1)` and
//! `sigma_- = [[0, 1], [0, 0]]`. Two-qubit index `2 i + j` pairs detector A
//! level `i` with detector B level `j`; `rho[0][0]` is "both ground".

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use std::f64::consts::PI;

pub type Mat4 = Matrix4<Complex64>;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Response rates and the time scales derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationProfile {
    /// `Re I-` (lab frame, inverse time).
    pub re_i_minus: f64,
    /// `Re I+` (lab frame, inverse time).
    pub re_i_plus: f64,
    pub delta: f64,
    /// `1 - delta`, kept separately so it stays accurate as `delta -> 1`.
    pub one_minus_delta: f64,
    pub t1: f64,
    pub t2: f64,
    /// `beta_eff Omega = ln(rho_down / rho_up)`; infinite when inertial.
    pub beta_eff_omega: f64,
    pub t_eff: f64,
    pub omega_gap: f64,
    pub accel: f64,
    pub eta0: f64,
    pub gamma: f64,
}

/// `ln(1 + u)` given `ln u`, without overflowing `u`.
fn ln_one_plus_exp(ln_u: f64) -> f64 {
    if ln_u > 0.0 {
        ln_u + (-ln_u).exp().ln_1p()
    } else {
        ln_u.exp().ln_1p()
    }
}

/// Closed-form relaxation data for gap `Omega`, proper acceleration `a`,
/// coupling `eta_0` and Lorentz factor `gamma`.
///
/// `eta0 = 0` is accepted and switches the dissipator off (infinite `T1`).
pub fn relaxation_profile(omega_gap: f64, accel: f64, eta0: f64, gamma: f64) -> Result<RelaxationProfile> {
    if !(omega_gap.is_finite() && omega_gap > 0.0) {
        return Err(Error::param("omega_gap", "must be finite and > 0"));
    }
    if !(accel.is_finite() && accel >= 0.0) {
        return Err(Error::param("accel", "must be finite and >= 0"));
    }
    if !(eta0.is_finite() && eta0 >= 0.0) {
        return Err(Error::param("eta0", "must be finite and >= 0"));
    }
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(Error::param("gamma", "must be finite and >= 1"));
    }
    let omega_lab = omega_gap / gamma;
    let base = gamma * gamma * omega_lab / (4.0 * PI);
    // Re I+ = gamma^2 a' / (16 sqrt3 pi) e^{-2 sqrt3 Omega / a}
    let (re_i_plus, beta_eff_omega) = if accel == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        let x = 2.0 * SQRT3 * omega_gap / accel;
        let plus = gamma * accel * (-x).exp() / (16.0 * SQRT3 * PI);
        // rho_down / rho_up = 1 + (4 sqrt3 Omega / a) e^{2 sqrt3 Omega / a}
        (plus, ln_one_plus_exp((2.0 * x).ln() + x))
    };
    let re_i_minus = base + re_i_plus;
    let sum = re_i_minus + re_i_plus;
    let delta = base / sum;
    let one_minus_delta = 2.0 * re_i_plus / sum;
    let eta_lab_sq = (eta0 / gamma).powi(2);
    let t1 = 1.0 / (4.0 * eta_lab_sq * sum);
    Ok(RelaxationProfile {
        re_i_minus,
        re_i_plus,
        delta,
        one_minus_delta,
        t1,
        t2: 2.0 * t1,
        beta_eff_omega,
        t_eff: omega_gap / beta_eff_omega,
        omega_gap,
        accel,
        eta0,
        gamma,
    })
}

impl RelaxationProfile {
    /// `1 - delta^2`, cancellation free.
    pub fn one_minus_delta_sq(&self) -> f64 {
        self.one_minus_delta * (1.0 + self.delta)
    }

    /// Squared jump amplitudes `(eta'^2 Re I-, eta'^2 Re I+)`.
    pub fn jump_rates(&self) -> (f64, f64) {
        let e = (self.eta0 / self.gamma).powi(2);
        (e * self.re_i_minus, e * self.re_i_plus)
    }

    /// Convert `t' = eta_0^2 Omega t / gamma` back to lab time.
    pub fn time_from_rescaled(&self, t_rescaled: f64) -> f64 {
        t_rescaled * self.gamma / (self.eta0 * self.eta0 * self.omega_gap)
    }
}

fn decays(p: &RelaxationProfile, t: f64) -> (f64, f64) {
    ((-t / p.t1).exp(), (-t / p.t2).exp())
}

/// Coefficients `r_ij` of `rho = sum r_ij sigma_i (x) sigma_j`, indices
/// ordered `0, x, y, z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochTensor {
    pub r: [[f64; 4]; 4],
}

fn pauli(i: usize) -> Matrix2<Complex64> {
    let (o, z, im) = (c(1.0), c(0.0), Complex64::new(0.0, 1.0));
    match i {
        0 => Matrix2::new(o, z, z, o),
        1 => Matrix2::new(z, o, o, z),
        2 => Matrix2::new(z, -im, im, z),
        _ => Matrix2::new(o, z, z, -o),
    }
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

impl BlochTensor {
    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                if self.r[i][j] != 0.0 {
                    m += kron(&pauli(i), &pauli(j)) * c(self.r[i][j]);
                }
            }
        }
        m
    }

    /// Inverse of [`BlochTensor::to_matrix`]: `r_ij = Tr(rho sigma_i sigma_j) / 4`.
    pub fn from_matrix(m: &Mat4) -> Self {
        let mut r = [[0.0; 4]; 4];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (m * kron(&pauli(i), &pauli(j))).trace().re / 4.0;
            }
        }
        BlochTensor { r }
    }
}

/// Bloch coefficients of the Bell-state trajectory at lab time `t`.
pub fn bloch_solution(p: &RelaxationProfile, t: f64) -> Result<BlochTensor> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be >= 0"));
    }
    let (e1, e2) = decays(p, t);
    let d = p.delta;
    let mut r = [[0.0; 4]; 4];
    r[0][0] = 0.25;
    r[1][1] = 0.25 * e2;
    r[2][2] = -0.25 * e2;
    r[0][3] = 0.25 * d * (1.0 - e2);
    r[3][0] = r[0][3];
    // (d^2/4)(1 - 2 e2 + (1 + 1/d^2) e1), written to survive d -> 0
    r[3][3] = 0.25 * (d * d * (1.0 - 2.0 * e2 + e1) + e1);
    Ok(BlochTensor { r })
}

/// Validated two-qubit density matrix at a time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: Mat4,
    time: f64,
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_SLACK: f64 = 1e-10;

fn check_state(rho: &Mat4) -> Result<()> {
    if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.2e})")));
    }
    let tr = rho.trace();
    if (tr - c(1.0)).norm() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let min = hermitian_part(rho).symmetric_eigenvalues().min();
    if min < -POSITIVITY_SLACK {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

fn hermitian_part(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * c(0.5)
}

impl TwoQubitState {
    pub fn new(rho: Mat4, time: f64) -> Result<Self> {
        check_state(&rho)?;
        Ok(TwoQubitState { rho, time })
    }

    /// `(|00> + |11>) / sqrt 2` at `t = 0`.
    pub fn bell() -> Self {
        let mut rho = Mat4::zeros();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            rho[(i, j)] = c(0.5);
        }
        TwoQubitState { rho, time: 0.0 }
    }

    /// `diag(p, 1-p) (x) diag(p, 1-p)`.
    pub fn product(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", "must lie in [0, 1]"));
        }
        let q = 1.0 - p;
        let rho = Mat4::from_diagonal(&nalgebra::Vector4::new(c(p * p), c(p * q), c(p * q), c(q * q)));
        TwoQubitState::new(rho, 0.0)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.rho
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i, j)]
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_distance(&self, other: &TwoQubitState) -> f64 {
        (self.rho - other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = hermitian_part(&self.rho).symmetric_eigenvalues();
        let mut v = [e[0], e[1], e[2], e[3]];
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Closed-form density matrix of the Bell-state trajectory.
pub fn density_at(p: &RelaxationProfile, t: f64) -> Result<TwoQubitState> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be >= 0"));
    }
    let (e1, e2) = decays(p, t);
    let d = p.delta;
    let g = d * (1.0 - e2);
    let mut rho = Mat4::zeros();
    rho[(0, 0)] = c(0.25 * (e1 + (1.0 + g) * (1.0 + g)));
    let mid = 0.25 * (1.0 - e1 - g * g);
    rho[(1, 1)] = c(mid);
    rho[(2, 2)] = c(mid);
    rho[(3, 3)] = c(0.25 * (e1 + (1.0 - g) * (1.0 - g)));
    rho[(0, 3)] = c(0.5 * e2);
    rho[(3, 0)] = c(0.5 * e2);
    Ok(TwoQubitState { rho, time: t })
}

/// Product thermal state reached as `t -> infinity`.
pub fn equilibrium_state(p: &RelaxationProfile) -> TwoQubitState {
    let up = 0.5 * (1.0 + p.delta);
    let down = 0.5 * p.one_minus_delta;
    let rho = Mat4::from_diagonal(&nalgebra::Vector4::new(
        c(up * up),
        c(up * down),
        c(down * up),
        c(down * down),
    ));
    TwoQubitState {
        rho,
        time: f64::INFINITY,
    }
}

struct Lindbladian {
    jumps: Vec<(Mat4, Mat4, Mat4)>,
}

impl Lindbladian {
    fn new(p: &RelaxationProfile) -> Self {
        let (gm, gp) = p.jump_rates();
        let lower = Matrix2::new(c(0.0), c(1.0), c(0.0), c(0.0));
        let raise = lower.transpose();
        let id = Matrix2::identity();
        let ops = [
            kron(&lower, &id) * c(gm.sqrt()),
            kron(&raise, &id) * c(gp.sqrt()),
            kron(&id, &lower) * c(gm.sqrt()),
            kron(&id, &raise) * c(gp.sqrt()),
        ];
        let jumps = ops
            .iter()
            .filter(|l| l.iter().any(|z| z.norm() > 0.0))
            .map(|l| (*l, l.adjoint(), l.adjoint() * l))
            .collect();
        Lindbladian { jumps }
    }

    fn apply(&self, rho: &Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for (l, ld, ldl) in &self.jumps {
            out += l * rho * ld * c(2.0) - ldl * rho - rho * ldl;
        }
        out
    }

    fn rk4(&self, rho: &Mat4, h: f64, steps: usize) -> Mat4 {
        let mut y = *rho;
        let hc = c(h);
        for _ in 0..steps {
            let k1 = self.apply(&y);
            let k2 = self.apply(&(y + k1 * (hc * 0.5)));
            let k3 = self.apply(&(y + k2 * (hc * 0.5)));
            let k4 = self.apply(&(y + k3 * hc));
            y += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (hc / 6.0);
        }
        y
    }
}

/// Tolerance of the step-halving check per grid interval.
pub const HALVING_TOL: f64 = 1e-11;

/// Integrate the master equation from `rho0` onto `t_grid` (lab time,
/// starting at 0) with fixed-step RK4.
///
/// Each interval starts with steps no longer than `T2 / 200` and is redone at
/// half the step until the two results agree to [`HALVING_TOL`].
pub fn lindblad_integrate(p: &RelaxationProfile, rho0: &TwoQubitState, t_grid: &[f64]) -> Result<Vec<TwoQubitState>> {
    check_state(&rho0.rho)?;
    match t_grid.first() {
        Some(&0.0) => {}
        _ => return Err(Error::param("t_grid", "must start at 0")),
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("t_grid", "must be finite and strictly increasing"));
    }
    let op = Lindbladian::new(p);
    let h_max = p.t2 / 200.0;
    let mut rho = rho0.rho;
    let mut out = vec![TwoQubitState { rho, time: 0.0 }];
    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        let mut n = if h_max.is_finite() {
            (span / h_max).ceil().max(1.0) as usize
        } else {
            1
        };
        let mut coarse = op.rk4(&rho, span / n as f64, n);
        loop {
            let fine = op.rk4(&rho, span / (2 * n) as f64, 2 * n);
            let diff = (fine - coarse).iter().map(|z| z.norm()).fold(0.0, f64::max);
            n *= 2;
            coarse = fine;
            if diff <= HALVING_TOL {
                break;
            }
            if span / n as f64 <= f64::EPSILON * w[1].abs().max(1.0) {
                return Err(Error::Integration {
                    t: w[1],
                    reason: format!("step size underflow (last halving difference {diff:.2e})"),
                });
            }
        }
        rho = coarse;
        check_state(&rho).map_err(|e| Error::Integration {
            t: w[1],
            reason: e.to_string(),
        })?;
        out.push(TwoQubitState { rho, time: w[1] });
    }
    Ok(out)
}

/// Wootters concurrence of an arbitrary two-qubit state.
///
/// With `rho = B B^dagger`, the `lambda_i` are the singular values of
/// `B^T (sigma_y (x) sigma_y) B`, which avoids the non-Hermitian product
/// `rho rho~`.
pub fn concurrence_general(state: &TwoQubitState) -> Result<f64> {
    check_state(&state.rho)?;
    let eig = hermitian_part(&state.rho).symmetric_eigen();
    let mut b = eig.eigenvectors;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = c(lam.max(0.0).sqrt());
        for r in 0..4 {
            b[(r, k)] *= s;
        }
    }
    let sy = pauli(2);
    let yy = kron(&sy, &sy);
    let tau = b.transpose() * yy * b;
    let mut sv: Vec<f64> = tau.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok((sv[0] - sv[1] - sv[2] - sv[3]).clamp(0.0, 1.0))
}

/// `max{-(1 - d^2)(1/2 - e^{-t/T2}) + (1 + d^2) e^{-t/T1} / 2, 0}`.
pub fn concurrence_closed(p: &RelaxationProfile, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be >= 0"));
    }
    if t == 0.0 {
        // Bell state
        return Ok(1.0);
    }
    let (e1, e2) = decays(p, t);
    let w = p.one_minus_delta_sq();
    let d2 = p.delta * p.delta;
    Ok((-w * (0.5 - e2) + 0.5 * (1.0 + d2) * e1).max(0.0))
}

/// When entanglement dies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EsdTime {
    At(f64),
    Never,
}

impl EsdTime {
    pub fn finite(self) -> Option<f64> {
        match self {
            EsdTime::At(t) => Some(t),
            EsdTime::Never => None,
        }
    }
}

/// `T2 ln((1 + d^2) / (sqrt(2(1 - d^2)) - 1 + d^2))`, or `Never` at `d = 1`.
pub fn esd_time(p: &RelaxationProfile) -> EsdTime {
    let w = p.one_minus_delta_sq();
    if w <= 0.0 || !p.t2.is_finite() {
        return EsdTime::Never;
    }
    let d2 = p.delta * p.delta;
    EsdTime::At(p.t2 * ((1.0 + d2) / ((2.0 * w).sqrt() - w)).ln())
}

/// `4 pi sqrt3 ln(1/(sqrt2 - 1)) gamma / (eta_0^2 a)`, the large-`a` limit of
/// [`esd_time`].
pub fn esd_large_accel(accel: f64, eta0: f64, gamma: f64) -> f64 {
    4.0 * PI * SQRT3 * (1.0 / (2f64.sqrt() - 1.0)).ln() * gamma / (eta0 * eta0 * accel)
}

/// Acceleration giving asymmetry `delta` at gap `omega_gap`; the inverse of
/// the `delta(a)` relation, which does not depend on `gamma`.
pub fn accel_for_delta(omega_gap: f64, delta: f64) -> Result<f64> {
    if !(omega_gap.is_finite() && omega_gap > 0.0) {
        return Err(Error::param("omega_gap", "must be finite and > 0"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1]"));
    }
    if delta == 1.0 {
        return Ok(0.0);
    }
    // u e^{-1/u} = 1/delta - 1 with u = a / (2 sqrt3 Omega), increasing in u
    let target = ((1.0 - delta) / delta).ln();
    let g = |ln_u: f64| ln_u - (-ln_u).exp() - target;
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    while g(lo) > 0.0 {
        lo *= 2.0;
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2.0 * SQRT3 * omega_gap * (0.5 * (lo + hi)).exp())
}

/// One sample of the concurrence surface over `(a / Omega, t')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub accel_ratio: f64,
    pub t_rescaled: f64,
    pub concurrence: f64,
}

/// Profile for acceleration `accel_ratio * Omega` on an orbit of radius
/// `radius`, so `gamma^2 = 1 + radius a`.
pub fn profile_for_ratio(omega_gap: f64, eta0: f64, radius: f64, accel_ratio: f64) -> Result<RelaxationProfile> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(Error::param("radius", "must be finite and >= 0"));
    }
    let accel = accel_ratio * omega_gap;
    relaxation_profile(omega_gap, accel, eta0, (1.0 + radius * accel).sqrt())
}

/// Closed-form concurrence on the grid `accel_ratios x t_rescaled`, with
/// `t' = eta_0^2 Omega t / gamma`. Rows follow `accel_ratios`.
pub fn concurrence_surface(
    omega_gap: f64,
    eta0: f64,
    radius: f64,
    accel_ratios: &[f64],
    t_rescaled: &[f64],
) -> Result<Vec<SurfacePoint>> {
    let mut out = Vec::with_capacity(accel_ratios.len() * t_rescaled.len());
    for &ratio in accel_ratios {
        let p = profile_for_ratio(omega_gap, eta0, radius, ratio)?;
        for &tr in t_rescaled {
            out.push(SurfacePoint {
                accel_ratio: ratio,
                t_rescaled: tr,
                concurrence: concurrence_closed(&p, p.time_from_rescaled(tr))?,
            });
        }
    }
    Ok(out)
}

/// `t_esd / T2` as a function of `a / Omega`.
pub fn esd_curve(omega_gap: f64, eta0: f64, radius: f64, accel_ratios: &[f64]) -> Result<Vec<(f64, EsdTime)>> {
    accel_ratios
        .iter()
        .map(|&ratio| {
            let p = profile_for_ratio(omega_gap, eta0, radius, ratio)?;
            let rel = match esd_time(&p) {
                EsdTime::At(t) => EsdTime::At(t / p.t2),
                EsdTime::Never => EsdTime::Never,
            };
            Ok((ratio, rel))
        })
        .collect()
}
