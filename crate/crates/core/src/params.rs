//! Physical and dimensionless parameters, frame conversions and worldlines.
//!
//! Natural units `hbar = c = 1`, metric signature `(+,-,-,-)`. The only free
//! unit is the switching time `xi`; everything dimensionless is measured in
//! units of it:
//!
//! ```text
//! r = R / xi,   y = Omega xi,   alpha = a xi
//! gamma^2 = r alpha + 1,   beta^2 = r alpha / (r alpha + 1),   omega xi = sqrt(alpha / r) / gamma
//! ```
//!
//! Primed quantities live in the inertial frame of the orbit centre:
//! `Omega' = Omega/gamma`, `eta' = eta/gamma`, `xi' = gamma xi`, `a' = a/gamma`.

use crate::error::{Error, Result};

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

/// Dimensionful description of one configuration, measured in the detectors'
/// proper frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Energy gap `Omega` (inverse time).
    pub omega_gap: f64,
    /// Coupling amplitude `eta_0`.
    pub coupling: f64,
    /// Gaussian switching width `xi` (time).
    pub window: f64,
    /// Orbit radius `R` (length).
    pub radius: f64,
    /// Proper acceleration `a` (inverse time); zero means inertial.
    pub accel: f64,
}

impl PhysicalParams {
    pub fn new(omega_gap: f64, coupling: f64, window: f64, radius: f64, accel: f64) -> Result<Self> {
        let p = PhysicalParams {
            omega_gap,
            coupling,
            window,
            radius,
            accel,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega_gap", self.omega_gap)?;
        positive("coupling", self.coupling)?;
        positive("window", self.window)?;
        positive("radius", self.radius)?;
        non_negative("accel", self.accel)
    }

    /// `gamma^2 = R a + 1`.
    pub fn gamma_sq(&self) -> f64 {
        self.radius * self.accel + 1.0
    }
}

/// Lab-frame (orbit centre) versions of the proper-frame parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameQuantities {
    pub omega_gap_lab: f64,
    pub coupling_lab: f64,
    pub window_lab: f64,
    /// `a' = a / gamma`, the rate of change of velocity per unit proper time.
    pub accel_lab: f64,
    /// Centripetal acceleration per unit coordinate time, `R omega^2 = a / gamma^2`.
    pub accel_coordinate: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl FrameQuantities {
    /// Undo the Lorentz scalings. `radius` is frame independent.
    pub fn to_physical(&self, radius: f64) -> Result<PhysicalParams> {
        PhysicalParams::new(
            self.omega_gap_lab * self.gamma,
            self.coupling_lab * self.gamma,
            self.window_lab / self.gamma,
            radius,
            self.accel_lab * self.gamma,
        )
    }
}

pub fn to_lab_frame(p: &PhysicalParams) -> Result<FrameQuantities> {
    p.validate()?;
    let g2 = p.gamma_sq();
    let gamma = g2.sqrt();
    let ra = p.radius * p.accel;
    Ok(FrameQuantities {
        omega_gap_lab: p.omega_gap / gamma,
        coupling_lab: p.coupling / gamma,
        window_lab: p.window * gamma,
        accel_lab: p.accel / gamma,
        accel_coordinate: p.accel / g2,
        gamma,
        beta: (ra / g2).sqrt(),
    })
}

/// One configuration in dimensionless form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitPoint {
    r: f64,
    y: f64,
    alpha: f64,
    gamma_sq: f64,
    beta: f64,
    angular: f64,
}

impl OrbitPoint {
    pub fn new(r: f64, y: f64, alpha: f64) -> Result<Self> {
        positive("r", r)?;
        positive("y", y)?;
        non_negative("alpha", alpha)?;
        let ra = r * alpha;
        let gamma_sq = ra + 1.0;
        let beta = (ra / gamma_sq).sqrt();
        if beta >= 1.0 {
            return Err(Error::param(
                "alpha",
                format!("r*alpha = {ra:e} too large: speed rounds to 1"),
            ));
        }
        Ok(OrbitPoint {
            r,
            y,
            alpha,
            gamma_sq,
            beta,
            angular: (alpha / r).sqrt() / gamma_sq.sqrt(),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma_sq(&self) -> f64 {
        self.gamma_sq
    }
    pub fn gamma(&self) -> f64 {
        self.gamma_sq.sqrt()
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// Angular velocity in units of `1/xi`.
    pub fn angular(&self) -> f64 {
        self.angular
    }
    pub fn is_inertial(&self) -> bool {
        self.alpha == 0.0
    }

    /// Reconstruct dimensionful parameters at a chosen `xi` and `eta_0`.
    pub fn to_physical(&self, window: f64, coupling: f64) -> Result<PhysicalParams> {
        PhysicalParams::new(self.y / window, coupling, window, self.r * window, self.alpha / window)
    }
}

pub fn derive_orbit_point(p: &PhysicalParams) -> Result<OrbitPoint> {
    p.validate()?;
    OrbitPoint::new(p.radius / p.window, p.omega_gap * p.window, p.accel * p.window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    A,
    B,
}

/// Circular worldline `(t, s R cos wt, s R sin wt, 0)` with `s = +1` for A and
/// `-1` for B, parametrised by lab time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Worldline {
    pub detector: Detector,
    pub radius: f64,
    pub omega: f64,
}

impl Worldline {
    pub fn new(detector: Detector, radius: f64, omega: f64) -> Self {
        Worldline {
            detector,
            radius,
            omega,
        }
    }

    /// Both worldlines of the pair for a physical configuration.
    pub fn pair(p: &PhysicalParams) -> Result<(Worldline, Worldline)> {
        p.validate()?;
        let g2 = p.gamma_sq();
        let beta = (p.radius * p.accel / g2).sqrt();
        let omega = if p.accel == 0.0 { 0.0 } else { p.accel / (g2 * beta) };
        Ok((
            Worldline::new(Detector::A, p.radius, omega),
            Worldline::new(Detector::B, p.radius, omega),
        ))
    }

    pub fn sign(&self) -> f64 {
        match self.detector {
            Detector::A => 1.0,
            Detector::B => -1.0,
        }
    }

    pub fn position(&self, t: f64) -> [f64; 4] {
        let (s, c) = (self.omega * t).sin_cos();
        let k = self.sign() * self.radius;
        [t, k * c, k * s, 0.0]
    }
}

/// Minkowski interval `(x_i(t) - x_j(t'))^2` between two worldline events.
pub fn separation_squared(line_a: &Worldline, line_b: &Worldline, t: f64, t_prime: f64) -> f64 {
    let dt = t - t_prime;
    let half = 0.5 * line_a.omega * dt;
    if line_a.detector == line_b.detector {
        let s = 2.0 * line_a.radius * half.sin();
        dt * dt - s * s
    } else {
        let c = 2.0 * line_a.radius * half.cos();
        dt * dt - c * c
    }
}
