//! Complex roots of `z = ±β sin z` (A family) and `z = ±β cos z` (X family).
//!
//! Roots come in sets of four, `{z, -z, conj z, -conj z}`; only the
//! representative with `Re z < 0`, `Im z > 0` is stored. Each branch has one
//! root per `k >= 1`, near
//!
//! ```text
//! sin, +:  Re z ≈ -(2k + 1/2)π      cos, +:  Re z ≈ -(2k - 1)π
//! sin, -:  Re z ≈ -(2k - 1/2)π      cos, -:  Re z ≈ -2kπ
//! ```
//!
//! with `Im z ≈ arccosh(|Re z| / β)`. On those strips the equation inverts to
//! a contraction `z ← F(z)` (slope about `1/|z|`), which is iterated to a fixed
//! point and polished with Newton.
//!
//! The special roots are `i y0` with `y0 = β sinh y0` (A family) and the real
//! `x0 = β cos x0` (X family). Both are simple zeros of their equations.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;

pub const DEFAULT_K_MAX: usize = 10;
/// Two roots closer than this are the same root.
pub const DEDUP_TOL: f64 = 1e-8;
/// Residual bound, relative to `max(1, |z|)`.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Largest acceptable `|z - σβ trig z|` for a root of size `|z|`.
///
/// Evaluating `trig z` at large `|z|` carries an absolute error of about
/// `|z|² ε` from argument reduction, so far out the bound follows that floor.
pub fn residual_bound(z: Complex64) -> f64 {
    let m = z.norm();
    (RESIDUAL_TOL * m.max(1.0)).max(4.0 * f64::EPSILON * m * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoleKind {
    /// `z = ±β sin z`
    ASin,
    /// `z = ±β cos z`
    XCos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `+` sign, the `z1` family
    Z1,
    /// `-` sign, the `z2` family
    Z2,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Z1 => 1.0,
            Branch::Z2 => -1.0,
        }
    }
}

impl fmt::Display for PoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoleKind::ASin => "A",
            PoleKind::XCos => "X",
        })
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Z1 => "z1",
            Branch::Z2 => "z2",
        })
    }
}

/// One transcendental equation `z = σ β trig(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleFamily {
    pub kind: PoleKind,
    pub branch: Branch,
    pub beta: f64,
}

impl PoleFamily {
    pub fn new(kind: PoleKind, branch: Branch, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(PoleFamily { kind, branch, beta })
    }

    /// `z - σ β trig(z)`.
    pub fn equation(&self, z: Complex64) -> Complex64 {
        let s = self.branch.sign() * self.beta;
        match self.kind {
            PoleKind::ASin => z - s * z.sin(),
            PoleKind::XCos => z - s * z.cos(),
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let s = self.branch.sign() * self.beta;
        match self.kind {
            PoleKind::ASin => 1.0 - s * z.cos(),
            PoleKind::XCos => 1.0 + s * z.sin(),
        }
    }

    /// Asymptotic starting point for the `k`-th root.
    pub fn seed(&self, k: usize) -> Complex64 {
        let k = k as f64;
        let re = match (self.kind, self.branch) {
            (PoleKind::ASin, Branch::Z1) => -(2.0 * k + 0.5) * PI,
            (PoleKind::ASin, Branch::Z2) => -(2.0 * k - 0.5) * PI,
            (PoleKind::XCos, Branch::Z1) => -(2.0 * k - 1.0) * PI,
            (PoleKind::XCos, Branch::Z2) => -2.0 * k * PI,
        };
        Complex64::new(re, (re.abs() / self.beta).acosh())
    }

    fn inverse_step(&self, z: Complex64, k: usize) -> Complex64 {
        let w = z / self.beta;
        let shift = 2.0 * PI * k as f64;
        match (self.kind, self.branch) {
            (PoleKind::ASin, Branch::Z1) => asin(w) - shift,
            (PoleKind::ASin, Branch::Z2) => asin(w) + PI - shift,
            (PoleKind::XCos, Branch::Z1) => -acos(w) - (shift - 2.0 * PI),
            (PoleKind::XCos, Branch::Z2) => acos(-w) - shift,
        }
    }

    fn failed(&self, k: usize, seed: Complex64) -> Error {
        Error::RootNotConverged {
            family: format!("{}-{}", self.kind, self.branch),
            k,
            seed,
        }
    }

    /// The `k`-th canonical root (`k >= 1`).
    pub fn root(&self, k: usize) -> Result<Complex64> {
        if k == 0 {
            return Err(Error::param("k", "family roots are indexed from 1"));
        }
        let seed = self.seed(k);
        let mut z = seed;
        let mut converged = false;
        for _ in 0..500 {
            let next = self.inverse_step(z, k);
            if !(next.re.is_finite() && next.im.is_finite()) {
                return Err(self.failed(k, seed));
            }
            let step = (next - z).norm();
            z = next;
            // the map is only as good as asin (~1e-14); Newton finishes the job
            if step <= 1e-9 * z.norm() {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(self.failed(k, seed));
        }
        for _ in 0..6 {
            let d = self.derivative(z);
            if d.norm() == 0.0 {
                break;
            }
            let dz = self.equation(z) / d;
            z -= dz;
            if dz.norm() <= f64::EPSILON * z.norm() {
                break;
            }
        }
        let strip = (z.re - seed.re).abs() < 0.5 * PI;
        if !(z.re < 0.0 && z.im > 0.0 && strip) {
            return Err(self.failed(k, seed));
        }
        Ok(z)
    }
}

/// Principal `asin`. Of the two reciprocal factors `±iw + sqrt(1 - w²)` the
/// larger one is logged, which avoids the cancellation that the textbook
/// formula suffers for large `|w|` off the real axis.
fn asin(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let s = (1.0 - w * w).sqrt();
    let (a, b) = (i * w + s, s - i * w);
    if a.norm() >= b.norm() {
        -i * a.ln()
    } else {
        i * b.ln()
    }
}

fn acos(w: Complex64) -> Complex64 {
    0.5 * PI - asin(w)
}

/// A root together with its bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub branch: Branch,
    pub k: usize,
    pub z: Complex64,
    pub residual: f64,
}

/// All canonical roots of one kind up to `k_max` per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub kind: PoleKind,
    pub beta: f64,
    /// `i y0` for the A kind, `x0` for the X kind.
    pub special: Complex64,
    /// Multiplicity of `special` as a zero of its equation, measured.
    pub special_order: u32,
    pub special_residual: f64,
    /// Both branches merged, sorted by `|z|`.
    pub members: Vec<Pole>,
    /// Largest absolute residual over `special` and `members`.
    pub residual: f64,
}

impl PoleSet {
    pub fn k_max(&self) -> usize {
        self.members.iter().map(|p| p.k).max().unwrap_or(0)
    }

    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &Pole> {
        self.members.iter().filter(move |p| p.branch == b)
    }

    pub fn family(&self, b: Branch) -> PoleFamily {
        PoleFamily {
            kind: self.kind,
            branch: b,
            beta: self.beta,
        }
    }

    /// The three partners of a stored root: `-z`, `conj z`, `-conj z`.
    pub fn partners(z: Complex64) -> [Complex64; 3] {
        [-z, z.conj(), -z.conj()]
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta == 0.0 {
        return Err(Error::InertialNoPoles);
    }
    if beta.is_finite() && beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::param("beta", format!("must lie in (0, 1), got {beta}")))
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `sinh(y)/y - 1`, accurate for small `y`.
fn sinhc_minus_one(y: f64) -> f64 {
    if y.abs() < 0.1 {
        let y2 = y * y;
        y2 / 6.0 * (1.0 + y2 / 20.0 * (1.0 + y2 / 42.0 * (1.0 + y2 / 72.0)))
    } else {
        y.sinh() / y - 1.0
    }
}

/// Positive root of `y = β sinh y`.
///
/// The root sits above the minimum of `β sinh y - y` at `arccosh(1/β)`, and
/// below `√3 arccosh(1/β)` for β near 1; the bracket widens until it holds.
pub fn solve_y0(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let inv_m1 = (1.0 - beta) / beta;
    // β sinh(y)/y - 1 = β (sinhc - 1) - (1 - β)
    let g = |y: f64| beta * sinhc_minus_one(y) - (1.0 - beta);
    let lo = (1.0 + inv_m1).acosh().max(f64::MIN_POSITIVE);
    let mut hi = 1.8 * lo.max((6.0 * inv_m1).sqrt());
    let mut tries = 0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 200 || !hi.is_finite() {
            return Err(Error::RootNotConverged {
                family: "A-special".into(),
                k: 0,
                seed: Complex64::new(0.0, hi),
            });
        }
    }
    Ok(bisect(lo * 0.5, hi, g))
}

/// Root of `x = β cos x` in `(0, β)`; `x - β cos x` is increasing there.
pub fn solve_x0(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(bisect(0.0, beta, |x| x - beta * x.cos()))
}

/// Closed approximation `y0 ≈ sqrt(6(1/β - 1))`, reliable only as β → 1.
pub fn y0_approx(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    Ok((6.0 * (1.0 / beta - 1.0)).sqrt())
}

/// Closed approximation `x0 ≈ -1/β + sqrt(1/β² + 2)`.
pub fn x0_approx(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    let ib = 1.0 / beta;
    // same value, written without cancellation for small β
    Ok(2.0 / (ib + (ib * ib + 2.0).sqrt()))
}

fn multiplicity(f: &PoleFamily, z: Complex64) -> u32 {
    if f.derivative(z).norm() > 1e-8 {
        1
    } else {
        2
    }
}

fn solve(kind: PoleKind, beta: f64, k_max: usize) -> Result<PoleSet> {
    check_beta(beta)?;
    if k_max == 0 {
        return Err(Error::param("k_max", "must be at least 1"));
    }
    let special = match kind {
        PoleKind::ASin => Complex64::new(0.0, solve_y0(beta)?),
        PoleKind::XCos => Complex64::new(solve_x0(beta)?, 0.0),
    };
    let main = PoleFamily {
        kind,
        branch: Branch::Z1,
        beta,
    };
    let special_residual = main.equation(special).norm();
    let mut members = Vec::with_capacity(2 * k_max);
    for branch in [Branch::Z1, Branch::Z2] {
        let fam = PoleFamily { kind, branch, beta };
        for k in 1..=k_max {
            let z = fam.root(k)?;
            let residual = fam.equation(z).norm();
            if residual > residual_bound(z) {
                return Err(fam.failed(k, fam.seed(k)));
            }
            members.push(Pole { branch, k, z, residual });
        }
    }
    members.sort_by(|a, b| a.z.norm().total_cmp(&b.z.norm()));
    for w in members.windows(2) {
        if (w[1].z - w[0].z).norm() < DEDUP_TOL || w[1].z.norm() <= w[0].z.norm() {
            return Err(Error::DuplicateRoot {
                family: format!("{kind}-{}", w[1].branch),
                k: w[1].k,
                root: w[1].z,
            });
        }
    }
    let residual = members.iter().map(|p| p.residual).fold(special_residual, f64::max);
    Ok(PoleSet {
        kind,
        beta,
        special,
        special_order: multiplicity(&main, special),
        special_residual,
        members,
        residual,
    })
}

/// Roots of `z = ±β sin z`. `β = 0` yields [`Error::InertialNoPoles`].
pub fn solve_a_poles(beta: f64, k_max: usize) -> Result<PoleSet> {
    solve(PoleKind::ASin, beta, k_max)
}

/// Roots of `z = ±β cos z`. `β = 0` yields [`Error::InertialNoPoles`].
pub fn solve_x_poles(beta: f64, k_max: usize) -> Result<PoleSet> {
    solve(PoleKind::XCos, beta, k_max)
}
