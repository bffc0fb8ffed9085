//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae, descending; odd indices are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    let mut vals = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    for (j, v) in vals.iter_mut().enumerate() {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
        *v = (f1, f2);
    }
    let mean = resk * 0.5;
    let mut resasc = (fc - mean).norm() * WGK[7];
    for (j, (f1, f2)) in vals.iter().enumerate() {
        resasc += ((f1 - mean).norm() + (f2 - mean).norm()) * WGK[j];
    }
    let (resk, resabs, resasc) = (resk * h, resabs * h.abs(), resasc * h.abs());
    let mut err = (resk - resg * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    err = err.max(50.0 * f64::EPSILON * resabs);
    Panel {
        a,
        b,
        value: resk,
        error: err,
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
    /// False when the panel budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Adaptive integration of `f` over consecutive `breakpoints`.
///
/// Panels with the largest error estimate are bisected until the summed
/// error falls below `max(abs_tol, rel_tol |I|)` or `max_panels` is reached.
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    if breakpoints.len() < 2 {
        return Err(Error::Quadrature("need at least two breakpoints".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Quadrature("breakpoints must increase strictly".into()));
    }
    let mut heap: BinaryHeap<Panel> = breakpoints.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let total = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((Complex64::new(0.0, 0.0), 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    loop {
        let (value, error) = total(&heap);
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        let target = abs_tol.max(rel_tol * value.norm());
        let done = error <= target;
        if done || heap.len() >= max_panels {
            return Ok(Integral {
                value,
                error,
                panels: heap.len(),
                converged: done,
            });
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // cannot split further; keep it and stop refining
            heap.push(worst);
            let (value, error) = total(&heap);
            return Ok(Integral {
                value,
                error,
                panels: heap.len(),
                converged: false,
            });
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }
}
