//! Slow fixed-point multiprecision reference for the error-function family.
//!
//! Arguments are taken exactly as dyadic rationals `(a + ib) / 2^e`, so the
//! only rounding happens in the series truncation and the final conversion.
//! Working precision scales with `|z|^2` to absorb the cancellation in
//! `erfc(-iz)` when it is exponentially small.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct Fixed {
    pub re: BigInt,
    pub im: BigInt,
    pub bits: u64,
}

impl Fixed {
    fn zero(bits: u64) -> Self {
        Fixed {
            re: BigInt::zero(),
            im: BigInt::zero(),
            bits,
        }
    }

    fn one(bits: u64) -> Self {
        Fixed {
            re: BigInt::one() << bits,
            im: BigInt::zero(),
            bits,
        }
    }

    fn add(&self, o: &Fixed) -> Fixed {
        Fixed {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
            bits: self.bits,
        }
    }

    fn mul(&self, o: &Fixed) -> Fixed {
        let re = (&self.re * &o.re - &self.im * &o.im) >> self.bits;
        let im = (&self.re * &o.im + &self.im * &o.re) >> self.bits;
        Fixed {
            re,
            im,
            bits: self.bits,
        }
    }

    fn div_small(&self, n: u64) -> Fixed {
        Fixed {
            re: &self.re / n,
            im: &self.im / n,
            bits: self.bits,
        }
    }

    fn norm_bits(&self) -> u64 {
        self.re.abs().bits().max(self.im.abs().bits())
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (big_to_f64(&self.re, self.bits), big_to_f64(&self.im, self.bits))
    }

    /// Decimal rendering of the real and imaginary parts with `digits`
    /// fractional digits (truncated).
    pub fn to_decimal(&self, digits: u32) -> (String, String) {
        let scale = BigInt::from(10u32).pow(digits);
        let f = |v: &BigInt| {
            let s = (v.abs() * &scale) >> self.bits;
            let mut txt = s.to_string();
            while txt.len() <= digits as usize {
                txt.insert(0, '0');
            }
            let (ip, fp) = txt.split_at(txt.len() - digits as usize);
            format!("{}{}.{}", if v.is_negative() { "-" } else { "" }, ip, fp)
        };
        (f(&self.re), f(&self.im))
    }
}

fn big_to_f64(v: &BigInt, frac_bits: u64) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let len = v.abs().bits();
    let keep = 64u64;
    let (m, shift) = if len > keep {
        (v >> (len - keep), (len - keep) as i64)
    } else {
        (v.clone(), 0)
    };
    let mut x = m.to_f64().expect("64-bit mantissa fits");
    let mut e = shift - frac_bits as i64;
    while e > 0 {
        let step = e.min(1000);
        x *= 2f64.powi(step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(1000);
        x *= 2f64.powi(-(step as i32));
        e += step;
    }
    x
}

/// Exact dyadic decomposition `x = m * 2^k`.
fn dyadic(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    (BigInt::from(sign) * BigInt::from(m), e)
}

fn from_f64(x: f64, bits: u64) -> BigInt {
    let (m, e) = dyadic(x);
    let s = bits as i64 + e;
    assert!(s >= 0, "argument {x} below working precision");
    m << s as u64
}

fn atan_inv(n: u64, bits: u64) -> BigInt {
    // atan(1/n) = sum (-1)^k / ((2k+1) n^(2k+1))
    let mut pow = (BigInt::one() << bits) / n;
    let n2 = n * n;
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !pow.is_zero() {
        let t = &pow / (2 * k + 1);
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        pow /= n2;
        k += 1;
    }
    sum
}

pub fn pi(bits: u64) -> BigInt {
    let g = bits + 32;
    ((atan_inv(5, g) * 16u32) - (atan_inv(239, g) * 4u32)) >> 32
}

fn complex_exp(v: &Fixed) -> Fixed {
    let bits = v.bits;
    let mag = v.norm_bits() as i64 - bits as i64;
    let k = (mag + 2).max(0) as u64;
    let small = Fixed {
        re: &v.re >> k,
        im: &v.im >> k,
        bits,
    };
    let mut term = Fixed::one(bits);
    let mut sum = Fixed::one(bits);
    let mut n = 1u64;
    loop {
        term = term.mul(&small).div_small(n);
        if term.re.is_zero() && term.im.is_zero() {
            break;
        }
        sum = sum.add(&term);
        n += 1;
    }
    for _ in 0..k {
        sum = sum.mul(&sum);
    }
    sum
}

/// Working precision used for argument `z`.
pub fn precision_for(re: f64, im: f64) -> u64 {
    let r2 = re * re + im * im;
    (3.0 * r2 * std::f64::consts::LOG2_E) as u64 + 256
}

/// `S(z) = sum_n z^(2n+1) / (n! (2n+1))`, so that `erf(iz) = (2i/sqrt(pi)) S(z)`
/// and `erfi(x) = (2/sqrt(pi)) S(x)`.
fn odd_series(re: f64, im: f64, bits: u64) -> Fixed {
    let z = Fixed {
        re: from_f64(re, bits),
        im: from_f64(im, bits),
        bits,
    };
    let z2 = z.mul(&z);
    let mut term = z.clone();
    let mut sum = z;
    let mut n = 1u64;
    loop {
        term = term.mul(&z2).div_small(n);
        let t = term.div_small(2 * n + 1);
        if t.re.is_zero() && t.im.is_zero() && n > 4 {
            break;
        }
        sum = sum.add(&t);
        n += 1;
    }
    sum
}

fn two_over_sqrt_pi(bits: u64) -> BigInt {
    let sp = (pi(bits) << bits).sqrt();
    (BigInt::one() << (2 * bits + 1)) / sp
}

/// Multiprecision Faddeeva function `w(z) = exp(-z^2) (1 + (2i/sqrt(pi)) S(z))`.
pub fn faddeeva(re: f64, im: f64) -> Fixed {
    let bits = precision_for(re, im);
    let s = odd_series(re, im, bits);
    let c = two_over_sqrt_pi(bits);
    // 1 + i c S
    let bracket = Fixed {
        re: (BigInt::one() << bits) - ((&c * &s.im) >> bits),
        im: (&c * &s.re) >> bits,
        bits,
    };
    let z = Fixed {
        re: from_f64(re, bits),
        im: from_f64(im, bits),
        bits,
    };
    let mz2 = z.mul(&z);
    let neg = Fixed {
        re: -mz2.re,
        im: -mz2.im,
        bits,
    };
    complex_exp(&neg).mul(&bracket)
}

/// Multiprecision `erfi(x)` for real `x` from the term-by-term odd series.
pub fn erfi_real(x: f64) -> Fixed {
    let bits = precision_for(x, 0.0);
    let s = odd_series(x, 0.0, bits);
    let c = two_over_sqrt_pi(bits);
    Fixed {
        re: (&c * &s.re) >> bits,
        im: BigInt::zero(),
        bits,
    }
}

/// Multiprecision `erfc(x)` for real `x` as `exp(-x^2) w(ix)`.
pub fn erfc_real(x: f64) -> Fixed {
    let w = faddeeva(0.0, x);
    let bits = w.bits;
    let xx = from_f64(x, bits);
    let e = complex_exp(&Fixed {
        re: -((&xx * &xx) >> bits),
        im: BigInt::zero(),
        bits,
    });
    e.mul(&w)
}
