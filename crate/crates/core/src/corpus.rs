//! Versioned text table of oracle reference values.
//!
//! ```text
//! # oracle-corpus v1
//! # r y alpha quantity re im error_estimate fingerprint
//! 1.0000000000000000e0 1.0000000000000000e0 1.0000000000000000e0 A 1.2470...e-2 0e0 6.9e-8 3f2a...
//! ```

use crate::amplitudes::{amplitudes, AmplitudeOptions};
use crate::error::{Error, Result};
use crate::oracle::{quad_a, quad_i_pm, quad_x, quad_y, QuadratureReport, Regulator, Response};
use crate::parallel::{map_indexed, Execution};
use crate::params::OrbitPoint;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

pub const HEADER: &str = "# oracle-corpus v1";

/// The committed reference table.
pub const EMBEDDED: &str = include_str!("../data/oracle_corpus.txt");

/// Relative tolerance between closed forms and oracle values of `A`, `X`.
pub const CLOSED_FORM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    A,
    X,
    Y,
    /// `Re I-` at the point's own gap, in units of `1/xi'`.
    IMinus,
    /// `Re I+` at the point's own gap, in units of `1/xi'`.
    IPlus,
}

impl Quantity {
    pub const ALL: [Quantity; 5] = [Quantity::A, Quantity::X, Quantity::Y, Quantity::IMinus, Quantity::IPlus];

    /// Evaluate this quantity with the oracle.
    pub fn evaluate(self, pt: &OrbitPoint, reg: &Regulator) -> Result<QuadratureReport> {
        match self {
            Quantity::A => quad_a(pt, reg),
            Quantity::X => quad_x(pt, reg),
            Quantity::Y => quad_y(pt, reg),
            Quantity::IMinus => quad_i_pm(Response::Minus, pt.y(), pt, reg),
            Quantity::IPlus => quad_i_pm(Response::Plus, pt.y(), pt, reg),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::A => "A",
            Quantity::X => "X",
            Quantity::Y => "Y",
            Quantity::IMinus => "ReIminus",
            Quantity::IPlus => "ReIplus",
        })
    }
}

impl FromStr for Quantity {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.to_string() == s)
            .ok_or_else(|| format!("unknown quantity {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub r: f64,
    pub y: f64,
    pub alpha: f64,
    pub quantity: Quantity,
    pub value: Complex64,
    pub error_estimate: f64,
    pub fingerprint: String,
}

impl Record {
    pub fn point(&self) -> Result<OrbitPoint> {
        OrbitPoint::new(self.r, self.y, self.alpha)
    }

    /// Compute a fresh record from the oracle.
    pub fn compute(pt: &OrbitPoint, quantity: Quantity, reg: &Regulator) -> Result<Self> {
        let rep = quantity.evaluate(pt, reg)?;
        Ok(Record {
            r: pt.r(),
            y: pt.y(),
            alpha: pt.alpha(),
            quantity,
            value: rep.eps_extrapolated,
            error_estimate: rep.error_estimate,
            fingerprint: reg.fingerprint(),
        })
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.16e} {:.16e} {:.16e} {} {:.16e} {:.16e} {:.3e} {}",
            self.r,
            self.y,
            self.alpha,
            self.quantity,
            self.value.re,
            self.value.im,
            self.error_estimate,
            self.fingerprint
        )
    }
}

fn field<T: FromStr>(parts: &[&str], i: usize, line: usize, name: &str) -> Result<T> {
    parts[i].parse().map_err(|_| Error::Corpus {
        line,
        reason: format!("bad {name} {:?}", parts[i]),
    })
}

/// Parse a corpus, rejecting a missing or unknown version header.
pub fn parse(text: &str) -> Result<Vec<Record>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => {
            return Err(Error::Corpus {
                line: 1,
                reason: format!("expected header {HEADER:?}"),
            })
        }
    }
    let mut out = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 8 {
            return Err(Error::Corpus {
                line,
                reason: format!("expected 8 columns, found {}", parts.len()),
            });
        }
        let quantity = parts[3].parse().map_err(|reason| Error::Corpus { line, reason })?;
        out.push(Record {
            r: field(&parts, 0, line, "r")?,
            y: field(&parts, 1, line, "y")?,
            alpha: field(&parts, 2, line, "alpha")?,
            quantity,
            value: Complex64::new(field(&parts, 4, line, "re")?, field(&parts, 5, line, "im")?),
            error_estimate: field(&parts, 6, line, "error_estimate")?,
            fingerprint: parts[7].to_string(),
        });
    }
    Ok(out)
}

pub fn render(records: &[Record]) -> String {
    let mut s = format!("{HEADER}\n# r y alpha quantity re im error_estimate fingerprint\n");
    for r in records {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

/// The 27-point `(r, y, alpha)` grid used for closed-form cross-checks.
pub fn reference_grid() -> Vec<OrbitPoint> {
    let mut pts = Vec::with_capacity(27);
    for &alpha in &[0.1, 1.0, 10.0] {
        for &y in &[0.2, 1.0, 3.0] {
            for &r in &[0.1, 1.0, 3.0] {
                pts.push(OrbitPoint::new(r, y, alpha).expect("grid points are valid"));
            }
        }
    }
    pts
}

/// Every `(point, quantity)` pair stored in the corpus: `A` and `X` on the
/// reference grid plus `Y` and `Re I±` at a handful of points.
pub fn reference_entries() -> Vec<(OrbitPoint, Quantity)> {
    let mut out = Vec::new();
    for pt in reference_grid() {
        out.push((pt, Quantity::A));
        out.push((pt, Quantity::X));
    }
    for (r, y, alpha) in [(1.0, 1.0, 1.0), (0.5, 0.5, 2.0), (2.0, 1.5, 0.5)] {
        let pt = OrbitPoint::new(r, y, alpha).expect("valid point");
        out.push((pt, Quantity::Y));
        out.push((pt, Quantity::IMinus));
        out.push((pt, Quantity::IPlus));
    }
    out
}

/// Evaluate the whole corpus with the oracle.
pub fn build(reg: &Regulator, exec: Execution) -> Result<Vec<Record>> {
    let entries = reference_entries();
    map_indexed(entries.len(), exec, |i| {
        Record::compute(&entries[i].0, entries[i].1, reg)
    })
    .into_iter()
    .collect()
}

/// Outcome of re-checking one corpus row.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub record: Record,
    /// Closed-form value for `A`, `X`; a fresh oracle value otherwise.
    pub recomputed: Complex64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Re-evaluate each row. `A` and `X` are compared with the pole sums at
/// [`CLOSED_FORM_TOL`]; quantities without a closed form are recomputed by
/// the oracle and must reproduce the stored value within its error estimate.
pub fn verify(records: &[Record], opts: &AmplitudeOptions, reg: &Regulator, exec: Execution) -> Result<Vec<Check>> {
    map_indexed(records.len(), exec, |i| {
        let rec = &records[i];
        let pt = rec.point()?;
        let (recomputed, tolerance) = match rec.quantity {
            Quantity::A => (Complex64::new(amplitudes(&pt, opts)?.a_val, 0.0), CLOSED_FORM_TOL),
            Quantity::X => (amplitudes(&pt, opts)?.x_val, CLOSED_FORM_TOL),
            q => {
                let fresh = q.evaluate(&pt, reg)?;
                let scale = rec.value.norm().max(f64::MIN_POSITIVE);
                (
                    fresh.eps_extrapolated,
                    (rec.error_estimate + fresh.error_estimate) / scale + 1e-12,
                )
            }
        };
        let rel_error = (recomputed - rec.value).norm() / rec.value.norm().max(f64::MIN_POSITIVE);
        Ok(Check {
            record: rec.clone(),
            recomputed,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rec = Record {
            r: 1.0,
            y: 0.1 + 0.2,
            alpha: 3.5,
            quantity: Quantity::X,
            value: Complex64::new(-7.85e-3, 1.1e-2),
            error_estimate: 1e-9,
            fingerprint: "abcd".into(),
        };
        let back = parse(&render(std::slice::from_ref(&rec))).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].y, rec.y);
        assert_eq!(back[0].value, rec.value);
        assert_eq!(back[0].quantity, Quantity::X);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse("1 2 3").is_err());
        assert!(parse(&format!("{HEADER}\n1 2 3 A 1 0 1e-9")).is_err());
        assert!(parse(&format!("{HEADER}\n1 2 3 Q 1 0 1e-9 ff")).is_err());
        assert!(parse(&format!("{HEADER}\n1 2 x A 1 0 1e-9 ff")).is_err());
        assert!(parse(&format!("{HEADER}\n\n# comment\n")).unwrap().is_empty());
    }

    #[test]
    fn embedded_corpus_parses() {
        let recs = parse(EMBEDDED).unwrap();
        assert_eq!(recs.len(), reference_entries().len());
        assert!(recs.iter().all(|r| r.fingerprint == Regulator::default().fingerprint()));
    }

    #[test]
    fn quantity_names() {
        for q in Quantity::ALL {
            assert_eq!(q.to_string().parse::<Quantity>().unwrap(), q);
        }
    }
}
