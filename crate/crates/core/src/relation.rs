//! Rudder / heading-change relation: correlation, polynomial least squares
//! and inversion of the fitted cubic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::lstsq;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationSample {
    pub rudder_deg: f64,
    pub heading_change_deg: f64,
}

impl RelationSample {
    pub fn new(rudder_deg: f64, heading_change_deg: f64) -> Self {
        Self {
            rudder_deg,
            heading_change_deg,
        }
    }
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Least-squares polynomial in the monomial basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFit {
    /// Coefficients in ascending powers: `c[0] + c[1] x + ...`.
    pub coefficients: Vec<f64>,
    /// Root-mean-square of the residuals (population standard deviation;
    /// the residual mean is zero because the basis contains a constant).
    pub residual_stddev: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }
}

pub const MAX_FIT_DEGREE: usize = 6;

pub fn fit_poly(samples: &[RelationSample], degree: usize) -> Result<PolyFit> {
    if !(1..=MAX_FIT_DEGREE).contains(&degree) {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree {degree} outside [1, {MAX_FIT_DEGREE}]"
        )));
    }
    if samples.len() <= degree {
        return Err(Error::InsufficientSamples {
            needed: degree,
            got: samples.len(),
        });
    }
    // Fit in a scaled variable for conditioning, then unscale.
    let scale = samples
        .iter()
        .map(|s| s.rudder_deg.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let t = s.rudder_deg / scale;
            (0..=degree).map(|k| t.powi(k as i32)).collect()
        })
        .collect();
    let rhs: Vec<f64> = samples.iter().map(|s| s.heading_change_deg).collect();
    let scaled = lstsq(&rows, &rhs)?;
    let coefficients: Vec<f64> = scaled
        .iter()
        .enumerate()
        .map(|(k, c)| c / scale.powi(k as i32))
        .collect();
    let mut fit = PolyFit {
        coefficients,
        residual_stddev: 0.0,
    };
    let sse: f64 = samples
        .iter()
        .map(|s| (s.heading_change_deg - fit.eval(s.rudder_deg)).powi(2))
        .sum();
    fit.residual_stddev = (sse / samples.len() as f64).sqrt();
    Ok(fit)
}

/// `heading = a d^3 + b d^2 + c d + d0`, strictly increasing on its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicRelation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub domain_lo_deg: f64,
    pub domain_hi_deg: f64,
}

impl CubicRelation {
    /// Fit to samples; the domain is the rudder hull of the samples.
    pub fn fit(samples: &[RelationSample]) -> Result<(Self, PolyFit)> {
        let fit = fit_poly(samples, 3)?;
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.rudder_deg), hi.max(s.rudder_deg))
        });
        let c = &fit.coefficients;
        let rel = Self::new(c[3], c[2], c[1], c[0], lo, hi)?;
        Ok((rel, fit))
    }

    /// Build from coefficients, checking strict monotonicity on the domain.
    pub fn new(a: f64, b: f64, c: f64, d: f64, domain_lo_deg: f64, domain_hi_deg: f64) -> Result<Self> {
        if !(domain_lo_deg < domain_hi_deg) {
            return Err(Error::InvalidArgument("empty relation domain".into()));
        }
        let rel = Self {
            a,
            b,
            c,
            d,
            domain_lo_deg,
            domain_hi_deg,
        };
        rel.check_monotone()?;
        Ok(rel)
    }

    fn check_monotone(&self) -> Result<()> {
        let mut probes: Vec<f64> = Vec::new();
        let mut x = self.domain_lo_deg;
        while x < self.domain_hi_deg {
            probes.push(x);
            x += 1.0;
        }
        probes.push(self.domain_hi_deg);
        // the derivative is quadratic; its extremum is the only interior
        // candidate besides the endpoints
        if self.a != 0.0 {
            let v = -self.b / (3.0 * self.a);
            if v > self.domain_lo_deg && v < self.domain_hi_deg {
                probes.push(v);
            }
        }
        // A polynomial with non-negative slope that is not identically flat is
        // strictly increasing, so isolated stationary points (as in a pure
        // cube) are admitted.
        let peak = probes.iter().map(|&x| self.slope(x).abs()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Err(Error::MonotonicityViolation { at_deg: self.domain_lo_deg });
        }
        match probes.into_iter().find(|&x| self.slope(x) < -1e-9 * peak) {
            Some(at_deg) => Err(Error::MonotonicityViolation { at_deg }),
            None => Ok(()),
        }
    }

    pub fn heading_change(&self, rudder_deg: f64) -> f64 {
        ((self.a * rudder_deg + self.b) * rudder_deg + self.c) * rudder_deg + self.d
    }

    pub fn slope(&self, rudder_deg: f64) -> f64 {
        (3.0 * self.a * rudder_deg + 2.0 * self.b) * rudder_deg + self.c
    }

    /// Heading changes reachable on the domain.
    pub fn range(&self) -> (f64, f64) {
        (
            self.heading_change(self.domain_lo_deg),
            self.heading_change(self.domain_hi_deg),
        )
    }

    /// Rudder angle producing `heading_change_deg`, by bracketed bisection.
    pub fn invert(&self, heading_change_deg: f64) -> Result<f64> {
        let (lo_h, hi_h) = self.range();
        if !(heading_change_deg >= lo_h && heading_change_deg <= hi_h) {
            return Err(Error::OutOfRange {
                requested: heading_change_deg,
                lo: lo_h,
                hi: hi_h,
            });
        }
        let (mut lo, mut hi) = (self.domain_lo_deg, self.domain_hi_deg);
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let r = self.heading_change(mid) - heading_change_deg;
            if r.abs() < 1e-10 || hi - lo < 1e-12 {
                break;
            }
            if r < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(mid)
    }

    /// Rudder for a heading change clamped into the reachable range.
    pub fn invert_clamped(&self, heading_change_deg: f64) -> f64 {
        let (lo_h, hi_h) = self.range();
        self.invert(heading_change_deg.clamp(lo_h, hi_h))
            .expect("clamped request lies in range")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_samples() -> Vec<RelationSample> {
        (-5..=5)
            .map(|i| {
                let x = i as f64;
                RelationSample::new(x, x * x * x)
            })
            .collect()
    }

    #[test]
    fn pearson_exact_line() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(pearson(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), Err(Error::ZeroVariance)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn exact_cubic_recovered() {
        let (rel, fit) = CubicRelation::fit(&cube_samples()).unwrap();
        assert!((rel.a - 1.0).abs() < 1e-10);
        assert!(rel.b.abs() < 1e-10 && rel.c.abs() < 1e-10 && rel.d.abs() < 1e-10);
        assert!(fit.residual_stddev < 1e-9);
    }

    #[test]
    fn invert_zero_of_odd_cubic() {
        // heading = d^3 + d is strictly increasing everywhere
        let rel = CubicRelation::new(1.0, 0.0, 1.0, 0.0, -5.0, 5.0).unwrap();
        assert!(rel.invert(0.0).unwrap().abs() < 1e-9);
        assert!((rel.invert(2.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pure_cube_inverts_through_flat_point() {
        let (rel, _) = CubicRelation::fit(&cube_samples()).unwrap();
        assert!(rel.invert(0.0).unwrap().abs() < 1e-3);
        assert!((rel.invert(8.0).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn flat_relation_rejected() {
        assert!(matches!(
            CubicRelation::new(0.0, 0.0, 0.0, 1.0, -5.0, 5.0),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn invert_out_of_range() {
        let rel = CubicRelation::new(0.0, 0.0, 2.0, 0.0, -10.0, 10.0).unwrap();
        assert!(matches!(rel.invert(25.0), Err(Error::OutOfRange { .. })));
        assert!((rel.invert_clamped(25.0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn decreasing_relation_rejected() {
        let samples: Vec<_> = (0..10)
            .map(|i| RelationSample::new(i as f64, -(i as f64)))
            .collect();
        assert!(matches!(
            CubicRelation::fit(&samples),
            Err(Error::MonotonicityViolation { .. })
        ));
    }

    #[test]
    fn fit_poly_bad_inputs() {
        let s = cube_samples();
        assert!(matches!(fit_poly(&s[..3], 3), Err(Error::InsufficientSamples { .. })));
        assert!(fit_poly(&s, 0).is_err());
        assert!(fit_poly(&s, 7).is_err());
    }
}
