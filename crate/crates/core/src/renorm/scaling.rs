use crate::dynamics::UnimodalQuadratic;
use crate::renorm::{itinerary_matches, CombinatoricsSpec};
use crate::{Error, Result};

/// Smallest positive fixed point `x*` of `f^p` with `Df^p(x*) > 1`.
pub fn scaling_fixed_point(f: &UnimodalQuadratic, p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::NoFixedPoint(format!("period {p} has no renormalization")));
    }
    let g = |x: f64| f.iterate_real(x, p).0 - x;
    let ratio = 2f64.powf(1.0 / 16.0);
    let mut a = 1e-15;
    let mut ga = g(a);
    while a < 2.5 {
        let b = a * ratio;
        let gb = g(b);
        if ga == 0.0 || (ga > 0.0) != (gb > 0.0) {
            let (mut lo, mut hi, mut glo) = (a, b, ga);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi || glo == 0.0 {
                    break;
                }
                let gm = g(mid);
                if (gm > 0.0) == (glo > 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            let x = if glo == 0.0 { lo } else { 0.5 * (lo + hi) };
            if f.iterate_real(x, p).1 > 1.0 {
                return Ok(x);
            }
        }
        a = b;
        ga = gb;
    }
    Err(Error::NoFixedPoint(format!("no expanding fixed point of f^{p} on (0, 2.5)")))
}

/// `lambda = -x*/2`, the rescaling that sends the pre-renormalization's
/// orientation-preserving fixed point to `-2`.
pub fn scaling_factor_estimate(f: &UnimodalQuadratic, p: usize) -> Result<f64> {
    if p < 2 {
        return Err(Error::NoFixedPoint(format!("period {p} has no renormalization")));
    }
    let spec = CombinatoricsSpec::closest_to_chebyshev(p)?;
    if !itinerary_matches(f, &spec) {
        return Err(Error::Config(format!("c = {} does not have the period-{p} itinerary", f.c())));
    }
    let x = scaling_fixed_point(f, p)?;
    let lambda = -x / 2.0;
    if !(lambda > -1.0 && lambda < 0.0) {
        return Err(Error::NoFixedPoint(format!("scaling factor {lambda} outside (-1, 0)")));
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::find_superattracting_parameter;

    #[test]
    fn golden_mean_at_period_two() {
        let f = UnimodalQuadratic::new(1.0).unwrap();
        let l = scaling_factor_estimate(&f, 2).unwrap();
        assert!((l + (5f64.sqrt() - 1.0) / 4.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_period_is_rejected() {
        let f = UnimodalQuadratic::chebyshev();
        assert!(matches!(scaling_factor_estimate(&f, 1), Err(Error::NoFixedPoint(_))));
    }

    #[test]
    fn period_ten_matches_oracle() {
        let spec = CombinatoricsSpec::closest_to_chebyshev(10).unwrap();
        let c = find_superattracting_parameter(&spec, 1e-12).unwrap();
        let l = scaling_factor_estimate(&UnimodalQuadratic::new(c).unwrap(), 10).unwrap();
        // 40-digit oracle: |lambda_10| = 2.99612e-6, i.e. about pi * 4^-10.
        assert!((l.abs() / 2.99612e-6 - 1.0).abs() < 1e-4, "{l}");
    }
}
