//! Smooth shape primitives built from exp(−1/x): the C^∞ step, the unit bump
//! with a quadratic peak, and plateau combinations. These attain 0 and 1
//! exactly on the prescribed sets, which is what lets the profile constraints
//! ("equals a constant on a set") hold to the bit.

/// exp(−1/x) for x > 0, extended by 0. All derivatives vanish at 0.
#[inline]
pub fn decay(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1, strictly increasing between.
#[inline]
pub fn step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let e = decay(x);
        e / (e + decay(1.0 - x))
    }
}

/// Smooth step from `a` to `b` (0 before a, 1 after b).
#[inline]
pub fn step_between(x: f64, a: f64, b: f64) -> f64 {
    debug_assert!(b > a);
    step((x - a) / (b - a))
}

/// Unit bump: 1 exactly at u = 0 (quadratic maximum), 0 for |u| ≥ 1.
#[inline]
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Plateau equal to 1 exactly on [−a, a] and 0 outside (−b, b), as a
/// function of a *squared* coordinate so it stays smooth through u = 0.
/// `plateau_sq(q, a², b²)` with q = u².
#[inline]
pub fn plateau_sq(q: f64, a2: f64, b2: f64) -> f64 {
    debug_assert!(b2 > a2);
    1.0 - step((q - a2) / (b2 - a2))
}

/// One-sided plateau on the line: 1 exactly on [lo1, hi1], 0 outside
/// (lo0, hi0), smooth monotone transitions in between.
#[inline]
pub fn plateau(x: f64, lo0: f64, lo1: f64, hi1: f64, hi0: f64) -> f64 {
    debug_assert!(lo0 < lo1 && lo1 <= hi1 && hi1 < hi0);
    step_between(x, lo0, lo1) * (1.0 - step_between(x, hi1, hi0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_endpoints_exact() {
        assert_eq!(step(0.0), 0.0);
        assert_eq!(step(-3.0), 0.0);
        assert_eq!(step(1.0), 1.0);
        assert_eq!(step(7.0), 1.0);
        assert_eq!(step(0.5), 0.5); // symmetry point
        assert!(step(0.3) > 0.0 && step(0.3) < 0.5);
    }

    #[test]
    fn bump_peak_and_support() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        // quadratic contact at the peak: bump(u) ≈ 1 − u² for small u
        let u = 1e-4;
        assert!((bump(u) - (1.0 - u * u)).abs() < 1e-12);
    }

    #[test]
    fn plateau_exact_levels() {
        assert_eq!(plateau(2.0, 1.2, 1.3, 2.7, 2.8), 1.0);
        assert_eq!(plateau(1.3, 1.2, 1.3, 2.7, 2.8), 1.0);
        assert_eq!(plateau(1.2, 1.2, 1.3, 2.7, 2.8), 0.0);
        assert_eq!(plateau(2.9, 1.2, 1.3, 2.7, 2.8), 0.0);
        let v = plateau(1.25, 1.2, 1.3, 2.7, 2.8);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn plateau_sq_levels() {
        assert_eq!(plateau_sq(0.0, 0.25, 0.64), 1.0);
        assert_eq!(plateau_sq(0.25, 0.25, 0.64), 1.0);
        assert_eq!(plateau_sq(0.64, 0.25, 0.64), 0.0);
        let v = plateau_sq(0.4, 0.25, 0.64);
        assert!(v > 0.0 && v < 1.0);
    }
}
