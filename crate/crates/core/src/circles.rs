//! Closed-form circle intersection.
//!
//! A measurement equation `|z + v| = n` says that `z` lies on the circle
//! with center `-v` and radius `n`. Three circles with non-collinear
//! centers meet in at most one point; two circles in at most two.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `|Im((v1 - v2)/(v1 - v3))|` below this is treated as collinear.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Negative discriminants down to `-DISCRIMINANT_CLAMP · max(1, n1²)` are
/// rounded up to zero.
pub const DISCRIMINANT_CLAMP: f64 = 1e-12;
/// Relative residual accepted by the public solvers.
pub const SOLVER_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "circle radius must be nonnegative, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// The circle `|z + v| = n`.
    pub fn from_equation(v: Complex64, n: f64) -> Result<Self> {
        Self::new(-v, n)
    }

    /// `||p - center| - radius|`.
    pub fn distance(&self, p: Complex64) -> f64 {
        ((p - self.center).norm() - self.radius).abs()
    }

    pub fn contains(&self, p: Complex64, tol: f64) -> bool {
        self.distance(p) <= tol * (1.0 + self.radius)
    }
}

/// The radical-center solve of `|z + v_j| = n_j`, `j = 1, 2, 3`, without a
/// residual check.
pub fn three_circle_point(v: [Complex64; 3], n: [f64; 3]) -> Result<Complex64> {
    let d12 = v[0] - v[1];
    let d13 = v[0] - v[2];
    let ratio = d12 / d13;
    if !ratio.im.is_finite() || ratio.im.abs() < SINGULAR_TOL {
        return Err(Error::SingularConfiguration(format!(
            "centers are collinear or coincide (Im ratio = {:e})",
            ratio.im
        )));
    }
    // v1 - v2 = c - id, v1 - v3 = e - if:
    // 2(ac - bd) = n1² - n2² + |v2|² - |v1|², likewise with (e, f).
    let (c, d) = (d12.re, -d12.im);
    let (e, f) = (d13.re, -d13.im);
    let g = 0.5 * (n[0] * n[0] - n[1] * n[1] + v[1].norm_sqr() - v[0].norm_sqr());
    let h = 0.5 * (n[0] * n[0] - n[2] * n[2] + v[2].norm_sqr() - v[0].norm_sqr());
    let det = -c * f + d * e;
    let a = (-f * g + d * h) / det;
    let b = (-e * g + c * h) / det;
    Ok(Complex64::new(a, b))
}

/// Largest `||z + v_j| - n_j|` relative to `max(1, n_j, |v_j|)`.
pub fn equation_residual(z: Complex64, v: &[Complex64], n: &[f64]) -> f64 {
    v.iter()
        .zip(n)
        .map(|(&vj, &nj)| ((z + vj).norm() - nj).abs() / 1f64.max(nj).max(vj.norm()))
        .fold(0.0, f64::max)
}

/// The unique `z` with `|z + v_j| = n_j` for three non-collinear `v_j`.
pub fn solve_three_circles(
    v1: Complex64,
    v2: Complex64,
    v3: Complex64,
    n1: f64,
    n2: f64,
    n3: f64,
) -> Result<Complex64> {
    let (v, n) = ([v1, v2, v3], [n1, n2, n3]);
    let z = three_circle_point(v, n)?;
    let res = equation_residual(z, &v, &n);
    if !(res <= SOLVER_RESIDUAL_TOL) {
        return Err(Error::NoSolution(format!(
            "three circles have no common point (residual {res:e})"
        )));
    }
    Ok(z)
}

fn clamped_sqrt(disc: f64, scale: f64, clamp: f64) -> Result<f64> {
    if disc >= 0.0 {
        Ok(disc.sqrt())
    } else if disc >= -clamp * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NoSolution(format!(
            "circles do not intersect (discriminant {disc:e})"
        )))
    }
}

/// Solutions of `|z + m v_j| = n_j`, `j = 1, 2`, for real `m ≠ 0` and real
/// `v1 ≠ v2`, as `(a + i|b|, a - i|b|)`.
pub fn solve_two_circles_real(
    v1: f64,
    v2: f64,
    m: f64,
    n1: f64,
    n2: f64,
) -> Result<(Complex64, Complex64)> {
    solve_two_circles_real_tol(v1, v2, m, n1, n2, DISCRIMINANT_CLAMP)
}

pub fn solve_two_circles_real_tol(
    v1: f64,
    v2: f64,
    m: f64,
    n1: f64,
    n2: f64,
    clamp: f64,
) -> Result<(Complex64, Complex64)> {
    if m == 0.0 || v1 == v2 {
        return Err(Error::SingularConfiguration(
            "two-circle system needs m != 0 and v1 != v2".into(),
        ));
    }
    let a = (n1 * n1 - n2 * n2) / (2.0 * m * (v1 - v2)) - m * (v1 + v2) / 2.0;
    let b = clamped_sqrt(n1 * n1 - (a + m * v1).powi(2), n1 * n1, clamp)?;
    Ok((Complex64::new(a, b), Complex64::new(a, -b)))
}

/// Solutions of `|z + m v_j| = n_j`, `j = 1, 2`, for complex `m ≠ 0` and
/// real `v1 ≠ v2`, as `(m(å + i|b̊|), m(å - i|b̊|))`.
pub fn solve_two_circles_scaled(
    v1: f64,
    v2: f64,
    m: Complex64,
    n1: f64,
    n2: f64,
) -> Result<(Complex64, Complex64)> {
    solve_two_circles_scaled_tol(v1, v2, m, n1, n2, DISCRIMINANT_CLAMP)
}

pub fn solve_two_circles_scaled_tol(
    v1: f64,
    v2: f64,
    m: Complex64,
    n1: f64,
    n2: f64,
    clamp: f64,
) -> Result<(Complex64, Complex64)> {
    let scale = m.norm();
    if scale == 0.0 || v1 == v2 {
        return Err(Error::SingularConfiguration(
            "two-circle system needs m != 0 and v1 != v2".into(),
        ));
    }
    let (p1, p2) = (n1 / scale, n2 / scale);
    let a = (p1 * p1 - p2 * p2) / (2.0 * (v1 - v2)) - (v1 + v2) / 2.0;
    let b = clamped_sqrt(p1 * p1 - (a + v1).powi(2), p1 * p1, clamp)?;
    Ok((m * Complex64::new(a, b), m * Complex64::new(a, -b)))
}

/// Intersection points of two circles; one point when tangent (or when the
/// gap is within rounding), none when disjoint or concentric.
pub fn pair_points(c1: &Circle, c2: &Circle) -> Vec<Complex64> {
    let delta = c2.center - c1.center;
    let d = delta.norm();
    if d == 0.0 {
        return Vec::new();
    }
    let u = delta / d;
    let a = (c1.radius * c1.radius - c2.radius * c2.radius + d * d) / (2.0 * d);
    let h2 = c1.radius * c1.radius - a * a;
    let base = c1.center + u * a;
    if h2 <= 0.0 {
        return vec![base];
    }
    let off = u * Complex64::new(0.0, h2.sqrt());
    vec![base + off, base - off]
}

/// A point on every circle within `tol · (1 + radius)`, if one exists.
///
/// Candidates come from the first pair of circles with distinct centers and
/// are accepted only after checking every circle. Concentric families are
/// feasible only when all radii agree.
pub fn circles_common_point(circles: &[Circle], tol: f64) -> Result<Option<Complex64>> {
    if circles.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "need at least 3 circles, got {}",
            circles.len()
        )));
    }
    let first = &circles[0];
    let candidates = match circles[1..].iter().find(|c| c.center != first.center) {
        Some(other) => pair_points(first, other),
        None => vec![first.center + first.radius],
    };
    let mut best: Option<(f64, Complex64)> = None;
    for p in candidates {
        if !circles.iter().all(|c| c.contains(p, tol)) {
            continue;
        }
        let worst = circles
            .iter()
            .map(|c| c.distance(p) / (1.0 + c.radius))
            .fold(0.0, f64::max);
        if best.is_none_or(|(w, _)| worst < w) {
            best = Some((worst, p));
        }
    }
    Ok(best.map(|(_, p)| p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn radii(z: Complex64, v: &[Complex64]) -> Vec<f64> {
        v.iter().map(|vj| (z + vj).norm()).collect()
    }

    #[test]
    fn three_circles_planted_point() {
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let n = radii(c(1.0, 2.0), &v);
        let z = solve_three_circles(v[0], v[1], v[2], n[0], n[1], n[2]).unwrap();
        assert!((z - c(1.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn three_circles_through_origin() {
        let z = solve_three_circles(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), 1.0, 1.0, 1.0).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn collinear_centers_are_singular() {
        let err = solve_three_circles(c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), 1.0, 1.0, 1.0);
        assert!(matches!(err, Err(Error::SingularConfiguration(_))));
        let err = solve_three_circles(c(1.0, 0.0), c(2.0, 1.0), c(1.0, 0.0), 1.0, 1.0, 1.0);
        assert!(matches!(err, Err(Error::SingularConfiguration(_))));
    }

    #[test]
    fn inconsistent_three_circles() {
        let err = solve_three_circles(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), 1.0, 1.0, 2.0);
        assert!(matches!(err, Err(Error::NoSolution(_))));
    }

    #[test]
    fn two_real_planted() {
        let (p, q) = solve_two_circles_real(1.0, -1.0, 1.0, 32f64.sqrt(), 20f64.sqrt()).unwrap();
        assert!((p - c(3.0, 4.0)).norm() < 1e-12);
        assert!((q - c(3.0, -4.0)).norm() < 1e-12);
    }

    #[test]
    fn two_real_on_axis_coincide() {
        let z = c(2.5, 0.0);
        let (m, v1, v2) = (0.7, 0.3, -2.0);
        let n1 = (z + m * v1).norm();
        let n2 = (z + m * v2).norm();
        let (p, q) = solve_two_circles_real(v1, v2, m, n1, n2).unwrap();
        assert!((p - z).norm() < 1e-7 && (q - z).norm() < 1e-7);
    }

    #[test]
    fn two_real_equal_radii() {
        let (p, q) = solve_two_circles_real(1.0, -1.0, 2.0, 3.0, 3.0).unwrap();
        assert!(p.re.abs() < 1e-15 && q.re.abs() < 1e-15);
        assert!((p.im + q.im).abs() < 1e-15 && p.im > 0.0);
    }

    #[test]
    fn two_real_disjoint() {
        let err = solve_two_circles_real(10.0, -10.0, 1.0, 1.0, 1.0);
        assert!(matches!(err, Err(Error::NoSolution(_))));
    }

    #[test]
    fn two_scaled_planted() {
        let m = c(0.0, 1.0);
        let z = m * c(2.0, 3.0);
        let n1 = z.norm();
        let n2 = (z + m).norm();
        let (p, q) = solve_two_circles_scaled(0.0, 1.0, m, n1, n2).unwrap();
        assert!((p - m * c(2.0, 3.0)).norm() < 1e-12);
        assert!((q - m * c(2.0, -3.0)).norm() < 1e-12);
    }

    #[test]
    fn two_scaled_degenerate_and_symmetric() {
        let m = c(1.0, 1.0);
        let z = m * 1.5;
        let (p, q) =
            solve_two_circles_scaled(0.5, 2.0, m, (z + m * 0.5).norm(), (z + m * 2.0).norm())
                .unwrap();
        // Tangent circles: rounding enters through a square root.
        assert!((p - z).norm() < 1e-6 && (q - z).norm() < 1e-6);
        let (p, q) = solve_two_circles_scaled(1.0, -1.0, m, 3.0, 3.0).unwrap();
        let (pa, qa) = (p / m, q / m);
        assert!(pa.re.abs() < 1e-15 && qa.re.abs() < 1e-15);
        assert!((pa.im + qa.im).abs() < 1e-15);
    }

    #[test]
    fn common_point_of_five() {
        let target = c(1.0, 2.0);
        let centers = [
            c(0.0, 0.0),
            c(3.0, 1.0),
            c(-2.0, 5.0),
            c(4.0, -4.0),
            c(0.5, 0.7),
        ];
        let circles: Vec<Circle> = centers
            .iter()
            .map(|&ce| Circle::new(ce, (target - ce).norm()).unwrap())
            .collect();
        let p = circles_common_point(&circles, 1e-9).unwrap().unwrap();
        assert!((p - target).norm() < 1e-9);

        let tol = 1e-9;
        let mut bumped = circles.clone();
        bumped[3].radius += 10.0 * tol * (1.0 + bumped[3].radius);
        assert!(circles_common_point(&bumped, tol).unwrap().is_none());
    }

    #[test]
    fn common_point_collinear_centers() {
        let target = c(0.4, -1.3);
        let circles: Vec<Circle> = [-2.0, 0.5, 1.0, 3.0, 7.0]
            .iter()
            .map(|&x| Circle::new(c(x, 0.0), (target - c(x, 0.0)).norm()).unwrap())
            .collect();
        let p = circles_common_point(&circles, 1e-9).unwrap().unwrap();
        assert!((p - target).norm() < 1e-9 || (p - target.conj()).norm() < 1e-9);
    }

    #[test]
    fn concentric_circles() {
        let make = |rs: &[f64]| -> Vec<Circle> {
            rs.iter()
                .map(|&r| Circle::new(c(1.0, 1.0), r).unwrap())
                .collect()
        };
        assert!(
            circles_common_point(&make(&[1.0, 2.0, 3.0, 4.0, 5.0]), 1e-9)
                .unwrap()
                .is_none()
        );
        assert!(circles_common_point(&make(&[2.0, 2.0, 2.0]), 1e-9)
            .unwrap()
            .is_some());
        assert!(circles_common_point(&make(&[2.0, 2.0]), 1e-9).is_err());
    }

    fn pt() -> impl Strategy<Value = Complex64> {
        (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| c(a, b))
    }

    proptest! {
        #[test]
        fn three_circle_round_trip(z in pt(), v1 in pt(), v2 in pt(), v3 in pt()) {
            let ratio = (v1 - v2) / (v1 - v3);
            prop_assume!(ratio.im.abs() > 1e-3);
            let n = radii(z, &[v1, v2, v3]);
            let got = solve_three_circles(v1, v2, v3, n[0], n[1], n[2]).unwrap();
            prop_assert!((got - z).norm() < 1e-8);
        }

        #[test]
        fn real_pair_is_conjugate(z in pt(), v1 in -3.0f64..3.0, v2 in -3.0f64..3.0, m in 0.1f64..3.0) {
            prop_assume!((v1 - v2).abs() > 1e-2);
            let n1 = (z + m * v1).norm();
            let n2 = (z + m * v2).norm();
            let (p, q) = solve_two_circles_real(v1, v2, m, n1, n2).unwrap();
            prop_assert_eq!(p, q.conj());
            prop_assert!((p - z).norm() < 1e-6 || (q - z).norm() < 1e-6);
        }

        #[test]
        fn scaled_pair_is_conjugate_after_division(w in pt(), v1 in -3.0f64..3.0, v2 in -3.0f64..3.0, m in pt()) {
            prop_assume!((v1 - v2).abs() > 1e-2 && m.norm() > 0.1);
            let z = m * w;
            let n1 = (z + m * v1).norm();
            let n2 = (z + m * v2).norm();
            let (p, q) = solve_two_circles_scaled(v1, v2, m, n1, n2).unwrap();
            let (pa, qa) = (p / m, q / m);
            prop_assert!((pa - qa.conj()).norm() <= 1e-12 * (1.0 + pa.norm()));
            prop_assert!((p - z).norm() < 1e-6 || (q - z).norm() < 1e-6);
        }

        // Moving the unique point off by more than 1e3·tol breaks at least
        // one of the three equations.
        #[test]
        fn three_circle_uniqueness(z in pt(), v1 in pt(), v2 in pt(), v3 in pt(), dir in 0.0f64..std::f64::consts::TAU, len in 1e-3f64..1.0) {
            prop_assume!(((v1 - v2) / (v1 - v3)).im.abs() > 1e-2);
            let v = [v1, v2, v3];
            let n = radii(z, &v);
            let moved = z + Complex64::from_polar(len, dir);
            prop_assert!(equation_residual(moved, &v, &n) > 1e-9);
        }
    }
}
