//! Hyperbolic space H^k in the hyperboloid model.
//!
//! The form is `<u, v> = u0 v0 - sum u_i v_i`; points satisfy `<p, p> = 1`
//! with `p0 > 0`, and boundary points are null vectors scaled to `x0 = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reps::ProjectiveMatrix;
use crate::spectral::{jordan_projection, ls_slope, proximality_data, PROXIMAL_TOL};

pub const POINT_TOL: f64 = 1e-10;
pub const LORENTZ_TOL: f64 = 1e-8;

pub fn lorentz(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u[0] * v[0] - u.rows(1, u.len() - 1).dot(&v.rows(1, v.len() - 1))
}

pub fn lorentz_matrix(k: usize) -> DMatrix<f64> {
    let mut j = -DMatrix::identity(k + 1, k + 1);
    j[(0, 0)] = 1.0;
    j
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypPoint(DVector<f64>);

impl HypPoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::Dimension {
                expected: 3,
                got: coords.len(),
            });
        }
        let q = lorentz(&coords, &coords);
        if !((q - 1.0).abs() <= POINT_TOL * coords[0] * coords[0]) || !(coords[0] > 0.0) {
            return Err(Error::InvalidArgument(format!("not on the hyperboloid: <p,p> = {q}")));
        }
        Ok(HypPoint(coords))
    }

    /// Base point `(1, 0, ..., 0)` of H^k.
    pub fn origin(k: usize) -> Self {
        let mut v = DVector::zeros(k + 1);
        v[0] = 1.0;
        HypPoint(v)
    }

    /// The point at distance `s` from the origin toward `(1, u)`.
    pub fn along(u: &[f64], s: f64) -> Self {
        let mut v = DVector::zeros(u.len() + 1);
        v[0] = s.cosh();
        for (i, x) in u.iter().enumerate() {
            v[i + 1] = s.sinh() * x;
        }
        HypPoint(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len() - 1
    }

    pub fn apply(&self, m: &DMatrix<f64>) -> Result<Self> {
        HypPoint::new(m * &self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint(DVector<f64>);

impl BoundaryPoint {
    /// Normalizes a null vector to `x0 = 1` and `|x_hat| = 1` exactly.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::Dimension {
                expected: 3,
                got: coords.len(),
            });
        }
        let x0 = coords[0];
        if !(x0.abs() > 0.0) || !x0.is_finite() {
            return Err(Error::InvalidArgument("boundary point needs x0 != 0".into()));
        }
        let v = coords / x0;
        let q = lorentz(&v, &v);
        if !(q.abs() <= POINT_TOL) {
            return Err(Error::InvalidArgument(format!("not a null vector: <x,x> = {q}")));
        }
        let mut v = v;
        let n = v.rows(1, v.len() - 1).norm();
        for i in 1..v.len() {
            v[i] /= n;
        }
        Ok(BoundaryPoint(v))
    }

    /// `(1, u)` for a unit direction `u`.
    pub fn from_direction(u: &[f64]) -> Result<Self> {
        let mut v = DVector::zeros(u.len() + 1);
        v[0] = 1.0;
        for (i, x) in u.iter().enumerate() {
            v[i + 1] = *x;
        }
        BoundaryPoint::new(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn direction(&self) -> DVector<f64> {
        self.0.rows(1, self.0.len() - 1).into_owned()
    }

    pub fn apply(&self, m: &DMatrix<f64>) -> Result<Self> {
        BoundaryPoint::new(m * &self.0)
    }

    /// Euclidean distance of the unit directions.
    pub fn chord(&self, other: &BoundaryPoint) -> f64 {
        self.0.iter().zip(other.0.iter()).skip(1).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// `<x, y>` for boundary points, as `|x_hat - y_hat|^2 / 2` to avoid cancellation.
pub fn boundary_pairing(x: &BoundaryPoint, y: &BoundaryPoint) -> f64 {
    let c = x.chord(y);
    0.5 * c * c
}

pub fn busemann(z: &BoundaryPoint, p: &HypPoint, q: &HypPoint) -> f64 {
    (lorentz(p.coords(), z.coords()) / lorentz(q.coords(), z.coords())).ln()
}

pub fn hyperbolic_distance(p: &HypPoint, q: &HypPoint) -> f64 {
    let c = lorentz(p.coords(), q.coords());
    if c > 2.0 {
        return c.acosh();
    }
    // near the diagonal: 2 asinh(|p - q|_L / 2)
    let d = p.coords() - q.coords();
    let s = -lorentz(&d, &d);
    2.0 * (s.max(0.0).sqrt() / 2.0).asinh()
}

/// `[x, y]_o = 1/2 log(2 <o,x><o,y> / <x,y>)`.
pub fn gromov_product(x: &BoundaryPoint, y: &BoundaryPoint, o: &HypPoint) -> Result<f64> {
    let xy = boundary_pairing(x, y);
    if xy == 0.0 {
        return Err(Error::Degenerate("gromov product of a point with itself".into()));
    }
    let ox = lorentz(o.coords(), x.coords());
    let oy = lorentz(o.coords(), y.coords());
    Ok(0.5 * (2.0 * ox * oy / xy).ln())
}

/// `delta_o(x, y) = exp(-[x, y]_o)`, zero on the diagonal.
pub fn visual_distance(x: &BoundaryPoint, y: &BoundaryPoint, o: &HypPoint) -> f64 {
    let xy = boundary_pairing(x, y);
    let ox = lorentz(o.coords(), x.coords());
    let oy = lorentz(o.coords(), y.coords());
    (xy / (2.0 * ox * oy)).sqrt()
}

/// Point at signed parameter `s` on the geodesic from `y` (s -> -inf) to `x`.
pub fn geodesic_point(x: &BoundaryPoint, y: &BoundaryPoint, s: f64) -> Result<HypPoint> {
    let xy = boundary_pairing(x, y);
    if xy == 0.0 {
        return Err(Error::Degenerate("geodesic needs distinct endpoints".into()));
    }
    let c = 1.0 / (2.0 * xy).sqrt();
    HypPoint::new((x.coords() * s.exp() + y.coords() * (-s).exp()) * c)
}

/// Relative residual of `m^T J m = c J` for the scaled matrix.
pub fn lorentz_residual(m: &ProjectiveMatrix) -> f64 {
    let (f, _) = m.scaled();
    let j = lorentz_matrix(f.nrows() - 1);
    let s = f.transpose() * &j * f;
    let c = s[(0, 0)];
    (s - j * c).norm() / (f.norm() * f.norm())
}

fn check_lorentz(m: &ProjectiveMatrix) -> Result<()> {
    let r = lorentz_residual(m);
    if !(r <= LORENTZ_TOL) {
        return Err(Error::NotLorentz(r));
    }
    Ok(())
}

/// `lambda_1` of an element of SO(1,k); zero for elliptic or parabolic elements.
pub fn translation_length(m: &ProjectiveMatrix) -> Result<f64> {
    check_lorentz(m)?;
    Ok(jordan_projection(m)?.lambda1().max(0.0))
}

pub fn boundary_fixed_points(m: &ProjectiveMatrix) -> Result<(BoundaryPoint, BoundaryPoint)> {
    check_lorentz(m)?;
    let plus = proximality_data(m, PROXIMAL_TOL)?;
    let minus = proximality_data(&m.inverse(), PROXIMAL_TOL)?;
    match (plus, minus) {
        (Some(p), Some(q)) => Ok((
            BoundaryPoint::new(p.attracting_line)?,
            BoundaryPoint::new(q.attracting_line)?,
        )),
        _ => Err(Error::NotHyperbolic(jordan_projection(m)?.lambda1())),
    }
}

/// `B_{gamma+}(gamma^{-1} o, o)`: translation length through the Busemann function.
pub fn translation_length_busemann(m: &ProjectiveMatrix) -> Result<f64> {
    let (plus, _) = boundary_fixed_points(m)?;
    let o = HypPoint::origin(m.dim() - 1);
    let inv = m.inverse_entries();
    let p = HypPoint(&inv * o.coords());
    Ok(busemann(&plus, &p, &o))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub log_values: Vec<f64>,
}

/// Fitted slope of `n -> log delta_o(m^n x, gamma+)`.
///
/// Uses `delta_o(m^n x, gamma+) = delta_{m^{-n} o}(x, gamma+)`: the base point
/// recedes instead of `m^n x` collapsing onto `gamma+`, so nothing cancels.
pub fn contraction_rate_check(
    m: &ProjectiveMatrix,
    x: &BoundaryPoint,
    o: &HypPoint,
    iterations: usize,
) -> Result<RateFit> {
    if iterations < 2 {
        return Err(Error::InvalidArgument("need at least two iterations".into()));
    }
    let (plus, minus) = boundary_fixed_points(m)?;
    if x.chord(&minus) < 1e-12 {
        return Err(Error::Degenerate("x is the repelling fixed point".into()));
    }
    if x.chord(&plus) < 1e-12 {
        return Err(Error::Degenerate("x is the attracting fixed point".into()));
    }
    let (inv, inv_scale) = m.scaled_inverse();
    let xy = boundary_pairing(x, &plus).ln();
    let mut p = o.coords().clone();
    let mut log_scale = 0.0;
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        p = inv * p;
        let n = p.amax();
        p /= n;
        log_scale += n.ln() + inv_scale;
        let px = lorentz(&p, x.coords()).ln() + log_scale;
        let pz = lorentz(&p, plus.coords()).ln() + log_scale;
        out.push(0.5 * (xy - 2f64.ln() - px - pz));
    }
    let xs: Vec<f64> = (1..=out.len()).map(|n| n as f64).collect();
    Ok(RateFit {
        slope: ls_slope(&xs, &out),
        log_values: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{boost, klein_schottky, Axes, SchottkyParams};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bp(theta: f64) -> BoundaryPoint {
        BoundaryPoint::from_direction(&[theta.cos(), theta.sin()]).unwrap()
    }

    fn pm(m: DMatrix<f64>) -> ProjectiveMatrix {
        ProjectiveMatrix::new(m).unwrap()
    }

    // limit definition: d(p, sigma(s)) - d(q, sigma(s)) along a ray to z
    fn busemann_limit(z: &BoundaryPoint, p: &HypPoint, q: &HypPoint) -> f64 {
        let far = HypPoint::along(z.direction().as_slice(), 24.0);
        hyperbolic_distance(p, &far) - hyperbolic_distance(q, &far)
    }

    #[test]
    fn busemann_examples() {
        let z = bp(0.0);
        let o = HypPoint::origin(2);
        let s = 1.7;
        let q = HypPoint::along(&[1.0, 0.0], s);
        assert_relative_eq!(busemann(&z, &o, &q), s, epsilon = 1e-12);
        assert_relative_eq!(busemann_limit(&z, &o, &q), s, epsilon = 1e-8);
        assert_eq!(busemann(&z, &q, &q), 0.0);
        let r = HypPoint::along(&[0.6, 0.8], 0.9);
        let lhs = busemann(&z, &o, &q) + busemann(&z, &q, &r);
        assert_relative_eq!(lhs, busemann(&z, &o, &r), epsilon = 1e-12);
        let w = bp(2.2);
        assert_relative_eq!(busemann(&w, &q, &r), busemann_limit(&w, &q, &r), epsilon = 1e-7);
    }

    #[test]
    fn gromov_product_matches_limit_definition() {
        let o = HypPoint::origin(2);
        for &(a, b) in &[(0.0, 2.0), (0.3, 0.5), (1.0, 4.0)] {
            let (x, y) = (bp(a), bp(b));
            let g = gromov_product(&x, &y, &o).unwrap();
            for s in [-2.0, 0.0, 0.7, 3.0] {
                let p = geodesic_point(&x, &y, s).unwrap();
                let alt = 0.5 * (busemann_limit(&x, &o, &p) + busemann_limit(&y, &o, &p));
                assert_relative_eq!(g, alt, epsilon = 1e-7);
                let exact = 0.5 * (busemann(&x, &o, &p) + busemann(&y, &o, &p));
                assert_relative_eq!(g, exact, epsilon = 1e-9);
            }
            // sin(theta / 2) at the origin
            let theta = b - a;
            assert_relative_eq!(visual_distance(&x, &y, &o), (theta / 2.0).sin().abs(), epsilon = 1e-12);
        }
        // o on the geodesic
        let (x, y) = (bp(0.0), bp(std::f64::consts::PI));
        assert_relative_eq!(gromov_product(&x, &y, &o).unwrap(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(visual_distance(&x, &y, &o), 1.0, epsilon = 1e-12);
        assert!(gromov_product(&x, &x, &o).is_err());
        assert_eq!(visual_distance(&x, &x, &o), 0.0);
    }

    #[test]
    fn equivariance() {
        let g = boost(&[0.6, 0.8], 1.3);
        let o = HypPoint::origin(2);
        let (x, y) = (bp(0.4), bp(2.9));
        let (gx, gy, go) = (x.apply(&g).unwrap(), y.apply(&g).unwrap(), o.apply(&g).unwrap());
        assert_relative_eq!(
            gromov_product(&gx, &gy, &go).unwrap(),
            gromov_product(&x, &y, &o).unwrap(),
            epsilon = 1e-10
        );
        assert_relative_eq!(visual_distance(&gx, &gy, &go), visual_distance(&x, &y, &o), epsilon = 1e-12);
    }

    #[test]
    fn visual_metric_triangle_and_bilipschitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let o = HypPoint::origin(3);
        let o2 = HypPoint::along(&[0.0, 0.6, 0.8], 0.8);
        let dist = hyperbolic_distance(&o, &o2);
        let rand_bp = |rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x: &f64| x * x).sum::<f64>().sqrt();
            BoundaryPoint::from_direction(&v.iter().map(|x| x / n).collect::<Vec<_>>()).unwrap()
        };
        for _ in 0..10_000 {
            let (x, y, z) = (rand_bp(&mut rng), rand_bp(&mut rng), rand_bp(&mut rng));
            let (a, b, c) = (visual_distance(&x, &y, &o), visual_distance(&y, &z, &o), visual_distance(&x, &z, &o));
            assert!(c <= a + b + 1e-12);
            let r = visual_distance(&x, &y, &o2) / a;
            assert!(r <= dist.exp() * (1.0 + 1e-12) && r >= (-dist).exp() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn translation_lengths() {
        let m = pm(boost(&[1.0, 0.0], 1.3));
        assert_relative_eq!(translation_length(&m).unwrap(), 1.3, epsilon = 1e-12);
        assert_relative_eq!(translation_length_busemann(&m).unwrap(), 1.3, epsilon = 1e-12);
        let mut rot = DMatrix::identity(3, 3);
        let (c, s) = (0.4f64.cos(), 0.4f64.sin());
        rot[(1, 1)] = c;
        rot[(1, 2)] = -s;
        rot[(2, 1)] = s;
        rot[(2, 2)] = c;
        assert_relative_eq!(translation_length(&pm(rot.clone())).unwrap(), 0.0, epsilon = 1e-12);
        assert!(boundary_fixed_points(&pm(rot)).is_err());
        let bad = pm(DMatrix::from_row_slice(3, 3, &[2., 1., 0., 1., 1., 0., 0., 0., 1.]));
        assert!(matches!(translation_length(&bad), Err(Error::NotLorentz(_))));
    }

    #[test]
    fn translation_length_is_min_displacement() {
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (rep, _) = klein_schottky(&p).unwrap();
        let m = rep.evaluate(&"aB".parse().unwrap()).unwrap();
        let (plus, minus) = boundary_fixed_points(&m).unwrap();
        let e = m.entries();
        let best = (-400..=400)
            .map(|i| {
                let q = geodesic_point(&plus, &minus, i as f64 * 0.01).unwrap();
                hyperbolic_distance(&q, &q.apply(&e).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(best, translation_length(&m).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn fixed_points() {
        let m = pm(boost(&[1.0, 0.0, 0.0], 0.9));
        let (p, q) = boundary_fixed_points(&m).unwrap();
        assert_relative_eq!(p.coords(), &DVector::from_column_slice(&[1.0, 1.0, 0.0, 0.0]), epsilon = 1e-12);
        assert_relative_eq!(q.coords(), &DVector::from_column_slice(&[1.0, -1.0, 0.0, 0.0]), epsilon = 1e-12);
        let (pi, qi) = boundary_fixed_points(&m.inverse()).unwrap();
        assert!(pi.chord(&q) < 1e-12 && qi.chord(&p) < 1e-12);
        let g = pm(boost(&[0.0, 0.6, 0.8], 0.7));
        let (cp, cq) = boundary_fixed_points(&m.conjugate_by(&g)).unwrap();
        assert!(cp.chord(&p.apply(&g.entries()).unwrap()) < 1e-10);
        assert!(cq.chord(&q.apply(&g.entries()).unwrap()) < 1e-10);
    }

    #[test]
    fn contraction_rates() {
        let o = HypPoint::origin(2);
        let x = bp(2.0);
        let m1 = pm(boost(&[0.6, 0.8], 1.0));
        let r1 = contraction_rate_check(&m1, &x, &o, 50).unwrap();
        assert!((r1.slope + 1.0).abs() <= 0.01);
        let m2 = pm(boost(&[0.6, 0.8], 2.0));
        let r2 = contraction_rate_check(&m2, &x, &o, 50).unwrap();
        assert!((r2.slope / r1.slope - 2.0).abs() <= 0.02);
        // direct evaluation agrees while it is still representable
        let (plus, _) = boundary_fixed_points(&m1).unwrap();
        let mut y = x.clone();
        for n in 0..5 {
            y = y.apply(&m1.entries()).unwrap();
            assert_relative_eq!(visual_distance(&y, &plus, &o).ln(), r1.log_values[n], epsilon = 1e-9);
        }
        assert!(contraction_rate_check(&m1, &plus, &o, 10).is_err());
    }
}
