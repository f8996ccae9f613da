//! Jordan projections, proximality, and contraction rates.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reps::{exterior_power_rep, ProjectiveMatrix, Representation};
use crate::words::Word;

/// Default gap below which an element is treated as not proximal.
pub const PROXIMAL_TOL: f64 = 1e-8;

const SCHUR_MAX_ITER: usize = 5_000;
// deflation thresholds tried in order; clustered spectra need the looser ones
const SCHUR_EPS: [f64; 4] = [f64::EPSILON, 1e-14, 1e-13, 1e-12];
const SCHUR_RESIDUAL_TOL: f64 = 1e-8;
const SCHUR_RETRIES: u64 = 4;

/// Log-moduli of eigenvalues in nonincreasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanVector(Vec<f64>);

impl JordanVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidArgument("jordan vector needs finite entries".into()));
        }
        if values.windows(2).any(|p| p[0] < p[1]) {
            return Err(Error::InvalidArgument("jordan vector must be nonincreasing".into()));
        }
        Ok(JordanVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn lambda1(&self) -> f64 {
        self.0[0]
    }

    pub fn lambda_d(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// `lambda_{i} - lambda_{i+1}`, zero-based.
    pub fn gap(&self, i: usize) -> f64 {
        self.0[i] - self.0[i + 1]
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `-reverse(lambda)`, the Jordan projection of the inverse.
    pub fn opposition(&self) -> JordanVector {
        JordanVector(self.0.iter().rev().map(|x| -x).collect())
    }
}

fn sort_by_modulus(mut ev: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    ev
}

/// Eigenvalues by real Schur decomposition, ordered by decreasing modulus.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let d = m.nrows();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenSolver {
            dim: d,
            residual: f64::NAN,
        });
    }
    // QR iteration can stall on clustered moduli; orthogonal conjugates
    // have the same spectrum and usually converge.
    let mut last = f64::INFINITY;
    for attempt in 0..=SCHUR_RETRIES {
        let a = if attempt == 0 {
            m.clone()
        } else {
            let q = random_orthogonal(d, attempt);
            q.transpose() * m * &q
        };
        let Some(schur) = SCHUR_EPS.iter().find_map(|&eps| a.clone().try_schur(eps, SCHUR_MAX_ITER)) else {
            continue;
        };
        let ev = schur.complex_eigenvalues();
        let (q, t) = schur.unpack();
        let scale = a.norm().max(f64::MIN_POSITIVE);
        let residual = (&a * &q - &q * t).norm() / scale;
        if residual <= SCHUR_RESIDUAL_TOL {
            return Ok(sort_by_modulus(ev.iter().copied().collect()));
        }
        last = residual;
    }
    Err(Error::EigenSolver { dim: d, residual: last })
}

fn random_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    g.qr().q()
}

fn log_moduli(m: &DMatrix<f64>, log_scale: f64) -> Result<Vec<f64>> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm().ln() + log_scale).collect())
}

/// Jordan projection of a projective matrix.
///
/// Each entry comes from whichever of `m`, `m^{-1}` has it in the upper
/// half of its spectrum, where relative accuracy is best.
pub fn jordan_projection(m: &ProjectiveMatrix) -> Result<JordanVector> {
    let (f, fs) = m.scaled();
    let (b, bs) = m.scaled_inverse();
    let fwd = log_moduli(f, fs)?;
    let bwd: Vec<f64> = log_moduli(b, bs)?.into_iter().rev().map(|x| -x).collect();
    let d = fwd.len();
    let mid = 0.5 * (fwd[0] + bwd[d - 1]);
    let mut vals: Vec<f64> = (0..d).map(|i| if fwd[i] > mid { fwd[i] } else { bwd[i] }).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    JordanVector::new(vals)
}

/// `lambda_1` alone, from the top eigenvalue.
pub fn lambda1(m: &ProjectiveMatrix) -> Result<f64> {
    let (f, fs) = m.scaled();
    Ok(eigenvalues(f)?[0].norm().ln() + fs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProximalData {
    pub attracting_line: DVector<f64>,
    pub repelling_covector: DVector<f64>,
    pub gap: f64,
    /// Top eigenvalue of the scaled matrix (signed).
    pub top_eigenvalue: f64,
}

/// Unit vector with its largest-magnitude entry positive.
pub fn canonical_sign(v: DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    let v = v / n;
    let imax = v.iamax();
    if v[imax] < 0.0 {
        -v
    } else {
        v
    }
}

fn eigenvector_for(m: &DMatrix<f64>, mu: f64) -> Result<DVector<f64>> {
    let d = m.nrows();
    let mut x = DVector::from_fn(d, |i, _| 1.0 + 0.1 * i as f64 + 0.01 * (i * i) as f64);
    let mut shift = mu;
    let mut lu = (m - DMatrix::identity(d, d) * shift).lu();
    for _ in 0..4 {
        let y = match lu.solve(&x) {
            Some(y) if y.iter().all(|v| v.is_finite()) && y.norm() > 0.0 => y,
            _ => {
                shift = mu * (1.0 + 1e-12) + 1e-300;
                lu = (m - DMatrix::identity(d, d) * shift).lu();
                continue;
            }
        };
        x = &y / y.norm();
    }
    for _ in 0..2 {
        let y = m * &x;
        let n = y.norm();
        if n > 0.0 && n.is_finite() {
            x = y / n;
        }
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::EigenSolver {
            dim: d,
            residual: f64::NAN,
        });
    }
    Ok(canonical_sign(x))
}

/// Attracting line and repelling covector, or `None` when not proximal.
pub fn proximality_data(m: &ProjectiveMatrix, tol: f64) -> Result<Option<ProximalData>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let (f, _) = m.scaled();
    let ev = eigenvalues(f)?;
    if ev.len() < 2 {
        return Err(Error::InvalidArgument("proximality needs d >= 2".into()));
    }
    let gap = ev[0].norm().ln() - ev[1].norm().ln();
    if !(gap > tol) || ev[0].im.abs() > 1e-12 * ev[0].norm() {
        return Ok(None);
    }
    let mu = ev[0].re;
    let line = eigenvector_for(f, mu)?;
    let covector = eigenvector_for(&f.transpose(), mu)?;
    Ok(Some(ProximalData {
        attracting_line: line,
        repelling_covector: covector,
        gap,
        top_eigenvalue: mu,
    }))
}

/// Sine of the angle between two lines.
pub fn projective_distance(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return f64::NAN;
    }
    let (u, v) = (u / nu, v / nv);
    let w = &u - &v * u.dot(&v);
    w.norm().min(1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenoistRate {
    pub slope: f64,
    /// `log d_P(m^n v, m_+)` for `n = 1..`.
    pub log_distances: Vec<f64>,
    pub short_run: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Fitted slope of `n -> log d_P(m^n v, m_+)`.
///
/// `v` is split as `a e_+ + w` with `w` in the repelling hyperplane, and `w`
/// is iterated on its own so the distance never underflows.
pub fn benoist_rate(m: &ProjectiveMatrix, v: &DVector<f64>, iterations: usize) -> Result<BenoistRate> {
    if iterations < 2 {
        return Err(Error::InvalidArgument("need at least two iterations".into()));
    }
    if v.len() != m.dim() {
        return Err(Error::Dimension {
            expected: m.dim(),
            got: v.len(),
        });
    }
    let data = proximality_data(m, PROXIMAL_TOL)?.ok_or_else(|| Error::NotProximal {
        word: "<matrix>".into(),
    })?;
    let e = &data.attracting_line;
    let theta = &data.repelling_covector;
    let vn = v / v.norm();
    if projective_distance(&vn, e) < 1e-12 {
        return Err(Error::Degenerate("v lies on the attracting line".into()));
    }
    let te = theta.dot(e);
    if (theta.dot(&vn)).abs() < 1e-12 {
        return Err(Error::Degenerate("v lies in the repelling hyperplane".into()));
    }
    let (f, _) = m.scaled();
    let mu = data.top_eigenvalue;
    let a = theta.dot(&vn) / te;
    let mut w = &vn - e * a;
    let mut s = w.norm().ln();
    w /= w.norm();
    let mut out = Vec::with_capacity(iterations);
    let mut short_run = false;
    for n in 1..=iterations {
        let mut y = f * &w;
        y -= e * (theta.dot(&y) / te);
        let ny = y.norm();
        if !(ny > 0.0) || !ny.is_finite() {
            short_run = true;
            break;
        }
        s += ny.ln();
        w = y / ny;
        let perp = (&w - e * e.dot(&w)).norm();
        let head = a.abs().ln() + n as f64 * mu.abs().ln();
        let sigma = if (a < 0.0) ^ (mu < 0.0 && n % 2 == 1) { -1.0 } else { 1.0 };
        let r = (s - head).exp();
        let denom = head + (e + &w * (sigma * r)).norm().ln();
        let ld = s + perp.ln() - denom;
        if !ld.is_finite() {
            short_run = true;
            break;
        }
        out.push(ld);
    }
    if out.len() < 2 {
        return Err(Error::Degenerate("contraction underflowed immediately".into()));
    }
    let xs: Vec<f64> = (1..=out.len()).map(|n| n as f64).collect();
    Ok(BenoistRate {
        slope: ls_slope(&xs, &out),
        log_distances: out,
        short_run,
    })
}

/// Jordan projections of words through the exterior-power ladder:
/// `lambda_1 + ... + lambda_k` is the top log-modulus of `Λ^k rho(w)`.
///
/// Every entry is a top eigenvalue of some product, so middle entries keep
/// full relative accuracy on long words.
#[derive(Clone, Debug)]
pub struct JordanEvaluator {
    ladder: Vec<Representation>,
}

impl JordanEvaluator {
    pub fn new(rep: &Representation) -> Result<Self> {
        let d = rep.dim();
        let mut ladder = vec![rep.clone()];
        for k in 2..d {
            ladder.push(exterior_power_rep(rep, k)?);
        }
        Ok(JordanEvaluator { ladder })
    }

    pub fn dim(&self) -> usize {
        self.ladder[0].dim()
    }

    pub fn jordan(&self, w: &Word) -> Result<JordanVector> {
        let d = self.dim();
        let mut partial = Vec::with_capacity(d + 1);
        partial.push(0.0);
        for rep in &self.ladder {
            partial.push(lambda1(&rep.evaluate(w)?)?);
        }
        partial.push(0.0);
        let mut vals: Vec<f64> = partial.windows(2).map(|p| p[1] - p[0]).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        JordanVector::new(vals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::diag;
    use approx::assert_relative_eq;

    fn pm(rows: usize, data: &[f64]) -> ProjectiveMatrix {
        ProjectiveMatrix::new(DMatrix::from_row_slice(rows, rows, data)).unwrap()
    }

    #[test]
    fn jordan_examples() {
        let j = jordan_projection(&diag(&[4.0, 2.0, 0.5, 0.25]).unwrap()).unwrap();
        let l2 = 2f64.ln();
        for (a, b) in j.values().iter().zip([2.0 * l2, l2, -l2, -2.0 * l2]) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        let j = jordan_projection(&pm(2, &[2.0, 1.0, 1.0, 1.0])).unwrap();
        let phi = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert_relative_eq!(j.lambda1(), phi, epsilon = 1e-12);
        assert_relative_eq!(j.lambda_d(), -phi, epsilon = 1e-12);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let j = jordan_projection(&pm(2, &[c, -s, s, c])).unwrap();
        assert!(j.values().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn proximal_examples() {
        let p = proximality_data(&diag(&[2.0, 1.0, 0.5]).unwrap(), PROXIMAL_TOL).unwrap().unwrap();
        assert_relative_eq!(p.attracting_line, DVector::from_column_slice(&[1.0, 0.0, 0.0]), epsilon = 1e-12);
        assert_relative_eq!(p.repelling_covector, DVector::from_column_slice(&[1.0, 0.0, 0.0]), epsilon = 1e-12);
        assert_relative_eq!(p.gap, 2f64.ln(), epsilon = 1e-12);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        assert!(proximality_data(&pm(2, &[c, -s, s, c]), PROXIMAL_TOL).unwrap().is_none());
    }

    #[test]
    fn benoist_diagonal() {
        let m = diag(&[4.0, 2.0, 0.5]).unwrap();
        let r = benoist_rate(&m, &DVector::from_column_slice(&[1.0, 1.0, 1.0]), 60).unwrap();
        assert_relative_eq!(r.slope, -(2f64.ln()), epsilon = 1e-3);
        let tail = &r.log_distances[40..];
        for p in tail.windows(2) {
            assert_relative_eq!(p[1] - p[0], -(2f64.ln()), epsilon = 1e-9);
        }
        assert!(!r.short_run);
        assert!(benoist_rate(&m, &DVector::from_column_slice(&[1.0, 0.0, 0.0]), 10).is_err());
        assert!(benoist_rate(&m, &DVector::from_column_slice(&[0.0, 1.0, 1.0]), 10).is_err());
    }

    #[test]
    fn distance_is_sine() {
        let u = DVector::from_column_slice(&[1.0, 0.0]);
        let v = DVector::from_column_slice(&[1.0, 1.0]);
        assert_relative_eq!(projective_distance(&u, &v), 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(projective_distance(&u, &(-&u)), 0.0);
        let w = DVector::from_column_slice(&[1.0, 1e-13]);
        assert_relative_eq!(projective_distance(&u, &w), 1e-13, max_relative = 1e-6);
    }

    #[test]
    fn ladder_matches_direct_on_short_words() {
        use crate::reps::{psl2_schottky, sym_power_rep, Axes, SchottkyParams};
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (r2, _) = psl2_schottky(&p).unwrap();
        let r = sym_power_rep(&r2, 4).unwrap();
        let ev = JordanEvaluator::new(&r).unwrap();
        for w in ["a", "ab", "aBab"] {
            let w: Word = w.parse().unwrap();
            let a = ev.jordan(&w).unwrap();
            let b = jordan_projection(&r.evaluate(&w).unwrap()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_relative_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
            prop::collection::vec(-2.0f64..2.0, d * d)
                .prop_map(move |v| DMatrix::from_row_slice(d, d, &v) + DMatrix::identity(d, d) * 0.5)
                .prop_filter("invertible", |m| m.determinant().abs() > 1e-3)
        }

        proptest! {
            #[test]
            fn opposition_and_powers(m in matrix(4)) {
                let g = ProjectiveMatrix::new(m).unwrap();
                let j = jordan_projection(&g).unwrap();
                prop_assert!(j.sum().abs() < 1e-9);
                let ji = jordan_projection(&g.inverse()).unwrap();
                for (a, b) in ji.values().iter().zip(j.opposition().values()) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
                let j3 = jordan_projection(&g.pow(3)).unwrap();
                for (a, b) in j3.values().iter().zip(j.values()) {
                    prop_assert!((a - 3.0 * b).abs() < 1e-7 * (1.0 + b.abs()));
                }
            }

            #[test]
            fn wedge_square_is_pairwise_sums(m in matrix(4)) {
                let g = ProjectiveMatrix::new(m).unwrap();
                let j = jordan_projection(&g).unwrap();
                let w = crate::reps::exterior_power_matrix(&g.entries(), 2).unwrap();
                let jw = jordan_projection(&ProjectiveMatrix::new(w).unwrap()).unwrap();
                let v = j.values();
                let mut sums: Vec<f64> = (0..4).flat_map(|i| (i+1..4).map(move |k| (i, k))).map(|(i, k)| v[i] + v[k]).collect();
                sums.sort_by(|a, b| b.total_cmp(a));
                for (a, b) in jw.values().iter().zip(&sums) {
                    prop_assert!((a - b).abs() < 1e-7);
                }
            }

            #[test]
            fn attracting_line_is_fixed(m in matrix(5)) {
                let g = ProjectiveMatrix::new(m).unwrap();
                if let Some(p) = proximality_data(&g, PROXIMAL_TOL).unwrap() {
                    if p.gap > 1e-3 {
                        let img = g.entries() * &p.attracting_line;
                        prop_assert!(projective_distance(&img, &p.attracting_line) <= 1e-9);
                        let cov = g.entries().transpose() * &p.repelling_covector;
                        prop_assert!(projective_distance(&cov, &p.repelling_covector) <= 1e-9);
                    }
                }
            }
        }
    }
}
