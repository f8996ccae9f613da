//! Root data for A, B, C and G2, chamber barycenters in exact arithmetic, and
//! sampled maximization of the ratio functions over the Weyl chamber.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parallel shards in every chamber sweep; fixed so results do not depend on
/// the thread count.
pub const SHARDS: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeylKind {
    A,
    B,
    C,
    G2,
}

impl fmt::Display for WeylKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeylKind::A => "A",
            WeylKind::B => "B",
            WeylKind::C => "C",
            WeylKind::G2 => "G2",
        })
    }
}

impl std::str::FromStr for WeylKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(WeylKind::A),
            "B" => Ok(WeylKind::B),
            "C" => Ok(WeylKind::C),
            "G2" => Ok(WeylKind::G2),
            _ => Err(Error::InvalidArgument(format!("unknown root system kind {s:?}"))),
        }
    }
}

type Q = Rational64;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootSystem {
    pub kind: WeylKind,
    pub parameter: usize,
    /// Dimension of the defining projective representation.
    pub ambient_d: usize,
    /// Number of Cartan coordinates.
    pub coords: usize,
    pub simple_roots: Vec<Vec<Q>>,
    pub highest_weight: Vec<Q>,
    /// Linear constraints cutting the Cartan subspace out of the coordinates.
    pub constraints: Vec<Vec<Q>>,
}

fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n];
    v[i] = Q::one();
    v
}

fn consecutive(n: usize) -> Vec<Vec<Q>> {
    (0..n - 1)
        .map(|i| {
            let mut v = unit(n, i);
            v[i + 1] = -Q::one();
            v
        })
        .collect()
}

/// Root data of the defining representation; the parameter is the rank
/// (`A(d-1)` with `d - 1`, `B(n)`, `C(n)` with `n`, and `2` for `G2`).
pub fn root_system(kind: WeylKind, parameter: usize) -> Result<RootSystem> {
    let bad = || Error::InvalidArgument(format!("{kind}({parameter}) is not a valid root system"));
    Ok(match kind {
        WeylKind::A => {
            if parameter < 1 {
                return Err(bad());
            }
            let d = parameter + 1;
            RootSystem {
                kind,
                parameter,
                ambient_d: d,
                coords: d,
                simple_roots: consecutive(d),
                highest_weight: unit(d, 0),
                constraints: vec![vec![Q::one(); d]],
            }
        }
        WeylKind::B | WeylKind::C => {
            if parameter < 2 {
                return Err(bad());
            }
            let n = parameter;
            let mut roots = consecutive(n);
            let mut last = unit(n, n - 1);
            if kind == WeylKind::C {
                last[n - 1] = q(2);
            }
            roots.push(last);
            RootSystem {
                kind,
                parameter,
                ambient_d: if kind == WeylKind::C { 2 * n } else { 2 * n + 1 },
                coords: n,
                simple_roots: roots,
                highest_weight: unit(n, 0),
                constraints: Vec::new(),
            }
        }
        WeylKind::G2 => {
            if parameter != 2 {
                return Err(bad());
            }
            RootSystem {
                kind,
                parameter,
                ambient_d: 7,
                coords: 3,
                simple_roots: vec![vec![q(1), q(-1), q(0)], vec![q(-2), q(1), q(1)]],
                highest_weight: vec![q(0), q(-1), q(1)],
                constraints: vec![vec![q(1); 3]],
            }
        }
    })
}

impl RootSystem {
    pub fn rank(&self) -> usize {
        self.simple_roots.len()
    }

    pub fn name(&self) -> String {
        format!("{}({})", self.kind, self.parameter)
    }

    /// The opposition involution on Cartan coordinates.
    pub fn opposition(&self, a: &[f64]) -> Vec<f64> {
        match self.kind {
            WeylKind::A => a.iter().rev().map(|x| -x).collect(),
            _ => a.to_vec(),
        }
    }

    /// `(chi + chi o iota) / 2` as a coefficient vector.
    pub fn hilbert_functional(&self) -> Vec<f64> {
        let chi = to_f64(&self.highest_weight);
        match self.kind {
            // chi o iota (a) = chi(-reverse a)
            WeylKind::A => {
                let rev: Vec<f64> = chi.iter().rev().map(|x| -x).collect();
                chi.iter().zip(rev).map(|(a, b)| (a + b) / 2.0).collect()
            }
            _ => chi,
        }
    }

    pub fn simple_roots_f64(&self) -> Vec<Vec<f64>> {
        self.simple_roots.iter().map(|r| to_f64(r)).collect()
    }
}

pub fn to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

fn dot_q(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves a square rational system by Gauss-Jordan elimination.
fn solve_q(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let p = m[col][col];
        for c in col..n {
            m[col][c] /= p;
        }
        rhs[col] /= p;
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col];
                for c in col..n {
                    let v = m[col][c];
                    m[r][c] -= f * v;
                }
                let v = rhs[col];
                rhs[r] -= f * v;
            }
        }
    }
    Some(rhs)
}

/// Point of the Cartan subspace with prescribed simple-root values.
fn with_root_values(rs: &RootSystem, values: &[Q]) -> Vec<Q> {
    let mut m = rs.simple_roots.clone();
    m.extend(rs.constraints.iter().cloned());
    let mut rhs = values.to_vec();
    rhs.extend(std::iter::repeat_n(Q::zero(), rs.constraints.len()));
    solve_q(m, rhs).expect("simple roots and constraints are independent")
}

/// The point where every simple root equals 1.
pub fn barycenter(rs: &RootSystem) -> Vec<Q> {
    with_root_values(rs, &vec![Q::one(); rs.rank()])
}

/// `alpha(bar) / chi(bar)` for each simple root.
pub fn ratio_bounds_per_root(rs: &RootSystem) -> Vec<Q> {
    let bar = barycenter(rs);
    let chi = dot_q(&rs.highest_weight, &bar);
    rs.simple_roots.iter().map(|r| dot_q(r, &bar) / chi).collect()
}

pub fn ratio_bound(rs: &RootSystem) -> Q {
    ratio_bounds_per_root(rs)[0]
}

/// `min{(a1 - a2), (a_{d-1} - a_d)} / a1`.
pub fn v1(a: &[f64]) -> Result<f64> {
    let d = a.len();
    if d < 2 || !(a[0] > 0.0) {
        return Err(Error::Degenerate("V1 needs a1 > 0".into()));
    }
    Ok((a[0] - a[1]).min(a[d - 2] - a[d - 1]) / a[0])
}

/// `min{(a1 - a2), (a_{d-1} - a_d)} / ((a1 - a_d) / 2)`.
pub fn v2(a: &[f64]) -> Result<f64> {
    let d = a.len();
    let den = if d >= 2 { (a[0] - a[d - 1]) / 2.0 } else { 0.0 };
    if !(den > 0.0) {
        return Err(Error::Degenerate("V2 needs a1 > a_d".into()));
    }
    Ok((a[0] - a[1]).min(a[d - 2] - a[d - 1]) / den)
}

/// `min over simple roots of alpha(a) / phi(a)`.
pub fn vphi(rs: &RootSystem, phi: &[f64], a: &[f64]) -> Result<f64> {
    let den = dot(phi, a);
    if !(den > 0.0) {
        return Err(Error::Degenerate("phi must be positive on the chamber point".into()));
    }
    Ok(rs
        .simple_roots
        .iter()
        .map(|r| to_f64(r))
        .map(|r| dot(&r, a) / den)
        .fold(f64::INFINITY, f64::min))
}

/// Dirichlet(1) rays in simple-root coordinates.
#[derive(Clone, Debug)]
pub struct ChamberSampler {
    /// `coweights[j]` has `alpha_i = delta_ij`.
    coweights: Vec<Vec<f64>>,
    coords: usize,
}

impl ChamberSampler {
    pub fn new(rs: &RootSystem) -> Self {
        let coweights = (0..rs.rank())
            .map(|j| {
                let vals: Vec<Q> = (0..rs.rank()).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
                to_f64(&with_root_values(rs, &vals))
            })
            .collect();
        ChamberSampler {
            coweights,
            coords: rs.coords,
        }
    }

    pub fn sample_into(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut s = 0.0;
        for c in &self.coweights {
            let wj: f64 = Exp1.sample(rng);
            s += wj;
            for (o, ci) in out.iter_mut().zip(c) {
                *o += wj * ci;
            }
        }
        out.iter_mut().for_each(|x| *x /= s);
    }

    pub fn coords(&self) -> usize {
        self.coords
    }
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Folds `n` chamber samples across [`SHARDS`] streams, merging in shard order.
pub fn chamber_fold<T, I, S, M>(rs: &RootSystem, n: u64, seed: u64, init: I, step: S, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync,
    S: Fn(T, &[f64]) -> T + Sync,
    M: Fn(T, T) -> T,
{
    let sampler = ChamberSampler::new(rs);
    let parts: Vec<T> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = n / SHARDS + u64::from(shard < n % SHARDS);
            let mut rng = shard_rng(seed, shard);
            let mut buf = vec![0.0; sampler.coords()];
            let mut acc = init();
            for _ in 0..count {
                sampler.sample_into(&mut rng, &mut buf);
                acc = step(acc, &buf);
            }
            acc
        })
        .collect();
    parts.into_iter().reduce(merge).unwrap_or_else(init)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChamberMax {
    pub max: f64,
    pub argmax: Vec<f64>,
    pub samples: u64,
    /// Samples where `f` was undefined.
    pub skipped: u64,
}

pub fn chamber_max_sample<F>(f: F, rs: &RootSystem, n: u64, seed: u64) -> Result<ChamberMax>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let out = chamber_fold(
        rs,
        n,
        seed,
        || ChamberMax {
            max: f64::NEG_INFINITY,
            argmax: Vec::new(),
            samples: 0,
            skipped: 0,
        },
        |mut acc, a| {
            acc.samples += 1;
            match f(a) {
                Ok(v) if v > acc.max => {
                    acc.max = v;
                    acc.argmax = a.to_vec();
                }
                Ok(_) => {}
                Err(_) => acc.skipped += 1,
            }
            acc
        },
        |a, b| ChamberMax {
            max: a.max.max(b.max),
            argmax: if b.max > a.max { b.argmax } else { a.argmax },
            samples: a.samples + b.samples,
            skipped: a.skipped + b.skipped,
        },
    );
    Ok(out)
}

/// Angle between two rays.
pub fn angular_distance(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt());
    c.clamp(-1.0, 1.0).acos()
}

/// `x -> w . x + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub w: Vec<f64>,
    pub c: f64,
}

impl Affine {
    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.c
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EqualizerReport {
    pub sampled_max: f64,
    pub equal_point: Vec<f64>,
    pub equal_value: f64,
    /// `equal_value - sampled_max`; never below `-1e-6` when the claim holds.
    pub gap: f64,
    pub passed: bool,
}

fn solve_f64(a: nalgebra::DMatrix<f64>, b: nalgebra::DVector<f64>) -> Result<nalgebra::DVector<f64>> {
    a.lu().solve(&b).ok_or(Error::Singular)
}

/// Samples `min_i phi_i` over the simplex `{phi_i >= 0}` and compares its max
/// with the value at the point where all `phi_i` agree.
pub fn simplex_equalizer_check(phis: &[Affine], n_samples: u64, seed: u64) -> Result<EqualizerReport> {
    use nalgebra::{DMatrix, DVector};
    let n = phis.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| {
        Error::InvalidArgument("need n + 1 >= 2 affine maps".into())
    })?;
    if phis.iter().any(|p| p.w.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: phis.iter().map(|p| p.w.len()).find(|&l| l != n).unwrap_or(0),
        });
    }
    // vertex j: all maps but the j-th vanish
    let mut vertices = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let rows: Vec<&Affine> = phis.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, p)| p).collect();
        let a = DMatrix::from_fn(n, n, |r, c| rows[r].w[c]);
        let b = DVector::from_fn(n, |r, _| -rows[r].c);
        let v = solve_f64(a, b).map_err(|_| Error::Degenerate("affine maps are not in general position".into()))?;
        if !(phis[j].eval(v.as_slice()) > 0.0) {
            return Err(Error::Degenerate("region {phi_i >= 0} is not a bounded simplex".into()));
        }
        vertices.push(v);
    }
    let a = DMatrix::from_fn(n, n, |r, c| phis[r + 1].w[c] - phis[0].w[c]);
    let b = DVector::from_fn(n, |r, _| phis[0].c - phis[r + 1].c);
    let eq = solve_f64(a, b)?;
    let equal_value = phis[0].eval(eq.as_slice());
    let parts: Vec<f64> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = n_samples / SHARDS + u64::from(shard < n_samples % SHARDS);
            let mut rng = shard_rng(seed, shard);
            let mut best = f64::NEG_INFINITY;
            let mut x = vec![0.0; n];
            for _ in 0..count {
                let w: Vec<f64> = (0..=n).map(|_| Exp1.sample(&mut rng)).collect();
                let s: f64 = w.iter().sum();
                x.iter_mut().for_each(|v| *v = 0.0);
                for (wj, v) in w.iter().zip(&vertices) {
                    for (xi, vi) in x.iter_mut().zip(v.iter()) {
                        *xi += wj / s * vi;
                    }
                }
                best = best.max(phis.iter().map(|p| p.eval(&x)).fold(f64::INFINITY, f64::min));
            }
            best
        })
        .collect();
    let sampled_max = parts.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let gap = equal_value - sampled_max;
    Ok(EqualizerReport {
        sampled_max,
        equal_point: eq.as_slice().to_vec(),
        equal_value,
        gap,
        passed: gap >= -1e-6,
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct A2Report {
    pub checked: u64,
    /// Points with `a2 >= 0`, outside the hypothesis.
    pub excluded: u64,
    pub violations: u64,
}

/// Counts points with `a2 < 0` where `a1 - a2 > a_{d-1} - a_d` fails.
pub fn remark_a2_check<'a, I>(points: I) -> A2Report
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut r = A2Report::default();
    for a in points {
        a2_step(&mut r, a);
    }
    r
}

fn a2_step(r: &mut A2Report, a: &[f64]) {
    let d = a.len();
    if d < 3 || !(a[1] < 0.0) {
        r.excluded += 1;
        return;
    }
    r.checked += 1;
    if !(a[0] - a[1] > a[d - 2] - a[d - 1]) {
        r.violations += 1;
    }
}

/// [`remark_a2_check`] over `n` sampled points of the `A(d-1)` chamber.
pub fn remark_a2_sweep(d: usize, n: u64, seed: u64) -> Result<A2Report> {
    if d < 3 {
        return Err(Error::InvalidArgument("remark check needs d >= 3".into()));
    }
    let rs = root_system(WeylKind::A, d - 1)?;
    Ok(chamber_fold(
        &rs,
        n,
        seed,
        A2Report::default,
        |mut r, a| {
            a2_step(&mut r, a);
            r
        },
        |a, b| A2Report {
            checked: a.checked + b.checked,
            excluded: a.excluded + b.excluded,
            violations: a.violations + b.violations,
        },
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub kind: WeylKind,
    pub parameter: usize,
    pub d: usize,
    pub barycenter: String,
    pub ratio_bound: String,
}

pub fn format_vector(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(" "))
}

/// The default table: `A(d-1)` for `d = 3..=8`, `B(n)` and `C(n)` for `n = 2..=4`, and `G2`.
pub fn weyl_table() -> Vec<WeylRow> {
    let mut specs: Vec<(WeylKind, usize)> = (2..=7).map(|p| (WeylKind::A, p)).collect();
    specs.extend((2..=4).map(|n| (WeylKind::C, n)));
    specs.extend((2..=4).map(|n| (WeylKind::B, n)));
    specs.push((WeylKind::G2, 2));
    specs
        .into_iter()
        .map(|(k, p)| {
            let rs = root_system(k, p).expect("table entries are valid");
            WeylRow {
                kind: k,
                parameter: p,
                d: rs.ambient_d,
                barycenter: format_vector(&barycenter(&rs)),
                ratio_bound: ratio_bound(&rs).to_string(),
            }
        })
        .collect()
}

pub fn write_weyl_csv<W: std::io::Write>(rows: &[WeylRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "parameter", "d", "barycenter", "ratio_bound"])?;
    for r in rows {
        w.write_record([
            r.kind.to_string(),
            r.parameter.to_string(),
            r.d.to_string(),
            r.barycenter.clone(),
            r.ratio_bound.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
