use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::lattice::check_budget;
use crate::error::{Error, Result};
use crate::seq::{decreasing_rearrangement, SingularSequence};

const RESIDUAL_BOUND: f64 = 1e-8;
const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 0;

/// Finitely supported Fourier coefficients `f^(m)`, `m in Z^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierMultiplier {
    dimension: u32,
    coefficients: BTreeMap<Vec<i64>, Complex64>,
}

impl FourierMultiplier {
    pub fn new(dimension: u32, coefficients: Vec<(Vec<i64>, Complex64)>) -> Result<Self> {
        if !(1..=3).contains(&dimension) {
            return Err(Error::InvalidArgument(format!("dimension {dimension} not in 1..=3")));
        }
        let mut map = BTreeMap::new();
        for (m, c) in coefficients {
            if m.len() != dimension as usize {
                return Err(Error::InvalidArgument(format!("index {m:?} has the wrong dimension")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidArgument(format!("coefficient at {m:?} is not finite")));
            }
            *map.entry(m).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        map.retain(|_, c| c.norm() != 0.0);
        Ok(Self { dimension, coefficients: map })
    }

    pub fn constant(dimension: u32, c: f64) -> Result<Self> {
        Self::new(dimension, vec![(vec![0; dimension as usize], Complex64::new(c, 0.0))])
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn coefficient(&self, m: &[i64]) -> Complex64 {
        self.coefficients.get(m).copied().unwrap_or_default()
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coefficient(&vec![0; self.dimension as usize])
    }

    pub fn support(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.coefficients.iter()
    }

    /// `f^(-m) = conj f^(m)` exactly, i.e. `f` is real-valued.
    pub fn is_real(&self) -> bool {
        self.coefficients.iter().all(|(m, c)| {
            let neg: Vec<i64> = m.iter().map(|v| -v).collect();
            self.coefficient(&neg) == c.conj()
        })
    }

    /// Largest `|m_i|` over the support.
    pub fn support_halfwidth(&self) -> i64 {
        self.coefficients.keys().flat_map(|m| m.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    /// `f(x) = sum_m f^(m) e^{i m.x}`.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coefficients
            .iter()
            .map(|(m, c)| {
                let phase: f64 = m.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }
}

/// Bijection `Z -> N`: `0, -1, 1, -2, 2, ...`.
fn fold(z: i64) -> u128 {
    if z >= 0 {
        2 * z as u128
    } else {
        (-2 * z - 1) as u128
    }
}

fn pair(a: u128, b: u128) -> u128 {
    (a + b) * (a + b + 1) / 2 + b
}

/// Cantor enumeration index of a lattice point.
pub fn cantor_index(m: &[i64]) -> u128 {
    let mut it = m.iter().map(|&z| fold(z));
    let first = it.next().unwrap_or(0);
    it.fold(first, pair)
}

/// Lattice points of the cube `|m_i| <= half_width`, lexicographic.
pub fn cube_points(dimension: u32, half_width: i64) -> Vec<Vec<i64>> {
    let mut points = vec![Vec::new()];
    for _ in 0..dimension {
        points = points
            .into_iter()
            .flat_map(|p| {
                (-half_width..=half_width).map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    points
}

/// Lattice points with `|m| <= cutoff` in the model's eigenbasis order:
/// increasing `|m|^2`, ties by Cantor index.
pub fn eigenbasis_order(dimension: u32, cutoff: f64) -> Vec<Vec<i64>> {
    let r = cutoff.floor() as i64;
    let mut pts: Vec<Vec<i64>> =
        cube_points(dimension, r).into_iter().filter(|m| norm2(m) as f64 <= cutoff * cutoff).collect();
    pts.sort_by_key(|m| (norm2(m), cantor_index(m)));
    pts
}

fn norm2(m: &[i64]) -> u64 {
    m.iter().map(|&v| (v * v) as u64).sum()
}

/// Dense matrix of `f * (1 + Delta)^(-power)` on the cube `|m_i| <= M`.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub half_width: i64,
    pub dimension: u32,
    pub power: f64,
    pub points: Vec<Vec<i64>>,
    pub matrix: DMatrix<Complex64>,
    pub provenance: String,
    pub truncation_warning: Option<String>,
}

impl TruncatedOperator {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn real_matrix(&self) -> Option<DMatrix<f64>> {
        self.is_real().then(|| self.matrix.map(|z| z.re))
    }

    pub fn weight(&self, m: &[i64]) -> f64 {
        (1.0 + norm2(m) as f64).powf(-self.power)
    }
}

/// Bytes needed to hold and factor a dense `size x size` problem.
pub fn matrix_bytes(size: usize) -> u64 {
    (size as u64).pow(2) * 16 * 3
}

pub fn multiplication_matrix(f: &FourierMultiplier, half_width: i64, budget_mb: u64) -> Result<TruncatedOperator> {
    multiplication_matrix_with_power(f, half_width, f.dimension as f64 / 2.0, budget_mb)
}

pub fn multiplication_matrix_with_power(
    f: &FourierMultiplier,
    half_width: i64,
    power: f64,
    budget_mb: u64,
) -> Result<TruncatedOperator> {
    if half_width < 0 {
        return Err(Error::InvalidArgument(format!("cube half-width must be nonnegative, got {half_width}")));
    }
    let n = f.dimension;
    let side = (2 * half_width + 1) as usize;
    let size = side.pow(n);
    check_budget(matrix_bytes(size), budget_mb)?;
    let points = cube_points(n, half_width);
    let index = |m: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        for &v in m {
            if v.abs() > half_width {
                return None;
            }
            idx = idx * side + (v + half_width) as usize;
        }
        Some(idx)
    };
    let mut matrix = DMatrix::<Complex64>::zeros(size, size);
    for (j, mj) in points.iter().enumerate() {
        let w = (1.0 + norm2(mj) as f64).powf(-power);
        for (k, c) in f.support() {
            let mi: Vec<i64> = mj.iter().zip(k).map(|(a, b)| a + b).collect();
            if let Some(i) = index(&mi) {
                matrix[(i, j)] = c * w;
            }
        }
    }
    let truncation_warning = (f.support_halfwidth() > 2 * half_width)
        .then(|| format!("support half-width {} exceeds 2M = {}", f.support_halfwidth(), 2 * half_width));
    Ok(TruncatedOperator {
        half_width,
        dimension: n,
        power,
        points,
        matrix,
        provenance: format!(
            "f (support {} modes) times (1 + Delta)^-{power} on Z^{n}, M = {half_width}",
            f.coefficients.len()
        ),
        truncation_warning,
    })
}

fn spectral_norm_sq(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().copied().fold(0.0, f64::max)
}

/// Singular values as square roots of the spectrum of `T* T`, each pair
/// checked against `||(T*T) v - s^2 v|| <= 1e-8 ||T||^2`.
pub fn singular_values(t: &DMatrix<Complex64>) -> Result<SingularSequence> {
    if !t.is_square() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", t.nrows(), t.ncols())));
    }
    if t.iter().all(|z| z.im == 0.0) {
        return singular_values_real(&t.map(|z| z.re));
    }
    let g = t.adjoint() * t;
    let eig = SymmetricEigen::try_new(g.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolver { residual: f64::NAN, bound: f64::NAN })?;
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let bound = RESIDUAL_BOUND * spectral_norm_sq(&lambdas);
    let r = &g * &eig.eigenvectors
        - &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l, 0.0)));
    check_residual(r.column_iter().map(|c| c.norm()), bound)?;
    sigma_sequence(&lambdas)
}

pub fn singular_values_real(t: &DMatrix<f64>) -> Result<SingularSequence> {
    if !t.is_square() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", t.nrows(), t.ncols())));
    }
    let g = t.transpose() * t;
    let eig = SymmetricEigen::try_new(g.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolver { residual: f64::NAN, bound: f64::NAN })?;
    let lambdas: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let bound = RESIDUAL_BOUND * spectral_norm_sq(&lambdas);
    let mut r = &g * &eig.eigenvectors;
    for (j, mut col) in r.column_iter_mut().enumerate() {
        col -= eig.eigenvectors.column(j) * eig.eigenvalues[j];
    }
    check_residual(r.column_iter().map(|c| c.norm()), bound)?;
    sigma_sequence(&lambdas)
}

fn check_residual(norms: impl Iterator<Item = f64>, bound: f64) -> Result<()> {
    let worst = norms.fold(0.0f64, f64::max);
    if !(worst <= bound) && bound > 0.0 {
        return Err(Error::EigenSolver { residual: worst, bound });
    }
    Ok(())
}

fn sigma_sequence(lambdas: &[f64]) -> Result<SingularSequence> {
    let sigmas: Vec<f64> = lambdas.iter().map(|&l| l.max(0.0).sqrt()).collect();
    decreasing_rearrangement(&sigmas)
}

/// `T = T1 - T2 + i T3 - i T4` with positive semidefinite parts and
/// `T1 T2 = T3 T4 = 0`.
#[derive(Clone, Debug)]
pub struct HermitianParts {
    pub t1: DMatrix<Complex64>,
    pub t2: DMatrix<Complex64>,
    pub t3: DMatrix<Complex64>,
    pub t4: DMatrix<Complex64>,
    /// Eigenvalues of each part, nonincreasing.
    pub spectra: [SingularSequence; 4],
}

impl HermitianParts {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        &self.t1 - &self.t2 + (&self.t3 - &self.t4) * i
    }
}

/// Positive and negative parts of a Hermitian matrix.
fn split_hermitian(
    h: DMatrix<Complex64>,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>, SingularSequence, SingularSequence)> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h, EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolver { residual: f64::NAN, bound: f64::NAN })?;
    let mut pos = DMatrix::<Complex64>::zeros(n, n);
    let mut neg = DMatrix::<Complex64>::zeros(n, n);
    let mut pv = Vec::new();
    let mut nv = Vec::new();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(j);
        let outer = v * v.adjoint();
        if l > 0.0 {
            pos += outer * Complex64::new(l, 0.0);
            pv.push(l);
        } else if l < 0.0 {
            neg += outer * Complex64::new(-l, 0.0);
            nv.push(-l);
        }
    }
    Ok((pos, neg, decreasing_rearrangement(&pv)?, decreasing_rearrangement(&nv)?))
}

pub fn hermitian_decompose(t: &DMatrix<Complex64>) -> Result<HermitianParts> {
    if !t.is_square() {
        return Err(Error::InvalidArgument(format!("matrix is {}x{}, not square", t.nrows(), t.ncols())));
    }
    let adj = t.adjoint();
    let h1 = (t + &adj) * Complex64::new(0.5, 0.0);
    let h2 = (t - &adj) * Complex64::new(0.0, -0.5);
    let (t1, t2, s1, s2) = split_hermitian(h1)?;
    let (t3, t4, s3, s4) = split_hermitian(h2)?;
    Ok(HermitianParts { t1, t2, t3, t4, spectra: [s1, s2, s3, s4] })
}

/// Eigenvectors of a Hermitian `q` ordered by nonincreasing eigenvalue; ties
/// keep the order of the dominant coordinate.
pub fn model_eigenbasis(q: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let eig = SymmetricEigen::try_new(q.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenSolver { residual: f64::NAN, bound: f64::NAN })?;
    let dominant = |j: usize| {
        eig.eigenvectors
            .column(j)
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |best, (i, z)| if z.norm() > best.1 + 1e-12 { (i, z.norm()) } else { best })
            .0
    };
    let mut order: Vec<usize> = (0..q.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(dominant(a).cmp(&dominant(b))));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&j| eig.eigenvectors.column(j)).collect::<Vec<_>>());
    Ok((values, vectors))
}

/// `<h_m, a h_m>` for the columns `h_m` of `basis`.
pub fn expectation_sequence(a: &DMatrix<Complex64>, basis: &DMatrix<Complex64>) -> Vec<Complex64> {
    basis.column_iter().map(|h| (h.adjoint() * a * h)[(0, 0)]).collect()
}

/// `<e_m, f e_m>` over the torus eigenbasis in model order; every entry is
/// the zero mode `f^(0)`.
pub fn torus_expectation_sequence(f: &FourierMultiplier, cutoff: f64) -> Vec<(Vec<i64>, Complex64)> {
    eigenbasis_order(f.dimension, cutoff).into_iter().map(|m| (m, f.zero_mode())).collect()
}
