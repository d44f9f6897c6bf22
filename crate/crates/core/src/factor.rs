//! Spectral factorization `H H* = beta` on the circle and the norm of complex
//! symmetric matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::disc::{analytic_completion, grid, winding_of_samples, DiscError, FourierDisc};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("symbol is not positive definite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("symbol is not self-adjoint (defect {0:e})")]
    NotHermitian(f64),
    #[error("factorization stalled after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix is not symmetric (defect {0:e})")]
    NotSymmetric(f64),
    #[error(transparent)]
    Disc(#[from] DiscError),
}

/// Required margin of the smallest eigenvalue of the symbol.
pub const POSITIVITY_MARGIN: f64 = 1e-8;

/// Matrix-valued field stored as a `FourierDisc` with `m = size * size` (row-major).
pub fn matrix_at(values: &[C64], size: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(size, size, values)
}

pub fn matrix_entries(a: &DMatrix<C64>) -> Vec<C64> {
    let k = a.nrows();
    (0..k * k).map(|i| a[(i / k, i % k)]).collect()
}

/// Matrix samples of a matrix field on the grid of size `m_grid`.
pub fn matrix_samples(field: &FourierDisc, size: usize, m_grid: usize) -> Vec<DMatrix<C64>> {
    field
        .samples(m_grid)
        .iter()
        .map(|v| matrix_at(v, size))
        .collect()
}

pub fn matrix_field_from_samples(
    mats: &[DMatrix<C64>],
    order: usize,
    holomorphic: bool,
) -> FourierDisc {
    let vals: Vec<Vec<C64>> = mats.iter().map(matrix_entries).collect();
    FourierDisc::from_samples(&vals, order, holomorphic)
}

#[derive(Debug, Clone)]
pub struct SpectralFactor {
    pub size: usize,
    /// holomorphic-type matrix field
    pub h: FourierDisc,
    /// sup over the circle of `|H H* - beta|` (Frobenius)
    pub residual: f64,
    /// min of `|det H|` sampled on the closed disc
    pub min_det: f64,
    /// winding number of `det H` on the circle
    pub det_winding: i64,
    pub iterations: usize,
}

impl SpectralFactor {
    pub fn eval(&self, zeta: C64) -> DMatrix<C64> {
        matrix_at(&self.h.eval_unchecked(zeta), self.size)
    }
}

fn hermitian_min_eig(a: &DMatrix<C64>) -> f64 {
    let herm = (a + a.adjoint()) * C64::new(0.5, 0.0);
    nalgebra::SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn sup_residual(h: &[DMatrix<C64>], beta: &[DMatrix<C64>]) -> f64 {
    h.iter()
        .zip(beta)
        .map(|(h, b)| (h * h.adjoint() - b).norm())
        .fold(0.0, f64::max)
}

/// Factor `beta = H H*` with `H` holomorphic and invertible on the closed disc.
///
/// `beta` is a boundary matrix field with `m = size^2`; `order` is the
/// truncation order of `H`.
pub fn spectral_factorize(
    beta: &FourierDisc,
    size: usize,
    order: usize,
    tol: f64,
) -> Result<SpectralFactor, FactorError> {
    assert_eq!(beta.m, size * size, "symbol has wrong shape");
    let order = order.max(beta.order);
    let m_grid = 4 * order;
    let beta_s = matrix_samples(beta, size, m_grid);
    let mut herm_defect: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for b in &beta_s {
        herm_defect = herm_defect.max((b - b.adjoint()).norm());
        min_eig = min_eig.min(hermitian_min_eig(b));
    }
    let scale = beta_s.iter().map(|b| b.norm()).fold(1.0, f64::max);
    if herm_defect > 1e-10 * scale {
        return Err(FactorError::NotHermitian(herm_defect));
    }
    if min_eig < POSITIVITY_MARGIN {
        return Err(FactorError::NotPositive(min_eig));
    }
    let (h, iterations) = if size == 1 {
        // log beta decays slower than H, so the scalar factor is built at a finer order
        let fine = (8 * order).max(256);
        let hf = scalar_factor(&matrix_samples(beta, 1, 4 * fine), fine)?;
        let h = FourierDisc::holomorphic((0..=order as i64).map(|k| hf.coeff(k).unwrap().to_vec()).collect());
        (h, 0)
    } else {
        wilson(&beta_s, size, order, tol)?
    };
    finish(h, size, &beta_s, iterations, tol)
}

fn finish(
    h: FourierDisc,
    size: usize,
    beta_s: &[DMatrix<C64>],
    iterations: usize,
    tol: f64,
) -> Result<SpectralFactor, FactorError> {
    let m_grid = beta_s.len();
    let hs = matrix_samples(&h, size, m_grid);
    let residual = sup_residual(&hs, beta_s);
    if !(residual < tol) {
        return Err(FactorError::NoConvergence { iterations, residual });
    }
    let mut min_det = f64::INFINITY;
    for rad in [0.0, 0.25, 0.5, 0.75, 0.9, 1.0] {
        for z in grid(m_grid) {
            let d = matrix_at(&h.eval_unchecked(z * rad), size).determinant();
            min_det = min_det.min(d.norm());
        }
    }
    let dets: Vec<C64> = grid(2 * m_grid)
        .into_iter()
        .map(|z| matrix_at(&h.eval_unchecked(z), size).determinant())
        .collect();
    let det_winding = winding_of_samples(&dets)?.value;
    Ok(SpectralFactor { size, h, residual, min_det, det_winding, iterations })
}

/// Scalar factor `exp(G/2)` with `Re G = log beta` on the circle.
pub fn scalar_factor(beta_s: &[DMatrix<C64>], order: usize) -> Result<FourierDisc, FactorError> {
    let logs: Vec<C64> = beta_s.iter().map(|b| C64::new(b[(0, 0)].re.ln(), 0.0)).collect();
    let eta = FourierDisc::from_samples_scalar(&logs, order, false);
    let g = analytic_completion(&eta, 0.0)?;
    let vals: Vec<C64> = g
        .samples_scalar(beta_s.len())
        .into_iter()
        .map(|v| (v * 0.5).exp())
        .collect();
    Ok(FourierDisc::from_samples_scalar(&vals, order, true))
}

/// Wilson's Newton iteration for matrix symbols.
pub fn wilson(
    beta_s: &[DMatrix<C64>],
    size: usize,
    order: usize,
    tol: f64,
) -> Result<(FourierDisc, usize), FactorError> {
    let m_grid = beta_s.len();
    let mean = beta_s.iter().fold(DMatrix::zeros(size, size), |acc, b| acc + b)
        * C64::new(1.0 / m_grid as f64, 0.0);
    let mean = (&mean + mean.adjoint()) * C64::new(0.5, 0.0);
    let chol = nalgebra::Cholesky::new(mean.clone())
        .ok_or(FactorError::NotPositive(hermitian_min_eig(&mean)))?;
    let mut hs: Vec<DMatrix<C64>> = vec![chol.l(); m_grid];
    let mut res = sup_residual(&hs, beta_s);
    let target = (tol * 1e-4).max(1e-14);
    let ident = DMatrix::<C64>::identity(size, size);
    let mut iterations = 0;
    let mut stalls = 0;
    while res > target && iterations < 100 {
        iterations += 1;
        let mut xs = Vec::with_capacity(m_grid);
        for (h, b) in hs.iter().zip(beta_s) {
            let hinv = h
                .clone()
                .try_inverse()
                .ok_or(FactorError::NoConvergence { iterations, residual: res })?;
            xs.push(&hinv * b * hinv.adjoint() + &ident);
        }
        let xf = matrix_field_from_samples(&xs, order, false);
        let mut lf = FourierDisc::zeros_holomorphic(size * size, order);
        for k in 1..=order as i64 {
            lf.coeff_mut(k).copy_from_slice(xf.coeff(k).unwrap());
        }
        for (d, c) in lf.coeff_mut(0).iter_mut().zip(xf.coeff(0).unwrap()) {
            *d = c * 0.5;
        }
        let ls = matrix_samples(&lf, size, m_grid);
        let prod: Vec<DMatrix<C64>> = hs.iter().zip(&ls).map(|(h, l)| h * l).collect();
        let hf = matrix_field_from_samples(&prod, order, true);
        let mut cand = matrix_samples(&hf, size, m_grid);
        let mut cand_res = sup_residual(&cand, beta_s);
        let mut damp = 0;
        while !(cand_res < res) && damp < 5 {
            cand = hs
                .iter()
                .zip(&cand)
                .map(|(a, b)| (a + b) * C64::new(0.5, 0.0))
                .collect();
            cand_res = sup_residual(&cand, beta_s);
            damp += 1;
        }
        if !(cand_res < res) {
            stalls += 1;
            if stalls > 2 {
                break;
            }
        } else {
            stalls = 0;
        }
        if cand_res < res {
            hs = cand;
            res = cand_res;
        }
    }
    let h = matrix_field_from_samples(&hs, order, true);
    Ok((h, iterations))
}

/// Operator norm of a complex symmetric matrix, equal to `sup_{|z|=1} |z^T A z|`.
pub fn symmetric_norm(a: &DMatrix<C64>) -> Result<f64, FactorError> {
    let scale = a.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let defect = (a - a.transpose()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    if defect > 1e-12 * scale {
        return Err(FactorError::NotSymmetric(defect));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sv = a.clone().svd(false, false).singular_values;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constant_scalar() {
        let beta = FourierDisc::scalar_boundary(8, &[(0, c(4.0, 0.0))]);
        let f = spectral_factorize(&beta, 1, 8, 1e-10).unwrap();
        assert!((f.h.c(0, 0).norm() - 2.0).abs() < 1e-14);
        assert!(f.residual < 1e-13);
    }

    #[test]
    fn rejects_non_positive() {
        let beta = FourierDisc::scalar_boundary(8, &[(0, c(1.0, 0.0)), (1, c(0.5, 0.0)), (-1, c(0.5, 0.0))]);
        assert!(matches!(
            spectral_factorize(&beta, 1, 8, 1e-10),
            Err(FactorError::NotPositive(_))
        ));
    }

    #[test]
    fn symmetric_norm_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
        assert!((symmetric_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        let s = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((symmetric_norm(&s).unwrap() - 1.0).abs() < 1e-14);
        let ns = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(symmetric_norm(&ns), Err(FactorError::NotSymmetric(_))));
    }
}
