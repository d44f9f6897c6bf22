//! The linearized system at the axis disc `f0(zeta) = (zeta, 0, ..., 0)` and its
//! exact solution through spectral factorization and a contraction.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::StationaryError;
use crate::disc::{analytic_completion, grid, FourierDisc};
use crate::domain::{ComplexJet, Defining};
use crate::factor::{
    matrix_field_from_samples, matrix_samples, spectral_factorize, symmetric_norm,
    SpectralFactor,
};

/// Contraction iterations before giving up.
pub const MAX_CONTRACTION_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearMode {
    /// third condition `f̃'(0) - λ̃ e1 = v`
    Direction,
    /// third condition `f̃(xi0) + ξ̃ e1 = w` at the base parameter `xi0`
    TwoPoint(f64),
}

/// Data and coefficient fields of the linearized system at the axis disc.
#[derive(Debug, Clone)]
pub struct LinearizedData {
    pub n: usize,
    pub order: usize,
    /// real boundary field
    pub eta: FourierDisc,
    /// negative-frequency field in `C^n`
    pub phi: FourierDisc,
    pub target: Vec<C64>,
    /// `zeta^2 r_{ẑẑ}∘f0`
    pub alpha: FourierDisc,
    /// `r_{ẑ z̄̂}∘f0`
    pub beta: FourierDisc,
    pub h: SpectralFactor,
    /// `H^{-1} alpha (H^T)^{-1}`
    pub gamma: FourierDisc,
    /// `1 - sup |gamma|`
    pub margin: f64,
    jets: Vec<ComplexJet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionOutcome {
    #[serde(skip)]
    pub h: FourierDisc,
    pub iterations: usize,
    pub eps: f64,
    /// `1 - sup |gamma|`
    pub margin: f64,
    /// certified per-step contraction factor in the eps-norm
    pub bound: f64,
    /// successive ratios `|h_{j+1} - h_j| / |h_j - h_{j-1}|`
    pub ratios: Vec<f64>,
    /// step sizes `|h_{j+1} - h_j|` in the eps-norm
    pub diffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub f_tilde: FourierDisc,
    pub q_tilde: FourierDisc,
    /// `λ̃` or `ξ̃`
    pub multiplier: f64,
    pub contraction: Option<ContractionOutcome>,
}

fn sub_block(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    a.view((1, 1), (n - 1, n - 1)).into_owned()
}

impl LinearizedData {
    /// Builds the coefficient fields for the defining function `r0`, which must
    /// satisfy `r0_z∘f0 = (conj(zeta)/2, 0, ..., 0)` on the circle.
    pub fn at_axis(
        r0: &dyn Defining,
        order: usize,
        eta: FourierDisc,
        phi: FourierDisc,
        target: Vec<C64>,
    ) -> Result<Self, StationaryError> {
        let n = r0.n();
        if n < 2 {
            return Err(StationaryError::InvalidConstraint("dimension must be at least 2".into()));
        }
        let m = super::collocation_size(order);
        let pts = grid(m);
        let mut jets = Vec::with_capacity(m);
        for z in &pts {
            let mut p = vec![C64::new(0.0, 0.0); n];
            p[0] = *z;
            let jet = r0.complex_jet(&p)?;
            let mut dev = jet.value.abs() + (jet.r_z[0] - z.conj() * 0.5).norm();
            dev += jet.r_z[1..].iter().map(|c| c.norm()).sum::<f64>();
            if dev > 1e-9 {
                return Err(StationaryError::InvalidConstraint(format!(
                    "axis disc is not in normal position (defect {dev:e})"
                )));
            }
            jets.push(jet);
        }
        let size = n - 1;
        let alphas: Vec<DMatrix<C64>> = jets
            .iter()
            .zip(&pts)
            .map(|(j, z)| sub_block(&j.r_zz) * (z * z))
            .collect();
        let betas: Vec<DMatrix<C64>> = jets.iter().map(|j| sub_block(&j.r_zzbar)).collect();
        let alpha = matrix_field_from_samples(&alphas, order, false);
        let beta = matrix_field_from_samples(&betas, order, false);
        let h = spectral_factorize(&beta, size, order, 1e-10)?;
        let hs = matrix_samples(&h.h, size, m);
        let mut gammas = Vec::with_capacity(m);
        for (hm, a) in hs.iter().zip(&alphas) {
            let hinv = hm.clone().try_inverse().ok_or(StationaryError::ContractionFailure(0.0))?;
            let g = &hinv * a * hinv.transpose();
            gammas.push((&g + g.transpose()) * C64::new(0.5, 0.0));
        }
        let mut sup: f64 = 0.0;
        for g in &gammas {
            sup = sup.max(symmetric_norm(g)?);
        }
        let margin = 1.0 - sup;
        if !(margin > 0.0) {
            return Err(StationaryError::ContractionFailure(margin));
        }
        let gamma = matrix_field_from_samples(&gammas, order, false);
        let mut data = LinearizedData {
            n,
            order,
            eta: FourierDisc::zeros_boundary(1, order),
            phi: FourierDisc::zeros_boundary(n, order),
            target: vec![C64::new(0.0, 0.0); n],
            alpha,
            beta,
            h,
            gamma,
            margin,
            jets,
        };
        data.set_data(eta, phi, target)?;
        Ok(data)
    }

    /// Replaces the right-hand sides, reusing the factorization.
    pub fn set_data(
        &mut self,
        eta: FourierDisc,
        phi: FourierDisc,
        target: Vec<C64>,
    ) -> Result<(), StationaryError> {
        if eta.m != 1 || phi.m != self.n || target.len() != self.n {
            return Err(StationaryError::InvalidConstraint("data has wrong dimensions".into()));
        }
        self.eta = eta.to_boundary();
        self.phi = phi.to_boundary().project_neg();
        self.target = target;
        Ok(())
    }

    pub fn with_data(
        &self,
        eta: FourierDisc,
        phi: FourierDisc,
        target: Vec<C64>,
    ) -> Result<Self, StationaryError> {
        let mut d = self.clone();
        d.set_data(eta, phi, target)?;
        Ok(d)
    }

    fn m(&self) -> usize {
        self.jets.len()
    }
}

/// Operator norm of the matrix `a` (largest singular value).
fn op_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Certified eps-norm contraction factor of `h -> P(gamma h)` and the eps achieving
/// it: the largest eps in `{1, 1/2, 1/4, ...}` with bound `<= 1 - margin/2`.
pub fn choose_eps(gamma: &FourierDisc, size: usize, m_grid: usize) -> Result<(f64, f64, f64), StationaryError> {
    let g0 = matrix_samples(gamma, size, m_grid);
    let g1 = matrix_samples(&gamma.d_dt(), size, m_grid);
    let g2 = matrix_samples(&gamma.d_dt().d_dt(), size, m_grid);
    let mut c: f64 = 0.0;
    for g in &g0 {
        c = c.max(symmetric_norm(g)?);
    }
    let margin = 1.0 - c;
    if !(margin > 0.0) {
        return Err(StationaryError::ContractionFailure(margin));
    }
    let s1 = g1.iter().map(op_norm).fold(0.0, f64::max);
    let s2 = g2.iter().map(op_norm).fold(0.0, f64::max);
    let bound = |e: f64| c + (e * s1 + e * e * s2).max(2.0 * e * s1);
    let mut eps = 1.0;
    for _ in 0..60 {
        if bound(eps) <= 1.0 - margin / 2.0 {
            return Ok((eps, bound(eps), margin));
        }
        eps *= 0.5;
    }
    Ok((eps, bound(eps), margin))
}

fn apply(mats: &[DMatrix<C64>], vals: &[Vec<C64>]) -> Vec<Vec<C64>> {
    mats.iter()
        .zip(vals)
        .map(|(a, v)| (a * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec())
        .collect()
}

struct Iterated {
    h: FourierDisc,
    iterations: usize,
    ratios: Vec<f64>,
    diffs: Vec<f64>,
}

fn iterate(
    gs: &[DMatrix<C64>],
    rs: Option<&[Vec<C64>]>,
    a: &[C64],
    order: usize,
    eps: f64,
    tol: f64,
) -> Result<Iterated, StationaryError> {
    let size = a.len();
    let m = gs.len();
    let mut h = FourierDisc::zeros_holomorphic(size, order);
    h.coeff_mut(0).copy_from_slice(a);
    let mut ratios = Vec::new();
    let mut diffs = Vec::new();
    let mut prev = f64::NAN;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let gh = apply(gs, &h.samples(m));
        let u: Vec<Vec<C64>> = match rs {
            Some(rs) => rs
                .iter()
                .zip(&gh)
                .map(|(r, g)| r.iter().zip(g).map(|(x, y)| x - y).collect())
                .collect(),
            None => gh.iter().map(|g| g.iter().map(|y| -y).collect()).collect(),
        };
        let mut next = FourierDisc::from_samples(&u, order, false).project_conj_neg();
        next.coeff_mut(0).copy_from_slice(a);
        let diff = next.sub(&h).eps_norm(eps);
        if prev.is_finite() && prev > 0.0 {
            ratios.push(diff / prev);
        }
        prev = diff;
        diffs.push(diff);
        h = next;
        if diff < tol {
            return Ok(Iterated { h, iterations, ratios, diffs });
        }
        if iterations >= MAX_CONTRACTION_ITER || !diff.is_finite() {
            return Err(StationaryError::NoConvergence { iterations, residual: diff });
        }
    }
}

/// Fixed point of `h -> P(rhs - gamma h) + b`.
///
/// With `anchor = None` the constant is `b = a`, i.e. `h(0) = a`. With
/// `anchor = Some(xi0)` the normalization is `h(xi0) = a`: the map is real-affine
/// in `b`, so the anchored solution is assembled from the fixed points for
/// `b = 0` and the real basis of `C^size` with zero right-hand side. With
/// `eps = None` it is chosen by [`choose_eps`].
pub fn contraction_solve(
    gamma: &FourierDisc,
    size: usize,
    rhs: &FourierDisc,
    a: &[C64],
    anchor: Option<f64>,
    eps: Option<f64>,
    tol: f64,
) -> Result<ContractionOutcome, StationaryError> {
    let order = gamma.order.max(rhs.order);
    let m = super::collocation_size(order);
    let (auto_eps, bound, margin) = choose_eps(gamma, size, m)?;
    let eps = eps.unwrap_or(auto_eps);
    let gs = matrix_samples(gamma, size, m);
    let rs = rhs.samples(m);
    let Some(xi0) = anchor else {
        let it = iterate(&gs, Some(&rs), a, order, eps, tol)?;
        return Ok(ContractionOutcome {
            h: it.h,
            iterations: it.iterations,
            eps,
            margin,
            bound,
            ratios: it.ratios,
            diffs: it.diffs,
        });
    };
    let zero = C64::new(0.0, 0.0);
    let x = C64::new(xi0, 0.0);
    let base = iterate(&gs, Some(&rs), &vec![zero; size], order, eps, tol)?;
    let mut iterations = base.iterations;
    let mut basis = Vec::with_capacity(2 * size);
    let mut mat = DMatrix::<f64>::zeros(2 * size, 2 * size);
    for col in 0..2 * size {
        let mut b = vec![zero; size];
        b[col / 2] = if col % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        let it = iterate(&gs, None, &b, order, eps, tol)?;
        iterations += it.iterations;
        let v = it.h.eval_unchecked(x);
        for l in 0..size {
            mat[(2 * l, col)] = v[l].re;
            mat[(2 * l + 1, col)] = v[l].im;
        }
        basis.push(it.h);
    }
    let hb = base.h.eval_unchecked(x);
    let rhs_vec = nalgebra::DVector::from_fn(2 * size, |i, _| {
        let d = a[i / 2] - hb[i / 2];
        if i % 2 == 0 { d.re } else { d.im }
    });
    let coef = mat
        .lu()
        .solve(&rhs_vec)
        .ok_or(StationaryError::ContractionFailure(margin))?;
    let mut h = base.h;
    for (cf, u) in coef.iter().zip(&basis) {
        h = h.add(&u.scale(C64::new(*cf, 0.0)));
    }
    Ok(ContractionOutcome { h, iterations, eps, margin, bound, ratios: base.ratios, diffs: base.diffs })
}

/// `sum |coefficients|` of `pi(gamma h + conj(h) - rhs)`.
pub fn holomorphy_defect(gamma: &FourierDisc, size: usize, rhs: &FourierDisc, h: &FourierDisc) -> f64 {
    let order = gamma.order.max(rhs.order).max(h.order);
    let m = super::collocation_size(order);
    let gs = matrix_samples(gamma, size, m);
    let hv = h.samples(m);
    let rs = rhs.samples(m);
    let gh = apply(&gs, &hv);
    let u: Vec<Vec<C64>> = (0..m)
        .map(|j| (0..size).map(|l| gh[j][l] + hv[j][l].conj() - rs[j][l]).collect())
        .collect();
    FourierDisc::from_samples(&u, order, false).project_neg().coeff_l1()
}

fn shift_up(g: &FourierDisc) -> FourierDisc {
    let mut out = FourierDisc::zeros_holomorphic(g.m, g.order);
    for k in 1..=g.order as i64 {
        out.coeff_mut(k).copy_from_slice(g.coeff(k - 1).unwrap());
    }
    let top: f64 = g.coeff(g.order as i64).unwrap().iter().map(|c| c.norm_sqr()).sum();
    out.debt = g.debt + top.sqrt();
    out
}

/// Exact solution of the linearized system on the truncated space.
pub fn solve_linearized_at_axis(
    data: &LinearizedData,
    mode: LinearMode,
) -> Result<LinearSolution, StationaryError> {
    let (n, order, m) = (data.n, data.order, data.m());
    let size = n - 1;
    let pts = grid(m);
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);

    let g1 = analytic_completion(&data.eta, 0.0)?;
    let (mult, c_im) = match mode {
        LinearMode::Direction => {
            let v1 = data.target[0];
            (g1.c(0, 0).re - v1.re, v1.im)
        }
        LinearMode::TwoPoint(xi0) => {
            let w1 = data.target[0];
            let gx = g1.eval_unchecked(C64::new(xi0, 0.0))[0];
            (w1.re - xi0 * gx.re, (w1.im - xi0 * gx.im) / xi0)
        }
    };
    let mut inner = g1.clone();
    inner.coeff_mut(0)[0] += i * c_im;
    let ft1 = shift_up(&inner);

    let ft1_s = ft1.samples_scalar(m);
    let phi_s = data.phi.samples(m);
    let hs = matrix_samples(&data.h.h, size, m);
    let mut rhs_vals = Vec::with_capacity(m);
    for j in 0..m {
        let jet = &data.jets[j];
        let z = pts[j];
        let psi: Vec<C64> = (1..n)
            .map(|l| {
                phi_s[j][l] - z * jet.r_zz[(l, 0)] * ft1_s[j] - z * jet.r_zzbar[(l, 0)] * ft1_s[j].conj()
            })
            .collect();
        let hinv = hs[j].clone().try_inverse().ok_or(StationaryError::ContractionFailure(0.0))?;
        rhs_vals.push((hinv * nalgebra::DVector::from_column_slice(&psi)).as_slice().to_vec());
    }
    let rhs = FourierDisc::from_samples(&rhs_vals, order, false);

    let hat: Vec<C64> = data.target[1..].to_vec();
    let (a, anchor) = match mode {
        LinearMode::Direction => {
            let h0 = data.h.eval(zero);
            let v = nalgebra::DVector::from_column_slice(&hat);
            ((h0.transpose() * v).as_slice().to_vec(), None)
        }
        LinearMode::TwoPoint(xi0) => {
            let hx = data.h.eval(C64::new(xi0, 0.0));
            let w = nalgebra::DVector::from_column_slice(&hat) / C64::new(xi0, 0.0);
            ((hx.transpose() * w).as_slice().to_vec(), Some(xi0))
        }
    };
    let out = contraction_solve(&data.gamma, size, &rhs, &a, anchor, None, 1e-14)?;
    let h_s = out.h.samples(m);
    let mut g_vals = Vec::with_capacity(m);
    for j in 0..m {
        let ht_inv = hs[j]
            .transpose()
            .try_inverse()
            .ok_or(StationaryError::ContractionFailure(0.0))?;
        g_vals.push((ht_inv * nalgebra::DVector::from_column_slice(&h_s[j])).as_slice().to_vec());
    }
    let g = FourierDisc::from_samples(&g_vals, order, true);
    let fhat = shift_up(&g);

    let mut f_tilde = FourierDisc::zeros_holomorphic(n, order);
    for k in 0..=order as i64 {
        let dst = f_tilde.coeff_mut(k);
        dst[0] = ft1.c(k, 0);
        for l in 1..n {
            dst[l] = fhat.c(k, l - 1);
        }
    }
    f_tilde.debt = ft1.debt + fhat.debt;

    // q̃ from the first component of the holomorphy equation
    let fs = f_tilde.samples(m);
    let x_vals: Vec<C64> = (0..m)
        .map(|j| {
            let jet = &data.jets[j];
            let s: C64 = (0..n)
                .map(|l| jet.r_zz[(0, l)] * fs[j][l] + jet.r_zzbar[(0, l)] * fs[j][l].conj())
                .sum();
            pts[j] * s
        })
        .collect();
    let x = FourierDisc::from_samples_scalar(&x_vals, order, false);
    let qk: Vec<C64> = (1..=order as i64)
        .map(|k| ((data.phi.c(-k, 0) - x.c(-k, 0)) * 2.0).conj())
        .collect();
    let q_tilde = super::gauged_real_field(&qk);

    Ok(LinearSolution { f_tilde, q_tilde, multiplier: mult, contraction: Some(out) })
}

/// The linearization of the residual at `(f0, q = 0)` applied to a solution.
pub fn forward_linearization(
    data: &LinearizedData,
    mode: LinearMode,
    sol: &LinearSolution,
) -> (FourierDisc, FourierDisc, Vec<C64>) {
    let (n, order, m) = (data.n, data.order, data.m());
    let pts = grid(m);
    let fs = sol.f_tilde.samples(m);
    let qs = sol.q_tilde.samples_scalar(m);
    let mut eta = Vec::with_capacity(m);
    let mut phi = Vec::with_capacity(m);
    for j in 0..m {
        let jet = &data.jets[j];
        let z = pts[j];
        let lin: C64 = (0..n).map(|l| jet.r_z[l] * fs[j][l]).sum();
        eta.push(C64::new(2.0 * lin.re, 0.0));
        let row: Vec<C64> = (0..n)
            .map(|l| {
                let s: C64 = (0..n)
                    .map(|k| jet.r_zz[(l, k)] * fs[j][k] + jet.r_zzbar[(l, k)] * fs[j][k].conj())
                    .sum();
                z * (qs[j] * jet.r_z[l] + s)
            })
            .collect();
        phi.push(row);
    }
    let eta = FourierDisc::from_samples_scalar(&eta, order, false);
    let phi = FourierDisc::from_samples(&phi, order, false).project_neg();
    let target = match mode {
        LinearMode::Direction => {
            let d = sol.f_tilde.coeff(1).unwrap();
            (0..n).map(|l| d[l] - if l == 0 { sol.multiplier } else { 0.0 }).collect()
        }
        LinearMode::TwoPoint(xi0) => {
            let v = sol.f_tilde.eval_unchecked(C64::new(xi0, 0.0));
            (0..n).map(|l| v[l] + if l == 0 { sol.multiplier } else { 0.0 }).collect()
        }
    };
    (eta, phi, target)
}

/// Largest coefficient-sum error between data and the forward image of a solution.
pub fn round_trip_error(data: &LinearizedData, mode: LinearMode, sol: &LinearSolution) -> f64 {
    let (eta, phi, target) = forward_linearization(data, mode, sol);
    let e1 = eta.sub(&data.eta).coeff_l1();
    let e2 = phi.sub(&data.phi).coeff_l1();
    let e3 = target
        .iter()
        .zip(&data.target)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    e1.max(e2).max(e3)
}
