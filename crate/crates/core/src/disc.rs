//! Truncated Fourier series on the unit circle and holomorphic polynomials on the disc.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscError {
    #[error("point {0} lies outside the admissible set")]
    DomainViolation(C64),
    #[error("field is not real-valued (asymmetry {0:e})")]
    NotReal(f64),
    #[error("function (nearly) vanishes on the circle (min modulus {0:e})")]
    ZeroOnCircle(f64),
    #[error("winding number is ambiguous (rounding gap {0})")]
    AmbiguousWinding(f64),
    #[error("malformed coefficient dump: {0}")]
    Format(String),
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Equispaced grid `exp(2 pi i j / m)`.
pub fn grid(m: usize) -> Vec<C64> {
    (0..m)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        .collect()
}

/// Fourier coefficients `c_k = (1/M) sum_j u_j zeta_j^{-k}`, stored at index `k mod M`.
pub fn dft(values: &[C64]) -> Vec<C64> {
    let m = values.len();
    let mut buf = values.to_vec();
    plan(m, false).process(&mut buf);
    let s = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Samples `sum_k c_k zeta_j^k` from coefficients stored at index `k mod M`.
pub fn idft(coeffs: &[C64]) -> Vec<C64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}

#[inline]
pub fn wrap(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// `u = sum_{k = k_min}^{N} a_k zeta^k` with `a_k ∈ C^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDisc {
    pub m: usize,
    pub order: usize,
    pub k_min: i64,
    pub coeffs: Vec<Vec<C64>>,
    /// l2-mass discarded by truncation while building this field.
    pub debt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub w22: f64,
    pub eps: f64,
    pub eps_norm: f64,
    pub sup: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub value: i64,
    pub gap: f64,
    pub min_modulus: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub k: i64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl FourierDisc {
    pub fn zeros_holomorphic(m: usize, order: usize) -> Self {
        Self::zeros(m, order, 0)
    }

    pub fn zeros_boundary(m: usize, order: usize) -> Self {
        Self::zeros(m, order, -(order as i64))
    }

    fn zeros(m: usize, order: usize, k_min: i64) -> Self {
        let len = (order as i64 - k_min + 1) as usize;
        FourierDisc {
            m,
            order,
            k_min,
            coeffs: vec![vec![C64::new(0.0, 0.0); m]; len],
            debt: 0.0,
        }
    }

    /// Holomorphic polynomial from coefficients `a_0..a_N`.
    pub fn holomorphic(coeffs: Vec<Vec<C64>>) -> Self {
        let m = coeffs.first().map_or(0, |c| c.len());
        let order = coeffs.len().saturating_sub(1);
        FourierDisc { m, order, k_min: 0, coeffs, debt: 0.0 }
    }

    /// Scalar holomorphic polynomial.
    pub fn scalar(coeffs: &[C64]) -> Self {
        Self::holomorphic(coeffs.iter().map(|c| vec![*c]).collect())
    }

    /// Scalar boundary field from `(k, a_k)` pairs.
    pub fn scalar_boundary(order: usize, terms: &[(i64, C64)]) -> Self {
        let mut u = Self::zeros_boundary(1, order);
        for &(k, a) in terms {
            u.coeffs[(k - u.k_min) as usize][0] += a;
        }
        u
    }

    pub fn is_holomorphic(&self) -> bool {
        self.k_min >= 0
    }

    pub fn k_range(&self) -> std::ops::RangeInclusive<i64> {
        self.k_min..=self.order as i64
    }

    pub fn coeff(&self, k: i64) -> Option<&[C64]> {
        if k < self.k_min || k > self.order as i64 {
            None
        } else {
            Some(&self.coeffs[(k - self.k_min) as usize])
        }
    }

    pub fn c(&self, k: i64, comp: usize) -> C64 {
        self.coeff(k).map_or(C64::new(0.0, 0.0), |a| a[comp])
    }

    pub fn coeff_mut(&mut self, k: i64) -> &mut [C64] {
        let i = (k - self.k_min) as usize;
        &mut self.coeffs[i]
    }

    /// Same data viewed as a boundary field (modes `-N..N`).
    pub fn to_boundary(&self) -> Self {
        if !self.is_holomorphic() {
            return self.clone();
        }
        let mut u = Self::zeros_boundary(self.m, self.order);
        for k in self.k_range() {
            u.coeff_mut(k).copy_from_slice(self.coeff(k).unwrap());
        }
        u.debt = self.debt;
        u
    }

    /// Point evaluation; holomorphic fields on the closed disc, boundary fields on the circle.
    pub fn evaluate(&self, zeta: C64) -> Result<Vec<C64>, DiscError> {
        let r = zeta.norm();
        if r > 1.0 + 1e-12 {
            return Err(DiscError::DomainViolation(zeta));
        }
        let has_negative = self.k_min < 0
            && (self.k_min..0).any(|k| self.coeff(k).unwrap().iter().any(|c| c.norm() > 0.0));
        if has_negative && (r - 1.0).abs() > 1e-12 {
            return Err(DiscError::DomainViolation(zeta));
        }
        Ok(self.eval_unchecked(zeta))
    }

    /// Horner evaluation without domain checks (`zeta != 0` when negative modes exist).
    pub fn eval_unchecked(&self, zeta: C64) -> Vec<C64> {
        let zero = C64::new(0.0, 0.0);
        let mut out = vec![zero; self.m];
        for k in (0..=self.order as i64).rev() {
            let a = self.coeff(k).unwrap();
            for (o, c) in out.iter_mut().zip(a) {
                *o = *o * zeta + c;
            }
        }
        if self.k_min < 0 {
            let w = 1.0 / zeta;
            let mut acc = vec![zero; self.m];
            for j in (1..=-self.k_min).rev() {
                let a = self.coeff(-j).unwrap();
                for (o, c) in acc.iter_mut().zip(a) {
                    *o = *o * w + c;
                }
            }
            for (o, a) in out.iter_mut().zip(&acc) {
                *o += a * w;
            }
        }
        out
    }

    /// Values on the grid of size `m_grid` (one vector per grid point).
    pub fn samples(&self, m_grid: usize) -> Vec<Vec<C64>> {
        assert!(
            m_grid as i64 >= self.order as i64 - self.k_min + 1,
            "grid too small for the truncation order"
        );
        let mut out = vec![vec![C64::new(0.0, 0.0); self.m]; m_grid];
        for comp in 0..self.m {
            let mut buf = vec![C64::new(0.0, 0.0); m_grid];
            for k in self.k_range() {
                buf[wrap(k, m_grid)] += self.c(k, comp);
            }
            let vals = idft(&buf);
            for (o, v) in out.iter_mut().zip(vals) {
                o[comp] = v;
            }
        }
        out
    }

    /// Samples of a scalar field.
    pub fn samples_scalar(&self, m_grid: usize) -> Vec<C64> {
        assert_eq!(self.m, 1);
        self.samples(m_grid).into_iter().map(|v| v[0]).collect()
    }

    /// Discrete Fourier fit of grid samples, keeping modes `k_min..=order`.
    pub fn from_samples(values: &[Vec<C64>], order: usize, holomorphic: bool) -> Self {
        let mg = values.len();
        let m = values.first().map_or(0, |v| v.len());
        let mut u = if holomorphic {
            Self::zeros_holomorphic(m, order)
        } else {
            Self::zeros_boundary(m, order)
        };
        let mut dropped = 0.0;
        for comp in 0..m {
            let col: Vec<C64> = values.iter().map(|v| v[comp]).collect();
            let c = dft(&col);
            let half = (mg / 2) as i64;
            for idx in 0..mg {
                let k = if idx as i64 > half { idx as i64 - mg as i64 } else { idx as i64 };
                if k >= u.k_min && k <= order as i64 {
                    u.coeff_mut(k)[comp] = c[idx];
                } else {
                    dropped += c[idx].norm_sqr();
                }
            }
        }
        u.debt = dropped.sqrt();
        u
    }

    pub fn from_samples_scalar(values: &[C64], order: usize, holomorphic: bool) -> Self {
        let v: Vec<Vec<C64>> = values.iter().map(|c| vec![*c]).collect();
        Self::from_samples(&v, order, holomorphic)
    }

    /// `d/dzeta`; the mode leaving the range is accounted as debt.
    pub fn derivative(&self) -> Self {
        let mut u = Self::zeros(self.m, self.order, self.k_min);
        let mut dropped = 0.0;
        for k in self.k_range() {
            if k == 0 {
                continue;
            }
            let a = self.coeff(k).unwrap();
            let target = k - 1;
            let kf = k as f64;
            if target < u.k_min {
                dropped += a.iter().map(|c| (c * kf).norm_sqr()).sum::<f64>();
                continue;
            }
            let dst = u.coeff_mut(target);
            for (d, c) in dst.iter_mut().zip(a) {
                *d = c * kf;
            }
        }
        u.debt = self.debt + dropped.sqrt();
        u
    }

    /// Angular derivative `d/dt` of `u(e^{it})`.
    pub fn d_dt(&self) -> Self {
        let mut u = self.clone();
        for k in self.k_range() {
            let f = C64::new(0.0, k as f64);
            u.coeff_mut(k).iter_mut().for_each(|c| *c *= f);
        }
        u
    }

    fn binary(&self, other: &Self, f: impl Fn(&[C64], &[C64]) -> Vec<C64>, m_out: usize) -> Self {
        let order = self.order.max(other.order);
        let holo = self.is_holomorphic() && other.is_holomorphic();
        let mut out = Self::zeros(m_out, order, if holo { 0 } else { -(order as i64) });
        let mut dropped = vec![0.0; 1];
        for ka in self.k_range() {
            let a = self.coeff(ka).unwrap();
            for kb in other.k_range() {
                let b = other.coeff(kb).unwrap();
                let p = f(a, b);
                let k = ka + kb;
                if k >= out.k_min && k <= order as i64 {
                    for (d, c) in out.coeff_mut(k).iter_mut().zip(&p) {
                        *d += c;
                    }
                } else {
                    dropped[0] += p.iter().map(|c| c.norm_sqr()).sum::<f64>();
                }
            }
        }
        out.debt = self.debt + other.debt + dropped[0].sqrt();
        out
    }

    /// Coefficient convolution truncated to the order: scalar times vector or componentwise.
    pub fn boundary_product(&self, other: &Self) -> Self {
        let (ma, mb) = (self.m, other.m);
        let m_out = ma.max(mb);
        assert!(ma == mb || ma == 1 || mb == 1, "incompatible dimensions");
        self.binary(
            other,
            |a, b| {
                (0..m_out)
                    .map(|j| a[if ma == 1 { 0 } else { j }] * b[if mb == 1 { 0 } else { j }])
                    .collect()
            },
            m_out,
        )
    }

    /// `z ∙ w = sum_j z_j w_j` (no conjugation).
    pub fn dot(&self, other: &Self) -> Self {
        assert_eq!(self.m, other.m, "dot needs equal dimensions");
        self.binary(
            other,
            |a, b| vec![a.iter().zip(b).map(|(x, y)| x * y).sum()],
            1,
        )
    }

    /// `pi(u)`: strictly negative frequencies.
    pub fn project_neg(&self) -> Self {
        let mut out = Self::zeros_boundary(self.m, self.order);
        for k in self.k_min..0 {
            out.coeff_mut(k).copy_from_slice(self.coeff(k).unwrap());
        }
        out
    }

    /// `P(u) = conj(sum_{k<0} a_k zeta^k) = sum_{k>0} conj(a_{-k}) zeta^k`.
    pub fn project_conj_neg(&self) -> Self {
        let mut out = Self::zeros_holomorphic(self.m, self.order);
        for k in 1..=self.order as i64 {
            if let Some(a) = self.coeff(-k) {
                let dst = out.coeff_mut(k);
                for (d, c) in dst.iter_mut().zip(a) {
                    *d = c.conj();
                }
            }
        }
        out
    }

    /// Pointwise complex conjugate on the circle.
    pub fn conj(&self) -> Self {
        let order = self.order;
        let mut out = Self::zeros_boundary(self.m, order);
        for k in self.k_range() {
            if -k >= out.k_min {
                let src = self.coeff(k).unwrap();
                let dst = out.coeff_mut(-k);
                for (d, c) in dst.iter_mut().zip(src) {
                    *d = c.conj();
                }
            }
        }
        out.debt = self.debt;
        out
    }

    /// Largest violation of `a_{-k} = conj(a_k)`.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let kmax = self.order as i64;
        for k in 0..=kmax {
            for comp in 0..self.m {
                let d = self.c(k, comp) - self.c(-k, comp).conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().flatten().for_each(|c| *c *= s);
        out
    }

    fn combine(&self, other: &Self, s: f64) -> Self {
        assert_eq!(self.m, other.m);
        let order = self.order.max(other.order);
        let k_min = self.k_min.min(other.k_min).max(-(order as i64));
        let mut out = Self::zeros(self.m, order, k_min);
        for k in out.k_range() {
            let dst = out.coeff_mut(k);
            if let Some(a) = self.coeff(k) {
                dst.iter_mut().zip(a).for_each(|(d, c)| *d += c);
            }
            if let Some(b) = other.coeff(k) {
                dst.iter_mut().zip(b).for_each(|(d, c)| *d += c * s);
            }
        }
        out.debt = self.debt + other.debt;
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    /// L2, W^{2,2}, eps- and sup-norms.
    pub fn norms(&self, eps: f64) -> NormReport {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for k in self.k_range() {
            let a2: f64 = self.coeff(k).unwrap().iter().map(|c| c.norm_sqr()).sum();
            let kf = k as f64;
            s0 += a2;
            s1 += kf * kf * a2;
            s2 += kf.powi(4) * a2;
        }
        let m_grid = (16 * self.order).max(64);
        let sup = self
            .samples(m_grid)
            .iter()
            .map(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        NormReport {
            l2: s0.sqrt(),
            w22: (s0 + s1 + s2).sqrt(),
            eps,
            eps_norm: s0.sqrt() + eps * s1.sqrt() + eps * eps * s2.sqrt(),
            sup,
        }
    }

    /// `||u||_eps = ||u||_L + eps ||u'||_L + eps^2 ||u''||_L` (L2 norms, angular derivatives).
    pub fn eps_norm(&self, eps: f64) -> f64 {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for k in self.k_range() {
            let a2: f64 = self.coeff(k).unwrap().iter().map(|c| c.norm_sqr()).sum();
            let kf = k as f64;
            s0 += a2;
            s1 += kf * kf * a2;
            s2 += kf.powi(4) * a2;
        }
        s0.sqrt() + eps * s1.sqrt() + eps * eps * s2.sqrt()
    }

    /// Sum of coefficient moduli per component, maximized: an upper bound of the sup norm.
    pub fn coeff_l1(&self) -> f64 {
        (0..self.m)
            .map(|comp| self.k_range().map(|k| self.c(k, comp).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_entries(&self) -> Vec<CoeffEntry> {
        self.k_range()
            .map(|k| {
                let a = self.coeff(k).unwrap();
                CoeffEntry {
                    k,
                    re: a.iter().map(|c| c.re).collect(),
                    im: a.iter().map(|c| c.im).collect(),
                }
            })
            .collect()
    }

    pub fn from_entries(entries: &[CoeffEntry], holomorphic: bool) -> Result<Self, DiscError> {
        let first = entries.first().ok_or_else(|| DiscError::Format("no coefficients".into()))?;
        let m = first.re.len();
        let order = entries.iter().map(|e| e.k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut u = if holomorphic {
            Self::zeros_holomorphic(m, order)
        } else {
            Self::zeros_boundary(m, order)
        };
        for e in entries {
            if e.re.len() != m || e.im.len() != m {
                return Err(DiscError::Format(format!("entry k={} has wrong length", e.k)));
            }
            if e.k < u.k_min {
                return Err(DiscError::Format(format!(
                    "negative mode k={} in a holomorphic field",
                    e.k
                )));
            }
            let dst = u.coeff_mut(e.k);
            for j in 0..m {
                dst[j] = C64::new(e.re[j], e.im[j]);
            }
        }
        Ok(u)
    }
}

/// Holomorphic `G` with `Re G = eta` on the circle and `Im G(0) = im0`.
pub fn analytic_completion(eta: &FourierDisc, im0: f64) -> Result<FourierDisc, DiscError> {
    let scale = eta
        .coeffs
        .iter()
        .flatten()
        .map(|c| c.norm())
        .fold(1.0, f64::max);
    let defect = eta.reality_defect();
    if defect > 1e-10 * scale {
        return Err(DiscError::NotReal(defect));
    }
    let mut g = FourierDisc::zeros_holomorphic(eta.m, eta.order);
    for comp in 0..eta.m {
        g.coeff_mut(0)[comp] = C64::new(eta.c(0, comp).re, im0);
        for k in 1..=eta.order as i64 {
            g.coeff_mut(k)[comp] = eta.c(k, comp) * 2.0;
        }
    }
    g.debt = eta.debt;
    Ok(g)
}

/// Winding number of a scalar field from `(1/2 pi i) ∮ u'/u` on `max(8N, 64)` points.
pub fn winding(u: &FourierDisc) -> Result<Winding, DiscError> {
    assert_eq!(u.m, 1, "winding needs a scalar field");
    let mg = (8 * u.order).max(64);
    let vals = u.samples_scalar(mg);
    let der = u.derivative().samples_scalar(mg);
    winding_from(&vals, &der, &grid(mg))
}

/// Trapezoid rule for `(1/M) sum zeta u'/u` given samples of `u` and `u'`.
pub fn winding_from(vals: &[C64], der: &[C64], pts: &[C64]) -> Result<Winding, DiscError> {
    let min_modulus = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_modulus < 1e-8 {
        return Err(DiscError::ZeroOnCircle(min_modulus));
    }
    let mg = vals.len() as f64;
    let s: C64 = vals
        .iter()
        .zip(der)
        .zip(pts)
        .map(|((v, d), z)| z * d / v)
        .sum::<C64>()
        / mg;
    let value = s.re.round();
    let gap = (s.re - value).abs().max(s.im.abs());
    if gap >= 0.25 {
        return Err(DiscError::AmbiguousWinding(gap));
    }
    Ok(Winding { value: value as i64, gap, min_modulus })
}

/// Winding number of closed-curve samples by summing phase increments.
pub fn winding_of_samples(vals: &[C64]) -> Result<Winding, DiscError> {
    let min_modulus = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_modulus < 1e-8 {
        return Err(DiscError::ZeroOnCircle(min_modulus));
    }
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for j in 0..vals.len() {
        let a = vals[j];
        let b = vals[(j + 1) % vals.len()];
        let d = (b / a).arg();
        worst = worst.max(d.abs());
        total += d;
    }
    let w = total / (2.0 * PI);
    let value = w.round();
    // a phase jump close to pi means the sampling cannot resolve the curve
    let gap = (w - value).abs().max(worst / PI - 0.5).max(0.0);
    if gap >= 0.25 {
        return Err(DiscError::AmbiguousWinding(gap));
    }
    Ok(Winding { value: value as i64, gap, min_modulus })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluation() {
        let id = FourierDisc::scalar(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((id.evaluate(c(0.0, 1.0)).unwrap()[0] - c(0.0, 1.0)).norm() < 1e-15);
        let p = FourierDisc::scalar(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!((p.evaluate(c(0.5, 0.0)).unwrap()[0] - c(2.0, 0.0)).norm() < 1e-15);
        let bar = FourierDisc::scalar_boundary(4, &[(-1, c(1.0, 0.0))]);
        let z = C64::from_polar(1.0, PI / 4.0);
        assert!((bar.evaluate(z).unwrap()[0] - z.conj()).norm() < 1e-15);
        assert!(matches!(p.evaluate(c(1.5, 0.0)), Err(DiscError::DomainViolation(_))));
    }

    #[test]
    fn laurent_evaluation_matches_samples() {
        let u = FourierDisc::scalar_boundary(
            3,
            &[(-3, c(0.1, 0.2)), (-1, c(-1.0, 0.5)), (0, c(2.0, 0.0)), (2, c(0.0, 1.0))],
        );
        let g = grid(16);
        let s = u.samples_scalar(16);
        for (z, v) in g.iter().zip(&s) {
            assert!((u.eval_unchecked(*z)[0] - v).norm() < 1e-13);
        }
    }

    #[test]
    fn derivatives() {
        let sq = FourierDisc::scalar(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let d = sq.derivative();
        assert_eq!(d.c(1, 0), c(2.0, 0.0));
        assert_eq!(d.c(2, 0), c(0.0, 0.0));
        let k = FourierDisc::scalar(&[c(3.0, 0.0)]).derivative();
        assert_eq!(k.c(0, 0), c(0.0, 0.0));
        let e = FourierDisc::scalar_boundary(5, &[(3, c(1.0, 0.0))]).d_dt();
        assert_eq!(e.c(3, 0), c(0.0, 3.0));
    }

    #[test]
    fn products() {
        let z = FourierDisc::scalar(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let zz = z.boundary_product(&z);
        assert_eq!(zz.c(2, 0), c(1.0, 0.0));
        let e1 = FourierDisc::holomorphic(vec![vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        let e2 = FourierDisc::holomorphic(vec![vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert_eq!(e1.dot(&e2).c(0, 0), c(0.0, 0.0));
        // (zeta, i) ∙ (1, zeta) = (1 + i) zeta
        let a = FourierDisc::holomorphic(vec![
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]);
        let b = FourierDisc::holomorphic(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let d = a.dot(&b);
        assert_eq!(d.c(0, 0), c(0.0, 0.0));
        assert_eq!(d.c(1, 0), c(1.0, 1.0));
    }

    #[test]
    fn projections() {
        let u = FourierDisc::scalar_boundary(3, &[(-2, c(1.0, 0.0)), (0, c(3.0, 0.0)), (1, c(1.0, 0.0))]);
        let p = u.project_neg();
        assert_eq!(p.c(-2, 0), c(1.0, 0.0));
        assert_eq!(p.c(0, 0), c(0.0, 0.0));
        assert_eq!(p.c(1, 0), c(0.0, 0.0));
        let holo = FourierDisc::scalar(&[c(1.0, 0.0), c(2.0, 1.0)]);
        assert!(holo.project_neg().coeff_l1() == 0.0);
        assert!(holo.to_boundary().project_conj_neg().coeff_l1() == 0.0);
        let a = c(0.3, -0.7);
        let q = FourierDisc::scalar_boundary(2, &[(-1, a)]).project_conj_neg();
        assert_eq!(q.c(1, 0), a.conj());
        let cos2 = FourierDisc::scalar_boundary(2, &[(-1, c(1.0, 0.0)), (1, c(1.0, 0.0))]);
        let pc = cos2.project_conj_neg();
        assert_eq!(pc.c(1, 0), c(1.0, 0.0));
        assert_eq!(pc.c(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn completions() {
        let cos = FourierDisc::scalar_boundary(2, &[(-1, c(0.5, 0.0)), (1, c(0.5, 0.0))]);
        let g = analytic_completion(&cos, 0.0).unwrap();
        assert_eq!(g.c(1, 0), c(1.0, 0.0));
        assert_eq!(g.c(0, 0), c(0.0, 0.0));
        let one = FourierDisc::scalar_boundary(2, &[(0, c(1.0, 0.0))]);
        assert_eq!(analytic_completion(&one, 0.0).unwrap().c(0, 0), c(1.0, 0.0));
        // sin t = (zeta - 1/zeta) / 2i
        let sin = FourierDisc::scalar_boundary(2, &[(1, c(0.0, -0.5)), (-1, c(0.0, 0.5))]);
        let g = analytic_completion(&sin, 0.0).unwrap();
        assert!((g.c(1, 0) - c(0.0, -1.0)).norm() < 1e-15);
        let bad = FourierDisc::scalar_boundary(2, &[(1, c(1.0, 0.0))]);
        assert!(matches!(analytic_completion(&bad, 0.0), Err(DiscError::NotReal(_))));
    }

    #[test]
    fn norm_examples() {
        let z = FourierDisc::scalar(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((z.norms(0.5).w22 - 3f64.sqrt()).abs() < 1e-15);
        let one = FourierDisc::scalar(&[c(1.0, 0.0)]);
        let r = one.norms(0.1);
        assert_eq!((r.l2, r.w22), (1.0, 1.0));
        assert!((r.sup - 1.0).abs() < 1e-15);
    }

    #[test]
    fn windings() {
        let z3 = FourierDisc::scalar(&[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(winding(&z3).unwrap().value, 3);
        let two = FourierDisc::scalar(&[c(2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(winding(&two).unwrap().value, 0);
        let inv = FourierDisc::scalar_boundary(2, &[(-1, c(1.0, 0.0))]);
        assert_eq!(winding(&inv).unwrap().value, -1);
        let through = FourierDisc::scalar(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(winding(&through), Err(DiscError::ZeroOnCircle(_))));
    }

    #[test]
    fn dump_round_trip() {
        let u = FourierDisc::scalar_boundary(2, &[(-2, c(1.0, 2.0)), (1, c(0.5, 0.0))]);
        let e = u.to_entries();
        let v = FourierDisc::from_entries(&e, false).unwrap();
        assert_eq!(u, v);
    }
}
