//! Stationary discs: collocated residuals, Newton solves, normalization and
//! boundary certificates.

mod linear;

pub use linear::{
    choose_eps, contraction_solve, forward_linearization, holomorphy_defect, round_trip_error,
    solve_linearized_at_axis, ContractionOutcome, LinearMode, LinearSolution, LinearizedData,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disc::{dft, grid, winding_from, winding_of_samples, wrap, CoeffEntry, DiscError, FourierDisc};
use crate::domain::{cnorm, ComplexJet, Defining, DomainError, DomainSpec};
use crate::factor::FactorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StationaryError {
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("iterate left the admissible region: {0}")]
    LeftDomain(String),
    #[error("contraction margin is not positive ({0:e})")]
    ContractionFailure(f64),
    #[error("pairing f'∙f̃ is not a positive constant (deviation {0:e})")]
    NonConstantPairing(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TwoPoint,
    Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// `f(xi) = w`
    Point(Vec<C64>),
    /// `f'(0) = lambda v`
    Direction(Vec<C64>),
}

/// Normalization `f(0) = z` together with the second condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub z: Vec<C64>,
    pub target: Target,
}

impl Constraint {
    pub fn two_point(z: Vec<C64>, w: Vec<C64>) -> Self {
        Constraint { z, target: Target::Point(w) }
    }

    pub fn direction(z: Vec<C64>, v: Vec<C64>) -> Self {
        Constraint { z, target: Target::Direction(v) }
    }

    pub fn mode(&self) -> Mode {
        match self.target {
            Target::Point(_) => Mode::TwoPoint,
            Target::Direction(_) => Mode::Direction,
        }
    }

    pub fn target_vec(&self) -> &[C64] {
        match &self.target {
            Target::Point(w) | Target::Direction(w) => w,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), StationaryError> {
        if self.z.len() != n || self.target_vec().len() != n {
            return Err(StationaryError::InvalidConstraint(format!(
                "points must have {n} coordinates"
            )));
        }
        if self.z.iter().chain(self.target_vec()).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(StationaryError::InvalidConstraint("non-finite coordinate".into()));
        }
        match &self.target {
            Target::Point(w) => {
                let d: Vec<C64> = w.iter().zip(&self.z).map(|(a, b)| a - b).collect();
                if cnorm(&d) < 1e-14 {
                    return Err(StationaryError::InvalidConstraint("w coincides with z".into()));
                }
            }
            Target::Direction(v) => {
                if cnorm(v) < 1e-14 {
                    return Err(StationaryError::InvalidConstraint("direction is zero".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDisc {
    pub mode: Mode,
    pub f: FourierDisc,
    pub f_tilde: FourierDisc,
    /// real boundary field
    pub rho: FourierDisc,
    /// real boundary field, `q(1) = 0`
    pub q: FourierDisc,
    /// `lambda` (direction mode) or `xi` (two-point mode)
    pub multiplier: f64,
    pub residual_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub tol_res: f64,
    pub max_iter: usize,
    pub max_damping: usize,
    /// iterates with `|f| > max_modulus` somewhere on the circle are rejected
    pub max_modulus: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tol_res: 1e-10, max_iter: 50, max_damping: 5, max_modulus: 10.0 }
    }
}

/// The three residual components on the collocation grid.
#[derive(Debug, Clone)]
pub struct Residual {
    /// `r∘f` as a real boundary field
    pub c1: FourierDisc,
    /// grid sup of `|r∘f|`
    pub c1_sup: f64,
    /// `pi(zeta (1 + q) r_z∘f)`
    pub c2: FourierDisc,
    pub c3: Vec<C64>,
}

impl Residual {
    /// Blended sup norm over the three components.
    pub fn norm(&self) -> f64 {
        let c3 = self.c3.iter().map(|c| c.norm()).fold(0.0, f64::max);
        self.c1_sup.max(self.c2.coeff_l1()).max(c3)
    }
}

/// Collocation grid size for truncation order `order`.
pub fn collocation_size(order: usize) -> usize {
    (4 * order).max(16)
}

struct Colloc {
    pts: Vec<C64>,
    q: Vec<f64>,
    jets: Vec<ComplexJet>,
}

fn collocate(
    r: &dyn Defining,
    f: &FourierDisc,
    q: &FourierDisc,
    max_modulus: f64,
) -> Result<Colloc, StationaryError> {
    let m = collocation_size(f.order.max(q.order));
    let pts = grid(m);
    let fs = f.samples(m);
    let qs: Vec<f64> = q.samples_scalar(m).into_iter().map(|c| c.re).collect();
    if let Some(v) = qs.iter().find(|v| !(1.0 + **v > 0.0)) {
        return Err(StationaryError::LeftDomain(format!("1 + q = {:e} on the circle", 1.0 + v)));
    }
    let mut jets = Vec::with_capacity(m);
    for p in &fs {
        let mod_p = cnorm(p);
        if !(mod_p <= max_modulus) {
            return Err(StationaryError::LeftDomain(format!("|f| = {mod_p:e} on the circle")));
        }
        let jet = r
            .complex_jet(p)
            .map_err(|e| StationaryError::LeftDomain(e.to_string()))?;
        jets.push(jet);
    }
    Ok(Colloc { pts, q: qs, jets })
}

fn multiplier_ok(mode: Mode, mult: f64) -> Result<(), StationaryError> {
    let ok = match mode {
        Mode::TwoPoint => mult > 0.0 && mult < 1.0,
        Mode::Direction => mult > 0.0 && mult.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(StationaryError::LeftDomain(format!("multiplier {mult:e} out of range")))
    }
}

fn s_field(col: &Colloc, l: usize) -> Vec<C64> {
    col.pts
        .iter()
        .zip(&col.q)
        .zip(&col.jets)
        .map(|((z, q), j)| z * (1.0 + q) * j.r_z[l])
        .collect()
}

fn third(f: &FourierDisc, cons: &Constraint, mult: f64) -> Vec<C64> {
    match &cons.target {
        Target::Point(w) => f
            .eval_unchecked(C64::new(mult, 0.0))
            .iter()
            .zip(w)
            .map(|(a, b)| a - b)
            .collect(),
        Target::Direction(v) => (0..f.m).map(|l| f.c(1, l) - v[l] * mult).collect(),
    }
}

fn residual_from(col: &Colloc, f: &FourierDisc, cons: &Constraint, mult: f64) -> Residual {
    let n = f.m;
    let order = f.order;
    let vals: Vec<C64> = col.jets.iter().map(|j| C64::new(j.value, 0.0)).collect();
    let c1_sup = col.jets.iter().map(|j| j.value.abs()).fold(0.0, f64::max);
    let c1 = FourierDisc::from_samples_scalar(&vals, order, false);
    let m = col.pts.len();
    let mut c2 = FourierDisc::zeros_boundary(n, order);
    for l in 0..n {
        let s = dft(&s_field(col, l));
        for k in 1..=order as i64 {
            c2.coeff_mut(-k)[l] = s[wrap(-k, m)];
        }
    }
    Residual { c1, c1_sup, c2, c3: third(f, cons, mult) }
}

/// Residual of the stationary-disc system for `(f, q, multiplier)`.
pub fn residual(
    r: &dyn Defining,
    cons: &Constraint,
    f: &FourierDisc,
    q: &FourierDisc,
    multiplier: f64,
) -> Result<Residual, StationaryError> {
    let col = collocate(r, f, q, f64::INFINITY)?;
    Ok(residual_from(&col, f, cons, multiplier))
}

/// Real field with modes `-N..N` from `q_1..q_N`, with `q_0` chosen so that `q(1) = 0`.
pub fn gauged_real_field(q_pos: &[C64]) -> FourierDisc {
    let order = q_pos.len().max(1);
    let mut q = FourierDisc::zeros_boundary(1, order);
    let mut s = 0.0;
    for (i, c) in q_pos.iter().enumerate() {
        let k = i as i64 + 1;
        q.coeff_mut(k)[0] = *c;
        q.coeff_mut(-k)[0] = c.conj();
        s += c.re;
    }
    q.coeff_mut(0)[0] = C64::new(-2.0 * s, 0.0);
    q
}

struct Layout {
    n: usize,
    order: usize,
}

impl Layout {
    fn a(&self, k: usize, l: usize, part: usize) -> usize {
        2 * (self.n * (k - 1) + l) + part
    }
    fn q(&self, k: usize, part: usize) -> usize {
        2 * self.n * self.order + 2 * (k - 1) + part
    }
    fn mult(&self) -> usize {
        2 * self.n * self.order + 2 * self.order
    }
    fn cols(&self) -> usize {
        self.mult() + 1
    }
    fn rows(&self) -> usize {
        collocation_size(self.order) + 2 * self.n * self.order + 2 * self.n
    }

    fn pack(&self, f: &FourierDisc, q: &FourierDisc, mult: f64) -> DVector<f64> {
        let mut x = DVector::zeros(self.cols());
        for k in 1..=self.order {
            for l in 0..self.n {
                let c = f.c(k as i64, l);
                x[self.a(k, l, 0)] = c.re;
                x[self.a(k, l, 1)] = c.im;
            }
            let c = q.c(k as i64, 0);
            x[self.q(k, 0)] = c.re;
            x[self.q(k, 1)] = c.im;
        }
        x[self.mult()] = mult;
        x
    }

    fn unpack(&self, x: &DVector<f64>, z: &[C64]) -> (FourierDisc, FourierDisc, f64) {
        let mut f = FourierDisc::zeros_holomorphic(self.n, self.order);
        f.coeff_mut(0).copy_from_slice(z);
        for k in 1..=self.order {
            for l in 0..self.n {
                f.coeff_mut(k as i64)[l] = C64::new(x[self.a(k, l, 0)], x[self.a(k, l, 1)]);
            }
        }
        let qk: Vec<C64> = (1..=self.order)
            .map(|k| C64::new(x[self.q(k, 0)], x[self.q(k, 1)]))
            .collect();
        (f, gauged_real_field(&qk), x[self.mult()])
    }
}

fn residual_rows(lay: &Layout, col: &Colloc, res: &Residual) -> DVector<f64> {
    let m = col.pts.len();
    let w1 = 1.0 / (m as f64).sqrt();
    let mut out = DVector::zeros(lay.rows());
    for (j, jet) in col.jets.iter().enumerate() {
        out[j] = w1 * jet.value;
    }
    for k in 1..=lay.order {
        for l in 0..lay.n {
            let row = m + 2 * (lay.n * (k - 1) + l);
            let c = res.c2.c(-(k as i64), l);
            out[row] = c.re;
            out[row + 1] = c.im;
        }
    }
    let base = m + 2 * lay.n * lay.order;
    for (l, c) in res.c3.iter().enumerate() {
        out[base + 2 * l] = c.re;
        out[base + 2 * l + 1] = c.im;
    }
    out
}

fn jacobian(
    lay: &Layout,
    col: &Colloc,
    f: &FourierDisc,
    cons: &Constraint,
    mult: f64,
) -> DMatrix<f64> {
    let (n, order) = (lay.n, lay.order);
    let m = col.pts.len();
    let w1 = 1.0 / (m as f64).sqrt();
    let mut jac = DMatrix::zeros(lay.rows(), lay.cols());
    let i = C64::new(0.0, 1.0);

    for (jj, jet) in col.jets.iter().enumerate() {
        for k in 1..=order {
            let zk = col.pts[(jj * k) % m];
            for l in 0..n {
                let g = jet.r_z[l] * zk;
                jac[(jj, lay.a(k, l, 0))] = 2.0 * g.re * w1;
                jac[(jj, lay.a(k, l, 1))] = -2.0 * g.im * w1;
            }
        }
    }

    let fac: Vec<C64> = col.pts.iter().zip(&col.q).map(|(z, q)| z * (1.0 + q)).collect();
    let hat = |sel: &dyn Fn(&ComplexJet) -> C64| -> Vec<C64> {
        let vals: Vec<C64> = col.jets.iter().zip(&fac).map(|(j, c)| c * sel(j)).collect();
        dft(&vals)
    };
    let mut u_hat = Vec::with_capacity(n * n);
    let mut v_hat = Vec::with_capacity(n * n);
    for l in 0..n {
        for mm in 0..n {
            u_hat.push(hat(&|j: &ComplexJet| j.r_zz[(l, mm)]));
            v_hat.push(hat(&|j: &ComplexJet| j.r_zzbar[(l, mm)]));
        }
    }
    let w_hat: Vec<Vec<C64>> = (0..n)
        .map(|l| {
            let vals: Vec<C64> = col.jets.iter().zip(&col.pts).map(|(j, z)| z * j.r_z[l]).collect();
            dft(&vals)
        })
        .collect();
    let at = |v: &[C64], k: i64| v[wrap(k, m)];
    for k in 1..=order {
        let ki = k as i64;
        for l in 0..n {
            let row = m + 2 * (n * (k - 1) + l);
            for kp in 1..=order {
                let kpi = kp as i64;
                for mm in 0..n {
                    let u = at(&u_hat[l * n + mm], -ki - kpi);
                    let v = at(&v_hat[l * n + mm], kpi - ki);
                    let dre = u + v;
                    let dim = i * (u - v);
                    jac[(row, lay.a(kp, mm, 0))] = dre.re;
                    jac[(row + 1, lay.a(kp, mm, 0))] = dre.im;
                    jac[(row, lay.a(kp, mm, 1))] = dim.re;
                    jac[(row + 1, lay.a(kp, mm, 1))] = dim.im;
                }
                let w = &w_hat[l];
                let dre = at(w, -ki - kpi) + at(w, kpi - ki) - at(w, -ki) * 2.0;
                let dim = i * (at(w, -ki - kpi) - at(w, kpi - ki));
                jac[(row, lay.q(kp, 0))] = dre.re;
                jac[(row + 1, lay.q(kp, 0))] = dre.im;
                jac[(row, lay.q(kp, 1))] = dim.re;
                jac[(row + 1, lay.q(kp, 1))] = dim.im;
            }
        }
    }

    let base = m + 2 * n * order;
    match &cons.target {
        Target::Point(_) => {
            let xi = mult;
            let fp = f.derivative().eval_unchecked(C64::new(xi, 0.0));
            for l in 0..n {
                let mut xk = 1.0;
                for k in 1..=order {
                    xk *= xi;
                    jac[(base + 2 * l, lay.a(k, l, 0))] = xk;
                    jac[(base + 2 * l + 1, lay.a(k, l, 1))] = xk;
                }
                jac[(base + 2 * l, lay.mult())] = fp[l].re;
                jac[(base + 2 * l + 1, lay.mult())] = fp[l].im;
            }
        }
        Target::Direction(v) => {
            for l in 0..n {
                jac[(base + 2 * l, lay.a(1, l, 0))] = 1.0;
                jac[(base + 2 * l + 1, lay.a(1, l, 1))] = 1.0;
                jac[(base + 2 * l, lay.mult())] = -v[l].re;
                jac[(base + 2 * l + 1, lay.mult())] = -v[l].im;
            }
        }
    }
    jac
}

struct Eval {
    f: FourierDisc,
    q: FourierDisc,
    mult: f64,
    col: Colloc,
    rows: DVector<f64>,
    norm: f64,
}

fn evaluate(
    r: &dyn Defining,
    cons: &Constraint,
    lay: &Layout,
    x: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<Eval, StationaryError> {
    let (f, q, mult) = lay.unpack(x, &cons.z);
    multiplier_ok(cons.mode(), mult)?;
    let col = collocate(r, &f, &q, cfg.max_modulus)?;
    let res = residual_from(&col, &f, cons, mult);
    let rows = residual_rows(lay, &col, &res);
    let norm = res.norm();
    Ok(Eval { f, q, mult, col, rows, norm })
}

/// Damped Gauss-Newton on the collocated system; `f(0) = z` is pinned.
///
/// Returns the normalized disc and the number of Newton steps taken.
pub fn newton_solve(
    r: &dyn Defining,
    cons: &Constraint,
    seed: &StationaryDisc,
    cfg: &NewtonConfig,
) -> Result<(StationaryDisc, usize), StationaryError> {
    let n = r.n();
    cons.validate(n)?;
    if seed.mode != cons.mode() || seed.f.m != n {
        return Err(StationaryError::InvalidConstraint("seed does not match the constraint".into()));
    }
    let lay = Layout { n, order: seed.f.order };
    let mut x = lay.pack(&seed.f, &seed.q, seed.multiplier);
    let mut cur = evaluate(r, cons, &lay, &x, cfg)?;
    let mut iterations = 0;
    while !(cur.norm < cfg.tol_res) {
        if iterations == cfg.max_iter {
            return Err(StationaryError::NoConvergence { iterations, residual: cur.norm });
        }
        iterations += 1;
        let jac = jacobian(&lay, &cur.col, &cur.f, cons, cur.mult);
        let normal = jac.tr_mul(&jac);
        let rhs = -jac.tr_mul(&cur.rows);
        let dx = normal
            .lu()
            .solve(&rhs)
            .ok_or(StationaryError::NoConvergence { iterations, residual: cur.norm })?;
        let ls = cur.rows.norm_squared();
        let mut alpha = 1.0;
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..=cfg.max_damping {
            let trial = &x + &dx * alpha;
            match evaluate(r, cons, &lay, &trial, cfg) {
                Ok(e) if e.rows.norm_squared() < ls || e.norm < cur.norm => {
                    accepted = Some((trial, e));
                    break;
                }
                Ok(_) => {}
                Err(e) => last_err = Some(e),
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, e)) => {
                x = trial;
                cur = e;
            }
            None => {
                return Err(match last_err {
                    Some(e @ StationaryError::LeftDomain(_)) => e,
                    _ => StationaryError::NoConvergence { iterations, residual: cur.norm },
                })
            }
        }
    }
    let disc = StationaryDisc {
        mode: cons.mode(),
        f: cur.f,
        f_tilde: seed.f_tilde.clone(),
        rho: seed.rho.clone(),
        q: cur.q,
        multiplier: cur.mult,
        residual_norm: cur.norm,
    };
    Ok((normalize(r, &disc)?, iterations))
}

/// `p = zeta f' ∙ (r_z∘f)` on the grid, together with the jets.
fn pairing_samples(
    r: &dyn Defining,
    f: &FourierDisc,
    m: usize,
) -> Result<(Vec<C64>, Vec<Vec<C64>>, Vec<ComplexJet>), StationaryError> {
    let pts = grid(m);
    let fs = f.samples(m);
    let fp = f.derivative().samples(m);
    let mut jets = Vec::with_capacity(m);
    for p in &fs {
        jets.push(r.complex_jet(p).map_err(|e| StationaryError::LeftDomain(e.to_string()))?);
    }
    let p = pts
        .iter()
        .zip(&fp)
        .zip(&jets)
        .map(|((z, d), j)| z * d.iter().zip(&j.r_z).map(|(a, b)| a * b).sum::<C64>())
        .collect();
    Ok((p, fp, jets))
}

/// Rescales `f̃` so that `f' ∙ f̃ ≡ 1` and recomputes `rho = |r_z| / (zeta f' ∙ r_z)`.
pub fn normalize(r: &dyn Defining, disc: &StationaryDisc) -> Result<StationaryDisc, StationaryError> {
    let f = &disc.f;
    let order = f.order;
    let m = collocation_size(order);
    let pts = grid(m);
    let (p, fp, jets) = pairing_samples(r, f, m)?;
    let qs = disc.q.samples_scalar(m);
    let s: Vec<Vec<C64>> = pts
        .iter()
        .zip(&qs)
        .zip(&jets)
        .map(|((z, q), j)| j.r_z.iter().map(|c| z * (1.0 + q.re) * c).collect())
        .collect();
    let pairing: Vec<C64> = fp
        .iter()
        .zip(&s)
        .map(|(d, v)| d.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect();
    let c = pairing.iter().sum::<C64>() / m as f64;
    let dev = pairing.iter().map(|v| (v - c).norm()).fold(0.0, f64::max) / c.norm();
    if !(dev <= 1e-8) || !(c.re > 0.0) {
        return Err(StationaryError::NonConstantPairing(dev));
    }
    let scaled: Vec<Vec<C64>> = s.iter().map(|v| v.iter().map(|a| a / c).collect()).collect();
    let f_tilde = FourierDisc::from_samples(&scaled, order, true);
    let mut rho_vals = Vec::with_capacity(m);
    for (pj, j) in p.iter().zip(&jets) {
        if !(pj.re > 0.0) {
            return Err(StationaryError::NonConstantPairing(dev));
        }
        rho_vals.push(C64::new(cnorm(&j.r_z) / pj.re, 0.0));
    }
    let rho = symmetrize(&FourierDisc::from_samples_scalar(&rho_vals, order, false));
    Ok(StationaryDisc {
        f_tilde,
        rho,
        ..disc.clone()
    })
}

fn symmetrize(u: &FourierDisc) -> FourierDisc {
    let mut out = u.clone();
    for k in 0..=u.order as i64 {
        for comp in 0..u.m {
            let avg = (u.c(k, comp) + u.c(-k, comp).conj()) * 0.5;
            out.coeff_mut(k)[comp] = avg;
            out.coeff_mut(-k)[comp] = avg.conj();
        }
    }
    out
}

impl StationaryDisc {
    /// Builds `q`, `f̃` and `rho` for a disc whose boundary lies on `{r = 0}`,
    /// using `1 + q = p(1)/p` with `p = zeta f' ∙ (r_z∘f)`.
    pub fn from_boundary_map(
        r: &dyn Defining,
        f: FourierDisc,
        mode: Mode,
        multiplier: f64,
    ) -> Result<Self, StationaryError> {
        let order = f.order;
        let m = collocation_size(order);
        let (p, _, _) = pairing_samples(r, &f, m)?;
        let p1 = p[0].re;
        let vals: Vec<C64> = p.iter().map(|v| C64::new(p1 / v.re - 1.0, 0.0)).collect();
        let raw = FourierDisc::from_samples_scalar(&vals, order, false);
        let qk: Vec<C64> = (1..=order as i64).map(|k| (raw.c(k, 0) + raw.c(-k, 0).conj()) * 0.5).collect();
        let q = gauged_real_field(&qk);
        let disc = StationaryDisc {
            mode,
            f_tilde: FourierDisc::zeros_holomorphic(f.m, order),
            rho: FourierDisc::zeros_boundary(1, order),
            f,
            q,
            multiplier,
            residual_norm: f64::NAN,
        };
        normalize(r, &disc)
    }

    pub fn order(&self) -> usize {
        self.f.order
    }

    pub fn n(&self) -> usize {
        self.f.m
    }

    /// The constraint this disc satisfies (`w = f(xi)` or `v = f'(0)/lambda`).
    pub fn constraint(&self) -> Constraint {
        let z = self.f.coeff(0).unwrap().to_vec();
        match self.mode {
            Mode::TwoPoint => Constraint::two_point(z, self.f.eval_unchecked(C64::new(self.multiplier, 0.0))),
            Mode::Direction => Constraint::direction(
                z,
                self.f.coeff(1).unwrap().iter().map(|c| c / self.multiplier).collect(),
            ),
        }
    }

    pub fn to_bundle(&self, diagnostics: Option<EReport>) -> DiscBundle {
        DiscBundle {
            mode: self.mode,
            multiplier: self.multiplier,
            f: self.f.to_entries(),
            f_tilde: self.f_tilde.to_entries(),
            rho: self.rho.to_entries(),
            q: self.q.to_entries(),
            residuals: BundleResiduals { residual_norm: self.residual_norm },
            diagnostics,
        }
    }

    pub fn from_bundle(b: &DiscBundle) -> Result<Self, StationaryError> {
        let f = FourierDisc::from_entries(&b.f, true)?;
        let f_tilde = FourierDisc::from_entries(&b.f_tilde, true)?;
        let rho = FourierDisc::from_entries(&b.rho, false)?;
        let q = FourierDisc::from_entries(&b.q, false)?;
        if f_tilde.m != f.m || rho.m != 1 || q.m != 1 {
            return Err(DiscError::Format("inconsistent dimensions".into()).into());
        }
        Ok(StationaryDisc {
            mode: b.mode,
            f,
            f_tilde,
            rho,
            q,
            multiplier: b.multiplier,
            residual_norm: b.residuals.residual_norm,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleResiduals {
    pub residual_norm: f64,
}

/// Serialized converged disc.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscBundle {
    pub mode: Mode,
    pub multiplier: f64,
    pub f: Vec<CoeffEntry>,
    pub f_tilde: Vec<CoeffEntry>,
    pub rho: Vec<CoeffEntry>,
    pub q: Vec<CoeffEntry>,
    pub residuals: BundleResiduals,
    #[serde(default)]
    pub diagnostics: Option<EReport>,
}

/// Certificate tolerances of `verify_e`.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EReport {
    pub sup_r: f64,
    pub pi_tail: f64,
    pub min_rho: f64,
    pub wind_phi: Option<i64>,
    pub wind_g: Option<i64>,
    pub holder_c: f64,
    pub pairing_defect: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Boundary certificates of a normalized disc, evaluated on an `8N`-point grid.
///
/// `probe` is an interior point in internal coordinates.
pub fn verify_e(domain: &DomainSpec, disc: &StationaryDisc, probe: &[C64]) -> EReport {
    let order = disc.order();
    let n = disc.n();
    let m = (8 * order).max(64);
    let pts = grid(m);
    let fs = disc.f.samples(m);
    let fp = disc.f.derivative().samples(m);
    let ft = disc.f_tilde.samples(m);
    let ftp = disc.f_tilde.derivative().samples(m);
    let rho: Vec<f64> = disc.rho.samples_scalar(m).iter().map(|c| c.re).collect();
    let mut failures = Vec::new();

    let mut sup_r: f64 = 0.0;
    let mut normals = Vec::with_capacity(m);
    for p in &fs {
        let jet = domain.r.complex_derivatives(p);
        sup_r = sup_r.max(jet.value.abs());
        let g = cnorm(&jet.r_z);
        normals.push(jet.r_z.iter().map(|c| c.conj() / g).collect::<Vec<C64>>());
    }

    // zeta rho conj(nu) should extend holomorphically
    let field: Vec<Vec<C64>> = pts
        .iter()
        .zip(&rho)
        .zip(&normals)
        .map(|((z, r), nu)| nu.iter().map(|c| z * r * c.conj()).collect())
        .collect();
    let mut pi_tail: f64 = 0.0;
    for l in 0..n {
        let col: Vec<C64> = field.iter().map(|v| v[l]).collect();
        let c = dft(&col);
        let tail: f64 = (1..m as i64 / 2).map(|k| c[wrap(-k, m)].norm()).sum();
        pi_tail = pi_tail.max(tail);
    }
    let min_rho = rho.iter().cloned().fold(f64::INFINITY, f64::min);

    let phi: Vec<C64> = fs
        .iter()
        .zip(&normals)
        .map(|(p, nu)| {
            probe
                .iter()
                .zip(p)
                .zip(nu)
                .map(|((a, b), c)| (a - b) * c.conj())
                .sum()
        })
        .collect();
    let wind_phi = winding_of_samples(&phi).ok().map(|w| w.value);

    let g_vals: Vec<C64> = fs
        .iter()
        .zip(&ft)
        .map(|(p, t)| probe.iter().zip(p).zip(t).map(|((a, b), c)| (a - b) * c).sum())
        .collect();
    let g_der: Vec<C64> = (0..m)
        .map(|j| {
            (0..n)
                .map(|l| -fp[j][l] * ft[j][l] + (probe[l] - fs[j][l]) * ftp[j][l])
                .sum()
        })
        .collect();
    let wind_g = winding_from(&g_vals, &g_der, &pts).ok().map(|w| w.value);

    let pairing_defect = fp
        .iter()
        .zip(&ft)
        .map(|(a, b)| (a.iter().zip(b).map(|(x, y)| x * y).sum::<C64>() - 1.0).norm())
        .fold(0.0, f64::max);

    let holder_c = holder_constant(&disc.f, (4 * order).clamp(64, 256));

    if !(sup_r < CERT_TOL) {
        failures.push(format!("r∘f residual {sup_r:e}"));
    }
    if !(pi_tail < CERT_TOL) {
        failures.push(format!("pi-tail {pi_tail:e}"));
    }
    if !(min_rho > 0.0) {
        failures.push(format!("rho not positive (min {min_rho:e})"));
    }
    if wind_phi != Some(0) {
        failures.push(format!("wind phi_z = {wind_phi:?}"));
    }
    if wind_g != Some(1) {
        failures.push(format!("wind G = {wind_g:?}"));
    }
    if !holder_c.is_finite() {
        failures.push("Hölder constant not finite".into());
    }
    EReport {
        sup_r,
        pi_tail,
        min_rho,
        wind_phi,
        wind_g,
        holder_c,
        pairing_defect,
        passed: failures.is_empty(),
        failures,
    }
}

/// `max |f(zeta_i) - f(zeta_j)| / sqrt|zeta_i - zeta_j|` over grid pairs.
pub fn holder_constant(f: &FourierDisc, m: usize) -> f64 {
    let pts = grid(m);
    let fs = f.samples(m);
    let mut c: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let d: Vec<C64> = fs[i].iter().zip(&fs[j]).map(|(a, b)| a - b).collect();
            c = c.max(cnorm(&d) / (pts[i] - pts[j]).norm().sqrt());
        }
    }
    c
}

/// `f∘a` with `a(zeta) = (zeta - b)/(1 - conj(b) zeta)`, refitted on the grid.
pub fn compose_mobius(f: &FourierDisc, b: C64) -> FourierDisc {
    let m = collocation_size(f.order) * 2;
    let vals: Vec<Vec<C64>> = grid(m)
        .into_iter()
        .map(|z| f.eval_unchecked((z - b) / (1.0 - b.conj() * z)))
        .collect();
    FourierDisc::from_samples(&vals, f.order, true)
}
