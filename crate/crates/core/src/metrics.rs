//! Lempert function, Kobayashi–Royden metric and their Carathéodory certificates,
//! computed from converged extremal discs.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::continuation::{solve_extremal, ContinuationError, SolveConfig, TracePoint};
use crate::disc::{grid, winding_from};
use crate::domain::DomainSpec;
use crate::stationary::{verify_e, Constraint, EReport, StationaryDisc, StationaryError};

#[derive(Debug, Error, Clone)]
pub enum MetricsError {
    #[error("G(z, .) does not wind exactly once around 0: {0}")]
    WindingNotOne(String),
    #[error("Newton polish of the left inverse failed: {0}")]
    NewtonFailure(String),
    #[error(transparent)]
    Solve(#[from] ContinuationError),
}

impl From<StationaryError> for MetricsError {
    fn from(e: StationaryError) -> Self {
        MetricsError::Solve(e.into())
    }
}

/// Acceptance threshold of `certificate_gap`.
pub const GAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    TwoPoint,
    Infinitesimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Windings {
    pub wind_phi: Option<i64>,
    pub wind_g: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsResult {
    pub kind: MetricKind,
    pub value: f64,
    pub xi_or_lambda: f64,
    pub certificate_gap: f64,
    pub windings: Windings,
    pub residuals: EReport,
    /// all certificates passed
    pub certified: bool,
}

/// A metric value with the disc and path that produced it.
#[derive(Debug, Clone)]
pub struct Solved {
    pub result: MetricsResult,
    pub disc: StationaryDisc,
    pub trace: Vec<TracePoint>,
}

/// `G(z, zeta) = (z - f(zeta)) ∙ f̃(zeta)`.
pub fn g_eval(disc: &StationaryDisc, z: &[C64], zeta: C64) -> C64 {
    let f = disc.f.eval_unchecked(zeta);
    let t = disc.f_tilde.eval_unchecked(zeta);
    z.iter().zip(&f).zip(&t).map(|((a, b), c)| (a - b) * c).sum()
}

/// `d/dzeta G(z, zeta)`.
fn g_der(disc: &StationaryDisc, z: &[C64], zeta: C64) -> C64 {
    let f = disc.f.eval_unchecked(zeta);
    let fp = disc.f.derivative().eval_unchecked(zeta);
    let t = disc.f_tilde.eval_unchecked(zeta);
    let tp = disc.f_tilde.derivative().eval_unchecked(zeta);
    (0..z.len()).map(|l| -fp[l] * t[l] + (z[l] - f[l]) * tp[l]).sum()
}

/// The unique root of `G(z, .)` in the disc (internal coordinates).
pub fn left_inverse(disc: &StationaryDisc, z: &[C64]) -> Result<C64, MetricsError> {
    let m = (8 * disc.order()).max(64);
    let pts = grid(m);
    let fs = disc.f.samples(m);
    let fp = disc.f.derivative().samples(m);
    let ft = disc.f_tilde.samples(m);
    let ftp = disc.f_tilde.derivative().samples(m);
    let n = z.len();
    let vals: Vec<C64> = (0..m)
        .map(|j| (0..n).map(|l| (z[l] - fs[j][l]) * ft[j][l]).sum())
        .collect();
    let der: Vec<C64> = (0..m)
        .map(|j| (0..n).map(|l| -fp[j][l] * ft[j][l] + (z[l] - fs[j][l]) * ftp[j][l]).sum())
        .collect();
    let w = winding_from(&vals, &der, &pts).map_err(|e| MetricsError::WindingNotOne(e.to_string()))?;
    if w.value != 1 {
        return Err(MetricsError::WindingNotOne(format!("winding number {}", w.value)));
    }
    let mut zeta: C64 = (0..m).map(|j| pts[j] * pts[j] * der[j] / vals[j]).sum::<C64>() / m as f64;
    for _ in 0..60 {
        let g = g_eval(disc, z, zeta);
        if g.norm() < 1e-12 {
            break;
        }
        let d = g_der(disc, z, zeta);
        if d.norm() == 0.0 {
            return Err(MetricsError::NewtonFailure("vanishing derivative".into()));
        }
        zeta -= g / d;
        if !(zeta.norm() < 1.0) {
            return Err(MetricsError::NewtonFailure(format!("iterate {zeta} left the disc")));
        }
    }
    let g = g_eval(disc, z, zeta);
    if !(g.norm() < 1e-12) {
        return Err(MetricsError::NewtonFailure(format!("|G| = {:e}", g.norm())));
    }
    Ok(zeta)
}

/// Poincaré distance on the unit disc.
pub fn poincare(a: C64, b: C64) -> f64 {
    let t = ((a - b) / (1.0 - a.conj() * b)).norm();
    t.min(1.0).atanh()
}

fn windings(rep: &EReport) -> Windings {
    Windings { wind_phi: rep.wind_phi, wind_g: rep.wind_g }
}

/// `max |p(F(f(zeta)), F(f(xi))) - p(zeta, xi)|` over the pairs.
pub fn geodesic_consistency(disc: &StationaryDisc, pairs: &[(C64, C64)]) -> Result<f64, MetricsError> {
    let mut gap: f64 = 0.0;
    for &(a, b) in pairs {
        let fa = left_inverse(disc, &disc.f.eval_unchecked(a))?;
        let fb = left_inverse(disc, &disc.f.eval_unchecked(b))?;
        gap = gap.max((poincare(fa, fb) - poincare(a, b)).abs());
    }
    Ok(gap)
}

/// Certificates of a two-point disc for the pair `(z, w)` in internal coordinates.
pub fn two_point_result(domain: &DomainSpec, disc: &StationaryDisc, z: &[C64], w: &[C64]) -> MetricsResult {
    let xi = disc.multiplier;
    let value = poincare(C64::new(0.0, 0.0), C64::new(xi, 0.0));
    let rep = verify_e(domain, disc, z);
    let gap = match (left_inverse(disc, z), left_inverse(disc, w)) {
        (Ok(a), Ok(b)) => (poincare(a, b) - value).abs(),
        _ => f64::INFINITY,
    };
    MetricsResult {
        kind: MetricKind::TwoPoint,
        value,
        xi_or_lambda: xi,
        certificate_gap: gap,
        windings: windings(&rep),
        certified: rep.passed && gap < GAP_TOL,
        residuals: rep,
    }
}

/// Certificates of a direction disc at `z` along `v` (internal coordinates).
///
/// The gap compares a central difference of `F` along `v` with `1/lambda`.
pub fn infinitesimal_result(domain: &DomainSpec, disc: &StationaryDisc, z: &[C64], v: &[C64]) -> MetricsResult {
    let lambda = disc.multiplier;
    let value = 1.0 / lambda;
    let rep = verify_e(domain, disc, z);
    let vn = crate::domain::cnorm(v);
    let h = 1e-5 / vn;
    let shift = |s: f64| -> Vec<C64> { z.iter().zip(v).map(|(a, b)| a + b * s).collect() };
    let gap = match (left_inverse(disc, &shift(h)), left_inverse(disc, &shift(-h))) {
        (Ok(a), Ok(b)) => ((a - b) / (2.0 * h) - value).norm(),
        _ => f64::INFINITY,
    };
    MetricsResult {
        kind: MetricKind::Infinitesimal,
        value,
        xi_or_lambda: lambda,
        certificate_gap: gap,
        windings: windings(&rep),
        certified: rep.passed && gap < GAP_TOL.max(1e-6 * value),
        residuals: rep,
    }
}

/// `k̃_D(z, w)` for user-coordinate points.
pub fn lempert_distance(
    domain: &DomainSpec,
    z: &[C64],
    w: &[C64],
    cfg: &SolveConfig,
) -> Result<Solved, MetricsError> {
    let zi = domain.to_internal(z);
    let wi = domain.to_internal(w);
    let sol = solve_extremal(domain, &Constraint::two_point(zi.clone(), wi.clone()), cfg)?;
    let result = two_point_result(domain, &sol.disc, &zi, &wi);
    Ok(Solved { result, disc: sol.disc, trace: sol.trace })
}

/// `kappa_D(z; v)` for a user-coordinate point and direction.
pub fn kobayashi_royden(
    domain: &DomainSpec,
    z: &[C64],
    v: &[C64],
    cfg: &SolveConfig,
) -> Result<Solved, MetricsError> {
    let zi = domain.to_internal(z);
    let vi = domain.to_internal(v);
    let sol = solve_extremal(domain, &Constraint::direction(zi.clone(), vi.clone()), cfg)?;
    let result = infinitesimal_result(domain, &sol.disc, &zi, &vi);
    Ok(Solved { result, disc: sol.disc, trace: sol.trace })
}

/// `tanh^{-1} sqrt(1 - (1 - |z|^2)(1 - |w|^2)/|1 - <z, w>|^2)` for the unit ball.
pub fn ball_lempert(z: &[C64], w: &[C64]) -> f64 {
    let z2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let w2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    let zw: C64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    let t = 1.0 - (1.0 - z2) * (1.0 - w2) / (1.0 - zw).norm_sqr();
    t.max(0.0).sqrt().atanh()
}

/// `kappa` of the unit ball: `sqrt(|v|^2/(1 - |z|^2) + |<z, v>|^2/(1 - |z|^2)^2)`.
pub fn ball_kobayashi(z: &[C64], v: &[C64]) -> f64 {
    let z2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let v2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let zv: C64 = v.iter().zip(z).map(|(a, b)| a * b.conj()).sum();
    (v2 / (1.0 - z2) + zv.norm_sqr() / (1.0 - z2).powi(2)).sqrt()
}
