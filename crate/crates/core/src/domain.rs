//! Bounded strongly convex domains given by real polynomial defining functions.
//!
//! Points of `C^n` are stored either as complex vectors or as real vectors of
//! length `2n` in interleaved order `(Re z_1, Im z_1, Re z_2, Im z_2, ...)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("gradient of the defining function vanishes (|grad r| = {0:e})")]
    DegenerateGradient(f64),
    #[error("root finder did not converge: {0}")]
    NoConvergence(String),
    #[error("point is not on the boundary (r = {0:e})")]
    NotOnBoundary(f64),
    #[error("defining function is not smooth at the origin")]
    Singular,
    #[error("invalid domain: {0}")]
    Invalid(String),
}

/// Boundary tolerance: `|r(a)| <= BOUNDARY_TOL * (1 + |grad r(a)|)`.
pub const BOUNDARY_TOL: f64 = 1e-9;

const MINKOWSKI_TOL: f64 = 1e-13;
const MINKOWSKI_MAX_ITER: usize = 80;

pub fn to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

pub fn cnorm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Value, real gradient and real Hessian at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub hessian: DMatrix<f64>,
}

/// Wirtinger derivatives `r_z`, `r_zz`, `r_{z zbar}`.
#[derive(Debug, Clone)]
pub struct ComplexJet {
    pub value: f64,
    pub r_z: Vec<C64>,
    pub r_zz: DMatrix<C64>,
    pub r_zzbar: DMatrix<C64>,
}

impl Jet {
    /// Converts real derivatives into complex ones (`d/dz = (d/dx - i d/dy)/2`).
    pub fn complex(&self) -> ComplexJet {
        let n = self.gradient.len() / 2;
        let g = &self.gradient;
        let h = &self.hessian;
        let r_z = (0..n)
            .map(|j| C64::new(0.5 * g[2 * j], -0.5 * g[2 * j + 1]))
            .collect();
        let mut r_zz = DMatrix::zeros(n, n);
        let mut r_zzbar = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let xx = h[(2 * j, 2 * k)];
                let xy = h[(2 * j, 2 * k + 1)];
                let yx = h[(2 * j + 1, 2 * k)];
                let yy = h[(2 * j + 1, 2 * k + 1)];
                r_zz[(j, k)] = C64::new(0.25 * (xx - yy), -0.25 * (xy + yx));
                r_zzbar[(j, k)] = C64::new(0.25 * (xx + yy), 0.25 * (xy - yx));
            }
        }
        ComplexJet {
            value: self.value,
            r_z,
            r_zz,
            r_zzbar,
        }
    }
}

/// A real-valued function on `C^n` with first and second derivatives.
pub trait Defining: Send + Sync {
    fn n(&self) -> usize;
    fn jet(&self, x: &[f64]) -> Result<Jet, DomainError>;
    fn value(&self, x: &[f64]) -> Result<f64, DomainError> {
        Ok(self.jet(x)?.value)
    }
    fn complex_jet(&self, z: &[C64]) -> Result<ComplexJet, DomainError> {
        Ok(self.jet(&to_real(z))?.complex())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub c: f64,
    pub p: Vec<u32>,
}

/// Real polynomial in the `2n` real coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningFunction {
    pub n: usize,
    pub monomials: Vec<Monomial>,
}

impl DefiningFunction {
    pub fn new(n: usize, monomials: Vec<Monomial>) -> Result<Self, DomainError> {
        for (i, m) in monomials.iter().enumerate() {
            if m.p.len() != 2 * n {
                return Err(DomainError::Invalid(format!(
                    "monomial {i}: exponent vector has length {}, expected {}",
                    m.p.len(),
                    2 * n
                )));
            }
            if !m.c.is_finite() {
                return Err(DomainError::Invalid(format!(
                    "monomial {i}: coefficient is not finite"
                )));
            }
        }
        Ok(Self { n, monomials })
    }

    /// `sum_j |z_j|^2 / a_j^2 - 1`.
    pub fn ellipsoid(semiaxes: &[f64]) -> Self {
        let n = semiaxes.len();
        let mut monomials = Vec::with_capacity(2 * n + 1);
        for (j, a) in semiaxes.iter().enumerate() {
            for part in 0..2 {
                let mut p = vec![0; 2 * n];
                p[2 * j + part] = 2;
                monomials.push(Monomial { c: 1.0 / (a * a), p });
            }
        }
        monomials.push(Monomial {
            c: -1.0,
            p: vec![0; 2 * n],
        });
        Self { n, monomials }
    }

    /// `|z|^2 - 1`.
    pub fn ball(n: usize) -> Self {
        Self::ellipsoid(&vec![1.0; n])
    }

    /// Multiplies the function by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let monomials = self
            .monomials
            .iter()
            .map(|m| Monomial { c: m.c * c, p: m.p.clone() })
            .collect();
        Self { n: self.n, monomials }
    }

    /// Returns `x -> r(x / s)`, a defining function of `s D`.
    pub fn dilated(&self, s: f64) -> Self {
        let monomials = self
            .monomials
            .iter()
            .map(|m| {
                let deg: u32 = m.p.iter().sum();
                Monomial { c: m.c * s.powi(-(deg as i32)), p: m.p.clone() }
            })
            .collect();
        Self { n: self.n, monomials }
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(|m| m.p.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.monomials
            .iter()
            .map(|m| {
                m.c * m
                    .p
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Exact value, gradient and Hessian.
    pub fn eval_with_derivatives(&self, x: &[f64]) -> Jet {
        let d = 2 * self.n;
        assert_eq!(x.len(), d, "point has wrong dimension");
        let mut value = 0.0;
        let mut gradient = DVector::zeros(d);
        let mut hessian = DMatrix::zeros(d, d);
        for m in &self.monomials {
            let pw = |i: usize, e: i64| -> f64 {
                if e < 0 {
                    0.0
                } else {
                    x[i].powi(e as i32)
                }
            };
            let active: Vec<usize> = (0..d).filter(|&i| m.p[i] > 0).collect();
            let full: f64 = active.iter().map(|&i| pw(i, m.p[i] as i64)).product();
            value += m.c * full;
            for (ai, &i) in active.iter().enumerate() {
                let pi = m.p[i] as i64;
                let rest_i: f64 = active
                    .iter()
                    .enumerate()
                    .filter(|&(aj, _)| aj != ai)
                    .map(|(_, &j)| pw(j, m.p[j] as i64))
                    .product();
                gradient[i] += m.c * pi as f64 * pw(i, pi - 1) * rest_i;
                hessian[(i, i)] += m.c * (pi * (pi - 1)) as f64 * pw(i, pi - 2) * rest_i;
                for (aj, &j) in active.iter().enumerate().skip(ai + 1) {
                    let pj = m.p[j] as i64;
                    let rest: f64 = active
                        .iter()
                        .enumerate()
                        .filter(|&(ak, _)| ak != ai && ak != aj)
                        .map(|(_, &k)| pw(k, m.p[k] as i64))
                        .product();
                    let v = m.c * (pi * pj) as f64 * pw(i, pi - 1) * pw(j, pj - 1) * rest;
                    hessian[(i, j)] += v;
                    hessian[(j, i)] += v;
                }
            }
        }
        Jet { value, gradient, hessian }
    }

    pub fn complex_derivatives(&self, z: &[C64]) -> ComplexJet {
        self.eval_with_derivatives(&to_real(z)).complex()
    }
}

impl Defining for DefiningFunction {
    fn n(&self) -> usize {
        self.n
    }
    fn jet(&self, x: &[f64]) -> Result<Jet, DomainError> {
        Ok(self.eval_with_derivatives(x))
    }
    fn value(&self, x: &[f64]) -> Result<f64, DomainError> {
        Ok(self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    General,
    Ellipsoid,
    Ball,
}

/// A domain normalized so that `delta * B_n ⊆ D ⊆ B_n`.
///
/// All stored data are in internal coordinates; `scale` maps user
/// coordinates to internal ones (`internal = scale * user`).
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub r: DefiningFunction,
    pub z0: Vec<C64>,
    pub kind: DomainKind,
    pub semiaxes: Option<Vec<f64>>,
    pub scale: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DomainFile {
    n: usize,
    kind: String,
    #[serde(default)]
    monomials: Option<Vec<Monomial>>,
    #[serde(default)]
    semiaxes: Option<Vec<f64>>,
    #[serde(default)]
    z0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityMargins {
    pub strong_convexity: f64,
    pub linear_convexity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub strongly_convex: bool,
    pub strongly_linearly_convex: bool,
    pub min_margins: ConvexityMargins,
    pub boundary_points: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BallRadii {
    #[serde(rename = "M")]
    pub big_m: f64,
    pub m: f64,
    pub r_int: f64,
    #[serde(rename = "R_ext")]
    pub r_ext: f64,
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| gaussian(rng)).collect();
        let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            return v.into_iter().map(|a| a / nrm).collect();
        }
    }
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Root of `tau -> r(origin + tau * dir)` where the ray first leaves `{r < 0}`.
pub fn ray_exit(
    r: &DefiningFunction,
    origin: &[f64],
    dir: &[f64],
) -> Result<f64, DomainError> {
    let point = |tau: f64| -> Vec<f64> {
        origin.iter().zip(dir).map(|(o, d)| o + tau * d).collect()
    };
    if r.eval(origin) >= 0.0 {
        return Err(DomainError::Invalid("ray origin is not interior".into()));
    }
    let mut lo = 0.0;
    let mut h = 1.0 / 32.0;
    let mut hi = h;
    let mut steps = 0;
    while r.eval(&point(hi)) <= 0.0 {
        lo = hi;
        h *= 1.25;
        hi += h;
        steps += 1;
        if steps > 200 {
            return Err(DomainError::NoConvergence("ray does not leave the domain".into()));
        }
    }
    refine_root(r, &point, lo, hi, dir)
}

fn refine_root(
    r: &DefiningFunction,
    point: &dyn Fn(f64) -> Vec<f64>,
    mut lo: f64,
    mut hi: f64,
    dir: &[f64],
) -> Result<f64, DomainError> {
    let mut tau = 0.5 * (lo + hi);
    for it in 0..MINKOWSKI_MAX_ITER {
        let x = point(tau);
        let jet = r.eval_with_derivatives(&x);
        let g = jet.value;
        if g > 0.0 {
            hi = tau;
        } else {
            lo = tau;
        }
        let slope: f64 = jet.gradient.iter().zip(dir).map(|(a, b)| a * b).sum();
        let wide = hi - lo > 1e-3 * hi.max(1e-300);
        let mut next = if !wide && slope > 0.0 { tau - g / slope } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - tau).abs();
        tau = next;
        if (!wide && step <= MINKOWSKI_TOL * tau.max(1.0)) || hi - lo <= MINKOWSKI_TOL * 1e-3 {
            return Ok(tau);
        }
        if it + 1 == MINKOWSKI_MAX_ITER {
            break;
        }
    }
    Err(DomainError::NoConvergence(format!(
        "ray root bracket [{lo}, {hi}] after {MINKOWSKI_MAX_ITER} iterations"
    )))
}

impl DomainSpec {
    /// The unit ball of `C^n`.
    pub fn ball(n: usize) -> Self {
        DomainSpec {
            r: DefiningFunction::ball(n),
            z0: vec![C64::new(0.0, 0.0); n],
            kind: DomainKind::Ball,
            semiaxes: Some(vec![1.0; n]),
            scale: 1.0,
            delta: 1.0,
        }
    }

    /// The ellipsoid `sum |z_j|^2/a_j^2 < 1`, rescaled into the unit ball.
    pub fn ellipsoid(semiaxes: &[f64]) -> Result<Self, DomainError> {
        if semiaxes.len() < 2 {
            return Err(DomainError::Invalid("dimension must be at least 2".into()));
        }
        if semiaxes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(DomainError::Invalid("semiaxes must be positive".into()));
        }
        let big = semiaxes.iter().cloned().fold(0.0, f64::max);
        let small = semiaxes.iter().cloned().fold(f64::INFINITY, f64::min);
        let scaled: Vec<f64> = semiaxes.iter().map(|a| a / big).collect();
        Ok(DomainSpec {
            r: DefiningFunction::ellipsoid(&scaled),
            z0: vec![C64::new(0.0, 0.0); semiaxes.len()],
            kind: DomainKind::Ellipsoid,
            semiaxes: Some(scaled),
            scale: 1.0 / big,
            delta: small / big,
        })
    }

    /// A general polynomial domain, star-shaped about `0`, rescaled into the unit ball.
    pub fn polynomial(r: DefiningFunction, z0: Vec<C64>) -> Result<Self, DomainError> {
        let n = r.n;
        if n < 2 {
            return Err(DomainError::Invalid("dimension must be at least 2".into()));
        }
        if z0.len() != n {
            return Err(DomainError::Invalid("z0 has wrong dimension".into()));
        }
        if r.eval(&to_real(&z0)) >= 0.0 {
            return Err(DomainError::Invalid("r(z0) must be negative".into()));
        }
        let origin = vec![0.0; 2 * n];
        if r.eval(&origin) >= 0.0 {
            return Err(DomainError::Invalid(
                "the origin must be interior (star-shaped representation)".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d696e6b);
        let mut outer: f64 = 0.0;
        let mut inner = f64::INFINITY;
        let mut best_dir = vec![0.0; 2 * n];
        for _ in 0..4096 {
            let d = unit_direction(&mut rng, 2 * n);
            let tau = ray_exit(&r, &origin, &d)?;
            if tau > outer {
                outer = tau;
                best_dir = d.clone();
            }
            inner = inner.min(tau);
        }
        // local hill climb on the farthest direction
        let mut step = 0.05;
        while step > 1e-7 {
            let mut improved = false;
            for i in 0..2 * n {
                for s in [-1.0, 1.0] {
                    let mut d = best_dir.clone();
                    d[i] += s * step;
                    let nrm = d.iter().map(|a| a * a).sum::<f64>().sqrt();
                    d.iter_mut().for_each(|a| *a /= nrm);
                    let tau = ray_exit(&r, &origin, &d)?;
                    if tau > outer {
                        outer = tau;
                        best_dir = d;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        let scale = 1.0 / outer;
        Ok(DomainSpec {
            r: r.dilated(scale),
            z0: z0.iter().map(|c| c * scale).collect(),
            kind: DomainKind::General,
            semiaxes: None,
            scale,
            delta: 0.999 * inner * scale,
        })
    }

    /// Parses the JSON domain file format.
    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        let file: DomainFile = serde_json::from_str(text)
            .map_err(|e| DomainError::Invalid(format!("malformed domain file: {e}")))?;
        let n = file.n;
        if n < 2 {
            return Err(DomainError::Invalid("n must be at least 2".into()));
        }
        match file.kind.as_str() {
            "ball" => {
                if file.monomials.is_some() {
                    return Err(DomainError::Invalid("kind ball takes no monomials".into()));
                }
                Ok(Self::ball(n))
            }
            "ellipsoid" => {
                if file.monomials.is_some() {
                    return Err(DomainError::Invalid(
                        "kind ellipsoid takes semiaxes, not monomials".into(),
                    ));
                }
                let axes = file
                    .semiaxes
                    .ok_or_else(|| DomainError::Invalid("ellipsoid needs semiaxes".into()))?;
                if axes.len() != n {
                    return Err(DomainError::Invalid(format!(
                        "semiaxes has length {}, expected {n}",
                        axes.len()
                    )));
                }
                Self::ellipsoid(&axes)
            }
            "polynomial" | "general" => {
                if file.semiaxes.is_some() {
                    return Err(DomainError::Invalid(
                        "kind polynomial takes monomials, not semiaxes".into(),
                    ));
                }
                let monomials = file
                    .monomials
                    .ok_or_else(|| DomainError::Invalid("polynomial needs monomials".into()))?;
                let r = DefiningFunction::new(n, monomials)?;
                let z0 = match file.z0 {
                    Some(v) if v.len() == 2 * n => to_complex(&v),
                    Some(v) => {
                        return Err(DomainError::Invalid(format!(
                            "z0 has length {}, expected {}",
                            v.len(),
                            2 * n
                        )))
                    }
                    None => vec![C64::new(0.0, 0.0); n],
                };
                Self::polynomial(r, z0)
            }
            other => Err(DomainError::Invalid(format!("unknown kind '{other}'"))),
        }
    }

    pub fn n(&self) -> usize {
        self.r.n
    }

    /// Outward unit normal `grad r / |grad r|` at a boundary point, as a complex vector.
    pub fn unit_normal(&self, a: &[C64]) -> Result<Vec<C64>, DomainError> {
        let jet = self.r.eval_with_derivatives(&to_real(a));
        normal_from_jet(&jet)
    }

    pub fn minkowski(&self, x: &[C64]) -> Result<f64, DomainError> {
        minkowski(&self.r, &to_real(x))
    }

    pub fn is_interior(&self, x: &[C64]) -> bool {
        self.minkowski(x).map(|m| m < 1.0).unwrap_or(false)
    }

    /// Defining function of the interpolating domain `D_t`.
    pub fn homotopy_domain(&self, t: f64) -> HomotopyFunction<'_> {
        HomotopyFunction { domain: self, t }
    }

    /// Samples both convexity conditions on boundary points reached by rays from `z0`.
    pub fn verify_convexity(&self, n_samples: usize, n_tangents: usize) -> ConvexityReport {
        let n = self.n();
        let d = 2 * n;
        let origin = to_real(&self.z0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x636f6e76);
        let mut sc = f64::INFINITY;
        let mut lc = f64::INFINITY;
        let mut count = 0;
        for _ in 0..n_samples {
            let dir = unit_direction(&mut rng, d);
            let Ok(tau) = ray_exit(&self.r, &origin, &dir) else { continue };
            let a: Vec<f64> = origin.iter().zip(&dir).map(|(o, u)| o + tau * u).collect();
            let jet = self.r.eval_with_derivatives(&a);
            let gn = jet.gradient.norm();
            if gn < 1e-12 {
                continue;
            }
            count += 1;
            let cj = jet.complex();
            for _ in 0..n_tangents {
                // real tangent direction
                let mut x = DVector::from_vec(unit_direction(&mut rng, d));
                let proj = x.dot(&jet.gradient) / (gn * gn);
                x -= &jet.gradient * proj;
                let xn = x.norm();
                if xn > 1e-10 {
                    x /= xn;
                    sc = sc.min((x.transpose() * &jet.hessian * &x)[(0, 0)]);
                }
                // complex tangent direction: r_z X = 0
                let raw = to_complex(&unit_direction(&mut rng, d));
                let rz2: f64 = cj.r_z.iter().map(|c| c.norm_sqr()).sum();
                let pair: C64 = cj.r_z.iter().zip(&raw).map(|(a, b)| a * b).sum();
                let mut xc: Vec<C64> = raw
                    .iter()
                    .zip(&cj.r_z)
                    .map(|(x, rz)| x - rz.conj() * pair / rz2)
                    .collect();
                let xcn = cnorm(&xc);
                if xcn > 1e-10 {
                    xc.iter_mut().for_each(|c| *c /= xcn);
                    let herm: C64 = quad(&cj.r_zzbar, &xc, true);
                    let sym: C64 = quad(&cj.r_zz, &xc, false);
                    lc = lc.min(herm.re - sym.norm());
                }
            }
        }
        ConvexityReport {
            strongly_convex: sc > 0.0,
            strongly_linearly_convex: lc > 0.0,
            min_margins: ConvexityMargins {
                strong_convexity: sc,
                linear_convexity: lc,
            },
            boundary_points: count,
        }
    }

    /// Interior and exterior ball radii from sampled Hessian/gradient ratios of `mu^2`.
    pub fn ball_radii(&self, delta: f64, n_samples: usize) -> Result<BallRadii, DomainError> {
        let d = 2 * self.n();
        let mut rng = ChaCha8Rng::seed_from_u64(0x72616469);
        let mut lam_max: f64 = 0.0;
        let mut lam_min = f64::INFINITY;
        let mut grad_min = f64::INFINITY;
        let mut grad_max: f64 = 0.0;
        let mut inner = f64::INFINITY;
        for _ in 0..n_samples {
            let x = unit_direction(&mut rng, d);
            let jet = minkowski_sq_jet(&self.r, &x)?;
            let eig = nalgebra::SymmetricEigen::new(jet.hessian.clone());
            for &l in eig.eigenvalues.iter() {
                lam_max = lam_max.max(l);
                lam_min = lam_min.min(l);
            }
            let g = jet.gradient.norm();
            grad_min = grad_min.min(g);
            grad_max = grad_max.max(g);
            inner = inner.min(1.0 / jet.value.sqrt());
        }
        let big_m = lam_max / (delta * grad_min);
        let m = lam_min / grad_max;
        let r_int = (0.5 / big_m).min(0.5 * (inner - delta));
        Ok(BallRadii { big_m, m, r_int, r_ext: 2.0 / m })
    }

    pub fn to_internal(&self, z: &[C64]) -> Vec<C64> {
        z.iter().map(|c| c * self.scale).collect()
    }

    pub fn to_user(&self, z: &[C64]) -> Vec<C64> {
        z.iter().map(|c| c / self.scale).collect()
    }
}

fn quad(a: &DMatrix<C64>, x: &[C64], conj_right: bool) -> C64 {
    let n = x.len();
    let mut s = C64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            let right = if conj_right { x[k].conj() } else { x[k] };
            s += x[j] * a[(j, k)] * right;
        }
    }
    s
}

pub(crate) fn normal_from_jet(jet: &Jet) -> Result<Vec<C64>, DomainError> {
    let gn = jet.gradient.norm();
    if gn < 1e-12 {
        return Err(DomainError::DegenerateGradient(gn));
    }
    if jet.value.abs() > BOUNDARY_TOL * (1.0 + gn) {
        return Err(DomainError::NotOnBoundary(jet.value));
    }
    Ok(to_complex(jet.gradient.as_slice())
        .into_iter()
        .map(|c| c / gn)
        .collect())
}

/// Minkowski functional `mu(x) = inf{s > 0 : x/s ∈ D}` of `{r < 0}` (0 interior).
pub fn minkowski(r: &DefiningFunction, x: &[f64]) -> Result<f64, DomainError> {
    let nrm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return Ok(0.0);
    }
    let dir: Vec<f64> = x.iter().map(|a| a / nrm).collect();
    let tau = ray_exit_star(r, &dir)?;
    Ok(nrm / tau)
}

// star-shaped exit: bracket by doubling from the unit sphere
fn ray_exit_star(r: &DefiningFunction, dir: &[f64]) -> Result<f64, DomainError> {
    if r.eval(&vec![0.0; dir.len()]) >= 0.0 {
        return Err(DomainError::Invalid("the origin is not interior".into()));
    }
    let point = |tau: f64| -> Vec<f64> { dir.iter().map(|d| tau * d).collect() };
    let mut lo;
    let mut hi = 1.0;
    let mut k = 0;
    if r.eval(&point(hi)) > 0.0 {
        // shrink towards the boundary for a tight bracket
        let mut probe = 0.5;
        while r.eval(&point(probe)) > 0.0 && k < 60 {
            hi = probe;
            probe *= 0.5;
            k += 1;
        }
        lo = probe;
    } else {
        lo = hi;
        while r.eval(&point(hi)) <= 0.0 {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k > 60 {
                return Err(DomainError::NoConvergence("unbounded ray".into()));
            }
        }
    }
    refine_root(r, &point, lo, hi, dir)
}

/// `mu^2` with gradient and Hessian from the implicit function theorem.
pub fn minkowski_sq_jet(r: &DefiningFunction, x: &[f64]) -> Result<Jet, DomainError> {
    let mu = minkowski(r, x)?;
    if mu == 0.0 {
        return Err(DomainError::Singular);
    }
    let d = x.len();
    let y: DVector<f64> = DVector::from_iterator(d, x.iter().map(|a| a / mu));
    let jet = r.eval_with_derivatives(y.as_slice());
    let g = &jet.gradient;
    let h = &jet.hessian;
    let gy = g.dot(&y);
    if gy <= 0.0 {
        return Err(DomainError::DegenerateGradient(gy));
    }
    let grad_mu = g / gy;
    let hy_g = h * &y + g;
    let dg = (h * gy - g * hy_g.transpose()) / (gy * gy);
    let proj = DMatrix::identity(d, d) - &y * grad_mu.transpose();
    let mut hess_mu = dg * proj / mu;
    hess_mu = (&hess_mu + hess_mu.transpose()) * 0.5;
    let gradient = &grad_mu * (2.0 * mu);
    let hessian = &grad_mu * grad_mu.transpose() * 2.0 + hess_mu * (2.0 * mu);
    Ok(Jet { value: mu * mu, gradient, hessian })
}

/// `r_t = t mu_D^2 + (1 - t)|x|^2 - 1`.
#[derive(Debug, Clone, Copy)]
pub struct HomotopyFunction<'a> {
    pub domain: &'a DomainSpec,
    pub t: f64,
}

impl Defining for HomotopyFunction<'_> {
    fn n(&self) -> usize {
        self.domain.n()
    }

    fn jet(&self, x: &[f64]) -> Result<Jet, DomainError> {
        let d = x.len();
        let sq: f64 = x.iter().map(|a| a * a).sum();
        let mut jet = Jet {
            value: (1.0 - self.t) * sq - 1.0,
            gradient: DVector::from_iterator(d, x.iter().map(|a| 2.0 * (1.0 - self.t) * a)),
            hessian: DMatrix::identity(d, d) * (2.0 * (1.0 - self.t)),
        };
        if self.t != 0.0 {
            let m = minkowski_sq_jet(&self.domain.r, x)?;
            jet.value += self.t * m.value;
            jet.gradient += m.gradient * self.t;
            jet.hessian += m.hessian * self.t;
        }
        Ok(jet)
    }

    fn value(&self, x: &[f64]) -> Result<f64, DomainError> {
        let sq: f64 = x.iter().map(|a| a * a).sum();
        let mut v = (1.0 - self.t) * sq - 1.0;
        if self.t != 0.0 {
            let mu = minkowski(&self.domain.r, x)?;
            v += self.t * mu * mu;
        }
        Ok(v)
    }
}
