//! Path following from closed-form ball geodesics to the target domain.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disc::{grid, FourierDisc};
use crate::domain::{cnorm, Defining, DefiningFunction, DomainKind, DomainSpec};
use crate::stationary::{
    holder_constant, newton_solve, residual, Constraint, NewtonConfig, StationaryDisc,
    StationaryError, Target,
};

#[derive(Debug, Error, Clone)]
pub enum ContinuationError {
    #[error("continuation step fell below the minimum at t = {last_t} ({cause})")]
    StepUnderflow {
        last_t: f64,
        cause: String,
        trace: Vec<TracePoint>,
        disc: Box<StationaryDisc>,
    },
    #[error("continuation exceeded {0} steps")]
    TooManySteps(usize),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
}

impl ContinuationError {
    /// Accepted path points recorded before the failure.
    pub fn trace(&self) -> &[TracePoint] {
        match self {
            ContinuationError::StepUnderflow { trace, .. } => trace,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub tol_res: f64,
    pub max_steps: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig {
            initial_step: 0.1,
            min_step: 1e-6,
            max_step: 0.2,
            tol_res: 1e-10,
            max_steps: 10_000,
        }
    }
}

impl ContinuationConfig {
    pub fn newton(&self) -> NewtonConfig {
        NewtonConfig { tol_res: self.tol_res, ..NewtonConfig::default() }
    }
}

/// One accepted point of a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// `"domain"` leg or point legs
    pub stage: Stage,
    pub t: f64,
    pub step: f64,
    pub newton_iters: usize,
    pub residual: f64,
    pub xi_or_lambda: f64,
    pub holder_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Domain,
    MoveZ,
    MoveTarget,
    Final,
}

pub const TRACE_HEADER: [&str; 6] = ["t", "step", "newton_iters", "residual", "xi_or_lambda", "holder_C"];

/// A one-parameter family of problems on `[0, 1]`.
pub trait Family: Sync {
    fn defining(&self, t: f64) -> Box<dyn Defining + '_>;
    fn constraint(&self, t: f64) -> Constraint;
    fn stage(&self) -> Stage;
    fn is_constant(&self) -> bool {
        false
    }
}

/// `D_t = {t mu_D^2 + (1 - t)|x|^2 < 1}` with fixed constraint.
pub struct DomainHomotopy<'a> {
    pub domain: &'a DomainSpec,
    pub constraint: Constraint,
}

impl Family for DomainHomotopy<'_> {
    fn defining(&self, t: f64) -> Box<dyn Defining + '_> {
        Box::new(self.domain.homotopy_domain(t))
    }
    fn constraint(&self, _t: f64) -> Constraint {
        self.constraint.clone()
    }
    fn stage(&self) -> Stage {
        Stage::Domain
    }
}

/// Fixed domain, constraint moving linearly between two endpoints.
pub struct PointPath<'a> {
    pub r: &'a dyn Defining,
    pub from: Constraint,
    pub to: Constraint,
    pub stage: Stage,
}

impl Family for PointPath<'_> {
    fn defining(&self, _t: f64) -> Box<dyn Defining + '_> {
        Box::new(Borrowed(self.r))
    }
    fn constraint(&self, t: f64) -> Constraint {
        let lerp = |a: &[C64], b: &[C64]| -> Vec<C64> {
            a.iter().zip(b).map(|(x, y)| x * (1.0 - t) + y * t).collect()
        };
        let z = lerp(&self.from.z, &self.to.z);
        let tv = lerp(self.from.target_vec(), self.to.target_vec());
        match self.to.target {
            Target::Point(_) => Constraint::two_point(z, tv),
            Target::Direction(_) => Constraint::direction(z, tv),
        }
    }
    fn stage(&self) -> Stage {
        self.stage
    }
}

/// The same problem at every `t`.
pub struct ConstantFamily<'a> {
    pub r: &'a dyn Defining,
    pub constraint: Constraint,
}

impl Family for ConstantFamily<'_> {
    fn defining(&self, _t: f64) -> Box<dyn Defining + '_> {
        Box::new(Borrowed(self.r))
    }
    fn constraint(&self, _t: f64) -> Constraint {
        self.constraint.clone()
    }
    fn stage(&self) -> Stage {
        Stage::Final
    }
    fn is_constant(&self) -> bool {
        true
    }
}

struct Borrowed<'a>(&'a dyn Defining);

impl Defining for Borrowed<'_> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn jet(&self, x: &[f64]) -> Result<crate::domain::Jet, crate::domain::DomainError> {
        self.0.jet(x)
    }
    fn value(&self, x: &[f64]) -> Result<f64, crate::domain::DomainError> {
        self.0.value(x)
    }
}

pub struct HomotopyProblem<'a> {
    pub family: &'a dyn Family,
    /// valid at `t_current`
    pub seed: StationaryDisc,
    pub t_current: f64,
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub disc: StationaryDisc,
    pub trace: Vec<TracePoint>,
}

fn holder_of(disc: &StationaryDisc) -> f64 {
    holder_constant(&disc.f, (4 * disc.order()).clamp(64, 256))
}

fn point(stage: Stage, t: f64, step: f64, iters: usize, d: &StationaryDisc) -> TracePoint {
    TracePoint {
        stage,
        t,
        step,
        newton_iters: iters,
        residual: d.residual_norm,
        xi_or_lambda: d.multiplier,
        holder_c: holder_of(d),
    }
}

/// Order-0 predictor, Newton corrector, step halving on failure.
pub fn continue_path(
    problem: HomotopyProblem<'_>,
    config: &ContinuationConfig,
) -> Result<PathResult, ContinuationError> {
    let fam = problem.family;
    let stage = fam.stage();
    let ncfg = config.newton();
    let mut t = problem.t_current;
    let mut disc = problem.seed;
    let mut trace = vec![point(stage, t, 0.0, 0, &disc)];
    let mut step = config.initial_step;
    if fam.is_constant() {
        step = 1.0 - t;
    }
    let mut count = 0;
    while t < 1.0 {
        count += 1;
        if count > config.max_steps {
            return Err(ContinuationError::TooManySteps(config.max_steps));
        }
        let t_new = (t + step).min(1.0);
        let r = fam.defining(t_new);
        let cons = fam.constraint(t_new);
        match newton_solve(r.as_ref(), &cons, &disc, &ncfg) {
            Ok((d, iters)) => {
                let taken = t_new - t;
                t = t_new;
                disc = d;
                trace.push(point(stage, t, taken, iters, &disc));
                if iters <= 3 {
                    step = (step * 1.5).min(config.max_step.max(step));
                }
            }
            Err(e) => {
                step *= 0.5;
                if step < config.min_step {
                    return Err(ContinuationError::StepUnderflow {
                        last_t: t,
                        cause: e.to_string(),
                        trace,
                        disc: Box::new(disc),
                    });
                }
            }
        }
    }
    Ok(PathResult { disc, trace })
}

/// Involutive ball automorphism exchanging `a` and `0`.
pub fn ball_automorphism(a: &[C64], x: &[C64]) -> Vec<C64> {
    let a2: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    if a2 == 0.0 {
        return x.iter().map(|c| -c).collect();
    }
    let s = (1.0 - a2).sqrt();
    let xa: C64 = x.iter().zip(a).map(|(u, v)| u * v.conj()).sum();
    let denom = 1.0 - xa;
    x.iter()
        .zip(a)
        .map(|(xj, aj)| {
            let p = aj * (xa / a2);
            (aj - p - (xj - p) * s) / denom
        })
        .collect()
}

/// `D phi_a(0)^{-1} v` for the automorphism above.
fn inverse_differential(a: &[C64], v: &[C64]) -> Vec<C64> {
    let a2: f64 = a.iter().map(|c| c.norm_sqr()).sum();
    if a2 == 0.0 {
        return v.iter().map(|c| -c).collect();
    }
    let s = (1.0 - a2).sqrt();
    let va: C64 = v.iter().zip(a).map(|(u, w)| u * w.conj()).sum();
    v.iter()
        .zip(a)
        .map(|(vj, aj)| {
            let p = aj * (va / a2);
            -p / (1.0 - a2) - (vj - p) / s
        })
        .collect()
}

/// The exact extremal disc of the unit ball for the given constraint.
pub fn ball_seed(cons: &Constraint, order: usize) -> Result<StationaryDisc, StationaryError> {
    let n = cons.z.len();
    cons.validate(n)?;
    let z = &cons.z;
    if !(cnorm(z) < 1.0) {
        return Err(StationaryError::InvalidConstraint("z is not in the ball".into()));
    }
    let (u, mult) = match &cons.target {
        Target::Point(w) => {
            if !(cnorm(w) < 1.0) {
                return Err(StationaryError::InvalidConstraint("w is not in the ball".into()));
            }
            let wp = ball_automorphism(z, w);
            let xi = cnorm(&wp);
            (wp.iter().map(|c| c / xi).collect::<Vec<C64>>(), xi)
        }
        Target::Direction(v) => {
            let d = inverse_differential(z, v);
            let nd = cnorm(&d);
            (d.iter().map(|c| c / nd).collect(), 1.0 / nd)
        }
    };
    let m = 8 * order.max(4);
    let vals: Vec<Vec<C64>> = grid(m)
        .into_iter()
        .map(|zeta| {
            let x: Vec<C64> = u.iter().map(|c| c * zeta).collect();
            ball_automorphism(z, &x)
        })
        .collect();
    let mut f = FourierDisc::from_samples(&vals, order, true);
    f.coeff_mut(0).copy_from_slice(z);
    let ball = DefiningFunction::ball(n);
    let mut disc = StationaryDisc::from_boundary_map(&ball, f, cons.mode(), mult)?;
    disc.residual_norm = residual(&ball, cons, &disc.f, &disc.q, mult)?.norm();
    Ok(disc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// truncation order `N`
    pub order: usize,
    pub continuation: ContinuationConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { order: 64, continuation: ContinuationConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct ExtremalResult {
    pub disc: StationaryDisc,
    pub trace: Vec<TracePoint>,
    /// dilation of the constraint used by the domain leg (1 unless the fallback ran)
    pub dilation: f64,
}

fn dilate(cons: &Constraint, s: f64) -> Constraint {
    let z: Vec<C64> = cons.z.iter().map(|c| c * s).collect();
    match &cons.target {
        Target::Point(w) => Constraint::two_point(z, w.iter().map(|c| c * s).collect()),
        Target::Direction(v) => Constraint::direction(z, v.clone()),
    }
}

/// Domain leg from the ball to `domain`, then a Newton solve with the
/// domain's own defining function.
fn domain_leg(
    domain: &DomainSpec,
    cons: &Constraint,
    cfg: &SolveConfig,
    trace: &mut Vec<TracePoint>,
) -> Result<StationaryDisc, ContinuationError> {
    let seed = ball_seed(cons, cfg.order)?;
    let ncfg = cfg.continuation.newton();
    let disc = if domain.kind == DomainKind::Ball {
        seed
    } else {
        let fam = DomainHomotopy { domain, constraint: cons.clone() };
        let res = continue_path(
            HomotopyProblem { family: &fam, seed, t_current: 0.0 },
            &cfg.continuation,
        );
        match res {
            Ok(p) => {
                trace.extend(p.trace);
                p.disc
            }
            Err(mut e) => {
                if let ContinuationError::StepUnderflow { trace: t, .. } = &mut e {
                    let mut all = trace.clone();
                    all.append(t);
                    *t = all;
                }
                return Err(e);
            }
        }
    };
    let reseed = StationaryDisc::from_boundary_map(&domain.r, disc.f.clone(), disc.mode, disc.multiplier)?;
    let (out, iters) = newton_solve(&domain.r, cons, &reseed, &ncfg)?;
    trace.push(point(Stage::Final, 1.0, 0.0, iters, &out));
    Ok(out)
}

/// Extremal disc with `f(0) = z` and `f(xi) = w` (or `f'(0) = lambda v`) in
/// internal coordinates.
///
/// If the domain leg underflows, it is retried for the constraint dilated by
/// `1/2` and `1/4` about the origin, followed by point legs moving first `z`,
/// then the target, back to the requested values.
pub fn solve_extremal(
    domain: &DomainSpec,
    cons: &Constraint,
    cfg: &SolveConfig,
) -> Result<ExtremalResult, ContinuationError> {
    let n = domain.n();
    cons.validate(n)?;
    if !domain.is_interior(&cons.z) {
        return Err(StationaryError::InvalidConstraint("z is not an interior point".into()).into());
    }
    if let Target::Point(w) = &cons.target {
        if !domain.is_interior(w) {
            return Err(StationaryError::InvalidConstraint("w is not an interior point".into()).into());
        }
    }
    let mut trace = Vec::new();
    let first = match domain_leg(domain, cons, cfg, &mut trace) {
        Ok(d) => return Ok(ExtremalResult { disc: d, trace, dilation: 1.0 }),
        Err(e @ ContinuationError::StepUnderflow { .. }) => e,
        Err(e) => return Err(e),
    };
    for s in [0.5, 0.25] {
        let mut tr = Vec::new();
        let small = dilate(cons, s);
        let Ok(start) = domain_leg(domain, &small, cfg, &mut tr) else { continue };
        let mid = Constraint { z: cons.z.clone(), target: small.target.clone() };
        let legs = [(small, mid.clone(), Stage::MoveZ), (mid, cons.clone(), Stage::MoveTarget)];
        let mut disc = start;
        let mut ok = true;
        for (from, to, stage) in legs {
            let fam = PointPath { r: &domain.r, from, to, stage };
            match continue_path(
                HomotopyProblem { family: &fam, seed: disc.clone(), t_current: 0.0 },
                &cfg.continuation,
            ) {
                Ok(p) => {
                    tr.extend(p.trace);
                    disc = p.disc;
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(ExtremalResult { disc, trace: tr, dilation: s });
        }
    }
    Err(first)
}
