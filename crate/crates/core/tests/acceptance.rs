//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use common::*;
use geodisc::continuation::{SolveConfig, Stage, TracePoint};
use geodisc::disc::{grid, winding_of_samples, FourierDisc};
use geodisc::domain::{DefiningFunction, DomainSpec};
use geodisc::factor::{matrix_at, matrix_field_from_samples, matrix_samples, spectral_factorize, symmetric_norm};
use geodisc::metrics::{ball_kobayashi, ball_lempert, kobayashi_royden, lempert_distance, Solved};
use geodisc::stationary::{
    contraction_solve, holomorphy_defect, round_trip_error, solve_linearized_at_axis, LinearMode,
    LinearizedData,
};
use geodisc::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

#[derive(Default)]
struct Store {
    /// `(domain label, z, w, solved)` from the ellipsoid suite
    ellipsoid: Vec<(String, Vec<C64>, Vec<C64>, Solved)>,
    holder: Vec<f64>,
}

impl Store {
    fn record(&mut self, s: &Solved) {
        self.holder.extend(s.trace.iter().map(|p| p.holder_c));
        self.holder.push(s.result.residuals.holder_c);
    }
}

const ORDER: usize = 64;

fn cfg() -> SolveConfig {
    SolveConfig { order: ORDER, ..SolveConfig::default() }
}

fn ball_closed_form(store: &mut Store) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut failures = 0;
    for n in [2, 3] {
        let ball = DomainSpec::ball(n);
        for _ in 0..25 {
            let z = random_point(&mut rng, &ball, 0.6);
            let w = random_point(&mut rng, &ball, 0.9);
            let t = Instant::now();
            match lempert_distance(&ball, &z, &w, &cfg()) {
                Ok(s) => {
                    slowest = slowest.max(t.elapsed().as_secs_f64());
                    worst = worst.max((s.result.value - ball_lempert(&z, &w)).abs());
                    store.record(&s);
                }
                Err(_) => failures += 1,
            }
        }
    }
    Outcome {
        pass: failures == 0 && worst < 1e-8 && slowest < 1.0,
        detail: format!("max |error| {worst:.2e}, slowest pair {slowest:.3}s, failed solves {failures}"),
    }
}

fn ellipsoid_certificates(store: &mut Store) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_gap: f64 = 0.0;
    let mut worst_r: f64 = 0.0;
    let mut worst_tail: f64 = 0.0;
    let mut bad = Vec::new();
    for axes in [[1.0, 1.2], [1.0, 2.0]] {
        let dom = DomainSpec::ellipsoid(&axes).unwrap();
        let label = format!("({}, {})", axes[0], axes[1]);
        for i in 0..10 {
            let z = random_point(&mut rng, &dom, 0.6);
            let w = random_point(&mut rng, &dom, 0.6);
            match lempert_distance(&dom, &z, &w, &cfg()) {
                Ok(s) => {
                    let r = &s.result;
                    worst_gap = worst_gap.max(r.certificate_gap);
                    worst_r = worst_r.max(r.residuals.sup_r);
                    worst_tail = worst_tail.max(r.residuals.pi_tail);
                    if !(r.certificate_gap < 1e-7 && r.residuals.passed) {
                        bad.push(format!("{label}#{i}: {:?}", r.residuals.failures));
                    }
                    store.record(&s);
                    store.ellipsoid.push((label.clone(), z, w, s));
                }
                Err(e) => bad.push(format!("{label}#{i}: {e}")),
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "max gap {worst_gap:.2e}, max |r∘f| {worst_r:.2e}, max pi-tail {worst_tail:.2e}{}",
            if bad.is_empty() { String::new() } else { format!(", failures {bad:?}") }
        ),
    }
}

fn linearized_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let order = 32;
    let mut worst: f64 = 0.0;
    let mut errors = Vec::new();
    for n in [2, 3] {
        let r0 = DefiningFunction::ball(n).scaled(0.5);
        let zero_eta = FourierDisc::zeros_boundary(1, order);
        let zero_phi = FourierDisc::zeros_boundary(n, order);
        let base = LinearizedData::at_axis(&r0, order, zero_eta, zero_phi, vec![c(0.0, 0.0); n]).unwrap();
        for i in 0..50 {
            let eta = random_real_field(&mut rng, order, order - 1, 1.0);
            let mut phi = FourierDisc::zeros_boundary(n, order);
            for k in 1..=order as i64 {
                for l in 0..n {
                    if l == 0 || k < order as i64 {
                        phi.coeff_mut(-k)[l] = cgauss(&mut rng) / (1.0 + k as f64);
                    }
                }
            }
            let target: Vec<C64> = (0..n).map(|_| cgauss(&mut rng)).collect();
            let mode = if i % 2 == 0 {
                LinearMode::Direction
            } else {
                LinearMode::TwoPoint(rng.gen_range(0.2..0.8))
            };
            let data = base.with_data(eta, phi, target).unwrap();
            match solve_linearized_at_axis(&data, mode) {
                Ok(sol) => worst = worst.max(round_trip_error(&data, mode, &sol)),
                Err(e) => errors.push(e.to_string()),
            }
        }
    }
    Outcome {
        pass: errors.is_empty() && worst < 1e-9,
        detail: format!("100 data sets, max error {worst:.2e}{}", if errors.is_empty() { String::new() } else { format!(", errors {errors:?}") }),
    }
}

fn random_symmetric(rng: &mut ChaCha8Rng, size: usize) -> DMatrix<C64> {
    let a = random_matrix(rng, size);
    (&a + a.transpose()) * c(0.5, 0.0)
}

fn contraction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let order = 16;
    let m = 4 * order;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_defect: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut errors = Vec::new();
    for _ in 0..50 {
        let size = rng.gen_range(1..=3);
        let deg: i64 = rng.gen_range(0..=3);
        let coeffs: Vec<(i64, DMatrix<C64>)> =
            (-deg..=deg).map(|k| (k, random_symmetric(&mut rng, size))).collect();
        let mats: Vec<DMatrix<C64>> = grid(m)
            .into_iter()
            .map(|z| coeffs.iter().fold(DMatrix::zeros(size, size), |acc, (k, a)| acc + a * z.powi(*k as i32)))
            .collect();
        let sup = mats.iter().map(|a| symmetric_norm(a).unwrap()).fold(0.0, f64::max);
        let target_margin = rng.gen_range(0.2..0.5);
        let s = c((1.0 - target_margin) / sup, 0.0);
        let mats: Vec<DMatrix<C64>> = mats.into_iter().map(|a| a * s).collect();
        let gamma = matrix_field_from_samples(&mats, order, false);
        let mut rhs = FourierDisc::zeros_boundary(size, order);
        for k in -(order as i64)..=order as i64 {
            for l in 0..size {
                rhs.coeff_mut(k)[l] = cgauss(&mut rng) / (1.0 + (k * k) as f64);
            }
        }
        let a: Vec<C64> = (0..size).map(|_| cgauss(&mut rng)).collect();
        match contraction_solve(&gamma, size, &rhs, &a, None, None, 1e-12) {
            Ok(out) => {
                min_margin = min_margin.min(out.margin);
                // ratios of differences near round-off carry no information
                let limit = 1.0 - out.margin / 2.0;
                for (r, d) in out.ratios.iter().zip(&out.diffs) {
                    if *d > 1e-11 {
                        worst_excess = worst_excess.max(r - limit);
                    }
                }
                worst_defect = worst_defect.max(holomorphy_defect(&gamma, size, &rhs, &out.h));
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    Outcome {
        pass: errors.is_empty() && worst_excess <= 0.0 && worst_defect < 1e-10 && min_margin >= 0.2 - 1e-12,
        detail: format!(
            "min margin {min_margin:.3}, max (ratio - (1 - margin/2)) {worst_excess:.3}, max pi-defect {worst_defect:.2e}{}",
            if errors.is_empty() { String::new() } else { format!(", errors {errors:?}") }
        ),
    }
}

fn spectral_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let order = 16;
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for i in 0..50 {
        let size = 1 + i % 3;
        let deg = rng.gen_range(0..=8);
        let c0 = random_matrix(&mut rng, size) * c(0.3, 0.0) + DMatrix::identity(size, size) * c(2.0, 0.0);
        let smin = c0.clone().svd(false, false).singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut ks: Vec<DMatrix<C64>> = (0..deg).map(|_| random_matrix(&mut rng, size)).collect();
        let total: f64 = ks.iter().map(|a| a.clone().svd(false, false).singular_values[0]).sum();
        if total > 0.0 {
            let s = c(0.6 * smin / total, 0.0);
            ks.iter_mut().for_each(|a| *a *= s);
        }
        let h0 = |z: C64| -> DMatrix<C64> {
            let mut acc = c0.clone();
            let mut p = z;
            for a in &ks {
                acc += a * p;
                p *= z;
            }
            acc
        };
        let m = 4 * order;
        let betas: Vec<DMatrix<C64>> = grid(m).into_iter().map(|z| {
            let h = h0(z);
            &h * h.adjoint()
        }).collect();
        let beta = matrix_field_from_samples(&betas, 8, false);
        match spectral_factorize(&beta, size, order, 1e-8) {
            Ok(f) => {
                let fine = 256;
                let hs = matrix_samples(&f.h, size, fine);
                let bs = matrix_samples(&beta, size, fine);
                let res = hs.iter().zip(&bs).map(|(h, b)| (h * h.adjoint() - b).norm()).fold(0.0, f64::max);
                let dets: Vec<C64> = grid(fine).into_iter().map(|z| matrix_at(&f.h.eval_unchecked(z), size).determinant()).collect();
                let wind = winding_of_samples(&dets).map(|w| w.value);
                worst = worst.max(res);
                if !(res < 1e-8) || wind.as_ref().ok() != Some(&0) {
                    bad.push(format!("#{i}: residual {res:.2e} winding {wind:?}"));
                }
            }
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("max |HH* - beta| {worst:.2e}{}", if bad.is_empty() { String::new() } else { format!(", failures {bad:?}") }),
    }
}

fn symmetric_sup() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_gap: f64 = 0.0;
    let mut worst_below: f64 = f64::NEG_INFINITY;
    for i in 0..200 {
        let size = 2 + i % 5;
        let a = random_symmetric(&mut rng, size);
        let norm = symmetric_norm(&a).unwrap();
        let quad = |z: &[C64]| -> f64 {
            let mut s = c(0.0, 0.0);
            for j in 0..size {
                for k in 0..size {
                    s += z[j] * a[(j, k)] * z[k];
                }
            }
            s.norm()
        };
        let mut best: Vec<C64> = unit_vector(&mut rng, size);
        let mut best_val = quad(&best);
        for _ in 0..2000 {
            let z = unit_vector(&mut rng, size);
            let v = quad(&z);
            worst_below = worst_below.max(v - norm);
            if v > best_val {
                best_val = v;
                best = z;
            }
        }
        // refinement: z <- conj(A z)/|A z| from the best sample
        for _ in 0..500 {
            let az = &a * nalgebra::DVector::from_column_slice(&best);
            let nz = az.norm();
            best = az.iter().map(|w| w.conj() / nz).collect();
            let v = quad(&best);
            worst_below = worst_below.max(v - norm);
            best_val = best_val.max(v);
        }
        worst_gap = worst_gap.max((norm - best_val).abs());
    }
    Outcome {
        pass: worst_gap < 1e-3 && worst_below <= 1e-12,
        detail: format!("max |norm - refined sup| {worst_gap:.2e}, max (sample - norm) {worst_below:.2e}"),
    }
}

fn domain_points(trace: &[TracePoint]) -> Vec<&TracePoint> {
    trace.iter().filter(|p| p.stage == Stage::Domain).collect()
}

fn monotone_symmetric(store: &mut Store) -> Outcome {
    let mut worst_drop: f64 = 0.0;
    let mut paths = 0;
    for (_, _, _, s) in &store.ellipsoid {
        let pts = domain_points(&s.trace);
        if pts.len() > 1 {
            paths += 1;
        }
        for w in pts.windows(2) {
            let a = w[0].xi_or_lambda.atanh();
            let b = w[1].xi_or_lambda.atanh();
            worst_drop = worst_drop.max(a - b);
        }
    }
    let mut worst_sym: f64 = 0.0;
    let mut errors = Vec::new();
    let picks: Vec<(String, Vec<C64>, Vec<C64>, f64)> = store
        .ellipsoid
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 4 == 0)
        .map(|(_, (l, z, w, s))| (l.clone(), z.clone(), w.clone(), s.result.value))
        .collect();
    for (label, z, w, value) in picks {
        let axes: Vec<f64> = if label.contains("1.2") { vec![1.0, 1.2] } else { vec![1.0, 2.0] };
        let dom = DomainSpec::ellipsoid(&axes).unwrap();
        match lempert_distance(&dom, &w, &z, &cfg()) {
            Ok(s) => {
                worst_sym = worst_sym.max((s.result.value - value).abs());
                store.record(&s);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    Outcome {
        pass: errors.is_empty() && worst_drop <= 1e-8 && worst_sym < 1e-8 && paths > 0,
        detail: format!("{paths} paths, max decrease {worst_drop:.2e}, max swap difference {worst_sym:.2e}"),
    }
}

fn infinitesimal(store: &mut Store) -> Outcome {
    let cases: Vec<(DomainSpec, Vec<C64>, Vec<C64>)> = vec![
        (DomainSpec::ball(2), vec![c(0.2, 0.0), c(0.0, 0.1)], vec![c(0.3, 0.0), c(-0.5, 0.2)]),
        (DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap(), vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]),
        (DomainSpec::ellipsoid(&[1.0, 2.0]).unwrap(), vec![c(0.1, 0.0), c(0.3, 0.2)], vec![c(0.6, 0.1), c(0.2, -0.4)]),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (k, (dom, z, v)) in cases.iter().enumerate() {
        let kappa = match kobayashi_royden(dom, z, v, &cfg()) {
            Ok(s) => {
                store.record(&s);
                if k == 0 {
                    let exact = ball_kobayashi(z, v);
                    if (s.result.value - exact).abs() > 1e-8 {
                        pass = false;
                    }
                }
                s.result.value
            }
            Err(e) => {
                pass = false;
                lines.push(format!("case {k}: {e}"));
                continue;
            }
        };
        let mut errs = Vec::new();
        for s in [1e-2, 1e-3] {
            let w: Vec<C64> = z.iter().zip(v).map(|(a, b)| a + b * s).collect();
            match lempert_distance(dom, z, &w, &cfg()) {
                Ok(sol) => {
                    store.record(&sol);
                    errs.push(sol.result.value / s - kappa);
                }
                Err(e) => {
                    pass = false;
                    lines.push(format!("case {k} s={s}: {e}"));
                }
            }
        }
        if errs.len() == 2 {
            let (e1, e2) = (errs[0].abs(), errs[1].abs());
            let order = (e1 / e2).log10();
            let ok = e2 < 1e-4 * kappa && (order >= 0.9 || e2 < 1e-9);
            pass &= ok;
            lines.push(format!("case {k}: kappa {kappa:.10}, errors {e1:.2e} / {e2:.2e}, order {order:.2}"));
        }
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn holder(store: &mut Store) -> Outcome {
    let all_finite = store.holder.iter().all(|c| c.is_finite() && *c > 0.0);
    let lo = store.holder.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = store.holder.iter().cloned().fold(0.0, f64::max);
    Outcome {
        pass: all_finite && !store.holder.is_empty(),
        detail: format!("{} discs, C in [{lo:.4}, {hi:.4}]", store.holder.len()),
    }
}

fn main() {
    let mut store = Store::default();
    type Criterion = (&'static str, Box<dyn Fn(&mut Store) -> Outcome>);
    let criteria: Vec<Criterion> = vec![
        ("ball closed form", Box::new(ball_closed_form)),
        ("ellipsoid Lempert certificates", Box::new(ellipsoid_certificates)),
        ("linearized round trip at the axis disc", Box::new(|_: &mut Store| linearized_round_trip())),
        ("contraction ratios and holomorphy", Box::new(|_: &mut Store| contraction())),
        ("spectral factorization round trip", Box::new(|_: &mut Store| spectral_round_trip())),
        ("symmetric norm against sampled sup", Box::new(|_: &mut Store| symmetric_sup())),
        ("monotonicity along paths and symmetry", Box::new(monotone_symmetric)),
        ("infinitesimal consistency", Box::new(infinitesimal)),
        ("Hölder diagnostic", Box::new(holder)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&mut store)))
            .unwrap_or_else(|_| Outcome { pass: false, detail: "panicked".into() });
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {} [{:.1}s]",
            i + 1,
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
