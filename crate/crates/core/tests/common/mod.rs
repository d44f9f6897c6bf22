#![allow(dead_code)]

use geodisc::disc::FourierDisc;
use geodisc::domain::DomainSpec;
use geodisc::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    c(gauss(rng), gauss(rng))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| cgauss(rng)).collect();
    let s = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / s).collect()
}

/// Uniform-in-volume point of `{mu_D <= radius}` in user coordinates.
pub fn random_point(rng: &mut ChaCha8Rng, domain: &DomainSpec, radius: f64) -> Vec<C64> {
    let n = domain.n();
    let d = unit_vector(rng, n);
    let mu = domain.minkowski(&d).unwrap();
    let t = radius * rng.gen::<f64>().powf(1.0 / (2 * n) as f64) / mu;
    domain.to_user(&d.iter().map(|a| a * t).collect::<Vec<_>>())
}

/// Random real boundary field with modes `|k| <= kmax`.
pub fn random_real_field(rng: &mut ChaCha8Rng, order: usize, kmax: usize, scale: f64) -> FourierDisc {
    let mut u = FourierDisc::zeros_boundary(1, order);
    u.coeff_mut(0)[0] = c(scale * gauss(rng), 0.0);
    for k in 1..=kmax as i64 {
        let a = cgauss(rng) * (scale / (1.0 + k as f64));
        u.coeff_mut(k)[0] = a;
        u.coeff_mut(-k)[0] = a.conj();
    }
    u
}

pub fn random_matrix(rng: &mut ChaCha8Rng, size: usize) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(size, size, |_, _| cgauss(rng))
}
