//! Seeded, reproducible instance generators.
//!
//! Everything is driven by `ChaCha8Rng`, so a (seed, parameters) pair pins
//! the generated instance exactly; suites derive one seed per trial with
//! [`trial_seed`] and stay order-independent.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{CMat, NormalMatrix, SampledFn};
use crate::morphism::{Atom, RankMeasure};
use crate::region::Region;

/// Stateless per-trial seed derivation (splitmix64 over master ⊕ index).
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Disk,
    Segment,
    Annulus,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Shape> {
        match s {
            "disk" => Ok(Shape::Disk),
            "segment" => Ok(Shape::Segment),
            "annulus" => Ok(Shape::Annulus),
            other => Err(Error::InvalidParameter(format!(
                "unknown shape {other:?} (expected disk, segment, or annulus)"
            ))),
        }
    }
}

impl Shape {
    pub fn cycle(i: usize) -> Shape {
        match i % 3 {
            0 => Shape::Disk,
            1 => Shape::Segment,
            _ => Shape::Annulus,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Disk => "disk",
            Shape::Segment => "segment",
            Shape::Annulus => "annulus",
        }
    }
}

fn rotate(p: Complex64, theta: f64) -> Complex64 {
    p * Complex64::from_polar(1.0, theta)
}

/// A grid model of a disk, segment, or annulus with roughly `target` sample
/// points, randomly rotated for genericity. `h` is the covering radius of
/// the sampled lattice (half step for segments, half cell diagonal in 2D).
pub fn gen_region(rng: &mut ChaCha8Rng, shape: Shape, target: usize) -> Arc<Region> {
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    match shape {
        Shape::Segment => {
            let n = target.max(2);
            let step = 1.0 / (n as f64 - 1.0);
            let pts = (0..n)
                .map(|i| rotate(Complex64::new(i as f64 * step, 0.0), theta))
                .collect();
            Region::new(pts, step / 2.0 * 1.0001).expect("valid segment grid")
        }
        Shape::Disk => {
            let target = target.max(16) as f64;
            let s = (std::f64::consts::PI / target).sqrt();
            let mut pts = Vec::new();
            let reach = (1.0 / s).ceil() as i64;
            for i in -reach..=reach {
                for j in -reach..=reach {
                    let p = Complex64::new(i as f64 * s, j as f64 * s);
                    if p.norm() <= 1.0 {
                        pts.push(rotate(p, theta));
                    }
                }
            }
            Region::new(pts, s / std::f64::consts::SQRT_2 * 1.0001).expect("valid disk grid")
        }
        Shape::Annulus => {
            let target = target.max(16) as f64;
            let (r_in, r_out) = (0.45, 1.0);
            let area = std::f64::consts::PI * (r_out * r_out - r_in * r_in);
            let s = (area / target).sqrt();
            let mut pts = Vec::new();
            let reach = (r_out / s).ceil() as i64;
            for i in -reach..=reach {
                for j in -reach..=reach {
                    let p = Complex64::new(i as f64 * s, j as f64 * s);
                    if p.norm() <= r_out && p.norm() >= r_in {
                        pts.push(rotate(p, theta));
                    }
                }
            }
            Region::new(pts, s / std::f64::consts::SQRT_2 * 1.0001).expect("valid annulus grid")
        }
    }
}

/// A random composition of `n` into `k` positive parts.
fn composition(rng: &mut ChaCha8Rng, n: u32, k: usize) -> Vec<u32> {
    assert!(k >= 1 && n as usize >= k);
    let cuts = rand::seq::index::sample(rng, n as usize - 1, k - 1);
    let mut cuts: Vec<u32> = cuts.iter().map(|c| c as u32 + 1).collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let w = c - prev;
            prev = c;
            w
        })
        .collect()
}

/// A unital rank measure (total mass = n) with at most `max_atoms` atoms
/// placed at distinct grid points.
pub fn gen_measure(
    rng: &mut ChaCha8Rng,
    region: &Arc<Region>,
    max_atoms: usize,
    n: u32,
) -> RankMeasure {
    let k = rng.gen_range(1..=max_atoms.min(n as usize).min(region.len()));
    let idx = rand::seq::index::sample(rng, region.len(), k);
    let weights = composition(rng, n, k);
    let atoms = idx
        .iter()
        .zip(weights)
        .map(|(i, w)| Atom { location: region.points()[i], weight: w })
        .collect();
    RankMeasure::new(region, atoms, n).expect("generated atoms sit on the grid")
}

/// A unital rank measure whose atoms cluster at geometrically shrinking
/// scales around a few anchors, so dyadic lift schedules resolve the
/// structure one scale at a time.
pub fn gen_measure_clustered(
    rng: &mut ChaCha8Rng,
    region: &Arc<Region>,
    max_atoms: usize,
    n: u32,
) -> RankMeasure {
    let pts = region.points();
    let diam = region.diameter();
    let anchors = rng.gen_range(1..=2usize);
    let mut idx: Vec<usize> = Vec::new();
    for _ in 0..anchors {
        let center = pts[rng.gen_range(0..pts.len())];
        idx.push(region.nearest_index(center));
        for j in 2..=4 {
            let scale = diam * 0.5f64.powi(j);
            let offset = Complex64::from_polar(
                scale * rng.gen_range(0.5..1.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            idx.push(region.nearest_index(center + offset));
        }
    }
    idx.sort_unstable();
    idx.dedup();
    while idx.len() > max_atoms.min(n as usize) {
        idx.pop();
    }
    let weights = composition(rng, n, idx.len());
    let atoms = idx
        .into_iter()
        .zip(weights)
        .map(|(i, w)| Atom { location: pts[i], weight: w })
        .collect();
    RankMeasure::new(region, atoms, n).expect("generated atoms sit on the grid")
}

/// Standard complex Gaussian via Box–Muller.
pub fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u.ln()).sqrt();
    Complex64::new(r * v.cos(), r * v.sin())
}

/// Haar-ish random unitary: Gaussian matrix, Gram–Schmidt columns.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let mut m = CMat::from_fn(n, n, |_, _| gaussian(rng));
    for j in 0..n {
        for k in 0..j {
            let proj = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).into_owned();
            let mut col_j = m.column(j).into_owned();
            col_j -= col_k * proj;
            m.set_column(j, &col_j);
        }
        let norm = m.column(j).norm();
        let col = m.column(j) / Complex64::new(norm, 0.0);
        m.set_column(j, &col);
    }
    m
}

/// A normal matrix with eigenvalues drawn from the region's grid points
/// (spectrum repetition allowed) in a random unitary basis.
pub fn gen_normal(rng: &mut ChaCha8Rng, region: &Arc<Region>, n: usize) -> NormalMatrix {
    let pts = region.points();
    let eigs: Vec<Complex64> = (0..n).map(|_| pts[rng.gen_range(0..pts.len())]).collect();
    let u = random_unitary(rng, n);
    let d = CMat::from_fn(n, n, |i, j| if i == j { eigs[i] } else { Complex64::default() });
    NormalMatrix::new(&u * d * u.adjoint()).expect("conjugated diagonal is normal")
}

/// A pair of normal matrices sharing part of their spectrum with positive
/// probability, exercising both near and far unitary orbits.
pub fn gen_normal_pair(
    rng: &mut ChaCha8Rng,
    region: &Arc<Region>,
    n: usize,
) -> (NormalMatrix, NormalMatrix) {
    let x = gen_normal(rng, region, n);
    let y = if rng.gen_bool(0.3) {
        // same spectrum, different basis: d_U = 0 up to numerics
        let u = random_unitary(rng, n);
        NormalMatrix::new(&u * x.mat() * u.adjoint()).expect("conjugate of normal is normal")
    } else {
        gen_normal(rng, region, n)
    };
    (x, y)
}

/// A basket of total polynomial functions p(z, z̄) with certified Lipschitz
/// constants on |z| ≤ radius.
pub fn gen_basket(rng: &mut ChaCha8Rng, count: usize, radius: f64) -> Vec<SampledFn> {
    let mut basket = Vec::with_capacity(count);
    for i in 0..count {
        // terms c·z^s·z̄^t with s + t ≤ 3
        let mut terms: Vec<(Complex64, u32, u32)> = Vec::new();
        for s in 0..=3u32 {
            for t in 0..=(3 - s) {
                if rng.gen_bool(0.5) {
                    terms.push((gaussian(rng), s, t));
                }
            }
        }
        if terms.is_empty() {
            terms.push((Complex64::new(1.0, 0.0), 1, 0));
        }
        let r = radius.max(1e-9);
        let lipschitz: f64 = terms
            .iter()
            .map(|&(c, s, t)| c.norm() * f64::from(s + t) * r.powi((s + t) as i32 - 1))
            .sum();
        let terms_cl = terms.clone();
        basket.push(SampledFn::total(
            format!("poly-{i}"),
            lipschitz,
            move |z: Complex64| {
                terms_cl
                    .iter()
                    .map(|&(c, s, t)| c * z.powu(s) * z.conj().powu(t))
                    .sum::<Complex64>()
            },
        ));
    }
    basket
}

/// A sequence of normal matrices converging to `x` in norm at geometric
/// rate 1/2: step k conjugates by a unitary 2^{−k}-close to the identity
/// and shifts the spectrum by 2^{−k}-sized offsets.
pub fn gen_convergent_sequence(
    rng: &mut ChaCha8Rng,
    x: &NormalMatrix,
    len: usize,
) -> Vec<NormalMatrix> {
    let n = x.n();
    let shifts: Vec<Complex64> = (0..n).map(|_| gaussian(rng) * 0.2).collect();
    let a = CMat::from_fn(n, n, |_, _| gaussian(rng) * 0.1);
    (1..=len)
        .map(|k| {
            let t = 0.5f64.powi(k as i32);
            // unitary part of I + t·A via Gram–Schmidt
            let mut m = CMat::identity(n, n) + &a * Complex64::new(t, 0.0);
            for j in 0..n {
                for kk in 0..j {
                    let proj = m.column(kk).dotc(&m.column(j));
                    let col_kk = m.column(kk).into_owned();
                    let mut col_j = m.column(j).into_owned();
                    col_j -= col_kk * proj;
                    m.set_column(j, &col_j);
                }
                let norm = m.column(j).norm();
                let col = m.column(j) / Complex64::new(norm, 0.0);
                m.set_column(j, &col);
            }
            let eigs: Vec<Complex64> = x
                .eigenvalues()
                .iter()
                .zip(&shifts)
                .map(|(&e, &s)| e + s * t)
                .collect();
            let d = CMat::from_fn(n, n, |i, j| {
                if i == j {
                    eigs[i]
                } else {
                    Complex64::default()
                }
            });
            let basis = x.basis();
            NormalMatrix::new(&m * basis * d * basis.adjoint() * m.adjoint())
                .expect("conjugated diagonal is normal")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn regions_are_deterministic() {
        for shape in [Shape::Disk, Shape::Segment, Shape::Annulus] {
            let mut r1 = ChaCha8Rng::seed_from_u64(5);
            let mut r2 = ChaCha8Rng::seed_from_u64(5);
            let a = gen_region(&mut r1, shape, 200);
            let b = gen_region(&mut r2, shape, 200);
            assert_eq!(a.points(), b.points());
            assert!(a.len() >= 16);
            // size lands near the target
            assert!(
                a.len() as f64 >= 100.0 && a.len() as f64 <= 400.0,
                "{} points for {:?}",
                a.len(),
                shape
            );
        }
    }

    #[test]
    fn composition_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.gen_range(1..40u32);
            let k = rng.gen_range(1..=n as usize);
            let parts = composition(&mut rng, n, k);
            assert_eq!(parts.len(), k);
            assert!(parts.iter().all(|&w| w >= 1));
            assert_eq!(parts.iter().sum::<u32>(), n);
        }
    }

    #[test]
    fn measures_are_unital() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let region = gen_region(&mut rng, Shape::Disk, 300);
        for _ in 0..20 {
            let n = rng.gen_range(1..=32u32);
            let a = gen_measure(&mut rng, &region, 8, n);
            assert!(a.is_unital());
            let c = gen_measure_clustered(&mut rng, &region, 8, n);
            assert!(c.is_unital());
        }
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 9] {
            let u = random_unitary(&mut rng, n);
            let defect = crate::matrix::operator_norm(
                &(&u * u.adjoint() - CMat::identity(n, n)),
            );
            assert!(defect < 1e-12, "defect {defect}");
        }
    }

    #[test]
    fn normal_pair_spectra_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let region = gen_region(&mut rng, Shape::Annulus, 150);
        let (x, y) = gen_normal_pair(&mut rng, &region, 6);
        for m in [&x, &y] {
            for &e in m.eigenvalues() {
                assert!(region.dist_to_grid(e) < 1e-8);
            }
        }
    }

    #[test]
    fn convergent_sequence_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let region = gen_region(&mut rng, Shape::Disk, 100);
        let x = gen_normal(&mut rng, &region, 5);
        let xs = gen_convergent_sequence(&mut rng, &x, 10);
        let dists: Vec<f64> = xs
            .iter()
            .map(|xk| crate::matrix::operator_norm(&(xk.mat() - x.mat())))
            .collect();
        assert!(dists[9] < dists[0]);
        assert!(dists[9] < 1e-2);
        // geometric envelope
        for (k, d) in dists.iter().enumerate() {
            assert!(*d <= 2.0 * 0.5f64.powi(k as i32 + 1) * (1.0 + x.norm()));
        }
    }

    #[test]
    fn basket_functions_are_lipschitz_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let basket = gen_basket(&mut rng, 10, 1.5);
        assert_eq!(basket.len(), 10);
        for f in &basket {
            for _ in 0..30 {
                let z = gaussian(&mut rng) * 0.5;
                let w = gaussian(&mut rng) * 0.5;
                let (z, w) = (
                    z / (1.0f64.max(z.norm() / 1.5)),
                    w / (1.0f64.max(w.norm() / 1.5)),
                );
                let fz = f.eval(z).unwrap();
                let fw = f.eval(w).unwrap();
                assert!(
                    (fz - fw).norm() <= f.lipschitz() * (z - w).norm() + 1e-12,
                    "{} violates its Lipschitz constant",
                    f.name()
                );
            }
        }
    }
}
