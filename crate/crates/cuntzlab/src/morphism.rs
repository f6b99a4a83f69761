//! Cu-morphisms α: Lsc(Ω, ℕ̄) → Cu(Mₙ) ≅ ℕ̄ in canonical rank-measure form,
//! the normalized-trace functional, and the bridges to concrete
//! finite-dimensional maps and normal matrices.

use std::sync::Arc;

use num_complex::Complex64;

use crate::dsu::Dsu;
use crate::error::{Error, Result};
use crate::lsc::{LscFn, Nat};
use crate::matrix::NormalMatrix;
use crate::region::{lex_cmp, same_region, OpenSet, Region};

/// One weighted atom of a rank measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: Complex64,
    pub weight: u32,
}

/// Canonical form of a Cu-morphism into Cu(Mₙ): a finite multiset of
/// weighted atoms with total mass ≤ n. Evaluation on open sets counts mass;
/// the lifting algorithm only ever calls the evaluators, never the atoms.
#[derive(Clone, Debug)]
pub struct RankMeasure {
    region: Arc<Region>,
    atoms: Vec<Atom>,
    target_dim: u32,
}

impl RankMeasure {
    /// Validates, merges coincident locations, and sorts canonically.
    pub fn new(region: &Arc<Region>, atoms: Vec<Atom>, target_dim: u32) -> Result<RankMeasure> {
        if target_dim == 0 {
            return Err(Error::InvalidParameter("target dimension must be positive".into()));
        }
        for a in &atoms {
            if a.weight == 0 {
                return Err(Error::InvalidParameter("atom weight must be positive".into()));
            }
            let dist = region.dist_to_grid(a.location);
            if !region.admits(a.location) {
                return Err(Error::OutsideRegion {
                    re: a.location.re,
                    im: a.location.im,
                    dist,
                    h: region.h(),
                });
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| lex_cmp(a.location, b.location));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.location == a.location => last.weight += a.weight,
                _ => merged.push(a),
            }
        }
        let mass: u64 = merged.iter().map(|a| u64::from(a.weight)).sum();
        if mass > u64::from(target_dim) {
            return Err(Error::MassExceedsDimension { mass, n: target_dim });
        }
        Ok(RankMeasure { region: region.clone(), atoms: merged, target_dim })
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn target_dim(&self) -> u32 {
        self.target_dim
    }

    /// The same measure viewed into Mₙ for a different n ≥ total mass.
    pub fn with_target_dim(&self, n: u32) -> Result<RankMeasure> {
        RankMeasure::new(&self.region, self.atoms.clone(), n)
    }

    /// M = α(𝟙_Ω).
    pub fn total_mass(&self) -> u64 {
        self.atoms.iter().map(|a| u64::from(a.weight)).sum()
    }

    pub fn is_unital(&self) -> bool {
        self.total_mass() == u64::from(self.target_dim)
    }

    /// Atom locations repeated by weight, in canonical order.
    pub fn expanded(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.total_mass() as usize);
        for a in &self.atoms {
            for _ in 0..a.weight {
                out.push(a.location);
            }
        }
        out
    }

    /// α(𝟙_O): total weight of atoms strictly inside O.
    pub fn eval_indicator(&self, o: &OpenSet) -> u64 {
        self.atoms
            .iter()
            .filter(|a| o.contains(a.location))
            .map(|a| u64::from(a.weight))
            .sum()
    }

    /// α(f) = Σ_atoms weight·f(nearest grid point); agrees with the level sum
    /// Σ_{k≥1} α(𝟙_{f≥k}) by additivity and sup-preservation.
    pub fn eval_lsc(&self, f: &LscFn) -> Result<Nat> {
        if !same_region(&self.region, f.region()) {
            return Err(Error::RegionMismatch);
        }
        let mut total = 0u64;
        for a in &self.atoms {
            match f.value_near(a.location) {
                Nat::Fin(v) => total += u64::from(a.weight) * v,
                Nat::Inf => return Ok(Nat::Inf),
            }
        }
        Ok(Nat::Fin(total))
    }

    /// μ_{α∗τ}(O) = α(𝟙_O)/n, the normalized measure of O.
    pub fn measure(&self, o: &OpenSet) -> f64 {
        self.eval_indicator(o) as f64 / f64::from(self.target_dim)
    }

    /// σ = min over centers of measure(B(center, radius)); every listed ball
    /// must carry positive mass (callers filter zero-mass balls first).
    pub fn min_ball_mass(&self, centers: &[Complex64], radius: f64) -> Result<f64> {
        let mut sigma = f64::INFINITY;
        for &c in centers {
            let ball = OpenSet::ball(&self.region, c, radius)?;
            let m = self.eval_indicator(&ball);
            if m == 0 {
                return Err(Error::ZeroMassBall { re: c.re, im: c.im });
            }
            sigma = sigma.min(m as f64 / f64::from(self.target_dim));
        }
        Ok(sigma)
    }

    /// Multiset sum into the same Mₙ (atoms merge; mass must stay ≤ n).
    pub fn add(&self, other: &RankMeasure) -> Result<RankMeasure> {
        if !same_region(&self.region, &other.region) {
            return Err(Error::RegionMismatch);
        }
        if self.target_dim != other.target_dim {
            return Err(Error::DimensionMismatch(
                self.target_dim as usize,
                other.target_dim as usize,
            ));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        RankMeasure::new(&self.region, atoms, self.target_dim)
    }

    /// Exact multiset equality of the canonical atom lists up to a location
    /// tolerance (weights must match exactly).
    pub fn multiset_eq(&self, other: &RankMeasure, tol: f64) -> bool {
        self.atoms.len() == other.atoms.len()
            && self.atoms.iter().zip(&other.atoms).all(|(a, b)| {
                a.weight == b.weight && (a.location - b.location).norm() <= tol
            })
    }
}

/// The unique normalized trace functional of Mₙ on rank values:
/// d_τ(m) = m/n.
#[derive(Clone, Copy, Debug)]
pub struct Functional {
    n: u32,
}

impl Functional {
    pub fn new(n: u32) -> Result<Functional> {
        if n == 0 {
            return Err(Error::InvalidParameter("trace needs n ≥ 1".into()));
        }
        Ok(Functional { n })
    }

    pub fn apply(&self, rank: Nat) -> f64 {
        match rank {
            Nat::Fin(m) => m as f64 / f64::from(self.n),
            Nat::Inf => f64::INFINITY,
        }
    }
}

/// A finite-dimensional unital homomorphism C(Ω) → Mₙ, f ↦ Σ f(zᵢ)pᵢ,
/// recorded as its (point, rank) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FinDimHom {
    region: Arc<Region>,
    pairs: Vec<(Complex64, u32)>,
    n: u32,
}

impl FinDimHom {
    pub fn new(region: &Arc<Region>, pairs: Vec<(Complex64, u32)>, n: u32) -> Result<FinDimHom> {
        let mass: u64 = pairs.iter().map(|&(_, r)| u64::from(r)).sum();
        if mass != u64::from(n) {
            return Err(Error::NotUnital { mass, n });
        }
        for &(z, r) in &pairs {
            if r == 0 {
                return Err(Error::InvalidParameter("rank must be positive".into()));
            }
            if !region.admits(z) {
                return Err(Error::OutsideRegion {
                    re: z.re,
                    im: z.im,
                    dist: region.dist_to_grid(z),
                    h: region.h(),
                });
            }
        }
        let mut pairs = pairs;
        pairs.sort_by(|a, b| lex_cmp(a.0, b.0));
        Ok(FinDimHom { region: region.clone(), pairs, n })
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn pairs(&self) -> &[(Complex64, u32)] {
        &self.pairs
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// φ₁ ⊕ φ₂ into M_{n₁+n₂}.
    pub fn direct_sum(&self, other: &FinDimHom) -> Result<FinDimHom> {
        if !same_region(&self.region, &other.region) {
            return Err(Error::RegionMismatch);
        }
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        FinDimHom::new(&self.region, pairs, self.n + other.n)
    }

    /// The evaluation x_φ = φ(id): the diagonal normal matrix with each zᵢ
    /// repeated rank-many times.
    pub fn realize(&self) -> Result<NormalMatrix> {
        let mut diag = Vec::with_capacity(self.n as usize);
        for &(z, r) in &self.pairs {
            for _ in 0..r {
                diag.push(z);
            }
        }
        NormalMatrix::diagonal(&diag)
    }
}

/// Cu(φ): the rank measure whose atoms are φ's (point, rank) pairs, merged
/// at coincident points.
pub fn cu_of_hom(phi: &FinDimHom) -> RankMeasure {
    let atoms =
        phi.pairs.iter().map(|&(z, r)| Atom { location: z, weight: r }).collect();
    RankMeasure::new(&phi.region, atoms, phi.n)
        .expect("FinDimHom invariants imply a valid unital rank measure")
}

/// The rank measure of a normal matrix: its spectral multiset, clustered at
/// tolerance 1e−8·‖x‖ so eigensolver noise cannot split a multiple
/// eigenvalue. Errors if a cluster sits further than h from the region.
pub fn cu_of_normal(x: &NormalMatrix, region: &Arc<Region>) -> Result<RankMeasure> {
    let eigs = x.eigenvalues();
    let tol = 1e-8 * x.norm();
    let m = eigs.len();
    let mut dsu = Dsu::new(m);
    for i in 0..m {
        for j in (i + 1)..m {
            if (eigs[i] - eigs[j]).norm() <= tol {
                dsu.union(i, j);
            }
        }
    }
    let mut atoms = Vec::new();
    for group in dsu.groups(m) {
        let k = group.len();
        let mean = group.iter().map(|&i| eigs[i]).sum::<Complex64>() / k as f64;
        atoms.push(Atom { location: mean, weight: k as u32 });
    }
    RankMeasure::new(region, atoms, m as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::CMat;
    use crate::region::Ball;
    use crate::matrix::SampledFn;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn segment(n: usize) -> Arc<Region> {
        let step = 1.0 / (n as f64 - 1.0);
        let pts = (0..n).map(|i| cx(i as f64 * step, 0.0)).collect();
        Region::new(pts, step / 2.0).unwrap()
    }

    fn atoms(list: &[(f64, f64, u32)]) -> Vec<Atom> {
        list.iter().map(|&(re, im, w)| Atom { location: cx(re, im), weight: w }).collect()
    }

    #[test]
    fn construction_validates() {
        let r = segment(11);
        assert!(matches!(
            RankMeasure::new(&r, atoms(&[(0.0, 0.0, 3), (1.0, 0.0, 2)]), 4),
            Err(Error::MassExceedsDimension { mass: 5, n: 4 })
        ));
        assert!(matches!(
            RankMeasure::new(&r, atoms(&[(5.0, 5.0, 1)]), 4),
            Err(Error::OutsideRegion { .. })
        ));
        // coincident atoms merge
        let a = RankMeasure::new(&r, atoms(&[(0.5, 0.0, 1), (0.5, 0.0, 2)]), 4).unwrap();
        assert_eq!(a.atoms().len(), 1);
        assert_eq!(a.atoms()[0].weight, 3);
    }

    #[test]
    fn eval_indicator_cases() {
        let r = segment(11);
        let a = RankMeasure::new(&r, atoms(&[(0.0, 0.0, 2), (1.0, 0.0, 3)]), 8).unwrap();
        assert_eq!(a.eval_indicator(&OpenSet::empty(&r)), 0);
        assert_eq!(a.eval_indicator(&OpenSet::whole(&r)), 5);
        let half = OpenSet::ball(&r, cx(0.0, 0.0), 0.5).unwrap();
        assert_eq!(a.eval_indicator(&half), 2);
    }

    #[test]
    fn eval_lsc_matches_level_sum() {
        let r = segment(21);
        let a = RankMeasure::new(&r, atoms(&[(0.1, 0.0, 2), (0.6, 0.0, 3), (0.9, 0.0, 1)]), 8)
            .unwrap();
        let one = LscFn::indicator(&OpenSet::whole(&r));
        assert_eq!(a.eval_lsc(&one).unwrap(), Nat::Fin(6));
        assert_eq!(a.eval_lsc(&one.times(2)).unwrap(), Nat::Fin(12));

        // random-ish stacked function: level-sum formula cross-check
        let f = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.65).unwrap())
            .add(&LscFn::indicator(&OpenSet::ball(&r, cx(0.5, 0.0), 0.2).unwrap()).times(2))
            .unwrap();
        let direct = a.eval_lsc(&f).unwrap();
        let mut level_sum = 0u64;
        let top = f.max_finite().unwrap();
        for k in 1..=top {
            let level = f.level_set(k);
            // count atom mass whose nearest grid point is in the level set
            let mass: u64 = a
                .atoms()
                .iter()
                .filter(|at| {
                    let idx = r.nearest_index(at.location) as u32;
                    level.contains(&idx)
                })
                .map(|at| u64::from(at.weight))
                .sum();
            level_sum += mass;
        }
        assert_eq!(direct, Nat::Fin(level_sum));

        let inf = LscFn::constant(&r, Nat::Inf);
        assert_eq!(a.eval_lsc(&inf).unwrap(), Nat::Inf);
    }

    #[test]
    fn measure_properties() {
        let r = segment(21);
        let a = RankMeasure::new(&r, atoms(&[(0.2, 0.0, 1), (0.8, 0.0, 2)]), 4).unwrap();
        assert!((a.measure(&OpenSet::whole(&r)) - 0.75).abs() < 1e-15);
        // additive on disjoint balls
        let b1 = OpenSet::ball(&r, cx(0.2, 0.0), 0.1).unwrap();
        let b2 = OpenSet::ball(&r, cx(0.8, 0.0), 0.1).unwrap();
        let both = OpenSet::from_balls(
            &r,
            vec![
                Ball { center: cx(0.2, 0.0), radius: 0.1 },
                Ball { center: cx(0.8, 0.0), radius: 0.1 },
            ],
        )
        .unwrap();
        assert_eq!(
            a.eval_indicator(&both),
            a.eval_indicator(&b1) + a.eval_indicator(&b2)
        );
        // monotone under thickening
        assert!(a.measure(&b1.thicken(0.7)) >= a.measure(&b1));
    }

    #[test]
    fn functional_is_normalized() {
        let tau = Functional::new(4).unwrap();
        assert_eq!(tau.apply(Nat::Fin(4)), 1.0);
        assert_eq!(tau.apply(Nat::Fin(1)), 0.25);
        assert_eq!(tau.apply(Nat::Inf), f64::INFINITY);
    }

    #[test]
    fn min_ball_mass_cases() {
        let r = segment(11);
        let a = RankMeasure::new(&r, atoms(&[(0.5, 0.0, 1)]), 4).unwrap();
        let sigma = a.min_ball_mass(&[cx(0.5, 0.0)], 0.2).unwrap();
        assert!((sigma - 0.25).abs() < 1e-15);
        assert!(matches!(
            a.min_ball_mass(&[cx(0.0, 0.0)], 0.1),
            Err(Error::ZeroMassBall { .. })
        ));
        // equals brute-force min over listed balls
        let b = RankMeasure::new(&r, atoms(&[(0.1, 0.0, 2), (0.6, 0.0, 1), (0.9, 0.0, 3)]), 8)
            .unwrap();
        let centers = [cx(0.1, 0.0), cx(0.6, 0.0), cx(0.9, 0.0)];
        let got = b.min_ball_mass(&centers, 0.15).unwrap();
        let brute = centers
            .iter()
            .map(|&c| b.measure(&OpenSet::ball(&r, c, 0.15).unwrap()))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(got, brute);
    }

    #[test]
    fn cu_of_hom_and_direct_sum() {
        let r = segment(11);
        let phi = FinDimHom::new(&r, vec![(cx(0.0, 0.0), 2), (cx(1.0, 0.0), 2)], 4).unwrap();
        let alpha = cu_of_hom(&phi);
        assert_eq!(alpha.total_mass(), 4);
        assert_eq!(alpha.atoms().len(), 2);
        assert!(alpha.is_unital());

        let psi = FinDimHom::new(&r, vec![(cx(0.5, 0.0), 1)], 1).unwrap();
        let sum = phi.direct_sum(&psi).unwrap();
        let cu_sum = cu_of_hom(&sum);
        assert_eq!(cu_sum.total_mass(), 5);
        assert_eq!(cu_sum.atoms().len(), 3);
        // atoms are the multiset union
        let merged: Vec<Atom> = alpha
            .atoms()
            .iter()
            .chain(cu_of_hom(&psi).atoms())
            .copied()
            .collect();
        let expect = RankMeasure::new(&r, merged, 5).unwrap();
        assert!(cu_sum.multiset_eq(&expect, 0.0));

        assert!(matches!(
            FinDimHom::new(&r, vec![(cx(0.0, 0.0), 2)], 4),
            Err(Error::NotUnital { mass: 2, n: 4 })
        ));
    }

    #[test]
    fn eigencount_oracle_for_cu_of_hom() {
        // rank of f_O(x_φ) = eval_indicator(Cu(φ), O) for sampled O
        let r = segment(21);
        let phi = FinDimHom::new(
            &r,
            vec![(cx(0.1, 0.0), 2), (cx(0.5, 0.0), 1), (cx(0.9, 0.0), 3)],
            6,
        )
        .unwrap();
        let alpha = cu_of_hom(&phi);
        let x = phi.realize().unwrap();
        for &(c, rad) in &[(0.0, 0.3), (0.4, 0.3), (0.5, 0.45), (0.0, 1.5)] {
            let o = OpenSet::ball(&r, cx(c, 0.0), rad).unwrap();
            let oc = o.clone();
            let peak = SampledFn::new("peak", 1.0, move |z| Some(cx(oc.peak_at(z), 0.0)));
            let fx = x.functional_calculus(&peak).unwrap();
            let rank = fx.eigenvalues().iter().filter(|l| l.norm() > 1e-12).count() as u64;
            assert_eq!(rank, alpha.eval_indicator(&o), "ball ({c}, {rad})");
        }
    }

    #[test]
    fn cu_of_normal_diagonal() {
        let r = segment(11);
        let x = NormalMatrix::diagonal(&[cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        let alpha = cu_of_normal(&x, &r).unwrap();
        assert_eq!(alpha.total_mass(), 3);
        assert_eq!(alpha.atoms().len(), 2);
        assert_eq!(alpha.atoms()[0].weight, 2);
        assert!((alpha.atoms()[0].location - cx(0.0, 0.0)).norm() < 1e-12);
        assert_eq!(alpha.atoms()[1].weight, 1);
    }

    #[test]
    fn cu_of_normal_is_conjugation_invariant() {
        let r = segment(11);
        let x = NormalMatrix::diagonal(&[cx(0.2, 0.0), cx(0.2, 0.0), cx(0.7, 0.0), cx(1.0, 0.0)])
            .unwrap();
        // deterministic small unitary: 2×2 rotations embedded
        let c = 0.6f64;
        let s = 0.8f64;
        let mut u = CMat::identity(4, 4);
        u[(0, 0)] = cx(c, 0.0);
        u[(0, 2)] = cx(-s, 0.0);
        u[(2, 0)] = cx(s, 0.0);
        u[(2, 2)] = cx(c, 0.0);
        let y = x.conjugate(&u).unwrap();
        let ax = cu_of_normal(&x, &r).unwrap();
        let ay = cu_of_normal(&y, &r).unwrap();
        assert!(ax.multiset_eq(&ay, 1e-9));
        assert_eq!(ay.total_mass(), 4); // mass is always n
    }

    #[test]
    fn cu_of_normal_rejects_offgrid_spectrum() {
        let r = segment(11);
        let x = NormalMatrix::diagonal(&[cx(0.5, 3.0)]).unwrap();
        assert!(matches!(cu_of_normal(&x, &r), Err(Error::OutsideRegion { .. })));
    }

    #[test]
    fn realize_then_recover() {
        let r = segment(11);
        let phi = FinDimHom::new(&r, vec![(cx(0.2, 0.0), 2), (cx(0.8, 0.0), 3)], 5).unwrap();
        let x = phi.realize().unwrap();
        let back = cu_of_normal(&x, &r).unwrap();
        assert!(back.multiset_eq(&cu_of_hom(&phi), 1e-9));
    }
}
