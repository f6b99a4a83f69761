//! The semigroup Lsc(Ω, ℕ̄) ≅ Cu(C(Ω)): ℕ̄-valued functions on the grid with
//! pointwise order, addition, suprema, and a way-below relation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::region::{same_region, OpenSet, Region};

/// A value in ℕ̄ = ℕ ∪ {∞}. `Fin(_) < Inf` and `Fin` orders by value, so the
/// derived `Ord` is the semigroup order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Nat {
    Fin(u64),
    Inf,
}

impl Nat {
    pub fn is_finite(self) -> bool {
        matches!(self, Nat::Fin(_))
    }

    /// Addition with ∞ absorbing.
    pub fn add(self, other: Nat) -> Nat {
        match (self, other) {
            (Nat::Fin(a), Nat::Fin(b)) => Nat::Fin(a + b),
            _ => Nat::Inf,
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Nat::Fin(v) => Some(v),
            Nat::Inf => None,
        }
    }
}

impl std::fmt::Display for Nat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Nat::Fin(v) => write!(f, "{v}"),
            Nat::Inf => write!(f, "inf"),
        }
    }
}

/// An element of Lsc(Ω, ℕ̄), stored as its full value vector over the grid.
/// On a finite grid every function is lower semicontinuous; the order-theoretic
/// structure (way-below) is what carries the topology.
#[derive(Clone, Debug)]
pub struct LscFn {
    region: Arc<Region>,
    values: Vec<Nat>,
}

impl LscFn {
    pub fn zero(region: &Arc<Region>) -> LscFn {
        LscFn { region: region.clone(), values: vec![Nat::Fin(0); region.len()] }
    }

    pub fn constant(region: &Arc<Region>, v: Nat) -> LscFn {
        LscFn { region: region.clone(), values: vec![v; region.len()] }
    }

    pub fn from_values(region: &Arc<Region>, values: Vec<Nat>) -> Result<LscFn> {
        if values.len() != region.len() {
            return Err(Error::LengthMismatch(values.len(), region.len()));
        }
        Ok(LscFn { region: region.clone(), values })
    }

    /// The class 𝟙_O: value 1 on grid points of O, 0 elsewhere.
    pub fn indicator(o: &OpenSet) -> LscFn {
        let region = o.region().clone();
        let mut values = vec![Nat::Fin(0); region.len()];
        for &i in o.members() {
            values[i as usize] = Nat::Fin(1);
        }
        LscFn { region, values }
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    pub fn values(&self) -> &[Nat] {
        &self.values
    }

    pub fn value_at(&self, grid_index: usize) -> Nat {
        self.values[grid_index]
    }

    /// Value at an arbitrary point, read off the nearest grid point.
    pub fn value_near(&self, z: num_complex::Complex64) -> Nat {
        self.values[self.region.nearest_index(z)]
    }

    fn check_region(&self, other: &LscFn) -> Result<()> {
        if same_region(&self.region, &other.region) {
            Ok(())
        } else {
            Err(Error::RegionMismatch)
        }
    }

    /// Pointwise sum, ∞ absorbing.
    pub fn add(&self, other: &LscFn) -> Result<LscFn> {
        self.check_region(other)?;
        let values =
            self.values.iter().zip(&other.values).map(|(a, b)| a.add(*b)).collect();
        Ok(LscFn { region: self.region.clone(), values })
    }

    /// k·f for a finite scalar.
    pub fn times(&self, k: u64) -> LscFn {
        let values = self
            .values
            .iter()
            .map(|v| match v {
                Nat::Fin(a) => {
                    if k == 0 {
                        Nat::Fin(0)
                    } else {
                        Nat::Fin(a * k)
                    }
                }
                Nat::Inf => {
                    if k == 0 {
                        Nat::Fin(0)
                    } else {
                        Nat::Inf
                    }
                }
            })
            .collect();
        LscFn { region: self.region.clone(), values }
    }

    /// Pointwise order f ≤ g.
    pub fn leq(&self, other: &LscFn) -> Result<bool> {
        self.check_region(other)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    /// Pointwise supremum (the sup of {f, g}; chains reduce to folds of this).
    pub fn sup(&self, other: &LscFn) -> Result<LscFn> {
        self.check_region(other)?;
        let values =
            self.values.iter().zip(&other.values).map(|(a, b)| (*a).max(*b)).collect();
        Ok(LscFn { region: self.region.clone(), values })
    }

    /// Largest finite value taken by f, or None if f takes the value ∞.
    pub fn max_finite(&self) -> Option<u64> {
        let mut m = 0u64;
        for v in &self.values {
            match v {
                Nat::Fin(a) => m = m.max(*a),
                Nat::Inf => return None,
            }
        }
        Some(m)
    }

    /// Grid indices of the level set {f ≥ k}.
    pub fn level_set(&self, k: u64) -> Vec<u32> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v >= Nat::Fin(k))
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Way-below (compact containment) proxy: f ≪ g iff f is finite-valued
    /// and for every level k ≥ 1 the one-grid-step neighborhood of {f ≥ k}
    /// is contained in {g ≥ k}.
    pub fn way_below(&self, other: &LscFn) -> Result<bool> {
        self.check_region(other)?;
        let top = match self.max_finite() {
            Some(m) => m,
            None => return Ok(false),
        };
        for k in 1..=top {
            let lvl = Nat::Fin(k);
            for (i, v) in self.values.iter().enumerate() {
                if *v < lvl {
                    continue;
                }
                if other.values[i] < lvl {
                    return Ok(false);
                }
                for &j in self.region.neighbors(i) {
                    if other.values[j as usize] < lvl {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// f on V, zero outside: h|_V.
    pub fn restrict(&self, v: &OpenSet) -> Result<LscFn> {
        if !same_region(&self.region, v.region()) {
            return Err(Error::RegionMismatch);
        }
        let mut values = vec![Nat::Fin(0); self.region.len()];
        for &i in v.members() {
            values[i as usize] = self.values[i as usize];
        }
        Ok(LscFn { region: self.region.clone(), values })
    }
}

impl PartialEq for LscFn {
    fn eq(&self, other: &Self) -> bool {
        same_region(&self.region, &other.region) && self.values == other.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{OpenSet, Region};
    use num_complex::Complex64;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn segment(n: usize) -> Arc<Region> {
        let step = 1.0 / (n as f64 - 1.0);
        let pts = (0..n).map(|i| cx(i as f64 * step, 0.0)).collect();
        Region::new(pts, step / 2.0).unwrap()
    }

    #[test]
    fn indicator_extremes() {
        let r = segment(21);
        let zero = LscFn::indicator(&OpenSet::empty(&r));
        assert_eq!(zero, LscFn::zero(&r));
        let one = LscFn::indicator(&OpenSet::whole(&r));
        assert_eq!(one, LscFn::constant(&r, Nat::Fin(1)));
    }

    #[test]
    fn indicator_sum_marks_intersection() {
        let r = segment(21);
        let o1 = OpenSet::ball(&r, cx(0.3, 0.0), 0.3).unwrap();
        let o2 = OpenSet::ball(&r, cx(0.5, 0.0), 0.3).unwrap();
        let s = LscFn::indicator(&o1).add(&LscFn::indicator(&o2)).unwrap();
        for (i, p) in r.points().iter().enumerate() {
            let expect = match (o1.contains(*p), o2.contains(*p)) {
                (true, true) => 2,
                (true, false) | (false, true) => 1,
                (false, false) => 0,
            };
            assert_eq!(s.value_at(i), Nat::Fin(expect));
        }
    }

    #[test]
    fn add_zero_and_positivity() {
        let r = segment(11);
        let f = LscFn::indicator(&OpenSet::ball(&r, cx(0.2, 0.0), 0.4).unwrap());
        let g = LscFn::indicator(&OpenSet::ball(&r, cx(0.7, 0.0), 0.2).unwrap());
        assert_eq!(f.add(&LscFn::zero(&r)).unwrap(), f);
        assert!(f.leq(&f.add(&g).unwrap()).unwrap());
    }

    #[test]
    fn region_mismatch_rejected() {
        let r1 = segment(11);
        let r2 = segment(13);
        let f = LscFn::zero(&r1);
        let g = LscFn::zero(&r2);
        assert!(matches!(f.add(&g), Err(Error::RegionMismatch)));
        assert!(matches!(f.leq(&g), Err(Error::RegionMismatch)));
    }

    #[test]
    fn inf_is_absorbing() {
        let r = segment(5);
        let inf = LscFn::constant(&r, Nat::Inf);
        let f = LscFn::constant(&r, Nat::Fin(3));
        assert_eq!(f.add(&inf).unwrap(), inf);
        assert!(f.leq(&inf).unwrap());
        assert!(!inf.leq(&f).unwrap());
    }

    #[test]
    fn way_below_on_nested_balls() {
        // grid h = 0.025 < 0.05, so the 2h-step from B(0,0.4) stays in B(0,0.5)
        let r = segment(41);
        let inner = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.4).unwrap());
        let outer = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.5).unwrap());
        assert!(inner.way_below(&outer).unwrap());
        assert!(!outer.way_below(&inner).unwrap());
    }

    #[test]
    fn way_below_is_irreflexive_at_boundaries() {
        let r = segment(41);
        let f = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.4).unwrap());
        // the neighborhood of the boundary grid point escapes the set
        assert!(!f.way_below(&f).unwrap());
    }

    #[test]
    fn way_below_zero_and_inf() {
        let r = segment(11);
        let zero = LscFn::zero(&r);
        let g = LscFn::constant(&r, Nat::Fin(7));
        assert!(zero.way_below(&g).unwrap());
        assert!(zero.way_below(&zero).unwrap());
        let inf = LscFn::constant(&r, Nat::Inf);
        assert!(!inf.way_below(&inf).unwrap()); // not finite-valued
        // whole-region constants: no boundary to escape, so k ≪ k+1 holds
        let k3 = LscFn::constant(&r, Nat::Fin(3));
        let k4 = LscFn::constant(&r, Nat::Fin(4));
        assert!(k3.way_below(&k4).unwrap());
        assert!(k3.way_below(&k3).unwrap());
    }

    #[test]
    fn way_below_transports_along_leq() {
        let r = segment(41);
        let f = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.3).unwrap());
        let g = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.4).unwrap());
        let h = LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.5).unwrap());
        assert!(f.way_below(&g).unwrap());
        assert!(g.leq(&h).unwrap());
        assert!(f.way_below(&h).unwrap());
    }

    #[test]
    fn restrict_cases() {
        let r = segment(21);
        let o = OpenSet::ball(&r, cx(0.4, 0.0), 0.3).unwrap();
        let f = LscFn::indicator(&o).times(3);
        assert_eq!(f.restrict(&OpenSet::whole(&r)).unwrap(), f);
        assert_eq!(f.restrict(&OpenSet::empty(&r)).unwrap(), LscFn::zero(&r));
        // disjoint split reassembles
        let v = OpenSet::ball(&r, cx(0.1, 0.0), 0.15).unwrap();
        let w = OpenSet::ball(&r, cx(0.8, 0.0), 0.15).unwrap();
        let vw = OpenSet::from_balls(
            &r,
            vec![
                crate::region::Ball { center: cx(0.1, 0.0), radius: 0.15 },
                crate::region::Ball { center: cx(0.8, 0.0), radius: 0.15 },
            ],
        )
        .unwrap();
        let g = LscFn::constant(&r, Nat::Fin(2));
        let lhs = g.restrict(&v).unwrap().add(&g.restrict(&w).unwrap()).unwrap();
        let rhs = g.restrict(&vw).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn indicator_respects_inclusion() {
        let r = segment(21);
        let small = OpenSet::ball(&r, cx(0.5, 0.0), 0.2).unwrap();
        let big = OpenSet::ball(&r, cx(0.5, 0.0), 0.4).unwrap();
        assert!(LscFn::indicator(&small).leq(&LscFn::indicator(&big)).unwrap());
    }

    #[test]
    fn sup_of_increasing_chain_is_pointwise() {
        let r = segment(21);
        let chain: Vec<LscFn> = (1..=4)
            .map(|k| {
                LscFn::indicator(&OpenSet::ball(&r, cx(0.0, 0.0), 0.2 * k as f64).unwrap())
            })
            .collect();
        let mut s = chain[0].clone();
        for f in &chain[1..] {
            s = s.sup(f).unwrap();
        }
        assert_eq!(s, chain[3]); // increasing chain: sup is the last element
        // addition preserves suprema: (sup f_k) + g = sup (f_k + g)
        let g = LscFn::constant(&r, Nat::Fin(1));
        let lhs = s.add(&g).unwrap();
        let mut rhs = chain[0].add(&g).unwrap();
        for f in &chain[1..] {
            rhs = rhs.sup(&f.add(&g).unwrap()).unwrap();
        }
        assert_eq!(lhs, rhs);
    }
}
