//! JSON wire formats.
//!
//! * region   `{ "points": [[re,im],…], "h": real }`
//! * ball     `{ "c": [re,im], "r": real }`
//! * lsc      sparse `{ "<point-index>": value }`, value a non-negative
//!   integer or the string `"inf"`; omitted indices are 0
//! * morphism `{ "n": int, "atoms": [{ "z": [re,im], "m": int }, …] }`
//! * matrix   `{ "n": int, "re": [[..]], "im": [[..]] }` row-major
//! * lift     `{ "pairs": [{ "z": [re,im], "m": int }, …], "bound": real,
//!   "delta": real }`

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::LiftOutcome;
use crate::lsc::{LscFn, Nat};
use crate::matrix::{CMat, NormalMatrix};
use crate::morphism::{Atom, FinDimHom, RankMeasure};
use crate::region::{Ball, Region};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionDoc {
    pub points: Vec<[f64; 2]>,
    pub h: f64,
}

impl RegionDoc {
    pub fn from_region(region: &Region) -> RegionDoc {
        RegionDoc {
            points: region.points().iter().map(|p| [p.re, p.im]).collect(),
            h: region.h(),
        }
    }

    pub fn into_region(self) -> Result<Arc<Region>> {
        let pts = self.points.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Region::new(pts, self.h)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallDoc {
    pub c: [f64; 2],
    pub r: f64,
}

impl BallDoc {
    pub fn from_ball(b: &Ball) -> BallDoc {
        BallDoc { c: [b.center.re, b.center.im], r: b.radius }
    }

    pub fn into_ball(self) -> Ball {
        Ball { center: Complex64::new(self.c[0], self.c[1]), radius: self.r }
    }
}

/// A sparse lsc value: finite rank or "inf".
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NatDoc {
    Finite(u64),
    Symbol(String),
}

impl NatDoc {
    fn into_nat(self) -> Result<Nat> {
        match self {
            NatDoc::Finite(k) => Ok(Nat::Fin(k)),
            NatDoc::Symbol(s) if s == "inf" => Ok(Nat::Inf),
            NatDoc::Symbol(s) => {
                Err(Error::InvalidParameter(format!("lsc value must be an integer or \"inf\", got {s:?}")))
            }
        }
    }
}

/// Sparse lsc document keyed by grid-point index.
pub type LscDoc = BTreeMap<String, NatDoc>;

pub fn lsc_to_doc(f: &LscFn) -> LscDoc {
    let mut doc = LscDoc::new();
    for (i, v) in f.values().iter().enumerate() {
        match v {
            Nat::Fin(0) => {}
            Nat::Fin(k) => {
                doc.insert(i.to_string(), NatDoc::Finite(*k));
            }
            Nat::Inf => {
                doc.insert(i.to_string(), NatDoc::Symbol("inf".into()));
            }
        }
    }
    doc
}

pub fn lsc_from_doc(doc: LscDoc, region: &Arc<Region>) -> Result<LscFn> {
    let mut values = vec![Nat::Fin(0); region.len()];
    for (key, v) in doc {
        let idx: usize = key
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("lsc key {key:?} is not a point index")))?;
        if idx >= region.len() {
            return Err(Error::InvalidParameter(format!(
                "lsc index {idx} out of range for a {}-point region",
                region.len()
            )));
        }
        values[idx] = v.into_nat()?;
    }
    LscFn::from_values(region, values)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomDoc {
    pub z: [f64; 2],
    pub m: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub n: u32,
    pub atoms: Vec<AtomDoc>,
}

impl MorphismDoc {
    pub fn from_measure(alpha: &RankMeasure) -> MorphismDoc {
        MorphismDoc {
            n: alpha.target_dim(),
            atoms: alpha
                .atoms()
                .iter()
                .map(|a| AtomDoc { z: [a.location.re, a.location.im], m: a.weight })
                .collect(),
        }
    }

    pub fn into_measure(self, region: &Arc<Region>) -> Result<RankMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { location: Complex64::new(a.z[0], a.z[1]), weight: a.m })
            .collect();
        RankMeasure::new(region, atoms, self.n)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_matrix(x: &CMat) -> MatrixDoc {
        let n = x.nrows();
        let row = |part: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|i| (0..n).map(|j| part(&x[(i, j)])).collect()).collect()
        };
        MatrixDoc { n, re: row(|z| z.re), im: row(|z| z.im) }
    }

    pub fn into_matrix(self) -> Result<CMat> {
        let n = self.n;
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::InvalidParameter("matrix row count does not match n".into()));
        }
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            if self.re[i].len() != n || self.im[i].len() != n {
                return Err(Error::InvalidParameter(format!("matrix row {i} has wrong length")));
            }
            for j in 0..n {
                m[(i, j)] = Complex64::new(self.re[i][j], self.im[i][j]);
            }
        }
        Ok(m)
    }

    pub fn into_normal(self) -> Result<NormalMatrix> {
        NormalMatrix::new(self.into_matrix()?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftDoc {
    pub pairs: Vec<AtomDoc>,
    pub bound: f64,
    pub delta: f64,
}

impl LiftDoc {
    pub fn from_outcome(out: &LiftOutcome) -> LiftDoc {
        LiftDoc {
            pairs: out
                .hom
                .pairs()
                .iter()
                .map(|&(z, m)| AtomDoc { z: [z.re, z.im], m })
                .collect(),
            bound: out.bound,
            delta: out.delta,
        }
    }

    pub fn into_hom(self, region: &Arc<Region>, n: u32) -> Result<FinDimHom> {
        let pairs = self
            .pairs
            .iter()
            .map(|a| (Complex64::new(a.z[0], a.z[1]), a.m))
            .collect();
        FinDimHom::new(region, pairs, n)
    }
}
