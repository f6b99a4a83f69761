//! Geometry of the compact domain Ω ⊂ ℂ: sample grids, open sets,
//! thickenings, and distances.
//!
//! The continuous Ω is modeled by a dense finite grid with covering radius
//! `h`; every set-theoretic quantity is computed on the grid (plus the atom
//! locations carried by measures), and downstream tolerances budget an O(h)
//! discretization term.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Total lexicographic order on ℂ, used for canonical sorting everywhere.
pub fn lex_cmp(a: Complex64, b: Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Tolerance for "within h of the grid" checks (relative slack for float
/// round-off only; not a semantic loosening).
pub(crate) fn h_slack(h: f64) -> f64 {
    h * (1.0 + 1e-9) + 1e-12
}

/// A compact Ω ⊂ ℂ as a finite sample grid with resolution `h`.
///
/// `h` is the covering radius: every point of the intended Ω lies within
/// `h` of some grid point. Immutable after construction.
pub struct Region {
    points: Vec<Complex64>,
    h: f64,
    diameter: f64,
    neighbors: OnceLock<Vec<Vec<u32>>>,
}

impl Region {
    /// Validates and builds a region. Points must be nonempty, finite, and
    /// pairwise distinct; `h` must be positive.
    pub fn new(points: Vec<Complex64>, h: f64) -> Result<Arc<Region>> {
        if points.is_empty() {
            return Err(Error::InvalidRegion("empty grid".into()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidRegion(format!("resolution h = {h} must be positive")));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidRegion("non-finite grid point".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| lex_cmp(points[i], points[j]));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(Error::InvalidRegion(format!(
                    "duplicate grid point ({}, {})",
                    points[w[0]].re,
                    points[w[0]].im
                )));
            }
        }
        let mut diameter = 0.0f64;
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                diameter = diameter.max((points[i] - points[j]).norm());
            }
        }
        Ok(Arc::new(Region { points, h, diameter, neighbors: OnceLock::new() }))
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a constructed region is never empty
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Distance from an arbitrary point to the grid.
    pub fn dist_to_grid(&self, z: Complex64) -> f64 {
        self.points.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Index of the nearest grid point (ties broken by smallest index).
    pub fn nearest_index(&self, z: Complex64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Whether `z` lies within the resolution `h` of the grid (with float
    /// round-off slack).
    pub fn admits(&self, z: Complex64) -> bool {
        self.dist_to_grid(z) <= h_slack(self.h)
    }

    /// Grid points within one grid step (2h) of point `i`, excluding `i`.
    ///
    /// This is the neighborhood used by the way-below proxy: on a square
    /// lattice with covering radius h, 2h reaches all 8-connected neighbors.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        let lists = self.neighbors.get_or_init(|| {
            let rad = 2.0 * self.h * (1.0 + 1e-9);
            let n = self.points.len();
            let mut lists = vec![Vec::new(); n];
            for a in 0..n {
                for b in (a + 1)..n {
                    if (self.points[a] - self.points[b]).norm() <= rad {
                        lists[a].push(b as u32);
                        lists[b].push(a as u32);
                    }
                }
            }
            lists
        });
        &lists[i]
    }

    /// Greedy farthest-point net: returns centers such that every grid point
    /// lies strictly within `radius` of some center. `seeds` are adopted as
    /// centers first (deduplicated, in lexicographic order); if none are
    /// given the first grid point seeds the net. Deterministic.
    pub fn delta_net(&self, radius: f64, seeds: &[Complex64]) -> Vec<Complex64> {
        assert!(radius > 0.0, "net radius must be positive");
        let mut centers: Vec<Complex64> = seeds.to_vec();
        centers.sort_by(|a, b| lex_cmp(*a, *b));
        centers.dedup();
        if centers.is_empty() {
            centers.push(self.points[0]);
        }
        let mut dist: Vec<f64> = self
            .points
            .iter()
            .map(|p| centers.iter().map(|c| (p - c).norm()).fold(f64::INFINITY, f64::min))
            .collect();
        loop {
            let mut imax = 0usize;
            let mut dmax = -1.0f64;
            for (i, &d) in dist.iter().enumerate() {
                if d > dmax {
                    dmax = d;
                    imax = i;
                }
            }
            if dmax < radius {
                break;
            }
            let c = self.points[imax];
            centers.push(c);
            for (i, d) in dist.iter_mut().enumerate() {
                *d = d.min((self.points[i] - c).norm());
            }
        }
        centers
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("points", &self.points.len())
            .field("h", &self.h)
            .field("diameter", &self.diameter)
            .finish()
    }
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h && self.points == other.points
    }
}

/// Whether two region handles denote the same region (pointer fast path,
/// then value equality so deserialized copies compare equal).
pub fn same_region(a: &Arc<Region>, b: &Arc<Region>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An open ball B(center, radius) with strict membership.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Complex64,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }

    pub fn dist_to(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).max(0.0)
    }
}

/// Carving data shared by the sets of one almost-δ-cover over a subdomain
/// Ω' (a ball union): the ring balls B(x_k, s_k) in carve order, the
/// half-width η of the excluded closed annular bands around each ring
/// radius, and the domain balls. A carved set is
/// Ω' ∩ B(x_k, s_k) ∖ (bands ∪ earlier rings).
pub(crate) struct CarveGeometry {
    pub rings: Vec<(Complex64, f64)>,
    pub eta: f64,
    pub domain: Vec<Ball>,
}

impl CarveGeometry {
    pub fn in_domain(&self, z: Complex64) -> bool {
        self.domain.iter().any(|b| b.contains(z))
    }

    /// Inside the closed band |dist(z, x_k) − s_k| ≤ η of some ring.
    pub fn in_band(&self, z: Complex64) -> bool {
        self.rings.iter().any(|&(c, s)| ((z - c).norm() - s).abs() <= self.eta)
    }

    /// First ring ball strictly containing z, if any (the carve rule: a point
    /// belongs to the set of the first ball that reaches it).
    pub fn first_ring(&self, z: Complex64) -> Option<usize> {
        self.rings.iter().position(|&(c, s)| (z - c).norm() < s)
    }

    fn carved_contains(&self, z: Complex64, ring: usize) -> bool {
        self.in_domain(z) && !self.in_band(z) && self.first_ring(z) == Some(ring)
    }

    fn union_contains(&self, z: Complex64) -> bool {
        self.in_domain(z) && !self.in_band(z) && self.first_ring(z).is_some()
    }
}

#[derive(Clone)]
enum SetKind {
    Empty,
    /// Union of open balls; membership and point-to-set distance are exact.
    Balls(Vec<Ball>),
    /// Open annulus {z : mid − hw < |z − center| < mid + hw}; exact distance.
    Annulus { center: Complex64, mid: f64, half_width: f64 },
    /// One carved set of an almost-δ-cover.
    Carved { geom: Arc<CarveGeometry>, ring: usize },
    /// The union U = O₁ ∪ … ∪ O_N of a carve family.
    CarvedUnion { geom: Arc<CarveGeometry> },
    /// {z : dist(z, base) < r}; distance to non-ball bases is evaluated
    /// through the base's tracked grid points (containment tested first, so
    /// points of the base itself are always included).
    Thickened { base: Box<OpenSet>, r: f64 },
    Intersection { parts: Vec<OpenSet> },
    /// Ω ∖ closure(base) at tracked resolution: outside the base and at
    /// positive tracked distance from it.
    ExteriorOfClosure { base: Box<OpenSet> },
}

/// An open subset of Ω. Ball unions and annuli carry exact membership and
/// distance; carved cover sets and their thickenings fall back to the
/// region's tracked grid points for distances. Immutable after construction;
/// the grid membership list is materialized lazily.
pub struct OpenSet {
    region: Arc<Region>,
    kind: SetKind,
    members: OnceLock<Vec<u32>>,
}

impl Clone for OpenSet {
    fn clone(&self) -> Self {
        let members = OnceLock::new();
        if let Some(m) = self.members.get() {
            let _ = members.set(m.clone());
        }
        OpenSet { region: self.region.clone(), kind: self.kind.clone(), members }
    }
}

impl fmt::Debug for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.kind {
            SetKind::Empty => "Empty",
            SetKind::Balls(_) => "Balls",
            SetKind::Annulus { .. } => "Annulus",
            SetKind::Carved { .. } => "Carved",
            SetKind::CarvedUnion { .. } => "CarvedUnion",
            SetKind::Thickened { .. } => "Thickened",
            SetKind::Intersection { .. } => "Intersection",
            SetKind::ExteriorOfClosure { .. } => "ExteriorOfClosure",
        };
        write!(f, "OpenSet::{name}")
    }
}

impl OpenSet {
    pub fn empty(region: &Arc<Region>) -> OpenSet {
        OpenSet { region: region.clone(), kind: SetKind::Empty, members: OnceLock::new() }
    }

    /// Union of open balls; an empty list denotes the empty set.
    pub fn from_balls(region: &Arc<Region>, balls: Vec<Ball>) -> Result<OpenSet> {
        for b in &balls {
            if !(b.radius > 0.0) || !b.radius.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "ball radius {} must be positive",
                    b.radius
                )));
            }
            if !b.center.re.is_finite() || !b.center.im.is_finite() {
                return Err(Error::InvalidParameter("non-finite ball center".into()));
            }
        }
        let kind = if balls.is_empty() { SetKind::Empty } else { SetKind::Balls(balls) };
        Ok(OpenSet { region: region.clone(), kind, members: OnceLock::new() })
    }

    pub fn ball(region: &Arc<Region>, center: Complex64, radius: f64) -> Result<OpenSet> {
        Self::from_balls(region, vec![Ball { center, radius }])
    }

    /// An open ball containing the whole region (and its h-fringe).
    pub fn whole(region: &Arc<Region>) -> OpenSet {
        let n = region.len() as f64;
        let centroid = region.points().iter().sum::<Complex64>() / n;
        let reach = region
            .points()
            .iter()
            .map(|p| (p - centroid).norm())
            .fold(0.0f64, f64::max);
        let radius = reach + region.h() + 1.0;
        OpenSet {
            region: region.clone(),
            kind: SetKind::Balls(vec![Ball { center: centroid, radius }]),
            members: OnceLock::new(),
        }
    }

    /// The open annulus {y : s − ε < |y − x| < s + ε}.
    pub fn annulus(region: &Arc<Region>, x: Complex64, s: f64, eps: f64) -> Result<OpenSet> {
        if !(s > 0.0) || !(eps > 0.0) || eps >= s {
            return Err(Error::InvalidParameter(format!(
                "annulus requires 0 < eps < s, got s = {s}, eps = {eps}"
            )));
        }
        Ok(OpenSet {
            region: region.clone(),
            kind: SetKind::Annulus { center: x, mid: s, half_width: eps },
            members: OnceLock::new(),
        })
    }

    pub(crate) fn carved(region: &Arc<Region>, geom: &Arc<CarveGeometry>, ring: usize) -> OpenSet {
        OpenSet {
            region: region.clone(),
            kind: SetKind::Carved { geom: geom.clone(), ring },
            members: OnceLock::new(),
        }
    }

    pub(crate) fn carved_union(region: &Arc<Region>, geom: &Arc<CarveGeometry>) -> OpenSet {
        OpenSet {
            region: region.clone(),
            kind: SetKind::CarvedUnion { geom: geom.clone() },
            members: OnceLock::new(),
        }
    }

    /// Pointwise intersection of sets over one region.
    pub fn intersection(parts: Vec<OpenSet>) -> OpenSet {
        assert!(!parts.is_empty(), "intersection of an empty list");
        let region = parts[0].region.clone();
        assert!(
            parts.iter().all(|p| same_region(&p.region, &region)),
            "intersection across regions"
        );
        OpenSet { region, kind: SetKind::Intersection { parts }, members: OnceLock::new() }
    }

    /// Ω ∖ closure(self), at tracked resolution.
    pub fn exterior_of_closure(&self) -> OpenSet {
        OpenSet {
            region: self.region.clone(),
            kind: SetKind::ExteriorOfClosure { base: Box::new(self.clone()) },
            members: OnceLock::new(),
        }
    }

    pub fn region(&self) -> &Arc<Region> {
        &self.region
    }

    /// Strict membership of an arbitrary point of ℂ.
    pub fn contains(&self, z: Complex64) -> bool {
        match &self.kind {
            SetKind::Empty => false,
            SetKind::Balls(balls) => balls.iter().any(|b| b.contains(z)),
            SetKind::Annulus { center, mid, half_width } => {
                let d = (z - center).norm();
                mid - half_width < d && d < mid + half_width
            }
            SetKind::Carved { geom, ring } => geom.carved_contains(z, *ring),
            SetKind::CarvedUnion { geom } => geom.union_contains(z),
            SetKind::Thickened { base, r } => base.within_dist(z, *r),
            SetKind::Intersection { parts } => parts.iter().all(|p| p.contains(z)),
            SetKind::ExteriorOfClosure { base } => !base.contains(z) && base.dist_to(z) > 0.0,
        }
    }

    /// Distance from `z` to the set: exact for ball unions and annuli, via
    /// tracked grid points otherwise (an overestimate, never an
    /// underestimate, for non-members; exactly 0 for members).
    pub fn dist_to(&self, z: Complex64) -> f64 {
        match &self.kind {
            SetKind::Empty => f64::INFINITY,
            SetKind::Balls(balls) => {
                balls.iter().map(|b| b.dist_to(z)).fold(f64::INFINITY, f64::min)
            }
            SetKind::Annulus { center, mid, half_width } => {
                let d = (z - center).norm();
                if d >= mid + half_width {
                    d - (mid + half_width)
                } else if d <= mid - half_width {
                    (mid - half_width) - d
                } else {
                    0.0
                }
            }
            _ => {
                if self.contains(z) {
                    return 0.0;
                }
                let pts = self.region.points();
                self.members()
                    .iter()
                    .map(|&i| (z - pts[i as usize]).norm())
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// dist(z, self) < r, with early exit on the tracked scan.
    pub fn within_dist(&self, z: Complex64, r: f64) -> bool {
        match &self.kind {
            SetKind::Empty => false,
            SetKind::Balls(_) | SetKind::Annulus { .. } => self.dist_to(z) < r,
            _ => {
                if self.contains(z) {
                    return true;
                }
                let pts = self.region.points();
                self.members().iter().any(|&i| (z - pts[i as usize]).norm() < r)
            }
        }
    }

    /// The r-thickening O_r = {z : dist(z, O) < r}. Exact for ball unions
    /// (radii grow by r) and annuli (half-width grows by r); other shapes
    /// wrap the tracked-distance predicate. r = 0 returns the set unchanged.
    pub fn thicken(&self, r: f64) -> OpenSet {
        assert!(r >= 0.0 && r.is_finite(), "thickening radius must be nonnegative");
        if r == 0.0 {
            return self.clone();
        }
        let kind = match &self.kind {
            SetKind::Empty => SetKind::Empty,
            SetKind::Balls(balls) => SetKind::Balls(
                balls
                    .iter()
                    .map(|b| Ball { center: b.center, radius: b.radius + r })
                    .collect(),
            ),
            SetKind::Annulus { center, mid, half_width } => {
                SetKind::Annulus { center: *center, mid: *mid, half_width: half_width + r }
            }
            _ => SetKind::Thickened { base: Box::new(self.clone()), r },
        };
        OpenSet { region: self.region.clone(), kind, members: OnceLock::new() }
    }

    /// The ball list when this set is a plain ball union.
    pub fn balls(&self) -> Option<&[Ball]> {
        match &self.kind {
            SetKind::Balls(balls) => Some(balls),
            _ => None,
        }
    }

    /// Install a precomputed grid-membership list (cover construction
    /// computes all sets' members in one sweep). No-op if already present.
    pub(crate) fn seed_members(&self, members: Vec<u32>) {
        let _ = self.members.set(members);
    }

    /// Sorted indices of grid points strictly inside the set (lazy).
    pub fn members(&self) -> &[u32] {
        self.members.get_or_init(|| {
            self.region
                .points()
                .iter()
                .enumerate()
                .filter(|(_, p)| self.contains(**p))
                .map(|(i, _)| i as u32)
                .collect()
        })
    }

    /// The peak function f_O(x) = min{1, dist(x, Ω∖O)} for x ∈ O, else 0.
    /// dist(x, Ω∖O) is taken over grid points outside O (error ≤ h); if no
    /// grid point lies outside, the distance is treated as ∞.
    pub fn peak_at(&self, x: Complex64) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        let members = self.members();
        let pts = self.region.points();
        let mut next = 0usize; // walk the sorted member list alongside indices
        let mut dist = f64::INFINITY;
        for i in 0..pts.len() {
            if next < members.len() && members[next] as usize == i {
                next += 1;
                continue;
            }
            dist = dist.min((x - pts[i]).norm());
        }
        dist.min(1.0)
    }

    /// Max pairwise distance over tracked points of the set plus the given
    /// extra points (atoms); 0 for fewer than two points.
    pub fn tracked_diameter(&self, extra: &[Complex64]) -> f64 {
        let pts = self.region.points();
        let mut all: Vec<Complex64> =
            self.members().iter().map(|&i| pts[i as usize]).collect();
        all.extend_from_slice(extra);
        let mut d = 0.0f64;
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                d = d.max((all[i] - all[j]).norm());
            }
        }
        d
    }
}
