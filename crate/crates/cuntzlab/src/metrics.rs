//! The metrics d_Cu, d_W and the d_U bracket.
//!
//! d_Cu on atom measures is computed as a bottleneck matching distance
//! (binary search over candidate thresholds plus bipartite matching); an
//! independent brute-force oracle enumerates the open-set domination
//! condition directly over a finite set family. Hall's theorem is exactly
//! the statement that the two agree.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{hausdorff, operator_norm, CMat, NormalMatrix};
use crate::morphism::{cu_of_normal, RankMeasure};
use crate::region::{same_region, Ball, OpenSet, Region};
use std::sync::Arc;

/// Outcome of a bottleneck computation: the distance, a perfect matching of
/// the weight-expanded atom lists realizing it (empty when value is 0 for
/// empty measures, or ∞), and the thresholds probed by the binary search.
#[derive(Clone, Debug)]
pub struct MatchingResult {
    pub value: f64,
    pub pairing: Vec<(usize, usize)>,
    pub certificate: Vec<f64>,
}

impl MatchingResult {
    fn infinite() -> MatchingResult {
        MatchingResult { value: f64::INFINITY, pairing: Vec::new(), certificate: Vec::new() }
    }
}

/// Kuhn augmenting-path step: try to match left vertex `v`.
fn augment(
    adj: &[Vec<usize>],
    match_right: &mut [Option<usize>],
    seen: &mut [bool],
    v: usize,
) -> bool {
    for &u in &adj[v] {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        if match_right[u].is_none() || augment(adj, match_right, seen, match_right[u].unwrap()) {
            match_right[u] = Some(v);
            return true;
        }
    }
    false
}

/// Perfect matching in the bipartite graph {(i,j) : cost[i][j] ≤ r}, if any.
fn matching_at(cost: &[Vec<f64>], r: f64) -> Option<Vec<(usize, usize)>> {
    let k = cost.len();
    let adj: Vec<Vec<usize>> = cost
        .iter()
        .map(|row| (0..k).filter(|&j| row[j] <= r).collect())
        .collect();
    let mut match_right: Vec<Option<usize>> = vec![None; k];
    for v in 0..k {
        let mut seen = vec![false; k];
        if !augment(&adj, &mut match_right, &mut seen, v) {
            return None;
        }
    }
    let mut pairs: Vec<(usize, usize)> =
        (0..k).map(|j| (match_right[j].unwrap(), j)).collect();
    pairs.sort_unstable();
    Some(pairs)
}

/// Bottleneck assignment on a square cost matrix: the min over perfect
/// matchings of the max matched cost, via binary search on the sorted
/// distinct finite costs. ∞ when no perfect matching avoids an ∞ entry.
pub(crate) fn bottleneck_assignment(cost: &[Vec<f64>]) -> MatchingResult {
    let k = cost.len();
    if k == 0 {
        return MatchingResult { value: 0.0, pairing: Vec::new(), certificate: Vec::new() };
    }
    debug_assert!(cost.iter().all(|row| row.len() == k));
    let mut candidates: Vec<f64> =
        cost.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    if candidates.is_empty() || matching_at(cost, *candidates.last().unwrap()).is_none() {
        return MatchingResult::infinite();
    }
    let mut probed = Vec::new();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        probed.push(candidates[mid]);
        if matching_at(cost, candidates[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    probed.push(candidates[lo]);
    let pairing = matching_at(cost, candidates[lo]).expect("feasible by search invariant");
    MatchingResult { value: candidates[lo], pairing, certificate: probed }
}

fn check_comparable(alpha: &RankMeasure, beta: &RankMeasure) -> Result<()> {
    if !same_region(alpha.region(), beta.region()) {
        return Err(Error::RegionMismatch);
    }
    if alpha.target_dim() != beta.target_dim() {
        return Err(Error::DimensionMismatch(
            alpha.target_dim() as usize,
            beta.target_dim() as usize,
        ));
    }
    Ok(())
}

/// d_Cu(α, β): ∞ if total masses differ (O = Ω forces mass equality),
/// otherwise the bottleneck matching distance between the weight-expanded
/// atom multisets. Pairing indices refer to `expanded()` order.
pub fn d_cu(alpha: &RankMeasure, beta: &RankMeasure) -> Result<MatchingResult> {
    check_comparable(alpha, beta)?;
    if alpha.total_mass() != beta.total_mass() {
        return Ok(MatchingResult::infinite());
    }
    let xs = alpha.expanded();
    let ys = beta.expanded();
    let cost: Vec<Vec<f64>> =
        xs.iter().map(|x| ys.iter().map(|y| (x - y).norm()).collect()).collect();
    Ok(bottleneck_assignment(&cost))
}

/// The candidate thresholds d_cu searches: 0, every cross distance between
/// expanded atoms, and one value safely past the largest (so the brute-force
/// scan always terminates at a passing radius).
pub fn candidate_radii(alpha: &RankMeasure, beta: &RankMeasure) -> Vec<f64> {
    let xs = alpha.expanded();
    let ys = beta.expanded();
    let mut c = vec![0.0f64];
    let mut maxd = 0.0f64;
    for x in &xs {
        for y in &ys {
            let d = (x - y).norm();
            maxd = maxd.max(d);
            c.push(d);
        }
    }
    c.push(maxd + alpha.region().h());
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// Independent oracle for d_Cu: the smallest candidate radius r such that
/// α(𝟙_O) ≤ β(𝟙_{O_r}) and β(𝟙_O) ≤ α(𝟙_{O_r}) for every O in `family`.
/// Never exceeds the matching distance, and equals it when the family
/// contains the Hall certificates of both measures (see [`hall_family`]).
pub fn d_cu_bruteforce(alpha: &RankMeasure, beta: &RankMeasure, family: &[OpenSet]) -> f64 {
    let candidates = candidate_radii(alpha, beta);
    let dominated = |r: f64| {
        family.iter().all(|o| {
            let or = o.thicken(r);
            alpha.eval_indicator(o) <= beta.eval_indicator(&or)
                && beta.eval_indicator(o) <= alpha.eval_indicator(&or)
        })
    };
    // domination is monotone in r, so binary search the candidate list
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    if dominated(candidates[lo]) {
        return candidates[lo];
    }
    debug_assert!(dominated(candidates[hi]), "largest candidate must dominate");
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if dominated(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    candidates[hi]
}

/// The Hall certificate family of a pair of rank measures: for every
/// nonempty subset S of either support, the union of tiny balls around S.
/// Domination of β over the thickened S-neighborhoods is precisely Hall's
/// condition for a bottleneck matching at that radius (single balls are not
/// enough: two atoms sharing one nearby partner is a pair deficiency that
/// only the two-ball union detects), so the brute-force oracle agrees with
/// the matching computation on this family.
pub fn hall_family(alpha: &RankMeasure, beta: &RankMeasure) -> Vec<OpenSet> {
    let region = alpha.region();
    let eps = region.h() * 1e-6;
    let mut family = Vec::new();
    for m in [alpha, beta] {
        let support: Vec<Complex64> = m.atoms().iter().map(|a| a.location).collect();
        assert!(support.len() <= 16, "Hall family is exponential in the support size");
        for mask in 1u32..(1u32 << support.len()) {
            let balls: Vec<Ball> = support
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &c)| Ball { center: c, radius: eps })
                .collect();
            family.push(OpenSet::from_balls(region, balls).expect("positive radii"));
        }
    }
    family
}

/// d_W between normal matrices: d_Cu of their spectral rank measures.
pub fn d_w(x: &NormalMatrix, y: &NormalMatrix, region: &Arc<Region>) -> Result<f64> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch(x.n(), y.n()));
    }
    let a = cu_of_normal(x, region)?;
    let b = cu_of_normal(y, region)?;
    Ok(d_cu(&a, &b)?.value)
}

/// A certified two-sided estimate of d_U(x, y) = inf over unitaries of
/// ‖uxu* − y‖.
#[derive(Debug)]
pub struct DuBracket {
    /// Hausdorff distance of the spectra — a true lower bound, since the
    /// spectrum of a normal matrix moves at most ‖E‖ under a perturbation E.
    pub lower: f64,
    /// Best eigenvalue matching — an upper bound realized by `witness`.
    pub upper: f64,
    pub witness: CMat,
    /// Measured ‖witness·x·witness* − y‖ (≤ upper + 1e−9 by construction).
    pub witness_error: f64,
}

/// Bracket d_U(x, y) between the Hausdorff spectral distance and the best
/// eigenvalue-matching distance, with an explicit witness unitary
/// u = (eigenbasis of y)·(matching permutation)·(eigenbasis of x)*.
pub fn d_u_bracket(x: &NormalMatrix, y: &NormalMatrix) -> Result<DuBracket> {
    let n = x.n();
    if n != y.n() {
        return Err(Error::DimensionMismatch(n, y.n()));
    }
    let lx = x.eigenvalues();
    let ly = y.eigenvalues();
    let cost: Vec<Vec<f64>> =
        lx.iter().map(|a| ly.iter().map(|b| (a - b).norm()).collect()).collect();
    let matching = bottleneck_assignment(&cost);
    let upper = matching.value;
    let lower = hausdorff(lx, ly);

    // permutation P with P[j, i] = 1 for matched pair (i, j), so that
    // u x u* = V_y · diag over j of λ_{i(j)} · V_y*
    let mut p = CMat::zeros(n, n);
    for &(i, j) in &matching.pairing {
        p[(j, i)] = Complex64::new(1.0, 0.0);
    }
    let witness = y.basis() * p * x.basis().adjoint();
    let witness_error = operator_norm(&(&witness * x.mat() * witness.adjoint() - y.mat()));
    if witness_error > upper + 1e-9 {
        return Err(Error::BoundViolation { measured: witness_error, budget: upper + 1e-9 });
    }
    Ok(DuBracket { lower, upper, witness, witness_error })
}

/// Checks d_W(Σαᵢ, Σβᵢ) ≤ min over permutations σ of max_i d_W(αᵢ, β_σ(i));
/// returns (lhs, rhs) or an error carrying the violating values. The minimax
/// over permutations is itself a bottleneck assignment on the pairwise d_Cu
/// matrix. List length is capped at 8.
pub fn marriage_check(alphas: &[RankMeasure], betas: &[RankMeasure]) -> Result<(f64, f64)> {
    if alphas.len() != betas.len() {
        return Err(Error::LengthMismatch(alphas.len(), betas.len()));
    }
    let k = alphas.len();
    if k == 0 || k > 8 {
        return Err(Error::InvalidParameter(format!(
            "marriage check takes 1..=8 summands, got {k}"
        )));
    }
    let mut sum_a = alphas[0].clone();
    let mut sum_b = betas[0].clone();
    for i in 1..k {
        sum_a = sum_a.add(&alphas[i])?;
        sum_b = sum_b.add(&betas[i])?;
    }
    let lhs = d_cu(&sum_a, &sum_b)?.value;
    let mut cost = vec![vec![0.0f64; k]; k];
    for (i, a) in alphas.iter().enumerate() {
        for (j, b) in betas.iter().enumerate() {
            cost[i][j] = d_cu(a, b)?.value;
        }
    }
    let rhs = bottleneck_assignment(&cost).value;
    if lhs > rhs + 1e-9 {
        return Err(Error::MarriageViolation { lhs, rhs });
    }
    Ok((lhs, rhs))
}
