//! Bottleneck distance and matchings between persistence diagrams.
//!
//! A matching is a bijection between two diagrams after augmenting each side
//! with the diagonal: every proper cornerpoint is matched either to a proper
//! cornerpoint of the other diagram or to its diagonal projection.
//! Cornerpoints at infinity only ever match cornerpoints at infinity of the
//! same degree, paired in sorted birth order. The bottleneck distance is the
//! min over matchings of the max pair distance; [`enumerate_matchings`]
//! walks the whole (finite) matching set for the coherent distance's inner
//! minimum.

use thiserror::Error;

use crate::persistence::PersistenceDiagram;

#[derive(Debug, Error, PartialEq)]
pub enum MatchingError {
    #[error("matchings of diagrams with {left} x {right} proper points exceed the enumeration limit {limit}")]
    LimitExceeded {
        left: usize,
        right: usize,
        limit: usize,
    },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
}

/// One side of a matched pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    /// A proper cornerpoint `(birth, death)`.
    Point(f64, f64),
    /// A cornerpoint at infinity with its birth.
    Essential(f64),
    /// The diagonal.
    Diagonal,
}

/// Sup-norm distance between matching slots.
///
/// Distance of a proper point to the diagonal is `(v - u) / 2`; two
/// cornerpoints at infinity compare by birth; a cornerpoint at infinity
/// never matches a proper point or the diagonal (`+inf`).
pub fn point_distance(x: &Slot, y: &Slot) -> f64 {
    use Slot::*;
    match (x, y) {
        (Point(u1, v1), Point(u2, v2)) => (u1 - u2).abs().max((v1 - v2).abs()),
        (Point(u, v), Diagonal) | (Diagonal, Point(u, v)) => (v - u) / 2.0,
        (Diagonal, Diagonal) => 0.0,
        (Essential(u1), Essential(u2)) => (u1 - u2).abs(),
        (Essential(_), _) | (_, Essential(_)) => f64::INFINITY,
    }
}

/// The expanded (multiplicity-flattened) points of one degree of a diagram,
/// in the canonical sorted order used for labeling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DegreeView {
    pub proper: Vec<(f64, f64)>,
    pub essential: Vec<f64>,
    pub degree: usize,
}

impl DegreeView {
    pub fn of(diagram: &PersistenceDiagram, degree: usize) -> Self {
        let proper = diagram.expanded_proper(degree);
        let mut essential = diagram.expanded_essential(degree);
        essential.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self {
            proper,
            essential,
            degree,
        }
    }

    pub fn proper_slot(&self, label: usize) -> Slot {
        let (u, v) = self.proper[label];
        Slot::Point(u, v)
    }
}

/// One matched pair, by label into the two [`DegreeView`]s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchPair {
    Points { left: usize, right: usize },
    LeftToDiagonal { left: usize },
    RightToDiagonal { right: usize },
    Essential { left: usize, right: usize },
}

/// A diagonal-augmented bijection between two diagrams in one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub degree: usize,
    pub pairs: Vec<MatchPair>,
}

impl Matching {
    /// Max pair distance; an empty matching costs 0.
    pub fn cost(&self, left: &DegreeView, right: &DegreeView) -> f64 {
        self.pairs
            .iter()
            .map(|p| self.pair_distance(p, left, right))
            .fold(0.0, f64::max)
    }

    pub fn pair_distance(&self, pair: &MatchPair, left: &DegreeView, right: &DegreeView) -> f64 {
        match *pair {
            MatchPair::Points { left: i, right: j } => {
                point_distance(&left.proper_slot(i), &right.proper_slot(j))
            }
            MatchPair::LeftToDiagonal { left: i } => {
                point_distance(&left.proper_slot(i), &Slot::Diagonal)
            }
            MatchPair::RightToDiagonal { right: j } => {
                point_distance(&Slot::Diagonal, &right.proper_slot(j))
            }
            MatchPair::Essential { left: i, right: j } => point_distance(
                &Slot::Essential(left.essential[i]),
                &Slot::Essential(right.essential[j]),
            ),
        }
    }

    /// Every left (right) proper label appears exactly once.
    pub fn is_valid(&self, left: &DegreeView, right: &DegreeView) -> bool {
        let mut seen_l = vec![false; left.proper.len()];
        let mut seen_r = vec![false; right.proper.len()];
        for p in &self.pairs {
            match *p {
                MatchPair::Points { left: i, right: j } => {
                    if seen_l[i] || seen_r[j] {
                        return false;
                    }
                    seen_l[i] = true;
                    seen_r[j] = true;
                }
                MatchPair::LeftToDiagonal { left: i } => {
                    if seen_l[i] {
                        return false;
                    }
                    seen_l[i] = true;
                }
                MatchPair::RightToDiagonal { right: j } => {
                    if seen_r[j] {
                        return false;
                    }
                    seen_r[j] = true;
                }
                MatchPair::Essential { .. } => {}
            }
        }
        seen_l.iter().all(|&s| s) && seen_r.iter().all(|&s| s)
    }

    /// The identity matching of a view with itself.
    pub fn identity(view: &DegreeView) -> Matching {
        let mut pairs: Vec<MatchPair> = (0..view.proper.len())
            .map(|i| MatchPair::Points { left: i, right: i })
            .collect();
        pairs.extend(
            (0..view.essential.len()).map(|i| MatchPair::Essential { left: i, right: i }),
        );
        Matching {
            degree: view.degree,
            pairs,
        }
    }
}

/// Sorted-order pairing of the cornerpoints at infinity, which is optimal
/// for the max of birth differences. `None` when counts differ.
fn essential_pairs(left: &DegreeView, right: &DegreeView) -> Option<(Vec<MatchPair>, f64)> {
    if left.essential.len() != right.essential.len() {
        return None;
    }
    let pairs: Vec<MatchPair> = (0..left.essential.len())
        .map(|i| MatchPair::Essential { left: i, right: i })
        .collect();
    let cost = left
        .essential
        .iter()
        .zip(&right.essential)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    Some((pairs, cost))
}

/// Maximum bipartite matching by augmenting paths (Kuhn's algorithm).
fn max_bipartite_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut match_left: Vec<Option<usize>> = vec![None; adj.len()];

    fn try_augment(
        u: usize,
        adj: &[Vec<usize>],
        visited: &mut [bool],
        match_left: &mut [Option<usize>],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &v in &adj[u] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            if match_right[v].is_none()
                || try_augment(match_right[v].unwrap(), adj, visited, match_left, match_right)
            {
                match_right[v] = Some(u);
                match_left[u] = Some(v);
                return true;
            }
        }
        false
    }

    for u in 0..adj.len() {
        let mut visited = vec![false; n_right];
        try_augment(u, adj, &mut visited, &mut match_left, &mut match_right);
    }
    match_left
}

/// Whether a matching of cost at most `d` exists, via the standard
/// diagonal-augmented perfect-matching construction: left vertices are the
/// left points plus one diagonal proxy per right point, right vertices
/// symmetric, and proxies connect freely to each other. `forced` pins left
/// labels to a target (`Some(j)` or the diagonal).
fn feasible(
    left: &[(f64, f64)],
    right: &[(f64, f64)],
    d: f64,
    forced: &[(usize, Option<usize>)],
) -> Option<Vec<Option<usize>>> {
    let (n, m) = (left.len(), right.len());
    let size = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    let dist = |i: usize, j: usize| {
        (left[i].0 - right[j].0)
            .abs()
            .max((left[i].1 - right[j].1).abs())
    };
    let gap_l = |i: usize| (left[i].1 - left[i].0) / 2.0;
    let gap_r = |j: usize| (right[j].1 - right[j].0) / 2.0;
    // left point i: real targets j with dist <= d, or its own diagonal proxy
    for i in 0..n {
        if let Some((_, target)) = forced.iter().find(|(fi, _)| *fi == i) {
            match target {
                Some(j) => {
                    if dist(i, *j) <= d {
                        adj[i].push(*j);
                    }
                }
                None => {
                    if gap_l(i) <= d {
                        adj[i].push(m + i);
                    }
                }
            }
            continue;
        }
        for j in 0..m {
            if dist(i, j) <= d {
                adj[i].push(j);
            }
        }
        if gap_l(i) <= d {
            adj[i].push(m + i);
        }
    }
    // diagonal proxy of right j: absorbs right j, or pairs with any left
    // diagonal proxy
    for j in 0..m {
        if gap_r(j) <= d {
            adj[n + j].push(j);
        }
        for i in 0..n {
            adj[n + j].push(m + i);
        }
    }
    let match_left = max_bipartite_matching(&adj, size);
    if match_left.iter().all(|x| x.is_some()) {
        Some(match_left)
    } else {
        None
    }
}

fn bottleneck_value_proper(left: &[(f64, f64)], right: &[(f64, f64)]) -> f64 {
    if left.is_empty() && right.is_empty() {
        return 0.0;
    }
    let mut candidates: Vec<f64> = vec![0.0];
    for &(u1, v1) in left {
        candidates.push((v1 - u1) / 2.0);
        for &(u2, v2) in right {
            candidates.push((u1 - u2).abs().max((v1 - v2).abs()));
        }
    }
    for &(u2, v2) in right {
        candidates.push((v2 - u2) / 2.0);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    // binary search for the smallest feasible candidate
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    debug_assert!(feasible(left, right, candidates[hi], &[]).is_some());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(left, right, candidates[mid], &[]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Lexicographically smallest assignment of left labels achieving cost `d`:
/// left points in index order, each taking the smallest feasible right
/// label, with the diagonal as the last resort.
fn canonical_assignment(
    left: &[(f64, f64)],
    right: &[(f64, f64)],
    d: f64,
) -> Vec<Option<usize>> {
    let mut forced: Vec<(usize, Option<usize>)> = Vec::new();
    for i in 0..left.len() {
        let mut chosen = None;
        for j in 0..right.len() {
            if forced.iter().any(|(_, t)| *t == Some(j)) {
                continue;
            }
            let mut attempt = forced.clone();
            attempt.push((i, Some(j)));
            if feasible(left, right, d, &attempt).is_some() {
                chosen = Some(j);
                break;
            }
        }
        forced.push((i, chosen));
    }
    forced.into_iter().map(|(_, t)| t).collect()
}

/// Bottleneck distance between two diagrams in one degree, with an optimal
/// matching.
///
/// Candidate values are the pairwise and point-to-diagonal distances; a
/// binary search over them runs a bipartite feasibility test. Among optimal
/// matchings the lexicographically smallest is returned, so results are
/// deterministic. Diagrams with different counts of cornerpoints at infinity
/// are at distance `+inf` (the returned matching still covers the proper
/// points).
pub fn bottleneck(
    d1: &PersistenceDiagram,
    d2: &PersistenceDiagram,
    degree: usize,
) -> (f64, Matching) {
    let left = DegreeView::of(d1, degree);
    let right = DegreeView::of(d2, degree);
    bottleneck_views(&left, &right)
}

pub fn bottleneck_views(left: &DegreeView, right: &DegreeView) -> (f64, Matching) {
    let ess = essential_pairs(left, right);
    let proper_d = bottleneck_value_proper(&left.proper, &right.proper);

    let mut pairs: Vec<MatchPair> = Vec::new();
    let assignment = canonical_assignment(&left.proper, &right.proper, proper_d);
    let mut matched_right = vec![false; right.proper.len()];
    for (i, target) in assignment.iter().enumerate() {
        match target {
            Some(j) => {
                pairs.push(MatchPair::Points { left: i, right: *j });
                matched_right[*j] = true;
            }
            None => pairs.push(MatchPair::LeftToDiagonal { left: i }),
        }
    }
    for (j, seen) in matched_right.iter().enumerate() {
        if !seen {
            pairs.push(MatchPair::RightToDiagonal { right: j });
        }
    }
    match ess {
        Some((ess_pairs, ess_cost)) => {
            pairs.extend(ess_pairs);
            (
                proper_d.max(ess_cost),
                Matching {
                    degree: left.degree,
                    pairs,
                },
            )
        }
        None => (
            f64::INFINITY,
            Matching {
                degree: left.degree,
                pairs,
            },
        ),
    }
}

/// Value-only bottleneck for one degree (skips matching extraction).
pub fn bottleneck_value_views(left: &DegreeView, right: &DegreeView) -> f64 {
    let proper = bottleneck_value_proper(&left.proper, &right.proper);
    match essential_pairs(left, right) {
        Some((_, ess)) => proper.max(ess),
        None => f64::INFINITY,
    }
}

/// Bottleneck distance over whole diagrams: max over degrees.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    let degrees = d1.degree_count().max(d2.degree_count());
    (0..degrees)
        .map(|n| bottleneck_value_views(&DegreeView::of(d1, n), &DegreeView::of(d2, n)))
        .fold(0.0, f64::max)
}

/// Default cap on proper points per side for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 6;

/// All matchings between two degree views: every way to pick `k` left and
/// `k` right proper points, biject them, and send the rest to the diagonal.
/// Cornerpoints at infinity are paired in sorted order in every matching.
///
/// The count is `sum_k C(n,k) C(m,k) k!`, so both sides must stay within
/// `limit`.
pub fn enumerate_matchings(
    left: &DegreeView,
    right: &DegreeView,
    limit: usize,
) -> Result<Vec<Matching>, MatchingError> {
    let (n, m) = (left.proper.len(), right.proper.len());
    if n > limit || m > limit {
        return Err(MatchingError::LimitExceeded {
            left: n,
            right: m,
            limit,
        });
    }
    let ess: Vec<MatchPair> = match essential_pairs(left, right) {
        Some((pairs, _)) => pairs,
        None => Vec::new(),
    };
    let mut out = Vec::new();
    for left_mask in 0u32..(1 << n) {
        let chosen_left: Vec<usize> = (0..n).filter(|i| left_mask >> i & 1 == 1).collect();
        let k = chosen_left.len();
        if k > m {
            continue;
        }
        let mut used = vec![false; m];
        let mut selection: Vec<usize> = Vec::with_capacity(k);
        emit_selections(
            &mut used,
            &mut selection,
            k,
            &chosen_left,
            n,
            m,
            &ess,
            left.degree,
            &mut out,
        );
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn emit_selections(
    used: &mut Vec<bool>,
    selection: &mut Vec<usize>,
    k: usize,
    chosen_left: &[usize],
    n: usize,
    m: usize,
    ess: &[MatchPair],
    degree: usize,
    out: &mut Vec<Matching>,
) {
    if selection.len() == k {
        let mut pairs: Vec<MatchPair> = Vec::with_capacity(n + m);
        let mut right_used = vec![false; m];
        for (idx, &i) in chosen_left.iter().enumerate() {
            pairs.push(MatchPair::Points {
                left: i,
                right: selection[idx],
            });
            right_used[selection[idx]] = true;
        }
        for i in 0..n {
            if !chosen_left.contains(&i) {
                pairs.push(MatchPair::LeftToDiagonal { left: i });
            }
        }
        for (j, used_j) in right_used.iter().enumerate() {
            if !used_j {
                pairs.push(MatchPair::RightToDiagonal { right: j });
            }
        }
        pairs.extend_from_slice(ess);
        out.push(Matching { degree, pairs });
        return;
    }
    for j in 0..m {
        if !used[j] {
            used[j] = true;
            selection.push(j);
            emit_selections(used, selection, k, chosen_left, n, m, ess, degree, out);
            selection.pop();
            used[j] = false;
        }
    }
}

/// The single-swap neighborhood of a matching: every matching obtained by
/// exchanging the targets of two left points, or by retargeting one left
/// point to the diagonal or to a free right label. Fallback search set when
/// full enumeration is out of budget (lower-bound mode).
pub fn single_swap_neighborhood(
    base: &Matching,
    left: &DegreeView,
    right: &DegreeView,
) -> Vec<Matching> {
    let n = left.proper.len();
    let mut target: Vec<Option<usize>> = vec![None; n];
    for p in &base.pairs {
        if let MatchPair::Points { left: i, right: j } = p {
            target[*i] = Some(*j);
        }
    }
    let rebuild = |target: &[Option<usize>]| -> Matching {
        let mut pairs: Vec<MatchPair> = Vec::new();
        let mut right_used = vec![false; right.proper.len()];
        for (i, t) in target.iter().enumerate() {
            match t {
                Some(j) => {
                    pairs.push(MatchPair::Points { left: i, right: *j });
                    right_used[*j] = true;
                }
                None => pairs.push(MatchPair::LeftToDiagonal { left: i }),
            }
        }
        for (j, used) in right_used.iter().enumerate() {
            if !used {
                pairs.push(MatchPair::RightToDiagonal { right: j });
            }
        }
        for p in &base.pairs {
            if let MatchPair::Essential { .. } = p {
                pairs.push(*p);
            }
        }
        Matching {
            degree: base.degree,
            pairs,
        }
    };
    let mut out = vec![base.clone()];
    for i in 0..n {
        for k in i + 1..n {
            let mut t = target.clone();
            t.swap(i, k);
            out.push(rebuild(&t));
        }
    }
    let free_right: Vec<usize> = (0..right.proper.len())
        .filter(|j| !target.contains(&Some(*j)))
        .collect();
    for i in 0..n {
        if target[i].is_some() {
            let mut t = target.clone();
            t[i] = None;
            out.push(rebuild(&t));
        }
        for &j in &free_right {
            let mut t = target.clone();
            t[i] = Some(j);
            out.push(rebuild(&t));
        }
    }
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persistence::Death;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dgm(points: Vec<(f64, f64)>) -> PersistenceDiagram {
        PersistenceDiagram::from_points(
            points
                .into_iter()
                .map(|(u, v)| (0usize, u, Death::Finite(v))),
        )
    }

    fn random_dgm(rng: &mut ChaCha8Rng, max_points: usize) -> PersistenceDiagram {
        let n = rng.gen_range(0..=max_points);
        dgm((0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(-1.0..1.0);
                let v = u + rng.gen_range(0.01..2.0);
                (u, v)
            })
            .collect())
    }

    /// Brute-force bottleneck by enumeration, the oracle for the fast path.
    fn brute_force(d1: &PersistenceDiagram, d2: &PersistenceDiagram, degree: usize) -> f64 {
        let left = DegreeView::of(d1, degree);
        let right = DegreeView::of(d2, degree);
        enumerate_matchings(&left, &right, 8)
            .unwrap()
            .iter()
            .map(|m| m.cost(&left, &right))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn point_distance_examples() {
        assert_eq!(point_distance(&Slot::Point(0.0, 2.0), &Slot::Diagonal), 1.0);
        assert_eq!(
            point_distance(&Slot::Point(0.0, 4.0), &Slot::Point(1.0, 5.0)),
            1.0
        );
        assert_eq!(
            point_distance(&Slot::Essential(3.0), &Slot::Essential(3.0)),
            0.0
        );
        assert_eq!(point_distance(&Slot::Diagonal, &Slot::Diagonal), 0.0);
        assert_eq!(
            point_distance(&Slot::Essential(0.0), &Slot::Diagonal),
            f64::INFINITY
        );
        assert_eq!(
            point_distance(&Slot::Essential(0.0), &Slot::Point(0.0, 1.0)),
            f64::INFINITY
        );
    }

    #[test]
    fn cost_of_identity_is_zero() {
        let d = dgm(vec![(0.0, 1.0), (0.5, 2.0)]);
        let view = DegreeView::of(&d, 0);
        let id = Matching::identity(&view);
        assert_eq!(id.cost(&view, &view), 0.0);
    }

    #[test]
    fn diagonal_absorption() {
        let d1 = dgm(vec![(0.0, 2.0)]);
        let d2 = dgm(vec![]);
        let (d, m) = bottleneck(&d1, &d2, 0);
        assert_eq!(d, 1.0);
        assert_eq!(m.pairs, vec![MatchPair::LeftToDiagonal { left: 0 }]);
    }

    #[test]
    fn identical_diagrams_have_zero_distance() {
        let d = dgm(vec![(0.0, 1.0), (0.25, 3.0), (-1.0, -0.5)]);
        let (dist, m) = bottleneck(&d, &d, 0);
        assert_eq!(dist, 0.0);
        let view = DegreeView::of(&d, 0);
        assert!(m.is_valid(&view, &view));
        assert_eq!(m.cost(&view, &view), 0.0);
    }

    #[test]
    fn essential_count_mismatch_is_infinite() {
        let d1 = PersistenceDiagram::from_points(vec![(0, 0.0, Death::Infinity)]);
        let d2 = PersistenceDiagram::from_points(vec![
            (0, 0.0, Death::Infinity),
            (0, 1.0, Death::Infinity),
        ]);
        assert_eq!(bottleneck(&d1, &d2, 0).0, f64::INFINITY);
    }

    #[test]
    fn essential_points_compare_by_birth() {
        let d1 = PersistenceDiagram::from_points(vec![(0, 0.0, Death::Infinity)]);
        let d2 = PersistenceDiagram::from_points(vec![(0, 0.75, Death::Infinity)]);
        let (d, m) = bottleneck(&d1, &d2, 0);
        assert_eq!(d, 0.75);
        assert_eq!(m.pairs, vec![MatchPair::Essential { left: 0, right: 0 }]);
    }

    #[test]
    fn matches_brute_force_on_random_diagrams() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..60 {
            let d1 = random_dgm(&mut rng, 5);
            let d2 = random_dgm(&mut rng, 5);
            let (fast, m) = bottleneck(&d1, &d2, 0);
            let slow = brute_force(&d1, &d2, 0);
            assert_eq!(fast, slow);
            // the returned matching achieves the value
            let left = DegreeView::of(&d1, 0);
            let right = DegreeView::of(&d2, 0);
            assert!(m.is_valid(&left, &right));
            assert_eq!(m.cost(&left, &right), fast);
        }
    }

    #[test]
    fn enumeration_counts() {
        let one = dgm(vec![(0.0, 1.0)]);
        let view1 = DegreeView::of(&one, 0);
        // 1 x 1: match, or both to the diagonal
        assert_eq!(enumerate_matchings(&view1, &view1, 6).unwrap().len(), 2);
        // 2 x 1: sum_k C(2,k) C(1,k) k! = 1 + 2 = 3, by explicit listing
        let two = dgm(vec![(0.0, 1.0), (1.0, 3.0)]);
        let view2 = DegreeView::of(&two, 0);
        assert_eq!(enumerate_matchings(&view2, &view1, 6).unwrap().len(), 3);
        // 0 x 0: the empty matching, cost 0
        let empty = dgm(vec![]);
        let view0 = DegreeView::of(&empty, 0);
        let ms = enumerate_matchings(&view0, &view0, 6).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].cost(&view0, &view0), 0.0);
        // 3 x 3: 1 + 9 + 18 + 6 = 34
        let three = dgm(vec![(0.0, 1.0), (1.0, 3.0), (0.5, 0.75)]);
        let view3 = DegreeView::of(&three, 0);
        assert_eq!(enumerate_matchings(&view3, &view3, 6).unwrap().len(), 34);
    }

    #[test]
    fn enumeration_limit() {
        let big = dgm((0..7).map(|i| (i as f64, i as f64 + 1.0)).collect());
        let view = DegreeView::of(&big, 0);
        assert!(matches!(
            enumerate_matchings(&view, &view, 6),
            Err(MatchingError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn bottleneck_equals_enumeration_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let d1 = random_dgm(&mut rng, 4);
            let d2 = random_dgm(&mut rng, 4);
            let left = DegreeView::of(&d1, 0);
            let right = DegreeView::of(&d2, 0);
            let best = enumerate_matchings(&left, &right, 6)
                .unwrap()
                .iter()
                .map(|m| m.cost(&left, &right))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(bottleneck(&d1, &d2, 0).0, best);
        }
    }

    #[test]
    fn metric_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let d1 = random_dgm(&mut rng, 4);
            let d2 = random_dgm(&mut rng, 4);
            // identity and symmetry are exact
            assert_eq!(bottleneck(&d1, &d1, 0).0, 0.0);
            assert_eq!(bottleneck(&d1, &d2, 0).0, bottleneck(&d2, &d1, 0).0);
        }
    }

    /// Triangle inequality checked in exact rational arithmetic: collinear
    /// configurations make the floating-point inequality tight, where an ulp
    /// of rounding could flip it; the rational metric has no such slack.
    #[test]
    fn triangle_inequality_exact_rational() {
        use num_rational::BigRational;

        fn rational_bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> BigRational {
            let rat = |x: f64| BigRational::from_float(x).unwrap();
            let abs = |x: BigRational| {
                if x < BigRational::from_integer(0.into()) {
                    -x
                } else {
                    x
                }
            };
            let left = DegreeView::of(d1, 0);
            let right = DegreeView::of(d2, 0);
            let dist = |m: &Matching| -> BigRational {
                let mut worst = BigRational::from_integer(0.into());
                for p in &m.pairs {
                    let d = match *p {
                        MatchPair::Points { left: i, right: j } => {
                            let (u1, v1) = left.proper[i];
                            let (u2, v2) = right.proper[j];
                            abs(rat(u1) - rat(u2)).max(abs(rat(v1) - rat(v2)))
                        }
                        MatchPair::LeftToDiagonal { left: i } => {
                            let (u, v) = left.proper[i];
                            (rat(v) - rat(u)) / BigRational::from_integer(2.into())
                        }
                        MatchPair::RightToDiagonal { right: j } => {
                            let (u, v) = right.proper[j];
                            (rat(v) - rat(u)) / BigRational::from_integer(2.into())
                        }
                        MatchPair::Essential { .. } => BigRational::from_integer(0.into()),
                    };
                    worst = worst.max(d);
                }
                worst
            };
            enumerate_matchings(&left, &right, 8)
                .unwrap()
                .iter()
                .map(dist)
                .min()
                .unwrap()
        }

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..15 {
            let d1 = random_dgm(&mut rng, 3);
            let d2 = random_dgm(&mut rng, 3);
            let d3 = random_dgm(&mut rng, 3);
            let ab = rational_bottleneck(&d1, &d2);
            let bc = rational_bottleneck(&d2, &d3);
            let ac = rational_bottleneck(&d1, &d3);
            assert!(ac <= ab + bc);
        }
    }

    #[test]
    fn one_dimensional_stability() {
        use crate::field::PrimeField;
        use crate::fixtures;
        use crate::persistence::{reduce, ScalarField};
        let k = fixtures::octahedron();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..25 {
            let phi = fixtures::random_scalar_field(&k, 1000 + trial);
            let psi = ScalarField::new(
                phi.values()
                    .iter()
                    .map(|v| v + rng.gen_range(-0.2..0.2))
                    .collect(),
            )
            .unwrap();
            let bound = phi.sup_distance(&psi);
            let dgm_phi = reduce(&k, &phi, PrimeField::z2());
            let dgm_psi = reduce(&k, &psi, PrimeField::z2());
            for degree in 0..=k.dimension() {
                let d = bottleneck(&dgm_phi, &dgm_psi, degree).0;
                assert!(d <= bound, "degree {degree}: {d} > {bound}");
            }
        }
    }

    #[test]
    fn swap_neighborhood_contains_base_and_is_valid() {
        let d1 = dgm(vec![(0.0, 1.0), (1.0, 3.0)]);
        let d2 = dgm(vec![(0.1, 1.1), (1.2, 2.8), (4.0, 4.4)]);
        let left = DegreeView::of(&d1, 0);
        let right = DegreeView::of(&d2, 0);
        let (_, base) = bottleneck(&d1, &d2, 0);
        let hood = single_swap_neighborhood(&base, &left, &right);
        assert!(hood.contains(&base));
        for m in &hood {
            assert!(m.is_valid(&left, &right), "{m:?}");
        }
        assert!(hood.len() > 3);
    }
}
