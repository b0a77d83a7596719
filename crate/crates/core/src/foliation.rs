//! The foliation of the plane by admissible lines and the derived slice
//! filtrations.
//!
//! A pair `(a, b)` with `0 < a < 1` parameterizes the positive-slope line
//! `r_{a,b}: t -> t (a, 1-a) + (b, -b)`. Restricting a bifiltration to that
//! line yields the scalar function `f_{a,b}(x) = max{(f1(x)-b)/a,
//! (f2(x)+b)/(1-a)}`; multiplying by `min{a, 1-a}` gives the normalized
//! variant `f*_{a,b}` whose diagrams are stable in the sup-norm. This module
//! also locates the singular parameter pairs (where a slice diagram carries a
//! point of multiplicity > 1) that the transport machinery must route around.

use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{Bifiltration, SimplicialComplex};
use crate::field::PrimeField;
use crate::persistence::{reduce, PersistenceDiagram, ScalarField};

#[derive(Debug, Error, PartialEq)]
pub enum FoliationError {
    #[error("parameter a = {0} must lie strictly inside ]0, 1[")]
    BoundaryParameter(f64),
    #[error("non-finite parameter value")]
    NonFiniteParameter,
    #[error("parameter region is unbounded or inverted")]
    RegionUnbounded,
    #[error("empty region or zero grid resolution")]
    EmptyRegion,
}

/// A point `(a, b)` of the parameter space `]0,1[ x R`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterPoint {
    pub a: f64,
    pub b: f64,
}

impl ParameterPoint {
    pub fn new(a: f64, b: f64) -> Result<Self, FoliationError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(FoliationError::NonFiniteParameter);
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(FoliationError::BoundaryParameter(a));
        }
        Ok(Self { a, b })
    }

    /// Euclidean distance in the `(a, b)` plane.
    pub fn distance(&self, other: &ParameterPoint) -> f64 {
        ((self.a - other.a).powi(2) + (self.b - other.b).powi(2)).sqrt()
    }

    /// The admissible line this pair parameterizes.
    pub fn line(&self) -> AdmissibleLine {
        AdmissibleLine {
            direction: (self.a, 1.0 - self.a),
            offset: (self.b, -self.b),
        }
    }
}

/// An oriented line of positive slope in the `(u, v)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleLine {
    /// `(a, 1 - a)`; both components strictly positive.
    pub direction: (f64, f64),
    /// `(b, -b)`.
    pub offset: (f64, f64),
}

/// The plane point `t (a, 1-a) + (b, -b)` of the line through `p`.
pub fn line_point(p: ParameterPoint, t: f64) -> (f64, f64) {
    (t * p.a + p.b, t * (1.0 - p.a) - p.b)
}

/// `min{a, 1-a}`, the normalization factor of a slice.
#[inline]
pub fn normalization_factor(p: ParameterPoint) -> f64 {
    p.a.min(1.0 - p.a)
}

/// Unnormalized slice value `max{(f1-b)/a, (f2+b)/(1-a)}` at one vertex.
#[inline]
pub fn slice_value_raw(p: ParameterPoint, f1: f64, f2: f64) -> f64 {
    ((f1 - p.b) / p.a).max((f2 + p.b) / (1.0 - p.a))
}

/// Slice value at one vertex; the normalized variant is exactly
/// `normalization_factor(p) * slice_value_raw(p, ..)` so the scaling identity
/// between normalized and unnormalized diagrams holds bit for bit.
#[inline]
pub fn slice_value(p: ParameterPoint, f1: f64, f2: f64, normalized: bool) -> f64 {
    let raw = slice_value_raw(p, f1, f2);
    if normalized {
        normalization_factor(p) * raw
    } else {
        raw
    }
}

/// The scalar field `f_{a,b}` (or `f*_{a,b}`) induced on the vertices.
pub fn slice_function(f: &Bifiltration, p: ParameterPoint, normalized: bool) -> ScalarField {
    ScalarField::new(
        f.values()
            .iter()
            .map(|&(f1, f2)| slice_value(p, f1, f2, normalized))
            .collect(),
    )
    .expect("slice of finite values at an interior parameter is finite")
}

/// Persistence diagram of a slice.
pub fn slice_diagram(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    p: ParameterPoint,
    normalized: bool,
    coeffs: PrimeField,
) -> PersistenceDiagram {
    reduce(complex, &slice_function(f, p, normalized), coeffs)
}

/// The bound `K = max_x max(|f1|, |f2|, |g1|, |g2|)`.
///
/// For `|b| > K` the slice function is decided by a single component of the
/// bifiltration, so slice diagrams beyond the bound are rescalings of one
/// fixed diagram; parameter-space sampling may stop at `K` plus a margin.
pub fn b_bound(f: &Bifiltration, g: &Bifiltration) -> f64 {
    f.sup_norm().max(g.sup_norm())
}

/// A bounded axis-aligned rectangle of parameter space.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ParameterRegion {
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

/// Default margin kept between sampled `a` values and the ends of `]0, 1[`.
pub const DEFAULT_A_MARGIN: f64 = 1e-3;

impl ParameterRegion {
    pub fn new(a_min: f64, a_max: f64, b_min: f64, b_max: f64) -> Result<Self, FoliationError> {
        let r = Self {
            a_min,
            a_max,
            b_min,
            b_max,
        };
        if ![a_min, a_max, b_min, b_max].iter().all(|v| v.is_finite()) {
            return Err(FoliationError::RegionUnbounded);
        }
        if !(0.0 < a_min && a_min <= a_max && a_max < 1.0 && b_min <= b_max) {
            return Err(FoliationError::RegionUnbounded);
        }
        Ok(r)
    }

    /// `a` within margin of `]0,1[`, `|b| <= b_bound(f, g) + 1`.
    pub fn default_for(f: &Bifiltration, g: &Bifiltration) -> Self {
        let k = b_bound(f, g);
        Self {
            a_min: DEFAULT_A_MARGIN,
            a_max: 1.0 - DEFAULT_A_MARGIN,
            b_min: -(k + 1.0),
            b_max: k + 1.0,
        }
    }

    pub fn contains(&self, p: ParameterPoint) -> bool {
        p.a >= self.a_min && p.a <= self.a_max && p.b >= self.b_min && p.b <= self.b_max
    }

    pub fn center(&self) -> ParameterPoint {
        ParameterPoint {
            a: 0.5 * (self.a_min + self.a_max),
            b: 0.5 * (self.b_min + self.b_max),
        }
    }

    /// Inclusive grid of `na x nb` points, row-major in `a` then `b`.
    pub fn grid(&self, na: usize, nb: usize) -> Result<Vec<ParameterPoint>, FoliationError> {
        if na == 0 || nb == 0 {
            return Err(FoliationError::EmptyRegion);
        }
        let step = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
            }
        };
        let mut points = Vec::with_capacity(na * nb);
        for i in 0..na {
            let a = step(self.a_min, self.a_max, na, i);
            for j in 0..nb {
                let b = step(self.b_min, self.b_max, nb, j);
                points.push(ParameterPoint { a, b });
            }
        }
        Ok(points)
    }
}

/// Deterministic parallel map over parameter points: results come back in
/// input order regardless of scheduling.
pub fn parallel_map<T: Send>(
    points: &[ParameterPoint],
    eval: impl Fn(ParameterPoint) -> T + Sync,
) -> Vec<T> {
    points.par_iter().map(|&p| eval(p)).collect()
}

/// Minimum pairwise sup-norm distance among proper cornerpoints of the same
/// degree; `+inf` when no degree has two of them. A point of multiplicity
/// greater than one yields separation 0.
///
/// This is the quantity whose zeros are the singular parameter pairs.
pub fn separation(diagram: &PersistenceDiagram) -> f64 {
    let mut best = f64::INFINITY;
    for degree in 0..diagram.degree_count() {
        let pts = diagram.expanded_proper(degree);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = (pts[i].0 - pts[j].0)
                    .abs()
                    .max((pts[i].1 - pts[j].1).abs());
                if d < best {
                    best = d;
                }
            }
        }
    }
    best
}

/// Separation of the normalized slice diagram at one parameter point.
pub fn slice_separation(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    p: ParameterPoint,
    coeffs: PrimeField,
) -> f64 {
    separation(&slice_diagram(complex, f, p, true, coeffs))
}

/// Result of the empirical near-diagonal gap estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    /// Sampled minimum pairwise distance; `+inf` when no slice in the region
    /// carried two proper cornerpoints of the same degree.
    pub k: f64,
    /// Number of point pairs inspected.
    pub pairs_sampled: usize,
    /// Set when the estimate suggests the gap assumption may fail.
    pub warning: Option<String>,
}

/// Empirical estimate of the near-diagonal gap constant.
///
/// Samples normalized slice diagrams over a grid and returns the minimum
/// pairwise Euclidean distance among same-degree proper cornerpoints. Any
/// value `k` at most this minimum satisfies the gap property (points within
/// `k` of the diagonal are at least `k` apart) on the sampled slices, so the
/// estimate is conservative. Zero means two cornerpoints coincided on-grid.
pub fn near_diagonal_gap_estimate(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    region: &ParameterRegion,
    resolution: (usize, usize),
    coeffs: PrimeField,
) -> Result<GapEstimate, FoliationError> {
    let points = region.grid(resolution.0, resolution.1)?;
    let per_slice: Vec<(f64, usize)> = parallel_map(&points, |p| {
        let dgm = slice_diagram(complex, f, p, true, coeffs);
        let mut min_d = f64::INFINITY;
        let mut pairs = 0usize;
        for degree in 0..dgm.degree_count() {
            let pts = dgm.expanded_proper(degree);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                    min_d = min_d.min(d);
                    pairs += 1;
                }
            }
        }
        (min_d, pairs)
    });
    let k = per_slice
        .iter()
        .map(|(d, _)| *d)
        .fold(f64::INFINITY, f64::min);
    let pairs_sampled = per_slice.iter().map(|(_, n)| n).sum();
    let warning = if k == 0.0 {
        Some("two proper cornerpoints coincide on-grid: the gap assumption may fail".to_string())
    } else {
        None
    };
    Ok(GapEstimate {
        k,
        pairs_sampled,
        warning,
    })
}

/// Which of the two compared functions a singular pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FnTag {
    F,
    G,
}

/// A localized singular parameter pair with its exclusion radius.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SingularPair {
    pub center: ParameterPoint,
    /// Paths must keep this Euclidean distance from the center.
    pub radius: f64,
    /// Separation of the slice diagram at the refined center.
    pub separation: f64,
    pub which: FnTag,
}

/// The detected singular pairs of one or two functions.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct SingularSet {
    pub pairs: Vec<SingularPair>,
}

impl SingularSet {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Merge two detections, keeping distinct centers (used to combine the
    /// singular sets of `f` and `g`).
    pub fn merged(&self, other: &SingularSet) -> SingularSet {
        let mut pairs = self.pairs.clone();
        for p in &other.pairs {
            let duplicate = pairs
                .iter()
                .any(|q| q.center.distance(&p.center) < q.radius.max(p.radius));
            if !duplicate {
                pairs.push(p.clone());
            }
        }
        SingularSet { pairs }
    }

    /// Record a singular pair discovered indirectly (transport failure).
    pub fn insert_failure(&mut self, center: ParameterPoint, radius: f64, which: FnTag) {
        let duplicate = self
            .pairs
            .iter()
            .any(|q| q.center.distance(&center) < q.radius.max(radius));
        if !duplicate {
            self.pairs.push(SingularPair {
                center,
                radius,
                separation: 0.0,
                which,
            });
        }
    }

    /// Distance from a point to the nearest exclusion-disk boundary
    /// (negative inside a disk).
    pub fn clearance(&self, p: ParameterPoint) -> f64 {
        self.pairs
            .iter()
            .map(|s| p.distance(&s.center) - s.radius)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Tuning for [`detect_singular_pairs`].
#[derive(Debug, Clone)]
pub struct DetectConfig {
    /// Grid local minima above this separation are not even considered.
    pub threshold: f64,
    /// Localization scale: reported exclusion radii are multiples of it, and
    /// coincident detections within it are merged.
    pub localization_radius: Option<f64>,
    /// A candidate counts as singular when the Newton solve drives the
    /// crossing pair's separation below `newton_tol * scale`.
    pub newton_tol: f64,
    /// Iteration cap for the Newton solve.
    pub max_newton_iters: usize,
    /// Exclusion radius reported, as a multiple of the localization radius.
    pub exclusion_factor: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            threshold: f64::INFINITY,
            localization_radius: None,
            newton_tol: 1e-9,
            max_newton_iters: 48,
            exclusion_factor: 8.0,
        }
    }
}

/// Locate the singular pairs of `f` inside a region.
///
/// The separation of the normalized slice diagram is sampled on a grid and
/// its local minima below the threshold become candidates. Each candidate is
/// refined by a Newton solve on the signed coordinate differences of its
/// closest cornerpoint pair: a genuine crossing drives both differences to
/// machine zero (quadratic convergence), while a regular dip does not, which
/// classifies the candidate.
pub fn detect_singular_pairs(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    region: &ParameterRegion,
    grid: (usize, usize),
    config: &DetectConfig,
    coeffs: PrimeField,
) -> Result<SingularSet, FoliationError> {
    let (na, nb) = grid;
    if na < 3 || nb < 3 {
        return Err(FoliationError::EmptyRegion);
    }
    let points = region.grid(na, nb)?;
    let sep = parallel_map(&points, |p| slice_separation(complex, f, p, coeffs));
    let at = |i: usize, j: usize| sep[i * nb + j];

    let step_a = (region.a_max - region.a_min) / ((na - 1) as f64);
    let step_b = (region.b_max - region.b_min) / ((nb - 1) as f64);
    let loc_radius = config
        .localization_radius
        .unwrap_or(step_a.max(step_b).max(1e-12) / 64.0);

    // grid local minima below the threshold
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            let v = at(i, j);
            if !(v < config.threshold) || v.is_infinite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= na as i64 || nj >= nb as i64 {
                        continue;
                    }
                    if at(ni as usize, nj as usize) < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                candidates.push((i, j));
            }
        }
    }

    let mut pairs: Vec<SingularPair> = Vec::new();
    for (i, j) in candidates {
        let Some((center, sep)) = refine_crossing(
            points[i * nb + j],
            (step_a.max(1e-12), step_b.max(1e-12)),
            region,
            config,
            |p| slice_diagram(complex, f, p, true, coeffs),
        ) else {
            continue;
        };
        let radius = config.exclusion_factor * loc_radius;
        let duplicate = pairs
            .iter()
            .any(|q: &SingularPair| q.center.distance(&center) <= 2.0 * radius);
        if !duplicate {
            pairs.push(SingularPair {
                center,
                radius,
                separation: sep,
                which: FnTag::F,
            });
        }
    }
    // deterministic order
    pairs.sort_by(|x, y| {
        x.center
            .a
            .partial_cmp(&y.center.a)
            .unwrap()
            .then(x.center.b.partial_cmp(&y.center.b).unwrap())
    });
    Ok(SingularSet { pairs })
}

/// The two closest same-degree proper cornerpoints of a diagram, with their
/// degree; `None` when no degree has two proper points.
fn closest_pair(dgm: &PersistenceDiagram) -> Option<(usize, (f64, f64), (f64, f64))> {
    let mut best: Option<(f64, usize, (f64, f64), (f64, f64))> = None;
    for degree in 0..dgm.degree_count() {
        let pts = dgm.expanded_proper(degree);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = (pts[i].0 - pts[j].0)
                    .abs()
                    .max((pts[i].1 - pts[j].1).abs());
                if best.map_or(true, |(b, ..)| d < b) {
                    best = Some((d, degree, pts[i], pts[j]));
                }
            }
        }
    }
    best.map(|(_, deg, x, y)| (deg, x, y))
}

fn nearest_to(pts: &[(f64, f64)], target: (f64, f64)) -> Option<(f64, f64)> {
    pts.iter()
        .copied()
        .min_by(|x, y| {
            let dx = (x.0 - target.0).abs().max((x.1 - target.1).abs());
            let dy = (y.0 - target.0).abs().max((y.1 - target.1).abs());
            dx.partial_cmp(&dy).unwrap()
        })
}

/// Newton solve for the parameter pair at which the candidate's closest
/// cornerpoint pair collides.
///
/// The separation field near a crossing is the max of two near-parallel
/// absolute differences, so axis-aligned descent stalls; solving the signed
/// system `(birth difference, death difference) = 0` with a finite-difference
/// Jacobian converges quadratically instead. The pair identity is carried
/// between iterates by proximity. Returns the collision point when the
/// residual separation drops below tolerance.
fn refine_crossing(
    start: ParameterPoint,
    extents: (f64, f64),
    region: &ParameterRegion,
    config: &DetectConfig,
    diagram_at: impl Fn(ParameterPoint) -> PersistenceDiagram,
) -> Option<(ParameterPoint, f64)> {
    let (ha, hb) = extents;
    let mut p = start;
    let dgm = diagram_at(p);
    let (degree, mut x1, mut x2) = closest_pair(&dgm)?;
    let scale = 1.0 + x1.0.abs().max(x1.1.abs()).max(x2.0.abs()).max(x2.1.abs());
    let tol = config.newton_tol * scale;

    for _ in 0..config.max_newton_iters {
        let f0 = (x1.0 - x2.0, x1.1 - x2.1);
        let residual = f0.0.abs().max(f0.1.abs());
        if residual <= tol {
            return Some((p, residual));
        }
        // finite-difference Jacobian with proximity-tracked pair identity
        let (da, db) = (1e-7 * ha.max(1e-9), 1e-7 * hb.max(1e-9));
        let track = |q: ParameterPoint| -> Option<(f64, f64)> {
            let pts = diagram_at(q).expanded_proper(degree);
            let y1 = nearest_to(&pts, x1)?;
            let y2 = nearest_to(&pts, x2)?;
            Some((y1.0 - y2.0, y1.1 - y2.1))
        };
        let pa = ParameterPoint {
            a: (p.a + da).min(region.a_max),
            b: p.b,
        };
        let pb = ParameterPoint {
            a: p.a,
            b: p.b + db,
        };
        let fa = track(pa)?;
        let fb = track(pb)?;
        let j11 = (fa.0 - f0.0) / (pa.a - p.a);
        let j21 = (fa.1 - f0.1) / (pa.a - p.a);
        let j12 = (fb.0 - f0.0) / db;
        let j22 = (fb.1 - f0.1) / db;
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 || !det.is_finite() {
            return None;
        }
        let mut step_a = -(j22 * f0.0 - j12 * f0.1) / det;
        let mut step_b = -(-j21 * f0.0 + j11 * f0.1) / det;
        // clamp to the candidate's grid cell scale per iteration
        let clamp = (step_a.abs() / (2.0 * ha)).max(step_b.abs() / (2.0 * hb));
        if clamp > 1.0 {
            step_a /= clamp;
            step_b /= clamp;
        }
        let next = ParameterPoint {
            a: (p.a + step_a).clamp(region.a_min, region.a_max),
            b: (p.b + step_b).clamp(region.b_min, region.b_max),
        };
        // stop when the iterate escapes the candidate neighborhood
        if next.distance(&start) > 8.0 * (ha + hb) {
            return None;
        }
        let pts = diagram_at(next).expanded_proper(degree);
        x1 = nearest_to(&pts, x1)?;
        x2 = nearest_to(&pts, x2)?;
        p = next;
    }
    None
}

/// Upper bound on `max_x |f*_p(x) - f*_q(x)|` over all `p, q` in a cell.
///
/// Each slice value is the max of two branch functions; on a cell that does
/// not straddle `a = 1/2` each branch attains its extremes at cell corners
/// (one branch is linear in `b` with no `a` dependence, the other is a
/// product of a nonnegative monotone function of `a` with an affine function
/// of `b`). The max of branch oscillations then bounds the slice
/// oscillation; straddling cells are split at `a = 1/2` and the per-branch
/// extremes combined. Used as certified slack by the branch-and-bound
/// estimators and as the per-step deviation bound of transport.
pub fn slice_oscillation_bound(f: &Bifiltration, cell: &ParameterRegion) -> f64 {
    let mut corners: Vec<ParameterPoint> = Vec::with_capacity(8);
    let mut a_values = vec![cell.a_min, cell.a_max];
    if cell.a_min < 0.5 && cell.a_max > 0.5 {
        a_values.push(0.5);
    }
    for &a in &a_values {
        for &b in &[cell.b_min, cell.b_max] {
            corners.push(ParameterPoint { a, b });
        }
    }
    let mut bound: f64 = 0.0;
    for &(f1, f2) in f.values() {
        let mut max = [f64::NEG_INFINITY; 2];
        let mut min = [f64::INFINITY; 2];
        for &p in &corners {
            let m = normalization_factor(p);
            let br1 = m * ((f1 - p.b) / p.a);
            let br2 = m * ((f2 + p.b) / (1.0 - p.a));
            max[0] = max[0].max(br1);
            max[1] = max[1].max(br2);
            min[0] = min[0].min(br1);
            min[1] = min[1].min(br2);
        }
        bound = bound.max((max[0] - min[0]).max(max[1] - min[1]));
    }
    bound
}

/// Exact rational evaluation of the slice formula.
///
/// The per-vertex contraction `|f*_{a,b} - g*_{a,b}| <= max(|f1-g1|,
/// |f2-g2|)` is an identity of real arithmetic with no slack in the generic
/// case, so asserting it on floating-point evaluations would be at the mercy
/// of rounding. These helpers replay the formula over arbitrary-precision
/// rationals (every `f64` is one), where the inequality is checked exactly.
pub mod exact {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Zero;

    use super::ParameterPoint;

    pub fn rational(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite value")
    }

    fn max(x: BigRational, y: BigRational) -> BigRational {
        if x >= y {
            x
        } else {
            y
        }
    }

    /// `f*_{a,b}` (or `f_{a,b}`) at one vertex, exactly.
    pub fn slice_value(
        p: ParameterPoint,
        f1: f64,
        f2: f64,
        normalized: bool,
    ) -> BigRational {
        let a = rational(p.a);
        let b = rational(p.b);
        let one = BigRational::from_integer(BigInt::from(1));
        let br1 = (rational(f1) - &b) / &a;
        let br2 = (rational(f2) + &b) / (&one - &a);
        let raw = max(br1, br2);
        if normalized {
            let m = if a <= &one - &a {
                a
            } else {
                one - rational(p.a)
            };
            m * raw
        } else {
            raw
        }
    }

    /// Whether `|f*(x) - g*(x)| <= max(|f1-g1|, |f2-g2|)` holds exactly at
    /// one vertex.
    pub fn contraction_holds(p: ParameterPoint, fv: (f64, f64), gv: (f64, f64)) -> bool {
        let lhs = {
            let d = slice_value(p, fv.0, fv.1, true) - slice_value(p, gv.0, gv.1, true);
            if d < BigRational::zero() {
                -d
            } else {
                d
            }
        };
        let abs = |x: BigRational| {
            if x < BigRational::zero() {
                -x
            } else {
                x
            }
        };
        let rhs = max(
            abs(rational(fv.0) - rational(gv.0)),
            abs(rational(fv.1) - rational(gv.1)),
        );
        lhs <= rhs
    }
}
