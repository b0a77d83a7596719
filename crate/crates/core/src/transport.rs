//! Transport of cornerpoints and matchings along parameter paths.
//!
//! A path `c: [0,1] -> Reg(f)` induces a continuous family of normalized
//! slice diagrams; each proper cornerpoint of the starting diagram admits a
//! unique admissible continuation along the family, computed here by
//! adaptive stepping: a step from `t1` to `t2` is accepted when twice the
//! certified bound on the slice-function deviation stays below the diagram
//! separations at both ends (and below the near-diagonal gap when a track is
//! close to the diagonal). One-dimensional stability then makes the
//! nearest-neighbor pairing of consecutive diagrams unambiguous. The same
//! engine drives transport across the linear homotopy between two scalar
//! fields, and looping a whole diagram around a singular pair extracts the
//! induced monodromy permutation.

use thiserror::Error;

use crate::complex::{Bifiltration, SimplicialComplex};
use crate::field::PrimeField;
use crate::foliation::{
    separation, slice_function, slice_oscillation_bound, FoliationError, ParameterPoint,
    ParameterRegion, SingularSet,
};
use crate::matching::{DegreeView, MatchPair, Matching, Slot};
use crate::persistence::{reduce, PersistenceDiagram, ScalarField};

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("step size underflow at tau = {tau}: the path effectively meets a singular pair")]
    StepUnderflow { tau: f64 },
    #[error("start point is not a cornerpoint of the starting diagram")]
    StartPointNotInDiagram,
    #[error("starting diagram has a multiple point: the path begins outside the regular region")]
    StartSingular,
    #[error("a path needs at least one waypoint")]
    EmptyPath,
    #[error("paths can only be concatenated where one ends and the other starts")]
    ConcatMismatch,
    #[error("loop endpoint does not land back on the starting diagram")]
    LoopEndpointMismatch,
    #[error("loop permutation did not stabilize under discretization refinement")]
    LoopUnstable,
    #[error(transparent)]
    Parameter(#[from] FoliationError),
}

/// A polyline path through parameter space, linear in `tau` on each segment
/// with waypoints at uniform `tau` spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    waypoints: Vec<ParameterPoint>,
}

impl ParameterPath {
    pub fn new(waypoints: Vec<ParameterPoint>) -> Result<Self, TransportError> {
        if waypoints.is_empty() {
            return Err(TransportError::EmptyPath);
        }
        Ok(Self { waypoints })
    }

    pub fn constant(p: ParameterPoint) -> Self {
        Self { waypoints: vec![p] }
    }

    pub fn segment(from: ParameterPoint, to: ParameterPoint) -> Self {
        Self {
            waypoints: vec![from, to],
        }
    }

    /// Closed polygonal approximation of the circle of given radius around a
    /// center, starting and ending at angle `start_angle`.
    pub fn circle(
        center: ParameterPoint,
        radius: f64,
        segments: usize,
        start_angle: f64,
    ) -> Result<Self, TransportError> {
        let mut waypoints = Vec::with_capacity(segments + 1);
        for i in 0..=segments {
            let theta = start_angle + 2.0 * std::f64::consts::PI * (i as f64) / (segments as f64);
            let a = center.a + radius * theta.cos();
            let b = center.b + radius * theta.sin();
            waypoints.push(ParameterPoint::new(a, b)?);
        }
        // close exactly
        waypoints[segments] = waypoints[0];
        Ok(Self { waypoints })
    }

    pub fn waypoints(&self) -> &[ParameterPoint] {
        &self.waypoints
    }

    pub fn start(&self) -> ParameterPoint {
        self.waypoints[0]
    }

    pub fn end(&self) -> ParameterPoint {
        *self.waypoints.last().unwrap()
    }

    pub fn reversed(&self) -> Self {
        Self {
            waypoints: self.waypoints.iter().rev().copied().collect(),
        }
    }

    /// Concatenation; the junction waypoint is kept once.
    pub fn concat(&self, other: &ParameterPath) -> Result<Self, TransportError> {
        if self.end() != other.start() {
            return Err(TransportError::ConcatMismatch);
        }
        let mut waypoints = self.waypoints.clone();
        waypoints.extend_from_slice(&other.waypoints[1..]);
        Ok(Self { waypoints })
    }

    /// Position at `tau` in `[0, 1]`.
    pub fn at(&self, tau: f64) -> ParameterPoint {
        let n = self.waypoints.len();
        if n == 1 {
            return self.waypoints[0];
        }
        let t = tau.clamp(0.0, 1.0) * ((n - 1) as f64);
        let seg = (t.floor() as usize).min(n - 2);
        let local = t - seg as f64;
        let (p, q) = (self.waypoints[seg], self.waypoints[seg + 1]);
        ParameterPoint {
            a: p.a + (q.a - p.a) * local,
            b: p.b + (q.b - p.b) * local,
        }
    }

    /// Waypoints strictly inside `(t1, t2)` plus the two endpoints.
    fn covered_points(&self, t1: f64, t2: f64) -> Vec<ParameterPoint> {
        let n = self.waypoints.len();
        let mut pts = vec![self.at(t1)];
        if n > 1 {
            for (i, w) in self.waypoints.iter().enumerate() {
                let tw = (i as f64) / ((n - 1) as f64);
                if tw > t1 && tw < t2 {
                    pts.push(*w);
                }
            }
        }
        pts.push(self.at(t2));
        pts
    }

    /// Minimal distance from any path segment to any exclusion-disk
    /// boundary; negative when a segment enters a disk.
    pub fn min_clearance(&self, singular: &SingularSet) -> f64 {
        let mut clearance = f64::INFINITY;
        for pair in &singular.pairs {
            for w in self.waypoints.windows(2) {
                let d = segment_point_distance(w[0], w[1], pair.center) - pair.radius;
                clearance = clearance.min(d);
            }
            if self.waypoints.len() == 1 {
                let d = self.waypoints[0].distance(&pair.center) - pair.radius;
                clearance = clearance.min(d);
            }
        }
        clearance
    }
}

fn segment_point_distance(p: ParameterPoint, q: ParameterPoint, x: ParameterPoint) -> f64 {
    let (dx, dy) = (q.a - p.a, q.b - p.b);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&x);
    }
    let t = (((x.a - p.a) * dx + (x.b - p.b) * dy) / len2).clamp(0.0, 1.0);
    let proj = ParameterPoint {
        a: p.a + t * dx,
        b: p.b + t * dy,
    };
    proj.distance(&x)
}

/// Straight path from `from` to `to`, detoured around exclusion disks.
///
/// Segments passing within `margin` times a disk radius are bent through a
/// waypoint pushed out perpendicular to the segment, recursively (the side
/// is chosen deterministically).
pub fn route_around(
    from: ParameterPoint,
    to: ParameterPoint,
    singular: &SingularSet,
    margin: f64,
) -> Result<ParameterPath, TransportError> {
    fn detour(
        from: ParameterPoint,
        to: ParameterPoint,
        singular: &SingularSet,
        margin: f64,
        depth: usize,
        out: &mut Vec<ParameterPoint>,
    ) -> Result<(), TransportError> {
        let blocking = singular
            .pairs
            .iter()
            .map(|s| {
                (
                    segment_point_distance(from, to, s.center) - margin * s.radius,
                    s,
                )
            })
            .filter(|(d, _)| *d < 0.0)
            .min_by(|(d1, _), (d2, _)| d1.partial_cmp(d2).unwrap());
        match blocking {
            None | Some(_) if depth == 0 => {
                out.push(to);
                Ok(())
            }
            None => {
                out.push(to);
                Ok(())
            }
            Some((_, s)) => {
                let (dx, dy) = (to.a - from.a, to.b - from.b);
                let len = (dx * dx + dy * dy).sqrt();
                if len == 0.0 {
                    out.push(to);
                    return Ok(());
                }
                // push the waypoint out of the disk, away from the center
                let t = (((s.center.a - from.a) * dx + (s.center.b - from.b) * dy) / (len * len))
                    .clamp(0.0, 1.0);
                let proj = ParameterPoint {
                    a: from.a + t * dx,
                    b: from.b + t * dy,
                };
                let off = proj.distance(&s.center);
                let dir = if off > 1e-12 {
                    (
                        (proj.a - s.center.a) / off,
                        (proj.b - s.center.b) / off,
                    )
                } else {
                    // straight through the center: take the left normal
                    (-dy / len, dx / len)
                };
                let push = 1.5 * margin * s.radius;
                let w = ParameterPoint::new(
                    s.center.a + dir.0 * push,
                    s.center.b + dir.1 * push,
                )?;
                detour(from, w, singular, margin, depth - 1, out)?;
                detour(w, to, singular, margin, depth - 1, out)
            }
        }
    }
    let mut waypoints = vec![from];
    detour(from, to, singular, margin, 8, &mut waypoints)?;
    ParameterPath::new(waypoints)
}

/// Position of a tracked cornerpoint along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrackPosition {
    /// A proper cornerpoint `(birth, death)`.
    Proper(f64, f64),
    /// Absorbed by the diagonal at projected coordinate `w` (the position
    /// is held fixed while on the diagonal).
    OnDiagonal(f64),
    /// Cornerpoint at infinity, tracked by rank among sorted essential
    /// births of its degree.
    AtInfinity { rank: usize, birth: f64 },
}

impl TrackPosition {
    pub fn slot(&self) -> Slot {
        match *self {
            TrackPosition::Proper(u, v) => Slot::Point(u, v),
            TrackPosition::OnDiagonal(_) => Slot::Diagonal,
            TrackPosition::AtInfinity { birth, .. } => Slot::Essential(birth),
        }
    }

    pub fn is_on_diagonal(&self) -> bool {
        matches!(self, TrackPosition::OnDiagonal(_))
    }
}

/// One sampled instant of a track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSample {
    pub tau: f64,
    pub position: TrackPosition,
}

/// The traced admissible path of one cornerpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerpointTrack {
    pub degree: usize,
    /// Label of the start point in the canonical order of its degree view.
    pub start_label: usize,
    pub samples: Vec<TrackSample>,
}

impl CornerpointTrack {
    pub fn endpoint(&self) -> TrackPosition {
        self.samples.last().unwrap().position
    }

    /// Maximal `tau`-intervals spent on the diagonal.
    pub fn diagonal_intervals(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut open: Option<f64> = None;
        for s in &self.samples {
            match (s.position.is_on_diagonal(), open) {
                (true, None) => open = Some(s.tau),
                (false, Some(start)) => {
                    out.push((start, s.tau));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            out.push((start, self.samples.last().unwrap().tau));
        }
        out
    }
}

/// Adaptive stepping controls.
#[derive(Debug, Clone)]
pub struct TransportConfig {
    /// Near-diagonal gap constant `k`; `+inf` disables the extra guard.
    pub gap: f64,
    /// Step underflow threshold in path parameter.
    pub min_step: f64,
    pub init_step: f64,
    pub max_step: f64,
    /// Coefficient field for the slice diagrams.
    pub coeffs: PrimeField,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            gap: f64::INFINITY,
            min_step: 1e-9,
            init_step: 0.05,
            max_step: 0.25,
            coeffs: PrimeField::z2(),
        }
    }
}

/// A one-parameter family of scalar fields with a certified deviation bound.
pub trait ScalarFamily: Sync {
    fn field(&self, tau: f64) -> ScalarField;

    /// Upper bound on `max_x |field(t)(x) - field(t1)(x)|` over ALL
    /// `t` in `[t1, t2]` (not just the endpoints).
    fn deviation_bound(&self, t1: f64, t2: f64) -> f64;
}

/// The family of normalized slice functions along a parameter path.
pub struct SliceFamily<'a> {
    pub f: &'a Bifiltration,
    pub path: &'a ParameterPath,
}

impl ScalarFamily for SliceFamily<'_> {
    fn field(&self, tau: f64) -> ScalarField {
        slice_function(self.f, self.path.at(tau), true)
    }

    fn deviation_bound(&self, t1: f64, t2: f64) -> f64 {
        let pts = self.path.covered_points(t1, t2);
        let mut cell = ParameterRegion {
            a_min: f64::INFINITY,
            a_max: f64::NEG_INFINITY,
            b_min: f64::INFINITY,
            b_max: f64::NEG_INFINITY,
        };
        for p in pts {
            cell.a_min = cell.a_min.min(p.a);
            cell.a_max = cell.a_max.max(p.a);
            cell.b_min = cell.b_min.min(p.b);
            cell.b_max = cell.b_max.max(p.b);
        }
        let bound = slice_oscillation_bound(self.f, &cell);
        // absorb floating-point slack of the corner evaluations
        bound * (1.0 + 1e-12) + 1e-15
    }
}

/// The linear homotopy `(1 - s) phi + s psi`.
pub struct LinearHomotopy<'a> {
    pub phi: &'a ScalarField,
    pub psi: &'a ScalarField,
}

impl ScalarFamily for LinearHomotopy<'_> {
    fn field(&self, s: f64) -> ScalarField {
        ScalarField::new(
            self.phi
                .values()
                .iter()
                .zip(self.psi.values())
                .map(|(a, b)| (1.0 - s) * a + s * b)
                .collect(),
        )
        .expect("finite inputs")
    }

    fn deviation_bound(&self, t1: f64, t2: f64) -> f64 {
        let d = self.phi.sup_distance(self.psi);
        (t2 - t1).abs() * d * (1.0 + 1e-12) + 1e-15
    }
}

/// Internal per-label transport state.
struct Bundle {
    degrees: Vec<usize>,
    labels: Vec<usize>,
    positions: Vec<TrackPosition>,
}

/// Transport a set of tracked positions along a scalar family.
///
/// All tracks advance in lockstep; a trial step is accepted only when the
/// pairing of every track against the new diagram is unambiguous.
fn transport_bundle<F: ScalarFamily>(
    complex: &SimplicialComplex,
    family: &F,
    starts: Vec<(usize, usize, TrackPosition)>,
    config: &TransportConfig,
) -> Result<Vec<CornerpointTrack>, TransportError> {
    let coeffs = config.coeffs;
    let start_field = family.field(0.0);
    let start_dgm = reduce(complex, &start_field, coeffs);
    if separation(&start_dgm) == 0.0 {
        return Err(TransportError::StartSingular);
    }
    // verify starts and record samples
    let mut bundle = Bundle {
        degrees: Vec::new(),
        labels: Vec::new(),
        positions: Vec::new(),
    };
    for (degree, label, pos) in starts {
        if let TrackPosition::Proper(u, v) = pos {
            let view = DegreeView::of(&start_dgm, degree);
            if !view.proper.contains(&(u, v)) {
                return Err(TransportError::StartPointNotInDiagram);
            }
        }
        bundle.degrees.push(degree);
        bundle.labels.push(label);
        bundle.positions.push(pos);
    }
    let mut tracks: Vec<CornerpointTrack> = bundle
        .degrees
        .iter()
        .zip(&bundle.labels)
        .zip(&bundle.positions)
        .map(|((&degree, &label), &position)| CornerpointTrack {
            degree,
            start_label: label,
            samples: vec![TrackSample {
                tau: 0.0,
                position,
            }],
        })
        .collect();

    let mut tau = 0.0_f64;
    let mut sep_here = separation(&start_dgm);
    let mut dgm_here = start_dgm;
    let mut h = config.init_step;
    while tau < 1.0 {
        let mut step = h.min(1.0 - tau);
        let accepted = loop {
            let t2 = (tau + step).min(1.0);
            let delta = family.deviation_bound(tau, t2);
            let dgm_next = reduce(complex, &family.field(t2), coeffs);
            let sep_next = separation(&dgm_next);
            let gate_sep = 2.0 * delta < sep_here.min(sep_next);
            // the near-diagonal gap only constrains tracks close to the
            // diagonal (absorbed, or within re-emergence range)
            let near_diag = bundle.positions.iter().any(|p| match p {
                TrackPosition::OnDiagonal(_) => true,
                TrackPosition::Proper(u, v) => (v - u) / 2.0 <= 2.0 * delta,
                TrackPosition::AtInfinity { .. } => false,
            });
            let gate_gap = !near_diag || 2.0 * delta < config.gap;
            if gate_sep && gate_gap {
                if let Some(new_positions) = pair_step(&bundle, &dgm_next, delta) {
                    break Some((t2, dgm_next, sep_next, new_positions));
                }
            }
            step /= 2.0;
            if step < config.min_step {
                break None;
            }
        };
        let Some((t2, dgm_next, sep_next, new_positions)) = accepted else {
            return Err(TransportError::StepUnderflow { tau });
        };
        bundle.positions = new_positions;
        for (track, &position) in tracks.iter_mut().zip(&bundle.positions) {
            track.samples.push(TrackSample { tau: t2, position });
        }
        h = (step * 2.0).min(config.max_step);
        tau = t2;
        dgm_here = dgm_next;
        sep_here = sep_next;
    }
    let _ = dgm_here;
    Ok(tracks)
}

/// Nearest-neighbor pairing of every tracked position against the next
/// diagram; `None` when any pairing is ambiguous at this step size.
fn pair_step(
    bundle: &Bundle,
    dgm_next: &PersistenceDiagram,
    delta: f64,
) -> Option<Vec<TrackPosition>> {
    let scan = delta * (1.0 + 1e-9) + 1e-300;
    let mut views: Vec<Option<DegreeView>> = Vec::new();
    let mut view_of = |degree: usize, views: &mut Vec<Option<DegreeView>>| {
        while views.len() <= degree {
            views.push(None);
        }
        if views[degree].is_none() {
            views[degree] = Some(DegreeView::of(dgm_next, degree));
        }
        views[degree].clone().unwrap()
    };
    let mut out = Vec::with_capacity(bundle.positions.len());
    for (&degree, &pos) in bundle.degrees.iter().zip(&bundle.positions) {
        let view = view_of(degree, &mut views);
        match pos {
            TrackPosition::Proper(u, v) => {
                let close: Vec<(f64, f64)> = view
                    .proper
                    .iter()
                    .copied()
                    .filter(|(u2, v2)| (u2 - u).abs().max((v2 - v).abs()) <= scan)
                    .collect();
                match close.len() {
                    1 => out.push(TrackPosition::Proper(close[0].0, close[0].1)),
                    0 => {
                        if (v - u) / 2.0 <= scan {
                            out.push(TrackPosition::OnDiagonal((u + v) / 2.0));
                        } else {
                            return None;
                        }
                    }
                    _ => return None,
                }
            }
            TrackPosition::OnDiagonal(w) => {
                let close: Vec<(f64, f64)> = view
                    .proper
                    .iter()
                    .copied()
                    .filter(|(u2, v2)| (u2 - w).abs().max((v2 - w).abs()) <= scan)
                    .collect();
                match close.len() {
                    0 => out.push(TrackPosition::OnDiagonal(w)),
                    1 => out.push(TrackPosition::Proper(close[0].0, close[0].1)),
                    _ => return None,
                }
            }
            TrackPosition::AtInfinity { rank, .. } => {
                // essential classes persist; rank tracking is deterministic
                if rank >= view.essential.len() {
                    return None;
                }
                out.push(TrackPosition::AtInfinity {
                    rank,
                    birth: view.essential[rank],
                });
            }
        }
    }
    Some(out)
}

/// Transport one proper cornerpoint of `Dgm(f*_{c(0)})` along a path.
pub fn transport_point(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    degree: usize,
    start: (f64, f64),
    path: &ParameterPath,
    config: &TransportConfig,
) -> Result<CornerpointTrack, TransportError> {
    let family = SliceFamily { f, path };
    let start_dgm = reduce(complex, &family.field(0.0), config.coeffs);
    let view = DegreeView::of(&start_dgm, degree);
    let label = view
        .proper
        .iter()
        .position(|&p| p == start)
        .ok_or(TransportError::StartPointNotInDiagram)?;
    let tracks = transport_bundle(
        complex,
        &family,
        vec![(degree, label, TrackPosition::Proper(start.0, start.1))],
        config,
    )?;
    Ok(tracks.into_iter().next().unwrap())
}

/// Tracks of every cornerpoint (proper and at infinity) of the starting
/// diagram of a family, labeled in the canonical per-degree order.
pub fn transport_whole_diagram<F: ScalarFamily>(
    complex: &SimplicialComplex,
    family: &F,
    config: &TransportConfig,
) -> Result<Vec<CornerpointTrack>, TransportError> {
    let start_dgm = reduce(complex, &family.field(0.0), config.coeffs);
    let mut starts: Vec<(usize, usize, TrackPosition)> = Vec::new();
    for degree in 0..start_dgm.degree_count() {
        let view = DegreeView::of(&start_dgm, degree);
        for (label, &(u, v)) in view.proper.iter().enumerate() {
            starts.push((degree, label, TrackPosition::Proper(u, v)));
        }
        for (rank, &birth) in view.essential.iter().enumerate() {
            starts.push((degree, rank, TrackPosition::AtInfinity { rank, birth }));
        }
    }
    transport_bundle(complex, family, starts, config)
}

/// The tracks of a whole-diagram transport, split by kind for lookups.
pub struct DiagramTransport {
    pub tracks: Vec<CornerpointTrack>,
}

impl DiagramTransport {
    /// Endpoint of the proper-point track with a given degree and label.
    pub fn proper_endpoint(&self, degree: usize, label: usize) -> Option<TrackPosition> {
        self.tracks
            .iter()
            .find(|t| {
                t.degree == degree
                    && t.start_label == label
                    && !matches!(
                        t.samples[0].position,
                        TrackPosition::AtInfinity { .. }
                    )
            })
            .map(|t| t.endpoint())
    }

    pub fn essential_endpoint(&self, degree: usize, rank: usize) -> Option<TrackPosition> {
        self.tracks
            .iter()
            .find(|t| {
                t.degree == degree
                    && t.start_label == rank
                    && matches!(t.samples[0].position, TrackPosition::AtInfinity { .. })
            })
            .map(|t| t.endpoint())
    }
}

/// Transport the diagram of `f` along a parameter path.
pub fn transport_diagram(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    path: &ParameterPath,
    config: &TransportConfig,
) -> Result<DiagramTransport, TransportError> {
    let family = SliceFamily { f, path };
    Ok(DiagramTransport {
        tracks: transport_whole_diagram(complex, &family, config)?,
    })
}

/// A matching transported to the end of a path: the pair `(X', Y')` belongs
/// to the result iff the `f`-track from `X` ends at `X'` and the `g`-track
/// from `Y = sigma(X)` ends at `Y'`.
#[derive(Debug, Clone)]
pub struct TransportedMatching {
    pub source: Matching,
    pub f_transport: Vec<CornerpointTrack>,
    pub g_transport: Vec<CornerpointTrack>,
    pub cost: f64,
}

/// Transport a matching (at `c(0)`, in one degree) along a path with respect
/// to the pair `(f, g)`.
pub fn transport_matching(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    g: &Bifiltration,
    source: &Matching,
    path: &ParameterPath,
    config: &TransportConfig,
) -> Result<TransportedMatching, TransportError> {
    let f_side = transport_diagram(complex, f, path, config)?;
    let g_side = transport_diagram(complex, g, path, config)?;
    let cost = transported_cost(source, &f_side, &g_side);
    Ok(TransportedMatching {
        source: source.clone(),
        f_transport: f_side.tracks,
        g_transport: g_side.tracks,
        cost,
    })
}

/// Cost of a source matching evaluated at the transported endpoints.
pub fn transported_cost(
    source: &Matching,
    f_side: &DiagramTransport,
    g_side: &DiagramTransport,
) -> f64 {
    use crate::matching::point_distance;
    let degree = source.degree;
    let mut worst = 0.0_f64;
    for pair in &source.pairs {
        let d = match *pair {
            MatchPair::Points { left, right } => {
                let x = f_side.proper_endpoint(degree, left).expect("tracked");
                let y = g_side.proper_endpoint(degree, right).expect("tracked");
                point_distance(&x.slot(), &y.slot())
            }
            MatchPair::LeftToDiagonal { left } => {
                let x = f_side.proper_endpoint(degree, left).expect("tracked");
                point_distance(&x.slot(), &Slot::Diagonal)
            }
            MatchPair::RightToDiagonal { right } => {
                let y = g_side.proper_endpoint(degree, right).expect("tracked");
                point_distance(&Slot::Diagonal, &y.slot())
            }
            MatchPair::Essential { left, right } => {
                let x = f_side.essential_endpoint(degree, left).expect("tracked");
                let y = g_side.essential_endpoint(degree, right).expect("tracked");
                point_distance(&x.slot(), &y.slot())
            }
        };
        worst = worst.max(d);
    }
    worst
}

/// Transport one cornerpoint of `Dgm(phi)` across the linear homotopy to
/// `psi`; the endpoint may lie on the diagonal.
pub fn transport_across_homotopy(
    complex: &SimplicialComplex,
    phi: &ScalarField,
    psi: &ScalarField,
    degree: usize,
    start: (f64, f64),
    config: &TransportConfig,
) -> Result<CornerpointTrack, TransportError> {
    let family = LinearHomotopy { phi, psi };
    let start_dgm = reduce(complex, &family.field(0.0), config.coeffs);
    let view = DegreeView::of(&start_dgm, degree);
    let label = view
        .proper
        .iter()
        .position(|&p| p == start)
        .ok_or(TransportError::StartPointNotInDiagram)?;
    let tracks = transport_bundle(
        complex,
        &family,
        vec![(degree, label, TrackPosition::Proper(start.0, start.1))],
        config,
    )?;
    Ok(tracks.into_iter().next().unwrap())
}

/// The matching `Dgm(phi) -> Dgm(psi)` obtained by transporting every
/// cornerpoint across the linear homotopy (the identity deformed along
/// `G_s`). Points absorbed by the diagonal map to it; unclaimed points of
/// the target diagram come from it.
pub fn homotopy_matching(
    complex: &SimplicialComplex,
    phi: &ScalarField,
    psi: &ScalarField,
    degree: usize,
    config: &TransportConfig,
) -> Result<Matching, TransportError> {
    let family = LinearHomotopy { phi, psi };
    let tracks = transport_whole_diagram(complex, &family, config)?;
    let target = reduce(complex, psi, config.coeffs);
    let target_view = DegreeView::of(&target, degree);
    let mut pairs: Vec<MatchPair> = Vec::new();
    let mut right_used = vec![false; target_view.proper.len()];
    for t in tracks.iter().filter(|t| t.degree == degree) {
        match t.samples[0].position {
            TrackPosition::Proper(..) => match t.endpoint() {
                TrackPosition::Proper(u, v) => {
                    let right = target_view
                        .proper
                        .iter()
                        .position(|&p| p == (u, v) && !right_used[target_view.proper.iter().position(|&q| q == p).unwrap()])
                        .or_else(|| {
                            target_view
                                .proper
                                .iter()
                                .enumerate()
                                .filter(|(j, _)| !right_used[*j])
                                .min_by(|(_, x), (_, y)| {
                                    let dx = (x.0 - u).abs().max((x.1 - v).abs());
                                    let dy = (y.0 - u).abs().max((y.1 - v).abs());
                                    dx.partial_cmp(&dy).unwrap()
                                })
                                .map(|(j, _)| j)
                        })
                        .ok_or(TransportError::LoopEndpointMismatch)?;
                    right_used[right] = true;
                    pairs.push(MatchPair::Points {
                        left: t.start_label,
                        right,
                    });
                }
                TrackPosition::OnDiagonal(_) => {
                    pairs.push(MatchPair::LeftToDiagonal {
                        left: t.start_label,
                    });
                }
                TrackPosition::AtInfinity { .. } => unreachable!("proper tracks stay finite"),
            },
            TrackPosition::AtInfinity { rank, .. } => {
                pairs.push(MatchPair::Essential {
                    left: rank,
                    right: rank,
                });
            }
            TrackPosition::OnDiagonal(_) => unreachable!("tracks start off-diagonal"),
        }
    }
    for (j, used) in right_used.iter().enumerate() {
        if !used {
            pairs.push(MatchPair::RightToDiagonal { right: j });
        }
    }
    Ok(Matching { degree, pairs })
}

/// Permutations of the canonical per-degree proper-point labels induced by a
/// closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPermutation {
    /// `perms[degree][label] = endpoint label`.
    pub perms: Vec<Vec<usize>>,
    /// Number of circle segments at which the permutation stabilized.
    pub segments: usize,
}

impl LoopPermutation {
    pub fn is_identity(&self) -> bool {
        self.perms
            .iter()
            .all(|p| p.iter().enumerate().all(|(i, &j)| i == j))
    }

    /// Apply the loop twice.
    pub fn squared(&self) -> LoopPermutation {
        LoopPermutation {
            perms: self
                .perms
                .iter()
                .map(|p| p.iter().map(|&j| p[j]).collect())
                .collect(),
            segments: self.segments,
        }
    }

    /// Cycle notation per degree, e.g. `"(0 1)"`; identity prints as `"()"`.
    pub fn cycle_notation(&self, degree: usize) -> String {
        let Some(p) = self.perms.get(degree) else {
            return "()".into();
        };
        let mut seen = vec![false; p.len()];
        let mut out = String::new();
        for start in 0..p.len() {
            if seen[start] || p[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut next = p[start];
            while next != start {
                seen[next] = true;
                cycle.push(next);
                next = p[next];
            }
            out.push('(');
            out.push_str(
                &cycle
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

/// Transport the whole diagram once around a closed polygonal loop and read
/// off the induced permutation of start labels.
fn loop_permutation_once(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    loop_path: &ParameterPath,
    config: &TransportConfig,
) -> Result<LoopPermutation, TransportError> {
    let transport = transport_diagram(complex, f, loop_path, config)?;
    let start_dgm = reduce(
        complex,
        &slice_function(f, loop_path.start(), true),
        config.coeffs,
    );
    let degrees = start_dgm.degree_count();
    let mut perms: Vec<Vec<usize>> = Vec::with_capacity(degrees);
    for degree in 0..degrees {
        let view = DegreeView::of(&start_dgm, degree);
        let mut perm = vec![usize::MAX; view.proper.len()];
        for label in 0..view.proper.len() {
            let end = transport
                .proper_endpoint(degree, label)
                .ok_or(TransportError::LoopEndpointMismatch)?;
            let TrackPosition::Proper(u, v) = end else {
                return Err(TransportError::LoopEndpointMismatch);
            };
            // the final diagram equals the start diagram, so endpoints are
            // literal elements of the start view
            let target = view
                .proper
                .iter()
                .position(|&p| p == (u, v))
                .ok_or(TransportError::LoopEndpointMismatch)?;
            perm[label] = target;
        }
        // bijectivity
        let mut seen = vec![false; perm.len()];
        for &t in &perm {
            if t == usize::MAX || seen[t] {
                return Err(TransportError::LoopEndpointMismatch);
            }
            seen[t] = true;
        }
        perms.push(perm);
    }
    Ok(LoopPermutation { perms, segments: 0 })
}

/// Monodromy permutation induced by one loop around a singular pair.
///
/// The circle is discretized with at least `min_segments` segments, doubled
/// until the permutation is unchanged across two consecutive doublings.
pub fn loop_permutation(
    complex: &SimplicialComplex,
    f: &Bifiltration,
    center: ParameterPoint,
    radius: f64,
    basepoint_angle: f64,
    min_segments: usize,
    config: &TransportConfig,
) -> Result<LoopPermutation, TransportError> {
    let mut segments = min_segments.max(8);
    let mut history: Vec<LoopPermutation> = Vec::new();
    // two consecutive doublings must agree
    for _ in 0..8 {
        let path = ParameterPath::circle(center, radius, segments, basepoint_angle)?;
        let mut perm = loop_permutation_once(complex, f, &path, config)?;
        perm.segments = segments;
        history.push(perm);
        let n = history.len();
        if n >= 3
            && history[n - 1].perms == history[n - 2].perms
            && history[n - 2].perms == history[n - 3].perms
        {
            return Ok(history.pop().unwrap());
        }
        segments *= 2;
    }
    Err(TransportError::LoopUnstable)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn p(a: f64, b: f64) -> ParameterPoint {
        ParameterPoint::new(a, b).unwrap()
    }

    fn first_proper(
        complex: &SimplicialComplex,
        f: &Bifiltration,
        at: ParameterPoint,
        degree: usize,
    ) -> (f64, f64) {
        let dgm = reduce(
            complex,
            &slice_function(f, at, true),
            PrimeField::z2(),
        );
        DegreeView::of(&dgm, degree).proper[0]
    }

    #[test]
    fn constant_path_is_identity() {
        let (k, f) = fixtures::monodromy_fixture();
        let at = p(0.35, 0.05);
        let start = first_proper(&k, &f, at, 0);
        let track = transport_point(
            &k,
            &f,
            0,
            start,
            &ParameterPath::constant(at),
            &TransportConfig::default(),
        )
        .unwrap();
        assert_eq!(track.endpoint(), TrackPosition::Proper(start.0, start.1));
    }

    #[test]
    fn round_trip_is_identity() {
        let (k, f) = fixtures::monodromy_fixture();
        let from = p(0.35, 0.05);
        let to = p(0.32, -0.08);
        let start = first_proper(&k, &f, from, 0);
        let path = ParameterPath::segment(from, to)
            .concat(&ParameterPath::segment(to, from))
            .unwrap();
        let track =
            transport_point(&k, &f, 0, start, &path, &TransportConfig::default()).unwrap();
        assert_eq!(track.endpoint(), TrackPosition::Proper(start.0, start.1));
    }

    #[test]
    fn rejects_start_point_not_in_diagram() {
        let (k, f) = fixtures::monodromy_fixture();
        let at = p(0.35, 0.05);
        let err = transport_point(
            &k,
            &f,
            0,
            (123.0, 456.0),
            &ParameterPath::constant(at),
            &TransportConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, TransportError::StartPointNotInDiagram);
    }

    #[test]
    fn path_through_singular_pair_underflows() {
        let (k, f) = fixtures::monodromy_fixture();
        let (sa, sb) = fixtures::MONODROMY_SINGULAR_PAIR;
        // straight through the singular pair
        let path = ParameterPath::segment(p(sa - 0.05, sb), p(sa + 0.05, sb));
        let start = first_proper(&k, &f, path.start(), 0);
        let err = transport_point(&k, &f, 0, start, &path, &TransportConfig::default());
        assert!(
            matches!(err, Err(TransportError::StepUnderflow { .. })),
            "{err:?}"
        );
    }

    #[test]
    fn fine_step_oracle_agrees_on_monodromy_fixture() {
        // brute-force fine uniform stepping with plain nearest-neighbor
        // pairing, fully independent of the adaptive engine
        let (k, f) = fixtures::monodromy_fixture();
        let from = p(0.32, -0.06);
        let to = p(0.2, 0.05);
        let path = ParameterPath::segment(from, to);
        let coeffs = PrimeField::z2();

        let start = first_proper(&k, &f, from, 0);
        let steps = 10_000;
        let mut pos = start;
        for i in 1..=steps {
            let q = path.at(i as f64 / steps as f64);
            let dgm = reduce(&k, &slice_function(&f, q, true), coeffs);
            let view = DegreeView::of(&dgm, 0);
            pos = *view
                .proper
                .iter()
                .min_by(|x, y| {
                    let dx = (x.0 - pos.0).abs().max((x.1 - pos.1).abs());
                    let dy = (y.0 - pos.0).abs().max((y.1 - pos.1).abs());
                    dx.partial_cmp(&dy).unwrap()
                })
                .unwrap();
        }

        let track =
            transport_point(&k, &f, 0, start, &path, &TransportConfig::default()).unwrap();
        assert_eq!(track.endpoint(), TrackPosition::Proper(pos.0, pos.1));
    }

    #[test]
    fn concatenation_composes() {
        let (k, f) = fixtures::monodromy_fixture();
        let (p1, p2, p3) = (p(0.35, 0.05), p(0.32, -0.06), p(0.2, 0.05));
        let c1 = ParameterPath::segment(p1, p2);
        let c2 = ParameterPath::segment(p2, p3);
        let whole = c1.concat(&c2).unwrap();
        let config = TransportConfig::default();
        let start = first_proper(&k, &f, p1, 0);
        let direct = transport_point(&k, &f, 0, start, &whole, &config).unwrap();
        let leg1 = transport_point(&k, &f, 0, start, &c1, &config).unwrap();
        let TrackPosition::Proper(u, v) = leg1.endpoint() else {
            panic!("landed on diagonal")
        };
        let leg2 = transport_point(&k, &f, 0, (u, v), &c2, &config).unwrap();
        assert_eq!(direct.endpoint(), leg2.endpoint());
    }

    #[test]
    fn homotopy_transport_identity_and_shift() {
        let k = fixtures::octahedron();
        let phi = fixtures::random_scalar_field(&k, 5);
        let config = TransportConfig::default();
        let dgm = reduce(&k, &phi, PrimeField::z2());
        // find a degree with a proper point
        let mut start = None;
        for degree in 0..dgm.degree_count() {
            let view = DegreeView::of(&dgm, degree);
            if let Some(&pt) = view.proper.first() {
                start = Some((degree, pt));
            }
        }
        let Some((degree, pt)) = start else {
            panic!("fixture has no proper points; pick another seed")
        };
        // psi = phi: endpoint is the start
        let t = transport_across_homotopy(&k, &phi, &phi, degree, pt, &config).unwrap();
        assert_eq!(t.endpoint(), TrackPosition::Proper(pt.0, pt.1));
        // psi = phi + c: the whole diagram shifts by (c, c)
        let c = 0.35;
        let psi =
            ScalarField::new(phi.values().iter().map(|v| v + c).collect()).unwrap();
        let t = transport_across_homotopy(&k, &phi, &psi, degree, pt, &config).unwrap();
        let TrackPosition::Proper(u, v) = t.endpoint() else {
            panic!("died on diagonal")
        };
        assert!((u - (pt.0 + c)).abs() < 1e-12 && (v - (pt.1 + c)).abs() < 1e-12);
    }

    #[test]
    fn homotopy_endpoint_within_stability_bound() {
        let k = fixtures::octahedron();
        let phi = fixtures::random_scalar_field(&k, 5);
        let config = TransportConfig::default();
        for seed in 0..10 {
            let psi = fixtures::perturb_scalar_field(&phi, seed, 0.05);
            let bound = phi.sup_distance(&psi);
            let dgm = reduce(&k, &phi, PrimeField::z2());
            for degree in 0..dgm.degree_count() {
                let view = DegreeView::of(&dgm, degree);
                for &pt in &view.proper {
                    let t = transport_across_homotopy(&k, &phi, &psi, degree, pt, &config)
                        .unwrap();
                    let d = crate::matching::point_distance(
                        &Slot::Point(pt.0, pt.1),
                        &t.endpoint().slot(),
                    );
                    assert!(d <= bound + 1e-12, "moved {d} > {bound}");
                }
            }
        }
    }

    #[test]
    fn loop_with_no_enclosed_singular_pair_is_identity() {
        let (k, f) = fixtures::monodromy_fixture();
        let config = TransportConfig::default();
        let perm = loop_permutation(&k, &f, p(0.35, 0.05), 0.02, 0.0, 16, &config).unwrap();
        assert!(perm.is_identity());
    }

    #[test]
    fn loop_around_monodromy_fixture_swaps_cornerpoints() {
        let (k, f) = fixtures::monodromy_fixture();
        let (sa, sb) = fixtures::MONODROMY_SINGULAR_PAIR;
        let config = TransportConfig::default();
        let perm =
            loop_permutation(&k, &f, p(sa, sb), 0.04, 0.0, 16, &config).unwrap();
        assert!(!perm.is_identity());
        assert_eq!(perm.perms[0], vec![1, 0]);
        assert_eq!(perm.cycle_notation(0), "(0 1)");
        assert!(perm.squared().is_identity());
    }

    #[test]
    fn crossing_fixture_loop_is_identity_despite_singularity() {
        // two disjoint features: the diagram points cross but each feature's
        // coordinates are globally continuous, so no monodromy
        let (k, f) = fixtures::crossing_fixture();
        let (sa, sb) = fixtures::CROSSING_SINGULAR_PAIR;
        let config = TransportConfig::default();
        let perm =
            loop_permutation(&k, &f, p(sa, sb), 0.04, 0.0, 16, &config).unwrap();
        assert!(perm.is_identity());
    }

    #[test]
    fn transport_matching_identity_when_functions_equal() {
        let (k, f) = fixtures::monodromy_fixture();
        let from = p(0.35, 0.05);
        let to = p(0.32, -0.08);
        let dgm = reduce(&k, &slice_function(&f, from, true), PrimeField::z2());
        let view = DegreeView::of(&dgm, 0);
        let source = Matching::identity(&view);
        let path = ParameterPath::segment(from, to);
        let res = transport_matching(&k, &f, &f, &source, &path, &TransportConfig::default())
            .unwrap();
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn step_refinement_leaves_endpoints_unchanged() {
        let (k, f) = fixtures::monodromy_fixture();
        let path = ParameterPath::segment(p(0.32, -0.06), p(0.2, 0.05));
        let start = first_proper(&k, &f, path.start(), 0);
        let coarse = TransportConfig::default();
        let fine = TransportConfig {
            init_step: coarse.init_step / 2.0,
            max_step: coarse.max_step / 2.0,
            ..coarse.clone()
        };
        let t1 = transport_point(&k, &f, 0, start, &path, &coarse).unwrap();
        let t2 = transport_point(&k, &f, 0, start, &path, &fine).unwrap();
        assert_eq!(t1.endpoint(), t2.endpoint());
    }

    #[test]
    fn route_around_keeps_clearance() {
        let mut singular = SingularSet::default();
        singular.insert_failure(p(0.25, 0.0), 0.02, crate::foliation::FnTag::F);
        let path = route_around(p(0.1, 0.0), p(0.4, 0.0), &singular, 2.0).unwrap();
        assert!(path.min_clearance(&singular) > 0.0);
        assert_eq!(path.start(), p(0.1, 0.0));
        assert_eq!(path.end(), p(0.4, 0.0));
    }

    #[test]
    fn diagonal_absorption_and_reemergence() {
        // a point with small persistence dies along the homotopy and returns
        let k = crate::complex::SimplicialComplex::build(
            3,
            &[vec![0, 1], vec![1, 2]],
            crate::complex::BuildMode::Strict,
        )
        .unwrap();
        // path graph: minima at 0 and 2, saddle at 1
        let phi = ScalarField::new(vec![0.0, 1.0, 0.8]).unwrap();
        // pull the younger minimum up to the saddle and back
        let psi = ScalarField::new(vec![0.0, 1.0, 1.0]).unwrap();
        let config = TransportConfig {
            gap: f64::INFINITY,
            ..Default::default()
        };
        let start = (0.8, 1.0);
        // forward: dies on the diagonal
        let t = transport_across_homotopy(&k, &phi, &psi, 0, start, &config).unwrap();
        assert!(t.endpoint().is_on_diagonal());
        assert!(!t.diagonal_intervals().is_empty());
        // there and back: re-emerges at the start
        let roundtrip = ScalarField::new(vec![0.0, 1.0, 0.8]).unwrap();
        let back = transport_across_homotopy(&k, &psi, &roundtrip, 0, (1.0, 1.0), &config);
        // the start (1.0, 1.0) is a diagonal point, not in the diagram:
        // transporting it must be rejected
        assert!(back.is_err());
    }

    #[test]
    fn track_csv_fields_monotone_tau() {
        let (k, f) = fixtures::monodromy_fixture();
        let path = ParameterPath::segment(p(0.32, -0.06), p(0.2, 0.05));
        let start = first_proper(&k, &f, path.start(), 0);
        let track =
            transport_point(&k, &f, 0, start, &path, &TransportConfig::default()).unwrap();
        assert!(track.samples.windows(2).all(|w| w[0].tau < w[1].tau));
        assert_eq!(track.samples.first().unwrap().tau, 0.0);
        assert_eq!(track.samples.last().unwrap().tau, 1.0);
    }
}
