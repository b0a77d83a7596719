//! Persistence diagrams of scalar vertex functions.
//!
//! Two independent routes are provided. [`reduce`] runs the standard
//! boundary-matrix reduction over the lower-star filtration (each simplex
//! enters at the max of its vertex values) and is the production path.
//! [`pbn_oracle`] and [`multiplicity_oracle`] evaluate the persistent Betti
//! number and the cornerpoint multiplicity directly from their definitions,
//! by Gaussian elimination on sublevel complexes; [`oracle_diagram`] turns
//! them into a whole diagram. The two routes share nothing past the boundary
//! maps, which is what makes their agreement a meaningful check.

use std::collections::HashMap;

use thiserror::Error;

use crate::complex::{SimplexId, SimplicialComplex};
use crate::field::{DenseMatrix, PrimeField};

#[derive(Debug, Error, PartialEq)]
pub enum PersistenceError {
    #[error("invalid window: require u < v, got u = {u}, v = {v}")]
    InvalidWindow { u: f64, v: f64 },
    #[error("scalar field has {got} values for {expected} vertices")]
    ValueCountMismatch { got: usize, expected: usize },
    #[error("non-finite value at vertex {0}")]
    NonFiniteValue(usize),
}

/// A real-valued function on the vertices of a complex.
///
/// The induced simplex value is the max over its vertices, which forces
/// monotonicity under the face relation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self, PersistenceError> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(PersistenceError::NonFiniteValue(i));
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, vertex: usize) -> f64 {
        self.values[vertex]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Lower-star extension: max of the vertex values of a simplex.
    pub fn simplex_value(&self, complex: &SimplicialComplex, id: SimplexId) -> f64 {
        complex
            .simplex(id)
            .iter()
            .map(|&v| self.values[v as usize])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_x |phi(x) - psi(x)|`.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Death coordinate of a cornerpoint: finite, or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Death {
    Finite(f64),
    Infinity,
}

impl Death {
    pub fn is_finite(&self) -> bool {
        matches!(self, Death::Finite(_))
    }

    /// As an `f64`, with `+inf` for the point at infinity.
    pub fn as_f64(&self) -> f64 {
        match self {
            Death::Finite(v) => *v,
            Death::Infinity => f64::INFINITY,
        }
    }
}

/// A diagram point `(u, v)` with its homology degree and multiplicity.
///
/// Proper cornerpoints have `u < v` finite; cornerpoints at infinity have
/// `v = inf`. The diagonal is implicit and never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cornerpoint {
    pub birth: f64,
    pub death: Death,
    pub degree: usize,
    pub multiplicity: u32,
}

impl Cornerpoint {
    pub fn is_proper(&self) -> bool {
        self.death.is_finite()
    }

    /// Sup-norm distance to the diagonal, `(v - u) / 2`; infinite for
    /// cornerpoints at infinity.
    pub fn diagonal_gap(&self) -> f64 {
        match self.death {
            Death::Finite(v) => (v - self.birth) / 2.0,
            Death::Infinity => f64::INFINITY,
        }
    }
}

/// Per-degree multiset of cornerpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PersistenceDiagram {
    degrees: Vec<Vec<Cornerpoint>>,
}

impl PersistenceDiagram {
    /// Build from raw `(degree, birth, death)` triples, merging coincident
    /// points into multiplicities and sorting canonically.
    pub fn from_points(points: impl IntoIterator<Item = (usize, f64, Death)>) -> Self {
        let mut degrees: Vec<Vec<Cornerpoint>> = Vec::new();
        for (degree, birth, death) in points {
            while degrees.len() <= degree {
                degrees.push(Vec::new());
            }
            degrees[degree].push(Cornerpoint {
                birth,
                death,
                degree,
                multiplicity: 1,
            });
        }
        for list in &mut degrees {
            canonicalize(list);
        }
        Self { degrees }
    }

    /// Number of degree slots (top recorded degree + 1).
    pub fn degree_count(&self) -> usize {
        self.degrees.len()
    }

    pub fn points(&self, degree: usize) -> &[Cornerpoint] {
        self.degrees.get(degree).map_or(&[], |v| v.as_slice())
    }

    pub fn all_points(&self) -> impl Iterator<Item = &Cornerpoint> {
        self.degrees.iter().flatten()
    }

    pub fn proper_points(&self, degree: usize) -> impl Iterator<Item = &Cornerpoint> {
        self.points(degree).iter().filter(|c| c.is_proper())
    }

    pub fn essential_points(&self, degree: usize) -> impl Iterator<Item = &Cornerpoint> {
        self.points(degree).iter().filter(|c| !c.is_proper())
    }

    /// Multiplicity-weighted count of proper points in a degree.
    pub fn proper_count(&self, degree: usize) -> usize {
        self.proper_points(degree)
            .map(|c| c.multiplicity as usize)
            .sum()
    }

    pub fn essential_count(&self, degree: usize) -> usize {
        self.essential_points(degree)
            .map(|c| c.multiplicity as usize)
            .sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.all_points().next().is_none()
    }

    /// Proper points of a degree with multiplicities expanded to copies.
    pub fn expanded_proper(&self, degree: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for c in self.proper_points(degree) {
            if let Death::Finite(v) = c.death {
                for _ in 0..c.multiplicity {
                    out.push((c.birth, v));
                }
            }
        }
        out
    }

    /// Essential births of a degree with multiplicities expanded.
    pub fn expanded_essential(&self, degree: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for c in self.essential_points(degree) {
            for _ in 0..c.multiplicity {
                out.push(c.birth);
            }
        }
        out
    }

    /// Apply a monotone map to every coordinate (births and finite deaths).
    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> PersistenceDiagram {
        let mut out = self.clone();
        for list in &mut out.degrees {
            for c in list.iter_mut() {
                c.birth = f(c.birth);
                if let Death::Finite(v) = c.death {
                    c.death = Death::Finite(f(v));
                }
            }
            canonicalize(list);
        }
        out
    }
}

fn canonicalize(list: &mut Vec<Cornerpoint>) {
    list.sort_by(|a, b| {
        a.birth
            .partial_cmp(&b.birth)
            .unwrap()
            .then(a.death.partial_cmp(&b.death).unwrap())
    });
    let mut merged: Vec<Cornerpoint> = Vec::with_capacity(list.len());
    for c in list.drain(..) {
        match merged.last_mut() {
            Some(prev) if prev.birth == c.birth && prev.death == c.death => {
                prev.multiplicity += c.multiplicity;
            }
            _ => merged.push(c),
        }
    }
    *list = merged;
}

/// Filtration order of all simplices: by (value, dimension, index).
///
/// Ties are broken deterministically so that equal-value reductions and the
/// matchings derived from them are reproducible.
fn filtration_order(
    complex: &SimplicialComplex,
    phi: &ScalarField,
) -> (Vec<(SimplexId, f64)>, HashMap<SimplexId, usize>) {
    let mut order: Vec<(SimplexId, f64)> = Vec::with_capacity(complex.total_simplices());
    for dim in 0..=complex.dimension() {
        for idx in 0..complex.simplex_count(dim) {
            let id = SimplexId { dim, idx };
            order.push((id, phi.simplex_value(complex, id)));
        }
    }
    order.sort_by(|(ida, va), (idb, vb)| {
        va.partial_cmp(vb)
            .unwrap()
            .then(ida.dim.cmp(&idb.dim))
            .then(ida.idx.cmp(&idb.idx))
    });
    let positions: HashMap<SimplexId, usize> =
        order.iter().enumerate().map(|(p, (id, _))| (*id, p)).collect();
    (order, positions)
}

/// Persistence diagram of the lower-star filtration of `phi`, by column
/// reduction of the boundary matrices (processed top dimension first, with a
/// clearing pass).
///
/// Zero-persistence pairs are discarded; the number of cornerpoints at
/// infinity in degree n equals the n-th Betti number of the complex.
pub fn reduce(
    complex: &SimplicialComplex,
    phi: &ScalarField,
    coeffs: PrimeField,
) -> PersistenceDiagram {
    assert_eq!(
        phi.len(),
        complex.vertex_count(),
        "scalar field must cover all vertices"
    );
    let (order, positions) = filtration_order(complex, phi);
    let value_at = |pos: usize| order[pos].1;

    let top = complex.dimension();
    let mut points: Vec<(usize, f64, Death)> = Vec::new();
    // dim-simplices whose column reduces to zero (creators of dim-classes)
    let mut positive: Vec<Vec<bool>> = (0..=top)
        .map(|d| vec![d == 0; complex.simplex_count(d)])
        .collect();
    // dim-simplices that appeared as pivot rows (creators already paired)
    let mut paired_creator: Vec<Vec<bool>> = (0..=top)
        .map(|d| vec![false; complex.simplex_count(d)])
        .collect();

    for dim in (1..=top).rev() {
        // columns sorted by filtration position
        let mut cols: Vec<(usize, usize)> = (0..complex.simplex_count(dim))
            .map(|idx| (positions[&SimplexId { dim, idx }], idx))
            .collect();
        cols.sort_unstable();

        // reduced columns by their low (filtration position of pivot row)
        let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();

        for (col_pos, idx) in cols {
            if paired_creator[dim][idx] {
                // clearing: pivot rows of the (dim+1)-reduction are known
                // positive, their columns reduce to zero
                positive[dim][idx] = true;
                continue;
            }
            let id = SimplexId { dim, idx };
            let mut column: Vec<(usize, u64)> = complex
                .facets_of(id)
                .iter()
                .enumerate()
                .map(|(k, &face)| {
                    let pos = positions[&SimplexId {
                        dim: dim - 1,
                        idx: face,
                    }];
                    let sign = if k % 2 == 0 { 1 } else { -1 };
                    (pos, coeffs.from_i64(sign))
                })
                .collect();
            column.sort_unstable_by_key(|&(pos, _)| pos);

            loop {
                let Some(&(low, coeff)) = column.last() else {
                    positive[dim][idx] = true;
                    break;
                };
                match pivots.get(&low) {
                    None => {
                        // new pivot: record pair
                        let creator_id = order[low].0;
                        debug_assert_eq!(creator_id.dim, dim - 1);
                        paired_creator[dim - 1][creator_id.idx] = true;
                        let (birth, death) = (value_at(low), value_at(col_pos));
                        if birth < death {
                            points.push((dim - 1, birth, Death::Finite(death)));
                        }
                        pivots.insert(low, column);
                        break;
                    }
                    Some(other) => {
                        let other_low_coeff = other.last().unwrap().1;
                        let factor = coeffs.mul(coeff, coeffs.inv(other_low_coeff));
                        column = column_sub(&column, other, factor, coeffs);
                    }
                }
            }
        }
    }

    // essential classes: positive simplices never paired as creators
    for dim in 0..=top {
        for idx in 0..complex.simplex_count(dim) {
            if positive[dim][idx] && !paired_creator[dim][idx] {
                let id = SimplexId { dim, idx };
                points.push((dim, phi.simplex_value(complex, id), Death::Infinity));
            }
        }
    }

    PersistenceDiagram::from_points(points)
}

/// `column - factor * other`, both sorted by position.
fn column_sub(
    column: &[(usize, u64)],
    other: &[(usize, u64)],
    factor: u64,
    coeffs: PrimeField,
) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(column.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < column.len() || j < other.len() {
        let take_left = j >= other.len() || (i < column.len() && column[i].0 < other[j].0);
        let take_right = i >= column.len() || (j < other.len() && other[j].0 < column[i].0);
        if take_left {
            out.push(column[i]);
            i += 1;
        } else if take_right {
            let (pos, c) = other[j];
            let v = coeffs.neg(coeffs.mul(factor, c));
            if v != 0 {
                out.push((pos, v));
            }
            j += 1;
        } else {
            let v = coeffs.sub(column[i].1, coeffs.mul(factor, other[j].1));
            if v != 0 {
                out.push((column[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Distinct critical values of the lower-star filtration, sorted.
///
/// Every simplex value is the value of one of its vertices, so the distinct
/// vertex values suffice.
pub fn critical_values(phi: &ScalarField) -> Vec<f64> {
    let mut values = phi.values().to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    values
}

/// Persistent Betti number (Definition route): the dimension of the image of
/// `H_n(M_u) -> H_n(M_v)`, by explicit rank computations.
///
/// `dim im = rank [B | Z] - rank B`, where `Z` is a basis of the n-cycles of
/// the sublevel complex at `u` (included into the chain space at `v`) and `B`
/// is the (n+1)-boundary matrix of the sublevel complex at `v`.
pub fn pbn_oracle(
    complex: &SimplicialComplex,
    phi: &ScalarField,
    coeffs: PrimeField,
    degree: usize,
    u: f64,
    v: f64,
) -> Result<usize, PersistenceError> {
    if !(u < v) {
        return Err(PersistenceError::InvalidWindow { u, v });
    }
    if degree > complex.dimension() {
        return Ok(0);
    }
    let sub = |dim: usize, level: f64| -> Vec<usize> {
        (0..complex.simplex_count(dim))
            .filter(|&idx| phi.simplex_value(complex, SimplexId { dim, idx }) <= level)
            .collect()
    };
    let n_at_u = sub(degree, u);
    if n_at_u.is_empty() {
        return Ok(0);
    }
    let n_at_v = sub(degree, v);
    let pos_in_v: HashMap<usize, usize> =
        n_at_v.iter().enumerate().map(|(i, &s)| (s, i)).collect();

    // kernel of the n-boundary restricted to the sublevel at u
    let z_basis: Vec<Vec<u64>> = if degree == 0 {
        // every vertex chain is a cycle
        (0..n_at_u.len())
            .map(|i| {
                let mut e = vec![0; n_at_u.len()];
                e[i] = 1;
                e
            })
            .collect()
    } else {
        let faces_at_u = sub(degree - 1, u);
        let face_pos: HashMap<usize, usize> =
            faces_at_u.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut d = DenseMatrix::zeros(coeffs, faces_at_u.len(), n_at_u.len());
        for (j, &idx) in n_at_u.iter().enumerate() {
            let id = SimplexId { dim: degree, idx };
            for (k, &face) in complex.facets_of(id).iter().enumerate() {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                d.set(face_pos[&face], j, coeffs.from_i64(sign));
            }
        }
        d.kernel_basis()
    };
    if z_basis.is_empty() {
        return Ok(0);
    }

    // boundaries (n+1 -> n) of the sublevel at v
    let cofaces_at_v = if degree + 1 > complex.dimension() {
        Vec::new()
    } else {
        sub(degree + 1, v)
    };
    let mut b = DenseMatrix::zeros(coeffs, n_at_v.len(), cofaces_at_v.len());
    for (j, &idx) in cofaces_at_v.iter().enumerate() {
        let id = SimplexId {
            dim: degree + 1,
            idx,
        };
        for (k, &face) in complex.facets_of(id).iter().enumerate() {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            b.set(pos_in_v[&face], j, coeffs.from_i64(sign));
        }
    }
    // embed the cycle basis into the chain space at v
    let mut z = DenseMatrix::zeros(coeffs, n_at_v.len(), z_basis.len());
    for (j, vector) in z_basis.iter().enumerate() {
        for (i, &coef) in vector.iter().enumerate() {
            if coef != 0 {
                z.set(pos_in_v[&n_at_u[i]], j, coef);
            }
        }
    }
    Ok(b.hstack(&z).rank() - b.rank())
}

/// Multiplicity of `(u, v)` per the alternating-sum definition, with the
/// window size chosen so the minimum over epsilon has stabilized.
///
/// For piecewise-linear data the PBN is constant between critical values, so
/// any epsilon separating `u` and `v` from the other critical values attains
/// the minimum; we take half the distance to the nearest distinct critical
/// value (capped by the window width).
pub fn multiplicity_oracle(
    complex: &SimplicialComplex,
    phi: &ScalarField,
    coeffs: PrimeField,
    degree: usize,
    u: f64,
    v: Death,
) -> Result<usize, PersistenceError> {
    let crit = critical_values(phi);
    let nearest_other = |x: f64| -> f64 {
        crit.iter()
            .filter(|&&c| c != x)
            .map(|&c| (c - x).abs())
            .fold(f64::INFINITY, f64::min)
    };
    match v {
        Death::Finite(v) => {
            if !(u < v) {
                return Err(PersistenceError::InvalidWindow { u, v });
            }
            let eps = 0.5 * nearest_other(u).min(nearest_other(v)).min((v - u) / 2.0);
            let eps = if eps.is_finite() { eps } else { (v - u) / 4.0 };
            let b = |uu: f64, vv: f64| pbn_oracle(complex, phi, coeffs, degree, uu, vv);
            let total = b(u + eps, v - eps)? as i64 - b(u - eps, v - eps)? as i64
                - b(u + eps, v + eps)? as i64
                + b(u - eps, v + eps)? as i64;
            debug_assert!(total >= 0);
            Ok(total.max(0) as usize)
        }
        Death::Infinity => {
            let beyond = crit.last().copied().unwrap_or(u) + 1.0;
            let near = nearest_other(u);
            let eps = if near.is_finite() { 0.5 * near } else { 0.5 };
            let b = |uu: f64| pbn_oracle(complex, phi, coeffs, degree, uu, beyond.max(uu + 1.0));
            let total = b(u + eps)? as i64 - b(u - eps)? as i64;
            debug_assert!(total >= 0);
            Ok(total.max(0) as usize)
        }
    }
}

/// The diagram implied by the multiplicity oracle: evaluate the multiplicity
/// at every ordered pair of critical values plus every `(c, inf)`, in every
/// degree up to the complex dimension.
pub fn oracle_diagram(
    complex: &SimplicialComplex,
    phi: &ScalarField,
    coeffs: PrimeField,
) -> PersistenceDiagram {
    let crit = critical_values(phi);
    let mut points: Vec<(usize, f64, Death)> = Vec::new();
    for degree in 0..=complex.dimension() {
        for (i, &u) in crit.iter().enumerate() {
            for &v in &crit[i + 1..] {
                let m = multiplicity_oracle(complex, phi, coeffs, degree, u, Death::Finite(v))
                    .expect("u < v by construction");
                for _ in 0..m {
                    points.push((degree, u, Death::Finite(v)));
                }
            }
            let m = multiplicity_oracle(complex, phi, coeffs, degree, u, Death::Infinity)
                .expect("infinite window is always valid");
            for _ in 0..m {
                points.push((degree, u, Death::Infinity));
            }
        }
    }
    PersistenceDiagram::from_points(points)
}
