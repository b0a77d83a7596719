//! Finite simplicial complexes carrying a two-component filtering function.
//!
//! The complex plays the role of the finitely triangulable space `M`; the
//! bifiltration stores one `(f1, f2)` pair per vertex and is extended to
//! simplices by the lower-star rule (max over vertices) downstream.

use std::collections::HashMap;

use thiserror::Error;

use crate::field::{DenseMatrix, PrimeField};

#[derive(Debug, Error, PartialEq)]
pub enum ComplexError {
    #[error("simplex {0:?} is missing face {1:?} (strict mode)")]
    MissingFace(Vec<u32>, Vec<u32>),
    #[error("duplicate simplex {0:?}")]
    DuplicateSimplex(Vec<u32>),
    #[error("empty complex")]
    EmptyComplex,
    #[error("simplex {0:?} references vertex {1} outside 0..{2}")]
    UnknownVertex(Vec<u32>, u32, u32),
    #[error("simplex {0:?} has repeated vertices")]
    RepeatedVertex(Vec<u32>),
    #[error("bifiltration has {got} value pairs for {expected} vertices")]
    ValueCountMismatch { got: usize, expected: usize },
    #[error("non-finite filtration value at vertex {0}")]
    NonFiniteValue(usize),
}

/// Whether `build_complex` rejects or repairs input that is not face-closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuildMode {
    /// Reject input whose faces are not all declared.
    #[default]
    Strict,
    /// Auto-complete missing faces.
    Lenient,
}

/// Identifies a simplex inside a complex: dimension and index within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplexId {
    pub dim: usize,
    pub idx: usize,
}

/// A finite abstract simplicial complex, closed under faces.
///
/// Simplices are stored grouped by dimension, each as a sorted tuple of
/// vertex indices, with precomputed codimension-1 boundary lists. Immutable
/// after construction, so it can be shared freely across concurrent slice
/// computations.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    /// `simplices[d][i]` is the i-th d-simplex as sorted vertex indices.
    simplices: Vec<Vec<Vec<u32>>>,
    /// `boundary[d][i]` lists, for d >= 1, the indices (into dimension d-1)
    /// of the facets of simplex (d, i), in face-enumeration order.
    boundary: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Build a complex from a list of simplices over `vertex_count` vertices.
    ///
    /// Vertices themselves need not be listed; every index in `0..vertex_count`
    /// becomes a 0-simplex. In `Strict` mode each declared simplex of dimension
    /// >= 2 must come with all of its facets; `Lenient` mode completes them.
    pub fn build(
        vertex_count: usize,
        simplex_list: &[Vec<u32>],
        mode: BuildMode,
    ) -> Result<Self, ComplexError> {
        if vertex_count == 0 {
            return Err(ComplexError::EmptyComplex);
        }
        let vc = vertex_count as u32;
        let mut declared: Vec<HashMap<Vec<u32>, usize>> = vec![HashMap::new()];
        for v in 0..vc {
            let key = vec![v];
            let next = declared[0].len();
            declared[0].insert(key, next);
        }
        // insert declared simplices, checking well-formedness
        for s in simplex_list {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s.len() {
                return Err(ComplexError::RepeatedVertex(s.clone()));
            }
            for &v in &sorted {
                if v >= vc {
                    return Err(ComplexError::UnknownVertex(s.clone(), v, vc));
                }
            }
            let dim = sorted.len() - 1;
            while declared.len() <= dim {
                declared.push(HashMap::new());
            }
            if dim > 0 && declared[dim].contains_key(&sorted) {
                return Err(ComplexError::DuplicateSimplex(s.clone()));
            }
            let next = declared[dim].len();
            declared[dim].entry(sorted).or_insert(next);
        }
        // face closure
        for dim in (1..declared.len()).rev() {
            let keys: Vec<Vec<u32>> = declared[dim].keys().cloned().collect();
            for simplex in keys {
                for facet in facets(&simplex) {
                    if !declared[dim - 1].contains_key(&facet) {
                        match mode {
                            BuildMode::Strict => {
                                return Err(ComplexError::MissingFace(simplex.clone(), facet))
                            }
                            BuildMode::Lenient => {
                                let next = declared[dim - 1].len();
                                declared[dim - 1].insert(facet, next);
                            }
                        }
                    }
                }
            }
        }
        // freeze into sorted-by-tuple order per dimension for determinism
        let mut simplices: Vec<Vec<Vec<u32>>> = Vec::with_capacity(declared.len());
        for table in &declared {
            let mut list: Vec<Vec<u32>> = table.keys().cloned().collect();
            list.sort_unstable();
            simplices.push(list);
        }
        let mut index: Vec<HashMap<&[u32], usize>> = Vec::with_capacity(simplices.len());
        for list in &simplices {
            let mut table = HashMap::with_capacity(list.len());
            for (i, s) in list.iter().enumerate() {
                table.insert(s.as_slice(), i);
            }
            index.push(table);
        }
        let mut boundary: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for dim in 1..simplices.len() {
            let mut per_dim = Vec::with_capacity(simplices[dim].len());
            for simplex in &simplices[dim] {
                let faces: Vec<usize> = facets(simplex)
                    .into_iter()
                    .map(|f| index[dim - 1][f.as_slice()])
                    .collect();
                per_dim.push(faces);
            }
            boundary.push(per_dim);
        }
        Ok(Self {
            vertex_count,
            simplices,
            boundary,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Top simplex dimension.
    pub fn dimension(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn simplex_count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, |v| v.len())
    }

    pub fn total_simplices(&self) -> usize {
        self.simplices.iter().map(|v| v.len()).sum()
    }

    pub fn simplex(&self, id: SimplexId) -> &[u32] {
        &self.simplices[id.dim][id.idx]
    }

    pub fn simplices_of_dim(&self, dim: usize) -> &[Vec<u32>] {
        self.simplices.get(dim).map_or(&[], |v| v.as_slice())
    }

    /// Facet indices (into dimension `id.dim - 1`) of a simplex.
    pub fn facets_of(&self, id: SimplexId) -> &[usize] {
        &self.boundary[id.dim][id.idx]
    }

    pub fn euler_characteristic(&self) -> i64 {
        let mut chi = 0i64;
        for (dim, list) in self.simplices.iter().enumerate() {
            if dim % 2 == 0 {
                chi += list.len() as i64;
            } else {
                chi -= list.len() as i64;
            }
        }
        chi
    }

    /// Boundary operator from dimension `dim` to `dim - 1` with signs reduced
    /// into the given field.
    pub fn boundary_matrix(&self, field: PrimeField, dim: usize) -> DenseMatrix {
        let cols = self.simplex_count(dim);
        let rows = if dim == 0 {
            0
        } else {
            self.simplex_count(dim - 1)
        };
        let mut m = DenseMatrix::zeros(field, rows, cols);
        if dim == 0 {
            return m;
        }
        for (j, faces) in self.boundary[dim].iter().enumerate() {
            for (k, &face) in faces.iter().enumerate() {
                // omitting the k-th vertex carries sign (-1)^k
                let sign = if k % 2 == 0 { 1 } else { -1 };
                m.set(face, j, field.from_i64(sign));
            }
        }
        m
    }

    /// Betti numbers over the given field, via boundary-matrix ranks.
    pub fn betti_numbers(&self, field: PrimeField) -> Vec<usize> {
        let top = self.dimension();
        let mut rank = vec![0usize; top + 2];
        for dim in 1..=top {
            rank[dim] = self.boundary_matrix(field, dim).rank();
        }
        (0..=top)
            .map(|n| self.simplex_count(n) - rank[n] - rank[n + 1])
            .collect()
    }
}

/// All codimension-1 faces of a sorted simplex, each sorted.
pub fn facets(simplex: &[u32]) -> Vec<Vec<u32>> {
    if simplex.len() <= 1 {
        return Vec::new();
    }
    (0..simplex.len())
        .map(|skip| {
            simplex
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
        .collect()
}

/// The map `f = (f1, f2): M -> R^2`, stored per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Bifiltration {
    values: Vec<(f64, f64)>,
}

impl Bifiltration {
    pub fn new(values: Vec<(f64, f64)>, complex: &SimplicialComplex) -> Result<Self, ComplexError> {
        if values.len() != complex.vertex_count() {
            return Err(ComplexError::ValueCountMismatch {
                got: values.len(),
                expected: complex.vertex_count(),
            });
        }
        for (i, (a, b)) in values.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(ComplexError::NonFiniteValue(i));
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

    pub fn value(&self, vertex: usize) -> (f64, f64) {
        self.values[vertex]
    }

    pub fn values(&self) -> &[(f64, f64)] {
        &self.values
    }

    /// `max(|f1|, |f2|)` over all vertices; zero for an empty filtration.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }

    /// Sup-norm distance `||f - g||_inf` between two bifiltrations.
    pub fn sup_distance(&self, other: &Bifiltration) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|((a1, b1), (a2, b2))| (a1 - a2).abs().max((b1 - b2).abs()))
            .fold(0.0, f64::max)
    }

    /// Vertex-wise sum, used to form perturbation pairs `g = f + eta`.
    pub fn add(&self, eta: &Bifiltration) -> Bifiltration {
        assert_eq!(self.values.len(), eta.values.len());
        Bifiltration {
            values: self
                .values
                .iter()
                .zip(&eta.values)
                .map(|((a1, b1), (a2, b2))| (a1 + a2, b1 + b2))
                .collect(),
        }
    }
}

/// Report of the `M ~ S^m` necessary-condition check.
#[derive(Debug, Clone, PartialEq)]
pub enum SphereCheck {
    /// Betti numbers match a sphere of this dimension.
    Sphere { m: usize },
    /// Betti numbers do not match any sphere; computation may proceed, but
    /// the sphere-specific `gamma_infinity` shortcut does not apply.
    Warning { betti: Vec<usize>, reason: String },
}

impl SphereCheck {
    pub fn is_sphere(&self) -> bool {
        matches!(self, SphereCheck::Sphere { .. })
    }
}

/// Check the necessary condition `beta_0 = beta_m = 1`, `beta_i = 0` otherwise.
///
/// This is only a Betti-number test: it cannot certify a homeomorphism, it
/// can only rule one out.
pub fn validate_sphere_assumption(complex: &SimplicialComplex, field: PrimeField) -> SphereCheck {
    let betti = complex.betti_numbers(field);
    let m = complex.dimension();
    if m < 2 {
        return SphereCheck::Warning {
            betti,
            reason: format!("top dimension {m} < 2"),
        };
    }
    if betti[0] != 1 {
        return SphereCheck::Warning {
            reason: format!("beta_0 = {}, expected 1", betti[0]),
            betti,
        };
    }
    if betti[m] != 1 {
        return SphereCheck::Warning {
            reason: format!("beta_{m} = {}, expected 1", betti[m]),
            betti,
        };
    }
    for (i, &b) in betti.iter().enumerate() {
        if i != 0 && i != m && b != 0 {
            return SphereCheck::Warning {
                reason: format!("beta_{i} = {b}, expected 0"),
                betti,
            };
        }
    }
    SphereCheck::Sphere { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn triangle_boundary_counts() {
        let k = SimplicialComplex::build(
            3,
            &[vec![0, 1], vec![1, 2], vec![0, 2]],
            BuildMode::Strict,
        )
        .unwrap();
        assert_eq!(k.vertex_count(), 3);
        assert_eq!(k.simplex_count(1), 3);
        assert_eq!(k.euler_characteristic(), 0);
    }

    #[test]
    fn lenient_mode_completes_faces() {
        let k = SimplicialComplex::build(3, &[vec![0, 1, 2]], BuildMode::Lenient).unwrap();
        assert_eq!(k.simplex_count(0), 3);
        assert_eq!(k.simplex_count(1), 3);
        assert_eq!(k.simplex_count(2), 1);
    }

    #[test]
    fn strict_mode_rejects_missing_faces() {
        let err = SimplicialComplex::build(3, &[vec![0, 1, 2]], BuildMode::Strict).unwrap_err();
        assert!(matches!(err, ComplexError::MissingFace(_, _)));
    }

    #[test]
    fn duplicate_simplices_rejected() {
        let err = SimplicialComplex::build(3, &[vec![0, 1], vec![1, 0]], BuildMode::Strict)
            .unwrap_err();
        assert!(matches!(err, ComplexError::DuplicateSimplex(_)));
    }

    #[test]
    fn empty_complex_rejected() {
        let err = SimplicialComplex::build(0, &[], BuildMode::Strict).unwrap_err();
        assert_eq!(err, ComplexError::EmptyComplex);
    }

    #[test]
    fn octahedron_is_a_2_sphere() {
        let k = fixtures::octahedron();
        assert_eq!(k.dimension(), 2);
        assert_eq!(k.simplex_count(0), 6);
        assert_eq!(k.simplex_count(1), 12);
        assert_eq!(k.simplex_count(2), 8);
        assert_eq!(k.betti_numbers(PrimeField::z2()), vec![1, 0, 1]);
        let check = validate_sphere_assumption(&k, PrimeField::z2());
        assert_eq!(check, SphereCheck::Sphere { m: 2 });
    }

    #[test]
    fn disjoint_octahedra_fail_sphere_check() {
        let oct = fixtures::octahedron();
        let mut simplices: Vec<Vec<u32>> = Vec::new();
        for dim in 1..=2 {
            for s in oct.simplices_of_dim(dim) {
                simplices.push(s.clone());
                simplices.push(s.iter().map(|&v| v + 6).collect());
            }
        }
        let k = SimplicialComplex::build(12, &simplices, BuildMode::Strict).unwrap();
        match validate_sphere_assumption(&k, PrimeField::z2()) {
            SphereCheck::Warning { betti, .. } => assert_eq!(betti[0], 2),
            other => panic!("expected warning, got {other:?}"),
        }
    }

    #[test]
    fn single_vertex_warns_low_dimension() {
        let k = SimplicialComplex::build(1, &[], BuildMode::Strict).unwrap();
        assert!(matches!(
            validate_sphere_assumption(&k, PrimeField::z2()),
            SphereCheck::Warning { .. }
        ));
    }

    #[test]
    fn circle_fails_sphere_check() {
        let k = SimplicialComplex::build(
            3,
            &[vec![0, 1], vec![1, 2], vec![0, 2]],
            BuildMode::Strict,
        )
        .unwrap();
        // beta_1 = 1 but top dimension is 1 < 2
        assert!(!validate_sphere_assumption(&k, PrimeField::z2()).is_sphere());
    }

    #[test]
    fn face_closure_and_boundary_squared() {
        let k = fixtures::octahedron();
        // every facet of every simplex is present
        for dim in 1..=k.dimension() {
            for (i, s) in k.simplices_of_dim(dim).iter().enumerate() {
                let faces = k.facets_of(SimplexId { dim, idx: i });
                assert_eq!(faces.len(), s.len());
                for f in facets(s) {
                    assert!(k.simplices_of_dim(dim - 1).contains(&f));
                }
            }
        }
        // boundary-of-boundary vanishes over Z/2 and Z/5
        for p in [2u64, 5] {
            let field = PrimeField::new(p).unwrap();
            for dim in 2..=k.dimension() {
                let d1 = k.boundary_matrix(field, dim);
                let d0 = k.boundary_matrix(field, dim - 1);
                for j in 0..d1.cols {
                    for r in 0..d0.rows {
                        let mut acc = 0;
                        for mid in 0..d1.rows {
                            acc = field.add(acc, field.mul(d0.get(r, mid), d1.get(mid, j)));
                        }
                        assert_eq!(acc, 0, "d.d != 0 at dim {dim}");
                    }
                }
            }
        }
    }

    #[test]
    fn bifiltration_validation() {
        let k = SimplicialComplex::build(2, &[vec![0, 1]], BuildMode::Strict).unwrap();
        assert!(Bifiltration::new(vec![(0.0, 1.0)], &k).is_err());
        assert!(Bifiltration::new(vec![(0.0, 1.0), (f64::NAN, 0.0)], &k).is_err());
        let f = Bifiltration::new(vec![(0.0, 1.0), (-2.0, 0.5)], &k).unwrap();
        assert_eq!(f.sup_norm(), 2.0);
    }
}
