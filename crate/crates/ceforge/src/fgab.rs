//! Finitely generated abelian groups presented by invariant factors,
//! homomorphisms between presentations, and homology of free differential
//! groups with explicit generator representatives.
//!
//! Over `Z` the torsion list is a divisibility chain `d_1 | d_2 | ...` with
//! every entry at least 2; over a field it is empty and `free_rank` is the
//! dimension. Group elements are coordinate vectors over the presentation
//! generators, torsion generators first, then free generators.

use crate::error::{Error, Result};
use crate::linalg::{
    inverse, kernel_basis, same_column_span, smith_normal_form, solve, Coefficients, ExactMatrix,
    Scalar,
};
use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;

fn to_int(s: &Scalar) -> BigInt {
    debug_assert!(s.is_integer());
    s.to_integer()
}

fn from_int(i: &BigInt) -> Scalar {
    BigRational::from_integer(i.clone())
}

fn rem_euclid(a: &BigInt, m: &BigInt) -> BigInt {
    let r = a % m;
    if r.is_negative() {
        r + m.abs()
    } else {
        r
    }
}

/// A finitely generated abelian group (or vector space) given by its
/// invariant factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FgGroup {
    pub coeffs: Coefficients,
    /// Invariant factors `d_1 | d_2 | ...`, each at least 2. Always empty
    /// over a field.
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl FgGroup {
    pub fn trivial(coeffs: Coefficients) -> FgGroup {
        FgGroup { coeffs, torsion: Vec::new(), free_rank: 0 }
    }

    pub fn free(coeffs: Coefficients, rank: usize) -> FgGroup {
        FgGroup { coeffs, torsion: Vec::new(), free_rank: rank }
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }

    /// Number of presentation generators.
    pub fn total_rank(&self) -> usize {
        self.torsion.len() + self.free_rank
    }

    /// Diagonal relation matrix: column `i` is `d_i * e_i`.
    pub fn relation_matrix(&self) -> ExactMatrix {
        let mut rel = ExactMatrix::zeros(self.coeffs, self.total_rank(), self.torsion.len());
        for (i, d) in self.torsion.iter().enumerate() {
            rel.set(i, i, from_int(d));
        }
        rel
    }

    /// Whether the underlying set is finite.
    pub fn is_finite(&self) -> bool {
        match self.coeffs {
            Coefficients::IntegerRing | Coefficients::Rationals => self.free_rank == 0,
            Coefficients::PrimeField(_) | Coefficients::BinaryField => self.free_rank == 0,
        }
    }

    /// Invariant factors of the direct sum of two groups over the same ring.
    pub fn direct_sum(&self, other: &FgGroup) -> Result<FgGroup> {
        if self.coeffs != other.coeffs {
            return Err(Error::invalid(
                "direct sum of groups over different coefficient rings".to_string(),
            ));
        }
        let all: Vec<&BigInt> = self.torsion.iter().chain(other.torsion.iter()).collect();
        let mut torsion = Vec::new();
        if !all.is_empty() {
            // recombine into a divisibility chain via the Smith form of the
            // diagonal relation matrix
            let n = all.len();
            let mut diag = ExactMatrix::zeros(self.coeffs, n, n);
            for (i, d) in all.iter().enumerate() {
                diag.set(i, i, from_int(d));
            }
            let snf = smith_normal_form(&diag);
            for s in snf.diagonal() {
                let v = to_int(&s);
                if v.abs() >= BigInt::from(2) {
                    torsion.push(v.abs());
                }
            }
        }
        Ok(FgGroup { coeffs: self.coeffs, torsion, free_rank: self.free_rank + other.free_rank })
    }

    /// Reduce a coordinate vector to canonical form: torsion coordinates
    /// into `[0, d_i)`.
    pub fn canonical_coords(&self, coords: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(coords.len(), self.total_rank());
        let mut out = coords.to_vec();
        for (i, d) in self.torsion.iter().enumerate() {
            out[i] = from_int(&rem_euclid(&to_int(&out[i]), d));
        }
        out
    }
}

impl fmt::Display for FgGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let sym = self.coeffs.ring_symbol();
        let mut parts = Vec::new();
        if self.free_rank == 1 {
            parts.push(sym.to_string());
        } else if self.free_rank > 1 {
            parts.push(format!("{sym}^{}", self.free_rank));
        }
        for d in &self.torsion {
            parts.push(format!("{sym}/{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// A homomorphism between presented groups, stored as a canonical matrix
/// over the presentation generators (torsion rows reduced mod the target
/// invariant factor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    pub source: FgGroup,
    pub target: FgGroup,
    pub matrix: ExactMatrix,
}

impl GroupHom {
    /// Validate well-definedness (each source relation maps into a target
    /// relation) and canonicalize.
    pub fn from_matrix(source: FgGroup, target: FgGroup, matrix: ExactMatrix) -> Result<GroupHom> {
        if matrix.rows != target.total_rank() || matrix.cols != source.total_rank() {
            return Err(Error::invalid(format!(
                "hom matrix is {}x{}, expected {}x{}",
                matrix.rows,
                matrix.cols,
                target.total_rank(),
                source.total_rank()
            )));
        }
        for (j, order) in source.torsion.iter().enumerate() {
            for i in 0..matrix.rows {
                let scaled = to_int(&matrix.at(i, j)) * order;
                let ok = match target.torsion.get(i) {
                    Some(d) => rem_euclid(&scaled, d).is_zero(),
                    None => scaled.is_zero(),
                };
                if !ok {
                    return Err(Error::invalid(format!(
                        "matrix does not define a homomorphism: generator {j} of order {order} \
                         maps outside the target relations at row {i}"
                    )));
                }
            }
        }
        let mut hom = GroupHom { source, target, matrix };
        hom.canonicalize();
        Ok(hom)
    }

    fn canonicalize(&mut self) {
        for (i, d) in self.target.torsion.clone().iter().enumerate() {
            for j in 0..self.matrix.cols {
                let r = rem_euclid(&to_int(&self.matrix.at(i, j)), d);
                self.matrix.set(i, j, from_int(&r));
            }
        }
    }

    pub fn identity(group: &FgGroup) -> GroupHom {
        let n = group.total_rank();
        GroupHom {
            source: group.clone(),
            target: group.clone(),
            matrix: ExactMatrix::identity(group.coeffs, n),
        }
    }

    pub fn zero(source: &FgGroup, target: &FgGroup) -> GroupHom {
        GroupHom {
            source: source.clone(),
            target: target.clone(),
            matrix: ExactMatrix::zeros(target.coeffs, target.total_rank(), source.total_rank()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.matrix == ExactMatrix::identity(self.source.coeffs, self.source.total_rank())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GroupHom) -> Result<GroupHom> {
        if inner.target != self.source {
            return Err(Error::invalid(
                "composition of homomorphisms with mismatched middle group".to_string(),
            ));
        }
        let mut hom = GroupHom {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&inner.matrix),
        };
        hom.canonicalize();
        Ok(hom)
    }

    pub fn apply(&self, coords: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(coords.len(), self.source.total_rank());
        let mut out = vec![Scalar::zero(); self.target.total_rank()];
        for i in 0..self.matrix.rows {
            let mut acc = Scalar::zero();
            for j in 0..self.matrix.cols {
                acc += self.matrix.at(i, j) * &coords[j];
            }
            out[i] = acc;
        }
        self.target.canonical_coords(&out)
    }

    /// True when source and target have equal presentations and the map is
    /// surjective; for finitely generated groups a surjective endomorphism
    /// type is automatically injective.
    pub fn is_isomorphism(&self) -> bool {
        if self.source.coeffs != self.target.coeffs
            || self.source.torsion != self.target.torsion
            || self.source.free_rank != self.target.free_rank
        {
            return false;
        }
        let ext = self.matrix.hstack(&self.target.relation_matrix());
        for j in 0..self.target.total_rank() {
            let mut e = vec![Scalar::zero(); self.target.total_rank()];
            e[j] = Scalar::one();
            if solve(&ext, &e).is_none() {
                return false;
            }
        }
        true
    }
}

/// Homology of a free differential group `(R^n, d)` with `d^2 = 0`:
/// the presented group together with representative cycles and the
/// coordinate map on cycles.
#[derive(Debug, Clone)]
pub struct HomologyData {
    pub group: FgGroup,
    /// Basis of the cycle subgroup (saturated over `Z`), `n x k`.
    pub cycles: ExactMatrix,
    /// Representative cycles of the presentation generators, `n x g`,
    /// torsion generators first.
    pub representatives: ExactMatrix,
    /// Change of basis on cycle coordinates from the Smith form.
    u: ExactMatrix,
    /// Rows of `u`-coordinates kept as generators, with their invariant
    /// factor (`None` marks a free generator).
    retained: Vec<(usize, Option<BigInt>)>,
}

/// Compute the homology of a square differential matrix.
pub fn homology(d: &ExactMatrix) -> Result<HomologyData> {
    if d.rows != d.cols {
        return Err(Error::NotADifferential(format!(
            "differential matrix must be square, got {}x{}",
            d.rows, d.cols
        )));
    }
    if !d.mul(d).is_zero() {
        return Err(Error::NotADifferential("d*d is nonzero".to_string()));
    }
    let n = d.rows;
    let cycles = kernel_basis(d);
    let k = cycles.cols;
    // express each boundary column in cycle coordinates
    let mut y = ExactMatrix::zeros(d.coeffs, k, n);
    for j in 0..n {
        let col = d.col(j);
        let w = solve(&cycles, &col).ok_or_else(|| {
            Error::validation("cycle saturation", "boundary column not in cycle lattice")
        })?;
        for i in 0..k {
            y.set(i, j, w[i].clone());
        }
    }
    let snf = smith_normal_form(&y);
    let diag = snf.diagonal();
    let mut retained = Vec::new();
    let mut torsion = Vec::new();
    let mut free_rank = 0;
    for i in 0..k {
        let v = if i < diag.len() { to_int(&diag[i]) } else { BigInt::zero() };
        if v.is_zero() {
            retained.push((i, None));
            free_rank += 1;
        } else if v.abs() >= BigInt::from(2) {
            retained.push((i, Some(v.abs())));
            torsion.push(v.abs());
        }
    }
    // free generators come after torsion generators
    retained.sort_by_key(|(i, inv)| (inv.is_none(), *i));
    let u_inv = inverse(&snf.u)
        .ok_or_else(|| Error::validation("smith transform", "row transform not invertible"))?;
    let gens_all = cycles.mul(&u_inv);
    let mut representatives = ExactMatrix::zeros(d.coeffs, n, retained.len());
    for (out_col, (i, _)) in retained.iter().enumerate() {
        for r in 0..n {
            representatives.set(r, out_col, gens_all.at(r, *i).clone());
        }
    }
    let group = FgGroup { coeffs: d.coeffs, torsion, free_rank };
    Ok(HomologyData { group, cycles, representatives, u: snf.u, retained })
}

impl HomologyData {
    /// Coordinates of a cycle in the presentation, canonicalized. Errors if
    /// the vector is not a cycle.
    pub fn class_of(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        if x.len() != self.cycles.rows {
            return Err(Error::invalid(format!(
                "class_of expects a chain of length {}, got {}",
                self.cycles.rows,
                x.len()
            )));
        }
        let w = solve(&self.cycles, x)
            .ok_or_else(|| Error::invalid("chain is not a cycle".to_string()))?;
        let y = self.u.mul_vec(&w);
        let coords: Vec<Scalar> = self
            .retained
            .iter()
            .map(|(i, inv)| match inv {
                Some(d) => from_int(&rem_euclid(&to_int(&y[*i]), d)),
                None => y[*i].clone(),
            })
            .collect();
        Ok(coords)
    }

    /// Chain representative of a coordinate vector.
    pub fn representative(&self, coords: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(coords.len(), self.group.total_rank());
        self.representatives.mul_vec(coords)
    }
}

/// The homomorphism on homology induced by a chain-level matrix
/// `f: source chains -> target chains` that maps cycles to cycles.
pub fn induced_hom(
    f: &ExactMatrix,
    source: &HomologyData,
    target: &HomologyData,
) -> Result<GroupHom> {
    if f.cols != source.cycles.rows || f.rows != target.cycles.rows {
        return Err(Error::invalid(format!(
            "induced map matrix is {}x{}, expected {}x{}",
            f.rows, f.cols, target.cycles.rows, source.cycles.rows
        )));
    }
    let g = source.group.total_rank();
    let mut m = ExactMatrix::zeros(f.coeffs, target.group.total_rank(), g);
    for j in 0..g {
        let rep = source.representatives.col(j);
        let image = f.mul_vec(&rep);
        let coords = target.class_of(&image).map_err(|_| {
            Error::NotAChainMap("image of a cycle representative is not a cycle".to_string())
        })?;
        for (i, s) in coords.iter().enumerate() {
            m.set(i, j, s.clone());
        }
    }
    GroupHom::from_matrix(source.group.clone(), target.group.clone(), m)
}

/// The image of `f` as a sublattice of the target's generator coordinates:
/// subgroups of a presented group correspond to lattices containing the
/// relation lattice, so the relation columns are included.
pub fn image_lattice(f: &GroupHom) -> ExactMatrix {
    f.matrix.hstack(&f.target.relation_matrix())
}

/// The kernel of `f` as a sublattice of the source's generator coordinates:
/// solutions of `f(x) ∈ target relations`, projected to the source block,
/// together with the source relations.
pub fn kernel_lattice(f: &GroupHom) -> ExactMatrix {
    let ext = f.matrix.hstack(&f.target.relation_matrix());
    let k = kernel_basis(&ext);
    let rows: Vec<usize> = (0..f.source.total_rank()).collect();
    let cols: Vec<usize> = (0..k.cols).collect();
    k.submatrix(&rows, &cols).hstack(&f.source.relation_matrix())
}

/// `image(f) = kernel(g)` as subgroups of the middle group.
pub fn exact_at(f: &GroupHom, g: &GroupHom) -> Result<bool> {
    if f.target != g.source {
        return Err(Error::invalid(
            "exactness check requires the maps to share the middle group".to_string(),
        ));
    }
    Ok(same_column_span(&image_lattice(f), &kernel_lattice(g)))
}

/// Whether a family of maps into the same group is jointly surjective.
pub fn jointly_surjective(maps: &[&GroupHom]) -> Result<bool> {
    let target = &maps[0].target;
    let mut span = target.relation_matrix();
    for m in maps {
        if &m.target != target {
            return Err(Error::invalid(
                "joint surjectivity requires a common target".to_string(),
            ));
        }
        span = span.hstack(&m.matrix);
    }
    let full = ExactMatrix::identity(target.coeffs, target.total_rank());
    Ok(same_column_span(&span, &full))
}

/// Iterator over every homomorphism between two presented groups, when the
/// family is finite. Returns `None` if there are infinitely many.
pub struct HomEnumerator {
    source: FgGroup,
    target: FgGroup,
    /// admissible values per matrix entry, row-major
    choices: Vec<Vec<Scalar>>,
    /// odometer over `choices`; `None` once exhausted
    state: Option<Vec<usize>>,
}

pub fn enumerate_homs(source: &FgGroup, target: &FgGroup) -> Option<HomEnumerator> {
    if source.coeffs != target.coeffs {
        return None;
    }
    let coeffs = source.coeffs;
    let field_elements: Option<Vec<Scalar>> = match coeffs {
        Coefficients::IntegerRing | Coefficients::Rationals => None,
        Coefficients::BinaryField => {
            Some(vec![Scalar::zero(), Scalar::one()])
        }
        Coefficients::PrimeField(p) => {
            Some((0..p).map(|v| from_int(&BigInt::from(v))).collect())
        }
    };
    let rows = target.total_rank();
    let cols = source.total_rank();
    let mut choices = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let row_torsion = target.torsion.get(i);
            let col_torsion = source.torsion.get(j);
            let entry: Vec<Scalar> = match (row_torsion, col_torsion) {
                (Some(d), Some(o)) => {
                    // entries must be multiples of d / gcd(d, o)
                    let step = d / num::Integer::gcd(d, o);
                    let count = d / &step;
                    let mut vals = Vec::new();
                    let mut v = BigInt::zero();
                    let mut c = BigInt::zero();
                    while c < count {
                        vals.push(from_int(&v));
                        v += &step;
                        c += 1;
                    }
                    vals
                }
                (Some(d), None) => {
                    let mut vals = Vec::new();
                    let mut v = BigInt::zero();
                    while &v < d {
                        vals.push(from_int(&v));
                        v += 1;
                    }
                    vals
                }
                (None, Some(_)) => vec![Scalar::zero()],
                (None, None) => match &field_elements {
                    Some(vals) => vals.clone(),
                    None => return None,
                },
            };
            choices.push(entry);
        }
    }
    let state = if choices.iter().all(|c| !c.is_empty()) {
        Some(vec![0; choices.len()])
    } else {
        None
    };
    Some(HomEnumerator { source: source.clone(), target: target.clone(), choices, state })
}

impl HomEnumerator {
    /// Total number of homomorphisms in the family.
    pub fn family_size(&self) -> BigInt {
        self.choices.iter().fold(BigInt::one(), |acc, c| acc * BigInt::from(c.len()))
    }
}

impl Iterator for HomEnumerator {
    type Item = GroupHom;

    fn next(&mut self) -> Option<GroupHom> {
        let state = self.state.as_mut()?;
        let rows = self.target.total_rank();
        let cols = self.source.total_rank();
        let mut m = ExactMatrix::zeros(self.source.coeffs, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let idx = i * cols + j;
                m.set(i, j, self.choices[idx][state[idx]].clone());
            }
        }
        // advance the odometer
        let mut pos = self.choices.len();
        loop {
            if pos == 0 {
                self.state = None;
                break;
            }
            pos -= 1;
            if self.state.as_ref().unwrap()[pos] + 1 < self.choices[pos].len() {
                self.state.as_mut().unwrap()[pos] += 1;
                for later in pos + 1..self.choices.len() {
                    self.state.as_mut().unwrap()[later] = 0;
                }
                break;
            }
        }
        // entries were chosen to satisfy the relation constraints
        Some(
            GroupHom::from_matrix(self.source.clone(), self.target.clone(), m)
                .expect("enumerated entries satisfy the relation constraints"),
        )
    }
}
