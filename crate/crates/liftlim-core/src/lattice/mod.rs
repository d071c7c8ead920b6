//! Subgroups of `Z^n` as integer lattices, with exact arbitrary-precision
//! arithmetic throughout. No floating point anywhere.
//!
//! A [`Lattice`] is stored by its canonical column Hermite basis, so two
//! lattices are equal as subgroups iff their stored bases are equal. All the
//! subgroup operations (image, preimage, intersection, membership, quotient
//! invariants) reduce to Hermite or Smith normal form computations.

mod divisible;

pub use divisible::{divisible_core, factor_monic, unit_kernel};

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Convenience constructor from machine integers.
    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*x));
            }
        }
        m
    }

    pub fn from_bigint_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, x) in row.into_iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(dim: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(dim, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), dim, "column length mismatch");
            for i in 0..dim {
                m.set(i, j, col[i].clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() }
                })
            })
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a * rhs.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn pow(&self, k: usize) -> IntMatrix {
        assert_eq!(self.rows, self.cols, "power of non-square matrix");
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = self.mul(&acc);
        }
        acc
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hstack(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, rhs.rows, "row mismatch in hstack");
        let mut out = Self::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j).clone());
            }
        }
        out
    }

    /// Exact determinant by fraction-free Gaussian elimination (Bareiss).
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let idx = |i: usize, j: usize| i * n + j;
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[idx(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[idx(i, k)].is_zero()) {
                    Some(p) => {
                        for j in 0..n {
                            a.swap(idx(k, j), idx(p, j));
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[idx(k, k)] * &a[idx(i, j)] - &a[idx(i, k)] * &a[idx(k, j)];
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    a[idx(i, j)] = q;
                }
                a[idx(i, k)] = BigInt::zero();
            }
            prev = a[idx(k, k)].clone();
        }
        sign * a[idx(n - 1, n - 1)].clone()
    }
}

/// Result of a Smith normal form computation: `u * m * v` is diagonal with
/// the entries of `diag` (nonnegative, each dividing the next, zeros last).
/// `u`, `v` are unimodular and `u_inv * u = 1`.
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub diag: Vec<BigInt>,
}

/// Smith normal form with transforms. Pivots are chosen by minimal absolute
/// value, which keeps intermediate entries small without changing the
/// (unique) diagonal.
pub fn smith(m: &IntMatrix) -> SmithDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    // row ops hit a and u (and inverse ops hit u_inv); col ops hit a and v
    fn swap_rows(a: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, i: usize, j: usize) {
        for c in 0..a.cols() {
            let x = a.get(i, c).clone();
            a.set(i, c, a.get(j, c).clone());
            a.set(j, c, x);
        }
        for c in 0..u.cols() {
            let x = u.get(i, c).clone();
            u.set(i, c, u.get(j, c).clone());
            u.set(j, c, x);
        }
        for r in 0..u_inv.rows() {
            let x = u_inv.get(r, i).clone();
            u_inv.set(r, i, u_inv.get(r, j).clone());
            u_inv.set(r, j, x);
        }
    }
    fn add_row(
        a: &mut IntMatrix,
        u: &mut IntMatrix,
        u_inv: &mut IntMatrix,
        dst: usize,
        src: usize,
        k: &BigInt,
    ) {
        // row_dst += k * row_src; inverse: col_src -= k * col_dst
        for c in 0..a.cols() {
            let x = a.get(dst, c) + k * a.get(src, c);
            a.set(dst, c, x);
        }
        for c in 0..u.cols() {
            let x = u.get(dst, c) + k * u.get(src, c);
            u.set(dst, c, x);
        }
        for r in 0..u_inv.rows() {
            let x = u_inv.get(r, src) - k * u_inv.get(r, dst);
            u_inv.set(r, src, x);
        }
    }
    fn negate_row(a: &mut IntMatrix, u: &mut IntMatrix, u_inv: &mut IntMatrix, i: usize) {
        for c in 0..a.cols() {
            let x = -a.get(i, c).clone();
            a.set(i, c, x);
        }
        for c in 0..u.cols() {
            let x = -u.get(i, c).clone();
            u.set(i, c, x);
        }
        for r in 0..u_inv.rows() {
            let x = -u_inv.get(r, i).clone();
            u_inv.set(r, i, x);
        }
    }
    fn swap_cols(a: &mut IntMatrix, v: &mut IntMatrix, i: usize, j: usize) {
        for r in 0..a.rows() {
            let x = a.get(r, i).clone();
            a.set(r, i, a.get(r, j).clone());
            a.set(r, j, x);
        }
        for r in 0..v.rows() {
            let x = v.get(r, i).clone();
            v.set(r, i, v.get(r, j).clone());
            v.set(r, j, x);
        }
    }
    fn add_col(a: &mut IntMatrix, v: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
        for r in 0..a.rows() {
            let x = a.get(r, dst) + k * a.get(r, src);
            a.set(r, dst, x);
        }
        for r in 0..v.rows() {
            let x = v.get(r, dst) + k * v.get(r, src);
            v.set(r, dst, x);
        }
    }

    let t_max = rows.min(cols);
    for t in 0..t_max {
        'pivot: loop {
            // minimal absolute value pivot in the remaining block
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a.get(i, j).is_zero()
                        && best
                            .map(|(bi, bj)| a.get(i, j).magnitude() < a.get(bi, bj).magnitude())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break 'pivot };
            if pi != t {
                swap_rows(&mut a, &mut u, &mut u_inv, t, pi);
            }
            if pj != t {
                swap_cols(&mut a, &mut v, t, pj);
            }
            let mut dirty = false;
            for i in t + 1..rows {
                if !a.get(i, t).is_zero() {
                    let q = rounded_div(a.get(i, t), a.get(t, t));
                    if !q.is_zero() {
                        add_row(&mut a, &mut u, &mut u_inv, i, t, &-q);
                    }
                    if !a.get(i, t).is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !a.get(t, j).is_zero() {
                    let q = rounded_div(a.get(t, j), a.get(t, t));
                    if !q.is_zero() {
                        add_col(&mut a, &mut v, j, t, &-q);
                    }
                    if !a.get(t, j).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue 'pivot;
            }
            // divisibility: pivot must divide the rest of the block
            let mut offender = None;
            'search: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(a.get(i, j) % a.get(t, t)).is_zero() {
                        offender = Some(i);
                        break 'search;
                    }
                }
            }
            match offender {
                Some(i) => {
                    add_row(&mut a, &mut u, &mut u_inv, t, i, &BigInt::one());
                    continue 'pivot;
                }
                None => {
                    if a.get(t, t).is_negative() {
                        negate_row(&mut a, &mut u, &mut u_inv, t);
                    }
                    break 'pivot;
                }
            }
        }
    }

    let diag = (0..t_max).map(|t| a.get(t, t).clone()).collect();
    SmithDecomposition { u, u_inv, v, diag }
}

/// Quotient with remainder minimized in absolute value.
fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    if r.magnitude() * 2u32 > *b.magnitude() {
        // step q towards the smaller remainder
        if r.is_negative() == b.is_negative() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// Canonical column Hermite form of the column span. Zero columns are
/// dropped; pivots are positive, sit in strictly increasing rows, are the
/// only nonzero entries of their row to the right, and entries to their left
/// in the pivot row are reduced into `[0, pivot)`.
pub fn column_hermite(m: &IntMatrix) -> IntMatrix {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut next = 0usize; // next pivot column slot
    for row in 0..rows {
        if next == cols {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for j in next..cols {
                if !a.get(row, j).is_zero()
                    && best
                        .map(|b| a.get(row, j).magnitude() < a.get(row, b).magnitude())
                        .unwrap_or(true)
                {
                    best = Some(j);
                }
            }
            let Some(bj) = best else { break };
            if bj != next {
                for r in 0..rows {
                    let x = a.get(r, next).clone();
                    a.set(r, next, a.get(r, bj).clone());
                    a.set(r, bj, x);
                }
            }
            let mut dirty = false;
            for j in next + 1..cols {
                if !a.get(row, j).is_zero() {
                    let q = rounded_div(a.get(row, j), a.get(row, next));
                    for r in 0..rows {
                        let x = a.get(r, j) - &q * a.get(r, next);
                        a.set(r, j, x);
                    }
                    if !a.get(row, j).is_zero() {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                break;
            }
        }
        if a.get(row, next).is_zero() {
            continue;
        }
        if a.get(row, next).is_negative() {
            for r in 0..rows {
                let x = -a.get(r, next).clone();
                a.set(r, next, x);
            }
        }
        // reduce earlier columns against this pivot
        for j in 0..next {
            let q = a.get(row, j).div_floor(a.get(row, next));
            if !q.is_zero() {
                for r in 0..rows {
                    let x = a.get(r, j) - &q * a.get(r, next);
                    a.set(r, j, x);
                }
            }
        }
        next += 1;
    }
    let mut out = IntMatrix::zeros(rows, next);
    for j in 0..next {
        for i in 0..rows {
            out.set(i, j, a.get(i, j).clone());
        }
    }
    out
}

/// Integer kernel of `m` as a list of basis columns (saturated by
/// construction).
pub fn kernel(m: &IntMatrix) -> IntMatrix {
    let s = smith(m);
    let rank = s.diag.iter().filter(|d| !d.is_zero()).count();
    let cols = m.cols();
    let mut gens = Vec::new();
    for j in rank..cols {
        gens.push(s.v.column(j));
    }
    column_hermite(&IntMatrix::from_columns(cols, &gens))
}

/// Invariant-factor data of the quotient of the ambient group by a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientInfo {
    /// Rank of the free part of the quotient.
    pub free_rank: usize,
    /// Nontrivial invariant factors, each dividing the next.
    pub torsion: Vec<BigUint>,
    /// Total order when finite (`free_rank == 0`).
    pub order: Option<BigUint>,
}

impl QuotientInfo {
    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }
}

/// A subgroup of `Z^ambient`, stored by canonical basis.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    ambient: usize,
    basis: IntMatrix, // ambient x rank, canonical column Hermite form
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice(ambient={}, basis={:?})", self.ambient, self.basis)
    }
}

impl Lattice {
    pub fn zero(ambient: usize) -> Self {
        Lattice { ambient, basis: IntMatrix::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Lattice { ambient, basis: IntMatrix::identity(ambient) }
    }

    /// Span of the given generator vectors.
    pub fn from_generators(ambient: usize, gens: &[Vec<BigInt>]) -> Self {
        for g in gens {
            assert_eq!(g.len(), ambient, "generator dimension mismatch");
        }
        let m = IntMatrix::from_columns(ambient, gens);
        Lattice { ambient, basis: column_hermite(&m) }
    }

    /// Span of the columns of a matrix.
    pub fn from_matrix_columns(m: &IntMatrix) -> Self {
        Lattice { ambient: m.rows(), basis: column_hermite(m) }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<BigInt>> {
        (0..self.rank()).map(|j| self.basis.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_full(&self) -> bool {
        self.basis.is_identity()
    }

    /// Coordinates of `v` in the basis, if `v` lies in the lattice.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient, "vector dimension mismatch");
        let mut rem: Vec<BigInt> = v.to_vec();
        let mut coords = vec![BigInt::zero(); self.rank()];
        for j in 0..self.rank() {
            let pivot_row = (0..self.ambient).find(|&i| !self.basis.get(i, j).is_zero())?;
            let p = self.basis.get(pivot_row, j);
            let (q, r) = rem[pivot_row].div_rem(p);
            if !r.is_zero() {
                return None;
            }
            for i in 0..self.ambient {
                let x = &rem[i] - &q * self.basis.get(i, j);
                rem[i] = x;
            }
            coords[j] = q;
        }
        if rem.iter().all(Zero::is_zero) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn member(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains(&self, other: &Lattice) -> bool {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        (0..other.rank()).all(|j| self.member(&other.basis.column(j)))
    }

    /// Smallest lattice containing both (subgroup join).
    pub fn sum(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        Lattice::from_matrix_columns(&self.basis.hstack(&other.basis))
    }

    /// Intersection, via the kernel of the stacked generator matrix.
    pub fn intersect(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.ambient, other.ambient, "ambient mismatch");
        if self.is_zero() || other.is_zero() {
            return Lattice::zero(self.ambient);
        }
        let neg_b = {
            let mut m = other.basis.clone();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let x = -m.get(i, j).clone();
                    m.set(i, j, x);
                }
            }
            m
        };
        let stacked = self.basis.hstack(&neg_b); // ambient x (ra + rb)
        let ker = kernel(&stacked);
        // x = A * (first block of each kernel column)
        let mut gens = Vec::new();
        for j in 0..ker.cols() {
            let coeffs: Vec<BigInt> = (0..self.rank()).map(|i| ker.get(i, j).clone()).collect();
            gens.push(self.basis.mul_vec(&coeffs));
        }
        Lattice::from_generators(self.ambient, &gens)
    }

    /// Image under a linear map given by `h` (rows = target dimension).
    pub fn image(&self, h: &IntMatrix) -> Lattice {
        assert_eq!(h.cols(), self.ambient, "map domain mismatch");
        Lattice::from_matrix_columns(&h.mul(&self.basis))
    }

    /// Preimage `{x : h(x) ∈ self}`; always contains the kernel of `h`.
    pub fn preimage(&self, h: &IntMatrix) -> Lattice {
        assert_eq!(h.rows(), self.ambient, "map codomain mismatch");
        let s = h.cols();
        if self.is_full() {
            return Lattice::full(s);
        }
        let neg_b = {
            let mut m = self.basis.clone();
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let x = -m.get(i, j).clone();
                    m.set(i, j, x);
                }
            }
            m
        };
        let stacked = h.hstack(&neg_b); // ambient x (s + r)
        let ker = kernel(&stacked);
        let mut gens = Vec::new();
        for j in 0..ker.cols() {
            gens.push((0..s).map(|i| ker.get(i, j).clone()).collect());
        }
        Lattice::from_generators(s, &gens)
    }

    /// Saturation: all ambient vectors with a nonzero multiple in the lattice.
    pub fn saturate(&self) -> Lattice {
        if self.rank() == 0 {
            return self.clone();
        }
        let s = smith(&self.basis);
        let rank = s.diag.iter().filter(|d| !d.is_zero()).count();
        let mut gens = Vec::new();
        for j in 0..rank {
            gens.push(s.u_inv.column(j));
        }
        Lattice::from_generators(self.ambient, &gens)
    }

    /// Invariant factors of `Z^ambient / self`.
    pub fn quotient_info(&self) -> QuotientInfo {
        let s = smith(&self.basis);
        let nonzero: Vec<&BigInt> = s.diag.iter().filter(|d| !d.is_zero()).collect();
        let rank = nonzero.len();
        let free_rank = self.ambient - rank;
        let torsion: Vec<BigUint> =
            nonzero.iter().filter(|d| !d.is_one()).map(|d| d.magnitude().clone()).collect();
        let order = if free_rank == 0 {
            let mut o = BigUint::one();
            for d in &torsion {
                o *= d;
            }
            Some(o)
        } else {
            None
        };
        QuotientInfo { free_rank, torsion, order }
    }

    /// Index `[self : sub]` for a finite-index sublattice of the same rank.
    pub fn relative_index(&self, sub: &Lattice) -> Option<BigUint> {
        if sub.rank() != self.rank() {
            return None;
        }
        let mut coord_cols = Vec::new();
        for j in 0..sub.rank() {
            coord_cols.push(self.coordinates(&sub.basis.column(j))?);
        }
        let x = IntMatrix::from_columns(self.rank(), &coord_cols);
        let d = x.determinant();
        if d.is_zero() {
            None
        } else {
            Some(d.magnitude().clone())
        }
    }
}

/// Matrix of the action of `m` on the sublattice `w`, written in the basis
/// of `w`. `None` when `m` does not map `w` into itself.
pub fn restrict_map(m: &IntMatrix, w: &Lattice) -> Option<IntMatrix> {
    assert_eq!(m.rows(), m.cols(), "restriction of non-square matrix");
    assert_eq!(m.cols(), w.ambient(), "ambient mismatch in restriction");
    let mut cols = Vec::new();
    for j in 0..w.rank() {
        cols.push(w.coordinates(&m.mul_vec(&w.basis().column(j)))?);
    }
    Some(IntMatrix::from_columns(w.rank(), &cols))
}

/// Scales every basis vector by `c`.
pub fn scale(l: &Lattice, c: &BigInt) -> Lattice {
    if c.is_zero() {
        return Lattice::zero(l.ambient());
    }
    let gens: Vec<Vec<BigInt>> =
        l.basis_vectors().into_iter().map(|col| col.into_iter().map(|x| x * c).collect()).collect();
    Lattice::from_generators(l.ambient(), &gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(ambient: usize, gens: &[&[i64]]) -> Lattice {
        let gens: Vec<Vec<BigInt>> =
            gens.iter().map(|g| g.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Lattice::from_generators(ambient, &gens)
    }

    fn vec_i(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn smith_diag_examples() {
        let m = IntMatrix::from_rows(&[&[2, 0], &[0, 4]]);
        let s = smith(&m);
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(4)]);
        let m = IntMatrix::from_rows(&[&[4, 0], &[0, 6]]);
        let s = smith(&m);
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn smith_transforms_are_unimodular_and_exact() {
        let cases = [
            IntMatrix::from_rows(&[&[4, 0], &[0, 6]]),
            IntMatrix::from_rows(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]),
            IntMatrix::from_rows(&[&[1, 2], &[3, 4], &[5, 6]]),
            IntMatrix::from_rows(&[&[0, 0], &[0, 0]]),
        ];
        for m in cases {
            let s = smith(&m);
            let det_u = s.u.determinant();
            let det_v = s.v.determinant();
            assert!(det_u.magnitude().is_one(), "U not unimodular: {det_u}");
            assert!(det_v.magnitude().is_one(), "V not unimodular: {det_v}");
            assert!(s.u.mul(&s.u_inv).is_identity(), "u_inv is not the inverse of u");
            let d = s.u.mul(&m).mul(&s.v);
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    let expect = if i == j { s.diag[i].clone() } else { BigInt::zero() };
                    assert_eq!(*d.get(i, j), expect, "UmV not diagonal at ({i},{j})");
                }
            }
            for w in s.diag.windows(2) {
                if !w[0].is_zero() {
                    assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken");
                } else {
                    assert!(w[1].is_zero(), "zero before nonzero in diagonal");
                }
            }
        }
    }

    #[test]
    fn hermite_is_canonical() {
        // same lattice from different generating sets
        let a = lat(2, &[&[2, 0], &[0, 4]]);
        let b = lat(2, &[&[2, 4], &[-2, 4], &[2, 0]]);
        assert_eq!(a, b);
        let c = lat(2, &[&[2, 0], &[1, 2]]);
        assert_ne!(a, c);
    }

    #[test]
    fn membership_examples() {
        let l = lat(2, &[&[2, 0], &[0, 4]]);
        assert!(l.member(&vec_i(&[2, 4])));
        assert!(!l.member(&vec_i(&[1, 2])));
        assert!(l.member(&vec_i(&[0, 0])));
        assert!(!l.member(&vec_i(&[2, 2])));
    }

    #[test]
    fn membership_brute_force_box() {
        // oracle: integer combinations with small coefficients inside a box
        let cases = [
            lat(2, &[&[2, 1], &[0, 3]]),
            lat(3, &[&[1, 2, 0], &[0, 4, 4]]),
            lat(2, &[&[3, 3]]),
        ];
        for l in &cases {
            let n = l.ambient();
            let mut inside = std::collections::HashSet::new();
            let r = l.rank();
            let bound = 12i64;
            let mut coeffs = vec![-bound; r];
            loop {
                let v: Vec<BigInt> = {
                    let mut acc = vec![BigInt::zero(); n];
                    for (j, c) in coeffs.iter().enumerate() {
                        for i in 0..n {
                            let x = &acc[i] + l.basis().get(i, j) * BigInt::from(*c);
                            acc[i] = x;
                        }
                    }
                    acc
                };
                if v.iter().all(|x| x.magnitude() <= &BigUint::from(10u32)) {
                    inside.insert(v.iter().map(|x| i64::try_from(x).unwrap()).collect::<Vec<_>>());
                }
                let mut k = 0;
                loop {
                    if k == r {
                        break;
                    }
                    coeffs[k] += 1;
                    if coeffs[k] <= bound {
                        break;
                    }
                    coeffs[k] = -bound;
                    k += 1;
                }
                if k == r {
                    break;
                }
            }
            // every point of the box: member iff listed by the oracle
            let mut probe = vec![-10i64; n];
            loop {
                let v = vec_i(&probe);
                assert_eq!(
                    l.member(&v),
                    inside.contains(&probe),
                    "membership mismatch at {probe:?}"
                );
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    probe[k] += 1;
                    if probe[k] <= 10 {
                        break;
                    }
                    probe[k] = -10;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
    }

    #[test]
    fn intersect_examples_and_laws() {
        let two = lat(1, &[&[2]]);
        let three = lat(1, &[&[3]]);
        assert_eq!(two.intersect(&three), lat(1, &[&[6]]));
        let a = lat(2, &[&[2, 0], &[0, 3]]);
        let b = lat(2, &[&[1, 1]]);
        let c = lat(2, &[&[4, 0], &[0, 1]]);
        assert_eq!(a.intersect(&b), b.intersect(&a));
        assert_eq!(a.intersect(&b).intersect(&c), a.intersect(&b.intersect(&c)));
        assert_eq!(a.intersect(&a), a);
        // (6,6) generates 2Z x 3Z meet diagonal
        assert_eq!(a.intersect(&b), lat(2, &[&[6, 6]]));
    }

    #[test]
    fn image_preimage_adjunction() {
        // h: Z^2 -> Z, (x, y) -> x + y
        let h = IntMatrix::from_rows(&[&[1, 1]]);
        let even = lat(1, &[&[2]]);
        let pre = even.preimage(&h);
        assert!(pre.member(&vec_i(&[1, 1])));
        assert!(pre.member(&vec_i(&[2, 0])));
        assert!(!pre.member(&vec_i(&[1, 0])));
        // contains ker h
        assert!(pre.member(&vec_i(&[1, -1])));
        // adjunction on a small box
        let l = lat(1, &[&[3]]);
        let pre3 = l.preimage(&h);
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                let v = vec_i(&[x, y]);
                let hv = h.mul_vec(&v);
                assert_eq!(pre3.member(&v), l.member(&hv));
            }
        }
        // image example
        let m2 = IntMatrix::from_rows(&[&[2]]);
        assert_eq!(lat(1, &[&[3]]).image(&m2), lat(1, &[&[6]]));
    }

    #[test]
    fn quotient_invariants() {
        assert_eq!(
            lat(2, &[&[2, 0], &[0, 2]]).quotient_info(),
            QuotientInfo {
                free_rank: 0,
                torsion: vec![BigUint::from(2u32), BigUint::from(2u32)],
                order: Some(BigUint::from(4u32)),
            }
        );
        let q = lat(2, &[&[2, 0], &[0, 3]]).quotient_info();
        assert_eq!(q.order, Some(BigUint::from(6u32)));
        assert_eq!(q.torsion, vec![BigUint::from(6u32)]);
        let q = lat(2, &[&[2, 0]]).quotient_info();
        assert!(!q.is_finite());
        assert_eq!(q.free_rank, 1);
        let q = Lattice::full(3).quotient_info();
        assert_eq!(q.order, Some(BigUint::one()));
    }

    #[test]
    fn saturation_and_relative_index() {
        let l = lat(2, &[&[2, 4]]);
        assert_eq!(l.saturate(), lat(2, &[&[1, 2]]));
        let a = lat(1, &[&[2]]);
        let b = lat(1, &[&[12]]);
        assert_eq!(a.relative_index(&b), Some(BigUint::from(6u32)));
        assert_eq!(Lattice::full(2).relative_index(&lat(2, &[&[2, 0], &[0, 3]])), Some(BigUint::from(6u32)));
        assert_eq!(Lattice::full(2).relative_index(&lat(2, &[&[2, 0]])), None);
    }

    #[test]
    fn kernel_examples() {
        let h = IntMatrix::from_rows(&[&[1, 1]]);
        let k = kernel(&h);
        let kl = Lattice::from_matrix_columns(&k);
        assert_eq!(kl, lat(2, &[&[1, -1]]));
        let h = IntMatrix::from_rows(&[&[2, 0], &[0, 3]]);
        assert_eq!(kernel(&h).cols(), 0);
    }

    #[test]
    fn determinant_bareiss() {
        assert_eq!(IntMatrix::from_rows(&[&[3]]).determinant(), BigInt::from(3));
        assert_eq!(
            IntMatrix::from_rows(&[&[1, 2], &[3, 4]]).determinant(),
            BigInt::from(-2)
        );
        assert_eq!(
            IntMatrix::from_rows(&[&[2, 0, 1], &[1, 1, 0], &[0, 3, 1]]).determinant(),
            BigInt::from(5)
        );
        assert_eq!(
            IntMatrix::from_rows(&[&[1, 2], &[2, 4]]).determinant(),
            BigInt::zero()
        );
        assert_eq!(
            IntMatrix::from_rows(&[&[0, 1], &[1, 0]]).determinant(),
            BigInt::from(-1)
        );
    }
}
