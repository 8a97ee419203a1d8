//! Dense matrices, generic over the scalar, plus the Smith normal form over
//! the valuation ring.
//!
//! The scalar interface is the num-traits ring surface (`Zero`, `One`) plus
//! negation, subtraction and a partial inverse; it is instantiated at the
//! exact rational scalar [`PLocal`] and at the residue field [`Fp`]. The
//! concrete aliases live at the crate root.

use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::plocal::{Fp, PLocal, Valuation};

/// What the dense kernel needs from a scalar: the num-traits additive and
/// multiplicative structure, and division where it exists.
pub trait MatrixScalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Add<Output = Self>
    + Mul<Output = Self>
{
    fn inv_scalar(&self) -> Option<Self>;

    /// Attach a prime context where the scalar carries one; identity for
    /// context-free scalars.
    fn attach_ctx(&self, _p: u64) -> Self {
        self.clone()
    }

    /// The scalar's prime context, 0 when absent.
    fn ctx(&self) -> u64 {
        0
    }
}

impl MatrixScalar for PLocal {
    fn inv_scalar(&self) -> Option<Self> {
        self.inv()
    }
    fn attach_ctx(&self, p: u64) -> Self {
        self.attach(p)
    }
    fn ctx(&self) -> u64 {
        self.prime()
    }
}

impl MatrixScalar for Fp {
    fn inv_scalar(&self) -> Option<Self> {
        self.inv()
    }
    fn attach_ctx(&self, p: u64) -> Self {
        self.attach(p)
    }
    fn ctx(&self) -> u64 {
        self.prime()
    }
}

impl MatrixScalar for i64 {
    fn inv_scalar(&self) -> Option<Self> {
        match self {
            1 => Some(1),
            -1 => Some(-1),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: MatrixScalar> Matrix<T> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn diagonal(entries: Vec<T>) -> Self {
        let n = entries.len();
        let mut m = Matrix::zero(n, n);
        for (i, e) in entries.into_iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map<U: MatrixScalar>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn scale(&self, c: &T) -> Matrix<T> {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn attach_prime(&self, p: u64) -> Matrix<T> {
        self.map(|x| x.attach_ctx(p))
    }

    /// First nonzero prime context among the entries, or 0.
    pub fn ctx_tag(&self) -> u64 {
        self.data.iter().map(|x| x.ctx()).find(|&p| p != 0).unwrap_or(0)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows[i], cols[j])].clone()
        })
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.rows, other.rows);
        Matrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn block_diag(blocks: &[Matrix<T>]) -> Matrix<T> {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zero(n, m);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row(dst) += c * row(src)
    fn add_row(&mut self, dst: usize, src: usize, c: &T) {
        for j in 0..self.cols {
            let cur = std::mem::replace(&mut self[(dst, j)], T::zero());
            self[(dst, j)] = cur + c.clone() * self[(src, j)].clone();
        }
    }

    /// col(dst) += c * col(src)
    fn add_col(&mut self, dst: usize, src: usize, c: &T) {
        for i in 0..self.rows {
            let cur = std::mem::replace(&mut self[(i, dst)], T::zero());
            self[(i, dst)] = cur + c.clone() * self[(i, src)].clone();
        }
    }

    fn scale_row(&mut self, r: usize, c: &T) {
        for j in 0..self.cols {
            let v = c.clone() * self[(r, j)].clone();
            self[(r, j)] = v;
        }
    }

    /// Determinant by fraction-full Gaussian elimination; the scalar must be
    /// a field for this to be total on nonzero pivots.
    pub fn det(&self) -> T {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.attach_prime(self.ctx_tag());
        let mut det = T::one();
        for k in 0..n {
            let pivot = (k..n).find(|&i| !m[(i, k)].is_zero());
            let Some(pi) = pivot else {
                return T::zero();
            };
            if pi != k {
                m.swap_rows(pi, k);
                det = -det;
            }
            let inv = m[(k, k)].inv_scalar().expect("nonzero pivot");
            det = det * m[(k, k)].clone();
            for i in (k + 1)..n {
                let c = -(m[(i, k)].clone() * inv.clone());
                m.add_row(i, k, &c);
            }
        }
        det
    }

    /// Full inverse over the scalar's fraction structure; `None` if singular.
    pub fn inverse(&self) -> Option<Matrix<T>> {
        assert!(self.is_square());
        let n = self.rows;
        let tag = self.ctx_tag();
        let mut m = self.attach_prime(tag);
        let mut inv = Matrix::identity(n).attach_prime(tag);
        for k in 0..n {
            let pi = (k..n).find(|&i| !m[(i, k)].is_zero())?;
            m.swap_rows(pi, k);
            inv.swap_rows(pi, k);
            let c = m[(k, k)].inv_scalar()?;
            m.scale_row(k, &c);
            inv.scale_row(k, &c);
            for i in 0..n {
                if i != k && !m[(i, k)].is_zero() {
                    let f = -m[(i, k)].clone();
                    m.add_row(i, k, &f);
                    inv.add_row(i, k, &f);
                }
            }
        }
        Some(inv)
    }

    /// Rank over the scalar field.
    pub fn rank(&self) -> usize {
        let mut m = self.attach_prime(self.ctx_tag());
        let mut rank = 0;
        let mut row = 0;
        for col in 0..m.cols {
            let Some(pi) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(pi, row);
            let inv = m[(row, col)].inv_scalar().expect("nonzero pivot");
            for i in (row + 1)..m.rows {
                if !m[(i, col)].is_zero() {
                    let f = -(m[(i, col)].clone() * inv.clone());
                    m.add_row(i, row, &f);
                }
            }
            rank += 1;
            row += 1;
            if row == m.rows {
                break;
            }
        }
        rank
    }

    /// A basis of the right nullspace, as columns.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let tag = self.ctx_tag();
        let mut m = self.attach_prime(tag);
        let rows = m.rows;
        let cols = m.cols;
        let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
        let mut row = 0;
        for col in 0..cols {
            let Some(pi) = (row..rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(pi, row);
            let inv = m[(row, col)].inv_scalar().expect("nonzero pivot");
            m.scale_row(row, &inv);
            for i in 0..rows {
                if i != row && !m[(i, col)].is_zero() {
                    let f = -m[(i, col)].clone();
                    m.add_row(i, row, &f);
                }
            }
            pivot_of_col[col] = Some(row);
            row += 1;
            if row == rows {
                break;
            }
        }
        let mut basis = Vec::new();
        for free in 0..cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![T::zero().attach_ctx(tag); cols];
            v[free] = T::one().attach_ctx(tag);
            for (col, piv) in pivot_of_col.iter().enumerate() {
                if let Some(r) = piv {
                    v[col] = -m[(*r, free)].clone();
                }
            }
            basis.push(v);
        }
        basis
    }

    /// A basis of the column space, as a matrix whose columns are the chosen
    /// original columns (pivot columns of the echelon form).
    pub fn column_space_basis(&self) -> Matrix<T> {
        let mut m = self.attach_prime(self.ctx_tag());
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            let Some(pi) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(pi, row);
            let inv = m[(row, col)].inv_scalar().expect("nonzero pivot");
            for i in (row + 1)..m.rows {
                if !m[(i, col)].is_zero() {
                    let f = -(m[(i, col)].clone() * inv.clone());
                    m.add_row(i, row, &f);
                }
            }
            pivots.push(col);
            row += 1;
            if row == m.rows {
                break;
            }
        }
        let all_rows: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&all_rows, &pivots)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl<T: MatrixScalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() + rhs[(i, j)].clone()
        })
    }
}

impl<T: MatrixScalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].clone() - rhs[(i, j)].clone()
        })
    }
}

impl<T: MatrixScalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|x| -x.clone())
    }
}

impl<T: MatrixScalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(
            self.cols, rhs.rows,
            "product shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out: Matrix<T> = Matrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = std::mem::replace(&mut out[(i, j)], T::zero());
                    out[(i, j)] = cur + a.clone() * rhs[(k, j)].clone();
                }
            }
        }
        out
    }
}

impl<T: MatrixScalar + fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}", self[(i, j)])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// One elementary-divisor exponent: the power of `p` on a diagonal slot, or
/// `Infinite` for a zero row/column of the diagonalization.
pub type SnfExp = Valuation;

/// Sorted elementary-divisor exponents of a matrix over `Z_(p)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SmithProfile {
    exps: Vec<SnfExp>,
}

impl SmithProfile {
    pub fn new(mut exps: Vec<SnfExp>) -> Self {
        exps.sort();
        SmithProfile { exps }
    }

    pub fn exponents(&self) -> &[SnfExp] {
        &self.exps
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn rank_defect(&self) -> usize {
        self.exps.iter().filter(|e| !e.is_finite()).count()
    }

    /// Finite exponents, sorted.
    pub fn finite_exponents(&self) -> Vec<i64> {
        self.exps.iter().filter_map(|e| e.finite()).collect()
    }

    /// Sum of the finite exponents; the length of the torsion module when
    /// all exponents are finite and nonnegative.
    pub fn colength(&self) -> i64 {
        self.finite_exponents().iter().sum()
    }

    pub fn max_finite(&self) -> Option<i64> {
        self.finite_exponents().into_iter().max()
    }
}

impl fmt::Display for SmithProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Result of the Smith normal form over `Z_(p)`: `u * m * v = d` exactly,
/// with `u`, `v` invertible over the valuation ring and `d` diagonal with
/// entries `p^e`. The inverses ride along because lattice computations need
/// them.
pub struct Snf {
    pub d: Matrix<PLocal>,
    pub u: Matrix<PLocal>,
    pub u_inv: Matrix<PLocal>,
    pub v: Matrix<PLocal>,
    pub v_inv: Matrix<PLocal>,
}

impl Snf {
    pub fn profile(&self) -> SmithProfile {
        let n = self.d.rows().min(self.d.cols());
        SmithProfile::new((0..n).map(|i| self.d[(i, i)].valuation()).collect())
    }
}

impl Matrix<PLocal> {
    /// First nonzero prime tag among the entries, or 0.
    pub fn prime_tag(&self) -> u64 {
        self.ctx_tag()
    }

    /// Minimal valuation over all entries (`Infinite` for the zero matrix).
    pub fn min_valuation(&self) -> Valuation {
        self.data
            .iter()
            .map(|x| x.valuation())
            .fold(Valuation::Infinite, Valuation::min)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integral())
    }

    /// Invertible over the valuation ring: integral with unit determinant.
    pub fn is_r_invertible(&self) -> bool {
        self.is_square() && self.is_integral() && self.det().is_unit()
    }

    /// Smith normal form over `Z_(p)`. Unit factors are normalized into the
    /// transforms, so the diagonal consists of pure powers of `p`. Works for
    /// matrices over the fraction field as well (exponents may be negative).
    pub fn smith_normal_form(&self) -> Snf {
        let p = self.prime_tag();
        let (rows, cols) = (self.rows, self.cols);
        let mut d = if p == 0 { self.clone() } else { self.attach_prime(p) };
        let mut u = Matrix::<PLocal>::identity(rows);
        let mut u_inv = Matrix::<PLocal>::identity(rows);
        let mut v = Matrix::<PLocal>::identity(cols);
        let mut v_inv = Matrix::<PLocal>::identity(cols);

        let steps = rows.min(cols);
        for t in 0..steps {
            // minimal valuation in the remaining block, lexicographically
            // first among ties
            let mut best: Option<(Valuation, usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let val = d[(i, j)].valuation();
                    if !val.is_finite() {
                        continue;
                    }
                    if best.map_or(true, |(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                    }
                }
            }
            let Some((_, pi, pj)) = best else {
                break; // remaining block is zero; trailing slots stay 0
            };
            d.swap_rows(pi, t);
            u.swap_rows(pi, t);
            u_inv.swap_cols(pi, t);
            d.swap_cols(pj, t);
            v.swap_cols(pj, t);
            v_inv.swap_rows(pj, t);

            let pivot = d[(t, t)].clone();
            for i in (t + 1)..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let c = -(d[(i, t)].clone() / pivot.clone());
                d.add_row(i, t, &c);
                u.add_row(i, t, &c);
                u_inv.add_col(t, i, &(-c));
            }
            for j in (t + 1)..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let c = -(d[(t, j)].clone() / pivot.clone());
                d.add_col(j, t, &c);
                v.add_col(j, t, &c);
                v_inv.add_row(t, j, &(-c));
            }
            // normalize the pivot to p^e
            let e = pivot.valuation().finite().unwrap();
            let unit = if e == 0 {
                pivot
            } else {
                pivot / PLocal::p_power(e, p)
            };
            let unit_inv = unit.inv_scalar().unwrap();
            d.scale_row(t, &unit_inv);
            u.scale_row(t, &unit_inv);
            for i in 0..rows {
                let w = u_inv[(i, t)].clone() * unit.clone();
                u_inv[(i, t)] = w;
            }
        }
        Snf {
            d,
            u,
            u_inv,
            v,
            v_inv,
        }
    }

    /// Entrywise residue matrix over `k`; the matrix must be integral.
    pub fn residue(&self) -> Result<Matrix<Fp>> {
        let mut out = Vec::with_capacity(self.data.len());
        for x in &self.data {
            out.push(x.residue()?);
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: out,
        })
    }

    /// Entrywise canonical representative mod `p^k` for an integral matrix.
    pub fn reduce_mod_pk(&self, k: u32) -> Result<Matrix<PLocal>> {
        let p = self.prime_tag();
        let mut out = Vec::with_capacity(self.data.len());
        for x in &self.data {
            out.push(PLocal::from_bigint(x.attach(p).mod_pk(k)?, p));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: out,
        })
    }

    /// `a = b mod p^k` entrywise.
    pub fn congruent_mod_pk(&self, other: &Matrix<PLocal>, k: u32) -> bool {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return false;
        }
        (self - other).min_valuation() >= Valuation::Finite(k as i64)
    }
}

impl Matrix<Fp> {
    pub fn lift(&self, p: u64) -> Matrix<PLocal> {
        self.map(|x| x.lift(p))
    }
}

/// Convenience constructor for tests and the CLI: an integer matrix over
/// `Z_(p)`.
pub fn pmat(p: u64, rows: &[&[i64]]) -> Matrix<PLocal> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| PLocal::from_int(x, p)).collect())
            .collect(),
    )
}

/// Dimension check helper shared by the bound-matrix (min-plus) arithmetic.
pub fn require_same_shape<T, U>(a: &Matrix<T>, b: &Matrix<U>) -> Result<()> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::SizeMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn snf_diagonal_input() {
        let m = pmat(3, &[&[1, 0], &[0, 9]]);
        let s = m.smith_normal_form();
        assert_eq!(
            s.profile().exponents(),
            &[Valuation::Finite(0), Valuation::Finite(2)]
        );
    }

    #[test]
    fn snf_hand_derived_example() {
        // row reduction by hand: unit entry pivots first, the determinant has
        // valuation 2, so the second exponent is 2
        let m = pmat(3, &[&[3, 1], &[0, 3]]);
        let s = m.smith_normal_form();
        assert_eq!(
            s.profile().exponents(),
            &[Valuation::Finite(0), Valuation::Finite(2)]
        );
    }

    #[test]
    fn snf_zero_matrix() {
        let m = pmat(3, &[&[0, 0], &[0, 0]]);
        let s = m.smith_normal_form();
        assert_eq!(
            s.profile().exponents(),
            &[Valuation::Infinite, Valuation::Infinite]
        );
    }

    fn random_pmat(rng: &mut rand_chacha::ChaCha8Rng, p: u64, r: usize, c: usize) -> Matrix<PLocal> {
        Matrix::from_fn(r, c, |_, _| {
            let n = rng.gen_range(-30i64..=30);
            PLocal::from_int(n, p)
        })
    }

    #[test]
    fn snf_round_trip_campaign() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let p = *[3u64, 5, 7].get(rng.gen_range(0..3)).unwrap();
            let r = rng.gen_range(1..=4);
            let c = rng.gen_range(1..=4);
            let m = random_pmat(&mut rng, p, r, c);
            let s = m.smith_normal_form();
            // U * M * V = D exactly
            assert_eq!(&(&s.u * &m) * &s.v, s.d);
            // transforms invertible over R
            assert!(s.u.is_r_invertible(), "u not R-invertible");
            assert!(s.v.is_r_invertible(), "v not R-invertible");
            assert_eq!(&s.u * &s.u_inv, Matrix::identity(r).attach_prime(p));
            assert_eq!(&s.v * &s.v_inv, Matrix::identity(c).attach_prime(p));
            // diagonal is pure p powers, sorted
            let prof = s.profile();
            let exps = prof.exponents();
            for w in exps.windows(2) {
                assert!(w[0] <= w[1]);
            }
            for (i, e) in exps.iter().enumerate() {
                match e {
                    Valuation::Finite(v) => {
                        assert_eq!(s.d[(i, i)], PLocal::p_power(*v, p));
                    }
                    Valuation::Infinite => assert!(s.d[(i, i)].is_zero()),
                }
            }
        }
    }

    #[test]
    fn field_algorithms() {
        let m = pmat(5, &[&[1, 2], &[3, 4]]);
        assert_eq!(m.det(), PLocal::from_int(-2, 5));
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, Matrix::identity(2).attach_prime(5));
        assert_eq!(m.rank(), 2);
        let sing = pmat(5, &[&[1, 2], &[2, 4]]);
        assert_eq!(sing.rank(), 1);
        assert!(sing.inverse().is_none());
        let ns = sing.nullspace();
        assert_eq!(ns.len(), 1);
        // nullspace vector satisfies M v = 0
        let v = Matrix::from_rows(ns[0].iter().map(|x| vec![x.clone()]).collect());
        assert!((&sing * &v).is_zero_matrix());
    }

    #[test]
    fn fp_matrix_algorithms() {
        let m = Matrix::from_rows(vec![
            vec![Fp::new(1, 5), Fp::new(2, 5)],
            vec![Fp::new(3, 5), Fp::new(4, 5)],
        ]);
        let inv = m.inverse().unwrap();
        let prod = &m * &inv;
        assert_eq!(prod, Matrix::<Fp>::identity(2).map(|x| x.attach(5)));
        assert_eq!(m.rank(), 2);
    }
}
