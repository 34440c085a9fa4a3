//! Exact linear algebra: dense matrices over cyclotomic fields with kernel
//! and span computations, and Smith/Hermite normal forms over the integers.
//!
//! The cyclotomic eliminations normalize each pivot row once (one field
//! inversion per pivot) and otherwise use only multiply-subtract, which keeps
//! denominators tame at the scales this crate works at. Pivoting is by column
//! order with rows in arrival order, so results are deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::cyclotomic::Cyc;
use crate::error::{Error, Result};
use crate::rational::Rational;

// ---------------------------------------------------------------------------
// Cyclotomic matrices
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq)]
pub struct CycMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Cyc>,
}

impl CycMat {
    pub fn zero(rows: usize, cols: usize) -> CycMat {
        CycMat { rows, cols, data: vec![Cyc::from_integer(0); rows * cols] }
    }

    pub fn identity(n: usize) -> CycMat {
        let mut m = CycMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, Cyc::from_integer(1));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cyc) -> CycMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CycMat { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Cyc {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cyc) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Cyc] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &CycMat) -> CycMat {
        assert_eq!(self.cols, other.rows);
        CycMat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Cyc::from_integer(0);
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                let b = other.get(k, j);
                if b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    pub fn apply(&self, v: &[Cyc]) -> Vec<Cyc> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Cyc::from_integer(0);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if !a.is_zero() && !v[k].is_zero() {
                        acc = acc.add(&a.mul(&v[k]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &Cyc) -> CycMat {
        CycMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.mul(c)).collect(),
        }
    }

    pub fn kronecker(&self, other: &CycMat) -> CycMat {
        CycMat::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            let (i1, i2) = (i / other.rows, i % other.rows);
            let (j1, j2) = (j / other.cols, j % other.cols);
            self.get(i1, j1).mul(other.get(i2, j2))
        })
    }

    pub fn conj_transpose(&self) -> CycMat {
        CycMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn eq_value(&self, other: &CycMat) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| a.eq_value(b))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j { e.is_one() } else { e.is_zero() }
                })
            })
    }

    /// `Some(c)` when the matrix equals `c * I`.
    pub fn as_scalar(&self) -> Option<Cyc> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let c = self.get(0, 0).clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.get(i, j);
                if i == j {
                    if !e.eq_value(&c) {
                        return None;
                    }
                } else if !e.is_zero() {
                    return None;
                }
            }
        }
        Some(c)
    }
}

impl std::fmt::Debug for CycMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CycMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// Incremental row echelon over Q(zeta)
// ---------------------------------------------------------------------------

/// Row-space accumulator. Stored rows are pivot-normalized (leading entry 1)
/// and in strictly increasing pivot-column order after [`Self::jordan`].
pub struct RowReducer {
    pub cols: usize,
    /// (pivot column, row) pairs, kept sorted by pivot column.
    rows: Vec<(usize, Vec<Cyc>)>,
}

impl RowReducer {
    pub fn new(cols: usize) -> RowReducer {
        RowReducer { cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the stored basis; stores it if independent.
    /// Returns true when the rank grew.
    pub fn add_row(&mut self, mut row: Vec<Cyc>) -> Result<bool> {
        assert_eq!(row.len(), self.cols);
        for (pc, r) in &self.rows {
            if !row[*pc].is_zero() {
                let f = row[*pc].clone();
                for j in *pc..self.cols {
                    if !r[j].is_zero() {
                        row[j] = row[j].sub(&f.mul(&r[j]));
                    }
                }
            }
        }
        let Some(pc) = row.iter().position(|c| !c.is_zero()) else {
            return Ok(false);
        };
        let inv = row[pc].inv()?;
        for c in row.iter_mut() {
            if !c.is_zero() {
                *c = c.mul(&inv);
            }
        }
        let pos = self.rows.partition_point(|(c, _)| *c < pc);
        self.rows.insert(pos, (pc, row));
        Ok(true)
    }

    /// Back-eliminates so every pivot column is zero outside its pivot row.
    pub fn jordan(&mut self) {
        for i in (0..self.rows.len()).rev() {
            let (pc, prow) = {
                let (pc, r) = &self.rows[i];
                (*pc, r.clone())
            };
            for k in 0..i {
                let f = self.rows[k].1[pc].clone();
                if f.is_zero() {
                    continue;
                }
                for j in pc..self.cols {
                    if !prow[j].is_zero() {
                        let t = f.mul(&prow[j]);
                        self.rows[k].1[j] = self.rows[k].1[j].sub(&t);
                    }
                }
            }
        }
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rows.iter().map(|(c, _)| *c).collect()
    }

    /// Basis of the kernel of the accumulated row space, i.e. all `v` with
    /// `row . v = 0` for every added row. Call after [`Self::jordan`].
    pub fn kernel_basis(&self) -> Vec<Vec<Cyc>> {
        let pivots = self.pivot_columns();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = vec![Cyc::from_integer(0); self.cols];
            v[f] = Cyc::from_integer(1);
            for (pc, row) in &self.rows {
                if !row[f].is_zero() {
                    v[*pc] = row[f].neg();
                }
            }
            basis.push(normalize_leading(v));
        }
        basis
    }
}

/// Scales a vector so its first nonzero coordinate is 1.
pub fn normalize_leading(mut v: Vec<Cyc>) -> Vec<Cyc> {
    if let Some(p) = v.iter().position(|c| !c.is_zero()) {
        let inv = v[p].inv().expect("nonzero leading coefficient");
        for c in v.iter_mut() {
            if !c.is_zero() {
                *c = c.mul(&inv);
            }
        }
    }
    v
}

/// Rank of a set of vectors.
pub fn rank_of(vectors: &[Vec<Cyc>], cols: usize) -> Result<usize> {
    let mut rr = RowReducer::new(cols);
    for v in vectors {
        rr.add_row(v.clone())?;
    }
    Ok(rr.rank())
}

/// Writes `target` as a linear combination of `basis` vectors, if possible.
/// Returns the coefficient vector.
pub fn express_in_span(basis: &[Vec<Cyc>], target: &[Cyc]) -> Result<Option<Vec<Cyc>>> {
    let cols = target.len();
    let k = basis.len();
    // augmented rows [b_i | e_i]; reduce target against them and read the
    // combination off the augmented block
    let mut rr = RowReducer::new(cols + k);
    for (i, b) in basis.iter().enumerate() {
        assert_eq!(b.len(), cols);
        let mut row = b.clone();
        row.extend(vec![Cyc::from_integer(0); k]);
        row[cols + i] = Cyc::from_integer(1);
        rr.add_row(row)?;
    }
    let mut row: Vec<Cyc> = target.to_vec();
    row.extend(vec![Cyc::from_integer(0); k]);
    for (pc, r) in &rr.rows {
        if *pc >= cols {
            break;
        }
        if !row[*pc].is_zero() {
            let f = row[*pc].clone();
            for j in *pc..cols + k {
                if !r[j].is_zero() {
                    row[j] = row[j].sub(&f.mul(&r[j]));
                }
            }
        }
    }
    if row[..cols].iter().any(|c| !c.is_zero()) {
        return Ok(None);
    }
    // target - sum c_i b_i = 0 with c_i = -aug_i
    Ok(Some(row[cols..].iter().map(|c| c.neg()).collect()))
}

/// Kernel basis of a square-or-rectangular cyclotomic matrix `A` (vectors `v`
/// with `A v = 0`).
pub fn matrix_kernel(a: &CycMat) -> Result<Vec<Vec<Cyc>>> {
    let mut rr = RowReducer::new(a.cols);
    for i in 0..a.rows {
        rr.add_row(a.row(i).to_vec())?;
    }
    rr.jordan();
    Ok(rr.kernel_basis())
}

// ---------------------------------------------------------------------------
// Integer matrices: Smith and Hermite normal forms
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> IMat {
        IMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> IMat {
        let mut m = IMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> IMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IMat { rows, cols, data }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> IMat {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        IMat::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows);
        IMat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = BigInt::zero();
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, j);
            }
            acc
        })
    }

    pub fn transpose(&self) -> IMat {
        IMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
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

    /// row[a] += q * row[b]
    fn add_row_mul(&mut self, a: usize, b: usize, q: &BigInt) {
        for j in 0..self.cols {
            let t = self.get(b, j) * q;
            self.data[a * self.cols + j] += t;
        }
    }

    fn add_col_mul(&mut self, a: usize, b: usize, q: &BigInt) {
        for i in 0..self.rows {
            let t = self.get(i, b) * q;
            self.data[i * self.cols + a] += t;
        }
    }

    fn negate_row(&mut self, a: usize) {
        for j in 0..self.cols {
            let v = -self.get(a, j);
            self.set(a, j, v);
        }
    }

    /// Exact inverse of an integer matrix with determinant +-1.
    pub fn inverse_unimodular(&self) -> IMat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        // Gauss-Jordan over rationals, then integrality is asserted.
        let mut a: Vec<Vec<num_rational::BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| num_rational::BigRational::from_integer(self.get(i, j).clone()))
                    .collect()
            })
            .collect();
        let mut inv: Vec<Vec<num_rational::BigRational>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            num_rational::BigRational::one()
                        } else {
                            num_rational::BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let p = (col..n).find(|&r| !a[r][col].is_zero()).expect("singular matrix");
            a.swap(col, p);
            inv.swap(col, p);
            let d = a[col][col].clone();
            for j in 0..n {
                a[col][j] /= &d;
                inv[col][j] /= &d;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in 0..n {
                        let t = &f * &a[col][j];
                        a[r][j] -= t;
                        let t = &f * &inv[col][j];
                        inv[r][j] -= t;
                    }
                }
            }
        }
        IMat::from_fn(n, n, |i, j| {
            assert!(inv[i][j].is_integer(), "matrix is not unimodular");
            inv[i][j].to_integer()
        })
    }
}

impl std::fmt::Debug for IMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub struct Snf {
    /// Diagonal entries, nonnegative, each dividing the next.
    pub d: Vec<BigInt>,
    /// Unimodular transforms with `u * a * v = diag(d)`.
    pub u: IMat,
    pub v: IMat,
}

/// Smith normal form over the integers.
pub fn snf(a: &IMat) -> Snf {
    let mut m = a.clone();
    let mut u = IMat::identity(a.rows);
    let mut v = IMat::identity(a.cols);
    let n = a.rows.min(a.cols);

    'outer: loop {
        for t in 0..n {
            loop {
                // find the nonzero entry of least absolute value in the block
                let mut best: Option<(usize, usize)> = None;
                for i in t..m.rows {
                    for j in t..m.cols {
                        if !m.get(i, j).is_zero()
                            && best
                                .map(|(bi, bj)| m.get(i, j).abs() < m.get(bi, bj).abs())
                                .unwrap_or(true)
                        {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((bi, bj)) = best else { break };
                m.swap_rows(t, bi);
                u.swap_rows(t, bi);
                m.swap_cols(t, bj);
                v.swap_cols(t, bj);

                let mut clean = true;
                for i in t + 1..m.rows {
                    if !m.get(i, t).is_zero() {
                        let q = -(m.get(i, t).div_floor(m.get(t, t)));
                        m.add_row_mul(i, t, &q);
                        u.add_row_mul(i, t, &q);
                        if !m.get(i, t).is_zero() {
                            clean = false;
                        }
                    }
                }
                for j in t + 1..m.cols {
                    if !m.get(t, j).is_zero() {
                        let q = -(m.get(t, j).div_floor(m.get(t, t)));
                        m.add_col_mul(j, t, &q);
                        v.add_col_mul(j, t, &q);
                        if !m.get(t, j).is_zero() {
                            clean = false;
                        }
                    }
                }
                if clean {
                    if m.get(t, t).is_negative() {
                        m.negate_row(t);
                        u.negate_row(t);
                    }
                    break;
                }
            }
        }
        // enforce the divisibility chain
        for i in 0..n.saturating_sub(1) {
            let a_i = m.get(i, i).clone();
            let a_j = m.get(i + 1, i + 1).clone();
            if !a_i.is_zero() && !(&a_j % &a_i).is_zero() {
                // fold column i+1 into column i and rediagonalize
                m.add_col_mul(i, i + 1, &BigInt::one());
                v.add_col_mul(i, i + 1, &BigInt::one());
                continue 'outer;
            }
        }
        break;
    }

    let d = (0..n).map(|i| m.get(i, i).clone()).collect();
    Snf { d, u, v }
}

/// A basis matrix (square, full-rank) for the lattice spanned by the columns
/// of `a`; requires that the columns span a finite-index sublattice of Z^r.
pub fn column_lattice_basis(a: &IMat) -> IMat {
    let s = snf(a);
    let r = a.rows;
    for i in 0..r {
        assert!(!s.d[i].is_zero(), "columns do not span a full-rank lattice");
    }
    // a * Z^cols = u^{-1} * diag(d) * Z^r
    let uinv = s.u.inverse_unimodular();
    IMat::from_fn(r, r, |i, j| uinv.get(i, j) * &s.d[j])
}

// ---------------------------------------------------------------------------
// Small rational matrices (F^{-1}, LDL^T for lattice enumeration)
// ---------------------------------------------------------------------------

pub fn rational_inverse(a: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Err(Error::Validation("singular matrix".into()));
        };
        m.swap(col, p);
        inv.swap(col, p);
        let d = m[col][col].clone();
        for j in 0..n {
            m[col][j] = &m[col][j] / &d;
            inv[col][j] = &inv[col][j] / &d;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in 0..n {
                    let t = &f * &m[col][j];
                    m[r][j] -= &t;
                    let t = &f * &inv[col][j];
                    inv[r][j] -= &t;
                }
            }
        }
    }
    Ok(inv)
}

/// `x^t A y` for a symmetric rational matrix.
pub fn quadratic_value(a: &[Vec<Rational>], x: &[BigInt], y: &[BigInt]) -> Rational {
    let n = a.len();
    let mut acc = Rational::zero();
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if y[j].is_zero() {
                continue;
            }
            let c = Rational::from_integer(&x[i] * &y[j]);
            acc += &(&c * &a[i][j]);
        }
    }
    acc
}

/// LDL^T decomposition of a positive definite rational matrix:
/// returns `(l, d)` with `A = L D L^T`, `L` unit lower triangular.
pub fn ldlt(a: &[Vec<Rational>]) -> Result<(Vec<Vec<Rational>>, Vec<Rational>)> {
    let n = a.len();
    let mut l: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let mut d = vec![Rational::zero(); n];
    for j in 0..n {
        let mut dj = a[j][j].clone();
        for k in 0..j {
            dj -= &(&(&l[j][k] * &l[j][k]) * &d[k]);
        }
        if dj.is_zero() || dj.is_negative() {
            return Err(Error::Validation("matrix is not positive definite".into()));
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut v = a[i][j].clone();
            for k in 0..j {
                v -= &(&(&l[i][k] * &l[j][k]) * &d[k]);
            }
            l[i][j] = &v / &d[j];
        }
    }
    Ok((l, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::e_of;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn kernel_of_simple_matrix() {
        // rows (1, 1, 0), (0, 0, 1): kernel spanned by (1, -1, 0) normalized
        let mut m = CycMat::zero(2, 3);
        m.set(0, 0, Cyc::from_integer(1));
        m.set(0, 1, Cyc::from_integer(1));
        m.set(1, 2, Cyc::from_integer(1));
        let k = matrix_kernel(&m).unwrap();
        assert_eq!(k.len(), 1);
        assert!(k[0][0].is_one());
        assert!(k[0][1].eq_value(&Cyc::from_integer(-1)));
        assert!(k[0][2].is_zero());
    }

    #[test]
    fn kernel_with_cyclotomic_entries() {
        // (x - e(1/3) y) = 0 has kernel (e(1/3), 1) scaled to lead with 1
        let mut m = CycMat::zero(1, 2);
        m.set(0, 0, Cyc::from_integer(1));
        m.set(0, 1, e_of(&r(1, 3)).neg());
        let k = matrix_kernel(&m).unwrap();
        assert_eq!(k.len(), 1);
        let v0 = &k[0][0];
        let v1 = &k[0][1];
        assert!(v0.sub(&e_of(&r(1, 3)).mul(v1)).is_zero());
    }

    #[test]
    fn express_in_span_works() {
        let b1 = vec![Cyc::from_integer(1), Cyc::from_integer(0), Cyc::from_integer(2)];
        let b2 = vec![Cyc::from_integer(0), Cyc::from_integer(1), Cyc::from_integer(3)];
        let t = vec![Cyc::from_integer(2), Cyc::from_integer(-1), Cyc::from_integer(1)];
        let c = express_in_span(&[b1.clone(), b2.clone()], &t).unwrap().unwrap();
        assert!(c[0].eq_value(&Cyc::from_integer(2)));
        assert!(c[1].eq_value(&Cyc::from_integer(-1)));
        let t2 = vec![Cyc::from_integer(0), Cyc::from_integer(0), Cyc::from_integer(1)];
        assert!(express_in_span(&[b1, b2], &t2).unwrap().is_none());
    }

    #[test]
    fn snf_diag_chain() {
        let a = IMat::from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let s = snf(&a);
        // check u*a*v = diag(d) and the divisibility chain
        let prod = s.u.mul(&a).mul(&s.v);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(prod.get(i, j), &s.d[i]);
                } else {
                    assert!(prod.get(i, j).is_zero());
                }
            }
        }
        for i in 0..2 {
            if !s.d[i].is_zero() {
                assert!((&s.d[i + 1] % &s.d[i]).is_zero());
            }
        }
        // unimodularity
        let uinv = s.u.inverse_unimodular();
        assert_eq!(uinv.mul(&s.u), IMat::identity(3));
    }

    #[test]
    fn snf_known_elementary_divisors() {
        // diag(1,1) doubled: 2F for F = I_2 has divisors (2, 2)
        let a = IMat::from_i64(&[vec![2, 0], vec![0, 2]]);
        let s = snf(&a);
        assert_eq!(s.d, vec![BigInt::from(2), BigInt::from(2)]);
    }

    #[test]
    fn ldlt_positive_definite() {
        let a = vec![vec![r(2, 1), r(1, 1)], vec![r(1, 1), r(2, 1)]];
        let (l, d) = ldlt(&a).unwrap();
        assert_eq!(l[1][0], r(1, 2));
        assert_eq!(d[0], r(2, 1));
        assert_eq!(d[1], r(3, 2));
        let bad = vec![vec![r(0, 1), r(1, 1)], vec![r(1, 1), r(0, 1)]];
        assert!(ldlt(&bad).is_err());
    }
}
