//! Dense exact-rational matrices: just enough linear algebra for kernel
//! computations and characteristic polynomials of small projected operators.

use crate::{qint, Q};
use num::{One, Signed, Zero};

/// Dense matrix over ℚ, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Q>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(i, j)] += prod;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert!(self.rows == other.rows && self.cols == other.cols);
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Mat {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn trace(&self) -> Q {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)].clone()).fold(Q::zero(), |a, b| a + b)
    }

    /// Reduces self to reduced row echelon form in place; returns the pivot
    /// column of each pivot row.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            // Partial pivoting by largest absolute value keeps intermediate
            // numerators small on the structured systems we solve.
            let mut best: Option<usize> = None;
            for i in r..self.rows {
                if !self[(i, c)].is_zero()
                    && best.is_none_or(|b| self[(i, c)].abs() > self[(b, c)].abs())
                {
                    best = Some(i);
                }
            }
            let Some(p) = best else { continue };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in c..self.cols {
                        let v = &self[(i, j)] - &f * &self[(r, j)];
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Basis of the right kernel {x : Ax = 0}, in reduced echelon form over
    /// the free coordinates taken in increasing index order. Deterministic.
    pub fn kernel_basis(&self) -> Vec<Vec<Q>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_rows: Vec<(usize, usize)> =
            pivots.iter().copied().enumerate().map(|(r, c)| (c, r)).collect();
        let is_pivot = |c: usize| pivot_rows.iter().any(|&(pc, _)| pc == c);
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot(free) {
                continue;
            }
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            for &(pc, pr) in &pivot_rows {
                v[pc] = -m[(pr, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Characteristic polynomial det(xI − A), monic, by the Faddeev–LeVerrier
    /// recursion. Returned as coefficients `c[0] + c[1] x + … + c[n] x^n`.
    pub fn char_poly(&self) -> Vec<Q> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut coeffs = vec![Q::zero(); n + 1];
        coeffs[n] = Q::one();
        let mut m = Mat::zero(n, n);
        for k in 1..=n {
            // M_k = A·M_{k−1} + c_{n−k+1}·I, c_{n−k} = −tr(A·M_k)/k
            let am = self.mul(&m);
            m = am;
            let c_prev = coeffs[n - k + 1].clone();
            for i in 0..n {
                m[(i, i)] += &c_prev;
            }
            let t = self.mul(&m).trace();
            coeffs[n - k] = -t / qint(k as i64);
        }
        coeffs
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

/// Renders a monic polynomial with rational coefficients, lowest degree last,
/// e.g. `x^5 - 8x^3` for `[0,0,0,-8,0,1]`.
pub fn poly_to_string(coeffs: &[Q]) -> String {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let var = match k {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{k}"),
        };
        let coef = if mag.is_one() && k > 0 { String::new() } else { mag.to_string() };
        let body = format!("{coef}{var}");
        if terms.is_empty() {
            terms.push(if c.is_negative() { format!("-{body}") } else { body });
        } else if c.is_negative() {
            terms.push(format!("- {body}"));
        } else {
            terms.push(format!("+ {body}"));
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ")
    }
}

/// Multiplies two coefficient vectors (lowest degree first).
pub fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let prod = x * y;
            out[i + j] += prod;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qrat;

    #[test]
    fn rref_and_kernel() {
        // x + y + z = 0, x - y = 0 has kernel spanned by (1, 1, -2).
        let m = Mat::from_rows(vec![
            vec![qint(1), qint(1), qint(1)],
            vec![qint(1), qint(-1), qint(0)],
        ]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        let v = &k[0];
        let ratio = &v[0] / &v[2];
        assert_eq!(ratio, qrat(-1, 2));
        assert_eq!(v[0], v[1]);
    }

    #[test]
    fn char_poly_companion() {
        // Companion matrix of x^2 - x - 1.
        let m = Mat::from_rows(vec![vec![qint(0), qint(1)], vec![qint(1), qint(1)]]);
        assert_eq!(m.char_poly(), vec![qint(-1), qint(-1), qint(1)]);
    }

    #[test]
    fn char_poly_with_rational_entries() {
        let m = Mat::from_rows(vec![
            vec![qrat(1, 2), qint(0)],
            vec![qint(3), qrat(-1, 2)],
        ]);
        // (x - 1/2)(x + 1/2) = x^2 - 1/4
        assert_eq!(m.char_poly(), vec![qrat(-1, 4), qint(0), qint(1)]);
    }

    #[test]
    fn kernel_of_full_rank_is_empty() {
        let m = Mat::identity(3);
        assert!(m.kernel_basis().is_empty());
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn poly_display() {
        let p = vec![qint(0), qint(0), qint(0), qint(-8), qint(0), qint(1)];
        assert_eq!(poly_to_string(&p), "x^5 - 8x^3");
    }
}
