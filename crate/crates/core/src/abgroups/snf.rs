//! Smith normal form over the integers.
//!
//! Pivoting is deterministic: the pivot is the entry of smallest absolute
//! value in the active block, ties broken by lowest (row, column). The
//! elimination first runs on `i64` with checked arithmetic and reruns on
//! big integers if any intermediate value overflows, so results never
//! depend on which path produced them.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::matrix::{IntMatrix, Integer};

/// `u * m * v == d` with `u`, `v` unimodular and `d` diagonal with
/// `d[0] | d[1] | ... | d[rank-1]` and zeros afterwards.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub rank: usize,
}

impl Snf {
    /// Nonzero diagonal entries, in order.
    pub fn invariant_factors(&self) -> Vec<Integer> {
        (0..self.rank).map(|i| self.d[(i, i)].clone()).collect()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Snf {
    if let Some(small) = m.to_i64() {
        if let Some(res) = Engine::<i64>::run(m.rows(), m.cols(), small) {
            return res;
        }
    }
    let data = m.data().to_vec();
    Engine::<BigInt>::run(m.rows(), m.cols(), data).expect("big-integer elimination cannot overflow")
}

trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn nil(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn abs_cmp(&self, other: &Self) -> Ordering;
    fn c_add(&self, o: &Self) -> Option<Self>;
    fn c_mul(&self, o: &Self) -> Option<Self>;
    fn c_neg(&self) -> Option<Self>;
    fn quot(&self, o: &Self) -> Self;
    fn divides(&self, o: &Self) -> bool;
    fn into_big(self) -> Integer;
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn nil(&self) -> bool {
        *self == 0
    }
    fn is_neg(&self) -> bool {
        *self < 0
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.unsigned_abs().cmp(&other.unsigned_abs())
    }
    fn c_add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn c_mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn c_neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn quot(&self, o: &Self) -> Self {
        self / o
    }
    fn divides(&self, o: &Self) -> bool {
        o % self == 0
    }
    fn into_big(self) -> Integer {
        Integer::from(self)
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        <BigInt as Zero>::zero()
    }
    fn one() -> Self {
        BigInt::from(1)
    }
    fn nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn abs_cmp(&self, other: &Self) -> Ordering {
        self.magnitude().cmp(other.magnitude())
    }
    fn c_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn c_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn c_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn quot(&self, o: &Self) -> Self {
        self / o
    }
    fn divides(&self, o: &Self) -> bool {
        (o % self).nil()
    }
    fn into_big(self) -> Integer {
        self
    }
}

struct Dense<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Dense { rows: n, cols: n, data }
    }
    #[inline]
    fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }
    /// row[dst] += c * row[src]
    fn add_row(&mut self, dst: usize, src: usize, c: &T) -> Option<()> {
        for k in 0..self.cols {
            let s = &self.data[src * self.cols + k];
            if s.nil() {
                continue;
            }
            let v = self.data[dst * self.cols + k].c_add(&s.c_mul(c)?)?;
            self.data[dst * self.cols + k] = v;
        }
        Some(())
    }
    /// col[dst] += c * col[src]
    fn add_col(&mut self, dst: usize, src: usize, c: &T) -> Option<()> {
        for r in 0..self.rows {
            let s = &self.data[r * self.cols + src];
            if s.nil() {
                continue;
            }
            let v = self.data[r * self.cols + dst].c_add(&s.c_mul(c)?)?;
            self.data[r * self.cols + dst] = v;
        }
        Some(())
    }
    fn neg_row(&mut self, r: usize) -> Option<()> {
        for k in 0..self.cols {
            let v = self.data[r * self.cols + k].c_neg()?;
            self.data[r * self.cols + k] = v;
        }
        Some(())
    }
    fn neg_col(&mut self, c: usize) -> Option<()> {
        for r in 0..self.rows {
            let v = self.data[r * self.cols + c].c_neg()?;
            self.data[r * self.cols + c] = v;
        }
        Some(())
    }
    fn into_int(self) -> IntMatrix {
        IntMatrix::from_raw(self.rows, self.cols, self.data.into_iter().map(Scalar::into_big).collect())
    }
}

struct Engine<T> {
    a: Dense<T>,
    u: Dense<T>,
    u_inv: Dense<T>,
    v: Dense<T>,
    v_inv: Dense<T>,
}

impl<T: Scalar> Engine<T> {
    fn run(rows: usize, cols: usize, data: Vec<T>) -> Option<Snf> {
        let mut e = Engine {
            a: Dense { rows, cols, data },
            u: Dense::identity(rows),
            u_inv: Dense::identity(rows),
            v: Dense::identity(cols),
            v_inv: Dense::identity(cols),
        };
        let rank = e.eliminate()?;
        Some(Snf {
            u: e.u.into_int(),
            u_inv: e.u_inv.into_int(),
            d: e.a.into_int(),
            v: e.v.into_int(),
            v_inv: e.v_inv.into_int(),
            rank,
        })
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }

    /// row[dst] += c * row[src]
    fn row_add(&mut self, dst: usize, src: usize, c: &T) -> Option<()> {
        self.a.add_row(dst, src, c)?;
        self.u.add_row(dst, src, c)?;
        self.u_inv.add_col(src, dst, &c.c_neg()?)
    }

    /// col[dst] += c * col[src]
    fn col_add(&mut self, dst: usize, src: usize, c: &T) -> Option<()> {
        self.a.add_col(dst, src, c)?;
        self.v.add_col(dst, src, c)?;
        self.v_inv.add_row(src, dst, &c.c_neg()?)
    }

    fn row_neg(&mut self, r: usize) -> Option<()> {
        self.a.neg_row(r)?;
        self.u.neg_row(r)?;
        self.u_inv.neg_col(r)
    }

    fn pivot_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.rows {
            for j in t..self.a.cols {
                let x = self.a.at(i, j);
                if x.nil() {
                    continue;
                }
                match best {
                    None => best = Some((i, j)),
                    Some((bi, bj)) => {
                        if x.abs_cmp(self.a.at(bi, bj)) == Ordering::Less {
                            best = Some((i, j));
                        }
                    }
                }
            }
        }
        best
    }

    /// Smallest nonzero entry in row t or column t at or after the diagonal.
    fn pivot_in_cross(&self, t: usize) -> (usize, usize) {
        let mut best = (t, t);
        let mut cand = Vec::new();
        for i in t..self.a.rows {
            cand.push((i, t));
        }
        for j in t + 1..self.a.cols {
            cand.push((t, j));
        }
        cand.sort_unstable();
        let mut found = false;
        for (i, j) in cand {
            let x = self.a.at(i, j);
            if x.nil() {
                continue;
            }
            if !found || x.abs_cmp(self.a.at(best.0, best.1)) == Ordering::Less {
                best = (i, j);
                found = true;
            }
        }
        best
    }

    fn eliminate(&mut self) -> Option<usize> {
        let (m, n) = (self.a.rows, self.a.cols);
        let mut t = 0;
        while t < m.min(n) {
            let Some((pi, pj)) = self.pivot_in_block(t) else { break };
            self.row_swap(t, pi);
            self.col_swap(t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..m {
                    if self.a.at(i, t).nil() {
                        continue;
                    }
                    let q = self.a.at(i, t).quot(self.a.at(t, t)).c_neg()?;
                    self.row_add(i, t, &q)?;
                    if !self.a.at(i, t).nil() {
                        clean = false;
                    }
                }
                for j in t + 1..n {
                    if self.a.at(t, j).nil() {
                        continue;
                    }
                    let q = self.a.at(t, j).quot(self.a.at(t, t)).c_neg()?;
                    self.col_add(j, t, &q)?;
                    if !self.a.at(t, j).nil() {
                        clean = false;
                    }
                }
                if !clean {
                    let (pi, pj) = self.pivot_in_cross(t);
                    self.row_swap(t, pi);
                    self.col_swap(t, pj);
                    continue;
                }
                // Pivot must divide the rest of the block.
                let p = self.a.at(t, t).clone();
                let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !p.divides(self.a.at(i, j))));
                match bad {
                    Some(i) => {
                        self.row_add(t, i, &T::one())?;
                    }
                    None => break,
                }
            }
            if self.a.at(t, t).is_neg() {
                self.row_neg(t)?;
            }
            t += 1;
        }
        Some(t)
    }
}
