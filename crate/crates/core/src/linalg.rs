//! Exact sparse integer matrices and their ranks.
//!
//! The rational rank runs a singleton pre-pass (a column or row with a single
//! entry contributes one to the rank and can be deleted) and then either dense
//! Bareiss elimination on small cores or sparse fraction-free row reduction.
//! Arithmetic starts in `i64` with overflow checks and restarts in `BigInt`.
//! `rank_modp` is an independent elimination over `Z/p`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::LinalgError;

pub const PRIMES: [u64; 2] = [1_000_003, 2_000_003];

const DENSE_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    /// Sorted by `(row, col)`; no zeros, no duplicates.
    entries: Vec<(usize, usize, BigInt)>,
}

impl SparseIntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseIntMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// Sums duplicate positions and drops zeros.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, BigInt)>,
    ) -> Result<Self, LinalgError> {
        let mut acc: HashMap<(usize, usize), BigInt> = HashMap::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(LinalgError::Dimension(format!("entry ({r}, {c}) outside {rows}x{cols}")));
            }
            *acc.entry((r, c)).or_default() += v;
        }
        let mut entries: Vec<(usize, usize, BigInt)> = acc.into_iter().filter(|(_, v)| !v.is_zero()).map(|((r, c), v)| (r, c, v)).collect();
        entries.sort_by_key(|a| (a.0, a.1));
        Ok(SparseIntMatrix { rows, cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        SparseIntMatrix {
            rows: n,
            cols: n,
            entries: (0..n).map(|i| (i, i, BigInt::one())).collect(),
        }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let t = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| (r, c, BigInt::from(v))));
        Self::from_triplets(rows.len(), cols, t).unwrap()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, BigInt)] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|(r, c, v)| (*c, *r, v.clone())).collect();
        entries.sort_by_key(|a| (a.0, a.1));
        SparseIntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// `self * rhs`.
    pub fn mul(&self, rhs: &SparseIntMatrix) -> Result<SparseIntMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut by_row: Vec<Vec<(usize, &BigInt)>> = vec![Vec::new(); rhs.rows];
        for (r, c, v) in &rhs.entries {
            by_row[*r].push((*c, v));
        }
        let mut acc: HashMap<(usize, usize), BigInt> = HashMap::new();
        for (i, k, a) in &self.entries {
            for (j, b) in &by_row[*k] {
                *acc.entry((*i, *j)).or_default() += a * *b;
            }
        }
        Self::from_triplets(self.rows, rhs.cols, acc.into_iter().map(|((r, c), v)| (r, c, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Text form: header `rows cols nnz`, then one `r c value` line per entry
    /// (0-based indices).
    pub fn to_triplet_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, self.entries.len());
        for (r, c, v) in &self.entries {
            let _ = writeln!(s, "{r} {c} {v}");
        }
        s
    }

    pub fn from_triplet_str(text: &str) -> Result<Self, LinalgError> {
        let bad = |m: String| LinalgError::Parse(m);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("missing header".into()))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|x| x.parse().map_err(|e| bad(format!("header: {e}"))))
            .collect::<Result<_, _>>()?;
        if h.len() != 3 {
            return Err(bad(format!("header needs 3 fields, got {}", h.len())));
        }
        let mut t = Vec::with_capacity(h[2]);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(format!("bad entry line {line:?}")));
            }
            let r = f[0].parse().map_err(|e| bad(format!("{e}")))?;
            let c = f[1].parse().map_err(|e| bad(format!("{e}")))?;
            let v: BigInt = f[2].parse().map_err(|e| bad(format!("{e}")))?;
            t.push((r, c, v));
        }
        if t.len() != h[2] {
            return Err(bad(format!("header announces {} entries, found {}", h[2], t.len())));
        }
        let m = Self::from_triplets(h[0], h[1], t)?;
        if m.nnz() != h[2] {
            return Err(bad("duplicate or zero entries".into()));
        }
        Ok(m)
    }

    /// Exact rank over the rationals.
    pub fn rank(&self) -> usize {
        let rows = self.row_lists(|v| Some(v.clone()));
        let (base, core) = singleton_pass(rows, self.cols);
        if core.is_empty() {
            return base;
        }
        base + core_rank(core)
    }

    /// Rank of the reduction modulo the prime `p`.
    pub fn rank_modp(&self, p: u64) -> Result<usize, LinalgError> {
        if !is_prime(p) || p >= 1 << 32 {
            return Err(LinalgError::NotPrime(p));
        }
        let pb = BigInt::from(p);
        let rows = self.row_lists(|v| {
            let r = v.mod_floor(&pb).to_u64().unwrap();
            (r != 0).then_some(r)
        });
        let (base, core) = singleton_pass(rows, self.cols);
        Ok(base + modp_rank(core, p))
    }

    fn row_lists<T>(&self, f: impl Fn(&BigInt) -> Option<T>) -> Vec<Vec<(usize, T)>> {
        let mut rows: Vec<Vec<(usize, T)>> = (0..self.rows).map(|_| Vec::new()).collect();
        for (r, c, v) in &self.entries {
            if let Some(x) = f(v) {
                rows[*r].push((*c, x));
            }
        }
        rows
    }
}

/// Repeatedly removes rows holding a column's only entry and rows with a
/// single entry (clearing that column). Returns the rank found and the
/// remaining nonempty rows, re-indexed to dense column numbers.
fn singleton_pass<T: Clone>(rows: Vec<Vec<(usize, T)>>, ncols: usize) -> (usize, Vec<Vec<(usize, T)>>) {
    let mut alive_row: Vec<bool> = rows.iter().map(|r| !r.is_empty()).collect();
    let mut alive_col = vec![true; ncols];
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    let mut col_count = vec![0usize; ncols];
    let mut row_count: Vec<usize> = rows.iter().map(Vec::len).collect();
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row {
            col_rows[c].push(r);
            col_count[c] += 1;
        }
    }
    let mut rank = 0;
    let mut queue_cols: Vec<usize> = (0..ncols).filter(|&c| col_count[c] == 1).collect();
    let mut queue_rows: Vec<usize> = (0..rows.len()).filter(|&r| row_count[r] == 1).collect();
    loop {
        if let Some(c) = queue_cols.pop() {
            if !alive_col[c] || col_count[c] != 1 {
                continue;
            }
            let r = *col_rows[c].iter().find(|&&r| alive_row[r]).unwrap();
            // row r is independent of everything else through column c
            rank += 1;
            alive_row[r] = false;
            for &(c2, _) in &rows[r] {
                if alive_col[c2] {
                    col_count[c2] -= 1;
                    if col_count[c2] == 1 {
                        queue_cols.push(c2);
                    }
                }
            }
            alive_col[c] = false;
            continue;
        }
        if let Some(r) = queue_rows.pop() {
            if !alive_row[r] || row_count[r] != 1 {
                continue;
            }
            let c = rows[r].iter().find(|(c, _)| alive_col[*c]).unwrap().0;
            rank += 1;
            alive_row[r] = false;
            alive_col[c] = false;
            for &r2 in &col_rows[c] {
                if alive_row[r2] {
                    row_count[r2] -= 1;
                    if row_count[r2] == 0 {
                        alive_row[r2] = false;
                    } else if row_count[r2] == 1 {
                        queue_rows.push(r2);
                    }
                }
            }
            continue;
        }
        break;
    }
    // renumber surviving columns by increasing density
    let mut cols: Vec<usize> = (0..ncols).filter(|&c| alive_col[c] && col_count[c] > 0).collect();
    cols.sort_by_key(|&c| (col_count[c], c));
    let mut pos = vec![usize::MAX; ncols];
    for (i, &c) in cols.iter().enumerate() {
        pos[c] = i;
    }
    let mut core: Vec<Vec<(usize, T)>> = rows
        .into_iter()
        .enumerate()
        .filter(|(r, _)| alive_row[*r])
        .map(|(_, row)| {
            let mut v: Vec<(usize, T)> = row.into_iter().filter(|(c, _)| alive_col[*c]).map(|(c, x)| (pos[c], x)).collect();
            v.sort_by_key(|e| e.0);
            v
        })
        .filter(|v| !v.is_empty())
        .collect();
    core.sort_by_key(|r| (r.len(), r.first().map(|e| e.0)));
    (rank, core)
}

fn core_rank(core: Vec<Vec<(usize, BigInt)>>) -> usize {
    let ncols = core.iter().flat_map(|r| r.iter().map(|e| e.0)).max().map_or(0, |m| m + 1);
    if core.len().max(ncols) <= DENSE_LIMIT {
        return bareiss_rank(&core, ncols);
    }
    let small: Option<Vec<Vec<(usize, i64)>>> = core
        .iter()
        .map(|r| r.iter().map(|(c, v)| v.to_i64().map(|x| (*c, x))).collect())
        .collect();
    if let Some(small) = small {
        if let Some(r) = echelon_rank::<i64>(small, ncols) {
            return r;
        }
    }
    echelon_rank::<BigInt>(core, ncols).unwrap()
}

/// Fraction-free dense elimination.
fn bareiss_rank(core: &[Vec<(usize, BigInt)>], ncols: usize) -> usize {
    let mut m: Vec<Vec<BigInt>> = core
        .iter()
        .map(|r| {
            let mut row = vec![BigInt::zero(); ncols];
            for (c, v) in r {
                row[*c] = v.clone();
            }
            row
        })
        .collect();
    let nrows = m.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let piv = m[rank][col].clone();
        for r in rank + 1..nrows {
            let f = m[r][col].clone();
            for c in col..ncols {
                let v = (&piv * &m[r][c] - &f * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
        }
        prev = piv;
        rank += 1;
    }
    rank
}

trait Exact: Clone + Sized {
    fn zero_val() -> Self;
    fn is_zero_val(&self) -> bool;
    fn gcd_val(&self, other: &Self) -> Self;
    fn div_val(&self, d: &Self) -> Self;
    fn is_unit(&self) -> bool;
    /// `a * x - b * y`, `None` on overflow.
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
}

impl Exact for i64 {
    fn zero_val() -> Self {
        0
    }
    fn is_zero_val(&self) -> bool {
        *self == 0
    }
    fn gcd_val(&self, other: &Self) -> Self {
        self.gcd(other)
    }
    fn div_val(&self, d: &Self) -> Self {
        self / d
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        let v = (*a as i128) * (*x as i128) - (*b as i128) * (*y as i128);
        i64::try_from(v).ok().filter(|v| *v != i64::MIN)
    }
}

impl Exact for BigInt {
    fn zero_val() -> Self {
        BigInt::zero()
    }
    fn is_zero_val(&self) -> bool {
        self.is_zero()
    }
    fn gcd_val(&self, other: &Self) -> Self {
        self.gcd(other)
    }
    fn div_val(&self, d: &Self) -> Self {
        self / d
    }
    fn is_unit(&self) -> bool {
        self.abs().is_one()
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
}

/// Sparse fraction-free row echelon; `None` if `T` overflowed.
fn echelon_rank<T: Exact>(rows: Vec<Vec<(usize, T)>>, ncols: usize) -> Option<usize> {
    let mut pivots: Vec<Option<Vec<(usize, T)>>> = vec![None; ncols];
    let mut rank = 0;
    for mut row in rows {
        while let Some(&(lead, _)) = row.first() {
            let Some(p) = &pivots[lead] else {
                make_primitive(&mut row);
                pivots[lead] = Some(row);
                rank += 1;
                break;
            };
            row = combine(&row, p)?;
        }
    }
    Some(rank)
}

/// Eliminates the leading entry of `row` using pivot `p` (same lead).
fn combine<T: Exact>(row: &[(usize, T)], p: &[(usize, T)]) -> Option<Vec<(usize, T)>> {
    let a = &p[0].1;
    let b = &row[0].1;
    let g = a.gcd_val(b);
    let (a, b) = (a.div_val(&g), b.div_val(&g));
    let zero = T::zero_val();
    let mut out = Vec::with_capacity(row.len() + p.len());
    let (mut i, mut j) = (1, 1);
    while i < row.len() || j < p.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = p.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ci < cj {
            let v = T::mul_sub(&a, &row[i].1, &zero, &zero)?;
            i += 1;
            (ci, v)
        } else if cj < ci {
            let v = T::mul_sub(&zero, &zero, &b, &p[j].1)?;
            j += 1;
            (cj, v)
        } else {
            let v = T::mul_sub(&a, &row[i].1, &b, &p[j].1)?;
            i += 1;
            j += 1;
            (ci, v)
        };
        if !v.is_zero_val() {
            out.push((c, v));
        }
    }
    make_primitive(&mut out);
    Some(out)
}

fn make_primitive<T: Exact>(row: &mut [(usize, T)]) {
    let Some(first) = row.first() else {
        return;
    };
    let mut g = first.1.clone();
    for (_, v) in row.iter().skip(1) {
        if g.is_unit() {
            return;
        }
        g = g.gcd_val(v);
    }
    if !g.is_unit() && !g.is_zero_val() {
        for (_, v) in row.iter_mut() {
            *v = v.div_val(&g);
        }
    }
}

fn modp_rank(rows: Vec<Vec<(usize, u64)>>, p: u64) -> usize {
    let ncols = rows.iter().flat_map(|r| r.iter().map(|e| e.0)).max().map_or(0, |m| m + 1);
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = vec![None; ncols];
    let mut rank = 0;
    for mut row in rows {
        while let Some(&(lead, lv)) = row.first() {
            match &pivots[lead] {
                None => {
                    let inv = pow_mod(lv, p - 2, p);
                    for e in row.iter_mut() {
                        e.1 = mul_mod(e.1, inv, p);
                    }
                    pivots[lead] = Some(row);
                    rank += 1;
                    break;
                }
                Some(piv) => {
                    // row -= lv * piv, pivot lead is 1
                    let mut out = Vec::with_capacity(row.len() + piv.len());
                    let (mut i, mut j) = (1, 1);
                    while i < row.len() || j < piv.len() {
                        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
                        let cj = piv.get(j).map_or(usize::MAX, |e| e.0);
                        if ci < cj {
                            out.push(row[i]);
                            i += 1;
                        } else {
                            let sub = mul_mod(lv, piv[j].1, p);
                            let base = if ci == cj {
                                i += 1;
                                row[i - 1].1
                            } else {
                                0
                            };
                            let v = (base + p - sub) % p;
                            if v != 0 {
                                out.push((cj, v));
                            }
                            j += 1;
                        }
                    }
                    row = out;
                }
            }
        }
    }
    rank
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Rational rank together with the ranks modulo [`PRIMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedRank {
    pub rank: usize,
    pub modp: [usize; 2],
}

impl CertifiedRank {
    pub fn of(m: &SparseIntMatrix) -> Self {
        CertifiedRank {
            rank: m.rank(),
            modp: [m.rank_modp(PRIMES[0]).unwrap(), m.rank_modp(PRIMES[1]).unwrap()],
        }
    }

    pub fn certified(&self) -> bool {
        self.modp.iter().all(|&r| r == self.rank)
    }
}

/// `h^k = dim C^k - rank d^k - rank d^{k-1}` after checking `d^k d^{k-1} = 0`.
/// Missing matrices stand for zero maps.
pub fn cohomology_dims(dim: usize, incoming: Option<&SparseIntMatrix>, outgoing: Option<&SparseIntMatrix>) -> Result<usize, LinalgError> {
    if let Some(i) = incoming {
        if i.rows() != dim {
            return Err(LinalgError::Dimension(format!(
                "incoming map has {} rows, space has dim {dim}",
                i.rows()
            )));
        }
    }
    if let Some(o) = outgoing {
        if o.cols() != dim {
            return Err(LinalgError::Dimension(format!(
                "outgoing map has {} columns, space has dim {dim}",
                o.cols()
            )));
        }
    }
    if let (Some(i), Some(o)) = (incoming, outgoing) {
        let prod = o.mul(i)?;
        if !prod.is_zero() {
            return Err(LinalgError::NonzeroComposite { nonzero: prod.nnz() });
        }
    }
    let rin = incoming.map_or(0, SparseIntMatrix::rank);
    let rout = outgoing.map_or(0, SparseIntMatrix::rank);
    Ok(dim - rin - rout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ranks() {
        assert_eq!(SparseIntMatrix::zero(3, 4).rank(), 0);
        assert_eq!(SparseIntMatrix::from_dense(&[vec![1, 2], vec![2, 4]]).rank(), 1);
        let id = SparseIntMatrix::identity(5);
        for p in PRIMES {
            assert_eq!(id.rank_modp(p).unwrap(), 5);
        }
        assert_eq!(SparseIntMatrix::from_dense(&[vec![0, 0], vec![0, 0]]).rank(), 0);
    }

    #[test]
    fn modular_divergence() {
        let p = 1_000_003;
        let m = SparseIntMatrix::from_dense(&[vec![p as i64]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.rank_modp(p).unwrap(), 0);
        assert_eq!(m.rank_modp(1_000_000), Err(LinalgError::NotPrime(1_000_000)));
    }

    #[test]
    fn triplet_round_trip() {
        let m = SparseIntMatrix::from_dense(&[vec![0, -3, 1], vec![7, 0, 0]]);
        let s = m.to_triplet_string();
        assert_eq!(s, "2 3 3\n0 1 -3\n0 2 1\n1 0 7\n");
        assert_eq!(SparseIntMatrix::from_triplet_str(&s).unwrap(), m);
        assert!(SparseIntMatrix::from_triplet_str("2 2 1\n").is_err());
        assert!(SparseIntMatrix::from_triplet_str("2 2 1\n5 0 1\n").is_err());
    }

    #[test]
    fn cohomology_small() {
        assert_eq!(cohomology_dims(3, None, None).unwrap(), 3);
        let inj = SparseIntMatrix::from_dense(&[vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(cohomology_dims(2, Some(&SparseIntMatrix::zero(2, 0)), Some(&inj)).unwrap(), 0);
        let a = SparseIntMatrix::from_dense(&[vec![1], vec![1]]);
        let b = SparseIntMatrix::from_dense(&[vec![1, 0]]);
        assert!(matches!(
            cohomology_dims(2, Some(&a), Some(&b)),
            Err(LinalgError::NonzeroComposite { .. })
        ));
    }

    #[test]
    fn sparse_path_matches_dense_path() {
        // block diagonal copies of a rank-2 block push the core above the dense limit
        let block = [[2i64, 4, 6], [1, 3, 5], [3, 7, 11]];
        let k = 90;
        let mut t = Vec::new();
        for b in 0..k {
            for i in 0..3 {
                for j in 0..3 {
                    t.push((3 * b + i, 3 * b + j, BigInt::from(block[i][j])));
                }
            }
        }
        let m = SparseIntMatrix::from_triplets(3 * k, 3 * k, t).unwrap();
        assert_eq!(m.rank(), 2 * k);
        assert_eq!(m.rank_modp(PRIMES[0]).unwrap(), 2 * k);
    }

    #[test]
    fn big_entries_fall_back_to_bigint() {
        let big = i64::MAX / 3;
        let rows: Vec<Vec<i64>> = (0..210)
            .map(|i| {
                (0..210)
                    .map(|j| {
                        if (i + j) % 7 == 0 {
                            big - (i * j) as i64
                        } else if i == j {
                            1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let m = SparseIntMatrix::from_dense(&rows);
        let r = m.rank();
        assert!(r <= 210);
        assert_eq!(r, m.transpose().rank());
        assert_eq!(r, bareiss_rank(&m.row_lists(|v| Some(v.clone())), 210));
    }
}
