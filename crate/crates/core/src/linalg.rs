//! Linear algebra over truncated power series.
//!
//! Three tools live here:
//!
//! * exact solving of square systems whose matrix is invertible at the
//!   expansion point (every pivot is a unit of the power-series ring);
//! * division-free determinants and characteristic polynomials (Berkowitz),
//!   usable when pivots are not units;
//! * generic rank. A set of series vectors has rank `r` at a generic point
//!   exactly when some `r x r` minor is a nonzero series. Restricting every
//!   entry to a line `x_i = c_i * lambda^{w_i}` through the expansion point
//!   with random slopes maps the lowest nonzero homogeneous part of that minor
//!   to a nonzero polynomial in the slopes, so for generic slopes the minor
//!   stays nonzero. The restricted entries live in the discrete valuation ring
//!   `Q[[lambda]]`, where elimination with a minimal-valuation pivot needs no
//!   precision beyond what the entries already carry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::series::{Series, SeriesError};

/// Errors from series linear algebra.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("empty input")]
    Empty,
    #[error("matrix is singular at the expansion point (no unit pivot in column {column}); recenter at a generic base point")]
    SingularAtBase { column: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The multiplicative inverse of a series with nonzero constant term.
pub fn series_inverse(s: &Series) -> Result<Series, SeriesError> {
    let c0 = s.constant_term();
    if c0.is_zero() {
        return Err(SeriesError::NotInvertible);
    }
    let inv_c0 = c0.recip();
    let one = Series::constant(s.table(), Scalar::one(), s.valid_order());
    let r = &s.scale(&inv_c0) - &one;
    let neg_r = -&r;
    let mut acc = one.clone();
    let mut power = one;
    for _ in 0..s.valid_order() {
        power = &power * &neg_r;
        if power.is_zero() {
            break;
        }
        acc = &acc + &power;
    }
    Ok(acc.scale(&inv_c0))
}

/// Solves `A x = b` for square `A` whose value at the expansion point is
/// invertible. Valid orders propagate through the elimination.
pub fn solve_unit(a: &[Vec<Series>], b: &[Series]) -> Result<Vec<Series>, LinalgError> {
    let n = a.len();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(LinalgError::Dimension("solve_unit expects a square system".into()));
    }
    let mut m: Vec<Vec<Series>> = a.to_vec();
    let mut rhs: Vec<Series> = b.to_vec();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !m[r][col].constant_term().is_zero())
            .ok_or(LinalgError::SingularAtBase { column: col })?;
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let inv = series_inverse(&m[col][col])?;
        for k in col..n {
            m[col][k] = &m[col][k] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for k in col..n {
                let delta = &factor * &m[col][k];
                m[r][k] = &m[r][k] - &delta;
            }
            let delta = &factor * &rhs[col];
            rhs[r] = &rhs[r] - &delta;
        }
    }
    Ok(rhs)
}

/// Characteristic polynomial `det(x I - A)` by Berkowitz's division-free
/// algorithm. Coefficients are returned highest degree first (leading 1).
pub fn charpoly(a: &[Vec<Series>]) -> Result<Vec<Series>, LinalgError> {
    let n = a.len();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if a.iter().any(|r| r.len() != n) {
        return Err(LinalgError::Dimension("charpoly expects a square matrix".into()));
    }
    let table = a[0][0].table().clone();
    let order = a
        .iter()
        .flat_map(|r| r.iter().map(|s| s.valid_order()))
        .min()
        .unwrap();
    let one = Series::constant(&table, Scalar::one(), order);
    let mut v = vec![one.clone()];
    for k in 0..n {
        let mut t = vec![one.clone(), -&a[k][k]];
        let mut x: Vec<Series> = (0..k).map(|i| a[i][k].clone()).collect();
        for _ in 0..k {
            let mut dot = Series::zero(&table, order);
            for (i, xi) in x.iter().enumerate() {
                if !a[k][i].is_zero() && !xi.is_zero() {
                    dot = &dot + &(&a[k][i] * xi);
                }
            }
            t.push(-&dot);
            let mut nx = Vec::with_capacity(k);
            for i in 0..k {
                let mut acc = Series::zero(&table, order);
                for (j, xj) in x.iter().enumerate() {
                    if !a[i][j].is_zero() && !xj.is_zero() {
                        acc = &acc + &(&a[i][j] * xj);
                    }
                }
                nx.push(acc);
            }
            x = nx;
        }
        let mut nv = Vec::with_capacity(k + 2);
        for i in 0..k + 2 {
            let mut acc = Series::zero(&table, order);
            for (j, vj) in v.iter().enumerate() {
                if i >= j && i - j < t.len() && !t[i - j].is_zero() && !vj.is_zero() {
                    acc = &acc + &(&t[i - j] * vj);
                }
            }
            nv.push(acc);
        }
        v = nv;
    }
    Ok(v)
}

/// Determinant via the characteristic polynomial's constant coefficient.
pub fn det(a: &[Vec<Series>]) -> Result<Series, LinalgError> {
    let cp = charpoly(a)?;
    let n = a.len();
    let c = cp[n].clone();
    Ok(if n % 2 == 0 { c } else { -&c })
}

/// Outcome of a generic-rank computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankInfo {
    /// Largest rank found along the sampled lines.
    pub rank: usize,
    /// Precision (in weighted degree) carried by the elimination.
    pub precision: u32,
    /// Whether all sampled lines agreed.
    pub lines_agree: bool,
}

/// Deterministic pseudo-random line slopes, one per table variable.
pub fn line_directions(nvars: usize, count: usize, seed: u64) -> Vec<Vec<Scalar>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..nvars)
                .map(|_| {
                    let mut k = 0i64;
                    while k == 0 {
                        k = rng.gen_range(-11..=11);
                    }
                    Scalar::int(k)
                })
                .collect()
        })
        .collect()
}

fn uni_mul_trunc(a: &[Scalar], b: &[Scalar], len: usize) -> Vec<Scalar> {
    let mut out = vec![Scalar::zero(); len];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() || i >= len {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            if !y.is_zero() {
                out[i + j] += &(x * y);
            }
        }
    }
    out
}

/// `a / u` for a unit `u` (nonzero constant term), to `len` coefficients.
fn uni_div(a: &[Scalar], u: &[Scalar], len: usize) -> Vec<Scalar> {
    let inv0 = u[0].recip();
    let mut q = vec![Scalar::zero(); len];
    for k in 0..len {
        let mut acc = if k < a.len() { a[k].clone() } else { Scalar::zero() };
        for j in 1..=k {
            if j < u.len() && !u[j].is_zero() && !q[k - j].is_zero() {
                acc -= &(&u[j] * &q[k - j]);
            }
        }
        q[k] = acc * &inv0;
    }
    q
}

fn valuation(a: &[Scalar]) -> Option<usize> {
    a.iter().position(|c| !c.is_zero())
}

/// Rank over `Q((lambda))` of the matrix restricted to one line.
pub fn rank_on_line(rows: &[Vec<Series>], dir: &[Scalar]) -> (usize, u32) {
    if rows.is_empty() || rows[0].is_empty() {
        return (0, 0);
    }
    let p = rows
        .iter()
        .flat_map(|r| r.iter().map(|s| s.valid_order()))
        .min()
        .unwrap();
    let len = p as usize + 1;
    let mut m: Vec<Vec<Vec<Scalar>>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| {
                    let mut v = s.on_line(dir);
                    v.truncate(len);
                    v
                })
                .collect()
        })
        .collect();
    let nrows = m.len();
    let ncols = m[0].len();
    let mut row_used = vec![false; nrows];
    let mut col_used = vec![false; ncols];
    let mut rank = 0;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for r in (0..nrows).filter(|&r| !row_used[r]) {
            for c in (0..ncols).filter(|&c| !col_used[c]) {
                if let Some(v) = valuation(&m[r][c]) {
                    if best.map_or(true, |b| v < b.2) {
                        best = Some((r, c, v));
                    }
                }
            }
        }
        let Some((pr, pc, v)) = best else { break };
        row_used[pr] = true;
        col_used[pc] = true;
        rank += 1;
        let unit: Vec<Scalar> = m[pr][pc][v..].to_vec();
        let pivot_row = m[pr].clone();
        for r in (0..nrows).filter(|&r| !row_used[r]) {
            let Some(va) = valuation(&m[r][pc]) else { continue };
            debug_assert!(va >= v);
            let shifted = &m[r][pc][v..];
            let q = uni_div(shifted, &unit, len - v);
            for c in 0..ncols {
                if col_used[c] && c != pc {
                    continue;
                }
                let prod = uni_mul_trunc(&q, &pivot_row[c], len);
                for (x, y) in m[r][c].iter_mut().zip(prod.iter()) {
                    *x -= y;
                }
            }
        }
    }
    (rank, p)
}

/// Generic rank of the row vectors, sampled along `lines` random lines.
pub fn generic_rank(rows: &[Vec<Series>], lines: usize, seed: u64) -> RankInfo {
    if rows.is_empty() {
        return RankInfo {
            rank: 0,
            precision: 0,
            lines_agree: true,
        };
    }
    let nvars = rows[0][0].table().len();
    let mut ranks = Vec::new();
    let mut precision = 0;
    for dir in line_directions(nvars, lines.max(1), seed) {
        let (r, p) = rank_on_line(rows, &dir);
        ranks.push(r);
        precision = p;
    }
    let rank = *ranks.iter().max().unwrap();
    RankInfo {
        rank,
        precision,
        lines_agree: ranks.iter().all(|&r| r == rank),
    }
}

/// Generic rank of a list of series tuples after truncation to `order`.
pub fn coefficient_rank(vectors: &[Vec<Series>], order: u32) -> Result<usize, LinalgError> {
    if vectors.is_empty() {
        return Err(LinalgError::Empty);
    }
    let width = vectors[0].len();
    if width == 0 || vectors.iter().any(|v| v.len() != width) {
        return Err(LinalgError::Dimension("tuples differ in length".into()));
    }
    let rows: Vec<Vec<Series>> = vectors
        .iter()
        .map(|v| v.iter().map(|s| s.truncate(order)).collect())
        .collect();
    Ok(generic_rank(&rows, 3, 0x5eed_0001).rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Monomial, VariableTable};
    use std::sync::Arc;

    fn tb() -> Arc<VariableTable> {
        VariableTable::new(vec!["t".into(), "s".into()], vec![1, 1]).unwrap()
    }

    fn c(t: &Arc<VariableTable>, x: i64) -> Series {
        Series::constant(t, Scalar::int(x), 6)
    }

    #[test]
    fn inverse_of_one_minus_t() {
        let t = tb();
        let x = Series::variable(&t, 0, 5);
        let s = &c(&t, 1) - &x;
        let inv = series_inverse(&s).unwrap();
        let prod = &inv * &s;
        assert_eq!(prod, Series::constant(&t, Scalar::one(), 5));
        for k in 0..=5u32 {
            assert_eq!(inv.coeff_of(&[k, 0]), Scalar::one());
        }
    }

    #[test]
    fn rank_examples() {
        let t = tb();
        let x = Series::variable(&t, 0, 6);
        let rows = vec![vec![c(&t, 1), c(&t, 0)], vec![c(&t, 0), c(&t, 1)]];
        assert_eq!(coefficient_rank(&rows, 6).unwrap(), 2);
        let rows = vec![
            vec![x.clone(), c(&t, 0)],
            vec![x.scale(&Scalar::int(2)), c(&t, 0)],
        ];
        assert_eq!(coefficient_rank(&rows, 6).unwrap(), 1);
        // (1, 0) and (t, 0) are dependent over the function field.
        let rows = vec![vec![c(&t, 1), c(&t, 0)], vec![x.clone(), c(&t, 0)]];
        assert_eq!(coefficient_rank(&rows, 6).unwrap(), 1);
        assert!(coefficient_rank(&[], 3).is_err());
    }

    #[test]
    fn berkowitz_two_by_two() {
        let t = tb();
        let x = Series::variable(&t, 0, 6);
        let y = Series::variable(&t, 1, 6);
        let m = vec![vec![x.clone(), c(&t, 2)], vec![c(&t, 3), y.clone()]];
        let d = det(&m).unwrap();
        let expect = &(&x * &y) - &c(&t, 6);
        assert_eq!(d, expect);
        let cp = charpoly(&m).unwrap();
        assert_eq!(cp[1], -&(&x + &y));
    }

    #[test]
    fn solve_with_series_matrix() {
        let t = tb();
        let x = Series::variable(&t, 0, 6);
        let a = vec![
            vec![&c(&t, 1) + &x, c(&t, 1)],
            vec![c(&t, 0), &c(&t, 2) - &x],
        ];
        let sol = vec![x.clone(), Series::variable(&t, 1, 6)];
        let b: Vec<Series> = (0..2)
            .map(|i| &(&a[i][0] * &sol[0]) + &(&a[i][1] * &sol[1]))
            .collect();
        let got = solve_unit(&a, &b).unwrap();
        assert_eq!(got[0], sol[0]);
        assert_eq!(got[1], sol[1]);
        let sing = vec![vec![x.clone()]];
        assert!(matches!(
            solve_unit(&sing, &[x.clone()]),
            Err(LinalgError::SingularAtBase { column: 0 })
        ));
        let _ = Monomial::one(2);
    }
}
