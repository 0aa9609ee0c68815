//! The minimal relation among quantum powers of the Euler field and the
//! non-degeneracy classifier built on it.
//!
//! If `E^0, .., E^n` are generically independent and
//! `E^{n+1} = sum_i f_i E^i`, the fields `Z_k = sum_i (E^k f_i) E^i`
//! control whether `h_2` is forced to vanish. A model is non-degenerate when
//! some `E^m` (with `m >= 1`) lies in the span of `E^0, Z_0, .., Z_n`.

use std::fmt;

use serde::Serialize;

use crate::frobenius::{Frobenius, FrobeniusError, VectorField};
use crate::genus1::Genus1Context;
use crate::linalg::{charpoly, det, generic_rank, solve_unit, LinalgError, RankInfo};
use crate::report::{CheckReport, Residuals};
use crate::scalar::Scalar;
use crate::series::{Series, SeriesError};

const RANK_LINES: usize = 3;
const RANK_SEED: u64 = 0x5eed_0003;

/// Errors from the Euler-span computations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpanError {
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Euler powers stayed independent through E^{max_n}; raise the limit")]
    NotStabilized { max_n: usize },
    #[error("E^0..E^{n} are independent generically but not at the base point; choose another base point")]
    SingularAtBase { n: usize },
    #[error("sampled lines disagree on the rank of E^0..E^{k}; raise the order")]
    RankUnstable { k: usize },
}

impl From<SeriesError> for SpanError {
    fn from(e: SeriesError) -> Self {
        SpanError::Frobenius(e.into())
    }
}

/// `E^{n+1} = sum_{i=0}^{n} f_i E^i`.
#[derive(Debug, Clone)]
pub struct EulerSpan {
    pub n: usize,
    pub f: Vec<Series>,
    /// Component indices on which the relation was solved.
    pub columns: Vec<usize>,
    pub rank: RankInfo,
    /// Residual of the relation on every component.
    pub relation: CheckReport,
}

fn components(fr: &Frobenius, k: usize) -> Result<Vec<Series>, FrobeniusError> {
    Ok(fr.euler_power(k)?.components.clone())
}

/// Pivot columns of a scalar matrix, by Gaussian elimination.
fn pivot_columns(rows: &[Vec<Scalar>]) -> Vec<usize> {
    let mut m = rows.to_vec();
    let width = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let factor = &m[i][c] * &inv;
                for j in c..width {
                    let d = &factor * &m[r][j];
                    m[i][j] -= &d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

/// Finds the smallest `n` with `E^{n+1}` in the generic span of
/// `E^0, .., E^n` (searching `n < max_n`) and solves for the `f_i`.
pub fn euler_relation(fr: &Frobenius, max_n: usize) -> Result<EulerSpan, SpanError> {
    let mut rows: Vec<Vec<Series>> = vec![components(fr, 0)?];
    let mut last_info = generic_rank(&rows, RANK_LINES, RANK_SEED);
    let mut n = None;
    for k in 1..=max_n.max(1) {
        rows.push(components(fr, k)?);
        let info = generic_rank(&rows, RANK_LINES, RANK_SEED);
        if !info.lines_agree {
            return Err(SpanError::RankUnstable { k });
        }
        if info.rank < k + 1 {
            n = Some(k - 1);
            break;
        }
        last_info = info;
    }
    let n = n.ok_or(SpanError::NotStabilized { max_n })?;
    let constants: Vec<Vec<Scalar>> = rows[..=n]
        .iter()
        .map(|r| r.iter().map(Series::constant_term).collect())
        .collect();
    let columns = pivot_columns(&constants);
    if columns.len() < n + 1 {
        return Err(SpanError::SingularAtBase { n });
    }
    let a: Vec<Vec<Series>> = columns
        .iter()
        .map(|&c| (0..=n).map(|i| rows[i][c].clone()).collect())
        .collect();
    let b: Vec<Series> = columns.iter().map(|&c| rows[n + 1][c].clone()).collect();
    let f = solve_unit(&a, &b)?;

    let mut res = Residuals::new();
    for c in 0..fr.rank() {
        let mut r = rows[n + 1][c].clone();
        for (i, fi) in f.iter().enumerate() {
            r = &r - &(fi * &rows[i][c]);
        }
        res.push(|| format!("component {}", c + 1), &r);
    }
    Ok(EulerSpan {
        n,
        f,
        columns,
        rank: last_info,
        relation: res.finish("euler-relation", "minimal Euler power relation"),
    })
}

/// `E^k f_i` for `0 <= k <= max_k` from the recursion in `f` alone:
/// `E^0 f_i = -(i+1) f_{i+1}`, `E^0 f_n = n+1`, and for `k > 0`
/// `E^k f_0 = f_0 E^{k-1} f_n`, `E^k f_i = f_i E^{k-1} f_n + E^{k-1} f_{i-1}`.
pub fn f_derivative_table(span: &EulerSpan, max_k: usize) -> Vec<Vec<Series>> {
    let n = span.n;
    let f = &span.f;
    let table = f[0].table();
    let order = f.iter().map(Series::valid_order).min().unwrap();
    let mut d: Vec<Vec<Series>> = Vec::with_capacity(max_k + 1);
    let first: Vec<Series> = (0..=n)
        .map(|i| {
            if i == n {
                Series::constant(table, Scalar::int(n as i64 + 1), order)
            } else {
                f[i + 1].scale(&Scalar::int(-(i as i64 + 1)))
            }
        })
        .collect();
    d.push(first);
    for k in 1..=max_k {
        let prev = &d[k - 1];
        let row: Vec<Series> = (0..=n)
            .map(|i| {
                let t = &f[i] * &prev[n];
                if i == 0 {
                    t
                } else {
                    &t + &prev[i - 1]
                }
            })
            .collect();
        d.push(row);
    }
    d
}

/// The derivative laws for the `f_i` along `E^0`, `E`, `E^2` and `E^k`, and
/// agreement of the derivative table with direct differentiation.
pub fn check_f_derivatives(fr: &Frobenius, span: &EulerSpan, max_k: usize) -> Result<CheckReport, SpanError> {
    let n = span.n;
    let f = &span.f;
    let t = fr.table();
    let mut res = Residuals::new();
    let e0 = fr.euler_power(0)?;
    let e1 = fr.euler_power(1)?;
    let e2 = fr.euler_power(2)?;
    for i in 0..=n {
        let lhs = e0.apply(&f[i])?;
        let rhs = if i < n {
            f[i + 1].scale(&Scalar::int(-(i as i64 + 1)))
        } else {
            Series::constant(t, Scalar::int(n as i64 + 1), lhs.valid_order())
        };
        res.push(|| format!("(i) E^0 f_{i}"), &(&lhs - &rhs));
        let lhs = e1.apply(&f[i])?;
        let rhs = f[i].scale(&Scalar::int((n + 1 - i) as i64));
        res.push(|| format!("(ii) E f_{i}"), &(&lhs - &rhs));
        let lhs = e2.apply(&f[i])?;
        let mut rhs = &f[n] * &f[i];
        if i > 0 {
            rhs.add_scaled(&f[i - 1], &Scalar::int((n + 2 - i) as i64));
        }
        res.push(|| format!("(iii) E^2 f_{i}"), &(&lhs - &rhs));
    }
    for k in 1..=max_k {
        let ek = fr.euler_power(k)?;
        let ekm = fr.euler_power(k - 1)?;
        let dn = ekm.apply(&f[n])?;
        for i in 0..=n {
            let lhs = ek.apply(&f[i])?;
            let mut rhs = &f[i] * &dn;
            if i > 0 {
                rhs = &rhs + &ekm.apply(&f[i - 1])?;
            }
            res.push(|| format!("(iv) E^{k} f_{i}"), &(&lhs - &rhs));
        }
    }
    let table = f_derivative_table(span, max_k);
    for (k, row) in table.iter().enumerate() {
        let ek = fr.euler_power(k)?;
        for (i, v) in row.iter().enumerate() {
            res.push(|| format!("recursion vs derivative E^{k} f_{i}"), &(&ek.apply(&f[i])? - v));
        }
    }
    Ok(res.finish("f-derivatives", "derivatives of the Euler relation coefficients"))
}

/// `Z_k = sum_i (E^k f_i) E^i`, with `E^k f_i` by direct differentiation.
pub fn z_field(fr: &Frobenius, span: &EulerSpan, k: usize) -> Result<VectorField, SpanError> {
    let ek = fr.euler_power(k)?;
    let mut acc: Option<VectorField> = None;
    for (i, fi) in span.f.iter().enumerate() {
        let c = ek.apply(fi)?;
        let term = fr.euler_power(i)?.times(&c);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    Ok(acc.unwrap())
}

/// `Z_k = E^k . Z_0` for `0 <= k <= n`, and `Z_{n+1} = sum_i f_i Z_i`.
pub fn check_z_fields(fr: &Frobenius, span: &EulerSpan) -> Result<CheckReport, SpanError> {
    let n = span.n;
    let z: Vec<VectorField> = (0..=n + 1).map(|k| z_field(fr, span, k)).collect::<Result<_, _>>()?;
    let mut res = Residuals::new();
    for k in 0..=n {
        let other = fr.product(&*fr.euler_power(k)?, &z[0])?;
        let d = z[k].sub(&other);
        for (a, c) in d.components.iter().enumerate() {
            res.push(|| format!("Z_{k} vs E^{k}.Z_0, component {}", a + 1), c);
        }
    }
    let mut rhs = VectorField::zero(fr.table(), fr.rank(), fr.order());
    for (i, fi) in span.f.iter().enumerate() {
        rhs = rhs.add(&z[i].times(fi));
    }
    let d = z[n + 1].sub(&rhs);
    for (a, c) in d.components.iter().enumerate() {
        res.push(|| format!("Z_{} recursion, component {}", n + 1, a + 1), c);
    }
    Ok(res.finish("z-fields", "Z_k = E^k . Z_0 and the Z recursion"))
}

/// `phi_{m+n+1} = sum_k f_k phi_{m+k}` for `m = 0..=max_m`.
pub fn check_philinear(cx: &Genus1Context, span: &EulerSpan, max_m: usize) -> Result<CheckReport, FrobeniusError> {
    let n = span.n;
    let mut res = Residuals::new();
    for m in 0..=max_m {
        let mut r = cx.phi(m + n + 1)?;
        for (k, fk) in span.f.iter().enumerate() {
            r = &r - &(fk * &cx.phi(m + k)?);
        }
        res.push(|| format!("m = {m}"), &r);
    }
    Ok(res.finish("phi-linearity", "phi-linearity along the Euler relation"))
}

/// `Z_k h_2 = 0` for `0 <= k <= n`.
pub fn check_z_kills_h2(cx: &Genus1Context, span: &EulerSpan) -> Result<CheckReport, SpanError> {
    let fr = cx.frobenius();
    let h2 = cx.h(2)?;
    let mut res = Residuals::new();
    for k in 0..=span.n {
        let z = z_field(fr, span, k)?;
        res.push(|| format!("Z_{k} h_2"), &z.apply(&h2)?);
    }
    Ok(res.finish("z-annihilates-h2", "Z_k annihilates h_2"))
}

/// Sylvester matrix of two polynomials given highest coefficient first.
pub fn sylvester(p: &[Series], q: &[Series]) -> Vec<Vec<Series>> {
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    let size = dp + dq;
    let table = p[0].table();
    let order = p.iter().chain(q).map(Series::valid_order).min().unwrap();
    let zero = Series::zero(table, order);
    let mut m = vec![vec![zero; size]; size];
    for r in 0..dq {
        for (j, c) in p.iter().enumerate() {
            m[r][r + j] = c.clone();
        }
    }
    for r in 0..dp {
        for (j, c) in q.iter().enumerate() {
            m[dq + r][r + j] = c.clone();
        }
    }
    m
}

/// `p_t(x) = x^{n+1} - sum f_i x^i`, highest coefficient first.
pub fn relation_polynomial(span: &EulerSpan) -> Vec<Series> {
    let f = &span.f;
    let table = f[0].table();
    let order = f.iter().map(Series::valid_order).min().unwrap();
    let mut p = vec![Series::constant(table, Scalar::one(), order)];
    for fi in f.iter().rev() {
        p.push(-fi);
    }
    p
}

fn derivative_poly(p: &[Series]) -> Vec<Series> {
    let deg = p.len() - 1;
    p[..deg]
        .iter()
        .enumerate()
        .map(|(j, c)| c.scale(&Scalar::int((deg - j) as i64)))
        .collect()
}

/// Resultant of `p` and `p'` for a polynomial of degree at least 1.
pub fn discriminant_resultant(p: &[Series]) -> Result<Series, LinalgError> {
    let dp = derivative_poly(p);
    det(&sylvester(p, &dp))
}

/// The matrix `A` built by its row recursion from `f`.
pub fn matrix_a(span: &EulerSpan) -> Vec<Vec<Series>> {
    let n = span.n;
    let f = &span.f;
    let table = f[0].table();
    let order = f.iter().map(Series::valid_order).min().unwrap();
    let zero = Series::zero(table, order);
    let mut a = vec![vec![zero; n + 1]; n + 1];
    a[n][0] = Series::constant(table, Scalar::int(n as i64 + 1), order);
    for j in 1..=n {
        a[n][j] = f[n - j + 1].scale(&Scalar::int(-((n - j + 1) as i64)));
    }
    for i in 1..=n {
        let below = a[n - i + 1].clone();
        a[n - i][n] = &f[0] * &below[0];
        for j in 0..n {
            a[n - i][j] = &(&f[n - j] * &below[0]) + &below[j + 1];
        }
    }
    a
}

/// Resultant of `p_t` and `p_t'` against `det A`, and `A` against the
/// derivative table `a_ij = E^{n-i} f_{n-j}`.
#[derive(Debug, Clone)]
pub struct ResultantData {
    pub resultant: Series,
    pub det_a: Series,
    pub report: CheckReport,
}

pub fn resultant_data(fr: &Frobenius, span: &EulerSpan) -> Result<ResultantData, SpanError> {
    let n = span.n;
    let p = relation_polynomial(span);
    let resultant = discriminant_resultant(&p)?;
    let a = matrix_a(span);
    let det_a = det(&a)?;
    let mut res = Residuals::new();
    res.push(|| "det A - resultant".into(), &(&det_a - &resultant));
    let table = f_derivative_table(span, n);
    for i in 0..=n {
        for j in 0..=n {
            let direct = fr.euler_power(n - i)?.apply(&span.f[n - j])?;
            res.push(|| format!("a_({i},{j}) vs E^{} f_{}", n - i, n - j), &(&a[i][j] - &direct));
            res.push(|| format!("a_({i},{j}) vs recursion"), &(&a[i][j] - &table[n - i][n - j]));
        }
    }
    Ok(ResultantData {
        resultant,
        det_a,
        report: res.finish("resultant-matrix", "resultant equals det A"),
    })
}

/// Final classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "semisimple-type")]
    SemisimpleType,
    #[serde(rename = "non-degenerate")]
    NonDegenerate,
    #[serde(rename = "degenerate")]
    Degenerate,
    #[serde(rename = "undetermined")]
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::SemisimpleType => "semisimple-type",
            Verdict::NonDegenerate => "non-degenerate",
            Verdict::Degenerate => "degenerate",
            Verdict::Undetermined => "undetermined",
        })
    }
}

/// Classification with the evidence that decided it.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub non_degenerate: Option<bool>,
    pub semisimple: bool,
    pub n: Option<usize>,
    pub witness: String,
    /// Whether `det A` equals the resultant exactly.
    pub det_matches: Option<bool>,
    #[serde(skip)]
    pub resultant: Option<Series>,
}

/// Multiplication-by-`E` characteristic polynomial against `p_t` and the
/// square-freeness test. Returns whether the model is semisimple-type.
pub fn semisimplicity(fr: &Frobenius, span: &EulerSpan, resultant: &Series) -> Result<(bool, CheckReport), SpanError> {
    let mut res = Residuals::new();
    if span.n + 1 < fr.rank() {
        // The span of the E^k is the subalgebra generated by E, whose
        // dimension is the degree of the minimal polynomial of E; a
        // characteristic polynomial of larger degree has a repeated root.
        return Ok((
            false,
            res.finish("characteristic-polynomial", "multiplication by E against p_t")
                .with_note(format!(
                    "Euler span has dimension {} < {}, so quantum multiplication by E has a repeated eigenvalue",
                    span.n + 1,
                    fr.rank()
                )),
        ));
    }
    let l = fr.multiplication_matrix(fr.euler())?;
    let cp = charpoly(&l)?;
    let p = relation_polynomial(span);
    for (j, (a, b)) in cp.iter().zip(&p).enumerate() {
        res.push(|| format!("coefficient of x^{}", cp.len() - 1 - j), &(a - b));
    }
    let report = res.finish("characteristic-polynomial", "multiplication by E against p_t");
    Ok((report.passed() && !resultant.is_zero(), report))
}

/// Coefficients of `E^m` in the basis `E^0..E^n`.
fn power_coefficients(span: &EulerSpan, m_max: usize) -> Vec<Vec<Series>> {
    let n = span.n;
    let f = &span.f;
    let table = f[0].table();
    let order = f.iter().map(Series::valid_order).min().unwrap();
    let unit = |i: usize| -> Vec<Series> {
        (0..=n)
            .map(|j| Series::constant(table, if i == j { Scalar::one() } else { Scalar::zero() }, order))
            .collect()
    };
    let mut out: Vec<Vec<Series>> = (0..=n.min(m_max)).map(unit).collect();
    while out.len() <= m_max {
        let prev = out.last().unwrap();
        let top = prev[n].clone();
        let next: Vec<Series> = (0..=n)
            .map(|i| {
                let t = &top * &f[i];
                if i == 0 {
                    t
                } else {
                    &t + &prev[i - 1]
                }
            })
            .collect();
        out.push(next);
    }
    out
}

/// Classifies the model at its base point. `m_max` defaults to `2n + 2`.
pub fn classify(fr: &Frobenius, m_max: Option<usize>) -> Result<Classification, SpanError> {
    let span = euler_relation(fr, fr.rank())?;
    let n = span.n;
    let rd = resultant_data(fr, &span)?;
    let det_matches = Some(rd.report.passed());
    let (semisimple, _) = semisimplicity(fr, &span, &rd.resultant)?;
    let done = |verdict: Verdict, nd: Option<bool>, witness: String| Classification {
        verdict: if verdict == Verdict::NonDegenerate && semisimple {
            Verdict::SemisimpleType
        } else {
            verdict
        },
        non_degenerate: nd,
        semisimple,
        n: Some(n),
        witness,
        det_matches,
        resultant: Some(rd.resultant.clone()),
    };
    if n + 1 <= 2 {
        return Ok(done(
            Verdict::NonDegenerate,
            Some(true),
            format!("Euler span has dimension {} <= 2", n + 1),
        ));
    }
    if let Some((m, c)) = rd.resultant.lowest_term() {
        return Ok(done(
            Verdict::NonDegenerate,
            Some(true),
            format!(
                "resultant of p_t and p_t' is nonzero, lowest term {} * {}",
                c,
                m.render(rd.resultant.table())
            ),
        ));
    }
    // Rows: E^0 and Z_0..Z_n in the E-basis.
    let table = f_derivative_table(&span, n);
    let order = span.f.iter().map(Series::valid_order).min().unwrap();
    let t = span.f[0].table();
    let mut rows: Vec<Vec<Series>> = vec![(0..=n)
        .map(|j| Series::constant(t, if j == 0 { Scalar::one() } else { Scalar::zero() }, order))
        .collect()];
    rows.extend(table.iter().cloned());
    let base = generic_rank(&rows, RANK_LINES, RANK_SEED);
    if !base.lines_agree {
        return Ok(done(
            Verdict::Undetermined,
            None,
            "sampled lines disagree on the rank of E^0, Z_0..Z_n".into(),
        ));
    }
    let m_max = m_max.unwrap_or(2 * n + 2);
    let powers = power_coefficients(&span, m_max);
    for (m, pw) in powers.iter().enumerate().skip(1) {
        let mut with = rows.clone();
        with.push(pw.clone());
        let info = generic_rank(&with, RANK_LINES, RANK_SEED);
        if !info.lines_agree {
            return Ok(done(
                Verdict::Undetermined,
                None,
                format!("sampled lines disagree on the rank with E^{m} adjoined"),
            ));
        }
        if info.rank == base.rank {
            return Ok(done(
                Verdict::NonDegenerate,
                Some(true),
                format!("E^{m} lies in the span of E^0, Z_0..Z_n"),
            ));
        }
    }
    Ok(done(
        Verdict::Degenerate,
        Some(false),
        format!(
            "span of E^0, Z_0..Z_n has generic rank {} of {}; no E^m with 1 <= m <= {m_max} lies in it",
            base.rank,
            n + 1
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{builtin, BuiltinOptions};
    use crate::series::VariableTable;
    use proptest::prelude::*;

    fn constants(cs: &[i64]) -> Vec<Series> {
        let t = VariableTable::new(vec!["x".into()], vec![1]).unwrap();
        cs.iter().map(|&c| Series::constant(&t, Scalar::int(c), 4)).collect()
    }

    fn frobenius(name: &str) -> Frobenius {
        Frobenius::new(&builtin(name, &BuiltinOptions::default()).unwrap().spec).unwrap()
    }

    #[test]
    fn cubic_resultant_oracle() {
        // x^3 - x has discriminant 4, and Res(p, p') = -disc for degree 3.
        let r = discriminant_resultant(&constants(&[1, 0, -1, 0])).unwrap();
        assert_eq!(r.as_constant(), Some(Scalar::int(-4)));
        // (x - 1)^2 (x + 2) has a double root.
        let r = discriminant_resultant(&constants(&[1, 0, -3, 2])).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn m4_relation_polynomial_is_a_cube() {
        let fr = frobenius("M4");
        let span = euler_relation(&fr, fr.rank()).unwrap();
        let p = relation_polynomial(&span);
        let t0 = fr.coordinate_series(0);
        let want = [
            Series::constant(fr.table(), Scalar::one(), fr.order()),
            t0.scale(&Scalar::int(-3)),
            t0.pow(2).scale(&Scalar::int(3)),
            -&t0.pow(3),
        ];
        for (a, b) in p.iter().zip(&want) {
            assert!((a - b).is_zero(), "{a} vs {b}");
        }
        let rd = resultant_data(&fr, &span).unwrap();
        assert!(rd.resultant.is_zero());
        assert!(rd.report.passed());
    }

    #[test]
    fn cp1_resultant_is_a_nonzero_constant_times_q() {
        let fr = frobenius("cp1");
        let span = euler_relation(&fr, fr.rank()).unwrap();
        let rd = resultant_data(&fr, &span).unwrap();
        // E^2 = 4q + ... at the origin, so p_t = x^2 - 4q - ... and the
        // resultant starts at -16q.
        let (m, c) = rd.resultant.lowest_term().unwrap();
        assert_eq!(m.render(fr.table()), "q");
        assert_eq!(c, Scalar::int(-16));
    }

    #[test]
    fn k3_full_classification_is_frozen() {
        let fr = frobenius("k3-full");
        let c = classify(&fr, None).unwrap();
        assert_eq!(c.verdict, Verdict::NonDegenerate);
        assert_eq!(c.n, Some(2));
        assert!(!c.semisimple);
        assert!(c.witness.contains("E^5"), "{}", c.witness);
    }

    #[test]
    fn span_checks_pass_on_degenerate_models() {
        for name in ["M4", "M5", "M6"] {
            let fr = frobenius(name);
            let span = euler_relation(&fr, fr.rank()).unwrap();
            assert!(span.relation.passed(), "{name}");
            assert!(check_f_derivatives(&fr, &span, 3).unwrap().passed(), "{name}");
            assert!(check_z_fields(&fr, &span).unwrap().passed(), "{name}");
        }
    }

    #[test]
    fn small_search_limit_still_reports_degenerate() {
        let fr = frobenius("M6");
        let c = classify(&fr, Some(1)).unwrap();
        assert_eq!(c.verdict, Verdict::Degenerate);
        assert!(c.witness.contains("1 <= m <= 1"), "{}", c.witness);
    }

    proptest! {
        #[test]
        fn quadratic_resultant_is_minus_discriminant(b in -50i64..50, c in -50i64..50) {
            let r = discriminant_resultant(&constants(&[1, b, c])).unwrap();
            prop_assert_eq!(r.as_constant(), Some(Scalar::int(4 * c - b * b)));
        }

        #[test]
        fn sylvester_of_shared_root_is_singular(r in -9i64..9, s in -9i64..9, u in -9i64..9) {
            // (x - r)(x - s) and (x - r)(x - u) share the root r.
            let p = constants(&[1, -(r + s), r * s]);
            let q = constants(&[1, -(r + u), r * u]);
            let d = det(&sylvester(&p, &q)).unwrap();
            prop_assert!(d.is_zero());
        }
    }
}
