//! Truncated multivariate power series over the rationals.
//!
//! A [`Series`] lives over a shared [`VariableTable`] that fixes the variable
//! names and their grading weights. Terms are kept only up to the series'
//! *valid order*: the largest weighted total degree at which every
//! coefficient is known exactly. Binary operations take the minimum of the
//! operands' valid orders, and differentiation in a variable lowers the valid
//! order by that variable's weight, so a residual that comes out zero is zero
//! through exactly the order it reports and no further.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use smallvec::SmallVec;

use crate::scalar::{binomial, Scalar};

/// Errors raised by series construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("series are defined over different variable tables")]
    TableMismatch,
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("variable table: {0}")]
    BadTable(String),
    #[error("truncation: needs valid order {needed}, only {available} available")]
    Truncation { needed: u32, available: u32 },
    #[error("no value assigned to variable '{0}'")]
    MissingAssignment(String),
    #[error("exponent exceeds the supported maximum of 255")]
    ExponentOverflow,
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
}

/// Ordered variable names with their positive grading weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableTable {
    names: Vec<String>,
    weights: Vec<u32>,
}

impl VariableTable {
    pub fn new(names: Vec<String>, weights: Vec<u32>) -> Result<Arc<Self>, SeriesError> {
        if names.len() != weights.len() {
            return Err(SeriesError::BadTable("names and weights differ in length".into()));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(SeriesError::BadTable("empty variable name".into()));
            }
            if names[..i].contains(n) {
                return Err(SeriesError::BadTable(format!("duplicate variable '{n}'")));
            }
        }
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            return Err(SeriesError::BadTable(format!(
                "variable '{}' has weight 0",
                names[i]
            )));
        }
        Ok(Arc::new(VariableTable { names, weights }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn same_table(a: &Arc<VariableTable>, b: &Arc<VariableTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// An exponent vector, one entry per table variable.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial(SmallVec<[u8; 24]>);

impl Monomial {
    /// The monomial `1` over `n` variables.
    pub fn one(n: usize) -> Self {
        Monomial(SmallVec::from_elem(0, n))
    }

    pub fn from_exponents(exps: &[u32]) -> Result<Self, SeriesError> {
        let mut v = SmallVec::with_capacity(exps.len());
        for &e in exps {
            v.push(u8::try_from(e).map_err(|_| SeriesError::ExponentOverflow)?);
        }
        Ok(Monomial(v))
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i] as u32
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().map(|&e| e as u32)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self, table: &VariableTable) -> u32 {
        self.0
            .iter()
            .zip(table.weights())
            .map(|(&e, &w)| e as u32 * w)
            .sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        )
    }

    fn with_exponent(&self, i: usize, e: u32) -> Monomial {
        let mut m = self.clone();
        m.0[i] = u8::try_from(e).expect("exponent overflow");
        m
    }

    /// Human-readable form such as `t1^2*s`; the unit monomial prints as `1`.
    pub fn render(&self, table: &VariableTable) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    table.name(i).to_string()
                } else {
                    format!("{}^{}", table.name(i), e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

/// Display order: weighted degree ascending, then exponent vectors descending
/// lexicographically so that earlier variables lead.
pub fn display_cmp(table: &VariableTable, a: &Monomial, b: &Monomial) -> Ordering {
    a.degree(table)
        .cmp(&b.degree(table))
        .then_with(|| b.0.cmp(&a.0))
}

/// A multivariate power series truncated at a weighted total order.
#[derive(Clone, Debug)]
pub struct Series {
    table: Arc<VariableTable>,
    order: u32,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        same_table(&self.table, &other.table)
            && self.order == other.order
            && self.terms == other.terms
    }
}

impl Eq for Series {}

impl Series {
    pub fn zero(table: &Arc<VariableTable>, order: u32) -> Self {
        Series {
            table: Arc::clone(table),
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(table: &Arc<VariableTable>, c: Scalar, order: u32) -> Self {
        let mut s = Series::zero(table, order);
        if !c.is_zero() {
            s.terms.insert(Monomial::one(table.len()), c);
        }
        s
    }

    /// The coordinate function of variable `i` (zero if its weight exceeds the order).
    pub fn variable(table: &Arc<VariableTable>, i: usize, order: u32) -> Self {
        let mut s = Series::zero(table, order);
        if table.weight(i) <= order {
            s.terms
                .insert(Monomial::one(table.len()).with_exponent(i, 1), Scalar::one());
        }
        s
    }

    /// Builds a series from terms, merging duplicates and dropping terms
    /// whose weighted degree exceeds `order`.
    pub fn from_terms<I>(table: &Arc<VariableTable>, order: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Scalar)>,
    {
        let mut s = Series::zero(table, order);
        for (m, c) in terms {
            assert_eq!(m.0.len(), table.len(), "monomial arity mismatch");
            if m.degree(table) > order {
                continue;
            }
            s.add_term(m, &c);
        }
        s
    }

    fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        &self.table
    }

    pub fn valid_order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no term survives up to the valid order.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Coefficient of the monomial given by an exponent list.
    pub fn coeff_of(&self, exps: &[u32]) -> Scalar {
        match Monomial::from_exponents(exps) {
            Ok(m) => self.coeff(&m),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Monomial::one(self.table.len()))
    }

    /// The scalar value if the series has no non-constant terms.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Lowest term in display order: the natural residual witness.
    pub fn lowest_term(&self) -> Option<(Monomial, Scalar)> {
        self.terms
            .iter()
            .min_by(|a, b| display_cmp(&self.table, a.0, b.0))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    /// Terms sorted by weighted degree, then lexicographically.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| display_cmp(&self.table, a.0, b.0));
        v
    }

    /// Lowers the valid order to `order` (no effect if already lower).
    pub fn truncate(&self, order: u32) -> Series {
        if order >= self.order {
            return self.clone();
        }
        let table = &self.table;
        Series {
            table: Arc::clone(table),
            order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree(table) <= order)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Series {
        if c.is_zero() {
            return Series::zero(&self.table, self.order);
        }
        Series {
            table: Arc::clone(&self.table),
            order: self.order,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn try_add(&self, other: &Series) -> Result<Series, SeriesError> {
        self.combine(other, false)
    }

    pub fn try_sub(&self, other: &Series) -> Result<Series, SeriesError> {
        self.combine(other, true)
    }

    fn combine(&self, other: &Series, subtract: bool) -> Result<Series, SeriesError> {
        if !same_table(&self.table, &other.table) {
            return Err(SeriesError::TableMismatch);
        }
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        let table = Arc::clone(&self.table);
        for (m, c) in &other.terms {
            if m.degree(&table) > order {
                continue;
            }
            if subtract {
                out.add_term(m.clone(), &-c);
            } else {
                out.add_term(m.clone(), c);
            }
        }
        Ok(out)
    }

    /// In-place `self += c * other`, with the usual valid-order rule.
    pub fn add_scaled(&mut self, other: &Series, c: &Scalar) {
        assert!(same_table(&self.table, &other.table), "table mismatch");
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        if c.is_zero() {
            return;
        }
        let order = self.order;
        for (m, x) in &other.terms {
            if m.degree(&other.table) <= order {
                self.add_term(m.clone(), &(x * c));
            }
        }
    }

    pub fn try_mul(&self, other: &Series) -> Result<Series, SeriesError> {
        if !same_table(&self.table, &other.table) {
            return Err(SeriesError::TableMismatch);
        }
        let order = self.order.min(other.order);
        if self.terms.is_empty() || other.terms.is_empty() {
            return Ok(Series::zero(&self.table, order));
        }
        if let Some(c) = self.as_constant() {
            return Ok(other.truncate(order).scale(&c));
        }
        if let Some(c) = other.as_constant() {
            return Ok(self.truncate(order).scale(&c));
        }
        let table = &self.table;
        let a: Vec<(&Monomial, &Scalar, u32)> = self
            .terms
            .iter()
            .map(|(m, c)| (m, c, m.degree(table)))
            .filter(|x| x.2 <= order)
            .collect();
        let mut b: Vec<(&Monomial, &Scalar, u32)> = other
            .terms
            .iter()
            .map(|(m, c)| (m, c, m.degree(table)))
            .filter(|x| x.2 <= order)
            .collect();
        b.sort_by_key(|x| x.2);
        let mut acc: HashMap<Monomial, Scalar> = HashMap::new();
        for (ma, ca, da) in &a {
            for (mb, cb, db) in &b {
                if da + db > order {
                    break;
                }
                let p = *ca * *cb;
                match acc.entry(ma.times(mb)) {
                    Entry::Occupied(mut e) => *e.get_mut() += &p,
                    Entry::Vacant(e) => {
                        e.insert(p);
                    }
                }
            }
        }
        Ok(Series {
            table: Arc::clone(table),
            order,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, e: u32) -> Series {
        let mut acc = Series::constant(&self.table, Scalar::one(), self.order);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative in variable `var`; the valid order drops by its weight.
    pub fn derivative(&self, var: usize) -> Result<Series, SeriesError> {
        if var >= self.table.len() {
            return Err(SeriesError::UnknownVariable(format!("#{var}")));
        }
        let w = self.table.weight(var);
        if w > self.order {
            return Err(SeriesError::Truncation {
                needed: w,
                available: self.order,
            });
        }
        let mut out = Series::zero(&self.table, self.order - w);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let nm = m.with_exponent(var, e - 1);
            if nm.degree(&self.table) <= out.order {
                out.terms.insert(nm, c * &Scalar::int(e as i64));
            }
        }
        Ok(out)
    }

    pub fn derivative_by_name(&self, name: &str) -> Result<Series, SeriesError> {
        let i = self
            .table
            .index_of(name)
            .ok_or_else(|| SeriesError::UnknownVariable(name.to_string()))?;
        self.derivative(i)
    }

    /// Antiderivative in `var` with zero integration constant; the valid
    /// order rises by the variable's weight.
    pub fn antiderivative(&self, var: usize) -> Series {
        let mut out = Series::zero(&self.table, self.order + self.table.weight(var));
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            let nm = m.with_exponent(var, e + 1);
            out.terms.insert(nm, c / &Scalar::int(e as i64 + 1));
        }
        out
    }

    /// The terms not involving `var` (restriction to `var = 0`).
    pub fn at_zero(&self, var: usize) -> Series {
        Series {
            table: Arc::clone(&self.table),
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exponent(var) == 0)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The terms whose exponent in `var` is exactly `e`.
    pub fn exponent_part(&self, var: usize, e: u32) -> Series {
        Series {
            table: Arc::clone(&self.table),
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.exponent(var) == e)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Evaluates the stored terms at a point (one value per table variable).
    /// Terms beyond the valid order are unknown, so for a genuinely
    /// truncated series the result is only an approximation.
    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar, SeriesError> {
        if point.len() < self.table.len() {
            return Err(SeriesError::MissingAssignment(
                self.table.name(point.len()).to_string(),
            ));
        }
        let mut total = Scalar::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, e) in m.exponents().enumerate() {
                if e > 0 {
                    v = v * point[i].pow(e);
                }
            }
            total += &v;
        }
        Ok(total)
    }

    /// Evaluates with a name-keyed assignment.
    pub fn eval_named(&self, point: &BTreeMap<String, Scalar>) -> Result<Scalar, SeriesError> {
        let mut values = Vec::with_capacity(self.table.len());
        for name in self.table.names() {
            values.push(
                point
                    .get(name)
                    .cloned()
                    .ok_or_else(|| SeriesError::MissingAssignment(name.clone()))?,
            );
        }
        self.eval(&values)
    }

    /// Substitutes `x_var -> x_var + shift` exactly by binomial expansion.
    /// The input is read as an exact polynomial; terms pushed above the
    /// valid order are dropped.
    pub fn shifted(&self, var: usize, shift: &Scalar) -> Series {
        if shift.is_zero() {
            return self.clone();
        }
        let mut out = Series::zero(&self.table, self.order);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            for j in 0..=e {
                let coeff = c * &binomial(e, j) * shift.pow(e - j);
                let nm = m.with_exponent(var, j);
                if nm.degree(&self.table) <= self.order {
                    out.add_term(nm, &coeff);
                }
            }
        }
        out
    }

    /// Restricts to the line `x_i = dir_i * lambda^{w_i}`, giving univariate
    /// coefficients in `lambda` indexed by weighted degree, known exactly
    /// through index `valid_order`.
    pub fn on_line(&self, dir: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); self.order as usize + 1];
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, e) in m.exponents().enumerate() {
                if e > 0 {
                    v = v * dir[i].pow(e);
                }
            }
            out[m.degree(&self.table) as usize] += &v;
        }
        out
    }

    /// Renders the series as a sum of terms in display order.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&m.render(&self.table));
            } else {
                out.push_str(&format!("{}*{}", mag, m.render(&self.table)));
            }
        }
        out
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({})", self.render(), self.order + 1)
    }
}

impl Add<&Series> for &Series {
    type Output = Series;
    /// Panics on mismatched tables; use [`Series::try_add`] to handle that.
    fn add(self, rhs: &Series) -> Series {
        self.try_add(rhs).expect("series table mismatch")
    }
}

impl Sub<&Series> for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.try_sub(rhs).expect("series table mismatch")
    }
}

impl Mul<&Series> for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.try_mul(rhs).expect("series table mismatch")
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(&Scalar::int(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Arc<VariableTable> {
        VariableTable::new(vec!["t".into(), "s".into(), "q".into()], vec![1, 1, 3]).unwrap()
    }

    fn mono(e: &[u32]) -> Monomial {
        Monomial::from_exponents(e).unwrap()
    }

    #[test]
    fn add_respects_min_order() {
        let tb = table();
        let a = Series::from_terms(&tb, 4, [(mono(&[2, 0, 0]), Scalar::new(1, 2))]);
        let b = Series::from_terms(&tb, 2, [(mono(&[3, 0, 0]), Scalar::new(1, 3))]);
        let c = &a + &b;
        assert_eq!(c.valid_order(), 2);
        assert_eq!(c.len(), 1);
        assert_eq!(c.coeff(&mono(&[2, 0, 0])), Scalar::new(1, 2));
    }

    #[test]
    fn additive_inverse_keeps_order() {
        let tb = table();
        let t = Series::variable(&tb, 0, 5);
        let one = Series::constant(&tb, Scalar::one(), 5);
        let r = &(&t + &one) + &(-&t);
        assert_eq!(r, one);
    }

    #[test]
    fn difference_of_squares() {
        let tb = table();
        let t = Series::variable(&tb, 0, 3);
        let one = Series::constant(&tb, Scalar::one(), 3);
        let p = &(&one + &t) * &(&one - &t);
        assert_eq!(p, &one - &(&t * &t));
    }

    #[test]
    fn weighted_truncation_drops_heavy_terms() {
        let tb = table();
        let q = Series::variable(&tb, 2, 3);
        let q3 = Series::from_terms(&tb, 3, [(mono(&[0, 0, 3]), Scalar::one())]);
        assert!(q3.is_zero());
        assert!((&q * &q).is_zero());
    }

    #[test]
    fn derivative_lowers_order_and_differentiates() {
        let tb = table();
        let f = Series::from_terms(&tb, 6, [(mono(&[2, 1, 0]), Scalar::new(1, 2))]);
        let d = f.derivative(0).unwrap();
        assert_eq!(d.valid_order(), 5);
        assert_eq!(d.coeff(&mono(&[1, 1, 0])), Scalar::one());
        let dq = f.derivative(2).unwrap();
        assert_eq!(dq.valid_order(), 3);
        assert!(dq.is_zero());
        let c = Series::constant(&tb, Scalar::int(7), 0);
        assert!(matches!(c.derivative(0), Err(SeriesError::Truncation { .. })));
        assert!(f.derivative_by_name("x").is_err());
    }

    #[test]
    fn shift_is_exact_binomial() {
        let tb = table();
        let f = Series::from_terms(&tb, 6, [(mono(&[3, 0, 0]), Scalar::one())]);
        let g = f.shifted(0, &Scalar::int(2));
        assert_eq!(g.coeff(&mono(&[0, 0, 0])), Scalar::int(8));
        assert_eq!(g.coeff(&mono(&[1, 0, 0])), Scalar::int(12));
        assert_eq!(g.coeff(&mono(&[2, 0, 0])), Scalar::int(6));
        assert_eq!(g.coeff(&mono(&[3, 0, 0])), Scalar::int(1));
    }

    #[test]
    fn eval_examples() {
        let tb = table();
        let f = Series::from_terms(&tb, 6, [(mono(&[2, 1, 0]), Scalar::new(1, 2))]);
        let v = f
            .eval(&[Scalar::int(2), Scalar::int(3), Scalar::zero()])
            .unwrap();
        assert_eq!(v, Scalar::int(6));
        assert!(f.eval(&[Scalar::int(2)]).is_err());
    }

    #[test]
    fn render_is_sorted() {
        let tb = table();
        let f = Series::from_terms(
            &tb,
            6,
            [
                (mono(&[0, 2, 0]), Scalar::int(1)),
                (mono(&[1, 0, 0]), Scalar::new(-1, 6)),
                (mono(&[2, 0, 0]), Scalar::int(3)),
            ],
        );
        assert_eq!(f.render(), "-1/6*t + 3*t^2 + s^2");
    }
}
