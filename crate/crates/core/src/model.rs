//! Frobenius model descriptions and their validation.
//!
//! A [`ModelSpec`] holds the raw data of a model: the cohomology basis with
//! Hodge bidegrees, the intersection form, the matrix of cup product with the
//! first Chern class, two Chern numbers, the Novikov variables, and the
//! genus-0 (and optionally genus-1) small-phase-space potentials.
//!
//! Potentials are stored as written, in the original coordinates. The
//! working copies used by every computation are re-expanded about
//! `base_point`: variable `t^a` then stands for `t^a - base_point[a]`.

use std::sync::Arc;

use crate::scalar::Scalar;
use crate::series::{Series, SeriesError, VariableTable};

/// Largest truncation order accepted; exponents are stored in a byte.
pub const MAX_ORDER: u32 = 200;

/// Errors raised while reading or validating a model.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid model: {0}")]
    Validation(String),
    #[error("cannot read model file: {0}")]
    Io(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn invalid(msg: impl Into<String>) -> ModelError {
    ModelError::Validation(msg.into())
}

/// One basis class with its Hodge bidegree `(p, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisClass {
    pub label: String,
    pub p: u32,
    pub q: u32,
}

impl BasisClass {
    pub fn new(label: impl Into<String>, p: u32, q: u32) -> Self {
        BasisClass {
            label: label.into(),
            p,
            q,
        }
    }
}

/// The inputs of [`ModelSpec::new`]. `f0` and `f1` must be built over the
/// table returned by [`ModelSpec::make_table`] for the same basis and
/// Novikov variables.
#[derive(Debug, Clone)]
pub struct ModelParts {
    pub name: String,
    pub dim: u32,
    pub basis: Vec<BasisClass>,
    pub eta: Vec<Vec<Scalar>>,
    pub chern: Vec<Vec<Scalar>>,
    pub euler_char: Scalar,
    pub c1_cd1: Scalar,
    pub novikov: Vec<(String, u32)>,
    pub base_point: Vec<Scalar>,
    pub order: u32,
    pub f0: Series,
    pub f1: Option<Series>,
}

/// A validated Frobenius model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub dim: u32,
    pub basis: Vec<BasisClass>,
    pub eta: Vec<Vec<Scalar>>,
    pub chern: Vec<Vec<Scalar>>,
    pub euler_char: Scalar,
    pub c1_cd1: Scalar,
    pub novikov: Vec<(String, u32)>,
    pub base_point: Vec<Scalar>,
    pub order: u32,
    /// Genus-0 potential in the original coordinates.
    pub f0: Series,
    /// Genus-1 potential in the original coordinates, if known.
    pub f1: Option<Series>,
    centered_f0: Series,
    centered_f1: Option<Series>,
}

impl ModelSpec {
    /// The variable table for a basis and Novikov list: one weight-1
    /// variable per basis class (named by its label), then the Novikov
    /// variables with their declared weights.
    pub fn make_table(
        basis: &[BasisClass],
        novikov: &[(String, u32)],
    ) -> Result<Arc<VariableTable>, ModelError> {
        let mut names: Vec<String> = basis.iter().map(|b| b.label.clone()).collect();
        let mut weights = vec![1; basis.len()];
        for (n, w) in novikov {
            names.push(n.clone());
            weights.push(*w);
        }
        Ok(VariableTable::new(names, weights)?)
    }

    pub fn new(parts: ModelParts) -> Result<ModelSpec, ModelError> {
        let ModelParts {
            name,
            dim,
            basis,
            eta,
            chern,
            euler_char,
            c1_cd1,
            novikov,
            base_point,
            order,
            f0,
            f1,
        } = parts;
        let n = basis.len();
        if name.trim().is_empty() {
            return Err(invalid("model name is empty"));
        }
        if n == 0 {
            return Err(invalid("basis is empty"));
        }
        if basis[0].p != 0 || basis[0].q != 0 {
            return Err(invalid("the first basis class must be the identity, with p = q = 0"));
        }
        for b in &basis {
            if b.p > dim || b.q > dim {
                return Err(invalid(format!(
                    "class '{}' has bidegree ({},{}) outside the range 0..={}",
                    b.label, b.p, b.q, dim
                )));
            }
        }
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(invalid(format!("order must lie in 1..={MAX_ORDER}")));
        }
        let table = ModelSpec::make_table(&basis, &novikov)?;
        for (label, s) in [("f0", Some(&f0)), ("f1", f1.as_ref())] {
            if let Some(s) = s {
                if **s.table() != *table {
                    return Err(invalid(format!("{label} is not built over the model's variables")));
                }
            }
        }
        check_square(&eta, n, "eta")?;
        check_square(&chern, n, "chern")?;
        if base_point.len() != n {
            return Err(invalid(format!(
                "base_point has {} coordinates, expected {}",
                base_point.len(),
                n
            )));
        }

        let b = b_weights_of(&basis, dim);
        for i in 0..n {
            for j in 0..n {
                if eta[i][j] != eta[j][i] {
                    return Err(invalid(format!("eta not symmetric at ({},{})", i + 1, j + 1)));
                }
                if !eta[i][j].is_zero() {
                    if &b[i] + &b[j] != Scalar::one() {
                        return Err(invalid(format!(
                            "eta entry ({},{}) is nonzero but b_{} + b_{} != 1",
                            i + 1,
                            j + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                    if basis[i].q + basis[j].q != dim {
                        return Err(invalid(format!(
                            "eta entry ({},{}) pairs classes whose q-degrees do not sum to {}",
                            i + 1,
                            j + 1,
                            dim
                        )));
                    }
                }
                if !chern[i][j].is_zero() {
                    if b[j] != &b[i] + &Scalar::one() {
                        return Err(invalid(format!(
                            "chern entry ({},{}) is nonzero but b_{} != 1 + b_{}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                    if basis[j].q != basis[i].q + 1 {
                        return Err(invalid(format!(
                            "chern entry ({},{}) is nonzero but q_{} != 1 + q_{}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }
        if invert_matrix(&eta).is_none() {
            return Err(invalid("eta is not invertible"));
        }
        let ce = mat_mul(&chern, &eta);
        for i in 0..n {
            for j in 0..i {
                if ce[i][j] != ce[j][i] {
                    return Err(invalid(format!(
                        "chern * eta not symmetric at ({},{})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }

        if f0.valid_order() != order {
            return Err(invalid(format!(
                "f0 valid order {} differs from model order {}",
                f0.valid_order(),
                order
            )));
        }
        for (m, _) in f0.terms() {
            let pure = (n..table.len()).all(|i| m.exponent(i) == 0);
            let deg: u32 = (0..n).map(|i| m.exponent(i)).sum();
            if pure && deg < 3 {
                return Err(invalid(format!(
                    "f0 has a term {} of degree {} < 3 in the phase-space variables",
                    m.render(&table),
                    deg
                )));
            }
        }
        let f1 = f1.map(|s| s.truncate(order));

        let centered_f0 = recenter(&f0, &base_point);
        let centered_f1 = f1.as_ref().map(|s| recenter(s, &base_point));
        Ok(ModelSpec {
            name,
            dim,
            basis,
            eta,
            chern,
            euler_char,
            c1_cd1,
            novikov,
            base_point,
            order,
            f0,
            f1,
            centered_f0,
            centered_f1,
        })
    }

    /// Number of basis classes `N`.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        self.f0.table()
    }

    /// Genus-0 potential expanded about the base point.
    pub fn working_f0(&self) -> &Series {
        &self.centered_f0
    }

    /// Genus-1 potential expanded about the base point.
    pub fn working_f1(&self) -> Option<&Series> {
        self.centered_f1.as_ref()
    }

    /// Rewrites a series in centered coordinates back in the model's own
    /// coordinates.
    pub fn uncentered(&self, s: &Series) -> Series {
        let back: Vec<Scalar> = self.base_point.iter().map(|c| -c.clone()).collect();
        recenter(s, &back)
    }

    /// `b_a = p_a - (d - 1)/2` for every basis class.
    pub fn b_weights(&self) -> Vec<Scalar> {
        b_weights_of(&self.basis, self.dim)
    }

    /// A copy with a different (or no) genus-1 potential.
    pub fn with_f1(&self, f1: Option<Series>) -> Result<ModelSpec, ModelError> {
        let mut parts = self.to_parts();
        parts.f1 = f1;
        ModelSpec::new(parts)
    }

    /// A copy truncated to a lower order.
    pub fn truncated(&self, order: u32) -> Result<ModelSpec, ModelError> {
        if order > self.order {
            return Err(invalid(format!(
                "cannot raise the order of model '{}' from {} to {}",
                self.name, self.order, order
            )));
        }
        let mut parts = self.to_parts();
        parts.order = order;
        parts.f0 = parts.f0.truncate(order);
        parts.f1 = parts.f1.map(|s| s.truncate(order));
        ModelSpec::new(parts)
    }

    pub fn to_parts(&self) -> ModelParts {
        ModelParts {
            name: self.name.clone(),
            dim: self.dim,
            basis: self.basis.clone(),
            eta: self.eta.clone(),
            chern: self.chern.clone(),
            euler_char: self.euler_char.clone(),
            c1_cd1: self.c1_cd1.clone(),
            novikov: self.novikov.clone(),
            base_point: self.base_point.clone(),
            order: self.order,
            f0: self.f0.clone(),
            f1: self.f1.clone(),
        }
    }
}

fn b_weights_of(basis: &[BasisClass], dim: u32) -> Vec<Scalar> {
    let shift = Scalar::new(dim as i64 - 1, 2);
    basis.iter().map(|b| Scalar::int(b.p as i64) - &shift).collect()
}

fn check_square(m: &[Vec<Scalar>], n: usize, label: &str) -> Result<(), ModelError> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(invalid(format!("{label} must be a {n}x{n} matrix")));
    }
    Ok(())
}

/// Re-expands a potential about `base` (phase-space coordinates only).
fn recenter(s: &Series, base: &[Scalar]) -> Series {
    let mut out = s.clone();
    for (i, c) in base.iter().enumerate() {
        out = out.shifted(i, c);
    }
    out
}

/// Product of two rational matrices.
pub fn mat_mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = Scalar::zero();
                    for l in 0..k {
                        if !a[i][l].is_zero() && !b[l][j].is_zero() {
                            acc += &(&a[i][l] * &b[l][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Exact inverse by Gauss-Jordan elimination, or `None` if singular.
pub fn invert_matrix(a: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = a.len();
    let mut m: Vec<Vec<Scalar>> = a.to_vec();
    let mut inv: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Scalar::one() } else { Scalar::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        inv.swap(col, p);
        let f = m[col][col].recip();
        for k in 0..n {
            m[col][k] = &m[col][k] * &f;
            inv[col][k] = &inv[col][k] * &f;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let g = m[r][col].clone();
                for k in 0..n {
                    let d1 = &g * &m[col][k];
                    m[r][k] -= &d1;
                    let d2 = &g * &inv[col][k];
                    inv[r][k] -= &d2;
                }
            }
        }
    }
    Some(inv)
}
