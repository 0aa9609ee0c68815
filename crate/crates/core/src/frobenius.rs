//! Correlators, the quantum product and the Euler field of a model, plus the
//! genus-0 identity checks built on them.
//!
//! A [`Frobenius`] wraps a validated [`ModelSpec`] and memoizes derivatives
//! of the potentials (keyed by the sorted multiset of differentiation
//! indices) and the quantum powers of the Euler field. Both caches only ever
//! store values that recomputation would reproduce exactly.
//!
//! Coordinates: every series here is written in the shifted variables
//! `u^a = t^a - base_point[a]`. Wherever an identity involves the original
//! coordinate `t^a` itself, [`Frobenius::coordinate_series`] supplies
//! `base_point[a] + u^a`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::linalg::LinalgError;
use crate::model::{invert_matrix, mat_mul, ModelSpec};
use crate::report::{CheckReport, Residuals};
use crate::scalar::Scalar;
use crate::series::{Series, SeriesError, VariableTable};

/// Errors from correlator and vector-field computations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrobeniusError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("model '{0}' has no genus-1 potential")]
    NoGenusOne(String),
    #[error("the intersection form of model '{0}' is not invertible")]
    SingularEta(String),
    #[error("{0}")]
    Invalid(String),
}

/// Which potential a correlator differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Genus {
    Zero,
    One,
}

/// A vector field on the small phase space: one series per basis class,
/// the coefficient of `gamma_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    pub components: Vec<Series>,
}

impl VectorField {
    pub fn new(components: Vec<Series>) -> Self {
        VectorField { components }
    }

    pub fn zero(table: &Arc<VariableTable>, n: usize, order: u32) -> Self {
        VectorField {
            components: vec![Series::zero(table, order); n],
        }
    }

    /// The coordinate field `gamma_a`.
    pub fn coordinate(table: &Arc<VariableTable>, n: usize, a: usize, order: u32) -> Self {
        let mut v = Self::zero(table, n, order);
        v.components[a] = Series::constant(table, Scalar::one(), order);
        v
    }

    /// A field with constant components.
    pub fn constant(table: &Arc<VariableTable>, values: &[Scalar], order: u32) -> Self {
        VectorField {
            components: values
                .iter()
                .map(|c| Series::constant(table, c.clone(), order))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        self.components[0].table()
    }

    /// Smallest valid order among the components.
    pub fn valid_order(&self) -> u32 {
        self.components
            .iter()
            .map(Series::valid_order)
            .min()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Series::is_zero)
    }

    fn nonzero_count(&self) -> usize {
        self.components.iter().filter(|c| !c.is_zero()).count()
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> VectorField {
        VectorField {
            components: self.components.iter().map(|a| a.scale(c)).collect(),
        }
    }

    /// Multiplication by a function.
    pub fn times(&self, f: &Series) -> VectorField {
        VectorField {
            components: self.components.iter().map(|a| a * f).collect(),
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, other: &VectorField, c: &Scalar) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_scaled(b, c);
        }
    }

    /// Directional derivative `v(f) = sum_a v^a d_a f`.
    pub fn apply(&self, f: &Series) -> Result<Series, SeriesError> {
        let order = f.valid_order().saturating_sub(1).min(self.valid_order());
        let mut acc = Series::zero(f.table(), order);
        if f.valid_order() == 0 {
            return if f.terms().all(|(m, _)| m.is_one()) {
                Ok(acc)
            } else {
                Err(SeriesError::Truncation {
                    needed: 1,
                    available: 0,
                })
            };
        }
        for (a, va) in self.components.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            let d = f.derivative(a)?;
            if d.is_zero() {
                continue;
            }
            acc.add_scaled(&(va * &d), &Scalar::one());
        }
        Ok(acc)
    }

    /// Flat covariant derivative `nabla_self w`, componentwise.
    pub fn nabla(&self, w: &VectorField) -> Result<VectorField, SeriesError> {
        Ok(VectorField {
            components: w
                .components
                .iter()
                .map(|c| self.apply(c))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Lie bracket `[self, w]`.
    pub fn bracket(&self, w: &VectorField) -> Result<VectorField, SeriesError> {
        Ok(self.nabla(w)?.sub(&w.nabla(self)?))
    }

    pub fn truncate(&self, order: u32) -> VectorField {
        VectorField {
            components: self.components.iter().map(|c| c.truncate(order)).collect(),
        }
    }
}

type DerivativeCache = Mutex<HashMap<Vec<u8>, Arc<Series>>>;

/// A model together with its derived tensors and caches.
#[derive(Debug)]
pub struct Frobenius {
    model: ModelSpec,
    n: usize,
    eta_inv: Vec<Vec<Scalar>>,
    b: Vec<Scalar>,
    c_lower: Vec<Vec<Scalar>>,
    euler: VectorField,
    cache0: DerivativeCache,
    cache1: DerivativeCache,
    powers: Mutex<Vec<Arc<VectorField>>>,
}

impl Frobenius {
    pub fn new(model: &ModelSpec) -> Result<Self, FrobeniusError> {
        let n = model.rank();
        let eta_inv =
            invert_matrix(&model.eta).ok_or_else(|| FrobeniusError::SingularEta(model.name.clone()))?;
        let b = model.b_weights();
        let c_lower = mat_mul(&model.chern, &model.eta);
        let table = model.table().clone();
        let order = model.order;
        let shift = &b[0] + &Scalar::one();
        let components = (0..n)
            .map(|a| {
                let coeff = &shift - &b[a];
                let mut s = Series::constant(&table, model.chern[0][a].clone(), order);
                let t = &Series::variable(&table, a, order)
                    + &Series::constant(&table, model.base_point[a].clone(), order);
                s.add_scaled(&t, &coeff);
                s
            })
            .collect();
        Ok(Frobenius {
            model: model.clone(),
            n,
            eta_inv,
            b,
            c_lower,
            euler: VectorField::new(components),
            cache0: Mutex::new(HashMap::new()),
            cache1: Mutex::new(HashMap::new()),
            powers: Mutex::new(Vec::new()),
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    /// Number of basis classes.
    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &Arc<VariableTable> {
        self.model.table()
    }

    pub fn order(&self) -> u32 {
        self.model.order
    }

    pub fn b(&self) -> &[Scalar] {
        &self.b
    }

    pub fn eta_inv(&self) -> &[Vec<Scalar>] {
        &self.eta_inv
    }

    /// `C_{ab} = int c_1 gamma_a gamma_b`.
    pub fn c_lower(&self) -> &[Vec<Scalar>] {
        &self.c_lower
    }

    pub fn has_genus_one(&self) -> bool {
        self.model.working_f1().is_some()
    }

    fn potential(&self, g: Genus) -> Result<&Series, FrobeniusError> {
        match g {
            Genus::Zero => Ok(self.model.working_f0()),
            Genus::One => self
                .model
                .working_f1()
                .ok_or_else(|| FrobeniusError::NoGenusOne(self.model.name.clone())),
        }
    }

    /// A partial derivative of a potential, indices in any order.
    pub fn derivative(&self, g: Genus, indices: &[usize]) -> Result<Arc<Series>, FrobeniusError> {
        let mut key: Vec<u8> = indices.iter().map(|&i| i as u8).collect();
        key.sort_unstable();
        self.derivative_sorted(g, &key)
    }

    fn derivative_sorted(&self, g: Genus, key: &[u8]) -> Result<Arc<Series>, FrobeniusError> {
        let cache = match g {
            Genus::Zero => &self.cache0,
            Genus::One => &self.cache1,
        };
        if let Some(s) = cache.lock().unwrap().get(key) {
            return Ok(Arc::clone(s));
        }
        let value = match key.split_last() {
            None => Arc::new(self.potential(g)?.clone()),
            Some((&last, rest)) => {
                let parent = self.derivative_sorted(g, rest)?;
                if parent.is_zero() && parent.valid_order() >= 1 {
                    Arc::new(Series::zero(self.table(), parent.valid_order() - 1))
                } else {
                    Arc::new(parent.derivative(last as usize)?)
                }
            }
        };
        cache.lock().unwrap().insert(key.to_vec(), Arc::clone(&value));
        Ok(value)
    }

    /// The coordinate field `gamma_a`.
    pub fn coordinate(&self, a: usize) -> VectorField {
        VectorField::coordinate(self.table(), self.n, a, self.order())
    }

    /// The raised field `gamma^a = sum_b eta^{ab} gamma_b`.
    pub fn raised(&self, a: usize) -> VectorField {
        VectorField::constant(self.table(), &self.eta_inv[a], self.order())
    }

    /// `sum_a w_a gamma^a` for lowered components `w_a`.
    pub fn raise(&self, lowered: &[Series]) -> VectorField {
        let table = self.table();
        let order = lowered.iter().map(Series::valid_order).min().unwrap_or(self.order());
        let mut out = VectorField::zero(table, self.n, order);
        for (a, w) in lowered.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for s in 0..self.n {
                let e = &self.eta_inv[a][s];
                if !e.is_zero() {
                    out.components[s].add_scaled(w, e);
                }
            }
        }
        out
    }

    /// The pairing `sum_{ab} x_a eta^{ab} y_b` of two lowered vectors.
    pub fn pair(&self, x: &[Series], y: &[Series]) -> Series {
        let order = x
            .iter()
            .chain(y)
            .map(Series::valid_order)
            .min()
            .unwrap_or(self.order());
        let mut acc = Series::zero(self.table(), order);
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                let e = &self.eta_inv[a][b];
                if e.is_zero() || yb.is_zero() {
                    continue;
                }
                acc.add_scaled(&(xa * yb), e);
            }
        }
        acc
    }

    /// The original coordinate `t^a = base_point[a] + u^a`.
    pub fn coordinate_series(&self, a: usize) -> Series {
        let t = self.table();
        &Series::variable(t, a, self.order())
            + &Series::constant(t, self.model.base_point[a].clone(), self.order())
    }

    /// `<<v_1 ... v_k>>_g` on the small phase space.
    pub fn correlator(&self, g: Genus, args: &[&VectorField]) -> Result<Series, FrobeniusError> {
        let pot = self.potential(g)?;
        let k = args.len() as u32;
        if pot.valid_order() < k {
            return Err(SeriesError::Truncation {
                needed: k,
                available: pot.valid_order(),
            }
            .into());
        }
        let mut sorted: Vec<&VectorField> = args.to_vec();
        sorted.sort_by_key(|v| v.nonzero_count());
        let order = args
            .iter()
            .map(|v| v.valid_order())
            .fold(pot.valid_order() - k, u32::min);
        let mut prefix = Vec::with_capacity(args.len());
        let s = self.contract(g, &mut prefix, &sorted)?;
        Ok(s.truncate(order))
    }

    fn contract(
        &self,
        g: Genus,
        prefix: &mut Vec<u8>,
        args: &[&VectorField],
    ) -> Result<Series, FrobeniusError> {
        let mut key = prefix.clone();
        key.sort_unstable();
        let d = self.derivative_sorted(g, &key)?;
        let Some((first, rest)) = args.split_first() else {
            return Ok((*d).clone());
        };
        let depth = args.len() as u32;
        let order = d.valid_order().saturating_sub(depth);
        if d.is_zero() {
            if d.valid_order() < depth {
                return Err(SeriesError::Truncation {
                    needed: depth,
                    available: d.valid_order(),
                }
                .into());
            }
            return Ok(Series::zero(self.table(), order));
        }
        let mut acc = Series::zero(self.table(), order);
        for (a, va) in first.components.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            prefix.push(a as u8);
            let inner = self.contract(g, prefix, rest);
            prefix.pop();
            let inner = inner?;
            if inner.is_zero() {
                continue;
            }
            acc.add_scaled(&(va * &inner), &Scalar::one());
        }
        Ok(acc)
    }

    pub fn correlator0(&self, args: &[&VectorField]) -> Result<Series, FrobeniusError> {
        self.correlator(Genus::Zero, args)
    }

    pub fn correlator1(&self, args: &[&VectorField]) -> Result<Series, FrobeniusError> {
        self.correlator(Genus::One, args)
    }

    /// `<<args gamma_r>>_g` for every basis index `r`.
    pub fn lowered(&self, g: Genus, args: &[&VectorField]) -> Result<Vec<Series>, FrobeniusError> {
        (0..self.n)
            .map(|r| {
                let c = self.coordinate(r);
                let mut all: Vec<&VectorField> = args.to_vec();
                all.push(&c);
                self.correlator(g, &all)
            })
            .collect()
    }

    /// `sum_a <<args gamma^a>>_0 gamma_a`.
    pub fn contraction_field(&self, args: &[&VectorField]) -> Result<VectorField, FrobeniusError> {
        Ok(self.raise(&self.lowered(Genus::Zero, args)?))
    }

    /// The quantum product `u . v`.
    pub fn product(&self, u: &VectorField, v: &VectorField) -> Result<VectorField, FrobeniusError> {
        self.contraction_field(&[u, v])
    }

    /// The Euler vector field.
    pub fn euler(&self) -> &VectorField {
        &self.euler
    }

    /// The quantum power `E^k` (with `E^0 = gamma_1`).
    pub fn euler_power(&self, k: usize) -> Result<Arc<VectorField>, FrobeniusError> {
        loop {
            let next = {
                let p = self.powers.lock().unwrap();
                if let Some(v) = p.get(k) {
                    return Ok(Arc::clone(v));
                }
                p.len()
            };
            let value = match next {
                0 => Arc::new(self.coordinate(0)),
                1 => Arc::new(self.euler.clone()),
                _ => {
                    let prev = Arc::clone(&self.powers.lock().unwrap()[next - 1]);
                    Arc::new(self.product(&prev, &self.euler)?)
                }
            };
            let mut p = self.powers.lock().unwrap();
            if p.len() == next {
                p.push(value);
            }
        }
    }

    /// Matrix of quantum multiplication by `u`: entry `[s][a]` is
    /// `(u . gamma_a)^s = <<gamma^s u gamma_a>>_0`.
    pub fn multiplication_matrix(&self, u: &VectorField) -> Result<Vec<Vec<Series>>, FrobeniusError> {
        let cols: Vec<VectorField> = (0..self.n)
            .map(|a| self.product(u, &self.coordinate(a)))
            .collect::<Result<_, _>>()?;
        Ok((0..self.n)
            .map(|s| (0..self.n).map(|a| cols[a].components[s].clone()).collect())
            .collect())
    }

    /// `Delta_a = sum_{bc} eta^{bc} <<gamma_a gamma_b gamma_c>>_0`.
    pub fn delta(&self) -> Result<Vec<Series>, FrobeniusError> {
        self.trace_lowered(Genus::Zero, &[])
    }

    /// `sum_{bc} eta^{bc} <<args gamma_a gamma_b gamma_c>>_g` for each `a`.
    fn trace_lowered(&self, g: Genus, args: &[&VectorField]) -> Result<Vec<Series>, FrobeniusError> {
        (0..self.n)
            .map(|a| {
                let ga = self.coordinate(a);
                let mut all: Vec<&VectorField> = args.to_vec();
                all.push(&ga);
                self.trace(g, &all)
            })
            .collect()
    }

    /// `sum_{ab} eta^{ab} <<gamma_a gamma_b args>>_g`.
    pub fn trace(&self, g: Genus, args: &[&VectorField]) -> Result<Series, FrobeniusError> {
        self.weighted_trace(g, args, |_| Scalar::one())
    }

    /// `sum_{ab} w(a) eta^{ab} <<gamma_a gamma_b args>>_g`.
    pub fn weighted_trace(
        &self,
        g: Genus,
        args: &[&VectorField],
        w: impl Fn(usize) -> Scalar,
    ) -> Result<Series, FrobeniusError> {
        let mut acc: Option<Series> = None;
        for a in 0..self.n {
            let wa = w(a);
            for bb in 0..self.n {
                let e = &self.eta_inv[a][bb];
                if e.is_zero() {
                    continue;
                }
                let ga = self.coordinate(a);
                let gb = self.coordinate(bb);
                let mut all: Vec<&VectorField> = vec![&ga, &gb];
                all.extend_from_slice(args);
                let c = self.correlator(g, &all)?;
                let coeff = e * &wa;
                match &mut acc {
                    None => acc = Some(c.scale(&coeff)),
                    Some(s) => s.add_scaled(&c, &coeff),
                }
            }
        }
        Ok(acc.expect("eta is invertible, so some entry is nonzero"))
    }

    /// The vector fields used to sample identities that take field
    /// arguments: a few basis fields, `E` and `E^2`.
    pub fn sample_fields(&self) -> Result<Vec<(String, VectorField)>, FrobeniusError> {
        let mut out: Vec<(String, VectorField)> = self
            .sample_basis()
            .into_iter()
            .map(|a| (format!("gamma_{}", a + 1), self.coordinate(a)))
            .collect();
        out.push(("E".into(), self.euler.clone()));
        out.push(("E^2".into(), (*self.euler_power(2)?).clone()));
        Ok(out)
    }

    /// Indices of the basis fields used for sampling.
    pub fn sample_basis(&self) -> Vec<usize> {
        let n = self.n;
        if n <= 4 {
            (0..n).collect()
        } else {
            let mut v = vec![0, 1, n / 2, n - 1];
            v.dedup();
            v
        }
    }
}

fn at_indices(idx: &[usize]) -> String {
    let labels: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", labels.join(","))
}

/// All multisets of size `k` from `0..n`, as sorted index lists.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Genus-0 string identities: `<<gamma_1 gamma_a gamma_b>>_0 = eta_ab` and
/// the vanishing of `<<gamma_1 gamma_{m_1} ... gamma_{m_k}>>_0` for `k = 3`
/// (and `k = 4` on small bases).
pub fn check_string(fr: &Frobenius) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    let n = fr.rank();
    let t = fr.table();
    for idx in multisets(n, 2) {
        let d = fr.derivative(Genus::Zero, &[0, idx[0], idx[1]])?;
        let eta = Series::constant(t, fr.model().eta[idx[0]][idx[1]].clone(), d.valid_order());
        res.push(|| format!("<<gamma_1 gamma_a gamma_b>> at {}", at_indices(&idx)), &(&*d - &eta));
    }
    let max_k = if n <= 6 { 4 } else { 3 };
    for k in 3..=max_k {
        for idx in multisets(n, k) {
            let mut all = vec![0];
            all.extend(&idx);
            let d = fr.derivative(Genus::Zero, &all)?;
            res.push(|| format!("<<gamma_1 ...>> at {}", at_indices(&idx)), &d);
        }
    }
    Ok(res.finish("string-equation", "string equation for genus-0 correlators"))
}

/// Raised structure constants `C_{ab}^r = sum_s <<gamma_a gamma_b gamma_s>> eta^{sr}`,
/// indexed by the pair `(a, b)` with `a <= b`.
fn raised_structure(
    fr: &Frobenius,
    f0: &dyn Fn(&[usize]) -> Result<Arc<Series>, FrobeniusError>,
) -> Result<HashMap<(usize, usize), Vec<Series>>, FrobeniusError> {
    let n = fr.rank();
    let mut out = HashMap::new();
    for a in 0..n {
        for b in a..n {
            let lowered: Vec<Arc<Series>> = (0..n).map(|s| f0(&[a, b, s])).collect::<Result<_, _>>()?;
            let order = lowered.iter().map(|s| s.valid_order()).min().unwrap();
            let mut up = vec![Series::zero(fr.table(), order); n];
            for (s, l) in lowered.iter().enumerate() {
                if l.is_zero() {
                    continue;
                }
                for (r, u) in up.iter_mut().enumerate() {
                    let e = &fr.eta_inv()[s][r];
                    if !e.is_zero() {
                        u.add_scaled(l, e);
                    }
                }
            }
            out.insert((a, b), up);
        }
    }
    Ok(out)
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// WDVV residuals of an arbitrary genus-0 potential, one per index choice
/// `(a, b, m, v)` with `b < m`, `a <= v`. Shared by the model check and the
/// coefficient solver.
pub fn wdvv_residuals(
    fr: &Frobenius,
    f0: &dyn Fn(&[usize]) -> Result<Arc<Series>, FrobeniusError>,
) -> Result<Vec<(String, Series)>, FrobeniusError> {
    let n = fr.rank();
    let up = raised_structure(fr, f0)?;
    let mut lowered: HashMap<(usize, usize, usize), Arc<Series>> = HashMap::new();
    for idx in multisets(n, 3) {
        lowered.insert((idx[0], idx[1], idx[2]), f0(&idx)?);
    }
    let c3 = |a: usize, b: usize, c: usize| {
        let mut v = [a, b, c];
        v.sort_unstable();
        Arc::clone(&lowered[&(v[0], v[1], v[2])])
    };
    // P[(ab),(mv)] = sum_r C_{ab}^r C_{r m v}
    let mut products: HashMap<((usize, usize), (usize, usize)), Series> = HashMap::new();
    let mut prod = |p: (usize, usize), q: (usize, usize)| -> Series {
        if let Some(s) = products.get(&(p, q)) {
            return s.clone();
        }
        let row = &up[&p];
        let order = row.iter().map(Series::valid_order).min().unwrap();
        let mut acc = Series::zero(fr.table(), order);
        for (r, cr) in row.iter().enumerate() {
            if cr.is_zero() {
                continue;
            }
            let l = c3(r, q.0, q.1);
            if l.is_zero() {
                acc = acc.truncate(l.valid_order());
                continue;
            }
            acc.add_scaled(&(cr * &*l), &Scalar::one());
        }
        products.insert((p, q), acc.clone());
        acc
    };
    let mut out = Vec::new();
    for a in 0..n {
        for v in a..n {
            for b in 0..n {
                for m in (b + 1)..n {
                    let lhs = prod(key(a, b), key(m, v));
                    let rhs = prod(key(a, m), key(b, v));
                    let r = &lhs - &rhs;
                    out.push((format!("(a,b,m,v) = {}", at_indices(&[a, b, m, v])), r));
                }
            }
        }
    }
    Ok(out)
}

/// WDVV associativity of the model's genus-0 potential.
pub fn check_wdvv(fr: &Frobenius) -> Result<CheckReport, FrobeniusError> {
    let f = |idx: &[usize]| fr.derivative(Genus::Zero, idx);
    let mut res = Residuals::new();
    for (at, r) in wdvv_residuals(fr, &f)? {
        res.push(|| at, &r);
    }
    Ok(res.finish("wdvv", "WDVV associativity"))
}

/// The five quasi-homogeneity identities for Euler-field insertions,
/// items (i) to (v), one report each.
pub fn check_quasi_homogeneity(fr: &Frobenius) -> Result<Vec<CheckReport>, FrobeniusError> {
    let n = fr.rank();
    let t = fr.table();
    let b = fr.b();
    let e = fr.euler();
    let b1 = b[0].clone();
    let one = Scalar::one();
    let anchor = |item: &str| format!("Euler quasi-homogeneity ({item})");
    let mut reports = Vec::new();

    // (i) <<E>> = 2(b_1+1) F + 1/2 sum C_ab t^a t^b
    {
        let mut res = Residuals::new();
        let f = fr.derivative(Genus::Zero, &[])?;
        let lhs = fr.correlator0(&[e])?;
        let mut rhs = f.scale(&(Scalar::int(2) * (&b1 + &one)));
        for a in 0..n {
            for c in 0..n {
                let cab = &fr.c_lower()[a][c];
                if !cab.is_zero() {
                    let tt = &fr.coordinate_series(a) * &fr.coordinate_series(c);
                    rhs.add_scaled(&tt, &(cab * &Scalar::new(1, 2)));
                }
            }
        }
        res.push(|| "<<E>>".into(), &(&lhs - &rhs));
        reports.push(res.finish("quasi-homogeneity (i)", anchor("i")));
    }
    // (ii) <<E gamma_a>> = (b_a + b_1 + 1) <<gamma_a>> + sum_b C_ab t^b
    {
        let mut res = Residuals::new();
        for a in 0..n {
            let ga = fr.coordinate(a);
            let lhs = fr.correlator0(&[e, &ga])?;
            let mut rhs = fr.derivative(Genus::Zero, &[a])?.scale(&(&b[a] + &b1 + &one));
            for c in 0..n {
                let cab = &fr.c_lower()[a][c];
                if !cab.is_zero() {
                    rhs.add_scaled(&fr.coordinate_series(c), cab);
                }
            }
            res.push(|| format!("a = {}", a + 1), &(&lhs - &rhs));
        }
        reports.push(res.finish("quasi-homogeneity (ii)", anchor("ii")));
    }
    // (iii) <<E gamma_a gamma_b>> = C_ab + (b_a + b_b) <<gamma_a gamma_b>>
    {
        let mut res = Residuals::new();
        for idx in multisets(n, 2) {
            let (a, c) = (idx[0], idx[1]);
            let (ga, gc) = (fr.coordinate(a), fr.coordinate(c));
            let lhs = fr.correlator0(&[e, &ga, &gc])?;
            let mut rhs = fr.derivative(Genus::Zero, &[a, c])?.scale(&(&b[a] + &b[c]));
            rhs = &rhs + &Series::constant(t, fr.c_lower()[a][c].clone(), rhs.valid_order());
            res.push(|| format!("(a,b) = {}", at_indices(&idx)), &(&lhs - &rhs));
        }
        reports.push(res.finish("quasi-homogeneity (iii)", anchor("iii")));
    }
    // (iv), (v): shifts b_1 + 1 and 2 b_1 + 2
    for (k, item) in [(3usize, "iv"), (4, "v")] {
        let mut res = Residuals::new();
        let shift = Scalar::int(k as i64 - 2) * (&b1 + &one);
        for idx in multisets(n, k) {
            let fields: Vec<VectorField> = idx.iter().map(|&a| fr.coordinate(a)).collect();
            let mut args: Vec<&VectorField> = vec![e];
            args.extend(fields.iter());
            let lhs = fr.correlator0(&args)?;
            let weight: Scalar = idx.iter().map(|&a| b[a].clone()).sum::<Scalar>() - &shift;
            let rhs = fr.derivative(Genus::Zero, &idx)?.scale(&weight);
            res.push(|| format!("indices {}", at_indices(&idx)), &(&lhs - &rhs));
        }
        reports.push(res.finish(format!("quasi-homogeneity ({item})"), anchor(item)));
    }
    Ok(reports)
}

/// `[E^k, E^m] = (m - k) E^{m+k-1}`.
pub fn check_euler_bracket(fr: &Frobenius, k: usize, m: usize) -> Result<CheckReport, FrobeniusError> {
    let ek = fr.euler_power(k)?;
    let em = fr.euler_power(m)?;
    let lhs = ek.bracket(&em)?;
    let mut res = Residuals::new();
    let rhs = if k + m >= 1 {
        fr.euler_power(k + m - 1)?
            .scale(&Scalar::int(m as i64 - k as i64))
    } else {
        VectorField::zero(fr.table(), fr.rank(), lhs.valid_order())
    };
    let diff = lhs.sub(&rhs);
    for (a, c) in diff.components.iter().enumerate() {
        res.push(|| format!("component {}", a + 1), c);
    }
    Ok(res.finish(
        format!("euler-bracket (k={k},m={m})"),
        format!("Virasoro bracket of Euler powers (k={k},m={m})"),
    ))
}

/// `E^k = sum_a x_k^a gamma_a` with `x_k^a = <<gamma_1 E^k gamma^a>>_0`.
pub fn check_euler_coefficients(fr: &Frobenius, max_k: usize) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    let g1 = fr.coordinate(0);
    for k in 0..=max_k {
        let ek = fr.euler_power(k)?;
        for a in 0..fr.rank() {
            let up = fr.raised(a);
            let x = fr.correlator0(&[&g1, &ek, &up])?;
            res.push(|| format!("k = {k}, a = {}", a + 1), &(&x - &ek.components[a]));
        }
    }
    Ok(res.finish("euler-coefficients", "Euler power coefficients via gamma_1 insertion"))
}

/// The derivative identities: the product rule for the quantum product,
/// Euler derivatives of 3-point functions, derivatives of
/// `<<gamma^a E^i gamma_b>>` along Euler powers, the two derived WDVV
/// exchange identities and the index-lowering identity.
pub fn check_derivative_identities(fr: &Frobenius) -> Result<Vec<CheckReport>, FrobeniusError> {
    let samples = fr.sample_fields()?;
    let mut reports = Vec::new();
    reports.push(check_product_rule(fr, &samples)?);
    reports.push(check_euler_derivative(fr, &samples)?);
    reports.push(check_euler_power_derivative(fr, 2)?);
    reports.extend(check_derived_wdvv(fr)?);
    reports.push(check_lower_upper(fr, &samples)?);
    Ok(reports)
}

/// `nabla_u (v . w) = (nabla_u v) . w + v . (nabla_u w) + sum_a <<u v w gamma^a>> gamma_a`.
pub fn check_product_rule(
    fr: &Frobenius,
    samples: &[(String, VectorField)],
) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    for (un, u) in samples {
        for (i, (vn, v)) in samples.iter().enumerate() {
            for (wn, w) in &samples[i..] {
                let vw = fr.product(v, w)?;
                let lhs = u.nabla(&vw)?;
                let mut rhs = fr.product(&u.nabla(v)?, w)?;
                rhs = rhs.add(&fr.product(v, &u.nabla(w)?)?);
                rhs = rhs.add(&fr.contraction_field(&[u, v, w])?);
                let d = lhs.sub(&rhs);
                for (a, c) in d.components.iter().enumerate() {
                    res.push(|| format!("u={un}, v={vn}, w={wn}, component {}", a + 1), c);
                }
            }
        }
    }
    Ok(res.finish("derivative-product-rule", "covariant derivative of the quantum product"))
}

/// `v <<E gamma_a gamma_b>> = (b_a + b_b) <<v gamma_a gamma_b>>`.
pub fn check_euler_derivative(
    fr: &Frobenius,
    samples: &[(String, VectorField)],
) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    let b = fr.b();
    for idx in multisets(fr.rank(), 2) {
        let (ga, gb) = (fr.coordinate(idx[0]), fr.coordinate(idx[1]));
        let e3 = fr.correlator0(&[fr.euler(), &ga, &gb])?;
        for (vn, v) in samples {
            let lhs = v.apply(&e3)?;
            let rhs = fr.correlator0(&[v, &ga, &gb])?.scale(&(&b[idx[0]] + &b[idx[1]]));
            res.push(|| format!("v={vn}, (a,b) = {}", at_indices(&idx)), &(&lhs - &rhs));
        }
    }
    Ok(res.finish("euler-derivative", "Euler derivative of 3-point functions"))
}

/// `M_i[a][b] = <<gamma^a E^i gamma_b>>_0 = (E^i . gamma_b)^a`.
pub fn euler_power_matrix(fr: &Frobenius, i: usize) -> Result<Vec<Vec<Series>>, FrobeniusError> {
    let ei = fr.euler_power(i)?;
    fr.multiplication_matrix(&ei)
}

/// Derivatives of `<<gamma^a E^i gamma_b>>` along `E^k` for `1 <= i, k <= max`.
pub fn check_euler_power_derivative(fr: &Frobenius, max: usize) -> Result<CheckReport, FrobeniusError> {
    let n = fr.rank();
    let b = fr.b();
    let mats: Vec<Vec<Vec<Series>>> = (0..=2 * max - 1)
        .map(|i| euler_power_matrix(fr, i))
        .collect::<Result<_, _>>()?;
    let mut res = Residuals::new();
    for i in 1..=max {
        for k in 1..=max {
            let ek = fr.euler_power(k)?;
            for a in 0..n {
                for bb in 0..n {
                    let lhs = ek.apply(&mats[i][a][bb])?;
                    let coeff = &b[bb] - &b[a] + Scalar::int(i as i64);
                    let mut rhs = mats[k + i - 1][a][bb].scale(&coeff);
                    for j in 1..i.min(k) {
                        for mu in 0..n {
                            let x = &mats[j][a][mu] * &mats[k + i - 1 - j][mu][bb];
                            let y = &mats[k + i - 1 - j][a][mu] * &mats[j][mu][bb];
                            rhs.add_scaled(&(&y - &x), &b[mu]);
                        }
                    }
                    res.push(
                        || format!("i={i}, k={k}, (a,b) = {}", at_indices(&[a, bb])),
                        &(&lhs - &rhs),
                    );
                }
            }
        }
    }
    Ok(res.finish("euler-power-derivative", "Euler power derivatives of 3-point functions"))
}

/// The two derived WDVV identities, on `u, v` drawn from Euler powers and
/// basis fields and `w_i` from the sampled basis fields.
pub fn check_derived_wdvv(fr: &Frobenius) -> Result<Vec<CheckReport>, FrobeniusError> {
    let basis: Vec<(String, VectorField)> = fr
        .sample_basis()
        .into_iter()
        .map(|a| (format!("gamma_{}", a + 1), fr.coordinate(a)))
        .collect();
    let e1 = (*fr.euler_power(1)?).clone();
    let e2 = (*fr.euler_power(2)?).clone();
    let last = basis.last().unwrap().clone();
    let pairs: Vec<((String, VectorField), (String, VectorField))> = vec![
        (("E".into(), e1.clone()), ("E^2".into(), e2)),
        (last, ("E".into(), e1)),
    ];
    let mut memo: HashMap<Vec<String>, Vec<Series>> = HashMap::new();
    let mut low = |names: Vec<&str>, fields: Vec<&VectorField>| -> Result<Vec<Series>, FrobeniusError> {
        let mut k: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        k.sort();
        if let Some(v) = memo.get(&k) {
            return Ok(v.clone());
        }
        let v = fr.lowered(Genus::Zero, &fields)?;
        memo.insert(k, v.clone());
        Ok(v)
    };

    let mut res1 = Residuals::new();
    let mut res2 = Residuals::new();
    for ((un, u), (vn, v)) in &pairs {
        // (i): symmetric under u <-> v
        for w in multisets(basis.len(), 3) {
            let (w1n, w1) = (&basis[w[0]].0, &basis[w[0]].1);
            let (w2n, w2) = (&basis[w[1]].0, &basis[w[1]].1);
            let (w3n, w3) = (&basis[w[2]].0, &basis[w[2]].1);
            let side = |x: (&str, &VectorField),
                        y: (&str, &VectorField),
                        low: &mut dyn FnMut(Vec<&str>, Vec<&VectorField>) -> Result<Vec<Series>, FrobeniusError>|
             -> Result<Series, FrobeniusError> {
                let a = low(vec![x.0, w1n, w2n], vec![x.1, w1, w2])?;
                let bq = low(vec![y.0, w3n], vec![y.1, w3])?;
                let c = low(vec![x.0, w1n], vec![x.1, w1])?;
                let d = low(vec![y.0, w2n, w3n], vec![y.1, w2, w3])?;
                Ok(&fr.pair(&a, &bq) + &fr.pair(&c, &d))
            };
            let l = side((un, u), (vn, v), &mut low)?;
            let r = side((vn, v), (un, u), &mut low)?;
            res1.push(|| format!("u={un}, v={vn}, w=({w1n},{w2n},{w3n})"), &(&l - &r));
        }
        // (ii)
        for w in multisets(basis.len(), 4) {
            let ws: Vec<(&str, &VectorField)> =
                w.iter().map(|&i| (basis[i].0.as_str(), &basis[i].1)).collect();
            let side = |x: (&str, &VectorField),
                        y: (&str, &VectorField),
                        low: &mut dyn FnMut(Vec<&str>, Vec<&VectorField>) -> Result<Vec<Series>, FrobeniusError>|
             -> Result<Series, FrobeniusError> {
                let (w1, w2, w3, w4) = (ws[0], ws[1], ws[2], ws[3]);
                let t1 = fr.pair(
                    &low(vec![x.0, w1.0, w2.0], vec![x.1, w1.1, w2.1])?,
                    &low(vec![y.0, w3.0, w4.0], vec![y.1, w3.1, w4.1])?,
                );
                let t2 = fr.pair(
                    &low(vec![x.0, w1.0, w3.0], vec![x.1, w1.1, w3.1])?,
                    &low(vec![y.0, w2.0, w4.0], vec![y.1, w2.1, w4.1])?,
                );
                let t3 = fr.pair(
                    &low(vec![x.0, w1.0, w2.0, w3.0], vec![x.1, w1.1, w2.1, w3.1])?,
                    &low(vec![y.0, w4.0], vec![y.1, w4.1])?,
                );
                let t4 = fr.pair(
                    &low(vec![x.0, w1.0], vec![x.1, w1.1])?,
                    &low(vec![y.0, w2.0, w3.0, w4.0], vec![y.1, w2.1, w3.1, w4.1])?,
                );
                Ok(&(&t1 + &t2) + &(&t3 + &t4))
            };
            let l = side((un, u), (vn, v), &mut low)?;
            let r = side((vn, v), (un, u), &mut low)?;
            let names: Vec<&str> = ws.iter().map(|x| x.0).collect();
            res2.push(|| format!("u={un}, v={vn}, w=({})", names.join(",")), &(&l - &r));
        }
    }
    Ok(vec![
        res1.finish("derived-wdvv (i)", "twice-differentiated WDVV exchange identity"),
        res2.finish("derived-wdvv (ii)", "three-times-differentiated WDVV exchange identity"),
    ])
}

/// `sum_a b_a <<gamma_a gamma^a v...>>_g = 1/2 sum_a <<gamma_a gamma^a v...>>_g`.
pub fn check_lower_upper(
    fr: &Frobenius,
    samples: &[(String, VectorField)],
) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    let b = fr.b().to_vec();
    let half = Scalar::new(1, 2);
    let mut genera = vec![Genus::Zero];
    if fr.has_genus_one() {
        genera.push(Genus::One);
    }
    for g in genera {
        for (vn, v) in samples {
            let lhs = fr.weighted_trace(g, &[v], |a| b[a].clone())?;
            let rhs = fr.trace(g, &[v])?.scale(&half);
            res.push(|| format!("genus {}, v={vn}", g as u8), &(&lhs - &rhs));
        }
    }
    Ok(res.finish("index-lowering", "b-weighted trace equals half trace"))
}

/// The scalar identity
/// `1/2 sum b(1-b) - (b_1+1) chi / 12 = -(1/12) int c_1 c_{d-1}`.
pub fn check_borisov(fr: &Frobenius) -> CheckReport {
    let b = fr.b();
    let m = fr.model();
    let half = Scalar::new(1, 2);
    let lhs = &half * b.iter().map(|x| x * &(Scalar::one() - x)).sum::<Scalar>()
        - (&b[0] + &Scalar::one()) * &m.euler_char * Scalar::new(1, 12);
    let rhs = -(&m.c1_cd1 * &Scalar::new(1, 12));
    let mut res = Residuals::new();
    res.push_scalar(|| format!("lhs {lhs} vs rhs {rhs}"), &(&lhs - &rhs));
    res.finish("borisov", "Borisov identity").with_note(format!("lhs = {lhs}, rhs = {rhs}"))
}

/// Every genus-0 foundation check.
pub fn foundation_checks(fr: &Frobenius) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let mut push = |r: Result<CheckReport, FrobeniusError>, name: &str, anchor: &str| match r {
        Ok(r) => out.push(r),
        Err(e) => out.push(CheckReport::undetermined(name, anchor, e.to_string())),
    };
    push(check_string(fr), "string-equation", "string equation for genus-0 correlators");
    push(check_wdvv(fr), "wdvv", "WDVV associativity");
    match check_quasi_homogeneity(fr) {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckReport::undetermined(
            "quasi-homogeneity",
            "Euler quasi-homogeneity",
            e.to_string(),
        )),
    }
    let mut push = |r: Result<CheckReport, FrobeniusError>, name: &str, anchor: &str| match r {
        Ok(r) => out.push(r),
        Err(e) => out.push(CheckReport::undetermined(name, anchor, e.to_string())),
    };
    for k in 0..=3 {
        for m in (k + 1)..=3 {
            push(
                check_euler_bracket(fr, k, m),
                &format!("euler-bracket (k={k},m={m})"),
                &format!("Virasoro bracket of Euler powers (k={k},m={m})"),
            );
        }
    }
    push(
        check_euler_coefficients(fr, 3),
        "euler-coefficients",
        "Euler power coefficients via gamma_1 insertion",
    );
    match check_derivative_identities(fr) {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckReport::undetermined(
            "derivative-identities",
            "derivative identities",
            e.to_string(),
        )),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_model;

    const CP1: &str = "\
[model]
name = cp1
dim = 1
euler_char = 2
c1_cd1 = 2
order = 8
[novikov]
q 2
[basis]
t 0 0
s 1 1
[eta]
0 1
1 0
[chern]
0 2
0 0
[f0]
1/2 ; t^2 s
1 ; q
1 ; q s
1/2 ; q s^2
1/6 ; q s^3
1/24 ; q s^4
1/120 ; q s^5
1/720 ; q s^6
[f1]
-1/24 ; s
";

    fn cp1() -> Frobenius {
        Frobenius::new(&parse_model(CP1).unwrap()).unwrap()
    }

    #[test]
    fn string_three_point_is_eta() {
        let fr = cp1();
        let g1 = fr.coordinate(0);
        let g2 = fr.coordinate(1);
        let c = fr.correlator0(&[&g1, &g1, &g2]).unwrap();
        assert_eq!(c.as_constant(), Some(Scalar::one()));
        let c = fr.correlator0(&[&g1, &g2, &g2]).unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn euler_square_of_cp1() {
        let fr = cp1();
        let e2 = fr.euler_power(2).unwrap();
        // E^2 = (t^2 + 4 q e^s) gamma_1 + 4 t gamma_2
        let t = fr.table();
        assert_eq!(e2.components[1].coeff_of(&[1, 0, 0]), Scalar::int(4));
        assert_eq!(e2.components[0].coeff_of(&[2, 0, 0]), Scalar::one());
        assert_eq!(e2.components[0].coeff_of(&[0, 0, 1]), Scalar::int(4));
        assert_eq!(e2.components[0].coeff_of(&[0, 1, 1]), Scalar::int(4));
        assert_eq!(e2.components[0].table(), t);
    }

    #[test]
    fn genus_one_one_point() {
        let fr = cp1();
        let g2 = fr.coordinate(1);
        let c = fr.correlator1(&[&g2]).unwrap();
        assert_eq!(c.as_constant(), Some(Scalar::new(-1, 24)));
        let g1 = fr.coordinate(0);
        assert!(fr.correlator1(&[&g1]).unwrap().is_zero());
    }

    #[test]
    fn identity_and_commutativity() {
        let fr = cp1();
        let e = fr.euler().clone();
        let e2 = fr.euler_power(2).unwrap();
        let g1 = fr.coordinate(0);
        let p = fr.product(&g1, &e).unwrap();
        assert_eq!(p.sub(&e.truncate(p.valid_order())).is_zero(), true);
        let a = fr.product(&e, &e2).unwrap();
        let b = fr.product(&e2, &e).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn foundations_pass_on_cp1() {
        let fr = cp1();
        for r in foundation_checks(&fr) {
            assert_eq!(r.status, crate::report::Status::Pass, "{r:?}");
        }
        assert!(check_borisov(&fr).passed());
    }

    #[test]
    fn bracket_examples() {
        let fr = cp1();
        let g1 = fr.coordinate(0);
        let e = fr.euler().clone();
        let br = g1.bracket(&e).unwrap();
        assert_eq!(br.sub(&g1).truncate(br.valid_order()).is_zero(), true);
        assert!(e.bracket(&e).unwrap().is_zero());
        assert!(g1.bracket(&fr.coordinate(1)).unwrap().is_zero());
    }

    #[test]
    fn wrong_chern_breaks_item_three() {
        let bad = CP1.replace("[chern]\n0 2", "[chern]\n0 4");
        let fr = Frobenius::new(&parse_model(&bad).unwrap()).unwrap();
        let reports = check_quasi_homogeneity(&fr).unwrap();
        assert!(!reports[2].passed());
    }
}
