//! Built-in models and a WDVV solver for quantum potentials.
//!
//! Each builtin carries the set of checks it is allowed to fail. These
//! annotations belong to the builtin, so models read from files never
//! inherit them.

use std::collections::BTreeSet;

use crate::frobenius::{wdvv_residuals, Frobenius, FrobeniusError, Genus};
use crate::model::{BasisClass, ModelError, ModelParts, ModelSpec};
use crate::report::Witness;
use crate::scalar::{factorial, Scalar};
use crate::series::{Monomial, Series};

/// Errors from the model library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LibraryError {
    #[error("unknown model '{0}'; run list-models for the available names")]
    Unknown(String),
    #[error("{0}")]
    Parameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error("no coefficient for degree {degree} makes WDVV hold: {witness}")]
    Inconsistent { degree: u32, witness: String },
    #[error("WDVV does not determine the degree-{degree} coefficient")]
    Underdetermined { degree: u32 },
}

/// A builtin model with its allowed failures.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub spec: ModelSpec,
    pub description: String,
    /// Names of checks that are allowed to fail on this model.
    pub expected_failures: BTreeSet<String>,
}

/// Names accepted by [`builtin`], with a short description.
pub fn builtin_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("point", "cohomology of a point: one class, F0 = t^3/6, F1 = 0"),
        ("cp1", "quantum cohomology of the projective line, F1 = -s/24"),
        ("cp2", "quantum cohomology of the projective plane, invariants from WDVV, no F1"),
        ("curve-even", "even classes of a genus-g curve (negative control), --g sets g"),
        ("k3-full", "K3 surface with the full Hodge diamond (24 classes), F1 = 0"),
        ("k3-sublocus", "K3 surface restricted to the identity, H^{1,1} and the top class (negative control)"),
        ("M2", "classical cohomology ring of CP^2 with c_1 = 0"),
        ("M3", "classical cohomology ring of CP^3 with c_1 = 0"),
        ("M4", "classical cohomology ring of CP^4 with c_1 = 0"),
        ("M5", "classical cohomology ring of CP^5 with c_1 = 0"),
        ("M6", "classical cohomology ring of CP^6 with c_1 = 0"),
    ]
}

fn s(n: i64) -> Scalar {
    Scalar::int(n)
}

fn zeros(n: usize) -> Vec<Vec<Scalar>> {
    vec![vec![Scalar::zero(); n]; n]
}

fn anti_diagonal(n: usize) -> Vec<Vec<Scalar>> {
    let mut m = zeros(n);
    for i in 0..n {
        m[i][n - 1 - i] = Scalar::one();
    }
    m
}

/// Builds a series from `(coefficient, exponents)` pairs over the full table.
fn poly(spec_table: &std::sync::Arc<crate::series::VariableTable>, order: u32, terms: &[(Scalar, Vec<u32>)]) -> Series {
    Series::from_terms(
        spec_table,
        order,
        terms
            .iter()
            .map(|(c, e)| (Monomial::from_exponents(e).expect("small exponents"), c.clone())),
    )
}

fn exps(len: usize, pairs: &[(usize, u32)]) -> Vec<u32> {
    let mut v = vec![0; len];
    for &(i, e) in pairs {
        v[i] += e;
    }
    v
}

struct Draft {
    name: String,
    dim: u32,
    basis: Vec<BasisClass>,
    eta: Vec<Vec<Scalar>>,
    chern: Vec<Vec<Scalar>>,
    euler_char: Scalar,
    c1_cd1: Scalar,
    novikov: Vec<(String, u32)>,
    base_point: Vec<Scalar>,
    order: u32,
}

impl Draft {
    fn table(&self) -> Result<std::sync::Arc<crate::series::VariableTable>, ModelError> {
        ModelSpec::make_table(&self.basis, &self.novikov)
    }

    fn build(self, f0: &[(Scalar, Vec<u32>)], f1: Option<&[(Scalar, Vec<u32>)]>) -> Result<ModelSpec, ModelError> {
        let table = self.table()?;
        let f0 = poly(&table, self.order, f0);
        let f1 = f1.map(|t| poly(&table, self.order, t));
        self.finish(f0, f1)
    }

    fn finish(self, f0: Series, f1: Option<Series>) -> Result<ModelSpec, ModelError> {
        ModelSpec::new(ModelParts {
            name: self.name,
            dim: self.dim,
            basis: self.basis,
            eta: self.eta,
            chern: self.chern,
            euler_char: self.euler_char,
            c1_cd1: self.c1_cd1,
            novikov: self.novikov,
            base_point: self.base_point,
            order: self.order,
            f0,
            f1,
        })
    }
}

/// Options accepted by [`builtin`].
#[derive(Debug, Clone, Default)]
pub struct BuiltinOptions {
    /// Truncation order; each model has its own default.
    pub order: Option<u32>,
    /// Genus of the curve for `curve-even` (default 2).
    pub genus: Option<u32>,
}

/// Default truncation order of a builtin.
pub fn default_order(name: &str) -> Option<u32> {
    Some(match name {
        "point" => 8,
        "cp1" => 12,
        "cp2" => 26,
        "curve-even" => 8,
        "k3-full" | "k3-sublocus" => 6,
        "M2" | "M3" | "M4" | "M5" | "M6" => 8,
        _ => return None,
    })
}

/// Constructs a builtin model by name.
pub fn builtin(name: &str, opts: &BuiltinOptions) -> Result<Builtin, LibraryError> {
    let order = match opts.order {
        Some(o) => o,
        None => default_order(name).ok_or_else(|| LibraryError::Unknown(name.to_string()))?,
    };
    if opts.genus.is_some() && name != "curve-even" {
        return Err(LibraryError::Parameter("--g only applies to curve-even".into()));
    }
    match name {
        "point" => point(order),
        "cp1" => cp1(order),
        "cp2" => cp2(order),
        "curve-even" => curve_even(opts.genus.unwrap_or(2), order),
        "k3-full" => k3_full(order),
        "k3-sublocus" => k3_sublocus(order),
        "M2" => projective_ring(2, order),
        "M3" => projective_ring(3, order),
        "M4" => projective_ring(4, order),
        "M5" => projective_ring(5, order),
        "M6" => projective_ring(6, order),
        other => Err(LibraryError::Unknown(other.to_string())),
    }
}

fn point(order: u32) -> Result<Builtin, LibraryError> {
    let d = Draft {
        name: "point".into(),
        dim: 0,
        basis: vec![BasisClass::new("t", 0, 0)],
        eta: vec![vec![Scalar::one()]],
        chern: zeros(1),
        euler_char: Scalar::one(),
        c1_cd1: Scalar::zero(),
        novikov: vec![],
        base_point: vec![Scalar::zero()],
        order,
    };
    let spec = d.build(&[(Scalar::new(1, 6), vec![3])], Some(&[]))?;
    Ok(Builtin {
        spec,
        description: "cohomology of a point".into(),
        expected_failures: BTreeSet::new(),
    })
}

fn cp1(order: u32) -> Result<Builtin, LibraryError> {
    let d = Draft {
        name: "cp1".into(),
        dim: 1,
        basis: vec![BasisClass::new("t", 0, 0), BasisClass::new("s", 1, 1)],
        eta: anti_diagonal(2),
        chern: vec![vec![s(0), s(2)], vec![s(0), s(0)]],
        euler_char: s(2),
        c1_cd1: s(2),
        novikov: vec![("q".into(), 2)],
        base_point: vec![Scalar::zero(), Scalar::zero()],
        order,
    };
    let mut f0 = vec![(Scalar::new(1, 2), vec![2, 1, 0])];
    for j in 0..=order.saturating_sub(2) {
        f0.push((factorial(j).recip(), vec![0, j, 1]));
    }
    let spec = d.build(&f0, Some(&[(Scalar::new(-1, 24), vec![0, 1, 0])]))?;
    Ok(Builtin {
        spec,
        description: "quantum cohomology of the projective line".into(),
        expected_failures: BTreeSet::new(),
    })
}

/// Template for quantum potentials of the form
/// `classical + sum_d N_d q^d exp(d t_div) t_pt^{k_d} / k_d!`
/// with `k_d = slope * d + intercept`.
#[derive(Debug, Clone)]
pub struct WdvvTemplate {
    pub name: String,
    pub dim: u32,
    pub basis: Vec<BasisClass>,
    pub eta: Vec<Vec<Scalar>>,
    pub chern: Vec<Vec<Scalar>>,
    pub euler_char: Scalar,
    pub c1_cd1: Scalar,
    pub novikov: (String, u32),
    /// Classical cubic terms, exponents over the basis variables.
    pub classical: Vec<(Scalar, Vec<u32>)>,
    pub divisor: usize,
    pub point: usize,
    pub slope: u32,
    pub intercept: i32,
    pub max_degree: u32,
    /// The degree-one coefficient.
    pub seed: Scalar,
}

impl WdvvTemplate {
    /// The projective-plane template: `k_d = 3d - 1`, `q` of weight 3.
    pub fn projective_plane(max_degree: u32, seed: Scalar) -> Self {
        WdvvTemplate {
            name: "cp2".into(),
            dim: 2,
            basis: vec![
                BasisClass::new("t1", 0, 0),
                BasisClass::new("t2", 1, 1),
                BasisClass::new("t3", 2, 2),
            ],
            eta: anti_diagonal(3),
            chern: vec![
                vec![s(0), s(3), s(0)],
                vec![s(0), s(0), s(3)],
                vec![s(0), s(0), s(0)],
            ],
            euler_char: s(3),
            c1_cd1: s(9),
            novikov: ("q".into(), 3),
            classical: vec![(Scalar::new(1, 2), vec![2, 0, 1]), (Scalar::new(1, 2), vec![1, 2, 0])],
            divisor: 1,
            point: 2,
            slope: 3,
            intercept: -1,
            max_degree,
            seed,
        }
    }

    /// The projective-line template: `k_d = 2d - 2`, a single degree.
    pub fn projective_line() -> Self {
        WdvvTemplate {
            name: "cp1".into(),
            dim: 1,
            basis: vec![BasisClass::new("t", 0, 0), BasisClass::new("s", 1, 1)],
            eta: anti_diagonal(2),
            chern: vec![vec![s(0), s(2)], vec![s(0), s(0)]],
            euler_char: s(2),
            c1_cd1: s(2),
            novikov: ("q".into(), 2),
            classical: vec![(Scalar::new(1, 2), vec![2, 1])],
            divisor: 1,
            point: 0,
            slope: 2,
            intercept: -2,
            max_degree: 1,
            seed: Scalar::one(),
        }
    }

    fn k(&self, d: u32) -> u32 {
        (self.slope as i32 * d as i32 + self.intercept).max(0) as u32
    }

    /// Weighted degree of the lowest term carrying `N_d`.
    pub fn weight(&self, d: u32) -> u32 {
        self.novikov.1 * d + self.k(d)
    }

    fn draft(&self, order: u32) -> Draft {
        let n = self.basis.len();
        Draft {
            name: self.name.clone(),
            dim: self.dim,
            basis: self.basis.clone(),
            eta: self.eta.clone(),
            chern: self.chern.clone(),
            euler_char: self.euler_char.clone(),
            c1_cd1: self.c1_cd1.clone(),
            novikov: vec![self.novikov.clone()],
            base_point: vec![Scalar::zero(); n],
            order,
        }
    }

    /// The potential with coefficients `coeffs[d-1] = N_d`.
    pub fn potential(&self, coeffs: &[Scalar], order: u32) -> Result<Series, ModelError> {
        let d0 = self.draft(order);
        let table = d0.table()?;
        let n = self.basis.len();
        let width = n + 1;
        let mut terms: Vec<(Scalar, Vec<u32>)> = self
            .classical
            .iter()
            .map(|(c, e)| {
                let mut v = e.clone();
                v.push(0);
                (c.clone(), v)
            })
            .collect();
        for (i, nd) in coeffs.iter().enumerate() {
            let d = i as u32 + 1;
            if nd.is_zero() || self.weight(d) > order {
                continue;
            }
            let k = self.k(d);
            let base = nd / &factorial(k);
            for j in 0..=(order - self.weight(d)) {
                let c = &base * &(Scalar::int(d as i64).pow(j) / factorial(j));
                terms.push((c, exps(width, &[(self.divisor, j), (self.point, k), (n, d)])));
            }
        }
        Ok(poly(&table, order, &terms))
    }

    /// The validated model with the given coefficients.
    pub fn model(&self, coeffs: &[Scalar], order: u32, f1: Option<Series>) -> Result<ModelSpec, ModelError> {
        let f0 = self.potential(coeffs, order)?;
        self.draft(order).finish(f0, f1)
    }

    /// The projection to `q`-degree `d` of every WDVV residual.
    fn projected_residuals(&self, coeffs: &[Scalar], d: u32, order: u32) -> Result<Vec<(String, Series)>, LibraryError> {
        let fr = Frobenius::new(&self.model(coeffs, order, None)?)?;
        let q = self.basis.len();
        let f = |idx: &[usize]| fr.derivative(Genus::Zero, idx);
        Ok(wdvv_residuals(&fr, &f)?
            .into_iter()
            .map(|(at, r)| (at, r.exponent_part(q, d)))
            .collect())
    }
}

/// Solved coefficients of a [`WdvvTemplate`].
#[derive(Debug, Clone)]
pub struct WdvvSolution {
    /// `coefficients[d-1] = N_d`.
    pub coefficients: Vec<Scalar>,
    /// Order at which the assembled potential was re-checked.
    pub verified_order: u32,
}

fn witness_text(w: &Witness) -> String {
    format!("{} has coefficient {} on {}", w.at, w.coefficient, w.monomial)
}

/// Determines `N_2, .., N_max` degree by degree: the WDVV residual
/// projected to `q`-degree `d` is affine in `N_d`, so two evaluations fix
/// it. The assembled potential is then re-checked one order higher.
pub fn solve_wdvv_potential(t: &WdvvTemplate) -> Result<WdvvSolution, LibraryError> {
    let mut coeffs = vec![t.seed.clone()];
    for d in 2..=t.max_degree {
        let order = t.weight(d) + 3;
        let mut trial = coeffs.clone();
        trial.push(Scalar::zero());
        let r0 = t.projected_residuals(&trial, d, order)?;
        trial[d as usize - 1] = Scalar::one();
        let r1 = t.projected_residuals(&trial, d, order)?;
        let mut value: Option<Scalar> = None;
        for ((_, a), (_, b)) in r0.iter().zip(&r1) {
            let slope = b - a;
            if let Some((m, c)) = slope.lowest_term() {
                value = Some(-(a.coeff(&m) / c));
                break;
            }
        }
        let Some(v) = value else {
            if let Some((at, r)) = r0.iter().find(|(_, r)| !r.is_zero()) {
                let (m, c) = r.lowest_term().unwrap();
                return Err(LibraryError::Inconsistent {
                    degree: d,
                    witness: format!("{at} has coefficient {c} on {}", m.render(r.table())),
                });
            }
            return Err(LibraryError::Underdetermined { degree: d });
        };
        for ((at, a), (_, b)) in r0.iter().zip(&r1) {
            let mut r = a.clone();
            r.add_scaled(&(b - a), &v);
            if let Some((m, c)) = r.lowest_term() {
                return Err(LibraryError::Inconsistent {
                    degree: d,
                    witness: format!("{at} has coefficient {c} on {}", m.render(r.table())),
                });
            }
        }
        coeffs.push(v);
    }
    let verified_order = t.weight(t.max_degree) + 4;
    let fr = Frobenius::new(&t.model(&coeffs, verified_order, None)?)?;
    let report = crate::frobenius::check_wdvv(&fr)?;
    if let Some(w) = &report.witness {
        return Err(LibraryError::Inconsistent {
            degree: t.max_degree,
            witness: witness_text(w),
        });
    }
    Ok(WdvvSolution {
        coefficients: coeffs,
        verified_order,
    })
}

fn cp2(order: u32) -> Result<Builtin, LibraryError> {
    let probe = WdvvTemplate::projective_plane(1, Scalar::one());
    let mut max_degree = 1;
    while probe.weight(max_degree + 1) <= order {
        max_degree += 1;
    }
    let template = WdvvTemplate::projective_plane(max_degree, Scalar::one());
    let sol = solve_wdvv_potential(&template)?;
    let spec = template.model(&sol.coefficients, order, None)?;
    Ok(Builtin {
        spec,
        description: format!(
            "quantum cohomology of the projective plane; N_1..N_{max_degree} = {}",
            sol.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
        ),
        expected_failures: BTreeSet::new(),
    })
}

fn curve_even(g: u32, order: u32) -> Result<Builtin, LibraryError> {
    let c1 = 2 - 2 * g as i64;
    let d = Draft {
        name: format!("curve-even-g{g}"),
        dim: 1,
        basis: vec![BasisClass::new("t1", 0, 0), BasisClass::new("tN", 1, 1)],
        eta: anti_diagonal(2),
        chern: vec![vec![s(0), s(c1)], vec![s(0), s(0)]],
        // Only the even classes 1 and the point class are present.
        euler_char: s(2),
        c1_cd1: s(c1),
        novikov: vec![],
        base_point: vec![Scalar::zero(), Scalar::zero()],
        order,
    };
    let spec = d.build(
        &[(Scalar::new(1, 2), vec![2, 1])],
        Some(&[(Scalar::new(-1, 24), vec![0, 1])]),
    )?;
    let expected = if g == 0 {
        BTreeSet::new()
    } else {
        negative_control_failures()
    };
    Ok(Builtin {
        spec,
        description: format!("even classes of a genus-{g} curve; odd classes omitted"),
        expected_failures: expected,
    })
}

/// Checks that fail on models violating the Borisov identity. The
/// phi-linearity failure makes the annihilation of h_2 unsupported, and it
/// does fail at some genera.
fn negative_control_failures() -> BTreeSet<String> {
    [
        "borisov",
        "phi-virasoro (k=0,m=2)",
        "h-representation (k=0,m=2)",
        "genus1-verdict",
        "phi-linearity",
        "z-annihilates-h2",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

fn k3_basis(full: bool) -> Vec<BasisClass> {
    let mut b = vec![BasisClass::new("t1", 0, 0)];
    if full {
        b.push(BasisClass::new("ts", 2, 0));
    }
    for i in 1..=20 {
        b.push(BasisClass::new(format!("w{i}"), 1, 1));
    }
    if full {
        b.push(BasisClass::new("tsb", 0, 2));
    }
    b.push(BasisClass::new("tN", 2, 2));
    b
}

/// Signature `(1, 19)` form on `H^{1,1}`.
fn k3_sign(i: usize) -> i64 {
    if i == 0 {
        1
    } else {
        -1
    }
}

fn k3_full(order: u32) -> Result<Builtin, LibraryError> {
    let basis = k3_basis(true);
    let n = basis.len();
    let mut eta = zeros(n);
    eta[0][n - 1] = Scalar::one();
    eta[n - 1][0] = Scalar::one();
    eta[1][n - 2] = Scalar::one();
    eta[n - 2][1] = Scalar::one();
    for i in 0..20 {
        eta[2 + i][2 + i] = s(k3_sign(i));
    }
    let mut base = vec![Scalar::zero(); n];
    base[1] = Scalar::one();
    base[n - 2] = Scalar::one();
    let d = Draft {
        name: "k3-full".into(),
        dim: 2,
        basis,
        eta,
        chern: zeros(n),
        euler_char: s(24),
        c1_cd1: Scalar::zero(),
        novikov: vec![],
        base_point: base,
        order,
    };
    let mut f0 = vec![
        (Scalar::new(1, 2), exps(n, &[(0, 2), (n - 1, 1)])),
        (Scalar::one(), exps(n, &[(0, 1), (1, 1), (n - 2, 1)])),
    ];
    for i in 0..20 {
        f0.push((Scalar::new(k3_sign(i), 2), exps(n, &[(0, 1), (2 + i, 2)])));
    }
    let spec = d.build(&f0, Some(&[]))?;
    Ok(Builtin {
        spec,
        description: "K3 surface, full Hodge diamond".into(),
        expected_failures: BTreeSet::new(),
    })
}

fn k3_sublocus(order: u32) -> Result<Builtin, LibraryError> {
    let basis = k3_basis(false);
    let n = basis.len();
    let mut eta = zeros(n);
    eta[0][n - 1] = Scalar::one();
    eta[n - 1][0] = Scalar::one();
    for i in 0..20 {
        eta[1 + i][1 + i] = s(k3_sign(i));
    }
    let mut base = vec![Scalar::zero(); n];
    base[n - 1] = Scalar::one();
    let d = Draft {
        name: "k3-sublocus".into(),
        dim: 2,
        basis,
        eta,
        chern: zeros(n),
        euler_char: s(24),
        c1_cd1: Scalar::zero(),
        novikov: vec![],
        base_point: base,
        order,
    };
    let mut f0 = vec![(Scalar::new(1, 2), exps(n, &[(0, 2), (n - 1, 1)]))];
    for i in 0..20 {
        f0.push((Scalar::new(k3_sign(i), 2), exps(n, &[(0, 1), (1 + i, 2)])));
    }
    let spec = d.build(&f0, Some(&[]))?;
    Ok(Builtin {
        spec,
        description: "K3 surface restricted to identity, H^{1,1} and top class".into(),
        expected_failures: negative_control_failures(),
    })
}

fn projective_ring(n: usize, order: u32) -> Result<Builtin, LibraryError> {
    let basis: Vec<BasisClass> = (0..=n)
        .map(|k| BasisClass::new(format!("t{k}"), k as u32, k as u32))
        .collect();
    let size = n + 1;
    let mut base = vec![Scalar::zero(); size];
    base[0] = Scalar::one();
    base[2] = Scalar::one();
    let d = Draft {
        name: format!("M{n}"),
        dim: n as u32,
        basis,
        eta: anti_diagonal(size),
        chern: zeros(size),
        euler_char: s(size as i64),
        c1_cd1: Scalar::new((size * size * n) as i64, 2),
        novikov: vec![],
        base_point: base,
        order,
    };
    // (1/6) sum over ordered triples with i + j + k = n of t_i t_j t_k.
    let mut f0 = Vec::new();
    for i in 0..=n {
        for j in 0..=(n - i) {
            let k = n - i - j;
            f0.push((Scalar::new(1, 6), exps(size, &[(i, 1), (j, 1), (k, 1)])));
        }
    }
    let spec = d.build(&f0, None)?;
    Ok(Builtin {
        spec,
        description: format!("classical cohomology ring of CP^{n} with vanishing first Chern class"),
        expected_failures: BTreeSet::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for (name, _) in builtin_names() {
            let b = builtin(name, &BuiltinOptions::default()).unwrap();
            assert_eq!(b.spec.order, default_order(name).unwrap());
        }
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(
            builtin("cp9", &BuiltinOptions::default()),
            Err(LibraryError::Unknown(_))
        ));
    }

    #[test]
    fn cp2_low_degrees() {
        let sol = solve_wdvv_potential(&WdvvTemplate::projective_plane(3, Scalar::one())).unwrap();
        assert_eq!(sol.coefficients, vec![s(1), s(1), s(12)]);
    }

    #[test]
    fn doubled_seed_rescales_the_novikov_variable() {
        // q -> 2q maps a solution to another one, so N_1 = 2 forces
        // N_d = 2^d N_d instead of an inconsistency.
        let sol = solve_wdvv_potential(&WdvvTemplate::projective_plane(3, s(2))).unwrap();
        assert_eq!(sol.coefficients, vec![s(2), s(4), s(96)]);
    }

    #[test]
    fn cp1_template_has_no_unknowns() {
        let sol = solve_wdvv_potential(&WdvvTemplate::projective_line()).unwrap();
        assert_eq!(sol.coefficients, vec![s(1)]);
    }
}
