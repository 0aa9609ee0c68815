//! Genus-one data determined by genus zero: the tensors `G_0` and `G_1`,
//! Getzler's relation `G_0 + G_1 = 0`, the functions `phi_k`, the
//! obstructions `h_k = <<E^k>>_1 - phi_k`, and a predictor that recovers
//! the genus-one potential from `<<E^k>>_1 = phi_k`.
//!
//! `G_0` and `G_1` are defined as sums over all 24 orderings of their
//! arguments. The reduced forms used here group the orderings by the
//! unordered pair or triple that each term depends on; the literal sums are
//! kept as `*_literal` functions and compared against the reduced ones in
//! the tests.

use std::cell::{OnceCell, RefCell};
use std::collections::BTreeMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frobenius::{euler_power_matrix, multisets, Frobenius, FrobeniusError, Genus, VectorField};
use crate::linalg::{generic_rank, solve_unit, LinalgError};
use crate::report::{CheckReport, Residuals};
use crate::scalar::Scalar;
use crate::series::{Series, SeriesError};
use crate::span::{euler_relation, SpanError};

/// The three ways to split four arguments into two pairs.
const SPLITS: [([usize; 2], [usize; 2]); 3] = [([0, 1], [2, 3]), ([0, 2], [1, 3]), ([0, 3], [1, 2])];

/// The six unordered pairs of four arguments, each with its complement.
const PAIRS: [([usize; 2], [usize; 2]); 6] = [
    ([0, 1], [2, 3]),
    ([0, 2], [1, 3]),
    ([0, 3], [1, 2]),
    ([1, 2], [0, 3]),
    ([1, 3], [0, 2]),
    ([2, 3], [0, 1]),
];

fn others(i: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for j in 0..4 {
        if j != i {
            out[k] = j;
            k += 1;
        }
    }
    out
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// Memoized genus-0 data shared by the genus-one computations on one model.
pub struct Genus1Context<'a> {
    fr: &'a Frobenius,
    delta: OnceCell<Vec<Series>>,
    mats: RefCell<Vec<Rc<Vec<Vec<Series>>>>>,
    phi: RefCell<BTreeMap<usize, Series>>,
}

impl<'a> Genus1Context<'a> {
    pub fn new(fr: &'a Frobenius) -> Self {
        Genus1Context {
            fr,
            delta: OnceCell::new(),
            mats: RefCell::new(Vec::new()),
            phi: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn frobenius(&self) -> &'a Frobenius {
        self.fr
    }

    fn zero(&self, order: u32) -> Series {
        Series::zero(self.fr.table(), order)
    }

    /// `Delta_a = sum_{bc} eta^{bc} <<gamma_a gamma_b gamma_c>>_0`.
    pub fn delta(&self) -> Result<&[Series], FrobeniusError> {
        if self.delta.get().is_none() {
            let d = self.fr.delta()?;
            let _ = self.delta.set(d);
        }
        Ok(self.delta.get().unwrap())
    }

    /// `M_j[a][b] = <<gamma^a E^j gamma_b>>_0`.
    pub fn power_matrix(&self, j: usize) -> Result<Rc<Vec<Vec<Series>>>, FrobeniusError> {
        loop {
            let len = self.mats.borrow().len();
            if j < len {
                return Ok(Rc::clone(&self.mats.borrow()[j]));
            }
            let m = Rc::new(euler_power_matrix(self.fr, len)?);
            self.mats.borrow_mut().push(m);
        }
    }

    /// `x -> sum_a x(Delta_a) gamma^a`.
    fn k_sharp(&self, x: &VectorField) -> Result<VectorField, FrobeniusError> {
        let d = self.delta()?;
        let lowered: Vec<Series> = d.iter().map(|s| x.apply(s)).collect::<Result<_, _>>()?;
        Ok(self.fr.raise(&lowered))
    }

    /// `[a][b] -> <<p q gamma_a gamma_b>>_0`.
    fn four_point_matrix(&self, p: &VectorField, q: &VectorField) -> Result<Vec<Vec<Series>>, FrobeniusError> {
        let n = self.fr.rank();
        let mut m: Vec<Vec<Option<Series>>> = vec![vec![None; n]; n];
        for a in 0..n {
            for b in a..n {
                let (ga, gb) = (self.fr.coordinate(a), self.fr.coordinate(b));
                let c = self.fr.correlator0(&[p, q, &ga, &gb])?;
                m[b][a] = Some(c.clone());
                m[a][b] = Some(c);
            }
        }
        Ok(m.into_iter().map(|r| r.into_iter().map(Option::unwrap).collect()).collect())
    }

    /// `tr(A eta^{-1} B eta^{-1})`.
    fn trace_pair(&self, a: &[Vec<Series>], b: &[Vec<Series>]) -> Series {
        let n = self.fr.rank();
        let einv = self.fr.eta_inv();
        let times_einv = |m: &[Vec<Series>]| -> Vec<Vec<Series>> {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = self.zero(m[i][0].valid_order());
                            for (k, row) in einv.iter().enumerate() {
                                if !row[j].is_zero() && !m[i][k].is_zero() {
                                    acc.add_scaled(&m[i][k], &row[j]);
                                }
                            }
                            acc.truncate(m[i].iter().map(Series::valid_order).min().unwrap())
                        })
                        .collect()
                })
                .collect()
        };
        let x = times_einv(a);
        let y = times_einv(b);
        let order = x.iter().chain(&y).flatten().map(Series::valid_order).min().unwrap();
        let mut acc = self.zero(order);
        for i in 0..n {
            for j in 0..n {
                if !x[i][j].is_zero() && !y[j][i].is_zero() {
                    acc.add_scaled(&(&x[i][j] * &y[j][i]), &Scalar::one());
                }
            }
        }
        acc
    }

    /// `G_0(v_1, .., v_4)`, grouped by the argument singled out in each term.
    pub fn g0(&self, v: [&VectorField; 4]) -> Result<Series, FrobeniusError> {
        let fr = self.fr;
        let h = fr.raise(self.delta()?);
        let mut acc = fr.correlator0(&[v[0], v[1], v[2], v[3], &h])?;
        for i in 0..4 {
            let o = others(i);
            let k = self.k_sharp(v[i])?;
            let c = fr.correlator0(&[v[o[0]], v[o[1]], v[o[2]], &k])?;
            acc = &acc + &c;
        }
        for (p, q) in SPLITS {
            let mp = self.four_point_matrix(v[p[0]], v[p[1]])?;
            let mq = self.four_point_matrix(v[q[0]], v[q[1]])?;
            acc.add_scaled(&self.trace_pair(&mp, &mq), &Scalar::int(-2));
        }
        Ok(acc)
    }

    /// `G_0` summed term by term over all 24 orderings.
    pub fn g0_literal(&self, v: [&VectorField; 4]) -> Result<Series, FrobeniusError> {
        let fr = self.fr;
        let trace_low: Vec<Vec<Series>> = (0..4)
            .map(|i| {
                (0..fr.rank())
                    .map(|a| fr.trace(Genus::Zero, &[&fr.coordinate(a), v[i]]))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        let delta = self.delta()?;
        let mut acc: Option<Series> = None;
        let mut add = |s: Series, c: Scalar| match &mut acc {
            None => acc = Some(s.scale(&c)),
            Some(a) => a.add_scaled(&s, &c),
        };
        for g in permutations4() {
            let w: Vec<&VectorField> = g.iter().map(|&i| v[i]).collect();
            let l3 = fr.lowered(Genus::Zero, &[w[0], w[1], w[2]])?;
            add(fr.pair(&l3, &trace_low[g[3]]), Scalar::new(1, 6));
            let l4 = fr.lowered(Genus::Zero, &[w[0], w[1], w[2], w[3]])?;
            add(fr.pair(&l4, delta), Scalar::new(1, 24));
            let mp = self.four_point_matrix(w[0], w[1])?;
            let mq = self.four_point_matrix(w[2], w[3])?;
            add(self.trace_pair(&mp, &mq), Scalar::new(-1, 4));
        }
        Ok(acc.unwrap())
    }

    /// `W = sum_a <<gamma_a>>_1 gamma^a`.
    fn genus1_gradient_field(&self) -> Result<VectorField, FrobeniusError> {
        Ok(self.fr.raise(&self.fr.lowered(Genus::One, &[])?))
    }

    /// `G_1(v_1, .., v_4)`, grouped by pairs and triples of arguments.
    pub fn g1(&self, v: [&VectorField; 4]) -> Result<Series, FrobeniusError> {
        let fr = self.fr;
        let w = self.genus1_gradient_field()?;
        let mut acc: Option<Series> = None;
        let mut add = |s: Series, c: i64| match &mut acc {
            None => acc = Some(s.scale(&Scalar::int(c))),
            Some(a) => a.add_scaled(&s, &Scalar::int(c)),
        };
        for (p, q) in SPLITS {
            let pp = fr.product(v[p[0]], v[p[1]])?;
            let qq = fr.product(v[q[0]], v[q[1]])?;
            add(fr.correlator1(&[&pp, &qq])?, 24);
        }
        for i in 0..4 {
            let o = others(i);
            let triple = fr.product(&fr.product(v[o[0]], v[o[1]])?, v[o[2]])?;
            add(fr.correlator1(&[&triple, v[i]])?, -24);
            let y = fr.contraction_field(&[v[o[0]], v[o[1]], v[o[2]]])?;
            add(fr.correlator1(&[&fr.product(&y, v[i])?])?, 12);
        }
        for (p, r) in PAIRS {
            let pp = fr.product(v[p[0]], v[p[1]])?;
            add(fr.correlator0(&[&pp, v[r[0]], v[r[1]], &w])?, -4);
        }
        Ok(acc.unwrap())
    }

    /// `G_1` summed term by term over all 24 orderings.
    pub fn g1_literal(&self, v: [&VectorField; 4]) -> Result<Series, FrobeniusError> {
        let fr = self.fr;
        let one_point = fr.lowered(Genus::One, &[])?;
        let mut acc: Option<Series> = None;
        let mut add = |s: Series, c: i64| match &mut acc {
            None => acc = Some(s.scale(&Scalar::int(c))),
            Some(a) => a.add_scaled(&s, &Scalar::int(c)),
        };
        for g in permutations4() {
            let w: Vec<&VectorField> = g.iter().map(|&i| v[i]).collect();
            let p12 = fr.product(w[0], w[1])?;
            let p34 = fr.product(w[2], w[3])?;
            add(fr.correlator1(&[&p12, &p34])?, 3);
            let p123 = fr.product(&p12, w[2])?;
            add(fr.correlator1(&[&p123, w[3]])?, -4);
            let l = fr.lowered(Genus::Zero, &[&p12, w[2], w[3]])?;
            add(fr.pair(&l, &one_point), -1);
            let l3 = fr.lowered(Genus::Zero, &[w[0], w[1], w[2]])?;
            let mut s: Option<Series> = None;
            for (a, la) in l3.iter().enumerate() {
                if la.is_zero() {
                    continue;
                }
                let ga = fr.raised(a);
                let c = fr.correlator1(&[&fr.product(&ga, w[3])?])?;
                let t = la * &c;
                match &mut s {
                    None => s = Some(t),
                    Some(x) => x.add_scaled(&t, &Scalar::one()),
                }
            }
            add(s.unwrap_or_else(|| l3[0].clone()), 2);
        }
        Ok(acc.unwrap())
    }

    /// `G_1` in derivative-and-bracket form.
    pub fn g1_bracket_form(&self, v: [&VectorField; 4]) -> Result<Series, FrobeniusError> {
        let fr = self.fr;
        let mut acc: Option<Series> = None;
        let mut add = |s: Series, c: i64| match &mut acc {
            None => acc = Some(s.scale(&Scalar::int(c))),
            Some(a) => a.add_scaled(&s, &Scalar::int(c)),
        };
        for (p, q) in PAIRS {
            let pp = fr.product(v[p[0]], v[p[1]])?;
            let qq = fr.product(v[q[0]], v[q[1]])?;
            add(pp.apply(&fr.correlator1(&[&qq])?)?, 12);
            for (a, b) in [(q[0], q[1]), (q[1], q[0])] {
                let br = pp.bracket(v[a])?;
                add(fr.correlator1(&[&fr.product(&br, v[b])?])?, -12);
            }
        }
        for i in 0..4 {
            let o = others(i);
            let triple = fr.product(&fr.product(v[o[0]], v[o[1]])?, v[o[2]])?;
            add(v[i].apply(&fr.correlator1(&[&triple])?)?, -24);
        }
        Ok(acc.unwrap())
    }

    /// `phi_k`: zero for `k = 0`, the constant `-(1/24) int c_1 c_{d-1}` for
    /// `k = 1`, the trace formula for `k = 2` and the closed form in
    /// `x_k`, `M_j` and `Delta` for `k >= 3`.
    pub fn phi(&self, k: usize) -> Result<Series, FrobeniusError> {
        if let Some(s) = self.phi.borrow().get(&k) {
            return Ok(s.clone());
        }
        let fr = self.fr;
        let order = fr.order();
        let value = match k {
            0 => self.zero(order),
            1 => Series::constant(
                fr.table(),
                -(&fr.model().c1_cd1 * &Scalar::new(1, 24)),
                order,
            ),
            2 => self.phi2_trace()?,
            _ => self.phi_closed(k)?,
        };
        self.phi.borrow_mut().insert(k, value.clone());
        Ok(value)
    }

    /// `phi_2 = -(1/24) sum <<E E gamma_a gamma^a>> + 1/2 sum (b_a(1-b_a) - (b_1+1)/6) <<gamma_a gamma^a>>`.
    pub fn phi2_trace(&self) -> Result<Series, FrobeniusError> {
        let fr = self.fr;
        let e = fr.euler();
        let b = fr.b().to_vec();
        let first = fr.trace(Genus::Zero, &[e, e])?.scale(&Scalar::new(-1, 24));
        let shift = (&b[0] + &Scalar::one()) * Scalar::new(1, 6);
        let second = fr.weighted_trace(Genus::Zero, &[], |a| {
            (&b[a] * &(Scalar::one() - &b[a]) - &shift) * Scalar::new(1, 2)
        })?;
        Ok(&first + &second)
    }

    /// The closed form for `phi_m`, valid for every `m >= 1`.
    pub fn phi_closed(&self, m: usize) -> Result<Series, FrobeniusError> {
        assert!(m >= 1, "the closed form starts at m = 1");
        let fr = self.fr;
        let n = fr.rank();
        let b = fr.b();
        let delta = self.delta()?.to_vec();
        let mut acc: Option<Series> = None;
        let mut add = |s: Series, c: &Scalar| match &mut acc {
            None => acc = Some(s.scale(c)),
            Some(a) => a.add_scaled(&s, c),
        };
        for k in 0..m {
            let ek = fr.euler_power(k)?;
            let mk = self.power_matrix(k)?;
            let mr = self.power_matrix(m - 1 - k)?;
            // -(1/24) sum b_a x_k^a M_{m-1-k}[c][a] Delta_c
            for a in 0..n {
                if b[a].is_zero() || ek.components[a].is_zero() {
                    continue;
                }
                let mut inner: Option<Series> = None;
                for c in 0..n {
                    if mr[c][a].is_zero() || delta[c].is_zero() {
                        continue;
                    }
                    let t = &mr[c][a] * &delta[c];
                    match &mut inner {
                        None => inner = Some(t),
                        Some(x) => x.add_scaled(&t, &Scalar::one()),
                    }
                }
                if let Some(inner) = inner {
                    add(&ek.components[a] * &inner, &(&b[a] * &Scalar::new(-1, 24)));
                }
            }
            // -(1/4) sum b_a b_c M_k[c][a] M_{m-1-k}[a][c]
            for a in 0..n {
                for c in 0..n {
                    let w = &b[a] * &b[c];
                    if w.is_zero() || mk[c][a].is_zero() || mr[a][c].is_zero() {
                        continue;
                    }
                    add(&mk[c][a] * &mr[a][c], &(w * Scalar::new(-1, 4)));
                }
            }
        }
        let top = self.power_matrix(m - 1)?;
        for a in 0..n {
            add(top[a][a].clone(), &Scalar::new(m as i64, 12));
        }
        Ok(acc.unwrap())
    }

    /// `phi_k = (k/2) E^{k-1} phi_2 + sum_{i=1}^{k-2} (1/48) G_0(E^{k-1-i}, E^i, E, E)`.
    pub fn phi_recursive(&self, k: usize) -> Result<Series, FrobeniusError> {
        assert!(k >= 2, "the recursive definition starts at k = 2");
        let fr = self.fr;
        let e = fr.euler_power(1)?;
        let mut acc = fr
            .euler_power(k - 1)?
            .apply(&self.phi2_trace()?)?
            .scale(&Scalar::new(k as i64, 2));
        if k == 2 {
            acc = self.phi2_trace()?;
        }
        for i in 1..=k.saturating_sub(2) {
            let a = fr.euler_power(k - 1 - i)?;
            let c = fr.euler_power(i)?;
            let g = self.g0([&a, &c, &e, &e])?;
            acc.add_scaled(&g, &Scalar::new(1, 48));
        }
        Ok(acc)
    }

    /// `h_k = <<E^k>>_1 - phi_k`.
    pub fn h(&self, k: usize) -> Result<Series, FrobeniusError> {
        let ek = self.fr.euler_power(k)?;
        Ok(&self.fr.correlator1(&[&ek])? - &self.phi(k)?)
    }
}

/// Sampled argument quadruples: every multiset of basis fields when the
/// basis has at most six classes, otherwise 50 quadruples drawn with a seed
/// derived from the model name; then `(E,E,E,E)` and `(E^2,E,E,E)`.
pub fn getzler_samples(fr: &Frobenius) -> Result<Vec<(String, [VectorField; 4])>, FrobeniusError> {
    let n = fr.rank();
    let idx: Vec<Vec<usize>> = if n <= 6 {
        multisets(n, 4)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(fr.model().name.as_bytes()));
        (0..50)
            .map(|_| {
                let mut q: Vec<usize> = (0..4).map(|_| rng.gen_range(0..n)).collect();
                q.sort_unstable();
                q
            })
            .collect()
    };
    let mut out: Vec<(String, [VectorField; 4])> = idx
        .into_iter()
        .map(|q| {
            let name = q.iter().map(|i| format!("gamma_{}", i + 1)).collect::<Vec<_>>().join(",");
            (name, [0, 1, 2, 3].map(|j| fr.coordinate(q[j])))
        })
        .collect();
    let e = fr.euler().clone();
    let e2 = (*fr.euler_power(2)?).clone();
    out.push(("E,E,E,E".into(), [e.clone(), e.clone(), e.clone(), e.clone()]));
    out.push(("E^2,E,E,E".into(), [e2, e.clone(), e.clone(), e]));
    Ok(out)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn as_refs(v: &[VectorField; 4]) -> [&VectorField; 4] {
    [&v[0], &v[1], &v[2], &v[3]]
}

/// Getzler's genus-one relation `G_0 + G_1 = 0` on the sampled quadruples.
pub fn check_getzler(cx: &Genus1Context) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    for (name, v) in getzler_samples(cx.frobenius())? {
        let r = &cx.g0(as_refs(&v))? + &cx.g1(as_refs(&v))?;
        res.push(|| format!("({name})"), &r);
    }
    Ok(res.finish("getzler", "Getzler genus-one relation G0 + G1 = 0"))
}

/// The definition of `G_1` against its derivative-and-bracket form.
pub fn check_g1_bracket_form(cx: &Genus1Context) -> Result<CheckReport, FrobeniusError> {
    let fr = cx.frobenius();
    let mut res = Residuals::new();
    let e = fr.euler().clone();
    let basis = fr.sample_basis();
    let last = fr.coordinate(*basis.last().unwrap());
    let mut cases: Vec<(String, [VectorField; 4])> = multisets(basis.len().min(3), 4)
        .into_iter()
        .map(|q| {
            let name = q.iter().map(|&i| format!("gamma_{}", basis[i] + 1)).collect::<Vec<_>>().join(",");
            (name, [0, 1, 2, 3].map(|j| fr.coordinate(basis[q[j]])))
        })
        .collect();
    cases.push(("E,E,gamma_N,gamma_N".into(), [e.clone(), e.clone(), last.clone(), last]));
    cases.push(("E,E,E,E".into(), [e.clone(), e.clone(), e.clone(), e]));
    for (name, v) in &cases {
        let r = &cx.g1(as_refs(v))? - &cx.g1_bracket_form(as_refs(v))?;
        res.push(|| format!("({name})"), &r);
    }
    Ok(res.finish("g1-bracket-form", "G1 as derivatives and brackets of quantum products"))
}

/// `(1/24) G_1(E^{m_1}, .., E^{m_4})` against its expansion in genus-one
/// one-point functions of Euler powers.
pub fn check_g1_euler(cx: &Genus1Context, quadruples: &[[usize; 4]]) -> Result<CheckReport, FrobeniusError> {
    let fr = cx.frobenius();
    let mut res = Residuals::new();
    let one = |k: usize| -> Result<Series, FrobeniusError> { fr.correlator1(&[&*fr.euler_power(k)?]) };
    for q in quadruples {
        let fields: Vec<VectorField> = q
            .iter()
            .map(|&k| fr.euler_power(k).map(|v| (*v).clone()))
            .collect::<Result<_, _>>()?;
        let lhs = cx
            .g1([&fields[0], &fields[1], &fields[2], &fields[3]])?
            .scale(&Scalar::new(1, 24));
        let m: usize = q.iter().sum();
        let mut rhs = cx.zero(lhs.valid_order());
        if m >= 1 {
            rhs.add_scaled(&one(m - 1)?, &Scalar::int((2 * q[0] + m) as i64));
        }
        for &mi in &q[1..] {
            let t = fr.euler_power(q[0] + mi)?.apply(&one(m - q[0] - mi)?)?;
            rhs.add_scaled(&t, &Scalar::one());
        }
        for &mi in q {
            let t = fr.euler_power(mi)?.apply(&one(m - mi)?)?;
            rhs.add_scaled(&t, &Scalar::int(-1));
        }
        res.push(|| format!("(m_1..m_4) = {q:?}"), &(&lhs - &rhs));
    }
    Ok(res.finish("g1-euler-powers", "G1 on Euler powers via one-point functions"))
}

/// `((m-1)/2) E^{m-2} <<E^2>>_1 - <<E^{m-1}>>_1 = -sum_{i=1}^{m-3} (1/48) G_0(E^{m-2-i}, E^i, E, E)`.
pub fn check_g0g1(cx: &Genus1Context, m: usize) -> Result<CheckReport, FrobeniusError> {
    assert!(m >= 2, "the relation starts at m = 2");
    let fr = cx.frobenius();
    let e2 = fr.euler_power(2)?;
    let first = fr
        .euler_power(m - 2)?
        .apply(&fr.correlator1(&[&e2])?)?
        .scale(&Scalar::new(m as i64 - 1, 2));
    let second = fr.correlator1(&[&*fr.euler_power(m - 1)?])?;
    let lhs = &first - &second;
    let mut rhs = cx.zero(lhs.valid_order());
    let e = fr.euler_power(1)?;
    for i in 1..=m.saturating_sub(3) {
        let a = fr.euler_power(m - 2 - i)?;
        let c = fr.euler_power(i)?;
        rhs.add_scaled(&cx.g0([&a, &c, &e, &e])?, &Scalar::new(-1, 48));
    }
    let mut res = Residuals::new();
    res.push(|| format!("m = {m}"), &(&lhs - &rhs));
    let note = if m == 2 {
        format!(
            "at the base point: (1/2) E^0 <<E^2>>_1 = {}, <<E>>_1 = {}",
            first.constant_term(),
            second.constant_term()
        )
    } else {
        String::new()
    };
    let r = res.finish(
        format!("genus1-from-genus0 (m={m})"),
        format!("genus-one Euler one-point functions from G0 (m={m})"),
    );
    Ok(if note.is_empty() { r } else { r.with_note(note) })
}

/// String and quasi-homogeneity restrictions on `<<E^m>>_1`, `m = 0..=max_m`.
pub fn check_e0e1f1(fr: &Frobenius, max_m: usize) -> Result<CheckReport, FrobeniusError> {
    let mut res = Residuals::new();
    let one = |k: usize| -> Result<Series, FrobeniusError> { fr.correlator1(&[&*fr.euler_power(k)?]) };
    res.push(|| "(i) <<E^0>>_1".into(), &one(0)?);
    let c = -(&fr.model().c1_cd1 * &Scalar::new(1, 24));
    let e1 = one(1)?;
    res.push(
        || "(ii) <<E>>_1".into(),
        &(&e1 - &Series::constant(fr.table(), c, e1.valid_order())),
    );
    let g1 = fr.euler_power(0)?;
    let e = fr.euler_power(1)?;
    for m in 0..=max_m {
        let em = one(m)?;
        let lhs = g1.apply(&em)?;
        let rhs = if m == 0 {
            Series::zero(fr.table(), lhs.valid_order())
        } else {
            one(m - 1)?.scale(&Scalar::int(m as i64))
        };
        res.push(|| format!("(iii) m = {m}"), &(&lhs - &rhs));
        let lhs = e.apply(&em)?;
        let rhs = em.scale(&Scalar::int(m as i64 - 1));
        res.push(|| format!("(iv) m = {m}"), &(&lhs - &rhs));
    }
    Ok(res.finish(
        "genus1-string-and-homogeneity",
        "genus-one string and quasi-homogeneity for Euler powers",
    ))
}

/// Closed form against the recursive definition of `phi_k`.
pub fn check_phi_equivalence(cx: &Genus1Context, k: usize) -> Result<CheckReport, FrobeniusError> {
    let closed = cx.phi_closed(k)?;
    let other = if k == 2 { cx.phi2_trace()? } else { cx.phi_recursive(k)? };
    let mut res = Residuals::new();
    res.push(|| format!("k = {k}"), &(&closed - &other));
    Ok(res.finish(
        format!("phi-closed-vs-recursive (k={k})"),
        format!("phi_k closed form against recursive definition (k={k})"),
    ))
}

/// `E^k phi_m - E^m phi_k = (m - k) phi_{k+m-1}`.
pub fn check_phi_virasoro(cx: &Genus1Context, k: usize, m: usize) -> Result<CheckReport, FrobeniusError> {
    let fr = cx.frobenius();
    let lhs = &fr.euler_power(k)?.apply(&cx.phi(m)?)? - &fr.euler_power(m)?.apply(&cx.phi(k)?)?;
    let rhs = if k + m >= 1 {
        cx.phi(k + m - 1)?.scale(&Scalar::int(m as i64 - k as i64))
    } else {
        cx.zero(lhs.valid_order())
    };
    let mut res = Residuals::new();
    res.push(|| format!("(k,m) = ({k},{m})"), &(&lhs - &rhs));
    Ok(res.finish(
        format!("phi-virasoro (k={k},m={m})"),
        format!("phi-Virasoro relation (k={k},m={m})"),
    ))
}

/// `E^k (h_m / m) = (m - 1) h_{m+k-1} / (m + k - 1)`.
pub fn check_h_representation(cx: &Genus1Context, k: usize, m: usize) -> Result<CheckReport, FrobeniusError> {
    assert!(m >= 1, "h_m / m needs m >= 1");
    let fr = cx.frobenius();
    let lhs = fr
        .euler_power(k)?
        .apply(&cx.h(m)?)?
        .scale(&Scalar::new(1, m as i64));
    let rhs = if m == 1 {
        cx.zero(lhs.valid_order())
    } else {
        cx.h(m + k - 1)?.scale(&Scalar::new(m as i64 - 1, (m + k - 1) as i64))
    };
    let mut res = Residuals::new();
    res.push(|| format!("(k,m) = ({k},{m})"), &(&lhs - &rhs));
    Ok(res.finish(
        format!("h-representation (k={k},m={m})"),
        format!("h_k representation of the Euler-power algebra (k={k},m={m})"),
    ))
}

/// `h_k = (k/2) E^{k-1} h_2` for `k = 3..=max_k`.
pub fn check_h_from_h2(cx: &Genus1Context, max_k: usize) -> Result<CheckReport, FrobeniusError> {
    let fr = cx.frobenius();
    let h2 = cx.h(2)?;
    let mut res = Residuals::new();
    for k in 3..=max_k {
        let rhs = fr.euler_power(k - 1)?.apply(&h2)?.scale(&Scalar::new(k as i64, 2));
        res.push(|| format!("k = {k}"), &(&cx.h(k)? - &rhs));
    }
    Ok(res.finish("h-from-h2", "h_k determined by h_2"))
}

/// The genus-one verdict: `h_2 = <<E^2>>_1 - phi_2` vanishes.
pub fn genus1_verdict(cx: &Genus1Context) -> Result<CheckReport, FrobeniusError> {
    let h2 = cx.h(2)?;
    let mut res = Residuals::new();
    res.push(|| "h_2".into(), &h2);
    Ok(res.finish("genus1-verdict", "genus-one Virasoro condition E^2 F1 = phi_2"))
}

/// Errors from the genus-one predictor.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PredictError {
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error("the Euler powers have full generic rank but are dependent at the base point; choose another base point")]
    SingularAtBase,
    #[error("predicted gradient is not integrable: {0}")]
    NotIntegrable(String),
}

impl From<LinalgError> for PredictError {
    fn from(e: LinalgError) -> Self {
        PredictError::Frobenius(e.into())
    }
}

impl From<SeriesError> for PredictError {
    fn from(e: SeriesError) -> Self {
        PredictError::Frobenius(e.into())
    }
}

/// Result of predicting the genus-one potential.
#[derive(Debug, Clone)]
pub enum Prediction {
    /// The Euler powers span every direction: the gradient is unique.
    Unique {
        /// `d F_1 / d t^a`, in coordinates centered at the base point.
        gradient: Vec<Series>,
        /// The potential in the model's original coordinates, without a
        /// constant term.
        f1: Series,
        integrability: CheckReport,
    },
    /// The Euler powers span only `rank` directions: only `<<E^k>>_1 = phi_k`
    /// for `k < rank` is determined.
    Underdetermined {
        rank: usize,
        constrained: Vec<Series>,
        consistency: CheckReport,
    },
}

/// Solves `sum_a x_k^a g_a = phi_k` for the gradient `g` of the genus-one
/// potential and integrates it.
pub fn predict_genus1(fr: &Frobenius) -> Result<Prediction, PredictError> {
    let n = fr.rank();
    let cx = Genus1Context::new(fr);
    let rows: Vec<Vec<Series>> = (0..n)
        .map(|k| fr.euler_power(k).map(|v| v.components.clone()))
        .collect::<Result<_, _>>()?;
    let info = generic_rank(&rows, 3, 0x5eed_0002);
    if info.rank < n {
        let span = euler_relation(fr, n)?;
        let constrained: Vec<Series> = (0..=span.n).map(|k| cx.phi(k)).collect::<Result<_, _>>()?;
        let consistency = crate::span::check_philinear(&cx, &span, 1)?;
        return Ok(Prediction::Underdetermined {
            rank: span.n + 1,
            constrained,
            consistency,
        });
    }
    let phis: Vec<Series> = (0..n).map(|k| cx.phi(k)).collect::<Result<_, _>>()?;
    let gradient = match solve_unit(&rows, &phis) {
        Ok(g) => g,
        Err(LinalgError::SingularAtBase { .. }) => return Err(PredictError::SingularAtBase),
        Err(e) => return Err(e.into()),
    };

    let mut integrability = Residuals::new();
    for a in 0..n {
        for c in (a + 1)..n {
            let r = &gradient[a].derivative(c)? - &gradient[c].derivative(a)?;
            integrability.push(|| format!("d_{} g_{} - d_{} g_{}", c + 1, a + 1, a + 1, c + 1), &r);
        }
    }
    if !integrability.is_clean() {
        let report = integrability.finish("genus1-integrability", "integrability of the predicted gradient");
        let w = report.witness.unwrap();
        return Err(PredictError::NotIntegrable(format!(
            "{} has coefficient {} on {}",
            w.at, w.coefficient, w.monomial
        )));
    }

    let order = gradient.iter().map(Series::valid_order).min().unwrap_or(0) + 1;
    let mut f = Series::zero(fr.table(), order);
    for (a, g) in gradient.iter().enumerate() {
        let mut r = g - &f.derivative(a)?;
        for earlier in 0..a {
            r = r.at_zero(earlier);
        }
        f = &f + &r.antiderivative(a);
    }
    for (a, g) in gradient.iter().enumerate() {
        let r = &f.derivative(a)? - g;
        integrability.push(|| format!("d_{} F1 - g_{}", a + 1, a + 1), &r);
    }
    let integrability = integrability.finish("genus1-integrability", "integrability of the predicted gradient");
    if !integrability.passed() {
        let w = integrability.witness.clone().unwrap();
        return Err(PredictError::NotIntegrable(format!(
            "{} has coefficient {} on {}",
            w.at, w.coefficient, w.monomial
        )));
    }
    let mut original = f;
    for (a, base) in fr.model().base_point.iter().enumerate() {
        original = original.shifted(a, &-base);
    }
    let c = original.constant_term();
    if !c.is_zero() {
        original = &original - &Series::constant(fr.table(), c, original.valid_order());
    }
    Ok(Prediction::Unique {
        gradient,
        f1: original,
        integrability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library::{builtin, BuiltinOptions};
    use proptest::prelude::*;

    fn spec(name: &str, order: Option<u32>) -> crate::model::ModelSpec {
        builtin(name, &BuiltinOptions { order, genus: None }).unwrap().spec
    }

    /// cp2 at a low order with its predicted genus-one potential installed.
    fn cp2_with_f1() -> crate::model::ModelSpec {
        let s = spec("cp2", Some(10));
        let fr = Frobenius::new(&s).unwrap();
        let Prediction::Unique { f1, .. } = predict_genus1(&fr).unwrap() else {
            panic!("cp2 prediction should be unique");
        };
        s.with_f1(Some(f1)).unwrap()
    }

    fn quad(fr: &Frobenius, idx: [usize; 4]) -> [VectorField; 4] {
        idx.map(|i| match i {
            i if i < fr.rank() => fr.coordinate(i),
            _ => fr.euler().clone(),
        })
    }

    #[test]
    fn reduced_forms_match_literal_sums() {
        for s in [spec("cp1", None), cp2_with_f1()] {
            let fr = Frobenius::new(&s).unwrap();
            let cx = Genus1Context::new(&fr);
            let n = fr.rank();
            for idx in [[1, 1, 1, 1], [0, 1, 1, n], [1, n, n, n], [n - 1, 1, n, 1]] {
                let v = quad(&fr, idx);
                let r = [&v[0], &v[1], &v[2], &v[3]];
                let g0 = cx.g0(r).unwrap();
                assert!((&g0 - &cx.g0_literal(r).unwrap()).is_zero(), "{} G0 {idx:?}", s.name);
                let g1 = cx.g1(r).unwrap();
                assert!((&g1 - &cx.g1_literal(r).unwrap()).is_zero(), "{} G1 {idx:?}", s.name);
                assert!((&g1 - &cx.g1_bracket_form(r).unwrap()).is_zero(), "{} bracket {idx:?}", s.name);
                assert!((&g0 + &g1).is_zero(), "{} Getzler {idx:?}", s.name);
            }
        }
    }

    #[test]
    fn curve_h2_is_g_over_six_times_t1() {
        for g in 0..=4 {
            let b = builtin("curve-even", &BuiltinOptions { order: None, genus: Some(g) }).unwrap();
            let fr = Frobenius::new(&b.spec).unwrap();
            let cx = Genus1Context::new(&fr);
            let h2 = b.spec.uncentered(&cx.h(2).unwrap());
            let want = Series::variable(fr.table(), 0, h2.valid_order()).scale(&Scalar::new(g as i64, 6));
            assert!((&h2 - &want).is_zero(), "g = {g}: {h2}");
            assert!(check_h_from_h2(&cx, 5).unwrap().passed());
        }
    }

    #[test]
    fn phi_low_values() {
        let s = spec("cp1", None);
        let fr = Frobenius::new(&s).unwrap();
        let cx = Genus1Context::new(&fr);
        assert!(cx.phi(0).unwrap().is_zero());
        assert_eq!(cx.phi(1).unwrap().as_constant(), Some(Scalar::new(-1, 12)));
        assert!((&cx.phi2_trace().unwrap() - &cx.phi_recursive(2).unwrap()).is_zero());
    }

    #[test]
    fn point_predicts_zero() {
        let fr = Frobenius::new(&spec("point", None)).unwrap();
        match predict_genus1(&fr).unwrap() {
            Prediction::Unique { f1, integrability, .. } => {
                assert!(f1.is_zero());
                assert!(integrability.passed());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn k3_prediction_is_underdetermined_but_consistent() {
        let fr = Frobenius::new(&spec("k3-full", None)).unwrap();
        match predict_genus1(&fr).unwrap() {
            Prediction::Underdetermined { rank, consistency, .. } => {
                assert_eq!(rank, 3);
                assert!(consistency.passed(), "{consistency:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn euler_power_quadruple_orderings_agree() {
        let s = cp2_with_f1();
        let fr = Frobenius::new(&s).unwrap();
        let cx = Genus1Context::new(&fr);
        let r = check_g1_euler(&cx, &[[2, 1, 1, 0], [1, 2, 1, 0], [0, 1, 2, 1], [1, 0, 1, 2], [3, 1, 0, 0]]).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn g0_and_g1_are_symmetric(a in 0usize..3, b in 0usize..3, c in 0usize..3, d in 0usize..3, perm in 0usize..24) {
            let s = spec("cp1", Some(8));
            let fr = Frobenius::new(&s).unwrap();
            let cx = Genus1Context::new(&fr);
            let v = quad(&fr, [a, b, c, d]);
            let p = permutations4()[perm];
            let r = [&v[0], &v[1], &v[2], &v[3]];
            let q = [&v[p[0]], &v[p[1]], &v[p[2]], &v[p[3]]];
            prop_assert!((&cx.g0(r).unwrap() - &cx.g0(q).unwrap()).is_zero());
            prop_assert!((&cx.g1(r).unwrap() - &cx.g1(q).unwrap()).is_zero());
        }

        #[test]
        fn phi_virasoro_is_antisymmetric(k in 0usize..5, m in 0usize..5) {
            let s = spec("cp1", None);
            let fr = Frobenius::new(&s).unwrap();
            let cx = Genus1Context::new(&fr);
            prop_assert!(check_phi_virasoro(&cx, k, m).unwrap().passed());
        }
    }
}
