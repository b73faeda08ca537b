//! Segre–Veronese independence models.
//!
//! A factor `(m)_d` is parametrized by `p in Δ_{m-1}` and sends the state with
//! exponent vector `a` to `multinomial(d; a) * p^a`. The model is the product
//! over factors, in the state order of [`crate::statespace`]. Parameters are
//! stored as free coordinates: the first `m - 1` entries of each `p`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::statespace::{state_tuple, Distribution, Factor, ProductShape};

/// Slack allowed when checking that a float parameter lies in its simplex.
pub const PARAM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct FactorData {
    m: usize,
    exps: Vec<Vec<usize>>,
    coef: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    shape: ProductShape,
    data: Vec<FactorData>,
    offsets: Vec<usize>,
    param_dim: usize,
    /// Per state: local state index in each factor.
    locals: Vec<Vec<usize>>,
    coef: Vec<f64>,
    coef_exact: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    factors: Vec<Factor>,
}

fn multinomial(a: &[usize]) -> u64 {
    let mut total = 0u64;
    let mut out = 1u64;
    for &k in a {
        for i in 1..=k as u64 {
            total += 1;
            out = out * total / i;
        }
    }
    out
}

impl ModelSpec {
    pub fn new(shape: ProductShape) -> Self {
        let data: Vec<FactorData> = shape
            .factors()
            .iter()
            .map(|f| {
                let exps = f.exponents();
                let coef = exps.iter().map(|a| multinomial(a)).collect();
                FactorData { m: f.m, exps, coef }
            })
            .collect();
        let mut offsets = Vec::with_capacity(data.len());
        let mut param_dim = 0;
        for fd in &data {
            offsets.push(param_dim);
            param_dim += fd.m - 1;
        }
        let sizes = shape.sizes();
        let locals: Vec<Vec<usize>> = (0..shape.n()).map(|s| state_tuple(&sizes, s)).collect();
        let coef_int: Vec<u64> = locals
            .iter()
            .map(|t| t.iter().zip(&data).map(|(&i, fd)| fd.coef[i]).product())
            .collect();
        ModelSpec {
            coef: coef_int.iter().map(|&c| c as f64).collect(),
            coef_exact: coef_int.iter().map(|&c| BigInt::from(c)).collect(),
            shape,
            data,
            offsets,
            param_dim,
            locals,
        }
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        Ok(Self::new(ProductShape::new(factors)?))
    }

    /// Pure Segre model `[m_1] x ... x [m_k]`.
    pub fn segre(sizes: &[usize]) -> Result<Self> {
        Ok(Self::new(ProductShape::segre(sizes)?))
    }

    /// The Hardy–Weinberg curve `(2)_2`.
    pub fn hardy_weinberg() -> Self {
        Self::from_factors(vec![Factor::new(2, 2)]).expect("valid factor")
    }

    pub fn shape(&self) -> &ProductShape {
        &self.shape
    }

    pub fn factors(&self) -> &[Factor] {
        self.shape.factors()
    }

    pub fn ambient_n(&self) -> usize {
        self.shape.n()
    }

    /// `sum_i (m_i - 1)`, the dimension of the model.
    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    /// Whether every factor has `d = 1`.
    pub fn is_segre(&self) -> bool {
        self.factors().iter().all(|f| f.d == 1)
    }

    /// Range of free coordinates belonging to factor `l`.
    pub fn factor_params(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l] + self.data[l].m - 1
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let file: ModelFile = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("model spec: {e}")))?;
        Self::from_factors(file.factors)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(ModelFile {
            factors: self.factors().to_vec(),
        })
        .expect("serializable")
    }

    /// Writes `phi(theta)` into `out` without validating `theta`.
    pub fn eval(&self, theta: &[f64], out: &mut [f64]) {
        let vals = self.factor_values(theta);
        for (s, o) in out.iter_mut().enumerate() {
            let mut v = self.coef[s];
            for (l, &i) in self.locals[s].iter().enumerate() {
                v *= vals[l][i];
            }
            *o = v;
        }
    }

    fn full_probs(&self, theta: &[f64], l: usize) -> Vec<f64> {
        let free = &theta[self.factor_params(l)];
        let mut p = free.to_vec();
        p.push(1.0 - free.iter().sum::<f64>());
        p
    }

    fn factor_values(&self, theta: &[f64]) -> Vec<Vec<f64>> {
        (0..self.data.len())
            .map(|l| {
                let p = self.full_probs(theta, l);
                self.data[l].exps.iter().map(|a| monomial(&p, a, &[])).collect()
            })
            .collect()
    }

    /// Values, Jacobian (row-major `n x param_dim`) and, if requested, the
    /// Hessians `d^2 phi_s / d theta_i d theta_j` (row-major `n x pd x pd`).
    pub fn jet(&self, theta: &[f64], with_hessian: bool) -> Jet {
        let pd = self.param_dim;
        let k = self.data.len();
        // Per factor and local state: value, free gradient, free Hessian.
        let mut fv = Vec::with_capacity(k);
        let mut fg = Vec::with_capacity(k);
        let mut fh = Vec::with_capacity(k);
        for l in 0..k {
            let p = self.full_probs(theta, l);
            let m = self.data[l].m;
            let last = m - 1;
            let mut vals = Vec::new();
            let mut grads = Vec::new();
            let mut hess = Vec::new();
            for a in &self.data[l].exps {
                vals.push(monomial(&p, a, &[]));
                let dp: Vec<f64> = (0..m).map(|q| partial(&p, a, &[q])).collect();
                grads.push((0..last).map(|i| dp[i] - dp[last]).collect::<Vec<f64>>());
                if with_hessian {
                    let h = |i: usize, j: usize| partial(&p, a, &[i, j]);
                    let mut hf = vec![0.0; last * last];
                    for i in 0..last {
                        for j in 0..last {
                            hf[i * last + j] = h(i, j) - h(i, last) - h(last, j) + h(last, last);
                        }
                    }
                    hess.push(hf);
                }
            }
            fv.push(vals);
            fg.push(grads);
            fh.push(hess);
        }

        let n = self.ambient_n();
        let mut value = vec![0.0; n];
        let mut jac = vec![0.0; n * pd];
        let mut hess = if with_hessian { vec![0.0; n * pd * pd] } else { Vec::new() };
        for s in 0..n {
            let loc = &self.locals[s];
            let c = self.coef[s];
            let prod_except = |skip: &[usize]| -> f64 {
                (0..k)
                    .filter(|l| !skip.contains(l))
                    .map(|l| fv[l][loc[l]])
                    .product::<f64>()
            };
            value[s] = c * prod_except(&[]);
            for l in 0..k {
                let rest = c * prod_except(&[l]);
                let g = &fg[l][loc[l]];
                for (i, gi) in g.iter().enumerate() {
                    jac[s * pd + self.offsets[l] + i] = gi * rest;
                }
                if !with_hessian {
                    continue;
                }
                let w = self.data[l].m - 1;
                let hf = &fh[l][loc[l]];
                for i in 0..w {
                    for j in 0..w {
                        let (a, b) = (self.offsets[l] + i, self.offsets[l] + j);
                        hess[(s * pd + a) * pd + b] = hf[i * w + j] * rest;
                    }
                }
                for l2 in 0..k {
                    if l2 == l {
                        continue;
                    }
                    let rest2 = c * prod_except(&[l, l2]);
                    let g2 = &fg[l2][loc[l2]];
                    for (i, gi) in g.iter().enumerate() {
                        for (j, gj) in g2.iter().enumerate() {
                            let (a, b) = (self.offsets[l] + i, self.offsets[l2] + j);
                            hess[(s * pd + a) * pd + b] = gi * gj * rest2;
                        }
                    }
                }
            }
        }
        Jet {
            n,
            pd,
            value,
            jac,
            hess,
        }
    }
}

/// `prod_k p_k^{a_k}` with the exponents of `minus` each lowered by one.
fn monomial(p: &[f64], a: &[usize], minus: &[usize]) -> f64 {
    let mut e: Vec<i64> = a.iter().map(|&x| x as i64).collect();
    for &q in minus {
        e[q] -= 1;
    }
    if e.iter().any(|&x| x < 0) {
        return 0.0;
    }
    p.iter().zip(&e).map(|(x, &k)| x.powi(k as i32)).product()
}

/// Partial derivative of `p^a` with respect to the listed coordinates.
fn partial(p: &[f64], a: &[usize], wrt: &[usize]) -> f64 {
    let mut e: Vec<i64> = a.iter().map(|&x| x as i64).collect();
    let mut c = 1.0;
    for &q in wrt {
        c *= e[q] as f64;
        e[q] -= 1;
    }
    if c == 0.0 {
        return 0.0;
    }
    monomial(p, a, wrt) * c
}

/// First and second derivatives of the parametrization at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub n: usize,
    pub pd: usize,
    pub value: Vec<f64>,
    pub jac: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn jac_entry(&self, s: usize, i: usize) -> f64 {
        self.jac[s * self.pd + i]
    }

    /// `sum_s w_s * Hess(phi_s)`, row-major `pd x pd`.
    pub fn weighted_hessian(&self, w: &[f64]) -> Vec<f64> {
        let pd = self.pd;
        let mut out = vec![0.0; pd * pd];
        for (s, ws) in w.iter().enumerate() {
            let block = &self.hess[s * pd * pd..(s + 1) * pd * pd];
            for (o, h) in out.iter_mut().zip(block) {
                *o += ws * h;
            }
        }
        out
    }
}

/// Free parameter coordinates of a model point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub free: Vec<f64>,
}

impl ParamPoint {
    pub fn new(free: Vec<f64>) -> Self {
        ParamPoint { free }
    }

    /// Full probability vector of each factor.
    pub fn factor_probs(&self, model: &ModelSpec) -> Vec<Vec<f64>> {
        (0..model.factors().len())
            .map(|l| model.full_probs(&self.free, l))
            .collect()
    }
}

fn check_params(model: &ModelSpec, theta: &[f64]) -> Result<()> {
    if theta.len() != model.param_dim() {
        return Err(Error::Shape(format!(
            "model has {} parameters, got {}",
            model.param_dim(),
            theta.len()
        )));
    }
    for l in 0..model.factors().len() {
        let free = &theta[model.factor_params(l)];
        let sum: f64 = free.iter().sum();
        if free.iter().any(|&t| !(-PARAM_TOL..=1.0 + PARAM_TOL).contains(&t)) || sum > 1.0 + PARAM_TOL
        {
            return Err(Error::Domain(format!(
                "parameters {free:?} of factor {} are outside the simplex",
                l + 1
            )));
        }
    }
    Ok(())
}

/// `phi(theta)` in floating point.
pub fn phi(model: &ModelSpec, theta: &ParamPoint) -> Result<Distribution> {
    check_params(model, &theta.free)?;
    let clamped: Vec<f64> = theta.free.iter().map(|t| t.clamp(0.0, 1.0)).collect();
    let mut out = vec![0.0; model.ambient_n()];
    model.eval(&clamped, &mut out);
    for v in &mut out {
        *v = v.max(0.0);
    }
    Ok(Distribution::Float(out))
}

/// `phi(theta)` in exact arithmetic.
pub fn phi_exact(model: &ModelSpec, theta: &[Rat]) -> Result<Distribution> {
    if theta.len() != model.param_dim() {
        return Err(Error::Shape(format!(
            "model has {} parameters, got {}",
            model.param_dim(),
            theta.len()
        )));
    }
    let mut vals = Vec::new();
    for (l, fd) in model.data.iter().enumerate() {
        let free = &theta[model.factor_params(l)];
        let mut p = free.to_vec();
        p.push(Rat::one() - free.iter().sum::<Rat>());
        if p.iter().any(Signed::is_negative) {
            return Err(Error::Domain(format!(
                "parameters of factor {} are outside the simplex",
                l + 1
            )));
        }
        let v: Vec<Rat> = fd
            .exps
            .iter()
            .map(|a| {
                p.iter()
                    .zip(a)
                    .map(|(x, &k)| num_traits::pow(x.clone(), k))
                    .product()
            })
            .collect();
        vals.push(v);
    }
    let out = (0..model.ambient_n())
        .map(|s| {
            model.locals[s]
                .iter()
                .enumerate()
                .fold(Rat::from_integer(model.coef_exact[s].clone()), |acc, (l, &i)| {
                    acc * &vals[l][i]
                })
        })
        .collect();
    Distribution::from_rationals(out)
}

/// Row-major `ambient_n x param_dim` matrix of partial derivatives of `phi`.
pub fn jacobian(model: &ModelSpec, theta: &ParamPoint) -> Vec<Vec<f64>> {
    let jet = model.jet(&theta.free, false);
    (0..jet.n)
        .map(|s| (0..jet.pd).map(|i| jet.jac_entry(s, i)).collect())
        .collect()
}

/// Marginal of `mu` on each factor's local states.
fn marginals<T: Clone + Zero>(model: &ModelSpec, mu: &[T]) -> Vec<Vec<T>>
where
    for<'a> T: std::ops::AddAssign<&'a T>,
{
    let sizes = model.shape().sizes();
    let mut out: Vec<Vec<T>> = sizes.iter().map(|&m| vec![T::zero(); m]).collect();
    for (s, v) in mu.iter().enumerate() {
        for (l, &i) in model.locals[s].iter().enumerate() {
            out[l][i] += v;
        }
    }
    out
}

/// Maximum likelihood estimate for a pure Segre model: the product of the
/// marginals of `mu`. Exact when `mu` is.
pub fn mle_segre(model: &ModelSpec, mu: &Distribution) -> Result<Distribution> {
    if !model.is_segre() {
        return Err(Error::UnsupportedModel(
            "closed-form MLE needs every factor to have d = 1".into(),
        ));
    }
    if mu.len() != model.ambient_n() {
        return Err(Error::Shape(format!(
            "distribution has {} entries, model has {} states",
            mu.len(),
            model.ambient_n()
        )));
    }
    match mu {
        Distribution::Exact(v) => {
            let marg = marginals(model, v);
            let out = model
                .locals
                .iter()
                .map(|t| {
                    t.iter()
                        .enumerate()
                        .fold(Rat::one(), |acc, (l, &i)| acc * &marg[l][i])
                })
                .collect();
            Distribution::from_rationals(out)
        }
        Distribution::Float(v) => {
            let marg = marginals(model, v);
            let out: Vec<f64> = model
                .locals
                .iter()
                .map(|t| t.iter().enumerate().map(|(l, &i)| marg[l][i]).product())
                .collect();
            Ok(Distribution::Float(out))
        }
    }
}

/// Free parameters of the MLE of a pure Segre model.
pub fn mle_segre_params(model: &ModelSpec, mu: &Distribution) -> Result<ParamPoint> {
    if !model.is_segre() {
        return Err(Error::UnsupportedModel(
            "closed-form MLE needs every factor to have d = 1".into(),
        ));
    }
    let marg = marginals(model, &mu.to_f64());
    Ok(ParamPoint::new(
        marg.iter()
            .flat_map(|m| m[..m.len() - 1].to_vec())
            .collect(),
    ))
}

/// Allele-frequency estimate `p = mu_1 + mu_2 / 2` for the Hardy–Weinberg curve.
pub fn hardy_weinberg_mle(mu: &[f64]) -> Result<f64> {
    if mu.len() != 3 {
        return Err(Error::Shape(format!("expected 3 entries, got {}", mu.len())));
    }
    Ok(mu[0] + mu[1] / 2.0)
}

/// Largest absolute 2x2 minor over every flattening `factor l` vs. the rest.
/// Zero exactly on the Segre variety of the given per-factor sizes.
pub fn max_flattening_minor(sizes: &[usize], nu: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for_each_minor(sizes, |a, b, c, d| {
        worst = worst.max((nu[a] * nu[b] - nu[c] * nu[d]).abs());
    });
    worst
}

/// Exact rank-one test on every flattening.
pub fn is_rank_one_exact(sizes: &[usize], nu: &[Rat]) -> bool {
    let mut ok = true;
    for_each_minor(sizes, |a, b, c, d| {
        if &nu[a] * &nu[b] != &nu[c] * &nu[d] {
            ok = false;
        }
    });
    ok
}

/// Calls `f(a, b, c, d)` for every 2x2 minor `nu[a] nu[b] - nu[c] nu[d]` of
/// every flattening.
fn for_each_minor(sizes: &[usize], mut f: impl FnMut(usize, usize, usize, usize)) {
    let n: usize = sizes.iter().product();
    for l in 0..sizes.len() {
        let rest: Vec<usize> = (0..n).filter(|&s| state_tuple(sizes, s)[l] == 0).collect();
        let stride: usize = sizes[l + 1..].iter().product();
        for i in 0..sizes[l] {
            for j in i + 1..sizes[l] {
                for (x, &r) in rest.iter().enumerate() {
                    for &s in &rest[x + 1..] {
                        f(r + i * stride, s + j * stride, s + i * stride, r + j * stride);
                    }
                }
            }
        }
    }
}

/// Seeded uniform samples from the simplex `Δ_{n-1}` by normalized
/// exponentials. Sample `i` is drawn from its own ChaCha stream, so results
/// do not depend on `count` or on evaluation order.
pub fn sample_simplex(n: usize, count: usize, seed: u64) -> Vec<Distribution> {
    (0..count).map(|i| sample_one(n, seed, i as u64)).collect()
}

/// The `index`-th sample of [`sample_simplex`].
pub fn sample_one(n: usize, seed: u64, index: u64) -> Distribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = draws.iter().sum();
    Distribution::Float(draws.iter().map(|x| x / total).collect())
}
