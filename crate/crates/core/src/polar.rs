//! Polar degrees of Segre–Veronese varieties in exact integer arithmetic.
//!
//! `delta[r - 1]` is the coefficient of `s^r t^{n-r}` in the class of the
//! conormal variety of the model in `P^{n-1}`. The nonzero entries start at
//! `r = codim = n - 1 - dim` with the degree of the model.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::model::ModelSpec;
use crate::statespace::Factor;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolarDegrees {
    pub factors: Vec<Factor>,
    /// Ambient dimension `n` of the probability simplex's linear span.
    pub n: usize,
    /// `(delta_0, ..., delta_{n-2})`.
    #[serde(serialize_with = "bigints_as_strings")]
    pub delta: Vec<BigInt>,
    /// `(r1, r2)`: `delta_{r-1}` is nonzero exactly for `r1 <= r <= r2`.
    pub nonzero_range: (usize, usize),
}

fn bigints_as_strings<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

impl PolarDegrees {
    /// `codim(M) = n - 1 - dim(M)`.
    pub fn codim(&self) -> usize {
        self.nonzero_range.0
    }

    /// `dim(M*)`, read off the support.
    pub fn dual_dim(&self) -> usize {
        self.nonzero_range.1
    }

    /// `delta_{r-1}` for `r` in the nonzero range, first entry the degree of `M`.
    pub fn shifted(&self) -> Vec<BigInt> {
        let (r1, r2) = self.nonzero_range;
        self.delta[r1 - 1..r2].to_vec()
    }

    pub fn degree(&self) -> &BigInt {
        &self.delta[self.nonzero_range.0 - 1]
    }

    pub fn dual_degree(&self) -> &BigInt {
        &self.delta[self.nonzero_range.1 - 1]
    }

    /// `delta_index`, or zero out of range.
    pub fn get(&self, index: usize) -> BigInt {
        self.delta.get(index).cloned().unwrap_or_default()
    }

    /// The degree bound for a solution whose type face has dimension
    /// `type_dim`: `delta_{type_dim}`.
    pub fn degree_bound(&self, type_dim: usize) -> BigInt {
        self.get(type_dim)
    }
}

fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

/// `C(a, b)`, zero unless `0 <= b <= a`.
fn binom(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut out = BigInt::one();
    for i in 0..b {
        out = out * (a - i) / (i + 1);
    }
    out
}

fn to_integer(q: BigRational) -> BigInt {
    assert!(q.is_integer(), "polar degree evaluated to a non-integer {q}");
    q.to_integer()
}

/// Assembles the full vector from `delta_{r-1}` over `r` in `codim..=n-1`.
fn assemble(factors: Vec<Factor>, n: usize, codim: usize, f: impl Fn(i64) -> BigInt) -> PolarDegrees {
    let mut delta = vec![BigInt::zero(); n - 1];
    for r in codim.max(1)..n {
        let v = f(r as i64);
        assert!(!v.is_negative(), "negative polar degree at r = {r}");
        delta[r - 1] = v;
    }
    let first = delta.iter().position(|d| !d.is_zero()).expect("degree is positive") + 1;
    let last = delta.iter().rposition(|d| !d.is_zero()).expect("degree is positive") + 1;
    PolarDegrees {
        factors,
        n,
        delta,
        nonzero_range: (first, last),
    }
}

/// Compositions `i_1 + ... + i_k = s` with `0 <= i_l <= caps[l]`.
fn compositions(s: usize, caps: &[usize], visit: &mut dyn FnMut(&[usize])) {
    fn rec(pos: usize, rem: usize, caps: &[usize], cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if pos == caps.len() {
            if rem == 0 {
                visit(cur);
            }
            return;
        }
        for i in 0..=rem.min(caps[pos]) {
            cur[pos] = i;
            rec(pos + 1, rem - i, caps, cur, visit);
        }
    }
    let mut cur = vec![0; caps.len()];
    rec(0, s, caps, &mut cur, visit);
}

/// Polar degrees of a Segre–Veronese model from the general alternating sum.
pub fn polar_degrees(model: &ModelSpec) -> PolarDegrees {
    let factors = model.factors().to_vec();
    let n = model.ambient_n();
    let dim = model.param_dim() as i64;
    let codim = n - 1 - model.param_dim();
    // Inner sums depend only on s.
    let caps: Vec<usize> = factors.iter().map(|f| f.m - 1).collect();
    let inner: Vec<BigRational> = (0..=dim as usize)
        .map(|s| {
            let mut acc = BigRational::zero();
            compositions(s, &caps, &mut |is| {
                let mut term = BigRational::one();
                for (f, &i) in factors.iter().zip(is) {
                    let e = (f.m - 1 - i) as u32;
                    term *= BigRational::new(
                        binom(f.m as i64, i as i64) * num_traits::pow(BigInt::from(f.d), e as usize),
                        factorial(e as u64),
                    );
                }
                acc += term;
            });
            acc
        })
        .collect();
    assemble(factors, n, codim, |r| {
        let top = dim - n as i64 + 1 + r;
        let mut sum = BigRational::zero();
        for s in 0..=top {
            let coef = binom(dim - s + 1, n as i64 - r) * factorial((dim - s) as u64);
            let term = BigRational::from_integer(coef) * &inner[s as usize];
            if s.is_odd() {
                sum -= term;
            } else {
                sum += term;
            }
        }
        to_integer(sum)
    })
}

/// Polar degrees of the `k`-bit model `(2, ..., 2)` from its specialized sum.
pub fn polar_degrees_kbit(k: usize) -> PolarDegrees {
    assert!(k >= 2, "k must be at least 2");
    let n = 1usize << k;
    let ki = k as i64;
    assemble(vec![Factor::new(2, 1); k], n, n - 1 - k, |r| {
        let mut sum = BigInt::zero();
        for s in 0..=(ki - n as i64 + 1 + r) {
            let term = binom(ki + 1 - s, n as i64 - r)
                * factorial((ki - s) as u64)
                * (BigInt::one() << s as usize)
                * binom(ki, s);
            if s.is_odd() {
                sum -= term;
            } else {
                sum += term;
            }
        }
        sum
    })
}

/// Polar degrees of `m1 x m2` rank-one matrices from the two-factor sum.
pub fn polar_degrees_matrix(m1: usize, m2: usize) -> PolarDegrees {
    assert!(m1 >= 2 && m2 >= 2, "matrix sides must be at least 2");
    let n = m1 * m2;
    let dim = (m1 + m2 - 2) as i64;
    let side = |m: usize, i: i64| -> BigRational {
        let e = m as i64 - 1 - i;
        if e < 0 {
            return BigRational::zero();
        }
        BigRational::new(binom(m as i64, i), factorial(e as u64))
    };
    assemble(
        vec![Factor::new(m1, 1), Factor::new(m2, 1)],
        n,
        n - 1 - (m1 + m2 - 2),
        |r| {
            let mut sum = BigRational::zero();
            for s in 0..=(dim - n as i64 + 1 + r) {
                let inner: BigRational = (0..=s).map(|i| side(m1, i) * side(m2, s - i)).sum();
                let term = BigRational::from_integer(
                    binom(dim - s + 1, n as i64 - r) * factorial((dim - s) as u64),
                ) * inner;
                if s.is_odd() {
                    sum -= term;
                } else {
                    sum += term;
                }
            }
            to_integer(sum)
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| i64::try_from(x).unwrap()).collect()
    }

    #[test]
    fn two_bit_and_three_bit() {
        let p = polar_degrees(&ModelSpec::segre(&[2, 2]).unwrap());
        assert_eq!(ints(&p.delta), vec![2, 2, 2]);
        assert_eq!(p.codim(), 1);
        let p = polar_degrees(&ModelSpec::segre(&[2, 2, 2]).unwrap());
        assert_eq!(ints(&p.delta), vec![0, 0, 0, 6, 12, 12, 4]);
        assert_eq!(p.nonzero_range, (4, 7));
    }

    #[test]
    fn symmetric_factors() {
        let sextic = ModelSpec::from_factors(vec![Factor::new(2, 6)]).unwrap();
        assert_eq!(ints(&polar_degrees(&sextic).delta), vec![0, 0, 0, 0, 6, 10]);
        let m = ModelSpec::from_factors(vec![Factor::new(2, 2), Factor::new(2, 1)]).unwrap();
        assert_eq!(ints(&polar_degrees(&m).delta), vec![0, 0, 4, 6, 4]);
        let hw = ModelSpec::hardy_weinberg();
        assert_eq!(ints(&polar_degrees(&hw).delta), vec![2, 2]);
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(3, 4), BigInt::zero());
        assert_eq!(binom(3, -1), BigInt::zero());
        assert_eq!(binom(-1, 0), BigInt::zero());
    }

    #[test]
    fn specializations_agree() {
        for k in 2..=5 {
            let general = polar_degrees(&ModelSpec::segre(&vec![2; k]).unwrap());
            assert_eq!(polar_degrees_kbit(k).delta, general.delta, "k = {k}");
        }
        for (a, b) in [(2, 3), (3, 3), (3, 4), (4, 4)] {
            let general = polar_degrees(&ModelSpec::segre(&[a, b]).unwrap());
            assert_eq!(polar_degrees_matrix(a, b).delta, general.delta);
        }
    }
}
