//! Exact truncated power series and the generating functions of the
//! operator counts.
//!
//! With `g(t) = Σ_{d≥1} g_d tᵈ / d!` counting the `d`-multilinear natural
//! operators built from a connection and vector fields, `g` is the unique
//! series without constant term solving `e^{g}(1 − t − g²) = 1`.  The same
//! numbers follow from a recursion that sorts rooted trees by the vertex
//! next to the root, and the pre-Lie-type composite operad whose
//! generating function is `g` has quadratic dual with generating function
//! `q(t) = eᵗ − 1 + t²`, so that `q(−g(t)) = −t`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::{Error, Result, Q};

/// A power series truncated after `t^N`, with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<Q>,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

impl RationalSeries {
    /// The zero series truncated after `t^n`.
    pub fn zero(n: usize) -> RationalSeries {
        RationalSeries { coeffs: vec![Q::zero(); n + 1] }
    }

    /// The constant `c`.
    pub fn constant(n: usize, c: Q) -> RationalSeries {
        let mut s = RationalSeries::zero(n);
        s.coeffs[0] = c;
        s
    }

    /// The series `t`.
    pub fn t(n: usize) -> RationalSeries {
        let mut s = RationalSeries::zero(n);
        if n >= 1 {
            s.coeffs[1] = Q::one();
        }
        s
    }

    /// The series with the given coefficients `c₀, c₁, …` (truncated or
    /// padded to `t^n`).
    pub fn from_coeffs(n: usize, coeffs: &[Q]) -> RationalSeries {
        let mut s = RationalSeries::zero(n);
        for (k, c) in coeffs.iter().enumerate().take(n + 1) {
            s.coeffs[k] = c.clone();
        }
        s
    }

    /// The exponential generating function `Σ_{d≥1} a_d tᵈ/d!`.
    pub fn from_egf(n: usize, a: &[BigInt]) -> RationalSeries {
        let mut s = RationalSeries::zero(n);
        for (k, v) in a.iter().enumerate() {
            let d = k + 1;
            if d > n {
                break;
            }
            s.coeffs[d] = Q::new(v.clone(), factorial(d));
        }
        s
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `tᵏ` (zero beyond the truncation).
    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &RationalSeries) -> RationalSeries {
        RationalSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &RationalSeries) -> RationalSeries {
        RationalSeries { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &Q) -> RationalSeries {
        RationalSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, o: &RationalSeries) -> RationalSeries {
        let n = self.order().min(o.order());
        let mut out = RationalSeries::zero(n);
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }

    /// The multiplicative inverse; the constant term must be non-zero.
    pub fn inverse(&self) -> Result<RationalSeries> {
        if self.coeffs[0].is_zero() {
            return Err(Error::Domain("series with zero constant term is not invertible".into()));
        }
        let n = self.order();
        let inv0 = self.coeffs[0].recip();
        let mut out = RationalSeries::zero(n);
        out.coeffs[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = Q::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &out.coeffs[k - j];
            }
            out.coeffs[k] = -acc * &inv0;
        }
        Ok(out)
    }

    /// `self / o`.
    pub fn div(&self, o: &RationalSeries) -> Result<RationalSeries> {
        Ok(self.mul(&o.inverse()?))
    }

    /// Formal derivative (the top coefficient becomes zero).
    pub fn derivative(&self) -> RationalSeries {
        let n = self.order();
        let mut out = RationalSeries::zero(n);
        for k in 1..=n {
            out.coeffs[k - 1] = &self.coeffs[k] * Q::from_integer(BigInt::from(k));
        }
        out
    }

    fn require_no_constant(&self, what: &str) -> Result<()> {
        if self.coeffs[0].is_zero() {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} needs a series without constant term")))
        }
    }

    /// `e^{self}` for a series without constant term, via `E′ = self′·E`.
    pub fn exp(&self) -> Result<RationalSeries> {
        self.require_no_constant("exp")?;
        let n = self.order();
        let d = self.derivative();
        let mut out = RationalSeries::zero(n);
        out.coeffs[0] = Q::one();
        for k in 1..=n {
            // k·e_k = Σ_{j=1..k} j·s_j·e_{k−j}
            let mut acc = Q::zero();
            for j in 1..=k {
                acc += &d.coeffs[j - 1] * &out.coeffs[k - j];
            }
            out.coeffs[k] = acc / Q::from_integer(BigInt::from(k));
        }
        Ok(out)
    }

    /// `log(1 + self)` for a series without constant term.
    pub fn log1p(&self) -> Result<RationalSeries> {
        self.require_no_constant("log1p")?;
        let n = self.order();
        let one_plus = self.add(&RationalSeries::constant(n, Q::one()));
        let ratio = self.derivative().div(&one_plus)?;
        let mut out = RationalSeries::zero(n);
        for k in 1..=n {
            out.coeffs[k] = &ratio.coeffs[k - 1] / Q::from_integer(BigInt::from(k));
        }
        Ok(out)
    }

    /// `self(inner(t))` for `inner` without constant term (Horner scheme).
    pub fn compose(&self, inner: &RationalSeries) -> Result<RationalSeries> {
        inner.require_no_constant("composition")?;
        let n = self.order().min(inner.order());
        let mut out = RationalSeries::zero(n);
        for k in (0..=n).rev() {
            out = out.mul(inner);
            out.coeffs[0] += &self.coeffs[k];
        }
        Ok(out)
    }

    /// The integers `d!·c_d` for `d = 1..=N`; fails if one is not integral.
    pub fn egf_integers(&self) -> Result<Vec<BigInt>> {
        (1..=self.order())
            .map(|d| {
                let v = &self.coeffs[d] * Q::from_integer(factorial(d));
                if v.is_integer() {
                    Ok(v.to_integer())
                } else {
                    Err(Error::Internal(format!("coefficient {d}! · c_{d} = {v} is not an integer")))
                }
            })
            .collect()
    }
}

/// `g₁…g_N` from the tree recursion
/// `g_{n+1}/(n+1)! = [tⁿ](e^{g} − 1) + [t^{n+1}] Σ_{s≥2} (s(s−1) − 1)/s! · gˢ`.
pub fn g_recursion(n: usize) -> Result<Vec<BigInt>> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let mut g = RationalSeries::zero(n);
    g.coeffs[1] = Q::one();
    for m in 1..n {
        // Only g₁…g_m enter the right-hand side; truncate after t^{m+1}.
        let known = RationalSeries::from_coeffs(m + 1, &g.coeffs[..=m]);
        let first = known.exp()?.coeff(m);
        let mut second = Q::zero();
        let mut power = known.clone();
        let mut s_factorial = BigInt::one();
        for s in 2..=m + 1 {
            power = power.mul(&known);
            s_factorial *= BigInt::from(s);
            let weight = Q::new(BigInt::from(s * (s - 1) - 1), s_factorial.clone());
            second += weight * power.coeff(m + 1);
        }
        g.coeffs[m + 1] = first + second;
    }
    g.egf_integers()
}

/// The residual `e^{g}(1 − t − g²) − 1` of the functional equation.
pub fn functional_residual(g: &RationalSeries) -> Result<RationalSeries> {
    let n = g.order();
    let one = RationalSeries::constant(n, Q::one());
    let inner = one.sub(&RationalSeries::t(n)).sub(&g.mul(g));
    Ok(g.exp()?.mul(&inner).sub(&one))
}

/// The series `g` solving `e^{g}(1 − t − g²) = 1`, by Newton iteration
/// `g ← g − F(g)/F′(g)` with `F′(g) = e^{g}(1 − t − g² − 2g)`.
pub fn g_series(n: usize) -> Result<RationalSeries> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let one = RationalSeries::constant(n, Q::one());
    let t = RationalSeries::t(n);
    let mut g = RationalSeries::zero(n);
    // Each step doubles the number of correct coefficients.
    for _ in 0..=usize::BITS {
        let e = g.exp()?;
        let f = functional_residual(&g)?;
        if f.is_zero() {
            return Ok(g);
        }
        let fp = e.mul(&one.sub(&t).sub(&g.mul(&g)).sub(&g.scale(&Q::from_integer(2.into()))));
        g = g.sub(&f.div(&fp)?);
    }
    Err(Error::Internal("Newton iteration did not converge".into()))
}

/// `g₁…g_N` from the functional equation; the residual is verified to
/// vanish modulo `t^{N+1}`.
pub fn g_functional(n: usize) -> Result<Vec<BigInt>> {
    let g = g_series(n)?;
    if !functional_residual(&g)?.is_zero() {
        return Err(Error::Internal("functional equation residual is non-zero".into()));
    }
    g.egf_integers()
}

/// The quadratic-dual series `q(t) = eᵗ − 1 + t²`.
pub fn dual_series(n: usize) -> Result<RationalSeries> {
    let t = RationalSeries::t(n);
    Ok(t.exp()?.sub(&RationalSeries::constant(n, Q::one())).add(&t.mul(&t)))
}

/// Whether `q(−g(t)) + t ≡ 0 mod t^{N+1}`.
pub fn dual_consistency(n: usize) -> Result<bool> {
    let g = g_series(n)?;
    let lhs = dual_series(n)?.compose(&g.scale(&-Q::one()))?;
    Ok(lhs.add(&RationalSeries::t(n)).is_zero())
}

/// `dim Lie(d)` for `d = 1..=N`, read off from `−log(1 − t)`.
pub fn lie_dimensions(n: usize) -> Result<Vec<BigInt>> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let minus_t = RationalSeries::t(n).scale(&-Q::one());
    minus_t.log1p()?.scale(&-Q::one()).egf_integers()
}
