use std::collections::HashSet;
use std::fmt;

use crate::field::{ExtContext, ExtElement};
use crate::fo::Var;

use super::ArithError;

/// Univariate polynomial over GF(q^4) in one formula variable, lowest
/// degree first, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnivariatePoly {
    var: Var,
    coeffs: Vec<ExtElement>,
}

impl UnivariatePoly {
    pub fn new(var: Var, mut coeffs: Vec<ExtElement>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { var, coeffs }
    }

    pub fn constant(var: Var, c: ExtElement) -> Self {
        Self::new(var, vec![c])
    }

    pub fn var(&self) -> Var {
        self.var
    }

    pub fn coeffs(&self) -> &[ExtElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn evaluate(&self, ctx: &ExtContext, x: ExtElement) -> ExtElement {
        self.coeffs
            .iter()
            .rev()
            .fold(ExtElement::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }

    /// Adds `c` to the coefficient of `X^power`.
    pub fn add_monomial(&self, ctx: &ExtContext, power: usize, c: ExtElement) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= power {
            coeffs.resize(power + 1, ExtElement::ZERO);
        }
        coeffs[power] = ctx.add(coeffs[power], c);
        Self::new(self.var, coeffs)
    }

    /// Parses `var=<i>; deg=<d>; coeffs=<c0|…|cd>`. The listed degree must
    /// match the coefficient count and the leading coefficient must be
    /// nonzero (except for the zero polynomial, written with one zero).
    pub fn parse(ctx: &ExtContext, s: &str) -> Result<Self, ArithError> {
        let bad = || ArithError::Malformed(s.to_string());
        let mut parts = s.split(';').map(str::trim);
        let var = parts.next().and_then(|p| p.strip_prefix("var=")).ok_or_else(bad)?;
        let deg = parts.next().and_then(|p| p.strip_prefix("deg=")).ok_or_else(bad)?;
        let coeffs = parts.next().and_then(|p| p.strip_prefix("coeffs=")).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        if !digits(var) || !digits(deg) {
            return Err(bad());
        }
        let var: usize = var.parse().map_err(|_| bad())?;
        let deg: usize = deg.parse().map_err(|_| bad())?;
        if var == 0 {
            return Err(bad());
        }
        let coeffs = coeffs
            .split('|')
            .map(|c| ctx.parse(c).map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.len() != deg + 1 {
            return Err(bad());
        }
        if deg > 0 && coeffs[deg].is_zero() {
            return Err(bad());
        }
        Ok(Self::new(Var(var), coeffs))
    }
}

impl fmt::Display for UnivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "var={}; deg={}; coeffs=", self.var.0, self.degree())?;
        if self.coeffs.is_empty() {
            return write!(f, "{}", ExtElement::ZERO);
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Lagrange basis for a fixed set of distinct abscissae. Once built,
/// interpolation is a single linear combination.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    xs: Vec<ExtElement>,
    /// `basis[i]` is 1 at `xs[i]` and 0 at every other abscissa.
    basis: Vec<Vec<ExtElement>>,
}

impl LagrangeBasis {
    pub fn new(ctx: &ExtContext, xs: Vec<ExtElement>) -> Result<Self, ArithError> {
        let mut seen = HashSet::with_capacity(xs.len());
        for x in &xs {
            if !seen.insert(*x) {
                return Err(ArithError::DuplicateAbscissa(*x));
            }
        }
        let n = xs.len();
        // master = Π (X - x_i), degree n
        let mut master = vec![ExtElement::ONE];
        for &x in &xs {
            let mut next = vec![ExtElement::ZERO; master.len() + 1];
            for (i, &c) in master.iter().enumerate() {
                next[i + 1] = ctx.add(next[i + 1], c);
                next[i] = ctx.sub(next[i], ctx.mul(c, x));
            }
            master = next;
        }
        let mut basis = Vec::with_capacity(n);
        for &x in &xs {
            // synthetic division of master by (X - x)
            let mut quot = vec![ExtElement::ZERO; n];
            let mut carry = ExtElement::ZERO;
            for d in (1..=n).rev() {
                carry = ctx.add(master[d], ctx.mul(carry, x));
                quot[d - 1] = carry;
            }
            let denom = quot
                .iter()
                .rev()
                .fold(ExtElement::ZERO, |acc, &c| ctx.add(ctx.mul(acc, x), c));
            let scale = ctx.inv(denom).expect("distinct abscissae give a nonzero denominator");
            basis.push(quot.into_iter().map(|c| ctx.mul(c, scale)).collect());
        }
        Ok(Self { xs, basis })
    }

    pub fn abscissae(&self) -> &[ExtElement] {
        &self.xs
    }

    pub fn combine(&self, ctx: &ExtContext, var: Var, ys: &[ExtElement]) -> UnivariatePoly {
        assert_eq!(ys.len(), self.xs.len());
        let mut coeffs = vec![ExtElement::ZERO; self.xs.len()];
        for (y, b) in ys.iter().zip(&self.basis) {
            if y.is_zero() {
                continue;
            }
            for (c, &bc) in coeffs.iter_mut().zip(b) {
                *c = ctx.add(*c, ctx.mul(*y, bc));
            }
        }
        UnivariatePoly::new(var, coeffs)
    }
}

/// The unique polynomial of degree `< points.len()` through `points`.
pub fn interpolate(
    ctx: &ExtContext,
    var: Var,
    points: &[(ExtElement, ExtElement)],
) -> Result<UnivariatePoly, ArithError> {
    let xs = points.iter().map(|p| p.0).collect();
    let ys: Vec<_> = points.iter().map(|p| p.1).collect();
    Ok(LagrangeBasis::new(ctx, xs)?.combine(ctx, var, &ys))
}
