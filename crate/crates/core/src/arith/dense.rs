//! Exact expansion of the polynomial tower with coefficients in GF(q).
//!
//! Every `P_t` has base-field coefficients: the matrix polynomial involves
//! only universe constants, and the operators substitute universe points.
//! When the expansion is small, an honest message is a substitution of the
//! challenges into `P_t` instead of `q² + 1` recursive evaluations, and one
//! tower serves every run on the same instance and modulus.

use crate::field::{ExtContext, ExtElement, FieldError, PrimeModulus};
use crate::fo::{Instance, Matrix, Structure, Var};

use super::chain::{check_domain, PartialAssignment};
use super::{ArithError, OpKind, OperatorSchedule, UnivariatePoly};

/// Default limit on the coefficient count of any polynomial in a tower.
pub const DEFAULT_TERM_CAP: usize = 1 << 16;

/// Limit on term pairs visited by a single product.
const WORK_CAP: usize = 1 << 26;

/// Dense polynomial over GF(q) in `x1..xk`. The coefficient of
/// `Π x_i^{e_i}` sits at `Σ e_i · stride_i`, slot 0 varying fastest, and
/// `dims[i]` is one more than the degree in `x_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasePoly {
    q: u64,
    dims: Vec<usize>,
    coeffs: Vec<u64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = Vec::with_capacity(dims.len());
    let mut acc = 1;
    for &d in dims {
        s.push(acc);
        acc *= d;
    }
    s
}

fn pow_mod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1 % q;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    r
}

impl BasePoly {
    fn zeroed(q: u64, dims: Vec<usize>) -> Self {
        let len = dims.iter().product();
        Self { q, dims, coeffs: vec![0; len] }
    }

    pub fn constant(q: u64, k: usize, c: u64) -> Self {
        Self { q, dims: vec![1; k], coeffs: vec![c % q] }
    }

    /// `Σ cs[i] · x_{slot+1}^i`.
    pub fn univariate(q: u64, k: usize, slot: usize, cs: &[u64]) -> Self {
        let mut dims = vec![1; k];
        dims[slot] = cs.len().max(1);
        let mut p = Self::zeroed(q, dims);
        for (i, &c) in cs.iter().enumerate() {
            p.coeffs[i * strides(&p.dims)[slot]] = c % q;
        }
        p.trimmed()
    }

    /// `Eq(x_i, x_j) = 1 − Σ_r x_i^r x_j^{q−1−r}`, using `C(q−1, r) ≡ (−1)^r`.
    pub fn eq_vars(q: u64, k: usize, i: Var, j: Var) -> Self {
        if i == j {
            return Self::constant(q, k, 1);
        }
        let mut dims = vec![1; k];
        dims[i.slot()] = q as usize;
        dims[j.slot()] = q as usize;
        let st = strides(&dims);
        let mut p = Self::zeroed(q, dims);
        p.coeffs[0] = 1;
        for r in 0..q as usize {
            let idx = r * st[i.slot()] + (q as usize - 1 - r) * st[j.slot()];
            p.coeffs[idx] = (p.coeffs[idx] + q - 1) % q;
        }
        p
    }

    /// `Eq(x_v, a) = 1 − Σ_r a^{q−1−r} x_v^r` for a constant `a`.
    pub fn eq_const(q: u64, k: usize, v: Var, a: u64) -> Self {
        let mut cs: Vec<u64> = (0..q).map(|r| (q - pow_mod(a, q - 1 - r, q)) % q).collect();
        cs[0] = (cs[0] + 1) % q;
        Self::univariate(q, k, v.slot(), &cs)
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Stored coefficient count.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn degree_in(&self, v: Var) -> usize {
        self.dims[v.slot()] - 1
    }

    /// Coefficient of `Π x_i^{exps[i]}`.
    pub fn coeff(&self, exps: &[usize]) -> u64 {
        if exps.iter().zip(&self.dims).any(|(e, d)| e >= d) {
            return 0;
        }
        let st = strides(&self.dims);
        self.coeffs[exps.iter().zip(&st).map(|(e, s)| e * s).sum::<usize>()]
    }

    fn for_each_term(&self, mut f: impl FnMut(&[usize], u64)) {
        let mut e = vec![0; self.dims.len()];
        for &c in &self.coeffs {
            if c != 0 {
                f(&e, c);
            }
            for (ei, &d) in e.iter_mut().zip(&self.dims) {
                *ei += 1;
                if *ei < d {
                    break;
                }
                *ei = 0;
            }
        }
    }

    /// Shrinks `dims` to the true per-variable degrees.
    fn trimmed(self) -> Self {
        let mut need = vec![1; self.dims.len()];
        self.for_each_term(|e, _| {
            for (n, &ei) in need.iter_mut().zip(e) {
                *n = (*n).max(ei + 1);
            }
        });
        if need == self.dims {
            return self;
        }
        let mut out = Self::zeroed(self.q, need);
        let st = strides(&out.dims);
        self.for_each_term(|e, c| out.coeffs[e.iter().zip(&st).map(|(a, b)| a * b).sum::<usize>()] = c);
        out
    }

    fn combine(&self, other: &Self, sign: u64) -> Self {
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| *a.max(b)).collect();
        let st = strides(&dims);
        let q = self.q;
        let mut out = Self::zeroed(q, dims);
        let at = |e: &[usize]| e.iter().zip(&st).map(|(a, b)| a * b).sum::<usize>();
        self.for_each_term(|e, c| out.coeffs[at(e)] = c);
        other.for_each_term(|e, c| {
            let i = at(e);
            out.coeffs[i] = (out.coeffs[i] + c * sign) % q;
        });
        out.trimmed()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, self.q - 1)
    }

    pub fn one_minus(&self) -> Self {
        Self::constant(self.q, self.k(), 1).sub(self)
    }

    /// Product, or `None` if it would exceed `cap` coefficients.
    pub fn mul(&self, other: &Self, cap: usize) -> Option<Self> {
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b - 1).collect();
        if dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).is_none_or(|n| n > cap) {
            return None;
        }
        let st = strides(&dims);
        let at = |e: &[usize]| e.iter().zip(&st).map(|(a, b)| a * b).sum::<usize>();
        let mut rhs = Vec::new();
        other.for_each_term(|e, c| rhs.push((at(e), c)));
        let mut lhs = Vec::new();
        self.for_each_term(|e, c| lhs.push((at(e), c)));
        if lhs.len().saturating_mul(rhs.len()) > WORK_CAP {
            return None;
        }
        let q = self.q;
        let mut out = Self::zeroed(q, dims);
        for &(i, a) in &lhs {
            for &(j, b) in &rhs {
                let cell = &mut out.coeffs[i + j];
                *cell = (*cell + a * b) % q;
            }
        }
        Some(out.trimmed())
    }

    /// Substitutes the constant `z` for `x_v`.
    pub fn substitute(&self, v: Var, z: u64) -> Self {
        let q = self.q;
        let mut dims = self.dims.clone();
        dims[v.slot()] = 1;
        let st = strides(&dims);
        let mut pw = vec![1 % q; self.dims[v.slot()]];
        for i in 1..pw.len() {
            pw[i] = pw[i - 1] * (z % q) % q;
        }
        let mut out = Self::zeroed(q, dims);
        self.for_each_term(|e, c| {
            let i: usize = e.iter().zip(&st).enumerate().filter(|(s, _)| *s != v.slot()).map(|(_, (a, b))| a * b).sum();
            out.coeffs[i] = (out.coeffs[i] + c * pw[e[v.slot()]]) % q;
        });
        out.trimmed()
    }

    fn powers(&self, ctx: &ExtContext, point: &[ExtElement], skip: Option<usize>) -> Vec<Vec<ExtElement>> {
        self.dims
            .iter()
            .enumerate()
            .map(|(s, &d)| {
                if Some(s) == skip || d == 1 {
                    return vec![ExtElement::ONE];
                }
                let mut pw = vec![ExtElement::ONE; d];
                for i in 1..d {
                    pw[i] = ctx.mul(pw[i - 1], point[s]);
                }
                pw
            })
            .collect()
    }

    /// Value at a point of GF(q^4)^k.
    pub fn evaluate(&self, ctx: &ExtContext, point: &[ExtElement]) -> ExtElement {
        let pw = self.powers(ctx, point, None);
        let mut acc = ExtElement::ZERO;
        self.for_each_term(|e, c| {
            let m = e.iter()
                .enumerate()
                .filter(|(_, ei)| **ei > 0)
                .fold(ctx.base(c), |m, (s, &ei)| ctx.mul(m, pw[s][ei]));
            acc = ctx.add(acc, m);
        });
        acc
    }

    /// Coefficients in `x_v` after substituting `point` for every other
    /// variable.
    pub fn restrict(&self, ctx: &ExtContext, v: Var, point: &[ExtElement]) -> Vec<ExtElement> {
        let pw = self.powers(ctx, point, Some(v.slot()));
        let mut out = vec![ExtElement::ZERO; self.dims[v.slot()]];
        self.for_each_term(|e, c| {
            let mut m: Option<ExtElement> = None;
            for (s, &ei) in e.iter().enumerate() {
                if s != v.slot() && ei > 0 {
                    m = Some(m.map_or(pw[s][ei], |m| ctx.mul(m, pw[s][ei])));
                }
            }
            let term = match m {
                Some(m) => ctx.scale(c, m),
                None => ctx.base(c),
            };
            let slot = &mut out[e[v.slot()]];
            *slot = ctx.add(*slot, term);
        });
        out
    }

    /// Expansion of the matrix polynomial, or `None` past `cap` coefficients.
    pub fn from_matrix(s: &Structure, m: &Matrix, q: u64, k: usize, cap: usize) -> Option<Self> {
        Some(match m {
            Matrix::Equal(a, b) => Self::eq_vars(q, k, *a, *b),
            Matrix::Rel(id, args) => {
                let mut sum = Self::constant(q, k, 0);
                'tuples: for t in s.tuples(*id) {
                    let mut term = Self::constant(q, k, 1);
                    for (i, v) in args.iter().enumerate() {
                        let f = args.iter().position(|w| w == v).unwrap();
                        if f != i {
                            if t[f] != t[i] {
                                continue 'tuples;
                            }
                            continue;
                        }
                        term = term.mul(&Self::eq_const(q, k, *v, t[i] as u64), cap)?;
                    }
                    sum = sum.add(&term);
                }
                sum
            }
            Matrix::Not(a) => Self::from_matrix(s, a, q, k, cap)?.one_minus(),
            Matrix::And(a, b) => {
                let a = Self::from_matrix(s, a, q, k, cap)?;
                a.mul(&Self::from_matrix(s, b, q, k, cap)?, cap)?
            }
            Matrix::Or(a, b) => {
                let a = Self::from_matrix(s, a, q, k, cap)?;
                let b = Self::from_matrix(s, b, q, k, cap)?;
                a.add(&b).sub(&a.mul(&b, cap)?)
            }
            Matrix::Const(c) => Self::constant(q, k, *c as u64),
        })
    }

    /// One operator of the schedule, with `z` over `0..n`.
    pub fn apply(&self, kind: OpKind, v: Var, n: usize, cap: usize) -> Option<Self> {
        let (q, k) = (self.q, self.k());
        let mut acc = match kind {
            OpKind::Reduce => Self::constant(q, k, 0),
            _ => Self::constant(q, k, 1),
        };
        for z in 0..n as u64 {
            let at = self.substitute(v, z);
            acc = match kind {
                OpKind::Exists => acc.mul(&at.one_minus(), cap)?,
                OpKind::Forall => acc.mul(&at, cap)?,
                OpKind::Reduce => acc.add(&Self::eq_const(q, k, v, z).mul(&at, cap)?),
            };
        }
        Some(match kind {
            OpKind::Exists => acc.one_minus(),
            _ => acc,
        })
    }
}

/// `P_0, …, P_T` expanded over GF(q) for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicTower {
    q: PrimeModulus,
    schedule: OperatorSchedule,
    polys: Vec<BasePoly>,
}

impl SymbolicTower {
    pub fn new(inst: &Instance, q: PrimeModulus, schedule: &OperatorSchedule) -> Option<Self> {
        Self::with_cap(inst, q, schedule, DEFAULT_TERM_CAP)
    }

    /// `None` when some `P_t` would need more than `cap` coefficients.
    pub fn with_cap(inst: &Instance, q: PrimeModulus, schedule: &OperatorSchedule, cap: usize) -> Option<Self> {
        let (qv, k, n) = (q.get(), inst.k(), inst.structure().universe_size());
        let top = BasePoly::from_matrix(inst.structure(), inst.formula().matrix(), qv, k, cap)?;
        let mut polys = vec![top];
        for op in schedule.ops().iter().rev() {
            let next = polys.last().unwrap().apply(op.kind, op.var, n, cap)?;
            polys.push(next);
        }
        polys.reverse();
        Some(Self { q, schedule: schedule.clone(), polys })
    }

    /// `P_t`, for `t` in `0..=T`.
    pub fn poly(&self, t: usize) -> &BasePoly {
        &self.polys[t]
    }

    pub fn schedule(&self) -> &OperatorSchedule {
        &self.schedule
    }

    /// Same contract as [`super::ChainEvaluator::restrict_univariate`].
    pub fn restrict_univariate(
        &self,
        ctx: &ExtContext,
        t: usize,
        asg: &PartialAssignment,
        var: Var,
    ) -> Result<UnivariatePoly, ArithError> {
        if ctx.modulus() != self.q {
            return Err(FieldError::ContextMismatch.into());
        }
        if t == 0 || t > self.schedule.len() {
            return Err(ArithError::PositionOutOfRange { t, len: self.schedule.len() });
        }
        if self.schedule.ops()[t - 1].var != var {
            return Err(ArithError::WrongVariable(var));
        }
        let base = asg.with(var, ExtElement::ZERO);
        check_domain(ctx, &self.schedule, t, &base)?;
        let p = &self.polys[t];
        let bound = ctx.q() * ctx.q();
        if p.degree_in(var) as u64 > bound {
            return Err(ArithError::DegreeBoundExceeded { bound });
        }
        Ok(UnivariatePoly::new(var, p.restrict(ctx, var, &base.dense())))
    }
}
