//! Arithmetic in GF(q) and in the degree-4 extension GF(q^4).
//!
//! Extension elements are stored as four residues `c0 + c1·θ + c2·θ² + c3·θ³`
//! where θ is a root of a monic irreducible quartic over GF(q). The modulus
//! is capped below 2^16 so that every intermediate product, and the field
//! order q^4 itself, fits in a `u64`.

mod gfpoly;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Extension degree. Fixed: the soundness analysis is calibrated to GF(q^4).
pub const EXT_DEGREE: usize = 4;

/// Largest admissible modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 16;

/// Failed irreducibility draws before switching to the exhaustive scan.
pub const RANDOM_IRREDUCIBLE_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported range (< {MAX_MODULUS})")]
    ModulusTooLarge(u64),
    #[error("polynomial must be monic of degree 4")]
    NotMonicQuartic,
    #[error("coefficient {value} out of range for modulus {q}")]
    CoefficientOutOfRange { value: u64, q: u64 },
    #[error("element does not belong to this field context")]
    ContextMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("universe element {value} cannot be embedded in GF({q})")]
    EmbedOutOfRange { value: u64, q: u64 },
    #[error("malformed field element `{0}`")]
    Malformed(String),
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Least prime `p >= m`.
pub fn smallest_prime_geq(m: u64) -> u64 {
    let mut p = m.max(2);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// A prime modulus `q < 2^16`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q >= MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(q));
        }
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        Ok(Self(q))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    /// Order of the extension field, q^4.
    pub fn ext_order(self) -> u64 {
        self.0
            .checked_pow(EXT_DEGREE as u32)
            .expect("q^4 fits in u64 for q < 2^16")
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Monic quartic over GF(q), coefficients lowest degree first.
///
/// Construction only checks shape and range; irreducibility is established
/// by [`is_irreducible`] or by obtaining the polynomial from
/// [`find_irreducible`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IrreduciblePoly {
    coeffs: [u64; EXT_DEGREE + 1],
}

impl IrreduciblePoly {
    pub fn new(q: PrimeModulus, coeffs: [u64; EXT_DEGREE + 1]) -> Result<Self, FieldError> {
        if coeffs[EXT_DEGREE] != 1 {
            return Err(FieldError::NotMonicQuartic);
        }
        for &c in &coeffs {
            if c >= q.get() {
                return Err(FieldError::CoefficientOutOfRange { value: c, q: q.get() });
            }
        }
        Ok(Self { coeffs })
    }

    /// From the four low coefficients `a0..a3`; the leading 1 is implied.
    fn from_low(low: [u64; EXT_DEGREE]) -> Self {
        Self {
            coeffs: [low[0], low[1], low[2], low[3], 1],
        }
    }

    pub fn coeffs(&self) -> &[u64; EXT_DEGREE + 1] {
        &self.coeffs
    }

    /// Textual form `a0,a1,a2,a3,1`.
    pub fn parse(q: PrimeModulus, s: &str) -> Result<Self, FieldError> {
        let parts = parse_residues(s)?;
        let coeffs: [u64; EXT_DEGREE + 1] = parts
            .try_into()
            .map_err(|_| FieldError::Malformed(s.to_string()))?;
        Self::new(q, coeffs)
    }
}

impl fmt::Display for IrreduciblePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.coeffs)
    }
}

fn parse_residues(s: &str) -> Result<Vec<u64>, FieldError> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) {
                return Err(FieldError::Malformed(s.to_string()));
            }
            p.parse::<u64>().map_err(|_| FieldError::Malformed(s.to_string()))
        })
        .collect()
}

fn write_joined(f: &mut fmt::Formatter<'_>, xs: &[u64]) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

/// Product of two residues modulo a monic quartic whose low coefficients,
/// negated, are `neg_low`.
#[inline]
fn mul_reduced(a: &[u64; EXT_DEGREE], b: &[u64; EXT_DEGREE], neg_low: &[u64; EXT_DEGREE], q: u64) -> [u64; EXT_DEGREE] {
    // Products are < 2^32 and at most four are summed per slot.
    let mut prod = [0u64; 2 * EXT_DEGREE - 1];
    for i in 0..EXT_DEGREE {
        if a[i] == 0 {
            continue;
        }
        for j in 0..EXT_DEGREE {
            prod[i + j] += a[i] * b[j];
        }
    }
    for d in (EXT_DEGREE..2 * EXT_DEGREE - 1).rev() {
        let top = prod[d] % q;
        if top == 0 {
            continue;
        }
        for i in 0..EXT_DEGREE {
            prod[d - EXT_DEGREE + i] += top * neg_low[i];
        }
    }
    [prod[0] % q, prod[1] % q, prod[2] % q, prod[3] % q]
}

fn pow_reduced(base: [u64; EXT_DEGREE], mut e: u64, neg_low: &[u64; EXT_DEGREE], q: u64) -> [u64; EXT_DEGREE] {
    let mut acc = [1, 0, 0, 0];
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_reduced(&acc, &b, neg_low, q);
        }
        e >>= 1;
        if e > 0 {
            b = mul_reduced(&b, &b, neg_low, q);
        }
    }
    acc
}

/// Rabin's test for a monic quartic: `f` is irreducible iff
/// `X^{q^4} ≡ X (mod f)` and `gcd(X^{q^2} − X, f) = 1`.
pub fn is_irreducible(q: PrimeModulus, f: &[u64]) -> Result<bool, FieldError> {
    if f.len() != EXT_DEGREE + 1 || f[EXT_DEGREE] != 1 {
        return Err(FieldError::NotMonicQuartic);
    }
    let p = q.get();
    if let Some(&c) = f.iter().find(|&&c| c >= p) {
        return Err(FieldError::CoefficientOutOfRange { value: c, q: p });
    }
    let neg_low = [(p - f[0]) % p, (p - f[1]) % p, (p - f[2]) % p, (p - f[3]) % p];
    let x = [0, 1 % p, 0, 0];
    let x_q2 = pow_reduced(x, p * p, &neg_low, p);
    if pow_reduced(x_q2, p * p, &neg_low, p) != x {
        return Ok(false);
    }
    let diff = gfpoly::sub(&x_q2, &x, p);
    let g = gfpoly::gcd(diff, f.to_vec(), p);
    Ok(g.len() == 1)
}

/// Random monic quartic candidates checked with [`is_irreducible`]; after
/// [`RANDOM_IRREDUCIBLE_ATTEMPTS`] failures, scans all candidates in
/// lexicographic order, so the search always succeeds.
pub fn find_irreducible<R: Rng + ?Sized>(q: PrimeModulus, rng: &mut R) -> IrreduciblePoly {
    let p = q.get();
    for _ in 0..RANDOM_IRREDUCIBLE_ATTEMPTS {
        let low = [
            rng.gen_range(0..p),
            rng.gen_range(0..p),
            rng.gen_range(0..p),
            rng.gen_range(0..p),
        ];
        let cand = IrreduciblePoly::from_low(low);
        if is_irreducible(q, cand.coeffs()).expect("candidate is monic quartic") {
            return cand;
        }
    }
    for idx in 0..q.ext_order() {
        let cand = IrreduciblePoly::from_low(ExtElement::from_index(idx, p).coords);
        if is_irreducible(q, cand.coeffs()).expect("candidate is monic quartic") {
            return cand;
        }
    }
    unreachable!("irreducible quartics exist over every prime field")
}

/// An element of GF(q^4), coordinates lowest degree first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExtElement {
    coords: [u64; EXT_DEGREE],
}

impl ExtElement {
    pub const ZERO: Self = Self { coords: [0; EXT_DEGREE] };
    pub const ONE: Self = Self { coords: [1, 0, 0, 0] };

    pub fn coords(&self) -> &[u64; EXT_DEGREE] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords == [0; EXT_DEGREE]
    }

    /// The `idx`-th element of the fixed enumeration of GF(q^4): base-q
    /// digits of `idx`, least significant digit in `c0`. The first `q`
    /// elements are the base field `0, 1, …, q−1`.
    pub fn from_index(mut idx: u64, q: u64) -> Self {
        let mut coords = [0; EXT_DEGREE];
        for c in coords.iter_mut() {
            *c = idx % q;
            idx /= q;
        }
        Self { coords }
    }

    /// The element in the base-field subfield, if it lies there.
    pub fn as_base(&self) -> Option<u64> {
        (self.coords[1..] == [0, 0, 0]).then_some(self.coords[0])
    }
}

impl fmt::Display for ExtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_joined(f, &self.coords)
    }
}

impl FromStr for ExtElement {
    type Err = FieldError;

    /// Parses `c0,c1,c2,c3` without range checking; see [`ExtContext::parse`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts = parse_residues(s)?;
        let coords: [u64; EXT_DEGREE] = parts
            .try_into()
            .map_err(|_| FieldError::Malformed(s.to_string()))?;
        Ok(Self { coords })
    }
}

/// GF(q^4) realised as GF(q)[X]/(irr). Immutable and freely shareable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtContext {
    modulus: PrimeModulus,
    irr: IrreduciblePoly,
    /// `q - irr[i]`, the reduction of θ^4.
    neg_low: [u64; EXT_DEGREE],
}

impl ExtContext {
    /// Checks that `irr` is irreducible before accepting it.
    pub fn new(modulus: PrimeModulus, irr: IrreduciblePoly) -> Result<Self, FieldError> {
        let q = modulus.get();
        if irr.coeffs().iter().any(|&c| c >= q) {
            return Err(FieldError::ContextMismatch);
        }
        if !is_irreducible(modulus, irr.coeffs())? {
            return Err(FieldError::NotMonicQuartic);
        }
        let c = irr.coeffs();
        let neg_low = [(q - c[0]) % q, (q - c[1]) % q, (q - c[2]) % q, (q - c[3]) % q];
        Ok(Self { modulus, irr, neg_low })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.get()
    }

    pub fn irr(&self) -> &IrreduciblePoly {
        &self.irr
    }

    pub fn order(&self) -> u64 {
        self.modulus.ext_order()
    }

    pub fn contains(&self, a: &ExtElement) -> bool {
        a.coords.iter().all(|&c| c < self.q())
    }

    pub fn element(&self, coords: [u64; EXT_DEGREE]) -> Result<ExtElement, FieldError> {
        let a = ExtElement { coords };
        if self.contains(&a) {
            Ok(a)
        } else {
            Err(FieldError::ContextMismatch)
        }
    }

    /// Parses and range-checks the textual form `c0,c1,c2,c3`.
    pub fn parse(&self, s: &str) -> Result<ExtElement, FieldError> {
        let a: ExtElement = s.parse()?;
        self.element(a.coords)
    }

    /// Embeds a universe element `a < q` as `(a, 0, 0, 0)`.
    pub fn embed(&self, a: u64) -> Result<ExtElement, FieldError> {
        if a >= self.q() {
            return Err(FieldError::EmbedOutOfRange { value: a, q: self.q() });
        }
        Ok(self.base(a))
    }

    /// Base-field element `a mod q`.
    pub fn base(&self, a: u64) -> ExtElement {
        ExtElement { coords: [a % self.q(), 0, 0, 0] }
    }

    pub fn from_index(&self, idx: u64) -> ExtElement {
        ExtElement::from_index(idx, self.q())
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> ExtElement {
        let q = self.q();
        ExtElement {
            coords: [
                rng.gen_range(0..q),
                rng.gen_range(0..q),
                rng.gen_range(0..q),
                rng.gen_range(0..q),
            ],
        }
    }

    #[inline]
    pub fn add(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        let q = self.q();
        let mut coords = [0; EXT_DEGREE];
        for i in 0..EXT_DEGREE {
            let s = a.coords[i] + b.coords[i];
            coords[i] = if s >= q { s - q } else { s };
        }
        ExtElement { coords }
    }

    #[inline]
    pub fn sub(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        let q = self.q();
        let mut coords = [0; EXT_DEGREE];
        for i in 0..EXT_DEGREE {
            coords[i] = if a.coords[i] >= b.coords[i] {
                a.coords[i] - b.coords[i]
            } else {
                a.coords[i] + q - b.coords[i]
            };
        }
        ExtElement { coords }
    }

    #[inline]
    pub fn neg(&self, a: ExtElement) -> ExtElement {
        self.sub(ExtElement::ZERO, a)
    }

    /// Schoolbook product followed by reduction modulo `irr`.
    #[inline]
    pub fn mul(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        ExtElement { coords: mul_reduced(&a.coords, &b.coords, &self.neg_low, self.q()) }
    }

    /// `c · a` for a base-field scalar `c < q`.
    #[inline]
    pub fn scale(&self, c: u64, a: ExtElement) -> ExtElement {
        let q = self.q();
        ExtElement { coords: a.coords.map(|x| x * c % q) }
    }

    /// Product with range checks on both operands.
    pub fn checked_mul(&self, a: ExtElement, b: ExtElement) -> Result<ExtElement, FieldError> {
        if !self.contains(&a) || !self.contains(&b) {
            return Err(FieldError::ContextMismatch);
        }
        Ok(self.mul(a, b))
    }

    pub fn square(&self, a: ExtElement) -> ExtElement {
        self.mul(a, a)
    }

    /// Square-and-multiply.
    pub fn pow(&self, a: ExtElement, mut e: u64) -> ExtElement {
        let mut acc = ExtElement::ONE;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.square(base);
            }
        }
        acc
    }

    /// Inverse via the extended Euclidean algorithm on coordinate polynomials.
    pub fn inv(&self, a: ExtElement) -> Result<ExtElement, FieldError> {
        if !self.contains(&a) {
            return Err(FieldError::ContextMismatch);
        }
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let s = gfpoly::inverse_mod(&a.coords, self.irr.coeffs(), self.q())
            .expect("nonzero element is coprime to an irreducible modulus");
        let mut coords = [0; EXT_DEGREE];
        coords[..s.len()].copy_from_slice(&s);
        Ok(ExtElement { coords })
    }

    pub fn div(&self, a: ExtElement, b: ExtElement) -> Result<ExtElement, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }
}
