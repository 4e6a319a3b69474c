//! Dense polynomials over GF(p), lowest degree first. Used by the
//! irreducibility test and the extension-field inverse.

pub(crate) fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and small.
    let (mut acc, mut base, mut e) = (1u64, a % p, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

pub(crate) fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Quotient and remainder of `a / b`, `b` nonzero.
fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "polynomial division by zero");
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let lead_inv = inv_mod(*b.last().unwrap(), p);
    let mut quot = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() * lead_inv % p;
        quot[shift] = c;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - c * bi % p) % p;
        }
        r = trim(r);
    }
    (trim(quot), r)
}

fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    divrem(a, b, p).1
}

/// `X^e mod f` by square-and-multiply.
#[cfg(test)]
pub(crate) fn pow_x_mod(mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = rem(&[1], f, p);
    let mut base = rem(&[0, 1], f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &base, p), f, p);
        }
        e >>= 1;
        if e > 0 {
            base = rem(&mul(&base, &base, p), f, p);
        }
    }
    acc
}

/// Monic gcd.
pub(crate) fn gcd(a: Vec<u64>, b: Vec<u64>, p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    make_monic(a, p)
}

fn make_monic(a: Vec<u64>, p: u64) -> Vec<u64> {
    match a.last() {
        None => a,
        Some(&lead) => {
            let li = inv_mod(lead, p);
            a.into_iter().map(|c| c * li % p).collect()
        }
    }
}

/// `s` with `a·s ≡ 1 (mod f)`, or `None` when `gcd(a, f) ≠ 1`.
pub(crate) fn inverse_mod(a: &[u64], f: &[u64], p: u64) -> Option<Vec<u64>> {
    // Invariant: r0 ≡ s0·a, r1 ≡ s1·a (mod f).
    let (mut r0, mut r1) = (trim(f.to_vec()), rem(a, f, p));
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (Vec::new(), vec![1]);
    while !r1.is_empty() {
        let (quot, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&quot, &s1, p), p);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = inv_mod(r0[0], p);
    Some(rem(&s0.iter().map(|x| x * c % p).collect::<Vec<_>>(), f, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_identity() {
        let p = 7;
        let a = vec![3, 0, 5, 1, 6, 2];
        let b = vec![1, 4, 1];
        let (quot, r) = divrem(&a, &b, p);
        let back = {
            let qb = mul(&quot, &b, p);
            let n = qb.len().max(r.len());
            trim((0..n)
                .map(|i| (qb.get(i).unwrap_or(&0) + r.get(i).unwrap_or(&0)) % p)
                .collect())
        };
        assert_eq!(back, a);
        assert!(r.len() < b.len());
    }

    #[test]
    fn gcd_of_shared_factor() {
        // (X+1)(X+2) and (X+1)(X+3) over GF(5).
        let p = 5;
        let a = mul(&[1, 1], &[2, 1], p);
        let b = mul(&[1, 1], &[3, 1], p);
        assert_eq!(gcd(a, b, p), vec![1, 1]);
    }

    #[test]
    fn x_power_reduction() {
        // X^4 ≡ X + 1 mod X^4 + X + 1 over GF(2); X^16 ≡ X.
        let f = [1, 1, 0, 0, 1];
        assert_eq!(pow_x_mod(4, &f, 2), vec![1, 1]);
        assert_eq!(pow_x_mod(16, &f, 2), vec![0, 1]);
    }
}
