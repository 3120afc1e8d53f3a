//! Reed–Solomon code shares over 𝔽_q, q = 2^61 − 1, and its quadratic
//! extension. A message of k symbols is packed two per 𝔽_{q²} coefficient,
//! so any ⌈k/2⌉ of the k evaluations recover it.

use std::sync::OnceLock;

use thiserror::Error;

pub const Q: u64 = (1 << 61) - 1;
pub const SYMBOL_BITS: u32 = 61;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShareError {
    #[error("message length {0} must be below the field size")]
    TooLong(u64),
    #[error("only d = 2 is supported, got {0}")]
    Unsupported(u32),
    #[error("symbol {0} is not reduced modulo q")]
    Symbol(u64),
    #[error("need {need} distinct shares, got {got}")]
    Insufficient { need: usize, got: usize },
    #[error("share index {0} appears twice")]
    Duplicate(u32),
    #[error("share index {index} outside 1..={k}")]
    OutOfRange { index: u32, k: usize },
    #[error("shares disagree; the label data is corrupted")]
    Inconsistent,
    #[error("share wire form must be 20 bytes")]
    Wire,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Fq(pub u64);

impl Fq {
    pub fn new(x: u64) -> Self {
        Fq(x % Q)
    }

    pub fn add(self, o: Fq) -> Fq {
        let s = self.0 + o.0;
        Fq(if s >= Q { s - Q } else { s })
    }

    pub fn sub(self, o: Fq) -> Fq {
        Fq(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + Q - o.0 })
    }

    pub fn mul(self, o: Fq) -> Fq {
        let p = self.0 as u128 * o.0 as u128;
        // 2^61 ≡ 1
        let lo = (p as u64) & Q;
        let hi = (p >> 61) as u64;
        let s = lo + hi;
        Fq(if s >= Q { s - Q } else { s })
    }

    pub fn pow(self, mut e: u64) -> Fq {
        let mut b = self;
        let mut r = Fq(1);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(b);
            }
            b = b.mul(b);
            e >>= 1;
        }
        r
    }

    pub fn inv(self) -> Fq {
        assert!(self.0 != 0, "inverse of zero");
        self.pow(Q - 2)
    }
}

/// Smallest quadratic non-residue mod q, by Euler's criterion.
pub fn non_residue() -> Fq {
    static NR: OnceLock<Fq> = OnceLock::new();
    *NR.get_or_init(|| {
        (2..)
            .map(Fq)
            .find(|x| x.pow((Q - 1) / 2) == Fq(Q - 1))
            .expect("a non-residue exists")
    })
}

/// a + bξ with ξ² = the non-residue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Fq2 {
    pub a: Fq,
    pub b: Fq,
}

impl Fq2 {
    pub fn add(self, o: Fq2) -> Fq2 {
        Fq2 { a: self.a.add(o.a), b: self.b.add(o.b) }
    }

    pub fn mul(self, o: Fq2) -> Fq2 {
        let nr = non_residue();
        Fq2 {
            a: self.a.mul(o.a).add(self.b.mul(o.b).mul(nr)),
            b: self.a.mul(o.b).add(self.b.mul(o.a)),
        }
    }

    pub fn scale(self, s: Fq) -> Fq2 {
        Fq2 { a: self.a.mul(s), b: self.b.mul(s) }
    }

    pub fn inv(self) -> Fq2 {
        let norm = self.a.mul(self.a).sub(self.b.mul(self.b).mul(non_residue()));
        let ni = norm.inv();
        Fq2 { a: self.a.mul(ni), b: Fq(0).sub(self.b).mul(ni) }
    }
}

/// `(i, g(i))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeShare {
    pub index: u32,
    pub value: Fq2,
}

impl CodeShare {
    /// Little-endian (index u32, a u64, b u64).
    pub fn to_bytes(&self) -> [u8; 20] {
        let mut out = [0u8; 20];
        out[..4].copy_from_slice(&self.index.to_le_bytes());
        out[4..12].copy_from_slice(&self.value.a.0.to_le_bytes());
        out[12..].copy_from_slice(&self.value.b.0.to_le_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, ShareError> {
        if b.len() != 20 {
            return Err(ShareError::Wire);
        }
        let index = u32::from_le_bytes(b[..4].try_into().unwrap());
        let a = u64::from_le_bytes(b[4..12].try_into().unwrap());
        let bb = u64::from_le_bytes(b[12..].try_into().unwrap());
        if a >= Q || bb >= Q {
            return Err(ShareError::Symbol(a.max(bb)));
        }
        Ok(CodeShare { index, value: Fq2 { a: Fq(a), b: Fq(bb) } })
    }
}

/// Bits used by [`write_share`] for a share of a k-symbol message.
pub fn share_bits(k: usize) -> usize {
    crate::bits::ceil_log2(k as u64) as usize + 2 * SYMBOL_BITS as usize
}

/// Compact form: index − 1 in ⌈log₂ k⌉ bits, then both 61-bit symbols.
pub fn write_share(w: &mut crate::bits::BitWriter, s: &CodeShare, k: usize) {
    w.put(s.index as u64 - 1, crate::bits::ceil_log2(k as u64));
    w.put(s.value.a.0, SYMBOL_BITS);
    w.put(s.value.b.0, SYMBOL_BITS);
}

pub fn read_share(r: &mut crate::bits::BitReader, k: usize) -> Result<CodeShare, crate::bits::BitError> {
    let index = r.get(crate::bits::ceil_log2(k as u64))? as u32 + 1;
    let a = r.get(SYMBOL_BITS)?;
    let b = r.get(SYMBOL_BITS)?;
    if a >= Q || b >= Q {
        return Err(crate::bits::BitError::Malformed("unreduced share symbol"));
    }
    Ok(CodeShare { index, value: Fq2 { a: Fq(a), b: Fq(b) } })
}

fn check_params(k: usize, d: u32) -> Result<(), ShareError> {
    if d != 2 {
        return Err(ShareError::Unsupported(d));
    }
    if k as u64 >= Q {
        return Err(ShareError::TooLong(k as u64));
    }
    Ok(())
}

/// Shares 1..=k of the polynomial whose coefficient t is (m[2t], m[2t+1]).
pub fn encode(m: &[u64], d: u32) -> Result<Vec<CodeShare>, ShareError> {
    check_params(m.len(), d)?;
    if let Some(&bad) = m.iter().find(|&&x| x >= Q) {
        return Err(ShareError::Symbol(bad));
    }
    let coeffs: Vec<Fq2> = m
        .chunks(2)
        .map(|c| Fq2 { a: Fq(c[0]), b: Fq(*c.get(1).unwrap_or(&0)) })
        .collect();
    Ok((1..=m.len() as u32)
        .map(|i| CodeShare { index: i, value: eval(&coeffs, Fq(i as u64)) })
        .collect())
}

fn eval(coeffs: &[Fq2], x: Fq) -> Fq2 {
    coeffs.iter().rev().fold(Fq2::default(), |acc, &c| acc.scale(x).add(c))
}

/// Recovers the k-symbol message from any ⌈k/2⌉ distinct shares; extra
/// shares are checked for consistency.
pub fn decode(shares: &[CodeShare], k: usize, d: u32) -> Result<Vec<u64>, ShareError> {
    check_params(k, d)?;
    let t = k.div_ceil(2);
    let mut seen = std::collections::HashSet::new();
    for s in shares {
        if s.index == 0 || s.index as usize > k {
            return Err(ShareError::OutOfRange { index: s.index, k });
        }
        if !seen.insert(s.index) {
            return Err(ShareError::Duplicate(s.index));
        }
    }
    if shares.len() < t {
        return Err(ShareError::Insufficient { need: t, got: shares.len() });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let (base, extra) = shares.split_at(t);
    let coeffs = interpolate(base);
    for s in extra {
        if eval(&coeffs, Fq(s.index as u64)) != s.value {
            return Err(ShareError::Inconsistent);
        }
    }
    let mut out = Vec::with_capacity(k);
    for c in coeffs {
        out.push(c.a.0);
        out.push(c.b.0);
    }
    if out[k..].iter().any(|&x| x != 0) {
        return Err(ShareError::Inconsistent);
    }
    out.truncate(k);
    Ok(out)
}

/// Lagrange interpolation in coefficient form; points lie in 𝔽_q.
fn interpolate(points: &[CodeShare]) -> Vec<Fq2> {
    let t = points.len();
    let xs: Vec<Fq> = points.iter().map(|p| Fq(p.index as u64)).collect();
    // master(x) = Π (x − x_j), coefficients low to high
    let mut master = vec![Fq(1)];
    for &xj in &xs {
        let mut next = vec![Fq(0); master.len() + 1];
        for (i, &c) in master.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(c.mul(xj));
        }
        master = next;
    }
    let mut coeffs = vec![Fq2::default(); t];
    for (i, p) in points.iter().enumerate() {
        // q(x) = master(x) / (x − x_i) by synthetic division
        let mut q = vec![Fq(0); t];
        let mut carry = Fq(0);
        for deg in (1..=t).rev() {
            carry = master[deg].add(carry.mul(xs[i]));
            q[deg - 1] = carry;
        }
        let denom = q.iter().rev().fold(Fq(0), |acc, &c| acc.mul(xs[i]).add(c));
        let w = p.value.scale(denom.inv());
        for (c, &qc) in coeffs.iter_mut().zip(&q) {
            *c = c.add(w.scale(qc));
        }
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_basics() {
        let x = Fq(123456789);
        assert_eq!(x.mul(x.inv()), Fq(1));
        assert_eq!(Fq(Q - 1).add(Fq(2)), Fq(1));
        assert_eq!(Fq(1).sub(Fq(2)), Fq(Q - 1));
        let nr = non_residue();
        assert_eq!(nr.pow((Q - 1) / 2), Fq(Q - 1));
        let z = Fq2 { a: Fq(5), b: Fq(7) };
        assert_eq!(z.mul(z.inv()), Fq2 { a: Fq(1), b: Fq(0) });
    }

    #[test]
    fn constant_polynomials() {
        let s = encode(&[42], 2).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].value, Fq2 { a: Fq(42), b: Fq(0) });
        let s = encode(&[4, 9], 2).unwrap();
        assert_eq!(s[0].value, s[1].value);
        assert_eq!(decode(&s[1..], 2, 2).unwrap(), vec![4, 9]);
        assert_eq!(decode(&s[..1], 2, 2).unwrap(), vec![4, 9]);
    }

    #[test]
    fn zero_message() {
        let s = encode(&[0; 6], 2).unwrap();
        assert!(s.iter().all(|c| c.value == Fq2::default()));
        assert_eq!(decode(&s[3..], 6, 2).unwrap(), vec![0; 6]);
    }

    #[test]
    fn errors() {
        let s = encode(&[1, 2, 3, 4], 2).unwrap();
        assert_eq!(decode(&s[..1], 4, 2), Err(ShareError::Insufficient { need: 2, got: 1 }));
        assert_eq!(decode(&[s[0], s[0]], 4, 2), Err(ShareError::Duplicate(1)));
        assert_eq!(encode(&[1], 3), Err(ShareError::Unsupported(3)));
        assert_eq!(encode(&[Q], 2), Err(ShareError::Symbol(Q)));
        let mut bad = s.clone();
        bad[3].value.a = bad[3].value.a.add(Fq(1));
        assert_eq!(decode(&bad, 4, 2), Err(ShareError::Inconsistent));
    }

    #[test]
    fn wire_roundtrip() {
        let s = encode(&[Q - 1, 17, 3], 2).unwrap();
        for c in s {
            assert_eq!(CodeShare::from_bytes(&c.to_bytes()).unwrap(), c);
        }
    }
}
