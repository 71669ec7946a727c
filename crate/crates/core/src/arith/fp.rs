use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use super::Field;

/// Element of the prime field F_p, p < 2^31.
///
/// The modulus travels with the value so that polynomials and curve points
/// over F_p need no separate context object.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpElem {
    value: u32,
    modulus: u32,
}

impl FpElem {
    pub fn new(value: u32, modulus: u32) -> Self {
        debug_assert!(modulus >= 2 && modulus < (1 << 31));
        FpElem {
            value: value % modulus,
            modulus,
        }
    }

    pub fn from_i64(n: i64, modulus: u32) -> Self {
        let r = n.rem_euclid(modulus as i64) as u32;
        FpElem { value: r, modulus }
    }

    pub fn zero(modulus: u32) -> Self {
        FpElem { value: 0, modulus }
    }

    pub fn one(modulus: u32) -> Self {
        FpElem::new(1, modulus)
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let m = self.modulus as u64;
        let mut base = self.value as u64;
        let mut acc = 1u64 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        FpElem {
            value: acc as u32,
            modulus: self.modulus,
        }
    }

    pub fn inv(self) -> Option<Self> {
        if self.value == 0 {
            return None;
        }
        // extended Euclid; the modulus is prime so gcd is 1
        let (mut r0, mut r1) = (self.modulus as i64, self.value as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 != 1 {
            return None;
        }
        Some(FpElem::from_i64(t0, self.modulus))
    }

    /// True when the value lies in the lower half [0, p/2].
    pub fn is_canonical_root(self) -> bool {
        self.value <= self.modulus / 2
    }
}

impl fmt::Debug for FpElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for FpElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for FpElem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.value)
    }
}

impl Add for FpElem {
    type Output = FpElem;
    fn add(self, rhs: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let s = self.value as u64 + rhs.value as u64;
        let m = self.modulus as u64;
        FpElem {
            value: if s >= m { s - m } else { s } as u32,
            modulus: self.modulus,
        }
    }
}

impl Sub for FpElem {
    type Output = FpElem;
    fn sub(self, rhs: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, rhs.modulus);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + (self.modulus - rhs.value)
        };
        FpElem {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl Mul for FpElem {
    type Output = FpElem;
    fn mul(self, rhs: FpElem) -> FpElem {
        debug_assert_eq!(self.modulus, rhs.modulus);
        FpElem {
            value: ((self.value as u64 * rhs.value as u64) % self.modulus as u64) as u32,
            modulus: self.modulus,
        }
    }
}

impl Neg for FpElem {
    type Output = FpElem;
    fn neg(self) -> FpElem {
        if self.value == 0 {
            self
        } else {
            FpElem {
                value: self.modulus - self.value,
                modulus: self.modulus,
            }
        }
    }
}

impl Field for FpElem {
    fn zero_like(&self) -> Self {
        FpElem::zero(self.modulus)
    }
    fn one_like(&self) -> Self {
        FpElem::one(self.modulus)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        FpElem::from_i64(n, self.modulus)
    }
    fn is_zero_elem(&self) -> bool {
        self.value == 0
    }
    fn inverse(&self) -> Option<Self> {
        self.inv()
    }
}

/// Legendre symbol (a/p) for odd p: 0, 1 or -1.
pub fn legendre(a: FpElem) -> i8 {
    if a.is_zero() {
        return 0;
    }
    if a.modulus == 2 {
        return 1;
    }
    let e = a.pow(((a.modulus - 1) / 2) as u64);
    if e.value == 1 {
        1
    } else {
        -1
    }
}

/// Square root by Tonelli–Shanks, normalized to the representative in [0, p/2].
pub fn mod_sqrt(a: FpElem) -> Option<FpElem> {
    let p = a.modulus;
    if a.is_zero() {
        return Some(a);
    }
    if p == 2 {
        return Some(a);
    }
    if legendre(a) != 1 {
        return None;
    }
    let root = if p % 4 == 3 {
        a.pow(((p as u64) + 1) / 4)
    } else {
        tonelli_shanks(a)
    };
    debug_assert_eq!(root * root, a);
    Some(if root.is_canonical_root() { root } else { -root })
}

fn tonelli_shanks(a: FpElem) -> FpElem {
    let p = a.modulus;
    let mut q = (p - 1) as u64;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = FpElem::new(2, p);
    while legendre(z) != -1 {
        z = z + FpElem::one(p);
    }
    let mut m = s;
    let mut c = z.pow(q);
    let mut t = a.pow(q);
    let mut r = a.pow((q + 1) / 2);
    let one = FpElem::one(p);
    while t != one {
        let mut i = 0;
        let mut t2 = t;
        while t2 != one {
            t2 = t2 * t2;
            i += 1;
        }
        let b = c.pow(1u64 << (m - i - 1));
        m = i;
        c = b * b;
        t = t * c;
        r = r * b;
    }
    r
}
