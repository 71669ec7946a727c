use std::ops::{Add, Mul, Neg, Sub};

use super::fp::{legendre, FpElem};

/// Element a + b·i of F_{p²} = F_p[i]/(i² − r) for a fixed non-residue r.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp2Elem {
    pub a: FpElem,
    pub b: FpElem,
    nonresidue: FpElem,
}

impl Fp2Elem {
    /// Least quadratic non-residue modulo an odd prime p.
    pub fn nonresidue_for(p: u32) -> FpElem {
        assert!(p > 2, "F_p² construction needs an odd prime");
        let mut r = FpElem::new(2, p);
        while legendre(r) != -1 {
            r = r + FpElem::one(p);
        }
        r
    }

    pub fn new(a: FpElem, b: FpElem, nonresidue: FpElem) -> Self {
        Fp2Elem { a, b, nonresidue }
    }

    pub fn from_base(a: FpElem, nonresidue: FpElem) -> Self {
        Fp2Elem {
            a,
            b: FpElem::zero(a.modulus()),
            nonresidue,
        }
    }

    pub fn nonresidue(self) -> FpElem {
        self.nonresidue
    }

    pub fn modulus(self) -> u32 {
        self.a.modulus()
    }

    pub fn is_zero(self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn in_base_field(self) -> bool {
        self.b.is_zero()
    }

    /// Frobenius x ↦ x^p, i.e. a + b·i ↦ a − b·i.
    pub fn conj(self) -> Self {
        Fp2Elem {
            b: -self.b,
            ..self
        }
    }

    pub fn norm(self) -> FpElem {
        self.a * self.a - self.nonresidue * self.b * self.b
    }

    pub fn inv(self) -> Option<Self> {
        let n = self.norm().inv()?;
        let c = self.conj();
        Some(Fp2Elem {
            a: c.a * n,
            b: c.b * n,
            nonresidue: self.nonresidue,
        })
    }

    pub fn pow(self, mut e: u128) -> Self {
        let p = self.modulus();
        let mut acc = Fp2Elem::from_base(FpElem::one(p), self.nonresidue);
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Squares of F_{p²}^* are exactly the elements whose norm is a square in F_p.
    pub fn is_square(self) -> bool {
        self.is_zero() || legendre(self.norm()) == 1
    }

    pub fn sqrt(self) -> Option<Self> {
        if self.is_zero() {
            return Some(self);
        }
        if !self.is_square() {
            return None;
        }
        let p = self.modulus() as u128;
        let order = p * p - 1;
        let mut q = order;
        let mut s = 0u32;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let one = Fp2Elem::from_base(FpElem::one(self.modulus()), self.nonresidue);
        let mut z = one;
        loop {
            z = Fp2Elem {
                b: z.b + FpElem::one(self.modulus()),
                ..z
            };
            if !z.is_square() {
                break;
            }
        }
        let mut m = s;
        let mut c = z.pow(q);
        let mut t = self.pow(q);
        let mut r = self.pow(q.div_ceil(2));
        while t != one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != one {
                t2 = t2 * t2;
                i += 1;
            }
            let b = c.pow(1u128 << (m - i - 1));
            m = i;
            c = b * b;
            t = t * c;
            r = r * b;
        }
        Some(r)
    }

    /// All p² elements, base-field elements first.
    pub fn all(p: u32) -> impl Iterator<Item = Fp2Elem> {
        let r = Fp2Elem::nonresidue_for(p);
        (0..p).flat_map(move |b| {
            (0..p).map(move |a| Fp2Elem::new(FpElem::new(a, p), FpElem::new(b, p), r))
        })
    }
}

impl Add for Fp2Elem {
    type Output = Fp2Elem;
    fn add(self, o: Fp2Elem) -> Fp2Elem {
        Fp2Elem {
            a: self.a + o.a,
            b: self.b + o.b,
            nonresidue: self.nonresidue,
        }
    }
}

impl Sub for Fp2Elem {
    type Output = Fp2Elem;
    fn sub(self, o: Fp2Elem) -> Fp2Elem {
        Fp2Elem {
            a: self.a - o.a,
            b: self.b - o.b,
            nonresidue: self.nonresidue,
        }
    }
}

impl Mul for Fp2Elem {
    type Output = Fp2Elem;
    fn mul(self, o: Fp2Elem) -> Fp2Elem {
        Fp2Elem {
            a: self.a * o.a + self.nonresidue * self.b * o.b,
            b: self.a * o.b + self.b * o.a,
            nonresidue: self.nonresidue,
        }
    }
}

impl Neg for Fp2Elem {
    type Output = Fp2Elem;
    fn neg(self) -> Fp2Elem {
        Fp2Elem {
            a: -self.a,
            b: -self.b,
            nonresidue: self.nonresidue,
        }
    }
}
