//! Univariate polynomials and rational functions over Q.
//!
//! Backing arithmetic for the differential graded algebras on punctured
//! lines: exact field operations, derivatives, residues at rational points,
//! and a small expression parser/printer for form entries.

use std::fmt;

use crate::exact::Rat;

/// Dense polynomial over Q; coefficient i belongs to x^i. Always normalized
/// (no trailing zero coefficients).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly(pub Vec<Rat>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Poly(vec![c]);
        p.normalize();
        p
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn x() -> Self {
        Poly(vec![Rat::zero(), Rat::one()])
    }

    fn normalize(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rat {
        self.0.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).cloned().unwrap_or_else(Rat::zero);
            let b = o.0.get(i).cloned().unwrap_or_else(Rat::zero);
            out.push(&a + &b);
        }
        let mut p = Poly(out);
        p.normalize();
        p
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        let mut p = Poly(out);
        p.normalize();
        p
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        let mut p = Poly(self.0.iter().map(|a| a * c).collect());
        p.normalize();
        p
    }

    /// Euclidean division: (quotient, remainder).
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quo = vec![Rat::zero(); self.0.len().saturating_sub(d.0.len()) + 1];
        let dl = d.leading();
        while !rem.is_zero() && rem.degree() >= d.degree() && !(rem.degree() == 0 && d.degree() > 0)
        {
            if rem.0.len() < d.0.len() {
                break;
            }
            let shift = rem.0.len() - d.0.len();
            let c = &rem.leading() / &dl;
            quo[shift] = &quo[shift] + &c;
            // rem -= c x^shift d
            let mut sub = vec![Rat::zero(); shift];
            sub.extend(d.0.iter().map(|a| a * &c));
            rem = rem.sub(&Poly(sub));
        }
        let mut q = Poly(quo);
        q.normalize();
        (q, rem)
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        // monic
        let inv = a.leading().recip();
        a.scale(&inv)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        let mut out = Vec::with_capacity(self.0.len() - 1);
        for (i, c) in self.0.iter().enumerate().skip(1) {
            out.push(c * &Rat::from_int(i as i64));
        }
        let mut p = Poly(out);
        p.normalize();
        p
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    /// Taylor shift: coefficients of p(t + a) in t.
    pub fn shift(&self, a: &Rat) -> Poly {
        let mut out = Poly::zero();
        let base = Poly(vec![a.clone(), Rat::one()]); // a + t
        let mut pow = Poly::one();
        for c in &self.0 {
            out = out.add(&pow.scale(c));
            pow = pow.mul(&base);
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let coeff_part = if mag.is_one() && i > 0 { String::new() } else { format!("{}", mag) };
            let var_part = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{}", i),
            };
            match (coeff_part.is_empty(), var_part.is_empty()) {
                (true, _) => write!(f, "{}", var_part)?,
                (false, true) => write!(f, "{}", coeff_part)?,
                (false, false) => write!(f, "{}*{}", coeff_part, var_part)?,
            }
        }
        Ok(())
    }
}

/// Rational function num/den, reduced, denominator monic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        RatFunc { num: Poly::one(), den: Poly::one() }
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn x() -> Self {
        RatFunc { num: Poly::x(), den: Poly::one() }
    }

    pub fn from_polys(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut f = RatFunc { num, den };
        f.reduce();
        f
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree() > 0 {
            self.num = self.num.divrem(&g).0;
            self.den = self.den.divrem(&g).0;
        }
        // monic denominator
        let lead = self.den.leading();
        if !lead.is_one() {
            let inv = lead.recip();
            self.den = self.den.scale(&inv);
            self.num = self.num.scale(&inv);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        RatFunc::from_polys(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::from_polys(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &RatFunc) -> RatFunc {
        assert!(!o.is_zero(), "division by the zero function");
        RatFunc::from_polys(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn derivative(&self) -> RatFunc {
        RatFunc::from_polys(
            self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
    }

    /// Splits off a canonical scalar so the remaining function has monic
    /// numerator (the denominator is already monic).
    pub fn canonical_split(&self) -> (Rat, RatFunc) {
        if self.is_zero() {
            return (Rat::zero(), RatFunc::zero());
        }
        let lead = self.num.leading();
        (lead.clone(), RatFunc { num: self.num.scale(&lead.recip()), den: self.den.clone() })
    }

    /// Residue at a rational point: the coefficient of (x-p)^{-1} in the
    /// Laurent expansion.
    pub fn residue_at(&self, p: &Rat) -> Rat {
        if self.is_zero() {
            return Rat::zero();
        }
        // multiplicity of (x - p) in the denominator
        let lin = Poly(vec![-p, Rat::one()]);
        let mut k = 0usize;
        let mut den = self.den.clone();
        loop {
            let (q, r) = den.divrem(&lin);
            if r.is_zero() {
                den = q;
                k += 1;
            } else {
                break;
            }
        }
        if k == 0 {
            return Rat::zero();
        }
        // num(p + t) / den-rest(p + t) as a series to order k-1
        let num_s = self.num.shift(p);
        let den_s = den.shift(p);
        // series inversion of den_s up to t^{k-1}
        let d0 = den_s.0[0].clone();
        debug_assert!(!d0.is_zero());
        let mut inv = vec![Rat::zero(); k];
        inv[0] = d0.recip();
        for m in 1..k {
            let mut acc = Rat::zero();
            for j in 1..=m {
                let dj = den_s.0.get(j).cloned().unwrap_or_else(Rat::zero);
                acc = &acc + &(&dj * &inv[m - j]);
            }
            inv[m] = -&(&acc * &inv[0]);
        }
        // coefficient k-1 of num_s * inv
        let mut res = Rat::zero();
        for j in 0..k {
            let nj = num_s.0.get(j).cloned().unwrap_or_else(Rat::zero);
            res = &res + &(&nj * &inv[k - 1 - j]);
        }
        res
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            if self.num.0.len() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> Poly {
        let mut q = Poly(coeffs.iter().map(|&c| Rat::from_int(c)).collect());
        q.normalize();
        q
    }

    #[test]
    fn poly_arithmetic() {
        let a = p(&[1, 2, 1]); // (x+1)^2
        let b = p(&[1, 1]); // x+1
        let (q, r) = a.divrem(&b);
        assert_eq!(q, b);
        assert!(r.is_zero());
        assert_eq!(a.gcd(&b), b);
        assert_eq!(b.derivative(), p(&[1]));
        assert_eq!(a.eval(&Rat::from_int(2)), Rat::from_int(9));
    }

    #[test]
    fn ratfunc_reduction() {
        // (x²-1)/(x-1) = x+1
        let f = RatFunc::from_polys(p(&[-1, 0, 1]), p(&[-1, 1]));
        assert_eq!(f, RatFunc { num: p(&[1, 1]), den: Poly::one() });
        // 2/(2x-2) reduces with monic denominator
        let f = RatFunc::from_polys(p(&[2]), p(&[-2, 2]));
        assert_eq!(f.den, p(&[-1, 1]));
        assert_eq!(f.num, p(&[1]));
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dx 1/(1-x) = 1/(1-x)^2
        let f = RatFunc::from_polys(p(&[1]), p(&[1, -1]));
        let d = f.derivative();
        let expected = RatFunc::from_polys(p(&[1]), p(&[1, -2, 1]));
        assert_eq!(d, expected);
    }

    #[test]
    fn residues() {
        // 1/x at 0
        let f = RatFunc::from_polys(p(&[1]), p(&[0, 1]));
        assert_eq!(f.residue_at(&Rat::zero()), Rat::one());
        assert_eq!(f.residue_at(&Rat::one()), Rat::zero());
        // 1/(x(x-1)): residue 1/(0-1) = -1 at 0, 1 at 1
        let f = RatFunc::from_polys(p(&[1]), p(&[0, -1, 1]));
        assert_eq!(f.residue_at(&Rat::zero()), -Rat::one());
        assert_eq!(f.residue_at(&Rat::one()), Rat::one());
        // higher pole: x/(x-1)^2: residue at 1 is 1
        let f = RatFunc::from_polys(p(&[0, 1]), p(&[1, -2, 1]));
        assert_eq!(f.residue_at(&Rat::one()), Rat::one());
        // exact form: derivative of 1/(x-1) has zero residues
        let g = RatFunc::from_polys(p(&[1]), p(&[-1, 1])).derivative();
        assert_eq!(g.residue_at(&Rat::one()), Rat::zero());
    }

    #[test]
    fn canonical_split_extracts_leading() {
        let f = RatFunc::from_polys(p(&[0, -3]), p(&[1, 1]));
        let (s, m) = f.canonical_split();
        assert_eq!(s, Rat::from_int(-3));
        assert_eq!(m.num, p(&[0, 1]));
    }
}
