//! Exact rational arithmetic, linear combinations, and sparse row reduction.
//!
//! Everything downstream (relation datamining, boundary solving in the bar
//! complex, basis reduction) runs on these three types. Rationals are always
//! stored reduced with positive denominator, so equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always in lowest terms with denominator >= 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// p/q, reduced at construction. Panics if q = 0.
    pub fn new(p: i64, q: i64) -> Self {
        assert!(q != 0, "rational with zero denominator");
        Rat(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_big(p: BigInt, q: BigInt) -> Self {
        assert!(!q.is_zero(), "rational with zero denominator");
        Rat(BigRational::new(p, q))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rat(self.0.recip())
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn pow(&self, e: i32) -> Self {
        if e == 0 {
            return Rat::one();
        }
        let base = if e < 0 { self.recip() } else { self.clone() };
        let mut acc = Rat::one();
        for _ in 0..e.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rat {
    type Err = String;

    /// Parses "p" or "p/q".
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p, q),
            None => (s, "1"),
        };
        let p = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {s:?}: {e}"))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {s:?}: {e}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rat(BigRational::new(p, q)))
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
    };
}

rat_binop!(Add, add, +);
rat_binop!(Sub, sub, -);
rat_binop!(Mul, mul, *);

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0.clone())
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

/// Finite Q-linear combination of generators of type `G`.
///
/// No stored coefficient is zero; iteration order is the generator order, so
/// two combinations are equal iff their term maps are equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinComb<G: Ord> {
    terms: BTreeMap<G, Rat>,
}

impl<G: Ord> Default for LinComb<G> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<G: Ord + Clone> LinComb<G> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(g: G, c: Rat) -> Self {
        let mut t = Self::zero();
        t.add_term(g, c);
        t
    }

    pub fn gen(g: G) -> Self {
        Self::term(g, Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, g: &G) -> Rat {
        self.terms.get(g).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&G, &Rat)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> BTreeMap<G, Rat> {
        self.terms
    }

    /// Adds `c`·`g`, dropping the entry if the total cancels to zero.
    pub fn add_term(&mut self, g: G, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(g);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (g, c) in other.iter() {
            self.add_term(g.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, c) in other.iter() {
            out.add_term(g.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (g, v) in self.iter() {
            out.terms.insert(g.clone(), v * c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rat::one())
    }

    /// Applies `f` to every generator and re-collects (images may merge).
    pub fn map_gens<H: Ord + Clone>(&self, mut f: impl FnMut(&G) -> H) -> LinComb<H> {
        let mut out = LinComb::zero();
        for (g, c) in self.iter() {
            out.add_term(f(g), c.clone());
        }
        out
    }

    /// Substitutes each generator by a combination and sums.
    pub fn flat_map<H: Ord + Clone>(&self, mut f: impl FnMut(&G) -> LinComb<H>) -> LinComb<H> {
        let mut out = LinComb::zero();
        for (g, c) in self.iter() {
            let image = f(g);
            for (h, d) in image.iter() {
                out.add_term(h.clone(), c * d);
            }
        }
        out
    }

    /// Sum of all coefficients (the "mass"; shuffle of words has binomial mass).
    pub fn mass(&self) -> Rat {
        let mut m = Rat::zero();
        for (_, c) in self.iter() {
            m = &m + c;
        }
        m
    }
}

impl<G: Ord + Clone + fmt::Debug> fmt::Debug for LinComb<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (g, c) in self.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}*{:?}", c, g)?;
        }
        Ok(())
    }
}

impl<G: Ord + Clone> FromIterator<(G, Rat)> for LinComb<G> {
    fn from_iter<T: IntoIterator<Item = (G, Rat)>>(iter: T) -> Self {
        let mut out = Self::zero();
        for (g, c) in iter {
            out.add_term(g, c);
        }
        out
    }
}

/// Sparse matrix over Q: rows are combinations of column indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMat {
    pub rows: Vec<LinComb<usize>>,
    pub ncols: usize,
}

/// Result of reduced row echelon computation.
pub struct Rref {
    pub reduced: SparseMat,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl SparseMat {
    pub fn new(ncols: usize) -> Self {
        SparseMat { rows: Vec::new(), ncols }
    }

    pub fn push_row(&mut self, row: LinComb<usize>) {
        debug_assert!(row.iter().all(|(&j, _)| j < self.ncols));
        self.rows.push(row);
    }

    /// Serializes rows as arrays of (column, "p/q") pairs.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<(usize, String)>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|(&j, c)| (j, c.to_string())).collect())
            .collect();
        serde_json::json!({ "ncols": self.ncols, "rows": rows }).to_string()
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        #[derive(serde::Deserialize)]
        struct Doc {
            ncols: usize,
            rows: Vec<Vec<(usize, String)>>,
        }
        let doc: Doc = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let mut m = SparseMat::new(doc.ncols);
        for row in doc.rows {
            let mut lc = LinComb::zero();
            for (j, c) in row {
                if j >= doc.ncols {
                    return Err(format!("column {} out of range", j));
                }
                lc.add_term(j, c.parse::<Rat>()?);
            }
            m.push_row(lc);
        }
        Ok(m)
    }

    /// Reduced row echelon form over exact rationals.
    ///
    /// Columns are processed left to right; among candidate pivot rows the one
    /// with fewest nonzeros is chosen to limit fill-in. The final RREF (and
    /// hence the pivot column list) is canonical regardless of that choice.
    pub fn rref(&self) -> Rref {
        let mut rows: Vec<LinComb<usize>> = self.rows.iter().filter(|r| !r.is_zero()).cloned().collect();
        let mut pivots = Vec::new();
        let mut done = 0usize; // rows[..done] are finished pivot rows

        for col in 0..self.ncols {
            // Markowitz-style: fewest nonzeros first, then lowest index.
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in rows.iter().enumerate().skip(done) {
                if !row.coeff(&col).is_zero() {
                    let nnz = row.len();
                    if best.map_or(true, |(bn, _)| nnz < bn) {
                        best = Some((nnz, i));
                    }
                }
            }
            let Some((_, i)) = best else { continue };
            rows.swap(done, i);
            let pivot_val = rows[done].coeff(&col);
            rows[done] = rows[done].scale(&pivot_val.recip());
            let pivot_row = rows[done].clone();
            for (j, row) in rows.iter_mut().enumerate() {
                if j == done {
                    continue;
                }
                let c = row.coeff(&col);
                if !c.is_zero() {
                    *row = row.sub(&pivot_row.scale(&c));
                }
            }
            pivots.push(col);
            done += 1;
            if done == rows.len() {
                break;
            }
        }

        rows.retain(|r| !r.is_zero());
        let rank = rows.len();
        debug_assert_eq!(rank, pivots.len());
        Rref { reduced: SparseMat { rows, ncols: self.ncols }, pivots, rank }
    }
}

/// Writes `target` as an exact linear combination of `span`, if possible.
///
/// A `None` means the target is not in the span; that is a normal outcome,
/// not a fault.
pub fn solve_in_span<G: Ord + Clone>(target: &LinComb<G>, span: &[LinComb<G>]) -> Option<Vec<Rat>> {
    if target.is_zero() {
        return Some(vec![Rat::zero(); span.len()]);
    }
    // Index the union of supports.
    let mut gens: BTreeMap<&G, usize> = BTreeMap::new();
    for lc in span.iter().chain(std::iter::once(target)) {
        for (g, _) in lc.iter() {
            let n = gens.len();
            gens.entry(g).or_insert(n);
        }
    }
    // One equation per generator; unknowns are the span coefficients, with the
    // target as an extra right-hand column.
    let k = span.len();
    let mut mat = SparseMat::new(k + 1);
    let mut eqs: BTreeMap<usize, LinComb<usize>> = BTreeMap::new();
    for (j, lc) in span.iter().enumerate() {
        for (g, c) in lc.iter() {
            eqs.entry(gens[g]).or_default().add_term(j, c.clone());
        }
    }
    for (g, c) in target.iter() {
        eqs.entry(gens[g]).or_default().add_term(k, c.clone());
    }
    for (_, row) in eqs {
        mat.push_row(row);
    }
    let r = mat.rref();
    // Inconsistent iff some pivot sits in the target column.
    if r.pivots.contains(&k) {
        return None;
    }
    let mut coords = vec![Rat::zero(); k];
    for (row, &col) in r.reduced.rows.iter().zip(r.pivots.iter()) {
        coords[col] = row.coeff(&k);
    }
    // Each pivot row reads x_col + (free terms) = rhs; with no free span
    // columns allowed to float we must verify the candidate exactly.
    let mut check = LinComb::zero();
    for (j, c) in coords.iter().enumerate() {
        check.add_assign(&span[j].scale(c));
    }
    if &check == target {
        Some(coords)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: Vec<Vec<(usize, Rat)>>, ncols: usize) -> SparseMat {
        let mut m = SparseMat::new(ncols);
        for r in rows {
            m.push_row(r.into_iter().collect());
        }
        m
    }

    #[test]
    fn rref_identity() {
        let m = mat(
            vec![vec![(0, Rat::one())], vec![(1, Rat::one())]],
            2,
        );
        let r = m.rref();
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn rref_dependent_rows() {
        let m = mat(
            vec![
                vec![(0, Rat::one()), (1, Rat::from_int(2))],
                vec![(0, Rat::from_int(2)), (1, Rat::from_int(4))],
            ],
            2,
        );
        let r = m.rref();
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
    }

    #[test]
    fn rref_hand_elimination() {
        // rows {(0:1/3, 1:1), (1:1/2)}: eliminating gives the identity pattern.
        let m = mat(
            vec![
                vec![(0, Rat::new(1, 3)), (1, Rat::one())],
                vec![(1, Rat::new(1, 2))],
            ],
            2,
        );
        let r = m.rref();
        assert_eq!(r.rank, 2);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.reduced.rows[0], LinComb::term(0usize, Rat::one()));
        assert_eq!(r.reduced.rows[1], LinComb::term(1usize, Rat::one()));
    }

    #[test]
    fn solve_zero_target() {
        let span = vec![LinComb::gen(0u32), LinComb::gen(1u32)];
        assert_eq!(
            solve_in_span(&LinComb::zero(), &span),
            Some(vec![Rat::zero(), Rat::zero()])
        );
    }

    #[test]
    fn solve_basis_case() {
        let g1 = LinComb::gen("g1");
        let g2 = LinComb::gen("g2");
        let target = g1.add(&g2);
        assert_eq!(
            solve_in_span(&target, &[g1, g2]),
            Some(vec![Rat::one(), Rat::one()])
        );
    }

    #[test]
    fn solve_disjoint_supports() {
        let g1 = LinComb::gen("g1");
        let g2 = LinComb::gen("g2");
        assert_eq!(solve_in_span(&g1, &[g2]), None);
    }

    /// Brute-force rank by determinant minors (Laplace expansion).
    fn det(m: &[Vec<Rat>]) -> Rat {
        let n = m.len();
        if n == 0 {
            return Rat::one();
        }
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = Rat::zero();
        for j in 0..n {
            if m[0][j].is_zero() {
                continue;
            }
            let minor: Vec<Vec<Rat>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][j] * &det(&minor);
            acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    fn minor_rank(rows: &[Vec<Rat>]) -> usize {
        let nr = rows.len();
        let nc = if nr == 0 { 0 } else { rows[0].len() };
        for size in (1..=nr.min(nc)).rev() {
            // all size×size minors
            let row_sets = subsets(nr, size);
            let col_sets = subsets(nc, size);
            for rs in &row_sets {
                for cs in &col_sets {
                    let sub: Vec<Vec<Rat>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect())
                        .collect();
                    if !det(&sub).is_zero() {
                        return size;
                    }
                }
            }
        }
        0
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        rec(0, n, k, &mut cur, &mut out);
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rank_matches_minor_oracle(entries in proptest::collection::vec(-3i64..=3, 9)) {
            let rows: Vec<Vec<Rat>> = entries
                .chunks(3)
                .map(|ch| ch.iter().map(|&v| Rat::from_int(v)).collect())
                .collect();
            let mut m = SparseMat::new(3);
            for r in &rows {
                m.push_row(r.iter().cloned().enumerate().collect());
            }
            prop_assert_eq!(m.rref().rank, minor_rank(&rows));
        }

        #[test]
        fn solve_reconstructs(coords in proptest::collection::vec(-4i64..=4, 3)) {
            let span = vec![
                LinComb::from_iter([(0u8, Rat::one()), (1, Rat::from_int(2))]),
                LinComb::from_iter([(1u8, Rat::one()), (2, Rat::from_int(-1))]),
                LinComb::from_iter([(0u8, Rat::new(1, 3))]),
            ];
            let mut target = LinComb::zero();
            for (lc, &c) in span.iter().zip(&coords) {
                target.add_assign(&lc.scale(&Rat::from_int(c)));
            }
            let sol = solve_in_span(&target, &span).expect("target is in span");
            let mut rebuilt = LinComb::zero();
            for (lc, c) in span.iter().zip(&sol) {
                rebuilt.add_assign(&lc.scale(c));
            }
            prop_assert_eq!(rebuilt, target);
        }

        #[test]
        fn lincomb_group_laws(
            a in proptest::collection::vec((-5i64..=5, 0u8..4), 0..6),
            b in proptest::collection::vec((-5i64..=5, 0u8..4), 0..6),
            c in proptest::collection::vec((-5i64..=5, 0u8..4), 0..6),
        ) {
            let lc = |v: &Vec<(i64, u8)>| -> LinComb<u8> {
                v.iter().map(|&(c, g)| (g, Rat::from_int(c))).collect()
            };
            let (a, b, c) = (lc(&a), lc(&b), lc(&c));
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert!(a.add(&b).sub(&b) == a);
            prop_assert!(a.sub(&a).is_zero());
        }
    }
}
