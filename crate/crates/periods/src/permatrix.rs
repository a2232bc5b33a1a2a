//! Symbolic period matrices, the real Frobenius, and single-valued matrices.
//!
//! Entries live in a commutative polynomial ring over named period
//! generators, localized at the Lefschetz generator L (all diagonals are
//! ±L^k times a rational). The real Frobenius acts generator-wise through a
//! declared involution table (L ↦ -L; functions may be sent to bar-partner
//! generators). The single-valued matrix is the exact symbolic
//! (F∞C)⁻¹·C; the twisted variant multiplies the involution by (-1)^{w/2}
//! on weight-w monomials.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exact::{LinComb, Rat};

/// Errors for period-matrix operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatrixError {
    UnsupportedKind(String),
    UnknownGenerator(String),
    NotInvertible(String),
    MissingWeights(String),
    MissingHodge,
    SizeMismatch { expected: usize, got: usize },
    Parse(String),
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::UnsupportedKind(s) => write!(f, "unsupported builder kind: {}", s),
            MatrixError::UnknownGenerator(s) => write!(f, "unknown generator: {}", s),
            MatrixError::NotInvertible(s) => write!(f, "matrix not invertible: {}", s),
            MatrixError::MissingWeights(s) => write!(f, "missing weight data: {}", s),
            MatrixError::MissingHodge => write!(f, "missing Hodge metadata"),
            MatrixError::SizeMismatch { expected, got } => {
                write!(f, "size mismatch: expected {}, got {}", expected, got)
            }
            MatrixError::Parse(s) => write!(f, "parse error: {}", s),
        }
    }
}

impl std::error::Error for MatrixError {}

/// Image of a generator under the real Frobenius: sign times a generator
/// (itself, or its bar partner).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobImage {
    pub sign: i8,
    pub target: String,
}

/// A named period generator with its (even) Hodge weight and Frobenius
/// image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymGen {
    pub name: String,
    pub weight: i64,
    pub frobenius: FrobImage,
}

/// The generator table of a symbolic period ring. L is distinguished: it is
/// a unit with F∞ L = -L.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymRing {
    gens: BTreeMap<String, SymGen>,
}

impl SymRing {
    pub fn new() -> Self {
        let mut ring = SymRing::default();
        ring.add(SymGen {
            name: "L".into(),
            weight: 2,
            frobenius: FrobImage { sign: -1, target: "L".into() },
        });
        ring
    }

    pub fn add(&mut self, gen: SymGen) {
        self.gens.insert(gen.name.clone(), gen);
    }

    /// Declares a real generator fixed by the Frobenius.
    pub fn add_real(&mut self, name: &str, weight: i64) {
        self.add(SymGen {
            name: name.into(),
            weight,
            frobenius: FrobImage { sign: 1, target: name.into() },
        });
    }

    /// Declares a generator together with its antiholomorphic bar partner,
    /// exchanged by the Frobenius.
    pub fn add_with_bar(&mut self, name: &str, weight: i64) {
        let bar = format!("b{}", name);
        self.add(SymGen {
            name: name.into(),
            weight,
            frobenius: FrobImage { sign: 1, target: bar.clone() },
        });
        self.add(SymGen {
            name: bar.clone(),
            weight,
            frobenius: FrobImage { sign: 1, target: name.into() },
        });
    }

    pub fn get(&self, name: &str) -> Option<&SymGen> {
        self.gens.get(name)
    }

    pub fn generators(&self) -> impl Iterator<Item = &SymGen> {
        self.gens.values()
    }

    /// Verifies the Frobenius table is an involution on generators.
    pub fn validate(&self) -> Result<(), MatrixError> {
        for g in self.gens.values() {
            let img = self
                .gens
                .get(&g.frobenius.target)
                .ok_or_else(|| MatrixError::UnknownGenerator(g.frobenius.target.clone()))?;
            if img.frobenius.target != g.name || img.frobenius.sign != g.frobenius.sign {
                return Err(MatrixError::UnknownGenerator(format!(
                    "frobenius not involutive on {}",
                    g.name
                )));
            }
        }
        Ok(())
    }
}

/// A monomial in the generators; L may carry negative exponents.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymMono(pub BTreeMap<String, i32>);

impl SymMono {
    pub fn one() -> Self {
        SymMono::default()
    }

    pub fn gen(name: &str) -> Self {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), 1);
        SymMono(m)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m = self.0.clone();
        for (g, e) in &other.0 {
            let v = m.entry(g.clone()).or_insert(0);
            *v += e;
            if *v == 0 {
                m.remove(g);
            }
        }
        SymMono(m)
    }

    pub fn inv(&self) -> Self {
        SymMono(self.0.iter().map(|(g, e)| (g.clone(), -e)).collect())
    }

    pub fn weight(&self, ring: &SymRing) -> Result<i64, MatrixError> {
        let mut w = 0i64;
        for (g, e) in &self.0 {
            let gen = ring
                .get(g)
                .ok_or_else(|| MatrixError::UnknownGenerator(g.clone()))?;
            w += gen.weight * *e as i64;
        }
        Ok(w)
    }
}

impl fmt::Display for SymMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(g, e)| if *e == 1 { g.clone() } else { format!("{}^{}", g, e) })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Polynomial in the generators, localized at L.
pub type SymPoly = LinComb<SymMono>;

/// Renders a polynomial in the grammar accepted by [`parse_poly`].
pub fn poly_to_string(p: &SymPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    let mut first = true;
    for (m, c) in p.iter() {
        let neg = c.is_negative();
        let mag = c.abs();
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        if *m == SymMono::one() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&m.to_string());
        } else {
            out.push_str(&format!("{}*{}", mag, m));
        }
    }
    out
}

/// Parses "2*log(2)*L^-1 + 1 - zeta(3)" style polynomials. Factor names may
/// contain parentheses; splitting happens at parenthesis depth zero.
pub fn parse_poly(s: &str) -> Result<SymPoly, MatrixError> {
    let s = s.trim();
    if s == "0" {
        return Ok(LinComb::zero());
    }
    // split into signed terms at depth 0
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    let mut seen_any = false;
    let mut last_significant: Option<char> = None;
    for ch in s.chars() {
        // signs directly after '^', '*' or '/' belong to the factor
        let splittable = !matches!(last_significant, Some('^') | Some('*') | Some('/'));
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 && splittable && seen_any && !cur.trim().is_empty() => {
                terms.push((neg, cur.trim().to_string()));
                cur = String::new();
                neg = ch == '-';
            }
            '-' if depth == 0 && cur.trim().is_empty() => {
                neg = !neg;
            }
            _ => {
                if !ch.is_whitespace() {
                    seen_any = true;
                }
                cur.push(ch);
            }
        }
        if !ch.is_whitespace() {
            last_significant = Some(ch);
        }
    }
    if !cur.trim().is_empty() {
        terms.push((neg, cur.trim().to_string()));
    }
    let mut out: SymPoly = LinComb::zero();
    for (neg, term) in terms {
        // split factors at '*' at depth 0
        let mut factors: Vec<String> = Vec::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        for ch in term.chars() {
            match ch {
                '(' => {
                    depth += 1;
                    cur.push(ch);
                }
                ')' => {
                    depth -= 1;
                    cur.push(ch);
                }
                '*' if depth == 0 => {
                    factors.push(cur.trim().to_string());
                    cur = String::new();
                }
                _ => cur.push(ch),
            }
        }
        if !cur.trim().is_empty() {
            factors.push(cur.trim().to_string());
        }
        let mut coeff = if neg { -Rat::one() } else { Rat::one() };
        let mut mono = SymMono::one();
        for factor in factors {
            if let Ok(r) = Rat::from_str(&factor) {
                coeff = &coeff * &r;
                continue;
            }
            // name[^exp], caret split at depth 0
            let (name, exp) = match split_caret(&factor) {
                Some((n, e)) => {
                    let e: i32 = e
                        .parse()
                        .map_err(|_| MatrixError::Parse(format!("bad exponent in {factor:?}")))?;
                    (n, e)
                }
                None => (factor.as_str(), 1),
            };
            let mut m = BTreeMap::new();
            m.insert(name.trim().to_string(), 0i32);
            let single = SymMono(m);
            let mut powered = SymMono::one();
            let base = SymMono::gen(name.trim());
            for _ in 0..exp.unsigned_abs() {
                powered = powered.mul(&base);
            }
            if exp < 0 {
                powered = powered.inv();
            }
            let _ = single;
            mono = mono.mul(&powered);
        }
        out.add_term(mono, coeff);
    }
    Ok(out)
}

fn split_caret(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '^' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

/// A square period matrix over a symbolic ring, with Hodge metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodMatrix {
    pub ring: SymRing,
    pub entries: Vec<Vec<SymPoly>>,
    pub hodge: Vec<(i32, i32)>,
}

/// Builder kinds for the standard matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum Builder {
    Lefschetz,
    Kummer(Rat),
    Zeta(u32),
    PolylogTower(usize),
}

impl PeriodMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn build(kind: &Builder) -> Result<PeriodMatrix, MatrixError> {
        let mut ring = SymRing::new();
        let l = || LinComb::gen(SymMono::gen("L"));
        let one = || LinComb::gen(SymMono::one());
        let zero = || LinComb::zero();
        match kind {
            Builder::Lefschetz => Ok(PeriodMatrix {
                ring,
                entries: vec![vec![l()]],
                hodge: vec![(1, 1)],
            }),
            Builder::Kummer(alpha) => {
                if alpha.is_zero() || alpha.is_one() || alpha.is_negative() {
                    return Err(MatrixError::UnsupportedKind(format!(
                        "kummer parameter {} must be a positive rational other than 1",
                        alpha
                    )));
                }
                let name = format!("log({})", alpha);
                ring.add_real(&name, 2);
                let entries = vec![
                    vec![one(), LinComb::gen(SymMono::gen(&name))],
                    vec![zero(), l()],
                ];
                Ok(PeriodMatrix { ring, entries, hodge: vec![(0, 0), (1, 1)] })
            }
            Builder::Zeta(n) => {
                if n % 2 == 0 || *n < 3 {
                    return Err(MatrixError::UnsupportedKind(format!(
                        "zeta builder needs an odd integer >= 3, got {}",
                        n
                    )));
                }
                let name = format!("zeta({})", n);
                ring.add_real(&name, 2 * *n as i64);
                let mut lpow = SymMono::one();
                for _ in 0..*n {
                    lpow = lpow.mul(&SymMono::gen("L"));
                }
                let entries = vec![
                    vec![one(), LinComb::gen(SymMono::gen(&name))],
                    vec![zero(), LinComb::gen(lpow)],
                ];
                Ok(PeriodMatrix { ring, entries, hodge: vec![(0, 0), (*n as i32, *n as i32)] })
            }
            Builder::PolylogTower(depth) => {
                if *depth == 0 || *depth > 2 {
                    return Err(MatrixError::UnsupportedKind(format!(
                        "polylog tower depth must be 1 or 2, got {}",
                        depth
                    )));
                }
                ring.add_with_bar("log(x)", 2);
                for k in 1..=*depth {
                    ring.add_with_bar(&format!("Li{}(x)", k), 2 * k as i64);
                }
                let g = |n: &str| LinComb::gen(SymMono::gen(n));
                if *depth == 1 {
                    let entries = vec![vec![one(), g("Li1(x)")], vec![zero(), l()]];
                    return Ok(PeriodMatrix { ring, entries, hodge: vec![(0, 0), (1, 1)] });
                }
                let llog = LinComb::gen(SymMono::gen("L").mul(&SymMono::gen("log(x)")));
                let l2 = LinComb::gen(SymMono::gen("L").mul(&SymMono::gen("L")));
                let entries = vec![
                    vec![one(), g("Li1(x)"), g("Li2(x)")],
                    vec![zero(), l(), llog],
                    vec![zero(), zero(), l2],
                ];
                Ok(PeriodMatrix { ring, entries, hodge: vec![(0, 0), (1, 1), (2, 2)] })
            }
        }
    }

    fn map_entries(
        &self,
        f: impl Fn(&SymPoly) -> Result<SymPoly, MatrixError>,
    ) -> Result<PeriodMatrix, MatrixError> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for row in &self.entries {
            let mut out = Vec::with_capacity(row.len());
            for e in row {
                out.push(f(e)?);
            }
            entries.push(out);
        }
        Ok(PeriodMatrix { ring: self.ring.clone(), entries, hodge: self.hodge.clone() })
    }

    /// Applies the real Frobenius entrywise through the generator table.
    pub fn frobenius(&self) -> Result<PeriodMatrix, MatrixError> {
        self.map_entries(|p| frobenius_poly(p, &self.ring, false))
    }

    /// Frobenius twisted by (-1)^{w/2} on weight-w monomials.
    pub fn frobenius_twisted(&self) -> Result<PeriodMatrix, MatrixError> {
        self.map_entries(|p| frobenius_poly(p, &self.ring, true))
    }

    fn mul_mat(&self, other: &PeriodMatrix) -> PeriodMatrix {
        let n = self.size();
        let mut entries = vec![vec![SymPoly::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: SymPoly = LinComb::zero();
                for k in 0..n {
                    acc.add_assign(&poly_mul(&self.entries[i][k], &other.entries[k][j]));
                }
                entries[i][j] = acc;
            }
        }
        PeriodMatrix { ring: self.ring.clone(), entries, hodge: self.hodge.clone() }
    }

    /// Inverse of an upper-triangular matrix with unit monomial diagonal.
    pub fn inverse_upper(&self) -> Result<PeriodMatrix, MatrixError> {
        let n = self.size();
        for i in 0..n {
            for j in 0..i {
                if !self.entries[i][j].is_zero() {
                    return Err(MatrixError::NotInvertible(format!(
                        "entry ({}, {}) below the diagonal is nonzero",
                        i, j
                    )));
                }
            }
        }
        // diagonal entries must be single monomials (units after localizing
        // at L)
        let mut diag_inv = Vec::with_capacity(n);
        for (i, row) in self.entries.iter().enumerate() {
            let d = &row[i];
            if d.len() != 1 {
                return Err(MatrixError::NotInvertible(format!(
                    "diagonal entry ({}, {}) is not a unit",
                    i, i
                )));
            }
            let (m, c) = d.iter().next().unwrap();
            diag_inv.push(LinComb::term(m.inv(), c.recip()));
        }
        let mut inv = vec![vec![SymPoly::zero(); n]; n];
        for j in (0..n).rev() {
            inv[j][j] = diag_inv[j].clone();
            for i in (0..j).rev() {
                let mut acc: SymPoly = LinComb::zero();
                for k in i + 1..=j {
                    acc.add_assign(&poly_mul(&self.entries[i][k], &inv[k][j]));
                }
                inv[i][j] = poly_mul(&diag_inv[i], &acc).neg();
            }
        }
        Ok(PeriodMatrix { ring: self.ring.clone(), entries: inv, hodge: self.hodge.clone() })
    }

    /// The single-valued matrix (F∞ C)⁻¹ C, exact and symbolic.
    pub fn single_valued(&self) -> Result<PeriodMatrix, MatrixError> {
        let f = self.frobenius()?;
        Ok(f.inverse_upper()?.mul_mat(self))
    }

    /// The twisted single-valued matrix, using the Frobenius twisted by
    /// (-1)^{w/2} in weight w.
    pub fn single_valued_twisted(&self) -> Result<PeriodMatrix, MatrixError> {
        let f = self.frobenius_twisted()?;
        Ok(f.inverse_upper()?.mul_mat(self))
    }

    /// Left multiplication by a rational matrix (monodromy action).
    pub fn monodromy_apply(&self, g: &[Vec<Rat>]) -> Result<PeriodMatrix, MatrixError> {
        let n = self.size();
        if g.len() != n || g.iter().any(|r| r.len() != n) {
            return Err(MatrixError::SizeMismatch { expected: n, got: g.len() });
        }
        let mut entries = vec![vec![SymPoly::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: SymPoly = LinComb::zero();
                for k in 0..n {
                    if g[i][k].is_zero() {
                        continue;
                    }
                    acc.add_assign(&self.entries[k][j].scale(&g[i][k]));
                }
                entries[i][j] = acc;
            }
        }
        Ok(PeriodMatrix { ring: self.ring.clone(), entries, hodge: self.hodge.clone() })
    }

    /// Hodge polynomial, rank, and determinant class (modulo rational
    /// scalars).
    pub fn invariants(&self) -> Result<Invariants, MatrixError> {
        if self.hodge.is_empty() {
            return Err(MatrixError::MissingHodge);
        }
        if self.hodge.len() != self.size() {
            return Err(MatrixError::SizeMismatch {
                expected: self.size(),
                got: self.hodge.len(),
            });
        }
        let mut hodge_poly: LinComb<(i32, i32)> = LinComb::zero();
        for &(p, q) in &self.hodge {
            hodge_poly.add_term((p, q), Rat::one());
        }
        let mut det = SymMono::one();
        for (i, row) in self.entries.iter().enumerate() {
            let d = &row[i];
            if d.len() != 1 {
                return Err(MatrixError::NotInvertible(format!(
                    "diagonal entry ({}, {}) is not a unit",
                    i, i
                )));
            }
            let (m, _) = d.iter().next().unwrap();
            det = det.mul(m);
        }
        Ok(Invariants { hodge_poly, rank: self.size(), det })
    }

    // -- serialization -------------------------------------------------------

    pub fn to_json(&self) -> String {
        let doc = MatrixDoc {
            generators: self.ring.generators().cloned().collect(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(poly_to_string).collect())
                .collect(),
            hodge: self.hodge.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, MatrixError> {
        let doc: MatrixDoc =
            serde_json::from_str(s).map_err(|e| MatrixError::Parse(e.to_string()))?;
        let mut ring = SymRing::new();
        for g in doc.generators {
            ring.add(g);
        }
        ring.validate()?;
        let n = doc.entries.len();
        let mut entries = Vec::with_capacity(n);
        for row in &doc.entries {
            if row.len() != n {
                return Err(MatrixError::SizeMismatch { expected: n, got: row.len() });
            }
            let parsed: Result<Vec<SymPoly>, _> = row.iter().map(|s| parse_poly(s)).collect();
            entries.push(parsed?);
        }
        let m = PeriodMatrix { ring, entries, hodge: doc.hodge };
        // every generator used in the entries must be declared
        for row in &m.entries {
            for e in row {
                for (mono, _) in e.iter() {
                    for name in mono.0.keys() {
                        if m.ring.get(name).is_none() {
                            return Err(MatrixError::UnknownGenerator(name.clone()));
                        }
                    }
                }
            }
        }
        Ok(m)
    }
}

/// Result of [`PeriodMatrix::invariants`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    /// Coefficients of r^p s^q.
    pub hodge_poly: LinComb<(i32, i32)>,
    pub rank: usize,
    /// Product of the diagonal units modulo rational scalars.
    pub det: SymMono,
}

impl Invariants {
    pub fn hodge_string(&self) -> String {
        let mut parts = Vec::new();
        for ((p, q), c) in self.hodge_poly.iter() {
            let var = match (p, q) {
                (0, 0) => "1".to_string(),
                _ => {
                    let rp = match p {
                        0 => String::new(),
                        1 => "r".into(),
                        _ => format!("r^{}", p),
                    };
                    let sq = match q {
                        0 => String::new(),
                        1 => "s".into(),
                        _ => format!("s^{}", q),
                    };
                    format!("{}{}", rp, sq)
                }
            };
            if c.is_one() {
                parts.push(var);
            } else {
                parts.push(format!("{}*{}", c, var));
            }
        }
        parts.join(" + ")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    generators: Vec<SymGen>,
    entries: Vec<Vec<String>>,
    hodge: Vec<(i32, i32)>,
}

pub fn poly_mul(a: &SymPoly, b: &SymPoly) -> SymPoly {
    let mut out = LinComb::zero();
    for (ma, ca) in a.iter() {
        for (mb, cb) in b.iter() {
            out.add_term(ma.mul(mb), ca * cb);
        }
    }
    out
}

fn frobenius_poly(p: &SymPoly, ring: &SymRing, twisted: bool) -> Result<SymPoly, MatrixError> {
    let mut out = LinComb::zero();
    for (m, c) in p.iter() {
        let mut sign = Rat::one();
        let mut image = SymMono::one();
        for (g, e) in &m.0 {
            let gen = ring
                .get(g)
                .ok_or_else(|| MatrixError::UnknownGenerator(g.clone()))?;
            if gen.frobenius.sign < 0 && e % 2 != 0 {
                sign = -sign;
            }
            let mut t = BTreeMap::new();
            t.insert(gen.frobenius.target.clone(), *e);
            image = image.mul(&SymMono(t));
        }
        if twisted {
            let w = m.weight(ring)?;
            if w % 2 != 0 {
                return Err(MatrixError::MissingWeights(format!(
                    "monomial {} has odd weight {}",
                    m, w
                )));
            }
            if (w / 2) % 2 != 0 {
                sign = -sign;
            }
        }
        out.add_term(image, &sign * c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> SymPoly {
        parse_poly(s).unwrap()
    }

    fn assert_matrix(m: &PeriodMatrix, rows: &[&[&str]]) {
        assert_eq!(m.size(), rows.len());
        for (i, row) in rows.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                assert_eq!(
                    m.entries[i][j],
                    poly(cell),
                    "entry ({}, {}): got {}",
                    i,
                    j,
                    poly_to_string(&m.entries[i][j])
                );
            }
        }
    }

    #[test]
    fn builders_match_standard_forms() {
        let k = PeriodMatrix::build(&Builder::Kummer(Rat::from_int(2))).unwrap();
        assert_matrix(&k, &[&["1", "log(2)"], &["0", "L"]]);
        let z = PeriodMatrix::build(&Builder::Zeta(3)).unwrap();
        assert_matrix(&z, &[&["1", "zeta(3)"], &["0", "L^3"]]);
        let p = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        assert_matrix(
            &p,
            &[
                &["1", "Li1(x)", "Li2(x)"],
                &["0", "L", "L*log(x)"],
                &["0", "0", "L^2"],
            ],
        );
        assert!(PeriodMatrix::build(&Builder::Zeta(4)).is_err());
        assert!(PeriodMatrix::build(&Builder::PolylogTower(3)).is_err());
    }

    #[test]
    fn frobenius_examples() {
        let k = PeriodMatrix::build(&Builder::Kummer(Rat::from_int(2))).unwrap();
        let f = k.frobenius().unwrap();
        assert_matrix(&f, &[&["1", "log(2)"], &["0", "-L"]]);
        // involution
        assert_eq!(f.frobenius().unwrap(), k);
        // dilog tower: bars and signs
        let p = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        let f = p.frobenius().unwrap();
        assert_matrix(
            &f,
            &[
                &["1", "bLi1(x)", "bLi2(x)"],
                &["0", "-L", "-L*blog(x)"],
                &["0", "0", "L^2"],
            ],
        );
        assert_eq!(f.frobenius().unwrap(), p);
    }

    #[test]
    fn single_valued_kummer_and_zeta() {
        let k = PeriodMatrix::build(&Builder::Kummer(Rat::from_int(2))).unwrap();
        let sv = k.single_valued().unwrap();
        assert_matrix(&sv, &[&["1", "2*log(2)"], &["0", "-1"]]);
        let z = PeriodMatrix::build(&Builder::Zeta(3)).unwrap();
        let sv = z.single_valued().unwrap();
        assert_matrix(&sv, &[&["1", "2*zeta(3)"], &["0", "-1"]]);
    }

    #[test]
    fn single_valued_dilog_top_right() {
        let p = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        let sv = p.single_valued().unwrap();
        let expected = poly("Li2(x) - bLi2(x) + log(x)*bLi1(x) + blog(x)*bLi1(x)");
        assert_eq!(sv.entries[0][2], expected, "got {}", poly_to_string(&sv.entries[0][2]));
        // middle entry is s(L·log^dr) = s(L)·s(log^dr) = -(log + blog)
        assert_eq!(sv.entries[1][2], poly("-log(x) - blog(x)"));
        assert_eq!(sv.entries[2][2], poly("1"));
        assert_eq!(sv.entries[1][1], poly("-1"));
    }

    #[test]
    fn twisted_single_valued() {
        let l = PeriodMatrix::build(&Builder::Lefschetz).unwrap();
        let sv = l.single_valued_twisted().unwrap();
        assert_matrix(&sv, &[&["1"]]);
        // untwisted gives -1
        assert_matrix(&l.single_valued().unwrap(), &[&["-1"]]);
        let z = PeriodMatrix::build(&Builder::Zeta(3)).unwrap();
        let sv = z.single_valued_twisted().unwrap();
        assert_matrix(&sv, &[&["1", "2*zeta(3)"], &["0", "1"]]);
        // identity is a fixed point
        let mut id = PeriodMatrix::build(&Builder::Kummer(Rat::from_int(3))).unwrap();
        id.entries = vec![
            vec![poly("1"), poly("0")],
            vec![poly("0"), poly("1")],
        ];
        assert_eq!(id.single_valued_twisted().unwrap().entries, id.entries);
    }

    #[test]
    fn sv_invariant_under_rational_basis_change() {
        // sv(P·C) = sv(C) for invertible rational upper-triangular
        // weight-respecting P
        let c = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        let sv = c.single_valued().unwrap();
        let ps: [[[i64; 3]; 3]; 3] = [
            [[1, 2, 0], [0, 1, 0], [0, 0, 1]],
            [[1, 0, 5], [0, 1, -3], [0, 0, 1]],
            [[2, 1, 1], [0, 3, 2], [0, 0, 5]],
        ];
        for p in &ps {
            let g: Vec<Vec<Rat>> =
                p.iter().map(|row| row.iter().map(|&v| Rat::from_int(v)).collect()).collect();
            let pc = c.monodromy_apply(&g).unwrap();
            assert_eq!(pc.single_valued().unwrap().entries, sv.entries);
        }
    }

    #[test]
    fn monodromy_single_valuedness() {
        let c = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        let sv = c.single_valued().unwrap();
        let gamma0 = vec![
            vec![Rat::one(), Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::zero(), Rat::one()],
        ];
        let gamma1 = vec![
            vec![Rat::one(), Rat::zero(), Rat::zero()],
            vec![Rat::zero(), Rat::one(), Rat::one()],
            vec![Rat::zero(), Rat::zero(), Rat::one()],
        ];
        for g in [gamma0, gamma1] {
            let moved = c.monodromy_apply(&g).unwrap();
            assert_eq!(moved.single_valued().unwrap().entries, sv.entries);
        }
        // composition law (g1 g2)·m = g1·(g2·m)
        let g1 = vec![
            vec![Rat::one(), Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::one(), Rat::zero()],
            vec![Rat::zero(), Rat::zero(), Rat::one()],
        ];
        let g2 = vec![
            vec![Rat::one(), Rat::zero(), Rat::zero()],
            vec![Rat::zero(), Rat::one(), Rat::one()],
            vec![Rat::zero(), Rat::zero(), Rat::one()],
        ];
        let mut g1g2 = vec![vec![Rat::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    g1g2[i][j] = &g1g2[i][j] + &(&g1[i][k] * &g2[k][j]);
                }
            }
        }
        let lhs = c.monodromy_apply(&g1g2).unwrap();
        let rhs = c.monodromy_apply(&g2).unwrap().monodromy_apply(&g1).unwrap();
        assert_eq!(lhs.entries, rhs.entries);
        // identity is a fixed point
        let id: Vec<Vec<Rat>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        assert_eq!(c.monodromy_apply(&id).unwrap().entries, c.entries);
        // size mismatch is rejected
        assert!(matches!(
            c.monodromy_apply(&[vec![Rat::one()]]),
            Err(MatrixError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn frobenius_reality_of_sv() {
        // F∞(sv) = sv⁻¹ since sv = (F C)⁻¹ C
        for b in [Builder::Kummer(Rat::from_int(2)), Builder::Zeta(3), Builder::PolylogTower(2)] {
            let c = PeriodMatrix::build(&b).unwrap();
            let sv = c.single_valued().unwrap();
            let lhs = sv.frobenius().unwrap();
            let rhs = sv.inverse_upper().unwrap();
            assert_eq!(lhs.entries, rhs.entries, "{:?}", b);
        }
    }

    #[test]
    fn invariants_examples() {
        // Tate object Q(-n): 1×1 matrix [L^n]
        let mut ring = SymRing::new();
        ring.add_real("unused", 0);
        let tate3 = PeriodMatrix {
            ring,
            entries: vec![vec![poly("L^3")]],
            hodge: vec![(3, 3)],
        };
        let inv = tate3.invariants().unwrap();
        assert_eq!(inv.rank, 1);
        assert_eq!(inv.hodge_string(), "r^3s^3");

        let k = PeriodMatrix::build(&Builder::Kummer(Rat::from_int(2))).unwrap();
        let inv = k.invariants().unwrap();
        assert_eq!(inv.rank, 2);
        assert_eq!(inv.hodge_string(), "1 + rs");
        assert_eq!(inv.det, SymMono::gen("L"));

        let p = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        let inv = p.invariants().unwrap();
        assert_eq!(inv.rank, 3);
        assert_eq!(inv.hodge_string(), "1 + rs + r^2s^2");
        // h symmetric in r, s on all builders
        for ((pw, qw), _) in inv.hodge_poly.iter() {
            assert_eq!(inv.hodge_poly.coeff(&(*qw, *pw)), inv.hodge_poly.coeff(&(*pw, *qw)));
        }
    }

    #[test]
    fn json_round_trip() {
        let p = PeriodMatrix::build(&Builder::PolylogTower(2)).unwrap();
        let json = p.to_json();
        let back = PeriodMatrix::from_json(&json).unwrap();
        assert_eq!(p, back);
        // renaming a declared generator leaves the entries dangling
        let bad = json.replace("\"name\": \"Li1(x)\"", "\"name\": \"LiX(x)\"");
        assert!(PeriodMatrix::from_json(&bad).is_err());
    }

    #[test]
    fn poly_parser_round_trip() {
        for s in ["0", "1", "-1", "2*log(2)", "L^-1", "Li2(x) - bLi2(x) + 3/2*L^2*log(x)"] {
            let p = poly(s);
            let back = parse_poly(&poly_to_string(&p)).unwrap();
            assert_eq!(p, back, "{}", s);
        }
    }
}
