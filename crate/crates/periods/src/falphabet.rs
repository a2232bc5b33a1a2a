//! Decomposition into the model ring Q[f2] ⊗ Q⟨f3, f5, f7, f9⟩ and back.
//!
//! The decomposition is computed recursively: for each odd r the derivation
//! extracts the class of zeta(r), the surviving factor is decomposed at
//! lower weight, and the letter f_r is attached on the left — the position
//! that makes the length-two leading term of zeta(3,5) equal to -5·f5|f3.
//! Logarithms of primes map to the letters ν_p, ζ(2) to f2, and a single
//! leftover Lefschetz factor is carried as an explicit L (with L² = -24 f2).
//!
//! The coradical splitting is fixed by giving every new single-word basis
//! generator a vanishing pure f2-power coefficient; products follow by
//! multiplicativity. The inverse recomposition is obtained by exact linear
//! inversion of the decomposition on candidate monomials.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use crate::exact::{LinComb, Rat, solve_in_span};
use crate::motivic::{
    MotivicError, MotivicExpr, canon_to_expr, derivation_d, mono_to_expr, reduce_mot,
    unipotency_degree,
};
use crate::relations::{Mono, RelationTable};
use crate::words::Composition;

/// Letters of the model alphabet.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FLetter {
    /// f_r for odd r in {3, 5, 7, 9}; degree r.
    F(u8),
    /// ν_p for a prime p; degree 1.
    Nu(u64),
}

impl FLetter {
    pub fn degree(&self) -> u32 {
        match self {
            FLetter::F(r) => *r as u32,
            FLetter::Nu(_) => 1,
        }
    }
}

impl fmt::Display for FLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FLetter::F(r) => write!(f, "f{}", r),
            FLetter::Nu(p) => write!(f, "nu{}", p),
        }
    }
}

/// A model-ring monomial: optional single Lefschetz factor, an f2 power,
/// and a tensor word in the letters.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FMono {
    pub lef1: bool,
    pub f2: u32,
    pub word: Vec<FLetter>,
}

impl FMono {
    pub fn one() -> Self {
        FMono::default()
    }

    pub fn f2_power(k: u32) -> Self {
        FMono { lef1: false, f2: k, word: Vec::new() }
    }

    pub fn letter(l: FLetter) -> Self {
        FMono { lef1: false, f2: 0, word: vec![l] }
    }

    pub fn from_word(word: Vec<FLetter>) -> Self {
        FMono { lef1: false, f2: 0, word }
    }

    /// Degree in the zeta grading (half the Hodge weight).
    pub fn degree(&self) -> u32 {
        self.lef1 as u32 + 2 * self.f2 + self.word.iter().map(|l| l.degree()).sum::<u32>()
    }

    pub fn length(&self) -> usize {
        self.word.len()
    }
}

impl Ord for FMono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.degree(), self.word.len(), &self.word, self.f2, self.lef1).cmp(&(
            other.degree(),
            other.word.len(),
            &other.word,
            other.f2,
            other.lef1,
        ))
    }
}

impl PartialOrd for FMono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FMono {
    /// "f2^2*f5|f3", "L*f3", "1".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.lef1 {
            parts.push("L".into());
        }
        if self.f2 == 1 {
            parts.push("f2".into());
        } else if self.f2 > 1 {
            parts.push(format!("f2^{}", self.f2));
        }
        if !self.word.is_empty() {
            parts.push(
                self.word.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("|"),
            );
        }
        if parts.is_empty() {
            return write!(f, "1");
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Element of the model ring.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FPoly(pub LinComb<FMono>);

impl FPoly {
    pub fn zero() -> Self {
        FPoly(LinComb::zero())
    }

    pub fn one() -> Self {
        FPoly(LinComb::gen(FMono::one()))
    }

    pub fn term(m: FMono, c: Rat) -> Self {
        FPoly(LinComb::term(m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        FPoly(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        FPoly(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        FPoly(self.0.scale(c))
    }

    /// Ring product: shuffle on tensor words, polynomial product on f2, and
    /// L·L = -24·f2.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = LinComb::zero();
        for (a, ca) in self.0.iter() {
            for (b, cb) in other.0.iter() {
                let (lef1, f2_extra, scale) = match (a.lef1, b.lef1) {
                    (true, true) => (false, 1, Rat::from_int(-24)),
                    (x, y) => (x || y, 0, Rat::one()),
                };
                let words = shuffle_letters(&a.word, &b.word);
                for (w, cw) in words.iter() {
                    out.add_term(
                        FMono { lef1, f2: a.f2 + b.f2 + f2_extra, word: w.clone() },
                        &(&(ca * cb) * cw) * &scale,
                    );
                }
            }
        }
        FPoly(out)
    }

    /// The component with tensor length `len`.
    pub fn length_component(&self, len: usize) -> Self {
        FPoly(
            self.0
                .iter()
                .filter(|(m, _)| m.length() == len)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        )
    }

    pub fn max_length(&self) -> usize {
        self.0.iter().map(|(m, _)| m.length()).max().unwrap_or(0)
    }

    /// Attaches the letter on the left of every tensor word.
    pub fn prepend(&self, l: FLetter) -> Self {
        FPoly(self.0.map_gens(|m| {
            let mut word = Vec::with_capacity(m.word.len() + 1);
            word.push(l);
            word.extend_from_slice(&m.word);
            FMono { lef1: m.lef1, f2: m.f2, word }
        }))
    }

    /// Deconcatenation of the tensor word; the f2 and L factors stay on the
    /// left tensor slot.
    pub fn deconcat(&self) -> LinComb<(FMono, FMono)> {
        let mut out = LinComb::zero();
        for (m, c) in self.0.iter() {
            for k in 0..=m.word.len() {
                let left = FMono { lef1: m.lef1, f2: m.f2, word: m.word[..k].to_vec() };
                let right = FMono::from_word(m.word[k..].to_vec());
                out.add_term((left, right), c.clone());
            }
        }
        out
    }

    /// Kills every monomial containing f2 or L (the image modulo ζ(2)).
    pub fn dr_part(&self) -> Self {
        FPoly(
            self.0
                .iter()
                .filter(|(m, _)| m.f2 == 0 && !m.lef1)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for FPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.0.iter() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            if *m == FMono::one() {
                write!(f, "{}", mag)?;
            } else if mag.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", mag, m)?;
            }
        }
        Ok(())
    }
}

fn shuffle_letters(u: &[FLetter], v: &[FLetter]) -> LinComb<Vec<FLetter>> {
    if u.is_empty() {
        return LinComb::gen(v.to_vec());
    }
    if v.is_empty() {
        return LinComb::gen(u.to_vec());
    }
    let mut out = LinComb::zero();
    for (head, rest) in [
        (u[0], shuffle_letters(&u[1..], v)),
        (v[0], shuffle_letters(u, &v[1..])),
    ] {
        for (w, c) in rest.iter() {
            let mut word = Vec::with_capacity(w.len() + 1);
            word.push(head);
            word.extend_from_slice(w);
            out.add_term(word, c.clone());
        }
    }
    out
}

thread_local! {
    static DECOMP_CACHE: RefCell<HashMap<(String, Mono), FPoly>> = RefCell::new(HashMap::new());
}

fn decompose_generator(
    comp: &Composition,
    table: &RelationTable,
) -> Result<FPoly, MotivicError> {
    if comp.0 == vec![(2, 1)] {
        return Ok(FPoly::term(FMono::f2_power(1), Rat::one()));
    }
    let weight = comp.weight();
    let expr = MotivicExpr::zeta(comp)?;
    let mut out = FPoly::zero();
    for r in [3u32, 5, 7, 9] {
        if r > weight {
            break;
        }
        let cr = derivation_d(r, &expr, table)?;
        if cr.is_zero() {
            continue;
        }
        let g = decompose(&cr, table)?;
        out = out.add(&g.prepend(FLetter::F(r as u8)));
    }
    // splitting choice: new generators carry no pure f2-power component
    Ok(out)
}

fn decompose_mono(mono: &Mono, table: &RelationTable) -> Result<FPoly, MotivicError> {
    let key = (table.checksum().to_string(), mono.clone());
    if let Some(hit) = DECOMP_CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(hit);
    }
    let mut acc = FPoly::one();
    for comp in &mono.0 {
        acc = acc.mul(&decompose_generator(comp, table)?);
    }
    DECOMP_CACHE.with(|c| c.borrow_mut().insert(key, acc.clone()));
    Ok(acc)
}

/// Decomposition into the model ring. A ring homomorphism with
/// decompose(ζ(2)) = f2, decompose(ζ(2n+1)) = f_{2n+1},
/// decompose(log p) = ν_p, decompose(L²) = -24·f2.
pub fn decompose(x: &MotivicExpr, table: &RelationTable) -> Result<FPoly, MotivicError> {
    if !x.is_mzv_log() {
        return Err(MotivicError::EulerUnsupported("decompose needs zeta/log words".into()));
    }
    let coords = reduce_mot(x, table)?;
    let mut out = FPoly::zero();
    for ((lef, logs, mono), c) in coords.iter() {
        let mut part = decompose_mono(mono, table)?;
        for &p in logs {
            part = part.mul(&FPoly::term(FMono::letter(FLetter::Nu(p)), Rat::one()));
        }
        // L^a = L^(a mod 2) · (L²)^(a div 2) with L² = -24 f2
        let pairs = lef / 2;
        if pairs > 0 {
            let scale = Rat::from_int(-24).pow(pairs as i32);
            part = part.mul(&FPoly::term(FMono::f2_power(pairs), scale));
        }
        if lef % 2 == 1 {
            part = part.mul(&FPoly::term(
                FMono { lef1: true, f2: 0, word: Vec::new() },
                Rat::one(),
            ));
        }
        out = out.add(&part.scale(c));
    }
    Ok(out)
}

/// Unipotency degree together with the tensor-length component of the
/// decomposition at that degree.
pub fn grc_leading(
    x: &MotivicExpr,
    table: &RelationTable,
) -> Result<(usize, FPoly), MotivicError> {
    let degree = unipotency_degree(x, table)?;
    let full = decompose(x, table)?;
    Ok((degree, full.length_component(degree)))
}

/// Errors of the inverse map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecomposeError {
    WeightTooLarge(u32),
    NotInImage(String),
    Motivic(MotivicError),
}

impl fmt::Display for RecomposeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecomposeError::WeightTooLarge(w) => write!(f, "weight {} too large", w),
            RecomposeError::NotInImage(s) => write!(f, "not in the decomposition image: {}", s),
            RecomposeError::Motivic(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for RecomposeError {}

impl From<MotivicError> for RecomposeError {
    fn from(e: MotivicError) -> Self {
        RecomposeError::Motivic(e)
    }
}

/// Right inverse of [`decompose`]: exact linear inversion on candidate
/// monomials (basis monomials times log and Lefschetz factors) per
/// homogeneous degree.
pub fn recompose(f: &FPoly, table: &RelationTable) -> Result<MotivicExpr, RecomposeError> {
    // split into homogeneous components
    let mut by_degree: HashMap<u32, FPoly> = HashMap::new();
    for (m, c) in f.0.iter() {
        by_degree
            .entry(m.degree())
            .or_insert_with(FPoly::zero)
            .0
            .add_term(m.clone(), c.clone());
    }
    let mut degrees: Vec<u32> = by_degree.keys().cloned().collect();
    degrees.sort_unstable();

    let mut out = MotivicExpr::zero();
    for degree in degrees {
        let target = &by_degree[&degree];
        // primes available for ν letters
        let mut primes: Vec<u64> = target
            .0
            .iter()
            .flat_map(|(m, _)| m.word.iter())
            .filter_map(|l| match l {
                FLetter::Nu(p) => Some(*p),
                _ => None,
            })
            .collect();
        primes.sort_unstable();
        primes.dedup();
        let has_lef = target.0.iter().any(|(m, _)| m.lef1);

        // candidate expressions: L^{0|1} · Π log(p)^{k_p} · basis monomial
        let mut candidates: Vec<MotivicExpr> = Vec::new();
        let mut log_multisets: Vec<Vec<u64>> = vec![Vec::new()];
        for &p in &primes {
            let mut extended = Vec::new();
            for ms in &log_multisets {
                for k in 0..=(degree as usize - ms.len()) {
                    let mut v = ms.clone();
                    v.extend(std::iter::repeat(p).take(k));
                    extended.push(v);
                }
            }
            log_multisets = extended;
        }
        for lef1 in [false, true] {
            if lef1 && !has_lef {
                continue;
            }
            for ms in &log_multisets {
                let used = lef1 as u32 + ms.len() as u32;
                if used > degree {
                    continue;
                }
                let rem = degree - used;
                if rem > table.max_weight() && rem != 0 {
                    return Err(RecomposeError::WeightTooLarge(rem));
                }
                let monos: Vec<Mono> = if rem == 0 {
                    vec![Mono::one()]
                } else {
                    table
                        .basis(rem)
                        .map(|b| b.to_vec())
                        .unwrap_or_default()
                };
                for mono in monos {
                    let mut e = mono_to_expr(&mono);
                    if lef1 {
                        e = e.mul(&MotivicExpr::lefschetz(1));
                    }
                    for &p in ms {
                        e = e.mul(&MotivicExpr::log_prime(p).map_err(RecomposeError::Motivic)?);
                    }
                    candidates.push(e);
                }
            }
        }

        let images: Result<Vec<FPoly>, _> = candidates.iter().map(|e| decompose(e, table)).collect();
        let images = images?;
        let span: Vec<LinComb<FMono>> = images.into_iter().map(|p| p.0).collect();
        let coords = solve_in_span(&target.0, &span)
            .ok_or_else(|| RecomposeError::NotInImage(format!("{}", target)))?;
        for (e, c) in candidates.iter().zip(&coords) {
            out = out.add(&e.scale(c));
        }
    }
    // canonical form
    let reduced = reduce_mot(&out, table)?;
    Ok(canon_to_expr(&reduced))
}
