//! Datamining of exact Q-linear relations among multiple zeta values.
//!
//! Relations are generated from (a) shuffle products of admissible
//! iterated-integral words, (b) quasi-shuffle products of admissible
//! compositions, and (c) the comparison of shuffle- and stuffle-regularized
//! values with a single trailing 1 (the T-free parts agree). Exact row
//! reduction then yields, per weight, a basis of monomials in the single-zeta
//! generators ζ(2), ζ(3), ζ(5), ζ(7), ζ(9) and the weight-8 generator
//! ζ(3,5), together with a reduction map for every admissible word.
//!
//! The achieved dimensions are checked against (1,1,1,2,2,3,4,5) for weights
//! 2..9; a mismatch aborts loudly rather than producing a wrong table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::exact::{LinComb, Rat, SparseMat};
use crate::motivic::{MotivicExpr, integral_word, regularize};
use crate::words::{Composition, Word, shuffle, stuffle};

/// Expected basis sizes for weights 2..=9.
const EXPECTED_DIMS: [usize; 8] = [1, 1, 1, 2, 2, 3, 4, 5];

pub const MAX_SUPPORTED_WEIGHT: u32 = 9;

/// Errors raised by datamining and reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationError {
    /// The generated relations do not cut the space down to the expected
    /// dimension at this weight; the generator set is insufficient.
    DimensionMismatch { weight: u32, expected: usize, got: usize },
    WeightTooLarge(u32),
    NotMzv(String),
    CacheCorrupt(String),
}

impl fmt::Display for RelationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationError::DimensionMismatch { weight, expected, got } => write!(
                f,
                "dimension mismatch at weight {}: expected {}, got {}",
                weight, expected, got
            ),
            RelationError::WeightTooLarge(w) => write!(f, "weight {} too large", w),
            RelationError::NotMzv(s) => write!(f, "not in the zeta subring: {}", s),
            RelationError::CacheCorrupt(s) => write!(f, "cache corrupt: {}", s),
        }
    }
}

impl std::error::Error for RelationError {}

/// A basis monomial: a sorted multiset of single-zeta generators.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Mono(pub Vec<Composition>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn generator(c: &Composition) -> Self {
        Mono(vec![c.clone()])
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|c| c.weight()).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort();
        Mono(v)
    }

    pub fn contains_zeta2(&self) -> bool {
        self.0.iter().any(|c| c.0 == vec![(2, 1)])
    }

    /// Total depth of all factors (controls the sign versus word values).
    pub fn total_depth(&self) -> usize {
        self.0.iter().map(|c| c.depth()).sum()
    }

    /// The monomial value as a combination of iterated-integral words:
    /// Π ζ(c_i) = (-1)^{Σ depths} × shuffle product of the integral words.
    pub fn to_word_combination(&self) -> LinComb<Word> {
        let mut acc = LinComb::gen(Word::empty());
        for c in &self.0 {
            let w = integral_word(c);
            acc = crate::words::shuffle_lc(&acc, &LinComb::gen(w));
        }
        if self.total_depth() % 2 == 1 { acc.neg() } else { acc }
    }
}

impl fmt::Display for Mono {
    /// "1", "zeta(3)", "zeta(2)^2*zeta(3,5)".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            let count = j - i;
            if count == 1 {
                parts.push(format!("{}", self.0[i]));
            } else {
                parts.push(format!("{}^{}", self.0[i], count));
            }
            i = j;
        }
        write!(f, "{}", parts.join("*"))
    }
}

impl FromStr for Mono {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "1" {
            return Ok(Mono::one());
        }
        let mut factors = Vec::new();
        for piece in s.split('*') {
            let piece = piece.trim();
            let (zeta, pow) = match piece.split_once('^') {
                Some((z, p)) => (z, p.parse::<usize>().map_err(|e| e.to_string())?),
                None => (piece, 1),
            };
            let zeta = zeta.trim();
            let inner = zeta
                .strip_prefix("zeta(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| format!("bad monomial factor {piece:?}"))?;
            let parts: Result<Vec<i64>, _> = inner.split(',').map(|t| t.trim().parse::<i64>()).collect();
            let comp = Composition::from_parts(&parts.map_err(|e| e.to_string())?);
            for _ in 0..pow {
                factors.push(comp.clone());
            }
        }
        factors.sort();
        Ok(Mono(factors))
    }
}

/// Per-weight slice of the relation table.
#[derive(Clone, Debug)]
struct WeightSlice {
    basis: Vec<Mono>,
    /// Reduction of every admissible word of this weight: the word's
    /// iterated-integral value on the basis monomial values.
    reduction: BTreeMap<Word, LinComb<Mono>>,
}

/// Provenance: generator counts and the pivot log of each elimination.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub rows_per_weight: BTreeMap<u32, usize>,
    pub pivot_log: BTreeMap<u32, String>,
    pub generator_set: String,
}

/// Exact reduction table for multiple zeta values up to a maximal weight.
#[derive(Clone, Debug)]
pub struct RelationTable {
    max_weight: u32,
    slices: BTreeMap<u32, WeightSlice>,
    provenance: Provenance,
    checksum: String,
}

/// Designated new single-zeta generator at each weight, if any.
fn new_generator(weight: u32) -> Option<Composition> {
    match weight {
        2 | 3 | 5 | 7 | 9 => Some(Composition::from_parts(&[weight as i64])),
        8 => Some(Composition::from_parts(&[3, 5])),
        _ => None,
    }
}

/// All admissible iterated-integral words of the given weight over {0,1},
/// sorted: first letter 1, last letter 0.
pub fn admissible_words(weight: u32) -> Vec<Word> {
    let w = weight as usize;
    let mut out = Vec::new();
    if w < 2 {
        return out;
    }
    for bits in 0..(1u32 << (w - 2)) {
        let mut letters = vec![1i8];
        for i in 0..w - 2 {
            letters.push(((bits >> i) & 1) as i8);
        }
        letters.push(0);
        out.push(Word(letters));
    }
    out.sort();
    out
}

/// All monomials of the given total weight in the designated generators of
/// strictly smaller weight.
fn product_monomials(weight: u32) -> Vec<Mono> {
    let gens: Vec<Composition> = (2..weight).filter_map(new_generator).collect();
    let mut out = Vec::new();
    let mut current: Vec<Composition> = Vec::new();
    fn rec(
        gens: &[Composition],
        from: usize,
        rem: u32,
        current: &mut Vec<Composition>,
        out: &mut Vec<Mono>,
    ) {
        if rem == 0 {
            if !current.is_empty() {
                let mut v = current.clone();
                v.sort();
                out.push(Mono(v));
            }
            return;
        }
        for i in from..gens.len() {
            let gw = gens[i].weight();
            if gw <= rem {
                current.push(gens[i].clone());
                rec(gens, i, rem - gw, current, out);
                current.pop();
            }
        }
    }
    rec(&gens, 0, weight, &mut current, &mut out);
    out.sort();
    out.dedup();
    out
}

impl RelationTable {
    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn basis(&self, weight: u32) -> Option<&[Mono]> {
        self.slices.get(&weight).map(|s| s.basis.as_slice())
    }

    /// Basis sizes for weights 2..=max_weight.
    pub fn dims(&self) -> Vec<usize> {
        (2..=self.max_weight)
            .map(|w| self.slices[&w].basis.len())
            .collect()
    }

    /// All stored reductions at a weight (word, coordinates).
    pub fn reductions(&self, weight: u32) -> impl Iterator<Item = (&Word, &LinComb<Mono>)> {
        self.slices
            .get(&weight)
            .into_iter()
            .flat_map(|s| s.reduction.iter())
    }

    /// The iterated-integral value of a {0,1}-word on the basis monomials.
    /// Divergent words are shuffle-regularized first.
    pub fn reduce_word(&self, w: &Word) -> Result<LinComb<Mono>, RelationError> {
        if w.is_empty() {
            return Ok(LinComb::gen(Mono::one()));
        }
        if w.0.iter().any(|&a| a != 0 && a != 1) {
            return Err(RelationError::NotMzv(format!("{}", w)));
        }
        let weight = w.len() as u32;
        if weight > self.max_weight {
            return Err(RelationError::WeightTooLarge(weight));
        }
        if weight == 1 {
            // weight-one words regularize to zero
            return Ok(LinComb::zero());
        }
        let reg = regularize(0, w, 1).expect("letters validated");
        let mut out = LinComb::zero();
        for (word, c) in reg.iter() {
            let slice = &self.slices[&weight];
            let red = slice
                .reduction
                .get(word)
                .unwrap_or_else(|| panic!("admissible word {} missing from table", word));
            for (m, d) in red.iter() {
                out.add_term(m.clone(), c * d);
            }
        }
        Ok(out)
    }

    /// Exact coordinates of an expression from the zeta subring on the basis
    /// monomials; linear, idempotent on basis monomials.
    pub fn reduce_to_basis(&self, x: &MotivicExpr) -> Result<LinComb<Mono>, RelationError> {
        let mut out = LinComb::zero();
        for (g, c) in x.0.iter() {
            if g.lef != 0 || !g.logs.is_empty() {
                return Err(RelationError::NotMzv(
                    "generator carries Lefschetz or logarithm factors".into(),
                ));
            }
            let red = self.reduce_word(&g.word)?;
            for (m, d) in red.iter() {
                out.add_term(m.clone(), c * d);
            }
        }
        Ok(out)
    }

    /// Generates the table up to `max_weight` by regularized double shuffle.
    pub fn datamine(max_weight: u32) -> Result<Self, RelationError> {
        if !(2..=MAX_SUPPORTED_WEIGHT).contains(&max_weight) {
            return Err(RelationError::WeightTooLarge(max_weight));
        }
        let mut slices: BTreeMap<u32, WeightSlice> = BTreeMap::new();
        let mut provenance = Provenance {
            generator_set: "shuffle + stuffle + single-trailing-1 comparison".into(),
            ..Default::default()
        };

        for weight in 2..=max_weight {
            let words = admissible_words(weight);
            let designated = new_generator(weight).map(|c| integral_word(&c));
            let products = product_monomials(weight);

            // column layout: plain words, then the designated word, then
            // product monomials
            let mut word_cols: Vec<Word> = words
                .iter()
                .filter(|w| Some(*w) != designated.as_ref())
                .cloned()
                .collect();
            if let Some(d) = &designated {
                word_cols.push(d.clone());
            }
            let n_plain = word_cols.len() - designated.is_some() as usize;
            let ncols = word_cols.len() + products.len();
            let col_of_word: BTreeMap<&Word, usize> =
                word_cols.iter().enumerate().map(|(i, w)| (w, i)).collect();
            let col_of_mono: BTreeMap<&Mono, usize> = products
                .iter()
                .enumerate()
                .map(|(i, m)| (m, i + word_cols.len()))
                .collect();

            let lower_value = |w: &Word, slices: &BTreeMap<u32, WeightSlice>| -> LinComb<Mono> {
                let wt = w.len() as u32;
                if wt == 0 {
                    return LinComb::gen(Mono::one());
                }
                slices[&wt].reduction[w].clone()
            };

            let mut rows: BTreeSet<LinComb<usize>> = BTreeSet::new();
            let push_row = |row: LinComb<usize>, rows: &mut BTreeSet<LinComb<usize>>| {
                if !row.is_zero() {
                    rows.insert(row);
                }
            };

            // (a) shuffle products of admissible words of lower weights
            for w1 in 2..=weight.saturating_sub(2) {
                let w2 = weight - w1;
                if w2 < 2 || w1 > w2 {
                    continue;
                }
                let us = admissible_words(w1);
                let vs = admissible_words(w2);
                for u in &us {
                    for v in &vs {
                        if w1 == w2 && u > v {
                            continue;
                        }
                        let mut row: LinComb<usize> = LinComb::zero();
                        for (s, c) in shuffle(u, v).iter() {
                            row.add_term(col_of_word[s], c.clone());
                        }
                        let pu = lower_value(u, &slices);
                        let pv = lower_value(v, &slices);
                        for (mu, cu) in pu.iter() {
                            for (mv, cv) in pv.iter() {
                                let m = mu.mul(mv);
                                row.add_term(col_of_mono[&m], -&(cu * cv));
                            }
                        }
                        push_row(row, &mut rows);
                    }
                }
            }

            // (b) quasi-shuffle products of admissible compositions
            for w1 in 2..=weight.saturating_sub(2) {
                let w2 = weight - w1;
                if w2 < 2 || w1 > w2 {
                    continue;
                }
                let cs1 = crate::words::admissible_compositions(w1);
                let cs2 = crate::words::admissible_compositions(w2);
                for c1 in &cs1 {
                    for c2 in &cs2 {
                        if w1 == w2 && c1 > c2 {
                            continue;
                        }
                        let mut row: LinComb<usize> = LinComb::zero();
                        for (t, c) in stuffle(c1, c2).iter() {
                            let sign = if t.depth() % 2 == 1 { -Rat::one() } else { Rat::one() };
                            row.add_term(col_of_word[&integral_word(t)], &sign * c);
                        }
                        let sign12 = if (c1.depth() + c2.depth()) % 2 == 1 {
                            -Rat::one()
                        } else {
                            Rat::one()
                        };
                        let pu = lower_value(&integral_word(c1), &slices);
                        let pv = lower_value(&integral_word(c2), &slices);
                        for (mu, cu) in pu.iter() {
                            for (mv, cv) in pv.iter() {
                                let m = mu.mul(mv);
                                row.add_term(col_of_mono[&m], -&(&sign12 * &(cu * cv)));
                            }
                        }
                        push_row(row, &mut rows);
                    }
                }
            }

            // (c) comparison of the two regularizations of zeta(c, 1):
            // the T-free parts of the shuffle- and stuffle-regularized
            // values agree when only a single trailing 1 is present
            for c in crate::words::admissible_compositions(weight - 1) {
                let r = c.depth();
                // divergent composition (c, 1) as a word, shuffle-regularized
                let mut div_parts = c.0.clone();
                div_parts.push((1, 1));
                let div_word = integral_word(&Composition(div_parts.clone()));
                let mut row: LinComb<usize> = LinComb::zero();
                for (word, coeff) in regularize(0, &div_word, 1).expect("mzv letters").iter() {
                    row.add_term(col_of_word[word], coeff.clone());
                }
                // stuffle side: zeta_*(c,1)|_{T=0} = -Σ over the other terms
                // of (1) * c; as integral words with the (-1)^depth signs,
                // times the overall (-1)^{r+1}
                let one = Composition(vec![(1, 1)]);
                let outer = if (r + 1) % 2 == 1 { -Rat::one() } else { Rat::one() };
                for (t, coeff) in stuffle(&one, &c).iter() {
                    if t.0 == div_parts {
                        let residual = coeff - &Rat::one();
                        if residual.is_zero() {
                            continue;
                        }
                        // multiplicity beyond the divergent term itself
                        let sign = if t.depth() % 2 == 1 { -Rat::one() } else { Rat::one() };
                        row.add_term(
                            col_of_word[&integral_word(t)],
                            &(&outer * &sign) * &residual,
                        );
                        continue;
                    }
                    let sign = if t.depth() % 2 == 1 { -Rat::one() } else { Rat::one() };
                    row.add_term(col_of_word[&integral_word(t)], &(&outer * &sign) * coeff);
                }
                push_row(row, &mut rows);
            }

            // exact elimination
            let mut mat = SparseMat::new(ncols);
            let row_count = rows.len();
            for row in rows {
                mat.push_row(row);
            }
            let rref = mat.rref();

            // every plain word column must be a pivot, nothing else
            let expected_pivots: Vec<usize> = (0..n_plain).collect();
            let dim = ncols - rref.rank;
            let expected_dim = EXPECTED_DIMS[(weight - 2) as usize];
            if rref.pivots != expected_pivots || dim != expected_dim {
                return Err(RelationError::DimensionMismatch {
                    weight,
                    expected: expected_dim,
                    got: dim,
                });
            }

            // assemble the per-weight slice
            let mut basis: Vec<Mono> = Vec::new();
            if let Some(c) = new_generator(weight) {
                basis.push(Mono::generator(&c));
            }
            basis.extend(products.iter().cloned());
            basis.sort();

            // value of a free column on the basis
            let free_value = |col: usize| -> LinComb<Mono> {
                if col < word_cols.len() {
                    // the designated word: value (-1)^depth zeta(gen)
                    let c = new_generator(weight).expect("free word column is designated");
                    let sign = if c.depth() % 2 == 1 { -Rat::one() } else { Rat::one() };
                    LinComb::term(Mono::generator(&c), sign)
                } else {
                    LinComb::gen(products[col - word_cols.len()].clone())
                }
            };

            let mut reduction: BTreeMap<Word, LinComb<Mono>> = BTreeMap::new();
            for (row, &pivot) in rref.reduced.rows.iter().zip(&rref.pivots) {
                let mut value = LinComb::zero();
                for (&col, c) in row.iter() {
                    if col == pivot {
                        continue;
                    }
                    let neg = -c;
                    for (m, d) in free_value(col).iter() {
                        value.add_term(m.clone(), &neg * d);
                    }
                }
                reduction.insert(word_cols[pivot].clone(), value);
            }
            if let Some(d) = &designated {
                reduction.insert(d.clone(), free_value(n_plain));
            }
            debug_assert_eq!(reduction.len(), words.len());

            provenance.rows_per_weight.insert(weight, row_count);
            provenance.pivot_log.insert(
                weight,
                format!(
                    "ncols={} rank={} free={} designated={}",
                    ncols,
                    rref.rank,
                    dim,
                    designated.as_ref().map(|w| w.to_string()).unwrap_or_else(|| "-".into())
                ),
            );
            slices.insert(weight, WeightSlice { basis, reduction });
        }

        let mut table = RelationTable {
            max_weight,
            slices,
            provenance,
            checksum: String::new(),
        };
        table.checksum = table.compute_checksum();
        Ok(table)
    }

    // -- cache serialization ------------------------------------------------

    fn canonical_payload(&self) -> CacheDoc {
        let mut weights = Vec::new();
        for (&w, slice) in &self.slices {
            let basis: Vec<String> = slice.basis.iter().map(|m| m.to_string()).collect();
            let mut reduction = Vec::new();
            for (word, lc) in &slice.reduction {
                let coords: Vec<(String, String)> = lc
                    .iter()
                    .map(|(m, c)| (m.to_string(), c.to_string()))
                    .collect();
                reduction.push(CacheRow { word: word_string(word), coords });
            }
            weights.push(CacheWeight { weight: w, basis, reduction });
        }
        CacheDoc {
            version: CACHE_VERSION.into(),
            max_weight: self.max_weight,
            weights,
            provenance: self.provenance.clone(),
            checksum: String::new(),
        }
    }

    fn compute_checksum(&self) -> String {
        let doc = self.canonical_payload();
        let body = serde_json::to_string(&doc).expect("serializable");
        format!("{:016x}", fnv1a64(body.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        let mut doc = self.canonical_payload();
        doc.checksum = self.checksum.clone();
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, RelationError> {
        let doc: CacheDoc =
            serde_json::from_str(s).map_err(|e| RelationError::CacheCorrupt(e.to_string()))?;
        if doc.version != CACHE_VERSION {
            return Err(RelationError::CacheCorrupt(format!(
                "version {} (supported: {})",
                doc.version, CACHE_VERSION
            )));
        }
        let mut slices = BTreeMap::new();
        for cw in &doc.weights {
            let mut basis = Vec::new();
            for b in &cw.basis {
                basis.push(Mono::from_str(b).map_err(RelationError::CacheCorrupt)?);
            }
            let mut reduction = BTreeMap::new();
            for row in &cw.reduction {
                let word = parse_word(&row.word).map_err(RelationError::CacheCorrupt)?;
                let mut lc = LinComb::zero();
                for (m, c) in &row.coords {
                    let mono = Mono::from_str(m).map_err(RelationError::CacheCorrupt)?;
                    let rat = Rat::from_str(c).map_err(RelationError::CacheCorrupt)?;
                    lc.add_term(mono, rat);
                }
                reduction.insert(word, lc);
            }
            slices.insert(cw.weight, WeightSlice { basis, reduction });
        }
        let mut table = RelationTable {
            max_weight: doc.max_weight,
            slices,
            provenance: doc.provenance.clone(),
            checksum: String::new(),
        };
        table.checksum = table.compute_checksum();
        if table.checksum != doc.checksum {
            return Err(RelationError::CacheCorrupt(format!(
                "checksum mismatch: stored {}, computed {}",
                doc.checksum, table.checksum
            )));
        }
        Ok(table)
    }

    /// Atomic write (temp file + rename), so concurrent readers never see a
    /// partial table.
    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)
    }

    pub fn load(path: &Path) -> Result<Self, RelationError> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| RelationError::CacheCorrupt(format!("{}: {}", path.display(), e)))?;
        Self::from_json(&s)
    }
}

const CACHE_VERSION: &str = "periods-relation-table-1";

#[derive(Serialize, Deserialize)]
struct CacheDoc {
    version: String,
    max_weight: u32,
    weights: Vec<CacheWeight>,
    provenance: Provenance,
    checksum: String,
}

#[derive(Serialize, Deserialize)]
struct CacheWeight {
    weight: u32,
    basis: Vec<String>,
    reduction: Vec<CacheRow>,
}

#[derive(Serialize, Deserialize)]
struct CacheRow {
    word: String,
    coords: Vec<(String, String)>,
}

fn word_string(w: &Word) -> String {
    w.0.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_word(s: &str) -> Result<Word, String> {
    let mut letters = Vec::new();
    for tok in s.split_whitespace() {
        letters.push(tok.parse::<i8>().map_err(|e| format!("bad letter {tok:?}: {e}"))?);
    }
    Ok(Word(letters))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table8() -> RelationTable {
        RelationTable::datamine(8).expect("datamine to weight 8")
    }

    #[test]
    fn dims_match_expected_sequence() {
        let t = table8();
        assert_eq!(t.dims(), vec![1, 1, 1, 2, 2, 3, 4]);
    }

    #[test]
    fn euler_identity_weight_3() {
        // zeta(1,2) = zeta(3)
        let t = RelationTable::datamine(3).unwrap();
        let z12 = MotivicExpr::zeta(&Composition::from_parts(&[1, 2])).unwrap();
        let z3 = Mono::generator(&Composition::from_parts(&[3]));
        let red = t.reduce_to_basis(&z12).unwrap();
        assert_eq!(red, LinComb::gen(z3));
    }

    #[test]
    fn weight_4_reduction() {
        // zeta(4) = (2/5) zeta(2)^2
        let t = RelationTable::datamine(4).unwrap();
        let z4 = MotivicExpr::zeta(&Composition::from_parts(&[4])).unwrap();
        let z2sq = Mono(vec![
            Composition::from_parts(&[2]),
            Composition::from_parts(&[2]),
        ]);
        assert_eq!(
            t.reduce_to_basis(&z4).unwrap(),
            LinComb::term(z2sq, Rat::new(2, 5))
        );
    }

    #[test]
    fn weight_5_reductions() {
        let t = RelationTable::datamine(5).unwrap();
        let z5 = Mono::generator(&Composition::from_parts(&[5]));
        let z2z3 = Mono(vec![
            Composition::from_parts(&[2]),
            Composition::from_parts(&[3]),
        ]);
        // zeta(2,3) = 3 zeta(2)zeta(3) - 11/2 zeta(5)
        let z23 = MotivicExpr::zeta(&Composition::from_parts(&[2, 3])).unwrap();
        let mut expected = LinComb::term(z2z3.clone(), Rat::from_int(3));
        expected.add_term(z5.clone(), Rat::new(-11, 2));
        assert_eq!(t.reduce_to_basis(&z23).unwrap(), expected);
        // zeta(3,2) = -2 zeta(2)zeta(3) + 9/2 zeta(5)
        let z32 = MotivicExpr::zeta(&Composition::from_parts(&[3, 2])).unwrap();
        let mut expected = LinComb::term(z2z3, Rat::from_int(-2));
        expected.add_term(z5, Rat::new(9, 2));
        assert_eq!(t.reduce_to_basis(&z32).unwrap(), expected);
    }

    #[test]
    fn basis_monomials_are_fixed_points() {
        let t = table8();
        for w in 2..=8 {
            for mono in t.basis(w).unwrap() {
                let expr = crate::motivic::mono_to_expr(mono);
                let red = t.reduce_to_basis(&expr).unwrap();
                assert_eq!(red, LinComb::gen(mono.clone()), "weight {} monomial {}", w, mono);
            }
        }
    }

    #[test]
    fn reduction_idempotent_weight_le_8() {
        let t = table8();
        for w in 2..=8u32 {
            for word in admissible_words(w) {
                let once = t.reduce_word(&word).unwrap();
                // re-reduce through expressions
                let mut expr = MotivicExpr::zero();
                for (m, c) in once.iter() {
                    expr = expr.add(&crate::motivic::mono_to_expr(m).scale(c));
                }
                let twice = t.reduce_to_basis(&expr).unwrap();
                assert_eq!(once, twice, "weight {} word {}", w, word);
            }
        }
    }

    #[test]
    fn homomorphism_consistency() {
        // reduce(xy) = reduce(reduce(x) * reduce(y)) on sample pairs
        let t = table8();
        let pairs = [
            (vec![2i64], vec![3i64]),
            (vec![2], vec![1, 3]),
            (vec![3], vec![2, 3]),
            (vec![2, 2], vec![4]),
        ];
        for (a, b) in pairs {
            let x = MotivicExpr::zeta(&Composition::from_parts(&a)).unwrap();
            let y = MotivicExpr::zeta(&Composition::from_parts(&b)).unwrap();
            let lhs = t.reduce_to_basis(&x.mul(&y)).unwrap();
            let rx = t.reduce_to_basis(&x).unwrap();
            let ry = t.reduce_to_basis(&y).unwrap();
            let mut rhs = LinComb::zero();
            for (mx, cx) in rx.iter() {
                for (my, cy) in ry.iter() {
                    rhs.add_term(mx.mul(my), cx * cy);
                }
            }
            assert_eq!(lhs, rhs, "pair {:?} {:?}", a, b);
        }
    }

    #[test]
    fn determinism_byte_for_byte() {
        let a = RelationTable::datamine(6).unwrap();
        let b = RelationTable::datamine(6).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn cache_round_trip_and_checksum() {
        let t = RelationTable::datamine(5).unwrap();
        let json = t.to_json();
        let back = RelationTable::from_json(&json).unwrap();
        assert_eq!(t.to_json(), back.to_json());
        // tampering is detected
        let bad = json.replace("\"max_weight\": 5", "\"max_weight\": 6");
        assert!(RelationTable::from_json(&bad).is_err());
    }

    #[test]
    fn weight_too_large_rejected() {
        assert!(matches!(
            RelationTable::datamine(10),
            Err(RelationError::WeightTooLarge(10))
        ));
        assert!(matches!(
            RelationTable::datamine(1),
            Err(RelationError::WeightTooLarge(1))
        ));
    }
}
