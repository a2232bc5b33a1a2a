//! Words, compositions, shuffle and quasi-shuffle products, Lyndon words.
//!
//! Words are finite sequences of small integer letters. For iterated-integral
//! words the letters live in {0, +1, -1}; other clients (f-alphabet tensor
//! words, one-form words) use their own letter sets on top of the same
//! combinatorics.

use std::fmt;

use crate::exact::{LinComb, Rat};

/// A word over an integer alphabet. The empty word is the unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<i8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(letters: &[i8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Word {
    /// Juxtaposed letters, e.g. "e0 e1 e0 e0 e1"; the empty word prints "e".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self.0.iter().map(|a| format!("e{}", a)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A zeta-index composition: parts (n, sign) with n >= 1, sign = ±1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Composition(pub Vec<(u32, i8)>);

impl Composition {
    pub fn from_parts(parts: &[i64]) -> Self {
        Composition(
            parts
                .iter()
                .map(|&n| {
                    assert!(n != 0, "composition part must be nonzero");
                    (n.unsigned_abs() as u32, if n < 0 { -1 } else { 1 })
                })
                .collect(),
        )
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|&(n, _)| n).sum()
    }

    /// A nested sum over k_1 < ... < k_r converges iff the last part is not
    /// an unsigned 1.
    pub fn is_admissible(&self) -> bool {
        match self.0.last() {
            None => true,
            Some(&(n, s)) => n >= 2 || s == -1,
        }
    }
}

impl fmt::Display for Composition {
    /// "zeta(2,3)" / "zeta(2,-3)".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(n, s)| if s < 0 { format!("-{}", n) } else { format!("{}", n) })
            .collect();
        write!(f, "zeta({})", parts.join(","))
    }
}

/// Shuffle product: the sum over all interleavings, with multiplicity.
pub fn shuffle(u: &Word, v: &Word) -> LinComb<Word> {
    fn rec(u: &[i8], v: &[i8]) -> LinComb<Word> {
        if u.is_empty() {
            return LinComb::gen(Word(v.to_vec()));
        }
        if v.is_empty() {
            return LinComb::gen(Word(u.to_vec()));
        }
        let mut out = LinComb::zero();
        for (head, rest) in [(u[0], rec(&u[1..], v)), (v[0], rec(u, &v[1..]))] {
            for (w, c) in rest.iter() {
                let mut letters = Vec::with_capacity(w.len() + 1);
                letters.push(head);
                letters.extend_from_slice(&w.0);
                out.add_term(Word(letters), c.clone());
            }
        }
        out
    }
    rec(&u.0, &v.0)
}

/// Shuffle product extended bilinearly to combinations of words.
pub fn shuffle_lc(a: &LinComb<Word>, b: &LinComb<Word>) -> LinComb<Word> {
    let mut out = LinComb::zero();
    for (u, cu) in a.iter() {
        for (v, cv) in b.iter() {
            let prod = shuffle(u, v);
            for (w, c) in prod.iter() {
                out.add_term(w.clone(), &(cu * cv) * c);
            }
        }
    }
    out
}

/// Quasi-shuffle (stuffle) product of compositions: interleave or merge
/// adjacent parts; a merged part adds exponents and multiplies signs.
pub fn stuffle(a: &Composition, b: &Composition) -> LinComb<Composition> {
    fn rec(a: &[(u32, i8)], b: &[(u32, i8)]) -> LinComb<Composition> {
        if a.is_empty() {
            return LinComb::gen(Composition(b.to_vec()));
        }
        if b.is_empty() {
            return LinComb::gen(Composition(a.to_vec()));
        }
        let mut out = LinComb::zero();
        let merged_part = (a[0].0 + b[0].0, a[0].1 * b[0].1);
        for (head, rest) in [
            (a[0], rec(&a[1..], b)),
            (b[0], rec(a, &b[1..])),
            (merged_part, rec(&a[1..], &b[1..])),
        ] {
            for (comp, c) in rest.iter() {
                let mut parts = Vec::with_capacity(comp.0.len() + 1);
                parts.push(head);
                parts.extend_from_slice(&comp.0);
                out.add_term(Composition(parts), c.clone());
            }
        }
        out
    }
    rec(&a.0, &b.0)
}

/// Deconcatenation: all (prefix, suffix) splittings, each with coefficient 1.
pub fn deconcat(w: &Word) -> LinComb<(Word, Word)> {
    let mut out = LinComb::zero();
    for k in 0..=w.len() {
        out.add_term(
            (Word(w.0[..k].to_vec()), Word(w.0[k..].to_vec())),
            Rat::one(),
        );
    }
    out
}

/// All Lyndon words of exact length `len` over letters 0..alphabet_size,
/// in lexicographic order (Duval's generation).
pub fn lyndon_words(alphabet_size: usize, len: usize) -> Vec<Word> {
    assert!(alphabet_size >= 1);
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    let k = alphabet_size as i8;
    let mut w = vec![-1i8];
    loop {
        *w.last_mut().unwrap() += 1;
        if w.last().copied().unwrap() >= k {
            // backtrack
            w.pop();
            if w.is_empty() {
                break;
            }
            while w.last().copied() == Some(k - 1) {
                w.pop();
                if w.is_empty() {
                    return out;
                }
            }
            continue;
        }
        if w.len() == len {
            out.push(Word(w.clone()));
        }
        // extend periodically up to length `len`
        let m = w.len();
        while w.len() < len {
            let c = w[w.len() - m];
            w.push(c);
        }
        // drop trailing copies until we can increment
        while w.last().copied() == Some(k - 1) {
            w.pop();
            if w.is_empty() {
                return out;
            }
        }
    }
    out
}

/// Word-encoding errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WordError {
    /// The word does not encode an admissible composition.
    NotAdmissible(String),
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordError::NotAdmissible(msg) => write!(f, "not admissible: {}", msg),
        }
    }
}

impl std::error::Error for WordError {}

/// Encodes a composition as the printed word e0^{n1-1} e_{s1} ... e0^{nr-1} e_{sr},
/// where s_i is the product of the signs of parts i..r.
pub fn comp_to_word(c: &Composition) -> Word {
    let mut letters = Vec::new();
    for (i, &(n, _)) in c.0.iter().enumerate() {
        let tail_sign: i8 = c.0[i..].iter().map(|&(_, s)| s).product();
        for _ in 1..n {
            letters.push(0);
        }
        letters.push(tail_sign);
    }
    Word(letters)
}

/// Inverse of [`comp_to_word`]. Fails when the word has trailing zeros,
/// letters outside {0, ±1}, or encodes a divergent composition.
pub fn word_to_comp(w: &Word) -> Result<Composition, WordError> {
    if w.is_empty() {
        return Ok(Composition(Vec::new()));
    }
    if w.0.iter().any(|&a| a != 0 && a != 1 && a != -1) {
        return Err(WordError::NotAdmissible(format!("letters outside {{0,±1}} in {}", w)));
    }
    if *w.0.last().unwrap() == 0 {
        return Err(WordError::NotAdmissible(format!("trailing e0 in {}", w)));
    }
    // Split into blocks e0^{n-1} e_s and recover the per-part signs from the
    // running tail products.
    let mut tail_signs = Vec::new();
    let mut zeros = 0u32;
    for &a in &w.0 {
        if a == 0 {
            zeros += 1;
        } else {
            tail_signs.push((zeros + 1, a));
            zeros = 0;
        }
    }
    let mut parts = Vec::with_capacity(tail_signs.len());
    for i in 0..tail_signs.len() {
        let (n, eta) = tail_signs[i];
        let next_eta = tail_signs.get(i + 1).map(|&(_, e)| e).unwrap_or(1);
        parts.push((n, eta * next_eta));
    }
    let comp = Composition(parts);
    if !comp.is_admissible() {
        return Err(WordError::NotAdmissible(format!("{} encodes divergent {}", w, comp)));
    }
    Ok(comp)
}

/// All compositions of the given weight (unsigned parts), in lexicographic order.
pub fn compositions_of_weight(weight: u32) -> Vec<Composition> {
    let mut out = Vec::new();
    let mut parts: Vec<(u32, i8)> = Vec::new();
    fn rec(rem: u32, parts: &mut Vec<(u32, i8)>, out: &mut Vec<Composition>) {
        if rem == 0 {
            out.push(Composition(parts.clone()));
            return;
        }
        for n in 1..=rem {
            parts.push((n, 1));
            rec(rem - n, parts, out);
            parts.pop();
        }
    }
    rec(weight, &mut parts, &mut out);
    out
}

/// All admissible compositions of the given weight (unsigned).
pub fn admissible_compositions(weight: u32) -> Vec<Composition> {
    compositions_of_weight(weight)
        .into_iter()
        .filter(|c| c.is_admissible())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(letters: &[i8]) -> Word {
        Word::letters(letters)
    }

    #[test]
    fn shuffle_single_letters() {
        let s = shuffle(&w(&[0]), &w(&[1]));
        assert_eq!(s.coeff(&w(&[0, 1])), Rat::one());
        assert_eq!(s.coeff(&w(&[1, 0])), Rat::one());
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn shuffle_unit_law() {
        let word = w(&[1, 0, 1]);
        assert_eq!(shuffle(&Word::empty(), &word), LinComb::gen(word.clone()));
        assert_eq!(shuffle(&word, &Word::empty()), LinComb::gen(word));
    }

    #[test]
    fn shuffle_e0e1_with_e0() {
        // brute force over the 3 interleavings: 2*e0e0e1 + e0e1e0
        let s = shuffle(&w(&[0, 1]), &w(&[0]));
        assert_eq!(s.coeff(&w(&[0, 0, 1])), Rat::from_int(2));
        assert_eq!(s.coeff(&w(&[0, 1, 0])), Rat::one());
        assert_eq!(s.len(), 2);
    }

    fn binomial(n: u64, k: u64) -> u64 {
        let mut acc = 1u64;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    #[test]
    fn stuffle_depth_one() {
        let s = stuffle(&Composition::from_parts(&[2]), &Composition::from_parts(&[3]));
        assert_eq!(s.coeff(&Composition::from_parts(&[2, 3])), Rat::one());
        assert_eq!(s.coeff(&Composition::from_parts(&[3, 2])), Rat::one());
        assert_eq!(s.coeff(&Composition::from_parts(&[5])), Rat::one());
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn stuffle_unit_law() {
        let b = Composition::from_parts(&[2, 1]);
        assert_eq!(stuffle(&Composition(Vec::new()), &b), LinComb::gen(b.clone()));
    }

    #[test]
    fn stuffle_2_with_21() {
        // brute-force quasi-shuffle enumeration
        let s = stuffle(&Composition::from_parts(&[2]), &Composition::from_parts(&[2, 1]));
        assert_eq!(s.coeff(&Composition::from_parts(&[2, 2, 1])), Rat::from_int(2));
        assert_eq!(s.coeff(&Composition::from_parts(&[2, 1, 2])), Rat::one());
        assert_eq!(s.coeff(&Composition::from_parts(&[4, 1])), Rat::one());
        assert_eq!(s.coeff(&Composition::from_parts(&[2, 3])), Rat::one());
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn stuffle_sign_merge() {
        let s = stuffle(
            &Composition::from_parts(&[-1]),
            &Composition::from_parts(&[-2]),
        );
        // merged part: exponents add, signs multiply
        assert_eq!(s.coeff(&Composition::from_parts(&[3])), Rat::one());
        assert_eq!(s.coeff(&Composition::from_parts(&[-1, -2])), Rat::one());
        assert_eq!(s.coeff(&Composition::from_parts(&[-2, -1])), Rat::one());
    }

    #[test]
    fn deconcat_two_letters() {
        let d = deconcat(&w(&[0, 1]));
        assert_eq!(d.coeff(&(Word::empty(), w(&[0, 1]))), Rat::one());
        assert_eq!(d.coeff(&(w(&[0]), w(&[1]))), Rat::one());
        assert_eq!(d.coeff(&(w(&[0, 1]), Word::empty())), Rat::one());
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn deconcat_empty() {
        let d = deconcat(&Word::empty());
        assert_eq!(d.coeff(&(Word::empty(), Word::empty())), Rat::one());
        assert_eq!(d.len(), 1);
    }

    /// Coassociativity and counit, exhaustively over {0,1}-words of length <= 6.
    #[test]
    fn deconcat_coassociative_counital() {
        for len in 0..=6usize {
            for bits in 0..(1u32 << len) {
                let letters: Vec<i8> = (0..len).map(|i| ((bits >> i) & 1) as i8).collect();
                let word = Word(letters);
                // (Δ ⊗ id)Δ vs (id ⊗ Δ)Δ, as triples
                let mut lhs: LinComb<(Word, Word, Word)> = LinComb::zero();
                let mut rhs: LinComb<(Word, Word, Word)> = LinComb::zero();
                for ((a, b), c) in deconcat(&word).iter() {
                    for ((a1, a2), c2) in deconcat(a).iter() {
                        lhs.add_term((a1.clone(), a2.clone(), b.clone()), c * c2);
                    }
                    for ((b1, b2), c2) in deconcat(b).iter() {
                        rhs.add_term((a.clone(), b1.clone(), b2.clone()), c * c2);
                    }
                }
                assert_eq!(lhs, rhs, "coassociativity fails for {}", word);
                // counit: empty-prefix and empty-suffix components recover the word
                let d = deconcat(&word);
                assert_eq!(d.coeff(&(Word::empty(), word.clone())), Rat::one());
                assert_eq!(d.coeff(&(word.clone(), Word::empty())), Rat::one());
            }
        }
    }

    #[test]
    fn lyndon_small_cases() {
        assert_eq!(lyndon_words(2, 1), vec![w(&[0]), w(&[1])]);
        assert_eq!(lyndon_words(2, 3), vec![w(&[0, 0, 1]), w(&[0, 1, 1])]);
        assert_eq!(lyndon_words(2, 6).len(), 9);
    }

    fn mobius(n: u64) -> i64 {
        if n == 1 {
            return 1;
        }
        let mut rem = n;
        let mut count = 0;
        let mut p = 2;
        while p * p <= rem {
            if rem % p == 0 {
                rem /= p;
                count += 1;
                if rem % p == 0 {
                    return 0;
                }
            }
            p += 1;
        }
        if rem > 1 {
            count += 1;
        }
        if count % 2 == 0 { 1 } else { -1 }
    }

    /// |Lyndon(2, n)| equals the Witt necklace formula for n <= 12.
    #[test]
    fn lyndon_witt_counts() {
        for n in 1..=12u64 {
            let mut sum = 0i64;
            for d in 1..=n {
                if n % d == 0 {
                    sum += mobius(n / d) * 2i64.pow(d as u32);
                }
            }
            let expected = (sum / n as i64) as usize;
            assert_eq!(lyndon_words(2, n as usize).len(), expected, "n = {}", n);
        }
    }

    /// Lyndon output agrees with brute-force rotation minimality at small n.
    #[test]
    fn lyndon_rotation_minimality() {
        for n in 1..=8usize {
            let mut brute = Vec::new();
            for bits in 0..(1u32 << n) {
                let word: Vec<i8> = (0..n).map(|i| ((bits >> i) & 1) as i8).collect();
                let strictly_minimal = (1..n).all(|r| {
                    let rot: Vec<i8> = word[r..].iter().chain(&word[..r]).cloned().collect();
                    word < rot
                });
                if strictly_minimal {
                    brute.push(Word(word));
                }
            }
            brute.sort();
            assert_eq!(lyndon_words(2, n), brute, "n = {}", n);
        }
    }

    #[test]
    fn comp_word_examples() {
        assert_eq!(comp_to_word(&Composition::from_parts(&[2, 3])), w(&[0, 1, 0, 0, 1]));
        assert_eq!(comp_to_word(&Composition::from_parts(&[2])), w(&[0, 1]));
        assert!(matches!(
            word_to_comp(&w(&[1])),
            Err(WordError::NotAdmissible(_))
        ));
    }

    #[test]
    fn comp_word_euler_signs() {
        // single negative part: (1,-) prints as the single letter e-1
        let c = Composition::from_parts(&[-1]);
        assert_eq!(comp_to_word(&c), w(&[-1]));
        assert_eq!(word_to_comp(&w(&[-1])).unwrap(), c);
        // (2,-3): tail signs are (-1)*(-1)... sign bookkeeping round-trips
        let c = Composition::from_parts(&[2, -3]);
        assert_eq!(word_to_comp(&comp_to_word(&c)).unwrap(), c);
        let c = Composition::from_parts(&[-2, -3, 2]);
        assert_eq!(word_to_comp(&comp_to_word(&c)).unwrap(), c);
    }

    /// Round trip comp -> word -> comp on all admissible words of length <= 10.
    #[test]
    fn comp_word_round_trip_exhaustive() {
        let mut checked = 0;
        for len in 1..=10usize {
            for bits in 0..(1u32 << len) {
                let letters: Vec<i8> = (0..len).map(|i| ((bits >> i) & 1) as i8).collect();
                let word = Word(letters);
                if let Ok(comp) = word_to_comp(&word) {
                    assert_eq!(comp_to_word(&comp), word);
                    checked += 1;
                }
            }
        }
        assert!(checked > 250, "expected plenty of admissible words, got {}", checked);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn shuffle_commutative_associative(
            a in proptest::collection::vec(0i8..2, 0..4),
            b in proptest::collection::vec(0i8..2, 0..4),
            c in proptest::collection::vec(0i8..2, 0..3),
        ) {
            let (a, b, c) = (Word(a), Word(b), Word(c));
            prop_assert_eq!(shuffle(&a, &b), shuffle(&b, &a));
            let ab_c = shuffle_lc(&shuffle(&a, &b), &LinComb::gen(c.clone()));
            let a_bc = shuffle_lc(&LinComb::gen(a.clone()), &shuffle(&b, &c));
            prop_assert_eq!(ab_c, a_bc);
            // total coefficient mass = binomial(|a|+|b|, |a|)
            let mass = shuffle(&a, &b).mass();
            prop_assert_eq!(mass, Rat::from_int(binomial((a.len()+b.len()) as u64, a.len() as u64) as i64));
        }

        #[test]
        fn stuffle_commutative_associative(
            a in proptest::collection::vec((1u32..4, prop::bool::ANY), 0..3),
            b in proptest::collection::vec((1u32..4, prop::bool::ANY), 0..3),
            c in proptest::collection::vec((1u32..4, prop::bool::ANY), 0..2),
        ) {
            let comp = |v: &Vec<(u32, bool)>| {
                Composition(v.iter().map(|&(n, s)| (n, if s { 1 } else { -1 })).collect())
            };
            let (a, b, c) = (comp(&a), comp(&b), comp(&c));
            prop_assert_eq!(stuffle(&a, &b), stuffle(&b, &a));
            let mut ab_c: LinComb<Composition> = LinComb::zero();
            for (x, cx) in stuffle(&a, &b).iter() {
                for (y, cy) in stuffle(x, &c).iter() {
                    ab_c.add_term(y.clone(), cx * cy);
                }
            }
            let mut a_bc: LinComb<Composition> = LinComb::zero();
            for (x, cx) in stuffle(&b, &c).iter() {
                for (y, cy) in stuffle(&a, x).iter() {
                    a_bc.add_term(y.clone(), cx * cy);
                }
            }
            prop_assert_eq!(ab_c, a_bc);
        }
    }
}
