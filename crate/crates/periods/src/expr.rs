//! The expression grammar shared by the command-line tools.
//!
//! `zeta(n1,...,nr)`, `L`, `log(p)`, `I(0; a1 ... an; 1)`, products with
//! `*`, integer powers with `^`, rational scalars `p/q`, sums with `+`/`-`.
//! Printing folds iterated-integral words back into zeta notation, so every
//! printed expression re-parses to an equal value.

use std::fmt;
use std::str::FromStr;

use crate::exact::Rat;
use crate::motivic::{DrGen, MotGen, MotivicExpr, integral_word, word_to_composition};
use crate::words::{Composition, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error: {}", self.0)
    }
}

impl std::error::Error for ParseError {}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

impl Lexer {
    fn new(s: &str) -> Self {
        Lexer { chars: s.chars().collect(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        self.skip_ws();
        let c = self.chars.get(self.pos).copied();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.bump() {
            Some(x) if x == c => Ok(()),
            other => Err(ParseError(format!("expected {:?}, found {:?}", c, other))),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let mut s = String::new();
        if self.peek() == Some('-') {
            s.push('-');
            self.bump();
        }
        while let Some(c) = self.chars.get(self.pos) {
            if c.is_ascii_digit() {
                s.push(*c);
                self.pos += 1;
            } else {
                break;
            }
        }
        s.parse::<i64>().map_err(|_| ParseError(format!("expected integer, found {:?}", s)))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let rest: String = self.chars[self.pos..].iter().collect();
        if rest.starts_with(kw) {
            self.pos += kw.chars().count();
            true
        } else {
            false
        }
    }
}

/// Parses an expression in the grammar above.
pub fn parse(s: &str) -> Result<MotivicExpr, ParseError> {
    let mut lx = Lexer::new(s);
    let e = parse_sum(&mut lx)?;
    lx.skip_ws();
    if lx.pos < lx.chars.len() {
        let rest: String = lx.chars[lx.pos..].iter().collect();
        return Err(ParseError(format!("trailing input: {:?}", rest)));
    }
    Ok(e)
}

fn parse_sum(lx: &mut Lexer) -> Result<MotivicExpr, ParseError> {
    let mut acc = MotivicExpr::zero();
    let mut sign = Rat::one();
    let mut first = true;
    let mut pending = false;
    loop {
        match lx.peek() {
            Some('+') => {
                lx.bump();
                pending = true;
                continue;
            }
            Some('-') => {
                lx.bump();
                sign = -sign;
                pending = true;
                continue;
            }
            Some(')') | None if pending => {
                return Err(ParseError("dangling operator".into()));
            }
            Some(')') | None if !first => break,
            None => return Err(ParseError("empty expression".into())),
            _ => {}
        }
        let term = parse_product(lx)?;
        acc = acc.add(&term.scale(&sign));
        sign = Rat::one();
        first = false;
        pending = false;
        match lx.peek() {
            Some('+') | Some('-') => continue,
            _ => break,
        }
    }
    Ok(acc)
}

fn parse_product(lx: &mut Lexer) -> Result<MotivicExpr, ParseError> {
    let mut acc = parse_power(lx)?;
    while lx.peek() == Some('*') {
        lx.bump();
        let rhs = parse_power(lx)?;
        acc = acc.mul(&rhs);
    }
    Ok(acc)
}

fn parse_power(lx: &mut Lexer) -> Result<MotivicExpr, ParseError> {
    let base = parse_atom(lx)?;
    if lx.peek() == Some('^') {
        lx.bump();
        let e = lx.integer()?;
        if e < 0 {
            return Err(ParseError("negative powers are not supported".into()));
        }
        return Ok(base.pow(e as u32));
    }
    Ok(base)
}

fn parse_atom(lx: &mut Lexer) -> Result<MotivicExpr, ParseError> {
    match lx.peek() {
        Some('(') => {
            lx.bump();
            let inner = parse_sum(lx)?;
            lx.expect(')')?;
            Ok(inner)
        }
        Some(c) if c.is_ascii_digit() => {
            let num = lx.integer()?;
            if lx.peek() == Some('/') {
                lx.bump();
                let den = lx.integer()?;
                if den == 0 {
                    return Err(ParseError("zero denominator".into()));
                }
                Ok(MotivicExpr::scalar(Rat::new(num, den)))
            } else {
                Ok(MotivicExpr::scalar(Rat::from_int(num)))
            }
        }
        _ => {
            if lx.eat_keyword("zeta(") {
                let mut parts = Vec::new();
                loop {
                    parts.push(lx.integer()?);
                    match lx.bump() {
                        Some(',') => continue,
                        Some(')') => break,
                        other => {
                            return Err(ParseError(format!(
                                "expected ',' or ')' in zeta, found {:?}",
                                other
                            )));
                        }
                    }
                }
                if parts.iter().any(|&p| p == 0) {
                    return Err(ParseError("zero entry in zeta".into()));
                }
                let comp = Composition::from_parts(&parts);
                MotivicExpr::zeta(&comp).map_err(|e| ParseError(e.to_string()))
            } else if lx.eat_keyword("log(") {
                let p = lx.integer()?;
                lx.expect(')')?;
                if p < 2 {
                    return Err(ParseError(format!("log argument {} is not prime", p)));
                }
                MotivicExpr::log_prime(p as u64).map_err(|e| ParseError(e.to_string()))
            } else if lx.eat_keyword("L") {
                Ok(MotivicExpr::lefschetz(1))
            } else if lx.eat_keyword("I(") {
                let a0 = lx.integer()?;
                lx.expect(';')?;
                let mut letters = Vec::new();
                loop {
                    match lx.peek() {
                        Some(';') => {
                            lx.bump();
                            break;
                        }
                        Some(_) => {
                            let a = lx.integer()?;
                            if !(-1..=1).contains(&a) {
                                return Err(ParseError(format!("letter {} outside {{0,±1}}", a)));
                            }
                            letters.push(a as i8);
                        }
                        None => return Err(ParseError("unterminated iterated integral".into())),
                    }
                }
                let a1 = lx.integer()?;
                lx.expect(')')?;
                if a0 != 0 || a1 != 1 {
                    return Err(ParseError("iterated integrals are based I(0; ...; 1)".into()));
                }
                MotivicExpr::iterated_integral(&Word(letters))
                    .map_err(|e| ParseError(e.to_string()))
            } else {
                let rest: String = lx.chars[lx.pos..].iter().collect();
                Err(ParseError(format!("unexpected token near {:?}", rest)))
            }
        }
    }
}

/// Renders an expression; iterated-integral words fold into zeta notation.
pub fn print(x: &MotivicExpr) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    let mut first = true;
    for (g, c) in x.0.iter() {
        let (mut coeff, zeta_str) = fold_word(&g.word, c);
        let mut pieces: Vec<String> = Vec::new();
        if let Some(z) = zeta_str {
            pieces.push(z);
        }
        if g.lef == 1 {
            pieces.push("L".into());
        } else if g.lef > 1 {
            pieces.push(format!("L^{}", g.lef));
        }
        let mut i = 0;
        while i < g.logs.len() {
            let mut j = i;
            while j < g.logs.len() && g.logs[j] == g.logs[i] {
                j += 1;
            }
            if j - i == 1 {
                pieces.push(format!("log({})", g.logs[i]));
            } else {
                pieces.push(format!("log({})^{}", g.logs[i], j - i));
            }
            i = j;
        }
        let neg = coeff.is_negative();
        if neg {
            coeff = -coeff;
        }
        if first {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        first = false;
        if pieces.is_empty() {
            out.push_str(&coeff.to_string());
        } else if coeff.is_one() {
            out.push_str(&pieces.join("*"));
        } else {
            out.push_str(&format!("{}*{}", coeff, pieces.join("*")));
        }
    }
    out
}

/// Folds an integral word into zeta notation, adjusting the coefficient by
/// the depth sign.
fn fold_word(w: &Word, c: &Rat) -> (Rat, Option<String>) {
    if w.is_empty() {
        return (c.clone(), None);
    }
    match word_to_composition(w) {
        Some(comp) => {
            let sign = if comp.depth() % 2 == 1 { -Rat::one() } else { Rat::one() };
            (&sign * c, Some(format!("{}", comp)))
        }
        None => {
            let letters: Vec<String> = w.0.iter().map(|a| a.to_string()).collect();
            (c.clone(), Some(format!("I(0; {}; 1)", letters.join(" "))))
        }
    }
}

/// Renders a de Rham generator (right coaction factor); the returned sign
/// is the depth sign of a folded zeta word, to be absorbed by the caller.
pub fn print_dr_gen(d: &DrGen) -> (Rat, String) {
    let mut sign = Rat::one();
    let mut pieces: Vec<String> = Vec::new();
    if !d.word.is_empty() {
        match word_to_composition(&d.word) {
            Some(comp) => {
                pieces.push(format!("{}", comp).replacen("zeta(", "zetadr(", 1));
                if comp.depth() % 2 == 1 {
                    sign = -sign;
                }
            }
            None => {
                let letters: Vec<String> = d.word.0.iter().map(|a| a.to_string()).collect();
                pieces.push(format!("Idr(0; {}; 1)", letters.join(" ")));
            }
        }
    }
    if d.lef == 1 {
        pieces.push("Ldr".into());
    } else if d.lef != 0 {
        pieces.push(format!("Ldr^{}", d.lef));
    }
    for p in &d.nus {
        pieces.push(format!("nu{}", p));
    }
    let body = if pieces.is_empty() { "1".into() } else { pieces.join("*") };
    (sign, body)
}

/// Renders a coaction tensor.
pub fn print_coaction(t: &crate::motivic::CoactionTensor) -> String {
    if t.0.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for ((m, d), c) in t.0.iter() {
        let (sign, dr) = print_dr_gen(d);
        let left =
            print(&MotivicExpr(crate::exact::LinComb::term(m.clone(), &sign * c)));
        parts.push(format!("{} (x) {}", left, dr));
    }
    parts.join(" + ")
}

/// The zeta word of a composition as a motivic generator.
pub fn zeta_word_gen(c: &Composition) -> MotGen {
    MotGen::from_word(integral_word(c))
}

impl FromStr for MotivicExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
