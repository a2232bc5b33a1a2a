//! Symbols of differentially unipotent periods.
//!
//! A user-declared differential graded algebra (functions are rational
//! functions in one variable; one- and two-forms are spanned by dx-forms and
//! named generators with declared differentials and wedges; everything in
//! degree three and higher vanishes) carries nilpotent connection matrices
//! N. The symbol of a matrix coefficient is the finite series
//! Σ_k ⟨f, N^k ω⟩ in the tensor coalgebra on one-forms; it is closed for the
//! reduced-bar differential when dN + N ∧ N = 0. Equality modulo the
//! relation subspace is decided by a bounded boundary search with an
//! explicit Inconclusive verdict; the cohomological symbol replaces forms by
//! their classes and checks the wedge-insertion kernel condition.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exact::{LinComb, Rat, solve_in_span};
use crate::motivic::{MotivicError, MotivicExpr, eval_family_at_0, eval_family_at_1, family_coaction};
use crate::ratfunc::RatFunc;
use crate::words::Word;

/// Errors of the symbol engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolError {
    NotIntegrable { row: usize, col: usize, entry: String },
    BasisMismatch(String),
    NotLengthN { requested: usize },
    UnsupportedBasePoint(String),
    BadConnection(String),
    Motivic(String),
}

impl fmt::Display for SymbolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolError::NotIntegrable { row, col, entry } => {
                write!(f, "connection is not integrable at ({}, {}): {}", row, col, entry)
            }
            SymbolError::BasisMismatch(s) => write!(f, "basis mismatch: {}", s),
            SymbolError::NotLengthN { requested } => {
                write!(f, "element has length below {}", requested)
            }
            SymbolError::UnsupportedBasePoint(s) => write!(f, "unsupported base point: {}", s),
            SymbolError::BadConnection(s) => write!(f, "bad connection: {}", s),
            SymbolError::Motivic(s) => write!(f, "{}", s),
        }
    }
}

impl std::error::Error for SymbolError {}

impl From<MotivicError> for SymbolError {
    fn from(e: MotivicError) -> Self {
        SymbolError::Motivic(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Forms
// ---------------------------------------------------------------------------

/// Basis atoms of degree one: the coordinate form dx, or a named generator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum OneAtom {
    Dx,
    Named(String),
}

/// A canonical one-form term: monic rational function times an atom.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OneTerm {
    pub func: RatFunc,
    pub atom: OneAtom,
}

/// One-forms: rational combinations of canonical terms.
pub type OneForm = LinComb<OneTerm>;

/// Basis atoms of degree two.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TwoAtom {
    Named(String),
    /// dx ∧ ω_name
    DxWedge(String),
    /// ω_a ∧ ω_b with a < b, kept formal when no table entry applies
    Wedge(String, String),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TwoTerm {
    pub func: RatFunc,
    pub atom: TwoAtom,
}

pub type TwoForm = LinComb<TwoTerm>;

/// Builds the canonical combination f · atom.
pub fn one_term(f: &RatFunc, atom: OneAtom) -> OneForm {
    if f.is_zero() {
        return LinComb::zero();
    }
    let (scalar, monic) = f.canonical_split();
    LinComb::term(OneTerm { func: monic, atom }, scalar)
}

/// g(x)·dx.
pub fn dx_form(g: &RatFunc) -> OneForm {
    one_term(g, OneAtom::Dx)
}

/// dlog(x - a) = dx/(x - a).
pub fn dlog_form(a: &Rat) -> OneForm {
    let den = crate::ratfunc::Poly(vec![-a, Rat::one()]);
    dx_form(&RatFunc::from_polys(crate::ratfunc::Poly::one(), den))
}

/// A named one-form generator.
pub fn named_form(name: &str) -> OneForm {
    LinComb::gen(OneTerm { func: RatFunc::one(), atom: OneAtom::Named(name.into()) })
}

fn two_term(f: &RatFunc, atom: TwoAtom) -> TwoForm {
    if f.is_zero() {
        return LinComb::zero();
    }
    let (scalar, monic) = f.canonical_split();
    LinComb::term(TwoTerm { func: monic, atom }, scalar)
}

fn scale_one_by_func(form: &OneForm, f: &RatFunc) -> OneForm {
    let mut out = LinComb::zero();
    for (t, c) in form.iter() {
        let combined = t.func.mul(f);
        for (nt, nc) in one_term(&combined, t.atom.clone()).iter() {
            out.add_term(nt.clone(), c * nc);
        }
    }
    out
}

fn scale_two_by_func(form: &TwoForm, f: &RatFunc) -> TwoForm {
    let mut out = LinComb::zero();
    for (t, c) in form.iter() {
        let combined = t.func.mul(f);
        for (nt, nc) in two_term(&combined, t.atom.clone()).iter() {
            out.add_term(nt.clone(), c * nc);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The differential graded algebra
// ---------------------------------------------------------------------------

/// Declared DGA data. Degrees three and up vanish identically.
#[derive(Clone, Debug, Default)]
pub struct Dga {
    /// Punctures of the underlying line; residues at these points represent
    /// degree-one cohomology classes of dx-forms.
    pub points: Vec<Rat>,
    /// Named one-form generators with their differentials.
    pub d_table: BTreeMap<String, TwoForm>,
    /// Named two-form generators.
    pub named_two: Vec<String>,
    /// Declared wedges ω_a ∧ ω_b for a < b; missing pairs stay formal.
    pub wedge_table: BTreeMap<(String, String), TwoForm>,
}

impl Dga {
    /// The punctured line with the given rational punctures: functions with
    /// poles there, forms g·dx, every wedge zero.
    pub fn p1_minus(points: &[Rat]) -> Dga {
        Dga { points: points.to_vec(), ..Default::default() }
    }

    pub fn d_one(&self, form: &OneForm) -> TwoForm {
        let mut out = LinComb::zero();
        for (t, c) in form.iter() {
            match &t.atom {
                OneAtom::Dx => {
                    // d(f dx) = f' dx ∧ dx = 0
                }
                OneAtom::Named(n) => {
                    // d(f ω) = df ∧ ω + f dω
                    let df_wedge = two_term(&t.func.derivative(), TwoAtom::DxWedge(n.clone()));
                    for (nt, nc) in df_wedge.iter() {
                        out.add_term(nt.clone(), c * nc);
                    }
                    if let Some(d) = self.d_table.get(n) {
                        let scaled = scale_two_by_func(d, &t.func);
                        for (nt, nc) in scaled.iter() {
                            out.add_term(nt.clone(), c * nc);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn wedge(&self, a: &OneForm, b: &OneForm) -> TwoForm {
        let mut out = LinComb::zero();
        for (ta, ca) in a.iter() {
            for (tb, cb) in b.iter() {
                let f = ta.func.mul(&tb.func);
                let c = ca * cb;
                let piece: TwoForm = match (&ta.atom, &tb.atom) {
                    (OneAtom::Dx, OneAtom::Dx) => LinComb::zero(),
                    (OneAtom::Dx, OneAtom::Named(n)) => two_term(&f, TwoAtom::DxWedge(n.clone())),
                    (OneAtom::Named(n), OneAtom::Dx) => {
                        two_term(&f.neg(), TwoAtom::DxWedge(n.clone()))
                    }
                    (OneAtom::Named(m), OneAtom::Named(n)) => {
                        if m == n {
                            LinComb::zero()
                        } else {
                            let (lo, hi, flip) = if m < n {
                                (m.clone(), n.clone(), false)
                            } else {
                                (n.clone(), m.clone(), true)
                            };
                            let base = match self.wedge_table.get(&(lo.clone(), hi.clone())) {
                                Some(v) => v.clone(),
                                None => LinComb::gen(TwoTerm {
                                    func: RatFunc::one(),
                                    atom: TwoAtom::Wedge(lo, hi),
                                }),
                            };
                            let base = scale_two_by_func(&base, &f);
                            if flip { base.neg() } else { base }
                        }
                    }
                };
                for (nt, nc) in piece.iter() {
                    out.add_term(nt.clone(), &c * nc);
                }
            }
        }
        out
    }

    /// Degree-one cohomology class: residue coordinates for dx-forms plus
    /// closed named generators. None when the form is not classifiable.
    pub fn h1_class(&self, t: &OneTerm) -> Option<LinComb<H1Basis>> {
        match &t.atom {
            OneAtom::Dx => {
                // poles must lie inside the declared punctures
                let mut den = t.func.den.clone();
                for p in &self.points {
                    let lin = crate::ratfunc::Poly(vec![-p, Rat::one()]);
                    loop {
                        let (q, r) = den.divrem(&lin);
                        if r.is_zero() {
                            den = q;
                        } else {
                            break;
                        }
                    }
                }
                if den.degree() > 0 {
                    return None;
                }
                let mut out = LinComb::zero();
                for p in &self.points {
                    out.add_term(H1Basis::Point(p.clone()), t.func.residue_at(p));
                }
                Some(out)
            }
            OneAtom::Named(n) => {
                let closed = self.d_table.get(n).map(|d| d.is_zero()).unwrap_or(true);
                if !closed || t.func != RatFunc::one() {
                    return None;
                }
                Some(LinComb::gen(H1Basis::Named(n.clone())))
            }
        }
    }

    /// Whether a two-form is exact for the declared differentials (its class
    /// in degree-two cohomology vanishes).
    pub fn h2_class_is_zero(&self, t: &TwoForm) -> bool {
        if t.is_zero() {
            return true;
        }
        let span: Vec<TwoForm> = self
            .d_table
            .keys()
            .map(|n| self.d_one(&named_form(n)))
            .filter(|d| !d.is_zero())
            .collect();
        solve_in_span(t, &span).is_some()
    }
}

/// Basis of degree-one cohomology: residue coordinates at punctures, or
/// closed named generators.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum H1Basis {
    Point(Rat),
    Named(String),
}

impl fmt::Display for H1Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            H1Basis::Point(p) => write!(f, "[dlog(x-{})]", p),
            H1Basis::Named(n) => write!(f, "[{}]", n),
        }
    }
}

// ---------------------------------------------------------------------------
// Connections
// ---------------------------------------------------------------------------

/// A nilpotent connection matrix over a DGA, with a block filtration
/// witnessing strict upper-triangularity.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    pub dga: Dga,
    pub n: Vec<Vec<OneForm>>,
    /// Block sizes, lowest filtration step first.
    pub blocks: Vec<usize>,
}

/// Outcome of the integrability test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Integrability {
    Pass,
    Fail { row: usize, col: usize, entry: String },
}

impl ConnectionData {
    pub fn size(&self) -> usize {
        self.n.len()
    }

    fn block_of(&self, i: usize) -> usize {
        let mut acc = 0;
        for (b, &s) in self.blocks.iter().enumerate() {
            acc += s;
            if i < acc {
                return b;
            }
        }
        self.blocks.len()
    }

    pub fn validate(&self) -> Result<(), SymbolError> {
        let n = self.size();
        if self.blocks.iter().sum::<usize>() != n {
            return Err(SymbolError::BadConnection(format!(
                "block sizes sum to {}, matrix has {} rows",
                self.blocks.iter().sum::<usize>(),
                n
            )));
        }
        for (i, row) in self.n.iter().enumerate() {
            if row.len() != n {
                return Err(SymbolError::BadConnection("matrix is not square".into()));
            }
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() && self.block_of(i) >= self.block_of(j) {
                    return Err(SymbolError::BadConnection(format!(
                        "entry ({}, {}) violates strict block-upper-triangularity",
                        i, j
                    )));
                }
            }
        }
        Ok(())
    }

    /// Computes dN + N ∧ N entrywise.
    pub fn check_integrability(&self) -> Integrability {
        let n = self.size();
        for i in 0..n {
            for j in 0..n {
                let mut acc = self.dga.d_one(&self.n[i][j]);
                for k in 0..n {
                    let w = self.dga.wedge(&self.n[i][k], &self.n[k][j]);
                    acc.add_assign(&w);
                }
                if !acc.is_zero() {
                    return Integrability::Fail {
                        row: i,
                        col: j,
                        entry: two_form_to_string(&acc),
                    };
                }
            }
        }
        Integrability::Pass
    }
}

// ---------------------------------------------------------------------------
// Bar elements
// ---------------------------------------------------------------------------

/// A tensor slot: a function, a one-form, or a two-form. Payloads are
/// monic-canonical; scalars live in the ambient combination.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Slot {
    F(RatFunc),
    O(OneTerm),
    T(TwoTerm),
}

impl Slot {
    fn degree(&self) -> i32 {
        match self {
            Slot::F(_) => 0,
            Slot::O(_) => 1,
            Slot::T(_) => 2,
        }
    }
}

/// A bar generator: a function coefficient and a tensor word of slots.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BarGen {
    pub coeff_fn: RatFunc,
    pub word: Vec<Slot>,
}

impl BarGen {
    pub fn unit_word(word: Vec<Slot>) -> Self {
        BarGen { coeff_fn: RatFunc::one(), word }
    }
}

/// Combination of bar generators.
pub type BarElem = LinComb<BarGen>;

/// Bar degree: Σ (deg slot - 1).
pub fn bar_degree(g: &BarGen) -> i32 {
    g.word.iter().map(|s| s.degree() - 1).sum()
}

/// Tensor word of one-forms, expanded multilinearly.
pub fn bar_word(forms: &[OneForm]) -> BarElem {
    let mut acc: BarElem = LinComb::gen(BarGen::unit_word(Vec::new()));
    for form in forms {
        let mut next = LinComb::zero();
        for (g, c) in acc.iter() {
            for (t, tc) in form.iter() {
                let mut word = g.word.clone();
                word.push(Slot::O(t.clone()));
                next.add_term(BarGen { coeff_fn: g.coeff_fn.clone(), word }, c * tc);
            }
        }
        acc = next;
    }
    acc
}

fn mul_coeff_fn(b: &BarElem, f: &RatFunc) -> BarElem {
    let mut out = LinComb::zero();
    for (g, c) in b.iter() {
        let combined = g.coeff_fn.mul(f);
        let (scalar, monic) = combined.canonical_split();
        out.add_term(BarGen { coeff_fn: monic, word: g.word.clone() }, &scalar * c);
    }
    out
}

/// Expansion of d(slot) into slots with scalars.
fn d_slot(slot: &Slot, dga: &Dga) -> Vec<(Slot, Rat)> {
    match slot {
        Slot::F(f) => dx_form(&f.derivative())
            .iter()
            .map(|(t, c)| (Slot::O(t.clone()), c.clone()))
            .collect(),
        Slot::O(t) => {
            let one: OneForm = LinComb::gen(t.clone());
            dga.d_one(&one).iter().map(|(t, c)| (Slot::T(t.clone()), c.clone())).collect()
        }
        // degrees three and up vanish
        Slot::T(_) => Vec::new(),
    }
}

/// Wedge of adjacent slots (product when one side has degree zero).
fn wedge_slots(a: &Slot, b: &Slot, dga: &Dga) -> Vec<(Slot, Rat)> {
    match (a, b) {
        (Slot::F(f), Slot::F(g)) => {
            let prod = f.mul(g);
            let (s, m) = prod.canonical_split();
            if s.is_zero() { Vec::new() } else { vec![(Slot::F(m), s)] }
        }
        (Slot::F(f), Slot::O(t)) | (Slot::O(t), Slot::F(f)) => {
            let one: OneForm = LinComb::gen(t.clone());
            scale_one_by_func(&one, f)
                .iter()
                .map(|(t, c)| (Slot::O(t.clone()), c.clone()))
                .collect()
        }
        (Slot::O(s), Slot::O(t)) => {
            let a: OneForm = LinComb::gen(s.clone());
            let b: OneForm = LinComb::gen(t.clone());
            dga.wedge(&a, &b).iter().map(|(t, c)| (Slot::T(t.clone()), c.clone())).collect()
        }
        (Slot::F(f), Slot::T(t)) | (Slot::T(t), Slot::F(f)) => {
            let two: TwoForm = LinComb::gen(t.clone());
            scale_two_by_func(&two, f)
                .iter()
                .map(|(t, c)| (Slot::T(t.clone()), c.clone()))
                .collect()
        }
        // degree three and up
        _ => Vec::new(),
    }
}

/// The reduced-bar differential d = d_I + d_C (the coefficient function is
/// inert).
pub fn bar_d(b: &BarElem, dga: &Dga) -> BarElem {
    let mut out: BarElem = LinComb::zero();
    for (g, c) in b.iter() {
        let n = g.word.len();
        // differential part: (-1)^i [jw_1|..|jw_{i-1}|d w_i|w_{i+1}|..]
        for i in 0..n {
            let expansions = d_slot(&g.word[i], dga);
            if expansions.is_empty() {
                continue;
            }
            let mut sign = if (i + 1) % 2 == 1 { -Rat::one() } else { Rat::one() };
            for s in &g.word[..i] {
                if s.degree() % 2 == 1 {
                    sign = -sign;
                }
            }
            for (slot, sc) in expansions {
                let mut word = Vec::with_capacity(n);
                word.extend_from_slice(&g.word[..i]);
                word.push(slot);
                word.extend_from_slice(&g.word[i + 1..]);
                out.add_term(BarGen { coeff_fn: g.coeff_fn.clone(), word }, &(&sign * &sc) * c);
            }
        }
        // wedge part: (-1)^{i+1} [jw_1|..|jw_{i-1}|j w_i ∧ w_{i+1}|w_{i+2}..]
        for i in 0..n.saturating_sub(1) {
            let mut sign = if (i + 1) % 2 == 1 { Rat::one() } else { -Rat::one() };
            for s in &g.word[..i] {
                if s.degree() % 2 == 1 {
                    sign = -sign;
                }
            }
            // j acts on w_i as well
            if g.word[i].degree() % 2 == 1 {
                sign = -sign;
            }
            for (slot, sc) in wedge_slots(&g.word[i], &g.word[i + 1], dga) {
                let mut word = Vec::with_capacity(n - 1);
                word.extend_from_slice(&g.word[..i]);
                word.push(slot);
                word.extend_from_slice(&g.word[i + 2..]);
                out.add_term(BarGen { coeff_fn: g.coeff_fn.clone(), word }, &(&sign * &sc) * c);
            }
        }
        // d_C: -ε(w_1)[w_2|..] + (-1)^ν ε(w_n)[w_1|..|w_{n-1}]
        if n > 0 {
            if let Slot::F(f) = &g.word[0] {
                let rest = BarGen { coeff_fn: g.coeff_fn.clone(), word: g.word[1..].to_vec() };
                let scaled = mul_coeff_fn(&LinComb::gen(rest), f);
                for (ng, nc) in scaled.iter() {
                    out.add_term(ng.clone(), &(-c) * nc);
                }
            }
            if n > 1 {
                if let Slot::F(f) = &g.word[n - 1] {
                    // ν = (deg w_n - 1)·deg[w_1..w_{n-1}] with deg(w_n) = 0
                    let prefix_deg: i32 = g.word[..n - 1].iter().map(|s| s.degree() - 1).sum();
                    let sign =
                        if prefix_deg.rem_euclid(2) == 1 { -Rat::one() } else { Rat::one() };
                    let rest =
                        BarGen { coeff_fn: g.coeff_fn.clone(), word: g.word[..n - 1].to_vec() };
                    let scaled = mul_coeff_fn(&LinComb::gen(rest), f);
                    for (ng, nc) in scaled.iter() {
                        out.add_term(ng.clone(), &(&sign * c) * nc);
                    }
                }
            }
        }
    }
    out
}

/// Shuffle product on bar elements (no signs in degree zero).
pub fn bar_shuffle(a: &BarElem, b: &BarElem) -> BarElem {
    fn shuffle_words(u: &[Slot], v: &[Slot]) -> Vec<Vec<Slot>> {
        if u.is_empty() {
            return vec![v.to_vec()];
        }
        if v.is_empty() {
            return vec![u.to_vec()];
        }
        let mut out = Vec::new();
        for mut w in shuffle_words(&u[1..], v) {
            w.insert(0, u[0].clone());
            out.push(w);
        }
        for mut w in shuffle_words(u, &v[1..]) {
            w.insert(0, v[0].clone());
            out.push(w);
        }
        out
    }
    let mut out = LinComb::zero();
    for (ga, ca) in a.iter() {
        for (gb, cb) in b.iter() {
            let coeff_fn = ga.coeff_fn.mul(&gb.coeff_fn);
            let (s, monic) = coeff_fn.canonical_split();
            for w in shuffle_words(&ga.word, &gb.word) {
                out.add_term(BarGen { coeff_fn: monic.clone(), word: w }, &(ca * cb) * &s);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The symbol
// ---------------------------------------------------------------------------

/// smb_N(ξ) = Σ_k ⟨f, N^k ω⟩ for a rational covector and vector.
pub fn smb(conn: &ConnectionData, f: &[Rat], omega: &[Rat]) -> Result<BarElem, SymbolError> {
    let ff: Vec<RatFunc> = f.iter().map(|c| RatFunc::constant(c.clone())).collect();
    let oo: Vec<RatFunc> = omega.iter().map(|c| RatFunc::constant(c.clone())).collect();
    smb_fn(conn, &ff, &oo)
}

/// smb_N(ξ) for covector and vector with function entries (needed when a
/// basis change transforms coordinates by functions). Function coefficients
/// multiply into the coefficient function of the bar element.
pub fn smb_fn(
    conn: &ConnectionData,
    f: &[RatFunc],
    omega: &[RatFunc],
) -> Result<BarElem, SymbolError> {
    conn.validate()?;
    let n = conn.size();
    if f.len() != n || omega.len() != n {
        return Err(SymbolError::BasisMismatch(format!(
            "covector/vector of length {}/{} against a {}x{} connection",
            f.len(),
            omega.len(),
            n,
            n
        )));
    }
    if let Integrability::Fail { row, col, entry } = conn.check_integrability() {
        return Err(SymbolError::NotIntegrable { row, col, entry });
    }
    // state_i = component of N^k ω at basis index i, as tensor words
    let mut state: Vec<BarElem> = omega
        .iter()
        .map(|c| {
            if c.is_zero() {
                LinComb::zero()
            } else {
                let (scalar, monic) = c.canonical_split();
                LinComb::term(BarGen { coeff_fn: monic, word: Vec::new() }, scalar)
            }
        })
        .collect();
    let mut total: BarElem = LinComb::zero();
    for _ in 0..=conn.blocks.len() {
        for (i, s) in state.iter().enumerate() {
            if f[i].is_zero() || s.is_zero() {
                continue;
            }
            for (g, c) in s.iter() {
                let combined = g.coeff_fn.mul(&f[i]);
                let (scalar, monic) = combined.canonical_split();
                total.add_term(
                    BarGen { coeff_fn: monic, word: g.word.clone() },
                    &scalar * c,
                );
            }
        }
        // next = N·state, prepending the connection form
        let mut next: Vec<BarElem> = vec![LinComb::zero(); n];
        let mut any = false;
        for i in 0..n {
            for j in 0..n {
                if conn.n[i][j].is_zero() || state[j].is_zero() {
                    continue;
                }
                for (t, tc) in conn.n[i][j].iter() {
                    for (g, c) in state[j].iter() {
                        let mut word = Vec::with_capacity(g.word.len() + 1);
                        word.push(Slot::O(t.clone()));
                        word.extend_from_slice(&g.word);
                        next[i]
                            .add_term(BarGen { coeff_fn: g.coeff_fn.clone(), word }, tc * c);
                        any = true;
                    }
                }
            }
        }
        if !any {
            return Ok(total);
        }
        state = next;
    }
    Err(SymbolError::BadConnection("connection matrix is not nilpotent".into()))
}

// ---------------------------------------------------------------------------
// Cohomological symbol
// ---------------------------------------------------------------------------

/// The length-n cohomological symbol: the class word ⟨f, N̄^{⊗n} ω⟩ together
/// with the wedge-insertion kernel verdict.
#[derive(Clone, Debug)]
pub struct Cmb {
    /// The length-n form word.
    pub word: BarElem,
    /// The word with forms replaced by cohomology classes.
    pub classes: LinComb<Vec<H1Basis>>,
    /// Whether every adjacent wedge insertion is exact.
    pub kernel_ok: bool,
}

pub fn cmb(
    conn: &ConnectionData,
    f: &[Rat],
    omega: &[Rat],
    length: usize,
) -> Result<Cmb, SymbolError> {
    conn.validate()?;
    if let Integrability::Fail { row, col, entry } = conn.check_integrability() {
        return Err(SymbolError::NotIntegrable { row, col, entry });
    }
    let n = conn.size();
    if f.len() != n || omega.len() != n {
        return Err(SymbolError::BasisMismatch("covector/vector length".into()));
    }
    if length > conn.blocks.len().saturating_sub(1) {
        return Err(SymbolError::NotLengthN { requested: length });
    }
    // graded part of N: block superdiagonal only
    let mut state: Vec<BarElem> = omega
        .iter()
        .map(|c| {
            if c.is_zero() {
                LinComb::zero()
            } else {
                LinComb::term(BarGen::unit_word(Vec::new()), c.clone())
            }
        })
        .collect();
    for _ in 0..length {
        let mut next: Vec<BarElem> = vec![LinComb::zero(); n];
        for i in 0..n {
            for j in 0..n {
                if conn.n[i][j].is_zero()
                    || state[j].is_zero()
                    || conn.block_of(j) != conn.block_of(i) + 1
                {
                    continue;
                }
                for (t, tc) in conn.n[i][j].iter() {
                    for (g, c) in state[j].iter() {
                        let mut word = Vec::with_capacity(g.word.len() + 1);
                        word.push(Slot::O(t.clone()));
                        word.extend_from_slice(&g.word);
                        next[i]
                            .add_term(BarGen { coeff_fn: g.coeff_fn.clone(), word }, tc * c);
                    }
                }
            }
        }
        state = next;
    }
    let mut word: BarElem = LinComb::zero();
    for (i, s) in state.iter().enumerate() {
        if f[i].is_zero() {
            continue;
        }
        for (g, c) in s.iter() {
            word.add_term(g.clone(), &f[i] * c);
        }
    }
    if word.is_zero() {
        return Err(SymbolError::NotLengthN { requested: length });
    }
    // classes
    let mut classes: LinComb<Vec<H1Basis>> = LinComb::zero();
    for (g, c) in word.iter() {
        let mut expansion: Vec<(Vec<H1Basis>, Rat)> = vec![(Vec::new(), c.clone())];
        for slot in &g.word {
            let Slot::O(t) = slot else {
                return Err(SymbolError::BadConnection("non-form slot in class word".into()));
            };
            let class = conn.dga.h1_class(t).ok_or_else(|| {
                SymbolError::BadConnection(format!(
                    "form {} has no cohomology class",
                    one_term_to_string(t)
                ))
            })?;
            let mut next = Vec::new();
            for (prefix, pc) in &expansion {
                for (b, bc) in class.iter() {
                    let mut w = prefix.clone();
                    w.push(b.clone());
                    next.push((w, pc * bc));
                }
            }
            expansion = next;
        }
        for (w, wc) in expansion {
            classes.add_term(w, wc);
        }
    }
    let kernel_ok = cmb_kernel_check(&word, &conn.dga);
    Ok(Cmb { word, classes, kernel_ok })
}

/// The wedge-insertion kernel check on an all-form word combination.
pub fn cmb_kernel_check(word: &BarElem, dga: &Dga) -> bool {
    let max_len = word.iter().map(|(g, _)| g.word.len()).max().unwrap_or(0);
    for k in 0..max_len.saturating_sub(1) {
        // combination over (prefix, wedge two-form, suffix)
        let mut inserted: LinComb<(Vec<Slot>, TwoTerm, Vec<Slot>)> = LinComb::zero();
        for (g, c) in word.iter() {
            if g.word.len() < k + 2 {
                continue;
            }
            let (Slot::O(a), Slot::O(b)) = (&g.word[k], &g.word[k + 1]) else {
                continue;
            };
            let w = dga.wedge(&LinComb::gen(a.clone()), &LinComb::gen(b.clone()));
            for (t, tc) in w.iter() {
                inserted.add_term(
                    (g.word[..k].to_vec(), t.clone(), g.word[k + 2..].to_vec()),
                    c * tc,
                );
            }
        }
        // group by (prefix, suffix) and test exactness of the middle
        let mut grouped: BTreeMap<(Vec<Slot>, Vec<Slot>), TwoForm> = BTreeMap::new();
        for ((pre, mid, post), c) in inserted.iter() {
            grouped
                .entry((pre.clone(), post.clone()))
                .or_default()
                .add_term(mid.clone(), c.clone());
        }
        for (_, two) in grouped {
            if !dga.h2_class_is_zero(&two) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Equality modulo the relation subspace
// ---------------------------------------------------------------------------

/// Verdict of [`equal_mod_r`].
#[derive(Clone, Debug)]
pub enum EqualModR {
    Equal(BarElem),
    Distinct,
    Inconclusive,
}

/// Extra generators for the bounded boundary search.
#[derive(Clone, Debug, Default)]
pub struct Hints {
    pub functions: Vec<RatFunc>,
    pub forms: Vec<OneForm>,
}

/// Decides whether a - b is a boundary d(candidate) over the candidate space
/// of tensors of length ≤ len+1 built from the forms and functions appearing
/// in the inputs and the hints, with exactly one function slot. Distinct is
/// certified by a nonzero top-length cohomology class; anything else is
/// Inconclusive.
pub fn equal_mod_r(a: &BarElem, b: &BarElem, hints: &Hints, dga: &Dga) -> EqualModR {
    let diff = a.sub(b);
    if diff.is_zero() {
        return EqualModR::Equal(LinComb::zero());
    }
    let max_len = diff.iter().map(|(g, _)| g.word.len()).max().unwrap_or(0);

    // collect candidate slots
    let mut form_slots: Vec<OneTerm> = Vec::new();
    let mut funcs: Vec<RatFunc> = Vec::new();
    let push_form = |t: &OneTerm, v: &mut Vec<OneTerm>| {
        if !v.contains(t) {
            v.push(t.clone());
        }
    };
    for (g, _) in a.iter().chain(b.iter()) {
        for s in &g.word {
            match s {
                Slot::O(t) => push_form(t, &mut form_slots),
                Slot::F(f) => {
                    if !funcs.contains(f) {
                        funcs.push(f.clone());
                    }
                }
                Slot::T(_) => {}
            }
        }
    }
    for form in &hints.forms {
        for (t, _) in form.iter() {
            push_form(t, &mut form_slots);
        }
    }
    for f in &hints.functions {
        let (_, monic) = f.canonical_split();
        if !funcs.contains(&monic) {
            funcs.push(monic);
        }
    }

    // candidate words: exactly one function slot among forms
    let mut candidates: Vec<BarElem> = Vec::new();
    let max_candidates = 5000usize;
    'outer: for len in 1..=(max_len + 1) {
        for fn_pos in 0..len {
            let mut stack: Vec<Vec<Slot>> = vec![Vec::new()];
            for pos in 0..len {
                let mut next = Vec::new();
                for w in &stack {
                    if pos == fn_pos {
                        for f in &funcs {
                            let mut w2 = w.clone();
                            w2.push(Slot::F(f.clone()));
                            next.push(w2);
                        }
                    } else {
                        for t in &form_slots {
                            let mut w2 = w.clone();
                            w2.push(Slot::O(t.clone()));
                            next.push(w2);
                        }
                    }
                    if next.len() > max_candidates {
                        break 'outer;
                    }
                }
                stack = next;
            }
            for w in stack {
                candidates.push(LinComb::gen(BarGen::unit_word(w)));
            }
            if candidates.len() > max_candidates {
                break 'outer;
            }
        }
    }

    let span: Vec<BarElem> = candidates.iter().map(|c| bar_d(c, dga)).collect();
    if let Some(coords) = solve_in_span(&diff, &span) {
        let mut preimage: BarElem = LinComb::zero();
        for (cand, c) in candidates.iter().zip(&coords) {
            preimage.add_assign(&cand.scale(c));
        }
        return EqualModR::Equal(preimage);
    }

    // cohomological obstruction at the top length
    let mut top_classes: LinComb<Vec<H1Basis>> = LinComb::zero();
    for (g, c) in diff.iter() {
        if g.word.len() != max_len || g.coeff_fn != RatFunc::one() {
            continue;
        }
        let mut expansion: Vec<(Vec<H1Basis>, Rat)> = vec![(Vec::new(), c.clone())];
        let mut ok = true;
        for slot in &g.word {
            let Slot::O(t) = slot else {
                ok = false;
                break;
            };
            let Some(class) = dga.h1_class(t) else {
                ok = false;
                break;
            };
            let mut next = Vec::new();
            for (prefix, pc) in &expansion {
                for (bas, bc) in class.iter() {
                    let mut w = prefix.clone();
                    w.push(bas.clone());
                    next.push((w, pc * bc));
                }
            }
            expansion = next;
        }
        if !ok {
            return EqualModR::Inconclusive;
        }
        for (w, wc) in expansion {
            top_classes.add_term(w, wc);
        }
    }
    if !top_classes.is_zero() {
        EqualModR::Distinct
    } else {
        EqualModR::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Polylogarithm families on the thrice-punctured line
// ---------------------------------------------------------------------------

/// The connection on words of length ≤ max_len in the letters {0, 1}, with
/// letter a acting through the form dx/(x-a). Basis words are ordered by
/// length then lexicographically; the blocks are the length strata.
pub struct KzConnection {
    pub conn: ConnectionData,
    pub basis: Vec<Word>,
}

pub fn kz_connection(max_len: usize) -> KzConnection {
    let dga = Dga::p1_minus(&[Rat::zero(), Rat::one()]);
    let mut basis: Vec<Word> = Vec::new();
    for len in 0..=max_len {
        let mut words = Vec::new();
        for bits in 0..(1u32 << len) {
            let letters: Vec<i8> = (0..len).map(|i| ((bits >> i) & 1) as i8).collect();
            words.push(Word(letters));
        }
        words.sort();
        basis.extend(words);
    }
    let index: BTreeMap<&Word, usize> = basis.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let n = basis.len();
    let mut mat = vec![vec![LinComb::zero(); n]; n];
    for (j, w) in basis.iter().enumerate() {
        if w.is_empty() {
            continue;
        }
        let parent = Word(w.0[..w.len() - 1].to_vec());
        let i = index[&parent];
        let a = *w.0.last().unwrap();
        mat[i][j] = dlog_form(&Rat::from_int(a as i64));
    }
    let blocks: Vec<usize> = (0..=max_len).map(|l| 1usize << l).collect();
    KzConnection { conn: ConnectionData { dga, n: mat, blocks }, basis }
}

impl KzConnection {
    /// Covector dual to the empty word and vector for the given word.
    pub fn coordinates(&self, w: &Word) -> Result<(Vec<Rat>, Vec<Rat>), SymbolError> {
        let n = self.basis.len();
        let mut f = vec![Rat::zero(); n];
        f[0] = Rat::one();
        let j = self
            .basis
            .iter()
            .position(|b| b == w)
            .ok_or_else(|| SymbolError::BasisMismatch(format!("word {} beyond basis", w)))?;
        let mut omega = vec![Rat::zero(); n];
        omega[j] = Rat::one();
        Ok((f, omega))
    }
}

/// The symbol of the classical polylogarithm Li_n: one dx/(1-x) slot
/// followed by n-1 copies of dx/x.
pub fn li_symbol(n: usize) -> Result<BarElem, SymbolError> {
    assert!(n >= 1);
    let kz = kz_connection(n);
    let mut letters = vec![1i8];
    letters.extend(std::iter::repeat(0).take(n - 1));
    let (f, omega) = kz.coordinates(&Word(letters))?;
    let raw = smb(&kz.conn, &f, &omega)?;
    // one letter 1 in the word: Li_n = -I(0; 1 0^{n-1}; x)
    Ok(raw.neg())
}

/// The two supported base points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasePoint {
    TangentialZero,
    TangentialOne,
}

impl BasePoint {
    pub fn parse(s: &str) -> Result<Self, SymbolError> {
        match s {
            "0" => Ok(BasePoint::TangentialZero),
            "1" => Ok(BasePoint::TangentialOne),
            other => Err(SymbolError::UnsupportedBasePoint(other.into())),
        }
    }
}

/// A family element over the thrice-punctured line: a combination of words
/// I(0; w; x) in the letters {0, 1}.
pub type FamilyExpr = LinComb<Word>;

/// The family element of a word in the letters e0 = 0, e1 = 1, with the
/// sign (-1)^{#e1}.
pub fn family_li(eword: &Word) -> FamilyExpr {
    let ones = eword.0.iter().filter(|&&a| a == 1).count();
    let sign = if ones % 2 == 1 { -Rat::one() } else { Rat::one() };
    LinComb::term(eword.clone(), sign)
}

/// The classical polylogarithm family Li_n.
pub fn family_li_n(n: usize) -> FamilyExpr {
    assert!(n >= 1);
    let mut letters = vec![1i8];
    letters.extend(std::iter::repeat(0).take(n - 1));
    family_li(&Word(letters))
}

/// The symbol based at a tangential point: (ev_t ⊗ smb) of the family
/// coaction. Evaluation at 0 kills every nonempty prefix; evaluation at 1
/// produces shuffle-regularized constants. Constant de Rham factors of
/// positive weight die under the symbol.
pub fn smb_at_point(
    x: &FamilyExpr,
    base: BasePoint,
) -> Result<Vec<(MotivicExpr, BarElem)>, SymbolError> {
    let mut grouped: BTreeMap<Vec<Slot>, MotivicExpr> = BTreeMap::new();
    for (word, coeff) in x.iter() {
        let delta = family_coaction(word)?;
        for ((left, fam), c) in delta.iter() {
            if !fam.constant.is_empty() {
                continue;
            }
            let ev = match base {
                BasePoint::TangentialZero => eval_family_at_0(left),
                BasePoint::TangentialOne => eval_family_at_1(left)?,
            };
            if ev.is_zero() {
                continue;
            }
            let slots: Vec<Slot> = fam
                .family
                .0
                .iter()
                .map(|&a| {
                    let form = dlog_form(&Rat::from_int(a as i64));
                    let (t, s) = form.iter().next().expect("dlog form is a single term");
                    debug_assert!(s.is_one());
                    Slot::O(t.clone())
                })
                .collect();
            let scaled = ev.scale(&(coeff * c));
            let entry = grouped.entry(slots).or_insert_with(MotivicExpr::zero);
            *entry = entry.add(&scaled);
        }
    }
    let mut out = Vec::new();
    for (slots, expr) in grouped {
        if expr.is_zero() {
            continue;
        }
        out.push((expr, LinComb::gen(BarGen::unit_word(slots))));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The worked surface-like connection
// ---------------------------------------------------------------------------

/// Three named one-forms w1, w2, w12 with dw12 = -(w1 ∧ w2) and the wedge
/// w1 ∧ w2 equal to a named two-form T.
pub fn example_connection() -> ConnectionData {
    let mut dga = Dga::p1_minus(&[Rat::zero(), Rat::one()]);
    let t: TwoForm =
        LinComb::gen(TwoTerm { func: RatFunc::one(), atom: TwoAtom::Named("T".into()) });
    dga.named_two.push("T".into());
    dga.wedge_table.insert(("w1".into(), "w2".into()), t.clone());
    dga.d_table.insert("w1".into(), LinComb::zero());
    dga.d_table.insert("w2".into(), LinComb::zero());
    dga.d_table.insert("w12".into(), t.neg());
    let z = LinComb::zero;
    let n = vec![
        vec![z(), named_form("w1"), named_form("w12")],
        vec![z(), z(), named_form("w2")],
        vec![z(), z(), z()],
    ];
    ConnectionData { dga, n, blocks: vec![1, 1, 1] }
}

/// Same matrix with dw12 = 0 while w1 ∧ w2 stays nonzero: integrability
/// fails at the top-right entry.
pub fn example_connection_broken() -> ConnectionData {
    let mut c = example_connection();
    c.dga.d_table.insert("w12".into(), LinComb::zero());
    c
}

/// Basis change e2 ↦ e2 + f·e1 of the worked connection.
pub fn example_connection_sheared(f: &RatFunc) -> ConnectionData {
    let mut c = example_connection();
    // the (0,2) entry gains f·w1, the (1,2) entry gains df
    let extra02 = scale_one_by_func(&named_form("w1"), f);
    c.n[0][2].add_assign(&extra02);
    c.n[1][2].add_assign(&dx_form(&f.derivative()));
    c
}

// ---------------------------------------------------------------------------
// Display and serialization
// ---------------------------------------------------------------------------

pub fn one_term_to_string(t: &OneTerm) -> String {
    match &t.atom {
        OneAtom::Dx => {
            if t.func == RatFunc::one() {
                "dx".into()
            } else if t.func.num == crate::ratfunc::Poly::one() {
                let den = format!("{}", t.func.den);
                if den.contains(' ') {
                    format!("dx/({})", den)
                } else {
                    format!("dx/{}", den)
                }
            } else {
                format!("({})*dx", t.func)
            }
        }
        OneAtom::Named(n) => {
            if t.func == RatFunc::one() {
                n.clone()
            } else {
                format!("({})*{}", t.func, n)
            }
        }
    }
}

pub fn one_form_to_string(f: &OneForm) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    let mut first = true;
    for (t, c) in f.iter() {
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
        if mag.is_one() {
            out.push_str(&one_term_to_string(t));
        } else {
            out.push_str(&format!("{}*{}", mag, one_term_to_string(t)));
        }
    }
    out
}

fn two_term_to_string(t: &TwoTerm) -> String {
    let atom = match &t.atom {
        TwoAtom::Named(n) => n.clone(),
        TwoAtom::DxWedge(n) => format!("dx^{}", n),
        TwoAtom::Wedge(a, b) => format!("{}^{}", a, b),
    };
    if t.func == RatFunc::one() {
        atom
    } else {
        format!("({})*{}", t.func, atom)
    }
}

pub fn two_form_to_string(f: &TwoForm) -> String {
    if f.is_zero() {
        return "0".into();
    }
    f.iter()
        .map(|(t, c)| format!("{}*{}", c, two_term_to_string(t)))
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn slot_to_string(s: &Slot) -> String {
    match s {
        Slot::F(f) => format!("{}", f),
        Slot::O(t) => one_term_to_string(t),
        Slot::T(t) => two_term_to_string(t),
    }
}

pub fn bar_to_string(b: &BarElem) -> String {
    if b.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    let mut first = true;
    for (g, c) in b.iter() {
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
        let word = if g.word.is_empty() {
            "[]".to_string()
        } else {
            format!("[{}]", g.word.iter().map(slot_to_string).collect::<Vec<_>>().join("|"))
        };
        let mut piece = String::new();
        if !mag.is_one() {
            piece.push_str(&format!("{}*", mag));
        }
        if g.coeff_fn != RatFunc::one() {
            piece.push_str(&format!("({})*", g.coeff_fn));
        }
        piece.push_str(&word);
        out.push_str(&piece);
    }
    out
}

/// Connection file schema.
#[derive(Serialize, Deserialize)]
pub struct ConnectionDoc {
    pub points: Vec<String>,
    pub one_forms: Vec<OneFormDecl>,
    #[serde(default)]
    pub two_forms: Vec<String>,
    #[serde(default)]
    pub wedges: Vec<WedgeDecl>,
    pub matrix: Vec<Vec<String>>,
    pub blocks: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct OneFormDecl {
    pub name: String,
    pub d: String,
}

#[derive(Serialize, Deserialize)]
pub struct WedgeDecl {
    pub left: String,
    pub right: String,
    pub value: String,
}

impl ConnectionData {
    pub fn to_json(&self) -> String {
        let doc = ConnectionDoc {
            points: self.dga.points.iter().map(|p| p.to_string()).collect(),
            one_forms: self
                .dga
                .d_table
                .iter()
                .map(|(n, d)| OneFormDecl { name: n.clone(), d: two_form_to_string(d) })
                .collect(),
            two_forms: self.dga.named_two.clone(),
            wedges: self
                .dga
                .wedge_table
                .iter()
                .map(|((a, b), v)| WedgeDecl {
                    left: a.clone(),
                    right: b.clone(),
                    value: two_form_to_string(v),
                })
                .collect(),
            matrix: self
                .n
                .iter()
                .map(|row| row.iter().map(one_form_to_string).collect())
                .collect(),
            blocks: self.blocks.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, SymbolError> {
        let doc: ConnectionDoc =
            serde_json::from_str(s).map_err(|e| SymbolError::BadConnection(e.to_string()))?;
        let mut points = Vec::new();
        for p in &doc.points {
            points.push(
                p.parse::<Rat>()
                    .map_err(|e| SymbolError::BadConnection(format!("point {p:?}: {e}")))?,
            );
        }
        let mut dga = Dga::p1_minus(&points);
        dga.named_two = doc.two_forms.clone();
        let names: Vec<String> = doc.one_forms.iter().map(|d| d.name.clone()).collect();
        for decl in &doc.one_forms {
            let d = parse_two_form(&decl.d, &names, &doc.two_forms)?;
            dga.d_table.insert(decl.name.clone(), d);
        }
        for w in &doc.wedges {
            let v = parse_two_form(&w.value, &names, &doc.two_forms)?;
            let (a, b) = (w.left.clone(), w.right.clone());
            if a < b {
                dga.wedge_table.insert((a, b), v);
            } else {
                dga.wedge_table.insert((b, a), v.neg());
            }
        }
        let n = doc.matrix.len();
        let mut mat = Vec::with_capacity(n);
        for row in &doc.matrix {
            if row.len() != n {
                return Err(SymbolError::BadConnection("matrix is not square".into()));
            }
            let mut out = Vec::with_capacity(n);
            for cell in row {
                out.push(parse_one_form(cell, &names)?);
            }
            mat.push(out);
        }
        let conn = ConnectionData { dga, n: mat, blocks: doc.blocks };
        conn.validate()?;
        Ok(conn)
    }
}

// A small expression parser for form entries: sums of terms, each a product
// of rational-function factors and at most one form atom ("dx" or a declared
// name); division only by functions; '^' for integer powers of functions.

struct FormVal {
    func: RatFunc,
    atom: Option<OneAtom>,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(s: &str, names: &'a [String]) -> Self {
        Parser { chars: s.chars().collect(), pos: 0, names }
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

    fn parse_expr(&mut self) -> Result<Vec<(Rat, FormVal)>, SymbolError> {
        let mut terms = Vec::new();
        let mut sign = Rat::one();
        loop {
            match self.peek() {
                Some('+') => {
                    self.bump();
                    continue;
                }
                Some('-') => {
                    self.bump();
                    sign = -sign;
                    continue;
                }
                None => break,
                Some(')') => break,
                _ => {}
            }
            let val = self.parse_term()?;
            terms.push((sign.clone(), val));
            sign = Rat::one();
            match self.peek() {
                Some('+') | Some('-') => continue,
                Some(')') | None => break,
                Some(c) => {
                    return Err(SymbolError::BadConnection(format!("unexpected {c:?} in form")));
                }
            }
        }
        Ok(terms)
    }

    fn parse_term(&mut self) -> Result<FormVal, SymbolError> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    acc = mul_vals(acc, rhs)?;
                }
                Some('/') => {
                    self.bump();
                    let rhs = self.parse_factor()?;
                    if rhs.atom.is_some() {
                        return Err(SymbolError::BadConnection("division by a form".into()));
                    }
                    if rhs.func.is_zero() {
                        return Err(SymbolError::BadConnection("division by zero".into()));
                    }
                    acc = FormVal { func: acc.func.div(&rhs.func), atom: acc.atom };
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<FormVal, SymbolError> {
        let base = self.parse_primary()?;
        if self.peek() == Some('^') {
            self.bump();
            let mut neg = false;
            if self.peek() == Some('-') {
                self.bump();
                neg = true;
            }
            let mut digits = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            let e: u32 =
                digits.parse().map_err(|_| SymbolError::BadConnection("bad exponent".into()))?;
            if base.atom.is_some() {
                return Err(SymbolError::BadConnection("power of a form".into()));
            }
            let mut f = RatFunc::one();
            for _ in 0..e {
                f = f.mul(&base.func);
            }
            if neg {
                f = RatFunc::one().div(&f);
            }
            return Ok(FormVal { func: f, atom: None });
        }
        Ok(base)
    }

    fn parse_primary(&mut self) -> Result<FormVal, SymbolError> {
        match self.peek() {
            Some('(') => {
                self.bump();
                let inner = self.parse_expr()?;
                if self.bump() != Some(')') {
                    return Err(SymbolError::BadConnection("unbalanced parentheses".into()));
                }
                let mut func = RatFunc::zero();
                for (s, v) in inner {
                    if v.atom.is_some() {
                        return Err(SymbolError::BadConnection(
                            "forms inside parentheses are not supported".into(),
                        ));
                    }
                    func = func.add(&v.func.scale(&s));
                }
                Ok(FormVal { func, atom: None })
            }
            Some(c) if c.is_ascii_digit() => {
                let mut digits = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                let n: i64 =
                    digits.parse().map_err(|_| SymbolError::BadConnection("bad number".into()))?;
                Ok(FormVal { func: RatFunc::constant(Rat::from_int(n)), atom: None })
            }
            Some(_) => {
                self.skip_ws();
                let rest: String = self.chars[self.pos..].iter().collect();
                // declared names first (longest match), then dx, then x
                let mut best: Option<String> = None;
                for name in self.names {
                    if rest.starts_with(name.as_str())
                        && best.as_ref().map_or(true, |b| name.len() > b.len())
                    {
                        best = Some(name.clone());
                    }
                }
                if let Some(name) = best {
                    self.pos += name.chars().count();
                    return Ok(FormVal { func: RatFunc::one(), atom: Some(OneAtom::Named(name)) });
                }
                if rest.starts_with("dx") {
                    self.pos += 2;
                    return Ok(FormVal { func: RatFunc::one(), atom: Some(OneAtom::Dx) });
                }
                if rest.starts_with('x') {
                    self.pos += 1;
                    return Ok(FormVal { func: RatFunc::x(), atom: None });
                }
                Err(SymbolError::BadConnection(format!("unexpected token near {:?}", rest)))
            }
            None => Err(SymbolError::BadConnection("empty form expression".into())),
        }
    }
}

fn mul_vals(a: FormVal, b: FormVal) -> Result<FormVal, SymbolError> {
    let atom = match (a.atom, b.atom) {
        (None, x) | (x, None) => x,
        (Some(_), Some(_)) => {
            return Err(SymbolError::BadConnection("product of two forms in a one-form".into()));
        }
    };
    Ok(FormVal { func: a.func.mul(&b.func), atom })
}

/// Parses a one-form expression like "dx/(1-x) + 2*w1 - x*w12".
pub fn parse_one_form(s: &str, names: &[String]) -> Result<OneForm, SymbolError> {
    let s = s.trim();
    if s == "0" {
        return Ok(LinComb::zero());
    }
    let mut p = Parser::new(s, names);
    let terms = p.parse_expr()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(SymbolError::BadConnection(format!("trailing input in {s:?}")));
    }
    let mut out: OneForm = LinComb::zero();
    for (sign, v) in terms {
        let atom = v.atom.ok_or_else(|| {
            SymbolError::BadConnection(format!("degree-zero term in one-form {s:?}"))
        })?;
        for (t, c) in one_term(&v.func, atom).iter() {
            out.add_term(t.clone(), &sign * c);
        }
    }
    Ok(out)
}

/// Parses a two-form expression: sums of c*NAME or c*A^B where A, B are
/// declared one-forms ('^' denotes the wedge here).
pub fn parse_two_form(
    s: &str,
    one_names: &[String],
    two_names: &[String],
) -> Result<TwoForm, SymbolError> {
    let s = s.trim();
    if s == "0" {
        return Ok(LinComb::zero());
    }
    let mut out: TwoForm = LinComb::zero();
    let mut terms: Vec<(Rat, String)> = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    let mut sign = Rat::one();
    for ch in s.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 => {
                if !cur.trim().is_empty() {
                    terms.push((sign.clone(), cur.trim().to_string()));
                    cur = String::new();
                    sign = Rat::one();
                }
                if ch == '-' {
                    sign = -sign;
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        terms.push((sign, cur.trim().to_string()));
    }
    for (sgn, term) in terms {
        let (coeff, rest) = match term.split_once('*') {
            Some((c, rest)) if c.trim().parse::<Rat>().is_ok() => {
                (c.trim().parse::<Rat>().unwrap(), rest.trim().to_string())
            }
            _ => (Rat::one(), term.clone()),
        };
        let atom = if two_names.contains(&rest) {
            TwoAtom::Named(rest.clone())
        } else if let Some((a, b)) = rest.split_once('^') {
            let (a, b) = (a.trim().to_string(), b.trim().to_string());
            if a == "dx" && one_names.contains(&b) {
                TwoAtom::DxWedge(b)
            } else if one_names.contains(&a) && one_names.contains(&b) {
                if a < b {
                    TwoAtom::Wedge(a, b)
                } else {
                    out.add_term(
                        TwoTerm { func: RatFunc::one(), atom: TwoAtom::Wedge(b, a) },
                        -&(&sgn * &coeff),
                    );
                    continue;
                }
            } else {
                return Err(SymbolError::BadConnection(format!("unknown wedge {rest:?}")));
            }
        } else {
            return Err(SymbolError::BadConnection(format!("unknown two-form {rest:?}")));
        };
        out.add_term(TwoTerm { func: RatFunc::one(), atom }, &sgn * &coeff);
    }
    Ok(out)
}
