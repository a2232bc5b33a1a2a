//! Cross-module structural invariants that need the relation table.

use std::sync::OnceLock;

use periods::exact::{LinComb, Rat, SparseMat};
use periods::motivic::{
    DrGen, MotivicExpr, coaction, derivation_d, galois_conjugates, mono_to_expr, project_dr,
    reduce_mot, rewrite_zeta2_to_lefschetz, unipotency_degree,
};
use periods::relations::RelationTable;
use periods::words::{Composition, Word};

fn table() -> &'static RelationTable {
    static TABLE: OnceLock<RelationTable> = OnceLock::new();
    TABLE.get_or_init(|| RelationTable::datamine(8).expect("datamine to weight 8"))
}

fn zeta(parts: &[i64]) -> MotivicExpr {
    MotivicExpr::zeta(&Composition::from_parts(parts)).unwrap()
}

/// Every coaction term satisfies the weight bookkeeping: the right factor
/// carries the full weight of the input, and the left factor's weight equals
/// the right factor's Lefschetz power.
#[test]
fn coaction_weight_bookkeeping() {
    let samples = vec![
        zeta(&[3]),
        zeta(&[2, 3]),
        zeta(&[3, 5]),
        zeta(&[2]).mul(&MotivicExpr::log_prime(5).unwrap()),
        MotivicExpr::lefschetz(2).mul(&zeta(&[1, 2])),
    ];
    for x in samples {
        let w = x.weight().expect("homogeneous sample") as i64;
        for ((m, d), _) in coaction(&x).0.iter() {
            assert_eq!(d.weight(), w, "right factor must carry full weight");
            assert_eq!(m.weight() as i64, d.lef, "left weight equals the Lefschetz power");
        }
    }
}

/// Counit recovery for products including Lefschetz and logarithm factors.
#[test]
fn counit_recovers_products() {
    let x = zeta(&[2, 3])
        .mul(&MotivicExpr::lefschetz(1))
        .mul(&MotivicExpr::log_prime(2).unwrap());
    assert_eq!(coaction(&x).counit_right(), x);
}

/// Unipotency degree is subadditive on products.
#[test]
fn unipotency_subadditive() {
    let t = table();
    let pairs = [
        (vec![2i64], vec![3i64]),
        (vec![3], vec![5]),
        (vec![3], vec![2, 3]),
        (vec![2], vec![1, 3]),
        (vec![1, 2], vec![1, 2]),
    ];
    for (a, b) in pairs {
        let x = zeta(&a);
        let y = zeta(&b);
        let ux = unipotency_degree(&x, t).unwrap();
        let uy = unipotency_degree(&y, t).unwrap();
        let uxy = unipotency_degree(&x.mul(&y), t).unwrap();
        assert!(uxy <= ux + uy, "{:?}×{:?}: {} > {} + {}", a, b, uxy, ux, uy);
    }
}

/// The conjugate space is closed under the coaction: the left component
/// attached to every (canonically reduced, nonzero) right factor of the
/// coaction of a conjugate lies back in the span.
#[test]
fn conjugates_closed_under_coaction() {
    let t = table();
    for parts in [vec![3i64], vec![2, 3], vec![3, 5]] {
        let x = zeta(&parts);
        let conj = galois_conjugates(&x, t).unwrap();
        let span: Vec<_> = conj.iter().map(|e| reduce_mot(e, t).unwrap()).collect();
        // left components grouped by the canonical right factor (the de Rham
        // quotient kills right factors in the ζ(2) ideal)
        let mut stripped = Vec::new();
        for e in &conj {
            let mut groups: std::collections::BTreeMap<_, periods::exact::LinComb<_>> =
                std::collections::BTreeMap::new();
            for ((m, d), c) in coaction(e).0.iter() {
                let classes = periods::motivic::reduce_dr_word(&d.word, t).unwrap();
                for (rmono, rc) in classes.iter() {
                    groups
                        .entry((d.lef, d.nus.clone(), rmono.clone()))
                        .or_default()
                        .add_term(m.clone(), c * rc);
                }
            }
            for (_, left) in groups {
                let red = reduce_mot(&MotivicExpr(left), t).unwrap();
                if !red.is_zero() {
                    stripped.push(red);
                }
            }
        }
        let mut keys: Vec<_> = span
            .iter()
            .chain(stripped.iter())
            .flat_map(|lc| lc.iter().map(|(k, _)| k.clone()))
            .collect();
        keys.sort();
        keys.dedup();
        let index: std::collections::BTreeMap<_, usize> =
            keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut mat = SparseMat::new(keys.len());
        for lc in &span {
            mat.push_row(lc.iter().map(|(k, c)| (index[k], c.clone())).collect());
        }
        let base_rank = mat.rref().rank;
        assert_eq!(base_rank, conj.len(), "span must be independent");
        let mut extended = mat.clone();
        for lc in &stripped {
            extended.push_row(lc.iter().map(|(k, c)| (index[k], c.clone())).collect());
        }
        assert_eq!(extended.rref().rank, base_rank, "{:?}: span not coaction-closed", parts);
    }
}

/// Ranks of the standard conjugate sets.
#[test]
fn conjugate_ranks() {
    let t = table();
    assert_eq!(galois_conjugates(&MotivicExpr::lefschetz(1), t).unwrap().len(), 1);
    assert_eq!(galois_conjugates(&zeta(&[3]), t).unwrap().len(), 2);
    assert_eq!(galois_conjugates(&zeta(&[3, 5]), t).unwrap().len(), 3);
}

/// Idempotence of reduction across the basis, and basis monomials reduce to
/// themselves.
#[test]
fn reduction_fixed_points() {
    let t = table();
    for w in 2..=8u32 {
        for mono in t.basis(w).unwrap() {
            let red = t.reduce_to_basis(&mono_to_expr(mono)).unwrap();
            assert_eq!(red.len(), 1);
            assert_eq!(red.coeff(mono), Rat::one());
        }
    }
}

/// Derivation components: the degree-r class extraction.
#[test]
fn derivation_components() {
    let t = table();
    // the degree-3 component of zeta(3) is the unit
    assert_eq!(derivation_d(3, &zeta(&[3]), t).unwrap(), MotivicExpr::one());
    // zeta(3,5): the degree-5 derivation leaves -5 zeta(3), the degree-3 one
    // vanishes
    let d5 = derivation_d(5, &zeta(&[3, 5]), t).unwrap();
    assert_eq!(d5, zeta(&[3]).scale(&Rat::from_int(-5)));
    assert!(derivation_d(3, &zeta(&[3, 5]), t).unwrap().is_zero());
    // zeta(2) is semi-simple
    assert!(derivation_d(3, &zeta(&[2]).mul(&zeta(&[2])), t).unwrap().is_zero());
    // Leibniz shape: D_3 of zeta(3)·zeta(5) is zeta(5), and D_5 is zeta(3)
    let prod = zeta(&[3]).mul(&zeta(&[5]));
    assert_eq!(derivation_d(3, &prod, t).unwrap(), zeta(&[5]));
    assert_eq!(derivation_d(5, &prod, t).unwrap(), zeta(&[3]));
    // range errors
    assert!(derivation_d(4, &zeta(&[5]), t).is_err());
    assert!(derivation_d(7, &zeta(&[5]), t).is_err());
}

/// Projection to de Rham periods: kernel and images.
#[test]
fn projection_to_de_rham() {
    let t = table();
    // L ↦ 0
    assert!(project_dr(&MotivicExpr::lefschetz(1), t).unwrap().is_zero());
    // zeta(3) ↦ its de Rham version (the same word, Lefschetz-free)
    let img = project_dr(&zeta(&[3]), t).unwrap();
    let mut expected: LinComb<DrGen> = LinComb::zero();
    expected.add_term(DrGen { lef: 0, word: Word::letters(&[1, 0, 0]), nus: vec![] }, -Rat::one());
    assert_eq!(img, expected);
    // zeta(2) and zeta(4) die (the kernel is the zeta(2) ideal)
    assert!(project_dr(&zeta(&[2]), t).unwrap().is_zero());
    assert!(project_dr(&zeta(&[4]), t).unwrap().is_zero());
    // log(p) ↦ ν_p
    let img = project_dr(&MotivicExpr::log_prime(3).unwrap(), t).unwrap();
    assert_eq!(img, LinComb::gen(DrGen { lef: 0, word: Word::empty(), nus: vec![3] }));
    // ring homomorphism on a product: zeta(2)·zeta(3) ↦ 0
    assert!(project_dr(&zeta(&[2]).mul(&zeta(&[3])), t).unwrap().is_zero());
}

/// The explicit L-form normalization: zeta(2) rewrites to -L²/24 and the
/// known weight-4 combination cancels exactly.
#[test]
fn zeta2_normalization_pass() {
    let t = table();
    let rewritten = rewrite_zeta2_to_lefschetz(&zeta(&[2]), t).unwrap();
    assert_eq!(rewritten, MotivicExpr::lefschetz(2).scale(&Rat::new(-1, 24)));
    // zeta(2) + L²/24 vanishes in the L-form
    let combo = zeta(&[2]).add(&MotivicExpr::lefschetz(2).scale(&Rat::new(1, 24)));
    assert!(rewrite_zeta2_to_lefschetz(&combo, t).unwrap().is_zero());
    // zeta(4) = (2/5) zeta(2)² becomes a rational multiple of L⁴
    let rewritten = rewrite_zeta2_to_lefschetz(&zeta(&[4]), t).unwrap();
    assert_eq!(
        rewritten,
        MotivicExpr::lefschetz(4).scale(&(&Rat::new(2, 5) * &Rat::new(1, 576)))
    );
    // words outside the zeta(2) ideal keep their transcendental part:
    // zeta(2,3) = 3 zeta(2)zeta(3) - 11/2 zeta(5) rewrites to
    // -1/8 L² zeta(3) - 11/2 zeta(5)
    let rewritten = rewrite_zeta2_to_lefschetz(&zeta(&[2, 3]), t).unwrap();
    let expected = zeta(&[3])
        .mul(&MotivicExpr::lefschetz(2))
        .scale(&Rat::new(-1, 8))
        .add(&zeta(&[5]).scale(&Rat::new(-11, 2)));
    assert_eq!(rewritten, expected);
}

/// Coaction multiplicativity on sample pairs of low-weight generators.
#[test]
fn coaction_multiplicative_on_pairs() {
    let pairs: Vec<(MotivicExpr, MotivicExpr)> = vec![
        (zeta(&[2]), zeta(&[2])),
        (zeta(&[2]), MotivicExpr::lefschetz(1)),
        (zeta(&[3]), MotivicExpr::log_prime(2).unwrap()),
        (zeta(&[1, 2]), zeta(&[2])),
        (MotivicExpr::log_prime(2).unwrap(), MotivicExpr::log_prime(3).unwrap()),
    ];
    for (x, y) in pairs {
        let lhs = coaction(&x.mul(&y));
        // product of coactions, multiplying both tensor legs
        let a = coaction(&x);
        let b = coaction(&y);
        let mut rhs = LinComb::zero();
        for ((m1, d1), c1) in a.0.iter() {
            for ((m2, d2), c2) in b.0.iter() {
                let mwords = periods::words::shuffle(&m1.word, &m2.word);
                let dwords = periods::words::shuffle(&d1.word, &d2.word);
                let mut logs = m1.logs.clone();
                logs.extend_from_slice(&m2.logs);
                logs.sort_unstable();
                let mut nus = d1.nus.clone();
                nus.extend_from_slice(&d2.nus);
                nus.sort_unstable();
                for (mw, mc) in mwords.iter() {
                    for (dw, dc) in dwords.iter() {
                        rhs.add_term(
                            (
                                periods::motivic::MotGen {
                                    lef: m1.lef + m2.lef,
                                    word: mw.clone(),
                                    logs: logs.clone(),
                                },
                                DrGen {
                                    lef: d1.lef + d2.lef,
                                    word: dw.clone(),
                                    nus: nus.clone(),
                                },
                            ),
                            &(&(c1 * c2) * mc) * dc,
                        );
                    }
                }
            }
        }
        assert_eq!(lhs.0, rhs);
    }
}

/// rank equals the Hodge polynomial evaluated at (1, 1) on the matching
/// standard objects.
#[test]
fn rank_matches_hodge_value() {
    use periods::permatrix::{Builder, PeriodMatrix};
    let t = table();
    // zeta(3): rank 2 from conjugates, 1 + r³s³ from the matrix
    let conj_rank = galois_conjugates(&zeta(&[3]), t).unwrap().len();
    let inv = PeriodMatrix::build(&Builder::Zeta(3)).unwrap().invariants().unwrap();
    let h11: Rat = inv.hodge_poly.iter().map(|(_, c)| c.clone()).fold(Rat::zero(), |a, b| &a + &b);
    assert_eq!(Rat::from_int(conj_rank as i64), h11);
    assert_eq!(conj_rank, inv.rank);
    // the Lefschetz object has rank 1
    let conj_rank = galois_conjugates(&MotivicExpr::lefschetz(1), t).unwrap().len();
    let inv = PeriodMatrix::build(&Builder::Lefschetz).unwrap().invariants().unwrap();
    assert_eq!(conj_rank, inv.rank);
}

/// Sparse matrices round-trip through the (column, "p/q") serialization.
#[test]
fn sparse_matrix_serialization() {
    let mut m = SparseMat::new(3);
    m.push_row([(0usize, Rat::new(1, 3)), (2, Rat::from_int(-4))].into_iter().collect());
    m.push_row([(1usize, Rat::one())].into_iter().collect());
    let json = m.to_json();
    let back = SparseMat::from_json(&json).unwrap();
    assert_eq!(m, back);
    assert!(SparseMat::from_json("{\"ncols\": 1, \"rows\": [[[5, \"1\"]]]}").is_err());
}
