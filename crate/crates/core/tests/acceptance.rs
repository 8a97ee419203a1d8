//! Acceptance suite: one test per criterion, each printing a pass line
//! with its elapsed time. Run with
//! `cargo test -p hermlat --test acceptance -- --nocapture`.

use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hermlat::gamma::{
    corad_with_action, gamma_isometric_split_abelian, gamma_rational_data, hermitianize,
    random_invariant_form, regular_representation, trace_t, twist_lattice, FiniteGroup,
    GammaLattice,
};
use hermlat::lattice::{
    build_isometry_witness, isometric_integral_nearly_unimodular, isometric_rational,
    jordan_invariant_oracle, lift_isometry_traced, random_gl_r, random_nearly_unimodular,
    residue_isometry, GramForm,
};
use hermlat::matrix::{pmat, Matrix};
use hermlat::orders::{
    check_star_property, ideal_multiply, residue_unitary_enumerate, scan_star_property,
    BlockOrder, ResidueInvolution, ValuationIdeal, ValuationPattern,
};
use hermlat::plocal::PLocal;
use hermlat::refine::{refine_to_nearly_unimodular, AmbientForm};
use hermlat::transfer::{
    build_context, descent_experiment, morphism_iso_test, morphism_iso_witness, MorphismTriple,
};
use hermlat::{Error, IMat, PMat};

fn diag(p: u64, entries: &[i64]) -> GramForm {
    GramForm::diagonal(p, entries).unwrap()
}

fn report(name: &str, start: Instant, budget_ms: Option<u128>) {
    let elapsed = start.elapsed().as_millis();
    println!("acceptance {name}: PASS ({elapsed} ms)");
    if let Some(b) = budget_ms {
        assert!(elapsed < b, "{name} exceeded the time budget: {elapsed} ms >= {b} ms");
    }
}

/// Criterion 1: the golden corpus around the <1,9> / <2,18> and
/// <1,1,-1> / <1,3,-3> pairs. Exact, zero tolerance.
#[test]
fn criterion_01_golden_corpus() {
    let start = Instant::now();

    // (a) rationally isometric, integrally distinct
    let a = diag(3, &[1, 9]);
    let b = diag(3, &[2, 18]);
    assert!(isometric_rational(&a, &b).unwrap());
    assert_ne!(
        jordan_invariant_oracle(&a).unwrap(),
        jordan_invariant_oracle(&b).unwrap()
    );

    // (b) the explicit rational witness verifies exactly
    let t = Matrix::from_rows(vec![
        vec![PLocal::from_int(1, 3), PLocal::from_int(3, 3)],
        vec![PLocal::from_ratio(1, 3, 3), PLocal::from_int(-1, 3)],
    ]);
    assert_eq!(a.apply(&t), *b.gram());
    assert!(!t.is_integral(), "the witness must not lie in GL_2(R)");
    assert!(matches!(
        build_isometry_witness(&a, &b, 8),
        Err(Error::NotNearlyUnimodular)
    ));

    // (c) coradical of <1,9>
    assert_eq!(a.coradical().exponents(), &[2]);

    // (d) <1,1,9> vs <1,2,18>
    let c = diag(3, &[1, 1, 9]);
    let d = diag(3, &[1, 2, 18]);
    assert!(isometric_rational(&c, &d).unwrap());
    assert_ne!(
        jordan_invariant_oracle(&c).unwrap(),
        jordan_invariant_oracle(&d).unwrap()
    );

    // (e) <1,1,-1> vs <1,3,-3>
    let e = diag(3, &[1, 1, -1]);
    let f = diag(3, &[1, 3, -3]);
    assert!(e.is_nearly_unimodular() && f.is_nearly_unimodular());
    assert!(isometric_rational(&e, &f).unwrap());
    assert!(!isometric_integral_nearly_unimodular(&e, &f).unwrap());

    report("01 golden corpus", start, Some(1000));
}

/// Criterion 2: the integral decision (rational class + coradical) agrees
/// with the Jordan oracle on 1000 random nearly unimodular pairs per prime.
#[test]
fn criterion_02_decision_oracle_equivalence() {
    let start = Instant::now();
    for p in [3u64, 5, 7] {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC2 + p);
        let mut decided_true = 0usize;
        for _ in 0..1000 {
            let rank = rng.gen_range(1..=6);
            let f = random_nearly_unimodular(&mut rng, p, rank);
            let g = if rng.gen_bool(0.5) {
                let x = random_gl_r(&mut rng, p, rank);
                GramForm::new(p, 1, f.apply(&x)).unwrap()
            } else {
                random_nearly_unimodular(&mut rng, p, rank)
            };
            let decision = isometric_integral_nearly_unimodular(&f, &g).unwrap();
            let oracle = jordan_invariant_oracle(&f).unwrap() == jordan_invariant_oracle(&g).unwrap();
            assert_eq!(decision, oracle, "p = {p}");
            if decision {
                decided_true += 1;
            }
        }
        assert!(decided_true >= 400, "campaign must exercise the true branch");
        assert!(
            decided_true <= 900,
            "campaign must exercise the false branch"
        );
    }
    report("02 oracle equivalence (3000 pairs)", start, Some(10_000));
}

/// Criterion 3: refinement of 500 random nonsingular rational forms plus
/// the start-dependence exhibit.
#[test]
fn criterion_03_refinement() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    for trial in 0..500 {
        let p = *[3u64, 5].get(trial % 2).unwrap();
        let rank = rng.gen_range(1..=6);
        let gram = loop {
            let m: PMat = Matrix::from_fn(rank, rank, |_, _| {
                let c = rng.gen_range(-9i64..=9);
                let e = rng.gen_range(-2i64..=2);
                PLocal::from_int(c, p) * PLocal::p_power(e, p)
            });
            let sym = &m + &m.transpose();
            if !sym.det().is_zero() {
                break sym;
            }
        };
        let ambient = AmbientForm::with_standard_basis(p, gram).unwrap();
        let class_in = ambient.rational_class().unwrap();
        let (out, trace) = refine_to_nearly_unimodular(&ambient).unwrap();
        let form = GramForm::new(p, 1, out.gram_in_basis()).unwrap();
        assert!(form.is_nearly_unimodular(), "trial {trial}");
        assert_eq!(out.rational_class().unwrap(), class_in, "trial {trial}");
        assert!(
            (trace.steps.len() as i64) <= trace.initial_colength.max(1),
            "trial {trial}: {} steps for colength {}",
            trace.steps.len(),
            trace.initial_colength
        );
    }

    // non-uniqueness: two start lattices for the <1,1,-1> class with
    // oracle-distinct nearly unimodular outputs
    let g = pmat(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1]]);
    let standard = AmbientForm::with_standard_basis(3, g.clone()).unwrap();
    let skew = AmbientForm::new(3, g, pmat(3, &[&[1, 0, 0], &[0, 2, 1], &[0, 1, 2]])).unwrap();
    let (out1, _) = refine_to_nearly_unimodular(&standard).unwrap();
    let (out2, _) = refine_to_nearly_unimodular(&skew).unwrap();
    let f1 = GramForm::new(3, 1, out1.gram_in_basis()).unwrap();
    let f2 = GramForm::new(3, 1, out2.gram_in_basis()).unwrap();
    assert!(f1.is_nearly_unimodular() && f2.is_nearly_unimodular());
    assert_eq!(out1.rational_class().unwrap(), out2.rational_class().unwrap());
    assert_ne!(
        jordan_invariant_oracle(&f1).unwrap(),
        jordan_invariant_oracle(&f2).unwrap()
    );

    report("03 refinement (500 forms)", start, Some(30_000));
}

/// Criterion 4: radical powers match the closed form and satisfy the
/// power law, over all block orders with r <= 3 and sizes <= 3.
#[test]
fn criterion_04_radical_powers() {
    let start = Instant::now();
    // closed form for two blocks
    for n1 in 1..=3usize {
        for n2 in 1..=3usize {
            let o = BlockOrder::new(3, vec![n1, n2]).unwrap();
            let dim = n1 + n2;
            for n in -3i64..=3 {
                let even = o.radical_power(2 * n);
                let odd = o.radical_power(2 * n + 1);
                for i in 0..dim {
                    for j in 0..dim {
                        let (bi, bj) = (o.block_of(i), o.block_of(j));
                        let expect_even = if bi == 0 && bj == 1 { n + 1 } else { n };
                        let expect_odd = if bi == 1 && bj == 0 { n } else { n + 1 };
                        assert_eq!(even.bounds()[(i, j)], expect_even);
                        assert_eq!(odd.bounds()[(i, j)], expect_odd);
                    }
                }
            }
        }
    }
    // power law and J^-1 J = A for all orders with r <= 3, sizes <= 3
    let mut orders = Vec::new();
    for r in 1..=3usize {
        let mut sizes = vec![1usize; r];
        loop {
            orders.push(BlockOrder::new(3, sizes.clone()).unwrap());
            let mut carry = true;
            for s in sizes.iter_mut() {
                if *s < 3 {
                    *s += 1;
                    carry = false;
                    break;
                }
                *s = 1;
            }
            if carry {
                break;
            }
        }
    }
    for o in &orders {
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                let lhs = ideal_multiply(&o.radical_power(a), &o.radical_power(b)).unwrap();
                assert_eq!(lhs, o.radical_power(a + b));
            }
        }
        let j = o.radical_power(1);
        let jinv = o.radical_power(-1);
        assert_eq!(ideal_multiply(&jinv, &j).unwrap(), o.unit_ideal());
        assert_eq!(ideal_multiply(&j, &jinv).unwrap(), o.unit_ideal());
    }
    report("04 radical powers", start, Some(1000));
}

/// Criterion 5: the descent campaign. 200 trials per anisotropic context,
/// all witnesses integral, no shift/min-additivity violations.
#[test]
fn criterion_05_descent_campaign() {
    let start = Instant::now();
    let configs: &[(u64, &[i64])] = &[
        (3, &[1, 3]),
        (3, &[1, 1, 3]),
        (3, &[1, 1, 3, 3]),
        (5, &[1, 5]),
        (5, &[1, 2, 5]),
        (5, &[1, 2, 5, 10]),
    ];
    for &(p, entries) in configs {
        let ctx = build_context(&diag(p, entries)).unwrap();
        assert!(
            ctx.is_anisotropic(),
            "config p={p} {entries:?} must be anisotropic"
        );
        let rep = descent_experiment(&ctx, 200, 0xACC5 + p).unwrap();
        assert_eq!(rep.trials, 200);
        assert_eq!(
            rep.integral_witness_count, 200,
            "p={p} {entries:?}: every witness must be integral"
        );
        assert_eq!(rep.claim9_violations, 0, "p={p} {entries:?}");
        assert_eq!(rep.claim11_violations, 0, "p={p} {entries:?}");
    }
    report("05 descent campaign (1200 trials)", start, Some(20_000));
}

/// Criterion 6: whenever the morphism isomorphism test fires on random
/// triples of rank at most 4, the explicit pair is constructed and
/// verified exactly.
#[test]
fn criterion_06_morphism_witnesses() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    let mut fired = 0usize;
    for trial in 0..300 {
        let p = *[3u64, 5].get(trial % 2).unwrap();
        let r = rng.gen_range(1..=4);
        let c = rng.gen_range(1..=4);
        let m: PMat = Matrix::from_fn(r, c, |_, _| {
            let x = rng.gen_range(-9i64..=9);
            PLocal::from_int(x, p)
        });
        let a = MorphismTriple::new(p, m.clone()).unwrap();
        let b = if rng.gen_bool(0.5) {
            // planted isomorphic triple
            let left = random_gl_r(&mut rng, p, r);
            let right = random_gl_r(&mut rng, p, c);
            MorphismTriple::new(p, &(&left * &m) * &right).unwrap()
        } else {
            let m2: PMat = Matrix::from_fn(r, c, |_, _| {
                let x = rng.gen_range(-9i64..=9);
                PLocal::from_int(x, p)
            });
            MorphismTriple::new(p, m2).unwrap()
        };
        if morphism_iso_test(&a, &b) {
            fired += 1;
            let (phi, psi) = morphism_iso_witness(&a, &b).unwrap();
            assert!(phi.is_r_invertible());
            assert!(psi.is_r_invertible());
            assert_eq!(&psi * a.map(), b.map() * &phi);
        }
    }
    assert!(fired >= 100, "campaign must exercise the constructive branch");
    report("06 morphism witnesses (300 triples)", start, None);
}

/// Criterion 7: Hensel lifting reaches p^8 within four Newton steps on 100
/// random unimodular pairs with matching residue classes; the defect
/// valuation at least doubles per step.
#[test]
fn criterion_07_hensel_lifting() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC7);
    for trial in 0..100 {
        let p = *[3u64, 5, 7].get(trial % 3).unwrap();
        let rank = rng.gen_range(1..=4);
        // random unimodular form and a congruent twist
        let entries: Vec<i64> = (0..rank)
            .map(|_| loop {
                let c = rng.gen_range(-6i64..=6);
                if c != 0 && c % p as i64 != 0 {
                    break c;
                }
            })
            .collect();
        let base = diag(p, &entries);
        let x = random_gl_r(&mut rng, p, rank);
        let g = GramForm::new(p, 1, base.apply(&x)).unwrap();
        let y = random_gl_r(&mut rng, p, rank);
        let g2 = GramForm::new(p, 1, base.apply(&y)).unwrap();
        assert!(g.is_unimodular() && g2.is_unimodular());
        let seed = residue_isometry(
            p,
            &g.gram().residue().unwrap(),
            &g2.gram().residue().unwrap(),
        )
        .expect("equal classes have a residue isometry");
        let (w, trace) = lift_isometry_traced(&g, &g2, &seed.lift(p), 8).unwrap();
        assert!(trace.len() <= 4, "trial {trial}: {} steps", trace.len());
        let mut prev = 1i64;
        for &v in &trace {
            assert!(v >= 2 * prev, "trial {trial}: defect trace {trace:?}");
            prev = v;
        }
        assert!(g.apply(&w).congruent_mod_pk(g2.gram(), 8));
        assert!(w.is_r_invertible());
    }
    report("07 hensel lifting (100 pairs)", start, None);
}

/// Criterion 8: residue unitary groups of the rank-one hereditary order:
/// identity components of sizes p and p - 1 for the two involutions.
#[test]
fn criterion_08_residue_unitary_groups() {
    let start = Instant::now();
    for p in [3u64, 5] {
        let (comp, total) = residue_unitary_enumerate(p, ResidueInvolution::OffDiagonalSwap).unwrap();
        assert_eq!(comp, p as usize, "additive component at p = {p}");
        assert_eq!(total, 4 * p as usize);
        let (comp, total) = residue_unitary_enumerate(p, ResidueInvolution::DiagonalSwap).unwrap();
        assert_eq!(comp, p as usize - 1, "multiplicative component at p = {p}");
        assert_eq!(total, p as usize - 1);
    }
    report("08 residue unitary groups", start, None);
}

/// Criterion 9: the star property. The 3x3 pattern with the explicit L is
/// a violation, the 2x2 pattern with its maximal L holds, and hereditary
/// block orders scan clean.
#[test]
fn criterion_09_star_property() {
    let start = Instant::now();
    let imat = |rows: &[&[i64]]| -> IMat {
        Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    };

    let pat3 = ValuationPattern::new(3, imat(&[&[0, 1, 2], &[0, 0, 1], &[0, 0, 0]])).unwrap();
    let l3 = ValuationIdeal::from_bounds(3, imat(&[&[0, 0, 1], &[-1, -1, 0], &[-1, -1, 0]]))
        .unwrap();
    let v = check_star_property(&pat3, &l3).unwrap();
    assert!(v.premise && !v.conclusion, "the 3x3 pair must violate (*)");

    let pat2 = ValuationPattern::new(3, imat(&[&[0, 2], &[0, 0]])).unwrap();
    let l2 = ValuationIdeal::from_bounds(3, imat(&[&[-1, 0], &[-2, -1]])).unwrap();
    let v = check_star_property(&pat2, &l2).unwrap();
    assert!(v.premise && v.conclusion, "the 2x2 pair must satisfy (*)");

    // hereditary orders scan clean; the 3x3 pattern is caught
    for sizes in [vec![1], vec![2], vec![3], vec![1, 1], vec![2, 1], vec![1, 2], vec![2, 2]] {
        let o = BlockOrder::new(3, sizes.clone()).unwrap();
        let scan = scan_star_property(&ValuationPattern::from_block_order(&o), 5_000_000).unwrap();
        assert!(scan.candidates > 0);
        assert!(scan.violations.is_empty(), "sizes {sizes:?}");
    }
    let scan = scan_star_property(&pat3, 5_000_000).unwrap();
    assert_eq!(scan.violations.len(), 1);
    assert_eq!(&scan.violations[0], l3.bounds());

    report("09 star property", start, None);
}

/// Criterion 10: group forms. Round-trip exactness of the trace dictionary
/// on 100 random forms per group and prime, twist detection on 300
/// split-abelian instances, and the coradical counterexample pair.
#[test]
fn criterion_10_gamma_forms() {
    let start = Instant::now();

    // trace round-trip: T . hhat = h, exactly
    for p in [5u64, 7] {
        for group in [
            FiniteGroup::cyclic(2),
            FiniteGroup::cyclic(3),
            FiniteGroup::symmetric3(),
        ] {
            let action = regular_representation(&group, p);
            let mut rng = ChaCha8Rng::seed_from_u64(0xACC10 + p + group.order() as u64);
            for _ in 0..100 {
                let l = random_invariant_form(&group, &action, p, &mut rng, false).unwrap();
                let h = hermitianize(&l);
                for i in 0..l.rank() {
                    for j in 0..l.rank() {
                        assert_eq!(trace_t(&group, &h.pair(i, j)), l.gram()[(i, j)]);
                    }
                }
            }
        }
    }

    // twist detection: 300 instances across split abelian configurations
    let mut detected = 0usize;
    for (group, p, seed) in [
        (FiniteGroup::cyclic(2), 5u64, 1u64),
        (FiniteGroup::cyclic(2), 7, 2),
        (FiniteGroup::cyclic(3), 7, 3),
    ] {
        let action = regular_representation(&group, p);
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC10 + seed);
        for _ in 0..100 {
            let l = random_invariant_form(&group, &action, p, &mut rng, true).unwrap();
            let x = random_gl_r(&mut rng, p, l.rank());
            let twisted = twist_lattice(&l, &x).unwrap();
            assert!(
                gamma_isometric_split_abelian(&l, &twisted).unwrap(),
                "twist must be detected"
            );
            detected += 1;
        }
    }
    assert_eq!(detected, 300);

    // the coradical counterexample: identical rational data per character,
    // trivial^2 vs sign^2 coradical, decided non-isometric
    let p = 5;
    let c2 = FiniteGroup::cyclic(2);
    let act = vec![
        Matrix::identity(4).attach_prime(p),
        Matrix::diagonal(vec![
            PLocal::from_int(1, p),
            PLocal::from_int(1, p),
            PLocal::from_int(-1, p),
            PLocal::from_int(-1, p),
        ]),
    ];
    let la = GammaLattice::new(
        p,
        c2.clone(),
        act.clone(),
        Matrix::diagonal(vec![
            PLocal::from_int(1, p),
            PLocal::from_int(1, p),
            PLocal::from_int(5, p),
            PLocal::from_int(5, p),
        ]),
    )
    .unwrap();
    let lb = GammaLattice::new(
        p,
        c2,
        act,
        Matrix::diagonal(vec![
            PLocal::from_int(5, p),
            PLocal::from_int(5, p),
            PLocal::from_int(1, p),
            PLocal::from_int(1, p),
        ]),
    )
    .unwrap();
    assert_eq!(
        gamma_rational_data(&la).unwrap(),
        gamma_rational_data(&lb).unwrap(),
        "the pair must agree rationally"
    );
    let (_, ca) = corad_with_action(&la).unwrap();
    let (_, cb) = corad_with_action(&lb).unwrap();
    assert_eq!(ca.dim, 2);
    assert_eq!(cb.dim, 2);
    assert!(!gamma_isometric_split_abelian(&la, &lb).unwrap());

    report("10 gamma forms", start, None);
}
