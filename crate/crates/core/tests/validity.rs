//! Stage validity and end-to-end sign checks against the exact oracle.

mod common;

use common::{rng, sample, validity, Dist};
use fpfilter::filters::{DyadicStage, ExpansionStage, IntervalFilter, SemiStaticFilter, ZeroFilter};
use fpfilter::fpn::oracle_sign;
use fpfilter::{Builtin, FilterOutcome, Profile, Sign, Stage, StagedPredicate};
use proptest::prelude::*;
use rand::seq::SliceRandom;

#[test]
fn every_stage_is_valid_on_every_distribution() {
    for (i, b) in Builtin::ALL.into_iter().enumerate() {
        for (j, d) in Dist::ALL.into_iter().enumerate() {
            for t in validity(b, d, 2000, (10 * i + j) as u64) {
                assert_eq!(t.wrong, 0, "{b} {d:?} stage {}", t.name);
            }
        }
    }
}

#[test]
fn zero_filter_only_certifies_exact_zeros() {
    for b in Builtin::ALL {
        let e = b.expr();
        let z = ZeroFilter::new(&e);
        let mut r = rng(7);
        let mut hits = 0;
        for k in 0..4000 {
            let x = sample(b, Dist::ALL[k % Dist::ALL.len()], &mut r);
            if z.certifies_zero(&x) {
                hits += 1;
                assert_eq!(oracle_sign(&e, &x).unwrap(), Sign::Zero, "{b} {x:?}");
            }
        }
        assert!(hits > 0, "{b}: the sample never exercised the zero filter");
    }
}

#[test]
fn pipeline_stage_order_does_not_change_signs() {
    let mut r = rng(11);
    for b in Builtin::ALL {
        let e = b.expr();
        let base = StagedPredicate::default_pipeline(b, Profile::Safe);
        let mut filters: Vec<Box<dyn Stage>> = vec![
            Box::new(SemiStaticFilter::new(&e, true).unwrap()),
            Box::new(ZeroFilter::new(&e)),
            Box::new(IntervalFilter::new(&e)),
            Box::new(ExpansionStage::new(&e)),
        ];
        for round in 0..3 {
            filters.shuffle(&mut r);
            let mut stages = filters.clone();
            stages.push(Box::new(DyadicStage::new(&e)));
            let p = StagedPredicate::new(b.arity(), stages).unwrap();
            for k in 0..500 {
                let x = sample(b, Dist::ALL[(k + round) % Dist::ALL.len()], &mut r);
                assert_eq!(p.apply(&x).unwrap(), base.apply(&x).unwrap(), "{b} {x:?}");
            }
        }
    }
}

#[test]
fn fast_profile_agrees_away_from_underflow() {
    for b in Builtin::ALL {
        let fast = StagedPredicate::default_pipeline(b, Profile::Fast);
        let plain = SemiStaticFilter::new(&b.expr(), false).unwrap();
        let mut r = rng(13);
        for k in 0..2000 {
            let x = sample(b, Dist::ALL[k % Dist::ALL.len()], &mut r);
            if plain.underflows(&x) {
                continue;
            }
            assert_eq!(fast.apply(&x).unwrap(), oracle_sign(&b.expr(), &x).unwrap(), "{b} {x:?}");
        }
    }
}

#[test]
fn pipelines_reject_bad_input() {
    let p = StagedPredicate::default_pipeline(Builtin::Orient2d, Profile::Safe);
    assert!(p.apply(&[0.0; 5]).is_err());
    assert!(p.apply(&[0.0, 0.0, 1.0, f64::NAN, 0.0, 1.0]).is_err());
    assert!(p.apply(&[0.0, 0.0, 1.0, f64::INFINITY, 0.0, 1.0]).is_err());
}

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3f64..1e3,
        (-8i32..8).prop_map(|v| v as f64 * 0.25),
        (-1e3f64..1e3, -1100i32..900).prop_map(|(m, k)| m * 2f64.powi(k / 2) * 2f64.powi(k - k / 2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn staged_orient2d_is_exact(x in prop::collection::vec(coord(), 6)) {
        let p = StagedPredicate::default_pipeline(Builtin::Orient2d, Profile::Safe);
        prop_assert_eq!(p.apply(&x).unwrap(), oracle_sign(&Builtin::Orient2d.expr(), &x).unwrap());
    }

    #[test]
    fn staged_incircle_is_exact(x in prop::collection::vec(coord(), 8)) {
        let p = StagedPredicate::default_pipeline(Builtin::Incircle2d, Profile::Safe);
        prop_assert_eq!(p.apply(&x).unwrap(), oracle_sign(&Builtin::Incircle2d.expr(), &x).unwrap());
    }

    #[test]
    fn staged_orient3d_is_exact(x in prop::collection::vec(coord(), 12)) {
        let p = StagedPredicate::default_pipeline(Builtin::Orient3d, Profile::Safe);
        prop_assert_eq!(p.apply(&x).unwrap(), oracle_sign(&Builtin::Orient3d.expr(), &x).unwrap());
    }

    #[test]
    fn orient2d_is_antisymmetric(x in prop::collection::vec(coord(), 6)) {
        let p = StagedPredicate::default_pipeline(Builtin::Orient2d, Profile::Safe);
        let swapped = [x[2], x[3], x[0], x[1], x[4], x[5]];
        let rotated = [x[2], x[3], x[4], x[5], x[0], x[1]];
        let s = p.apply(&x).unwrap();
        prop_assert_eq!(p.apply(&swapped).unwrap(), -s);
        prop_assert_eq!(p.apply(&rotated).unwrap(), s);
    }

    #[test]
    fn incircle_is_antisymmetric(x in prop::collection::vec(coord(), 8)) {
        let p = StagedPredicate::default_pipeline(Builtin::Incircle2d, Profile::Safe);
        let swapped = [x[2], x[3], x[0], x[1], x[4], x[5], x[6], x[7]];
        prop_assert_eq!(p.apply(&swapped).unwrap(), -p.apply(&x).unwrap());
    }

    #[test]
    fn certified_semi_static_signs_are_exact(x in prop::collection::vec(coord(), 6), ufp in any::<bool>()) {
        let e = Builtin::Orient2d.expr();
        let f = SemiStaticFilter::new(&e, ufp).unwrap();
        if let FilterOutcome::Certain(s) = f.apply(&x) {
            if ufp || !f.underflows(&x) {
                prop_assert_eq!(s, oracle_sign(&e, &x).unwrap());
            }
        }
    }
}
