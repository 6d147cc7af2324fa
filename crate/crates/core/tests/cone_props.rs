//! Random pointed cones checked against the brute-force oracle.

mod common;

use common::oracle::{dot, oracle_contains, oracle_extreme, pointed_cone, primitive, qv, to_ints};
use mra_core::{canonicalize_ray, Cone, Membership, QVec, Rat};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn extreme_rays_match_oracle((d, gens, _) in pointed_cone()) {
        let vecs: Vec<QVec> = gens.iter().map(|g| qv(g)).collect();
        let c = Cone::new(d, &vecs).unwrap();
        let got: Vec<Vec<i64>> = c.extreme_rays().unwrap().iter().map(|r| to_ints(r.vec())).collect();
        prop_assert_eq!(got, oracle_extreme(&gens));
    }

    #[test]
    fn membership_certificates_verify((d, gens, probe) in pointed_cone()) {
        let vecs: Vec<QVec> = gens.iter().map(|g| qv(g)).collect();
        let c = Cone::new(d, &vecs).unwrap();
        let mut probes = vec![probe.clone()];
        probes.extend(gens.iter().cloned());
        let sum: Vec<i64> = (0..d).map(|i| gens.iter().map(|g| g[i]).sum()).collect();
        probes.push(sum);
        for p in probes {
            let v = qv(&p);
            match c.membership(&v).unwrap() {
                Membership::Inside(l) => {
                    // Coefficients refer to the stored canonical generators.
                    prop_assert_eq!(l.dim(), c.generators().len());
                    prop_assert!(l.iter().all(|x| !x.is_negative()));
                    let mut acc = QVec::zeros(d);
                    for (lk, g) in l.iter().zip(c.generators()) {
                        acc = acc.add(&g.vec().scale(lk)).unwrap();
                    }
                    prop_assert_eq!(&acc, &v);
                    prop_assert!(oracle_contains(&gens, &p));
                }
                Membership::Outside(n) => {
                    prop_assert!(vecs.iter().all(|g| !dot(&n, g).is_negative()));
                    prop_assert!(dot(&n, &v).is_negative());
                    prop_assert!(!oracle_contains(&gens, &p));
                }
            }
        }
    }

    #[test]
    fn double_dual_is_mutually_contained((d, gens, _) in pointed_cone()) {
        let vecs: Vec<QVec> = gens.iter().map(|g| qv(g)).collect();
        let c = Cone::new(d, &vecs).unwrap();
        let dual = c.dual();
        for y in dual.generators() {
            prop_assert!(vecs.iter().all(|g| !dot(y.vec(), g).is_negative()));
        }
        let dd = dual.dual();
        for g in &vecs {
            prop_assert!(dd.contains(g).unwrap());
        }
        for h in dd.generators() {
            prop_assert!(c.contains(h.vec()).unwrap());
        }
    }

    #[test]
    fn canonicalization_is_scaling_invariant(
        v in prop::collection::vec(-4i64..=4, 1..=5),
        num in 1i64..=12,
        den in 1i64..=12,
    ) {
        prop_assume!(v.iter().any(|&x| x != 0));
        let base = canonicalize_ray(&qv(&v)).unwrap();
        let k = Rat::new(num, den).unwrap();
        let scaled = canonicalize_ray(&qv(&v).scale(&k)).unwrap();
        prop_assert_eq!(&scaled, &base);
        prop_assert_eq!(to_ints(base.vec()), primitive(&v));
        let flipped = canonicalize_ray(&qv(&v).neg()).unwrap();
        prop_assert_ne!(flipped, base);
    }
}
