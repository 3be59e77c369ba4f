use std::collections::HashSet;

use proptest::prelude::*;
use psig::pairing::{
    self, hash_to_group_h1, hash_to_group_h2, hash_to_scalar, pairing_equation, GroupElement,
    Scalar, MIRRORED_ELEMENT_LEN, PLAIN_ELEMENT_LEN,
};
use psig::pkg;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn scalar_from(seed: u64) -> Scalar {
    Scalar::random_nonzero(&mut ChaCha20Rng::seed_from_u64(seed))
}

fn g1_only(seed: u64) -> GroupElement {
    hash_to_group_h2(&seed.to_be_bytes())
}

fn mirrored(seed: u64) -> GroupElement {
    GroupElement::from_scalar(&scalar_from(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // e(aP, bQ) = e(P, Q)^(ab) with one side hash-derived, as in every protocol equation
    #[test]
    fn bilinear_mixed(a in any::<u64>(), b in any::<u64>(), q in any::<u64>()) {
        let (a, b) = (scalar_from(a), scalar_from(b ^ 0x5a5a));
        let p = GroupElement::generator();
        let q = g1_only(q);
        let lhs = pairing::pairing(&p.mul(&a), &q.mul(&b)).unwrap();
        let rhs = pairing::pairing(&p, &q).unwrap().pow(&(a * b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bilinear_mirrored(a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (scalar_from(a), scalar_from(b ^ 0xa5a5));
        let p = GroupElement::generator();
        let lhs = pairing::pairing(&p.mul(&a), &p.mul(&b)).unwrap();
        let rhs = pairing::pairing(&p, &p).unwrap().pow(&(a * b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn symmetric(x in any::<u64>(), y in any::<u64>(), which in 0u8..2) {
        let a = mirrored(x);
        let b = if which == 0 { mirrored(y) } else { g1_only(y) };
        prop_assert_eq!(pairing::pairing(&a, &b).unwrap(), pairing::pairing(&b, &a).unwrap());
    }

    #[test]
    fn additive_in_each_argument(x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
        let (a, b, q) = (mirrored(x), mirrored(y), g1_only(z));
        let lhs = pairing::pairing(&(a + b), &q).unwrap();
        let rhs = pairing::pairing(&a, &q).unwrap().mul(&pairing::pairing(&b, &q).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn scalar_bytes_round_trip(seed in any::<u64>()) {
        let k = scalar_from(seed);
        prop_assert_eq!(Scalar::from_bytes(&k.to_bytes()).unwrap(), k);
    }
}

#[test]
fn non_degenerate() {
    let p = GroupElement::generator();
    assert!(!pairing::pairing(&p, &p).unwrap().is_identity());
    assert!(!pairing::pairing(&p, &g1_only(7)).unwrap().is_identity());
    assert!(pairing::pairing(&GroupElement::identity(), &p).unwrap().is_identity());
}

#[test]
fn two_hash_derived_points_do_not_pair() {
    assert!(matches!(
        pairing::pairing(&g1_only(1), &g1_only(2)),
        Err(psig::Error::Unpairable)
    ));
    assert!(pairing_equation(&[(g1_only(1), g1_only(2))], &[]).is_err());
}

#[test]
fn scalar_encoding_rejects_values_at_or_above_order() {
    let order = hex::decode(pairing::GROUP_ORDER_HEX).unwrap();
    assert!(Scalar::from_bytes(&order).is_err());
    assert!(Scalar::from_bytes(&[0xff; 32]).is_err());
    assert!(Scalar::from_bytes(&[0; 31]).is_err());
}

#[test]
fn hash_domains_are_separated() {
    let pub_a = g1_only(11);
    let pub_b = g1_only(12);
    let mut seen = HashSet::new();
    for i in 0..10_000u32 {
        let input = i.to_be_bytes();
        let h1 = hash_to_group_h1(&input, &pub_a, &pub_b);
        let h2 = hash_to_group_h2(&input);
        let h = hash_to_scalar(&input, &pub_a, &pub_b);
        assert_ne!(h1, h2, "H1 and H2 collide on input {i}");
        assert!(seen.insert(h1.g1_bytes().to_vec()));
        assert!(seen.insert(h2.g1_bytes().to_vec()));
        assert!(seen.insert(h.to_bytes().to_vec()));
    }
    // the identity-point arguments of H1 are part of its input
    let m = b"warrant";
    assert_ne!(hash_to_group_h1(m, &pub_a, &pub_b), hash_to_group_h1(m, &pub_b, &pub_a));
    // length framing stops boundary shifting between message and points
    assert_ne!(
        hash_to_group_h1(b"ab", &pub_a, &pub_b),
        hash_to_group_h1(b"a", &pub_a, &pub_b)
    );
}

#[test]
fn hash_to_scalar_is_never_zero() {
    let r = mirrored(3);
    let pub_p = g1_only(4);
    for i in 0..10_000u32 {
        assert!(!hash_to_scalar(&i.to_le_bytes(), &r, &pub_p).is_zero());
    }
}

fn random_element(kind: usize, rng: &mut ChaCha20Rng) -> GroupElement {
    if kind == 0 {
        mirrored(rng.gen())
    } else {
        g1_only(rng.gen())
    }
}

#[test]
fn element_encodings_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for (kind, expected_len) in [(0, MIRRORED_ELEMENT_LEN), (1, PLAIN_ELEMENT_LEN)] {
        for _ in 0..1_000 {
            let e = random_element(kind, &mut rng);
            let bytes = e.to_bytes();
            assert_eq!(bytes.len(), expected_len);
            let back = GroupElement::from_bytes(&bytes).unwrap();
            assert_eq!(back, e);
            assert_eq!(back.is_mirrored(), e.is_mirrored());
            assert_eq!(back.to_bytes(), bytes);
        }
    }
    for _ in 0..1_000 {
        let k = Scalar::random_nonzero(&mut rng);
        assert_eq!(Scalar::from_bytes(&k.to_bytes()).unwrap(), k);
    }
}

#[test]
fn mutated_encodings_never_decode_to_the_original() {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for kind in 0..2 {
        for _ in 0..1_000 {
            let e = random_element(kind, &mut rng);
            let mut bytes = e.to_bytes();
            let pos = rng.gen_range(0..bytes.len());
            bytes[pos] ^= 1 << rng.gen_range(0..8);
            match GroupElement::from_bytes(&bytes) {
                Err(_) => {}
                // a mirrored element carries two images that must agree
                Ok(_) if kind == 0 => panic!("mutated mirrored element decoded (byte {pos})"),
                Ok(d) => assert_ne!(d, e, "mutation at byte {pos} went unnoticed"),
            }
        }
    }
    // scalars: any bit flip either leaves the field or changes the value
    for _ in 0..1_000 {
        let k = Scalar::random_nonzero(&mut rng);
        let mut bytes = k.to_bytes();
        bytes[rng.gen_range(0..32)] ^= 1 << rng.gen_range(0..8);
        if let Ok(d) = Scalar::from_bytes(&bytes) {
            assert_ne!(d, k);
        }
    }
}

#[test]
fn truncated_and_extended_encodings_are_rejected() {
    for e in [mirrored(1), g1_only(2)] {
        let bytes = e.to_bytes();
        for cut in 0..bytes.len() {
            assert!(GroupElement::from_bytes(&bytes[..cut]).is_err());
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(GroupElement::from_bytes(&long).is_err());
    }
}

#[test]
fn params_round_trip_and_suite_mismatch() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (params, _) = pkg::setup(pairing::SUITE_ID, &mut rng).unwrap();
    let bytes = pkg::encode_params(&params);
    assert_eq!(pkg::decode_params(&bytes).unwrap(), params);
    assert!(matches!(
        pkg::setup("PSIG-V01-BN254-SHA256-SSWU-RO-", &mut rng),
        Err(psig::Error::UnsupportedSuite(_))
    ));
    let pos = bytes
        .windows(pairing::SUITE_ID.len())
        .position(|w| w == pairing::SUITE_ID.as_bytes())
        .unwrap();
    let mut tampered = bytes.clone();
    tampered[pos + 9] = b'X';
    assert!(matches!(
        pkg::decode_params(&tampered),
        Err(psig::Error::SuiteMismatch { .. })
    ));
}
