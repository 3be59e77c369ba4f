use psig::pairing::{hash_to_group_h2, pairing_equation, GroupElement, Scalar};
use psig::pkg::{self, BindingParameters, BindingRequest};
use psig::signer::{self, BindingFactors};
use psig::testbed::Testbed;
use psig::{Error, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Replaces one coordinate with an independent element of the same kind.
fn forge(bp: &BindingParameters, coordinate: usize, rng: &mut ChaCha20Rng) -> BindingParameters {
    let mut forged = bp.clone();
    let k = Scalar::random_nonzero(rng);
    match coordinate {
        0 => forged.x = hash_to_group_h2(&forged.identity).mul(&k),
        1 => forged.y = hash_to_group_h2(&forged.identity).mul(&k),
        2 => forged.z = GroupElement::from_scalar(&k),
        _ => forged.w = GroupElement::from_scalar(&k),
    }
    forged
}

#[test]
fn binding_check_accepts_every_honest_request() {
    let mut r = rng(1);
    for i in 0..100 {
        let (_, bp) = signer::make_binding_parameters(format!("user{i}").as_bytes(), &mut r).unwrap();
        assert!(bp.is_well_formed(), "honest request {i} rejected");
    }
}

#[test]
fn binding_check_rejects_forged_coordinates() {
    let mut r = rng(2);
    for coordinate in 0..4 {
        for i in 0..100 {
            let (_, bp) = signer::make_binding_parameters(format!("f{i}").as_bytes(), &mut r).unwrap();
            let forged = forge(&bp, coordinate, &mut r);
            assert!(!forged.is_well_formed(), "coordinate {coordinate}, trial {i} accepted");
        }
    }
}

#[test]
fn binding_check_rejects_degenerate_and_relabelled_parameters() {
    let mut r = rng(3);
    let (_, bp) = signer::make_binding_parameters(b"carol", &mut r).unwrap();
    let mut zeroed = bp.clone();
    zeroed.x = GroupElement::identity();
    zeroed.y = GroupElement::identity();
    assert!(!zeroed.is_well_formed());
    let mut relabelled = bp.clone();
    relabelled.identity = b"mallory".to_vec();
    assert!(!relabelled.is_well_formed());
    let mut empty = bp;
    empty.identity.clear();
    assert!(!empty.is_well_formed());
}

#[test]
fn unblinded_key_is_the_master_key_times_b() {
    let mut r = rng(4);
    let mut bed = Testbed::new(&mut r);
    for i in 0..100 {
        let id = format!("signer{i}");
        let issued = bed.request_and_issue(&id, &mut r).unwrap();
        let b = issued.factors.expose_b();
        assert!(signer::validate_partial_key(&issued.partial.d, &issued.request.params, &bed.params));
        let key = signer::finalize(&issued.partial.d, issued.factors, &bed.params).unwrap();
        let expected = hash_to_group_h2(id.as_bytes()).mul(&(bed.master.expose_secret() * b));
        assert_eq!(*key.private_key(), expected);
        assert!(key.matches_params(&bed.params));
        assert!(key.is_consistent_with(&issued.record));
        // Reg = s*b*P
        assert_eq!(issued.record.token, GroupElement::from_scalar(&(bed.master.expose_secret() * b)));
    }
}

#[test]
fn partial_key_check_agrees_with_a_direct_oracle() {
    let mut r = rng(12);
    let mut bed = Testbed::new(&mut r);
    let s = bed.master.expose_secret();
    for i in 0..100 {
        let issued = bed.request_and_issue(&format!("p{i}"), &mut r).unwrap();
        let bp = &issued.request.params;
        let honest = issued.partial.d;
        let tampered = honest + hash_to_group_h2(&r.gen::<[u8; 8]>());
        for d in [honest, tampered] {
            // with s exposed, the partial key is valid exactly when D = s*Y
            let oracle = d == bp.y.mul(&s);
            assert_eq!(signer::validate_partial_key(&d, bp, &bed.params), oracle);
        }
    }
}

#[test]
fn tampered_partial_key_is_refused() {
    let mut r = rng(5);
    let mut bed = Testbed::new(&mut r);
    let issued = bed.request_and_issue("dave", &mut r).unwrap();
    let bad = issued.partial.d + hash_to_group_h2(b"noise");
    assert!(matches!(
        signer::finalize(&bad, issued.factors, &bed.params),
        Err(Error::InvalidPartialKey)
    ));
}

#[test]
fn pkg_view_does_not_contain_the_private_key() {
    let mut r = rng(6);
    let mut bed = Testbed::new(&mut r);
    let issued = bed.request_and_issue("erin", &mut r).unwrap();
    let bp = &issued.request.params;
    let key = signer::unblind(&issued.partial.d, issued.factors.clone());
    let seen = [bp.x, bp.y, bp.z, bp.w, issued.partial.d, issued.record.token];
    assert!(seen.iter().all(|e| *e != *key.private_key()));
    // the PKG can compute s*Pub and s*X but neither is S unless b = 1 or a = 1
    let s = bed.master.expose_secret();
    assert_ne!(hash_to_group_h2(b"erin").mul(&s), *key.private_key());
    assert_ne!(bp.x.mul(&s), *key.private_key());
}

#[test]
fn issuance_requires_an_outstanding_confirmation() {
    let mut r = rng(7);
    let mut bed = Testbed::new(&mut r);
    let (_, bp) = signer::make_binding_parameters(b"frank", &mut r).unwrap();
    let request = BindingRequest {
        params: bp.clone(),
        confirmation_nonce: r.gen(),
    };
    let err = pkg::issue_partial_key(&request, &bed.master, &mut bed.desk, &mut bed.directory, bed.now);
    assert!(matches!(err, Err(Error::ConfirmationInvalid(_))));

    // expired token
    let token = bed.desk.begin_confirmation(b"frank", bed.now, &mut r).unwrap();
    let late = Timestamp(token.expiry.0 + 1);
    let request = BindingRequest {
        params: bp,
        confirmation_nonce: token.nonce,
    };
    let err = pkg::issue_partial_key(&request, &bed.master, &mut bed.desk, &mut bed.directory, late);
    assert!(matches!(err, Err(Error::ConfirmationInvalid(_))));
    assert!(bed.directory.is_empty());
}

#[test]
fn failed_binding_check_keeps_the_token_and_records_nothing() {
    let mut r = rng(8);
    let mut bed = Testbed::new(&mut r);
    let (_, bp) = signer::make_binding_parameters(b"gina", &mut r).unwrap();
    let token = bed.desk.begin_confirmation(b"gina", bed.now, &mut r).unwrap();
    let forged = BindingRequest {
        params: forge(&bp, 1, &mut r),
        confirmation_nonce: token.nonce,
    };
    let err = pkg::issue_partial_key(&forged, &bed.master, &mut bed.desk, &mut bed.directory, bed.now);
    assert!(matches!(err, Err(Error::BindingCheckFailed)));
    assert!(bed.directory.is_empty());
    assert_eq!(bed.desk.pending(), 1);
    let honest = BindingRequest {
        params: bp,
        confirmation_nonce: token.nonce,
    };
    pkg::issue_partial_key(&honest, &bed.master, &mut bed.desk, &mut bed.directory, bed.now).unwrap();
    // single use
    let again = pkg::issue_partial_key(&honest, &bed.master, &mut bed.desk, &mut bed.directory, bed.now);
    assert!(matches!(again, Err(Error::IdentityAlreadyRegistered(_))));
}

#[test]
fn an_identity_registers_once() {
    let mut r = rng(9);
    let mut bed = Testbed::new(&mut r);
    bed.register("hank", &mut r).unwrap();
    assert!(matches!(
        bed.request_and_issue("hank", &mut r),
        Err(Error::IdentityAlreadyRegistered(_))
    ));
}

#[test]
fn every_request_draws_fresh_factors() {
    let mut r = rng(10);
    let (f1, bp1) = signer::make_binding_parameters(b"ivy", &mut r).unwrap();
    let (f2, bp2) = signer::make_binding_parameters(b"ivy", &mut r).unwrap();
    assert_ne!(f1.expose_a(), f2.expose_a());
    assert_ne!(f1.expose_b(), f2.expose_b());
    assert_ne!(bp1, bp2);
}

#[test]
fn zero_factors_are_refused() {
    assert!(BindingFactors::from_scalars(b"x", Scalar::zero(), Scalar::one()).is_err());
    assert!(BindingFactors::from_scalars(b"x", Scalar::one(), Scalar::zero()).is_err());
}

#[test]
fn secrets_round_trip_through_their_encodings() {
    let mut r = rng(11);
    let mut bed = Testbed::new(&mut r);
    let key = bed.register("jack", &mut r).unwrap();
    let back = signer::SignerKey::from_secret_bytes(&key.to_secret_bytes()).unwrap();
    assert_eq!(back.private_key(), key.private_key());
    assert_eq!(back.b(), key.b());
    let master = pkg::MasterKey::from_secret_bytes(&bed.master.to_secret_bytes()).unwrap();
    assert_eq!(master.expose_secret(), bed.master.expose_secret());
    assert!(pairing_equation(
        &[(*key.private_key(), GroupElement::generator())],
        &[(key.public_key().mul(&key.b()), bed.params.pkg_public_key)]
    )
    .unwrap());
}
