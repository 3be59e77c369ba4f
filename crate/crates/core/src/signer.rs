//! Signer-side key lifecycle: binding factors, binding parameters, partial
//! key validation and unblinding.

use std::fmt;

use rand::{CryptoRng, RngCore};

use crate::directory::RegistrationRecord;
use crate::error::{Error, Result};
use crate::pairing::{hash_to_group_h2, pairing_equation, GroupElement, Scalar, SystemParams};
use crate::pkg::BindingParameters;
use crate::wire::{Decoder, Encoder, MessageKind};

/// The secret pair `(a, b)`. Never leaves the signer.
#[derive(Clone)]
pub struct BindingFactors {
    identity: Vec<u8>,
    a: Scalar,
    b: Scalar,
}

impl fmt::Debug for BindingFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BindingFactors")
            .field("identity", &String::from_utf8_lossy(&self.identity))
            .finish_non_exhaustive()
    }
}

impl BindingFactors {
    pub fn random<R: RngCore + CryptoRng>(identity: &[u8], rng: &mut R) -> Result<Self> {
        Self::from_scalars(
            identity,
            Scalar::random_nonzero(rng),
            Scalar::random_nonzero(rng),
        )
    }

    /// Fixed factors, e.g. `a = b = 1` in tests.
    pub fn from_scalars(identity: &[u8], a: Scalar, b: Scalar) -> Result<Self> {
        if identity.is_empty() {
            return Err(Error::EmptyIdentity);
        }
        if a.is_zero() || b.is_zero() {
            return Err(Error::InverseOfZero);
        }
        Ok(BindingFactors {
            identity: identity.to_vec(),
            a,
            b,
        })
    }

    pub fn identity(&self) -> &[u8] {
        &self.identity
    }

    pub fn expose_a(&self) -> Scalar {
        self.a
    }

    pub fn expose_b(&self) -> Scalar {
        self.b
    }

    /// `(a*Pub, a*b*Pub, b*P, a*b*P)`.
    pub fn binding_parameters(&self) -> BindingParameters {
        let public = hash_to_group_h2(&self.identity);
        let ab = self.a * self.b;
        BindingParameters {
            identity: self.identity.clone(),
            x: public.mul(&self.a),
            y: public.mul(&ab),
            z: GroupElement::from_scalar(&self.b),
            w: GroupElement::from_scalar(&ab),
        }
    }

    pub fn to_secret_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::BindingFactors)
            .bytes(&self.identity)
            .scalar(&self.a)
            .scalar(&self.b)
            .finish()
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::BindingFactors)?;
        let identity = dec.bytes()?;
        let a = dec.scalar()?;
        let b = dec.scalar()?;
        dec.finish()?;
        Self::from_scalars(&identity, a, b)
    }
}

/// Draws fresh `(a, b)` and computes the binding parameters for `identity`.
pub fn make_binding_parameters<R: RngCore + CryptoRng>(
    identity: &[u8],
    rng: &mut R,
) -> Result<(BindingFactors, BindingParameters)> {
    let factors = BindingFactors::random(identity, rng)?;
    let params = factors.binding_parameters();
    Ok((factors, params))
}

/// `e(D, P) = e(Y, Pub_PKG)`.
pub fn validate_partial_key(d: &GroupElement, bp: &BindingParameters, params: &SystemParams) -> bool {
    pairing_equation(
        &[(*d, params.generator)],
        &[(bp.y, params.pkg_public_key)],
    )
    .unwrap_or(false)
}

/// `S = a^-1 * D`. Consumes the factors; only `b` survives in the key.
pub fn unblind(d: &GroupElement, factors: BindingFactors) -> SignerKey {
    let a_inv = factors.a.inverse().expect("binding factor a is nonzero");
    SignerKey {
        public_key: hash_to_group_h2(&factors.identity),
        identity: factors.identity,
        private_key: d.without_mirror().mul(&a_inv),
        b: factors.b,
    }
}

/// Validates `D` against the factors' own binding parameters, then unblinds.
pub fn finalize(d: &GroupElement, factors: BindingFactors, params: &SystemParams) -> Result<SignerKey> {
    if !validate_partial_key(d, &factors.binding_parameters(), params) {
        return Err(Error::InvalidPartialKey);
    }
    Ok(unblind(d, factors))
}

/// A signer's long-term key: `S = s*b*Pub` plus the retained factor `b`.
#[derive(Clone)]
pub struct SignerKey {
    identity: Vec<u8>,
    public_key: GroupElement,
    private_key: GroupElement,
    b: Scalar,
}

impl fmt::Debug for SignerKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignerKey")
            .field("identity", &String::from_utf8_lossy(&self.identity))
            .field("public_key", &self.public_key)
            .finish_non_exhaustive()
    }
}

impl SignerKey {
    /// Assembles a key from raw parts without any check.
    pub fn from_parts(identity: &[u8], private_key: GroupElement, b: Scalar) -> Self {
        SignerKey {
            identity: identity.to_vec(),
            public_key: hash_to_group_h2(identity),
            private_key: private_key.without_mirror(),
            b,
        }
    }

    pub fn identity(&self) -> &[u8] {
        &self.identity
    }

    pub fn public_key(&self) -> &GroupElement {
        &self.public_key
    }

    pub fn private_key(&self) -> &GroupElement {
        &self.private_key
    }

    pub fn b(&self) -> Scalar {
        self.b
    }

    /// `psi = b*P`.
    pub fn psi(&self) -> GroupElement {
        GroupElement::from_scalar(&self.b)
    }

    /// `e(S, P) = e(Pub, Reg)`.
    pub fn is_consistent_with(&self, reg: &RegistrationRecord) -> bool {
        reg.identity == self.identity
            && pairing_equation(
                &[(self.private_key, GroupElement::generator())],
                &[(self.public_key, reg.token)],
            )
            .unwrap_or(false)
    }

    /// `e(S, P) = e(b*Pub, Pub_PKG)`.
    pub fn matches_params(&self, params: &SystemParams) -> bool {
        pairing_equation(
            &[(self.private_key, params.generator)],
            &[(self.public_key.mul(&self.b), params.pkg_public_key)],
        )
        .unwrap_or(false)
    }

    /// Key-store payload: identity, `S`, `b`.
    pub fn to_secret_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::SignerKey)
            .bytes(&self.identity)
            .element(&self.private_key)
            .scalar(&self.b)
            .finish()
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::SignerKey)?;
        let identity = dec.bytes()?;
        let private_key = dec.element()?;
        let b = dec.scalar()?;
        dec.finish()?;
        Ok(SignerKey::from_parts(&identity, private_key, b))
    }
}
