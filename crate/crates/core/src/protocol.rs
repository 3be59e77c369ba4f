//! Delegation by warrant, proxy signing, verification and revoke requests.
//!
//! With `h_w = H1(m_w, Pub_o, Pub_p)`:
//!
//! * delegation: `U_o = S_o + b_o*h_w`, `psi_o = b_o*P`
//! * proxy key: `V_p = U_o + S_p + b_p*h_w`
//! * signature: `R = r*P`, `a = h(m, R, Pub_p)`, `V = (r + a)^-1 * V_p`
//! * verification: `e(R + a*P, V) = e(psi_o + psi_p, h_w) * e(Pub_o, Reg_o) * e(Pub_p, Reg_p)`

use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, RngCore};

use crate::directory::RegistrationRecord;
use crate::error::{Error, Result};
use crate::pairing::{
    hash_to_group_h1, hash_to_group_h2, hash_to_scalar, pairing_equation, GroupElement, Scalar,
    SystemParams,
};
use crate::signer::SignerKey;
use crate::wire::{Decoder, Encoder, MessageKind};
use crate::Timestamp;

/// The delegation statement `m_w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warrant {
    pub original_identity: Vec<u8>,
    pub proxy_identity: Vec<u8>,
    /// Every message signed under the warrant must start with these bytes.
    pub message_qualification: Vec<u8>,
    pub valid_from: Timestamp,
    pub valid_until: Timestamp,
}

impl Warrant {
    pub fn new(
        original: impl AsRef<[u8]>,
        proxy: impl AsRef<[u8]>,
        qualification: impl AsRef<[u8]>,
        valid_from: u64,
        valid_until: u64,
    ) -> Result<Self> {
        let warrant = Warrant {
            original_identity: original.as_ref().to_vec(),
            proxy_identity: proxy.as_ref().to_vec(),
            message_qualification: qualification.as_ref().to_vec(),
            valid_from: Timestamp(valid_from),
            valid_until: Timestamp(valid_until),
        };
        warrant.validate()?;
        Ok(warrant)
    }

    pub fn validate(&self) -> Result<()> {
        if self.original_identity.is_empty() || self.proxy_identity.is_empty() {
            return Err(Error::InvalidWarrant("identities must be non-empty"));
        }
        if self.valid_from >= self.valid_until {
            return Err(Error::InvalidWarrant("valid_from must precede valid_until"));
        }
        Ok(())
    }

    pub fn permits_message(&self, message: &[u8]) -> bool {
        message.starts_with(&self.message_qualification)
    }

    pub fn is_current(&self, now: Timestamp) -> bool {
        self.valid_from <= now && now <= self.valid_until
    }

    pub fn original_public_key(&self) -> GroupElement {
        hash_to_group_h2(&self.original_identity)
    }

    pub fn proxy_public_key(&self) -> GroupElement {
        hash_to_group_h2(&self.proxy_identity)
    }

    /// Canonical encoding; these are the warrant bytes fed to `H1`.
    pub fn to_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::Warrant)
            .bytes(&self.original_identity)
            .bytes(&self.proxy_identity)
            .bytes(&self.message_qualification)
            .u64(self.valid_from.0)
            .u64(self.valid_until.0)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::Warrant)?;
        let warrant = Warrant {
            original_identity: dec.bytes()?,
            proxy_identity: dec.bytes()?,
            message_qualification: dec.bytes()?,
            valid_from: Timestamp(dec.u64()?),
            valid_until: Timestamp(dec.u64()?),
        };
        dec.finish()?;
        warrant.validate()?;
        Ok(warrant)
    }

    /// `H1(m_w, Pub_o, Pub_p)`.
    pub fn digest_point(&self, pub_o: &GroupElement, pub_p: &GroupElement) -> GroupElement {
        hash_to_group_h1(&self.to_bytes(), pub_o, pub_p)
    }
}

fn decode_warrant(dec: &mut Decoder<'_>) -> Result<Warrant> {
    Warrant::from_bytes(&dec.bytes()?)
}

/// The delegation capability `(m_w, U_o, psi_o, Pub_o)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delegation {
    pub warrant: Warrant,
    pub u_o: GroupElement,
    pub psi_o: GroupElement,
    pub pub_o: GroupElement,
}

impl Delegation {
    pub fn to_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::Delegation)
            .bytes(&self.warrant.to_bytes())
            .element(&self.u_o)
            .element(&self.psi_o)
            .element(&self.pub_o)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::Delegation)?;
        let d = Delegation {
            warrant: decode_warrant(&mut dec)?,
            u_o: dec.element()?,
            psi_o: dec.element()?,
            pub_o: dec.element()?,
        };
        dec.finish()?;
        Ok(d)
    }
}

/// The proxy signer's signing key for one warrant.
#[derive(Clone, PartialEq, Eq)]
pub struct ProxyKey {
    pub v_p: GroupElement,
    pub warrant: Warrant,
    pub psi_o: GroupElement,
    pub psi_p: GroupElement,
    pub pub_o: GroupElement,
    pub pub_p: GroupElement,
}

impl fmt::Debug for ProxyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProxyKey")
            .field("warrant", &self.warrant)
            .finish_non_exhaustive()
    }
}

impl ProxyKey {
    pub fn to_secret_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::ProxyKey)
            .bytes(&self.warrant.to_bytes())
            .element(&self.v_p)
            .element(&self.psi_o)
            .element(&self.psi_p)
            .element(&self.pub_o)
            .element(&self.pub_p)
            .finish()
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::ProxyKey)?;
        let warrant = decode_warrant(&mut dec)?;
        let key = ProxyKey {
            warrant,
            v_p: dec.element()?,
            psi_o: dec.element()?,
            psi_p: dec.element()?,
            pub_o: dec.element()?,
            pub_p: dec.element()?,
        };
        dec.finish()?;
        Ok(key)
    }
}

/// The proxy signature `(m_w, m, R, V, psi_o, psi_p, Pub_o, Pub_p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProxySignature {
    pub warrant: Warrant,
    pub message: Vec<u8>,
    pub r_point: GroupElement,
    pub v: GroupElement,
    pub psi_o: GroupElement,
    pub psi_p: GroupElement,
    pub pub_o: GroupElement,
    pub pub_p: GroupElement,
}

impl ProxySignature {
    pub fn to_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::Signature)
            .bytes(&self.warrant.to_bytes())
            .bytes(&self.message)
            .element(&self.r_point)
            .element(&self.v)
            .element(&self.psi_o)
            .element(&self.psi_p)
            .element(&self.pub_o)
            .element(&self.pub_p)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::Signature)?;
        let sig = ProxySignature {
            warrant: decode_warrant(&mut dec)?,
            message: dec.bytes()?,
            r_point: dec.element()?,
            v: dec.element()?,
            psi_o: dec.element()?,
            psi_p: dec.element()?,
            pub_o: dec.element()?,
            pub_p: dec.element()?,
        };
        dec.finish()?;
        Ok(sig)
    }
}

/// `(M_r, m_w, Rev, Pub_o, Pub_p, psi_o)` with `Rev = S_o + b_o*H1(M_r, Pub_o, Pub_p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevokeRequest {
    pub m_r: Vec<u8>,
    pub warrant: Warrant,
    pub rev: GroupElement,
    pub pub_o: GroupElement,
    pub pub_p: GroupElement,
    pub psi_o: GroupElement,
}

impl RevokeRequest {
    pub fn to_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::RevokeRequest)
            .bytes(&self.m_r)
            .bytes(&self.warrant.to_bytes())
            .element(&self.rev)
            .element(&self.pub_o)
            .element(&self.pub_p)
            .element(&self.psi_o)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::RevokeRequest)?;
        let req = RevokeRequest {
            m_r: dec.bytes()?,
            warrant: decode_warrant(&mut dec)?,
            rev: dec.element()?,
            pub_o: dec.element()?,
            pub_p: dec.element()?,
            psi_o: dec.element()?,
        };
        dec.finish()?;
        Ok(req)
    }
}

/// How verification treats revoked registrations and the warrant window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RevocationPolicy {
    /// Revoked signers are rejected and the warrant must be current.
    #[default]
    Strict,
    /// Only the algebra and the message qualification are checked.
    Lenient,
}

impl FromStr for RevocationPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "strict" => Ok(RevocationPolicy::Strict),
            "lenient" => Ok(RevocationPolicy::Lenient),
            other => Err(format!("unknown policy {other:?} (expected strict|lenient)")),
        }
    }
}

/// Original signer: `U_o = S_o + b_o*H1(m_w, Pub_o, Pub_p)`, `psi_o = b_o*P`.
pub fn create_delegation(
    original: &SignerKey,
    warrant: &Warrant,
    pub_p: &GroupElement,
) -> Result<Delegation> {
    if original.identity() != warrant.original_identity {
        return Err(Error::IdentityMismatch("key does not belong to the warrant's original signer"));
    }
    if *pub_p != warrant.proxy_public_key() {
        return Err(Error::IdentityMismatch("proxy public key does not match the warrant"));
    }
    let pub_o = *original.public_key();
    let h_w = warrant.digest_point(&pub_o, pub_p);
    Ok(Delegation {
        warrant: warrant.clone(),
        u_o: *original.private_key() + h_w.mul(&original.b()),
        psi_o: original.psi(),
        pub_o,
    })
}

/// Proxy signer: `e(U_o, P) = e(psi_o, H1(m_w, Pub_o, Pub_p)) * e(Pub_o, Reg_o)`.
pub fn validate_delegation(
    delegation: &Delegation,
    reg_o: &RegistrationRecord,
    params: &SystemParams,
) -> Result<bool> {
    let warrant = &delegation.warrant;
    if reg_o.identity != warrant.original_identity {
        return Err(Error::IdentityMismatch("registration record is not the delegator's"));
    }
    if !reg_o.is_active() {
        return Err(Error::RevokedDelegator(String::from_utf8_lossy(&reg_o.identity).into()));
    }
    if delegation.pub_o != warrant.original_public_key() {
        return Ok(false);
    }
    let h_w = warrant.digest_point(&delegation.pub_o, &warrant.proxy_public_key());
    Ok(pairing_equation(
        &[(delegation.u_o, params.generator)],
        &[(delegation.psi_o, h_w), (delegation.pub_o, reg_o.token)],
    )
    .unwrap_or(false))
}

/// Proxy signer: validates the delegation and computes
/// `V_p = U_o + S_p + b_p*H1(m_w, Pub_o, Pub_p)`.
pub fn derive_proxy_key(
    delegation: &Delegation,
    proxy: &SignerKey,
    reg_o: &RegistrationRecord,
    params: &SystemParams,
) -> Result<ProxyKey> {
    let warrant = &delegation.warrant;
    if proxy.identity() != warrant.proxy_identity {
        return Err(Error::IdentityMismatch("key does not belong to the warrant's proxy signer"));
    }
    if !validate_delegation(delegation, reg_o, params)? {
        return Err(Error::InvalidDelegation);
    }
    let pub_p = *proxy.public_key();
    let h_w = warrant.digest_point(&delegation.pub_o, &pub_p);
    Ok(ProxyKey {
        v_p: delegation.u_o + *proxy.private_key() + h_w.mul(&proxy.b()),
        warrant: warrant.clone(),
        psi_o: delegation.psi_o,
        psi_p: proxy.psi(),
        pub_o: delegation.pub_o,
        pub_p,
    })
}

/// `(r + a)^-1`, or `None` when `r + a = 0 mod q`.
pub(crate) fn blinding_inverse(r: Scalar, a: Scalar) -> Option<Scalar> {
    (r + a).inverse().ok()
}

/// Signs `message` under the proxy key. `r` is resampled in the
/// negligible case `r + h(m, R, Pub_p) = 0`.
pub fn proxy_sign<R: RngCore + CryptoRng>(
    key: &ProxyKey,
    message: &[u8],
    now: Timestamp,
    rng: &mut R,
) -> Result<ProxySignature> {
    if !key.warrant.is_current(now) {
        return Err(Error::WarrantViolation("outside the warrant validity window"));
    }
    if !key.warrant.permits_message(message) {
        return Err(Error::WarrantViolation("message outside the warrant qualification"));
    }
    loop {
        if let Some(sig) = sign_with_nonce(key, message, Scalar::random_nonzero(rng)) {
            return Ok(sig);
        }
    }
}

/// One signing attempt with a fixed `r`; `None` when `r + a = 0`.
pub(crate) fn sign_with_nonce(key: &ProxyKey, message: &[u8], r: Scalar) -> Option<ProxySignature> {
    let r_point = GroupElement::from_scalar(&r);
    let a = hash_to_scalar(message, &r_point, &key.pub_p);
    let inv = blinding_inverse(r, a)?;
    Some(ProxySignature {
        warrant: key.warrant.clone(),
        message: message.to_vec(),
        r_point,
        v: key.v_p.mul(&inv),
        psi_o: key.psi_o,
        psi_p: key.psi_p,
        pub_o: key.pub_o,
        pub_p: key.pub_p,
    })
}

/// Verifies a proxy signature against the directory records of both signers.
///
/// `Pub_o` and `Pub_p` are recomputed from the warrant's identities and must
/// equal the embedded points. Returns `Ok(false)` when the pairing equation
/// fails, the message is outside the warrant qualification, or (strict
/// policy) `now` is outside the warrant window.
pub fn verify_proxy_signature(
    sig: &ProxySignature,
    reg_o: &RegistrationRecord,
    reg_p: &RegistrationRecord,
    params: &SystemParams,
    policy: RevocationPolicy,
    now: Timestamp,
) -> Result<bool> {
    let warrant = &sig.warrant;
    if reg_o.identity != warrant.original_identity || reg_p.identity != warrant.proxy_identity {
        return Err(Error::IdentityBindingFailure("registration records do not match the warrant"));
    }
    if sig.pub_o != warrant.original_public_key() || sig.pub_p != warrant.proxy_public_key() {
        return Err(Error::IdentityBindingFailure("public keys do not match warrant identities"));
    }
    if policy == RevocationPolicy::Strict {
        for rec in [reg_o, reg_p] {
            if !rec.is_active() {
                return Err(Error::RevokedSigner(String::from_utf8_lossy(&rec.identity).into()));
            }
        }
        if !warrant.is_current(now) {
            return Ok(false);
        }
    }
    if !warrant.permits_message(&sig.message) {
        return Ok(false);
    }
    let a = hash_to_scalar(&sig.message, &sig.r_point, &sig.pub_p);
    let lhs = sig.r_point + params.generator.mul(&a);
    let h_w = warrant.digest_point(&sig.pub_o, &sig.pub_p);
    Ok(pairing_equation(
        &[(lhs, sig.v)],
        &[
            (sig.psi_o + sig.psi_p, h_w),
            (sig.pub_o, reg_o.token),
            (sig.pub_p, reg_p.token),
        ],
    )
    .unwrap_or(false))
}

/// `M_r = ID_o || ';' || reason`.
pub fn revocation_message(identity: &[u8], reason: &[u8]) -> Vec<u8> {
    let mut m_r = Vec::with_capacity(identity.len() + 1 + reason.len());
    m_r.extend_from_slice(identity);
    m_r.push(b';');
    m_r.extend_from_slice(reason);
    m_r
}

/// Original signer: `Rev = S_o + b_o*H1(M_r, Pub_o, Pub_p)`.
pub fn create_revoke_request(
    original: &SignerKey,
    warrant: &Warrant,
    reason: &[u8],
) -> Result<RevokeRequest> {
    if original.identity() != warrant.original_identity {
        return Err(Error::IdentityMismatch("key does not belong to the warrant's original signer"));
    }
    let m_r = revocation_message(original.identity(), reason);
    let pub_o = *original.public_key();
    let pub_p = warrant.proxy_public_key();
    let h = hash_to_group_h1(&m_r, &pub_o, &pub_p);
    Ok(RevokeRequest {
        rev: *original.private_key() + h.mul(&original.b()),
        m_r,
        warrant: warrant.clone(),
        pub_o,
        pub_p,
        psi_o: original.psi(),
    })
}
