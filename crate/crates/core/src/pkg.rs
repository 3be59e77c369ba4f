//! The Private Key Generator.
//!
//! The PKG confirms that a requester owns the identity, checks the binding
//! parameters, issues the blinded partial key `D = s*Y` and publishes the
//! registration token `Reg = s*Z`. It never sees the signer's binding
//! factors, so it cannot reconstruct `S = s*b*Pub`.

use std::collections::BTreeMap;
use std::fmt;

use rand::{CryptoRng, RngCore};

use crate::directory::{lossy, DirectoryEvent, RegistrationDirectory, RegistrationRecord};
use crate::error::{Error, Result};
use crate::pairing::{
    check_suite, hash_to_group_h1, hash_to_group_h2, pairing_equation, GroupElement, Scalar,
    SystemParams,
};
use crate::protocol::RevokeRequest;
use crate::wire::{Decoder, Encoder, MessageKind};
use crate::Timestamp;

/// Default confirmation window, in seconds.
pub const DEFAULT_CONFIRMATION_WINDOW: u64 = 15 * 60;

/// The master secret `s` together with the parameters it generated.
#[derive(Clone)]
pub struct MasterKey {
    s: Scalar,
    params: SystemParams,
}

impl fmt::Debug for MasterKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MasterKey").finish_non_exhaustive()
    }
}

impl MasterKey {
    /// Rebuilds a master key, checking `Pub_PKG = s*P`.
    pub fn from_parts(s: Scalar, params: SystemParams) -> Result<Self> {
        params.validate()?;
        if s.is_zero() || GroupElement::from_scalar(&s) != params.pkg_public_key {
            return Err(Error::InconsistentMasterKey);
        }
        Ok(MasterKey { s, params })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// The raw master secret. Only for tests and the encrypted key store.
    pub fn expose_secret(&self) -> Scalar {
        self.s
    }

    pub fn to_secret_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::MasterKey)
            .scalar(&self.s)
            .finish()
    }

    pub fn from_secret_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::MasterKey)?;
        let s = dec.scalar()?;
        dec.finish()?;
        let params = SystemParams::new(GroupElement::from_scalar(&s))?;
        MasterKey::from_parts(s, params)
    }
}

/// Runs Setup: draws `s` uniformly from `Z_q^*` and publishes `Pub_PKG = s*P`.
pub fn setup<R: RngCore + CryptoRng>(
    suite_id: &str,
    rng: &mut R,
) -> Result<(SystemParams, MasterKey)> {
    check_suite(suite_id)?;
    setup_with_secret(Scalar::random_nonzero(rng))
}

/// Setup with a caller-chosen master secret.
pub fn setup_with_secret(s: Scalar) -> Result<(SystemParams, MasterKey)> {
    if s.is_zero() {
        return Err(Error::InconsistentMasterKey);
    }
    let params = SystemParams::new(GroupElement::from_scalar(&s))?;
    Ok((params.clone(), MasterKey { s, params }))
}

pub fn encode_params(params: &SystemParams) -> Vec<u8> {
    Encoder::message(MessageKind::Params)
        .element(&params.generator)
        .element(&params.pkg_public_key)
        .bytes(params.group_order.as_bytes())
        .finish()
}

pub fn decode_params(bytes: &[u8]) -> Result<SystemParams> {
    let mut dec = Decoder::message(bytes, MessageKind::Params)?;
    let generator = dec.element()?;
    let pkg_public_key = dec.element()?;
    let group_order = dec.string()?;
    dec.finish()?;
    let params = SystemParams {
        generator,
        pkg_public_key,
        group_order,
        suite_id: crate::pairing::SUITE_ID.to_owned(),
    };
    params.validate()?;
    Ok(params)
}

/// `(X, Y, Z, W, ID)` = `(a*Pub, a*b*Pub, b*P, a*b*P, ID)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BindingParameters {
    pub identity: Vec<u8>,
    pub x: GroupElement,
    pub y: GroupElement,
    pub z: GroupElement,
    pub w: GroupElement,
}

impl BindingParameters {
    /// The PKG's well-formedness check `e(Y,P) = e(X,Z) = e(Pub,W)`.
    pub fn is_well_formed(&self) -> bool {
        if self.identity.is_empty() {
            return false;
        }
        let points = [&self.x, &self.y, &self.z, &self.w];
        if points.iter().any(|p| p.is_identity()) {
            return false;
        }
        let p = GroupElement::generator();
        let public = hash_to_group_h2(&self.identity);
        let first = pairing_equation(&[(self.y, p)], &[(self.x, self.z)]);
        let second = pairing_equation(&[(self.x, self.z)], &[(public, self.w)]);
        matches!((first, second), (Ok(true), Ok(true)))
    }
}

/// Binding parameters plus the confirmation nonce that authorizes them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BindingRequest {
    pub params: BindingParameters,
    pub confirmation_nonce: [u8; 32],
}

impl BindingRequest {
    pub fn to_bytes(&self) -> Vec<u8> {
        let bp = &self.params;
        Encoder::message(MessageKind::BindingRequest)
            .bytes(&bp.identity)
            .element(&bp.x)
            .element(&bp.y)
            .element(&bp.z)
            .element(&bp.w)
            .bytes(&self.confirmation_nonce)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::BindingRequest)?;
        let params = BindingParameters {
            identity: dec.bytes()?,
            x: dec.element()?,
            y: dec.element()?,
            z: dec.element()?,
            w: dec.element()?,
        };
        let confirmation_nonce = nonce_from(&dec.bytes()?)?;
        dec.finish()?;
        Ok(BindingRequest {
            params,
            confirmation_nonce,
        })
    }
}

fn nonce_from(bytes: &[u8]) -> Result<[u8; 32]> {
    bytes
        .try_into()
        .map_err(|_| Error::Decode("nonce must be 32 bytes".into()))
}

/// Single-use proof that the identity owner asked for a key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfirmationToken {
    pub identity: Vec<u8>,
    pub nonce: [u8; 32],
    pub expiry: Timestamp,
}

impl ConfirmationToken {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::message(MessageKind::Confirmation);
        self.encode_into(&mut enc);
        enc.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::Confirmation)?;
        let token = Self::decode_from(&mut dec)?;
        dec.finish()?;
        Ok(token)
    }

    fn encode_into(&self, enc: &mut Encoder) {
        enc.bytes(&self.identity)
            .bytes(&self.nonce)
            .u64(self.expiry.0);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self> {
        Ok(ConfirmationToken {
            identity: dec.bytes()?,
            nonce: nonce_from(&dec.bytes()?)?,
            expiry: Timestamp(dec.u64()?),
        })
    }
}

/// Outstanding confirmation tokens, keyed by nonce.
#[derive(Clone, Debug)]
pub struct ConfirmationDesk {
    window_secs: u64,
    pending: BTreeMap<[u8; 32], ConfirmationToken>,
}

impl Default for ConfirmationDesk {
    fn default() -> Self {
        Self::new(DEFAULT_CONFIRMATION_WINDOW)
    }
}

impl ConfirmationDesk {
    pub fn new(window_secs: u64) -> Self {
        ConfirmationDesk {
            window_secs,
            pending: BTreeMap::new(),
        }
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Issues a fresh token for `identity`. Delivery to the owner is out of band.
    pub fn begin_confirmation<R: RngCore + CryptoRng>(
        &mut self,
        identity: &[u8],
        now: Timestamp,
        rng: &mut R,
    ) -> Result<ConfirmationToken> {
        if identity.is_empty() {
            return Err(Error::EmptyIdentity);
        }
        let mut nonce = [0u8; 32];
        rng.fill_bytes(&mut nonce);
        let token = ConfirmationToken {
            identity: identity.to_vec(),
            nonce,
            expiry: now.plus_secs(self.window_secs),
        };
        self.pending.insert(nonce, token.clone());
        Ok(token)
    }

    /// Checks a presented nonce without consuming it.
    pub fn check(&self, identity: &[u8], nonce: &[u8; 32], now: Timestamp) -> Result<()> {
        let token = self
            .pending
            .get(nonce)
            .ok_or(Error::ConfirmationInvalid("unknown or already used"))?;
        if token.identity != identity {
            return Err(Error::ConfirmationInvalid("issued for another identity"));
        }
        if now > token.expiry {
            return Err(Error::ConfirmationInvalid("expired"));
        }
        Ok(())
    }

    /// Checks and consumes a token.
    pub fn redeem(&mut self, identity: &[u8], nonce: &[u8; 32], now: Timestamp) -> Result<()> {
        self.check(identity, nonce, now)?;
        self.pending.remove(nonce);
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::message(MessageKind::Confirmation);
        enc.u64(self.window_secs).u64(self.pending.len() as u64);
        for token in self.pending.values() {
            token.encode_into(&mut enc);
        }
        enc.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::Confirmation)?;
        let mut desk = ConfirmationDesk::new(dec.u64()?);
        let count = dec.u64()?;
        for _ in 0..count {
            let token = ConfirmationToken::decode_from(&mut dec)?;
            desk.pending.insert(token.nonce, token);
        }
        dec.finish()?;
        Ok(desk)
    }
}

/// `D = s*Y`, sent to the requester over the public channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialKeyMessage {
    pub identity: Vec<u8>,
    pub d: GroupElement,
}

impl PartialKeyMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        Encoder::message(MessageKind::PartialKey)
            .bytes(&self.identity)
            .element(&self.d)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut dec = Decoder::message(bytes, MessageKind::PartialKey)?;
        let msg = PartialKeyMessage {
            identity: dec.bytes()?,
            d: dec.element()?,
        };
        dec.finish()?;
        Ok(msg)
    }
}

/// Issues a partial private key and publishes the registration token.
///
/// Checks, in order: the identity is not already in the directory, the
/// confirmation nonce is outstanding for this identity and unexpired, and
/// the binding parameters pass the pairing check. The token is consumed only
/// when all three pass.
pub fn issue_partial_key<D: RegistrationDirectory>(
    request: &BindingRequest,
    master: &MasterKey,
    desk: &mut ConfirmationDesk,
    directory: &mut D,
    now: Timestamp,
) -> Result<(PartialKeyMessage, RegistrationRecord)> {
    let bp = &request.params;
    if bp.identity.is_empty() {
        return Err(Error::EmptyIdentity);
    }
    if directory.contains(&bp.identity) {
        return Err(Error::IdentityAlreadyRegistered(lossy(&bp.identity)));
    }
    desk.check(&bp.identity, &request.confirmation_nonce, now)?;
    if !bp.is_well_formed() {
        return Err(Error::BindingCheckFailed);
    }
    desk.redeem(&bp.identity, &request.confirmation_nonce, now)?;

    let d = bp.y.mul(&master.s);
    let token = bp.z.mul(&master.s);
    directory.record(DirectoryEvent::Issued {
        identity: bp.identity.clone(),
        token,
        at: now,
    })?;
    let record = directory.lookup(&bp.identity)?;
    Ok((
        PartialKeyMessage {
            identity: bp.identity.clone(),
            d,
        },
        record,
    ))
}

pub fn lookup_registration<D: RegistrationDirectory>(
    identity: &[u8],
    directory: &D,
) -> Result<RegistrationRecord> {
    directory.lookup(identity)
}

/// Both records revoked by a successful revoke request.
#[derive(Clone, Debug)]
pub struct RevocationOutcome {
    pub original: RegistrationRecord,
    pub proxy: RegistrationRecord,
}

/// Checks the identity bindings of a revoke request and its pairing equation
/// `e(Rev, P) = e(Reg_o, Pub_o) * e(H1(M_r, Pub_o, Pub_p), psi_o)`.
pub fn validate_revoke_request(req: &RevokeRequest, reg_o: &RegistrationRecord) -> bool {
    let warrant = &req.warrant;
    let original = &warrant.original_identity;
    let mut expected_prefix = original.clone();
    expected_prefix.push(b';');
    if !req.m_r.starts_with(&expected_prefix) || reg_o.identity != *original {
        return false;
    }
    if req.pub_o != hash_to_group_h2(original)
        || req.pub_p != hash_to_group_h2(&warrant.proxy_identity)
    {
        return false;
    }
    let h = hash_to_group_h1(&req.m_r, &req.pub_o, &req.pub_p);
    pairing_equation(
        &[(req.rev, GroupElement::generator())],
        &[(reg_o.token, req.pub_o), (h, req.psi_o)],
    )
    .unwrap_or(false)
}

/// Validates a revoke request and, if valid, revokes both the original and
/// the proxy signer's records with `M_r` as the reason.
pub fn process_revoke_request<D: RegistrationDirectory>(
    req: &RevokeRequest,
    directory: &mut D,
    now: Timestamp,
) -> Result<RevocationOutcome> {
    let original = &req.warrant.original_identity;
    let proxy = &req.warrant.proxy_identity;
    let reg_o = directory.lookup(original)?;
    let reg_p = directory.lookup(proxy)?;
    for rec in [&reg_o, &reg_p] {
        if !rec.is_active() {
            return Err(Error::AlreadyRevoked(lossy(&rec.identity)));
        }
    }
    if !validate_revoke_request(req, &reg_o) {
        return Err(Error::InvalidRevokeSignature);
    }
    for identity in [original, proxy] {
        directory.record(DirectoryEvent::Revoked {
            identity: identity.clone(),
            reason: req.m_r.clone(),
            at: now,
        })?;
    }
    Ok(RevocationOutcome {
        original: directory.lookup(original)?,
        proxy: directory.lookup(proxy)?,
    })
}
