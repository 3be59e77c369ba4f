use thiserror::Error;

/// Errors produced by the protocol and its persistence layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed element: {0}")]
    MalformedElement(&'static str),
    #[error("pairing needs at least one generator-derived argument")]
    Unpairable,
    #[error("inverse of zero scalar")]
    InverseOfZero,
    #[error("unsupported suite {0:?}")]
    UnsupportedSuite(String),
    #[error("suite mismatch: expected {expected:?}, found {found:?}")]
    SuiteMismatch { expected: String, found: String },
    #[error("public parameters inconsistent with master key")]
    InconsistentMasterKey,

    #[error("identity must be non-empty")]
    EmptyIdentity,
    #[error("identity {0:?} is already registered")]
    IdentityAlreadyRegistered(String),
    #[error("binding parameters failed the pairing check")]
    BindingCheckFailed,
    #[error("confirmation token invalid: {0}")]
    ConfirmationInvalid(&'static str),
    #[error("identity {0:?} not found in directory")]
    NotFound(String),
    #[error("identity {0:?} is already revoked")]
    AlreadyRevoked(String),
    #[error("revoke request failed validation")]
    InvalidRevokeSignature,

    #[error("partial private key failed validation")]
    InvalidPartialKey,
    #[error("identity mismatch: {0}")]
    IdentityMismatch(&'static str),
    #[error("invalid warrant: {0}")]
    InvalidWarrant(&'static str),
    #[error("warrant violation: {0}")]
    WarrantViolation(&'static str),
    #[error("delegation failed validation")]
    InvalidDelegation,
    #[error("delegator {0:?} has been revoked")]
    RevokedDelegator(String),
    #[error("signer {0:?} has been revoked")]
    RevokedSigner(String),
    #[error("identity binding failure: {0}")]
    IdentityBindingFailure(&'static str),

    #[error("decode error: {0}")]
    Decode(String),
    #[error("directory log line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
    #[error("key store: {0}")]
    KeyStore(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
