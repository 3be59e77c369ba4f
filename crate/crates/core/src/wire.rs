//! Length-prefixed framing shared by every message file.
//!
//! A message is `"PSIG" || version || kind || lp(suite_id) || body`, where
//! `lp(x)` is a 4-byte big-endian length followed by `x`. Body fields are
//! written in declaration order with the same `lp` framing; timestamps are
//! 8-byte big-endian integers.

use crate::error::{Error, Result};
use crate::pairing::{check_suite, GroupElement, Scalar, SUITE_ID};

pub const MAGIC: &[u8; 4] = b"PSIG";
pub const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageKind {
    Params = 1,
    BindingRequest = 2,
    PartialKey = 3,
    Warrant = 4,
    Delegation = 5,
    Signature = 6,
    RevokeRequest = 7,
    Confirmation = 8,
    SignerKey = 9,
    BindingFactors = 10,
    MasterKey = 11,
    ProxyKey = 12,
}

impl MessageKind {
    fn from_byte(b: u8) -> Result<Self> {
        use MessageKind::*;
        Ok(match b {
            1 => Params,
            2 => BindingRequest,
            3 => PartialKey,
            4 => Warrant,
            5 => Delegation,
            6 => Signature,
            7 => RevokeRequest,
            8 => Confirmation,
            9 => SignerKey,
            10 => BindingFactors,
            11 => MasterKey,
            12 => ProxyKey,
            other => return Err(Error::Decode(format!("unknown message kind {other}"))),
        })
    }
}

#[derive(Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a framed message of the given kind.
    pub fn message(kind: MessageKind) -> Self {
        let mut enc = Encoder::new();
        enc.buf.extend_from_slice(MAGIC);
        enc.buf.push(VERSION);
        enc.buf.push(kind as u8);
        enc.bytes(SUITE_ID.as_bytes());
        enc
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(&(b.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(b);
        self
    }

    pub fn element(&mut self, e: &GroupElement) -> &mut Self {
        self.bytes(&e.to_bytes())
    }

    pub fn scalar(&mut self, s: &Scalar) -> &mut Self {
        self.bytes(&s.to_bytes())
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn finish(&mut self) -> Vec<u8> {
        std::mem::take(&mut self.buf)
    }
}

pub struct Decoder<'a> {
    rest: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Decoder { rest: bytes }
    }

    /// Opens a framed message, checking magic, version, kind and suite.
    pub fn message(bytes: &'a [u8], kind: MessageKind) -> Result<Self> {
        if bytes.len() < 6 || &bytes[..4] != MAGIC {
            return Err(Error::Decode("missing PSIG header".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Decode(format!("unsupported version {}", bytes[4])));
        }
        let found = MessageKind::from_byte(bytes[5])?;
        if found != kind {
            return Err(Error::Decode(format!("expected {kind:?} message, found {found:?}")));
        }
        let mut dec = Decoder { rest: &bytes[6..] };
        let suite = dec.string()?;
        if check_suite(&suite).is_err() {
            return Err(Error::SuiteMismatch {
                expected: SUITE_ID.to_owned(),
                found: suite,
            });
        }
        Ok(dec)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.rest.len() < n {
            return Err(Error::Decode("truncated message".into()));
        }
        let (head, tail) = self.rest.split_at(n);
        self.rest = tail;
        Ok(head)
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>> {
        let len = u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as usize;
        Ok(self.take(len)?.to_vec())
    }

    pub fn string(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?).map_err(|_| Error::Decode("invalid UTF-8".into()))
    }

    pub fn element(&mut self) -> Result<GroupElement> {
        GroupElement::from_bytes(&self.bytes()?)
    }

    pub fn scalar(&mut self) -> Result<Scalar> {
        Scalar::from_bytes(&self.bytes()?)
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn finish(self) -> Result<()> {
        if self.rest.is_empty() {
            Ok(())
        } else {
            Err(Error::Decode("trailing bytes".into()))
        }
    }
}
