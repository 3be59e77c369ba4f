//! The PKG's public registration directory.
//!
//! [`Directory`] is the in-memory record map with the uniqueness rules;
//! [`DirectoryStore`] persists its state transitions as an append-only log.
//!
//! Log format, one event per line, fields separated by a single space:
//!
//! ```text
//! <version> <event> <identity> <token> <status> <reason> <timestamp> <checksum>
//! ```
//!
//! * `version`: two hex digits, currently `01`.
//! * `event`: `ISSUE` or `REVOKE`.
//! * `identity`: decimal byte length, `:`, lowercase hex of the identity bytes.
//! * `token`: lowercase hex of the canonical registration-token encoding.
//! * `status`: `active` or `revoked`, the record status after the event.
//! * `reason`: lowercase hex of the revocation reason, `-` when absent.
//! * `timestamp`: decimal Unix seconds.
//! * `checksum`: first 8 bytes of SHA-256 over every preceding byte of the
//!   line including the trailing space, lowercase hex.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::pairing::GroupElement;
use crate::Timestamp;

pub const LOG_VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordStatus {
    Active,
    Revoked,
}

impl RecordStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordStatus::Active => "active",
            RecordStatus::Revoked => "revoked",
        }
    }
}

/// `(Reg, ID)` pair with its lifecycle status.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationRecord {
    pub identity: Vec<u8>,
    pub token: GroupElement,
    pub status: RecordStatus,
    pub revoked_reason: Option<Vec<u8>>,
}

impl RegistrationRecord {
    pub fn is_active(&self) -> bool {
        self.status == RecordStatus::Active
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum DirectoryEvent {
    Issued {
        identity: Vec<u8>,
        token: GroupElement,
        at: Timestamp,
    },
    Revoked {
        identity: Vec<u8>,
        reason: Vec<u8>,
        at: Timestamp,
    },
}

impl DirectoryEvent {
    pub fn identity(&self) -> &[u8] {
        match self {
            DirectoryEvent::Issued { identity, .. } | DirectoryEvent::Revoked { identity, .. } => {
                identity
            }
        }
    }
}

/// Read-only point-in-time view of the directory.
pub type Snapshot = Arc<BTreeMap<Vec<u8>, RegistrationRecord>>;

/// Anything the PKG can register and revoke identities in.
pub trait RegistrationDirectory {
    fn lookup(&self, identity: &[u8]) -> Result<RegistrationRecord>;
    fn contains(&self, identity: &[u8]) -> bool;
    fn record(&mut self, event: DirectoryEvent) -> Result<()>;
}

/// In-memory record map. Snapshots share storage until the next write.
#[derive(Clone, Debug, Default)]
pub struct Directory {
    records: Snapshot,
}

impl Directory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn snapshot(&self) -> Snapshot {
        Arc::clone(&self.records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks an event against the current state without applying it.
    pub fn check(&self, event: &DirectoryEvent) -> Result<()> {
        let identity = event.identity();
        match event {
            DirectoryEvent::Issued { .. } => {
                if self.records.contains_key(identity) {
                    return Err(Error::IdentityAlreadyRegistered(lossy(identity)));
                }
            }
            DirectoryEvent::Revoked { .. } => match self.records.get(identity) {
                None => return Err(Error::NotFound(lossy(identity))),
                Some(r) if !r.is_active() => return Err(Error::AlreadyRevoked(lossy(identity))),
                Some(_) => {}
            },
        }
        Ok(())
    }

    pub fn apply(&mut self, event: DirectoryEvent) -> Result<()> {
        self.check(&event)?;
        let records = Arc::make_mut(&mut self.records);
        match event {
            DirectoryEvent::Issued {
                identity, token, ..
            } => {
                records.insert(
                    identity.clone(),
                    RegistrationRecord {
                        identity,
                        token,
                        status: RecordStatus::Active,
                        revoked_reason: None,
                    },
                );
            }
            DirectoryEvent::Revoked {
                identity, reason, ..
            } => {
                let record = records.get_mut(&identity).expect("checked above");
                record.status = RecordStatus::Revoked;
                record.revoked_reason = Some(reason);
            }
        }
        Ok(())
    }
}

impl RegistrationDirectory for Directory {
    fn lookup(&self, identity: &[u8]) -> Result<RegistrationRecord> {
        self.records
            .get(identity)
            .cloned()
            .ok_or_else(|| Error::NotFound(lossy(identity)))
    }

    fn contains(&self, identity: &[u8]) -> bool {
        self.records.contains_key(identity)
    }

    fn record(&mut self, event: DirectoryEvent) -> Result<()> {
        self.apply(event)
    }
}

pub(crate) fn lossy(identity: &[u8]) -> String {
    String::from_utf8_lossy(identity).into_owned()
}

/// Append-only, checksummed log backing a [`Directory`]. Single writer.
#[derive(Debug)]
pub struct DirectoryStore {
    path: PathBuf,
    file: File,
    directory: Directory,
}

impl DirectoryStore {
    /// Opens (creating if absent) and replays the log at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let directory = if path.exists() {
            replay(&path)?
        } else {
            Directory::new()
        };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(DirectoryStore {
            path,
            file,
            directory,
        })
    }

    /// Loads a log read-only, as a verifier would.
    pub fn load(path: impl AsRef<Path>) -> Result<Directory> {
        replay(path.as_ref())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn directory(&self) -> &Directory {
        &self.directory
    }

    pub fn snapshot(&self) -> Snapshot {
        self.directory.snapshot()
    }

    /// Validates, durably appends, then applies `event`.
    pub fn append(&mut self, event: DirectoryEvent) -> Result<()> {
        self.directory.check(&event)?;
        let token = match &event {
            DirectoryEvent::Issued { token, .. } => *token,
            DirectoryEvent::Revoked { identity, .. } => self.directory.lookup(identity)?.token,
        };
        let line = format_line(&event, &token);
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.directory.apply(event)
    }
}

impl RegistrationDirectory for DirectoryStore {
    fn lookup(&self, identity: &[u8]) -> Result<RegistrationRecord> {
        self.directory.lookup(identity)
    }

    fn contains(&self, identity: &[u8]) -> bool {
        self.directory.contains(identity)
    }

    fn record(&mut self, event: DirectoryEvent) -> Result<()> {
        self.append(event)
    }
}

fn checksum(prefix: &str) -> String {
    hex::encode(&Sha256::digest(prefix.as_bytes())[..8])
}

/// Serializes one event as a complete log line, newline included.
pub fn format_line(event: &DirectoryEvent, token: &GroupElement) -> String {
    let (kind, identity, status, reason, at) = match event {
        DirectoryEvent::Issued { identity, at, .. } => ("ISSUE", identity, "active", None, at),
        DirectoryEvent::Revoked {
            identity,
            reason,
            at,
        } => ("REVOKE", identity, "revoked", Some(reason), at),
    };
    let reason = reason.map_or_else(|| "-".to_owned(), hex::encode);
    let prefix = format!(
        "{LOG_VERSION:02x} {kind} {}:{} {} {status} {reason} {} ",
        identity.len(),
        hex::encode(identity),
        hex::encode(token.to_bytes()),
        at.0,
    );
    let sum = checksum(&prefix);
    format!("{prefix}{sum}\n")
}

/// Parses one log line (without its newline) into an event and the token it
/// carries.
pub fn parse_line(line: &str) -> std::result::Result<(DirectoryEvent, GroupElement), String> {
    let (prefix, sum) = line
        .rsplit_once(' ')
        .ok_or_else(|| "missing checksum".to_owned())?;
    let prefix = &line[..prefix.len() + 1];
    if checksum(prefix) != sum {
        return Err("checksum mismatch".into());
    }
    let fields: Vec<&str> = prefix.trim_end().split(' ').collect();
    let [version, kind, identity, token, status, reason, at] = fields[..] else {
        return Err(format!("expected 8 fields, found {}", fields.len() + 1));
    };
    if version != format!("{LOG_VERSION:02x}") {
        return Err(format!("unsupported version {version}"));
    }
    let (len, id_hex) = identity
        .split_once(':')
        .ok_or_else(|| "identity field lacks length".to_owned())?;
    let identity = hex::decode(id_hex).map_err(|e| format!("identity: {e}"))?;
    if len.parse::<usize>().ok() != Some(identity.len()) {
        return Err("identity length mismatch".into());
    }
    let token = hex::decode(token)
        .map_err(|e| e.to_string())
        .and_then(|b| GroupElement::from_bytes(&b).map_err(|e| e.to_string()))
        .map_err(|e| format!("token: {e}"))?;
    let at = Timestamp(at.parse().map_err(|_| "bad timestamp".to_owned())?);
    let event = match (kind, status) {
        ("ISSUE", "active") if reason == "-" => DirectoryEvent::Issued {
            identity,
            token,
            at,
        },
        ("REVOKE", "revoked") => DirectoryEvent::Revoked {
            identity,
            reason: hex::decode(reason).map_err(|e| format!("reason: {e}"))?,
            at,
        },
        _ => return Err(format!("inconsistent event {kind}/{status}")),
    };
    Ok((event, token))
}

fn replay(path: &Path) -> Result<Directory> {
    let reader = BufReader::new(File::open(path)?);
    let mut directory = Directory::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let corrupt = |reason: String| Error::CorruptLog {
            line: line_no,
            reason,
        };
        let line = line.map_err(|e| corrupt(e.to_string()))?;
        let (event, token) = parse_line(&line).map_err(corrupt)?;
        if let DirectoryEvent::Revoked { identity, .. } = &event {
            let known = directory.lookup(identity).map_err(|e| corrupt(e.to_string()))?;
            if known.token != token {
                return Err(corrupt("revocation token differs from issued token".into()));
            }
        }
        directory.apply(event).map_err(|e| corrupt(e.to_string()))?;
    }
    Ok(directory)
}
