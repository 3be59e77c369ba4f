//! Role home layout.
//!
//! ```text
//! <home>/params.psig          public parameters (PKG writes, everyone reads)
//! <home>/directory.log        registration log (PKG only)
//! <home>/master.key           sealed master key (PKG only)
//! <home>/confirmations.psig   outstanding confirmation tokens (PKG only)
//! <home>/keys/<id-hex>.factors  sealed binding factors awaiting finalize
//! <home>/keys/<id-hex>.key      sealed signer key
//! <home>/keys/proxy-<digest>.key sealed proxy key, one per warrant
//! <home>/outbox/              emitted message files
//! ```

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub struct Home {
    root: PathBuf,
}

impl Home {
    pub fn new(root: PathBuf) -> Self {
        Home { root }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn params(&self) -> PathBuf {
        self.root.join("params.psig")
    }

    pub fn directory(&self) -> PathBuf {
        self.root.join("directory.log")
    }

    pub fn master_key(&self) -> PathBuf {
        self.root.join("master.key")
    }

    pub fn confirmations(&self) -> PathBuf {
        self.root.join("confirmations.psig")
    }

    pub fn keys(&self) -> PathBuf {
        self.root.join("keys")
    }

    pub fn factors(&self, identity: &[u8]) -> PathBuf {
        self.keys().join(format!("{}.factors", hex::encode(identity)))
    }

    pub fn signer_key(&self, identity: &[u8]) -> PathBuf {
        self.keys().join(format!("{}.key", hex::encode(identity)))
    }

    pub fn proxy_key(&self, warrant_bytes: &[u8]) -> PathBuf {
        let digest = Sha256::digest(warrant_bytes);
        self.keys().join(format!("proxy-{}.key", hex::encode(&digest[..8])))
    }

    pub fn outbox(&self, name: &str) -> PathBuf {
        self.root.join("outbox").join(name)
    }
}
