#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use psig::pkg::MasterKey;
use psig::signer::{BindingFactors, SignerKey};

pub const PASSPHRASE: &str = "correct horse battery staple";
pub const NOW: &str = "1700000000";

/// Drives the `psig` binary through a full ceremony inside one temp dir,
/// with a separate home per role.
pub struct Ceremony {
    pub root: tempfile::TempDir,
    pub transcript: Vec<u8>,
    pub secrets: Vec<Vec<u8>>,
}

impl Ceremony {
    pub fn new() -> Self {
        Ceremony {
            root: tempfile::tempdir().unwrap(),
            transcript: Vec::new(),
            secrets: Vec::new(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.path().join(name)
    }

    pub fn run(&mut self, home: &str, args: &[&str]) -> Output {
        let out = Command::new(env!("CARGO_BIN_EXE_psig"))
            .current_dir(self.root.path())
            .env_remove("PSIG_HOME")
            .env("PSIG_PASSPHRASE", PASSPHRASE)
            .args(["--home", home, "--now", NOW])
            .args(["--params", "pkg/params.psig", "--directory", "pkg/directory.log"])
            .args(args)
            .output()
            .unwrap();
        self.transcript.extend_from_slice(&out.stdout);
        self.transcript.extend_from_slice(&out.stderr);
        out
    }

    pub fn ok(&mut self, home: &str, args: &[&str]) -> Output {
        let out = self.run(home, args);
        assert!(
            out.status.success(),
            "psig {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        out
    }

    fn unseal(&self, rel: &str) -> Vec<u8> {
        let sealed = std::fs::read(self.path(rel)).unwrap();
        psig::keystore::open(PASSPHRASE.as_bytes(), &sealed).unwrap()
    }

    fn keep_factors(&mut self, home: &str, identity: &str) {
        let rel = format!("{home}/keys/{}.factors", hex::encode(identity));
        let f = BindingFactors::from_secret_bytes(&self.unseal(&rel)).unwrap();
        self.secrets.push(f.expose_a().to_bytes().to_vec());
        self.secrets.push(f.expose_b().to_bytes().to_vec());
    }

    fn keep_signer_key(&mut self, home: &str, identity: &str) {
        let rel = format!("{home}/keys/{}.key", hex::encode(identity));
        let k = SignerKey::from_secret_bytes(&self.unseal(&rel)).unwrap();
        self.secrets.push(k.private_key().g1_bytes().to_vec());
        self.secrets.push(k.private_key().to_bytes());
        self.secrets.push(k.b().to_bytes().to_vec());
    }

    /// setup, confirm, request, issue and finalize for alice and bob, then
    /// warrant, delegate, accept, proxy-sign and verify.
    pub fn full_lifecycle(&mut self) {
        self.ok("pkg", &["--seed", "7", "pkg", "setup"]);
        let master = MasterKey::from_secret_bytes(&self.unseal("pkg/master.key")).unwrap();
        self.secrets.push(master.expose_secret().to_bytes().to_vec());

        for (home, id) in [("alice", "alice@example.com"), ("bob", "bob@example.com")] {
            let token = format!("{home}.token");
            let binding = format!("{home}.binding");
            let partial = format!("{home}.partial");
            self.ok("pkg", &["pkg", "confirm", id, "--emit", &token]);
            self.ok(home, &["signer", "request", id, "--token", &token, "--emit", &binding]);
            self.keep_factors(home, id);
            self.ok("pkg", &["pkg", "issue", &binding, "--emit", &partial]);
            self.ok(home, &["signer", "finalize", id, &partial]);
            self.keep_signer_key(home, id);
        }

        self.ok(
            "alice",
            &[
                "warrant", "new", "--original", "alice@example.com", "--proxy", "bob@example.com",
                "--prefix", "order:", "--valid-from", "1600000000", "--valid-until", "1800000000",
                "--emit", "warrant.psig",
            ],
        );
        self.ok("alice", &["delegate", "warrant.psig", "--emit", "delegation.psig"]);
        self.ok("bob", &["accept-delegation", "delegation.psig"]);
        std::fs::write(self.path("message.txt"), "order: 12 crates of apples").unwrap();
        self.ok("bob", &["proxy-sign", "message.txt", "--emit", "signature.psig"]);
        self.ok("verifier", &["verify", "signature.psig", "--out", "verify.json"]);
    }

    /// Every file under the ceremony root plus everything the binary printed.
    pub fn public_corpus(&self) -> Vec<(PathBuf, Vec<u8>)> {
        let mut files = vec![(PathBuf::from("<stdout/stderr>"), self.transcript.clone())];
        walk(self.root.path(), &mut files);
        files
    }

    /// Returns the files containing any secret, raw or hex encoded.
    pub fn secret_leaks(&self) -> Vec<PathBuf> {
        assert!(!self.secrets.is_empty());
        let mut needles: Vec<Vec<u8>> = Vec::new();
        for s in &self.secrets {
            needles.push(s.clone());
            needles.push(hex::encode(s).into_bytes());
            needles.push(hex::encode_upper(s).into_bytes());
        }
        self.public_corpus()
            .into_iter()
            .filter(|(_, bytes)| needles.iter().any(|n| contains(bytes, n)))
            .map(|(p, _)| p)
            .collect()
    }
}

fn walk(dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(&path, out);
        } else {
            let bytes = std::fs::read(&path).unwrap();
            out.push((path, bytes));
        }
    }
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Shifts the signature's `V` so the file still parses but must not verify.
pub fn tamper_signature(path: &Path) {
    let mut sig = psig::protocol::ProxySignature::from_bytes(&std::fs::read(path).unwrap()).unwrap();
    sig.v += psig::pairing::hash_to_group_h2(b"tamper");
    std::fs::write(path, sig.to_bytes()).unwrap();
}
