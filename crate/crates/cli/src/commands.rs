use std::fmt;
use std::path::{Path, PathBuf};

use psig::directory::{DirectoryStore, RegistrationDirectory, RegistrationRecord};
use psig::pkg::{self, BindingRequest, ConfirmationDesk, ConfirmationToken, MasterKey, PartialKeyMessage};
use psig::protocol::{self, Delegation, ProxyKey, ProxySignature, RevokeRequest, Warrant};
use psig::signer::{self, BindingFactors, SignerKey};
use psig::threats::{self, Scenario};
use psig::{keystore, Error, SystemParams, Timestamp};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{Cli, Command, PkgCommand, SignerCommand, ThreatsCommand, WarrantCommand};
use crate::home::Home;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Serialize)]
pub struct Outcome {
    pub ok: bool,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    pub detail: serde_json::Map<String, serde_json::Value>,
}

impl Outcome {
    fn ok(message: impl Into<String>) -> Self {
        Outcome {
            ok: true,
            message: message.into(),
            files: Vec::new(),
            detail: serde_json::Map::new(),
        }
    }

    fn file(mut self, path: &Path) -> Self {
        self.files.push(path.display().to_string());
        self
    }

    fn with(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.detail.insert(key.to_owned(), value.into());
        self
    }

    pub fn failed(err: &CliError) -> Self {
        Outcome {
            ok: false,
            message: err.to_string(),
            files: Vec::new(),
            detail: serde_json::Map::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }
}

struct Ctx {
    home: Home,
    params_path: PathBuf,
    directory_path: PathBuf,
    passphrase: Option<String>,
    now: Timestamp,
    rng: ChaCha20Rng,
}

fn failure(what: impl fmt::Display, e: impl fmt::Display) -> CliError {
    CliError::Failure(format!("{what}: {e}"))
}

impl Ctx {
    fn read(&self, path: &Path) -> CliResult<Vec<u8>> {
        std::fs::read(path).map_err(|e| failure(format!("reading {}", path.display()), e))
    }

    fn write(&self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| failure(format!("creating {}", parent.display()), e))?;
        }
        std::fs::write(path, bytes).map_err(|e| failure(format!("writing {}", path.display()), e))
    }

    fn passphrase(&self) -> CliResult<&[u8]> {
        self.passphrase
            .as_deref()
            .map(str::as_bytes)
            .ok_or_else(|| CliError::Usage("a passphrase is required (--passphrase or PSIG_PASSPHRASE)".into()))
    }

    fn seal(&mut self, path: &Path, plaintext: &[u8]) -> CliResult<()> {
        let passphrase = self.passphrase()?.to_vec();
        let sealed = keystore::seal(&passphrase, plaintext, &mut self.rng)?;
        self.write(path, &sealed)
    }

    fn unseal(&self, path: &Path) -> CliResult<Vec<u8>> {
        let sealed = self.read(path)?;
        keystore::open(self.passphrase()?, &sealed).map_err(|e| failure(path.display(), e))
    }

    fn params(&self) -> CliResult<SystemParams> {
        let bytes = self.read(&self.params_path)?;
        pkg::decode_params(&bytes).map_err(|e| failure(self.params_path.display(), e))
    }

    fn signer_key(&self, identity: &[u8]) -> CliResult<SignerKey> {
        let path = self.home.signer_key(identity);
        if !path.exists() {
            return Err(CliError::Usage(format!(
                "no signer key for {:?} in {}",
                String::from_utf8_lossy(identity),
                self.home.root().display()
            )));
        }
        Ok(SignerKey::from_secret_bytes(&self.unseal(&path)?)?)
    }

    fn directory_readonly(&self) -> CliResult<psig::directory::Directory> {
        DirectoryStore::load(&self.directory_path).map_err(|e| failure(self.directory_path.display(), e))
    }

    fn lookup(&self, identity: &[u8]) -> CliResult<RegistrationRecord> {
        Ok(self.directory_readonly()?.lookup(identity)?)
    }

    fn emit(&self, explicit: Option<PathBuf>, default_name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = explicit.unwrap_or_else(|| self.home.outbox(default_name));
        self.write(&path, bytes)?;
        Ok(path)
    }
}

fn seeded_rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => {
            let mut hasher = Sha256::new();
            hasher.update(seed.to_be_bytes());
            for arg in std::env::args().skip(1) {
                hasher.update(arg.as_bytes());
                hasher.update([0]);
            }
            ChaCha20Rng::from_seed(hasher.finalize().into())
        }
        None => ChaCha20Rng::from_entropy(),
    }
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    let g = cli.global;
    if psig::pairing::check_suite(&g.suite).is_err() {
        return Err(CliError::Usage(format!(
            "suite mismatch: {:?} is not supported (expected {:?})",
            g.suite,
            psig::pairing::SUITE_ID
        )));
    }
    let home = Home::new(g.home);
    let mut ctx = Ctx {
        params_path: g.params.unwrap_or_else(|| home.params()),
        directory_path: g.directory.unwrap_or_else(|| home.directory()),
        home,
        passphrase: g.passphrase,
        now: g.now.map(Timestamp).unwrap_or_else(Timestamp::now),
        rng: seeded_rng(g.seed),
    };
    match cli.command {
        Command::Pkg(cmd) => pkg_command(&mut ctx, cmd),
        Command::Signer(cmd) => signer_command(&mut ctx, cmd),
        Command::Warrant(WarrantCommand::New {
            original,
            proxy,
            prefix,
            valid_from,
            valid_until,
            emit,
        }) => {
            let warrant = Warrant::new(original, proxy, prefix, valid_from, valid_until)?;
            let path = ctx.emit(emit, "warrant.psig", &warrant.to_bytes())?;
            Ok(Outcome::ok(format!("warrant written to {}", path.display())).file(&path))
        }
        Command::Delegate { warrant_file, emit } => {
            let warrant = Warrant::from_bytes(&ctx.read(&warrant_file)?)?;
            let key = ctx.signer_key(&warrant.original_identity)?;
            let delegation = protocol::create_delegation(&key, &warrant, &warrant.proxy_public_key())?;
            let path = ctx.emit(emit, "delegation.psig", &delegation.to_bytes())?;
            Ok(Outcome::ok(format!("delegation written to {}", path.display())).file(&path))
        }
        Command::AcceptDelegation { delegation_file } => {
            let delegation = Delegation::from_bytes(&ctx.read(&delegation_file)?)?;
            let params = ctx.params()?;
            let key = ctx.signer_key(&delegation.warrant.proxy_identity)?;
            let reg_o = ctx.lookup(&delegation.warrant.original_identity)?;
            let proxy_key = protocol::derive_proxy_key(&delegation, &key, &reg_o, &params)?;
            let path = ctx.home.proxy_key(&delegation.warrant.to_bytes());
            ctx.seal(&path, &proxy_key.to_secret_bytes())?;
            Ok(Outcome::ok("delegation accepted; proxy key stored").file(&path))
        }
        Command::ProxySign {
            message_file,
            warrant,
            emit,
        } => {
            let message = ctx.read(&message_file)?;
            let key_path = select_proxy_key(&ctx, warrant.as_deref())?;
            let key = ProxyKey::from_secret_bytes(&ctx.unseal(&key_path)?)?;
            let sig = protocol::proxy_sign(&key, &message, ctx.now, &mut ctx.rng)?;
            let path = ctx.emit(emit, "signature.psig", &sig.to_bytes())?;
            Ok(Outcome::ok(format!("signature written to {}", path.display())).file(&path))
        }
        Command::Verify {
            signature_file,
            policy,
        } => {
            let bytes = ctx.read(&signature_file)?;
            let sig = ProxySignature::from_bytes(&bytes)
                .map_err(|e| CliError::Failure(format!("verification failed: {e}")))?;
            let params = ctx.params()?;
            let directory = ctx.directory_readonly()?;
            let reg_o = directory.lookup(&sig.warrant.original_identity)?;
            let reg_p = directory.lookup(&sig.warrant.proxy_identity)?;
            match protocol::verify_proxy_signature(&sig, &reg_o, &reg_p, &params, policy, ctx.now) {
                Ok(true) => Ok(Outcome::ok("verification succeeded")
                    .with("original", String::from_utf8_lossy(&sig.warrant.original_identity))
                    .with("proxy", String::from_utf8_lossy(&sig.warrant.proxy_identity))),
                Ok(false) => Err(CliError::Failure("verification failed".into())),
                Err(e) => Err(CliError::Failure(format!("verification failed: {e}"))),
            }
        }
        Command::Revoke {
            warrant_file,
            reason,
            emit,
        } => {
            let warrant = Warrant::from_bytes(&ctx.read(&warrant_file)?)?;
            let key = ctx.signer_key(&warrant.original_identity)?;
            let req = protocol::create_revoke_request(&key, &warrant, reason.as_bytes())?;
            let path = ctx.emit(emit, "revoke-request.psig", &req.to_bytes())?;
            Ok(Outcome::ok(format!("revoke request written to {}", path.display())).file(&path))
        }
        Command::Threats(ThreatsCommand::Run { scenario, trials }) => {
            let scenarios = match scenario {
                Some(name) => vec![name.parse::<Scenario>().map_err(CliError::Usage)?],
                None => Scenario::ALL.to_vec(),
            };
            let seed = g.seed.unwrap_or(0);
            let mut lines = Vec::new();
            let mut all_passed = true;
            for sc in scenarios {
                let report = threats::run_scenario(sc, trials.unwrap_or_else(|| sc.default_trials()), seed);
                all_passed &= report.passed();
                lines.push(report.to_string());
            }
            let text = lines.join("\n");
            if all_passed {
                Ok(Outcome::ok(text))
            } else {
                println!("{text}");
                Err(CliError::Failure("threat scenario failures".into()))
            }
        }
    }
}

fn select_proxy_key(ctx: &Ctx, warrant: Option<&Path>) -> CliResult<PathBuf> {
    if let Some(path) = warrant {
        let warrant = Warrant::from_bytes(&ctx.read(path)?)?;
        let key = ctx.home.proxy_key(&warrant.to_bytes());
        if !key.exists() {
            return Err(CliError::Usage("no proxy key for that warrant; run accept-delegation first".into()));
        }
        return Ok(key);
    }
    let keys_dir = ctx.home.keys();
    let mut found: Vec<PathBuf> = std::fs::read_dir(&keys_dir)
        .map(|entries| {
            entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("proxy-") && n.ends_with(".key"))
                })
                .collect()
        })
        .unwrap_or_default();
    match found.len() {
        1 => Ok(found.remove(0)),
        0 => Err(CliError::Usage("no proxy key held; run accept-delegation first".into())),
        _ => Err(CliError::Usage("several proxy keys held; pick one with --warrant".into())),
    }
}

fn pkg_command(ctx: &mut Ctx, cmd: PkgCommand) -> CliResult<Outcome> {
    match cmd {
        PkgCommand::Setup => {
            if ctx.home.master_key().exists() {
                return Err(CliError::Usage(format!(
                    "{} already holds a master key",
                    ctx.home.root().display()
                )));
            }
            let (params, master) = pkg::setup(psig::pairing::SUITE_ID, &mut ctx.rng)?;
            ctx.passphrase()?;
            ctx.seal(&ctx.home.master_key(), &master.to_secret_bytes())?;
            ctx.write(&ctx.params_path, &pkg::encode_params(&params))?;
            ctx.write(&ctx.home.confirmations(), &ConfirmationDesk::default().to_bytes())?;
            DirectoryStore::open(&ctx.directory_path)?;
            Ok(Outcome::ok(format!("PKG initialised; parameters in {}", ctx.params_path.display()))
                .file(&ctx.params_path)
                .with("pkg_public_key", hex::encode(params.pkg_public_key.to_bytes())))
        }
        PkgCommand::Confirm { identity, emit } => {
            let desk_path = ctx.home.confirmations();
            let mut desk = ConfirmationDesk::from_bytes(&ctx.read(&desk_path)?)?;
            let token = desk.begin_confirmation(identity.as_bytes(), ctx.now, &mut ctx.rng)?;
            ctx.write(&desk_path, &desk.to_bytes())?;
            let name = format!("confirm-{}.psig", hex::encode(identity.as_bytes()));
            let path = ctx.emit(emit, &name, &token.to_bytes())?;
            Ok(Outcome::ok(format!(
                "confirmation token for {identity}: {} (expires {})",
                hex::encode(token.nonce),
                token.expiry.0
            ))
            .file(&path)
            .with("nonce", hex::encode(token.nonce)))
        }
        PkgCommand::Issue { binding_file, emit } => {
            let request = BindingRequest::from_bytes(&ctx.read(&binding_file)?)?;
            let master = MasterKey::from_secret_bytes(&ctx.unseal(&ctx.home.master_key())?)?;
            let desk_path = ctx.home.confirmations();
            let mut desk = ConfirmationDesk::from_bytes(&ctx.read(&desk_path)?)?;
            let mut store = DirectoryStore::open(&ctx.directory_path)?;
            let (partial, record) = pkg::issue_partial_key(&request, &master, &mut desk, &mut store, ctx.now)?;
            ctx.write(&desk_path, &desk.to_bytes())?;
            let name = format!("partial-{}.psig", hex::encode(&partial.identity));
            let path = ctx.emit(emit, &name, &partial.to_bytes())?;
            Ok(Outcome::ok(format!(
                "partial key issued for {}; written to {}",
                String::from_utf8_lossy(&record.identity),
                path.display()
            ))
            .file(&path)
            .with("registration_token", hex::encode(record.token.to_bytes())))
        }
        PkgCommand::Lookup { identity } => {
            let record = ctx.lookup(identity.as_bytes())?;
            let mut outcome = Outcome::ok(format!("{identity}: {}", record.status.as_str()))
                .with("status", record.status.as_str())
                .with("token", hex::encode(record.token.to_bytes()));
            if let Some(reason) = &record.revoked_reason {
                outcome = outcome.with("reason", String::from_utf8_lossy(reason));
            }
            Ok(outcome)
        }
        PkgCommand::Revoke { request_file } => {
            let req = RevokeRequest::from_bytes(&ctx.read(&request_file)?)?;
            let mut store = DirectoryStore::open(&ctx.directory_path)?;
            let outcome = pkg::process_revoke_request(&req, &mut store, ctx.now)?;
            Ok(Outcome::ok(format!(
                "revoked {} and {}",
                String::from_utf8_lossy(&outcome.original.identity),
                String::from_utf8_lossy(&outcome.proxy.identity)
            )))
        }
    }
}

fn signer_command(ctx: &mut Ctx, cmd: SignerCommand) -> CliResult<Outcome> {
    match cmd {
        SignerCommand::Request {
            identity,
            token,
            nonce,
            emit,
        } => {
            let nonce = match (token, nonce) {
                (Some(path), _) => {
                    let token = ConfirmationToken::from_bytes(&ctx.read(&path)?)?;
                    if token.identity != identity.as_bytes() {
                        return Err(CliError::Failure("confirmation token names another identity".into()));
                    }
                    token.nonce
                }
                (None, Some(hex_nonce)) => hex::decode(&hex_nonce)
                    .ok()
                    .and_then(|b| <[u8; 32]>::try_from(b).ok())
                    .ok_or_else(|| CliError::Usage("--nonce must be 64 hex digits".into()))?,
                (None, None) => return Err(CliError::Usage("pass --token or --nonce".into())),
            };
            ctx.passphrase()?;
            let (factors, params) = signer::make_binding_parameters(identity.as_bytes(), &mut ctx.rng)?;
            let factors_path = ctx.home.factors(identity.as_bytes());
            ctx.seal(&factors_path, &factors.to_secret_bytes())?;
            let request = BindingRequest {
                params,
                confirmation_nonce: nonce,
            };
            let name = format!("binding-{}.psig", hex::encode(identity.as_bytes()));
            let path = ctx.emit(emit, &name, &request.to_bytes())?;
            Ok(Outcome::ok(format!("binding parameters written to {}", path.display()))
                .file(&path)
                .file(&factors_path))
        }
        SignerCommand::Finalize {
            identity,
            partial_key_file,
        } => {
            let params = ctx.params()?;
            let partial = PartialKeyMessage::from_bytes(&ctx.read(&partial_key_file)?)?;
            if partial.identity != identity.as_bytes() {
                return Err(CliError::Failure("partial key was issued for another identity".into()));
            }
            let factors_path = ctx.home.factors(identity.as_bytes());
            let factors = BindingFactors::from_secret_bytes(&ctx.unseal(&factors_path)?)?;
            let key = signer::finalize(&partial.d, factors, &params)?;
            let key_path = ctx.home.signer_key(identity.as_bytes());
            ctx.seal(&key_path, &key.to_secret_bytes())?;
            std::fs::remove_file(&factors_path).map_err(|e| failure(factors_path.display(), e))?;
            Ok(Outcome::ok(format!("private key for {identity} stored")).file(&key_path))
        }
    }
}
