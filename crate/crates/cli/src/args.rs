use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use psig::protocol::RevocationPolicy;

#[derive(Debug, Parser)]
#[command(name = "psig", version, about = "Proxy-protected proxy signatures with escrow-free key issuance")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Role home directory holding keys, outbox and (for the PKG) the directory log.
    #[arg(long, global = true, env = "PSIG_HOME", default_value = "psig-home")]
    pub home: PathBuf,
    /// Suite identifier; must match every file touched.
    #[arg(long, global = true, default_value = psig::pairing::SUITE_ID)]
    pub suite: String,
    /// Deterministic randomness (tests only).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write a JSON outcome record to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Passphrase for the role's encrypted key files.
    #[arg(long, global = true, env = "PSIG_PASSPHRASE", hide_env_values = true)]
    pub passphrase: Option<String>,
    /// Override the clock (Unix seconds).
    #[arg(long, global = true)]
    pub now: Option<u64>,
    /// Public parameters file [default: <home>/params.psig].
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Registration directory log [default: <home>/directory.log].
    #[arg(long, global = true)]
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Private Key Generator operations.
    #[command(subcommand)]
    Pkg(PkgCommand),
    /// Signer key lifecycle.
    #[command(subcommand)]
    Signer(SignerCommand),
    /// Warrant files.
    #[command(subcommand)]
    Warrant(WarrantCommand),
    /// Original signer: delegate signing rights under a warrant.
    Delegate {
        warrant_file: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Proxy signer: validate a delegation and derive the proxy key.
    AcceptDelegation { delegation_file: PathBuf },
    /// Proxy signer: sign a message file.
    ProxySign {
        message_file: PathBuf,
        /// Select the proxy key by warrant when several are held.
        #[arg(long)]
        warrant: Option<PathBuf>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Verify a proxy signature against the registration directory.
    Verify {
        signature_file: PathBuf,
        #[arg(long, default_value = "strict", value_parser = parse_policy)]
        policy: RevocationPolicy,
    },
    /// Original signer: build a revoke request for a warrant.
    Revoke {
        warrant_file: PathBuf,
        #[arg(long)]
        reason: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Threat scenarios.
    #[command(subcommand)]
    Threats(ThreatsCommand),
}

fn parse_policy(s: &str) -> Result<RevocationPolicy, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum PkgCommand {
    /// Generate the master key and publish parameters.
    Setup,
    /// Start identity confirmation; prints the token to deliver to the owner.
    Confirm {
        identity: String,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Issue a partial private key for a binding-parameters file.
    Issue {
        binding_file: PathBuf,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Show an identity's registration record.
    Lookup { identity: String },
    /// Process a revoke request.
    Revoke { request_file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum SignerCommand {
    /// Draw binding factors and emit the binding-parameters file.
    Request {
        identity: String,
        /// Confirmation token file received from the PKG.
        #[arg(long, conflicts_with = "nonce")]
        token: Option<PathBuf>,
        /// Confirmation nonce as hex.
        #[arg(long)]
        nonce: Option<String>,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Validate the partial key, unblind it and store the private key.
    Finalize {
        identity: String,
        partial_key_file: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum WarrantCommand {
    /// Write a warrant file.
    New {
        #[arg(long)]
        original: String,
        #[arg(long)]
        proxy: String,
        /// Messages must start with this prefix.
        #[arg(long, default_value = "")]
        prefix: String,
        #[arg(long)]
        valid_from: u64,
        #[arg(long)]
        valid_until: u64,
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ThreatsCommand {
    /// Run one or all scenarios.
    Run {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
}
