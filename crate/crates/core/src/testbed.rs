//! An in-memory PKG with its directory and confirmation desk, for tests,
//! examples and the threat scenarios.

use rand::{CryptoRng, RngCore};

use crate::directory::{Directory, RegistrationDirectory, RegistrationRecord};
use crate::error::Result;
use crate::pairing::{SystemParams, SUITE_ID};
use crate::pkg::{self, BindingRequest, ConfirmationDesk, MasterKey, PartialKeyMessage};
use crate::signer::{self, BindingFactors, SignerKey};
use crate::Timestamp;

/// Everything one KeyGen run produces, secrets included.
#[derive(Clone, Debug)]
pub struct Issuance {
    pub factors: BindingFactors,
    pub request: BindingRequest,
    pub partial: PartialKeyMessage,
    pub record: RegistrationRecord,
}

#[derive(Clone, Debug)]
pub struct Testbed {
    pub params: SystemParams,
    pub master: MasterKey,
    pub desk: ConfirmationDesk,
    pub directory: Directory,
    pub now: Timestamp,
}

impl Testbed {
    pub fn new<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        let (params, master) = pkg::setup(SUITE_ID, rng).expect("default suite is supported");
        Testbed {
            params,
            master,
            desk: ConfirmationDesk::default(),
            directory: Directory::new(),
            now: Timestamp(1_700_000_000),
        }
    }

    /// Confirmation, binding parameters and issuance for `identity`.
    pub fn request_and_issue<R: RngCore + CryptoRng>(
        &mut self,
        identity: &str,
        rng: &mut R,
    ) -> Result<Issuance> {
        let (factors, params) = signer::make_binding_parameters(identity.as_bytes(), rng)?;
        self.issue_with(factors, params, rng)
    }

    /// Issuance with caller-chosen factors.
    pub fn issue_with<R: RngCore + CryptoRng>(
        &mut self,
        factors: BindingFactors,
        params: crate::pkg::BindingParameters,
        rng: &mut R,
    ) -> Result<Issuance> {
        let token = self
            .desk
            .begin_confirmation(&params.identity, self.now, rng)?;
        let request = BindingRequest {
            params,
            confirmation_nonce: token.nonce,
        };
        let (partial, record) = pkg::issue_partial_key(
            &request,
            &self.master,
            &mut self.desk,
            &mut self.directory,
            self.now,
        )?;
        Ok(Issuance {
            factors,
            request,
            partial,
            record,
        })
    }

    /// Full KeyGen: issue, validate and unblind.
    pub fn register<R: RngCore + CryptoRng>(
        &mut self,
        identity: &str,
        rng: &mut R,
    ) -> Result<SignerKey> {
        let issued = self.request_and_issue(identity, rng)?;
        signer::finalize(&issued.partial.d, issued.factors, &self.params)
    }

    pub fn lookup(&self, identity: &str) -> Result<RegistrationRecord> {
        self.directory.lookup(identity.as_bytes())
    }
}
