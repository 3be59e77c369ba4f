//! Executable threat scenarios.
//!
//! Each scenario runs a control arm (honest behavior, must succeed) and a
//! set of fixed adversarial strategies (every attempt must be rejected).
//! These check that the implemented equations reject structurally
//! derivable forgeries; they say nothing about the hardness assumptions the
//! scheme rests on.

use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::directory::{DirectoryEvent, RegistrationDirectory};
use crate::error::Error;
use crate::pairing::{hash_to_scalar, GroupElement, Scalar};
use crate::pkg::{self, BindingRequest};
use crate::protocol::{
    self, Delegation, ProxyKey, ProxySignature, RevocationPolicy, Warrant,
};
use crate::signer::{self, SignerKey};
use crate::testbed::Testbed;

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_INTERCEPTION_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedOutcome {
    AllRejected,
    AllAccepted,
}

impl fmt::Display for ExpectedOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExpectedOutcome::AllRejected => "all-rejected",
            ExpectedOutcome::AllAccepted => "all-accepted",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioReport {
    pub scenario_name: String,
    pub trials: usize,
    /// Adversarial attempts made across all trials.
    pub attempts: usize,
    pub expected_outcome: ExpectedOutcome,
    pub observed_failures: usize,
    pub control_passed: bool,
}

impl ScenarioReport {
    fn new(scenario: Scenario, trials: usize) -> Self {
        ScenarioReport {
            scenario_name: scenario.name().to_owned(),
            trials,
            attempts: 0,
            expected_outcome: ExpectedOutcome::AllRejected,
            observed_failures: 0,
            control_passed: true,
        }
    }

    /// Records one adversarial attempt; `accepted` means the attack worked.
    fn attempt(&mut self, accepted: bool) {
        self.attempts += 1;
        if accepted {
            self.observed_failures += 1;
        }
    }

    fn control(&mut self, ok: bool) {
        self.control_passed &= ok;
    }

    pub fn passed(&self) -> bool {
        self.control_passed && self.observed_failures == 0
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<26} trials={:<4} attempts={:<5} expected={} failures={} control={} {}",
            self.scenario_name,
            self.trials,
            self.attempts,
            self.expected_outcome,
            self.observed_failures,
            if self.control_passed { "ok" } else { "BROKEN" },
            if self.passed() { "PASS" } else { "FAIL" },
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    RegistrationReplacement,
    Interception,
    KeyMutation,
    AdaptiveOracleGame,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::RegistrationReplacement,
        Scenario::Interception,
        Scenario::KeyMutation,
        Scenario::AdaptiveOracleGame,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::RegistrationReplacement => "registration-replacement",
            Scenario::Interception => "interception",
            Scenario::KeyMutation => "key-mutation",
            Scenario::AdaptiveOracleGame => "adaptive-oracle-game",
        }
    }

    pub fn default_trials(&self) -> usize {
        match self {
            Scenario::Interception => DEFAULT_INTERCEPTION_TRIALS,
            _ => DEFAULT_TRIALS,
        }
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!("unknown scenario {s:?} (expected one of {})", names.join(", "))
            })
    }
}

/// Runs one scenario with its own RNG derived from `seed`.
pub fn run_scenario(scenario: Scenario, trials: usize, seed: u64) -> ScenarioReport {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(scenario as u64);
    match scenario {
        Scenario::RegistrationReplacement => run_registration_replacement_scenario(trials, &mut rng),
        Scenario::Interception => run_interception_scenario(trials, &mut rng),
        Scenario::KeyMutation => run_key_mutation_scenario(trials, &mut rng),
        Scenario::AdaptiveOracleGame => run_adaptive_oracle_game(trials, &mut rng),
    }
}

/// Runs every scenario; `trials = None` uses each scenario's default.
pub fn run_all(trials: Option<usize>, seed: u64) -> Vec<ScenarioReport> {
    Scenario::ALL
        .into_iter()
        .map(|sc| run_scenario(sc, trials.unwrap_or_else(|| sc.default_trials()), seed))
        .collect()
}

/// Registration-token replacement: once an identity is in the directory no
/// request, however authorized, can replace its token; unconfirmed requests
/// cannot claim a fresh identity either.
pub fn run_registration_replacement_scenario<R: RngCore + CryptoRng>(
    trials: usize,
    rng: &mut R,
) -> ScenarioReport {
    let mut report = ScenarioReport::new(Scenario::RegistrationReplacement, trials);
    for _ in 0..trials {
        let mut bed = Testbed::new(rng);
        let victim = bed.register("victim@example.com", rng);
        let original = bed.lookup("victim@example.com");
        let control = match (&victim, &original) {
            (Ok(key), Ok(rec)) => key.is_consistent_with(rec),
            _ => false,
        };
        report.control(control);
        let Ok(original) = original else { continue };

        // Re-issue with attacker-chosen parameters and a valid confirmation.
        let (_, attacker_bp) =
            signer::make_binding_parameters(b"victim@example.com", rng).expect("non-empty");
        let token = bed
            .desk
            .begin_confirmation(b"victim@example.com", bed.now, rng)
            .expect("non-empty");
        let reissue = pkg::issue_partial_key(
            &BindingRequest {
                params: attacker_bp,
                confirmation_nonce: token.nonce,
            },
            &bed.master,
            &mut bed.desk,
            &mut bed.directory,
            bed.now,
        );
        report.attempt(!matches!(reissue, Err(Error::IdentityAlreadyRegistered(_))));

        // Raw directory write of a replacement token.
        let overwrite = bed.directory.record(DirectoryEvent::Issued {
            identity: b"victim@example.com".to_vec(),
            token: GroupElement::from_scalar(&Scalar::random_nonzero(rng)),
            at: bed.now,
        });
        report.attempt(overwrite.is_ok());

        // Pre-registering an unconfirmed identity: guessed nonce, then a
        // nonce the attacker legitimately holds for its own identity.
        let (_, bp) = signer::make_binding_parameters(b"newcomer@example.com", rng).expect("non-empty");
        let mut guessed = [0u8; 32];
        rng.fill_bytes(&mut guessed);
        let own = bed
            .desk
            .begin_confirmation(b"attacker@example.com", bed.now, rng)
            .expect("non-empty");
        for nonce in [guessed, own.nonce] {
            let outcome = pkg::issue_partial_key(
                &BindingRequest {
                    params: bp.clone(),
                    confirmation_nonce: nonce,
                },
                &bed.master,
                &mut bed.desk,
                &mut bed.directory,
                bed.now,
            );
            report.attempt(!matches!(outcome, Err(Error::ConfirmationInvalid(_))));
        }

        let after = bed.lookup("victim@example.com");
        report.attempt(after.map(|r| r != original).unwrap_or(true));
        report.attempt(bed.directory.contains(b"newcomer@example.com"));
    }
    report
}

/// Man-in-the-middle: an eavesdropper holding `(X, Y, Z, W, ID, D)` tries to
/// produce a private key consistent with the victim's registration token.
pub fn run_interception_scenario<R: RngCore + CryptoRng>(
    trials: usize,
    rng: &mut R,
) -> ScenarioReport {
    let mut report = ScenarioReport::new(Scenario::Interception, trials);
    let mut bed = Testbed::new(rng);
    let Ok(issued) = bed.request_and_issue("victim@example.com", rng) else {
        report.control(false);
        return report;
    };
    let reg = issued.record.clone();
    let bp = &issued.request.params;
    let d = issued.partial.d;

    let honest = signer::unblind(&d, issued.factors.clone());
    report.control(honest.is_consistent_with(&reg));

    let b_guess = Scalar::random_nonzero(rng);
    let candidate = |s: GroupElement| SignerKey::from_parts(b"victim@example.com", s, b_guess);
    report.attempt(candidate(d).is_consistent_with(&reg));

    for _ in 0..trials {
        let c1 = Scalar::random_nonzero(rng);
        let c2 = Scalar::random_nonzero(rng);
        let c3 = Scalar::random_nonzero(rng);
        let forged = d.mul(&c1) + bp.w.mul(&c2) + bp.y.mul(&c3);
        report.attempt(candidate(forged).is_consistent_with(&reg));
    }
    report
}

struct Delegated {
    bed: Testbed,
    original: SignerKey,
    proxy: SignerKey,
    warrant: Warrant,
    delegation: Delegation,
}

fn delegated_world<R: RngCore + CryptoRng>(rng: &mut R) -> crate::Result<Delegated> {
    let mut bed = Testbed::new(rng);
    let original = bed.register("original@example.com", rng)?;
    let proxy = bed.register("proxy@example.com", rng)?;
    let warrant = Warrant::new(
        "original@example.com",
        "proxy@example.com",
        "order:",
        0,
        u64::MAX,
    )?;
    let delegation = protocol::create_delegation(&original, &warrant, proxy.public_key())?;
    Ok(Delegated {
        bed,
        original,
        proxy,
        warrant,
        delegation,
    })
}

fn sign_and_verify<R: RngCore + CryptoRng>(
    world: &Delegated,
    proxy: &SignerKey,
    message: &[u8],
    rng: &mut R,
) -> bool {
    let (Ok(reg_o), Ok(reg_p)) = (
        world.bed.lookup("original@example.com"),
        world.bed.lookup("proxy@example.com"),
    ) else {
        return false;
    };
    let Ok(key) = protocol::derive_proxy_key(&world.delegation, proxy, &reg_o, &world.bed.params)
    else {
        return false;
    };
    let Ok(sig) = protocol::proxy_sign(&key, message, world.bed.now, rng) else {
        return false;
    };
    matches!(
        protocol::verify_proxy_signature(
            &sig,
            &reg_o,
            &reg_p,
            &world.bed.params,
            RevocationPolicy::Strict,
            world.bed.now
        ),
        Ok(true)
    )
}

/// One partial key, many private keys: signatures made with any mutated
/// private key `S* != S` fail against the unchanged registration token.
pub fn run_key_mutation_scenario<R: RngCore + CryptoRng>(
    trials: usize,
    rng: &mut R,
) -> ScenarioReport {
    let mut report = ScenarioReport::new(Scenario::KeyMutation, trials);
    let world = match delegated_world(rng) {
        Ok(w) => w,
        Err(_) => {
            report.control(false);
            return report;
        }
    };
    report.control(sign_and_verify(&world, &world.proxy, b"order: control", rng));

    let reg_o = world.bed.lookup("original@example.com").ok();
    for _ in 0..trials {
        let delta = Scalar::random_nonzero(rng);
        let shifted = *world.proxy.private_key() + world.proxy.public_key().mul(&delta);
        let mutated = SignerKey::from_parts(world.proxy.identity(), shifted, world.proxy.b());
        report.attempt(sign_and_verify(&world, &mutated, b"order: shifted", rng));

        let c = loop {
            let c = Scalar::random_nonzero(rng);
            if c != Scalar::one() {
                break c;
            }
        };
        let scaled = SignerKey::from_parts(
            world.proxy.identity(),
            world.proxy.private_key().mul(&c),
            world.proxy.b(),
        );
        report.attempt(sign_and_verify(&world, &scaled, b"order: scaled", rng));

        // The original signer mutating its own key breaks the delegation.
        let shifted_o = *world.original.private_key() + world.original.public_key().mul(&delta);
        let mutated_o =
            SignerKey::from_parts(world.original.identity(), shifted_o, world.original.b());
        let accepted = match (
            protocol::create_delegation(&mutated_o, &world.warrant, world.proxy.public_key()),
            &reg_o,
        ) {
            (Ok(d), Some(reg)) => {
                matches!(protocol::validate_delegation(&d, reg, &world.bed.params), Ok(true))
            }
            _ => false,
        };
        report.attempt(accepted);
    }
    report
}

/// The chosen-message game with mechanical adversaries.
///
/// The challenger answers ProxyKeyGen queries for decoy proxies and
/// ProxySignGen queries for the target proxy. Forgeries target the proxy
/// whose key was never handed out, on messages never submitted for signing.
pub fn run_adaptive_oracle_game<R: RngCore + CryptoRng>(
    queries: usize,
    rng: &mut R,
) -> ScenarioReport {
    let mut report = ScenarioReport::new(Scenario::AdaptiveOracleGame, queries);
    let Ok(mut game) = OracleGame::new(rng) else {
        report.control(false);
        return report;
    };

    let mut answers: Vec<ProxySignature> = Vec::new();
    let mut leaked: Vec<ProxyKey> = Vec::new();
    for q in 0..queries {
        let message = format!("msg: query {q}").into_bytes();
        match game.proxy_sign_gen(&message, rng) {
            Ok(sig) => {
                report.control(game.verify(&sig));
                answers.push(sig);
            }
            Err(_) => report.control(false),
        }
        match game.proxy_key_gen(q % game.decoys.len()) {
            Ok(key) => leaked.push(key),
            Err(_) => report.control(false),
        }
    }

    let fresh = |i: usize| format!("msg: forged {i}").into_bytes();
    for (i, sig) in answers.iter().enumerate() {
        let m_star = fresh(i);
        game.assert_fresh(&m_star);

        // Replay with the message swapped.
        let mut replay = sig.clone();
        replay.message = m_star.clone();
        report.attempt(game.verify(&replay));

        let other = &answers[(i + 1) % answers.len()];
        if answers.len() > 1 {
            // R from one answer, V from another.
            let mut splice = sig.clone();
            splice.v = other.v;
            report.attempt(game.verify(&splice));
            let mut splice_star = splice.clone();
            splice_star.message = m_star.clone();
            report.attempt(game.verify(&splice_star));

            // Sum of two answers.
            let mut sum = sig.clone();
            sum.message = m_star.clone();
            sum.r_point = sig.r_point + other.r_point;
            sum.v = sig.v + other.v;
            report.attempt(game.verify(&sum));
        }

        // Re-blind V for M* assuming the adversary could guess r: it can only
        // use public values, so it reuses a from the original answer.
        let a_old = hash_to_scalar(&sig.message, &sig.r_point, &sig.pub_p);
        let a_new = hash_to_scalar(&m_star, &sig.r_point, &sig.pub_p);
        if let Ok(inv) = a_new.inverse() {
            let mut rescaled = sig.clone();
            rescaled.message = m_star.clone();
            rescaled.v = sig.v.mul(&(a_old * inv));
            report.attempt(game.verify(&rescaled));
        }

        // A leaked decoy proxy key relabelled for the target.
        let decoy = &leaked[i % leaked.len()];
        let relabelled = ProxyKey {
            warrant: game.warrant.clone(),
            pub_p: game.target.public_key().to_owned(),
            ..decoy.clone()
        };
        if let Ok(forged) = protocol::proxy_sign(&relabelled, &m_star, game.bed.now, rng) {
            report.attempt(game.verify(&forged));
        }
    }
    report
}

struct OracleGame {
    bed: Testbed,
    original: SignerKey,
    target: SignerKey,
    decoys: Vec<SignerKey>,
    warrant: Warrant,
    target_key: ProxyKey,
    signed: Vec<Vec<u8>>,
}

impl OracleGame {
    fn new<R: RngCore + CryptoRng>(rng: &mut R) -> crate::Result<Self> {
        let mut bed = Testbed::new(rng);
        let original = bed.register("original@example.com", rng)?;
        let target = bed.register("target@example.com", rng)?;
        let decoys = (0..3)
            .map(|i| bed.register(&format!("decoy{i}@example.com"), rng))
            .collect::<crate::Result<Vec<_>>>()?;
        let warrant = Warrant::new("original@example.com", "target@example.com", "msg:", 0, u64::MAX)?;
        let delegation = protocol::create_delegation(&original, &warrant, target.public_key())?;
        let reg_o = bed.lookup("original@example.com")?;
        let target_key = protocol::derive_proxy_key(&delegation, &target, &reg_o, &bed.params)?;
        Ok(OracleGame {
            bed,
            original,
            target,
            decoys,
            warrant,
            target_key,
            signed: Vec::new(),
        })
    }

    fn proxy_key_gen(&self, decoy: usize) -> crate::Result<ProxyKey> {
        let proxy = &self.decoys[decoy];
        let warrant = Warrant::new(
            self.original.identity(),
            proxy.identity(),
            "msg:",
            0,
            u64::MAX,
        )?;
        let delegation = protocol::create_delegation(&self.original, &warrant, proxy.public_key())?;
        let reg_o = self.bed.directory.lookup(self.original.identity())?;
        protocol::derive_proxy_key(&delegation, proxy, &reg_o, &self.bed.params)
    }

    fn proxy_sign_gen<R: RngCore + CryptoRng>(
        &mut self,
        message: &[u8],
        rng: &mut R,
    ) -> crate::Result<ProxySignature> {
        self.signed.push(message.to_vec());
        protocol::proxy_sign(&self.target_key, message, self.bed.now, rng)
    }

    fn assert_fresh(&self, message: &[u8]) {
        debug_assert!(!self.signed.iter().any(|m| m == message));
    }

    fn verify(&self, sig: &ProxySignature) -> bool {
        let lookup = |id: &[u8]| self.bed.directory.lookup(id);
        let (Ok(reg_o), Ok(reg_p)) = (
            lookup(&sig.warrant.original_identity),
            lookup(&sig.warrant.proxy_identity),
        ) else {
            return false;
        };
        matches!(
            protocol::verify_proxy_signature(
                sig,
                &reg_o,
                &reg_p,
                &self.bed.params,
                RevocationPolicy::Strict,
                self.bed.now
            ),
            Ok(true)
        )
    }
}
