//! Proxy-protected proxy signatures over a bilinear pairing.
//!
//! A trusted Private Key Generator (PKG) issues identity keys without ever
//! learning them: a signer submits blinded binding parameters, receives a
//! blinded partial key over a public channel and unblinds it locally. Each
//! registration publishes a token that ties the private key to the public
//! directory, which is also how delegations are revoked.
//!
//! An original signer delegates to a proxy signer with a warrant; the proxy
//! combines the delegation with its own private key, so neither party can
//! produce a proxy signature alone.
//!
//! ```
//! use psig::testbed::Testbed;
//! use psig::protocol::{self, RevocationPolicy, Warrant};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
//! let mut bed = Testbed::new(&mut rng);
//! let alice = bed.register("alice@example.com", &mut rng).unwrap();
//! let bob = bed.register("bob@example.com", &mut rng).unwrap();
//!
//! let warrant = Warrant::new("alice@example.com", "bob@example.com", "invoice:", 0, u64::MAX).unwrap();
//! let delegation = protocol::create_delegation(&alice, &warrant, bob.public_key()).unwrap();
//! let reg_o = bed.lookup("alice@example.com").unwrap();
//! let proxy_key = protocol::derive_proxy_key(&delegation, &bob, &reg_o, &bed.params).unwrap();
//!
//! let sig = protocol::proxy_sign(&proxy_key, b"invoice: 42 EUR", bed.now, &mut rng).unwrap();
//! let reg_p = bed.lookup("bob@example.com").unwrap();
//! let ok = protocol::verify_proxy_signature(
//!     &sig, &reg_o, &reg_p, &bed.params, RevocationPolicy::Strict, bed.now,
//! ).unwrap();
//! assert!(ok);
//! ```

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;

pub mod directory;
pub mod error;
pub mod keystore;
pub mod pairing;
pub mod pkg;
pub mod protocol;
pub mod signer;
pub mod testbed;
pub mod threats;
pub mod wire;

pub use error::{Error, Result};
pub use pairing::{GroupElement, GtElement, Scalar, SystemParams};

/// Unix time in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn now() -> Self {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Timestamp(secs)
    }

    pub fn plus_secs(self, secs: u64) -> Self {
        Timestamp(self.0.saturating_add(secs))
    }
}
