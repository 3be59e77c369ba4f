//! Passphrase-encrypted container for role-local secrets.
//!
//! Layout: `"PSIGKEY1" || salt (16) || nonce (12) || ChaCha20-Poly1305 ciphertext`.
//! The key is Argon2id(passphrase, salt) with the crate's default cost.

use argon2::Argon2;
use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PSIGKEY1";
const SALT_LEN: usize = 16;
const NONCE_LEN: usize = 12;

fn derive_key(passphrase: &[u8], salt: &[u8]) -> Result<Key> {
    let mut key = Key::default();
    Argon2::default()
        .hash_password_into(passphrase, salt, &mut key)
        .map_err(|_| Error::KeyStore("key derivation failed"))?;
    Ok(key)
}

pub fn seal<R: RngCore + CryptoRng>(passphrase: &[u8], plaintext: &[u8], rng: &mut R) -> Result<Vec<u8>> {
    let mut salt = [0u8; SALT_LEN];
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut salt);
    rng.fill_bytes(&mut nonce);
    let cipher = ChaCha20Poly1305::new(&derive_key(passphrase, &salt)?);
    let ciphertext = cipher
        .encrypt(Nonce::from_slice(&nonce), plaintext)
        .map_err(|_| Error::KeyStore("encryption failed"))?;
    let mut out = Vec::with_capacity(MAGIC.len() + SALT_LEN + NONCE_LEN + ciphertext.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&salt);
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&ciphertext);
    Ok(out)
}

pub fn open(passphrase: &[u8], container: &[u8]) -> Result<Vec<u8>> {
    let header = MAGIC.len() + SALT_LEN + NONCE_LEN;
    if container.len() < header || &container[..MAGIC.len()] != MAGIC {
        return Err(Error::KeyStore("not a key store container"));
    }
    let salt = &container[MAGIC.len()..MAGIC.len() + SALT_LEN];
    let nonce = &container[MAGIC.len() + SALT_LEN..header];
    let cipher = ChaCha20Poly1305::new(&derive_key(passphrase, salt)?);
    cipher
        .decrypt(Nonce::from_slice(nonce), &container[header..])
        .map_err(|_| Error::KeyStore("wrong passphrase or corrupted container"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn round_trip_and_wrong_passphrase() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let sealed = seal(b"hunter2", b"secret scalar", &mut rng).unwrap();
        assert_eq!(open(b"hunter2", &sealed).unwrap(), b"secret scalar");
        assert!(open(b"hunter3", &sealed).is_err());
        assert!(!sealed.windows(13).any(|w| w == b"secret scalar"));
    }
}
