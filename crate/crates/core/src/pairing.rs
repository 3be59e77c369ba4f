//! Symmetric-pairing algebra over BLS12-381.
//!
//! The protocol is written for a symmetric pairing `e: G x G -> GT`. BLS12-381
//! offers an asymmetric one, `e: G1 x G2 -> GT`. A [`GroupElement`] always has
//! its G1 image; elements built from the generator by scalar multiplication and
//! addition additionally carry the G2 image with the same discrete logarithm
//! (they are *mirrored*). Hash outputs and anything derived from them exist in
//! G1 only, since no hash-to-curve construction can produce consistent images
//! in both groups without revealing the discrete logarithm.
//!
//! Every pairing the protocol evaluates has at least one mirrored argument, so
//! [`pairing`] takes the G2 image from whichever side has it. By bilinearity the
//! result does not depend on which side that is.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve, HashToField};
use bls12_381::{G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt};
use ff::Field;
use group::Group;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;

use crate::error::{Error, Result};

/// Identifier of the only supported suite. Bound into every hash domain tag.
pub const SUITE_ID: &str = "PSIG-V01-BLS12381-SHA256-SSWU-RO-";

/// Big-endian hex of the prime group order q.
pub const GROUP_ORDER_HEX: &str =
    "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

/// Domain tag suffixes; the full tag is `SUITE_ID || suffix`.
pub const TAG_H1: &str = "PSIG-H1";
pub const TAG_H2: &str = "PSIG-H2";
pub const TAG_SCALAR: &str = "PSIG-h";

pub const SCALAR_LEN: usize = 32;
pub const G1_LEN: usize = 48;
pub const G2_LEN: usize = 96;
/// Encoded length of a G1-only element (tag byte + compressed G1).
pub const PLAIN_ELEMENT_LEN: usize = 1 + G1_LEN;
/// Encoded length of a mirrored element (tag byte + compressed G1 + compressed G2).
pub const MIRRORED_ELEMENT_LEN: usize = 1 + G1_LEN + G2_LEN;

const TAG_PLAIN: u8 = 0x01;
const TAG_MIRRORED: u8 = 0x02;

type Xmd = ExpandMsgXmd<Sha256>;

fn dst(suffix: &str) -> Vec<u8> {
    let mut tag = Vec::with_capacity(SUITE_ID.len() + suffix.len());
    tag.extend_from_slice(SUITE_ID.as_bytes());
    tag.extend_from_slice(suffix.as_bytes());
    tag
}

/// Element of the scalar field Z_q.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar(pub(crate) bls12_381::Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(bls12_381::Scalar::zero())
    }

    pub fn one() -> Self {
        Scalar(bls12_381::Scalar::one())
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(bls12_381::Scalar::from(v))
    }

    /// Uniform scalar in `[1, q-1]`.
    pub fn random_nonzero<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = bls12_381::Scalar::random(&mut *rng);
            if !bool::from(s.is_zero()) {
                return Scalar(s);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn inverse(&self) -> Result<Self> {
        Option::from(self.0.invert())
            .map(Scalar)
            .ok_or(Error::InverseOfZero)
    }

    /// Canonical big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_LEN] {
        let mut out = self.0.to_bytes();
        out.reverse();
        out
    }

    /// Rejects encodings of integers `>= q`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut le: [u8; SCALAR_LEN] = bytes
            .try_into()
            .map_err(|_| Error::MalformedElement("scalar length"))?;
        le.reverse();
        Option::from(bls12_381::Scalar::from_bytes(&le))
            .map(Scalar)
            .ok_or(Error::MalformedElement("non-canonical scalar"))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar(0x{})", hex::encode(self.to_bytes()))
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

/// Element of the protocol group G (order q).
///
/// Equality, hashing and the hash-input encoding only look at the G1 image;
/// a mirrored element's G2 image is fully determined by it.
#[derive(Clone, Copy)]
pub struct GroupElement {
    g1: G1Affine,
    mirror: Option<G2Affine>,
}

impl GroupElement {
    /// The fixed base point P.
    pub fn generator() -> Self {
        GroupElement {
            g1: G1Affine::generator(),
            mirror: Some(G2Affine::generator()),
        }
    }

    pub fn identity() -> Self {
        GroupElement {
            g1: G1Affine::identity(),
            mirror: Some(G2Affine::identity()),
        }
    }

    /// `k * P`, mirrored.
    pub fn from_scalar(k: &Scalar) -> Self {
        Self::generator().mul(k)
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.g1.is_identity())
    }

    /// Whether the element carries a G2 image and can therefore pair with
    /// G1-only elements.
    pub fn is_mirrored(&self) -> bool {
        self.mirror.is_some()
    }

    /// Drops the G2 image. The result pairs only with mirrored elements.
    pub fn without_mirror(&self) -> Self {
        GroupElement {
            g1: self.g1,
            mirror: None,
        }
    }

    pub fn mul(&self, k: &Scalar) -> Self {
        GroupElement {
            g1: G1Affine::from(self.g1 * k.0),
            mirror: self.mirror.map(|g2| G2Affine::from(g2 * k.0)),
        }
    }

    /// Compressed G1 image; the encoding used inside hash inputs.
    pub fn g1_bytes(&self) -> [u8; G1_LEN] {
        self.g1.to_compressed()
    }

    /// Canonical wire encoding: a tag byte, the compressed G1 image and, for
    /// mirrored elements, the compressed G2 image.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(MIRRORED_ELEMENT_LEN);
        match &self.mirror {
            None => {
                out.push(TAG_PLAIN);
                out.extend_from_slice(&self.g1.to_compressed());
            }
            Some(g2) => {
                out.push(TAG_MIRRORED);
                out.extend_from_slice(&self.g1.to_compressed());
                out.extend_from_slice(&g2.to_compressed());
            }
        }
        out
    }

    /// Decodes and validates a wire encoding. Rejects non-canonical field
    /// elements, points outside the order-q subgroup and mirrored encodings
    /// whose two images have different discrete logarithms.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (&tag, rest) = bytes
            .split_first()
            .ok_or(Error::MalformedElement("empty encoding"))?;
        match tag {
            TAG_PLAIN => {
                let g1 = decode_g1(rest)?;
                Ok(GroupElement { g1, mirror: None })
            }
            TAG_MIRRORED => {
                if rest.len() != G1_LEN + G2_LEN {
                    return Err(Error::MalformedElement("mirrored element length"));
                }
                let g1 = decode_g1(&rest[..G1_LEN])?;
                let g2 = decode_g2(&rest[G1_LEN..])?;
                let lhs = bls12_381::pairing(&g1, &G2Affine::generator());
                let rhs = bls12_381::pairing(&G1Affine::generator(), &g2);
                if lhs != rhs {
                    return Err(Error::MalformedElement("inconsistent mirror"));
                }
                Ok(GroupElement {
                    g1,
                    mirror: Some(g2),
                })
            }
            _ => Err(Error::MalformedElement("unknown element tag")),
        }
    }
}

fn decode_g1(bytes: &[u8]) -> Result<G1Affine> {
    let arr: &[u8; G1_LEN] = bytes
        .try_into()
        .map_err(|_| Error::MalformedElement("G1 length"))?;
    Option::from(G1Affine::from_compressed(arr)).ok_or(Error::MalformedElement("invalid G1 point"))
}

fn decode_g2(bytes: &[u8]) -> Result<G2Affine> {
    let arr: &[u8; G2_LEN] = bytes
        .try_into()
        .map_err(|_| Error::MalformedElement("G2 length"))?;
    Option::from(G2Affine::from_compressed(arr)).ok_or(Error::MalformedElement("invalid G2 point"))
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.g1 == other.g1
    }
}

impl Eq for GroupElement {}

impl std::hash::Hash for GroupElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.g1.to_compressed().hash(state)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.is_mirrored() { "mirrored" } else { "g1" };
        write!(f, "GroupElement({kind}, 0x{})", hex::encode(self.g1_bytes()))
    }
}

impl Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        let mirror = match (self.mirror, rhs.mirror) {
            (Some(a), Some(b)) => Some(G2Affine::from(G2Projective::from(a) + b)),
            _ => None,
        };
        GroupElement {
            g1: G1Affine::from(G1Projective::from(self.g1) + rhs.g1),
            mirror,
        }
    }
}

impl AddAssign for GroupElement {
    fn add_assign(&mut self, rhs: GroupElement) {
        *self = *self + rhs;
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement {
            g1: -self.g1,
            mirror: self.mirror.map(|g2| -g2),
        }
    }
}

impl Sub for GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: GroupElement) -> GroupElement {
        self + (-rhs)
    }
}

/// Element of the target group GT (written multiplicatively).
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GtElement(Gt);

impl GtElement {
    pub fn identity() -> Self {
        GtElement(Gt::identity())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn mul(&self, other: &GtElement) -> GtElement {
        GtElement(self.0 + other.0)
    }

    pub fn pow(&self, k: &Scalar) -> GtElement {
        GtElement(self.0 * k.0)
    }

    pub fn inverse(&self) -> GtElement {
        GtElement(-self.0)
    }
}

impl fmt::Debug for GtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GtElement(..)")
    }
}

fn orient<'a>(a: &'a GroupElement, b: &'a GroupElement) -> Result<(&'a G1Affine, &'a G2Affine)> {
    match (&a.mirror, &b.mirror) {
        (_, Some(g2)) => Ok((&a.g1, g2)),
        (Some(g2), None) => Ok((&b.g1, g2)),
        (None, None) => Err(Error::Unpairable),
    }
}

/// `e(a, b)`.
pub fn pairing(a: &GroupElement, b: &GroupElement) -> Result<GtElement> {
    let (p, q) = orient(a, b)?;
    Ok(GtElement(bls12_381::pairing(p, q)))
}

/// Checks `prod e(lhs_i) == prod e(rhs_i)` with a single final exponentiation.
pub fn pairing_equation(
    lhs: &[(GroupElement, GroupElement)],
    rhs: &[(GroupElement, GroupElement)],
) -> Result<bool> {
    let mut g1s = Vec::with_capacity(lhs.len() + rhs.len());
    let mut g2s = Vec::with_capacity(lhs.len() + rhs.len());
    for (a, b) in lhs {
        let (p, q) = orient(a, b)?;
        g1s.push(*p);
        g2s.push(G2Prepared::from(*q));
    }
    for (a, b) in rhs {
        let (p, q) = orient(a, b)?;
        g1s.push(-p);
        g2s.push(G2Prepared::from(*q));
    }
    let terms: Vec<_> = g1s.iter().zip(g2s.iter()).collect();
    let result = bls12_381::multi_miller_loop(&terms).final_exponentiation();
    Ok(bool::from(result.is_identity()))
}

fn length_prefixed(bytes: &[u8], points: &[&GroupElement]) -> Vec<u8> {
    let mut input = Vec::with_capacity(8 + bytes.len() + points.len() * G1_LEN);
    input.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
    input.extend_from_slice(bytes);
    for p in points {
        input.extend_from_slice(&p.g1_bytes());
    }
    input
}

fn hash_g1(input: &[u8], tag: &str) -> GroupElement {
    let point = <G1Projective as HashToCurve<Xmd>>::hash_to_curve(input, &dst(tag));
    GroupElement {
        g1: G1Affine::from(point),
        mirror: None,
    }
}

/// `H1(bytes, A, B)`, hashed over `len(bytes) || bytes || A || B`.
pub fn hash_to_group_h1(bytes: &[u8], pub_a: &GroupElement, pub_b: &GroupElement) -> GroupElement {
    hash_g1(&length_prefixed(bytes, &[pub_a, pub_b]), TAG_H1)
}

/// `H2(identity)`: the public key of `identity`.
pub fn hash_to_group_h2(identity: &[u8]) -> GroupElement {
    hash_g1(identity, TAG_H2)
}

/// `h(message, R, Pub)` into `Z_q^*`. A zero reduction maps to one.
pub fn hash_to_scalar(message: &[u8], r_point: &GroupElement, pub_p: &GroupElement) -> Scalar {
    let input = length_prefixed(message, &[r_point, pub_p]);
    let mut out = [bls12_381::Scalar::zero()];
    bls12_381::Scalar::hash_to_field::<Xmd>(&input, &dst(TAG_SCALAR), &mut out);
    nonzero_or_one(Scalar(out[0]))
}

pub(crate) fn nonzero_or_one(s: Scalar) -> Scalar {
    if s.is_zero() {
        Scalar::one()
    } else {
        s
    }
}

/// Public system parameters published by the PKG.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub generator: GroupElement,
    pub pkg_public_key: GroupElement,
    pub group_order: String,
    pub suite_id: String,
}

impl SystemParams {
    /// Builds parameters for the supported suite around a PKG public key.
    pub fn new(pkg_public_key: GroupElement) -> Result<Self> {
        let params = SystemParams {
            generator: GroupElement::generator(),
            pkg_public_key,
            group_order: GROUP_ORDER_HEX.to_owned(),
            suite_id: SUITE_ID.to_owned(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_suite(&self.suite_id)?;
        if self.generator != GroupElement::generator() {
            return Err(Error::MalformedElement("generator is not the suite base point"));
        }
        if self.group_order != GROUP_ORDER_HEX {
            return Err(Error::MalformedElement("group order mismatch"));
        }
        if self.pkg_public_key.is_identity() {
            return Err(Error::MalformedElement("PKG public key is the identity"));
        }
        if !self.pkg_public_key.is_mirrored() {
            return Err(Error::MalformedElement("PKG public key must be generator-derived"));
        }
        Ok(())
    }
}

pub fn check_suite(suite_id: &str) -> Result<()> {
    if suite_id == SUITE_ID {
        Ok(())
    } else {
        Err(Error::UnsupportedSuite(suite_id.to_owned()))
    }
}
