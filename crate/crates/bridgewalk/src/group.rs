//! Exact arithmetic and canonical hashing for the built-in groups.
//!
//! Three families are supported: free abelian groups `Z^d`, the discrete
//! Heisenberg group, and free groups `F_k`. Elements are kept in a unique
//! canonical form so that equality is structural and the byte key of an
//! element is injective. Integer-valued homomorphisms are used downstream
//! to build height functions.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Which group a configuration lives on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    /// `Z^rank` under addition.
    FreeAbelian { rank: usize },
    /// Integer triples `(a, b, c)` with `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b')`.
    Heisenberg3,
    /// Free group on `rank` generators, elements as freely reduced words.
    FreeGroup { rank: usize },
}

/// Maximum letters in a free-group word before arithmetic refuses to grow it.
pub const DEFAULT_WORD_CAP: usize = 1 << 16;

/// A concrete group: spec plus resource limits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub spec: GroupSpec,
    #[serde(default = "default_word_cap")]
    pub word_cap: usize,
}

fn default_word_cap() -> usize {
    DEFAULT_WORD_CAP
}

/// Canonical element payload.
///
/// `Vector` is used by both `FreeAbelian` (any rank) and `Heisenberg3`
/// (rank 3); the group law comes from the owning [`Group`]. `Word` holds a
/// freely reduced word: letter `+k` is generator `k` (1-based), `-k` its
/// inverse, and no two adjacent letters cancel.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Vector(Vec<i64>),
    Word(Vec<i32>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("invalid homomorphism: {0}")]
    InvalidHomomorphism(String),
    #[error("element does not belong to this group: {0}")]
    WrongKind(String),
    #[error("cannot parse element {0:?}: {1}")]
    ElementParse(String, String),
}

fn checked_add(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("group element coordinate overflow")
}

fn checked_mul(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("group element coordinate overflow")
}

impl Group {
    pub fn new(spec: GroupSpec) -> Self {
        Group {
            spec,
            word_cap: DEFAULT_WORD_CAP,
        }
    }

    pub fn free_abelian(rank: usize) -> Self {
        assert!(rank >= 1, "free abelian rank must be at least 1");
        Group::new(GroupSpec::FreeAbelian { rank })
    }

    pub fn heisenberg() -> Self {
        Group::new(GroupSpec::Heisenberg3)
    }

    pub fn free_group(rank: usize) -> Self {
        assert!(rank >= 1, "free group rank must be at least 1");
        Group::new(GroupSpec::FreeGroup { rank })
    }

    /// The canonical identity payload.
    pub fn identity(&self) -> GroupElement {
        match self.spec {
            GroupSpec::FreeAbelian { rank } => GroupElement::Vector(vec![0; rank]),
            GroupSpec::Heisenberg3 => GroupElement::Vector(vec![0; 3]),
            GroupSpec::FreeGroup { .. } => GroupElement::Word(Vec::new()),
        }
    }

    fn expect_vector<'a>(&self, a: &'a GroupElement, rank: usize) -> &'a [i64] {
        match a {
            GroupElement::Vector(v) if v.len() == rank => v,
            other => panic!("element {other:?} does not match group {:?}", self.spec),
        }
    }

    /// Canonical product `a * b`.
    pub fn multiply(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        match self.spec {
            GroupSpec::FreeAbelian { rank } => {
                let (x, y) = (self.expect_vector(a, rank), self.expect_vector(b, rank));
                GroupElement::Vector(
                    x.iter()
                        .zip(y.iter())
                        .map(|(&p, &q)| checked_add(p, q))
                        .collect(),
                )
            }
            GroupSpec::Heisenberg3 => {
                let (x, y) = (self.expect_vector(a, 3), self.expect_vector(b, 3));
                let c = checked_add(checked_add(x[2], y[2]), checked_mul(x[0], y[1]));
                GroupElement::Vector(vec![checked_add(x[0], y[0]), checked_add(x[1], y[1]), c])
            }
            GroupSpec::FreeGroup { .. } => {
                let (GroupElement::Word(u), GroupElement::Word(v)) = (a, b) else {
                    panic!("free group elements must be words");
                };
                let mut out: Vec<i32> = u.clone();
                for &letter in v {
                    if out.last().is_some_and(|&last| last == -letter) {
                        out.pop();
                    } else {
                        out.push(letter);
                    }
                }
                assert!(
                    out.len() <= self.word_cap,
                    "free group word exceeds configured cap of {} letters",
                    self.word_cap
                );
                GroupElement::Word(out)
            }
        }
    }

    /// Canonical inverse: `multiply(a, inverse(a)) == identity()`.
    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        match self.spec {
            GroupSpec::FreeAbelian { rank } => {
                let x = self.expect_vector(a, rank);
                GroupElement::Vector(x.iter().map(|&p| p.checked_neg().expect("overflow")).collect())
            }
            GroupSpec::Heisenberg3 => {
                let x = self.expect_vector(a, 3);
                // (a,b,c)^-1 = (-a, -b, -c + a b)
                let c = checked_add(x[2].checked_neg().expect("overflow"), checked_mul(x[0], x[1]));
                GroupElement::Vector(vec![
                    x[0].checked_neg().expect("overflow"),
                    x[1].checked_neg().expect("overflow"),
                    c,
                ])
            }
            GroupSpec::FreeGroup { .. } => {
                let GroupElement::Word(u) = a else {
                    panic!("free group elements must be words");
                };
                GroupElement::Word(u.iter().rev().map(|&l| -l).collect())
            }
        }
    }

    /// A standard finite generating set.
    ///
    /// For `Heisenberg3` the two generators `x = (1,0,0)` and `y = (0,1,0)`
    /// suffice since `z` is their commutator.
    pub fn generators(&self) -> Vec<GroupElement> {
        match self.spec {
            GroupSpec::FreeAbelian { rank } => (0..rank)
                .map(|i| {
                    let mut v = vec![0; rank];
                    v[i] = 1;
                    GroupElement::Vector(v)
                })
                .collect(),
            GroupSpec::Heisenberg3 => vec![
                GroupElement::Vector(vec![1, 0, 0]),
                GroupElement::Vector(vec![0, 1, 0]),
            ],
            GroupSpec::FreeGroup { rank } => {
                (1..=rank as i32).map(|i| GroupElement::Word(vec![i])).collect()
            }
        }
    }

    pub fn is_identity(&self, a: &GroupElement) -> bool {
        *a == self.identity()
    }

    /// Step from `u` to `v`, i.e. `u^{-1} v`.
    pub fn step(&self, u: &GroupElement, v: &GroupElement) -> GroupElement {
        self.multiply(&self.inverse(u), v)
    }
}

/// Injective, stable byte key of a canonical element.
///
/// Layout: one kind tag (`0x01` vector, `0x02` word), a big-endian `u32`
/// length, then each entry big-endian with the sign bit flipped so that the
/// byte order of same-shape keys agrees with numeric lexicographic order.
/// The identity of `Z^2` is exactly
/// `01 00000002 8000000000000000 8000000000000000`.
pub fn canonical_key(a: &GroupElement) -> Vec<u8> {
    match a {
        GroupElement::Vector(v) => {
            let mut out = Vec::with_capacity(5 + 8 * v.len());
            out.push(0x01);
            out.extend_from_slice(&(v.len() as u32).to_be_bytes());
            for &x in v {
                out.extend_from_slice(&((x as u64) ^ (1 << 63)).to_be_bytes());
            }
            out
        }
        GroupElement::Word(w) => {
            let mut out = Vec::with_capacity(5 + 4 * w.len());
            out.push(0x02);
            out.extend_from_slice(&(w.len() as u32).to_be_bytes());
            for &l in w {
                out.extend_from_slice(&((l as u32) ^ (1 << 31)).to_be_bytes());
            }
            out
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Vector(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Word(w) => {
                if w.is_empty() {
                    return write!(f, "1");
                }
                for &l in w {
                    let idx = (l.unsigned_abs() - 1) as u8;
                    let ch = (b'a' + idx) as char;
                    if l > 0 {
                        write!(f, "{ch}")?;
                    } else {
                        write!(f, "{}", ch.to_ascii_uppercase())?;
                    }
                }
                Ok(())
            }
        }
    }
}

impl Group {
    /// Parse an element from its textual form.
    ///
    /// Vectors: `(1,0)`, `(0,-2,3)`. Generator shorthand: `e1`, `-e2`,
    /// `e1^3`, `e2^-2` (and `x`, `y`, `z` for `Heisenberg3`). Free-group
    /// words: lowercase letter = generator, uppercase = inverse (`aB`
    /// is `a b^{-1}`), `1` is the identity.
    pub fn parse_element(&self, text: &str) -> Result<GroupElement, GroupError> {
        let s = text.trim();
        let err = |m: &str| GroupError::ElementParse(text.to_string(), m.to_string());
        match self.spec {
            GroupSpec::FreeAbelian { rank } => {
                if s.starts_with('(') {
                    parse_tuple(s, rank).map(GroupElement::Vector).map_err(|m| err(&m))
                } else {
                    let (idx, pow) = parse_generator_power(s, rank).map_err(|m| err(&m))?;
                    let mut v = vec![0; rank];
                    v[idx] = pow;
                    Ok(GroupElement::Vector(v))
                }
            }
            GroupSpec::Heisenberg3 => {
                if s.starts_with('(') {
                    return parse_tuple(s, 3).map(GroupElement::Vector).map_err(|m| err(&m));
                }
                let (name, pow) = split_power(s).map_err(|m| err(&m))?;
                let axis = match name.trim_start_matches('-') {
                    "x" => 0,
                    "y" => 1,
                    "z" => 2,
                    _ => return Err(err("expected x, y, z or a tuple")),
                };
                let sign = if name.starts_with('-') { -1 } else { 1 };
                let mut v = vec![0i64; 3];
                v[axis] = sign * pow;
                Ok(GroupElement::Vector(v))
            }
            GroupSpec::FreeGroup { rank } => {
                if s == "1" || s.is_empty() {
                    return Ok(self.identity());
                }
                let mut word = self.identity();
                for ch in s.chars() {
                    let letter = if ch.is_ascii_lowercase() {
                        (ch as u8 - b'a') as i32 + 1
                    } else if ch.is_ascii_uppercase() {
                        -((ch as u8 - b'A') as i32 + 1)
                    } else {
                        return Err(err("free group words use letters a-z / A-Z"));
                    };
                    if letter.unsigned_abs() as usize > rank {
                        return Err(err("letter outside the generator range"));
                    }
                    word = self.multiply(&word, &GroupElement::Word(vec![letter]));
                }
                Ok(word)
            }
        }
    }
}

fn parse_tuple(s: &str, rank: usize) -> Result<Vec<i64>, String> {
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or("expected (a,b,...)")?;
    let coords: Result<Vec<i64>, _> = inner
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| e.to_string()))
        .collect();
    let coords = coords?;
    if coords.len() != rank {
        return Err(format!("expected {rank} coordinates, got {}", coords.len()));
    }
    Ok(coords)
}

fn split_power(s: &str) -> Result<(&str, i64), String> {
    match s.split_once('^') {
        Some((name, p)) => Ok((name, p.parse::<i64>().map_err(|e| e.to_string())?)),
        None => Ok((s, 1)),
    }
}

fn parse_generator_power(s: &str, rank: usize) -> Result<(usize, i64), String> {
    let (name, pow) = split_power(s)?;
    let (sign, body) = match name.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, name),
    };
    let idx: usize = body
        .strip_prefix('e')
        .ok_or("expected e<i> shorthand or a tuple")?
        .parse()
        .map_err(|e: std::num::ParseIntError| e.to_string())?;
    if idx == 0 || idx > rank {
        return Err(format!("generator index out of range 1..={rank}"));
    }
    Ok((idx - 1, sign * pow))
}

/// Integer-valued homomorphism, given by integer coefficients.
///
/// `FreeAbelian`: the dot product with the coordinate vector.
/// `Heisenberg3`: coefficients act on `(a, b)`; a nonzero coefficient on the
/// `c` coordinate is rejected since `c` is not additive under the group law.
/// `FreeGroup`: one coefficient per generator, evaluated on exponent sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomomorphismSpec {
    pub coefficients: Vec<i64>,
}

impl HomomorphismSpec {
    pub fn new(coefficients: Vec<i64>) -> Self {
        HomomorphismSpec { coefficients }
    }

    /// Check the spec against the group's relations and nontriviality.
    pub fn validate(&self, group: &Group) -> Result<(), GroupError> {
        let expected = match group.spec {
            GroupSpec::FreeAbelian { rank } => rank,
            GroupSpec::Heisenberg3 => {
                if self.coefficients.len() == 3 && self.coefficients[2] != 0 {
                    return Err(GroupError::InvalidHomomorphism(
                        "the c-coordinate coefficient must be 0 (c is not additive)".into(),
                    ));
                }
                if self.coefficients.len() == 2 {
                    2
                } else {
                    3
                }
            }
            GroupSpec::FreeGroup { rank } => rank,
        };
        if self.coefficients.len() != expected {
            return Err(GroupError::InvalidHomomorphism(format!(
                "expected {expected} coefficients, got {}",
                self.coefficients.len()
            )));
        }
        if self.coefficients.iter().all(|&c| c == 0) {
            return Err(GroupError::InvalidHomomorphism(
                "all coefficients are zero; image must be a nontrivial subgroup of Z".into(),
            ));
        }
        Ok(())
    }

    /// Evaluate the homomorphism. Additive: `F(ab) = F(a) + F(b)`, `F(id) = 0`.
    pub fn evaluate(&self, group: &Group, a: &GroupElement) -> i64 {
        match group.spec {
            GroupSpec::FreeAbelian { .. } | GroupSpec::Heisenberg3 => {
                let GroupElement::Vector(v) = a else {
                    panic!("vector element expected");
                };
                self.coefficients
                    .iter()
                    .zip(v.iter())
                    .fold(0i64, |acc, (&c, &x)| checked_add(acc, checked_mul(c, x)))
            }
            GroupSpec::FreeGroup { .. } => {
                let GroupElement::Word(w) = a else {
                    panic!("word element expected");
                };
                w.iter().fold(0i64, |acc, &l| {
                    let c = self.coefficients[(l.unsigned_abs() - 1) as usize];
                    checked_add(acc, if l > 0 { c } else { -c })
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small deterministic generator for randomized law checks.
    pub(crate) struct XorShift(u64);

    impl XorShift {
        pub(crate) fn new(seed: u64) -> Self {
            XorShift(seed.max(1))
        }
        pub(crate) fn next(&mut self) -> u64 {
            let mut x = self.0;
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            self.0 = x;
            x
        }
        pub(crate) fn int(&mut self, lo: i64, hi: i64) -> i64 {
            lo + (self.next() % ((hi - lo + 1) as u64)) as i64
        }
    }

    fn random_element_in(group: &Group, rng: &mut XorShift, bound: i64) -> GroupElement {
        match group.spec {
            GroupSpec::FreeAbelian { rank } => {
                GroupElement::Vector((0..rank).map(|_| rng.int(-bound, bound)).collect())
            }
            GroupSpec::Heisenberg3 => {
                GroupElement::Vector((0..3).map(|_| rng.int(-bound, bound)).collect())
            }
            GroupSpec::FreeGroup { rank } => {
                let len = rng.int(0, 12) as usize;
                let mut w = group.identity();
                for _ in 0..len {
                    let gen = rng.int(1, rank as i64) as i32;
                    let letter = if rng.next() & 1 == 0 { gen } else { -gen };
                    w = group.multiply(&w, &GroupElement::Word(vec![letter]));
                }
                w
            }
        }
    }

    fn random_element(group: &Group, rng: &mut XorShift) -> GroupElement {
        random_element_in(group, rng, 50)
    }

    fn groups() -> Vec<Group> {
        vec![Group::free_abelian(2), Group::heisenberg(), Group::free_group(2)]
    }

    #[test]
    fn identities() {
        assert_eq!(
            Group::free_abelian(2).identity(),
            GroupElement::Vector(vec![0, 0])
        );
        assert_eq!(
            Group::heisenberg().identity(),
            GroupElement::Vector(vec![0, 0, 0])
        );
        assert_eq!(Group::free_group(2).identity(), GroupElement::Word(vec![]));
    }

    #[test]
    fn multiplication_examples() {
        let z2 = Group::free_abelian(2);
        assert_eq!(
            z2.multiply(
                &GroupElement::Vector(vec![1, 0]),
                &GroupElement::Vector(vec![0, 1])
            ),
            GroupElement::Vector(vec![1, 1])
        );

        let h = Group::heisenberg();
        assert_eq!(
            h.multiply(
                &GroupElement::Vector(vec![1, 0, 0]),
                &GroupElement::Vector(vec![0, 1, 0])
            ),
            GroupElement::Vector(vec![1, 1, 1])
        );

        let f2 = Group::free_group(2);
        let ab = f2.parse_element("ab").unwrap();
        let b_inv_a = f2.parse_element("Ba").unwrap();
        assert_eq!(f2.multiply(&ab, &b_inv_a), f2.parse_element("aa").unwrap());
    }

    #[test]
    fn inverse_examples() {
        let z2 = Group::free_abelian(2);
        assert_eq!(
            z2.inverse(&GroupElement::Vector(vec![3, -1])),
            GroupElement::Vector(vec![-3, 1])
        );

        // Verified by multiplication rather than asserting the payload blindly.
        let h = Group::heisenberg();
        let g = GroupElement::Vector(vec![1, 1, 1]);
        let inv = h.inverse(&g);
        assert_eq!(inv, GroupElement::Vector(vec![-1, -1, 0]));
        assert_eq!(h.multiply(&g, &inv), h.identity());

        let f2 = Group::free_group(2);
        let ab = f2.parse_element("ab").unwrap();
        assert_eq!(f2.inverse(&ab), f2.parse_element("BA").unwrap());
    }

    #[test]
    fn group_laws_randomized() {
        for group in groups() {
            let mut rng = XorShift::new(0x9E3779B97F4A7C15);
            for _ in 0..10_000 {
                let a = random_element(&group, &mut rng);
                let b = random_element(&group, &mut rng);
                let c = random_element(&group, &mut rng);
                let ab_c = group.multiply(&group.multiply(&a, &b), &c);
                let a_bc = group.multiply(&a, &group.multiply(&b, &c));
                assert_eq!(ab_c, a_bc, "associativity in {:?}", group.spec);
                assert_eq!(group.multiply(&a, &group.identity()), a);
                assert_eq!(group.multiply(&group.identity(), &a), a);
                assert_eq!(group.multiply(&a, &group.inverse(&a)), group.identity());
            }
        }
    }

    #[test]
    fn free_reduction_is_idempotent() {
        let f2 = Group::free_group(2);
        let mut rng = XorShift::new(77);
        for _ in 0..2000 {
            let w = random_element(&f2, &mut rng);
            // Multiplying a reduced word by the identity must not change it.
            assert_eq!(f2.multiply(&w, &f2.identity()), w);
            let GroupElement::Word(letters) = &w else { unreachable!() };
            for pair in letters.windows(2) {
                assert_ne!(pair[0], -pair[1], "adjacent cancelling letters survive");
            }
        }
    }

    #[test]
    fn canonical_key_is_injective() {
        use std::collections::HashSet;
        for group in groups() {
            let mut rng = XorShift::new(1234);
            let mut elems = HashSet::new();
            // Wide coordinate range so 100k distinct elements exist.
            while elems.len() < 100_000 {
                elems.insert(random_element_in(&group, &mut rng, 1 << 40));
            }
            let keys: HashSet<Vec<u8>> = elems.iter().map(canonical_key).collect();
            assert_eq!(keys.len(), elems.len(), "key collision in {:?}", group.spec);
        }
    }

    #[test]
    fn identity_key_is_documented_bytes() {
        let z2 = Group::free_abelian(2);
        let key = canonical_key(&z2.identity());
        assert_eq!(
            key,
            vec![
                0x01, 0, 0, 0, 2, 0x80, 0, 0, 0, 0, 0, 0, 0, 0x80, 0, 0, 0, 0, 0, 0, 0
            ]
        );
        assert_ne!(
            canonical_key(&GroupElement::Vector(vec![1, 0])),
            canonical_key(&GroupElement::Vector(vec![0, 1]))
        );
    }

    #[test]
    fn homomorphism_examples() {
        let z2 = Group::free_abelian(2);
        let f = HomomorphismSpec::new(vec![1, 0]);
        f.validate(&z2).unwrap();
        assert_eq!(f.evaluate(&z2, &GroupElement::Vector(vec![3, 5])), 3);

        let h = Group::heisenberg();
        let fh = HomomorphismSpec::new(vec![1, 0]);
        fh.validate(&h).unwrap();
        assert_eq!(fh.evaluate(&h, &GroupElement::Vector(vec![2, 7, -4])), 2);

        let f2 = Group::free_group(2);
        let ff = HomomorphismSpec::new(vec![1, -1]);
        ff.validate(&f2).unwrap();
        assert_eq!(ff.evaluate(&f2, &f2.parse_element("ab").unwrap()), 0);
        assert_eq!(ff.evaluate(&f2, &f2.parse_element("aaB").unwrap()), 3);
    }

    #[test]
    fn homomorphism_rejections() {
        let h = Group::heisenberg();
        let bad = HomomorphismSpec::new(vec![1, 0, 2]);
        assert!(matches!(
            bad.validate(&h),
            Err(GroupError::InvalidHomomorphism(_))
        ));
        let zero = HomomorphismSpec::new(vec![0, 0]);
        assert!(zero.validate(&Group::free_abelian(2)).is_err());
    }

    #[test]
    fn homomorphism_additivity_randomized() {
        for group in groups() {
            let spec = match group.spec {
                GroupSpec::FreeAbelian { .. } => HomomorphismSpec::new(vec![2, -3]),
                GroupSpec::Heisenberg3 => HomomorphismSpec::new(vec![1, 4]),
                GroupSpec::FreeGroup { .. } => HomomorphismSpec::new(vec![1, -1]),
            };
            spec.validate(&group).unwrap();
            assert_eq!(spec.evaluate(&group, &group.identity()), 0);
            let mut rng = XorShift::new(99);
            for _ in 0..10_000 {
                let a = random_element(&group, &mut rng);
                let b = random_element(&group, &mut rng);
                let ab = group.multiply(&a, &b);
                assert_eq!(
                    spec.evaluate(&group, &ab),
                    spec.evaluate(&group, &a) + spec.evaluate(&group, &b)
                );
            }
        }
    }

    #[test]
    fn element_display_and_parse_round_trip() {
        let z2 = Group::free_abelian(2);
        for text in ["(1,0)", "(0,-2)"] {
            let e = z2.parse_element(text).unwrap();
            assert_eq!(e.to_string(), text);
        }
        assert_eq!(z2.parse_element("e1^3").unwrap(), GroupElement::Vector(vec![3, 0]));
        assert_eq!(z2.parse_element("-e2").unwrap(), GroupElement::Vector(vec![0, -1]));

        let h = Group::heisenberg();
        assert_eq!(h.parse_element("y^2").unwrap(), GroupElement::Vector(vec![0, 2, 0]));

        let f2 = Group::free_group(2);
        let w = f2.parse_element("aBa").unwrap();
        assert_eq!(w.to_string(), "aBa");
        assert_eq!(f2.parse_element("aA").unwrap(), f2.identity());
    }
}
