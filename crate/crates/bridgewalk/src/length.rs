//! Step-length functions: symmetric, positive, with a positive infimum.

use crate::exact::{Rat};
use crate::group::{canonical_key, Group, GroupElement};
use crate::weight::WeightFunction;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LengthError {
    #[error("explicit length value for {0} must be positive")]
    NonPositiveValue(String),
    #[error("explicit length is not symmetric at {0}")]
    Asymmetric(String),
}

/// Fallback rule for elements outside an explicit length table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthDefault {
    Constant {
        #[serde(with = "crate::exact::rat_string")]
        value: Rat,
    },
    /// Sum of absolute coordinates (word length for free groups).
    L1Norm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LengthSpec {
    /// Every step has length 1: graph distance on the step graph.
    ConstantOne,
    /// `len(g) = 1/phi(g)` on the support of the configured weight.
    InverseWeight,
    Explicit {
        entries: Vec<(String, String)>,
        default: LengthDefault,
    },
}

/// A length function resolved against a weight function (needed for the
/// inverse-weight rule).
#[derive(Clone, Debug)]
pub struct LengthFunction {
    group: Group,
    repr: LengthRepr,
}

#[derive(Clone, Debug)]
enum LengthRepr {
    ConstantOne,
    InverseWeight(WeightFunction),
    Explicit {
        entries: Vec<(GroupElement, Rat)>,
        index: HashMap<GroupElement, usize>,
        default: LengthDefault,
    },
}

impl LengthFunction {
    pub fn constant_one(group: &Group) -> Self {
        LengthFunction {
            group: group.clone(),
            repr: LengthRepr::ConstantOne,
        }
    }

    pub fn inverse_weight(weight: &WeightFunction) -> Self {
        LengthFunction {
            group: weight.group().clone(),
            repr: LengthRepr::InverseWeight(weight.clone()),
        }
    }

    pub fn explicit(
        group: &Group,
        entries: Vec<(GroupElement, Rat)>,
        default: LengthDefault,
    ) -> Result<Self, LengthError> {
        if let LengthDefault::Constant { value } = &default {
            if !value.is_positive() {
                return Err(LengthError::NonPositiveValue("<default>".into()));
            }
        }
        let mut map: HashMap<GroupElement, Rat> = HashMap::new();
        for (g, v) in entries {
            if !v.is_positive() {
                return Err(LengthError::NonPositiveValue(g.to_string()));
            }
            if let Some(prev) = map.get(&g) {
                if *prev != v {
                    return Err(LengthError::Asymmetric(g.to_string()));
                }
            }
            map.insert(g, v);
        }
        let snapshot: Vec<(GroupElement, Rat)> =
            map.iter().map(|(g, v)| (g.clone(), v.clone())).collect();
        for (g, v) in &snapshot {
            let inv = group.inverse(g);
            match map.get(&inv) {
                Some(w) if w == v => {}
                Some(_) => return Err(LengthError::Asymmetric(g.to_string())),
                None => {
                    map.insert(inv, v.clone());
                }
            }
        }
        let mut entries: Vec<(GroupElement, Rat)> = map.into_iter().collect();
        entries.sort_by(|a, b| canonical_key(&a.0).cmp(&canonical_key(&b.0)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (g, _))| (g.clone(), i))
            .collect();
        Ok(LengthFunction {
            group: group.clone(),
            repr: LengthRepr::Explicit {
                entries,
                index,
                default,
            },
        })
    }

    /// The bare spec kind, used when deciding closed-form strategies.
    pub fn is_constant_one(&self) -> bool {
        matches!(self.repr, LengthRepr::ConstantOne)
    }

    pub fn is_inverse_weight(&self) -> bool {
        matches!(self.repr, LengthRepr::InverseWeight(_))
    }

    pub fn has_l1_default(&self) -> bool {
        matches!(
            &self.repr,
            LengthRepr::Explicit {
                default: LengthDefault::L1Norm,
                ..
            }
        )
    }

    pub fn explicit_entries(&self) -> Option<&[(GroupElement, Rat)]> {
        match &self.repr {
            LengthRepr::Explicit { entries, .. } => Some(entries),
            _ => None,
        }
    }

    /// `len(g)`. `None` means "undefined / infinite": the inverse-weight rule
    /// off the support of its weight.
    pub fn value_opt(&self, g: &GroupElement) -> Option<Rat> {
        match &self.repr {
            LengthRepr::ConstantOne => Some(Rat::one()),
            LengthRepr::InverseWeight(w) => {
                let v = w.value(g);
                if v.is_positive() {
                    Some(v.recip())
                } else {
                    None
                }
            }
            LengthRepr::Explicit {
                entries,
                index,
                default,
            } => {
                if let Some(&i) = index.get(g) {
                    return Some(entries[i].1.clone());
                }
                match default {
                    LengthDefault::Constant { value } => Some(value.clone()),
                    LengthDefault::L1Norm => {
                        let norm = l1_norm(g);
                        if norm.is_zero() {
                            None
                        } else {
                            Some(norm)
                        }
                    }
                }
            }
        }
    }

    /// `len(g)` where the caller guarantees `g` is a positive-weight step.
    pub fn value(&self, g: &GroupElement) -> Rat {
        self.value_opt(g)
            .expect("length undefined for this element")
    }

    /// Positive infimum of the length over nonidentity elements
    /// (restricted to the support for the inverse-weight rule).
    pub fn len_min(&self) -> Rat {
        match &self.repr {
            LengthRepr::ConstantOne => Rat::one(),
            LengthRepr::InverseWeight(w) => w.max_value().recip(),
            LengthRepr::Explicit {
                entries, default, ..
            } => {
                let table_min = entries.iter().map(|(_, v)| v.clone()).min();
                let default_min = match default {
                    LengthDefault::Constant { value } => value.clone(),
                    LengthDefault::L1Norm => Rat::one(),
                };
                match table_min {
                    Some(t) => t.min(default_min),
                    None => default_min,
                }
            }
        }
    }

    /// Supremum of the length over a finite weight support, if available.
    pub fn len_max_on_support(&self, weight: &WeightFunction) -> Option<Rat> {
        let support = weight.finite_support()?;
        support.iter().map(|(g, _)| self.value(g)).max()
    }

    /// Total length of a step sequence.
    pub fn walk_length(&self, steps: &[GroupElement]) -> Rat {
        steps.iter().map(|s| self.value(s)).sum()
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// Canonical JSON description, used in digests and reports.
    pub fn describe(&self) -> serde_json::Value {
        match &self.repr {
            LengthRepr::ConstantOne => serde_json::json!({"kind": "constant_one"}),
            LengthRepr::InverseWeight(w) => serde_json::json!({
                "kind": "inverse_weight",
                "of": w.describe(),
            }),
            LengthRepr::Explicit {
                entries, default, ..
            } => serde_json::json!({
                "kind": "explicit",
                "entries": entries
                    .iter()
                    .map(|(g, v)| vec![g.to_string(), crate::exact::format_rat(v)])
                    .collect::<Vec<_>>(),
                "default": default,
            }),
        }
    }
}

/// Distance between weighted-length configurations: the sum of the two
/// relative-difference suprema
/// `sup |phi - psi| / (phi + psi) + sup |len1 - len2| / (len1 + len2)`
/// over the union of the supports. Values lie in `[0, 2]`. Where one side's
/// length is undefined (inverse-weight rule off its support) the length
/// ratio is taken at its limiting value 1.
pub fn pair_distance(
    phi: &WeightFunction,
    len1: &LengthFunction,
    psi: &WeightFunction,
    len2: &LengthFunction,
) -> Result<Rat, crate::weight::WeightError> {
    use crate::weight::WeightError;
    let a = phi
        .finite_support()
        .ok_or(WeightError::UnboundedComparison)?;
    let b = psi
        .finite_support()
        .ok_or(WeightError::UnboundedComparison)?;
    let mut union: Vec<&GroupElement> = a.iter().map(|(g, _)| g).collect();
    for (g, _) in b {
        if !union.contains(&g) {
            union.push(g);
        }
    }
    let mut weight_sup = Rat::zero();
    let mut len_sup = Rat::zero();
    for g in union {
        let p = phi.value(g);
        let q = psi.value(g);
        let ratio = (&p - &q).abs() / (&p + &q);
        weight_sup = weight_sup.max(ratio);
        let lr = match (len1.value_opt(g), len2.value_opt(g)) {
            (Some(l1), Some(l2)) => (&l1 - &l2).abs() / (&l1 + &l2),
            _ => Rat::one(),
        };
        len_sup = len_sup.max(lr);
    }
    Ok(weight_sup + len_sup)
}

fn l1_norm(g: &GroupElement) -> Rat {
    match g {
        GroupElement::Vector(v) => Rat::from_integer(
            v.iter().map(|x| x.unsigned_abs() as i64).sum::<i64>().into(),
        ),
        GroupElement::Word(w) => Rat::from_integer((w.len() as i64).into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};
    use crate::weight::WeightFunction;

    #[test]
    fn constant_one_lengths() {
        let g = Group::free_abelian(2);
        let l = LengthFunction::constant_one(&g);
        assert_eq!(l.value(&GroupElement::Vector(vec![0, 5])), rat_int(1));
        assert_eq!(l.len_min(), rat_int(1));
        let steps = vec![GroupElement::Vector(vec![1, 0]); 5];
        assert_eq!(l.walk_length(&steps), rat_int(5));
    }

    #[test]
    fn l1_default_measures_jump_size() {
        let g = Group::free_abelian(1);
        let l = LengthFunction::explicit(&g, vec![], LengthDefault::L1Norm).unwrap();
        assert_eq!(l.value(&GroupElement::Vector(vec![3])), rat_int(3));
        // Walk 0 -> 3 -> 1 has steps +3, -2 and length 5.
        let steps = vec![
            GroupElement::Vector(vec![3]),
            GroupElement::Vector(vec![-2]),
        ];
        assert_eq!(l.walk_length(&steps), rat_int(5));
        assert_eq!(l.len_min(), rat_int(1));
        assert_eq!(l.value_opt(&g.identity()), None);
    }

    #[test]
    fn inverse_weight_lengths() {
        let g = Group::free_abelian(1);
        let w =
            WeightFunction::explicit(&g, vec![(GroupElement::Vector(vec![1]), rat(1, 2))], true)
                .unwrap();
        let l = LengthFunction::inverse_weight(&w);
        assert_eq!(l.value(&GroupElement::Vector(vec![1])), rat_int(2));
        assert_eq!(l.len_min(), rat_int(2));
        assert_eq!(l.value_opt(&GroupElement::Vector(vec![5])), None);
        // Three nearest-neighbour steps have total length 6.
        let steps = vec![GroupElement::Vector(vec![1]); 3];
        assert_eq!(l.walk_length(&steps), rat_int(6));
    }

    #[test]
    fn pair_distance_examples() {
        let g = Group::free_abelian(1);
        let mk = |v: Rat| {
            WeightFunction::explicit(&g, vec![(GroupElement::Vector(vec![1]), v)], true).unwrap()
        };
        let l1 = LengthFunction::constant_one(&g);

        // Identical pairs are at distance 0.
        let w = mk(rat(1, 2));
        assert_eq!(pair_distance(&w, &l1, &w, &l1).unwrap(), rat_int(0));

        // psi = 2 phi on a common support: |phi - 2 phi| / (3 phi) = 1/3.
        let w2 = mk(rat_int(1));
        assert_eq!(pair_distance(&w, &l1, &w2, &l1).unwrap(), rat(1, 3));

        // Same weights, len2 = 3 len1: ratio 2/4 = 1/2.
        let l3 = LengthFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat_int(3))],
            LengthDefault::Constant { value: rat_int(3) },
        )
        .unwrap();
        assert_eq!(pair_distance(&w, &l1, &w, &l3).unwrap(), rat(1, 2));

        // The nearest-neighbour pair used by the continuity experiments.
        let p = mk(rat(1, 2));
        let q = mk(rat(3, 4));
        assert_eq!(pair_distance(&p, &l1, &q, &l1).unwrap(), rat(1, 5));
    }

    #[test]
    fn explicit_lengths_symmetrize() {
        let g = Group::free_abelian(1);
        let l = LengthFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![2]), rat(3, 2))],
            LengthDefault::Constant { value: rat_int(1) },
        )
        .unwrap();
        assert_eq!(l.value(&GroupElement::Vector(vec![-2])), rat(3, 2));
        assert_eq!(l.value(&GroupElement::Vector(vec![7])), rat_int(1));
        assert_eq!(l.len_min(), rat_int(1));
    }
}
