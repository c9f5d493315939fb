//! Weight functions on group elements: validation, truncation, total
//! weight, spanning checks and the supremum distance.
//!
//! A weight function is symmetric (`phi(g) = phi(g^{-1})`), vanishes at the
//! identity, and is positive on its support. Two families are built in:
//! explicit finite tables, and power-law families whose summability is
//! decidable in closed form.

use crate::exact::{format_rat, rat_int, rat_pow, rat_to_f64, Rat};
use crate::group::{canonical_key, Group, GroupElement, GroupSpec};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("weight value for {0} must be positive")]
    NonPositiveValue(String),
    #[error("the identity element cannot carry weight")]
    IdentityInSupport,
    #[error("explicit weight is not symmetric at {0}")]
    Asymmetric(String),
    #[error("truncation leaves an empty support")]
    EmptySupport,
    #[error("comparison over an infinite untruncated support")]
    UnboundedComparison,
    #[error("power-law shape not valid here: {0}")]
    InvalidShape(String),
}

/// Support patterns for power-law weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PowerLawShape {
    /// All nonzero multiples of one coordinate generator of `Z^d`:
    /// `phi(n e_axis) = scale / |n|^exponent`.
    SingleAxis { axis: usize },
    /// On `Z^2`: every vertical jump `(0, q)` with `phi = scale / |q|^exponent`,
    /// plus the two unit horizontal steps `(+-1, 0)` with `phi = scale`.
    JumpColumns,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Explicit {
        entries: Vec<(String, String)>,
    },
    PowerLaw {
        #[serde(flatten)]
        shape: PowerLawShape,
        exponent: u32,
        #[serde(with = "crate::exact::rat_string")]
        scale: Rat,
    },
}

/// A validated weight function bound to its group.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    group: Group,
    repr: WeightRepr,
    pub symmetrized: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum WeightRepr {
    Explicit {
        /// Sorted by canonical key for deterministic iteration.
        entries: Vec<(GroupElement, Rat)>,
        index: HashMap<GroupElement, usize>,
    },
    PowerLaw {
        shape: PowerLawShape,
        exponent: u32,
        scale: Rat,
    },
}

/// Summability verdict with whatever bound is available.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Summability {
    Proved { total: TotalWeight },
    Disproved { reason: String },
    Unknown,
}

/// Total weight `w(Gamma) = sum phi(g)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TotalWeight {
    Exact {
        #[serde(with = "crate::exact::rat_string")]
        value: Rat,
        float: f64,
    },
    Bounded {
        value: f64,
        error: f64,
    },
    Infinite,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanWitness {
    pub target: String,
    pub path: Vec<String>,
}

/// Outcome of `validate_weight`.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    pub summable: Summability,
    pub spans: bool,
    pub span_witness: Vec<SpanWitness>,
    pub messages: Vec<String>,
}

impl WeightFunction {
    /// Build an explicit finite weight. With `symmetrize` the inverse of
    /// every listed element is added automatically; otherwise exact symmetry
    /// is required.
    pub fn explicit(
        group: &Group,
        entries: Vec<(GroupElement, Rat)>,
        symmetrize: bool,
    ) -> Result<Self, WeightError> {
        let mut map: HashMap<GroupElement, Rat> = HashMap::new();
        for (g, v) in entries {
            if group.is_identity(&g) {
                return Err(WeightError::IdentityInSupport);
            }
            if !v.is_positive() {
                return Err(WeightError::NonPositiveValue(g.to_string()));
            }
            if let Some(prev) = map.get(&g) {
                if *prev != v {
                    return Err(WeightError::Asymmetric(g.to_string()));
                }
            }
            map.insert(g, v);
        }
        if map.is_empty() {
            return Err(WeightError::EmptySupport);
        }
        let snapshot: Vec<(GroupElement, Rat)> =
            map.iter().map(|(g, v)| (g.clone(), v.clone())).collect();
        for (g, v) in &snapshot {
            let inv = group.inverse(g);
            match map.get(&inv) {
                Some(w) if w == v => {}
                Some(_) => return Err(WeightError::Asymmetric(g.to_string())),
                None if symmetrize => {
                    map.insert(inv, v.clone());
                }
                None => return Err(WeightError::Asymmetric(g.to_string())),
            }
        }
        let mut entries: Vec<(GroupElement, Rat)> = map.into_iter().collect();
        entries.sort_by(|a, b| canonical_key(&a.0).cmp(&canonical_key(&b.0)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (g, _))| (g.clone(), i))
            .collect();
        Ok(WeightFunction {
            group: group.clone(),
            repr: WeightRepr::Explicit { entries, index },
            symmetrized: symmetrize,
        })
    }

    /// Build a power-law weight for one of the documented shapes.
    pub fn power_law(
        group: &Group,
        shape: PowerLawShape,
        exponent: u32,
        scale: Rat,
    ) -> Result<Self, WeightError> {
        if exponent == 0 {
            return Err(WeightError::InvalidShape("exponent must be positive".into()));
        }
        if !scale.is_positive() {
            return Err(WeightError::InvalidShape("scale must be positive".into()));
        }
        match (&group.spec, &shape) {
            (GroupSpec::FreeAbelian { rank }, PowerLawShape::SingleAxis { axis }) => {
                if *axis >= *rank {
                    return Err(WeightError::InvalidShape(format!(
                        "axis {axis} out of range for rank {rank}"
                    )));
                }
            }
            (GroupSpec::FreeAbelian { rank: 2 }, PowerLawShape::JumpColumns) => {}
            _ => {
                return Err(WeightError::InvalidShape(
                    "shape does not match the group".into(),
                ))
            }
        }
        Ok(WeightFunction {
            group: group.clone(),
            repr: WeightRepr::PowerLaw {
                shape,
                exponent,
                scale,
            },
            symmetrized: true,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// `phi(g)`; zero off the support.
    pub fn value(&self, g: &GroupElement) -> Rat {
        match &self.repr {
            WeightRepr::Explicit { entries, index } => index
                .get(g)
                .map(|&i| entries[i].1.clone())
                .unwrap_or_else(Rat::zero),
            WeightRepr::PowerLaw {
                shape,
                exponent,
                scale,
            } => match power_law_param(shape, g) {
                Some(0) => Rat::zero(),
                Some(n) => scale / rat_pow(&rat_int(n as i64), *exponent),
                None => {
                    if matches!(shape, PowerLawShape::JumpColumns) && is_unit_horizontal(g) {
                        scale.clone()
                    } else {
                        Rat::zero()
                    }
                }
            },
        }
    }

    pub fn in_support(&self, g: &GroupElement) -> bool {
        self.value(g).is_positive()
    }

    pub fn has_finite_support(&self) -> bool {
        matches!(self.repr, WeightRepr::Explicit { .. })
    }

    /// Entries of a finite support, sorted by canonical key.
    pub fn finite_support(&self) -> Option<&[(GroupElement, Rat)]> {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => Some(entries),
            WeightRepr::PowerLaw { .. } => None,
        }
    }

    /// Largest weight value attained.
    pub fn max_value(&self) -> Rat {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => entries
                .iter()
                .map(|(_, v)| v.clone())
                .max()
                .expect("nonempty support"),
            WeightRepr::PowerLaw { scale, .. } => scale.clone(),
        }
    }

    /// Smallest positive value; `None` when the support is infinite
    /// (the infimum is then 0 and is not attained).
    pub fn min_value(&self) -> Option<Rat> {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => entries.iter().map(|(_, v)| v.clone()).min(),
            WeightRepr::PowerLaw { .. } => None,
        }
    }

    /// The support elements with `phi >= eta` (when given) and, for
    /// power-law shapes, jump size at most `param_cap` (when given).
    /// Returns `None` when the combined constraints do not certify a
    /// finite set.
    pub fn bounded_support(
        &self,
        eta: Option<&Rat>,
        param_cap: Option<u64>,
    ) -> Option<Vec<(GroupElement, Rat)>> {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => Some(
                entries
                    .iter()
                    .filter(|(_, v)| eta.is_none_or(|e| v >= e))
                    .cloned()
                    .collect(),
            ),
            WeightRepr::PowerLaw {
                shape,
                exponent,
                scale,
            } => {
                let eta_cap = eta.and_then(|e| {
                    if e.is_positive() {
                        // phi(n) >= eta  <=>  n^exponent <= scale/eta
                        Some(floor_root(&(scale / e), *exponent))
                    } else {
                        None
                    }
                });
                let cap = match (eta_cap, param_cap) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => return None,
                };
                let mut out = Vec::new();
                for n in 1..=cap {
                    let v = scale / rat_pow(&rat_int(n as i64), *exponent);
                    if let Some(e) = eta {
                        if &v < e {
                            break;
                        }
                    }
                    for sign in [1i64, -1i64] {
                        out.push((self.axis_element(shape, sign * n as i64), v.clone()));
                    }
                }
                if matches!(shape, PowerLawShape::JumpColumns)
                    && eta.is_none_or(|e| scale >= e)
                {
                    out.push((GroupElement::Vector(vec![1, 0]), scale.clone()));
                    out.push((GroupElement::Vector(vec![-1, 0]), scale.clone()));
                }
                out.sort_by(|a, b| canonical_key(&a.0).cmp(&canonical_key(&b.0)));
                Some(out)
            }
        }
    }

    fn axis_element(&self, shape: &PowerLawShape, n: i64) -> GroupElement {
        let GroupSpec::FreeAbelian { rank } = self.group.spec else {
            unreachable!("power laws live on free abelian groups");
        };
        let axis = match shape {
            PowerLawShape::SingleAxis { axis } => *axis,
            PowerLawShape::JumpColumns => 1,
        };
        let mut v = vec![0i64; rank];
        v[axis] = n;
        GroupElement::Vector(v)
    }

    /// Truncated weight: keep values `>= eta`, zero the rest. The result is
    /// always an explicit finite weight.
    pub fn truncate(&self, eta: &Rat) -> Result<WeightFunction, WeightError> {
        assert!(eta.is_positive(), "truncation level must be positive");
        let entries = self
            .bounded_support(Some(eta), None)
            .expect("eta > 0 certifies a finite truncated support");
        if entries.is_empty() {
            return Err(WeightError::EmptySupport);
        }
        WeightFunction::explicit(&self.group, entries, false)
    }

    /// Summability with the sharpest available total-weight information.
    pub fn summability(&self) -> Summability {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => {
                let total: Rat = entries.iter().map(|(_, v)| v.clone()).sum();
                let float = rat_to_f64(&total);
                Summability::Proved {
                    total: TotalWeight::Exact { value: total, float },
                }
            }
            WeightRepr::PowerLaw {
                shape,
                exponent,
                scale,
            } => {
                if *exponent == 1 {
                    return Summability::Disproved {
                        reason: "harmonic series: partial sums exceed any bound".into(),
                    };
                }
                let scale_f = rat_to_f64(scale);
                // Partial sum plus an integral tail bound N^{1-e}/(e-1).
                let e = *exponent as i32;
                let mut terms = 0.0f64;
                let mut comp = 0.0f64;
                let n_terms: u64 = if *exponent == 2 { 2_100_000 } else { 20_000 };
                for n in 1..=n_terms {
                    let t = (n as f64).powi(-e);
                    let y = t - comp;
                    let s = terms + y;
                    comp = (s - terms) - y;
                    terms = s;
                }
                let tail = (n_terms as f64).powi(1 - e) / f64::from(*exponent - 1);
                let mut value = 2.0 * scale_f * terms;
                let mut error = 2.0 * scale_f * tail + 1e-12 * value;
                if matches!(shape, PowerLawShape::JumpColumns) {
                    value += 2.0 * scale_f;
                    error += 1e-12 * scale_f;
                }
                Summability::Proved {
                    total: TotalWeight::Bounded { value, error },
                }
            }
        }
    }

    /// `w(Gamma)`, exact where possible.
    pub fn total_weight(&self) -> TotalWeight {
        match self.summability() {
            Summability::Proved { total } => total,
            Summability::Disproved { .. } => TotalWeight::Infinite,
            Summability::Unknown => TotalWeight::Infinite,
        }
    }

    /// A rigorous rational upper bound for `w(Gamma)`, when finite.
    /// Exact for explicit weights; for power laws uses
    /// `sum 1/n^e <= 1 + integral_1^infty x^-e dx = 1 + 1/(e-1)`.
    pub fn total_weight_upper(&self) -> Option<Rat> {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => {
                Some(entries.iter().map(|(_, v)| v.clone()).sum())
            }
            WeightRepr::PowerLaw {
                shape,
                exponent,
                scale,
            } => {
                if *exponent == 1 {
                    return None;
                }
                let zeta_ub = Rat::one() + Rat::new(1.into(), (*exponent as i64 - 1).into());
                let mut total = rat_int(2) * scale * zeta_ub;
                if matches!(shape, PowerLawShape::JumpColumns) {
                    total += rat_int(2) * scale;
                }
                Some(total)
            }
        }
    }

    /// Does the support reach every element of `gen_set` by positive-weight
    /// products? BFS limited to `radius` steps over a finite view of the
    /// support (the support itself if finite, else the truncation at `eta`
    /// or, failing that, jumps of size at most 8).
    pub fn spans(
        &self,
        gen_set: &[GroupElement],
        eta: Option<&Rat>,
        radius: usize,
    ) -> (bool, Vec<SpanWitness>, Vec<String>) {
        let mut messages = Vec::new();
        let steps = match self.bounded_support(eta, None) {
            Some(s) => s,
            None => {
                messages
                    .push("infinite support: spanning checked on jumps of size <= 8".to_string());
                self.bounded_support(None, Some(8)).expect("bounded by cap")
            }
        };
        let steps: Vec<GroupElement> = steps.into_iter().map(|(g, _)| g).collect();
        let mut pending: HashSet<GroupElement> = gen_set.iter().cloned().collect();
        pending.remove(&self.group.identity());
        let mut witness = Vec::new();
        let mut seen: HashMap<GroupElement, Vec<GroupElement>> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(self.group.identity(), Vec::new());
        queue.push_back((self.group.identity(), 0usize));
        const NODE_CAP: usize = 200_000;
        while let Some((v, depth)) = queue.pop_front() {
            if pending.is_empty() {
                break;
            }
            if depth >= radius || seen.len() > NODE_CAP {
                continue;
            }
            let path_here = seen.get(&v).cloned().unwrap_or_default();
            for s in &steps {
                let next = self.group.multiply(&v, s);
                if seen.contains_key(&next) {
                    continue;
                }
                let mut path = path_here.clone();
                path.push(s.clone());
                if pending.remove(&next) {
                    witness.push(SpanWitness {
                        target: next.to_string(),
                        path: path.iter().map(|g| g.to_string()).collect(),
                    });
                }
                seen.insert(next.clone(), path);
                queue.push_back((next, depth + 1));
            }
        }
        let ok = pending.is_empty();
        if !ok {
            messages.push(format!(
                "unreached generators: {}",
                pending.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" ")
            ));
        }
        (ok, witness, messages)
    }

    /// Largest level on the grid `max_value * 2^-k`, `k <= 40`, whose
    /// truncation still spans. The true spanning threshold is at least the
    /// returned value.
    pub fn spanning_threshold(&self, gen_set: &[GroupElement], radius: usize) -> Option<Rat> {
        let top = self.max_value();
        let half = Rat::new(1.into(), 2.into());
        let mut eta = top;
        for _ in 0..=40 {
            if let Ok(trunc) = self.truncate(&eta) {
                if trunc.finite_support().map_or(0, |s| s.len()) > 50_000 {
                    return None;
                }
                let (ok, _, _) = trunc.spans(gen_set, None, radius);
                if ok {
                    return Some(eta);
                }
            }
            eta *= &half;
        }
        None
    }

    /// Full validation report for a weight against a trusted generating set.
    pub fn validate(&self, gen_set: &[GroupElement], radius: usize) -> ValidationReport {
        let mut messages = Vec::new();
        // Symmetry is structural for power laws; re-check explicit tables.
        let symmetric = match &self.repr {
            WeightRepr::Explicit { entries, .. } => entries
                .iter()
                .all(|(g, v)| self.value(&self.group.inverse(g)) == *v),
            WeightRepr::PowerLaw { .. } => true,
        };
        if !symmetric {
            messages.push("weight is not symmetric".to_string());
        }
        let summable = self.summability();
        let (spans, span_witness, mut span_messages) = self.spans(gen_set, None, radius);
        messages.append(&mut span_messages);
        ValidationReport {
            symmetric,
            summable,
            spans,
            span_witness,
            messages,
        }
    }

    /// Exponent and scale of a power-law weight.
    pub fn power_law_exponent_scale(&self) -> Option<(u32, &Rat)> {
        match &self.repr {
            WeightRepr::Explicit { .. } => None,
            WeightRepr::PowerLaw {
                exponent, scale, ..
            } => Some((*exponent, scale)),
        }
    }

    /// Canonical JSON description, used in digests and reports.
    pub fn describe(&self) -> serde_json::Value {
        match &self.repr {
            WeightRepr::Explicit { entries, .. } => serde_json::json!({
                "kind": "explicit",
                "symmetrized": self.symmetrized,
                "entries": entries
                    .iter()
                    .map(|(g, v)| vec![g.to_string(), format_rat(v)])
                    .collect::<Vec<_>>(),
            }),
            WeightRepr::PowerLaw {
                shape,
                exponent,
                scale,
            } => serde_json::json!({
                "kind": "power_law",
                "shape": shape,
                "exponent": exponent,
                "scale": format_rat(scale),
            }),
        }
    }

    /// Supremum distance `sup |phi(e) - psi(e)|` over the union of supports.
    pub fn sup_distance(&self, other: &WeightFunction) -> Result<Rat, WeightError> {
        let mine = self
            .finite_support()
            .ok_or(WeightError::UnboundedComparison)?;
        let theirs = other
            .finite_support()
            .ok_or(WeightError::UnboundedComparison)?;
        let mut best = Rat::zero();
        for (g, v) in mine {
            let d = (v - other.value(g)).abs();
            best = best.max(d);
        }
        for (g, v) in theirs {
            let d = (v - self.value(g)).abs();
            best = best.max(d);
        }
        Ok(best)
    }
}

fn is_unit_horizontal(g: &GroupElement) -> bool {
    matches!(g, GroupElement::Vector(v) if v.len() == 2 && v[0].abs() == 1 && v[1] == 0)
}

/// Jump size of a power-law support element: `|n|` for `n e_axis`
/// (or `(0, q)` in the jump-columns shape), `None` otherwise.
fn power_law_param(shape: &PowerLawShape, g: &GroupElement) -> Option<u64> {
    let GroupElement::Vector(v) = g else {
        return None;
    };
    let axis = match shape {
        PowerLawShape::SingleAxis { axis } => *axis,
        PowerLawShape::JumpColumns => 1,
    };
    if axis >= v.len() {
        return None;
    }
    if v.iter().enumerate().all(|(i, &x)| i == axis || x == 0) {
        Some(v[axis].unsigned_abs())
    } else {
        None
    }
}

/// Largest `n >= 0` with `n^e <= x`.
pub fn floor_root(x: &Rat, e: u32) -> u64 {
    if x.is_negative() {
        return 0;
    }
    let mut hi: u64 = 1;
    while rat_pow(&rat_int((hi as i64) * 2), e) <= *x {
        hi *= 2;
        if hi > (1 << 40) {
            break;
        }
    }
    let mut lo = 0u64;
    let mut hi = hi * 2;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if rat_pow(&rat_int(mid as i64), e) <= *x {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Pointwise comparison `nu <= phi` on the union of (finite) supports.
pub fn pointwise_le(nu: &WeightFunction, phi: &WeightFunction) -> Result<bool, WeightError> {
    let support = nu
        .finite_support()
        .ok_or(WeightError::UnboundedComparison)?;
    Ok(support.iter().all(|(g, v)| *v <= phi.value(g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn z1() -> Group {
        Group::free_abelian(1)
    }

    fn z1_nn(half: bool) -> WeightFunction {
        let g = z1();
        let v = if half { rat(1, 2) } else { rat_int(1) };
        WeightFunction::explicit(&g, vec![(GroupElement::Vector(vec![1]), v)], true).unwrap()
    }

    #[test]
    fn explicit_symmetrization_and_validation() {
        let g = z1();
        let w = z1_nn(true);
        assert_eq!(w.value(&GroupElement::Vector(vec![-1])), rat(1, 2));
        assert_eq!(w.value(&GroupElement::Vector(vec![2])), rat_int(0));

        let report = w.validate(&g.generators(), 8);
        assert!(report.symmetric);
        assert!(report.spans);
        match report.summable {
            Summability::Proved {
                total: TotalWeight::Exact { value, .. },
            } => assert_eq!(value, rat_int(1)),
            other => panic!("expected exact total, got {other:?}"),
        }

        let asym = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![1]), rat(1, 2)),
                (GroupElement::Vector(vec![-1]), rat(1, 3)),
            ],
            false,
        );
        assert!(matches!(asym, Err(WeightError::Asymmetric(_))));
    }

    #[test]
    fn harmonic_weight_not_summable() {
        let g = z1();
        let w =
            WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 1, rat_int(1))
                .unwrap();
        assert!(matches!(w.summability(), Summability::Disproved { .. }));
        assert!(matches!(w.total_weight(), TotalWeight::Infinite));
    }

    #[test]
    fn inverse_square_total_weight_near_pi_squared_over_three() {
        let g = z1();
        let w =
            WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 2, rat_int(1))
                .unwrap();
        match w.total_weight() {
            TotalWeight::Bounded { value, error } => {
                let target = std::f64::consts::PI.powi(2) / 3.0;
                assert!(error <= 1e-6, "tail bound too coarse: {error}");
                assert!((value - target).abs() <= error + 1e-9);
            }
            other => panic!("expected bounded total, got {other:?}"),
        }
        // Rigorous rational upper bound: 2 * (1 + 1/(e-1)) = 4 >= pi^2/3.
        assert_eq!(w.total_weight_upper().unwrap(), rat_int(4));
    }

    #[test]
    fn jump_columns_weight_matches_closed_form() {
        let g = Group::free_abelian(2);
        let w = WeightFunction::power_law(&g, PowerLawShape::JumpColumns, 2, rat_int(1)).unwrap();
        assert_eq!(w.value(&GroupElement::Vector(vec![0, 3])), rat(1, 9));
        assert_eq!(w.value(&GroupElement::Vector(vec![1, 0])), rat_int(1));
        assert_eq!(w.value(&GroupElement::Vector(vec![-1, 0])), rat_int(1));
        assert_eq!(w.value(&GroupElement::Vector(vec![2, 0])), rat_int(0));
        assert_eq!(w.value(&GroupElement::Vector(vec![1, 1])), rat_int(0));

        let report = w.validate(&g.generators(), 8);
        assert!(report.symmetric && report.spans);
        assert!(matches!(report.summable, Summability::Proved { .. }));
    }

    #[test]
    fn truncation_examples() {
        let g = z1();
        let w =
            WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 2, rat_int(1))
                .unwrap();
        // eta = 0.2 keeps |n| <= 2.
        let t = w.truncate(&rat(1, 5)).unwrap();
        let support: Vec<String> = t
            .finite_support()
            .unwrap()
            .iter()
            .map(|(g, _)| g.to_string())
            .collect();
        assert_eq!(support, vec!["(-2)", "(-1)", "(1)", "(2)"]);

        // eta = 1/(m+A)^2 keeps |n| <= m+A.
        let t9 = w.truncate(&rat(1, 81)).unwrap();
        assert_eq!(t9.finite_support().unwrap().len(), 18);

        // eta below the minimum of an explicit weight leaves it unchanged.
        let e = z1_nn(true);
        let te = e.truncate(&rat(1, 7)).unwrap();
        assert_eq!(te.finite_support().unwrap().len(), 2);

        assert_eq!(w.truncate(&rat_int(2)), Err(WeightError::EmptySupport));
    }

    #[test]
    fn truncation_is_pointwise_monotone() {
        let g = z1();
        let w =
            WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 2, rat_int(1))
                .unwrap();
        let coarse = w.truncate(&rat(1, 4)).unwrap();
        let fine = w.truncate(&rat(1, 64)).unwrap();
        assert!(pointwise_le(&coarse, &fine).unwrap());
        assert!(pointwise_le(&fine, &w.truncate(&rat(1, 1024)).unwrap()).unwrap());
    }

    #[test]
    fn spanning_thresholds() {
        let g = z1();
        let gens = g.generators();

        let w1 = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![1]), rat(1, 2)),
                (GroupElement::Vector(vec![2]), rat(1, 4)),
            ],
            true,
        )
        .unwrap();
        assert_eq!(w1.spanning_threshold(&gens, 8).unwrap(), rat(1, 2));

        let w2 = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![2]), rat(1, 2)),
                (GroupElement::Vector(vec![3]), rat(1, 4)),
            ],
            true,
        )
        .unwrap();
        assert_eq!(w2.spanning_threshold(&gens, 8).unwrap(), rat(1, 4));

        let g2 = Group::free_abelian(2);
        let jc = WeightFunction::power_law(&g2, PowerLawShape::JumpColumns, 2, rat_int(1)).unwrap();
        assert_eq!(jc.spanning_threshold(&g2.generators(), 8).unwrap(), rat_int(1));
    }

    #[test]
    fn sup_distance_examples() {
        let g = z1();
        let w = z1_nn(true);
        assert_eq!(w.sup_distance(&w).unwrap(), rat_int(0));

        let w2 = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![1]), rat(1, 2)),
                (GroupElement::Vector(vec![2]), rat(1, 4)),
            ],
            true,
        )
        .unwrap();
        assert_eq!(w.sup_distance(&w2).unwrap(), rat(1, 4));

        let pl = WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 2, rat_int(1))
            .unwrap();
        assert_eq!(w.sup_distance(&pl), Err(WeightError::UnboundedComparison));
    }

    #[test]
    fn floor_root_basics() {
        assert_eq!(floor_root(&rat_int(100), 2), 10);
        assert_eq!(floor_root(&rat_int(99), 2), 9);
        assert_eq!(floor_root(&rat(81, 1), 4), 3);
        assert_eq!(floor_root(&rat(1, 2), 1), 0);
    }
}
