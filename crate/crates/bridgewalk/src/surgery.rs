//! Span decomposition of half-space walks and the surgery that rewires a
//! half-space walk with at least two alternating sub-bridges into one with
//! fewer, longer sub-bridges.
//!
//! The decomposition cuts a half-space walk into maximal alternating
//! bridges and reversed bridges with strictly decreasing spans. The surgery
//! removes the first two alternations by translating and reversing the
//! middle section, inserting fixed connector walks where endpoints fall in
//! different orbits. Every output is re-verified: self-avoidance, exact
//! weight and length bookkeeping, and the predicted span list.

use crate::exact::{rat_pow, Rat};
use crate::group::GroupElement;
use crate::height::{HeightStructure, StructuralConstants, WalkClass};
use crate::length::LengthFunction;
use crate::walk::{Walk, WalkError};
use crate::weight::WeightFunction;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("walk is not a half-space walk from its base")]
    NotHalfSpace,
    #[error("surgery needs at least two sub-bridges, found {k}")]
    NeedsTwoSubwalks { k: usize },
    #[error("surgered walk revisits {vertex}; construction reported, not repaired")]
    Collision { vertex: String },
    #[error("surgery postcondition violated: {0}")]
    PostconditionViolated(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// Decomposition of a half-space walk into maximal alternating bridges and
/// reversed bridges: cut indices `n_0 = 0 < n_1 < ... < n_k = n` and the
/// strictly decreasing spans `S_1 > S_2 > ... > S_k > 0` of the pieces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanDecomposition {
    pub spans: Vec<i64>,
    pub cuts: Vec<usize>,
}

impl SpanDecomposition {
    pub fn k(&self) -> usize {
        self.spans.len()
    }

    /// Index ranges `(n_{j-1}, n_j)` of the sub-walks.
    pub fn subwalk_ranges(&self) -> Vec<(usize, usize)> {
        self.cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Decompose a half-space walk by the alternating-extremum recursion: at
/// stage `j` take the largest drop (even `j`) or rise (odd `j`) measured
/// from the previous cut, cutting at the last index attaining it.
pub fn decompose(h: &HeightStructure, walk: &Walk) -> Result<SpanDecomposition, SurgeryError> {
    if walk.is_empty() || !matches!(walk.class, WalkClass::Bridge | WalkClass::HalfSpace) {
        return Err(SurgeryError::NotHalfSpace);
    }
    let heights = &walk.heights;
    debug_assert_eq!(heights, &h.heights_of(&walk.vertices));
    let n = heights.len() - 1;
    let mut cuts = vec![0usize];
    let mut spans = Vec::new();
    let mut j = 1i64;
    while *cuts.last().unwrap() != n {
        let start = *cuts.last().unwrap();
        let sign = if j % 2 == 1 { -1 } else { 1 };
        let mut best = i64::MIN;
        let mut best_t = start;
        for t in start..=n {
            let v = sign * (heights[start] - heights[t]);
            if v >= best {
                best = v;
                best_t = t;
            }
        }
        if best <= 0 {
            return Err(SurgeryError::PostconditionViolated(format!(
                "nonpositive span {best} at stage {j}"
            )));
        }
        spans.push(best);
        cuts.push(best_t);
        j += 1;
    }
    Ok(SpanDecomposition { spans, cuts })
}

/// Result of one surgery step, with the bookkeeping that was verified.
#[derive(Clone, Debug, PartialEq)]
pub struct SurgeryOutcome {
    pub walk: Walk,
    /// Orbit pair of the inserted connectors.
    pub connector: (usize, usize),
    /// Number of connector copies inserted (1 if the walk had exactly two
    /// sub-bridges, else 2).
    pub inserted: usize,
    /// Span list of the input walk.
    pub input_spans: Vec<i64>,
    /// Verified span list of the output walk.
    pub output_spans: Vec<i64>,
}

/// One surgery step on a half-space walk with at least two sub-bridges.
///
/// With spans `a_1 > ... > a_k`: cut at the first vertex attaining height
/// `a_1`, translate-and-reverse the section through the second cut so that
/// it continues upward, connect the seams with the fixed connector walk of
/// the orbit pair, and (when `k >= 3`) re-attach the remainder translated
/// above. The output is a half-space walk whose spans are
/// `(a_1+a_2+a_3+2*delta, a_4, ..., a_k)`, or `(a_1+a_2+delta)` when
/// `k = 2`; its weight gains one connector-weight factor per insertion and
/// its length one connector-length. All of this is checked before returning.
pub fn surgery_step(
    h: &HeightStructure,
    constants: &StructuralConstants,
    weight: &WeightFunction,
    length: &LengthFunction,
    walk: &Walk,
) -> Result<SurgeryOutcome, SurgeryError> {
    let deco = decompose(h, walk)?;
    let k = deco.k();
    if k < 2 {
        return Err(SurgeryError::NeedsTwoSubwalks { k });
    }
    let group = h.group().clone();
    let heights = &walk.heights;
    let h0 = heights[0];
    let a = &deco.spans;
    let n2 = deco.cuts[2.min(deco.cuts.len() - 1)];
    debug_assert_eq!(n2, deco.cuts[2]);

    // First attainment of the maximum height.
    let t = heights
        .iter()
        .position(|&x| x - h0 == a[0])
        .expect("span is attained");

    let pi_t = &walk.vertices[t];
    let pi_n2 = &walk.vertices[n2];
    let i = h.orbit_of(pi_t);
    let j = h.orbit_of(pi_n2);
    let conn = &constants.connectors[i][j];

    // gamma maps the orbit representative onto pi_t.
    let rep_i = &h.orbit_reps()[i];
    let gamma = group.multiply(pi_t, &group.inverse(rep_i));
    debug_assert!(h.in_subgroup(&gamma));
    let gamma_vj = group.multiply(&gamma, &conn.target);
    let alpha1 = group.multiply(&gamma_vj, &group.inverse(pi_n2));
    if !h.in_subgroup(&alpha1) {
        return Err(SurgeryError::PostconditionViolated(
            "translation alpha_1 is not in the acting subgroup".into(),
        ));
    }

    let mut vertices: Vec<GroupElement> = walk.vertices[..=t].to_vec();
    // First connector copy, mapped to start at pi_t.
    let mut cur = pi_t.clone();
    for s in &conn.steps {
        cur = group.multiply(&cur, s);
        vertices.push(cur.clone());
    }
    debug_assert_eq!(cur, gamma_vj);
    // Middle section, translated and reversed.
    for u in (t..n2).rev() {
        vertices.push(group.multiply(&alpha1, &walk.vertices[u]));
    }

    let inserted = if k >= 3 {
        // Second connector copy from alpha_1 pi_t, then the tail translated
        // by alpha_2.
        let alpha1_pit = group.multiply(&alpha1, pi_t);
        debug_assert_eq!(vertices.last(), Some(&alpha1_pit));
        let mut cur = alpha1_pit;
        for s in &conn.steps {
            cur = group.multiply(&cur, s);
            vertices.push(cur.clone());
        }
        let alpha2 = group.multiply(&cur, &group.inverse(pi_n2));
        if !h.in_subgroup(&alpha2) {
            return Err(SurgeryError::PostconditionViolated(
                "translation alpha_2 is not in the acting subgroup".into(),
            ));
        }
        for u in n2 + 1..walk.vertices.len() {
            vertices.push(group.multiply(&alpha2, &walk.vertices[u]));
        }
        2
    } else {
        1
    };

    let new_walk = match Walk::from_vertices(&group, weight, length, h, vertices) {
        Ok(w) => w,
        Err(WalkError::NotSelfAvoiding(v)) => return Err(SurgeryError::Collision { vertex: v }),
        Err(e) => return Err(SurgeryError::Walk(e)),
    };

    // Exact bookkeeping checks.
    let expected_weight = &walk.weight * rat_pow(&conn.theta, inserted as u32);
    if new_walk.weight != expected_weight {
        return Err(SurgeryError::PostconditionViolated(format!(
            "weight {} differs from theta^{inserted} * w = {}",
            new_walk.weight, expected_weight
        )));
    }
    let expected_ell = &walk.ell + Rat::from_integer((inserted as i64).into()) * &conn.ell;
    if new_walk.ell != expected_ell {
        return Err(SurgeryError::PostconditionViolated(format!(
            "length {} differs from expected {}",
            new_walk.ell, expected_ell
        )));
    }
    let predicted: Vec<i64> = if k >= 3 {
        let mut v = vec![a[0] + a[1] + a[2] + 2 * conn.delta];
        v.extend_from_slice(&a[3..]);
        v
    } else {
        vec![a[0] + a[1] + conn.delta]
    };
    let out_deco = decompose(h, &new_walk)?;
    if out_deco.spans != predicted {
        return Err(SurgeryError::PostconditionViolated(format!(
            "output spans {:?} differ from predicted {:?}",
            out_deco.spans, predicted
        )));
    }

    Ok(SurgeryOutcome {
        walk: new_walk,
        connector: (i, j),
        inserted,
        input_spans: a.clone(),
        output_spans: out_deco.spans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};
    use crate::group::{Group, HomomorphismSpec};
    use crate::height::{make_height, structural_constants, HeightSpec};
    use crate::length::LengthFunction;

    fn z2_setup() -> (Group, WeightFunction, LengthFunction, HeightStructure, StructuralConstants)
    {
        let g = Group::free_abelian(2);
        let w = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![1, 0]), rat_int(1)),
                (GroupElement::Vector(vec![0, 1]), rat_int(1)),
            ],
            true,
        )
        .unwrap();
        let l = LengthFunction::constant_one(&g);
        let h = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1, 0]),
                lambda: 1,
            },
            &g,
            &w,
            None,
        )
        .unwrap();
        let sc = structural_constants(&h, &w, &l, None, 4).unwrap();
        (g, w, l, h, sc)
    }

    fn walk_through(
        g: &Group,
        w: &WeightFunction,
        l: &LengthFunction,
        h: &HeightStructure,
        points: &[&str],
    ) -> Walk {
        let vertices = points.iter().map(|p| g.parse_element(p).unwrap()).collect();
        Walk::from_vertices(g, w, l, h, vertices).unwrap()
    }

    #[test]
    fn decomposition_example() {
        let (g, w, l, h, _) = z2_setup();
        let walk = walk_through(&g, &w, &l, &h, &["(0,0)", "(1,0)", "(2,0)", "(2,1)", "(1,1)"]);
        let deco = decompose(&h, &walk).unwrap();
        assert_eq!(deco.spans, vec![2, 1]);
        assert_eq!(deco.cuts, vec![0, 3, 4]);
        // The sub-walks alternate bridge / reversed bridge and glue back.
        let ranges = deco.subwalk_ranges();
        assert_eq!(ranges, vec![(0, 3), (3, 4)]);
        let first = &walk.vertices[0..=3];
        let heights: Vec<i64> = h.heights_of(first);
        assert_eq!(
            crate::height::classify_heights(&heights),
            WalkClass::Bridge
        );
    }

    #[test]
    fn bridges_decompose_trivially() {
        let (g, w, l, h, _) = z2_setup();
        let bridge = walk_through(&g, &w, &l, &h, &["(0,0)", "(1,0)", "(1,1)"]);
        let deco = decompose(&h, &bridge).unwrap();
        assert_eq!(deco.spans, vec![1]);
        assert_eq!(deco.cuts, vec![0, 2]);

        let single = walk_through(&g, &w, &l, &h, &["(0,0)", "(1,0)"]);
        let deco = decompose(&h, &single).unwrap();
        assert_eq!(deco.spans, vec![1]);
    }

    #[test]
    fn non_half_space_is_rejected() {
        let (g, w, l, h, _) = z2_setup();
        let plain = walk_through(&g, &w, &l, &h, &["(0,0)", "(0,1)"]);
        assert_eq!(decompose(&h, &plain), Err(SurgeryError::NotHalfSpace));
    }

    #[test]
    fn transitive_surgery_example() {
        let (g, w, l, h, sc) = z2_setup();
        let walk = walk_through(&g, &w, &l, &h, &["(0,0)", "(1,0)", "(2,0)", "(2,1)", "(1,1)"]);
        let out = surgery_step(&h, &sc, &w, &l, &walk).unwrap();
        let got: Vec<String> = out.walk.vertices.iter().map(|v| v.to_string()).collect();
        assert_eq!(got, vec!["(0,0)", "(1,0)", "(2,0)", "(3,0)", "(3,-1)"]);
        assert_eq!(out.walk.class, WalkClass::Bridge);
        assert_eq!(out.walk.span(), 3);
        assert_eq!(out.walk.weight, walk.weight);
        assert_eq!(out.walk.ell, walk.ell);
        assert_eq!(out.output_spans, vec![3]);
        assert_eq!(out.inserted, 1);
    }

    #[test]
    fn bridges_cannot_be_surgered() {
        let (g, w, l, h, sc) = z2_setup();
        let bridge = walk_through(&g, &w, &l, &h, &["(0,0)", "(1,0)"]);
        assert_eq!(
            surgery_step(&h, &sc, &w, &l, &bridge),
            Err(SurgeryError::NeedsTwoSubwalks { k: 1 })
        );
    }

    #[test]
    fn connector_surgery_multiplies_by_theta() {
        // Two-orbit height on the line with unit and double jumps.
        let g = Group::free_abelian(1);
        let w = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![1]), rat(1, 2)),
                (GroupElement::Vector(vec![2]), rat(1, 4)),
            ],
            true,
        )
        .unwrap();
        let l = LengthFunction::constant_one(&g);
        let h = make_height(
            HeightSpec::CosetOffset {
                modulus: 2,
                class_hom: HomomorphismSpec::new(vec![1]),
                reps: vec![g.identity(), GroupElement::Vector(vec![1])],
                f_hom: HomomorphismSpec::new(vec![1]),
                offsets: vec![0, 1],
            },
            &g,
            &w,
            None,
        )
        .unwrap();
        let sc = structural_constants(&h, &w, &l, None, 4).unwrap();

        // 0 -> 2 -> 1 has spans (2, 1); its endpoints sit in orbits 0 and 1.
        let walk = walk_through(&g, &w, &l, &h, &["(0)", "(2)", "(1)"]);
        let out = surgery_step(&h, &sc, &w, &l, &walk).unwrap();
        let got: Vec<String> = out.walk.vertices.iter().map(|v| v.to_string()).collect();
        assert_eq!(got, vec!["(0)", "(2)", "(3)", "(4)"]);
        // theta = phi(1) = 1/2; delta = 1; span = 2 + 1 + 1.
        assert_eq!(out.walk.weight, &walk.weight * rat(1, 2));
        assert_eq!(out.output_spans, vec![4]);
        assert_eq!(out.walk.ell, &walk.ell + rat_int(1));
        assert_eq!(out.connector, (0, 1));
    }

    #[test]
    fn decomposition_reconstructs_the_walk() {
        let (g, w, l, h, _) = z2_setup();
        let walk = walk_through(
            &g,
            &w,
            &l,
            &h,
            &["(0,0)", "(1,0)", "(2,0)", "(2,1)", "(1,1)", "(1,2)", "(2,2)", "(2,3)", "(1,3)"],
        );
        let deco = decompose(&h, &walk).unwrap();
        let mut glued: Vec<GroupElement> = vec![walk.vertices[0].clone()];
        for (lo, hi) in deco.subwalk_ranges() {
            glued.extend_from_slice(&walk.vertices[lo + 1..=hi]);
        }
        assert_eq!(glued, walk.vertices);
    }
}
