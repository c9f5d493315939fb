//! Height structures on Cayley graphs, walk classification, and the
//! structural constants read off a validated height.
//!
//! A height structure assigns an integer height to every vertex so that
//! heights are difference-invariant under a finite-index normal subgroup
//! acting by left multiplication, and every vertex of the (truncated) step
//! graph has both a strictly higher and a strictly lower neighbour.

use crate::exact::{rat_ceil_u32, rat_pow, rat_to_f64, Rat};
use crate::group::{canonical_key, Group, GroupElement, GroupError, HomomorphismSpec};
use crate::length::LengthFunction;
use crate::weight::{PowerLawShape, WeightFunction};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeightError {
    #[error("not a height function (clause {clause}): {detail}")]
    NotAHeightFunction { clause: char, detail: String },
    #[error("height spec invalid: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("structural constants need a locally finite step graph; truncate the weight first")]
    RequiresTruncation,
    #[error("no connector walk within the search bound {0}")]
    SearchExhausted(usize),
}

/// How the height is defined.
#[derive(Clone, Debug)]
pub enum HeightSpec {
    /// `h = F`, with the whole group acting; the graph is vertex-transitive.
    /// `lambda` records the rescaling that makes `F = h / lambda` surjective.
    Homomorphism { hom: HomomorphismSpec, lambda: u64 },
    /// Height through a finite-index subgroup: the class of `v` is
    /// `class_hom(v) mod modulus`, and
    /// `h(v) = f_hom(v * rep_class^{-1}) + offset_class`.
    CosetOffset {
        modulus: usize,
        class_hom: HomomorphismSpec,
        reps: Vec<GroupElement>,
        f_hom: HomomorphismSpec,
        offsets: Vec<i64>,
    },
}

/// A validated height structure.
#[derive(Clone, Debug)]
pub struct HeightStructure {
    group: Group,
    spec: HeightSpec,
    rep_inverses: Vec<GroupElement>,
    /// Scope notes from validation (e.g. which finite set clause (c) used).
    pub notes: Vec<String>,
}

/// Classification of a self-avoiding walk by its height profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WalkClass {
    Bridge,
    ReversedBridge,
    HalfSpace,
    Plain,
}

/// The strongest class a height profile satisfies. The zero-step walk is a
/// bridge by convention (all conditions hold vacuously).
pub fn classify_heights(heights: &[i64]) -> WalkClass {
    assert!(!heights.is_empty());
    let h0 = heights[0];
    let hn = *heights.last().unwrap();
    let tail = &heights[1..];
    let half_space = tail.iter().all(|&h| h > h0);
    if half_space && tail.iter().all(|&h| h <= hn) {
        return WalkClass::Bridge;
    }
    if tail.iter().all(|&h| h < h0) && tail.iter().all(|&h| h >= hn) {
        return WalkClass::ReversedBridge;
    }
    if half_space {
        return WalkClass::HalfSpace;
    }
    WalkClass::Plain
}

/// Maximum minus minimum height along a walk.
pub fn span_of_heights(heights: &[i64]) -> i64 {
    let max = heights.iter().max().expect("nonempty walk");
    let min = heights.iter().min().expect("nonempty walk");
    max - min
}

impl HeightStructure {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn spec(&self) -> &HeightSpec {
        &self.spec
    }

    pub fn is_transitive(&self) -> bool {
        matches!(self.spec, HeightSpec::Homomorphism { .. })
    }

    pub fn orbit_count(&self) -> usize {
        match &self.spec {
            HeightSpec::Homomorphism { .. } => 1,
            HeightSpec::CosetOffset { modulus, .. } => *modulus,
        }
    }

    /// Index of the acting subgroup (1 in homomorphism mode).
    pub fn subgroup_index(&self) -> usize {
        self.orbit_count()
    }

    /// One representative per orbit of the acting subgroup.
    pub fn orbit_reps(&self) -> Vec<GroupElement> {
        match &self.spec {
            HeightSpec::Homomorphism { .. } => vec![self.group.identity()],
            HeightSpec::CosetOffset { reps, .. } => reps.clone(),
        }
    }

    pub fn orbit_of(&self, v: &GroupElement) -> usize {
        match &self.spec {
            HeightSpec::Homomorphism { .. } => 0,
            HeightSpec::CosetOffset {
                modulus, class_hom, ..
            } => {
                let c = class_hom.evaluate(&self.group, v);
                c.rem_euclid(*modulus as i64) as usize
            }
        }
    }

    /// Is `v` in the acting subgroup?
    pub fn in_subgroup(&self, v: &GroupElement) -> bool {
        self.orbit_of(v) == 0
    }

    pub fn height(&self, v: &GroupElement) -> i64 {
        match &self.spec {
            HeightSpec::Homomorphism { hom, .. } => hom.evaluate(&self.group, v),
            HeightSpec::CosetOffset {
                f_hom, offsets, ..
            } => {
                let i = self.orbit_of(v);
                let alpha = self.group.multiply(v, &self.rep_inverses[i]);
                f_hom.evaluate(&self.group, &alpha) + offsets[i]
            }
        }
    }

    pub fn heights_of(&self, vertices: &[GroupElement]) -> Vec<i64> {
        vertices.iter().map(|v| self.height(v)).collect()
    }

    /// `h(v g) - h(v)` for any `v` in the given orbit; exact because the
    /// underlying maps are homomorphisms.
    pub fn step_height_delta(&self, orbit: usize, step: &GroupElement) -> i64 {
        let reps = self.orbit_reps();
        let v = &reps[orbit];
        self.height(&self.group.multiply(v, step)) - self.height(v)
    }

    /// Orbit reached after applying `step` from the given orbit.
    pub fn step_orbit(&self, orbit: usize, step: &GroupElement) -> usize {
        let reps = self.orbit_reps();
        self.orbit_of(&self.group.multiply(&reps[orbit], step))
    }

    /// Canonical JSON description, used in digests and reports.
    pub fn describe(&self) -> serde_json::Value {
        match &self.spec {
            HeightSpec::Homomorphism { hom, lambda } => serde_json::json!({
                "mode": "homomorphism",
                "coefficients": hom.coefficients,
                "lambda": lambda,
            }),
            HeightSpec::CosetOffset {
                modulus,
                class_hom,
                reps,
                f_hom,
                offsets,
            } => serde_json::json!({
                "mode": "coset_offset",
                "modulus": modulus,
                "class_coefficients": class_hom.coefficients,
                "reps": reps.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "f_coefficients": f_hom.coefficients,
                "offsets": offsets,
            }),
        }
    }
}

/// Classify a walk given as a vertex list.
pub fn classify_walk(h: &HeightStructure, vertices: &[GroupElement]) -> WalkClass {
    classify_heights(&h.heights_of(vertices))
}

/// Span of a walk given as a vertex list.
pub fn span(h: &HeightStructure, vertices: &[GroupElement]) -> i64 {
    span_of_heights(&h.heights_of(vertices))
}

/// Build and validate a height structure against the weight's step graph.
///
/// Clause (a): integer heights with `h(id) = 0`. Clause (b):
/// difference-invariance under the acting subgroup (exact in homomorphism
/// mode, checked on sampled triples in coset mode). Clause (c): every orbit
/// representative has a strictly higher and a strictly lower neighbour in
/// the truncated step graph.
pub fn make_height(
    spec: HeightSpec,
    group: &Group,
    weight: &WeightFunction,
    eta: Option<&Rat>,
) -> Result<HeightStructure, HeightError> {
    let rep_inverses = match &spec {
        HeightSpec::Homomorphism { hom, lambda } => {
            hom.validate(group)?;
            if *lambda == 0 {
                return Err(HeightError::InvalidSpec("lambda must be positive".into()));
            }
            Vec::new()
        }
        HeightSpec::CosetOffset {
            modulus,
            class_hom,
            reps,
            f_hom,
            offsets,
        } => {
            class_hom.validate(group)?;
            f_hom.validate(group)?;
            if *modulus == 0 {
                return Err(HeightError::InvalidSpec("modulus must be positive".into()));
            }
            if reps.len() != *modulus || offsets.len() != *modulus {
                return Err(HeightError::InvalidSpec(format!(
                    "need exactly {modulus} coset representatives and offsets"
                )));
            }
            if reps[0] != group.identity() || offsets[0] != 0 {
                return Err(HeightError::NotAHeightFunction {
                    clause: 'a',
                    detail: "representative 0 must be the identity with offset 0".into(),
                });
            }
            for (i, rep) in reps.iter().enumerate() {
                let c = class_hom.evaluate(group, rep).rem_euclid(*modulus as i64) as usize;
                if c != i {
                    return Err(HeightError::InvalidSpec(format!(
                        "representative {rep} is in class {c}, expected {i}"
                    )));
                }
            }
            reps.iter().map(|r| group.inverse(r)).collect()
        }
    };

    let mut structure = HeightStructure {
        group: group.clone(),
        spec,
        rep_inverses,
        notes: Vec::new(),
    };

    // Clause (a).
    if structure.height(&group.identity()) != 0 {
        return Err(HeightError::NotAHeightFunction {
            clause: 'a',
            detail: "h(id) != 0".into(),
        });
    }

    // Clause (c): check one representative per orbit over a finite view of
    // the step graph.
    let (steps, scope_note) = finite_step_view(weight, eta);
    if let Some(note) = scope_note {
        structure.notes.push(note);
    }
    for (i, rep) in structure.orbit_reps().iter().enumerate() {
        let hv = structure.height(rep);
        let mut has_up = false;
        let mut has_down = false;
        for (g, _) in &steps {
            let hn = structure.height(&group.multiply(rep, g));
            has_up |= hn > hv;
            has_down |= hn < hv;
            if has_up && has_down {
                break;
            }
        }
        if !(has_up && has_down) {
            return Err(HeightError::NotAHeightFunction {
                clause: 'c',
                detail: format!(
                    "orbit {i} representative {rep} lacks a strictly {} neighbour",
                    if has_up { "lower" } else { "higher" }
                ),
            });
        }
    }

    // Clause (b): sampled difference-invariance in coset mode.
    if !structure.is_transitive() {
        let gens = group.generators();
        let mut samples: Vec<GroupElement> = vec![group.identity()];
        for g in &gens {
            let mut cur = group.identity();
            for _ in 0..3 {
                cur = group.multiply(&cur, g);
                samples.push(cur.clone());
                samples.push(group.inverse(&cur));
            }
        }
        for g in &gens {
            for g2 in &gens {
                samples.push(group.multiply(g, &group.inverse(g2)));
            }
        }
        let subgroup_elems: Vec<GroupElement> = samples
            .iter()
            .flat_map(|x| {
                samples
                    .iter()
                    .map(|y| structure.group.multiply(x, y))
                    .collect::<Vec<_>>()
            })
            .filter(|v| structure.in_subgroup(v))
            .collect();
        for alpha in subgroup_elems.iter().take(64) {
            for u in samples.iter().take(16) {
                for v in samples.iter().take(16) {
                    let lhs = structure.height(&group.multiply(alpha, v))
                        - structure.height(&group.multiply(alpha, u));
                    let rhs = structure.height(v) - structure.height(u);
                    if lhs != rhs {
                        return Err(HeightError::NotAHeightFunction {
                            clause: 'b',
                            detail: format!(
                                "difference-invariance fails at alpha={alpha}, u={u}, v={v}"
                            ),
                        });
                    }
                }
            }
        }
    }

    Ok(structure)
}

/// A finite list of positive-weight steps to scan, with a note when the
/// support had to be capped.
fn finite_step_view(
    weight: &WeightFunction,
    eta: Option<&Rat>,
) -> (Vec<(GroupElement, Rat)>, Option<String>) {
    if let Some(steps) = weight.bounded_support(eta, None) {
        let note = eta.map(|e| format!("checked on the step graph truncated at eta = {e}"));
        (steps, note)
    } else {
        let steps = weight
            .bounded_support(None, Some(8))
            .expect("cap certifies finiteness");
        (
            steps,
            Some("infinite untruncated support: checked on jumps of size <= 8".to_string()),
        )
    }
}

/// A fixed connecting walk between two orbits.
#[derive(Clone, Debug)]
pub struct Connector {
    pub from_orbit: usize,
    pub to_orbit: usize,
    /// Steps of the walk; empty when `from_orbit == to_orbit`.
    pub steps: Vec<GroupElement>,
    /// Endpoint `v_j` of the walk started at the orbit representative.
    pub target: GroupElement,
    /// Weight of the walk (1 for the trivial connector).
    pub theta: Rat,
    /// Length of the walk (0 for the trivial connector).
    pub ell: Rat,
    /// Height gain from representative to target.
    pub delta: i64,
}

/// All structural constants attached to a validated height structure over
/// a locally finite step graph.
#[derive(Clone, Debug)]
pub struct StructuralConstants {
    /// Largest height jump across a single step.
    pub d: i64,
    /// Graph-length bound realised by the chosen connectors (0 if transitive).
    pub r: usize,
    /// Connector matrix, row = from-orbit, column = to-orbit.
    pub connectors: Vec<Vec<Connector>>,
    pub theta_min: Rat,
    pub theta_max: Rat,
    /// Smallest edge weight appearing in any connector (1 if transitive).
    pub phi_nu: Rat,
    /// Ceiling of the largest connector length.
    pub s_cap: u32,
    /// Smallest weight of an upward extension edge.
    pub psi: Rat,
    /// Smallest length of an upward extension edge.
    pub a_min: Rat,
    /// `A`: largest ceiled length of an upward extension edge.
    pub a_cap: u32,
    /// `J`: largest ceiled length of a downward extension edge.
    pub j_cap: u32,
    /// Chosen upward extension step per orbit representative.
    pub up_extensions: Vec<GroupElement>,
    /// Chosen downward extension step per orbit representative.
    pub down_extensions: Vec<GroupElement>,
}

impl StructuralConstants {
    /// Constant of the interval extension bound:
    /// `ceil(c/a) * psi^(-ceil(q/a))` for `q >= c - A >= 0`.
    pub fn interval_constant(&self, c: &Rat, q: &Rat) -> Rat {
        let reps = rat_ceil_u32(&(q / &self.a_min));
        let mult = rat_ceil_u32(&(c / &self.a_min));
        Rat::from_integer(mult.into()) * rat_pow(&self.psi.clone().recip(), reps)
    }

    /// Constant `C` in the shifted supermultiplicative bound
    /// `w(b_{m,A}) w(b_{n,A}) <= C w(b_{m+n+A,A})`.
    pub fn supermultiplicative_constant(&self) -> Rat {
        let a = Rat::from_integer(self.a_cap.into());
        let two_a = Rat::from_integer((2 * self.a_cap).into());
        self.interval_constant(&two_a, &a)
    }

    /// Serializable summary.
    pub fn report(&self) -> StructuralConstantsReport {
        StructuralConstantsReport {
            d: self.d,
            r: self.r,
            theta_min: crate::exact::format_rat(&self.theta_min),
            theta_max: crate::exact::format_rat(&self.theta_max),
            phi_nu: crate::exact::format_rat(&self.phi_nu),
            s_cap: self.s_cap,
            psi: crate::exact::format_rat(&self.psi),
            a_min: crate::exact::format_rat(&self.a_min),
            a_cap: self.a_cap,
            j_cap: self.j_cap,
            connectors: self
                .connectors
                .iter()
                .flatten()
                .filter(|c| c.from_orbit != c.to_orbit)
                .map(|c| ConnectorReport {
                    from_orbit: c.from_orbit,
                    to_orbit: c.to_orbit,
                    steps: c.steps.iter().map(|s| s.to_string()).collect(),
                    target: c.target.to_string(),
                    theta: crate::exact::format_rat(&c.theta),
                    ell: crate::exact::format_rat(&c.ell),
                    delta: c.delta,
                })
                .collect(),
            up_extensions: self.up_extensions.iter().map(|g| g.to_string()).collect(),
            down_extensions: self.down_extensions.iter().map(|g| g.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectorReport {
    pub from_orbit: usize,
    pub to_orbit: usize,
    pub steps: Vec<String>,
    pub target: String,
    pub theta: String,
    pub ell: String,
    pub delta: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralConstantsReport {
    pub d: i64,
    pub r: usize,
    pub theta_min: String,
    pub theta_max: String,
    pub phi_nu: String,
    pub s_cap: u32,
    pub psi: String,
    pub a_min: String,
    pub a_cap: u32,
    pub j_cap: u32,
    pub connectors: Vec<ConnectorReport>,
    pub up_extensions: Vec<String>,
    pub down_extensions: Vec<String>,
}

/// Compute all structural constants over the truncated step graph.
///
/// Connectors are found by a breadth-bounded search over self-avoiding
/// walks of graph length at most `r_search_bound`; ties are broken by
/// length, then by the lexicographic order of canonical step keys.
pub fn structural_constants(
    h: &HeightStructure,
    weight: &WeightFunction,
    length: &LengthFunction,
    eta: Option<&Rat>,
    r_search_bound: usize,
) -> Result<StructuralConstants, HeightError> {
    let steps = weight
        .bounded_support(eta, None)
        .ok_or(HeightError::RequiresTruncation)?;
    let mut sorted: Vec<(GroupElement, Rat, Rat)> = steps
        .into_iter()
        .map(|(g, w)| {
            let l = length.value(&g);
            (g, w, l)
        })
        .collect();
    sorted.sort_by(|a, b| a.2.cmp(&b.2).then_with(|| canonical_key(&a.0).cmp(&canonical_key(&b.0))));

    let reps = h.orbit_reps();
    let orbit_count = reps.len();
    let group = h.group().clone();

    // d over all orbit representatives and all truncated-support steps.
    let mut d = 0i64;
    for i in 0..orbit_count {
        for (g, _, _) in &sorted {
            d = d.max(h.step_height_delta(i, g).abs());
        }
    }

    // Extension edges: minimal length, then lexicographic key.
    let mut up = Vec::new();
    let mut down = Vec::new();
    for (i, rep) in reps.iter().enumerate() {
        let up_step = sorted
            .iter()
            .find(|(g, _, _)| h.step_height_delta(i, g) > 0)
            .ok_or_else(|| HeightError::NotAHeightFunction {
                clause: 'c',
                detail: format!("no upward extension at representative {rep}"),
            })?;
        let down_step = sorted
            .iter()
            .find(|(g, _, _)| h.step_height_delta(i, g) < 0)
            .ok_or_else(|| HeightError::NotAHeightFunction {
                clause: 'c',
                detail: format!("no downward extension at representative {rep}"),
            })?;
        up.push(up_step.clone());
        down.push(down_step.clone());
    }
    let psi = up.iter().map(|(_, w, _)| w.clone()).min().unwrap();
    let a_min = up.iter().map(|(_, _, l)| l.clone()).min().unwrap();
    let a_cap = up.iter().map(|(_, _, l)| rat_ceil_u32(l)).max().unwrap();
    let j_cap = down.iter().map(|(_, _, l)| rat_ceil_u32(l)).max().unwrap();

    // Connectors.
    let mut connectors: Vec<Vec<Connector>> = Vec::new();
    let mut r = 0usize;
    for (i, rep) in reps.iter().enumerate() {
        let mut row = Vec::new();
        for j in 0..orbit_count {
            if i == j {
                row.push(Connector {
                    from_orbit: i,
                    to_orbit: j,
                    steps: Vec::new(),
                    target: rep.clone(),
                    theta: Rat::one(),
                    ell: Rat::zero(),
                    delta: 0,
                });
                continue;
            }
            let found = find_connector(&group, h, &sorted, rep, i, j, r_search_bound)
                .ok_or(HeightError::SearchExhausted(r_search_bound))?;
            r = r.max(found.steps.len());
            row.push(found);
        }
        connectors.push(row);
    }

    let nontrivial: Vec<&Connector> = connectors
        .iter()
        .flatten()
        .filter(|c| c.from_orbit != c.to_orbit)
        .collect();
    let (theta_min, theta_max, phi_nu, s_cap) = if nontrivial.is_empty() {
        (Rat::one(), Rat::one(), Rat::one(), 0u32)
    } else {
        let theta_min = nontrivial.iter().map(|c| c.theta.clone()).min().unwrap();
        let theta_max = nontrivial.iter().map(|c| c.theta.clone()).max().unwrap();
        let mut phi_nu: Option<Rat> = None;
        for c in &nontrivial {
            for s in &c.steps {
                let w = weight.value(s);
                phi_nu = Some(match phi_nu {
                    Some(cur) => cur.min(w),
                    None => w,
                });
            }
        }
        let s_cap = nontrivial
            .iter()
            .map(|c| rat_ceil_u32(&c.ell))
            .max()
            .unwrap();
        (theta_min, theta_max, phi_nu.unwrap(), s_cap)
    };

    Ok(StructuralConstants {
        d,
        r,
        connectors,
        theta_min,
        theta_max,
        phi_nu,
        s_cap,
        psi,
        a_min,
        a_cap,
        j_cap,
        up_extensions: up.into_iter().map(|(g, _, _)| g).collect(),
        down_extensions: down.into_iter().map(|(g, _, _)| g).collect(),
    })
}

/// Standalone computation of `A` (largest ceiled upward-extension length),
/// used to enforce the bin-width precondition without a full constant set.
pub fn extension_width_cap(
    h: &HeightStructure,
    weight: &WeightFunction,
    length: &LengthFunction,
    eta: Option<&Rat>,
) -> Result<u32, HeightError> {
    let (steps, _) = finite_step_view(weight, eta);
    let mut sorted: Vec<(GroupElement, Rat)> = steps
        .into_iter()
        .map(|(g, _)| {
            let l = length.value(&g);
            (g, l)
        })
        .collect();
    sorted.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| canonical_key(&a.0).cmp(&canonical_key(&b.0))));
    let mut a_cap = 0u32;
    for (i, rep) in h.orbit_reps().iter().enumerate() {
        let best = sorted
            .iter()
            .find(|(g, _)| h.step_height_delta(i, g) > 0)
            .ok_or_else(|| HeightError::NotAHeightFunction {
                clause: 'c',
                detail: format!("no upward extension at representative {rep}"),
            })?;
        a_cap = a_cap.max(rat_ceil_u32(&best.1));
    }
    Ok(a_cap)
}

/// Shortest admissible connector from orbit representative `rep` (orbit `i`)
/// to any vertex of orbit `j` strictly above it, interior heights strictly
/// between the endpoints.
fn find_connector(
    group: &Group,
    h: &HeightStructure,
    steps: &[(GroupElement, Rat, Rat)],
    rep: &GroupElement,
    i: usize,
    j: usize,
    bound: usize,
) -> Option<Connector> {
    #[derive(Clone)]
    struct Partial {
        vertices: Vec<GroupElement>,
        step_list: Vec<GroupElement>,
        weight: Rat,
        ell: Rat,
    }
    let mut frontier = vec![Partial {
        vertices: vec![rep.clone()],
        step_list: Vec::new(),
        weight: Rat::one(),
        ell: Rat::zero(),
    }];
    let h_start = h.height(rep);
    for _level in 1..=bound {
        let mut next = Vec::new();
        let mut candidates: Vec<(Rat, Vec<u8>, Connector)> = Vec::new();
        for p in &frontier {
            let last = p.vertices.last().unwrap();
            for (g, w, l) in steps {
                let v = group.multiply(last, g);
                if p.vertices.contains(&v) {
                    continue;
                }
                let hv = h.height(&v);
                // Interior heights must stay strictly between the endpoints,
                // so anything at or below the start is dead.
                if hv <= h_start {
                    continue;
                }
                let q = Partial {
                    vertices: {
                        let mut vs = p.vertices.clone();
                        vs.push(v.clone());
                        vs
                    },
                    step_list: {
                        let mut ss = p.step_list.clone();
                        ss.push(g.clone());
                        ss
                    },
                    weight: &p.weight * w,
                    ell: &p.ell + l,
                };
                if h.orbit_of(&v) == j
                    && q.vertices[1..q.vertices.len() - 1]
                        .iter()
                        .all(|x| h.height(x) < hv)
                {
                    let lex: Vec<u8> = q
                        .step_list
                        .iter()
                        .flat_map(|s| canonical_key(s))
                        .collect();
                    candidates.push((
                        q.ell.clone(),
                        lex,
                        Connector {
                            from_orbit: i,
                            to_orbit: j,
                            steps: q.step_list.clone(),
                            target: v.clone(),
                            theta: q.weight.clone(),
                            ell: q.ell.clone(),
                            delta: hv - h_start,
                        },
                    ));
                }
                next.push(q);
            }
        }
        if !candidates.is_empty() {
            candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            return Some(candidates.into_iter().next().unwrap().2);
        }
        frontier = next;
        if frontier.len() > 200_000 {
            return None;
        }
    }
    None
}

/// Membership report for the height Hölder condition
/// `|h(u) - h(v)| <= C * len(u^{-1} v)^epsilon` over positive-weight steps.
#[derive(Clone, Debug, Serialize)]
pub struct HolderReport {
    pub epsilon: f64,
    pub c: String,
    pub c_float: f64,
    pub holds_on_checked_set: bool,
    pub worst_ratio: f64,
    pub counterexample: Option<String>,
    /// Closed-form verdict over the entire (possibly infinite) support,
    /// when one is available for the configured family.
    pub analytic_all_support: Option<bool>,
    pub checked_steps: usize,
    pub notes: Vec<String>,
}

/// Check the Hölder condition on the truncated support, with an analytic
/// whole-support verdict for the built-in closed-form families.
pub fn check_holder(
    weight: &WeightFunction,
    length: &LengthFunction,
    h: &HeightStructure,
    epsilon: f64,
    c: &Rat,
    eta: Option<&Rat>,
) -> HolderReport {
    assert!((1.0..2.0).contains(&epsilon), "epsilon must lie in [1, 2)");
    assert!(c.is_positive(), "C must be positive");
    let (steps, scope_note) = finite_step_view(weight, eta);
    let mut notes = Vec::new();
    if let Some(n) = scope_note {
        notes.push(n);
    }
    let c_f = rat_to_f64(c);
    let mut worst = 0.0f64;
    let mut holds = true;
    let mut counterexample = None;
    let exact_eps_one = epsilon == 1.0;
    for (i, _rep) in h.orbit_reps().iter().enumerate() {
        for (g, _) in &steps {
            let dh = h.step_height_delta(i, g).abs();
            let l = length.value(g);
            let ok = if exact_eps_one {
                Rat::from_integer(dh.into()) <= c * &l
            } else {
                (dh as f64) <= c_f * rat_to_f64(&l).powf(epsilon)
            };
            let ratio = (dh as f64) / rat_to_f64(&l).powf(epsilon);
            if ratio > worst {
                worst = ratio;
            }
            if !ok && counterexample.is_none() {
                counterexample = Some(g.to_string());
            }
            holds &= ok;
        }
    }

    let analytic = analytic_holder_verdict(weight, length, h, epsilon, c, &mut notes);
    HolderReport {
        epsilon,
        c: crate::exact::format_rat(c),
        c_float: c_f,
        holds_on_checked_set: holds,
        worst_ratio: worst,
        counterexample,
        analytic_all_support: analytic,
        checked_steps: steps.len() * h.orbit_count(),
        notes,
    }
}

/// Closed-form verdict where the ratio `|dh| / len^epsilon` has a known
/// supremum over the whole support.
fn analytic_holder_verdict(
    weight: &WeightFunction,
    length: &LengthFunction,
    h: &HeightStructure,
    epsilon: f64,
    c: &Rat,
    notes: &mut Vec<String>,
) -> Option<bool> {
    // A finite support is covered exhaustively by the main scan.
    if weight.has_finite_support() {
        return None;
    }
    let HeightSpec::Homomorphism { hom, .. } = h.spec() else {
        return None;
    };
    let shape = power_law_shape(weight)?;
    let c_f = rat_to_f64(c);
    let coeffs = &hom.coefficients;
    let scale = power_law_scale(weight)?;
    let _ = power_law_exponent(weight)?;
    let axis = match shape {
        PowerLawShape::SingleAxis { axis } => axis,
        PowerLawShape::JumpColumns => 1,
    };
    let c_axis = coeffs.get(axis).copied().unwrap_or(0).unsigned_abs() as f64;

    // Supremum of |c_axis| * n / len(n)^epsilon over jumps n >= 1.
    let axis_sup = if length.is_constant_one() {
        if c_axis == 0.0 {
            Some(0.0)
        } else {
            notes.push("bounded lengths with unbounded height jumps: no constant works".into());
            None
        }
    } else if length.has_l1_default() && length.explicit_entries().is_some_and(|e| e.is_empty()) {
        // len(n) = n: ratio = c * n^(1 - eps), maximised at n = 1.
        Some(c_axis)
    } else if length.is_inverse_weight() {
        // len(n) = n^s / scale: ratio = c * scale^eps * n^(1 - s eps), max at n = 1.
        Some(c_axis * rat_to_f64(&scale).powf(epsilon))
    } else {
        return None;
    };

    let horizontal_sup = match shape {
        PowerLawShape::SingleAxis { .. } => Some(0.0),
        PowerLawShape::JumpColumns => {
            let c_h = coeffs.first().copied().unwrap_or(0).unsigned_abs() as f64;
            if length.is_constant_one() {
                Some(c_h)
            } else if length.has_l1_default()
                && length.explicit_entries().is_some_and(|e| e.is_empty())
            {
                Some(c_h)
            } else if length.is_inverse_weight() {
                Some(c_h * rat_to_f64(&scale).powf(epsilon))
            } else {
                return None;
            }
        }
    };

    match (axis_sup, horizontal_sup) {
        (Some(a), Some(hh)) => Some(a.max(hh) <= c_f),
        _ => Some(false),
    }
}

fn power_law_shape(w: &WeightFunction) -> Option<PowerLawShape> {
    // Probe the representation through bounded_support geometry.
    if w.has_finite_support() {
        return None;
    }
    let probe = w.bounded_support(None, Some(1))?;
    let has_horizontal = probe
        .iter()
        .any(|(g, _)| matches!(g, GroupElement::Vector(v) if v.len() == 2 && v[0].abs() == 1));
    if has_horizontal && probe.len() == 4 {
        Some(PowerLawShape::JumpColumns)
    } else {
        let (GroupElement::Vector(v), _) = &probe[0] else {
            return None;
        };
        let axis = v.iter().position(|&x| x != 0)?;
        Some(PowerLawShape::SingleAxis { axis })
    }
}

fn power_law_scale(w: &WeightFunction) -> Option<Rat> {
    Some(w.max_value())
}

fn power_law_exponent(w: &WeightFunction) -> Option<u32> {
    // value at jump 2 is scale / 2^e.
    let probe = w.bounded_support(None, Some(2))?;
    let scale = w.max_value();
    let two_jump = probe.iter().find_map(|(g, v)| {
        if let GroupElement::Vector(coords) = g {
            if coords.iter().any(|&x| x.abs() == 2) {
                return Some(v.clone());
            }
        }
        None
    })?;
    let ratio = scale / two_jump;
    let mut e = 0u32;
    let mut p = Rat::one();
    while p < ratio && e < 64 {
        p *= Rat::from_integer(2.into());
        e += 1;
    }
    (p == ratio).then_some(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};
    use crate::length::LengthDefault;

    fn z2_setup() -> (Group, WeightFunction, HeightStructure) {
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
        (g, w, h)
    }

    fn parse_walk(g: &Group, text: &[&str]) -> Vec<GroupElement> {
        text.iter().map(|t| g.parse_element(t).unwrap()).collect()
    }

    #[test]
    fn homomorphism_heights() {
        let (g, _, h) = z2_setup();
        assert_eq!(h.height(&g.identity()), 0);
        assert_eq!(h.height(&GroupElement::Vector(vec![3, -5])), 3);
        assert_eq!(h.subgroup_index(), 1);
        assert!(h.is_transitive());
    }

    #[test]
    fn heisenberg_abelianization_height() {
        let g = Group::heisenberg();
        let w = WeightFunction::explicit(
            &g,
            vec![
                (GroupElement::Vector(vec![1, 0, 0]), rat_int(1)),
                (GroupElement::Vector(vec![0, 1, 0]), rat_int(1)),
            ],
            true,
        )
        .unwrap();
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
        assert_eq!(h.height(&GroupElement::Vector(vec![2, 7, -4])), 2);
    }

    fn two_orbit_z() -> (Group, WeightFunction, HeightStructure) {
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
        (g, w, h)
    }

    #[test]
    fn coset_offset_height_equals_coordinate() {
        let (_, _, h) = two_orbit_z();
        for n in -6i64..=6 {
            assert_eq!(h.height(&GroupElement::Vector(vec![n])), n);
        }
        assert_eq!(h.orbit_count(), 2);
        assert_eq!(h.orbit_of(&GroupElement::Vector(vec![5])), 1);
    }

    #[test]
    fn condition_c_failure_is_reported() {
        // A weight with only horizontal steps cannot change a height that
        // reads the second coordinate.
        let g = Group::free_abelian(2);
        let w = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1, 0]), rat_int(1))],
            true,
        )
        .unwrap();
        let res = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![0, 1]),
                lambda: 1,
            },
            &g,
            &w,
            None,
        );
        assert!(matches!(
            res,
            Err(HeightError::NotAHeightFunction { clause: 'c', .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let g1 = Group::free_abelian(1);
        let w1 = WeightFunction::explicit(
            &g1,
            vec![(GroupElement::Vector(vec![1]), rat(1, 2))],
            true,
        )
        .unwrap();
        let h1 = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1]),
                lambda: 1,
            },
            &g1,
            &w1,
            None,
        )
        .unwrap();
        let up = parse_walk(&g1, &["(0)", "(1)", "(2)"]);
        assert_eq!(classify_walk(&h1, &up), WalkClass::Bridge);
        let downw = parse_walk(&g1, &["(0)", "(-1)", "(-2)"]);
        assert_eq!(classify_walk(&h1, &downw), WalkClass::ReversedBridge);

        let (g2, _, h2) = z2_setup();
        let w = parse_walk(&g2, &["(0,0)", "(1,0)", "(1,1)", "(1,2)"]);
        assert_eq!(h2.heights_of(&w), vec![0, 1, 1, 1]);
        assert_eq!(classify_walk(&h2, &w), WalkClass::Bridge);

        let hs = parse_walk(&g2, &["(0,0)", "(1,0)", "(2,0)", "(2,1)", "(1,1)"]);
        assert_eq!(classify_walk(&h2, &hs), WalkClass::HalfSpace);

        let plain = parse_walk(&g2, &["(0,0)", "(0,1)"]);
        assert_eq!(classify_walk(&h2, &plain), WalkClass::Plain);
    }

    #[test]
    fn span_examples() {
        let (g2, _, h2) = z2_setup();
        assert_eq!(span(&h2, &parse_walk(&g2, &["(0,0)"])), 0);
        assert_eq!(
            span(&h2, &parse_walk(&g2, &["(0,0)", "(1,0)", "(1,1)", "(0,1)"])),
            1
        );
        assert_eq!(
            span(
                &h2,
                &parse_walk(&g2, &["(0,0)", "(1,0)", "(2,0)", "(2,1)", "(1,1)"])
            ),
            2
        );
    }

    #[test]
    fn constants_on_transitive_line() {
        let g = Group::free_abelian(1);
        let w = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat(1, 2))],
            true,
        )
        .unwrap();
        let l = LengthFunction::constant_one(&g);
        let h = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1]),
                lambda: 1,
            },
            &g,
            &w,
            None,
        )
        .unwrap();
        let sc = structural_constants(&h, &w, &l, None, 4).unwrap();
        assert_eq!(sc.d, 1);
        assert_eq!(sc.r, 0);
        assert_eq!(sc.theta_min, rat_int(1));
        assert_eq!(sc.phi_nu, rat_int(1));
        assert_eq!(sc.psi, rat(1, 2));
        assert_eq!(sc.a_min, rat_int(1));
        assert_eq!(sc.a_cap, 1);
        assert_eq!(sc.j_cap, 1);
    }

    #[test]
    fn constants_on_jump_columns() {
        let g = Group::free_abelian(2);
        let w = WeightFunction::power_law(&g, PowerLawShape::JumpColumns, 2, rat_int(1)).unwrap();
        let l = LengthFunction::constant_one(&g);
        let h = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1, 0]),
                lambda: 1,
            },
            &g,
            &w,
            Some(&rat(1, 9)),
        )
        .unwrap();
        let sc = structural_constants(&h, &w, &l, Some(&rat(1, 9)), 4).unwrap();
        assert_eq!(sc.d, 1);
        assert_eq!(sc.up_extensions, vec![GroupElement::Vector(vec![1, 0])]);
        assert_eq!(sc.psi, rat_int(1));
        assert_eq!(sc.a_cap, 1);
    }

    #[test]
    fn constants_on_two_orbit_line() {
        let (g, w, h) = two_orbit_z();
        let l = LengthFunction::constant_one(&g);
        let sc = structural_constants(&h, &w, &l, None, 4).unwrap();
        assert_eq!(sc.r, 1);
        // Both connectors are the single upward unit edge.
        assert_eq!(sc.connectors[0][1].steps, vec![GroupElement::Vector(vec![1])]);
        assert_eq!(sc.connectors[1][0].steps, vec![GroupElement::Vector(vec![1])]);
        assert_eq!(sc.theta_min, rat(1, 2));
        assert_eq!(sc.theta_max, rat(1, 2));
        assert_eq!(sc.s_cap, 1);
        assert_eq!(sc.connectors[0][1].delta, 1);
    }

    #[test]
    fn holder_examples() {
        // h(n) = n, len(n) = |n|, phi(n) = 1/n^2: ratio is exactly 1.
        let g = Group::free_abelian(1);
        let w = WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 2, rat_int(1))
            .unwrap();
        let l = LengthFunction::explicit(&g, vec![], LengthDefault::L1Norm).unwrap();
        let h = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1]),
                lambda: 1,
            },
            &g,
            &w,
            Some(&rat(1, 100)),
        )
        .unwrap();
        let rep = check_holder(&w, &l, &h, 1.0, &rat_int(1), Some(&rat(1, 100)));
        assert!(rep.holds_on_checked_set);
        assert_eq!(rep.analytic_all_support, Some(true));
        assert!((rep.worst_ratio - 1.0).abs() < 1e-12);

        // Bounded lengths with unbounded jumps: fails for any C.
        let l1 = LengthFunction::constant_one(&g);
        let rep2 = check_holder(&w, &l1, &h, 1.0, &rat_int(10), None);
        assert_eq!(rep2.analytic_all_support, Some(false));

        // Jump columns with h(m,n) = m and unit lengths: holds with C = 1.
        let g2 = Group::free_abelian(2);
        let w2 = WeightFunction::power_law(&g2, PowerLawShape::JumpColumns, 2, rat_int(1)).unwrap();
        let l2 = LengthFunction::constant_one(&g2);
        let h2 = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1, 0]),
                lambda: 1,
            },
            &g2,
            &w2,
            Some(&rat(1, 9)),
        )
        .unwrap();
        let rep3 = check_holder(&w2, &l2, &h2, 1.0, &rat_int(1), Some(&rat(1, 9)));
        assert!(rep3.holds_on_checked_set);
        assert_eq!(rep3.analytic_all_support, Some(true));
    }
}
