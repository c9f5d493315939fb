//! Exhaustive weighted enumeration of self-avoiding walks under a length
//! budget, binned into aggregate tables by walk class.
//!
//! The enumerator is an exact depth-first search over the truncated step
//! graph. Work is partitioned by (base vertex, first step); partial
//! histograms are merged in task order, so results are bit-identical for
//! any worker count, in both value modes.

use crate::exact::{format_rat, rat_int, rat_pow, rat_to_f64, Rat};
use crate::group::{canonical_key, Group, GroupElement};
use crate::height::{extension_width_cap, HeightError, HeightStructure, WalkClass};
use crate::length::LengthFunction;
use crate::weight::{floor_root, WeightFunction};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnumError {
    #[error("the step set cannot be certified finite; truncate the weight or bound the lengths")]
    InfiniteStepSet,
    #[error("node budget exceeded ({0} nodes)")]
    BudgetOverflow(u64),
    #[error("bin width {width} is below the extension bound A = {a_cap}")]
    BinWidthTooSmall { width: String, a_cap: u32 },
    #[error("the pair (weight, length) is not continuous at 0: {0}")]
    NotContinuousAtZero(String),
    #[error("truncation level {eta} is coarser than the certified level {rho}")]
    ExactnessNotCertified { eta: String, rho: String },
    #[error(transparent)]
    Height(#[from] HeightError),
    #[error("{0}")]
    Unsupported(String),
}

/// Whether aggregate weights are kept as exact rationals or as
/// compensated floating sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueMode {
    Rational,
    Float,
}

/// One admissible step of the truncated graph.
#[derive(Clone, Debug)]
pub struct TableStep {
    pub elem: GroupElement,
    pub weight: Rat,
    pub ell: Rat,
}

/// All steps with positive truncated weight and length within budget,
/// sorted by length then canonical key; closed under inverses.
#[derive(Clone, Debug)]
pub struct StepTable {
    pub steps: Vec<TableStep>,
}

/// Build the step table. The set must be certifiably finite: either the
/// truncation level is positive, the support is finite, or the length
/// function grows with the jump size of the power-law family.
pub fn neighbor_table(
    weight: &WeightFunction,
    eta: Option<&Rat>,
    length: &LengthFunction,
    budget: &Rat,
) -> Result<StepTable, EnumError> {
    let param_cap = length_param_cap(weight, length, budget);
    let mut raw = weight
        .bounded_support(eta, param_cap)
        .ok_or(EnumError::InfiniteStepSet)?;
    // Explicit length tables may shorten far-away elements below the
    // default rule; include their support entries explicitly.
    if let Some(entries) = length.explicit_entries() {
        for (g, _) in entries {
            let w = weight.value(g);
            if w.is_positive()
                && eta.is_none_or(|e| &w >= e)
                && !raw.iter().any(|(x, _)| x == g)
            {
                raw.push((g.clone(), w));
            }
        }
    }
    let mut steps: Vec<TableStep> = raw
        .into_iter()
        .filter_map(|(elem, w)| {
            let ell = length.value_opt(&elem)?;
            (ell <= *budget).then_some(TableStep { elem, weight: w, ell })
        })
        .collect();
    steps.sort_by(|a, b| {
        a.ell
            .cmp(&b.ell)
            .then_with(|| canonical_key(&a.elem).cmp(&canonical_key(&b.elem)))
    });
    Ok(StepTable { steps })
}

/// Jump-size cap implied by `len <= budget` for power-law supports.
fn length_param_cap(
    weight: &WeightFunction,
    length: &LengthFunction,
    budget: &Rat,
) -> Option<u64> {
    if weight.has_finite_support() {
        return None; // no cap needed
    }
    if length.is_inverse_weight() {
        // len(n) = n^e / scale <= budget  <=>  n^e <= budget * scale
        let (e, scale) = weight.power_law_exponent_scale()?;
        return Some(floor_root(&(budget * scale), e));
    }
    if length.has_l1_default() {
        // Off-table lengths equal the jump size.
        let cap = budget.floor().numer().to_u64()?;
        return Some(cap);
    }
    None
}

/// Full enumerator configuration.
#[derive(Clone)]
pub struct EnumConfig {
    pub group: Group,
    pub weight: WeightFunction,
    pub length: LengthFunction,
    pub height: HeightStructure,
    /// Truncation level; `None` enumerates the untruncated weight.
    pub eta: Option<Rat>,
    /// Largest integer bin index.
    pub m_max: u32,
    /// Bin width `c`; must be at least the extension bound `A`.
    pub bin_width: Rat,
    /// Base vertices; defaults to one representative per orbit.
    pub base_vertices: Vec<GroupElement>,
    pub value_mode: ValueMode,
    /// Attach a truncation-exactness certificate and refuse to run when the
    /// configured truncation is coarser than the certified level.
    pub exactness_mode: bool,
    pub node_cap: u64,
    pub threads: usize,
}

impl EnumConfig {
    pub fn new(
        group: Group,
        weight: WeightFunction,
        length: LengthFunction,
        height: HeightStructure,
    ) -> Self {
        EnumConfig {
            group,
            weight,
            length,
            height,
            eta: None,
            m_max: 6,
            bin_width: Rat::one(),
            base_vertices: Vec::new(),
            value_mode: ValueMode::Rational,
            exactness_mode: false,
            node_cap: 1_000_000_000,
            threads: 1,
        }
    }

    /// Walks are enumerated while their length stays strictly below this.
    pub fn budget(&self) -> Rat {
        rat_int(self.m_max as i64) + &self.bin_width
    }

    pub fn bases(&self) -> Vec<GroupElement> {
        if self.base_vertices.is_empty() {
            self.height.orbit_reps()
        } else {
            self.base_vertices.clone()
        }
    }

    /// Unit lengths with unit bins: bins are exact step counts.
    pub fn graph_length_bins(&self) -> bool {
        self.length.is_constant_one() && self.bin_width == Rat::one()
    }

    /// Canonical content digest, used for cache keys and table metadata.
    pub fn digest(&self) -> String {
        let value = serde_json::json!({
            "group": self.group,
            "weight": self.weight.describe(),
            "length": self.length.describe(),
            "height": self.height.describe(),
            "eta": self.eta.as_ref().map(format_rat),
            "m_max": self.m_max,
            "bin_width": format_rat(&self.bin_width),
            "bases": self.bases().iter().map(|b| b.to_string()).collect::<Vec<_>>(),
            "value_mode": self.value_mode,
            "exactness_mode": self.exactness_mode,
        });
        let mut hasher = Sha256::new();
        hasher.update(value.to_string().as_bytes());
        hex::encode(hasher.finalize())
    }
}

/// Aggregated weight in the configured value mode. Floating sums are
/// compensated and merged in a fixed order, so they are reproducible.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightAcc {
    Exact(Rat),
    Float { sum: f64, comp: f64 },
}

impl WeightAcc {
    pub fn zero(mode: ValueMode) -> Self {
        match mode {
            ValueMode::Rational => WeightAcc::Exact(Rat::zero()),
            ValueMode::Float => WeightAcc::Float { sum: 0.0, comp: 0.0 },
        }
    }

    fn add_walk(&mut self, w: &WalkWeight) {
        match (self, w) {
            (WeightAcc::Exact(acc), WalkWeight::Exact(x)) => *acc += x,
            (WeightAcc::Float { sum, comp }, WalkWeight::Float(x)) => {
                kahan_add(sum, comp, *x);
            }
            _ => panic!("mixed value modes"),
        }
    }

    fn merge(&mut self, other: &WeightAcc) {
        match (self, other) {
            (WeightAcc::Exact(a), WeightAcc::Exact(b)) => *a += b,
            (WeightAcc::Float { sum, comp }, WeightAcc::Float { sum: s2, comp: c2 }) => {
                kahan_add(sum, comp, *s2);
                kahan_add(sum, comp, -*c2);
            }
            _ => panic!("mixed value modes"),
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            WeightAcc::Exact(r) => Some(r),
            WeightAcc::Float { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            WeightAcc::Exact(r) => rat_to_f64(r),
            WeightAcc::Float { sum, comp } => sum - comp,
        }
    }
}

fn kahan_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

#[derive(Clone, Debug)]
enum WalkWeight {
    Exact(Rat),
    Float(f64),
}

/// Count and aggregate weight of one (length, class) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Bucket {
    pub count: u64,
    pub weight: WeightAcc,
}

impl Bucket {
    fn new(mode: ValueMode) -> Self {
        Bucket {
            count: 0,
            weight: WeightAcc::zero(mode),
        }
    }
}

/// Per-length histogram cell covering the three nested classes.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthBucket {
    pub sigma: Bucket,
    pub half: Bucket,
    pub bridge: Bucket,
}

impl LengthBucket {
    fn new(mode: ValueMode) -> Self {
        LengthBucket {
            sigma: Bucket::new(mode),
            half: Bucket::new(mode),
            bridge: Bucket::new(mode),
        }
    }
}

/// Walk classes aggregated by the table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AggClass {
    Sigma,
    HalfSpace,
    Bridge,
}

/// Exact-length histogram for one base vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseHist {
    pub base: GroupElement,
    pub map: BTreeMap<Rat, LengthBucket>,
}

/// Truncation-exactness certificate: any step with weight in `(0, rho)` has
/// length above `m + width`, so truncating below `rho` cannot change any
/// bin up to `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationCertificate {
    pub rho: Rat,
    pub m: u32,
    pub width: Rat,
    /// Steps of the budgeted graph re-checked against `rho`.
    pub checked_steps: usize,
    pub note: String,
}

/// Binned aggregate weights and counts, backed by an exact-length histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateTable {
    pub bases: Vec<BaseHist>,
    pub m_max: u32,
    pub bin_width: Rat,
    pub value_mode: ValueMode,
    /// Unit lengths and unit bins: bin m holds exactly the m-step walks.
    pub graph_length_bins: bool,
    pub config_digest: String,
    pub node_count: u64,
    pub certificate: Option<TruncationCertificate>,
}

impl AggregateTable {
    pub fn base_count(&self) -> usize {
        self.bases.len()
    }

    fn class_bucket<'a>(cell: &'a LengthBucket, class: AggClass) -> &'a Bucket {
        match class {
            AggClass::Sigma => &cell.sigma,
            AggClass::HalfSpace => &cell.half,
            AggClass::Bridge => &cell.bridge,
        }
    }

    /// Count and weight over lengths in `[lo, hi)`.
    pub fn range(&self, base: usize, class: AggClass, lo: &Rat, hi: &Rat) -> Bucket {
        let mut out = Bucket::new(self.value_mode);
        for (_, cell) in self.bases[base].map.range(lo.clone()..hi.clone()) {
            let b = Self::class_bucket(cell, class);
            out.count += b.count;
            out.weight.merge(&b.weight);
        }
        out
    }

    /// Bin `[m, m + width)` with a caller-chosen width.
    pub fn bin_custom(&self, base: usize, class: AggClass, m: &Rat, width: &Rat) -> Bucket {
        self.range(base, class, m, &(m + width))
    }

    /// Bin `[m, m + c)` with the configured width.
    pub fn bin(&self, base: usize, class: AggClass, m: u32) -> Bucket {
        let lo = rat_int(m as i64);
        self.bin_custom(base, class, &lo, &self.bin_width.clone())
    }

    /// Exact sigma weight of a bin (rational mode only), read from base 0.
    pub fn sigma_bin_rat(&self, m: u32) -> Rat {
        self.bin(0, AggClass::Sigma, m)
            .weight
            .as_rat()
            .expect("rational mode required")
            .clone()
    }

    pub fn sigma_bin_count(&self, m: u32) -> u64 {
        self.bin(0, AggClass::Sigma, m).count
    }

    /// Minimum bridge-bin weight over base vertices (the infimum aggregate).
    pub fn bridge_bin_min_rat(&self, m: u32) -> Rat {
        (0..self.base_count())
            .map(|b| {
                self.bin(b, AggClass::Bridge, m)
                    .weight
                    .as_rat()
                    .expect("rational mode required")
                    .clone()
            })
            .min()
            .expect("at least one base")
    }

    /// Minimum bridge weight over bases for a custom bin.
    pub fn bridge_bin_min_custom_rat(&self, m: &Rat, width: &Rat) -> Rat {
        (0..self.base_count())
            .map(|b| {
                self.bin_custom(b, AggClass::Bridge, m, width)
                    .weight
                    .as_rat()
                    .expect("rational mode required")
                    .clone()
            })
            .min()
            .expect("at least one base")
    }

    pub fn to_dto(&self) -> AggregateTableDto {
        AggregateTableDto {
            schema_version: 1,
            config_digest: self.config_digest.clone(),
            m_max: self.m_max,
            bin_width: format_rat(&self.bin_width),
            value_mode: self.value_mode,
            graph_length_bins: self.graph_length_bins,
            node_count: self.node_count,
            truncation_certificate: self.certificate.as_ref().map(|c| TruncationCertificateDto {
                rho: format_rat(&c.rho),
                m: c.m,
                width: format_rat(&c.width),
                checked_steps: c.checked_steps,
                note: c.note.clone(),
            }),
            entries: self
                .bases
                .iter()
                .flat_map(|bh| {
                    bh.map.iter().map(|(ell, cell)| HistEntryDto {
                        base: bh.base.to_string(),
                        ell: format_rat(ell),
                        sigma: BucketDto::from(&cell.sigma),
                        half: BucketDto::from(&cell.half),
                        bridge: BucketDto::from(&cell.bridge),
                    })
                })
                .collect(),
        }
    }

    pub fn from_dto(dto: &AggregateTableDto, group: &Group) -> Result<AggregateTable, String> {
        let mode = dto.value_mode;
        let mut bases: Vec<BaseHist> = Vec::new();
        for e in &dto.entries {
            let base = group.parse_element(&e.base).map_err(|er| er.to_string())?;
            let ell = crate::exact::parse_rat(&e.ell)?;
            if bases.last().map(|b: &BaseHist| &b.base) != Some(&base) {
                bases.push(BaseHist {
                    base: base.clone(),
                    map: BTreeMap::new(),
                });
            }
            let cell = LengthBucket {
                sigma: e.sigma.to_bucket(mode)?,
                half: e.half.to_bucket(mode)?,
                bridge: e.bridge.to_bucket(mode)?,
            };
            bases.last_mut().unwrap().map.insert(ell, cell);
        }
        Ok(AggregateTable {
            bases,
            m_max: dto.m_max,
            bin_width: crate::exact::parse_rat(&dto.bin_width)?,
            value_mode: mode,
            graph_length_bins: dto.graph_length_bins,
            config_digest: dto.config_digest.clone(),
            node_count: dto.node_count,
            certificate: match &dto.truncation_certificate {
                Some(c) => Some(TruncationCertificate {
                    rho: crate::exact::parse_rat(&c.rho)?,
                    m: c.m,
                    width: crate::exact::parse_rat(&c.width)?,
                    checked_steps: c.checked_steps,
                    note: c.note.clone(),
                }),
                None => None,
            },
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BucketDto {
    pub count: u64,
    pub weight_num: Option<String>,
    pub weight_den: Option<String>,
    pub weight_float: f64,
}

impl BucketDto {
    fn from(b: &Bucket) -> Self {
        let (num, den) = match b.weight.as_rat() {
            Some(r) => (Some(r.numer().to_string()), Some(r.denom().to_string())),
            None => (None, None),
        };
        BucketDto {
            count: b.count,
            weight_num: num,
            weight_den: den,
            weight_float: b.weight.to_f64(),
        }
    }

    fn to_bucket(&self, mode: ValueMode) -> Result<Bucket, String> {
        let weight = match mode {
            ValueMode::Rational => {
                let num = self.weight_num.as_ref().ok_or("missing numerator")?;
                let den = self.weight_den.as_ref().ok_or("missing denominator")?;
                WeightAcc::Exact(crate::exact::parse_rat(&format!("{num}/{den}"))?)
            }
            ValueMode::Float => WeightAcc::Float {
                sum: self.weight_float,
                comp: 0.0,
            },
        };
        Ok(Bucket {
            count: self.count,
            weight,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationCertificateDto {
    pub rho: String,
    pub m: u32,
    pub width: String,
    pub checked_steps: usize,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HistEntryDto {
    pub base: String,
    pub ell: String,
    pub sigma: BucketDto,
    pub half: BucketDto,
    pub bridge: BucketDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateTableDto {
    pub schema_version: u32,
    pub config_digest: String,
    pub m_max: u32,
    pub bin_width: String,
    pub value_mode: ValueMode,
    pub graph_length_bins: bool,
    pub node_count: u64,
    pub truncation_certificate: Option<TruncationCertificateDto>,
    pub entries: Vec<HistEntryDto>,
}

/// Borrowed view of one enumerated walk, streamed to sinks.
pub struct WalkView<'a> {
    pub base_index: usize,
    pub vertices: &'a [GroupElement],
    pub steps: &'a [GroupElement],
    pub heights: &'a [i64],
    pub ell: &'a Rat,
    pub weight_rat: Option<&'a Rat>,
    pub weight_f64: f64,
    pub class: WalkClass,
}

/// Streaming consumer of enumerated walks.
pub trait WalkSink {
    fn visit(&mut self, walk: &WalkView<'_>);
}

struct AnnotatedStep {
    elem: GroupElement,
    weight: Rat,
    weight_f: f64,
    ell: Rat,
    dh: Vec<i64>,
    next_orbit: Vec<usize>,
}

struct Dfs<'a> {
    group: &'a Group,
    steps: &'a [AnnotatedStep],
    budget: &'a Rat,
    mode: ValueMode,
    // parallel stacks indexed by depth
    vertices: Vec<GroupElement>,
    step_elems: Vec<GroupElement>,
    heights: Vec<i64>,
    tail_min: Vec<i64>,
    tail_max: Vec<i64>,
    orbits: Vec<usize>,
    ells: Vec<Rat>,
    weights: Vec<WalkWeight>,
    visited: HashSet<GroupElement>,
    nodes: u64,
    task_cap: u64,
    global_nodes: &'a AtomicU64,
    global_cap: u64,
}

enum DfsOutcome {
    Done,
    Overflow,
}

impl<'a> Dfs<'a> {
    fn classify_current(&self) -> WalkClass {
        let depth = self.heights.len() - 1;
        if depth == 0 {
            return WalkClass::Bridge; // zero-step walk, vacuously a bridge
        }
        let h0 = self.heights[0];
        let hn = self.heights[depth];
        let tmin = self.tail_min[depth];
        let tmax = self.tail_max[depth];
        if h0 < tmin {
            if hn == tmax {
                WalkClass::Bridge
            } else {
                WalkClass::HalfSpace
            }
        } else if tmax < h0 && hn == tmin {
            WalkClass::ReversedBridge
        } else {
            WalkClass::Plain
        }
    }

    fn record(
        &self,
        hist: &mut BTreeMap<Rat, LengthBucket>,
        base_index: usize,
        sink: &mut Option<&mut dyn WalkSink>,
    ) {
        let depth = self.heights.len() - 1;
        let class = self.classify_current();
        let ell = &self.ells[depth];
        let ww = &self.weights[depth];
        let cell = hist
            .entry(ell.clone())
            .or_insert_with(|| LengthBucket::new(self.mode));
        cell.sigma.count += 1;
        cell.sigma.weight.add_walk(ww);
        if matches!(class, WalkClass::Bridge | WalkClass::HalfSpace) {
            cell.half.count += 1;
            cell.half.weight.add_walk(ww);
        }
        if matches!(class, WalkClass::Bridge) {
            cell.bridge.count += 1;
            cell.bridge.weight.add_walk(ww);
        }
        if let Some(s) = sink {
            let (wr, wf) = match ww {
                WalkWeight::Exact(r) => (Some(r), rat_to_f64(r)),
                WalkWeight::Float(f) => (None, *f),
            };
            s.visit(&WalkView {
                base_index,
                vertices: &self.vertices,
                steps: &self.step_elems,
                heights: &self.heights,
                ell,
                weight_rat: wr,
                weight_f64: wf,
                class,
            });
        }
    }

    fn extend(
        &mut self,
        hist: &mut BTreeMap<Rat, LengthBucket>,
        base_index: usize,
        sink: &mut Option<&mut dyn WalkSink>,
    ) -> DfsOutcome {
        let depth = self.heights.len() - 1;
        let steps = self.steps;
        for step in steps {
            let new_ell = &self.ells[depth] + &step.ell;
            if new_ell >= *self.budget {
                continue;
            }
            let orbit = self.orbits[depth];
            let next = self.group.multiply(&self.vertices[depth], &step.elem);
            if self.visited.contains(&next) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.task_cap {
                return DfsOutcome::Overflow;
            }
            if self.nodes % 65_536 == 0 {
                let total = self.global_nodes.fetch_add(65_536, Ordering::Relaxed);
                if total > self.global_cap {
                    return DfsOutcome::Overflow;
                }
            }
            let h = self.heights[depth] + step.dh[orbit];
            self.visited.insert(next.clone());
            self.vertices.push(next);
            self.step_elems.push(step.elem.clone());
            self.heights.push(h);
            if depth == 0 {
                self.tail_min.push(h);
                self.tail_max.push(h);
            } else {
                self.tail_min.push(self.tail_min[depth].min(h));
                self.tail_max.push(self.tail_max[depth].max(h));
            }
            self.orbits.push(step.next_orbit[orbit]);
            self.ells.push(new_ell);
            let w = match (&self.weights[depth], self.mode) {
                (WalkWeight::Exact(r), _) => WalkWeight::Exact(r * &step.weight),
                (WalkWeight::Float(f), _) => WalkWeight::Float(f * step.weight_f),
            };
            self.weights.push(w);

            self.record(hist, base_index, sink);
            let outcome = self.extend(hist, base_index, sink);

            let popped = self.vertices.pop().unwrap();
            self.visited.remove(&popped);
            self.step_elems.pop();
            self.heights.pop();
            self.tail_min.pop();
            self.tail_max.pop();
            self.orbits.pop();
            self.ells.pop();
            self.weights.pop();

            if matches!(outcome, DfsOutcome::Overflow) {
                return DfsOutcome::Overflow;
            }
        }
        DfsOutcome::Done
    }
}

fn annotate(table: &StepTable, height: &HeightStructure) -> Vec<AnnotatedStep> {
    let orbit_count = height.orbit_count();
    table
        .steps
        .iter()
        .map(|s| AnnotatedStep {
            elem: s.elem.clone(),
            weight: s.weight.clone(),
            weight_f: rat_to_f64(&s.weight),
            ell: s.ell.clone(),
            dh: (0..orbit_count)
                .map(|o| height.step_height_delta(o, &s.elem))
                .collect(),
            next_orbit: (0..orbit_count)
                .map(|o| height.step_orbit(o, &s.elem))
                .collect(),
        })
        .collect()
}

fn prepare(cfg: &EnumConfig) -> Result<(Vec<AnnotatedStep>, Option<TruncationCertificate>), EnumError> {
    let a_cap = extension_width_cap(&cfg.height, &cfg.weight, &cfg.length, cfg.eta.as_ref())?;
    if cfg.bin_width < rat_int(a_cap as i64) {
        return Err(EnumError::BinWidthTooSmall {
            width: format_rat(&cfg.bin_width),
            a_cap,
        });
    }
    let certificate = if cfg.exactness_mode {
        let cert =
            certify_truncation_exactness(&cfg.weight, &cfg.length, cfg.m_max, &cfg.bin_width)?;
        if let Some(eta) = &cfg.eta {
            if *eta > cert.rho {
                return Err(EnumError::ExactnessNotCertified {
                    eta: format_rat(eta),
                    rho: format_rat(&cert.rho),
                });
            }
        }
        Some(cert)
    } else {
        None
    };
    let table = neighbor_table(&cfg.weight, cfg.eta.as_ref(), &cfg.length, &cfg.budget())?;
    Ok((annotate(&table, &cfg.height), certificate))
}

fn run_task(
    cfg: &EnumConfig,
    steps: &[AnnotatedStep],
    base: &GroupElement,
    base_index: usize,
    first_step: usize,
    global_nodes: &AtomicU64,
    sink: &mut Option<&mut dyn WalkSink>,
) -> Result<(BTreeMap<Rat, LengthBucket>, u64), EnumError> {
    let mut hist = BTreeMap::new();
    let step = &steps[first_step];
    if step.ell >= cfg.budget() {
        return Ok((hist, 0));
    }
    let base_orbit = cfg.height.orbit_of(base);
    let first_vertex = cfg.group.multiply(base, &step.elem);
    let h0 = cfg.height.height(base);
    let h1 = h0 + step.dh[base_orbit];
    let w = match cfg.value_mode {
        ValueMode::Rational => WalkWeight::Exact(step.weight.clone()),
        ValueMode::Float => WalkWeight::Float(step.weight_f),
    };
    let budget = cfg.budget();
    let mut dfs = Dfs {
        group: &cfg.group,
        steps,
        budget: &budget,
        mode: cfg.value_mode,
        vertices: vec![base.clone(), first_vertex.clone()],
        step_elems: vec![step.elem.clone()],
        heights: vec![h0, h1],
        tail_min: vec![i64::MAX, h1],
        tail_max: vec![i64::MIN, h1],
        orbits: vec![base_orbit, step.next_orbit[base_orbit]],
        ells: vec![Rat::zero(), step.ell.clone()],
        weights: vec![
            match cfg.value_mode {
                ValueMode::Rational => WalkWeight::Exact(Rat::one()),
                ValueMode::Float => WalkWeight::Float(1.0),
            },
            w,
        ],
        visited: HashSet::from([base.clone(), first_vertex]),
        nodes: 1,
        task_cap: cfg.node_cap,
        global_nodes,
        global_cap: cfg.node_cap.saturating_mul(4),
    };
    // The length prefix for tail_min/tail_max at depth 0 is never read.
    dfs.record(&mut hist, base_index, sink);
    match dfs.extend(&mut hist, base_index, sink) {
        DfsOutcome::Done => Ok((hist, dfs.nodes)),
        DfsOutcome::Overflow => Err(EnumError::BudgetOverflow(dfs.nodes)),
    }
}

fn merge_hist(into: &mut BTreeMap<Rat, LengthBucket>, from: BTreeMap<Rat, LengthBucket>, mode: ValueMode) {
    for (k, v) in from {
        let cell = into.entry(k).or_insert_with(|| LengthBucket::new(mode));
        cell.sigma.count += v.sigma.count;
        cell.sigma.weight.merge(&v.sigma.weight);
        cell.half.count += v.half.count;
        cell.half.weight.merge(&v.half.weight);
        cell.bridge.count += v.bridge.count;
        cell.bridge.weight.merge(&v.bridge.weight);
    }
}

/// The empty walk contributes weight one at length zero to every class.
fn empty_walk_cell(mode: ValueMode) -> LengthBucket {
    let mut cell = LengthBucket::new(mode);
    let one = match mode {
        ValueMode::Rational => WalkWeight::Exact(Rat::one()),
        ValueMode::Float => WalkWeight::Float(1.0),
    };
    for b in [&mut cell.sigma, &mut cell.half, &mut cell.bridge] {
        b.count = 1;
        b.weight.add_walk(&one);
    }
    cell
}

/// Exhaustive enumeration into an aggregate table; deterministic for any
/// thread count.
pub fn enumerate_aggregate(cfg: &EnumConfig) -> Result<AggregateTable, EnumError> {
    let (steps, certificate) = prepare(cfg)?;
    let bases = cfg.bases();
    let tasks: Vec<(usize, usize)> = (0..bases.len())
        .flat_map(|b| (0..steps.len()).map(move |s| (b, s)))
        .collect();
    let threads = cfg.threads.max(1);
    let global_nodes = AtomicU64::new(0);
    let results: Mutex<Vec<Option<Result<(BTreeMap<Rat, LengthBucket>, u64), EnumError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for t in 0..threads {
            let tasks = &tasks;
            let bases = &bases;
            let steps = &steps;
            let results = &results;
            let global_nodes = &global_nodes;
            scope.spawn(move || {
                for (idx, (b, s)) in tasks.iter().enumerate() {
                    if idx % threads != t {
                        continue;
                    }
                    let mut no_sink: Option<&mut dyn WalkSink> = None;
                    let out = run_task(cfg, steps, &bases[*b], *b, *s, global_nodes, &mut no_sink);
                    results.lock().unwrap()[idx] = Some(out);
                }
            });
        }
    });

    let results = results.into_inner().unwrap();
    let mut hists: Vec<BTreeMap<Rat, LengthBucket>> = bases
        .iter()
        .map(|_| BTreeMap::from([(Rat::zero(), empty_walk_cell(cfg.value_mode))]))
        .collect();
    let mut node_count = bases.len() as u64; // the empty walks
    for (idx, out) in results.into_iter().enumerate() {
        let (hist, nodes) = out.expect("task not run")?;
        node_count += nodes;
        merge_hist(&mut hists[tasks[idx].0], hist, cfg.value_mode);
    }
    if node_count > cfg.node_cap {
        return Err(EnumError::BudgetOverflow(node_count));
    }
    Ok(AggregateTable {
        bases: bases
            .into_iter()
            .zip(hists)
            .map(|(base, map)| BaseHist { base, map })
            .collect(),
        m_max: cfg.m_max,
        bin_width: cfg.bin_width.clone(),
        value_mode: cfg.value_mode,
        graph_length_bins: cfg.graph_length_bins(),
        config_digest: cfg.digest(),
        node_count,
        certificate,
    })
}

/// Single-threaded enumeration streaming every walk (including the empty
/// walk at each base) through the sink.
pub fn enumerate_with_sink(
    cfg: &EnumConfig,
    sink: &mut dyn WalkSink,
) -> Result<AggregateTable, EnumError> {
    let (steps, certificate) = prepare(cfg)?;
    let bases = cfg.bases();
    let global_nodes = AtomicU64::new(0);
    let mut hists = Vec::new();
    let mut node_count = 0u64;
    let zero = Rat::zero();
    let one = Rat::one();
    for (b, base) in bases.iter().enumerate() {
        let mut hist = BTreeMap::from([(Rat::zero(), empty_walk_cell(cfg.value_mode))]);
        node_count += 1;
        let h0 = cfg.height.height(base);
        sink.visit(&WalkView {
            base_index: b,
            vertices: std::slice::from_ref(base),
            steps: &[],
            heights: &[h0],
            ell: &zero,
            weight_rat: matches!(cfg.value_mode, ValueMode::Rational).then_some(&one),
            weight_f64: 1.0,
            class: WalkClass::Bridge,
        });
        for s in 0..steps.len() {
            let mut sink_opt: Option<&mut dyn WalkSink> = Some(sink);
            let (h, nodes) = run_task(cfg, &steps, base, b, s, &global_nodes, &mut sink_opt)?;
            node_count += nodes;
            merge_hist(&mut hist, h, cfg.value_mode);
        }
        hists.push(hist);
    }
    if node_count > cfg.node_cap {
        return Err(EnumError::BudgetOverflow(node_count));
    }
    Ok(AggregateTable {
        bases: bases
            .into_iter()
            .zip(hists)
            .map(|(base, map)| BaseHist { base, map })
            .collect(),
        m_max: cfg.m_max,
        bin_width: cfg.bin_width.clone(),
        value_mode: cfg.value_mode,
        graph_length_bins: cfg.graph_length_bins(),
        config_digest: cfg.digest(),
        node_count,
        certificate,
    })
}

/// Certify that truncating strictly below `rho` cannot change any bin up to
/// `m`: every step with weight in `(0, rho)` has length above `m + width`.
pub fn certify_truncation_exactness(
    weight: &WeightFunction,
    length: &LengthFunction,
    m: u32,
    width: &Rat,
) -> Result<TruncationCertificate, EnumError> {
    let horizon = rat_int(m as i64) + width;
    let (rho, note) = if let Some(min) = weight.min_value() {
        (
            min / rat_int(2),
            "finite support: any level below the least value is vacuously exact".to_string(),
        )
    } else if length.is_inverse_weight() {
        (
            horizon.clone().recip(),
            format!("inverse-weight lengths: weight below 1/{} forces length above it", format_rat(&horizon)),
        )
    } else if length.has_l1_default()
        && length.explicit_entries().is_some_and(|e| e.is_empty())
    {
        let (e, scale) = weight
            .power_law_exponent_scale()
            .ok_or_else(|| EnumError::Unsupported("power-law family expected".into()))?;
        (
            scale / rat_pow(&horizon, e),
            format!(
                "power-law decay: weight below scale/({})^{e} forces jump size above {}",
                format_rat(&horizon),
                format_rat(&horizon)
            ),
        )
    } else {
        return Err(EnumError::NotContinuousAtZero(
            "lengths do not grow as the weight vanishes".into(),
        ));
    };

    // Proof of emptiness at the budgeted scale: every step with length at
    // most m + width keeps weight at least rho.
    let table = neighbor_table(weight, None, length, &horizon)?;
    for s in &table.steps {
        if s.weight < rho {
            return Err(EnumError::Unsupported(format!(
                "certificate violated at step {} (weight {})",
                s.elem,
                format_rat(&s.weight)
            )));
        }
    }
    Ok(TruncationCertificate {
        rho,
        m,
        width: width.clone(),
        checked_steps: table.steps.len(),
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::group::HomomorphismSpec;
    use crate::height::{make_height, HeightSpec};
    use crate::length::LengthDefault;
    use crate::weight::PowerLawShape;

    fn z1_nn_config() -> EnumConfig {
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
        EnumConfig::new(g, w, l, h)
    }

    fn z2_nn_config() -> EnumConfig {
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
        EnumConfig::new(g, w, l, h)
    }

    #[test]
    fn neighbor_table_examples() {
        let cfg = z1_nn_config();
        let t = neighbor_table(&cfg.weight, None, &cfg.length, &rat_int(10)).unwrap();
        let elems: Vec<String> = t.steps.iter().map(|s| s.elem.to_string()).collect();
        assert_eq!(elems, vec!["(-1)", "(1)"]);

        // Harmonic weight with jump-size lengths and budget 3.
        let g = Group::free_abelian(1);
        let w = WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 1, rat_int(1))
            .unwrap();
        let l = LengthFunction::explicit(&g, vec![], LengthDefault::L1Norm).unwrap();
        let t = neighbor_table(&w, None, &l, &rat_int(3)).unwrap();
        let mut sizes: Vec<i64> = t
            .steps
            .iter()
            .map(|s| match &s.elem {
                GroupElement::Vector(v) => v[0],
                _ => unreachable!(),
            })
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![-3, -2, -1, 1, 2, 3]);

        // Same weight with unit lengths: the step set is infinite.
        let l1 = LengthFunction::constant_one(&g);
        assert_eq!(
            neighbor_table(&w, None, &l1, &rat_int(3)).unwrap_err(),
            EnumError::InfiniteStepSet
        );

        // Jump columns truncated at 1/9: jumps up to 3 plus horizontals.
        let g2 = Group::free_abelian(2);
        let jc = WeightFunction::power_law(&g2, PowerLawShape::JumpColumns, 2, rat_int(1)).unwrap();
        let l2 = LengthFunction::constant_one(&g2);
        let t = neighbor_table(&jc, Some(&rat(1, 9)), &l2, &rat_int(100)).unwrap();
        assert_eq!(t.steps.len(), 8);
        // Closed under inverses.
        for s in &t.steps {
            let inv = g2.inverse(&s.elem);
            assert!(t.steps.iter().any(|x| x.elem == inv));
        }
    }

    #[test]
    fn line_counts_and_weights() {
        let mut cfg = z1_nn_config();
        cfg.m_max = 6;
        let table = enumerate_aggregate(&cfg).unwrap();
        for m in 1..=6u32 {
            assert_eq!(table.sigma_bin_count(m), 2);
            assert_eq!(
                table.sigma_bin_rat(m),
                rat_int(2) * rat_pow(&rat(1, 2), m)
            );
            // One of the two walks is the rightward bridge.
            assert_eq!(table.bin(0, AggClass::Bridge, m).count, 1);
        }
        assert_eq!(table.sigma_bin_count(0), 1);
    }

    #[test]
    fn square_lattice_counts() {
        let mut cfg = z2_nn_config();
        cfg.m_max = 4;
        let table = enumerate_aggregate(&cfg).unwrap();
        assert_eq!(
            (1..=4).map(|m| table.sigma_bin_count(m)).collect::<Vec<_>>(),
            vec![4, 12, 36, 100]
        );
        assert_eq!(table.bin(0, AggClass::Bridge, 1).count, 1);
        assert_eq!(table.bin(0, AggClass::Bridge, 2).count, 3);
        // Class chain: bridge <= half-space <= sigma.
        for m in 1..=4u32 {
            let b = table.bin(0, AggClass::Bridge, m);
            let h = table.bin(0, AggClass::HalfSpace, m);
            let s = table.bin(0, AggClass::Sigma, m);
            assert!(b.count <= h.count && h.count <= s.count);
        }
    }

    #[test]
    fn thread_count_does_not_change_tables() {
        let mut cfg = z2_nn_config();
        cfg.m_max = 5;
        let one = enumerate_aggregate(&cfg).unwrap();
        cfg.threads = 3;
        let three = enumerate_aggregate(&cfg).unwrap();
        assert_eq!(one, three);

        cfg.value_mode = ValueMode::Float;
        cfg.threads = 1;
        let f1 = enumerate_aggregate(&cfg).unwrap();
        cfg.threads = 8;
        let f8 = enumerate_aggregate(&cfg).unwrap();
        assert_eq!(f1, f8);
    }

    #[test]
    fn node_budget_overflow() {
        let mut cfg = z2_nn_config();
        cfg.m_max = 6;
        cfg.node_cap = 100;
        assert!(matches!(
            enumerate_aggregate(&cfg),
            Err(EnumError::BudgetOverflow(_))
        ));
    }

    #[test]
    fn truncation_certificates() {
        let g = Group::free_abelian(1);
        let w = WeightFunction::power_law(&g, PowerLawShape::SingleAxis { axis: 0 }, 2, rat_int(1))
            .unwrap();
        let l = LengthFunction::explicit(&g, vec![], LengthDefault::L1Norm).unwrap();
        // m + c = 10 gives rho = 1/100.
        let cert = certify_truncation_exactness(&w, &l, 9, &Rat::one()).unwrap();
        assert_eq!(cert.rho, rat(1, 100));

        // Explicit weights are vacuously exact below half the least value.
        let e = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat(1, 2))],
            true,
        )
        .unwrap();
        let lc = LengthFunction::constant_one(&g);
        let cert = certify_truncation_exactness(&e, &lc, 9, &Rat::one()).unwrap();
        assert_eq!(cert.rho, rat(1, 4));

        // Bounded lengths with unbounded support are not continuous at 0.
        assert!(matches!(
            certify_truncation_exactness(&w, &lc, 9, &Rat::one()),
            Err(EnumError::NotContinuousAtZero(_))
        ));
    }

    #[test]
    fn bin_width_must_cover_extensions() {
        let mut cfg = z1_nn_config();
        cfg.bin_width = rat(1, 2);
        assert!(matches!(
            enumerate_aggregate(&cfg),
            Err(EnumError::BinWidthTooSmall { .. })
        ));
    }

    #[test]
    fn dto_round_trip() {
        let mut cfg = z2_nn_config();
        cfg.m_max = 3;
        let table = enumerate_aggregate(&cfg).unwrap();
        let dto = table.to_dto();
        let text = serde_json::to_string(&dto).unwrap();
        let back: AggregateTableDto = serde_json::from_str(&text).unwrap();
        let restored = AggregateTable::from_dto(&back, &cfg.group).unwrap();
        assert_eq!(restored, table);
    }
}
