//! Config file schema and its elaboration into core objects.
//!
//! Configs are TOML with sections `[group]`, `[weight]`, `[length]`,
//! `[height]`, `[run]` plus command-specific sections. Unknown keys are
//! rejected. Every value that feeds exact arithmetic is written as a
//! rational string ("1/2", "3").

use anyhow::{anyhow, bail, Context, Result};
use bridgewalk::exact::{parse_rat, Rat};
use bridgewalk::height::extension_width_cap;
use bridgewalk::length::LengthDefault;
use bridgewalk::weight::PowerLawShape;
use bridgewalk::{
    make_height, structural_constants, EnumConfig, Group, GroupElement, HeightSpec,
    HeightStructure, HomomorphismSpec, LengthFunction, StructuralConstants, ValueMode,
    WeightFunction,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub group: GroupSection,
    pub weight: WeightSection,
    #[serde(default)]
    pub length: LengthSection,
    pub height: HeightSection,
    #[serde(default)]
    pub run: RunSection,
    pub holder: Option<HolderSection>,
    pub continuity: Option<ContinuitySection>,
    pub truncation: Option<TruncationSection>,
    pub surgery: Option<SurgerySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub kind: String,
    pub rank: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    pub kind: String,
    /// Add the inverse of each listed element automatically.
    #[serde(default = "default_true")]
    pub symmetrize: bool,
    #[serde(default)]
    pub entries: Vec<(String, String)>,
    pub shape: Option<String>,
    /// 1-based axis index for the single-axis power law.
    pub axis: Option<usize>,
    pub exponent: Option<u32>,
    pub scale: Option<String>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthSection {
    pub kind: String,
    #[serde(default)]
    pub entries: Vec<(String, String)>,
    pub default: Option<LengthDefaultSection>,
}

impl Default for LengthSection {
    fn default() -> Self {
        LengthSection {
            kind: "constant_one".into(),
            entries: Vec::new(),
            default: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LengthDefaultSection {
    pub kind: String,
    pub value: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightSection {
    pub mode: String,
    #[serde(default)]
    pub coefficients: Vec<i64>,
    #[serde(default = "default_lambda")]
    pub lambda: u64,
    pub modulus: Option<usize>,
    #[serde(default)]
    pub class_coefficients: Vec<i64>,
    #[serde(default)]
    pub reps: Vec<String>,
    #[serde(default)]
    pub f_coefficients: Vec<i64>,
    #[serde(default)]
    pub offsets: Vec<i64>,
    #[serde(default = "default_search_bound")]
    pub connector_search_bound: usize,
}

fn default_lambda() -> u64 {
    1
}

fn default_search_bound() -> usize {
    4
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Truncation level; omit for the built-in default, set
    /// `no_truncation = true` to force the untruncated weight.
    pub eta: Option<String>,
    #[serde(default)]
    pub no_truncation: bool,
    pub m_max: Option<u32>,
    pub bin_width: Option<String>,
    #[serde(default)]
    pub base_vertices: Vec<String>,
    pub value_mode: Option<String>,
    #[serde(default)]
    pub exactness_mode: bool,
    pub node_cap: Option<u64>,
    pub out_dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSection {
    pub epsilon: f64,
    pub c: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuitySection {
    pub m_max: Option<u32>,
    pub other_weight: WeightSection,
    #[serde(default)]
    pub other_length: LengthSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    pub eta_list: Vec<String>,
    pub m: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurgerySection {
    /// Walk file: one walk per line as whitespace-separated steps in
    /// generator notation; `#` starts a comment.
    pub walks: String,
    /// Base vertex for every walk (default: the identity).
    pub base: Option<String>,
}

/// Everything a command needs, fully elaborated and validated.
pub struct Resolved {
    pub cfg: EnumConfig,
    pub constants: StructuralConstants,
    pub holder: Option<(f64, Rat)>,
    pub out_dir: PathBuf,
    pub continuity: Option<(WeightFunction, LengthFunction, u32)>,
    pub truncation: Option<(Vec<Rat>, u32)>,
    pub surgery: Option<(PathBuf, GroupElement)>,
}

/// Parse the raw text into the schema, rejecting unknown keys.
pub fn parse_config(text: &str) -> Result<FileConfig> {
    toml::from_str(text).map_err(|e| anyhow!("config parse error: {e}"))
}

fn build_group(section: &GroupSection) -> Result<Group> {
    match section.kind.as_str() {
        "free_abelian" => {
            let rank = section.rank.context("free_abelian needs rank")?;
            if rank == 0 {
                bail!("group rank must be at least 1");
            }
            Ok(Group::free_abelian(rank))
        }
        "heisenberg" => Ok(Group::heisenberg()),
        "free_group" => {
            let rank = section.rank.context("free_group needs rank")?;
            if rank == 0 {
                bail!("group rank must be at least 1");
            }
            Ok(Group::free_group(rank))
        }
        other => bail!("unknown group kind {other:?}"),
    }
}

pub fn build_weight(group: &Group, section: &WeightSection) -> Result<WeightFunction> {
    match section.kind.as_str() {
        "explicit" => {
            let mut entries = Vec::new();
            for (elem, value) in &section.entries {
                let g = group
                    .parse_element(elem)
                    .map_err(|e| anyhow!("weight entry: {e}"))?;
                let v = parse_rat(value).map_err(|e| anyhow!("weight entry value: {e}"))?;
                entries.push((g, v));
            }
            WeightFunction::explicit(group, entries, section.symmetrize)
                .map_err(|e| anyhow!("weight: {e}"))
        }
        "power_law" => {
            let shape = match section.shape.as_deref() {
                Some("single_axis") => {
                    let axis = section.axis.context("single_axis needs axis (1-based)")?;
                    if axis == 0 {
                        bail!("axis is 1-based");
                    }
                    PowerLawShape::SingleAxis { axis: axis - 1 }
                }
                Some("jump_columns") => PowerLawShape::JumpColumns,
                other => bail!("unknown power-law shape {other:?}"),
            };
            let exponent = section.exponent.context("power_law needs exponent")?;
            let scale = parse_rat(section.scale.as_deref().unwrap_or("1"))
                .map_err(|e| anyhow!("scale: {e}"))?;
            WeightFunction::power_law(group, shape, exponent, scale)
                .map_err(|e| anyhow!("weight: {e}"))
        }
        other => bail!("unknown weight kind {other:?}"),
    }
}

pub fn build_length(
    group: &Group,
    weight: &WeightFunction,
    section: &LengthSection,
) -> Result<LengthFunction> {
    match section.kind.as_str() {
        "constant_one" => Ok(LengthFunction::constant_one(group)),
        "inverse_weight" => Ok(LengthFunction::inverse_weight(weight)),
        "explicit" => {
            let mut entries = Vec::new();
            for (elem, value) in &section.entries {
                let g = group
                    .parse_element(elem)
                    .map_err(|e| anyhow!("length entry: {e}"))?;
                let v = parse_rat(value).map_err(|e| anyhow!("length entry value: {e}"))?;
                entries.push((g, v));
            }
            let default = match &section.default {
                Some(d) => match d.kind.as_str() {
                    "constant" => LengthDefault::Constant {
                        value: parse_rat(d.value.as_deref().unwrap_or("1"))
                            .map_err(|e| anyhow!("length default: {e}"))?,
                    },
                    "l1_norm" => LengthDefault::L1Norm,
                    other => bail!("unknown length default {other:?}"),
                },
                None => LengthDefault::Constant {
                    value: Rat::from_integer(1.into()),
                },
            };
            LengthFunction::explicit(group, entries, default).map_err(|e| anyhow!("length: {e}"))
        }
        other => bail!("unknown length kind {other:?}"),
    }
}

fn build_height(
    group: &Group,
    weight: &WeightFunction,
    eta: Option<&Rat>,
    section: &HeightSection,
) -> Result<HeightStructure> {
    let spec = match section.mode.as_str() {
        "homomorphism" => HeightSpec::Homomorphism {
            hom: HomomorphismSpec::new(section.coefficients.clone()),
            lambda: section.lambda,
        },
        "coset_offset" => {
            let modulus = section.modulus.context("coset_offset needs modulus")?;
            let reps = section
                .reps
                .iter()
                .map(|r| group.parse_element(r).map_err(|e| anyhow!("rep: {e}")))
                .collect::<Result<Vec<_>>>()?;
            HeightSpec::CosetOffset {
                modulus,
                class_hom: HomomorphismSpec::new(section.class_coefficients.clone()),
                reps,
                f_hom: HomomorphismSpec::new(section.f_coefficients.clone()),
                offsets: section.offsets.clone(),
            }
        }
        other => bail!("unknown height mode {other:?}"),
    };
    make_height(spec, group, weight, eta).map_err(|e| anyhow!("height: {e}"))
}

/// Elaborate a parsed config into runnable objects, applying the documented
/// defaults: truncation from the spanning threshold, bin width from the
/// extension bound `A`.
pub fn resolve(file: &FileConfig, config_dir: &Path) -> Result<Resolved> {
    let group = build_group(&file.group)?;
    let weight = build_weight(&group, &file.weight)?;
    let length = build_length(&group, &weight, &file.length)?;

    let eta: Option<Rat> = if file.run.no_truncation {
        if file.run.eta.is_some() {
            bail!("run.eta and run.no_truncation are mutually exclusive");
        }
        None
    } else {
        match &file.run.eta {
            Some(text) => {
                let e = parse_rat(text).map_err(|e| anyhow!("run.eta: {e}"))?;
                if e <= Rat::from_integer(0.into()) {
                    bail!("run.eta must be positive");
                }
                Some(e)
            }
            None => match weight.min_value() {
                // Finite support: truncating at the least value keeps
                // everything while pinning a concrete level.
                Some(min) => Some(min),
                None => Some(
                    weight
                        .spanning_threshold(&group.generators(), 10)
                        .context("no spanning truncation level found on the default grid")?,
                ),
            },
        }
    };

    let height = build_height(&group, &weight, eta.as_ref(), &file.height)?;
    let constants = structural_constants(
        &height,
        &weight,
        &length,
        eta.as_ref(),
        file.height.connector_search_bound,
    )
    .map_err(|e| anyhow!("structural constants: {e}"))?;

    let a_cap = extension_width_cap(&height, &weight, &length, eta.as_ref())
        .map_err(|e| anyhow!("extension bound: {e}"))?;
    let bin_width = match &file.run.bin_width {
        Some(text) => {
            let c = parse_rat(text).map_err(|e| anyhow!("run.bin_width: {e}"))?;
            if c < Rat::from_integer(a_cap.max(1).into()) {
                bail!(
                    "run.bin_width = {text} is below the required extension bound A = {}",
                    a_cap.max(1)
                );
            }
            c
        }
        None => Rat::from_integer(a_cap.max(1).into()),
    };

    let mut cfg = EnumConfig::new(group.clone(), weight.clone(), length.clone(), height);
    cfg.eta = eta;
    cfg.m_max = file.run.m_max.unwrap_or(6);
    cfg.bin_width = bin_width;
    cfg.value_mode = match file.run.value_mode.as_deref() {
        None | Some("rational") => ValueMode::Rational,
        Some("float") => ValueMode::Float,
        Some(other) => bail!("unknown value_mode {other:?}"),
    };
    cfg.exactness_mode = file.run.exactness_mode;
    if let Some(cap) = file.run.node_cap {
        cfg.node_cap = cap;
    }
    for b in &file.run.base_vertices {
        cfg.base_vertices
            .push(group.parse_element(b).map_err(|e| anyhow!("base vertex: {e}"))?);
    }

    let holder = match &file.holder {
        Some(h) => {
            if !(1.0..2.0).contains(&h.epsilon) {
                bail!("holder.epsilon must lie in [1, 2)");
            }
            let c = parse_rat(&h.c).map_err(|e| anyhow!("holder.c: {e}"))?;
            Some((h.epsilon, c))
        }
        None => None,
    };

    let continuity = match &file.continuity {
        Some(section) => {
            let other_weight = build_weight(&group, &section.other_weight)?;
            let other_length = build_length(&group, &other_weight, &section.other_length)?;
            Some((
                other_weight,
                other_length,
                section.m_max.unwrap_or(cfg.m_max),
            ))
        }
        None => None,
    };

    let truncation = match &file.truncation {
        Some(section) => {
            let mut etas = Vec::new();
            for text in &section.eta_list {
                etas.push(parse_rat(text).map_err(|e| anyhow!("truncation eta: {e}"))?);
            }
            Some((etas, section.m))
        }
        None => None,
    };

    let surgery = match &file.surgery {
        Some(section) => {
            let path = config_dir.join(&section.walks);
            let base = match &section.base {
                Some(b) => group.parse_element(b).map_err(|e| anyhow!("surgery base: {e}"))?,
                None => group.identity(),
            };
            Some((path, base))
        }
        None => None,
    };

    let out_dir = config_dir.join(file.run.out_dir.as_deref().unwrap_or("out"));

    Ok(Resolved {
        cfg,
        constants,
        holder,
        out_dir,
        continuity,
        truncation,
        surgery,
    })
}
