//! Certified one-sided bounds and non-rigorous point estimates for the
//! connective and bridge constants, from finite aggregate tables.
//!
//! Lower bounds come from supermultiplicativity of bridge aggregates: each
//! finite term certifies `beta >= term^(1/index)`. In graph-length mode
//! (unit step lengths, unit bins) the sigma aggregates are submultiplicative
//! and every term certifies an upper bound for `mu`. Point estimates use
//! consecutive-ratio averaging and are clearly labelled non-rigorous.

use crate::enumerate::{AggClass, AggregateTable};
use crate::exact::{rat_int, rat_pow, rat_root_f64, root_le, Rat};
use crate::height::StructuralConstants;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("insufficient data: {bins} bins present, at least {needed} required")]
    InsufficientData { bins: u32, needed: u32 },
    #[error("exact analysis requires a rational-mode table")]
    NotRational,
    #[error("config mismatch: {0}")]
    ConfigMismatch(String),
    #[error("distance between the configurations is {0} >= 1")]
    DeltaTooLarge(String),
    #[error("{0}")]
    Invalid(String),
}

/// Entry of a `w^(1/m)`-type sequence.
#[derive(Clone, Debug, Serialize)]
pub struct SequenceEntry {
    pub bin: u32,
    pub value: f64,
}

/// A certified bound kept in exact form: the bound is
/// `radicand^(1/root)`, reported as a float.
#[derive(Clone, Debug)]
pub struct ExactBound {
    pub bin: u32,
    pub radicand: Rat,
    pub root: u32,
}

impl ExactBound {
    pub fn value(&self) -> f64 {
        rat_root_f64(&self.radicand, self.root)
    }

    /// Exact comparison with another bound: `self <= other`.
    pub fn le(&self, other: &ExactBound) -> bool {
        root_le(&self.radicand, self.root, &other.radicand, other.root)
    }
}

/// Certified bounds with their exact backing data.
#[derive(Clone, Debug)]
pub struct FeketeBounds {
    pub lower: Vec<ExactBound>,
    pub upper: Vec<ExactBound>,
    /// Unit lengths and unit bins: bins are exact step counts.
    pub graph_length_mode: bool,
    /// Correction constant applied to the shifted lower bounds
    /// (1 in graph-length mode).
    pub correction: Rat,
    /// Width used for bridge bins (the extension bound `A`).
    pub bridge_width: u32,
}

impl FeketeBounds {
    pub fn best_lower(&self) -> Option<&ExactBound> {
        self.lower
            .iter()
            .max_by(|a, b| a.value().partial_cmp(&b.value()).unwrap())
    }

    pub fn best_upper(&self) -> Option<&ExactBound> {
        self.upper
            .iter()
            .min_by(|a, b| a.value().partial_cmp(&b.value()).unwrap())
    }

    /// Exact check that the doubling subsequence of lower bounds is
    /// monotone non-decreasing: `t_m^(1/m) <= t_{2m}^(1/2m)`, i.e.
    /// `t_m^2 <= t_{2m}`.
    pub fn doubling_monotone(&self) -> bool {
        for lb in &self.lower {
            if let Some(double) = self.lower.iter().find(|x| x.root == 2 * lb.root) {
                if rat_pow(&lb.radicand, 2) > double.radicand {
                    return false;
                }
            }
        }
        true
    }

    pub fn report(&self, caveats: Vec<String>) -> EstimateReport {
        EstimateReport {
            sigma_sequence: Vec::new(),
            bridge_sequence: Vec::new(),
            lower_bounds: self
                .lower
                .iter()
                .map(|b| SequenceEntry {
                    bin: b.bin,
                    value: b.value(),
                })
                .collect(),
            upper_bounds: self
                .upper
                .iter()
                .map(|b| SequenceEntry {
                    bin: b.bin,
                    value: b.value(),
                })
                .collect(),
            point_estimate: None,
            method: "certified one-sided bounds from super/sub-multiplicativity".into(),
            caveats,
        }
    }
}

/// Serializable estimate/bounds report.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub sigma_sequence: Vec<SequenceEntry>,
    pub bridge_sequence: Vec<SequenceEntry>,
    pub lower_bounds: Vec<SequenceEntry>,
    pub upper_bounds: Vec<SequenceEntry>,
    pub point_estimate: Option<f64>,
    pub method: String,
    pub caveats: Vec<String>,
}

/// Certified bounds from a rational-mode table.
///
/// Lower bounds: in graph-length mode, `w(b_{n}) >= prod` gives
/// `beta >= w(b_n)^(1/n)` directly; otherwise the shifted form
/// `w(b_{m,A}) w(b_{n,A}) <= C w(b_{m+n+A,A})` certifies
/// `beta >= (w(b_{n,A})/C)^(1/(n+A))`.
pub fn fekete_bounds(
    table: &AggregateTable,
    constants: &StructuralConstants,
) -> Result<FeketeBounds, AnalysisError> {
    let bins = table.m_max + 1;
    if bins < 3 {
        return Err(AnalysisError::InsufficientData { bins, needed: 3 });
    }
    if table.bases[0]
        .map
        .values()
        .next()
        .is_some_and(|c| c.sigma.weight.as_rat().is_none())
    {
        return Err(AnalysisError::NotRational);
    }
    let graph_length_mode = table.graph_length_bins;
    let a = constants.a_cap.max(1);
    let width = rat_int(a as i64);
    let correction = if graph_length_mode {
        Rat::from_integer(1.into())
    } else {
        constants.supermultiplicative_constant()
    };

    let mut lower = Vec::new();
    for n in 0..=table.m_max {
        let w = table.bridge_bin_min_custom_rat(&rat_int(n as i64), &width);
        if w.is_zero() {
            continue;
        }
        if graph_length_mode {
            if n >= 1 {
                lower.push(ExactBound {
                    bin: n,
                    radicand: table.bridge_bin_min_rat(n),
                    root: n,
                });
            }
        } else {
            lower.push(ExactBound {
                bin: n,
                radicand: w / &correction,
                root: n + a,
            });
        }
    }

    let mut upper = Vec::new();
    if graph_length_mode {
        for n in 1..=table.m_max {
            let w = table.sigma_bin_rat(n);
            if w.is_positive() {
                upper.push(ExactBound {
                    bin: n,
                    radicand: w,
                    root: n,
                });
            }
        }
    }

    Ok(FeketeBounds {
        lower,
        upper,
        graph_length_mode,
        correction,
        bridge_width: a,
    })
}

/// Point estimates by consecutive-ratio averaging (non-rigorous, labelled).
pub fn estimate_constants(
    table: &AggregateTable,
    holder_certified: bool,
) -> Result<EstimateReport, AnalysisError> {
    let bins = table.m_max + 1;
    if bins < 4 {
        return Err(AnalysisError::InsufficientData { bins, needed: 4 });
    }
    let sigma: Vec<(u32, f64)> = (1..=table.m_max)
        .map(|m| (m, table.bin(0, AggClass::Sigma, m).weight.to_f64()))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let bridge: Vec<(u32, f64)> = (1..=table.m_max)
        .map(|m| {
            let w = (0..table.base_count())
                .map(|b| table.bin(b, AggClass::Bridge, m).weight.to_f64())
                .fold(f64::INFINITY, f64::min);
            (m, w)
        })
        .filter(|(_, w)| *w > 0.0 && w.is_finite())
        .collect();

    let sigma_sequence: Vec<SequenceEntry> = sigma
        .iter()
        .map(|(m, w)| SequenceEntry {
            bin: *m,
            value: (w.ln() / f64::from(*m)).exp(),
        })
        .collect();
    let bridge_sequence: Vec<SequenceEntry> = bridge
        .iter()
        .map(|(m, w)| SequenceEntry {
            bin: *m,
            value: (w.ln() / f64::from(*m)).exp(),
        })
        .collect();

    // Ratios of consecutive sigma bins, averaging the last three.
    let mut ratios = Vec::new();
    for pair in sigma.windows(2) {
        if pair[1].0 == pair[0].0 + 1 {
            ratios.push(pair[1].1 / pair[0].1);
        }
    }
    let point_estimate = if ratios.is_empty() {
        None
    } else {
        let tail = &ratios[ratios.len().saturating_sub(3)..];
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    };

    let mut caveats = vec!["point estimate is non-rigorous consecutive-ratio averaging".into()];
    if !holder_certified {
        caveats.push(
            "no height Hölder certificate: the sigma growth rate is only known as a limsup".into(),
        );
    }

    Ok(EstimateReport {
        sigma_sequence,
        bridge_sequence,
        lower_bounds: Vec::new(),
        upper_bounds: Vec::new(),
        point_estimate,
        method: "consecutive-ratio mean over the last three bins".into(),
        caveats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate_aggregate, EnumConfig};
    use crate::exact::{rat, rat_int};
    use crate::group::{Group, GroupElement, HomomorphismSpec};
    use crate::height::{make_height, structural_constants, HeightSpec};
    use crate::length::LengthFunction;
    use crate::weight::WeightFunction;

    fn z1_cfg(m_max: u32) -> (EnumConfig, StructuralConstants) {
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
        let mut cfg = EnumConfig::new(g, w, l, h);
        cfg.m_max = m_max;
        (cfg, sc)
    }

    fn z2_cfg(m_max: u32) -> (EnumConfig, StructuralConstants) {
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
        let mut cfg = EnumConfig::new(g, w, l, h);
        cfg.m_max = m_max;
        (cfg, sc)
    }

    #[test]
    fn line_ratio_estimate_is_exactly_half() {
        let (cfg, _) = z1_cfg(6);
        let table = enumerate_aggregate(&cfg).unwrap();
        let rep = estimate_constants(&table, true).unwrap();
        assert!((rep.point_estimate.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn square_lattice_bounds() {
        let (cfg, sc) = z2_cfg(5);
        let table = enumerate_aggregate(&cfg).unwrap();
        let fb = fekete_bounds(&table, &sc).unwrap();
        assert!(fb.graph_length_mode);
        // mu <= 284^(1/5) ~ 3.0898 from the five-step aggregate.
        let ub5 = fb.upper.iter().find(|b| b.bin == 5).unwrap();
        assert!((ub5.value() - 284f64.powf(0.2)).abs() < 1e-9);
        // Bridge supermultiplicativity seeds: w(b_2) = 3 >= w(b_1)^2 = 1.
        assert!(fb.doubling_monotone());
        // All lower bounds stay below all upper bounds, exactly.
        for lb in &fb.lower {
            for ub in &fb.upper {
                assert!(lb.le(ub), "lb {} exceeds ub {}", lb.value(), ub.value());
            }
        }
    }

    #[test]
    fn line_bounds_are_trivial() {
        // All bridge weights on the line with phi = 1 are 1.
        let g = Group::free_abelian(1);
        let w = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat_int(1))],
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
        let mut cfg = EnumConfig::new(g, w, l, h);
        cfg.m_max = 5;
        let table = enumerate_aggregate(&cfg).unwrap();
        let fb = fekete_bounds(&table, &sc).unwrap();
        for lb in &fb.lower {
            assert_eq!(lb.radicand, rat_int(1));
        }
        // mu <= 2^(1/n).
        let ub1 = fb.upper.iter().find(|b| b.bin == 1).unwrap();
        assert_eq!(ub1.radicand, rat_int(2));
    }

    #[test]
    fn insufficient_data_is_reported() {
        let (mut cfg, sc) = z1_cfg(1);
        cfg.m_max = 1;
        let table = enumerate_aggregate(&cfg).unwrap();
        assert!(matches!(
            fekete_bounds(&table, &sc),
            Err(AnalysisError::InsufficientData { .. })
        ));
        assert!(matches!(
            estimate_constants(&table, true),
            Err(AnalysisError::InsufficientData { .. })
        ));
    }
}
