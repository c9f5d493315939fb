//! Materialized self-avoiding walks with cached weight, length, heights
//! and classification.

use crate::exact::Rat;
use crate::group::{Group, GroupElement};
use crate::height::{classify_heights, span_of_heights, HeightStructure, WalkClass};
use crate::length::LengthFunction;
use crate::weight::WeightFunction;
use num_traits::{One, Signed, Zero};
use std::collections::HashSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WalkError {
    #[error("walk revisits the vertex {0}")]
    NotSelfAvoiding(String),
    #[error("step {0} has zero weight")]
    ZeroWeightStep(String),
    #[error("walk is empty where a nonempty walk is required")]
    Empty,
}

/// An ordered self-avoiding walk. `vertices[i] = vertices[i-1] * steps[i-1]`
/// exactly, the weight is positive, and the cached fields agree with the
/// configured weight, length and height.
#[derive(Clone, Debug, PartialEq)]
pub struct Walk {
    pub vertices: Vec<GroupElement>,
    pub steps: Vec<GroupElement>,
    pub weight: Rat,
    pub ell: Rat,
    pub heights: Vec<i64>,
    pub class: WalkClass,
}

impl Walk {
    /// Build a walk from its base vertex and step list.
    pub fn from_steps(
        group: &Group,
        weight: &WeightFunction,
        length: &LengthFunction,
        height: &HeightStructure,
        base: GroupElement,
        steps: Vec<GroupElement>,
    ) -> Result<Walk, WalkError> {
        let mut vertices = Vec::with_capacity(steps.len() + 1);
        vertices.push(base);
        for s in &steps {
            let next = group.multiply(vertices.last().unwrap(), s);
            vertices.push(next);
        }
        Walk::finish(group, weight, length, height, vertices, steps)
    }

    /// Build a walk from its vertex list, deriving the steps.
    pub fn from_vertices(
        group: &Group,
        weight: &WeightFunction,
        length: &LengthFunction,
        height: &HeightStructure,
        vertices: Vec<GroupElement>,
    ) -> Result<Walk, WalkError> {
        if vertices.is_empty() {
            return Err(WalkError::Empty);
        }
        let steps = vertices
            .windows(2)
            .map(|w| group.step(&w[0], &w[1]))
            .collect();
        Walk::finish(group, weight, length, height, vertices, steps)
    }

    fn finish(
        _group: &Group,
        weight: &WeightFunction,
        length: &LengthFunction,
        height: &HeightStructure,
        vertices: Vec<GroupElement>,
        steps: Vec<GroupElement>,
    ) -> Result<Walk, WalkError> {
        let mut seen: HashSet<&GroupElement> = HashSet::with_capacity(vertices.len());
        for v in &vertices {
            if !seen.insert(v) {
                return Err(WalkError::NotSelfAvoiding(v.to_string()));
            }
        }
        let mut w = Rat::one();
        let mut ell = Rat::zero();
        for s in &steps {
            let sv = weight.value(s);
            if !sv.is_positive() {
                return Err(WalkError::ZeroWeightStep(s.to_string()));
            }
            w *= sv;
            ell += length.value(s);
        }
        let heights = height.heights_of(&vertices);
        let class = classify_heights(&heights);
        Ok(Walk {
            vertices,
            steps,
            weight: w,
            ell,
            heights,
            class,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn base(&self) -> &GroupElement {
        &self.vertices[0]
    }

    pub fn end(&self) -> &GroupElement {
        self.vertices.last().unwrap()
    }

    pub fn span(&self) -> i64 {
        span_of_heights(&self.heights)
    }
}
