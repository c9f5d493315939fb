//! Independent reference enumerator used to cross-check the main engine.
//!
//! Deliberately naive and structurally different from `enumerate`: it
//! derives its own step candidates, materializes every walk as a plain
//! vertex list, checks self-avoidance by linear scan, recomputes weight,
//! length, heights and class of each finished walk from first principles,
//! and only then folds the walk into the table. Exact rationals only.

use crate::enumerate::{AggregateTable, BaseHist, EnumConfig, EnumError, ValueMode};
use crate::exact::Rat;
use crate::group::{canonical_key, GroupElement};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

const ORACLE_NODE_CAP: u64 = 10_000_000;
const JUMP_SCAN_CAP: i64 = 100_000;

/// Enumerate the same aggregate table as `enumerate_aggregate`, the slow way.
pub fn oracle_enumerate(cfg: &EnumConfig) -> Result<AggregateTable, EnumError> {
    if cfg.value_mode != ValueMode::Rational {
        return Err(EnumError::Unsupported(
            "the oracle works in rational mode only".into(),
        ));
    }
    let budget = cfg.budget();
    let support = oracle_support(cfg, &budget)?;
    let mut bases = Vec::new();
    let mut nodes = 0u64;
    for base in cfg.bases() {
        let mut walks: Vec<Vec<GroupElement>> = Vec::new();
        walks.push(vec![base.clone()]);
        grow(cfg, &support, &budget, &vec![base.clone()], &mut walks, &mut nodes)?;
        let mut map: BTreeMap<Rat, crate::enumerate::LengthBucket> = BTreeMap::new();
        for w in &walks {
            fold_walk(cfg, w, &mut map);
        }
        bases.push(BaseHist { base, map });
    }
    Ok(AggregateTable {
        bases,
        m_max: cfg.m_max,
        bin_width: cfg.bin_width.clone(),
        value_mode: ValueMode::Rational,
        graph_length_bins: cfg.graph_length_bins(),
        config_digest: cfg.digest(),
        node_count: nodes + cfg.bases().len() as u64,
        certificate: None,
    })
}

/// Candidate steps, derived by scanning jump sizes upward rather than by
/// closed-form support bounds.
fn oracle_support(cfg: &EnumConfig, budget: &Rat) -> Result<Vec<GroupElement>, EnumError> {
    let mut out = Vec::new();
    if let Some(entries) = cfg.weight.finite_support() {
        for (g, _) in entries {
            if admissible(cfg, g, budget) {
                out.push(g.clone());
            }
        }
    } else {
        // The built-in infinite families live on one axis of Z^d plus,
        // possibly, the two unit horizontal steps.
        let probe = cfg
            .weight
            .bounded_support(None, Some(1))
            .ok_or(EnumError::InfiniteStepSet)?;
        for (g, _) in &probe {
            if admissible(cfg, g, budget) {
                out.push(g.clone());
            }
        }
        // Scan jumps of increasing size until one is inadmissible; the
        // admissibility criteria are monotone in the jump size.
        let GroupElement::Vector(first) = &probe[0].0 else {
            return Err(EnumError::InfiniteStepSet);
        };
        let rank = first.len();
        let axis = vertical_axis(&probe);
        let mut n: i64 = 2;
        loop {
            let mut v = vec![0i64; rank];
            v[axis] = n;
            let plus = GroupElement::Vector(v.clone());
            if !admissible(cfg, &plus, budget) {
                break;
            }
            v[axis] = -n;
            out.push(plus);
            out.push(GroupElement::Vector(v));
            n += 1;
            if n > JUMP_SCAN_CAP {
                return Err(EnumError::InfiniteStepSet);
            }
        }
    }
    out.sort_by_key(canonical_key);
    Ok(out)
}

/// Which coordinate carries the unbounded jumps of the power-law family.
fn vertical_axis(probe: &[(GroupElement, Rat)]) -> usize {
    // With horizontals present (4 probe entries on Z^2) the jumps are on
    // coordinate 1; otherwise on the unique nonzero coordinate.
    if probe.len() == 4 {
        return 1;
    }
    let GroupElement::Vector(v) = &probe[0].0 else {
        return 0;
    };
    v.iter().position(|&x| x != 0).unwrap_or(0)
}

fn admissible(cfg: &EnumConfig, g: &GroupElement, budget: &Rat) -> bool {
    let w = cfg.weight.value(g);
    if !w.is_positive() {
        return false;
    }
    if let Some(eta) = &cfg.eta {
        if w < *eta {
            return false;
        }
    }
    match cfg.length.value_opt(g) {
        Some(l) => l <= *budget,
        None => false,
    }
}

fn grow(
    cfg: &EnumConfig,
    support: &[GroupElement],
    budget: &Rat,
    walk: &Vec<GroupElement>,
    out: &mut Vec<Vec<GroupElement>>,
    nodes: &mut u64,
) -> Result<(), EnumError> {
    for s in support {
        let next = cfg.group.multiply(walk.last().unwrap(), s);
        if walk.contains(&next) {
            continue;
        }
        let mut extended = walk.clone();
        extended.push(next);
        // Length recomputed from scratch, the slow way.
        let total: Rat = extended
            .windows(2)
            .map(|p| cfg.length.value(&cfg.group.step(&p[0], &p[1])))
            .sum();
        if total >= *budget {
            continue;
        }
        *nodes += 1;
        if *nodes > ORACLE_NODE_CAP.min(cfg.node_cap) {
            return Err(EnumError::BudgetOverflow(*nodes));
        }
        out.push(extended.clone());
        grow(cfg, support, budget, &extended, out, nodes)?;
    }
    Ok(())
}

fn fold_walk(
    cfg: &EnumConfig,
    vertices: &[GroupElement],
    map: &mut BTreeMap<Rat, crate::enumerate::LengthBucket>,
) {
    let steps: Vec<GroupElement> = vertices
        .windows(2)
        .map(|p| cfg.group.step(&p[0], &p[1]))
        .collect();
    let mut weight = Rat::one();
    let mut ell = Rat::zero();
    for s in &steps {
        weight *= cfg.weight.value(s);
        ell += cfg.length.value(s);
    }
    let heights: Vec<i64> = vertices.iter().map(|v| cfg.height.height(v)).collect();
    let n = heights.len() - 1;
    let h0 = heights[0];
    let hn = heights[n];
    let mut half = true;
    for h in heights.iter().skip(1) {
        if *h <= h0 {
            half = false;
        }
    }
    let mut bridge = half;
    for h in heights.iter().skip(1) {
        if *h > hn {
            bridge = false;
        }
    }
    let cell = map.entry(ell).or_insert_with(|| {
        use crate::enumerate::{Bucket, LengthBucket, WeightAcc};
        LengthBucket {
            sigma: Bucket {
                count: 0,
                weight: WeightAcc::Exact(Rat::zero()),
            },
            half: Bucket {
                count: 0,
                weight: WeightAcc::Exact(Rat::zero()),
            },
            bridge: Bucket {
                count: 0,
                weight: WeightAcc::Exact(Rat::zero()),
            },
        }
    });
    add_exact(&mut cell.sigma, &weight);
    if half {
        add_exact(&mut cell.half, &weight);
    }
    if bridge {
        add_exact(&mut cell.bridge, &weight);
    }
}

fn add_exact(b: &mut crate::enumerate::Bucket, w: &Rat) {
    b.count += 1;
    match &mut b.weight {
        crate::enumerate::WeightAcc::Exact(r) => *r += w,
        _ => unreachable!("oracle is rational"),
    }
}
