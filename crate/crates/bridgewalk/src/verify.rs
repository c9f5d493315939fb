//! Property suites: every finitely testable inequality of the theory,
//! checked exactly on enumerated data.
//!
//! Each check reports its name, the number of instances tested, a pass
//! flag and the worst slack seen. Checks whose finite surrogate is not
//! direction-preserving are skipped with an explanation rather than
//! reported as passing.

use crate::enumerate::{
    certify_truncation_exactness, enumerate_aggregate, enumerate_with_sink, neighbor_table,
    AggClass, AggregateTable, EnumConfig, EnumError, WalkSink, WalkView,
};
use crate::estimate::{fekete_bounds, AnalysisError, FeketeBounds};
use crate::exact::{format_rat, le_rat_pow_scaled, rat_int, rat_pow, rat_to_f64, Rat};
use crate::height::{classify_heights, structural_constants, HeightStructure, StructuralConstants};
use crate::length::{pair_distance, LengthFunction};
use crate::weight::WeightFunction;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Outcome of one named check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub detail: String,
    pub instances: u64,
    pub passed: bool,
    pub skipped: bool,
    /// Smallest margin by which the inequality held (when meaningful).
    pub worst_slack: Option<f64>,
}

/// A suite of checks; `overall` is the conjunction of all non-skipped
/// passes.
#[derive(Clone, Debug, Serialize, Default)]
pub struct PropertyReport {
    pub checks: Vec<CheckResult>,
    pub overall: bool,
}

impl PropertyReport {
    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
        self.overall = self.checks.iter().all(|c| c.skipped || c.passed);
    }

    pub fn passed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn pass(name: &str, detail: impl Into<String>, instances: u64, slack: Option<f64>) -> CheckResult {
    CheckResult {
        name: name.into(),
        detail: detail.into(),
        instances,
        passed: true,
        skipped: false,
        worst_slack: slack,
    }
}

fn fail(name: &str, detail: impl Into<String>, instances: u64, slack: Option<f64>) -> CheckResult {
    CheckResult {
        name: name.into(),
        detail: detail.into(),
        instances,
        passed: false,
        skipped: false,
        worst_slack: slack,
    }
}

fn skip(name: &str, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        detail: detail.into(),
        instances: 0,
        passed: true,
        skipped: true,
        worst_slack: None,
    }
}

fn verdict(
    name: &str,
    ok: bool,
    detail: impl Into<String>,
    instances: u64,
    slack: Option<f64>,
) -> CheckResult {
    if ok {
        pass(name, detail, instances, slack)
    } else {
        fail(name, detail, instances, slack)
    }
}

fn bin_rat(table: &AggregateTable, base: usize, class: AggClass, m: &Rat, width: &Rat) -> Rat {
    table
        .bin_custom(base, class, m, width)
        .weight
        .as_rat()
        .expect("rational mode required")
        .clone()
}

/// Streaming per-walk checks: the step-count bound, height propagation
/// under a Hölder certificate, and independent class re-derivation.
struct StreamChecks {
    len_min: Rat,
    holder: Option<(f64, Rat)>,
    lwl: (u64, u64),
    holder_counts: (u64, u64),
    class: (u64, u64),
}

impl WalkSink for StreamChecks {
    fn visit(&mut self, w: &WalkView<'_>) {
        let n = w.steps.len();
        self.lwl.0 += 1;
        if rat_int(n as i64) * &self.len_min > *w.ell {
            self.lwl.1 += 1;
        }
        if let Some((eps, c)) = &self.holder {
            self.holder_counts.0 += 1;
            let dh = (w.heights[n] - w.heights[0]).abs();
            let ok = if *eps == 1.0 {
                rat_int(dh) <= c * w.ell
            } else {
                (dh as f64) <= rat_to_f64(c) * rat_to_f64(w.ell).powf(*eps)
            };
            if !ok {
                self.holder_counts.1 += 1;
            }
        }
        self.class.0 += 1;
        if classify_heights(w.heights) != w.class {
            self.class.1 += 1;
        }
    }
}

/// Run every inequality check that is decidable from one table.
///
/// `holder` optionally supplies a height Hölder certificate `(epsilon, C)`
/// whose walkwise consequence is then checked on every enumerated walk.
pub fn verify_inequalities(
    cfg: &EnumConfig,
    table: &AggregateTable,
    constants: &StructuralConstants,
    holder: Option<(f64, Rat)>,
) -> Result<PropertyReport, AnalysisError> {
    if table.config_digest != cfg.digest() {
        return Err(AnalysisError::ConfigMismatch(format!(
            "table digest {} does not match the configuration {}",
            table.config_digest,
            cfg.digest()
        )));
    }
    if table.bases[0]
        .map
        .values()
        .next()
        .is_some_and(|c| c.sigma.weight.as_rat().is_none())
    {
        return Err(AnalysisError::NotRational);
    }
    let mut report = PropertyReport::default();
    let m_max = table.m_max;
    let c_width = table.bin_width.clone();
    let a_width = rat_int(constants.a_cap.max(1) as i64);

    // Class inclusion: bridges <= half-space <= all walks, per bin and base.
    {
        let mut ok = true;
        let mut instances = 0u64;
        for b in 0..table.base_count() {
            for m in 0..=m_max {
                let s = table.bin(b, AggClass::Sigma, m);
                let h = table.bin(b, AggClass::HalfSpace, m);
                let br = table.bin(b, AggClass::Bridge, m);
                instances += 1;
                ok &= br.count <= h.count && h.count <= s.count;
                let (sw, hw, bw) = (
                    s.weight.as_rat().unwrap(),
                    h.weight.as_rat().unwrap(),
                    br.weight.as_rat().unwrap(),
                );
                ok &= bw <= hw && hw <= sw;
            }
        }
        report.push(verdict(
            "class-inclusion-chain",
            ok,
            "bridge <= half-space <= sigma for counts and weights",
            instances,
            None,
        ));
    }

    // Sigma aggregates do not depend on the base vertex.
    {
        let mut ok = true;
        let mut instances = 0;
        for b in 1..table.base_count() {
            for (ell, cell) in &table.bases[0].map {
                let other = table.bases[b].map.get(ell);
                instances += 1;
                ok &= other.is_some_and(|o| o.sigma == cell.sigma);
            }
            ok &= table.bases[b].map.len() == table.bases[0].map.len();
        }
        report.push(verdict(
            "sigma-base-invariance",
            ok,
            "sigma histograms identical across base vertices",
            instances,
            None,
        ));
    }

    // Plain supermultiplicativity of bridge aggregates in graph-length mode.
    if table.graph_length_bins {
        let mut ok = true;
        let mut instances = 0;
        let mut slack = f64::INFINITY;
        for m in 0..=m_max {
            for n in 0..=m_max - m {
                let lhs = table.bridge_bin_min_rat(m + n);
                let rhs = table.bridge_bin_min_rat(m) * table.bridge_bin_min_rat(n);
                instances += 1;
                ok &= lhs >= rhs;
                slack = slack.min(rat_to_f64(&(&lhs - &rhs)));
            }
        }
        report.push(verdict(
            "bridge-supermultiplicative",
            ok,
            "w(b_{m+n}) >= w(b_m) w(b_n) for all m + n within the table",
            instances,
            Some(slack),
        ));
    } else {
        report.push(skip(
            "bridge-supermultiplicative",
            "plain form needs unit lengths and unit bins; see the shifted form",
        ));
    }

    // Shifted supermultiplicativity with the interval-extension constant.
    {
        let c_const = constants.supermultiplicative_constant();
        let a_int = constants.a_cap.max(1);
        let mut ok = true;
        let mut instances = 0;
        let mut slack = f64::INFINITY;
        if m_max >= a_int {
            for m in 0..=(m_max - a_int) {
                for n in 0..=(m_max - a_int - m) {
                    let wm = bin_rat_min(table, &rat_int(m as i64), &a_width);
                    let wn = bin_rat_min(table, &rat_int(n as i64), &a_width);
                    let wmn =
                        bin_rat_min(table, &rat_int((m + n + a_int) as i64), &a_width);
                    let rhs = &c_const * &wmn;
                    let lhs = wm * wn;
                    instances += 1;
                    ok &= lhs <= rhs;
                    slack = slack.min(rat_to_f64(&(&rhs - &lhs)));
                }
            }
        }
        report.push(verdict(
            "bridge-supermultiplicative-shifted",
            ok,
            format!(
                "w(b_m) w(b_n) <= C w(b_(m+n+A)) on width-A bins, C = {}",
                format_rat(&c_const)
            ),
            instances,
            Some(slack),
        ));
    }

    // Sigma bins against the total-weight geometric series.
    {
        match cfg.weight.total_weight_upper() {
            Some(total_ub) => {
                let len_min = cfg.length.len_min();
                let mut ok = true;
                let mut instances = 0;
                let mut slack = f64::INFINITY;
                for m in 0..=m_max {
                    let horizon = (rat_int(m as i64) + &c_width) / &len_min;
                    // Step counts are strictly below the horizon.
                    let mut n_cap = horizon.floor().numer().to_i64().unwrap();
                    if Rat::from_integer(n_cap.into()) == horizon {
                        n_cap -= 1;
                    }
                    let mut series = Rat::zero();
                    for i in 0..=n_cap.max(0) as u32 {
                        series += rat_pow(&total_ub, i);
                    }
                    let sigma = table.sigma_bin_rat(m);
                    instances += 1;
                    ok &= sigma <= series;
                    slack = slack.min(rat_to_f64(&(&series - &sigma)));
                }
                let note = if cfg.weight.has_finite_support() {
                    "w(sigma_{m,c}) <= sum_i w(Gamma)^i with exact total weight"
                } else {
                    "w(sigma_{m,c}) <= sum_i W^i with a rational upper bound W >= w(Gamma)"
                };
                report.push(verdict(
                    "sigma-below-total-weight-series",
                    ok,
                    note,
                    instances,
                    Some(slack),
                ));
            }
            None => report.push(skip(
                "sigma-below-total-weight-series",
                "total weight is infinite; the series bound does not apply",
            )),
        }
    }

    // Width inclusion: width-A bins nest inside width-c bins which are
    // covered by shifted width-A bins.
    {
        let gap = (&c_width - &a_width).ceil();
        let gap_int = gap.numer().to_u32().unwrap_or(0);
        let mut ok = true;
        let mut instances = 0;
        if m_max >= 1 {
            for b in 0..table.base_count() {
                for m in 0..m_max.saturating_sub(gap_int.max(1) - 1) {
                    let m_rat = rat_int(m as i64);
                    let narrow = bin_rat(table, b, AggClass::Bridge, &m_rat, &a_width);
                    let wide = bin_rat(table, b, AggClass::Bridge, &m_rat, &c_width);
                    let mut cover = Rat::zero();
                    for i in 0..=gap_int {
                        cover += bin_rat(
                            table,
                            b,
                            AggClass::Bridge,
                            &(rat_int((m + i) as i64)),
                            &a_width,
                        );
                    }
                    instances += 1;
                    ok &= narrow <= wide && wide <= cover;
                }
            }
        }
        report.push(verdict(
            "bin-width-inclusion",
            ok,
            "b_{m,A} within b_{m,c} within the union of shifted width-A bins",
            instances,
            None,
        ));
    }

    // Interval extension bound: prolonging a bridge by extension edges.
    {
        let q = (&c_width - &a_width).max(Rat::zero());
        let c1 = constants.interval_constant(&c_width, &q);
        let mut ok = true;
        let mut instances = 0;
        let mut slack = f64::INFINITY;
        for b in 0..table.base_count() {
            for p in 0..=m_max {
                let p_rat = rat_int(p as i64);
                let shifted = &p_rat + &q;
                // Need [shifted, shifted + A) inside the enumerated horizon.
                if &shifted + &a_width > rat_int(m_max as i64) + &c_width {
                    continue;
                }
                let lhs = bin_rat(table, b, AggClass::Bridge, &p_rat, &c_width);
                let rhs = &c1 * bin_rat(table, b, AggClass::Bridge, &shifted, &a_width);
                instances += 1;
                ok &= lhs <= rhs;
                slack = slack.min(rat_to_f64(&(&rhs - &lhs)));
            }
        }
        report.push(verdict(
            "interval-extension-bound",
            ok,
            format!(
                "w(b_{{p,c}}(v)) <= C1 w(b_{{p+q,A}}(v)) with q = {}, C1 = {}",
                format_rat(&q),
                format_rat(&c1)
            ),
            instances,
            Some(slack),
        ));
    }

    // Certified bounds: bridge lower bounds never exceed sigma upper bounds.
    let bounds = fekete_bounds(table, constants)?;
    if bounds.upper.is_empty() {
        report.push(skip(
            "bridge-lb-below-sigma-ub",
            "no certified upper bounds outside graph-length mode",
        ));
        report.push(skip(
            "bridge-bin-below-connective-power",
            "needs a certified upper bound for the connective constant",
        ));
    } else {
        let mut ok = true;
        let mut instances = 0;
        let mut slack = f64::INFINITY;
        for lb in &bounds.lower {
            for ub in &bounds.upper {
                instances += 1;
                ok &= lb.le(ub);
                slack = slack.min(ub.value() - lb.value());
            }
        }
        report.push(verdict(
            "bridge-lb-below-sigma-ub",
            ok,
            "every certified bridge lower bound <= every certified sigma upper bound",
            instances,
            Some(slack),
        ));

        // Bridge bins against a certified power of the connective constant:
        // w(b_{n,A}(v)) <= mu_ub^(n+r) / phi_nu^r.
        let best_ub = bounds.best_upper().unwrap();
        let r = constants.r as u32;
        let phi_nu_pow = rat_pow(&constants.phi_nu.clone().recip(), r);
        let mut ok = true;
        let mut instances = 0;
        for b in 0..table.base_count() {
            for n in 0..=m_max {
                let w = bin_rat(table, b, AggClass::Bridge, &rat_int(n as i64), &a_width);
                instances += 1;
                ok &= le_rat_pow_scaled(&w, &best_ub.radicand, n + r, best_ub.root, &phi_nu_pow);
            }
        }
        report.push(verdict(
            "bridge-bin-below-connective-power",
            ok,
            "w(b_{n,A}(v)) <= ub^(n+r) (1/phi_nu)^r with the best certified ub",
            instances,
            None,
        ));
    }

    report.push(verdict(
        "doubling-lower-bounds-monotone",
        bounds.doubling_monotone(),
        "lower bounds never decrease along the doubling subsequence",
        bounds.lower.len() as u64,
        None,
    ));

    // Streaming per-walk checks.
    {
        let mut sink = StreamChecks {
            len_min: cfg.length.len_min(),
            holder: holder.clone(),
            lwl: (0, 0),
            holder_counts: (0, 0),
            class: (0, 0),
        };
        enumerate_with_sink(cfg, &mut sink).map_err(enum_to_analysis)?;
        report.push(verdict(
            "step-count-within-length-budget",
            sink.lwl.1 == 0,
            "n <= len(pi)/len_min for every enumerated walk",
            sink.lwl.0,
            None,
        ));
        match holder {
            Some((eps, ref c)) => report.push(verdict(
                "height-holder-along-walks",
                sink.holder_counts.1 == 0,
                format!(
                    "|h(start) - h(end)| <= C len(pi)^eps with eps = {eps}, C = {}",
                    format_rat(c)
                ),
                sink.holder_counts.0,
                None,
            )),
            None => report.push(skip(
                "height-holder-along-walks",
                "no Hölder certificate configured",
            )),
        }
        report.push(verdict(
            "class-rederivation",
            sink.class.1 == 0,
            "streamed class equals the class recomputed from raw heights",
            sink.class.0,
            None,
        ));
    }

    Ok(report)
}

fn bin_rat_min(table: &AggregateTable, m: &Rat, width: &Rat) -> Rat {
    table.bridge_bin_min_custom_rat(m, width)
}

fn enum_to_analysis(e: EnumError) -> AnalysisError {
    AnalysisError::Invalid(e.to_string())
}

/// Per-walk ratio sandwiches for a pair of weight functions on the same
/// support.
struct RatioSink<'a> {
    psi: &'a WeightFunction,
    sup_lo: Rat,
    sup_hi: Rat,
    delta_cap: Rat,
    instances: u64,
    sup_violations: u64,
    delta_violations: u64,
}

impl WalkSink for RatioSink<'_> {
    fn visit(&mut self, w: &WalkView<'_>) {
        let wphi = w.weight_rat.expect("rational mode");
        let mut wpsi = Rat::one();
        for s in w.steps {
            wpsi *= self.psi.value(s);
        }
        let ratio = &wpsi / wphi;
        let n = w.steps.len() as u32;
        self.instances += 1;
        if !(rat_pow(&self.sup_lo, n) <= ratio && ratio <= rat_pow(&self.sup_hi, n)) {
            self.sup_violations += 1;
        }
        let cap = rat_pow(&self.delta_cap, n);
        if !(cap.clone().recip() <= ratio && ratio <= cap) {
            self.delta_violations += 1;
        }
    }
}

/// Continuity experiment between two weighted-length configurations
/// sharing one height structure.
///
/// Verifies, exactly: that a distance below one forces equal supports;
/// the per-walk ratio sandwich in terms of the supremum distance; the
/// per-walk relative sandwich in terms of `Delta = (1+delta)/(1-delta)`;
/// and the aggregate transfer bound, bin by bin.
pub fn continuity_experiment(
    phi: &WeightFunction,
    len1: &LengthFunction,
    psi: &WeightFunction,
    len2: &LengthFunction,
    height: &HeightStructure,
    m_max: u32,
    threads: usize,
) -> Result<PropertyReport, AnalysisError> {
    let delta = pair_distance(phi, len1, psi, len2)
        .map_err(|e| AnalysisError::Invalid(e.to_string()))?;
    if delta >= Rat::one() {
        return Err(AnalysisError::DeltaTooLarge(format_rat(&delta)));
    }
    let mut report = PropertyReport::default();

    // delta < 1 forces equal supports.
    let phi_support = phi
        .finite_support()
        .ok_or_else(|| AnalysisError::Invalid("finite supports required".into()))?;
    let psi_support = psi
        .finite_support()
        .ok_or_else(|| AnalysisError::Invalid("finite supports required".into()))?;
    let same_support = phi_support.len() == psi_support.len()
        && phi_support.iter().all(|(g, _)| psi.in_support(g));
    report.push(verdict(
        "distance-below-one-implies-equal-supports",
        same_support,
        format!("delta = {}", format_rat(&delta)),
        (phi_support.len() + psi_support.len()) as u64,
        None,
    ));

    let dsup = phi
        .sup_distance(psi)
        .map_err(|e| AnalysisError::Invalid(e.to_string()))?;
    let phi_min = phi.min_value().expect("finite support");
    let big_delta = (Rat::one() + &delta) / (Rat::one() - &delta);

    // Per-walk sandwiches over the phi-configuration walks.
    let group = phi.group().clone();
    let mut cfg_phi = EnumConfig::new(group.clone(), phi.clone(), len1.clone(), height.clone());
    cfg_phi.m_max = m_max;
    cfg_phi.bin_width = width_for(height, phi, len1)?;
    cfg_phi.threads = threads;
    let mut sink = RatioSink {
        psi,
        sup_lo: Rat::one() - &dsup / &phi_min,
        sup_hi: Rat::one() + &dsup / &phi_min,
        delta_cap: big_delta.clone(),
        instances: 0,
        sup_violations: 0,
        delta_violations: 0,
    };
    enumerate_with_sink(&cfg_phi, &mut sink).map_err(enum_to_analysis)?;
    report.push(verdict(
        "per-walk-supremum-sandwich",
        sink.sup_violations == 0,
        format!(
            "(1 - dsup/phi_min)^n <= w_psi/w_phi <= (1 + dsup/phi_min)^n, dsup = {}",
            format_rat(&dsup)
        ),
        sink.instances,
        None,
    ));
    report.push(verdict(
        "per-walk-relative-sandwich",
        sink.delta_violations == 0,
        format!(
            "Delta^-n <= w_psi/w_phi <= Delta^n with Delta = {}",
            format_rat(&big_delta)
        ),
        sink.instances,
        None,
    ));

    // Aggregate transfer bound, bin by bin on the psi table.
    let c_psi = width_for(height, psi, len2)?;
    let mut cfg_psi = EnumConfig::new(group.clone(), psi.clone(), len2.clone(), height.clone());
    cfg_psi.m_max = m_max;
    cfg_psi.bin_width = c_psi.clone();
    cfg_psi.threads = threads;
    let table_psi = enumerate_aggregate(&cfg_psi).map_err(enum_to_analysis)?;

    let r_max = (rat_int(m_max as i64) + &c_psi) * &big_delta;
    let m_max_phi = crate::exact::rat_ceil_u32(&r_max);
    let mut cfg_phi_big = cfg_phi.clone();
    cfg_phi_big.m_max = m_max_phi;
    cfg_phi_big.threads = threads;
    let table_phi = enumerate_aggregate(&cfg_phi_big).map_err(enum_to_analysis)?;

    let len1_min = len1.len_min();
    let mut ok = true;
    let mut instances = 0u64;
    let mut analytic_note = String::new();
    for m in 0..=m_max {
        let lhs = table_psi.sigma_bin_rat(m);
        let lo = rat_int(m as i64) / &big_delta;
        let hi = (rat_int(m as i64) + &c_psi) * &big_delta;
        let sum = table_phi
            .range(0, AggClass::Sigma, &lo, &hi)
            .weight
            .as_rat()
            .expect("rational mode")
            .clone();
        // factor = Delta^(hi / len1_min), compared via integer powers.
        let exponent = &hi / &len1_min;
        let (p, q) = match (exponent.numer().to_u32(), exponent.denom().to_u32()) {
            (Some(p), Some(q)) => (p, q),
            _ => {
                analytic_note = "exponent too large for exact comparison".into();
                ok = false;
                break;
            }
        };
        instances += 1;
        ok &= le_rat_pow_scaled(&lhs, &big_delta, p, q, &sum);
    }
    report.push(verdict(
        "aggregate-transfer-bound",
        ok,
        if analytic_note.is_empty() {
            format!(
                "w_psi(sigma_m) <= Delta^(R/len_min) sum over phi-walks with lengths in [m/Delta, (m+c)Delta)"
            )
        } else {
            analytic_note
        },
        instances,
        None,
    ));

    Ok(report)
}

/// Bin width for a configuration: the extension bound `A`, at least 1.
fn width_for(
    height: &HeightStructure,
    weight: &WeightFunction,
    length: &LengthFunction,
) -> Result<Rat, AnalysisError> {
    let a = crate::height::extension_width_cap(height, weight, length, None)
        .map_err(|e| AnalysisError::Invalid(e.to_string()))?;
    Ok(rat_int(a.max(1) as i64))
}

/// Truncation experiment: enumerate the same configuration at a decreasing
/// list of truncation levels and check monotone growth plus exact
/// stabilization below the certified level.
pub fn truncation_experiment(
    phi: &WeightFunction,
    length: &LengthFunction,
    height: &HeightStructure,
    eta_list: &[Rat],
    m: u32,
    threads: usize,
) -> Result<PropertyReport, AnalysisError> {
    if eta_list.is_empty() || eta_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(AnalysisError::Invalid(
            "eta list must be strictly decreasing".into(),
        ));
    }
    if eta_list.iter().any(|e| !e.is_positive()) {
        return Err(AnalysisError::Invalid("eta must be positive".into()));
    }
    let mut report = PropertyReport::default();
    let group = phi.group().clone();

    // Structural data must not move as the truncation refines.
    let mut sc_list = Vec::new();
    for eta in eta_list {
        let sc = structural_constants(height, phi, length, Some(eta), 6)
            .map_err(|e| AnalysisError::Invalid(e.to_string()))?;
        sc_list.push(sc);
    }
    let stable = sc_list.windows(2).all(|w| {
        w[0].psi == w[1].psi
            && w[0].a_min == w[1].a_min
            && w[0].a_cap == w[1].a_cap
            && w[0].j_cap == w[1].j_cap
            && w[0].up_extensions == w[1].up_extensions
            && w[0].down_extensions == w[1].down_extensions
    });
    report.push(verdict(
        "extension-data-stable-under-refinement",
        stable,
        "psi, a, A, J and the chosen extension edges persist as eta decreases",
        sc_list.len() as u64,
        None,
    ));
    let width = rat_int(sc_list[0].a_cap.max(1) as i64);

    let cert = certify_truncation_exactness(phi, length, m, &width).map_err(enum_to_analysis)?;

    let mut tables = Vec::new();
    for eta in eta_list {
        let mut cfg = EnumConfig::new(group.clone(), phi.clone(), length.clone(), height.clone());
        cfg.eta = Some(eta.clone());
        cfg.m_max = m;
        cfg.bin_width = width.clone();
        cfg.threads = threads;
        tables.push(enumerate_aggregate(&cfg).map_err(enum_to_analysis)?);
    }

    // Monotone non-decrease of every bin aggregate as eta decreases.
    {
        let mut ok = true;
        let mut instances = 0;
        for pair in tables.windows(2) {
            let (coarse, fine) = (&pair[0], &pair[1]);
            for b in 0..coarse.base_count() {
                for mm in 0..=m {
                    for class in [AggClass::Sigma, AggClass::HalfSpace, AggClass::Bridge] {
                        let x = coarse.bin(b, class, mm);
                        let y = fine.bin(b, class, mm);
                        instances += 1;
                        ok &= x.count <= y.count
                            && x.weight.as_rat().unwrap() <= y.weight.as_rat().unwrap();
                    }
                }
            }
        }
        report.push(verdict(
            "aggregates-monotone-under-refinement",
            ok,
            "every bin aggregate is non-decreasing as eta decreases",
            instances,
            None,
        ));
    }

    // Exact stabilization below the certified level.
    {
        let certified: Vec<&AggregateTable> = eta_list
            .iter()
            .zip(&tables)
            .filter(|(eta, _)| **eta <= cert.rho)
            .map(|(_, t)| t)
            .collect();
        if certified.len() < 2 {
            report.push(skip(
                "aggregates-stabilize-below-certified-level",
                format!(
                    "fewer than two levels at or below rho = {}",
                    format_rat(&cert.rho)
                ),
            ));
        } else {
            let mut ok = true;
            let mut instances = 0;
            for t in &certified[1..] {
                instances += 1;
                ok &= bins_identical(certified[0], t, m);
            }
            report.push(verdict(
                "aggregates-stabilize-below-certified-level",
                ok,
                format!("bit-identical bins up to m = {m} for eta <= {}", format_rat(&cert.rho)),
                instances,
                None,
            ));
        }
    }

    // When the untruncated step set is finite under the budget, it must
    // agree with any certified truncation.
    {
        let budget = rat_int(m as i64) + &width;
        match neighbor_table(phi, None, length, &budget) {
            Ok(_) => {
                let mut cfg = EnumConfig::new(group, phi.clone(), length.clone(), height.clone());
                cfg.eta = None;
                cfg.m_max = m;
                cfg.bin_width = width.clone();
                cfg.threads = threads;
                let full = enumerate_aggregate(&cfg).map_err(enum_to_analysis)?;
                let finest_certified = eta_list
                    .iter()
                    .zip(&tables)
                    .filter(|(eta, _)| **eta <= cert.rho)
                    .map(|(_, t)| t)
                    .next_back();
                match finest_certified {
                    Some(t) => report.push(verdict(
                        "untruncated-matches-certified",
                        bins_identical(&full, t, m),
                        "the untruncated aggregates equal the certified truncation",
                        (m + 1) as u64,
                        None,
                    )),
                    None => report.push(skip(
                        "untruncated-matches-certified",
                        "no eta in the list is at or below the certified level",
                    )),
                }
            }
            Err(_) => report.push(skip(
                "untruncated-matches-certified",
                "untruncated step set is not finite under the budget",
            )),
        }
    }

    Ok(report)
}

fn bins_identical(a: &AggregateTable, b: &AggregateTable, m_max: u32) -> bool {
    if a.base_count() != b.base_count() {
        return false;
    }
    for base in 0..a.base_count() {
        for m in 0..=m_max {
            for class in [AggClass::Sigma, AggClass::HalfSpace, AggClass::Bridge] {
                let x = a.bin(base, class, m);
                let y = b.bin(base, class, m);
                if x.count != y.count || x.weight != y.weight {
                    return false;
                }
            }
        }
    }
    true
}

/// Gap between the best certified upper and lower bounds as the horizon
/// grows; used to track convergence on the built-in examples.
pub fn bound_gap_sequence(
    cfg_template: &EnumConfig,
    constants: &StructuralConstants,
    m_values: &[u32],
) -> Result<Vec<(u32, f64)>, AnalysisError> {
    let mut out = Vec::new();
    for &m in m_values {
        let mut cfg = cfg_template.clone();
        cfg.m_max = m;
        let table = enumerate_aggregate(&cfg).map_err(enum_to_analysis)?;
        let fb: FeketeBounds = fekete_bounds(&table, constants)?;
        let (Some(lb), Some(ub)) = (fb.best_lower(), fb.best_upper()) else {
            return Err(AnalysisError::Invalid(
                "bounds unavailable for the gap sequence".into(),
            ));
        };
        out.push((m, ub.value() - lb.value()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::group::{Group, GroupElement, HomomorphismSpec};
    use crate::height::{make_height, HeightSpec};
    use crate::length::LengthDefault;

    fn z2_parts() -> (Group, WeightFunction, LengthFunction, HeightStructure) {
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
        (g, w, l, h)
    }

    #[test]
    fn square_lattice_suite_passes() {
        let (g, w, l, h) = z2_parts();
        let sc = structural_constants(&h, &w, &l, None, 4).unwrap();
        let mut cfg = EnumConfig::new(g, w, l, h);
        cfg.m_max = 6;
        let table = enumerate_aggregate(&cfg).unwrap();
        let report =
            verify_inequalities(&cfg, &table, &sc, Some((1.0, rat_int(1)))).unwrap();
        assert!(report.overall, "failed checks: {:#?}", report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .collect::<Vec<_>>());
        assert!(report.passed("bridge-supermultiplicative"));
        assert!(report.passed("height-holder-along-walks"));
    }

    #[test]
    fn config_mismatch_is_detected() {
        let (g, w, l, h) = z2_parts();
        let sc = structural_constants(&h, &w, &l, None, 4).unwrap();
        let mut cfg = EnumConfig::new(g, w, l, h);
        cfg.m_max = 3;
        let table = enumerate_aggregate(&cfg).unwrap();
        cfg.m_max = 4;
        assert!(matches!(
            verify_inequalities(&cfg, &table, &sc, None),
            Err(AnalysisError::ConfigMismatch(_))
        ));
    }

    #[test]
    fn continuity_identical_pair_is_exact() {
        let (_, w, l, h) = z2_parts();
        let report = continuity_experiment(&w, &l, &w, &l, &h, 4, 1).unwrap();
        assert!(report.overall);
    }

    #[test]
    fn continuity_line_pair() {
        let g = Group::free_abelian(1);
        let w1 = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat(1, 2))],
            true,
        )
        .unwrap();
        let w2 = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat(3, 4))],
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
            &w1,
            None,
        )
        .unwrap();
        let report = continuity_experiment(&w1, &l, &w2, &l, &h, 12, 1).unwrap();
        assert!(report.overall, "{:#?}", report.checks);
    }

    #[test]
    fn overlapping_supports_with_large_distance_error() {
        let g = Group::free_abelian(1);
        let w1 = WeightFunction::explicit(
            &g,
            vec![(GroupElement::Vector(vec![1]), rat(1, 2))],
            true,
        )
        .unwrap();
        let w2 = WeightFunction::explicit(
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
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1]),
                lambda: 1,
            },
            &g,
            &w1,
            None,
        )
        .unwrap();
        assert!(matches!(
            continuity_experiment(&w1, &l, &w2, &l, &h, 4, 1),
            Err(AnalysisError::DeltaTooLarge(_))
        ));
    }

    #[test]
    fn truncation_experiment_on_inverse_square() {
        let g = Group::free_abelian(1);
        let w = WeightFunction::power_law(
            &g,
            crate::weight::PowerLawShape::SingleAxis { axis: 0 },
            2,
            rat_int(1),
        )
        .unwrap();
        let l = LengthFunction::explicit(&g, vec![], LengthDefault::L1Norm).unwrap();
        let h = make_height(
            HeightSpec::Homomorphism {
                hom: HomomorphismSpec::new(vec![1]),
                lambda: 1,
            },
            &g,
            &w,
            Some(&rat(1, 4)),
        )
        .unwrap();
        let etas = vec![rat(1, 4), rat(1, 16), rat(1, 81), rat(1, 100)];
        let report = truncation_experiment(&w, &l, &h, &etas, 6, 1).unwrap();
        assert!(report.overall, "{:#?}", report.checks);
        assert!(report.passed("aggregates-stabilize-below-certified-level"));
        assert!(report.passed("untruncated-matches-certified"));
    }
}
