//! Convergence tables along group sequences and quotient monotonicity tables.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::cache::{cached_estimate, Cache};
use super::pc::{PcEstimate, PcSettings};
use super::spec::{ExperimentKind, ExperimentSpec};
use crate::error::{Error, Result};
use crate::lattice::IntegerLattice;
use crate::marked_group::{agreement_radius, mg_distance, parse_group, GroupElement, MarkedAbelianGroup};

/// Why a rank-deficient member is excluded instead of estimated.
pub const RANK_NOTE: &str = "rank < 2: the critical parameter is constant equal to 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowStatus {
    Estimated,
    /// Rank below 2; reported with `p_c = 1` and excluded from comparisons.
    RankExcluded,
}

impl RowStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RowStatus::Estimated => "ok",
            RowStatus::RankExcluded => "excluded-rank",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityRow {
    pub label: String,
    pub n: Option<i64>,
    pub literal: String,
    pub estimate: PcEstimate,
    pub status: RowStatus,
    /// `|p_hat - p_hat(limit)|`.
    pub gap: Option<f64>,
    pub combined_ci: Option<f64>,
    pub mg_distance: f64,
    /// `None` when the relation lattices agree through `k_max`.
    pub agreement_radius: Option<u32>,
    pub cache_hit: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityTable {
    pub id: String,
    pub k_max: u32,
    pub limit_literal: Option<String>,
    pub limit: Option<PcEstimate>,
    pub rows: Vec<LocalityRow>,
}

pub const LOCALITY_COLUMNS: &str =
    "label,n,group,rank,p_hat,ci,window,trials,method,seed,stream,p_hat_2l,drift,gap,combined_ci,within_ci,mg_distance,agreement_radius,status";

fn opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn estimate_cells(e: &PcEstimate) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        e.rank,
        e.p_hat,
        e.ci,
        e.window,
        e.trials,
        e.method,
        e.seed,
        e.stream,
        opt(e.doubled.as_ref().map(|d| d.p_hat)),
        opt(e.drift()),
    )
}

impl LocalityTable {
    fn radius_cell(&self, r: Option<u32>) -> String {
        match r {
            Some(n) => n.to_string(),
            None => format!(">={}", self.k_max),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{LOCALITY_COLUMNS}").unwrap();
        if let (Some(lit), Some(e)) = (&self.limit_literal, &self.limit) {
            writeln!(out, "limit,,{},{},,,,,0,>={},{}", quote(lit), estimate_cells(e), self.k_max, if e.rank >= 2 { "ok" } else { "excluded-rank" }).unwrap();
        }
        for r in &self.rows {
            let within = match (r.gap, r.combined_ci) {
                (Some(g), Some(c)) => (g <= c).to_string(),
                _ => String::new(),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                quote(&r.label),
                opt(r.n),
                quote(&r.literal),
                estimate_cells(&r.estimate),
                opt(r.gap),
                opt(r.combined_ci),
                within,
                r.mg_distance,
                self.radius_cell(r.agreement_radius),
                r.status.label(),
            )
            .unwrap();
        }
        out
    }

    /// Two-column series `x p_hat`; `x` is the family parameter or the row index.
    pub fn plot_data(&self) -> String {
        let mut out = format!("# {} p_hat", self.id);
        if let Some(e) = &self.limit {
            write!(out, " (limit {})", e.p_hat).unwrap();
        }
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(out, "{} {}", r.n.unwrap_or(i as i64), r.estimate.p_hat).unwrap();
        }
        out
    }

    /// Gaps to the limit for estimated rows, in sequence order.
    pub fn gaps(&self) -> Vec<(String, f64, f64)> {
        self.rows.iter().filter_map(|r| Some((r.label.clone(), r.gap?, r.combined_ci?))).collect()
    }
}

fn estimate_all(cache: Option<&Cache>, groups: &[MarkedAbelianGroup], s: &PcSettings) -> Result<Vec<(PcEstimate, bool)>> {
    groups.par_iter().map(|g| cached_estimate(cache, g, s)).collect()
}

/// `p_hat` along the sequence, the limit's `p_hat`, and the marked-group distance to the limit.
pub fn run_locality(spec: &ExperimentSpec, cache: Option<&Cache>) -> Result<LocalityTable> {
    if spec.kind != ExperimentKind::Locality {
        return Err(Error::pre("run_locality needs a locality spec"));
    }
    let mut groups = spec.members.iter().map(|m| parse_group(&m.literal)).collect::<Result<Vec<_>>>()?;
    let limit = spec.limit.as_deref().map(parse_group).transpose()?;
    if let Some(l) = &limit {
        groups.push(l.clone());
    }
    let mut ests = estimate_all(cache, &groups, &spec.settings)?;
    let limit_est = limit.as_ref().map(|_| ests.pop().unwrap().0);
    let rows = spec
        .members
        .iter()
        .zip(groups.iter())
        .zip(ests)
        .map(|((m, g), (e, hit))| {
            let status = if g.percolates() { RowStatus::Estimated } else { RowStatus::RankExcluded };
            let usable = status == RowStatus::Estimated && limit_est.as_ref().is_some_and(|l| l.rank >= 2);
            let (gap, combined_ci) = match (&limit_est, usable) {
                (Some(l), true) => (Some((e.p_hat - l.p_hat).abs()), Some(e.ci + l.ci)),
                _ => (None, None),
            };
            let (dist, radius) = match &limit {
                Some(l) => (mg_distance(g, l, spec.k_max), agreement_radius(g, l, spec.k_max)),
                None => (f64::NAN, Some(0)),
            };
            LocalityRow {
                label: m.label.clone(),
                n: m.n,
                literal: m.literal.clone(),
                estimate: e,
                status,
                gap,
                combined_ci,
                mg_distance: dist,
                agreement_radius: radius,
                cache_hit: hit,
            }
        })
        .collect();
    Ok(LocalityTable { id: spec.id.clone(), k_max: spec.k_max, limit_literal: spec.limit.clone(), limit: limit_est, rows })
}

/// Ordering of a quotient estimate against the base, up to the combined CI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Order {
    Greater,
    Tie,
    Less,
}

impl Order {
    fn of(diff: f64, ci: f64) -> Self {
        if diff > ci {
            Order::Greater
        } else if diff < -ci {
            Order::Less
        } else {
            Order::Tie
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Order::Greater => "greater",
            Order::Tie => "tie",
            Order::Less => "less",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityRow {
    /// Generators of `Lambda` in generator coordinates.
    pub lambda: Vec<Vec<i64>>,
    pub group_key: String,
    pub estimate: PcEstimate,
    /// `p_hat(G / Lambda) - p_hat(G)`.
    pub diff: f64,
    pub combined_ci: f64,
    pub order: Order,
    /// Ordering against the previous row when its `Lambda` is contained in this one.
    pub vs_previous: Option<Order>,
    pub cache_hit: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityTable {
    pub id: String,
    pub base_literal: String,
    pub base: PcEstimate,
    pub rows: Vec<MonotonicityRow>,
}

pub const MONOTONICITY_COLUMNS: &str = "label,lambda,group,rank,p_hat,ci,window,trials,method,seed,stream,p_hat_2l,drift,diff,combined_ci,order,vs_previous";

fn lambda_text(l: &[Vec<i64>]) -> String {
    if l.is_empty() {
        return "0".into();
    }
    l.iter().map(|v| format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))).collect::<Vec<_>>().join(" ")
}

impl MonotonicityTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MONOTONICITY_COLUMNS}").unwrap();
        writeln!(out, "base,0,{},{},0,0,tie,", quote(&self.base.group_key), estimate_cells(&self.base)).unwrap();
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                i,
                lambda_text(&r.lambda),
                quote(&r.group_key),
                estimate_cells(&r.estimate),
                r.diff,
                r.combined_ci,
                r.order.label(),
                r.vs_previous.map(|o| o.label()).unwrap_or(""),
            )
            .unwrap();
        }
        out
    }

    pub fn plot_data(&self) -> String {
        let mut out = format!("# {} row p_hat (row -1 is the base)\n-1 {}\n", self.id, self.base.p_hat);
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(out, "{i} {}", r.estimate.p_hat).unwrap();
        }
        out
    }

    /// No quotient falls below the base, and nested rows never decrease, beyond the CIs.
    pub fn ordered(&self) -> bool {
        self.rows.iter().all(|r| r.order != Order::Less && r.vs_previous != Some(Order::Less))
    }
}

/// `Lambda` as a subgroup of `G`, lifted to `Z^d` together with the relations of `G`.
fn lifted_lambda(base: &MarkedAbelianGroup, gens: &[Vec<i64>]) -> Result<IntegerLattice> {
    let d = base.marks();
    let mut rows: Vec<Vec<i64>> = gens.to_vec();
    for r in &rows {
        if r.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: r.len() });
        }
    }
    rows.extend(base.relations()?.basis_i64()?);
    IntegerLattice::from_i64(d, &rows)
}

/// The quotient `G / <images of gens>`.
pub fn quotient_by_vectors(base: &MarkedAbelianGroup, gens: &[Vec<i64>]) -> Result<MarkedAbelianGroup> {
    for g in gens {
        if g.len() != base.marks() {
            return Err(Error::DimensionMismatch { expected: base.marks(), found: g.len() });
        }
    }
    let elems: Vec<GroupElement> = gens.iter().map(|y| base.image(y)).collect();
    base.quotient(&elems)
}

/// `p_hat(G / Lambda)` against `p_hat(G)` for each `Lambda` in the spec.
pub fn run_monotonicity(spec: &ExperimentSpec, cache: Option<&Cache>) -> Result<MonotonicityTable> {
    let base_lit = spec.base.as_deref().ok_or_else(|| Error::pre("monotonicity spec needs a base"))?;
    let base = parse_group(base_lit)?;
    let mut groups = vec![base.clone()];
    for l in &spec.lambdas {
        groups.push(quotient_by_vectors(&base, l)?);
    }
    let lifted = spec.lambdas.iter().map(|l| lifted_lambda(&base, l)).collect::<Result<Vec<_>>>()?;
    let mut ests = estimate_all(cache, &groups, &spec.settings)?.into_iter();
    let (base_est, _) = ests.next().unwrap();
    let mut rows: Vec<MonotonicityRow> = Vec::new();
    for (i, ((l, g), (e, hit))) in spec.lambdas.iter().zip(&groups[1..]).zip(ests).enumerate() {
        let diff = e.p_hat - base_est.p_hat;
        let combined_ci = e.ci + base_est.ci;
        let vs_previous = match i {
            0 => None,
            _ if lifted[i - 1].is_sublattice_of(&lifted[i])? => {
                let prev = &rows[i - 1].estimate;
                Some(Order::of(e.p_hat - prev.p_hat, e.ci + prev.ci))
            }
            _ => None,
        };
        rows.push(MonotonicityRow {
            lambda: l.clone(),
            group_key: g.key(),
            order: Order::of(diff, combined_ci),
            estimate: e,
            diff,
            combined_ci,
            vs_previous,
            cache_hit: hit,
        });
    }
    Ok(MonotonicityTable { id: spec.id.clone(), base_literal: base_lit.to_string(), base: base_est, rows })
}
