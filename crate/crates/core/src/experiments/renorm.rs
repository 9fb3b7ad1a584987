//! The renormalisation demo: FC estimate on the base group, `p_0`, and
//! exploration runs on a rank-2 quotient.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::criterion::{
    auto_n, conditional_success_stats, fc_stream, omega_total_domination_check, p_zero, Domination, ExplorationState, Explorer, FcInstance,
    FcReport, PZero, SprinkleParams, StratumRow, TieBreak, SITE_PC_Z2,
};
use crate::error::Result;
use crate::geometry::{GoodQuadruple, RenormLayout};
use crate::marked_group::{parse_group, GroupElement};
use crate::percolation::estimate::{wilson, Z95};
use crate::percolation::DEFAULT_SAW_CAP;

#[derive(Clone, Debug, Serialize)]
pub struct RenormSettings {
    pub base: String,
    /// Generators of `Lambda` in the base group's coordinates.
    pub lambda: Vec<Vec<i64>>,
    pub quadruple: GoodQuadruple,
    /// Sites `z` with `|z|_inf <= window`.
    pub window: i64,
    pub p: f64,
    pub delta: f64,
    pub m: usize,
    /// Target of the FC check; the report also carries the certified `eta`.
    pub eta: f64,
    pub runs: u64,
    /// `N` of the FC estimate; `auto_n` when absent.
    pub fc_n: Option<u32>,
    pub fc_trials: u64,
    pub rule: TieBreak,
    /// Gate for the "supercritical renormalised lattice" claim.
    pub site_pc: f64,
    pub seed: u64,
}

impl Default for RenormSettings {
    fn default() -> Self {
        RenormSettings {
            base: "3;".into(),
            lambda: vec![vec![0, 0, 4]],
            quadruple: GoodQuadruple { a: [5.0, -3.0], b: [5.0, 3.0], v: [5.0, 3.0] },
            window: 5,
            p: 0.65,
            delta: 0.05,
            m: 2,
            eta: 0.1,
            runs: 100,
            fc_n: None,
            fc_trials: 2000,
            rule: TieBreak::Lexicographic,
            site_pc: SITE_PC_Z2,
            seed: 42,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RenormReport {
    pub kappa: u32,
    pub rate: f64,
    pub fc: FcReport,
    /// `1 - ` the smallest FC lower bound.
    pub eta_hat: f64,
    pub p_zero: PZero,
    pub domination: Domination,
    /// `p_0 > site_pc`.
    pub gate: bool,
    pub runs: u64,
    pub explored_sites: u64,
    pub successes: u64,
    /// Frequency of `X = 1` over explored sites after step 0, with its Wilson interval.
    pub success_freq: f64,
    pub success_ci: (f64, f64),
    pub strata: Vec<StratumRow>,
    /// Strata with at least 30 samples all satisfy `freq >= p_0 - 2 ci`.
    pub strata_ok: bool,
    pub window_exhausted_runs: u64,
    pub max_sprinkles_per_edge: u32,
    pub sound: bool,
    #[serde(skip)]
    pub first: ExplorationState,
}

pub const STRATA_COLUMNS: &str = "stratum,key,samples,successes,freq,lower,upper,ci,p_zero,checked,ok";

impl RenormReport {
    pub fn strata_csv(&self) -> String {
        let mut out = format!("{STRATA_COLUMNS}\n");
        for r in &self.strata {
            let checked = r.samples >= 30;
            let ok = !checked || r.freq >= self.p_zero.p0 - 2.0 * r.ci;
            writeln!(out, "{},{},{},{},{},{},{},{},{},{},{}", r.stratum, r.key, r.samples, r.successes, r.freq, r.lower, r.upper, r.ci, self.p_zero.p0, checked, ok)
                .unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        writeln!(s, "kappa {} rate {:.6e}", self.kappa, self.rate).unwrap();
        writeln!(s, "fc {}", self.fc.summary()).unwrap();
        writeln!(s, "eta_hat {:.6} p_zero {:.6} t_star {}", self.eta_hat, self.p_zero.p0, self.p_zero.t_star.map(|t| t.to_string()).unwrap_or("inf".into()))
            .unwrap();
        writeln!(s, "gate p_zero > {:.6}: {}", SITE_PC_Z2, if self.gate { "yes" } else { "no" }).unwrap();
        writeln!(s, "omega_total {:.6} vs p+delta {:.6} margin {:.6}", self.domination.value, self.domination.target, self.domination.margin).unwrap();
        writeln!(
            s,
            "runs {} explored {} X=1 {} freq {:.4} [{:.4}, {:.4}] exhausted {} max_sprinkles {} sound {}",
            self.runs,
            self.explored_sites,
            self.successes,
            self.success_freq,
            self.success_ci.0,
            self.success_ci.1,
            self.window_exhausted_runs,
            self.max_sprinkles_per_edge,
            self.sound
        )
        .unwrap();
        writeln!(s, "strata ok {}", self.strata_ok).unwrap();
        s
    }
}

/// Builds the layout of a demo.
pub fn demo_layout(s: &RenormSettings) -> Result<RenormLayout> {
    let base = parse_group(&s.base)?;
    let lambda: Vec<GroupElement> = s.lambda.iter().map(|y| base.image(y)).collect();
    RenormLayout::aligned(base, lambda, s.quadruple, s.window)
}

pub fn renorm_demo(s: &RenormSettings) -> Result<RenormReport> {
    let layout = demo_layout(s)?;
    let n = s.fc_n.unwrap_or_else(|| auto_n(&s.quadruple, layout.r_s(), s.m));
    let inst = FcInstance::new(layout.base(), layout.basis(), &s.quadruple, n, s.m, DEFAULT_SAW_CAP)?;
    let fc = inst.run_with_stop(s.p, s.eta, s.fc_trials, fc_stream(s.seed), false);
    let eta_hat = fc.certified_eta();
    let explorer = Explorer::new(layout, s.m)?;
    let kappa = explorer.kappa();
    let sp = SprinkleParams::new(s.delta, kappa)?;
    let rate = sp.rate();
    let pz = p_zero(s.p, s.delta, kappa, eta_hat)?;
    let runs: Vec<ExplorationState> = (0..s.runs).into_par_iter().map(|r| explorer.run(s.p, rate, s.seed, r, s.rule)).collect();
    let sound = runs.iter().all(|st| explorer.verify_soundness(st));
    let strata = conditional_success_stats(&runs)?;
    let strata_ok = strata.iter().filter(|r| r.samples >= 30).all(|r| r.freq >= pz.p0 - 2.0 * r.ci);
    let (mut explored, mut successes) = (0u64, 0u64);
    for st in &runs {
        for step in st.steps.iter().skip(1) {
            explored += 1;
            successes += step.x as u64;
        }
    }
    let success_freq = if explored > 0 { successes as f64 / explored as f64 } else { 0.0 };
    Ok(RenormReport {
        kappa,
        rate,
        eta_hat,
        p_zero: pz,
        domination: omega_total_domination_check(s.p, s.delta, kappa),
        gate: pz.p0 > s.site_pc,
        runs: s.runs,
        explored_sites: explored,
        successes,
        success_freq,
        success_ci: wilson(successes, explored, Z95),
        strata,
        strata_ok,
        window_exhausted_runs: runs.iter().filter(|st| st.window_exhausted).count() as u64,
        max_sprinkles_per_edge: runs.iter().map(|st| st.max_sprinkles_per_edge).max().unwrap_or(0),
        sound,
        first: runs.into_iter().next().expect("at least one run"),
        fc,
    })
}
