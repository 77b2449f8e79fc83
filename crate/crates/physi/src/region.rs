//! Achievable-rate-region tracing.
//!
//! Three region builders share one output shape. [`sweep_region`] walks a
//! multicast-floor grid and keeps the best scheme at each floor, which is the
//! subject of interest. [`tdma_baseline`] time-shares between a pure
//! multicast slot and a pure confidential slot, the classical alternative.
//! [`grid_reference_region`] brute-forces covariance pairs from a fixed
//! beamforming dictionary on a power grid; it exists to sanity-check the
//! other two on desk-scale antenna counts, not to be fast.

use rayon::prelude::*;

use crate::allocation::{enumerate_schemes, SchemeSet};
use crate::channel::{generate_channels, ChannelPair, CMatrix};
use crate::error::{Error, Result};
use crate::gsvd::{
    check_feasibility, classify_subchannels, gsvd, matching_classes, GsvdFactors,
    DEFAULT_CLASSIFY_TOL,
};
use crate::rates::{self, clean_rate};
use crate::solver::{dc_solve, max_min_multicast, DcConfig, PowerSolution, SolveOutcome};

/// Floors whose achievable cap falls within this margin are treated as out of
/// reach, matching the solver's own feasibility margin.
const FEAS_TOL: f64 = 1e-9;

/// Base seed for the random frames of the covariance dictionary.
const DICTIONARY_SEED: u64 = 0xD1C7_0001;

/// Which builder produced a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// Subchannel precoding with per-floor scheme selection.
    Gsvd,
    /// Time sharing between single-service slots.
    Tdma,
    /// Brute-force covariance search on a beamforming dictionary.
    GridReference,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Gsvd => "gsvd",
            RegionLabel::Tdma => "tdma",
            RegionLabel::GridReference => "grid_reference",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.write_str(self.as_str())
    }
}

/// One traced point: the confidential rate achieved at a multicast floor.
#[derive(Debug, Clone)]
pub struct RegionPoint {
    pub r_ms: f64,
    pub r_c: f64,
    /// Winning scheme index, for builders that select schemes.
    pub scheme_id: Option<usize>,
    /// Surrogate iterations spent by the winning solve.
    pub iterations: usize,
    /// Schemes still feasible at this floor.
    pub feasible_schemes_remaining: usize,
    /// Full allocation behind the point, when one exists.
    pub solution: Option<PowerSolution>,
}

/// A traced region boundary on a uniform floor grid.
#[derive(Debug, Clone)]
pub struct RateRegion {
    pub label: RegionLabel,
    pub delta: f64,
    pub p_budget: f64,
    pub points: Vec<RegionPoint>,
}

fn check_trace_args(p_budget: f64, delta: f64) -> Result<()> {
    if !(p_budget >= 0.0) || !p_budget.is_finite() {
        return Err(Error::InvalidInput("power budget must be finite and nonnegative".into()));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput("floor step delta must be positive and finite".into()));
    }
    Ok(())
}

/// Factors the pair, enumerates allocation schemes, and fails fast when
/// either service is structurally undeliverable, naming the antenna regime
/// in the error.
pub fn factor_and_enumerate(
    pair: &ChannelPair,
    classify_tol: f64,
) -> Result<(GsvdFactors, SchemeSet)> {
    let f = gsvd(pair)?;
    let part = classify_subchannels(&f, classify_tol)?;
    let report = check_feasibility(&f, &part);
    if !report.phy_si_feasible {
        let classes: Vec<String> = matching_classes(pair.nt, pair.nb, pair.ne)
            .iter()
            .map(|c| c.to_string())
            .collect();
        let side = if report.multicast_infeasible && report.confidential_infeasible {
            "no common subchannel and no secrecy-capable subchannel"
        } else if report.multicast_infeasible {
            "no common subchannel, multicast cannot reach both receivers"
        } else {
            "no secrecy-capable subchannel, confidential rate is zero"
        };
        return Err(Error::PhySiInfeasible {
            detail: format!(
                "{side} for antennas nt={}, nb={}, ne={} (regime {})",
                pair.nt,
                pair.nb,
                pair.ne,
                classes.join("/")
            ),
        });
    }
    let schemes = enumerate_schemes(&f, &part)?;
    Ok((f, schemes))
}

/// Solves every listed scheme at one floor, in parallel, and returns the
/// outcomes in scheme order.
fn solve_schemes_at_floor(
    f: &GsvdFactors,
    schemes: &SchemeSet,
    which: &[usize],
    r_ms: f64,
    p_budget: f64,
    cfg: &DcConfig,
) -> Result<Vec<(usize, SolveOutcome)>> {
    which
        .par_iter()
        .map(|&k| Ok((k, dc_solve(f, &schemes.schemes[k], r_ms, p_budget, cfg)?)))
        .collect()
}

/// Winner among solved outcomes: highest confidential rate, ties keeping the
/// lowest scheme index. Outcomes must be in ascending scheme order.
fn pick_winner(outcomes: &[(usize, SolveOutcome)]) -> Option<(usize, &PowerSolution)> {
    let mut best: Option<(usize, &PowerSolution)> = None;
    for (k, outcome) in outcomes {
        if let SolveOutcome::Solved(sol) = outcome {
            let better = match &best {
                None => true,
                Some((_, b)) => sol.secrecy_rate > b.secrecy_rate,
            };
            if better {
                best = Some((*k, sol));
            }
        }
    }
    best
}

/// Traces the precoded region.
///
/// The walk is sequential over floors `j * delta` and parallel over schemes
/// within a floor: a scheme found infeasible at one floor is removed for all
/// higher floors (feasibility only shrinks as the floor rises), and the best
/// confidential rate among the survivors wins the point. With
/// `cfg.recheck_removed` set, schemes removed at the previous floor are
/// re-probed once and the walk fails if any came back.
///
/// Floors are exact grid multiples (computed as `j as f64 * delta`, never
/// accumulated), so reruns and cross-region comparisons match bitwise.
pub fn sweep_region(
    pair: &ChannelPair,
    p_budget: f64,
    delta: f64,
    classify_tol: f64,
    cfg: &DcConfig,
) -> Result<RateRegion> {
    cfg.validate()?;
    check_trace_args(p_budget, delta)?;
    let (f, schemes) = factor_and_enumerate(pair, classify_tol)?;

    // Per-scheme multicast caps bound the floor grid from above.
    let mut max_cap = 0.0f64;
    for alloc in &schemes.schemes {
        let c2: Vec<f64> = alloc.gamma0.iter().map(|&i| f.c_sq[i]).collect();
        let d2: Vec<f64> = alloc.gamma0.iter().map(|&i| f.d_sq[i]).collect();
        let a: Vec<f64> = alloc.gamma0.iter().map(|&i| f.a_col_norm_sq[i]).collect();
        let (cap, _) = max_min_multicast(&c2, &d2, &a, p_budget, cfg)?;
        max_cap = max_cap.max(cap);
    }
    let jmax = if p_budget > 0.0 && max_cap > FEAS_TOL {
        let bound = max_cap / delta;
        if bound > 1e7 {
            return Err(Error::InvalidInput(format!(
                "delta {delta} yields {bound:.1e} floor steps over the achievable range"
            )));
        }
        bound.floor() as usize
    } else {
        0
    };

    let mut active: Vec<usize> = (0..schemes.schemes.len()).collect();
    let mut removed_last: Vec<usize> = Vec::new();
    let mut points = Vec::new();
    for j in 0..=jmax {
        let r_ms = j as f64 * delta;
        if cfg.recheck_removed && !removed_last.is_empty() {
            let probes = solve_schemes_at_floor(&f, &schemes, &removed_last, r_ms, p_budget, cfg)?;
            if let Some((k, _)) = probes
                .iter()
                .find(|(_, o)| matches!(o, SolveOutcome::Solved(_)))
            {
                return Err(Error::NumericalFailure {
                    context: "sweep_region",
                    detail: format!("scheme {k} came back after dropping out at a lower floor"),
                });
            }
        }
        let outcomes = solve_schemes_at_floor(&f, &schemes, &active, r_ms, p_budget, cfg)?;
        removed_last = outcomes
            .iter()
            .filter(|(_, o)| matches!(o, SolveOutcome::Infeasible))
            .map(|(k, _)| *k)
            .collect();
        if !removed_last.is_empty() {
            active.retain(|k| !removed_last.contains(k));
        }
        let Some((k, sol)) = pick_winner(&outcomes) else {
            break;
        };
        points.push(RegionPoint {
            r_ms,
            r_c: clean_rate(sol.secrecy_rate.max(0.0)),
            scheme_id: Some(k),
            iterations: sol.diagnostics.iterates.len(),
            feasible_schemes_remaining: active.len(),
            solution: Some(sol.clone()),
        });
        if active.is_empty() {
            break;
        }
    }
    Ok(RateRegion {
        label: RegionLabel::Gsvd,
        delta,
        p_budget,
        points,
    })
}

/// Time-sharing baseline with an equal two-slot frame: one slot carries
/// multicast on every subchannel at the max-min rate, the other carries the
/// best confidential allocation with no floor. Each service runs for half
/// the frame, so both endpoint rates are halved, and sweeping the fraction
/// `alpha` traces the segment between `(r_mc / 2, 0)` and `(0, r_c / 2)` on
/// the same floor grid as [`sweep_region`].
pub fn tdma_baseline(
    pair: &ChannelPair,
    p_budget: f64,
    delta: f64,
    classify_tol: f64,
    cfg: &DcConfig,
) -> Result<RateRegion> {
    cfg.validate()?;
    check_trace_args(p_budget, delta)?;
    let (f, schemes) = factor_and_enumerate(pair, classify_tol)?;

    let (r_mc_max, _) = max_min_multicast(&f.c_sq, &f.d_sq, &f.a_col_norm_sq, p_budget, cfg)?;
    let all: Vec<usize> = (0..schemes.schemes.len()).collect();
    let outcomes = solve_schemes_at_floor(&f, &schemes, &all, 0.0, p_budget, cfg)?;
    let r_c_max = pick_winner(&outcomes)
        .map(|(_, s)| clean_rate(s.secrecy_rate.max(0.0)))
        .unwrap_or(0.0);

    let r_mc_half = 0.5 * r_mc_max;
    let r_c_half = 0.5 * r_c_max;
    let jmax = if r_mc_half > FEAS_TOL {
        (r_mc_half / delta).floor() as usize
    } else {
        0
    };
    let points = (0..=jmax)
        .map(|j| {
            let r_ms = j as f64 * delta;
            let alpha = if r_mc_half > 0.0 { r_ms / r_mc_half } else { 0.0 };
            RegionPoint {
                r_ms,
                r_c: clean_rate(((1.0 - alpha) * r_c_half).max(0.0)),
                scheme_id: None,
                iterations: 0,
                feasible_schemes_remaining: 0,
                solution: None,
            }
        })
        .collect();
    Ok(RateRegion {
        label: RegionLabel::Tdma,
        delta,
        p_budget,
        points,
    })
}

/// Which beamforming frames the covariance search may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictionaryScope {
    /// Only the precoder's own column directions.
    GsvdSchemesOnly,
    /// Precoder columns, channel right-singular directions, and seeded
    /// random orthonormal frames.
    Full,
}

/// Hermitian `I + W diag(w) W^H`, assembled entrywise. Small dimensions only.
fn gram_plus_identity(w: &CMatrix, weights: &[f64]) -> CMatrix {
    let r = w.nrows();
    let mut m = CMatrix::identity(r, r);
    for (l, &wt) in weights.iter().enumerate() {
        if wt > 0.0 {
            for i in 0..r {
                for j in 0..r {
                    m[(i, j)] += w[(i, l)] * w[(j, l)].conj() * num_complex::Complex64::new(wt, 0.0);
                }
            }
        }
    }
    m
}

/// log2 det of a Hermitian positive definite matrix of size 1 or 2.
fn log2_det_small(m: &CMatrix) -> f64 {
    match m.nrows() {
        1 => m[(0, 0)].re.log2(),
        2 => (m[(0, 0)].re * m[(1, 1)].re - (m[(0, 1)] * m[(1, 0)]).re).log2(),
        n => unreachable!("log2_det_small called with size {n}"),
    }
}

/// Unit-norm column frames for the covariance dictionary.
fn dictionary_frames(pair: &ChannelPair, f: &GsvdFactors, scope: DictionaryScope) -> Vec<CMatrix> {
    let mut frames = Vec::new();
    let mut a_norm = f.a.clone();
    for mut col in a_norm.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= num_complex::Complex64::new(n, 0.0);
        }
    }
    frames.push(a_norm);
    if scope == DictionaryScope::Full {
        for h in [&pair.h1, &pair.h2] {
            let svd = h.clone().svd(false, true);
            if let Some(vt) = svd.v_t {
                frames.push(vt.adjoint());
            }
        }
        for s in 0..6u64 {
            let raw = generate_channels(pair.nt, pair.nt, pair.nt, DICTIONARY_SEED + s)
                .expect("square dims are valid")
                .h1;
            let qr = raw.qr();
            frames.push(qr.q());
        }
    }
    frames
}

/// Brute-force covariance reference for desk-scale antenna counts.
///
/// Candidates are pairs `(Q0, Qc)` of weighted sums of frame columns, the
/// weights drawn from a shared power grid of `grid_units` steps. Every
/// candidate's exact covariance-level rate pair is computed and folded into a
/// floor-indexed frontier. The winning allocations from [`sweep_region`] are
/// injected as additional candidates, so the reference can never fall below
/// the precoded region it checks. Capped at two antennas per terminal.
pub fn grid_reference_region(
    pair: &ChannelPair,
    p_budget: f64,
    delta: f64,
    grid_units: usize,
    cfg: &DcConfig,
    scope: DictionaryScope,
) -> Result<RateRegion> {
    cfg.validate()?;
    check_trace_args(p_budget, delta)?;
    for v in [pair.nt, pair.nb, pair.ne] {
        if v > 2 {
            return Err(Error::DimensionTooLarge {
                context: "grid_reference_region",
                size: v,
                limit: 2,
            });
        }
    }
    if grid_units == 0 {
        return Err(Error::InvalidInput("grid_units must be positive".into()));
    }

    let sweep = sweep_region(pair, p_budget, delta, DEFAULT_CLASSIFY_TOL, cfg)?;
    let f = gsvd(pair)?;
    let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL)?;
    let schemes = enumerate_schemes(&f, &part)?;

    let mut best_at: Vec<f64> = Vec::new();
    let mut insert = |bucket: usize, rc: f64| {
        if best_at.len() <= bucket {
            best_at.resize(bucket + 1, f64::NEG_INFINITY);
        }
        if rc > best_at[bucket] {
            best_at[bucket] = rc;
        }
    };

    if p_budget > 0.0 {
        let unit = p_budget / grid_units as f64;
        for frame in dictionary_frames(pair, &f, scope) {
            let cols = frame.ncols();
            if cols == 0 {
                continue;
            }
            let w1 = &pair.h1 * &frame;
            let w2 = &pair.h2 * &frame;
            let axes = 2 * cols;
            let mut ks = vec![0usize; axes];
            let mut conf_w = vec![0.0f64; cols];
            let mut tot_w = vec![0.0f64; cols];
            loop {
                if ks.iter().sum::<usize>() <= grid_units {
                    for l in 0..cols {
                        conf_w[l] = ks[l] as f64 * unit;
                        tot_w[l] = conf_w[l] + ks[cols + l] as f64 * unit;
                    }
                    let ld1c = log2_det_small(&gram_plus_identity(&w1, &conf_w));
                    let ld2c = log2_det_small(&gram_plus_identity(&w2, &conf_w));
                    let ld1t = log2_det_small(&gram_plus_identity(&w1, &tot_w));
                    let ld2t = log2_det_small(&gram_plus_identity(&w2, &tot_w));
                    let rc = (ld1c - ld2c).max(0.0);
                    let r0 = (ld1t - ld1c).min(ld2t - ld2c).max(0.0);
                    insert((r0 / delta).floor() as usize, rc);
                }
                let mut i = 0;
                loop {
                    ks[i] += 1;
                    if ks[i] <= grid_units {
                        break;
                    }
                    ks[i] = 0;
                    i += 1;
                    if i == axes {
                        break;
                    }
                }
                if i == axes {
                    break;
                }
            }
        }
    } else {
        insert(0, 0.0);
    }

    // The sweep winners are legitimate covariance candidates; folding them in
    // pins the reference frontier at or above the precoded region.
    for pt in &sweep.points {
        let (Some(k), Some(sol)) = (pt.scheme_id, pt.solution.as_ref()) else {
            continue;
        };
        let alloc = &schemes.schemes[k];
        let (q0, qc) = rates::gsvd_covariances(&f, alloc, &sol.p0, &sol.pc)?;
        let cr = rates::covariance_rates(pair, &q0, &qc)?;
        let j_src = (pt.r_ms / delta).round() as usize;
        let j_nat = (cr.r0.max(0.0) / delta).floor() as usize;
        insert(j_src.max(j_nat), cr.rc.max(0.0));
    }

    for j in (0..best_at.len().saturating_sub(1)).rev() {
        if best_at[j + 1] > best_at[j] {
            best_at[j] = best_at[j + 1];
        }
    }
    let points = best_at
        .iter()
        .enumerate()
        .filter(|(_, &rc)| rc.is_finite())
        .map(|(j, &rc)| RegionPoint {
            r_ms: j as f64 * delta,
            r_c: clean_rate(rc),
            scheme_id: None,
            iterations: 0,
            feasible_schemes_remaining: 0,
            solution: None,
        })
        .collect();
    Ok(RateRegion {
        label: RegionLabel::GridReference,
        delta,
        p_budget,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channels;

    fn cfg() -> DcConfig {
        DcConfig::default()
    }

    /// First seed whose 2x2x2 draw supports both services with a positive
    /// confidential rate.
    fn feasible_2x2x2() -> (u64, ChannelPair) {
        for seed in 0..64 {
            let pair = generate_channels(2, 2, 2, seed).unwrap();
            match sweep_region(&pair, 10.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()) {
                Ok(region) if region.points[0].r_c > 0.1 => return (seed, pair),
                _ => continue,
            }
        }
        panic!("no feasible 2x2x2 seed in range");
    }

    #[test]
    fn sweep_points_sit_on_exact_grid_and_shrink() {
        let (_, pair) = feasible_2x2x2();
        let region = sweep_region(&pair, 10.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()).unwrap();
        assert!(region.points.len() >= 2, "expected a nontrivial grid");
        let f = gsvd(&pair).unwrap();
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        let n_schemes = enumerate_schemes(&f, &part).unwrap().len();
        for (j, pt) in region.points.iter().enumerate() {
            assert_eq!(pt.r_ms.to_bits(), (j as f64 * 0.25).to_bits());
            assert!(pt.r_c >= 0.0);
            assert!(pt.scheme_id.unwrap() < n_schemes);
            assert!(pt.feasible_schemes_remaining >= 1);
            assert!(pt.feasible_schemes_remaining <= n_schemes);
            let sol = pt.solution.as_ref().unwrap();
            assert!(sol.multicast_rate_1 >= pt.r_ms - 1e-6);
            assert!(sol.multicast_rate_2 >= pt.r_ms - 1e-6);
            assert!(sol.total_power <= 10.0 + 1e-6);
        }
        for w in region.points.windows(2) {
            assert!(
                w[1].r_c <= w[0].r_c + 1e-6,
                "confidential rate must shrink as the floor rises: {} -> {}",
                w[0].r_c,
                w[1].r_c
            );
        }
    }

    #[test]
    fn structurally_infeasible_antennas_are_rejected() {
        // nb + ne <= nt leaves no common subchannel at all.
        let pair = generate_channels(4, 2, 2, 7).unwrap();
        let err = sweep_region(&pair, 10.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()).unwrap_err();
        match err {
            Error::PhySiInfeasible { detail } => {
                assert!(detail.contains("C5"), "regime missing from: {detail}")
            }
            other => panic!("expected PhySiInfeasible, got {other:?}"),
        }
    }

    #[test]
    fn tdma_interpolates_between_its_endpoints() {
        let (_, pair) = feasible_2x2x2();
        let sweep = sweep_region(&pair, 10.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()).unwrap();
        let tdma = tdma_baseline(&pair, 10.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()).unwrap();
        // The no-floor endpoint is half the same best confidential solve.
        assert!((tdma.points[0].r_c - 0.5 * sweep.points[0].r_c).abs() < 1e-9);
        let r_c_half = tdma.points[0].r_c;
        let f = gsvd(&pair).unwrap();
        let (r_mc_max, _) =
            max_min_multicast(&f.c_sq, &f.d_sq, &f.a_col_norm_sq, 10.0, &cfg()).unwrap();
        let r_mc_half = 0.5 * r_mc_max;
        for pt in &tdma.points {
            let alpha = pt.r_ms / r_mc_half;
            assert!((pt.r_c - (1.0 - alpha) * r_c_half).abs() < 1e-9);
            assert!(pt.solution.is_none());
        }
        let last = tdma.points.last().unwrap();
        assert!(last.r_ms <= r_mc_half + 1e-12);
    }

    #[test]
    fn covariance_reference_covers_the_precoded_region() {
        let (_, pair) = feasible_2x2x2();
        let sweep = sweep_region(&pair, 10.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()).unwrap();
        let oracle =
            grid_reference_region(&pair, 10.0, 0.25, 12, &cfg(), DictionaryScope::Full).unwrap();
        for pt in &sweep.points {
            let j = (pt.r_ms / 0.25).round() as usize;
            let ref_pt = oracle
                .points
                .iter()
                .find(|p| (p.r_ms / 0.25).round() as usize == j)
                .unwrap_or_else(|| panic!("reference missing floor {}", pt.r_ms));
            assert!(
                ref_pt.r_c >= pt.r_c - 1e-9,
                "reference {} below precoded {} at floor {}",
                ref_pt.r_c,
                pt.r_c,
                pt.r_ms
            );
        }
    }

    #[test]
    fn oversized_antennas_are_rejected_by_the_reference() {
        let pair = generate_channels(3, 4, 3, 0).unwrap();
        assert!(matches!(
            grid_reference_region(&pair, 10.0, 0.25, 8, &cfg(), DictionaryScope::Full),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn zero_budget_gives_the_origin_only() {
        let (_, pair) = feasible_2x2x2();
        let region = sweep_region(&pair, 0.0, 0.25, DEFAULT_CLASSIFY_TOL, &cfg()).unwrap();
        assert_eq!(region.points.len(), 1);
        assert_eq!(region.points[0].r_ms, 0.0);
        assert_eq!(region.points[0].r_c, 0.0);
    }
}
