//! Per-subchannel power allocation for one message-allocation scheme.
//!
//! The problem: maximize the confidential secrecy rate subject to a quality
//! floor `r_ms` on the multicast rate at both receivers and a total transmit
//! power budget. The secrecy objective is a difference of concave terms, so
//! the solver iterates a concave surrogate: the subtracted term is
//! linearized at a reference point, each surrogate problem is solved exactly
//! with a log-barrier interior-point method, and the reference moves to the
//! new solution. The surrogate never overshoots the true objective and is
//! tight at the reference, which makes the true objective nondecreasing
//! across iterations.
//!
//! [`grid_oracle`] is an intentionally independent brute-force reference for
//! desk-scale instances; it shares no code with the barrier path.

mod barrier;

use serde::{Deserialize, Serialize};

use crate::allocation::MessageAllocation;
use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;
use crate::rates;

use barrier::{Constraint, LogTerm, Params, Problem};

const LN2: f64 = std::f64::consts::LN_2;

/// Confidential subchannels with squared receiver-1 gain at or below this
/// are pinned to zero power instead of entering the Newton system.
const PIN_TOL: f64 = 1e-15;

/// Quality floors below this behave as "no multicast requirement".
const RMS_ZERO_TOL: f64 = 1e-12;

/// Margin by which the achievable multicast rate must clear the floor for a
/// scheme to count as feasible.
const FEAS_TOL: f64 = 1e-9;

/// Knobs for the surrogate iteration and its inner barrier solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcConfig {
    /// Stop when the true objective moves less than this between iterations.
    pub epsilon: f64,
    /// Hard cap on surrogate iterations.
    pub max_dc_iters: usize,
    /// Initial barrier weight.
    pub barrier_t0: f64,
    /// Geometric growth factor of the barrier weight.
    pub barrier_mu: f64,
    /// Target duality-gap bound `m / t` for the inner solver.
    pub duality_gap: f64,
    /// Newton decrement threshold (half squared decrement) per centering.
    pub newton_tol: f64,
    /// Newton step cap per centering stage.
    pub newton_max_steps: usize,
    /// Points per axis for brute-force reference searches.
    pub grid_points: usize,
    /// Also run the iteration from a uniform reference and record the
    /// disagreement, as local-optimum evidence.
    pub multi_start_check: bool,
    /// During sweeps, re-probe schemes just removed as infeasible at the next
    /// grid point and assert they stayed infeasible.
    pub recheck_removed: bool,
}

impl Default for DcConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            max_dc_iters: 100,
            barrier_t0: 1.0,
            barrier_mu: 20.0,
            duality_gap: 5e-8,
            newton_tol: 5e-14,
            newton_max_steps: 100,
            grid_points: 400,
            multi_start_check: false,
            recheck_removed: false,
        }
    }
}

impl DcConfig {
    fn barrier_params(&self) -> Params {
        Params {
            t0: self.barrier_t0,
            mu: self.barrier_mu,
            gap_tol: self.duality_gap,
            newton_tol: self.newton_tol,
            newton_max_steps: self.newton_max_steps,
        }
    }

    /// Rejects values that would make the solver meaningless.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epsilon", self.epsilon),
            ("barrier_t0", self.barrier_t0),
            ("duality_gap", self.duality_gap),
            ("newton_tol", self.newton_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite")));
            }
        }
        if !(self.barrier_mu > 1.0) || !self.barrier_mu.is_finite() {
            return Err(Error::InvalidInput("barrier_mu must exceed 1".into()));
        }
        if self.max_dc_iters == 0 || self.newton_max_steps == 0 || self.grid_points == 0 {
            return Err(Error::InvalidInput(
                "iteration caps and grid density must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One scheme's power-allocation problem, flattened to gain vectors.
///
/// Multicast entries follow the scheme's multicast set in ascending
/// subchannel order; confidential entries likewise. `pc_ref` is the
/// linearization point for the surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemInstance {
    pub c2_mult: Vec<f64>,
    pub d2_mult: Vec<f64>,
    pub a_mult: Vec<f64>,
    pub c2_conf: Vec<f64>,
    pub d2_conf: Vec<f64>,
    pub a_conf: Vec<f64>,
    pub p_budget: f64,
    pub r_ms: f64,
    pub pc_ref: Vec<f64>,
}

fn check_gain_vec(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().any(|&g| !(0.0..=1.0).contains(&g)) {
        return Err(Error::InvalidInput(format!("{name} gains must lie in [0, 1]")));
    }
    Ok(())
}

impl SubproblemInstance {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c2_mult: Vec<f64>,
        d2_mult: Vec<f64>,
        a_mult: Vec<f64>,
        c2_conf: Vec<f64>,
        d2_conf: Vec<f64>,
        a_conf: Vec<f64>,
        p_budget: f64,
        r_ms: f64,
        pc_ref: Vec<f64>,
    ) -> Result<Self> {
        if c2_mult.len() != d2_mult.len() || c2_mult.len() != a_mult.len() {
            return Err(Error::DimensionMismatch {
                context: "SubproblemInstance::new",
                expected: "equal multicast vector lengths".into(),
                actual: format!("{}/{}/{}", c2_mult.len(), d2_mult.len(), a_mult.len()),
            });
        }
        if c2_conf.len() != d2_conf.len() || c2_conf.len() != a_conf.len() || c2_conf.len() != pc_ref.len() {
            return Err(Error::DimensionMismatch {
                context: "SubproblemInstance::new",
                expected: "equal confidential vector lengths".into(),
                actual: format!(
                    "{}/{}/{}/{}",
                    c2_conf.len(),
                    d2_conf.len(),
                    a_conf.len(),
                    pc_ref.len()
                ),
            });
        }
        check_gain_vec("multicast", &c2_mult)?;
        check_gain_vec("multicast", &d2_mult)?;
        check_gain_vec("confidential", &c2_conf)?;
        check_gain_vec("confidential", &d2_conf)?;
        for (name, v) in [("a_mult", &a_mult), ("a_conf", &a_conf)] {
            if v.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} column costs must be positive")));
            }
        }
        if !(p_budget >= 0.0) || !p_budget.is_finite() {
            return Err(Error::InvalidInput("power budget must be finite and nonnegative".into()));
        }
        if !(r_ms >= 0.0) || !r_ms.is_finite() {
            return Err(Error::InvalidInput("multicast floor must be finite and nonnegative".into()));
        }
        if pc_ref.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("reference powers must be finite and nonnegative".into()));
        }
        Ok(Self {
            c2_mult,
            d2_mult,
            a_mult,
            c2_conf,
            d2_conf,
            a_conf,
            p_budget,
            r_ms,
            pc_ref,
        })
    }

    /// Extracts a scheme's gain vectors from the factorization.
    pub fn from_allocation(
        f: &GsvdFactors,
        alloc: &MessageAllocation,
        r_ms: f64,
        p_budget: f64,
        pc_ref: Vec<f64>,
    ) -> Result<Self> {
        if alloc.q != f.q {
            return Err(Error::DimensionMismatch {
                context: "SubproblemInstance::from_allocation",
                expected: format!("allocation over {} subchannels", f.q),
                actual: format!("{}", alloc.q),
            });
        }
        let pick = |idx: &[usize], src: &[f64]| idx.iter().map(|&i| src[i]).collect::<Vec<_>>();
        Self::new(
            pick(&alloc.gamma0, &f.c_sq),
            pick(&alloc.gamma0, &f.d_sq),
            pick(&alloc.gamma0, &f.a_col_norm_sq),
            pick(&alloc.gammac, &f.c_sq),
            pick(&alloc.gammac, &f.d_sq),
            pick(&alloc.gammac, &f.a_col_norm_sq),
            p_budget,
            r_ms,
            pc_ref,
        )
    }

    /// Same instance linearized at a different reference.
    pub fn with_ref(&self, pc_ref: Vec<f64>) -> Self {
        let mut out = self.clone();
        out.pc_ref = pc_ref;
        out
    }

    /// True (non-surrogate) secrecy objective at confidential powers `pc`.
    pub fn true_objective(&self, pc: &[f64]) -> Result<f64> {
        if pc.len() != self.c2_conf.len() {
            return Err(Error::DimensionMismatch {
                context: "true_objective",
                expected: format!("{} confidential powers", self.c2_conf.len()),
                actual: format!("{}", pc.len()),
            });
        }
        Ok(self
            .c2_conf
            .iter()
            .zip(&self.d2_conf)
            .zip(pc)
            .map(|((&c, &d), &p)| (1.0 + p * c).log2() - (1.0 + p * d).log2())
            .sum())
    }

    fn multicast_rates_at(&self, p0: &[f64]) -> (f64, f64) {
        let r1 = self
            .c2_mult
            .iter()
            .zip(p0)
            .map(|(&g, &p)| (1.0 + p * g).log2())
            .sum();
        let r2 = self
            .d2_mult
            .iter()
            .zip(p0)
            .map(|(&g, &p)| (1.0 + p * g).log2())
            .sum();
        (r1, r2)
    }
}

/// Concave surrogate of the secrecy objective: the leakage term is replaced
/// by its tangent at `pc_ref`, so the surrogate equals the true objective at
/// the reference and never exceeds it elsewhere.
pub fn surrogate_objective(inst: &SubproblemInstance, pc: &[f64]) -> Result<f64> {
    if pc.len() != inst.c2_conf.len() {
        return Err(Error::DimensionMismatch {
            context: "surrogate_objective",
            expected: format!("{} confidential powers", inst.c2_conf.len()),
            actual: format!("{}", pc.len()),
        });
    }
    let mut g = 0.0;
    for n in 0..pc.len() {
        let (c, d, r, p) = (inst.c2_conf[n], inst.d2_conf[n], inst.pc_ref[n], pc[n]);
        let leak_ref = 1.0 + r * d;
        g += (1.0 + p * c).log2() - leak_ref.log2() - d * (p - r) / (LN2 * leak_ref);
    }
    Ok(g)
}

/// Result of one inner (fixed-reference) solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub p0: Vec<f64>,
    pub pc: Vec<f64>,
    /// Surrogate objective at the solution.
    pub surrogate_value: f64,
    /// True secrecy objective at the solution.
    pub true_value: f64,
    pub kkt_residual: f64,
    pub newton_steps: usize,
}

/// Inner-solve outcome: either a solution or proof that no point meets the
/// constraints.
#[derive(Debug, Clone)]
pub enum SubproblemOutcome {
    Solved(SubproblemSolution),
    Infeasible,
}

/// One surrogate iteration's bookkeeping.
#[derive(Debug, Clone, Copy)]
pub struct DcIterate {
    pub true_objective: f64,
    pub surrogate_objective: f64,
    /// Distance the confidential powers moved from the reference.
    pub pc_step_norm: f64,
    pub newton_steps: usize,
}

/// Diagnostics accumulated across the surrogate iteration.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub iterates: Vec<DcIterate>,
    pub converged: bool,
    pub kkt_residual: f64,
    /// True-objective gain from one extra solve linearized at the final
    /// point; small values certify stationarity.
    pub stationarity_gap: f64,
    /// Disagreement with a uniform-reference restart, when requested.
    pub multi_start_gap: Option<f64>,
    pub newton_steps_total: usize,
}

/// Converged power allocation for one scheme.
#[derive(Debug, Clone)]
pub struct PowerSolution {
    /// Multicast powers, ordered like the scheme's multicast set.
    pub p0: Vec<f64>,
    /// Confidential powers, ordered like the scheme's confidential set.
    pub pc: Vec<f64>,
    pub secrecy_rate: f64,
    pub multicast_rate_1: f64,
    pub multicast_rate_2: f64,
    pub total_power: f64,
    pub diagnostics: SolveDiagnostics,
}

/// Scheme-level outcome: a solution, or infeasibility of the quality floor.
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Solved(PowerSolution),
    Infeasible,
}

/// Largest multicast rate guaranteed to both receivers under the power
/// budget, together with the powers achieving it. Solved as an epigraph
/// problem: maximize the floor variable under both rate constraints.
pub fn max_min_multicast(
    c2: &[f64],
    d2: &[f64],
    a: &[f64],
    p_budget: f64,
    cfg: &DcConfig,
) -> Result<(f64, Vec<f64>)> {
    let m = c2.len();
    if m != d2.len() || m != a.len() {
        return Err(Error::DimensionMismatch {
            context: "max_min_multicast",
            expected: "equal gain vector lengths".into(),
            actual: format!("{}/{}/{}", m, d2.len(), a.len()),
        });
    }
    if m == 0 || p_budget <= 0.0 {
        return Ok((0.0, vec![0.0; m]));
    }
    let tau = m;
    let mut cons: Vec<Constraint> = (0..m).map(Constraint::NonNeg).collect();
    cons.push(Constraint::LinearUpper {
        coeffs: (0..m).map(|j| (j, a[j])).collect(),
        bound: p_budget,
    });
    for gains in [c2, d2] {
        cons.push(Constraint::LogRateLower {
            logs: gains
                .iter()
                .enumerate()
                .map(|(j, &g)| LogTerm { var: j, gain: g })
                .collect(),
            lin: vec![(tau, -1.0)],
            offset: 0.0,
        });
    }
    let mut obj_lin = vec![0.0; m + 1];
    obj_lin[tau] = 1.0;
    let prob = Problem {
        n: m + 1,
        obj_logs: vec![],
        obj_lin,
        cons,
    };
    let p0: Vec<f64> = a.iter().map(|&w| p_budget / (2.0 * m as f64 * w)).collect();
    let r1: f64 = c2.iter().zip(&p0).map(|(&g, &p)| (1.0 + g * p).log2()).sum();
    let r2: f64 = d2.iter().zip(&p0).map(|(&g, &p)| (1.0 + g * p).log2()).sum();
    let mn = r1.min(r2);
    let tau0 = if mn > 0.0 { 0.5 * mn } else { -1.0 };
    let mut x0 = nalgebra::DVector::<f64>::zeros(m + 1);
    for j in 0..m {
        x0[j] = p0[j];
    }
    x0[tau] = tau0;
    let sol = barrier::maximize(&prob, &x0, &cfg.barrier_params())?;
    let powers: Vec<f64> = (0..m).map(|j| sol.x[j].max(0.0)).collect();
    let ra: f64 = c2.iter().zip(&powers).map(|(&g, &p)| (1.0 + g * p).log2()).sum();
    let rb: f64 = d2.iter().zip(&powers).map(|(&g, &p)| (1.0 + g * p).log2()).sum();
    Ok((ra.min(rb), powers))
}

/// Interior multicast start for a feasible instance, or None when the
/// quality floor is out of reach under the budget.
fn compute_start(inst: &SubproblemInstance, cfg: &DcConfig) -> Result<Option<Vec<f64>>> {
    let m = inst.c2_mult.len();
    if inst.p_budget <= 0.0 {
        return Ok(if inst.r_ms > RMS_ZERO_TOL { None } else { Some(vec![0.0; m]) });
    }
    if inst.r_ms <= RMS_ZERO_TOL {
        let p0 = inst
            .a_mult
            .iter()
            .map(|&w| inst.p_budget / (2.0 * (m.max(1)) as f64 * w))
            .collect();
        return Ok(Some(p0));
    }
    if m == 0 {
        return Ok(None);
    }
    let (rstar, p0star) =
        max_min_multicast(&inst.c2_mult, &inst.d2_mult, &inst.a_mult, inst.p_budget, cfg)?;
    if rstar < inst.r_ms + FEAS_TOL {
        return Ok(None);
    }
    // Pull back from the max-min point as far as the floor allows, to leave
    // budget headroom for the confidential powers.
    for theta in [0.5, 0.25, 0.1, 0.01, 1e-3, 1e-4] {
        let cand: Vec<f64> = p0star.iter().map(|&p| (1.0 - theta) * p).collect();
        let (r1, r2) = inst.multicast_rates_at(&cand);
        if r1.min(r2) > inst.r_ms + 1e-12 {
            return Ok(Some(cand));
        }
    }
    Ok(Some(p0star))
}

/// Zero-power solution used for degenerate instances.
fn trivial_solution(inst: &SubproblemInstance) -> Result<SubproblemSolution> {
    let pc = vec![0.0; inst.c2_conf.len()];
    Ok(SubproblemSolution {
        p0: vec![0.0; inst.c2_mult.len()],
        surrogate_value: surrogate_objective(inst, &pc)?,
        true_value: inst.true_objective(&pc)?,
        pc,
        kkt_residual: 0.0,
        newton_steps: 0,
    })
}

/// Solves the concave surrogate problem at the instance's reference from a
/// caller-provided interior multicast start.
fn solve_with_start(
    inst: &SubproblemInstance,
    cfg: &DcConfig,
    p0_start: &[f64],
) -> Result<SubproblemSolution> {
    let m = inst.c2_mult.len();
    let active: Vec<usize> = (0..inst.c2_conf.len())
        .filter(|&n| inst.c2_conf[n] > PIN_TOL)
        .collect();
    let nv = m + active.len();
    if inst.p_budget <= 0.0 || nv == 0 {
        return trivial_solution(inst);
    }

    let mut obj_logs = Vec::with_capacity(active.len());
    let mut obj_lin = vec![0.0; nv];
    for (k, &n) in active.iter().enumerate() {
        obj_logs.push(LogTerm {
            var: m + k,
            gain: inst.c2_conf[n],
        });
        let leak_ref = 1.0 + inst.pc_ref[n] * inst.d2_conf[n];
        obj_lin[m + k] = -inst.d2_conf[n] / (LN2 * leak_ref);
    }
    let mut cons: Vec<Constraint> = (0..nv).map(Constraint::NonNeg).collect();
    let mut budget_coeffs: Vec<(usize, f64)> = (0..m).map(|j| (j, inst.a_mult[j])).collect();
    for (k, &n) in active.iter().enumerate() {
        budget_coeffs.push((m + k, inst.a_conf[n]));
    }
    cons.push(Constraint::LinearUpper {
        coeffs: budget_coeffs,
        bound: inst.p_budget,
    });
    if inst.r_ms > RMS_ZERO_TOL {
        for gains in [&inst.c2_mult, &inst.d2_mult] {
            cons.push(Constraint::LogRateLower {
                logs: gains
                    .iter()
                    .enumerate()
                    .map(|(j, &g)| LogTerm { var: j, gain: g })
                    .collect(),
                lin: vec![],
                offset: -inst.r_ms,
            });
        }
    }
    let prob = Problem {
        n: nv,
        obj_logs,
        obj_lin,
        cons,
    };

    let spent: f64 = p0_start
        .iter()
        .zip(&inst.a_mult)
        .map(|(&p, &w)| p * w)
        .sum();
    let rem = inst.p_budget - spent;
    if !(rem > 0.0) {
        return Err(Error::NumericalFailure {
            context: "solve_with_start",
            detail: "multicast start leaves no budget headroom".into(),
        });
    }
    let mut x0 = nalgebra::DVector::<f64>::zeros(nv);
    for j in 0..m {
        x0[j] = p0_start[j];
    }
    for (k, &n) in active.iter().enumerate() {
        x0[m + k] = rem / (2.0 * active.len() as f64 * inst.a_conf[n]);
    }

    let sol = barrier::maximize(&prob, &x0, &cfg.barrier_params())?;
    let p0: Vec<f64> = (0..m).map(|j| sol.x[j].max(0.0)).collect();
    let mut pc = vec![0.0; inst.c2_conf.len()];
    for (k, &n) in active.iter().enumerate() {
        pc[n] = sol.x[m + k].max(0.0);
    }
    Ok(SubproblemSolution {
        surrogate_value: surrogate_objective(inst, &pc)?,
        true_value: inst.true_objective(&pc)?,
        p0,
        pc,
        kkt_residual: sol.kkt_residual,
        newton_steps: sol.newton_steps,
    })
}

/// Solves the surrogate problem at the instance's own reference point.
///
/// Detects infeasibility of the quality floor with a max-min multicast probe
/// before touching the barrier.
pub fn solve_subproblem(inst: &SubproblemInstance, cfg: &DcConfig) -> Result<SubproblemOutcome> {
    cfg.validate()?;
    match compute_start(inst, cfg)? {
        None => Ok(SubproblemOutcome::Infeasible),
        Some(p0_start) => {
            if inst.p_budget <= 0.0 {
                return Ok(SubproblemOutcome::Solved(trivial_solution(inst)?));
            }
            Ok(SubproblemOutcome::Solved(solve_with_start(inst, cfg, &p0_start)?))
        }
    }
}

fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Overrelaxation factors tried when moving the reference past the inner
/// solution.
const ACCEL_FACTORS: [f64; 3] = [64.0, 16.0, 4.0];

/// Extrapolates the next reference beyond the inner solution along the step
/// direction, keeping whichever candidate scores the best true objective.
///
/// Plain re-linearization crawls additively into budget-saturated optima:
/// for a single confidential subchannel the re-linearized optimum advances by
/// exactly `1/d^2 - 1/c^2` power units per iteration, which at large budgets
/// needs hundreds of iterations to cross. Overrelaxing the reference is safe
/// because the next inner solve still starts from a tangent minorant: any
/// reference with a higher true objective can only raise the next iterate.
fn accelerate_reference(
    inst: &SubproblemInstance,
    prev_ref: &[f64],
    sol: &SubproblemSolution,
    r_solve: f64,
    margin: f64,
) -> (Vec<f64>, f64) {
    let mut best_ref = sol.pc.clone();
    let mut best_r = r_solve;
    let spent_mult: f64 = sol
        .p0
        .iter()
        .zip(&inst.a_mult)
        .map(|(&p, &a)| p * a)
        .sum();
    let allowed = inst.p_budget - spent_mult;
    if allowed <= 0.0 {
        return (best_ref, best_r);
    }
    for beta in ACCEL_FACTORS {
        let mut probe: Vec<f64> = prev_ref
            .iter()
            .zip(&sol.pc)
            .map(|(&r, &p)| (r + beta * (p - r)).max(0.0))
            .collect();
        let spent: f64 = probe.iter().zip(&inst.a_conf).map(|(&p, &a)| p * a).sum();
        if spent > allowed {
            let scale = allowed / spent;
            for p in &mut probe {
                *p *= scale;
            }
        }
        if let Ok(r_probe) = inst.true_objective(&probe) {
            // The margin keeps late iterations on the plain re-linearized
            // path, so the returned point always carries its own certificate.
            if r_probe > best_r + margin {
                best_r = r_probe;
                best_ref = probe;
            }
        }
    }
    (best_ref, best_r)
}

/// Full surrogate iteration for one scheme at one quality floor.
///
/// Starts from a zero reference, re-linearizes at each accepted point, and
/// stops when the true objective stalls within `cfg.epsilon` or the
/// iteration cap is reached. The feasibility probe runs once up front;
/// `Infeasible` means the floor is unreachable for this scheme under the
/// budget.
pub fn dc_solve(
    f: &GsvdFactors,
    alloc: &MessageAllocation,
    r_ms: f64,
    p_budget: f64,
    cfg: &DcConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let n_conf = alloc.gammac.len();
    let inst = SubproblemInstance::from_allocation(f, alloc, r_ms, p_budget, vec![0.0; n_conf])?;
    let p0_start = match compute_start(&inst, cfg)? {
        None => return Ok(SolveOutcome::Infeasible),
        Some(s) => s,
    };

    let run = |init_ref: Vec<f64>| -> Result<(SubproblemSolution, Vec<DcIterate>, bool)> {
        let mut current = inst.with_ref(init_ref);
        let mut r_prev = 0.0;
        let mut trace: Vec<DcIterate> = Vec::new();
        let mut converged = false;
        let mut last: Option<SubproblemSolution> = None;
        for _ in 0..cfg.max_dc_iters {
            let sol = if inst.p_budget <= 0.0 {
                trivial_solution(&current)?
            } else {
                solve_with_start(&current, cfg, &p0_start)?
            };
            let r_i = rates::secrecy_rate(f, alloc, &sol.pc)?;
            trace.push(DcIterate {
                true_objective: r_i,
                surrogate_objective: sol.surrogate_value,
                pc_step_norm: l2_dist(&sol.pc, &current.pc_ref),
                newton_steps: sol.newton_steps,
            });
            let stalled = (r_i - r_prev).abs() < cfg.epsilon;
            r_prev = r_i;
            if stalled {
                current.pc_ref = sol.pc.clone();
                last = Some(sol);
                converged = true;
                break;
            }
            let (next_ref, _) = accelerate_reference(&inst, &current.pc_ref, &sol, r_i, cfg.epsilon);
            current.pc_ref = next_ref;
            last = Some(sol);
        }
        Ok((last.expect("at least one iteration"), trace, converged))
    };

    let (final_sol, trace, converged) = run(vec![0.0; n_conf])?;
    let r_final = trace.last().expect("nonempty trace").true_objective;

    // One extra solve linearized at the final point certifies stationarity.
    let stationarity_gap = if inst.p_budget <= 0.0 {
        0.0
    } else {
        let probe = solve_with_start(&inst.with_ref(final_sol.pc.clone()), cfg, &p0_start)?;
        rates::secrecy_rate(f, alloc, &probe.pc)? - r_final
    };

    let multi_start_gap = if cfg.multi_start_check && n_conf > 0 && inst.p_budget > 0.0 {
        let uniform: Vec<f64> = inst
            .a_conf
            .iter()
            .map(|&w| inst.p_budget / (2.0 * n_conf as f64 * w))
            .collect();
        let (_, alt_trace, _) = run(uniform)?;
        let alt_final = alt_trace.last().expect("nonempty trace").true_objective;
        Some((alt_final - r_final).abs())
    } else {
        None
    };

    let newton_steps_total = trace.iter().map(|it| it.newton_steps).sum();
    let (r1, r2) = rates::multicast_rates(f, alloc, &final_sol.p0)?;
    Ok(SolveOutcome::Solved(PowerSolution {
        secrecy_rate: rates::secrecy_rate(f, alloc, &final_sol.pc)?,
        multicast_rate_1: r1,
        multicast_rate_2: r2,
        total_power: rates::total_power(f, alloc, &final_sol.p0, &final_sol.pc)?,
        p0: final_sol.p0,
        pc: final_sol.pc,
        diagnostics: SolveDiagnostics {
            iterates: trace,
            converged,
            kkt_residual: final_sol.kkt_residual,
            stationarity_gap,
            multi_start_gap,
            newton_steps_total,
        },
    }))
}

/// Brute-force reference optimum over a uniform power grid.
///
/// Each axis spans `[0, budget / cost]` with `grid_points + 1` values, so a
/// grid step always costs `budget / grid_points` of the shared budget; the
/// budget filter counts whole grid steps, which keeps feasibility exact in
/// integer arithmetic. Within that grid the result is the exact maximum of
/// the true objective over floor-satisfying points (a dynamic program over
/// budget units handles the confidential axes). Returns None when no grid
/// point meets the floor. Independent of the barrier solver by design.
pub fn grid_oracle(inst: &SubproblemInstance, grid_points: usize) -> Result<Option<f64>> {
    let m = inst.c2_mult.len();
    let n = inst.c2_conf.len();
    if m + n > 4 {
        return Err(Error::DimensionTooLarge {
            context: "grid_oracle",
            size: m + n,
            limit: 4,
        });
    }
    if grid_points == 0 {
        return Err(Error::InvalidInput("grid_points must be positive".into()));
    }
    let g = grid_points;
    if inst.p_budget <= 0.0 {
        return Ok(if inst.r_ms <= 0.0 { Some(0.0) } else { None });
    }

    // Per-axis rate tables at each grid value.
    let axis_values = |w: f64| -> Vec<f64> {
        let step = inst.p_budget / (w * g as f64);
        (0..=g).map(|k| k as f64 * step).collect()
    };
    let log_table = |vals: &[f64], gain: f64| -> Vec<f64> {
        vals.iter().map(|&v| (1.0 + gain * v).log2()).collect()
    };

    // Dynamic program over the confidential axes: best objective using at
    // most `u` budget units.
    let mut dp = vec![0.0f64; g + 1];
    for j in 0..n {
        let vals = axis_values(inst.a_conf[j]);
        let diff: Vec<f64> = vals
            .iter()
            .map(|&v| (1.0 + inst.c2_conf[j] * v).log2() - (1.0 + inst.d2_conf[j] * v).log2())
            .collect();
        let mut next = vec![f64::NEG_INFINITY; g + 1];
        for u in 0..=g {
            for k in 0..=u {
                let cand = diff[k] + dp[u - k];
                if cand > next[u] {
                    next[u] = cand;
                }
            }
        }
        dp = next;
    }

    let mut best: Option<f64> = None;
    let mut consider = |units_left: usize, val: f64| {
        let total = dp[units_left] + val;
        if best.map_or(true, |b| total > b) {
            best = Some(total);
        }
    };

    if m == 0 {
        if inst.r_ms <= 0.0 {
            consider(g, 0.0);
        }
        return Ok(best);
    }

    let tables: Vec<(Vec<f64>, Vec<f64>)> = (0..m)
        .map(|j| {
            let vals = axis_values(inst.a_mult[j]);
            (
                log_table(&vals, inst.c2_mult[j]),
                log_table(&vals, inst.d2_mult[j]),
            )
        })
        .collect();
    let mut ks = vec![0usize; m];
    loop {
        let units: usize = ks.iter().sum();
        if units <= g {
            let r1: f64 = (0..m).map(|j| tables[j].0[ks[j]]).sum();
            let r2: f64 = (0..m).map(|j| tables[j].1[ks[j]]).sum();
            if r1 >= inst.r_ms && r2 >= inst.r_ms {
                consider(g - units, 0.0);
            }
        }
        let mut i = 0;
        loop {
            ks[i] += 1;
            if ks[i] <= g {
                break;
            }
            ks[i] = 0;
            i += 1;
            if i == m {
                return Ok(best);
            }
        }
    }
}
