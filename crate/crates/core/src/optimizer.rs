//! Constrained transmit-power allocation.
//!
//! Decision variable: one transmit power per node. Every link is driven by
//! its source node's power, so link capacity is
//! `C(P) = B · E[log2(1 + P·|h|²/(N+I))]` with the expectation taken over the
//! problem's fading treatment. The problem is
//!
//! ```text
//! minimize   α · Σ P_src · L_src / (γ·C)  +  β · Σ L_src / (γ·C)
//! subject to min_link γ·C ≥ R_min
//!            Σ L_src / (γ·C) ≤ Latency_max
//!            p_min ≤ P_i ≤ p_max
//! ```
//!
//! Energy is increasing in P and latency is decreasing, so for α, β > 0 the
//! optimum is generally interior.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{log2_1p, sample_fading, FadingKind};
use crate::network::Topology;

/// Multiplier on the summed normalized constraint violation in SA.
pub const PENALTY_WEIGHT: f64 = 1e6;

/// Relative tolerance when deciding whether a constraint holds.
pub const FEASIBILITY_RTOL: f64 = 1e-12;

/// Largest node count the exhaustive grid accepts.
pub const GRID_MAX_NODES: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("power bounds must satisfy 0 <= p_min < p_max (got [{0}, {1}])")]
    Bounds(f64, f64),
    #[error("r_min_bps must be >= 0 (got {0})")]
    RMin(f64),
    #[error("latency_max_s must be > 0 (got {0})")]
    LatencyMax(f64),
    #[error("weights must be >= 0 and not both zero (got alpha={0}, beta={1})")]
    Weights(f64, f64),
    #[error("ergodic fading treatment needs n_samples >= 1")]
    NoSamples,
    #[error("allocation has {got} powers for {expected} nodes")]
    AllocationLength { expected: usize, got: usize },
    #[error("power {value} for node {node} is outside [{lo}, {hi}]")]
    OutOfBounds { node: usize, value: f64, lo: f64, hi: f64 },
    #[error("link {0} has zero capacity at this allocation")]
    InfeasibleLink(String),
    #[error("no feasible point found")]
    NoFeasiblePoint,
    #[error("grid search needs points_per_node >= 2 (got {0})")]
    GridPoints(usize),
    #[error("grid search supports at most {GRID_MAX_NODES} nodes (got {0})")]
    GridTooLarge(usize),
    #[error("annealing schedule invalid: {0}")]
    Schedule(String),
    #[error("expected {expected} multipliers (got {got})")]
    MultiplierCount { expected: usize, got: usize },
    #[error("multipliers must be >= 0 and finite")]
    NegativeMultiplier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBounds {
    pub p_min_w: f64,
    pub p_max_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FadingTreatment {
    /// |h|² = 1 on every link.
    Deterministic,
    /// Capacity is the mean over `n_samples` fixed draws per link.
    ErgodicMean { n_samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerProblem {
    topology: Topology,
    bounds: PowerBounds,
    r_min_bps: f64,
    latency_max_s: f64,
    weights: Weights,
    fading: FadingTreatment,
    // per link: source node index and fixed |h|² draws (common random numbers)
    link_src: Vec<usize>,
    draws: Vec<Vec<f64>>,
}

impl PowerProblem {
    /// `latency_max_s` may be `f64::INFINITY` for an inactive latency bound.
    pub fn new(
        topology: Topology,
        bounds: PowerBounds,
        r_min_bps: f64,
        latency_max_s: f64,
        weights: Weights,
        fading: FadingTreatment,
    ) -> Result<Self, OptError> {
        let PowerBounds { p_min_w, p_max_w } = bounds;
        if !(p_min_w.is_finite() && p_max_w.is_finite() && 0.0 <= p_min_w && p_min_w < p_max_w) {
            return Err(OptError::Bounds(p_min_w, p_max_w));
        }
        if !(r_min_bps.is_finite() && r_min_bps >= 0.0) {
            return Err(OptError::RMin(r_min_bps));
        }
        if !(latency_max_s > 0.0) {
            return Err(OptError::LatencyMax(latency_max_s));
        }
        let Weights { alpha, beta } = weights;
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !(ok(alpha) && ok(beta) && (alpha > 0.0 || beta > 0.0)) {
            return Err(OptError::Weights(alpha, beta));
        }

        let link_src = topology
            .links()
            .iter()
            .map(|l| topology.node_index(&l.src).expect("validated topology"))
            .collect();
        let draws = match fading {
            FadingTreatment::Deterministic => vec![vec![1.0]; topology.links().len()],
            FadingTreatment::ErgodicMean { n_samples, seed } => {
                if n_samples == 0 {
                    return Err(OptError::NoSamples);
                }
                topology
                    .links()
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        if l.fading.kind() == FadingKind::Awgn {
                            return vec![1.0];
                        }
                        let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, i as u64));
                        (0..n_samples)
                            .map(|_| sample_fading(&l.fading, &mut rng).h_squared())
                            .collect()
                    })
                    .collect()
            }
        };

        Ok(Self {
            topology,
            bounds,
            r_min_bps,
            latency_max_s,
            weights,
            fading,
            link_src,
            draws,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn bounds(&self) -> PowerBounds {
        self.bounds
    }

    pub fn r_min_bps(&self) -> f64 {
        self.r_min_bps
    }

    pub fn latency_max_s(&self) -> f64 {
        self.latency_max_s
    }

    pub fn weights(&self) -> Weights {
        self.weights
    }

    pub fn fading(&self) -> FadingTreatment {
        self.fading
    }

    pub fn n_nodes(&self) -> usize {
        self.topology.nodes().len()
    }

    /// Nodes that source at least one link; the others do not affect the
    /// objective.
    pub fn active_nodes(&self) -> Vec<usize> {
        let mut v = self.link_src.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Number of constraints seen by [`kkt_residual`]: capacity, latency,
    /// then lower and upper bounds per node.
    pub fn n_constraints(&self) -> usize {
        2 + 2 * self.n_nodes()
    }

    /// Capacity (without TRS) of link `k` at source power `p`.
    pub fn link_capacity(&self, k: usize, p: f64) -> f64 {
        let b = &self.topology.links()[k].budget;
        let scale = p / (b.noise_power_w() + b.interference_power_w());
        let draws = &self.draws[k];
        let mean: f64 = draws.iter().map(|h2| log2_1p(scale * h2)).sum::<f64>() / draws.len() as f64;
        b.bandwidth_hz() * mean
    }

    /// TRS energy, latency and weakest TRS capacity at `powers`.
    pub fn evaluate(&self, powers: &[f64]) -> Result<Evaluation, OptError> {
        let mut energy = 0.0;
        let mut latency = 0.0;
        let mut min_cap = f64::INFINITY;
        for (k, link) in self.topology.links().iter().enumerate() {
            let src = self.link_src[k];
            let p = powers[src];
            let cap_trs = link.gain.gamma() * self.link_capacity(k, p);
            if !(cap_trs > 0.0) {
                return Err(OptError::InfeasibleLink(link.id()));
            }
            let t = self.topology.nodes()[src].packet_length_bits() / cap_trs;
            energy += p * t;
            latency += t;
            min_cap = min_cap.min(cap_trs);
        }
        Ok(Evaluation {
            energy_trs_j: energy,
            latency_trs_s: latency,
            min_capacity_trs_bps: min_cap,
        })
    }

    fn weighted(&self, e: &Evaluation) -> f64 {
        self.weights.alpha * e.energy_trs_j + self.weights.beta * e.latency_trs_s
    }

    fn feasibility_of(&self, e: &Evaluation) -> Feasibility {
        let capacity_slack = e.min_capacity_trs_bps - self.r_min_bps;
        let latency_slack = self.latency_max_s - e.latency_trs_s;
        let cap_ok = capacity_slack >= -FEASIBILITY_RTOL * self.r_min_bps.max(1.0);
        let lat_ok = self.latency_max_s.is_infinite()
            || latency_slack >= -FEASIBILITY_RTOL * self.latency_max_s;
        Feasibility {
            feasible: cap_ok && lat_ok,
            capacity_slack_bps: capacity_slack,
            latency_slack_s: latency_slack,
        }
    }

    /// Summed violations, each normalized by its bound.
    fn normalized_violation(&self, e: &Evaluation) -> f64 {
        let mut v = 0.0;
        if self.r_min_bps > 0.0 {
            v += (self.r_min_bps - e.min_capacity_trs_bps).max(0.0) / self.r_min_bps;
        }
        if self.latency_max_s.is_finite() {
            v += (e.latency_trs_s - self.latency_max_s).max(0.0) / self.latency_max_s;
        }
        v
    }

    fn check_len(&self, powers: &[f64]) -> Result<(), OptError> {
        if powers.len() != self.n_nodes() {
            return Err(OptError::AllocationLength {
                expected: self.n_nodes(),
                got: powers.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub energy_trs_j: f64,
    pub latency_trs_s: f64,
    pub min_capacity_trs_bps: f64,
}

/// One transmit power per node, within the problem's bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    powers_w: Vec<f64>,
}

impl Allocation {
    pub fn new(problem: &PowerProblem, powers_w: Vec<f64>) -> Result<Self, OptError> {
        problem.check_len(&powers_w)?;
        let PowerBounds { p_min_w: lo, p_max_w: hi } = problem.bounds;
        for (node, &value) in powers_w.iter().enumerate() {
            if !(lo..=hi).contains(&value) {
                return Err(OptError::OutOfBounds { node, value, lo, hi });
            }
        }
        Ok(Self { powers_w })
    }

    pub fn uniform(problem: &PowerProblem, p: f64) -> Result<Self, OptError> {
        Self::new(problem, vec![p; problem.n_nodes()])
    }

    pub fn powers_w(&self) -> &[f64] {
        &self.powers_w
    }

    pub fn total_power_w(&self) -> f64 {
        self.powers_w.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// min-link TRS capacity minus R_min; negative means violated.
    pub capacity_slack_bps: f64,
    /// Latency_max minus total TRS latency; negative means violated.
    pub latency_slack_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Solver {
    SimulatedAnnealing,
    GridOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub allocation: Allocation,
    pub objective: f64,
    pub energy_total_j: f64,
    pub latency_total_s: f64,
    pub feasible: bool,
    pub evaluations: u64,
    pub solver: Solver,
}

/// Σ P_i · T_i^TRS.
pub fn energy_objective(alloc: &Allocation, problem: &PowerProblem) -> Result<f64, OptError> {
    problem.check_len(&alloc.powers_w)?;
    Ok(problem.evaluate(&alloc.powers_w)?.energy_trs_j)
}

/// α · E_total^TRS + β · Latency_total^TRS.
pub fn weighted_objective(alloc: &Allocation, problem: &PowerProblem) -> Result<f64, OptError> {
    problem.check_len(&alloc.powers_w)?;
    Ok(problem.weighted(&problem.evaluate(&alloc.powers_w)?))
}

/// Checks the throughput and latency constraints. A zero-capacity link makes
/// the allocation infeasible with infinite negative slacks where undefined.
pub fn check_feasibility(alloc: &Allocation, problem: &PowerProblem) -> Feasibility {
    match problem.evaluate(&alloc.powers_w) {
        Ok(e) => problem.feasibility_of(&e),
        Err(_) => Feasibility {
            feasible: false,
            capacity_slack_bps: -problem.r_min_bps,
            latency_slack_s: f64::NEG_INFINITY,
        },
    }
}

/// Exhaustive search over the uniform grid on `[p_min, p_max]^N`.
///
/// Returns the feasible point with the smallest weighted objective; ties go
/// to the smaller total power, then to the lexicographically first point.
pub fn grid_search_oracle(problem: &PowerProblem, points_per_node: usize) -> Result<OptResult, OptError> {
    if points_per_node < 2 {
        return Err(OptError::GridPoints(points_per_node));
    }
    let n = problem.n_nodes();
    if n > GRID_MAX_NODES {
        return Err(OptError::GridTooLarge(n));
    }
    let PowerBounds { p_min_w: lo, p_max_w: hi } = problem.bounds;
    let step = (hi - lo) / (points_per_node - 1) as f64;
    let level = |k: usize| if k + 1 == points_per_node { hi } else { lo + k as f64 * step };

    let mut idx = vec![0usize; n];
    let mut powers = vec![lo; n];
    let mut best: Option<(f64, f64, Vec<f64>, Evaluation)> = None;
    let mut evaluations = 0u64;
    loop {
        for (p, &k) in powers.iter_mut().zip(&idx) {
            *p = level(k);
        }
        evaluations += 1;
        if let Ok(e) = problem.evaluate(&powers) {
            if problem.feasibility_of(&e).feasible {
                let obj = problem.weighted(&e);
                let total: f64 = powers.iter().sum();
                let better = match &best {
                    None => true,
                    Some((bo, bt, _, _)) => obj < *bo || (obj == *bo && total < *bt),
                };
                if better {
                    best = Some((obj, total, powers.clone(), e));
                }
            }
        }
        // odometer, last node fastest so visiting order is lexicographic
        let mut d = n;
        loop {
            if d == 0 {
                let (objective, _, powers_w, e) = best.ok_or(OptError::NoFeasiblePoint)?;
                return Ok(OptResult {
                    allocation: Allocation { powers_w },
                    objective,
                    energy_total_j: e.energy_trs_j,
                    latency_total_s: e.latency_trs_s,
                    feasible: true,
                    evaluations,
                    solver: Solver::GridOracle,
                });
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < points_per_node {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Geometric cooling schedule. `t_initial = None` starts at the magnitude of
/// the first objective value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub t_initial: Option<f64>,
    pub cooling: f64,
    pub iterations: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t_initial: None,
            cooling: 0.95,
            iterations: 10_000,
        }
    }
}

/// Simulated annealing over the power box.
///
/// Each step perturbs one uniformly chosen active node by a Gaussian with
/// σ = 5% of the box width, reflected back into the box. Infeasible points
/// pay [`PENALTY_WEIGHT`] times their normalized violation. The returned
/// allocation is the best feasible point visited.
pub fn optimize_sa<R: Rng + ?Sized>(
    problem: &PowerProblem,
    schedule: Schedule,
    rng: &mut R,
) -> Result<OptResult, OptError> {
    if schedule.iterations == 0 {
        return Err(OptError::Schedule("iterations must be >= 1".into()));
    }
    if !(schedule.cooling > 0.0 && schedule.cooling < 1.0) {
        return Err(OptError::Schedule(format!("cooling must be in (0, 1) (got {})", schedule.cooling)));
    }
    if let Some(t) = schedule.t_initial {
        if !(t.is_finite() && t > 0.0) {
            return Err(OptError::Schedule(format!("t_initial must be > 0 (got {t})")));
        }
    }

    let PowerBounds { p_min_w: lo, p_max_w: hi } = problem.bounds;
    let width = hi - lo;
    let sigma = 0.05 * width;
    let active = problem.active_nodes();

    // (penalized objective, evaluation if defined)
    let score = |x: &[f64]| -> (f64, Option<Evaluation>) {
        match problem.evaluate(x) {
            Ok(e) => {
                let f = problem.weighted(&e) + PENALTY_WEIGHT * problem.normalized_violation(&e);
                (f, Some(e))
            }
            Err(_) => (f64::INFINITY, None),
        }
    };

    let mut current: Vec<f64> = (0..problem.n_nodes()).map(|_| rng.gen_range(lo..=hi)).collect();
    let (mut f_current, e0) = score(&current);
    let mut evaluations = 1u64;
    let mut best: Option<(f64, Vec<f64>, Evaluation)> = None;
    let consider_best = |x: &[f64], e: Option<Evaluation>, best: &mut Option<(f64, Vec<f64>, Evaluation)>| {
        if let Some(e) = e {
            if problem.feasibility_of(&e).feasible {
                let obj = problem.weighted(&e);
                if best.as_ref().is_none_or(|(b, _, _)| obj < *b) {
                    *best = Some((obj, x.to_vec(), e));
                }
            }
        }
    };
    consider_best(&current, e0, &mut best);

    let mut temperature = schedule.t_initial.unwrap_or_else(|| {
        let m = f_current.abs();
        if m.is_finite() && m > 0.0 {
            m
        } else {
            1.0
        }
    });

    let mut candidate = current.clone();
    for _ in 0..schedule.iterations {
        let j = active[rng.gen_range(0..active.len())];
        let z: f64 = StandardNormal.sample(rng);
        candidate.copy_from_slice(&current);
        candidate[j] = reflect(current[j] + sigma * z, lo, hi);

        let (f_new, e_new) = score(&candidate);
        evaluations += 1;
        let delta = f_new - f_current;
        let accept = if delta <= 0.0 {
            true
        } else if f_new.is_finite() {
            rng.gen::<f64>() < (-delta / temperature).exp()
        } else {
            false
        };
        if accept {
            std::mem::swap(&mut current, &mut candidate);
            f_current = f_new;
            consider_best(&current, e_new, &mut best);
        }
        temperature *= schedule.cooling;
    }

    let (objective, powers_w, e) = best.ok_or(OptError::NoFeasiblePoint)?;
    Ok(OptResult {
        allocation: Allocation { powers_w },
        objective,
        energy_total_j: e.energy_trs_j,
        latency_total_s: e.latency_trs_s,
        feasible: true,
        evaluations,
        solver: Solver::SimulatedAnnealing,
    })
}

/// Mirror `x` back into `[lo, hi]`.
fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if !x.is_finite() {
        return lo;
    }
    // fold into one period of length 2w first
    let period = 2.0 * w;
    x = lo + (x - lo).rem_euclid(period);
    if x > hi {
        x = hi - (x - hi);
    }
    x.clamp(lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktDiagnostics {
    /// ‖∇_P L‖₂ by central finite differences.
    pub stationarity_residual: f64,
    pub primal_violation: f64,
    pub complementary_slackness: f64,
    pub multipliers: Vec<f64>,
}

/// Central-difference step relative to the coordinate value.
pub const KKT_FD_STEP: f64 = 1e-6;

/// KKT residuals of `alloc` for the given multipliers.
///
/// Constraints are written `g_k(P) ≤ 0` in the order
/// `[R_min - min γC, Latency - Latency_max, p_min - P_i (per node), P_i - p_max (per node)]`,
/// and the Lagrangian is `α·E + β·Latency + Σ λ_k g_k`.
pub fn kkt_residual(
    alloc: &Allocation,
    problem: &PowerProblem,
    multipliers: &[f64],
) -> Result<KktDiagnostics, OptError> {
    let n = problem.n_nodes();
    if multipliers.len() != problem.n_constraints() {
        return Err(OptError::MultiplierCount {
            expected: problem.n_constraints(),
            got: multipliers.len(),
        });
    }
    if multipliers.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(OptError::NegativeMultiplier);
    }
    problem.check_len(&alloc.powers_w)?;

    let constraints = |x: &[f64]| -> Result<Vec<f64>, OptError> {
        let e = problem.evaluate(x)?;
        let mut g = Vec::with_capacity(2 + 2 * n);
        g.push(problem.r_min_bps - e.min_capacity_trs_bps);
        g.push(e.latency_trs_s - problem.latency_max_s);
        g.extend(x.iter().map(|p| problem.bounds.p_min_w - p));
        g.extend(x.iter().map(|p| p - problem.bounds.p_max_w));
        Ok(g)
    };
    let lagrangian = |x: &[f64]| -> Result<f64, OptError> {
        let e = problem.evaluate(x)?;
        let g = constraints(x)?;
        let penalty: f64 = multipliers
            .iter()
            .zip(&g)
            .filter(|(l, _)| **l != 0.0)
            .map(|(l, gk)| l * gk)
            .sum();
        Ok(problem.weighted(&e) + penalty)
    };

    let x0 = alloc.powers_w.clone();
    let mut grad_sq = 0.0;
    let mut x = x0.clone();
    for i in 0..n {
        let h = KKT_FD_STEP * x0[i].abs().max(f64::MIN_POSITIVE.sqrt());
        x[i] = x0[i] + h;
        let up = lagrangian(&x)?;
        x[i] = x0[i] - h;
        let down = lagrangian(&x)?;
        x[i] = x0[i];
        let d = (up - down) / (2.0 * h);
        grad_sq += d * d;
    }

    let g = constraints(&x0)?;
    let primal_violation = g.iter().fold(0.0_f64, |acc, &gk| acc.max(gk));
    let complementary_slackness = multipliers
        .iter()
        .zip(&g)
        .filter(|(l, _)| **l != 0.0)
        .map(|(l, gk)| (l * gk).abs())
        .fold(0.0_f64, f64::max);

    Ok(KktDiagnostics {
        stationarity_residual: grad_sq.sqrt(),
        primal_violation,
        complementary_slackness,
        multipliers: multipliers.to_vec(),
    })
}
