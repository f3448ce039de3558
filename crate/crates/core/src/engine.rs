//! Repeated projective measurements: exact trajectory statistics, their time
//! reversal, detailed balance through eigenspace dimensions, two-time (ABL)
//! conditioning, collapse sampling and Boltzmann entropy traces.
//!
//! A schedule measures observable `k` at time `t_k`. Between measurements
//! the state evolves with `U_k = exp(−i(t_k − t_{k−1})H)`. For an outcome
//! sequence `ω = (α_0, …, α_n)` the probability is
//!
//! ```text
//! Prob[ω] = Tr[P_{α_n} K ρ_0 K†],   K = U_n P_{α_{n−1}} ⋯ U_1 P_{α_0}
//! ```
//!
//! which reduces to the trace formula with `ρ_0 = I/d`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Precondition, Result};
use crate::hilbert::{
    evolve, hamiltonian_reversal_deviation, max_abs, AntiunitaryInvolution, CMatrix, DensityMatrix,
    HermitianOperator, StateVector, UnitaryOperator, INVARIANT_TOL,
};
use crate::observables::{
    magnetization, reverse_conditions, site_operator, ConditionReversalMap,
    ObservableDecomposition, Pauli, DEFAULT_CLUSTER_TOL,
};
use crate::random::random_real_symmetric;

/// Default bound on the number of enumerated trajectories.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Probabilities this far outside `[0, 1]` are clamped; beyond it they are errors.
pub const CLAMP_TOL: f64 = 1e-12;

/// Probabilities at or below this are treated as zero in ratios.
pub const ZERO_PROBABILITY: f64 = 1e-12;

/// Tolerance used when matching reversed projectors.
pub const COVARIANCE_TOL: f64 = 1e-10;

/// An ordered sequence of condition labels, one per measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory(Vec<String>);

impl Trajectory {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        Self(labels.into_iter().map(Into::into).collect())
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<&str> {
        self.0.first().map(String::as_str)
    }

    pub fn last(&self) -> Option<&str> {
        self.0.last().map(String::as_str)
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(">"))
    }
}

impl FromStr for Trajectory {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(Self::new(s.split('>').map(str::trim)))
    }
}

/// Observables measured at strictly increasing times under a fixed Hamiltonian.
#[derive(Debug, Clone)]
pub struct MeasurementSchedule {
    times: Vec<f64>,
    observables: Vec<ObservableDecomposition>,
    hamiltonian: HermitianOperator,
    initial: DensityMatrix,
    propagators: Vec<UnitaryOperator>,
    enumeration_cap: u64,
}

impl MeasurementSchedule {
    pub fn new(
        hamiltonian: HermitianOperator,
        initial: DensityMatrix,
        times: Vec<f64>,
        observables: Vec<ObservableDecomposition>,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidSchedule(
                "at least one measurement time is required".into(),
            ));
        }
        if times.len() != observables.len() {
            return Err(Error::InvalidSchedule(format!(
                "{} times but {} observables",
                times.len(),
                observables.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidSchedule("times must be finite".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSchedule(format!(
                "times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let d = hamiltonian.dim();
        if initial.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: initial.dim(),
            });
        }
        if let Some(obs) = observables.iter().find(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: obs.dim(),
            });
        }
        let propagators = times
            .windows(2)
            .map(|w| evolve(&hamiltonian, w[1] - w[0]))
            .collect();
        Ok(Self {
            times,
            observables,
            hamiltonian,
            initial,
            propagators,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        })
    }

    /// Largest trajectory count that exhaustive operations will enumerate.
    pub fn with_enumeration_cap(mut self, cap: u64) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn enumeration_cap(&self) -> u64 {
        self.enumeration_cap
    }

    /// Same observable at every time.
    pub fn repeated(
        hamiltonian: HermitianOperator,
        initial: DensityMatrix,
        times: Vec<f64>,
        observable: ObservableDecomposition,
    ) -> Result<Self> {
        let observables = vec![observable; times.len()];
        Self::new(hamiltonian, initial, times, observables)
    }

    /// `steps` measurements at `0, dt, 2dt, …`, starting from `I/d`.
    pub fn equally_spaced(
        hamiltonian: HermitianOperator,
        observable: ObservableDecomposition,
        steps: usize,
        dt: f64,
    ) -> Result<Self> {
        let initial = DensityMatrix::maximally_mixed(hamiltonian.dim());
        let times = (0..steps).map(|k| k as f64 * dt).collect();
        Self::repeated(hamiltonian, initial, times, observable)
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn observables(&self) -> &[ObservableDecomposition] {
        &self.observables
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn initial(&self) -> &DensityMatrix {
        &self.initial
    }

    /// Number of distinct outcome sequences.
    pub fn trajectory_count(&self) -> u128 {
        self.observables.iter().map(|o| o.len() as u128).product()
    }

    fn resolve(&self, trajectory: &Trajectory) -> Result<Vec<usize>> {
        if trajectory.len() != self.steps() {
            return Err(Error::TrajectoryLength {
                expected: self.steps(),
                found: trajectory.len(),
            });
        }
        trajectory
            .labels()
            .iter()
            .zip(&self.observables)
            .enumerate()
            .map(|(step, (label, obs))| {
                obs.index_of(label).ok_or_else(|| Error::UnknownLabel {
                    label: label.clone(),
                    step,
                })
            })
            .collect()
    }

    fn trajectory_from_indices(&self, path: &[usize]) -> Trajectory {
        Trajectory(
            path.iter()
                .zip(&self.observables)
                .map(|(&k, obs)| obs.conditions()[k].label.clone())
                .collect(),
        )
    }

    fn projector(&self, step: usize, index: usize) -> &CMatrix {
        &self.observables[step].conditions()[index].projector
    }

    fn dim_of(&self, step: usize, index: usize) -> usize {
        self.observables[step].conditions()[index].dim
    }

    /// `U_{step+1} σ U_{step+1}†`: evolve from measurement `step` to `step + 1`.
    fn propagate(&self, step: usize, sigma: &CMatrix) -> CMatrix {
        let u = self.propagators[step].matrix();
        u * sigma * u.adjoint()
    }

    /// Unnormalized chain weight of `path` over steps `from..`, starting from
    /// the operator `start` as it is just before measurement `from`.
    fn chain_weight(&self, start: &CMatrix, from: usize, path: &[usize]) -> f64 {
        let mut sigma = start.clone();
        for (offset, &alpha) in path.iter().enumerate() {
            let step = from + offset;
            let p = self.projector(step, alpha);
            sigma = p * &sigma * p;
            if offset + 1 < path.len() {
                sigma = self.propagate(step, &sigma);
            }
        }
        sigma.trace().re
    }
}

fn clamp_probability(value: f64) -> Result<f64> {
    if !(-CLAMP_TOL..=1.0 + CLAMP_TOL).contains(&value) || value.is_nan() {
        return Err(Error::ProbabilityOutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Exact probability of observing `trajectory`.
pub fn trajectory_probability(s: &MeasurementSchedule, trajectory: &Trajectory) -> Result<f64> {
    let path = s.resolve(trajectory)?;
    clamp_probability(s.chain_weight(s.initial.matrix(), 0, &path))
}

/// Every trajectory with its exact probability, in lexicographic index order.
#[derive(Debug, Clone)]
pub struct TrajectoryDistribution {
    entries: Vec<(Trajectory, f64)>,
    index: HashMap<Trajectory, usize>,
}

impl TrajectoryDistribution {
    fn from_entries(entries: Vec<(Trajectory, f64)>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(k, (t, _))| (t.clone(), k))
            .collect();
        Self { entries, index }
    }

    pub fn entries(&self) -> &[(Trajectory, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probability(&self, trajectory: &Trajectory) -> Option<f64> {
        self.index.get(trajectory).map(|&k| self.entries[k].1)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Single-time marginal at `step`, keyed by label, in first-seen order.
    pub fn marginal(&self, step: usize) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for (t, p) in &self.entries {
            let label = &t.labels()[step];
            match out.iter_mut().find(|(l, _)| l == label) {
                Some((_, acc)) => *acc += p,
                None => out.push((label.clone(), *p)),
            }
        }
        out
    }

    /// Total-variation distance to the empirical law of `samples`.
    pub fn total_variation(&self, samples: &[Trajectory]) -> f64 {
        if samples.is_empty() {
            return 1.0;
        }
        let mut counts: HashMap<&Trajectory, usize> = HashMap::new();
        for t in samples {
            *counts.entry(t).or_default() += 1;
        }
        let n = samples.len() as f64;
        let mut distance: f64 = self
            .entries
            .iter()
            .map(|(t, p)| (p - counts.get(t).copied().unwrap_or(0) as f64 / n).abs())
            .sum();
        // Samples outside the support.
        distance += counts
            .iter()
            .filter(|(t, _)| !self.index.contains_key(**t))
            .map(|(_, &c)| c as f64 / n)
            .sum::<f64>();
        0.5 * distance
    }
}

/// Enumerate all trajectories, up to the schedule's enumeration cap.
pub fn enumerate_distribution(s: &MeasurementSchedule) -> Result<TrajectoryDistribution> {
    enumerate_distribution_with_cap(s, s.enumeration_cap)
}

pub fn enumerate_distribution_with_cap(
    s: &MeasurementSchedule,
    cap: u64,
) -> Result<TrajectoryDistribution> {
    let count = s.trajectory_count();
    if count > cap as u128 {
        return Err(Error::EnumerationCap { count, cap });
    }
    let first = s.observables[0].len();
    let branches: Vec<Vec<(Vec<usize>, f64)>> = (0..first)
        .into_par_iter()
        .map(|alpha| {
            let mut out = Vec::new();
            let mut path = vec![alpha];
            let p = s.projector(0, alpha);
            let sigma = p * s.initial.matrix() * p;
            descend(s, 0, &sigma, &mut path, &mut out);
            out
        })
        .collect();
    let entries = branches
        .into_iter()
        .flatten()
        .map(|(path, w)| Ok((s.trajectory_from_indices(&path), clamp_probability(w)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryDistribution::from_entries(entries))
}

/// Depth-first expansion; `sigma` is the projected state after measurement `step`.
fn descend(
    s: &MeasurementSchedule,
    step: usize,
    sigma: &CMatrix,
    path: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
) {
    if step + 1 == s.steps() {
        out.push((path.clone(), sigma.trace().re));
        return;
    }
    if max_abs(sigma) == 0.0 {
        emit_zeros(s, step + 1, path, out);
        return;
    }
    let evolved = s.propagate(step, sigma);
    for alpha in 0..s.observables[step + 1].len() {
        let p = s.projector(step + 1, alpha);
        let next = p * &evolved * p;
        path.push(alpha);
        descend(s, step + 1, &next, path, out);
        path.pop();
    }
}

fn emit_zeros(
    s: &MeasurementSchedule,
    step: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
) {
    if step == s.steps() {
        out.push((path.clone(), 0.0));
        return;
    }
    for alpha in 0..s.observables[step].len() {
        path.push(alpha);
        emit_zeros(s, step + 1, path, out);
        path.pop();
    }
}

/// `Θω`: reverse the order and replace each label by its counterpart.
/// `maps[k]` is the reversal map of the observable measured at step `k` of `ω`.
pub fn reverse_trajectory(
    trajectory: &Trajectory,
    maps: &[ConditionReversalMap],
) -> Result<Trajectory> {
    if maps.len() != trajectory.len() {
        return Err(Error::TrajectoryLength {
            expected: maps.len(),
            found: trajectory.len(),
        });
    }
    let n = trajectory.len();
    (0..n)
        .map(|j| {
            let step = n - 1 - j;
            let label = &trajectory.labels()[step];
            maps[step]
                .get(label)
                .map(str::to_string)
                .ok_or_else(|| Error::UnknownLabel {
                    label: label.clone(),
                    step,
                })
        })
        .collect::<Result<Vec<_>>>()
        .map(Trajectory)
}

/// Check every hypothesis of the reversal theorem and return the per-step
/// condition maps.
pub fn check_reversal_hypotheses(
    s: &MeasurementSchedule,
    pi: &AntiunitaryInvolution,
) -> Result<Vec<ConditionReversalMap>> {
    if pi.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: pi.dim(),
        });
    }
    let deviation = s.initial.deviation_from_maximally_mixed();
    if deviation > INVARIANT_TOL {
        return Err(Error::PreconditionViolated(
            Precondition::NonUniformInitialState { deviation },
        ));
    }
    let deviation = hamiltonian_reversal_deviation(&s.hamiltonian, pi)?;
    let scale = max_abs(s.hamiltonian.matrix()).max(1.0);
    if deviation > INVARIANT_TOL * scale {
        return Err(Error::PreconditionViolated(
            Precondition::HamiltonianNotSymmetric { deviation },
        ));
    }
    let maps = s
        .observables
        .iter()
        .enumerate()
        .map(|(step, obs)| {
            reverse_conditions(pi, obs, COVARIANCE_TOL).map_err(|e| match e {
                Error::PiNotCovariant { label } => {
                    Error::PreconditionViolated(Precondition::NonCovariantObservable {
                        step,
                        label,
                    })
                }
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps = s.gaps();
    let m = gaps.len();
    for k in 0..m {
        let (a, b) = (gaps[k], gaps[m - 1 - k]);
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
            return Err(Error::PreconditionViolated(Precondition::AsymmetricSpacing));
        }
    }
    let n = s.steps();
    for k in 0..n / 2 {
        if !s.observables[k].same_as(&s.observables[n - 1 - k], COVARIANCE_TOL) {
            return Err(Error::PreconditionViolated(
                Precondition::AsymmetricObservables { step: k },
            ));
        }
    }
    Ok(maps)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReversalRow {
    pub trajectory: Trajectory,
    pub reversed: Trajectory,
    pub probability: f64,
    pub reversed_probability: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeReversalReport {
    pub max_deviation: f64,
    pub worst: Option<Trajectory>,
    pub rows: Vec<ReversalRow>,
}

/// Compare `Prob[ω]` with `Prob[Θω]` over every trajectory.
pub fn verify_time_reversal(
    s: &MeasurementSchedule,
    pi: &AntiunitaryInvolution,
) -> Result<TimeReversalReport> {
    let maps = check_reversal_hypotheses(s, pi)?;
    let dist = enumerate_distribution(s)?;
    reversal_report(&dist, &maps)
}

fn reversal_report(
    dist: &TrajectoryDistribution,
    maps: &[ConditionReversalMap],
) -> Result<TimeReversalReport> {
    let mut rows = Vec::with_capacity(dist.len());
    let mut max_deviation = 0.0;
    let mut worst = None;
    for (t, p) in dist.entries() {
        let reversed = reverse_trajectory(t, maps)?;
        let q = dist
            .probability(&reversed)
            .ok_or_else(|| Error::UnknownLabel {
                label: reversed.to_string(),
                step: 0,
            })?;
        let deviation = (p - q).abs();
        if deviation > max_deviation || worst.is_none() {
            max_deviation = deviation.max(max_deviation);
            worst = Some(t.clone());
        }
        rows.push(ReversalRow {
            trajectory: t.clone(),
            reversed,
            probability: *p,
            reversed_probability: q,
            deviation,
        });
    }
    Ok(TimeReversalReport {
        max_deviation,
        worst,
        rows,
    })
}

/// Measured and predicted value of `Prob[ω|α_0] / Prob[Θω|α_t′]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetailedBalanceRatio {
    pub ratio: f64,
    pub predicted: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetailedBalanceRow {
    pub trajectory: Trajectory,
    /// `None` when `Prob[Θω]` vanishes.
    pub ratio: Option<DetailedBalanceRatio>,
}

fn ratio_from(
    s: &MeasurementSchedule,
    path: &[usize],
    reversed_first: usize,
    p: f64,
    q: f64,
) -> Result<DetailedBalanceRatio> {
    if q <= ZERO_PROBABILITY {
        return Err(Error::UndefinedRatio { denominator: q });
    }
    let n = s.steps();
    let d = s.dim() as f64;
    let d_first = s.dim_of(0, path[0]) as f64;
    let d_last = s.dim_of(n - 1, path[n - 1]) as f64;
    let d_reversed_first = s.dim_of(0, reversed_first) as f64;
    // Conditioning on the first outcome under I/d: p(α) = d_α/d.
    let forward = p / (d_first / d);
    let backward = q / (d_reversed_first / d);
    let ratio = forward / backward;
    let predicted = d_last / d_first;
    Ok(DetailedBalanceRatio {
        ratio,
        predicted,
        deviation: (ratio - predicted).abs(),
    })
}

/// Ratio of first-outcome conditioned forward and reversed trajectory
/// probabilities against the dimension ratio `d_{α_t} / d_{α_0}`.
pub fn detailed_balance_ratio(
    s: &MeasurementSchedule,
    trajectory: &Trajectory,
    pi: &AntiunitaryInvolution,
) -> Result<DetailedBalanceRatio> {
    let maps = check_reversal_hypotheses(s, pi)?;
    let path = s.resolve(trajectory)?;
    let reversed = reverse_trajectory(trajectory, &maps)?;
    let reversed_path = s.resolve(&reversed)?;
    let p = trajectory_probability(s, trajectory)?;
    let q = trajectory_probability(s, &reversed)?;
    ratio_from(s, &path, reversed_path[0], p, q)
}

/// Detailed-balance ratios for every trajectory.
pub fn detailed_balance_table(
    s: &MeasurementSchedule,
    pi: &AntiunitaryInvolution,
) -> Result<Vec<DetailedBalanceRow>> {
    let maps = check_reversal_hypotheses(s, pi)?;
    let dist = enumerate_distribution(s)?;
    dist.entries()
        .iter()
        .map(|(t, p)| {
            let reversed = reverse_trajectory(t, &maps)?;
            let q = dist.probability(&reversed).unwrap_or(0.0);
            let path = s.resolve(t)?;
            let reversed_path = s.resolve(&reversed)?;
            let ratio = match ratio_from(s, &path, reversed_path[0], *p, q) {
                Ok(r) => Some(r),
                Err(Error::UndefinedRatio { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(DetailedBalanceRow {
                trajectory: t.clone(),
                ratio,
            })
        })
        .collect()
}

/// Total chain weights below this are treated as unreachable endpoints.
pub const ZERO_WEIGHT: f64 = 1e-15;

fn abl_weights(
    s: &MeasurementSchedule,
    first: usize,
    last: usize,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let n = s.steps();
    if n < 2 {
        return Err(Error::InvalidSchedule(
            "two-time conditioning needs at least two measurements".into(),
        ));
    }
    let middle: u128 = s.observables[1..n - 1]
        .iter()
        .map(|o| o.len() as u128)
        .product();
    if middle > DEFAULT_ENUMERATION_CAP as u128 {
        return Err(Error::EnumerationCap {
            count: middle,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut out = Vec::new();
    let mut path = vec![first];
    abl_descend(s, last, &mut path, &mut out);
    Ok(out
        .into_iter()
        .map(|path| {
            let w = s.chain_weight(s.initial.matrix(), 0, &path);
            (path[1..n - 1].to_vec(), w)
        })
        .collect())
}

fn abl_descend(
    s: &MeasurementSchedule,
    last: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let n = s.steps();
    if path.len() == n - 1 {
        path.push(last);
        out.push(path.clone());
        path.pop();
        return;
    }
    for alpha in 0..s.observables[path.len()].len() {
        path.push(alpha);
        abl_descend(s, last, path, out);
        path.pop();
    }
}

/// Conditional law of the intermediate outcomes given both endpoints, as
/// (intermediate labels, probability) pairs.
pub fn abl_distribution(
    s: &MeasurementSchedule,
    first: &str,
    last: &str,
) -> Result<Vec<(Vec<String>, f64)>> {
    let n = s.steps();
    let a = s.observables[0]
        .index_of(first)
        .ok_or_else(|| Error::UnknownLabel {
            label: first.into(),
            step: 0,
        })?;
    let b = s.observables[n - 1]
        .index_of(last)
        .ok_or_else(|| Error::UnknownLabel {
            label: last.into(),
            step: n - 1,
        })?;
    let weights = abl_weights(s, a, b)?;
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if total <= ZERO_WEIGHT {
        return Err(Error::EndpointsUnreachable { weight: total });
    }
    Ok(weights
        .into_iter()
        .map(|(mid, w)| {
            let labels = mid
                .iter()
                .enumerate()
                .map(|(k, &i)| s.observables[k + 1].conditions()[i].label.clone())
                .collect();
            (labels, w / total)
        })
        .collect())
}

/// `Prob[α_1 … α_{t−1} | α_0, α_t]` from unnormalized chain traces.
pub fn abl_conditional(
    s: &MeasurementSchedule,
    first: &str,
    last: &str,
    intermediate: &[String],
) -> Result<f64> {
    let n = s.steps();
    if n < 2 || intermediate.len() != n - 2 {
        return Err(Error::TrajectoryLength {
            expected: n.saturating_sub(2),
            found: intermediate.len(),
        });
    }
    let mut labels = Vec::with_capacity(n);
    labels.push(first.to_string());
    labels.extend(intermediate.iter().cloned());
    labels.push(last.to_string());
    let path = s.resolve(&Trajectory(labels))?;
    let weights = abl_weights(s, path[0], path[n - 1])?;
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    if total <= ZERO_WEIGHT {
        return Err(Error::EndpointsUnreachable { weight: total });
    }
    let numerator = s.chain_weight(s.initial.matrix(), 0, &path);
    clamp_probability(numerator / total)
}

/// Max deviation between the two-time conditional of `ω` and that of `Θω`
/// over all reachable endpoint pairs. Requires the reversal hypotheses.
pub fn verify_abl_symmetry(s: &MeasurementSchedule, pi: &AntiunitaryInvolution) -> Result<f64> {
    let maps = check_reversal_hypotheses(s, pi)?;
    let dist = enumerate_distribution(s)?;
    let n = s.steps();
    if n < 2 {
        return Ok(0.0);
    }
    let mut endpoint_mass: HashMap<(String, String), f64> = HashMap::new();
    for (t, p) in dist.entries() {
        *endpoint_mass
            .entry((t.labels()[0].clone(), t.labels()[n - 1].clone()))
            .or_default() += p;
    }
    let conditional = |t: &Trajectory, p: f64| -> Option<f64> {
        let mass = endpoint_mass[&(t.labels()[0].clone(), t.labels()[n - 1].clone())];
        (mass > ZERO_PROBABILITY).then(|| p / mass)
    };
    let mut worst = 0.0f64;
    for (t, p) in dist.entries() {
        let reversed = reverse_trajectory(t, &maps)?;
        let q = dist.probability(&reversed).unwrap_or(0.0);
        if let (Some(a), Some(b)) = (conditional(t, *p), conditional(&reversed, q)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

fn trace_product(p: &CMatrix, rho: &CMatrix) -> f64 {
    // Tr[P ρ] = Σ_ij P_ij ρ_ji
    p.iter()
        .zip(rho.transpose().iter())
        .map(|(a, b)| a * b)
        .sum::<Complex64>()
        .re
}

/// Draw one trajectory with the collapse rule: outcome `α` with probability
/// `Tr[P_α ρ]`, then `ρ ↦ P_α ρ P_α / Tr[P_α ρ]` and unitary evolution.
pub fn sample_trajectory<R: Rng + ?Sized>(
    s: &MeasurementSchedule,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut rho = s.initial.matrix().clone();
    let mut labels = Vec::with_capacity(s.steps());
    for step in 0..s.steps() {
        let obs = &s.observables[step];
        let weights: Vec<f64> = obs
            .conditions()
            .iter()
            .map(|c| trace_product(&c.projector, &rho).max(0.0))
            .collect();
        let chooser =
            WeightedIndex::new(&weights).map_err(|_| Error::ZeroProbabilityStep { step })?;
        let alpha = chooser.sample(rng);
        let p = &obs.conditions()[alpha].projector;
        let projected = p * &rho * p;
        let norm = projected.trace().re;
        if norm <= 0.0 {
            return Err(Error::ZeroProbabilityStep { step });
        }
        rho = projected / Complex64::new(norm, 0.0);
        if step + 1 < s.steps() {
            rho = s.propagate(step, &rho);
        }
        labels.push(obs.conditions()[alpha].label.clone());
    }
    Ok(Trajectory(labels))
}

/// RNG for worker `worker`: ChaCha8 seeded from `seed`, on stream `worker`.
pub fn worker_rng(seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// Draw `samples` trajectories on `workers` independent streams.
///
/// Worker `w` owns a contiguous block of samples (the first `samples % workers`
/// workers take one extra) and draws them from [`worker_rng`]`(seed, w)`.
/// Output is concatenated in worker order, so it depends only on
/// `(seed, workers)`, not on thread scheduling.
pub fn sample_many(
    s: &MeasurementSchedule,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<Trajectory>> {
    let workers = workers.max(1);
    let base = samples / workers;
    let extra = samples % workers;
    let blocks: Vec<Vec<Trajectory>> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let count = base + usize::from(w < extra);
            let mut rng = worker_rng(seed, w as u64);
            (0..count)
                .map(|_| sample_trajectory(s, &mut rng))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

/// `S(α) = ln d_α`.
pub fn entropy_of_condition(obs: &ObservableDecomposition, label: &str) -> Result<f64> {
    obs.condition(label)
        .map(|c| (c.dim as f64).ln())
        .ok_or_else(|| Error::UnknownLabel {
            label: label.into(),
            step: 0,
        })
}

/// Boltzmann entropy of each outcome of `trajectory`.
pub fn entropy_trace(s: &MeasurementSchedule, trajectory: &Trajectory) -> Result<Vec<f64>> {
    let path = s.resolve(trajectory)?;
    Ok(path
        .iter()
        .enumerate()
        .map(|(step, &k)| (s.dim_of(step, k) as f64).ln())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyFlowConfig {
    pub sites: usize,
    pub seeds: usize,
    pub steps: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for EntropyFlowConfig {
    fn default() -> Self {
        Self {
            sites: 6,
            seeds: 50,
            steps: 3,
            dt: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStatistics {
    pub step: usize,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyFlowSummary {
    pub config: EntropyFlowConfig,
    pub steps: Vec<StepStatistics>,
    /// `increments[seed][step] = S(α_step) − S(α_0)`.
    pub increments: Vec<Vec<f64>>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Start every run in the fully polarized condition `m_z = +1` and follow the
/// Boltzmann entropy of the measured magnetization along one collapse
/// trajectory per random real symmetric Hamiltonian.
///
/// Run `k` draws its Hamiltonian and its outcomes from [`worker_rng`]`(seed, k)`.
pub fn entropy_flow_demo(config: EntropyFlowConfig) -> Result<EntropyFlowSummary> {
    if config.seeds == 0 {
        return Err(Error::InvalidSchedule(
            "entropy flow needs at least one seed".into(),
        ));
    }
    if !(config.dt > 0.0) {
        return Err(Error::InvalidSchedule("time step must be positive".into()));
    }
    let m = magnetization(config.sites)?;
    let d = m.dim();
    let obs = ObservableDecomposition::new(&m, DEFAULT_CLUSTER_TOL)?;
    let polarized = DensityMatrix::pure(&StateVector::basis(d, 0)?);
    let times: Vec<f64> = (0..=config.steps).map(|k| k as f64 * config.dt).collect();
    let increments = (0..config.seeds)
        .into_par_iter()
        .map(|k| {
            let mut rng = worker_rng(config.seed, k as u64);
            let h = random_real_symmetric(d, &mut rng);
            let s =
                MeasurementSchedule::repeated(h, polarized.clone(), times.clone(), obs.clone())?;
            let t = sample_trajectory(&s, &mut rng)?;
            let trace = entropy_trace(&s, &t)?;
            Ok(trace.iter().map(|x| x - trace[0]).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = (0..=config.steps)
        .map(|step| {
            let mut column: Vec<f64> = increments.iter().map(|row| row[step]).collect();
            column.sort_by(f64::total_cmp);
            StepStatistics {
                step,
                median: quantile(&column, 0.5),
                lower_quartile: quantile(&column, 0.25),
                upper_quartile: quantile(&column, 0.75),
                mean: column.iter().sum::<f64>() / column.len() as f64,
                min: column[0],
                max: column[column.len() - 1],
            }
        })
        .collect();
    Ok(EntropyFlowSummary {
        config,
        steps,
        increments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Retrodiction {
    /// Probability of `σ^z_1 − σ^z_2 = 2` at `t_2` given `σ^z_1 + σ^z_2 = 0` at `t_1`.
    pub forward: f64,
    /// Probability of `σ^z_1 + σ^z_2 = 0` given a start in `|↑↓⟩`, reversed order.
    pub reversed: f64,
}

impl Retrodiction {
    pub fn ratio(&self) -> f64 {
        self.forward / self.reversed
    }
}

/// Conditional probability of `second` at step 1 given `first` at step 0.
fn two_step_conditional(s: &MeasurementSchedule, first: &str, second: &str) -> Result<f64> {
    let dist = enumerate_distribution(s)?;
    let given: f64 = dist
        .entries()
        .iter()
        .filter(|(t, _)| t.first() == Some(first))
        .map(|(_, p)| p)
        .sum();
    if given <= ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityCondition);
    }
    let joint = dist
        .probability(&Trajectory::new([first, second]))
        .unwrap_or(0.0);
    Ok(joint / given)
}

/// Two spins under trivial dynamics, prepared in
/// `c_↑↑|↑↑⟩ + c_↑↓|↑↓⟩ + c_↓↑|↓↑⟩ + c_↓↓|↓↓⟩`: measure `σ^z_1 + σ^z_2`, then
/// `σ^z_1 − σ^z_2`, and compare with the reversed measurement order started
/// from `|↑↓⟩`.
pub fn two_spin_retrodiction(coefficients: [Complex64; 4]) -> Result<Retrodiction> {
    let psi = StateVector::from_slice(&coefficients)?;
    let s1 = site_operator(2, 1, Pauli::Z)?;
    let s2 = site_operator(2, 2, Pauli::Z)?;
    let sum = ObservableDecomposition::new(&s1.sum(&s2)?, DEFAULT_CLUSTER_TOL)?;
    let diff = ObservableDecomposition::new(&s1.difference(&s2)?, DEFAULT_CLUSTER_TOL)?;
    let zero = HermitianOperator::zero(4);
    let times = vec![1.0, 2.0];

    let forward_schedule = MeasurementSchedule::new(
        zero.clone(),
        DensityMatrix::pure(&psi),
        times.clone(),
        vec![sum.clone(), diff.clone()],
    )?;
    let forward = two_step_conditional(&forward_schedule, "0", "2")?;

    let up_down = StateVector::basis(4, 1)?;
    let reversed_schedule =
        MeasurementSchedule::new(zero, DensityMatrix::pure(&up_down), times, vec![diff, sum])?;
    let reversed = two_step_conditional(&reversed_schedule, "2", "0")?;
    Ok(Retrodiction { forward, reversed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_real_symmetric;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sigma_z() -> ObservableDecomposition {
        ObservableDecomposition::with_default_tol(&site_operator(1, 1, Pauli::Z).unwrap()).unwrap()
    }

    fn mz(n: usize) -> ObservableDecomposition {
        ObservableDecomposition::with_default_tol(&magnetization(n).unwrap()).unwrap()
    }

    fn spin_schedule(steps: usize) -> MeasurementSchedule {
        let omega = 2.0;
        let h = HermitianOperator::new(
            (CMatrix::identity(2, 2) - Pauli::X.matrix()) * c(omega / 2.0, 0.0),
        )
        .unwrap();
        let period = 2.0 * std::f64::consts::PI / omega;
        let times = (1..=steps).map(|k| k as f64 * period / 4.0).collect();
        MeasurementSchedule::repeated(h, DensityMatrix::maximally_mixed(2), times, sigma_z())
            .unwrap()
    }

    #[test]
    fn schedule_validation() {
        let h = HermitianOperator::zero(2);
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(MeasurementSchedule::repeated(h.clone(), rho.clone(), vec![], sigma_z()).is_err());
        assert!(
            MeasurementSchedule::repeated(h.clone(), rho.clone(), vec![1.0, 1.0], sigma_z())
                .is_err()
        );
        assert!(matches!(
            MeasurementSchedule::repeated(h, rho, vec![0.0], mz(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn spin_sequences_are_fair_coin_flips() {
        let s = spin_schedule(5);
        let dist = enumerate_distribution(&s).unwrap();
        assert_eq!(dist.len(), 32);
        for (_, p) in dist.entries() {
            assert!((p - 1.0 / 32.0).abs() < 1e-12);
        }
        for step in 0..5 {
            for (_, p) in dist.marginal(step) {
                assert!((p - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_measurement_without_dynamics() {
        let obs = mz(2);
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(4), obs, 2, 1.0).unwrap();
        for a in ["-1", "0", "1"] {
            for b in ["-1", "0", "1"] {
                let p = trajectory_probability(&s, &Trajectory::new([a, b])).unwrap();
                let expected = if a == b {
                    if a == "0" {
                        0.5
                    } else {
                        0.25
                    }
                } else {
                    0.0
                };
                assert_eq!(p, expected, "{a}>{b}");
            }
        }
    }

    #[test]
    fn single_step_distribution_is_dimension_weighted() {
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(4), mz(2), 1, 1.0).unwrap();
        let dist = enumerate_distribution(&s).unwrap();
        assert_eq!(dist.probability(&Trajectory::new(["1"])), Some(0.25));
        assert_eq!(dist.probability(&Trajectory::new(["0"])), Some(0.5));
        assert_eq!(dist.probability(&Trajectory::new(["-1"])), Some(0.25));
    }

    #[test]
    fn unknown_labels_and_lengths_are_rejected() {
        let s = spin_schedule(2);
        assert!(matches!(
            trajectory_probability(&s, &Trajectory::new(["1", "7"])),
            Err(Error::UnknownLabel { step: 1, .. })
        ));
        assert!(matches!(
            trajectory_probability(&s, &Trajectory::new(["1"])),
            Err(Error::TrajectoryLength { .. })
        ));
    }

    #[test]
    fn enumeration_cap() {
        let s = spin_schedule(4);
        assert!(matches!(
            enumerate_distribution_with_cap(&s, 15),
            Err(Error::EnumerationCap { count: 16, cap: 15 })
        ));
        let capped = spin_schedule(4).with_enumeration_cap(15);
        assert!(matches!(
            verify_time_reversal(&capped, &AntiunitaryInvolution::conjugation(2)),
            Err(Error::EnumerationCap { count: 16, cap: 15 })
        ));
        assert_eq!(enumerate_distribution(&s).unwrap().len(), 16);
    }

    #[test]
    fn trajectory_reversal() {
        let ids = vec![ConditionReversalMap::identity(["a", "b", "c"]); 3];
        let t = Trajectory::new(["a", "b", "c"]);
        assert_eq!(
            reverse_trajectory(&t, &ids).unwrap(),
            Trajectory::new(["c", "b", "a"])
        );
        let swap = ConditionReversalMap::from_pairs(&[
            ("1".into(), "-1".into()),
            ("-1".into(), "1".into()),
        ])
        .unwrap();
        let maps = vec![swap; 2];
        let t = Trajectory::new(["1", "1"]);
        assert_eq!(
            reverse_trajectory(&t, &maps).unwrap(),
            Trajectory::new(["-1", "-1"])
        );
        let t = Trajectory::new(["1", "-1"]);
        assert_eq!(
            reverse_trajectory(&t, &maps).unwrap(),
            Trajectory::new(["1", "-1"])
        );
        assert!(reverse_trajectory(&Trajectory::new(["1", "x"]), &maps).is_err());
    }

    #[test]
    fn trajectory_display_round_trips() {
        let t = Trajectory::new(["1", "-0.3333333333", "0"]);
        assert_eq!(t.to_string(), "1>-0.3333333333>0");
        assert_eq!(t.to_string().parse::<Trajectory>().unwrap(), t);
    }

    #[test]
    fn zero_hamiltonian_reversal_is_exact() {
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(8), mz(3), 3, 1.0).unwrap();
        let report = verify_time_reversal(&s, &AntiunitaryInvolution::conjugation(8)).unwrap();
        assert!(report.max_deviation <= 1e-12);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let pi = AntiunitaryInvolution::conjugation(2);
        // Non-uniform initial state.
        let s = MeasurementSchedule::repeated(
            HermitianOperator::zero(2),
            DensityMatrix::pure(&StateVector::basis(2, 0).unwrap()),
            vec![0.0, 1.0],
            sigma_z(),
        )
        .unwrap();
        assert!(matches!(
            verify_time_reversal(&s, &pi),
            Err(Error::PreconditionViolated(
                Precondition::NonUniformInitialState { .. }
            ))
        ));
        // πHπ ≠ H.
        let sy = HermitianOperator::new(Pauli::Y.matrix()).unwrap();
        let s = MeasurementSchedule::equally_spaced(sy, sigma_z(), 2, 1.0).unwrap();
        assert!(matches!(
            verify_time_reversal(&s, &pi),
            Err(Error::PreconditionViolated(
                Precondition::HamiltonianNotSymmetric { .. }
            ))
        ));
        // Non-covariant observable.
        let tilted = HermitianOperator::new(Pauli::X.matrix() + Pauli::Y.matrix()).unwrap();
        let obs = ObservableDecomposition::with_default_tol(&tilted).unwrap();
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(2), obs, 2, 1.0).unwrap();
        assert!(matches!(
            verify_time_reversal(&s, &pi),
            Err(Error::PreconditionViolated(
                Precondition::NonCovariantObservable { .. }
            ))
        ));
        // Asymmetric spacing.
        let s = MeasurementSchedule::repeated(
            HermitianOperator::zero(2),
            DensityMatrix::maximally_mixed(2),
            vec![0.0, 1.0, 3.0],
            sigma_z(),
        )
        .unwrap();
        assert!(matches!(
            verify_time_reversal(&s, &pi),
            Err(Error::PreconditionViolated(Precondition::AsymmetricSpacing))
        ));
        // Asymmetric observables.
        let sx = ObservableDecomposition::with_default_tol(&site_operator(1, 1, Pauli::X).unwrap())
            .unwrap();
        let s = MeasurementSchedule::new(
            HermitianOperator::zero(2),
            DensityMatrix::maximally_mixed(2),
            vec![0.0, 1.0],
            vec![sigma_z(), sx],
        )
        .unwrap();
        assert!(matches!(
            verify_time_reversal(&s, &pi),
            Err(Error::PreconditionViolated(
                Precondition::AsymmetricObservables { step: 0 }
            ))
        ));
    }

    #[test]
    fn detailed_balance_for_two_spins() {
        let mut rng = worker_rng(7, 0);
        let h = random_real_symmetric(4, &mut rng);
        let s = MeasurementSchedule::equally_spaced(h, mz(2), 3, 0.8).unwrap();
        let pi = AntiunitaryInvolution::conjugation(4);
        let r = detailed_balance_ratio(&s, &Trajectory::new(["1", "-1", "0"]), &pi).unwrap();
        assert_eq!(r.predicted, 2.0);
        assert!(r.deviation < 1e-10, "{r:?}");
        let r = detailed_balance_ratio(&s, &Trajectory::new(["0", "1", "0"]), &pi).unwrap();
        assert_eq!(r.predicted, 1.0);
        assert!(r.deviation < 1e-10);
    }

    #[test]
    fn undefined_ratio_for_unreachable_reversal() {
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(4), mz(2), 2, 1.0).unwrap();
        let pi = AntiunitaryInvolution::conjugation(4);
        assert!(matches!(
            detailed_balance_ratio(&s, &Trajectory::new(["1", "0"]), &pi),
            Err(Error::UndefinedRatio { .. })
        ));
        let table = detailed_balance_table(&s, &pi).unwrap();
        assert_eq!(table.iter().filter(|r| r.ratio.is_some()).count(), 3);
    }

    #[test]
    fn abl_trivial_dynamics_retrodicts_up() {
        let s = MeasurementSchedule::repeated(
            HermitianOperator::zero(2),
            DensityMatrix::maximally_mixed(2),
            vec![0.0, 1.0, 2.0],
            sigma_z(),
        )
        .unwrap();
        assert_eq!(abl_conditional(&s, "1", "1", &["1".into()]).unwrap(), 1.0);
        assert_eq!(abl_conditional(&s, "1", "1", &["-1".into()]).unwrap(), 0.0);
        assert!(matches!(
            abl_conditional(&s, "1", "-1", &["1".into()]),
            Err(Error::EndpointsUnreachable { .. })
        ));
    }

    #[test]
    fn abl_single_possible_intermediate() {
        // A one-condition observable (the identity) in the middle.
        let id =
            ObservableDecomposition::with_default_tol(&HermitianOperator::identity(2)).unwrap();
        let mut rng = worker_rng(3, 0);
        let h = crate::random::random_hermitian(2, &mut rng);
        let s = MeasurementSchedule::new(
            h,
            DensityMatrix::maximally_mixed(2),
            vec![0.0, 0.5, 1.0],
            vec![sigma_z(), id, sigma_z()],
        )
        .unwrap();
        let p = abl_conditional(&s, "1", "-1", &["1".into()]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_constant_on_eigenstate() {
        let s = MeasurementSchedule::repeated(
            HermitianOperator::zero(4),
            DensityMatrix::pure(&StateVector::basis(4, 1).unwrap()),
            vec![0.0, 1.0, 2.0, 3.0],
            mz(2),
        )
        .unwrap();
        let mut rng = worker_rng(1, 0);
        for _ in 0..50 {
            let t = sample_trajectory(&s, &mut rng).unwrap();
            assert_eq!(t, Trajectory::new(["0", "0", "0", "0"]));
        }
    }

    #[test]
    fn sample_many_is_reproducible_and_split() {
        let s = spin_schedule(3);
        let a = sample_many(&s, 101, 9, 4).unwrap();
        let b = sample_many(&s, 101, 9, 4).unwrap();
        assert_eq!(a.len(), 101);
        assert_eq!(a, b);
        // Worker 0's block is the first 26 draws of its own stream.
        let mut rng = worker_rng(9, 0);
        let direct: Vec<_> = (0..26)
            .map(|_| sample_trajectory(&s, &mut rng).unwrap())
            .collect();
        assert_eq!(&a[..26], &direct[..]);
    }

    #[test]
    fn entropy_values() {
        let obs = mz(3);
        assert_eq!(entropy_of_condition(&obs, "1").unwrap(), 0.0);
        assert!((entropy_of_condition(&obs, "0.3333333333").unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!(entropy_of_condition(&obs, "2").is_err());
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(4), mz(2), 3, 1.0).unwrap();
        let trace = entropy_trace(&s, &Trajectory::new(["1", "0", "-1"])).unwrap();
        assert_eq!(trace, vec![0.0, 2f64.ln(), 0.0]);
    }

    #[test]
    fn entropy_flow_starts_at_zero() {
        let summary = entropy_flow_demo(EntropyFlowConfig {
            sites: 3,
            seeds: 8,
            steps: 2,
            dt: 1.0,
            seed: 5,
        })
        .unwrap();
        assert_eq!(summary.steps.len(), 3);
        assert!(summary.increments.iter().all(|row| row[0] == 0.0));
        assert_eq!(summary.steps[0].median, 0.0);
    }

    #[test]
    fn quantile_interpolates() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&data, 0.5), 2.5);
        assert_eq!(quantile(&data, 0.0), 1.0);
        assert_eq!(quantile(&data, 1.0), 4.0);
    }

    #[test]
    fn retrodiction_formula_cases() {
        let half = c(0.5, 0.0);
        let r = two_spin_retrodiction([half; 4]).unwrap();
        assert!((r.forward - 0.5).abs() < 1e-12);
        assert_eq!(r.reversed, 1.0);

        let r =
            two_spin_retrodiction([c(0.3, 0.0), c(0.5, 0.1), c(0.0, 0.0), c(0.2, 0.0)]).unwrap();
        assert!((r.forward - 1.0).abs() < 1e-12);

        let base =
            two_spin_retrodiction([c(0.1, 0.0), c(0.6, 0.0), c(0.6, 0.0), c(0.2, 0.0)]).unwrap();
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = two_spin_retrodiction([
            c(0.1, 0.0),
            c(0.6, 0.0) * phase,
            c(0.6, 0.0) * phase,
            c(0.2, 0.0),
        ])
        .unwrap();
        assert!((base.forward - rotated.forward).abs() < 1e-12);

        assert!(matches!(
            two_spin_retrodiction([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::ZeroProbabilityCondition)
        ));
    }

    #[test]
    fn total_variation_of_exact_samples() {
        let s =
            MeasurementSchedule::equally_spaced(HermitianOperator::zero(4), mz(2), 1, 1.0).unwrap();
        let dist = enumerate_distribution(&s).unwrap();
        let samples = vec![
            Trajectory::new(["1"]),
            Trajectory::new(["0"]),
            Trajectory::new(["0"]),
            Trajectory::new(["-1"]),
        ];
        assert_eq!(dist.total_variation(&samples), 0.0);
        let off = vec![Trajectory::new(["9"])];
        assert_eq!(dist.total_variation(&off), 1.0);
    }
}
