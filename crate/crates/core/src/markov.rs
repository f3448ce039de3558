//! Finite discrete-time Markov chains and their time reversal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Row sums must be within this of one.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Row-stochastic transition matrix with an optional cached stationary law.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    states: Vec<String>,
    transitions: DMatrix<f64>,
    stationary: Option<Vec<f64>>,
}

impl MarkovChain {
    pub fn new(states: Vec<String>, transitions: DMatrix<f64>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::NotStochastic("chain has no states".into()));
        }
        if transitions.nrows() != n || transitions.ncols() != n {
            return Err(Error::NotStochastic(format!(
                "{n} states but a {}×{} matrix",
                transitions.nrows(),
                transitions.ncols()
            )));
        }
        for (i, row) in transitions.row_iter().enumerate() {
            if let Some(x) = row.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                return Err(Error::NotStochastic(format!(
                    "row {i} has invalid entry {x}"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self {
            states,
            transitions,
            stationary: None,
        })
    }

    /// Chain with states labelled `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotStochastic(
                "transition matrix is not square".into(),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let states = (0..n).map(|i| i.to_string()).collect();
        Self::new(states, DMatrix::from_row_slice(n, n, &flat))
    }

    /// Attach a stationary law after checking `ρ p = ρ`.
    pub fn with_stationary(mut self, stationary: Vec<f64>) -> Result<Self> {
        let n = self.len();
        if stationary.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: stationary.len(),
            });
        }
        let total: f64 = stationary.iter().sum();
        if stationary.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotStochastic(
                "stationary law is not a distribution".into(),
            ));
        }
        let rho = DVector::from_vec(stationary.clone());
        let balance = (self.transitions.transpose() * &rho - &rho).amax();
        if balance > 1e-10 {
            return Err(Error::NotStochastic(format!(
                "distribution is not stationary (residual {balance:e})"
            )));
        }
        self.stationary = Some(stationary);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transitions(&self) -> &DMatrix<f64> {
        &self.transitions
    }

    pub fn p(&self, from: usize, to: usize) -> f64 {
        self.transitions[(from, to)]
    }

    pub fn stationary(&self) -> Option<&[f64]> {
        self.stationary.as_deref()
    }

    /// Cached stationary law, or solve for it.
    pub fn stationary_or_solve(&self) -> Result<Vec<f64>> {
        match &self.stationary {
            Some(rho) => Ok(rho.clone()),
            None => stationary_distribution(self),
        }
    }

    /// Max entry difference of the transition matrices.
    pub fn max_difference(&self, other: &MarkovChain) -> f64 {
        if self.transitions.shape() != other.transitions.shape() {
            return f64::INFINITY;
        }
        (&self.transitions - &other.transitions).amax()
    }
}

/// Communicating classes (mutual reachability), each sorted, in order of
/// their smallest member.
#[allow(clippy::needless_range_loop)]
pub fn communicating_classes(chain: &MarkovChain) -> Vec<Vec<usize>> {
    let n = chain.len();
    let reach: Vec<Vec<bool>> = (0..n)
        .map(|start| {
            let mut seen = vec![false; n];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(x) = stack.pop() {
                for y in 0..n {
                    if !seen[y] && chain.p(x, y) > 0.0 {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            seen
        })
        .collect();
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for x in 0..n {
        if assigned[x] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&y| reach[x][y] && reach[y][x]).collect();
        for &y in &class {
            assigned[y] = true;
        }
        classes.push(class);
    }
    classes
}

/// Unique `ρ` with `ρ p = ρ`, from a direct linear solve with the
/// normalization replacing one balance equation.
pub fn stationary_distribution(chain: &MarkovChain) -> Result<Vec<f64>> {
    let classes = communicating_classes(chain);
    if classes.len() > 1 {
        return Err(Error::ReducibleChain { classes });
    }
    let n = chain.len();
    let mut system = chain.transitions().transpose() - DMatrix::<f64>::identity(n, n);
    system.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NotStochastic("singular balance system".into()))?;
    let rho: Vec<f64> = solution.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = rho.iter().sum();
    Ok(rho.into_iter().map(|x| x / total).collect())
}

/// Bayes reversal `p̃(y, y′) = p(y′, y) ρ(y′) / ρ(y)`.
pub fn reverse_chain(chain: &MarkovChain) -> Result<MarkovChain> {
    let identity: Vec<usize> = (0..chain.len()).collect();
    reverse_chain_with(chain, &identity)
}

/// Bayes reversal composed with a state involution `π`:
/// `p̃(y, y′) = p(πy′, πy) ρ(πy′) / ρ(πy)`.
pub fn reverse_chain_with(chain: &MarkovChain, involution: &[usize]) -> Result<MarkovChain> {
    let n = chain.len();
    check_state_involution(involution, n)?;
    let rho = chain.stationary_or_solve()?;
    if let Some(state) = rho.iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroStationaryMass { state });
    }
    let reversed = DMatrix::from_fn(n, n, |y, z| {
        let (py, pz) = (involution[y], involution[z]);
        chain.p(pz, py) * rho[pz] / rho[py]
    });
    let relabelled: Vec<f64> = (0..n).map(|y| rho[involution[y]]).collect();
    let mut out = MarkovChain::new(chain.states.clone(), reversed)?;
    out.stationary = Some(relabelled);
    Ok(out)
}

fn check_state_involution(involution: &[usize], n: usize) -> Result<()> {
    if involution.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: involution.len(),
        });
    }
    for (x, &y) in involution.iter().enumerate() {
        if y >= n {
            return Err(Error::StateOutOfRange { state: y, size: n });
        }
        if involution[y] != x {
            return Err(Error::NotStateInvolution { state: x });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetailedBalanceCheck {
    pub holds: bool,
    pub max_violation: f64,
    /// Pair attaining the maximal violation, when it is nonzero.
    pub witness: Option<(usize, usize)>,
}

/// Max over pairs of `|ρ(y) p(y, y′) − ρ(y′) p(y′, y)|`.
pub fn is_detailed_balance(chain: &MarkovChain, tol: f64) -> Result<DetailedBalanceCheck> {
    let rho = chain.stationary_or_solve()?;
    let n = chain.len();
    let mut max_violation = 0.0;
    let mut witness = None;
    for y in 0..n {
        for z in (y + 1)..n {
            let v = (rho[y] * chain.p(y, z) - rho[z] * chain.p(z, y)).abs();
            if v > max_violation {
                max_violation = v;
                witness = Some((y, z));
            }
        }
    }
    Ok(DetailedBalanceCheck {
        holds: max_violation <= tol,
        max_violation,
        witness,
    })
}

/// Per-pair probability flows, for violation tables.
pub fn balance_table(chain: &MarkovChain) -> Result<Vec<(usize, usize, f64, f64)>> {
    let rho = chain.stationary_or_solve()?;
    let n = chain.len();
    let mut rows = Vec::new();
    for y in 0..n {
        for z in (y + 1)..n {
            rows.push((y, z, rho[y] * chain.p(y, z), rho[z] * chain.p(z, y)));
        }
    }
    Ok(rows)
}

/// Symmetric activity `Φ` and potential `V`; transitions
/// `p(y, y′) = Φ(y, y′) e^{[V(y) − V(y′)]/2}` off the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialForm {
    activity: DMatrix<f64>,
    potential: Vec<f64>,
}

impl PotentialForm {
    pub fn new(activity: DMatrix<f64>, potential: Vec<f64>) -> Result<Self> {
        let n = potential.len();
        if n == 0 || activity.nrows() != n || activity.ncols() != n {
            return Err(Error::InvalidPotentialForm(format!(
                "{n} potentials but a {}×{} activity matrix",
                activity.nrows(),
                activity.ncols()
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotentialForm(
                "potential must be finite".into(),
            ));
        }
        for y in 0..n {
            for z in 0..n {
                let a = activity[(y, z)];
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidPotentialForm(format!(
                        "Φ({y},{z}) = {a} is not a nonnegative number"
                    )));
                }
                if a != activity[(z, y)] {
                    return Err(Error::InvalidPotentialForm(format!(
                        "Φ({y},{z}) ≠ Φ({z},{y})"
                    )));
                }
            }
        }
        Ok(Self {
            activity,
            potential,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], potential: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidPotentialForm(
                "activity matrix is not square".into(),
            ));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat), potential)
    }

    pub fn len(&self) -> usize {
        self.potential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.potential.is_empty()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// `e^{−V}/Z`.
    pub fn gibbs_weights(&self) -> Vec<f64> {
        let min = self.potential.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = self.potential.iter().map(|v| (min - v).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

/// Chain with detailed balance w.r.t. `e^{−V}/Z`; the diagonal absorbs the
/// remaining mass of each row.
pub fn gibbs_chain(form: &PotentialForm) -> Result<MarkovChain> {
    let n = form.len();
    let v = &form.potential;
    let mut p = DMatrix::from_fn(n, n, |y, z| {
        if y == z {
            0.0
        } else {
            form.activity[(y, z)] * ((v[y] - v[z]) / 2.0).exp()
        }
    });
    for y in 0..n {
        let off: f64 = p.row(y).iter().sum();
        if off > 1.0 {
            return Err(Error::RowSumOverflow {
                row: y,
                sum: off,
                rescale: 1.0 / off,
            });
        }
        p[(y, y)] = 1.0 - off;
    }
    let states = (0..n).map(|i| i.to_string()).collect();
    let mut chain = MarkovChain::new(states, p)?;
    chain.stationary = Some(form.gibbs_weights());
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle3() -> MarkovChain {
        MarkovChain::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn two_state_swap_is_uniform() {
        let chain = MarkovChain::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let rho = stationary_distribution(&chain).unwrap();
        assert!((rho[0] - 0.5).abs() < 1e-15 && (rho[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_state_stationary_by_hand() {
        // 0.1 ρ0 = 0.2 ρ1 and ρ0 + ρ1 = 1.
        let chain = MarkovChain::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let rho = stationary_distribution(&chain).unwrap();
        assert!((rho[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((rho[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn doubly_stochastic_is_uniform() {
        let chain = MarkovChain::from_rows(&[
            vec![0.2, 0.5, 0.3],
            vec![0.3, 0.2, 0.5],
            vec![0.5, 0.3, 0.2],
        ])
        .unwrap();
        for x in stationary_distribution(&chain).unwrap() {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reducible_chain_names_classes() {
        let chain = MarkovChain::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.5, 0.5],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        match stationary_distribution(&chain) {
            Err(Error::ReducibleChain { classes }) => {
                assert_eq!(classes, vec![vec![0], vec![1, 2]])
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_rows_rejected() {
        assert!(MarkovChain::from_rows(&[vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
        assert!(MarkovChain::from_rows(&[vec![1.5, -0.5], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn three_cycle_reverses_direction() {
        let reversed = reverse_chain(&cycle3()).unwrap();
        let expected = MarkovChain::from_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert!(reversed.max_difference(&expected) < 1e-12);
        let check = is_detailed_balance(&cycle3(), 1e-12).unwrap();
        assert!(!check.holds);
        assert_eq!(check.witness, Some((0, 1)));
        assert!((check.max_violation - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fair_coin_measurement_chain_is_balanced() {
        let chain = MarkovChain::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]])
            .unwrap()
            .with_stationary(vec![0.5, 0.5])
            .unwrap();
        assert!(is_detailed_balance(&chain, 1e-12).unwrap().holds);
    }

    #[test]
    fn reversal_requires_positive_mass() {
        // Transient state 0 gets zero stationary weight in a reducible chain; supply it directly.
        let chain = MarkovChain::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]])
            .unwrap()
            .with_stationary(vec![0.0, 1.0])
            .unwrap();
        assert!(matches!(
            reverse_chain(&chain),
            Err(Error::ZeroStationaryMass { state: 0 })
        ));
    }

    #[test]
    fn involution_reversal() {
        // Swapping states of a symmetric chain changes nothing.
        let chain = MarkovChain::from_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let reversed = reverse_chain_with(&chain, &[1, 0]).unwrap();
        assert!(reversed.max_difference(&chain) < 1e-12);
        assert!(reverse_chain_with(&chain, &[1, 1]).is_err());
    }

    #[test]
    fn gibbs_examples() {
        let n = 4;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|y| (0..n).map(|z| if y == z { 0.0 } else { 0.25 }).collect())
            .collect();
        let form = PotentialForm::from_rows(&rows, vec![0.0; n]).unwrap();
        let chain = gibbs_chain(&form).unwrap();
        for y in 0..n {
            for z in 0..n {
                assert_eq!(chain.p(y, z), chain.p(z, y));
            }
        }
        for x in stationary_distribution(&chain).unwrap() {
            assert!((x - 0.25).abs() < 1e-12);
        }

        // p(0,1) = 1/4·e^{−ln2/2}, p(1,0) = 1/4·e^{ln2/2}; ρ ∝ (1, 1/2).
        let form =
            PotentialForm::from_rows(&[vec![0.0, 0.25], vec![0.25, 0.0]], vec![0.0, 2f64.ln()])
                .unwrap();
        let chain = gibbs_chain(&form).unwrap();
        let s2 = 2f64.sqrt();
        assert!((chain.p(0, 1) - 0.25 / s2).abs() < 1e-15);
        assert!((chain.p(1, 0) - 0.25 * s2).abs() < 1e-15);
        let rho = stationary_distribution(&chain).unwrap();
        assert!((rho[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!(is_detailed_balance(&chain, 1e-12).unwrap().holds);
    }

    #[test]
    fn gibbs_row_overflow() {
        let form =
            PotentialForm::from_rows(&[vec![0.0, 0.9], vec![0.9, 0.0]], vec![0.0, -2.0]).unwrap();
        match gibbs_chain(&form) {
            Err(Error::RowSumOverflow {
                row: 0,
                sum,
                rescale,
            }) => {
                assert!((sum * rescale - 1.0).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(
            PotentialForm::from_rows(&[vec![0.0, 0.1], vec![0.2, 0.0]], vec![0.0, 0.0]).is_err()
        );
    }

    fn random_chain(n: usize, weights: &[f64]) -> MarkovChain {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let row = &weights[i * n..(i + 1) * n];
                let total: f64 = row.iter().sum();
                row.iter().map(|w| w / total).collect()
            })
            .collect();
        MarkovChain::from_rows(&rows).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reversal_preserves_stationarity_and_is_involutive(
            (n, weights) in (2usize..12).prop_flat_map(|n| {
                (Just(n), prop::collection::vec(0.05f64..1.0, n * n))
            })
        ) {
            let chain = random_chain(n, &weights);
            let rho = stationary_distribution(&chain).unwrap();
            let reversed = reverse_chain(&chain).unwrap();
            let rho_vec = DVector::from_vec(rho.clone());
            let residual = (reversed.transitions().transpose() * &rho_vec - &rho_vec).amax();
            prop_assert!(residual <= 1e-10);
            let twice = reverse_chain(&reversed).unwrap();
            prop_assert!(twice.max_difference(&chain) <= 1e-12);
            // Detailed balance iff the reversal is the chain itself.
            let db = is_detailed_balance(&chain, 1e-12).unwrap().holds;
            prop_assert_eq!(db, reversed.max_difference(&chain) <= 1e-10);
        }

        #[test]
        fn gibbs_chains_are_balanced(
            (n, activity, potential) in (2usize..10).prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec(0.0f64..1.0, n * n),
                    prop::collection::vec(-2.0f64..2.0, n),
                )
            })
        ) {
            // Symmetrize, then scale so every row fits.
            let mut phi = DMatrix::from_fn(n, n, |y, z| {
                if y == z { 0.0 } else { activity[y.min(z) * n + y.max(z)] }
            });
            let spread = potential.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - potential.iter().cloned().fold(f64::INFINITY, f64::min);
            phi /= n as f64 * (spread / 2.0).exp();
            let form = PotentialForm::new(phi, potential).unwrap();
            let chain = gibbs_chain(&form).unwrap();
            prop_assert!(is_detailed_balance(&chain, 1e-12).unwrap().holds);
            let solved = stationary_distribution(&chain);
            if let Ok(rho) = solved {
                for (a, b) in rho.iter().zip(form.gibbs_weights()) {
                    prop_assert!((a - b).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn balanced_chains_reverse_to_themselves(
            (n, activity, potential) in (2usize..8).prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec(0.1f64..1.0, n * n),
                    prop::collection::vec(-1.0f64..1.0, n),
                )
            })
        ) {
            let mut phi = DMatrix::from_fn(n, n, |y, z| {
                if y == z { 0.0 } else { activity[y.min(z) * n + y.max(z)] }
            });
            phi /= n as f64 * 1f64.exp();
            let chain = gibbs_chain(&PotentialForm::new(phi, potential).unwrap()).unwrap();
            let reversed = reverse_chain(&chain).unwrap();
            prop_assert!(reversed.max_difference(&chain) <= 1e-12);
        }
    }
}
