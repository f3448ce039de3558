//! Finite invertible dynamics with a kinematical involution.
//!
//! States are `0..n`. Volumes are counts, so every identity here is exact and
//! checked with integer and rational arithmetic.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Exact rational probability.
pub type Probability = Ratio<u64>;

/// A bijection `f` on `0..n` together with an involution `π`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDynamicalSystem {
    forward: Vec<usize>,
    backward: Vec<usize>,
    involution: Vec<usize>,
}

impl FiniteDynamicalSystem {
    pub fn new(forward: Vec<usize>, involution: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        if n == 0 {
            return Err(Error::NotBijection("empty state set".into()));
        }
        if involution.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: involution.len(),
            });
        }
        let mut backward = vec![usize::MAX; n];
        for (x, &y) in forward.iter().enumerate() {
            if y >= n {
                return Err(Error::StateOutOfRange { state: y, size: n });
            }
            if backward[y] != usize::MAX {
                return Err(Error::NotBijection(format!(
                    "states {} and {x} both map to {y}",
                    backward[y]
                )));
            }
            backward[y] = x;
        }
        for (x, &y) in involution.iter().enumerate() {
            if y >= n {
                return Err(Error::StateOutOfRange { state: y, size: n });
            }
            if involution[y] != x {
                return Err(Error::NotStateInvolution { state: x });
            }
        }
        Ok(Self {
            forward,
            backward,
            involution,
        })
    }

    /// Free motion on `Z_n × Z_n`: `f(q, p) = (q + p, p)`, `π(q, p) = (q, −p)`.
    /// State `(q, p)` has index `q·n + p`.
    pub fn free_motion(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotBijection("free motion needs n ≥ 1".into()));
        }
        let index = |q: usize, p: usize| q * n + p;
        let mut forward = vec![0; n * n];
        let mut involution = vec![0; n * n];
        for q in 0..n {
            for p in 0..n {
                forward[index(q, p)] = index((q + p) % n, p);
                involution[index(q, p)] = index(q, (n - p) % n);
            }
        }
        Self::new(forward, involution)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn involution(&self) -> &[usize] {
        &self.involution
    }

    /// `π(x)`.
    pub fn reverse(&self, x: usize) -> usize {
        self.involution[x]
    }

    /// `f^t(x)` for any integer `t`.
    pub fn step(&self, x: usize, t: i64) -> usize {
        let map = if t >= 0 {
            &self.forward
        } else {
            &self.backward
        };
        (0..t.unsigned_abs()).fold(x, |y, _| map[y])
    }

    /// The permutation `f^t` as a table.
    pub fn power(&self, t: i64) -> Vec<usize> {
        (0..self.len()).map(|x| self.step(x, t)).collect()
    }
}

/// A set of microstates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Macrostate {
    members: BTreeSet<usize>,
}

impl Macrostate {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self {
            members: members.into_iter().collect(),
        }
    }

    pub fn from_predicate(size: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        Self::new((0..size).filter(|&x| pred(x)))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(&x)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    /// `S(M) = ln |M|`.
    pub fn entropy(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyMacrostate);
        }
        Ok((self.len() as f64).ln())
    }

    /// Image under a state map.
    pub fn image(&self, map: &[usize]) -> Macrostate {
        Self::new(self.members().map(|x| map[x]))
    }

    fn check(&self, sys: &FiniteDynamicalSystem) -> Result<()> {
        match self.members.last() {
            Some(&x) if x >= sys.len() => Err(Error::StateOutOfRange {
                state: x,
                size: sys.len(),
            }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MechanicalReversibility {
    pub holds: bool,
    /// First state with `π f^t π (x) ≠ f^{−t}(x)`.
    pub witness: Option<usize>,
}

/// Check `π f^t π = f^{−t}` on every state.
pub fn check_mechanical_reversibility(
    sys: &FiniteDynamicalSystem,
    t: u32,
) -> MechanicalReversibility {
    let forward = sys.power(i64::from(t));
    let backward = sys.power(-i64::from(t));
    let witness = (0..sys.len()).find(|&x| sys.reverse(forward[sys.reverse(x)]) != backward[x]);
    MechanicalReversibility {
        holds: witness.is_none(),
        witness,
    }
}

/// `|A ∩ f^{−t}B| / |A|`.
pub fn macro_transition_probability(
    sys: &FiniteDynamicalSystem,
    a: &Macrostate,
    b: &Macrostate,
    t: i64,
) -> Result<Probability> {
    if a.is_empty() {
        return Err(Error::EmptyMacrostate);
    }
    a.check(sys)?;
    b.check(sys)?;
    let hits = a.members().filter(|&x| b.contains(sys.step(x, t))).count();
    Ok(Ratio::new(hits as u64, a.len() as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetailedBalanceIdentity {
    /// `Prob[B | A] / Prob[πA | πB]`.
    pub lhs: Probability,
    /// `|B| / |A|`, the exact form of `e^{S(B) − S(A)}`.
    pub rhs: Probability,
    pub equal: bool,
    pub mechanically_reversible: bool,
}

/// Evaluate both sides of the counting detailed-balance identity.
pub fn check_detailed_balance_identity(
    sys: &FiniteDynamicalSystem,
    a: &Macrostate,
    b: &Macrostate,
    t: u32,
) -> Result<DetailedBalanceIdentity> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::UndefinedConditional("empty macrostate".into()));
    }
    let t = i64::from(t);
    let forward = macro_transition_probability(sys, a, b, t)?;
    let pa = a.image(sys.involution());
    let pb = b.image(sys.involution());
    let backward = macro_transition_probability(sys, &pb, &pa, t)?;
    if backward == Ratio::from_integer(0) {
        return Err(Error::UndefinedConditional("Prob[πA | πB] = 0".into()));
    }
    let lhs = forward / backward;
    let rhs = Ratio::new(b.len() as u64, a.len() as u64);
    let mechanically_reversible = check_mechanical_reversibility(sys, t as u32).holds;
    Ok(DetailedBalanceIdentity {
        lhs,
        rhs,
        equal: lhs == rhs,
        mechanically_reversible,
    })
}
