//! Spin observables and their decomposition into measurement conditions.
//!
//! Basis convention: `|↑⟩` is index 0, `|↓⟩` is index 1, and site 1 is the
//! leftmost (most significant) tensor factor, so `|↑↓⟩` is basis index 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    eigendecompose, kron_all, max_abs, max_abs_diff, AntiunitaryInvolution, CMatrix,
    HermitianOperator, INVARIANT_TOL,
};

/// Default gap below which eigenvalues are treated as degenerate.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Largest number of spins accepted by the builders (`d = 2^10`).
pub const MAX_SITES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::DimensionCap {
            sites,
            max: MAX_SITES,
        });
    }
    Ok(())
}

/// Pauli matrix on site `site` (1-based) and identity elsewhere.
pub fn site_operator(sites: usize, site: usize, which: Pauli) -> Result<HermitianOperator> {
    check_sites(sites)?;
    if site == 0 || site > sites {
        return Err(Error::SiteOutOfRange { site, sites });
    }
    let factors: Vec<CMatrix> = (1..=sites)
        .map(|k| {
            if k == site {
                which.matrix()
            } else {
                CMatrix::identity(2, 2)
            }
        })
        .collect();
    HermitianOperator::new(kron_all(&factors))
}

/// Mean magnetization `m_z = (1/N) Σ σ^z_i`.
pub fn magnetization(sites: usize) -> Result<HermitianOperator> {
    check_sites(sites)?;
    let d = 1usize << sites;
    let n = sites as f64;
    let diag = DVector::from_fn(d, |index, _| {
        // Bit value 0 is spin up.
        let up = sites - (index.count_ones() as usize);
        (2.0 * up as f64 - n) / n
    });
    HermitianOperator::from_real(&DMatrix::from_diagonal(&diag))
}

/// Canonical label for an eigenvalue: 10 significant digits, shortest form.
pub fn condition_label(value: f64) -> String {
    if value.abs() < 1e-10 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{value:.9e}")
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

/// One measurement outcome `α`: eigenvalue cluster, projector and dimension.
#[derive(Debug, Clone)]
pub struct Condition {
    pub label: String,
    pub eigenvalue: f64,
    pub projector: CMatrix,
    pub dim: usize,
}

/// A projective measurement: the spectral projectors of an observable.
#[derive(Debug, Clone)]
pub struct ObservableDecomposition {
    conditions: Vec<Condition>,
    dim: usize,
}

impl ObservableDecomposition {
    /// Decompose `a` into one condition per eigenvalue cluster.
    pub fn new(a: &HermitianOperator, cluster_tol: f64) -> Result<Self> {
        let clusters = eigendecompose(a, cluster_tol)?;
        let conditions = clusters
            .iter()
            .map(|c| Condition {
                label: condition_label(c.eigenvalue),
                eigenvalue: c.eigenvalue,
                projector: c.projector(),
                dim: c.dim(),
            })
            .collect();
        let obs = Self {
            conditions,
            dim: a.dim(),
        };
        obs.validate()?;
        Ok(obs)
    }

    pub fn with_default_tol(a: &HermitianOperator) -> Result<Self> {
        Self::new(a, DEFAULT_CLUSTER_TOL)
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim;
        let mut seen = std::collections::HashSet::new();
        let mut total = CMatrix::zeros(d, d);
        for (k, c) in self.conditions.iter().enumerate() {
            if !seen.insert(c.label.as_str()) {
                return Err(Error::InvalidSchedule(format!(
                    "distinct eigenvalues share the label {}; decrease the cluster tolerance",
                    c.label
                )));
            }
            let p = &c.projector;
            let idempotence = max_abs_diff(&(p * p), p);
            let hermiticity = max_abs_diff(p, &p.adjoint());
            let trace = p.trace().re;
            if idempotence > INVARIANT_TOL
                || hermiticity > INVARIANT_TOL
                || (trace - c.dim as f64).abs() > 1e-8
            {
                return Err(Error::NotHermitian {
                    max_asymmetry: idempotence.max(hermiticity),
                });
            }
            for other in &self.conditions[k + 1..] {
                let overlap = max_abs(&(p * &other.projector));
                if overlap > INVARIANT_TOL {
                    return Err(Error::InvalidSchedule(format!(
                        "projectors {} and {} overlap ({overlap:e})",
                        c.label, other.label
                    )));
                }
            }
            total += p;
        }
        let completeness = max_abs_diff(&total, &CMatrix::identity(d, d));
        if completeness > INVARIANT_TOL {
            return Err(Error::InvalidSchedule(format!(
                "projectors do not sum to the identity ({completeness:e})"
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.conditions.iter().map(|c| c.label.as_str())
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.conditions.iter().position(|c| c.label == label)
    }

    pub fn condition(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }

    /// True when both decompositions have the same labels and projectors.
    pub fn same_as(&self, other: &ObservableDecomposition, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self.conditions.iter().all(|c| {
                other
                    .condition(&c.label)
                    .is_some_and(|o| max_abs_diff(&c.projector, &o.projector) <= tol)
            })
    }
}

/// The involutive map `α ↦ α′` induced by `π P_α π = P_α′`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReversalMap {
    labels: Vec<String>,
    image: Vec<usize>,
}

impl ConditionReversalMap {
    /// The identity map on the given labels.
    pub fn identity<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let image = (0..labels.len()).collect();
        Self { labels, image }
    }

    /// Build from explicit pairs; `pairs` must describe an involution.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let labels: Vec<String> = pairs.iter().map(|(a, _)| a.clone()).collect();
        let mut image = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let target = labels
                .iter()
                .position(|l| l == b)
                .ok_or_else(|| Error::PiNotCovariant { label: a.clone() })?;
            image.push(target);
        }
        let map = Self { labels, image };
        for (k, &j) in map.image.iter().enumerate() {
            if map.image[j] != k {
                return Err(Error::PiNotCovariant {
                    label: map.labels[k].clone(),
                });
            }
        }
        Ok(map)
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        let k = self.labels.iter().position(|l| l == label)?;
        Some(self.labels[self.image[k]].as_str())
    }

    /// Index form: condition `k` maps to condition `image()[k]`.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(k, &j)| k == j)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.labels
            .iter()
            .zip(&self.image)
            .map(|(l, &j)| (l.as_str(), self.labels[j].as_str()))
    }

    pub fn compose(&self, other: &ConditionReversalMap) -> ConditionReversalMap {
        let image = self.image.iter().map(|&j| other.image[j]).collect();
        Self {
            labels: self.labels.clone(),
            image,
        }
    }
}

/// Match each `π P_α π` to a projector of the same observable.
pub fn reverse_conditions(
    pi: &AntiunitaryInvolution,
    obs: &ObservableDecomposition,
    tol: f64,
) -> Result<ConditionReversalMap> {
    if pi.dim() != obs.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.dim(),
            found: pi.dim(),
        });
    }
    let mut image = Vec::with_capacity(obs.len());
    for c in obs.conditions() {
        let reversed = pi.conjugate_operator(&c.projector)?;
        let target = obs
            .conditions()
            .iter()
            .position(|o| max_abs_diff(&reversed, &o.projector) <= tol)
            .ok_or_else(|| Error::PiNotCovariant {
                label: c.label.clone(),
            })?;
        image.push(target);
    }
    let labels = obs.labels().map(str::to_string).collect();
    let map = ConditionReversalMap { labels, image };
    for (k, &j) in map.image.iter().enumerate() {
        if map.image[j] != k {
            return Err(Error::PiNotCovariant {
                label: map.labels[k].clone(),
            });
        }
    }
    Ok(map)
}
