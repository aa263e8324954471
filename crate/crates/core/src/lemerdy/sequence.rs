//! Coefficient sequences `a_n` for the basis perturbation and the eigenvalue
//! families, the latter stored through their gaps `g_n = 1 − λ_n`.

use serde::{Deserialize, Serialize};

use crate::error::{OplabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// `a_n = 1/((n+2) ln(n+2))`: `Σ n a_n²` converges, `Σ a_n` diverges.
    LogHarmonic,
    /// `a_n = 2^{−n}`.
    Geometric,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffSequence {
    pub kind: SequenceKind,
    pub a: Vec<f64>,
    /// `partial_sums[n] = Σ_{k ≤ n} a_k`.
    pub partial_sums: Vec<f64>,
    /// `weighted_square_sums[n] = Σ_{k ≤ n} k a_k²`.
    pub weighted_square_sums: Vec<f64>,
}

impl CoeffSequence {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0.0)
    }

    pub fn custom(a: Vec<f64>) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(OplabError::Invariant("coefficients must be finite".into()));
        }
        Ok(Self::from_values(SequenceKind::Custom(a.clone()), a))
    }

    fn from_values(kind: SequenceKind, a: Vec<f64>) -> Self {
        let mut partial_sums = Vec::with_capacity(a.len());
        let mut weighted_square_sums = Vec::with_capacity(a.len());
        let (mut s, mut w) = (0.0, 0.0);
        for (k, &x) in a.iter().enumerate() {
            s += x;
            w += k as f64 * x * x;
            partial_sums.push(s);
            weighted_square_sums.push(w);
        }
        CoeffSequence { kind, a, partial_sums, weighted_square_sums }
    }
}

pub fn make_sequence(kind: &SequenceKind, n: usize) -> Result<CoeffSequence> {
    if n < 2 {
        return Err(OplabError::Precondition(format!("sequence length {n} below 2")));
    }
    let a = match kind {
        SequenceKind::LogHarmonic => (0..n)
            .map(|k| {
                let x = (k + 2) as f64;
                1.0 / (x * x.ln())
            })
            .collect(),
        SequenceKind::Geometric => (0..n).map(|k| 0.5f64.powi(k as i32)).collect(),
        SequenceKind::Custom(values) => {
            if values.iter().any(|x| !x.is_finite()) {
                return Err(OplabError::Invariant("coefficients must be finite".into()));
            }
            let mut v = values.clone();
            v.resize(n, 0.0);
            v
        }
    };
    Ok(CoeffSequence::from_values(kind.clone(), a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaFamily {
    /// `λ_n = 1 − 2^{−(n+1)}`, a Carleson sequence.
    Geometric,
    /// `λ_n = 1 − 1/(n+2)²`, not Carleson.
    InverseSquare,
}

impl LambdaFamily {
    pub fn gaps(self, n: usize) -> Vec<f64> {
        match self {
            LambdaFamily::Geometric => (0..n).map(|k| 0.5f64.powi(k as i32 + 1)).collect(),
            LambdaFamily::InverseSquare => (0..n).map(|k| 1.0 / ((k + 2) as f64).powi(2)).collect(),
        }
    }
}

/// Checks `g_n ∈ (0, 1)` strictly decreasing, i.e. `λ_n` strictly increasing
/// in `(0, 1)`.
pub fn check_gaps(gaps: &[f64]) -> Result<()> {
    if let Some(g) = gaps.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
        return Err(OplabError::Invariant(format!("gap {g:e} puts λ outside (0, 1)")));
    }
    if let Some(k) = (1..gaps.len()).find(|&k| !(gaps[k] < gaps[k - 1])) {
        return Err(OplabError::Invariant(format!("λ is not strictly increasing at index {k}")));
    }
    Ok(())
}
