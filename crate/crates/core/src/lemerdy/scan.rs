//! Boundedness constants of `T_N` over a ladder of dimensions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::instance::{build_instance, LeMerdyInstance};
use super::measures::{
    poly_bound_structured, power_bound_sampled, projection_norms, stein_cond_structured, tadmor_ritt_structured,
    unconditional_constant,
};
use super::sequence::{make_sequence, LambdaFamily, SequenceKind};
use crate::error::{OplabError, Result};
use crate::operator::bounds::default_tr_radii;

/// Budgets for one scan row. Every entry is a lower estimate except
/// `lyap_cond`, which is the condition number of one particular witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    /// Powers up to `power_horizon_factor · N`.
    pub power_horizon_factor: usize,
    pub tr_radii: Vec<f64>,
    pub tr_angles: usize,
    pub poly_degree: usize,
    pub poly_trials: usize,
    pub uncond_samples: usize,
    pub uncond_flips: usize,
    /// The Stein witness is only computed up to this dimension.
    pub lyap_max_dim: usize,
    pub seed: u64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            power_horizon_factor: 4,
            tr_radii: default_tr_radii(),
            tr_angles: 256,
            poly_degree: 6,
            poly_trials: 2,
            uncond_samples: 64,
            uncond_flips: 64,
            lyap_max_dim: 1024,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    pub proj_max: f64,
    pub power_bound: f64,
    pub tadmor_ritt: f64,
    pub poly_lower: f64,
    pub uncond_lower: f64,
    /// `None` when `N` is above `lyap_max_dim`.
    pub lyap_cond: Option<f64>,
}

pub const TREND_REL_TOL: f64 = 1e-9;

pub const COLUMNS: [&str; 7] = ["N", "proj_max", "power_bound", "tadmor_ritt", "poly_lower", "uncond_lower", "lyap_cond"];

impl ScanRow {
    fn values(&self) -> [Option<f64>; 6] {
        [
            Some(self.proj_max),
            Some(self.power_bound),
            Some(self.tadmor_ritt),
            Some(self.poly_lower),
            Some(self.uncond_lower),
            self.lyap_cond,
        ]
    }
}

/// Growth summary of one column across the scanned sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnTrend {
    pub column: String,
    /// `max / min`; `None` if any entry is missing.
    pub ratio: Option<f64>,
    /// Every step grows by more than `TREND_REL_TOL` relative; smaller
    /// differences are rounding in the norm estimates.
    pub strictly_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub sequence: SequenceKind,
    pub lambdas: LambdaFamily,
    pub settings: ScanSettings,
    pub rows: Vec<ScanRow>,
    pub trends: Vec<ColumnTrend>,
}

impl ScanReport {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = COLUMNS[1..].iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r.values()[idx]).collect())
    }

    pub fn trend(&self, name: &str) -> Option<&ColumnTrend> {
        self.trends.iter().find(|t| t.column == name)
    }

    /// Missing values are written as `NaN`; numbers with 17 significant
    /// digits.
    pub fn to_csv(&self) -> String {
        let mut out = COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            write!(out, "{}", r.n).unwrap();
            for v in r.values() {
                match v {
                    Some(x) => write!(out, ",{x:.16e}").unwrap(),
                    None => out.push_str(",NaN"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }
}

fn trends(rows: &[ScanRow]) -> Vec<ColumnTrend> {
    COLUMNS[1..]
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let col: Vec<Option<f64>> = rows.iter().map(|r| r.values()[i]).collect();
            let vals: Option<Vec<f64>> = col.iter().copied().collect();
            let (ratio, strictly_increasing) = match vals {
                Some(v) if !v.is_empty() => {
                    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                    (Some(max / min), v.windows(2).all(|w| w[1] > w[0] * (1.0 + TREND_REL_TOL)))
                }
                _ => (None, false),
            };
            ColumnTrend { column: name.to_string(), ratio, strictly_increasing }
        })
        .collect()
}

fn lyap_cond(inst: &LeMerdyInstance, max_dim: usize) -> Result<Option<f64>> {
    if inst.n > max_dim {
        return Ok(None);
    }
    stein_cond_structured(inst).map(Some)
}

pub fn scan_row(inst: &LeMerdyInstance, settings: &ScanSettings) -> Result<ScanRow> {
    let proj_max = projection_norms(inst).into_iter().fold(0.0, f64::max);
    let power = power_bound_sampled(inst, settings.power_horizon_factor * inst.n);
    let tr = tadmor_ritt_structured(inst, &settings.tr_radii, settings.tr_angles)?;
    let poly = poly_bound_structured(inst, settings.poly_degree, settings.poly_trials, settings.seed)?;
    let uncond = unconditional_constant(inst, settings.uncond_samples, settings.seed, settings.uncond_flips)?;
    Ok(ScanRow {
        n: inst.n,
        proj_max,
        power_bound: power.value,
        tadmor_ritt: tr.value,
        poly_lower: poly.value,
        uncond_lower: uncond.value,
        lyap_cond: lyap_cond(inst, settings.lyap_max_dim)?,
    })
}

/// One row per size; rows are computed on up to `workers` threads and
/// returned in the order of `sizes`.
pub fn counterexample_scan(
    sizes: &[usize],
    sequence: &SequenceKind,
    lambdas: LambdaFamily,
    settings: &ScanSettings,
    workers: usize,
) -> Result<ScanReport> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.iter().any(|n| n % 2 != 0 || *n < 2) {
        return Err(OplabError::Precondition("sizes must be ascending, even and at least 2".into()));
    }
    let largest = *sizes.last().unwrap();
    let seq = make_sequence(sequence, largest)?;
    let gaps = lambdas.gaps(largest);
    let row = |n: usize| -> Result<ScanRow> { scan_row(&build_instance(&seq, &gaps, n)?, settings) };
    let workers = workers.clamp(1, sizes.len());
    let rows: Vec<Result<ScanRow>> = if workers == 1 {
        sizes.iter().map(|&n| row(n)).collect()
    } else {
        let mut slots: Vec<Option<Result<ScanRow>>> = vec![None; sizes.len()];
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let row = &row;
                    s.spawn(move || {
                        (w..sizes.len()).step_by(workers).map(|i| (i, row(sizes[i]))).collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("scan worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        slots.into_iter().map(|r| r.expect("every row assigned")).collect()
    };
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScanReport { sequence: sequence.clone(), lambdas, settings: settings.clone(), trends: trends(&rows), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScanSettings {
        ScanSettings { tr_angles: 32, poly_degree: 3, poly_trials: 1, uncond_samples: 4, uncond_flips: 4, ..Default::default() }
    }

    #[test]
    fn uncoupled_scan_has_diagonal_values() {
        let r = counterexample_scan(&[8, 16], &SequenceKind::Custom(vec![]), LambdaFamily::Geometric, &quick(), 1).unwrap();
        for row in &r.rows {
            assert_eq!(row.proj_max, 1.0);
            assert_eq!(row.uncond_lower, 1.0);
            assert_eq!(row.power_bound, 1.0);
            assert!(row.tadmor_ritt.is_finite() && row.tadmor_ritt >= 1.0);
        }
    }

    #[test]
    fn parallel_rows_are_identical() {
        let sizes = [8, 16, 32];
        let a = counterexample_scan(&sizes, &SequenceKind::LogHarmonic, LambdaFamily::InverseSquare, &quick(), 1).unwrap();
        let b = counterexample_scan(&sizes, &SequenceKind::LogHarmonic, LambdaFamily::InverseSquare, &quick(), 3).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv().lines().count(), 4);
        assert!(a.rows.iter().all(|r| r.lyap_cond.is_some()));
    }

    #[test]
    fn csv_layout() {
        let r = counterexample_scan(&[64], &SequenceKind::Geometric, LambdaFamily::Geometric, &quick(), 1).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0], "64");
        assert!(fields[6].parse::<f64>().unwrap() > 1.0);
        let capped = ScanSettings { lyap_max_dim: 32, ..quick() };
        let r = counterexample_scan(&[64], &SequenceKind::Geometric, LambdaFamily::Geometric, &capped, 1).unwrap();
        assert!(r.to_csv().trim_end().ends_with(",NaN"));
        assert!(fields[1].contains('e') && fields[1].split('e').next().unwrap().len() == 18);
    }

    #[test]
    fn rejects_bad_sizes() {
        for sizes in [&[][..], &[16, 8][..], &[7][..]] {
            assert!(counterexample_scan(sizes, &SequenceKind::Geometric, LambdaFamily::Geometric, &quick(), 1).is_err());
        }
    }
}
