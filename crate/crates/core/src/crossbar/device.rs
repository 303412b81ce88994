//! Conductance non-idealities and readout quantization.
//!
//! Each cell is programmed to the high (`g_on`) or low (`g_off`) conductance
//! state and lands at `N(target, g_sigma^2)`, clipped at zero. A row driven by
//! the `N` active input columns carries
//! `I = V * sum_c g_rc * drive_c`, roughly `V * (N g_off + t (g_on - g_off))`
//! for `t` true literals. The readout maps `I` back to an integer with
//! equidistant thresholds `base + (t + 1/2) (g_on - g_off) V`; the offset
//! `base` is swept per clause-arity class to minimise the error on random
//! calibration inputs.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::program::{input_vector, CrossbarProgram};
use crate::formula::Assignment;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("device model requires g_on > g_off >= 0")]
    ConductanceOrder,
    #[error("g_sigma must be finite and non-negative")]
    Spread,
    #[error("verify window must be finite and positive")]
    Window,
    #[error("read voltage must be positive")]
    Voltage,
    #[error("device model file")]
    Parse(#[from] toml::de::Error),
    #[error("i/o")]
    Io(#[from] std::io::Error),
}

/// How quantization thresholds are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Offset swept on calibration inputs for every arity class.
    #[default]
    Optimized,
    /// Offset fixed at the nominal `N g_off V`.
    Nominal,
}

/// Re-programming attempts before a cell is assumed to hit its target.
const MAX_PROGRAM_ATTEMPTS: usize = 64;

fn default_voltage() -> f64 {
    1.0
}

fn default_calibration_inputs() -> usize {
    400
}

fn default_offset_steps() -> usize {
    1001
}

/// Device parameters, readable from a TOML file:
///
/// ```toml
/// g_on_us = 100.0
/// g_off_us = 1.0
/// g_sigma_us = 10.0
/// read_voltage = 1.0        # optional
/// thresholds = "optimized"  # or "nominal"
/// calibration_inputs = 400  # optional
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Scalar"))]
pub struct DeviceModel<F> {
    pub g_on_us: F,
    pub g_off_us: F,
    pub g_sigma_us: F,
    #[serde(default = "voltage_default")]
    pub read_voltage: F,
    #[serde(default)]
    pub thresholds: ThresholdMode,
    #[serde(default = "default_calibration_inputs")]
    pub calibration_inputs: usize,
    #[serde(default = "default_offset_steps")]
    pub offset_steps: usize,
    /// Program-and-verify window: cells are re-programmed until they land
    /// within `target ± window`. Unbounded when absent.
    #[serde(default)]
    pub verify_window_us: Option<F>,
}

fn voltage_default<F: Scalar>() -> F {
    F::of(default_voltage())
}

impl<F: Scalar> DeviceModel<F> {
    pub fn new(g_on_us: F, g_off_us: F, g_sigma_us: F) -> Result<Self, DeviceError> {
        let d = DeviceModel {
            g_on_us,
            g_off_us,
            g_sigma_us,
            read_voltage: F::one(),
            thresholds: ThresholdMode::Optimized,
            calibration_inputs: default_calibration_inputs(),
            offset_steps: default_offset_steps(),
            verify_window_us: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// 100 uS / 1 uS states with a 10 uS programming spread.
    pub fn taox_default() -> Self {
        Self::new(F::of(100.0), F::of(1.0), F::of(10.0)).expect("valid defaults")
    }

    // negated comparisons so that NaN fields are rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), DeviceError> {
        if !(self.g_on_us > self.g_off_us && self.g_off_us >= F::zero()) {
            return Err(DeviceError::ConductanceOrder);
        }
        if !self.g_sigma_us.is_finite() || self.g_sigma_us < F::zero() {
            return Err(DeviceError::Spread);
        }
        if let Some(w) = self.verify_window_us {
            if !(w > F::zero()) || !w.is_finite() {
                return Err(DeviceError::Window);
            }
        }
        if !(self.read_voltage > F::zero()) {
            return Err(DeviceError::Voltage);
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DeviceError> {
        let d: Self = toml::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self, DeviceError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Current step between consecutive ideal levels.
    pub fn level_step(&self) -> F {
        (self.g_on_us - self.g_off_us) * self.read_voltage
    }

    /// Samples one programmed conductance.
    pub fn sample_cell<R: Rng + ?Sized>(&self, on: bool, rng: &mut R) -> F {
        let target = if on { self.g_on_us } else { self.g_off_us };
        if self.g_sigma_us == F::zero() {
            return target;
        }
        let draw =
            |rng: &mut R| (target + self.g_sigma_us * F::standard_normal(rng)).max(F::zero());
        match self.verify_window_us {
            None => draw(rng),
            Some(w) => {
                for _ in 0..MAX_PROGRAM_ATTEMPTS {
                    let g = draw(rng);
                    if (g - target).abs() <= w {
                        return g;
                    }
                }
                target
            }
        }
    }
}

/// Thresholds per clause-arity class. For arity `k` there are `k` strictly
/// increasing thresholds separating levels `0..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer<F> {
    levels: BTreeMap<usize, Vec<F>>,
}

impl<F: Scalar> Quantizer<F> {
    pub fn thresholds(&self, arity: usize) -> &[F] {
        self.levels.get(&arity).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Integer estimate: number of thresholds below `current`.
    pub fn quantize(&self, current: F, arity: usize) -> u32 {
        self.thresholds(arity)
            .iter()
            .take_while(|&&t| current > t)
            .count() as u32
    }

    fn equidistant(base: F, step: F, arity: usize) -> Vec<F> {
        (0..arity)
            .map(|t| base + (F::of_count(t as i64) + F::of(0.5)) * step)
            .collect()
    }
}

/// Misread samples for each candidate base offset. A sample `(current,
/// count)` reads correctly iff the base lies in
/// `[current - (count + 1/2) step, current - (count - 1/2) step)`, with the
/// outer ends open for counts `0` and `arity`; errors are the samples whose
/// interval misses the base.
fn offset_errors<F: Scalar>(data: &[(F, u32)], step: F, arity: usize, grid: &[F]) -> Vec<usize> {
    let half = F::of(0.5);
    let mut lower = Vec::with_capacity(data.len());
    let mut upper = Vec::with_capacity(data.len());
    for &(i, t) in data {
        let t_f = F::of_count(i64::from(t));
        lower.push(if t as usize >= arity {
            F::neg_infinity()
        } else {
            i - (t_f + half) * step
        });
        upper.push(if t == 0 {
            F::infinity()
        } else {
            i - (t_f - half) * step
        });
    }
    let by = |a: &F, b: &F| a.partial_cmp(b).expect("finite currents");
    lower.sort_unstable_by(by);
    upper.sort_unstable_by(by);
    grid.iter()
        .map(|&b| {
            let opened = lower.partition_point(|&l| l <= b);
            let closed = upper.partition_point(|&u| u <= b);
            data.len() - (opened - closed)
        })
        .collect()
}

/// Programmed conductances of the clause array and of the make/break array,
/// plus the calibrated quantizer of the clause array.
#[derive(Debug, Clone)]
pub struct AnalogCrossbar<F> {
    clause_g: Vec<F>,
    makebreak_g: Vec<F>,
    cols: usize,
    read_voltage: F,
    level_step: F,
    quantizer: Quantizer<F>,
}

impl<F: Scalar> AnalogCrossbar<F> {
    /// Samples both arrays and calibrates the readout thresholds on
    /// `d.calibration_inputs` random assignments drawn from `rng`.
    pub fn program<R: Rng + ?Sized>(p: &CrossbarProgram, d: &DeviceModel<F>, rng: &mut R) -> Self {
        let cols = p.cols();
        let sample_array = |rng: &mut R| -> Vec<F> {
            let mut g = Vec::with_capacity(p.rows() * cols);
            for r in 0..p.rows() {
                for c in 0..cols {
                    g.push(d.sample_cell(p.cell(r, c), rng));
                }
            }
            g
        };
        let clause_g = sample_array(rng);
        let makebreak_g = sample_array(rng);
        let mut xb = AnalogCrossbar {
            clause_g,
            makebreak_g,
            cols,
            read_voltage: d.read_voltage,
            level_step: d.level_step(),
            quantizer: Quantizer {
                levels: BTreeMap::new(),
            },
        };
        xb.quantizer = xb.calibrate(p, d, rng);
        xb
    }

    pub fn quantizer(&self) -> &Quantizer<F> {
        &self.quantizer
    }

    pub fn clause_conductance(&self, row: usize, col: usize) -> F {
        self.clause_g[row * self.cols + col]
    }

    fn calibrate<R: Rng + ?Sized>(
        &self,
        p: &CrossbarProgram,
        d: &DeviceModel<F>,
        rng: &mut R,
    ) -> Quantizer<F> {
        let step = d.level_step();
        let nominal = F::of_count(p.num_vars() as i64) * d.g_off_us * d.read_voltage;
        let mut by_arity: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for r in 0..p.rows() {
            by_arity.entry(p.arity(r)).or_default().push(r);
        }
        let mut levels = BTreeMap::new();
        if d.thresholds == ThresholdMode::Nominal || p.rows() == 0 {
            for &k in by_arity.keys() {
                levels.insert(k, Quantizer::equidistant(nominal, step, k));
            }
            return Quantizer { levels };
        }

        // (arity, current, ideal count) samples
        let mut samples: BTreeMap<usize, Vec<(F, u32)>> = BTreeMap::new();
        for _ in 0..d.calibration_inputs.max(1) {
            let a = Assignment::random(p.num_vars(), rng);
            let drive = input_vector(&a);
            for (&k, rows) in &by_arity {
                let bucket = samples.entry(k).or_default();
                for &r in rows {
                    let count = p
                        .row_columns(r)
                        .iter()
                        .filter(|&&c| drive[c as usize])
                        .count() as u32;
                    bucket.push((self.row_current(r, &drive), count));
                }
            }
        }

        for (k, data) in samples {
            // base is correct for a sample iff residual - step/2 <= base < residual + step/2
            let residuals: Vec<F> = data
                .iter()
                .map(|&(i, t)| i - F::of_count(i64::from(t)) * step)
                .collect();
            let lo = residuals.iter().copied().fold(F::infinity(), F::min) - step;
            let hi = residuals.iter().copied().fold(F::neg_infinity(), F::max) + step;
            let n = d.offset_steps.max(2);
            let grid: Vec<F> = (0..n)
                .map(|i| lo + (hi - lo) * F::of(i as f64 / (n - 1) as f64))
                .collect();
            let errors = offset_errors(&data, step, k, &grid);
            let best = *errors.iter().min().unwrap();
            // centre of the longest run of optimal offsets
            let (mut run_start, mut best_run) = (None, (0usize, 0usize));
            for (i, &e) in errors
                .iter()
                .enumerate()
                .chain(std::iter::once((n, &usize::MAX)))
            {
                match (e == best, run_start) {
                    (true, None) => run_start = Some(i),
                    (false, Some(s)) => {
                        if i - s > best_run.1 - best_run.0 {
                            best_run = (s, i);
                        }
                        run_start = None;
                    }
                    _ => {}
                }
            }
            let base = (grid[best_run.0] + grid[best_run.1 - 1]) * F::of(0.5);
            levels.insert(k, Quantizer::equidistant(base, step, k));
        }
        Quantizer { levels }
    }

    /// Analog current of one clause-array row.
    pub fn row_current(&self, row: usize, drive: &[bool]) -> F {
        let g = &self.clause_g[row * self.cols..(row + 1) * self.cols];
        let mut sum = F::zero();
        for (gc, &on) in g.iter().zip(drive) {
            if on {
                sum = sum + *gc;
            }
        }
        sum * self.read_voltage
    }

    /// Quantized true-literal estimate of every row.
    pub fn row_counts(&self, p: &CrossbarProgram, drive: &[bool]) -> Vec<u32> {
        (0..p.rows())
            .map(|r| {
                self.quantizer
                    .quantize(self.row_current(r, drive), p.arity(r))
            })
            .collect()
    }

    /// Current collected on `col` of the make/break array when `rows` are
    /// driven.
    pub(crate) fn column_current(&self, col: usize, row_drive: &[bool]) -> F {
        let mut sum = F::zero();
        for (r, &on) in row_drive.iter().enumerate() {
            if on {
                sum = sum + self.makebreak_g[r * self.cols + col];
            }
        }
        sum * self.read_voltage
    }

    /// Converts a current into units of one ideal level.
    pub(crate) fn in_levels(&self, current: F) -> F {
        current / self.level_step
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossbar::program::program_crossbar;
    use crate::formula::{ClauseKind, Formula, Literal};
    use crate::walksat::solver_rng;

    #[test]
    fn interval_count_matches_quantizer() {
        let mut rng = solver_rng(3);
        for arity in 1..=5usize {
            let step = 99.0f64;
            let data: Vec<(f64, u32)> = (0..300)
                .map(|_| {
                    let t = rng.random_range(0..=arity as u32);
                    (f64::from(t) * step + rng.random_range(-80.0..120.0), t)
                })
                .collect();
            let grid: Vec<f64> = (0..200).map(|i| -150.0 + 1.7 * f64::from(i)).collect();
            let brute: Vec<usize> = grid
                .iter()
                .map(|&base| {
                    let q = Quantizer {
                        levels: BTreeMap::from([(
                            arity,
                            Quantizer::equidistant(base, step, arity),
                        )]),
                    };
                    data.iter()
                        .filter(|&&(i, t)| q.quantize(i, arity) != t)
                        .count()
                })
                .collect();
            assert_eq!(
                offset_errors(&data, step, arity, &grid),
                brute,
                "arity {arity}"
            );
        }
    }

    #[test]
    fn model_validation() {
        assert!(DeviceModel::new(1.0f64, 100.0, 10.0).is_err());
        assert!(DeviceModel::new(100.0f64, -1.0, 10.0).is_err());
        assert!(DeviceModel::new(100.0f64, 1.0, -1.0).is_err());
        let d = DeviceModel::<f64>::taox_default();
        assert_eq!(d.level_step(), 99.0);
    }

    #[test]
    fn model_from_toml() {
        let d = DeviceModel::<f64>::from_toml_str(
            "g_on_us = 100.0\ng_off_us = 1.0\ng_sigma_us = 10.0\nthresholds = \"nominal\"\n",
        )
        .unwrap();
        assert_eq!(d.thresholds, ThresholdMode::Nominal);
        assert_eq!(d.read_voltage, 1.0);
        assert_eq!(d.calibration_inputs, 400);
        assert!(DeviceModel::<f64>::from_toml_str("g_on_us = 1.0\n").is_err());
    }

    #[test]
    fn thresholds_strictly_increase() {
        let f = Formula::from_raw(
            3,
            vec![
                (
                    ClauseKind::Cnf,
                    vec![Literal::pos(0), Literal::neg(1), Literal::pos(2)],
                ),
                (ClauseKind::Xor, vec![Literal::pos(1), Literal::pos(2)]),
            ],
        )
        .unwrap();
        let p = program_crossbar(&f);
        let d = DeviceModel::<f64>::taox_default();
        let xb = AnalogCrossbar::program(&p, &d, &mut solver_rng(1));
        for k in [2, 3] {
            let th = xb.quantizer().thresholds(k);
            assert_eq!(th.len(), k);
            assert!(th.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn zero_spread_nominal_is_exact() {
        let f = Formula::from_raw(
            4,
            vec![(
                ClauseKind::Cnf,
                vec![Literal::pos(0), Literal::neg(1), Literal::pos(3)],
            )],
        )
        .unwrap();
        let p = program_crossbar(&f);
        let mut d = DeviceModel::new(100.0f64, 1.0, 0.0).unwrap();
        d.thresholds = ThresholdMode::Nominal;
        let xb = AnalogCrossbar::program(&p, &d, &mut solver_rng(2));
        for w in 0..16u64 {
            let a = Assignment::from_bits(w, 4);
            let want = f.clause(0).true_literal_count(&a).unwrap() as u32;
            assert_eq!(xb.row_counts(&p, &input_vector(&a)), vec![want]);
        }
    }
}
