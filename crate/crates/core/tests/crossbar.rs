mod common;

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use xnfsat_core::crossbar::{
    input_vector, program_crossbar, readout_error_rate, AnalogCrossbar, DeviceModel, Emulator,
    Readout, ThresholdMode,
};
use xnfsat_core::dimacs::parse_dimacs_file;
use xnfsat_core::energy::EnergyCoefficients;
use xnfsat_core::walksat::SolverParams;
use xnfsat_core::{Assignment, Formula};

fn workload() -> Formula {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
    common::random_formula(&mut rng, 12, 42, 5)
}

fn mean_error(f: &Formula, d: &DeviceModel<f64>, devices: u64, inputs: usize) -> f64 {
    let p = program_crossbar(f);
    let total: f64 = (0..devices)
        .map(|s| {
            let xb = AnalogCrossbar::program(&p, d, &mut Xoshiro256PlusPlus::seed_from_u64(s));
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(1000 + s);
            readout_error_rate(&p, &Readout::Analog(xb), inputs, &mut rng)
        })
        .sum();
    total / devices as f64
}

#[test]
fn error_rate_matches_clause_recount() {
    let f = workload();
    let p = program_crossbar(&f);
    let d = DeviceModel::<f64>::taox_default();
    let xb = AnalogCrossbar::program(&p, &d, &mut Xoshiro256PlusPlus::seed_from_u64(9));
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(10);
    let mut wrong = 0;
    for _ in 0..300 {
        let a = Assignment::random(f.num_vars(), &mut rng);
        let read = xb.row_counts(&p, &input_vector(&a));
        for (c, &r) in f.clauses().iter().zip(&read) {
            wrong += usize::from(c.true_literal_count(&a).unwrap() as u32 != r);
        }
    }
    let oracle = wrong as f64 / (300 * f.num_clauses()) as f64;
    let lib = readout_error_rate(
        &p,
        &Readout::Analog(xb),
        300,
        &mut Xoshiro256PlusPlus::seed_from_u64(10),
    );
    assert_eq!(lib, oracle);
}

#[test]
fn misclassification_grows_with_spread() {
    let f = workload();
    let mut last = -1.0;
    for sigma in [0.0, 5.0, 10.0, 20.0, 40.0] {
        let d = DeviceModel::new(100.0, 1.0, sigma).unwrap();
        let e = mean_error(&f, &d, 10, 200);
        if sigma == 0.0 {
            assert_eq!(e, 0.0);
        }
        // statistical slack of half a percentage point
        assert!(e + 0.005 >= last, "sigma {sigma}: {e} after {last}");
        last = e;
    }
    assert!(last > 0.05);
}

#[test]
fn verify_window_reduces_error() {
    let f = workload();
    let open = DeviceModel::taox_default();
    let mut tight = open.clone();
    tight.verify_window_us = Some(10.0);
    let e_open = mean_error(&f, &open, 8, 200);
    let e_tight = mean_error(&f, &tight, 8, 200);
    assert!(e_tight < e_open, "{e_tight} vs {e_open}");
    assert!(e_tight < 0.005);
}

#[test]
fn optimized_thresholds_beat_nominal() {
    let f = workload();
    let opt = DeviceModel::taox_default();
    let mut nominal = opt.clone();
    nominal.thresholds = ThresholdMode::Nominal;
    assert!(mean_error(&f, &opt, 8, 200) <= mean_error(&f, &nominal, 8, 200));
}

#[test]
fn nonideal_emulator_only_reports_real_solutions() {
    let (f, _) = parse_dimacs_file(common::fixture("par8_like.xnf")).unwrap();
    let coeffs = EnergyCoefficients::calibrated();
    let mut noisy = DeviceModel::taox_default();
    noisy.g_sigma_us = 30.0;
    for device_seed in 0..3 {
        let emu = Emulator::nonideal(&f, &noisy, device_seed);
        for seed in 0..20 {
            let params = SolverParams::new(2.5f64, 3000, seed).unwrap();
            let t = emu.solve(&f, &params, &coeffs);
            assert_eq!(t.result.solved, f.is_satisfied(&t.result.final_assignment));
            assert!(t.result.iterations <= 3000);
            assert!(t.unmasked_steps <= t.result.iterations);
        }
    }
}

#[test]
fn device_file_round_trip() {
    let d = DeviceModel::<f64>::from_file(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/device_taox.toml"),
    )
    .unwrap();
    assert_eq!(d, DeviceModel::taox_default());
}
