//! Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
//! limits are pinned below; the process exits non-zero if any line fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use xnfsat_core::bench::{self, Backend, BenchConfig};
use xnfsat_core::crossbar::{
    program_crossbar, readout_error_rate, AnalogCrossbar, DeviceModel, Emulator, Readout,
};
use xnfsat_core::dimacs::parse_dimacs_file;
use xnfsat_core::energy::{
    area, area_for_size, Activity, ArrayMode, Component, EnergyCoefficients, EnergyLedger,
};
use xnfsat_core::gen::{gen_mdp, gen_planted_mixed, MdpSpec, MixedSpec};
use xnfsat_core::metrics::its99;
use xnfsat_core::transform::{expand_xor, extract_xors, xnf_to_cnf};
use xnfsat_core::walksat::{self, compute_gain, Init, SolverParams};
use xnfsat_core::{Assignment, Clause, Formula, Literal};

// criterion 1
const GAIN_TRIPLES: usize = 1000;
const GAIN_MAX_VARS: usize = 16;
// criterion 2
const EQUIV_INSTANCES: usize = 100;
const EQUIV_SEEDS: u64 = 10;
const EQUIV_SIGMAS: [f64; 2] = [0.0, 2.5];
const EQUIV_MAX_ITER: u64 = 1000;
// criterion 3
const ROUND_TRIP_MAX_ARITY: usize = 6;
// criterion 4
const PAR8_TRIALS: usize = 500;
const PAR8_SIGMA: f64 = 2.5;
const PAR8_MAX_ITER: u64 = 2000;
const PAR8_MIN_SUCCESS: f64 = 0.95;
// criterion 5
const READOUT_INPUTS: usize = 400;
const READOUT_DEVICES: u64 = 20;
const READOUT_MAX_ERROR: f64 = 0.05;
// criterion 6
const ITS_PAIRS: usize = 10_000;
const ITS_TOL: f64 = 0.01;
// criterion 7
const ENERGY_REL_TOL: f64 = 1e-12;
const ENERGY_TARGET_PJ: f64 = 100.0;
const ENERGY_BAND: f64 = 0.20;
const PRNG_TARGET: f64 = 0.80;
const PRNG_BAND: f64 = 0.10;
// criterion 8
const AREA_TOL: f64 = 0.01;
// criterion 9
const MDP_INSTANCES: u64 = 100;
const MDP_BRUTE_MAX_N: usize = 12;

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit_s: u64, run: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = run();
    let took = start.elapsed();
    let in_time = took <= Duration::from_secs(limit_s);
    let pass = v.pass && in_time;
    println!(
        "{} {id}. {name}: {} [{:.2} s, limit {limit_s} s]",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64()
    );
    pass
}

fn gain_oracle() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let mut agree = 0;
    for _ in 0..GAIN_TRIPLES {
        let n = rng.random_range(1..=GAIN_MAX_VARS);
        let m = rng.random_range(1..=4 * n);
        let f = common::random_formula(&mut rng, n, m, 6);
        let a = Assignment::random(n, &mut rng);
        let v = rng.random_range(0..n);
        let g = compute_gain(&f, &a, v);
        agree += usize::from((g.make, g.brk) == common::gain_oracle(&f, &a, v));
    }
    Verdict {
        pass: agree == GAIN_TRIPLES,
        detail: format!("{agree}/{GAIN_TRIPLES} random triples match flip-and-recount"),
    }
}

fn backend_equivalence() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(2);
    let coeffs = EnergyCoefficients::<f64>::calibrated();
    let (mut runs, mut diverged, mut flips) = (0, 0, 0u64);
    for _ in 0..EQUIV_INSTANCES {
        let n = rng.random_range(8..=24);
        let spec = MixedSpec {
            num_vars: n,
            cnf_clauses: rng.random_range(2 * n..=4 * n),
            cnf_arity: 3,
            xor_clauses: rng.random_range(1..=5),
            xor_arity: rng.random_range(2..=6),
        };
        let f = gen_planted_mixed(&spec, rng.random()).unwrap().formula;
        let emu = Emulator::ideal(&f);
        for seed in 0..EQUIV_SEEDS {
            for sigma in EQUIV_SIGMAS {
                let init = if seed % 2 == 0 {
                    Init::AllTrue
                } else {
                    Init::Random
                };
                let params = SolverParams::new(sigma, EQUIV_MAX_ITER, seed)
                    .unwrap()
                    .with_init(init)
                    .with_flip_log(true);
                let r = walksat::solve(&f, &params);
                let t = emu.solve(&f, &params, &coeffs);
                runs += 1;
                flips += r.iterations;
                diverged += usize::from(r != t.result || t.unmasked_steps != 0);
            }
        }
    }
    Verdict {
        pass: diverged == 0,
        detail: format!("{diverged} divergences over {runs} runs ({flips} flips compared)"),
    }
}

fn xor_round_trip() -> Verdict {
    let mut bad = Vec::new();
    let mut cases = 0;
    for k in 1..=ROUND_TRIP_MAX_ARITY {
        for signs in 0u32..1 << k {
            cases += 1;
            let lits = (0..k).map(|v| Literal::new(v, signs >> v & 1 == 1));
            let c = Clause::xor(lits).unwrap().unwrap();
            let cnf = expand_xor(&c, ROUND_TRIP_MAX_ARITY).unwrap();
            let size_ok = cnf.len() == 1 << (k - 1);
            let expanded = Formula::new(k, cnf).unwrap();
            let (back, _) = extract_xors(&expanded, ROUND_TRIP_MAX_ARITY);
            if !size_ok || back.clauses() != [c] {
                bad.push((k, signs));
            }
        }
    }
    Verdict {
        pass: bad.is_empty(),
        detail: format!(
            "{}/{cases} sign patterns (arity 1-{ROUND_TRIP_MAX_ARITY}) recovered with 2^(k-1) clauses{}",
            cases - bad.len(),
            if bad.is_empty() { String::new() } else { format!("; failing {bad:?}") }
        ),
    }
}

fn par8() -> Verdict {
    let (f, _) = parse_dimacs_file(common::fixture("par8_like.xnf")).unwrap();
    let shape = (f.num_vars(), f.num_clauses(), f.num_xor_clauses());
    let params = SolverParams::new(PAR8_SIGMA, PAR8_MAX_ITER, 0).unwrap();
    let mut parts = Vec::new();
    let mut pass = shape == (12, 42, 1);
    for backend in Backend::ALL {
        let mut cfg = BenchConfig::new(backend, params.clone(), PAR8_TRIALS);
        cfg.device = Some(DeviceModel::taox_default());
        cfg.wall_time = false;
        let records = bench::run_backend(&f, &cfg).unwrap();
        let solved = records
            .iter()
            .filter(|t| t.result.solved && f.is_satisfied(&t.result.final_assignment))
            .count();
        let rate = solved as f64 / PAR8_TRIALS as f64;
        pass &= rate >= PAR8_MIN_SUCCESS;
        parts.push(format!("{backend} {solved}/{PAR8_TRIALS}"));
    }
    Verdict {
        pass,
        detail: format!(
            "synthetic 12-var/42-clause/1-XOR stand-in, sigma {PAR8_SIGMA}, cap {PAR8_MAX_ITER}: {} (need >= {:.0}%)",
            parts.join(", "),
            100.0 * PAR8_MIN_SUCCESS
        ),
    }
}

fn readout_error() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
    let f = common::random_formula(&mut rng, 12, 42, 5);
    let p = program_crossbar(&f);
    let d = DeviceModel::<f64>::taox_default();
    let rates: Vec<f64> = (0..READOUT_DEVICES)
        .map(|s| {
            // device sampling/calibration and test inputs use separate streams
            let xb = AnalogCrossbar::program(&p, &d, &mut Xoshiro256PlusPlus::seed_from_u64(s));
            let mut inputs = Xoshiro256PlusPlus::seed_from_u64(10_000 + s);
            readout_error_rate(&p, &Readout::Analog(xb), READOUT_INPUTS, &mut inputs)
        })
        .collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let max = rates.iter().copied().fold(0.0, f64::max);
    Verdict {
        pass: mean <= READOUT_MAX_ERROR,
        detail: format!(
            "mean row misclassification {:.2}% over {READOUT_DEVICES} devices x {READOUT_INPUTS} inputs (worst device {:.2}%, bound {:.0}%)",
            100.0 * mean,
            100.0 * max,
            100.0 * READOUT_MAX_ERROR
        ),
    }
}

fn its99_checks() -> Verdict {
    let exact = its99(100.0, 0.99).unwrap() == 100.0;
    let half = its99(50.0, 0.5).unwrap();
    let half_ok = (half - 332.19).abs() <= ITS_TOL;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(6);
    let mut violations = 0;
    for _ in 0..ITS_PAIRS {
        let t = rng.random_range(1.0..1e9);
        let theta = rng.random_range(1e-6..1.0);
        let theta2 = rng.random_range(theta..=1.0);
        let v = its99(t, theta).unwrap();
        let longer = its99(t * rng.random_range(1.0..10.0), theta).unwrap();
        let likelier = its99(t, theta2).unwrap();
        let side = if theta <= 0.99 {
            v >= t * (1.0 - 1e-12)
        } else {
            v <= t * (1.0 + 1e-12)
        };
        violations += usize::from(!(longer >= v && likelier <= v && side));
    }
    Verdict {
        pass: exact && half_ok && violations == 0,
        detail: format!(
            "its99(100,0.99)={} its99(50,0.5)={half:.4}; {violations} monotonicity violations in {ITS_PAIRS} pairs",
            its99(100.0, 0.99).unwrap()
        ),
    }
}

fn energy() -> Verdict {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut coeffs = EnergyCoefficients::zero(6.0);
        for c in Component::ALL {
            coeffs.set(c, rng.random_range(0.001..5.0));
        }
        let mut ledger = EnergyLedger::new();
        let mut total = Activity::default();
        for _ in 0..rng.random_range(1..20) {
            let mut step = Activity::default();
            for c in Component::ALL {
                step.record(c, rng.random_range(0..10_000));
            }
            total += step;
            ledger.accumulate(&step, &coeffs);
        }
        let dot: f64 = Component::ALL
            .iter()
            .map(|&c| total.get(c) as f64 * coeffs.get(c))
            .sum();
        worst = worst.max((ledger.energy_pj() - dot).abs() / dot);
    }
    let identity = worst <= ENERGY_REL_TOL;

    let w = bench::mceliece_like_cnf(1).formula;
    let coeffs = EnergyCoefficients::calibrated();
    let params = SolverParams::new(2.5f64, 10_000, 1).unwrap();
    let mut cfg = BenchConfig::new(Backend::Reference, params, 50);
    cfg.wall_time = false;
    let mut ledger = EnergyLedger::new();
    for t in bench::run_backend(&w, &cfg).unwrap() {
        ledger.merge(&t.ledger);
    }
    let per_iter = ledger.energy_per_iteration().unwrap();
    let prng = ledger
        .breakdown(&coeffs)
        .iter()
        .find(|c| c.component == Component::Prng)
        .unwrap()
        .share;
    let per_iter_ok = (per_iter - ENERGY_TARGET_PJ).abs() <= ENERGY_BAND * ENERGY_TARGET_PJ;
    let prng_ok = (prng - PRNG_TARGET).abs() <= PRNG_BAND;
    Verdict {
        pass: identity && per_iter_ok && prng_ok,
        detail: format!(
            "worst dot-product rel. error {worst:.1e}; synthetic 174/623 CNF: {per_iter:.2} pJ/iter (target {ENERGY_TARGET_PJ} +/- {:.0}%), PRNG share {:.1}% (target {:.0} +/- {:.0} pts)",
            100.0 * ENERGY_BAND,
            100.0 * prng,
            100.0 * PRNG_TARGET,
            100.0 * PRNG_BAND
        ),
    }
}

fn area_ratio() -> Verdict {
    let expected = (2.0 * 174.0 * 623.0) / (2.0 * 32.0 * 96.0);
    let cnf = bench::mceliece_like_cnf(1).formula;
    let xnf = bench::mceliece_like_xnf(1).formula;
    let from_files =
        area(&cnf, ArrayMode::Sequential).relative_to(&area(&xnf, ArrayMode::Sequential));
    let from_sizes = area_for_size(174, 623, ArrayMode::Pipelined).relative_to(&area_for_size(
        32,
        96,
        ArrayMode::Pipelined,
    ));
    // bundled pairs: each XNF fixture against its own CNF expansion
    let mut pairs = Vec::new();
    for name in ["fig1a.xnf", "par8_like.xnf"] {
        let (x, _) = parse_dimacs_file(common::fixture(name)).unwrap();
        let c = xnf_to_cnf(&x, None, 20).unwrap();
        let r = area(&c, ArrayMode::Sequential).relative_to(&area(&x, ArrayMode::Sequential));
        pairs.push(format!("{name} {r:.2}x"));
    }
    Verdict {
        pass: (from_files - expected).abs() <= AREA_TOL && (from_sizes - expected).abs() <= AREA_TOL,
        detail: format!(
            "174/623 vs 32/96 cell ratio {from_files:.3} (expected {expected:.3}); bundled pairs: {}",
            pairs.join(", ")
        ),
    }
}

fn mdp() -> Verdict {
    let (mut verified, mut brute, mut failures) = (0, 0, Vec::new());
    for i in 0..MDP_INSTANCES {
        let spec = MdpSpec {
            m: 8 + (i % 9) as usize,
            n: 8 + (i / 9 % 9) as usize,
            k: (i % 3) as usize,
            flip_count: (i % 3) as usize,
            seed: i,
        };
        let inst = gen_mdp(&spec).unwrap();
        if inst.planted.formula.is_satisfied(&inst.planted.witness) {
            verified += 1;
        } else {
            failures.push(i);
        }
        if spec.n <= MDP_BRUTE_MAX_N {
            brute += 1;
            if common::min_disagreements(&inst.x, &inst.y, spec.n) > spec.k {
                failures.push(i);
            }
        }
    }
    Verdict {
        pass: failures.is_empty(),
        detail: format!(
            "{verified}/{MDP_INSTANCES} witnesses verify; {brute} instances with n <= {MDP_BRUTE_MAX_N} confirmed by exhaustive parity search{}",
            if failures.is_empty() { String::new() } else { format!("; failing {failures:?}") }
        ),
    }
}

fn main() {
    let results = [
        check(1, "gain oracle", 10, gain_oracle),
        check(2, "backend equivalence", 60, backend_equivalence),
        check(3, "XOR expand/extract round trip", 5, xor_round_trip),
        check(4, "par-8-sized XNF success rate", 30, par8),
        check(5, "non-ideal readout error", 10, readout_error),
        check(6, "ITS99 analytics", 1, its99_checks),
        check(7, "energy model", 30, energy),
        check(8, "area accounting", 5, area_ratio),
        check(9, "MDP generator soundness", 60, mdp),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
