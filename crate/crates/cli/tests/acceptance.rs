//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p ionqrm-cli --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ionqrm_cli::config::{parse_config, RunConfig};
use ionqrm_core::checks::{run_all, CheckSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TIME_BUDGET: Duration = Duration::from_secs(120);

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ionqrm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn random_config(rng: &mut ChaCha8Rng) -> RunConfig {
    use ionqrm_cli::config::Command as C;
    let commands = [
        C::Build,
        C::Verify,
        C::Evolve,
        C::Scan,
        C::Regime,
        C::AllChecks,
    ];
    let mut c = RunConfig::defaults(commands[rng.gen_range(0..commands.len())]);
    c.params.nu = rng.gen_range(0.1..5.0);
    c.params.omega = rng.gen_range(0.0..0.04);
    c.params.eta = rng.gen_range(0.0..1.0);
    let n_max = rng.gen_range(16..96);
    c.trunc = ionqrm_core::TruncationSpec::new(n_max, rng.gen_range(0..n_max / 2)).unwrap();
    c.seed = rng.gen();
    c.evolve.t_max = rng.gen_range(1.0..300.0);
    c.evolve.steps = rng.gen_range(1..500);
    c.evolve.alpha_re = rng.gen_range(-1.0..1.0);
    c.analysis.identity_tol = 10f64.powf(rng.gen_range(-12.0..-6.0));
    c.regime.ultrastrong_onset = rng.gen_range(0.05..0.3);
    if rng.gen_bool(0.5) {
        c.out = Some(format!("run{}.csv", rng.gen::<u16>()));
    }
    c
}

/// Config round trip over random valid configs, byte-identical reruns of
/// `evolve`, and a clean `all-checks` exit.
fn reproducibility() -> (bool, Vec<String>) {
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    let (mut round_trips, mut tried) = (0, 0);
    while tried < 100 {
        let c = random_config(&mut rng);
        if c.validate().is_err() {
            continue;
        }
        tried += 1;
        match parse_config(&c.emit()) {
            Ok(back) if back == c => round_trips += 1,
            other => notes.push(format!("round trip mismatch: {other:?}")),
        }
    }
    notes.push(format!("config round trips: {round_trips}/100"));

    let exe = env!("CARGO_BIN_EXE_ionqrm");
    let dir = scratch_dir();
    let cfg_path = dir.join("evolve.cfg");
    std::fs::write(
        &cfg_path,
        "command = evolve\nnu = 1\nOmega = 0.5\neta = 0.05\nn_max = 32\nguard = 8\n\n[evolve]\nhamiltonian = jc\nreference = rabi_rotated\nt_max = 60\nsteps = 120\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.join(format!("evolve{k}.csv"));
        let status = Command::new(exe)
            .args(["evolve", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .status()
            .expect("spawn ionqrm");
        if !status.success() {
            notes.push(format!("evolve run {k} exited with {status}"));
        }
        outputs.push(std::fs::read(&out).unwrap_or_default());
    }
    let identical = !outputs[0].is_empty() && outputs[0] == outputs[1];
    notes.push(format!("evolve reruns byte-identical: {identical}"));

    let checks = Command::new(exe)
        .args(["all-checks", "--out"])
        .arg(dir.join("checks.json"))
        .output()
        .expect("spawn ionqrm");
    let checks_ok = checks.status.success();
    notes.push(format!("all-checks exit: {}", checks.status));
    let _ = std::fs::remove_dir_all(&dir);

    (round_trips == 100 && identical && checks_ok, notes)
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    let outcomes = run_all(&CheckSettings::default());
    let mut failures = Vec::new();
    for o in &outcomes {
        println!("{}", o.summary_line());
        if !o.pass {
            for n in &o.notes {
                println!("    {n}");
            }
            failures.push(o.id);
        }
    }

    let t10 = Instant::now();
    let (pass10, notes) = reproducibility();
    println!(
        "[{}] criterion 10: reproducible configuration and output ({:.2} s)",
        if pass10 { "PASS" } else { "FAIL" },
        t10.elapsed().as_secs_f64()
    );
    for n in &notes {
        println!("    {n}");
    }
    if !pass10 {
        failures.push(10);
    }

    let total = start.elapsed();
    println!("total {:.2} s", total.as_secs_f64());
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
    assert!(total < TIME_BUDGET, "acceptance run took {total:?}");
}
