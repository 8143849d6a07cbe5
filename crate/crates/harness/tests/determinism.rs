//! Identical configuration and seed give byte-identical output.

use nonlocal_core::regvar::SlowlyVarying;
use nonlocal_harness::{emit, run_harnack_sweep, run_lemma_suite, SweepConfig};

fn config(seed: u64, jobs: usize) -> SweepConfig {
    let mut c = SweepConfig { seed, jobs, ..Default::default() };
    c.profile.families = vec![SlowlyVarying::Constant, SlowlyVarying::LogPow { beta: -1.0 }];
    c.profile.sigmas = vec![1.0, 1.9];
    c.harnack.instances = 3;
    c.harnack.cells = 16;
    c.lemma.r_points = 10;
    c
}

#[test]
fn harnack_csv_is_byte_identical_across_runs_and_thread_counts() {
    let dir = std::env::temp_dir().join(format!("nonlocal-determinism-{}", std::process::id()));
    let mut files = Vec::new();
    for (i, jobs) in [1, 4, 4].into_iter().enumerate() {
        let c = config(17, jobs);
        let path = dir.join(format!("run{i}.csv"));
        emit(&run_harnack_sweep(&c).unwrap(), &c, "harnack-sweep", &path).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
    let other = run_harnack_sweep(&config(18, 4)).unwrap().to_csv().unwrap();
    assert_ne!(other.as_bytes(), &files[0][..], "a different seed should change the data");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn lemma_suite_is_independent_of_thread_count() {
    let a = run_lemma_suite(&config(0, 1)).unwrap().to_csv().unwrap();
    let b = run_lemma_suite(&config(0, 3)).unwrap().to_csv().unwrap();
    assert_eq!(a, b);
}
