use tiersla_core::workload::{self, WorkloadSpec};

/// Kolmogorov-Smirnov distance between a sample and Exp(rate).
fn ks_exponential(mut sample: Vec<f64>, rate: f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = 1.0 - (-rate * x).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn exec_and_interarrival_times_are_exponential() {
    let n = 100_000;
    let spec = WorkloadSpec {
        num_jobs: n,
        arrival_rate: 2.0,
        service_rate: 1.5,
        seed: 21,
        ..Default::default()
    };
    let jobs = workload::generate(&spec, 2).unwrap();
    // 1% critical value
    let critical = 1.628 / (n as f64).sqrt();
    for tier in 0..2 {
        let d = ks_exponential(jobs.iter().map(|j| j.exec_at(tier)).collect(), 1.5);
        assert!(d < critical, "tier {tier}: D = {d}");
    }
    let mut prev = 0.0;
    let gaps: Vec<f64> = jobs
        .iter()
        .map(|j| {
            let g = j.arrival - prev;
            prev = j.arrival;
            g
        })
        .collect();
    let d = ks_exponential(gaps, 2.0);
    assert!(d < critical, "interarrival: D = {d}");
}

#[test]
fn targets_follow_allowance_fraction() {
    let spec = WorkloadSpec {
        num_jobs: 500,
        allowance_fraction: 0.35,
        seed: 2,
        ..Default::default()
    };
    for job in workload::generate(&spec, 3).unwrap().iter() {
        let et = job.total_exec();
        assert!((job.allowance() - 0.35 * et).abs() < 1e-9 * et.max(1.0));
        assert!((job.deadline() - 1.35 * et).abs() < 1e-9 * et.max(1.0));
    }
}

#[test]
fn file_round_trip_preserves_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.txt");
    let spec = WorkloadSpec {
        num_jobs: 40,
        seed: 8,
        ..Default::default()
    };
    let jobs = workload::generate(&spec, 2).unwrap();
    workload::save(&jobs, &path).unwrap();
    assert_eq!(workload::load(&path).unwrap(), jobs);
    assert!(workload::load(dir.path().join("missing.txt")).is_err());
}
