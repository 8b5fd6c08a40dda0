//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always show; exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use swapavn::bell::verification_manifest;
use swapavn::lhv::{lhv_extrema, perfect_correlations};
use swapavn::optics::{search_all_conventions, Inventory, SlotGrammar};
use swapavn::predictions::{
    estimate_m, middle_station_violations, noise_scan, spectral_check_m, visibility_threshold,
    CIRELSON_BOUND,
};
use swapavn::{
    avn_certificate, enumerate, epsilon_state, sample_events, Ensemble, EpsilonSign, PostSelection,
    RunConfig,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn timed<F: FnOnce() -> Verdict>(limit: Duration, f: F) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    v.detail = format!(
        "{}; {:.3}s (limit {}s)",
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    v.pass &= elapsed < limit;
    v
}

fn algebra() -> Verdict {
    let m = verification_manifest();
    let worst = m.iter().map(|r| r.residual).fold(0.0, f64::max);
    Verdict {
        pass: m.iter().all(|r| r.pass) && worst < 1e-10,
        detail: format!("{} relations, max residual {worst:.1e}", m.len()),
    }
}

fn avn() -> Verdict {
    let cert = avn_certificate();
    let unsat = cert.branches.iter().all(|b| b.sat_count == 0);
    let loo = cert.branches.iter().all(|b| {
        b.leave_one_out.len() == 6
            && b.leave_one_out
                .iter()
                .all(|l| l.sat_count > 0 && l.forced_opposite)
    });
    Verdict {
        pass: cert.candidates == 256 && unsat && loo && cert.branches.len() == 2,
        detail: format!(
            "256 valuations, six relations unsat for both eps: {unsat}, leave-one-out forced: {loo}, {} satisfy the correlations alone",
            enumerate(&perfect_correlations()).len()
        ),
    }
}

fn bounds() -> Verdict {
    let lhv = lhv_extrema(true).max_value;
    let free = lhv_extrema(false).max_value;
    let s = spectral_check_m();
    Verdict {
        pass: lhv == 2
            && free == 4
            && (s.max_eigenvalue - 4.0).abs() < 1e-10
            && (s.eps_plus_top_weight - 1.0).abs() < 1e-10
            && s.cirelson_bound == CIRELSON_BOUND,
        detail: format!(
            "LHV max {lhv}, unconstrained {free}, spectral max {:.12}, eps=+1 top weight {:.12}, Cirel'son {:.6}",
            s.max_eigenvalue, s.eps_plus_top_weight, s.cirelson_bound
        ),
    }
}

fn visibility() -> Verdict {
    let target = epsilon_state(EpsilonSign::Plus);
    let threshold = visibility_threshold(&target).unwrap();
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let worst = noise_scan(&target, &grid)
        .unwrap()
        .iter()
        .map(|(v, m)| (m - 4.0 * v).abs())
        .fold(0.0, f64::max);
    Verdict {
        pass: (threshold - 0.5).abs() <= 1e-9 && worst < 1e-12,
        detail: format!("threshold {threshold:.12}, max |<M> - 4V| {worst:.1e} over 5 points"),
    }
}

fn monte_carlo() -> Verdict {
    let source = Ensemble::pure(epsilon_state(EpsilonSign::Plus)).unwrap();
    let ideal = RunConfig {
        shots: 100_000,
        seed: 42,
        ..RunConfig::default()
    };
    let lossy = RunConfig {
        eta23: 0.3,
        ..ideal
    };
    let a = sample_events(&ideal, &source).unwrap();
    let b = sample_events(&lossy, &source).unwrap();
    let ea = estimate_m(&a, PostSelection::EventReady).unwrap();
    let eb = estimate_m(&b, PostSelection::EventReady).unwrap();
    let violations = middle_station_violations(&a, EpsilonSign::Plus);
    let ok_a = (ea.estimate - 4.0).abs() <= 3.0 * ea.stderr + 1e-12;
    let ok_b = (eb.estimate - 4.0).abs() <= 5.0 * eb.stderr + 1e-12;
    Verdict {
        pass: ok_a && ok_b && violations == 0,
        detail: format!(
            "ideal {:.6} +- {:.2e} over {} trials, {violations} sign violations; eta23=0.3 {:.6} +- {:.2e} over {} trials",
            ea.estimate, ea.stderr, ea.trials_used, eb.estimate, eb.stderr, eb.trials_used
        ),
    }
}

fn optics() -> Verdict {
    let outcomes = search_all_conventions(Inventory::default(), SlotGrammar::default()).unwrap();
    let passing: Vec<_> = outcomes.iter().flat_map(|o| &o.passing).collect();
    let all_hold = passing.iter().all(|r| {
        r.p_coincidence_eps_minus < 1e-12
            && (r.p_coincidence_eps_plus - 1.0).abs() < 1e-10
            && (r.p_coincidence_product_input - 0.5).abs() < 1e-10
            && r.fidelity >= 1.0 - 1e-10
    });
    let per: Vec<String> = outcomes
        .iter()
        .map(|o| format!("{}: {}/{}", o.convention, o.passing.len(), o.candidates))
        .collect();
    Verdict {
        pass: !passing.is_empty() && all_hold,
        detail: format!(
            "PASS layouts per convention [{}], thresholds hold: {all_hold}",
            per.join(", ")
        ),
    }
}

fn collect(dir: &Path, base: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(&p, base, out);
        } else {
            let rel = p.strip_prefix(base).unwrap().to_string_lossy().into_owned();
            out.push((rel, fs::read(&p).unwrap()));
        }
    }
}

fn reproducibility() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut snapshots = Vec::new();
    for run in ["first", "second"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_swapavn"))
            .args([
                "all",
                "--out",
                dir.to_str().unwrap(),
                "--seed",
                "42",
                "--eta23",
                "0.3",
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let mut files = Vec::new();
        collect(&dir, &dir, &mut files);
        snapshots.push(files);
    }
    let identical = snapshots[0] == snapshots[1];
    Verdict {
        pass: identical && !snapshots[0].is_empty(),
        detail: format!(
            "{} files compared, byte-identical: {identical}",
            snapshots[0].len()
        ),
    }
}

fn main() {
    let rows = [
        ("1 algebra", timed(Duration::from_secs(1), algebra)),
        ("2 avn certificate", timed(Duration::from_secs(1), avn)),
        ("3 bounds", bounds()),
        ("4 visibility", visibility()),
        ("5 monte carlo", timed(Duration::from_secs(30), monte_carlo)),
        ("6 optics", timed(Duration::from_secs(300), optics)),
        ("7 reproducibility", reproducibility()),
    ];
    for (name, v) in &rows {
        println!(
            "criterion {name}: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|(_, v)| !v.pass)
        .map(|(n, _)| *n)
        .collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
