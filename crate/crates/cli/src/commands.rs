//! The verification suites behind each subcommand. Every suite returns the
//! files it wants written plus a flat list of named pass/fail checks.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use swapavn::bell::{operator_identity_check, verification_manifest};
use swapavn::lhv::{enumerate, lhv_extrema, perfect_correlations};
use swapavn::optics::{
    canonical_layout, search_layouts, verify_selection, Inventory, Layout, PbsPhase, SlotGrammar,
};
use swapavn::predictions::{
    estimate_m, middle_station_violations, noise_scan as scan, single_site_mean, spectral_check_m,
    visibility_threshold, Basis, Ensemble, PostSelection, RunConfig, TrialRecord, CIRELSON_BOUND,
    LHV_BOUND, QUANTUM_BOUND,
};
use swapavn::report::{to_canonical_json, to_value};
use swapavn::{avn_certificate, epsilon_state, EpsilonSign};

use crate::Format;

/// Bad flags or inputs; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

fn check(name: impl Into<String>, pass: bool) -> Check {
    Check {
        name: name.into(),
        pass,
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<(PathBuf, String)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) {
        self.files.push((name.into(), to_canonical_json(value)));
    }
}

/// Validated flag values, recorded verbatim in the invocation manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub format: &'static str,
    pub seed: u64,
    pub shots: u64,
    pub eta1: f64,
    pub eta23: f64,
    pub eta4: f64,
    pub visibility_grid: Vec<f64>,
    pub layout: Option<String>,
    pub pbs_phase: Option<PbsPhase>,
    #[serde(skip)]
    table_format: Format,
    #[serde(skip)]
    parsed_layout: Option<Layout>,
}

impl Settings {
    pub fn from_flags(
        format: Format,
        seed: u64,
        shots: u64,
        [eta1, eta23, eta4]: [f64; 3],
        grid: &[f64],
        layout: Option<&Path>,
        pbs_phase: Option<&str>,
    ) -> anyhow::Result<Self> {
        let pbs_phase = pbs_phase
            .map(|p| p.parse::<PbsPhase>().map_err(|e| usage(e.to_string())))
            .transpose()?;
        let cfg = RunConfig {
            shots,
            eta1,
            eta23,
            eta4,
            seed,
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        if grid.is_empty() || grid.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(usage("visibility grid values must lie in [0, 1]"));
        }
        let parsed_layout = match layout {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
                let l = Layout::parse(&text, pbs_phase.unwrap_or_default())
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                Some(l)
            }
            None => None,
        };
        Ok(Self {
            format: format.name(),
            seed,
            shots,
            eta1,
            eta23,
            eta4,
            visibility_grid: grid.to_vec(),
            layout: layout.map(|p| p.display().to_string()),
            pbs_phase,
            table_format: format,
            parsed_layout,
        })
    }

    fn run_config(&self) -> RunConfig {
        RunConfig {
            shots: self.shots,
            eta1: self.eta1,
            eta23: self.eta23,
            eta4: self.eta4,
            seed: self.seed,
        }
    }
}

pub fn verify_algebra() -> anyhow::Result<Outcome> {
    let manifest = verification_manifest();
    let identity = operator_identity_check();
    let mut out = Outcome {
        checks: manifest
            .iter()
            .map(|r| check(format!("{} [{}]", r.relation, r.state), r.pass))
            .collect(),
        ..Outcome::default()
    };
    out.checks
        .push(check("operator identity holds exactly", identity.holds()));
    let pass = out.pass();
    out.json(
        "algebra.json",
        &json!({ "checks": manifest, "operator_identity": identity, "pass": pass }),
    );
    Ok(out)
}

pub fn avn() -> anyhow::Result<Outcome> {
    let cert = avn_certificate();
    let correlations_only = enumerate(&perfect_correlations()).len();
    let mut out = Outcome::default();
    for b in &cert.branches {
        let eps = if b.epsilon > 0 { "+1" } else { "-1" };
        out.checks.push(check(
            format!("eps={eps}: six relations unsatisfiable"),
            b.sat_count == 0,
        ));
        out.checks.push(check(
            format!("eps={eps}: every leave-one-out subset forces the omitted relation's opposite"),
            b.leave_one_out.len() == 6
                && b.leave_one_out
                    .iter()
                    .all(|l| l.sat_count > 0 && l.forced_opposite),
        ));
        out.checks.push(check(
            format!("eps={eps}: left-hand product +1, right-hand product -1"),
            b.lhs_product_always_plus && b.rhs_product == -1,
        ));
    }
    let pass = out.pass();
    out.json(
        "avn.json",
        &json!({
            "certificate": cert,
            "perfect_correlations_sat_count": correlations_only,
            "pass": pass,
        }),
    );
    Ok(out)
}

pub fn bounds() -> anyhow::Result<Outcome> {
    let constrained = lhv_extrema(true);
    let free = lhv_extrema(false);
    let spectral = spectral_check_m();
    let mut out = Outcome {
        checks: vec![
            check(
                "constrained LHV maximum is 2",
                f64::from(constrained.max_value) == LHV_BOUND,
            ),
            check(
                "unconstrained LHV maximum is 4",
                f64::from(free.max_value) == QUANTUM_BOUND,
            ),
            check(
                "spectral maximum is 4",
                (spectral.max_eigenvalue - QUANTUM_BOUND).abs() < 1e-10,
            ),
            check(
                "eps=+1 lies in the top eigenspace",
                (spectral.eps_plus_top_weight - 1.0).abs() < 1e-10,
            ),
        ],
        ..Outcome::default()
    };
    out.json(
        "bounds.json",
        &json!({
            "lhv": LHV_BOUND,
            "cirelson": CIRELSON_BOUND,
            "quantum": QUANTUM_BOUND,
            "lhv_constrained": constrained,
            "lhv_unconstrained": free,
            "spectral": spectral,
            "pass": out.pass(),
        }),
    );
    Ok(out)
}

#[derive(Serialize)]
struct NoiseRow {
    visibility: f64,
    expectation_m: f64,
    affine_error: f64,
}

pub fn noise_scan(settings: &Settings) -> anyhow::Result<Outcome> {
    let target = epsilon_state(EpsilonSign::Plus);
    let rows: Vec<NoiseRow> = scan(&target, &settings.visibility_grid)?
        .into_iter()
        .map(|(v, m)| NoiseRow {
            visibility: v,
            expectation_m: m,
            affine_error: (m - QUANTUM_BOUND * v).abs(),
        })
        .collect();
    let threshold = visibility_threshold(&target)?;
    let mut out = Outcome::default();
    out.checks.push(check(
        "visibility threshold is 0.5",
        (threshold - 0.5).abs() <= 1e-9,
    ));
    for r in &rows {
        out.checks.push(check(
            format!("<M> = 4V at V = {}", r.visibility),
            r.affine_error < 1e-12,
        ));
    }
    out.json(
        "noise.json",
        &json!({
            "model": "white noise: V |target><target| + (1 - V) I/16",
            "target": "eps=+1",
            "scan": rows,
            "threshold": threshold,
            "lhv_bound": LHV_BOUND,
            "pass": out.pass(),
        }),
    );
    if settings.table_format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(r)?;
        }
        out.files
            .push(("noise.csv".into(), String::from_utf8(w.into_inner()?)?));
    }
    Ok(out)
}

fn trials_table(records: &[TrialRecord], format: Format) -> anyhow::Result<(PathBuf, String)> {
    Ok(match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r)?;
            }
            ("trials.csv".into(), String::from_utf8(w.into_inner()?)?)
        }
        Format::Json => ("trials.json".into(), to_canonical_json(&records)),
    })
}

pub fn sample(settings: &Settings) -> anyhow::Result<Outcome> {
    let cfg = settings.run_config();
    let source = Ensemble::pure(epsilon_state(EpsilonSign::Plus))?;
    let records = swapavn::sample_events(&cfg, &source)?;
    let violations = middle_station_violations(&records, EpsilonSign::Plus);
    let lossless = estimate_m(&records, PostSelection::None)?;
    let event_ready = estimate_m(&records, PostSelection::EventReady).ok();
    let ideal = cfg.eta1 == 1.0 && cfg.eta23 == 1.0 && cfg.eta4 == 1.0;
    let k = if ideal { 3.0 } else { 5.0 };

    let mut out = Outcome::default();
    out.checks
        .push(check("no middle-station sign violations", violations == 0));
    out.checks.push(check(
        "event-ready sample is nonempty",
        event_ready.is_some(),
    ));
    if let Some(e) = &event_ready {
        out.checks.push(check(
            format!("event-ready estimate within {k} stderr of 4"),
            (e.estimate - QUANTUM_BOUND).abs() <= k * e.stderr + 1e-12,
        ));
    }

    let mut marginals = serde_json::Map::new();
    for (site, basis, key) in [
        (1, Basis::Z, "z1"),
        (1, Basis::X, "x1"),
        (4, Basis::Z, "z4"),
        (4, Basis::X, "x4"),
    ] {
        let (mean, stderr) = single_site_mean(&records, site, basis);
        marginals.insert(key.into(), json!({ "mean": mean, "stderr": stderr }));
    }
    let summary = match &event_ready {
        Some(e) => to_value(e),
        None => json!({ "estimate": null, "stderr": null, "per_term": {}, "trials_used": 0 }),
    };
    let mut report = summary.as_object().cloned().unwrap_or_default();
    report.insert("config".into(), to_value(&cfg));
    report.insert("source".into(), json!("eps=+1"));
    report.insert(
        "postselection".into(),
        json!("event-ready: all three stations clicked"),
    );
    report.insert("lossless_reference".into(), to_value(&lossless));
    report.insert("middle_station_violations".into(), json!(violations));
    report.insert("single_site_marginals".into(), Value::Object(marginals));
    report.insert("pass".into(), json!(out.pass()));
    out.json("sample.json", &report);
    out.files
        .push(trials_table(&records, settings.table_format)?);
    Ok(out)
}

fn selection_holds(r: &swapavn::optics::SelectionReport) -> bool {
    r.p_coincidence_eps_minus < 1e-12
        && (r.p_coincidence_eps_plus - 1.0).abs() < 1e-10
        && (r.p_coincidence_product_input - 0.5).abs() < 1e-10
        && r.fidelity >= 1.0 - 1e-10
}

pub fn optics_search(settings: &Settings) -> anyhow::Result<Outcome> {
    let phases = match settings.pbs_phase {
        Some(p) => vec![p],
        None => PbsPhase::ALL.to_vec(),
    };
    let inventory = Inventory::default();
    let grammar = SlotGrammar::default();
    let outcomes = phases
        .into_iter()
        .map(|p| search_layouts(inventory, grammar, p))
        .collect::<Result<Vec<_>, _>>()?;
    let total: usize = outcomes.iter().map(|o| o.passing.len()).sum();
    let mut out = Outcome::default();
    out.checks
        .push(check("at least one PASS layout", total > 0));
    out.checks.push(check(
        "every PASS layout meets the coincidence and fidelity thresholds",
        outcomes
            .iter()
            .flat_map(|o| &o.passing)
            .all(selection_holds),
    ));
    out.json(
        "optics_search.json",
        &json!({
            "inventory": inventory,
            "grammar": grammar,
            "conventions": outcomes,
            "total_passing": total,
            "pass": out.pass(),
        }),
    );
    Ok(out)
}

pub fn optics_verify(settings: &Settings) -> anyhow::Result<Outcome> {
    let phase = settings.pbs_phase.unwrap_or_default();
    let layout = settings
        .parsed_layout
        .clone()
        .unwrap_or_else(|| canonical_layout(phase));
    let r = verify_selection(&layout)?;
    let mut out = Outcome {
        checks: vec![
            check(
                "eps=-1 never gives a coincidence",
                r.p_coincidence_eps_minus < 1e-12,
            ),
            check(
                "eps=+1 always gives a coincidence",
                (r.p_coincidence_eps_plus - 1.0).abs() < 1e-10,
            ),
            check(
                "product input gives a coincidence with probability 1/2",
                (r.p_coincidence_product_input - 0.5).abs() < 1e-10,
            ),
            check(
                "post-selected state is eps=+1 up to the output frame",
                r.fidelity >= 1.0 - 1e-10,
            ),
        ],
        ..Outcome::default()
    };
    out.json("optics_verify.json", &r);
    out.files.push(("layout.txt".into(), layout.to_text()));
    Ok(out)
}

pub fn all(settings: &Settings) -> anyhow::Result<Outcome> {
    let suites: [(&str, anyhow::Result<Outcome>); 7] = [
        ("verify-algebra", verify_algebra()),
        ("avn", avn()),
        ("bounds", bounds()),
        ("noise-scan", noise_scan(settings)),
        ("sample", sample(settings)),
        ("optics-search", optics_search(settings)),
        ("optics-verify", optics_verify(settings)),
    ];
    let mut out = Outcome::default();
    let mut per_command = serde_json::Map::new();
    for (name, result) in suites {
        let o = result.with_context(|| format!("{name} failed to run"))?;
        per_command.insert(name.into(), json!(o.pass()));
        out.files.extend(
            o.files
                .into_iter()
                .map(|(p, s)| (Path::new(name).join(p), s)),
        );
        out.checks.extend(o.checks.into_iter().map(|c| Check {
            name: format!("{name}: {}", c.name),
            pass: c.pass,
        }));
    }
    let pass = out.pass();
    out.json(
        "summary.json",
        &json!({ "commands": per_command, "pass": pass }),
    );
    Ok(out)
}

/// Writes the suite's files plus `manifest.json`, and `failure.json` when a check failed.
pub fn write_invocation(
    dir: &Path,
    command: &str,
    settings: &Settings,
    outcome: &Outcome,
) -> anyhow::Result<()> {
    for (rel, contents) in &outcome.files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    fs::create_dir_all(dir)?;
    let mut files: Vec<String> = outcome
        .files
        .iter()
        .map(|(p, _)| p.to_string_lossy().replace('\\', "/"))
        .collect();
    files.sort();
    let failed = outcome.checks.iter().filter(|c| !c.pass).count();
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "settings": settings,
        "files": files,
        "checks_total": outcome.checks.len(),
        "checks_failed": failed,
        "first_failure": outcome.first_failure().map(|c| c.name.clone()),
        "pass": outcome.pass(),
    });
    fs::write(dir.join("manifest.json"), to_canonical_json(&manifest))?;
    let failure_path = dir.join("failure.json");
    match outcome.first_failure() {
        Some(c) => {
            let failures: Vec<&Check> = outcome.checks.iter().filter(|c| !c.pass).collect();
            fs::write(
                &failure_path,
                to_canonical_json(
                    &json!({ "command": command, "first_failure": c.name, "failed": failures }),
                ),
            )?;
        }
        None if failure_path.exists() => fs::remove_file(&failure_path)?,
        None => {}
    }
    Ok(())
}
