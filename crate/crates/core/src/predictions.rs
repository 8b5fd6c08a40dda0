//! Quantum predictions for the four-term Bell operator
//! `M = Z1Z2Z3Z4 + X1X2X3X4 + Z1Z2X3X4 + X1X2Z3Z4`, its behaviour under
//! white noise, and a seeded simulation of the event-ready experiment.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{epsilon_state, EpsilonSign, PARTICLES};
use crate::error::{Error, Result};
use crate::state::{DenseOperator, JointMeasurement, Observable, StateVector, C64};

/// Local realistic bound of ⟨M⟩.
pub const LHV_BOUND: f64 = 2.0;
/// Largest value of the standard CHSH expression allowed by quantum mechanics.
pub const CIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Largest value of ⟨M⟩ allowed by quantum mechanics.
pub const QUANTUM_BOUND: f64 = 4.0;

/// The four Pauli-string terms of M.
pub fn bell_operator_terms() -> [Observable; 4] {
    ["Z1Z2Z3Z4", "X1X2X3X4", "Z1Z2X3X4", "X1X2Z3Z4"].map(|s| s.parse().expect("fixed term"))
}

/// M as a 16×16 matrix on particles (1, 2, 3, 4).
pub fn realize_m() -> DenseOperator {
    bell_operator_terms()
        .iter()
        .map(|t| t.realize(&PARTICLES).expect("fixed labels"))
        .reduce(|a, b| a.add(&b).expect("16x16"))
        .expect("four terms")
}

/// A weighted collection of pure states standing in for a mixed state.
#[derive(Debug, Clone)]
pub struct Ensemble {
    components: Vec<(f64, StateVector)>,
    visibility: Option<f64>,
}

impl Ensemble {
    pub fn new(components: Vec<(f64, StateVector)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::InvalidEnsemble("no components".into()));
        };
        let labels = first.labels().to_vec();
        let mut total = 0.0;
        for (w, s) in &components {
            if w.is_nan() || *w < 0.0 {
                return Err(Error::InvalidEnsemble(format!("negative weight {w}")));
            }
            if s.labels() != labels.as_slice() {
                return Err(Error::InvalidEnsemble(
                    "components act on different particles".into(),
                ));
            }
            s.require_normalized()?;
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(Self {
            components,
            visibility: None,
        })
    }

    pub fn pure(s: StateVector) -> Result<Self> {
        Self::new(vec![(1.0, s)])
    }

    /// V·|target⟩⟨target| + (1 − V)·I/d, with the identity part written as the
    /// uniform ensemble over computational basis states.
    pub fn white_noise(target: &StateVector, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::InvalidEnsemble(format!(
                "visibility {visibility} outside [0, 1]"
            )));
        }
        let dim = target.dim();
        let mut components = Vec::with_capacity(dim + 1);
        components.push((visibility, target.clone()));
        let noise = (1.0 - visibility) / dim as f64;
        for i in 0..dim {
            components.push((noise, StateVector::basis(target.labels().to_vec(), i)?));
        }
        let mut e = Self::new(components)?;
        e.visibility = Some(visibility);
        Ok(e)
    }

    pub fn components(&self) -> &[(f64, StateVector)] {
        &self.components
    }

    pub fn visibility(&self) -> Option<f64> {
        self.visibility
    }

    pub fn labels(&self) -> &[String] {
        self.components[0].1.labels()
    }

    pub fn expectation(&self, op: &DenseOperator) -> Result<f64> {
        self.components
            .iter()
            .map(|(w, s)| Ok(w * op.expectation(s)?))
            .sum()
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> &StateVector {
        if self.components.len() == 1 {
            return &self.components[0].1;
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (w, s) in &self.components {
            acc += w;
            if u < acc {
                return s;
            }
        }
        &self.components.last().expect("nonempty").1
    }
}

impl TryFrom<StateVector> for Ensemble {
    type Error = Error;

    fn try_from(s: StateVector) -> Result<Self> {
        Ensemble::pure(s)
    }
}

/// ⟨M⟩ = Σ wᵢ ⟨sᵢ|M|sᵢ⟩.
pub fn expectation_m(source: &Ensemble) -> Result<f64> {
    if source.labels() != PARTICLES {
        return Err(Error::LabelMismatch {
            left: PARTICLES.iter().map(|s| s.to_string()).collect(),
            right: source.labels().to_vec(),
        });
    }
    source.expectation(&realize_m())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub eigenvalues: Vec<f64>,
    pub max_eigenvalue: f64,
    pub top_multiplicity: usize,
    /// ⟨ε=±1|P_top|ε=±1⟩
    pub eps_plus_top_weight: f64,
    pub eps_minus_top_weight: f64,
    pub hermitian: bool,
    pub trace: f64,
    pub lhv_bound: f64,
    pub cirelson_bound: f64,
    pub quantum_bound: f64,
    pub pass: bool,
}

/// Diagonalizes M and confirms that its top eigenvalue is 4 and that
/// |ε=+1⟩ lies in the top eigenspace.
pub fn spectral_check_m() -> SpectralReport {
    let m = realize_m();
    let d = m.dim();
    let matrix = DMatrix::from_fn(d, d, |i, j| m.get(i, j));
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let max_eigenvalue = eigenvalues[0];
    let top: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| (eig.eigenvalues[i] - max_eigenvalue).abs() < 1e-8)
        .collect();
    let top_weight = |s: &StateVector| -> f64 {
        top.iter()
            .map(|&k| {
                let col = eig.eigenvectors.column(k);
                let overlap: C64 = col
                    .iter()
                    .zip(s.amplitudes())
                    .map(|(v, a)| v.conj() * a)
                    .sum();
                overlap.norm_sqr()
            })
            .sum()
    };
    let eps_plus_top_weight = top_weight(&epsilon_state(EpsilonSign::Plus));
    let eps_minus_top_weight = top_weight(&epsilon_state(EpsilonSign::Minus));
    let pass = (max_eigenvalue - QUANTUM_BOUND).abs() < 1e-10
        && (eps_plus_top_weight - 1.0).abs() < 1e-10
        && LHV_BOUND < CIRELSON_BOUND
        && CIRELSON_BOUND < QUANTUM_BOUND;
    SpectralReport {
        eigenvalues,
        max_eigenvalue,
        top_multiplicity: top.len(),
        eps_plus_top_weight,
        eps_minus_top_weight,
        hermitian: m.is_hermitian(1e-14),
        trace: m.trace().re,
        lhv_bound: LHV_BOUND,
        cirelson_bound: CIRELSON_BOUND,
        quantum_bound: QUANTUM_BOUND,
        pass,
    }
}

/// Width of the final bisection bracket.
pub const VISIBILITY_RESOLUTION: f64 = 1e-10;

/// Smallest visibility for which the white-noise mixture with `target`
/// exceeds the local realistic bound, located by bisection.
pub fn visibility_threshold(target: &StateVector) -> Result<f64> {
    let m = realize_m();
    let value = |v: f64| -> Result<f64> { Ensemble::white_noise(target, v)?.expectation(&m) };
    let full = value(1.0)?;
    if full <= LHV_BOUND {
        return Err(Error::NoThreshold(full));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if value(lo)? > LHV_BOUND {
        return Ok(0.0);
    }
    while hi - lo > VISIBILITY_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if value(mid)? > LHV_BOUND {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// (V, ⟨M⟩) over a grid of visibilities.
pub fn noise_scan(target: &StateVector, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let m = realize_m();
    grid.iter()
        .map(|&v| Ok((v, Ensemble::white_noise(target, v)?.expectation(&m)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

/// Joint-measurement apparatus at the middle station.
///
/// `A` reads (z2z3, x2x3) and `B` reads (z2x3, x2z3); each pair commutes, so
/// one apparatus reports both values in the same run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Apparatus {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub shots: u64,
    pub eta1: f64,
    pub eta23: f64,
    pub eta4: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            shots: 100_000,
            eta1: 1.0,
            eta23: 1.0,
            eta4: 1.0,
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be positive".into()));
        }
        for (name, eta) in [
            ("eta1", self.eta1),
            ("eta23", self.eta23),
            ("eta4", self.eta4),
        ] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {eta} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// One simulated trial. Outcomes are recorded even for sites that did not click.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub setting1: Basis,
    pub setting23: Apparatus,
    pub setting4: Basis,
    pub o1: i8,
    pub o23_first: i8,
    pub o23_second: i8,
    pub o4: i8,
    pub click1: bool,
    pub click23: bool,
    pub click4: bool,
}

/// Precomputed local measurements for the three stations.
struct Stations {
    middle_a: JointMeasurement,
    middle_b: JointMeasurement,
    site1: [JointMeasurement; 2],
    site4: [JointMeasurement; 2],
}

impl Stations {
    fn new() -> Result<Self> {
        let single = |s: &str| -> Result<JointMeasurement> {
            JointMeasurement::new(&[s.parse()?], &PARTICLES)
        };
        let pair = |a: &str, b: &str| -> Result<JointMeasurement> {
            JointMeasurement::new(&[a.parse()?, b.parse()?], &PARTICLES)
        };
        Ok(Self {
            middle_a: pair("Z2Z3", "X2X3")?,
            middle_b: pair("Z2X3", "X2Z3")?,
            site1: [single("Z1")?, single("X1")?],
            site4: [single("Z4")?, single("X4")?],
        })
    }
}

fn basis_index(b: Basis) -> usize {
    match b {
        Basis::Z => 0,
        Basis::X => 1,
    }
}

/// Independent random stream for one trial, a pure function of (seed, trial).
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn run_trial(cfg: &RunConfig, source: &Ensemble, st: &Stations, trial: u64) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, trial);
    let setting1 = if rng.random::<bool>() {
        Basis::X
    } else {
        Basis::Z
    };
    let setting23 = if rng.random::<bool>() {
        Apparatus::B
    } else {
        Apparatus::A
    };
    let setting4 = if rng.random::<bool>() {
        Basis::X
    } else {
        Basis::Z
    };
    let state = source.pick(&mut rng);

    let middle = match setting23 {
        Apparatus::A => &st.middle_a,
        Apparatus::B => &st.middle_b,
    };
    let (o23, state) = middle.sample(state, &mut rng)?;
    let (o1, state) = st.site1[basis_index(setting1)].sample(&state, &mut rng)?;
    let (o4, _) = st.site4[basis_index(setting4)].sample(&state, &mut rng)?;

    // clicks come after outcomes so that outcomes do not depend on the efficiencies
    let click1 = rng.random::<f64>() < cfg.eta1;
    let click23 = rng.random::<f64>() < cfg.eta23;
    let click4 = rng.random::<f64>() < cfg.eta4;
    Ok(TrialRecord {
        trial,
        setting1,
        setting23,
        setting4,
        o1: o1[0],
        o23_first: o23[0],
        o23_second: o23[1],
        o4: o4[0],
        click1,
        click23,
        click4,
    })
}

/// Simulates `cfg.shots` trials of the three-station experiment.
///
/// Settings are drawn uniformly and independently per trial. Each station's
/// outcome depends only on its own setting and the shared state.
pub fn sample_events(cfg: &RunConfig, source: &Ensemble) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    if source.labels() != PARTICLES {
        return Err(Error::LabelMismatch {
            left: PARTICLES.iter().map(|s| s.to_string()).collect(),
            right: source.labels().to_vec(),
        });
    }
    let st = Stations::new()?;
    (0..cfg.shots)
        .into_par_iter()
        .map(|t| run_trial(cfg, source, &st, t))
        .collect()
}

/// Which trials enter the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PostSelection {
    /// Keep only trials where all three stations clicked.
    EventReady,
    /// Ignore click flags; the lossless reference.
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
    pub per_term: BTreeMap<String, TermEstimate>,
    pub trials_used: u64,
}

/// Names of the M terms, with the settings that measure each one and which
/// of the two middle-station values it uses.
const TERM_SETTINGS: [(&str, Basis, Apparatus, Basis, usize); 4] = [
    ("Z1Z2Z3Z4", Basis::Z, Apparatus::A, Basis::Z, 0),
    ("X1X2X3X4", Basis::X, Apparatus::A, Basis::X, 1),
    ("Z1Z2X3X4", Basis::Z, Apparatus::B, Basis::X, 0),
    ("X1X2Z3Z4", Basis::X, Apparatus::B, Basis::Z, 1),
];

/// Estimates ⟨M⟩ term by term from the trials whose settings measure that
/// term, with binomial standard errors added in quadrature.
pub fn estimate_m(records: &[TrialRecord], postselect: PostSelection) -> Result<Estimate> {
    let kept: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| postselect == PostSelection::None || (r.click1 && r.click23 && r.click4))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptySelection);
    }
    let mut per_term = BTreeMap::new();
    let (mut estimate, mut variance) = (0.0, 0.0);
    for (name, s1, s23, s4, which) in TERM_SETTINGS {
        let products: Vec<f64> = kept
            .iter()
            .filter(|r| r.setting1 == s1 && r.setting23 == s23 && r.setting4 == s4)
            .map(|r| {
                let middle = if which == 0 {
                    r.o23_first
                } else {
                    r.o23_second
                };
                (r.o1 * middle * r.o4) as f64
            })
            .collect();
        if products.is_empty() {
            return Err(Error::EmptySelection);
        }
        let count = products.len() as f64;
        let mean = products.iter().sum::<f64>() / count;
        // ±1 outcomes: p = (1 + mean)/2, var(product) = 1 − mean²
        let term_var = ((1.0 - mean * mean) / count).max(0.0);
        estimate += mean;
        variance += term_var;
        per_term.insert(
            name.to_string(),
            TermEstimate {
                mean,
                stderr: term_var.sqrt(),
                count: products.len() as u64,
            },
        );
    }
    Ok(Estimate {
        estimate,
        stderr: variance.sqrt(),
        per_term,
        trials_used: kept.len() as u64,
    })
}

/// Counts trials with ideal-detector definite predictions broken: apparatus
/// A must give z2z3·x2x3 = ε and B must give z2x3·x2z3 = −ε.
pub fn middle_station_violations(records: &[TrialRecord], eps: EpsilonSign) -> usize {
    let e = eps.value() as i8;
    records
        .iter()
        .filter(|r| {
            let product = r.o23_first * r.o23_second;
            match r.setting23 {
                Apparatus::A => product != e,
                Apparatus::B => product != -e,
            }
        })
        .count()
}

/// Sample mean and standard error of one station's outcome for one setting.
pub fn single_site_mean(records: &[TrialRecord], site: u8, basis: Basis) -> (f64, f64) {
    let values: Vec<f64> = records
        .iter()
        .filter_map(|r| match site {
            1 if r.setting1 == basis => Some(r.o1 as f64),
            4 if r.setting4 == basis => Some(r.o4 as f64),
            _ => None,
        })
        .collect();
    let n = values.len() as f64;
    if values.is_empty() {
        return (0.0, f64::INFINITY);
    }
    let mean = values.iter().sum::<f64>() / n;
    (mean, ((1.0 - mean * mean) / n).max(0.0).sqrt())
}

/// Expectation of the product of two commuting Pauli strings.
pub fn joint_expectation(a: &Observable, b: &Observable, s: &StateVector) -> Result<f64> {
    let ra = a.realize(s.labels())?;
    let rb = b.realize(s.labels())?;
    ra.matmul(&rb)?.expectation(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::source_state;
    use crate::state::c;

    fn eps_plus() -> StateVector {
        epsilon_state(EpsilonSign::Plus)
    }

    #[test]
    fn m_is_hermitian_traceless() {
        let m = realize_m();
        assert!(m.is_hermitian(1e-15));
        assert_eq!(m.trace(), c(0.0, 0.0));
    }

    #[test]
    fn m_on_epsilon_states() {
        for eps in [EpsilonSign::Plus, EpsilonSign::Minus] {
            let e = Ensemble::pure(epsilon_state(eps)).unwrap();
            assert!((expectation_m(&e).unwrap() - 4.0).abs() < 1e-12);
        }
        let mixed = Ensemble::white_noise(&eps_plus(), 0.0).unwrap();
        assert!(expectation_m(&mixed).unwrap().abs() < 1e-12);
    }

    #[test]
    fn source_state_also_saturates() {
        // the swapping source is an equal superposition of the two ε states
        let e = Ensemble::pure(source_state()).unwrap();
        assert!((expectation_m(&e).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn affine_in_visibility() {
        let m = realize_m();
        for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let got = Ensemble::white_noise(&eps_plus(), v)
                .unwrap()
                .expectation(&m)
                .unwrap();
            assert!((got - 4.0 * v).abs() < 1e-12, "V = {v}: {got}");
        }
    }

    #[test]
    fn white_noise_reproduces_maximally_mixed_pauli_expectations() {
        let e = Ensemble::white_noise(&eps_plus(), 0.0).unwrap();
        for o in ["Z1", "X2", "Z1Z2", "X1X2X3X4", "Z1Z2Z3Z4"] {
            let op = o
                .parse::<Observable>()
                .unwrap()
                .realize(&PARTICLES)
                .unwrap();
            assert!(e.expectation(&op).unwrap().abs() < 1e-15, "{o}");
        }
        let id = DenseOperator::identity(16);
        assert!((e.expectation(&id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_one_half() {
        let v = visibility_threshold(&eps_plus()).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
    }

    #[test]
    fn no_threshold_for_weak_states() {
        let product = StateVector::basis(PARTICLES, 0).unwrap();
        assert!(matches!(
            visibility_threshold(&product),
            Err(Error::NoThreshold(_))
        ));
    }

    #[test]
    fn ensemble_validation() {
        let s = eps_plus();
        assert!(Ensemble::new(vec![(0.5, s.clone())]).is_err());
        assert!(Ensemble::new(vec![(1.5, s.clone()), (-0.5, s.clone())]).is_err());
        assert!(Ensemble::white_noise(&s, 1.2).is_err());
        let e = Ensemble::white_noise(&s, 0.3).unwrap();
        let total: f64 = e.components().iter().map(|(w, _)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(e.components().len(), 17);
    }

    #[test]
    fn config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.eta23 = 1.5;
        assert!(cfg.validate().is_err());
        cfg.eta23 = 1.0;
        cfg.shots = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn spectral_report() {
        let r = spectral_check_m();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.top_multiplicity, 2);
        assert!((r.eps_minus_top_weight - 1.0).abs() < 1e-10);
        assert!(r.lhv_bound < r.cirelson_bound && r.cirelson_bound < r.quantum_bound);
    }

    #[test]
    fn ideal_runs_never_break_definite_predictions() {
        let cfg = RunConfig {
            shots: 2_000,
            ..RunConfig::default()
        };
        for eps in [EpsilonSign::Plus, EpsilonSign::Minus] {
            let source = Ensemble::pure(epsilon_state(eps)).unwrap();
            let records = sample_events(&cfg, &source).unwrap();
            assert_eq!(middle_station_violations(&records, eps), 0);
            let est = estimate_m(&records, PostSelection::EventReady).unwrap();
            assert_eq!(est.estimate, 4.0);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn sampling_is_reproducible_per_trial() {
        let cfg = RunConfig {
            shots: 300,
            seed: 9,
            ..RunConfig::default()
        };
        let source = Ensemble::white_noise(&eps_plus(), 0.6).unwrap();
        let a = sample_events(&cfg, &source).unwrap();
        let b = sample_events(&RunConfig { shots: 100, ..cfg }, &source).unwrap();
        assert_eq!(&a[..100], &b[..]);
        assert_eq!(a, sample_events(&cfg, &source).unwrap());
    }

    #[test]
    fn efficiency_does_not_change_outcomes() {
        let source = Ensemble::pure(eps_plus()).unwrap();
        let full = sample_events(
            &RunConfig {
                shots: 500,
                ..RunConfig::default()
            },
            &source,
        )
        .unwrap();
        let lossy = sample_events(
            &RunConfig {
                shots: 500,
                eta23: 0.3,
                ..RunConfig::default()
            },
            &source,
        )
        .unwrap();
        for (a, b) in full.iter().zip(&lossy) {
            assert_eq!(
                (a.o1, a.o23_first, a.o23_second, a.o4),
                (b.o1, b.o23_first, b.o23_second, b.o4)
            );
            assert_eq!(a.click1, b.click1);
        }
        let kept = lossy.iter().filter(|r| r.click23).count() as f64 / 500.0;
        assert!((kept - 0.3).abs() < 0.1);
    }

    #[test]
    fn empty_selection_is_an_error() {
        let source = Ensemble::pure(eps_plus()).unwrap();
        let cfg = RunConfig {
            shots: 50,
            eta4: 0.0,
            ..RunConfig::default()
        };
        let records = sample_events(&cfg, &source).unwrap();
        assert_eq!(
            estimate_m(&records, PostSelection::EventReady).unwrap_err(),
            Error::EmptySelection
        );
        assert!(estimate_m(&records, PostSelection::None).is_ok());
        assert_eq!(
            estimate_m(&[], PostSelection::None).unwrap_err(),
            Error::EmptySelection
        );
    }

    #[test]
    fn joint_expectations_on_epsilon_states() {
        let zz: Observable = "Z2Z3".parse().unwrap();
        let xx: Observable = "X2X3".parse().unwrap();
        let zx: Observable = "Z2X3".parse().unwrap();
        let xz: Observable = "X2Z3".parse().unwrap();
        for eps in [EpsilonSign::Plus, EpsilonSign::Minus] {
            let s = epsilon_state(eps);
            assert!((joint_expectation(&zz, &xx, &s).unwrap() - eps.value()).abs() < 1e-12);
            assert!((joint_expectation(&zx, &xz, &s).unwrap() + eps.value()).abs() < 1e-12);
        }
    }
}
