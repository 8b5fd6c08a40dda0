//! Dense pure-state linear algebra for a handful of polarization qubits.
//!
//! Basis ordering is fixed across the crate: the first particle label is the
//! most significant bit of the amplitude index, and bit value 0 is |H⟩ while
//! 1 is |V⟩. For labels `["1", "2"]` the amplitudes are ordered
//! `HH, HV, VH, VV`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on the squared norm accepted as "normalized".
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Tolerance on commutator norms when checking that observables are jointly measurable.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-10;

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Linear polarization basis states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub fn bit(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit & 1 == 0 {
            Pol::H
        } else {
            Pol::V
        }
    }
}

/// A pure state of `n` labelled qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    labels: Vec<String>,
    amplitudes: Vec<C64>,
}

fn check_unique(labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

impl StateVector {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        amplitudes: Vec<C64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_unique(&labels)?;
        let expected = 1usize << labels.len();
        if amplitudes.len() != expected {
            return Err(Error::AmplitudeLength {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(Self { labels, amplitudes })
    }

    /// Product state with one polarization per label.
    pub fn product<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        pols: &[Pol],
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != pols.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                found: pols.len(),
            });
        }
        let index = pols.iter().fold(0usize, |acc, p| (acc << 1) | p.bit());
        Self::basis(labels, index)
    }

    /// Computational basis state with the given amplitude index.
    pub fn basis<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        index: usize,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let dim = 1usize << labels.len();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(labels, amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOLERANCE
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() < NORM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotNormalized(n))
        }
    }

    /// Rescales to unit norm. A zero vector is returned unchanged.
    pub fn normalize(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
        self
    }

    pub fn scale(mut self, factor: C64) -> Self {
        for a in &mut self.amplitudes {
            *a *= factor;
        }
        self
    }

    fn require_same_labels(&self, other: &Self) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::LabelMismatch {
                left: self.labels.clone(),
                right: other.labels.clone(),
            });
        }
        Ok(())
    }

    /// Elementwise sum `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_labels(other)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            labels: self.labels.clone(),
            amplitudes,
        })
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.clone().scale(c(-1.0, 0.0)))
    }

    /// Kronecker product; the labels of `other` follow those of `self`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if let Some(l) = other.labels.iter().find(|l| self.labels.contains(l)) {
            return Err(Error::LabelCollision(l.clone()));
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        Ok(Self { labels, amplitudes })
    }

    /// Re-expresses the same state with qubits in a different label order.
    pub fn reorder<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                found: order.len(),
            });
        }
        let n = self.labels.len();
        // position in the old layout of each new qubit
        let mut source = Vec::with_capacity(n);
        for l in order {
            let l = l.as_ref();
            let pos = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            if source.contains(&pos) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            source.push(pos);
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); self.dim()];
        for (new_index, amp) in amplitudes.iter_mut().enumerate() {
            let mut old_index = 0usize;
            for (k, &pos) in source.iter().enumerate() {
                let bit = (new_index >> (n - 1 - k)) & 1;
                old_index |= bit << (n - 1 - pos);
            }
            *amp = self.amplitudes[old_index];
        }
        Ok(Self {
            labels: order.iter().map(|s| s.as_ref().to_string()).collect(),
            amplitudes,
        })
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.require_same_labels(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_labels(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// |⟨self|other⟩|², the fidelity between two normalized pure states.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Single-qubit factor of a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    I,
    X,
    Z,
}

impl Axis {
    fn entry(self, row: usize, col: usize) -> f64 {
        match self {
            Axis::I => (row == col) as u8 as f64,
            Axis::X => (row != col) as u8 as f64,
            Axis::Z => {
                if row != col {
                    0.0
                } else if row == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    fn letter(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Z => 'Z',
        }
    }
}

/// A tensor product of X, Z and identity factors on named particles.
///
/// Parses from compact strings such as `"Z1Z2X3X4"` or `"z2 z3"`; each factor
/// is an axis letter followed by the particle label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Observable {
    factors: BTreeMap<String, Axis>,
}

impl Observable {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: impl Into<String>, axis: Axis) -> Self {
        self.factors.insert(label.into(), axis);
        self
    }

    pub fn factors(&self) -> &BTreeMap<String, Axis> {
        &self.factors
    }

    pub fn axis(&self, label: &str) -> Axis {
        self.factors.get(label).copied().unwrap_or(Axis::I)
    }

    /// Realizes the operator on the given ordered label list.
    pub fn realize<S: AsRef<str>>(&self, labels: &[S]) -> Result<DenseOperator> {
        for l in self.factors.keys() {
            if !labels.iter().any(|x| x.as_ref() == l) {
                return Err(Error::UnknownLabel(l.clone()));
            }
        }
        let axes: Vec<Axis> = labels.iter().map(|l| self.axis(l.as_ref())).collect();
        let n = axes.len();
        let dim = 1usize << n;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for row in 0..dim {
            for col in 0..dim {
                let mut v = 1.0;
                for (k, axis) in axes.iter().enumerate() {
                    let shift = n - 1 - k;
                    v *= axis.entry((row >> shift) & 1, (col >> shift) & 1);
                    if v == 0.0 {
                        break;
                    }
                }
                entries[row * dim + col] = C64::new(v, 0.0);
            }
        }
        Ok(DenseOperator { dim, entries })
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (label, axis) in &self.factors {
            if *axis != Axis::I {
                write!(f, "{}{}", axis.letter(), label)?;
                any = true;
            }
        }
        if !any {
            write!(f, "I")?;
        }
        Ok(())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut obs = Observable::identity();
        let mut current: Option<(Axis, String)> = None;
        let flush = |cur: Option<(Axis, String)>, obs: &mut Observable| -> Result<()> {
            if let Some((axis, label)) = cur {
                if label.is_empty() || obs.factors.contains_key(&label) {
                    return Err(Error::ObservableParse(s.to_string()));
                }
                obs.factors.insert(label, axis);
            }
            Ok(())
        };
        for ch in s.chars() {
            let axis = match ch.to_ascii_uppercase() {
                'X' => Some(Axis::X),
                'Z' => Some(Axis::Z),
                'I' => Some(Axis::I),
                _ => None,
            };
            if let Some(axis) = axis {
                flush(current.take(), &mut obs)?;
                current = Some((axis, String::new()));
            } else if ch.is_whitespace() || ch == '·' || ch == '*' {
                continue;
            } else if let Some((_, label)) = current.as_mut() {
                label.push(ch);
            } else {
                return Err(Error::ObservableParse(s.to_string()));
            }
        }
        flush(current.take(), &mut obs)?;
        Ok(obs)
    }
}

/// A square complex matrix acting on `log2(dim)` qubits, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl DenseOperator {
    pub fn from_rows(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.require_dim(rhs.dim)?;
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.entries[i * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * rhs.entries[k * d + j];
                }
            }
        }
        Ok(Self { dim: d, entries })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.require_dim(rhs.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                entries[j * d + i] = self.entries[i * d + j].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<f64> {
        self.require_dim(rhs.dim)?;
        Ok(self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint())
            .map(|d| d < tol)
            .unwrap_or(false)
    }

    /// Frobenius norm of `[self, rhs]`.
    pub fn commutator_norm(&self, rhs: &Self) -> Result<f64> {
        let ab = self.matmul(rhs)?;
        let ba = rhs.matmul(self)?;
        Ok(ab.add(&ba.scale(c(-1.0, 0.0)))?.norm())
    }

    fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        Ok(())
    }

    /// Matrix-vector product; labels are carried over unchanged.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.require_dim(s.dim())?;
        let d = self.dim;
        let amplitudes = (0..d)
            .map(|i| {
                self.entries[i * d..(i + 1) * d]
                    .iter()
                    .zip(&s.amplitudes)
                    .map(|(m, a)| m * a)
                    .sum()
            })
            .collect();
        Ok(StateVector {
            labels: s.labels.clone(),
            amplitudes,
        })
    }

    /// ⟨s|op|s⟩ for a normalized `s`; the real part is returned.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        s.require_normalized()?;
        let value = s.inner(&self.apply(s)?)?;
        debug_assert!(
            !self.is_hermitian(1e-12) || value.im.abs() < 1e-12,
            "Hermitian expectation has imaginary part {}",
            value.im
        );
        Ok(value.re)
    }
}

/// Projective joint measurement of pairwise commuting Pauli strings.
///
/// Outcomes are reported in the order the observables were given; each is
/// `+1` or `-1`.
#[derive(Debug, Clone)]
pub struct JointMeasurement {
    labels: Vec<String>,
    observables: Vec<Observable>,
    // one projector per sign pattern; bit i of the pattern index set means outcome -1 for observable i
    projectors: Vec<DenseOperator>,
}

impl JointMeasurement {
    pub fn new<S: AsRef<str>>(observables: &[Observable], labels: &[S]) -> Result<Self> {
        let realized = observables
            .iter()
            .map(|o| o.realize(labels))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..realized.len() {
            for j in i + 1..realized.len() {
                if realized[i].commutator_norm(&realized[j])? >= COMMUTATOR_TOLERANCE {
                    return Err(Error::NonCommuting(
                        observables[i].to_string(),
                        observables[j].to_string(),
                    ));
                }
            }
        }
        let dim = 1usize << labels.len();
        let identity = DenseOperator::identity(dim);
        let mut projectors = Vec::with_capacity(1 << realized.len());
        for pattern in 0..(1usize << realized.len()) {
            let mut p = identity.clone();
            for (i, op) in realized.iter().enumerate() {
                let sign = if (pattern >> i) & 1 == 0 { 0.5 } else { -0.5 };
                let factor = identity.scale(c(0.5, 0.0)).add(&op.scale(c(sign, 0.0)))?;
                p = p.matmul(&factor)?;
            }
            projectors.push(p);
        }
        Ok(Self {
            labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            observables: observables.to_vec(),
            projectors,
        })
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    fn outcomes(&self, pattern: usize) -> Vec<i8> {
        (0..self.observables.len())
            .map(|i| if (pattern >> i) & 1 == 0 { 1 } else { -1 })
            .collect()
    }

    /// Born probabilities of every outcome pattern, with the outcomes.
    pub fn distribution(&self, s: &StateVector) -> Result<Vec<(Vec<i8>, f64)>> {
        self.check_state(s)?;
        self.projectors
            .iter()
            .enumerate()
            .map(|(pattern, p)| Ok((self.outcomes(pattern), p.apply(s)?.norm_sqr())))
            .collect()
    }

    fn check_state(&self, s: &StateVector) -> Result<()> {
        if s.labels != self.labels {
            return Err(Error::LabelMismatch {
                left: self.labels.clone(),
                right: s.labels.clone(),
            });
        }
        s.require_normalized()
    }

    /// Samples an outcome pattern with Born probability and returns it with
    /// the renormalized post-measurement state.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        s: &StateVector,
        rng: &mut R,
    ) -> Result<(Vec<i8>, StateVector)> {
        self.check_state(s)?;
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (pattern, p) in self.projectors.iter().enumerate() {
            let projected = p.apply(s)?;
            let prob = projected.norm_sqr();
            if prob <= 0.0 {
                continue;
            }
            cumulative += prob;
            chosen = Some((pattern, projected));
            if u < cumulative {
                break;
            }
        }
        // rounding can leave u just above the final cumulative sum; keep the last nonzero branch
        let (pattern, projected) = chosen.expect("projectors resolve the identity");
        Ok((self.outcomes(pattern), projected.normalize()))
    }
}

/// One-shot joint measurement of commuting observables on `s`'s own labels.
pub fn measure_joint<R: Rng + ?Sized>(
    s: &StateVector,
    commuting: &[Observable],
    rng: &mut R,
) -> Result<(Vec<i8>, StateVector)> {
    JointMeasurement::new(commuting, s.labels())?.sample(s, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn psi_minus(a: &str, b: &str) -> StateVector {
        StateVector::new(
            [a, b],
            vec![c(0.0, 0.0), c(H, 0.0), c(-H, 0.0), c(0.0, 0.0)],
        )
        .unwrap()
    }

    fn obs(s: &str) -> Observable {
        s.parse().unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let h1 = StateVector::product(["1"], &[Pol::H]).unwrap();
        let h2 = StateVector::product(["2"], &[Pol::H]).unwrap();
        let t = h1.tensor(&h2).unwrap();
        assert_eq!(t.labels(), ["1", "2"]);
        assert_eq!(t.amplitudes()[0], c(1.0, 0.0));
        assert!(t.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn tensor_of_two_singlets() {
        // hand expansion of (HV - VH)(HV - VH)/2
        let s = psi_minus("1", "2").tensor(&psi_minus("3", "4")).unwrap();
        let expect = [(0b0101, 0.5), (0b0110, -0.5), (0b1001, -0.5), (0b1010, 0.5)];
        for (i, a) in s.amplitudes().iter().enumerate() {
            let want = expect
                .iter()
                .find(|(k, _)| *k == i)
                .map_or(0.0, |(_, v)| *v);
            assert!((a - c(want, 0.0)).norm() < 1e-15, "index {i:04b}");
        }
    }

    #[test]
    fn tensor_rejects_shared_labels() {
        let err = psi_minus("1", "2")
            .tensor(&psi_minus("2", "3"))
            .unwrap_err();
        assert_eq!(err, Error::LabelCollision("2".into()));
    }

    #[test]
    fn pauli_matrices() {
        let z = obs("Z1").realize(&["1"]).unwrap();
        assert_eq!(
            z.entries(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]
        );
        let x = obs("X1").realize(&["1"]).unwrap();
        assert_eq!(
            x.entries(),
            &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]
        );
    }

    #[test]
    fn realize_unknown_label() {
        assert_eq!(
            obs("Z5").realize(&["1", "2"]).unwrap_err(),
            Error::UnknownLabel("5".into())
        );
    }

    #[test]
    fn parse_observables() {
        let o = obs("z1·z2x3 X4");
        assert_eq!(o.axis("1"), Axis::Z);
        assert_eq!(o.axis("3"), Axis::X);
        assert_eq!(o.axis("4"), Axis::X);
        assert_eq!(o.to_string(), "Z1Z2X3X4");
        assert!("Q1".parse::<Observable>().is_err());
        assert!("Z1Z1".parse::<Observable>().is_err());
    }

    #[test]
    fn swap_pair_products_commute() {
        let labels = ["1", "2", "3", "4"];
        let zz = obs("Z2Z3").realize(&labels).unwrap();
        let xx = obs("X2X3").realize(&labels).unwrap();
        let zx = zz.matmul(&xx).unwrap();
        let xz = xx.matmul(&zz).unwrap();
        assert_eq!(zx.max_abs_diff(&xz).unwrap(), 0.0);
        let z2 = obs("Z2").realize(&labels).unwrap();
        assert!(
            z2.commutator_norm(&obs("X2").realize(&labels).unwrap())
                .unwrap()
                > 1.0
        );
    }

    #[test]
    fn singlet_eigenvalues() {
        let s = psi_minus("1", "2");
        let zz = obs("Z1Z2").realize(s.labels()).unwrap();
        let out = zz.apply(&s).unwrap();
        assert!(out.max_abs_diff(&s.clone().scale(c(-1.0, 0.0))).unwrap() < 1e-15);
        assert!((zz.expectation(&s).unwrap() + 1.0).abs() < 1e-15);
        assert!(DenseOperator::identity(4).apply(&s).unwrap() == s);
    }

    #[test]
    fn expectation_requires_normalized_state() {
        let s = psi_minus("1", "2").scale(c(2.0, 0.0));
        let zz = obs("Z1Z2").realize(s.labels()).unwrap();
        assert!(matches!(zz.expectation(&s), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let s = psi_minus("1", "2");
        assert!(matches!(
            DenseOperator::identity(8).apply(&s),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn x_on_h_is_zero_on_average() {
        let h = StateVector::product(["1"], &[Pol::H]).unwrap();
        assert_eq!(
            obs("X1").realize(&["1"]).unwrap().expectation(&h).unwrap(),
            0.0
        );
    }

    #[test]
    fn inner_products() {
        let m = psi_minus("1", "2");
        let p = StateVector::new(
            ["1", "2"],
            vec![c(0.0, 0.0), c(H, 0.0), c(H, 0.0), c(0.0, 0.0)],
        )
        .unwrap();
        assert!((m.inner(&m).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(m.inner(&p).unwrap().norm() < 1e-15);
        let conj = StateVector::new(["1"], vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let h = StateVector::product(["1"], &[Pol::H]).unwrap();
        assert_eq!(conj.inner(&h).unwrap(), c(0.0, -1.0));
        assert!(m.inner(&psi_minus("1", "3")).is_err());
    }

    #[test]
    fn reorder_moves_bits() {
        let s = StateVector::product(["1", "2", "3"], &[Pol::V, Pol::H, Pol::H]).unwrap();
        let r = s.reorder(&["2", "3", "1"]).unwrap();
        assert_eq!(r.amplitudes()[0b001], c(1.0, 0.0));
        assert_eq!(r.reorder(&["1", "2", "3"]).unwrap(), s);
        assert!(s.reorder(&["1", "1", "2"]).is_err());
    }

    #[test]
    fn joint_measurement_rejects_non_commuting() {
        let s = psi_minus("1", "2");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = measure_joint(&s, &[obs("Z1"), obs("X1")], &mut rng).unwrap_err();
        assert!(matches!(err, Error::NonCommuting(..)));
    }

    #[test]
    fn measure_definite_outcome() {
        let h = StateVector::product(["1"], &[Pol::H]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (o, post) = measure_joint(&h, &[obs("Z1")], &mut rng).unwrap();
            assert_eq!(o, vec![1]);
            assert_eq!(post, h);
        }
    }

    #[test]
    fn born_frequencies_within_five_standard_errors() {
        // cos²(0.4) vs sin²(0.4) for Z on a real rotated state
        let (a, b) = (0.4f64.cos(), 0.4f64.sin());
        let s = StateVector::new(["1"], vec![c(a, 0.0), c(0.0, b)]).unwrap();
        let m = JointMeasurement::new(&[obs("Z1")], &["1"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let shots = 20_000;
        let plus = (0..shots)
            .filter(|_| m.sample(&s, &mut rng).unwrap().0[0] == 1)
            .count() as f64;
        let p = a * a;
        let se = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((plus / shots as f64 - p).abs() < 5.0 * se);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn state(n: usize) -> impl Strategy<Value = Vec<C64>> {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n)
                .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect())
        }

        fn pauli_string() -> impl Strategy<Value = Observable> {
            prop::collection::vec(prop_oneof![Just(Axis::I), Just(Axis::X), Just(Axis::Z)], 3)
                .prop_map(|axes| {
                    axes.into_iter()
                        .enumerate()
                        .fold(Observable::identity(), |o, (i, a)| {
                            o.with((i + 1).to_string(), a)
                        })
                })
        }

        proptest! {
            #[test]
            fn norm_is_multiplicative(a in state(2), b in state(1)) {
                let a = StateVector::new(["1", "2"], a).unwrap();
                let b = StateVector::new(["3"], b).unwrap();
                let t = a.tensor(&b).unwrap();
                prop_assert!((t.norm() - a.norm() * b.norm()).abs() < 1e-12);
            }

            #[test]
            fn tensor_associative_up_to_reordering(a in state(1), b in state(1), d in state(1)) {
                let a = StateVector::new(["1"], a).unwrap();
                let b = StateVector::new(["2"], b).unwrap();
                let d = StateVector::new(["3"], d).unwrap();
                let left = a.tensor(&b).unwrap().tensor(&d).unwrap();
                let right = a.tensor(&b.tensor(&d).unwrap()).unwrap();
                prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-15);
                let swapped = d.tensor(&a).unwrap().tensor(&b).unwrap().reorder(&["1", "2", "3"]).unwrap();
                prop_assert!(left.max_abs_diff(&swapped).unwrap() < 1e-15);
            }

            #[test]
            fn pauli_strings_square_to_identity(p in pauli_string()) {
                let m = p.realize(&["1", "2", "3"]).unwrap();
                prop_assert!(m.is_hermitian(1e-12));
                let sq = m.matmul(&m).unwrap();
                prop_assert!(sq.max_abs_diff(&DenseOperator::identity(8)).unwrap() < 1e-12);
            }
        }
    }
}
