//! Two-photon linear optics for the selector acting on photons 2 and 3.
//!
//! Photons 2 and 3 enter on spatial modes `in2` and `in3`. A polarizing beam
//! splitter sends them to `out_c` and `out_d`, and wave plates may sit on any
//! of the four spatial modes. Photons 1 and 4 stay as polarization qubits.
//!
//! The photon pair is stored as a symmetric two-particle amplitude
//! `ψ(m, n)` over the eight optical modes, so a mode transformation `W` acts
//! as `ψ ↦ W ψ Wᵀ` and doubly occupied modes need no special casing. The
//! occupation-number amplitudes follow the usual bosonic convention:
//! `|1_m 1_n⟩ = a†_m a†_n |0⟩` carries `√2 ψ(m, n)` and
//! `|2_m⟩ = (a†_m)²/√2 |0⟩` carries `ψ(m, m)`.

mod layout;
mod selection;

pub use layout::{Element, ElementKind, Inventory, Layout, PbsPhase};
pub use selection::{
    candidate_layouts, canonical_layout, clifford_frames, coincidence_project,
    search_all_conventions, search_layouts, verify_selection, Coincidence, Frame, FrameElement,
    SearchOutcome, SelectionReport, SlotGrammar,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bell::PARTICLES;
use crate::error::{Error, Result};
use crate::state::{c, Pol, StateVector, C64};

const R2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Number of optical modes: four spatial modes times two polarizations.
pub const MODES: usize = 8;
const QUBIT_BLOCKS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spatial {
    #[serde(rename = "in2")]
    In2,
    #[serde(rename = "in3")]
    In3,
    #[serde(rename = "out_c")]
    OutC,
    #[serde(rename = "out_d")]
    OutD,
}

impl Spatial {
    pub const ALL: [Spatial; 4] = [Spatial::In2, Spatial::In3, Spatial::OutC, Spatial::OutD];

    pub fn name(self) -> &'static str {
        match self {
            Spatial::In2 => "in2",
            Spatial::In3 => "in3",
            Spatial::OutC => "out_c",
            Spatial::OutD => "out_d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpticalMode {
    pub spatial: Spatial,
    pub pol: Pol,
}

impl OpticalMode {
    pub const fn new(spatial: Spatial, pol: Pol) -> Self {
        Self { spatial, pol }
    }

    pub fn index(self) -> usize {
        self.spatial.index() * 2 + self.pol.bit()
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            spatial: Spatial::ALL[i / 2],
            pol: Pol::from_bit(i % 2),
        }
    }
}

/// Right circular polarization (|H⟩ + i|V⟩)/√2 as a Jones vector.
pub fn circular_right() -> [C64; 2] {
    [c(R2, 0.0), c(0.0, R2)]
}

/// Left circular polarization (|H⟩ − i|V⟩)/√2 as a Jones vector.
pub fn circular_left() -> [C64; 2] {
    [c(R2, 0.0), c(0.0, -R2)]
}

/// One occupation-number component of a [`HybridState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Occupation {
    pub qubit1: Pol,
    pub qubit4: Pol,
    /// The two occupied modes, ordered; equal entries mean a doubly occupied mode.
    pub modes: (OpticalMode, OpticalMode),
    pub amplitude: C64,
}

/// Qubits 1 and 4 together with exactly two photons in the optical modes.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    // index: ((q1 * 2 + q4) * MODES + m) * MODES + n, symmetric in (m, n)
    amps: Vec<C64>,
}

fn idx(block: usize, m: usize, n: usize) -> usize {
    (block * MODES + m) * MODES + n
}

impl HybridState {
    pub fn zero() -> Self {
        Self {
            amps: vec![c(0.0, 0.0); QUBIT_BLOCKS * MODES * MODES],
        }
    }

    /// Builds a state from occupation-number amplitudes.
    pub fn from_occupations(entries: &[(Pol, Pol, OpticalMode, OpticalMode, C64)]) -> Self {
        let mut s = Self::zero();
        for &(q1, q4, a, b, amp) in entries {
            let block = q1.bit() * 2 + q4.bit();
            let (m, n) = (a.index(), b.index());
            if m == n {
                s.amps[idx(block, m, m)] += amp;
            } else {
                s.amps[idx(block, m, n)] += amp * R2;
                s.amps[idx(block, n, m)] += amp * R2;
            }
        }
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Nonzero occupation-number amplitudes in mode order.
    pub fn occupations(&self) -> Vec<Occupation> {
        let mut out = Vec::new();
        for block in 0..QUBIT_BLOCKS {
            for m in 0..MODES {
                for n in m..MODES {
                    let amp = if m == n {
                        self.amps[idx(block, m, m)]
                    } else {
                        self.amps[idx(block, m, n)] * std::f64::consts::SQRT_2
                    };
                    if amp.norm() > 1e-15 {
                        out.push(Occupation {
                            qubit1: Pol::from_bit(block >> 1),
                            qubit4: Pol::from_bit(block & 1),
                            modes: (OpticalMode::from_index(m), OpticalMode::from_index(n)),
                            amplitude: amp,
                        });
                    }
                }
            }
        }
        out
    }

    /// Total weight of components whose two photons sit in the given pair of
    /// spatial modes (the same mode twice means both photons there).
    pub fn spatial_weight(&self, a: Spatial, b: Spatial) -> f64 {
        let mut w = 0.0;
        for block in 0..QUBIT_BLOCKS {
            for m in 0..MODES {
                for n in 0..MODES {
                    let (sm, sn) = (
                        OpticalMode::from_index(m).spatial,
                        OpticalMode::from_index(n).spatial,
                    );
                    if (sm == a && sn == b) || (a != b && sm == b && sn == a) {
                        w += self.amps[idx(block, m, n)].norm_sqr();
                    }
                }
            }
        }
        w
    }

    /// Applies a single-photon mode transformation `W` (row-major, 8×8) to both photons.
    pub fn transform(&self, w: &[C64; MODES * MODES]) -> Self {
        let mut out = Self::zero();
        let mut tmp = [c(0.0, 0.0); MODES * MODES];
        for block in 0..QUBIT_BLOCKS {
            // tmp = W ψ
            for i in 0..MODES {
                for n in 0..MODES {
                    let mut acc = c(0.0, 0.0);
                    for m in 0..MODES {
                        acc += w[i * MODES + m] * self.amps[idx(block, m, n)];
                    }
                    tmp[i * MODES + n] = acc;
                }
            }
            // out = tmp Wᵀ
            for i in 0..MODES {
                for j in 0..MODES {
                    let mut acc = c(0.0, 0.0);
                    for n in 0..MODES {
                        acc += tmp[i * MODES + n] * w[j * MODES + n];
                    }
                    out.amps[idx(block, i, j)] = acc;
                }
            }
        }
        out
    }

    /// For a state with one photon in `out_c` and one in `out_d`, the
    /// equivalent four-qubit polarization state on particles (1, 2, 3, 4),
    /// where "2" is the photon leaving through `out_c` and "3" the one
    /// leaving through `out_d`. Components outside that pattern are dropped.
    pub fn coincidence_qubits(&self) -> StateVector {
        let mut amplitudes = vec![c(0.0, 0.0); 16];
        for block in 0..QUBIT_BLOCKS {
            let (q1, q4) = (block >> 1, block & 1);
            for pc in 0..2 {
                for pd in 0..2 {
                    let m = OpticalMode::new(Spatial::OutC, Pol::from_bit(pc)).index();
                    let n = OpticalMode::new(Spatial::OutD, Pol::from_bit(pd)).index();
                    let q = (q1 << 3) | (pc << 2) | (pd << 1) | q4;
                    amplitudes[q] = self.amps[idx(block, m, n)] * std::f64::consts::SQRT_2;
                }
            }
        }
        StateVector::new(PARTICLES, amplitudes).expect("sixteen amplitudes")
    }

    fn project_coincidence(&self) -> Self {
        let mut out = Self::zero();
        for block in 0..QUBIT_BLOCKS {
            for m in 0..MODES {
                for n in 0..MODES {
                    let (sm, sn) = (
                        OpticalMode::from_index(m).spatial,
                        OpticalMode::from_index(n).spatial,
                    );
                    let hit = matches!(
                        (sm, sn),
                        (Spatial::OutC, Spatial::OutD) | (Spatial::OutD, Spatial::OutC)
                    );
                    if hit {
                        out.amps[idx(block, m, n)] = self.amps[idx(block, m, n)];
                    }
                }
            }
        }
        out
    }

    fn scaled(mut self, f: f64) -> Self {
        for a in &mut self.amps {
            *a *= f;
        }
        self
    }
}

/// Loads a four-photon polarization state into the optical picture: photon 2
/// on `in2`, photon 3 on `in3`, photons 1 and 4 carried as qubits.
pub fn embed(source: &StateVector) -> Result<HybridState> {
    source.require_normalized()?;
    if source.num_qubits() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: source.num_qubits(),
        });
    }
    let s = source.reorder(&PARTICLES)?;
    let mut out = HybridState::zero();
    for (index, amp) in s.amplitudes().iter().enumerate() {
        let (q1, q2, q3, q4) = (
            (index >> 3) & 1,
            (index >> 2) & 1,
            (index >> 1) & 1,
            index & 1,
        );
        let block = q1 * 2 + q4;
        let m = OpticalMode::new(Spatial::In2, Pol::from_bit(q2)).index();
        let n = OpticalMode::new(Spatial::In3, Pol::from_bit(q3)).index();
        out.amps[idx(block, m, n)] += amp * R2;
        out.amps[idx(block, n, m)] += amp * R2;
    }
    Ok(out)
}

/// Polarization unitary of a quarter-wave plate at 45°: |R⟩ ↦ |H⟩, |L⟩ ↦ |V⟩.
pub fn qwp45_matrix() -> [[C64; 2]; 2] {
    // |H⟩⟨R| + |V⟩⟨L|
    [[c(R2, 0.0), c(0.0, -R2)], [c(R2, 0.0), c(0.0, R2)]]
}

/// Polarization unitary of the half-wave plate: H ↦ H, V ↦ −V, which swaps R and L.
pub fn hwp_matrix() -> [[C64; 2]; 2] {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
}

fn plate_unitary(target: Spatial, jones: [[C64; 2]; 2]) -> [C64; MODES * MODES] {
    let mut w = [c(0.0, 0.0); MODES * MODES];
    for i in 0..MODES {
        w[i * MODES + i] = c(1.0, 0.0);
    }
    let base = target.index() * 2;
    for r in 0..2 {
        for col in 0..2 {
            w[(base + r) * MODES + base + col] = jones[r][col];
        }
    }
    w
}

/// The PBS transmits H from `in2` to `out_c` and from `in3` to `out_d`, and
/// reflects V across (`in2` to `out_d`, `in3` to `out_c`) with phase `r`.
/// The output ports map back to the inputs so that the whole map is unitary.
fn pbs_unitary(r: C64) -> [C64; MODES * MODES] {
    let mut w = [c(0.0, 0.0); MODES * MODES];
    let one = c(1.0, 0.0);
    let mut set = |from: (Spatial, Pol), to: (Spatial, Pol), v: C64| {
        let f = OpticalMode::new(from.0, from.1).index();
        let t = OpticalMode::new(to.0, to.1).index();
        w[t * MODES + f] = v;
    };
    use Spatial::*;
    set((In2, Pol::H), (OutC, Pol::H), one);
    set((In3, Pol::H), (OutD, Pol::H), one);
    set((In2, Pol::V), (OutD, Pol::V), r);
    set((In3, Pol::V), (OutC, Pol::V), r);
    set((OutC, Pol::H), (In2, Pol::H), one);
    set((OutD, Pol::H), (In3, Pol::H), one);
    set((OutD, Pol::V), (In2, Pol::V), r.conj());
    set((OutC, Pol::V), (In3, Pol::V), r.conj());
    w
}

/// Single-photon mode transformation of one element.
pub fn element_unitary(e: &Element, phase: PbsPhase) -> [C64; MODES * MODES] {
    match *e {
        Element::Qwp45(t) => plate_unitary(t, qwp45_matrix()),
        Element::Hwp(t) => plate_unitary(t, hwp_matrix()),
        Element::Pbs(..) => pbs_unitary(phase.value()),
    }
}

pub fn apply_element(s: &HybridState, e: &Element, phase: PbsPhase) -> HybridState {
    s.transform(&element_unitary(e, phase))
}

/// Embeds `source` and applies every element of `layout` in order.
pub fn run_layout(source: &StateVector, layout: &Layout) -> Result<HybridState> {
    layout.validate()?;
    let mut s = embed(source)?;
    for e in layout.elements() {
        s = apply_element(&s, e, layout.pbs_phase());
    }
    Ok(s)
}
