use rayon::prelude::*;
use serde::Serialize;

use super::{run_layout, Element, HybridState, Inventory, Layout, PbsPhase, Spatial};
use crate::bell::{epsilon_state, source_state, EpsilonSign};
use crate::error::{Error, Result};
use crate::state::{c, StateVector, C64, NORM_TOLERANCE};

/// Result of post-selecting one photon in each output port.
#[derive(Debug, Clone)]
pub struct Coincidence {
    pub probability: f64,
    /// Renormalized state given a coincidence; `None` when the probability is zero.
    pub conditional: Option<HybridState>,
}

/// Projects onto the components with exactly one photon in `out_c` and one
/// in `out_d`, any polarizations.
pub fn coincidence_project(s: &HybridState) -> Result<Coincidence> {
    let n = s.norm_sqr();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(n));
    }
    let projected = s.project_coincidence();
    let probability = projected.norm_sqr();
    let conditional = (probability > 0.0).then(|| projected.scaled(probability.sqrt().recip()));
    Ok(Coincidence {
        probability,
        conditional,
    })
}

type Jones = [[C64; 2]; 2];

fn mul(a: &Jones, b: &Jones) -> Jones {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Removes the global phase: the first nonzero entry becomes real and positive.
fn canonical(m: Jones) -> Jones {
    let lead = m
        .iter()
        .flatten()
        .copied()
        .find(|z| z.norm() > 1e-9)
        .expect("unitary");
    let phase = lead.conj() / lead.norm();
    m.map(|row| row.map(|z| z * phase))
}

fn close(a: &Jones, b: &Jones) -> bool {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| (x - y).norm() < 1e-9)
}

/// A local polarization frame on one output port: a single-qubit Clifford
/// unitary and the generator word that produces it (`H`, `S`, read right to left).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameElement {
    pub word: String,
    pub matrix: Jones,
}

/// The 24 single-qubit Clifford unitaries modulo global phase, in
/// breadth-first order from the identity.
///
/// Every element of the apparatus (the 45° quarter-wave plate, the half-wave
/// plate, and the PBS reflection phase) lies in this group, so any
/// polarization frame a layout leaves on its outputs is one of these.
pub fn clifford_frames() -> Vec<FrameElement> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let gens: [(&str, Jones); 2] = [
        ("H", [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]),
        (
            "S",
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]],
        ),
    ];
    let identity = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let mut found = vec![FrameElement {
        word: "I".into(),
        matrix: identity,
    }];
    let mut frontier = 0;
    while frontier < found.len() {
        let current = found[frontier].clone();
        for (name, g) in &gens {
            let m = canonical(mul(g, &current.matrix));
            if !found.iter().any(|f| close(&f.matrix, &m)) {
                let word = if current.word == "I" {
                    name.to_string()
                } else {
                    format!("{name}{}", current.word)
                };
                found.push(FrameElement { word, matrix: m });
            }
        }
        frontier += 1;
    }
    found
}

fn apply_on_qubit(s: &[C64], qubit: usize, m: &Jones) -> Vec<C64> {
    // qubit 0 is the most significant of four
    let shift = 3 - qubit;
    let mut out = vec![c(0.0, 0.0); s.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let bit = (i >> shift) & 1;
        let i0 = i & !(1 << shift);
        let i1 = i0 | (1 << shift);
        *o = m[bit][0] * s[i0] + m[bit][1] * s[i1];
    }
    out
}

/// Output frame recorded for a layout.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub out_c: String,
    pub out_d: String,
    /// Row-major 2×2 matrices as `[re, im]` pairs.
    pub out_c_matrix: [[[f64; 2]; 2]; 2],
    pub out_d_matrix: [[[f64; 2]; 2]; 2],
}

fn as_pairs(m: &Jones) -> [[[f64; 2]; 2]; 2] {
    m.map(|row| row.map(|z| [z.re, z.im]))
}

/// Best overlap of `conditional` with (F_c ⊗ F_d)|ε=+1⟩ over Clifford frames.
fn frame_fidelity(conditional: &StateVector, frames: &[FrameElement]) -> (f64, Frame) {
    let target = epsilon_state(EpsilonSign::Plus);
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, fc) in frames.iter().enumerate() {
        let rotated_c = apply_on_qubit(target.amplitudes(), 1, &fc.matrix);
        for (j, fd) in frames.iter().enumerate() {
            let rotated = apply_on_qubit(&rotated_c, 2, &fd.matrix);
            let overlap: C64 = rotated
                .iter()
                .zip(conditional.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let f = overlap.norm_sqr();
            if best.is_none_or(|(bf, _, _)| f > bf + 1e-12) {
                best = Some((f, i, j));
            }
        }
    }
    let (f, i, j) = best.expect("nonempty frame set");
    (
        f,
        Frame {
            out_c: frames[i].word.clone(),
            out_d: frames[j].word.clone(),
            out_c_matrix: as_pairs(&frames[i].matrix),
            out_d_matrix: as_pairs(&frames[j].matrix),
        },
    )
}

/// Thresholds a layout has to meet to count as a selector of |ε=+1⟩.
pub const EPS_MINUS_COINCIDENCE_MAX: f64 = 1e-12;
pub const SELECTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub layout: Vec<String>,
    pub convention: PbsPhase,
    pub p_coincidence_eps_plus: f64,
    pub p_coincidence_eps_minus: f64,
    pub p_coincidence_product_input: f64,
    /// Squared overlap of the post-selected swapping state with |ε=+1⟩, up to `frame`.
    pub fidelity: f64,
    pub frame: Option<Frame>,
    pub pass: bool,
}

fn verify_with_frames(layout: &Layout, frames: &[FrameElement]) -> Result<SelectionReport> {
    let p =
        |s: &StateVector| -> Result<Coincidence> { coincidence_project(&run_layout(s, layout)?) };
    let plus = p(&epsilon_state(EpsilonSign::Plus))?;
    let minus = p(&epsilon_state(EpsilonSign::Minus))?;
    let product = p(&source_state())?;

    let (fidelity, frame) = match &product.conditional {
        Some(cond) => {
            let (f, frame) = frame_fidelity(&cond.coincidence_qubits(), frames);
            (f, Some(frame))
        }
        None => (0.0, None),
    };
    let pass = minus.probability < EPS_MINUS_COINCIDENCE_MAX
        && (plus.probability - 1.0).abs() < SELECTION_TOLERANCE
        && (product.probability - 0.5).abs() < SELECTION_TOLERANCE
        && fidelity >= 1.0 - SELECTION_TOLERANCE;
    Ok(SelectionReport {
        layout: layout.elements().iter().map(|e| e.to_string()).collect(),
        convention: layout.pbs_phase(),
        p_coincidence_eps_plus: plus.probability,
        p_coincidence_eps_minus: minus.probability,
        p_coincidence_product_input: product.probability,
        fidelity,
        frame,
        pass,
    })
}

/// Checks whether a layout, fed with |ψ⁻⟩₁₂|ψ⁻⟩₃₄, yields coincidences
/// exactly on the |ε=+1⟩ component.
pub fn verify_selection(layout: &Layout) -> Result<SelectionReport> {
    verify_with_frames(layout, &clifford_frames())
}

/// Plate stacks on `in2` and `in3` before the PBS and on `out_c` and `out_d` after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotGrammar {
    pub max_per_slot: usize,
}

impl Default for SlotGrammar {
    fn default() -> Self {
        Self { max_per_slot: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Plate {
    Quarter,
    Half,
}

fn slot_options(max: usize) -> Vec<Vec<Plate>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max {
        let next: Vec<Vec<Plate>> = layer
            .iter()
            .flat_map(|p: &Vec<Plate>| {
                [Plate::Quarter, Plate::Half].into_iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Every layout the grammar admits within the inventory, in enumeration order.
pub fn candidate_layouts(
    inventory: Inventory,
    grammar: SlotGrammar,
    phase: PbsPhase,
) -> Vec<Layout> {
    if inventory.pbs == 0 {
        return Vec::new();
    }
    let options = slot_options(grammar.max_per_slot);
    let slots = [Spatial::In2, Spatial::In3, Spatial::OutC, Spatial::OutD];
    let mut out = Vec::new();
    for a in &options {
        for b in &options {
            for cc in &options {
                for d in &options {
                    let stacks = [a, b, cc, d];
                    let quarters = stacks
                        .iter()
                        .flat_map(|s| s.iter())
                        .filter(|p| **p == Plate::Quarter)
                        .count();
                    let halves = stacks
                        .iter()
                        .flat_map(|s| s.iter())
                        .filter(|p| **p == Plate::Half)
                        .count();
                    if quarters > inventory.qwp45 || halves > inventory.hwp {
                        continue;
                    }
                    let mut elements = Vec::with_capacity(quarters + halves + 1);
                    for (k, (stack, mode)) in stacks.iter().zip(slots).enumerate() {
                        if k == 2 {
                            elements.push(Element::Pbs(Spatial::In2, Spatial::In3));
                        }
                        elements.extend(stack.iter().map(|p| match p {
                            Plate::Quarter => Element::Qwp45(mode),
                            Plate::Half => Element::Hwp(mode),
                        }));
                    }
                    out.push(Layout::new(elements, phase).expect("within inventory"));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub convention: PbsPhase,
    pub candidates: usize,
    pub passing: Vec<SelectionReport>,
}

/// Exhaustive search of plate placements around a single PBS.
pub fn search_layouts(
    inventory: Inventory,
    grammar: SlotGrammar,
    phase: PbsPhase,
) -> Result<SearchOutcome> {
    let candidates = candidate_layouts(inventory, grammar, phase);
    let frames = clifford_frames();
    let reports: Vec<Result<Option<SelectionReport>>> = candidates
        .par_iter()
        .map(|l| verify_with_frames(l, &frames).map(|r| r.pass.then_some(r)))
        .collect();
    let mut passing = Vec::new();
    for r in reports {
        if let Some(rep) = r? {
            passing.push(rep);
        }
    }
    Ok(SearchOutcome {
        convention: phase,
        candidates: candidates.len(),
        passing,
    })
}

pub fn search_all_conventions(
    inventory: Inventory,
    grammar: SlotGrammar,
) -> Result<Vec<SearchOutcome>> {
    PbsPhase::ALL
        .into_iter()
        .map(|p| search_layouts(inventory, grammar, p))
        .collect()
}

/// A selector found by the search: a half-wave plate then a quarter-wave
/// plate on `in2`, a quarter-wave plate on `in3`, then the PBS. The plates
/// turn circular polarization into linear so that the PBS parity check
/// separates the two `ε` states; the half-wave plate fixes which of them
/// exits one photon per port.
pub fn canonical_layout(phase: PbsPhase) -> Layout {
    Layout::new(
        vec![
            Element::Hwp(Spatial::In2),
            Element::Qwp45(Spatial::In2),
            Element::Qwp45(Spatial::In3),
            Element::Pbs(Spatial::In2, Spatial::In3),
        ],
        phase,
    )
    .expect("within inventory")
}
