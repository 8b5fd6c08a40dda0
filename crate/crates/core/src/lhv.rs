//! Exhaustive search over deterministic local hidden-variable valuations of
//! the eight site-local observables.
//!
//! Site 1 carries `z1, x1`, the middle station (photons 2 and 3) carries the
//! four joint observables `z2z3, x2x3, z2x3, x2z3`, and site 4 carries
//! `z4, x4`. A valuation assigns ±1 to each of them; there are 256.
//!
//! Bounds are computed for deterministic valuations only. Any stochastic
//! local model is a convex mixture of these, so the same bounds apply to it.

use std::fmt;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A local element of reality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ler {
    Z1,
    X1,
    Z2Z3,
    X2X3,
    Z2X3,
    X2Z3,
    Z4,
    X4,
}

impl Ler {
    pub const ALL: [Ler; 8] = [
        Ler::Z1,
        Ler::X1,
        Ler::Z2Z3,
        Ler::X2X3,
        Ler::Z2X3,
        Ler::X2Z3,
        Ler::Z4,
        Ler::X4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Ler::Z1 => "z1",
            Ler::X1 => "x1",
            Ler::Z2Z3 => "z2z3",
            Ler::X2X3 => "x2x3",
            Ler::Z2X3 => "z2x3",
            Ler::X2Z3 => "x2z3",
            Ler::Z4 => "z4",
            Ler::X4 => "x4",
        }
    }

    /// 1, 23 or 4.
    pub fn site(self) -> u8 {
        match self {
            Ler::Z1 | Ler::X1 => 1,
            Ler::Z4 | Ler::X4 => 4,
            _ => 23,
        }
    }
}

impl fmt::Display for Ler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Ler {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// A ±1 valuation of all eight elements.
///
/// Encoded so that the numeric order of the code is the lexicographic order
/// over [`Ler::ALL`] with `+1` ranked before `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(u8);

impl Assignment {
    pub fn from_code(code: u8) -> Self {
        Self(code)
    }

    pub fn from_values(values: [i8; 8]) -> Self {
        let code =
            values.iter().enumerate().fold(
                0u8,
                |acc, (i, &v)| if v < 0 { acc | (1 << (7 - i)) } else { acc },
            );
        Self(code)
    }

    pub fn all() -> impl Iterator<Item = Assignment> {
        (0..=255u8).map(Assignment)
    }

    pub fn code(self) -> u8 {
        self.0
    }

    pub fn value(self, ler: Ler) -> i8 {
        if (self.0 >> (7 - ler.index())) & 1 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn values(self) -> [i8; 8] {
        Ler::ALL.map(|l| self.value(l))
    }

    /// m = v(z2z3)
    pub fn m(self) -> i8 {
        self.value(Ler::Z2Z3)
    }

    /// n = v(z2x3)
    pub fn n(self) -> i8 {
        self.value(Ler::Z2X3)
    }

    /// ε = v(z2z3)·v(x2x3)
    pub fn epsilon(self) -> i8 {
        self.value(Ler::Z2Z3) * self.value(Ler::X2X3)
    }

    pub fn product(self, monomial: &[Ler]) -> i8 {
        monomial.iter().map(|&l| self.value(l)).product()
    }

    /// Local realistic value of the four-term Bell operator
    /// z1·z2z3·z4 + x1·x2x3·x4 + z1·z2x3·x4 + x1·x2z3·z4.
    pub fn m_operator_value(self) -> i32 {
        M_TERMS.iter().map(|t| self.product(t) as i32).sum()
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(8))?;
        for l in Ler::ALL {
            map.serialize_entry(l.name(), &self.value(l))?;
        }
        map.end()
    }
}

/// Monomials of the four terms of the Bell operator, in term order.
pub const M_TERMS: [[Ler; 3]; 4] = [
    [Ler::Z1, Ler::Z2Z3, Ler::Z4],
    [Ler::X1, Ler::X2X3, Ler::X4],
    [Ler::Z1, Ler::Z2X3, Ler::X4],
    [Ler::X1, Ler::X2Z3, Ler::Z4],
];

/// Product of the listed values required to equal `required`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub monomial: Vec<Ler>,
    pub required: i8,
}

impl Constraint {
    pub fn new(name: impl Into<String>, monomial: &[Ler], required: i8) -> Self {
        Self {
            name: name.into(),
            monomial: monomial.to_vec(),
            required,
        }
    }

    pub fn evaluate(&self, a: Assignment) -> i8 {
        a.product(&self.monomial)
    }

    pub fn is_satisfied(&self, a: Assignment) -> bool {
        self.evaluate(a) == self.required
    }
}

fn monomial_name(m: &[Ler]) -> String {
    m.iter()
        .map(|l| format!("v({l})"))
        .collect::<Vec<_>>()
        .join("")
}

/// The four perfect swapping correlations, each required to be +1.
pub fn perfect_correlations() -> Vec<Constraint> {
    M_TERMS
        .iter()
        .map(|t| Constraint::new(format!("{} = +1", monomial_name(t)), t, 1))
        .collect()
}

/// The pair enforcing the operator identity on photons 2 and 3 for a fixed ε:
/// v(z2z3)v(x2x3) = ε and v(z2x3)v(x2z3) = −ε.
pub fn identity_constraints(epsilon: i8) -> Vec<Constraint> {
    let sym = |v: i8| if v > 0 { "+1" } else { "-1" };
    let first = [Ler::Z2Z3, Ler::X2X3];
    let second = [Ler::Z2X3, Ler::X2Z3];
    vec![
        Constraint::new(
            format!("{} = {}", monomial_name(&first), sym(epsilon)),
            &first,
            epsilon,
        ),
        Constraint::new(
            format!("{} = {}", monomial_name(&second), sym(-epsilon)),
            &second,
            -epsilon,
        ),
    ]
}

/// All six relations for one ε branch: four correlations then the identity pair.
pub fn six_relations(epsilon: i8) -> Vec<Constraint> {
    let mut v = perfect_correlations();
    v.extend(identity_constraints(epsilon));
    v
}

/// Every valuation satisfying all constraints, in lexicographic order.
pub fn enumerate(constraints: &[Constraint]) -> Vec<Assignment> {
    Assignment::all()
        .filter(|&a| constraints.iter().all(|c| c.is_satisfied(a)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LeaveOneOut {
    pub omitted: Constraint,
    pub sat_count: usize,
    pub witnesses: Vec<Assignment>,
    /// Distinct values the omitted monomial takes across the witnesses.
    pub omitted_values: Vec<i8>,
    /// True when every witness gives the omitted monomial the value opposite to its requirement.
    pub forced_opposite: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AvnBranch {
    pub epsilon: i8,
    pub constraints: Vec<Constraint>,
    pub sat_count: usize,
    pub witnesses: Vec<Assignment>,
    pub leave_one_out: Vec<LeaveOneOut>,
    /// Product of all six left-hand sides is +1 for every one of the 256 valuations.
    pub lhs_product_always_plus: bool,
    /// Product of the six required values.
    pub rhs_product: i8,
}

impl AvnBranch {
    pub fn passes(&self) -> bool {
        self.sat_count == 0
            && self.lhs_product_always_plus
            && self.rhs_product == -1
            && self.leave_one_out.len() == 6
            && self
                .leave_one_out
                .iter()
                .all(|l| l.sat_count > 0 && l.forced_opposite)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AvnCertificate {
    pub candidates: usize,
    pub branches: Vec<AvnBranch>,
    pub pass: bool,
}

fn branch(epsilon: i8) -> AvnBranch {
    let constraints = six_relations(epsilon);
    let witnesses = enumerate(&constraints);
    let leave_one_out = (0..constraints.len())
        .map(|skip| {
            let rest: Vec<Constraint> = constraints
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, c)| c.clone())
                .collect();
            let omitted = constraints[skip].clone();
            let witnesses = enumerate(&rest);
            let mut omitted_values: Vec<i8> =
                witnesses.iter().map(|&a| omitted.evaluate(a)).collect();
            omitted_values.sort_unstable();
            omitted_values.dedup();
            let forced_opposite = !witnesses.is_empty() && omitted_values == [-omitted.required];
            LeaveOneOut {
                sat_count: witnesses.len(),
                witnesses,
                omitted_values,
                forced_opposite,
                omitted,
            }
        })
        .collect();
    let lhs_product_always_plus =
        Assignment::all().all(|a| constraints.iter().map(|c| c.evaluate(a)).product::<i8>() == 1);
    let rhs_product = constraints.iter().map(|c| c.required).product();
    AvnBranch {
        epsilon,
        sat_count: witnesses.len(),
        witnesses,
        constraints,
        leave_one_out,
        lhs_product_always_plus,
        rhs_product,
    }
}

/// Certifies that the six relations admit no common valuation for either ε,
/// while every five-relation subset does and then forces the sixth to the
/// opposite sign.
pub fn avn_certificate() -> AvnCertificate {
    let branches: Vec<AvnBranch> = [1, -1].into_iter().map(branch).collect();
    let pass = branches.iter().all(AvnBranch::passes);
    AvnCertificate {
        candidates: 256,
        branches,
        pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LhvExtrema {
    pub constrained: bool,
    pub max_value: i32,
    pub min_value: i32,
    pub argmax: Vec<Assignment>,
}

/// Extremes of the Bell operator over valuations. When `constrained`, only
/// valuations obeying the identity pair for some ε are admitted.
pub fn lhv_extrema(constrained: bool) -> LhvExtrema {
    let admitted: Vec<Assignment> = Assignment::all()
        .filter(|&a| {
            !constrained
                || [1, -1]
                    .into_iter()
                    .any(|eps| identity_constraints(eps).iter().all(|c| c.is_satisfied(a)))
        })
        .collect();
    let max_value = admitted
        .iter()
        .map(|a| a.m_operator_value())
        .max()
        .unwrap_or(0);
    let min_value = admitted
        .iter()
        .map(|a| a.m_operator_value())
        .min()
        .unwrap_or(0);
    let argmax = admitted
        .into_iter()
        .filter(|a| a.m_operator_value() == max_value)
        .collect();
    LhvExtrema {
        constrained,
        max_value,
        min_value,
        argmax,
    }
}

/// Local realistic bound of the Bell operator under the identity constraint.
pub fn lhv_bound_m() -> LhvExtrema {
    lhv_extrema(true)
}

/// Two-party correlators between sites 1 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlators {
    pub z1z4: f64,
    pub z1x4: f64,
    pub x1z4: f64,
    pub x1x4: f64,
}

impl Correlators {
    /// Deterministic correlators of a single valuation.
    pub fn from_assignment(a: Assignment) -> Self {
        let p = |u: Ler, v: Ler| (a.value(u) * a.value(v)) as f64;
        Self {
            z1z4: p(Ler::Z1, Ler::Z4),
            z1x4: p(Ler::Z1, Ler::X4),
            x1z4: p(Ler::X1, Ler::Z4),
            x1x4: p(Ler::X1, Ler::X4),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("E(z1z4)", self.z1z4),
            ("E(z1x4)", self.z1x4),
            ("E(x1z4)", self.x1z4),
            ("E(x1x4)", self.x1x4),
        ] {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::CorrelatorOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// m·E(z1z4) + n·E(z1x4) − εn·E(x1z4) + εm·E(x1x4), with ε supplied externally.
pub fn chsh_value(m: i8, n: i8, epsilon: i8, e: &Correlators) -> Result<f64> {
    e.validate()?;
    let (m, n, eps) = (m as f64, n as f64, epsilon as f64);
    Ok(m * e.z1z4 + n * e.z1x4 - eps * n * e.x1z4 + eps * m * e.x1x4)
}

/// [`chsh_value`] with m, n and ε read off the valuation itself.
pub fn chsh_value_derived(a: Assignment, e: &Correlators) -> Result<f64> {
    chsh_value(a.m(), a.n(), a.epsilon(), e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_encoding() {
        let first = Assignment::from_code(0);
        assert!(first.values().iter().all(|&v| v == 1));
        let a = Assignment::from_code(1);
        assert_eq!(a.value(Ler::X4), -1);
        assert_eq!(a.value(Ler::Z1), 1);
        let vals = [1, -1, 1, 1, -1, 1, 1, -1];
        assert_eq!(Assignment::from_values(vals).values(), vals);
    }

    #[test]
    fn all_plus_satisfies_correlations_not_identity() {
        let a = Assignment::from_code(0);
        assert!(perfect_correlations().iter().all(|c| c.is_satisfied(a)));
        for eps in [1, -1] {
            assert!(!identity_constraints(eps).iter().all(|c| c.is_satisfied(a)));
        }
    }

    #[test]
    fn parity_products() {
        for eps in [1, -1] {
            let rel = six_relations(eps);
            assert_eq!(rel.iter().map(|c| c.required).product::<i8>(), -1);
            for a in Assignment::all() {
                assert_eq!(rel.iter().map(|c| c.evaluate(a)).product::<i8>(), 1);
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate(&[]).len(), 256);
        // four independent parity checks on eight bits: 2^8 / 2^4
        assert_eq!(enumerate(&perfect_correlations()).len(), 16);
        assert!(enumerate(&six_relations(1)).is_empty());
        assert!(enumerate(&six_relations(-1)).is_empty());
    }

    #[test]
    fn enumeration_is_sorted() {
        let sols = enumerate(&perfect_correlations());
        assert!(sols.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn certificate() {
        let cert = avn_certificate();
        assert!(cert.pass);
        for b in &cert.branches {
            assert_eq!(b.sat_count, 0);
            assert_eq!(b.leave_one_out.len(), 6);
            let first = &b.leave_one_out[0];
            assert_eq!(first.omitted.monomial, vec![Ler::Z1, Ler::Z2Z3, Ler::Z4]);
            assert!(first
                .witnesses
                .iter()
                .all(|&a| a.product(&first.omitted.monomial) == -1));
            for l in &b.leave_one_out {
                assert!(!l.witnesses.is_empty());
            }
        }
    }

    #[test]
    fn bell_operator_bounds() {
        let c = lhv_bound_m();
        assert_eq!(c.max_value, 2);
        assert_eq!(c.min_value, -2);
        let u = lhv_extrema(false);
        assert_eq!(u.max_value, 4);
        assert!(u.argmax.contains(&Assignment::from_code(0)));
        for a in &c.argmax {
            let eps = a.epsilon();
            assert!(identity_constraints(eps).iter().all(|k| k.is_satisfied(*a)));
            let plus = M_TERMS.iter().filter(|t| a.product(*t) == 1).count();
            assert_eq!(plus, 3);
        }
    }

    #[test]
    fn chsh_examples() {
        let all = Correlators {
            z1z4: 1.0,
            z1x4: 1.0,
            x1z4: 1.0,
            x1x4: 1.0,
        };
        assert_eq!(chsh_value(1, 1, 1, &all).unwrap(), 2.0);
        let bad = Correlators { z1z4: 1.2, ..all };
        assert!(matches!(
            chsh_value(1, 1, 1, &bad),
            Err(Error::CorrelatorOutOfRange {
                name: "E(z1z4)",
                ..
            })
        ));
    }

    #[test]
    fn chsh_branch_reduction() {
        // for mn = +1 the expression is z1(z4 + x4) − ε x1(z4 − x4)
        let e = Correlators {
            z1z4: 0.3,
            z1x4: -0.7,
            x1z4: 0.1,
            x1x4: 0.9,
        };
        for (m, n) in [(1, 1), (-1, -1)] {
            for eps in [1, -1] {
                let v = chsh_value(m, n, eps, &e).unwrap();
                let reduced = m as f64 * ((e.z1z4 + e.z1x4) - eps as f64 * (e.x1z4 - e.x1x4));
                assert!((v - reduced).abs() < 1e-15);
            }
        }
        for (m, n) in [(1, -1), (-1, 1)] {
            for eps in [1, -1] {
                let v = chsh_value(m, n, eps, &e).unwrap();
                let reduced = m as f64 * ((e.z1z4 - e.z1x4) + eps as f64 * (e.x1z4 + e.x1x4));
                assert!((v - reduced).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_chsh_bounded_by_two() {
        for a in Assignment::all() {
            let e = Correlators::from_assignment(a);
            assert!(chsh_value_derived(a, &e).unwrap().abs() <= 2.0);
            for m in [1, -1] {
                for n in [1, -1] {
                    for eps in [1, -1] {
                        assert!(chsh_value(m, n, eps, &e).unwrap().abs() <= 2.0);
                    }
                }
            }
        }
    }
}
