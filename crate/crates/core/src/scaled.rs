//! The scaled complex-number structure represented on the base complex
//! numbers.
//!
//! A value `a` of the scaled structure is always stored as its base-structure
//! image `r * a` (a [`RepValue`]); multiplication and division carry the
//! compensating factors `x*y/r` and `r*(x/y)`. With those operations the
//! scaled structure satisfies the field axioms exactly when the base does.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

/// A complex-number structure scaled by `r` relative to the base; `r = 1`
/// is the base itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledStructure {
    r: f64,
}

impl ScaledStructure {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("scale factor must be positive and finite, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn base() -> Self {
        Self { r: 1.0 }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The base image of the scaled structure's multiplicative identity.
    pub fn identity_element(&self) -> RepValue {
        RepValue::new(Complex64::new(self.r, 0.0))
    }
}

/// The representation in the base structure of a number value of the scaled
/// structure (the image `r * a`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepValue(Complex64);

impl RepValue {
    pub fn new(v: Complex64) -> Self {
        Self(v)
    }

    pub fn real(v: f64) -> Self {
        Self(Complex64::new(v, 0.0))
    }

    pub fn get(&self) -> Complex64 {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    /// The value this representation has inside the scaled structure.
    pub fn value_in(&self, s: &ScaledStructure) -> Complex64 {
        self.0 / s.r
    }
}

/// Which multiplication rule to use when checking axioms. The broken table
/// drops the compensating `1/r` from multiplication, which violates the
/// multiplicative-identity axiom whenever `r != 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpTable {
    Scaled,
    BrokenMul,
}

/// `a x_r b`, represented on the base as `a * b / r`.
pub fn scaled_mul(a: RepValue, b: RepValue, s: &ScaledStructure) -> RepValue {
    RepValue(a.0 * b.0 / s.r)
}

/// `a /_r b`, represented on the base as `r * (a / b)`.
pub fn scaled_div(a: RepValue, b: RepValue, s: &ScaledStructure) -> Result<RepValue> {
    if b.0 == Complex64::new(0.0, 0.0) {
        return Err(Error::DivisionByZero);
    }
    Ok(RepValue(s.r * (a.0 / b.0)))
}

/// Addition is unchanged by scaling.
pub fn scaled_add(a: RepValue, b: RepValue) -> RepValue {
    RepValue(a.0 + b.0)
}

/// Subtraction is unchanged by scaling.
pub fn scaled_sub(a: RepValue, b: RepValue) -> RepValue {
    RepValue(a.0 - b.0)
}

/// The image in the base structure of the value `a` of the scaled
/// structure: `r * a`.
pub fn correspond_to_base(a_value: Complex64, s: &ScaledStructure) -> RepValue {
    RepValue(s.r * a_value)
}

/// The same value viewed in another structure is denoted by the same
/// numeral; this is the identity on values. Correspondence and same-value
/// coincide only at `r = 1`.
pub fn same_value_view(a_value: Complex64) -> Complex64 {
    a_value
}

/// One axiom's outcome over a sample set.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomResult {
    pub name: String,
    pub pass: bool,
    pub max_residual: f64,
    /// Sample triple (as base representations) realizing the max residual.
    pub worst_sample: Vec<[f64; 2]>,
    /// Fraction of samples whose residual exceeded the tolerance.
    pub fail_fraction: f64,
}

/// Per-axiom pass/fail report for one scaled structure.
#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub r: f64,
    pub samples: usize,
    pub tol: f64,
    pub axioms: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.axioms.iter().all(|a| a.pass)
    }

    pub fn axiom(&self, name: &str) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| a.name == name)
    }
}

fn sample_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Residual scale: tolerances must not fire spuriously for extreme `r` or
/// large intermediate magnitudes.
fn scale(r: f64, parts: &[Complex64]) -> f64 {
    let mut m = 1.0f64.max(r.abs());
    for p in parts {
        m = m.max(p.norm());
    }
    m
}

struct AxiomCheck {
    name: &'static str,
    max_residual: f64,
    worst: Vec<Complex64>,
    failures: usize,
}

impl AxiomCheck {
    fn new(name: &'static str) -> Self {
        Self { name, max_residual: 0.0, worst: Vec::new(), failures: 0 }
    }

    fn record(&mut self, lhs: Complex64, rhs: Complex64, r: f64, tol: f64, sample: &[Complex64]) {
        let residual = (lhs - rhs).norm() / scale(r, &[lhs, rhs]);
        if residual > self.max_residual {
            self.max_residual = residual;
            self.worst = sample.to_vec();
        }
        if residual > tol {
            self.failures += 1;
        }
    }

    fn finish(self, samples: usize, tol: f64) -> AxiomResult {
        AxiomResult {
            name: self.name.to_string(),
            pass: self.max_residual <= tol,
            max_residual: self.max_residual,
            worst_sample: self.worst.iter().map(|c| [c.re, c.im]).collect(),
            fail_fraction: self.failures as f64 / samples.max(1) as f64,
        }
    }
}

/// Check the field axioms of the scaled structure on seeded random triples
/// of base representations.
///
/// The multiplicative inverse of a representation `a` is `r^2 / a`: then
/// `a x_r (r^2/a) = r`, the base image of the scaled unit.
pub fn check_field_axioms(
    s: &ScaledStructure,
    seed: u64,
    count: usize,
    tol: f64,
    table: OpTable,
) -> Result<AxiomReport> {
    if count < 1 {
        return Err(Error::Config("axiom check needs count >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("axiom check needs tol > 0, got {tol}")));
    }
    let r = s.r;
    let mul = |a: RepValue, b: RepValue| -> RepValue {
        match table {
            OpTable::Scaled => scaled_mul(a, b, s),
            OpTable::BrokenMul => RepValue(a.0 * b.0),
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = s.identity_element();
    let zero = RepValue::new(Complex64::new(0.0, 0.0));

    let mut add_comm = AxiomCheck::new("add_commutativity");
    let mut add_assoc = AxiomCheck::new("add_associativity");
    let mut mul_comm = AxiomCheck::new("mul_commutativity");
    let mut mul_assoc = AxiomCheck::new("mul_associativity");
    let mut distrib = AxiomCheck::new("distributivity");
    let mut add_id = AxiomCheck::new("additive_identity");
    let mut mul_id = AxiomCheck::new("multiplicative_identity");
    let mut add_inv = AxiomCheck::new("additive_inverse");
    let mut mul_inv = AxiomCheck::new("multiplicative_inverse");

    for _ in 0..count {
        let sample = [sample_complex(&mut rng), sample_complex(&mut rng), sample_complex(&mut rng)];
        let (a, b, c) = (RepValue(sample[0]), RepValue(sample[1]), RepValue(sample[2]));

        add_comm.record(scaled_add(a, b).0, scaled_add(b, a).0, r, tol, &sample);
        add_assoc.record(
            scaled_add(scaled_add(a, b), c).0,
            scaled_add(a, scaled_add(b, c)).0,
            r,
            tol,
            &sample,
        );
        mul_comm.record(mul(a, b).0, mul(b, a).0, r, tol, &sample);
        mul_assoc.record(mul(mul(a, b), c).0, mul(a, mul(b, c)).0, r, tol, &sample);
        distrib.record(
            mul(a, scaled_add(b, c)).0,
            scaled_add(mul(a, b), mul(a, c)).0,
            r,
            tol,
            &sample,
        );
        add_id.record(scaled_add(a, zero).0, a.0, r, tol, &sample);
        mul_id.record(mul(a, unit).0, a.0, r, tol, &sample);
        add_inv.record(scaled_sub(a, a).0, zero.0, r, tol, &sample);
        if a.0 != Complex64::new(0.0, 0.0) {
            let inv = RepValue(Complex64::new(r * r, 0.0) / a.0);
            mul_inv.record(mul(a, inv).0, unit.0, r, tol, &sample);
        }
    }

    Ok(AxiomReport {
        r,
        samples: count,
        tol,
        axioms: vec![
            add_comm.finish(count, tol),
            add_assoc.finish(count, tol),
            mul_comm.finish(count, tol),
            mul_assoc.finish(count, tol),
            distrib.finish(count, tol),
            add_id.finish(count, tol),
            mul_id.finish(count, tol),
            add_inv.finish(count, tol),
            mul_inv.finish(count, tol),
        ],
    })
}

/// The monomial ratio `a^m / b^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalTerm {
    pub numerator_degree: u32,
    pub denominator_degree: u32,
    pub a: Complex64,
    pub b: Complex64,
}

impl RationalTerm {
    pub fn new(m: u32, n: u32, a: Complex64, b: Complex64) -> Result<Self> {
        if m < 1 || n < 1 || m > 16 || n > 16 {
            return Err(Error::Config(format!("term degrees must be in 1..=16, got m={m}, n={n}")));
        }
        if b == Complex64::new(0.0, 0.0) {
            return Err(Error::DivisionByZero);
        }
        Ok(Self { numerator_degree: m, denominator_degree: n, a, b })
    }
}

/// Result of evaluating a rational term with scaled operations, together
/// with the net power of `r` tracked by exact integer bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedTerm {
    pub value: RepValue,
    /// Net exponent of `r` carried by the result; always exactly 1.
    pub r_exponent: i32,
}

/// Evaluate `a^m / b^n` entirely with scaled operations on the base
/// representations of `a` and `b`.
///
/// Each factor contributes `r`, each multiplication removes one, and the
/// final division adds one back: the result is `r * (a^m / b^n)` with a net
/// `r` exponent of exactly 1.
pub fn lift_term(t: &RationalTerm, s: &ScaledStructure) -> Result<LiftedTerm> {
    let pow = |base: Complex64, deg: u32| -> (RepValue, i32) {
        let rep = correspond_to_base(base, s);
        let mut acc = rep;
        for _ in 1..deg {
            acc = scaled_mul(acc, rep, s);
        }
        // deg factors of r, deg - 1 removed by the scaled multiplications
        let exponent = deg as i32 - (deg as i32 - 1);
        (acc, exponent)
    };
    let (num, num_exp) = pow(t.a, t.numerator_degree);
    let (den, den_exp) = pow(t.b, t.denominator_degree);
    let value = scaled_div(num, den, s)?;
    // division subtracts the denominator's exponent and adds one
    let r_exponent = num_exp - den_exp + 1;
    debug_assert_eq!(r_exponent, 1);
    Ok(LiftedTerm { value, r_exponent })
}

/// Evaluate a polynomial (coefficients in ascending degree) at `z` using
/// Horner form with scaled operations on corresponded inputs.
pub fn lift_polynomial(coeffs: &[Complex64], z: Complex64, s: &ScaledStructure) -> RepValue {
    let z_rep = correspond_to_base(z, s);
    let mut acc = RepValue::new(Complex64::new(0.0, 0.0));
    for &c in coeffs.iter().rev() {
        acc = scaled_add(scaled_mul(acc, z_rep, s), correspond_to_base(c, s));
    }
    acc
}

/// Plain Horner evaluation in the base structure.
pub fn eval_polynomial(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}
