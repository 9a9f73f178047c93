//! Per-site numbers, parallel transport between site structures, and the
//! factorization of transport into a scaling part and a retagging part.
//!
//! Arithmetic is defined only within one site's number structure; combining
//! numbers tagged with different sites is a [`Error::StructureMismatch`],
//! never a silent coercion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{scale_factor, SiteId, ThetaField};
use crate::scaled::ScaledStructure;

/// A complex value tagged with the site whose number structure it inhabits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalNumber {
    pub site: SiteId,
    pub value: Complex64,
}

impl LocalNumber {
    pub fn new(site: SiteId, value: Complex64) -> Self {
        Self { site, value }
    }

    pub fn real(site: SiteId, value: f64) -> Self {
        Self { site, value: Complex64::new(value, 0.0) }
    }
}

/// Arithmetic within one site's structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The transport map from one site's structure to another, carrying the
/// scale factor consistent with the current theta field.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    pub from: SiteId,
    pub to: SiteId,
    pub r: f64,
}

impl TransportMap {
    pub fn between(theta: &ThetaField, from: &SiteId, to: &SiteId) -> Result<Self> {
        let sf = scale_factor(theta, from, to)?;
        Ok(Self { from: from.clone(), to: to.clone(), r: sf.value })
    }
}

/// The pure site-retagging factor of a transport map. It changes which
/// universe a value is tagged with and never touches the numeric value; it
/// has no numeric (matrix) representation.
#[derive(Debug, Clone, PartialEq)]
pub struct RetagFactor {
    pub to: SiteId,
}

impl RetagFactor {
    pub fn apply(&self, a: &LocalNumber) -> LocalNumber {
        LocalNumber::new(self.to.clone(), a.value)
    }
}

/// The same number value retagged at the target site.
pub fn parallel_transport(a: &LocalNumber, to: &SiteId) -> LocalNumber {
    LocalNumber::new(to.clone(), a.value)
}

/// The scaled representation of `a` at the target: the transported value
/// multiplied by `r_{a.site, to}`.
pub fn scaled_transport(a: &LocalNumber, to: &SiteId, theta: &ThetaField) -> Result<LocalNumber> {
    let r = scale_factor(theta, &a.site, to)?.value;
    Ok(LocalNumber::new(to.clone(), r * a.value))
}

/// Split a transport map into its scaling part (a scaled structure with the
/// map's `r`, living at the target) and its retagging part (to the source).
pub fn factorize(map: &TransportMap) -> Result<(ScaledStructure, RetagFactor)> {
    let w = ScaledStructure::new(map.r)?;
    let z = RetagFactor { to: map.from.clone() };
    Ok((w, z))
}

/// Combine two numbers within their shared site structure.
pub fn combine(a: &LocalNumber, b: &LocalNumber, op: BinaryOp) -> Result<LocalNumber> {
    if a.site != b.site {
        return Err(Error::StructureMismatch { left: a.site.clone(), right: b.site.clone() });
    }
    let value = match op {
        BinaryOp::Add => a.value + b.value,
        BinaryOp::Sub => a.value - b.value,
        BinaryOp::Mul => a.value * b.value,
        BinaryOp::Div => {
            if b.value == Complex64::new(0.0, 0.0) {
                return Err(Error::DivisionByZero);
            }
            a.value / b.value
        }
    };
    Ok(LocalNumber::new(a.site.clone(), value))
}
