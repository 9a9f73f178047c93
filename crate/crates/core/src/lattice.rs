//! Discrete space, the scalar field theta, its gradient, link factors,
//! and finite-path scale factors.
//!
//! The scale factor relating the number structure at `y` to the one at `x`
//! is `r_{y,x} = exp(theta(y) - theta(x))`. Link exponents derived from a
//! scalar field use the exact difference `theta(x + e_j) - theta(x)`, so
//! path products telescope and the discrete gradient theorem holds exactly.
//! The pointwise gradient uses central differences instead; the two agree
//! to second order in the spacing.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Maximum number of sites accepted at construction.
pub const SITE_CAP: usize = 1 << 20;

/// Per-site |theta| cap; keeps every exp() within double range.
pub const THETA_CAP: f64 = 500.0;

/// Boundary handling along every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// A finite 1-, 2-, or 3-dimensional grid of sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    extent: Vec<usize>,
    spacing: f64,
    boundary: Boundary,
    /// Physical coordinate of the site with all-zero indices, per axis.
    origin: Vec<f64>,
}

/// A site label: the artifact's representation of membership in one
/// per-point mathematical universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteId {
    coords: Vec<usize>,
}

impl SiteId {
    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Lattice {
    pub fn new(extent: Vec<usize>, spacing: f64, boundary: Boundary) -> Result<Self> {
        let origin = vec![0.0; extent.len()];
        Self::with_origin(extent, spacing, boundary, origin)
    }

    pub fn with_origin(
        extent: Vec<usize>,
        spacing: f64,
        boundary: Boundary,
        origin: Vec<f64>,
    ) -> Result<Self> {
        if extent.is_empty() || extent.len() > 3 {
            return Err(Error::Config(format!(
                "lattice must have 1 to 3 dimensions, got {}",
                extent.len()
            )));
        }
        if extent.iter().any(|&n| n < 2) {
            return Err(Error::Config(format!(
                "every extent must be >= 2, got {extent:?}"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Config(format!("spacing must be positive, got {spacing}")));
        }
        if origin.len() != extent.len() || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Config(format!("invalid origin {origin:?}")));
        }
        let sites: usize = extent.iter().product();
        if sites > SITE_CAP {
            return Err(Error::LatticeTooLarge { sites, cap: SITE_CAP });
        }
        Ok(Self { extent, spacing, boundary, origin })
    }

    /// 1-D lattice with the default spec parameters: 256 sites, spacing 0.1.
    pub fn default_1d() -> Self {
        Self::new(vec![256], 0.1, Boundary::Periodic).expect("default lattice is valid")
    }

    pub fn dims(&self) -> usize {
        self.extent.len()
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn site_count(&self) -> usize {
        self.extent.iter().product()
    }

    /// Validate coordinates and produce a `SiteId`.
    pub fn site(&self, coords: &[usize]) -> Result<SiteId> {
        if coords.len() != self.dims()
            || coords.iter().zip(&self.extent).any(|(&c, &n)| c >= n)
        {
            return Err(Error::OutOfBounds {
                coords: coords.to_vec(),
                extent: self.extent.clone(),
            });
        }
        Ok(SiteId { coords: coords.to_vec() })
    }

    pub fn contains(&self, site: &SiteId) -> bool {
        site.coords.len() == self.dims()
            && site.coords.iter().zip(&self.extent).all(|(&c, &n)| c < n)
    }

    pub fn check_site(&self, site: &SiteId) -> Result<()> {
        if self.contains(site) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                coords: site.coords.clone(),
                extent: self.extent.clone(),
            })
        }
    }

    /// Row-major linear index (last axis fastest).
    pub fn linear_index(&self, site: &SiteId) -> usize {
        let mut idx = 0;
        for (c, n) in site.coords.iter().zip(&self.extent) {
            idx = idx * n + c;
        }
        idx
    }

    pub fn site_at(&self, mut index: usize) -> SiteId {
        let mut coords = vec![0; self.dims()];
        for d in (0..self.dims()).rev() {
            coords[d] = index % self.extent[d];
            index /= self.extent[d];
        }
        SiteId { coords }
    }

    pub fn sites(&self) -> impl Iterator<Item = SiteId> + '_ {
        (0..self.site_count()).map(|i| self.site_at(i))
    }

    /// Physical coordinate of a site, per axis.
    pub fn coordinate(&self, site: &SiteId) -> Vec<f64> {
        site.coords
            .iter()
            .zip(&self.origin)
            .map(|(&c, &o)| o + c as f64 * self.spacing)
            .collect()
    }

    /// Neighbor along `axis` in direction `sign`; `None` past an open edge.
    pub fn neighbor(&self, site: &SiteId, axis: usize, sign: i8) -> Option<SiteId> {
        debug_assert!(axis < self.dims());
        let n = self.extent[axis];
        let c = site.coords[axis];
        let next = match (sign >= 0, self.boundary) {
            (true, _) if c + 1 < n => c + 1,
            (true, Boundary::Periodic) => 0,
            (true, Boundary::Open) => return None,
            (false, _) if c > 0 => c - 1,
            (false, Boundary::Periodic) => n - 1,
            (false, Boundary::Open) => return None,
        };
        let mut coords = site.coords.clone();
        coords[axis] = next;
        Some(SiteId { coords })
    }

    /// Axis and sign connecting two neighboring sites, periodic wrap included.
    pub fn adjacency(&self, from: &SiteId, to: &SiteId) -> Option<(usize, i8)> {
        let mut found = None;
        for d in 0..self.dims() {
            let a = from.coords[d];
            let b = to.coords[d];
            if a == b {
                continue;
            }
            if found.is_some() {
                return None; // differs on more than one axis
            }
            let n = self.extent[d];
            let step = if b == a + 1 {
                1
            } else if a == b + 1 {
                -1
            } else if self.boundary == Boundary::Periodic && a == n - 1 && b == 0 {
                1
            } else if self.boundary == Boundary::Periodic && b == n - 1 && a == 0 {
                -1
            } else {
                return None;
            };
            found = Some((d, step));
        }
        found
    }
}

/// The scalar field theta over a lattice.
///
/// A constant shift is stored separately from the per-site values, so
/// differences `theta(y) - theta(x)` cancel the shift bit-exactly and every
/// scale factor is invariant under `shift_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaField {
    lattice: Lattice,
    values: Vec<f64>,
    offset: f64,
}

impl ThetaField {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.site_count() {
            return Err(Error::Config(format!(
                "theta needs {} values, got {}",
                lattice.site_count(),
                values.len()
            )));
        }
        let field = Self { lattice, values, offset: 0.0 };
        field.check_range()?;
        Ok(field)
    }

    fn check_range(&self) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            let total = v + self.offset;
            if !total.is_finite() || total.abs() > THETA_CAP {
                return Err(Error::ThetaOutOfRange {
                    site: self.lattice.site_at(i),
                    value: total,
                    cap: THETA_CAP,
                });
            }
        }
        Ok(())
    }

    pub fn constant(lattice: Lattice, c: f64) -> Result<Self> {
        let n = lattice.site_count();
        Self::new(lattice, vec![c; n])
    }

    /// theta(y) = slope . coordinate(y).
    pub fn linear(lattice: Lattice, slope: &[f64]) -> Result<Self> {
        if slope.len() != lattice.dims() {
            return Err(Error::Config(format!(
                "slope needs {} components, got {}",
                lattice.dims(),
                slope.len()
            )));
        }
        let values = (0..lattice.site_count())
            .map(|i| {
                let site = lattice.site_at(i);
                lattice
                    .coordinate(&site)
                    .iter()
                    .zip(slope)
                    .map(|(c, s)| c * s)
                    .sum()
            })
            .collect();
        Self::new(lattice, values)
    }

    /// theta(y) = height * exp(-|y - center|^2 / (2 width^2)).
    pub fn gaussian_bump(
        lattice: Lattice,
        center: &[f64],
        width: f64,
        height: f64,
    ) -> Result<Self> {
        if center.len() != lattice.dims() {
            return Err(Error::Config(format!(
                "center needs {} components, got {}",
                lattice.dims(),
                center.len()
            )));
        }
        if !(width > 0.0) {
            return Err(Error::Config(format!("bump width must be positive, got {width}")));
        }
        let values = (0..lattice.site_count())
            .map(|i| {
                let site = lattice.site_at(i);
                let d2: f64 = lattice
                    .coordinate(&site)
                    .iter()
                    .zip(center)
                    .map(|(c, m)| (c - m) * (c - m))
                    .sum();
                height * (-d2 / (2.0 * width * width)).exp()
            })
            .collect();
        Self::new(lattice, values)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn value(&self, site: &SiteId) -> f64 {
        self.values[self.lattice.linear_index(site)] + self.offset
    }

    /// theta(y) - theta(x); the constant shift cancels exactly.
    pub fn exponent_between(&self, y: &SiteId, x: &SiteId) -> f64 {
        self.values[self.lattice.linear_index(y)] - self.values[self.lattice.linear_index(x)]
    }

    fn raw(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Largest minus smallest theta value over the whole lattice.
    pub fn spread(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        hi - lo
    }
}

/// Per-link exponents `A_j(x) * spacing`, one per (site, positive axis) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkExponentField {
    lattice: Lattice,
    /// exponents[site_index * dims + axis], for the +axis link out of the site.
    exponents: Vec<f64>,
    is_gradient: bool,
}

impl LinkExponentField {
    /// Exact discrete gradient of theta: the link exponent out of `x` along
    /// `+j` is `theta(x + e_j) - theta(x)`, so path sums telescope.
    pub fn from_theta(theta: &ThetaField) -> Self {
        let lattice = theta.lattice().clone();
        let dims = lattice.dims();
        let mut exponents = vec![0.0; lattice.site_count() * dims];
        for i in 0..lattice.site_count() {
            let site = lattice.site_at(i);
            for d in 0..dims {
                if let Some(nb) = lattice.neighbor(&site, d, 1) {
                    let j = lattice.linear_index(&nb);
                    exponents[i * dims + d] = theta.raw(j) - theta.raw(i);
                }
            }
        }
        Self { lattice, exponents, is_gradient: true }
    }

    /// Arbitrary link exponents; loop products need not close to 1.
    pub fn explicit(lattice: Lattice, exponents: Vec<f64>) -> Result<Self> {
        let expected = lattice.site_count() * lattice.dims();
        if exponents.len() != expected {
            return Err(Error::Config(format!(
                "link field needs {expected} exponents, got {}",
                exponents.len()
            )));
        }
        if exponents.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config("link exponents must be finite".into()));
        }
        Ok(Self { lattice, exponents, is_gradient: false })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn is_gradient(&self) -> bool {
        self.is_gradient
    }

    /// Exponent of the +axis link out of `site`.
    pub fn exponent(&self, site: &SiteId, axis: usize) -> f64 {
        self.exponents[self.lattice.linear_index(site) * self.lattice.dims() + axis]
    }

    /// Link factor `exp(exponent)` toward the neighbor of `site` along
    /// `(axis, sign)`; traversing a link backwards negates the exponent.
    pub fn link_factor(&self, site: &SiteId, axis: usize, sign: i8) -> Result<f64> {
        self.lattice.check_site(site)?;
        let nb = self
            .lattice
            .neighbor(site, axis, sign)
            .ok_or_else(|| Error::NoNeighbor { site: site.clone(), axis, sign })?;
        let e = if sign >= 0 {
            self.exponent(site, axis)
        } else {
            -self.exponent(&nb, axis)
        };
        Ok(e.exp())
    }
}

/// The positive real `r_{y,x}` relating the structure at `source` to the
/// structure at `target`; a number in the target site's structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleFactor {
    pub source: SiteId,
    pub target: SiteId,
    pub value: f64,
}

/// Central-difference gradient of theta at `x`; one-sided at open edges,
/// periodic wrap otherwise.
pub fn gradient_at(theta: &ThetaField, x: &SiteId) -> Result<Vec<f64>> {
    let lattice = theta.lattice();
    lattice.check_site(x)?;
    let h = lattice.spacing();
    let mut grad = Vec::with_capacity(lattice.dims());
    for d in 0..lattice.dims() {
        let fwd = lattice.neighbor(x, d, 1);
        let bwd = lattice.neighbor(x, d, -1);
        // raw differences, so a constant shift cancels bit-exactly
        let g = match (fwd, bwd) {
            (Some(f), Some(b)) => theta.exponent_between(&f, &b) / (2.0 * h),
            (Some(f), None) => theta.exponent_between(&f, x) / h,
            (None, Some(b)) => theta.exponent_between(x, &b) / h,
            (None, None) => unreachable!("extent >= 2 guarantees a neighbor"),
        };
        grad.push(g);
    }
    Ok(grad)
}

/// `exp(A_j(x) * spacing)` toward the neighbor of `x` along `(axis, sign)`,
/// with `A` from the central-difference gradient.
pub fn link_factor(theta: &ThetaField, x: &SiteId, axis: usize, sign: i8) -> Result<f64> {
    let lattice = theta.lattice();
    lattice.check_site(x)?;
    if lattice.neighbor(x, axis, sign).is_none() {
        return Err(Error::NoNeighbor { site: x.clone(), axis, sign });
    }
    let a = gradient_at(theta, x)?[axis];
    let s = if sign >= 0 { 1.0 } else { -1.0 };
    Ok((s * a * lattice.spacing()).exp())
}

/// `r_{y,x} = exp(theta(y) - theta(x))`, a number in the structure at `x`.
pub fn scale_factor(theta: &ThetaField, y: &SiteId, x: &SiteId) -> Result<ScaleFactor> {
    theta.lattice().check_site(y)?;
    theta.lattice().check_site(x)?;
    Ok(ScaleFactor {
        source: y.clone(),
        target: x.clone(),
        value: theta.exponent_between(y, x).exp(),
    })
}

/// Ordered product of link factors along a path of neighboring sites.
///
/// Exponents are summed first and exponentiated once.
pub fn path_product(field: &LinkExponentField, path: &[SiteId]) -> Result<f64> {
    let lattice = field.lattice();
    for site in path {
        lattice.check_site(site)?;
    }
    let mut sum = 0.0;
    for pair in path.windows(2) {
        let (from, to) = (&pair[0], &pair[1]);
        let (axis, sign) = lattice.adjacency(from, to).ok_or_else(|| Error::NonAdjacentPath {
            from: from.clone(),
            to: to.clone(),
        })?;
        sum += if sign >= 0 {
            field.exponent(from, axis)
        } else {
            -field.exponent(to, axis)
        };
    }
    Ok(sum.exp())
}

/// theta'(x) = theta(x) + c, tracked as an offset so every scale factor is
/// bit-identical to the unshifted field's.
pub fn shift_theta(theta: &ThetaField, c: f64) -> Result<ThetaField> {
    if !c.is_finite() {
        return Err(Error::Config(format!("shift must be finite, got {c}")));
    }
    let shifted = ThetaField {
        lattice: theta.lattice.clone(),
        values: theta.values.clone(),
        offset: theta.offset + c,
    };
    shifted.check_range()?;
    Ok(shifted)
}
