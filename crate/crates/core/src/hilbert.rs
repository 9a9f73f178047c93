//! Per-site finite-dimensional Hilbert structures, unitary state transport,
//! and the scaled representation of one site's space on another's.
//!
//! The scaled representation keeps addition, divides scalar multiplication
//! and the inner product by `r`, and maps states to `r` times themselves.
//! That choice keeps the space consistent with componentwise scaled complex
//! arithmetic; the rejected alternative (scaling the inner product by `r`
//! instead) is available behind [`ScalingConvention::AlternativeFootnote`]
//! purely to demonstrate that it breaks the componentwise consistency check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{scale_factor, SiteId, ThetaField};
use crate::transport::LocalNumber;

/// Which coefficient basis a state's amplitude vector is expressed in.
/// Mixing bases silently is the most likely implementation bug, so it is a
/// typed error instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Position,
    Momentum,
    Abstract,
}

impl std::fmt::Display for Basis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Basis::Position => "position",
            Basis::Momentum => "momentum",
            Basis::Abstract => "abstract",
        };
        f.write_str(s)
    }
}

/// A finite vector of amplitudes tagged with the site whose Hilbert
/// structure it inhabits.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalState {
    pub site: SiteId,
    pub amplitudes: Vec<Complex64>,
    pub basis: Basis,
}

impl LocalState {
    pub fn new(site: SiteId, amplitudes: Vec<Complex64>, basis: Basis) -> Result<Self> {
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Config("state amplitudes must be finite".into()));
        }
        Ok(Self { site, amplitudes, basis })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            site: self.site.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            basis: self.basis,
        }
    }
}

/// Unscaled inner product within one site's structure, conjugate-linear in
/// the first argument.
pub fn inner_product(phi: &LocalState, psi: &LocalState) -> Result<LocalNumber> {
    check_compatible(phi, psi)?;
    let value = phi
        .amplitudes
        .iter()
        .zip(&psi.amplitudes)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(LocalNumber::new(phi.site.clone(), value))
}

fn check_compatible(phi: &LocalState, psi: &LocalState) -> Result<()> {
    if phi.site != psi.site {
        return Err(Error::StructureMismatch {
            left: phi.site.clone(),
            right: psi.site.clone(),
        });
    }
    if phi.basis != psi.basis {
        return Err(Error::BasisMismatch {
            left: phi.basis.to_string(),
            right: psi.basis.to_string(),
        });
    }
    if phi.dim() != psi.dim() {
        return Err(Error::Config(format!(
            "state dimensions differ: {} vs {}",
            phi.dim(),
            psi.dim()
        )));
    }
    Ok(())
}

/// Which scaled-space operation table to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingConvention {
    /// Scalar multiplication and inner product divided by `r`, states
    /// mapped to `r` times themselves.
    #[default]
    Default,
    /// Inner product multiplied by `r`, states unscaled. Breaks the
    /// componentwise-consistency check; kept only to demonstrate that.
    AlternativeFootnote,
}

/// The scaled representation of another site's Hilbert structure on the
/// structure at `base_site`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledHilbertView {
    pub base_site: SiteId,
    r: f64,
    pub convention: ScalingConvention,
}

impl ScaledHilbertView {
    pub fn new(base_site: SiteId, r: f64) -> Result<Self> {
        Self::with_convention(base_site, r, ScalingConvention::Default)
    }

    pub fn with_convention(base_site: SiteId, r: f64, convention: ScalingConvention) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("scale factor must be positive and finite, got {r}")));
        }
        Ok(Self { base_site, r, convention })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Scaled scalar multiplication: `a ._r psi`.
    pub fn scalar_mul(&self, a: Complex64, psi: &LocalState) -> LocalState {
        psi.scale(a / self.r)
    }
}

/// Retag a state at the target site; amplitudes unchanged, so all inner
/// products are preserved exactly.
pub fn transport_state(phi: &LocalState, to: &SiteId) -> LocalState {
    LocalState {
        site: to.clone(),
        amplitudes: phi.amplitudes.clone(),
        basis: phi.basis,
    }
}

/// The scaled representation of `phi` at the target: `r_{from,to}` times
/// the transported state.
pub fn scaled_transport_state(
    phi: &LocalState,
    to: &SiteId,
    theta: &ThetaField,
) -> Result<LocalState> {
    let r = scale_factor(theta, &phi.site, to)?.value;
    Ok(transport_state(phi, to).scale(Complex64::new(r, 0.0)))
}

/// The scaled inner product: `<phi, psi> / r` under the default convention,
/// `r * <phi, psi>` under the rejected alternative.
pub fn scaled_inner_product(
    phi: &LocalState,
    psi: &LocalState,
    view: &ScaledHilbertView,
) -> Result<LocalNumber> {
    let plain = inner_product(phi, psi)?;
    let value = match view.convention {
        ScalingConvention::Default => plain.value / view.r,
        ScalingConvention::AlternativeFootnote => plain.value * view.r,
    };
    Ok(LocalNumber::new(view.base_site.clone(), value))
}

/// Residual of the identification of the scaled space with componentwise
/// scaled complex arithmetic: the scaled inner product must equal the sum
/// of componentwise scaled products `conj(phi_i) x_r psi_i`.
///
/// Zero (to rounding) under the default convention; order `|r - 1/r|` under
/// the alternative one.
pub fn componentwise_consistency_residual(
    phi: &LocalState,
    psi: &LocalState,
    view: &ScaledHilbertView,
) -> Result<f64> {
    let via_view = scaled_inner_product(phi, psi, view)?.value;
    let componentwise: Complex64 = phi
        .amplitudes
        .iter()
        .zip(&psi.amplitudes)
        .map(|(a, b)| a.conj() * b / view.r)
        .sum();
    let denom = 1.0f64.max(via_view.norm()).max(componentwise.norm());
    Ok((via_view - componentwise).norm() / denom)
}

/// Norm distance between a state at one site and a state at another, after
/// transporting the first to the second's site.
///
/// `plain` uses value-preserving transport and is independent of theta;
/// `scaled` multiplies the transported state by the scale factor first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    Plain,
    Scaled,
}

pub fn compare_states(
    phi: &LocalState,
    psi: &LocalState,
    theta: &ThetaField,
    mode: CompareMode,
) -> Result<f64> {
    let moved = match mode {
        CompareMode::Plain => transport_state(phi, &psi.site),
        CompareMode::Scaled => scaled_transport_state(phi, &psi.site, theta)?,
    };
    check_compatible(&moved, psi)?;
    let diff: f64 = moved
        .amplitudes
        .iter()
        .zip(&psi.amplitudes)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(diff.sqrt())
}
