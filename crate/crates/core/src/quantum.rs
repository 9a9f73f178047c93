//! Wave packets and the external vs internal scaling of expectation
//! values, the weighted resolution of identity, momentum eigenstates, the
//! covariant momentum, the weighted energy equation, equation invariance
//! under scaling, and support-region analysis.
//!
//! Sign convention: the momentum operator is `+i * hbar * d/dy` (one-sided,
//! `psi(y + dy) - psi(y)`), not the conventional `-i * hbar * d/dy`. All
//! identities checked here are covariant under that sign choice.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{gradient_at, scale_factor, Boundary, Lattice, ScaleFactor, SiteId, ThetaField};
use crate::hilbert::{scaled_transport_state, Basis, LocalState};
use crate::scaled::{correspond_to_base, scaled_mul, ScaledStructure};
use crate::transport::LocalNumber;

/// Relative cutoff defining a packet's support region.
pub const SUPPORT_EPSILON: f64 = 1e-8;

/// Normalization tolerance for wave packets: sum |psi|^2 * measure = 1.
pub const NORM_TOL: f64 = 1e-10;

/// A wave packet: one amplitude per lattice site, each conceptually a
/// number in that site's structure (the internal-scaling picture).
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    lattice: Lattice,
    amplitudes: Vec<Complex64>,
}

impl WavePacket {
    /// Validates normalization: sum |psi(y)|^2 * measure must be 1 within
    /// the tolerance.
    pub fn new(lattice: Lattice, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != lattice.site_count() {
            return Err(Error::Config(format!(
                "packet needs {} amplitudes, got {}",
                lattice.site_count(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Config("packet amplitudes must be finite".into()));
        }
        let packet = Self { lattice, amplitudes };
        let norm2 = packet.norm_sqr();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Config(format!(
                "packet is not normalized: sum |psi|^2 measure = {norm2}"
            )));
        }
        Ok(packet)
    }

    /// Rescale arbitrary amplitudes to the unit norm convention.
    pub fn normalized(lattice: Lattice, amplitudes: Vec<Complex64>) -> Result<Self> {
        let measure = lattice.spacing().powi(lattice.dims() as i32);
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * measure;
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::EmptySupport);
        }
        let scale = 1.0 / norm2.sqrt();
        let amplitudes = amplitudes.iter().map(|a| a * scale).collect();
        Self::new(lattice, amplitudes)
    }

    /// Gaussian amplitude `exp(-(y - center)^2 / (4 sigma^2))`, normalized.
    pub fn gaussian(lattice: Lattice, center: &[f64], sigma: f64) -> Result<Self> {
        if center.len() != lattice.dims() {
            return Err(Error::Config(format!(
                "center needs {} components, got {}",
                lattice.dims(),
                center.len()
            )));
        }
        if !(sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        let amps: Vec<Complex64> = (0..lattice.site_count())
            .map(|i| {
                let coord = lattice.coordinate(&lattice.site_at(i));
                let d2: f64 = coord.iter().zip(center).map(|(c, m)| (c - m) * (c - m)).sum();
                Complex64::new((-d2 / (4.0 * sigma * sigma)).exp(), 0.0)
            })
            .collect();
        Self::normalized(lattice, amps)
    }

    /// All weight on one site.
    pub fn delta(lattice: Lattice, site: &SiteId) -> Result<Self> {
        lattice.check_site(site)?;
        let measure = lattice.spacing().powi(lattice.dims() as i32);
        let mut amps = vec![Complex64::new(0.0, 0.0); lattice.site_count()];
        amps[lattice.linear_index(site)] = Complex64::new(1.0 / measure.sqrt(), 0.0);
        Self::new(lattice, amps)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, site: &SiteId) -> Complex64 {
        self.amplitudes[self.lattice.linear_index(site)]
    }

    /// Integration measure: spacing^dims.
    pub fn measure(&self) -> f64 {
        self.lattice.spacing().powi(self.lattice.dims() as i32)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.measure()
    }

    /// Linear indices of sites with |psi| above the relative support cutoff.
    pub fn support(&self) -> Vec<usize> {
        let max = self.amplitudes.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
        let cutoff = SUPPORT_EPSILON * max;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > cutoff)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Observable kinds realized as matrices over the position basis.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableKind {
    /// Coordinate along axis 0.
    Position,
    /// `+i hbar` times the forward difference along axis 0 (periodic).
    /// Hermitian only in the continuum limit, matching the one-sided
    /// construction of the covariant momentum.
    Momentum,
    Hamiltonian { mass: f64 },
}

impl ObservableKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObservableKind::Position => "position",
            ObservableKind::Momentum => "momentum",
            ObservableKind::Hamiltonian { .. } => "hamiltonian",
        }
    }
}

/// An observable with its dense matrix realization over the position basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub kind: ObservableKind,
    pub hbar: f64,
    matrix: DMatrix<Complex64>,
}

const HERMITICITY_TOL: f64 = 1e-12;

impl Observable {
    pub fn position(lattice: &Lattice) -> Self {
        let n = lattice.site_count();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let coord = lattice.coordinate(&lattice.site_at(i));
            m[(i, i)] = Complex64::new(coord[0], 0.0);
        }
        Self { kind: ObservableKind::Position, hbar: 1.0, matrix: m }
    }

    pub fn momentum(lattice: &Lattice, hbar: f64) -> Result<Self> {
        if lattice.boundary() != Boundary::Periodic {
            return Err(Error::Config(
                "momentum observable needs a periodic lattice".into(),
            ));
        }
        let n = lattice.site_count();
        let h = lattice.spacing();
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let site = lattice.site_at(i);
            let fwd = lattice.neighbor(&site, 0, 1).expect("periodic");
            let j = lattice.linear_index(&fwd);
            m[(i, j)] += Complex64::new(0.0, hbar / h);
            m[(i, i)] -= Complex64::new(0.0, hbar / h);
        }
        Ok(Self { kind: ObservableKind::Momentum, hbar, matrix: m })
    }

    /// `H = -(hbar^2 / 2m) laplacian + V`, with Dirichlet ends on open
    /// lattices and wrap on periodic ones.
    pub fn hamiltonian(
        lattice: &Lattice,
        potential: &[f64],
        mass: f64,
        hbar: f64,
    ) -> Result<Self> {
        let n = lattice.site_count();
        if potential.len() != n {
            return Err(Error::Config(format!(
                "potential needs {n} values, got {}",
                potential.len()
            )));
        }
        if !(mass > 0.0) {
            return Err(Error::Config(format!("mass must be positive, got {mass}")));
        }
        let h = lattice.spacing();
        let kin = hbar * hbar / (2.0 * mass * h * h);
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            let site = lattice.site_at(i);
            m[(i, i)] = Complex64::new(potential[i], 0.0);
            for d in 0..lattice.dims() {
                m[(i, i)] += Complex64::new(2.0 * kin, 0.0);
                for sign in [1i8, -1] {
                    if let Some(nb) = lattice.neighbor(&site, d, sign) {
                        let j = lattice.linear_index(&nb);
                        m[(i, j)] -= Complex64::new(kin, 0.0);
                    }
                }
            }
        }
        let obs = Self { kind: ObservableKind::Hamiltonian { mass }, hbar, matrix: m };
        obs.check_hermitian()?;
        Ok(obs)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let n = self.matrix.nrows();
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let asym = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                max_asym = max_asym.max(asym);
            }
        }
        if max_asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian { max_asymmetry: max_asym });
        }
        Ok(())
    }

    pub fn apply(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_column_slice(amplitudes);
        let out = &self.matrix * v;
        out.iter().copied().collect()
    }
}

/// Assemble all packet amplitudes, as same-values, into one state at the
/// reference site: the unscaled external picture.
pub fn pack_external(psi: &WavePacket, at: &SiteId) -> Result<LocalState> {
    psi.lattice().check_site(at)?;
    LocalState::new(at.clone(), psi.amplitudes().to_vec(), Basis::Position)
}

/// `r_{y,x}` times the transported state: the externally scaled
/// representation at `x` of a state at `y`.
pub fn externally_scaled_state(
    psi_at_y: &LocalState,
    x: &SiteId,
    theta: &ThetaField,
) -> Result<LocalState> {
    scaled_transport_state(psi_at_y, x, theta)
}

/// `sum_w conj(psi(w)) (obs psi)(w) * measure`, computed in the reference
/// structure at `at`.
pub fn expectation_unscaled(
    psi: &WavePacket,
    obs: &Observable,
    at: &SiteId,
) -> Result<LocalNumber> {
    psi.lattice().check_site(at)?;
    let applied = obs.apply(psi.amplitudes());
    let value: Complex64 = psi
        .amplitudes()
        .iter()
        .zip(&applied)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(LocalNumber::new(at.clone(), value * psi.measure()))
}

/// `r_{y,x}` times the unscaled expectation: the representation at `x` of
/// the value at `y`.
pub fn expectation_external(
    psi: &WavePacket,
    obs: &Observable,
    y: &SiteId,
    x: &SiteId,
    theta: &ThetaField,
) -> Result<LocalNumber> {
    let r = scale_factor(theta, y, x)?.value;
    let base = expectation_unscaled(psi, obs, x)?;
    Ok(LocalNumber::new(x.clone(), r * base.value))
}

/// Internally scaled expectation: each site's integrand is transported,
/// with scaling, to the reference site before summation.
///
/// Supported for position and momentum; the momentum integrand uses the
/// discrete covariant operator.
pub fn expectation_internal(
    psi: &WavePacket,
    obs: &Observable,
    x: &SiteId,
    theta: &ThetaField,
) -> Result<LocalNumber> {
    let lattice = psi.lattice();
    lattice.check_site(x)?;
    let integrand: Vec<Option<Complex64>> = match obs.kind {
        ObservableKind::Position => (0..lattice.site_count())
            .map(|i| {
                let a = psi.amplitudes()[i];
                let coord = lattice.coordinate(&lattice.site_at(i));
                Some(a.conj() * coord[0] * a)
            })
            .collect(),
        ObservableKind::Momentum => {
            let cov = canonical_momentum_apply(psi, 0, theta, obs.hbar, MomentumForm::Discrete)?;
            (0..lattice.site_count())
                .map(|i| {
                    if cov.valid[i] {
                        Some(psi.amplitudes()[i].conj() * cov.values[i])
                    } else {
                        None
                    }
                })
                .collect()
        }
        ObservableKind::Hamiltonian { .. } => {
            return Err(Error::UnsupportedObservable { kind: obs.kind.name().into() })
        }
    };
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, term) in integrand.iter().enumerate() {
        if let Some(t) = term {
            let y = lattice.site_at(i);
            let r = theta.exponent_between(&y, x).exp();
            sum += r * t;
        }
    }
    Ok(LocalNumber::new(x.clone(), sum * psi.measure()))
}

/// Transfer an internally scaled expectation from its site to `z`:
/// multiply by `r_{x,z}` and retag. By the cocycle this equals the
/// internal expectation recomputed directly at `z`.
pub fn transfer_internal(
    value_at_x: &LocalNumber,
    z: &SiteId,
    theta: &ThetaField,
) -> Result<LocalNumber> {
    let r = scale_factor(theta, &value_at_x.site, z)?.value;
    Ok(LocalNumber::new(z.clone(), r * value_at_x.value))
}

/// Diagonal of the weighted resolution of identity at `x`:
/// entries `r_{y,x} * measure`, one per position-basis site.
pub fn scaled_identity_operator(x: &SiteId, theta: &ThetaField) -> Result<Vec<f64>> {
    let lattice = theta.lattice();
    lattice.check_site(x)?;
    let measure = lattice.spacing().powi(lattice.dims() as i32);
    Ok((0..lattice.site_count())
        .map(|i| theta.exponent_between(&lattice.site_at(i), x).exp() * measure)
        .collect())
}

/// Max deviation of the weighted resolution from the unscaled one
/// (entries all equal to the measure); zero iff theta is constant.
pub fn scaled_identity_deviation(x: &SiteId, theta: &ThetaField) -> Result<f64> {
    let measure = theta.lattice().spacing().powi(theta.lattice().dims() as i32);
    let diag = scaled_identity_operator(x, theta)?;
    Ok(diag.iter().map(|d| (d - measure).abs()).fold(0.0, f64::max))
}

/// Momentum eigenstate expressed over weighted position states at `x`:
/// amplitude `r_{y,x} * exp(i k . y) * measure` at each site.
///
/// Needs a periodic lattice and `k` on the reciprocal grid
/// `2 pi n / (extent * spacing)` per axis.
pub fn momentum_eigenstate(k: &[f64], x: &SiteId, theta: &ThetaField) -> Result<LocalState> {
    let lattice = theta.lattice();
    lattice.check_site(x)?;
    if lattice.boundary() != Boundary::Periodic {
        return Err(Error::Config("momentum eigenstates need a periodic lattice".into()));
    }
    if k.len() != lattice.dims() {
        return Err(Error::Config(format!(
            "k needs {} components, got {}",
            lattice.dims(),
            k.len()
        )));
    }
    for (d, &kd) in k.iter().enumerate() {
        let period = lattice.extent()[d] as f64 * lattice.spacing();
        let n = kd * period / (2.0 * std::f64::consts::PI);
        if (n - n.round()).abs() > 1e-9 {
            return Err(Error::OffGridMomentum { k: kd, axis: d });
        }
    }
    let measure = lattice.spacing().powi(lattice.dims() as i32);
    let amps = (0..lattice.site_count())
        .map(|i| {
            let site = lattice.site_at(i);
            let r = theta.exponent_between(&site, x).exp();
            let phase: f64 = lattice
                .coordinate(&site)
                .iter()
                .zip(k)
                .map(|(c, kd)| c * kd)
                .sum();
            r * measure * Complex64::new(0.0, phase).exp()
        })
        .collect();
    LocalState::new(x.clone(), amps, Basis::Position)
}

/// Which form of the covariant momentum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumForm {
    /// `i hbar (r_{y+e, y} psi(y+e) - psi(y)) / spacing` with the exact
    /// neighbor scale factor.
    Discrete,
    /// `i hbar ((psi(y+e) - psi(y)) / spacing + A_j(y) psi(y))`, the
    /// first-order expansion of the neighbor factor.
    Expanded,
}

/// Per-site result of applying the covariant momentum; sites without a
/// forward neighbor (open edges) are marked invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantMomentum {
    pub values: Vec<Complex64>,
    pub valid: Vec<bool>,
}

pub fn canonical_momentum_apply(
    psi: &WavePacket,
    axis: usize,
    theta: &ThetaField,
    hbar: f64,
    form: MomentumForm,
) -> Result<CovariantMomentum> {
    let lattice = psi.lattice();
    if axis >= lattice.dims() {
        return Err(Error::Config(format!(
            "axis {axis} out of range for a {}-dimensional lattice",
            lattice.dims()
        )));
    }
    if theta.lattice() != lattice {
        return Err(Error::Config("theta and packet lattices differ".into()));
    }
    let n = lattice.site_count();
    let h = lattice.spacing();
    let i_hbar = Complex64::new(0.0, hbar);
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    let mut valid = vec![false; n];
    for i in 0..n {
        let site = lattice.site_at(i);
        let Some(fwd) = lattice.neighbor(&site, axis, 1) else {
            continue;
        };
        let j = lattice.linear_index(&fwd);
        let ahead = psi.amplitudes()[j];
        let here = psi.amplitudes()[i];
        values[i] = match form {
            MomentumForm::Discrete => {
                let r = theta.exponent_between(&fwd, &site).exp();
                i_hbar * (r * ahead - here) / h
            }
            MomentumForm::Expanded => {
                let a = gradient_at(theta, &site)?[axis];
                i_hbar * ((ahead - here) / h + a * here)
            }
        };
        valid[i] = true;
    }
    Ok(CovariantMomentum { values, valid })
}

/// Residuals of the weighted (position-basis) energy equation and of its
/// transfer between reference sites.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyEquationReport {
    pub dim: usize,
    /// Max over eigenpairs of ||H v - E v|| for the plain eigenproblem.
    pub eigen_residual_max: f64,
    /// Max over eigenpairs of the difference between the transferred
    /// weighted equation and the one built directly at the target via the
    /// cocycle.
    pub transfer_vs_direct_residual: f64,
    /// Max over eigenpairs of ||H W v - measure * E v||; zero iff theta is
    /// constant over the lattice.
    pub scaled_equation_residual_max: f64,
    /// Max |r_{w,y} - 1| * measure: the weight the position-basis
    /// expansion carries and the energy-basis expansion does not.
    pub basis_discrepancy: f64,
}

/// Solve the plain eigenproblem of a Hamiltonian observable, form the
/// weighted equation with per-site factors `r_{w,y}`, and verify that
/// transferring it to `x` (scale by `r_{y,x}`, cancel, reweight via the
/// cocycle) reproduces the direct construction.
pub fn energy_equation_check(
    h: &Observable,
    y: &SiteId,
    x: &SiteId,
    theta: &ThetaField,
) -> Result<EnergyEquationReport> {
    if !matches!(h.kind, ObservableKind::Hamiltonian { .. }) {
        return Err(Error::UnsupportedObservable { kind: h.kind.name().into() });
    }
    h.check_hermitian()?;
    let lattice = theta.lattice();
    lattice.check_site(y)?;
    lattice.check_site(x)?;
    let n = h.matrix().nrows();
    if n != lattice.site_count() {
        return Err(Error::Config(format!(
            "hamiltonian dimension {n} does not match lattice site count {}",
            lattice.site_count()
        )));
    }

    // the hamiltonian built here is real symmetric
    let real = DMatrix::from_fn(n, n, |i, j| h.matrix()[(i, j)].re);
    let eig = real.clone().symmetric_eigen();

    let measure = lattice.spacing().powi(lattice.dims() as i32);
    let weights_direct: Vec<f64> = (0..n)
        .map(|i| theta.exponent_between(&lattice.site_at(i), y).exp())
        .collect();
    // cocycle route: r_{w,y} = r_{w,x} * r_{x,y}
    let r_xy = theta.exponent_between(x, y).exp();
    let weights_cocycle: Vec<f64> = (0..n)
        .map(|i| theta.exponent_between(&lattice.site_at(i), x).exp() * r_xy)
        .collect();
    let r_yx = theta.exponent_between(y, x).exp();

    let mut eigen_residual_max = 0.0f64;
    let mut transfer_vs_direct = 0.0f64;
    let mut scaled_residual_max = 0.0f64;
    for idx in 0..n {
        let v = eig.eigenvectors.column(idx).into_owned();
        let e = eig.eigenvalues[idx];
        let hv = &real * &v;
        eigen_residual_max = eigen_residual_max.max((&hv - e * &v).norm());

        let wv_direct = DVector::from_fn(n, |i, _| weights_direct[i] * measure * v[i]);
        let lhs_direct = &real * &wv_direct;
        // transfer: scale both sides by r_{y,x}, then cancel it again
        let lhs_transferred = (r_yx * &lhs_direct) / r_yx;
        let wv_cocycle = DVector::from_fn(n, |i, _| weights_cocycle[i] * measure * v[i]);
        let lhs_cocycle = &real * &wv_cocycle;
        transfer_vs_direct = transfer_vs_direct.max((&lhs_transferred - &lhs_cocycle).norm());

        scaled_residual_max = scaled_residual_max.max((&lhs_direct - measure * e * &v).norm());
    }

    let basis_discrepancy = weights_direct
        .iter()
        .map(|w| (w - 1.0).abs() * measure)
        .fold(0.0, f64::max);

    Ok(EnergyEquationReport {
        dim: n,
        eigen_residual_max,
        transfer_vs_direct_residual: transfer_vs_direct,
        scaled_equation_residual_max: scaled_residual_max,
        basis_discrepancy,
    })
}

/// Relative tolerance for equation invariance.
pub const EQUATION_TOL: f64 = 1e-12;

/// Evaluate the mass-energy relation with scaled operations on the
/// corresponded values `rE`, `rm`, `rc`: true iff the scaled equation
/// holds, which is guaranteed to match the truth of `E = m c^2`.
pub fn equation_invariance_check(m: f64, c: f64, energy: f64, r: f64) -> Result<bool> {
    let s = ScaledStructure::new(r)?;
    let lhs = correspond_to_base(Complex64::new(energy, 0.0), &s);
    let m_rep = correspond_to_base(Complex64::new(m, 0.0), &s);
    let c_rep = correspond_to_base(Complex64::new(c, 0.0), &s);
    let rhs = scaled_mul(scaled_mul(m_rep, c_rep, &s), c_rep, &s);
    let denom = 1.0f64.max(rhs.get().norm());
    Ok((lhs.get() - rhs.get()).norm() <= EQUATION_TOL * denom)
}

/// Support-region analysis: split `r_{y,x}` into an internal part over the
/// packet's support and an external factor from the support's edge to the
/// reference site.
#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    /// Linear site indices of the support region.
    pub region: Vec<usize>,
    /// Support site nearest the reference site.
    pub z: SiteId,
    pub x: SiteId,
    /// Largest minus smallest theta over the support.
    pub max_theta_spread: f64,
    /// `max_{y in Z} |r_{y,z} - 1|`.
    pub max_internal_deviation: f64,
    pub r_zx: ScaleFactor,
    pub within_l: bool,
}

pub fn region_l_analysis(
    psi: &WavePacket,
    x: &SiteId,
    theta: &ThetaField,
    tol_r: f64,
) -> Result<RegionReport> {
    if !(tol_r > 0.0) {
        return Err(Error::Config(format!("tol_r must be positive, got {tol_r}")));
    }
    let lattice = psi.lattice();
    lattice.check_site(x)?;
    if theta.lattice() != lattice {
        return Err(Error::Config("theta and packet lattices differ".into()));
    }
    let region = psi.support();
    if region.is_empty() {
        return Err(Error::EmptySupport);
    }

    // boundary site of Z: the support site nearest x
    let x_coord = lattice.coordinate(x);
    let z_index = *region
        .iter()
        .min_by(|&&a, &&b| {
            let da = dist2(&lattice.coordinate(&lattice.site_at(a)), &x_coord);
            let db = dist2(&lattice.coordinate(&lattice.site_at(b)), &x_coord);
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
        .expect("region nonempty");
    let z = lattice.site_at(z_index);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut max_dev = 0.0f64;
    for &i in &region {
        let site = lattice.site_at(i);
        let v = theta.exponent_between(&site, &z);
        lo = lo.min(v);
        hi = hi.max(v);
        max_dev = max_dev.max((v.exp() - 1.0).abs());
    }
    let r_zx = scale_factor(theta, &z, x)?;
    let within_l = (r_zx.value - 1.0).abs() <= tol_r;
    Ok(RegionReport {
        region,
        z,
        x: x.clone(),
        max_theta_spread: hi - lo,
        max_internal_deviation: max_dev,
        r_zx,
        within_l,
    })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// One expectation value with its evaluation mode, ready for report files.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectationReport {
    pub observable: String,
    pub mode: String,
    pub site: Vec<usize>,
    pub value: [f64; 2],
}

impl ExpectationReport {
    pub fn new(observable: &str, mode: &str, number: &LocalNumber) -> Self {
        Self {
            observable: observable.to_string(),
            mode: mode.to_string(),
            site: number.site.coords().to_vec(),
            value: [number.value.re, number.value.im],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::shift_theta;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lat1d(n: usize, h: f64) -> Lattice {
        Lattice::new(vec![n], h, Boundary::Periodic).unwrap()
    }

    fn random_packet(lattice: &Lattice, seed: u64) -> WavePacket {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..lattice.site_count())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        WavePacket::normalized(lattice.clone(), amps).unwrap()
    }

    #[test]
    fn packet_constructors_normalize() {
        let lat = lat1d(256, 0.1);
        let g = WavePacket::gaussian(lat.clone(), &[3.2], 0.5).unwrap();
        assert_relative_eq!(g.norm_sqr(), 1.0, epsilon = 1e-12);
        let site = lat.site(&[40]).unwrap();
        let d = WavePacket::delta(lat.clone(), &site).unwrap();
        assert_relative_eq!(d.norm_sqr(), 1.0, epsilon = 1e-12);
        // unnormalized amplitudes rejected by new
        let raw = vec![Complex64::new(1.0, 0.0); 256];
        assert!(WavePacket::new(lat, raw).is_err());
    }

    #[test]
    fn pack_external_examples() {
        let lat = lat1d(64, 0.1);
        let g = WavePacket::gaussian(lat.clone(), &[3.2], 0.5).unwrap();
        let at = lat.site(&[0]).unwrap();
        let state = pack_external(&g, &at).unwrap();
        let norm2 = state.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * g.measure();
        assert_relative_eq!(norm2, 1.0, epsilon = 1e-10);
        // two reference sites give amplitude-identical vectors
        let other = pack_external(&g, &lat.site(&[17]).unwrap()).unwrap();
        assert_eq!(state.amplitudes, other.amplitudes);
        // delta packet gives a basis vector
        let w = lat.site(&[9]).unwrap();
        let d = WavePacket::delta(lat.clone(), &w).unwrap();
        let ds = pack_external(&d, &at).unwrap();
        for (i, a) in ds.amplitudes.iter().enumerate() {
            if i == 9 {
                assert!(a.norm() > 0.0);
            } else {
                assert_eq!(a.norm(), 0.0);
            }
        }
    }

    #[test]
    fn externally_scaled_state_scales_amplitudes_and_norm() {
        let lat = lat1d(32, 0.2);
        let ln2 = std::f64::consts::LN_2;
        let mut vals = vec![0.0; 32];
        let y = lat.site(&[3]).unwrap();
        vals[lat.linear_index(&y)] = ln2;
        let theta = ThetaField::new(lat.clone(), vals).unwrap();
        let packet = random_packet(&lat, 3);
        let state = pack_external(&packet, &y).unwrap();
        let x = lat.site(&[20]).unwrap();
        let scaled = externally_scaled_state(&state, &x, &theta).unwrap();
        for (a, b) in state.amplitudes.iter().zip(&scaled.amplitudes) {
            assert_relative_eq!((2.0 * a - b).norm(), 0.0, epsilon = 1e-13);
        }
        assert_relative_eq!(scaled.norm(), 2.0 * state.norm(), max_relative = 1e-13);

        let flat = ThetaField::constant(lat.clone(), 4.0).unwrap();
        assert_eq!(
            externally_scaled_state(&state, &x, &flat).unwrap(),
            crate::hilbert::transport_state(&state, &x)
        );
    }

    #[test]
    fn position_expectation_examples() {
        // symmetric packet about coordinate 0 -> 0
        let lat = Lattice::with_origin(vec![65], 0.1, Boundary::Open, vec![-3.2]).unwrap();
        let g = WavePacket::gaussian(lat.clone(), &[0.0], 0.4).unwrap();
        let obs = Observable::position(&lat);
        let at = lat.site(&[0]).unwrap();
        let val = expectation_unscaled(&g, &obs, &at).unwrap();
        assert!(val.value.norm() < 1e-10);

        // delta packet at w0 -> w0
        let lat = lat1d(64, 0.1);
        let w = lat.site(&[23]).unwrap();
        let d = WavePacket::delta(lat.clone(), &w).unwrap();
        let obs = Observable::position(&lat);
        let val = expectation_unscaled(&d, &obs, &lat.site(&[0]).unwrap()).unwrap();
        assert_relative_eq!(val.value.re, 2.3, max_relative = 1e-12);

        // gaussian packet mean against brute-force quadrature
        let lat = lat1d(256, 0.1);
        let g = WavePacket::gaussian(lat.clone(), &[3.2], 0.5).unwrap();
        let obs = Observable::position(&lat);
        let val = expectation_unscaled(&g, &obs, &lat.site(&[0]).unwrap()).unwrap();
        let mut oracle = 0.0;
        for i in 0..256 {
            let y = i as f64 * 0.1;
            let a = g.amplitudes()[i].re;
            oracle += a * y * a * 0.1;
        }
        assert_relative_eq!(val.value.re, oracle, max_relative = 1e-12);
        assert!((val.value.re - 3.2).abs() < 1e-6);
    }

    #[test]
    fn external_scaling_multiplies_and_preserves_ordering() {
        let lat = lat1d(64, 0.1);
        let ln2 = std::f64::consts::LN_2;
        let mut vals = vec![0.0; 64];
        let y = lat.site(&[10]).unwrap();
        vals[lat.linear_index(&y)] = ln2;
        let theta = ThetaField::new(lat.clone(), vals).unwrap();
        let x = lat.site(&[40]).unwrap();
        let obs = Observable::position(&lat);

        let packets: Vec<WavePacket> = (0..4)
            .map(|s| {
                WavePacket::gaussian(lat.clone(), &[1.0 + s as f64], 0.3 + 0.1 * s as f64).unwrap()
            })
            .collect();
        let mut unscaled_mags = Vec::new();
        let mut external_mags = Vec::new();
        for p in &packets {
            let u = expectation_unscaled(p, &obs, &x).unwrap().value;
            let e = expectation_external(p, &obs, &y, &x, &theta).unwrap().value;
            assert_relative_eq!((e - 2.0 * u).norm(), 0.0, epsilon = 1e-12);
            unscaled_mags.push(u.norm());
            external_mags.push(e.norm());
        }
        let rank = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
            idx
        };
        assert_eq!(rank(&unscaled_mags), rank(&external_mags));

        let flat = ThetaField::constant(lat.clone(), 1.0).unwrap();
        let p = &packets[0];
        let u = expectation_unscaled(p, &obs, &x).unwrap().value;
        let e = expectation_external(p, &obs, &y, &x, &flat).unwrap().value;
        assert_eq!(u, e);
    }

    #[test]
    fn internal_expectation_examples() {
        let lat = lat1d(128, 0.1);
        let x = lat.site(&[0]).unwrap();
        let obs = Observable::position(&lat);

        // constant theta: internal equals unscaled
        let flat = ThetaField::constant(lat.clone(), 2.0).unwrap();
        let p = random_packet(&lat, 4);
        let internal = expectation_internal(&p, &obs, &x, &flat).unwrap().value;
        let unscaled = expectation_unscaled(&p, &obs, &x).unwrap().value;
        assert!((internal - unscaled).norm() < 1e-12);

        // even theta and even |psi|^2 about coordinate 0: odd integrand sums to 0
        let lat_sym = Lattice::with_origin(vec![65], 0.1, Boundary::Open, vec![-3.2]).unwrap();
        let g = WavePacket::gaussian(lat_sym.clone(), &[0.0], 0.4).unwrap();
        let theta_even =
            ThetaField::gaussian_bump(lat_sym.clone(), &[0.0], 1.0, 0.3).unwrap();
        let obs_sym = Observable::position(&lat_sym);
        let v = expectation_internal(&g, &obs_sym, &lat_sym.site(&[32]).unwrap(), &theta_even)
            .unwrap()
            .value;
        assert!(v.norm() < 1e-10);

        // linear theta, gaussian packet: matches the brute-force weighted oracle
        let lat = lat1d(256, 0.1);
        let theta = ThetaField::linear(lat.clone(), &[0.05]).unwrap();
        let g = WavePacket::gaussian(lat.clone(), &[3.2], 0.5).unwrap();
        let x = lat.site(&[0]).unwrap();
        let obs = Observable::position(&lat);
        let got = expectation_internal(&g, &obs, &x, &theta).unwrap().value.re;
        let mut oracle = 0.0;
        for i in 0..256 {
            let y = i as f64 * 0.1;
            let a = g.amplitudes()[i].re;
            oracle += (0.05 * (y - 0.0)).exp() * a * y * a * 0.1;
        }
        assert_relative_eq!(got, oracle, max_relative = 1e-10);
    }

    #[test]
    fn internal_rejects_hamiltonian() {
        let lat = lat1d(16, 0.5);
        let theta = ThetaField::constant(lat.clone(), 0.0).unwrap();
        let h = Observable::hamiltonian(&lat, &vec![0.0; 16], 1.0, 1.0).unwrap();
        let p = random_packet(&lat, 5);
        assert!(matches!(
            expectation_internal(&p, &h, &lat.site(&[0]).unwrap(), &theta),
            Err(Error::UnsupportedObservable { .. })
        ));
    }

    #[test]
    fn transfer_internal_matches_direct_recomputation() {
        let lat = lat1d(96, 0.1);
        let values: Vec<f64> = (0..96).map(|i| (i as f64 * 0.21).sin() * 0.4).collect();
        let theta = ThetaField::new(lat.clone(), values).unwrap();
        let p = random_packet(&lat, 6);
        let obs = Observable::position(&lat);
        let x = lat.site(&[12]).unwrap();
        let z = lat.site(&[77]).unwrap();
        let at_x = expectation_internal(&p, &obs, &x, &theta).unwrap();
        // z = x is the identity
        let same = transfer_internal(&at_x, &x, &theta).unwrap();
        assert_eq!(same.value, at_x.value);
        let moved = transfer_internal(&at_x, &z, &theta).unwrap();
        let direct = expectation_internal(&p, &obs, &z, &theta).unwrap();
        assert_relative_eq!(
            (moved.value - direct.value).norm() / direct.value.norm(),
            0.0,
            epsilon = 1e-12
        );
        // constant theta: transfer is the identity
        let flat = ThetaField::constant(lat.clone(), 1.0).unwrap();
        let v = expectation_internal(&p, &obs, &x, &flat).unwrap();
        assert_eq!(transfer_internal(&v, &z, &flat).unwrap().value, v.value);
    }

    #[test]
    fn scaled_identity_examples() {
        let lat = Lattice::new(vec![16], 1.0, Boundary::Periodic).unwrap();
        let flat = ThetaField::constant(lat.clone(), 0.5).unwrap();
        let x = lat.site(&[4]).unwrap();
        let diag = scaled_identity_operator(&x, &flat).unwrap();
        assert!(diag.iter().all(|&d| d == 1.0));
        assert_eq!(scaled_identity_deviation(&x, &flat).unwrap(), 0.0);

        let values: Vec<f64> = (0..16).map(|i| (i as f64 * 0.3).cos()).collect();
        let theta = ThetaField::new(lat.clone(), values).unwrap();
        let diag = scaled_identity_operator(&x, &theta).unwrap();
        assert!(diag.iter().all(|&d| d > 0.0));
        assert!(scaled_identity_deviation(&x, &theta).unwrap() > 0.0);
    }

    #[test]
    fn momentum_eigenstate_examples() {
        let lat = lat1d(64, 0.1);
        let flat = ThetaField::constant(lat.clone(), 0.0).unwrap();
        let x = lat.site(&[0]).unwrap();
        // k = 0: constant vector
        let k0 = momentum_eigenstate(&[0.0], &x, &flat).unwrap();
        assert!(k0.amplitudes.iter().all(|a| (a - k0.amplitudes[0]).norm() < 1e-15));

        // distinct grid k are orthogonal
        let dk = 2.0 * std::f64::consts::PI / (64.0 * 0.1);
        let k1 = momentum_eigenstate(&[dk], &x, &flat).unwrap();
        let k3 = momentum_eigenstate(&[3.0 * dk], &x, &flat).unwrap();
        let ip = crate::hilbert::inner_product(&k1, &k3).unwrap().value;
        assert!(ip.norm() < 1e-12);

        // general theta: amplitude modulus is r * measure at every site
        let values: Vec<f64> = (0..64).map(|i| (i as f64 * 0.13).sin() * 0.2).collect();
        let theta = ThetaField::new(lat.clone(), values).unwrap();
        let state = momentum_eigenstate(&[2.0 * dk], &x, &theta).unwrap();
        for (i, a) in state.amplitudes.iter().enumerate() {
            let r = theta.exponent_between(&lat.site_at(i), &x).exp();
            assert_relative_eq!(a.norm(), r * 0.1, max_relative = 1e-12);
        }

        // off-grid k rejected
        assert!(matches!(
            momentum_eigenstate(&[0.5 * dk], &x, &flat),
            Err(Error::OffGridMomentum { .. })
        ));
    }

    #[test]
    fn covariant_momentum_reduces_to_forward_difference_without_scaling() {
        let lat = lat1d(64, 0.1);
        let flat = ThetaField::constant(lat.clone(), 3.0).unwrap();
        let p = random_packet(&lat, 7);
        let disc = canonical_momentum_apply(&p, 0, &flat, 1.0, MomentumForm::Discrete).unwrap();
        for i in 0..64 {
            let j = (i + 1) % 64;
            let plain =
                Complex64::new(0.0, 1.0) * (p.amplitudes()[j] - p.amplitudes()[i]) / 0.1;
            assert_eq!(disc.values[i], plain);
        }
    }

    #[test]
    fn covariant_momentum_on_plane_wave() {
        // psi = e^{iky} periodic: forward difference gives i hbar (e^{ik h}-1)/h psi
        let n = 128;
        let h = 0.1;
        let lat = lat1d(n, h);
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
        let k = 5.0 * dk;
        let amps: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(0.0, k * i as f64 * h).exp())
            .collect();
        let p = WavePacket::normalized(lat.clone(), amps).unwrap();
        let flat = ThetaField::constant(lat.clone(), 0.0).unwrap();
        let out = canonical_momentum_apply(&p, 0, &flat, 1.0, MomentumForm::Discrete).unwrap();
        let factor = Complex64::new(0.0, 1.0) * (Complex64::new(0.0, k * h).exp() - 1.0) / h;
        for i in 0..n {
            let expect = factor * p.amplitudes()[i];
            assert!((out.values[i] - expect).norm() < 1e-12);
        }
        // as h -> 0 the factor tends to i * (ik) = -k
        assert!((factor - Complex64::new(0.0, 1.0) * Complex64::new(0.0, k)).norm() < k * k * h);
    }

    #[test]
    fn covariant_momentum_marks_open_edges_invalid() {
        let lat = Lattice::new(vec![16], 0.1, Boundary::Open).unwrap();
        let theta = ThetaField::constant(lat.clone(), 0.0).unwrap();
        let p = WavePacket::gaussian(lat.clone(), &[0.8], 0.2).unwrap();
        let out = canonical_momentum_apply(&p, 0, &theta, 1.0, MomentumForm::Discrete).unwrap();
        assert!(!out.valid[15]);
        assert!(out.valid[..15].iter().all(|&v| v));
    }

    #[test]
    fn discrete_vs_expanded_momentum_first_order() {
        // max per-site discrepancy halves with the spacing
        let length = 12.8;
        let mut errs = Vec::new();
        for &n in &[128usize, 256, 512] {
            let h = length / n as f64;
            let lat = Lattice::new(vec![n], h, Boundary::Periodic).unwrap();
            let values: Vec<f64> = (0..n)
                .map(|i| 0.3 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
                .collect();
            let theta = ThetaField::new(lat.clone(), values).unwrap();
            let g = WavePacket::gaussian(lat.clone(), &[6.4], 0.8).unwrap();
            let disc =
                canonical_momentum_apply(&g, 0, &theta, 1.0, MomentumForm::Discrete).unwrap();
            let expa =
                canonical_momentum_apply(&g, 0, &theta, 1.0, MomentumForm::Expanded).unwrap();
            let err = disc
                .values
                .iter()
                .zip(&expa.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.5..=2.5).contains(&ratio), "ratio {ratio} outside [1.5, 2.5]");
        }
    }

    #[test]
    fn energy_equation_constant_theta() {
        let lat = Lattice::new(vec![32], 1.0, Boundary::Periodic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let potential: Vec<f64> = (0..32).map(|_| rng.gen_range(0.0..1.0)).collect();
        let h = Observable::hamiltonian(&lat, &potential, 1.0, 1.0).unwrap();
        let flat = ThetaField::constant(lat.clone(), 1.0).unwrap();
        let y = lat.site(&[3]).unwrap();
        let x = lat.site(&[20]).unwrap();
        let report = energy_equation_check(&h, &y, &x, &flat).unwrap();
        assert!(report.eigen_residual_max < 1e-10, "{report:?}");
        assert!(report.scaled_equation_residual_max < 1e-10, "{report:?}");
        assert!(report.transfer_vs_direct_residual < 1e-10, "{report:?}");
        assert_eq!(report.basis_discrepancy, 0.0);
    }

    #[test]
    fn energy_equation_random_theta() {
        let lat = Lattice::new(vec![32], 1.0, Boundary::Periodic).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let potential: Vec<f64> = (0..32).map(|_| rng.gen_range(0.0..1.0)).collect();
        let values: Vec<f64> = (0..32).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let h = Observable::hamiltonian(&lat, &potential, 1.0, 1.0).unwrap();
        let theta = ThetaField::new(lat.clone(), values).unwrap();
        let y = lat.site(&[3]).unwrap();
        let x = lat.site(&[20]).unwrap();
        let report = energy_equation_check(&h, &y, &x, &theta).unwrap();
        assert!(report.eigen_residual_max < 1e-10, "{report:?}");
        assert!(report.transfer_vs_direct_residual < 1e-10, "{report:?}");
        // the position-basis expansion carries weights the energy-basis one lacks
        assert!(report.basis_discrepancy > 1e-3);
        assert!(report.scaled_equation_residual_max > 1e-3);
    }

    #[test]
    fn energy_equation_rejects_non_hamiltonian() {
        let lat = lat1d(16, 1.0);
        let theta = ThetaField::constant(lat.clone(), 0.0).unwrap();
        let pos = Observable::position(&lat);
        let y = lat.site(&[0]).unwrap();
        assert!(matches!(
            energy_equation_check(&pos, &y, &y, &theta),
            Err(Error::UnsupportedObservable { .. })
        ));
    }

    #[test]
    fn equation_invariance_examples() {
        assert!(equation_invariance_check(2.0, 3.0, 18.0, 5.0).unwrap());
        for r in [0.001, 0.5, 1.0, 7.0, 900.0] {
            assert!(!equation_invariance_check(2.0, 3.0, 17.0, r).unwrap());
        }
        assert!(equation_invariance_check(2.0, 3.0, 18.0, 1.0).unwrap());
    }

    #[test]
    fn region_l_examples() {
        let lat = lat1d(256, 0.1);
        let g = WavePacket::gaussian(lat.clone(), &[3.2], 0.5).unwrap();
        let x = lat.site(&[200]).unwrap();

        // constant theta: spread 0, r = 1, within L for any tolerance
        let flat = ThetaField::constant(lat.clone(), 0.7).unwrap();
        let report = region_l_analysis(&g, &x, &flat, 1e-12).unwrap();
        assert_eq!(report.max_theta_spread, 0.0);
        assert_eq!(report.max_internal_deviation, 0.0);
        assert_eq!(report.r_zx.value, 1.0);
        assert!(report.within_l);

        // linear theta: internal deviation is exp(alpha * support width) - 1
        let alpha = 0.02;
        let theta = ThetaField::linear(lat.clone(), &[alpha]).unwrap();
        let report = region_l_analysis(&g, &x, &theta, 1e-3).unwrap();
        let coords: Vec<f64> = report
            .region
            .iter()
            .map(|&i| lat.coordinate(&lat.site_at(i))[0])
            .collect();
        let lo = coords.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z_coord = lat.coordinate(&report.z)[0];
        let expected_dev = ((alpha * (hi - z_coord)).exp() - 1.0)
            .abs()
            .max(((alpha * (lo - z_coord)).exp() - 1.0).abs());
        assert_relative_eq!(report.max_internal_deviation, expected_dev, max_relative = 1e-10);

        // theta(z) - theta(x) = 0.1 with a tight tolerance: outside L
        let support = g.support();
        let mut vals = vec![0.0; 256];
        for i in 180..256 {
            vals[i] = -0.1;
        }
        // support must be untouched so that z's value is exactly 0
        assert!(support.iter().all(|&i| i < 180));
        let theta = ThetaField::new(lat.clone(), vals).unwrap();
        let report = region_l_analysis(&g, &x, &theta, 1e-3).unwrap();
        assert!(!report.within_l);
        assert_relative_eq!(report.r_zx.value, (0.1f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn region_l_rejects_bad_inputs() {
        let lat = lat1d(16, 0.1);
        let g = WavePacket::gaussian(lat.clone(), &[0.8], 0.2).unwrap();
        let theta = ThetaField::constant(lat.clone(), 0.0).unwrap();
        assert!(region_l_analysis(&g, &lat.site(&[0]).unwrap(), &theta, 0.0).is_err());
    }

    #[test]
    fn module_outputs_invariant_under_constant_shift() {
        let lat = lat1d(64, 0.1);
        let values: Vec<f64> = (0..64).map(|i| (i as f64 * 0.17).sin() * 0.3).collect();
        let theta = ThetaField::new(lat.clone(), values).unwrap();
        let shifted = shift_theta(&theta, 7.3).unwrap();
        let p = random_packet(&lat, 10);
        let obs = Observable::position(&lat);
        let x = lat.site(&[5]).unwrap();
        let y = lat.site(&[40]).unwrap();

        let a = expectation_internal(&p, &obs, &x, &theta).unwrap().value;
        let b = expectation_internal(&p, &obs, &x, &shifted).unwrap().value;
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());

        let a = expectation_external(&p, &obs, &y, &x, &theta).unwrap().value;
        let b = expectation_external(&p, &obs, &y, &x, &shifted).unwrap().value;
        assert_eq!(a.re.to_bits(), b.re.to_bits());

        let a = scaled_identity_operator(&x, &theta).unwrap();
        let b = scaled_identity_operator(&x, &shifted).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn coincidence_at_constant_theta() {
        let lat = lat1d(128, 0.1);
        let flat = ThetaField::constant(lat.clone(), 2.5).unwrap();
        let p = random_packet(&lat, 11);
        let x = lat.site(&[30]).unwrap();
        let y = lat.site(&[90]).unwrap();
        for obs in [Observable::position(&lat), Observable::momentum(&lat, 1.0).unwrap()] {
            let unscaled = expectation_unscaled(&p, &obs, &x).unwrap().value;
            let external = expectation_external(&p, &obs, &y, &x, &flat).unwrap().value;
            let internal = expectation_internal(&p, &obs, &x, &flat).unwrap().value;
            assert!((external - unscaled).norm() <= 1e-12);
            assert!((internal - unscaled).norm() <= 1e-12);
        }
    }
}
