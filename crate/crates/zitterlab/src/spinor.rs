//! Dirac matrices, momentum-space spinors, and the polarization-basis
//! apparatus: the momentum-aligned linear triad {e1, e2, e3}, the circular
//! triad {eta+, eta-, eta_par}, the spin-1 matrices, and the helicity
//! eigenstructure.
//!
//! Representation: the standard one, beta = diag(1, 1, -1, -1),
//! alpha_i = offdiag(sigma_i, sigma_i), gamma^0 = beta, gamma^i = beta
//! alpha_i, with metric diag(1, -1, -1, -1).
//!
//! Spinor convention. The two-component spin bases are quantized along
//! p/|p|. Concretely, chi_s(p) = U(p) e_s for the particle branch and
//! xi_s(p) = U(-p) e_s for the antiparticle branch, where U(p) is the SU(2)
//! rotation that tilts the z-axis onto p along a great circle
//! ([`su2_lift`]); it satisfies U(p) sigma_k U(p)^dagger = sigma . e_k(p)
//! entrywise against the linear triad, which ties the spinor labels s = 1, 2
//! to the circular polarization channels. All global spinor phases are
//! inherited from this lift, which is deterministic (including on the
//! z-axis, where the azimuth is pinned to zero). Fixing phases some other
//! way — e.g. rotating each spinor's leading component to the positive real
//! axis — destroys the sign structure of the pair-channel coefficients that
//! [`crate::fock`] audits, so the lift's phases are load-bearing, not
//! cosmetic.
//!
//! Normalization: u^dagger u = v^dagger v = E/m, so that the sqrt(m/E)
//! measure used by [`crate::wavepacket`] makes the position-space norm equal
//! the momentum-space amplitude norm.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;
use thiserror::Error;

/// Squared-relative-transverse-momentum threshold for the triad axis rule.
const AXIS_TOL_SQ: f64 = 1e-24;

type C64 = Complex64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Errors from spinor/triad construction.
#[derive(Debug, Error)]
pub enum SpinorError {
    /// Triads and the helicity matrix are undefined at p = 0.
    #[error("polarization basis is undefined at p = 0")]
    ZeroMomentum,
    /// Spin labels are 1 or 2.
    #[error("spin label must be 1 or 2, got {0}")]
    BadSpin(u8),
    /// The mass must be strictly positive.
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
}

/// The alpha, beta, and gamma matrices of the chosen representation.
#[derive(Debug, Clone)]
pub struct DiracSet {
    /// alpha_1, alpha_2, alpha_3 (Hermitian).
    pub alpha: [Matrix4<C64>; 3],
    /// beta (Hermitian, squares to 1).
    pub beta: Matrix4<C64>,
    /// gamma^0..gamma^3 with gamma^0 = beta, gamma^i = beta alpha_i.
    pub gamma: [Matrix4<C64>; 4],
}

/// Which branch of the mode expansion a spinor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// u(p, s): coefficient of exp(-i p.x).
    Particle,
    /// v(p, s): coefficient of exp(+i p.x).
    Antiparticle,
}

/// A momentum-space 4-spinor with its labels.
#[derive(Debug, Clone)]
pub struct Spinor4 {
    /// The four complex components.
    pub components: Vector4<C64>,
    /// Momentum label p.
    pub momentum: Vector3<f64>,
    /// Spin label s (1 or 2).
    pub spin_label: u8,
    /// Particle (u) or antiparticle (v).
    pub branch: Branch,
}

/// Momentum-aligned real orthonormal triad with e3 = p/|p|.
#[derive(Debug, Clone)]
pub struct Triad {
    /// First transverse axis.
    pub e1: Vector3<f64>,
    /// Second transverse axis.
    pub e2: Vector3<f64>,
    /// Longitudinal axis p/|p|.
    pub e3: Vector3<f64>,
}

/// Circular-polarization triad built from [`Triad`].
#[derive(Debug, Clone)]
pub struct CircTriad {
    /// (e1 + i e2)/sqrt(2): helicity +1 eigenvector.
    pub eta_plus: Vector3<C64>,
    /// (e1 - i e2)/sqrt(2) = conj(eta_plus): helicity -1 eigenvector.
    pub eta_minus: Vector3<C64>,
    /// e3 as a complex vector: helicity 0 eigenvector.
    pub eta_par: Vector3<C64>,
}

/// Builds the alpha/beta/gamma set of the standard representation.
pub fn dirac_matrices() -> DiracSet {
    let one = c(1.0, 0.0);
    let sigma = pauli();
    let mut alpha = [Matrix4::zeros(); 3];
    for (k, s) in sigma.iter().enumerate() {
        let mut m = Matrix4::zeros();
        for r in 0..2 {
            for cidx in 0..2 {
                m[(r, cidx + 2)] = s[(r, cidx)];
                m[(r + 2, cidx)] = s[(r, cidx)];
            }
        }
        alpha[k] = m;
    }
    let beta = Matrix4::from_diagonal(&Vector4::new(one, one, -one, -one));
    let gamma = [beta, beta * alpha[0], beta * alpha[1], beta * alpha[2]];
    DiracSet { alpha, beta, gamma }
}

/// The three Pauli matrices.
fn pauli() -> [Matrix2<C64>; 3] {
    [
        Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    ]
}

/// sigma . p as a 2x2 matrix.
fn sigma_dot(p: Vector3<f64>) -> Matrix2<C64> {
    Matrix2::new(
        c(p.z, 0.0),
        c(p.x, -p.y),
        c(p.x, p.y),
        c(-p.z, 0.0),
    )
}

/// On-shell energy sqrt(|p|^2 + m^2).
pub fn on_shell_energy(p: Vector3<f64>, m: f64) -> f64 {
    (p.norm_squared() + m * m).sqrt()
}

/// SU(2) rotation taking the z-axis onto p/|p| along a great circle:
/// U = exp(-i phi sigma3/2) exp(-i theta sigma2/2) exp(+i phi sigma3/2).
///
/// On the z-axis (transverse part below the triad threshold) the azimuth is
/// pinned to zero, giving the identity for p_z > 0 and the theta = pi
/// rotation [[0, -1], [1, 0]] for p_z < 0; p = 0 maps to the identity. These
/// are the same limits the triad axis rule takes, so spinors and triads stay
/// consistent on the axis.
pub fn su2_lift(p: Vector3<f64>) -> Matrix2<C64> {
    let norm_sq = p.norm_squared();
    if norm_sq == 0.0 {
        return Matrix2::identity();
    }
    let perp_sq = p.x * p.x + p.y * p.y;
    if perp_sq < AXIS_TOL_SQ * norm_sq {
        return if p.z > 0.0 {
            Matrix2::identity()
        } else {
            Matrix2::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
        };
    }
    let theta = perp_sq.sqrt().atan2(p.z);
    let phi = p.y.atan2(p.x);
    let ch = (0.5 * theta).cos();
    let sh = (0.5 * theta).sin();
    let e_m = c(phi.cos(), -phi.sin());
    let e_p = c(phi.cos(), phi.sin());
    Matrix2::new(c(ch, 0.0), -e_m * sh, e_p * sh, c(ch, 0.0))
}

/// Builds u(p, s) or v(p, s) in the convention described in the module docs.
pub fn make_spinor(
    p: Vector3<f64>,
    s: u8,
    branch: Branch,
    m: f64,
) -> Result<Spinor4, SpinorError> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(SpinorError::BadMass(m));
    }
    if s != 1 && s != 2 {
        return Err(SpinorError::BadSpin(s));
    }
    let e = on_shell_energy(p, m);
    let norm = ((e + m) / (2.0 * m)).sqrt();
    let kin = sigma_dot(p) / c(e + m, 0.0);
    let basis = |mat: &Matrix2<C64>| -> nalgebra::Vector2<C64> {
        mat.column((s - 1) as usize).into_owned()
    };
    let components = match branch {
        Branch::Particle => {
            let chi = basis(&su2_lift(p));
            let lower = kin * chi;
            Vector4::new(chi[0], chi[1], lower[0], lower[1]) * c(norm, 0.0)
        }
        Branch::Antiparticle => {
            let xi = basis(&su2_lift(-p));
            let upper = kin * xi;
            Vector4::new(upper[0], upper[1], xi[0], xi[1]) * c(norm, 0.0)
        }
    };
    Ok(Spinor4 {
        components,
        momentum: p,
        spin_label: s,
        branch,
    })
}

/// Shorthand for the particle-branch spinor components.
pub fn u_spinor(p: Vector3<f64>, s: u8, m: f64) -> Vector4<C64> {
    make_spinor(p, s, Branch::Particle, m)
        .expect("spin label in {1,2} and positive mass")
        .components
}

/// Shorthand for the antiparticle-branch spinor components.
pub fn v_spinor(p: Vector3<f64>, s: u8, m: f64) -> Vector4<C64> {
    make_spinor(p, s, Branch::Antiparticle, m)
        .expect("spin label in {1,2} and positive mass")
        .components
}

/// Momentum-aligned linear triad; errors at p = 0.
///
/// Away from the z-axis this is the closed-form basis whose third member is
/// p/|p| and whose first two members complete it orthonormally; on the axis
/// (transverse part below threshold) the continuous limit along paths with
/// p_y = 0, p_x -> 0+ is used: e1 = (p_z/|p|, 0, 0), e2 = (0, 1, 0).
pub fn linear_triad(p: Vector3<f64>) -> Result<Triad, SpinorError> {
    let norm = p.norm();
    if norm == 0.0 {
        return Err(SpinorError::ZeroMomentum);
    }
    let perp_sq = p.x * p.x + p.y * p.y;
    let e3 = p / norm;
    if perp_sq < AXIS_TOL_SQ * norm * norm {
        let sign = p.z / norm;
        return Ok(Triad {
            e1: Vector3::new(sign, 0.0, 0.0),
            e2: Vector3::new(0.0, 1.0, 0.0),
            e3,
        });
    }
    let e1 = Vector3::new(
        (p.x * p.x * p.z + p.y * p.y * norm) / (norm * perp_sq),
        (p.x * p.y * p.z - p.x * p.y * norm) / (norm * perp_sq),
        -p.x / norm,
    );
    let e2 = Vector3::new(
        (p.x * p.y * p.z - p.x * p.y * norm) / (norm * perp_sq),
        (p.y * p.y * p.z + p.x * p.x * norm) / (norm * perp_sq),
        -p.y / norm,
    );
    Ok(Triad { e1, e2, e3 })
}

/// Circular triad eta+- = (e1 +- i e2)/sqrt(2), eta_par = e3.
pub fn circular_triad(p: Vector3<f64>) -> Result<CircTriad, SpinorError> {
    let t = linear_triad(p)?;
    let inv_sqrt2 = 0.5f64.sqrt();
    let mut eta_plus = Vector3::zeros();
    let mut eta_minus = Vector3::zeros();
    let mut eta_par = Vector3::zeros();
    for k in 0..3 {
        eta_plus[k] = c(t.e1[k] * inv_sqrt2, t.e2[k] * inv_sqrt2);
        eta_minus[k] = eta_plus[k].conj();
        eta_par[k] = c(t.e3[k], 0.0);
    }
    Ok(CircTriad {
        eta_plus,
        eta_minus,
        eta_par,
    })
}

/// The three spin-1 generator matrices (tau_k)_{ij} = -i epsilon_{kij}.
pub fn spin1_matrices() -> [Matrix3<C64>; 3] {
    let o = c(0.0, 0.0);
    let i = c(0.0, 1.0);
    [
        Matrix3::new(o, o, o, o, o, -i, o, i, o),
        Matrix3::new(o, o, i, o, o, o, -i, o, o),
        Matrix3::new(o, -i, o, i, o, o, o, o, o),
    ]
}

/// Spin-projection matrix (tau . p)/|p|; errors at p = 0.
pub fn helicity_matrix(p: Vector3<f64>) -> Result<Matrix3<C64>, SpinorError> {
    let norm = p.norm();
    if norm == 0.0 {
        return Err(SpinorError::ZeroMomentum);
    }
    let tau = spin1_matrices();
    Ok((tau[0] * c(p.x, 0.0) + tau[1] * c(p.y, 0.0) + tau[2] * c(p.z, 0.0)) / c(norm, 0.0))
}

/// conj(a) . b over 4-spinor components.
pub fn dagger_dot(a: &Vector4<C64>, b: &Vector4<C64>) -> C64 {
    a.dotc(b)
}

/// psi^dagger psi, the local charge density of a 4-spinor value.
pub fn charge_density(psi: &Vector4<C64>) -> f64 {
    psi[0].norm_sqr() + psi[1].norm_sqr() + psi[2].norm_sqr() + psi[3].norm_sqr()
}

/// (psi^dagger alpha_1 psi, psi^dagger alpha_2 psi, psi^dagger alpha_3 psi),
/// the local current density, hand-expanded so every caller shares one code
/// path (and therefore bitwise-identical results).
pub fn current_density(psi: &Vector4<C64>) -> Vector3<f64> {
    let a03 = psi[0].conj() * psi[3];
    let a12 = psi[1].conj() * psi[2];
    let a02 = psi[0].conj() * psi[2];
    let a13 = psi[1].conj() * psi[3];
    Vector3::new(
        2.0 * (a03.re + a12.re),
        2.0 * (a03.im - a12.im),
        2.0 * (a02.re - a13.re),
    )
}

/// psi^dagger alpha psi computed per component for arbitrary 4-spinors a, b:
/// returns (a^dagger alpha_j b) for j = 1..3.
pub fn alpha_sandwich(a: &Vector4<C64>, b: &Vector4<C64>) -> Vector3<C64> {
    let d = dirac_matrices();
    Vector3::new(
        dagger_dot(a, &(d.alpha[0] * b)),
        dagger_dot(a, &(d.alpha[1] * b)),
        dagger_dot(a, &(d.alpha[2] * b)),
    )
}
