//! Complex 2×2/4×4 linear algebra for a single qubit: Pauli operators, density
//! matrices, Bloch vectors, Liouville-space vectorization, state fidelity, and
//! superoperator exponentials.
//!
//! Conventions fixed here and relied upon everywhere else:
//!
//! * basis order {|0⟩, |1⟩} with σ_z = |0⟩⟨0| − |1⟩⟨1|, so σ_z|0⟩ = +|0⟩ and
//!   |1⟩ is the excited state of the free Hamiltonian −ω_q σ_z/2;
//! * σ_x = |0⟩⟨1| + |1⟩⟨0| and σ_y = i|1⟩⟨0| − i|0⟩⟨1|;
//! * column-stacking vectorization, vec(ρ) = (ρ00, ρ10, ρ01, ρ11), so that
//!   vec(AρB) = (Bᵀ ⊗ A) vec(ρ).

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use thiserror::Error;

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

/// Tolerance for the Hermiticity and unit-trace checks of [`DensityMatrix`].
pub const STATE_TOL: f64 = 1e-12;
/// Looser tolerance for states that have been propagated many steps, whose
/// trace and Hermiticity carry accumulated rounding.
pub const PROPAGATED_TOL: f64 = 1e-9;
/// Slack allowed on the Bloch-vector norm of a physical state.
pub const BLOCH_NORM_TOL: f64 = 1e-9;
/// Eigenvalue residues in [−FIDELITY_CLIP, 0) are treated as exact zeros by
/// [`fidelity`]; anything more negative is rejected.
pub const FIDELITY_CLIP: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("Bloch vector norm {norm} exceeds 1")]
    UnphysicalVector { norm: f64 },
    #[error("matrix is not Hermitian (residue {0:.3e})")]
    NotHermitian(f64),
    #[error("non-finite matrix entry")]
    NonFinite,
}

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity2() -> Mat2 {
    Mat2::identity()
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0))
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// |i⟩⟨j| in the {|0⟩, |1⟩} basis.
pub fn ketbra(i: usize, j: usize) -> Mat2 {
    assert!(i < 2 && j < 2, "basis labels must be 0 or 1");
    let mut m = Mat2::zeros();
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// Largest deviation of `m` from its own adjoint, entrywise.
pub fn hermiticity_residue(m: &Mat2) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// Qubit state ρ: Hermitian with unit trace (within [`STATE_TOL`]).
///
/// Positivity is deliberately *not* part of the type invariant: single SLED
/// trajectories are Hermitian and unit-trace but may transiently leave the
/// Bloch ball.  Use [`DensityMatrix::is_physical`] where positivity matters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Validates Hermiticity and unit trace within [`STATE_TOL`].
    pub fn new(m: Mat2) -> Result<Self, AlgebraError> {
        let herm = hermiticity_residue(&m);
        if herm > STATE_TOL {
            return Err(AlgebraError::InvalidState(format!(
                "Hermiticity residue {herm:.3e} exceeds {STATE_TOL:.0e}"
            )));
        }
        let tr = m[(0, 0)] + m[(1, 1)];
        if (tr - c(1.0, 0.0)).norm() > STATE_TOL {
            return Err(AlgebraError::InvalidState(format!(
                "trace {tr} deviates from 1 beyond {STATE_TOL:.0e}"
            )));
        }
        Ok(Self(m))
    }

    /// Wraps without validation; the caller vouches for the invariants.
    pub fn new_unchecked(m: Mat2) -> Self {
        Self(m)
    }

    pub fn mat(&self) -> &Mat2 {
        &self.0
    }

    /// Ground state |0⟩⟨0| of the free Hamiltonian −ω_q σ_z/2.
    pub fn ground() -> Self {
        Self(ketbra(0, 0))
    }

    /// Excited state |1⟩⟨1|.
    pub fn excited() -> Self {
        Self(ketbra(1, 1))
    }

    pub fn maximally_mixed() -> Self {
        Self(identity2() * c(0.5, 0.0))
    }

    /// +1 eigenstate of σ_x, (|0⟩ + |1⟩)(⟨0| + ⟨1|)/2.
    pub fn plus_x() -> Self {
        let h = c(0.5, 0.0);
        Self(Mat2::new(h, h, h, h))
    }

    /// Thermal state of the bare qubit at the dimensionless inverse
    /// temperature x = ħβω_q; its Bloch vector is (0, 0, tanh(x/2)).
    pub fn thermal(hbar_beta_omega_q: f64) -> Self {
        let z = (0.5 * hbar_beta_omega_q).tanh();
        from_bloch(&BlochVector { x: 0.0, y: 0.0, z }).expect("tanh stays within the Bloch ball")
    }

    /// Eigenvalues in ascending order, from the closed 2×2 Hermitian form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.0;
        let half_tr = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
        let d = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
        let s = (d * d + m[(0, 1)].norm_sqr()).sqrt();
        (half_tr - s, half_tr + s)
    }

    /// Both eigenvalues ≥ −tol.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.eigenvalues().0 >= -tol
    }

    /// Clips a small negative eigenvalue to zero and renormalizes, for
    /// consumers of ensemble-averaged states that may carry statistical
    /// negativity.  Returns the repaired state together with the clipped
    /// magnitude (0 when no repair was needed).  Negativity beyond `max_clip`
    /// is an error rather than silently repaired.
    pub fn clip_to_physical(&self, max_clip: f64) -> Result<(Self, f64), AlgebraError> {
        let tr = self.0[(0, 0)].re + self.0[(1, 1)].re;
        let normalized = Self(self.0 * c(1.0 / tr, 0.0));
        let (lo, _) = normalized.eigenvalues();
        if lo >= 0.0 {
            return Ok((normalized, 0.0));
        }
        if lo < -max_clip {
            return Err(AlgebraError::InvalidState(format!(
                "eigenvalue {lo:.3e} below clip floor −{max_clip:.0e}"
            )));
        }
        // For a unit-trace qubit state the eigenvalues are (1 ± |r|)/2 with r
        // the Bloch vector, so clipping the negative one to zero is exactly a
        // radial projection onto the Bloch sphere.
        let v = to_bloch(&normalized)?;
        let n = v.norm();
        let projected = BlochVector {
            x: v.x / n,
            y: v.y / n,
            z: v.z / n,
        };
        Ok((from_bloch(&projected)?, -lo))
    }
}

/// Expectation values (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩); physical states satisfy
/// x² + y² + z² ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Column-stacked density matrix, (ρ00, ρ10, ρ01, ρ11).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiouvilleVector(pub Vec4);

/// Linear map on vectorized states.  Carries angular-frequency units when a
/// Liouvillian; dimensionless when a propagator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Superoperator(pub Mat4);

impl Superoperator {
    pub fn zeros() -> Self {
        Self(Mat4::zeros())
    }

    pub fn identity() -> Self {
        Self(Mat4::identity())
    }

    pub fn apply(&self, v: &LiouvilleVector) -> LiouvilleVector {
        LiouvilleVector(self.0 * v.0)
    }

    /// |row-vectorized identity × L|_∞: zero (within rounding) for every
    /// trace-preserving generator.
    pub fn trace_functional_residue(&self) -> f64 {
        let mut r: f64 = 0.0;
        for j in 0..4 {
            r = r.max((self.0[(0, j)] + self.0[(3, j)]).norm());
        }
        r
    }

    /// Maximum column sum of entry magnitudes (the induced 1-norm).
    pub fn norm_one(&self) -> f64 {
        let mut best: f64 = 0.0;
        for j in 0..4 {
            let s: f64 = (0..4).map(|i| self.0[(i, j)].norm()).sum();
            best = best.max(s);
        }
        best
    }
}

impl std::ops::Add for Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: Superoperator) -> Superoperator {
        Superoperator(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: Superoperator) -> Superoperator {
        Superoperator(self.0 - rhs.0)
    }
}

impl std::ops::Mul<f64> for Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: f64) -> Superoperator {
        Superoperator(self.0 * c(rhs, 0.0))
    }
}

impl std::ops::Mul<C64> for Superoperator {
    type Output = Superoperator;
    fn mul(self, rhs: C64) -> Superoperator {
        Superoperator(self.0 * rhs)
    }
}

/// Bloch components Tr[σ_i ρ].  Rejects states whose trace has drifted beyond
/// [`PROPAGATED_TOL`] or whose Hermiticity residue leaks imaginary parts
/// above it.
pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector, AlgebraError> {
    let m = rho.mat();
    let tr = m[(0, 0)] + m[(1, 1)];
    if (tr - c(1.0, 0.0)).norm() > PROPAGATED_TOL {
        return Err(AlgebraError::InvalidState(format!(
            "trace {tr} deviates from 1"
        )));
    }
    let x = m[(0, 1)] + m[(1, 0)];
    let y = c(0.0, 1.0) * (m[(0, 1)] - m[(1, 0)]);
    let z = m[(0, 0)] - m[(1, 1)];
    let residue = x.im.abs().max(y.im.abs()).max(z.im.abs());
    if residue > PROPAGATED_TOL {
        return Err(AlgebraError::InvalidState(format!(
            "imaginary residue {residue:.3e} in Bloch components"
        )));
    }
    Ok(BlochVector {
        x: x.re,
        y: y.re,
        z: z.re,
    })
}

/// ρ = (I + v·σ)/2; rejects |v| > 1 + [`BLOCH_NORM_TOL`].
pub fn from_bloch(v: &BlochVector) -> Result<DensityMatrix, AlgebraError> {
    let n = v.norm();
    if n > 1.0 + BLOCH_NORM_TOL {
        return Err(AlgebraError::UnphysicalVector { norm: n });
    }
    let m = Mat2::new(
        c(0.5 * (1.0 + v.z), 0.0),
        c(0.5 * v.x, -0.5 * v.y),
        c(0.5 * v.x, 0.5 * v.y),
        c(0.5 * (1.0 - v.z), 0.0),
    );
    Ok(DensityMatrix::new_unchecked(m))
}

/// Bloch components in the frame rotating at `omega_d` about z:
/// Tr[σ_i e^{−iσ_z ω_d t/2} ρ e^{+iσ_z ω_d t/2}].  The z component matches the
/// lab frame exactly; x, y are rotated by the angle ω_d t.
pub fn rotating_frame_bloch(
    rho: &DensityMatrix,
    omega_d: f64,
    t: f64,
) -> Result<BlochVector, AlgebraError> {
    let lab = to_bloch(rho)?;
    let theta = omega_d * t;
    let (s, co) = theta.sin_cos();
    Ok(BlochVector {
        x: lab.x * co - lab.y * s,
        y: lab.y * co + lab.x * s,
        z: lab.z,
    })
}

/// F(ρ₁, ρ₂) = Tr[ρ₁ρ₂] + 2√(det ρ₁ · det ρ₂), the fidelity between qubit
/// states; equals the squared Uhlmann fidelity for 2×2 states.  Eigenvalue
/// residues in [−[`FIDELITY_CLIP`], 0) are clipped to zero before the
/// determinants; more negative states are rejected.
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64, AlgebraError> {
    let det = |rho: &DensityMatrix| -> Result<f64, AlgebraError> {
        let (lo, hi) = rho.eigenvalues();
        if lo < -FIDELITY_CLIP {
            return Err(AlgebraError::InvalidState(format!(
                "eigenvalue {lo:.3e} below −{FIDELITY_CLIP:.0e}"
            )));
        }
        Ok(lo.max(0.0) * hi)
    };
    let d1 = det(rho1)?;
    let d2 = det(rho2)?;
    let overlap = (rho1.mat() * rho2.mat()).trace().re;
    Ok((overlap + 2.0 * (d1 * d2).sqrt()).clamp(0.0, 1.0))
}

/// Column-stacking: vec(ρ) = (ρ00, ρ10, ρ01, ρ11).
pub fn vectorize(rho: &DensityMatrix) -> LiouvilleVector {
    let m = rho.mat();
    LiouvilleVector(Vec4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]))
}

/// Inverse of [`vectorize`]; exact round trip.  No physicality checks are
/// applied — wrap the result in [`DensityMatrix::new`] if they are needed.
pub fn devectorize(v: &LiouvilleVector) -> DensityMatrix {
    DensityMatrix::new_unchecked(Mat2::new(v.0[0], v.0[2], v.0[1], v.0[3]))
}

/// Kronecker product a ⊗ b of two 2×2 matrices.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Superoperator of −i[H, ·] for Hermitian H, i.e. −i[(I ⊗ H) − (Hᵀ ⊗ I)].
pub fn commutator_superop(h: &Mat2) -> Result<Superoperator, AlgebraError> {
    let residue = hermiticity_residue(h);
    if residue > 1e-12 * (1.0 + h.iter().map(|e| e.norm()).fold(0.0, f64::max)) {
        return Err(AlgebraError::NotHermitian(residue));
    }
    Ok(Superoperator(
        (kron2(&identity2(), h) - kron2(&h.transpose(), &identity2())) * c(0.0, -1.0),
    ))
}

/// Lindblad dissipator of an arbitrary collapse operator A:
/// D[A](ρ) = AρA† − ½{A†A, ρ}.
pub fn dissipator_from_collapse(a: &Mat2) -> Superoperator {
    let adag = a.adjoint();
    let ada = adag * a;
    let sandwich = kron2(&adag.transpose(), a);
    let anticomm =
        kron2(&identity2(), &ada) + kron2(&ada.transpose(), &identity2());
    Superoperator(sandwich - anticomm * c(0.5, 0.0))
}

/// D_ij(ρ) = |i⟩⟨j| ρ |j⟩⟨i| − ½{|j⟩⟨j|, ρ}; D_01 relaxes |1⟩ → |0⟩ and D_10
/// excites |0⟩ → |1⟩.
pub fn dissipator_superop(i: usize, j: usize) -> Superoperator {
    assert!(i < 2 && j < 2, "basis labels must be 0 or 1");
    dissipator_from_collapse(&ketbra(i, j))
}

/// exp(L) by scaling and squaring with a Taylor kernel; relative accuracy is
/// well below 1e-12 for ‖L‖₁ ≤ 10.
pub fn matrix_exp(l: &Superoperator) -> Result<Superoperator, AlgebraError> {
    if l.0.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
        return Err(AlgebraError::NonFinite);
    }
    let n1 = l.norm_one();
    let s = if n1 > 0.25 {
        (n1 / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let m = l.0 * c(0.5f64.powi(s as i32), 0.0);
    let mut sum = Mat4::identity();
    let mut term = Mat4::identity();
    for k in 1..=40u32 {
        term = (m * term) * c(1.0 / k as f64, 0.0);
        sum += term;
        let tnorm: f64 = term.iter().map(|e| e.norm()).fold(0.0, f64::max);
        if tnorm < 1e-20 {
            break;
        }
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    Ok(Superoperator(sum))
}

/// exp(dt·L)·v without forming the matrix exponential: a Taylor recurrence on
/// the vector, substepped so that each stage has ‖dt·L‖₁ ≤ 0.5.  Because the
/// trace functional annihilates L termwise, the trace of the state is
/// preserved to rounding regardless of where the series is truncated.
pub fn exp_action(l: &Superoperator, dt: f64, v: &LiouvilleVector) -> LiouvilleVector {
    let scale = l.norm_one() * dt.abs();
    let substeps = if scale > 0.5 {
        (scale / 0.5).ceil() as usize
    } else {
        1
    };
    let h = dt / substeps as f64;
    let max_sqr = |w: &Vec4| -> f64 { w.iter().map(|e| e.norm_sqr()).fold(0.0, f64::max) };
    let mut state = v.0;
    for _ in 0..substeps {
        let mut acc = state;
        let mut term = state;
        for k in 1..=30u32 {
            term = (l.0 * term) * c(h / k as f64, 0.0);
            acc += term;
            if max_sqr(&term) < 1e-32 * max_sqr(&acc) {
                break;
            }
        }
        state = acc;
    }
    LiouvilleVector(state)
}
