//! Gate catalog: wave plates, controlled flips between degrees of freedom,
//! the single-photon DOF swap, and the analyzer bases used by the protocols.
//!
//! All interferometer arms are modeled phase-balanced.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{re, Matrix, ProjectorSet, UnitaryOp, C64, ONE};
use crate::photonreg::{DofKind, PhotonRegister};

/// The four single-qubit corrections used by Bob, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pauli {
    I,
    X,
    /// `iσ₂ = [[0, 1], [−1, 0]]`.
    IY,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::IY, Pauli::Z];

    pub fn unitary(self) -> UnitaryOp {
        let rows: [[f64; 2]; 2] = match self {
            Pauli::I => [[1.0, 0.0], [0.0, 1.0]],
            Pauli::X => [[0.0, 1.0], [1.0, 0.0]],
            Pauli::IY => [[0.0, 1.0], [-1.0, 0.0]],
            Pauli::Z => [[1.0, 0.0], [0.0, -1.0]],
        };
        UnitaryOp::from_trusted(Matrix::from_real_rows(&[&rows[0], &rows[1]]).unwrap())
    }

    /// Short ASCII name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            Pauli::I => "I",
            Pauli::X => "sigma1",
            Pauli::IY => "i*sigma2",
            Pauli::Z => "sigma3",
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "σ₁",
            Pauli::IY => "iσ₂",
            Pauli::Z => "σ₃",
        })
    }
}

pub fn hadamard() -> UnitaryOp {
    let r = FRAC_1_SQRT_2;
    UnitaryOp::from_trusted(Matrix::from_real_rows(&[&[r, r], &[r, -r]]).unwrap())
}

/// Half-wave plate with fast axis at `theta` radians, in the (H, V) basis.
pub fn hwp(theta: f64) -> UnitaryOp {
    let (s, c) = (2.0 * theta).sin_cos();
    UnitaryOp::from_trusted(Matrix::from_real_rows(&[&[c, s], &[s, -c]]).unwrap())
}

/// General SU(2) element `Rz(alpha)·Ry(beta)·Rz(gamma)`; this is what the
/// wave-plate polarization gadget realizes.
pub fn su2(alpha: f64, beta: f64, gamma: f64) -> UnitaryOp {
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let (s, c) = (beta / 2.0).sin_cos();
    let m = Matrix::from_rows(&[
        &[
            e(-(alpha + gamma) / 2.0) * c,
            -e(-(alpha - gamma) / 2.0) * s,
        ],
        &[e((alpha - gamma) / 2.0) * s, e((alpha + gamma) / 2.0) * c],
    ])
    .unwrap();
    UnitaryOp::from_trusted(m)
}

/// Angles with `su2(angles)|H⟩ = a|H⟩ + b|V⟩` exactly (including phase).
pub fn su2_angles_for(a: C64, b: C64) -> (f64, f64, f64) {
    let beta = 2.0 * b.norm().atan2(a.norm());
    let pa = if a.norm() > 0.0 { a.arg() } else { 0.0 };
    let pb = if b.norm() > 0.0 { b.arg() } else { 0.0 };
    // e^{-i(α+γ)/2} = e^{i·pa}, e^{i(α−γ)/2} = e^{i·pb}
    (pb - pa, beta, -pa - pb)
}

/// A controlled flip between two subsystems of a register.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnotSpec {
    pub control: usize,
    pub target: usize,
    /// Basis label of the control that triggers the flip.
    pub control_value: String,
}

impl CnotSpec {
    pub fn new(control: usize, target: usize, control_value: impl Into<String>) -> Self {
        Self {
            control,
            target,
            control_value: control_value.into(),
        }
    }
}

/// Full-space permutation: flips `target` whenever `control` reads
/// `control_value`.
pub fn cnot(spec: &CnotSpec, register: &PhotonRegister) -> Result<UnitaryOp> {
    let n = register.len();
    if spec.control >= n {
        return Err(Error::TargetOutOfRange(spec.control));
    }
    if spec.target >= n {
        return Err(Error::TargetOutOfRange(spec.target));
    }
    if spec.control == spec.target {
        return Err(Error::ControlIsTarget);
    }
    let tdim = register.dims()[spec.target];
    if tdim != 2 {
        return Err(Error::TargetNotQubit(spec.target, tdim));
    }
    let value = register.subsystems()[spec.control]
        .label_index(&spec.control_value)
        .ok_or_else(|| Error::UnknownLabel {
            subsystem: spec.control,
            label: spec.control_value.clone(),
        })?;
    let stride_t = register.strides()[spec.target];
    let stride_c = register.strides()[spec.control];
    let dim_c = register.dims()[spec.control];
    let total = register.total_dim();
    let mut m = Matrix::zeros(total);
    for col in 0..total {
        let row = if (col / stride_c) % dim_c == value {
            let bit = (col / stride_t) % 2;
            if bit == 0 {
                col + stride_t
            } else {
                col - stride_t
            }
        } else {
            col
        };
        m.set(row, col, ONE);
    }
    Ok(UnitaryOp::from_trusted(m))
}

/// Spiral phase plate of order 1 on the parity qubit: `|E⟩ ↔ |O⟩`.
pub fn spp() -> UnitaryOp {
    Pauli::X.unitary()
}

fn parity_pair(register: &PhotonRegister, photon: u8) -> Result<(usize, usize)> {
    let pol = register.polarization(photon)?;
    let oam = register.oam(photon)?;
    if register.subsystems()[oam].kind != DofKind::OamParity {
        return Err(Error::MissingDof {
            photon,
            dof: "oam_parity",
        });
    }
    Ok((pol, oam))
}

/// Polarization-controlled OAM flip: the SPP sits in the V (reflected) arm.
pub fn pc_o(register: &PhotonRegister, photon: u8) -> Result<UnitaryOp> {
    let (pol, oam) = parity_pair(register, photon)?;
    cnot(&CnotSpec::new(pol, oam, "V"), register)
}

/// OAM-controlled polarization flip: the 45° HWP sits in the odd arm.
pub fn oc_p(register: &PhotonRegister, photon: u8) -> Result<UnitaryOp> {
    let (pol, oam) = parity_pair(register, photon)?;
    cnot(&CnotSpec::new(oam, pol, "O"), register)
}

/// 4×4 exchange of polarization and parity qubits on one photon, with
/// `H ↔ E` and `V ↔ O`; acts on `(pol, parity)` ordered `HE, HO, VE, VO`.
pub fn local_swap() -> UnitaryOp {
    let mut m = Matrix::zeros(4);
    for p in 0..2 {
        for o in 0..2 {
            m.set(o * 2 + p, p * 2 + o, ONE);
        }
    }
    UnitaryOp::from_trusted(m)
}

/// Full-space DOF swap on `photon`.
pub fn swap_dofs(register: &PhotonRegister, photon: u8) -> Result<UnitaryOp> {
    let (pol, oam) = parity_pair(register, photon)?;
    register.embed(&local_swap(), &[pol, oam])
}

/// Vectors `|k⟩ = d^{-1/2} Σ_j exp(2πi·j·(k+offset)/d) |j⟩` for `k = 0..d`.
pub fn fourier_vectors(d: usize, offset: f64) -> Result<Vec<Vec<C64>>> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDim(d));
    }
    let norm = 1.0 / (d as f64).sqrt();
    Ok((0..d)
        .map(|k| {
            (0..d)
                .map(|j| {
                    Complex64::from_polar(
                        norm,
                        2.0 * PI * (j as f64) * (k as f64 + offset) / d as f64,
                    )
                })
                .collect()
        })
        .collect())
}

/// Fourier analyzer basis built from [`fourier_vectors`].
pub fn fourier_basis(d: usize, offset: f64) -> Result<ProjectorSet> {
    ProjectorSet::from_basis(
        &fourier_vectors(d, offset)?,
        (0..d).map(|k| k.to_string()).collect(),
    )
}

/// OAM sorter on `photon`: `{P_E, P_O}` lifted to the full register.
pub fn sorter_projectors(register: &PhotonRegister, photon: u8) -> Result<ProjectorSet> {
    let (_, oam) = parity_pair(register, photon)?;
    let local = ProjectorSet::computational(vec!["E", "O"])?;
    register.embed_projectors(&local, &[oam])
}

/// Linear-polarization analyzer at `angle` degrees: HWP at `angle/2` then a
/// polarizing splitter. Outcome 0 is the transmitted (`+`) port.
pub fn linear_analyzer(angle_deg: f64) -> ProjectorSet {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let plus = vec![re(c), re(s)];
    let minus = vec![re(-s), re(c)];
    ProjectorSet::from_basis(&[plus, minus], vec!["+", "-"]).expect("orthonormal by construction")
}
