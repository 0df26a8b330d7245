//! Entanglement-based key distribution on the state
//! `(|0,0⟩ + |1,−1⟩ + |−1,1⟩)₁₂/√3 ⊗ (|HH⟩ + |VV⟩)₂₃/√2`.
//!
//! Alice holds photon 2 (polarization and OAM). Bob holds photon 1's OAM and
//! photon 3's polarization. Bob reports key-basis OAM outcomes negated, so
//! the shared qutrit reads `Σ_j |j, j⟩/√3` and key trits agree as `j == j′`.

mod analysis;
mod exact;
mod sim;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::{fourier_basis, fourier_vectors, linear_analyzer};
use crate::hilbert::{apply, ProjectorSet, StateVector, UnitaryOp, C64, ZERO};
use crate::photonreg::{DofKind, DofSpec, PhotonRegister};

pub use analysis::{
    cglmp, chsh, correlation_e, key_stats, pack_bits, pack_trits, sift, verdict, BellReport,
    CellCategory, ChshReport, EfficiencyReport, OamCategory, SiftReport, Verdict, CGLMP_TERMS,
    CLASSICAL_BOUND, DISCARD_CELLS, EKERT_PHOTONS_PER_BIT, KEY_CELLS, PUBLISHED_PHOTONS_PER_BIT,
    S_CELLS, S_PRIME_CELLS,
};
pub use exact::{exact_expectations, exact_s3, ExactReport};
pub use sim::{simulate, simulate_sharded, RoundRecord, SimOutput, TallyTable, BLOCK_ROUNDS};

/// Alice's analyzer angles γ in degrees.
pub const ALICE_ANGLES: [f64; 4] = [0.0, 22.5, 45.0, 67.5];
/// Bob's analyzer angles δ in degrees. 180° is the same analyzer as 0°.
pub const BOB_ANGLES: [f64; 4] = [22.5, 45.0, 67.5, 180.0];

/// Index of the key basis (A₃, B₃) among the three OAM settings.
pub const KEY_BASIS: usize = 2;

/// The shared 36-dim state with its layout: photon 1 OAM qutrit, photon 2
/// polarization, photon 2 OAM qutrit, photon 3 polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct QkdState {
    pub register: PhotonRegister,
    pub vector: StateVector,
}

// subsystem indices in `QkdState::register`
pub(crate) const B_OAM: usize = 0;
pub(crate) const A_POL: usize = 1;
pub(crate) const A_OAM: usize = 2;
pub(crate) const B_POL: usize = 3;

pub fn qkd_register() -> PhotonRegister {
    PhotonRegister::build(vec![
        DofSpec::new(1, DofKind::OamQutrit),
        DofSpec::new(2, DofKind::Polarization),
        DofSpec::new(2, DofKind::OamQutrit),
        DofSpec::new(3, DofKind::Polarization),
    ])
    .expect("distinct subsystems")
}

pub fn build_state() -> QkdState {
    let register = qkd_register();
    let amp = C64::new(1.0 / 6f64.sqrt(), 0.0);
    let mut amps = vec![ZERO; register.total_dim()];
    for (m1, m2) in [("0", "0"), ("+1", "-1"), ("-1", "+1")] {
        for p in ["H", "V"] {
            amps[register.index_of(&[m1, p, m2, p]).unwrap()] = amp;
        }
    }
    let vector = StateVector::new(amps).expect("six equal terms");
    QkdState { register, vector }
}

/// Linear-polarization analyzer; outcome 0 (`+`) is bit 0.
pub fn pol_projectors(angle_deg: f64) -> ProjectorSet {
    linear_analyzer(angle_deg)
}

/// Fourier phase offsets of the two non-key OAM settings per party.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OamOffsets {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
}

impl Default for OamOffsets {
    fn default() -> Self {
        Self {
            alice: [0.0, -0.5],
            bob: [0.25, -0.25],
        }
    }
}

/// Local OAM analyzers on the physical index (`0, +1, −1` stored as
/// `0, 1, 2`).
///
/// In the relabeled frame `j′ = −m` for Bob, Alice measures the Fourier
/// basis with her offset and Bob measures its complex conjugate with his;
/// setting 3 is the computational basis for both.
#[derive(Debug, Clone, PartialEq)]
pub struct OamBases {
    pub alice: [ProjectorSet; 3],
    pub bob: [ProjectorSet; 3],
}

fn labels3() -> Vec<&'static str> {
    vec!["0", "1", "2"]
}

/// Maps Bob's frame vectors onto photon 1's physical index.
fn bob_physical(frame: Vec<Vec<C64>>) -> ProjectorSet {
    let physical: Vec<Vec<C64>> = frame
        .into_iter()
        .map(|v| (0..3).map(|n| v[(3 - n) % 3]).collect())
        .collect();
    ProjectorSet::from_basis(&physical, labels3()).expect("orthonormal")
}

fn computational3() -> Vec<Vec<C64>> {
    (0..3)
        .map(|t| {
            (0..3)
                .map(|j| if j == t { C64::new(1.0, 0.0) } else { ZERO })
                .collect()
        })
        .collect()
}

pub fn oam_bases(offsets: &OamOffsets) -> OamBases {
    let alice = |o: f64| fourier_basis(3, o).expect("d = 3 supported");
    let bob = |o: f64| {
        let conj = fourier_vectors(3, o)
            .expect("d = 3 supported")
            .into_iter()
            .map(|v| v.into_iter().map(|c| c.conj()).collect())
            .collect();
        bob_physical(conj)
    };
    OamBases {
        alice: [
            alice(offsets.alice[0]),
            alice(offsets.alice[1]),
            ProjectorSet::from_basis(&computational3(), labels3()).expect("orthonormal"),
        ],
        bob: [
            bob(offsets.bob[0]),
            bob(offsets.bob[1]),
            bob_physical(computational3()),
        ],
    }
}

/// Intercept-resend eavesdropping on the photons travelling to Bob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum EveModel {
    None,
    /// Measures photon 3's polarization with a linear analyzer at `angle` degrees.
    Pol {
        angle: f64,
    },
    /// Measures photon 1's OAM in Bob's basis `basis` (1..=3).
    Oam {
        basis: usize,
    },
    Both {
        angle: f64,
        basis: usize,
    },
}

impl EveModel {
    /// Builds a model from its CLI name with default H/V and key-basis settings
    /// unless overridden.
    pub fn parse(name: &str, angle: Option<f64>, basis: Option<usize>) -> Result<Self> {
        let angle = angle.unwrap_or(0.0);
        let basis = basis.unwrap_or(KEY_BASIS + 1);
        if !(1..=3).contains(&basis) {
            return Err(Error::UnknownEveModel(format!("{name} (basis {basis})")));
        }
        match name {
            "none" => Ok(EveModel::None),
            "pol" => Ok(EveModel::Pol { angle }),
            "oam" => Ok(EveModel::Oam { basis }),
            "both" => Ok(EveModel::Both { angle, basis }),
            other => Err(Error::UnknownEveModel(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EveModel::None => "none",
            EveModel::Pol { .. } => "pol",
            EveModel::Oam { .. } => "oam",
            EveModel::Both { .. } => "both",
        }
    }

    fn pol_angle(&self) -> Option<f64> {
        match *self {
            EveModel::Pol { angle } | EveModel::Both { angle, .. } => Some(angle),
            _ => None,
        }
    }

    fn oam_basis(&self) -> Option<usize> {
        match *self {
            EveModel::Oam { basis } | EveModel::Both { basis, .. } => Some(basis),
            _ => None,
        }
    }
}

impl fmt::Display for EveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EveModel::None => write!(f, "none"),
            EveModel::Pol { angle } => write!(f, "intercept-resend pol at {angle}°"),
            EveModel::Oam { basis } => write!(f, "intercept-resend oam in B{basis}"),
            EveModel::Both { angle, basis } => {
                write!(f, "intercept-resend pol at {angle}° and oam in B{basis}")
            }
        }
    }
}

/// One possible post-Eve state and its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
}

/// Eve's outcome distribution followed by the collapsed states she forwards.
#[derive(Debug, Clone, PartialEq)]
pub struct EvePipeline {
    pub model: EveModel,
    pub branches: Vec<Branch>,
}

fn trusted(p: &crate::hilbert::Matrix) -> UnitaryOp {
    UnitaryOp::from_trusted(p.clone())
}

/// Splits `branches` by a local measurement on subsystem `target`.
fn split(
    branches: Vec<Branch>,
    ps: &ProjectorSet,
    target: usize,
    reg: &PhotonRegister,
) -> Vec<Branch> {
    let mut out = Vec::new();
    for b in branches {
        for p in ps.projectors() {
            let raw = apply(&trusted(p), &b.state, &[target], reg).expect("local projector fits");
            let w = raw.norm_sqr();
            if w > 1e-15 {
                out.push(Branch {
                    probability: b.probability * w,
                    state: raw.normalize().expect("nonzero"),
                });
            }
        }
    }
    out
}

pub fn apply_eve(state: &QkdState, model: EveModel, bases: &OamBases) -> EvePipeline {
    let mut branches = vec![Branch {
        probability: 1.0,
        state: state.vector.clone(),
    }];
    if let Some(angle) = model.pol_angle() {
        branches = split(branches, &pol_projectors(angle), B_POL, &state.register);
    }
    if let Some(basis) = model.oam_basis() {
        branches = split(branches, &bases.bob[basis - 1], B_OAM, &state.register);
    }
    EvePipeline { model, branches }
}

/// Round settings: γ and δ indices (0..4), Alice and Bob OAM basis (0..3).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Settings {
    pub gamma: u8,
    pub delta: u8,
    pub alice_oam: u8,
    pub bob_oam: u8,
}

impl Settings {
    pub const COUNT: usize = 144;

    pub fn index(&self) -> usize {
        ((self.gamma as usize * 4 + self.delta as usize) * 3 + self.alice_oam as usize) * 3
            + self.bob_oam as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self {
            gamma: (i / 36) as u8,
            delta: (i / 9 % 4) as u8,
            alice_oam: (i / 3 % 3) as u8,
            bob_oam: (i % 3) as u8,
        }
    }
}

/// Joint outcome index `((a·2 + b)·3 + j)·3 + j′`.
pub const OUTCOMES: usize = 36;

pub fn outcome_index(a: u8, b: u8, j: u8, jp: u8) -> usize {
    ((a as usize * 2 + b as usize) * 3 + j as usize) * 3 + jp as usize
}

pub fn outcome_parts(o: usize) -> (u8, u8, u8, u8) {
    (
        (o / 18) as u8,
        (o / 9 % 2) as u8,
        (o / 3 % 3) as u8,
        (o % 3) as u8,
    )
}

/// Born probabilities of the 36 joint outcomes for every setting combination.
pub(crate) fn outcome_table(
    state: &StateVector,
    reg: &PhotonRegister,
    bases: &OamBases,
) -> Vec<[f64; OUTCOMES]> {
    let alice_pol: Vec<ProjectorSet> = ALICE_ANGLES.iter().map(|&a| pol_projectors(a)).collect();
    let bob_pol: Vec<ProjectorSet> = BOB_ANGLES.iter().map(|&a| pol_projectors(a)).collect();
    (0..Settings::COUNT)
        .map(|si| {
            let s = Settings::from_index(si);
            let mut row = [0.0; OUTCOMES];
            for (o, slot) in row.iter_mut().enumerate() {
                let (a, b, j, jp) = outcome_parts(o);
                let mut v = state.clone();
                for (ps, k, t) in [
                    (&alice_pol[s.gamma as usize], a, A_POL),
                    (&bob_pol[s.delta as usize], b, B_POL),
                    (&bases.alice[s.alice_oam as usize], j, A_OAM),
                    (&bases.bob[s.bob_oam as usize], jp, B_OAM),
                ] {
                    v = apply(&trusted(ps.projector(k as usize)), &v, &[t], reg)
                        .expect("local projector fits");
                }
                *slot = v.norm_sqr();
            }
            row
        })
        .collect()
}
