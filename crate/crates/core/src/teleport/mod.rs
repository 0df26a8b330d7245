//! Simultaneous teleportation of a polarization qubit (photon 1) and an OAM
//! qubit (photon 3) onto photon 2.
//!
//! The protocol side ([`alice_measure`], [`bob_correct`]) only ever sees state
//! vectors and outcome labels. The input amplitudes are read solely by the
//! preparation routines and by the final fidelity check in [`run_teleport`].

mod table1;

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_8};
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gates::{
    cnot, hadamard, hwp, local_swap, oc_p, pc_o, su2, su2_angles_for, CnotSpec, Pauli,
};
use crate::hilbert::{
    apply, exact_probs, fidelity, measure, re, tensor, ProjectorSet, StateVector, UnitaryOp, C64,
    EXACT_TOL, ZERO,
};
use crate::photonreg::{three_photon_parity_register, PhotonRegister};

pub use table1::{printed_table1, verify_table1, AuditRow, BobTemplate, PrintedRow, Table1Audit};

/// Fidelity tolerance for a successful teleportation.
pub const FIDELITY_TOL: f64 = 1e-10;

/// Seed for the random inputs used while deriving corrections.
const DERIVATION_SEED: u64 = 0x0005_eed0_7e1e;
const DERIVATION_RANDOM_INPUTS: usize = 20;

/// The unknown two-qubit input: photon-1 polarization `a|H⟩ + b|V⟩` and
/// photon-3 OAM `α|E⟩ + β|O⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputQubits {
    pub a: C64,
    pub b: C64,
    pub alpha: C64,
    pub beta: C64,
}

impl InputQubits {
    pub fn new(a: C64, b: C64, alpha: C64, beta: C64) -> Result<Self> {
        for n in [
            a.norm_sqr() + b.norm_sqr(),
            alpha.norm_sqr() + beta.norm_sqr(),
        ] {
            if (n - 1.0).abs() > EXACT_TOL {
                return Err(Error::NotNormalized(n.sqrt()));
            }
        }
        Ok(Self { a, b, alpha, beta })
    }

    /// Rescales each qubit to unit norm.
    pub fn normalized(a: C64, b: C64, alpha: C64, beta: C64) -> Result<Self> {
        let n1 = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let n3 = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if n1 < 1e-300 || n3 < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            a: a / n1,
            b: b / n1,
            alpha: alpha / n3,
            beta: beta / n3,
        })
    }

    /// Haar-random pair of qubits.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (a, b, alpha, beta) = (g(), g(), g(), g());
        Self::normalized(a, b, alpha, beta).expect("gaussian draw is nonzero")
    }

    /// `(1,0,1,0)`, `(1,0,0,1)`, `(0,1,1,0)`, `(0,1,0,1)`: the products
    /// `aα, aβ, bα, bβ` in that order.
    pub fn canonical() -> [InputQubits; 4] {
        let c = |a: f64, b: f64, al: f64, be: f64| InputQubits {
            a: re(a),
            b: re(b),
            alpha: re(al),
            beta: re(be),
        };
        [
            c(1., 0., 1., 0.),
            c(1., 0., 0., 1.),
            c(0., 1., 1., 0.),
            c(0., 1., 0., 1.),
        ]
    }

    pub fn polarization(&self) -> StateVector {
        StateVector::new(vec![self.a, self.b]).unwrap()
    }

    pub fn oam(&self) -> StateVector {
        StateVector::new(vec![self.alpha, self.beta]).unwrap()
    }

    /// `(a|H⟩ + b|V⟩)(α|E⟩ + β|O⟩)` on a single photon.
    pub fn target(&self) -> StateVector {
        tensor(&[self.polarization(), self.oam()]).unwrap()
    }

    /// The products `aα, aβ, bα, bβ`.
    pub fn bilinear_weights(&self) -> [C64; 4] {
        [
            self.a * self.alpha,
            self.a * self.beta,
            self.b * self.alpha,
            self.b * self.beta,
        ]
    }
}

/// OAM spectrum `Σ c_m |m⟩₁|1−m⟩₂` of a down-converted pair (pump charge 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SpdcProfile {
    coeffs: BTreeMap<i32, C64>,
}

impl SpdcProfile {
    pub fn new(coeffs: BTreeMap<i32, C64>) -> Result<Self> {
        let n: f64 = coeffs.values().map(|c| c.norm_sqr()).sum();
        if (n - 1.0).abs() > EXACT_TOL {
            return Err(Error::NotNormalized(n.sqrt()));
        }
        Ok(Self { coeffs })
    }

    /// Equal weights on the given modes.
    pub fn uniform(support: &[i32]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::ZeroNorm);
        }
        let c = re(1.0 / (support.len() as f64).sqrt());
        Self::new(support.iter().map(|&m| (m, c)).collect())
    }

    /// Random profile symmetric under photon exchange, `|c_m| = |c_{1−m}|`,
    /// on modes `1−k ..= k`.
    pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, k: i32) -> Self {
        let mut coeffs = BTreeMap::new();
        for m in 1..=k {
            let mag: f64 = rng.random::<f64>() + 0.05;
            let ph1: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let ph2: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            coeffs.insert(m, Complex64::from_polar(mag, ph1));
            coeffs.insert(1 - m, Complex64::from_polar(mag, ph2));
        }
        let n: f64 = coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in coeffs.values_mut() {
            *c /= n;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, C64> {
        &self.coeffs
    }
}

/// `(Σ_{m even} |c_m|², Σ_{m odd} |c_m|²)`.
pub fn parity_weights(profile: &SpdcProfile) -> (f64, f64) {
    profile.coeffs.iter().fold((0.0, 0.0), |(e, o), (m, c)| {
        if m.rem_euclid(2) == 0 {
            (e + c.norm_sqr(), o)
        } else {
            (e, o + c.norm_sqr())
        }
    })
}

/// Outcome of mapping the SPDC pair onto even/odd parity qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityPair {
    /// `(|E,O⟩ + |O,E⟩)/√2` on (photon 1 OAM, photon 2 OAM).
    pub state: StateVector,
    /// Success probability of the filter that balances the two sectors.
    pub heralding_probability: f64,
    pub even_weight: f64,
    pub odd_weight: f64,
}

/// Groups the pair's modes by parity. An even mode on photon 1 always
/// pairs with an odd mode on photon 2, so the sectors are `|E,O⟩` and
/// `|O,E⟩` with amplitudes `√w_even`, `√w_odd`; a local filter then
/// balances them.
pub fn reduce_to_parity_pair(profile: &SpdcProfile) -> Result<ParityPair> {
    let (we, wo) = parity_weights(profile);
    if we < 1e-15 || wo < 1e-15 {
        return Err(Error::DegenerateProfile(we, wo));
    }
    let r = FRAC_1_SQRT_2;
    Ok(ParityPair {
        state: StateVector::from_real(&[0.0, r, r, 0.0])?,
        heralding_probability: 2.0 * we.min(wo),
        even_weight: we,
        odd_weight: wo,
    })
}

/// Which preparation route to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrepMode {
    /// Hadamard + CNOT gate network.
    Circuit,
    /// Down-converted OAM pair, polarization gadget, HWP and a polarization CNOT.
    Spdc,
}

/// Three photons, each (polarization, OAM parity); dim 64.
pub fn register() -> &'static PhotonRegister {
    static REG: OnceLock<PhotonRegister> = OnceLock::new();
    REG.get_or_init(three_photon_parity_register)
}

// subsystem indices in `register()`
const P1_POL: usize = 0;
const P1_OAM: usize = 1;
const P2_POL: usize = 2;
const P2_OAM: usize = 3;
const P3_POL: usize = 4;
const P3_OAM: usize = 5;

struct FixedGates {
    oam_cnot_e: UnitaryOp,
    pol_cnot_h: UnitaryOp,
    pol_cnot_v: UnitaryOp,
}

fn fixed_gates() -> &'static FixedGates {
    static G: OnceLock<FixedGates> = OnceLock::new();
    G.get_or_init(|| {
        let reg = register();
        let c = |ctl, tgt, v| cnot(&CnotSpec::new(ctl, tgt, v), reg).expect("valid CNOT");
        FixedGates {
            oam_cnot_e: c(P1_OAM, P2_OAM, "E"),
            pol_cnot_h: c(P2_POL, P3_POL, "H"),
            pol_cnot_v: c(P2_POL, P3_POL, "V"),
        }
    })
}

fn h_state() -> StateVector {
    StateVector::basis(2, 0)
}

/// Gate-network preparation: `H_o` on photon 1, OAM CNOT 1→2 firing on
/// `E`, `H_p` on photon 2, polarization CNOT 2→3 firing on `H`.
pub fn prepare_circuit(input: &InputQubits) -> StateVector {
    let reg = register();
    // photon 1: (a|H⟩+b|V⟩)|E⟩, photon 2: |H⟩|E⟩, photon 3: |H⟩(α|E⟩+β|O⟩)
    let initial = tensor(&[
        input.polarization(),
        h_state(),
        h_state(),
        h_state(),
        h_state(),
        input.oam(),
    ])
    .unwrap();
    let g = fixed_gates();
    let s = apply(&hadamard(), &initial, &[P1_OAM], reg).unwrap();
    let s = g.oam_cnot_e.act(&s).unwrap();
    let s = apply(&hadamard(), &s, &[P2_POL], reg).unwrap();
    g.pol_cnot_h.act(&s).unwrap()
}

/// Down-conversion preparation. Photon 3 enters as `(α|E⟩+β|O⟩)|V⟩`, so the
/// polarization CNOT fires on `V`.
pub fn prepare_spdc(profile: &SpdcProfile, input: &InputQubits) -> Result<StateVector> {
    let reg = register();
    let pair = reduce_to_parity_pair(profile)?;
    let v = StateVector::basis(2, 1);
    let h = h_state();
    let oam3 = input.oam();
    // both down-converted photons start horizontally polarized
    let amps = (0..reg.total_dim())
        .map(|i| {
            let d = reg.digits(i);
            h.amps()[d[P1_POL]]
                * pair.state.amps()[d[P1_OAM] * 2 + d[P2_OAM]]
                * h.amps()[d[P2_POL]]
                * v.amps()[d[P3_POL]]
                * oam3.amps()[d[P3_OAM]]
        })
        .collect();
    let s = StateVector::new(amps)?;
    let (al, be, ga) = su2_angles_for(input.a, input.b);
    let s = apply(&su2(al, be, ga), &s, &[P1_POL], reg)?;
    let s = apply(&hwp(FRAC_PI_8), &s, &[P2_POL], reg)?;
    fixed_gates().pol_cnot_v.act(&s)
}

/// Default profile used when none is given: uniform on `m ∈ {−2, …, 3}`.
pub fn default_profile() -> SpdcProfile {
    SpdcProfile::uniform(&[-2, -1, 0, 1, 2, 3]).expect("nonempty support")
}

pub fn prepare(input: &InputQubits, mode: PrepMode) -> StateVector {
    match mode {
        PrepMode::Circuit => prepare_circuit(input),
        PrepMode::Spdc => {
            prepare_spdc(&default_profile(), input).expect("default profile is balanced")
        }
    }
}

/// Single-photon spin-orbit Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum BellLabel {
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
    ];

    /// Amplitudes over `HE, HO, VE, VO`.
    pub fn vector(self) -> [C64; 4] {
        let r = re(FRAC_1_SQRT_2);
        match self {
            BellLabel::PsiPlus => [r, ZERO, ZERO, r],
            BellLabel::PsiMinus => [r, ZERO, ZERO, -r],
            BellLabel::PhiPlus => [ZERO, r, r, ZERO],
            BellLabel::PhiMinus => [ZERO, r, -r, ZERO],
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            BellLabel::PsiPlus => "psi+",
            BellLabel::PsiMinus => "psi-",
            BellLabel::PhiPlus => "phi+",
            BellLabel::PhiMinus => "phi-",
        }
    }

    pub fn from_ascii(s: &str) -> Option<BellLabel> {
        BellLabel::ALL.into_iter().find(|l| l.ascii() == s)
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PsiPlus => "ψ⁺",
            BellLabel::PsiMinus => "ψ⁻",
            BellLabel::PhiPlus => "φ⁺",
            BellLabel::PhiMinus => "φ⁻",
        })
    }
}

/// Joint result of the two spin-orbit Bell analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SobaOutcome {
    pub photon1: BellLabel,
    pub photon3: BellLabel,
}

impl SobaOutcome {
    pub fn new(photon1: BellLabel, photon3: BellLabel) -> Self {
        Self { photon1, photon3 }
    }

    /// All 16 outcomes, photon 1 major.
    pub fn all() -> Vec<SobaOutcome> {
        BellLabel::ALL
            .iter()
            .flat_map(|&p1| {
                BellLabel::ALL
                    .iter()
                    .map(move |&p3| SobaOutcome::new(p1, p3))
            })
            .collect()
    }

    pub fn index(self) -> usize {
        self.photon1 as usize * 4 + self.photon3 as usize
    }

    pub fn ascii(self) -> String {
        format!("{}{}", self.photon1.ascii(), self.photon3.ascii())
    }
}

impl fmt::Display for SobaOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.photon1, self.photon3)
    }
}

impl Serialize for SobaOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.ascii())
    }
}

/// How the single-photon Bell analysis is built from gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SobaFlavor {
    /// `pC_o` then `H_p`, then (pol, parity) detection. Used on photon 1.
    PolControlled,
    /// `oC_p` then `H_o`, then detection. Used on photon 3.
    OamControlled,
}

fn soba_circuit(register: &PhotonRegister, photon: u8, flavor: SobaFlavor) -> Result<UnitaryOp> {
    let pol = register.polarization(photon)?;
    let oam = register.oam(photon)?;
    Ok(match flavor {
        SobaFlavor::PolControlled => register
            .embed(&hadamard(), &[pol])?
            .compose(&pc_o(register, photon)?),
        SobaFlavor::OamControlled => register
            .embed(&hadamard(), &[oam])?
            .compose(&oc_p(register, photon)?),
    })
}

/// Detector pattern `(pol, parity)` that fires for `label`.
pub fn detector_pattern(flavor: SobaFlavor, label: BellLabel) -> (&'static str, &'static str) {
    use BellLabel::*;
    match (flavor, label) {
        (SobaFlavor::PolControlled, PsiPlus) => ("H", "E"),
        (SobaFlavor::PolControlled, PsiMinus) => ("V", "E"),
        (SobaFlavor::PolControlled, PhiPlus) => ("H", "O"),
        (SobaFlavor::PolControlled, PhiMinus) => ("V", "O"),
        (SobaFlavor::OamControlled, PsiPlus) => ("H", "E"),
        (SobaFlavor::OamControlled, PsiMinus) => ("H", "O"),
        (SobaFlavor::OamControlled, PhiPlus) => ("V", "E"),
        (SobaFlavor::OamControlled, PhiMinus) => ("V", "O"),
    }
}

/// Bell analysis on `photon` realized by its gate circuit: the projector for
/// each label is `U† |d⟩⟨d| U` with `d` the label's detector pattern.
/// Outcomes are ordered `ψ⁺, ψ⁻, φ⁺, φ⁻`.
pub fn soba_projectors(
    register: &PhotonRegister,
    photon: u8,
    flavor: SobaFlavor,
) -> Result<ProjectorSet> {
    let u = soba_circuit(register, photon, flavor)?;
    let local = ProjectorSet::computational(vec!["HE", "HO", "VE", "VO"])?;
    let pol = register.polarization(photon)?;
    let oam = register.oam(photon)?;
    let detectors = register.embed_projectors(&local, &[pol, oam])?;
    let ud = u.adjoint();
    let mut mats = Vec::with_capacity(4);
    for label in BellLabel::ALL {
        let (p, o) = detector_pattern(flavor, label);
        let k = local
            .labels()
            .iter()
            .position(|l| *l == format!("{p}{o}"))
            .unwrap();
        mats.push(ud.matrix().mul(detectors.projector(k)).mul(u.matrix()));
    }
    ProjectorSet::new(
        mats,
        BellLabel::ALL
            .iter()
            .map(|l| l.ascii().to_string())
            .collect(),
    )
}

/// Bell projectors on `photon` built straight from the state definitions.
pub fn bell_projectors(register: &PhotonRegister, photon: u8) -> Result<ProjectorSet> {
    let vectors: Vec<Vec<C64>> = BellLabel::ALL.iter().map(|l| l.vector().to_vec()).collect();
    let local =
        ProjectorSet::from_basis(&vectors, BellLabel::ALL.iter().map(|l| l.ascii()).collect())?;
    let pol = register.polarization(photon)?;
    let oam = register.oam(photon)?;
    register.embed_projectors(&local, &[pol, oam])
}

struct Analyzers {
    photon1: ProjectorSet,
    photon3: ProjectorSet,
    joint: ProjectorSet,
}

fn analyzers() -> &'static Analyzers {
    static A: OnceLock<Analyzers> = OnceLock::new();
    A.get_or_init(|| {
        let reg = register();
        let photon1 =
            soba_projectors(reg, 1, SobaFlavor::PolControlled).expect("photon 1 carries both DOFs");
        let photon3 =
            soba_projectors(reg, 3, SobaFlavor::OamControlled).expect("photon 3 carries both DOFs");
        let joint = joint_soba_projectors_from(&photon1, &photon3);
        Analyzers {
            photon1,
            photon3,
            joint,
        }
    })
}

fn joint_soba_projectors_from(p1: &ProjectorSet, p3: &ProjectorSet) -> ProjectorSet {
    let mut mats = Vec::with_capacity(16);
    let mut labels = Vec::with_capacity(16);
    for o in SobaOutcome::all() {
        // the two analyzers act on disjoint photons and commute
        mats.push(
            p1.projector(o.photon1 as usize)
                .mul(p3.projector(o.photon3 as usize)),
        );
        labels.push(o.ascii());
    }
    ProjectorSet::new(mats, labels).expect("product of complete commuting sets")
}

/// The 16 joint outcomes, indexed by [`SobaOutcome::index`].
pub fn joint_soba_projectors() -> &'static ProjectorSet {
    &analyzers().joint
}

/// Exact probabilities of the 16 joint outcomes.
pub fn outcome_probabilities(state: &StateVector) -> Result<Vec<f64>> {
    exact_probs(state, joint_soba_projectors())
}

/// Photon 2's (pol, parity) state once photons 1 and 3 are known to be in
/// `outcome`. Returns `None` when the outcome has zero amplitude.
pub fn bob_conditional_state(
    state: &StateVector,
    outcome: SobaOutcome,
) -> Result<Option<StateVector>> {
    let raw = bob_unnormalized(state, outcome)?;
    Ok(StateVector::normalized(raw).ok())
}

/// `(⟨b₁| ⊗ I ⊗ ⟨b₃|)|ψ⟩` without normalization.
fn bob_unnormalized(state: &StateVector, outcome: SobaOutcome) -> Result<Vec<C64>> {
    if state.dim() != 64 {
        return Err(Error::DimMismatch {
            expected: 64,
            actual: state.dim(),
        });
    }
    let b1 = outcome.photon1.vector();
    let b3 = outcome.photon3.vector();
    let amps = state.amps();
    Ok((0..4)
        .map(|j| {
            let mut acc = ZERO;
            for (i, x) in b1.iter().enumerate() {
                for (k, y) in b3.iter().enumerate() {
                    acc += x.conj() * y.conj() * amps[i * 16 + j * 4 + k];
                }
            }
            acc
        })
        .collect())
}

/// Bob's fix-up: polarization Pauli, DOF swap, polarization Pauli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CorrectionRecipe {
    /// Applied to polarization before the swap.
    pub pre: Pauli,
    /// Applied to polarization after the swap.
    pub post: Pauli,
}

impl CorrectionRecipe {
    pub fn new(pre: Pauli, post: Pauli) -> Self {
        Self { pre, post }
    }

    /// All 16 recipes in tie-break order (pre, then post).
    pub fn all() -> Vec<CorrectionRecipe> {
        Pauli::ALL
            .iter()
            .flat_map(|&pre| {
                Pauli::ALL
                    .iter()
                    .map(move |&post| CorrectionRecipe::new(pre, post))
            })
            .collect()
    }

    /// `(post ⊗ I) · SWAP · (pre ⊗ I)` on Bob's (pol, parity).
    pub fn unitary(&self) -> UnitaryOp {
        let id = UnitaryOp::identity(2);
        self.post
            .unitary()
            .kron(&id)
            .compose(&local_swap())
            .compose(&self.pre.unitary().kron(&id))
    }
}

impl fmt::Display for CorrectionRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}ᵖ] · SWAP · [{}ᵖ]", self.post, self.pre)
    }
}

/// One derived correction.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRow {
    pub outcome: SobaOutcome,
    /// Bob's state before correction as a bilinear form in the inputs.
    pub template: BobTemplate,
    /// Lexicographically first working recipe.
    pub recipe: CorrectionRecipe,
    /// Every recipe that works (equal up to global phase).
    pub alternatives: Vec<CorrectionRecipe>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTable {
    rows: Vec<DerivedRow>,
}

impl CorrectionTable {
    pub fn rows(&self) -> &[DerivedRow] {
        &self.rows
    }

    pub fn row(&self, outcome: SobaOutcome) -> &DerivedRow {
        &self.rows[outcome.index()]
    }

    pub fn recipe_for(&self, outcome: SobaOutcome) -> CorrectionRecipe {
        self.row(outcome).recipe
    }
}

fn restores(recipe: &UnitaryOp, bob: &StateVector, target: &StateVector) -> bool {
    let out = recipe.act(bob).expect("4-dim");
    fidelity(&out, target).expect("4-dim") >= 1.0 - FIDELITY_TOL
}

/// Derives Bob's correction for every outcome by exhaustive search over the
/// 16-recipe group, validated on the canonical inputs and on seeded random
/// inputs.
pub fn derive_corrections() -> Result<CorrectionTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(DERIVATION_SEED);
    let mut inputs = InputQubits::canonical().to_vec();
    inputs.extend((0..DERIVATION_RANDOM_INPUTS).map(|_| InputQubits::random(&mut rng)));
    let states: Vec<StateVector> = inputs.iter().map(prepare_circuit).collect();
    let recipes: Vec<(CorrectionRecipe, UnitaryOp)> = CorrectionRecipe::all()
        .into_iter()
        .map(|r| (r, r.unitary()))
        .collect();

    let mut rows = Vec::with_capacity(16);
    for outcome in SobaOutcome::all() {
        let template = BobTemplate::derive(outcome)?;
        let mut cases = Vec::with_capacity(inputs.len());
        for (input, state) in inputs.iter().zip(&states) {
            let bob = bob_conditional_state(state, outcome)?
                .ok_or_else(|| Error::NoRecipe(outcome.ascii()))?;
            cases.push((bob, input.target()));
        }
        let alternatives: Vec<CorrectionRecipe> = recipes
            .iter()
            .filter(|(_, u)| cases.iter().all(|(bob, t)| restores(u, bob, t)))
            .map(|(r, _)| *r)
            .collect();
        let recipe = *alternatives
            .first()
            .ok_or_else(|| Error::NoRecipe(outcome.ascii()))?;
        rows.push(DerivedRow {
            outcome,
            template,
            recipe,
            alternatives,
        });
    }
    Ok(CorrectionTable { rows })
}

/// Cached result of [`derive_corrections`].
pub fn corrections() -> Result<&'static CorrectionTable> {
    static TABLE: OnceLock<Result<CorrectionTable>> = OnceLock::new();
    TABLE
        .get_or_init(derive_corrections)
        .as_ref()
        .map_err(Clone::clone)
}

/// Alice's two Bell analyses, photon 1 first.
pub fn alice_measure<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(SobaOutcome, StateVector)> {
    let a = analyzers();
    let first = measure(state, &a.photon1, rng)?;
    let second = measure(&first.state, &a.photon3, rng)?;
    let outcome = SobaOutcome::new(BellLabel::ALL[first.index], BellLabel::ALL[second.index]);
    Ok((outcome, second.state))
}

/// Post-selects `outcome` instead of sampling it.
pub fn alice_force(state: &StateVector, outcome: SobaOutcome) -> Result<StateVector> {
    let p = joint_soba_projectors().projector(outcome.index());
    StateVector::normalized(p.mul_vec(state.amps()))
}

/// Bob reads photon 2 out of the collapsed state and applies his recipe.
pub fn bob_correct(
    collapsed: &StateVector,
    outcome: SobaOutcome,
    table: &CorrectionTable,
) -> Result<(StateVector, CorrectionRecipe, StateVector)> {
    let pre = bob_conditional_state(collapsed, outcome)?.ok_or(Error::NoOutcome)?;
    let recipe = table.recipe_for(outcome);
    let fin = recipe.unitary().act(&pre)?;
    Ok((pre, recipe, fin))
}

/// Record of one teleportation run.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportTrace {
    pub outcome: SobaOutcome,
    pub outcome_probability: f64,
    pub bob_pre_correction: StateVector,
    pub recipe: CorrectionRecipe,
    pub bob_final: StateVector,
    pub fidelity_to_target: f64,
}

impl TeleportTrace {
    pub fn succeeded(&self) -> bool {
        self.fidelity_to_target >= 1.0 - FIDELITY_TOL
    }
}

/// Prepares, samples Alice's outcome, corrects and scores the result.
pub fn run_teleport<R: Rng + ?Sized>(
    input: &InputQubits,
    mode: PrepMode,
    rng: &mut R,
) -> Result<TeleportTrace> {
    let state = prepare(input, mode);
    let probs = outcome_probabilities(&state)?;
    let (outcome, collapsed) = alice_measure(&state, rng)?;
    finish(input, outcome, probs[outcome.index()], &collapsed)
}

/// As [`run_teleport`] with the outcome post-selected.
pub fn run_teleport_forced(
    input: &InputQubits,
    mode: PrepMode,
    outcome: SobaOutcome,
) -> Result<TeleportTrace> {
    teleport_prepared(&prepare(input, mode), input, outcome)
}

/// As [`run_teleport_forced`] for an already prepared state.
pub fn teleport_prepared(
    state: &StateVector,
    input: &InputQubits,
    outcome: SobaOutcome,
) -> Result<TeleportTrace> {
    let p = joint_soba_projectors()
        .projector(outcome.index())
        .expectation(state.amps())
        .re;
    let collapsed = alice_force(state, outcome)?;
    finish(input, outcome, p.max(0.0), &collapsed)
}

fn finish(
    input: &InputQubits,
    outcome: SobaOutcome,
    p: f64,
    collapsed: &StateVector,
) -> Result<TeleportTrace> {
    let (pre, recipe, fin) = bob_correct(collapsed, outcome, corrections()?)?;
    let f = fidelity(&fin, &input.target())?;
    Ok(TeleportTrace {
        outcome,
        outcome_probability: p,
        bob_pre_correction: pre,
        recipe,
        bob_final: fin,
        fidelity_to_target: f,
    })
}

/// `Σ_c weights[c] · columns[c]` for a 4×4 coefficient block.
pub(crate) fn combine(columns: &[[C64; 4]; 4], weights: &[C64; 4]) -> Vec<C64> {
    (0..4)
        .map(|j| (0..4).map(|c| columns[j][c] * weights[c]).sum())
        .collect()
}

#[cfg(test)]
mod tests;
