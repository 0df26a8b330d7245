use serde::Serialize;

use crate::hilbert::{C64, ZERO};

use super::analysis::{cglmp_from, chsh_from, e_from};
use super::{
    apply_eve, oam_bases, outcome_parts, outcome_table, EveModel, OamOffsets, QkdState, Settings,
    KEY_CELLS, OUTCOMES,
};

/// Analytic Born-rule values for a (possibly eavesdropped) state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    /// `E(γ_i, δ_j)`.
    pub e_table: [[f64; 4]; 4],
    pub s: f64,
    pub s_prime: f64,
    pub s3: f64,
    /// `P(a, b | γ, δ)` as `[γ][δ][a][b]`.
    pub pol_joint: [[[[f64; 2]; 2]; 4]; 4],
    /// `P(j, j′ | A, B)` as `[A][B][j][j′]`.
    pub oam_joint: [[[[f64; 3]; 3]; 3]; 3],
    /// Mean disagreement over the four polarization key cells.
    pub pol_key_qber: f64,
    /// Disagreement in the (A₃, B₃) cell.
    pub oam_key_ser: f64,
}

/// Mixture over Eve's branches of the per-setting outcome distributions.
pub fn exact_expectations(state: &QkdState, eve: EveModel, offsets: &OamOffsets) -> ExactReport {
    let bases = oam_bases(offsets);
    let pipeline = apply_eve(state, eve, &bases);
    let mut table = vec![[0.0; OUTCOMES]; Settings::COUNT];
    for b in &pipeline.branches {
        for (acc, row) in table
            .iter_mut()
            .zip(outcome_table(&b.state, &state.register, &bases))
        {
            for (x, p) in acc.iter_mut().zip(row) {
                *x += b.probability * p;
            }
        }
    }
    let mut pol_joint = [[[[0.0; 2]; 2]; 4]; 4];
    let mut oam_joint = [[[[0.0; 3]; 3]; 3]; 3];
    for (si, row) in table.iter().enumerate() {
        let s = Settings::from_index(si);
        for (o, &p) in row.iter().enumerate() {
            let (a, b, j, jp) = outcome_parts(o);
            // each marginal is read at a single value of the other channel's settings
            if s.alice_oam == 0 && s.bob_oam == 0 {
                pol_joint[s.gamma as usize][s.delta as usize][a as usize][b as usize] += p;
            }
            if s.gamma == 0 && s.delta == 0 {
                oam_joint[s.alice_oam as usize][s.bob_oam as usize][j as usize][jp as usize] += p;
            }
        }
    }
    let mut e_table = [[0.0; 4]; 4];
    for (g, row) in e_table.iter_mut().enumerate() {
        for (d, e) in row.iter_mut().enumerate() {
            *e = e_from(&pol_joint[g][d]);
        }
    }
    let (s, s_prime) = chsh_from(&e_table);
    let s3 = cglmp_from(|a, b| oam_joint[a][b]);
    let pol_key_qber = KEY_CELLS
        .iter()
        .map(|&(g, d)| pol_joint[g][d][0][1] + pol_joint[g][d][1][0])
        .sum::<f64>()
        / KEY_CELLS.len() as f64;
    let key = &oam_joint[2][2];
    let oam_key_ser = 1.0 - (0..3).map(|j| key[j][j]).sum::<f64>();
    ExactReport {
        e_table,
        s,
        s_prime,
        s3,
        pol_joint,
        oam_joint,
        pol_key_qber,
        oam_key_ser,
    }
}

/// `Σ_m |m⟩₁|−m⟩₂/√3` as a 9-vector, photon 1 (Bob) most significant.
fn oam_pair_state() -> Vec<C64> {
    let mut v = vec![ZERO; 9];
    for m in 0..3 {
        v[m * 3 + (3 - m) % 3] = C64::new(1.0 / 3f64.sqrt(), 0.0);
    }
    v
}

/// S3 on the OAM pair alone, computed with full 9×9 projectors.
pub fn exact_s3(offsets: &OamOffsets) -> f64 {
    let bases = oam_bases(offsets);
    let psi = oam_pair_state();
    cglmp_from(|a, b| {
        let mut m = [[0.0; 3]; 3];
        for (j, row) in m.iter_mut().enumerate() {
            for (jp, p) in row.iter_mut().enumerate() {
                let op = bases.bob[b].projector(jp).kron(bases.alice[a].projector(j));
                *p = op.expectation(&psi).re;
            }
        }
        m
    })
}
