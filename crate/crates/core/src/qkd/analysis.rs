use serde::Serialize;

use super::{RoundRecord, TallyTable, ALICE_ANGLES, BOB_ANGLES, KEY_BASIS};
use crate::error::{Error, Result};

/// Local-realistic bound shared by S, S′ and S3.
pub const CLASSICAL_BOUND: f64 = 2.0;

/// Photons per sifted key bit for the two-photon Ekert scheme.
pub const EKERT_PHOTONS_PER_BIT: f64 = 8.0;
/// Published resource claim for this scheme, photons per sifted bit.
pub const PUBLISHED_PHOTONS_PER_BIT: f64 = 6.0;

/// `(γ index, δ index)` cells, zero based.
pub const KEY_CELLS: [(usize, usize); 4] = [(0, 3), (1, 0), (2, 1), (3, 2)];
pub const S_CELLS: [(usize, usize); 4] = [(0, 0), (2, 0), (0, 2), (2, 2)];
pub const S_PRIME_CELLS: [(usize, usize); 4] = [(1, 1), (3, 1), (1, 3), (3, 3)];
pub const DISCARD_CELLS: [(usize, usize); 4] = [(3, 0), (0, 1), (1, 2), (2, 3)];

/// `S = E₁₁ − E₁₃ + E₃₁ + E₃₃`.
const S_TERMS: [(f64, usize, usize); 4] = [(1.0, 0, 0), (-1.0, 0, 2), (1.0, 2, 0), (1.0, 2, 2)];
/// `S′ = E₂₂ + E₂₄ + E₄₂ − E₄₄`.
const S_PRIME_TERMS: [(f64, usize, usize); 4] =
    [(1.0, 1, 1), (1.0, 1, 3), (1.0, 3, 1), (-1.0, 3, 3)];

/// `(sign, A setting, B setting, k)` terms of `Σ ± P(A_a = B_b + k)`.
pub const CGLMP_TERMS: [(f64, usize, usize, i32); 8] = [
    (1.0, 0, 0, 0),
    (1.0, 1, 0, -1),
    (1.0, 1, 1, 0),
    (1.0, 0, 1, 0),
    (-1.0, 0, 0, -1),
    (-1.0, 1, 0, 0),
    (-1.0, 1, 1, -1),
    (-1.0, 0, 1, 1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellCategory {
    Key,
    S,
    SPrime,
    Discard,
}

impl CellCategory {
    pub fn of(g: usize, d: usize) -> CellCategory {
        let c = (g, d);
        if KEY_CELLS.contains(&c) {
            CellCategory::Key
        } else if S_CELLS.contains(&c) {
            CellCategory::S
        } else if S_PRIME_CELLS.contains(&c) {
            CellCategory::SPrime
        } else {
            CellCategory::Discard
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OamCategory {
    Key,
    Bell,
    Redundant,
}

impl OamCategory {
    pub fn of(a: usize, b: usize) -> OamCategory {
        match (a, b) {
            (KEY_BASIS, KEY_BASIS) => OamCategory::Key,
            (a, b) if a < KEY_BASIS && b < KEY_BASIS => OamCategory::Bell,
            _ => OamCategory::Redundant,
        }
    }
}

/// `(P₊₊ + P₋₋ − P₊₋ − P₋₊)` for a normalized 2×2 distribution.
pub(crate) fn e_from(p: &[[f64; 2]; 2]) -> f64 {
    p[0][0] + p[1][1] - p[0][1] - p[1][0]
}

pub(crate) fn chsh_from(e: &[[f64; 4]; 4]) -> (f64, f64) {
    let sum = |terms: &[(f64, usize, usize)]| terms.iter().map(|&(s, g, d)| s * e[g][d]).sum();
    (sum(&S_TERMS), sum(&S_PRIME_TERMS))
}

/// `P(A = B + k) = Σ_j P(A = j, B = (j + k) mod 3)`.
fn match_prob(m: &[[f64; 3]; 3], k: i32) -> f64 {
    (0..3)
        .map(|j| m[j][(j as i32 + k).rem_euclid(3) as usize])
        .sum()
}

/// CGLMP sum from per-cell joint distributions `m(A, B)[j][j′]`.
pub(crate) fn cglmp_from(m: impl Fn(usize, usize) -> [[f64; 3]; 3]) -> f64 {
    CGLMP_TERMS
        .iter()
        .map(|&(s, a, b, k)| s * match_prob(&m(a, b), k))
        .sum()
}

pub fn correlation_e(t: &TallyTable, g: usize, d: usize) -> Result<f64> {
    let n = t.pol_cell_total(g, d);
    if n == 0 {
        return Err(Error::EmptyCell(format!(
            "gamma={} delta={}",
            ALICE_ANGLES[g], BOB_ANGLES[d]
        )));
    }
    let c = &t.pol[g][d];
    Ok((c[0][0] + c[1][1]) as f64 / n as f64 - (c[0][1] + c[1][0]) as f64 / n as f64)
}

/// S and S′ estimates with binomial standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub s: f64,
    pub s_stderr: f64,
    pub s_prime: f64,
    pub s_prime_stderr: f64,
    /// Populated cells only; `None` where no rounds landed.
    pub e_table: [[Option<f64>; 4]; 4],
}

pub fn chsh(t: &TallyTable) -> Result<ChshReport> {
    let estimate = |terms: &[(f64, usize, usize)]| -> Result<(f64, f64)> {
        let mut value = 0.0;
        let mut var = 0.0;
        for &(s, g, d) in terms {
            let e = correlation_e(t, g, d)?;
            value += s * e;
            var += (1.0 - e * e) / t.pol_cell_total(g, d) as f64;
        }
        Ok((value, var.sqrt()))
    };
    let (s, s_stderr) = estimate(&S_TERMS)?;
    let (s_prime, s_prime_stderr) = estimate(&S_PRIME_TERMS)?;
    let mut e_table = [[None; 4]; 4];
    for (g, row) in e_table.iter_mut().enumerate() {
        for (d, e) in row.iter_mut().enumerate() {
            *e = correlation_e(t, g, d).ok();
        }
    }
    Ok(ChshReport {
        s,
        s_stderr,
        s_prime,
        s_prime_stderr,
        e_table,
    })
}

/// S3 estimate with its multinomial standard error.
pub fn cglmp(t: &TallyTable) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut var = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let n = t.oam_cell_total(a, b);
            if n == 0 {
                return Err(Error::EmptyCell(format!("A{} B{}", a + 1, b + 1)));
            }
            // weight of each (j, j′) in this cell's contribution
            let mut w = [[0.0; 3]; 3];
            for &(s, ta, tb, k) in &CGLMP_TERMS {
                if (ta, tb) == (a, b) {
                    for (j, row) in w.iter_mut().enumerate() {
                        row[(j as i32 + k).rem_euclid(3) as usize] += s;
                    }
                }
            }
            let (mut mean, mut sq) = (0.0, 0.0);
            for (wrow, crow) in w.iter().zip(&t.oam[a][b]) {
                for (&wv, &c) in wrow.iter().zip(crow) {
                    let p = c as f64 / n as f64;
                    mean += wv * p;
                    sq += wv * wv * p;
                }
            }
            value += mean;
            var += (sq - mean * mean) / n as f64;
        }
    }
    Ok((value, var.max(0.0).sqrt()))
}

/// Bell-test summary for both channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellReport {
    pub s: f64,
    pub s_stderr: f64,
    pub s_prime: f64,
    pub s_prime_stderr: f64,
    pub s3: f64,
    pub s3_stderr: f64,
    pub s_violates: bool,
    pub s_prime_violates: bool,
    pub s3_violates: bool,
}

impl BellReport {
    pub fn from_tallies(t: &TallyTable) -> Result<Self> {
        let c = chsh(t)?;
        let (s3, s3_stderr) = cglmp(t)?;
        Ok(Self::new(
            c.s,
            c.s_stderr,
            c.s_prime,
            c.s_prime_stderr,
            s3,
            s3_stderr,
        ))
    }

    pub fn new(
        s: f64,
        s_stderr: f64,
        s_prime: f64,
        s_prime_stderr: f64,
        s3: f64,
        s3_stderr: f64,
    ) -> Self {
        Self {
            s,
            s_stderr,
            s_prime,
            s_prime_stderr,
            s3,
            s3_stderr,
            s_violates: s > CLASSICAL_BOUND,
            s_prime_violates: s_prime > CLASSICAL_BOUND,
            s3_violates: s3 > CLASSICAL_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pol_channel_secure: bool,
    pub oam_channel_secure: bool,
    pub secure: bool,
    pub line: String,
}

/// Secure iff (S > 2 or S′ > 2) and S3 > 2.
pub fn verdict(b: &BellReport) -> Verdict {
    let pol = b.s_violates || b.s_prime_violates;
    let oam = b.s3_violates;
    let secure = pol && oam;
    let ch = |ok: bool| if ok { "secure" } else { "INSECURE" };
    let line = format!(
        "{}: polarization channel {} (S={:.4}, S'={:.4}), OAM channel {} (S3={:.4})",
        if secure { "secure" } else { "insecure" },
        ch(pol),
        b.s,
        b.s_prime,
        ch(oam),
        b.s3
    );
    Verdict {
        pol_channel_secure: pol,
        oam_channel_secure: oam,
        secure,
        line,
    }
}

/// Sifted keys and data-usage fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiftReport {
    pub rounds: u64,
    pub pol_key_rounds: u64,
    pub pol_s_rounds: u64,
    pub pol_s_prime_rounds: u64,
    pub pol_discard_rounds: u64,
    pub pol_key_fraction: f64,
    pub pol_s_fraction: f64,
    pub pol_s_prime_fraction: f64,
    pub pol_discard_fraction: f64,
    pub oam_key_rounds: u64,
    pub oam_bell_rounds: u64,
    pub oam_redundant_rounds: u64,
    pub oam_key_fraction: f64,
    pub oam_bell_fraction: f64,
    pub oam_redundant_fraction: f64,
    pub pol_key_errors: u64,
    pub pol_qber: f64,
    pub oam_key_errors: u64,
    pub oam_symbol_error_rate: f64,
    /// Alice's bits packed MSB first.
    pub pol_key_hex: String,
    /// Alice's trits packed five per byte, base 3, first trit most significant.
    pub oam_key_hex: String,
    pub bob_pol_key_hex: String,
    pub bob_oam_key_hex: String,
    /// Key cells satisfying `γ − δ ≡ 0 (mod 180°)`.
    pub key_cells_with_equal_angles: usize,
    /// Key cells satisfying `γ + δ ∈ {0°, 180°}`.
    pub key_cells_with_sum_condition: usize,
}

pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
        })
        .collect()
}

pub fn pack_trits(trits: &[u8]) -> Vec<u8> {
    trits
        .chunks(5)
        .map(|c| c.iter().fold(0u8, |acc, &t| acc * 3 + t))
        .collect()
}

fn frac(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn angle_condition(f: impl Fn(f64, f64) -> f64) -> usize {
    KEY_CELLS
        .iter()
        .filter(|&&(g, d)| {
            let x = f(ALICE_ANGLES[g], BOB_ANGLES[d]).rem_euclid(180.0);
            x.abs() < 1e-9 || (x - 180.0).abs() < 1e-9
        })
        .count()
}

pub fn sift(t: &TallyTable, records: &[RoundRecord]) -> SiftReport {
    let mut pol = [0u64; 4];
    for g in 0..4 {
        for d in 0..4 {
            pol[CellCategory::of(g, d) as usize] += t.pol_cell_total(g, d);
        }
    }
    let mut oam = [0u64; 3];
    for a in 0..3 {
        for b in 0..3 {
            oam[OamCategory::of(a, b) as usize] += t.oam_cell_total(a, b);
        }
    }
    let (mut ab, mut bb, mut at, mut bt) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for r in records {
        let s = r.settings;
        if CellCategory::of(s.gamma as usize, s.delta as usize) == CellCategory::Key {
            ab.push(r.alice_bit);
            bb.push(r.bob_bit);
        }
        if OamCategory::of(s.alice_oam as usize, s.bob_oam as usize) == OamCategory::Key {
            at.push(r.alice_trit);
            bt.push(r.bob_trit);
        }
    }
    let errors = |x: &[u8], y: &[u8]| x.iter().zip(y).filter(|(a, b)| a != b).count() as u64;
    let pol_key_errors = errors(&ab, &bb);
    let oam_key_errors = errors(&at, &bt);
    let n = t.rounds;
    SiftReport {
        rounds: n,
        pol_key_rounds: pol[0],
        pol_s_rounds: pol[1],
        pol_s_prime_rounds: pol[2],
        pol_discard_rounds: pol[3],
        pol_key_fraction: frac(pol[0], n),
        pol_s_fraction: frac(pol[1], n),
        pol_s_prime_fraction: frac(pol[2], n),
        pol_discard_fraction: frac(pol[3], n),
        oam_key_rounds: oam[0],
        oam_bell_rounds: oam[1],
        oam_redundant_rounds: oam[2],
        oam_key_fraction: frac(oam[0], n),
        oam_bell_fraction: frac(oam[1], n),
        oam_redundant_fraction: frac(oam[2], n),
        pol_key_errors,
        pol_qber: frac(pol_key_errors, ab.len() as u64),
        oam_key_errors,
        oam_symbol_error_rate: frac(oam_key_errors, at.len() as u64),
        pol_key_hex: hex::encode(pack_bits(&ab)),
        oam_key_hex: hex::encode(pack_trits(&at)),
        bob_pol_key_hex: hex::encode(pack_bits(&bb)),
        bob_oam_key_hex: hex::encode(pack_trits(&bt)),
        key_cells_with_equal_angles: angle_condition(|g, d| g - d),
        key_cells_with_sum_condition: angle_condition(|g, d| g + d),
    }
}

/// Resource accounting. Every round consumes three photons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub rounds: u64,
    pub photons: u64,
    pub sifted_pol_bits: u64,
    pub sifted_oam_trits: u64,
    pub photons_per_sifted_symbol: f64,
    pub photons_per_sifted_bit: f64,
    pub expected_photons_per_sifted_symbol: f64,
    pub expected_photons_per_sifted_bit: f64,
    pub ekert_photons_per_bit: f64,
    pub published_claim_photons_per_bit: f64,
    /// Whether the expected figure lies within 5% of the published claim.
    pub published_claim_reproduced: bool,
}

pub fn key_stats(sift: &SiftReport, rounds: u64) -> EfficiencyReport {
    let photons = 3 * rounds;
    let log3 = 3f64.log2();
    let bits = sift.pol_key_rounds;
    let trits = sift.oam_key_rounds;
    let per_symbol = photons as f64 / (bits + trits) as f64;
    let per_bit = photons as f64 / (bits as f64 + trits as f64 * log3);
    let expected_symbol = 3.0 / (1.0 / 4.0 + 1.0 / 9.0);
    let expected_bit = 3.0 / (1.0 / 4.0 + log3 / 9.0);
    EfficiencyReport {
        rounds,
        photons,
        sifted_pol_bits: bits,
        sifted_oam_trits: trits,
        photons_per_sifted_symbol: per_symbol,
        photons_per_sifted_bit: per_bit,
        expected_photons_per_sifted_symbol: expected_symbol,
        expected_photons_per_sifted_bit: expected_bit,
        ekert_photons_per_bit: EKERT_PHOTONS_PER_BIT,
        published_claim_photons_per_bit: PUBLISHED_PHOTONS_PER_BIT,
        published_claim_reproduced: (expected_bit - PUBLISHED_PHOTONS_PER_BIT).abs()
            / PUBLISHED_PHOTONS_PER_BIT
            < 0.05,
    }
}
