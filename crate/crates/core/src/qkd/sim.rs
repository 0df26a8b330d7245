use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    apply_eve, build_state, oam_bases, outcome_parts, outcome_table, EveModel, OamOffsets,
    Settings, OUTCOMES,
};
use crate::error::{Error, Result};

/// Rounds per RNG block. Block `b` draws from stream `b` of the seed, so
/// results do not depend on how blocks are spread over threads or shards.
pub const BLOCK_ROUNDS: u64 = 8192;

/// One simulated round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub settings: Settings,
    pub alice_bit: u8,
    pub bob_bit: u8,
    pub alice_trit: u8,
    pub bob_trit: u8,
}

/// Coincidence counts per channel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TallyTable {
    pub rounds: u64,
    /// `[γ][δ][Alice bit][Bob bit]`.
    pub pol: [[[[u64; 2]; 2]; 4]; 4],
    /// `[A][B][j][j′]`.
    pub oam: [[[[u64; 3]; 3]; 3]; 3],
}

impl TallyTable {
    pub fn record(&mut self, r: &RoundRecord) {
        let s = r.settings;
        self.rounds += 1;
        self.pol[s.gamma as usize][s.delta as usize][r.alice_bit as usize][r.bob_bit as usize] += 1;
        self.oam[s.alice_oam as usize][s.bob_oam as usize][r.alice_trit as usize]
            [r.bob_trit as usize] += 1;
    }

    pub fn merge(&mut self, other: &TallyTable) {
        self.rounds += other.rounds;
        for (a, b) in self
            .pol
            .iter_mut()
            .flatten()
            .flatten()
            .flatten()
            .zip(other.pol.iter().flatten().flatten().flatten())
        {
            *a += b;
        }
        for (a, b) in self
            .oam
            .iter_mut()
            .flatten()
            .flatten()
            .flatten()
            .zip(other.oam.iter().flatten().flatten().flatten())
        {
            *a += b;
        }
    }

    pub fn pol_cell_total(&self, g: usize, d: usize) -> u64 {
        self.pol[g][d].iter().flatten().sum()
    }

    pub fn oam_cell_total(&self, a: usize, b: usize) -> u64 {
        self.oam[a][b].iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub tallies: TallyTable,
    pub records: Vec<RoundRecord>,
}

/// Cumulative sampling tables for one Eve pipeline.
struct Sampler {
    branch_cdf: Vec<f64>,
    /// `[branch][settings]` cumulative outcome probabilities.
    outcome_cdf: Vec<Vec<[f64; OUTCOMES]>>,
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

fn pick(cdf: &[f64], u: f64) -> usize {
    let x = u * cdf[cdf.len() - 1];
    cdf.iter().position(|&c| c > x).unwrap_or(cdf.len() - 1)
}

impl Sampler {
    fn new(eve: EveModel, offsets: &OamOffsets) -> Self {
        let state = build_state();
        let bases = oam_bases(offsets);
        let pipeline = apply_eve(&state, eve, &bases);
        let probs: Vec<f64> = pipeline.branches.iter().map(|b| b.probability).collect();
        let outcome_cdf = pipeline
            .branches
            .iter()
            .map(|b| {
                outcome_table(&b.state, &state.register, &bases)
                    .into_iter()
                    .map(|row| cumulative(&row).try_into().expect("36 entries"))
                    .collect()
            })
            .collect();
        Self {
            branch_cdf: cumulative(&probs),
            outcome_cdf,
        }
    }

    fn block(&self, seed: u64, block: u64, rounds: u64) -> SimOutput {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let start = block * BLOCK_ROUNDS;
        let end = (start + BLOCK_ROUNDS).min(rounds);
        let mut tallies = TallyTable::default();
        let mut records = Vec::with_capacity((end - start) as usize);
        for round in start..end {
            let settings = Settings {
                gamma: rng.random_range(0..4),
                delta: rng.random_range(0..4),
                alice_oam: rng.random_range(0..3),
                bob_oam: rng.random_range(0..3),
            };
            let branch = pick(&self.branch_cdf, rng.random::<f64>());
            let o = pick(
                &self.outcome_cdf[branch][settings.index()],
                rng.random::<f64>(),
            );
            let (alice_bit, bob_bit, alice_trit, bob_trit) = outcome_parts(o);
            let r = RoundRecord {
                round,
                settings,
                alice_bit,
                bob_bit,
                alice_trit,
                bob_trit,
            };
            tallies.record(&r);
            records.push(r);
        }
        SimOutput { tallies, records }
    }
}

fn concat(parts: Vec<SimOutput>) -> SimOutput {
    let mut tallies = TallyTable::default();
    let mut records = Vec::with_capacity(parts.iter().map(|p| p.records.len()).sum());
    for p in parts {
        tallies.merge(&p.tallies);
        records.extend(p.records);
    }
    SimOutput { tallies, records }
}

/// Simulates `rounds` protocol rounds, parallel over RNG blocks.
pub fn simulate(rounds: u64, seed: u64, eve: EveModel, offsets: &OamOffsets) -> Result<SimOutput> {
    if rounds == 0 {
        return Err(Error::NoRounds);
    }
    let sampler = Sampler::new(eve, offsets);
    let blocks = rounds.div_ceil(BLOCK_ROUNDS);
    let parts: Vec<SimOutput> = (0..blocks)
        .into_par_iter()
        .map(|b| sampler.block(seed, b, rounds))
        .collect();
    Ok(concat(parts))
}

/// Same result as [`simulate`], computed as `shards` contiguous runs of
/// blocks, each processed serially and merged at the end.
pub fn simulate_sharded(
    rounds: u64,
    seed: u64,
    eve: EveModel,
    offsets: &OamOffsets,
    shards: usize,
) -> Result<SimOutput> {
    if rounds == 0 {
        return Err(Error::NoRounds);
    }
    let sampler = Sampler::new(eve, offsets);
    let blocks = rounds.div_ceil(BLOCK_ROUNDS);
    let shards = (shards.max(1) as u64).min(blocks);
    let per = blocks.div_ceil(shards);
    let parts: Vec<SimOutput> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let range = (s * per)..((s + 1) * per).min(blocks);
            concat(range.map(|b| sampler.block(seed, b, rounds)).collect())
        })
        .collect();
    Ok(concat(parts))
}
