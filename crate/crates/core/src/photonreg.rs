//! Photon/degree-of-freedom layout of a composite register.
//!
//! Subsystems are ordered photon-major and, within a photon, polarization
//! before OAM. The first subsystem is the most significant digit of the
//! flat index.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Matrix, ProjectorSet, StateVector, UnitaryOp, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DofKind {
    Polarization,
    /// Even/odd grouping of OAM modes.
    OamParity,
    /// OAM restricted to `{0, +1, −1}`.
    OamQutrit,
}

impl DofKind {
    pub fn dim(self) -> usize {
        match self {
            DofKind::Polarization | DofKind::OamParity => 2,
            DofKind::OamQutrit => 3,
        }
    }

    pub fn labels(self) -> &'static [&'static str] {
        match self {
            DofKind::Polarization => &["H", "V"],
            DofKind::OamParity => &["E", "O"],
            DofKind::OamQutrit => &["0", "+1", "-1"],
        }
    }

    /// Physical degree of freedom; both OAM encodings share one slot.
    pub fn family(self) -> &'static str {
        match self {
            DofKind::Polarization => "polarization",
            DofKind::OamParity | DofKind::OamQutrit => "oam",
        }
    }

    fn order(self) -> u8 {
        match self {
            DofKind::Polarization => 0,
            DofKind::OamParity | DofKind::OamQutrit => 1,
        }
    }
}

impl fmt::Display for DofKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DofKind::Polarization => "polarization",
            DofKind::OamParity => "oam_parity",
            DofKind::OamQutrit => "oam_qutrit",
        };
        f.write_str(s)
    }
}

/// One subsystem: a degree of freedom carried by a photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DofSpec {
    pub photon: u8,
    pub kind: DofKind,
}

impl DofSpec {
    pub fn new(photon: u8, kind: DofKind) -> Self {
        Self { photon, kind }
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn labels(&self) -> &'static [&'static str] {
        self.kind.labels()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels().iter().position(|l| *l == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhotonRegister {
    subsystems: Vec<DofSpec>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total_dim: usize,
}

impl PhotonRegister {
    /// Canonicalizes the ordering and computes the layout.
    pub fn build(mut specs: Vec<DofSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::EmptyRegister);
        }
        specs.sort_by_key(|s| (s.photon, s.kind.order()));
        for w in specs.windows(2) {
            if w[0].photon == w[1].photon && w[0].kind.order() == w[1].kind.order() {
                return Err(Error::DuplicateSubsystem {
                    photon: w[1].photon,
                    dof: w[1].kind.family(),
                });
            }
        }
        let dims: Vec<usize> = specs.iter().map(DofSpec::dim).collect();
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let total_dim = dims.iter().product();
        Ok(Self {
            subsystems: specs,
            dims,
            strides,
            total_dim,
        })
    }

    pub fn subsystems(&self) -> &[DofSpec] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn find(&self, photon: u8, family: &str) -> Option<usize> {
        self.subsystems
            .iter()
            .position(|s| s.photon == photon && s.kind.family() == family)
    }

    /// Index of the photon's polarization subsystem.
    pub fn polarization(&self, photon: u8) -> Result<usize> {
        self.find(photon, "polarization").ok_or(Error::MissingDof {
            photon,
            dof: "polarization",
        })
    }

    /// Index of the photon's OAM subsystem (parity or qutrit).
    pub fn oam(&self, photon: u8) -> Result<usize> {
        self.find(photon, "oam")
            .ok_or(Error::MissingDof { photon, dof: "oam" })
    }

    pub fn index_of(&self, labels: &[&str]) -> Result<usize> {
        if labels.len() != self.len() {
            return Err(Error::LabelCount {
                expected: self.len(),
                actual: labels.len(),
            });
        }
        let mut idx = 0;
        for (i, (spec, label)) in self.subsystems.iter().zip(labels).enumerate() {
            let digit = spec.label_index(label).ok_or_else(|| Error::UnknownLabel {
                subsystem: i,
                label: label.to_string(),
            })?;
            idx = idx * spec.dim() + digit;
        }
        Ok(idx)
    }

    pub fn labels_of(&self, index: usize) -> Vec<&'static str> {
        assert!(index < self.total_dim, "index {index} out of range");
        self.digits(index)
            .into_iter()
            .zip(&self.subsystems)
            .map(|(d, s)| s.labels()[d])
            .collect()
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        self.dims
            .iter()
            .zip(&self.strides)
            .map(|(d, s)| (index / s) % d)
            .collect()
    }

    /// Lifts `op` acting on `targets` to the full space (identity elsewhere).
    ///
    /// Builds the matrix entry by entry, independently of
    /// [`crate::hilbert::apply`], so the two can be checked against each other.
    pub fn embed(&self, op: &UnitaryOp, targets: &[usize]) -> Result<UnitaryOp> {
        let mut op_dim = 1;
        for (k, &t) in targets.iter().enumerate() {
            if t >= self.len() {
                return Err(Error::TargetOutOfRange(t));
            }
            if targets[..k].contains(&t) {
                return Err(Error::DuplicateTarget);
            }
            op_dim *= self.dims[t];
        }
        if op_dim != op.dim() {
            return Err(Error::DimMismatch {
                expected: op_dim,
                actual: op.dim(),
            });
        }
        let n = self.total_dim;
        let mut m = Matrix::zeros(n);
        for r in 0..n {
            let rd = self.digits(r);
            for c in 0..n {
                let cd = self.digits(c);
                let spectators_agree = (0..self.len())
                    .filter(|i| !targets.contains(i))
                    .all(|i| rd[i] == cd[i]);
                if !spectators_agree {
                    continue;
                }
                let local =
                    |d: &[usize]| targets.iter().fold(0, |acc, &t| acc * self.dims[t] + d[t]);
                let v = op.matrix().get(local(&rd), local(&cd));
                if v != ZERO {
                    m.set(r, c, v);
                }
            }
        }
        Ok(UnitaryOp::from_trusted(m))
    }

    /// Embeds a projector set measured on `targets`.
    pub fn embed_projectors(&self, ps: &ProjectorSet, targets: &[usize]) -> Result<ProjectorSet> {
        let mut mats = Vec::with_capacity(ps.len());
        for p in ps.projectors() {
            // projectors are not unitary, but the lifting is the same linear map
            let lifted = self.embed(&UnitaryOp::from_trusted(p.clone()), targets)?;
            mats.push(lifted.matrix().clone());
        }
        Ok(ProjectorSet::from_trusted(mats, ps.labels().to_vec()))
    }

    /// `|labels⟩` as a state vector.
    pub fn basis_state(&self, labels: &[&str]) -> Result<StateVector> {
        Ok(StateVector::basis(self.total_dim, self.index_of(labels)?))
    }
}

/// Three photons, each with polarization and OAM parity (dim 64).
pub fn three_photon_parity_register() -> PhotonRegister {
    let specs = (1..=3)
        .flat_map(|p| {
            [
                DofSpec::new(p, DofKind::Polarization),
                DofSpec::new(p, DofKind::OamParity),
            ]
        })
        .collect();
    PhotonRegister::build(specs).expect("static layout")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{apply, EXACT_TOL};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single() -> PhotonRegister {
        PhotonRegister::build(vec![
            DofSpec::new(1, DofKind::OamParity),
            DofSpec::new(1, DofKind::Polarization),
        ])
        .unwrap()
    }

    fn random_unitary2(rng: &mut impl Rng) -> UnitaryOp {
        let (a, b, c, d): (f64, f64, f64, f64) =
            (rng.random(), rng.random(), rng.random(), rng.random());
        let (a, b, c, d) = (a * 6.3, b * 3.2, c * 6.3, d * 6.3);
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let (cs, sn) = ((b / 2.0).cos(), (b / 2.0).sin());
        let m = Matrix::from_rows(&[
            &[
                e(d) * e(-(a + c) / 2.0) * cs,
                -e(d) * e(-(a - c) / 2.0) * sn,
            ],
            &[e(d) * e((a - c) / 2.0) * sn, e(d) * e((a + c) / 2.0) * cs],
        ])
        .unwrap();
        UnitaryOp::new(m).unwrap()
    }

    #[test]
    fn build_examples() {
        assert_eq!(three_photon_parity_register().total_dim(), 64);
        let qkd = PhotonRegister::build(vec![
            DofSpec::new(3, DofKind::Polarization),
            DofSpec::new(1, DofKind::OamQutrit),
            DofSpec::new(2, DofKind::OamQutrit),
            DofSpec::new(2, DofKind::Polarization),
        ])
        .unwrap();
        assert_eq!(qkd.total_dim(), 36);
        assert_eq!(qkd.dims(), &[3, 2, 3, 2]);
        assert_eq!(single().total_dim(), 4);
        // canonical order puts polarization first
        assert_eq!(single().subsystems()[0].kind, DofKind::Polarization);
    }

    #[test]
    fn build_rejects_duplicates() {
        let err = PhotonRegister::build(vec![
            DofSpec::new(1, DofKind::OamParity),
            DofSpec::new(1, DofKind::OamQutrit),
        ]);
        assert!(matches!(
            err,
            Err(Error::DuplicateSubsystem { photon: 1, .. })
        ));
        assert_eq!(PhotonRegister::build(vec![]), Err(Error::EmptyRegister));
    }

    #[test]
    fn index_examples() {
        let r = single();
        assert_eq!(r.index_of(&["H", "E"]).unwrap(), 0);
        assert_eq!(r.index_of(&["V", "O"]).unwrap(), 3);
        assert!(matches!(
            r.index_of(&["X", "E"]),
            Err(Error::UnknownLabel { .. })
        ));
        assert!(matches!(r.index_of(&["H"]), Err(Error::LabelCount { .. })));
    }

    #[test]
    fn index_round_trip_is_a_bijection() {
        let r = three_photon_parity_register();
        let mut seen = [false; 64];
        for i in 0..64 {
            let labels = r.labels_of(i);
            let j = r.index_of(&labels).unwrap();
            assert_eq!(i, j);
            assert!(!seen[j]);
            seen[j] = true;
        }
    }

    #[test]
    fn embed_identity_and_bit_flip() {
        let r = three_photon_parity_register();
        let id = r.embed(&UnitaryOp::identity(2), &[2]).unwrap();
        assert!(id.approx_eq(&UnitaryOp::identity(64), EXACT_TOL));

        let x =
            UnitaryOp::new(Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap();
        let lifted = r.embed(&x, &[r.polarization(2).unwrap()]).unwrap();
        let input = r.basis_state(&["H", "E", "H", "E", "H", "E"]).unwrap();
        let want = r.basis_state(&["H", "E", "V", "E", "H", "E"]).unwrap();
        assert_eq!(lifted.act(&input).unwrap(), want);
    }

    #[test]
    fn embed_rejects_dim_mismatch() {
        let r = three_photon_parity_register();
        assert!(matches!(
            r.embed(&UnitaryOp::identity(4), &[0]),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn embed_matches_apply_for_inter_photon_cnot() {
        let r = three_photon_parity_register();
        let cnot = UnitaryOp::new(
            Matrix::from_real_rows(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0, 0.0],
            ])
            .unwrap(),
        )
        .unwrap();
        let targets = [r.polarization(2).unwrap(), r.polarization(3).unwrap()];
        let full = r.embed(&cnot, &targets).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let amps = (0..64)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let psi = StateVector::normalized(amps).unwrap();
            let a = full.act(&psi).unwrap();
            let b = apply(&cnot, &psi, &targets, &r).unwrap();
            assert!(a.max_abs_diff(&b) < EXACT_TOL);
        }
    }

    #[test]
    fn embed_is_a_homomorphism_and_disjoint_embeddings_commute() {
        let r = three_photon_parity_register();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_unitary2(&mut rng);
            let b = random_unitary2(&mut rng);
            let lhs = r.embed(&a.compose(&b), &[3]).unwrap();
            let rhs = r
                .embed(&a, &[3])
                .unwrap()
                .compose(&r.embed(&b, &[3]).unwrap());
            assert!(lhs.approx_eq(&rhs, EXACT_TOL));

            let ea = r.embed(&a, &[1]).unwrap();
            let eb = r.embed(&b, &[4]).unwrap();
            assert!(ea.compose(&eb).approx_eq(&eb.compose(&ea), EXACT_TOL));
        }
    }
}
