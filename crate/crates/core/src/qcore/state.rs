//! Kets and density matrices over labeled qubit registers.
//!
//! Basis index convention: the first label is the most significant bit, so
//! for labels `[A1, B1]` the index of `|a b>` is `2a + b`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::{hermitian_eigensystem, Eigensystem};
use super::matrix::{ComplexMatrix, TOL};
use super::{QError, Result};

/// Ordered qubit labels; position 0 is the most significant bit.
pub type Labels = Vec<String>;

pub fn labels(names: &[&str]) -> Labels {
    names.iter().map(|s| s.to_string()).collect()
}

fn check_labels(labels: &[String], dim: usize) -> Result<()> {
    if labels.len() >= usize::BITS as usize || 1usize << labels.len() != dim {
        return Err(QError::LabelCount {
            labels: labels.len(),
            dim,
        });
    }
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(QError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// Basis-index permutation induced by moving qubits from `from` order to `to` order.
/// Entry `i` is the new index of old basis index `i`.
fn index_permutation(from: &[String], to: &[String]) -> Result<Vec<usize>> {
    if from.len() != to.len() {
        return Err(QError::LabelMismatch(format!("{from:?} vs {to:?}")));
    }
    let nq = from.len();
    // source[p] = old position of the qubit that lands at new position p
    let mut source = Vec::with_capacity(nq);
    for l in to {
        let q = from
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| QError::LabelMismatch(format!("{l} not in {from:?}")))?;
        if source.contains(&q) {
            return Err(QError::DuplicateLabel(l.clone()));
        }
        source.push(q);
    }
    let dim = 1usize << nq;
    Ok((0..dim)
        .map(|old| {
            let mut new = 0;
            for (p, &q) in source.iter().enumerate() {
                let bit = (old >> (nq - 1 - q)) & 1;
                new |= bit << (nq - 1 - p);
            }
            new
        })
        .collect())
}

/// Rewrites an operator given on qubit order `from` into qubit order `to`.
pub fn reorder_operator(
    m: &ComplexMatrix,
    from: &[String],
    to: &[String],
) -> Result<ComplexMatrix> {
    check_labels(from, m.dim())?;
    let perm = index_permutation(from, to)?;
    m.permute_basis(&perm)
}

/// Unit vector over labeled qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
    labels: Labels,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>, labels: Labels) -> Result<Self> {
        check_labels(&labels, amplitudes.len())?;
        let norm2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > TOL.normalization {
            return Err(QError::NotNormalized(norm2));
        }
        Ok(Self { amplitudes, labels })
    }

    /// Scales `amplitudes` to unit norm before validating.
    pub fn normalized(amplitudes: Vec<Complex64>, labels: Labels) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QError::NotNormalized(norm * norm));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect(), labels)
    }

    /// Computational basis state; `bits[k]` belongs to `labels[k]`.
    pub fn basis(bits: &[u8], labels: Labels) -> Result<Self> {
        let dim = 1usize << bits.len();
        let index = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | (b as usize & 1));
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(amps, labels)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        check_labels(&labels, amps.len())?;
        Ok(Ket {
            amplitudes: amps,
            labels,
        })
    }

    pub fn reorder(&self, new_order: &[String]) -> Result<Ket> {
        let perm = index_permutation(&self.labels, new_order)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (old, &new) in perm.iter().enumerate() {
            amps[new] = self.amplitudes[old];
        }
        Ok(Ket {
            amplitudes: amps,
            labels: new_order.to_vec(),
        })
    }

    /// Same amplitudes under new names.
    pub fn relabeled(&self, new_labels: Labels) -> Result<Ket> {
        check_labels(&new_labels, self.dim())?;
        Ok(Ket {
            amplitudes: self.amplitudes.clone(),
            labels: new_labels,
        })
    }

    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn approx_eq(&self, other: &Ket, tol: f64) -> bool {
        self.labels == other.labels
            && self.dim() == other.dim()
            && self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = ComplexMatrix::outer(&self.amplitudes, &self.amplitudes).expect("same length");
        DensityMatrix {
            matrix: m,
            labels: self.labels.clone(),
        }
    }
}

/// Trace-one positive semidefinite operator over labeled qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    labels: Labels,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix, labels: Labels) -> Result<Self> {
        check_labels(&labels, matrix.dim())?;
        let defect = matrix.hermiticity_defect();
        if defect > TOL.hermiticity {
            return Err(QError::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL.normalization || tr.im.abs() > TOL.normalization {
            return Err(QError::BadTrace(tr.re));
        }
        let min = hermitian_eigensystem(&matrix)?.min_value();
        if min < -TOL.psd_slack {
            return Err(QError::NotPositive(min));
        }
        Ok(Self { matrix, labels })
    }

    pub fn maximally_mixed(labels: Labels) -> Result<Self> {
        let dim = 1usize << labels.len();
        check_labels(&labels, dim)?;
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
            labels,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn eigensystem(&self) -> Result<Eigensystem> {
        hermitian_eigensystem(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).expect("square").re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let matrix = self.matrix.kron(&other.matrix)?;
        check_labels(&labels, matrix.dim())?;
        Ok(Self { matrix, labels })
    }

    pub fn reorder(&self, new_order: &[String]) -> Result<DensityMatrix> {
        let perm = index_permutation(&self.labels, new_order)?;
        Ok(Self {
            matrix: self.matrix.permute_basis(&perm)?,
            labels: new_order.to_vec(),
        })
    }

    pub fn relabeled(&self, new_labels: Labels) -> Result<DensityMatrix> {
        check_labels(&new_labels, self.dim())?;
        Ok(Self {
            matrix: self.matrix.clone(),
            labels: new_labels,
        })
    }

    /// Traces out every qubit not in `keep`. Kept qubits retain their original relative order.
    pub fn partial_trace(&self, keep: &[String]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(QError::EmptyKeepSet);
        }
        for l in keep {
            if !self.labels.contains(l) {
                return Err(QError::LabelMismatch(format!(
                    "{l} not in {:?}",
                    self.labels
                )));
            }
        }
        let kept: Labels = self
            .labels
            .iter()
            .filter(|l| keep.contains(l))
            .cloned()
            .collect();
        let traced: Labels = self
            .labels
            .iter()
            .filter(|l| !keep.contains(l))
            .cloned()
            .collect();
        // move kept qubits to the high bits, then sum over the low block
        let mut order = kept.clone();
        order.extend(traced.iter().cloned());
        let moved = self.reorder(&order)?;
        let dk = 1usize << kept.len();
        let dt = 1usize << traced.len();
        let mut out = ComplexMatrix::zeros(dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..dt {
                    acc += moved.matrix[(i * dt + t, j * dt + t)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(Self {
            matrix: out,
            labels: kept,
        })
    }

    /// Conjugates by a unitary: `U rho U^H`.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<DensityMatrix> {
        let m = unitary.matmul(&self.matrix)?.matmul(&unitary.dagger())?;
        Ok(Self {
            matrix: m,
            labels: self.labels.clone(),
        })
    }

    /// `p * self + (1 - p) * other`, same registers required.
    pub fn mix(&self, other: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
        if self.labels != other.labels {
            return Err(QError::LabelMismatch(format!(
                "{:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(QError::ParameterOutOfRange(format!("mixing weight {p}")));
        }
        Ok(Self {
            matrix: &self.matrix.scale(p) + &other.matrix.scale(1.0 - p),
            labels: self.labels.clone(),
        })
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.labels == other.labels && self.matrix.approx_eq(&other.matrix, tol)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            matrix: ComplexMatrix,
            labels: Labels,
        }
        let raw = Raw::deserialize(d)?;
        DensityMatrix::new(raw.matrix, raw.labels).map_err(serde::de::Error::custom)
    }
}

/// Either kind of state, for operations that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Ket(Ket),
    Density(DensityMatrix),
}

/// Tensor product of two operands of the same kind; left labels come first.
pub fn tensor(a: &Operand, b: &Operand) -> Result<Operand> {
    match (a, b) {
        (Operand::Ket(x), Operand::Ket(y)) => Ok(Operand::Ket(x.tensor(y)?)),
        (Operand::Density(x), Operand::Density(y)) => Ok(Operand::Density(x.tensor(y)?)),
        _ => Err(QError::MixedOperands),
    }
}

pub fn reorder_registers(x: &Operand, new_order: &[String]) -> Result<Operand> {
    match x {
        Operand::Ket(k) => Ok(Operand::Ket(k.reorder(new_order)?)),
        Operand::Density(d) => Ok(Operand::Density(d.reorder(new_order)?)),
    }
}

pub fn partial_trace(rho: &DensityMatrix, keep: &[String]) -> Result<DensityMatrix> {
    rho.partial_trace(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::states::{counterexample_state, singlet};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_tensor() {
        let a = DensityMatrix::maximally_mixed(labels(&["A"])).unwrap();
        let b = DensityMatrix::maximally_mixed(labels(&["B"])).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert!(ab
            .matrix()
            .approx_eq(&ComplexMatrix::identity(4).scale(0.25), 0.0));
        assert_eq!(ab.labels(), &labels(&["A", "B"])[..]);
    }

    #[test]
    fn basis_tensor() {
        let zero = Ket::basis(&[0], labels(&["A"])).unwrap();
        let one = Ket::basis(&[1], labels(&["B"])).unwrap();
        let k = zero.tensor(&one).unwrap();
        assert_eq!(k.amplitudes(), &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn mixed_operands_are_rejected() {
        let k = Operand::Ket(Ket::basis(&[0], labels(&["A"])).unwrap());
        let d = Operand::Density(DensityMatrix::maximally_mixed(labels(&["B"])).unwrap());
        assert!(matches!(tensor(&k, &d), Err(QError::MixedOperands)));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let a = Ket::basis(&[0], labels(&["A"])).unwrap();
        assert!(matches!(a.tensor(&a), Err(QError::DuplicateLabel(_))));
    }

    #[test]
    fn reorder_swaps_two_qubits() {
        let k = Ket::basis(&[0, 1], labels(&["A1", "B1"])).unwrap();
        let same = k.reorder(&labels(&["A1", "B1"])).unwrap();
        assert_eq!(same, k);
        let swapped = k.reorder(&labels(&["B1", "A1"])).unwrap();
        assert_eq!(
            swapped.amplitudes(),
            Ket::basis(&[1, 0], labels(&["B1", "A1"]))
                .unwrap()
                .amplitudes()
        );
    }

    #[test]
    fn reorder_round_trip_is_exact() {
        let psi = counterexample_state();
        let lab = labels(&["A1", "A2", "B1", "B2"]);
        let back = psi.reorder(&lab).unwrap().reorder(psi.labels()).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn reorder_rejects_unknown_label() {
        let k = Ket::basis(&[0, 1], labels(&["A1", "B1"])).unwrap();
        assert!(matches!(
            k.reorder(&labels(&["A1", "C"])),
            Err(QError::LabelMismatch(_))
        ));
        assert!(k.reorder(&labels(&["A1"])).is_err());
    }

    #[test]
    fn singlet_pair_is_the_counterexample() {
        let sa = singlet(labels(&["A1", "A2"]));
        let sb = singlet(labels(&["B1", "B2"]));
        let lab_major = sa.tensor(&sb).unwrap();
        let copy_major = lab_major
            .reorder(&labels(&["A1", "B1", "A2", "B2"]))
            .unwrap();
        assert!(copy_major.approx_eq(&counterexample_state(), 1e-15));
    }

    #[test]
    fn counterexample_marginal_is_maximally_mixed() {
        let rho = counterexample_state().to_density();
        let mm = DensityMatrix::maximally_mixed(labels(&["A1", "B1"])).unwrap();
        let r1 = rho.partial_trace(&labels(&["A1", "B1"])).unwrap();
        assert!(r1.approx_eq(&mm, 1e-12));
        let r2 = rho.partial_trace(&labels(&["A2", "B2"])).unwrap();
        assert!(r2.matrix().approx_eq(mm.matrix(), 1e-12));
    }

    #[test]
    fn product_marginal_recovers_factor() {
        let rho0 = crate::qcore::states::werner(0.7, labels(&["A1", "B1"])).unwrap();
        let rho1 = rho0.relabeled(labels(&["A2", "B2"])).unwrap();
        let pair = rho0.tensor(&rho1).unwrap();
        assert!(pair
            .partial_trace(&labels(&["A1", "B1"]))
            .unwrap()
            .approx_eq(&rho0, 1e-15));
    }

    #[test]
    fn singlet_marginal() {
        let s = singlet(labels(&["A", "B"])).to_density();
        let m = s.partial_trace(&labels(&["B"])).unwrap();
        assert!(m
            .matrix()
            .approx_eq(&ComplexMatrix::identity(2).scale(0.5), 1e-15));
    }

    #[test]
    fn empty_keep_set() {
        let s = singlet(labels(&["A", "B"])).to_density();
        assert!(matches!(s.partial_trace(&[]), Err(QError::EmptyKeepSet)));
    }

    #[test]
    fn density_validation() {
        let lab = labels(&["A"]);
        let not_unit = ComplexMatrix::identity(2);
        assert!(matches!(
            DensityMatrix::new(not_unit, lab.clone()),
            Err(QError::BadTrace(_))
        ));
        let negative = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(negative, lab.clone()),
            Err(QError::NotPositive(_))
        ));
        let skew = ComplexMatrix::from_real_rows(&[&[0.5, 0.2], &[0.0, 0.5]]).unwrap();
        assert!(matches!(
            DensityMatrix::new(skew, lab),
            Err(QError::NotHermitian(_))
        ));
    }
}
