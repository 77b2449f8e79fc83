//! Generalized singular value decomposition of a channel pair, subchannel
//! classification, and the feasibility screen for carrying both services.
//!
//! For a pair (H1, H2) the factorization produces a common precoder basis A
//! and unitary receiver bases so that `H1 A = psi_r C` and `H2 A = psi_e D`
//! with rectangular-diagonal C and D satisfying `C^T C + D^T D = I`. Each of
//! the `q = min(nt, nb + ne)` columns of A is a parallel subchannel seen by
//! receiver 1 with squared gain `c_sq[i]` and by receiver 2 with `d_sq[i]`.
//!
//! The route taken is the CS decomposition of the thin QR of the stacked
//! channel: eigenvectors of the Gram matrix of the upper QR block give the
//! squared gains and the common right basis, and the two receiver bases come
//! from normalizing the corresponding image columns, completing each to a
//! full unitary matrix.

use nalgebra::{Cholesky, DVector};
use num_complex::Complex64;

use crate::channel::{CMatrix, ChannelPair};
use crate::error::{Error, Result};

/// Relative threshold on singular values for the stacked-rank check.
const RANK_REL_TOL: f64 = 1e-12;

/// Squared gains at or below this are treated as structural zeros when
/// assigning receiver-basis columns; everything larger gets a basis slot.
const ASSIGN_TOL: f64 = 1e-14;

/// Default classification tolerance for deciding private vs common subchannels.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Ties between the two receivers' squared gains within this margin count as
/// "not better", so such subchannels are never claimed for the confidential
/// service.
pub const GAIN_TIE_TOL: f64 = 1e-12;

/// True when a subchannel is strictly better toward receiver 1, i.e. it can
/// carry a positive secrecy rate.
pub fn secrecy_capable(c_sq: f64, d_sq: f64) -> bool {
    c_sq > d_sq + GAIN_TIE_TOL
}

/// Factorization of a channel pair into parallel subchannels.
#[derive(Debug, Clone)]
pub struct GsvdFactors {
    /// Unitary receiver-1 basis, `nb x nb`.
    pub psi_r: CMatrix,
    /// Unitary receiver-2 basis, `ne x ne`.
    pub psi_e: CMatrix,
    /// Subchannel gains toward receiver 1, ascending where nonzero.
    pub c_diag: Vec<f64>,
    /// Subchannel gains toward receiver 2, descending where nonzero.
    pub d_diag: Vec<f64>,
    /// Common precoder basis, `nt x q`; columns are the subchannel directions.
    pub a: CMatrix,
    /// Number of subchannels, `min(nt, nb + ne)`.
    pub q: usize,
    /// Squared gains `c_diag[i]^2`, kept explicitly for rate formulas.
    pub c_sq: Vec<f64>,
    /// Squared gains `d_diag[i]^2 = 1 - c_sq[i]`.
    pub d_sq: Vec<f64>,
    /// Squared Euclidean norms of A's columns; power on subchannel i costs
    /// `a_col_norm_sq[i]` per unit of symbol power.
    pub a_col_norm_sq: Vec<f64>,
    pub nt: usize,
    pub nb: usize,
    pub ne: usize,
    /// Row of `psi_r` carrying subchannel i, when its gain is nonzero.
    c_slot: Vec<Option<usize>>,
    /// Row of `psi_e` carrying subchannel i, when its gain is nonzero.
    d_slot: Vec<Option<usize>>,
}

impl GsvdFactors {
    /// The rectangular-diagonal factor C (`nb x q`) with `psi_r C = H1 A`.
    pub fn c_matrix(&self) -> CMatrix {
        let mut c = CMatrix::zeros(self.nb, self.q);
        for i in 0..self.q {
            if let Some(row) = self.c_slot[i] {
                c[(row, i)] = Complex64::new(self.c_diag[i], 0.0);
            }
        }
        c
    }

    /// The rectangular-diagonal factor D (`ne x q`) with `psi_e D = H2 A`.
    pub fn d_matrix(&self) -> CMatrix {
        let mut d = CMatrix::zeros(self.ne, self.q);
        for i in 0..self.q {
            if let Some(row) = self.d_slot[i] {
                d[(row, i)] = Complex64::new(self.d_diag[i], 0.0);
            }
        }
        d
    }

    /// Builds the factors of an abstract parallel-subchannel model directly
    /// from squared gains and column costs, without reference to concrete
    /// channel matrices. Receiver bases are identity and the precoder is
    /// diagonal; useful for what-if analysis and synthetic solver inputs.
    pub fn from_gains(c_sq: Vec<f64>, a_col_norm_sq: Vec<f64>) -> Result<Self> {
        let q = c_sq.len();
        if q == 0 {
            return Err(Error::InvalidInput("at least one subchannel gain required".into()));
        }
        if a_col_norm_sq.len() != q {
            return Err(Error::DimensionMismatch {
                context: "GsvdFactors::from_gains",
                expected: format!("{q} column costs"),
                actual: format!("{}", a_col_norm_sq.len()),
            });
        }
        if c_sq.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidInput("squared gains must lie in [0, 1]".into()));
        }
        if a_col_norm_sq.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("column costs must be positive and finite".into()));
        }
        let d_sq: Vec<f64> = c_sq.iter().map(|&c| 1.0 - c).collect();
        let c_diag: Vec<f64> = c_sq.iter().map(|&c| c.sqrt()).collect();
        let d_diag: Vec<f64> = d_sq.iter().map(|&d| d.sqrt()).collect();
        let mut a = CMatrix::zeros(q, q);
        for i in 0..q {
            a[(i, i)] = Complex64::new(a_col_norm_sq[i].sqrt(), 0.0);
        }
        let c_slot = assign_slots(&c_sq, q);
        let d_slot = assign_slots(&d_sq, q);
        Ok(Self {
            psi_r: CMatrix::identity(q, q),
            psi_e: CMatrix::identity(q, q),
            c_diag,
            d_diag,
            a,
            q,
            c_sq,
            d_sq,
            a_col_norm_sq,
            nt: q,
            nb: q,
            ne: q,
            c_slot,
            d_slot,
        })
    }

    /// Relative Frobenius residuals of the two factorization identities.
    pub fn reconstruction_residuals(&self, pair: &ChannelPair) -> (f64, f64) {
        let r1 = (&pair.h1 * &self.a - &self.psi_r * self.c_matrix()).norm() / pair.h1.norm().max(1e-300);
        let r2 = (&pair.h2 * &self.a - &self.psi_e * self.d_matrix()).norm() / pair.h2.norm().max(1e-300);
        (r1, r2)
    }

    /// Largest absolute entry of `psi^H psi - I` over both receiver bases.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for psi in [&self.psi_r, &self.psi_e] {
            let n = psi.nrows();
            let g = psi.adjoint() * psi - CMatrix::identity(n, n);
            worst = worst.max(g.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        worst
    }

    /// Largest deviation of `c_sq[i] + d_sq[i]` from one.
    pub fn gain_sum_defect(&self) -> f64 {
        self.c_sq
            .iter()
            .zip(&self.d_sq)
            .map(|(c, d)| (c + d - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Assigns basis rows to subchannels with nonzero gain, in subchannel order.
fn assign_slots(gain_sq: &[f64], max_slots: usize) -> Vec<Option<usize>> {
    let mut next = 0usize;
    gain_sq
        .iter()
        .map(|&g| {
            if g > ASSIGN_TOL && next < max_slots {
                let s = next;
                next += 1;
                Some(s)
            } else {
                None
            }
        })
        .collect()
}

/// Makes the largest-magnitude entry of each chosen source column real and
/// nonnegative by rotating the corresponding column of every factor in sync.
fn fix_column_phase(v: &mut CMatrix, n: &mut CMatrix, m: &mut CMatrix, col: usize, use_n: bool) {
    let src = if use_n { n.column(col) } else { m.column(col) };
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (k, z) in src.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag {
            best_mag = mag;
            best = k;
        }
    }
    if best_mag < 1e-300 {
        return;
    }
    let z = if use_n { n[(best, col)] } else { m[(best, col)] };
    let rot = (z / best_mag).conj();
    for mat in [v, n, m] {
        let mut c = mat.column_mut(col);
        c *= rot;
    }
}

/// Extends a set of orthonormal columns to a full unitary basis. Candidates
/// are identity vectors; each round picks the one with the largest residual
/// after projection, which is always bounded away from zero.
fn complete_unitary(dim: usize, mut cols: Vec<DVector<Complex64>>) -> CMatrix {
    while cols.len() < dim {
        let mut best: Option<(f64, DVector<Complex64>)> = None;
        for k in 0..dim {
            let mut v = DVector::<Complex64>::zeros(dim);
            v[k] = Complex64::new(1.0, 0.0);
            // Two projection passes keep the residual orthogonal even when the
            // candidate is nearly inside the current span.
            for _ in 0..2 {
                for u in &cols {
                    let coeff = u.dotc(&v);
                    v -= u * coeff;
                }
            }
            let norm = v.norm();
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("dim > 0");
        cols.push(v / Complex64::new(norm, 0.0));
    }
    // One modified Gram-Schmidt sweep over the assembled basis squeezes the
    // orthonormality defect down to rounding level.
    let mut out = CMatrix::zeros(dim, dim);
    for j in 0..cols.len() {
        let mut v = cols[j].clone();
        for i in 0..j {
            let u = out.column(i);
            let coeff = u.dotc(&v);
            v -= DVector::from(u) * coeff;
        }
        let norm = v.norm();
        out.set_column(j, &(v / Complex64::new(norm.max(1e-300), 0.0)));
    }
    out
}

/// Factors a channel pair into parallel subchannels.
///
/// Returns [`Error::RankDeficient`] when the stacked matrix `[H1; H2]` has
/// numerical rank below `min(nt, nb + ne)`; the factorization is ill-posed
/// for such pairs.
pub fn gsvd(pair: &ChannelPair) -> Result<GsvdFactors> {
    let (nt, nb, ne) = (pair.nt, pair.nb, pair.ne);
    let q = nt.min(nb + ne);
    let k = pair.stacked();

    let sv = k.singular_values();
    let smax = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    let rank = sv.iter().filter(|&&s| s > smax * RANK_REL_TOL).count();
    if smax <= 0.0 || rank < q {
        return Err(Error::RankDeficient { rank, required: q });
    }

    let qr = k.qr();
    let qmat = qr.q();
    let rmat = qr.r();
    let q1 = qmat.rows(0, nb).into_owned();
    let q2 = qmat.rows(nb, ne).into_owned();

    // Hermitian Gram matrix of the upper block; its eigenvalues are the
    // squared receiver-1 gains and its eigenvectors the common right basis.
    let g1 = {
        let g = q1.adjoint() * &q1;
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    };
    let eig = g1.symmetric_eigen();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).expect("finite eigenvalues"));
    let c_sq: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].clamp(0.0, 1.0)).collect();
    let mut v = eig.eigenvectors.select_columns(order.iter());

    let d_sq: Vec<f64> = c_sq.iter().map(|&c| 1.0 - c).collect();
    let c_diag: Vec<f64> = c_sq.iter().map(|&c| c.sqrt()).collect();
    let d_diag: Vec<f64> = d_sq.iter().map(|&d| d.sqrt()).collect();

    let c_slot = assign_slots(&c_sq, nb);
    let d_slot = assign_slots(&d_sq, ne);

    let mut n_mat = &q1 * &v;
    let mut m_mat = &q2 * &v;
    for i in 0..q {
        // Pin the phase against whichever receiver actually sees the column.
        let use_n = c_slot[i].is_some();
        fix_column_phase(&mut v, &mut n_mat, &mut m_mat, i, use_n);
    }

    let collect_basis = |mat: &CMatrix, slots: &[Option<usize>]| -> Vec<DVector<Complex64>> {
        let mut cols = Vec::new();
        for i in 0..q {
            if slots[i].is_some() {
                let col = mat.column(i).into_owned();
                let norm = col.norm();
                cols.push(col / Complex64::new(norm.max(1e-300), 0.0));
            }
        }
        cols
    };
    let psi_r = complete_unitary(nb, collect_basis(&n_mat, &c_slot));
    let psi_e = complete_unitary(ne, collect_basis(&m_mat, &d_slot));

    // Recover the precoder from R A = V: direct back-substitution when R is
    // square, otherwise the minimum-norm solution through R R^H.
    let a = if q == nt {
        rmat.solve_upper_triangular(&v).ok_or(Error::NumericalFailure {
            context: "gsvd",
            detail: "triangular solve for the precoder failed despite the rank check".into(),
        })?
    } else {
        let rrh = {
            let g = &rmat * rmat.adjoint();
            (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
        };
        let chol = Cholesky::new(rrh).ok_or(Error::NumericalFailure {
            context: "gsvd",
            detail: "R R^H not positive definite despite the rank check".into(),
        })?;
        rmat.adjoint() * chol.solve(&v)
    };
    let a_col_norm_sq: Vec<f64> = (0..q).map(|i| a.column(i).norm_squared()).collect();

    Ok(GsvdFactors {
        psi_r,
        psi_e,
        c_diag,
        d_diag,
        a,
        q,
        c_sq,
        d_sq,
        a_col_norm_sq,
        nt,
        nb,
        ne,
        c_slot,
        d_slot,
    })
}

/// Index partition of the subchannels by which receivers see them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubchannelPartition {
    /// Common subchannels, visible to both receivers.
    pub cc: Vec<usize>,
    /// Private to receiver 1 (invisible to receiver 2).
    pub pc1: Vec<usize>,
    /// Private to receiver 2 (invisible to receiver 1).
    pub pc2: Vec<usize>,
}

/// Splits subchannels into common and private sets by thresholding the
/// squared gains: `c_sq <= tol` is private to receiver 2, `c_sq >= 1 - tol`
/// private to receiver 1, everything else common.
pub fn classify_subchannels(f: &GsvdFactors, tol: f64) -> Result<SubchannelPartition> {
    if !(tol > 0.0 && tol < 0.5) {
        return Err(Error::InvalidInput(format!(
            "classification tolerance must lie in (0, 0.5), got {tol}"
        )));
    }
    let mut part = SubchannelPartition {
        cc: Vec::new(),
        pc1: Vec::new(),
        pc2: Vec::new(),
    };
    for i in 0..f.q {
        if f.c_sq[i] <= tol {
            part.pc2.push(i);
        } else if f.c_sq[i] >= 1.0 - tol {
            part.pc1.push(i);
        } else {
            part.cc.push(i);
        }
    }
    Ok(part)
}

/// Whether the factored pair can carry each service at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityReport {
    /// No common subchannel exists, so no signal reaches both receivers.
    pub multicast_infeasible: bool,
    /// No subchannel favors receiver 1, so no positive secrecy rate exists.
    pub confidential_infeasible: bool,
    /// Both services can be carried.
    pub phy_si_feasible: bool,
}

/// Screens the factorization for service feasibility.
pub fn check_feasibility(f: &GsvdFactors, part: &SubchannelPartition) -> FeasibilityReport {
    let multicast_infeasible = part.cc.is_empty();
    let confidential_infeasible = !(0..f.q).any(|i| secrecy_capable(f.c_sq[i], f.d_sq[i]));
    FeasibilityReport {
        multicast_infeasible,
        confidential_infeasible,
        phy_si_feasible: !multicast_infeasible && !confidential_infeasible,
    }
}

/// Antenna-count regimes that determine the generic subchannel partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemClass {
    /// `nt < nb` and `ne <= nt`.
    C1,
    /// `nt >= nb` and `ne > nt`.
    C2,
    /// `nt <= nb` and `ne >= nt`.
    C3,
    /// `nb < nt`, `ne < nt`, `nb + ne > nt`.
    C4,
    /// `nb + ne <= nt`: no common subchannels exist.
    C5,
}

impl std::fmt::Display for SystemClass {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SystemClass::C1 => "C1",
            SystemClass::C2 => "C2",
            SystemClass::C3 => "C3",
            SystemClass::C4 => "C4",
            SystemClass::C5 => "C5",
        };
        write!(fm, "{s}")
    }
}

/// All antenna-regime labels matching the given counts (regimes overlap on
/// their boundaries, e.g. `ne == nt <= nb` is both C1 and C3).
pub fn matching_classes(nt: usize, nb: usize, ne: usize) -> Vec<SystemClass> {
    let mut out = Vec::new();
    if nt < nb && ne <= nt {
        out.push(SystemClass::C1);
    }
    if nt >= nb && ne > nt {
        out.push(SystemClass::C2);
    }
    if nt <= nb && ne >= nt {
        out.push(SystemClass::C3);
    }
    if nb < nt && ne < nt && nb + ne > nt {
        out.push(SystemClass::C4);
    }
    if nb + ne <= nt {
        out.push(SystemClass::C5);
    }
    out
}

/// Generic partition sizes `(#common, #private-1, #private-2)` implied by the
/// antenna counts alone.
pub fn expected_partition_counts(nt: usize, nb: usize, ne: usize) -> (usize, usize, usize) {
    let q = nt.min(nb + ne);
    let pc1 = q.saturating_sub(ne);
    let pc2 = q.saturating_sub(nb);
    (q - pc1 - pc2, pc1, pc2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channels;

    /// Plain triple-loop multiply, independent of the linear-algebra backend.
    fn naive_mul(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(a.nrows(), b.ncols());
        for i in 0..a.nrows() {
            for j in 0..b.ncols() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..a.ncols() {
                    acc += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    fn check_invariants(pair: &ChannelPair, f: &GsvdFactors) {
        // Factorization identities, checked with an independent multiply.
        let lhs1 = naive_mul(&pair.h1, &f.a);
        let rhs1 = naive_mul(&f.psi_r, &f.c_matrix());
        let res1 = (lhs1 - rhs1).norm() / pair.h1.norm();
        assert!(res1 <= 1e-8, "receiver-1 residual {res1}");
        let lhs2 = naive_mul(&pair.h2, &f.a);
        let rhs2 = naive_mul(&f.psi_e, &f.d_matrix());
        let res2 = (lhs2 - rhs2).norm() / pair.h2.norm();
        assert!(res2 <= 1e-8, "receiver-2 residual {res2}");

        assert!(f.unitarity_defect() <= 1e-10, "unitarity defect {}", f.unitarity_defect());
        assert!(f.gain_sum_defect() <= 1e-10);

        // Nonzero gains of the first factor ascend, of the second descend.
        let cs: Vec<f64> = f.c_diag.iter().copied().filter(|&c| c > 0.0).collect();
        assert!(cs.windows(2).all(|w| w[0] <= w[1]));
        let ds: Vec<f64> = f.d_diag.iter().copied().filter(|&d| d > 0.0).collect();
        assert!(ds.windows(2).all(|w| w[0] >= w[1]));

        assert_eq!(f.q, f.nt.min(f.nb + f.ne));
        for &a2 in &f.a_col_norm_sq {
            assert!(a2 > 0.0);
        }
    }

    #[test]
    fn identity_channels_split_evenly() {
        let h = CMatrix::identity(2, 2);
        let pair = ChannelPair::new(h.clone(), h).unwrap();
        let f = gsvd(&pair).unwrap();
        assert_eq!(f.q, 2);
        for i in 0..2 {
            assert!((f.c_sq[i] - 0.5).abs() < 1e-12);
            assert!((f.d_sq[i] - 0.5).abs() < 1e-12);
        }
        check_invariants(&pair, &f);
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(part.cc, vec![0, 1]);
    }

    #[test]
    fn random_pairs_satisfy_invariants() {
        for (nt, nb, ne) in [(3, 4, 3), (4, 2, 3), (4, 2, 2), (3, 2, 4), (2, 2, 2)] {
            for seed in 0..5 {
                let pair = generate_channels(nt, nb, ne, seed).unwrap();
                let f = gsvd(&pair).unwrap();
                check_invariants(&pair, &f);
            }
        }
    }

    #[test]
    fn tall_thin_pair_has_full_subchannel_count() {
        let pair = generate_channels(4, 2, 3, 11).unwrap();
        let f = gsvd(&pair).unwrap();
        assert_eq!(f.q, 4);
        check_invariants(&pair, &f);
    }

    #[test]
    fn zero_channels_are_rank_deficient() {
        let pair = ChannelPair::new(CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(gsvd(&pair), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn factorization_is_deterministic() {
        let pair = generate_channels(3, 4, 3, 5).unwrap();
        let f1 = gsvd(&pair).unwrap();
        let f2 = gsvd(&pair).unwrap();
        assert_eq!(f1.a, f2.a);
        assert_eq!(f1.psi_r, f2.psi_r);
        assert_eq!(f1.psi_e, f2.psi_e);
        for i in 0..f1.q {
            assert_eq!(f1.c_sq[i].to_bits(), f2.c_sq[i].to_bits());
        }
    }

    #[test]
    fn partition_sizes_match_antenna_regimes() {
        for (nt, nb, ne) in [(3, 4, 2), (3, 2, 4), (3, 4, 3), (4, 2, 3), (4, 2, 2)] {
            let expected = expected_partition_counts(nt, nb, ne);
            for seed in 100..105 {
                let pair = generate_channels(nt, nb, ne, seed).unwrap();
                let f = gsvd(&pair).unwrap();
                let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
                assert_eq!(
                    (part.cc.len(), part.pc1.len(), part.pc2.len()),
                    expected,
                    "dims ({nt},{nb},{ne}) seed {seed}"
                );
            }
        }
    }

    #[test]
    fn classification_examples() {
        // nt=3, nb=4, ne=3: every subchannel is common.
        let f = gsvd(&generate_channels(3, 4, 3, 0).unwrap()).unwrap();
        let p = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!((p.cc.len(), p.pc1.len(), p.pc2.len()), (3, 0, 0));

        // nt=4, nb=2, ne=3: one common, one private each way plus one more.
        let f = gsvd(&generate_channels(4, 2, 3, 0).unwrap()).unwrap();
        let p = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!((p.cc.len(), p.pc1.len(), p.pc2.len()), (1, 1, 2));

        // nt=4, nb=2, ne=2: private subchannels only.
        let f = gsvd(&generate_channels(4, 2, 2, 0).unwrap()).unwrap();
        let p = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!((p.cc.len(), p.pc1.len(), p.pc2.len()), (0, 2, 2));
    }

    #[test]
    fn classify_rejects_bad_tolerance() {
        let f = GsvdFactors::from_gains(vec![0.5], vec![1.0]).unwrap();
        assert!(classify_subchannels(&f, 0.0).is_err());
        assert!(classify_subchannels(&f, 0.5).is_err());
    }

    #[test]
    fn no_common_subchannels_blocks_multicast() {
        let pair = generate_channels(4, 2, 2, 3).unwrap();
        let f = gsvd(&pair).unwrap();
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        let rep = check_feasibility(&f, &part);
        assert!(rep.multicast_infeasible);
        assert!(!rep.phy_si_feasible);
    }

    #[test]
    fn uniformly_weaker_receiver_one_blocks_secrecy() {
        // h1 = 0.1 h2 puts every squared gain at 0.01/1.01 < 1/2.
        let h2 = generate_channels(2, 2, 2, 8).unwrap().h2;
        let h1 = &h2 * Complex64::new(0.1, 0.0);
        let pair = ChannelPair::new(h1, h2).unwrap();
        let f = gsvd(&pair).unwrap();
        for &c in &f.c_sq {
            assert!((c - 0.01 / 1.01).abs() < 1e-10);
        }
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        let rep = check_feasibility(&f, &part);
        assert!(rep.confidential_infeasible);
        assert!(!rep.multicast_infeasible);
        assert!(!rep.phy_si_feasible);
    }

    #[test]
    fn identical_channels_block_secrecy() {
        let h = generate_channels(3, 3, 3, 2).unwrap().h1;
        let pair = ChannelPair::new(h.clone(), h).unwrap();
        let f = gsvd(&pair).unwrap();
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        assert!(check_feasibility(&f, &part).confidential_infeasible);
    }

    #[test]
    fn synthetic_gains_round_trip() {
        let f = GsvdFactors::from_gains(vec![0.0, 0.3, 0.9, 1.0], vec![1.0, 2.0, 0.5, 1.5]).unwrap();
        assert_eq!(f.q, 4);
        assert!((f.d_sq[1] - 0.7).abs() < 1e-15);
        let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
        assert_eq!(part.pc2, vec![0]);
        assert_eq!(part.cc, vec![1, 2]);
        assert_eq!(part.pc1, vec![3]);
        assert!(GsvdFactors::from_gains(vec![1.5], vec![1.0]).is_err());
        assert!(GsvdFactors::from_gains(vec![0.5], vec![0.0]).is_err());
    }

    #[test]
    fn class_labels_cover_the_dims_used_in_tests() {
        assert_eq!(matching_classes(3, 4, 2), vec![SystemClass::C1]);
        assert_eq!(matching_classes(3, 2, 4), vec![SystemClass::C2]);
        assert_eq!(matching_classes(3, 4, 3), vec![SystemClass::C1, SystemClass::C3]);
        assert_eq!(matching_classes(4, 2, 3), vec![SystemClass::C4]);
        assert_eq!(matching_classes(4, 2, 2), vec![SystemClass::C5]);
    }
}
