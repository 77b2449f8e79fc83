//! Achievable-rate formulas in both coordinate systems.
//!
//! The subchannel route evaluates closed-form sums over the factorization's
//! squared gains; the covariance route evaluates log-determinants of the raw
//! channels with explicit transmit covariances. The two agree whenever the
//! covariances are built from the factorization's precoder columns, which
//! makes the covariance route an independent check on everything downstream
//! of the factorization. All rates are in bits (base-2 logs).

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::allocation::MessageAllocation;
use crate::channel::{CMatrix, ChannelPair};
use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;

/// Summary values below this magnitude are reported as exactly zero.
pub const RATE_CLEAN_TOL: f64 = 1e-12;

/// Snaps numerical dust to zero for reports; solver internals keep raw values.
pub fn clean_rate(x: f64) -> f64 {
    if x.abs() < RATE_CLEAN_TOL {
        0.0
    } else {
        x
    }
}

fn check_powers(context: &'static str, expected: usize, p: &[f64]) -> Result<()> {
    if p.len() != expected {
        return Err(Error::DimensionMismatch {
            context,
            expected: format!("{expected} power entries"),
            actual: format!("{}", p.len()),
        });
    }
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "{context}: powers must be finite and nonnegative"
        )));
    }
    Ok(())
}

fn check_alloc(f: &GsvdFactors, alloc: &MessageAllocation) -> Result<()> {
    if alloc.q != f.q {
        return Err(Error::DimensionMismatch {
            context: "rates",
            expected: format!("allocation over {} subchannels", f.q),
            actual: format!("{}", alloc.q),
        });
    }
    Ok(())
}

/// Secrecy rate of the confidential message: what receiver 1 gains over
/// receiver 2 on the confidential subchannels. `pc` is ordered like
/// `alloc.gammac`.
pub fn secrecy_rate(f: &GsvdFactors, alloc: &MessageAllocation, pc: &[f64]) -> Result<f64> {
    check_alloc(f, alloc)?;
    check_powers("secrecy_rate", alloc.gammac.len(), pc)?;
    let mut r = 0.0;
    for (n, &i) in alloc.gammac.iter().enumerate() {
        r += (1.0 + pc[n] * f.c_sq[i]).log2() - (1.0 + pc[n] * f.d_sq[i]).log2();
    }
    Ok(r)
}

/// Multicast rates seen by the two receivers on the multicast subchannels.
/// `p0` is ordered like `alloc.gamma0`.
pub fn multicast_rates(f: &GsvdFactors, alloc: &MessageAllocation, p0: &[f64]) -> Result<(f64, f64)> {
    check_alloc(f, alloc)?;
    check_powers("multicast_rates", alloc.gamma0.len(), p0)?;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for (m, &i) in alloc.gamma0.iter().enumerate() {
        r1 += (1.0 + p0[m] * f.c_sq[i]).log2();
        r2 += (1.0 + p0[m] * f.d_sq[i]).log2();
    }
    Ok((r1, r2))
}

/// Transmit power spent by an allocation: symbol powers weighted by the
/// squared norms of the precoder columns they ride on.
pub fn total_power(f: &GsvdFactors, alloc: &MessageAllocation, p0: &[f64], pc: &[f64]) -> Result<f64> {
    check_alloc(f, alloc)?;
    check_powers("total_power", alloc.gamma0.len(), p0)?;
    check_powers("total_power", alloc.gammac.len(), pc)?;
    let mut w = 0.0;
    for (m, &i) in alloc.gamma0.iter().enumerate() {
        w += f.a_col_norm_sq[i] * p0[m];
    }
    for (n, &i) in alloc.gammac.iter().enumerate() {
        w += f.a_col_norm_sq[i] * pc[n];
    }
    Ok(w)
}

/// Transmit covariances implied by per-subchannel symbol powers: each used
/// precoder column contributes a rank-one term scaled by its power.
pub fn gsvd_covariances(
    f: &GsvdFactors,
    alloc: &MessageAllocation,
    p0: &[f64],
    pc: &[f64],
) -> Result<(CMatrix, CMatrix)> {
    check_alloc(f, alloc)?;
    check_powers("gsvd_covariances", alloc.gamma0.len(), p0)?;
    check_powers("gsvd_covariances", alloc.gammac.len(), pc)?;
    let build = |idx: &[usize], p: &[f64]| {
        let mut q = CMatrix::zeros(f.nt, f.nt);
        for (j, &i) in idx.iter().enumerate() {
            let col = f.a.column(i).into_owned();
            q += (&col * col.adjoint()) * Complex64::new(p[j], 0.0);
        }
        q
    };
    Ok((build(&alloc.gamma0, p0), build(&alloc.gammac, pc)))
}

/// Rates computed from raw channels and explicit covariances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceRates {
    /// Multicast rate at receiver 1, confidential signal treated as noise.
    pub r0_1: f64,
    /// Multicast rate at receiver 2, confidential signal treated as noise.
    pub r0_2: f64,
    /// Achievable common multicast rate, `min(r0_1, r0_2)`.
    pub r0: f64,
    /// Secrecy rate of the confidential signal.
    pub rc: f64,
}

/// Evaluates both services' rates for transmit covariances `q0` (multicast)
/// and `qc` (confidential). Rejects inputs that are not positive
/// semidefinite within a scale-aware tolerance.
pub fn covariance_rates(pair: &ChannelPair, q0: &CMatrix, qc: &CMatrix) -> Result<CovarianceRates> {
    for (name, q) in [("q0", q0), ("qc", qc)] {
        check_psd(name, pair.nt, q)?;
    }
    let sum = q0 + qc;
    let r1c = log2_det_i_plus_hqh(&pair.h1, qc)?;
    let r2c = log2_det_i_plus_hqh(&pair.h2, qc)?;
    let r1s = log2_det_i_plus_hqh(&pair.h1, &sum)?;
    let r2s = log2_det_i_plus_hqh(&pair.h2, &sum)?;
    let r0_1 = r1s - r1c;
    let r0_2 = r2s - r2c;
    Ok(CovarianceRates {
        r0_1,
        r0_2,
        r0: r0_1.min(r0_2),
        rc: r1c - r2c,
    })
}

fn check_psd(name: &str, nt: usize, q: &CMatrix) -> Result<()> {
    if q.nrows() != nt || q.ncols() != nt {
        return Err(Error::DimensionMismatch {
            context: "covariance_rates",
            expected: format!("{nt}x{nt} covariance {name}"),
            actual: format!("{}x{}", q.nrows(), q.ncols()),
        });
    }
    if q.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("covariance {name} has non-finite entries")));
    }
    let herm = (q + q.adjoint()) * Complex64::new(0.5, 0.0);
    let trace: f64 = (0..nt).map(|i| herm[(i, i)].re).sum();
    let eigs = herm.symmetric_eigen().eigenvalues;
    let min_eig = eigs.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    // Scale-aware slack: rounding on a covariance of trace T legitimately
    // produces eigenvalues around -eps * T.
    let tol = 1e-10 * (trace / nt as f64).max(0.0);
    if min_eig < -tol {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_eig });
    }
    Ok(())
}

/// `log2 det(I + H Q H^H)` via Cholesky of the Hermitian part.
fn log2_det_i_plus_hqh(h: &CMatrix, q: &CMatrix) -> Result<f64> {
    let m = h * q * h.adjoint();
    let n = m.nrows();
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0) + CMatrix::identity(n, n);
    match Cholesky::new(herm.clone()) {
        Some(ch) => {
            let l = ch.l();
            Ok(2.0 * (0..n).map(|i| l[(i, i)].re.log2()).sum::<f64>())
        }
        None => {
            // PSD input can still trip Cholesky right at the rounding edge;
            // fall back to eigenvalues clamped at zero.
            let eigs = herm.symmetric_eigen().eigenvalues;
            if eigs.iter().any(|&e| e <= 0.0) {
                return Err(Error::NumericalFailure {
                    context: "covariance_rates",
                    detail: "I + H Q H^H is numerically singular".into(),
                });
            }
            Ok(eigs.iter().map(|&e| e.log2()).sum())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{enumerate_schemes, MessageAllocation};
    use crate::channel::generate_channels;
    use crate::gsvd::{classify_subchannels, gsvd, GsvdFactors, DEFAULT_CLASSIFY_TOL};
    use rand_chacha::ChaCha12Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha12Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (-53f64).exp2()
    }

    #[test]
    fn single_confidential_subchannel_rate() {
        let f = GsvdFactors::from_gains(vec![0.9], vec![1.0]).unwrap();
        let alloc = MessageAllocation::new(1, vec![], vec![0], vec![]).unwrap();
        let r = secrecy_rate(&f, &alloc, &[10.0]).unwrap();
        // log2(1 + 9) - log2(1 + 1) = log2(5).
        assert!((r - 5.0f64.log2()).abs() < 1e-12);
        assert!((r - 2.321928094887362).abs() < 1e-12);
    }

    #[test]
    fn balanced_common_subchannel_multicast() {
        let f = GsvdFactors::from_gains(vec![0.5], vec![1.0]).unwrap();
        let alloc = MessageAllocation::new(1, vec![0], vec![], vec![]).unwrap();
        let (r1, r2) = multicast_rates(&f, &alloc, &[2.0]).unwrap();
        assert!((r1 - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_accounting_uses_column_costs() {
        let f = GsvdFactors::from_gains(vec![0.5, 0.6, 0.7], vec![1.0, 1.0, 1.0]).unwrap();
        let alloc = MessageAllocation::new(3, vec![0, 1], vec![2], vec![]).unwrap();
        assert!((total_power(&f, &alloc, &[1.0, 2.0], &[3.0]).unwrap() - 6.0).abs() < 1e-12);

        let f2 = GsvdFactors::from_gains(vec![0.5, 0.6, 0.7], vec![2.0, 0.5, 4.0]).unwrap();
        let w = total_power(&f2, &alloc, &[1.0, 2.0], &[3.0]).unwrap();
        assert!((w - (2.0 + 1.0 + 12.0)).abs() < 1e-12);
    }

    #[test]
    fn mismatched_power_lengths_are_rejected() {
        let f = GsvdFactors::from_gains(vec![0.5, 0.6], vec![1.0, 1.0]).unwrap();
        let alloc = MessageAllocation::new(2, vec![0], vec![1], vec![]).unwrap();
        assert!(secrecy_rate(&f, &alloc, &[1.0, 2.0]).is_err());
        assert!(multicast_rates(&f, &alloc, &[]).is_err());
        assert!(total_power(&f, &alloc, &[1.0], &[-1.0]).is_err());
    }

    #[test]
    fn zero_covariances_give_zero_rates() {
        let pair = generate_channels(3, 4, 3, 1).unwrap();
        let z = CMatrix::zeros(3, 3);
        let r = covariance_rates(&pair, &z, &z).unwrap();
        assert_eq!(r.r0, 0.0);
        assert_eq!(r.rc, 0.0);
    }

    #[test]
    fn negative_definite_covariance_is_rejected() {
        let pair = generate_channels(2, 2, 2, 1).unwrap();
        let mut bad = CMatrix::zeros(2, 2);
        bad[(0, 0)] = Complex64::new(-1.0, 0.0);
        bad[(1, 1)] = Complex64::new(1.0, 0.0);
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(
            covariance_rates(&pair, &bad, &z),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn subchannel_and_covariance_routes_agree() {
        // Random channels, random scheme, random powers: both routes must
        // produce the same secrecy and per-receiver multicast rates.
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for seed in 0..12 {
            let dims = [(3, 4, 3), (4, 2, 3), (2, 2, 2), (3, 2, 4)][seed % 4];
            let pair = generate_channels(dims.0, dims.1, dims.2, 1000 + seed as u64).unwrap();
            let f = gsvd(&pair).unwrap();
            let part = classify_subchannels(&f, DEFAULT_CLASSIFY_TOL).unwrap();
            let set = enumerate_schemes(&f, &part).unwrap();
            let alloc = &set.schemes[rng.next_u64() as usize % set.len()];
            let p0: Vec<f64> = alloc.gamma0.iter().map(|_| 30.0 * uniform(&mut rng)).collect();
            let pc: Vec<f64> = alloc.gammac.iter().map(|_| 30.0 * uniform(&mut rng)).collect();

            let rs = secrecy_rate(&f, alloc, &pc).unwrap();
            let (r1, r2) = multicast_rates(&f, alloc, &p0).unwrap();
            let (q0, qc) = gsvd_covariances(&f, alloc, &p0, &pc).unwrap();
            let cov = covariance_rates(&pair, &q0, &qc).unwrap();
            assert!((rs - cov.rc).abs() <= 1e-8, "secrecy mismatch {} vs {}", rs, cov.rc);
            assert!((r1 - cov.r0_1).abs() <= 1e-8, "multicast-1 mismatch {} vs {}", r1, cov.r0_1);
            assert!((r2 - cov.r0_2).abs() <= 1e-8, "multicast-2 mismatch {} vs {}", r2, cov.r0_2);
            assert!((r1.min(r2) - cov.r0).abs() <= 1e-8);
        }
    }

    #[test]
    fn rates_grow_with_power_where_expected() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..50 {
            let c = 0.5 + 0.5 * uniform(&mut rng);
            let d = 1.0 - c;
            let f = GsvdFactors::from_gains(vec![c], vec![1.0]).unwrap();
            let alloc = MessageAllocation::new(1, vec![], vec![0], vec![]).unwrap();
            let p = 50.0 * uniform(&mut rng);
            let dp = 1e-4;
            if c > d {
                let lo = secrecy_rate(&f, &alloc, &[p]).unwrap();
                let hi = secrecy_rate(&f, &alloc, &[p + dp]).unwrap();
                assert!(hi >= lo, "secrecy rate must grow when receiver 1 is favored");
            }
            let alloc0 = MessageAllocation::new(1, vec![0], vec![], vec![]).unwrap();
            let (a1, a2) = multicast_rates(&f, &alloc0, &[p]).unwrap();
            let (b1, b2) = multicast_rates(&f, &alloc0, &[p + dp]).unwrap();
            assert!(b1 >= a1 && b2 >= a2);
        }
    }

    #[test]
    fn clean_rate_snaps_dust() {
        assert_eq!(clean_rate(4.2e-13), 0.0);
        assert_eq!(clean_rate(-8.0e-13), 0.0);
        assert_eq!(clean_rate(2.0e-12), 2.0e-12);
    }
}
