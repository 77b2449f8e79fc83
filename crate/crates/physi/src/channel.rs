//! Two-receiver MIMO channel pairs: construction, seeded random generation,
//! and a plain-text file format that round-trips `f64` values exactly.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Complex matrix type used throughout the library.
pub type CMatrix = DMatrix<Complex64>;

/// Channel matrices of the two downlink receivers.
///
/// `h1` is the authorized receiver's channel (`nb x nt`), `h2` the other
/// receiver's (`ne x nt`). For the confidential service receiver 2 acts as
/// the eavesdropper; for the multicast service both are legitimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub h1: CMatrix,
    pub h2: CMatrix,
    pub nt: usize,
    pub nb: usize,
    pub ne: usize,
}

impl ChannelPair {
    /// Builds a pair from the two channel matrices, checking shapes and finiteness.
    pub fn new(h1: CMatrix, h2: CMatrix) -> Result<Self> {
        if h1.ncols() != h2.ncols() {
            return Err(Error::DimensionMismatch {
                context: "ChannelPair::new",
                expected: format!("h1 and h2 with equal column counts"),
                actual: format!("h1 is {}x{}, h2 is {}x{}", h1.nrows(), h1.ncols(), h2.nrows(), h2.ncols()),
            });
        }
        if h1.nrows() == 0 || h2.nrows() == 0 || h1.ncols() == 0 {
            return Err(Error::InvalidInput(
                "channel matrices must have at least one row and one column".into(),
            ));
        }
        for m in [&h1, &h2] {
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidInput("channel entries must be finite".into()));
            }
        }
        let (nb, nt) = (h1.nrows(), h1.ncols());
        let ne = h2.nrows();
        Ok(Self { h1, h2, nt, nb, ne })
    }

    /// Stacks the two channels vertically into one `(nb+ne) x nt` matrix.
    pub fn stacked(&self) -> CMatrix {
        let mut k = CMatrix::zeros(self.nb + self.ne, self.nt);
        k.view_mut((0, 0), (self.nb, self.nt)).copy_from(&self.h1);
        k.view_mut((self.nb, 0), (self.ne, self.nt)).copy_from(&self.h2);
        k
    }
}

/// One standard-normal pair via Box-Muller.
///
/// Each uniform draw maps a `u64` to the open interval (0,1) as
/// `(x >> 11 + 0.5) * 2^-53`, so the logarithm below never sees zero.
fn standard_normal_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    let scale = (-53f64).exp2();
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) * scale;
    let u2 = ((rng.next_u64() >> 11) as f64 + 0.5) * scale;
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Generates an i.i.d. complex Gaussian channel pair with unit-variance entries.
///
/// The stream is ChaCha12 keyed from `seed` (the `rand_core` 64-bit seeding
/// convention), consumed two `u64`s per complex entry: Box-Muller turns them
/// into a normal pair `(x, y)` and the entry is `(x + iy)/sqrt(2)`. Entries
/// fill `h1` row-major first, then `h2`, so identical seeds reproduce channels
/// bit for bit on any platform.
pub fn generate_channels(nt: usize, nb: usize, ne: usize, seed: u64) -> Result<ChannelPair> {
    if nt == 0 || nb == 0 || ne == 0 {
        return Err(Error::InvalidInput("antenna counts must be positive".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut fill = |rows: usize, cols: usize| {
        let mut m = CMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let (x, y) = standard_normal_pair(&mut rng);
                m[(r, c)] = Complex64::new(x * inv_sqrt2, y * inv_sqrt2);
            }
        }
        m
    };
    let h1 = fill(nb, nt);
    let h2 = fill(ne, nt);
    ChannelPair::new(h1, h2)
}

/// Serializes a pair in the plain-text channel format.
///
/// Line 1 is the header `nt nb ne`; then `nb` lines for `h1` and `ne` lines
/// for `h2`, each row written as whitespace-separated `re im` pairs using
/// shortest round-trip formatting, so parsing recovers every bit.
pub fn channels_to_text(pair: &ChannelPair) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", pair.nt, pair.nb, pair.ne);
    for m in [&pair.h1, &pair.h2] {
        for r in 0..m.nrows() {
            let mut first = true;
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                if !first {
                    s.push(' ');
                }
                let _ = write!(s, "{} {}", z.re, z.im);
                first = false;
            }
            s.push('\n');
        }
    }
    s
}

/// Parses the plain-text channel format produced by [`channels_to_text`].
pub fn channels_from_text(text: &str) -> Result<ChannelPair> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (line_no, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        detail: "empty channel file".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no + 1,
                detail: format!("bad header token {t:?}, expected `nt nb ne`"),
            })
        })
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::Parse {
            line: line_no + 1,
            detail: format!("header has {} fields, expected 3 (`nt nb ne`)", dims.len()),
        });
    }
    let (nt, nb, ne) = (dims[0], dims[1], dims[2]);
    if nt == 0 || nb == 0 || ne == 0 {
        return Err(Error::Parse {
            line: line_no + 1,
            detail: "antenna counts must be positive".into(),
        });
    }

    let mut read_matrix = |rows: usize| -> Result<CMatrix> {
        let mut m = CMatrix::zeros(rows, nt);
        for r in 0..rows {
            let (line_no, line) = lines.next().ok_or(Error::Parse {
                line: 0,
                detail: format!("file ends before matrix row {} of {}", r + 1, rows),
            })?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        line: line_no + 1,
                        detail: format!("bad number {t:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != 2 * nt {
                return Err(Error::Parse {
                    line: line_no + 1,
                    detail: format!("row has {} values, expected {} (re im pairs)", vals.len(), 2 * nt),
                });
            }
            for c in 0..nt {
                m[(r, c)] = Complex64::new(vals[2 * c], vals[2 * c + 1]);
            }
        }
        Ok(m)
    };

    let h1 = read_matrix(nb)?;
    let h2 = read_matrix(ne)?;
    if let Some((line_no, _)) = lines.next() {
        return Err(Error::Parse {
            line: line_no + 1,
            detail: "trailing content after both matrices".into(),
        });
    }
    ChannelPair::new(h1, h2)
}

/// Writes a pair to disk in the plain-text channel format.
pub fn write_channels(pair: &ChannelPair, path: &Path) -> Result<()> {
    std::fs::write(path, channels_to_text(pair)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Reads a pair from a plain-text channel file.
pub fn read_channels(path: &Path) -> Result<ChannelPair> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    channels_from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = generate_channels(3, 4, 3, 42).unwrap();
        let b = generate_channels(3, 4, 3, 42).unwrap();
        for (x, y) in a.h1.iter().zip(b.h1.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        for (x, y) in a.h2.iter().zip(b.h2.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        let c = generate_channels(3, 4, 3, 43).unwrap();
        assert_ne!(a.h1, c.h1);
    }

    #[test]
    fn entries_have_unit_variance_and_zero_mean() {
        // 100k entries: sample mean within 0.02 of zero, variance within 0.02 of one.
        let pair = generate_channels(100, 500, 500, 7).unwrap();
        let n = (pair.nb + pair.ne) * pair.nt;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut var = 0.0;
        for z in pair.h1.iter().chain(pair.h2.iter()) {
            mean += z;
            var += z.norm_sqr();
        }
        mean /= n as f64;
        var /= n as f64;
        assert!(mean.norm() < 0.02, "mean magnitude {}", mean.norm());
        assert!((var - 1.0).abs() < 0.02, "variance {}", var);
    }

    #[test]
    fn text_round_trip_is_bitwise_exact() {
        let pair = generate_channels(3, 4, 3, 9).unwrap();
        let text = channels_to_text(&pair);
        let back = channels_from_text(&text).unwrap();
        assert_eq!(pair, back);
        // A second serialization is byte-identical.
        assert_eq!(text, channels_to_text(&back));
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(matches!(channels_from_text(""), Err(Error::Parse { .. })));
        assert!(matches!(channels_from_text("2 2"), Err(Error::Parse { .. })));
        assert!(matches!(
            channels_from_text("1 1 1\n0.0 0.0\n0.0 nope"),
            Err(Error::Parse { .. })
        ));
        // Wrong pair count in a row.
        assert!(matches!(
            channels_from_text("2 1 1\n0 0\n0 0 0 0"),
            Err(Error::Parse { .. })
        ));
        // Truncated second matrix.
        assert!(matches!(
            channels_from_text("1 1 2\n0 0\n0 0"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn stacked_places_h1_above_h2() {
        let pair = generate_channels(2, 2, 3, 1).unwrap();
        let k = pair.stacked();
        assert_eq!(k.nrows(), 5);
        assert_eq!(k.view((0, 0), (2, 2)), pair.h1.view((0, 0), (2, 2)));
        assert_eq!(k.view((2, 0), (3, 2)), pair.h2.view((0, 0), (3, 2)));
    }

    #[test]
    fn mismatched_columns_are_rejected() {
        let h1 = CMatrix::zeros(2, 3);
        let h2 = CMatrix::zeros(2, 2);
        assert!(matches!(
            ChannelPair::new(h1, h2),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
