//! The three explicit supports in `C³`, `C⁴` and `C⁵` with their exact
//! moment-system solutions.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{validate_pair, OrthoPair};
use crate::error::{Error, Result};
use crate::linalg::{c, frob_norm, orthonormal_basis, CMat};
use crate::moment::{support_certificate, CertificateConfig, SupportCertificate, SVD_RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Appendix {
    A3,
    B4,
    C5,
}

impl Appendix {
    pub const ALL: [Appendix; 3] = [Appendix::A3, Appendix::B4, Appendix::C5];

    /// Ambient dimension `n`.
    pub fn n(self) -> usize {
        match self {
            Appendix::A3 => 3,
            Appendix::B4 => 4,
            Appendix::C5 => 5,
        }
    }

    /// `dim V`.
    pub fn r(self) -> usize {
        match self {
            Appendix::A3 | Appendix::B4 => 2,
            Appendix::C5 => 3,
        }
    }
}

impl fmt::Display for Appendix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Appendix::A3 => "a3",
            Appendix::B4 => "b4",
            Appendix::C5 => "c5",
        })
    }
}

impl FromStr for Appendix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a3" => Ok(Appendix::A3),
            "b4" => Ok(Appendix::B4),
            "c5" => Ok(Appendix::C5),
            other => Err(Error::InvalidConfig(format!(
                "unknown fixture {other:?} (expected a3, b4 or c5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixFixture {
    pub which: Appendix,
    /// `n x n`, column `i` is `v^i ∈ V`.
    pub columns: CMat,
    /// `n x 1` generator of `W`.
    pub w: CMat,
    pub expected_x: Vec<BigRational>,
    pub pair: OrthoPair,
}

impl AppendixFixture {
    pub fn expected_x_f64(&self) -> Vec<f64> {
        self.expected_x
            .iter()
            .map(|q| q.to_f64().expect("finite rational"))
            .collect()
    }

    /// `Σ expected_x` in exact arithmetic.
    pub fn expected_sum(&self) -> BigRational {
        self.expected_x
            .iter()
            .fold(BigRational::zero(), |acc, q| acc + q)
    }

    pub fn certificate(&self, cfg: &CertificateConfig) -> SupportCertificate {
        support_certificate(&self.columns, &self.w, cfg).expect("fixture shapes are square")
    }
}

fn rational(s: &str) -> BigRational {
    let (num, den) = s.split_once('/').expect("fraction literal");
    BigRational::new(
        num.parse::<BigInt>().expect("numerator"),
        den.parse::<BigInt>().expect("denominator"),
    )
}

fn q(num: f64, den: f64) -> f64 {
    num / den
}

fn from_columns(n: usize, cols: &[[(f64, f64); 5]]) -> CMat {
    CMat::from_fn(n, cols.len(), |i, j| c(cols[j][i].0, cols[j][i].1))
}

fn fixture_a3() -> (CMat, CMat, [&'static str; 5]) {
    let d1 = 157449642458577f64.sqrt();
    let d2 = 175782050184862f64.sqrt();
    let d3 = 28.0 * 4664715f64.sqrt();
    let e3 = (3.0 / 1554905.0f64).sqrt();
    let f3 = (55.0 / 84813.0f64).sqrt();
    let zero = (0.0, 0.0);
    let cols = [
        [
            (1886514.0 / d1, -7511450.0 / d1),
            zero,
            (-4236005.0 / d1, 8917684.0 / d1),
            zero,
            zero,
        ],
        [
            (-6034458.0 / d2, -5957865.0 / d2),
            (10006368.0 / d2, 1934893.0 / d2),
            zero,
            zero,
            zero,
        ],
        [
            (-30683.0 / d3, -33081.0 / d3),
            (q(1537.0, 4.0) * e3, q(479.0, 4.0) * e3),
            (q(61.0, 7.0) * f3, q(157.0, 14.0) * f3),
            zero,
            zero,
        ],
    ];
    let s15 = 15f64.sqrt();
    let s35 = (3.0 / 5.0f64).sqrt();
    let w = CMat::from_column_slice(
        3,
        1,
        &[
            c(5.0 / (2.0 * s15), -1.0 / (2.0 * s15)),
            c(0.5 * s35, -0.5 * s35),
            c(2.0 / s15, 0.0),
        ],
    );
    (
        from_columns(3, &cols),
        w,
        ["115667/303810", "85199/222794", "395794/1670955", "", ""],
    )
}

fn fixture_b4() -> (CMat, CMat, [&'static str; 5]) {
    let d1 = 212114f64.sqrt();
    let e1 = (2.0 / 106057.0f64).sqrt();
    let d2 = 1918749f64.sqrt();
    let d3 = 29729f64.sqrt();
    let d4 = 1909509f64.sqrt();
    let zero = (0.0, 0.0);
    let cols = [
        [
            (-q(698.0, 3.0) / d1, -75.0 / d1),
            (q(1036.0, 3.0) / d1, 51.0 / d1),
            (q(77.0, 3.0) * e1, -q(218.0, 3.0) * e1),
            (-q(113.0, 3.0) * e1, q(49.0, 3.0) * e1),
            zero,
        ],
        [
            (-530.0 / d2, q(655.0, 2.0) / d2),
            (760.0 / d2, -q(173.0, 2.0) / d2),
            (q(219.0, 2.0) / d2, -782.0 / d2),
            (q(263.0, 2.0) / d2, 552.0 / d2),
            zero,
        ],
        [
            (-75.0 / d3, -q(45.0, 4.0) / d3),
            (54.0 / d3, -q(365.0, 4.0) / d3),
            (-18.0 / d3, q(243.0, 4.0) / d3),
            (-q(169.0, 2.0) / d3, -q(159.0, 4.0) / d3),
            zero,
        ],
        [
            (-q(1345.0, 2.0) / d4, -283.0 / d4),
            (q(563.0, 2.0) / d4, 239.0 / d4),
            (738.0 / d4, q(263.0, 2.0) / d4),
            (-782.0 / d4, q(519.0, 2.0) / d4),
            zero,
        ],
    ];
    let h = 0.5 / 2f64.sqrt();
    let w = CMat::from_column_slice(4, 1, &[c(h, -h), c(h, -h), c(h, h), c(h, h)]);
    (
        from_columns(4, &cols),
        w,
        [
            "20559837596768881/124590980225106843",
            "96813856451303497/415303267417022810",
            "1154873210442508/8612279739062685",
            "49954131355895969/106792268764377294",
            "",
        ],
    )
}

fn fixture_c5() -> (CMat, CMat, [&'static str; 5]) {
    // Rows span V.
    let m_v = [
        [
            (-19.0, -1.0),
            (-4.0, 19.0),
            (-14.0, 6.0),
            (16.0, 6.0),
            (16.0, 11.0),
        ],
        [
            (-10.0, 11.0),
            (5.0, 6.0),
            (19.0, -10.0),
            (19.0, 15.0),
            (-21.0, 0.0),
        ],
        [
            (29.0, 0.0),
            (-1.0, 15.0),
            (-5.0, -16.0),
            (10.0, 9.0),
            (10.0, -21.0),
        ],
    ];
    let m_v = CMat::from_fn(3, 5, |i, j| c(m_v[i][j].0 / 50.0, m_v[i][j].1 / 50.0));
    let coef = [
        [(-32.0, 53.0), (-8.0, -25.0), (16.0, 29.0)],
        [(10.0, 5.0), (-6.0, 0.0), (4.0, 13.0)],
        [(0.0, -26.0), (-22.0, 29.0), (8.0, 10.0)],
        [(10.0, 6.0), (6.0, 14.0), (5.0, 7.0)],
        [(13.0, 15.0), (-4.0, 18.0), (-28.0, -3.0)],
    ];
    let coef = CMat::from_fn(5, 3, |i, j| c(coef[i][j].0 / 10.0, coef[i][j].1 / 10.0));
    // The moment system uses unit vectors v^i along the rows of C·M_V.
    let rows = coef * m_v;
    let mut columns = rows.transpose();
    for j in 0..5 {
        let norm = columns.column(j).norm();
        columns.column_mut(j).unscale_mut(norm);
    }
    let s = 10f64.sqrt();
    let w = CMat::from_column_slice(
        5,
        1,
        &[
            c(1.0 / s, -1.0 / s),
            c(1.0 / s, -1.0 / s),
            c(1.0 / s, 1.0 / s),
            c(1.0 / s, 1.0 / s),
            c(1.0 / s, 1.0 / s),
        ],
    );
    (
        columns,
        w,
        [
            "38245034600180718292066117/93505493283505350729949090",
            "876893808432404350620802/9350549328350535072994909",
            "11840789324853298629489761/93505493283505350729949090",
            "11483749488079211997737796/46752746641752675364974545",
            "1168323229798886630670960/9350549328350535072994909",
        ],
    )
}

/// The fixture data and its validated pair (`V` spanned by the columns,
/// `W = span{w}`).
pub fn appendix_fixture(which: Appendix) -> AppendixFixture {
    let (columns, w, fractions) = match which {
        Appendix::A3 => fixture_a3(),
        Appendix::B4 => fixture_b4(),
        Appendix::C5 => fixture_c5(),
    };
    let expected_x = fractions
        .iter()
        .filter(|f| !f.is_empty())
        .map(|f| rational(f))
        .collect();
    let basis = orthonormal_basis(&columns, SVD_RANK_TOL);
    debug_assert_eq!(basis.ncols(), which.r());
    let wn = &w / c(frob_norm(&w), 0.0);
    let pair = validate_pair(&basis, &wn, 1e-10).expect("appendix pairs are orthogonal");
    AppendixFixture {
        which,
        columns,
        w,
        expected_x,
        pair,
    }
}
