use serde::{Deserialize, Serialize};

use super::fixtures::{appendix_fixture, Appendix};
use crate::domain::{validate_pair, OrthoPair};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat};
use crate::moment::{support_certificate, CertificateConfig, SupportCertificate};

/// A support in `C^{3h+4k+5l}` assembled from the fixture blocks A3, B4 and C5.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub counts: (usize, usize, usize),
    pub pair: OrthoPair,
    /// Block diagonal spanning system of `V`.
    pub columns: CMat,
    /// Concatenated block generators, unit norm.
    pub w: CMat,
    pub certificate: SupportCertificate,
    /// `det(M)` of each block, in block order.
    pub block_dets: Vec<f64>,
}

impl Composition {
    pub fn det_product(&self) -> f64 {
        self.block_dets.iter().product()
    }

    /// `|det(M) − Π det(M_block)| / |Π det(M_block)|`.
    pub fn det_factorization_error(&self) -> f64 {
        let prod = self.det_product();
        (self.certificate.det - prod).abs() / prod.abs()
    }

    pub fn summary(&self) -> CompositionSummary {
        CompositionSummary {
            h: self.counts.0,
            k: self.counts.1,
            l: self.counts.2,
            n: self.pair.n(),
            r: self.pair.r(),
            s: self.pair.s(),
            det: self.certificate.det,
            det_product: self.det_product(),
            block_dets: self.block_dets.clone(),
            certificate: self.certificate.summary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionSummary {
    pub h: usize,
    pub k: usize,
    pub l: usize,
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub det: f64,
    pub det_product: f64,
    pub block_dets: Vec<f64>,
    pub certificate: crate::moment::CertificateSummary,
}

/// `h` copies of the `C³` block, `k` of the `C⁴` block and `l` of the `C⁵`
/// block on the diagonal, with `W` spanned by the normalized concatenation
/// of the block generators.
pub fn block_compose(h: usize, k: usize, l: usize) -> Result<Composition> {
    let blocks: Vec<Appendix> = std::iter::repeat_n(Appendix::A3, h)
        .chain(std::iter::repeat_n(Appendix::B4, k))
        .chain(std::iter::repeat_n(Appendix::C5, l))
        .collect();
    if blocks.is_empty() {
        return Err(Error::EmptyComposition);
    }
    let n: usize = blocks.iter().map(|b| b.n()).sum();
    let r: usize = blocks.iter().map(|b| b.r()).sum();
    let mut columns = CMat::zeros(n, n);
    let mut basis = CMat::zeros(n, r);
    let mut w = CMat::zeros(n, 1);
    let mut block_dets = Vec::with_capacity(blocks.len());
    let (mut row, mut col) = (0, 0);
    let cfg = CertificateConfig::default();
    for which in &blocks {
        let fx = appendix_fixture(*which);
        let (bn, br) = (which.n(), which.r());
        columns
            .view_mut((row, row), (bn, bn))
            .copy_from(&fx.columns);
        basis.view_mut((row, col), (bn, br)).copy_from(fx.pair.v());
        w.view_mut((row, 0), (bn, 1)).copy_from(&fx.w);
        block_dets.push(fx.certificate(&cfg).det);
        row += bn;
        col += br;
    }
    let w = w / c((blocks.len() as f64).sqrt(), 0.0);
    let pair = validate_pair(&basis, &w, 1e-10)?;
    let certificate = support_certificate(&columns, &w, &cfg)?;
    Ok(Composition {
        counts: (h, k, l),
        pair,
        columns,
        w,
        certificate,
        block_dets,
    })
}
