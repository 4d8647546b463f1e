//! Latent semantic indexing by randomized partial SVD with power iterations.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sparse::{CscMatrix, SparseVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvdParams {
    pub k: usize,
    pub oversampling: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl SvdParams {
    pub fn new(k: usize, seed: u64) -> Self {
        SvdParams {
            k,
            oversampling: 100,
            power_iters: 2,
            seed,
        }
    }
}

/// Rank-k factors `X ≈ P Σ Qᵀ`: `term_factors` is P (terms × k),
/// `doc_factors` is Q (documents × k).
#[derive(Debug, Clone, PartialEq)]
pub struct LsiModel {
    pub term_factors: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub doc_factors: DMatrix<f64>,
    pub params: SvdParams,
}

fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

/// Randomized range finder followed by an exact SVD of the small projected
/// matrix. The sketch width `k + oversampling` and `k` itself are clipped to
/// `min(rows, cols)`.
pub fn randomized_svd(x: &CscMatrix, params: SvdParams) -> Result<LsiModel> {
    if params.k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let (m, n) = (x.rows(), x.cols());
    let full = m.min(n);
    if full == 0 {
        return Err(Error::InvalidParameter(format!("cannot factor a {m}×{n} matrix")));
    }
    let k = params.k.min(full);
    let width = (params.k + params.oversampling).min(full);

    // Column-major fill keeps the first columns of the sketch identical
    // across different widths for the same seed.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut omega = DMatrix::zeros(n, width);
    for c in 0..width {
        for r in 0..n {
            omega[(r, c)] = StandardNormal.sample(&mut rng);
        }
    }

    let mut basis = orthonormal_basis(x.mul_dense(&omega));
    for _ in 0..params.power_iters {
        let z = orthonormal_basis(x.tr_mul_dense(&basis));
        basis = orthonormal_basis(x.mul_dense(&z));
    }

    // B = Qᵀ X, width × n.
    let b = x.tr_mul_dense(&basis).transpose();
    let svd = b.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .total_cmp(&svd.singular_values[i])
            .then(i.cmp(&j))
    });
    let order = &order[..k];

    let u_k = DMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]);
    let term_factors = &basis * u_k;
    let singular_values = DVector::from_fn(k, |i, _| svd.singular_values[order[i]].max(0.0));
    let doc_factors = DMatrix::from_fn(n, k, |r, c| v_t[(order[c], r)]);

    Ok(LsiModel {
        term_factors,
        singular_values,
        doc_factors,
        params: SvdParams { k, ..params },
    })
}

impl LsiModel {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    pub fn n_terms(&self) -> usize {
        self.term_factors.nrows()
    }

    pub fn n_docs(&self) -> usize {
        self.doc_factors.nrows()
    }

    /// Fold-in `Σ⁻¹ Pᵀ d`. Directions whose singular value is at or below
    /// `1e-12 σ₁` map to zero.
    pub fn project(&self, doc: &SparseVec) -> Result<Vec<f64>> {
        if doc.dim != self.n_terms() {
            return Err(Error::DimensionMismatch {
                expected: self.n_terms(),
                actual: doc.dim,
            });
        }
        let cutoff = 1e-12 * self.singular_values.get(0).copied().unwrap_or(0.0);
        Ok((0..self.k())
            .map(|c| {
                let sigma = self.singular_values[c];
                if sigma <= cutoff || sigma == 0.0 {
                    return 0.0;
                }
                let dot: f64 = doc.entries.iter().map(|&(i, v)| self.term_factors[(i, c)] * v).sum();
                dot / sigma
            })
            .collect())
    }

    /// Row j of Q, the training document's concept coordinates.
    pub fn doc_embedding(&self, j: usize) -> Vec<f64> {
        self.doc_factors.row(j).iter().copied().collect()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.term_factors * DMatrix::from_diagonal(&self.singular_values) * self.doc_factors.transpose()
    }

    const MAGIC: &'static [u8; 8] = b"ERLSI01\0";

    /// Header (magic, terms, docs, k, seed, oversampling, power iterations as
    /// little-endian u64) then σ, P and Q as column-major little-endian f64.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(Self::MAGIC);
        for v in [
            self.n_terms() as u64,
            self.n_docs() as u64,
            self.k() as u64,
            self.params.seed,
            self.params.oversampling as u64,
            self.params.power_iters as u64,
        ] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        for x in self
            .singular_values
            .iter()
            .chain(self.term_factors.iter())
            .chain(self.doc_factors.iter())
        {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut buf))
            .map_err(|e| Error::io(path, e))?;
        let mut r = BlobReader::new(&buf, path, "LSI model");
        r.magic(Self::MAGIC)?;
        let terms = r.u64()? as usize;
        let docs = r.u64()? as usize;
        let k = r.u64()? as usize;
        let seed = r.u64()?;
        let oversampling = r.u64()? as usize;
        let power_iters = r.u64()? as usize;
        let sigma = r.f64s(k)?;
        let p = r.f64s(terms * k)?;
        let q = r.f64s(docs * k)?;
        r.finish()?;
        Ok(LsiModel {
            term_factors: DMatrix::from_vec(terms, k, p),
            singular_values: DVector::from_vec(sigma),
            doc_factors: DMatrix::from_vec(docs, k, q),
            params: SvdParams {
                k,
                oversampling,
                power_iters,
                seed,
            },
        })
    }
}

pub(crate) struct BlobReader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
    kind: &'static str,
}

impl<'a> BlobReader<'a> {
    pub(crate) fn new(buf: &'a [u8], path: &'a Path, kind: &'static str) -> Self {
        BlobReader {
            buf,
            pos: 0,
            path,
            kind,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::format(self.kind, self.path, "truncated file"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn magic(&mut self, magic: &[u8; 8]) -> Result<()> {
        if self.take(8)? != magic {
            return Err(Error::format(self.kind, self.path, "bad magic"));
        }
        Ok(())
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(self.kind, self.path, "trailing bytes"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sparse(m: DMatrix<f64>) -> CscMatrix {
        CscMatrix::from_dense(&m)
    }

    #[test]
    fn identity_spectrum() {
        let model = randomized_svd(&sparse(DMatrix::identity(5, 5)), SvdParams::new(2, 1)).unwrap();
        for s in model.singular_values.iter() {
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_one() {
        let a = DVector::from_vec(vec![1.0, 2.0, 0.0, -1.0]);
        let b = DVector::from_vec(vec![3.0, 0.0, 1.0]);
        let x = &a * b.transpose();
        let model = randomized_svd(&sparse(x), SvdParams::new(2, 9)).unwrap();
        assert!((model.singular_values[0] - a.norm() * b.norm()).abs() < 1e-8);
        assert!(model.singular_values[1].abs() < 1e-8);
    }

    #[test]
    fn zero_matrix_has_zero_spectrum_and_orthonormal_factors() {
        let model = randomized_svd(&sparse(DMatrix::zeros(6, 4)), SvdParams::new(3, 0)).unwrap();
        assert!(model.singular_values.iter().all(|&s| s == 0.0));
        let ptp = model.term_factors.transpose() * &model.term_factors;
        let qtq = model.doc_factors.transpose() * &model.doc_factors;
        assert!((ptp - DMatrix::identity(3, 3)).norm() < 1e-8);
        assert!((qtq - DMatrix::identity(3, 3)).norm() < 1e-8);
        let emb = model.project(&SparseVec::new(6, vec![(1, 1.0)])).unwrap();
        assert!(emb.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn rejects_zero_rank() {
        let x = sparse(DMatrix::identity(3, 3));
        assert!(randomized_svd(&x, SvdParams::new(0, 0)).is_err());
    }

    #[test]
    fn fold_in_reproduces_training_rows() {
        let x = DMatrix::from_fn(12, 9, |i, j| ((i * 7 + j * 3) % 5) as f64);
        let csc = sparse(x);
        let model = randomized_svd(&csc, SvdParams::new(4, 3)).unwrap();
        for j in 0..csc.cols() {
            let emb = model.project(&SparseVec::new(12, csc.column_entries(j))).unwrap();
            let row = model.doc_embedding(j);
            for (a, b) in emb.iter().zip(&row) {
                assert!((a - b).abs() < 1e-6, "doc {j}: {a} vs {b}");
            }
        }
        let zero = model.project(&SparseVec::new(12, vec![])).unwrap();
        assert!(zero.iter().all(|&z| z == 0.0));
        assert!(matches!(
            model.project(&SparseVec::new(11, vec![])),
            Err(Error::DimensionMismatch {
                expected: 12,
                actual: 11
            })
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let x = sparse(DMatrix::from_fn(30, 20, |i, j| ((i * j + 3) % 7) as f64));
        let mut p = SvdParams::new(3, 42);
        p.oversampling = 2;
        assert_eq!(randomized_svd(&x, p).unwrap(), randomized_svd(&x, p).unwrap());
    }

    #[test]
    fn model_file_round_trip() {
        let x = sparse(DMatrix::from_fn(8, 5, |i, j| (i + j) as f64 % 3.0));
        let model = randomized_svd(&x, SvdParams::new(2, 5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lsi.bin");
        model.save(&path).unwrap();
        assert_eq!(LsiModel::load(&path).unwrap(), model);
        fs::write(&path, b"junk").unwrap();
        assert!(LsiModel::load(&path).is_err());
    }
}
