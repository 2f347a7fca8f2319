//! su(n) substrate: coweights, the positive Weyl chamber, and Haar
//! sampling on SU(n) and SO(n).

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::mat::{self, CMatrix};

/// Integer coweight of SU(n): a vector `(n₁, …, n_n)` with zero sum.
///
/// Indexes both the homomorphisms `S¹ → T` (as `θ ↦ diag(e^{i n_j θ})`)
/// and the strata of the loop space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coweight {
    entries: Vec<i64>,
}

impl Coweight {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("coweight must be non-empty".into()));
        }
        if entries.iter().sum::<i64>() != 0 {
            return Err(Error::Domain(format!(
                "coweight entries must sum to zero, got {entries:?}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn zero(n: usize) -> Self {
        Self { entries: vec![0; n] }
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    /// `Σ nⱼ²`, the squared trace-form norm of the generator `Λ`.
    pub fn norm_sq(&self) -> i64 {
        self.entries.iter().map(|e| e * e).sum()
    }

    /// Largest absolute entry; the Fourier degree of the coweight loop.
    pub fn degree(&self) -> i64 {
        self.entries.iter().map(|e| e.abs()).max().unwrap_or(0)
    }

    pub fn is_dominant(&self) -> bool {
        self.entries.windows(2).all(|w| w[0] >= w[1])
    }

    /// Weyl-chamber representative: entries sorted weakly decreasing.
    pub fn dominant(&self) -> Coweight {
        let mut e = self.entries.clone();
        e.sort_unstable_by(|a, b| b.cmp(a));
        Coweight { entries: e }
    }

    /// Generator `Λ = i·diag(n₁, …, n_n)` in su(n).
    pub fn generator(&self) -> CMatrix {
        CMatrix::from_diagonal(&DVector::from_iterator(
            self.rank(),
            self.entries.iter().map(|&e| Complex::new(0.0, e as f64)),
        ))
    }

    /// All coweights of rank `n` with every entry in `[-max_norm, max_norm]`.
    pub fn ball(n: usize, max_norm: i64) -> Vec<Coweight> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; n];
        fn rec(cur: &mut Vec<i64>, idx: usize, max_norm: i64, out: &mut Vec<Coweight>) {
            if idx + 1 == cur.len() {
                let tail: i64 = -cur[..idx].iter().sum::<i64>();
                if tail.abs() <= max_norm {
                    cur[idx] = tail;
                    out.push(Coweight { entries: cur.clone() });
                }
                return;
            }
            for v in -max_norm..=max_norm {
                cur[idx] = v;
                rec(cur, idx + 1, max_norm, out);
            }
        }
        rec(&mut cur, 0, max_norm, &mut out);
        out
    }
}

/// A point of the positive Weyl chamber: weakly decreasing real entries
/// summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaCoords {
    v: Vec<f64>,
}

impl DeltaCoords {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("chamber coordinates must be finite".into()));
        }
        if v.windows(2).any(|w| w[0] < w[1] - 1e-12) {
            return Err(Error::Domain(format!(
                "chamber coordinates must be weakly decreasing, got {v:?}"
            )));
        }
        let sum: f64 = v.iter().sum();
        if sum.abs() > 1e-8 {
            return Err(Error::Domain(format!(
                "chamber coordinates must sum to zero, got sum {sum:e}"
            )));
        }
        Ok(Self { v })
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }
}

/// Conjugate a skew-Hermitian traceless `p` into the positive chamber.
///
/// Returns the weakly decreasing imaginary spectrum `v` and a unitary `u`
/// with `u · i·diag(v) · u⁻¹ ≈ p`.
pub fn dominant_project(p: &CMatrix) -> Result<(DeltaCoords, CMatrix)> {
    let n = p.nrows();
    if n != p.ncols() {
        return Err(Error::Dimension(format!("expected square input, got {:?}", p.shape())));
    }
    if mat::skew_error(p) > 1e-10 {
        return Err(Error::Domain(format!(
            "input is not skew-Hermitian: residual {:e}",
            mat::skew_error(p)
        )));
    }
    if p.trace().norm() > 1e-10 {
        return Err(Error::Domain(format!(
            "input is not traceless: |tr| = {:e}",
            p.trace().norm()
        )));
    }
    // h = -i p is Hermitian; symmetrize to kill rounding before eigen.
    let h = p * Complex::new(0.0, -1.0);
    let h = (&h + h.adjoint()) * Complex::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let v: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut u = CMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        u.set_column(j, &eig.eigenvectors.column(i));
    }
    // The eigenvalue sum is tr(h) which is ~0 already; snap tiny drift so
    // the result is a valid chamber point.
    let drift = v.iter().sum::<f64>() / n as f64;
    let v: Vec<f64> = v.iter().map(|x| x - drift).collect();
    Ok((DeltaCoords::new(v)?, u))
}

/// All distinct permutations of a chamber point.
pub fn weyl_orbit(v: &DeltaCoords) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    let vals = v.values();
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    permute(&mut idx, 0, &mut |perm| {
        let cand: Vec<f64> = perm.iter().map(|&i| vals[i]).collect();
        if !out.iter().any(|p| p == &cand) {
            out.push(cand);
        }
    });
    out
}

fn permute(idx: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == idx.len() {
        visit(idx);
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, visit);
        idx.swap(k, i);
    }
}

/// Dominance order on dominant coweights: `η ≤ λ` iff every partial sum
/// of `λ - η` is nonnegative.
pub fn dominance_leq(eta: &Coweight, lambda: &Coweight) -> Result<bool> {
    if eta.rank() != lambda.rank() {
        return Err(Error::Dimension(format!(
            "coweight ranks differ: {} vs {}",
            eta.rank(),
            lambda.rank()
        )));
    }
    if !eta.is_dominant() || !lambda.is_dominant() {
        return Err(Error::Domain(
            "dominance order is defined on dominant representatives".into(),
        ));
    }
    let mut acc = 0i64;
    for (l, e) in lambda.entries().iter().zip(eta.entries()) {
        acc += l - e;
        if acc < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Haar-distributed element of SU(n), or of SO(n) when `real_form` is set.
///
/// QR of a Gaussian matrix with the usual phase correction, then a final
/// determinant fix into the special subgroup. Deterministic in `seed`.
pub fn random_unitary(seed: u64, n: usize, real_form: bool) -> CMatrix {
    assert!(n >= 1, "group rank must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if real_form {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if q.determinant() < 0.0 {
            for i in 0..n {
                q[(i, n - 1)] = -q[(i, n - 1)];
            }
        }
        q.map(|x| Complex::new(x, 0.0))
    } else {
        let g = CMatrix::from_fn(n, n, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex::new(re, im)
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
            let corr = phase.conj();
            for i in 0..n {
                q[(i, j)] *= corr;
            }
        }
        let det = mat::det(&q);
        let corr = det.conj() / det.norm();
        for i in 0..n {
            q[(i, n - 1)] *= corr;
        }
        q
    }
}
