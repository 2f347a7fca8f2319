//! Based algebraic loops in SU(n) as matrix Fourier polynomials.
//!
//! A loop is stored by its coefficients `A_k`, `k ∈ [-m, m]`, with
//! `γ(θ) = Σ A_k e^{ikθ}`. Construction checks that the loop is based
//! (`γ(0) = I`, the base point of the circle is `z = 1`), unitary on the
//! circle, and of unit determinant.

use std::io::{BufRead, Write};

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{random_unitary, Coweight};
use crate::mat::{self, CMatrix};

const BASED_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-9;
const DET_TOL: f64 = 1e-8;

/// A based loop `γ(z) = Σ_{k=-m}^{m} A_k z^k` with values in SU(n).
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPoly {
    n: usize,
    m: usize,
    /// Coefficient of `z^k` at index `k + m`.
    coeffs: Vec<CMatrix>,
}

impl LoopPoly {
    /// Build a loop from coefficients `A_{-m}, …, A_m`, validating the
    /// basedness, unitarity, and determinant invariants.
    pub fn new(n: usize, m: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.len() != 2 * m + 1 {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for degree bound {m}, got {}",
                2 * m + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|a| a.shape() != (n, n)) {
            return Err(Error::Dimension(format!("coefficients must all be {n}x{n}")));
        }
        let loop_ = Self { n, m, coeffs };
        let based = (loop_.coeff_sum() - mat::identity(n)).norm();
        if based > BASED_TOL {
            return Err(Error::Domain(format!("loop is not based: residual {based:e}")));
        }
        let uerr = loop_.max_unitary_error();
        if uerr > UNITARY_TOL {
            return Err(Error::Domain(format!(
                "loop is not unitary on the circle: residual {uerr:e}"
            )));
        }
        let derr = loop_.max_det_error();
        if derr > DET_TOL {
            return Err(Error::Domain(format!(
                "loop does not have unit determinant: residual {derr:e}"
            )));
        }
        Ok(loop_)
    }

    /// The constant loop at the identity.
    pub fn identity(n: usize) -> Self {
        Self { n, m: 0, coeffs: vec![mat::identity(n)] }
    }

    /// The homomorphism loop `θ ↦ diag(e^{i n_j θ})` of a coweight.
    pub fn coweight(lambda: &Coweight) -> Self {
        let n = lambda.rank();
        let m = lambda.degree() as usize;
        let mut coeffs = vec![CMatrix::zeros(n, n); 2 * m + 1];
        for (j, &e) in lambda.entries().iter().enumerate() {
            coeffs[(e + m as i64) as usize][(j, j)] = Complex::new(1.0, 0.0);
        }
        Self { n, m, coeffs }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Degree bound of the Fourier support.
    pub fn degree(&self) -> usize {
        self.m
    }

    /// Coefficient of `z^k` (zero outside the stored band).
    pub fn coeff(&self, k: i64) -> CMatrix {
        let m = self.m as i64;
        if k < -m || k > m {
            CMatrix::zeros(self.n, self.n)
        } else {
            self.coeffs[(k + m) as usize].clone()
        }
    }

    fn coeff_sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n, self.n);
        for a in &self.coeffs {
            acc += a;
        }
        acc
    }

    /// Evaluate `γ(θ) = Σ A_k e^{ikθ}`.
    pub fn eval(&self, theta: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n, self.n);
        let m = self.m as i64;
        for k in -m..=m {
            let phase = Complex::from_polar(1.0, k as f64 * theta);
            acc += &self.coeffs[(k + m) as usize] * phase;
        }
        acc
    }

    /// Derivative `γ'(θ) = Σ ik A_k e^{ikθ}`.
    pub(crate) fn eval_deriv(&self, theta: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n, self.n);
        let m = self.m as i64;
        for k in -m..=m {
            let phase = Complex::from_polar(1.0, k as f64 * theta) * Complex::new(0.0, k as f64);
            acc += &self.coeffs[(k + m) as usize] * phase;
        }
        acc
    }

    fn max_unitary_error(&self) -> f64 {
        let samples = 4 * self.m + 3;
        (0..samples)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / samples as f64;
                mat::unitary_error(&self.eval(theta))
            })
            .fold(0.0, f64::max)
    }

    fn max_det_error(&self) -> f64 {
        let samples = 4 * self.m + 3;
        (0..samples)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / samples as f64;
                (mat::det(&self.eval(theta)) - Complex::new(1.0, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Pointwise product `γ₁γ₂` (Cauchy product of coefficients).
    pub fn multiply(&self, other: &LoopPoly) -> Result<LoopPoly> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot multiply loops of sizes {} and {}",
                self.n, other.n
            )));
        }
        let m = self.m + other.m;
        let mut coeffs = vec![CMatrix::zeros(self.n, self.n); 2 * m + 1];
        let (m1, m2) = (self.m as i64, other.m as i64);
        for a in -m1..=m1 {
            for b in -m2..=m2 {
                let k = (a + b + m as i64) as usize;
                coeffs[k] += &self.coeffs[(a + m1) as usize] * &other.coeffs[(b + m2) as usize];
            }
        }
        LoopPoly::new(self.n, m, coeffs)
    }

    /// Pointwise inverse. For unitary loops `γ⁻¹(z)` has coefficients
    /// `(A_{-k})†`; the degree bound is unchanged.
    pub fn inverse(&self) -> Result<LoopPoly> {
        let uerr = self.max_unitary_error();
        if uerr > 1e-6 {
            return Err(Error::Domain(format!(
                "inverse requires a unitary-valued loop, residual {uerr:e}"
            )));
        }
        let m = self.m as i64;
        let coeffs = (-m..=m)
            .map(|k| self.coeffs[(-k + m) as usize].adjoint())
            .collect();
        LoopPoly::new(self.n, self.m, coeffs)
    }

    /// Logarithmic derivative `γ⁻¹γ'` as a trigonometric polynomial of
    /// degree at most `2m`, recovered by discrete Fourier inversion from
    /// `4m + 3` equispaced samples (exact for trigonometric polynomials).
    pub fn log_derivative(&self) -> TangentPoly {
        let out_deg = 2 * self.m;
        let samples = 4 * self.m + 3;
        let points: Vec<CMatrix> = (0..samples)
            .map(|j| {
                let theta = std::f64::consts::TAU * j as f64 / samples as f64;
                self.eval(theta).adjoint() * self.eval_deriv(theta)
            })
            .collect();
        let mut coeffs = Vec::with_capacity(2 * out_deg + 1);
        for k in -(out_deg as i64)..=(out_deg as i64) {
            let mut acc = CMatrix::zeros(self.n, self.n);
            for (j, p) in points.iter().enumerate() {
                let theta = std::f64::consts::TAU * j as f64 / samples as f64;
                acc += p * Complex::from_polar(1.0, -(k as f64) * theta);
            }
            coeffs.push(acc / Complex::new(samples as f64, 0.0));
        }
        TangentPoly::new(self.n, out_deg, coeffs)
            .expect("logarithmic derivative of a unitary loop is skew-Hermitian")
    }

    /// The circle-and-group action `[(s,k)·γ](θ) = kγ(θ+s)γ(s)⁻¹k⁻¹`.
    pub fn act(&self, s: f64, k: &CMatrix, ) -> Result<LoopPoly> {
        if k.shape() != (self.n, self.n) {
            return Err(Error::Dimension(format!(
                "group element must be {0}x{0}, got {1:?}",
                self.n,
                k.shape()
            )));
        }
        if mat::unitary_error(k) > 1e-8 {
            return Err(Error::Domain(format!(
                "group element is not unitary: residual {:e}",
                mat::unitary_error(k)
            )));
        }
        let base_inv = self.eval(s).adjoint();
        let kh = k.adjoint();
        let m = self.m as i64;
        let coeffs = (-m..=m)
            .map(|j| {
                let phase = Complex::from_polar(1.0, j as f64 * s);
                k * (&self.coeffs[(j + m) as usize] * phase) * &base_inv * &kh
            })
            .collect();
        LoopPoly::new(self.n, self.m, coeffs)
    }

    /// The involution `(τγ)(z) = σ(γ(z̄))` with `σ` entrywise conjugation
    /// on SU(n); on coefficients, `A_k ↦ conj(A_k)`.
    pub fn tau(&self) -> LoopPoly {
        let coeffs = self.coeffs.iter().map(|a| a.map(|z| z.conj())).collect();
        Self { n: self.n, m: self.m, coeffs }
    }

    /// Largest coefficient-wise distance to another loop, band-aligned.
    pub fn coeff_distance(&self, other: &LoopPoly) -> f64 {
        let m = self.m.max(other.m) as i64;
        (-m..=m)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Serializable record (see [`LoopRecord`]).
    pub fn to_record(&self) -> LoopRecord {
        let m = self.m as i64;
        let coeffs = (-m..=m)
            .map(|k| {
                let a = &self.coeffs[(k + m) as usize];
                let re = (0..self.n)
                    .map(|i| (0..self.n).map(|j| a[(i, j)].re).collect())
                    .collect();
                let im = (0..self.n)
                    .map(|i| (0..self.n).map(|j| a[(i, j)].im).collect())
                    .collect();
                (k, re, im)
            })
            .collect();
        LoopRecord { n: self.n, m: self.m, coeffs }
    }

    pub fn from_record(rec: &LoopRecord) -> Result<LoopPoly> {
        let mut coeffs = vec![CMatrix::zeros(rec.n, rec.n); 2 * rec.m + 1];
        for (k, re, im) in &rec.coeffs {
            let idx = k + rec.m as i64;
            if idx < 0 || idx >= coeffs.len() as i64 {
                return Err(Error::Dimension(format!(
                    "coefficient index {k} outside band [-{0}, {0}]",
                    rec.m
                )));
            }
            if re.len() != rec.n || im.len() != rec.n {
                return Err(Error::Dimension("coefficient rows do not match n".into()));
            }
            let a = CMatrix::from_fn(rec.n, rec.n, |i, j| Complex::new(re[i][j], im[i][j]));
            coeffs[idx as usize] = a;
        }
        LoopPoly::new(rec.n, rec.m, coeffs)
    }
}

/// Wire format for one loop: `{"n":…, "m":…, "coeffs":[[k, re, im], …]}`
/// with `re`/`im` row-major matrices of 64-bit reals.
#[derive(Debug, Serialize, Deserialize)]
pub struct LoopRecord {
    pub n: usize,
    pub m: usize,
    pub coeffs: Vec<(i64, Vec<Vec<f64>>, Vec<Vec<f64>>)>,
}

/// Write loops as line-delimited JSON, one record per line.
pub fn write_loops_jsonl<W: Write>(mut w: W, loops: &[LoopPoly]) -> std::io::Result<()> {
    for l in loops {
        serde_json::to_writer(&mut w, &l.to_record())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Read loops from line-delimited JSON produced by [`write_loops_jsonl`].
pub fn read_loops_jsonl<R: BufRead>(r: R) -> Result<Vec<LoopPoly>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::Domain(format!("io error: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LoopRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Domain(format!("malformed loop record: {e}")))?;
        out.push(LoopPoly::from_record(&rec)?);
    }
    Ok(out)
}

/// Seeded product of conjugated coweight loops `Π kⱼ λⱼ(θ) kⱼ⁻¹`.
///
/// Coweights are drawn with entries in `[-max_coweight_norm, max_coweight_norm]`
/// and are never zero, so each factor is effective and a `depth = 1`
/// sample is exactly a conjugated homomorphism. With `real_locus` the
/// conjugators come from SO(n) and every coefficient is real, so the
/// sample is fixed by `tau` exactly.
pub fn sample_loop(
    seed: u64,
    n: usize,
    depth: usize,
    max_coweight_norm: i64,
    real_locus: bool,
) -> Result<LoopPoly> {
    if depth == 0 {
        return Err(Error::Domain("sampler depth must be at least 1".into()));
    }
    if max_coweight_norm < 1 {
        return Err(Error::Domain("max coweight norm must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = LoopPoly::identity(n);
    for _ in 0..depth {
        let lambda = random_coweight(&mut rng, n, max_coweight_norm);
        let k = random_unitary(rng.random::<u64>(), n, real_locus);
        let factor = LoopPoly::coweight(&lambda).act(0.0, &k)?;
        acc = acc.multiply(&factor)?;
    }
    Ok(acc)
}

fn random_coweight(rng: &mut ChaCha8Rng, n: usize, max_norm: i64) -> Coweight {
    loop {
        let mut entries: Vec<i64> =
            (0..n - 1).map(|_| rng.random_range(-max_norm..=max_norm)).collect();
        let tail: i64 = -entries.iter().sum::<i64>();
        if tail.abs() > max_norm {
            continue;
        }
        entries.push(tail);
        if entries.iter().any(|&e| e != 0) {
            return Coweight::new(entries).expect("zero-sum by construction");
        }
    }
}

/// A tangent trigonometric polynomial `X(θ) = Σ A_k e^{ikθ}` with
/// pointwise skew-Hermitian values, i.e. `A_{-k} = -A_k†`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoly {
    n: usize,
    m: usize,
    coeffs: Vec<CMatrix>,
}

impl TangentPoly {
    /// Validate the reality constraint `A_{-k} = -A_k†` (to 1e-9) and
    /// symmetrize it to hold exactly.
    pub fn new(n: usize, m: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        if coeffs.len() != 2 * m + 1 {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for degree bound {m}, got {}",
                2 * m + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|a| a.shape() != (n, n)) {
            return Err(Error::Dimension(format!("coefficients must all be {n}x{n}")));
        }
        let mi = m as i64;
        let mut worst = 0.0f64;
        for k in 0..=mi {
            let res = (&coeffs[(k + mi) as usize] + coeffs[(-k + mi) as usize].adjoint()).norm();
            worst = worst.max(res);
        }
        if worst > 1e-9 {
            return Err(Error::Domain(format!(
                "tangent coefficients violate A_-k = -A_k†: residual {worst:e}"
            )));
        }
        let mut sym = coeffs;
        for k in 1..=mi {
            let hi = ((&sym[(k + mi) as usize]) - sym[(-k + mi) as usize].adjoint())
                * Complex::new(0.5, 0.0);
            sym[(-k + mi) as usize] = -hi.adjoint();
            sym[(k + mi) as usize] = hi;
        }
        let zero = &sym[mi as usize];
        sym[mi as usize] = (zero - zero.adjoint()) * Complex::new(0.5, 0.0);
        Ok(Self { n, m, coeffs: sym })
    }

    /// Build from the coefficients of positive degree plus a constant
    /// term, filling `A_{-k} = -A_k†` and adjusting `A_0` so the tangent
    /// is based (`Σ A_k = 0`).
    pub fn from_positive_part(n: usize, positive: Vec<CMatrix>) -> Result<Self> {
        let m = positive.len();
        let mut coeffs = vec![CMatrix::zeros(n, n); 2 * m + 1];
        let mut sum = CMatrix::zeros(n, n);
        for (k, a) in positive.into_iter().enumerate() {
            if a.shape() != (n, n) {
                return Err(Error::Dimension(format!("coefficients must all be {n}x{n}")));
            }
            let neg = -a.adjoint();
            sum += &a + &neg;
            coeffs[m + k + 1] = a;
            coeffs[m - k - 1] = neg;
        }
        coeffs[m] = -sum;
        Self::new(n, m, coeffs)
    }

    /// Seeded based tangent vector with degree bound `m`.
    pub fn random(seed: u64, n: usize, m: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positive = (0..m)
            .map(|_| {
                CMatrix::from_fn(n, n, |_, _| {
                    Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                })
            })
            .collect();
        Self::from_positive_part(n, positive).expect("construction satisfies the constraints")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn coeff(&self, k: i64) -> CMatrix {
        let m = self.m as i64;
        if k < -m || k > m {
            CMatrix::zeros(self.n, self.n)
        } else {
            self.coeffs[(k + m) as usize].clone()
        }
    }

    pub fn eval(&self, theta: f64) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n, self.n);
        let m = self.m as i64;
        for k in -m..=m {
            acc += &self.coeffs[(k + m) as usize] * Complex::from_polar(1.0, k as f64 * theta);
        }
        acc
    }

    /// `Σ A_k = X(0)`; zero for based tangents.
    pub fn coeff_sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.n, self.n);
        for a in &self.coeffs {
            acc += a;
        }
        acc
    }

    pub fn is_based(&self, tol: f64) -> bool {
        self.coeff_sum().norm() <= tol
    }

    /// Differential of the loop involution: `A_k ↦ conj(A_k)`.
    pub fn dtau(&self) -> TangentPoly {
        let coeffs = self.coeffs.iter().map(|a| a.map(|z| z.conj())).collect();
        Self { n: self.n, m: self.m, coeffs }
    }
}
