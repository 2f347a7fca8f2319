//! Finite-window Grassmannian model of the loop space.
//!
//! A loop `γ` acts on the polarized space `H = L²(S¹, V)` (fiber `V = ℂⁿ`
//! in the fundamental representation, `V = sl(n,ℂ)` in the adjoint) and
//! `γ ↦ γ·H₊` identifies loops with subspaces `W` satisfying
//! `z^hi·H₊ ⊆ W ⊆ z^lo·H₊`. Such a subspace is stored on the finite
//! degree window `[lo, hi)` as an orthonormal basis of `W/z^hi·H₊`;
//! everything of degree `hi` and above is an implicit tail that belongs
//! to every represented subspace.

use nalgebra::{Complex, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loops::{LoopPoly, TangentPoly};
use crate::mat::{self, inner, CMatrix};

type CVector = DVector<Complex<f64>>;

const ORTHO_TOL: f64 = 1e-9;

/// Residual below which a loop-image condition counts as satisfied.
pub const GR0K_TOL: f64 = 1e-8;

/// Which representation realizes the fiber of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rep {
    /// `V = ℂⁿ`, loops act by left multiplication; `d = n`.
    Fundamental,
    /// `V = sl(n, ℂ)`, loops act by conjugation; `d = n² - 1`.
    Adjoint,
}

impl Rep {
    pub fn fiber_dim(self, n: usize) -> usize {
        match self {
            Rep::Fundamental => n,
            Rep::Adjoint => n * n - 1,
        }
    }
}

/// Orthonormal real basis of sl(n, ℂ) for the trace pairing `tr(x†y)`:
/// the diagonal traceless directions first, then the elementary
/// off-diagonal matrices in row-major order.
pub fn sl_basis(n: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(n * n - 1);
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..k {
            m[(i, i)] = Complex::new(scale, 0.0);
        }
        m[(k, k)] = Complex::new(-(k as f64) * scale, 0.0);
        basis.push(m);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut m = CMatrix::zeros(n, n);
                m[(i, j)] = Complex::new(1.0, 0.0);
                basis.push(m);
            }
        }
    }
    basis
}

fn matrix_to_coords(m: &CMatrix, basis: &[CMatrix]) -> CVector {
    CVector::from_iterator(basis.len(), basis.iter().map(|e| inner(e, m).expect("same shape")))
}

fn coords_to_matrix(v: &CVector, basis: &[CMatrix]) -> CMatrix {
    let n = basis[0].nrows();
    let mut m = CMatrix::zeros(n, n);
    for (c, e) in v.iter().zip(basis) {
        m += e * *c;
    }
    m
}

/// Matrix of `ρ(k)` on the fiber: `k` itself in the fundamental
/// representation, the conjugation action `x ↦ kxk⁻¹` in the adjoint.
pub fn rep_matrix(k: &CMatrix, rep: Rep) -> Result<CMatrix> {
    let n = k.nrows();
    if k.ncols() != n {
        return Err(Error::Dimension("group element must be square".into()));
    }
    if mat::unitary_error(k) > 1e-8 {
        return Err(Error::Domain(format!(
            "group element is not unitary: residual {:e}",
            mat::unitary_error(k)
        )));
    }
    match rep {
        Rep::Fundamental => Ok(k.clone()),
        Rep::Adjoint => {
            let basis = sl_basis(n);
            let d = basis.len();
            let mut out = CMatrix::zeros(d, d);
            for (b, eps) in basis.iter().enumerate() {
                let col = matrix_to_coords(&(k * eps * k.adjoint()), &basis);
                out.set_column(b, &col);
            }
            Ok(out)
        }
    }
}

/// Fourier coefficients of `ρ(γ(z))` as a loop of `d × d` matrices.
///
/// For the adjoint representation the coefficients of `x ↦ γ(z)xγ(z)⁻¹`
/// come from the Cauchy product of `γ` with `γ⁻¹`, so the degree bound
/// doubles.
pub fn rep_loop(gamma: &LoopPoly, rep: Rep) -> LoopPoly {
    match rep {
        Rep::Fundamental => gamma.clone(),
        Rep::Adjoint => {
            let n = gamma.size();
            let basis = sl_basis(n);
            let d = basis.len();
            let m = gamma.degree() as i64;
            let out_m = 2 * gamma.degree();
            let mut coeffs = vec![CMatrix::zeros(d, d); 2 * out_m + 1];
            for (b, eps) in basis.iter().enumerate() {
                for k in -m..=m {
                    let left = gamma.coeff(k) * eps;
                    for l in -m..=m {
                        // coefficient l of γ⁻¹ is A_{-l}†
                        let term = &left * gamma.coeff(-l).adjoint();
                        let col = matrix_to_coords(&term, &basis);
                        let f = (k + l + out_m as i64) as usize;
                        for a in 0..d {
                            coeffs[f][(a, b)] += col[a];
                        }
                    }
                }
            }
            LoopPoly::new(d, out_m, coeffs)
                .expect("the conjugation action of a unitary loop is a unitary loop")
        }
    }
}

/// Degree window `[lo, hi)` with fiber dimension `d`. Basis vectors are
/// `ε_i z^k` ordered by degree, then fiber index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
    pub d: usize,
}

impl Window {
    pub fn new(lo: i64, hi: i64, d: usize) -> Result<Self> {
        if !(lo < 0 && 0 <= hi) || hi - lo < 1 || d == 0 {
            return Err(Error::Window(format!(
                "window needs lo < 0 <= hi, hi - lo >= 1 and d >= 1; got lo={lo} hi={hi} d={d}"
            )));
        }
        Ok(Self { lo, hi, d })
    }

    /// Smallest window with top `hi` whose lower margin covers a loop of
    /// representation degree `rep_degree`.
    pub fn covering(rep_degree: usize, hi: i64, d: usize) -> Result<Self> {
        Self::new(-(rep_degree as i64 + hi), hi, d)
    }

    /// Ambient dimension `d·(hi - lo)`.
    pub fn rows(&self) -> usize {
        self.d * (self.hi - self.lo) as usize
    }

    fn row(&self, degree: i64, fiber: usize) -> usize {
        debug_assert!(degree >= self.lo && degree < self.hi && fiber < self.d);
        (degree - self.lo) as usize * self.d + fiber
    }
}

/// A subspace of the window model: orthonormal basis of `W/z^hi·H₊`.
#[derive(Debug, Clone)]
pub struct GrassPoint {
    window: Window,
    basis: CMatrix,
}

impl GrassPoint {
    /// Orthonormalize a spanning set of window vectors into a point.
    pub fn from_basis(window: Window, columns: &CMatrix) -> Result<Self> {
        if columns.nrows() != window.rows() {
            return Err(Error::Dimension(format!(
                "basis has {} rows but the window requires {}",
                columns.nrows(),
                window.rows()
            )));
        }
        let cols: Vec<CVector> = (0..columns.ncols()).map(|j| columns.column(j).into()).collect();
        let basis = mat::orthonormal_columns(&cols, ORTHO_TOL);
        if basis.ncols() == 0 {
            return Err(Error::Domain("subspace must be nonzero".into()));
        }
        Ok(Self { window, basis })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// `‖B†B - I‖`, which every operation keeps below 1e-10.
    pub fn orthonormality_error(&self) -> f64 {
        mat::unitary_error(&self.basis)
    }

    /// Orthogonal projector `BB†` onto the subspace.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Frobenius distance of projectors; the subspace metric used for
    /// all equality checks.
    pub fn projector_distance(&self, other: &GrassPoint) -> Result<f64> {
        if self.window != other.window {
            return Err(Error::Dimension("projector distance needs equal windows".into()));
        }
        Ok((self.projector() - other.projector()).norm())
    }

    /// Debug dump `{window:{lo,hi,d}, basis:[[re,im],…]}` with basis
    /// entries flattened row-major.
    pub fn to_debug_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            window: &'a Window,
            basis: Vec<[f64; 2]>,
        }
        let mut entries = Vec::with_capacity(self.basis.len());
        for i in 0..self.basis.nrows() {
            for j in 0..self.basis.ncols() {
                let z = self.basis[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        serde_json::to_string(&Dump { window: &self.window, basis: entries })
            .expect("serializable")
    }
}

/// Embed a loop as the subspace `ρ(γ)·H₊` in the window model.
///
/// The window must cover the representation degree `m` of the loop:
/// `-lo ≥ m + hi` for the lower margin, and `hi ≥ m` so the implicit
/// tail `z^hi·H₊` really is contained in the subspace.
pub fn embed(gamma: &LoopPoly, rep: Rep, window: Window) -> Result<GrassPoint> {
    let rho = rep_loop(gamma, rep);
    embed_rep(&rho, window)
}

fn embed_rep(rho: &LoopPoly, window: Window) -> Result<GrassPoint> {
    let d = rho.size();
    if window.d != d {
        return Err(Error::Dimension(format!(
            "window fiber dimension {} does not match the representation dimension {d}",
            window.d
        )));
    }
    let m = rho.degree() as i64;
    if -window.lo < m + window.hi || window.hi < m {
        return Err(Error::Window(format!(
            "window [{}, {}) cannot hold a representation of degree {m}: need -lo >= m + hi and hi >= m",
            window.lo, window.hi
        )));
    }
    // Classes of ρ(γ)·ε_i z^j modulo z^hi·H₊; beyond j = hi + m - 1 the
    // class is zero.
    let mut spanning = Vec::with_capacity(((window.hi + m) as usize) * d);
    for j in 0..window.hi + m {
        for i in 0..d {
            let mut v = CVector::zeros(window.rows());
            for k in -m..=m {
                let deg = j + k;
                if deg >= window.lo && deg < window.hi {
                    let col = rho.coeff(k).column(i).into_owned();
                    for a in 0..d {
                        v[window.row(deg, a)] += col[a];
                    }
                }
            }
            spanning.push(v);
        }
    }
    let basis = mat::orthonormal_columns(&spanning, ORTHO_TOL);
    Ok(GrassPoint { window, basis })
}

/// Apply a represented loop to a subspace: `W ↦ ρ·W`. This realizes the
/// composition rule `φ(γ₁γ₂) = ρ(γ₁)·φ(γ₂)`.
pub fn apply_loop(rho: &LoopPoly, w: &GrassPoint) -> Result<GrassPoint> {
    let window = w.window;
    let d = rho.size();
    if window.d != d {
        return Err(Error::Dimension(format!(
            "window fiber dimension {} does not match the representation dimension {d}",
            window.d
        )));
    }
    let m = rho.degree() as i64;
    if -window.lo < m + window.hi {
        return Err(Error::Window(format!(
            "window [{}, {}) too small to multiply by a degree-{m} loop",
            window.lo, window.hi
        )));
    }
    let mut spanning: Vec<CVector> = Vec::with_capacity(w.dim() + (m as usize) * d);
    // convolution of each basis vector with ρ, truncated to the window
    for c in 0..w.dim() {
        let mut v = CVector::zeros(window.rows());
        for deg in window.lo..window.hi {
            for k in -m..=m {
                let src = deg - k;
                if src >= window.lo && src < window.hi {
                    let block = rho.coeff(k);
                    for a in 0..d {
                        let mut acc = Complex::new(0.0, 0.0);
                        for b in 0..d {
                            acc += block[(a, b)] * w.basis[(window.row(src, b), c)];
                        }
                        v[window.row(deg, a)] += acc;
                    }
                }
            }
        }
        spanning.push(v);
    }
    // the implicit tail of W maps to ρ·z^hi·H₊, whose nonzero classes
    // are the images of ε_i z^{hi+j} for 0 ≤ j < m
    for j in 0..m {
        for i in 0..d {
            let mut v = CVector::zeros(window.rows());
            for k in -m..=m {
                let deg = window.hi + j + k;
                if deg >= window.lo && deg < window.hi {
                    let col = rho.coeff(k).column(i).into_owned();
                    for a in 0..d {
                        v[window.row(deg, a)] += col[a];
                    }
                }
            }
            spanning.push(v);
        }
    }
    let basis = mat::orthonormal_columns(&spanning, ORTHO_TOL);
    Ok(GrassPoint { window, basis })
}

/// The circle-and-group action on subspaces: degree-`j` components pick
/// up the phase `e^{ijs}` and the fiber is rotated by `ρ(k)`.
pub fn act_gr(s: f64, k: &CMatrix, rep: Rep, w: &GrassPoint) -> Result<GrassPoint> {
    let window = w.window;
    let rk = rep_matrix(k, rep)?;
    if rk.nrows() != window.d {
        return Err(Error::Dimension(format!(
            "representation dimension {} does not match the window fiber {}",
            rk.nrows(),
            window.d
        )));
    }
    let mut cols = Vec::with_capacity(w.dim());
    for c in 0..w.dim() {
        let mut v = CVector::zeros(window.rows());
        for deg in window.lo..window.hi {
            let phase = Complex::from_polar(1.0, deg as f64 * s);
            for a in 0..window.d {
                let mut acc = Complex::new(0.0, 0.0);
                for b in 0..window.d {
                    acc += rk[(a, b)] * w.basis[(window.row(deg, b), c)];
                }
                v[window.row(deg, a)] = acc * phase;
            }
        }
        cols.push(v);
    }
    let basis = mat::orthonormal_columns(&cols, ORTHO_TOL);
    Ok(GrassPoint { window, basis })
}

/// The involution on subspaces: coefficients conjugate entrywise,
/// degrees unchanged. Exactly involutive.
pub fn tau_hat(w: &GrassPoint) -> GrassPoint {
    GrassPoint { window: w.window, basis: w.basis.map(|z| z.conj()) }
}

/// Multiplication by `z` inside the window model: degrees shift up by
/// one and the top class is absorbed by the implicit tail.
pub fn mul_z(w: &GrassPoint) -> GrassPoint {
    let window = w.window;
    let cols: Vec<CVector> = (0..w.dim())
        .map(|c| {
            let mut v = CVector::zeros(window.rows());
            for deg in window.lo..window.hi - 1 {
                for a in 0..window.d {
                    v[window.row(deg + 1, a)] = w.basis[(window.row(deg, a), c)];
                }
            }
            v
        })
        .collect();
    let basis = mat::orthonormal_columns(&cols, ORTHO_TOL);
    GrassPoint { window, basis }
}

/// Residual of the containment `zW ⊆ W`: `‖(I - P_W)·z·basis‖`.
pub fn containment_residual(w: &GrassPoint) -> f64 {
    let window = w.window;
    let proj = w.projector();
    let mut worst: f64 = 0.0;
    for c in 0..w.dim() {
        let mut v = CVector::zeros(window.rows());
        for deg in window.lo..window.hi - 1 {
            for a in 0..window.d {
                v[window.row(deg + 1, a)] = w.basis[(window.row(deg, a), c)];
            }
        }
        let res = (&v - &proj * &v).norm();
        worst = worst.max(res);
    }
    worst
}

/// Joint report on the three subspace conditions that characterize loop
/// images: `zW ⊆ W`, `zW = W̄^⊥`, and pointwise bracket involutivity.
#[derive(Debug, Clone)]
pub struct Gr0kReport {
    pub z_residual: f64,
    pub perp_residual: f64,
    pub bracket_residual: f64,
}

impl Gr0kReport {
    pub fn passes(&self) -> bool {
        self.z_residual <= GR0K_TOL
            && self.perp_residual <= GR0K_TOL
            && self.bracket_residual <= GR0K_TOL
    }
}

/// Check the three loop-image conditions on an adjoint-representation
/// subspace. The perpendicularity and bracket conditions are only
/// meaningful for the adjoint fiber, so any other representation is a
/// domain error.
pub fn check_gr0k(w: &GrassPoint, rep: Rep) -> Result<Gr0kReport> {
    if rep != Rep::Adjoint {
        return Err(Error::Domain(
            "the perpendicularity and bracket conditions require the adjoint representation".into(),
        ));
    }
    let d = w.window.d;
    let n = (2..=16)
        .find(|n| n * n - 1 == d)
        .ok_or_else(|| Error::Domain(format!("{d} is not the dimension of any sl(n)")))?;

    Ok(Gr0kReport {
        z_residual: containment_residual(w),
        perp_residual: perp_residual(w),
        bracket_residual: bracket_residual(w, n),
    })
}

/// Residual of `zW = W̄^⊥`, computed on a degree-symmetric enlargement of
/// the window. Conjugating a Fourier series flips degrees, so both sides
/// are realized inside degrees `[-N, N]` together with their tails:
/// `zW ⊇ z^{hi+1}H₊` and `W̄ ⊇ conj(z^hi H₊)`.
fn perp_residual(w: &GrassPoint) -> f64 {
    let win = w.window;
    let d = win.d;
    let n_big = win.hi.max(-win.lo) + 1;
    let big = Window { lo: -n_big, hi: n_big + 1, d };
    let rows = big.rows();

    let mut z_cols: Vec<CVector> = Vec::new();
    for c in 0..w.dim() {
        let mut v = CVector::zeros(rows);
        for deg in win.lo..win.hi {
            for a in 0..d {
                v[big.row(deg + 1, a)] = w.basis[(win.row(deg, a), c)];
            }
        }
        z_cols.push(v);
    }
    for deg in win.hi + 1..=n_big {
        for a in 0..d {
            let mut v = CVector::zeros(rows);
            v[big.row(deg, a)] = Complex::new(1.0, 0.0);
            z_cols.push(v);
        }
    }
    let zw = mat::orthonormal_columns(&z_cols, ORTHO_TOL);

    let mut conj_cols: Vec<CVector> = Vec::new();
    for c in 0..w.dim() {
        let mut v = CVector::zeros(rows);
        for deg in win.lo..win.hi {
            for a in 0..d {
                v[big.row(-deg, a)] = w.basis[(win.row(deg, a), c)].conj();
            }
        }
        conj_cols.push(v);
    }
    for deg in -n_big..=-win.hi {
        for a in 0..d {
            let mut v = CVector::zeros(rows);
            v[big.row(deg, a)] = Complex::new(1.0, 0.0);
            conj_cols.push(v);
        }
    }
    let wbar = mat::orthonormal_columns(&conj_cols, ORTHO_TOL);

    let p_zw = &zw * zw.adjoint();
    let p_wbar = &wbar * wbar.adjoint();
    let ident = CMatrix::identity(rows, rows);
    (p_zw - (ident - p_wbar)).norm()
}

/// Residual of bracket involutivity: the pointwise matrix bracket of any
/// two basis vectors, truncated to the window, must stay in the subspace.
fn bracket_residual(w: &GrassPoint, n: usize) -> f64 {
    let win = w.window;
    let basis = sl_basis(n);
    let proj = w.projector();
    // matrix-valued coefficients of each basis column
    let slices: Vec<Vec<CMatrix>> = (0..w.dim())
        .map(|c| {
            (win.lo..win.hi)
                .map(|deg| {
                    let v = CVector::from_iterator(
                        win.d,
                        (0..win.d).map(|a| w.basis[(win.row(deg, a), c)]),
                    );
                    coords_to_matrix(&v, &basis)
                })
                .collect()
        })
        .collect();
    let span = (win.hi - win.lo) as usize;
    let mut worst: f64 = 0.0;
    for a in 0..w.dim() {
        for b in a + 1..w.dim() {
            let mut out = CVector::zeros(win.rows());
            for p in 0..span {
                for q in 0..span {
                    let deg = win.lo + p as i64 + win.lo + q as i64;
                    if deg < win.lo || deg >= win.hi {
                        continue;
                    }
                    let comm = &slices[a][p] * &slices[b][q] - &slices[b][q] * &slices[a][p];
                    let coords = matrix_to_coords(&comm, &basis);
                    for i in 0..win.d {
                        out[win.row(deg, i)] += coords[i];
                    }
                }
            }
            let res = (&out - &proj * &out).norm();
            worst = worst.max(res);
        }
    }
    worst
}

/// The loop-space symplectic pairing `ω(X, Y) = (1/2π)∫⟨X, Y'⟩`.
///
/// Evaluated by exact equispaced quadrature and cross-checked against the
/// coefficient formula `i·Σ_k k·tr(A_k†B_k)`; the two routes must agree
/// to 1e-10.
pub fn loop_form(x: &TangentPoly, y: &TangentPoly) -> Result<f64> {
    let quad = loop_form_quadrature(x, y)?;
    let coeff = loop_form_coefficient(x, y)?;
    assert!(
        (quad - coeff).abs() <= 1e-10,
        "quadrature {quad:e} and coefficient {coeff:e} routes disagree"
    );
    Ok(quad)
}

/// Quadrature route for the loop form.
pub fn loop_form_quadrature(x: &TangentPoly, y: &TangentPoly) -> Result<f64> {
    if x.size() != y.size() {
        return Err(Error::Dimension(format!(
            "tangent sizes differ: {} vs {}",
            x.size(),
            y.size()
        )));
    }
    let nodes = 2 * (x.degree() + y.degree()) + 3;
    let mut acc = Complex::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = std::f64::consts::TAU * j as f64 / nodes as f64;
        let xv = x.eval(theta);
        // Y'(θ) = Σ il B_l e^{ilθ}
        let mut yd = CMatrix::zeros(y.size(), y.size());
        for l in -(y.degree() as i64)..=(y.degree() as i64) {
            yd += y.coeff(l)
                * Complex::from_polar(1.0, l as f64 * theta)
                * Complex::new(0.0, l as f64);
        }
        acc += inner(&xv, &yd)?;
    }
    acc /= Complex::new(nodes as f64, 0.0);
    debug_assert!(acc.im.abs() < 1e-9, "loop form should be real, got {acc}");
    Ok(acc.re)
}

/// Coefficient route for the loop form: `i·Σ_k k·tr(A_k†B_k)`.
pub fn loop_form_coefficient(x: &TangentPoly, y: &TangentPoly) -> Result<f64> {
    if x.size() != y.size() {
        return Err(Error::Dimension(format!(
            "tangent sizes differ: {} vs {}",
            x.size(),
            y.size()
        )));
    }
    let m = x.degree().max(y.degree()) as i64;
    let mut acc = Complex::new(0.0, 0.0);
    for k in -m..=m {
        acc += inner(&x.coeff(k), &y.coeff(k))? * Complex::new(0.0, k as f64);
    }
    debug_assert!(acc.im.abs() < 1e-9);
    Ok(acc.re)
}

/// Pullback of the Hilbert-Schmidt form through the embedding at the
/// identity: `dφ(X) = pr₋ ∘ L_X`, paired over the window's worth of
/// basis vectors `ε_i z^j`, `0 ≤ j < hi`. With `hi` at least the tangent
/// degree the truncated sum equals the full one.
pub fn hs_form_pullback(x: &TangentPoly, y: &TangentPoly, window: Window) -> Result<f64> {
    if x.size() != y.size() {
        return Err(Error::Dimension(format!(
            "tangent sizes differ: {} vs {}",
            x.size(),
            y.size()
        )));
    }
    if window.d != x.size() {
        return Err(Error::Dimension(format!(
            "window fiber {} does not match the fundamental fiber {}",
            window.d,
            x.size()
        )));
    }
    let m = x.degree().max(y.degree()) as i64;
    if window.hi < m {
        return Err(Error::Window(format!(
            "window top {} is below the tangent degree {m}",
            window.hi
        )));
    }
    // ⟨f_X ε_i z^j, f_Y ε_i z^j⟩ summed over the fiber index: shifts of
    // equal negative degree pair into tr(A_r†B_r).
    let mut acc = Complex::new(0.0, 0.0);
    for j in 0..window.hi {
        for r in -m..-j {
            let fwd = inner(&x.coeff(r), &y.coeff(r))?;
            let back = inner(&y.coeff(r), &x.coeff(r))?;
            acc += Complex::new(0.0, -1.0) * (fwd - back);
        }
    }
    debug_assert!(acc.im.abs() < 1e-9);
    Ok(acc.re)
}

/// Per-degree dimensions of a rotation-fixed subspace, or an error if
/// the subspace is not a direct sum of degree slices.
fn homogeneous_dims(w: &GrassPoint) -> Result<Vec<(i64, usize)>> {
    let win = w.window;
    let mut dims = Vec::new();
    let mut homogeneous: Vec<CVector> = Vec::new();
    for deg in win.lo..win.hi {
        let mut slice_cols: Vec<CVector> = Vec::new();
        for c in 0..w.dim() {
            let mut v = CVector::zeros(win.rows());
            for a in 0..win.d {
                v[win.row(deg, a)] = w.basis[(win.row(deg, a), c)];
            }
            slice_cols.push(v);
        }
        let q = mat::orthonormal_columns(&slice_cols, 1e-7);
        if q.ncols() > 0 {
            dims.push((deg, q.ncols()));
            for j in 0..q.ncols() {
                homogeneous.push(q.column(j).into());
            }
        }
    }
    let total: usize = dims.iter().map(|(_, r)| r).sum();
    if total != w.dim() {
        return Err(Error::Domain(format!(
            "subspace is not rotation-fixed: graded dimension {total} vs dim {}",
            w.dim()
        )));
    }
    let graded =
        GrassPoint { window: win, basis: mat::orthonormal_columns(&homogeneous, ORTHO_TOL) };
    let dist = graded.projector_distance(w)?;
    if dist > 1e-8 {
        return Err(Error::Domain(format!(
            "subspace is not rotation-fixed: graded projector distance {dist:e}"
        )));
    }
    Ok(dims)
}

/// Rotation weight of the determinant line by degree bookkeeping: the
/// sum of degrees of a homogeneous basis of `W` minus the same sum for
/// the reference subspace. Basis-independent for rotation-fixed points.
pub fn rotation_weight(w: &GrassPoint, reference: &GrassPoint) -> Result<i64> {
    if w.window != reference.window {
        return Err(Error::Dimension("rotation weight needs equal windows".into()));
    }
    let a: i64 = homogeneous_dims(w)?.iter().map(|(deg, r)| deg * *r as i64).sum();
    let b: i64 = homogeneous_dims(reference)?.iter().map(|(deg, r)| deg * *r as i64).sum();
    Ok(a - b)
}

/// Brute-force oracle for [`rotation_weight`]: rotate the subspace by
/// several angles, read the phase picked up by the top wedge through
/// `det(B†R(s)B)`, and fit the integer exponent.
pub fn rotation_weight_phase_fit(w: &GrassPoint, reference: &GrassPoint) -> Result<i64> {
    if w.window != reference.window {
        return Err(Error::Dimension("rotation weight needs equal windows".into()));
    }
    let bound: i64 = {
        let win = w.window;
        let max_abs = win.hi.abs().max(win.lo.abs());
        (w.dim().max(reference.dim()) as i64) * max_abs + 1
    };
    let delta = std::f64::consts::PI / (2 * bound + 1) as f64;
    let phase = |gp: &GrassPoint, s: f64| -> Result<Complex<f64>> {
        let win = gp.window;
        let mut rotated = gp.basis.clone();
        for deg in win.lo..win.hi {
            let ph = Complex::from_polar(1.0, deg as f64 * s);
            for a in 0..win.d {
                for c in 0..gp.dim() {
                    rotated[(win.row(deg, a), c)] *= ph;
                }
            }
        }
        let m = gp.basis.adjoint() * rotated;
        let det = m.lu().determinant();
        if (det.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "subspace is not rotation-fixed: |det| = {} at angle {s}",
                det.norm()
            )));
        }
        Ok(det)
    };
    let rel = |s: f64| -> Result<Complex<f64>> { Ok(phase(w, s)? * phase(reference, s)?.conj()) };
    let first = rel(delta)?;
    let weight = (first.arg() / delta).round() as i64;
    for mult in [1.0, 2.0, 3.0, 7.5] {
        let s = delta * mult;
        let observed = rel(s)?;
        let predicted = Complex::from_polar(1.0, weight as f64 * s);
        if (observed - predicted).norm() > 1e-6 {
            return Err(Error::Domain(format!(
                "phase fit failed at angle {s}: observed {observed}, predicted {predicted}"
            )));
        }
    }
    Ok(weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{random_unitary, Coweight};
    use crate::loops::sample_loop;
    use crate::seeds;

    fn cw(entries: &[i64]) -> Coweight {
        Coweight::new(entries.to_vec()).unwrap()
    }

    fn fund_window(gamma: &LoopPoly, hi: i64) -> Window {
        let m = gamma.degree() as i64;
        let top = hi.max(m);
        Window::covering(m as usize, top, gamma.size()).unwrap()
    }

    fn adj_window(gamma: &LoopPoly, extra: i64) -> Window {
        let m = 2 * gamma.degree() as i64;
        Window::covering(m as usize, m + extra, gamma.size() * gamma.size() - 1).unwrap()
    }

    #[test]
    fn sl_basis_is_orthonormal_traceless_and_real() {
        for n in 2..=3 {
            let basis = sl_basis(n);
            assert_eq!(basis.len(), n * n - 1);
            for (i, a) in basis.iter().enumerate() {
                assert!(a.trace().norm() < 1e-14);
                assert!(a.iter().all(|z| z.im == 0.0));
                for (j, b) in basis.iter().enumerate() {
                    let p = inner(a, b).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((p - Complex::new(expect, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn adjoint_rep_loop_matches_pointwise_conjugation() {
        let l = sample_loop(1, 2, 2, 1, false).unwrap();
        let rho = rep_loop(&l, Rep::Adjoint);
        assert_eq!(rho.size(), 3);
        assert_eq!(rho.degree(), 2 * l.degree());
        let basis = sl_basis(2);
        for theta in [0.3, 1.7] {
            let g = l.eval(theta);
            let r = rho.eval(theta);
            for (b, eps) in basis.iter().enumerate() {
                let direct = matrix_to_coords(&(&g * eps * g.adjoint()), &basis);
                let via_rep = r.column(b).into_owned();
                assert!((direct - via_rep).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn embed_identity_gives_the_positive_half_space() {
        let window = Window::new(-3, 2, 2).unwrap();
        let w = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
        assert_eq!(w.dim(), 4); // d·hi classes
        let proj = w.projector();
        for deg in window.lo..window.hi {
            for a in 0..2 {
                let idx = window.row(deg, a);
                let expect = if deg >= 0 { 1.0 } else { 0.0 };
                assert!((proj[(idx, idx)].re - expect).abs() < 1e-12, "deg {deg}");
            }
        }
    }

    #[test]
    fn embed_coweight_loop_shifts_coordinate_degrees() {
        let window = Window::new(-4, 3, 2).unwrap();
        let w = embed(&LoopPoly::coweight(&cw(&[1, -1])), Rep::Fundamental, window).unwrap();
        assert_eq!(w.dim(), 6);
        let proj = w.projector();
        for deg in window.lo..window.hi {
            // e1 degrees shift by +1, e2 degrees by -1
            let e1 = if deg >= 1 { 1.0 } else { 0.0 };
            let e2 = if deg >= -1 { 1.0 } else { 0.0 };
            assert!((proj[(window.row(deg, 0), window.row(deg, 0))].re - e1).abs() < 1e-12);
            assert!((proj[(window.row(deg, 1), window.row(deg, 1))].re - e2).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_rejects_undersized_windows() {
        let l = sample_loop(2, 2, 2, 2, false).unwrap();
        let window = Window::new(-1, 1, 2).unwrap();
        assert!(matches!(embed(&l, Rep::Fundamental, window), Err(Error::Window(_))));
    }

    #[test]
    fn embedding_respects_loop_composition() {
        // φ(γ₁γ₂) = ρ(γ₁)·φ(γ₂) as subspaces
        let g1 = sample_loop(3, 2, 1, 1, false).unwrap();
        let g2 = sample_loop(4, 2, 1, 1, false).unwrap();
        let prod = g1.multiply(&g2).unwrap();
        let hi = prod.degree() as i64;
        let window = Window::new(-(2 * hi + 2), hi, 2).unwrap();
        let lhs = embed(&prod, Rep::Fundamental, window).unwrap();
        let rhs = apply_loop(
            &rep_loop(&g1, Rep::Fundamental),
            &embed(&g2, Rep::Fundamental, window).unwrap(),
        )
        .unwrap();
        assert!(lhs.projector_distance(&rhs).unwrap() <= 1e-9);
    }

    #[test]
    fn embedding_is_injective_on_samples() {
        let loops: Vec<LoopPoly> =
            (0..20).map(|s| sample_loop(s, 2, 2, 1, false).unwrap()).collect();
        let window = Window::new(-6, 3, 2).unwrap();
        let points: Vec<GrassPoint> =
            loops.iter().map(|l| embed(l, Rep::Fundamental, window).unwrap()).collect();
        for i in 0..loops.len() {
            for j in i + 1..loops.len() {
                let dist = points[i].projector_distance(&points[j]).unwrap();
                if loops[i].coeff_distance(&loops[j]) > 1e-12 {
                    assert!(dist > 1e-6, "loops {i},{j} collapsed: {dist:e}");
                }
            }
        }
    }

    #[test]
    fn act_gr_fixes_the_base_point_under_rotation() {
        let window = Window::new(-3, 2, 2).unwrap();
        let h_plus = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
        let moved = act_gr(0.9, &mat::identity(2), Rep::Fundamental, &h_plus).unwrap();
        assert!(h_plus.projector_distance(&moved).unwrap() < 1e-12);
    }

    #[test]
    fn act_gr_is_equivariant_with_the_loop_action() {
        for seed in 0..10u64 {
            let l = sample_loop(seed, 2, 2, 1, false).unwrap();
            let k = random_unitary(seeds::split(seed, "gr"), 2, false);
            let s = 0.2 + 0.37 * seed as f64;
            let window = fund_window(&l, l.degree() as i64 + 1);
            let w = embed(&l, Rep::Fundamental, window).unwrap();
            let lhs = act_gr(s, &k, Rep::Fundamental, &w).unwrap();
            let rhs = embed(&l.act(s, &k).unwrap(), Rep::Fundamental, window).unwrap();
            assert!(lhs.projector_distance(&rhs).unwrap() <= 1e-8, "seed {seed}");
        }
    }

    #[test]
    fn rotation_fixes_coweight_subspaces() {
        let l = LoopPoly::coweight(&cw(&[1, -1]));
        let window = fund_window(&l, 2);
        let w = embed(&l, Rep::Fundamental, window).unwrap();
        let moved = act_gr(1.3, &mat::identity(2), Rep::Fundamental, &w).unwrap();
        assert!(w.projector_distance(&moved).unwrap() < 1e-12);
    }

    #[test]
    fn tau_hat_fixes_real_subspaces_and_is_involutive() {
        let window = Window::new(-3, 2, 2).unwrap();
        let h_plus = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
        assert!(tau_hat(&h_plus).projector_distance(&h_plus).unwrap() < 1e-13);
        let l = sample_loop(5, 2, 2, 1, false).unwrap();
        let w = embed(&l, Rep::Fundamental, fund_window(&l, 3)).unwrap();
        let back = tau_hat(&tau_hat(&w));
        assert!((back.basis() - w.basis()).norm() == 0.0);
    }

    #[test]
    fn tau_hat_intertwines_the_loop_involution() {
        for seed in 0..20u64 {
            let l = sample_loop(seed, 2, 2, 1, false).unwrap();
            let window = fund_window(&l, 3);
            let lhs = tau_hat(&embed(&l, Rep::Fundamental, window).unwrap());
            let rhs = embed(&l.tau(), Rep::Fundamental, window).unwrap();
            assert!(lhs.projector_distance(&rhs).unwrap() <= 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn z_multiplication_commutes_with_tau_hat() {
        let l = sample_loop(6, 2, 2, 1, false).unwrap();
        let w = embed(&l, Rep::Fundamental, fund_window(&l, 3)).unwrap();
        let a = mul_z(&tau_hat(&w));
        let b = tau_hat(&mul_z(&w));
        assert!(a.projector_distance(&b).unwrap() <= 1e-12);
    }

    #[test]
    fn gr0k_passes_on_adjoint_embeddings() {
        for seed in 0..5u64 {
            let l = sample_loop(seed, 2, 1, 1, false).unwrap();
            let w = embed(&l, Rep::Adjoint, adj_window(&l, 1)).unwrap();
            let report = check_gr0k(&w, Rep::Adjoint).unwrap();
            assert!(report.passes(), "seed {seed}: {report:?}");
        }
    }

    #[test]
    fn gr0k_rejects_fundamental_representation() {
        let l = LoopPoly::identity(2);
        let w = embed(&l, Rep::Fundamental, Window::new(-2, 1, 2).unwrap()).unwrap();
        assert!(matches!(check_gr0k(&w, Rep::Fundamental), Err(Error::Domain(_))));
    }

    #[test]
    fn gr0k_fails_on_random_subspaces() {
        use rand::{Rng, SeedableRng};
        let window = Window::new(-4, 2, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let cols = CMatrix::from_fn(window.rows(), 6, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let w = GrassPoint::from_basis(window, &cols).unwrap();
        let report = check_gr0k(&w, Rep::Adjoint).unwrap();
        assert!(report.z_residual > 1e-3, "{report:?}");
    }

    #[test]
    fn orthonormality_is_preserved_by_operations() {
        let l = sample_loop(7, 2, 2, 1, false).unwrap();
        let w = embed(&l, Rep::Fundamental, fund_window(&l, 3)).unwrap();
        for gp in [
            &w,
            &act_gr(0.8, &random_unitary(70, 2, false), Rep::Fundamental, &w).unwrap(),
            &tau_hat(&w),
            &mul_z(&w),
        ] {
            assert!(gp.orthonormality_error() <= 1e-10);
        }
    }

    #[test]
    fn loop_form_vanishes_on_the_diagonal_and_is_antisymmetric() {
        let x = TangentPoly::random(1, 2, 2);
        let y = TangentPoly::random(2, 2, 3);
        assert!(loop_form(&x, &x).unwrap().abs() < 1e-12);
        let xy = loop_form(&x, &y).unwrap();
        let yx = loop_form(&y, &x).unwrap();
        assert!((xy + yx).abs() < 1e-10);
    }

    #[test]
    fn loop_form_on_an_elementary_pair_matches_both_routes() {
        // A_1 = E_12 (with forced A_{-1}), B_1 = i·E_12.
        let n = 2;
        let mut e12 = CMatrix::zeros(n, n);
        e12[(0, 1)] = Complex::new(1.0, 0.0);
        let x = TangentPoly::from_positive_part(n, vec![e12.clone()]).unwrap();
        let y = TangentPoly::from_positive_part(n, vec![e12 * Complex::new(0.0, 1.0)]).unwrap();
        let quad = loop_form_quadrature(&x, &y).unwrap();
        let coeff = loop_form_coefficient(&x, &y).unwrap();
        assert!((quad - coeff).abs() < 1e-12);
        // i·[1·tr(A_1†B_1) + (-1)·tr(A_{-1}†B_{-1})] = i·(i + i) = -2
        assert!((quad - (-2.0)).abs() < 1e-12);
    }

    #[test]
    fn tau_differential_is_antisymplectic() {
        for seed in 0..20u64 {
            let x = TangentPoly::random(seed, 2, 3);
            let y = TangentPoly::random(seed + 500, 2, 3);
            let direct = loop_form(&x, &y).unwrap();
            let pulled = loop_form(&x.dtau(), &y.dtau()).unwrap();
            assert!((pulled + direct).abs() <= 1e-10, "seed {seed}");
        }
    }

    #[test]
    fn hs_pullback_equals_the_loop_form() {
        for seed in 0..50u64 {
            let n = 2 + (seed % 2) as usize;
            let x = TangentPoly::random(seed, n, 3);
            let y = TangentPoly::random(seed + 1000, n, 3);
            let window = Window::new(-4, 4, n).unwrap();
            let hs = hs_form_pullback(&x, &y, window).unwrap();
            let omega = loop_form(&x, &y).unwrap();
            assert!((hs - omega).abs() <= 1e-10, "seed {seed}: {hs} vs {omega}");
        }
    }

    #[test]
    fn hs_pullback_matches_elementary_pair_value() {
        let n = 2;
        let mut e12 = CMatrix::zeros(n, n);
        e12[(0, 1)] = Complex::new(1.0, 0.0);
        let x = TangentPoly::from_positive_part(n, vec![e12.clone()]).unwrap();
        let y = TangentPoly::from_positive_part(n, vec![e12 * Complex::new(0.0, 1.0)]).unwrap();
        let hs = hs_form_pullback(&x, &y, Window::new(-2, 2, 2).unwrap()).unwrap();
        let omega = loop_form(&x, &y).unwrap();
        assert!((hs - omega).abs() <= 1e-12);
    }

    #[test]
    fn hs_pullback_is_stable_under_window_widening() {
        let x = TangentPoly::random(30, 2, 2);
        let y = TangentPoly::random(31, 2, 2);
        let narrow = hs_form_pullback(&x, &y, Window::new(-2, 2, 2).unwrap()).unwrap();
        let wide = hs_form_pullback(&x, &y, Window::new(-2, 9, 2).unwrap()).unwrap();
        assert!((narrow - wide).abs() <= 1e-14);
    }

    #[test]
    fn hs_pullback_rejects_short_windows() {
        let x = TangentPoly::random(32, 2, 3);
        let y = TangentPoly::random(33, 2, 3);
        assert!(matches!(
            hs_form_pullback(&x, &y, Window::new(-2, 2, 2).unwrap()),
            Err(Error::Window(_))
        ));
    }

    #[test]
    fn rotation_weight_of_the_base_point_is_zero() {
        let window = Window::new(-3, 2, 2).unwrap();
        let h_plus = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
        assert_eq!(rotation_weight(&h_plus, &h_plus).unwrap(), 0);
        assert_eq!(rotation_weight_phase_fit(&h_plus, &h_plus).unwrap(), 0);
    }

    #[test]
    fn rotation_weight_agrees_with_phase_fit_on_coweights() {
        for lambda in [cw(&[1, -1]), cw(&[2, -2])] {
            let l = LoopPoly::coweight(&lambda);
            let window = fund_window(&l, l.degree() as i64 + 1);
            let w = embed(&l, Rep::Fundamental, window).unwrap();
            let reference = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
            let book = rotation_weight(&w, &reference).unwrap();
            let fit = rotation_weight_phase_fit(&w, &reference).unwrap();
            assert_eq!(book, fit, "coweight {lambda:?}");
        }
    }

    #[test]
    fn rotation_weight_of_z_shift_is_the_dimension() {
        // manual homogeneous subspace with headroom below the top degree
        let window = Window::new(-3, 3, 2).unwrap();
        let mut cols = CMatrix::zeros(window.rows(), 6);
        let mut c = 0;
        for deg in -2..1 {
            for a in 0..2 {
                cols[(window.row(deg, a), c)] = Complex::new(1.0, 0.0);
                c += 1;
            }
        }
        let w = GrassPoint::from_basis(window, &cols).unwrap();
        let shifted = mul_z(&w);
        assert_eq!(shifted.dim(), w.dim());
        assert_eq!(rotation_weight(&shifted, &w).unwrap(), w.dim() as i64);
        assert_eq!(rotation_weight_phase_fit(&shifted, &w).unwrap(), w.dim() as i64);
    }

    #[test]
    fn rotation_weight_rejects_non_homogeneous_subspaces() {
        let window = Window::new(-2, 2, 2).unwrap();
        let mut cols = CMatrix::zeros(window.rows(), 1);
        cols[(window.row(0, 0), 0)] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        cols[(window.row(1, 0), 0)] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let w = GrassPoint::from_basis(window, &cols).unwrap();
        assert!(rotation_weight(&w, &w).is_err());
    }

    #[test]
    fn diagonal_group_elements_do_not_change_the_weight() {
        // the group factor acts with unit determinant on the top wedge,
        // so conjugating both arguments is invisible to the weight
        let lambda = cw(&[1, -1]);
        let l = LoopPoly::coweight(&lambda);
        let window = fund_window(&l, 2);
        let w = embed(&l, Rep::Fundamental, window).unwrap();
        let reference = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
        let before = rotation_weight(&w, &reference).unwrap();
        let k = CMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex::from_polar(1.0, 0.7),
            Complex::from_polar(1.0, -0.7),
        ]));
        let wk = act_gr(0.0, &k, Rep::Fundamental, &w).unwrap();
        let rk = act_gr(0.0, &k, Rep::Fundamental, &reference).unwrap();
        let after = rotation_weight(&wk, &rk).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn debug_json_dump_shape() {
        let window = Window::new(-1, 1, 2).unwrap();
        let w = embed(&LoopPoly::identity(2), Rep::Fundamental, window).unwrap();
        let json: serde_json::Value = serde_json::from_str(&w.to_debug_json()).unwrap();
        assert_eq!(json["window"]["lo"], -1);
        assert_eq!(json["window"]["hi"], 1);
        assert_eq!(json["window"]["d"], 2);
        assert_eq!(json["basis"].as_array().unwrap().len(), window.rows() * w.dim());
    }
}
