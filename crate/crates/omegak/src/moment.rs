//! The energy/holonomy moment map of the circle-and-group action.
//!
//! For a based loop `γ` the map returns
//! `E = (1/4π) ∫ ‖γ⁻¹γ'‖²` and `p = (1/2π) ∫ γ⁻¹γ'`,
//! both evaluated by equispaced quadrature that is exact for the
//! trigonometric-polynomial integrands. The chamber sweep `Δ` pairs the
//! energy with the dominant spectrum of `p`.

use std::io::Write;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lie::{dominant_project, Coweight, DeltaCoords};
use crate::loops::{sample_loop, LoopPoly};
use crate::mat::{self, inner, CMatrix};
use crate::seeds;

/// Value of the moment map: nonnegative energy and the skew-Hermitian,
/// traceless holonomy component `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentValue {
    pub energy: f64,
    pub p: CMatrix,
}

impl MomentValue {
    pub fn new(energy: f64, p: CMatrix) -> Result<Self> {
        if !energy.is_finite() || energy < -1e-12 {
            return Err(Error::Domain(format!("energy must be nonnegative, got {energy:e}")));
        }
        if mat::skew_error(&p) > 1e-9 {
            return Err(Error::Domain(format!(
                "moment component is not skew-Hermitian: residual {:e}",
                mat::skew_error(&p)
            )));
        }
        if p.trace().norm() > 1e-9 {
            return Err(Error::Domain(format!(
                "moment component is not traceless: |tr| = {:e}",
                p.trace().norm()
            )));
        }
        let half_norm = 0.5 * inner(&p, &p)?.re;
        if energy < half_norm - 1e-8 {
            return Err(Error::Domain(format!(
                "energy {energy:e} below the Cauchy-Schwarz bound {half_norm:e}"
            )));
        }
        Ok(Self { energy: energy.max(0.0), p })
    }
}

/// A point of the chamber-restricted image: energy plus the dominant
/// spectrum of `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPoint {
    pub energy: f64,
    pub v: DeltaCoords,
}

/// Evaluate the moment map by equispaced quadrature with `8m + 3` nodes;
/// the integrands have trigonometric degree at most `4m`, so the rule is
/// exact and the only error is rounding.
pub fn moment(gamma: &LoopPoly) -> MomentValue {
    let n = gamma.size();
    let nodes = 8 * gamma.degree() + 3;
    let mut energy = 0.0;
    let mut p = CMatrix::zeros(n, n);
    for j in 0..nodes {
        let theta = std::f64::consts::TAU * j as f64 / nodes as f64;
        let x = gamma.eval(theta).adjoint() * gamma.eval_deriv(theta);
        energy += inner(&x, &x).expect("square shape").re;
        p += &x;
    }
    energy /= 2.0 * nodes as f64;
    p /= Complex::new(nodes as f64, 0.0);
    MomentValue::new(energy, p).expect("moment of a valid loop satisfies its invariants")
}

/// Torus restriction: the energy together with the orthogonal projection
/// of `p` onto the diagonal (imaginary parts of the diagonal entries).
pub fn moment_torus(gamma: &LoopPoly) -> (f64, Vec<f64>) {
    let mv = moment(gamma);
    let diag = (0..gamma.size()).map(|i| mv.p[(i, i)].im).collect();
    (mv.energy, diag)
}

/// Chamber sweep at a single loop: the dominant spectrum of `p` paired
/// with the energy. Invariant under the circle-and-group action.
pub fn delta(gamma: &LoopPoly) -> DeltaPoint {
    let mv = moment(gamma);
    let (v, _) = dominant_project(&mv.p)
        .expect("moment component is skew-Hermitian and traceless by construction");
    DeltaPoint { energy: mv.energy, v }
}

/// Closed form of the moment map at a coweight loop:
/// `(½‖Λ‖², Λ)` with `Λ = i·diag(λ)`.
pub fn coweight_moment(lambda: &Coweight) -> MomentValue {
    let p = lambda.generator();
    let energy = 0.5 * inner(&p, &p).expect("square shape").re;
    MomentValue { energy, p }
}

/// One sampled loop together with its chamber point and the sampler
/// depth that produced it.
#[derive(Debug, Clone)]
pub struct SampledDelta {
    pub point: DeltaPoint,
    pub loop_poly: LoopPoly,
    pub depth: usize,
}

/// Seeded batch of chamber points from the conjugated-coweight sampler.
///
/// Per-sample depth is uniform in `1..=max_depth`. With `e_cut` set,
/// attempts with energy above the cut are discarded and drawing continues
/// until `count` points are collected.
pub fn sample_deltas(
    seed: u64,
    n: usize,
    count: usize,
    max_depth: usize,
    max_coweight_norm: i64,
    e_cut: Option<f64>,
    real_locus: bool,
) -> Result<Vec<SampledDelta>> {
    if max_depth == 0 {
        return Err(Error::Domain("max depth must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(count);
    let budget = (count as u64).saturating_mul(1000).max(1000);
    let mut attempt = 0u64;
    while out.len() < count {
        if attempt >= budget {
            return Err(Error::Domain(format!(
                "energy cut {e_cut:?} accepted only {} of {} requested samples in {budget} draws",
                out.len(),
                count
            )));
        }
        let s = seeds::split_index(seed, attempt);
        attempt += 1;
        let mut depth_rng = ChaCha8Rng::seed_from_u64(seeds::split(s, "depth"));
        let depth = depth_rng.random_range(1..=max_depth);
        let loop_poly = sample_loop(s, n, depth, max_coweight_norm, real_locus)?;
        let point = delta(&loop_poly);
        if let Some(cut) = e_cut {
            if point.energy > cut {
                continue;
            }
        }
        out.push(SampledDelta { point, loop_poly, depth });
    }
    Ok(out)
}

/// Write chamber points as CSV: header `energy,v1,...,vn`, LF endings,
/// 17 significant digits per value.
pub fn write_delta_csv<W: Write>(mut w: W, points: &[DeltaPoint], n: usize) -> std::io::Result<()> {
    let header: Vec<String> =
        std::iter::once("energy".to_string()).chain((1..=n).map(|i| format!("v{i}"))).collect();
    w.write_all(header.join(",").as_bytes())?;
    w.write_all(b"\n")?;
    for p in points {
        let mut row = vec![format!("{:.16e}", p.energy)];
        row.extend(p.v.values().iter().map(|x| format!("{x:.16e}")));
        w.write_all(row.join(",").as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::random_unitary;
    use crate::mat::identity;

    fn cw(entries: &[i64]) -> Coweight {
        Coweight::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn moment_of_identity_loop_vanishes() {
        let mv = moment(&LoopPoly::identity(2));
        assert_eq!(mv.energy, 0.0);
        assert!(mv.p.norm() < 1e-15);
    }

    #[test]
    fn moment_of_coweight_loop_matches_closed_form() {
        // Constant-integrand closed form against the quadrature route.
        let lambda = cw(&[1, -1]);
        let mv = moment(&LoopPoly::coweight(&lambda));
        let cf = coweight_moment(&lambda);
        assert!((mv.energy - cf.energy).abs() < 1e-12);
        assert!((mv.p - cf.p).norm() < 1e-12);
        assert!((mv.energy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moment_is_conjugation_covariant() {
        let lambda = cw(&[2, -1, -1]);
        let k = random_unitary(40, 3, false);
        let l = LoopPoly::coweight(&lambda).act(0.0, &k).unwrap();
        let mv = moment(&l);
        assert!((mv.energy - 3.0).abs() < 1e-10);
        let expect = &k * lambda.generator() * k.adjoint();
        assert!((mv.p - expect).norm() < 1e-10);
    }

    #[test]
    fn torus_moment_projects_to_the_diagonal() {
        let (e0, d0) = moment_torus(&LoopPoly::identity(2));
        assert_eq!(e0, 0.0);
        assert!(d0.iter().all(|x| x.abs() < 1e-15));

        let (e1, d1) = moment_torus(&LoopPoly::coweight(&cw(&[1, -1])));
        assert!((e1 - 1.0).abs() < 1e-12);
        assert!((d1[0] - 1.0).abs() < 1e-12 && (d1[1] + 1.0).abs() < 1e-12);

        // generic conjugation moves the diagonal strictly inside
        let k = random_unitary(41, 2, false);
        let l = LoopPoly::coweight(&cw(&[1, -1])).act(0.0, &k).unwrap();
        let (_, d2) = moment_torus(&l);
        let expect = &k * cw(&[1, -1]).generator() * k.adjoint();
        assert!((d2[0] - expect[(0, 0)].im).abs() < 1e-10);
        assert!((d2[0] - 1.0).abs() > 1e-3, "conjugation left the diagonal fixed");
        assert!(d2.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn delta_sweeps_antidominant_values_into_the_chamber() {
        let dp = delta(&LoopPoly::coweight(&cw(&[-1, 1])));
        assert!((dp.energy - 1.0).abs() < 1e-12);
        assert_eq!(dp.v.values(), &[1.0, -1.0]);
    }

    #[test]
    fn delta_of_identity_is_origin() {
        let dp = delta(&LoopPoly::identity(3));
        assert_eq!(dp.energy, 0.0);
        assert!(dp.v.values().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn delta_is_invariant_under_the_action() {
        for seed in 0..10u64 {
            let l = sample_loop(seed, 2, 2, 2, false).unwrap();
            let k = random_unitary(seed + 100, 2, false);
            let moved = l.act(0.4 + seed as f64 * 0.2, &k).unwrap();
            let a = delta(&l);
            let b = delta(&moved);
            assert!((a.energy - b.energy).abs() < 1e-8);
            for (x, y) in a.v.values().iter().zip(b.v.values()) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn coweight_moment_closed_forms() {
        let z = coweight_moment(&cw(&[0, 0]));
        assert_eq!(z.energy, 0.0);
        let a = coweight_moment(&cw(&[1, -1]));
        assert!((a.energy - 1.0).abs() < 1e-15);
        assert!((a.p - cw(&[1, -1]).generator()).norm() < 1e-15);
        let b = coweight_moment(&cw(&[2, -1, -1]));
        assert!((b.energy - 3.0).abs() < 1e-15);
    }

    #[test]
    fn energy_dominates_half_norm_squared() {
        for seed in 0..50u64 {
            let l = sample_loop(seed, 2, 1 + (seed as usize % 3), 2, false).unwrap();
            let mv = moment(&l);
            let bound = 0.5 * inner(&mv.p, &mv.p).unwrap().re;
            assert!(mv.energy >= bound - 1e-8);
            // equality exactly when the logarithmic derivative is constant
            let x = l.log_derivative();
            let dynamic: f64 = (1..=(x.degree() as i64))
                .map(|k| x.coeff(k).norm() + x.coeff(-k).norm())
                .sum();
            if dynamic < 1e-6 {
                assert!((mv.energy - bound).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rotation_preserves_energy_and_conjugates_p() {
        for seed in 0..10u64 {
            let l = sample_loop(seed, 2, 2, 2, false).unwrap();
            let s = 0.25 + seed as f64 * 0.3;
            let rotated = l.act(s, &identity(2)).unwrap();
            let a = moment(&l);
            let b = moment(&rotated);
            assert!((a.energy - b.energy).abs() <= 1e-10);
            let g = l.eval(s);
            let expect = &g * &a.p * g.adjoint();
            assert!((b.p - expect).norm() <= 1e-8);
        }
    }

    #[test]
    fn group_action_is_equivariant_on_p() {
        for seed in 0..10u64 {
            let l = sample_loop(seed, 3, 2, 1, false).unwrap();
            let k = random_unitary(seed + 55, 3, false);
            let a = moment(&l);
            let b = moment(&l.act(0.0, &k).unwrap());
            let expect = &k * &a.p * k.adjoint();
            assert!((b.p - expect).norm() <= 1e-9);
        }
    }

    #[test]
    fn involution_transposes_p_and_preserves_energy() {
        for seed in 0..10u64 {
            let l = sample_loop(seed, 2, 2, 2, false).unwrap();
            let a = moment(&l);
            let b = moment(&l.tau());
            assert!((a.energy - b.energy).abs() <= 1e-10);
            assert!((b.p.clone() - a.p.transpose()).norm() <= 1e-9);
            // consequently the chamber point is unchanged
            let da = delta(&l);
            let db = delta(&l.tau());
            assert!((da.energy - db.energy).abs() <= 1e-10);
            for (x, y) in da.v.values().iter().zip(db.v.values()) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn commuting_coweight_products_add_moments() {
        let l1 = cw(&[1, -1]);
        let l2 = cw(&[2, -2]);
        let prod = LoopPoly::coweight(&l1).multiply(&LoopPoly::coweight(&l2)).unwrap();
        let mv = moment(&prod);
        let expect = coweight_moment(&cw(&[3, -3]));
        assert!((mv.energy - expect.energy).abs() <= 1e-10);
        assert!((mv.p - expect.p).norm() <= 1e-10);
    }

    #[test]
    fn sample_deltas_respects_cut_and_is_deterministic() {
        let a = sample_deltas(7, 2, 50, 3, 2, Some(6.0), false).unwrap();
        let b = sample_deltas(7, 2, 50, 3, 2, Some(6.0), false).unwrap();
        assert_eq!(a.len(), 50);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.point, y.point);
            assert_eq!(x.loop_poly, y.loop_poly);
        }
        assert!(a.iter().all(|s| s.point.energy <= 6.0));
    }

    #[test]
    fn csv_batch_export_format() {
        let points = vec![
            delta(&LoopPoly::identity(2)),
            delta(&LoopPoly::coweight(&cw(&[1, -1]))),
        ];
        let mut buf = Vec::new();
        write_delta_csv(&mut buf, &points, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("energy,v1,v2"));
        let row = lines.next().unwrap();
        assert_eq!(row.split(',').count(), 3);
        assert!(row.starts_with("0.0000000000000000e0"));
        assert!(!text.contains('\r'));
    }
}
