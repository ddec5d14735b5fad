//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. A criterion passes only if its numerical
//! check holds and it finishes within its runtime budget.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use ptspec::verify::{
    self, random_jacobi, random_jacobi_pairs, random_square_well_pairs, random_square_wells, StepOptions,
};
use ptspec::{generate_pt_sequence, PeriodicCmv, PeriodicJacobi, PiecewisePotential, PtKind, Schedule};
use rand::Rng;

/// Outcome of one criterion: whether the check held, and what was measured.
struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Check {
    let v = PiecewisePotential::free(PI).unwrap();
    let n = 10_000;
    let max_err = (0..n)
        .map(|i| {
            let e = 100.0 * i as f64 / (n - 1) as f64;
            (v.discriminant(e) - 2.0 * (PI * e.sqrt()).cos()).abs()
        })
        .fold(0.0, f64::max);
    let bs = v.band_structure_window(100.0).unwrap();
    let max_gap = bs.gaps.iter().map(|g| g.length()).fold(0.0, f64::max);
    check(
        max_err <= 1e-12 && max_gap < 1e-9,
        format!(
            "max |Δ − 2cos(π√E)| = {max_err:.2e} over {n} energies; max gap {max_gap:.2e}, {} closed gaps",
            bs.closed_gap_points.len()
        ),
    )
}

fn criterion_2() -> Check {
    let j = PeriodicJacobi::new(vec![1.0, 1.0], vec![1.0, -1.0]).unwrap();
    let bs = j.band_structure().unwrap();
    let s5 = 5f64.sqrt();
    let expected = [(-s5, -1.0), (1.0, s5)];
    let parts = bs.bands.parts();
    let mut err = if parts.len() == 2 { 0.0 } else { f64::INFINITY };
    for (p, e) in parts.iter().zip(expected) {
        err = f64::max(err, (p.lo - e.0).abs().max((p.hi - e.1).abs()));
    }
    let mut edges: Vec<f64> = bs.edges.iter().map(|e| e.energy).collect();
    edges.sort_by(f64::total_cmp);
    let roots = [-s5, -1.0, 1.0, s5];
    if edges.len() == 4 {
        for (a, b) in edges.iter().zip(roots) {
            err = err.max((a - b).abs());
        }
    } else {
        err = f64::INFINITY;
    }
    check(err <= 1e-10, format!("bands {:?}, max edge error {err:.2e}", parts))
}

fn criterion_3() -> Check {
    let ens = random_jacobi(200, 3, 8).unwrap();
    let mut worst: f64 = 0.0;
    for j in &ens {
        for e in j.periodic_eigenvalues().unwrap() {
            worst = worst.max((j.discriminant(e) - 2.0).abs());
        }
        for e in j.antiperiodic_eigenvalues().unwrap() {
            worst = worst.max((j.discriminant(e) + 2.0).abs());
        }
    }
    check(
        worst < 1e-8,
        format!("200 operators, p ≤ 8: max |Δ(edge) ∓ 2| = {worst:.2e}"),
    )
}

fn criterion_4() -> Check {
    let pairs = random_jacobi_pairs(100, 4, 8).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for (a, b) in &pairs {
        let d = a.sup_distance(b).unwrap().operator_norm_bound;
        let h = a
            .band_structure()
            .unwrap()
            .bands
            .hausdorff_distance(&b.band_structure().unwrap().bands)
            .unwrap();
        worst = worst.max(h - d);
    }
    check(
        worst <= 1e-9,
        format!("100 pairs: max (d_H − norm bound) = {worst:.2e}"),
    )
}

fn criterion_5() -> Check {
    // constant shifts move every periodic eigenvalue by exactly c
    let mut shift_err: f64 = 0.0;
    for (k, v) in random_square_wells(10, 5).unwrap().iter().enumerate() {
        let c = 0.37 * (k as f64 - 4.5);
        let e1 = v.periodic_eigenvalues(20).unwrap();
        let e2 = v.shift(c).periodic_eigenvalues(20).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            shift_err = shift_err.max(((b - a).abs() - c.abs()).abs() / a.abs().max(b.abs()).max(1.0));
        }
    }
    let pairs = random_square_well_pairs(50, 5, 0.1).unwrap();
    let fit = verify::verify_edge_stability(&pairs, 20, None).unwrap();
    let replay = verify::verify_edge_stability(&pairs, 20, Some(fit.fitted_value)).unwrap();
    let ground_ok = replay.rows.iter().filter(|r| r.label == "ground-state").all(|r| r.pass);
    let ground_rows = replay.rows.iter().filter(|r| r.label == "ground-state").count();
    check(
        shift_err <= 1e-12 && fit.fitted_value.is_finite() && replay.violations == 0 && ground_ok,
        format!(
            "shift: max relative | |ΔE_n| − |c| | = {shift_err:.2e}; C1 = {:.6} fitted on 50 pairs, replay {} violations over {} rows ({ground_rows} ground-state rows)",
            fit.fitted_value, replay.violations, replay.samples
        ),
    )
}

fn criterion_6() -> Check {
    let ens = random_square_wells(50, 6).unwrap();
    let e_max = 50.0;
    let d = verify::verify_derivative_bound(&ens, e_max, None).unwrap();
    let d2 = verify::verify_derivative_bound(&ens, e_max, Some(d.fitted_value)).unwrap();
    let b = verify::verify_band_length_bound(&ens, e_max, None).unwrap();
    let b2 = verify::verify_band_length_bound(&ens, e_max, Some(b.fitted_value)).unwrap();
    let free = vec![PiecewisePotential::free(PI).unwrap()];
    let fd = verify::verify_derivative_bound(&free, 100.0, None).unwrap();
    let fb = verify::verify_band_length_bound(&free, 100.0, None).unwrap();
    check(
        d2.violations == 0 && b2.violations == 0 && fd.fitted_value.is_finite() && fb.fitted_value.is_finite(),
        format!(
            "ensemble C: derivative {:.6} ({} re-check violations), band-length {:.6} ({} re-check violations); free case: derivative C = {:.6}, band-length C = {:.6}",
            d.fitted_value, d2.violations, b.fitted_value, b2.violations, fd.fitted_value, fb.fitted_value
        ),
    )
}

fn criterion_7() -> Check {
    let seq = generate_pt_sequence(PtKind::Jacobi, 7, 4, &Schedule::default()).unwrap();
    let b = verify::step_homogeneity(
        &seq,
        &StepOptions {
            tau: 0.5,
            ..StepOptions::default()
        },
    )
    .unwrap();
    let t1 = seq.periods[b.dropped_levels];
    let k = b.constants.k;
    let formula = (1.0 / (k * t1.powi(3)) * (-k * t1).exp()).min((1.0 - b.tau) / 3.0);
    let delta_ok = (b.delta0 - formula).abs() <= 4.0 * f64::EPSILON * formula;
    let levels_ok = b.levels.iter().all(|l| l.homogeneity.as_ref().is_some_and(|h| h.pass));
    let min_density = b
        .levels
        .iter()
        .filter_map(|l| l.homogeneity.as_ref().map(|h| h.min_density))
        .fold(f64::INFINITY, f64::min);
    let replay = b.replay.as_ref();
    check(
        b.pass && delta_ok && b.tail_pass && levels_ok && replay.is_some_and(|r| r.pass),
        format!(
            "K = {k}, δ0 = {:.6e} (formula {formula:.6e}), tail {:.3e} ≤ {:.3e}, {} of {} levels certified (min density {min_density}), replay {} samples / {} failures",
            b.delta0,
            b.tail_sum,
            b.tail_threshold,
            b.levels.iter().filter(|l| l.homogeneity.as_ref().is_some_and(|h| h.pass)).count(),
            b.levels.len(),
            replay.map_or(0, |r| r.samples),
            replay.map_or(0, |r| r.failures),
        ),
    )
}

fn criterion_8() -> Check {
    let free = PeriodicCmv::free(4).unwrap().arc_band_structure().unwrap();
    let measure_err = (free.arcs.measure() - 2.0 * PI).abs();
    let a = Complex64::new(0.5, 0.0);
    let arcs = PeriodicCmv::constant(2, a).unwrap().arc_band_structure().unwrap().arcs;
    let gaps = arcs.gaps();
    let lib = if gaps.len() == 1 {
        0.5 * (gaps[0].1 - gaps[0].0)
    } else {
        f64::NAN
    };
    let angles = common::cmv_truncation_angles(&[a, a], 400);
    let oracle = angles.iter().map(|t| t.abs()).fold(f64::INFINITY, f64::min);
    let target = 2.0 * 0.5f64.asin();
    check(
        measure_err <= 1e-10 && (lib - target).abs() <= 1e-3 && (oracle - target).abs() <= 1e-3,
        format!(
            "free arc measure error {measure_err:.2e}; gap half-width {lib:.12} (library), {oracle:.12} (400×400 truncation), π/3 = {target:.12}"
        ),
    )
}

fn criterion_9() -> Check {
    let seq = generate_pt_sequence(PtKind::Jacobi, 7, 4, &Schedule::default()).unwrap();
    let r = verify::verify_semicontinuity(&seq, None, f64::INFINITY).unwrap();
    check(
        r.pass,
        format!(
            "I = [{:.6}, {:.6}]: |I ∩ Σ_N| = {:.9}, max_j |I ∩ Σ_j| = {:.9}, deficit {:.3e} ≤ 10·Σ increments = {:.3e}",
            r.interval.lo, r.interval.hi, r.deepest, r.max_measure, r.deficit, r.tolerance
        ),
    )
}

fn criterion_10() -> Check {
    let mut rng = common::rng(10);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let t = rng.random_range(0.5..6.0);
        let cells = rng.random_range(1..=6usize);
        let mut cuts: Vec<f64> = (0..cells - 1).map(|_| rng.random_range(0.0..t)).collect();
        cuts.sort_by(f64::total_cmp);
        let mut bp = vec![0.0];
        bp.extend(cuts);
        bp.push(t);
        bp.dedup();
        let values = (0..bp.len() - 1).map(|_| rng.random_range(-5.0..5.0)).collect();
        let v = PiecewisePotential::new(t, bp, values).unwrap();
        worst = worst.max(v.besicovitch_norm() - v.stepanov_norm());
    }
    let ind = PiecewisePotential::new(2.0, vec![0.0, 1.0, 2.0], vec![1.0, 0.0]).unwrap();
    let (b, s) = (ind.besicovitch_norm(), ind.stepanov_norm());
    check(
        worst <= 0.0 && b == 0.5f64.sqrt() && s == 1.0,
        format!("100 potentials: max (‖V‖_B − ‖V‖_S) = {worst:.2e}; indicator (‖V‖_B, ‖V‖_S) = ({b}, {s})"),
    )
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Check); 10] = [
        (1, "free continuum oracle", Duration::from_secs(1), criterion_1),
        (
            2,
            "period-2 Jacobi closed form",
            Duration::from_millis(100),
            criterion_2,
        ),
        (
            3,
            "discriminant/eigenvalue equivalence",
            Duration::from_secs(10),
            criterion_3,
        ),
        (4, "Hausdorff stability", Duration::from_secs(10), criterion_4),
        (5, "edge stability", Duration::from_secs(30), criterion_5),
        (
            6,
            "derivative and band-length bounds",
            Duration::from_secs(60),
            criterion_6,
        ),
        (
            7,
            "flagship step-by-step homogeneity",
            Duration::from_secs(120),
            criterion_7,
        ),
        (
            8,
            "CMV free case and constant-α gap",
            Duration::from_secs(30),
            criterion_8,
        ),
        (9, "semicontinuity", Duration::from_secs(30), criterion_9),
        (10, "norm identities", Duration::from_secs(5), criterion_10),
    ];
    let mut failed = 0;
    for (n, name, budget, run) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run);
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(c) => (c.pass && elapsed <= budget, c.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {}: {name} — {detail} [{:.3} s, budget {:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
