mod common;

use common::{c, l2, l2_diff, Spectrum};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rst_core::estimate::{
    dos, estimate_trace, specific_heat, thermal_expectation, trace::trace_records, AveragingMode, OperatorTraces,
    Sampling, SpectrumParams, ThermalParams,
};
use rst_core::fidelity::{average_fidelity, mc_average_fidelity, KrausChannel};
use rst_core::hamiltonian::{chain_spec, Boundary, Cluster, Geometry, LatticeSpec, ObservableOperator, Onsite};
use rst_core::linalg::dot;
use rst_core::propagate::{trotter2_step, ChebyshevPropagator, EvolutionPlan, Stepper};
use rst_core::state::StateVector;
use rst_core::xeb::{hypothesis_psi, maxent_distribution, FnProbabilities};
use rst_core::{Complex64, Exec, HamiltonianOperator, Operator, RandomStateKind, SeedSpec};

const SEQ: Exec = Exec::Sequential;

fn chain(l: usize, onsite: Onsite) -> HamiltonianOperator {
    let cluster = Cluster::chain(l, Boundary::Periodic).unwrap();
    HamiltonianOperator::build_lattice(&LatticeSpec { cluster, v: 1.0, onsite, disorder_seed: 9 }).unwrap()
}

fn xxz(n: usize) -> HamiltonianOperator {
    HamiltonianOperator::build_spin_model(&chain_spec(n, Boundary::Periodic, -1.0, 1.5, 0.2).unwrap()).unwrap()
}

fn haar(d: usize, stream: u64) -> StateVector {
    RandomStateKind::GaussianNormalized.generate(d, SeedSpec::new(77, stream)).unwrap()
}

#[test]
fn odd_and_off_diagonal_moments_vanish() {
    let d = 16;
    let n = 20_000;
    for kind in RandomStateKind::ALL {
        let (mut m1, mut m11, mut m1c, mut off) =
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 0..n {
            let a = kind.generate(d, SeedSpec::new(31, k as u64)).unwrap();
            let z = a.amps();
            m1 += z[0];
            m11 += z[0] * z[1];
            m1c += z[0].conj() * z[1].conj();
            off += z[2].conj() * z[5];
        }
        let nf = n as f64;
        let scale = 1.0 / (d as f64).sqrt();
        assert!((m1 / nf).norm() < 5.0 * scale / nf.sqrt(), "{kind}");
        assert!((m11 / nf).norm() < 5.0 * scale * scale / nf.sqrt(), "{kind}");
        assert!((m1c / nf).norm() < 5.0 * scale * scale / nf.sqrt(), "{kind}");
        assert!((off / nf).norm() < 5.0 / (nf.sqrt() * d as f64), "{kind}");
    }
}

#[test]
fn permuting_amplitudes_leaves_moments_unchanged() {
    let d = 32;
    let n = 20_000;
    let perm: Vec<usize> = (0..d).map(|i| (i * 7 + 3) % d).collect();
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for k in 0..n {
        let s = haar(d, k as u64);
        let z = s.amps();
        a.push(z[0].norm_sqr().powi(2));
        b.push(z[perm[0]].norm_sqr().powi(2));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let var = |v: &[f64], m: f64| v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    let (ma, mb) = (mean(&a), mean(&b));
    let z = (ma - mb) / ((var(&a, ma) + var(&b, mb)) / n as f64).sqrt();
    assert!(z.abs() < 2.576, "z = {z}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn same_seed_same_state(seed in any::<u64>(), stream in any::<u64>(), d in 1usize..64) {
        for kind in RandomStateKind::ALL {
            let a = kind.generate(d, SeedSpec::new(seed, stream)).unwrap();
            let b = kind.generate(d, SeedSpec::new(seed, stream)).unwrap();
            prop_assert_eq!(a.amps(), b.amps());
        }
    }

    #[test]
    fn trotter_is_reversible(seed in any::<u64>(), tau in 0.01f64..0.4) {
        let h = xxz(6);
        let psi = RandomStateKind::GaussianNormalized.generate(h.dim(), SeedSpec::new(seed, 0)).unwrap();
        let fwd = EvolutionPlan::trotter2(tau, 2, h.norm_bound_1()).unwrap();
        let back = EvolutionPlan::trotter2(-tau, 2, h.norm_bound_1()).unwrap();
        let out = trotter2_step(&h, &trotter2_step(&h, &psi, &fwd).unwrap(), &back).unwrap();
        prop_assert!(l2_diff(out.amps(), psi.amps()) < 1e-10);
    }

    #[test]
    fn maxent_distribution_is_normalized(seed in any::<u64>(), mu in -0.9f64..6.0) {
        let p = haar(1 << 10, seed).probabilities();
        let v = maxent_distribution(&p, mu).unwrap();
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psi_is_non_negative(counts in proptest::collection::vec(0u64..50, 8)) {
        let total: u64 = counts.iter().sum();
        prop_assume!(total > 0);
        let map = counts.iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, c)| (i as u64, *c)).collect();
        let p = haar(8, 5).probabilities();
        prop_assert!(hypothesis_psi(&map, &p, total).unwrap() >= 0.0);
    }

    #[test]
    fn trace_of_identity_is_exact(seed in any::<u64>(), d in 2usize..200) {
        let id = ObservableOperator::Diagonal(vec![1.0; d]);
        let s = Sampling::new(RandomStateKind::GaussianNormalized, 3, AveragingMode::M1, SeedSpec::new(seed, 0));
        let est = estimate_trace(&id, &s, None, SEQ).unwrap();
        prop_assert!((est.value.re - d as f64).abs() < 1e-9 * d as f64);
    }
}

#[test]
fn maxent_distribution_is_normalized_at_twenty_qubits() {
    let d = 1usize << 20;
    let p = FnProbabilities::new(d, |j| {
        let x = ((j as f64 + 0.5) / d as f64).max(1e-300);
        -x.ln() / d as f64
    });
    let z: f64 = (0..d).map(|j| rst_core::xeb::Probabilities::prob(&p, j)).sum();
    let scaled = FnProbabilities::new(d, move |j| {
        let x = ((j as f64 + 0.5) / d as f64).max(1e-300);
        -x.ln() / (d as f64 * z)
    });
    for mu in [0.5, 1.0, 3.0] {
        let v = maxent_distribution(&scaled, mu).unwrap();
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn trotter_preserves_norm() {
    let h = xxz(8);
    let plan = EvolutionPlan::trotter2(0.05, 1, h.norm_bound_1()).unwrap();
    let stepper = Stepper::new(&h, &plan, SEQ).unwrap();
    let mut psi = haar(h.dim(), 1).into_amps();
    let mut prev = l2(&psi);
    let start = prev;
    for _ in 0..1000 {
        stepper.step(&h, &mut psi);
        let now = l2(&psi);
        assert!((now - prev).abs() < 1e-12);
        prev = now;
    }
    assert!((prev - start).abs() < 1e-9);
}

#[test]
fn schemes_agree_on_a_chain() {
    let h = chain(16, Onsite::Anderson { w: 0.5 });
    let psi = haar(16, 2).into_amps();
    let t = 5.0;
    let steps = 1000;
    let plan = EvolutionPlan::trotter2(t / steps as f64, 4, h.norm_bound_1()).unwrap();
    let stepper = Stepper::new(&h, &plan, SEQ).unwrap();
    let mut a = psi.clone();
    for _ in 0..steps {
        stepper.step(&h, &mut a);
    }
    let cheb = ChebyshevPropagator::with_bound(16, Complex64::new(0.0, -t), h.norm_bound_1(), 1e-13, SEQ).unwrap();
    let b = cheb.apply_vec(&h, &psi);
    assert!(l2_diff(&a, &b) < 1e-6, "{}", l2_diff(&a, &b));
}

#[test]
fn chebyshev_conserves_energy() {
    let h = xxz(10);
    let energy = |x: &[Complex64]| {
        let mut hx = vec![c(0.0); x.len()];
        h.apply_into(x, &mut hx, SEQ);
        dot(x, &hx).re
    };
    let plan = EvolutionPlan::chebyshev(0.3, h.norm_bound_1(), 1e-13).unwrap();
    let stepper = Stepper::new(&h, &plan, SEQ).unwrap();
    let mut psi = haar(h.dim(), 3).into_amps();
    let e0 = energy(&psi);
    for _ in 0..100 {
        stepper.step(&h, &mut psi);
    }
    assert!((energy(&psi) - e0).abs() <= 1e-8 * e0.abs().max(1.0));
}

#[test]
fn chebyshev_concentration_bound() {
    let d = 1 << 10;
    let w: Vec<f64> = (0..d).map(|i| 0.2 + (i % 13) as f64 / 6.0).collect();
    let x = ObservableOperator::Diagonal(w.clone());
    let traces = OperatorTraces::of_diagonal(&w);
    let tr = traces.tr_x.re;
    for kind in [RandomStateKind::GaussianNormalized, RandomStateKind::GaussianRaw] {
        let s = Sampling::new(kind, 200, AveragingMode::M2, SeedSpec::new(41, 0));
        let recs = trace_records(&x, &s, SEQ).unwrap();
        let rvar = traces.ratio_variance(kind, d) / (tr * tr);
        for eps in [0.05, 0.1] {
            let rate = recs.iter().filter(|r| (r.x.re / r.y - tr).abs() >= eps * tr).count() as f64 / 200.0;
            assert!(rate <= rvar / (eps * eps), "{kind} eps={eps}: {rate} vs {}", rvar / (eps * eps));
        }
    }
}

#[test]
fn windowed_dos_is_essentially_non_negative() {
    let cluster = Cluster::new(Geometry::Square, 24, 24, Boundary::Periodic).unwrap();
    let h = HamiltonianOperator::build_lattice(&LatticeSpec {
        cluster,
        v: 1.0,
        onsite: Onsite::Anderson { w: 1.0 },
        disorder_seed: 4,
    })
    .unwrap();
    let s = Sampling::new(RandomStateKind::GaussianNormalized, 4, AveragingMode::M2, SeedSpec::new(42, 0));
    let r = dos(&h, &SpectrumParams::new(300), &s, SEQ).unwrap();
    let max = r.values.iter().copied().fold(f64::MIN, f64::max);
    let min = r.values.iter().copied().fold(f64::MAX, f64::min);
    assert!(min >= -1e-3 * max, "{min} vs {max}");
}

#[test]
fn free_energy_proxy_increases_with_beta() {
    let h = xxz(8);
    let params = ThermalParams::new(Sampling::new(
        RandomStateKind::GaussianNormalized,
        8,
        AveragingMode::M2,
        SeedSpec::new(43, 0),
    ));
    let series = specific_heat(&h, &[0.2, 0.5, 1.0, 2.0, 4.0], 8, None, &params, SEQ).unwrap();
    for p in &series.points {
        assert!(p.free_energy_2beta >= p.free_energy - 1e-9, "β = {}", p.beta);
    }
}

#[test]
fn estimators_match_dense_oracle() {
    let h = xxz(8);
    let exact = Spectrum::of(&h);
    let d = h.dim();
    let w: Vec<f64> = (0..d).map(|s| (s.count_ones() as f64 - 4.0).powi(2)).collect();
    let x = ObservableOperator::Diagonal(w.clone());
    let traces = OperatorTraces::of_diagonal(&w);
    for kind in RandomStateKind::ALL {
        let s = Sampling::new(kind, 50, AveragingMode::M2, SeedSpec::new(44, 0));
        let est = estimate_trace(&x, &s, Some(&traces), SEQ).unwrap();
        let se = est.predicted_variance.unwrap().sqrt();
        assert!((est.value.re - traces.tr_x.re).abs() <= 5.0 * se + 1e-9, "{kind}");
    }
    let params = ThermalParams::new(Sampling::new(
        RandomStateKind::GaussianNormalized,
        30,
        AveragingMode::M2,
        SeedSpec::new(45, 0),
    ));
    for beta in [0.3, 1.0, 3.0] {
        let e = thermal_expectation(&h, &h, beta, &params, SEQ).unwrap();
        let (h1, _) = exact.thermal_moments(beta);
        assert!((e.value.re - h1).abs() <= 5.0 * e.stderr, "β = {beta}: {} vs {h1}", e.value.re);
    }
}

#[test]
fn unitary_conjugation_matches_recomputed_closed_form() {
    let d = 4;
    let ch = KrausChannel::random(d, 3, true, SeedSpec::new(46, 0)).unwrap();
    let haar_unitary = |stream: u64| {
        let g = DMatrix::from_fn(d, d, |i, j| {
            let z = haar(d * d, stream).amps()[i * d + j];
            z * (d as f64)
        });
        g.qr().q()
    };
    let (u, v) = (haar_unitary(10), haar_unitary(11));
    let moved = ch.conjugated(&u, &v).unwrap();
    let df = d as f64;
    let recomputed: f64 = ch
        .operators()
        .iter()
        .map(|e| {
            let m = &u * e * &v;
            m.trace().norm_sqr() + (m.adjoint() * &m).trace().re
        })
        .sum::<f64>()
        / (df * (df + 1.0));
    assert!((average_fidelity(&moved) - recomputed).abs() < 1e-12);
    let inverse = ch.conjugated(&u, &u.adjoint()).unwrap();
    assert!((average_fidelity(&inverse) - average_fidelity(&ch)).abs() < 1e-12);
}

#[test]
fn monte_carlo_stderr_scales_with_trials() {
    let ch = KrausChannel::random(4, 2, true, SeedSpec::new(47, 0)).unwrap();
    let (_, s1) = mc_average_fidelity(&ch, 4000, SeedSpec::new(48, 0), SEQ).unwrap();
    let (_, s2) = mc_average_fidelity(&ch, 8000, SeedSpec::new(48, 0), SEQ).unwrap();
    let ratio = s1 / s2;
    assert!((ratio - 2f64.sqrt()).abs() < 0.1 * 2f64.sqrt(), "{ratio}");
}
