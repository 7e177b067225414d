//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with its runtime
//! and fails on any miss of the stated tolerance or time budget.

use std::f64::consts::FRAC_PI_8;
use std::io::Write;
use std::time::{Duration, Instant};

use direct_entanglement::cli::check::{check_product_bound, BOUND_SLACK};
use direct_entanglement::estimator::{
    concurrence_lower_bound, params_from_exponents, pareto_frontier, scatter_all, ExponentChoice,
};
use direct_entanglement::protocol::{analytic_mean, run_protocol, EnsembleModel, ProtocolConfig};
use direct_entanglement::qcore::states::{copy_labels, pair_labels, random_unitary, schmidt};
use direct_entanglement::qcore::{
    build_observable, concurrence, counterexample_state, expectation, labels, random_state,
    singlet, werner, BornDistribution, DensityMatrix, GeneratedState, Ket, ObservableLabel,
    StateKind,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const BOTH: [ObservableLabel; 2] = [ObservableLabel::V1, ObservableLabel::V2];

/// Runs `body`, prints the verdict line and panics on failure or overrun.
fn criterion(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > budget => Err(format!("{detail}; over time budget {budget:?}")),
        other => other,
    };
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FAIL", d.as_str()),
    };
    // written to the raw handle so the line survives output capture
    let line = format!(
        "{tag} criterion {id} [{name}] in {:.3}s: {detail}\n",
        elapsed.as_secs_f64()
    );
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    if let Err(d) = outcome {
        panic!("criterion {id} failed: {d}");
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ab() -> Vec<String> {
    labels(&["A", "B"])
}

fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((probs.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn criterion_1_counterexample_refutation() {
    criterion(
        1,
        "counterexample refutation",
        Duration::from_secs(1),
        || {
            let psi = counterexample_state().to_density();
            let mut values = Vec::new();
            for label in BOTH {
                let v = expectation(&build_observable(label), &psi).map_err(|e| e.to_string())?;
                ensure((v - 4.0).abs() <= 1e-12, || format!("<{label}> = {v}"))?;
                values.push(v);
            }
            for copy in [1, 2] {
                let marginal = psi
                    .partial_trace(&copy_labels(copy))
                    .map_err(|e| e.to_string())?;
                let c = concurrence(&marginal).map_err(|e| e.to_string())?;
                ensure(c.abs() <= 1e-12, || {
                    format!("marginal {copy} concurrence {c}")
                })?;
            }
            Ok(format!(
                "<V1> = {}, <V2> = {}, marginal concurrences 0",
                values[0], values[1]
            ))
        },
    );
}

#[test]
fn criterion_2_maximally_mixed_pair() {
    criterion(
        2,
        "maximally mixed pair value",
        Duration::from_secs(1),
        || {
            let single = DensityMatrix::maximally_mixed(ab()).unwrap();
            let pair = single
                .relabeled(copy_labels(1))
                .and_then(|a| a.tensor(&single.relabeled(copy_labels(2))?))
                .map_err(|e| e.to_string())?;
            let mut out = Vec::new();
            for label in BOTH {
                let v = expectation(&build_observable(label), &pair).map_err(|e| e.to_string())?;
                ensure((v + 0.5).abs() <= 1e-12, || format!("<{label}> = {v}"))?;
                out.push(format!("<{label}> = {v}"));
            }
            Ok(out.join(", "))
        },
    );
}

/// Reduced state of copies `i`, `j` of `N/2` counterexample blocks, traced out
/// of the block states themselves.
fn block_pair_state(i: usize, j: usize) -> DensityMatrix {
    let block = counterexample_state().to_density();
    let state = if i / 2 == j / 2 {
        block.reorder(&labels_for(i % 2, j % 2)).unwrap()
    } else {
        let one = |c: usize| block.partial_trace(&copy_labels(c % 2 + 1)).unwrap();
        one(i)
            .relabeled(copy_labels(1))
            .unwrap()
            .tensor(&one(j).relabeled(copy_labels(2)).unwrap())
            .unwrap()
    };
    state.relabeled(pair_labels()).unwrap()
}

fn labels_for(a: usize, b: usize) -> Vec<String> {
    let mut l = copy_labels(a + 1);
    l.extend(copy_labels(b + 1));
    l
}

/// `<Psi| V on copies (i, j) |Psi>` on the full `2N`-qubit ket, copy-major.
fn full_ket_expectation(
    psi: &[Complex64],
    qubits: usize,
    v: &[Vec<Complex64>],
    i: usize,
    j: usize,
) -> f64 {
    let pos = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1].map(|q| qubits - 1 - q);
    let sub = |x: usize| pos.iter().fold(0, |acc, &p| (acc << 1) | ((x >> p) & 1));
    let with_sub = |x: usize, s: usize| {
        pos.iter().enumerate().fold(x, |acc, (k, &p)| {
            (acc & !(1 << p)) | (((s >> (3 - k)) & 1) << p)
        })
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, amp) in psi.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let row = &v[sub(x)];
        for (s, vs) in row.iter().enumerate() {
            acc += amp.conj() * vs * psi[with_sub(x, s)];
        }
    }
    acc.re
}

#[test]
fn criterion_3_weighted_average_law() {
    criterion(3, "weighted-average law", Duration::from_secs(5), || {
        let mut sign_change = None;
        for label in BOTH {
            let obs = build_observable(label);
            let mut previous: Option<f64> = None;
            for n in (4..=40).step_by(2) {
                let mut sum = 0.0;
                for i in 0..n {
                    for j in (0..n).filter(|&j| j != i) {
                        sum += expectation(&obs, &block_pair_state(i, j))
                            .map_err(|e| e.to_string())?;
                    }
                }
                let direct = sum / (n * (n - 1)) as f64;
                let nf = n as f64;
                let law = (5.0 - nf / 2.0) / (nf - 1.0);
                ensure((direct - law).abs() <= 1e-12, || {
                    format!("{label} N={n}: {direct} vs {law}")
                })?;
                let model = EnsembleModel::CounterexampleBlocks { blocks: n / 2 };
                let lib = analytic_mean(&model, label).map_err(|e| e.to_string())?;
                ensure((lib - direct).abs() <= 1e-12, || {
                    format!("{label} N={n}: analytic_mean {lib}")
                })?;
                if n == 10 {
                    ensure(direct.abs() <= 1e-12, || {
                        format!("{label} N=10 gives {direct}")
                    })?;
                }
                if let Some(p) = previous {
                    if p > 1e-12 && direct <= 1e-12 {
                        ensure(sign_change.is_none_or(|s| s == n), || {
                            "inconsistent sign change".into()
                        })?;
                        sign_change = Some(n);
                    }
                }
                previous = Some(direct);
            }
        }
        ensure(sign_change == Some(10), || {
            format!("sign change at {sign_change:?}")
        })?;

        // full-state cross-check on small ensembles
        for n in [4usize, 6, 8] {
            let mut psi = counterexample_state();
            for _ in 1..n / 2 {
                let next = counterexample_state()
                    .relabeled(fresh_labels(psi.labels().len()))
                    .unwrap();
                psi = psi.tensor(&next).unwrap();
            }
            let amps = psi.amplitudes().to_vec();
            for label in BOTH {
                let m = build_observable(label).matrix().clone();
                let v: Vec<Vec<Complex64>> = (0..16)
                    .map(|r| (0..16).map(|c| m[(r, c)]).collect())
                    .collect();
                let mut sum = 0.0;
                for i in 0..n {
                    for j in (0..n).filter(|&j| j != i) {
                        sum += full_ket_expectation(&amps, 2 * n, &v, i, j);
                    }
                }
                let mean = sum / (n * (n - 1)) as f64;
                let nf = n as f64;
                let law = (5.0 - nf / 2.0) / (nf - 1.0);
                ensure((mean - law).abs() <= 1e-12, || {
                    format!("full ket {label} N={n}: {mean} vs {law}")
                })?;
            }
        }
        Ok("N = 4..40 match (5 - N/2)/(N - 1); zero exactly at N = 10, negative beyond".into())
    });
}

/// Four labels that do not clash with the first `taken` copy-major labels.
fn fresh_labels(taken: usize) -> Vec<String> {
    let first = taken / 2 + 1;
    let mut l = copy_labels(first);
    l.extend(copy_labels(first + 1));
    l
}

#[test]
fn criterion_4_monte_carlo_consistency() {
    criterion(
        4,
        "Monte Carlo consistency",
        Duration::from_secs(120),
        || {
            let fixtures = [
                (
                    "counterexample N=12",
                    EnsembleModel::CounterexampleBlocks { blocks: 6 },
                ),
                (
                    "iid singlet",
                    EnsembleModel::Iid {
                        rho0: singlet(ab()).to_density(),
                        copies: 10,
                    },
                ),
                (
                    "iid schmidt(pi/8)",
                    EnsembleModel::Iid {
                        rho0: schmidt(FRAC_PI_8, ab()).unwrap().to_density(),
                        copies: 10,
                    },
                ),
                (
                    "iid werner(0.9)",
                    EnsembleModel::Iid {
                        rho0: werner(0.9, ab()).unwrap(),
                        copies: 10,
                    },
                ),
            ];
            let mut worst: f64 = 0.0;
            for (k, (name, model)) in fixtures.iter().enumerate() {
                for label in BOTH {
                    let s =
                        run_protocol(model, &ProtocolConfig::new(label, 100_000, 1000 + k as u64))
                            .map_err(|e| e.to_string())?;
                    let exact = analytic_mean(model, label).map_err(|e| e.to_string())?;
                    let z = (s.v_m - exact).abs() / s.std_error;
                    ensure(s.total_pairs_measured == 100_000, || {
                        "wrong pair count".into()
                    })?;
                    ensure(z <= 4.0, || {
                        format!("{name} {label}: V_m {} vs {exact}, z = {z}", s.v_m)
                    })?;
                    worst = worst.max(z);
                }
            }
            Ok(format!(
                "all fixtures within 4 standard errors (max |z| = {worst:.2})"
            ))
        },
    );
}

#[test]
fn criterion_5_budget_sweep() {
    criterion(5, "budget sweep", Duration::from_secs(10), || {
        let v_m = 0.64;
        let point = |total: u64, alpha: f64| -> Result<(f64, f64), String> {
            let p = params_from_exponents(total, ExponentChoice::new(alpha, 0.85).unwrap())
                .map_err(|e| e.to_string())?;
            let rep = concurrence_lower_bound(v_m, &p).map_err(|e| e.to_string())?;
            Ok((rep.c_bar, rep.e))
        };
        let (c200, e200) = point(200, 0.85)?;
        ensure((0.45..=0.55).contains(&c200), || {
            format!("C_bar(200) = {c200}")
        })?;
        ensure(e200 <= 0.01, || format!("E(200) = {e200}"))?;
        let (c_big, _) = point(100_000, 0.85)?;
        ensure((c_big - 0.8).abs() <= 0.02, || {
            format!("C_bar(1e5) = {c_big}")
        })?;
        let at100: Vec<(f64, f64)> = [0.75, 0.8, 0.85]
            .iter()
            .map(|&a| point(100, a))
            .collect::<Result<_, _>>()?;
        for w in at100.windows(2) {
            ensure(w[1].1 < w[0].1, || {
                format!("E not decreasing in alpha: {at100:?}")
            })?;
            ensure(w[1].0 < w[0].0, || {
                format!("C_bar not increasing as alpha drops: {at100:?}")
            })?;
        }
        Ok(format!("C_bar(200) = {c200:.4}, E(200) = {e200:.3e}, C_bar(1e5) = {c_big:.6}; tradeoff ordered at N=100"))
    });
}

#[test]
fn criterion_6_exhaustive_scans() {
    criterion(6, "exhaustive scan", Duration::from_secs(30), || {
        let best = |total: u64| -> Result<f64, String> {
            let pts = scatter_all(total, 0.64).map_err(|e| e.to_string())?;
            let res = pareto_frontier(&pts, 1e-3).map_err(|e| e.to_string())?;
            Ok(res.best.map_or(0.0, |b| b.c_bar))
        };
        let b100 = best(100)?;
        let b200 = best(200)?;
        ensure(b100 < 0.1, || {
            format!("N=100 reaches C_bar {b100} at E <= 1e-3")
        })?;
        ensure(b200 >= 0.45, || {
            format!("N=200 only reaches C_bar {b200} at E <= 1e-3")
        })?;
        Ok(format!(
            "best C_bar at E <= 1e-3: N=100 -> {b100:.4}, N=200 -> {b200:.4}"
        ))
    });
}

#[test]
fn criterion_7_product_bound() {
    criterion(7, "product-state bound", Duration::from_secs(120), || {
        let rep = check_product_bound(10_000, 7).map_err(|e| e.to_string())?;
        let ph = &rep.product_states;
        ensure(ph.checks == 20_000, || format!("{} checks", ph.checks))?;
        ensure(ph.violations == 0, || {
            format!("{} violations beyond {BOUND_SLACK}", ph.violations)
        })?;
        ensure(rep.counterexample.violation_detected, || {
            "counterexample not detected".into()
        })?;
        Ok(format!(
            "10000 pairs x 2 observables, 0 violations (max excess {:.3e}); counterexample rhs {} > lhs {}",
            ph.max_excess, rep.counterexample.rhs_v1, rep.counterexample.lhs
        ))
    });
}

fn pure_overlap(psi: &Ket) -> f64 {
    let a = psi.amplitudes();
    let flipped = [-a[3].conj(), a[2].conj(), a[1].conj(), -a[0].conj()];
    a.iter()
        .zip(flipped)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

#[test]
fn criterion_8_concurrence_oracles() {
    criterion(8, "concurrence oracles", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut worst: f64 = 0.0;
        for k in 0..500 {
            let kind = [
                StateKind::PureHaar,
                StateKind::MixedRank(2),
                StateKind::MixedRank(3),
                StateKind::MixedRank(4),
            ][k % 4];
            let rho = random_state(kind, ab(), &mut rng).unwrap().into_density();
            let u = random_unitary(2, &mut rng)
                .kron(&random_unitary(2, &mut rng))
                .unwrap();
            let c0 = concurrence(&rho).map_err(|e| e.to_string())?;
            let c1 = concurrence(&rho.evolve(&u).unwrap()).map_err(|e| e.to_string())?;
            worst = worst.max((c0 - c1).abs());
            ensure((c0 - c1).abs() <= 1e-9, || {
                format!("local unitary case {k}: {c0} vs {c1}")
            })?;
        }
        for k in 0..500 {
            let GeneratedState::Ket(psi) =
                random_state(StateKind::PureHaar, ab(), &mut rng).unwrap()
            else {
                return Err("expected a pure state".into());
            };
            let c = concurrence(&psi.to_density()).map_err(|e| e.to_string())?;
            let o = pure_overlap(&psi);
            worst = worst.max((c - o).abs());
            ensure((c - o).abs() <= 1e-9, || {
                format!("pure case {k}: {c} vs {o}")
            })?;
        }
        for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
            let c = concurrence(&werner(p, ab()).unwrap()).map_err(|e| e.to_string())?;
            let closed = f64::max(0.0, (3.0 * p - 1.0) / 2.0);
            worst = worst.max((c - closed).abs());
            ensure((c - closed).abs() <= 1e-9, || {
                format!("werner p={p}: {c} vs {closed}")
            })?;
        }
        Ok(format!("1006 cases, max deviation {worst:.2e}"))
    });
}

#[test]
fn criterion_9_born_sampling() {
    criterion(
        9,
        "Born-sampling statistics",
        Duration::from_secs(60),
        || {
            let mm = DensityMatrix::maximally_mixed(pair_labels()).unwrap();
            let dist = BornDistribution::new(&build_observable(ObservableLabel::V1), &mm)
                .map_err(|e| e.to_string())?;
            // outcomes ascend: -4, 0, +4
            let expected = [3.0 / 16.0, 12.0 / 16.0, 1.0 / 16.0];
            ensure(dist.outcomes == [-4.0, 0.0, 4.0], || {
                format!("outcomes {:?}", dist.outcomes)
            })?;
            let mut failures = 0;
            let mut min_p: f64 = 1.0;
            for seed in 0..20u64 {
                let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
                let mut counts = [0u64; 3];
                for _ in 0..100_000 {
                    counts[dist.sample_index(&mut rng)] += 1;
                }
                let p = chi_square_p(&counts, &expected);
                min_p = min_p.min(p);
                if p <= 1e-4 {
                    failures += 1;
                }
            }
            ensure(failures <= 1, || format!("{failures} of 20 seeds rejected"))?;
            Ok(format!(
                "{failures} of 20 seeds rejected at p <= 1e-4 (min p = {min_p:.3})"
            ))
        },
    );
}
