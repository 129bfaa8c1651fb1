//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! numbers alongside. Exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use mbent::appendix::{
    count_xi, monte_carlo_phase_avg, optimal_phase_random_avg, phase_random_avg,
    verify_optimal_initial, xi_to_avg, xi_to_exact_avg, AmplitudeProfile,
};
use mbent::closed_form::{
    avg_uniform_single, bounds_uniform_up_to, corr_x_site_single, double_factorial_ratio,
    emw_uniform_single, CorrelationBranch, EvolutionFormula,
};
use mbent::degeneracy::exact_infinite_avg;
use mbent::hamiltonian::{eigenphase_table, evolve};
use mbent::oracle::{correlation, meyer_wallach};
use mbent::random::{sample_typical, typical_avg};
use mbent::stats::{finite_stats, fit_exponent, ks_two_sample, series, FitAxis, TimeGrid};
use mbent::{Axis, HamiltonianKind, HamiltonianSpec, LocalFields, SeededSampler, StrengthSchedule};

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "MISS" }));
    }
}

fn poly() -> StrengthSchedule {
    StrengthSchedule::polynomial(StrengthSchedule::reference_epsilon())
}

fn closed_form_matches_oracle() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let sampler = SeededSampler::new(101);
    let mut rng = sampler.rng();
    for kind in HamiltonianKind::ALL {
        let mut worst = 0.0f64;
        let mut cases = 0;
        for spins in [4, 6, 8] {
            for n in 2..=spins {
                let spec = HamiltonianSpec::family(kind, spins, n, 1.0, poly(), &mut rng).unwrap();
                let formula = EvolutionFormula::for_spec(&spec).unwrap();
                let table = eigenphase_table(&spec).unwrap();
                for _ in 0..50 {
                    let t = 20.0 * rng.random::<f64>();
                    let oracle = meyer_wallach(&table.evolve_plus(t)).unwrap();
                    worst = worst.max((formula.emw(t) - oracle).abs());
                }
                cases += 1;
            }
        }
        out.check(
            worst <= 1e-10,
            format!(
                "{}: {cases} (N, n) cases, max |diff| = {worst:.2e}",
                kind.label()
            ),
        );
    }
    let elapsed = start.elapsed();
    out.check(
        elapsed < Duration::from_secs(120),
        format!("runtime {elapsed:.2?}"),
    );
    out
}

fn uniform_single_averages() -> Outcome {
    let mut out = Outcome::new();
    for n in 2..=6 {
        let expected = 1.0 - double_factorial_ratio(n as u64);
        let spec = HamiltonianSpec::uniform_single(8, n, 1.0).unwrap();
        let exact = exact_infinite_avg(&spec).unwrap();
        out.check(
            (exact - expected).abs() <= 1e-12,
            format!("n={n}: counted {exact:.15} vs double factorial {expected:.15}"),
        );
        // One period of cos^{2n}(2Jt) is π/2.
        let m = 100_000;
        let values: Vec<f64> = (0..m)
            .map(|k| emw_uniform_single(n, 1.0, PI / 2.0 * k as f64 / m as f64))
            .collect();
        let (mean, _) = finite_stats(&values).unwrap();
        out.check(
            (mean - avg_uniform_single(n).exact).abs() <= 1e-4,
            format!("n={n}: one-period quadrature {mean:.8}"),
        );
    }
    out
}

fn site_single_equality_case() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = SeededSampler::new(202).rng();
    for spins in 10..=12 {
        for n in 2..=5 {
            let spec = HamiltonianSpec::family(
                HamiltonianKind::SiteSingle,
                spins,
                n,
                1.0,
                poly(),
                &mut rng,
            )
            .unwrap();
            let exact = exact_infinite_avg(&spec).unwrap();
            let bound = 1.0 - 2f64.powi(-(n as i32));
            out.check(
                exact == bound,
                format!("N={spins} n={n}: {exact} vs {bound}"),
            );
        }
    }
    out
}

fn typical_entanglement() -> Outcome {
    let mut out = Outcome::new();
    let samples = sample_typical(8, 10_000, &SeededSampler::new(303)).unwrap();
    let (mean, std) = finite_stats(&samples).unwrap();
    let target = typical_avg(8);
    out.check(
        (mean - target).abs() <= 5e-4,
        format!("mean {mean:.6} vs 1 - 3/257 = {target:.6}"),
    );
    let scale = 2f64.powi(-8);
    out.check(
        (0.1 * scale..=10.0 * scale).contains(&std),
        format!("std {std:.3e} = {:.2} x 2^-8", std / scale),
    );
    out
}

fn appendix_a() -> Outcome {
    let mut out = Outcome::new();
    let mut worst = 0.0f64;
    for spins in 2..=10 {
        let p = AmplitudeProfile::uniform(spins).unwrap();
        worst = worst.max((phase_random_avg(&p) - optimal_phase_random_avg(spins)).abs());
    }
    out.check(
        worst <= 1e-12,
        format!("uniform profile N=2..10: max |diff| = {worst:.2e}"),
    );

    let sampler = SeededSampler::new(404);
    for spins in [2, 3] {
        let search = verify_optimal_initial(spins, 16, &sampler).unwrap();
        out.check(
            search.best_value <= search.bound + 1e-9,
            format!(
                "N={spins}: search best {:.12} vs bound {:.12}",
                search.best_value, search.bound
            ),
        );
        let mut rng = sampler.fork(spins as u32).rng();
        let mut margin = f64::INFINITY;
        for _ in 0..1000 {
            let angles: Vec<f64> = (0..spins).map(|_| PI / 2.0 * rng.random::<f64>()).collect();
            let v = phase_random_avg(&AmplitudeProfile::product(&angles).unwrap());
            margin = margin.min(search.bound - v);
        }
        out.check(
            margin >= -1e-9,
            format!("N={spins}: 1000 random product states, min margin {margin:.3e}"),
        );
    }

    let mut rng = sampler.fork(99).rng();
    let profile = AmplitudeProfile::random(6, &mut rng).unwrap();
    let exact = phase_random_avg(&profile);
    let mc = monte_carlo_phase_avg(&profile, 100_000, &sampler.fork(100)).unwrap();
    let z = (mc.mean - exact).abs() / mc.std_error;
    out.check(
        z <= 3.0,
        format!(
            "N=6 random profile: formula {exact:.6}, Monte-Carlo {:.6} +- {:.1e} ({z:.2} s.e.)",
            mc.mean, mc.std_error
        ),
    );
    out
}

fn appendix_b() -> Outcome {
    let mut out = Outcome::new();
    for n in 2..=6 {
        let c = count_xi(n).unwrap();
        let upper = 6u64.pow(n as u32 - 1);
        out.check(
            c.configurations() <= c.xi && c.xi <= upper,
            format!("n={n}: {} <= xi = {} <= {upper}", c.configurations(), c.xi),
        );
        let printed = xi_to_avg(c.xi, n);
        let pair = xi_to_exact_avg(c.xi, n);
        for spins in [2 * n, 2 * n + 2] {
            let spec = HamiltonianSpec::uniform_up_to(spins, n, 1.0, poly()).unwrap();
            let exact = exact_infinite_avg(&spec).unwrap();
            out.check(
                (printed - exact).abs() <= 1e-12,
                format!(
                    "n={n} N={spins}: 1 - xi/2^(4n-6) = {printed:.6} vs counted {exact:.6} (1 - xi/2^(4n-4) = {pair:.6})"
                ),
            );
        }
        if n >= 3 {
            let (lo, hi) = bounds_uniform_up_to(n);
            out.check(
                lo - 1e-12 <= printed && printed <= hi + 1e-12,
                format!("n={n}: 1 - xi/2^(4n-6) = {printed:.6} in [{lo:.6}, {hi:.6}]"),
            );
            let spec = HamiltonianSpec::uniform_up_to(2 * n, n, 1.0, poly()).unwrap();
            let exact = exact_infinite_avg(&spec).unwrap();
            out.check(
                lo - 1e-12 <= exact && exact <= hi + 1e-12,
                format!("n={n}: counted average {exact:.6} in [{lo:.6}, {hi:.6}]"),
            );
        }
    }
    out
}

fn correlations() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = SeededSampler::new(707).rng();
    let spins = 12;
    for n in [3, 5] {
        let spec =
            HamiltonianSpec::family(HamiltonianKind::SiteSingle, spins, n, 1.0, poly(), &mut rng)
                .unwrap();
        let couplings = spec.couplings().order(n).unwrap().to_vec();
        let table = eigenphase_table(&spec).unwrap();
        let (mut z, mut y, mut y_at_n, mut zero, mut formula) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let (mut zero_cases, mut formula_cases) = (0, 0);
        for _ in 0..20 {
            let t = 10.0 * rng.random::<f64>();
            let state = table.evolve_plus(t);
            for r in 1..spins / 2 {
                z = z.max(correlation(&state, Axis::Z, r).unwrap().abs());
                let cy = correlation(&state, Axis::Y, r).unwrap().abs();
                if r == n {
                    y_at_n = y_at_n.max(cy);
                } else {
                    y = y.max(cy);
                }
                let oracle = correlation(&state, Axis::X, r).unwrap();
                let cv = corr_x_site_single(&couplings, n, r, t).unwrap();
                if r > n {
                    zero = zero.max(cv.value.abs()).max(oracle.abs());
                    zero_cases += 1;
                }
                if cv.branch == CorrelationBranch::Formula {
                    formula = formula.max((cv.value - oracle).abs());
                    formula_cases += 1;
                }
            }
        }
        out.check(z <= 1e-12, format!("n={n}: max |C^Z| = {z:.2e}"));
        out.check(y <= 1e-12, format!("n={n}: r != n, max |C^Y| = {y:.2e}"));
        if n < spins / 2 {
            // The two windows ending at site 1 and starting at site n + 1
            // share the spins 2..n, so C^Y survives at r = n.
            out.check(
                y_at_n <= 1e-12,
                format!("n={n}: r = n, max |C^Y| = {y_at_n:.2e}"),
            );
        }
        out.check(
            zero <= 1e-12,
            format!("n={n}: {zero_cases} evaluations with r > n, max |C^X| = {zero:.2e}"),
        );
        out.check(
            formula <= 1e-10,
            format!("n={n}: {formula_cases} formula evaluations, max |formula - oracle| = {formula:.2e}"),
        );
    }
    out
}

fn size_and_field_invariance() -> Outcome {
    let mut out = Outcome::new();
    let a = HamiltonianSpec::uniform_up_to(8, 3, 1.0, poly()).unwrap();
    let b = HamiltonianSpec::uniform_up_to(10, 3, 1.0, poly()).unwrap();
    let (ta, tb) = (eigenphase_table(&a).unwrap(), eigenphase_table(&b).unwrap());
    let mut rng = SeededSampler::new(808).rng();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let t = 50.0 * rng.random::<f64>();
        let ea = meyer_wallach(&ta.evolve_plus(t)).unwrap();
        let eb = meyer_wallach(&tb.evolve_plus(t)).unwrap();
        worst = worst.max((ea - eb).abs());
    }
    out.check(
        worst <= 1e-10,
        format!("H-bar_3, N=8 vs N=10: max |diff| = {worst:.2e}"),
    );

    for kind in HamiltonianKind::ALL {
        let spec = HamiltonianSpec::family(kind, 8, 3, 1.0, poly(), &mut rng).unwrap();
        let fields = LocalFields((0..8).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect());
        let with = spec.clone().with_fields(fields).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let t = 20.0 * rng.random::<f64>();
            let e0 = meyer_wallach(&evolve(&spec, t).unwrap()).unwrap();
            let e1 = meyer_wallach(&evolve(&with, t).unwrap()).unwrap();
            worst = worst.max((e0 - e1).abs());
        }
        out.check(
            worst <= 1e-10,
            format!(
                "{} with random fields: max |diff| = {worst:.2e}",
                kind.label()
            ),
        );
    }
    out
}

fn table_scaling() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let spins = 10;
    let eps = StrengthSchedule::reference_epsilon();
    let samples = 100_000;
    let mut rng = SeededSampler::new(909).rng();
    let mut uniform_avg = Vec::new();
    let mut uniform_std = Vec::new();
    let mut site_avg = Vec::new();
    for n in 3..=6 {
        let grid = TimeGrid::jittered(2.0 * PI * (n as f64).powi(4) / eps, samples, 900 + n as u64)
            .unwrap();
        let spec = HamiltonianSpec::uniform_up_to(spins, n, 1.0, poly()).unwrap();
        let s = series(&spec, &grid).unwrap();
        uniform_avg.push((n, 1.0 - s.mean));
        uniform_std.push((n, s.std));
        let spec =
            HamiltonianSpec::family(HamiltonianKind::SiteUpTo, spins, n, 1.0, poly(), &mut rng)
                .unwrap();
        let s = series(&spec, &grid).unwrap();
        site_avg.push((n, 1.0 - s.mean));
    }
    let fmt = |pts: &[(usize, f64)]| {
        pts.iter()
            .map(|(n, d)| format!("{n}:{d:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let fit = fit_exponent(&uniform_avg, FitAxis::OrderMinusOne).unwrap();
    out.check(
        (1.6..=2.4).contains(&fit.exponent),
        format!(
            "uniform up-to average exponent {:.3} (prefactor {:.3}), deficits {}",
            fit.exponent,
            fit.prefactor,
            fmt(&uniform_avg)
        ),
    );
    let fit = fit_exponent(&uniform_std, FitAxis::OrderMinusOne).unwrap();
    out.check(
        (1.3..=2.2).contains(&fit.exponent),
        format!(
            "uniform up-to std exponent {:.3}, stds {}",
            fit.exponent,
            fmt(&uniform_std)
        ),
    );
    let fit = fit_exponent(&site_avg, FitAxis::OrderMinusOne).unwrap();
    out.check(
        (1.7..=2.5).contains(&fit.exponent),
        format!(
            "site up-to average exponent {:.3}, deficits {}",
            fit.exponent,
            fmt(&site_avg)
        ),
    );
    let elapsed = start.elapsed();
    out.check(
        elapsed < Duration::from_secs(600),
        format!("runtime {elapsed:.2?}"),
    );
    out
}

fn distribution_contrast() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = SeededSampler::new(1010).rng();
    let spec =
        HamiltonianSpec::family(HamiltonianKind::SiteSingle, 8, 6, 1.0, poly(), &mut rng).unwrap();
    let grid = TimeGrid::jittered(10_000.0, 10_000, 1011).unwrap();
    let time = series(&spec, &grid).unwrap();
    let typical = sample_typical(8, 10_000, &SeededSampler::new(1012)).unwrap();
    let (typ_mean, typ_std) = finite_stats(&typical).unwrap();
    out.check(
        (time.mean - typ_mean).abs() <= 5e-3,
        format!(
            "means: time ensemble {:.5} (std {:.4}), typical {typ_mean:.5} (std {typ_std:.4})",
            time.mean, time.std
        ),
    );
    let ks = ks_two_sample(&time.values, &typical).unwrap();
    out.check(
        ks.statistic > 0.1,
        format!("KS statistic {:.4} (p = {:.2e})", ks.statistic, ks.p_value),
    );
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        (
            "closed forms match the dense oracle",
            closed_form_matches_oracle,
        ),
        (
            "uniform single-order exact averages",
            uniform_single_averages,
        ),
        (
            "site-dependent single-order equality case",
            site_single_equality_case,
        ),
        ("typical entanglement of Haar states", typical_entanglement),
        ("phase-random average and optimal initial state", appendix_a),
        ("pair count, normalization and bounds", appendix_b),
        ("correlation functions", correlations),
        (
            "size independence and local-field invariance",
            size_and_field_invariance,
        ),
        ("fitted scaling exponents", table_scaling),
        ("time ensemble vs typical ensemble", distribution_contrast),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {}: {name} ({:.1?})",
            i + 1,
            start.elapsed()
        );
        for d in &outcome.details {
            println!("       {d}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
