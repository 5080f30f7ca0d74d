//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. `ACCEPTANCE_ONLY=1,7` runs a subset.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparsegrad::grid::make_one_bar;
use sparsegrad::operators::*;
use sparsegrad::prox::{half_threshold_scalar, prox_l1_minus_al2, solve_tau};
use sparsegrad::solvers::{solve_l1_over_l2, Backend, NormalSystem, Problem, SolveOptions, SolverParams};
use sparsegrad_experiments::results::strip_timing;
use sparsegrad_experiments::{run, write_outputs, ExperimentConfig, Kind, Manifest, Method, Outcome};

type Verdict = (bool, String);

fn randn(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn re_of(out: &Outcome, method: Method, col: &str, value: f64) -> f64 {
    out.select(method).find(|r| (r.num(col) - value).abs() < 1e-9).map(|r| r.re).unwrap_or(f64::NAN)
}

fn exact_of(out: &Outcome, method: Method, col: &str, value: f64) -> bool {
    re_of(out, method, col, value) < sparsegrad_experiments::results::EXACT_RECOVERY_RE
}

fn one_bar_recovery() -> Verdict {
    let start = Instant::now();
    let out = run(&ExperimentConfig::defaults(Kind::Onebar)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = |m: Method, s: usize| exact_of(&out, m, "s", s as f64);
    let tv_in = (14..=36).all(|s| ok(Method::Tv, s));
    let tv_out = !ok(Method::Tv, 10) && !ok(Method::Tv, 40);
    let l_in = (13..=37).all(|s| ok(Method::L1l2, s));
    let l_extra = ok(Method::L1l2, 12) || ok(Method::L1l2, 38);
    let interval = |m: Method| {
        let hits: Vec<usize> = (1..=49).filter(|&s| ok(m, s)).collect();
        match (hits.first(), hits.last()) {
            (Some(a), Some(b)) => format!("{a}..={b} ({} values)", hits.len()),
            _ => "none".to_string(),
        }
    };
    (
        tv_in && tv_out && l_in && l_extra && secs < 600.0,
        format!("tv exact {} l1l2 exact {} in {secs:.0}s", interval(Method::Tv), interval(Method::L1l2)),
    )
}

fn two_bar_contrast() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::defaults(Kind::Twobar);
    let out = run(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let tv_none = cfg.t_values.iter().all(|&t| !exact_of(&out, Method::Tv, "t", t));
    let outside: Vec<f64> = cfg.t_values.iter().copied().filter(|&t| t < 1.45 - 1e-9 || t > 1.70 + 1e-9).collect();
    let missed: Vec<f64> = outside.iter().copied().filter(|&t| !exact_of(&out, Method::L1l2, "t", t)).collect();
    (
        tv_none && missed.is_empty() && secs < 600.0,
        format!(
            "tv never exact: {tv_none}; l1l2 exact at {}/{} t outside [1.45, 1.70], missed {missed:?} in {secs:.0}s",
            outside.len() - missed.len(),
            outside.len()
        ),
    )
}

fn tau_cubic() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut below_one = 0;
    for _ in 0..10_000 {
        let eta = 10f64.powf(rng.random_range(-8.0..8.0));
        let tau = solve_tau(eta);
        if tau < 1.0 {
            below_one += 1;
        }
        worst = worst.max((tau * tau * (tau - 1.0) - eta).abs() / eta.max(1.0));
    }
    (worst <= 1e-10 && below_one == 0, format!("max scaled residual {worst:.2e}, tau < 1 in {below_one} cases"))
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Scan of `[-span, span]` plus golden refinement, keeping 0 when it is no worse.
fn scalar_min(f: impl Fn(f64) -> f64, span: f64) -> f64 {
    let n = 4000;
    let step = 2.0 * span / n as f64;
    let mut best = 0.0;
    for i in 0..=n {
        let y = -span + step * i as f64;
        if f(y) < f(best) {
            best = y;
        }
    }
    let y = golden(&f, best - step, best + step);
    if f(y) < f(0.0) {
        y
    } else {
        0.0
    }
}

/// Grid search over `[-a, a]²` refined by coordinate golden sweeps.
fn planar_min(f: impl Fn(f64, f64) -> f64, a: f64) -> (f64, f64) {
    let n = 400;
    let step = 2.0 * a / n as f64;
    let mut best = (0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            let (x, y) = (-a + step * i as f64, -a + step * j as f64);
            if f(x, y) < f(best.0, best.1) {
                best = (x, y);
            }
        }
    }
    let (mut x, mut y) = best;
    for _ in 0..30 {
        let nx = golden(|t| f(t, y), x - step, x + step);
        if f(nx, y) < f(x, y) {
            x = nx;
        }
        if f(0.0, y) <= f(x, y) {
            x = 0.0;
        }
        let ny = golden(|t| f(x, t), y - step, y + step);
        if f(x, ny) < f(x, y) {
            y = ny;
        }
        if f(x, 0.0) <= f(x, y) {
            y = 0.0;
        }
    }
    (x, y)
}

fn prox_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut half_bad = 0;
    for _ in 0..1000 {
        let (x, mu) = (rng.random_range(-5.0..5.0), rng.random_range(0.01..3.0));
        let f = |y: f64| 0.5 * (y - x) * (y - x) + mu * y.abs().sqrt();
        let got = half_threshold_scalar(x, mu);
        let want = scalar_min(f, x.abs() + 1.0);
        let tie = (f(got) - f(want)).abs() <= 1e-12;
        if (got - want).abs() > 1e-4 && !tie {
            half_bad += 1;
        }
    }
    let mut l12_bad = 0;
    for _ in 0..1000 {
        let v = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let (alpha, mu) = (rng.random_range(0.0..1.0), rng.random_range(0.05..2.0));
        let f = |a: f64, b: f64| {
            0.5 * ((a - v[0]).powi(2) + (b - v[1]).powi(2)) + mu * (a.abs() + b.abs() - alpha * (a * a + b * b).sqrt())
        };
        let got = prox_l1_minus_al2(&v, alpha, mu);
        let want = planar_min(f, v[0].abs().max(v[1].abs()) + 0.5);
        let dist = (got[0] - want.0).abs().max((got[1] - want.1).abs());
        let tie = (f(got[0], got[1]) - f(want.0, want.1)).abs() <= 1e-12;
        if dist > 1e-4 && !tie {
            l12_bad += 1;
        }
    }
    (half_bad == 0 && l12_bad == 0, format!("mismatches: half_threshold {half_bad}/1000, prox_l1_minus_al2 {l12_bad}/1000"))
}

fn adjoint_gap(op: &dyn MeasurementOperator, rng: &mut ChaCha8Rng) -> f64 {
    let (rows, cols) = op.shape();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let u = randn(rng, rows * cols);
        let v = randn(rng, op.data_len());
        let mut au = vec![0.0; op.data_len()];
        let mut atv = vec![0.0; rows * cols];
        op.apply_into(&u, &mut au);
        op.adjoint_into(&v, &mut atv);
        let scale = (dot(&au, &au) * dot(&v, &v)).sqrt().max(1.0);
        worst = worst.max((dot(&au, &v) - dot(&u, &atv)).abs() / scale);
    }
    worst
}

fn adjoint_suite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (rows, cols) = (24, 20);
    let mut grad_gap: f64 = 0.0;
    for _ in 0..100 {
        let u = randn(&mut rng, rows * cols);
        let p = randn(&mut rng, field_len(rows, cols));
        let (mut du, mut dtp) = (vec![0.0; p.len()], vec![0.0; u.len()]);
        gradient_into(rows, cols, &u, &mut du);
        gradient_adjoint_into(rows, cols, &p, &mut dtp);
        grad_gap = grad_gap.max((dot(&du, &p) - dot(&u, &dtp)).abs() / (dot(&du, &du) * dot(&p, &p)).sqrt().max(1.0));
    }
    let fourier_gap = adjoint_gap(&FourierSampling::new(FrequencyMask::radial(32, 32, 8).unwrap()), &mut rng);
    let radon_gap = adjoint_gap(&RadonOperator::limited_angle(32, 45.0, 11, 45).unwrap(), &mut rng);

    let mut spec_gap: f64 = 0.0;
    for (r, c) in [(1, 8), (3, 5), (4, 4), (6, 7), (8, 8)] {
        let n = r * c;
        let mut dense = DMatrix::zeros(n, n);
        let (mut du, mut col) = (vec![0.0; field_len(r, c)], vec![0.0; n]);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            gradient_into(r, c, &e, &mut du);
            gradient_adjoint_into(r, c, &du, &mut col);
            for i in 0..n {
                dense[(i, j)] = col[i];
            }
        }
        let mut eig: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        let mut spec = gradient_gram_spectrum(r, c);
        eig.sort_by(f64::total_cmp);
        spec.sort_by(f64::total_cmp);
        spec_gap = eig.iter().zip(&spec).map(|(a, b)| (a - b).abs()).fold(spec_gap, f64::max);
    }
    let pass = grad_gap <= 1e-10 && fourier_gap <= 1e-10 && radon_gap <= 1e-10 && spec_gap <= 1e-10;
    (
        pass,
        format!("gaps: gradient {grad_gap:.1e}, fourier {fourier_gap:.1e}, radon {radon_gap:.1e}, spectrum {spec_gap:.1e}"),
    )
}

fn backend_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let op = FourierSampling::new(FrequencyMask::radial(16, 16, 3 + trial % 6).unwrap());
        let lambda = 10f64.powf(rng.random_range(-1.0..3.0));
        let (gw, beta) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
        let rhs = randn(&mut rng, 256);
        let fft = NormalSystem::new(&op, lambda, gw, beta, Backend::Fourier, 1e-14, 5000).unwrap();
        let cg = NormalSystem::new(&op, lambda, gw, beta, Backend::Cg, 1e-14, 5000).unwrap();
        let (mut a, mut b) = (vec![0.0; 256], vec![0.0; 256]);
        fft.solve(&rhs, &mut a);
        cg.solve(&rhs, &mut b);
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        worst = worst.max(diff / dot(&a, &a).sqrt());
    }
    (worst <= 1e-8, format!("max relative difference {worst:.1e}"))
}

fn descent() -> Verdict {
    let op = FourierSampling::new(FrequencyMask::lowpass_1d(100, 2).unwrap());
    let truth = make_one_bar(100, 20).unwrap();
    let pb = Problem::from_truth(&op, &truth).unwrap();
    let params = SolverParams { k_max: 200, j_max: 100, eps_rel: 0.0, ..SolverParams::default().with_rho(64.0) };
    let opts = SolveOptions { initial: Some(op.adjoint(&pb.b)), ..Default::default() };
    let d = solve_l1_over_l2(&pb, &params, opts).unwrap().diagnostics;
    let l = &d.lagrangian;
    let rises = (2..l.len()).filter(|&k| l[k] > l[k - 1] + 1e-12 * l[k - 1].abs()).count();
    let tail = d.u_change[d.u_change.len() - 10..].iter().cloned().fold(0.0, f64::max);
    (
        l.len() == 200 && rises == 0 && tail < 1e-6,
        format!("{} iterations, {rises} increases for k >= 2, last-10 max change {tail:.1e}", l.len()),
    )
}

fn ct_reproduction() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::resolve(Kind::Ct, "theta_max = [30.0, 45.0]".parse().unwrap()).unwrap();
    let out = run(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let re = |m: Method, t: f64| re_of(&out, m, "theta_max", t);
    let (l45, tv45) = (re(Method::L1l2, 45.0), re(Method::Tv, 45.0));
    let order = [Method::L1l2, Method::Lp, Method::Tv, Method::Sart].map(|m| re(m, 30.0));
    let ordered = order.windows(2).all(|w| w[0] < w[1]);
    (
        l45 < 0.02 && l45 < tv45 && ordered && secs < 1800.0,
        format!(
            "45°: l1l2 {:.2}% tv {:.2}%; 30°: l1l2 {:.2}% lp {:.2}% tv {:.2}% sart {:.2}% in {secs:.0}s",
            100.0 * l45,
            100.0 * tv45,
            100.0 * order[0],
            100.0 * order[1],
            100.0 * order[2],
            100.0 * order[3]
        ),
    )
}

fn mri_direction() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::defaults(Kind::Mri);
    let out = run(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let re = |m: Method, l: f64| re_of(&out, m, "lines", l);
    let ordered = re(Method::L1l2, 25.0) < re(Method::Tv, 25.0) && re(Method::Tv, 25.0) < re(Method::Zf, 25.0);
    let monotone = [Method::Zf, Method::Tv, Method::L1l2]
        .iter()
        .all(|&m| re(m, 20.0) >= re(m, 25.0) && re(m, 25.0) >= re(m, 30.0));
    let show = |m: Method| format!("{} {:.3e}/{:.3e}/{:.3e}", m.name(), re(m, 20.0), re(m, 25.0), re(m, 30.0));
    (
        ordered && monotone && secs < 900.0,
        format!(
            "RE at 20/25/30 lines: {}, {}, {}; ordered {ordered}, monotone {monotone} in {secs:.0}s",
            show(Method::L1l2),
            show(Method::Tv),
            show(Method::Zf)
        ),
    )
}

fn ablations() -> Verdict {
    let cfg = ExperimentConfig::defaults(Kind::Ablation);
    let out = run(&cfg).unwrap();
    let trace = |boxed: &str, j: usize| {
        out.traces
            .iter()
            .find(|t| t.instance.iter().any(|(k, v)| k == "box" && v == boxed) && t.instance.iter().any(|(k, v)| k == "j_max" && *v == j.to_string()))
            .map(|t| t.diagnostics.re.clone())
            .unwrap_or_default()
    };
    let free = trace("false", cfg.j_max);
    let min = free.iter().cloned().fold(f64::INFINITY, f64::min);
    let last = free.last().copied().unwrap_or(f64::NAN);
    let (j1, j5) = (trace("true", 1), trace("true", 5));
    let (r1, r5) = (j1.last().copied().unwrap_or(f64::NAN), j5.last().copied().unwrap_or(f64::NAN));
    let same_budget = j1.len() == j5.len();
    (
        last >= 1.2 * min && r5 < r1 && same_budget,
        format!("no box: final {last:.3} vs min {min:.3}; after {} outer iterations jMax=5 {r5:.3} vs jMax=1 {r1:.3}", j5.len()),
    )
}

fn determinism() -> Verdict {
    let small: [(Kind, &str); 7] = [
        (Kind::Onebar, "s_values = [12, 20]\nrestarts = 2"),
        (Kind::Twobar, "t_values = [1.2]\nrestarts = 2"),
        (Kind::Superres, "size = 24\nk_max = 30"),
        (Kind::Mri, "size = 32\nlines = [8]\nk_max = 30"),
        (Kind::Ct, "size = 24\ntheta_max = [45.0]\nangles = 7\ndetectors = 35\nk_max = 20\nsart_iterations = 10"),
        (Kind::Sensitivity, "size = 24\nexponents = [0]\nlambdas = [100.0]\nk_max_values = [20]"),
        (Kind::Ablation, "size = 24\nk_max = 20\nj_max_values = [1, 2]"),
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (kind, text) in small {
        let mut table: toml::Table = text.parse().unwrap();
        table.insert("seed".into(), toml::Value::Integer(11));
        let cfg = ExperimentConfig::resolve(kind, table).unwrap();
        let (a, b) = (dir.path().join(format!("{}_a", kind.name())), dir.path().join(format!("{}_b", kind.name())));
        write_outputs(&a, &cfg, &run(&cfg).unwrap()).unwrap();
        let m = Manifest::load(&a.join("manifest.json")).unwrap();
        let again = ExperimentConfig::resolve(kind, toml::Table::try_from(&m.config).unwrap()).unwrap();
        write_outputs(&b, &again, &run(&again).unwrap()).unwrap();
        let read = |p: &std::path::Path| strip_timing(&std::fs::read_to_string(p.join("results.csv")).unwrap()).unwrap();
        if read(&a) != read(&b) {
            differing.push(kind.name());
        }
    }
    (differing.is_empty(), format!("7 experiment kinds re-run from manifests, differing: {differing:?}"))
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("one-bar exact recovery", one_bar_recovery),
        ("two-bar contrast", two_bar_contrast),
        ("tau cubic root", tau_cubic),
        ("prox oracles", prox_oracles),
        ("adjoint suite", adjoint_suite),
        ("back-end equivalence", backend_equivalence),
        ("descent diagnostic", descent),
        ("CT reproduction", ct_reproduction),
        ("MRI direction", mri_direction),
        ("ablations", ablations),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check();
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{id:>2}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
