//! Acceptance suite: one check per criterion, each printed as a PASS/FAIL
//! line. Exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use pgnudge::assimilate::{
    evaluate_constants, fit_decay_rate, gronwall_check, run_twin_with, ConstantInputs,
    Eta0Mode,
};
use pgnudge::cli::{
    constants_for, fit_window, prepare, run_assimilate, AssimilateReport, MuSetting, RunConfig,
};
use pgnudge::diagnostic::{
    reconstruct_w, DiagnosticSolver, SolverMethod, SolverSettings, WindStress,
};
use pgnudge::field::{
    energy_norm, l2_norm, DomainSpec, PhysParams, ScalarField2D, ScalarField3D,
};
use pgnudge::observe::{measure_c0, InterpolantKind, InterpolantSpec};
use pgnudge::stepper::{ForcingSpec, Stepper, StepperSettings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn default_config() -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    RunConfig::load(&path).expect("shipped default config loads")
}

fn random_field(d: DomainSpec, rng: &mut ChaCha8Rng) -> ScalarField3D {
    let mut f = ScalarField3D::zeros(d);
    f.values.mapv_inplace(|_| StandardNormal.sample(rng));
    f
}

fn random_surface(d: DomainSpec, rng: &mut ChaCha8Rng) -> ScalarField2D {
    let mut f = ScalarField2D::zeros(d);
    f.values.mapv_inplace(|_| StandardNormal.sample(rng));
    f
}

fn criterion_1() -> Verdict {
    let clock = Instant::now();
    let d = DomainSpec::unit(6, 6, 4);
    let p = PhysParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let t = random_field(d, &mut rng);
    let tstar = random_surface(d, &mut rng);
    let tau = WindStress {
        tau1: random_surface(d, &mut rng),
        tau2: random_surface(d, &mut rng),
    };
    let iterative = DiagnosticSolver::new(d, &p, SolverSettings::default()).unwrap();
    let dense = DiagnosticSolver::new(
        d,
        &p,
        SolverSettings {
            method: SolverMethod::DenseDirect,
            ..SolverSettings::default()
        },
    )
    .unwrap();
    let a = iterative.solve(&t, &tstar, &tau, None).unwrap();
    let b = dense.solve(&t, &tstar, &tau, None).unwrap();
    let scale = b.u.max_abs();
    let du = a.u.sub(&b.u).max_abs() / scale;
    let p_scale = b.p_s.max_abs();
    let mut dp = 0.0f64;
    for (x, y) in a.p_s.values.iter().zip(b.p_s.values.iter()) {
        dp = dp.max((x - y).abs());
    }
    let dp = dp / p_scale;
    let secs = clock.elapsed().as_secs_f64();
    verdict(
        du <= 1e-8 && dp <= 1e-8 && secs < 1.0,
        format!("rel diff u {du:.2e}, p_s {dp:.2e} (tol 1e-8); {secs:.3} s (< 1 s)"),
    )
}

fn criterion_2() -> Verdict {
    let cfg = default_config();
    let forcing = cfg.forcing().unwrap();
    let (p, _) = cfg.resolved_params(&forcing).unwrap();
    let stepper = Stepper::new(cfg.domain, &p, cfg.stepper, cfg.solver).unwrap();
    let mut state = stepper
        .initial_state(cfg.reference.field(cfg.domain), 0.0, &forcing)
        .unwrap();
    let (mut worst_div, mut worst_w) = (0.0f64, 0.0f64);
    let check = |s: &pgnudge::stepper::ModelState, wd: &mut f64, ww: &mut f64| {
        let scale = s.diag.u.max_abs();
        *wd = wd.max(s.diag.constraint_residual);
        let w = reconstruct_w(&s.diag.u);
        let nz = cfg.domain.nz;
        let top = w.values.slice(ndarray::s![.., .., nz]).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        *ww = ww.max(top / scale);
    };
    check(&state, &mut worst_div, &mut worst_w);
    for _ in 0..1000 {
        state = stepper.step(&state, &forcing, None).unwrap();
        check(&state, &mut worst_div, &mut worst_w);
    }
    verdict(
        worst_div <= 1e-8 && worst_w <= 1e-7,
        format!(
            "max |div ∫u dz|/scale {worst_div:.2e} (<= 1e-8), max |w(z=0)|/scale {worst_w:.2e} (<= 1e-7) over 1001 solves"
        ),
    )
}

/// Max over the first `window` steps of `|(|T^{n+1}|² - |T^n|²)/dt + 2‖T^{n+1}‖²|`,
/// and whether `|T|` never increased over all `steps`.
fn energy_residual(n: usize, dt: f64, window: usize, steps: usize) -> (f64, bool) {
    let d = DomainSpec::unit(n, n, n / 2);
    let p = PhysParams::default();
    let forcing = ForcingSpec::zeros(d);
    let stepper = Stepper::new(
        d,
        &p,
        StepperSettings {
            dt,
            ..StepperSettings::default()
        },
        SolverSettings::default(),
    )
    .unwrap();
    let init = pgnudge::assimilate::ReferenceInit::default().field(d);
    let mut state = stepper.initial_state(init, 0.0, &forcing).unwrap();
    let mut prev = l2_norm(&state.ttilde).unwrap();
    let (mut worst, mut monotone) = (0.0f64, true);
    for n in 0..steps {
        state = stepper.step(&state, &forcing, None).unwrap();
        let now = l2_norm(&state.ttilde).unwrap();
        let e = energy_norm(&state.ttilde, &p).unwrap();
        let r = (now * now - prev * prev) / dt + 2.0 * e * e;
        if n < window {
            worst = worst.max(r.abs());
        }
        monotone &= now <= prev;
        prev = now;
    }
    (worst, monotone)
}

fn criterion_3() -> Verdict {
    let (fine, monotone) = energy_residual(24, 0.004, 500, 1000);
    let (coarse, _) = energy_residual(12, 0.008, 250, 250);
    let ratio = fine / coarse;
    verdict(
        monotone && (0.375..=0.625).contains(&ratio),
        format!(
            "|T| monotone over 1000 steps: {monotone}; residual {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3} (0.5 ± 25%)"
        ),
    )
}

fn criterion_4() -> Verdict {
    let clock = Instant::now();
    let d = DomainSpec::unit(32, 32, 16);
    let p = PhysParams::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [InterpolantKind::Modal, InterpolantKind::Volume] {
        let c0 = |h: f64| {
            let spec = InterpolantSpec { kind, h, c0: None };
            measure_c0(&spec, d, &p, 100, 99).unwrap()
        };
        let (coarse, fine) = (c0(0.25), c0(0.125));
        let ratio = fine / coarse;
        pass &= coarse > 0.0 && (0.5..=2.0).contains(&ratio);
        parts.push(format!("{kind:?}: c0(1/4) {coarse:.3}, c0(1/8) {fine:.3}, ratio {ratio:.2}"));
    }
    let secs = clock.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    verdict(pass, format!("{}; {secs:.1} s (< 30 s)", parts.join("; ")))
}

struct Flagship {
    report: AssimilateReport,
    series: pgnudge::assimilate::ErrorSeries,
    dir: tempfile::TempDir,
    secs: f64,
}

fn flagship() -> Flagship {
    let cfg = default_config();
    let dir = tempfile::tempdir().unwrap();
    let clock = Instant::now();
    let report = run_assimilate(&cfg, dir.path(), 1).expect("flagship run");
    let secs = clock.elapsed().as_secs_f64();
    let series = read_series(&dir.path().join("error_series.csv"));
    Flagship {
        report,
        series,
        dir,
        secs,
    }
}

fn read_series(path: &Path) -> pgnudge::assimilate::ErrorSeries {
    let mut s = pgnudge::assimilate::ErrorSeries::default();
    let mut rdr = csv::Reader::from_path(path).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let v: Vec<f64> = rec.iter().map(|x| x.parse().unwrap()).collect();
        s.times.push(v[0]);
        s.l2_chi.push(v[1]);
        s.h1_u.push(v[2]);
        s.l2_ref.push(v[3]);
    }
    s
}

fn criterion_5(f: &Flagship) -> Verdict {
    let s = &f.series;
    let first = s.l2_chi[0];
    let last = *s.l2_chi.last().unwrap();
    let orders = (first / last).log10();
    let fit = f.report.decay_fit;

    let mut cfg = default_config();
    cfg.params.mu = MuSetting::Value(0.0);
    let prep = prepare(&cfg).unwrap();
    let control = run_twin_with(&cfg.twin_config(prep.params, prep.forcing), 1).unwrap();
    let cs = &control.series;
    let retained = cs.l2_chi.last().unwrap() / cs.l2_chi[0];
    let w = fit_window(0.0);
    let control_fit = fit_decay_rate(cs, w.floor, w.ceiling).unwrap();

    let (rate, goodness) = fit.map_or((f64::NAN, f64::NAN), |x| (x.rate, x.goodness));
    let pass = orders >= 6.0
        && rate > 0.0
        && goodness >= 0.95
        && retained >= 0.1
        && rate >= 10.0 * control_fit.rate
        && f.secs < 300.0;
    verdict(
        pass,
        format!(
            "decay {orders:.2} orders (>= 6); rate {rate:.4}, R² {goodness:.6} (>= 0.95); control retains {:.1}% (>= 10%), control rate {:.4}, ratio {:.1} (>= 10); flagship {:.0} s single-threaded (< 300 s)",
            100.0 * retained,
            control_fit.rate,
            rate / control_fit.rate,
            f.secs
        ),
    )
}

fn criterion_6(f: &Flagship) -> Verdict {
    let v = f.report.velocity;
    let s = &f.series;
    let mut worst = 0.0f64;
    for (c, u) in s.l2_chi.iter().zip(&s.h1_u) {
        if *c > 0.0 {
            worst = worst.max(u / (v.rho * c));
        }
    }
    verdict(
        worst <= 1.1,
        format!(
            "max ‖v-u‖_H1 / (ρ|χ|) = {worst:.3} (<= 1.1) with ρ = {:.3} from {} fields",
            v.rho, v.rho_samples
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut cfg = default_config();
    cfg.twin.eta0 = Eta0Mode::Perturbed { epsilon: 0.0 };
    let prep = prepare(&cfg).unwrap();
    let outcome = run_twin_with(&cfg.twin_config(prep.params, prep.forcing), 1).unwrap();
    let t0 = l2_norm(&outcome.reference_start.ttilde).unwrap();
    let worst = outcome.series.l2_chi.iter().copied().fold(0.0f64, f64::max);
    verdict(
        worst <= 1e-10 * t0,
        format!(
            "max |χ| / |T̃₀| = {:.2e} (<= 1e-10) over {} samples",
            worst / t0,
            outcome.series.len()
        ),
    )
}

fn criterion_8(f: &Flagship) -> Verdict {
    let t: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
    let n = t.len();
    let y: Vec<f64> = t.iter().map(|s| (-2.0 * s).exp()).collect();
    let decay = gronwall_check(&t, &y, &vec![2.0; n], &vec![0.0; n], 1.0, 1.0).unwrap();
    let grow: Vec<f64> = t.iter().map(|s| s.exp()).collect();
    let negative = gronwall_check(&t, &grow, &vec![-1.0; n], &vec![0.0; n], 1.0, 1.0).unwrap();
    let measured = f.report.gronwall;
    let measured_pass = measured.is_some_and(|g| g.pass);
    let rate_ok = decay.tail_rate.is_some_and(|r| (r - 2.0).abs() < 1e-6);
    verdict(
        decay.pass && rate_ok && !negative.hypothesis_alpha && !negative.pass && measured_pass,
        format!(
            "Y'=-2Y: pass={} tail rate {:.6}; α≡-1: hypothesis 1 {}; flagship (Y=|χ|², α proxy): pass={} (min window ∫α {:.2}, tail rate {:.3})",
            decay.pass,
            decay.tail_rate.unwrap_or(f64::NAN),
            if negative.hypothesis_alpha { "passes" } else { "fails" },
            measured_pass,
            measured.map_or(f64::NAN, |g| g.alpha_window_min),
            measured.and_then(|g| g.tail_rate).unwrap_or(f64::NAN)
        ),
    )
}

/// Direct transcription of the bound formulas, independent of the library.
fn oracle(p: &PhysParams, i: &ConstantInputs) -> BTreeMap<&'static str, f64> {
    let kt = f64::max(2.0 * p.depth / p.alpha, 2.0 * p.depth.powi(2) / p.k_v);
    let rat = 4.0 * p.alpha * kt * i.tstar_l2.powi(2) + 8.0 * kt.powi(2) * i.q_l2.powi(2);
    let ra = 2.0 * rat + 2.0 * i.tstar_l2.powi(2);
    let kr = 2.0 * ra + rat * i.r;
    let rv = i.c
        * (ra / i.r.sqrt()
            + i.tstar_h1
            + i.q_l2
            + i.c / i.lambda1.sqrt()
                * (1.0 + i.tstar_h2.powi(2) + i.q_l2 + i.tau_h1.powi(2) + ra.powi(2)))
        * (i.c * (ra.powi(4) + (i.tstar_h2.powi(4) + i.tau_h1.powi(4) + ra.powi(4)) * i.r)).exp();
    let mu_min = 2.0 * i.c * (1.0 + 5.0 * rat + 4.0 * i.tstar_l2.powi(2) + i.tstar_h1.powf(4.0 / 3.0));
    BTreeMap::from([
        ("k_tilde", kt),
        ("r_a_tilde", rat),
        ("r_a", ra),
        ("k_r", kr),
        ("r_v", rv),
        ("mu_min", mu_min),
        ("smallness", i.mu * i.c0 * i.c0 * i.h * i.h),
    ])
}

fn criterion_9() -> Verdict {
    let mut worst = 0.0f64;
    let mut check = |p: &PhysParams, i: ConstantInputs| {
        let k = evaluate_constants(p, i);
        let got = BTreeMap::from([
            ("k_tilde", k.k_tilde),
            ("r_a_tilde", k.r_a_tilde),
            ("r_a", k.r_a),
            ("k_r", k.k_r),
            ("r_v", k.r_v),
            ("mu_min", k.mu_min),
            ("smallness", k.smallness),
        ]);
        for (name, want) in oracle(p, &i) {
            let have = got[name];
            let err = (have - want).abs() / want.abs().max(1e-300);
            worst = worst.max(if want == 0.0 { have.abs() } else { err });
        }
        k
    };
    let base = ConstantInputs {
        tstar_l2: 0.0,
        tstar_h1: 0.0,
        tstar_h2: 0.0,
        q_l2: 0.0,
        tau_h1: 0.0,
        c: 1.0,
        c0: 0.5,
        h: 0.25,
        mu: 20.0,
        lambda1: 0.74,
        r: 1.0,
    };
    let zeros = check(&PhysParams::default(), base);
    let zeros_ok = zeros.r_a_tilde == 0.0 && zeros.r_a == 0.0 && zeros.mu_min == 2.0;
    let forced = ConstantInputs {
        tstar_l2: 0.3,
        tstar_h1: 0.8,
        tstar_h2: 1.7,
        q_l2: 0.2,
        tau_h1: 0.4,
        ..base
    };
    let column = PhysParams {
        depth: 1.0,
        alpha: 2.0,
        k_v: 1.0,
        ..PhysParams::default()
    };
    let surface = PhysParams {
        alpha: 0.5,
        ..column
    };
    let kc = check(&column, forced);
    let ks = check(&surface, forced);
    let branch_ok = kc.k_tilde == 2.0 && ks.k_tilde == 4.0;

    let cfg = default_config();
    let k_default = constants_for(&cfg).unwrap();
    check(
        &prepare(&cfg).unwrap().params,
        k_default.inputs,
    );
    let identical = evaluate_constants(&prepare(&cfg).unwrap().params, k_default.inputs) == k_default;

    let mut fixed = cfg.clone();
    fixed.interpolant.c0 = Some(0.4);
    fixed.params.mu = MuSetting::Value(25.0);
    let threshold = 1.0 / (0.4 * 25f64.sqrt());
    let flag_at = |h: f64| {
        let mut c = fixed.clone();
        c.interpolant.h = h;
        constants_for(&c).unwrap().smallness_condition
    };
    let below = flag_at(threshold * (1.0 - 1e-9));
    let above = flag_at(threshold * (1.0 + 1e-9));
    let pass = worst <= 1e-12 && zeros_ok && branch_ok && identical && below && !above;
    verdict(
        pass,
        format!(
            "max rel diff vs oracle {worst:.1e} (<= 1e-12) over zeros/branch pair/default; K̃ branches {}/{}; flag at h = {threshold:.6}(1∓1e-9): {below}/{above}",
            kc.k_tilde, ks.k_tilde
        ),
    )
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().to_string_lossy().to_string();
        if rel == "timings.json" {
            continue;
        }
        out.insert(rel, std::fs::read(&entry).unwrap());
    }
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut all = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        if path.is_dir() {
            all.extend(walk(&path));
        } else {
            all.push(path);
        }
    }
    all
}

fn criterion_10(f: &Flagship) -> Verdict {
    let cfg = default_config();
    let dir = tempfile::tempdir().unwrap();
    run_assimilate(&cfg, dir.path(), 2).expect("repeat flagship run");
    let a = files(f.dir.path());
    let b = files(dir.path());
    let same_names = a.keys().eq(b.keys());
    let differing: Vec<&String> = a
        .iter()
        .filter(|(k, v)| b.get(*k) != Some(v))
        .map(|(k, _)| k)
        .collect();
    verdict(
        same_names && differing.is_empty() && a.contains_key("report.json"),
        format!(
            "{} files compared (CSV, JSON, snapshots; timings excluded), differing: {:?}",
            a.len(),
            differing
        ),
    )
}

fn main() {
    let names = [
        "diagnostic oracle equivalence",
        "constraint fidelity",
        "energy identity",
        "interpolant approximation property",
        "flagship exponential convergence",
        "velocity tracking",
        "exact-start invariance",
        "Grönwall checker",
        "theorem-constants calculator",
        "determinism",
    ];
    let mut verdicts: Vec<(usize, Verdict)> = Vec::new();
    let mut run = |i: usize, f: &dyn Fn() -> Verdict| {
        let clock = Instant::now();
        let v = f();
        eprintln!("criterion {i} done in {:.1} s", clock.elapsed().as_secs_f64());
        verdicts.push((i, v));
    };
    run(1, &criterion_1);
    run(9, &criterion_9);
    run(4, &criterion_4);
    run(3, &criterion_3);
    run(2, &criterion_2);
    let fl = flagship();
    run(5, &|| criterion_5(&fl));
    run(6, &|| criterion_6(&fl));
    run(8, &|| criterion_8(&fl));
    run(7, &criterion_7);
    run(10, &|| criterion_10(&fl));
    verdicts.sort_by_key(|(i, _)| *i);
    let mut failed = 0;
    for (i, v) in &verdicts {
        println!(
            "[{}] {i:>2}. {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            names[i - 1],
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
