//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Monte Carlo criteria (6–10) return a digest of everything they computed;
//! criterion 14 re-runs them and compares digests byte for byte.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use nbstein::distributions::{k_r, ModGeomParams, NegBinParams, Poisson};
use nbstein::ibd::{check_law, coupling_check, simulate_replicates, verify_integral_identities, IBDParams};
use nbstein::metrics::wasserstein_pmf;
use nbstein::numerics::{QuadratureSpec, RngStream};
use nbstein::parasite::{
    appendix_check, battery_v1, compute_exposure, f_j, f_j_prime, sample_w_replicates, validate_scenario,
    IngestionRate, ScenarioParams,
};
use nbstein::stein::{
    compute_r0, extremal_f, gamma_ratio, measure_factors_default, r0, solve_stein, stein_residual,
    SteinSolver, default_i_max, default_n, GRID_P, GRID_R,
};

struct Outcome {
    pass: bool,
    detail: String,
    digest: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self {
            pass,
            detail,
            digest: String::new(),
        }
    }
}

fn grid() -> Vec<NegBinParams> {
    GRID_R
        .iter()
        .flat_map(|&r| GRID_P.iter().map(move |&p| NegBinParams::new(r, p).unwrap()))
        .collect()
}

fn c1_stein_residual() -> Outcome {
    let worst = grid()
        .par_iter()
        .map(|nb| {
            let i_max = default_i_max(nb).max(1);
            let solver = SteinSolver::new(*nb, default_n(nb, i_max)).unwrap();
            (0..=i_max)
                .map(|i| {
                    let f = extremal_f(i);
                    let sol = solver.solve(&f).unwrap();
                    let scale = f
                        .values(sol.n)
                        .iter()
                        .fold(1.0f64, |m, v| m.max((v - sol.mu_f).abs()));
                    stein_residual(&sol, &f) / scale
                })
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Outcome::new(worst <= 1e-10, format!("max scaled residual {worst:.3e} (limit 1e-10)"))
}

fn c2_g1_exact() -> Outcome {
    let worst = grid()
        .par_iter()
        .map(|nb| {
            let rep = measure_factors_default(nb).unwrap();
            (rep.g1_measured - 1.0 / (1.0 - nb.p())).abs()
        })
        .reduce(|| 0.0, f64::max);
    Outcome::new(worst <= 1e-9, format!("max |G1 - 1/(1-p)| = {worst:.3e} (limit 1e-9)"))
}

fn c3_g2_certified() -> Outcome {
    let r0 = r0();
    let reports: Vec<_> = grid().iter().map(|nb| measure_factors_default(nb).unwrap()).collect();
    let mut min_slack = f64::INFINITY;
    let mut bad = Vec::new();
    for rep in &reports {
        let (r, p) = (rep.r, rep.p);
        let q = 1.0 - p;
        let bound = (2.0 / q).min((1.0 + p) / (q * q)).min((r0 / (r * p * q * q * q)).sqrt());
        let slack = bound + 1e-9 - rep.g2_measured;
        min_slack = min_slack.min(slack);
        if slack < 0.0 {
            bad.push(format!("(r={r}, p={p}): {} > {bound}", rep.g2_measured));
        }
    }
    let nb = NegBinParams::new(1.0, 0.5).unwrap();
    let hand = solve_stein(&extremal_f(1), &nb, 200).unwrap().delta_g(1);
    Outcome::new(
        bad.is_empty() && hand == 1.0,
        format!(
            "{} grid points, min slack {min_slack:.3e}, Δg_f1(1) at (1, 0.5) = {hand:?}{}",
            reports.len(),
            if bad.is_empty() { String::new() } else { format!("; violations: {}", bad.join(", ")) }
        ),
    )
}

fn c4_r0() -> Outcome {
    let r0 = compute_r0(1e-12).unwrap();
    let target = 3.0 * (2.0 * E).sqrt() / 8.0;
    // Γ(r−½)/Γ(r) is decreasing, so the root is bracketed by a sign change.
    let bracketed = gamma_ratio(r0 - 1e-12) > target && gamma_ratio(r0 + 1e-12) < target;
    let s = r0.sqrt();
    Outcome::new(
        bracketed && s > 1.41 && s <= 1.427,
        format!("r0 = {r0:.15}, sqrt(r0) = {s:.12}, sign change across ±1e-12: {bracketed}"),
    )
}

fn c5_integral_identities() -> Outcome {
    let spec = QuadratureSpec::new(1e-11, 1e-12, 80).unwrap();
    let mut worst = 0.0f64;
    for p in [0.1, 0.5, 0.9] {
        let id = verify_integral_identities(p, &spec).unwrap();
        worst = worst
            .max((id.i1 - 2.0 / (1.0 - p)).abs())
            .max((id.i2 - 4.0 / (3.0 * (1.0 - p))).abs());
    }
    Outcome::new(worst <= 1e-8, format!("max deviation {worst:.3e} (limit 1e-8)"))
}

const MC_N: u64 = 100_000;

fn c6_lemma21(seed: u64) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let (mut worst_tv, mut worst_z) = (0.0f64, 0.0f64);
    for (k, &b) in [0.0, 0.3, 0.7, 1.0, 1.2].iter().enumerate() {
        for (l, &t) in [0.5, 1.0, 3.0].iter().enumerate() {
            let params = IBDParams::constant(0.0, b, 1).unwrap();
            let emp = simulate_replicates(&params, t, MC_N, seed, ((k * 3 + l) as u64) << 32).unwrap();
            let law = ModGeomParams::new(b, t).unwrap().to_pmf();
            let rep = check_law(&emp, &law, 0.015).unwrap();
            // Moments straight from the closed forms, b = 1 by its limits.
            let lam = (-(1.0 - b) * t).exp();
            let m2 = if b == 1.0 {
                1.0 + 2.0 * t
            } else {
                lam * (1.0 + b - 2.0 * b * lam) / (1.0 - b)
            };
            let n = MC_N as f64;
            let (e1, e2, e4) = (emp.mean(), emp.moment(2), emp.moment(4));
            let z1 = (e1 - lam).abs() / ((e2 - e1 * e1) / n).sqrt();
            let z2 = (e2 - m2).abs() / ((e4 - e2 * e2) / n).sqrt();
            worst_tv = worst_tv.max(rep.tv);
            worst_z = worst_z.max(z1).max(z2);
            pass &= rep.pass && z1 <= 3.0 && z2 <= 3.0;
            lines.push(format!("{b},{t},{:?},{e1:?},{e2:?}", rep.tv));
        }
    }
    Outcome {
        pass,
        detail: format!("15 (b,t) points, max TV {worst_tv:.4} (limit 0.015), max moment z {worst_z:.2} (limit 3)"),
        digest: lines.join("\n"),
    }
}

fn c7_lemma22(seed: u64) -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut stream = 0u64;
    let mut run = |a: f64, b: f64, t: f64, theta: f64| {
        let emp = simulate_replicates(&IBDParams::constant(a, b, 0).unwrap(), t, MC_N, seed, stream << 32).unwrap();
        stream += 1;
        let rep = check_law(&emp, &NegBinParams::new(a / b, theta).unwrap().to_pmf(), 0.015).unwrap();
        worst = worst.max(rep.tv);
        pass &= rep.pass;
        lines.push(format!("{a},{b},{t},{:?}", rep.tv));
    };
    for ratio in [0.5, 1.0, 2.0, 4.0] {
        for b in [0.3f64, 0.7, 1.0] {
            for t in [0.5, 1.0, 3.0] {
                // θ_t from its defining formula; b = 1 by the t/(1+t) limit.
                let theta = if b == 1.0 {
                    t / (1.0 + t)
                } else {
                    let lam = (-(1.0 - b) * t).exp();
                    b * (1.0 - lam) / (1.0 - b * lam)
                };
                run(ratio * b, b, t, theta);
            }
        }
    }
    // Stationary law NB(a/b, b), reached to double precision by t = 60.
    for ratio in [1.0, 4.0] {
        for b in [0.3, 0.7] {
            run(ratio * b, b, 60.0, b);
        }
    }
    Outcome {
        pass,
        detail: format!("{} checks incl. 4 stationary, max TV {worst:.4} (limit 0.015)", lines.len()),
        digest: lines.join("\n"),
    }
}

fn c8_coupling(seed: u64) -> Outcome {
    let mut rng = RngStream::new(seed, 0);
    let mut lines = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for i in [1, 3] {
        for r in [0.5, 2.0] {
            for p in [0.3, 0.7] {
                for t in [1.0, 3.0] {
                    let rep = coupling_check(i, r * p, p, t, MC_N, 0.02, &mut rng).unwrap();
                    worst = worst.max(rep.tv);
                    pass &= rep.pass;
                    lines.push(format!("{i},{r},{p},{t},{:?}", rep.tv));
                }
            }
        }
    }
    Outcome {
        pass,
        detail: format!("{} two-sample checks, max TV {worst:.4} (limit 0.02)", lines.len()),
        digest: lines.join("\n"),
    }
}

fn c9_max_pmf() -> Outcome {
    let mut pass = true;
    let mut worst_ratio = 0.0f64;
    let mut lines = Vec::new();
    for nb in grid().iter().filter(|nb| nb.r() > 0.5) {
        // Brute-force maximum over the materialized law.
        let pmf = nb.to_pmf();
        let exact = (0..pmf.end()).map(|k| pmf.prob(k)).fold(0.0f64, f64::max);
        let (r, q) = (nb.r(), nb.p());
        let kr = (0.5 * r.ln() + nbstein::numerics::log_gamma(r - 0.5).unwrap()
            - nbstein::numerics::log_gamma(r).unwrap())
        .exp();
        let phillips = ((1.0 - q) / (2.0 * E * r * q)).sqrt() * kr;
        pass &= exact <= phillips && (nb.pmf_max().value - exact).abs() <= 1e-12 * exact;
        worst_ratio = worst_ratio.max(exact / phillips);
        lines.push(format!("{r},{q},{exact:?},{phillips:?}"));
    }
    let rs: Vec<f64> = (3..=50).map(|k| 0.2 * k as f64).collect();
    let ks: Vec<f64> = rs.iter().map(|&r| k_r(r).unwrap()).collect();
    let decreasing = ks.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        pass: pass && decreasing,
        detail: format!(
            "{} grid points, max P/bound {worst_ratio:.4}; K_r decreasing on 0.6..10: {decreasing}",
            lines.len()
        ),
        digest: lines.join("\n"),
    }
}

fn c10_battery() -> Outcome {
    let battery = battery_v1();
    let spec = QuadratureSpec::default();
    let mut pass = true;
    let mut lines = Vec::new();
    let mut notes = Vec::new();
    for (k, entry) in battery.scenarios.iter().enumerate() {
        let mut rng = RngStream::new(battery.seed, k as u64);
        let rep = validate_scenario(&entry.scenario, battery.samples, &mut rng, &spec).unwrap();
        let ok = if matches!(entry.scenario.rate, IngestionRate::Constant { .. }) {
            rep.bound == 0.0 && rep.empirical_dw <= rep.mc_halfwidth
        } else {
            rep.pass
        };
        pass &= ok;
        notes.push(format!(
            "{}: dW {:.4} bound {:.3} hw {:.4}{}",
            entry.name,
            rep.empirical_dw,
            rep.bound,
            rep.mc_halfwidth,
            if ok { "" } else { " FAILED" }
        ));
        lines.push(serde_json::to_string(&rep).unwrap());
    }
    Outcome {
        pass,
        detail: format!("n={} per scenario; {}", battery.samples, notes.join("; ")),
        digest: lines.join("\n"),
    }
}

fn c11_nb_shift() -> Outcome {
    let spec = QuadratureSpec::default();
    let mut pass = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_identity = 0.0f64;
    for entry in battery_v1().scenarios {
        let s = compute_exposure(&entry.scenario, &spec).unwrap();
        let th = s.theta_t;
        let d = wasserstein_pmf(
            &NegBinParams::new(s.r_t, th).unwrap().to_pmf(),
            &NegBinParams::new(s.r_a_star, th).unwrap().to_pmf(),
        )
        .unwrap();
        let rhs = th / (1.0 - th) * (s.r_t - s.r_a_star).abs();
        worst_excess = worst_excess.max(d.value - rhs);
        worst_identity = worst_identity.max((rhs - s.a_t.abs()).abs());
        pass &= d.value <= rhs + 1e-9 && (rhs - s.a_t.abs()).abs() <= 1e-9;
    }
    Outcome::new(
        pass,
        format!("max dW - bound {worst_excess:.3e} (limit 1e-9); max |bound - |A_T|| {worst_identity:.3e}"),
    )
}

fn c12_appendix() -> Outcome {
    let tol = 1e-8;
    let mut pass = true;
    let mut worst_gap = f64::INFINITY;
    for k in 1..=9 {
        let th = k as f64 / 10.0;
        let rep = appendix_check(th, tol).unwrap();
        let closed = -6.0 * th + 14.0 * th * th - 14.0 / 3.0 * th.powi(3) - 8.0 * (th + 1.0) * (1.0 - th).ln();
        worst_gap = worst_gap.min(closed - rep.lhs);
        pass &= rep.pass && rep.lhs <= closed + tol;
    }
    // Central differences: halving h must cut the error about fourfold.
    let mut fd_ok = true;
    let mut worst_order = f64::INFINITY;
    for &tt in &[0.3, 0.6, 0.9] {
        for j in 2..=8u64 {
            for &th in &[0.1, 0.25, 0.5, 0.7] {
                let fd = |h: f64| (f_j(th + h, tt, j) - f_j(th - h, tt, j)) / (2.0 * h);
                let exact = f_j_prime(th, tt, j);
                let (e1, e2) = ((fd(1e-2) - exact).abs(), (fd(5e-3) - exact).abs());
                if e1 > 1e-9 {
                    let ratio = e1 / e2;
                    worst_order = worst_order.min(ratio);
                    fd_ok &= (3.5..=4.5).contains(&ratio);
                } else {
                    fd_ok &= e2 <= 1e-9;
                }
            }
        }
    }
    Outcome::new(
        pass && fd_ok,
        format!("θ_T = 0.1..0.9: min closed-form slack {worst_gap:.3e}; finite-difference error ratios ≥ {worst_order:.3} (O(h²) ⇒ ≈ 4)"),
    )
}

fn c13_poisson_limits() -> Outcome {
    let r0 = r0();
    let p = 1e-6;
    let mut worst = 0.0f64;
    for lambda in [0.5, 1.0, 5.0] {
        let b = nbstein::stein::theorem1_bound(&NegBinParams::new(lambda / p, p).unwrap(), r0);
        let want = [2.0, 1.0, (r0 / lambda).sqrt()];
        for (got, w) in b.components.iter().zip(want) {
            worst = worst.max((got - w).abs());
        }
    }
    let sc = ScenarioParams::new(
        IngestionRate::Sinusoid {
            abar: 2.0,
            amp: 0.5,
            period: 1.0,
            phase: 0.0,
        },
        2.0,
        1e-4,
        4.0,
    )
    .unwrap();
    let mu_t = compute_exposure(&sc, &QuadratureSpec::default()).unwrap().mu_t;
    let emp = sample_w_replicates(&sc, MC_N, 13_579).unwrap();
    let rep = check_law(&emp, &Poisson::new(mu_t).unwrap().to_pmf(), 0.02).unwrap();
    Outcome::new(
        worst <= 1e-4 && rep.pass,
        format!("max component deviation {worst:.3e} (limit 1e-4); TV(W, Po(μ_T={mu_t:.4})) = {:.4} (limit 0.02)", rep.tv),
    )
}

const SEED: u64 = 20_240_917;

fn mc_runs() -> Vec<(usize, fn() -> Outcome)> {
    vec![
        (6, || c6_lemma21(SEED)),
        (7, || c7_lemma22(SEED + 1)),
        (8, || c8_coupling(SEED + 2)),
        (9, c9_max_pmf),
        (10, c10_battery),
    ]
}

fn main() {
    let deterministic: Vec<(usize, &str, Duration, fn() -> Outcome)> = vec![
        (1, "Stein residual", Duration::from_secs(30), c1_stein_residual),
        (2, "G1 exactness", Duration::from_secs(10), c2_g1_exact),
        (3, "G2 certification", Duration::from_secs(60), c3_g2_certified),
        (4, "r0", Duration::from_secs(1), c4_r0),
        (5, "integral identities", Duration::from_secs(1), c5_integral_identities),
    ];
    let names = [
        (6, "single-ancestor law", Duration::from_secs(120)),
        (7, "immigration law", Duration::from_secs(180)),
        (8, "coupling", Duration::from_secs(120)),
        (9, "max-pmf bound", Duration::from_secs(5)),
        (10, "parasite battery", Duration::from_secs(300)),
    ];
    let later: Vec<(usize, &str, Duration, fn() -> Outcome)> = vec![
        (11, "NB shift step", Duration::from_secs(5), c11_nb_shift),
        (12, "appendix inequality", Duration::from_secs(30), c12_appendix),
        (13, "Poisson limits", Duration::from_secs(120), c13_poisson_limits),
    ];

    let mut failures = 0;
    let mut report = |id: usize, name: &str, limit: Duration, out: &Outcome, took: Duration| {
        let ok = out.pass && took <= limit;
        if !ok {
            failures += 1;
        }
        println!(
            "{} {id:>2} {name}: {} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    };

    for (id, name, limit, f) in deterministic {
        let start = Instant::now();
        let out = f();
        report(id, name, limit, &out, start.elapsed());
    }
    let mut first = Vec::new();
    for ((id, f), (_, name, limit)) in mc_runs().into_iter().zip(names) {
        let start = Instant::now();
        let out = f();
        report(id, name, limit, &out, start.elapsed());
        first.push(out.digest);
    }
    for (id, name, limit, f) in later {
        let start = Instant::now();
        let out = f();
        report(id, name, limit, &out, start.elapsed());
    }

    let start = Instant::now();
    let mut differing = Vec::new();
    for ((id, f), before) in mc_runs().into_iter().zip(&first) {
        if f().digest != *before {
            differing.push(id.to_string());
        }
    }
    let bytes: usize = first.iter().map(String::len).sum();
    let out = Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("items 6-10 re-run byte-identical ({bytes} bytes of output, {} workers)", rayon::current_num_threads())
        } else {
            format!("items {} differ on re-run", differing.join(", "))
        },
    );
    report(14, "reproducibility", Duration::from_secs(900), &out, start.elapsed());

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 14 criteria passed");
}
