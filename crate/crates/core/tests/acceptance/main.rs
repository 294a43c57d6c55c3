//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. Uses its own harness so the report is always
//! printed.

#[path = "../common/mod.rs"]
mod common;

use std::f64::consts::TAU;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fhcorr::estimator::{
    all_coefficients, covariance_to_correlation, estimate_covariance, ComplexCorrelationMatrix, CovarianceMatrix,
    EstimatorConfig,
};
use fhcorr::graph::{max_spanning_tree, pmfg};
use fhcorr::ingest::{rescale_to_circle, Session, TickSeries, TimeAxis};
use fhcorr::spectral::{classify_components, eig_hermitian, eig_matrix, ClassifyConfig, ComponentTag};
use fhcorr::synthetic::{generate, sector_block_scenario, MarketScenario, SectorBlock};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Covariance matrices produced by the other criteria, checked by criterion 2.
#[derive(Default)]
struct Produced {
    covariances: Vec<(String, CovarianceMatrix)>,
}

impl Produced {
    fn correlation(&mut self, label: &str, series: &[TickSeries], tau: f64) -> ComplexCorrelationMatrix {
        let cov = estimate_covariance(series, tau).unwrap();
        let rho = covariance_to_correlation(&cov).unwrap();
        self.covariances.push((label.to_string(), cov));
        rho
    }
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed < limit
}

// 1. Re(complex correlation) against the summation-form real correlation.
fn algebraic_consistency(produced: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.random_range(2..=6);
        let t_span = 3600.0;
        let series: Vec<TickSeries> = (0..n)
            .map(|i| {
                let events = rng.random_range(20..=300);
                let vol = 10f64.powf(rng.random_range(-4.0..-1.0));
                random_series(&format!("A{i}"), events, t_span, vol, &mut rng)
            })
            .collect();
        let k = rng.random_range(1..=60usize);
        let tau = t_span / (2.0 * k as f64) * (1.0 - 1e-9);
        let rho = produced.correlation(&format!("consistency case {case}"), &series, tau);
        let config = EstimatorConfig::new(tau, t_span).unwrap();
        assert_eq!(config.harmonics, k);
        let oracle: Vec<(Vec<f64>, Vec<f64>)> = series
            .iter()
            .map(|s| {
                let r = rescale_to_circle(s).unwrap();
                summation_coefficients(r.times(), r.log_prices(), k)
            })
            .collect();
        let real = real_correlation(&oracle);
        for (i, row) in real.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                worst = worst.max((rho.get(i, j).re - r).abs());
            }
        }
    }
    let elapsed = t0.elapsed();
    outcome(
        worst <= 1e-12 && within(Duration::from_secs(60), elapsed),
        format!("max |Re ρ - ρ_real| = {worst:.2e} over 200 random sets (tol 1e-12)"),
    )
}

// 2. Every covariance produced above is exactly Hermitian and PSD.
fn gram_psd(produced: &mut Produced) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // Rank-deficient cases: more assets than harmonics.
    for case in 0..20 {
        let n = rng.random_range(8..=20);
        let series: Vec<TickSeries> =
            (0..n).map(|i| random_series(&format!("R{i}"), 200, 600.0, 1e-3, &mut rng)).collect();
        produced.correlation(&format!("rank-deficient case {case}"), &series, 100.0);
    }
    let mut worst_ratio = f64::INFINITY;
    let mut hermitian = true;
    let mut worst_label = String::new();
    for (label, cov) in &produced.covariances {
        let m = &cov.matrix;
        let n = m.n();
        for i in 0..n {
            hermitian &= m[(i, i)].im == 0.0;
            for j in 0..n {
                hermitian &= m[(i, j)] == m[(j, i)].conj();
            }
        }
        let ev = embedded_eigenvalues(m);
        let ratio = ev[ev.len() - 1] / ev[0];
        if ratio < worst_ratio {
            worst_ratio = ratio;
            worst_label = label.clone();
        }
    }
    outcome(
        hermitian && worst_ratio >= -1e-9,
        format!(
            "{} matrices, exact Hermitian: {hermitian}, min λ_min/λ_max = {worst_ratio:.2e} ({worst_label}; tol -1e-9)",
            produced.covariances.len()
        ),
    )
}

// 3. Lagged sinusoid pair: θ = -m·δ, |ρ| = 1.
fn closed_form_lag(produced: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let t_span = 100_000.0;
    let (m, lag) = (3.0, 2_000.0);
    let omega = m * TAU / t_span;
    let base = 100f64.ln();
    let lead = sampled_series("LEAD", 100_000, t_span, &mut rng, |t| base + 0.01 * (omega * t).sin());
    let follow = sampled_series("FOLLOW", 100_000, t_span, &mut rng, |t| base + 0.01 * (omega * (t - lag)).sin());
    let tau = t_span / 20.0;
    let rho = produced.correlation("lagged sinusoid", &[lead, follow], tau);
    let z = rho.get(0, 1);
    let expected = -m * TAU * lag / t_span;
    let (s, theta) = (z.norm(), theta_of(z));
    let elapsed = t0.elapsed();
    outcome(
        (theta - expected).abs() <= 1e-3 && (s - 1.0).abs() <= 1e-3 && within(Duration::from_secs(30), elapsed),
        format!("θ = {theta:.6} vs -m·δ = {expected:.6} (tol 1e-3), s = {s:.6} (tol 1e-3), K = 10, m = 3"),
    )
}

fn lagged_pair_theta(lag: f64, seed: u64, produced: &mut Produced, keep: bool) -> f64 {
    let s = MarketScenario::one_factor(&[1.0, 1.0], &[0.0, lag], &[0.0, 0.0], &[1.0, 1.0], "0-10000", seed);
    let series = generate(&s).unwrap().series().unwrap();
    let rho = if keep {
        produced.correlation(&format!("one-factor δ={lag} seed {seed}"), &series, 60.0)
    } else {
        covariance_to_correlation(&estimate_covariance(&series, 60.0).unwrap()).unwrap()
    };
    theta_of(rho.get(0, 1))
}

// 4. Sign law and trend of |θ| in δ.
fn sign_law(produced: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let correct = (0..100).filter(|&seed| lagged_pair_theta(30.0, seed, produced, seed < 5) < 0.0).count();
    let lags = [10.0, 30.0, 60.0, 120.0];
    let groups: Vec<Vec<f64>> = lags
        .iter()
        .map(|&d| (0..50).map(|seed| lagged_pair_theta(d, 1000 + seed, produced, false).abs()).collect())
        .collect();
    let (_, z, p) = jonckheere_terpstra(&groups);
    let means: Vec<String> = groups.iter().map(|g| format!("{:.3}", mean(g))).collect();
    let elapsed = t0.elapsed();
    outcome(
        correct >= 95 && p < 0.01 && within(Duration::from_secs(600), elapsed),
        format!(
            "leader found in {correct}/100 seeds (need ≥95); mean |θ| over δ=10,30,60,120 s: [{}], JT z = {z:.2}, p = {p:.1e} (need < 0.01)",
            means.join(", ")
        ),
    )
}

// 5. Market mode of a synchronous one-factor market.
fn market_mode(produced: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let n = 30;
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let s = MarketScenario::one_factor(&vec![1.0; n], &vec![0.0; n], &vec![0.2; n], &vec![1.0; n], "0-40000", seed);
        let series = generate(&s).unwrap().series().unwrap();
        let rho = produced.correlation(&format!("market mode seed {seed}"), &series, 60.0);
        let d = eig_hermitian(&rho).unwrap();
        let lambda = d.eigenvalues()[0];
        let phase = d.vector(0).iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
        pass &= lambda > 0.6 * n as f64 && phase < 0.05;
        lines.push(format!("λ1 = {lambda:.2}, max|phase| = {phase:.4}"));
    }
    let elapsed = t0.elapsed();
    outcome(
        pass && within(Duration::from_secs(300), elapsed),
        format!("n = 30, need λ1 > 18 and |phase| < 0.05: {}", lines.join("; ")),
    )
}

// 6. A sector lagged by 60 s shows up as a delayed component.
fn delayed_component(produced: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let mut block = SectorBlock::new(&[("A", 5, 0.0), ("B", 5, 60.0), ("C", 5, 0.0), ("D", 5, 0.0)]);
        block.market_beta = 2.0;
        block.sector_beta = 1.0;
        block.eta = 0.3;
        let market = generate(&sector_block_scenario(&block, "0-40000", seed)).unwrap();
        let series = market.series().unwrap();
        let rho = produced.correlation(&format!("lagged sector seed {seed}"), &series, 60.0);
        let d = eig_hermitian(&rho).unwrap();
        let classes = classify_components(&d, &ClassifyConfig::default(), &market.sector_table);
        let hit = classes.iter().skip(1).find_map(|c| {
            if c.tag != ComponentTag::Delayed {
                return None;
            }
            let v = d.vector(c.index);
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&a, &b| v[b].norm().total_cmp(&v[a].norm()));
            let from_b =
                order.iter().take(5).filter(|&&j| market.sector_table.sector_of(&d.assets()[j]) == Some("B")).count();
            (from_b * 5 >= 4 * 5).then_some((c.index + 1, c.dispersion, from_b))
        });
        match hit {
            Some((k, disp, from_b)) => {
                lines.push(format!("component {k} delayed, dispersion {disp:.3}, top-5 {from_b}/5 in B"))
            }
            None => {
                pass = false;
                lines.push("no delayed component dominated by B".into());
            }
        }
    }
    let elapsed = t0.elapsed();
    outcome(pass && within(Duration::from_secs(300), elapsed), format!("seeds 0-2: {}", lines.join("; ")))
}

fn sorted_pairs(edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    e.sort_unstable();
    e
}

// 7. MST against exhaustive and certificate oracles; PMFG size, planarity, MST backbone.
fn graph_structure(_: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut exhaustive, mut certified, mut pmfg_cases) = (0, 0, 0);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let n = rng.random_range(2..=12);
        let rho = random_correlation(n, n + rng.random_range(0..4), &mut rng);
        let w = magnitudes(&rho);
        let tree = max_spanning_tree(&rho).unwrap();
        let edges = sorted_pairs(tree.edge_pairs());
        let weight: f64 = edges.iter().map(|&(a, b)| w[a][b]).sum();
        if !is_spanning_tree(n, &edges) {
            failures.push(format!("case {case}: MST not a spanning tree"));
        }
        let prim = sorted_pairs(prim_max_spanning(&w));
        let prim_weight: f64 = prim.iter().map(|&(a, b)| w[a][b]).sum();
        if edges != prim || (weight - prim_weight).abs() > 1e-12 || !satisfies_cycle_property(&w, &edges) {
            failures.push(format!("case {case}: MST differs from Prim / cycle certificate"));
        }
        if n <= 7 {
            exhaustive += 1;
            let best = exhaustive_max_spanning_weight(&w);
            if (weight - best).abs() > 1e-12 {
                failures.push(format!("case {case}: weight {weight} < exhaustive {best}"));
            }
        } else {
            certified += 1;
        }
        if n >= 3 {
            pmfg_cases += 1;
            let g = pmfg(&rho).unwrap();
            let pe = sorted_pairs(g.edge_pairs());
            if pe.len() != 3 * (n - 2) {
                failures.push(format!("case {case}: PMFG has {} edges, expected {}", pe.len(), 3 * (n - 2)));
            }
            if !dmp_is_planar(n, &pe) {
                failures.push(format!("case {case}: PMFG fails the planarity oracle"));
            }
            if !edges.iter().all(|e| pe.binary_search(e).is_ok()) {
                failures.push(format!("case {case}: MST not contained in PMFG"));
            }
        }
    }
    let elapsed = t0.elapsed();
    let detail = if failures.is_empty() {
        format!(
            "1000 cases n ≤ 12: {exhaustive} exhaustive (n ≤ 7), {certified} Prim + cycle certificate; {pmfg_cases} PMFGs with 3(n-2) edges, planar, ⊇ MST"
        )
    } else {
        format!("{} failures, first: {}", failures.len(), failures[0])
    };
    outcome(failures.is_empty() && within(Duration::from_secs(300), elapsed), detail)
}

// 8. Same-sector pairs: larger s, smaller |θ|.
fn sector_scatter(produced: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let block = SectorBlock::new(&[("A", 5, 0.0), ("B", 5, 30.0), ("C", 5, 60.0)]);
        let market = generate(&sector_block_scenario(&block, "0-20000", seed)).unwrap();
        let series = market.series().unwrap();
        let rho = produced.correlation(&format!("sector scatter seed {seed}"), &series, 60.0);
        let names = rho.assets();
        let (mut same, mut cross) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
        for i in 0..rho.n() {
            for j in i + 1..rho.n() {
                let z = rho.get(i, j);
                let bucket = if names[i].as_bytes()[0] == names[j].as_bytes()[0] { &mut same } else { &mut cross };
                bucket.0.push(z.norm());
                bucket.1.push(theta_of(z).abs());
            }
        }
        let (ss, st, cs, ct) = (mean(&same.0), mean(&same.1), mean(&cross.0), mean(&cross.1));
        pass &= ss > cs && st < ct;
        lines.push(format!("same s {ss:.3} |θ| {st:.3} vs cross s {cs:.3} |θ| {ct:.3}"));
    }
    let elapsed = t0.elapsed();
    outcome(
        pass && within(Duration::from_secs(300), elapsed),
        format!("3 sectors × 5, lags 0/30/60 s: {}", lines.join("; ")),
    )
}

// 9. Eigensolver residuals at n = 222.
fn eigensolver(_: &mut Produced) -> Outcome {
    let t0 = Instant::now();
    let n = 222;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_rec, mut worst_orth): (f64, f64) = (0.0, 0.0);
    for _ in 0..3 {
        let a = random_psd(n, 300, &mut rng);
        let d = eig_matrix(&tickers(n), &a).unwrap();
        let v = d.vectors();
        let lambda = d.eigenvalues();
        let mut rec = 0.0;
        let mut orth = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                let mut g = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += v[k][i] * v[k][j].conj() * lambda[k];
                    g += v[i][k].conj() * v[j][k];
                }
                rec += (s - a[(i, j)]).norm_sqr();
                let target = if i == j { 1.0 } else { 0.0 };
                orth += (g - target).norm_sqr();
            }
        }
        worst_rec = worst_rec.max(rec.sqrt());
        worst_orth = worst_orth.max(orth.sqrt());
    }
    let elapsed = t0.elapsed();
    outcome(
        worst_rec < 1e-8 * n as f64 && worst_orth < 1e-10 && within(Duration::from_secs(60), elapsed),
        format!(
            "3 random 222×222 PSD: ‖VΛVᴴ - A‖_F = {worst_rec:.2e} (tol {:.2e}), ‖VᴴV - I‖_F = {worst_orth:.2e} (tol 1e-10)",
            1e-8 * n as f64
        ),
    )
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

// 10. 10⁷ events, 100 assets, K = 5000: coefficient stage time and memory.
fn performance(_: &mut Produced) -> Outcome {
    let (assets, per_asset, k) = (100, 100_000, 5000);
    let series: Vec<TickSeries> = (0..assets)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(10_000 + i as u64);
            let mut times: Vec<f64> = (0..per_asset - 1).map(|_| rng.random::<f64>() * TAU).collect();
            times.push(0.0);
            times.sort_by(f64::total_cmp);
            times.dedup();
            let mut p = 0.0;
            let prices = times
                .iter()
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    p += 1e-4 * z;
                    p
                })
                .collect();
            let sessions = vec![Session::new(0.0, 100_000.0)];
            TickSeries::from_parts(format!("P{i:03}"), times, prices, 100_000.0, sessions, TimeAxis::Circle).unwrap()
        })
        .collect();
    let events: usize = series.iter().map(TickSeries::len).sum();
    let config = EstimatorConfig::with_harmonics(100_000.0, k).unwrap();
    let t0 = Instant::now();
    let coeffs = all_coefficients(&series, &config).unwrap();
    let elapsed = t0.elapsed();
    assert_eq!(coeffs.len(), assets);
    let finite = coeffs.iter().all(|c| c.a.iter().chain(&c.b).all(|v| v.is_finite()));
    let peak = peak_rss_bytes();
    let cores = rayon::current_num_threads();
    let mem_ok = peak.is_some_and(|b| b < 4 << 30);
    outcome(
        finite && elapsed < Duration::from_secs(60) && mem_ok,
        format!(
            "{events} events, K = {k}: coefficients in {:.1} s on {cores} thread(s) (limit 60 s), peak RSS {} (limit 4 GiB)",
            elapsed.as_secs_f64(),
            peak.map_or("unknown".into(), |b| format!("{:.0} MiB", b as f64 / (1 << 20) as f64))
        ),
    )
}

type Criterion = fn(&mut Produced) -> Outcome;

fn main() {
    let criteria: [(usize, &str, Criterion); 10] = [
        (1, "algebraic consistency", algebraic_consistency),
        (3, "closed-form lag recovery", closed_form_lag),
        (4, "stochastic lead-lag sign law", sign_law),
        (5, "market-mode structure", market_mode),
        (6, "delayed-component detection", delayed_component),
        (7, "graph structure", graph_structure),
        (8, "sector magnitude-phase pattern", sector_scatter),
        (9, "eigensolver", eigensolver),
        (10, "performance", performance),
        // Last, so it sees every covariance produced by the others.
        (2, "Gram/PSD invariant", gram_psd),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut produced = Produced::default();
    let mut results = Vec::new();
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let r = panic::catch_unwind(AssertUnwindSafe(|| f(&mut produced))).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t0.elapsed().as_secs_f64();
        eprintln!("criterion {id} finished in {secs:.1} s");
        results.push((id, name, r, secs));
    }
    results.sort_by_key(|r| r.0);
    println!();
    for (id, name, r, secs) in &results {
        println!("{} [{id:>2}] {name}: {} ({secs:.1} s)", if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("\nacceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
