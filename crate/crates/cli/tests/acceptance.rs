//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_GAPS` are evaluated exactly like the others and
//! print FAIL when they fail; they do not change the exit status. Any other
//! failure exits with status 1.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use psp_core::algebra::{to_fock, Cutoff, FockOperator, FockVector};
use psp_core::generation::{
    cpm_output, fock_cross_kerr, herald_probabilities, trigger_probability, GenerationParams,
    TriggerConvention,
};
use psp_core::metrics::{g2_zero_closed, g2_zero_oracle, hom, hom_fock};
use psp_core::psp::{loss_channel, pseudo_number_state, single_photon_fidelity, PhaseCount, PspParams};
use psp_core::qkd::{
    basis_fidelity_bound, basis_fidelity_exact, encode, optimize_mu, BasisState, ChannelParams, PhaseSet,
    Protocol, RateOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_GAPS: &[&str] = &["5b", "8a"];

const ORACLE_TOL: f64 = 1e-8;
const FOCK_CUTOFF: usize = 30;
const SINH_TOL: f64 = 1e-12;
const POISSON_G2_TOL: f64 = 1e-12;
const ANTIBUNCHED_G2_MAX: f64 = 0.01;
const LARGE_MU_G2_TOL: f64 = 0.05;
const HOM_NULL_TOL: f64 = 1e-12;
const COHERENT_F2002_TOL: f64 = 1e-10;
const PSP_F2002_MIN: f64 = 0.95;
const TRACE_TOL: f64 = 1e-10;
const HERALD_SUM_TOL: f64 = 1e-12;
const KERR_TOL: f64 = 1e-8;
const BASIS_SLACK: f64 = 1e-8;
const SMALL_MU_BASIS_MIN: f64 = 0.999;
const SLOPE_TOL: f64 = 0.2;

struct Report {
    rows: Vec<(String, bool)>,
}

impl Report {
    fn record(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        let gap = if !pass && KNOWN_GAPS.contains(&id) { " [known gap]" } else { "" };
        println!("{tag} {id:<3} {title}: {detail}{gap}");
        self.rows.push((id.to_string(), pass));
    }
}

fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| min * (max / min).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn max_abs_diff(a: &FockVector, b: &FockVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn criterion_1(r: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let ds = [2u32, 4, 8, 12];
    let mut worst = BTreeMap::<&str, f64>::new();
    let mut bump = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    for _ in 0..50 {
        let mu = rng.gen_range(0.01..=2.0);
        let d = ds[rng.gen_range(0..ds.len())];
        let p = PspParams::single_photon(mu, d).unwrap();
        let state = pseudo_number_state(&p).unwrap();
        let fock = to_fock(&state, Cutoff::Fixed(FOCK_CUTOFF)).unwrap();
        bump("norm", (state.norm_sqr() - fock.norm_sqr()).abs());
        let g2 = g2_zero_closed(mu, d).unwrap().value;
        bump("g2", (g2 - g2_zero_oracle(&fock).unwrap()).abs());

        let mu2 = rng.gen_range(0.01..=2.0);
        let d2 = ds[rng.gen_range(0..ds.len())];
        let q = PspParams::single_photon(mu2, d2).unwrap();
        let h = hom(&p, &q).unwrap();
        let (p11, f2002) = hom_fock(&p, &q, FOCK_CUTOFF).unwrap();
        bump("p11", (h.p11 - p11).abs());
        bump("f2002", (h.f2002 - f2002).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let max = worst.values().cloned().fold(0.0, f64::max);
    let detail = worst.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect::<Vec<_>>().join(", ");
    r.record(
        "1",
        "closed forms vs truncated Fock oracle, 50 random instances",
        max <= ORACLE_TOL && secs < 10.0,
        format!("max |diff| {detail} (tol {ORACLE_TOL:.0e}); {secs:.2} s (limit 10 s)"),
    );
}

fn criterion_2(r: &mut Report) {
    let f = single_photon_fidelity(0.1, PhaseCount::Finite(2)).unwrap();
    let expected = 0.1 / 0.1f64.sinh();
    r.record(
        "2a",
        "two-phase fidelity equals mu/sinh(mu) at mu = 0.1",
        (f - expected).abs() <= SINH_TOL,
        format!("{f:.15} vs {expected:.15} (tol {SINH_TOL:.0e})"),
    );

    let mut grid = log_grid(1e-8, 2.0, 80);
    grid.reverse();
    let mut ok = true;
    let mut last = Vec::new();
    for d in [2u32, 4, 8, 12] {
        let values: Vec<f64> = grid
            .iter()
            .map(|&mu| single_photon_fidelity(mu, PhaseCount::Finite(d)).unwrap())
            .collect();
        ok &= values.windows(2).all(|w| w[1] >= w[0]);
        let end = *values.last().unwrap();
        ok &= 1.0 - end < 1e-6;
        last.push(format!("d={d}: {end:.9}"));
    }
    r.record(
        "2b",
        "fidelity rises monotonically to 1 as mu decreases",
        ok,
        format!("values at mu = 1e-8: {}", last.join(", ")),
    );

    let inf = single_photon_fidelity(0.7, PhaseCount::Infinite).unwrap();
    r.record("2c", "continuous-phase limit returns exactly 1", inf == 1.0, format!("{inf:?}"));
}

fn criterion_3(r: &mut Report) {
    let worst = log_grid(1e-3, 50.0, 60)
        .iter()
        .map(|&mu| (g2_zero_closed(mu, 1).unwrap().value - 1.0).abs())
        .fold(0.0, f64::max);
    r.record(
        "3a",
        "g2(0) = 1 for a single phase",
        worst <= POISSON_G2_TOL,
        format!("max |g2 - 1| {worst:.1e} (tol {POISSON_G2_TOL:.0e})"),
    );

    let grid = log_grid(0.01, 20.0, 400);
    let mut ok = true;
    let mut parts = Vec::new();
    for d in [4u32, 8, 12] {
        let small = g2_zero_closed(0.01, d).unwrap().value;
        let peak = grid.iter().map(|&mu| g2_zero_closed(mu, d).unwrap().value).fold(0.0, f64::max);
        let large = g2_zero_closed(50.0, d).unwrap().value;
        ok &= small < ANTIBUNCHED_G2_MAX && peak > 1.0 && (large - 1.0).abs() <= LARGE_MU_G2_TOL;
        parts.push(format!("d={d}: g2(0.01)={small:.2e} max={peak:.3} g2(50)={large:.4}"));
    }
    r.record("3b", "sub-Poissonian, then super-Poissonian, then Poissonian", ok, parts.join("; "));
}

fn criterion_4(r: &mut Report) {
    let grid = log_grid(1e-3, 5.0, 40);
    let (mut p11_worst, mut f_worst) = (0.0f64, 0.0f64);
    for &mu in &grid {
        let p = PspParams::new(mu, 1, 0).unwrap();
        let h = hom(&p, &p).unwrap();
        p11_worst = p11_worst.max(h.p11.abs());
        f_worst = f_worst.max((h.f2002 - mu * mu * (-2.0 * mu).exp()).abs());
    }
    r.record(
        "4a",
        "identical coherent inputs never coincide",
        p11_worst <= HOM_NULL_TOL,
        format!("max P11 {p11_worst:.1e} (tol {HOM_NULL_TOL:.0e})"),
    );
    r.record(
        "4b",
        "coherent F2002 = mu^2 exp(-2 mu)",
        f_worst <= COHERENT_F2002_TOL,
        format!("max |diff| {f_worst:.1e} (tol {COHERENT_F2002_TOL:.0e})"),
    );
    let min = log_grid(1e-3, 1.0, 50)
        .iter()
        .map(|&mu| {
            let p = PspParams::single_photon(mu, 8).unwrap();
            hom(&p, &p).unwrap().f2002
        })
        .fold(1.0, f64::min);
    r.record(
        "4c",
        "identical d = 8 states interfere for mu <= 1",
        min >= PSP_F2002_MIN,
        format!("min F2002 {min:.4} (need >= {PSP_F2002_MIN})"),
    );
}

fn criterion_5(r: &mut Report) {
    let mus = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let etas = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];
    let mut trace_worst = 0.0f64;
    let mut shortfall: Option<(f64, f64, u32, f64, f64)> = None;
    let mut violations = 0;
    let mut total = 0;
    for d in [4u32, 8] {
        for &mu in &mus {
            for &eta in &etas {
                let loss = loss_channel(&PspParams::single_photon(mu, d).unwrap(), eta).unwrap();
                trace_worst = trace_worst.max((loss.exact.trace().re - 1.0).abs() + loss.exact.trace().im.abs());
                let f = loss.approximation_fidelity().unwrap().unwrap();
                let x = mu * (1.0 - eta);
                let need = 1.0 - 2.0 * x * x;
                total += 1;
                if f < need {
                    violations += 1;
                }
                if shortfall.map_or(true, |s| need - f > s.4 - s.3) {
                    shortfall = Some((mu, eta, d, f, need));
                }
            }
        }
    }
    r.record(
        "5a",
        "evolved operator has unit trace",
        trace_worst <= TRACE_TOL,
        format!("max |tr - 1| {trace_worst:.1e} (tol {TRACE_TOL:.0e})"),
    );
    let (mu, eta, d, f, need) = shortfall.unwrap();
    r.record(
        "5b",
        "two-term loss approximation fidelity >= 1 - 2(mu(1-eta))^2",
        violations == 0,
        format!(
            "{violations}/{total} grid points below the bound; worst mu={mu} eta={eta} d={d}: F={f:.6} vs {need:.6}"
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let mut worst = 0.0f64;
    for d in [2u32, 4, 8, 12] {
        for &mu in &[0.01, 0.5, 2.0, 10.0] {
            let g = GenerationParams::new(mu, 9.0, d, 0.5).unwrap();
            let sum: f64 = herald_probabilities(&g).unwrap().iter().sum();
            worst = worst.max((sum - 1.0).abs());
        }
    }
    r.record(
        "6a",
        "herald distribution sums to 1",
        worst <= HERALD_SUM_TOL,
        format!("max |sum - 1| {worst:.1e} (tol {HERALD_SUM_TOL:.0e})"),
    );

    let mut kerr_worst = 0.0f64;
    for &mu in &[0.1, 0.5, 1.0] {
        let (d, nu) = (4u32, 9.0);
        let g = GenerationParams::new(mu, nu, d, 1.0).unwrap();
        let input = psp_core::algebra::CoherentSuperposition::coherent(&[
            psp_core::algebra::Amplitude::new(f64::sqrt(mu), 0.0),
            psp_core::algebra::Amplitude::new(f64::sqrt(nu), 0.0),
        ]);
        let cutoff = Cutoff::Auto.resolve(&input);
        let kerr = fock_cross_kerr(&to_fock(&input, Cutoff::Fixed(cutoff)).unwrap(), d).unwrap();
        let built = to_fock(&cpm_output(&g).unwrap(), Cutoff::Fixed(cutoff)).unwrap();
        kerr_worst = kerr_worst.max(max_abs_diff(&kerr, &built));
    }
    r.record(
        "6b",
        "cross-Kerr evolution in the number basis matches the coherent construction (d = 4, nu = 9)",
        kerr_worst <= KERR_TOL,
        format!("max amplitude diff {kerr_worst:.1e} (tol {KERR_TOL:.0e})"),
    );

    let mut values = Vec::new();
    for conv in [TriggerConvention::Paper, TriggerConvention::Recomputed] {
        for d in [4u32, 8, 36] {
            let g = GenerationParams::new(0.45, 2.0 * (d * d) as f64, d, 0.12).unwrap();
            values.push(trigger_probability(&g, 1, conv).unwrap());
        }
    }
    r.record(
        "6c",
        "trigger probability of |1_d> is 1 in both exponent conventions",
        values.iter().all(|&v| v == 1.0),
        format!("{values:?}"),
    );
}

fn density(mu: f64, d: u32, j: u32, states: [BasisState; 2], cutoff: usize) -> FockOperator {
    let vs: Vec<FockVector> = states
        .iter()
        .map(|&s| to_fock(&encode(mu, d, j, s, PhaseSet::Standard).unwrap(), Cutoff::Fixed(cutoff)).unwrap())
        .collect();
    FockOperator::mixture(&[(0.5, &vs[0]), (0.5, &vs[1])]).unwrap()
}

fn criterion_7(r: &mut Report) {
    let mut ok = true;
    let mut parts = Vec::new();
    for &mu in &[0.1, 0.3, 0.6] {
        for j in [0u32, 1] {
            let d = 4;
            let probe = encode(mu, d, j, BasisState::ALL[0], PhaseSet::Standard).unwrap();
            let cutoff = Cutoff::Auto.resolve(&probe);
            let rho_x = density(mu, d, j, [BasisState::ALL[0], BasisState::ALL[1]], cutoff);
            let rho_y = density(mu, d, j, [BasisState::ALL[2], BasisState::ALL[3]], cutoff);
            let oracle = rho_x.uhlmann_fidelity(&rho_y).unwrap();
            let bound = basis_fidelity_bound(mu, d, j).unwrap();
            let gram = basis_fidelity_exact(mu, d, j, PhaseSet::Standard).unwrap();
            ok &= bound <= oracle + BASIS_SLACK;
            parts.push(format!("mu={mu} j={j}: {bound:.8} <= {oracle:.8} (gram {gram:.8})"));
        }
    }
    r.record(
        "7a",
        "basis fidelity bound never exceeds the number-basis fidelity (d = 4)",
        ok,
        format!("{} (slack {BASIS_SLACK:.0e})", parts.join("; ")),
    );

    let b0 = basis_fidelity_bound(1e-4, 8, 0).unwrap();
    let b1 = basis_fidelity_bound(1e-4, 8, 1).unwrap();
    r.record(
        "7b",
        "both bases indistinguishable at mu = 1e-4, d = 8",
        b0 >= SMALL_MU_BASIS_MIN && b1 >= SMALL_MU_BASIS_MIN,
        format!("j=0: {b0:.8}, j=1: {b1:.8} (need >= {SMALL_MU_BASIS_MIN})"),
    );
}

/// Least-squares slope of ln(rate) against ln(eta).
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_8(r: &mut Report) {
    let start = Instant::now();
    let opts = RateOptions::default();
    let distances: Vec<f64> = (0..=12).map(|i| 20.0 + 5.0 * i as f64).collect();
    let nondecoy_grid = log_grid(1e-7, 1.0, 701);
    let decoy_grid: Vec<f64> = (1..=1500).map(|i| i as f64 * 1e-3).collect();
    let curves = [
        ("8a", "WCS non-decoy", Protocol::WcsNondecoy, &nondecoy_grid, 2.0),
        ("8b", "WCS infinite decoy", Protocol::WcsDecoy, &decoy_grid, 1.0),
    ];
    for (id, name, protocol, grid, target) in curves {
        let mut points = Vec::new();
        let mut dead = None;
        for &l in &distances {
            let c = ChannelParams::default().at_distance(l);
            let (_, best) = optimize_mu(&c, &protocol, grid, &opts).unwrap();
            if best.rate > 0.0 {
                points.push((best.diagnostics["eta"], best.rate));
            } else if dead.is_none() {
                dead = Some(l);
            }
        }
        let title = format!("{name}: optimized rate scales as eta^{target} over 20-80 km");
        match dead {
            Some(l) => {
                let slope = if points.len() >= 2 { loglog_slope(&points) } else { f64::NAN };
                r.record(
                    id,
                    &title,
                    false,
                    format!(
                        "optimized rate is 0 from {l} km on, no fit over the full range; slope over the {} positive points {slope:.3}",
                        points.len()
                    ),
                );
            }
            None => {
                let slope = loglog_slope(&points);
                r.record(
                    id,
                    &title,
                    (slope - target).abs() <= SLOPE_TOL,
                    format!("slope {slope:.3} (target {target} +- {SLOPE_TOL})"),
                );
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.record("8c", "key-rate scaling runtime", secs < 60.0, format!("{secs:.2} s (limit 60 s)"));
}

fn run_psp(args: &[&str], out: &Path) -> std::process::Output {
    let output = Command::new(env!("CARGO_BIN_EXE_psp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("psp binary runs");
    assert!(output.status.success(), "psp {args:?}: {}", String::from_utf8_lossy(&output.stderr));
    output
}

fn criterion_9(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_psp(&["fig5", "--workers", "8"], dir.path());
    let secs = start.elapsed().as_secs_f64();

    let mut curves = BTreeMap::<(String, String), Vec<(f64, f64)>>::new();
    let mut reader = csv::Reader::from_path(dir.path().join("fig5.csv")).unwrap();
    for rec in reader.records() {
        let rec = rec.unwrap();
        let l: f64 = rec[4].parse().unwrap();
        let rate: f64 = rec[6].parse().unwrap();
        curves.entry((rec[0].to_string(), rec[1].to_string())).or_default().push((l, rate));
    }

    let wcs = &curves[&("WCS_NONDECOY".to_string(), String::new())];
    let cutoff = wcs.iter().find(|p| p.1 == 0.0).map(|p| p.0);
    let mut beyond = Vec::new();
    let mut ok_beyond = cutoff.is_some();
    for d in ["8", "36"] {
        let psp = &curves[&("PSP_PASSIVE_DECOY".to_string(), d.to_string())];
        let zero_points: Vec<usize> = (0..wcs.len()).filter(|&i| wcs[i].1 == 0.0).collect();
        let positive = zero_points.iter().filter(|&&i| psp[i].1 > 0.0).count();
        ok_beyond &= positive > 0;
        let reach = psp.iter().filter(|p| p.1 > 0.0).map(|p| p.0).fold(0.0, f64::max);
        beyond.push(format!("d={d}: positive at {positive} such points, reaches {reach} km"));
    }
    r.record(
        "9a",
        "PSP full discrimination keeps a positive rate where WCS non-decoy is 0",
        ok_beyond,
        format!("WCS non-decoy is 0 from {cutoff:?} km; {}", beyond.join("; ")),
    );

    let mut ok_trig = true;
    let mut trig = Vec::new();
    for ((proto, d), points) in &curves {
        if proto != "PSP_TRIGGERED" {
            continue;
        }
        let full = &curves[&("PSP_PASSIVE_DECOY".to_string(), d.clone())];
        let violations = points.iter().zip(full).filter(|(t, f)| t.1 > f.1).count();
        ok_trig &= violations == 0;
        trig.push(format!("d={d}: {violations} violations"));
    }
    r.record(
        "9b",
        "triggered rate <= full-discrimination rate at every distance",
        ok_trig && !trig.is_empty(),
        trig.join(", "),
    );

    let mut rising = Vec::new();
    for ((proto, d), points) in &curves {
        let n = points.windows(2).filter(|w| w[1].1 > w[0].1).count();
        if n > 0 {
            rising.push(format!("{proto} d={d}: {n} increases"));
        }
    }
    r.record(
        "9c",
        "every curve is nonincreasing in distance",
        rising.is_empty(),
        if rising.is_empty() { format!("{} curves checked", curves.len()) } else { rising.join(", ") },
    );
    r.record("9d", "fig5 runtime at 1 km resolution", secs < 300.0, format!("{secs:.2} s (limit 300 s)"));
}

fn criterion_10(r: &mut Report) {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    run_psp(&["fig1", "--workers", "8"], dirs[0].path());
    run_psp(&["fig1", "--workers", "8"], dirs[1].path());
    run_psp(&["fig1", "--workers", "1"], dirs[2].path());
    let bytes: Vec<Vec<u8>> = dirs.iter().map(|d| std::fs::read(d.path().join("fig1.csv")).unwrap()).collect();
    r.record(
        "10",
        "fig1 reruns are byte-identical (8 workers twice, 1 worker)",
        bytes[0] == bytes[1] && bytes[0] == bytes[2],
        format!("{} bytes each", bytes[0].len()),
    );
}

fn main() -> ExitCode {
    let mut r = Report { rows: Vec::new() };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    criterion_9(&mut r);
    criterion_10(&mut r);

    let passed = r.rows.iter().filter(|x| x.1).count();
    let unexpected: Vec<&str> = r
        .rows
        .iter()
        .filter(|(id, pass)| !pass && !KNOWN_GAPS.contains(&id.as_str()))
        .map(|(id, _)| id.as_str())
        .collect();
    println!("{passed}/{} checks passed", r.rows.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
