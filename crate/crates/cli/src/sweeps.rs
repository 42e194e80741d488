//! Figure datasets. Every grid point is a pure function of the configuration,
//! evaluated on a worker pool and collected in grid order.

use std::collections::BTreeMap;

use psp_core::metrics::{g2_zero_closed, hom};
use psp_core::psp::{fidelity_to_number_state, PspParams};
use psp_core::qkd::{
    basis_fidelity_bound, basis_fidelity_exact, keyrate, optimize_mu, KeyRateResult, PhaseSet, Protocol,
};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Config, PspCurve};
use crate::error::CliError;
use crate::output::{Cell, Table};

pub const FIG1_QUANTITIES: [&str; 4] = ["FIDELITY", "G2", "P11", "F2002"];

/// A finished table plus summary diagnostics for the manifest.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub table: Table,
    pub diagnostics: BTreeMap<String, Value>,
}

/// Runs `f` over `items` on `workers` threads (rayon's default when `None`),
/// returning results in input order.
pub fn par_map<T, R, F>(workers: Option<usize>, items: &[T], f: F) -> Result<Vec<R>, CliError>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R, CliError> + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn check_nonempty<T>(name: &str, v: &[T]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Config(format!("{name} grid is empty")));
    }
    Ok(())
}

struct Fig1Point {
    fidelity: f64,
    g2: f64,
    g2_residue: f64,
    p11: f64,
    f2002: f64,
}

pub fn fig1(config: &Config) -> Result<Sweep, CliError> {
    let mu = config.fig1.mu.values()?;
    check_nonempty("fig1.d", &config.fig1.d)?;
    let points: Vec<(u32, f64)> = config
        .fig1
        .d
        .iter()
        .flat_map(|&d| mu.iter().map(move |&m| (d, m)))
        .collect();
    let results = par_map(config.run.workers, &points, |&(d, mu)| {
        let p = PspParams::single_photon(mu, d)?;
        let g2 = g2_zero_closed(mu, d)?;
        let h = hom(&p, &p)?;
        Ok(Fig1Point {
            fidelity: fidelity_to_number_state(&p)?,
            g2: g2.value,
            g2_residue: g2.residue,
            p11: h.p11,
            f2002: h.f2002,
        })
    })?;

    let mut table = Table::new(&["quantity", "d", "mu", "value"]);
    for q in FIG1_QUANTITIES {
        for ((d, mu), r) in points.iter().zip(&results) {
            let v = match q {
                "FIDELITY" => r.fidelity,
                "G2" => r.g2,
                "P11" => r.p11,
                _ => r.f2002,
            };
            table.push(vec![Cell::text(q), Cell::Int(*d as i64), Cell::Float(*mu), Cell::Float(v)]);
        }
    }
    let max_residue = results.iter().map(|r| r.g2_residue).fold(0.0, f64::max);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("points".into(), Value::from(points.len()));
    diagnostics.insert("g2_max_imaginary_residue".into(), Value::from(max_residue));
    Ok(Sweep { table, diagnostics })
}

pub fn fig4(config: &Config) -> Result<Sweep, CliError> {
    let mu = config.fig4.mu.values()?;
    check_nonempty("fig4.d", &config.fig4.d)?;
    check_nonempty("fig4.j", &config.fig4.j)?;
    let mut points = Vec::new();
    for &d in &config.fig4.d {
        for &j in &config.fig4.j {
            for &m in &mu {
                points.push((d, j, m));
            }
        }
    }
    let results = par_map(config.run.workers, &points, |&(d, j, mu)| {
        Ok((basis_fidelity_bound(mu, d, j)?, basis_fidelity_exact(mu, d, j, PhaseSet::Standard)?))
    })?;
    let mut table = Table::new(&["quantity", "d", "j", "mu", "bound", "exact"]);
    let mut max_gap: f64 = 0.0;
    for (&(d, j, mu), &(bound, exact)) in points.iter().zip(&results) {
        max_gap = max_gap.max(bound - exact);
        table.push(vec![
            Cell::text("BASIS_FIDELITY"),
            Cell::Int(d as i64),
            Cell::Int(j as i64),
            Cell::Float(mu),
            Cell::Float(bound),
            Cell::Float(exact),
        ]);
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("points".into(), Value::from(points.len()));
    diagnostics.insert("max_bound_minus_exact".into(), Value::from(max_gap));
    Ok(Sweep { table, diagnostics })
}

/// One curve of the key-rate figure: a protocol at fixed or optimized μ.
#[derive(Debug, Clone, Copy)]
struct Curve {
    protocol: Protocol,
    mu: CurveMu,
}

#[derive(Debug, Clone, Copy)]
enum CurveMu {
    Fixed(f64),
    NondecoyGrid,
    DecoyGrid,
    PspGrid,
}

fn fig5_curves(config: &Config) -> Vec<Curve> {
    let f = &config.fig5;
    let psp_mu = |c: &PspCurve| if f.optimize_mu { CurveMu::PspGrid } else { CurveMu::Fixed(c.mu) };
    let mut curves = vec![
        Curve { protocol: Protocol::WcsNondecoy, mu: CurveMu::NondecoyGrid },
        Curve { protocol: Protocol::WcsDecoy, mu: CurveMu::DecoyGrid },
    ];
    for c in &f.psp {
        curves.push(Curve { protocol: Protocol::PspPassiveDecoy { d: c.d }, mu: psp_mu(c) });
    }
    if f.psp_nondecoy {
        for c in &f.psp {
            curves.push(Curve { protocol: Protocol::PspNondecoy { d: c.d }, mu: psp_mu(c) });
        }
    }
    if f.triggered {
        let eta_trigger = f.eta_trigger.unwrap_or(config.channel.eta_det);
        for c in &f.psp {
            let protocol = match f.nu {
                Some(nu) => Protocol::PspTriggered { d: c.d, nu, eta_trigger },
                None => Protocol::triggered(c.d, eta_trigger),
            };
            curves.push(Curve { protocol, mu: psp_mu(c) });
        }
    }
    curves
}

pub fn fig5(config: &Config) -> Result<Sweep, CliError> {
    let f = &config.fig5;
    let distances = f.distance_km.values()?;
    let nondecoy = f.nondecoy_mu.values()?;
    let decoy = f.decoy_mu.values()?;
    let psp_grid = f.psp_mu.values()?;
    let curves = fig5_curves(config);
    let points: Vec<(usize, f64)> = (0..curves.len())
        .flat_map(|c| distances.iter().map(move |&l| (c, l)))
        .collect();
    let opts = config.rates;
    let results: Vec<KeyRateResult> = par_map(config.run.workers, &points, |&(c, l)| {
        let curve = curves[c];
        let channel = config.channel.at_distance(l);
        let grid = match curve.mu {
            CurveMu::Fixed(mu) => return Ok(keyrate(&channel, mu, &curve.protocol, &opts)?),
            CurveMu::NondecoyGrid => &nondecoy,
            CurveMu::DecoyGrid => &decoy,
            CurveMu::PspGrid => &psp_grid,
        };
        Ok(optimize_mu(&channel, &curve.protocol, grid, &opts)?.1)
    })?;

    let mut table = Table::new(&["protocol", "d", "mu", "nu", "distance_km", "eta", "rate", "gain", "qber"]);
    let mut notes = BTreeMap::<String, usize>::new();
    for r in &results {
        let eta = r.diagnostics.get("eta").copied().map_or(Cell::Missing, Cell::Float);
        table.push(vec![
            Cell::text(r.protocol.as_str()),
            r.d.map_or(Cell::Missing, |d| Cell::Int(d as i64)),
            Cell::Float(r.mu),
            r.nu.map_or(Cell::Missing, Cell::Float),
            Cell::Float(r.distance_km),
            eta,
            Cell::Float(r.rate),
            Cell::Float(r.gain),
            Cell::Float(r.qber),
        ]);
        for n in &r.notes {
            *notes.entry(format!("{}: {n}", r.protocol.as_str())).or_default() += 1;
        }
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("points".into(), Value::from(points.len()));
    diagnostics.insert(
        "curves".into(),
        Value::from(curves.iter().map(|c| format!("{:?}", c.protocol)).collect::<Vec<_>>()),
    );
    diagnostics.insert(
        "triggered_gain_model".into(),
        Value::from("Q_t = sum_j P_j eta_t(j) Y_j over pseudo-number classes"),
    );
    diagnostics.insert(
        "notes".into(),
        Value::Object(notes.into_iter().map(|(k, v)| (k, Value::from(v))).collect()),
    );
    Ok(Sweep { table, diagnostics })
}
