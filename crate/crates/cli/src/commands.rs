use std::f64::consts::PI;

use anyhow::{bail, ensure, Result};
use heisenring::basis::{enumerate_sector, Sector};
use heisenring::bethe::{
    bethe_residual, continue_in_n, dhar_shastry_eps, hermite_init, newton_refine, single_magnon, sutherland_sweep,
    ContinuationOutcome, ContinuationSchedule, NewtonOptions,
};
use heisenring::eigensolve::{labeled_spectrum, Method, SolverConfig, TwiceSpin};
use heisenring::spectra::{e0_table, foel_check, sutherland_from_report, truncate_decimals, FOEL_TOLERANCE};
use heisenring::tldiagrams::{highest_weight_dim, spectrum_via_diagrams, verify_relations, DiagramSpace};
use heisenring::{Geometry, SpectrumReport64};
use serde::Serialize;

use crate::output::{json, Csv, F};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Success,
    NonConvergence,
    VerificationFailed,
}

pub struct Settings {
    pub geometry: Geometry,
    pub solver: SolverConfig<f64>,
    pub format: Format,
}

pub struct Rendered {
    pub text: String,
    pub status: Status,
    /// Human-readable lines for stderr.
    pub notes: Vec<String>,
}

impl Rendered {
    fn new(text: String, status: Status) -> Self {
        Self { text, status, notes: Vec::new() }
    }
}

const CONVENTION: &str = "2H";

fn spin_value(s: Option<TwiceSpin>) -> Option<f64> {
    s.map(TwiceSpin::value)
}

fn spin_text(s: Option<TwiceSpin>) -> String {
    s.map(|s| s.value().to_string()).unwrap_or_default()
}

fn report(n: usize, k: usize, geometry: Geometry, solver: &SolverConfig<f64>) -> Result<SpectrumReport64> {
    let basis = enumerate_sector(Sector::new(n, k, geometry)?)?;
    Ok(labeled_spectrum(&basis, solver)?)
}

#[derive(Serialize)]
struct LevelOut {
    energy: F,
    s: Option<f64>,
    momenta: Vec<usize>,
    multiplicity: usize,
}

#[derive(Serialize)]
struct SpectrumOut {
    #[serde(rename = "N")]
    n: usize,
    geometry: Geometry,
    convention: &'static str,
    k: usize,
    method: Method,
    levels: Vec<LevelOut>,
}

pub fn spectrum(n: usize, k: Option<usize>, settings: &Settings) -> Result<Rendered> {
    let k = k.unwrap_or(n / 2);
    let rep = report(n, k, settings.geometry, &settings.solver)?;
    let text = match settings.format {
        Format::Json => json(&SpectrumOut {
            n,
            geometry: settings.geometry,
            convention: CONVENTION,
            k,
            method: rep.method,
            levels: rep
                .levels
                .iter()
                .map(|l| LevelOut {
                    energy: F(l.energy_2h),
                    s: spin_value(l.total_spin),
                    momenta: l.momenta.clone(),
                    multiplicity: l.multiplicity,
                })
                .collect(),
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["energy", "s", "j", "level_multiplicity"]);
            for l in &rep.levels {
                let js: Vec<String> =
                    if l.momenta.is_empty() { vec![String::new()] } else { l.momenta.iter().map(usize::to_string).collect() };
                for j in js {
                    csv.row(&[F(l.energy_2h).text(), spin_text(l.total_spin), j, l.multiplicity.to_string()])?;
                }
            }
            csv.finish()?
        }
    };
    Ok(Rendered::new(text, Status::Success))
}

#[derive(Serialize)]
struct E0Out {
    k: usize,
    s: f64,
    energy_h: F,
    /// Nine decimals, truncated rather than rounded.
    truncated: String,
}

#[derive(Serialize)]
struct FoelOut {
    #[serde(rename = "N")]
    n: usize,
    e0: Vec<E0Out>,
    violations: Vec<(usize, usize)>,
    equalities: Vec<(usize, usize)>,
    holds: bool,
    summary: String,
}

#[derive(Serialize)]
struct FoelFile {
    geometry: Geometry,
    convention: &'static str,
    tolerance_2h: F,
    tables: Vec<FoelOut>,
}

fn pairs(p: &[(usize, usize)]) -> String {
    p.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(" ")
}

pub fn foel(ns: &[usize], settings: &Settings) -> Result<Rendered> {
    let mut tables = Vec::new();
    for &n in ns {
        let table = e0_table(n, settings.geometry, &settings.solver)?;
        let finding = foel_check(&table);
        let mut summary = if finding.holds() {
            format!("N={n}: FOEL holds")
        } else {
            format!("N={n}: FOEL violated at {}", pairs(&finding.violations))
        };
        if !finding.equalities.is_empty() {
            summary.push_str(&format!("; ties at {}", pairs(&finding.equalities)));
        }
        tables.push(FoelOut {
            n,
            e0: table
                .e0_h
                .iter()
                .enumerate()
                .map(|(k, &e)| E0Out {
                    k,
                    s: TwiceSpin::for_deviates(n, k).value(),
                    energy_h: F(e),
                    truncated: truncate_decimals(e, 9),
                })
                .collect(),
            holds: finding.holds(),
            violations: finding.violations,
            equalities: finding.equalities,
            summary,
        });
    }
    let notes = tables.iter().map(|t| t.summary.clone()).collect();
    let text = match settings.format {
        Format::Json => json(&FoelFile {
            geometry: settings.geometry,
            convention: "H",
            tolerance_2h: F(FOEL_TOLERANCE),
            tables,
        })?,
        Format::Csv => {
            let mut csv = Csv::new(&["N", "k", "s", "energy_h", "truncated"]);
            for t in &tables {
                for e in &t.e0 {
                    csv.row(&[t.n.to_string(), e.k.to_string(), e.s.to_string(), e.energy_h.text(), e.truncated.clone()])?;
                }
            }
            csv.finish()?
        }
    };
    Ok(Rendered { text, status: Status::Success, notes })
}

#[derive(Serialize)]
struct SutherlandRowOut {
    k: usize,
    spin_min: F,
    momentum_min: F,
    equal: bool,
}

#[derive(Serialize, Clone, Copy)]
struct BandPoint {
    j: usize,
    cos_theta: F,
    energy: F,
}

#[derive(Serialize)]
struct SutherlandOut {
    #[serde(rename = "N")]
    n: usize,
    convention: &'static str,
    rows: Vec<SutherlandRowOut>,
    all_equal: bool,
    /// Lowest energy at each momentum `θ = 2πj/N`, `0 ≤ j ≤ N/2`.
    lowest_band: Vec<BandPoint>,
    lowest_band_monotone: bool,
}

fn cos_theta(j: usize, n: usize) -> f64 {
    (2.0 * PI * j as f64 / n as f64).cos()
}

pub fn sutherland(ns: &[usize], settings: &Settings) -> Result<Rendered> {
    ensure!(settings.geometry == Geometry::Ring, "the Sutherland comparison needs ring geometry");
    let mut reports = Vec::new();
    let mut projections = Vec::new();
    for &n in ns {
        let rep = report(n, n / 2, Geometry::Ring, &settings.solver)?;
        let check = sutherland_from_report(&rep)?;
        let lowest_band: Vec<BandPoint> = (0..=n / 2)
            .filter_map(|j| {
                rep.min_with_momentum(&[j, (n - j) % n]).map(|e| BandPoint { j, cos_theta: F(cos_theta(j, n)), energy: F(e) })
            })
            .collect();
        // j increases while cos θ decreases, so the band must rise
        let monotone = lowest_band.windows(2).all(|w| w[1].energy.0 > w[0].energy.0 - FOEL_TOLERANCE);
        let mut points = Vec::new();
        for l in &rep.levels {
            for &j in &l.momenta {
                let lowest = lowest_band.iter().any(|b| (b.j == j || b.j == n - j) && b.energy.0 == l.energy_2h);
                points.push((n, j, cos_theta(j, n), l.energy_2h, l.total_spin, lowest));
            }
        }
        projections.push(points);
        reports.push(SutherlandOut {
            n,
            convention: CONVENTION,
            all_equal: check.all_equal(),
            rows: check
                .rows
                .iter()
                .map(|r| SutherlandRowOut { k: r.deviates, spin_min: F(r.spin_min_2h), momentum_min: F(r.momentum_min_2h), equal: r.equal })
                .collect(),
            lowest_band,
            lowest_band_monotone: monotone,
        });
    }
    let notes = reports
        .iter()
        .map(|r| {
            let verdict = if r.all_equal { "all equal" } else { "MISMATCH" };
            let band = if r.lowest_band_monotone { "monotone" } else { "not monotone" };
            format!("N={}: spin and momentum minima {verdict}; lowest band {band} in cos θ", r.n)
        })
        .collect();
    let status = if reports.iter().all(|r| r.all_equal) { Status::Success } else { Status::VerificationFailed };
    let text = match settings.format {
        Format::Json => json(&reports)?,
        Format::Csv => {
            let mut csv = Csv::new(&["N", "j", "cos_theta", "energy", "s", "lowest_band"]);
            for (n, j, c, e, s, lowest) in projections.into_iter().flatten() {
                csv.row(&[n.to_string(), j.to_string(), F(c).text(), F(e).text(), spin_text(s), lowest.to_string()])?;
            }
            csv.finish()?
        }
    };
    Ok(Rendered { text, status, notes })
}

#[derive(Serialize)]
struct RelationsOut {
    idempotent: bool,
    braid: bool,
    distant_commute: bool,
    intertwining: bool,
    dimension_identity: bool,
}

#[derive(Serialize)]
struct DiagramLevelOut {
    energy: F,
    a_eigenvalue: F,
    multiplicity: usize,
    exact: bool,
}

#[derive(Serialize)]
struct RemovedOut {
    re: F,
    im: F,
    kernel_multiplicity: usize,
}

#[derive(Serialize)]
struct TlOut {
    #[serde(rename = "N")]
    n: usize,
    geometry: Geometry,
    k: usize,
    convention: &'static str,
    diagram_dim: usize,
    highest_weight_dim: usize,
    kernel_dim: usize,
    relations: RelationsOut,
    route_equivalent: bool,
    levels: Vec<DiagramLevelOut>,
    removed: Vec<RemovedOut>,
    defective: bool,
    passed: bool,
}

pub fn tl_verify(n: usize, k: usize, settings: &Settings) -> Result<Rendered> {
    let space = DiagramSpace::new(n, k, settings.geometry)?;
    let check = verify_relations(&space)?;
    let diagrams = spectrum_via_diagrams(n, k, settings.geometry)?;
    let ed = report(n, k, settings.geometry, &settings.solver)?;
    let mut want = Vec::new();
    for l in ed.with_spin(TwiceSpin::for_deviates(n, k)) {
        want.extend(std::iter::repeat_n(l.energy_2h, l.multiplicity));
    }
    let got = diagrams.energies();
    let route_equivalent = got.len() == want.len() && got.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-8);
    let passed = check.all() && route_equivalent;
    let out = TlOut {
        n,
        geometry: settings.geometry,
        k,
        convention: CONVENTION,
        diagram_dim: space.dim(),
        highest_weight_dim: highest_weight_dim(n, k),
        kernel_dim: diagrams.kernel_dim,
        relations: RelationsOut {
            idempotent: check.idempotent,
            braid: check.braid,
            distant_commute: check.distant_commute,
            intertwining: check.intertwining,
            dimension_identity: check.dimension_identity,
        },
        route_equivalent,
        levels: diagrams
            .levels
            .iter()
            .map(|l| DiagramLevelOut { energy: F(l.energy_2h), a_eigenvalue: F(l.a_eigenvalue), multiplicity: l.multiplicity, exact: l.exact })
            .collect(),
        removed: diagrams
            .removed
            .iter()
            .map(|r| RemovedOut { re: F(r.a_eigenvalue.re), im: F(r.a_eigenvalue.im), kernel_multiplicity: r.kernel_multiplicity })
            .collect(),
        defective: diagrams.defective,
        passed,
    };
    let removed: Vec<String> = out.removed.iter().map(|r| format!("{}", r.re.0 + 0.0)).collect();
    let notes = vec![format!(
        "N={n} k={k} {}: relations {}, routes {}, kernel dim {}, removed A eigenvalues [{}]",
        settings.geometry,
        if check.all() { "ok" } else { "FAILED" },
        if route_equivalent { "agree" } else { "DISAGREE" },
        out.kernel_dim,
        removed.join(", ")
    )];
    let text = match settings.format {
        Format::Json => json(&out)?,
        Format::Csv => {
            let mut csv = Csv::new(&["kind", "energy", "a_re", "a_im", "multiplicity"]);
            for l in &out.levels {
                csv.row(&["level".into(), l.energy.text(), l.a_eigenvalue.text(), F(0.0).text(), l.multiplicity.to_string()])?;
            }
            for r in &out.removed {
                csv.row(&["removed".into(), String::new(), r.re.text(), r.im.text(), r.kernel_multiplicity.to_string()])?;
            }
            csv.finish()?
        }
    };
    let status = if passed { Status::Success } else { Status::VerificationFailed };
    Ok(Rendered { text, status, notes })
}

pub struct BetheArgs {
    pub k: usize,
    pub n: Option<usize>,
    pub n_start: f64,
    pub n_target: Option<f64>,
    pub scale: f64,
    pub ed_max_n: usize,
}

#[derive(Serialize)]
struct EdCheck {
    nearest: F,
    matches: bool,
}

#[derive(Serialize)]
struct BetheRow {
    #[serde(rename = "N")]
    n: F,
    energy: Option<F>,
    residual: F,
    roots: Vec<(F, F)>,
    mode_numbers: Vec<i64>,
    /// `2(1 − cos(2πj/N))`, single magnons only.
    exact: Option<F>,
    ed: Option<EdCheck>,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum OutcomeOut {
    Completed,
    Chaotic { last_converged_n: F, attempted_n: F, reason: String },
}

#[derive(Serialize)]
struct BetheOut {
    k: usize,
    convention: &'static str,
    n_start: Option<F>,
    n_target: Option<F>,
    rows: Vec<BetheRow>,
    refined_at: Vec<F>,
    breakdown_density: Option<F>,
    outcome: OutcomeOut,
}

const ED_MATCH_TOL: f64 = 1e-6;

fn ed_check(n: usize, k: usize, energy: f64, settings: &Settings) -> Result<EdCheck> {
    let rep = report(n, k, Geometry::Ring, &settings.solver)?;
    let nearest = rep
        .eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| (a - energy).abs().total_cmp(&(b - energy).abs()))
        .unwrap_or(f64::NAN);
    Ok(EdCheck { nearest: F(nearest), matches: (nearest - energy).abs() < ED_MATCH_TOL })
}

fn is_integer(x: f64) -> Option<usize> {
    (x >= 0.0 && x.fract() == 0.0).then_some(x as usize)
}

pub fn bethe(args: &BetheArgs, settings: &Settings) -> Result<Rendered> {
    ensure!(settings.geometry == Geometry::Ring, "Bethe roots are computed on the ring");
    ensure!(args.k >= 1, "need at least one magnon");
    let mut rows = Vec::new();
    let mut out = BetheOut {
        k: args.k,
        convention: CONVENTION,
        n_start: None,
        n_target: None,
        rows: Vec::new(),
        refined_at: Vec::new(),
        breakdown_density: None,
        outcome: OutcomeOut::Completed,
    };
    let mut status = Status::Success;
    if let (1, Some(n)) = (args.k, args.n) {
        // closed-form dispersion over every momentum
        for j in 0..n {
            let s = single_magnon::<f64>(n, j)?;
            let residual = bethe_residual(&s)?.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();
            let energy = s.energy()?;
            let ed = if n <= args.ed_max_n && n >= 3 && j > 0 {
                Some(ed_check(n, 1, energy, settings)?)
            } else {
                None
            };
            rows.push(BetheRow {
                n: F(n as f64),
                energy: Some(F(energy)),
                residual: F(residual),
                roots: s.roots.iter().map(|u| (F(u.re), F(u.im))).collect(),
                mode_numbers: s.mode_numbers.clone(),
                exact: Some(F(2.0 * (1.0 - cos_theta(j, n)))),
                ed,
            });
        }
    } else {
        if args.n.is_some() {
            bail!("--n selects the single-magnon dispersion table and needs --k 1");
        }
        let n_target = args.n_target.unwrap_or(4.0 * args.k as f64);
        ensure!(n_target <= args.n_start, "--n-target must not exceed --n-start");
        out.n_start = Some(F(args.n_start));
        out.n_target = Some(F(n_target));
        let guess = hermite_init::<f64>(args.k, args.n_start, args.scale)?;
        let start = newton_refine(&guess, &NewtonOptions::default())?;
        let run = continue_in_n(&start, n_target, &ContinuationSchedule::default())?;
        for s in &run.states {
            let n_int = is_integer(s.n_param);
            let energy = n_int.map(|_| s.energy()).transpose()?;
            let ed = match (n_int, energy) {
                (Some(n), Some(e)) if n <= args.ed_max_n && n >= 3 && args.k <= n => Some(ed_check(n, args.k, e, settings)?),
                _ => None,
            };
            let exact = (args.k == 1).then(|| F(2.0 * (1.0 - (2.0 * PI / s.n_param).cos())));
            rows.push(BetheRow {
                n: F(s.n_param),
                energy: energy.map(F),
                residual: F(s.residual_norm),
                roots: s.roots.iter().map(|u| (F(u.re), F(u.im))).collect(),
                mode_numbers: s.mode_numbers.clone(),
                exact,
                ed,
            });
        }
        out.refined_at = run.refined_at.iter().copied().map(F).collect();
        out.breakdown_density = run.breakdown_density().map(F);
        if let ContinuationOutcome::Chaotic { last_converged_n, attempted_n, reason } = &run.outcome {
            out.outcome =
                OutcomeOut::Chaotic { last_converged_n: F(*last_converged_n), attempted_n: F(*attempted_n), reason: reason.clone() };
            status = Status::NonConvergence;
        }
    }
    if rows.iter().any(|r| r.ed.as_ref().is_some_and(|e| !e.matches)) {
        status = status.max(Status::VerificationFailed);
    }
    let checked = rows.iter().filter(|r| r.ed.is_some()).count();
    let mut notes = vec![format!("k={}: {} rows, {} cross-checked against exact diagonalization", args.k, rows.len(), checked)];
    if let OutcomeOut::Chaotic { last_converged_n, attempted_n, .. } = &out.outcome {
        notes.push(format!("continuation broke down below N={} (at N={})", last_converged_n.0, attempted_n.0));
    }
    out.rows = rows;
    let text = match settings.format {
        Format::Json => json(&out)?,
        Format::Csv => {
            let mut csv = Csv::new(&["N", "energy", "residual", "exact", "ed_nearest", "ed_match", "roots"]);
            let opt = |v: Option<F>| v.map(F::text).unwrap_or_default();
            for r in &out.rows {
                let roots: Vec<String> = r.roots.iter().map(|(re, im)| format!("{} {}", re.text(), im.text())).collect();
                csv.row(&[
                    r.n.text(),
                    opt(r.energy),
                    r.residual.text(),
                    opt(r.exact),
                    opt(r.ed.as_ref().map(|e| e.nearest)),
                    r.ed.as_ref().map(|e| e.matches.to_string()).unwrap_or_default(),
                    roots.join(";"),
                ])?;
            }
            csv.finish()?
        }
    };
    Ok(Rendered { text, status, notes })
}

#[derive(Serialize)]
struct CurveOut {
    a: F,
    d: F,
    eps: F,
    /// `4π² d (1 − d)` at the same `d`.
    eps_quadratic: F,
}

pub fn curve(a_min: f64, a_max: f64, count: usize, settings: &Settings) -> Result<Rendered> {
    let points: Vec<CurveOut> = sutherland_sweep(a_min, a_max, count)?
        .into_iter()
        .map(|p| CurveOut { a: F(p.a), d: F(p.d), eps: F(p.eps), eps_quadratic: F(dhar_shastry_eps(p.d)) })
        .collect();
    let text = match settings.format {
        Format::Json => json(&points)?,
        Format::Csv => {
            let mut csv = Csv::new(&["a", "d", "eps", "eps_quadratic"]);
            for p in &points {
                csv.row(&[p.a.text(), p.d.text(), p.eps.text(), p.eps_quadratic.text()])?;
            }
            csv.finish()?
        }
    };
    Ok(Rendered::new(text, Status::Success))
}
