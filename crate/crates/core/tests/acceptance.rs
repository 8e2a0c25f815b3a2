//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance`; pass `-- --stretch` to
//! add the N = 16 Lanczos check.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use heisenring::basis::{enumerate_sector, Sector};
use heisenring::bethe::{
    continue_in_n, dhar_shastry_eps, energy_from_roots, hermite_init, newton_refine, single_magnon, sutherland_curve,
    ContinuationSchedule, NewtonOptions,
};
use heisenring::eigensolve::{labeled_spectrum, lowest_highest_weight, SolverConfig, SpectrumReport, TwiceSpin};
use heisenring::spectra::{degeneracy_scan, e0_table, foel_check, sutherland_check, truncate_decimals};
use heisenring::tldiagrams::{ring_spectrum_via_diagrams, verify_relations, DiagramSpace};
use heisenring::Geometry;

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn cfg() -> SolverConfig<f64> {
    SolverConfig::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() < tol
}

fn ring_report(n: usize, k: usize) -> Result<SpectrumReport<f64>, String> {
    let basis = enumerate_sector(Sector::ring(n, k).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    labeled_spectrum(&basis, &cfg()).map_err(|e| e.to_string())
}

/// Distinct energies of spin `s` in a labeled report, ascending.
fn spin_levels(report: &SpectrumReport<f64>, s: TwiceSpin) -> Vec<f64> {
    report.with_spin(s).map(|l| l.energy_2h).collect()
}

/// Distinct energies from the diagram route.
fn diagram_levels(n: usize, k: usize) -> Result<Vec<f64>, String> {
    let spec = ring_spectrum_via_diagrams(n, k).map_err(|e| e.to_string())?;
    let mut e: Vec<f64> = spec.levels.iter().map(|l| l.energy_2h).collect();
    e.dedup_by(|a, b| close(*a, *b, 1e-9));
    Ok(e)
}

fn same_set(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(a, b)| close(*a, *b, tol))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let ed = ring_report(4, 2)?;
    let ed1 = ed.min_with_spin(TwiceSpin(2)).ok_or("no s=1 level")? / 2.0;
    let ed2 = ed.min_with_spin(TwiceSpin(0)).ok_or("no s=0 level")? / 2.0;
    let tl1 = diagram_levels(4, 1)?[0] / 2.0;
    let tl2 = diagram_levels(4, 2)?[0] / 2.0;
    for (name, v) in [("ED E0(C4,1)", ed1), ("ED E0(C4,2)", ed2), ("TL E0(C4,1)", tl1), ("TL E0(C4,2)", tl2)] {
        ensure(close(v, 1.0, 1e-10), || format!("{name} = {v}"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("E0(C4,1) = E0(C4,2) = 1 by both routes in {t:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (r17, r5, r13) = (17f64.sqrt(), 5f64.sqrt(), 13f64.sqrt());
    let want = [
        (1, TwiceSpin(4), vec![1.0, 3.0, 4.0]),
        (2, TwiceSpin(2), vec![(7.0 - r17) / 2.0, 2.0, 5.0 - r5, 5.0, (7.0 + r17) / 2.0, 5.0 + r5]),
        (3, TwiceSpin(0), vec![5.0 - r13, 4.0, 6.0, 5.0 + r13]),
    ];
    let ed = ring_report(6, 3)?;
    for (k, s, set) in want {
        let got = spin_levels(&ed, s);
        ensure(same_set(&got, &set, 1e-10), || format!("ED s={s}: {got:?}"))?;
        let got = diagram_levels(6, k)?;
        ensure(same_set(&got, &set, 1e-10), || format!("TL k={k}: {got:?}"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), || format!("took {t:?}"))?;
    Ok(format!("C6 spectra for s = 2, 1, 0 agree by both routes in {t:.2?}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut gaps = Vec::new();
    for n in 2..=7usize {
        let table = e0_table(2 * n, Geometry::Ring, &cfg()).map_err(|e| e.to_string())?;
        let finding = foel_check(&table);
        let pair = (n - 1, n);
        if n == 2 {
            ensure(finding.equalities.contains(&pair), || format!("N=4: no equality at (1,2): {finding:?}"))?;
        } else {
            ensure(finding.violations.contains(&pair), || format!("N={}: no violation at {pair:?}", 2 * n))?;
        }
        if n == 3 {
            let (lo, hi) = (truncate_decimals(table.e0_h[3], 9), truncate_decimals(table.e0_h[2], 9));
            ensure(lo == "0.697224362" && hi == "0.719223593", || format!("N=6 decimals {lo} / {hi}"))?;
        }
        gaps.push(format!("{:.4}", table.e0_h[n - 1] - table.e0_h[n]));
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(600), || format!("took {t:?}"))?;
    Ok(format!(
        "E0(C2n,n) < E0(C2n,n-1) for n = 3..7 (gaps {}), tie at n = 2, N=6 prints 0.697224362 < 0.719223593, {t:.2?}",
        gaps[1..].join(", ")
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    for n in [5, 7, 9, 11, 13] {
        let finding = foel_check(&e0_table(n, Geometry::Ring, &cfg()).map_err(|e| e.to_string())?);
        ensure(finding.holds(), || format!("N={n}: violations {:?}", finding.violations))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("no violations for N = 5, 7, 9, 11, 13 in {t:.2?}"))
}

fn criterion_5() -> Outcome {
    for n in 4..=14 {
        let report = sutherland_check(n, &cfg()).map_err(|e| e.to_string())?;
        ensure(report.all_equal(), || format!("N={n}: {report:?}"))?;
    }
    Ok("momentum and spin minima agree for every k, N = 4..14".into())
}

fn criterion_6() -> Outcome {
    let c6 = degeneracy_scan(&[ring_report(6, 3)?]);
    ensure(c6.iter().any(|c| close(c.energy_2h, 4.0, 1e-9) && c.spins == (TwiceSpin(0), TwiceSpin(4))), || {
        format!("C6 coincidences {c6:?}")
    })?;
    let c4 = degeneracy_scan(&[ring_report(4, 2)?]);
    ensure(c4.iter().any(|c| close(c.energy_2h, 2.0, 1e-9) && c.spins == (TwiceSpin(0), TwiceSpin(2))), || {
        format!("C4 coincidences {c4:?}")
    })?;
    Ok("C6: 2H = 4 shared by s = 2 and s = 0; C4: 2H = 2 shared by s = 1 and s = 0".into())
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    for n in (2..=8).step_by(2) {
        for k in 0..=n / 2 {
            for g in [Geometry::Chain, Geometry::Ring] {
                if g == Geometry::Ring && n < 3 {
                    continue;
                }
                let space = DiagramSpace::new(n, k, g).map_err(|e| e.to_string())?;
                let check = verify_relations(&space).map_err(|e| e.to_string())?;
                ensure(check.all(), || format!("N={n} k={k} {g}: {check:?}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("TL relations, L·A = -2H·L and dimension identities exact on {checked} diagram spaces (even N <= 8)"))
}

fn criterion_8() -> Outcome {
    for n in 2..=16usize {
        for j in 0..n {
            let s = single_magnon::<f64>(n, j).map_err(|e| e.to_string())?;
            let e = energy_from_roots(&s).map_err(|e| e.to_string())?;
            let want = 2.0 * (1.0 - (2.0 * PI * j as f64 / n as f64).cos());
            ensure(close(e, want, 1e-10), || format!("k=1 N={n} j={j}: {e} vs {want}"))?;
        }
    }
    let mut matched = 0;
    let mut chain_ok = String::new();
    for k in [2usize, 3] {
        let start = newton_refine(&hermite_init::<f64>(k, 60.0, 1.0).map_err(|e| e.to_string())?, &NewtonOptions::default())
            .map_err(|e| e.to_string())?;
        let run = continue_in_n(&start, 8.0, &ContinuationSchedule::default()).map_err(|e| e.to_string())?;
        if k == 2 {
            let to_twelve: Vec<_> = run.states.iter().filter(|s| s.n_param >= 12.0).collect();
            ensure(to_twelve.len() == 49 && to_twelve.iter().all(|s| s.converged), || {
                format!("k=2 chain 60 -> 12 incomplete: {} states", to_twelve.len())
            })?;
            chain_ok = format!("k=2 chain 60 -> 12 has {} converged states", to_twelve.len());
        }
        for n in [8usize, 10, 12] {
            let Some(state) = run.states.iter().find(|s| s.n_param == n as f64) else {
                continue;
            };
            let e = energy_from_roots(state).map_err(|e| e.to_string())?;
            let ed = ring_report(n, k)?;
            ensure(ed.eigenvalues.iter().any(|&x| close(x, e, 1e-6)), || format!("k={k} N={n}: {e} not in ED"))?;
            matched += 1;
        }
    }
    ensure(matched >= 5, || format!("only {matched} Bethe energies reached N = 8, 10, 12"))?;
    Ok(format!("k=1 dispersion exact for N <= 16; {matched} lowest-band energies found in ED; {chain_ok}"))
}

fn criterion_9() -> Outcome {
    let p = sutherland_curve(1e6f64).map_err(|e| e.to_string())?;
    ensure((p.d - 0.5).abs() < 1e-6 && (p.eps - PI * PI).abs() < 1e-4, || format!("{p:?}"))?;
    let eps = dhar_shastry_eps(0.5f64);
    ensure(eps == PI * PI, || format!("dhar_shastry_eps(1/2) = {eps}"))?;
    Ok(format!("a = 1e6: |d - 1/2| = {:.1e}, |eps - pi^2| = {:.1e}; quadratic gives pi^2 at d = 1/2", (p.d - 0.5).abs(), (p.eps - PI * PI).abs()))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut e = Vec::new();
    for k in [7, 8] {
        let basis = enumerate_sector(Sector::ring(16, k).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        e.push(lowest_highest_weight(&basis, &cfg()).map_err(|e| e.to_string())?.0 / 2.0);
    }
    ensure(e[1] < e[0] - 1e-9, || format!("E0(C16,8) = {} not below E0(C16,7) = {}", e[1], e[0]))?;
    Ok(format!("E0(C16,8) = {:.9} < E0(C16,7) = {:.9} in {:.2?}", e[1], e[0], start.elapsed()))
}

fn main() -> ExitCode {
    let stretch = std::env::args().any(|a| a == "--stretch");
    let mut criteria: Vec<Criterion> = vec![
        (1, "C4 exact values", criterion_1),
        (2, "C6 exact spectra", criterion_2),
        (3, "FOEL violation table", criterion_3),
        (4, "odd-N rings obey FOEL", criterion_4),
        (5, "Sutherland surmise", criterion_5),
        (6, "accidental degeneracies", criterion_6),
        (7, "Temperley-Lieb identities", criterion_7),
        (8, "Bethe regression", criterion_8),
        (9, "curve endpoints", criterion_9),
    ];
    if stretch {
        criteria.push((10, "N=16 violation (stretch)", criterion_10));
    }
    let mut failed = 0;
    for (id, title, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {id} ({title}): PASS - {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} ({title}): FAIL - {why}");
            }
        }
    }
    if !stretch {
        println!("criterion 10 (N=16 violation (stretch)): SKIPPED - run with -- --stretch");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
