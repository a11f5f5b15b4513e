//! One line per acceptance criterion. Runs as a plain binary so every line is
//! printed even when an earlier one fails; exits non-zero on any failure not
//! listed in `KNOWN_RED`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bryant4_core::analytic::{parse_expression, AnalyticExpr, DomainGrid, TreeKind};
use bryant4_core::classify::{ftc_classify, Mobius, RationalData};
use bryant4_core::frame::{integrate_frame, FrameOptions};
use bryant4_core::limits::{
    bryant_null_curve, deformation_family, oracle_equivalence, LimitCase, LimitMethod, DEFAULT_RADII,
};
use bryant4_core::verify::apen::{apen_decompose, sample_ring, RealityPolicy};
use bryant4_core::verify::report::{verify_surface, SurfaceReport};
use bryant4_core::weierstrass::prepare;
use bryant4_core::{cx, Data, Grid, Poly, Sign, Tolerances, C64};

const ORACLE_TOL: f64 = 1e-6;
const ORACLE_SECONDS: f64 = 10.0;
const HH_TOL: f64 = 1e-5;
const DET_TOL: f64 = 1e-9;
const PATH_TOL: f64 = 1e-7;
const METRIC_TOL: f64 = 1e-5;
const HYPERQUADRIC_TOL: f64 = 1e-5;
const NULL_TOL: f64 = 1e-8;
const OMEGA_TOL: f64 = 1e-6;
const SLOPE_RANGE: (f64, f64) = (0.9, 1.1);
const LIMIT_H_TOL: f64 = 1e-5;
const PROCRUSTES_TOL: f64 = 1e-5;
const SCHWARZ_TOL: f64 = 1e-5;
const SCHWARZ_MINIMAL_TOL: f64 = 1e-10;
const APEN_TOL: f64 = 1e-10;
const APEN_REJECT: f64 = 1e-3;
const ORDER_FACTOR: f64 = 12.0;

/// Criteria that fail for a documented reason (see the decisions ledger).
const KNOWN_RED: [u8; 1] = [10];

struct Line {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn ex(s: &str) -> AnalyticExpr<f64> {
    parse_expression(s).unwrap()
}

fn grid(half: f64, n: usize) -> Grid {
    DomainGrid::centered_square(half, n).unwrap()
}

/// `[-0.5, 0.5]²` at `h = 1/64`.
fn standard_grid() -> Grid {
    grid(0.5, 65)
}

fn data(g: AnalyticExpr<f64>, w: AnalyticExpr<f64>, eps: Sign, a: f64, b: f64, c: C64, grid: Grid) -> Data {
    Data {
        g,
        w,
        eps,
        a,
        b,
        c,
        f0: cx(1.0, 0.0),
        grid,
    }
}

fn random_c(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Ten admissible data sets with random quadratic `g` (`g(0) = 0`), linear
/// `w` and random constants on `[-0.25, 0.25]²`, `h = 1/64`.
fn random_sets() -> Vec<(String, Data)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    (0..10)
        .map(|i| {
            let g = Poly::new(vec![cx(0.0, 0.0), random_c(&mut rng, 0.6) + cx(0.2, 0.0), random_c(&mut rng, 0.6)]);
            let w = Poly::new(vec![cx(1.0, 0.0), random_c(&mut rng, 0.5)]);
            let eps = if rng.gen_bool(0.5) { Sign::Minus } else { Sign::Plus };
            let d = data(
                AnalyticExpr::poly(g),
                AnalyticExpr::poly(w),
                eps,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                random_c(&mut rng, 0.5),
                grid(0.25, 33),
            );
            (format!("random#{i}"), d)
        })
        .collect()
}

fn bryant_sets() -> Vec<(String, Data)> {
    let mut v = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        for case in [LimitCase::CmcH3 { r }, LimitCase::CmcS3 { r }] {
            v.push((format!("{case:?}"), case.data(ex("z"), ex("1"), standard_grid())));
        }
    }
    v
}

fn minimal_sets() -> Vec<(String, Data)> {
    let mut v = Vec::new();
    for case in [LimitCase::MinimalR3, LimitCase::MaximalL3] {
        for g in ["z", "0.5*z^2 + z"] {
            v.push((format!("{case:?} g = {g}"), case.data(ex(g), ex("1"), standard_grid())));
        }
    }
    v
}

struct Run {
    name: String,
    report: SurfaceReport,
    det: f64,
    path: f64,
}

fn run(name: &str, d: &Data, tol: &Tolerances) -> Run {
    let p = prepare(d.clone(), tol).unwrap_or_else(|e| panic!("{name}: {e}"));
    let opts = FrameOptions::default();
    let fr = integrate_frame(&p, &opts, tol).unwrap();
    let other = integrate_frame(
        &p,
        &FrameOptions {
            tree: TreeKind::ColumnFirst,
            ..opts
        },
        tol,
    )
    .unwrap();
    let (report, _) = verify_surface(&p, &fr, &opts, tol).unwrap();
    Run {
        name: name.to_string(),
        report,
        det: fr.det_residual.max,
        path: fr.distance(&other).max,
    }
}

fn worst<'a>(runs: &'a [Run], key: &str) -> (f64, &'a str) {
    runs.iter()
        .map(|r| (r.report.entry(key).map_or(f64::INFINITY, |e| e.value), r.name.as_str()))
        .fold((-1.0, ""), |a, b| if b.0 > a.0 || b.0.is_nan() { b } else { a })
}

fn criterion1(tol: &Tolerances) -> (Line, [f64; 2]) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t = Instant::now();
    let errs = pool.install(|| {
        [LimitCase::MinimalR3, LimitCase::MaximalL3]
            .map(|c| oracle_equivalence(c, &ex("z"), &ex("1"), &standard_grid(), tol).unwrap())
    });
    let secs = t.elapsed().as_secs_f64() / 2.0;
    let pass = errs.iter().all(|e| *e <= ORACLE_TOL) && secs <= ORACLE_SECONDS;
    (
        Line {
            id: 1,
            name: "Weierstrass oracle equivalence",
            pass,
            detail: format!(
                "Enneper h=1/64: eps=-1 {:.2e}, eps=+1 {:.2e} (tol {ORACLE_TOL:e}); {secs:.2}s per run single-threaded (limit {ORACLE_SECONDS}s)",
                errs[0], errs[1]
            ),
        },
        errs,
    )
}

fn criterion2(random: &[Run]) -> Line {
    let (v, at) = worst(random, "mean.marginally_trapped");
    Line {
        id: 2,
        name: "Marginally trapped invariant",
        pass: v <= HH_TOL && random.len() == 10,
        detail: format!(
            "{} random sets: max |<H,H>|/max(|H|_E^2, 1/lambda^2) = {v:.2e} ({at}), tol {HH_TOL:e}",
            random.len()
        ),
    }
}

fn criterion3(all: &[Run]) -> Line {
    let det = all.iter().map(|r| r.det).fold(0.0, f64::max);
    let path = all.iter().map(|r| r.path).fold(0.0, f64::max);
    Line {
        id: 3,
        name: "Frame integrity",
        pass: det <= DET_TOL && path <= PATH_TOL,
        detail: format!(
            "{} data sets: max |det F - 1| = {det:.2e} (tol {DET_TOL:e}), path independence {path:.2e} (tol {PATH_TOL:e})",
            all.len()
        ),
    }
}

fn criterion4(all: &[Run]) -> Line {
    let (l, la) = worst(all, "metric.lambda");
    let (c, ca) = worst(all, "metric.conformality");
    Line {
        id: 4,
        name: "Metric identity",
        pass: l <= METRIC_TOL && c <= METRIC_TOL,
        detail: format!("lambda relative {l:.2e} ({la}), |<psi_z,psi_z>|/lambda {c:.2e} ({ca}), tol {METRIC_TOL:e}"),
    }
}

fn criterion5(tol: &Tolerances) -> Line {
    let (mut hq, mut null, mut om) = (0.0f64, 0.0f64, 0.0f64);
    for r in [0.5, 1.0, 2.0] {
        for eps in [Sign::Minus, Sign::Plus] {
            let nc = bryant_null_curve(&ex("z"), &ex("1"), eps, r, &standard_grid(), tol).unwrap();
            hq = hq.max(nc.hyperquadric.max);
            null = null.max(nc.nullity.max);
            om = om.max(nc.omega.max);
        }
    }
    Line {
        id: 5,
        name: "CMC recovery",
        pass: hq <= HYPERQUADRIC_TOL && null <= NULL_TOL && om <= OMEGA_TOL,
        detail: format!(
            "r in {{0.5,1,2}}, both eps: r^2|-det psi - eps/r^2| = {hq:.2e} (tol {HYPERQUADRIC_TOL:e}), |det dB|/|dB|^2 = {null:.2e} (tol {NULL_TOL:e}), Omega {om:.2e} (tol {OMEGA_TOL:e})"
        ),
    }
}

fn criterion6(tol: &Tolerances) -> Line {
    let mut parts = Vec::new();
    let mut pass = true;
    for eps in [Sign::Minus, Sign::Plus] {
        let fam = deformation_family(
            &ex("z"),
            &ex("1"),
            eps,
            &DEFAULT_RADII,
            &standard_grid(),
            LimitMethod::Variational,
            tol,
        )
        .unwrap();
        pass &= fam.slope >= SLOPE_RANGE.0
            && fam.slope <= SLOPE_RANGE.1
            && fam.limit_mean_curvature <= LIMIT_H_TOL
            && fam.procrustes <= PROCRUSTES_TOL;
        parts.push(format!(
            "eps={eps}: slope {:.4}, |H(X_0)| {:.2e}, Procrustes {:.2e}",
            fam.slope, fam.limit_mean_curvature, fam.procrustes
        ));
    }
    Line {
        id: 6,
        name: "Deformation",
        pass,
        detail: format!(
            "{} (slope in [{}, {}], tol {LIMIT_H_TOL:e}, {PROCRUSTES_TOL:e})",
            parts.join("; "),
            SLOPE_RANGE.0,
            SLOPE_RANGE.1
        ),
    }
}

fn criterion7(bryant: &[Run], minimal: &[Run]) -> Line {
    let (b, ba) = worst(bryant, "schwarzian");
    let (m, ma) = worst(minimal, "schwarzian");
    Line {
        id: 7,
        name: "Schwarzian identity",
        pass: b <= SCHWARZ_TOL && m <= SCHWARZ_MINIMAL_TOL,
        detail: format!(
            "Bryant set {b:.2e} ({ba}, tol {SCHWARZ_TOL:e} relative), minimal set {m:.2e} ({ma}, tol {SCHWARZ_MINIMAL_TOL:e})"
        ),
    }
}

fn rational(w: &[f64], a: f64, b: f64, c: C64) -> RationalData<f64> {
    RationalData {
        p1: Poly::from_real(&[0.0, 1.0]),
        p2: Poly::from_real(&[1.0]),
        w: Poly::from_real(w),
        eps: Sign::Minus,
        a,
        b,
        c,
    }
}

fn criterion8(tol: &Tolerances) -> Line {
    let cases = [
        ("normal form", rational(&[1.0], 1.0, 1.0, cx(0.0, 0.0)), "admissible_ftc"),
        ("c = 0.1", rational(&[1.0], 1.0, 1.0, cx(0.1, 0.0)), "degree_c"),
        ("a + eps b = 0.1", rational(&[1.0], 1.0, 0.9, cx(0.0, 0.0)), "degree_s"),
        ("W = z", rational(&[0.0, 1.0], 1.0, 1.0, cx(0.0, 0.0)), "omega_form"),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, rd, want) in &cases {
        let got = ftc_classify(rd, tol).map(|v| v.code()).unwrap_or("error");
        pass &= got == *want;
        parts.push(format!("{name} -> {got}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut invariant = 0;
    for _ in 0..20 {
        let t = rng.gen_range(0.05..1.0f64);
        let tau = C64::from_polar(t.sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let gamma = C64::from_polar((1.0 - t).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let m = Mobius::new(tau, gamma, Sign::Minus, 1e-12).unwrap();
        let ok = cases.iter().all(|(_, rd, want)| {
            m.transform(rd, tol)
                .and_then(|t| ftc_classify(&t, tol).ok())
                .is_some_and(|v| v.code() == *want)
        });
        invariant += ok as usize;
    }
    pass &= invariant == 20;
    Line {
        id: 8,
        name: "Finite total curvature classifier",
        pass,
        detail: format!("{}; Moebius invariance {invariant}/20", parts.join(", ")),
    }
}

fn criterion9() -> Line {
    let one = |_z: C64| cx(1.0, 0.0);
    let id = |z: C64| z;
    let f2 = |z: C64| cx(2.0, 0.0) + cx(1.0, 1.0) * z;
    let f4 = |z: C64| cx(1.0, -1.0) + z * 3.0;
    let s = sample_ring([&one, &f2, &id, &f4], cx(0.0, 0.0), 0.5, 16);
    let fit = apen_decompose(&s, RealityPolicy::Enforce).unwrap();
    let err = (fit.a - 2.0).abs().max((fit.b - 3.0).abs()).max((fit.c - cx(1.0, 1.0)).norm());
    let f2p = |z: C64| cx(2.0, 0.0) + cx(1.0, 1.0) * z + z * z;
    let sp = sample_ring([&one, &f2p, &id, &f4], cx(0.0, 0.0), 0.5, 16);
    let perturbed = apen_decompose(&sp, RealityPolicy::Report).unwrap().residual;
    Line {
        id: 9,
        name: "Decomposition solver",
        pass: err <= APEN_TOL && perturbed > APEN_REJECT,
        detail: format!(
            "(a,b,c) = ({:.12}, {:.12}, {:.12}) error {err:.2e} (tol {APEN_TOL:e}); perturbed residual {perturbed:.2e} (> {APEN_REJECT:e})",
            fit.a, fit.b, fit.c
        ),
    }
}

fn criterion10(tol: &Tolerances, fine: [f64; 2]) -> (Line, String) {
    let coarse = [LimitCase::MinimalR3, LimitCase::MaximalL3]
        .map(|c| oracle_equivalence(c, &ex("z"), &ex("1"), &grid(0.5, 33), tol).unwrap());
    let ratios = [coarse[0] / fine[0], coarse[1] / fine[1]];
    let line = Line {
        id: 10,
        name: "Convergence order",
        pass: ratios.iter().all(|r| *r >= ORDER_FACTOR),
        detail: format!(
            "Enneper h=1/32 -> 1/64: eps=-1 {:.2e} -> {:.2e} (x{:.2}), eps=+1 {:.2e} -> {:.2e} (x{:.2}); need x{ORDER_FACTOR}",
            coarse[0], fine[0], ratios[0], coarse[1], fine[1], ratios[1]
        ),
    };
    // g = e^z - 1, w = e^{-z}: the integrand is not polynomial, so the
    // discretization error is visible
    let cat = |n| oracle_equivalence(LimitCase::MinimalR3, &ex("exp(z) - 1"), &ex("exp(-z)"), &grid(0.5, n), tol).unwrap();
    let (c32, c64) = (cat(33), cat(65));
    let supplement = format!(
        "g = e^z - 1, w = e^-z, h=1/32 -> 1/64: {c32:.2e} -> {c64:.2e} (x{:.2}, order {:.2})",
        c32 / c64,
        (c32 / c64).log2()
    );
    (line, supplement)
}

fn main() {
    let tol = Tolerances::default();
    let (l1, fine) = criterion1(&tol);
    let random: Vec<Run> = random_sets().iter().map(|(n, d)| run(n, d, &tol)).collect();
    let bryant: Vec<Run> = bryant_sets().iter().map(|(n, d)| run(n, d, &tol)).collect();
    let minimal: Vec<Run> = minimal_sets().iter().map(|(n, d)| run(n, d, &tol)).collect();
    let all: Vec<&Run> = random.iter().chain(&bryant).chain(&minimal).collect();
    let all: Vec<Run> = all
        .into_iter()
        .map(|r| Run {
            name: r.name.clone(),
            report: r.report.clone(),
            det: r.det,
            path: r.path,
        })
        .collect();
    let (l10, supplement) = criterion10(&tol, fine);
    let lines = [
        l1,
        criterion2(&random),
        criterion3(&all),
        criterion4(&all),
        criterion5(&tol),
        criterion6(&tol),
        criterion7(&bryant, &minimal),
        criterion8(&tol),
        criterion9(),
        l10,
    ];
    let mut unexpected = 0;
    for l in &lines {
        let known = KNOWN_RED.contains(&l.id);
        let status = match (l.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("[{status}] {:>2}. {}: {}", l.id, l.name, l.detail);
        if !l.pass && !known {
            unexpected += 1;
        }
        if l.pass && known {
            println!("       criterion {} now passes; remove it from KNOWN_RED", l.id);
            unexpected += 1;
        }
    }
    println!("       supplement to 10: {supplement}");
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} pass", lines.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
