use num_complex::Complex64;
use proptest::prelude::*;

use bryant4_core::analytic::{parse_expression, rational_orders, DomainGrid};
use bryant4_core::classify::{ftc_classify, Mobius, RationalData};
use bryant4_core::frame::{integrate_frame, FrameOptions};
use bryant4_core::lorentz::Mat2;
use bryant4_core::verify::report::verify_surface;
use bryant4_core::weierstrass::{build_f, prepare};
use bryant4_core::{cx, Data, Poly, Sign, Tolerances, C64};

fn arb_c(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| cx(a, b))
}

fn arb_eps() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Minus), Just(Sign::Plus)]
}

fn lit(c: C64) -> String {
    format!("({} + {}*i)", c.re, c.im)
}

fn arb_expr() -> impl Strategy<Value = String> {
    let term = prop_oneof![
        (arb_c(2.0), 0..5i32).prop_map(|(c, k)| format!("{}*z^{k}", lit(c))),
        (arb_c(1.0), arb_c(1.0)).prop_map(|(c, a)| format!("{}*exp({}*z)", lit(c), lit(a))),
        (arb_c(1.0), arb_c(0.3)).prop_map(|(c, p)| format!("{}/(z - {} - 3)", lit(c), lit(p))),
    ];
    prop::collection::vec(term, 1..4).prop_map(|ts| ts.join(" + "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_matches_central_difference(src in arb_expr(), z in arb_c(1.0)) {
        let e = parse_expression::<f64>(&src).unwrap();
        let d = e.derivative().eval(z).unwrap();
        let h = 1e-5;
        let cd = (e.eval(z + h).unwrap() - e.eval(z - h).unwrap()) / (2.0 * h);
        prop_assert!((d - cd).norm() <= 1e-6 * (1.0 + d.norm()), "{src} at {z}: {d} vs {cd}");
    }

    #[test]
    fn multiplicities_are_recovered(
        a in arb_c(1.0),
        b in arb_c(1.0),
        ma in 1..=4usize,
        mb in 1..=2usize,
    ) {
        prop_assume!((a - b).norm() > 0.3);
        let mut roots = vec![a; ma];
        roots.extend(std::iter::repeat(b).take(mb));
        let p = Poly::from_roots(&roots);
        let q = Poly::from_real(&[5.0, 1.0]);
        let orders = rational_orders(&p, &q, Some((-1.5, 1.5, -1.5, 1.5)), 1e-10).unwrap();
        let at = |r: C64| orders.iter().find(|o| (o.root - r).norm() < 1e-3).map(|o| o.order);
        prop_assert_eq!(at(a), Some(ma as i32));
        prop_assert_eq!(at(b), Some(mb as i32));
        prop_assert_eq!(orders.len(), 2);
    }

    #[test]
    fn quadratic_form_carries_df(
        t in 0.05..0.95f64,
        phase in (0.0..6.28f64, 0.0..6.28f64),
        c in arb_c(1.0),
        s in -2.0..2.0f64,
        g in arb_c(0.5),
        eps in arb_eps(),
    ) {
        let e = match eps { Sign::Minus => -1.0, Sign::Plus => 1.0 };
        // ε = +1 needs |τ|² − |γ|² = 1
        let (tau, gamma) = match eps {
            Sign::Minus => (C64::from_polar(t.sqrt(), phase.0), C64::from_polar((1.0 - t).sqrt(), phase.1)),
            Sign::Plus => (C64::from_polar((1.0 + t).sqrt(), phase.0), C64::from_polar(t.sqrt(), phase.1)),
        };
        let m = Mobius::new(tau, gamma, eps, 1e-12).unwrap();
        let (c2, s2) = m.transform_form(c, s, eps);
        let g2 = m.apply(g, eps);
        let factor = (gamma * g + tau.conj()).powi(2);
        let lhs = (c2 + g2 * s2 + c2.conj() * g2 * g2 * e) * factor;
        let rhs = c + g * s + c.conj() * g * g * e;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn ftc_verdict_is_moebius_invariant(
        t in 0.02..0.98f64,
        phase in (0.0..6.28f64, 0.0..6.28f64),
        variant in 0..4usize,
        amp in 0.2..2.0f64,
        deg in 1..3usize,
    ) {
        let tol = Tolerances::default();
        let mut p1 = vec![0.0; deg + 1];
        p1[deg] = 1.0;
        let (w, a, b, c) = match variant {
            0 => (vec![amp], 1.0, 1.0, cx(0.0, 0.0)),
            1 => (vec![amp], 1.0, 1.0, cx(0.1, 0.05)),
            2 => (vec![amp], 1.0, 0.8, cx(0.0, 0.0)),
            _ => (vec![0.0, amp], 1.0, 1.0, cx(0.0, 0.0)),
        };
        let rd = RationalData {
            p1: Poly::from_real(&p1),
            p2: Poly::from_real(&[1.0]),
            w: Poly::from_real(&w),
            eps: Sign::Minus,
            a,
            b,
            c,
        };
        let m = Mobius::new(
            C64::from_polar(t.sqrt(), phase.0),
            C64::from_polar((1.0 - t).sqrt(), phase.1),
            Sign::Minus,
            1e-12,
        )
        .unwrap();
        let before = ftc_classify(&rd, &tol).unwrap().code();
        let moved = m.transform(&rd, &tol).unwrap();
        prop_assert_eq!(ftc_classify(&moved, &tol).unwrap().code(), before);
    }
}

// |g'| ≥ 1 − 0.42 − 0.25 on the grid, keeping branch points of g away
fn arb_data() -> impl Strategy<Value = Data> {
    (arb_c(0.6), arb_c(0.5), arb_c(0.4), arb_eps(), -1.0..1.0f64, -1.0..1.0f64, arb_c(0.5)).prop_map(
        |(g1, g2, w1, eps, a, b, c)| Data {
            g: bryant4_core::Expr::poly(Poly::new(vec![cx(0.0, 0.0), cx(1.0, 0.0) + g1 * 0.5, g2 * 0.5])),
            w: bryant4_core::Expr::poly(Poly::new(vec![cx(1.0, 0.0), w1])),
            eps,
            a,
            b,
            c,
            f0: cx(1.0, 0.0),
            grid: DomainGrid::centered_square(0.25, 33).unwrap(),
        },
    )
}

fn arb_sl2() -> impl Strategy<Value = Mat2<f64>> {
    (arb_c(0.5), arb_c(0.5), arb_c(0.5)).prop_map(|(b, c, a)| {
        // [[1+a, b], [c, d]] with d fixed by det = 1
        let a = cx(1.0, 0.0) + a * 0.5;
        let d = (cx(1.0, 0.0) + b * c) / a;
        Mat2::new(a, b, c, d)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_data_is_marginally_trapped(d in arb_data()) {
        let tol = Tolerances::default();
        let p = prepare(d, &tol).unwrap();
        let opts = FrameOptions::default();
        let fr = integrate_frame(&p, &opts, &tol).unwrap();
        let (rep, _) = verify_surface(&p, &fr, &opts, &tol).unwrap();
        let bad: Vec<_> = rep.failures().collect();
        prop_assert!(bad.is_empty(), "{bad:?}");
        prop_assert!(rep.flags.unwrap().bryant_type);
    }

    #[test]
    fn initial_frame_acts_by_congruence(d in arb_data(), phi in arb_sl2()) {
        let tol = Tolerances::default();
        let p = prepare(d, &tol).unwrap();
        let base = integrate_frame(&p, &FrameOptions::default(), &tol).unwrap();
        let moved = integrate_frame(&p, &FrameOptions { f_init: phi, ..FrameOptions::default() }, &tol).unwrap();
        for (k, s) in base.samples.iter() {
            let t = moved.samples.get(k).unwrap();
            let want = phi * s.psi.to_mat() * phi.adjoint();
            prop_assert!((t.psi.to_mat() - want).max_norm() <= 1e-10 * (1.0 + want.max_norm()));
            prop_assert!((t.frame - phi * s.frame).max_norm() <= 1e-10 * (1.0 + s.frame.max_norm()));
        }
    }
}

/// Centred difference of `f` along x against the integrand
/// `(c + (a+εb)g + εc̄g²)w`, on a transcendental example.
fn f_derivative_error(n: usize) -> f64 {
    let tol = Tolerances::default();
    let mut d = Data {
        g: parse_expression("0.5*(exp(z) - 1)").unwrap(),
        w: parse_expression("exp(-0.5*z)").unwrap(),
        eps: Sign::Minus,
        a: 0.6,
        b: 0.2,
        c: cx(0.3, -0.1),
        f0: cx(1.0, 0.0),
        grid: DomainGrid::centered_square(0.4, n).unwrap(),
    };
    let f = build_f(&mut d, &tol).unwrap();
    let integrand = d.f_integrand();
    let h = d.grid.hx();
    let mut err = 0.0f64;
    for j in 0..n {
        for i in 1..n - 1 {
            let (Some(l), Some(r)) = (f.values.at(i - 1, j), f.values.at(i + 1, j)) else {
                continue;
            };
            let fd = (*r - *l) / (2.0 * h);
            let exact = integrand.eval(d.grid.node(i, j)).unwrap();
            err = err.max((fd - exact).norm());
        }
    }
    err
}

#[test]
fn f_derivative_converges_at_second_order() {
    let e = [17, 33, 65].map(f_derivative_error);
    for w in e.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "{e:?}");
    }
}

#[test]
fn c_zero_integral_case_frame() {
    // a = c = 0, b = 0.6, ε = −1, g = z, w = 1: f = 1 − 0.3z² and
    // F = [[1, 0], [∫dz/f, 1]] with ∫dz/f = artanh(√0.3 z)/√0.3
    let tol = Tolerances::default();
    let grid = DomainGrid::centered_square(0.5, 33).unwrap();
    let (d, f) = bryant4_core::limits::c_zero_family(
        parse_expression("z").unwrap(),
        parse_expression("1").unwrap(),
        Sign::Minus,
        0.0,
        0.6,
        cx(1.0, 0.0),
        grid,
        &tol,
    )
    .unwrap();
    let p = prepare(d, &tol).unwrap();
    let fr = integrate_frame(&p, &FrameOptions::default(), &tol).unwrap();
    let k = 0.3f64.sqrt();
    for (n, s) in fr.samples.iter() {
        let z = p.data.grid.node_at(n);
        let fz = *f.get(n).unwrap();
        assert!((fz - (Complex64::new(1.0, 0.0) - z * z * 0.3)).norm() < 1e-12);
        let want = (z * k).atanh() / k;
        assert!((s.frame.c - want).norm() < 1e-8, "{z}: {} vs {want}", s.frame.c);
        assert!((s.frame.a - cx(1.0, 0.0)).norm() < 1e-12 && s.frame.b.norm() < 1e-12);
        assert!((s.frame.d - cx(1.0, 0.0)).norm() < 1e-12);
    }
}
