mod common;

use proptest::collection::vec;
use proptest::prelude::*;

use common::*;
use sliding_saddle::adapter::lyapunov;
use sliding_saddle::instances::preset;
use sliding_saddle::numerics::{singular_values, solve_linear, sym_eigs, DiagWeight, Mat};
use sliding_saddle::oracles::{bregman, Counted, Counter, LedgerCounts, LinearMap, OracleLedger, Quadratic, SmoothFn};
use sliding_saddle::saddle::{r2_metric, solve_exact_quadratic};
use sliding_saddle::sliding::{make_schedule, AlphaSequence};
use sliding_saddle::trace::{read_trace, write_trace, TraceRecord};
use sliding_saddle::vi::{project, ConstraintSet};

fn square(n: usize) -> impl Strategy<Value = Mat> {
    vec(-3.0f64..3.0, n * n).prop_map(move |d| Mat::from_row_major(n, n, d).unwrap())
}

fn sym(n: usize) -> impl Strategy<Value = Mat> {
    square(n).prop_map(|mut m| {
        m.symmetrize();
        m
    })
}

fn psd_quadratic(n: usize) -> impl Strategy<Value = Quadratic> {
    (square(n), vec(-2.0f64..2.0, n)).prop_map(|(g, q)| {
        let mut h = g.gram();
        h.symmetrize();
        Quadratic::new(h, q).unwrap()
    })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match_reference(m in (1usize..7).prop_flat_map(sym)) {
        let mut ours = sym_eigs(&m).unwrap();
        ours.sort_by(f64::total_cmp);
        let mut theirs: Vec<f64> = to_na(&m).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn singular_values_match_reference(
        (r, c, d) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| (Just(r), Just(c), vec(-3.0f64..3.0, r * c)))
    ) {
        let m = Mat::from_row_major(r, c, d).unwrap();
        let mut ours = singular_values(&m);
        ours.sort_by(|a, b| b.total_cmp(a));
        let theirs = singular_values_na(&m);
        for (a, b) in ours.iter().zip(&theirs) {
            prop_assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn linear_solve_residual(m in (1usize..7).prop_flat_map(square), seed in any::<u64>()) {
        let n = m.rows();
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += 10.0;
        }
        let b = gaussian(&mut rng(seed), n);
        let x = solve_linear(&a, &b).unwrap();
        let r: f64 = a.mul_vec(&x).iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        prop_assert!(r <= 1e-10);
    }

    #[test]
    fn bregman_of_quadratic(
        (h, x, x0) in (1usize..6).prop_flat_map(|n| (psd_quadratic(n), vec(-5.0f64..5.0, n), vec(-5.0f64..5.0, n)))
    ) {
        let d: Vec<f64> = x.iter().zip(&x0).map(|(a, b)| a - b).collect();
        let want = 0.5 * d.iter().zip(h.hessian().mul_vec(&d)).map(|(a, b)| a * b).sum::<f64>();
        let got = bregman(&h, &x, &x0).unwrap();
        prop_assert!(got >= 0.0);
        prop_assert!(rel_close(got, want, 1e-12));
        prop_assert_eq!(bregman(&h, &x, &x).unwrap(), 0.0);
        // value-based definition agrees up to cancellation
        let g0 = h.gradient(&x0);
        let by_def = h.value(&x) - h.value(&x0) - g0.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((by_def - got).abs() <= 1e-9 * (1.0 + h.value(&x).abs() + h.value(&x0).abs()));
    }

    #[test]
    fn gradient_matches_finite_differences(
        (h, x) in (1usize..6).prop_flat_map(|n| (psd_quadratic(n), vec(-3.0f64..3.0, n)))
    ) {
        let g = h.gradient(&x);
        let step = 1e-5;
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += step;
            xm[i] -= step;
            let fd = (h.value(&xp) - h.value(&xm)) / (2.0 * step);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "{fd} vs {}", g[i]);
        }
    }

    #[test]
    fn counting_is_transparent(
        (h, b, x, calls) in (1usize..5).prop_flat_map(|n| (psd_quadratic(n), square(n), vec(-3.0f64..3.0, n), 0usize..6))
    ) {
        let ledger = OracleLedger::new();
        let cf = Counted::new(&h, &ledger, Counter::GradG);
        let cb = Counted::new(&b, &ledger, Counter::MatvecB);
        for _ in 0..calls {
            prop_assert_eq!(cf.gradient(&x), h.gradient(&x));
            prop_assert_eq!(cf.value(&x), h.value(&x));
            prop_assert_eq!(cb.forward(&x), b.mul_vec(&x));
        }
        prop_assert_eq!(cb.adjoint(&x), b.tr_mul_vec(&x));
        let c = ledger.counts();
        prop_assert_eq!(c, LedgerCounts { grad_f: 0, grad_g: calls as u64, matvec_b: calls as u64, matvec_bt: 1 });
    }

    #[test]
    fn trace_csv_round_trip(rows in vec((any::<usize>(), proptest::option::of(any::<f64>()), proptest::option::of(-1e300f64..1e300), any::<[u32; 4]>(), 0.0f64..1e12), 0..20)) {
        let records: Vec<TraceRecord> = rows
            .into_iter()
            .map(|(phase, r2, psi, c, exec_time)| TraceRecord {
                phase,
                r2: r2.filter(|v| v.is_finite()),
                psi,
                gap: None,
                counts: LedgerCounts { grad_f: c[0] as u64, grad_g: c[1] as u64, matvec_b: c[2] as u64, matvec_bt: c[3] as u64 },
                exec_time,
            })
            .collect();
        let mut buf = Vec::new();
        write_trace(&mut buf, &records).unwrap();
        prop_assert_eq!(read_trace(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn schedule_sandwich(
        lm in vec((prop_oneof![Just(0.0), 1e-3f64..1e4], prop_oneof![Just(0.0), 1e-3f64..1e3]), 1..5),
        eps in 1e-3f64..10.0,
    ) {
        let lm: Vec<(f64, f64)> = lm.into_iter().map(|(l, m)| if l == 0.0 && m == 0.0 { (1.0, 0.0) } else { (l, m) }).collect();
        let l: Vec<f64> = lm.iter().map(|p| p.0).collect();
        let m: Vec<f64> = lm.iter().map(|p| p.1).collect();
        let s = make_schedule(&l, &m, eps).unwrap();
        let n = l.len();
        let mut seen = s.order.clone();
        seen.sort();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let prods = s.prefix_products();
        for (level, &c) in s.order.iter().enumerate() {
            let v = (l[c] / eps).sqrt().max(m[c] / eps).max(1.0);
            let p = prods[level] as f64;
            prop_assert!(2f64.powi(level as i32 + 1) * v <= p * (1.0 + 1e-12));
            prop_assert!(p <= 3f64.powi(n as i32) * v * (1.0 + 1e-12));
        }
    }

    #[test]
    fn projection_lands_in_ball(
        (w, c, z) in (1usize..6).prop_flat_map(|n| (vec(0.2f64..5.0, n), vec(-3.0f64..3.0, n), vec(-20.0f64..20.0, n))),
        radius in 0.1f64..4.0,
    ) {
        let p = DiagWeight::new(w).unwrap();
        let set = ConstraintSet::ball(c.clone(), radius).unwrap();
        let q = project(&set, &p, &z);
        let d: Vec<f64> = q.iter().zip(&c).map(|(a, b)| a - b).collect();
        prop_assert!(p.norm(&d) <= radius * (1.0 + 1e-12));
        let again = project(&set, &p, &q);
        for (a, b) in again.iter().zip(&q) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn alpha_decreasing_in_unit_interval(t in 1usize..5000) {
        let mut seq = AlphaSequence::new();
        let a = seq.prefix(t + 1).to_vec();
        prop_assert_eq!(a[0], 1.0);
        prop_assert!(a.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lyapunov_dominates_r2(name in prop::sample::select(vec!["scsc_small", "sc_c_small", "cc_small", "kernel_small"]), seed in any::<u64>()) {
        let prob = preset(name, 42).unwrap();
        let sol = solve_exact_quadratic(&prob).unwrap();
        let mut r = rng(seed);
        let x: Vec<f64> = gaussian(&mut r, prob.dim_x()).iter().map(|v| 4.0 * v).collect();
        let y: Vec<f64> = gaussian(&mut r, prob.dim_y()).iter().map(|v| 4.0 * v).collect();
        let psi = lyapunov(&prob, &sol, &x, &y).unwrap();
        let r2 = r2_metric(&prob, &sol, &x, &y).unwrap();
        prop_assert!(psi >= r2 * (1.0 - 1e-12), "psi {psi} < r2 {r2}");
    }
}
