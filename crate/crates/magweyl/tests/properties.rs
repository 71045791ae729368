use magweyl::grid::{peetre_sides, sfourier, GridSpec, PhaseSymbol};
use magweyl::harness::report::{format_num, from_csv, from_json, to_csv, to_json, CheckRecord, Env, Report, REPORT_VERSION};
use magweyl::harness::seminorm::hoermander_seminorm;
use magweyl::harness::{run_selected, SuiteConfig};
use magweyl::magnetics::VectorPotential;
use magweyl::products::{moyal_product, ProductRoute};
use magweyl::weyl::{Calculus, Params};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn grid_1d() -> impl Strategy<Value = GridSpec> {
    (prop::sample::select(vec![3usize, 5, 7, 9]), 3.0..12.0f64).prop_map(|(n, l)| GridSpec::new(1, n, l).unwrap())
}

fn symbol(grid: GridSpec) -> impl Strategy<Value = PhaseSymbol> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), grid.nphase())
        .prop_map(move |v| PhaseSymbol::from_values(grid, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn grid_and_symbols(k: usize) -> impl Strategy<Value = (GridSpec, Vec<PhaseSymbol>)> {
    grid_1d().prop_flat_map(move |g| (Just(g), prop::collection::vec(symbol(g), k)))
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => any::<f64>().prop_filter("finite", |v| v.is_finite()),
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(f64::NEG_INFINITY),
    ]
}

fn record() -> impl Strategy<Value = CheckRecord> {
    ("[a-z]{1,8}(-[a-z]{1,6}){0,2}", "[ -~]{1,30}", number(), number(), 0u64..100_000)
        .prop_map(|(id, anchor, r, t, ms)| CheckRecord::new(&id, &anchor, r, t, ms))
}

/// Field-wise equality with NaN equal to itself.
fn same(a: &CheckRecord, b: &CheckRecord) -> bool {
    a.id == b.id && a.anchor == b.anchor && format_num(a.residual) == format_num(b.residual) && format_num(a.tol) == format_num(b.tol) && a.pass == b.pass && a.ms == b.ms
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sfourier_is_an_involution((_, fs) in grid_and_symbols(1)) {
        let back = sfourier(&sfourier(&fs[0]));
        prop_assert!(back.max_abs_diff(&fs[0]) < 1e-12);
    }

    // wigner solves a Vandermonde system on an arc of length 2πε; below ε = 1/2
    // its conditioning, not the algebra, limits the round trip
    #[test]
    fn quantization_inverts_for_any_parameters((g, fs) in grid_and_symbols(1), eps in 0.5..=1.0f64, lambda in 0.0..=1.0f64, b in -2.0..2.0f64) {
        let c = Calculus::new(g, Params::new(eps, lambda).unwrap(), VectorPotential::Landau { d: 1, b }).unwrap();
        let back = c.wigner(&c.quantize(&fs[0]).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&fs[0]) < 1e-9);
    }

    #[test]
    fn moyal_product_is_associative((g, fs) in grid_and_symbols(3), eps in 0.5..=1.0f64, b in -2.0..2.0f64) {
        let c = Calculus::new(g, Params::new(eps, 1.0).unwrap(), VectorPotential::Landau { d: 1, b }).unwrap();
        let op = ProductRoute::Operator;
        let l = moyal_product(&c, &moyal_product(&c, &fs[0], &fs[1], op).unwrap(), &fs[2], op).unwrap();
        let r = moyal_product(&c, &fs[0], &moyal_product(&c, &fs[1], &fs[2], op).unwrap(), op).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-9 * r.max_abs().max(1.0));
    }

    #[test]
    fn seminorms_are_monotone((_, fs) in grid_and_symbols(1), m in -2.0..2.0f64, dm in 0.0..2.0f64, n in 0usize..4) {
        let f = &fs[0];
        let p = |m: f64, n: usize| hoermander_seminorm(f, m, 1.0, 0.0, n).unwrap();
        prop_assert!(p(m, n) <= p(m, n + 1));
        prop_assert!(p(m, n) <= p(m - dm, n));
    }

    #[test]
    fn peetre_holds(xi in prop::collection::vec(-1e3..1e3f64, 3), eta in prop::collection::vec(-1e3..1e3f64, 3), m in -5.0..5.0f64) {
        let (l, r) = peetre_sides(&xi, &eta, m);
        prop_assert!(l <= r * (1.0 + 1e-12));
    }

    #[test]
    fn reports_round_trip(checks in prop::collection::vec(record(), 0..6), seed in any::<u64>()) {
        let env = Env { d: 1, n: 15, l: 9.5, eps: 0.5, lambda: 1.0, seed };
        let r = Report { version: REPORT_VERSION, env: env.clone(), checks };
        let j = from_json(&to_json(&r).unwrap()).unwrap();
        let c = from_csv(&to_csv(&r.checks).unwrap()).unwrap();
        prop_assert_eq!(&j.env, &env);
        prop_assert_eq!(j.checks.len(), r.checks.len());
        prop_assert_eq!(c.len(), r.checks.len());
        for ((a, b), c) in r.checks.iter().zip(&j.checks).zip(&c) {
            prop_assert!(same(a, b) && same(a, c));
            prop_assert_eq!(a.pass, a.residual < a.tol);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn runs_are_deterministic_under_any_seed(seed in any::<u64>()) {
        let cfg = SuiteConfig { seed, ..SuiteConfig::default() };
        let pick = |d: &magweyl::harness::CheckDef| matches!(d.suite, "weyl" | "inequalities");
        let (a, b) = (run_selected(&cfg, pick).unwrap(), run_selected(&cfg, pick).unwrap());
        for (x, y) in a.checks.iter().zip(&b.checks) {
            prop_assert_eq!(x.residual.to_bits(), y.residual.to_bits());
        }
    }
}
