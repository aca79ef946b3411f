use proptest::prelude::*;
use sparse_t::coeffs::mixture_coefficients;
use sparse_t::zeta::{
    ln_zeta_inf, ln_zeta_k, pit_derivative, pit_inverse, pit_mixture_pdf, pit_transform, t_mixture_pdf, zeta_k,
};
use sparse_t::{DegreesOfFreedom, ModelParams, PowerIndex};

fn d_strategy() -> impl Strategy<Value = f64> {
    0.05f64..1.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zeta_k_increases_in_abs_t(t in 0.0f64..200.0, step in 1e-3f64..5.0, k in 1.0f64..120.0, d in d_strategy()) {
        let (k, d) = (DegreesOfFreedom::new(k).unwrap(), PowerIndex::new(d).unwrap());
        let a = ln_zeta_k(t, k, d);
        let b = ln_zeta_k(t + step, k, d);
        prop_assert!(b > a, "t={t} step={step}: {a} !< {b}");
        prop_assert_eq!(ln_zeta_k(-t, k, d), a);
    }

    #[test]
    fn zeta_k_vanishes_only_at_zero(t in 1e-6f64..1e4, k in 1.0f64..120.0, d in d_strategy()) {
        let (k, d) = (DegreesOfFreedom::new(k).unwrap(), PowerIndex::new(d).unwrap());
        prop_assert!(zeta_k(t, k, d) > 0.0);
        prop_assert_eq!(zeta_k(0.0, k, d), 0.0);
    }

    #[test]
    fn zeta_inf_increases_in_abs_y(y in 0.0f64..30.0, step in 1e-3f64..2.0, d in d_strategy()) {
        let d = PowerIndex::new(d).unwrap();
        prop_assert!(ln_zeta_inf(y + step, d) > ln_zeta_inf(y, d));
        prop_assert_eq!(ln_zeta_inf(-y, d), ln_zeta_inf(y, d));
    }

    #[test]
    fn change_of_variables_holds(t in -20.0f64..20.0, rho in 0.0f64..1.0, d in d_strategy(), k in 1.0f64..60.0) {
        let p = ModelParams::new(rho, d, k).unwrap();
        let lhs = pit_mixture_pdf(pit_transform(t, p.k), &p) * pit_derivative(t, p.k);
        let rhs = t_mixture_pdf(t, &p);
        prop_assert!((lhs / rhs - 1.0).abs() <= 1e-9, "t={t}: {lhs} vs {rhs}");
    }

    #[test]
    fn pit_round_trip(t in -1e3f64..1e3, k in 1.0f64..100.0) {
        let k = DegreesOfFreedom::new(k).unwrap();
        let back = pit_inverse(pit_transform(t, k), k);
        prop_assert!((back - t).abs() <= 1e-9 * (1.0 + t.abs()), "t={t} back={back}");
    }
}

#[test]
fn coefficient_mass_is_bracketed() {
    for i in 0..10 {
        let d = 0.1 + 0.2 * f64::from(i);
        let table = mixture_coefficients(PowerIndex::new(d).unwrap(), 10_000);
        let sum: f64 = table.weights().iter().sum();
        let tail = table.tail_mass();
        assert!(tail > 0.0);
        assert!(sum <= 1.0 + 1e-12 && sum >= 1.0 - 2.0 * tail, "d={d} sum={sum} tail={tail}");
        assert!((sum + tail - 1.0).abs() < 1e-12, "d={d}: sum + tail = {}", sum + tail);
    }
}
