use cournot_core::analysis::{expectations_duopoly, MultiMarket};
use cournot_core::equilibrium::{
    check_assumption1, dphi_dd_linear_duopoly, phi_closed_form_linear, solve_duopoly, solve_phi_duopoly,
};
use cournot_core::oracle::central_difference;
use cournot_core::stochastic::{check_fosd, check_sosd, mixture_family};
use cournot_core::strategic_conduct::{
    gamma_hat, info_sharing_profit_gain, info_sharing_welfare_gain, l_star, transfer_bounds, CollusionParams,
};
use cournot_core::{DemandSpec, DuopolyCorrelation, DuopolyParams, State};
use proptest::prelude::*;

fn linear_market() -> impl Strategy<Value = DuopolyParams> {
    (0.05f64..0.95, 0.0f64..=1.0, 0.05f64..0.95).prop_map(|(beta, d, frac)| {
        // L strictly inside (0, s/3) keeps both interior conditions strict for H = 2 and s = 3.
        DuopolyParams::new(DemandSpec::linear(3.0), beta, d, frac * 0.99, 2.0).unwrap()
    })
}

proptest! {
    #[test]
    fn joint_law_sums_to_one(beta in 0.01f64..0.99, d in 0.0f64..=1.0) {
        let c = DuopolyCorrelation::new(beta, d).unwrap();
        let j = c.joint();
        prop_assert!((j.total() - 1.0).abs() < 1e-12);
        prop_assert!((j.hh + j.hl - beta).abs() < 1e-12);
        prop_assert!((j.lh + j.ll - (1.0 - beta)).abs() < 1e-12);
        prop_assert_eq!(j.lh, j.hl);
        for own in [State::Low, State::High] {
            let total = c.conditional(own, State::Low) + c.conditional(own, State::High);
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zeta_is_mixed_state_slope(beta in 0.05f64..0.95, d in 0.01f64..0.99) {
        let h = 1e-4;
        let lh = |d: f64| DuopolyCorrelation::new(beta, d).unwrap().joint().lh;
        let fd = central_difference(lh, d, h).unwrap();
        prop_assert!((fd - DuopolyCorrelation::new(beta, d).unwrap().zeta()).abs() < 1e-6);
    }

    #[test]
    fn mixture_orders_by_dispersion(n in 2usize..7, beta in 0.05f64..0.95, d0 in 0.0f64..1.0, gap in 0.001f64..1.0) {
        let d1 = (d0 + gap).min(1.0);
        let a = mixture_family(n, beta, d0).unwrap();
        let b = mixture_family(n, beta, d1).unwrap();
        let ca = a.conditional_given_high().unwrap();
        let cb = b.conditional_given_high().unwrap();
        prop_assert!(check_fosd(&ca, &cb).unwrap());
        prop_assert!(check_sosd(a.count_probs(), b.count_probs()).unwrap());
    }

    #[test]
    fn closed_form_matches_bisection(p in linear_market()) {
        prop_assume!(check_assumption1(&p).holds());
        let s = p.demand.intercept();
        let cf = phi_closed_form_linear(s, p.beta, p.d, p.low);
        let bi = solve_phi_duopoly(&p).unwrap();
        prop_assert!((cf - bi.phi).abs() <= 1e-10);
        prop_assert!(p.low < bi.phi && bi.phi < p.high);
    }

    #[test]
    fn phi_moves_with_low_capacity_sign(p in linear_market()) {
        let s = p.demand.intercept();
        let slope = dphi_dd_linear_duopoly(s, p.beta, p.d, p.low);
        prop_assert!(slope >= 0.0);
        let fd = central_difference(|d| phi_closed_form_linear(s, p.beta, d.clamp(0.0, 1.0), p.low), p.d.clamp(1e-5, 1.0 - 1e-5), 1e-5).unwrap();
        let at = dphi_dd_linear_duopoly(s, p.beta, p.d.clamp(1e-5, 1.0 - 1e-5), p.low);
        prop_assert!((fd - at).abs() < 1e-6);
    }

    #[test]
    fn quadratic_demand_is_concave_and_decreasing(s in 0.5f64..10.0, a in 0.01f64..3.0, b in 0.0f64..1.0, q in 0.0f64..5.0) {
        let dem = DemandSpec::quadratic(s, a, b);
        prop_assert!(dem.validate_concavity(5.0).unwrap().is_valid());
        prop_assert!(dem.price_deriv(q) < 0.0);
        prop_assert!(dem.price_second_deriv(q) <= 0.0);
        let h = 1e-5;
        let du = (dem.utility(q + h) - dem.utility(q - h)) / (2.0 * h);
        prop_assert!((du - dem.price(q)).abs() < 1e-6);
    }

    #[test]
    fn duopoly_welfare_rises_with_dispersion(p in linear_market(), gap in 0.01f64..0.5) {
        let d1 = (p.d + gap).min(1.0);
        prop_assume!(d1 > p.d);
        let w = |d: f64| {
            let q = p.with_d(d);
            expectations_duopoly(&q, &solve_duopoly(&q).unwrap()).e_welfare
        };
        prop_assert!(w(d1) > w(p.d));
    }

    #[test]
    fn multi_phi_non_decreasing_in_d(n in 2usize..6, beta in 0.1f64..0.9, d0 in 0.0f64..0.9, gap in 0.01f64..0.1) {
        let m = MultiMarket { demand: DemandSpec::linear(3.0), n_plus_1: n, beta, d: d0, low: 0.1, high: 2.0 };
        let a = m.analyze().unwrap();
        let b = MultiMarket { d: (d0 + gap).min(1.0), ..m }.analyze().unwrap();
        prop_assert!(b.equilibrium.phi >= a.equilibrium.phi - 1e-12);
        prop_assert!(b.expectations.e_welfare >= a.expectations.e_welfare - 1e-12);
    }

    #[test]
    fn collusion_always_feasible_without_penalty(beta in 0.05f64..0.95, d in 0.01f64..=1.0, frac in 0.01f64..0.99) {
        let p = CollusionParams::new(1.0, beta, d, frac / 3.0, 0.0).unwrap();
        let b = transfer_bounds(&p).unwrap();
        prop_assert!(b.feasible);
        prop_assert!(b.lb_irl <= 0.5 + 1e-12);
        prop_assert!(b.ub_ic >= 0.5 - 1e-12);
        let g = gamma_hat(&p).unwrap();
        prop_assert!(g.value > 0.0);
        prop_assert!(transfer_bounds(&p.with_gamma(g.value - 1e-9)).unwrap().feasible);
        prop_assert!(!transfer_bounds(&p.with_gamma(g.value + 1e-9)).unwrap().feasible);
    }

    #[test]
    fn sharing_gains(beta in 0.05f64..0.95, d in 0.01f64..=1.0, frac in 0.01f64..0.99) {
        let low = frac / 3.0;
        let w = info_sharing_welfare_gain(1.0, beta, d, low).unwrap();
        prop_assert!(w.value() > 0.0);
        let g = info_sharing_profit_gain(1.0, beta, d, low).unwrap();
        let ls = l_star(beta, d).unwrap();
        prop_assert!(ls < 1.0 / 3.0);
        if (ls - low).abs() > 1e-9 {
            prop_assert_eq!(g.value() > 0.0, low < ls);
        }
    }
}
