use klap::bilinear::{bound_fkm, bound_kms, eval_form, BilinearSpec, Family};
use klap::exponents::{
    beta_choice, beta_range, beta_sufficient, eta, eta_exhaustive, target_exponent, ExponentPoint, Rat,
};
use klap::ffarith::{batch_inv, cyclic_convolve, inv, is_prime, pow_mod, prime_factors};
use klap::oscint::{classify, fourier2d, g_weight, stationary_contains, Region};
use klap::primes::{psi_ap, HeathBrown, SieveTables};
use klap::quad::QuadConfig;
use klap::transforms::{fourier_hat, voronoi_check_kernel, voronoi_check_kernel_direct};
use klap::{kl_spectrum, Complex64, FieldCtx, PeriodicFn, WeightParams};
use proptest::prelude::*;

const PRIMES: &[u64] = &[5, 7, 11, 13, 101, 211, 1009, 7919];

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn batch_inverse_matches_pointwise(qi in 0..PRIMES.len(), xs in prop::collection::vec(1u64..1_000_000, 1..200)) {
        let q = PRIMES[qi];
        let xs: Vec<u64> = xs.into_iter().map(|x| x % q).filter(|x| *x != 0).collect();
        let got = batch_inv(&xs, q).unwrap();
        for (x, y) in xs.iter().zip(&got) {
            prop_assert_eq!(*y, inv(*x, q).unwrap());
        }
    }

    #[test]
    fn convolution_bilinear_and_commutative(
        (a, b, c) in (1usize..300).prop_flat_map(|n| (complex_vec(n), complex_vec(n), complex_vec(n))),
        s in -2.0f64..2.0,
    ) {
        let ab = cyclic_convolve(&a, &b).unwrap();
        prop_assert!(max_diff(&ab, &cyclic_convolve(&b, &a).unwrap()) <= 1e-9);
        let sum: Vec<Complex64> = a.iter().zip(&c).map(|(x, y)| x * s + y).collect();
        let lhs = cyclic_convolve(&sum, &b).unwrap();
        let cb = cyclic_convolve(&c, &b).unwrap();
        let rhs: Vec<Complex64> = ab.iter().zip(&cb).map(|(x, y)| x * s + y).collect();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-9);
    }

    #[test]
    fn check_kernel_two_routes(qi in 0..5usize, vals in complex_vec(101)) {
        let q = PRIMES[qi];
        let k = PeriodicFn::new(q, vals[..q as usize].to_vec()).unwrap();
        let a = voronoi_check_kernel(&k);
        let b = voronoi_check_kernel_direct(&k);
        prop_assert!(max_diff(a.values(), b.values()) <= 1e-10);
    }

    #[test]
    fn hat_is_unitary(vals in complex_vec(211)) {
        let k = PeriodicFn::new(211, vals).unwrap();
        let h = fourier_hat(&k);
        prop_assert!((h.energy() - k.energy()).abs() <= 1e-9 * k.energy().max(1.0));
    }

    #[test]
    fn form_linear_in_alpha(seed in 0u64..1000, s in -3.0f64..3.0) {
        let q = 101;
        let kl = kl_spectrum(2, &FieldCtx::new(q).unwrap()).unwrap();
        let p = BilinearSpec::generate(q, 3, 16.0, 20.0, Family::RandomUnit, Family::RandomSign, seed).unwrap();
        let r = BilinearSpec::generate(q, 3, 16.0, 20.0, Family::RandomUnit, Family::RandomSign, seed + 1).unwrap();
        let mut mix = p.clone();
        mix.alpha = p.alpha.iter().zip(&r.alpha).map(|(x, y)| x * s + y).collect();
        let mut rb = r.clone();
        rb.beta = p.beta.clone();
        let want = eval_form(&p, &kl).unwrap() * s + eval_form(&rb, &kl).unwrap();
        prop_assert!((eval_form(&mix, &kl).unwrap() - want).norm() <= 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn form_depends_on_shift_mod_q(seed in 0u64..1000, k in 1u64..50) {
        let q = 101;
        let kl = kl_spectrum(2, &FieldCtx::new(q).unwrap()).unwrap();
        let p = BilinearSpec::generate(q, 7, 10.0, 12.0, Family::RandomSign, Family::Mobius, seed).unwrap();
        let mut s = p.clone();
        s.a = 7 + k * q;
        prop_assert_eq!(eval_form(&p, &kl).unwrap(), eval_form(&s, &kl).unwrap());
    }

    #[test]
    fn envelopes_monotone_in_norms(a in 0.1f64..100.0, b in 0.1f64..100.0, da in 0.0f64..10.0, db in 0.0f64..10.0) {
        let q = 10007.0;
        let f0 = bound_fkm(50.0, 80.0, 1.0, q, 0.01, a, b).unwrap();
        let f1 = bound_fkm(50.0, 80.0, 1.0, q, 0.01, a + da, b + db).unwrap();
        prop_assert!(f0 <= f1);
        let k0 = bound_kms(50.0, 80.0, q, 0.01, a, b, None).unwrap();
        let k1 = bound_kms(50.0, 80.0, q, 0.01, a + da, b + db, None).unwrap();
        prop_assert!(k0 <= k1);
    }

    #[test]
    fn classification_leaves_only_the_open_box(m in -400i64..400, n in -400i64..400, c in 0.5f64..3.0) {
        let t = WeightParams::new(c / 10.0, 101.0, 10.0, 10.0, 1.0, 0.01);
        let region = classify(&t, m, n);
        if region == Region::Stationary {
            prop_assert!(stationary_contains(&t, m, n));
        }
        if !stationary_contains(&t, m, n) {
            prop_assert!(region != Region::Stationary);
        }
    }

    #[test]
    fn rat_text_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let r = Rat::new(n, d);
        let s = r.to_string();
        prop_assert_eq!(s.parse::<Rat>().unwrap(), r.clone());
        let j = serde_json::to_string(&r).unwrap();
        prop_assert_eq!(serde_json::from_str::<Rat>(&j).unwrap(), r);
    }

    #[test]
    fn beta_identity(n in 0i64..100_000, k in 0i64..1000) {
        let x = Rat::new(n, 100_000);
        let kappa = Rat::new(k, 7919);
        let b = beta_choice(&x);
        let lhs = Rat::int(2) * &kappa + &x + Rat::new(1, 2) - &b;
        let rhs = Rat::int(2) * &kappa + Rat::new(7, 12) * &x + &b / Rat::int(2);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn beta_feasible_when_x_large(n in 0i64..=1000, k in 0i64..=1000, t in 0i64..=1000, e in 1i64..=1000) {
        let x = Rat::new(n, 1000);
        let (kappa, theta, eps) = (Rat::new(k, 20_000), Rat::new(t, 5000), Rat::new(e, 50_000));
        if beta_sufficient(&x, &kappa, &theta, &eps) {
            prop_assert!(beta_range(&x, &kappa, &theta, &eps).feasible);
        }
    }

    #[test]
    fn target_nondecreasing_in_kappa(n in 750i64..=1000, a in 0i64..1000, d in 0i64..1000) {
        let x = Rat::new(n, 1000);
        prop_assert!(target_exponent(&x, &Rat::new(a, 1000)) <= target_exponent(&x, &Rat::new(a + d, 1000)));
    }

    #[test]
    fn eta_meet_in_middle_matches_enumeration(parts in prop::collection::vec(0i64..60, 10)) {
        // J = 5 with μ_i ≤ x/5 and ν non-increasing.
        let mut mu: Vec<i64> = parts[..5].iter().map(|v| v % 20).collect();
        let mut nu: Vec<i64> = parts[5..].to_vec();
        nu.sort_unstable_by(|a, b| b.cmp(a));
        let total: i64 = mu.iter().chain(&nu).sum();
        if total == 0 {
            mu[0] = 1;
        }
        let total: i64 = mu.iter().chain(&nu).sum();
        // Scale so that x = 1 and μ_i ≤ 1/5.
        let scale = total.max(5 * mu.iter().copied().max().unwrap_or(0));
        let extra = scale - total;
        nu[0] += extra;
        nu.sort_unstable_by(|a, b| b.cmp(a));
        let p = ExponentPoint {
            x: Rat::int(1),
            kappa: Rat::new(1, 192),
            theta: Rat::zero(),
            eps: Rat::new(1, 100),
            mu: mu.iter().map(|v| Rat::new(*v, scale)).collect(),
            nu: nu.iter().map(|v| Rat::new(*v, scale)).collect(),
        };
        p.validate().unwrap();
        prop_assert_eq!(eta(&p), eta_exhaustive(&p));
    }
}

#[test]
fn primitive_roots_have_full_order() {
    for q in (3..=2000u64).filter(|q| is_prime(*q)) {
        let g = FieldCtx::new(q).unwrap().generator();
        assert_eq!(pow_mod(g, q - 1, q), 1);
        for p in prime_factors(q - 1) {
            assert_ne!(pow_mod(g, (q - 1) / p, q), 1, "q={q} g={g} p={p}");
        }
    }
}

#[test]
fn psi_over_residues_sums_to_psi() {
    let t = SieveTables::new(100_000).unwrap();
    for x in [1.0, 97.0, 1000.0, 54_321.0, 100_000.0] {
        let total = psi_ap(x, 1, 1, &t).unwrap();
        for v in 1..=20u64 {
            let s: f64 = (0..v).map(|u| psi_ap(x, v, u, &t).unwrap()).sum();
            assert!((s - total).abs() <= 1e-9 * total.max(1.0), "x={x} v={v}");
        }
    }
}

#[test]
fn heath_brown_j10_spot_check() {
    let t = SieveTables::new(10_000).unwrap();
    let hb = HeathBrown::decompose(10_000.0, 10).unwrap();
    let mut n = 1u64;
    for _ in 0..100 {
        n = (n * 7919 + 104_729) % 10_000 + 1;
        let got = hb.reconstruct(n).unwrap();
        assert!((got - t.mangoldt(n)).abs() <= 1e-8, "n={n}: {got} vs {}", t.mangoldt(n));
    }
}

#[test]
fn halving_tolerance_is_consistent_with_error_estimate() {
    let t = WeightParams::new(12.0 / 10.0, 101.0, 10.0, 10.0, 3.0, 0.01);
    let g = g_weight(&t).unwrap();
    let loose = QuadConfig::default();
    let tight = QuadConfig {
        tol_per_area: loose.tol_per_area / 2.0,
        ..loose
    };
    let mut state = 12345u64;
    for _ in 0..100 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let m = (state >> 33) as i64 % 4000 - 2000;
        let n = (state >> 13) as i64 % 4000 - 2000;
        let a = fourier2d(&g, m as f64 / t.q, n as f64 / t.q, &loose).unwrap();
        let b = fourier2d(&g, m as f64 / t.q, n as f64 / t.q, &tight).unwrap();
        let bound = 10.0 * a.error.max(1e-15);
        assert!((a.value - b.value).norm() <= bound, "({m}, {n}): {} vs {}", a.value, b.value);
    }
}
