//! Algebraic invariants checked on random inputs.

use adelic_market::adele::{chi_p, frac_part, weyl_apply, LatticeFunction, PhasePoint};
use adelic_market::minority::{mg_init, HistoryMode, MgConfig, MgState};
use adelic_market::padic::{expand, padic_norm, product_formula, valuation, PAdicNumber, Place, Prime, Rational};
use adelic_market::waves::{real_map, self_affinity_check, MapKind};
use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11]).prop_map(|p| Prime::new(p).unwrap())
}

fn rational() -> impl Strategy<Value = Rational> {
    (-100_000i64..=100_000, 1i64..=100_000).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn nonzero() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |x| !x.is_zero())
}

/// Independent valuation: strip factors of `p` from numerator and denominator.
fn naive_valuation(x: &Rational, p: u64) -> i64 {
    let strip = |n: &BigInt| {
        let (mut n, mut v) = (n.clone(), 0i64);
        let pb = BigInt::from(p);
        while (&n % &pb) == BigInt::from(0) {
            n /= &pb;
            v += 1;
        }
        v
    };
    strip(x.numer()) - strip(x.denom())
}

/// `a == b (mod p^k)` for rationals whose denominators are prime to `p`
/// after removing powers of `p`.
fn congruent(a: &Rational, b: &Rational, p: Prime, k: i64) -> bool {
    let d = a - b;
    d.is_zero() || naive_valuation(&d, p.get()) >= k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn valuation_matches_trial_division(x in nonzero(), p in prime()) {
        prop_assert_eq!(valuation(&x, p).unwrap(), naive_valuation(&x, p.get()));
    }

    #[test]
    fn ultrametric(x in rational(), y in rational(), p in prime()) {
        let (nx, ny) = (padic_norm(&x, Place::Finite(p)), padic_norm(&y, Place::Finite(p)));
        let nxy = padic_norm(&(&x + &y), Place::Finite(p));
        let max = nx.clone().max(ny.clone());
        prop_assert!(nxy <= max);
        if nx != ny {
            prop_assert_eq!(nxy, max);
        }
    }

    #[test]
    fn norm_is_multiplicative(x in rational(), y in rational(), p in prime()) {
        let place = Place::Finite(p);
        prop_assert_eq!(padic_norm(&(&x * &y), place), padic_norm(&x, place) * padic_norm(&y, place));
    }

    #[test]
    fn product_formula_is_exact(x in nonzero()) {
        prop_assert_eq!(product_formula(&x).unwrap().product, Rational::one());
    }

    #[test]
    fn expansion_round_trips(x in nonzero(), p in prime(), n in 1usize..=32) {
        let e = expand(&x, p, n).unwrap();
        prop_assert_eq!(e.valuation(), naive_valuation(&x, p.get()));
        prop_assert!(e.digits().iter().all(|&d| d < p.get()));
        prop_assert!(e.digits()[0] != 0);
        prop_assert!(congruent(&e.to_rational(), &x, p, e.valuation() + n as i64));
    }

    #[test]
    fn arithmetic_agrees_with_exact(x in nonzero(), y in nonzero(), p in prime(), n in 1usize..=16) {
        let (a, b) = (PAdicNumber::expand(&x, p, n).unwrap(), PAdicNumber::expand(&y, p, n).unwrap());
        for (got, want) in [
            (a.add(&b).unwrap(), &x + &y),
            (a.sub(&b).unwrap(), &x - &y),
            (a.mul(&b).unwrap(), &x * &y),
            (a.div(&b).unwrap(), &x / &y),
        ] {
            prop_assert!(congruent(&got.to_rational(), &want, p, got.absolute_precision()));
        }
    }

    #[test]
    fn character_is_additive(x in rational(), y in rational(), p in prime()) {
        let lhs = chi_p(&(&x + &y), p);
        let rhs = chi_p(&x, p) * chi_p(&y, p);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn fractional_part_is_a_representative(x in rational(), p in prime()) {
        let f = frac_part(&x, p);
        prop_assert!(f >= Rational::zero() && f < Rational::one());
        // x - {x}_p is a p-adic integer
        let rest = &x - &f;
        prop_assert!(rest.is_zero() || naive_valuation(&rest, p.get()) >= 0);
    }

    #[test]
    fn self_affinity(a in 0u64..11, j in 0u64..100_000, dim in 0.2f64..3.0, p in prime(), scale in any::<bool>()) {
        let kind = if scale { MapKind::ScalePower } else { MapKind::DigitPower };
        prop_assert!(self_affinity_check(j, a % p.get(), p, dim, kind).unwrap());
    }

    #[test]
    fn real_map_is_bounded(j in 0u64..1_000_000, p in prime()) {
        // digit-power with D = 1 maps Z_p into [0, 1)
        let x = expand(&Rational::from(j as i64), p, 16).unwrap();
        let y = real_map(&x, 1.0, MapKind::DigitPower).unwrap();
        prop_assert!((0.0..1.0).contains(&y));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weyl_is_unitary(
        p in prop::sample::select(vec![2u64, 3]),
        window in 1u32..=2,
        qi in 0usize..81,
        ki in 0usize..81,
        seed in any::<u64>(),
    ) {
        let p = Prime::new(p).unwrap();
        let len = (p.get() as usize).pow(2 * window);
        let scale = Rational::new(1, p.pow(window)).unwrap();
        let q = &Rational::from((qi % len) as i64) * &scale;
        let k = &Rational::from((ki % len) as i64) * &scale;
        let mut state = seed;
        let values: Vec<Complex64> = (0..len)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Complex64::new((state >> 40) as f64 / 16_777_216.0 - 0.5, (state >> 16 & 0xffffff) as f64 / 16_777_216.0 - 0.5)
            })
            .collect();
        let psi = LatticeFunction::new(p, window, values).unwrap();
        let image = weyl_apply(&PhasePoint::new(q, k), &psi).unwrap();
        prop_assert!((image.norm() - psi.norm()).abs() < 1e-12);
    }

    #[test]
    fn exogenous_game_is_sign_symmetric(seed in any::<u64>(), agents in 1usize..12, memory in 1u32..4) {
        let cfg = MgConfig { history: HistoryMode::Exogenous, ..MgConfig::new(agents, memory, 200, seed) };
        let game = mg_init(&cfg).unwrap();
        let mut reference = MgState::with_tables(&cfg, game.tables().clone(), game.history()).unwrap();
        let mut mirror = MgState::with_tables(&cfg, game.tables().negated(), game.history()).unwrap();
        reference.run(200);
        mirror.run(200);
        let negated: Vec<f64> = reference.attendance().iter().map(|a| -a).collect();
        prop_assert_eq!(mirror.attendance(), &negated[..]);
    }

    #[test]
    fn games_are_reproducible(seed in any::<u64>(), agents in 1usize..20, memory in 1u32..5) {
        let cfg = MgConfig::new(agents, memory, 300, seed);
        let (mut a, mut b) = (mg_init(&cfg).unwrap(), mg_init(&cfg).unwrap());
        a.run(300);
        b.run(300);
        let bits = |s: &MgState| s.attendance().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
    }
}
