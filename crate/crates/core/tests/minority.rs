use adelic_market::minority::{
    log_price_path, mean_square_attendance, price_from_attendance, sigma2, spin_decompose, MgConfig, MgState,
    StrategyTables,
};

/// `a[i][s][mu]` flattened agent-major.
fn tables(a: &[[[i8; 2]; 2]]) -> StrategyTables {
    let data = a.iter().flatten().flatten().copied().collect();
    StrategyTables::new(a.len(), 2, 2, data).unwrap()
}

#[test]
fn four_steps_by_hand() {
    // N = 3, M = 1, S = 2, starting history 0. Worked through by hand:
    //   t=1 mu=0: all play s0 (scores tied) -> +1 -1 +1, net +1, minority sold, mu'=0
    //   t=2 mu=0: agents play s1, s0, s1 -> -1 -1 -1, net -3, minority bought, mu'=1
    //   t=3 mu=1: scores back to 0, all s0 -> +1 -1 -1, net -1, mu'=1
    //   t=4 mu=1: scores tied again, same play, net -1
    let t = tables(&[
        [[1, 1], [-1, 1]],
        [[-1, -1], [1, -1]],
        [[1, -1], [-1, -1]],
    ]);
    let cfg = MgConfig::new(3, 1, 4, 0);
    let mut game = MgState::with_tables(&cfg, t, 0).unwrap();

    game.step();
    assert_eq!(game.scores(), &[-1, 1, 1, -1, -1, 1]);
    assert_eq!(game.history(), 0);
    game.step();
    assert_eq!(game.choices(), &[1, 0, 1]);
    assert_eq!(game.scores(), &[0; 6]);
    assert_eq!(game.history(), 1);
    game.step();
    game.step();

    assert_eq!(game.net_actions(), &[1, -3, -1, -1]);
    assert_eq!(game.scores(), &[2, 2, -2, -2, -2, -2]);
    assert_eq!(game.history(), 1);
    let r3 = 3f64.sqrt();
    let want = [1.0 / r3, -3.0 / r3, -1.0 / r3, -1.0 / r3];
    for (a, w) in game.attendance().iter().zip(want) {
        assert!((a - w).abs() < 1e-15);
    }
}

#[test]
fn spin_identity_exhaustive_two_agents() {
    let mut mean_constant = 0.0;
    for bits in 0u32..256 {
        let data: Vec<i8> = (0..8).map(|b| if bits >> b & 1 == 1 { 1 } else { -1 }).collect();
        let t = StrategyTables::new(2, 2, 2, data.clone()).unwrap();
        for spins in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            // direct average of A^2 over the two histories
            let mut direct = 0.0;
            for mu in 0..2 {
                let net: i32 = (0..2)
                    .map(|i| {
                        let s = if spins[i] == 1 { 0 } else { 1 };
                        data[(i * 2 + s) * 2 + mu] as i32
                    })
                    .sum();
                direct += f64::from(net * net) / 2.0;
            }
            direct /= 2.0;
            let id = spin_decompose(&t, &spins).unwrap();
            assert_eq!(id.lhs, direct);
            assert_eq!(mean_square_attendance(&t, &spins), direct);
            assert!((id.rhs - direct).abs() < 1e-12, "tables {bits:08b} spins {spins:?}");
            mean_constant += id.decomposition.constant / 1024.0;
        }
    }
    // <Omega^2>/N averages to exactly 1/2 over all tables
    assert_eq!(mean_constant, 0.5);
}

#[test]
fn volatility_oracles() {
    // two-pass variance of a symmetric window
    assert_eq!(sigma2(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 1.0);
    assert_eq!(sigma2(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
    assert!(sigma2(&[]).is_err());
}

#[test]
fn prices_follow_cumulative_attendance() {
    let a = [1.0, -2.0, 0.5, 0.5];
    let path = log_price_path(&a, 100.0, 0.1).unwrap();
    let want = [100.0 * 0.1f64.exp(), 100.0 * (-0.1f64).exp(), 100.0 * (-0.05f64).exp(), 100.0];
    for (p, w) in path.iter().zip(want) {
        assert!((p - w).abs() < 1e-12);
    }
    let series = price_from_attendance(&a, 100.0, 0.1, 1_000.0, 60.0).unwrap();
    assert_eq!(series.timestamps(), &[1_000.0, 1_060.0, 1_120.0, 1_180.0]);
    assert!(log_price_path(&a, 0.0, 0.1).is_err());
}
