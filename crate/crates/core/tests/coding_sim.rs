//! Monte Carlo behavior of the codebook simulators at desk scale: selection
//! beats independence at rates above the information, time mixing matches
//! the single-letter law, binning decodes above the conditional entropy and
//! fails below it.

use emproc_core::{
    converse_check, simulate_coordination, simulate_wz, time_mixed_joint, BlockedPiggyback,
    CoordinationProblem, FunctionClass, JointPmf, SideInfoProblem, SplitMix64, WzSimConfig,
    WzStage1,
};

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum()
}

fn product_target() -> JointPmf {
    JointPmf::new(2, 2, vec![0.25, 0.25, 0.25, 0.25]).unwrap()
}

fn identity_target() -> JointPmf {
    JointPmf::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
}

fn encode_mean_deviation(target: &JointPmf, rate: f64, n: usize, trials: usize, seed: u64) -> f64 {
    let class = FunctionClass::AllFunctions { alphabet: 4 };
    let root = SplitMix64::new(seed);
    let mut total = 0.0;
    for t in 0..trials {
        let mut src = root.split2(1, t as u64);
        let v: Vec<usize> = (0..n).map(|_| (src.next_u64() & 1) as usize).collect();
        let mut cs = root.split2(2, t as u64);
        let code =
            BlockedPiggyback::build(target, &class, n, rate, cs.next_u64(), 16.0).unwrap();
        let (_, dev) = code.encode(&v).unwrap();
        total += dev;
    }
    total / trials as f64
}

#[test]
fn product_target_needs_no_selection_and_improves_with_n() {
    // A single codeword per block suffices for an independent target; the
    // deviation is pure sampling noise and shrinks with n.
    let target = product_target();
    let mut last = f64::INFINITY;
    for n in [100usize, 400, 1600] {
        let mean = encode_mean_deviation(&target, 0.0, n, 50, 0xAB);
        assert!(mean < last, "n={n}: {mean} vs {last}");
        last = mean;
    }
    assert!(last < 0.06, "residual at n=1600: {last}");
}

#[test]
fn identity_coupling_achieved_above_one_bit() {
    // Selection at rate 1.2 > I = 1 tracks the identity coupling.
    let mean = encode_mean_deviation(&identity_target(), 1.2, 400, 50, 0xCD);
    assert!(mean < 0.1, "mean deviation {mean}");
}

#[test]
fn selection_fails_well_below_the_information() {
    // At rate 0.2 << 1 the identity coupling is out of reach.
    let mean = encode_mean_deviation(&identity_target(), 0.2, 400, 20, 0xEF);
    assert!(mean > 0.3, "mean deviation {mean}");
}

#[test]
fn coordination_simulation_meets_the_distortion_budget() {
    // Binary symmetric coordination at a rate above R(delta).
    let p = CoordinationProblem {
        source: vec![0.5, 0.5],
        kernel: vec![vec![0.89, 0.11], vec![0.11, 0.89]],
        class: FunctionClass::AllFunctions { alphabet: 4 },
        delta: 0.1,
    };
    let rate = emproc_core::coordination_rate(&p).unwrap().rate_bits + 0.25;
    let rep = simulate_coordination(&p, rate, 400, 20, 0x11).unwrap();
    assert!(
        rep.mean_deviation <= 0.2,
        "mean deviation {}",
        rep.mean_deviation
    );
    assert!(rep.rate_actual <= rate + 1e-12);
    let check = converse_check(&rep, rate, &p).unwrap();
    assert!(check.ok, "converse: {check:?}");
}

#[test]
fn product_coordination_needs_almost_no_rate() {
    let p = CoordinationProblem {
        source: vec![0.5, 0.5],
        kernel: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        class: FunctionClass::AllFunctions { alphabet: 4 },
        delta: 0.4,
    };
    let rep = simulate_coordination(&p, 0.05, 400, 20, 0x22).unwrap();
    assert!(
        rep.mean_deviation <= p.delta + 0.1,
        "mean {}",
        rep.mean_deviation
    );
}

#[test]
fn time_mixed_estimate_converges_to_the_law() {
    // I.i.d. pairs from Q with an identity "code": the time-mixed estimate
    // approaches Q (n * trials = 2 * 10^4 here).
    let q = JointPmf::new(2, 2, vec![0.445, 0.055, 0.055, 0.445]).unwrap();
    let cum = {
        let mut acc = 0.0;
        q.cells()
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect::<Vec<_>>()
    };
    let mut pairs = Vec::new();
    let mut rng = SplitMix64::new(0x77);
    for _ in 0..20 {
        let mut xs = Vec::with_capacity(1000);
        let mut ys = Vec::with_capacity(1000);
        for _ in 0..1000 {
            let u = rng.next_f64();
            let cell = cum.iter().position(|&c| u < c).unwrap_or(3);
            xs.push(cell / 2);
            ys.push(cell % 2);
        }
        pairs.push((xs, ys));
    }
    let qhat = time_mixed_joint(&pairs, 2, 2).unwrap();
    assert!(l1(qhat.cells(), q.cells()) < 0.05);
}

fn doubly_symmetric_problem() -> SideInfoProblem {
    SideInfoProblem {
        joint: JointPmf::new(2, 2, vec![0.445, 0.055, 0.055, 0.445]).unwrap(),
        class: FunctionClass::AllFunctions { alphabet: 4 },
        delta: 0.1,
        u_bound: 2,
    }
}

fn identity_g() -> Vec<Vec<usize>> {
    // g(y, u) = u: reconstruct the decoded stage-1 symbol.
    vec![vec![0, 1], vec![0, 1]]
}

#[test]
fn binning_decodes_above_conditional_entropy() {
    let p = doubly_symmetric_problem();
    let h_cond = p.joint.conditional_entropy_x_given_y(); // about 0.5 bits
    let cfg = WzSimConfig {
        r_bin: h_cond + 0.3,
        n1: 20,
        n2: 25,
        trials: 12,
        seed: 0x31,
        density_slack: 0.1,
    };
    let rep = simulate_wz(&p, &identity_g(), &WzStage1::Identity, &cfg).unwrap();
    assert!(
        rep.decode_error_rate < 0.05,
        "error rate {}",
        rep.decode_error_rate
    );
    // Correct decoding reproduces the source pair law closely.
    assert!(rep.mean_deviation < 0.25, "deviation {}", rep.mean_deviation);
}

#[test]
fn binning_fails_below_conditional_entropy() {
    let p = doubly_symmetric_problem();
    let h_cond = p.joint.conditional_entropy_x_given_y();
    let cfg = WzSimConfig {
        r_bin: h_cond - 0.3,
        n1: 20,
        n2: 25,
        trials: 8,
        seed: 0x32,
        density_slack: 0.1,
    };
    let rep = simulate_wz(&p, &identity_g(), &WzStage1::Identity, &cfg).unwrap();
    assert!(
        rep.decode_error_rate > 0.3,
        "error rate {}",
        rep.decode_error_rate
    );
}

#[test]
fn diagonal_source_with_constant_stage_one_is_free() {
    // X = Y almost surely: g(y, u) = y reconstructs exactly from the side
    // information; stage 1 carries a constant.
    let p = SideInfoProblem {
        joint: JointPmf::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap(),
        class: FunctionClass::AllFunctions { alphabet: 4 },
        delta: 0.0,
        u_bound: 1,
    };
    let g = vec![vec![0], vec![1]]; // g(y, u) = y
    let kernel = vec![vec![1.0], vec![1.0]]; // constant U
    let cfg = WzSimConfig {
        r_bin: 0.05,
        n1: 10,
        n2: 100,
        trials: 5,
        seed: 0x41,
        density_slack: 0.5,
    };
    let rep = simulate_wz(&p, &g, &WzStage1::Piggyback { kernel, rate: 0.0 }, &cfg).unwrap();
    // Reconstruction is exact, so the only deviation left is the sampling
    // fluctuation of the source pair itself.
    assert_eq!(rep.decode_error_rate, 0.0);
    assert!(rep.mean_deviation < 0.08, "deviation {}", rep.mean_deviation);
}

#[test]
fn piggyback_stage_one_composes_with_binning() {
    // Full two-stage scheme on the doubly symmetric source with U = X
    // carried by a genuine stage-1 code at rate above I(X;U) = H(X).
    let p = doubly_symmetric_problem();
    let kernel = vec![vec![1.0, 0.0], vec![0.0, 1.0]]; // U = X
    let h_cond = p.joint.conditional_entropy_x_given_y();
    let cfg = WzSimConfig {
        r_bin: h_cond + 0.35,
        n1: 14,
        n2: 20,
        trials: 8,
        seed: 0x51,
        density_slack: 0.1,
    };
    let rep = simulate_wz(
        &p,
        &identity_g(),
        &WzStage1::Piggyback {
            kernel,
            rate: 1.15,
        },
        &cfg,
    )
    .unwrap();
    // Stage-1 selection at rate above H(X) finds near-copies of the source
    // block, and binning passes them through.
    assert!(rep.mean_deviation < 0.3, "deviation {}", rep.mean_deviation);
    assert!(
        rep.decode_error_rate < 0.25,
        "error rate {}",
        rep.decode_error_rate
    );
}

#[test]
fn reports_are_deterministic_given_the_seed() {
    let p = doubly_symmetric_problem();
    let cfg = WzSimConfig {
        r_bin: 0.8,
        n1: 12,
        n2: 10,
        trials: 4,
        seed: 0x61,
        density_slack: 0.1,
    };
    let a = simulate_wz(&p, &identity_g(), &WzStage1::Identity, &cfg).unwrap();
    let b = simulate_wz(&p, &identity_g(), &WzStage1::Identity, &cfg).unwrap();
    assert_eq!(a.deviations, b.deviations);
    assert_eq!(a.block_errors, b.block_errors);
    let pcoord = CoordinationProblem {
        source: vec![0.5, 0.5],
        kernel: vec![vec![0.89, 0.11], vec![0.11, 0.89]],
        class: FunctionClass::AllFunctions { alphabet: 4 },
        delta: 0.3,
    };
    let r1 = simulate_coordination(&pcoord, 0.3, 100, 5, 9).unwrap();
    let r2 = simulate_coordination(&pcoord, 0.3, 100, 5, 9).unwrap();
    assert_eq!(r1.deviations, r2.deviations);
}

#[test]
fn time_mixed_x_marginal_matches_the_source() {
    // The decoded-side marginal of the time-mixed estimate equals the
    // source marginal up to multinomial error.
    let p = CoordinationProblem {
        source: vec![0.7, 0.3],
        kernel: vec![vec![0.8, 0.2], vec![0.3, 0.7]],
        class: FunctionClass::AllFunctions { alphabet: 4 },
        delta: 0.2,
    };
    let rep = simulate_coordination(&p, 0.4, 250, 40, 0x71).unwrap();
    let qx = rep.qhat.marginal_x();
    assert!(l1(&qx, &p.source) < 0.05, "marginal {qx:?}");
}
