mod common;

use common::*;
use pcfec::channel::{bipolar, bipolar_map, hard_bit};
use pcfec::chase::{destructive_distance, euclidean_distance};
use pcfec::harness::{simulate_point, Frame, SimConfig};
use pcfec::pyndiah::{normalize_l, update_soft};
use pcfec::{
    chase_decode, decode_product, ComponentCode, DecoderParams, SideInfo, SoftMatrix, Variant,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn toy() -> ComponentCode {
    ComponentCode::by_name("ebch_32_21").unwrap()
}

fn noisy_toy_word(seed: u64, sigma: f64) -> (u32, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let book = toy_codebook();
    let c = book[rng.random_range(0..book.len())];
    let r = unpack(c)
        .iter()
        .map(|&b| {
            let z: f64 = StandardNormal.sample(&mut rng);
            bipolar(b) + sigma * z
        })
        .collect();
    (c, r)
}

fn toy_params(variant: Variant) -> DecoderParams {
    let mut p = DecoderParams::pyndiah_classic(3, 4);
    p.variant = variant;
    p.gamma = vec![0.5; p.half_iterations()];
    p.t2 = 1.0;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chase_candidates_are_codewords_ranked_by_distance(seed in any::<u64>(), p in 1usize..8) {
        let (_, r) = noisy_toy_word(seed, 0.6);
        let cs = chase_decode(&r, p, &toy()).unwrap();
        prop_assert!(cs.len() <= 1 << p);
        for i in 0..cs.len() {
            let c = cs.candidate(i);
            prop_assert!(in_codebook(pack(&c)));
            prop_assert!((cs.euclid()[i] - euclidean_distance(&r, &c)).abs() < 1e-9);
        }
        let ranked = cs.ranked();
        prop_assert!(ranked.windows(2).all(|w| cs.euclid()[w[0]] <= cs.euclid()[w[1]]));
        let mut words: Vec<u32> = (0..cs.len()).map(|i| pack(&cs.candidate(i))).collect();
        words.sort_unstable();
        words.dedup();
        prop_assert_eq!(words.len(), cs.len());
    }

    #[test]
    fn chase_lrp_are_least_reliable(seed in any::<u64>(), p in 1usize..10) {
        let (_, r) = noisy_toy_word(seed, 0.8);
        let cs = chase_decode(&r, p, &toy()).unwrap();
        let worst_in = cs.lrp().iter().map(|&j| r[j].abs()).fold(0.0, f64::max);
        for j in (0..r.len()).filter(|j| !cs.lrp().contains(j)) {
            prop_assert!(r[j].abs() >= worst_in);
        }
    }

    #[test]
    fn chase_includes_bdd_of_hard_decision(seed in any::<u64>()) {
        let (_, r) = noisy_toy_word(seed, 0.7);
        let hard: Vec<u8> = r.iter().map(|&v| hard_bit(v)).collect();
        let cs = chase_decode(&r, 3, &toy()).unwrap();
        if let Some(c) = toy().bdd_decode(&hard).unwrap() {
            prop_assert!((0..cs.len()).any(|i| cs.candidate(i) == c));
        }
    }

    #[test]
    fn destructive_distance_sums_disagreeing_terms(seed in any::<u64>()) {
        let (_, r) = noisy_toy_word(seed, 0.7);
        let cs = chase_decode(&r, 4, &toy()).unwrap();
        for i in 0..cs.len() {
            let c = cs.candidate(i);
            let direct: f64 = r
                .iter()
                .zip(&c)
                .filter(|(&rj, &cj)| cj != hard_bit(rj))
                .map(|(&rj, &cj)| (rj - bipolar(cj)).powi(2))
                .sum();
            prop_assert!((cs.destructive(i, &r) - direct).abs() < 1e-9);
            prop_assert!((destructive_distance(&r, &c) - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn normalized_l_has_unit_mean(values in proptest::collection::vec(-50.0f64..50.0, 16)) {
        let mut l = SoftMatrix::from_vec(4, values).unwrap();
        normalize_l(&mut l);
        let m = l.mean_abs();
        prop_assert!(m == 0.0 || (m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn soft_update_is_affine(y in proptest::collection::vec(-3.0f64..3.0, 9),
                             l in proptest::collection::vec(-3.0f64..3.0, 9),
                             alpha in 0.0f64..2.0) {
        let ym = SoftMatrix::from_vec(3, y.clone()).unwrap();
        let lm = SoftMatrix::from_vec(3, l.clone()).unwrap();
        let r = update_soft(&ym, &lm, alpha).unwrap();
        for k in 0..9 {
            prop_assert!((r.as_slice()[k] - (y[k] + alpha * l[k])).abs() < 1e-12);
        }
    }
}

#[test]
fn chase_agrees_with_ml_at_high_snr() {
    let code = toy();
    let book = toy_codebook();
    let mut agree = 0;
    for seed in 0..40 {
        let (_, r) = noisy_toy_word(seed, 0.45);
        let ml = *book
            .iter()
            .min_by(|&&a, &&b| {
                let (da, db) = (
                    euclidean_distance(&r, &unpack(a)),
                    euclidean_distance(&r, &unpack(b)),
                );
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let cs = chase_decode(&r, 8, &code).unwrap();
        agree += usize::from(cs.decision().map(|d| pack(&d)) == Some(ml));
    }
    assert!(agree >= 38, "{agree}/40");
}

#[test]
fn noiseless_frames_decode_exactly_for_every_variant() {
    let code = toy();
    let model = pcfec::ConfidenceModel::new([0.0; 10], -1.0);
    for variant in Variant::ALL {
        let frame = Frame::generate_with_sigma(&code, 0.0, 9, 0);
        assert_eq!(
            frame.y.as_slice(),
            bipolar_map(frame.codeword.bits().as_slice()).as_slice()
        );
        let side = SideInfo {
            sigma: 0.3,
            model: Some(&model),
            truth: Some(frame.codeword.bits()),
        };
        let (hard, trace) = decode_product(&frame.y, &toy_params(variant), &code, &side).unwrap();
        assert_eq!(&hard, frame.codeword.bits(), "{variant}");
        assert_eq!(trace.half_iterations.len(), 6);
    }
}

#[test]
fn decoding_is_deterministic() {
    let code = toy();
    let frame = Frame::generate(&code, 3.0, 4, 2).unwrap();
    let side = SideInfo {
        sigma: frame.sigma,
        model: None,
        truth: None,
    };
    let params = toy_params(Variant::Baseline);
    let a = decode_product(&frame.y, &params, &code, &side).unwrap();
    let b = decode_product(&frame.y, &params, &code, &side).unwrap();
    assert_eq!(a, b);
}

#[test]
fn simulation_is_reproducible_and_thread_independent() {
    let code = toy();
    let params = toy_params(Variant::Baseline);
    let cfg = |threads| SimConfig {
        max_frames: 300,
        fe_target: 40,
        seed: 17,
        threads,
        ..Default::default()
    };
    let a = simulate_point(&code, &params, None, 1.0, &cfg(1)).unwrap();
    let b = simulate_point(&code, &params, None, 1.0, &cfg(1)).unwrap();
    let c = simulate_point(&code, &params, None, 1.0, &cfg(3)).unwrap();
    assert!(a.fe > 0);
    for other in [&b, &c] {
        assert_eq!((a.frames, a.fe, a.be), (other.frames, other.fe, other.be));
    }
}

#[test]
fn missing_model_is_rejected_for_nn_variant() {
    let code = toy();
    let frame = Frame::generate(&code, 3.0, 1, 0).unwrap();
    let side = SideInfo {
        sigma: frame.sigma,
        model: None,
        truth: None,
    };
    assert!(decode_product(&frame.y, &toy_params(Variant::NnAssisted), &code, &side).is_err());
    assert!(decode_product(&frame.y, &toy_params(Variant::Genie), &code, &side).is_err());
}
