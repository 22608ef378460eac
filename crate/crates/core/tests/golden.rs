//! Frozen reference values, recorded once from a fixed seed and asserted at
//! tight tolerance. These catch any unintended change to initialization,
//! the forward pass, or the resampling streams.

use polysum_core::*;

fn golden_doc() -> Vec<TokenSeq> {
    vec![
        tokenize("the cat sat on the mat"),
        tokenize("dogs bark loudly at night"),
        tokenize("birds fly very high"),
    ]
}

fn close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-6
}

#[test]
fn forward_pass_matches_recorded_values() {
    let params = init_params(&ModelConfig::default(), 123).unwrap();
    let doc = golden_doc();
    let encoded = encode_document(&params, "golden", &doc).unwrap();

    let u0 = &encoded.sentence_vectors.row(0)[..4];
    let v0 = &encoded.contextual_vectors.row(0)[..4];
    let u_expected = [
        0.035093374303725264,
        -0.5159940006010446,
        -0.8600105761171469,
        -2.742626362660258,
    ];
    let v_expected = [
        0.31912270641245444,
        -0.40228649272534794,
        -0.6963369933285528,
        -1.2701543960312938,
    ];
    for (got, want) in u0.iter().zip(u_expected).chain(v0.iter().zip(v_expected)) {
        assert!(close(*got, want), "state {got} vs {want}");
    }

    let scores = predict_scores(&params, &encoded.contextual_vectors);
    let scores_expected = [0.5276372900726423, 0.6714098162818826, 0.5522682387505863];
    for (got, want) in scores.iter().zip(scores_expected) {
        assert!(close(*got, want), "score {got} vs {want}");
    }

    let alpha = predict_alpha(&params, &encoded.sentence_vectors);
    let alpha_expected = [0.6610974161068706, 0.5086512586979126, 0.44685991724869667];
    for (got, want) in alpha.iter().zip(alpha_expected) {
        assert!(close(*got, want), "alpha {got} vs {want}");
    }

    let means = set_means(&encoded.sentence_vectors, [&[0], &[1, 2], &[], &[0, 2]]);
    let beta = predict_beta(&params, &means);
    let beta_expected = [
        0.5794123315964713,
        0.6405652993291137,
        0.4560397055877049,
        0.6028612480248652,
    ];
    for (got, want) in beta.iter().zip(beta_expected) {
        assert!(close(*got, want), "beta {got} vs {want}");
    }
}

#[test]
fn all_zero_set_means_with_zeroed_head_score_half() {
    let mut params = init_params(&ModelConfig::default(), 123).unwrap();
    let mut flat = params.set.to_flat();
    for (name, start, end) in params.set.flat_spans() {
        if name.starts_with("t_beta.head") {
            flat[start..end].iter_mut().for_each(|v| *v = 0.0);
        }
    }
    params.set.assign_flat(&flat);
    let zeros = Mat::zeros(4, params.config.dim);
    let beta = predict_beta(&params, &zeros);
    assert!(beta.iter().all(|&b| (b - 0.5).abs() < 1e-12), "{beta:?}");
}

#[test]
fn bootstrap_interval_matches_recorded_values() {
    let fixture: Vec<f64> = (0..24)
        .map(|i| 0.3 + 0.025 * ((i * 7 % 13) as f64))
        .collect();
    let (lo, hi) = bootstrap_ci(&fixture, 1000, 0.95, 4242);
    assert!(close(lo, 0.4052083333333334), "lo {lo}");
    assert!(close(hi, 0.48023437500000005), "hi {hi}");
    let mean = fixture.iter().sum::<f64>() / fixture.len() as f64;
    assert!(lo <= mean && mean <= hi);
}

#[test]
fn bootstrap_intervals_shrink_with_sample_size() {
    use rand::Rng;
    let mut rng = polysum_core::rng::seeded_rng(616);
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                0.5 + 0.1 * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect()
    };
    let mut width_small = 0.0;
    let mut width_large = 0.0;
    for trial in 0..100u64 {
        let (lo, hi) = bootstrap_ci(&draw(20), 400, 0.95, 7000 + trial);
        width_small += hi - lo;
        let (lo, hi) = bootstrap_ci(&draw(80), 400, 0.95, 8000 + trial);
        width_large += hi - lo;
    }
    assert!(
        width_large < width_small,
        "mean width at n=80 ({}) should be below n=20 ({})",
        width_large / 100.0,
        width_small / 100.0
    );
}
