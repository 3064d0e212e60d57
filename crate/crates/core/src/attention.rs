//! Token-level multi-head dot-product self-attention over the encoder
//! states, and the concatenated classifier input it feeds.
//!
//! Each head projects H into query/key/value subspaces, forms the n×n
//! row-stochastic attention map, and mixes projected hidden states into a
//! per-token context vector. Because queries and keys both come from H,
//! the scores correlate the past and future halves of each hidden vector
//! multiplicatively.

use crate::error::{dim_err, Result};
use crate::tensor::{Real, Tape, TensorId};

/// Tape-bound projections of one attention head, each d_h × d_c.
#[derive(Debug, Clone, Copy)]
pub struct AttentionHead {
    pub w_query: TensorId,
    pub w_key: TensorId,
    pub w_value: TensorId,
    /// Subspace width d_c.
    pub dim: usize,
}

/// Scaled dot-product attention map for one head: softmax along the
/// second dimension of Q·Kᵀ/√d_c. Rows are querying tokens.
pub fn attention_scores<F: Real>(
    tape: &mut Tape<F>,
    h: TensorId,
    head: &AttentionHead,
) -> Result<TensorId> {
    let (_, d_h) = tape.shape(h);
    let (rows, _) = tape.shape(head.w_query);
    if rows != d_h {
        return Err(dim_err("attention_scores", (1usize, d_h), tape.shape(head.w_query)));
    }
    let q = tape.matmul(h, head.w_query)?;
    let k = tape.matmul(h, head.w_key)?;
    let k_t = tape.transpose(k);
    let logits = tape.matmul(q, k_t)?;
    let scaled = tape.scale(logits, F::from_f64(1.0 / (head.dim as f64).sqrt()));
    tape.rowwise_softmax(scaled)
}

/// Context matrix C = α·(H·W_v); row t is token t's attention-weighted
/// mixture of projected hidden states.
pub fn attention_context<F: Real>(
    tape: &mut Tape<F>,
    alpha: TensorId,
    h: TensorId,
    head: &AttentionHead,
) -> Result<TensorId> {
    let v = tape.matmul(h, head.w_value)?;
    tape.matmul(alpha, v)
}

/// Classifier input (H_t ‖ C¹_t ‖ … ‖ Cᵐ_t) per token; with m·d_c = d_h
/// the result is 2·d_h wide.
pub fn att_classifier_input<F: Real>(
    tape: &mut Tape<F>,
    h: TensorId,
    contexts: &[TensorId],
) -> Result<TensorId> {
    let mut parts = Vec::with_capacity(1 + contexts.len());
    parts.push(h);
    parts.extend_from_slice(contexts);
    tape.concat_cols(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::tensor::finite_difference_check;
    use rand::Rng;

    fn random_head<F: Real>(tape: &mut Tape<F>, d_h: usize, d_c: usize, seed: u64) -> AttentionHead {
        let mut rng = SeedStream::new(seed).rng("test/head");
        let mut mk = |label: u64| {
            let _ = label;
            let vals: Vec<F> = (0..d_h * d_c)
                .map(|_| F::from_f64(rng.random_range(-0.6..0.6)))
                .collect();
            tape.leaf(vals, d_h, d_c, true).unwrap()
        };
        AttentionHead {
            w_query: mk(0),
            w_key: mk(1),
            w_value: mk(2),
            dim: d_c,
        }
    }

    #[test]
    fn singleton_sentence_attends_to_itself() {
        let mut tape = Tape::<f64>::new();
        let head = random_head(&mut tape, 4, 2, 1);
        let h = tape.constant(vec![0.3, -0.1, 0.9, 0.2], 1, 4).unwrap();
        let alpha = attention_scores(&mut tape, h, &head).unwrap();
        assert_eq!(tape.shape(alpha), (1, 1));
        assert_eq!(tape.value(alpha), &[1.0]);
    }

    #[test]
    fn zero_projections_give_uniform_rows() {
        let mut tape = Tape::<f64>::new();
        let head = AttentionHead {
            w_query: tape.zeros(4, 2),
            w_key: tape.zeros(4, 2),
            w_value: tape.zeros(4, 2),
            dim: 2,
        };
        let mut rng = SeedStream::new(3).rng("test/uniform");
        let h_vals: Vec<f64> = (0..3 * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = tape.constant(h_vals, 3, 4).unwrap();
        let alpha = attention_scores(&mut tape, h, &head).unwrap();
        for &v in tape.value(alpha) {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_stochastic_and_gradient_checks() {
        let mut rng = SeedStream::new(4).rng("test/fd");
        let (n, d_h, d_c) = (4, 6, 3);
        let h_vals: Vec<f64> = (0..n * d_h).map(|_| rng.random_range(-1.0..1.0)).collect();

        let mut tape = Tape::<f64>::new();
        let head = random_head(&mut tape, d_h, d_c, 7);
        let h = tape.constant(h_vals.clone(), n, d_h).unwrap();
        let alpha = attention_scores(&mut tape, h, &head).unwrap();
        for row in tape.value(alpha).chunks(n) {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6);
            assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        let report = finite_difference_check(
            |tape, x| {
                let head = random_head(tape, d_h, d_c, 7);
                let alpha = attention_scores(tape, x, &head)?;
                let c = attention_context(tape, alpha, x, &head)?;
                let sq = tape.mul(c, c)?;
                Ok(tape.sum(sq))
            },
            &h_vals,
            n,
            d_h,
            1e-4,
        )
        .unwrap();
        assert!(report.passed(), "max rel error {}", report.max_rel_error);
    }

    #[test]
    fn identity_alpha_reproduces_projected_h() {
        let mut tape = Tape::<f64>::new();
        let head = random_head(&mut tape, 4, 2, 9);
        let mut rng = SeedStream::new(5).rng("test/id");
        let h_vals: Vec<f64> = (0..3 * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = tape.constant(h_vals, 3, 4).unwrap();
        let eye = tape
            .constant(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], 3, 3)
            .unwrap();
        let c = attention_context(&mut tape, eye, h, &head).unwrap();
        let hv = tape.matmul(h, head.w_value).unwrap();
        assert_eq!(tape.value(c), tape.value(hv));
    }

    #[test]
    fn uniform_alpha_averages_projected_rows() {
        let mut tape = Tape::<f64>::new();
        let head = random_head(&mut tape, 4, 2, 11);
        let mut rng = SeedStream::new(6).rng("test/avg");
        let h_vals: Vec<f64> = (0..3 * 4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = tape.constant(h_vals, 3, 4).unwrap();
        let uniform = tape.constant(vec![1.0 / 3.0; 9], 3, 3).unwrap();
        let c = attention_context(&mut tape, uniform, h, &head).unwrap();
        let cv = tape.value(c);
        for t in 1..3 {
            for j in 0..2 {
                assert!((cv[t * 2 + j] - cv[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn context_rows_match_independent_resummation() {
        let mut tape = Tape::<f64>::new();
        let (n, d_h, d_c) = (3, 4, 2);
        let head = random_head(&mut tape, d_h, d_c, 13);
        let mut rng = SeedStream::new(7).rng("test/resum");
        let h_vals: Vec<f64> = (0..n * d_h).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = tape.constant(h_vals.clone(), n, d_h).unwrap();
        let alpha = attention_scores(&mut tape, h, &head).unwrap();
        let c = attention_context(&mut tape, alpha, h, &head).unwrap();

        let alpha_v = tape.value(alpha).to_vec();
        let wv = tape.value(head.w_value).to_vec();
        let cv = tape.value(c).to_vec();
        for t in 0..n {
            for j in 0..d_c {
                let mut acc = 0.0;
                for s in 0..n {
                    let mut proj = 0.0;
                    for k in 0..d_h {
                        proj += h_vals[s * d_h + k] * wv[k * d_c + j];
                    }
                    acc += alpha_v[t * n + s] * proj;
                }
                assert!((cv[t * d_c + j] - acc).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn classifier_input_width_and_slicing() {
        let mut tape = Tape::<f64>::new();
        let (n, d_h, m, d_c) = (3, 10, 5, 2);
        assert_eq!(m * d_c, d_h);
        let mut rng = SeedStream::new(8).rng("test/concat");
        let h_vals: Vec<f64> = (0..n * d_h).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = tape.constant(h_vals.clone(), n, d_h).unwrap();
        let contexts: Vec<TensorId> = (0..m)
            .map(|_| {
                let vals: Vec<f64> = (0..n * d_c).map(|_| rng.random_range(-1.0..1.0)).collect();
                tape.constant(vals, n, d_c).unwrap()
            })
            .collect();
        let input = att_classifier_input(&mut tape, h, &contexts).unwrap();
        assert_eq!(tape.shape(input), (n, 2 * d_h));

        // Slicing the parts back reproduces them in order.
        let h_part = tape.slice_cols(input, 0, d_h).unwrap();
        assert_eq!(tape.value(h_part), tape.value(h));
        for (i, &c) in contexts.iter().enumerate() {
            let part = tape.slice_cols(input, d_h + i * d_c, d_c).unwrap();
            assert_eq!(tape.value(part), tape.value(c));
        }

        // Zeroing every context leaves an H-only input.
        let zeros: Vec<TensorId> = (0..m).map(|_| tape.zeros(n, d_c)).collect();
        let ablated = att_classifier_input(&mut tape, h, &zeros).unwrap();
        let av = tape.value(ablated);
        for t in 0..n {
            assert_eq!(&av[t * 2 * d_h..t * 2 * d_h + d_h], &h_vals[t * d_h..(t + 1) * d_h]);
            assert!(av[t * 2 * d_h + d_h..(t + 1) * 2 * d_h].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn attention_is_permutation_equivariant() {
        let mut tape = Tape::<f64>::new();
        let (n, d_h, d_c) = (4, 6, 3);
        let head = random_head(&mut tape, d_h, d_c, 15);
        let mut rng = SeedStream::new(9).rng("test/perm");
        let h_vals: Vec<f64> = (0..n * d_h).map(|_| rng.random_range(-1.0..1.0)).collect();
        let perm = [2usize, 0, 3, 1];
        let permuted: Vec<f64> = perm
            .iter()
            .flat_map(|&p| h_vals[p * d_h..(p + 1) * d_h].to_vec())
            .collect();

        let h = tape.constant(h_vals, n, d_h).unwrap();
        let hp = tape.constant(permuted, n, d_h).unwrap();
        let alpha = attention_scores(&mut tape, h, &head).unwrap();
        let alpha_p = attention_scores(&mut tape, hp, &head).unwrap();
        let c = attention_context(&mut tape, alpha, h, &head).unwrap();
        let c_p = attention_context(&mut tape, alpha_p, hp, &head).unwrap();

        let (av, apv) = (tape.value(alpha), tape.value(alpha_p));
        for i in 0..n {
            for j in 0..n {
                assert!((apv[i * n + j] - av[perm[i] * n + perm[j]]).abs() < 1e-12);
            }
        }
        let (cv, cpv) = (tape.value(c), tape.value(c_p));
        for i in 0..n {
            for j in 0..d_c {
                assert!((cpv[i * d_c + j] - cv[perm[i] * d_c + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attention_unties_the_xor_middle_token() {
        // Baseline H rows obey the XOR equalities: the middle token's
        // forward half agrees between phrases 1 and 3 (and 2 and 4), its
        // backward half between 1 and 4 (and 2 and 3). A linear classifier
        // on H alone therefore cannot split {1,2} from {3,4} at the middle
        // token, but the attention context can.
        let (d, n) = (3usize, 3usize);
        let d_h = 2 * d;
        let mut rng = SeedStream::new(10).rng("test/xor-att");
        let mut half = || -> Vec<f64> { (0..d).map(|_| rng.random_range(-1.0..1.0)).collect() };
        // Forward states depend on the prefix, backward states on the
        // suffix. Phrases "Key and Peele" (1) and "Key and I" (3) share
        // every prefix up to the middle token.
        let fwd_key = half();
        let fwd_key_and = half();
        let fwd_suffix_peele = half(); // forward state at the last token
        let fwd_suffix_i = half();
        let bwd_from0_peele = half(); // backward states entering token 0
        let bwd_from0_i = half();
        let bwd_from1_peele = half();
        let bwd_from1_i = half();
        let bwd_last_peele = half();
        let bwd_last_i = half();

        let build = |fwd2: &[f64], b0: &[f64], b1: &[f64], b2: &[f64]| -> Vec<f64> {
            let mut h = Vec::new();
            h.extend_from_slice(&fwd_key);
            h.extend_from_slice(b0);
            h.extend_from_slice(&fwd_key_and);
            h.extend_from_slice(b1);
            h.extend_from_slice(fwd2);
            h.extend_from_slice(b2);
            h
        };
        let h1 = build(&fwd_suffix_peele, &bwd_from0_peele, &bwd_from1_peele, &bwd_last_peele);
        let h3 = build(&fwd_suffix_i, &bwd_from0_i, &bwd_from1_i, &bwd_last_i);
        // Middle-token forward halves identical across the two phrases.
        assert_eq!(h1[d_h..d_h + d], h3[d_h..d_h + d]);

        let mut tape = Tape::<f64>::new();
        let head = random_head(&mut tape, d_h, d, 23);
        let t1 = tape.constant(h1, n, d_h).unwrap();
        let t3 = tape.constant(h3, n, d_h).unwrap();
        let a1 = attention_scores(&mut tape, t1, &head).unwrap();
        let a3 = attention_scores(&mut tape, t3, &head).unwrap();
        let c1 = attention_context(&mut tape, a1, t1, &head).unwrap();
        let c3 = attention_context(&mut tape, a3, t3, &head).unwrap();
        let mid1 = &tape.value(c1)[d..2 * d];
        let mid3 = &tape.value(c3)[d..2 * d];
        let delta: f64 = mid1.iter().zip(mid3).map(|(a, b)| (a - b).abs()).sum();
        assert!(delta > 1e-8, "context failed to separate the phrases");
    }
}
