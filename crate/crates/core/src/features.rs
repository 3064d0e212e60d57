//! Per-token raw features and the character-trigram CNN.
//!
//! Each token contributes a frozen word vector, a character-based word
//! vector pooled from a CNN over a fixed 20-row character feature map,
//! and a 4-d capitalization one-hot.

use crate::data::{EmbeddingTable, Vocab};
use crate::error::{dim_err, Error, Result};
use crate::tensor::{Real, Tape, TensorId};

/// Token lengths are unified to this many characters by truncation/padding.
pub const CHAR_LEN: usize = 20;
/// Character classes: uppercase, lowercase, digit, punctuation.
pub const CHAR_TYPE_DIM: usize = 4;
/// Word capitalization classes.
pub const CAP_DIM: usize = 4;
/// Convolution widths of the character CNN.
pub const CNN_WIDTHS: [usize; 3] = [1, 2, 3];

/// Word capitalization, in one-hot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capitalization {
    Uppercase,
    UpperInitial,
    Lowercase,
    MixedCaps,
}

impl Capitalization {
    fn index(self) -> usize {
        match self {
            Capitalization::Uppercase => 0,
            Capitalization::UpperInitial => 1,
            Capitalization::Lowercase => 2,
            Capitalization::MixedCaps => 3,
        }
    }
}

/// Classifies a word's capitalization shape. Checks run in order:
/// all letters uppercase; first letter uppercase with the rest lowercase;
/// all letters lowercase; otherwise mixed-caps. Tokens without any
/// letters count as lowercase.
pub fn classify_capitalization(word: &str) -> Result<Capitalization> {
    if word.is_empty() {
        return Err(Error::Input("empty token has no capitalization".into()));
    }
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.is_empty() {
        return Ok(Capitalization::Lowercase);
    }
    if letters.iter().all(|c| c.is_uppercase()) {
        return Ok(Capitalization::Uppercase);
    }
    if letters[0].is_uppercase() && letters[1..].iter().all(|c| c.is_lowercase()) {
        return Ok(Capitalization::UpperInitial);
    }
    if letters.iter().all(|c| c.is_lowercase()) {
        return Ok(Capitalization::Lowercase);
    }
    Ok(Capitalization::MixedCaps)
}

/// 4-d one-hot of [`classify_capitalization`].
pub fn capitalization_feature(word: &str) -> Result<[f64; CAP_DIM]> {
    let mut onehot = [0.0; CAP_DIM];
    onehot[classify_capitalization(word)?.index()] = 1.0;
    Ok(onehot)
}

fn char_type_index(c: char) -> usize {
    if c.is_uppercase() {
        0
    } else if c.is_lowercase() {
        1
    } else if c.is_ascii_digit() {
        2
    } else {
        // Everything else falls into the punctuation class.
        3
    }
}

/// Character ids (padded/truncated to [`CHAR_LEN`]) and the flattened
/// 20×4 character-type one-hot map. Padding positions use the vocab's
/// PAD id and all-zero type bits.
pub fn encode_characters(token: &str, vocab: &Vocab) -> Result<(Vec<usize>, Vec<f64>)> {
    if token.is_empty() {
        return Err(Error::Input("cannot encode an empty token".into()));
    }
    let mut ids = vec![vocab.pad_char_id(); CHAR_LEN];
    let mut types = vec![0.0; CHAR_LEN * CHAR_TYPE_DIM];
    for (i, c) in token.chars().take(CHAR_LEN).enumerate() {
        ids[i] = vocab.char_id(c);
        types[i * CHAR_TYPE_DIM + char_type_index(c)] = 1.0;
    }
    Ok((ids, types))
}

/// Raw features of one token, ready to be placed on a tape.
#[derive(Debug, Clone)]
pub struct TokenFeatures {
    pub char_ids: Vec<usize>,
    /// Flattened CHAR_LEN×4 one-hot map.
    pub char_types: Vec<f64>,
    /// Index into the embedding table, or None for the learned UNK vector.
    pub word_id: Option<usize>,
    pub cap: [f64; CAP_DIM],
}

/// Resolves a token against vocabulary and embeddings.
pub fn encode_token(
    token: &str,
    vocab: &Vocab,
    embeddings: &EmbeddingTable,
) -> Result<TokenFeatures> {
    let (char_ids, char_types) = encode_characters(token, vocab)?;
    let word_id = embeddings
        .lookup(token)
        .map(|_| embeddings.word_index(token).expect("lookup hit has index"));
    Ok(TokenFeatures {
        char_ids,
        char_types,
        word_id,
        cap: capitalization_feature(token)?,
    })
}

/// Tape-bound parameters of the character CNN: for each width w ∈ {1,2,3},
/// a (w·map_cols)×k kernel bank and a 1×k bias.
#[derive(Debug, Clone, Copy)]
pub struct CnnParams {
    pub kernels: [TensorId; 3],
    pub biases: [TensorId; 3],
    /// Kernels per width; the pooled character vector has 3k entries.
    pub kernels_per_width: usize,
}

/// Convolves the 20×(char_dim+4) map with every width, max-pools each
/// kernel over positions, and concatenates to a 1×3k vector.
pub fn char_cnn<F: Real>(
    tape: &mut Tape<F>,
    map: TensorId,
    map_cols: usize,
    cnn: &CnnParams,
) -> Result<TensorId> {
    let (rows, cols) = tape.shape(map);
    if rows != CHAR_LEN || cols != map_cols {
        return Err(dim_err("char_cnn map", (CHAR_LEN, map_cols), (rows, cols)));
    }
    let mut pooled = Vec::with_capacity(CNN_WIDTHS.len());
    for (wi, &w) in CNN_WIDTHS.iter().enumerate() {
        let positions = CHAR_LEN - w + 1;
        let patches = if w == 1 {
            map
        } else {
            let shifted: Vec<TensorId> = (0..w)
                .map(|j| tape.slice_rows(map, j, positions))
                .collect::<Result<_>>()?;
            tape.concat_cols(&shifted)?
        };
        let conv = tape.matmul(patches, cnn.kernels[wi])?;
        let conv = tape.add_row_vec(conv, cnn.biases[wi])?;
        pooled.push(tape.max_over_time(conv));
    }
    tape.concat_cols(&pooled)
}

/// Tape-bound feature parameters: the trainable character-embedding table,
/// the learned UNK word vector, and the CNN.
#[derive(Debug, Clone, Copy)]
pub struct FeatureParams {
    pub char_table: TensorId,
    pub char_dim: usize,
    pub unk_word: TensorId,
    pub cnn: CnnParams,
}

/// Builds the n×d_x feature matrix X for a sentence.
///
/// Row t is [word vector; pooled character vector; capitalization one-hot].
/// Word vectors are constants (frozen); the character table, CNN and UNK
/// vector are trainable.
pub fn assemble_features<F: Real>(
    tape: &mut Tape<F>,
    tokens: &[TokenFeatures],
    embeddings: &EmbeddingTable,
    params: &FeatureParams,
) -> Result<TensorId> {
    if tokens.is_empty() {
        return Err(Error::Precondition("cannot featurize an empty sentence".into()));
    }
    let map_cols = params.char_dim + CHAR_TYPE_DIM;
    let mut rows = Vec::with_capacity(tokens.len());
    for tok in tokens {
        let word_row = match tok.word_id {
            Some(i) => {
                let vec: Vec<F> = embeddings
                    .vector_by_index(i)
                    .iter()
                    .map(|&v| F::from_f64(v))
                    .collect();
                tape.constant_row(vec)
            }
            None => params.unk_word,
        };
        let char_embed = tape.gather(params.char_table, &tok.char_ids)?;
        let char_types = tape.constant(
            tok.char_types.iter().map(|&v| F::from_f64(v)).collect(),
            CHAR_LEN,
            CHAR_TYPE_DIM,
        )?;
        let map = tape.concat_cols(&[char_embed, char_types])?;
        let char_vec = char_cnn(tape, map, map_cols, &params.cnn)?;
        let cap = tape.constant_row(tok.cap.iter().map(|&v| F::from_f64(v)).collect());
        rows.push(tape.concat_cols(&[word_row, char_vec, cap])?);
    }
    tape.concat_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_vocab, gen_xor_phrase_corpus, parse_embeddings, random_embeddings};
    use crate::rng::SeedStream;
    use crate::tensor::finite_difference_check;
    use rand::Rng;

    fn xor_vocab() -> Vocab {
        build_vocab(&gen_xor_phrase_corpus()).unwrap()
    }

    #[test]
    fn single_uppercase_char_token() {
        let vocab = xor_vocab();
        let (ids, types) = encode_characters("A", &vocab).unwrap();
        assert_eq!(ids.len(), CHAR_LEN);
        assert_eq!(&types[..4], &[1.0, 0.0, 0.0, 0.0]);
        for pos in 1..CHAR_LEN {
            assert_eq!(ids[pos], vocab.pad_char_id());
            assert_eq!(&types[pos * 4..pos * 4 + 4], &[0.0; 4]);
        }
    }

    #[test]
    fn digit_and_punctuation_type_bits() {
        let vocab = xor_vocab();
        let (_, types) = encode_characters("3", &vocab).unwrap();
        assert_eq!(&types[..4], &[0.0, 0.0, 1.0, 0.0]);
        let (_, types) = encode_characters("-", &vocab).unwrap();
        assert_eq!(&types[..4], &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn overlong_token_truncates_to_twenty() {
        let vocab = xor_vocab();
        let token = "abcdefghijklmnopqrstuvwxy"; // 25 chars
        let (ids, _) = encode_characters(token, &vocab).unwrap();
        assert_eq!(ids.len(), CHAR_LEN);
        // Last kept character is the 20th ('t'); no pad slot remains.
        assert!(ids.iter().all(|&id| id != vocab.pad_char_id()));
    }

    #[test]
    fn empty_token_is_input_error() {
        let vocab = xor_vocab();
        assert!(matches!(
            encode_characters("", &vocab),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn capitalization_classes() {
        use Capitalization::*;
        assert_eq!(classify_capitalization("USA").unwrap(), Uppercase);
        assert_eq!(classify_capitalization("White").unwrap(), UpperInitial);
        assert_eq!(classify_capitalization("house").unwrap(), Lowercase);
        assert_eq!(classify_capitalization("iPhone").unwrap(), MixedCaps);
        assert_eq!(classify_capitalization("123!").unwrap(), Lowercase);
        assert_eq!(capitalization_feature("USA").unwrap(), [1.0, 0.0, 0.0, 0.0]);
    }

    fn mini_cnn<F: Real>(tape: &mut Tape<F>, map_cols: usize, k: usize, seed: u64) -> CnnParams {
        let mut rng = SeedStream::new(seed).rng("test/cnn");
        let mut kernels = Vec::new();
        let mut biases = Vec::new();
        for w in CNN_WIDTHS {
            let vals: Vec<F> = (0..w * map_cols * k)
                .map(|_| F::from_f64(rng.random_range(-0.5..0.5)))
                .collect();
            kernels.push(tape.leaf(vals, w * map_cols, k, true).unwrap());
            biases.push(tape.leaf(vec![F::zero(); k], 1, k, true).unwrap());
        }
        CnnParams {
            kernels: [kernels[0], kernels[1], kernels[2]],
            biases: [biases[0], biases[1], biases[2]],
            kernels_per_width: k,
        }
    }

    #[test]
    fn zero_map_zero_bias_gives_zero_vector() {
        let mut tape = Tape::<f64>::new();
        let cnn = mini_cnn(&mut tape, 9, 20, 1);
        let map = tape.zeros(CHAR_LEN, 9);
        let out = char_cnn(&mut tape, map, 9, &cnn).unwrap();
        assert_eq!(tape.shape(out), (1, 60));
        assert!(tape.value(out).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn char_cnn_rejects_wrong_shape() {
        let mut tape = Tape::<f64>::new();
        let cnn = mini_cnn(&mut tape, 9, 4, 2);
        let map = tape.zeros(CHAR_LEN, 7);
        assert!(matches!(
            char_cnn(&mut tape, map, 9, &cnn),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn char_cnn_gradient_routes_through_argmax_only() {
        let mut rng = SeedStream::new(5).rng("test/cnn-fd");
        let map_cols = 5;
        let k = 3;
        let map_vals: Vec<f64> = (0..CHAR_LEN * map_cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let report = finite_difference_check(
            |tape, x| {
                let cnn = mini_cnn(tape, map_cols, k, 7);
                let out = char_cnn(tape, x, map_cols, &cnn)?;
                Ok(tape.sum(out))
            },
            &map_vals,
            CHAR_LEN,
            map_cols,
            1e-4,
        )
        .unwrap();
        assert!(report.passed(), "max rel error {}", report.max_rel_error);
    }

    #[test]
    fn char_cnn_padding_windows_do_not_change_the_max() {
        // Independent oracle: convolve by hand with 21 content rows worth
        // of padding instead of 20 and check the pooled maxima agree for a
        // short token. Pure-pad windows repeat an existing window's value.
        let vocab = xor_vocab();
        let (ids, types) = encode_characters("ab", &vocab).unwrap();
        let char_dim = 3;
        let mut rng = SeedStream::new(11).rng("test/pad-oracle");
        let table: Vec<f64> = (0..vocab.char_rows() * char_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let map_cols = char_dim + CHAR_TYPE_DIM;
        let build_map = |len: usize| -> Vec<f64> {
            let mut map = vec![0.0; len * map_cols];
            for pos in 0..len {
                let id = if pos < ids.len() { ids[pos] } else { vocab.pad_char_id() };
                map[pos * map_cols..pos * map_cols + char_dim]
                    .copy_from_slice(&table[id * char_dim..(id + 1) * char_dim]);
                if pos < CHAR_LEN {
                    for t in 0..CHAR_TYPE_DIM {
                        map[pos * map_cols + char_dim + t] = types[pos * CHAR_TYPE_DIM + t];
                    }
                }
            }
            map
        };
        let w = 3;
        let k = 2;
        let kernel: Vec<f64> = (0..w * map_cols * k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let conv_max = |map: &[f64], len: usize| -> Vec<f64> {
            let mut maxima = vec![f64::NEG_INFINITY; k];
            for pos in 0..=(len - w) {
                for kk in 0..k {
                    let mut acc = 0.0;
                    for j in 0..w * map_cols {
                        let row = pos + j / map_cols;
                        acc += map[row * map_cols + j % map_cols] * kernel[j * k + kk];
                    }
                    maxima[kk] = maxima[kk].max(acc);
                }
            }
            maxima
        };
        let short = conv_max(&build_map(CHAR_LEN), CHAR_LEN);
        let long = conv_max(&build_map(CHAR_LEN + 5), CHAR_LEN + 5);
        for (a, b) in short.iter().zip(&long) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn assemble_shapes_and_unk_row() {
        let corpus = gen_xor_phrase_corpus();
        let vocab = build_vocab(&corpus).unwrap();
        let word_dim = 6;
        let table = random_embeddings(&corpus, word_dim, 3);
        let mut tape = Tape::<f64>::new();
        let char_dim = 3;

        let mut rng = SeedStream::new(8).rng("test/assemble");
        let char_vals: Vec<f64> = (0..vocab.char_rows() * char_dim)
            .map(|_| rng.random_range(-0.1..0.1))
            .collect();
        let char_table = tape.leaf(char_vals, vocab.char_rows(), char_dim, true).unwrap();
        let unk = tape.leaf(vec![0.0; word_dim], 1, word_dim, true).unwrap();
        let cnn = mini_cnn(&mut tape, char_dim + CHAR_TYPE_DIM, 2, 9);
        let params = FeatureParams {
            char_table,
            char_dim,
            unk_word: unk,
            cnn,
        };

        let toks: Vec<TokenFeatures> = ["Key", "and", "Key", "zzz"]
            .iter()
            .map(|t| encode_token(t, &vocab, &table).unwrap())
            .collect();
        let x = assemble_features(&mut tape, &toks, &table, &params).unwrap();
        let d_x = word_dim + 3 * 2 + CAP_DIM;
        assert_eq!(tape.shape(x), (4, d_x));

        let xv = tape.value(x);
        // Same token twice gives identical rows.
        assert_eq!(&xv[..d_x], &xv[2 * d_x..3 * d_x]);
        // OOV word part equals the UNK vector (zeros here).
        assert!(xv[3 * d_x..3 * d_x + word_dim].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn word_vectors_stay_frozen_while_char_path_trains() {
        let corpus = gen_xor_phrase_corpus();
        let vocab = build_vocab(&corpus).unwrap();
        let table = random_embeddings(&corpus, 4, 3);
        let mut tape = Tape::<f64>::new();
        let char_dim = 3;
        let char_vals = vec![0.01; vocab.char_rows() * char_dim];
        let char_table = tape.leaf(char_vals, vocab.char_rows(), char_dim, true).unwrap();
        let unk = tape.leaf(vec![0.0; 4], 1, 4, true).unwrap();
        let cnn = mini_cnn(&mut tape, char_dim + CHAR_TYPE_DIM, 2, 10);
        let params = FeatureParams { char_table, char_dim, unk_word: unk, cnn };
        let toks = vec![encode_token("Key", &vocab, &table).unwrap()];
        let x = assemble_features(&mut tape, &toks, &table, &params).unwrap();
        let loss = tape.sum(x);
        tape.backward(loss).unwrap();
        assert!(tape.grad(char_table).is_some());
        assert!(tape.grad(char_table).unwrap().iter().any(|&g| g != 0.0));
        // The word row was placed as a frozen constant right after the CNN
        // params; it must not have received any gradient.
        let word_const = TensorId(params.cnn.biases[2].0 + 1);
        assert!(!tape.requires_grad(word_const));
        assert!(tape.grad(word_const).is_none());
    }

    #[test]
    fn d_x_matches_embedding_source() {
        // 300-d words + 60-d char CNN + 4-d capitalization = 364.
        let table = parse_embeddings("", 300).unwrap();
        assert_eq!(table.dim() + 3 * 20 + CAP_DIM, 364);
        let table = parse_embeddings("", 400).unwrap();
        assert_eq!(table.dim() + 3 * 20 + CAP_DIM, 464);
    }
}
