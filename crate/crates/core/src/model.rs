//! Model assembly: configuration, named parameter store, initialization,
//! and the forward pass of the three architectures with either head.

use crate::attention::{att_classifier_input, attention_context, attention_scores, AttentionHead};
use crate::chunk::TagScheme;
use crate::classifier::{
    argmax_decode, crf_nll, crf_viterbi, softmax_nll, token_scores, ClassifierParams, CrfParams,
};
use crate::data::{Corpus, EmbeddingTable, Vocab};
use crate::encoder::{baseline_encode, cross_encode, EncodedSequence, LstmCell};
use crate::error::{Error, Result};
use crate::features::{
    assemble_features, encode_token, CnnParams, FeatureParams, TokenFeatures, CAP_DIM,
    CHAR_TYPE_DIM, CNN_WIDTHS,
};
use crate::rng::SeedStream;
use crate::tensor::{apply_variational_dropout, Real, Tape, TensorId};
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    Baseline,
    Cross,
    Att,
}

impl Arch {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Arch::Baseline),
            "cross" => Ok(Arch::Cross),
            "att" => Ok(Arch::Att),
            _ => Err(Error::Config(format!(
                "unknown architecture {s:?} (expected baseline|cross|att)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arch::Baseline => "baseline",
            Arch::Cross => "cross",
            Arch::Att => "att",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Head {
    Softmax,
    Crf,
}

impl Head {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "softmax" => Ok(Head::Softmax),
            "crf" => Ok(Head::Crf),
            _ => Err(Error::Config(format!(
                "unknown head {s:?} (expected softmax|crf)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Head::Softmax => "softmax",
            Head::Crf => "crf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Mini,
    Paper,
}

impl Preset {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mini" => Ok(Preset::Mini),
            "paper" => Ok(Preset::Paper),
            _ => Err(Error::Config(format!(
                "unknown preset {s:?} (expected mini|paper)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Mini => "mini",
            Preset::Paper => "paper",
        }
    }
}

/// Architecture dimensions plus the data-dependent widths (embedding dim,
/// character inventory, entity-type count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub arch: Arch,
    pub head: Head,
    pub preset: Preset,
    pub word_dim: usize,
    pub char_dim: usize,
    pub kernels_per_width: usize,
    pub lstm_dim: usize,
    pub attn_heads: usize,
    pub attn_dim: usize,
    /// Entity types P; the classifier has P×4+1 outputs.
    pub n_types: usize,
    /// Rows of the character embedding table (vocab chars + PAD + UNK).
    pub char_rows: usize,
}

impl ModelConfig {
    pub fn new(
        preset: Preset,
        arch: Arch,
        head: Head,
        word_dim: usize,
        n_types: usize,
        char_rows: usize,
    ) -> Self {
        let (char_dim, kernels_per_width, lstm_dim, attn_heads, attn_dim) = match preset {
            // 100d cells, 25d chars with 20 kernels per width, five
            // 40d attention heads.
            Preset::Paper => (25, 20, 100, 5, 40),
            Preset::Mini => (5, 5, 16, 2, 16),
        };
        ModelConfig {
            arch,
            head,
            preset,
            word_dim,
            char_dim,
            kernels_per_width,
            lstm_dim,
            attn_heads,
            attn_dim,
            n_types,
            char_rows,
        }
    }

    /// Raw feature width: word vector + pooled char vector + caps.
    pub fn d_x(&self) -> usize {
        self.word_dim + CNN_WIDTHS.len() * self.kernels_per_width + CAP_DIM
    }

    /// Encoder output width.
    pub fn d_h(&self) -> usize {
        2 * self.lstm_dim
    }

    /// Token class count.
    pub fn d_p(&self) -> usize {
        self.n_types * 4 + 1
    }

    /// Width of the classifier input.
    pub fn classifier_input_dim(&self) -> usize {
        match self.arch {
            Arch::Att => self.d_h() + self.attn_heads * self.attn_dim,
            _ => self.d_h(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.arch == Arch::Att && self.attn_heads * self.attn_dim != self.d_h() {
            return Err(Error::Config(format!(
                "attention subspaces must tile d_h: {} heads × {} != {}",
                self.attn_heads,
                self.attn_dim,
                self.d_h()
            )));
        }
        if self.n_types == 0 {
            return Err(Error::Config("at least one entity type is required".into()));
        }
        if self.word_dim == 0 || self.char_rows < 2 {
            return Err(Error::Config("degenerate feature dimensions".into()));
        }
        Ok(())
    }
}

/// One named tensor of the store.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<F> {
    pub values: Vec<F>,
    pub rows: usize,
    pub cols: usize,
    pub trainable: bool,
}

impl<F: Real> Param<F> {
    pub fn trainable(values: Vec<F>, rows: usize, cols: usize) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Param {
            values,
            rows,
            cols,
            trainable: true,
        }
    }
}

/// Named parameter tensors, iterated in name order everywhere so runs and
/// checkpoints are reproducible byte for byte.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParameterStore<F> {
    entries: BTreeMap<String, Param<F>>,
}

impl<F: Real> ParameterStore<F> {
    pub fn new() -> Self {
        ParameterStore {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: &str, param: Param<F>) {
        self.entries.insert(name.to_string(), param);
    }

    pub fn get(&self, name: &str) -> Option<&Param<F>> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param<F>> {
        self.entries.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Param<F>)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of stored values across all tensors.
    pub fn value_count(&self) -> usize {
        self.entries.values().map(|p| p.values.len()).sum()
    }

    /// Converts every tensor elementwise (f32 training store to an f64
    /// gradient-check store and back).
    pub fn cast<G: Real>(&self) -> ParameterStore<G> {
        let entries = self
            .entries
            .iter()
            .map(|(name, p)| {
                (
                    name.clone(),
                    Param {
                        values: p.values.iter().map(|&v| G::from_f64(Real::to_f64(v))).collect(),
                        rows: p.rows,
                        cols: p.cols,
                        trainable: p.trainable,
                    },
                )
            })
            .collect();
        ParameterStore { entries }
    }
}

fn glorot<F: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<F> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    (0..rows * cols)
        .map(|_| F::from_f64(rng.random_range(-limit..limit)))
        .collect()
}

fn lstm_input_dim(config: &ModelConfig, cell: usize) -> usize {
    match cell {
        1 | 3 => config.d_x(),
        _ => match config.arch {
            Arch::Cross => 2 * config.lstm_dim,
            _ => config.lstm_dim,
        },
    }
}

/// Expected (rows, cols, trainable) for every tensor of a model; the
/// single source of truth for init, binding and checkpoint validation.
pub fn shape_map(config: &ModelConfig) -> BTreeMap<String, (usize, usize, bool)> {
    let mut shapes = BTreeMap::new();
    let map_cols = config.char_dim + CHAR_TYPE_DIM;
    shapes.insert(
        "feat.char_table".to_string(),
        (config.char_rows, config.char_dim, true),
    );
    shapes.insert("feat.unk_word".to_string(), (1, config.word_dim, true));
    for w in CNN_WIDTHS {
        shapes.insert(
            format!("feat.cnn.w{w}"),
            (w * map_cols, config.kernels_per_width, true),
        );
        shapes.insert(format!("feat.cnn.b{w}"), (1, config.kernels_per_width, true));
    }
    for cell in 1..=4 {
        let d_in = lstm_input_dim(config, cell);
        shapes.insert(
            format!("lstm{cell}.w_input"),
            (d_in, 4 * config.lstm_dim, true),
        );
        shapes.insert(
            format!("lstm{cell}.w_recurrent"),
            (config.lstm_dim, 4 * config.lstm_dim, true),
        );
        shapes.insert(format!("lstm{cell}.bias"), (1, 4 * config.lstm_dim, true));
    }
    if config.arch == Arch::Att {
        for head in 1..=config.attn_heads {
            for proj in ["w_query", "w_key", "w_value"] {
                shapes.insert(
                    format!("att.head{head}.{proj}"),
                    (config.d_h(), config.attn_dim, true),
                );
            }
        }
    }
    shapes.insert(
        "cls.weight".to_string(),
        (config.classifier_input_dim(), config.d_p(), true),
    );
    shapes.insert("cls.bias".to_string(), (1, config.d_p(), true));
    if config.head == Head::Crf {
        shapes.insert(
            "crf.transitions".to_string(),
            (config.d_p() + 2, config.d_p() + 2, true),
        );
    }
    shapes
}

/// Fresh parameters: Glorot-uniform weights; zero biases except the
/// forget-gate block at 1.0; character embeddings uniform in ±0.5/dim;
/// UNK word vector and CRF transitions at zero.
pub fn init_params<F: Real>(config: &ModelConfig, seed: u64) -> Result<ParameterStore<F>> {
    config.validate()?;
    let stream = SeedStream::new(seed);
    let mut store = ParameterStore::new();
    for (name, (rows, cols, trainable)) in shape_map(config) {
        let mut rng = stream.rng(&format!("init/{name}"));
        let values: Vec<F> = if name == "feat.char_table" {
            let limit = 0.5 / config.char_dim as f64;
            (0..rows * cols)
                .map(|_| F::from_f64(rng.random_range(-limit..limit)))
                .collect()
        } else if name.ends_with(".bias") && name.starts_with("lstm") {
            let mut bias = vec![F::zero(); rows * cols];
            for j in config.lstm_dim..2 * config.lstm_dim {
                bias[j] = F::one();
            }
            bias
        } else if name.ends_with(".bias")
            || name.ends_with(".b1")
            || name.ends_with(".b2")
            || name.ends_with(".b3")
            || name == "feat.unk_word"
            || name == "crf.transitions"
        {
            vec![F::zero(); rows * cols]
        } else {
            glorot(&mut rng, rows, cols)
        };
        store.insert(
            &name,
            Param {
                values,
                rows,
                cols,
                trainable,
            },
        );
    }
    Ok(store)
}

/// Tape ids of all bound parameters, grouped by module.
pub struct BoundModel {
    pub features: FeatureParams,
    pub cells: [LstmCell; 4],
    pub heads: Vec<AttentionHead>,
    pub classifier: ClassifierParams,
    pub crf: Option<CrfParams>,
    pub by_name: BTreeMap<String, TensorId>,
}

/// Loads every parameter of the store onto the tape as a leaf. When
/// `substitute` names a parameter, the given tensor id is used instead
/// (the gradient-check hook).
pub fn bind_model<F: Real>(
    tape: &mut Tape<F>,
    store: &ParameterStore<F>,
    config: &ModelConfig,
    substitute: Option<(&str, TensorId)>,
) -> Result<BoundModel> {
    let mut by_name = BTreeMap::new();
    for (name, param) in store.iter() {
        let id = match substitute {
            Some((sub_name, sub_id)) if sub_name == name => sub_id,
            _ => tape.leaf(
                param.values.clone(),
                param.rows,
                param.cols,
                param.trainable,
            )?,
        };
        by_name.insert(name.clone(), id);
    }
    let lookup = |name: &str| -> Result<TensorId> {
        by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::Internal(format!("missing parameter {name:?}")))
    };

    let cnn = CnnParams {
        kernels: [
            lookup("feat.cnn.w1")?,
            lookup("feat.cnn.w2")?,
            lookup("feat.cnn.w3")?,
        ],
        biases: [
            lookup("feat.cnn.b1")?,
            lookup("feat.cnn.b2")?,
            lookup("feat.cnn.b3")?,
        ],
        kernels_per_width: config.kernels_per_width,
    };
    let features = FeatureParams {
        char_table: lookup("feat.char_table")?,
        char_dim: config.char_dim,
        unk_word: lookup("feat.unk_word")?,
        cnn,
    };
    let mut cells = Vec::with_capacity(4);
    for cell in 1..=4 {
        cells.push(LstmCell {
            id: cell,
            w_input: lookup(&format!("lstm{cell}.w_input"))?,
            w_recurrent: lookup(&format!("lstm{cell}.w_recurrent"))?,
            bias: lookup(&format!("lstm{cell}.bias"))?,
            cell_dim: config.lstm_dim,
        });
    }
    let heads = if config.arch == Arch::Att {
        (1..=config.attn_heads)
            .map(|h| {
                Ok(AttentionHead {
                    w_query: lookup(&format!("att.head{h}.w_query"))?,
                    w_key: lookup(&format!("att.head{h}.w_key"))?,
                    w_value: lookup(&format!("att.head{h}.w_value"))?,
                    dim: config.attn_dim,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let classifier = ClassifierParams {
        weight: lookup("cls.weight")?,
        bias: lookup("cls.bias")?,
    };
    let crf = if config.head == Head::Crf {
        Some(CrfParams {
            transitions: lookup("crf.transitions")?,
            n_classes: config.d_p(),
        })
    } else {
        None
    };
    Ok(BoundModel {
        features,
        cells: [cells[0], cells[1], cells[2], cells[3]],
        heads,
        classifier,
        crf,
        by_name,
    })
}

/// Gradients of all trainable parameters after a backward pass. A
/// parameter the graph never touched (e.g. the UNK vector on a batch with
/// no unknown words) contributes zeros.
pub fn read_grads<F: Real>(
    tape: &Tape<F>,
    bound: &BoundModel,
    store: &ParameterStore<F>,
) -> BTreeMap<String, Vec<F>> {
    let mut grads = BTreeMap::new();
    for (name, param) in store.iter() {
        if !param.trainable {
            continue;
        }
        let id = bound.by_name[name];
        let g = tape
            .grad(id)
            .map(|g| g.to_vec())
            .unwrap_or_else(|| vec![F::zero(); param.values.len()]);
        grads.insert(name.clone(), g);
    }
    grads
}

/// A sentence resolved against vocabulary and embeddings, ready for the
/// forward pass.
#[derive(Debug, Clone)]
pub struct EncodedSentence {
    pub tokens: Vec<TokenFeatures>,
    pub tag_ids: Vec<usize>,
}

pub fn encode_sentences(
    corpus: &Corpus,
    vocab: &Vocab,
    embeddings: &EmbeddingTable,
) -> Result<Vec<EncodedSentence>> {
    corpus
        .sentences
        .iter()
        .map(|s| {
            let tokens = s
                .tokens
                .iter()
                .map(|t| encode_token(t, vocab, embeddings))
                .collect::<Result<Vec<_>>>()?;
            Ok(EncodedSentence {
                tokens,
                tag_ids: s.tag_ids(&corpus.scheme),
            })
        })
        .collect()
}

/// Training/inference switch; in training, two variational dropout masks
/// are derived per sentence from the given seed (one on X, one on H).
#[derive(Debug, Clone, Copy)]
pub enum Mode {
    Infer,
    Train { dropout: f64, mask_seed: u64 },
}

/// Which classifier-input component survives test-time zeroing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    /// Everything: identical to normal inference.
    HCAll,
    /// Only H; every context vector is zeroed.
    H,
    /// Only the context vectors; H is zeroed.
    CAll,
    /// Only head i's context (0-based); H and the other heads are zeroed.
    C(usize),
}

impl Keep {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "hc_all" => Ok(Keep::HCAll),
            "h" => Ok(Keep::H),
            "c_all" => Ok(Keep::CAll),
            _ => {
                if let Some(rest) = s.strip_prefix('c') {
                    if let Ok(i) = rest.parse::<usize>() {
                        if i >= 1 {
                            return Ok(Keep::C(i - 1));
                        }
                    }
                }
                Err(Error::Config(format!(
                    "unknown ablation component {s:?} (expected hc_all|h|c_all|c<i>)"
                )))
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            Keep::HCAll => "HC_all".into(),
            Keep::H => "H".into(),
            Keep::CAll => "C_all".into(),
            Keep::C(i) => format!("C{}", i + 1),
        }
    }
}

/// Test-time ablation: exactly one component is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AblationSpec {
    pub keep: Keep,
}

/// All tape handles a caller may want after a forward pass.
#[derive(Debug)]
pub struct Forward {
    /// n × d_p classifier scores.
    pub scores: TensorId,
    /// Encoder output as used downstream (post-dropout in training).
    pub h: TensorId,
    pub forward_half: TensorId,
    pub backward_half: TensorId,
    /// Attention maps, one n×n tensor per head (att only).
    pub alphas: Vec<TensorId>,
    /// Context matrices, one n×d_c tensor per head (att only).
    pub contexts: Vec<TensorId>,
}

/// Runs one sentence through the configured architecture.
pub fn forward<F: Real>(
    tape: &mut Tape<F>,
    bound: &BoundModel,
    config: &ModelConfig,
    sentence: &EncodedSentence,
    embeddings: &EmbeddingTable,
    mode: Mode,
    ablation: Option<AblationSpec>,
) -> Result<Forward> {
    if let Some(spec) = ablation {
        if config.arch != Arch::Att {
            return Err(Error::Config(format!(
                "ablation {} is defined on the attention architecture, not {}",
                spec.keep.name(),
                config.arch.name()
            )));
        }
    }
    let x = assemble_features(tape, &sentence.tokens, embeddings, &bound.features)?;
    let x = match mode {
        Mode::Train { dropout, mask_seed } => {
            let seed = SeedStream::new(mask_seed).derive_seed("dropout/x", 0);
            apply_variational_dropout(tape, x, dropout, seed, true)?
        }
        Mode::Infer => x,
    };
    let encoded: EncodedSequence = match config.arch {
        Arch::Cross => cross_encode(tape, &bound.cells, x)?,
        _ => baseline_encode(tape, &bound.cells, x)?,
    };
    let h = match mode {
        Mode::Train { dropout, mask_seed } => {
            let seed = SeedStream::new(mask_seed).derive_seed("dropout/h", 0);
            apply_variational_dropout(tape, encoded.h, dropout, seed, true)?
        }
        Mode::Infer => encoded.h,
    };

    let (scores, alphas, contexts) = match config.arch {
        Arch::Att => {
            let n = sentence.tokens.len();
            let mut alphas = Vec::with_capacity(bound.heads.len());
            let mut contexts = Vec::with_capacity(bound.heads.len());
            for head in &bound.heads {
                let alpha = attention_scores(tape, h, head)?;
                let context = attention_context(tape, alpha, h, head)?;
                alphas.push(alpha);
                contexts.push(context);
            }
            let (h_in, ctx_in): (TensorId, Vec<TensorId>) = match ablation.map(|a| a.keep) {
                None | Some(Keep::HCAll) => (h, contexts.clone()),
                Some(Keep::H) => (
                    h,
                    contexts.iter().map(|_| tape.zeros(n, config.attn_dim)).collect(),
                ),
                Some(Keep::CAll) => (tape.zeros(n, config.d_h()), contexts.clone()),
                Some(Keep::C(i)) => {
                    if i >= contexts.len() {
                        return Err(Error::Config(format!(
                            "ablation keeps head {} but the model has {} heads",
                            i + 1,
                            contexts.len()
                        )));
                    }
                    let kept: Vec<TensorId> = contexts
                        .iter()
                        .enumerate()
                        .map(|(j, &c)| if j == i { c } else { tape.zeros(n, config.attn_dim) })
                        .collect();
                    (tape.zeros(n, config.d_h()), kept)
                }
            };
            let cls_in = att_classifier_input(tape, h_in, &ctx_in)?;
            let scores = token_scores(tape, cls_in, &bound.classifier)?;
            (scores, alphas, contexts)
        }
        _ => {
            let scores = token_scores(tape, h, &bound.classifier)?;
            (scores, Vec::new(), Vec::new())
        }
    };

    Ok(Forward {
        scores,
        h,
        forward_half: encoded.forward,
        backward_half: encoded.backward,
        alphas,
        contexts,
    })
}

/// Per-sentence training loss under the configured head.
pub fn sentence_loss<F: Real>(
    tape: &mut Tape<F>,
    bound: &BoundModel,
    fwd: &Forward,
    gold: &[usize],
) -> Result<TensorId> {
    match &bound.crf {
        Some(crf) => crf_nll(tape, fwd.scores, crf, gold),
        None => softmax_nll(tape, fwd.scores, gold),
    }
}

/// Decodes predicted tag ids: per-token argmax under softmax, Viterbi
/// under the CRF head.
pub fn predict<F: Real>(tape: &Tape<F>, bound: &BoundModel, fwd: &Forward) -> Result<Vec<usize>> {
    match &bound.crf {
        Some(crf) => Ok(crf_viterbi(tape, fwd.scores, crf)?.0),
        None => Ok(argmax_decode(tape, fwd.scores)),
    }
}

/// Convenience: run inference over many sentences with a fresh tape and
/// return predicted tag ids per sentence.
pub fn predict_corpus<F: Real>(
    store: &ParameterStore<F>,
    config: &ModelConfig,
    sentences: &[EncodedSentence],
    embeddings: &EmbeddingTable,
    ablation: Option<AblationSpec>,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let mut tape = Tape::<F>::new();
        let bound = bind_model(&mut tape, store, config, None)?;
        let fwd = forward(
            &mut tape,
            &bound,
            config,
            sentence,
            embeddings,
            Mode::Infer,
            ablation,
        )?;
        out.push(predict(&tape, &bound, &fwd)?);
    }
    Ok(out)
}

/// Central-difference check of one full architecture on a 3-token mini
/// sentence, dropout off, in double precision.
///
/// Every trainable parameter is checked; for tensors larger than
/// `elements_per_param` a seeded random subset of coordinates is
/// perturbed (exhaustive central differences over every weight would
/// dominate the suite's runtime without changing the verdict).
pub fn fd_check_architecture(
    arch: Arch,
    head: Head,
    seed: u64,
    elements_per_param: usize,
    tol: f64,
) -> Result<Vec<(String, crate::tensor::FdReport)>> {
    use crate::tensor::finite_difference_check_sampled;

    let (config, _, embeddings, sentences, _) = mini_fixture(arch, head, seed)?;
    let store: ParameterStore<f64> = init_params(&config, seed)?;
    let sentence = &sentences[0];
    let stream = SeedStream::new(seed);

    let mut reports = Vec::new();
    for (name, param) in store.iter() {
        if !param.trainable {
            continue;
        }
        let len = param.values.len();
        let elements: Vec<usize> = if len <= elements_per_param {
            (0..len).collect()
        } else {
            let mut rng = stream.rng(&format!("fdcheck/{name}"));
            let mut picked: Vec<usize> = Vec::with_capacity(elements_per_param);
            while picked.len() < elements_per_param {
                let i = rng.random_range(0..len);
                if !picked.contains(&i) {
                    picked.push(i);
                }
            }
            picked
        };
        let report = finite_difference_check_sampled(
            |tape, x| {
                let bound = bind_model(tape, &store, &config, Some((name, x)))?;
                let fwd = forward(
                    tape,
                    &bound,
                    &config,
                    sentence,
                    &embeddings,
                    Mode::Infer,
                    None,
                )?;
                sentence_loss(tape, &bound, &fwd, &sentence.tag_ids)
            },
            &param.values,
            param.rows,
            param.cols,
            tol,
            &elements,
        )?;
        reports.push((name.clone(), report));
    }
    Ok(reports)
}

/// Builds a deterministic miniature fixture (XOR vocabulary, random
/// embeddings) for gradient checks and structural tests.
pub fn mini_fixture(
    arch: Arch,
    head: Head,
    seed: u64,
) -> Result<(ModelConfig, Vocab, EmbeddingTable, Vec<EncodedSentence>, TagScheme)> {
    let corpus = crate::data::gen_xor_phrase_corpus();
    let vocab = crate::data::build_vocab(&corpus)?;
    let embeddings = crate::data::random_embeddings(&corpus, 8, seed);
    let config = ModelConfig::new(
        Preset::Mini,
        arch,
        head,
        embeddings.dim(),
        corpus.scheme.type_count(),
        vocab.char_rows(),
    );
    let sentences = encode_sentences(&corpus, &vocab, &embeddings)?;
    Ok((config, vocab, embeddings, sentences, corpus.scheme))
}
