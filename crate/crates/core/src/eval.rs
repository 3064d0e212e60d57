//! Strict mention-F1 scoring with per-type and per-length breakdowns,
//! chunk-tag recall, the vector-zeroing ablation harness, and attention
//! heat-map export.

use crate::chunk::{ChunkTag, Mention, TagScheme};
use crate::data::EmbeddingTable;
use crate::error::{Error, Result};
use crate::model::{
    predict_corpus, AblationSpec, Arch, EncodedSentence, Keep, ModelConfig, ParameterStore,
};
use crate::tensor::Real;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Counts and derived metrics of one scoring bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BucketMetrics {
    pub matched: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl BucketMetrics {
    /// Zero-denominator convention: a ratio with no support is 0.
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            0.0
        } else {
            self.matched as f64 / self.predicted as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold == 0 {
            0.0
        } else {
            self.matched as f64 / self.gold as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Length buckets in report order.
pub const LENGTH_BUCKETS: [&str; 4] = ["1", "2", "3", "3+"];

pub fn length_bucket(len: usize) -> &'static str {
    match len {
        0 | 1 => "1",
        2 => "2",
        3 => "3",
        _ => "3+",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub overall: BucketMetrics,
    pub per_type: BTreeMap<String, BucketMetrics>,
    /// Keyed by [`LENGTH_BUCKETS`] entries.
    pub per_length: BTreeMap<String, BucketMetrics>,
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        self.overall.precision()
    }

    pub fn recall(&self) -> f64 {
        self.overall.recall()
    }

    pub fn f1(&self) -> f64 {
        self.overall.f1()
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let o = &self.overall;
        let _ = writeln!(
            out,
            "strict mention F1: P {:.4}  R {:.4}  F1 {:.4}  (matched {} / predicted {} / gold {})",
            o.precision(),
            o.recall(),
            o.f1(),
            o.matched,
            o.predicted,
            o.gold
        );
        if !self.per_type.is_empty() {
            let _ = writeln!(out, "per type:");
            for (name, m) in &self.per_type {
                let _ = writeln!(
                    out,
                    "  {name:<16} P {:.4}  R {:.4}  F1 {:.4}  (gold {})",
                    m.precision(),
                    m.recall(),
                    m.f1(),
                    m.gold
                );
            }
        }
        let _ = writeln!(out, "per mention length:");
        for bucket in LENGTH_BUCKETS {
            if let Some(m) = self.per_length.get(bucket) {
                let _ = writeln!(
                    out,
                    "  {bucket:<3} P {:.4}  R {:.4}  F1 {:.4}  (gold {})",
                    m.precision(),
                    m.recall(),
                    m.f1(),
                    m.gold
                );
            }
        }
        out
    }

    /// Machine-readable key=value lines, sorted.
    pub fn to_kv(&self) -> String {
        let mut lines = Vec::new();
        let push = |lines: &mut Vec<String>, prefix: &str, m: &BucketMetrics| {
            lines.push(format!("{prefix}.precision={:.6}", m.precision()));
            lines.push(format!("{prefix}.recall={:.6}", m.recall()));
            lines.push(format!("{prefix}.f1={:.6}", m.f1()));
            lines.push(format!("{prefix}.matched={}", m.matched));
            lines.push(format!("{prefix}.predicted={}", m.predicted));
            lines.push(format!("{prefix}.gold={}", m.gold));
        };
        push(&mut lines, "overall", &self.overall);
        for (name, m) in &self.per_type {
            push(&mut lines, &format!("type.{name}"), m);
        }
        for (bucket, m) in &self.per_length {
            push(&mut lines, &format!("length.{bucket}"), m);
        }
        lines.sort();
        lines.join("\n") + "\n"
    }
}

/// Strict scoring: a predicted mention is a true positive iff start, end
/// and type all match a gold mention of the same sentence, each gold
/// mention matched at most once.
pub fn strict_f1(
    gold: &[Vec<Mention>],
    pred: &[Vec<Mention>],
    scheme: &TagScheme,
) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Data(format!(
            "gold has {} sentences, predictions have {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut overall = BucketMetrics::default();
    let mut per_type: BTreeMap<String, BucketMetrics> = BTreeMap::new();
    let mut per_length: BTreeMap<String, BucketMetrics> = LENGTH_BUCKETS
        .iter()
        .map(|&b| (b.to_string(), BucketMetrics::default()))
        .collect();

    let type_name = |ty: usize| -> String {
        if ty < scheme.type_count() {
            scheme.type_name(ty).to_string()
        } else {
            format!("type{ty}")
        }
    };

    for (gold_sent, pred_sent) in gold.iter().zip(pred) {
        let mut unmatched: Vec<&Mention> = gold_sent.iter().collect();
        for g in gold_sent {
            overall.gold += 1;
            per_type.entry(type_name(g.ty)).or_default().gold += 1;
            per_length.get_mut(length_bucket(g.len())).expect("bucket").gold += 1;
        }
        for p in pred_sent {
            overall.predicted += 1;
            per_type.entry(type_name(p.ty)).or_default().predicted += 1;
            per_length
                .get_mut(length_bucket(p.len()))
                .expect("bucket")
                .predicted += 1;
            if let Some(pos) = unmatched.iter().position(|g| *g == p) {
                unmatched.swap_remove(pos);
                overall.matched += 1;
                per_type.entry(type_name(p.ty)).or_default().matched += 1;
                per_length
                    .get_mut(length_bucket(p.len()))
                    .expect("bucket")
                    .matched += 1;
            }
        }
    }
    Ok(EvalReport {
        overall,
        per_type,
        per_length,
    })
}

/// Per-letter recall counts for the entity-chunking analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LetterRecall {
    pub correct: usize,
    pub total: usize,
}

impl LetterRecall {
    pub fn recall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.correct as f64 / self.total as f64
        }
    }
}

pub const CHUNK_LETTERS: [char; 5] = ['O', 'S', 'B', 'I', 'E'];

/// Recall of each chunk letter with entity types ignored: of all tokens
/// whose gold letter is X, how many were predicted as X (of any type)?
pub fn chunk_tag_recall(
    gold: &[Vec<ChunkTag>],
    pred: &[Vec<ChunkTag>],
) -> Result<BTreeMap<char, LetterRecall>> {
    if gold.len() != pred.len() {
        return Err(Error::Data(format!(
            "gold has {} sentences, predictions have {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut recalls: BTreeMap<char, LetterRecall> = CHUNK_LETTERS
        .iter()
        .map(|&c| (c, LetterRecall::default()))
        .collect();
    for (gs, ps) in gold.iter().zip(pred) {
        if gs.len() != ps.len() {
            return Err(Error::Data(format!(
                "sentence length mismatch: gold {} vs predicted {}",
                gs.len(),
                ps.len()
            )));
        }
        for (g, p) in gs.iter().zip(ps) {
            let entry = recalls.get_mut(&g.letter()).expect("all letters present");
            entry.total += 1;
            if g.letter() == p.letter() {
                entry.correct += 1;
            }
        }
    }
    Ok(recalls)
}

fn ids_to_tags(ids: &[Vec<usize>], scheme: &TagScheme) -> Result<Vec<Vec<ChunkTag>>> {
    ids.iter()
        .map(|sent| sent.iter().map(|&id| scheme.id_to_tag(id)).collect())
        .collect()
}

/// Runs test-time zeroing inference and reports per-letter chunk recall.
/// Only defined for the attention architecture.
pub fn run_ablation<F: Real>(
    store: &ParameterStore<F>,
    config: &ModelConfig,
    sentences: &[EncodedSentence],
    embeddings: &EmbeddingTable,
    gold_tags: &[Vec<ChunkTag>],
    scheme: &TagScheme,
    spec: AblationSpec,
) -> Result<BTreeMap<char, LetterRecall>> {
    if config.arch != Arch::Att {
        return Err(Error::Config(format!(
            "ablation requires the attention architecture, got {}",
            config.arch.name()
        )));
    }
    let ids = predict_corpus(store, config, sentences, embeddings, Some(spec))?;
    let pred = ids_to_tags(&ids, scheme)?;
    chunk_tag_recall(gold_tags, &pred)
}

/// The full ablation table: the keep-everything column is absolute recall
/// per letter; every other column is the difference against it.
#[derive(Debug, Clone)]
pub struct AblationTable {
    pub absolute: BTreeMap<char, f64>,
    pub deltas: Vec<(String, BTreeMap<char, f64>)>,
}

pub fn ablation_table<F: Real>(
    store: &ParameterStore<F>,
    config: &ModelConfig,
    sentences: &[EncodedSentence],
    embeddings: &EmbeddingTable,
    gold_tags: &[Vec<ChunkTag>],
    scheme: &TagScheme,
) -> Result<AblationTable> {
    let full = run_ablation(
        store, config, sentences, embeddings, gold_tags, scheme,
        AblationSpec { keep: Keep::HCAll },
    )?;
    let absolute: BTreeMap<char, f64> =
        full.iter().map(|(&c, r)| (c, r.recall())).collect();

    let mut keeps = vec![Keep::H, Keep::CAll];
    keeps.extend((0..config.attn_heads).map(Keep::C));
    let mut deltas = Vec::new();
    for keep in keeps {
        let recalls = run_ablation(
            store, config, sentences, embeddings, gold_tags, scheme,
            AblationSpec { keep },
        )?;
        let delta: BTreeMap<char, f64> = recalls
            .iter()
            .map(|(&c, r)| (c, r.recall() - absolute[&c]))
            .collect();
        deltas.push((keep.name(), delta));
    }
    Ok(AblationTable { absolute, deltas })
}

pub fn format_ablation_table(table: &AblationTable) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<4}{:>10}", "", "HC_all");
    for (name, _) in &table.deltas {
        let _ = write!(out, "{name:>10}");
    }
    out.push('\n');
    for letter in CHUNK_LETTERS {
        let _ = write!(out, "{letter:<4}{:>10.2}", 100.0 * table.absolute[&letter]);
        for (_, delta) in &table.deltas {
            let _ = write!(out, "{:>10.2}", 100.0 * delta[&letter]);
        }
        out.push('\n');
    }
    out
}

/// Binary PGM (P5, maxval 255) bytes of one attention map; pixel value is
/// round(255·alpha).
pub fn pgm_bytes(alpha: &[f64], n: usize) -> Result<Vec<u8>> {
    if alpha.len() != n * n {
        return Err(Error::Data(format!(
            "alpha has {} entries, expected {n}x{n}",
            alpha.len()
        )));
    }
    let mut bytes = format!("P5\n{n} {n}\n255\n").into_bytes();
    bytes.extend(alpha.iter().map(|&a| (255.0 * a).round() as u8));
    Ok(bytes)
}

fn heatmap_text(alpha: &[f64], n: usize, tokens: &[String]) -> String {
    let mut out = String::new();
    for token in tokens {
        let _ = write!(out, "\t{token}");
    }
    out.push('\n');
    for (i, token) in tokens.iter().enumerate() {
        let _ = write!(out, "{token}");
        for j in 0..n {
            let _ = write!(out, "\t{:.6}", alpha[i * n + j]);
        }
        out.push('\n');
    }
    out
}

/// Writes one PGM and one labeled text matrix per head into `dir`.
/// Deterministic bytes for a fixed input.
pub fn export_heatmaps(
    alphas: &[Vec<f64>],
    tokens: &[String],
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let n = tokens.len();
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (i, alpha) in alphas.iter().enumerate() {
        if alpha.len() != n * n {
            return Err(Error::Data(format!(
                "head {}: alpha has {} entries but the sentence has {n} tokens",
                i + 1,
                alpha.len()
            )));
        }
        let pgm = dir.join(format!("alpha_head{}.pgm", i + 1));
        std::fs::write(&pgm, pgm_bytes(alpha, n)?)?;
        written.push(pgm);
        let txt = dir.join(format!("alpha_head{}.txt", i + 1));
        std::fs::write(&txt, heatmap_text(alpha, n, tokens))?;
        written.push(txt);
    }
    Ok(written)
}
