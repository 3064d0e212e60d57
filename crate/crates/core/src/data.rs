//! Corpus reading and writing, embedding tables, vocabularies, and the
//! synthetic corpora for the XOR and ablation experiments.
//!
//! The CoNLL interchange format is one `TOKEN<TAB>TAG` pair per line with a
//! blank line terminating each sentence; tags are `TYPE:CHUNK` or `O`.

use crate::chunk::{decode_tags, encode_mentions, ChunkTag, Mention, TagScheme};
use crate::error::{Error, Result};
use crate::rng::SeedStream;
use rand::Rng;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub tags: Vec<ChunkTag>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, tags: Vec<ChunkTag>) -> Self {
        debug_assert_eq!(tokens.len(), tags.len());
        Sentence { tokens, tags }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Gold mentions (tags of well-formed corpora are legal, so this is
    /// exact; on illegal tags it applies the repair policy).
    pub fn mentions(&self) -> Vec<Mention> {
        decode_tags(&self.tags)
    }

    pub fn tag_ids(&self, scheme: &TagScheme) -> Vec<usize> {
        self.tags.iter().map(|&t| scheme.tag_to_id(t)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub scheme: TagScheme,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Gold mention lists, one per sentence.
    pub fn mention_lists(&self) -> Vec<Vec<Mention>> {
        self.sentences.iter().map(|s| s.mentions()).collect()
    }
}

/// Reads the tab-separated CoNLL format. Trailing blank lines are ignored.
pub fn read_conll(path: impl AsRef<Path>) -> Result<Corpus> {
    let text = std::fs::read_to_string(path)?;
    parse_conll(&text)
}

pub fn parse_conll(text: &str) -> Result<Corpus> {
    let mut scheme = TagScheme::new();
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            if !tokens.is_empty() {
                sentences.push(Sentence::new(
                    std::mem::take(&mut tokens),
                    std::mem::take(&mut tags),
                ));
            }
            continue;
        }
        let (token, tag_str) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("expected TOKEN<TAB>TAG, got {line:?}"),
        })?;
        if token.is_empty() {
            return Err(Error::Parse {
                line: lineno,
                message: "empty token".into(),
            });
        }
        let tag = scheme.intern_tag(tag_str).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        tokens.push(token.to_string());
        tags.push(tag);
    }
    if !tokens.is_empty() {
        sentences.push(Sentence::new(tokens, tags));
    }
    Ok(Corpus { sentences, scheme })
}

pub fn write_conll(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_conll(corpus))?;
    Ok(())
}

pub fn format_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        for (token, &tag) in s.tokens.iter().zip(&s.tags) {
            let _ = writeln!(out, "{}\t{}", token, corpus.scheme.format_tag(tag));
        }
        out.push('\n');
    }
    out
}

/// Re-expresses a corpus under another scheme (dev/test corpora must use
/// the training scheme's tag ids). Types unseen in the target scheme are
/// data errors.
pub fn remap_corpus(corpus: &Corpus, scheme: &TagScheme) -> Result<Corpus> {
    let sentences = corpus
        .sentences
        .iter()
        .map(|s| {
            let tags = s
                .tags
                .iter()
                .map(|&t| scheme.parse_tag(&corpus.scheme.format_tag(t)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Sentence::new(s.tokens.clone(), tags))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus {
        sentences,
        scheme: scheme.clone(),
    })
}

/// Frozen word-vector table. Vectors are never updated during training.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    order: Vec<String>,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            index: HashMap::new(),
            order: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Inserts a vector; on duplicate words the first occurrence wins.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Data(format!(
                "vector for {word:?} has length {}, table dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(word) {
            return Ok(());
        }
        self.index.insert(word.to_string(), self.order.len());
        self.order.push(word.to_string());
        self.vectors.extend_from_slice(&vector);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Index of a word under the same case-insensitive policy as [`Self::lookup`].
    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.index
            .get(word)
            .or_else(|| self.index.get(&word.to_lowercase()))
            .copied()
    }

    pub fn vector_by_index(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact lookup, then a case-insensitive fallback via the lowercased
    /// form. Returns None for true out-of-vocabulary words (callers
    /// substitute the learned UNK vector).
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.get(word).or_else(|| self.get(&word.to_lowercase()))
    }

    pub fn words(&self) -> &[String] {
        &self.order
    }
}

/// Loads the plain-text embedding format: `word v1 v2 … vdim` per line.
pub fn load_embeddings(path: impl AsRef<Path>, dim: usize) -> Result<EmbeddingTable> {
    let text = std::fs::read_to_string(path)?;
    parse_embeddings(&text, dim)
}

pub fn parse_embeddings(text: &str, dim: usize) -> Result<EmbeddingTable> {
    let mut table = EmbeddingTable::new(dim);
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().ok_or_else(|| Error::Parse {
            line: lineno,
            message: "empty line with whitespace".into(),
        })?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad number {p:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {dim} vector components, got {}", values.len()),
            });
        }
        table.insert(word, values)?;
    }
    Ok(table)
}

pub fn write_embeddings(table: &EmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for word in table.words() {
        let vec = table.get(word).expect("listed word present");
        out.push_str(word);
        for v in vec {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Word, character and tag inventories of a training corpus.
///
/// Word and character inventories are sorted, with PAD/UNK entries
/// appended after the sorted content; the tag inventory follows the
/// scheme's class-id layout.
#[derive(Debug, Clone)]
pub struct Vocab {
    pub words: Vec<String>,
    pub chars: Vec<char>,
    pub tags: Vec<String>,
    char_index: HashMap<char, usize>,
}

pub const PAD_WORD: &str = "<pad>";
pub const UNK_WORD: &str = "<unk>";

impl Vocab {
    /// Rows a character embedding table needs: seen chars plus PAD and UNK.
    pub fn char_rows(&self) -> usize {
        self.char_index.len() + 2
    }

    pub fn pad_char_id(&self) -> usize {
        self.char_index.len()
    }

    pub fn unk_char_id(&self) -> usize {
        self.char_index.len() + 1
    }

    pub fn char_id(&self, c: char) -> usize {
        self.char_index
            .get(&c)
            .copied()
            .unwrap_or_else(|| self.unk_char_id())
    }
}

/// Builds inventories from a corpus. Deterministic: both word and char
/// inventories are sorted before the specials are appended.
pub fn build_vocab(corpus: &Corpus) -> Result<Vocab> {
    if corpus.is_empty() {
        return Err(Error::Data("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut words: Vec<String> = corpus
        .sentences
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    words.sort();
    words.dedup();
    words.push(PAD_WORD.to_string());
    words.push(UNK_WORD.to_string());

    let mut chars: Vec<char> = corpus
        .sentences
        .iter()
        .flat_map(|s| s.tokens.iter())
        .flat_map(|t| t.chars())
        .collect();
    chars.sort();
    chars.dedup();
    let char_index: HashMap<char, usize> = chars.iter().enumerate().map(|(i, &c)| (c, i)).collect();

    let tags = (0..corpus.scheme.class_count())
        .map(|id| {
            corpus
                .scheme
                .id_to_tag(id)
                .map(|t| corpus.scheme.format_tag(t))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Vocab {
        words,
        chars,
        tags,
        char_index,
    })
}

// ── Synthetic corpora ───────────────────────────────────────────────

/// Which XOR test corpus to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XorVariant {
    /// Four natural-language phrases; the middle token forms the XOR.
    Phrase,
    /// Abstract words with single-token mentions (O S O vs O O O).
    Oso,
    /// Abstract words with whole-phrase mentions (B I E vs O O O).
    Bie,
}

impl XorVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "phrase" => Ok(XorVariant::Phrase),
            "oso" => Ok(XorVariant::Oso),
            "bie" => Ok(XorVariant::Bie),
            _ => Err(Error::Config(format!(
                "unknown xor variant {s:?} (expected phrase|oso|bie)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            XorVariant::Phrase => "phrase",
            XorVariant::Oso => "oso",
            XorVariant::Bie => "bie",
        }
    }
}

fn corpus_from_parts(ty_name: &str, parts: &[(&[&str], &[(usize, usize)])]) -> Corpus {
    let mut scheme = TagScheme::new();
    let ty = scheme.intern_type(ty_name);
    let sentences = parts
        .iter()
        .map(|(tokens, spans)| {
            let mentions: Vec<Mention> = spans.iter().map(|&(s, e)| Mention::new(s, e, ty)).collect();
            let tags = encode_mentions(tokens.len(), &mentions).expect("static spans are valid");
            Sentence::new(tokens.iter().map(|t| t.to_string()).collect(), tags)
        })
        .collect();
    Corpus { sentences, scheme }
}

/// The four phrases whose middle token forms an XOR: two multi-token
/// work-of-art mentions and two non-mentions sharing all their one-sided
/// contexts pairwise.
pub fn gen_xor_phrase_corpus() -> Corpus {
    corpus_from_parts(
        "work-of-art",
        &[
            (&["Key", "and", "Peele"], &[(0, 2)]),
            (&["You", "and", "I"], &[(0, 2)]),
            (&["Key", "and", "I"], &[]),
            (&["You", "and", "Peele"], &[]),
        ],
    )
}

/// Abstract five-word XOR corpora. The OSO variant tags the middle token
/// of the positive phrases as a sole mention; the BIE variant tags the
/// positive phrases as whole three-token mentions.
pub fn gen_xor_abstract_corpus(variant: XorVariant) -> Result<Corpus> {
    let pos: &[(usize, usize)] = match variant {
        XorVariant::Oso => &[(1, 1)],
        XorVariant::Bie => &[(0, 2)],
        XorVariant::Phrase => {
            return Err(Error::Config(
                "phrase variant is generated by gen_xor_phrase_corpus".into(),
            ))
        }
    };
    Ok(corpus_from_parts(
        "t",
        &[
            (&["a", "m", "c"], pos),
            (&["b", "m", "d"], pos),
            (&["a", "m", "d"], &[]),
            (&["b", "m", "c"], &[]),
        ],
    ))
}

pub fn gen_xor_corpus(variant: XorVariant) -> Corpus {
    match variant {
        XorVariant::Phrase => gen_xor_phrase_corpus(),
        v => gen_xor_abstract_corpus(v).expect("abstract variant"),
    }
}

/// Dense random word vectors for every distinct token of a corpus, in
/// first-appearance order. Deterministic in the seed.
pub fn random_embeddings(corpus: &Corpus, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = SeedStream::new(seed).rng("data/random-embeddings");
    let mut table = EmbeddingTable::new(dim);
    for s in &corpus.sentences {
        for token in &s.tokens {
            if table.get(token).is_none() {
                let vec: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                table.insert(token, vec).expect("fresh word");
            }
        }
    }
    table
}

/// One-hot-like orthogonal vectors: distinct basis positions with a
/// seeded random magnitude, so word identity is carried cleanly.
pub fn orthogonal_embeddings(corpus: &Corpus, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut rng = SeedStream::new(seed).rng("data/orthogonal-embeddings");
    let mut table = EmbeddingTable::new(dim);
    let mut next = 0usize;
    for s in &corpus.sentences {
        for token in &s.tokens {
            if table.get(token).is_none() {
                if next >= dim {
                    return Err(Error::Config(format!(
                        "orthogonal embeddings need dim >= vocabulary size, dim {dim} exhausted"
                    )));
                }
                let mut vec = vec![0.0; dim];
                vec[next] = rng.random_range(0.5..1.5);
                next += 1;
                table.insert(token, vec)?;
            }
        }
    }
    Ok(table)
}

/// Synthetic corpus for the entity-chunking ablation: mentions of lengths
/// 1–4 where every length-3 mention instantiates the XOR pattern, so the
/// Inside tokens cannot be resolved from one-sided context alone.
///
/// Per family: `pad a m c pad` and `pad b m d pad` carry a B I E mention;
/// `pad a m d pad` and `pad b m c pad` carry none. Additional sentences
/// contribute unambiguous mentions of lengths 1, 2 and 4.
pub fn gen_mention_ablation_corpus(families: usize) -> Corpus {
    let ty = "ent";
    let mut owned: Vec<(Vec<String>, Vec<(usize, usize)>)> = Vec::new();
    let pad_l = "the".to_string();
    let pad_r = "here".to_string();

    for f in 0..families {
        let (a, b, m, c, d) = (
            format!("a{f}"),
            format!("b{f}"),
            format!("m{f}"),
            format!("c{f}"),
            format!("d{f}"),
        );
        for (first, last, mention) in [
            (&a, &c, true),
            (&b, &d, true),
            (&a, &d, false),
            (&b, &c, false),
        ] {
            let tokens = vec![
                pad_l.clone(),
                first.clone(),
                m.clone(),
                last.clone(),
                pad_r.clone(),
            ];
            let spans = if mention { vec![(1usize, 3usize)] } else { vec![] };
            owned.push((tokens, spans));
        }
    }
    for j in 0..8 {
        owned.push((
            vec![pad_l.clone(), format!("s{j}"), pad_r.clone()],
            vec![(1, 1)],
        ));
    }
    for j in 0..8 {
        owned.push((
            vec![pad_l.clone(), format!("p{j}"), format!("q{j}"), pad_r.clone()],
            vec![(1, 2)],
        ));
    }
    for j in 0..6 {
        owned.push((
            vec![
                pad_l.clone(),
                format!("w{j}"),
                format!("x{j}"),
                format!("y{j}"),
                format!("z{j}"),
                pad_r.clone(),
            ],
            vec![(1, 4)],
        ));
    }
    for j in 0..4 {
        owned.push((vec![pad_l.clone(), format!("o{j}"), pad_r.clone()], vec![]));
    }

    let mut scheme = TagScheme::new();
    let ty_id = scheme.intern_type(ty);
    let sentences = owned
        .into_iter()
        .map(|(tokens, spans)| {
            let mentions: Vec<Mention> =
                spans.iter().map(|&(s, e)| Mention::new(s, e, ty_id)).collect();
            let tags = encode_mentions(tokens.len(), &mentions).expect("static spans are valid");
            Sentence::new(tokens, tags)
        })
        .collect();
    Corpus { sentences, scheme }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conll_round_trip_two_tokens() {
        let text = "Key\twork-of-art:B\nPeele\twork-of-art:E\n\n";
        let corpus = parse_conll(text).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(corpus.sentences[0].tokens, vec!["Key", "Peele"]);
        assert_eq!(format_conll(&corpus), text);
    }

    #[test]
    fn conll_empty_file_is_empty_corpus() {
        let corpus = parse_conll("").unwrap();
        assert!(corpus.is_empty());
        assert_eq!(corpus.scheme.type_count(), 0);
    }

    #[test]
    fn conll_malformed_line_reports_line_number() {
        let err = parse_conll("Key\twork-of-art:B\nbroken line\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn conll_unknown_chunk_letter_is_parse_error() {
        let err = parse_conll("Key\twork-of-art:Q\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn conll_mid_mention_inside_tag() {
        let text = "Key\twork-of-art:B\nand\twork-of-art:I\nPeele\twork-of-art:E\n\n";
        let corpus = parse_conll(text).unwrap();
        let expected = gen_xor_phrase_corpus();
        assert_eq!(corpus.sentences[0], expected.sentences[0]);
    }

    #[test]
    fn conll_trailing_blank_lines_ignored() {
        let corpus = parse_conll("a\tO\n\n\n\n").unwrap();
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn embeddings_parse_and_duplicate_policy() {
        let table = parse_embeddings("the 0.1 0.2\nthe 9.0 9.0\ncat 1.0 -1.0\n", 2).unwrap();
        assert_eq!(table.get("the").unwrap(), &[0.1, 0.2]);
        assert_eq!(table.get("cat").unwrap(), &[1.0, -1.0]);
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn embeddings_wrong_length_reports_line() {
        let err = parse_embeddings("the 0.1 0.2\nbad 1.0\n", 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn embeddings_case_insensitive_fallback() {
        let table = parse_embeddings("white 0.5 0.5\n", 2).unwrap();
        assert!(table.get("White").is_none());
        assert_eq!(table.lookup("White").unwrap(), &[0.5, 0.5]);
        assert!(table.lookup("zzz").is_none());
    }

    #[test]
    fn xor_phrase_corpus_matches_construction() {
        let corpus = gen_xor_phrase_corpus();
        assert_eq!(corpus.len(), 4);
        assert!(corpus.sentences.iter().all(|s| s.len() == 3));
        let middle: Vec<char> = corpus.sentences.iter().map(|s| s.tags[1].letter()).collect();
        assert_eq!(middle, vec!['I', 'I', 'O', 'O']);
        // Phrases 1 and 3 share their past context for the middle token.
        assert_eq!(corpus.sentences[0].tokens[..2], corpus.sentences[2].tokens[..2]);
    }

    #[test]
    fn xor_abstract_corpora() {
        let oso = gen_xor_abstract_corpus(XorVariant::Oso).unwrap();
        let letters: Vec<String> = oso
            .sentences
            .iter()
            .map(|s| s.tags.iter().map(|t| t.letter()).collect())
            .collect();
        assert_eq!(letters, vec!["OSO", "OSO", "OOO", "OOO"]);

        let bie = gen_xor_abstract_corpus(XorVariant::Bie).unwrap();
        let letters: Vec<String> = bie
            .sentences
            .iter()
            .map(|s| s.tags.iter().map(|t| t.letter()).collect())
            .collect();
        assert_eq!(letters, vec!["BIE", "BIE", "OOO", "OOO"]);

        let words: std::collections::BTreeSet<&str> = bie
            .sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(|t| t.as_str()))
            .collect();
        assert_eq!(words.len(), 5);
    }

    #[test]
    fn vocab_of_xor_phrase_corpus() {
        let corpus = gen_xor_phrase_corpus();
        let vocab = build_vocab(&corpus).unwrap();
        assert_eq!(vocab.words.len(), 5 + 2); // five words plus PAD/UNK
        assert_eq!(
            vocab.tags,
            vec![
                "O",
                "work-of-art:S",
                "work-of-art:B",
                "work-of-art:I",
                "work-of-art:E"
            ]
        );
        let again = build_vocab(&corpus).unwrap();
        assert_eq!(vocab.words, again.words);
        assert_eq!(vocab.chars, again.chars);
    }

    #[test]
    fn vocab_char_ids_cover_unknowns() {
        let corpus = gen_xor_phrase_corpus();
        let vocab = build_vocab(&corpus).unwrap();
        assert_eq!(vocab.char_id('\u{3042}'), vocab.unk_char_id());
        assert_ne!(vocab.char_id('K'), vocab.unk_char_id());
        assert_eq!(vocab.char_rows(), vocab.chars.len() + 2);
    }

    #[test]
    fn generators_deterministic() {
        let c = gen_xor_phrase_corpus();
        let e1 = random_embeddings(&c, 8, 42);
        let e2 = random_embeddings(&c, 8, 42);
        for w in e1.words() {
            assert_eq!(e1.get(w), e2.get(w));
        }
        let o1 = orthogonal_embeddings(&c, 8, 42).unwrap();
        // Orthogonality: distinct basis positions.
        let nonzero = |v: &[f64]| v.iter().position(|&x| x != 0.0).unwrap();
        let mut positions: Vec<usize> = o1.words().iter().map(|w| nonzero(o1.get(w).unwrap())).collect();
        positions.sort();
        positions.dedup();
        assert_eq!(positions.len(), 5);
    }

    #[test]
    fn ablation_corpus_shape() {
        let corpus = gen_mention_ablation_corpus(6);
        assert!(corpus.len() >= 50, "{} sentences", corpus.len());
        let lengths: std::collections::BTreeSet<usize> = corpus
            .mention_lists()
            .iter()
            .flatten()
            .map(|m| m.len())
            .collect();
        assert_eq!(lengths, [1, 2, 3, 4].into_iter().collect());
        // Every length-3 mention family is XOR-shaped: same middle word
        // appears with I and O gold tags.
        let s = &corpus.sentences;
        assert_eq!(s[0].tokens[2], s[2].tokens[2]);
        assert_eq!(s[0].tags[2].letter(), 'I');
        assert_eq!(s[2].tags[2].letter(), 'O');
    }

}
