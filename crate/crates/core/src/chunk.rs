//! OSBIE chunk tags, mention spans, and the conversions between them.
//!
//! A mention is a contiguous token span with one entity type. Tag sequences
//! encode mentions per token: a Sole token, or Begin / Inside / End of a
//! multi-token mention, with O for everything outside. Predicted sequences
//! may be illegal; [`decode_tags`] is total and applies a deterministic
//! repair policy so every sequence scores.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt;

/// Entity type id into a [`TagScheme`]'s inventory.
pub type TypeId = usize;

/// Chunk role of a token inside a mention, in tag-id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chunk {
    Sole,
    Begin,
    Inside,
    End,
}

impl Chunk {
    pub const ALL: [Chunk; 4] = [Chunk::Sole, Chunk::Begin, Chunk::Inside, Chunk::End];

    pub fn letter(self) -> char {
        match self {
            Chunk::Sole => 'S',
            Chunk::Begin => 'B',
            Chunk::Inside => 'I',
            Chunk::End => 'E',
        }
    }

    fn from_letter(c: char) -> Option<Chunk> {
        match c {
            'S' => Some(Chunk::Sole),
            'B' => Some(Chunk::Begin),
            'I' => Some(Chunk::Inside),
            'E' => Some(Chunk::End),
            _ => None,
        }
    }

    fn index(self) -> usize {
        match self {
            Chunk::Sole => 0,
            Chunk::Begin => 1,
            Chunk::Inside => 2,
            Chunk::End => 3,
        }
    }
}

/// Per-token label: outside, or a (type, chunk) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChunkTag {
    Outside,
    Typed { ty: TypeId, chunk: Chunk },
}

impl ChunkTag {
    pub fn typed(ty: TypeId, chunk: Chunk) -> Self {
        ChunkTag::Typed { ty, chunk }
    }

    /// Chunk letter with type erased; O for outside.
    pub fn letter(self) -> char {
        match self {
            ChunkTag::Outside => 'O',
            ChunkTag::Typed { chunk, .. } => chunk.letter(),
        }
    }
}

/// Entity mention: inclusive token span plus entity type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mention {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub ty: TypeId,
}

impl Mention {
    pub fn new(start: usize, end: usize, ty: TypeId) -> Self {
        Mention { start, end, ty }
    }

    /// Token count.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }
}

/// The label algebra for a fixed entity-type inventory.
///
/// Class ids are laid out as: id 0 = O, then for each type (in the order
/// types were interned) the four chunks S, B, I, E. With P types this
/// gives P×4+1 classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagScheme {
    types: Vec<String>,
    by_name: HashMap<String, TypeId>,
}

impl TagScheme {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_types<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let mut scheme = Self::new();
        for n in names {
            scheme.intern_type(&n.into());
        }
        scheme
    }

    /// Number of entity types P.
    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    /// d_p = P×4+1.
    pub fn class_count(&self) -> usize {
        self.types.len() * 4 + 1
    }

    pub fn type_name(&self, ty: TypeId) -> &str {
        &self.types[ty]
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).copied()
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn intern_type(&mut self, name: &str) -> TypeId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = self.types.len();
        self.types.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn tag_to_id(&self, tag: ChunkTag) -> usize {
        match tag {
            ChunkTag::Outside => 0,
            ChunkTag::Typed { ty, chunk } => 1 + ty * 4 + chunk.index(),
        }
    }

    pub fn id_to_tag(&self, id: usize) -> Result<ChunkTag> {
        if id == 0 {
            return Ok(ChunkTag::Outside);
        }
        let ty = (id - 1) / 4;
        if ty >= self.types.len() {
            return Err(Error::Data(format!(
                "tag id {id} out of range for {} classes",
                self.class_count()
            )));
        }
        Ok(ChunkTag::Typed {
            ty,
            chunk: Chunk::ALL[(id - 1) % 4],
        })
    }

    /// Parses the surface form "TYPE:CHUNK" or "O", interning new types.
    pub fn intern_tag(&mut self, s: &str) -> Result<ChunkTag> {
        if s == "O" {
            return Ok(ChunkTag::Outside);
        }
        let (ty_name, chunk_str) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::Data(format!("malformed tag {s:?}: expected TYPE:CHUNK or O")))?;
        let mut chars = chunk_str.chars();
        let chunk = match (chars.next().and_then(Chunk::from_letter), chars.next()) {
            (Some(c), None) => c,
            _ => {
                return Err(Error::Data(format!(
                    "unknown chunk letter {chunk_str:?} in tag {s:?}"
                )))
            }
        };
        if ty_name.is_empty() {
            return Err(Error::Data(format!("empty entity type in tag {s:?}")));
        }
        let ty = self.intern_type(ty_name);
        Ok(ChunkTag::Typed { ty, chunk })
    }

    /// Parses without interning; unknown types are data errors.
    pub fn parse_tag(&self, s: &str) -> Result<ChunkTag> {
        let mut probe = self.clone();
        let tag = probe.intern_tag(s)?;
        if probe.types.len() != self.types.len() {
            return Err(Error::Data(format!("unknown entity type in tag {s:?}")));
        }
        Ok(tag)
    }

    pub fn format_tag(&self, tag: ChunkTag) -> String {
        match tag {
            ChunkTag::Outside => "O".to_string(),
            ChunkTag::Typed { ty, chunk } => {
                format!("{}:{}", self.types[ty], chunk.letter())
            }
        }
    }
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O")?;
        for t in &self.types {
            for c in Chunk::ALL {
                write!(f, " {}:{}", t, c.letter())?;
            }
        }
        Ok(())
    }
}

/// Tags a sentence of length `n` from its mention list.
///
/// Length-1 mentions become S; longer ones B, I…, E. Mentions must be
/// in-range and non-overlapping.
pub fn encode_mentions(n: usize, mentions: &[Mention]) -> Result<Vec<ChunkTag>> {
    let mut sorted: Vec<&Mention> = mentions.iter().collect();
    sorted.sort_by_key(|m| (m.start, m.end));
    for w in sorted.windows(2) {
        if w[1].start <= w[0].end {
            return Err(Error::Data(format!(
                "overlapping mentions {:?} and {:?}",
                w[0], w[1]
            )));
        }
    }
    let mut tags = vec![ChunkTag::Outside; n];
    for m in mentions {
        if m.start > m.end || m.end >= n {
            return Err(Error::Data(format!(
                "mention {m:?} out of range for sentence length {n}"
            )));
        }
        if m.len() == 1 {
            tags[m.start] = ChunkTag::typed(m.ty, Chunk::Sole);
        } else {
            tags[m.start] = ChunkTag::typed(m.ty, Chunk::Begin);
            for i in m.start + 1..m.end {
                tags[i] = ChunkTag::typed(m.ty, Chunk::Inside);
            }
            tags[m.end] = ChunkTag::typed(m.ty, Chunk::End);
        }
    }
    Ok(tags)
}

/// Recovers mentions from any tag sequence, legal or not.
///
/// Legal sequences round-trip exactly. Illegal ones are repaired
/// deterministically: an I or E with no open mention opens one; a B, S or
/// O while a mention is open closes it at the previous token; a type
/// change inside a mention closes and reopens; an open mention at the end
/// of the sentence closes at the last token. A mention keeps the type of
/// its first token.
pub fn decode_tags(tags: &[ChunkTag]) -> Vec<Mention> {
    let mut mentions = Vec::new();
    let mut open: Option<(usize, TypeId)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        match tag {
            ChunkTag::Outside => {
                if let Some((start, ty)) = open.take() {
                    mentions.push(Mention::new(start, i - 1, ty));
                }
            }
            ChunkTag::Typed { ty, chunk } => match chunk {
                Chunk::Sole => {
                    if let Some((start, t)) = open.take() {
                        mentions.push(Mention::new(start, i - 1, t));
                    }
                    mentions.push(Mention::new(i, i, ty));
                }
                Chunk::Begin => {
                    if let Some((start, t)) = open.take() {
                        mentions.push(Mention::new(start, i - 1, t));
                    }
                    open = Some((i, ty));
                }
                Chunk::Inside => match open {
                    None => open = Some((i, ty)),
                    Some((_, t)) if t == ty => {}
                    Some((start, t)) => {
                        mentions.push(Mention::new(start, i - 1, t));
                        open = Some((i, ty));
                    }
                },
                Chunk::End => match open.take() {
                    None => mentions.push(Mention::new(i, i, ty)),
                    Some((start, t)) if t == ty => {
                        mentions.push(Mention::new(start, i, t));
                    }
                    Some((start, t)) => {
                        mentions.push(Mention::new(start, i - 1, t));
                        mentions.push(Mention::new(i, i, ty));
                    }
                },
            },
        }
    }
    if let Some((start, ty)) = open {
        mentions.push(Mention::new(start, tags.len() - 1, ty));
    }
    mentions
}

/// Indices that break the chunk adjacency rules: an I must follow B or I
/// and be followed by I or E of the same type; a B must be followed by I
/// or E of the same type; an E must follow B or I of the same type.
pub fn validate_tags(tags: &[ChunkTag]) -> Vec<usize> {
    let continues_from = |i: usize, ty: TypeId| -> bool {
        i > 0
            && matches!(tags[i - 1], ChunkTag::Typed { ty: t, chunk: Chunk::Begin | Chunk::Inside } if t == ty)
    };
    let continues_to = |i: usize, ty: TypeId| -> bool {
        i + 1 < tags.len()
            && matches!(tags[i + 1], ChunkTag::Typed { ty: t, chunk: Chunk::Inside | Chunk::End } if t == ty)
    };
    tags.iter()
        .enumerate()
        .filter_map(|(i, &tag)| match tag {
            ChunkTag::Outside | ChunkTag::Typed { chunk: Chunk::Sole, .. } => None,
            ChunkTag::Typed { ty, chunk: Chunk::Begin } => (!continues_to(i, ty)).then_some(i),
            ChunkTag::Typed { ty, chunk: Chunk::Inside } => {
                (!continues_from(i, ty) || !continues_to(i, ty)).then_some(i)
            }
            ChunkTag::Typed { ty, chunk: Chunk::End } => (!continues_from(i, ty)).then_some(i),
        })
        .collect()
}
