//! Versioned checkpoint container.
//!
//! Layout: a text header (format line, config line, one directory line per
//! tensor) terminated by a `payload` line, followed by the raw
//! little-endian f32 payloads in directory order. Directory order is the
//! store's name order, so identical stores serialize to identical bytes.

use crate::error::{Error, Result};
use crate::model::{shape_map, Arch, Head, ModelConfig, Param, ParameterStore, Preset};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

const MAGIC: &str = "nerlab-checkpoint";
const VERSION: &str = "v1";

fn config_to_kv(config: &ModelConfig) -> String {
    format!(
        "arch={} head={} preset={} word_dim={} char_dim={} kernels_per_width={} lstm_dim={} attn_heads={} attn_dim={} n_types={} char_rows={}",
        config.arch.name(),
        config.head.name(),
        config.preset.name(),
        config.word_dim,
        config.char_dim,
        config.kernels_per_width,
        config.lstm_dim,
        config.attn_heads,
        config.attn_dim,
        config.n_types,
        config.char_rows,
    )
}

fn config_from_kv(line: &str) -> Result<ModelConfig> {
    let mut kv = BTreeMap::new();
    for part in line.split_whitespace() {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Data(format!("malformed config entry {part:?}")))?;
        kv.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| -> Result<&String> {
        kv.get(k)
            .ok_or_else(|| Error::Data(format!("checkpoint config missing {k:?}")))
    };
    let num = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| Error::Data(format!("bad numeric config {k:?}")))
    };
    Ok(ModelConfig {
        arch: Arch::parse(get("arch")?)?,
        head: Head::parse(get("head")?)?,
        preset: Preset::parse(get("preset")?)?,
        word_dim: num("word_dim")?,
        char_dim: num("char_dim")?,
        kernels_per_width: num("kernels_per_width")?,
        lstm_dim: num("lstm_dim")?,
        attn_heads: num("attn_heads")?,
        attn_dim: num("attn_dim")?,
        n_types: num("n_types")?,
        char_rows: num("char_rows")?,
    })
}

pub fn checkpoint_bytes(config: &ModelConfig, store: &ParameterStore<f32>) -> Vec<u8> {
    let mut header = String::new();
    let _ = writeln!(header, "{MAGIC} {VERSION}");
    let _ = writeln!(header, "config {}", config_to_kv(config));
    for (name, param) in store.iter() {
        let _ = writeln!(
            header,
            "tensor {name} {} {} {}",
            param.rows,
            param.cols,
            u8::from(param.trainable)
        );
    }
    header.push_str("payload\n");
    let mut bytes = header.into_bytes();
    for (_, param) in store.iter() {
        for v in &param.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    bytes
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    config: &ModelConfig,
    store: &ParameterStore<f32>,
) -> Result<()> {
    std::fs::write(path, checkpoint_bytes(config, store))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelConfig, ParameterStore<f32>)> {
    let bytes = std::fs::read(path)?;
    parse_checkpoint(&bytes)
}

/// Loads and additionally requires the stored config to match `expected`.
pub fn load_checkpoint_expecting(
    path: impl AsRef<Path>,
    expected: &ModelConfig,
) -> Result<(ModelConfig, ParameterStore<f32>)> {
    let (config, store) = load_checkpoint(path)?;
    if &config != expected {
        return Err(Error::CheckpointShape {
            name: "config".into(),
            file: config_to_kv(&config),
            expected: config_to_kv(expected),
        });
    }
    Ok((config, store))
}

pub fn parse_checkpoint(bytes: &[u8]) -> Result<(ModelConfig, ParameterStore<f32>)> {
    let marker = b"payload\n";
    let split = find_subslice(bytes, marker)
        .ok_or_else(|| Error::Data("checkpoint has no payload marker".into()))?;
    let header = std::str::from_utf8(&bytes[..split])
        .map_err(|_| Error::Data("checkpoint header is not UTF-8".into()))?;
    let payload = &bytes[split + marker.len()..];

    let mut lines = header.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Data("empty checkpoint".into()))?;
    let expected_first = format!("{MAGIC} {VERSION}");
    if first != expected_first {
        return Err(Error::CheckpointVersion {
            found: first.to_string(),
            supported: expected_first,
        });
    }

    let config_line = lines
        .next()
        .and_then(|l| l.strip_prefix("config "))
        .ok_or_else(|| Error::Data("checkpoint missing config line".into()))?;
    let config = config_from_kv(config_line)?;

    let mut directory: Vec<(String, usize, usize, bool)> = Vec::new();
    for line in lines {
        let rest = line
            .strip_prefix("tensor ")
            .ok_or_else(|| Error::Data(format!("unexpected header line {line:?}")))?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::Data(format!("malformed tensor line {line:?}")));
        }
        let rows: usize = parts[1]
            .parse()
            .map_err(|_| Error::Data(format!("bad rows in {line:?}")))?;
        let cols: usize = parts[2]
            .parse()
            .map_err(|_| Error::Data(format!("bad cols in {line:?}")))?;
        let trainable = parts[3] == "1";
        directory.push((parts[0].to_string(), rows, cols, trainable));
    }

    // The directory must agree with the shapes the config implies.
    let expected = shape_map(&config);
    if directory.len() != expected.len() {
        return Err(Error::CheckpointShape {
            name: "directory".into(),
            file: format!("{} tensors", directory.len()),
            expected: format!("{} tensors", expected.len()),
        });
    }
    for (name, rows, cols, _) in &directory {
        match expected.get(name) {
            Some(&(er, ec, _)) if er == *rows && ec == *cols => {}
            Some(&(er, ec, _)) => {
                return Err(Error::CheckpointShape {
                    name: name.clone(),
                    file: format!("{rows}x{cols}"),
                    expected: format!("{er}x{ec}"),
                })
            }
            None => {
                return Err(Error::CheckpointShape {
                    name: name.clone(),
                    file: format!("{rows}x{cols}"),
                    expected: "absent".into(),
                })
            }
        }
    }

    let total: usize = directory.iter().map(|(_, r, c, _)| r * c * 4).sum();
    if payload.len() != total {
        return Err(Error::CheckpointTruncated {
            expected: total,
            got: payload.len(),
        });
    }

    let mut store = ParameterStore::new();
    let mut offset = 0;
    for (name, rows, cols, trainable) in directory {
        let len = rows * cols;
        let values: Vec<f32> = payload[offset..offset + len * 4]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        offset += len * 4;
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
    Ok((config, store))
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack
        .windows(needle.len())
        .position(|w| w == needle)
}
