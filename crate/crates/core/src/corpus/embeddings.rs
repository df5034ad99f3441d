//! Precomputed document embeddings.
//!
//! Two on-disk forms are supported:
//!
//! * JSON lines, `{"id": "...", "vector": [..]}` per line.
//! * A binary sidecar: a 16-byte header (`LLEM` magic, `u32` dimension,
//!   `u64` row count, all little-endian) followed by row-major `f32` rows,
//!   with the ids one per line in an adjacent `<path>.ids` file.
//!
//! Files whose name ends in `.bin` are read as the binary form.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CorpusStore;
use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 4] = *b"LLEM";

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

#[derive(Deserialize)]
struct Row {
    id: String,
    vector: Vec<f32>,
}

#[derive(Serialize)]
struct RowRef<'a> {
    id: &'a str,
    vector: &'a [f32],
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingTable {
            dimension,
            ids: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: &[f32]) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                id,
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(id));
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.index
            .get(id)
            .map(|&row| &self.data[row * self.dimension..(row + 1) * self.dimension])
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Every id must name a document in `store`.
    pub fn check_against(&self, store: &CorpusStore) -> Result<()> {
        let known: std::collections::HashSet<&str> =
            store.documents().iter().map(|d| d.id.as_str()).collect();
        match self.ids.iter().find(|id| !known.contains(id.as_str())) {
            Some(id) => Err(Error::UnknownDocument(id.clone())),
            None => Ok(()),
        }
    }

    /// Reads one `{"id","vector"}` record per line. An `expected_dim` of 0
    /// takes the dimension from the first record.
    pub fn read_jsonl(path: impl AsRef<Path>, expected_dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table: Option<EmbeddingTable> = None;
        if expected_dim != 0 {
            table = Some(EmbeddingTable::new(expected_dim)?);
        }
        for (ix, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: ix + 1,
                message: e.to_string(),
            })?;
            let table = match table.as_mut() {
                Some(t) => t,
                None => table.insert(EmbeddingTable::new(row.vector.len())?),
            };
            table.insert(row.id, &row.vector)?;
        }
        match table {
            Some(t) => Ok(t),
            None => EmbeddingTable::new(1),
        }
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, row) in self.ids.iter().zip(self.data.chunks_exact(self.dimension)) {
            serde_json::to_writer(&mut out, &RowRef { id, vector: row })?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    fn ids_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".ids");
        PathBuf::from(s)
    }

    pub fn read_binary(path: impl AsRef<Path>, expected_dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let bad = |message: String| Error::Parse {
            path: path.to_owned(),
            line: 0,
            message,
        };
        let mut reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let mut header = [0u8; 16];
        reader
            .read_exact(&mut header)
            .map_err(|e| Error::io(path, e))?;
        if header[..4] != BINARY_MAGIC {
            return Err(bad("bad magic".into()));
        }
        let dim = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        let rows = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        if expected_dim != 0 && dim != expected_dim {
            return Err(Error::DimensionMismatch {
                id: path.display().to_string(),
                expected: expected_dim,
                found: dim,
            });
        }

        let ids_path = Self::ids_path(path);
        let ids_file = File::open(&ids_path).map_err(|e| Error::io(&ids_path, e))?;
        let ids: Vec<String> = BufReader::new(ids_file)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(&ids_path, e))?;
        let ids: Vec<String> = ids.into_iter().filter(|l| !l.is_empty()).collect();
        if ids.len() != rows {
            return Err(bad(format!(
                "header declares {rows} rows but the id index lists {}",
                ids.len()
            )));
        }

        let mut table = EmbeddingTable::new(dim)?;
        let mut buf = vec![0u8; dim * 4];
        let mut row = vec![0f32; dim];
        for id in ids {
            reader.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
            for (v, b) in row.iter_mut().zip(buf.chunks_exact(4)) {
                *v = f32::from_le_bytes(b.try_into().unwrap());
            }
            table.insert(id, &row)?;
        }
        Ok(table)
    }

    /// Writes `path` and its `.ids` sidecar.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| Error::io(path, e);
        let mut out = BufWriter::new(File::create(path).map_err(io)?);
        out.write_all(&BINARY_MAGIC).map_err(io)?;
        out.write_all(&(self.dimension as u32).to_le_bytes()).map_err(io)?;
        out.write_all(&(self.ids.len() as u64).to_le_bytes()).map_err(io)?;
        for v in &self.data {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        out.flush().map_err(io)?;

        let ids_path = Self::ids_path(path);
        let mut ids = BufWriter::new(File::create(&ids_path).map_err(|e| Error::io(&ids_path, e))?);
        for id in &self.ids {
            writeln!(ids, "{id}").map_err(|e| Error::io(&ids_path, e))?;
        }
        ids.flush().map_err(|e| Error::io(&ids_path, e))?;
        Ok(())
    }
}

/// Loads embeddings (JSON lines, or binary when the name ends in `.bin`) and
/// checks every id against `store`. `expected_dim` 0 accepts any dimension.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    expected_dim: usize,
    store: &CorpusStore,
) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let table = if path.extension().is_some_and(|e| e == "bin") {
        EmbeddingTable::read_binary(path, expected_dim)?
    } else {
        EmbeddingTable::read_jsonl(path, expected_dim)?
    };
    table.check_against(store)?;
    Ok(table)
}
