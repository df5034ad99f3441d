//! Synthetic corpora with a planted science-to-industry lag.
//!
//! Every topic gets a positive bounded random-walk intensity over the first
//! `span - lag` years and none afterwards. Science documents are drawn from
//! those intensities; industry documents for year `t` mirror the science
//! documents of year `t - lag` (same topics, dollar weight increasing in the
//! citation count). With zero noise every frequency and impact signal of the
//! industry corpus is therefore an exact forward shift of the science one.
//! Noise perturbs the industry counts; the surplus documents are fresh draws
//! from a separate random stream.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::corpus::{write_documents, Corpus, CorpusStore, Document, EmbeddingTable, YearRange};
use crate::error::{Error, Result};
use crate::taxonomy::{Taxonomy, TopicNode, MAX_DEPTH};

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.3 ChaCha8Rng::seed_from_u64; stream 0 structure, stream 1 noise)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_root_topics: usize,
    pub branching: usize,
    pub depth: usize,
    /// Breadth-first cap on the tree size.
    pub n_topics: Option<usize>,
    pub years: YearRange,
    pub planted_lag: usize,
    pub noise_level: f64,
    pub docs_per_topic_year: usize,
    pub embedding_dim: usize,
    pub cluster_drift: f64,
    /// Probability that a document carries one extra random topic.
    pub extra_topic_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 42,
            n_root_topics: 8,
            branching: 5,
            depth: 3,
            n_topics: Some(200),
            years: YearRange::DEFAULT,
            planted_lag: 3,
            noise_level: 0.0,
            docs_per_topic_year: 4,
            embedding_dim: 16,
            cluster_drift: 0.5,
            extra_topic_rate: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.planted_lag >= self.years.len() {
            return bad(format!(
                "planted lag {} must be shorter than the {}-year span",
                self.planted_lag,
                self.years.len()
            ));
        }
        if self.n_root_topics == 0 || self.depth == 0 || self.docs_per_topic_year == 0 {
            return bad("root count, depth and documents per topic-year must be positive".into());
        }
        if self.depth > 1 && self.branching == 0 {
            return bad("branching must be positive for trees deeper than 1".into());
        }
        if self.depth > MAX_DEPTH {
            return bad(format!("depth {} exceeds {MAX_DEPTH}", self.depth));
        }
        if self.n_topics == Some(0) {
            return bad("n_topics must be positive".into());
        }
        if self.embedding_dim < 2 {
            return bad("embedding dimension must be at least 2".into());
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return bad(format!("noise level {} must be finite and >= 0", self.noise_level));
        }
        if !(self.cluster_drift >= 0.0 && self.cluster_drift.is_finite()) {
            return bad(format!("cluster drift {} must be finite and >= 0", self.cluster_drift));
        }
        if !(0.0..=1.0).contains(&self.extra_topic_rate) {
            return bad(format!("extra topic rate {} outside [0, 1]", self.extra_topic_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTruth {
    pub id: String,
    pub depth: usize,
    pub true_lag: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub generator: String,
    pub rng: String,
    pub config: SynthConfig,
    pub topics: usize,
    pub science_documents: usize,
    pub industry_documents: usize,
    pub embeddings: usize,
    pub truth: Vec<TopicTruth>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub taxonomy: Taxonomy,
    pub documents: Vec<Document>,
    pub embeddings: EmbeddingTable,
    pub manifest: SynthManifest,
}

pub const TAXONOMY_FILE: &str = "taxonomy.jsonl";
pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const EMBEDDINGS_FILE: &str = "embeddings.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

impl SynthOutput {
    pub fn store(&self) -> CorpusStore {
        CorpusStore::from_documents(self.manifest.config.years, self.documents.clone())
    }

    /// Writes the taxonomy, documents, embeddings and manifest into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let create = |name: &str| -> Result<(BufWriter<File>, std::path::PathBuf)> {
            let path = dir.join(name);
            let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
            Ok((BufWriter::new(f), path))
        };
        let (mut w, p) = create(TAXONOMY_FILE)?;
        self.taxonomy.write(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&p, e))?;
        let (mut w, p) = create(DOCUMENTS_FILE)?;
        write_documents(&self.documents, &mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&p, e))?;
        let (mut w, p) = create(EMBEDDINGS_FILE)?;
        self.embeddings
            .write_jsonl(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&p, e))?;
        let (mut w, p) = create(MANIFEST_FILE)?;
        serde_json::to_writer_pretty(&mut w, &self.manifest)
            .map_err(std::io::Error::from)
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&p, e))?;
        Ok(())
    }
}

struct Draws(ChaCha8Rng);

impl Draws {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Draws(rng)
    }

    /// Uniform on [0, 1) with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Standard normal via Box-Muller (one value per call).
    fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Integer citation count with a Pareto(1.5) tail.
    fn citations(&mut self) -> f64 {
        let u = 1.0 - self.uniform();
        (u.powf(-1.0 / 1.5).floor() - 1.0).min(1e6)
    }
}

fn count_for(intensity: f64, per_topic_year: usize) -> usize {
    if intensity <= 0.0 {
        0
    } else {
        ((per_topic_year as f64 * intensity).round() as usize).max(1)
    }
}

fn build_tree(config: &SynthConfig) -> Vec<(TopicNode, usize)> {
    let cap = config.n_topics.unwrap_or(usize::MAX);
    let mut out: Vec<(TopicNode, usize)> = Vec::new();
    let mut level: Vec<String> = (0..config.n_root_topics).map(|r| format!("R{:03}", r + 1)).collect();
    for depth in 1..=config.depth {
        let mut next = Vec::new();
        for tn in &level {
            if out.len() >= cap {
                break;
            }
            let ix = out.len() + 1;
            out.push((
                TopicNode {
                    id: format!("T{ix:05}"),
                    label: format!("Synthetic topic {ix}"),
                    tree_numbers: vec![tn.clone()],
                },
                depth,
            ));
            next.extend((0..config.branching).map(|c| format!("{tn}.{:03}", c + 1)));
        }
        level = next;
    }
    out
}

struct Centroids {
    base: Vec<Vec<f64>>,
    direction: Vec<Vec<f64>>,
    drift: f64,
}

impl Centroids {
    fn draw(topics: usize, dim: usize, drift: f64, rng: &mut Draws) -> Self {
        let mut base = Vec::with_capacity(topics);
        let mut direction = Vec::with_capacity(topics);
        for _ in 0..topics {
            base.push((0..dim).map(|_| 2.0 * rng.normal()).collect());
            let d: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
            direction.push(d.into_iter().map(|x| x / norm).collect());
        }
        Centroids { base, direction, drift }
    }

    /// Science centroid of topic `k` at year offset `t` (may be negative).
    fn at(&self, k: usize, t: i64) -> Vec<f64> {
        self.base[k]
            .iter()
            .zip(&self.direction[k])
            .map(|(b, d)| b + self.drift * t as f64 * d)
            .collect()
    }
}

fn embed(centroid: &[f64], rng: &mut Draws) -> Vec<f32> {
    centroid.iter().map(|c| (c + 0.5 * rng.normal()) as f32).collect()
}

fn topic_set(own: usize, n: usize, rate: f64, ids: &[String], rng: &mut Draws) -> Vec<String> {
    let mut topics = vec![ids[own].clone()];
    if n > 1 && rng.uniform() < rate {
        let mut other = rng.below(n - 1);
        if other >= own {
            other += 1;
        }
        topics.push(ids[other].clone());
    }
    topics.sort();
    topics
}

fn dollars(citations: f64) -> f64 {
    50_000.0 * (1.0 + citations)
}

/// Generates a corpus; a pure function of `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.check()?;
    let mut rng = Draws::new(config.seed, 0);
    let mut noise = Draws::new(config.seed, 1);

    let tree = build_tree(config);
    let n = tree.len();
    let ids: Vec<String> = tree.iter().map(|(node, _)| node.id.clone()).collect();
    let span = config.years.len();
    let lag = config.planted_lag;
    let active = span - lag;

    // bounded random walk per topic, positive on the active years
    let intensity: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut x = 0.2 + 0.8 * rng.uniform();
            (0..active)
                .map(|t| {
                    if t > 0 {
                        x = (x + 0.3 * rng.normal()).clamp(0.1, 1.0);
                    }
                    x
                })
                .collect()
        })
        .collect();
    let centroids = Centroids::draw(n, config.embedding_dim, config.cluster_drift, &mut rng);

    let mut embeddings = EmbeddingTable::new(config.embedding_dim)?;
    // science[k][t]: indices into `documents`
    let mut science: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); active]; n];
    let mut documents = Vec::new();
    for t in 0..active {
        let year = config.years.start + t as i32;
        for k in 0..n {
            let centroid = centroids.at(k, t as i64);
            for i in 0..count_for(intensity[k][t], config.docs_per_topic_year) {
                let id = format!("S{year}-{}-{i:04}", ids[k]);
                let doc = Document {
                    id: id.clone(),
                    corpus: Corpus::Science,
                    year,
                    topics: topic_set(k, n, config.extra_topic_rate, &ids, &mut rng),
                    weight: rng.citations(),
                };
                embeddings.insert(id, &embed(&centroid, &mut rng))?;
                science[k][t].push(documents.len());
                documents.push(doc);
            }
        }
    }
    let science_documents = documents.len();

    for k in 0..n {
        let before = documents.len();
        for t in 0..span {
            let year = config.years.start + t as i32;
            let src = t.checked_sub(lag).filter(|&s| s < active);
            // noise perturbs the shifted intensity; years with no source stay empty
            let x = match src {
                Some(s) if config.noise_level > 0.0 => intensity[k][s] + config.noise_level * noise.normal(),
                Some(s) => intensity[k][s],
                None => 0.0,
            };
            let want = count_for(x, config.docs_per_topic_year);
            let centroid = centroids.at(k, t as i64 - lag as i64);
            let mirrors: &[usize] = src.map_or(&[], |s| &science[k][s]);
            for i in 0..want {
                let id = format!("I{year}-{}-{i:04}", ids[k]);
                let (topics, weight, vector) = match mirrors.get(i) {
                    Some(&d) => {
                        let origin = &documents[d];
                        (origin.topics.clone(), dollars(origin.weight), embed(&centroid, &mut rng))
                    }
                    None => (
                        topic_set(k, n, config.extra_topic_rate, &ids, &mut noise),
                        dollars(noise.citations()),
                        embed(&centroid, &mut noise),
                    ),
                };
                embeddings.insert(id.clone(), &vector)?;
                documents.push(Document {
                    id,
                    corpus: Corpus::Industry,
                    year,
                    topics,
                    weight,
                });
            }
        }
        if documents.len() == before {
            // every topic appears in industry at least once
            let (s, &d) = science[k]
                .iter()
                .enumerate()
                .find_map(|(s, docs)| docs.first().map(|d| (s, d)))
                .expect("active years always produce science documents");
            let t = (s + lag).min(span - 1);
            let year = config.years.start + t as i32;
            let id = format!("I{year}-{}-{:04}", ids[k], 0);
            let origin = &documents[d];
            let doc = Document {
                id: id.clone(),
                corpus: Corpus::Industry,
                year,
                topics: origin.topics.clone(),
                weight: dollars(origin.weight),
            };
            embeddings.insert(id, &embed(&centroids.at(k, s as i64), &mut noise))?;
            documents.push(doc);
        }
    }

    let truth = tree
        .iter()
        .map(|(node, depth)| TopicTruth {
            id: node.id.clone(),
            depth: *depth,
            true_lag: lag,
        })
        .collect();
    let taxonomy = Taxonomy::from_nodes(tree.into_iter().map(|(node, _)| node).collect())?;
    let manifest = SynthManifest {
        generator: format!("leadlag-core {} synth", env!("CARGO_PKG_VERSION")),
        rng: RNG_NAME.into(),
        config: config.clone(),
        topics: n,
        science_documents,
        industry_documents: documents.len() - science_documents,
        embeddings: embeddings.len(),
        truth,
    };
    Ok(SynthOutput {
        taxonomy,
        documents,
        embeddings,
        manifest,
    })
}
