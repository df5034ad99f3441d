//! Lead-lag analytics between a science and an industry corpus of
//! topic-annotated, timestamped documents.
//!
//! The pipeline: load documents and a hierarchical taxonomy ([`corpus`],
//! [`taxonomy`]), build yearly frequency and impact signals per topic
//! ([`signals`]), measure lead-lag association and Granger causality
//! ([`trend`]), compare the two corpora in embedding space ([`content`]),
//! and summarize across taxonomy depths and sliding windows
//! ([`hierarchy`]). [`synth`] generates corpora with a known planted lag.

pub mod analysis;
pub mod content;
pub mod corpus;
pub mod error;
pub mod export;
pub mod hierarchy;
pub mod linalg;
pub mod signals;
pub mod synth;
pub mod taxonomy;
pub mod trend;

pub use analysis::{
    analyze_subject, analyze_subjects, analyze_topics, pair_pipeline, window_matrix, window_signal, AnalysisConfig,
    AnalysisInputs, ContentStatus, PairAnalysis, SubjectRecord,
};
pub use content::{
    fit_projection, hellinger, similarity_matrix, smooth_and_normalize, triangular_ratio, tvd, BoundsMode,
    ContentConfig, DensityGrid, Metric, PointSource, Projection, ProjectionMode, SimilarityMatrix, TrResult,
};
pub use corpus::{load_documents, load_embeddings, Corpus, CorpusStore, Document, EmbeddingTable, YearRange};
pub use error::{Error, Result};
pub use hierarchy::{depth_sweep, top_level_lag_summary, DepthSummary, SummaryMetric, TopLevelLagSummary};
pub use signals::{
    frequency_signal, impact_signal, minmax, ImpactBasis, LabeledCorpus, QuartileQuantizer, Representation, Subject,
    TopicSignal,
};
pub use synth::{generate, SynthConfig, SynthManifest, SynthOutput};
pub use taxonomy::{load_taxonomy, pareto_pairs, Taxonomy, TopicNode, TopicPair};
pub use trend::{ccauc, cross_correlate, cross_correlation, granger, CcaucResult, CrossCorrelation, GrangerResult};
