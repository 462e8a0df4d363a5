//! Seeded synthetic embeddings with planted relations, used by the tests and
//! benchmarks.
//!
//! Coordinates of the filler vocabulary are standard normal, so the noise
//! level is expressed in units of one coordinate's spread.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, Normal, StandardNormal};

use crate::embedding::WordEmbedding;
use crate::error::{Error, Result};
use crate::eval::{write_custom_tsv, DatasetOrigin, RelationDataset};
use crate::pair::WordPair;
use crate::rng::{StreamKey, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationShape {
    /// `t = s + r + noise` with one offset `r` per relation.
    Translation,
    /// `t = W s + noise` with a dense Gaussian `W` per relation.
    LinearMap,
    /// Sources and targets drawn independently and matched at random.
    Null,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub shape: RelationShape,
    pub dim: usize,
    /// Filler words not taking part in any relation.
    pub vocab: usize,
    pub relations: usize,
    pub pairs: usize,
    /// Standard deviation of the per-coordinate target noise.
    pub noise: f64,
    /// Standard deviation of source words around their relation's centre.
    pub spread: f64,
    /// Translation relations come in families of this many, sharing a base
    /// offset (like inflection variants of one morphological pattern).
    pub family_size: usize,
    /// Per-coordinate standard deviation of a relation's offset around its
    /// family's base offset.
    pub family_spread: f64,
    pub seed: u64,
}

impl BenchmarkSpec {
    fn base(shape: RelationShape, seed: u64) -> Self {
        BenchmarkSpec {
            shape,
            dim: 10,
            vocab: 1000,
            relations: 20,
            pairs: 50,
            noise: 0.05,
            spread: 0.6,
            family_size: 4,
            family_spread: 0.1,
            seed,
        }
    }

    pub fn translation(seed: u64) -> Self {
        Self::base(RelationShape::Translation, seed)
    }

    pub fn linear_map(seed: u64) -> Self {
        Self::base(RelationShape::LinearMap, seed)
    }

    pub fn null(seed: u64) -> Self {
        Self::base(RelationShape::Null, seed)
    }

    pub fn with_size(mut self, dim: usize, vocab: usize, relations: usize, pairs: usize) -> Self {
        self.dim = dim;
        self.vocab = vocab;
        self.relations = relations;
        self.pairs = pairs;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_spread(mut self, spread: f64) -> Self {
        self.spread = spread;
        self
    }

    pub fn with_families(mut self, size: usize, spread: f64) -> Self {
        self.family_size = size;
        self.family_spread = spread;
        self
    }

    pub fn generate(&self) -> Result<Fixture> {
        if self.dim == 0 || self.relations == 0 || self.pairs == 0 {
            return Err(Error::InvalidArgument("benchmark needs a positive dimension, relation count and pair count".into()));
        }
        if !(self.noise >= 0.0 && self.spread >= 0.0 && self.family_spread >= 0.0) {
            return Err(Error::InvalidArgument("noise and spread must be non-negative".into()));
        }
        if self.family_size == 0 {
            return Err(Error::InvalidArgument("family size must be positive".into()));
        }
        let m = self.dim;
        let root = StreamKey::new(self.seed);
        let mut rng = root.child("filler").rng();
        let mut entries: Vec<(String, Vec<f64>)> = (0..self.vocab)
            .map(|i| (format!("w{i:04}"), gaussian(&mut rng, m, 1.0)))
            .collect();

        let mut relations = Vec::with_capacity(self.relations);
        let mut offsets = Vec::with_capacity(self.relations);
        for r in 0..self.relations {
            let mut rng = root.child("relation").index(r as u64).rng();
            let name = format!("rel{r:02}");
            let centre = gaussian(&mut rng, m, 1.0);
            let sources: Vec<Vec<f64>> = (0..self.pairs)
                .map(|_| add(&centre, &gaussian(&mut rng, m, self.spread)))
                .collect();
            let targets: Vec<Vec<f64>> = match self.shape {
                RelationShape::Translation => {
                    let family = (r / self.family_size) as u64;
                    let base = gaussian(&mut root.child("family").index(family).rng(), m, 1.0);
                    let offset = add(&base, &gaussian(&mut rng, m, self.family_spread));
                    let t = sources
                        .iter()
                        .map(|s| add(&add(s, &offset), &gaussian(&mut rng, m, self.noise)))
                        .collect();
                    offsets.push(offset);
                    t
                }
                RelationShape::LinearMap => {
                    let scale = 1.0 / (m as f64).sqrt();
                    let w: Vec<Vec<f64>> = (0..m).map(|_| gaussian(&mut rng, m, scale)).collect();
                    sources
                        .iter()
                        .map(|s| {
                            let ws: Vec<f64> = w.iter().map(|row| dot(row, s)).collect();
                            add(&ws, &gaussian(&mut rng, m, self.noise))
                        })
                        .collect()
                }
                RelationShape::Null => {
                    let target_centre = gaussian(&mut rng, m, 1.0);
                    (0..self.pairs)
                        .map(|_| add(&target_centre, &gaussian(&mut rng, m, self.spread)))
                        .collect()
                }
            };
            let mut pairs = Vec::with_capacity(self.pairs);
            for (j, (s, t)) in sources.into_iter().zip(targets).enumerate() {
                let (sw, tw) = (format!("{name}_s{j:03}"), format!("{name}_t{j:03}"));
                entries.push((sw.clone(), s));
                entries.push((tw.clone(), t));
                pairs.push(WordPair::new(sw, tw));
            }
            relations.push(RelationDataset::new(name, pairs, DatasetOrigin::CustomTsv)?);
        }
        Ok(Fixture {
            embedding: WordEmbedding::from_entries(entries, false)?,
            relations,
            offsets,
        })
    }
}

/// A generated embedding plus its planted relations.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub embedding: WordEmbedding,
    pub relations: Vec<RelationDataset>,
    /// Per-relation offsets for translation benchmarks; empty otherwise.
    pub offsets: Vec<Vec<f64>>,
}

impl Fixture {
    /// Writes `embedding.txt` (glove-text) and `dataset.tsv` (custom TSV)
    /// into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let emb = dir.join("embedding.txt");
        let data = dir.join("dataset.tsv");
        self.embedding.save_glove(&emb)?;
        let mut w = BufWriter::new(File::create(&data)?);
        write_custom_tsv(&self.relations, &mut w)?;
        w.flush()?;
        Ok((emb, data))
    }
}

/// Small translation benchmark with 200 filler words.
pub fn translation_fixture(dim: usize, relations: usize, pairs: usize, seed: u64) -> Fixture {
    BenchmarkSpec::translation(seed)
        .with_size(dim, 200, relations, pairs)
        .generate()
        .expect("valid fixture parameters")
}

/// One translation relation whose sources vary mostly along a single axis,
/// like adjectives and their superlatives lined up by intensity.
pub fn superlative_fixture(pairs: usize, dim: usize, seed: u64) -> Fixture {
    let root = StreamKey::new(seed).child("superlative");
    let mut rng = root.rng();
    let mut entries: Vec<(String, Vec<f64>)> = (0..100)
        .map(|i| (format!("w{i:04}"), gaussian(&mut rng, dim, 1.0)))
        .collect();
    let axis = unit(&gaussian(&mut rng, dim, 1.0));
    let offset = gaussian(&mut rng, dim, 0.5);
    let intensity = Normal::new(0.0, 3.0).expect("valid normal");
    let mut rel = Vec::with_capacity(pairs);
    for j in 0..pairs {
        let a = intensity.sample(&mut rng);
        let s: Vec<f64> = add(&axis.iter().map(|x| a * x).collect::<Vec<_>>(), &gaussian(&mut rng, dim, 0.1));
        let t = add(&add(&s, &offset), &gaussian(&mut rng, dim, 0.05));
        entries.push((format!("adj{j:03}"), s));
        entries.push((format!("adj{j:03}est"), t));
        rel.push(WordPair::new(format!("adj{j:03}"), format!("adj{j:03}est")));
    }
    Fixture {
        embedding: WordEmbedding::from_entries(entries, false).expect("finite vectors"),
        relations: vec![RelationDataset::new("superlative", rel, DatasetOrigin::CustomTsv).expect("nonempty words")],
        offsets: vec![offset],
    }
}

fn gaussian(rng: &mut StreamRng, m: usize, sd: f64) -> Vec<f64> {
    (0..m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}
