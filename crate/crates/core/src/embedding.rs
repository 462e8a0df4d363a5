//! Word embeddings loaded from text formats, plus the vocabulary-wide
//! Gaussian used as the background density `f(p)`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// `count dim` header line, then glove-text rows.
    Word2VecText,
    /// `word v1 ... vm` rows.
    GloveText,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec-text" | "word2vec" => Ok(EmbeddingFormat::Word2VecText),
            "glove-text" | "glove" => Ok(EmbeddingFormat::GloveText),
            other => Err(Error::InvalidArgument(format!(
                "unknown embedding format `{other}` (expected word2vec-text or glove-text)"
            ))),
        }
    }
}

/// Multivariate normal fitted to every vector in the vocabulary.
///
/// The covariance is the unbiased sample covariance plus `lambda * I`, with
/// `lambda = 1e-6 * trace(cov) / m`.
#[derive(Debug, Clone)]
pub struct BackgroundGaussian {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
    log_normalizer: f64,
    lambda: f64,
}

impl BackgroundGaussian {
    /// Fits the background from `n` row-major vectors of dimension `dim`.
    pub fn fit(rows: &[f64], dim: usize) -> Result<Self> {
        let n = rows.len() / dim;
        if n < 2 {
            return Err(Error::InsufficientData(format!(
                "background Gaussian needs at least 2 vectors, got {n}"
            )));
        }
        let mut mean = DVector::zeros(dim);
        for row in rows.chunks_exact(dim) {
            for (acc, x) in mean.iter_mut().zip(row) {
                *acc += x;
            }
        }
        mean /= n as f64;

        // accumulate the centered cross-product in blocks so large
        // vocabularies go through matrix multiplication
        const BLOCK: usize = 4096;
        let mut scatter = DMatrix::<f64>::zeros(dim, dim);
        for chunk in rows.chunks(BLOCK * dim) {
            let r = chunk.len() / dim;
            let mut centered = DMatrix::from_row_slice(r, dim, chunk);
            for mut row in centered.row_iter_mut() {
                row -= mean.transpose();
            }
            scatter.gemm_tr(1.0, &centered, &centered, 1.0);
        }
        let mut covariance = scatter / (n as f64 - 1.0);
        // exact symmetry
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (covariance[(i, j)] + covariance[(j, i)]);
                covariance[(i, j)] = v;
                covariance[(j, i)] = v;
            }
        }
        let trace = covariance.trace();
        let mut lambda = 1e-6 * trace / dim as f64;
        if lambda <= 0.0 || !lambda.is_finite() {
            lambda = 1e-12;
        }
        for i in 0..dim {
            covariance[(i, i)] += lambda;
        }
        let cholesky = Cholesky::new(covariance.clone()).ok_or_else(|| {
            Error::Numerical("background covariance is not positive definite".into())
        })?;
        let log_det: f64 = 2.0 * cholesky.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let log_normalizer = -0.5 * (dim as f64 * LN_2PI + log_det);
        Ok(BackgroundGaussian {
            mean,
            covariance,
            cholesky,
            log_normalizer,
            lambda,
        })
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Regularized covariance.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn logpdf(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.mean.len(), "vector dimension mismatch");
        let diff = DVector::from_iterator(v.len(), v.iter().zip(self.mean.iter()).map(|(a, b)| a - b));
        let l = self.cholesky.l_dirty();
        let z = l
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        self.log_normalizer - 0.5 * z.norm_squared()
    }
}

/// Vocabulary of `m`-dimensional word vectors.
///
/// Immutable once built; every constructor refits the background Gaussian.
#[derive(Debug, Clone)]
pub struct WordEmbedding {
    dim: usize,
    case_fold: bool,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    background: BackgroundGaussian,
}

impl WordEmbedding {
    /// Builds an embedding from `(word, vector)` entries.
    ///
    /// With `case_fold`, words are lowercased and the first occurrence of a
    /// folded word wins; exact duplicates are resolved the same way.
    pub fn from_entries<I>(entries: I, case_fold: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut dim = None;
        let mut words = Vec::new();
        let mut index = HashMap::new();
        let mut vectors = Vec::new();
        for (i, (word, vector)) in entries.into_iter().enumerate() {
            let m = *dim.get_or_insert(vector.len());
            if vector.len() != m || m == 0 {
                return Err(Error::InvalidArgument(format!(
                    "entry {} (`{word}`) has {} coordinates, expected {m}",
                    i + 1,
                    vector.len()
                )));
            }
            if let Some(x) = vector.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "entry {} (`{word}`) has non-finite value {x}",
                    i + 1
                )));
            }
            let key = fold(&word, case_fold);
            if index.contains_key(&key) {
                continue;
            }
            index.insert(key.clone(), words.len());
            words.push(key);
            vectors.extend_from_slice(&vector);
        }
        let dim = dim.ok_or_else(|| Error::InsufficientData("embedding has no entries".into()))?;
        let background = BackgroundGaussian::fit(&vectors, dim)?;
        Ok(WordEmbedding {
            dim,
            case_fold,
            words,
            index,
            vectors,
            background,
        })
    }

    pub fn load(path: impl AsRef<Path>, format: EmbeddingFormat, case_fold: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path)?;
        Self::read(BufReader::new(file), path, format, case_fold)
    }

    /// Parses an embedding from a reader; `origin` is only used in errors.
    pub fn read<R: BufRead>(
        reader: R,
        origin: &Path,
        format: EmbeddingFormat,
        case_fold: bool,
    ) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let mut dim: Option<usize> = None;
        let mut declared_count = None;

        if format == EmbeddingFormat::Word2VecText {
            let (_, header) = loop {
                match lines.next() {
                    Some((i, line)) => {
                        let line = line?;
                        if !line.trim().is_empty() {
                            break (i, line);
                        }
                    }
                    None => return Err(Error::Empty(origin.to_path_buf())),
                }
            };
            let fields: Vec<&str> = header.split_ascii_whitespace().collect();
            let parsed: Option<(usize, usize)> = match fields.as_slice() {
                [count, d] => count.parse().ok().zip(d.parse().ok()),
                _ => None,
            };
            let (count, d) = parsed.ok_or_else(|| {
                parse_err(1, format!("expected word2vec header `count dim`, got `{header}`"))
            })?;
            if d == 0 {
                return Err(parse_err(1, "dimension must be positive".into()));
            }
            dim = Some(d);
            declared_count = Some(count);
        }

        let mut entries = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields.next().expect("line is not blank");
            let values: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| parse_err(line_no, format!("cannot parse `{f}` as a number")))
                })
                .collect::<Result<_>>()?;
            let m = *dim.get_or_insert(values.len());
            if m == 0 {
                return Err(parse_err(line_no, format!("`{word}` has no coordinates")));
            }
            if values.len() != m {
                return Err(parse_err(
                    line_no,
                    format!("`{word}` has {} values, expected {m}", values.len()),
                ));
            }
            if let Some(x) = values.iter().find(|x| !x.is_finite()) {
                return Err(parse_err(line_no, format!("non-finite value {x} for `{word}`")));
            }
            entries.push((word.to_string(), values));
        }
        if entries.is_empty() {
            return Err(Error::Empty(origin.to_path_buf()));
        }
        if let Some(count) = declared_count {
            if count != entries.len() {
                log::warn!(
                    "{}: header declares {count} words but {} rows were read",
                    origin.display(),
                    entries.len()
                );
            }
        }
        Self::from_entries(entries, case_fold).map_err(|e| match e {
            Error::InsufficientData(msg) => Error::InsufficientData(format!("{}: {msg}", origin.display())),
            other => other,
        })
    }

    /// Writes glove-text rows with 17 significant digits per value.
    pub fn write_glove<W: Write>(&self, mut w: W) -> Result<()> {
        for (word, v) in self.iter() {
            write!(w, "{word}")?;
            for x in v {
                write!(w, " {x:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save_glove(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_glove(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Keeps only the first `n` words (file order) and refits the background.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        let entries = (0..n).map(|i| (self.words[i].clone(), self.vector(i).to_vec()));
        Self::from_entries(entries, self.case_fold)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn case_fold(&self) -> bool {
        self.case_fold
    }

    pub fn background(&self) -> &BackgroundGaussian {
        &self.background
    }

    /// Applies the embedding's case-folding rule to a query word.
    pub fn normalize(&self, word: &str) -> String {
        fold(word, self.case_fold)
    }

    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        let i = if self.case_fold {
            *self.index.get(&word.to_lowercase())?
        } else {
            *self.index.get(word)?
        };
        Some(self.vector(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.vectors.chunks_exact(self.dim))
    }

    /// `log f(v)` under the background Gaussian.
    pub fn background_logpdf(&self, v: &[f64]) -> f64 {
        self.background.logpdf(v)
    }

    /// Looks up every word, returning the missing ones on failure.
    pub fn lookup_all<'a, I>(&self, words: I) -> Result<Vec<&[f64]>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut found = Vec::new();
        let mut missing = Vec::new();
        for w in words {
            match self.lookup(w) {
                Some(v) => found.push(v),
                None => {
                    if !missing.iter().any(|m: &String| m == w) {
                        missing.push(w.to_string());
                    }
                }
            }
        }
        if missing.is_empty() {
            Ok(found)
        } else {
            Err(Error::OutOfVocabulary(missing))
        }
    }
}

fn fold(word: &str, case_fold: bool) -> String {
    if case_fold {
        word.to_lowercase()
    } else {
        word.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, format: EmbeddingFormat, case_fold: bool) -> Result<WordEmbedding> {
        WordEmbedding::read(text.as_bytes(), Path::new("mem.txt"), format, case_fold)
    }

    #[test]
    fn glove_two_lines() {
        let emb = read("a 1 0\nb 0 1\n", EmbeddingFormat::GloveText, false).unwrap();
        assert_eq!(emb.dim(), 2);
        assert_eq!(emb.background().mean().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn word2vec_row_with_extra_value() {
        let err = read("3 4\na 1 2 3 4\nb 1 2 3 4 5\nc 0 0 0 0\n", EmbeddingFormat::Word2VecText, false)
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn glove_dimension_mismatch_names_line() {
        let err = read("a 1 0\nb 0 1\nc 1\n", EmbeddingFormat::GloveText, false).unwrap_err();
        assert!(err.to_string().contains(":3:"), "{err}");
    }

    #[test]
    fn empty_and_non_finite_rejected() {
        assert!(matches!(read("", EmbeddingFormat::GloveText, false), Err(Error::Empty(_))));
        assert!(matches!(read("\n\n", EmbeddingFormat::Word2VecText, false), Err(Error::Empty(_))));
        let err = read("a 1 NaN\nb 0 1\n", EmbeddingFormat::GloveText, false).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
        assert!(read("a 1 inf\nb 0 1\n", EmbeddingFormat::GloveText, false).is_err());
    }

    #[test]
    fn case_fold_keeps_first_row() {
        let emb = read("Dog 1 2\ndog 3 4\ncat 0 0\n", EmbeddingFormat::GloveText, true).unwrap();
        assert_eq!(emb.len(), 2);
        assert_eq!(emb.lookup("dog"), Some(&[1.0, 2.0][..]));
        assert_eq!(emb.lookup("DOG"), Some(&[1.0, 2.0][..]));
        let exact = read("Dog 1 2\ndog 3 4\ncat 0 0\n", EmbeddingFormat::GloveText, false).unwrap();
        assert_eq!(exact.len(), 3);
        assert_eq!(exact.lookup("Dog"), Some(&[1.0, 2.0][..]));
        assert_eq!(exact.lookup("DOG"), None);
    }

    #[test]
    fn lookup_contract() {
        let emb = read("paris 1 2\nrome 3 4\n", EmbeddingFormat::GloveText, true).unwrap();
        assert_eq!(emb.lookup("paris"), Some(&[1.0, 2.0][..]));
        assert_eq!(emb.lookup("Paris"), Some(&[1.0, 2.0][..]));
        assert_eq!(emb.lookup("london"), None);
        match emb.lookup_all(["paris", "london", "oslo", "london"]) {
            Err(Error::OutOfVocabulary(w)) => assert_eq!(w, vec!["london", "oslo"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn univariate_background_density() {
        let emb = read("a -1\nb 1\n", EmbeddingFormat::GloveText, false).unwrap();
        // variance 2 (n-1 denominator), lambda = 1e-6 * 2
        let var = 2.0 * (1.0 + 1e-6);
        let expected = -0.5 * (2.0 * std::f64::consts::PI * var).ln();
        assert!((emb.background_logpdf(&[0.0]) - expected).abs() < 1e-12);
        assert!(emb.background_logpdf(&[0.0]) > emb.background_logpdf(&[0.3]));
    }

    #[test]
    fn unit_quadratic_form_drops_half() {
        // four points with identity sample covariance in 2-D
        let emb = read(
            "a 1.2247448713915890 0\nb -1.2247448713915890 0\nc 0 1.2247448713915890\nd 0 -1.2247448713915890\n",
            EmbeddingFormat::GloveText,
            false,
        )
        .unwrap();
        let cov = emb.background().covariance();
        assert!((cov[(0, 0)] - 1.0).abs() < 1e-5 && cov[(0, 1)].abs() < 1e-12);
        let at_mean = emb.background_logpdf(&[0.0, 0.0]);
        let off = emb.background_logpdf(&[1.0, 0.0]);
        assert!((at_mean - off - 0.5).abs() < 1e-5, "{}", at_mean - off);
    }

    #[test]
    fn covariance_is_symmetric_and_regularized() {
        let emb = read("a 1 2 0\nb 2 4 0\nc 3 6 0\n", EmbeddingFormat::GloveText, false).unwrap();
        let bg = emb.background();
        let cov = bg.covariance();
        assert!((cov - cov.transpose()).amax() <= 1e-12);
        assert!(bg.lambda() > 0.0);
        for (_, v) in emb.iter() {
            assert!(emb.background_logpdf(v).is_finite());
        }
    }

    #[test]
    fn single_vector_is_insufficient() {
        assert!(matches!(
            read("a 1 2\n", EmbeddingFormat::GloveText, false),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn truncation_refits_background() {
        let emb = read("a 0\nb 2\nc 100\n", EmbeddingFormat::GloveText, false).unwrap();
        let t = emb.truncated(2).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.background().mean()[0], 1.0);
    }
}
