use std::collections::HashSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair::WordPair;

/// File layout a relation dataset was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetOrigin {
    #[serde(rename = "google")]
    Google,
    #[serde(rename = "bats")]
    Bats,
    #[serde(rename = "diffvec")]
    DiffVec,
    #[serde(rename = "custom-tsv")]
    CustomTsv,
}

impl DatasetOrigin {
    pub const ALL: [DatasetOrigin; 4] = [
        DatasetOrigin::Google,
        DatasetOrigin::Bats,
        DatasetOrigin::DiffVec,
        DatasetOrigin::CustomTsv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetOrigin::Google => "google",
            DatasetOrigin::Bats => "bats",
            DatasetOrigin::DiffVec => "diffvec",
            DatasetOrigin::CustomTsv => "custom-tsv",
        }
    }
}

impl fmt::Display for DatasetOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetOrigin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetOrigin::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            let names: Vec<_> = DatasetOrigin::ALL.iter().map(|o| o.name()).collect();
            Error::InvalidArgument(format!("unknown dataset format `{s}` (valid: {})", names.join(", ")))
        })
    }
}

/// Example pairs of one relation, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDataset {
    pub name: String,
    pub pairs: Vec<WordPair>,
    pub origin: DatasetOrigin,
    /// Duplicate pair lines dropped while building the dataset.
    pub duplicates_removed: usize,
}

impl RelationDataset {
    /// Drops repeated pairs (first occurrence kept) and rejects empty words.
    pub fn new(name: impl Into<String>, pairs: Vec<WordPair>, origin: DatasetOrigin) -> Result<Self> {
        let name = name.into();
        let total = pairs.len();
        let mut seen = HashSet::with_capacity(total);
        let mut unique = Vec::with_capacity(total);
        for p in pairs {
            if p.source.is_empty() || p.target.is_empty() {
                return Err(Error::InvalidArgument(format!("relation `{name}` has a pair with an empty word")));
            }
            if seen.insert(p.clone()) {
                unique.push(p);
            }
        }
        let duplicates_removed = total - unique.len();
        if duplicates_removed > 0 {
            log::warn!("relation `{name}`: dropped {duplicates_removed} duplicate pair(s)");
        }
        Ok(RelationDataset {
            name,
            pairs: unique,
            origin,
            duplicates_removed,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every distinct word, sources and targets alike, in first-seen order.
    pub fn words(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.pairs
            .iter()
            .flat_map(|p| [p.source.as_str(), p.target.as_str()])
            .filter(|w| seen.insert(*w))
            .collect()
    }
}

/// Writes relations in the custom TSV layout read by [`load_dataset`].
pub fn write_custom_tsv<W: Write>(relations: &[RelationDataset], mut w: W) -> Result<()> {
    for rel in relations {
        writeln!(w, "#relation\t{}", rel.name)?;
        for p in &rel.pairs {
            writeln!(w, "{}\t{}", p.source, p.target)?;
        }
    }
    Ok(())
}

/// Reads every relation stored at `path`.
///
/// BATS accepts either a directory (one file per relation, named after the
/// file stem) or a single file. The other layouts are single files.
pub fn load_dataset(path: impl AsRef<Path>, origin: DatasetOrigin, case_fold: bool) -> Result<Vec<RelationDataset>> {
    let path = path.as_ref();
    let fold = |w: &str| if case_fold { w.to_lowercase() } else { w.to_string() };
    let groups = match origin {
        DatasetOrigin::Bats if path.is_dir() => {
            let mut files: Vec<PathBuf> = fs::read_dir(path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            files.retain(|f| {
                f.is_file() && !f.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'))
            });
            files.sort();
            let mut groups = Vec::with_capacity(files.len());
            for f in files {
                let name = f.file_stem().and_then(|s| s.to_str()).unwrap_or("relation").to_string();
                groups.push((name, parse_bats(&f, open(&f)?, &fold)?));
            }
            groups
        }
        DatasetOrigin::Bats => {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("relation").to_string();
            vec![(name, parse_bats(path, open(path)?, &fold)?)]
        }
        DatasetOrigin::Google => parse_google(path, open(path)?, &fold)?,
        DatasetOrigin::DiffVec => parse_diffvec(path, open(path)?, &fold)?,
        DatasetOrigin::CustomTsv => parse_custom_tsv(path, open(path)?, &fold)?,
    };
    if groups.iter().all(|(_, pairs)| pairs.is_empty()) {
        return Err(Error::Empty(path.to_path_buf()));
    }
    groups
        .into_iter()
        .map(|(name, pairs)| RelationDataset::new(name, pairs, origin))
        .collect()
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

type Groups = Vec<(String, Vec<WordPair>)>;

/// Appends to the group called `name`, creating it on first use.
fn push_pair(groups: &mut Groups, name: &str, pair: WordPair) {
    match groups.iter_mut().find(|(n, _)| n == name) {
        Some((_, pairs)) => pairs.push(pair),
        None => groups.push((name.to_string(), vec![pair])),
    }
}

fn lines<'a, R: BufRead + 'a>(path: &'a Path, reader: R) -> impl Iterator<Item = Result<(usize, String)>> + 'a {
    reader.lines().enumerate().map(move |(i, l)| {
        l.map(|l| (i + 1, l.trim_end_matches('\r').to_string()))
            .map_err(|e| parse_error(path, i + 1, e.to_string()))
    })
}

fn parse_bats<R: BufRead>(path: &Path, reader: R, fold: &dyn Fn(&str) -> String) -> Result<Vec<WordPair>> {
    let mut pairs = Vec::new();
    for item in lines(path, reader) {
        let (no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_error(path, no, format!("expected `source<TAB>target`, got {} fields", fields.len())));
        }
        let target = fields[1].split('/').find(|t| !t.is_empty());
        let Some(target) = target else {
            return Err(parse_error(path, no, "empty target"));
        };
        pairs.push(WordPair::new(fold(fields[0]), fold(target)));
    }
    Ok(pairs)
}

fn parse_google<R: BufRead>(path: &Path, reader: R, fold: &dyn Fn(&str) -> String) -> Result<Groups> {
    let mut groups: Groups = Vec::new();
    let mut section: Option<String> = None;
    for item in lines(path, reader) {
        let (no, line) = item?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix(':') {
            let name = name.trim();
            if name.is_empty() {
                return Err(parse_error(path, no, "empty section name"));
            }
            groups.push((name.to_string(), Vec::new()));
            section = Some(name.to_string());
            continue;
        }
        let Some(name) = &section else {
            return Err(parse_error(path, no, "analogy line before the first `: section` header"));
        };
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        if words.len() != 4 {
            return Err(parse_error(path, no, format!("expected 4 words, got {}", words.len())));
        }
        let rel = &mut groups.iter_mut().rev().find(|(n, _)| n == name).expect("section exists").1;
        for (a, b) in [(words[0], words[1]), (words[2], words[3])] {
            let p = WordPair::new(fold(a), fold(b));
            // Each pair recurs in many analogies; keep the first.
            if !rel.contains(&p) {
                rel.push(p);
            }
        }
    }
    Ok(groups)
}

fn parse_diffvec<R: BufRead>(path: &Path, reader: R, fold: &dyn Fn(&str) -> String) -> Result<Groups> {
    let mut groups: Groups = Vec::new();
    for item in lines(path, reader) {
        let (no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        let sep = if line.contains('\t') { '\t' } else { ',' };
        let fields: Vec<&str> = line.split(sep).map(str::trim).collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(parse_error(path, no, "expected `relation,source,target`"));
        }
        push_pair(&mut groups, fields[0], WordPair::new(fold(fields[1]), fold(fields[2])));
    }
    Ok(groups)
}

fn parse_custom_tsv<R: BufRead>(path: &Path, reader: R, fold: &dyn Fn(&str) -> String) -> Result<Groups> {
    let mut groups: Groups = Vec::new();
    let mut current = "default".to_string();
    for item in lines(path, reader) {
        let (no, line) = item?;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#relation") {
            let name = rest.trim();
            if name.is_empty() {
                return Err(parse_error(path, no, "relation header without a name"));
            }
            current = name.to_string();
            if !groups.iter().any(|(n, _)| n == name) {
                groups.push((current.clone(), Vec::new()));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(parse_error(path, no, "expected `source<TAB>target`"));
        }
        push_pair(&mut groups, &current, WordPair::new(fold(fields[0]), fold(fields[1])));
    }
    Ok(groups)
}
