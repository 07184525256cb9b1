//! Word vectors: text-format IO, similarity queries and a deterministic
//! count-based local model.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorModel<F: Real> {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<F>,
    norms: Vec<F>,
    /// Lines skipped because their word was already loaded.
    pub duplicates: usize,
}

impl<F: Real> VectorModel<F> {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("vector dimension must be positive".into()));
        }
        Ok(VectorModel {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            norms: Vec::new(),
            duplicates: 0,
        })
    }

    /// Adds a vector. Returns false and keeps the old one if the word exists.
    pub fn insert(&mut self, word: &str, vector: &[F]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "vector for {word:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        if self.index.contains_key(word) {
            self.duplicates += 1;
            return Ok(false);
        }
        let norm = vector.iter().map(|&x| x * x).sum::<F>().sqrt();
        self.index.insert(word.to_string(), self.words.len());
        self.words.push(word.to_string());
        self.data.extend_from_slice(vector);
        self.norms.push(norm);
        Ok(true)
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

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[F]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn cosine_at(&self, a: usize, b: usize) -> F {
        let denom = self.norms[a] * self.norms[b];
        if denom == F::zero() {
            return F::zero();
        }
        let dot: F = self.row(a).iter().zip(self.row(b)).map(|(&x, &y)| x * y).sum();
        (dot / denom).max(-F::one()).min(F::one())
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<F> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        if i == j {
            return Some(F::one());
        }
        Some(self.cosine_at(i, j))
    }

    /// Cosine similarity mapped onto `[0, 1]`.
    pub fn sim01(&self, a: &str, b: &str) -> Option<F> {
        self.cosine(a, b).map(to_unit)
    }

    /// The `t` nearest other words by [`sim01`](Self::sim01), best first,
    /// ties in lexicographic order.
    pub fn top_t(&self, word: &str, t: usize) -> Vec<(String, F)> {
        let Some(&q) = self.index.get(word) else {
            log::debug!("top_t: {word:?} is out of vocabulary");
            return Vec::new();
        };
        if t == 0 {
            return Vec::new();
        }
        let mut scored: Vec<(usize, F)> = (0..self.words.len())
            .filter(|&i| i != q)
            .map(|i| (i, to_unit(self.cosine_at(q, i))))
            .collect();
        let cmp = |a: &(usize, F), b: &(usize, F)| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.words[a.0].cmp(&self.words[b.0]))
        };
        if t < scored.len() {
            scored.select_nth_unstable_by(t - 1, cmp);
            scored.truncate(t);
        }
        scored.sort_by(cmp);
        scored.into_iter().map(|(i, s)| (self.words[i].clone(), s)).collect()
    }

    /// Parses the `count dim` text format.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::io("<vectors>", e))?,
            None => {
                return Err(Error::VectorFormat {
                    line: 1,
                    detail: "missing header".into(),
                })
            }
        };
        let mut parts = header.split_whitespace();
        let parse_usize = |s: Option<&str>| s.and_then(|v| v.parse::<usize>().ok());
        let (Some(count), Some(dim)) = (parse_usize(parts.next()), parse_usize(parts.next())) else {
            return Err(Error::VectorFormat {
                line: 1,
                detail: format!("bad header {header:?}"),
            });
        };
        let mut model = VectorModel::new(dim).map_err(|_| Error::VectorFormat {
            line: 1,
            detail: "dimension must be positive".into(),
        })?;
        let mut buf = Vec::with_capacity(dim);
        for (n, line) in lines.enumerate() {
            let lineno = n + 2;
            let line = line.map_err(|e| Error::io("<vectors>", e))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let word = fields.next().unwrap_or_default();
            buf.clear();
            for f in fields.filter(|f| !f.is_empty()) {
                let v: f64 = f.parse().map_err(|_| Error::VectorFormat {
                    line: lineno,
                    detail: format!("bad component {f:?}"),
                })?;
                buf.push(F::lit(v));
            }
            if buf.len() != dim {
                return Err(Error::VectorFormat {
                    line: lineno,
                    detail: format!("{} components, expected {dim}", buf.len()),
                });
            }
            model.insert(word, &buf)?;
        }
        if model.len() + model.duplicates != count {
            log::warn!(
                "vector header announces {count} rows, found {}",
                model.len() + model.duplicates
            );
        }
        if model.duplicates > 0 {
            log::warn!("{} duplicate words ignored", model.duplicates);
        }
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            for x in self.row(i) {
                write!(w, " {}", x.to_f64().unwrap_or(f64::NAN))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// `(cos + 1) / 2`
pub fn to_unit<F: Real>(cosine: F) -> F {
    (cosine + F::one()) / F::lit(2.0)
}

/// Trains word vectors from whitespace-tokenized sentences: windowed
/// co-occurrence counts, positive PMI, then the leading eigenpairs of the
/// symmetric PPMI matrix scaled by the square root of their magnitude.
pub fn train_local<F: Real, S: AsRef<str>>(corpus: &[S], dim: usize, window: usize) -> Result<VectorModel<F>> {
    if dim == 0 || window == 0 {
        return Err(Error::InvalidArgument("dim and window must be positive".into()));
    }
    let sentences: Vec<Vec<&str>> = corpus
        .iter()
        .map(|s| s.as_ref().split_whitespace().collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    if sentences.is_empty() {
        return Err(Error::Empty("training corpus"));
    }
    let vocab: Vec<&str> = {
        let mut v: Vec<&str> = sentences.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let n = vocab.len();

    let mut counts: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for sent in &sentences {
        for (i, w) in sent.iter().enumerate() {
            let a = index[w];
            for c in sent.iter().skip(i + 1).take(window) {
                let b = index[c];
                *counts.entry((a, b)).or_default() += 1.0;
                *counts.entry((b, a)).or_default() += 1.0;
            }
        }
    }
    let mut row = vec![0.0; n];
    for (&(a, _), &c) in &counts {
        row[a] += c;
    }
    let total: f64 = row.iter().sum();
    let mut ppmi = DMatrix::<f64>::zeros(n, n);
    if total > 0.0 {
        for (&(a, b), &c) in &counts {
            let pmi = (c * total / (row[a] * row[b])).ln();
            if pmi > 0.0 {
                ppmi[(a, b)] = pmi;
            }
        }
    }

    let dim_eff = if dim > n {
        log::warn!("requested dimension {dim} exceeds vocabulary size {n}; clamped");
        n
    } else {
        dim
    };
    let eig = SymmetricEigen::new(ppmi);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .abs()
            .partial_cmp(&eig.eigenvalues[i].abs())
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });

    let mut vectors = vec![vec![0.0f64; dim_eff]; n];
    for (k, &col) in order.iter().take(dim_eff).enumerate() {
        let scale = eig.eigenvalues[col].abs().sqrt();
        let v = eig.eigenvectors.column(col);
        let mut pivot = 0;
        for r in 1..n {
            if v[r].abs() > v[pivot].abs() + 1e-12 {
                pivot = r;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors[r][k] = sign * v[r] * scale;
        }
    }

    let mut model = VectorModel::new(dim_eff)?;
    let mut buf = Vec::with_capacity(dim_eff);
    for (word, vec) in vocab.iter().zip(&vectors) {
        buf.clear();
        buf.extend(vec.iter().map(|&x| F::lit(x)));
        model.insert(word, &buf)?;
    }
    Ok(model)
}
