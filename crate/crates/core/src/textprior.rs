// SPDX-License-Identifier: Apache-2.0

//! Text-based cell priors: l1-regularised multinomial logistic regression.
//!
//! Documents become l2-normalised term-frequency vectors over a vocabulary
//! built from training users only; @-mentions and URLs are dropped before
//! tokenising. The model minimises
//!
//! ```text
//! F(W, b) = (1/N) Σ_i [ logsumexp(W x_i + b) − (W x_i + b)_{y_i} ] + λ Σ |W|
//! ```
//!
//! by proximal gradient descent (soft-thresholding after each gradient
//! step) with a backtracking step size. The bias is not penalised.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::discretizer::CellId;
use crate::error::{Error, Result};

/// Sparse vector as `(feature, value)` pairs sorted by feature.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextParams {
    pub l1_strength: f64,
    pub max_iter: usize,
    pub min_df: usize,
}

impl Default for TextParams {
    fn default() -> Self {
        TextParams {
            l1_strength: 1e-4,
            max_iter: 300,
            min_df: 1,
        }
    }
}

/// Lowercased word tokens with mentions and URLs removed.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let lower = chunk.to_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.") {
            continue;
        }
        let mut current = String::new();
        let mut prev_word = false;
        let mut in_mention = false;
        for c in lower.chars() {
            if in_mention {
                if c.is_ascii_alphanumeric() || c == '_' {
                    continue;
                }
                in_mention = false;
            }
            if c == '@' && !prev_word {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                in_mention = true;
                prev_word = false;
                continue;
            }
            if c.is_alphanumeric() {
                current.push(c);
                prev_word = true;
            } else {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                prev_word = c == '_';
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    tokens
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    /// Terms in feature-index order (sorted).
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Terms appearing in at least `min_df` of the documents.
    pub fn build<'a>(docs: impl IntoIterator<Item = &'a str>, min_df: usize) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let mut terms = tokenize(doc);
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let (terms, doc_freq): (Vec<String>, Vec<usize>) = df.into_iter().filter(|&(_, n)| n >= min_df.max(1)).unzip();
        Self::from_parts(terms, doc_freq)
    }

    fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { terms, doc_freq, index }
    }

    pub fn from_terms<S: AsRef<str>>(terms: &[S]) -> Self {
        let mut sorted: Vec<String> = terms.iter().map(|t| t.as_ref().to_string()).collect();
        sorted.sort();
        sorted.dedup();
        let n = sorted.len();
        Self::from_parts(sorted, vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn doc_freq(&self, i: usize) -> usize {
        self.doc_freq[i]
    }
}

/// l2-normalised term frequencies; out-of-vocabulary terms are ignored.
pub fn featurize(text: &str, vocab: &Vocabulary) -> SparseVec {
    let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
    for t in tokenize(text) {
        if let Some(i) = vocab.get(&t) {
            *counts.entry(i).or_insert(0.0) += 1.0;
        }
    }
    let norm = counts.values().map(|x| x * x).sum::<f64>().sqrt();
    counts.into_iter().map(|(i, x)| (i, x / norm)).collect()
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in z.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in z.iter_mut() {
        *x /= total;
    }
}

fn scores(weights: &[f64], bias: &[f64], num_features: usize, x: &[(usize, f64)]) -> Vec<f64> {
    bias.iter()
        .enumerate()
        .map(|(c, &b)| b + x.iter().map(|&(j, v)| weights[c * num_features + j] * v).sum::<f64>())
        .collect()
}

/// Mean multinomial log-loss and its gradient with respect to the weights
/// (row-major `cells × features`) and the bias.
pub fn logistic_loss(
    features: &[SparseVec],
    labels: &[usize],
    num_features: usize,
    weights: &[f64],
    bias: &[f64],
) -> (f64, Vec<f64>, Vec<f64>) {
    let m = bias.len();
    let n = features.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; m];
    for (x, &y) in features.iter().zip(labels) {
        let mut z = scores(weights, bias, num_features, x);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
        loss += lse - z[y];
        softmax_in_place(&mut z);
        z[y] -= 1.0;
        for (c, &r) in z.iter().enumerate() {
            gb[c] += r / n;
            for &(j, v) in x {
                gw[c * num_features + j] += r * v / n;
            }
        }
    }
    (loss / n, gw, gb)
}

fn l1_norm(w: &[f64]) -> f64 {
    w.iter().map(|x| x.abs()).sum()
}

/// Result of [`fit_logistic`].
#[derive(Clone, Debug, PartialEq)]
pub struct LogisticFit {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    /// Regularised objective after each accepted step, starting with the
    /// value at zero.
    pub objective_trace: Vec<f64>,
}

/// Proximal gradient descent from zero.
pub fn fit_logistic(
    features: &[SparseVec],
    labels: &[usize],
    num_cells: usize,
    num_features: usize,
    l1_strength: f64,
    max_iter: usize,
) -> LogisticFit {
    let mut w = vec![0.0; num_cells * num_features];
    let mut b = vec![0.0; num_cells];
    let (mut f, mut gw, mut gb) = logistic_loss(features, labels, num_features, &w, &b);
    let mut objective = f + l1_strength * l1_norm(&w);
    let mut trace = vec![objective];
    let mut step = 1.0;

    for _ in 0..max_iter {
        let mut accepted = None;
        for _ in 0..60 {
            let thresh = step * l1_strength;
            let w_new: Vec<f64> = w
                .iter()
                .zip(&gw)
                .map(|(&x, &g)| {
                    let u = x - step * g;
                    if u.abs() <= thresh {
                        0.0
                    } else {
                        u - thresh * u.signum()
                    }
                })
                .collect();
            let b_new: Vec<f64> = b.iter().zip(&gb).map(|(&x, &g)| x - step * g).collect();
            let (f_new, gw_new, gb_new) = logistic_loss(features, labels, num_features, &w_new, &b_new);
            let mut linear = 0.0;
            let mut sq = 0.0;
            for ((&xn, &xo), &g) in w_new.iter().zip(&w).zip(&gw).chain(b_new.iter().zip(&b).zip(&gb)) {
                let d = xn - xo;
                linear += g * d;
                sq += d * d;
            }
            if f_new <= f + linear + sq / (2.0 * step) {
                accepted = Some((w_new, b_new, f_new, gw_new, gb_new));
                break;
            }
            step *= 0.5;
        }
        let Some((w_new, b_new, f_new, gw_new, gb_new)) = accepted else {
            break;
        };
        let obj_new = f_new + l1_strength * l1_norm(&w_new);
        if obj_new > objective {
            // rounding noise at the optimum
            break;
        }
        let done = objective - obj_new <= 1e-10 * objective.abs().max(1.0);
        w = w_new;
        b = b_new;
        f = f_new;
        gw = gw_new;
        gb = gb_new;
        objective = obj_new;
        trace.push(objective);
        if done {
            break;
        }
        step = (step * 1.5).min(1e3);
    }
    let _ = f;
    LogisticFit {
        weights: w,
        bias: b,
        objective_trace: trace,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextModel {
    pub vocabulary: Vocabulary,
    pub num_cells: usize,
    /// Row-major `cells × features`.
    #[serde(skip)]
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub l1_strength: f64,
}

pub struct TrainOutcome {
    pub model: TextModel,
    pub objective_trace: Vec<f64>,
}

/// Trains on documents labelled with their users' cells.
pub fn train_text_model(
    texts: &[&str],
    cells: &[CellId],
    num_cells: usize,
    params: &TextParams,
) -> Result<TrainOutcome> {
    if texts.len() != cells.len() {
        return Err(Error::Validation("one cell label per training text is required".into()));
    }
    if let Some(c) = cells.iter().find(|c| c.0 >= num_cells) {
        return Err(Error::Validation(format!("cell {} out of range (m = {num_cells})", c.0)));
    }
    let mut distinct: Vec<usize> = cells.iter().map(|c| c.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Build(
            "text classifier needs at least two cell labels among training users; \
             lower bucket_size so the k-d tree yields more cells"
                .into(),
        ));
    }
    if !(params.l1_strength >= 0.0 && params.l1_strength.is_finite()) {
        return Err(Error::Config(format!("invalid l1_strength {}", params.l1_strength)));
    }
    let vocabulary = Vocabulary::build(texts.iter().copied(), params.min_df);
    let features: Vec<SparseVec> = texts.iter().map(|t| featurize(t, &vocabulary)).collect();
    let labels: Vec<usize> = cells.iter().map(|c| c.0).collect();
    let fit = fit_logistic(&features, &labels, num_cells, vocabulary.len(), params.l1_strength, params.max_iter);
    Ok(TrainOutcome {
        model: TextModel {
            vocabulary,
            num_cells,
            weights: fit.weights,
            bias: fit.bias,
            l1_strength: params.l1_strength,
        },
        objective_trace: fit.objective_trace,
    })
}

impl TextModel {
    pub fn num_features(&self) -> usize {
        self.vocabulary.len()
    }

    /// Softmax over the linear scores of an already featurised document.
    pub fn predict_prior(&self, x: &[(usize, f64)]) -> Vec<f64> {
        let mut z = scores(&self.weights, &self.bias, self.num_features(), x);
        softmax_in_place(&mut z);
        z
    }

    pub fn predict_text(&self, text: &str) -> Vec<f64> {
        self.predict_prior(&featurize(text, &self.vocabulary))
    }

    pub fn zero_fraction(&self) -> f64 {
        if self.weights.is_empty() {
            return 1.0;
        }
        self.weights.iter().filter(|&&w| w == 0.0).count() as f64 / self.weights.len() as f64
    }

    /// Non-zero weights as `cell \t feature \t weight` lines.
    pub fn to_triplets(&self) -> String {
        let f = self.num_features();
        let mut out = String::new();
        for (i, &w) in self.weights.iter().enumerate() {
            if w != 0.0 {
                let _ = writeln!(out, "{}\t{}\t{}", i / f, i % f, w);
            }
        }
        out
    }

    pub fn from_parts(header_json: &str, triplets: &str) -> Result<Self> {
        let mut model: TextModel = serde_json::from_str(header_json)?;
        model.vocabulary = Vocabulary::from_parts(
            std::mem::take(&mut model.vocabulary.terms),
            std::mem::take(&mut model.vocabulary.doc_freq),
        );
        if model.bias.len() != model.num_cells {
            return Err(Error::Validation("text model bias length does not match num_cells".into()));
        }
        let f = model.num_features();
        model.weights = vec![0.0; model.num_cells * f];
        for (i, line) in triplets.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, found {}", parts.len())));
            }
            let c: usize = parts[0].parse().map_err(|_| parse_err("bad cell".into()))?;
            let j: usize = parts[1].parse().map_err(|_| parse_err("bad feature".into()))?;
            let w: f64 = parts[2].parse().map_err(|_| parse_err("bad weight".into()))?;
            if c >= model.num_cells || j >= f || !w.is_finite() {
                return Err(parse_err(format!("triplet ({c}, {j}, {w}) out of range")));
            }
            model.weights[c * f + j] = w;
        }
        Ok(model)
    }

    /// Writes `<stem>.json` (vocabulary, bias, sizes) and `<stem>.tsv`
    /// (weight triplets) into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let json = dir.join(format!("{stem}.json"));
        let tsv = dir.join(format!("{stem}.tsv"));
        fs::write(&json, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(&json, e))?;
        fs::write(&tsv, self.to_triplets()).map_err(|e| Error::io(&tsv, e))
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let json = dir.join(format!("{stem}.json"));
        let tsv = dir.join(format!("{stem}.tsv"));
        let header = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let triplets = fs::read_to_string(&tsv).map_err(|e| Error::io(&tsv, e))?;
        Self::from_parts(&header, &triplets)
    }
}
