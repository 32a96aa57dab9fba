//! Joins system outputs to their corpus pairs, scores every sample and
//! aggregates per system and language.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clients::{ClientError, Embedder};
use crate::corpus::{Corpus, ParallelPair, SystemOutput};
use crate::lang::LanguageTag;
use crate::metrics::{chrf, joint_score, mean_of, sim, ChrfConfig, MetricError, ScoreTriple, StaMode, StyleScorer};
use crate::prompting::LlmParams;

pub const SIM_CLAMP_NOTE: &str = "cosine similarity clamped to [0, 1]; negative similarity scores 0";
pub const EMPTY_OUTPUT_NOTE: &str = "empty outputs score SIM 0 without an embedding call";

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no outputs to evaluate")]
    Empty,
    #[error("{} output rows do not join to a corpus pair: {}", .0.len(), .0.join(", "))]
    Unjoinable(Vec<String>),
    #[error("duplicate output row for pair {pair_id} in system {system}")]
    DuplicateRow { pair_id: String, system: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("embedding service: {0}")]
    Client(#[from] ClientError),
    #[error("report: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub chrf: ChrfConfig,
    pub sta_mode: StaMode,
    /// Drop rows that do not join instead of failing.
    pub skip_missing: bool,
    pub seed: Option<u64>,
    /// Identities of the services used, e.g. `"sta" -> url`.
    pub endpoints: BTreeMap<String, String>,
    pub llm_params: Option<LlmParams>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            chrf: ChrfConfig::default(),
            sta_mode: StaMode::Probability,
            skip_missing: false,
            seed: None,
            endpoints: BTreeMap::new(),
            llm_params: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub pair_id: String,
    pub system: String,
    pub lang: LanguageTag,
    pub sta: f64,
    pub sim: f64,
    pub chrf: f64,
    pub j: f64,
}

impl SampleRow {
    pub fn triple(&self) -> ScoreTriple {
        ScoreTriple {
            sta: self.sta,
            sim: self.sim,
            chrf: self.chrf,
            j: self.j,
        }
    }
}

/// Means for one (system, language) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangSummary {
    pub system: String,
    pub lang: LanguageTag,
    pub n: usize,
    pub sta: f64,
    pub sim: f64,
    pub chrf: f64,
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: Option<u64>,
    pub chrf: ChrfConfig,
    pub sta_mode: StaMode,
    pub sta_scorer: String,
    pub sim_note: String,
    pub empty_output_note: String,
    pub endpoints: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm_params: Option<LlmParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub summaries: Vec<LangSummary>,
    pub rows: Vec<SampleRow>,
    /// Output rows dropped because they did not join, as `system/pair_id`.
    #[serde(default)]
    pub skipped: Vec<String>,
}

/// Per-(system, language) means recomputed from sample rows. Groups are
/// ordered by system name, then language table order.
pub fn aggregate(rows: &[SampleRow]) -> Result<Vec<LangSummary>, MetricError> {
    let mut groups: BTreeMap<(&str, LanguageTag), Vec<ScoreTriple>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.system.as_str(), r.lang)).or_default().push(r.triple());
    }
    groups
        .into_iter()
        .map(|((system, lang), t)| {
            Ok(LangSummary {
                system: system.to_string(),
                lang,
                n: t.len(),
                sta: mean_of(&t, |x| x.sta),
                sim: mean_of(&t, |x| x.sim),
                chrf: mean_of(&t, |x| x.chrf),
                j: joint_score(&t)?,
            })
        })
        .collect()
}

/// Scores `outputs` against `corpora`. Rows come out grouped by system
/// and language, in corpus order within a group.
pub fn evaluate(
    corpora: &[Corpus],
    outputs: &[SystemOutput],
    scorer: &dyn StyleScorer,
    embedder: &dyn Embedder,
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    cfg.chrf.validate()?;
    if outputs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut position: HashMap<(LanguageTag, &str), (usize, &ParallelPair)> = HashMap::new();
    for corpus in corpora {
        for (i, p) in corpus.pairs.iter().enumerate() {
            position.insert((corpus.lang, p.id.as_str()), (i, p));
        }
    }

    let mut missing = Vec::new();
    let mut seen = std::collections::HashSet::new();
    type Group<'a> = Vec<(usize, &'a ParallelPair, &'a SystemOutput)>;
    let mut groups: BTreeMap<(&str, LanguageTag), Group> = BTreeMap::new();
    for o in outputs {
        match position.get(&(o.lang, o.pair_id.as_str())) {
            Some(&(i, pair)) => {
                if !seen.insert((o.system.as_str(), o.lang, o.pair_id.as_str())) {
                    return Err(EvalError::DuplicateRow {
                        pair_id: o.pair_id.clone(),
                        system: o.system.clone(),
                    });
                }
                groups.entry((o.system.as_str(), o.lang)).or_default().push((i, pair, o));
            }
            None => missing.push(format!("{}/{}", o.system, o.pair_id)),
        }
    }
    if !missing.is_empty() && !cfg.skip_missing {
        return Err(EvalError::Unjoinable(missing));
    }
    if groups.is_empty() {
        return Err(EvalError::Empty);
    }

    let mut rows = Vec::new();
    for ((system, lang), mut members) in groups {
        members.sort_by_key(|(i, _, _)| *i);
        let samples: Vec<(String, String)> = members
            .iter()
            .map(|(_, p, o)| (p.id.clone(), o.detoxified.clone()))
            .collect();
        let sta = crate::metrics::style::sta(&samples, lang, scorer, cfg.sta_mode)?;
        let sims = sim_scores(&members, embedder)?;
        for (k, (_, pair, o)) in members.iter().enumerate() {
            let c = chrf(&o.detoxified, &pair.references, &cfg.chrf)?;
            let t = ScoreTriple::new(sta[k], sims[k], c);
            rows.push(SampleRow {
                pair_id: pair.id.clone(),
                system: system.to_string(),
                lang,
                sta: t.sta,
                sim: t.sim,
                chrf: t.chrf,
                j: t.j,
            });
        }
    }

    Ok(EvalReport {
        metadata: ReportMetadata {
            seed: cfg.seed,
            chrf: cfg.chrf,
            sta_mode: cfg.sta_mode,
            sta_scorer: scorer.describe(),
            sim_note: SIM_CLAMP_NOTE.to_string(),
            empty_output_note: EMPTY_OUTPUT_NOTE.to_string(),
            endpoints: cfg.endpoints.clone(),
            llm_params: cfg.llm_params.clone(),
        },
        summaries: aggregate(&rows)?,
        rows,
        skipped: missing,
    })
}

/// SIM between each source and its output, embedding both in one batch.
fn sim_scores(members: &[(usize, &ParallelPair, &SystemOutput)], embedder: &dyn Embedder) -> Result<Vec<f64>, EvalError> {
    let live: Vec<usize> = (0..members.len())
        .filter(|&k| !members[k].2.detoxified.trim().is_empty())
        .collect();
    let mut out = vec![0.0; members.len()];
    if live.is_empty() {
        return Ok(out);
    }
    let mut texts: Vec<String> = live.iter().map(|&k| members[k].1.toxic.clone()).collect();
    texts.extend(live.iter().map(|&k| members[k].2.detoxified.clone()));
    let vectors = embedder.embed(&texts)?;
    let n = live.len();
    for (m, &k) in live.iter().enumerate() {
        out[k] = sim(&vectors[m], &vectors[n + m])?;
    }
    Ok(out)
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Format(e.to_string()))
    }

    /// Per-sample rows. Floats use the shortest exact representation, so
    /// re-aggregating the CSV reproduces the report bit for bit.
    pub fn rows_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("row serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<SampleRow>, EvalError> {
        csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(|e| EvalError::Format(e.to_string()))
    }

    pub fn summaries_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.summaries {
            w.serialize(s).expect("summary serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    fn systems_and_langs(&self) -> (Vec<&str>, Vec<LanguageTag>) {
        let mut systems: Vec<&str> = self.summaries.iter().map(|s| s.system.as_str()).collect();
        systems.dedup();
        let langs = LanguageTag::ALL
            .into_iter()
            .filter(|l| self.summaries.iter().any(|s| s.lang == *l))
            .collect();
        (systems, langs)
    }

    fn cell(&self, system: &str, lang: LanguageTag) -> Option<&LangSummary> {
        self.summaries.iter().find(|s| s.system == system && s.lang == lang)
    }

    /// J matrix (systems by languages) followed by one STA/SIM/ChrF/J
    /// table per language.
    pub fn to_markdown(&self) -> String {
        let (systems, langs) = self.systems_and_langs();
        let mut md = String::from("# Automatic evaluation\n\n## J\n\n| System |");
        for l in &langs {
            let _ = write!(md, " {l} |");
        }
        md.push_str("\n|---|");
        md.push_str(&"---:|".repeat(langs.len()));
        md.push('\n');
        for sys in &systems {
            let _ = write!(md, "| {sys} |");
            for l in &langs {
                match self.cell(sys, *l) {
                    Some(c) => {
                        let _ = write!(md, " {:.3} |", c.j);
                    }
                    None => md.push_str(" - |"),
                }
            }
            md.push('\n');
        }
        for l in &langs {
            let _ = write!(md, "\n## {l}\n\n| System | STA | SIM | ChrF | J | n |\n|---|---:|---:|---:|---:|---:|\n");
            for sys in &systems {
                if let Some(c) = self.cell(sys, *l) {
                    let _ = writeln!(
                        md,
                        "| {sys} | {:.3} | {:.3} | {:.3} | {:.3} | {} |",
                        c.sta, c.sim, c.chrf, c.j, c.n
                    );
                }
            }
        }
        let m = &self.metadata;
        md.push_str("\n## Run\n\n");
        let _ = writeln!(md, "- STA scorer: {}", m.sta_scorer);
        let _ = writeln!(md, "- STA mode: {}", serde_json::to_string(&m.sta_mode).expect("mode serializes"));
        let _ = writeln!(
            md,
            "- chrF: order {}, beta {}, whitespace stripped: {}",
            m.chrf.max_char_order, m.chrf.beta, m.chrf.strip_whitespace
        );
        let _ = writeln!(md, "- SIM: {}; {}", m.sim_note, m.empty_output_note);
        if let Some(seed) = m.seed {
            let _ = writeln!(md, "- seed: {seed}");
        }
        for (k, v) in &m.endpoints {
            let _ = writeln!(md, "- {k}: {v}");
        }
        if !self.skipped.is_empty() {
            let _ = writeln!(md, "- skipped rows: {}", self.skipped.len());
        }
        md
    }
}
