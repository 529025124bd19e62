//! File formats: store JSON, explanation JSON lines, class explanations,
//! reports, and fixed-width text renderings.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use cie_core::classwise::ClassExplanation;
use cie_core::{ConfidentItemset, ConfidentItemsetStore, InstanceExplanation, Item, Itemset, ObjectiveConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredItemset {
    pub class: String,
    pub items: Vec<String>,
    pub confidence: f64,
    pub class_support: f64,
    pub overall_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoreFile {
    pub tool_version: String,
    pub config_hash: String,
    pub classes: Vec<String>,
    /// Tabular feature names; absent for text stores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<String>>,
    pub itemsets: Vec<StoredItemset>,
}

impl StoreFile {
    pub fn from_store(store: &ConfidentItemsetStore, tool_version: &str, config_hash: &str) -> Self {
        StoreFile {
            tool_version: tool_version.to_string(),
            config_hash: config_hash.to_string(),
            classes: store.classes().to_vec(),
            features: store.features().map(<[String]>::to_vec),
            itemsets: store
                .iter()
                .map(|c| StoredItemset {
                    class: store.classes()[c.class].clone(),
                    items: item_strings(&c.itemset),
                    confidence: c.confidence,
                    class_support: c.class_support,
                    overall_support: c.overall_support,
                })
                .collect(),
        }
    }

    pub fn to_store(&self) -> Result<ConfidentItemsetStore> {
        let bad = |m: String| CliError::Data(format!("store: {m}"));
        let itemsets = self
            .itemsets
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let class = self
                    .classes
                    .iter()
                    .position(|c| *c == s.class)
                    .ok_or_else(|| bad(format!("itemset #{i} has unknown class `{}`", s.class)))?;
                let items = s
                    .items
                    .iter()
                    .map(|t| t.parse::<Item>().map_err(|e| bad(format!("itemset #{i}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                let itemset = Itemset::new(items).map_err(|e| bad(format!("itemset #{i}: {e}")))?;
                for (name, v) in [("class_support", s.class_support), ("overall_support", s.overall_support)] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(bad(format!("itemset #{i}: {name} {v} outside [0, 1]")));
                    }
                }
                if !(s.confidence.is_finite() && s.confidence >= 0.0) {
                    return Err(bad(format!("itemset #{i}: bad confidence {}", s.confidence)));
                }
                Ok(ConfidentItemset {
                    itemset,
                    class,
                    confidence: s.confidence,
                    class_support: s.class_support,
                    overall_support: s.overall_support,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ConfidentItemsetStore::new(self.classes.clone(), self.features.clone(), itemsets).map_err(|e| bad(e.to_string()))
    }
}

pub fn read_store(path: &Path) -> Result<ConfidentItemsetStore> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: StoreFile =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    file.to_store().map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn item_strings(set: &Itemset) -> Vec<String> {
    set.items().iter().map(|i| i.as_str().to_string()).collect()
}

fn fmt3(v: f64) -> String {
    format!("{v:.3}")
}

/// Fixed-width table: every column padded to its widest cell.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |cells: &mut dyn Iterator<Item = &str>, out: &mut String| {
        let parts: Vec<String> = cells.zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied(), &mut out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut rule.iter().map(String::as_str), &mut out);
    for row in rows {
        line(&mut row.iter().map(String::as_str), &mut out);
    }
    out
}

/// One section per class listing itemset, confidence and class support.
pub fn store_summary(store: &ConfidentItemsetStore, config_hash: &str) -> String {
    let mut out = format!("# cie {} config {config_hash}\n", crate::config::TOOL_VERSION);
    for (q, class) in store.classes().iter().enumerate() {
        let list = store.class_itemsets(q);
        let _ = writeln!(out, "\nClass: {class} ({} itemsets)", list.len());
        let rows: Vec<Vec<String>> = list
            .iter()
            .map(|c| vec![c.itemset.to_string(), fmt3(c.confidence), fmt3(c.class_support)])
            .collect();
        out.push_str(&table(&["Itemset", "Confidence", "Class_support"], &rows));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedItemset {
    pub items: Vec<String>,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEvidenceJson {
    pub class: String,
    pub score: f64,
    pub support: f64,
    pub itemsets: Vec<MatchedItemset>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationJson {
    pub instance: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub black_box: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
    pub approximated: Option<String>,
    pub classes: Vec<ClassEvidenceJson>,
    pub tool_version: String,
    pub config_hash: String,
}

impl ExplanationJson {
    pub fn new(
        instance: usize,
        explanation: &InstanceExplanation,
        store: &ConfidentItemsetStore,
        black_box: Option<String>,
        gold: Option<String>,
        config_hash: &str,
    ) -> Self {
        let labels = store.classes();
        ExplanationJson {
            instance,
            black_box,
            gold,
            approximated: explanation.approximated.map(|q| labels[q].clone()),
            classes: explanation
                .classes
                .iter()
                .map(|c| ClassEvidenceJson {
                    class: labels[c.class].clone(),
                    score: c.score,
                    support: c.support,
                    itemsets: c
                        .matched
                        .iter()
                        .map(|&i| {
                            let ci = &store.class_itemsets(c.class)[i];
                            MatchedItemset { items: item_strings(&ci.itemset), confidence: ci.confidence }
                        })
                        .collect(),
                })
                .collect(),
            tool_version: crate::config::TOOL_VERSION.to_string(),
            config_hash: config_hash.to_string(),
        }
    }
}

/// Side-by-side rendering of the two best classes.
pub fn explanation_text(e: &ExplanationJson) -> String {
    let mut out = format!("Instance {}\n", e.instance);
    let show = |v: &Option<String>| v.clone().unwrap_or_else(|| "-".into());
    let _ = writeln!(
        out,
        "Real class: {}  Predicted by black-box: {}  Approximated by CIE: {}",
        show(&e.gold),
        show(&e.black_box),
        e.approximated.clone().unwrap_or_else(|| "(abstain)".into())
    );
    if e.classes.is_empty() {
        out.push_str("No stored itemset matches this instance.\n");
        return out;
    }
    let shown = &e.classes[..e.classes.len().min(2)];
    let mut header = Vec::new();
    let mut columns: Vec<Vec<Vec<String>>> = Vec::new();
    for c in shown {
        header.push(format!("Class: {} Score: {:.3}", c.class, c.score));
        columns.push(c.itemsets.iter().map(|m| vec![m.items.join(", "), fmt3(m.confidence)]).collect());
    }
    let depth = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = Vec::new();
    for (c, h) in columns.iter().zip(&header) {
        let item_w = c.iter().map(|r| r[0].chars().count()).max().unwrap_or(0).max("Itemset".len());
        let conf_w = "Confidence".len();
        widths.push((item_w, conf_w, h.chars().count().max(item_w + 2 + conf_w)));
    }
    let row = |cells: Vec<String>| cells.join(" | ").trim_end_matches([' ', '|']).to_string() + "\n";
    out.push_str(&row(header.iter().zip(&widths).map(|(h, w)| format!("{h:<0$}", w.2)).collect()));
    out.push_str(&row(
        widths.iter().map(|w| format!("{:<iw$}  {:<cw$}", "Itemset", "Confidence", iw = w.0, cw = w.2 - w.0 - 2)).collect(),
    ));
    for r in 0..depth {
        let cells = columns
            .iter()
            .zip(&widths)
            .map(|(c, w)| match c.get(r) {
                Some(cell) => format!("{:<iw$}  {:<cw$}", cell[0], cell[1], iw = w.0, cw = w.2 - w.0 - 2),
                None => " ".repeat(w.2),
            })
            .collect();
        out.push_str(&row(cells));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveEcho {
    pub weights: [f64; 6],
    pub theta: [usize; 3],
    pub delta: f64,
    pub k: usize,
}

impl From<&ObjectiveConfig> for ObjectiveEcho {
    fn from(c: &ObjectiveConfig) -> Self {
        ObjectiveEcho { weights: c.weights, theta: c.theta, delta: c.delta, k: c.k }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsJson {
    pub fidelity: f64,
    pub size: usize,
    pub num_items: usize,
    pub max_length: usize,
    pub itemset_overlap: usize,
    pub coverage: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainedItemset {
    pub items: Vec<String>,
    pub confidence: f64,
    pub class_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassExplanationJson {
    pub class: String,
    pub itemsets: Vec<ExplainedItemset>,
    pub metrics: MetricsJson,
    pub rewards: [f64; 6],
    pub objective: f64,
    pub config_echo: ObjectiveEcho,
}

impl ClassExplanationJson {
    pub fn new(e: &ClassExplanation, store: &ConfidentItemsetStore, config: &ObjectiveConfig) -> Self {
        let list = store.class_itemsets(e.class);
        let m = &e.metrics;
        ClassExplanationJson {
            class: store.classes()[e.class].clone(),
            itemsets: e
                .selection
                .iter()
                .map(|&i| ExplainedItemset {
                    items: item_strings(&list[i].itemset),
                    confidence: list[i].confidence,
                    class_support: list[i].class_support,
                })
                .collect(),
            metrics: MetricsJson {
                fidelity: m.fidelity,
                size: m.size,
                num_items: m.num_items,
                max_length: m.max_length,
                itemset_overlap: m.itemset_overlap,
                coverage: m.coverage,
            },
            rewards: e.rewards.0,
            objective: e.objective,
            config_echo: config.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassExplanationsFile {
    pub tool_version: String,
    pub config_hash: String,
    pub explanations: Vec<ClassExplanationJson>,
}

pub fn class_explanations_text(file: &ClassExplanationsFile) -> String {
    let mut out = format!("# cie {} config {}\n", file.tool_version, file.config_hash);
    for e in &file.explanations {
        let m = &e.metrics;
        let _ = writeln!(
            out,
            "\nClass: {}  objective {:.4}  fidelity {:.3}  size {}  items {}  max_length {}  overlap {}  coverage {}",
            e.class, e.objective, m.fidelity, m.size, m.num_items, m.max_length, m.itemset_overlap, m.coverage
        );
        let rows: Vec<Vec<String>> = e
            .itemsets
            .iter()
            .map(|c| vec![c.items.join(", "), fmt3(c.confidence), fmt3(c.class_support)])
            .collect();
        out.push_str(&table(&["Itemset", "Confidence", "Class_support"], &rows));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub k: usize,
    /// Instance fidelity of the store cut down to the selected itemsets.
    pub descriptive_accuracy: f64,
    pub classwise_fidelity: f64,
    pub num_itemsets: usize,
    pub num_items: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRow {
    pub size: usize,
    pub num_items: usize,
    pub descriptive_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub instance_fidelity: f64,
    pub classwise_fidelity: f64,
    pub abstention_rate: f64,
    pub curve: Vec<CurveRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<Vec<GlobalRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    /// `"random"` for a seeded split of the main file, `"file"` otherwise.
    pub kind: String,
    pub train_fraction: Option<f64>,
    pub seed: u64,
    pub train_instances: usize,
    pub eval_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub dataset: String,
    pub split: SplitInfo,
    pub classes: Vec<String>,
    pub store_size: usize,
    /// Black-box accuracy against `gold` labels on the evaluation split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub black_box_accuracy: Option<f64>,
    pub objective: ObjectiveEcho,
    pub methods: Vec<MethodReport>,
    pub config: serde_json::Value,
}

/// One row per method and K.
pub fn report_csv(report: &Report) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record([
        "method",
        "dataset",
        "k",
        "descriptive_accuracy",
        "classwise_fidelity",
        "num_itemsets",
        "num_items",
        "seed",
        "config_hash",
    ])
    .map_err(err)?;
    for m in &report.methods {
        for r in &m.curve {
            w.write_record([
                m.method.clone(),
                report.dataset.clone(),
                r.k.to_string(),
                r.descriptive_accuracy.to_string(),
                r.classwise_fidelity.to_string(),
                r.num_itemsets.to_string(),
                r.num_items.to_string(),
                report.seed.to_string(),
                report.config_hash.clone(),
            ])
            .map_err(err)?;
        }
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

pub fn report_text(report: &Report) -> String {
    let mut out = format!(
        "# cie {} config {} seed {}\ndataset {}  train {}  eval {}  store {} itemsets\n\n",
        report.tool_version,
        report.config_hash,
        report.seed,
        report.dataset,
        report.split.train_instances,
        report.split.eval_instances,
        report.store_size
    );
    let rows: Vec<Vec<String>> = report
        .methods
        .iter()
        .map(|m| {
            vec![m.method.clone(), fmt3(m.instance_fidelity), fmt3(m.classwise_fidelity), fmt3(m.abstention_rate)]
        })
        .collect();
    out.push_str(&table(&["Method", "Instance_fidelity", "Classwise_fidelity", "Abstention"], &rows));
    out
}
