//! The four subcommands. Each computes everything first and writes its
//! files at the end, so a failure leaves no partial output.

use std::path::{Path, PathBuf};

use cie_core::classwise::{
    cross_validate_weights, empty_explanation, optimize_class_explanation, weight_grid, ClassExplanation,
    DEFAULT_WEIGHT_LEVELS,
};
use cie_core::eval::{
    abstention_rate, build_global_explanation, classwise_fidelity, explain_classes, global_curve, greedy_baseline,
    instance_fidelity, random_baseline, top_by_support,
};
use cie_core::instance::explain_instance;
use cie_core::miner::{assemble, mine_class, mine_frequent_itemsets, MiningIndex};
use cie_core::{ConfidentItemsetStore, LabeledDataset, MiningConfig, ObjectiveConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Method, RunConfig, TOOL_VERSION};
use crate::error::{CliError, Result};
use crate::formats::*;
use crate::load::{load_eval, load_main, Records};

/// Mines every class in parallel; the result does not depend on the
/// thread count.
pub fn mine(dataset: &LabeledDataset, config: &MiningConfig) -> Result<ConfidentItemsetStore> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(CliError::Data("dataset is empty".into()));
    }
    let index = MiningIndex::new(dataset);
    let per_class: Vec<_> =
        (0..dataset.classes().len()).into_par_iter().map(|q| mine_class(dataset, &index, q, config)).collect();
    Ok(assemble(dataset, per_class)?)
}

fn store_path(config: &RunConfig, store: Option<&Path>) -> PathBuf {
    store.map(Path::to_path_buf).unwrap_or_else(|| config.out_dir().join("store.json"))
}

pub struct MineOutput {
    pub store: ConfidentItemsetStore,
    pub files: Vec<PathBuf>,
}

pub fn run_mine(config: &RunConfig) -> Result<MineOutput> {
    let dataset = load_main(config)?.dataset(config.data.classes.clone())?;
    let store = mine(&dataset, &config.mining_config()?)?;
    let hash = config.hash();
    let out = config.out_dir();
    let json = out.join("store.json");
    let txt = out.join("store.txt");
    write_atomic(&json, &to_json(&StoreFile::from_store(&store, TOOL_VERSION, &hash)))?;
    write_atomic(&txt, store_summary(&store, &hash).as_bytes())?;
    Ok(MineOutput { store, files: vec![json, txt] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    One(usize),
    All,
}

pub fn run_explain(
    config: &RunConfig,
    store: Option<&Path>,
    selector: Selector,
    limit: usize,
    text: bool,
) -> Result<Vec<ExplanationJson>> {
    let store = read_store(&store_path(config, store))?;
    let records = load_main(config)?;
    let n = records.instances.len();
    let rows: Vec<usize> = match selector {
        Selector::One(i) if i >= n => return Err(CliError::UnknownInstance { index: i, count: n }),
        Selector::One(i) => vec![i],
        Selector::All => (0..n).collect(),
    };
    let hash = config.hash();
    let explanations = rows
        .par_iter()
        .map(|&m| {
            let e = explain_instance(&records.instances[m], &store, limit)
                .map_err(|e| CliError::Data(format!("instance {m}: {e}")))?;
            let black_box = records.predictions.as_ref().map(|p| p[m].clone());
            let gold = records.gold.as_ref().and_then(|g| g[m].clone());
            Ok(ExplanationJson::new(m, &e, &store, black_box, gold, &hash))
        })
        .collect::<Result<Vec<_>>>()?;

    let out = config.out_dir();
    let mut lines = Vec::new();
    for e in &explanations {
        lines.extend(serde_json::to_vec(e).expect("serializable"));
        lines.push(b'\n');
    }
    write_atomic(&out.join("explanations.jsonl"), &lines)?;
    if text {
        let body: Vec<String> = explanations.iter().map(explanation_text).collect();
        let doc = format!("# cie {TOOL_VERSION} config {hash}\n\n{}", body.join("\n"));
        write_atomic(&out.join("explanations.txt"), doc.as_bytes())?;
    }
    Ok(explanations)
}

/// Weights picked by cross-validation when `cv_folds` is at least 2.
fn tuned_objective(
    base: &ObjectiveConfig,
    cv_folds: usize,
    seed: u64,
    store: &ConfidentItemsetStore,
    train: &LabeledDataset,
) -> Result<ObjectiveConfig> {
    if cv_folds < 2 {
        return Ok(*base);
    }
    let grid = weight_grid(&DEFAULT_WEIGHT_LEVELS);
    let cv = cross_validate_weights(store, train, &grid, base, cv_folds, seed)?;
    log::info!("cross-validation picked weights {:?} ({} folds skipped)", cv.config.weights, cv.skipped_folds);
    Ok(cv.config)
}

pub fn run_explain_class(
    config: &RunConfig,
    store: Option<&Path>,
    class: Option<&str>,
) -> Result<ClassExplanationsFile> {
    let store = read_store(&store_path(config, store))?;
    let dataset = load_main(config)?.dataset(Some(store.classes().to_vec()))?;
    let classes: Vec<usize> = match class {
        None => (0..store.classes().len()).collect(),
        Some(label) => vec![store
            .class_index(label)
            .ok_or_else(|| CliError::Usage(format!("class `{label}` is not in the store")))?],
    };
    let objective =
        tuned_objective(&config.objective_config(), config.objective.cv_folds, config.seed, &store, &dataset)?;
    objective.validate()?;
    let explanations = classes
        .par_iter()
        .map(|&q| -> Result<ClassExplanation> {
            let label = &store.classes()[q];
            if dataset.class_count(q) == 0 {
                log::warn!("class `{label}` has no instances; emitting an empty explanation");
                return Ok(empty_explanation(q, 0, &objective));
            }
            if store.class_itemsets(q).is_empty() {
                log::warn!("class `{label}` has no confident itemsets; emitting an empty explanation");
                return Ok(empty_explanation(q, dataset.class_count(q), &objective));
            }
            Ok(optimize_class_explanation(&store, q, &dataset, &objective)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let file = ClassExplanationsFile {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: config.hash(),
        explanations: explanations.iter().map(|e| ClassExplanationJson::new(e, &store, &objective)).collect(),
    };
    let out = config.out_dir();
    write_atomic(&out.join("class_explanations.json"), &to_json(&file))?;
    write_atomic(&out.join("class_explanations.txt"), class_explanations_text(&file).as_bytes())?;
    Ok(file)
}

/// Seeded split: a shuffled prefix of `round(fraction * n)` rows trains,
/// the rest evaluates. Both parts keep the original row order.
pub fn split_rows(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(CliError::Data(format!("cannot split {n} instances into training and evaluation parts")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut train = order[..cut].to_vec();
    let mut eval = order[cut..].to_vec();
    train.sort_unstable();
    eval.sort_unstable();
    Ok((train, eval))
}

fn class_list(config: &RunConfig, parts: &[&Records]) -> Result<Vec<String>> {
    if let Some(c) = &config.data.classes {
        return Ok(c.clone());
    }
    let mut out: Vec<String> = Vec::new();
    for r in parts {
        let labels = r
            .predictions
            .as_ref()
            .ok_or_else(|| CliError::Config("no predictions: set `prediction_column` or `predictions`".into()))?;
        for l in labels {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
    }
    Ok(out)
}

fn subset(records: &Records, rows: &[usize]) -> Records {
    Records {
        instances: rows.iter().map(|&m| records.instances[m].clone()).collect(),
        predictions: records.predictions.as_ref().map(|p| rows.iter().map(|&m| p[m].clone()).collect()),
        gold: records.gold.as_ref().map(|g| rows.iter().map(|&m| g[m].clone()).collect()),
    }
}

fn count_items(store: &ConfidentItemsetStore, selections: &[Vec<usize>]) -> (usize, usize) {
    let mut sets = 0;
    let mut items = 0;
    for (q, sel) in selections.iter().enumerate() {
        sets += sel.len();
        items += sel.iter().map(|&i| store.class_itemsets(q)[i].itemset.len()).sum::<usize>();
    }
    (sets, items)
}

fn everything(store: &ConfidentItemsetStore) -> Vec<Vec<usize>> {
    (0..store.classes().len()).map(|q| (0..store.class_itemsets(q).len()).collect()).collect()
}

/// A method at one K: the store it draws from and the chosen itemsets.
struct Pick {
    store: ConfidentItemsetStore,
    selections: Vec<Vec<usize>>,
}

struct Inputs<'a> {
    train: &'a LabeledDataset,
    eval: &'a LabeledDataset,
    store: &'a ConfidentItemsetStore,
    frequent: Option<&'a ConfidentItemsetStore>,
    objective: &'a ObjectiveConfig,
    seed: u64,
}

fn pick(method: Method, k: usize, inp: &Inputs) -> Result<Pick> {
    Ok(match method {
        Method::Cie => {
            let selections = if k == 0 {
                vec![Vec::new(); inp.store.classes().len()]
            } else {
                let objective = ObjectiveConfig { theta: [k, inp.objective.theta[1], inp.objective.theta[2]], ..*inp.objective };
                explain_classes(inp.store, inp.train, &objective)?.into_iter().map(|e| e.selection).collect()
            };
            Pick { store: inp.store.clone(), selections }
        }
        Method::Greedy => Pick { store: inp.store.clone(), selections: greedy_baseline(inp.store, k) },
        Method::Random => {
            let store = random_baseline(inp.train, k, inp.seed)?;
            let selections = everything(&store);
            Pick { store, selections }
        }
        Method::Frequent => {
            let store = inp.frequent.expect("frequent store mined").clone();
            let selections = top_by_support(&store, k);
            Pick { store, selections }
        }
    })
}

fn curve_row(k: usize, p: &Pick, eval: &LabeledDataset) -> Result<CurveRow> {
    let cut = p.store.select(&p.selections)?;
    let (num_itemsets, num_items) = count_items(&p.store, &p.selections);
    Ok(CurveRow {
        k,
        descriptive_accuracy: instance_fidelity(eval, &cut)?,
        classwise_fidelity: classwise_fidelity(eval, &p.store, &p.selections)?,
        num_itemsets,
        num_items,
    })
}

fn method_report(method: Method, inp: &Inputs, k_grid: &[usize]) -> Result<MethodReport> {
    let reference = pick(method, inp.objective.theta[0], inp)?;
    // the explainer's own store is its instance-wise model; baselines are cut to K
    let model = match method {
        Method::Cie => inp.store.clone(),
        _ => reference.store.select(&reference.selections)?,
    };
    let curve = k_grid
        .par_iter()
        .map(|&k| curve_row(k, &pick(method, k, inp)?, inp.eval))
        .collect::<Result<Vec<_>>>()?;
    let global = match method {
        Method::Cie => {
            let ranked = build_global_explanation(inp.store, &reference.selections, inp.train, usize::MAX)?;
            let points = global_curve(inp.eval, inp.store, &ranked, k_grid)?;
            Some(
                points
                    .into_iter()
                    .map(|p| GlobalRow { size: p.size, num_items: p.num_items, descriptive_accuracy: p.accuracy })
                    .collect(),
            )
        }
        _ => None,
    };
    Ok(MethodReport {
        method: method.name().to_string(),
        instance_fidelity: instance_fidelity(inp.eval, &model)?,
        classwise_fidelity: classwise_fidelity(inp.eval, &reference.store, &reference.selections)?,
        abstention_rate: abstention_rate(inp.eval, &model)?,
        curve,
        global,
    })
}

/// Settings for [`evaluate`].
#[derive(Debug, Clone)]
pub struct EvalSettings {
    pub mining: MiningConfig,
    pub objective: ObjectiveConfig,
    pub cv_folds: usize,
    pub methods: Vec<Method>,
    pub k_grid: Vec<usize>,
    pub min_support: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub store_size: usize,
    /// Objective after cross-validation, if any.
    pub objective: ObjectiveConfig,
    pub methods: Vec<MethodReport>,
}

/// Mines on `train` and scores every method on `eval`. The explainer's
/// instance fidelity uses the whole store; each baseline uses its `theta1`
/// itemsets per class.
pub fn evaluate(train: &LabeledDataset, eval: &LabeledDataset, settings: &EvalSettings) -> Result<Evaluation> {
    let store = mine(train, &settings.mining)?;
    let objective = tuned_objective(&settings.objective, settings.cv_folds, settings.seed, &store, train)?;
    let frequent = if settings.methods.contains(&Method::Frequent) {
        Some(mine_frequent_itemsets(train, settings.min_support, settings.mining.max_k)?)
    } else {
        None
    };
    let inputs = Inputs {
        train,
        eval,
        store: &store,
        frequent: frequent.as_ref(),
        objective: &objective,
        seed: settings.seed,
    };
    let methods = settings
        .methods
        .iter()
        .map(|&m| method_report(m, &inputs, &settings.k_grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation { store_size: store.len(), objective, methods })
}

pub fn run_evaluate(config: &RunConfig) -> Result<Report> {
    let main = load_main(config)?;
    let held = load_eval(config)?;
    let (train_rec, eval_rec, split) = match held {
        Some(eval) => {
            let info = SplitInfo {
                kind: "file".into(),
                train_fraction: None,
                seed: config.seed,
                train_instances: main.instances.len(),
                eval_instances: eval.instances.len(),
            };
            (main, eval, info)
        }
        None => {
            let (train_rows, eval_rows) = split_rows(main.instances.len(), config.evaluation.train_fraction, config.seed)?;
            let info = SplitInfo {
                kind: "random".into(),
                train_fraction: Some(config.evaluation.train_fraction),
                seed: config.seed,
                train_instances: train_rows.len(),
                eval_instances: eval_rows.len(),
            };
            (subset(&main, &train_rows), subset(&main, &eval_rows), info)
        }
    };
    let classes = class_list(config, &[&train_rec, &eval_rec])?;
    let train = train_rec.dataset(Some(classes.clone()))?;
    let eval = eval_rec.dataset(Some(classes.clone()))?;

    let settings = EvalSettings {
        mining: config.mining_config()?,
        objective: config.objective_config(),
        cv_folds: config.objective.cv_folds,
        methods: config.evaluation.methods.clone(),
        k_grid: config.evaluation.k_grid.clone(),
        min_support: config.evaluation.min_support,
        seed: config.seed,
    };
    let outcome = evaluate(&train, &eval, &settings)?;

    let black_box_accuracy = eval_rec.gold.as_ref().and_then(|gold| {
        let preds = eval_rec.predictions.as_ref()?;
        let pairs: Vec<bool> = gold.iter().zip(preds).filter_map(|(g, p)| g.as_ref().map(|g| g == p)).collect();
        (!pairs.is_empty()).then(|| pairs.iter().filter(|x| **x).count() as f64 / pairs.len() as f64)
    });

    let report = Report {
        tool_version: TOOL_VERSION.to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        dataset: config.dataset_name(),
        split,
        classes,
        store_size: outcome.store_size,
        black_box_accuracy,
        objective: (&outcome.objective).into(),
        methods: outcome.methods,
        config: config.echo(),
    };
    let out = config.out_dir();
    write_atomic(&out.join("report.json"), &to_json(&report))?;
    write_atomic(&out.join("report.csv"), &report_csv(&report)?)?;
    write_atomic(&out.join("report.txt"), report_text(&report).as_bytes())?;
    Ok(report)
}
