//! Shared helpers for the integration and acceptance tests: a seeded
//! planted-rule generator and a runner for the `cie` binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cie_core::{Item, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn cie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cie")).args(args).output().expect("binary runs")
}

/// Categorical data where each class owns `rules_per_class` two-item rules.
/// No instance contains a rule of another class; `noise` flips labels.
/// Without `leak`, planted values never fill the other cells, so a planted
/// item only occurs together with its rule.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub instances: usize,
    pub classes: usize,
    pub rules_per_class: usize,
    pub features: usize,
    pub values: usize,
    pub noise: f64,
    pub leak: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRule {
    pub class: usize,
    /// (feature, value) pairs.
    pub items: [(usize, usize); 2],
}

impl PlantedRule {
    pub fn rendered(&self) -> Vec<String> {
        let mut v: Vec<String> = self.items.iter().map(|&(f, x)| item(f, x).as_str().to_string()).collect();
        v.sort();
        v
    }
}

pub fn item(feature: usize, value: usize) -> Item {
    Item::categorical(format!("f{feature}"), format!("v{value}")).unwrap()
}

pub fn class_name(q: usize) -> String {
    format!("c{q}")
}

impl Synthetic {
    pub fn new(instances: usize, classes: usize, seed: u64) -> Self {
        Synthetic { instances, classes, rules_per_class: 2, features: 8, values: 12, noise: 0.0, leak: false, seed }
    }

    /// Rule `j` takes the items numbered `2j` and `2j + 1`, where item `i`
    /// is feature `i % features` with value `i / features`.
    pub fn rules(&self) -> Vec<PlantedRule> {
        assert!(self.features % 2 == 0 && 2 * self.classes * self.rules_per_class <= self.features * self.values);
        (0..self.classes * self.rules_per_class)
            .map(|j| {
                let at = |i: usize| (i % self.features, i / self.features);
                PlantedRule { class: j / self.rules_per_class, items: [at(2 * j), at(2 * j + 1)] }
            })
            .collect()
    }

    /// Rows of value indices and their labels.
    pub fn rows(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let rules = self.rules();
        let free: Vec<Vec<usize>> = (0..self.features)
            .map(|f| {
                (0..self.values)
                    .filter(|&v| self.leak || !rules.iter().any(|r| r.items.contains(&(f, v))))
                    .collect()
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut rows = Vec::with_capacity(self.instances);
        let mut labels = Vec::with_capacity(self.instances);
        for _ in 0..self.instances {
            let q = rng.random_range(0..self.classes);
            let own = q * self.rules_per_class + rng.random_range(0..self.rules_per_class);
            let row = loop {
                let mut row: Vec<usize> = free.iter().map(|vals| vals[rng.random_range(0..vals.len())]).collect();
                for &(f, v) in &rules[own].items {
                    row[f] = v;
                }
                let foreign = rules
                    .iter()
                    .enumerate()
                    .any(|(j, r)| j != own && r.items.iter().all(|&(f, v)| row[f] == v));
                if !foreign {
                    break row;
                }
            };
            let mut label = q;
            if self.classes > 1 && rng.random::<f64>() < self.noise {
                label = (q + rng.random_range(1..self.classes)) % self.classes;
            }
            rows.push(row);
            labels.push(label);
        }
        (rows, labels)
    }

    pub fn dataset(&self) -> LabeledDataset {
        let (rows, labels) = self.rows();
        dataset_from(&rows, &labels, self.classes)
    }

    pub fn csv(&self) -> String {
        let (rows, labels) = self.rows();
        let mut out: Vec<String> = (0..self.features).map(|f| format!("f{f}")).collect();
        out.push("label".into());
        let mut text = out.join(",") + "\n";
        for (row, label) in rows.iter().zip(&labels) {
            let mut cells: Vec<String> = row.iter().map(|v| format!("v{v}")).collect();
            cells.push(class_name(*label));
            text += &(cells.join(",") + "\n");
        }
        text
    }

    /// Run configuration for the CSV written next to it as `data`.
    pub fn config(&self, data: &str, min_conf: f64) -> String {
        let columns: Vec<String> =
            (0..self.features).map(|f| format!(r#"      {{"name": "f{f}", "type": "categorical"}}"#)).collect();
        let classes: Vec<String> = (0..self.classes).map(|q| format!("\"{}\"", class_name(q))).collect();
        format!(
            "{{\n  \"data\": {{\n    \"format\": \"tabular\",\n    \"path\": \"{data}\",\n    \"prediction_column\": \"label\",\n    \"classes\": [{}],\n    \"columns\": [\n{}\n    ]\n  }},\n  \"mining\": {{\"min_conf\": {min_conf}, \"max_k\": 3}},\n  \"seed\": {}\n}}\n",
            classes.join(", "),
            columns.join(",\n"),
            self.seed
        )
    }
}

pub fn dataset_from(rows: &[Vec<usize>], labels: &[usize], classes: usize) -> LabeledDataset {
    let instances: Vec<Vec<Item>> =
        rows.iter().map(|r| r.iter().enumerate().map(|(f, &v)| item(f, v)).collect()).collect();
    let names: Vec<String> = labels.iter().map(|&q| class_name(q)).collect();
    LabeledDataset::new(instances, &names, Some((0..classes).map(class_name).collect())).unwrap()
}

/// The committed planted-rule fixtures: (file stem, generator, min_conf).
pub fn committed_synthetic() -> Vec<(&'static str, Synthetic, f64)> {
    vec![
        ("planted_q2", Synthetic::new(500, 2, 11), 0.8),
        ("planted_q3", Synthetic::new(500, 3, 12), 0.8),
        ("planted_q4", Synthetic::new(500, 4, 13), 0.8),
    ]
}

/// Noisy data for comparing methods: planted items leak into other
/// instances, so single items are weaker evidence than the rules.
pub fn noisy_planted(seed: u64) -> Synthetic {
    Synthetic { rules_per_class: 4, values: 6, noise: 0.1, leak: true, ..Synthetic::new(500, 2, seed) }
}

/// Runs mine, explain, explain-class and evaluate into `out` and returns
/// every output file by name.
pub fn pipeline(config: &Path, out: &Path, threads: usize) -> Result<std::collections::BTreeMap<String, Vec<u8>>, String> {
    let (c, o, t) = (config.to_str().unwrap(), out.to_str().unwrap(), threads.to_string());
    let shared = ["--config", c, "--out-dir", o, "--threads", t.as_str()];
    let steps: [&[&str]; 4] = [
        &["mine"],
        &["explain", "--all", "--text"],
        &["explain-class"],
        &["evaluate", "--methods", "cie,greedy,random,frequent", "--k-grid", "5:50:5"],
    ];
    for step in steps {
        let args: Vec<&str> = step.iter().chain(shared.iter()).copied().collect();
        let run = cie(&args);
        if !run.status.success() {
            return Err(format!("`cie {}` failed: {}", args.join(" "), String::from_utf8_lossy(&run.stderr)));
        }
    }
    let mut files = std::collections::BTreeMap::new();
    for entry in std::fs::read_dir(out).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

/// Configs exercised by the determinism checks.
pub fn determinism_configs() -> Vec<PathBuf> {
    vec![fixtures().join("synthetic/planted_q3.config.json"), fixtures().join("fig4/config.json")]
}

/// Byte-compares reruns with one thread and with four.
pub fn check_determinism(config: &Path) -> Result<usize, String> {
    let tmp = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let first = pipeline(config, &tmp.path().join("a"), 1)?;
    let again = pipeline(config, &tmp.path().join("b"), 1)?;
    let wide = pipeline(config, &tmp.path().join("c"), 4)?;
    if first.len() != 9 {
        return Err(format!("expected 9 output files, got {:?}", first.keys().collect::<Vec<_>>()));
    }
    for (label, other) in [("rerun", &again), ("--threads 4", &wide)] {
        if *other != first {
            let differing: Vec<&String> =
                first.keys().filter(|k| other.get(*k) != first.get(*k)).collect();
            return Err(format!("{label} differs in {differing:?}"));
        }
    }
    Ok(first.len())
}
