//! Subcommand bodies. Each returns `Ok(false)` when some items failed
//! but the rest were processed.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use policykit::classifiers::{train as train_classifier, ExternalResources, HierarchyClassifier, TrainOptions};
use policykit::corpus::{corpus_kappa, corpus_statistics, load_corpus, write_statistics_csv, Corpus, SplitMode, SplitSpec};
use policykit::evaluation::{
    compare_frameworks, evaluate_trained, make_split, render_table, write_report_csv, write_summary_csv, EvalOptions,
    ExperimentSpec,
};
use policykit::features::{load_embeddings, EmbeddingStore, FeatureConfig, KeywordTable};
use policykit::forest::ForestParams;
use policykit::html::{
    find_policy_links, find_registration_links, load_clean_body, parse_html, to_html, ExtractionConfig, Link,
};
use policykit::structure::{
    evaluate_block_classifier, label_blocks, page_blocks, parse_block_samples, parse_ppxml, serialize_ppxml,
    structure_page, train_block_classifier, validation_report, write_block_samples, BlockClassifierModel,
};
use policykit::Taxonomy;

struct Resources {
    taxonomy: Taxonomy,
    keywords: KeywordTable,
    embeddings: Option<EmbeddingStore>,
}

impl Resources {
    fn load(cfg: &PipelineConfig) -> Result<Self> {
        let taxonomy = match &cfg.taxonomy {
            Some(p) => Taxonomy::load(p).with_context(|| format!("taxonomy {}", p.display()))?,
            None => Taxonomy::builtin(),
        };
        let keywords = match &cfg.keywords {
            Some(p) => KeywordTable::load(p, &taxonomy).with_context(|| format!("keywords {}", p.display()))?,
            None => KeywordTable::builtin(&taxonomy)?,
        };
        let embeddings = match &cfg.embeddings {
            Some(p) => Some(load_embeddings(p).with_context(|| format!("embeddings {}", p.display()))?),
            None => None,
        };
        Ok(Self { taxonomy, keywords, embeddings })
    }

    fn external(&self) -> ExternalResources<'_> {
        ExternalResources { taxonomy: &self.taxonomy, keywords: Some(&self.keywords), embeddings: self.embeddings.as_ref() }
    }

    fn feature_config(&self, type_id: u8) -> Result<FeatureConfig> {
        Ok(FeatureConfig::for_type(type_id, self.embeddings.as_ref().map(EmbeddingStore::dim))?)
    }

    fn report_missing(&self) {
        if let Some(e) = &self.embeddings {
            let n = e.missing_lookups();
            if n > 0 {
                warn!("{n} embedding lookups had no record and used zero vectors");
            }
        }
    }
}

fn experiment(cfg: &PipelineConfig) -> ExperimentSpec {
    ExperimentSpec {
        n_test_docs: cfg.n_test,
        test_fraction: cfg.test_fraction,
        train: TrainOptions { min_pos: cfg.min_pos, ..TrainOptions::default() },
        eval: EvalOptions { min_support: cfg.min_support, ..EvalOptions::default() },
    }
}

fn load_labelled(cfg: &PipelineConfig, t: &Taxonomy) -> Result<Corpus> {
    let dir = cfg.corpus_dir()?;
    let corpus = load_corpus(dir, t).with_context(|| format!("corpus {}", dir.display()))?;
    if corpus.is_empty() {
        bail!("corpus {} holds no .ppxml files", dir.display());
    }
    Ok(corpus)
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let mut w = create_file(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn split_path(cfg: &PipelineConfig) -> PathBuf {
    cfg.model_dir.join(format!("split-{}-s{}.tsv", cfg.split_mode, cfg.seed))
}

fn bundle_path(cfg: &PipelineConfig, type_id: u8) -> PathBuf {
    cfg.model_dir.join(format!("type{type_id}-{}-s{}", cfg.split_mode, cfg.seed))
}

// ---------------------------------------------------------------------------
// extract

fn html_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == "html" || e == "htm"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    let mut stems: Vec<String> = files.iter().map(|f| stem(f)).collect();
    stems.sort();
    if let Some(w) = stems.windows(2).find(|w| w[0] == w[1]) {
        bail!("two inputs would both write {}.ppxml", w[0]);
    }
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn describe_links(links: &[Link]) -> String {
    links.iter().map(|l| format!("{:?} -> {}", l.text, l.href)).collect::<Vec<_>>().join(", ")
}

/// Text for a page without a usable policy element: the policy links on
/// the page, or failing that its registration links.
fn escalation(html: &str) -> String {
    let page = parse_html(html);
    let policy = find_policy_links(&page);
    if !policy.is_empty() {
        return format!("no policy element found; open one of the candidate policy links and save it: {}", describe_links(&policy));
    }
    let register = find_registration_links(&page);
    if !register.is_empty() {
        return format!(
            "no policy element found and no policy links; look for the policy on a registration page: {}",
            describe_links(&register)
        );
    }
    "no policy element found and no candidate links; locate the policy page manually".into()
}

struct ExtractOutcome {
    file: PathBuf,
    nodes: usize,
    result: Result<Vec<String>, String>,
}

fn extract_one(file: &Path, out: &Path, cfg: &PipelineConfig, model: Option<&BlockClassifierModel>) -> ExtractOutcome {
    let run = || -> Result<(usize, Vec<String>), String> {
        let bytes = fs::read(file).map_err(|e| format!("unreadable: {e}"))?;
        let html = String::from_utf8_lossy(&bytes);
        let audit = out.join(format!("{}.clean.html", stem(file)));
        fs::write(&audit, to_html(&load_clean_body(&html))).map_err(|e| format!("writing {}: {e}", audit.display()))?;
        let ecfg = ExtractionConfig::new(cfg.r_h).map_err(|e| e.to_string())?;
        let mut doc = structure_page(&html, &ecfg, model);
        let nodes = doc.text_nodes();
        let chars: usize = nodes.iter().map(|n| n.text.chars().count()).sum();
        if nodes.is_empty() || chars < cfg.min_policy_chars {
            return Err(escalation(&html));
        }
        let n = nodes.len();
        doc.source = Some(file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
        let bytes = serialize_ppxml(&doc).map_err(|e| e.to_string())?;
        let target = out.join(format!("{}.ppxml", stem(file)));
        fs::write(&target, bytes).map_err(|e| format!("writing {}: {e}", target.display()))?;
        Ok((n, validation_report(&doc)))
    };
    match run() {
        Ok((nodes, notes)) => ExtractOutcome { file: file.to_path_buf(), nodes, result: Ok(notes) },
        Err(e) => ExtractOutcome { file: file.to_path_buf(), nodes: 0, result: Err(e) },
    }
}

pub fn extract(cfg: &PipelineConfig, inputs: &[PathBuf], out: &Path) -> Result<bool> {
    let files = html_inputs(inputs)?;
    if files.is_empty() {
        bail!("no .html inputs found");
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let model = match &cfg.block_model {
        Some(p) => Some(BlockClassifierModel::load(p).with_context(|| format!("block model {}", p.display()))?),
        None => None,
    };
    let outcomes: Vec<ExtractOutcome> = files.par_iter().map(|f| extract_one(f, out, cfg, model.as_ref())).collect();

    let mut report = String::from("file\tstatus\tnodes\tdetails\n");
    let mut failed = 0;
    for o in &outcomes {
        let name = o.file.display();
        match &o.result {
            Ok(notes) => report.push_str(&format!("{name}\tok\t{}\t{}\n", o.nodes, notes.join("; "))),
            Err(e) => {
                failed += 1;
                eprintln!("failed: {name}: {e}");
                report.push_str(&format!("{name}\tfailed\t0\t{e}\n"));
            }
        }
    }
    let report_path = out.join("extract_report.tsv");
    write_text(&report_path, &report)?;
    println!(
        "extract: {}/{} pages written to {}; report {}",
        outcomes.len() - failed,
        outcomes.len(),
        out.display(),
        report_path.display()
    );
    Ok(failed == 0)
}

// ---------------------------------------------------------------------------
// structure

type Samples = Vec<(policykit::structure::BlockFeatures, policykit::structure::BlockClass)>;

fn labelled_blocks(cfg: &PipelineConfig, pages: &Path, gold: &Path) -> Result<(Samples, Vec<String>)> {
    let mut golds: Vec<PathBuf> = fs::read_dir(gold)
        .with_context(|| format!("listing {}", gold.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "ppxml"))
        .collect();
    golds.sort();
    let ecfg = ExtractionConfig::new(cfg.r_h)?;
    let per_page: Vec<Result<Samples, String>> = golds
        .par_iter()
        .map(|g| {
            let id = stem(g);
            let page = pages.join(format!("{id}.html"));
            let html = fs::read(&page).map_err(|e| format!("{}: {e}", page.display()))?;
            let doc = parse_ppxml(&fs::read(g).map_err(|e| format!("{}: {e}", g.display()))?)
                .map_err(|e| format!("{}: {e}", g.display()))?;
            Ok(label_blocks(page_blocks(&String::from_utf8_lossy(&html), &ecfg), &doc))
        })
        .collect();
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for r in per_page {
        match r {
            Ok(s) => samples.extend(s),
            Err(e) => failures.push(e),
        }
    }
    Ok((samples, failures))
}

pub fn structure(
    cfg: &PipelineConfig,
    pages: Option<&Path>,
    gold: Option<&Path>,
    samples: Option<&Path>,
    samples_out: Option<&Path>,
) -> Result<bool> {
    let (samples, failures) = match (samples, pages, gold) {
        (Some(p), _, _) => {
            let f = fs::File::open(p).with_context(|| format!("block samples {}", p.display()))?;
            (parse_block_samples(std::io::BufReader::new(f)).with_context(|| p.display().to_string())?, Vec::new())
        }
        (None, Some(pages), Some(gold)) => labelled_blocks(cfg, pages, gold)?,
        _ => bail!("pass --samples, or --pages with --gold"),
    };
    for f in &failures {
        eprintln!("failed: {f}");
    }
    if let Some(p) = samples_out {
        let mut w = create_file(p)?;
        write_block_samples(&samples, &mut w)?;
    }
    let params = ForestParams::extra_trees();
    let ev = evaluate_block_classifier(&samples, &params, 5, 0.2, cfg.seed)?;
    let model = train_block_classifier(&samples, &params, cfg.seed)?;
    let model_path = cfg.model_dir.join("blocks.ppsb");
    fs::create_dir_all(&cfg.model_dir)?;
    model.save(&model_path)?;

    let mut report = String::from("part,f1\n");
    for (i, f) in ev.fold_f1.iter().enumerate() {
        report.push_str(&format!("fold{},{f:.6}\n", i + 1));
    }
    report.push_str(&format!("test,{:.6}\n", ev.test_f1));
    let report_path = cfg.report_dir.join("block_report.csv");
    write_text(&report_path, &report)?;
    let mean = ev.fold_f1.iter().sum::<f64>() / ev.fold_f1.len().max(1) as f64;
    println!(
        "structure: {} samples, 5-fold mean F1 {mean:.3}, held-out F1 {:.3}; model {}; report {}",
        samples.len(),
        ev.test_f1,
        model_path.display(),
        report_path.display()
    );
    Ok(failures.is_empty())
}

// ---------------------------------------------------------------------------
// train / eval

pub fn train(cfg: &PipelineConfig) -> Result<bool> {
    let res = Resources::load(cfg)?;
    let configs: Vec<FeatureConfig> = cfg.types.iter().map(|&t| res.feature_config(t)).collect::<Result<_>>()?;
    let corpus = load_labelled(cfg, &res.taxonomy)?;
    let spec = experiment(cfg);
    let split = make_split(&corpus, cfg.split_mode, &spec, cfg.seed)?;
    fs::create_dir_all(&cfg.model_dir)?;
    split.save(&split_path(cfg))?;
    for fc in &configs {
        info!("training type {} on {} split, seed {}", fc.type_id, cfg.split_mode, cfg.seed);
        let h = train_classifier(&corpus, &split, fc, &res.external(), &spec.train, cfg.seed)?;
        let dir = bundle_path(cfg, fc.type_id);
        h.save(&dir).with_context(|| format!("writing bundle {}", dir.display()))?;
        write_text(&dir.join("pipeline.cfg"), &cfg.to_text())?;
        println!(
            "train: type {} ({}) {} concepts covered, {} skipped -> {}",
            fc.type_id,
            fc.architecture(),
            h.covered_concepts().len(),
            h.skipped.len(),
            dir.display()
        );
    }
    res.report_missing();
    Ok(true)
}

pub fn eval(cfg: &PipelineConfig) -> Result<bool> {
    let res = Resources::load(cfg)?;
    let corpus = load_labelled(cfg, &res.taxonomy)?;
    let sp = split_path(cfg);
    if !sp.exists() {
        bail!("split file not found: {} (run `policykit train` with the same mode and seed)", sp.display());
    }
    let split = SplitSpec::load(&sp)?;
    let spec = experiment(cfg);
    for &type_id in &cfg.types {
        res.feature_config(type_id)?;
        let dir = bundle_path(cfg, type_id);
        if !dir.join("manifest").exists() {
            bail!("model bundle not found: {} (run `policykit train --types {type_id}` first)", dir.display());
        }
        let h = HierarchyClassifier::load(&dir).with_context(|| format!("bundle {}", dir.display()))?;
        let report = evaluate_trained(&corpus, &split, &h, &res.external(), &spec.eval)?;
        let path = cfg.report_dir.join(format!("report-type{type_id}-{}-s{}.csv", cfg.split_mode, cfg.seed));
        write_report_csv(std::slice::from_ref(&report), create_file(&path)?)?;
        println!(
            "eval: type {type_id} {} seed {}: macro F1 level-1 {:.3} ({} concepts), all {:.3} ({} concepts) -> {}",
            cfg.split_mode,
            cfg.seed,
            report.macro_f1_level1,
            report.evaluated_level1.len(),
            report.macro_f1_all,
            report.evaluated_all.len(),
            path.display()
        );
    }
    res.report_missing();
    Ok(true)
}

// ---------------------------------------------------------------------------
// compare

pub fn compare(cfg: &PipelineConfig) -> Result<bool> {
    let res = Resources::load(cfg)?;
    let mut configs = Vec::new();
    for &t in &cfg.types {
        match res.feature_config(t) {
            Ok(c) => configs.push(c),
            Err(e) if res.embeddings.is_none() => warn!("skipping type {t}: {e}"),
            Err(e) => return Err(e),
        }
    }
    if configs.is_empty() {
        bail!("no runnable feature types among {:?}", cfg.types);
    }
    let corpus = load_labelled(cfg, &res.taxonomy)?;
    let mut modes: Vec<SplitMode> = cfg.modes.clone();
    modes.sort();
    modes.dedup();
    let table = compare_frameworks(&corpus, &configs, &modes, &cfg.seeds, &res.external(), &experiment(cfg))?;
    let dir = &cfg.report_dir;
    write_report_csv(&table.reports, create_file(&dir.join("compare_report.csv"))?)?;
    write_summary_csv(&table, create_file(&dir.join("compare_summary.csv"))?)?;
    let rendered = render_table(&table);
    write_text(&dir.join("compare_table.txt"), &rendered)?;
    write_text(&dir.join("compare.cfg"), &cfg.to_text())?;
    print!("{rendered}");
    println!(
        "compare: {} runs ({} types x {} modes x {} seeds) -> {}",
        table.reports.len(),
        configs.len(),
        modes.len(),
        cfg.seeds.len(),
        dir.display()
    );
    res.report_missing();
    Ok(true)
}

// ---------------------------------------------------------------------------
// stats / kappa

pub fn stats(cfg: &PipelineConfig, include_descendants: bool) -> Result<bool> {
    let res = Resources::load(cfg)?;
    let corpus = load_labelled(cfg, &res.taxonomy)?;
    let rows = corpus_statistics(&corpus, &res.taxonomy, include_descendants);
    let path = cfg.report_dir.join("statistics.csv");
    write_statistics_csv(&rows, create_file(&path)?)?;
    let (docs, titles, paragraphs) = corpus.summary();
    let covered = rows.iter().filter(|r| r.docs_covered > 0).count();
    println!(
        "stats: {docs} documents, {titles} titles, {paragraphs} paragraphs; {covered}/{} concepts covered -> {}",
        rows.len(),
        path.display()
    );
    Ok(true)
}

pub fn kappa(cfg: &PipelineConfig, first: &Path, second: &Path) -> Result<bool> {
    let res = Resources::load(cfg)?;
    let a = load_corpus(first, &res.taxonomy).with_context(|| format!("corpus {}", first.display()))?;
    let b = load_corpus(second, &res.taxonomy).with_context(|| format!("corpus {}", second.display()))?;
    let report = corpus_kappa(&a, &b)?;
    let mut text = String::from("doc_id,kappa\n");
    for (doc, k) in &report.per_document {
        text.push_str(&format!("{doc},{k:.6}\n"));
    }
    text.push_str(&format!("mean,{:.6}\n", report.mean));
    let path = cfg.report_dir.join("kappa.csv");
    write_text(&path, &text)?;
    println!("kappa: {} documents compared, mean {:.3} -> {}", report.per_document.len(), report.mean, path.display());
    Ok(true)
}
