use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use policykit::structure::serialize_ppxml;
use policykit::synthetic::{leakage_corpus, LeakageCorpusSpec};
use policykit::Taxonomy;

fn policykit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_policykit"))
        .current_dir(dir)
        .env_remove("POLICYKIT_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stdout:\n{}\nstderr:\n{}", text(&out.stdout), text(&out.stderr));
    text(&out.stdout)
}

const SENTENCE: &str = "We process the personal data you give us when you create an account and use our services. ";

fn policy_page(company: &str) -> String {
    let para = |topic: &str| format!("<p>{} {}</p>", topic, SENTENCE.repeat(5));
    format!(
        "<html><head><title>{company}</title></head><body>\
         <nav><a href=\"/\">Home</a> <a href=\"/shop\">Shop</a></nav>\
         <div class=\"banner\">Free delivery this week</div>\
         <div id=\"main\"><h1>{company} privacy policy</h1>\
         <h2>1. Data we collect</h2>{}{}\
         <h2>2. Your rights</h2>{}{}\
         <h2>3. Retention</h2>{}</div>\
         <div class=\"newsletter\">Join our newsletter today</div>\
         <footer>Copyright {company}</footer></body></html>",
        para("Collection."),
        para("Accounts."),
        para("Access."),
        para("Erasure."),
        para("Storage.")
    )
}

fn page_without_policy() -> &'static str {
    "<html><body><div><p>Welcome to the shop.</p>\
     <a href=\"/legal/privacy\">Privacy Policy</a> <a href=\"/signup\">Sign up</a></div></body></html>"
}

fn write_corpus(dir: &Path, n_docs: usize) -> PathBuf {
    let t = Taxonomy::builtin();
    let spec = LeakageCorpusSpec { n_docs, child_rate: 0.5, seed: 4, ..LeakageCorpusSpec::default() };
    let corpus = leakage_corpus(&spec, &t);
    let out = dir.join("corpus");
    fs::create_dir_all(&out).unwrap();
    for d in corpus.documents() {
        fs::write(out.join(format!("{}.ppxml", d.id)), serialize_ppxml(&d.doc).unwrap()).unwrap();
    }
    out
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn extract_writes_one_file_per_page_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let pages = dir.path().join("pages");
    fs::create_dir_all(&pages).unwrap();
    for name in ["alpha", "beta", "gamma"] {
        fs::write(pages.join(format!("{name}.html")), policy_page(name)).unwrap();
    }
    let stdout = ok(&policykit(dir.path(), &["extract", "pages", "--out", "out1"]));
    assert!(stdout.contains("3/3 pages"), "{stdout}");
    for name in ["alpha", "beta", "gamma"] {
        let xml = fs::read_to_string(dir.path().join(format!("out1/{name}.ppxml"))).unwrap();
        assert!(xml.contains("Your rights"), "{xml}");
        let clean = fs::read_to_string(dir.path().join(format!("out1/{name}.clean.html"))).unwrap();
        assert!(clean.contains("Retention") && !clean.contains("<nav"), "{clean}");
    }
    ok(&policykit(dir.path(), &["extract", "pages", "--out", "out2", "--jobs", "1"]));
    assert_eq!(read_tree(&dir.path().join("out1")), read_tree(&dir.path().join("out2")));
}

#[test]
fn page_without_policy_fails_with_candidate_links() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("good.html"), policy_page("good")).unwrap();
    fs::write(dir.path().join("shop.html"), page_without_policy()).unwrap();
    let out = policykit(dir.path(), &["extract", "good.html", "shop.html", "--out", "out"]);
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("shop.html") && err.contains("/legal/privacy"), "{err}");
    assert!(dir.path().join("out/good.ppxml").exists());
    assert!(!dir.path().join("out/shop.ppxml").exists());
    let report = fs::read_to_string(dir.path().join("out/extract_report.tsv")).unwrap();
    assert!(report.contains("shop.html\tfailed"), "{report}");
}

#[test]
fn embedding_types_need_a_store() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 8);
    let out = policykit(dir.path(), &["train", "--corpus", "corpus", "--types", "5"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("embedding store required for type 5"), "{}", text(&out.stderr));
}

#[test]
fn missing_inputs_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = policykit(dir.path(), &["stats", "--corpus", "nowhere"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("corpus_dir not found: nowhere"), "{}", text(&out.stderr));
}

#[test]
fn train_then_eval_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 12);
    let args = |m: &'static str, r: &'static str| {
        vec!["--corpus", "corpus", "--types", "1,7", "--n-test", "3", "--min-pos", "3", "--model-dir", m, "--report-dir", r]
    };
    for (m, r) in [("m1", "r1"), ("m2", "r2")] {
        ok(&policykit(dir.path(), &[&["train"][..], &args(m, r)].concat()));
        let stdout = ok(&policykit(dir.path(), &[&["eval"][..], &args(m, r)].concat()));
        assert_eq!(stdout.lines().filter(|l| l.starts_with("eval: type")).count(), 2, "{stdout}");
    }
    assert_eq!(read_tree(&dir.path().join("r1")), read_tree(&dir.path().join("r2")));
    let strip_cfg = |v: Vec<(PathBuf, Vec<u8>)>| -> Vec<_> { v.into_iter().filter(|(p, _)| !p.ends_with("pipeline.cfg")).collect() };
    assert_eq!(strip_cfg(read_tree(&dir.path().join("m1"))), strip_cfg(read_tree(&dir.path().join("m2"))));

    let out = policykit(dir.path(), &["eval", "--corpus", "corpus", "--types", "4", "--n-test", "3", "--model-dir", "m1"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("model bundle not found"), "{}", text(&out.stderr));
}

#[test]
fn compare_covers_types_and_modes_with_config_overrides() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 12);
    fs::write(
        dir.path().join("run.cfg"),
        "corpus_dir=corpus\ntypes=1\nmodes=document\nseeds=1\nn_test=3\nmin_pos=3\nreport_dir=cfg-reports\n",
    )
    .unwrap();
    let stdout = ok(&policykit(
        dir.path(),
        &["compare", "--config", "run.cfg", "--types", "1,2,5", "--modes", "segment,document", "--report-dir", "reports"],
    ));
    assert!(stdout.contains("4 runs"), "{stdout}");
    let summary = fs::read_to_string(dir.path().join("reports/compare_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5, "{summary}");
    assert!(!dir.path().join("cfg-reports").exists());
    let used = fs::read_to_string(dir.path().join("reports/compare.cfg")).unwrap();
    assert!(used.contains("n_test=3") && used.contains("types=1,2,5"), "{used}");
}

#[test]
fn stats_and_kappa_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), 6);
    let stdout = ok(&policykit(dir.path(), &["stats", "--corpus", "corpus"]));
    assert!(stdout.starts_with("stats: 6 documents"), "{stdout}");
    assert!(dir.path().join("reports/statistics.csv").exists());
    let stdout = ok(&policykit(dir.path(), &["kappa", "corpus", "corpus"]));
    assert!(stdout.contains("mean 1.000"), "{stdout}");
}

#[test]
fn structure_trains_block_model_used_by_extract() {
    let dir = tempfile::tempdir().unwrap();
    let samples = policykit::synthetic::separable_blocks(300, 2);
    let mut buf = Vec::new();
    policykit::structure::write_block_samples(&samples, &mut buf).unwrap();
    fs::write(dir.path().join("blocks.tsv"), buf).unwrap();
    let stdout = ok(&policykit(dir.path(), &["structure", "--samples", "blocks.tsv"]));
    assert!(stdout.starts_with("structure: 300 samples"), "{stdout}");
    let report = fs::read_to_string(dir.path().join("reports/block_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 7, "{report}");

    fs::write(dir.path().join("site.html"), policy_page("site")).unwrap();
    let stdout = ok(&policykit(dir.path(), &["extract", "site.html", "--out", "out", "--block-model", "models/blocks.ppsb"]));
    assert!(stdout.contains("1/1 pages"), "{stdout}");
}
