mod support;

use std::collections::BTreeSet;

use policykit::corpus::{split_document_level, split_segment_level};
use policykit::features::{fit_tfidf, transform_tfidf};
use policykit::html::{extract_pp_element, ExtractionConfig};
use policykit::structure::{parse_ppxml, serialize_ppxml};
use policykit::synthetic::{leakage_corpus, planted_dom, LeakageCorpusSpec};
use policykit::Taxonomy;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ppxml_round_trip(doc in support::policy_document()) {
        let bytes = serialize_ppxml(&doc).unwrap();
        let back = parse_ppxml(&bytes).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize_ppxml(&back).unwrap(), bytes);
    }

    #[test]
    fn planted_element_is_found(seed in any::<u64>()) {
        let page = planted_dom(seed);
        let got = extract_pp_element(&page.root, &ExtractionConfig::default());
        prop_assert!(std::ptr::eq(got, page.planted()));
        prop_assert!(std::ptr::eq(support::planted_oracle(&page.root).unwrap(), page.planted()));
    }

    #[test]
    fn tfidf_norm(texts in prop::collection::vec("[a-d ]{0,20}", 1..6), probe in "[a-e ]{0,30}") {
        let mut texts = texts;
        texts.push("ab".into());
        let v = fit_tfidf(&texts, 8).unwrap();
        let n = transform_tfidf(&v, &probe).iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn splits_partition_the_corpus(seed in any::<u64>(), n_test in 1usize..6, frac in 0.05f64..0.6) {
        let t = Taxonomy::builtin();
        let spec = LeakageCorpusSpec { n_docs: 8, seed, ..Default::default() };
        let c = leakage_corpus(&spec, &t);
        let all: BTreeSet<_> = c.node_keys().iter().map(|k| k.to_string()).collect();
        let doc = split_document_level(&c, n_test, seed).unwrap();
        let seg = split_segment_level(&c, frac, seed).unwrap();
        for s in [&doc, &seg] {
            let keys = |v: Vec<&policykit::corpus::AnnotatedNode>| -> BTreeSet<String> {
                v.iter().map(|n| n.key().to_string()).collect()
            };
            let train = keys(s.train_nodes(&c));
            let test = keys(s.test_nodes(&c));
            prop_assert!(train.is_disjoint(&test));
            prop_assert_eq!(&train | &test, all.clone());
        }
        let docs = |v: Vec<&policykit::corpus::AnnotatedNode>| -> BTreeSet<String> {
            v.iter().map(|n| n.doc_id.clone()).collect()
        };
        let train_docs = docs(doc.train_nodes(&c));
        let test_docs = docs(doc.test_nodes(&c));
        prop_assert!(train_docs.is_disjoint(&test_docs));
        prop_assert_eq!(test_docs.len(), n_test);
    }
}
