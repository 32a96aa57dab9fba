use std::collections::BTreeSet;

use proptest::prelude::*;
use unicode_normalization::UnicodeNormalization;

use detox_core::baselines::delete_text;
use detox_core::features::{encode_profile, fit_kmeans, EncodedProfile, FeatureProfile, KMeansConfig, KeywordVocabulary, ToxicityLevel};
use detox_core::lang::LanguageTag;
use detox_core::lexicon::LexiconStore;
use detox_core::metrics::{chrf1, joint_score, levenshtein, sim, ScoreTriple};
use detox_core::prompting::{contains_key, parse_detox_response};

fn brute_levenshtein(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = brute_levenshtein(ra, rb) + usize::from(x != y);
            let del = brute_levenshtein(ra, b) + 1;
            let ins = brute_levenshtein(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

fn seq() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..4, 0..=6)
}

proptest! {
    #[test]
    fn levenshtein_matches_recursion_and_is_a_metric(a in seq(), b in seq(), c in seq()) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, brute_levenshtein(&a, &b));
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
    }

    #[test]
    fn chrf_is_bounded_and_max_over_references(
        hyp in "[a-d ]{0,12}",
        r1 in "[a-d ]{1,12}",
        r2 in "[a-d ]{1,12}",
    ) {
        let one = chrf1(&hyp, &[&r1]).unwrap();
        let two = chrf1(&hyp, &[&r1, &r2]).unwrap();
        prop_assert!((0.0..=1.0).contains(&one));
        prop_assert!(two >= one);
        prop_assert_eq!(two, one.max(chrf1(&hyp, &[&r2]).unwrap()));
    }

    #[test]
    fn chrf_identity(x in "[a-z]{1,5}( [a-z]{1,5}){0,4}") {
        prop_assert_eq!(chrf1(&x, &[&x]).unwrap(), 1.0);
    }

    #[test]
    fn sim_is_scale_invariant(v in prop::collection::vec(-10.0f64..10.0, 1..16), e in -20i32..20) {
        prop_assume!(v.iter().any(|x| *x != 0.0));
        let c = 2f64.powi(e);
        let w: Vec<f64> = v.iter().map(|x| x * c).collect();
        prop_assert_eq!(sim(&v, &w).unwrap(), 1.0);
        let s = sim(&v, &v.iter().map(|x| x + 1.0).collect::<Vec<_>>());
        if let Ok(s) = s {
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn joint_score_is_mean_of_products(t in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0), 1..30)) {
        let triples: Vec<ScoreTriple> = t.iter().map(|&(a, b, c)| ScoreTriple::new(a, b, c)).collect();
        let j = joint_score(&triples).unwrap();
        let mut sum = 0.0;
        for &(a, b, c) in &t {
            sum += a * b * c;
        }
        prop_assert_eq!(j, sum / t.len() as f64);
        prop_assert!((0.0..=1.0).contains(&j));
    }
}

const PIECES: [&str; 8] = ["cafe\u{301}", "café", "man\u{303}ana", "mañana", "bad", "word", "Ω", "x"];

fn sentence() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..PIECES.len(), 1..8)
}

proptest! {
    #[test]
    fn lexicon_matching_ignores_normalization_form(words in sentence(), entry in 0..PIECES.len()) {
        let text = words.iter().map(|&i| PIECES[i]).collect::<Vec<_>>().join(" ");
        let composed = LexiconStore::from_entries(LanguageTag::Es, [PIECES[entry].nfc().collect::<String>().as_str()]);
        let decomposed = LexiconStore::from_entries(LanguageTag::Es, [PIECES[entry].nfd().collect::<String>().as_str()]);
        let nfc_text: String = text.nfc().collect();
        let nfd_text: String = text.nfd().collect();
        let spans = composed.match_spans(&nfc_text, LanguageTag::Es);
        prop_assert_eq!(&spans, &composed.match_spans(&nfd_text, LanguageTag::Es));
        prop_assert_eq!(&spans, &decomposed.match_spans(&nfc_text, LanguageTag::Es));
        prop_assert_eq!(&spans, &decomposed.match_spans(&text, LanguageTag::Es));
    }

    #[test]
    fn delete_is_idempotent(words in prop::collection::vec(prop::sample::select(vec![
        "you", "are", "a", "damn", "fool", "son", "of", "gun", ",", ".", "!", "sh*t", "a**", "DAMN", "傻瓜", "吗",
    ]), 0..12)) {
        let lex = LexiconStore::from_entries(LanguageTag::En, ["damn", "fool", "son of a gun", "sh*t", "a**", "傻瓜"]);
        let text = words.join(" ");
        let once = delete_text(&text, LanguageTag::En, &lex);
        prop_assert_eq!(&delete_text(&once, LanguageTag::En, &lex), &once);
        prop_assert!(!lex.is_toxic(&once, LanguageTag::En));
    }
}

fn keyword_set(max: usize) -> impl Strategy<Value = BTreeSet<usize>> {
    prop::collection::btree_set(0..28usize, 1..=max)
}

fn profile_strategy() -> impl Strategy<Value = (usize, BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>)> {
    (0..3usize, keyword_set(3), keyword_set(3), keyword_set(3))
}

fn build(id: String, (level, tone, lang, sent): &(usize, BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>)) -> FeatureProfile {
    let vocab = KeywordVocabulary::default();
    let words = |s: &BTreeSet<usize>| s.iter().map(|&i| vocab.term(i).to_string()).collect::<Vec<_>>();
    FeatureProfile {
        sentence_id: id,
        sentence: String::new(),
        toxicity_level: ToxicityLevel::ALL[*level],
        tone: words(tone),
        language_type: words(lang),
        implied_sentiment: words(sent),
        context: String::new(),
        negative_connotations: Vec::new(),
        intent: String::new(),
    }
}

proptest! {
    #[test]
    fn encoding_is_injective(a in profile_strategy(), b in profile_strategy()) {
        let vocab = KeywordVocabulary::default();
        let ea = encode_profile(&build("a".into(), &a), &vocab).unwrap();
        let eb = encode_profile(&build("b".into(), &b), &vocab).unwrap();
        prop_assert_eq!(ea.vector.len(), 87);
        prop_assert_eq!(a == b, ea.vector == eb.vector);
    }

    #[test]
    fn kmeans_is_invariant_to_power_of_two_scaling(
        profiles in prop::collection::vec(profile_strategy(), 6..24),
        seed in 0u64..1000,
        e in -3i32..4,
    ) {
        let vocab = KeywordVocabulary::default();
        let encoded: Vec<EncodedProfile> = profiles
            .iter()
            .enumerate()
            .map(|(i, p)| encode_profile(&build(format!("s{i}"), p), &vocab).unwrap())
            .collect();
        let c = 2f64.powi(e);
        let scaled: Vec<EncodedProfile> = encoded
            .iter()
            .map(|p| EncodedProfile { id: p.id.clone(), vector: p.vector.iter().map(|x| x * c).collect() })
            .collect();
        let cfg = KMeansConfig { seed, ..KMeansConfig::default() };
        let m1 = fit_kmeans(LanguageTag::En, &encoded, &cfg).unwrap();
        let m2 = fit_kmeans(LanguageTag::En, &scaled, &cfg).unwrap();
        prop_assert_eq!(&m1.assignments, &m2.assignments);
        prop_assert_eq!(m1.exemplars.iter().map(|x| &x.id).collect::<Vec<_>>(), m2.exemplars.iter().map(|x| &x.id).collect::<Vec<_>>());
    }

    #[test]
    fn exemplars_assign_to_their_own_cluster(
        profiles in prop::collection::vec(profile_strategy(), 3..30),
        seed in 0u64..1000,
    ) {
        let vocab = KeywordVocabulary::default();
        let encoded: Vec<EncodedProfile> = profiles
            .iter()
            .enumerate()
            .map(|(i, p)| encode_profile(&build(format!("s{i}"), p), &vocab).unwrap())
            .collect();
        let m = fit_kmeans(LanguageTag::En, &encoded, &KMeansConfig { seed, ..KMeansConfig::default() }).unwrap();
        for (c, ex) in m.exemplars.iter().enumerate() {
            prop_assert_eq!(m.assignments[&ex.id], c);
            prop_assert_eq!(m.assign(&ex.vector).unwrap(), c);
        }
        for w in m.objective_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn detox_response_round_trips(s in "\\PC{1,40}") {
        let s = s.trim().to_string();
        let enclosed = [('"', '"'), ('\'', '\''), ('“', '”'), ('{', '}'), ('<', '>')]
            .iter()
            .any(|&(o, c)| s.chars().count() >= 2 && s.starts_with(o) && s.ends_with(c));
        prop_assume!(!s.is_empty() && !contains_key(&s) && !s.ends_with([',', ';']) && !enclosed);
        let raw = format!("{{\n    Sentence: some toxic input,\n    Fixed sentence: {s}\n}}");
        prop_assert_eq!(parse_detox_response(&raw).unwrap().fixed_sentence, s);
    }
}
