use heapsync::moebius::{
    classify_valuation, extend_valuation, growth_coefficients, moebius_polynomial, moebius_transform,
    moebius_transform_factored, restrict_valuation, smallest_root, Valuation, ValuationClass,
};
use heapsync::sync::{AlphabetNetwork, StreamTag, SyncState, TaggedWord, WordVector};
use heapsync::trace::{Letter, TraceMonoid, DEFAULT_WORK_BUDGET};
use proptest::prelude::*;

/// Random monoid on `n` letters from a bitmask over the `n(n-1)/2` pairs.
fn monoid_from(n: usize, mask: u32) -> TraceMonoid {
    let mut pairs = Vec::new();
    let mut bit = 0;
    for a in 0..n {
        for b in a + 1..n {
            if mask >> bit & 1 == 1 {
                pairs.push((Letter(a), Letter(b)));
            }
            bit += 1;
        }
    }
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    TraceMonoid::new(&names, &pairs).unwrap()
}

fn monoid() -> impl Strategy<Value = TraceMonoid> {
    (1usize..=6, any::<u32>()).prop_map(|(n, mask)| monoid_from(n, mask))
}

fn word(n: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((0..n).prop_map(Letter), 0..max)
}

fn monoid_and_words(k: usize) -> impl Strategy<Value = (TraceMonoid, Vec<Vec<Letter>>)> {
    monoid().prop_flat_map(move |m| {
        let n = m.len();
        (Just(m), prop::collection::vec(word(n, 24), k))
    })
}

/// Random network: alphabets are nonempty letter sets covering all letters.
fn network() -> impl Strategy<Value = AlphabetNetwork> {
    (1usize..=5, prop::collection::vec(1u32..32, 1..5)).prop_map(|(n, masks)| {
        let mut alphabets: Vec<Vec<Letter>> = masks
            .iter()
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(Letter).collect::<Vec<_>>())
            .filter(|a| !a.is_empty())
            .collect();
        let covered: Vec<bool> = (0..n).map(|i| alphabets.iter().any(|a| a.contains(&Letter(i)))).collect();
        for (i, c) in covered.iter().enumerate() {
            if !c {
                alphabets.push(vec![Letter(i)]);
            }
        }
        let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        AlphabetNetwork::new(&names, alphabets).unwrap()
    })
}

fn network_and_vector() -> impl Strategy<Value = (AlphabetNetwork, WordVector, Vec<usize>)> {
    network().prop_flat_map(|net| {
        let comps: Vec<BoxedStrategy<TaggedWord>> = net
            .alphabets()
            .iter()
            .map(|alph| {
                let alph = alph.clone();
                (prop::collection::vec(0..alph.len(), 0..12), any::<bool>())
                    .prop_map(move |(idx, closed)| {
                        let letters = idx.iter().map(|&j| alph[j]).collect();
                        TaggedWord::new(letters, if closed { StreamTag::Eof } else { StreamTag::Wfi })
                    })
                    .boxed()
            })
            .collect();
        let k = net.len();
        (Just(net), comps, prop::collection::vec(1usize..5, k))
    })
    .prop_map(|(net, comps, sizes)| (net, WordVector::new(comps), sizes))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalize_ignores_independent_swaps((m, ws) in monoid_and_words(1)) {
        let w = &ws[0];
        let x = m.normalize(w).unwrap();
        for i in 1..w.len() {
            if m.independent(w[i - 1], w[i]) {
                let mut v = w.clone();
                v.swap(i - 1, i);
                prop_assert_eq!(&m.normalize(&v).unwrap(), &x);
            }
        }
        prop_assert_eq!(x.len(), w.len());
    }

    #[test]
    fn concat_is_a_monoid((m, ws) in monoid_and_words(3)) {
        let [x, y, z] = [0, 1, 2].map(|i| m.normalize(&ws[i]).unwrap());
        let e = m.normalize(&[]).unwrap();
        prop_assert_eq!(m.concat(&m.concat(&x, &y), &z), m.concat(&x, &m.concat(&y, &z)));
        prop_assert_eq!(m.concat(&x, &e), x.clone());
        prop_assert_eq!(m.concat(&e, &x), x.clone());
        let joined: Vec<Letter> = ws[0].iter().chain(&ws[1]).copied().collect();
        prop_assert_eq!(m.concat(&x, &y), m.normalize(&joined).unwrap());
    }

    #[test]
    fn left_division_inverts_concat((m, ws) in monoid_and_words(2)) {
        let x = m.normalize(&ws[0]).unwrap();
        let y = m.normalize(&ws[1]).unwrap();
        let xy = m.concat(&x, &y);
        prop_assert_eq!(m.left_divides(&x, &xy), Some(y.clone()));
        if let Some(z) = m.left_divides(&y, &x) {
            prop_assert_eq!(m.concat(&y, &z), x);
        }
    }

    #[test]
    fn remove_top_round_trip((m, ws) in monoid_and_words(1), pick in any::<usize>()) {
        let a = Letter(pick % m.len());
        let x = m.normalize(&ws[0]).unwrap();
        if let Some(v) = m.first_hitting(&x, a) {
            prop_assert!(m.in_hitting_set(&v, a));
            let rest = m.remove_top(&v, a).unwrap();
            let top = m.normalize(&[a]).unwrap();
            prop_assert_eq!(m.concat(&rest, &top), v.clone());
            prop_assert!(m.left_divides(&v, &x).is_some());
            prop_assert_eq!(rest.count(a), 0);
        } else {
            prop_assert_eq!(x.count(a), 0);
        }
    }

    #[test]
    fn prefix_dominance_of_extensions((m, ws) in monoid_and_words(2)) {
        let x = m.normalize(&ws[0]).unwrap();
        let y = m.normalize(&ws[1]).unwrap();
        let xy = m.concat(&x, &y);
        prop_assert_eq!(m.prefix_dominates(&xy, &x), Some(true));
    }

    #[test]
    fn smallest_root_brackets((m, _) in monoid_and_words(0)) {
        let mu = moebius_polynomial(&m).unwrap();
        let p0 = smallest_root(&m).unwrap();
        prop_assert!(p0 > 0.0 && p0 <= 1.0);
        prop_assert!(mu.eval(p0).abs() <= 1e-10);
        for k in 0..100 {
            let t = p0 * k as f64 / 100.0;
            prop_assert!(mu.eval(t) > 0.0, "mu({}) = {}", t, mu.eval(t));
        }
    }

    #[test]
    fn transforms_agree((m, _) in monoid_and_words(0), raw in prop::collection::vec(0.01f64..0.6, 6)) {
        let f = Valuation::new(&m, raw[..m.len()].to_vec()).unwrap();
        let direct = moebius_transform(&m, &f).unwrap();
        let factored = moebius_transform_factored(&m, &f).unwrap();
        prop_assert_eq!(direct.values().len(), factored.values().len());
        for &(c, h) in direct.values() {
            let g = factored.get(c).unwrap();
            prop_assert!((h - g).abs() <= 1e-10, "h = {} vs {}", h, g);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_growth((m, _) in monoid_and_words(0)) {
        let n = 5;
        let growth = growth_coefficients(&m, n).unwrap();
        let traces = m.enumerate_traces(n, DEFAULT_WORK_BUDGET).unwrap();
        for (k, &g) in growth.iter().enumerate() {
            prop_assert_eq!(traces.iter().filter(|x| x.len() == k).count() as u128, g);
        }
    }

    #[test]
    fn restrict_then_extend(n in 3usize..=6, ring in any::<bool>(), pick in any::<usize>()) {
        let m = if ring && n >= 3 { TraceMonoid::ring(n).unwrap() } else { TraceMonoid::path(n).unwrap() };
        let p0 = smallest_root(&m).unwrap();
        let f = Valuation::uniform(&m, p0).unwrap();
        let a = Letter(pick % n);
        let (sub, fp) = restrict_valuation(&m, &f, a).unwrap();
        prop_assert_eq!(classify_valuation(&sub, &fp).unwrap(), ValuationClass::SubMoebius);
        let back = extend_valuation(&m, a, fp.weights()).unwrap();
        prop_assert_eq!(classify_valuation(&m, &back).unwrap(), ValuationClass::Moebius);
        prop_assert!((back.weight(a) - p0).abs() < 1e-9);
    }

    #[test]
    fn streaming_matches_one_shot((net, v, sizes) in network_and_vector()) {
        let expect = net.synchronize(&v).unwrap();
        let rounds = *sizes.iter().max().unwrap();
        let mut st = SyncState::new(&net);
        for r in 0..rounds {
            if st.is_terminal() {
                break;
            }
            let chunk = WordVector::new(
                v.components
                    .iter()
                    .zip(&sizes)
                    .map(|(w, &s)| {
                        // component i arrives in `s` nearly equal pieces
                        let len = w.letters.len();
                        let (lo, hi) = ((len * r / s).min(len), (len * (r + 1) / s).min(len));
                        let piece = if r < s { w.letters[lo..hi].to_vec() } else { Vec::new() };
                        let tag = if r + 1 >= s { w.tag } else { StreamTag::Wfi };
                        TaggedWord::new(piece, tag)
                    })
                    .collect(),
            );
            st.feed(&chunk).unwrap();
        }
        prop_assert_eq!((st.trace(), st.tag()), expect);
    }

    #[test]
    fn output_projects_to_prefixes((net, v, _) in network_and_vector()) {
        let (x, _) = net.synchronize(&v).unwrap();
        let word = x.to_word();
        for (i, w) in v.components.iter().enumerate() {
            let proj: Vec<Letter> = word.iter().copied().filter(|&a| net.contains(i, a)).collect();
            prop_assert!(w.letters.starts_with(&proj), "component {}", i);
        }
    }
}
