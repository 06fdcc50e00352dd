//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use threatfilter::select::kmeans::wcss;
use threatfilter::{
    generate, information_gain, metrics, roc_curve, score_bm, score_bmc, score_bs, split_corpus,
    stem, train, train_from_vectors, Approach, Class, ClassifierConfig, ConfusionCounts, Feature,
    FeatureCounts, FeatureStats, FeatureVector, Label, LabeledEmail, Model, RawEmail,
    RocPoint, SweepAxis, SweepSpec, SynthConfig, TrainParams,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed <= Duration::from_secs(limit_secs), || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

const STEMS: [&str; 8] = ["bomb", "blast", "hotel", "meet", "plan", "citi", "kill", "sale"];

fn random_feature(rng: &mut ChaCha8Rng, max_arity: usize) -> Feature {
    let arity = rng.random_range(1..=max_arity);
    let words: Vec<&str> = (0..arity).map(|_| *STEMS.choose(rng).unwrap()).collect();
    Feature::from_words(&words).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng) -> Model {
    let n_threat = rng.random_range(1..30u64);
    let n_normal = rng.random_range(1..30u64);
    let mut library = BTreeMap::new();
    for _ in 0..rng.random_range(1..25) {
        let hb = rng.random_range(0..=n_threat);
        let hg = rng.random_range(0..=n_normal);
        if hb + hg > 0 {
            library.insert(random_feature(rng, 3), FeatureCounts { hb, hg });
        }
    }
    if library.is_empty() {
        library.insert(Feature::from_words(&["bomb"]).unwrap(), FeatureCounts { hb: 1, hg: 0 });
    }
    let k = rng.random_range(1..=library.len());
    Model::from_counts(n_threat, n_normal, library, k, "acceptance".into()).unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, max_arity: usize) -> FeatureVector {
    (0..rng.random_range(0..12)).map(|_| random_feature(rng, max_arity)).collect()
}

fn random_config(rng: &mut ChaCha8Rng) -> ClassifierConfig {
    let mut w = || rng.random_range(0.0..4.0);
    ClassifierConfig {
        arity_weights: [w(), w(), w()],
        context_weights: [w(), w(), w()],
        w1: w(),
        w2: w(),
        ..ClassifierConfig::default()
    }
}

fn reduction_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let model = random_model(&mut rng);
        let cfg = random_config(&mut rng);
        let fv = random_vector(&mut rng, 3);
        let no_context = ClassifierConfig {
            w1: 1.0,
            w2: 0.0,
            ..cfg.clone()
        };
        let (bmc, bm) = (score_bmc(&model, &fv, &no_context), score_bm(&model, &fv, &cfg));
        ensure((bmc - bm).abs() <= 1e-12, || format!("pair {i}: bmc {bmc} vs bm {bm}"))?;

        let unigrams = random_vector(&mut rng, 1);
        let unit = ClassifierConfig {
            arity_weights: [1.0; 3],
            ..cfg
        };
        let (bm1, bs) = (score_bm(&model, &unigrams, &unit), score_bs(&model, &unigrams));
        ensure((bm1 - bs).abs() <= 1e-12, || format!("pair {i}: bm {bm1} vs bs {bs}"))?;
        worst = worst.max((bmc - bm).abs()).max((bm1 - bs).abs());
    }
    within(start.elapsed(), 5)?;
    Ok(format!("200 pairs, max deviation {worst:e}"))
}

fn graham_probability() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let pool: Vec<Feature> = (0..15)
        .map(|i| Feature::from_words(&[&format!("feat{i}")]).unwrap())
        .collect();
    let mut checked = 0;
    for corpus in 0..100 {
        let n = rng.random_range(2..=20);
        let size = rng.random_range(1..=15);
        let features = &pool[..size];
        let mut docs: Vec<(FeatureVector, Class)> = (0..n)
            .map(|_| {
                let fv: FeatureVector = features.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
                let class = if rng.random_bool(0.4) { Class::Threat } else { Class::Normal };
                (fv, class)
            })
            .collect();
        docs[0].1 = Class::Threat;
        docs[1].1 = Class::Normal;
        let model = train_from_vectors(&docs, &TrainParams::default()).unwrap();

        // independent recount
        let n_threat = docs.iter().filter(|d| d.1 == Class::Threat).count() as f64;
        let n_normal = docs.len() as f64 - n_threat;
        for f in features {
            let mut hb = 0.0;
            let mut hg = 0.0;
            for (fv, class) in &docs {
                if fv.iter().any(|(g, _)| g == f) {
                    match class {
                        Class::Threat => hb += 1.0,
                        Class::Normal => hg += 1.0,
                    }
                }
            }
            let got = model.raw_token_prob(f);
            if hb + hg == 0.0 {
                ensure(got.is_none(), || format!("corpus {corpus}: {f} should be unseen"))?;
                continue;
            }
            let b = hb / n_threat;
            let g = hg / n_normal;
            let expected = b / (b + g);
            ensure(got == Some(expected), || {
                format!("corpus {corpus}: {f} got {got:?}, recount {expected}")
            })?;
            let p = model.token_prob(f).value();
            ensure((0.01..=0.99).contains(&p) && p == expected.clamp(0.01, 0.99), || {
                format!("corpus {corpus}: clamp of {expected} gave {p}")
            })?;
            checked += 1;
        }
    }
    within(start.elapsed(), 5)?;
    Ok(format!("{checked} feature probabilities over 100 corpora"))
}

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let close = |a: Option<f64>, b: f64| a.is_some_and(|a| (a - b).abs() <= 1e-12);
    for i in 0..1000 {
        let c = ConfusionCounts {
            n_nn: rng.random_range(0..500),
            n_nt: rng.random_range(0..500),
            n_tn: rng.random_range(0..500),
            n_tt: rng.random_range(0..500),
        };
        if c.total() == 0 {
            continue;
        }
        for lambda in [1.0, 9.0, 999.0] {
            let m = metrics(&c, lambda).unwrap();
            ensure(close(m.accuracy.map(|a| a + m.error_rate.unwrap()), 1.0), || {
                format!("case {i}: Acc + Err != 1")
            })?;
            if let (Some(wa), Some(we)) = (m.weighted_accuracy, m.weighted_error) {
                ensure((wa + we - 1.0).abs() <= 1e-12, || format!("case {i}: W_Acc + W_Err != 1"))?;
            }
            if let (Some(r), Some(fnr)) = (m.recall, m.fn_rate) {
                ensure((r + fnr - 1.0).abs() <= 1e-12, || format!("case {i}: r + FN != 1"))?;
            }
            let k = rng.random_range(2..50);
            let scaled = metrics(&c.scaled(k), lambda).unwrap();
            for (a, b) in [
                (m.accuracy, scaled.accuracy),
                (m.weighted_accuracy, scaled.weighted_accuracy),
                (m.error_rate, scaled.error_rate),
                (m.weighted_error, scaled.weighted_error),
                (m.fp_rate, scaled.fp_rate),
                (m.fn_rate, scaled.fn_rate),
                (m.recall, scaled.recall),
                (m.precision, scaled.precision),
                (m.f1, scaled.f1),
                (m.tcr, scaled.tcr),
            ] {
                let same = match (a, b) {
                    (None, None) => true,
                    (Some(x), Some(y)) if x.is_infinite() || y.is_infinite() => x == y,
                    (Some(x), Some(y)) => (x - y).abs() <= 1e-12 * x.abs().max(1.0),
                    _ => false,
                };
                ensure(same, || format!("case {i}: scaling by {k} changed {a:?} to {b:?}"))?;
            }
        }
    }
    let fixture = ConfusionCounts {
        n_nn: 90,
        n_nt: 10,
        n_tn: 5,
        n_tt: 45,
    };
    let m = metrics(&fixture, 1.0).unwrap();
    let expect = [
        ("accuracy", m.accuracy, 0.9),
        ("precision", m.precision, 0.818_181_818_181_818_2),
        ("recall", m.recall, 0.9),
        ("f1", m.f1, 0.857_142_857_142_857_1),
        ("tcr", m.tcr, 3.333_333_333_333_333_5),
    ];
    for (name, got, want) in expect {
        ensure(got.is_some_and(|g| (g - want).abs() <= 1e-9), || {
            format!("fixture {name}: {got:?} vs {want}")
        })?;
    }
    Ok("1000 random counts x 3 lambdas, fixture matches".into())
}

/// Entropy reduction computed by enumerating explicit documents.
fn brute_force_ig(t: u64, n: u64, nt: u64, nn: u64) -> f64 {
    let docs: Vec<(bool, bool)> = (0..nt)
        .map(|i| (true, i < t))
        .chain((0..nn).map(|i| (false, i < n)))
        .collect();
    let entropy = |subset: &Vec<&(bool, bool)>| {
        if subset.is_empty() {
            return 0.0;
        }
        let len = subset.len() as f64;
        let pos = subset.iter().filter(|d| d.0).count() as f64;
        [pos, len - pos]
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| -(c / len) * (c / len).log2())
            .sum::<f64>()
    };
    let all: Vec<_> = docs.iter().collect();
    let with: Vec<_> = docs.iter().filter(|d| d.1).collect();
    let without: Vec<_> = docs.iter().filter(|d| !d.1).collect();
    let len = docs.len() as f64;
    entropy(&all) - with.len() as f64 / len * entropy(&with) - without.len() as f64 / len * entropy(&without)
}

fn ig_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let stats = |t, n| FeatureStats {
        feature: Feature::from_words(&["word"]).unwrap(),
        threat_docs: t,
        normal_docs: n,
    };
    let mut worst = 0.0f64;
    for i in 0..500 {
        let nt = rng.random_range(1..60);
        let nn = rng.random_range(1..60);
        let t = rng.random_range(0..=nt);
        let n = rng.random_range(0..=nn);
        let got = information_gain(&stats(t, n), nt, nn);
        let want = brute_force_ig(t, n, nt, nn).max(0.0);
        ensure((got - want).abs() <= 1e-12, || format!("instance {i}: {got} vs {want}"))?;
        worst = worst.max((got - want).abs());
    }
    let perfect = information_gain(&stats(25, 0), 25, 25);
    ensure(perfect == 1.0, || format!("perfect predictor gave {perfect}"))?;
    let independent = information_gain(&stats(10, 20), 20, 40);
    ensure(independent == 0.0, || format!("independent feature gave {independent}"))?;
    Ok(format!("500 instances, max deviation {worst:e}"))
}

/// First single-point reassignment that lowers WCSS by more than 1e-9,
/// found by recomputing WCSS from scratch for every candidate move.
fn improving_move(points: &[[f64; 3]], assignments: &[usize], k: usize) -> Option<(usize, usize)> {
    let base = wcss(points, assignments, k);
    let mut trial = assignments.to_vec();
    for i in 0..points.len() {
        let from = assignments[i];
        if assignments.iter().filter(|&&a| a == from).count() == 1 {
            continue;
        }
        for to in (0..k).filter(|&c| c != from) {
            trial[i] = to;
            if wcss(points, &trial, k) < base - 1e-9 {
                return Some((i, to));
            }
        }
        trial[i] = from;
    }
    None
}

fn kmeans_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let k = 4;
    for i in 0..100 {
        let n = rng.random_range(1..60);
        let points: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random(), rng.random(), rng.random_range(1..=3) as f64 / 3.0])
            .collect();
        let seed = rng.random();
        let km = threatfilter::select::KMeans::new(k, seed, 200).unwrap();
        let r = km.fit(&points);
        for w in r.wcss_history.windows(2) {
            ensure(w[1] <= w[0] + 1e-12, || format!("instance {i}: WCSS rose {} -> {}", w[0], w[1]))?;
        }
        ensure(r.converged, || format!("instance {i}: not converged"))?;
        let check = improving_move(&points, &r.assignments, k);
        ensure(check.is_none(), || format!("instance {i}: improving move {check:?}"))?;
        ensure(km.fit(&points) == r, || format!("instance {i}: not deterministic"))?;
    }
    Ok("100 instances".into())
}

fn porter_reference() -> Outcome {
    let voc = include_str!("data/porter_voc.txt");
    let out = include_str!("data/porter_output.txt");
    let pairs: Vec<(&str, &str)> = voc.lines().zip(out.lines()).collect();
    ensure(pairs.len() == voc.lines().count() && pairs.len() == out.lines().count(), || {
        "vocabulary and output lengths differ".into()
    })?;
    let mismatches: Vec<_> = pairs
        .iter()
        .filter(|(w, s)| stem(w).as_str() != *s)
        .take(5)
        .collect();
    ensure(mismatches.is_empty(), || format!("mismatches {mismatches:?}"))?;

    // idempotence over the same sample
    let unstable: Vec<(&str, String, String)> = pairs
        .iter()
        .filter_map(|(w, _)| {
            let once = stem(w);
            let twice = stem(once.as_str());
            (once != twice).then(|| (*w, once.to_string(), twice.to_string()))
        })
        .collect();
    ensure(unstable.is_empty(), || {
        format!(
            "all {} reference pairs match, but stem is not idempotent on {} words, e.g. {:?}",
            pairs.len(),
            unstable.len(),
            &unstable[..unstable.len().min(3)]
        )
    })?;
    Ok(format!("{} reference pairs", pairs.len()))
}

const WORDS: [&str; 10] = [
    "bomb", "blast", "hotel", "meeting", "agenda", "attack", "tonight", "invoice", "market", "station",
];

fn random_email(rng: &mut ChaCha8Rng, id: usize) -> LabeledEmail {
    let body: Vec<&str> = (0..rng.random_range(0..10)).map(|_| *WORDS.choose(rng).unwrap()).collect();
    let label = *Label::ALL.choose(rng).unwrap();
    LabeledEmail::new(RawEmail::parse(&format!("\n{}", body.join(" ")), format!("m{id}")), label)
}

fn online_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let params = TrainParams::default();
    for c in 0..100 {
        let n = rng.random_range(2..=20);
        let mut corpus: Vec<LabeledEmail> = (0..n).map(|i| random_email(&mut rng, i)).collect();
        // the seed model needs both classes and at least one feature
        corpus[0] = LabeledEmail::new(RawEmail::parse("\nattack station", "m0"), Label::Threat);
        corpus[1] = LabeledEmail::new(RawEmail::parse("\nmeeting agenda", "m1"), Label::Legitimate);
        corpus[2..].shuffle(&mut rng);

        let batch = train(&corpus, &params).map_err(|e| e.to_string())?;
        let seed = train(&corpus[..2], &params).map_err(|e| e.to_string())?;
        let mut online = seed;
        for e in &corpus[2..] {
            online.update_online(&params.pipeline.extract(e.email()), e.class());
        }
        ensure(online.n_threat() == batch.n_threat() && online.n_normal() == batch.n_normal(), || {
            format!("corpus {c}: class counts differ")
        })?;
        ensure(online.library() == batch.library(), || format!("corpus {c}: libraries differ"))?;
        online.reselect(params.features, &params.pipeline).unwrap();
        ensure(online == batch, || format!("corpus {c}: models differ after reselection"))?;
    }
    Ok("100 micro-corpora".into())
}

const SWEEP_COUNTS: [usize; 4] = [10, 20, 40, 60];

struct EndToEnd {
    bmc: Vec<f64>,
    bs: Vec<f64>,
    /// Mean BMC accuracy per entry of `SWEEP_COUNTS`.
    curve: Vec<f64>,
}

fn end_to_end(seeds: &[u64], ambiguity: f64) -> Result<EndToEnd, String> {
    let params = TrainParams::default();
    let mut out = EndToEnd {
        bmc: Vec::new(),
        bs: Vec::new(),
        curve: vec![0.0; SWEEP_COUNTS.len()],
    };
    for &seed in seeds {
        let corpus = generate(&SynthConfig {
            threat: 160,
            spam: 270,
            legitimate: 270,
            seed,
            ambiguity,
        })
        .map_err(|e| e.to_string())?;
        let split = split_corpus(&corpus, 0.75, seed).map_err(|e| e.to_string())?;
        let model = train(&split.train, &params).map_err(|e| e.to_string())?;
        let acc = |approach| {
            let cfg = ClassifierConfig::with_approach(approach);
            threatfilter::evaluate(&model, &split.test, &cfg, &params.pipeline, 1.0)
                .unwrap()
                .metrics
                .accuracy
                .unwrap()
        };
        let (bs, bm, bmc) = (acc(Approach::Bs), acc(Approach::Bm), acc(Approach::Bmc));
        println!("    ambiguity {ambiguity} seed {seed}: accuracy bs {bs:.4} bm {bm:.4} bmc {bmc:.4}");
        out.bmc.push(bmc);
        out.bs.push(bs);

        let spec = SweepSpec::new(SweepAxis::FeatureCount, SWEEP_COUNTS.to_vec(), vec![Approach::Bmc], seed);
        let rows = threatfilter::sweep(&corpus, &spec).map_err(|e| e.to_string())?;
        for (slot, row) in out.curve.iter_mut().zip(&rows) {
            *slot += row.metrics.accuracy.unwrap() / seeds.len() as f64;
        }
    }
    let curve: Vec<String> = SWEEP_COUNTS
        .iter()
        .zip(&out.curve)
        .map(|(k, a)| format!("{k}:{a:.4}"))
        .collect();
    println!("    ambiguity {ambiguity}: bmc accuracy by feature count {}", curve.join(" "));
    Ok(out)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn synthetic_end_to_end() -> Outcome {
    let start = Instant::now();
    let seeds = [1u64, 2, 3, 4, 5];
    let run = end_to_end(&seeds, SynthConfig::default().ambiguity)?;
    let seeds_ok = run
        .bmc
        .iter()
        .zip(&run.bs)
        .filter(|(bmc, bs)| **bmc >= 0.90 && bmc >= bs)
        .count();
    let (bmc, bs) = (mean(&run.bmc), mean(&run.bs));

    // harder corpus, reported but not gating
    let hard = end_to_end(&seeds, 0.25)?;
    println!(
        "    ambiguity 0.25: mean accuracy bmc {:.4} bs {:.4} (informational)",
        mean(&hard.bmc),
        mean(&hard.bs)
    );

    ensure(bmc >= 0.90, || format!("mean BMC accuracy {bmc:.4} < 0.90"))?;
    ensure(bmc >= bs, || format!("mean BMC accuracy {bmc:.4} < BS {bs:.4}"))?;
    ensure(seeds_ok * 2 > seeds.len(), || format!("only {seeds_ok}/5 seeds meet the bar"))?;
    for (i, w) in run.curve.windows(2).enumerate() {
        ensure(w[1] >= w[0] - 0.02, || {
            format!(
                "accuracy drops from {} to {} features: {:.4} -> {:.4}",
                SWEEP_COUNTS[i],
                SWEEP_COUNTS[i + 1],
                w[0],
                w[1]
            )
        })?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!("mean accuracy BMC {bmc:.4}, BS {bs:.4}, {seeds_ok}/5 seeds"))
}

fn roc_recount(scores: &[(f64, Class)], tau: f64) -> (f64, f64) {
    let pos = scores.iter().filter(|s| s.1 == Class::Threat).count() as f64;
    let neg = scores.len() as f64 - pos;
    let tp = scores.iter().filter(|s| s.1 == Class::Threat && s.0 > tau).count() as f64;
    let fp = scores.iter().filter(|s| s.1 == Class::Normal && s.0 > tau).count() as f64;
    (fp / neg, tp / pos)
}

fn roc_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for i in 0..100 {
        let mut scores: Vec<(f64, Class)> = (0..20)
            .map(|_| {
                let class = if rng.random_bool(0.5) { Class::Threat } else { Class::Normal };
                // coarse grid so ties occur
                ((rng.random_range(0..12) as f64) / 10.0, class)
            })
            .collect();
        scores[0].1 = Class::Threat;
        scores[1].1 = Class::Normal;
        let mut thresholds: Vec<f64> = scores.iter().map(|s| s.0).collect();
        thresholds.extend([-1.0, 5.0, 0.55]);
        let curve = roc_curve(&scores, &thresholds).map_err(|e| e.to_string())?;
        ensure(curve.len() == thresholds.len(), || format!("instance {i}: point count"))?;
        for p in &curve {
            let (fp, tp) = roc_recount(&scores, p.threshold);
            ensure(p.fp_rate == fp && p.tp_rate == tp, || {
                format!("instance {i}: {p:?} vs recount ({fp}, {tp})")
            })?;
        }
        for w in curve.windows(2) {
            let (a, b): (&RocPoint, &RocPoint) = (&w[0], &w[1]);
            ensure(a.threshold >= b.threshold, || format!("instance {i}: not sorted"))?;
            ensure(b.fp_rate >= a.fp_rate && b.tp_rate >= a.tp_rate, || {
                format!("instance {i}: not monotone at {}", b.threshold)
            })?;
        }
    }
    Ok("100 instances of 20 points".into())
}

fn persistence() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for i in 0..50 {
        let cfg = SynthConfig {
            threat: rng.random_range(1..12),
            spam: rng.random_range(0..8),
            legitimate: rng.random_range(1..8),
            seed: rng.random(),
            ambiguity: 0.2,
        };
        let corpus = generate(&cfg).map_err(|e| e.to_string())?;
        let params = TrainParams {
            features: rng.random_range(1..80),
            ..TrainParams::default()
        };
        let model = train(&corpus, &params).map_err(|e| e.to_string())?;
        let path = dir.path().join(format!("model{i}.tfm"));
        model.save(&path).map_err(|e| e.to_string())?;
        let back = Model::load(&path).map_err(|e| e.to_string())?;
        ensure(back == model, || format!("model {i} changed on round trip"))?;
    }
    Ok("50 models".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 reduction identities", reduction_identities),
        ("2 token probability oracle", graham_probability),
        ("3 metric identities", metric_identities),
        ("4 information gain oracle", ig_oracle),
        ("5 k-means monotone, locally optimal, deterministic", kmeans_checks),
        ("6 porter reference vocabulary and idempotence", porter_reference),
        ("7 online update equals batch", online_equivalence),
        ("8 synthetic end-to-end", synthetic_end_to_end),
        ("9 roc recount and monotonicity", roc_checks),
        ("10 model persistence", persistence),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into());
                Err(msg)
            });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({detail}; {secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({detail}; {secs:.2}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
