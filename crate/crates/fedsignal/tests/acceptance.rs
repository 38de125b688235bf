//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fedsignal::pipeline::{class_names, cmd_run, cmd_tune, cv_auc, fit_final, prepare_from_config};
use fedsignal::PipelineConfig;
use fedsignal_core::eval::roc_auc_ovr;
use fedsignal_core::explain::{brute_force_shapley, tree_shap};
use fedsignal_core::features::Method;
use fedsignal_core::models::fnn::init_fnn;
use fedsignal_core::models::{GbdtModel, GbdtParams, MaxFeatures, ModelSpec, NodeKind, TrainedModel, Tree, TreeNode};
use fedsignal_core::sampling::{smote_resample, stratified_kfold};
use fedsignal_core::text::{fit_tfidf, score_lm_sentiment, Category, Lexicon, LmTermBasis, TokenizedDocument};
use fedsignal_core::{DocType, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [(&str, Duration, Check); 11] = [
        ("tfidf_oracle", Duration::from_secs(1), tfidf_oracle),
        ("lm_scoring", Duration::from_secs(1), lm_scoring),
        ("gbdt_sanity", Duration::from_secs(30), gbdt_sanity),
        ("ordering_method1_vs_macro", Duration::from_secs(120), ordering),
        ("treeshap_vs_brute_force", Duration::from_secs(30), treeshap),
        ("fnn_gradient_check", Duration::from_secs(5), fnn_gradient),
        ("smote_properties", Duration::from_secs(1), smote_properties),
        ("stratified_kfold", Duration::from_secs(5), stratified_folds),
        ("auc_oracle", Duration::from_secs(5), auc_oracle),
        ("end_to_end_determinism", Duration::from_secs(60), determinism),
        ("hyperparameter_echo", Duration::from_secs(1), hyperparameter_echo),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {took:.2?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS {name} ({took:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn doc(id: &str, tokens: &[&str]) -> TokenizedDocument {
    TokenizedDocument { doc_id: id.into(), doc_type: DocType::Statement, tokens: tokens.iter().map(|t| t.to_string()).collect() }
}

fn tfidf_oracle() -> Result<String, String> {
    let corpus = [
        doc("a", &["inflation", "rises", "inflation", "labor"]),
        doc("b", &["inflation", "falls", "growth"]),
        doc("c", &["rates", "hold", "growth", "labor", "labor"]),
    ];
    let m = fit_tfidf(&corpus, 500).map_err(|e| e.to_string())?;
    let n = corpus.len() as f64;
    let mut worst: f64 = 0.0;
    for d in &corpus {
        let got = m.transform(d);
        let mut want: Vec<f64> = m
            .vocabulary()
            .iter()
            .map(|t| {
                let df = corpus.iter().filter(|c| c.tokens.contains(t)).count() as f64;
                let tf = d.tokens.iter().filter(|w| *w == t).count() as f64;
                tf * (((1.0 + n) / (1.0 + df)).ln() + 1.0)
            })
            .collect();
        let norm = want.iter().map(|v| v * v).sum::<f64>().sqrt();
        want.iter_mut().for_each(|v| *v /= norm);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

const POS: [&str; 4] = ["good", "growth", "strong", "gain"];
const NEG: [&str; 4] = ["risks", "weak", "loss", "decline"];
const UNC: [&str; 2] = ["uncertain", "may"];
const FILLER: [&str; 6] = ["the", "rate", "policy", "is", "and", "committee"];
const NEGATORS: [&str; 3] = ["not", "no", "never"];

/// Polar word flips when the nearest negator in the window has no polar
/// word between it and the current token.
fn naive_lm(tokens: &[&str], window: usize) -> (u32, u32, u32) {
    let polar = |t: &str| POS.contains(&t) || NEG.contains(&t);
    let (mut p, mut n, mut u) = (0, 0, 0);
    for (i, t) in tokens.iter().enumerate() {
        u += UNC.contains(t) as u32;
        if !polar(t) {
            continue;
        }
        let negated = (i.saturating_sub(window)..i)
            .rev()
            .find(|&j| NEGATORS.contains(&tokens[j]))
            .is_some_and(|j| (j + 1..i).all(|k| !polar(tokens[k])));
        if POS.contains(t) != negated {
            p += 1;
        } else {
            n += 1;
        }
    }
    (p, n, u)
}

fn lm_scoring() -> Result<String, String> {
    let entries = POS
        .iter()
        .map(|w| (w.to_string(), Category::Positive))
        .chain(NEG.iter().map(|w| (w.to_string(), Category::Negative)))
        .chain(UNC.iter().map(|w| (w.to_string(), Category::Uncertainty)));
    let lex = Lexicon::new(entries, NEGATORS.iter().map(|w| w.to_string())).map_err(|e| e.to_string())?;
    let empty = LmTermBasis { terms: vec![] };
    let score = |tokens: &[&str], window| score_lm_sentiment(&doc("d", tokens), &lex, window, &Category::ALL, &empty).unwrap();

    let f = score(&["growth", "is", "not", "good", "and", "risks", "increase"], 3);
    ensure(f.count(Category::Positive) == Some(1) && f.count(Category::Negative) == Some(2), || {
        format!("negation example counted {:?}/{:?}", f.count(Category::Positive), f.count(Category::Negative))
    })?;
    ensure((f.net_sentiment + 1.0 / 7.0).abs() < 1e-12, || format!("net sentiment {}", f.net_sentiment))?;

    let vocab: Vec<&str> = POS.iter().chain(&NEG).chain(&UNC).chain(&FILLER).chain(&NEGATORS).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for k in 0..100 {
        let tokens: Vec<&str> = (0..rng.gen_range(1..40)).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect();
        let window = 1 + k % 5;
        let f = score(&tokens, window);
        let (p, n, u) = naive_lm(&tokens, window);
        ensure(
            f.count(Category::Positive) == Some(p) && f.count(Category::Negative) == Some(n) && f.count(Category::Uncertainty) == Some(u),
            || format!("document {k} ({tokens:?}, window {window}) disagrees"),
        )?;
    }
    Ok("negation example and 100 random documents agree".into())
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn gbdt_sanity() -> Result<String, String> {
    let dir = scratch();
    let mut cfg = common::fixture_config(dir.path());
    cfg.threads = Some(1);
    let tuned = cmd_tune(&cfg).map_err(|e| e.to_string())?;
    let auc = tuned.result.mean_cv_auc;

    let (_, prep) = prepare_from_config(&cfg).map_err(|e| e.to_string())?;
    let dummy = cv_auc(&cfg, &prep, &ModelSpec::Prior).map_err(|e| e.to_string())?;
    let dummy_auc = dummy.ovr_macro_auc.ok_or("dummy has no AUC")?.mean;

    ensure(auc >= 0.85, || format!("tuned cv auc {auc:.4} < 0.85"))?;
    ensure(auc - dummy_auc >= 0.25, || format!("tuned {auc:.4} vs dummy {dummy_auc:.4}"))?;

    cfg.model = tuned.result.best_params.clone();
    let fitted = fit_final(&cfg, &prep.matrix.x, &prep.y, &prep.plan.train_indices).map_err(|e| e.to_string())?;
    let TrainedModel::Gbdt(m) = &fitted.model else { return Err("tuned model is not gbdt".into()) };
    let rises = m.train_deviance.windows(2).filter(|w| w[1] > w[0] + 1e-12).count();
    ensure(rises == 0, || format!("training deviance rose in {rises} rounds"))?;
    Ok(format!("tuned cv auc {auc:.4}, dummy {dummy_auc:.4}, {} rounds of non-increasing deviance", m.train_deviance.len() - 1))
}

fn seed_auc(method: Method, seed: u64) -> Result<f64, String> {
    let dir = scratch();
    let mut cfg = common::fixture_config(dir.path());
    cfg.method = method;
    cfg.seed = seed;
    cfg.threads = Some(1);
    let (_, prep) = prepare_from_config(&cfg).map_err(|e| e.to_string())?;
    let cv = cv_auc(&cfg, &prep, &cfg.model).map_err(|e| e.to_string())?;
    Ok(cv.ovr_macro_auc.ok_or("no cv auc")?.mean)
}

fn ordering() -> Result<String, String> {
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 1..=5 {
        let hybrid = seed_auc(Method::Method1, seed)?;
        let macro_only = seed_auc(Method::MacroOnly, seed)?;
        wins += (hybrid >= macro_only) as usize;
        pairs.push(format!("{hybrid:.3}/{macro_only:.3}"));
    }
    let detail = format!("method1 >= macro_only on {wins}/5 seeds ({})", pairs.join(" "));
    ensure(wins >= 4, || detail.clone())?;
    Ok(detail)
}

fn random_tree(rng: &mut ChaCha8Rng, d: usize, depth: usize) -> Tree {
    fn grow(rng: &mut ChaCha8Rng, d: usize, depth: usize, cover: f64, nodes: &mut Vec<TreeNode>) -> usize {
        let id = nodes.len();
        nodes.push(TreeNode { cover, kind: NodeKind::Leaf { values: vec![rng.gen_range(-3.0..3.0)] } });
        if depth > 0 && rng.gen_bool(0.8) {
            let frac = rng.gen_range(0.05..0.95);
            let feature = rng.gen_range(0..d);
            let threshold = rng.gen_range(-1.0..1.0);
            let left = grow(rng, d, depth - 1, cover * frac, nodes);
            let right = grow(rng, d, depth - 1, cover * (1.0 - frac), nodes);
            nodes[id].cover = nodes[left].cover + nodes[right].cover;
            nodes[id].kind = NodeKind::Split { feature, threshold, left, right };
        }
        id
    }
    let mut nodes = Vec::new();
    grow(rng, d, depth, 1.0, &mut nodes);
    Tree { nodes }
}

fn treeshap() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=10);
        let trees: Vec<Vec<Tree>> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let depth = rng.gen_range(1..=4);
                vec![random_tree(&mut rng, d, depth)]
            })
            .collect();
        let model = TrainedModel::Gbdt(GbdtModel {
            n_classes: 1,
            n_features: d,
            init_scores: vec![rng.gen_range(-1.0..1.0)],
            trees,
            params: GbdtParams { learning_rate: rng.gen_range(0.05..1.0), ..Default::default() },
            train_deviance: vec![],
        });
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.2..1.2)).collect();
        let names: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
        let attr = tree_shap(&model, &Matrix::from_rows(std::slice::from_ref(&x)), &names, &["c".into()]).map_err(|e| e.to_string())?;
        let brute = brute_force_shapley(&model, &x).map_err(|e| e.to_string())?;
        for (a, b) in attr.phi[0].as_slice().iter().zip(brute.as_slice()) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("max |dphi| {worst:e}"))?;

    let dir = scratch();
    let mut cfg = common::fixture_config(dir.path());
    cfg.threads = Some(1);
    let (_, prep) = prepare_from_config(&cfg).map_err(|e| e.to_string())?;
    let fitted = fit_final(&cfg, &prep.matrix.x, &prep.y, &prep.plan.train_indices).map_err(|e| e.to_string())?;
    let attr = tree_shap(&fitted.model, &fitted.scale(&prep.matrix.x), &prep.matrix.feature_names, &class_names())
        .map_err(|e| e.to_string())?;
    let local = attr.local_accuracy_error();
    ensure(local <= 1e-8, || format!("local accuracy error {local:e}"))?;
    Ok(format!("max |dphi| {worst:e} over 200 models; local accuracy {local:e} on {} fixture rows", prep.matrix.x.rows()))
}

fn fnn_gradient() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = Matrix::from_vec(5, 6, (0..30).map(|_| rng.gen_range(-2.0..2.0)).collect());
    let y = [0, 2, 1, 1, 0];
    let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..2.0)).collect();
    let rows: Vec<usize> = (0..5).collect();
    let mut model = init_fnn(6, 3, &[64, 32], 13);
    let (_, grads) = model.loss_and_grad(&x, &y, &w, &rows);
    let analytic: Vec<f64> = grads.iter().flat_map(|l| l.weights.as_slice().iter().chain(&l.bias).copied().collect::<Vec<_>>()).collect();
    let theta = model.parameters();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for j in 0..theta.len() {
        let mut t = theta.clone();
        t[j] += h;
        model.set_parameters(&t);
        let up = model.loss_and_grad(&x, &y, &w, &rows).0;
        t[j] = theta[j] - h;
        model.set_parameters(&t);
        let down = model.loss_and_grad(&x, &y, &w, &rows).0;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((numeric - analytic[j]).abs() / numeric.abs().max(analytic[j].abs()).max(1e-7));
    }
    ensure(worst < 1e-4, || format!("max relative error {worst:e}"))?;
    Ok(format!("{} parameters, max relative error {worst:e}", theta.len()))
}

fn on_segment(p: &[f64], a: &[f64], b: &[f64]) -> bool {
    let mut u: Option<f64> = None;
    for ((&pi, &ai), &bi) in p.iter().zip(a).zip(b) {
        let d = bi - ai;
        if d.abs() < 1e-12 {
            if (pi - ai).abs() > 1e-9 {
                return false;
            }
            continue;
        }
        let ui = (pi - ai) / d;
        if u.is_some_and(|u0| (ui - u0).abs() > 1e-9) {
            return false;
        }
        u = Some(ui);
    }
    u.is_none_or(|u| (-1e-12..=1.0 + 1e-12).contains(&u))
}

fn smote_properties() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut synthetic = 0;
    for case in 0..100 {
        let sizes = [rng.gen_range(2..20), rng.gen_range(2..20), rng.gen_range(2..20)];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, &s) in sizes.iter().enumerate() {
            for _ in 0..s {
                rows.push((0..4).map(|_| rng.gen_range(-3.0..3.0) + c as f64).collect::<Vec<f64>>());
                y.push(c);
            }
        }
        let x = Matrix::from_rows(&rows);
        let r = smote_resample(&x, &y, 5, case).map_err(|e| e.to_string())?;
        let max = *sizes.iter().max().unwrap();
        for c in 0..3 {
            let got = r.y.iter().filter(|&&l| l == c).count();
            ensure(got == max, || format!("case {case}: class {c} has {got}, want {max}"))?;
        }
        for (s, &(a, b)) in r.provenance.iter().enumerate() {
            let row = r.n_original + s;
            ensure(y[a] == y[b] && r.y[row] == y[a] && on_segment(r.x.row(row), x.row(a), x.row(b)), || {
                format!("case {case}: synthetic row {row} off its segment")
            })?;
        }
        synthetic += r.provenance.len();
        ensure(smote_resample(&x, &y, 5, case).map_err(|e| e.to_string())? == r, || format!("case {case}: not deterministic"))?;
    }
    Ok(format!("100 datasets, {synthetic} synthetic rows checked"))
}

fn stratified_folds() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let n = rng.gen_range(10..120);
        let k = rng.gen_range(2..=10usize.min(n));
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let folds = stratified_kfold(&labels, k, case).map_err(|e| e.to_string())?;
        for (_, val) in &folds {
            for c in 0..3 {
                let total = labels.iter().filter(|&&l| l == c).count() as f64;
                let here = val.iter().filter(|&&i| labels[i] == c).count() as f64;
                worst = worst.max((here - total / k as f64).abs());
            }
        }
    }
    ensure(worst < 1.0, || format!("max deviation {worst}"))?;
    Ok(format!("max deviation from proportional share {worst:.3}"))
}

fn auc_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut checked = 0;
    for case in 0..500 {
        let n = rng.gen_range(3..40);
        let y: Vec<usize> = (0..n).map(|i| if i < 2 { i } else { rng.gen_range(0..3) }).collect();
        let p = Matrix::from_vec(n, 3, (0..3 * n).map(|_| rng.gen_range(0..10) as f64 / 10.0).collect());
        let mut aucs = Vec::new();
        for k in 0..3 {
            let (pos, neg): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| y[i] == k);
            if pos.is_empty() {
                continue;
            }
            let mut credit = 0.0;
            for &a in &pos {
                for &b in &neg {
                    credit += match p.get(a, k).partial_cmp(&p.get(b, k)).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
            aucs.push(credit / (pos.len() * neg.len()) as f64);
        }
        let want = aucs.iter().sum::<f64>() / aucs.len() as f64;
        let got = roc_auc_ovr(&y, &p).map_err(|e| format!("case {case}: {e}"))?;
        ensure((got - want).abs() <= 1e-12, || format!("case {case}: {got} vs {want}"))?;
        checked += 1;
    }
    Ok(format!("{checked} instances exact"))
}

fn run_report(threads: usize) -> Result<Vec<u8>, String> {
    let dir = scratch();
    let mut cfg = common::fixture_config(dir.path());
    cfg.threads = Some(threads);
    cmd_run(&cfg).map_err(|e| e.to_string())?;
    std::fs::read(dir.path().join("report.json")).map_err(|e| e.to_string())
}

fn determinism() -> Result<String, String> {
    let a = run_report(1)?;
    let b = run_report(1)?;
    let c = run_report(8)?;
    ensure(a == b, || "report.json differs between identical runs".into())?;
    ensure(a == c, || "report.json differs between 1 and 8 threads".into())?;
    Ok(format!("{} bytes identical across 3 runs", a.len()))
}

fn hyperparameter_echo() -> Result<String, String> {
    let text = std::fs::read_to_string(common::fixture_config_path()).map_err(|e| e.to_string())?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let want = GbdtParams { n_estimators: 10, learning_rate: 0.01, max_depth: 4, max_features: MaxFeatures::Sqrt, min_samples_leaf: 10, min_samples_split: 10 };
    let cfg = PipelineConfig::from_json(&text, &common::fixture_dir()).map_err(|e| e.to_string())?;
    ensure(cfg.model == ModelSpec::Gbdt(want.clone()), || format!("config parsed as {:?}", cfg.model))?;

    let dir = scratch();
    let mut cfg = common::fixture_config(dir.path());
    cfg.threads = Some(1);
    let out = cmd_run(&cfg).map_err(|e| e.to_string())?;
    let TrainedModel::Gbdt(m) = &out.bundle.model else { return Err("bundle model is not gbdt".into()) };
    ensure(m.params == want, || format!("trained with {:?}", m.params))?;

    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("model.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    ensure(saved["hyperparams"] == raw["model"], || format!("model.json hyperparams {}", saved["hyperparams"]))?;
    ensure(saved["parameters"]["params"] == raw["model"]["params"], || format!("model params {}", saved["parameters"]["params"]))?;
    Ok("config, trained model and model.json agree".into())
}
