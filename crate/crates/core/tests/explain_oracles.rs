//! TreeSHAP against exhaustive Shapley enumeration.

use fedsignal_core::explain::{brute_force_shapley, tree_shap, tree_shap_single};
use fedsignal_core::models::{
    train_forest, train_gbdt, ForestMode, ForestParams, GbdtModel, GbdtParams, NodeKind, Tree, TrainedModel, TreeNode,
};
use fedsignal_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random tree with random split fractions; features may repeat on a path.
fn random_tree(rng: &mut ChaCha8Rng, d: usize, max_depth: usize) -> Tree {
    fn grow(rng: &mut ChaCha8Rng, d: usize, depth: usize, cover: f64, nodes: &mut Vec<TreeNode>) -> usize {
        let id = nodes.len();
        nodes.push(TreeNode { cover, kind: NodeKind::Leaf { values: vec![rng.gen_range(-3.0..3.0)] } });
        if depth > 0 && rng.gen_bool(0.8) {
            let frac = rng.gen_range(0.05..0.95);
            let feature = rng.gen_range(0..d);
            let threshold = rng.gen_range(-1.0..1.0);
            let left = grow(rng, d, depth - 1, cover * frac, nodes);
            let right = grow(rng, d, depth - 1, cover * (1.0 - frac), nodes);
            // internal covers are exact child sums
            nodes[id].cover = nodes[left].cover + nodes[right].cover;
            nodes[id].kind = NodeKind::Split { feature, threshold, left, right };
        }
        id
    }
    let mut nodes = Vec::new();
    grow(rng, d, max_depth, 1.0, &mut nodes);
    Tree { nodes }
}

fn single_output_model(trees: Vec<Tree>, d: usize, eta: f64) -> TrainedModel {
    TrainedModel::Gbdt(GbdtModel {
        n_classes: 1,
        n_features: d,
        init_scores: vec![0.25],
        trees: trees.into_iter().map(|t| vec![t]).collect(),
        params: GbdtParams { learning_rate: eta, ..Default::default() },
        train_deviance: vec![],
    })
}

fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("f{j}")).collect()
}

#[test]
fn tree_shap_equals_brute_force_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = rng.gen_range(1..=10);
        let depth = rng.gen_range(1..=3);
        let model = single_output_model(vec![random_tree(&mut rng, d, depth)], d, 1.0);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.2..1.2)).collect();
        let attr = tree_shap(&model, &Matrix::from_rows(std::slice::from_ref(&x)), &names(d), &["c".into()]).unwrap();
        let brute = brute_force_shapley(&model, &x).unwrap();
        for (a, b) in attr.phi[0].as_slice().iter().zip(brute.as_slice()) {
            worst = worst.max((a - b).abs());
        }
        assert!(attr.local_accuracy_error() < 1e-8);
    }
    assert!(worst <= 1e-8, "max deviation {worst}");
}

#[test]
fn brute_force_efficiency() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let d = rng.gen_range(2..=6);
        let model = single_output_model(vec![random_tree(&mut rng, d, 3), random_tree(&mut rng, d, 2)], d, 0.5);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = brute_force_shapley(&model, &x).unwrap();
        let attr = tree_shap(&model, &Matrix::from_rows(std::slice::from_ref(&x)), &names(d), &["c".into()]).unwrap();
        let total: f64 = phi.as_slice().iter().sum();
        assert!((attr.base_values[0] + total - attr.margins[0][0]).abs() < 1e-12);
    }
}

#[test]
fn unused_features_get_exact_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let tree = random_tree(&mut rng, 4, 3);
        // widen to 6 features; 4 and 5 never split
        let model = single_output_model(vec![tree.clone()], 6, 1.0);
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = tree_shap_single(&tree, &x, 6);
        assert_eq!(phi.get(4, 0), 0.0);
        assert_eq!(phi.get(5, 0), 0.0);
        for j in 0..4 {
            if !tree.uses_feature(j) {
                assert_eq!(phi.get(j, 0), 0.0);
            }
        }
        let brute = brute_force_shapley(&model, &x).unwrap();
        assert_eq!(brute.get(5, 0), 0.0);
    }
}

#[test]
fn attributions_add_across_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (t1, t2) = (random_tree(&mut rng, 5, 3), random_tree(&mut rng, 5, 3));
    let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let both = tree_shap(&single_output_model(vec![t1.clone(), t2.clone()], 5, 1.0), &Matrix::from_rows(std::slice::from_ref(&x)), &names(5), &["c".into()]).unwrap();
    let a = tree_shap_single(&t1, &x, 5);
    let b = tree_shap_single(&t2, &x, 5);
    for j in 0..5 {
        assert!((both.phi[0].get(j, 0) - a.get(j, 0) - b.get(j, 0)).abs() < 1e-12);
    }
}

#[test]
fn trained_ensembles_are_locally_accurate() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x = Matrix::from_vec(80, 6, (0..480).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let y: Vec<usize> = x.iter_rows().map(|r| if r[0] > 0.3 { 0 } else if r[1] > 0.0 { 1 } else { 2 }).collect();
    let classes: Vec<String> = ["raise", "hold", "lower"].iter().map(|s| s.to_string()).collect();
    let gbdt = TrainedModel::Gbdt(
        train_gbdt(&x, &y, 3, None, &GbdtParams { n_estimators: 20, learning_rate: 0.1, ..Default::default() }, 3).unwrap(),
    );
    let forest = TrainedModel::Forest(
        train_forest(&x, &y, 3, None, &ForestParams { mode: ForestMode::Extra, n_trees: 15, max_depth: Some(4), ..Default::default() }, 3).unwrap(),
    );
    for model in [gbdt, forest] {
        let attr = tree_shap(&model, &x, &names(6), &classes).unwrap();
        assert!(attr.local_accuracy_error() < 1e-8);
        for i in [0, 17, 55] {
            let brute = brute_force_shapley(&model, x.row(i)).unwrap();
            for (a, b) in attr.phi[i].as_slice().iter().zip(brute.as_slice()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
