//! Shared test fixtures: a 30-word graded trial set with per-group mean
//! complexities, and a seeded synthetic dataset generator.

use lexcomp::dataset::{Instance, Origin, RatingMatrix, Split};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// target, origin, log10 frequency, and mean complexity under three
/// annotator groups (base, replication, reannotation by L1-Chinese
/// speakers). All means are multiples of 0.025, i.e. exactly reachable by
/// ten ratings on the quarter grid.
pub struct TrialWord {
    pub target: &'static str,
    pub origin: Origin,
    pub pos: &'static str,
    pub log_freq: f64,
    pub base: f64,
    pub replication: f64,
    pub chinese_l1: f64,
}

pub const TRIAL_WORDS: [TrialWord; 30] = [
    TrialWord { target: "掲載した", origin: Origin::Chinese, pos: "verb", log_freq: -4.744, base: 0.400, replication: 0.475, chinese_l1: 0.100 },
    TrialWord { target: "恩を売り", origin: Origin::Mixed, pos: "mwe", log_freq: -5.166, base: 0.700, replication: 0.700, chinese_l1: 0.450 },
    TrialWord { target: "標題", origin: Origin::Chinese, pos: "noun", log_freq: -7.173, base: 0.375, replication: 0.525, chinese_l1: 0.125 },
    TrialWord { target: "考慮した", origin: Origin::Chinese, pos: "verb", log_freq: -4.815, base: 0.400, replication: 0.325, chinese_l1: 0.175 },
    TrialWord { target: "強盗被害", origin: Origin::Chinese, pos: "noun", log_freq: -5.554, base: 0.400, replication: 0.425, chinese_l1: 0.225 },
    TrialWord { target: "各種の", origin: Origin::Chinese, pos: "noun", log_freq: -4.978, base: 0.200, replication: 0.150, chinese_l1: 0.025 },
    TrialWord { target: "気にかけない", origin: Origin::Mixed, pos: "mwe", log_freq: -3.588, base: 0.475, replication: 0.375, chinese_l1: 0.300 },
    TrialWord { target: "書き添えられて", origin: Origin::Japanese, pos: "verb", log_freq: -6.817, base: 0.600, replication: 0.550, chinese_l1: 0.450 },
    TrialWord { target: "長大な", origin: Origin::Chinese, pos: "adjectival_noun", log_freq: -6.317, base: 0.475, replication: 0.300, chinese_l1: 0.325 },
    TrialWord { target: "随所", origin: Origin::Chinese, pos: "noun", log_freq: -5.857, base: 0.725, replication: 0.700, chinese_l1: 0.600 },
    TrialWord { target: "応用した", origin: Origin::Chinese, pos: "verb", log_freq: -4.935, base: 0.225, replication: 0.325, chinese_l1: 0.125 },
    TrialWord { target: "旧", origin: Origin::Chinese, pos: "noun", log_freq: -4.613, base: 0.150, replication: 0.200, chinese_l1: 0.075 },
    TrialWord { target: "市電", origin: Origin::Chinese, pos: "noun", log_freq: -6.232, base: 0.475, replication: 0.400, chinese_l1: 0.400 },
    TrialWord { target: "募集し", origin: Origin::Chinese, pos: "verb", log_freq: -4.664, base: 0.100, replication: 0.325, chinese_l1: 0.050 },
    TrialWord { target: "諫める", origin: Origin::Japanese, pos: "verb", log_freq: -7.068, base: 0.775, replication: 0.850, chinese_l1: 0.775 },
    TrialWord { target: "変更されて", origin: Origin::Chinese, pos: "verb", log_freq: -4.105, base: 0.100, replication: 0.050, chinese_l1: 0.100 },
    TrialWord { target: "または", origin: Origin::Japanese, pos: "conjunction", log_freq: -2.939, base: 0.075, replication: 0.050, chinese_l1: 0.075 },
    TrialWord { target: "戦闘曲", origin: Origin::Chinese, pos: "noun", log_freq: -4.224, base: 0.425, replication: 0.625, chinese_l1: 0.425 },
    TrialWord { target: "ロック", origin: Origin::Other, pos: "noun", log_freq: -4.245, base: 0.025, replication: 0.275, chinese_l1: 0.050 },
    TrialWord { target: "はじめ", origin: Origin::Japanese, pos: "verb", log_freq: -4.239, base: 0.025, replication: 0.000, chinese_l1: 0.075 },
    TrialWord { target: "繰り返し", origin: Origin::Japanese, pos: "noun", log_freq: -4.232, base: 0.200, replication: 0.050, chinese_l1: 0.275 },
    TrialWord { target: "小物", origin: Origin::Japanese, pos: "noun", log_freq: -5.112, base: 0.225, replication: 0.275, chinese_l1: 0.325 },
    TrialWord { target: "馴染み深かった", origin: Origin::Japanese, pos: "adjective", log_freq: -7.913, base: 0.500, replication: 0.550, chinese_l1: 0.600 },
    TrialWord { target: "再び", origin: Origin::Japanese, pos: "adverb", log_freq: -4.462, base: 0.075, replication: 0.025, chinese_l1: 0.175 },
    TrialWord { target: "連れ戻す", origin: Origin::Japanese, pos: "verb", log_freq: -6.602, base: 0.300, replication: 0.325, chinese_l1: 0.400 },
    TrialWord { target: "ピックアップして", origin: Origin::Other, pos: "verb", log_freq: -4.977, base: 0.050, replication: 0.075, chinese_l1: 0.175 },
    TrialWord { target: "直ちに", origin: Origin::Japanese, pos: "adverb", log_freq: -5.383, base: 0.275, replication: 0.300, chinese_l1: 0.400 },
    TrialWord { target: "なおかつ", origin: Origin::Japanese, pos: "adverb", log_freq: -5.103, base: 0.500, replication: 0.700, chinese_l1: 0.700 },
    TrialWord { target: "キレさせる", origin: Origin::Japanese, pos: "verb", log_freq: -5.205, base: 0.375, replication: 0.725, chinese_l1: 0.625 },
    TrialWord { target: "コーナー", origin: Origin::Other, pos: "noun", log_freq: -4.325, base: 0.100, replication: 0.225, chinese_l1: 0.050 },
];

pub fn trial_instances() -> Vec<Instance> {
    TRIAL_WORDS
        .iter()
        .enumerate()
        .map(|(i, w)| {
            Instance::new(
                format!("trial_{:02}", i + 1),
                w.target,
                vec![w.target.to_string()],
                vec![w.target.to_string()],
                w.origin,
                w.pos,
                Split::Trial,
            )
            .unwrap()
        })
        .collect()
}

pub fn trial_log_freqs() -> Vec<f64> {
    TRIAL_WORDS.iter().map(|w| w.log_freq).collect()
}

/// Ten grid ratings with the exact mean `m`, which must be a multiple of
/// 0.025: spread `m * 40` quarter-points round-robin over the annotators.
fn ratings_with_mean(m: f64) -> [f64; 10] {
    let quarters = (m * 40.0).round() as u32;
    assert!((m * 40.0 - quarters as f64).abs() < 1e-9, "mean {m} not a multiple of 0.025");
    let base = quarters / 10;
    let extra = quarters % 10;
    let mut out = [0.0; 10];
    for (a, slot) in out.iter_mut().enumerate() {
        let q = base + u32::from((a as u32) < extra);
        *slot = q as f64 / 4.0;
    }
    out
}

/// A 10-annotator grid-valid matrix whose per-word mean ratings equal the
/// requested means exactly.
pub fn matrix_with_means(prefix: &str, means: &[f64]) -> RatingMatrix {
    let annotator_ids: Vec<String> = (0..10).map(|a| format!("{prefix}{a:02}")).collect();
    let instance_ids: Vec<String> = (0..means.len())
        .map(|i| format!("trial_{:02}", i + 1))
        .collect();
    let columns: Vec<[f64; 10]> = means.iter().map(|m| ratings_with_mean(*m)).collect();
    let mut values = Vec::with_capacity(10 * means.len());
    for a in 0..10 {
        for col in &columns {
            values.push(Some(col[a]));
        }
    }
    RatingMatrix::new(annotator_ids, instance_ids, values, true).unwrap()
}

pub fn base_matrix() -> RatingMatrix {
    matrix_with_means("orig", &TRIAL_WORDS.map(|w| w.base))
}

pub fn replication_matrix() -> RatingMatrix {
    matrix_with_means("repl", &TRIAL_WORDS.map(|w| w.replication))
}

pub fn chinese_l1_matrix() -> RatingMatrix {
    matrix_with_means("zh", &TRIAL_WORDS.map(|w| w.chinese_l1))
}

/// A seeded synthetic dataset: word difficulty follows corpus rarity, and
/// each annotator perturbs it with an individual bias. Ratings live on the
/// quarter grid. Returns the instances, the rating matrix, and a corpus
/// count list whose smoothed log-frequency correlates with difficulty.
pub fn synthetic_dataset(
    n_annotators: usize,
    n_instances: usize,
    seed: u64,
) -> (Vec<Instance>, RatingMatrix, Vec<(String, u64)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(n_instances);
    let mut counts = Vec::with_capacity(n_instances);
    let mut difficulty = Vec::with_capacity(n_instances);
    for i in 0..n_instances {
        let word = format!("word{i:03}");
        // Counts spread over four orders of magnitude.
        let count = 10f64.powf(rng.random_range(1.0..5.0)).round() as u64;
        let rarity = 1.0 - (count as f64).log10() / 5.0;
        difficulty.push((rarity + rng.random_range(-0.15..0.15)).clamp(0.0, 1.0));
        counts.push((word.clone(), count.max(1)));
        let split = if i % 5 < 2 { Split::Trial } else { Split::Test };
        instances.push(
            Instance::new(
                format!("syn_{i:03}"),
                word.clone(),
                vec![word.clone()],
                vec![word],
                match i % 4 {
                    0 => Origin::Japanese,
                    1 => Origin::Chinese,
                    2 => Origin::Mixed,
                    _ => Origin::Other,
                },
                if i % 3 == 0 { "noun" } else { "verb" },
                split,
            )
            .unwrap(),
        );
    }
    let annotator_ids: Vec<String> = (0..n_annotators).map(|a| format!("ann{a:02}")).collect();
    let mut values = Vec::with_capacity(n_annotators * n_instances);
    for _ in 0..n_annotators {
        let bias: f64 = rng.random_range(-0.1..0.1);
        for d in &difficulty {
            let noisy = (d + bias + rng.random_range(-0.2..0.2)).clamp(0.0, 1.0);
            let grid = (noisy * 4.0).round() / 4.0;
            values.push(Some(grid));
        }
    }
    let matrix = RatingMatrix::new(
        annotator_ids,
        instances.iter().map(|i| i.id.clone()).collect(),
        values,
        true,
    )
    .unwrap();
    (instances, matrix, counts)
}
