//! Agreement, correlation, and hypothesis-testing machinery: interval-scale
//! Krippendorff alpha, mean pairwise correlation, the two-sided unpaired
//! exact permutation test, a test for comparing dependent correlations, and
//! the origin-contrast and resource-correlation tables built on top of them.
//!
//! Everything here is a pure function of its inputs; Monte-Carlo fallbacks
//! are seeded explicitly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{ComplexityView, Instance, Origin, RatingMatrix};
use crate::error::{Error, Result};
use crate::features::{coverage_mask, Resource};
use crate::numeric::norm_two_sided_p;
use crate::util::{format_p, mean, sample_std};

/// Pearson product-moment correlation.
///
/// Errors on length mismatch, fewer than two observations, or a constant
/// vector (undefined correlation).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "{} vs {} observations",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Undefined("need at least 2 observations".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("constant input vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Krippendorff's alpha for interval values over per-unit rating lists.
///
/// Uses the coincidence-matrix formulation with squared-difference metric:
/// every ordered pair of ratings within a unit contributes with weight
/// `1/(m_u - 1)`. Units holding fewer than two ratings are excluded from
/// both the observed disagreement and the pooled expectation. Returns 1
/// when the pairable values carry no variation at all.
pub fn alpha_interval_units(units: &[Vec<f64>]) -> Result<f64> {
    let mut n = 0.0;
    let mut observed = 0.0;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut pairable = false;
    for unit in units {
        let m = unit.len();
        if m < 2 {
            continue;
        }
        pairable = true;
        let (us1, us2) = unit
            .iter()
            .fold((0.0, 0.0), |(a, b), v| (a + v, b + v * v));
        // Ordered-pair squared differences via moments:
        // sum_{i != j} (x_i - x_j)^2 = 2 (m sum x^2 - (sum x)^2).
        let disagreement = 2.0 * (m as f64 * us2 - us1 * us1);
        observed += disagreement.max(0.0) / (m as f64 - 1.0);
        s1 += us1;
        s2 += us2;
        n += m as f64;
    }
    if !pairable {
        return Err(Error::Undefined(
            "no pairable unit (every instance has fewer than 2 ratings)".into(),
        ));
    }
    let d_o = observed / n;
    let d_e = (2.0 * (n * s2 - s1 * s1)).max(0.0) / (n * (n - 1.0));
    if d_e == 0.0 {
        // All pairable values identical: vacuous perfect agreement.
        return Ok(1.0);
    }
    Ok(1.0 - d_o / d_e)
}

/// Krippendorff's alpha for interval values over a rating matrix, treating
/// instances as units.
pub fn krippendorff_alpha_interval(matrix: &RatingMatrix) -> Result<f64> {
    let units: Vec<Vec<f64>> = (0..matrix.n_instances())
        .map(|i| matrix.unit_values(i).collect())
        .collect();
    alpha_interval_units(&units)
}

/// Unweighted mean of Pearson correlations over all unordered annotator
/// pairs, each computed on the instances the pair co-rated.
pub fn mean_pairwise_pcc(matrix: &RatingMatrix) -> Result<f64> {
    let g = matrix.n_annotators();
    if g < 2 {
        return Err(Error::Undefined("need at least 2 annotators".into()));
    }
    let ids = matrix.annotator_ids();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..g {
        for j in (i + 1)..g {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for col in 0..matrix.n_instances() {
                if let (Some(x), Some(y)) = (matrix.get(i, col), matrix.get(j, col)) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            let r = pearson(&xs, &ys).map_err(|e| {
                Error::Undefined(format!("annotator pair {:?}/{:?}: {e}", ids[i], ids[j]))
            })?;
            sum += r;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// How a permutation p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PermutationMode {
    Exact { n_partitions: u64 },
    MonteCarlo { n_samples: u64, seed: u64 },
}

/// Result of the two-sided unpaired permutation test on a difference in
/// means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationResult {
    /// mean(a) - mean(b) under the original labeling.
    pub observed_diff: f64,
    pub p_value: f64,
    #[serde(flatten)]
    pub mode: PermutationMode,
}

/// Knobs for [`permutation_test_with`].
#[derive(Debug, Clone, Copy)]
pub struct PermutationOptions {
    /// Enumerate exactly when the partition count stays at or below this.
    pub exact_limit: u64,
    /// Monte-Carlo sample count past the limit.
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for PermutationOptions {
    fn default() -> Self {
        PermutationOptions {
            exact_limit: 10_000_000,
            mc_samples: 1_000_000,
            seed: 0,
        }
    }
}

/// `min(C(n, k), cap + 1)`, signalling "over the cap" by `cap + 1`.
fn binomial_capped(n: u64, k: u64, cap: u64) -> u64 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * (n - i) as u128 / (i + 1) as u128;
        if result > cap as u128 {
            return cap + 1;
        }
    }
    result as u64
}

/// Relabeling tolerance: counts a permuted |difference| as at least as
/// extreme as the observed one up to last-ulp noise.
fn extreme_tolerance(obs_abs: f64) -> f64 {
    1e-12 * obs_abs.max(1.0)
}

fn subset_diff(sum: f64, k: usize, total: f64, n: usize) -> f64 {
    sum / k as f64 - (total - sum) / (n - k) as f64
}

fn count_exact(pool: &[f64], start: usize, remaining: usize, sum: f64, hit: &mut impl FnMut(f64)) {
    if remaining == 0 {
        hit(sum);
        return;
    }
    if pool.len() - start < remaining {
        return;
    }
    count_exact(pool, start + 1, remaining - 1, sum + pool[start], hit);
    count_exact(pool, start + 1, remaining, sum, hit);
}

/// Two-sided unpaired permutation test on the difference in group means.
///
/// The p-value is the share of relabelings of the pooled values into groups
/// of the original sizes whose absolute mean difference is at least the
/// observed one; the observed labeling itself always counts. All
/// `C(|a|+|b|, |a|)` relabelings are enumerated when their number stays
/// within `exact_limit`; otherwise seeded Monte-Carlo sampling is used and
/// the identity relabeling is still counted (p = (hits+1)/(samples+1)).
///
/// The pooled values are enumerated in sorted order over the smaller group
/// size, which makes the p-value exactly symmetric in the two arguments.
pub fn permutation_test_with(
    a: &[f64],
    b: &[f64],
    opts: &PermutationOptions,
) -> Result<PermutationResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Invalid("empty group in permutation test".into()));
    }
    let obs = mean(a) - mean(b);
    let obs_abs = obs.abs();
    let tol = extreme_tolerance(obs_abs);

    let mut pool: Vec<f64> = a.iter().chain(b).copied().collect();
    pool.sort_unstable_by(f64::total_cmp);
    let n = pool.len();
    let k = a.len().min(b.len());
    let total: f64 = pool.iter().sum();

    let n_partitions = binomial_capped(n as u64, a.len() as u64, opts.exact_limit);
    if n_partitions <= opts.exact_limit {
        let mut hits = 0u64;
        count_exact(&pool, 0, k, 0.0, &mut |sum| {
            if subset_diff(sum, k, total, n).abs() >= obs_abs - tol {
                hits += 1;
            }
        });
        Ok(PermutationResult {
            observed_diff: obs,
            p_value: hits as f64 / n_partitions as f64,
            mode: PermutationMode::Exact { n_partitions },
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut idx: Vec<usize> = (0..n).collect();
        let mut hits = 0u64;
        for _ in 0..opts.mc_samples {
            for i in 0..k {
                let j = rng.random_range(i..n);
                idx.swap(i, j);
            }
            let sum: f64 = idx[..k].iter().map(|&i| pool[i]).sum();
            if subset_diff(sum, k, total, n).abs() >= obs_abs - tol {
                hits += 1;
            }
        }
        Ok(PermutationResult {
            observed_diff: obs,
            p_value: (hits + 1) as f64 / (opts.mc_samples + 1) as f64,
            mode: PermutationMode::MonteCarlo {
                n_samples: opts.mc_samples,
                seed: opts.seed,
            },
        })
    }
}

/// [`permutation_test_with`] under the default limits.
pub fn permutation_test(a: &[f64], b: &[f64], seed: u64) -> Result<PermutationResult> {
    permutation_test_with(
        a,
        b,
        &PermutationOptions {
            seed,
            ..PermutationOptions::default()
        },
    )
}

/// Result of comparing two dependent correlations sharing one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteigerResult {
    pub z_statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Steiger's test for two dependent correlations `r_jk` and `r_jh` that
/// share the variable `j`, with `r_kh` the correlation between the other
/// two variables (the pooled-mean variant of the 1980 statistic).
///
/// The Fisher-z difference is scaled by `sqrt(n-3) / sqrt(2 - 2s)` where
/// `s` estimates the correlation between the two sample correlations from
/// `r_kh` and the pooled value `(r_jk + r_jh) / 2`.
pub fn steiger_test(r_jk: f64, r_jh: f64, r_kh: f64, n: usize) -> Result<SteigerResult> {
    for r in [r_jk, r_jh, r_kh] {
        if !(-1.0..=1.0).contains(&r) || r.abs() == 1.0 {
            return Err(Error::Invalid(format!(
                "correlation {r} outside the open interval (-1, 1)"
            )));
        }
    }
    if n < 4 {
        return Err(Error::Invalid(format!("sample size {n} below 4")));
    }
    let rbar = 0.5 * (r_jk + r_jh);
    let rbar2 = rbar * rbar;
    let psi = r_kh * (1.0 - 2.0 * rbar2) - 0.5 * rbar2 * (1.0 - 2.0 * rbar2 - r_kh * r_kh);
    let s = psi / ((1.0 - rbar2) * (1.0 - rbar2));
    let denom = 2.0 - 2.0 * s;
    if denom <= 0.0 {
        return Err(Error::Undefined(
            "degenerate correlation structure (non-positive variance of the z difference)".into(),
        ));
    }
    let z = (r_jk.atanh() - r_jh.atanh()) * ((n as f64 - 3.0) / denom).sqrt();
    Ok(SteigerResult {
        z_statistic: z,
        p_value: norm_two_sided_p(z),
        n,
    })
}

/// Mean and sample standard deviation of one origin group on one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapGroupStats {
    pub mean: f64,
    pub std: Option<f64>,
}

/// One compared column of the origin-contrast table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapColumn {
    pub name: String,
    pub first: GapGroupStats,
    pub second: GapGroupStats,
    pub p: PermutationResult,
}

/// Origin-contrast table: per-column group statistics and permutation
/// p-values comparing the two origin groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginGapTable {
    pub origins: (Origin, Origin),
    pub counts: (usize, usize),
    pub columns: Vec<GapColumn>,
}

impl OriginGapTable {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\torigin\tcount\tmean\tstd\tp_value\n");
        for col in &self.columns {
            for (origin, count, stats) in [
                (self.origins.0, self.counts.0, &col.first),
                (self.origins.1, self.counts.1, &col.second),
            ] {
                let std = stats
                    .std
                    .map(|s| format!("{s:.4}"))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{}\t{}\t{}\t{:.4}\t{}\t{}\n",
                    col.name,
                    origin,
                    count,
                    stats.mean,
                    std,
                    format_p(col.p.p_value)
                ));
            }
        }
        out
    }
}

/// Compares two origin groups of instances on per-word complexity: group
/// statistics and permutation p-values for the base complexity, the
/// between-view difference (`other - base`), and optionally a per-instance
/// log-frequency column.
pub fn origin_gap_analysis(
    instances: &[Instance],
    base: &ComplexityView,
    other: &ComplexityView,
    origins: (Origin, Origin),
    log_freqs: Option<&[f64]>,
    opts: &PermutationOptions,
) -> Result<OriginGapTable> {
    for view in [base, other] {
        if view.instance_ids.len() != instances.len()
            || view
                .instance_ids
                .iter()
                .zip(instances)
                .any(|(id, inst)| *id != inst.id)
        {
            return Err(Error::Invalid(
                "view is not aligned with the instance list".into(),
            ));
        }
    }
    if let Some(freqs) = log_freqs {
        if freqs.len() != instances.len() {
            return Err(Error::Dimension(format!(
                "{} log-frequencies for {} instances",
                freqs.len(),
                instances.len()
            )));
        }
    }
    let group: Vec<Vec<usize>> = [origins.0, origins.1]
        .iter()
        .map(|origin| {
            (0..instances.len())
                .filter(|&i| instances[i].origin == *origin)
                .collect()
        })
        .collect();
    for (g, origin) in group.iter().zip([origins.0, origins.1]) {
        if g.is_empty() {
            return Err(Error::Invalid(format!("no instances with origin {origin}")));
        }
    }

    let mut columns = Vec::new();
    let mut push_column = |name: &str, values: &dyn Fn(usize) -> f64| -> Result<()> {
        let first: Vec<f64> = group[0].iter().map(|&i| values(i)).collect();
        let second: Vec<f64> = group[1].iter().map(|&i| values(i)).collect();
        let p = permutation_test_with(&first, &second, opts)?;
        columns.push(GapColumn {
            name: name.to_string(),
            first: GapGroupStats {
                mean: mean(&first),
                std: sample_std(&first),
            },
            second: GapGroupStats {
                mean: mean(&second),
                std: sample_std(&second),
            },
            p,
        });
        Ok(())
    };
    if let Some(freqs) = log_freqs {
        push_column("log_frequency", &|i| freqs[i])?;
    }
    push_column("base_complexity", &|i| base.values[i])?;
    push_column("difference", &|i| other.values[i] - base.values[i])?;

    Ok(OriginGapTable {
        origins,
        counts: (group[0].len(), group[1].len()),
        columns,
    })
}

/// One resource's correlation with complexity, on the full instance list
/// (with missing-value substitutions) and on the covered subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub name: String,
    pub pcc: f64,
    pub potential_pcc: f64,
    pub covered: usize,
    pub total: usize,
}

/// Renders correlation rows as TSV.
pub fn correlation_rows_to_tsv(rows: &[CorrelationRow]) -> String {
    let mut out = String::from("resource\tpcc\tpotential_pcc\tcovered\ttotal\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{:.4}\t{:.4}\t{}\t{}\n",
            r.name, r.pcc, r.potential_pcc, r.covered, r.total
        ));
    }
    out
}

/// Correlates each resource's feature values with the complexity view.
///
/// The plain PCC uses every instance via the resources' missing-value
/// substitutions; the potential PCC restricts to instances the resource
/// fully covers. Rows come back ordered by |PCC| descending.
pub fn correlation_table(
    instances: &[Instance],
    complexity: &ComplexityView,
    resources: &[&Resource],
) -> Result<Vec<CorrelationRow>> {
    if complexity.instance_ids.len() != instances.len()
        || complexity
            .instance_ids
            .iter()
            .zip(instances)
            .any(|(id, inst)| *id != inst.id)
    {
        return Err(Error::Invalid(
            "complexity view is not aligned with the instance list".into(),
        ));
    }
    let mut rows = Vec::new();
    for resource in resources {
        let values: Vec<f64> = instances
            .iter()
            .map(|i| resource.value(i))
            .collect::<Result<_>>()?;
        let pcc = pearson(&values, &complexity.values)?;
        let mask = coverage_mask(resource, instances);
        let covered: Vec<usize> = (0..instances.len()).filter(|&i| mask[i]).collect();
        if covered.len() < 2 {
            return Err(Error::Undefined(format!(
                "resource {:?} covers {} instances; need at least 2 for potential PCC",
                resource.name(),
                covered.len()
            )));
        }
        let cov_values: Vec<f64> = covered.iter().map(|&i| values[i]).collect();
        let cov_complexity: Vec<f64> = covered.iter().map(|&i| complexity.values[i]).collect();
        let potential_pcc = pearson(&cov_values, &cov_complexity).map_err(|e| {
            Error::Undefined(format!("resource {:?}: {e}", resource.name()))
        })?;
        rows.push(CorrelationRow {
            name: resource.name().to_string(),
            pcc,
            potential_pcc,
            covered: covered.len(),
            total: instances.len(),
        });
    }
    rows.sort_by(|a, b| {
        b.pcc
            .abs()
            .total_cmp(&a.pcc.abs())
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(rows)
}
