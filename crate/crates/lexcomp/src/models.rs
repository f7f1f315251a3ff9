//! The two trainable models: L2-regularized linear regression with output
//! clipping for complexity prediction, and class-weighted logistic
//! regression for binary complex-word classification.
//!
//! Both fits are deterministic: the ridge solution is closed-form on
//! mean-centered data, and the logistic fit runs Newton/IRLS from a zero
//! start with step halving. Fitted models are immutable and serialize to
//! JSON with lossless float encoding.

use serde::{Deserialize, Serialize};

use crate::dataset::cwi_label;
use crate::error::{Error, Result};
use crate::matrix::{solve_spd, Matrix};

/// Linear regression with an L2 penalty on the weights (never the
/// intercept); predictions are clamped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2_strength: f64,
}

impl RidgeModel {
    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }
}

/// Minimizes `sum (y - Xw - b)^2 + l2 * ||w||^2` with an unpenalized
/// intercept, solved in closed form on mean-centered data.
///
/// With `l2 = 0` this reduces to ordinary least squares and a rank-deficient
/// design is reported as a singular-system error.
pub fn ridge_fit(x: &Matrix, y: &[f64], l2_strength: f64) -> Result<RidgeModel> {
    if x.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} targets",
            x.rows(),
            y.len()
        )));
    }
    if x.rows() < 2 {
        return Err(Error::Invalid("need at least 2 training rows".into()));
    }
    if l2_strength < 0.0 {
        return Err(Error::Invalid(format!(
            "negative regularization strength {l2_strength}"
        )));
    }
    let k = x.cols();
    let col_means = x.column_means();
    let y_mean = crate::util::mean(y);

    // Gram matrix and moment vector of the centered data.
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (row, yi) in x.iter_rows().zip(y) {
        let yc = yi - y_mean;
        for i in 0..k {
            let xi = row[i] - col_means[i];
            rhs[i] += xi * yc;
            for j in 0..=i {
                gram[i * k + j] += xi * (row[j] - col_means[j]);
            }
        }
    }
    for i in 0..k {
        for j in (i + 1)..k {
            gram[i * k + j] = gram[j * k + i];
        }
        gram[i * k + i] += l2_strength;
    }
    solve_spd(&mut gram, &mut rhs, k)
        .map_err(|_| Error::Singular("degenerate design matrix at l2 = 0".into()))?;
    let weights = rhs;
    let intercept = y_mean
        - col_means
            .iter()
            .zip(&weights)
            .map(|(m, w)| m * w)
            .sum::<f64>();
    Ok(RidgeModel {
        feature_names: Vec::new(),
        weights,
        intercept,
        l2_strength,
    })
}

/// `Xw + b`, component-wise clamped to [0, 1].
pub fn ridge_predict(model: &RidgeModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.weights.len() {
        return Err(Error::Dimension(format!(
            "{} features, model has {}",
            x.cols(),
            model.weights.len()
        )));
    }
    Ok(x.iter_rows()
        .map(|row| {
            let raw = model.intercept
                + row
                    .iter()
                    .zip(&model.weights)
                    .map(|(xi, wi)| xi * wi)
                    .sum::<f64>();
            raw.clamp(0.0, 1.0)
        })
        .collect())
}

/// Per-class weights for the logistic loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    /// Weight of the negative (simple) class.
    pub negative: f64,
    /// Weight of the positive (complex) class.
    pub positive: f64,
}

impl ClassWeights {
    pub fn uniform() -> Self {
        ClassWeights {
            negative: 1.0,
            positive: 1.0,
        }
    }
}

/// The balanced heuristic `w_c = n / (2 * n_c)` per class.
pub fn balanced_class_weights(labels: &[bool]) -> Result<ClassWeights> {
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Invalid(
            "balanced class weights need both classes present".into(),
        ));
    }
    let n = labels.len() as f64;
    Ok(ClassWeights {
        negative: n / (2.0 * n_neg as f64),
        positive: n / (2.0 * n_pos as f64),
    })
}

/// Logistic regression with class-weighted loss and an L2 penalty on the
/// weights (never the intercept).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2_strength: f64,
    pub class_weights: ClassWeights,
}

impl LogisticModel {
    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + exp(eta)) without overflow.
fn ln_1p_exp(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

const IRLS_MAX_ITER: usize = 1000;
const IRLS_TOL: f64 = 1e-10;

/// Newton/IRLS on the weighted negative log-likelihood plus
/// `(l2/2) ||w||^2`, from zero initialization, with step halving whenever a
/// full Newton step would increase the objective. Returns the parameter
/// vector (intercept first) and the objective value after every accepted
/// step.
fn irls(
    x: &Matrix,
    labels: &[bool],
    weights: ClassWeights,
    l2: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = x.cols();
    let dim = k + 1;
    let case_w: Vec<f64> = labels
        .iter()
        .map(|l| if *l { weights.positive } else { weights.negative })
        .collect();
    let y: Vec<f64> = labels.iter().map(|l| if *l { 1.0 } else { 0.0 }).collect();

    let objective = |beta: &[f64]| -> f64 {
        let mut obj = 0.0;
        for (i, row) in x.iter_rows().enumerate() {
            let eta = beta[0]
                + row
                    .iter()
                    .zip(&beta[1..])
                    .map(|(xi, wi)| xi * wi)
                    .sum::<f64>();
            obj += case_w[i] * (ln_1p_exp(eta) - y[i] * eta);
        }
        obj + 0.5 * l2 * beta[1..].iter().map(|w| w * w).sum::<f64>()
    };

    let mut beta = vec![0.0; dim];
    let mut history = vec![objective(&beta)];
    let mut last_step = f64::INFINITY;
    for iter in 0..IRLS_MAX_ITER {
        // Gradient and Hessian at the current point, over [1, x] rows.
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        for (i, row) in x.iter_rows().enumerate() {
            let eta = beta[0]
                + row
                    .iter()
                    .zip(&beta[1..])
                    .map(|(xi, wi)| xi * wi)
                    .sum::<f64>();
            let p = sigmoid(eta);
            let g = case_w[i] * (p - y[i]);
            let h = case_w[i] * p * (1.0 - p);
            grad[0] += g;
            hess[0] += h;
            for a in 0..k {
                grad[a + 1] += g * row[a];
                hess[(a + 1) * dim] += h * row[a];
                for b in 0..=a {
                    hess[(a + 1) * dim + (b + 1)] += h * row[a] * row[b];
                }
            }
        }
        for a in 1..dim {
            grad[a] += l2 * beta[a];
            hess[a * dim + a] += l2;
            for b in 0..a {
                hess[b * dim + a] = hess[a * dim + b];
            }
        }
        let mut delta: Vec<f64> = grad.iter().map(|g| -g).collect();
        solve_spd(&mut hess, &mut delta, dim)
            .map_err(|_| Error::Singular("degenerate Newton system at l2 = 0".into()))?;

        let current = *history.last().expect("objective history nonempty");
        let mut step = 1.0;
        let mut candidate: Vec<f64>;
        loop {
            candidate = beta
                .iter()
                .zip(&delta)
                .map(|(b, d)| b + step * d)
                .collect();
            if objective(&candidate) <= current || step < 1e-12 {
                break;
            }
            step *= 0.5;
        }
        last_step = delta.iter().map(|d| (step * d).abs()).fold(0.0, f64::max);
        beta = candidate;
        history.push(objective(&beta));
        if last_step < IRLS_TOL {
            return Ok((beta, history));
        }
        let _ = iter;
    }
    Err(Error::NoConvergence {
        iterations: IRLS_MAX_ITER,
        last_step,
    })
}

/// Fits with explicit class weights.
pub fn logistic_fit_weighted(
    x: &Matrix,
    labels: &[bool],
    class_weights: ClassWeights,
    l2_strength: f64,
) -> Result<LogisticModel> {
    if x.rows() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} labels",
            x.rows(),
            labels.len()
        )));
    }
    if l2_strength < 0.0 {
        return Err(Error::Invalid(format!(
            "negative regularization strength {l2_strength}"
        )));
    }
    if !labels.iter().any(|l| *l) || labels.iter().all(|l| *l) {
        return Err(Error::Invalid(
            "logistic fit needs both classes present".into(),
        ));
    }
    let (beta, _) = irls(x, labels, class_weights, l2_strength)?;
    Ok(LogisticModel {
        feature_names: Vec::new(),
        weights: beta[1..].to_vec(),
        intercept: beta[0],
        l2_strength,
        class_weights,
    })
}

/// Fits with balanced class weights derived from the labels.
pub fn logistic_fit(x: &Matrix, labels: &[bool], l2_strength: f64) -> Result<LogisticModel> {
    let weights = balanced_class_weights(labels)?;
    logistic_fit_weighted(x, labels, weights, l2_strength)
}

/// Predicted probabilities of the positive class, strictly inside (0, 1).
pub fn logistic_proba(model: &LogisticModel, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != model.weights.len() {
        return Err(Error::Dimension(format!(
            "{} features, model has {}",
            x.cols(),
            model.weights.len()
        )));
    }
    Ok(x.iter_rows()
        .map(|row| {
            sigmoid(
                model.intercept
                    + row
                        .iter()
                        .zip(&model.weights)
                        .map(|(xi, wi)| xi * wi)
                        .sum::<f64>(),
            )
        })
        .collect())
}

/// Positive iff the predicted probability reaches the decision threshold.
pub fn logistic_predict(
    model: &LogisticModel,
    x: &Matrix,
    decision_threshold: f64,
) -> Result<Vec<bool>> {
    if !(0.0..1.0).contains(&decision_threshold) || decision_threshold == 0.0 {
        return Err(Error::Invalid(format!(
            "decision threshold {decision_threshold} outside (0, 1)"
        )));
    }
    Ok(logistic_proba(model, x)?
        .into_iter()
        .map(|p| p >= decision_threshold)
        .collect())
}

/// Interprets real-valued complexity predictions as binary labels.
pub fn lcp_to_cwi(predictions: &[f64], threshold: f64) -> Vec<bool> {
    predictions
        .iter()
        .map(|p| cwi_label(*p, threshold))
        .collect()
}

#[cfg(test)]
pub(crate) fn irls_objective_history(
    x: &Matrix,
    labels: &[bool],
    class_weights: ClassWeights,
    l2: f64,
) -> Vec<f64> {
    irls(x, labels, class_weights, l2).unwrap().1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_two_point_fixture() {
        // Points (-1, 0), (1, 1) at l2 = 1: centered normal equations give
        // w = 1/3, b = 1/2.
        let x = Matrix::column(&[-1.0, 1.0]);
        let m = ridge_fit(&x, &[0.0, 1.0], 1.0).unwrap();
        assert!((m.weights[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.intercept - 0.5).abs() < 1e-15);
        // Inside the valid range the prediction is the raw affine value.
        let p = ridge_predict(&m, &Matrix::column(&[1.0])).unwrap();
        assert!((p[0] - (0.5 + 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn ridge_zero_l2_is_ols() {
        let x = Matrix::column(&[0.0, 1.0, 2.0]);
        let m = ridge_fit(&x, &[0.1, 0.4, 0.7], 0.0).unwrap();
        assert!((m.weights[0] - 0.3).abs() < 1e-12);
        assert!((m.intercept - 0.1).abs() < 1e-12);
    }

    #[test]
    fn ridge_shift_moves_intercept_only() {
        let x = Matrix::from_rows(&[
            vec![0.2, 1.0],
            vec![0.9, -0.5],
            vec![0.4, 0.3],
            vec![0.1, 0.8],
        ])
        .unwrap();
        let y = [0.3, 0.8, 0.5, 0.2];
        let shifted: Vec<f64> = y.iter().map(|v| v + 0.17).collect();
        let m1 = ridge_fit(&x, &y, 1.0).unwrap();
        let m2 = ridge_fit(&x, &shifted, 1.0).unwrap();
        for (a, b) in m1.weights.iter().zip(&m2.weights) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((m2.intercept - m1.intercept - 0.17).abs() < 1e-12);
    }

    #[test]
    fn ridge_rejects_degenerate_unregularized_design() {
        let x = Matrix::column(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            ridge_fit(&x, &[0.0, 0.5, 1.0], 0.0),
            Err(Error::Singular(_))
        ));
        // The same design is fine with a positive penalty.
        assert!(ridge_fit(&x, &[0.0, 0.5, 1.0], 1.0).is_ok());
    }

    #[test]
    fn ridge_predictions_are_clamped() {
        let x = Matrix::column(&[-10.0, 10.0]);
        let m = RidgeModel {
            feature_names: vec![],
            weights: vec![1.0],
            intercept: 0.0,
            l2_strength: 1.0,
        };
        assert_eq!(ridge_predict(&m, &x).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn balanced_weights_formula() {
        let labels: Vec<bool> = std::iter::repeat(true)
            .take(10)
            .chain(std::iter::repeat(false).take(30))
            .collect();
        let w = balanced_class_weights(&labels).unwrap();
        assert_eq!(w.positive, 2.0);
        assert!((w.negative - 2.0 / 3.0).abs() < 1e-15);

        let balanced: Vec<bool> = [true, false].repeat(8);
        let w = balanced_class_weights(&balanced).unwrap();
        assert_eq!(w.positive, 1.0);
        assert_eq!(w.negative, 1.0);

        let skewed: Vec<bool> = std::iter::once(true)
            .chain(std::iter::repeat(false).take(99))
            .collect();
        let w = balanced_class_weights(&skewed).unwrap();
        assert_eq!(w.positive, 50.0);
        assert!((w.negative - 100.0 / 198.0).abs() < 1e-15);

        assert!(balanced_class_weights(&[true, true]).is_err());
    }

    #[test]
    fn logistic_positive_weight_on_separable_direction() {
        let x = Matrix::column(&[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]);
        let labels = [false, false, false, true, true, true];
        let m = logistic_fit(&x, &labels, 1.0).unwrap();
        assert!(m.weights[0] > 0.0);
    }

    #[test]
    fn logistic_symmetric_data_zero_intercept() {
        let x = Matrix::column(&[-1.0, -1.0, 1.0, 1.0]);
        let labels = [false, false, true, true];
        let m = logistic_fit(&x, &labels, 1.0).unwrap();
        assert!(m.intercept.abs() < 1e-10, "intercept {}", m.intercept);
    }

    #[test]
    fn logistic_objective_decreases() {
        let x = Matrix::from_rows(&[
            vec![0.1],
            vec![0.9],
            vec![0.4],
            vec![0.6],
            vec![0.2],
            vec![0.8],
        ])
        .unwrap();
        let labels = [false, true, false, true, false, true];
        let history =
            irls_objective_history(&x, &labels, ClassWeights::uniform(), 1.0);
        for pair in history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "objective increased: {pair:?}");
        }
    }

    #[test]
    fn logistic_predict_threshold_convention() {
        let m = LogisticModel {
            feature_names: vec![],
            weights: vec![0.0],
            intercept: 0.0,
            l2_strength: 1.0,
            class_weights: ClassWeights::uniform(),
        };
        // Probability is exactly 0.5 everywhere: >= makes it positive.
        let x = Matrix::column(&[-3.0, 0.0, 3.0]);
        assert_eq!(
            logistic_predict(&m, &x, 0.5).unwrap(),
            vec![true, true, true]
        );
    }

    #[test]
    fn lcp_to_cwi_threshold_edge() {
        assert_eq!(lcp_to_cwi(&[0.375, 0.374], 0.375), vec![true, false]);
        assert_eq!(lcp_to_cwi(&[0.0, 0.0], 0.375), vec![false, false]);
        assert_eq!(lcp_to_cwi(&[1.0], 0.375), vec![true]);
    }

    #[test]
    fn models_round_trip_json_exactly() {
        let x = Matrix::column(&[-1.0, 1.0, 0.3, -0.2]);
        let m = ridge_fit(&x, &[0.1, 0.9, 0.55, 0.3], 1.0)
            .unwrap()
            .with_feature_names(vec!["f0".into()]);
        let json = serde_json::to_string(&m).unwrap();
        let back: RidgeModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);

        let labels = [false, true, false, true];
        let lm = logistic_fit(&x, &labels, 1.0)
            .unwrap()
            .with_feature_names(vec!["f0".into()]);
        let json = serde_json::to_string(&lm).unwrap();
        let back: LogisticModel = serde_json::from_str(&json).unwrap();
        assert_eq!(lm, back);
    }
}
