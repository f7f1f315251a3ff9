//! Small shared numeric helpers.

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); `None` below two values.
pub(crate) fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Formats a p-value with four significant digits, with values below the
/// 1e-4 resolution printed as `<1e-4`.
pub fn format_p(p: f64) -> String {
    if p < 1e-4 {
        return "<1e-4".to_string();
    }
    let decimals = (3 - p.log10().floor() as i32).max(0) as usize;
    format!("{p:.decimals$}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std_matches_hand_value() {
        // ddof = 1: var([1,2,3]) = 1
        assert_eq!(sample_std(&[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert_eq!(sample_std(&[5.0]), None);
        assert_eq!(sample_std(&[2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.714), "0.7140");
        assert_eq!(format_p(1.0), "1.000");
        assert_eq!(format_p(0.0001234), "0.0001234");
        assert_eq!(format_p(0.00009), "<1e-4");
    }
}
