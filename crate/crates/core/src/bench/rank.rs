use crate::error::{Error, Result};

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData("spearman needs at least 2 pairs".into()));
    }
    if xs.iter().chain(ys).any(|x| !x.is_finite()) {
        return Err(Error::Contract("spearman inputs must be finite".into()));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ties_share_average_rank() {
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[3.0, 3.0, 3.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn identical_and_reversed() {
        let xs = [0.1, 0.5, 0.2, 0.9];
        assert_relative_eq!(spearman(&xs, &xs).unwrap(), 1.0, epsilon = 1e-15);
        let ys = [-0.1, -0.5, -0.2, -0.9];
        assert_relative_eq!(spearman(&xs, &ys).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn tied_example_matches_hand_ranks() {
        // ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4):
        // centered (-1.5, 0, 0, 1.5) and (-1.5, 0.5, -0.5, 1.5)
        // rho = 4.5 / sqrt(4.5 * 5) = sqrt(0.9)
        let rho = spearman(&[1.0, 2.0, 2.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_relative_eq!(rho, 0.9f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn constant_side_is_undefined() {
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation)
        ));
        assert!(spearman(&[1.0], &[1.0]).is_err());
    }
}
