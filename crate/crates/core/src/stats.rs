//! Small-sample statistics used by the validation harnesses.

use alloc::vec::Vec;

/// Mean, variance (n - 1 denominator), skewness and (non-excess) kurtosis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Two-pass sample moments. Skewness and kurtosis use the plain moment
/// ratios `m3 / m2^1.5` and `m4 / m2^2`.
pub fn sample_moments(xs: &[f64]) -> SampleMoments {
    let n = xs.len();
    if n == 0 {
        return SampleMoments {
            n,
            mean: f64::NAN,
            variance: f64::NAN,
            skewness: f64::NAN,
            kurtosis: f64::NAN,
        };
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    SampleMoments {
        n,
        mean,
        variance: if n > 1 { m2 * nf / (nf - 1.0) } else { 0.0 },
        skewness: m3 / libm::pow(m2, 1.5),
        kurtosis: m4 / (m2 * m2),
    }
}

/// Batch-means estimates for a correlated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchMeans {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

/// Splits `xs` into `n_batches` contiguous batches (dropping the remainder)
/// and estimates the standard errors of the overall mean and of the overall
/// variance from the spread of the per-batch values.
pub fn batch_means(xs: &[f64], n_batches: usize) -> BatchMeans {
    assert!(n_batches >= 2, "need at least two batches");
    let len = xs.len() / n_batches;
    assert!(len >= 2, "batches too short");
    let used = &xs[..len * n_batches];
    let mean = used.iter().sum::<f64>() / used.len() as f64;
    let mut bm = Vec::with_capacity(n_batches);
    let mut bv = Vec::with_capacity(n_batches);
    for b in used.chunks_exact(len) {
        bm.push(b.iter().sum::<f64>() / len as f64);
        // deviations from the global mean so the batch values average to the
        // overall second central moment
        bv.push(b.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / len as f64);
    }
    let se = |v: &[f64]| {
        let k = v.len() as f64;
        let m = v.iter().sum::<f64>() / k;
        let s2 = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1.0);
        (m, libm::sqrt(s2 / k))
    };
    let (_, mean_se) = se(&bm);
    let (variance, variance_se) = se(&bv);
    BatchMeans {
        mean,
        mean_se,
        variance,
        variance_se,
    }
}

/// Ranks starting at 1, ties replaced by their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = alloc::vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            r[k] = avg;
        }
        i = j;
    }
    r
}

/// Pearson correlation; NaN if either input is constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / libm::sqrt(sxx * syy)
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    pearson(&ranks(xs), &ranks(ys))
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}
