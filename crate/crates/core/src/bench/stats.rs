//! Summary statistics and t-tests.

use super::BenchError;

/// Normal-approximation 95% interval multiplier.
pub const Z95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Standard error of the mean; zero when `n < 2`.
    pub se: f64,
    /// `1.96 · se`.
    pub ci95: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn ci95(samples: &[f64]) -> Result<SummaryStats, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::Stats("no samples".into()));
    }
    let n = samples.len();
    let m = mean(samples);
    let se = if n < 2 { 0.0 } else { (sample_variance(samples, m) / n as f64).sqrt() };
    Ok(SummaryStats { n, mean: m, se, ci95: Z95 * se })
}

fn degenerate(diff: f64, df: f64) -> TTest {
    if diff == 0.0 {
        TTest { t: 0.0, p: 1.0, df }
    } else {
        TTest { t: diff.signum() * f64::INFINITY, p: 0.0, df }
    }
}

/// Unequal-variance two-sample t-test with Welch–Satterthwaite df.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TTest, BenchError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(BenchError::Stats("welch test needs at least two samples per group".into()));
    }
    let (ma, mb) = (mean(a), mean(b));
    let va = sample_variance(a, ma) / a.len() as f64;
    let vb = sample_variance(b, mb) / b.len() as f64;
    let s2 = va + vb;
    if s2 == 0.0 {
        return Ok(degenerate(ma - mb, (a.len() + b.len() - 2) as f64));
    }
    let df = s2 * s2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    let t = (ma - mb) / s2.sqrt();
    Ok(TTest { t, p: t_two_sided_p(t, df), df })
}

/// One-sample t-test of `diffs` against zero.
pub fn paired_t(diffs: &[f64]) -> Result<TTest, BenchError> {
    if diffs.len() < 2 {
        return Err(BenchError::Stats("paired test needs at least two differences".into()));
    }
    let n = diffs.len() as f64;
    let m = mean(diffs);
    let v = sample_variance(diffs, m);
    let df = n - 1.0;
    if v == 0.0 {
        return Ok(degenerate(m, df));
    }
    let t = m / (v / n).sqrt();
    Ok(TTest { t, p: t_two_sided_p(t, df), df })
}

/// `P(|T| ≥ |t|)` for Student's t with `df` degrees of freedom.
pub fn t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(0.5 * df, 0.5, x).clamp(0.0, 1.0)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

// Lentz's method on the standard continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
