//! Peak picking on scans and dominant-frequency estimation on time series.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex as FftComplex, FftPlanner};

use crate::error::{Error, Result};

/// Indices that are strict maxima over `±window` neighbours and exceed
/// `threshold`. Points closer than `window` to either end are compared only
/// against the neighbours that exist.
pub fn find_peaks(values: &[f64], window: usize, threshold: f64) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let v = values[i];
            v > threshold
                && (i.saturating_sub(window)..(i + window + 1).min(n))
                    .filter(|&j| j != i)
                    .all(|j| v > values[j])
        })
        .collect()
}

/// Interior strict local minima over `±window` neighbours.
pub fn find_minima(values: &[f64], window: usize) -> Vec<usize> {
    let n = values.len();
    if n < 2 * window + 1 {
        return Vec::new();
    }
    (window..n - window)
        .filter(|&i| (i - window..=i + window).filter(|&j| j != i).all(|j| values[i] < values[j]))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyEstimate {
    /// Angular frequency.
    pub omega: f64,
    /// Half the width of one (zero-padded) frequency bin.
    pub uncertainty: f64,
    /// Peak power over median power.
    pub prominence: f64,
    /// Peak-to-peak excursion of the input.
    pub amplitude: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    pub zero_padding: usize,
    /// Minimum peak-to-median power ratio for a detection.
    pub min_prominence: f64,
    /// Minimum peak-to-peak excursion for a detection.
    pub min_amplitude: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { zero_padding: 8, min_prominence: 5.0, min_amplitude: 0.0 }
    }
}

/// Dominant angular frequency of a uniformly sampled real signal.
///
/// Mean removal, Hann window, zero padding, then a parabola through the
/// largest bin and its neighbours.
pub fn dominant_frequency(samples: &[f64], dt: f64, opts: &SpectralOptions) -> Result<FrequencyEstimate> {
    let n = samples.len();
    if n < 8 || !(dt > 0.0) {
        return Err(Error::NoOscillation);
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let amplitude = hi - lo;
    if !amplitude.is_finite() || amplitude <= opts.min_amplitude || amplitude == 0.0 {
        return Err(Error::NoOscillation);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let len = n * opts.zero_padding.max(1);
    let mut buf: Vec<FftComplex<f64>> = vec![FftComplex::new(0.0, 0.0); len];
    for (i, (b, s)) in buf.iter_mut().zip(samples).enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
        *b = FftComplex::new((s - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    let half = len / 2;
    let power: Vec<f64> = buf[..=half].iter().map(|z| z.norm_sqr()).collect();
    let (peak, &pmax) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .ok_or(Error::NoOscillation)?;
    let mut sorted = power[1..].to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let prominence = if median > 0.0 { pmax / median } else { f64::INFINITY };
    if !(pmax > 0.0) || prominence < opts.min_prominence || peak == half {
        return Err(Error::NoOscillation);
    }

    let mag = |i: usize| power[i].sqrt();
    let (a, b, c) = (mag(peak - 1), mag(peak), mag(peak + 1));
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let bin = 2.0 * PI / (len as f64 * dt);
    Ok(FrequencyEstimate { omega: (peak as f64 + shift) * bin, uncertainty: 0.5 * bin, prominence, amplitude })
}
