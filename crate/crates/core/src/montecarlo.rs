//! Monte Carlo outage estimation at SNR level.
//!
//! Samples are generated in fixed-size chunks. Chunk `k` always draws from
//! ChaCha8 stream `k` seeded by the run seed, and per-chunk outcomes are
//! integer counts, so the result depends only on `(seed, n_samples)` and not
//! on how many worker threads share the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::cdf_z;
use crate::error::{Error, Result};
use crate::network::{ChannelGains, SystemConfig};
use crate::protocols::{
    instantaneous_relay_snr, instantaneous_relay_snr_exact, OutageCoefficients, Protocol,
};

/// Samples per substream chunk.
pub const CHUNK_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McRunSpec {
    pub n_samples: u64,
    pub seed: u64,
    /// Worker threads; has no influence on the estimate.
    pub n_streams: usize,
}

impl Default for McRunSpec {
    fn default() -> Self {
        McRunSpec {
            n_samples: 1_000_000,
            seed: 0x5eed_0f0a_7a6e,
            n_streams: 1,
        }
    }
}

impl McRunSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        if self.n_streams < 1 {
            return Err(Error::invalid("n_streams", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// An outage probability together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p: f64,
    /// Binomial standard error for Monte Carlo, 0 for analytic methods.
    pub stderr: f64,
    /// Sample count for Monte Carlo, 0 for analytic methods.
    pub n: u64,
    pub method: EstimateMethod,
}

impl OutageEstimate {
    pub fn analytic(p: f64, method: EstimateMethod) -> Self {
        OutageEstimate {
            p,
            stderr: 0.0,
            n: 0,
            method,
        }
    }

    pub fn from_counts(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        OutageEstimate {
            p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            n,
            method: EstimateMethod::MonteCarlo,
        }
    }

    /// Whether this Monte Carlo estimate is within `k` standard errors of a
    /// reference probability. The larger of the sample stderr and the stderr
    /// implied by the reference is used, so a sample with `p̂ ∈ {0, 1}` is not
    /// held to a zero-width band.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        let n = self.n.max(1) as f64;
        let implied = (reference * (1.0 - reference) / n).sqrt();
        (self.p - reference).abs() <= k * self.stderr.max(implied)
    }
}

/// Exponential variate with the given mean by inversion; `U ∈ (0, 1]`.
fn exponential(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    -mean * u.ln()
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_count(n_samples: u64) -> u64 {
    n_samples.div_ceil(CHUNK_SIZE)
}

fn chunk_len(n_samples: u64, chunk: u64) -> u64 {
    CHUNK_SIZE.min(n_samples - chunk * CHUNK_SIZE)
}

/// Runs `work` on every chunk on a pool of `n_streams` threads, preserving
/// chunk order in the output.
fn map_chunks<T, F>(run: &McRunSpec, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng, u64) -> T + Send + Sync,
{
    run.validate()?;
    let chunks = chunk_count(run.n_samples);
    let one = |k: u64| {
        let mut rng = chunk_rng(run.seed, k);
        work(k, &mut rng, chunk_len(run.n_samples, k))
    };
    if run.n_streams == 1 {
        return Ok((0..chunks).map(one).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.n_streams)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..chunks).into_par_iter().map(one).collect()))
}

/// One Rayleigh draw of the three links destination 1 depends on; draw order
/// is fixed as S-R, R-D1, S-D1.
#[derive(Debug, Clone, Copy)]
struct LinkDraw {
    x_sr: f64,
    x_r1: f64,
    x_s1: f64,
}

fn draw_links(rng: &mut ChaCha8Rng, gains: &ChannelGains) -> LinkDraw {
    LinkDraw {
        x_sr: exponential(rng, gains.omega_sr),
        x_r1: exponential(rng, gains.omega_r1),
        x_s1: exponential(rng, gains.omega_s1),
    }
}

/// Empirical outage frequency of `P1 X_s1 + γ1 < R0` over Rayleigh draws.
pub fn estimate_outage(
    cfg: &SystemConfig,
    gains: &ChannelGains,
    coeffs: &OutageCoefficients,
    run: &McRunSpec,
) -> Result<OutageEstimate> {
    let counts = map_chunks(run, |_, rng, len| {
        let mut hits = 0u64;
        for _ in 0..len {
            let d = draw_links(rng, gains);
            let gamma0 = cfg.p1 * d.x_s1;
            let gamma1 = instantaneous_relay_snr(coeffs, d.x_sr, d.x_r1);
            if gamma0 + gamma1 < coeffs.r0 {
                hits += 1;
            }
        }
        hits
    })?;
    Ok(OutageEstimate::from_counts(
        counts.iter().sum(),
        run.n_samples,
    ))
}

/// Like [`estimate_outage`] but with the exact relay combining weights rather
/// than their high-SNR approximation. Diagnostic only: it measures the
/// approximation error the analytic results inherit.
pub fn estimate_outage_exact_weights(
    cfg: &SystemConfig,
    gains: &ChannelGains,
    protocol: &Protocol,
    run: &McRunSpec,
) -> Result<OutageEstimate> {
    let r0 = protocol.coefficients(cfg).r0;
    let counts = map_chunks(run, |_, rng, len| {
        let mut hits = 0u64;
        for _ in 0..len {
            let d = draw_links(rng, gains);
            let gamma0 = cfg.p1 * d.x_s1;
            let gamma1 = instantaneous_relay_snr_exact(cfg, protocol, d.x_sr, d.x_r1);
            if gamma0 + gamma1 < r0 {
                hits += 1;
            }
        }
        hits
    })?;
    Ok(OutageEstimate::from_counts(
        counts.iter().sum(),
        run.n_samples,
    ))
}

/// Sample means of the three drawn channel powers (S-R, R-D1, S-D1).
pub fn sample_channel_means(gains: &ChannelGains, run: &McRunSpec) -> Result<[f64; 3]> {
    let sums = map_chunks(run, |_, rng, len| {
        let mut acc = [0.0f64; 3];
        for _ in 0..len {
            let d = draw_links(rng, gains);
            acc[0] += d.x_sr;
            acc[1] += d.x_r1;
            acc[2] += d.x_s1;
        }
        acc
    })?;
    let n = run.n_samples as f64;
    let mut total = [0.0f64; 3];
    for s in sums {
        for i in 0..3 {
            total[i] += s[i];
        }
    }
    Ok(total.map(|t| t / n))
}

/// Largest gap between the empirical CDF of `Z = a X Y / (b X + c)` and the
/// analytic CDF over `z_grid`.
pub fn empirical_cdf_check(
    coeffs: &OutageCoefficients,
    gains: &ChannelGains,
    run: &McRunSpec,
    z_grid: &[f64],
) -> Result<f64> {
    if !coeffs.relay_active() {
        return Err(Error::Domain(
            "CDF check needs an active relay path (a > 0)".into(),
        ));
    }
    let counts = map_chunks(run, |_, rng, len| {
        let mut below = vec![0u64; z_grid.len()];
        for _ in 0..len {
            let x_sr = exponential(rng, gains.omega_sr);
            let x_r1 = exponential(rng, gains.omega_r1);
            let z = instantaneous_relay_snr(coeffs, x_sr, x_r1);
            for (count, &zg) in below.iter_mut().zip(z_grid) {
                if z <= zg {
                    *count += 1;
                }
            }
        }
        below
    })?;
    let n = run.n_samples as f64;
    let mut worst = 0.0f64;
    for (i, &z) in z_grid.iter().enumerate() {
        let hits: u64 = counts.iter().map(|c| c[i]).sum();
        let analytic = cdf_z(z, coeffs, gains.omega_sr, gains.omega_r1)?;
        worst = worst.max((hits as f64 / n - analytic).abs());
    }
    Ok(worst)
}
