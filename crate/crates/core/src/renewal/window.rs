//! Windows `J_L = {1, ..., L}` of the frozen measure with one site of left
//! context, and an exact sampler for them.
//!
//! Sampling draws the first renewal `F` to the right of the origin, then
//! i.i.d. gaps. Sites `j < F` are forced: the block ending at a renewal `F`
//! reads `... 1 0 1 0 [0^]`, so site `j` is occupied iff `F - j` is even.
//! (Proof: if the previous renewal is at `r < F` then `F = r + 2X + 1` and
//! the occupied sites of `(r, F)` are `r + 1 + 2i = F - 2(X - i)`.)

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{check_delta, FepError, Result};
use crate::renewal::first::FirstRenewalLaw;
use crate::renewal::gap::{GapDraw, GapLaw, TruncatedGapSampler};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstRenewal {
    /// 1-based site of the first renewal flag in the window.
    Within(usize),
    Beyond,
}

/// A window of `L` sites. Sites are 1-based in the public API.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    delta: f64,
    left_context: bool,
    occupancy: Bits,
    renewal_flags: Bits,
    first_renewal: FirstRenewal,
}

impl WindowSample {
    /// Builds a window from raw occupancy; renewal flags are derived.
    pub fn from_sites(delta: f64, left_context: bool, occupancy: Bits) -> Self {
        let renewal_flags = renewal_flags_of(left_context, &occupancy);
        let first_renewal = renewal_flags
            .iter_ones()
            .next()
            .map_or(FirstRenewal::Beyond, |i| FirstRenewal::Within(i + 1));
        Self { delta, left_context, occupancy, renewal_flags, first_renewal }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn left_context(&self) -> bool {
        self.left_context
    }

    pub fn occupancy(&self) -> &Bits {
        &self.occupancy
    }

    pub fn renewal_flags(&self) -> &Bits {
        &self.renewal_flags
    }

    pub fn first_renewal(&self) -> FirstRenewal {
        self.first_renewal
    }

    /// Occupancy of site `i`, `0 <= i <= L` (site 0 is the left context).
    pub fn occupied(&self, site: usize) -> bool {
        if site == 0 {
            self.left_context
        } else {
            self.occupancy.get(site - 1)
        }
    }

    pub fn is_renewal(&self, site: usize) -> bool {
        self.renewal_flags.get(site - 1)
    }

    pub fn particle_count(&self) -> usize {
        self.occupancy.count_ones()
    }

    pub fn renewal_count(&self) -> usize {
        self.renewal_flags.count_ones()
    }

    /// Full support check: no adjacent particles, flags match their
    /// definition, and consecutive flags enclose an alternating `(10)^X`.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.len();
        for site in 1..=n {
            if self.occupied(site) && self.occupied(site - 1) {
                return Err(FepError::AdjacentParticles(site - 1, site));
            }
        }
        if renewal_flags_of(self.left_context, &self.occupancy) != self.renewal_flags {
            return Err(FepError::Corrupted("renewal flags disagree with occupancy".into()));
        }
        let flags: Vec<usize> = self.renewal_flags.iter_ones().map(|i| i + 1).collect();
        for pair in flags.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if (b - a) % 2 == 0 {
                return Err(FepError::Corrupted(format!("even renewal spacing {a}..{b}")));
            }
            for site in a + 1..b {
                if self.occupied(site) != ((site - a) % 2 == 1) {
                    return Err(FepError::Corrupted(format!("gap {a}..{b} is not (10)^X")));
                }
            }
        }
        let first = flags.first().map_or(FirstRenewal::Beyond, |&f| FirstRenewal::Within(f));
        if first != self.first_renewal {
            return Err(FepError::Corrupted("first renewal position mismatch".into()));
        }
        Ok(())
    }

    pub fn to_record(&self) -> WindowRecord {
        WindowRecord {
            delta: self.delta,
            length: self.len(),
            left_context: self.left_context,
            occupancy: BASE64.encode(self.occupancy.to_bytes()),
            first_renewal_position: match self.first_renewal {
                FirstRenewal::Within(f) => Some(f),
                FirstRenewal::Beyond => None,
            },
        }
    }

    pub fn from_record(record: &WindowRecord) -> Result<Self> {
        let bytes = BASE64
            .decode(&record.occupancy)
            .map_err(|e| FepError::Format(format!("occupancy is not base64: {e}")))?;
        let occupancy = Bits::from_bytes(record.length, &bytes)
            .ok_or_else(|| FepError::Format("occupancy length mismatch".into()))?;
        let w = Self::from_sites(record.delta, record.left_context, occupancy);
        let stated = record.first_renewal_position.map_or(FirstRenewal::Beyond, FirstRenewal::Within);
        if stated != w.first_renewal {
            return Err(FepError::Format("first_renewal_position disagrees with occupancy".into()));
        }
        Ok(w)
    }
}

/// Compact serialized form of a [`WindowSample`]; occupancy is the
/// little-endian bit image in base64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub delta: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub left_context: bool,
    pub occupancy: String,
    pub first_renewal_position: Option<usize>,
}

fn renewal_flags_of(left_context: bool, occupancy: &Bits) -> Bits {
    let words = occupancy.words();
    let mut flags = Vec::with_capacity(words.len());
    let mut carry = left_context as u64;
    for &w in words {
        let prev = (w << 1) | carry;
        carry = w >> 63;
        flags.push(!w & !prev);
    }
    Bits::from_words(occupancy.len(), flags)
}

#[derive(Debug, Clone)]
enum Plan<T: Real> {
    /// delta = 0: one of the two alternating configurations.
    Alternating,
    Renewal {
        /// cumulative mass over F = 1..=L, then "beyond, F odd", "beyond, F even"
        first_cdf: Vec<T>,
        gaps: TruncatedGapSampler<T>,
    },
}

/// Exact sampler of windows of a fixed length, immutable once built and
/// safe to share between workers that each own their random stream.
#[derive(Debug, Clone)]
pub struct WindowSampler<T: Real> {
    delta: T,
    length: usize,
    plan: Plan<T>,
}

impl<T: Real> WindowSampler<T> {
    pub fn new(delta: T, length: usize) -> Result<Self> {
        check_delta(delta.lossy_f64())?;
        if length == 0 {
            return Err(FepError::InvalidArgument("window length must be >= 1".into()));
        }
        if delta == T::zero() {
            return Ok(Self { delta, length, plan: Plan::Alternating });
        }
        let mut first = FirstRenewalLaw::new(delta)?;
        let mut acc = CompensatedSum::default();
        let mut first_cdf = Vec::with_capacity(length + 2);
        for l in 1..=length {
            acc.add(&first.p(l)?);
            first_cdf.push(acc.value());
        }
        let (odd, even) = first.beyond_by_parity(length)?;
        acc.add(&odd);
        first_cdf.push(acc.value());
        acc.add(&even);
        first_cdf.push(acc.value());
        let mut gap: GapLaw<T> = first.into_gap_law();
        let gaps = gap.truncated((length - 1) / 2)?;
        Ok(Self { delta, length, plan: Plan::Renewal { first_cdf, gaps } })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> WindowSample {
        let n = self.length;
        let delta = self.delta.lossy_f64();
        let mut occ = Bits::zeros(n);
        match &self.plan {
            Plan::Alternating => {
                let parity = rng.random::<bool>() as usize;
                // sites j = parity (mod 2) are occupied, site j at bit j - 1
                occ.set_alternating(if parity == 1 { 0 } else { 1 }, n);
                WindowSample::from_sites(delta, parity == 0, occ)
            }
            Plan::Renewal { first_cdf, gaps } => {
                let total = *first_cdf.last().unwrap();
                let u = T::of(rng.random::<f64>()) * total;
                let idx = first_cdf.partition_point(|&c| c <= u).min(first_cdf.len() - 1);
                if idx >= n {
                    // F beyond the window: only its parity matters
                    let f_odd = idx == n;
                    occ.set_alternating(if f_odd { 0 } else { 1 }, n);
                    return WindowSample::from_sites(delta, !f_odd, occ);
                }
                let f = idx + 1;
                occ.set_alternating(if f % 2 == 0 { 1 } else { 0 }, f - 1);
                let left_context = f % 2 == 0;
                let mut r = f;
                while r < n {
                    let remaining = n - r;
                    match gaps.sample_within(rng, (remaining - 1) / 2) {
                        GapDraw::Exact(x) => {
                            occ.set_alternating(r, r + 2 * x);
                            r += 2 * x + 1;
                        }
                        GapDraw::Beyond => {
                            occ.set_alternating(r, n);
                            break;
                        }
                    }
                }
                WindowSample::from_sites(delta, left_context, occ)
            }
        }
    }
}

/// One window of length `L` under the frozen measure at `delta`.
pub fn sample_window<R: Rng + ?Sized>(delta: f64, length: usize, rng: &mut R) -> Result<WindowSample> {
    Ok(WindowSampler::new(delta, length)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_stream;

    #[test]
    fn flags_follow_definition() {
        let w = WindowSample::from_sites(0.1, true, Bits::from_str01("0100101"));
        assert_eq!(w.renewal_flags().to_string01(), "0001000");
        assert_eq!(w.first_renewal(), FirstRenewal::Within(4));
        let w = WindowSample::from_sites(0.1, false, Bits::from_str01("0101"));
        assert_eq!(w.renewal_flags().to_string01(), "1000");
        w.check_structure().unwrap();
    }

    #[test]
    fn structure_check_rejects_adjacent_particles() {
        let w = WindowSample::from_sites(0.1, true, Bits::from_str01("1010"));
        assert!(matches!(w.check_structure(), Err(FepError::AdjacentParticles(0, 1))));
        let w = WindowSample::from_sites(0.1, false, Bits::from_str01("0110"));
        assert!(w.check_structure().is_err());
    }

    #[test]
    fn sampled_windows_are_valid() {
        let mut rng = replica_stream(1, 0);
        for &(d, l) in &[(0.0, 1usize), (0.0, 17), (0.05, 1), (0.05, 2), (0.05, 333), (0.3, 70), (0.49, 129)] {
            let sampler = WindowSampler::new(d, l).unwrap();
            for _ in 0..2000 {
                let w = sampler.sample(&mut rng);
                assert_eq!(w.len(), l);
                w.check_structure().unwrap();
            }
        }
    }

    #[test]
    fn zero_delta_windows_alternate_without_renewals() {
        let mut rng = replica_stream(2, 0);
        let sampler = WindowSampler::new(0.0, 9).unwrap();
        let mut seen = [false; 2];
        for _ in 0..100 {
            let w = sampler.sample(&mut rng);
            assert_eq!(w.renewal_count(), 0);
            assert_eq!(w.first_renewal(), FirstRenewal::Beyond);
            let s = w.occupancy().to_string01();
            assert!(s == "101010101" || s == "010101010");
            seen[w.left_context() as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn site_one_density() {
        let mut rng = replica_stream(3, 0);
        let sampler = WindowSampler::new(0.05, 5).unwrap();
        let n = 1_000_000;
        let hits = (0..n).filter(|_| sampler.sample(&mut rng).occupied(1)).count();
        let p = hits as f64 / n as f64;
        let sd = (0.45 * 0.55 / n as f64).sqrt();
        assert!((p - 0.45).abs() < 3.0 * sd, "{p}");
    }

    #[test]
    fn renewal_density_is_two_delta() {
        let mut rng = replica_stream(4, 0);
        let sampler = WindowSampler::new(0.05, 1000).unwrap();
        let n = 20_000;
        let counts: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng).renewal_count() as f64).collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = (var / n as f64).sqrt() / 1000.0;
        assert!((mean / 1000.0 - 0.1).abs() < 3.0 * sd, "{mean}");
    }

    #[test]
    fn record_round_trip() {
        let mut rng = replica_stream(5, 0);
        let w = sample_window(0.1, 77, &mut rng).unwrap();
        let rec = w.to_record();
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"L\":77"));
        let back = WindowSample::from_record(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
