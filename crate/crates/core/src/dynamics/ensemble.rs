//! Independent frozen replicas and their binary container.
//!
//! Layout (little-endian): magic `FEPFROZE`, version `u32`, ring size `u64`,
//! density `f64`, rule `u8`, replica count `u64`, master seed `u64`; then per
//! replica: seed index `u64`, freeze time `f64`, occupancy byte image of
//! `ceil(N / 8)` bytes.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::bits::Bits;
use crate::dynamics::lattice::{first_adjacent_pair, init_bernoulli, Rule, RunOutcome};
use crate::error::{FepError, Result};
use crate::renewal::WindowSample;
use crate::rng::replica_stream;

const MAGIC: &[u8; 8] = b"FEPFROZE";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenReplica {
    pub seed_index: u64,
    pub freeze_time: f64,
    pub occupancy: Bits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrozenEnsemble {
    pub ring_size: usize,
    pub rho: f64,
    pub rule: Rule,
    pub master_seed: u64,
    pub replicas: Vec<FrozenReplica>,
}

impl FrozenEnsemble {
    /// Runs `replicas` independent trajectories from Bernoulli(`rho`) data,
    /// replica `r` on stream `(master_seed, r)`. Any replica that fails to
    /// freeze within `max_events` aborts with [`FepError::NotFrozen`].
    pub fn simulate(
        ring_size: usize,
        rho: f64,
        rule: Rule,
        replicas: u64,
        master_seed: u64,
        max_events: u64,
    ) -> Result<Self> {
        let items: Vec<Result<FrozenReplica>> = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let mut rng = replica_stream(master_seed, r);
                let cfg = init_bernoulli(ring_size, rho, &mut rng)?;
                match cfg.run_to_frozen(rule, max_events, &mut rng) {
                    RunOutcome::Frozen { config, freeze_time } => {
                        Ok(FrozenReplica { seed_index: r, freeze_time, occupancy: config.into_occupancy() })
                    }
                    RunOutcome::NotFrozen { events, .. } => Err(FepError::NotFrozen { replica: r, events }),
                }
            })
            .collect();
        let replicas = items.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self { ring_size, rho, rule, master_seed, replicas })
    }

    pub fn delta(&self) -> f64 {
        0.5 - self.rho
    }

    /// Gap variables of every replica, concatenated in replica order.
    pub fn gaps(&self) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for r in &self.replicas {
            out.extend(extract_gaps(&r.occupancy)?);
        }
        Ok(out)
    }

    /// Windows of `length` sites starting at `0, stride, 2 stride, ...` in
    /// each replica (no wrap), each with its left neighbour as context.
    /// Returns one batch per replica.
    pub fn windows(&self, length: usize, stride: usize) -> Result<Vec<Vec<WindowSample>>> {
        if length == 0 || stride < length {
            return Err(FepError::InvalidArgument("need 0 < length <= stride".into()));
        }
        let n = self.ring_size;
        let delta = self.delta();
        Ok(self
            .replicas
            .iter()
            .map(|r| {
                (0..)
                    .map(|i| i * stride)
                    .take_while(|&start| start + length <= n)
                    .map(|start| {
                        let ctx = r.occupancy.get((start + n - 1) % n);
                        WindowSample::from_sites(delta, ctx, r.occupancy.cyclic_slice(start, length))
                    })
                    .collect()
            })
            .collect())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(VERSION)?;
        w.write_u64::<LittleEndian>(self.ring_size as u64)?;
        w.write_f64::<LittleEndian>(self.rho)?;
        w.write_u8(self.rule.code())?;
        w.write_u64::<LittleEndian>(self.replicas.len() as u64)?;
        w.write_u64::<LittleEndian>(self.master_seed)?;
        for r in &self.replicas {
            w.write_u64::<LittleEndian>(r.seed_index)?;
            w.write_f64::<LittleEndian>(r.freeze_time)?;
            w.write_all(&r.occupancy.to_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(FepError::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != VERSION {
            return Err(FepError::Format(format!("unsupported version {version}")));
        }
        let ring_size = r.read_u64::<LittleEndian>()? as usize;
        let rho = r.read_f64::<LittleEndian>()?;
        let rule = Rule::from_code(r.read_u8()?).ok_or_else(|| FepError::Format("bad rule code".into()))?;
        let count = r.read_u64::<LittleEndian>()?;
        let master_seed = r.read_u64::<LittleEndian>()?;
        let mut buf = vec![0u8; ring_size.div_ceil(8)];
        let mut replicas = Vec::new();
        for _ in 0..count {
            let seed_index = r.read_u64::<LittleEndian>()?;
            let freeze_time = r.read_f64::<LittleEndian>()?;
            r.read_exact(&mut buf)?;
            let occupancy =
                Bits::from_bytes(ring_size, &buf).ok_or_else(|| FepError::Format("stray bits past ring end".into()))?;
            if let Some((a, b)) = first_adjacent_pair(&occupancy) {
                return Err(FepError::AdjacentParticles(a, b));
            }
            replicas.push(FrozenReplica { seed_index, freeze_time, occupancy });
        }
        Ok(Self { ring_size, rho, rule, master_seed, replicas })
    }
}

/// Gap variables `X = (d - 1) / 2` between cyclically consecutive renewal
/// events (empty sites whose left neighbour is empty), starting from the
/// first renewal on the ring.
pub fn extract_gaps(occ: &Bits) -> Result<Vec<usize>> {
    if let Some((a, b)) = first_adjacent_pair(occ) {
        return Err(FepError::AdjacentParticles(a, b));
    }
    let n = occ.len();
    let renewals: Vec<usize> = (0..n).filter(|&x| !occ.get(x) && !occ.get((x + n - 1) % n)).collect();
    let Some(&first) = renewals.first() else {
        return Ok(Vec::new());
    };
    let mut gaps = Vec::with_capacity(renewals.len());
    for (i, &r) in renewals.iter().enumerate() {
        let next = renewals.get(i + 1).copied().unwrap_or(first + n);
        let d = next - r;
        if d % 2 == 0 {
            return Err(FepError::Corrupted(format!("even renewal spacing {d} at site {r}")));
        }
        gaps.push((d - 1) / 2);
    }
    Ok(gaps)
}

/// Empirical gap histogram over `0..bins` plus one tail bin, normalized.
pub fn gap_histogram(gaps: &[usize], bins: usize) -> Vec<f64> {
    let mut h = vec![0.0; bins + 1];
    for &g in gaps {
        h[g.min(bins)] += 1.0;
    }
    let total = gaps.len().max(1) as f64;
    h.iter_mut().for_each(|v| *v /= total);
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert_eq!(extract_gaps(&Bits::from_str01("100100")).unwrap(), vec![1, 1]);
        assert!(extract_gaps(&Bits::from_str01("101010")).unwrap().is_empty());
        assert_eq!(extract_gaps(&Bits::from_str01("0101001010000")).unwrap(), vec![2, 2, 0, 0, 0]);
        assert!(matches!(extract_gaps(&Bits::from_str01("0110")), Err(FepError::AdjacentParticles(1, 2))));
    }

    #[test]
    fn container_round_trip() {
        let ens = FrozenEnsemble::simulate(1000, 0.4, Rule::ParallelTa, 3, 9, 1_000_000).unwrap();
        let mut buf = Vec::new();
        ens.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 8 + 8 + 1 + 8 + 8 + 3 * (16 + 125));
        let back = FrozenEnsemble::read_from(&buf[..]).unwrap();
        assert_eq!(back, ens);
        buf[0] = b'X';
        assert!(matches!(FrozenEnsemble::read_from(&buf[..]), Err(FepError::Format(_))));
    }

    #[test]
    fn simulation_is_reproducible() {
        let a = FrozenEnsemble::simulate(4096, 0.45, Rule::Continuous, 4, 77, u64::MAX).unwrap();
        let b = FrozenEnsemble::simulate(4096, 0.45, Rule::Continuous, 4, 77, u64::MAX).unwrap();
        assert_eq!(a, b);
        for r in &a.replicas {
            assert!(first_adjacent_pair(&r.occupancy).is_none());
        }
    }

    #[test]
    fn windows_carry_ring_context() {
        let ens = FrozenEnsemble::simulate(2000, 0.45, Rule::ParallelTa, 2, 1, u64::MAX).unwrap();
        let batches = ens.windows(101, 201).unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].len(), 10);
        for (b, r) in batches.iter().zip(&ens.replicas) {
            assert_eq!(b[0].left_context(), r.occupancy.get(1999));
            assert_eq!(b[1].left_context(), r.occupancy.get(200));
            for w in b {
                w.check_structure().unwrap();
            }
        }
    }

    #[test]
    fn histogram_normalized() {
        let h = gap_histogram(&[0, 0, 1, 40], 30);
        assert_eq!(h.len(), 31);
        assert_eq!(h[0], 0.5);
        assert_eq!(h[30], 0.25);
    }
}
