//! Ring configuration with an incrementally maintained set of mobile
//! particles, and the two update rules.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{FepError, Result};

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Symmetric continuous-time dynamics, rate 1/2 per feasible direction.
    Continuous,
    /// Discrete-time totally asymmetric dynamics with simultaneous updates.
    ParallelTa,
}

impl Rule {
    pub fn code(self) -> u8 {
        match self {
            Rule::Continuous => 0,
            Rule::ParallelTa => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Rule::Continuous),
            1 => Some(Rule::ParallelTa),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::Continuous => "continuous",
            Rule::ParallelTa => "parallel-ta",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Rule {
    type Err = FepError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Rule::Continuous),
            "parallel-ta" | "parallel" => Ok(Rule::ParallelTa),
            _ => Err(FepError::InvalidArgument(format!("unknown rule {s:?}"))),
        }
    }
}

/// One continuous-time jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jump {
    pub from: usize,
    pub to: usize,
}

/// Occupancy of a ring of `N` sites.
///
/// A particle at `x` is mobile iff exactly one of its neighbours is occupied;
/// it then jumps away from that neighbour. The mobile set is kept as a dense
/// list plus a position index so that uniform selection and local updates are
/// both O(1).
#[derive(Debug, Clone)]
pub struct LatticeConfig {
    occ: Bits,
    mobile: Vec<u32>,
    slot: Vec<u32>,
    time: f64,
    sweeps: u64,
}

impl LatticeConfig {
    pub fn from_bits(occ: Bits) -> Result<Self> {
        if occ.len() < 2 {
            return Err(FepError::InvalidArgument("ring needs at least 2 sites".into()));
        }
        if occ.len() >= ABSENT as usize {
            return Err(FepError::InvalidArgument("ring too large".into()));
        }
        let mut cfg = Self { slot: vec![ABSENT; occ.len()], occ, mobile: Vec::new(), time: 0.0, sweeps: 0 };
        cfg.rebuild_mobile();
        Ok(cfg)
    }

    pub fn from_str01(s: &str) -> Result<Self> {
        Self::from_bits(Bits::from_str01(s))
    }

    pub fn ring_size(&self) -> usize {
        self.occ.len()
    }

    pub fn occupancy(&self) -> &Bits {
        &self.occ
    }

    pub fn into_occupancy(self) -> Bits {
        self.occ
    }

    pub fn particle_count(&self) -> usize {
        self.occ.count_ones()
    }

    /// Continuous time elapsed.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Parallel sweeps performed.
    pub fn sweeps(&self) -> u64 {
        self.sweeps
    }

    pub fn mobile_count(&self) -> usize {
        self.mobile.len()
    }

    /// Mobile particle positions, in no particular order.
    pub fn mobile_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.mobile.iter().map(|&x| x as usize)
    }

    pub fn mobile_set_sorted(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.mobile_sites().collect();
        v.sort_unstable();
        v
    }

    /// Mobile set recomputed from scratch.
    pub fn scan_mobile(&self) -> Vec<usize> {
        (0..self.ring_size()).filter(|&x| self.is_mobile(x)).collect()
    }

    /// No particle can move. A completely filled ring is stuck but not
    /// frozen in the sense of [`Self::is_frozen`].
    pub fn is_stuck(&self) -> bool {
        self.mobile.is_empty()
    }

    /// No two neighbouring sites are occupied.
    pub fn is_frozen(&self) -> bool {
        first_adjacent_pair(&self.occ).is_none()
    }

    fn left(&self, x: usize) -> usize {
        if x == 0 { self.ring_size() - 1 } else { x - 1 }
    }

    fn right(&self, x: usize) -> usize {
        if x + 1 == self.ring_size() { 0 } else { x + 1 }
    }

    fn is_mobile(&self, x: usize) -> bool {
        self.occ.get(x) && (self.occ.get(self.left(x)) != self.occ.get(self.right(x)))
    }

    fn refresh(&mut self, x: usize) {
        let want = self.is_mobile(x);
        let have = self.slot[x] != ABSENT;
        if want && !have {
            self.slot[x] = self.mobile.len() as u32;
            self.mobile.push(x as u32);
        } else if !want && have {
            let i = self.slot[x] as usize;
            let last = self.mobile.pop().unwrap();
            if i < self.mobile.len() {
                self.mobile[i] = last;
                self.slot[last as usize] = i as u32;
            }
            self.slot[x] = ABSENT;
        }
    }

    fn rebuild_mobile(&mut self) {
        for &x in &self.mobile {
            self.slot[x as usize] = ABSENT;
        }
        self.mobile.clear();
        for x in 0..self.ring_size() {
            if self.is_mobile(x) {
                self.slot[x] = self.mobile.len() as u32;
                self.mobile.push(x as u32);
            }
        }
    }

    /// One rejection-free continuous-time event: a uniformly chosen mobile
    /// particle jumps, and time advances by an exponential holding time of
    /// rate `|mobile| / 2`.
    pub fn step_continuous<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Jump> {
        if self.mobile.is_empty() {
            return Err(FepError::Frozen);
        }
        let rate = 0.5 * self.mobile.len() as f64;
        let hold: f64 = rng.sample(Exp1);
        self.time += hold / rate;
        let from = self.mobile[rng.random_range(0..self.mobile.len())] as usize;
        let to = if self.occ.get(self.left(from)) { self.right(from) } else { self.left(from) };
        self.occ.set(from, false);
        self.occ.set(to, true);
        // only `from`, `to` and their neighbours can change status
        let mut x = self.left(self.left(from));
        for _ in 0..5 {
            self.refresh(x);
            x = self.right(x);
        }
        Ok(Jump { from, to })
    }

    /// One parallel sweep: every particle with an occupied left neighbour and
    /// an empty right neighbour moves one site to the right. Returns the
    /// number of particles moved.
    pub fn step_parallel_ta(&mut self) -> usize {
        self.sweep(true)
    }

    fn sweep(&mut self, keep_mobile: bool) -> usize {
        let n = self.ring_size();
        let words = self.occ.words();
        let left = shift_from_left(words, n);
        let right = shift_from_right(words, n);
        let movers: Vec<u64> =
            words.iter().zip(&left).zip(&right).map(|((&w, &l), &r)| w & l & !r).collect();
        let moved: usize = movers.iter().map(|w| w.count_ones() as usize).sum();
        self.sweeps += 1;
        if moved == 0 {
            return 0;
        }
        let arrivals = shift_from_left(&movers, n);
        let next: Vec<u64> =
            words.iter().zip(&movers).zip(&arrivals).map(|((&w, &m), &a)| (w & !m) | a).collect();
        self.occ = Bits::from_words(n, next);
        if keep_mobile {
            self.rebuild_mobile();
        }
        moved
    }

    /// Runs `rule` until no particle can move or `max_events` events (jumps
    /// or sweeps) have been applied.
    pub fn run_to_frozen<R: Rng + ?Sized>(mut self, rule: Rule, max_events: u64, rng: &mut R) -> RunOutcome {
        let mut events = 0u64;
        // a frozen ring has an empty site after every particle
        if 2 * self.particle_count() > self.ring_size() {
            return RunOutcome::NotFrozen { config: self, events };
        }
        match rule {
            Rule::Continuous => {
                while !self.mobile.is_empty() {
                    if events == max_events {
                        return RunOutcome::NotFrozen { config: self, events };
                    }
                    self.step_continuous(rng).expect("mobile set is nonempty");
                    events += 1;
                }
            }
            Rule::ParallelTa => {
                loop {
                    if events == max_events {
                        self.rebuild_mobile();
                        return RunOutcome::NotFrozen { config: self, events };
                    }
                    events += 1;
                    if self.sweep(false) == 0 {
                        // the idle sweep is not counted
                        self.sweeps -= 1;
                        break;
                    }
                }
                self.rebuild_mobile();
            }
        }
        if self.is_frozen() {
            let freeze_time = match rule {
                Rule::Continuous => self.time,
                Rule::ParallelTa => self.sweeps as f64,
            };
            RunOutcome::Frozen { config: self, freeze_time }
        } else {
            RunOutcome::NotFrozen { config: self, events }
        }
    }
}

/// Result of [`LatticeConfig::run_to_frozen`].
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Frozen { config: LatticeConfig, freeze_time: f64 },
    /// Event cap reached, or a stuck configuration that is not frozen.
    NotFrozen { config: LatticeConfig, events: u64 },
}

impl RunOutcome {
    pub fn is_frozen(&self) -> bool {
        matches!(self, RunOutcome::Frozen { .. })
    }

    pub fn config(&self) -> &LatticeConfig {
        match self {
            RunOutcome::Frozen { config, .. } | RunOutcome::NotFrozen { config, .. } => config,
        }
    }
}

/// I.i.d. Bernoulli(`rho`) occupancy on a ring of `n` sites.
pub fn init_bernoulli<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<LatticeConfig> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(FepError::InvalidArgument(format!("density {rho} outside [0, 1]")));
    }
    let mut occ = Bits::zeros(n);
    for x in 0..n {
        if rng.random::<f64>() < rho {
            occ.set(x, true);
        }
    }
    LatticeConfig::from_bits(occ)
}

/// Bit `x` of the result is bit `x - 1` of `words` (cyclically, ring of `n`).
fn shift_from_left(words: &[u64], n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(words.len());
    let mut carry = 0u64;
    for &w in words {
        out.push((w << 1) | carry);
        carry = w >> 63;
    }
    let last = n - 1;
    let wrap = (words[last >> 6] >> (last & 63)) & 1;
    out[0] |= wrap;
    if n & 63 != 0 {
        // bit n was shifted in from site n - 1; drop it
        let k = out.len() - 1;
        out[k] &= (1u64 << (n & 63)) - 1;
    }
    out
}

/// Bit `x` of the result is bit `x + 1` of `words` (cyclically, ring of `n`).
fn shift_from_right(words: &[u64], n: usize) -> Vec<u64> {
    let m = words.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let next = if i + 1 < m { words[i + 1] } else { 0 };
        out.push((words[i] >> 1) | (next << 63));
    }
    let last = n - 1;
    out[last >> 6] |= (words[0] & 1) << (last & 63);
    out
}

/// First `(x, x + 1)` with both sites occupied, cyclically.
pub(crate) fn first_adjacent_pair(occ: &Bits) -> Option<(usize, usize)> {
    let n = occ.len();
    let right = shift_from_right(occ.words(), n);
    occ.words().iter().zip(&right).enumerate().find_map(|(i, (&w, &r))| {
        let both = w & r;
        (both != 0).then(|| {
            let x = (i << 6) | both.trailing_zeros() as usize;
            (x, (x + 1) % n)
        })
    })
}
