//! Particle count in terms of renewal count and a boundary term:
//! `N = (L - (N_ren + sigma)) / 2` with `sigma` in `{-1, 0, 1}`.
//!
//! `sigma = 0` when `L - N_ren` is even. Otherwise it is read off the end
//! sites `(eta_1, eta_L)`, writing `0^` for a renewal and `0` for any other
//! empty site: `+1` for `(0, 0)` and `(0, 0^)`, `-1` for `(0^, 1)` and
//! `(1, 1)`. No other pair is compatible with an odd `L - N_ren`.

use serde::Serialize;

use crate::error::{FepError, Result};
use crate::renewal::WindowSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub n: usize,
    pub n_ren: usize,
    pub sigma: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Particle,
    Hole,
    Renewal,
}

fn mark(w: &WindowSample, site: usize) -> Mark {
    if w.occupied(site) {
        Mark::Particle
    } else if w.is_renewal(site) {
        Mark::Renewal
    } else {
        Mark::Hole
    }
}

pub fn decompose(w: &WindowSample) -> Result<Decomposition> {
    let l = w.len();
    if l == 0 {
        return Err(FepError::InvalidArgument("empty window".into()));
    }
    if w.occupied(1) && w.occupied(0) {
        return Err(FepError::Corrupted("site 1 and its left context are both occupied".into()));
    }
    let n = w.particle_count();
    let n_ren = w.renewal_count();
    let sigma = if (l - n_ren).is_multiple_of(2) {
        0
    } else {
        match (mark(w, 1), mark(w, l)) {
            (Mark::Hole, Mark::Hole) | (Mark::Hole, Mark::Renewal) => 1,
            (Mark::Renewal, Mark::Particle) | (Mark::Particle, Mark::Particle) => -1,
            (a, b) => {
                return Err(FepError::Corrupted(format!(
                    "end sites {a:?}, {b:?} with odd L - N_ren"
                )))
            }
        }
    };
    if 2 * n as i64 != l as i64 - (n_ren as i64 + sigma as i64) {
        return Err(FepError::Corrupted(format!(
            "N = {n} violates N = (L - (N_ren + sigma)) / 2 with L = {l}, N_ren = {n_ren}, sigma = {sigma}"
        )));
    }
    Ok(Decomposition { n, n_ren, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;

    fn window(ctx: bool, s: &str) -> WindowSample {
        WindowSample::from_sites(0.1, ctx, Bits::from_str01(s))
    }

    #[test]
    fn hand_traced_windows() {
        // 1 0 0^ 1 0
        let w = window(false, "10010");
        assert!(w.is_renewal(3));
        assert_eq!(decompose(&w).unwrap(), Decomposition { n: 2, n_ren: 1, sigma: 0 });
        // 0 1 0 0^ after an occupied site
        let w = window(true, "0100");
        assert_eq!(decompose(&w).unwrap(), Decomposition { n: 1, n_ren: 1, sigma: 1 });
        // alternating odd window starting occupied
        let w = window(false, "1010101");
        assert_eq!(decompose(&w).unwrap(), Decomposition { n: 4, n_ren: 0, sigma: -1 });
    }

    #[test]
    fn renewal_then_particle() {
        // 0^ 1 0 1 with empty context: N_ren = 1, L - N_ren = 3
        let w = window(false, "0101");
        assert_eq!(decompose(&w).unwrap(), Decomposition { n: 2, n_ren: 1, sigma: -1 });
    }

    #[test]
    fn rejects_occupied_context_pair() {
        assert!(matches!(decompose(&window(true, "1010")), Err(FepError::Corrupted(_))));
    }

    #[test]
    fn rejects_non_frozen_content() {
        // "11" inside the window breaks the identity
        assert!(decompose(&window(false, "0110")).is_err());
    }
}
