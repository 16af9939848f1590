//! Decomposition entropy of a pure state over a fixed product basis.
//!
//! S_q of the probability weights p = |c|², with the q=0, q=1, and q=∞
//! cases computed by their limit formulas. All logarithms are natural.

use crate::error::{MdentError, Result};
use crate::state::State;

/// Support-count tolerance used when none is given explicitly.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-8;

/// Rényi order: a finite q ≥ 0 or the q → ∞ limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    /// Parses "inf"/"infinity"/"∞" or a non-negative number.
    pub fn parse(text: &str) -> Result<Order> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Order::Infinity);
        }
        let q: f64 = t
            .parse()
            .map_err(|_| MdentError::InvalidParameter(format!("cannot parse order '{}'", text)))?;
        if !q.is_finite() || q < 0.0 {
            return Err(MdentError::InvalidParameter(format!(
                "order must be a non-negative finite number or 'inf', got '{}'",
                text
            )));
        }
        Ok(Order::Finite(q))
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Finite(q) => write!(f, "{}", q),
            Order::Infinity => write!(f, "inf"),
        }
    }
}

/// Compensated (Kahan) summation.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let y = x - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Number of amplitudes with |c| > tol.
pub fn support(state: &State, tol: f64) -> Result<usize> {
    if !(tol >= 0.0) {
        return Err(MdentError::InvalidParameter(
            "support tolerance must be non-negative".into(),
        ));
    }
    Ok(state
        .amplitudes()
        .iter()
        .filter(|z| z.norm() > tol)
        .count())
}

/// Inverse participation ratio IPR_q = Σ p^q for q > 1.
pub fn ipr(state: &State, q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(MdentError::InvalidParameter(format!(
            "IPR is defined for q > 1, got {}",
            q
        )));
    }
    Ok(kahan_sum(state.probabilities().into_iter().filter_map(
        |p| {
            if p > 0.0 {
                Some((q * p.ln()).exp())
            } else {
                None
            }
        },
    )))
}

fn shannon(probs: &[f64]) -> f64 {
    kahan_sum(probs.iter().filter_map(|&p| {
        if p > 0.0 {
            Some(-p * p.ln())
        } else {
            None
        }
    }))
}

/// S_q of the probability weights, with the largest weight factored out so
/// that large q stays well-conditioned.
fn renyi_finite(probs: &[f64], q: f64) -> f64 {
    let pmax = probs.iter().cloned().fold(0.0f64, f64::max);
    let sum = kahan_sum(probs.iter().filter_map(|&p| {
        if p > 0.0 {
            Some((q * (p / pmax).ln()).exp())
        } else {
            None
        }
    }));
    (sum.ln() + q * pmax.ln()) / (1.0 - q)
}

/// Rényi decomposition entropy S_q with the default q=0 support tolerance.
pub fn renyi_entropy(state: &State, q: Order) -> Result<f64> {
    renyi_entropy_with_tol(state, q, DEFAULT_SUPPORT_TOL)
}

/// Rényi decomposition entropy S_q.
///
/// q ∉ {0,1,∞}: (1/(1−q))·ln Σ p^q; q=0: ln support(tol); q=1: −Σ p ln p;
/// q=∞: −ln max p.
pub fn renyi_entropy_with_tol(state: &State, q: Order, support_tol: f64) -> Result<f64> {
    let probs = state.probabilities();
    match q {
        Order::Infinity => {
            let pmax = probs.iter().cloned().fold(0.0f64, f64::max);
            Ok(-pmax.ln())
        }
        Order::Finite(q) => {
            if !q.is_finite() || q < 0.0 {
                return Err(MdentError::InvalidParameter(format!(
                    "order must be non-negative, got {}",
                    q
                )));
            }
            if q == 0.0 {
                let count = support(state, support_tol)?;
                if count == 0 {
                    return Err(MdentError::InvalidParameter(format!(
                        "no amplitude exceeds the support tolerance {:e}",
                        support_tol
                    )));
                }
                Ok((count as f64).ln())
            } else if q == 1.0 {
                Ok(shannon(&probs))
            } else {
                Ok(renyi_finite(&probs, q))
            }
        }
    }
}

/// Lower bound ⌊n/2⌋·ln d on the minimal decomposition entropy of any
/// AME(n,d) state.
pub fn ame_lower_bound(n: usize, d: usize) -> f64 {
    (n / 2) as f64 * (d as f64).ln()
}

/// Upper bound ln R_max on the minimal decomposition entropy, where
/// R_max = d^n − n·d·(d−1)/2 counts the amplitudes that survive after local
/// unitaries zero out as many as possible.
pub fn support_upper_bound(n: usize, d: usize) -> Result<f64> {
    if n < 1 || d < 2 {
        return Err(MdentError::InvalidParameter(
            "need n ≥ 1 and d ≥ 2".into(),
        ));
    }
    let total = (d as i128).pow(n as u32);
    let removable = (n as i128) * (d as i128) * (d as i128 - 1) / 2;
    let r_max = total - removable;
    if r_max <= 0 {
        return Err(MdentError::InvalidParameter(format!(
            "removable count {} exhausts the {} amplitudes",
            removable, total
        )));
    }
    Ok((r_max as f64).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::flat_index;
    use crate::C64;
    use approx::assert_abs_diff_eq;

    fn ghz(n: usize, d: usize) -> State {
        let dim = d.pow(n as u32);
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for j in 0..d {
            amps[flat_index(&vec![j; n], d).unwrap()] = C64::new(1.0, 0.0);
        }
        State::from_amplitudes(n, d, amps).unwrap()
    }

    #[test]
    fn ghz_is_ln2_for_every_order() {
        let g = ghz(3, 2);
        let ln2 = 2f64.ln();
        for q in [
            Order::Finite(0.0),
            Order::Finite(0.5),
            Order::Finite(1.0),
            Order::Finite(2.0),
            Order::Finite(5.0),
            Order::Infinity,
        ] {
            assert_abs_diff_eq!(renyi_entropy(&g, q).unwrap(), ln2, epsilon = 1e-12);
        }
    }

    #[test]
    fn ipr_examples() {
        let basis = State::basis_state(2, 2, &[0, 1]).unwrap();
        assert_abs_diff_eq!(ipr(&basis, 2.0).unwrap(), 1.0, epsilon = 1e-15);
        let g = ghz(3, 2);
        assert_abs_diff_eq!(ipr(&g, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        let uniform =
            State::from_amplitudes(3, 2, vec![C64::new(1.0, 0.0); 8]).unwrap();
        assert_abs_diff_eq!(ipr(&uniform, 2.0).unwrap(), 1.0 / 8.0, epsilon = 1e-15);
        assert!(ipr(&g, 1.0).is_err());
    }

    #[test]
    fn renyi_matches_ipr_at_q2() {
        let mut rng = crate::random::rng_from_seed(11);
        for _ in 0..20 {
            let s = crate::random::random_haar_state(3, 2, &mut rng);
            let s2 = renyi_entropy(&s, Order::Finite(2.0)).unwrap();
            assert_abs_diff_eq!(s2, -ipr(&s, 2.0).unwrap().ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn support_counts_amplitudes() {
        let g = ghz(3, 2);
        assert_eq!(support(&g, 1e-8).unwrap(), 2);
        assert_eq!(support(&g, 1.0).unwrap(), 0);
        assert!(support(&g, -1.0).is_err());
    }

    #[test]
    fn monotone_in_q_on_random_states() {
        let grid = [
            Order::Finite(0.0),
            Order::Finite(0.5),
            Order::Finite(1.0),
            Order::Finite(2.0),
            Order::Finite(5.0),
            Order::Infinity,
        ];
        let mut rng = crate::random::rng_from_seed(12);
        for _ in 0..20 {
            let s = crate::random::random_haar_state(3, 2, &mut rng);
            let vals: Vec<f64> = grid
                .iter()
                .map(|q| renyi_entropy(&s, *q).unwrap())
                .collect();
            for w in vals.windows(2) {
                assert!(w[0] >= w[1] - 1e-10, "entropy not monotone: {:?}", vals);
            }
        }
    }

    #[test]
    fn bounds() {
        assert_abs_diff_eq!(ame_lower_bound(3, 2), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(ame_lower_bound(4, 3), 9f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(ame_lower_bound(4, 4), 16f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(support_upper_bound(3, 2).unwrap(), 5f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            support_upper_bound(4, 3).unwrap(),
            69f64.ln(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            support_upper_bound(4, 2).unwrap(),
            12f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn order_parsing() {
        assert_eq!(Order::parse("2").unwrap(), Order::Finite(2.0));
        assert_eq!(Order::parse("inf").unwrap(), Order::Infinity);
        assert_eq!(Order::parse("Infinity").unwrap(), Order::Infinity);
        assert!(Order::parse("-1").is_err());
        assert!(Order::parse("nan").is_err());
    }

    #[test]
    fn rejects_negative_order() {
        let g = ghz(3, 2);
        assert!(renyi_entropy(&g, Order::Finite(-0.5)).is_err());
    }

    #[test]
    fn large_q_is_stable() {
        let g = ghz(3, 2);
        // All weights equal, so S_q = ln 2 at every q including q = 50.
        assert_abs_diff_eq!(
            renyi_entropy(&g, Order::Finite(50.0)).unwrap(),
            2f64.ln(),
            epsilon = 1e-12
        );
    }
}
