use serde::Serialize;

use crate::energy::EnergyHistory;

/// Energy fraction below which a member counts as extinguished. Sits above
/// the numerical residue a finite grid leaves behind after exact extinction.
pub const DEFAULT_EXTINCTION_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberDecay {
    pub member: u64,
    /// `−slope/2` of the fitted `ln E`, so that `‖x(t)‖ ≈ C e^{−ωt}`.
    pub omega: Option<f64>,
    pub residual: Option<f64>,
    pub extinct: bool,
    pub extinction_time: Option<f64>,
    pub fit_window: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEstimate {
    /// Smallest rate over members that did not go extinct.
    pub omega: Option<f64>,
    /// Largest residual over the same members.
    pub residual: Option<f64>,
    /// Every member went extinct: the rate is unbounded.
    pub extinction: bool,
    pub extinction_time: Option<f64>,
    pub horizon: f64,
    pub floor: f64,
    pub members: Vec<MemberDecay>,
}

/// Least-squares line through `(t, y)`: slope and RMS residual.
fn line_fit(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss: f64 = ts.iter().zip(ys).map(|(t, y)| (y - my - slope * (t - mt)).powi(2)).sum();
    (slope, (ss / n).sqrt())
}

/// Fits `ln(E(t)/E(0))` over the second half of the run.
///
/// A member whose energy falls below `floor·E(0)` is reported as extinct at
/// the first such time; the residue after that is grid noise, not decay.
/// The residual is the RMS misfit in `ln E` relative to the fitted drop
/// across the window (at least one), so it reads as a fraction of the
/// signal rather than in absolute log units.
pub fn fit_member(member: u64, history: &EnergyHistory, floor: f64) -> MemberDecay {
    let e = history.energies();
    let dt = history.dt();
    let e0 = e[0];
    let cut = if e0 > 0.0 { e.iter().position(|&v| v <= floor * e0) } else { Some(0) };
    if let Some(k) = cut {
        return MemberDecay {
            member,
            omega: None,
            residual: None,
            extinct: true,
            extinction_time: Some(k as f64 * dt),
            fit_window: [0.0, k as f64 * dt],
        };
    }
    let start = (e.len() - 1) / 2;
    let ts: Vec<f64> = (start..e.len()).map(|k| k as f64 * dt).collect();
    let ys: Vec<f64> = e[start..].iter().map(|v| (v.max(1e-300) / e0).ln()).collect();
    let (slope, rms) = line_fit(&ts, &ys);
    let span = ts.last().copied().unwrap_or(0.0) - ts[0];
    MemberDecay {
        member,
        omega: Some(-0.5 * slope),
        residual: Some(rms / (slope.abs() * span).max(1.0)),
        extinct: false,
        extinction_time: None,
        fit_window: [ts[0], ts[0] + span],
    }
}

pub fn fit_decay(histories: &[EnergyHistory], floor: f64) -> DecayEstimate {
    let members: Vec<MemberDecay> = histories.iter().enumerate().map(|(i, h)| fit_member(i as u64, h, floor)).collect();
    let live: Vec<&MemberDecay> = members.iter().filter(|m| !m.extinct).collect();
    let omega = live.iter().filter_map(|m| m.omega).reduce(f64::min);
    let residual = live.iter().filter_map(|m| m.residual).reduce(f64::max);
    let extinction = !members.is_empty() && live.is_empty();
    let extinction_time =
        if extinction { members.iter().filter_map(|m| m.extinction_time).reduce(f64::max) } else { None };
    DecayEstimate {
        omega,
        residual,
        extinction,
        extinction_time,
        horizon: histories.iter().map(EnergyHistory::horizon).fold(0.0, f64::max),
        floor,
        members,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(dt: f64, energies: Vec<f64>) -> EnergyHistory {
        let z = vec![0.0; energies.len()];
        EnergyHistory::new(dt, energies, z.clone(), z).unwrap()
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let dt = 0.01;
        let e: Vec<f64> = (0..1001).map(|k| 3.0 * (-2.0 * 0.3 * k as f64 * dt).exp()).collect();
        let m = fit_member(0, &history(dt, e), 1e-5);
        assert!((m.omega.unwrap() - 0.3).abs() < 1e-12);
        assert!(m.residual.unwrap() < 1e-12);
        assert_eq!(m.fit_window, [5.0, 10.0]);
    }

    #[test]
    fn drop_below_floor_is_extinction() {
        let e = vec![1.0, 0.5, 1e-7, 1e-9];
        let m = fit_member(0, &history(0.5, e), 1e-5);
        assert!(m.extinct);
        assert_eq!(m.extinction_time, Some(1.0));
        assert_eq!(m.omega, None);
    }

    #[test]
    fn ensemble_rate_is_the_slowest_live_member() {
        let dt = 0.1;
        let mk = |w: f64| history(dt, (0..101).map(|k| (-2.0 * w * k as f64 * dt).exp()).collect());
        let est = fit_decay(&[mk(0.2), mk(0.1), history(dt, vec![1.0, 0.0])], 1e-5);
        assert!((est.omega.unwrap() - 0.1).abs() < 1e-12);
        assert!(!est.extinction);
        assert!(est.members[2].extinct);
    }
}
