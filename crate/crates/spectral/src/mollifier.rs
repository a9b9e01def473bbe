//! Fourier cutoff `J_eps` and the decay probe for `Id - J_eps`.

/// Even bump: 1 on `|xi| <= 1`, `exp(1 - 1/(1 - (|xi|-1)^2))` on `1 < |xi| < 2`, 0 beyond.
pub fn profile(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 {
        1.0
    } else if a < 2.0 {
        let t = a - 1.0;
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Spectrum on positive modes `1..=len`; the negative half is implied by symmetry.
pub type ModeSpectrum = Vec<f64>;

/// `||(Id - J_eps) u||_{H^sigma} / ||u||_{H^s}` for a real field given by `|u_j|`, `j >= 1`.
pub fn cutoff_ratio(spectrum: &[f64], eps: f64, s: f64, sigma: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, a) in spectrum.iter().enumerate() {
        let j = (k + 1) as f64;
        let bracket = 1.0 + j * j;
        let r = 1.0 - profile(eps * j);
        num += bracket.powf(sigma) * (r * a).powi(2);
        den += bracket.powf(s) * a * a;
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Sample fields `|u_j| = <j>^-beta` on `1..=len` for each decay rate.
pub fn algebraic_samples(betas: &[f64], len: usize) -> Vec<ModeSpectrum> {
    betas.iter().map(|b| (1..=len).map(|j| (1.0 + (j * j) as f64).powf(-b / 2.0)).collect()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpnormReport {
    pub eps: Vec<f64>,
    pub max_ratio: Vec<f64>,
    /// `max_ratio[k+1] / max_ratio[k]`.
    pub ladder: Vec<f64>,
    /// `(eps[k+1]/eps[k])^(s-sigma)`: the ladder must stay strictly below it.
    pub threshold: Vec<f64>,
    pub passes: bool,
}

/// Maximum cutoff ratio over the samples for each `eps`, and the ratio-of-ratios test.
pub fn mollifier_opnorm_probe(eps: &[f64], s: f64, sigma: f64, samples: &[ModeSpectrum]) -> OpnormReport {
    let max_ratio: Vec<f64> = eps.iter().map(|&e| samples.iter().map(|u| cutoff_ratio(u, e, s, sigma)).fold(0.0, f64::max)).collect();
    let mut ladder = Vec::new();
    let mut threshold = Vec::new();
    for k in 1..eps.len() {
        ladder.push(if max_ratio[k - 1] > 0.0 { max_ratio[k] / max_ratio[k - 1] } else { 0.0 });
        threshold.push((eps[k] / eps[k - 1]).powf(s - sigma));
    }
    let passes = sigma > 0.0 && sigma <= s && ladder.iter().zip(&threshold).all(|(l, t)| l < t);
    OpnormReport { eps: eps.to_vec(), max_ratio, ladder, threshold, passes }
}
