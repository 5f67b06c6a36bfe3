use super::SessionResult;
use crate::error::{Error, Result};
use crate::security::binary_entropy_unchecked;

/// One empirical statistic next to its analytic prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    /// Standard error of the empirical value under the analytic model.
    pub std_error: f64,
    pub z: f64,
}

impl Comparison {
    fn new(name: &'static str, analytic: f64, empirical: f64, std_error: f64, samples: f64) -> Self {
        // A model probability of exactly 0 or 1 would give a zero error; one
        // count out of `samples` is the resolution of the estimate anyway.
        let std_error = std_error.max(1.0 / samples.max(1.0));
        Self {
            name,
            analytic,
            empirical,
            std_error,
            z: (empirical - analytic) / std_error,
        }
    }
}

/// Compares `p00`, `p10`, `p_ok`, the sifted error rate and the key fraction.
///
/// Per-round probabilities are pooled over both of Alice's bits (`p00` is the
/// probability of a correct conclusive outcome). The empirical key fraction is
/// `p̂_ok·(1 - I_E - h(ber̂))` with the analytic Eve bound: the fraction that
/// ideal reconciliation would leave.
pub fn empirical_vs_analytic(result: &SessionResult) -> Result<Vec<Comparison>> {
    let n = result.rounds() as f64;
    if result.rounds() == 0 {
        return Err(Error::Empty("session without rounds"));
    }
    let a = &result.analytic_p;
    let e = &result.empirical_p;
    let binomial = |p: f64, count: f64| (p * (1.0 - p) / count).sqrt();

    let mut out = vec![
        Comparison::new("p00", a.p00, e.p00, binomial(a.p00, n), n),
        Comparison::new("p10", a.p10, e.p10, binomial(a.p10, n), n),
        Comparison::new("p_ok", a.p_ok, e.p_ok, binomial(a.p_ok, n), n),
    ];

    let expected_sifted = a.p_ok * n;
    let ber_analytic = a.conditional_error().unwrap_or(0.5);
    let ber_empirical = result.sifted_ber().unwrap_or(0.0);
    out.push(Comparison::new(
        "ber",
        ber_analytic,
        ber_empirical,
        binomial(ber_analytic, expected_sifted.max(1.0)),
        expected_sifted,
    ));

    let eve = result.analytic.eve_info_bound;
    let fraction = |correct: f64, wrong: f64| {
        let ok = correct + wrong;
        if ok <= 0.0 {
            0.0
        } else {
            ok * (1.0 - eve - binary_entropy_unchecked(wrong / ok))
        }
    };
    // Delta method over the trinomial (correct, wrong, inconclusive); the
    // gradient of p·h(w/p) is (log2(p/c), log2(p/w)).
    let (c, w) = (a.p00, a.p10);
    let grad = |x: f64| if x > 0.0 { 1.0 - eve - (a.p_ok / x).log2() } else { 0.0 };
    let (gc, gw) = (grad(c), grad(w));
    let mean = gc * c + gw * w;
    let variance = ((gc * gc * c + gw * gw * w) - mean * mean).max(0.0) / n;
    out.push(Comparison::new(
        "final_fraction",
        result.analytic.raw_key_fraction,
        fraction(e.p00, e.p10),
        variance.sqrt(),
        n,
    ));
    Ok(out)
}
