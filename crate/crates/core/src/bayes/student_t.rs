use libm::lgamma;

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Log density of the location-scale Student-t with `df` degrees of freedom
/// and squared scale `scale2`.
pub fn student_t_logpdf(x: f64, df: f64, location: f64, scale2: f64) -> f64 {
    debug_assert!(df > 0.0 && scale2 > 0.0);
    let z2 = (x - location) * (x - location) / (df * scale2);
    lgamma(0.5 * (df + 1.0)) - lgamma(0.5 * df) - 0.5 * (df.ln() + LN_PI + scale2.ln())
        - 0.5 * (df + 1.0) * z2.ln_1p()
}
