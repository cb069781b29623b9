//! Explicit formulas for specific degree laws.
//!
//! These are written directly from the family parameters and do not touch
//! [`GenFun`](super::GenFun); they serve as independent references for the
//! generic numeric path.

/// Poisson(`c`) degrees.
pub mod poisson {
    /// Unexplored degree law stays Poisson with mean `c (1 - alpha)`.
    pub fn g(c: f64, alpha: f64, s: f64) -> f64 {
        (c * (1.0 - alpha) * (s - 1.0)).exp()
    }

    /// A Poisson law is its own size-biased law.
    pub fn g_hat(c: f64, alpha: f64, s: f64) -> f64 {
        g(c, alpha, s)
    }

    pub fn alpha_c(c: f64) -> f64 {
        1.0 - 1.0 / c
    }

    /// Solves `1 - rho = exp(-c (1 - alpha) rho)` for `alpha`.
    pub fn alpha_of_rho(c: f64, rho: f64) -> f64 {
        if rho == 0.0 {
            return alpha_c(c);
        }
        1.0 + (1.0 - rho).ln() / (c * rho)
    }
}

/// `d`-regular graphs.
pub mod regular {
    fn keep(d: u32, alpha: f64) -> f64 {
        (1.0 - alpha).powf((d as f64 - 2.0) / d as f64)
    }

    pub fn g(d: u32, alpha: f64, s: f64) -> f64 {
        (1.0 + (s - 1.0) * keep(d, alpha)).powi(d as i32)
    }

    pub fn g_hat(d: u32, alpha: f64, s: f64) -> f64 {
        (1.0 + (s - 1.0) * keep(d, alpha)).powi(d as i32 - 1)
    }

    pub fn alpha_c(d: u32) -> f64 {
        let d = d as f64;
        1.0 - (d - 1.0).powf(-d / (d - 2.0))
    }

    pub fn alpha_of_rho(d: u32, rho: f64) -> f64 {
        if rho == 0.0 {
            return alpha_c(d);
        }
        let d = d as f64;
        1.0 - ((1.0 - (1.0 - rho).powf(1.0 / (d - 1.0))) / rho).powf(d / (d - 2.0))
    }

    /// Integrand of `H_max(d) = 1 - int_0^1 integrand(x) dx`.
    pub fn h_max_integrand(d: u32, x: f64) -> f64 {
        let d = d as f64;
        if x >= 1.0 {
            return (1.0 / (d - 1.0)).powf(d / (d - 2.0));
        }
        ((1.0 - x.powf(1.0 / (d - 1.0))) / (1.0 - x)).powf(d / (d - 2.0))
    }
}

/// Binomial(`d`, `p`) degrees.
pub mod binomial {
    /// Success probability of the unexplored law, which stays binomial.
    pub fn p_alpha(d: u32, p: f64, alpha: f64) -> f64 {
        p * (1.0 - alpha).powf((d as f64 - 2.0) / d as f64)
    }

    pub fn g(d: u32, p: f64, alpha: f64, s: f64) -> f64 {
        let pa = p_alpha(d, p, alpha);
        (1.0 - pa + pa * s).powi(d as i32)
    }

    pub fn g_hat(d: u32, p: f64, alpha: f64, s: f64) -> f64 {
        let pa = p_alpha(d, p, alpha);
        (1.0 - pa + pa * s).powi(d as i32 - 1)
    }

    pub fn alpha_c(d: u32, p: f64) -> f64 {
        // critical when (d - 1) p_alpha = 1
        let d_f = d as f64;
        1.0 - (1.0 / ((d_f - 1.0) * p)).powf(d_f / (d_f - 2.0))
    }

    pub fn alpha_of_rho(d: u32, p: f64, rho: f64) -> f64 {
        if rho == 0.0 {
            return alpha_c(d, p);
        }
        let d = d as f64;
        let pa = (1.0 - (1.0 - rho).powf(1.0 / (d - 1.0))) / rho;
        1.0 - (pa / p).powf(d / (d - 2.0))
    }
}

/// Geometric degrees, `P(k) = p (1 - p)^k`.
pub mod geometric {
    pub fn p_alpha(p: f64, alpha: f64) -> f64 {
        p / (p + (1.0 - p) * (1.0 - alpha).powi(3))
    }

    pub fn g(p: f64, alpha: f64, s: f64) -> f64 {
        let pa = p_alpha(p, alpha);
        pa / (1.0 - (1.0 - pa) * s)
    }

    pub fn g_hat(p: f64, alpha: f64, s: f64) -> f64 {
        let pa = p_alpha(p, alpha);
        (pa / (1.0 - (1.0 - pa) * s)).powi(2)
    }

    pub fn alpha_of_rho(p: f64, rho: f64) -> f64 {
        let r = 1.0 - rho;
        1.0 - (p / (1.0 - p)).cbrt() * (1.0 / (r + r.sqrt())).cbrt()
    }

    pub fn alpha_c(p: f64) -> f64 {
        alpha_of_rho(p, 0.0)
    }

    /// Integrand of `H_max = rho_pi - (p / (1 - p))^(1/3) int_{1 - rho_pi}^1 integrand(x) dx`.
    pub fn h_max_integrand(x: f64) -> f64 {
        (x + x.sqrt()).cbrt().recip()
    }

    pub fn rho_pi(p: f64) -> f64 {
        let q = 1.0 - p;
        0.5 * ((1.0 - 3.0 * p) / q + ((1.0 + 3.0 * p) / q).sqrt())
    }
}
