use crate::error::{Error, Result};

/// Switches for the non-diffusive parts of the system.
///
/// Damping is switched off by setting `sigma1 = sigma2 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terms {
    /// All quadratic transport terms: `(u.grad)u`, `div(v (x) v)`,
    /// `(u.grad)v`, `(v.grad)u`, `(u.grad)theta`.
    pub advection: bool,
    /// The linear coupling `grad theta` and `div v`.
    pub coupling: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Terms {
            advection: true,
            coupling: true,
        }
    }
}

/// Physical coefficients of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub nu: f64,
    pub eta: f64,
    pub mu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub terms: Terms,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            nu: 1.0,
            eta: 1.0,
            mu: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            alpha: 3.0,
            beta: 3.0,
            terms: Terms::default(),
        }
    }
}

impl ModelParams {
    /// Validated parameters with all terms active.
    pub fn new(
        nu: f64,
        eta: f64,
        mu: f64,
        sigma1: f64,
        sigma2: f64,
        alpha: f64,
        beta: f64,
    ) -> Result<Self> {
        let p = ModelParams {
            nu,
            eta,
            mu,
            sigma1,
            sigma2,
            alpha,
            beta,
            terms: Terms::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_terms(mut self, terms: Terms) -> Self {
        self.terms = terms;
        self
    }

    /// Same parameters with both damping coefficients set to zero.
    pub fn without_damping(mut self) -> Self {
        self.sigma1 = 0.0;
        self.sigma2 = 0.0;
        self
    }

    /// Every range violation, in field order.
    pub fn violations(&self) -> Vec<Error> {
        let mut errs = Vec::new();
        for (name, value) in [("nu", self.nu), ("eta", self.eta), ("mu", self.mu)] {
            if !(value.is_finite() && value > 0.0) {
                errs.push(Error::param(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        for (name, value) in [("sigma1", self.sigma1), ("sigma2", self.sigma2)] {
            if !(value.is_finite() && value >= 0.0) {
                errs.push(Error::param(
                    name,
                    format!("must be finite and >= 0, got {value}"),
                ));
            }
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(value.is_finite() && value >= 1.0) {
                errs.push(Error::param(
                    name,
                    format!("must be finite and >= 1, got {value}"),
                ));
            }
        }
        errs
    }

    /// First range violation, if any.
    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// `ell = min(nu, eta, mu)`.
    pub fn ell(&self) -> f64 {
        self.nu.min(self.eta).min(self.mu)
    }

    /// True iff `5/2 <= alpha, beta < 4`, the range covered by the
    /// small-data global existence result.
    pub fn theory_regime(&self) -> bool {
        let ok = |x: f64| (2.5..4.0).contains(&x);
        ok(self.alpha) && ok(self.beta)
    }

    pub fn damped(&self) -> bool {
        self.sigma1 > 0.0 || self.sigma2 > 0.0
    }
}
