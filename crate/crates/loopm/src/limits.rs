//! Resource caps. Exceeding a cap is a reported error, never silent
//! truncation. `LOOPM_RESOURCE_LIMITS=key=value,...` overrides defaults.

#[derive(Clone, Debug)]
pub struct Limits {
    /// Maximum S-pairs processed by Buchberger's algorithm.
    pub max_spairs: usize,
    /// Maximum monomials per polynomial.
    pub max_monomials: usize,
    /// Per-entry bound in the Hilbert-basis completion.
    pub hilbert_entry_bound: u32,
    /// Maximum monomials in a recurrence state set.
    pub max_state_monomials: usize,
    /// Support fixpoint: iteration cap.
    pub support_iterations: usize,
    /// Support fixpoint: values per variable.
    pub support_values: usize,
    /// Exponent bound for the surd-base multiplicative-relation search.
    pub surd_exponent_bound: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_spairs: 100_000,
            max_monomials: 1_000_000,
            hilbert_entry_bound: 64,
            max_state_monomials: 2000,
            support_iterations: 64,
            support_values: 256,
            surd_exponent_bound: 4,
        }
    }
}

impl Limits {
    /// Defaults overridden by the `LOOPM_RESOURCE_LIMITS` environment variable.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Ok(spec) = std::env::var("LOOPM_RESOURCE_LIMITS") {
            for kv in spec.split(',') {
                let mut it = kv.splitn(2, '=');
                let (k, v) = match (it.next(), it.next()) {
                    (Some(k), Some(v)) => (k.trim(), v.trim()),
                    _ => continue,
                };
                let parse = |v: &str| v.parse::<usize>().ok();
                match k {
                    "max_spairs" => {
                        if let Some(n) = parse(v) {
                            limits.max_spairs = n;
                        }
                    }
                    "max_monomials" => {
                        if let Some(n) = parse(v) {
                            limits.max_monomials = n;
                        }
                    }
                    "hilbert_entry_bound" => {
                        if let Some(n) = parse(v) {
                            limits.hilbert_entry_bound = n as u32;
                        }
                    }
                    "max_state_monomials" => {
                        if let Some(n) = parse(v) {
                            limits.max_state_monomials = n;
                        }
                    }
                    "surd_exponent_bound" => {
                        if let Some(n) = parse(v) {
                            limits.surd_exponent_bound = n as u32;
                        }
                    }
                    _ => {}
                }
            }
        }
        limits
    }
}
