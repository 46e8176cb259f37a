//! `--budget` strings: comma-separated `key=value` pairs.
//!
//! Keys: `h` (trace base step), `cells`, `rel` (quadrature), `crofton`
//! (`grid:<t>x<r>`, `mc:<n>` or `mc:<n>:<seed>`), `starts`, `evals` (search).

use lemniscate_core::{LengthBudget, Sampler, SearchBudget};

#[derive(Debug, Clone, PartialEq)]
pub struct Budget {
    pub length: LengthBudget,
    pub search: SearchBudget,
}

impl Budget {
    /// `mc:<n>` without a seed takes the run seed.
    pub fn parse(spec: Option<&str>, seed: u64) -> Result<Self, String> {
        let mut length = LengthBudget::default();
        let mut search = SearchBudget::default();
        let Some(spec) = spec else {
            return Ok(Budget { length, search });
        };
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| format!("budget item `{item}` is not key=value"))?;
            let bad = || format!("bad value `{value}` for budget key `{key}`");
            match key.trim() {
                "h" => {
                    let h: f64 = value.parse().map_err(|_| bad())?;
                    if !(h > 0.0) {
                        return Err(bad());
                    }
                    length.trace.base_step = h;
                }
                "cells" => length.quad.max_cells = value.parse().map_err(|_| bad())?,
                "rel" => {
                    let r: f64 = value.parse().map_err(|_| bad())?;
                    if !(r > 0.0) {
                        return Err(bad());
                    }
                    length.quad.rel_tol = r;
                }
                "crofton" => {
                    let full = match value.split(':').count() {
                        2 if value.starts_with("mc:") => format!("{value}:{seed}"),
                        _ => value.to_string(),
                    };
                    length.sampler = full.parse::<Sampler>().map_err(|e| e.to_string())?;
                }
                "starts" => search.starts = value.parse().map_err(|_| bad())?,
                "evals" => search.max_evals = value.parse().map_err(|_| bad())?,
                other => return Err(format!("unknown budget key `{other}`")),
            }
        }
        Ok(Budget { length, search })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let b = Budget::parse(None, 1).unwrap();
        assert_eq!(b.length, LengthBudget::default());
        let b = Budget::parse(
            Some("h=0.002, cells=1000,rel=1e-3,crofton=mc:500,starts=2,evals=30"),
            9,
        )
        .unwrap();
        assert_eq!(b.length.trace.base_step, 0.002);
        assert_eq!(b.length.quad.max_cells, 1000);
        assert_eq!(b.length.sampler, Sampler::Mc { n: 500, seed: 9 });
        assert_eq!((b.search.starts, b.search.max_evals), (2, 30));
        let b = Budget::parse(Some("crofton=grid:10x20"), 9).unwrap();
        assert_eq!(
            b.length.sampler,
            Sampler::Grid {
                n_theta: 10,
                n_rho: 20
            }
        );
    }

    #[test]
    fn rejects_bad_items() {
        for spec in ["h", "h=-1", "rel=0", "cells=x", "crofton=mesh:3", "speed=3"] {
            assert!(Budget::parse(Some(spec), 1).is_err(), "{spec}");
        }
    }
}
