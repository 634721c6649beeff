use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::edge::edge_rate_exact;
use crate::error::{Error, Result};
use crate::fso::{fbr_satisfied, fph_satisfied, fso_gain, FsoOperatingPoint};
use crate::optimizer::{evaluate_design, DesignVariables};
use crate::quadrature::QuadratureSpec;
use crate::scenario::{db_to_linear, EnvironmentParams, Scenario};

/// Inclusive uniform grid over one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridRange {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }

    fn validate(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid(format!("grid.{name}"), "needs at least one point"));
        }
        if !(self.min <= self.max && self.min >= lo && self.max <= hi) {
            return Err(Error::invalid(
                format!("grid.{name}"),
                format!("range [{}, {}] must lie within [{lo}, {hi}]", self.min, self.max),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub p_f: GridRange,
    pub rho: GridRange,
    pub h_u: GridRange,
    pub p_u: GridRange,
}

impl GridSpec {
    fn validate(&self, s: &Scenario) -> Result<()> {
        self.p_f.validate("p_f", f64::MIN_POSITIVE, f64::MAX)?;
        self.rho.validate("rho", 0.0, 1.0)?;
        self.h_u.validate("h_u", s.geom.h0, s.geom.h_max)?;
        self.p_u.validate("p_u", 0.0, s.rf.p_max)
    }

    /// Bounding box covering every design that can be optimal: `P_F` spans
    /// from the hover-only requirement at the strongest optical gain up to
    /// `p_f_span` times that.
    pub fn covering(s: &Scenario, count: usize, p_f_span: f64) -> Result<Self> {
        let p_f_floor = s.geom.p_hov / (s.fso.eta * fso_gain(s.geom.h0, s)?);
        Ok(Self {
            p_f: GridRange::new(p_f_floor, p_f_span * p_f_floor, count),
            rho: GridRange::new(0.0, 1.0, count),
            h_u: GridRange::new(s.geom.h0, s.geom.h_max, count),
            p_u: GridRange::new(0.0, s.rf.p_max, count),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptimum {
    pub design: DesignVariables,
    pub ee_system: f64,
    pub c_edge: f64,
    pub evaluated: usize,
    pub feasible: usize,
}

/// Exhaustive search over all four variables. Every grid tuple is checked
/// against both UAV constraints with the exact edge rate.
pub fn brute_force_p1(s: &Scenario, grid: &GridSpec, quad: &QuadratureSpec) -> Result<OracleOptimum> {
    grid.validate(s)?;
    let p_fs = grid.p_f.values();
    let rhos = grid.rho.values();
    let pairs: Vec<(f64, f64)> = grid
        .h_u
        .values()
        .into_iter()
        .flat_map(|h| grid.p_u.values().into_iter().map(move |p| (h, p)))
        .collect();

    let partials = pairs
        .par_iter()
        .map(|&(h_u, p_u)| -> Result<Option<OracleOptimum>> {
            let (c_edge, _) = edge_rate_exact(p_u, h_u, s, quad)?;
            let mut best: Option<OracleOptimum> = None;
            let mut feasible = 0;
            for &p_f in &p_fs {
                for &rho in &rhos {
                    let op = FsoOperatingPoint { p_f, rho };
                    if !fbr_satisfied(&op, h_u, c_edge, s)?.satisfied || !fph_satisfied(&op, h_u, p_u, s)?.satisfied {
                        continue;
                    }
                    feasible += 1;
                    let ee = c_edge / p_f;
                    if best.is_none_or(|b| ee > b.ee_system) {
                        best = Some(OracleOptimum {
                            design: DesignVariables { p_f, rho, h_u, p_u },
                            ee_system: ee,
                            c_edge,
                            evaluated: 0,
                            feasible: 0,
                        });
                    }
                }
            }
            Ok(best.map(|b| OracleOptimum { feasible, ..b }))
        })
        .collect::<Result<Vec<_>>>()?;

    let evaluated = pairs.len() * p_fs.len() * rhos.len();
    reduce(partials, evaluated)
}

/// Grid search over `(H_U, P_U)` with the FSO variables set by the
/// closed-form minimum-power design.
pub fn brute_force_reduced(
    s: &Scenario,
    h_u: &GridRange,
    p_u: &GridRange,
    quad: &QuadratureSpec,
) -> Result<OracleOptimum> {
    h_u.validate("h_u", s.geom.h0, s.geom.h_max)?;
    p_u.validate("p_u", 0.0, s.rf.p_max)?;
    let pairs: Vec<(f64, f64)> = h_u
        .values()
        .into_iter()
        .flat_map(|h| p_u.values().into_iter().map(move |p| (h, p)))
        .collect();
    let partials = pairs
        .par_iter()
        .map(|&(h, p)| {
            let e = evaluate_design(p, h, s, quad)?;
            Ok(Some(OracleOptimum {
                design: e.design,
                ee_system: e.ee_system,
                c_edge: e.c_edge,
                evaluated: 0,
                feasible: 1,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    reduce(partials, pairs.len())
}

fn reduce(partials: Vec<Option<OracleOptimum>>, evaluated: usize) -> Result<OracleOptimum> {
    let feasible = partials.iter().flatten().map(|o| o.feasible).sum();
    let mut best: Option<OracleOptimum> = None;
    for cand in partials.into_iter().flatten() {
        if best.is_none_or(|b| cand.ee_system > b.ee_system) {
            best = Some(cand);
        }
    }
    best.map(|b| OracleOptimum {
        evaluated,
        feasible,
        ..b
    })
    .ok_or(Error::EmptyFeasibleSet)
}

/// A valid scenario with parameters drawn around the reference one.
pub fn randomized_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let env = if rng.random_bool(0.5) {
        EnvironmentParams::high_rise_urban()
    } else {
        EnvironmentParams::dense_urban()
    };
    let mut s = Scenario {
        env,
        ..Scenario::default()
    };
    s.env.alpha_los = rng.random_range(2.5..3.5);
    s.env.alpha_nlos = s.env.alpha_los + rng.random_range(1.0..2.5);
    s.rf.p_max = rng.random_range(0.05..1.0);
    s.fso.bandwidth_fso = 10f64.powf(rng.random_range(7.7..9.0));
    s.fso.beta_loss = db_to_linear(rng.random_range(5.0..20.0));
    s.fso.kappa = rng.random_range(1e-4..1e-3);
    s.fso.eta = rng.random_range(0.1..0.5);
    s.geom.h_max = s.geom.h0 + rng.random_range(100.0..300.0);
    s.geom.l0 = rng.random_range(50.0..300.0);
    s.geom.r0 = rng.random_range(25.0..80.0);
    s.geom.lambda_g = 10f64.powf(rng.random_range(-3.5..-2.3));
    s.geom.p_hov = rng.random_range(200.0..2000.0);
    s.validated().expect("randomized scenario stays within bounds")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_hit_both_ends() {
        let g = GridRange::new(1.0, 2.0, 5);
        assert_eq!(g.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(GridRange::new(3.0, 3.0, 1).values(), vec![3.0]);
    }

    #[test]
    fn single_point_grid() {
        let s = Scenario::default();
        let quad = QuadratureSpec::default();
        let e = evaluate_design(0.2, 100.0, &s, &quad).unwrap();
        let one = |v: f64| GridRange::new(v, v, 1);
        let feasible = GridSpec {
            p_f: one(e.design.p_f * 1.01),
            rho: one(e.design.rho),
            h_u: one(100.0),
            p_u: one(0.2),
        };
        let got = brute_force_p1(&s, &feasible, &quad).unwrap();
        assert_eq!(got.design.p_f, e.design.p_f * 1.01);
        assert_eq!(got.evaluated, 1);

        let infeasible = GridSpec {
            p_f: one(e.design.p_f * 0.5),
            ..feasible
        };
        assert_eq!(
            brute_force_p1(&s, &infeasible, &quad).unwrap_err(),
            Error::EmptyFeasibleSet
        );
    }

    #[test]
    fn closed_form_never_loses_to_full_grid() {
        let s = Scenario::default();
        let quad = QuadratureSpec::default();
        let grid = GridSpec::covering(&s, 9, 3.0).unwrap();
        let full = brute_force_p1(&s, &grid, &quad).unwrap();
        let reduced = brute_force_reduced(&s, &grid.h_u, &grid.p_u, &quad).unwrap();
        assert!(full.ee_system <= reduced.ee_system * (1.0 + 1e-9));
        assert!(full.feasible > 0);
    }

    #[test]
    fn rejects_grid_outside_domain() {
        let s = Scenario::default();
        let mut grid = GridSpec::covering(&s, 3, 2.0).unwrap();
        grid.h_u = GridRange::new(10.0, 100.0, 3);
        assert!(brute_force_p1(&s, &grid, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn randomized_scenarios_are_reproducible() {
        assert_eq!(randomized_scenario(7), randomized_scenario(7));
        assert_ne!(randomized_scenario(7), randomized_scenario(8));
        for seed in 0..50 {
            randomized_scenario(seed).validate().unwrap();
        }
    }
}
