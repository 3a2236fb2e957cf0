//! Verification bookkeeping: every identity check is a named deviation
//! against a tolerance; the report keeps the worst case of each.

use serde::Serialize;

/// A single identity check evaluated at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSample {
    pub check: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
}

impl CheckSample {
    pub fn new(check: &'static str, deviation: f64, tolerance: f64) -> Self {
        Self { check, deviation, tolerance }
    }

    /// NaN counts as a failure.
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub check: &'static str,
    pub description: &'static str,
    pub tolerance: f64,
    pub evaluated: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub worst_at: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub check: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
    pub at: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointError {
    pub at: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub group: String,
    pub slope: f64,
    pub expected_slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Verification {
    checks: Vec<CheckSummary>,
    violations: Vec<Violation>,
    errors: Vec<PointError>,
    fits: Vec<FitSummary>,
}

pub fn describe(check: &str) -> &'static str {
    match check {
        "score_identity" => "outcome score equals δH_tra + H_cor",
        "two_point_heat" => "two-point trajectory heat equals the operator form",
        "fisher_heat_vs_fd" => "heat-fluctuation Fisher equals finite-difference Fisher (relative)",
        "closed_form" => "numerical heats, probabilities and Fisher match closed forms (relative)",
        "average_heat" => "Σ P_l H_tra equals the average heat",
        "bound_saturation" => "bound·β·√fisher_fd equals 1",
        "gibbs_reconstruction" => "e^{−βH*}/Z* reproduces the reduced Gibbs state",
        "sylvester_residual" => "energy-operator Sylvester residual",
        "deviation_routes" => "spectral and trace forms of δU_S agree",
        "energy_fisher" => "Fisher of the energy measurement equals ΔU_S² (relative)",
        "ur_product" => "Δβ·ΔU_S equals 1",
        "scaling_slope" => "log-log slope of the bound matches the predicted exponent",
        _ => "unclassified check",
    }
}

impl Verification {
    pub fn record(&mut self, sample: &CheckSample, at: &str) {
        let idx = match self.checks.iter().position(|c| c.check == sample.check) {
            Some(i) => i,
            None => {
                self.checks.push(CheckSummary {
                    check: sample.check,
                    description: describe(sample.check),
                    tolerance: sample.tolerance,
                    evaluated: 0,
                    failures: 0,
                    max_deviation: 0.0,
                    worst_at: None,
                    passed: true,
                });
                self.checks.len() - 1
            }
        };
        let c = &mut self.checks[idx];
        c.evaluated += 1;
        c.tolerance = c.tolerance.max(sample.tolerance);
        let worse = !c.max_deviation.is_nan()
            && (sample.deviation.is_nan() || c.worst_at.is_none() || sample.deviation > c.max_deviation);
        if worse {
            c.max_deviation = sample.deviation;
            c.worst_at = Some(at.to_string());
        }
        if !sample.passed() {
            c.failures += 1;
            c.passed = false;
            self.violations.push(Violation {
                check: sample.check,
                deviation: sample.deviation,
                tolerance: sample.tolerance,
                at: at.to_string(),
            });
        }
    }

    pub fn error(&mut self, at: &str, message: impl Into<String>) {
        self.errors.push(PointError { at: at.to_string(), message: message.into() });
    }

    pub fn fit(&mut self, fit: FitSummary) {
        self.fits.push(fit);
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn checks(&self) -> &[CheckSummary] {
        &self.checks
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn errors(&self) -> &[PointError] {
        &self.errors
    }

    pub fn fits(&self) -> &[FitSummary] {
        &self.fits
    }

    pub fn into_report(self, experiment: &str, config_hash: &str, points: usize, rows: usize) -> Report {
        Report {
            tool: "thermoq",
            version: env!("CARGO_PKG_VERSION"),
            experiment: experiment.to_string(),
            config_hash: config_hash.to_string(),
            points,
            rows,
            passed: self.passed(),
            checks: self.checks,
            fits: self.fits,
            violations: self.violations,
            errors: self.errors,
        }
    }
}

/// Machine-readable verification summary written next to the results.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config_hash: String,
    pub points: usize,
    pub rows: usize,
    pub passed: bool,
    pub checks: Vec<CheckSummary>,
    pub fits: Vec<FitSummary>,
    pub violations: Vec<Violation>,
    pub errors: Vec<PointError>,
}

impl Report {
    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {} points, {} rows, {} point errors\n",
            self.experiment,
            self.points,
            self.rows,
            self.errors.len()
        );
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<22} max {:.3e} (tol {:.0e}, {} evaluated, {} failed)\n",
                if c.passed { "ok" } else { "FAIL" },
                c.check,
                c.max_deviation,
                c.tolerance,
                c.evaluated,
                c.failures
            ));
        }
        for f in &self.fits {
            out.push_str(&format!(
                "  fit {}: slope {:.4} (expected {:.4}), R² {:.6}\n",
                f.group, f.slope, f.expected_slope, f.r_squared
            ));
        }
        for v in &self.violations {
            out.push_str(&format!(
                "  violation {}: {:.3e} > {:.0e} at {}\n",
                v.check, v.deviation, v.tolerance, v.at
            ));
        }
        for e in &self.errors {
            out.push_str(&format!("  error at {}: {}\n", e.at, e.message));
        }
        out.push_str(if self.passed { "verification passed" } else { "verification FAILED" });
        out
    }
}
