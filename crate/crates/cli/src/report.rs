//! Run reports: per-cycle tables, aggregates, and bound-check results,
//! emitted both human-readable and as CSV.

use std::io::{self, Write};
use std::path::Path;

use gyre_patrol::CycleRecord;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Aggregates {
    pub cycle_count: usize,
    pub period_mean: f64,
    pub period_std: f64,
    pub period_min: f64,
    pub period_max: f64,
    pub effort_mean: f64,
    pub effort_std: f64,
}

pub fn aggregate(cycles: &[CycleRecord]) -> Aggregates {
    let n = cycles.len();
    if n == 0 {
        return Aggregates::default();
    }
    let mean = |xs: &dyn Fn(&CycleRecord) -> f64| -> f64 {
        cycles.iter().map(xs).sum::<f64>() / n as f64
    };
    let std = |xs: &dyn Fn(&CycleRecord) -> f64, mu: f64| -> f64 {
        if n < 2 {
            0.0
        } else {
            (cycles.iter().map(|c| (xs(c) - mu).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    };
    let period = |c: &CycleRecord| c.period;
    let effort = |c: &CycleRecord| c.effort_fraction;
    let period_mean = mean(&period);
    let effort_mean = mean(&effort);
    Aggregates {
        cycle_count: n,
        period_mean,
        period_std: std(&period, period_mean),
        period_min: cycles.iter().map(period).fold(f64::INFINITY, f64::min),
        period_max: cycles.iter().map(period).fold(0.0, f64::max),
        effort_mean,
        effort_std: std(&effort, effort_mean),
    }
}

/// Report for one simulation run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub label: String,
    pub cycles: Vec<CycleRecord>,
    pub aggregates: Aggregates,
    /// Whole-run control effort fraction.
    pub total_effort: Option<f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(label: impl Into<String>, cycles: Vec<CycleRecord>) -> Self {
        let aggregates = aggregate(&cycles);
        Self {
            label: label.into(),
            cycles,
            aggregates,
            total_effort: None,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write_human<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "run: {}", self.label)?;
        let a = &self.aggregates;
        writeln!(out, "cycles completed: {}", a.cycle_count)?;
        if a.cycle_count > 0 {
            writeln!(
                out,
                "period: {:.4} +/- {:.4} s (min {:.4}, max {:.4})",
                a.period_mean, a.period_std, a.period_min, a.period_max
            )?;
            writeln!(
                out,
                "effort per cycle: {:.4} +/- {:.4}",
                a.effort_mean, a.effort_std
            )?;
        }
        if let Some(e) = self.total_effort {
            writeln!(out, "whole-run control effort fraction: {:.4}", e)?;
        }
        for note in &self.notes {
            writeln!(out, "note: {note}")?;
        }
        for check in &self.checks {
            writeln!(
                out,
                "check {}: {} ({})",
                check.name,
                if check.passed { "PASS" } else { "FAIL" },
                check.detail
            )?;
        }
        Ok(())
    }

    /// Per-cycle table; aggregates in the report stay recomputable from it.
    pub fn write_cycles_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "cycle,period,r_min,r_max,effort_fraction,start_index,end_index"
        )?;
        for (i, c) in self.cycles.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                i, c.period, c.r_min, c.r_max, c.effort_fraction, c.start_index, c.end_index
            )?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let a = &self.aggregates;
        writeln!(out, "key,value")?;
        writeln!(out, "label,{}", self.label)?;
        writeln!(out, "cycle_count,{}", a.cycle_count)?;
        writeln!(out, "period_mean,{}", a.period_mean)?;
        writeln!(out, "period_std,{}", a.period_std)?;
        writeln!(out, "period_min,{}", a.period_min)?;
        writeln!(out, "period_max,{}", a.period_max)?;
        writeln!(out, "effort_mean,{}", a.effort_mean)?;
        writeln!(out, "effort_std,{}", a.effort_std)?;
        if let Some(e) = self.total_effort {
            writeln!(out, "total_effort,{}", e)?;
        }
        for check in &self.checks {
            writeln!(
                out,
                "check_{},{}",
                check.name.replace([' ', ','], "_"),
                if check.passed { "pass" } else { "fail" }
            )?;
        }
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> io::Result<()> {
        self.write_human(std::fs::File::create(dir.join("report.txt"))?)?;
        self.write_cycles_csv(std::fs::File::create(dir.join("cycles.csv"))?)?;
        self.write_summary_csv(std::fs::File::create(dir.join("report.csv"))?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(period: f64, effort: f64) -> CycleRecord {
        CycleRecord {
            period,
            r_min: 1.0,
            r_max: 1.1,
            effort_fraction: effort,
            start_index: 0,
            end_index: 1,
        }
    }

    #[test]
    fn aggregates_match_direct_recomputation() {
        let cycles = vec![cycle(10.0, 0.2), cycle(12.0, 0.4), cycle(11.0, 0.3)];
        let a = aggregate(&cycles);
        assert_eq!(a.cycle_count, 3);
        assert!((a.period_mean - 11.0).abs() < 1e-12);
        assert!((a.period_std - 1.0).abs() < 1e-12);
        assert!((a.effort_mean - 0.3).abs() < 1e-12);
        assert_eq!(a.period_min, 10.0);
        assert_eq!(a.period_max, 12.0);
    }

    #[test]
    fn report_text_carries_checks_and_notes() {
        let mut report = RunReport::new("demo", vec![cycle(10.0, 0.1)]);
        report.note("left the workspace early");
        report.check("bounds", false, "2 cycles outside");
        let mut buf = Vec::new();
        report.write_human(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("note: left the workspace early"));
        assert!(text.contains("check bounds: FAIL"));
        assert!(!report.all_checks_pass());
    }
}
