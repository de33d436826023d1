//! One-dimensional parameter sweeps written as CSV or JSON tables.

use std::collections::BTreeMap;
use std::io::Write;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy_planner::{bs_energy, BsPowerProfile, Planner};
use crate::error::{Error, Result};
use crate::rate_model::RateModel;

use super::profile::load_profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    RateExact,
    RateLb,
    AseExact,
    AseLb,
    Nec,
    Ee,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::RateExact => "rate_exact",
            Quantity::RateLb => "rate_lb",
            Quantity::AseExact => "ase_exact",
            Quantity::AseLb => "ase_lb",
            Quantity::Nec => "nec",
            Quantity::Ee => "ee",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::RateExact | Quantity::RateLb => "nats/s/Hz",
            Quantity::AseExact | Quantity::AseLb => "nats/s/Hz/km^2",
            Quantity::Nec => "W/km^2",
            Quantity::Ee => "nats/s/Hz/W",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Axis {
    #[value(name = "M")]
    M,
    #[value(name = "K")]
    K,
    #[value(name = "u")]
    U,
    #[value(name = "lambda_b")]
    LambdaB,
    #[value(name = "t_target")]
    TTarget,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::M => "M",
            Axis::K => "K",
            Axis::U => "u",
            Axis::LambdaB => "lambda_b",
            Axis::TTarget => "t_target",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    /// Inclusive grid; the last point is kept when it lands on `stop` up to rounding.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Parses `start:stop:step`.
pub fn parse_range(s: &str) -> std::result::Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("range {s:?} must look like start:stop:step"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?} in range {s:?}"));
    let r = Range { start: num(parts[0])?, stop: num(parts[1])?, step: num(parts[2])? };
    if !(r.step > 0.0 && r.step.is_finite()) {
        return Err(format!("range step must be positive, got {}", r.step));
    }
    if !(r.start < r.stop && r.start.is_finite() && r.stop.is_finite()) {
        return Err(format!("range start {} must be below stop {}", r.start, r.stop));
    }
    Ok(r)
}

/// Fixed parameters from `key=value,key=value`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Fixed {
    pub values: BTreeMap<String, f64>,
    pub profile: Option<String>,
}

const NUMERIC_KEYS: &[&str] = &["M", "K", "u", "alpha", "lambda_b", "t_target"];

pub fn parse_fixed(s: &str) -> std::result::Result<Fixed, String> {
    let mut fixed = Fixed::default();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, value) = item.split_once('=').ok_or_else(|| format!("fixed entry {item:?} is not key=value"))?;
        let key = match key.trim() {
            "m" => "M",
            "k" => "K",
            other => other,
        };
        if key == "profile" {
            fixed.profile = Some(value.trim().to_string());
            continue;
        }
        if !NUMERIC_KEYS.contains(&key) {
            return Err(format!("unknown fixed parameter {key:?}; expected one of {NUMERIC_KEYS:?} or profile"));
        }
        let v: f64 = value.trim().parse().map_err(|_| format!("bad value {value:?} for {key}"))?;
        fixed.values.insert(key.to_string(), v);
    }
    Ok(fixed)
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub quantity: Quantity,
    pub axis: Axis,
    pub range: Range,
    pub fixed: Fixed,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub quantity: &'static str,
    pub unit: &'static str,
    pub axis: &'static str,
    pub fixed: BTreeMap<String, serde_json::Value>,
    pub rows: Vec<(f64, f64)>,
}

struct Point {
    m: Option<f64>,
    k: Option<f64>,
    alpha: f64,
    lambda_b: f64,
    t_target: Option<f64>,
}

fn as_integer(v: f64, name: &str) -> Result<u32> {
    let r = v.round();
    if (v - r).abs() <= 1e-9 && r >= 1.0 {
        Ok(r as u32)
    } else {
        Err(Error::domain(format!("{name} = {v} must be a positive integer for this quantity")))
    }
}

impl SweepRequest {
    fn point(&self, x: f64) -> Result<Point> {
        let mut vals = self.fixed.values.clone();
        if vals.contains_key(self.axis.name()) {
            return Err(Error::Config(format!("{} is both the sweep axis and fixed", self.axis.name())));
        }
        vals.insert(self.axis.name().to_string(), x);
        let m = vals.get("M").copied();
        let k = match (vals.get("K"), vals.get("u"), m) {
            (Some(&k), None, _) => Some(k),
            (None, Some(&u), Some(m)) => Some(u * m),
            (None, Some(_), None) => return Err(Error::Config("u needs M".into())),
            (Some(_), Some(_), _) => return Err(Error::Config("give K or u, not both".into())),
            (None, None, _) => None,
        };
        Ok(Point {
            m,
            k,
            alpha: vals.get("alpha").copied().unwrap_or(4.0),
            lambda_b: vals.get("lambda_b").copied().unwrap_or(1.0),
            t_target: vals.get("t_target").copied(),
        })
    }

    fn profile(&self) -> Result<BsPowerProfile> {
        match &self.fixed.profile {
            Some(p) => load_profile(p),
            None => Err(Error::Config(format!("{} needs profile=<name|file> in --fixed", self.quantity.name()))),
        }
    }

    fn evaluate(&self, x: f64, profile: Option<&BsPowerProfile>) -> Result<f64> {
        let p = self.point(x)?;
        if !(p.lambda_b > 0.0) {
            return Err(Error::domain(format!("lambda_b = {} must be positive", p.lambda_b)));
        }
        let m = p.m.ok_or_else(|| Error::Config("M is required".into()))?;
        let k = p.k.ok_or_else(|| Error::Config("K (or u) is required".into()))?;
        let model = RateModel::new(p.alpha)?;
        let exact = || -> Result<f64> {
            let (mi, ki) = (as_integer(m, "M")?, as_integer(k, "K")?);
            Ok(model.mean_rate_exact(mi, ki)?.mean_rate)
        };
        let value = match self.quantity {
            Quantity::RateExact => exact()?,
            Quantity::RateLb => model.mean_rate_lower_bound(m, k)?.mean_rate,
            Quantity::AseExact => p.lambda_b * k * exact()?,
            Quantity::AseLb => p.lambda_b * k * model.mean_rate_lower_bound(m, k)?.mean_rate,
            Quantity::Ee => {
                let profile = profile.expect("profile resolved before evaluation");
                let (mi, ki) = (as_integer(m, "M")?, as_integer(k, "K")?);
                Planner::new(p.alpha)?.energy_efficiency(profile, mi, ki)?
            }
            Quantity::Nec => {
                let profile = profile.expect("profile resolved before evaluation");
                let (mi, ki) = (as_integer(m, "M")?, as_integer(k, "K")?);
                let lambda = match p.t_target {
                    Some(t) => t / (k * exact()?),
                    None => p.lambda_b,
                };
                lambda * bs_energy(profile, mi, ki)?
            }
        };
        Ok(value)
    }

    pub fn run(&self) -> Result<SweepTable> {
        if self.axis == Axis::TTarget && self.quantity != Quantity::Nec {
            return Err(Error::Config("the t_target axis only applies to nec".into()));
        }
        let profile = match self.quantity {
            Quantity::Nec | Quantity::Ee => Some(self.profile()?),
            _ => None,
        };
        let xs = self.range.points();
        let values: Vec<f64> = xs
            .par_iter()
            .map(|&x| self.evaluate(x, profile.as_ref()))
            .collect::<Result<_>>()?;

        let mut fixed: BTreeMap<String, serde_json::Value> =
            self.fixed.values.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
        fixed.entry("alpha".into()).or_insert(serde_json::json!(4.0));
        if matches!(self.quantity, Quantity::AseExact | Quantity::AseLb) && self.axis != Axis::LambdaB {
            fixed.entry("lambda_b".into()).or_insert(serde_json::json!(1.0));
        }
        if let Some(p) = &self.fixed.profile {
            fixed.insert("profile".into(), serde_json::json!(p));
        }
        Ok(SweepTable {
            quantity: self.quantity.name(),
            unit: self.quantity.unit(),
            axis: self.axis.name(),
            fixed,
            rows: xs.into_iter().zip(values).collect(),
        })
    }
}

impl SweepTable {
    pub fn value_column(&self) -> String {
        format!("{}[{}]", self.quantity, self.unit)
    }

    /// One row per sweep point: axis value, every fixed parameter, the quantity.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let mut header = vec![self.axis.to_string()];
        header.extend(self.fixed.keys().cloned());
        header.push(self.value_column());
        w.write_record(&header).map_err(io)?;
        for (x, y) in &self.rows {
            let mut rec = vec![x.to_string()];
            rec.extend(self.fixed.values().map(|v| match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            }));
            rec.push(y.to_string());
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|(x, y)| serde_json::json!({ self.axis: x, self.quantity: y }))
            .collect();
        let doc = serde_json::json!({
            "quantity": self.quantity,
            "unit": self.unit,
            "axis": self.axis,
            "fixed": self.fixed,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writeln!(out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        let r = parse_range("1:10:1").unwrap();
        assert_eq!(r.points().len(), 10);
        let r = parse_range("0.1:0.9:0.1").unwrap();
        assert_eq!(r.points().len(), 9);
        assert!(parse_range("1:10").is_err());
        assert!(parse_range("1:10:0").is_err());
        assert!(parse_range("5:1:1").is_err());
        assert!(parse_range("a:1:1").is_err());
    }

    #[test]
    fn fixed_parsing() {
        let f = parse_fixed("M=10,alpha=4,lambda_b=1,profile=macro").unwrap();
        assert_eq!(f.values["M"], 10.0);
        assert_eq!(f.profile.as_deref(), Some("macro"));
        assert!(parse_fixed("Q=1").is_err());
        assert!(parse_fixed("M").is_err());
        assert!(parse_fixed("M=x").is_err());
    }
}
