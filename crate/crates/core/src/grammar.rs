//! Text forms of rules: `proportional | allzero | squares | sqrts |
//! halfthreshold | genprop:<c>`, where `<c>` is `const:<v>`,
//! `step:<m0>:<lo>:<hi>`, `ramp:<m0>` or `table:<m1>=<v1>,...`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::str::FromStr;

use crate::amount::parse_ratio;
use crate::error::RuleError;
use crate::rules::{AllocationRule, RuleKind, ScalingFunction};

impl FromStr for ScalingFunction {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RuleError::BadSpec(String::from(s));
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "const" => ScalingFunction::constant(parse_ratio(rest).ok_or_else(bad)?),
            "step" => {
                let mut parts = rest.split(':');
                let threshold = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                let low = parts.next().and_then(parse_ratio).ok_or_else(bad)?;
                let high = parts.next().and_then(parse_ratio).ok_or_else(bad)?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                ScalingFunction::step(threshold, low, high)
            }
            "ramp" => ScalingFunction::ramp(rest.parse().map_err(|_| bad())?),
            "table" => {
                let mut values = BTreeMap::new();
                for pair in rest.split(',') {
                    let (m, v) = pair.split_once('=').ok_or_else(bad)?;
                    let m: u64 = m.trim().parse().map_err(|_| bad())?;
                    let v = parse_ratio(v).ok_or_else(bad)?;
                    if values.insert(m, v).is_some() {
                        return Err(bad());
                    }
                }
                ScalingFunction::table(values)
            }
            _ => Err(bad()),
        }
    }
}

impl FromStr for RuleKind {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proportional" => Ok(RuleKind::Proportional),
            "allzero" => Ok(RuleKind::AllZero),
            "squares" => Ok(RuleKind::ProportionalToSquares),
            "sqrts" => Ok(RuleKind::ProportionalToSquareRoots),
            "halfthreshold" => Ok(RuleKind::HalfThreshold),
            _ => match s.strip_prefix("genprop:") {
                Some(c) => Ok(RuleKind::GeneralizedProportional(c.parse()?)),
                None => Err(RuleError::BadSpec(String::from(s))),
            },
        }
    }
}

impl FromStr for AllocationRule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(AllocationRule::new(s.parse()?))
    }
}
