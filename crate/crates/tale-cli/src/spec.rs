//! Mini-languages for groups, metrics, and radii ranges.
//!
//! Groups: `cyclic:m[:k1,k2]`, `binary-dihedral:k`, `binary-tetrahedral`,
//! `binary-octahedral`, `binary-icosahedral`, or a path to a JSON file with
//! explicit row-major matrices.
//!
//! Metrics: `flat:n`, `sphere:n:R`, `eguchi-hanson:a`,
//! `quotient:<base>:<group>`, `rescale:<base>:<factor>` with factor one of
//! `rho2`, `inv-rho2`, `sphere-factor`.
//!
//! Radii: `r0:r1:count:log` or `r0:r1:count:lin`.

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::DMatrix;
use tale::groups::{BinaryPolyhedral, FiniteRotationGroup};
use tale::metric::{
    conformal_rescale, eguchi_hanson, flat_metric, quotient_annulus, round_sphere_chart,
    MetricChart, ScalarFactor,
};

/// Parse a group specification; `dim` disambiguates `cyclic` without angles.
pub fn parse_group(spec: &str, dim: usize) -> Result<FiniteRotationGroup> {
    let mut tokens: Vec<&str> = spec.split(':').collect();
    let head = tokens.remove(0);
    match head {
        "cyclic" => {
            if tokens.is_empty() {
                bail!("cyclic group needs an order: cyclic:m[:k1,k2]");
            }
            let m: usize = tokens[0].parse().context("cyclic order")?;
            if tokens.len() > 1 {
                let angles: Vec<&str> = tokens[1].split(',').collect();
                if angles.len() != 2 {
                    bail!("cyclic embedding takes two integers: cyclic:m:k1,k2");
                }
                let k1: i64 = angles[0].parse().context("first angle multiple")?;
                let k2: i64 = angles[1].parse().context("second angle multiple")?;
                Ok(FiniteRotationGroup::cyclic_so4(m, k1, k2)?)
            } else if dim == 2 {
                Ok(FiniteRotationGroup::cyclic_so2(m)?)
            } else if dim == 4 {
                Ok(FiniteRotationGroup::cyclic_so4(m, 1, if m == 1 { 0 } else { -1 })?)
            } else {
                bail!("cyclic groups need dimension 2 or 4, got {dim}");
            }
        }
        "binary-dihedral" => {
            let k: usize = tokens
                .first()
                .ok_or_else(|| anyhow!("binary-dihedral needs k"))?
                .parse()?;
            Ok(FiniteRotationGroup::binary_polyhedral(BinaryPolyhedral::Dihedral(k))?)
        }
        "binary-tetrahedral" => Ok(FiniteRotationGroup::binary_polyhedral(
            BinaryPolyhedral::Tetrahedral,
        )?),
        "binary-octahedral" => Ok(FiniteRotationGroup::binary_polyhedral(
            BinaryPolyhedral::Octahedral,
        )?),
        "binary-icosahedral" => Ok(FiniteRotationGroup::binary_polyhedral(
            BinaryPolyhedral::Icosahedral,
        )?),
        path => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("group spec '{path}' is neither a known form nor a readable file"))?;
            parse_group_json(&text)
        }
    }
}

/// Explicit matrices: `{"dimension": n, "elements": [[row-major n*n], ...]}`.
pub fn parse_group_json(text: &str) -> Result<FiniteRotationGroup> {
    #[derive(serde::Deserialize)]
    struct GroupFile {
        dimension: usize,
        elements: Vec<Vec<f64>>,
    }
    let parsed: GroupFile = serde_json::from_str(text).context("group JSON")?;
    let n = parsed.dimension;
    let elements = parsed
        .elements
        .iter()
        .map(|row| {
            if row.len() != n * n {
                bail!("element has {} entries, expected {}", row.len(), n * n);
            }
            Ok(DMatrix::from_row_slice(n, n, row))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteRotationGroup::from_matrices(n, elements)?)
}

/// Recursive-descent metric parser over `:`-separated tokens.
fn parse_metric_tokens<'a>(tokens: &mut std::vec::IntoIter<&'a str>) -> Result<MetricChart> {
    let head = tokens.next().ok_or_else(|| anyhow!("empty metric spec"))?;
    match head {
        "flat" => {
            let n: usize = tokens
                .next()
                .ok_or_else(|| anyhow!("flat:n needs a dimension"))?
                .parse()?;
            Ok(flat_metric(n))
        }
        "sphere" => {
            let n: usize = tokens
                .next()
                .ok_or_else(|| anyhow!("sphere:n:R needs a dimension"))?
                .parse()?;
            let r: f64 = tokens
                .next()
                .ok_or_else(|| anyhow!("sphere:n:R needs a radius"))?
                .parse()?;
            Ok(round_sphere_chart(n, r)?)
        }
        "eguchi-hanson" => {
            let a: f64 = tokens
                .next()
                .ok_or_else(|| anyhow!("eguchi-hanson:a needs the bolt parameter"))?
                .parse()?;
            Ok(eguchi_hanson(a)?)
        }
        "quotient" => {
            let base = parse_metric_tokens(tokens)?;
            let rest: Vec<&str> = tokens.collect();
            if rest.is_empty() {
                bail!("quotient:<base>:<group> is missing the group");
            }
            let group = parse_group(&rest.join(":"), base.dim())?;
            Ok(quotient_annulus(&base, group)?)
        }
        "rescale" => {
            let base = parse_metric_tokens(tokens)?;
            let factor = match tokens.next() {
                Some("rho2") => ScalarFactor::Rho2,
                Some("inv-rho2") => ScalarFactor::InvRho2,
                Some("sphere-factor") => ScalarFactor::SphereFactor,
                other => bail!("unknown rescale factor {other:?}"),
            };
            Ok(conformal_rescale(&base, factor)?)
        }
        other => bail!("unknown metric form '{other}'"),
    }
}

pub fn parse_metric(spec: &str) -> Result<MetricChart> {
    let tokens: Vec<&str> = spec.split(':').collect();
    let mut iter = tokens.into_iter();
    let chart = parse_metric_tokens(&mut iter)?;
    let leftover: Vec<&str> = iter.collect();
    if !leftover.is_empty() {
        bail!("trailing metric tokens: {leftover:?}");
    }
    Ok(chart)
}

/// `r0:r1:count:log|lin` to an explicit list.
pub fn parse_radii(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        bail!("radii take the form r0:r1:count:log (or :lin)");
    }
    let r0: f64 = parts[0].parse().context("r0")?;
    let r1: f64 = parts[1].parse().context("r1")?;
    let count: usize = parts[2].parse().context("count")?;
    if count < 1 || r0 <= 0.0 || r1 <= r0 {
        bail!("radii need 0 < r0 < r1 and count >= 1");
    }
    let out = match parts[3] {
        "log" => (0..count)
            .map(|k| r0 * (r1 / r0).powf(k as f64 / (count.max(2) - 1) as f64))
            .collect(),
        "lin" => (0..count)
            .map(|k| r0 + (r1 - r0) * k as f64 / (count.max(2) - 1) as f64)
            .collect(),
        other => bail!("unknown radii spacing '{other}'"),
    };
    Ok(out)
}

/// Comma-separated coordinates.
pub fn parse_point(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| anyhow!("bad coordinate '{t}': {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_forms() {
        assert_eq!(parse_group("cyclic:5", 2).unwrap().order(), 5);
        assert_eq!(parse_group("cyclic:2:1,1", 4).unwrap().order(), 2);
        assert_eq!(parse_group("binary-dihedral:2", 4).unwrap().order(), 8);
        assert_eq!(parse_group("binary-icosahedral", 4).unwrap().order(), 120);
        assert!(parse_group("nope", 4).is_err());
    }

    #[test]
    fn metric_forms() {
        assert_eq!(parse_metric("flat:4").unwrap().dim(), 4);
        assert_eq!(parse_metric("sphere:4:1.0").unwrap().dim(), 4);
        assert_eq!(parse_metric("eguchi-hanson:1.0").unwrap().dim(), 4);
        let q = parse_metric("quotient:flat:4:cyclic:2:1,1").unwrap();
        assert_eq!(q.deck().unwrap().order(), 2);
        let r = parse_metric("rescale:eguchi-hanson:1.0:rho2").unwrap();
        assert!(r.name().contains("rescale"));
        assert!(parse_metric("flat:4:extra").is_err());
        assert!(parse_metric("rescale:flat:4:bogus").is_err());
    }

    #[test]
    fn radii_forms() {
        let r = parse_radii("1:8:4:log").unwrap();
        assert_eq!(r.len(), 4);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[3] - 8.0).abs() < 1e-12);
        assert!((r[1] - 2.0).abs() < 1e-12);
        let l = parse_radii("1:4:4:lin").unwrap();
        assert!((l[1] - 2.0).abs() < 1e-12);
        assert!(parse_radii("1:2:3").is_err());
        assert!(parse_radii("2:1:3:log").is_err());
    }

    #[test]
    fn group_json_round_trip() {
        let text = r#"{"dimension": 2, "elements": [[1,0,0,1],[-1,0,0,-1]]}"#;
        let g = parse_group_json(text).unwrap();
        assert_eq!(g.order(), 2);
    }
}
