//! Comma-separated numeric vector parsing for the CLI flags.

use anyhow::{bail, Context, Result};
use nalgebra::{Matrix3, Vector3};

pub fn floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().with_context(|| format!("bad number `{c}`")))
        .collect()
}

pub fn vec3(s: &str) -> Result<Vector3<f64>> {
    let v = floats(s)?;
    if v.len() != 3 {
        bail!("expected 3 comma-separated numbers, got {}", v.len());
    }
    Ok(Vector3::new(v[0], v[1], v[2]))
}

/// Symmetric 3×3 matrix: `a,b,c` for a diagonal or `a,b,c,d,e,f` for the
/// diagonal followed by the upper off-diagonal entries (12), (13), (23).
pub fn sym3(s: &str) -> Result<Matrix3<f64>> {
    let v = floats(s)?;
    match v.len() {
        3 => Ok(Matrix3::from_diagonal(&Vector3::new(v[0], v[1], v[2]))),
        6 => {
            let mut m = Matrix3::from_diagonal(&Vector3::new(v[0], v[1], v[2]));
            m[(0, 1)] = v[3];
            m[(1, 0)] = v[3];
            m[(0, 2)] = v[4];
            m[(2, 0)] = v[4];
            m[(1, 2)] = v[5];
            m[(2, 1)] = v[5];
            Ok(m)
        }
        n => bail!("expected 3 or 6 comma-separated numbers, got {n}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vectors_and_matrices() {
        assert_eq!(vec3("1, 2,3").unwrap(), Vector3::new(1.0, 2.0, 3.0));
        let m = sym3("1,2,3,0.5,-0.5,0.25").unwrap();
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(m[(2, 1)], 0.25);
        assert!(vec3("1,2").is_err());
        assert!(sym3("1,2,3,4").is_err());
        assert!(floats("1,x").is_err());
    }
}
