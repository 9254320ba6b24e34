use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ContentClass {
    /// One inclusion with polynomial content.
    SingleLayer,
    /// Nest with polynomial content in every layer.
    A,
    /// Nest with linear outer layers around a polynomial core.
    B,
}

/// Semilinear content `a(x, u)`: `lambda u` in the background and
/// `sum_j layers[l][j-1] u^j` in region `l + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContentModel {
    #[serde(with = "crate::serde_cx")]
    pub background: C64,
    #[serde(with = "crate::serde_cx::vec2")]
    pub layers: Vec<Vec<C64>>,
    pub class: ContentClass,
}

fn horner(coeffs: &[C64], u: C64) -> C64 {
    // sum_j c_j u^j for j >= 1
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| (acc + c) * u)
}

fn horner_derivative(coeffs: &[C64], u: C64) -> C64 {
    // sum_j j c_j u^(j-1)
    coeffs
        .iter()
        .enumerate()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, (j, c)| acc * u + c * (j as f64 + 1.0))
}

impl ContentModel {
    pub fn new(background: C64, layers: Vec<Vec<C64>>, class: ContentClass) -> Result<Self> {
        let m = Self { background, layers, class };
        m.validate()?;
        Ok(m)
    }

    /// Homogeneous linear content everywhere (no anomaly): `a = lambda u` in all regions.
    pub fn homogeneous(background: C64, regions: usize) -> Self {
        Self {
            background,
            layers: vec![vec![background]; regions],
            class: if regions > 1 { ContentClass::A } else { ContentClass::SingleLayer },
        }
    }

    pub fn single(background: C64, coeffs: Vec<C64>) -> Result<Self> {
        Self::new(background, vec![coeffs], ContentClass::SingleLayer)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: &C64| z.re.is_finite() && z.im.is_finite();
        if !finite(&self.background) || self.layers.iter().flatten().any(|z| !finite(z)) {
            return Err(Error::Content("non-finite coefficient".into()));
        }
        if self.layers.iter().any(|l| l.is_empty()) {
            return Err(Error::Content("every layer needs at least one coefficient".into()));
        }
        let n = self.layers.len();
        match self.class {
            ContentClass::SingleLayer if n > 1 => {
                return Err(Error::Content(format!("single-layer content with {n} layers")));
            }
            ContentClass::A => {
                for l in 0..n.saturating_sub(1) {
                    if same_polynomial(&self.layers[l], &self.layers[l + 1]) {
                        return Err(Error::Content(format!(
                            "class A layers {} and {} carry identical coefficient vectors",
                            l + 1,
                            l + 2
                        )));
                    }
                }
            }
            ContentClass::B => {
                if n < 2 {
                    return Err(Error::Content("class B needs at least two layers".into()));
                }
                if let Some(l) = self.layers[..n - 1].iter().position(|c| trimmed(c).len() > 1) {
                    return Err(Error::Content(format!("class B layer {} must be linear", l + 1)));
                }
                for l in 0..n.saturating_sub(2) {
                    if self.layers[l][0] == self.layers[l + 1][0] {
                        return Err(Error::Content(format!(
                            "class B requires distinct linear coefficients in layers {} and {}",
                            l + 1,
                            l + 2
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn coeffs(&self, region: usize) -> std::borrow::Cow<'_, [C64]> {
        if region == 0 {
            std::borrow::Cow::Owned(vec![self.background])
        } else {
            std::borrow::Cow::Borrowed(&self.layers[region - 1])
        }
    }

    pub fn eval(&self, region: usize, u: C64) -> C64 {
        if region == 0 {
            self.background * u
        } else {
            horner(&self.layers[region - 1], u)
        }
    }

    pub fn derivative(&self, region: usize, u: C64) -> C64 {
        if region == 0 {
            self.background
        } else {
            horner_derivative(&self.layers[region - 1], u)
        }
    }

    pub fn regions(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn is_linear(&self) -> bool {
        self.layers.iter().all(|l| trimmed(l).len() <= 1)
    }

    /// Content with every coefficient of region `region` replaced.
    pub fn with_layer(&self, region: usize, coeffs: Vec<C64>) -> Self {
        let mut m = self.clone();
        m.layers[region - 1] = coeffs;
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            background: self.background * factor,
            layers: self.layers.iter().map(|l| l.iter().map(|c| c * factor).collect()).collect(),
            class: self.class,
        }
    }
}

fn trimmed(c: &[C64]) -> &[C64] {
    let end = c.iter().rposition(|z| z.norm() != 0.0).map_or(0, |i| i + 1);
    &c[..end]
}

fn same_polynomial(a: &[C64], b: &[C64]) -> bool {
    trimmed(a) == trimmed(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn evaluation_and_derivative() {
        let m = ContentModel::single(c(1.0), vec![c(2.0), c(-3.0), c(0.5)]).unwrap();
        let u = C64::new(0.7, -0.2);
        assert!((m.eval(1, u) - (u * 2.0 - u * u * 3.0 + u * u * u * 0.5)).norm() < 1e-15);
        assert!((m.derivative(1, u) - (c(2.0) - u * 6.0 + u * u * 1.5)).norm() < 1e-15);
        assert_eq!(m.eval(0, u), u);
        assert_eq!(m.eval(1, c(0.0)), c(0.0));
        // d/du (l1 u + l2 u^2) at u = 1 is l1 + 2 l2
        let q = ContentModel::single(c(0.0), vec![c(3.0), c(4.0)]).unwrap();
        assert_eq!(q.derivative(1, c(1.0)), c(11.0));
    }

    #[test]
    fn class_rules() {
        assert!(ContentModel::new(c(1.0), vec![vec![c(2.0)], vec![c(2.0), c(0.0)]], ContentClass::A).is_err());
        assert!(ContentModel::new(c(1.0), vec![vec![c(2.0)], vec![c(2.0), c(1.0)]], ContentClass::A).is_ok());
        assert!(ContentModel::new(c(1.0), vec![vec![c(2.0), c(1.0)], vec![c(3.0)]], ContentClass::B).is_err());
        assert!(ContentModel::new(c(1.0), vec![vec![c(2.0)], vec![c(2.0)], vec![c(1.0)]], ContentClass::B).is_err());
        assert!(ContentModel::new(c(1.0), vec![vec![c(2.0)], vec![c(3.0)], vec![c(1.0), c(1.0)]], ContentClass::B).is_ok());
    }

    #[test]
    fn serde_accepts_reals_and_pairs() {
        let m: ContentModel =
            serde_json::from_str(r#"{"background": 1.5, "layers": [[2, [0, 1]]], "class": "singleLayer"}"#).unwrap();
        assert_eq!(m.layers[0][1], C64::new(0.0, 1.0));
        assert_eq!(m.background, c(1.5));
    }
}
