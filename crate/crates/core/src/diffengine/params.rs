use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    SplineCoeff,
    BaseWeight,
    SplineWeight,
    WaveletWeight,
    WaveletTranslation,
    WaveletScale,
    /// Free-standing scalars (tests and toy models).
    Scalar,
}

impl ParamKind {
    pub fn name(self) -> &'static str {
        match self {
            ParamKind::SplineCoeff => "spline_coeff",
            ParamKind::BaseWeight => "base_weight",
            ParamKind::SplineWeight => "spline_weight",
            ParamKind::WaveletWeight => "wavelet_weight",
            ParamKind::WaveletTranslation => "wavelet_translation",
            ParamKind::WaveletScale => "wavelet_scale",
            ParamKind::Scalar => "scalar",
        }
    }
}

/// Where one parameter tensor lives inside the flat array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub layer: usize,
    pub kind: ParamKind,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl ParamSlot {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }

    pub fn label(&self) -> String {
        format!("layer {} {}", self.layer, self.kind.name())
    }
}

/// All trainable parameters in one flat array, with matching gradients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterBlock {
    pub values: Vec<f64>,
    pub grads: Vec<f64>,
    pub layout: Vec<ParamSlot>,
}

impl ParameterBlock {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append a zero-initialised tensor and return its slot.
    pub fn push(&mut self, layer: usize, kind: ParamKind, shape: Vec<usize>) -> ParamSlot {
        let slot = ParamSlot {
            layer,
            kind,
            shape,
            offset: self.values.len(),
        };
        self.values.resize(self.values.len() + slot.len(), 0.0);
        self.grads.resize(self.values.len(), 0.0);
        self.layout.push(slot.clone());
        slot
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = 0.0);
    }

    /// The slot owning flat index `index`.
    pub fn slot_of(&self, index: usize) -> Option<&ParamSlot> {
        self.layout.iter().find(|s| s.range().contains(&index))
    }

    /// Overwrite all values, keeping the layout.
    pub fn set_values(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::ShapeMismatch {
                expected: self.values.len(),
                actual: values.len(),
            });
        }
        self.values.copy_from_slice(values);
        Ok(())
    }

    /// Checks that slots tile the flat array without gaps or overlap.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grads.len() {
            return Err(Error::ShapeMismatch {
                expected: self.values.len(),
                actual: self.grads.len(),
            });
        }
        let mut next = 0;
        for slot in &self.layout {
            if slot.offset != next {
                return Err(Error::InvalidArgument(format!(
                    "parameter slot {} starts at {} but {} was expected",
                    slot.label(),
                    slot.offset,
                    next
                )));
            }
            next += slot.len();
        }
        if next != self.values.len() {
            return Err(Error::ShapeMismatch {
                expected: next,
                actual: self.values.len(),
            });
        }
        Ok(())
    }

    /// Clamp every wavelet scale to `|s| >= min_abs`, keeping its sign.
    pub fn clamp_scales(&mut self, min_abs: f64) {
        for slot in self.layout.iter().filter(|s| s.kind == ParamKind::WaveletScale) {
            for s in &mut self.values[slot.range()] {
                if s.abs() < min_abs {
                    *s = if *s < 0.0 { -min_abs } else { min_abs };
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_tile_the_array() {
        let mut p = ParameterBlock::new();
        let a = p.push(0, ParamKind::SplineCoeff, vec![2, 3, 8]);
        let b = p.push(0, ParamKind::BaseWeight, vec![2, 3]);
        assert_eq!(a.offset, 0);
        assert_eq!(b.offset, 48);
        assert_eq!(p.len(), 54);
        assert_eq!(p.grads.len(), 54);
        p.validate().unwrap();
        assert_eq!(p.slot_of(50).unwrap().kind, ParamKind::BaseWeight);
        p.layout[1].offset = 47;
        assert!(p.validate().is_err());
    }

    #[test]
    fn scale_clamp_keeps_sign() {
        let mut p = ParameterBlock::new();
        p.push(0, ParamKind::WaveletScale, vec![4]);
        p.values.copy_from_slice(&[1e-5, -1e-6, 0.0, 2.0]);
        p.clamp_scales(1e-3);
        assert_eq!(p.values, vec![1e-3, -1e-3, 1e-3, 2.0]);
    }
}
