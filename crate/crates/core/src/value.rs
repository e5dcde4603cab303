//! Typed values exchanged between APIs, the execution context and the simulator.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The closed set of value kinds a parameter or output can carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Scalar,
    Matrix,
    Text,
    Boolean,
    Enum,
}

impl ValueKind {
    pub const ALL: [ValueKind; 5] = [
        ValueKind::Scalar,
        ValueKind::Matrix,
        ValueKind::Text,
        ValueKind::Boolean,
        ValueKind::Enum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::Scalar => "scalar",
            ValueKind::Matrix => "matrix",
            ValueKind::Text => "text",
            ValueKind::Boolean => "boolean",
            ValueKind::Enum => "enum",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value tagged with its kind. Matrices are row-major real arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TypedValue {
    Scalar { value: f64 },
    Matrix { rows: usize, cols: usize, data: Vec<f64> },
    Text { value: String },
    Boolean { value: bool },
    Enum { value: String },
}

impl TypedValue {
    pub fn scalar(value: f64) -> Self {
        TypedValue::Scalar { value }
    }

    pub fn text(value: impl Into<String>) -> Self {
        TypedValue::Text { value: value.into() }
    }

    pub fn boolean(value: bool) -> Self {
        TypedValue::Boolean { value }
    }

    pub fn enumeration(value: impl Into<String>) -> Self {
        TypedValue::Enum { value: value.into() }
    }

    /// Builds a matrix, returning `None` when `data` does not hold `rows * cols` entries.
    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Option<Self> {
        (rows.checked_mul(cols) == Some(data.len())).then_some(TypedValue::Matrix { rows, cols, data })
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            TypedValue::Scalar { .. } => ValueKind::Scalar,
            TypedValue::Matrix { .. } => ValueKind::Matrix,
            TypedValue::Text { .. } => ValueKind::Text,
            TypedValue::Boolean { .. } => ValueKind::Boolean,
            TypedValue::Enum { .. } => ValueKind::Enum,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            TypedValue::Scalar { value } => Some(*value),
            _ => None,
        }
    }

    /// Checks the payload is internally consistent: finite reals and matching matrix shape.
    pub fn is_well_formed(&self) -> bool {
        match self {
            TypedValue::Scalar { value } => value.is_finite(),
            TypedValue::Matrix { rows, cols, data } => {
                rows.checked_mul(*cols) == Some(data.len()) && data.iter().all(|x| x.is_finite())
            }
            _ => true,
        }
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Scalar { value } => write!(f, "{value}"),
            TypedValue::Matrix { rows, cols, data } => {
                write!(f, "{rows}x{cols} matrix [")?;
                for (i, x) in data.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            TypedValue::Text { value } | TypedValue::Enum { value } => f.write_str(value),
            TypedValue::Boolean { value } => write!(f, "{value}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_shape_checked() {
        assert!(TypedValue::matrix(2, 2, vec![1.0; 4]).is_some());
        assert!(TypedValue::matrix(2, 3, vec![1.0; 4]).is_none());
    }

    #[test]
    fn serde_tagging() {
        let v = TypedValue::scalar(0.5);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"kind":"scalar","value":0.5}"#);
        let back: TypedValue = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert_eq!(v.to_string(), "0.5");
    }

    #[test]
    fn non_finite_is_malformed() {
        assert!(!TypedValue::scalar(f64::NAN).is_well_formed());
        assert!(!TypedValue::Matrix { rows: 1, cols: 2, data: vec![0.0] }.is_well_formed());
    }
}
