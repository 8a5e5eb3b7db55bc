//! Built-in example models, compiled in from `models/`.

use super::{parse_model, ModelDocument, RunError};

pub const EX1: &str = include_str!("../../models/ex1.model");
pub const EX2: &str = include_str!("../../models/ex2.model");
pub const EX3A: &str = include_str!("../../models/ex3a.model");
pub const EX3B: &str = include_str!("../../models/ex3b.model");
pub const EX4: &str = include_str!("../../models/ex4.model");

pub const NAMES: [&str; 5] = ["ex1", "ex2", "ex3a", "ex3b", "ex4"];

pub fn text(name: &str) -> Option<&'static str> {
    match name {
        "ex1" => Some(EX1),
        "ex2" => Some(EX2),
        "ex3a" => Some(EX3A),
        "ex3b" => Some(EX3B),
        "ex4" => Some(EX4),
        _ => None,
    }
}

pub fn document(name: &str) -> Result<ModelDocument, RunError> {
    let text = text(name)
        .ok_or_else(|| RunError::Invalid(format!("unknown example '{name}' (try {})", NAMES.join(", "))))?;
    Ok(parse_model(text)?)
}
