//! Variable spec files.
//!
//! One variable per block. A block opens with `variable <name>`, may set
//! `kind <nominal|ordinal|binary>` (default `nominal`) and lists its
//! categories in order, one `category <label>` line each. Everything after the
//! keyword and one run of spaces is the value, so labels may contain spaces and
//! commas. Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! # household survey
//! variable VIFAM
//! kind nominal
//! category Yes
//! category No, only for a period
//! category No
//! ```

use std::fmt::Write as _;
use std::path::Path;

use surveykit_core::dataset::{VariableKind, VariableSpec};

use crate::error::{AppError, AppResult};

struct Block {
    line: usize,
    name: String,
    kind: VariableKind,
    kind_set: bool,
    categories: Vec<String>,
}

impl Block {
    fn finish(self) -> AppResult<VariableSpec> {
        VariableSpec::new(self.name, self.categories, self.kind).map_err(|e| AppError::SpecSyntax {
            line: self.line,
            message: e.to_string(),
        })
    }
}

pub fn parse_specs(text: &str) -> AppResult<Vec<VariableSpec>> {
    let mut out = Vec::new();
    let mut current: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let (key, value) = match trimmed.trim_start().split_once(' ') {
            Some((k, v)) => (k, v.trim_start_matches(' ').trim_end()),
            None => (trimmed.trim(), ""),
        };
        let err = |message: String| AppError::SpecSyntax { line, message };
        match key {
            "variable" => {
                if value.is_empty() {
                    return Err(err("variable needs a name".into()));
                }
                if let Some(b) = current.take() {
                    out.push(b.finish()?);
                }
                current = Some(Block {
                    line,
                    name: value.to_string(),
                    kind: VariableKind::Nominal,
                    kind_set: false,
                    categories: Vec::new(),
                });
            }
            "kind" => {
                let b = current.as_mut().ok_or_else(|| err("kind before any variable".into()))?;
                if b.kind_set {
                    return Err(err(format!("kind given twice for {}", b.name)));
                }
                b.kind = VariableKind::parse(value)
                    .ok_or_else(|| err(format!("unknown kind {value:?}")))?;
                b.kind_set = true;
            }
            "category" => {
                let b = current
                    .as_mut()
                    .ok_or_else(|| err("category before any variable".into()))?;
                if value.is_empty() {
                    return Err(err("empty category label".into()));
                }
                b.categories.push(value.to_string());
            }
            other => return Err(err(format!("unknown keyword {other:?}"))),
        }
    }
    if let Some(b) = current.take() {
        out.push(b.finish()?);
    }
    if out.is_empty() {
        return Err(AppError::SpecSyntax {
            line: 0,
            message: "no variables declared".into(),
        });
    }
    let mut names: Vec<&str> = out.iter().map(|s| s.name()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(AppError::SpecSyntax {
            line: 0,
            message: format!("variable {} declared twice", w[0]),
        });
    }
    Ok(out)
}

pub fn format_specs(specs: &[VariableSpec]) -> String {
    let mut s = String::new();
    for (i, spec) in specs.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "variable {}", spec.name());
        let _ = writeln!(s, "kind {}", spec.kind().as_str());
        for c in spec.categories() {
            let _ = writeln!(s, "category {c}");
        }
    }
    s
}

pub fn read_specs(path: &Path) -> AppResult<Vec<VariableSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_specs(&text)
}

pub fn write_specs(path: &Path, specs: &[VariableSpec]) -> AppResult<()> {
    std::fs::write(path, format_specs(specs)).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_keep_spaces_and_commas() {
        let specs = parse_specs(
            "# comment\nvariable A\nkind ordinal\ncategory 0\ncategory 4 or more\n\nvariable B\ncategory No, only for a period\ncategory Yes\n",
        )
        .unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].kind(), VariableKind::Ordinal);
        assert_eq!(specs[0].categories()[1], "4 or more");
        assert_eq!(specs[1].kind(), VariableKind::Nominal);
        assert_eq!(specs[1].categories()[0], "No, only for a period");
        assert_eq!(parse_specs(&format_specs(&specs)).unwrap(), specs);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse_specs("variable A\ncategory x\nbogus y\n") {
            Err(AppError::SpecSyntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(parse_specs("category x\n").is_err());
        assert!(parse_specs("variable A\ncategory x\n").is_err());
        assert!(parse_specs("variable A\ncategory x\ncategory y\nvariable A\ncategory x\ncategory y\n").is_err());
        assert!(parse_specs("").is_err());
    }
}
