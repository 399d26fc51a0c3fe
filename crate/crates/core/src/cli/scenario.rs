use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{Alphabet, EpFn, Family, Func, Member, Symbol, MAX_SYMBOLS};
use crate::indexing::{FiniteOrder, Regime};

/// A word either as a string of one-character symbols or as a list of names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Word {
    Text(String),
    Symbols(Vec<String>),
}

impl Default for Word {
    fn default() -> Self {
        Word::Text(String::new())
    }
}

impl Word {
    fn parse(&self, alphabet: &Alphabet) -> Result<Vec<Symbol>> {
        match self {
            Word::Text(t) if alphabet.single_char() => alphabet.parse_word(t),
            Word::Text(t) if t.is_empty() => Ok(Vec::new()),
            Word::Text(t) => Err(Error::Domain(format!(
                "word `{t}` needs the list form: the alphabet has multi-character symbols"
            ))),
            Word::Symbols(v) => v.iter().map(|s| alphabet.symbol(s)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegimeSpec {
    #[default]
    Omega,
    Finite {
        elements: Vec<String>,
        lt: Vec<(String, String)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Word>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioOptions {
    pub level_bound: usize,
    /// Symbol whose fibers carry the filter markers.
    pub marker: Option<String>,
    pub oracle: String,
    /// Close the family under common refinement before use.
    pub auto_close: bool,
    pub max_symbols: usize,
    pub seed: u64,
    pub amalgam_triples: usize,
    pub corruptions: usize,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            level_bound: 5,
            marker: None,
            oracle: "zero-residue".into(),
            auto_close: false,
            max_symbols: MAX_SYMBOLS,
            seed: 0,
            amalgam_triples: 100,
            corruptions: 200,
        }
    }
}

/// The on-disk form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub regime: RegimeSpec,
    pub functions: Vec<FunctionSpec>,
    #[serde(default)]
    pub options: ScenarioOptions,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub family: Family,
    pub options: ScenarioOptions,
    /// Members adjoined by closing under refinement.
    pub adjoined: Vec<String>,
}

/// What a report echoes back: the effective family after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioEcho {
    pub name: String,
    pub alphabet: Vec<String>,
    pub regime: RegimeSpec,
    pub functions: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub adjoined: Vec<String>,
}

fn build_member(spec: &FunctionSpec, alphabet: &Alphabet, regime: &Regime) -> Result<Member> {
    let func = match (regime, &spec.period, &spec.table) {
        (Regime::Omega, Some(period), None) => {
            let prefix = spec.prefix.clone().unwrap_or_default().parse(alphabet)?;
            Func::Periodic(EpFn::new(prefix, period.parse(alphabet)?)?)
        }
        (Regime::Finite(_), None, Some(t)) if spec.prefix.is_none() => Func::Table(
            t.iter()
                .map(|s| alphabet.symbol(s))
                .collect::<Result<_>>()?,
        ),
        (Regime::Omega, ..) => {
            return Err(Error::Domain(format!(
                "`{}` needs a period (and optional prefix)",
                spec.name
            )))
        }
        (Regime::Finite(_), ..) => {
            return Err(Error::Domain(format!("`{}` needs a table", spec.name)))
        }
    };
    Ok(Member {
        name: spec.name.clone(),
        func,
    })
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario> {
        let alphabet = Alphabet::new(self.alphabet.clone())?;
        let regime = match &self.regime {
            RegimeSpec::Omega => Regime::Omega,
            RegimeSpec::Finite { elements, lt } => {
                let lt: Vec<(&str, &str)> =
                    lt.iter().map(|(x, y)| (x.as_str(), y.as_str())).collect();
                let elements: Vec<&str> = elements.iter().map(String::as_str).collect();
                Regime::Finite(FiniteOrder::new_directed(&elements, &lt)?)
            }
        };
        let members = self
            .functions
            .iter()
            .map(|f| build_member(f, &alphabet, &regime))
            .collect::<Result<Vec<_>>>()?;
        let (family, adjoined) = if self.options.auto_close {
            Family::new_undirected(alphabet, regime, members)?
                .close_under_refine(self.options.max_symbols)?
        } else {
            (Family::new(alphabet, regime, members)?, Vec::new())
        };
        Ok(Scenario {
            name: self.name,
            family,
            options: self.options,
            adjoined,
        })
    }
}

/// Parses scenario JSON; syntax and shape errors carry line and column.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

impl Scenario {
    pub fn echo(&self) -> ScenarioEcho {
        let fam = &self.family;
        let alph = fam.alphabet();
        let names = |w: &[Symbol]| -> Word {
            if alph.single_char() {
                Word::Text(alph.format_word(w))
            } else {
                Word::Symbols(w.iter().map(|s| alph.name(*s).to_string()).collect())
            }
        };
        let functions = fam
            .members()
            .iter()
            .map(|m| match &m.func {
                Func::Periodic(f) => FunctionSpec {
                    name: m.name.clone(),
                    prefix: Some(names(f.prefix())),
                    period: Some(names(f.period())),
                    table: None,
                },
                Func::Table(t) => FunctionSpec {
                    name: m.name.clone(),
                    prefix: None,
                    period: None,
                    table: Some(t.iter().map(|s| alph.name(*s).to_string()).collect()),
                },
            })
            .collect();
        let regime = match fam.regime() {
            Regime::Omega => RegimeSpec::Omega,
            Regime::Finite(o) => RegimeSpec::Finite {
                elements: o.names().to_vec(),
                lt: o
                    .lt_pairs()
                    .into_iter()
                    .map(|(x, y)| (o.name(x).to_string(), o.name(y).to_string()))
                    .collect(),
            },
        };
        ScenarioEcho {
            name: self.name.clone(),
            alphabet: alph.symbols().to_vec(),
            regime,
            functions,
            adjoined: self.adjoined.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_scenario() {
        let s = parse_scenario(
            r#"{"name": "S0", "alphabet": ["a"], "functions": [{"name": "c_a", "period": "a"}]}"#,
        )
        .unwrap();
        assert_eq!(s.family.len(), 1);
        assert_eq!(s.options, ScenarioOptions::default());
    }

    #[test]
    fn undirected_pair_is_named() {
        let text = r#"{"name": "x", "alphabet": ["a", "b"],
            "functions": [{"name": "two", "period": "ab"}, {"name": "three", "period": "abb"}]}"#;
        match parse_scenario(text) {
            Err(Error::NotDirected(x, y)) => assert_eq!((x.as_str(), y.as_str()), ("two", "three")),
            other => panic!("{other:?}"),
        }
        let closed = text.replace(
            "\"functions\"",
            "\"options\": {\"auto_close\": true}, \"functions\"",
        );
        let s = parse_scenario(&closed).unwrap();
        assert_eq!(s.adjoined.len(), 1);
        assert_eq!(s.echo().adjoined, s.adjoined);
    }

    #[test]
    fn syntax_errors_have_positions() {
        let text = "{\n  \"name\": \"x\",\n  \"alphabet\": [\"a\"\n}";
        match parse_scenario(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let unknown = r#"{"name": "x", "alphabet": ["a"], "functions": [], "colour": 1}"#;
        assert!(matches!(
            parse_scenario(unknown),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn multi_character_symbols_use_lists() {
        let text = r#"{"name": "x", "alphabet": ["lo", "hi"],
            "functions": [{"name": "f", "prefix": ["hi"], "period": ["lo", "hi"]}]}"#;
        let s = parse_scenario(text).unwrap();
        let echo = s.echo();
        // hi (lo hi)^ω folds to (hi lo)^ω
        assert_eq!(echo.functions[0].prefix, Some(Word::Symbols(vec![])));
        assert_eq!(
            echo.functions[0].period,
            Some(Word::Symbols(vec!["hi".into(), "lo".into()]))
        );
    }

    #[test]
    fn schema_names_every_field() {
        let schema: serde_json::Value =
            serde_json::from_str(include_str!("../../scenarios/schema.json")).unwrap();
        let file = serde_json::to_value(ScenarioFile {
            name: "x".into(),
            description: Some("d".into()),
            alphabet: vec!["a".into()],
            regime: RegimeSpec::Omega,
            functions: vec![],
            options: ScenarioOptions::default(),
        })
        .unwrap();
        let props = &schema["properties"];
        for key in file.as_object().unwrap().keys() {
            assert!(props.get(key).is_some(), "{key}");
        }
        for key in file["options"].as_object().unwrap().keys() {
            assert!(props["options"]["properties"].get(key).is_some(), "{key}");
        }
        assert_eq!(
            props["options"]["properties"]["max_symbols"]["default"],
            MAX_SYMBOLS
        );
    }

    #[test]
    fn finite_regime_tables() {
        let text = r#"{"name": "d", "alphabet": ["a", "b"],
            "regime": {"kind": "finite", "elements": ["bot", "a", "b", "top"],
                       "lt": [["bot","a"],["bot","b"],["a","top"],["b","top"],["bot","top"]]},
            "functions": [{"name": "f", "table": ["a","b","a","b"]}, {"name": "g", "table": ["a","a","a","a"]}]}"#;
        let s = parse_scenario(text).unwrap();
        assert!(!s.family.regime().is_omega());
        let again = serde_json::to_string(&s.echo()).unwrap();
        assert!(again.contains("\"kind\":\"finite\""));
    }
}
