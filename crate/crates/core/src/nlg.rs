//! English rendering of literals, rules and theories from sentence templates.

use std::collections::BTreeSet;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use thiserror::Error;

use crate::logic::{Atom, Connective, Literal, PredicateGroup, Rule, Theory};
use crate::seed::{keyed_seed, rng_from};

const DEFAULT_VOCABULARY: &str = include_str!("../data/vocabulary.txt");
const DEFAULT_TEMPLATES: &str = include_str!("../data/templates.txt");

#[derive(Debug, Error)]
pub enum NlgError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error("templates: {0}")]
    Templates(String),
    #[error("symbol {0} is not in the vocabulary")]
    UnknownSymbol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Adjectives (unary relations), person names (arguments) and family
/// relations (binary relations).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub adjectives: Vec<String>,
    pub names: Vec<String>,
    pub relations: Vec<String>,
}

impl Vocabulary {
    /// Parse the sectioned vocabulary format (`[adjectives]`, `[names]`,
    /// `[relations]`, one symbol per line).
    pub fn parse(text: &str) -> Result<Self, NlgError> {
        let mut vocab = Vocabulary { adjectives: vec![], names: vec![], relations: vec![] };
        let mut section: Option<&mut Vec<String>> = None;
        for (line, content) in content_lines(text) {
            if let Some(name) = content.strip_prefix('[').and_then(|c| c.strip_suffix(']')) {
                section = Some(match name {
                    "adjectives" => &mut vocab.adjectives,
                    "names" => &mut vocab.names,
                    "relations" => &mut vocab.relations,
                    other => {
                        return Err(NlgError::Syntax { line, message: format!("unknown section [{other}]") })
                    }
                });
                continue;
            }
            let Some(target) = section.as_deref_mut() else {
                return Err(NlgError::Syntax { line, message: "entry before any section header".into() });
            };
            if !crate::logic::is_symbol(content) {
                return Err(NlgError::Syntax { line, message: format!("invalid symbol {content:?}") });
            }
            target.push(content.to_string());
        }
        vocab.validate()?;
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self, NlgError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<(), NlgError> {
        let lists = [("adjectives", &self.adjectives), ("names", &self.names), ("relations", &self.relations)];
        for (what, list) in lists {
            if list.is_empty() {
                return Err(NlgError::Vocabulary(format!("no {what}")));
            }
            let unique: BTreeSet<&String> = list.iter().collect();
            if unique.len() != list.len() {
                return Err(NlgError::Vocabulary(format!("duplicate entry in {what}")));
            }
            if let Some(bad) = list.iter().find(|w| w.eq_ignore_ascii_case("not") || w.eq_ignore_ascii_case("is")) {
                return Err(NlgError::Vocabulary(format!("reserved word {bad:?} in {what}")));
            }
        }
        let lowercase = |w: &String| w.chars().next().is_some_and(|c| c.is_ascii_lowercase());
        if let Some(w) = self.adjectives.iter().chain(&self.relations).find(|w| !lowercase(w)) {
            return Err(NlgError::Vocabulary(format!("{w:?} must be lowercase")));
        }
        if let Some(w) = self.names.iter().find(|w| !w.chars().next().is_some_and(|c| c.is_ascii_uppercase())) {
            return Err(NlgError::Vocabulary(format!("name {w:?} must be capitalized")));
        }
        if self.names.len() < 2 {
            return Err(NlgError::Vocabulary("binary predicates need at least two names".into()));
        }
        Ok(())
    }

    /// Number of distinct atoms: unary `adj(name)` plus binary
    /// `rel(name, other)` with two different names.
    pub fn atom_count(&self) -> usize {
        let n = self.names.len();
        self.adjectives.len() * n + self.relations.len() * n * (n - 1)
    }

    pub fn contains_atom(&self, atom: &Atom) -> bool {
        let names_ok = atom.args().iter().all(|a| self.names.contains(a));
        let relation_ok = if atom.is_binary() {
            self.relations.iter().any(|r| r == atom.relation()) && atom.args()[0] != atom.args()[1]
        } else {
            self.adjectives.iter().any(|r| r == atom.relation())
        };
        names_ok && relation_ok
    }

    /// A uniformly drawn unary atom, or binary with probability `binary_fraction`.
    pub fn sample_atom<R: Rng + ?Sized>(&self, rng: &mut R, binary_fraction: f64) -> Atom {
        if rng.gen_bool(binary_fraction) {
            let rel = self.relations.choose(rng).unwrap();
            let mut pair = self.names.choose_multiple(rng, 2);
            let (a, b) = (pair.next().unwrap(), pair.next().unwrap());
            Atom::new(rel.as_str(), [a.as_str(), b.as_str()]).expect("vocabulary symbols are valid")
        } else {
            let adj = self.adjectives.choose(rng).unwrap();
            let name = self.names.choose(rng).unwrap();
            Atom::new(adj.as_str(), [name.as_str()]).expect("vocabulary symbols are valid")
        }
    }

    /// Every atom, unary first, in vocabulary order.
    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        let unary = self.adjectives.iter().flat_map(move |adj| {
            self.names.iter().map(move |n| Atom::new(adj.as_str(), [n.as_str()]).unwrap())
        });
        let binary = self.relations.iter().flat_map(move |rel| {
            self.names.iter().flat_map(move |a| {
                self.names
                    .iter()
                    .filter(move |b| *b != a)
                    .map(move |b| Atom::new(rel.as_str(), [a.as_str(), b.as_str()]).unwrap())
            })
        });
        unary.chain(binary)
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::parse(DEFAULT_VOCABULARY).expect("built-in vocabulary is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub text: String,
    pub weight: u32,
}

impl Template {
    fn starts_with_placeholder(&self) -> bool {
        self.text.starts_with('{')
    }
}

/// Weighted template families for unary facts, binary facts and rules.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    unary: Vec<Template>,
    binary: Vec<Template>,
    rules: Vec<Template>,
    unary_index: WeightedIndex<u32>,
    binary_index: WeightedIndex<u32>,
    rule_index: WeightedIndex<u32>,
}

impl TemplateSet {
    pub fn parse(text: &str) -> Result<Self, NlgError> {
        let (mut unary, mut binary, mut rules) = (vec![], vec![], vec![]);
        for (line, content) in content_lines(text) {
            let mut parts = content.splitn(3, ' ');
            let (Some(kind), Some(weight), Some(body)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(NlgError::Syntax { line, message: "expected <kind> <weight> <template>".into() });
            };
            let weight: u32 = weight
                .parse()
                .map_err(|_| NlgError::Syntax { line, message: format!("bad weight {weight:?}") })?;
            let (list, required): (&mut Vec<Template>, &[&str]) = match kind {
                "unary" => (&mut unary, &["{a}", "{X}"]),
                "binary" => (&mut binary, &["{a}", "{X}", "{b}"]),
                "rule" => (&mut rules, &["{p}", "{q}"]),
                other => return Err(NlgError::Syntax { line, message: format!("unknown template kind {other:?}") }),
            };
            if let Some(missing) = required.iter().find(|p| !body.contains(*p)) {
                return Err(NlgError::Syntax { line, message: format!("template lacks {missing}") });
            }
            if kind != "rule" && !body.contains(" is ") {
                return Err(NlgError::Syntax { line, message: "literal template needs the copula \" is \"".into() });
            }
            if !body.ends_with('.') {
                return Err(NlgError::Syntax { line, message: "template must end with '.'".into() });
            }
            list.push(Template { text: body.to_string(), weight });
        }
        let index = |what: &str, list: &[Template]| {
            WeightedIndex::new(list.iter().map(|t| t.weight))
                .map_err(|e| NlgError::Templates(format!("{what}: {e}")))
        };
        Ok(TemplateSet {
            unary_index: index("unary", &unary)?,
            binary_index: index("binary", &binary)?,
            rule_index: index("rule", &rules)?,
            unary,
            binary,
            rules,
        })
    }

    pub fn load(path: &Path) -> Result<Self, NlgError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn rule_templates(&self) -> &[Template] {
        &self.rules
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::parse(DEFAULT_TEMPLATES).expect("built-in templates are valid")
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn decapitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Vocabulary plus templates.
#[derive(Debug, Clone, Default)]
pub struct Renderer {
    pub vocab: Vocabulary,
    pub templates: TemplateSet,
}

impl Renderer {
    pub fn new(vocab: Vocabulary, templates: TemplateSet) -> Self {
        Renderer { vocab, templates }
    }

    fn check(&self, lit: &Literal) -> Result<(), NlgError> {
        if self.vocab.contains_atom(&lit.atom) {
            Ok(())
        } else {
            Err(NlgError::UnknownSymbol(lit.atom.to_string()))
        }
    }

    /// Clause text without the final period. The flag is true when the clause
    /// must keep its leading capital (it opens with a name).
    fn clause<R: Rng + ?Sized>(&self, lit: &Literal, rng: &mut R) -> Result<(String, bool), NlgError> {
        self.check(lit)?;
        let args = lit.args();
        let t = if lit.atom.is_binary() {
            &self.templates.binary[self.templates.binary_index.sample(rng)]
        } else {
            &self.templates.unary[self.templates.unary_index.sample(rng)]
        };
        let mut text = if lit.negated { t.text.replacen(" is ", " is not ", 1) } else { t.text.clone() };
        text = text.replace("{X}", lit.relation()).replace("{a}", &args[0]);
        if let Some(b) = args.get(1) {
            text = text.replace("{b}", b);
        }
        text.pop();
        Ok((text, t.starts_with_placeholder()))
    }

    fn group_clause<R: Rng + ?Sized>(&self, group: &PredicateGroup, rng: &mut R) -> Result<String, NlgError> {
        let joiner = match group.connective() {
            Connective::Or => " or ",
            _ => " and ",
        };
        let parts = group
            .literals()
            .iter()
            .map(|lit| {
                let (text, keep_case) = self.clause(lit, rng)?;
                Ok(if keep_case { text } else { decapitalize(&text) })
            })
            .collect::<Result<Vec<_>, NlgError>>()?;
        Ok(parts.join(joiner))
    }

    /// One sentence for one literal, e.g. "Alex is green." / "John is not kind."
    pub fn render_literal<R: Rng + ?Sized>(&self, lit: &Literal, rng: &mut R) -> Result<String, NlgError> {
        let (text, _) = self.clause(lit, rng)?;
        Ok(format!("{}.", capitalize(&text)))
    }

    pub fn render_rule<R: Rng + ?Sized>(&self, rule: &Rule, rng: &mut R) -> Result<String, NlgError> {
        let t = &self.templates.rules[self.templates.rule_index.sample(rng)];
        let p = self.group_clause(&rule.lhs, rng)?;
        let q = self.group_clause(&rule.rhs, rng)?;
        Ok(capitalize(&t.text.replace("{p}", &p).replace("{q}", &q)))
    }

    /// Facts then rules, in structural order. Each sentence draws from its own
    /// stream keyed by its logical form, so an item renders identically in
    /// every theory that shares it.
    pub fn render_theory<R: Rng + ?Sized>(
        &self,
        t: &Theory,
        rng: &mut R,
    ) -> Result<(Vec<String>, Vec<String>), NlgError> {
        let base: u64 = rng.gen();
        let facts = t
            .facts
            .iter()
            .map(|f| self.render_literal(f, &mut rng_from(keyed_seed(base, &f.to_string()))))
            .collect::<Result<Vec<_>, _>>()?;
        let rules = t
            .rules
            .iter()
            .map(|r| self.render_rule(r, &mut rng_from(keyed_seed(base, &r.to_string()))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((facts, rules))
    }

    /// Theory as one space-joined paragraph plus the statement sentence, both
    /// derived from `seed`.
    pub fn render_instance(&self, t: &Theory, statement: &Literal, seed: u64) -> Result<(String, String), NlgError> {
        let (facts, rules) = self.render_theory(t, &mut rng_from(seed))?;
        let context = facts.into_iter().chain(rules).collect::<Vec<_>>().join(" ");
        let statement = self.render_literal(statement, &mut rng_from(keyed_seed(seed, "statement")))?;
        Ok((context, statement))
    }
}
