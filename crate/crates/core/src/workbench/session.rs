//! Session files: declarations by name, a command list and limits.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chalg::ChAlgebra;
use crate::conditions::ConditionSpec;
use crate::error::{Error, Result};
use crate::exactalg::{extend_scalars, validate_ring, AlgElt, ExtensionKind, FiniteRing, RingData, RingElt};
use crate::extgroups::saturated_gma;
use crate::gma::{gma_from_rep, AModuleData, GmaData, GmaRep, GmaSpec};
use crate::grouprep::{Character, FiniteGroup, GModule, GroupData, ModuleData};
use crate::pseudorep::RingMat;

pub const SESSION_VERSION: u32 = 1;

/// JSON schema for session files.
pub const SESSION_SCHEMA: &str = include_str!("../../schema/session.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub version: u32,
    pub prime: u64,
    #[serde(default)]
    pub rings: BTreeMap<String, RingDecl>,
    #[serde(default)]
    pub groups: BTreeMap<String, GroupDecl>,
    #[serde(default)]
    pub characters: BTreeMap<String, CharacterDecl>,
    #[serde(default)]
    pub modules: BTreeMap<String, ModuleDecl>,
    #[serde(default)]
    pub conditions: BTreeMap<String, ConditionSpec>,
    #[serde(default)]
    pub gmas: BTreeMap<String, GmaDecl>,
    #[serde(default)]
    pub ch_algebras: BTreeMap<String, ChDecl>,
    #[serde(default)]
    pub commands: Vec<Command>,
    #[serde(default)]
    pub limits: Limits,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub max_order: Option<u64>,
    pub allow_p2: Option<bool>,
    pub paranoid: Option<bool>,
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RingDecl {
    /// ℤ/pⁿ; n = 1 is F_p.
    Zmod { n: u32 },
    Dual { base: String },
    Truncated { base: String, n: usize },
    Data { data: RingData },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDecl {
    #[serde(flatten)]
    pub family: GroupFamily,
    /// Extra named subgroups, each given by generating elements.
    #[serde(default)]
    pub subgroups: BTreeMap<String, Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupFamily {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Symmetric { n: usize },
    GeneralizedDihedral18,
    Product { factors: Vec<String> },
    Table { data: GroupData },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterDecl {
    pub ring: String,
    pub group: String,
    /// Values on the group's generators.
    pub values: Vec<RingElt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModuleDecl {
    Trivial { ring: String, group: String, rank: usize },
    Regular { ring: String, group: String },
    Character { character: String },
    Matrices { ring: String, group: String, generators: Vec<RingMat> },
    Sum { parts: Vec<String> },
    Twist { module: String, character: String },
    Data { data: ModuleData },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GmaDecl {
    /// The GMA spanned by a 2×2 representation.
    Matrices { ring: String, group: String, generators: Vec<RingMat>, residual: [String; 2] },
    Explicit { ring: String, group: String, b: AModuleData, c: AModuleData, m: Vec<Vec<RingElt>>, images: Vec<AlgElt>, residual: [String; 2] },
    Saturated { group: String, chi1: String, chi2: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChDecl {
    Matrices { ring: String, group: String, generators: Vec<RingMat> },
    Gma { gma: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalDecl {
    pub subgroup: String,
    pub condition: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    Vc { module: String, condition: String },
    HasC { module: String, condition: String },
    Submodules { module: String },
    Audit { condition: String, modules: Vec<String> },
    H1 { module: String },
    Ext1 { character: String, module: String },
    Ext1C { character: String, module: String, condition: String },
    Selmer { character: String, module: String, locals: Vec<LocalDecl> },
    Census { ring: String, group: String, residual: [String; 2] },
    ChCheck { algebra: String },
    ChQuotient { algebra: String, ideal: Vec<AlgElt> },
    EWithCondition { algebra: String, condition: String },
    Reducibility { gma: String },
    GmaWithCondition { gma: String, condition: String },
    Bridge {
        gma: String,
        condition: String,
        #[serde(default = "one")]
        rank: usize,
    },
}

fn one() -> usize {
    1
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Vc { .. } => "vc",
            Command::HasC { .. } => "has_c",
            Command::Submodules { .. } => "submodules",
            Command::Audit { .. } => "audit",
            Command::H1 { .. } => "h1",
            Command::Ext1 { .. } => "ext1",
            Command::Ext1C { .. } => "ext1_c",
            Command::Selmer { .. } => "selmer",
            Command::Census { .. } => "census",
            Command::ChCheck { .. } => "ch_check",
            Command::ChQuotient { .. } => "ch_quotient",
            Command::EWithCondition { .. } => "e_with_condition",
            Command::Reducibility { .. } => "reducibility",
            Command::GmaWithCondition { .. } => "gma_with_condition",
            Command::Bridge { .. } => "bridge",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Command::Vc { module, condition } => format!("largest quotient of {module} satisfying {condition}"),
            Command::HasC { module, condition } => format!("does {module} satisfy {condition} at every Artinian level"),
            Command::Submodules { module } => format!("submodule lattice of {module}"),
            Command::Audit { condition, modules } => format!("stability audit of {condition} on {}", modules.join(", ")),
            Command::H1 { module } => format!("H¹(G, {module}) by cocycles"),
            Command::Ext1 { character, module } => format!("Ext¹({character}, {module})"),
            Command::Ext1C { character, module, condition } => format!("Ext¹ classes of ({character}, {module}) whose extensions satisfy {condition}"),
            Command::Selmer { character, module, locals } => {
                let l: Vec<String> = locals.iter().map(|l| format!("{}:{}", l.subgroup, l.condition)).collect();
                format!("Selmer kernel of Ext¹({character}, {module}) for [{}]", l.join(", "))
            }
            Command::Census { ring, group, residual } => format!("dimension-2 pseudodeformations of {} ⊕ {} over {ring} for {group}", residual[0], residual[1]),
            Command::ChCheck { algebra } => format!("Cayley-Hamilton validation of {algebra}"),
            Command::ChQuotient { algebra, ideal } => format!("Cayley-Hamilton quotient of {algebra} by the ideal of {} generators", ideal.len()),
            Command::EWithCondition { algebra, condition } => format!("largest quotient of {algebra} satisfying {condition}"),
            Command::Reducibility { gma } => format!("reducibility ideal and split test for {gma}"),
            Command::GmaWithCondition { gma, condition } => format!("GMA structure on the {condition} quotient of {gma}"),
            Command::Bridge { gma, condition, rank } => format!("Hom(B, A^{rank}) against Ext¹ with {condition} for {gma}"),
        }
    }
}

/// Line and column of the first occurrence of `"needle"`, 1-based.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    let quoted = format!("\"{needle}\"");
    match text.find(&quoted) {
        Some(pos) => {
            let before = &text[..pos];
            let line = before.matches('\n').count() + 1;
            let col = before.rfind('\n').map_or(pos, |nl| pos - nl - 1) + 1;
            (line, col)
        }
        None => (1, 1),
    }
}

pub fn parse_session(text: &str) -> Result<Session> {
    let s: Session = serde_json::from_str(text).map_err(|e| Error::ParseError { line: e.line(), column: e.column(), msg: e.to_string() })?;
    if s.version != SESSION_VERSION {
        let (line, column) = locate(text, "version");
        return Err(Error::ParseError { line, column, msg: format!("unsupported session version {}", s.version) });
    }
    Ok(s)
}

fn missing(kind: &str, name: &str) -> Error {
    Error::ReferenceError(format!("{kind} {name}"))
}

/// Resolved declarations.
#[derive(Default)]
pub struct Env {
    pub prime: u64,
    pub rings: BTreeMap<String, Arc<FiniteRing>>,
    pub groups: BTreeMap<String, Arc<FiniteGroup>>,
    pub characters: BTreeMap<String, (Character, String)>,
    pub modules: BTreeMap<String, Arc<GModule>>,
    pub conditions: BTreeMap<String, ConditionSpec>,
    pub gmas: BTreeMap<String, GmaRep>,
    pub ch_algebras: BTreeMap<String, ChAlgebra>,
}

impl Env {
    pub fn ring(&self, name: &str) -> Result<&Arc<FiniteRing>> {
        self.rings.get(name).ok_or_else(|| missing("ring", name))
    }
    pub fn group(&self, name: &str) -> Result<&Arc<FiniteGroup>> {
        self.groups.get(name).ok_or_else(|| missing("group", name))
    }
    pub fn character(&self, name: &str) -> Result<&(Character, String)> {
        self.characters.get(name).ok_or_else(|| missing("character", name))
    }
    pub fn module(&self, name: &str) -> Result<&Arc<GModule>> {
        self.modules.get(name).ok_or_else(|| missing("module", name))
    }
    pub fn condition(&self, name: &str) -> Result<&ConditionSpec> {
        self.conditions.get(name).ok_or_else(|| missing("condition", name))
    }
    pub fn gma(&self, name: &str) -> Result<&GmaRep> {
        self.gmas.get(name).ok_or_else(|| missing("gma", name))
    }
    pub fn ch_algebra(&self, name: &str) -> Result<&ChAlgebra> {
        self.ch_algebras.get(name).ok_or_else(|| missing("ch_algebra", name))
    }
}

struct Resolver<'s> {
    s: &'s Session,
    env: Env,
    visiting: BTreeSet<(&'static str, String)>,
}

impl<'s> Resolver<'s> {
    fn enter(&mut self, kind: &'static str, name: &str) -> Result<()> {
        if !self.visiting.insert((kind, name.to_string())) {
            return Err(Error::Invalid(format!("{kind} {name} is defined in terms of itself")));
        }
        Ok(())
    }

    fn leave(&mut self, kind: &'static str, name: &str) {
        self.visiting.remove(&(kind, name.to_string()));
    }

    fn ring(&mut self, name: &str) -> Result<Arc<FiniteRing>> {
        if let Some(r) = self.env.rings.get(name) {
            return Ok(r.clone());
        }
        let decl = self.s.rings.get(name).ok_or_else(|| missing("ring", name))?;
        self.enter("ring", name)?;
        let p = self.s.prime;
        let r = match decl {
            RingDecl::Zmod { n } => Arc::new(FiniteRing::zmod(p, *n)),
            RingDecl::Dual { base } => extend_scalars(&self.ring(base)?, ExtensionKind::DualNumbers)?.0,
            RingDecl::Truncated { base, n } => extend_scalars(&self.ring(base)?, ExtensionKind::TruncatedPoly(*n))?.0,
            RingDecl::Data { data } => Arc::new(validate_ring(data.clone())?),
        };
        if r.prime() != p {
            return Err(Error::Invalid(format!("ring {name} has prime {} but the session prime is {p}", r.prime())));
        }
        self.leave("ring", name);
        self.env.rings.insert(name.to_string(), r.clone());
        Ok(r)
    }

    fn group(&mut self, name: &str) -> Result<Arc<FiniteGroup>> {
        if let Some(g) = self.env.groups.get(name) {
            return Ok(g.clone());
        }
        let decl = self.s.groups.get(name).ok_or_else(|| missing("group", name))?;
        self.enter("group", name)?;
        let mut g = match &decl.family {
            GroupFamily::Cyclic { n } => FiniteGroup::cyclic(*n),
            GroupFamily::Dihedral { n } => FiniteGroup::dihedral(*n),
            GroupFamily::Symmetric { n } => FiniteGroup::symmetric(*n),
            GroupFamily::GeneralizedDihedral18 => FiniteGroup::generalized_dihedral_18(),
            GroupFamily::Product { factors } => {
                let mut acc: Option<FiniteGroup> = None;
                for f in factors {
                    let h = self.group(f)?;
                    acc = Some(match acc {
                        None => (*h).clone(),
                        Some(a) => FiniteGroup::product(&a, &h),
                    });
                }
                acc.ok_or_else(|| Error::Invalid(format!("group {name}: empty product")))?
            }
            GroupFamily::Table { data } => FiniteGroup::from_table(data.clone())?,
        };
        for (sub, gens) in &decl.subgroups {
            if gens.iter().any(|&x| x >= g.order()) {
                return Err(Error::Invalid(format!("subgroup {sub} of {name} names a missing element")));
            }
            g.name_generated(sub, gens);
        }
        self.leave("group", name);
        let g = Arc::new(g);
        self.env.groups.insert(name.to_string(), g.clone());
        Ok(g)
    }

    fn character(&mut self, name: &str) -> Result<(Character, String)> {
        if let Some(c) = self.env.characters.get(name) {
            return Ok(c.clone());
        }
        let decl = self.s.characters.get(name).ok_or_else(|| missing("character", name))?;
        let a = self.ring(&decl.ring)?;
        let g = self.group(&decl.group)?;
        if decl.values.len() != g.generators.len() || decl.values.iter().any(|v| v.len() != a.rank()) {
            return Err(Error::Invalid(format!("character {name} needs one ring element per generator")));
        }
        let chi = Character::from_generators(a, &g, &decl.values)
            .ok_or_else(|| Error::Invalid(format!("character {name} does not respect the group relations")))?;
        let out = (chi, decl.group.clone());
        self.env.characters.insert(name.to_string(), out.clone());
        Ok(out)
    }

    fn module(&mut self, name: &str) -> Result<Arc<GModule>> {
        if let Some(m) = self.env.modules.get(name) {
            return Ok(m.clone());
        }
        let decl = self.s.modules.get(name).ok_or_else(|| missing("module", name))?;
        self.enter("module", name)?;
        let m = match decl {
            ModuleDecl::Trivial { ring, group, rank } => GModule::trivial(self.ring(ring)?, self.group(group)?, *rank),
            ModuleDecl::Regular { ring, group } => GModule::regular(self.ring(ring)?, self.group(group)?)?,
            ModuleDecl::Character { character } => {
                let (chi, g) = self.character(character)?;
                GModule::from_character(&chi, self.group(&g)?)?
            }
            ModuleDecl::Matrices { ring, group, generators } => GModule::from_matrix_rep(self.ring(ring)?, self.group(group)?, generators)?,
            ModuleDecl::Sum { parts } => {
                let ms = parts.iter().map(|p| self.module(p)).collect::<Result<Vec<_>>>()?;
                let refs: Vec<&GModule> = ms.iter().map(|m| m.as_ref()).collect();
                GModule::direct_sum(&refs)?
            }
            ModuleDecl::Twist { module, character } => {
                let m = self.module(module)?;
                let (chi, _) = self.character(character)?;
                m.tensor_with_character(&chi)?
            }
            ModuleDecl::Data { data } => GModule::from_data(data)?,
        };
        if m.ring().prime() != self.s.prime {
            return Err(Error::Invalid(format!("module {name} is not over the session prime")));
        }
        self.leave("module", name);
        let m = Arc::new(m);
        self.env.modules.insert(name.to_string(), m.clone());
        Ok(m)
    }

    fn residual(&mut self, names: &[String; 2]) -> Result<(Character, Character)> {
        Ok((self.character(&names[0])?.0, self.character(&names[1])?.0))
    }

    fn gma(&mut self, name: &str) -> Result<GmaRep> {
        if let Some(g) = self.env.gmas.get(name) {
            return Ok(g.clone());
        }
        let decl = self.s.gmas.get(name).ok_or_else(|| missing("gma", name))?;
        let rep = match decl {
            GmaDecl::Matrices { ring, group, generators, residual } => {
                let res = self.residual(residual)?;
                gma_from_rep(self.ring(ring)?, self.group(group)?, generators, res)?
            }
            GmaDecl::Explicit { ring, group, b, c, m, images, residual } => {
                let a = self.ring(ring)?;
                let spec = GmaSpec { ring: a.data().clone(), b: b.clone(), c: c.clone(), m: m.clone() };
                let data = Arc::new(GmaData::from_spec(&spec)?);
                let res = self.residual(residual)?;
                GmaRep::new(data, self.group(group)?, images.clone(), res)?
            }
            GmaDecl::Saturated { group, chi1, chi2 } => {
                let (c1, _) = self.character(chi1)?;
                let (c2, _) = self.character(chi2)?;
                saturated_gma(&c1, &c2, self.group(group)?)?
            }
        };
        self.env.gmas.insert(name.to_string(), rep.clone());
        Ok(rep)
    }

    fn ch_algebra(&mut self, name: &str) -> Result<ChAlgebra> {
        if let Some(c) = self.env.ch_algebras.get(name) {
            return Ok(c.clone());
        }
        let decl = self.s.ch_algebras.get(name).ok_or_else(|| missing("ch_algebra", name))?;
        let ch = match decl {
            ChDecl::Matrices { ring, group, generators } => ChAlgebra::matrix(self.ring(ring)?, self.group(group)?, generators)?,
            ChDecl::Gma { gma } => self.gma(gma)?.algebra_rep()?,
        };
        self.env.ch_algebras.insert(name.to_string(), ch.clone());
        Ok(ch)
    }
}

/// Builds every declaration, checking that all references resolve.
pub fn resolve(s: &Session) -> Result<Env> {
    let mut r = Resolver { s, env: Env { prime: s.prime, ..Env::default() }, visiting: BTreeSet::new() };
    fn ctx<'a>(kind: &'a str, name: &'a str) -> impl Fn(Error) -> Error + 'a {
        move |e| if matches!(e, Error::ReferenceError(_)) { e } else { e.context(format!("{kind} {name}")) }
    }
    for name in s.rings.keys() {
        r.ring(name).map_err(ctx("ring", name))?;
    }
    for name in s.groups.keys() {
        r.group(name).map_err(ctx("group", name))?;
    }
    for name in s.characters.keys() {
        r.character(name).map_err(ctx("character", name))?;
    }
    for name in s.modules.keys() {
        r.module(name).map_err(ctx("module", name))?;
    }
    for (name, c) in &s.conditions {
        r.env.conditions.insert(name.clone(), c.clone());
    }
    for name in s.gmas.keys() {
        r.gma(name).map_err(ctx("gma", name))?;
    }
    for name in s.ch_algebras.keys() {
        r.ch_algebra(name).map_err(ctx("ch_algebra", name))?;
    }
    check_command_refs(s, &r.env)?;
    Ok(r.env)
}

fn check_command_refs(s: &Session, env: &Env) -> Result<()> {
    for (i, c) in s.commands.iter().enumerate() {
        let wrap = |e: Error| e.context(format!("command {i} ({})", c.name()));
        let res: Result<()> = (|| {
            match c {
                Command::Vc { module, condition } | Command::HasC { module, condition } => {
                    env.module(module)?;
                    env.condition(condition)?;
                }
                Command::Submodules { module } | Command::H1 { module } => {
                    env.module(module)?;
                }
                Command::Audit { condition, modules } => {
                    env.condition(condition)?;
                    for m in modules {
                        env.module(m)?;
                    }
                }
                Command::Ext1 { character, module } => {
                    env.character(character)?;
                    env.module(module)?;
                }
                Command::Ext1C { character, module, condition } => {
                    env.character(character)?;
                    env.module(module)?;
                    env.condition(condition)?;
                }
                Command::Selmer { character, module, locals } => {
                    env.character(character)?;
                    env.module(module)?;
                    for l in locals {
                        env.condition(&l.condition)?;
                    }
                }
                Command::Census { ring, group, residual } => {
                    env.ring(ring)?;
                    env.group(group)?;
                    env.character(&residual[0])?;
                    env.character(&residual[1])?;
                }
                Command::ChCheck { algebra } | Command::ChQuotient { algebra, .. } => {
                    env.ch_algebra(algebra)?;
                }
                Command::EWithCondition { algebra, condition } => {
                    env.ch_algebra(algebra)?;
                    env.condition(condition)?;
                }
                Command::Reducibility { gma } => {
                    env.gma(gma)?;
                }
                Command::GmaWithCondition { gma, condition } | Command::Bridge { gma, condition, .. } => {
                    env.gma(gma)?;
                    env.condition(condition)?;
                }
            }
            Ok(())
        })();
        res.map_err(wrap)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_has_position() {
        let err = parse_session("{\n  \"version\": 1,\n  \"prime\": 3,\n  \"rings\": {\"A\": {\"kind\": \"zmod\"}}\n}").unwrap_err();
        match err {
            Error::ParseError { line, .. } => assert_eq!(line, 4),
            e => panic!("{e}"),
        }
        let err = parse_session("{\"version\": 1, \"prime\": 3,}").unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 1, .. }));
    }

    #[test]
    fn unknown_version_is_a_parse_error() {
        let err = parse_session("{\n\"version\": 9, \"prime\": 3}").unwrap_err();
        assert_eq!(err, Error::ParseError { line: 2, column: 1, msg: "unsupported session version 9".into() });
    }

    #[test]
    fn undeclared_name_is_reported() {
        let text = r#"{"version": 1, "prime": 3,
            "rings": {"A": {"kind": "zmod", "n": 1}},
            "groups": {"G": {"kind": "cyclic", "n": 3}},
            "modules": {"V": {"kind": "trivial", "ring": "A", "group": "H", "rank": 1}}}"#;
        let err = resolve(&parse_session(text).unwrap()).err().unwrap();
        assert_eq!(err, Error::ReferenceError("group H".into()));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn self_reference_is_rejected() {
        let text = r#"{"version": 1, "prime": 3,
            "modules": {"V": {"kind": "sum", "parts": ["V"]}}}"#;
        let err = resolve(&parse_session(text).unwrap()).err().unwrap();
        assert!(matches!(err.root(), Error::Invalid(_)));
    }

    #[test]
    fn declarations_resolve() {
        let text = r#"{"version": 1, "prime": 3,
            "rings": {"A": {"kind": "zmod", "n": 1}, "D": {"kind": "dual", "base": "A"}},
            "groups": {"Z": {"kind": "cyclic", "n": 3}, "P": {"kind": "product", "factors": ["Z", "Z"]},
                       "S": {"kind": "symmetric", "n": 3, "subgroups": {"T": [1]}}},
            "characters": {"sgn": {"ring": "A", "group": "S", "values": [[2], [1]]}},
            "modules": {"V": {"kind": "character", "character": "sgn"},
                        "W": {"kind": "sum", "parts": ["V", "V"]}},
            "commands": [{"op": "h1", "module": "W"}]}"#;
        let env = resolve(&parse_session(text).unwrap()).unwrap();
        assert_eq!(env.ring("D").unwrap().order(), 9);
        assert_eq!(env.group("P").unwrap().order(), 9);
        assert_eq!(env.group("S").unwrap().subgroup("T").unwrap().len(), 2);
        assert_eq!(env.module("W").unwrap().order(), 9);
    }
}
