//! JSON input documents and their translation into validated core objects.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use toposforge::fincat::{validate_category, FiniteCategory, RawCategory};
use toposforge::presheaf::{Presheaf, PresheafMap};
use toposforge::site::{validate_named_topology, Site};
use toposforge::universe::{RealignmentProblem, SmallCode, Universe};
use toposforge::Cap;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryDoc {
    pub objects: Vec<String>,
    #[serde(default)]
    pub morphisms: Vec<MorphismDoc>,
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub id: String,
    pub src: String,
    pub dst: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDoc {
    #[serde(default)]
    pub category: Option<CategoryDoc>,
    pub covers: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafDoc {
    pub carriers: BTreeMap<String, usize>,
    #[serde(default)]
    pub restrictions: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub domain: PresheafDoc,
    pub codomain: PresheafDoc,
    pub components: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonoDoc {
    pub domain: PresheafDoc,
    pub components: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDoc {
    pub sizes: Vec<usize>,
    pub tables: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub family: FamilyDoc,
    pub mono: MonoDoc,
    pub codes: BTreeMap<String, Vec<CodeDoc>>,
    pub points: BTreeMap<String, Vec<Option<usize>>>,
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
}

pub fn category_from(doc: &CategoryDoc) -> Result<Arc<FiniteCategory>> {
    let raw = RawCategory {
        objects: doc.objects.clone(),
        morphisms: doc.morphisms.iter().map(|m| (m.id.clone(), m.src.clone(), m.dst.clone())).collect(),
        compose: doc.compose.iter().map(|[g, f, gf]| (g.clone(), f.clone(), gf.clone())).collect(),
    };
    Ok(Arc::new(validate_category(&raw)?))
}

pub fn load_category(path: &Path) -> Result<Arc<FiniteCategory>> {
    category_from(&read(path)?).with_context(|| format!("validating {}", path.display()))
}

pub fn load_site(path: &Path, cat: Option<Arc<FiniteCategory>>, cap: Cap) -> Result<Site> {
    let doc: SiteDoc = read(path)?;
    let cat = match (&doc.category, cat) {
        (Some(c), _) => category_from(c).with_context(|| format!("validating the category in {}", path.display()))?,
        (None, Some(c)) => c,
        (None, None) => bail!("{} has no category; pass --cat", path.display()),
    };
    let covers: Vec<(&str, Vec<Vec<&str>>)> = doc
        .covers
        .iter()
        .map(|(o, sieves)| (o.as_str(), sieves.iter().map(|s| s.iter().map(String::as_str).collect()).collect()))
        .collect();
    let topology = validate_named_topology(&cat, &covers, cap).with_context(|| format!("validating {}", path.display()))?;
    Ok(Site::new(topology))
}

pub fn presheaf_from(cat: &Arc<FiniteCategory>, doc: &PresheafDoc) -> Result<Presheaf> {
    let mut sizes = vec![0; cat.object_count()];
    for (name, &k) in &doc.carriers {
        sizes[cat.object(name)?] = k;
    }
    let mut tables: Vec<Option<Vec<usize>>> = vec![None; cat.morphism_count()];
    for c in cat.objects() {
        tables[cat.identity(c)] = Some((0..sizes[c]).collect());
    }
    for (name, t) in &doc.restrictions {
        let m = cat.morphism(name)?;
        if cat.is_identity(m) {
            bail!("restriction along identity `{name}` is implicit");
        }
        tables[m] = Some(t.clone());
    }
    let tables = tables
        .into_iter()
        .enumerate()
        .map(|(m, t)| t.ok_or_else(|| anyhow!("missing restriction along `{}`", cat.morphism_name(m))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Presheaf::new(cat.clone(), sizes, tables)?)
}

fn components(cat: &Arc<FiniteCategory>, doc: &BTreeMap<String, Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    let mut comps = vec![Vec::new(); cat.object_count()];
    for (name, row) in doc {
        comps[cat.object(name)?] = row.clone();
    }
    Ok(comps)
}

pub fn family_from(cat: &Arc<FiniteCategory>, doc: &FamilyDoc) -> Result<PresheafMap> {
    let dom = presheaf_from(cat, &doc.domain).context("domain")?;
    let cod = presheaf_from(cat, &doc.codomain).context("codomain")?;
    Ok(PresheafMap::new(dom, cod, components(cat, &doc.components)?)?)
}

pub fn load_presheaf(path: &Path, cat: &Arc<FiniteCategory>) -> Result<Presheaf> {
    presheaf_from(cat, &read(path)?).with_context(|| format!("validating {}", path.display()))
}

pub fn load_family(path: &Path, cat: &Arc<FiniteCategory>, bound: usize) -> Result<PresheafMap> {
    let f = family_from(cat, &read(path)?).with_context(|| format!("validating {}", path.display()))?;
    f.check_fibers(bound).with_context(|| format!("{} under bound {bound}", path.display()))?;
    Ok(f)
}

pub fn load_problem(path: &Path, u: &Universe) -> Result<RealignmentProblem> {
    let doc: ProblemDoc = read(path)?;
    let cat = u.category();
    let ctx = || format!("validating {}", path.display());
    let family = family_from(cat, &doc.family).context("family").with_context(ctx)?;
    let dom = presheaf_from(cat, &doc.mono.domain).context("mono domain").with_context(ctx)?;
    let mono = PresheafMap::new(dom, family.cod().clone(), components(cat, &doc.mono.components)?)
        .context("mono")
        .with_context(ctx)?;
    let mut codes = vec![Vec::new(); cat.object_count()];
    for (name, row) in &doc.codes {
        let c = cat.object(name)?;
        codes[c] = row
            .iter()
            .map(|d| SmallCode {
                base: c,
                sizes: d.sizes.clone(),
                tables: d.tables.clone(),
            })
            .collect();
    }
    let mut points = vec![Vec::new(); cat.object_count()];
    for (name, row) in &doc.points {
        points[cat.object(name)?] = row.clone();
    }
    Ok(RealignmentProblem::new(u, mono, family, codes, points).with_context(ctx)?)
}
