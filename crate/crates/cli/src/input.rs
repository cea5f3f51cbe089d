//! TOML problem files.

use serde::Deserialize;
use thiserror::Error;

use qfol_core::affpseudo::{AffineMap, FGAffineGroup, HalfSpace, OpenCell, Transition};
use qfol_core::localmodel::{LocalModelInput, Presentation};
use qfol_core::quasifold::{AtlasObject, AtlasTransition, QuasifoldChart};
use qfol_core::scalarfield::{Scalar, ScalarMatrix, ShadowOrder, SymbolTable};
use qfol_core::torusfol::LinearFoliationSpec;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Toml { path: String, message: String },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
}

fn invalid(at: impl Into<String>, message: impl ToString) -> InputError {
    InputError::Invalid { at: at.into(), message: message.to_string() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolDecl {
    pub name: String,
    pub shadow: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDecl {
    pub lo: Option<Vec<String>>,
    pub hi: Option<Vec<String>>,
    #[serde(default)]
    pub constraint: Vec<ConstraintDecl>,
}

/// `⟨normal, x⟩ < offset`
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintDecl {
    pub normal: Vec<String>,
    pub offset: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDecl {
    pub linear: Option<Vec<Vec<String>>>,
    pub translation: Option<Vec<String>>,
    pub domain: Option<CellDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDecl {
    pub dim: usize,
    #[serde(default)]
    pub generator: Vec<MapDecl>,
    pub cell: Option<CellDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasTransitionDecl {
    pub source: usize,
    pub target: usize,
    pub linear: Option<Vec<Vec<String>>>,
    pub translation: Option<Vec<String>>,
    pub domain: Option<CellDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDecl {
    pub chart_x: usize,
    pub x: Vec<String>,
    pub chart_y: usize,
    pub y: Vec<String>,
}

/// Union of the fields used by all subcommands; each command checks what it needs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawInput {
    #[serde(default)]
    pub symbol: Vec<SymbolDecl>,
    pub n: Option<usize>,
    pub directions: Option<Vec<Vec<String>>>,
    pub dim: Option<usize>,
    pub x: Option<Vec<String>>,
    pub y: Option<Vec<String>>,
    #[serde(default)]
    pub generator: Vec<MapDecl>,
    pub samples: Option<usize>,
    pub r: Option<usize>,
    pub d: Option<usize>,
    pub presentation: Option<String>,
    pub psi: Option<Vec<Vec<String>>>,
    pub rho: Option<Vec<Vec<Vec<String>>>>,
    pub point: Option<Vec<String>>,
    #[serde(default)]
    pub chart: Vec<ChartDecl>,
    #[serde(default)]
    pub transition: Vec<AtlasTransitionDecl>,
    pub query: Option<QueryDecl>,
}

pub struct Problem {
    pub raw: RawInput,
    pub table: SymbolTable,
    pub bytes: Vec<u8>,
}

pub fn load(path: &str) -> Result<Problem, InputError> {
    let bytes = std::fs::read(path).map_err(|source| InputError::Io { path: path.into(), source })?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| InputError::Toml { path: path.into(), message: e.to_string() })?;
    let raw: RawInput = toml::from_str(&text)
        .map_err(|e| InputError::Toml { path: path.into(), message: e.to_string().trim_end().to_string() })?;
    let table = SymbolTable::new(raw.symbol.iter().map(|s| (s.name.clone(), s.shadow)))
        .map_err(|e| invalid("symbol", e))?;
    Ok(Problem { raw, table, bytes })
}

impl Problem {
    pub fn order(&self, tolerance: f64) -> ShadowOrder<'_> {
        ShadowOrder::new(&self.table, tolerance)
    }

    pub fn scalar(&self, at: &str, text: &str) -> Result<Scalar, InputError> {
        self.table.parse(text).map_err(|e| invalid(at, e))
    }

    pub fn vector(&self, at: &str, v: &[String]) -> Result<Vec<Scalar>, InputError> {
        v.iter().enumerate().map(|(i, s)| self.scalar(&format!("{at}[{i}]"), s)).collect()
    }

    pub fn matrix(&self, at: &str, m: &[Vec<String>]) -> Result<ScalarMatrix, InputError> {
        let rows = m
            .iter()
            .enumerate()
            .map(|(i, r)| self.vector(&format!("{at}[{i}]"), r))
            .collect::<Result<Vec<_>, _>>()?;
        ScalarMatrix::try_from_rows(rows).ok_or_else(|| invalid(at, "rows have different lengths"))
    }

    fn require<'a, T>(&self, field: &str, v: &'a Option<T>) -> Result<&'a T, InputError> {
        v.as_ref().ok_or_else(|| invalid(field, "missing field"))
    }

    pub fn foliation(&self) -> Result<LinearFoliationSpec, InputError> {
        let n = *self.require("n", &self.raw.n)?;
        let dirs = self
            .require("directions", &self.raw.directions)?
            .iter()
            .enumerate()
            .map(|(i, d)| self.vector(&format!("directions[{i}]"), d))
            .collect::<Result<Vec<_>, _>>()?;
        LinearFoliationSpec::new(n, dirs).map_err(|e| invalid("directions", e))
    }

    pub fn point(&self, field: &str, v: &Option<Vec<String>>) -> Result<Vec<Scalar>, InputError> {
        self.vector(field, self.require(field, v)?)
    }

    pub fn cell(&self, at: &str, dim: usize, decl: Option<&CellDecl>) -> Result<OpenCell, InputError> {
        let Some(decl) = decl else { return Ok(OpenCell::whole(dim)) };
        let mut constraints = Vec::new();
        let lo = decl.lo.as_ref().map(|v| self.vector(&format!("{at}.lo"), v)).transpose()?;
        let hi = decl.hi.as_ref().map(|v| self.vector(&format!("{at}.hi"), v)).transpose()?;
        for (name, v) in [("lo", &lo), ("hi", &hi)] {
            if v.as_ref().is_some_and(|v| v.len() != dim) {
                return Err(invalid(format!("{at}.{name}"), format!("expected {dim} entries")));
            }
        }
        for i in 0..dim {
            let mut e = vec![Scalar::zero(); dim];
            if let Some(lo) = &lo {
                e[i] = Scalar::from_int(-1);
                constraints.push(HalfSpace::new(e.clone(), -&lo[i]));
            }
            if let Some(hi) = &hi {
                e[i] = Scalar::one();
                constraints.push(HalfSpace::new(e.clone(), hi[i].clone()));
            }
        }
        for (k, c) in decl.constraint.iter().enumerate() {
            let at = format!("{at}.constraint[{k}]");
            let normal = self.vector(&format!("{at}.normal"), &c.normal)?;
            let offset = self.scalar(&format!("{at}.offset"), &c.offset)?;
            constraints.push(HalfSpace::new(normal, offset));
        }
        OpenCell::new(dim, constraints).map_err(|e| invalid(at, e))
    }

    pub fn affine_map(&self, at: &str, dim: usize, decl: &MapDecl) -> Result<AffineMap, InputError> {
        let linear = match &decl.linear {
            Some(m) => self.matrix(&format!("{at}.linear"), m)?,
            None => ScalarMatrix::identity(dim),
        };
        let translation = match &decl.translation {
            Some(v) => self.vector(&format!("{at}.translation"), v)?,
            None => vec![Scalar::zero(); dim],
        };
        if linear.rows() != dim || translation.len() != dim {
            return Err(invalid(at, format!("expected a map of dimension {dim}")));
        }
        AffineMap::new(linear, translation).map_err(|e| invalid(at, e))
    }

    pub fn transition(
        &self,
        at: &str,
        dim: usize,
        decl: &MapDecl,
        order: &ShadowOrder,
    ) -> Result<Transition, InputError> {
        let map = self.affine_map(at, dim, decl)?;
        let domain = self.cell(&format!("{at}.domain"), dim, decl.domain.as_ref())?;
        Transition::new(map, domain, order).map_err(|e| invalid(at, e))
    }

    /// Dimension of the generator list: `dim`, else read off the first generator.
    fn generator_dim(&self) -> Result<usize, InputError> {
        if let Some(d) = self.raw.dim {
            return Ok(d);
        }
        let g = self.raw.generator.first().ok_or_else(|| invalid("generator", "at least one generator is required"))?;
        g.translation
            .as_ref()
            .map(Vec::len)
            .or_else(|| g.linear.as_ref().map(Vec::len))
            .ok_or_else(|| invalid("dim", "missing field"))
    }

    pub fn transitions(&self, order: &ShadowOrder) -> Result<Vec<Transition>, InputError> {
        let dim = self.generator_dim()?;
        if self.raw.generator.is_empty() {
            return Err(invalid("generator", "at least one generator is required"));
        }
        self.raw
            .generator
            .iter()
            .enumerate()
            .map(|(i, g)| self.transition(&format!("generator[{i}]"), dim, g, order))
            .collect()
    }

    pub fn group(&self) -> Result<FGAffineGroup, InputError> {
        let dim = self.generator_dim()?;
        let maps = self
            .raw
            .generator
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if g.domain.is_some() {
                    return Err(invalid(format!("generator[{i}].domain"), "group generators are global maps"));
                }
                self.affine_map(&format!("generator[{i}]"), dim, g)
            })
            .collect::<Result<Vec<_>, _>>()?;
        FGAffineGroup::new(dim, maps).map_err(|e| invalid("generator", e))
    }

    pub fn local_model(&self) -> Result<LocalModelInput, InputError> {
        let r = *self.require("r", &self.raw.r)?;
        let d = *self.require("d", &self.raw.d)?;
        let presentation = match self.raw.presentation.as_deref() {
            Some("free") => Presentation::Free,
            Some("free-abelian") | None => Presentation::FreeAbelian,
            Some(other) => {
                return Err(invalid("presentation", format!("expected \"free\" or \"free-abelian\", got {other:?}")))
            }
        };
        let psi = match &self.raw.psi {
            Some(p) => p
                .iter()
                .enumerate()
                .map(|(i, v)| self.vector(&format!("psi[{i}]"), v))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        let rho = match &self.raw.rho {
            Some(m) => m
                .iter()
                .enumerate()
                .map(|(i, m)| self.matrix(&format!("rho[{i}]"), m))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        Ok(LocalModelInput { r, d, presentation, psi, rho })
    }

    pub fn atlas(&self, order: &ShadowOrder) -> Result<AtlasObject, InputError> {
        if self.raw.chart.is_empty() {
            return Err(invalid("chart", "at least one chart is required"));
        }
        let charts = self
            .raw
            .chart
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let at = format!("chart[{k}]");
                let gens = c
                    .generator
                    .iter()
                    .enumerate()
                    .map(|(i, g)| self.affine_map(&format!("{at}.generator[{i}]"), c.dim, g))
                    .collect::<Result<Vec<_>, _>>()?;
                let group = FGAffineGroup::new(c.dim, gens).map_err(|e| invalid(&at, e))?;
                let cell = self.cell(&format!("{at}.cell"), c.dim, c.cell.as_ref())?;
                Ok(QuasifoldChart::new(group, cell))
            })
            .collect::<Result<Vec<_>, InputError>>()?;
        let transitions = self
            .raw
            .transition
            .iter()
            .enumerate()
            .map(|(k, t)| {
                let at = format!("transition[{k}]");
                let dim = charts.get(t.source).ok_or_else(|| invalid(format!("{at}.source"), "no such chart"))?.dim();
                let map = MapDecl { linear: t.linear.clone(), translation: t.translation.clone(), domain: t.domain.clone() };
                let lift = self.transition(&at, dim, &map, order)?;
                Ok(AtlasTransition { source: t.source, target: t.target, lift })
            })
            .collect::<Result<Vec<_>, InputError>>()?;
        AtlasObject::new(charts, transitions).map_err(|e| invalid("transition", e))
    }
}
