use std::str::FromStr;
use std::sync::OnceLock;

use crate::constants::{rydberg_reduced, M_PROTON, M_RB87};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Species {
    Hydrogenic,
    Rb87,
}

impl Species {
    /// Reduced-mass Rydberg constant in 1/m.
    pub fn rydberg_constant(self) -> f64 {
        match self {
            Species::Hydrogenic => rydberg_reduced(M_PROTON),
            Species::Rb87 => rydberg_reduced(M_RB87),
        }
    }
}

impl FromStr for Species {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "Hydrogenic" => Ok(Species::Hydrogenic),
            "Rb87" => Ok(Species::Rb87),
            other => Err(Error::Invalid(format!("unknown species `{other}`"))),
        }
    }
}

/// Fine-structure component used when a spinless level needs one defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FineStructure {
    /// j = l + 1/2
    #[default]
    Stretched,
    /// j = l − 1/2
    Lower,
    /// (2j+1)-weighted mean of both components
    Average,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectRow {
    pub species: Species,
    pub l: u32,
    pub j: f64,
    pub delta0: f64,
    pub delta2: f64,
}

impl DefectRow {
    pub fn at(&self, n: u32) -> f64 {
        let nd = n as f64 - self.delta0;
        self.delta0 + self.delta2 / (nd * nd)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SpeciesTable {
    rows: Vec<DefectRow>,
}

const BUILTIN: &str = include_str!("../../data/rb87_defects.txt");

impl SpeciesTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| Error::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            if cols.len() != 5 {
                return Err(err("expected 5 columns: species l j delta0 delta2"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
            let row = DefectRow {
                species: cols[0].parse().map_err(|_| err("unknown species"))?,
                l: cols[1].parse().map_err(|_| err("bad l"))?,
                j: num(cols[2])?,
                delta0: num(cols[3])?,
                delta2: num(cols[4])?,
            };
            if (row.j - row.l as f64).abs() != 0.5 {
                return Err(err("j must be l ± 1/2"));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn builtin() -> &'static SpeciesTable {
        static TABLE: OnceLock<SpeciesTable> = OnceLock::new();
        TABLE.get_or_init(|| SpeciesTable::parse(BUILTIN).expect("bundled species table parses"))
    }

    pub fn rows(&self) -> &[DefectRow] {
        &self.rows
    }

    /// Quantum defect for (n, l); 0 when l is not tabulated.
    pub fn defect(&self, species: Species, n: u32, l: u32, fs: FineStructure) -> f64 {
        let comps: Vec<&DefectRow> = self
            .rows
            .iter()
            .filter(|r| r.species == species && r.l == l)
            .collect();
        if comps.is_empty() {
            return 0.0;
        }
        let pick = |hi: bool| {
            comps
                .iter()
                .find(|r| (r.j > l as f64) == hi)
                .or_else(|| comps.first())
                .map(|r| r.at(n))
                .unwrap_or(0.0)
        };
        match fs {
            FineStructure::Stretched => pick(true),
            FineStructure::Lower => pick(false),
            FineStructure::Average => {
                let (w, s) = comps.iter().fold((0.0, 0.0), |(w, s), r| {
                    (w + 2.0 * r.j + 1.0, s + (2.0 * r.j + 1.0) * r.at(n))
                });
                s / w
            }
        }
    }
}
