//! Chain files for `compose`: tangent spaces and morphisms, each morphism
//! optionally carrying an explicit hermitian structure.

use hermcone::derived::HermStructure;
use hermcone::hermlin::json::{chain_map_from_raw, mat_from_json, mat_to_json, RawMat};
use hermcone::hermlin::HermComplex;
use hermcone::osm::{tangent_complex, ToyMorphism, ToySpace};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::bundle::structure_as_map;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub label: String,
    pub gram: RawMat,
}

/// Structure as a quasi-isomorphism `metric → T_f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplicitStructure {
    pub metric: HermComplex,
    pub map: BTreeMap<i32, RawMat>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorphismDoc {
    pub source: String,
    pub target: String,
    pub df: RawMat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<ExplicitStructure>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc {
    pub spaces: Vec<SpaceDoc>,
    /// Composable in order: `morphisms[k+1]` starts where `morphisms[k]` ends.
    pub morphisms: Vec<MorphismDoc>,
}

impl ChainDoc {
    pub fn from_json(text: &str) -> Result<ChainDoc, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("chain: {e}")))
    }

    fn space(&self, label: &str) -> Result<ToySpace, CliError> {
        let d = self
            .spaces
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| CliError::Invalid(format!("no space labelled '{label}'")))?;
        let n = d.gram.len();
        let g = mat_from_json(&d.gram, n, n).map_err(|e| CliError::Invalid(format!("space '{label}': {e}")))?;
        let x = ToySpace::new(label, g).map_err(|e| CliError::Invalid(format!("space '{label}': {e}")))?;
        HermComplex::single(0, x.tangent.gram.clone())
            .validated()
            .map_err(|e| CliError::Invalid(format!("space '{label}': {e}")))?;
        Ok(x)
    }

    pub fn morphisms(&self) -> Result<Vec<ToyMorphism>, CliError> {
        let mut out = Vec::new();
        for (k, m) in self.morphisms.iter().enumerate() {
            let (x, y) = (self.space(&m.source)?, self.space(&m.target)?);
            let ctx = format!("morphism {k}");
            let df = mat_from_json(&m.df, y.dim(), x.dim()).map_err(|e| CliError::Invalid(format!("{ctx}: {e}")))?;
            let t = tangent_complex(&x, &y, &df).map_err(|e| CliError::Invalid(format!("{ctx}: {e}")))?;
            let f = match &m.structure {
                None => ToyMorphism::ambient(x, y, df),
                Some(s) => {
                    let metric = s.metric.clone().validated().map_err(|e| CliError::Invalid(format!("{ctx}: {e}")))?;
                    let q = chain_map_from_raw(metric, t, &s.map).map_err(|e| CliError::Invalid(format!("{ctx}: {e}")))?;
                    HermStructure::from_map(q).and_then(|h| ToyMorphism::new(x, y, df, h))
                }
            }
            .map_err(|e| CliError::from_lib(e, &ctx))?;
            out.push(f);
        }
        if out.is_empty() {
            return Err(CliError::Invalid("chain has no morphisms".into()));
        }
        Ok(out)
    }
}

pub fn morphism_doc(f: &ToyMorphism) -> Result<MorphismDoc, CliError> {
    let q = structure_as_map(&f.t_struct)?;
    Ok(MorphismDoc {
        source: f.source.label.clone(),
        target: f.target.label.clone(),
        df: mat_to_json(&f.df),
        structure: Some(ExplicitStructure {
            metric: f.t_struct.metric().clone(),
            map: q.maps().iter().map(|(&i, m)| (i, mat_to_json(m))).collect(),
        }),
    })
}

pub fn space_doc(x: &ToySpace) -> SpaceDoc {
    SpaceDoc { label: x.label.clone(), gram: mat_to_json(&x.tangent.gram) }
}
