//! Single-file bundles: named complexes, chain maps, roofs, structures and
//! triangles, cross-referenced by name.

use std::collections::BTreeMap;

use hermcone::derived::{structure_map, HermStructure, HermTriangle, Roof};
use hermcone::hermlin::json::{chain_map_from_raw, RawMat};
use hermcone::hermlin::{ChainMap, HermComplex};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MapDoc {
    pub source: String,
    pub target: String,
    pub maps: BTreeMap<i32, RawMat>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoofDoc {
    /// Quasi-isomorphism `middle → source`.
    pub s: String,
    /// `middle → target`.
    pub g: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureDoc {
    pub underlying: String,
    pub metric: String,
    /// Roof from the metric representative to the underlying complex.
    pub roof: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleDoc {
    pub a: String,
    pub b: String,
    pub c: String,
    pub u: String,
    pub v: String,
    pub w: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bundle {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub complexes: BTreeMap<String, HermComplex>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, MapDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub roofs: BTreeMap<String, RoofDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub structures: BTreeMap<String, StructureDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub triangles: BTreeMap<String, TriangleDoc>,
}

fn missing(kind: &str, name: &str) -> CliError {
    CliError::Invalid(format!("no {kind} named '{name}' in the bundle"))
}

impl Bundle {
    pub fn from_json(text: &str) -> Result<Bundle, CliError> {
        let b: Bundle = serde_json::from_str(text).map_err(|e| CliError::Invalid(format!("bundle: {e}")))?;
        b.check()?;
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes")
    }

    /// Every reference resolves and every object validates.
    pub fn check(&self) -> Result<(), CliError> {
        for name in self.complexes.keys() {
            self.complex(name)?;
        }
        for name in self.maps.keys() {
            self.chain_map(name)?;
        }
        for name in self.roofs.keys() {
            self.roof(name)?;
        }
        for name in self.structures.keys() {
            self.structure(name)?;
        }
        for name in self.triangles.keys() {
            self.triangle(name)?;
        }
        Ok(())
    }

    pub fn complex(&self, name: &str) -> Result<HermComplex, CliError> {
        let c = self.complexes.get(name).ok_or_else(|| missing("complex", name))?;
        c.clone().validated().map_err(|e| CliError::Invalid(format!("complex '{name}': {e}")))
    }

    pub fn chain_map(&self, name: &str) -> Result<ChainMap, CliError> {
        let d = self.maps.get(name).ok_or_else(|| missing("map", name))?;
        let (s, t) = (self.complex(&d.source)?, self.complex(&d.target)?);
        let f = chain_map_from_raw(s, t, &d.maps).map_err(|e| CliError::Invalid(format!("map '{name}': {e}")))?;
        if !f.is_chain_map(&hermcone::Tolerances::default()) {
            return Err(CliError::Invalid(format!("map '{name}' is not a chain map ({:e})", f.chain_residual())));
        }
        Ok(f)
    }

    pub fn roof(&self, name: &str) -> Result<Roof, CliError> {
        let d = self.roofs.get(name).ok_or_else(|| missing("roof", name))?;
        Roof::new(self.chain_map(&d.s)?, self.chain_map(&d.g)?).map_err(|e| CliError::from_lib(e, &format!("roof '{name}'")))
    }

    pub fn structure(&self, name: &str) -> Result<HermStructure, CliError> {
        let d = self.structures.get(name).ok_or_else(|| missing("structure", name))?;
        HermStructure::new(self.complex(&d.underlying)?, self.complex(&d.metric)?, self.roof(&d.roof)?)
            .map_err(|e| CliError::from_lib(e, &format!("structure '{name}'")))
    }

    pub fn triangle(&self, name: &str) -> Result<HermTriangle, CliError> {
        let d = self.triangles.get(name).ok_or_else(|| missing("triangle", name))?;
        HermTriangle::new(
            self.structure(&d.a)?,
            self.structure(&d.b)?,
            self.structure(&d.c)?,
            self.roof(&d.u)?,
            self.roof(&d.v)?,
            self.roof(&d.w)?,
        )
        .map_err(|e| CliError::from_lib(e, &format!("triangle '{name}'")))
    }

    // ---------- writers ----------

    /// Stores `c` under `name` unless an equal complex is already there.
    pub fn put_complex(&mut self, name: &str, c: &HermComplex) -> String {
        if let Some((k, _)) = self.complexes.iter().find(|(_, v)| *v == c) {
            return k.clone();
        }
        self.complexes.insert(name.to_string(), c.clone());
        name.to_string()
    }

    pub fn put_map(&mut self, name: &str, f: &ChainMap) -> String {
        let source = self.put_complex(&format!("{name}.source"), f.source());
        let target = self.put_complex(&format!("{name}.target"), f.target());
        let maps = f.maps().iter().map(|(&i, m)| (i, hermcone::hermlin::json::mat_to_json(m))).collect();
        self.maps.insert(name.to_string(), MapDoc { source, target, maps });
        name.to_string()
    }

    pub fn put_roof(&mut self, name: &str, r: &Roof) -> String {
        let s = self.put_map(&format!("{name}.s"), r.s());
        let g = self.put_map(&format!("{name}.g"), r.g());
        self.roofs.insert(name.to_string(), RoofDoc { s, g });
        name.to_string()
    }

    pub fn put_structure(&mut self, name: &str, h: &HermStructure) -> String {
        let underlying = self.put_complex(&format!("{name}.underlying"), h.underlying());
        let metric = self.put_complex(&format!("{name}.metric"), h.metric());
        let roof = self.put_roof(&format!("{name}.roof"), h.roof());
        self.structures.insert(name.to_string(), StructureDoc { underlying, metric, roof });
        name.to_string()
    }

    pub fn put_triangle(&mut self, name: &str, t: &HermTriangle) -> String {
        let doc = TriangleDoc {
            a: self.put_structure(&format!("{name}.a"), &t.a),
            b: self.put_structure(&format!("{name}.b"), &t.b),
            c: self.put_structure(&format!("{name}.c"), &t.c),
            u: self.put_roof(&format!("{name}.u"), &t.u),
            v: self.put_roof(&format!("{name}.v"), &t.v),
            w: self.put_roof(&format!("{name}.w"), &t.w),
        };
        self.triangles.insert(name.to_string(), doc);
        name.to_string()
    }
}

/// Structure written as a quasi-isomorphism `metric → underlying`.
pub fn structure_as_map(h: &HermStructure) -> Result<ChainMap, CliError> {
    structure_map(h).map_err(|e| CliError::from_lib(e, "structure"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hermcone::gen::{random_complex, random_structure, rng};

    #[test]
    fn structure_round_trip_is_bit_exact() {
        let mut r = rng(5);
        let u = random_complex(&mut r, 2, 3);
        let h = random_structure(&mut r, &u);
        let mut b = Bundle::default();
        b.put_structure("h", &h);
        let text = b.to_json();
        let back = Bundle::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        let h2 = back.structure("h").unwrap();
        assert_eq!(h2.metric(), h.metric());
        assert_eq!(h2.roof().g().maps(), h.roof().g().maps());
    }

    #[test]
    fn dangling_reference_is_invalid() {
        let text = r#"{"roofs": {"r": {"s": "nope", "g": "nope"}}}"#;
        assert!(matches!(Bundle::from_json(text), Err(CliError::Invalid(_))));
        assert!(matches!(Bundle::from_json(r#"{"extra": 1}"#), Err(CliError::Invalid(_))));
    }

    #[test]
    fn shared_complexes_are_stored_once() {
        let e = HermComplex::ea(0.5);
        let mut b = Bundle::default();
        b.put_roof("id", &Roof::identity(&e));
        assert_eq!(b.complexes.len(), 1);
    }
}
