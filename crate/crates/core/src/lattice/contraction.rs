use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{
    arithmetic_genus, artin_test, classify_null_curve, ArithmeticGenus, ArtinOutcome, CurveConfig,
    CurveKind, DivisorClass, IntersectionForm, LatticeError,
};
use crate::scalar::Scalar;

/// Indices of curves with `⟨alpha, C_i⟩ = 0`, computed exactly.
pub fn null_locus<S: Scalar>(alpha: &DivisorClass<S>, curves: &CurveConfig) -> Vec<usize> {
    curves
        .classes()
        .iter()
        .enumerate()
        .filter(|(_, c)| curves.form().pair(alpha, &c.cast::<S>()).is_zero())
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContractionVerdict {
    ContractibleWithRationalSingularities,
    ContractibleOnly,
    NotContractible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    /// Curve indices into the input configuration, ascending.
    pub curves: Vec<usize>,
    pub gram: Vec<Vec<i64>>,
    pub negative_definite: bool,
    pub kinds: Vec<CurveKind>,
    pub genera: Vec<ArithmeticGenus>,
    pub artin: Option<ArtinOutcome>,
    pub verdict: ContractionVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionReport {
    pub alpha_square: String,
    pub r_max: u32,
    pub null_curves: Vec<usize>,
    pub components: Vec<ComponentReport>,
}

/// Null locus of a nef and big class, grouped into connected components of the
/// dual graph (edges where the intersection number is nonzero), with a
/// contractibility verdict per component.
pub fn contraction_report<S: Scalar>(
    alpha: &DivisorClass<S>,
    curves: &CurveConfig,
    r_max: u32,
) -> Result<ContractionReport, LatticeError> {
    let form = curves.form();
    form.check_class(alpha)?;
    let a2 = form.square(alpha);
    if a2.sign() != Ordering::Greater {
        return Err(LatticeError::NotBig(a2.to_string()));
    }
    for (i, c) in curves.classes().iter().enumerate() {
        let p = form.pair(alpha, &c.cast::<S>());
        if p.sign() == Ordering::Less {
            return Err(LatticeError::NotNef { curve: i, pairing: p.to_string() });
        }
    }

    let null = null_locus(alpha, curves);
    let gram = curves.gram();

    // union-find over the null curves
    let mut parent: Vec<usize> = (0..null.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..null.len() {
        for b in (a + 1)..null.len() {
            if gram[null[a]][null[b]] != 0 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; null.len()];
    for a in 0..null.len() {
        let r = find(&mut parent, a);
        match root_slot[r] {
            Some(g) => groups[g].push(null[a]),
            None => {
                root_slot[r] = Some(groups.len());
                groups.push(vec![null[a]]);
            }
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);

    let mut components = Vec::with_capacity(groups.len());
    for idx in groups {
        let sub = curves.subconfig(&idx);
        let negative_definite = sub.induced_form().is_negative_definite();
        let kinds = idx.iter().map(|&i| classify_null_curve(gram[i][i], curves.k_dot()[i])).collect();
        let genera = idx.iter().map(|&i| arithmetic_genus(gram[i][i], curves.k_dot()[i])).collect();
        let (artin, verdict) = if negative_definite {
            let out = artin_test(&sub, r_max)?;
            let v = if out.pass {
                ContractionVerdict::ContractibleWithRationalSingularities
            } else {
                ContractionVerdict::ContractibleOnly
            };
            (Some(out), v)
        } else {
            (None, ContractionVerdict::NotContractible)
        };
        components.push(ComponentReport {
            curves: idx,
            gram: sub.gram().to_vec(),
            negative_definite,
            kinds,
            genera,
            artin,
            verdict,
        });
    }

    Ok(ContractionReport { alpha_square: a2.to_string(), r_max, null_curves: null, components })
}

/// JSON input for curve configurations:
/// `{"gram": [[..]], "classes": [[..]], "k_dot": [..], "alpha": [..]}`.
///
/// `classes` defaults to the standard basis of `gram`, `k_dot` to zeros (K3 case).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfigFile {
    pub gram: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_dot: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<i64>>,
}

impl CurveConfigFile {
    pub fn from_json(text: &str) -> Result<Self, LatticeError> {
        serde_json::from_str(text).map_err(|e| LatticeError::Invalid(e.to_string()))
    }

    pub fn to_config(&self) -> Result<CurveConfig, LatticeError> {
        let form = IntersectionForm::new(self.gram.clone())?;
        let classes: Vec<DivisorClass<i64>> = match &self.classes {
            Some(cs) => cs.iter().map(|c| DivisorClass::from_ints(c)).collect(),
            None => (0..form.rank()).map(|i| DivisorClass::basis(form.rank(), i)).collect(),
        };
        let k_dot = self.k_dot.clone().unwrap_or_else(|| vec![0; classes.len()]);
        CurveConfig::new(form, classes, k_dot)
    }

    pub fn alpha(&self) -> Result<DivisorClass<i64>, LatticeError> {
        self.alpha
            .as_ref()
            .map(|a| DivisorClass::from_ints(a))
            .ok_or_else(|| LatticeError::Invalid("missing \"alpha\" class".into()))
    }
}
