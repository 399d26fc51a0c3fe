use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BitMatrix, SigmaStructure};
use crate::error::{Error, Result};

/// Label-based JSON form of a [`SigmaStructure`]: carriers, function graphs
/// and relation tables, all keyed by element labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDump {
    pub sigma: usize,
    pub group: Vec<String>,
    pub a: Vec<String>,
    pub i: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<Vec<String>>,
    pub pi: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<String>>,
    /// `fc[c][x]` is the label of `F_c(x)`, with `c` a group label.
    pub fc: BTreeMap<String, Vec<String>>,
    pub p: Vec<String>,
    pub dv: BTreeMap<String, Vec<String>>,
    pub e_prime: Vec<(String, String)>,
    pub e: Vec<(String, String)>,
    pub r: Vec<(String, String)>,
}

impl StructureDump {
    pub fn from_structure(s: &SigmaStructure) -> Self {
        let g = s.group_size();
        let pairs = |m: &BitMatrix| {
            m.pairs()
                .into_iter()
                .map(|(x, y)| (s.a[x].clone(), s.a[y].clone()))
                .collect()
        };
        StructureDump {
            sigma: s.sigma,
            group: s.group_labels.clone(),
            a: s.a.clone(),
            i: s.i.clone(),
            j: s.j.clone(),
            pi: s.pi.iter().map(|&k| s.i[k].clone()).collect(),
            q: s.q.as_ref().map(|q| {
                let j = s.j.as_ref().expect("Q implies J");
                q.iter().map(|&k| j[k].clone()).collect()
            }),
            fc: (0..g)
                .map(|c| {
                    (
                        s.group_labels[c].clone(),
                        (0..s.a_len()).map(|x| s.a[s.fc(c, x)].clone()).collect(),
                    )
                })
                .collect(),
            p: (0..s.a_len())
                .filter(|&x| s.p[x])
                .map(|x| s.a[x].clone())
                .collect(),
            dv: (0..g)
                .map(|v| {
                    let holds = (0..s.a_len())
                        .filter(|&x| s.dv(v, x))
                        .map(|x| s.a[x].clone())
                        .collect();
                    (s.group_labels[v].clone(), holds)
                })
                .collect(),
            e_prime: pairs(&s.e_prime),
            e: pairs(&s.e),
            r: pairs(&s.r),
        }
    }

    pub fn to_structure(&self) -> Result<SigmaStructure> {
        let g = 1usize << self.sigma;
        let index = |labels: &[String]| -> BTreeMap<String, usize> {
            labels
                .iter()
                .enumerate()
                .map(|(k, l)| (l.clone(), k))
                .collect()
        };
        let (ai, ii, gi) = (index(&self.a), index(&self.i), index(&self.group));
        let ji = self.j.as_deref().map(index).unwrap_or_default();
        let look = |m: &BTreeMap<String, usize>, l: &str| {
            m.get(l)
                .copied()
                .ok_or_else(|| Error::UnknownElement(l.into()))
        };
        if self.group.len() != g {
            return Err(Error::Domain(format!(
                "group has {} labels, expected {g}",
                self.group.len()
            )));
        }
        let n = self.a.len();
        let mut s = SigmaStructure::empty(
            self.sigma,
            self.group.clone(),
            self.i.clone(),
            self.j.clone(),
        );
        s.a = self.a.clone();
        s.pi = self
            .pi
            .iter()
            .map(|l| look(&ii, l))
            .collect::<Result<_>>()?;
        if let Some(q) = &self.q {
            s.q = Some(q.iter().map(|l| look(&ji, l)).collect::<Result<_>>()?);
        }
        s.act = vec![usize::MAX; g * n];
        for (c, targets) in &self.fc {
            let c = look(&gi, c)?;
            for (x, t) in targets.iter().enumerate() {
                s.act[c * n + x] = look(&ai, t)?;
            }
        }
        s.p = vec![false; n];
        for l in &self.p {
            s.p[look(&ai, l)?] = true;
        }
        s.dv = BitMatrix::new(g, n);
        for (v, holds) in &self.dv {
            let v = look(&gi, v)?;
            for l in holds {
                s.dv.set(v, look(&ai, l)?, true);
            }
        }
        let rel = |pairs: &[(String, String)]| -> Result<BitMatrix> {
            let mut m = BitMatrix::square(n);
            for (x, y) in pairs {
                m.set(look(&ai, x)?, look(&ai, y)?, true);
            }
            Ok(m)
        };
        s.e_prime = rel(&self.e_prime)?;
        s.e = rel(&self.e)?;
        s.r = rel(&self.r)?;
        s.check_shape()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::testing::*;
    use crate::structures::{build_level, Side};

    #[test]
    fn dump_round_trips() {
        let l = build_level(Side::Two, 2, &s1(), true).unwrap();
        let d = StructureDump::from_structure(l.structure());
        let json = serde_json::to_string(&d).unwrap();
        let back: StructureDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_structure().unwrap(), *l.structure());
    }
}
