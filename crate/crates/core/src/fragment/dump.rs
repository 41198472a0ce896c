//! JSON dump format for fragments. Serialization is deterministic: nodes,
//! components, elements and tuples are all written in sorted order.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Fragment, FragmentError};
use crate::components::ComponentState;
use crate::tree::{ComponentKey, ElemId, GammaNode, PlanFile, TreePlan};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDump {
    pub parent: GammaNode,
    pub index: u32,
    pub theory: String,
    pub next_id: ElemId,
    pub elements: Vec<ElemId>,
    pub relations: BTreeMap<String, Vec<Vec<ElemId>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentDump {
    pub plan: PlanFile,
    pub nodes: Vec<GammaNode>,
    pub components: Vec<ComponentDump>,
}

impl Fragment {
    pub fn to_dump(&self) -> FragmentDump {
        let components = self
            .components
            .iter()
            .map(|(key, st)| ComponentDump {
                parent: key.parent.clone(),
                index: key.index,
                theory: self.theory_of(key).map(|t| t.id().to_owned()).unwrap_or_default(),
                next_id: st.next_id(),
                elements: st.elements().iter().copied().collect(),
                relations: st.relations().iter().map(|(k, v)| (k.clone(), v.iter().cloned().collect())).collect(),
            })
            .collect();
        FragmentDump { plan: self.plan.to_file(), nodes: self.nodes.iter().cloned().collect(), components }
    }

    pub fn from_dump(dump: FragmentDump) -> Result<Fragment, FragmentError> {
        let plan = TreePlan::new(dump.plan.nodes).map_err(|e| FragmentError::Invalid(e.to_string()))?;
        Self::from_dump_with_plan(Arc::new(plan), dump.nodes, dump.components)
    }

    fn from_dump_with_plan(
        plan: Arc<TreePlan>,
        nodes: Vec<GammaNode>,
        comps: Vec<ComponentDump>,
    ) -> Result<Fragment, FragmentError> {
        let mut components = BTreeMap::new();
        for c in comps {
            let key = ComponentKey { parent: c.parent, index: c.index };
            let expected = plan.theory(&key.projection()).map(|t| t.id());
            if expected != Some(c.theory.as_str()) {
                return Err(FragmentError::Invalid(format!(
                    "component {} declares theory {:?}, plan has {:?}",
                    key.parent, c.theory, expected
                )));
            }
            let relations = c.relations.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
            let st = ComponentState::from_parts(c.elements.into_iter().collect(), c.next_id, relations);
            if components.insert(key.clone(), st).is_some() {
                return Err(FragmentError::Invalid(format!("duplicate component {}", key.parent)));
            }
        }
        let frag = Fragment { plan, nodes: nodes.into_iter().collect(), components };
        frag.check_invariants()?;
        Ok(frag)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("dump is always serializable")
    }

    pub fn from_json(s: &str) -> Result<Fragment, FragmentError> {
        Self::from_dump(serde_json::from_str(s)?)
    }
}
