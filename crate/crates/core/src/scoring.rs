//! Goal-relevance scoring for frontiers: set-of-marks label assignment,
//! prompt construction and reply parsing for a remote VLM, plus the oracle
//! and constant scorers used for offline benchmarking.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::frontier::FrontierProposal;
use crate::grid::Cell;
use crate::num;
use crate::planner;
use crate::sim::Observation;
use crate::world::WorldSpec;

/// Scorer contract. Implementations must return probabilities in [0, 1];
/// the caller substitutes 0.5 for any frontier a scorer leaves out.
pub trait SemanticScorer {
    fn score_frontiers(
        &mut self,
        obs: &Observation,
        proposals: &[FrontierProposal],
        marks: &MarkedFrontierSet,
        goal: &str,
    ) -> BTreeMap<char, f64>;

    fn verify_presence(&mut self, obs: &Observation, goal: &str) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mark {
    pub label: char,
    pub frontier_idx: usize,
    pub pixel: (f64, f64),
}

/// Frontiers visible in the current observation, labeled A.. in ascending
/// pixel-column order. At most 26 entries; excess frontiers are dropped by
/// lowest raw gain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkedFrontierSet {
    pub marks: Vec<Mark>,
}

pub fn assign_labels(proposals: &[FrontierProposal]) -> MarkedFrontierSet {
    let mut visible: Vec<(usize, (f64, f64), f64)> = proposals
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.pixel_centroid.map(|px| (i, px, p.gain_raw)))
        .collect();
    if visible.len() > 26 {
        // keep the 26 highest-gain frontiers
        visible.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)));
        visible.truncate(26);
    }
    visible.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)));
    let marks = visible
        .into_iter()
        .enumerate()
        .map(|(i, (idx, px, _))| Mark {
            label: (b'A' + i as u8) as char,
            frontier_idx: idx,
            pixel: px,
        })
        .collect();
    MarkedFrontierSet { marks }
}

pub const FRONTIER_PROMPT_TEMPLATE: &str = "\
Assume the labeled frontiers {labels} represent possible places to go.
Each frontier is a detected boundary between explored and unexplored space.

Estimate the probability that each frontier leads to (or is already around) a
{target_object} when moving towards it and continuing exploration.
Unseen labels should have a probability of 0.5.

Consider long-term navigation potential, not only immediate visibility.
Some frontiers may lead to larger unexplored regions.
Use the local neighborhood context around each frontier.

Return only a JSON list with one dictionary.
Each key is a frontier label; each value is a list:
(1) a probability in [0,1], and
(2) a short explanation.

Format:
{{\"A\": [0.3, \"reason\"], \"B\": [0.2, \"reason\"], ...}}";

pub const PRESENCE_PROMPT_TEMPLATE: &str = "\
Based on this image, estimate the probability that a
{target_object} is in the camera field of view,
within five meters, and reachable.

If the object is reflected in a mirror, behind glass,
barely visible, heavily occluded, or unreachable,
it should be considered absent.

Probabilities should be close to 0 (absent) or 1 (present).
Add one sentence of reasoning.

Return a JSON list with one dictionary.

Format:
{{\"probability\": 0.9, \"reason\": \"reason\"}}";

pub fn build_frontier_prompt(labels: &[char], goal: &str) -> String {
    let mut joined = String::new();
    for (i, l) in labels.iter().enumerate() {
        if i > 0 {
            joined.push_str(", ");
        }
        joined.push(*l);
    }
    FRONTIER_PROMPT_TEMPLATE
        .replace("{labels}", &joined)
        .replace("{target_object}", goal)
}

pub fn build_presence_prompt(goal: &str) -> String {
    PRESENCE_PROMPT_TEMPLATE.replace("{target_object}", goal)
}

/// Returns the first parseable JSON object embedded anywhere in `text`
/// (markdown fences and surrounding prose are tolerated).
fn extract_first_json_object(text: &str) -> Option<Value> {
    let bytes = text.as_bytes();
    for (start, &b) in bytes.iter().enumerate() {
        if b != b'{' {
            continue;
        }
        // find the matching close brace, skipping string literals
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escape = false;
        for (off, &c) in bytes[start..].iter().enumerate() {
            if in_str {
                if escape {
                    escape = false;
                } else if c == b'\\' {
                    escape = true;
                } else if c == b'"' {
                    in_str = false;
                }
                continue;
            }
            match c {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        let candidate = &text[start..start + off + 1];
                        if let Ok(v @ Value::Object(_)) = serde_json::from_str(candidate) {
                            return Some(v);
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn value_to_prob_reason(v: &Value) -> Option<(f64, String)> {
    match v {
        Value::Array(items) => {
            let p = items.first()?.as_f64()?;
            let reason = items
                .get(1)
                .and_then(|r| r.as_str())
                .unwrap_or("")
                .to_string();
            Some((p, reason))
        }
        Value::Number(n) => Some((n.as_f64()?, String::new())),
        _ => None,
    }
}

/// Parses a set-of-marks reply. Probabilities are clamped to [0, 1]; labels
/// absent from the reply default to 0.5.
pub fn parse_frontier_response(
    text: &str,
    labels: &[char],
) -> Result<BTreeMap<char, (f64, String)>> {
    let obj = extract_first_json_object(text)
        .ok_or_else(|| Error::Parse("no JSON object in reply".into()))?;
    let map = obj.as_object().expect("extract returns objects only");
    let mut out = BTreeMap::new();
    for &label in labels {
        let entry = map
            .get(&label.to_string())
            .and_then(value_to_prob_reason)
            .map(|(p, r)| (num::clamp(p, 0.0, 1.0), r));
        out.insert(label, entry.unwrap_or((0.5, "default".to_string())));
    }
    Ok(out)
}

/// Parses a presence-verification reply; anything unparseable is treated as
/// "absent" (0.0) since presence gates irreversible target commitment.
pub fn parse_presence_response(text: &str) -> f64 {
    extract_first_json_object(text)
        .and_then(|obj| obj.get("probability").and_then(Value::as_f64))
        .map(|p| num::clamp(p, 0.0, 1.0))
        .unwrap_or(0.0)
}

const ORACLE_P_FLOOR: f64 = 0.05;
const ORACLE_P_CEIL: f64 = 0.95;

fn matching_ids(world: &WorldSpec, goal: &str) -> Vec<u32> {
    world
        .objects
        .iter()
        .filter(|o| o.label == goal)
        .map(|o| o.id)
        .collect()
}

fn ground_truth_presence(obs: &Observation, ids: &[u32]) -> f64 {
    let seen = obs
        .instance_ids
        .iter()
        .flatten()
        .any(|id| ids.contains(id));
    if seen {
        ORACLE_P_CEIL
    } else {
        ORACLE_P_FLOOR
    }
}

/// Ground-truth scorer: frontier relevance decays exponentially with the
/// full-map geodesic distance to the nearest matching instance, so nearby
/// frontiers dominate distant ones instead of differing by a few percent.
pub struct OracleScorer {
    ids: Vec<u32>,
    dims: crate::grid::GridDims,
    field: Vec<f64>,
}

/// Decay length in meters for the oracle's distance-to-goal mapping.
const ORACLE_DECAY: f64 = 5.0;

impl OracleScorer {
    pub fn new(world: &WorldSpec, goal: &str) -> Result<Self> {
        let ids = matching_ids(world, goal);
        if ids.is_empty() {
            return Err(Error::Config(alloc::format!(
                "no instance of '{goal}' in world"
            )));
        }
        let mut sources: Vec<Cell> = Vec::new();
        for obj in world.objects.iter().filter(|o| ids.contains(&o.id)) {
            for &c in &obj.cells {
                for dz in -1isize..=1 {
                    for dx in -1isize..=1 {
                        let (nx, nz) = (c.x as isize + dx, c.z as isize + dz);
                        if nx < 0 || nz < 0 {
                            continue;
                        }
                        let n = Cell::new(nx as usize, nz as usize);
                        if world.dims.contains(n) && world.is_free(n) && !sources.contains(&n) {
                            sources.push(n);
                        }
                    }
                }
            }
        }
        let field = planner::geodesic_field(world, &sources);
        Ok(OracleScorer {
            ids,
            dims: world.dims,
            field,
        })
    }

    pub fn score_point(&self, p: crate::geom::Vec3) -> f64 {
        let d = self
            .dims
            .world_to_cell(p)
            .map(|c| self.field[self.dims.index(c)])
            .unwrap_or(f64::INFINITY);
        if d.is_finite() {
            num::clamp(num::exp(-d / ORACLE_DECAY), ORACLE_P_FLOOR, ORACLE_P_CEIL)
        } else {
            ORACLE_P_FLOOR
        }
    }
}

impl SemanticScorer for OracleScorer {
    fn score_frontiers(
        &mut self,
        _obs: &Observation,
        proposals: &[FrontierProposal],
        marks: &MarkedFrontierSet,
        _goal: &str,
    ) -> BTreeMap<char, f64> {
        marks
            .marks
            .iter()
            .map(|m| (m.label, self.score_point(proposals[m.frontier_idx].centroid)))
            .collect()
    }

    fn verify_presence(&mut self, obs: &Observation, _goal: &str) -> f64 {
        ground_truth_presence(obs, &self.ids)
    }
}

/// Pure-exploration baseline: every frontier scores 0.5 (the unseen-label
/// default), so selection reduces to gain over distance. Presence
/// verification still uses ground truth so episodes can terminate.
pub struct ConstantScorer {
    ids: Vec<u32>,
}

impl ConstantScorer {
    pub fn new(world: &WorldSpec, goal: &str) -> Self {
        ConstantScorer { ids: matching_ids(world, goal) }
    }
}

impl SemanticScorer for ConstantScorer {
    fn score_frontiers(
        &mut self,
        _obs: &Observation,
        _proposals: &[FrontierProposal],
        marks: &MarkedFrontierSet,
        _goal: &str,
    ) -> BTreeMap<char, f64> {
        marks.marks.iter().map(|m| (m.label, 0.5)).collect()
    }

    fn verify_presence(&mut self, obs: &Observation, _goal: &str) -> f64 {
        ground_truth_presence(obs, &self.ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    fn proposal(gain: f64, pixel: Option<(f64, f64)>) -> FrontierProposal {
        FrontierProposal {
            centroid: Vec3::ZERO,
            cells: Vec::new(),
            gain_raw: gain,
            pixel_centroid: pixel,
            observed_at_step: 0,
        }
    }

    #[test]
    fn labels_follow_pixel_column_order() {
        let props = vec![
            proposal(0.3, Some((90.0, 40.0))),
            proposal(0.9, None),
            proposal(0.1, Some((12.0, 40.0))),
            proposal(0.5, Some((55.0, 40.0))),
        ];
        let set = assign_labels(&props);
        let order: Vec<(char, usize)> =
            set.marks.iter().map(|m| (m.label, m.frontier_idx)).collect();
        assert_eq!(order, vec![('A', 2), ('B', 3), ('C', 0)]);
    }

    #[test]
    fn overflow_drops_lowest_gain() {
        let props: Vec<_> = (0..30)
            .map(|i| proposal(i as f64, Some((i as f64, 0.0))))
            .collect();
        let set = assign_labels(&props);
        assert_eq!(set.marks.len(), 26);
        // the four lowest-gain frontiers (indices 0..4) are gone
        assert!(set.marks.iter().all(|m| m.frontier_idx >= 4));
        assert_eq!(set.marks[0].label, 'A');
        assert_eq!(set.marks[25].label, 'Z');
    }

    #[test]
    fn frontier_prompt_matches_golden() {
        let got = build_frontier_prompt(&['A', 'B'], "bed");
        assert_eq!(got, include_str!("../testdata/frontier_prompt_ab_bed.txt"));
    }

    #[test]
    fn presence_prompt_matches_golden() {
        let got = build_presence_prompt("sofa");
        assert_eq!(got, include_str!("../testdata/presence_prompt_sofa.txt"));
    }

    #[test]
    fn prompt_keeps_literal_format_braces() {
        let p = build_frontier_prompt(&['A'], "chair");
        assert!(p.contains("{{\"A\": [0.3, \"reason\"]"));
        assert!(!p.contains("{labels}"));
        assert!(!p.contains("{target_object}"));
    }

    #[test]
    fn parse_plain_reply() {
        let out = parse_frontier_response(
            r#"{"A": [0.3, "hall"], "B": [0.8, "doorway"]}"#,
            &['A', 'B'],
        )
        .unwrap();
        assert_eq!(out[&'A'], (0.3, "hall".to_string()));
        assert_eq!(out[&'B'], (0.8, "doorway".to_string()));
    }

    #[test]
    fn parse_fenced_reply_with_prose() {
        let text = "Sure, here you go:\n```json\n{\"A\": [0.9, \"likely\"]}\n```\nDone.";
        let out = parse_frontier_response(text, &['A']).unwrap();
        assert_eq!(out[&'A'], (0.9, "likely".to_string()));
    }

    #[test]
    fn parse_retries_past_unparseable_braces() {
        // leading {{ from a model echoing the format line
        let text = "{{\"A\": [0.4, \"x\"]}}";
        let out = parse_frontier_response(text, &['A']).unwrap();
        assert_eq!(out[&'A'].0, 0.4);
    }

    #[test]
    fn parse_missing_label_defaults() {
        let out = parse_frontier_response(r#"{"A": [0.2, "r"]}"#, &['A', 'B']).unwrap();
        assert_eq!(out[&'B'], (0.5, "default".to_string()));
    }

    #[test]
    fn parse_clamps_out_of_range() {
        let out =
            parse_frontier_response(r#"{"A": [1.7, "r"], "B": [-3.0, "r"]}"#, &['A', 'B']).unwrap();
        assert_eq!(out[&'A'].0, 1.0);
        assert_eq!(out[&'B'].0, 0.0);
    }

    #[test]
    fn parse_bare_number_value() {
        let out = parse_frontier_response(r#"{"A": 0.65}"#, &['A']).unwrap();
        assert_eq!(out[&'A'].0, 0.65);
    }

    #[test]
    fn parse_no_json_is_error() {
        assert!(parse_frontier_response("I cannot help with that.", &['A']).is_err());
    }

    #[test]
    fn presence_parse_cases() {
        assert_eq!(
            parse_presence_response(r#"{"probability": 0.9, "reason": "visible"}"#),
            0.9
        );
        assert_eq!(parse_presence_response(r#"{"probability": 2.5}"#), 1.0);
        assert_eq!(parse_presence_response("no json here"), 0.0);
        assert_eq!(parse_presence_response(r#"{"reason": "hmm"}"#), 0.0);
    }

    #[test]
    fn json_extraction_skips_braces_inside_strings() {
        let text = r#"note: "{ not json }" then {"probability": 0.25}"#;
        assert_eq!(parse_presence_response(text), 0.25);
    }
}
