use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::TriState;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Participants {
    Alone,
    Friend,
    Family,
    #[default]
    Unknown,
}

/// Slots filled during the interview. A slot, once set from a classified
/// answer, is never overwritten; the setters return `false` when the slot
/// was already filled.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomerProfile {
    pub participants: Participants,
    pub brings_children: TriState,
    pub children_ages: Vec<u32>,
    pub uses_car: TriState,
    pub points_of_interest: String,
    /// sight id -> question index -> answer.
    pub loc_answers: BTreeMap<String, BTreeMap<usize, TriState>>,
}

fn set_tri(slot: &mut TriState, value: TriState) -> bool {
    if *slot != TriState::Unknown || value == TriState::Unknown {
        return false;
    }
    *slot = value;
    true
}

impl CustomerProfile {
    pub fn set_participants(&mut self, value: Participants) -> bool {
        if self.participants != Participants::Unknown || value == Participants::Unknown {
            return false;
        }
        self.participants = value;
        true
    }

    pub fn set_brings_children(&mut self, value: TriState) -> bool {
        set_tri(&mut self.brings_children, value)
    }

    /// Ages are only kept when the customer said children are coming and
    /// no ages were stored yet.
    pub fn set_children_ages(&mut self, ages: &[u32]) -> bool {
        if self.brings_children != TriState::Yes || !self.children_ages.is_empty() {
            return false;
        }
        let ages: Vec<u32> = ages.iter().copied().filter(|a| *a <= 120).collect();
        if ages.is_empty() {
            return false;
        }
        self.children_ages = ages;
        true
    }

    pub fn set_uses_car(&mut self, value: TriState) -> bool {
        set_tri(&mut self.uses_car, value)
    }

    pub fn set_points_of_interest(&mut self, text: &str) -> bool {
        if !self.points_of_interest.is_empty() || text.trim().is_empty() {
            return false;
        }
        self.points_of_interest = text.trim().to_string();
        true
    }

    pub fn set_loc_answer(&mut self, sight_id: &str, index: usize, value: TriState) -> bool {
        let answers = self.loc_answers.entry(sight_id.to_string()).or_default();
        let slot = answers.entry(index).or_default();
        set_tri(slot, value)
    }

    pub fn loc_answer(&self, sight_id: &str, index: usize) -> TriState {
        self.loc_answers
            .get(sight_id)
            .and_then(|a| a.get(&index))
            .copied()
            .unwrap_or_default()
    }

    /// Short description passed to comment generation.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        match self.participants {
            Participants::Unknown => {}
            p => parts.push(format!("traveling with: {}", participants_label(p))),
        }
        if self.brings_children == TriState::Yes {
            parts.push("bringing children".to_string());
        }
        if !self.children_ages.is_empty() {
            let ages: Vec<String> = self.children_ages.iter().map(u32::to_string).collect();
            parts.push(format!("children's ages: {}", ages.join(", ")));
        }
        match self.uses_car {
            TriState::Yes => parts.push("traveling by car".to_string()),
            TriState::No => parts.push("not using a car".to_string()),
            TriState::Unknown => {}
        }
        if parts.is_empty() {
            "nothing yet".to_string()
        } else {
            parts.join("; ")
        }
    }
}

fn participants_label(p: Participants) -> &'static str {
    match p {
        Participants::Alone => "nobody (alone)",
        Participants::Friend => "friends",
        Participants::Family => "family",
        Participants::Unknown => "unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_are_write_once() {
        let mut p = CustomerProfile::default();
        assert!(p.set_participants(Participants::Family));
        assert!(!p.set_participants(Participants::Alone));
        assert_eq!(p.participants, Participants::Family);
        assert!(!p.set_uses_car(TriState::Unknown));
        assert!(p.set_uses_car(TriState::No));
        assert!(!p.set_uses_car(TriState::Yes));
        assert!(p.set_loc_answer("a", 0, TriState::Yes));
        assert!(!p.set_loc_answer("a", 0, TriState::No));
        assert_eq!(p.loc_answer("a", 0), TriState::Yes);
        assert_eq!(p.loc_answer("a", 1), TriState::Unknown);
    }

    #[test]
    fn ages_need_children() {
        let mut p = CustomerProfile::default();
        assert!(!p.set_children_ages(&[5, 2]));
        p.set_brings_children(TriState::Yes);
        assert!(p.set_children_ages(&[5, 2, 200]));
        assert_eq!(p.children_ages, vec![5, 2]);
        assert!(!p.set_children_ages(&[9]));
        assert!(p.describe().contains("5, 2"));
    }
}
