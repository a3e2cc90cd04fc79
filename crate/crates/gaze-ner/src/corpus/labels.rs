//! IOB label set, validation, and repair.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Entity classes annotated in the corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityClass {
    Person,
    Organization,
    Location,
}

impl EntityClass {
    pub const ALL: [EntityClass; 3] = [
        EntityClass::Person,
        EntityClass::Organization,
        EntityClass::Location,
    ];

    /// Short form used in token files (`PER`, `ORG`, `LOC`).
    pub fn abbrev(self) -> &'static str {
        match self {
            EntityClass::Person => "PER",
            EntityClass::Organization => "ORG",
            EntityClass::Location => "LOC",
        }
    }

    fn parse(s: &str) -> Option<EntityClass> {
        match s {
            "PER" | "PERSON" => Some(EntityClass::Person),
            "ORG" | "ORGANIZATION" => Some(EntityClass::Organization),
            "LOC" | "LOCATION" => Some(EntityClass::Location),
            _ => None,
        }
    }
}

impl fmt::Display for EntityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

/// One tag of the closed 7-tag IOB set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    Outside,
    Begin(EntityClass),
    Inside(EntityClass),
}

/// Canonical label order; also the index space of the CRF output layer.
pub const LABELS: [Label; 7] = [
    Label::Outside,
    Label::Begin(EntityClass::Person),
    Label::Inside(EntityClass::Person),
    Label::Begin(EntityClass::Organization),
    Label::Inside(EntityClass::Organization),
    Label::Begin(EntityClass::Location),
    Label::Inside(EntityClass::Location),
];

impl Label {
    /// Parses `O`, `B-X`, `I-X` with X one of PER/ORG/LOC or the long forms.
    pub fn parse(s: &str) -> Option<Label> {
        if s == "O" {
            return Some(Label::Outside);
        }
        let (prefix, class) = s.split_once('-')?;
        let class = EntityClass::parse(class)?;
        match prefix {
            "B" => Some(Label::Begin(class)),
            "I" => Some(Label::Inside(class)),
            _ => None,
        }
    }

    /// Index into [`LABELS`].
    pub fn index(self) -> usize {
        LABELS.iter().position(|l| *l == self).expect("closed set")
    }

    pub fn from_index(i: usize) -> Option<Label> {
        LABELS.get(i).copied()
    }

    pub fn class(self) -> Option<EntityClass> {
        match self {
            Label::Outside => None,
            Label::Begin(c) | Label::Inside(c) => Some(c),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Outside => f.write_str("O"),
            Label::Begin(c) => write!(f, "B-{}", c.abbrev()),
            Label::Inside(c) => write!(f, "I-{}", c.abbrev()),
        }
    }
}

pub(crate) fn parse_label(s: &str, line: usize) -> Result<Label, CorpusError> {
    Label::parse(s).ok_or_else(|| CorpusError::UnknownLabel {
        line,
        label: s.to_string(),
    })
}

/// True when no `I-X` follows start-of-sentence, `O`, or a tag of a different class.
pub fn is_iob_well_formed(labels: &[Label]) -> bool {
    let mut prev: Option<Label> = None;
    for &label in labels {
        if let Label::Inside(class) = label {
            match prev {
                Some(Label::Begin(p)) | Some(Label::Inside(p)) if p == class => {}
                _ => return false,
            }
        }
        prev = Some(label);
    }
    true
}

/// Converts stray `I-X` tags to `B-X` in place and returns the number of repairs.
pub fn repair_iob(labels: &mut [Label]) -> usize {
    let mut repairs = 0;
    for i in 0..labels.len() {
        if let Label::Inside(class) = labels[i] {
            let continues = i > 0
                && match labels[i - 1] {
                    Label::Begin(p) | Label::Inside(p) => p == class,
                    Label::Outside => false,
                };
            if !continues {
                labels[i] = Label::Begin(class);
                repairs += 1;
            }
        }
    }
    repairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_round_trip() {
        for label in LABELS {
            assert_eq!(Label::parse(&label.to_string()), Some(label));
        }
    }

    #[test]
    fn long_forms_accepted() {
        assert_eq!(
            Label::parse("B-PERSON"),
            Some(Label::Begin(EntityClass::Person))
        );
        assert_eq!(
            Label::parse("I-ORGANIZATION"),
            Some(Label::Inside(EntityClass::Organization))
        );
        assert_eq!(Label::parse("B-LOCATION"), Some(Label::Begin(EntityClass::Location)));
    }

    #[test]
    fn rejects_unknown() {
        assert_eq!(Label::parse("B-MISC"), None);
        assert_eq!(Label::parse("X"), None);
        assert_eq!(Label::parse(""), None);
    }

    #[test]
    fn indices_match_canonical_order() {
        for (i, label) in LABELS.iter().enumerate() {
            assert_eq!(label.index(), i);
            assert_eq!(Label::from_index(i), Some(*label));
        }
    }

    #[test]
    fn stray_inside_after_outside_repaired() {
        let mut labels = vec![Label::Outside, Label::Inside(EntityClass::Location)];
        let repairs = repair_iob(&mut labels);
        assert_eq!(repairs, 1);
        assert_eq!(labels[1], Label::Begin(EntityClass::Location));
        assert!(is_iob_well_formed(&labels));
    }

    #[test]
    fn class_switch_repaired() {
        let mut labels = vec![
            Label::Begin(EntityClass::Person),
            Label::Inside(EntityClass::Organization),
        ];
        assert!(!is_iob_well_formed(&labels));
        assert_eq!(repair_iob(&mut labels), 1);
        assert!(is_iob_well_formed(&labels));
    }

    #[test]
    fn valid_sequences_untouched() {
        let mut labels = vec![
            Label::Begin(EntityClass::Person),
            Label::Inside(EntityClass::Person),
            Label::Outside,
            Label::Begin(EntityClass::Person),
        ];
        assert_eq!(repair_iob(&mut labels), 0);
    }

    #[test]
    fn leading_inside_repaired() {
        let mut labels = vec![Label::Inside(EntityClass::Person)];
        assert_eq!(repair_iob(&mut labels), 1);
        assert_eq!(labels[0], Label::Begin(EntityClass::Person));
    }
}
