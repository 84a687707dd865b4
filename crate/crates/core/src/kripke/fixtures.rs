//! The three models shipped with the workbench, loaded from the JSON
//! files under `fixtures/` so the on-disk copies and the library agree.

use super::KripkeModel;

/// A two-world chain over {P/1}: singleton domains, `P` becomes true at
/// the top.
pub fn fix_chain() -> KripkeModel {
    KripkeModel::from_json(include_str!("../../fixtures/fix_chain.json"))
        .expect("fix_chain fixture loads")
}

/// A two-world chain over {P/1, Q/1; c} whose top domain gains an element
/// outside the hom's range; the constant-domain axiom fails at `w`.
pub fn fix_cd() -> KripkeModel {
    KripkeModel::from_json(include_str!("../../fixtures/fix_cd.json"))
        .expect("fix_cd fixture loads")
}

/// A two-world chain in the language of pure equality whose hom merges
/// the two bottom elements into one.
pub fn fix_eq() -> KripkeModel {
    KripkeModel::from_json(include_str!("../../fixtures/fix_eq.json"))
        .expect("fix_eq fixture loads")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        for m in [fix_chain(), fix_cd(), fix_eq()] {
            assert!(m.validate().is_empty());
        }
    }

    #[test]
    fn fixture_classes() {
        let chain = fix_chain().classify().unwrap();
        assert!(chain.in_class && chain.su_class && chain.bi_class);
        let cd = fix_cd().classify().unwrap();
        assert!(cd.in_class && !cd.su_class && !cd.bi_class);
        let eq = fix_eq().classify().unwrap();
        assert!(!eq.in_class && eq.su_class && !eq.bi_class);
    }
}
