//! Longest-match lookup of single- and multiword gold forms.
//!
//! cargo run --example match_targets

use gramdisp::targets::MatchField;
use gramdisp::{AnnotatedToken, Degree, GoldItem, GoldSet, MatchConfig, Sentence, TargetLexicon};

fn sentence(text: &str) -> Sentence {
    Sentence {
        tokens: text
            .split(' ')
            .map(|t| {
                let mut f = t.split('/');
                let surface = f.next().unwrap().to_owned();
                let lemma = f.next().unwrap().to_owned();
                let pos = f.next().unwrap().to_owned();
                AnnotatedToken { surface, lemma, pos }
            })
            .collect(),
    }
}

fn show(lexicon: &TargetLexicon, s: &Sentence) {
    let words: Vec<&str> = s.tokens.iter().map(|t| t.surface.as_str()).collect();
    println!("{}", words.join(" "));
    for m in lexicon.match_targets(s) {
        println!("  {:<12} tokens {}..={}", lexicon.id(m.item), m.start, m.end);
    }
}

fn main() {
    let d = |n| Degree::new(n).unwrap();
    let gold = GoldSet::new(vec![
        GoldItem::new("im", d(4)),
        GoldItem::new("im Laufe", d(1)),
        GoldItem::new("im Laufe von", d(1)),
        GoldItem::new("wegen", d(3)),
    ])
    .unwrap();

    let s = sentence("Im/in/APPRART Laufe/Lauf/NN von/von/APPR Jahren/Jahr/NN blieb/bleiben/VVFIN er/er/PPER wegen/wegen/APPR des/die/ART Regens/Regen/NN im/in/APPRART Haus/Haus/NN");
    println!("longest match, surface, case-folded:");
    show(&TargetLexicon::compile(&gold, MatchConfig::default()), &s);

    println!("\nshortest match:");
    let shortest = MatchConfig {
        longest_match: false,
        ..MatchConfig::default()
    };
    show(&TargetLexicon::compile(&gold, shortest), &s);

    println!("\ncase-sensitive (\"Im\" no longer matches \"im\"):");
    let exact = MatchConfig {
        case_fold: false,
        ..MatchConfig::default()
    };
    show(&TargetLexicon::compile(&gold, exact), &s);

    println!("\nmatching lemmas, APPR/APPRART only:");
    let lemma_gold = GoldSet::new(vec![GoldItem::new("in", d(4)), GoldItem::new("wegen", d(3))]).unwrap();
    let by_lemma = MatchConfig {
        field: MatchField::Lemma,
        allowed_pos: Some(["APPR", "APPRART"].iter().map(|s| s.to_string()).collect()),
        ..MatchConfig::default()
    };
    show(&TargetLexicon::compile(&lemma_gold, by_lemma), &s);
}
