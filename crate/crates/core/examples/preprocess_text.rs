//! Tokenization with the bundled stopword list and lemma table, and with
//! custom resources.
//!
//! ```text
//! cargo run --example preprocess_text -- "The plants were absorbing sunlight."
//! ```

use hoprank::textpipe::{preprocess, PreprocessConfig};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Melting ice cubes were absorbing heat from the warmer water.".into());
    let shipped = PreprocessConfig::shipped();
    println!("input:    {text}");
    println!("shipped:  {:?}", preprocess(&text, &shipped).tokens());

    // no stopwords, identity lemmas
    println!(
        "bare:     {:?}",
        preprocess(&text, &PreprocessConfig::default()).tokens()
    );

    let custom = PreprocessConfig {
        strip_punctuation: false,
        ..shipped
    };
    println!("no strip: {:?}", preprocess(&text, &custom).tokens());
}
