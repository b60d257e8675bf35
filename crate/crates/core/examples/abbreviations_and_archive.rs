//! Abbreviation expansion and the recent-message archive, persisted to a
//! temporary directory.

use easyvoice::textaccel::{load_abbreviations, MessageArchive, DEFAULT_ABBREVIATIONS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut table = load_abbreviations(DEFAULT_ABBREVIATIONS.as_bytes())?;
    table.define("omw", "on my way")?;

    for text in ["btw omw", "BTW, I'm omw.", "omwx stays as is"] {
        println!("{text:?} -> {:?}", table.expand(text));
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("archive.json");

    let mut archive = MessageArchive::with_capacity(3)?;
    for msg in ["hello", "yes please", "thank you", "hello", "no thanks"] {
        archive.add(msg)?;
    }
    archive.save(&path)?;
    println!("archive (newest first): {:?}", archive.messages());

    let mut reloaded = MessageArchive::load(&path, 3)?;
    let picked = reloaded.pick(2)?;
    println!("picked {picked:?}; now {:?}", reloaded.messages());
    Ok(())
}
