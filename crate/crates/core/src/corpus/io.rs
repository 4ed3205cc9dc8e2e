//! CSV and JSONL corpus files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Corpus, DishRecord, Label};
use crate::error::{Error, Result};

const CSV_HEADER: [&str; 3] = ["item_name", "type", "ingredients"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses from the file extension; anything but `.jsonl`/`.json` is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(Error::InvalidInput(format!("unknown format {other:?}"))),
        }
    }
}

pub fn ingest(path: &Path, format: Format) -> Result<Corpus> {
    let file = File::open(path)?;
    let source = path.display().to_string();
    match format {
        Format::Csv => read_csv(file, &source),
        Format::Jsonl => read_jsonl(BufReader::new(file), &source),
    }
}

pub fn read_csv<R: Read>(reader: R, source: &str) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    if headers.is_empty() {
        return Err(Error::Empty(format!("{source}: empty file")));
    }
    let got: Vec<&str> = headers.iter().map(str::trim).collect();
    if got != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header item_name,type,ingredients, found {}",
                got.join(",")
            ),
        });
    }

    let mut records = Vec::new();
    for (k, row) in rdr.records().enumerate() {
        let fallback_line = k as u64 + 2;
        let row = row.map_err(|e| csv_error(e, fallback_line))?;
        let line = row.position().map_or(fallback_line, |p| p.line());
        let at = |e: Error| Error::Parse {
            line,
            message: e.to_string(),
        };
        let label = Label::parse_token(&row[1]).map_err(at)?;
        let ingredients = row[2]
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        records.push(DishRecord::new(row[0].trim(), label, ingredients).map_err(at)?);
    }
    if records.is_empty() {
        return Err(Error::Empty(format!("{source}: no data rows")));
    }
    Ok(Corpus::new(records, source))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: format!("malformed row: {e}"),
    }
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    item_name: String,
    #[serde(rename = "type", default)]
    kind: Option<String>,
    #[serde(default)]
    ingredients: Vec<String>,
}

pub fn read_jsonl<R: BufRead>(reader: R, source: &str) -> Result<Corpus> {
    let mut records = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let raw: JsonRecord = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        let label = match raw.kind.as_deref() {
            None => None,
            Some(t) => Label::parse_token(t).map_err(|e| at(e.to_string()))?,
        };
        let rec = DishRecord::new(raw.item_name.trim(), label, raw.ingredients)
            .map_err(|e| at(e.to_string()))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Empty(format!("{source}: no records")));
    }
    Ok(Corpus::new(records, source))
}

pub fn write_csv<W: Write>(corpus: &Corpus, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for r in &corpus.records {
        let label = r.label.map_or("", Label::token);
        w.write_record([r.item_name.as_str(), label, &r.ingredients.join(";")])
            .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_jsonl<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for r in &corpus.records {
        let raw = JsonRecord {
            item_name: r.item_name.clone(),
            kind: r.label.map(|l| l.token().to_string()),
            ingredients: r.ingredients.clone(),
        };
        serde_json::to_writer(&mut writer, &raw)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_corpus(corpus: &Corpus, path: &Path, format: Format) -> Result<()> {
    let file = std::io::BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(corpus, file),
        Format::Jsonl => write_jsonl(corpus, file),
    }
}

fn to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(text: &str) -> Result<Corpus> {
        read_csv(text.as_bytes(), "mem")
    }

    #[test]
    fn maps_fields() {
        let c = csv("item_name,type,ingredients\n\"Palak Paneer\",veg,\"spinach;paneer\"\n\"Mystery Bowl\",,\"\"\n").unwrap();
        assert_eq!(
            c.records[0],
            DishRecord::new(
                "Palak Paneer",
                Some(Label::Veg),
                vec!["spinach".into(), "paneer".into()]
            )
            .unwrap()
        );
        assert_eq!(
            c.records[1],
            DishRecord::new("Mystery Bowl", None, vec![]).unwrap()
        );
    }

    #[test]
    fn errors_name_the_line() {
        let err = csv("item_name,type,ingredients\nA,veg,x\nB,vegan,y\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = csv("item_name,type,ingredients\nA,veg,x\nB,veg\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = csv("item_name,type,ingredients\n  ,veg,x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(csv(""), Err(Error::Empty(_))));
        assert!(matches!(
            csv("item_name,type,ingredients\n"),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            read_jsonl("".as_bytes(), "mem"),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            csv("name,label\nA,veg\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn jsonl_reads_null_and_missing_type() {
        let text = "{\"item_name\":\"Dal Fry\",\"type\":\"veg\",\"ingredients\":[\"dal\"]}\n\n{\"item_name\":\"Prawn Curry\",\"type\":null}\n";
        let c = read_jsonl(text.as_bytes(), "mem").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.records[0].label, Some(Label::Veg));
        assert_eq!(c.records[1].label, None);
        let err = read_jsonl(
            "{\"item_name\":\"x\"}\n{\"type\":\"veg\"}\n".as_bytes(),
            "mem",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn writers_roundtrip() {
        let c = csv("item_name,type,ingredients\n\"Palak, Paneer\",veg,\"spinach;paneer\"\nEgg Roll,nonveg,\nBowl,,\n").unwrap();
        let mut buf = Vec::new();
        write_csv(&c, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice(), "mem").unwrap().records, c.records);
        let mut buf = Vec::new();
        write_jsonl(&c, &mut buf).unwrap();
        assert_eq!(
            read_jsonl(buf.as_slice(), "mem").unwrap().records,
            c.records
        );
    }
}
