use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Instance, PipelineError};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |err| PipelineError::Io { path: path.to_path_buf(), err }
}

/// One compact JSON object per line, each followed by `\n`.
pub fn emit_jsonl<W: Write>(instances: &[Instance], mut out: W) -> std::io::Result<()> {
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_jsonl(path: &Path, instances: &[Instance]) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(io_err(path))?;
    emit_jsonl(instances, BufWriter::new(file)).map_err(io_err(path))
}

/// Parse records, reporting the 1-based line of the first bad one. Blank
/// lines are not allowed.
pub fn parse_jsonl<R: BufRead>(input: R) -> Result<Vec<Instance>, PipelineError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| PipelineError::Schema { line: line_no, message: e.to_string() })?;
        let inst: Instance = serde_json::from_str(&line)
            .map_err(|e| PipelineError::Schema { line: line_no, message: e.to_string() })?;
        inst.check_indices().map_err(|message| PipelineError::Schema { line: line_no, message })?;
        out.push(inst);
    }
    Ok(out)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Instance>, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_jsonl(BufReader::new(file))
}
