//! Gaze trace CSV: `t,u,v,on_wall`, off-wall samples carry `NaN` coordinates.

use crate::world_sim::GazeSample;
use std::io::{Read, Write};

pub fn write_trace<W: Write>(out: W, trace: &[GazeSample]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for s in trace {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<GazeSample>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}
