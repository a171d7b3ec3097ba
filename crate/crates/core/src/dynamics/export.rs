use std::io::{self, Write};

use super::SimulationResult;

/// Wide CSV: `t_s` then one column per channel in name order. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_channels_csv<W: Write>(result: &SimulationResult, mut w: W) -> io::Result<()> {
    write!(w, "t_s")?;
    for name in result.channels.keys() {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    let cols: Vec<&Vec<f64>> = result.channels.values().collect();
    for (k, t) in result.t.iter().enumerate() {
        write!(w, "{t}")?;
        for c in &cols {
            write!(w, ",{}", c[k])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Long CSV in the measurement import layout, `time_s,signal,value`, with
/// the channel name as signal id. `only` restricts the channels.
pub fn write_measurement_csv<W: Write>(
    result: &SimulationResult,
    only: Option<&[String]>,
    mut w: W,
) -> io::Result<()> {
    writeln!(w, "time_s,signal,value")?;
    for (name, values) in &result.channels {
        if only.is_some_and(|o| !o.contains(name)) {
            continue;
        }
        for (t, v) in result.t.iter().zip(values) {
            writeln!(w, "{t},{name},{v}")?;
        }
    }
    Ok(())
}
