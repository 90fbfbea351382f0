//! Scale and route descriptor values, then ramp between two presets.

use vivo::mapping::{default_mapping, recall_preset, scale, Preset, RoutingMatrix, ScalerParams};

fn main() -> vivo::Result<()> {
    let cubic = ScalerParams::new(0.0, 1.0, 0.0, 100.0, 3.0)?;
    for x in [0.0, 0.5, 1.0, 1.2] {
        println!("scale({x}) = {:.2}", scale(x, &cubic));
    }

    let file = default_mapping();
    let calm = file.mapping.clone();
    let mut busy = calm.clone();
    busy.matrix = RoutingMatrix::from_rows(vec![vec![0.2; calm.outputs.len()]; calm.inputs.len()])?;
    let target = Preset::capture("busy", &busy, 0);

    let raw = [0.4, 0.7, 0.2, 0.5, 0.1];
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let m = recall_preset(&calm, &target, t)?;
        let out: Vec<String> = m.apply(&raw)?.iter().map(|v| format!("{v:8.3}")).collect();
        println!("t={t:.2}  {}", out.join(" "));
    }
    Ok(())
}
