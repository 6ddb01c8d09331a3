//! CSV -> SVG rendering. The input format is detected from the header:
//! regret curves, NLL tables, or long-format sweep tables (drawn as
//! violins). Every emitted SVG embeds its source table in a `<desc>` block
//! so the figure stays self-describing.

use hiergp::error::{Error, Result};
use hiergp::math::{mean, population_std};
use plotters::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

pub fn run(input: &Path, out_dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::Load {
        path: input.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| load_err(input, "empty file"))?
        .trim();
    let rows: Vec<Vec<String>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| c.trim().to_string()).collect())
        .collect();

    match header {
        "method,seed,space,sub,step,regret" => plot_regret(&text, &rows, out_dir),
        "method,seed,space,split,nll" => plot_nll(&text, &rows, out_dir),
        "grid,seed,parameter,value" => plot_sweep(&text, &rows, out_dir),
        other => Err(load_err(
            input,
            format!("unrecognized CSV header `{other}`"),
        )),
    }
}

fn load_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Load {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::invalid_argument(format!("bad number `{s}`: {e}")))
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::invalid_argument(format!("plot rendering failed: {e}"))
}

/// Embed the source table right after the opening <svg> tag.
fn embed_data(svg: &mut String, csv: &str) {
    if let Some(pos) = svg.find('>') {
        let escaped = csv
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        svg.insert_str(pos + 1, &format!("\n<desc>source-data:\n{escaped}</desc>"));
    }
}

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

/// Mean regret per step with a +/- std band, one series per method.
fn plot_regret(csv: &str, rows: &[Vec<String>], out_dir: &Path) -> Result<()> {
    // method -> seed -> step -> values over cells
    let mut data: BTreeMap<String, BTreeMap<u64, BTreeMap<usize, Vec<f64>>>> = BTreeMap::new();
    for r in rows {
        if r.len() != 6 {
            return Err(Error::invalid_argument("malformed regret row"));
        }
        let seed: u64 = r[1].parse().map_err(|_| {
            Error::invalid_argument(format!("bad seed `{}`", r[1]))
        })?;
        let step: usize = r[4]
            .parse()
            .map_err(|_| Error::invalid_argument(format!("bad step `{}`", r[4])))?;
        data.entry(r[0].clone())
            .or_default()
            .entry(seed)
            .or_default()
            .entry(step)
            .or_default()
            .push(parse_f64(&r[5])?);
    }

    let n_steps = data
        .values()
        .flat_map(|s| s.values())
        .map(|m| m.len())
        .max()
        .unwrap_or(0);
    if n_steps == 0 {
        return Err(Error::invalid_argument("no regret rows to plot"));
    }

    // per method: mean and std over per-seed means
    let mut series: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    for (method, by_seed) in &data {
        let mut seed_curves = Vec::new();
        for by_step in by_seed.values() {
            let curve: Vec<f64> = (0..n_steps)
                .map(|s| by_step.get(&s).map(|v| mean(v)).unwrap_or(f64::NAN))
                .collect();
            seed_curves.push(curve);
        }
        let means: Vec<f64> = (0..n_steps)
            .map(|s| mean(&seed_curves.iter().map(|c| c[s]).collect::<Vec<_>>()))
            .collect();
        let stds: Vec<f64> = (0..n_steps)
            .map(|s| population_std(&seed_curves.iter().map(|c| c[s]).collect::<Vec<_>>()))
            .collect();
        series.push((method.clone(), means, stds));
    }

    let y_max = series
        .iter()
        .flat_map(|(_, m, s)| m.iter().zip(s).map(|(a, b)| a + b))
        .fold(0.0f64, f64::max)
        .max(1e-6);

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (900, 600)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(20)
            .x_label_area_size(45)
            .y_label_area_size(70)
            .caption("Mean normalized simple regret", ("sans-serif", 24))
            .build_cartesian_2d(0f64..(n_steps as f64 - 1.0), 0f64..(y_max * 1.05))
            .map_err(plot_err)?;
        chart
            .configure_mesh()
            .x_desc("step")
            .y_desc("normalized simple regret")
            .draw()
            .map_err(plot_err)?;

        for (i, (method, means, stds)) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let band: Vec<(f64, f64)> = means
                .iter()
                .zip(stds)
                .enumerate()
                .map(|(s, (m, sd))| (s as f64, (m + sd).min(y_max * 1.05)))
                .chain(
                    means
                        .iter()
                        .zip(stds)
                        .enumerate()
                        .rev()
                        .map(|(s, (m, sd))| (s as f64, (m - sd).max(0.0))),
                )
                .collect();
            chart
                .draw_series(std::iter::once(Polygon::new(band, color.mix(0.15))))
                .map_err(plot_err)?;
            chart
                .draw_series(LineSeries::new(
                    means.iter().enumerate().map(|(s, m)| (s as f64, *m)),
                    color.stroke_width(2),
                ))
                .map_err(plot_err)?
                .label(method.clone())
                .legend(move |(x, y)| {
                    PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
                });
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.85))
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    embed_data(&mut svg, csv);
    let path = out_dir.join("regret.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Train/test NLL means per method, drawn as paired markers with std bars.
fn plot_nll(csv: &str, rows: &[Vec<String>], out_dir: &Path) -> Result<()> {
    // (method, split) -> per-seed aggregate (weighted mean not recoverable
    // from the CSV alone, so plain mean over spaces per seed)
    let mut per_seed: BTreeMap<(String, String), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        if r.len() != 5 {
            return Err(Error::invalid_argument("malformed NLL row"));
        }
        let seed: u64 = r[1]
            .parse()
            .map_err(|_| Error::invalid_argument(format!("bad seed `{}`", r[1])))?;
        per_seed
            .entry((r[0].clone(), r[3].clone()))
            .or_default()
            .entry(seed)
            .or_default()
            .push(parse_f64(&r[4])?);
    }
    let mut stats: Vec<(String, String, f64, f64)> = Vec::new();
    for ((method, split), seeds) in &per_seed {
        let vals: Vec<f64> = seeds.values().map(|v| mean(v)).collect();
        stats.push((method.clone(), split.clone(), mean(&vals), population_std(&vals)));
    }

    let methods: Vec<String> = {
        let mut m: Vec<String> = stats.iter().map(|(m, _, _, _)| m.clone()).collect();
        m.dedup();
        m
    };
    let y_lo = stats.iter().map(|s| s.2 - s.3).fold(f64::INFINITY, f64::min);
    let y_hi = stats
        .iter()
        .map(|s| s.2 + s.3)
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = (y_hi - y_lo).max(1.0) * 0.1;

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (900, 600)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(20)
            .x_label_area_size(90)
            .y_label_area_size(70)
            .caption("NLL by method (train vs test)", ("sans-serif", 24))
            .build_cartesian_2d(
                -0.5f64..(methods.len() as f64 - 0.5),
                (y_lo - pad)..(y_hi + pad),
            )
            .map_err(plot_err)?;
        let labels = methods.clone();
        chart
            .configure_mesh()
            .x_desc("method")
            .y_desc("NLL")
            .x_labels(methods.len())
            .x_label_formatter(&move |x| {
                let i = x.round() as usize;
                labels.get(i).cloned().unwrap_or_default()
            })
            .draw()
            .map_err(plot_err)?;

        for (si, split) in ["train", "test"].iter().enumerate() {
            let color = PALETTE[si];
            let offset = if si == 0 { -0.12 } else { 0.12 };
            let pts: Vec<(f64, f64, f64)> = stats
                .iter()
                .filter(|(_, sp, _, _)| sp == split)
                .map(|(m, _, mu, sd)| {
                    let xi = methods.iter().position(|x| x == m).unwrap() as f64 + offset;
                    (xi, *mu, *sd)
                })
                .collect();
            chart
                .draw_series(pts.iter().map(|(x, mu, sd)| {
                    PathElement::new(vec![(*x, mu - sd), (*x, mu + sd)], color.stroke_width(2))
                }))
                .map_err(plot_err)?;
            chart
                .draw_series(
                    pts.iter()
                        .map(|(x, mu, _)| Circle::new((*x, *mu), 5, color.filled())),
                )
                .map_err(plot_err)?
                .label(split.to_string())
                .legend(move |(x, y)| Circle::new((x + 9, y), 5, color.filled()));
        }
        chart
            .configure_series_labels()
            .border_style(BLACK)
            .background_style(WHITE.mix(0.85))
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    embed_data(&mut svg, csv);
    let path = out_dir.join("nll.svg");
    std::fs::write(&path, svg)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Gaussian kernel density estimate at the probe points.
fn kde(values: &[f64], probes: &[f64]) -> Vec<f64> {
    let sd = population_std(values);
    let n = values.len() as f64;
    let bw = if sd > 0.0 {
        0.9 * sd * n.powf(-0.2)
    } else {
        1e-3
    };
    probes
        .iter()
        .map(|&p| {
            values
                .iter()
                .map(|&v| (-0.5 * ((p - v) / bw).powi(2)).exp())
                .sum::<f64>()
                / (n * bw)
        })
        .collect()
}

/// One violin chart per swept parameter.
fn plot_sweep(csv: &str, rows: &[Vec<String>], out_dir: &Path) -> Result<()> {
    // parameter -> grid -> values
    let mut data: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        if r.len() != 4 {
            return Err(Error::invalid_argument("malformed sweep row"));
        }
        let grid: usize = r[0]
            .parse()
            .map_err(|_| Error::invalid_argument(format!("bad grid `{}`", r[0])))?;
        data.entry(r[2].clone())
            .or_default()
            .entry(grid)
            .or_default()
            .push(parse_f64(&r[3])?);
    }

    for (parameter, by_grid) in &data {
        let grids: Vec<usize> = by_grid.keys().cloned().collect();
        let all: Vec<f64> = by_grid.values().flatten().cloned().collect();
        let y_lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
        let y_hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = (y_hi - y_lo).max(1e-9) * 0.15;

        let mut svg = String::new();
        {
            let root = SVGBackend::with_string(&mut svg, (800, 550)).into_drawing_area();
            root.fill(&WHITE).map_err(plot_err)?;
            let mut chart = ChartBuilder::on(&root)
                .margin(20)
                .x_label_area_size(45)
                .y_label_area_size(70)
                .caption(format!("{parameter} estimates"), ("sans-serif", 22))
                .build_cartesian_2d(
                    -0.6f64..(grids.len() as f64 - 0.4),
                    (y_lo - pad)..(y_hi + pad),
                )
                .map_err(plot_err)?;
            let labels = grids.clone();
            chart
                .configure_mesh()
                .x_desc("grid value")
                .y_desc(parameter.as_str())
                .x_labels(grids.len())
                .x_label_formatter(&move |x| {
                    let i = x.round() as usize;
                    labels
                        .get(i)
                        .map(|g| g.to_string())
                        .unwrap_or_default()
                })
                .draw()
                .map_err(plot_err)?;

            for (gi, grid) in grids.iter().enumerate() {
                let values = &by_grid[grid];
                let color = PALETTE[gi % PALETTE.len()];
                let v_lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let v_hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let span = (v_hi - v_lo).max(1e-9);
                let probes: Vec<f64> = (0..=40)
                    .map(|i| v_lo - 0.1 * span + i as f64 * 1.2 * span / 40.0)
                    .collect();
                let dens = kde(values, &probes);
                let d_max = dens.iter().cloned().fold(1e-300, f64::max);
                let x0 = gi as f64;
                let outline: Vec<(f64, f64)> = probes
                    .iter()
                    .zip(&dens)
                    .map(|(&p, &d)| (x0 + 0.35 * d / d_max, p))
                    .chain(
                        probes
                            .iter()
                            .zip(&dens)
                            .rev()
                            .map(|(&p, &d)| (x0 - 0.35 * d / d_max, p)),
                    )
                    .collect();
                chart
                    .draw_series(std::iter::once(Polygon::new(outline, color.mix(0.4))))
                    .map_err(plot_err)?;

                let mut sorted = values.clone();
                sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let median = sorted[sorted.len() / 2];
                chart
                    .draw_series(std::iter::once(PathElement::new(
                        vec![(x0 - 0.3, median), (x0 + 0.3, median)],
                        BLACK.stroke_width(2),
                    )))
                    .map_err(plot_err)?;
            }
            root.present().map_err(plot_err)?;
        }
        embed_data(&mut svg, csv);
        let safe: String = parameter
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect();
        let path = out_dir.join(format!("asymptotics_{safe}.svg"));
        std::fs::write(&path, svg)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
