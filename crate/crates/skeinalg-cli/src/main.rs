//! Command-line front end: exact colored Temperley-Lieb computations and
//! Mahler-measure experiments, with CSV or JSON output.

mod cache;
mod parser;

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use skeinalg::cell::{
    all_sequences, from_skein, sequences, weights, CellElement,
};
use skeinalg::jm::{
    central_idempotent, check_separating, ft_interpolation, jm_eigenvalue, jm_element,
};
use skeinalg::mahler::{
    lawton_sequence, mahler_1var, mahler_1var_quadrature, mahler_2var, mahler_2var_quadrature,
    twist_convergence,
};
use skeinalg::recoupling::color_embed;
use skeinalg::ring::RationalFn;
use skeinalg::skein::{braid_to_skein, cable_braid_word};
use skeinalg::twist::{
    colored_jones_twist, full_twist, jm_product, pair_power, twist_family, JonesOptions,
    WritheModel,
};

use cache::ProjectorCache;
use parser::{eval_tangle, expr_writhe, parse_poly, parse_tangle, poly_uses_z, to_braid_word};


#[derive(Parser)]
#[command(
    name = "skeinalg",
    about = "Exact colored Temperley-Lieb computations and Mahler measure experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Projector cache directory (also: SKEINALG_CACHE_DIR).
    #[arg(long, global = true)]
    cache_dir: Option<String>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Shape {
    /// Number of colored strands `k`.
    #[arg(long)]
    k: usize,
    /// Strand color `i`.
    #[arg(long)]
    i: usize,
}

#[derive(Subcommand)]
enum Command {
    /// List the weights and admissible sequences of TL_(k,i).
    Basis(Shape),
    /// Gram values of the graph basis (diagonal by orthogonality).
    Gram(Shape),
    /// Verify the cell-datum axioms by enumeration.
    VerifyCell(Shape),
    /// Jucys-Murphy eigenvalue table c_s(j).
    Jm {
        #[command(flatten)]
        shape: Shape,
        /// Restrict to a single index j.
        #[arg(long)]
        j: Option<usize>,
    },
    /// Verify the interpolated and central idempotents.
    Idempotents(Shape),
    /// Closed-form pairing <R^n, T> for a JM-product tangle R.
    PairPower {
        #[command(flatten)]
        shape: Shape,
        /// Exponents p_2,...,p_k of the JM product (comma separated).
        #[arg(long)]
        powers: String,
        /// Power n.
        #[arg(long)]
        n: u32,
        /// Tangle expression for T (default: the identity).
        #[arg(long)]
        tangle: Option<String>,
    },
    /// Colored Jones polynomial of a twisted braid closure.
    JonesTwist {
        #[command(flatten)]
        shape: Shape,
        /// Braid word on k strands, e.g. "s1 s1 s1".
        #[arg(long)]
        word: String,
        /// Number of full twists inserted.
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// Override the writhe contributed by each full twist
        /// (default k(k-1); orientation data the bracket lacks).
        #[arg(long)]
        writhe_per_twist: Option<i64>,
        /// Override the base writhe (default: exponent sum of the word).
        #[arg(long)]
        base_writhe: Option<i64>,
        /// Normalize so the unknot evaluates to 1 instead of Δ_i.
        #[arg(long, default_value_t = false)]
        normalize_unknot: bool,
    },
    /// Mahler measure of a polynomial in A (and optionally z).
    Mahler {
        /// Polynomial, e.g. "A^2 - A - 1" or "1 + A + z".
        #[arg(long)]
        poly: String,
        /// Method for the one-variable case.
        #[arg(long, value_enum, default_value_t = MahlerMethodArg::Jensen)]
        method: MahlerMethodArg,
        /// Grid size for quadrature / slice integration.
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Lawton specialization sequence M(f(z, z^d)).
    Lawton {
        /// Bivariate polynomial in A and z.
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 100)]
        dmax: u32,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Mahler-measure convergence of a full-twist family.
    TwistConverge {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 200)]
        mmax: u32,
        /// Base tangle as a braid word on k strands (default: identity).
        #[arg(long)]
        tangle: Option<String>,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long)]
        writhe_per_twist: Option<i64>,
        #[arg(long)]
        base_writhe: Option<i64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MahlerMethodArg {
    Jensen,
    Quadrature,
}

fn rf_json(v: &RationalFn) -> serde_json::Value {
    json!({ "num": v.num().to_triples(), "den": v.den().to_triples() })
}

/// Comma-free exact rendering for CSV cells: two polynomial columns.
fn rf_csv(v: &RationalFn) -> String {
    format!("{},{}", v.num(), v.den())
}

fn seq_label(entries: &[usize]) -> String {
    entries
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

fn open_cache(cli_dir: &Option<String>) -> Result<Option<ProjectorCache>> {
    let dir = cli_dir
        .clone()
        .or_else(|| std::env::var("SKEINALG_CACHE_DIR").ok());
    match dir {
        Some(d) => Ok(Some(ProjectorCache::new(d)?)),
        None => Ok(None),
    }
}

/// Builds the cell coordinates of a braid tangle on `k` strands colored
/// `i` together with its exponent-sum writhe.
fn braid_tangle_to_cell(word_text: &str, k: usize, i: usize) -> Result<(CellElement, i64)> {
    let expr = parse_tangle(word_text).map_err(|e| anyhow!("{e}"))?;
    let word = to_braid_word(&expr, k)
        .ok_or_else(|| anyhow!("tangle must be a braid word (s<j>, s<j>^-1, twist(m))"))?;
    let base_writhe = expr_writhe(&expr, k);
    let cabled = cable_braid_word(&word, i);
    let resolved = braid_to_skein(&cabled, k * i)?;
    let colored = color_embed(&resolved, k, i)?;
    let cell = from_skein(&colored, k, i)?;
    Ok((cell, base_writhe))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cache = open_cache(&cli.cache_dir)?;
    if let Some(c) = &cache {
        c.preload(8);
    }
    let outcome = run(&cli, cache.as_ref());
    if let Some(c) = &cache {
        c.write_back().context("writing back projector cache")?;
    }
    outcome
}

fn run(cli: &Cli, cache: Option<&ProjectorCache>) -> Result<()> {
    match &cli.command {
        Command::Basis(shape) => {
            let (k, i) = (shape.k, shape.i);
            let lambdas = weights(k, i);
            match cli.format {
                Format::Csv => {
                    println!("weight,sequence");
                    for &l in &lambdas {
                        for s in sequences(k, i, l)? {
                            println!("{l},{}", seq_label(s.entries()));
                        }
                    }
                }
                Format::Json => {
                    let mut per_weight = BTreeMap::new();
                    for &l in &lambdas {
                        let seqs: Vec<Vec<usize>> = sequences(k, i, l)?
                            .into_iter()
                            .map(|s| s.entries().to_vec())
                            .collect();
                        per_weight.insert(l.to_string(), seqs);
                    }
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "k": k, "i": i,
                            "weights": lambdas,
                            "sequences": per_weight,
                        }))?
                    );
                }
            }
        }
        Command::Gram(shape) => {
            let (k, i) = (shape.k, shape.i);
            let mut rows = Vec::new();
            for l in weights(k, i) {
                let seqs = sequences(k, i, l)?;
                for s in &seqs {
                    for t in &seqs {
                        let g = CellElement::basis(s.clone(), t.clone())?;
                        let val = g.inner(&g)?;
                        rows.push((s.clone(), t.clone(), val));
                    }
                }
            }
            match cli.format {
                Format::Csv => {
                    println!("s,t,num,den");
                    for (s, t, v) in rows {
                        println!(
                            "{},{},{}",
                            seq_label(s.entries()),
                            seq_label(t.entries()),
                            rf_csv(&v)
                        );
                    }
                }
                Format::Json => {
                    let items: Vec<_> = rows
                        .iter()
                        .map(|(s, t, v)| {
                            json!({
                                "s": s.entries(),
                                "t": t.entries(),
                                "value": rf_json(v),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&items)?);
                }
            }
        }
        Command::VerifyCell(shape) => {
            let (k, i) = (shape.k, shape.i);
            let report = skeinalg::cell::verify_cell_datum(k, i)?;
            let jm = check_separating(k, i)?;
            for line in report.lines().into_iter().chain(jm.lines()) {
                println!("{line}");
            }
            if !(report.all_pass() && jm.all_pass()) {
                bail!("cell datum verification failed for ({k},{i})");
            }
        }
        Command::Jm { shape, j } => {
            let (k, i) = (shape.k, shape.i);
            let indices: Vec<usize> = match j {
                Some(j) => vec![*j],
                None => (1..=k).collect(),
            };
            let seqs = all_sequences(k, i);
            match cli.format {
                Format::Csv => {
                    println!("s,j,num,den");
                    for s in &seqs {
                        for &jj in &indices {
                            let c = jm_eigenvalue(s, jj)?;
                            println!("{},{jj},{}", seq_label(s.entries()), rf_csv(&c));
                        }
                    }
                }
                Format::Json => {
                    let mut items = Vec::new();
                    for s in &seqs {
                        for &jj in &indices {
                            let c = jm_eigenvalue(s, jj)?;
                            items.push(json!({
                                "s": s.entries(),
                                "j": jj,
                                "value": rf_json(&c),
                            }));
                        }
                    }
                    println!("{}", serde_json::to_string_pretty(&items)?);
                }
            }
            // The elements themselves double-check the table.
            for &jj in &indices {
                let _ = jm_element(jj, k, i)?;
            }
        }
        Command::Idempotents(shape) => {
            let (k, i) = (shape.k, shape.i);
            let mut all_ok = true;
            for t in all_sequences(k, i) {
                let ft = ft_interpolation(&t)?;
                let gtt = CellElement::basis(t.clone(), t.clone())?;
                let ok = ft == gtt;
                all_ok &= ok;
                println!(
                    "({k},{i}) interpolation t={} {}",
                    seq_label(t.entries()),
                    if ok { "PASS" } else { "FAIL" }
                );
            }
            let mut total = CellElement::zero(k, i);
            for l in weights(k, i) {
                let z = central_idempotent(l, k, i)?;
                let ok = z.mul(&z)? == z;
                all_ok &= ok;
                println!(
                    "({k},{i}) central-idempotent weight={l} {}",
                    if ok { "PASS" } else { "FAIL" }
                );
                total = total.add(&z)?;
            }
            let complete = total == CellElement::identity(k, i);
            all_ok &= complete;
            println!(
                "({k},{i}) central-sum-identity {}",
                if complete { "PASS" } else { "FAIL" }
            );
            if !all_ok {
                bail!("idempotent verification failed");
            }
        }
        Command::PairPower {
            shape,
            powers,
            n,
            tangle,
        } => {
            let (k, i) = (shape.k, shape.i);
            let powers: Vec<u32> = powers
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.trim().parse().context("bad exponent list"))
                .collect::<Result<_>>()?;
            if let Some(c) = cache {
                c.get_or_compute(i)?;
            }
            let r = jm_product(&powers, k, i)?;
            // T may be any tangle expression on k*i strands; it is
            // projected into the colored algebra before pairing.
            let t = match tangle {
                Some(text) => {
                    let expr = parse_tangle(text).map_err(|e| anyhow!("{e}"))?;
                    let raw = eval_tangle(&expr, k * i)?;
                    let colored = color_embed(&raw, k, i)?;
                    from_skein(&colored, k, i)?
                }
                None => CellElement::identity(k, i),
            };
            let v = pair_power(&r, &t, *n)?;
            match cli.format {
                Format::Csv => println!("num,den\n{}", rf_csv(&v)),
                Format::Json => println!("{}", serde_json::to_string_pretty(&rf_json(&v))?),
            }
        }
        Command::JonesTwist {
            shape,
            word,
            m,
            writhe_per_twist,
            base_writhe,
            normalize_unknot,
        } => {
            let (k, i) = (shape.k, shape.i);
            if let Some(c) = cache {
                c.get_or_compute(i)?;
            }
            let (cell, word_writhe) = braid_tangle_to_cell(word, k, i)?;
            let writhe = WritheModel {
                base: base_writhe.unwrap_or(word_writhe),
                per_twist: writhe_per_twist.unwrap_or((k * (k - 1)) as i64),
            };
            let opts = JonesOptions {
                writhe,
                normalize_unknot: *normalize_unknot,
            };
            let jones = colored_jones_twist(&cell, *m, &opts)?;
            match cli.format {
                Format::Csv => {
                    println!("{}", serde_json::to_string(&jones.to_triples())?)
                }
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "k": k, "i": i, "m": m,
                        "writhe": writhe.at(*m),
                        "polynomial": jones.to_triples(),
                    }))?
                ),
            }
        }
        Command::Mahler { poly, method, grid } => {
            let result = if poly_uses_z(poly) {
                let f = parse_poly(poly).map_err(|e| anyhow!("{e}"))?;
                match method {
                    MahlerMethodArg::Jensen => mahler_2var(&f, *grid)?,
                    MahlerMethodArg::Quadrature => mahler_2var_quadrature(&f, *grid)?,
                }
            } else {
                let f = parser::parse_laurent(poly).map_err(|e| anyhow!("{e}"))?;
                match method {
                    MahlerMethodArg::Jensen => mahler_1var(&f)?,
                    MahlerMethodArg::Quadrature => mahler_1var_quadrature(&f, *grid)?,
                }
            };
            match cli.format {
                Format::Csv => println!(
                    "value,error_estimate\n{:.15},{:.3e}",
                    result.value, result.error_estimate
                ),
                Format::Json => println!("{}", serde_json::to_string_pretty(&result)?),
            }
        }
        Command::Lawton { poly, dmax, grid } => {
            let f = parse_poly(poly).map_err(|e| anyhow!("{e}"))?;
            let report = lawton_sequence(&f, *dmax, *grid)?;
            match cli.format {
                Format::Csv => {
                    println!("d,value");
                    for (d, v) in &report.rows {
                        println!("{d},{v:.12}");
                    }
                    println!("# two_var_value,{:.12}", report.two_var_value);
                    println!("# tail_deviation,{:.3e}", report.tail_deviation);
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
            }
        }
        Command::TwistConverge {
            shape,
            mmax,
            tangle,
            grid,
            writhe_per_twist,
            base_writhe,
        } => {
            let (k, i) = (shape.k, shape.i);
            if let Some(c) = cache {
                c.get_or_compute(i)?;
            }
            let (cell, word_writhe) = match tangle {
                Some(text) => braid_tangle_to_cell(text, k, i)?,
                None => (CellElement::identity(k, i), 0),
            };
            let writhe = WritheModel {
                base: base_writhe.unwrap_or(word_writhe),
                per_twist: writhe_per_twist.unwrap_or((k * (k - 1)) as i64),
            };
            let r = full_twist(k, i)?;
            let fam = twist_family(&r, &cell, writhe)?;
            let report = twist_convergence(&fam, *mmax, *grid)?;
            match cli.format {
                Format::Csv => {
                    println!("m,value,delta_prev");
                    for (m, v, d) in &report.rows {
                        if d.is_nan() {
                            println!("{m},{v:.12},");
                        } else {
                            println!("{m},{v:.12},{d:.3e}");
                        }
                    }
                    if let Some(limit) = report.limit_value {
                        println!("# limit_value,{limit:.12}");
                    }
                    println!("# tail_max_delta,{:.3e}", report.tail_max_delta);
                }
                Format::Json => println!("{}", serde_json::to_string_pretty(&report)?),
            }
        }
    }
    Ok(())
}
