use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{ensure, Context};
use biomow_core::policy::self_excluded_densities;
use biomow_core::store_io::{read_embeddings, write_atomically};
use biomow_core::{centroid, global_deviation, pca_project, Embedding64, Store64};
use clap::Args;

use crate::summary::{log_histogram, Summary};
use crate::DensityArgs;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Embedding files to compare (repeatable).
    #[arg(long, required = true, num_args = 1..)]
    emb: Vec<PathBuf>,
    /// Text report output.
    #[arg(long)]
    report: PathBuf,
    /// 2-D PCA coordinates of every embedding (CSV).
    #[arg(long)]
    pca_out: Option<PathBuf>,
    #[command(flatten)]
    density: DensityArgs,
}

struct Dataset {
    name: String,
    embeddings: Vec<Embedding64>,
}

pub fn run(args: &AnalyzeArgs) -> anyhow::Result<()> {
    let params = args.density.params()?;
    let mut sets = Vec::with_capacity(args.emb.len());
    for path in &args.emb {
        let embeddings: Vec<Embedding64> =
            read_embeddings(path).with_context(|| format!("reading {}", path.display()))?;
        ensure!(
            !embeddings.is_empty(),
            "{} holds no embeddings",
            path.display()
        );
        sets.push(Dataset {
            name: path.display().to_string(),
            embeddings,
        });
    }
    let dim = sets[0].embeddings[0].dim();
    for s in &sets {
        ensure!(
            s.embeddings[0].dim() == dim,
            "{} has dimension {}, expected {dim}",
            s.name,
            s.embeddings[0].dim()
        );
    }

    let mut report = String::new();
    writeln!(report, "# global deviation")?;
    writeln!(report, "dataset,count,dim,sigma_d")?;
    let mut centroids = Vec::with_capacity(sets.len());
    for s in &sets {
        let sigma = global_deviation(&s.embeddings)?;
        writeln!(
            report,
            "{},{},{},{}",
            s.name,
            s.embeddings.len(),
            dim,
            sigma
        )?;
        centroids.push(centroid(&s.embeddings)?);
    }

    writeln!(report, "\n# centroid distances")?;
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate().skip(i + 1) {
            writeln!(
                report,
                "{},{},{}",
                a.name,
                b.name,
                centroids[i].distance(&centroids[j])
            )?;
        }
    }

    writeln!(
        report,
        "\n# knn density (k = {}, self-excluded)",
        params.k()
    )?;
    for s in &sets {
        if s.embeddings.len() <= params.k() {
            writeln!(report, "{}: fewer than k + 1 embeddings, skipped", s.name)?;
            continue;
        }
        let store = Store64::from_embeddings(s.embeddings.clone())?;
        let densities = self_excluded_densities(&store, &params)?;
        let summary = Summary::of(&densities).expect("nonempty");
        writeln!(report, "{}: {}", s.name, summary.line())?;
        for (lo, hi, count) in log_histogram(&densities, 10) {
            writeln!(report, "  [{lo:.4e}, {hi:.4e}] {count}")?;
        }
    }

    let pca_csv = match &args.pca_out {
        Some(_) => {
            let all: Vec<Embedding64> = sets
                .iter()
                .flat_map(|s| s.embeddings.iter().cloned())
                .collect();
            let projection = pca_project(&all, 2).context("projecting embeddings")?;
            let mut csv = String::from("dataset,index,pc1,pc2\n");
            let labels = sets
                .iter()
                .flat_map(|s| (0..s.embeddings.len()).map(move |i| (&s.name, i)));
            for ((name, i), row) in labels.zip(projection.coordinates()) {
                writeln!(csv, "{name},{i},{},{}", row[0], row[1])?;
            }
            Some(csv)
        }
        None => None,
    };

    write_atomically(&args.report, report.as_bytes())
        .with_context(|| format!("writing {}", args.report.display()))?;
    if let (Some(path), Some(csv)) = (&args.pca_out, pca_csv) {
        write_atomically(path, csv.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{report}");
    Ok(())
}
