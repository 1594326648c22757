use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lowpoly::pipeline::{write_outputs, write_stage_dumps, DEFAULT_DENSITY, DEFAULT_THRESHOLD};
use lowpoly::{decode_image, run_pipeline, sweep, Error, PipelineConfig, RasterImage};

/// Turn an image into low-poly triangulated art.
#[derive(Debug, Parser)]
#[command(name = "triangulate", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a threshold x density grid and tabulate vertex and triangle counts.
    Sweep(SweepArgs),
    /// Serve the HTTP API and tuner UI.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Input PNG or JPEG.
    input: Option<PathBuf>,

    /// Minimum Sobel magnitude (0-255) for an edge pixel.
    #[arg(long, short = 't', default_value_t = DEFAULT_THRESHOLD, value_parser = clap::value_parser!(u32).range(0..=255))]
    threshold: u32,

    /// Keep one vertex per this many edge pixels.
    #[arg(long, short = 'd', default_value_t = DEFAULT_DENSITY, value_parser = clap::value_parser!(u32).range(1..))]
    density: u32,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Use this many uniformly random vertices instead of edge pixels.
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    random_points: Option<u32>,

    /// Do not add the four canvas corners.
    #[arg(long)]
    no_frame: bool,

    /// Also write gray, sharp, sobel and wire stages, mesh JSON and stats JSON.
    #[arg(long)]
    dump_stages: bool,

    /// Final image path [default: <stem>_final.png next to the input].
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    input: PathBuf,

    #[arg(long, value_delimiter = ',', default_values_t = [25, 50, 75])]
    thresholds: Vec<u32>,

    #[arg(long, value_delimiter = ',', default_values_t = [35, 60, 85])]
    densities: Vec<u32>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    no_frame: bool,

    /// CSV output path [default: stdout].
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Also write the full per-cell results as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,

    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,

    /// Byte budget of the upload and result cache, in MiB.
    #[arg(long, default_value_t = lowpoly::service::DEFAULT_CACHE_MB)]
    cache_mb: usize,

    #[arg(long, default_value_t = lowpoly::service::DEFAULT_MAX_UPLOAD_MB)]
    max_upload_mb: usize,

    /// Built tuner UI to serve at `/`.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Sweep(args)) => run_sweep(args),
        Some(Command::Serve(args)) => run_serve(args),
        None => match cli.run.input.clone() {
            Some(input) => run_single(&input, &cli.run),
            None => {
                eprintln!("error: an input image is required (see --help)");
                return ExitCode::from(2);
            }
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}

fn load(path: &Path) -> Result<RasterImage, Error> {
    let bytes = std::fs::read(path)?;
    decode_image(&bytes)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

fn run_single(input: &Path, args: &RunArgs) -> Result<(), Error> {
    let cfg = PipelineConfig {
        threshold: args.threshold,
        density: args.density,
        seed: args.seed,
        random_points: args.random_points,
        include_frame: !args.no_frame,
        dump_stages: args.dump_stages,
    };
    let img = load(input)?;
    let out = run_pipeline(&img, &cfg)?;

    let stem = file_stem(input);
    let written = match &args.out {
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut written = write_stage_dumps(dir, &stem, &out)?;
            std::fs::write(path, lowpoly::encode_image(&out.image)?)?;
            written.push(path.clone());
            written
        }
        None => write_outputs(input.parent().unwrap_or(Path::new(".")), &stem, &out)?,
    };
    for path in &written {
        log::info!("wrote {}", path.display());
    }
    let s = &out.stats;
    println!(
        "edge pixels {} | vertices {} | triangles {} | {:.1} ms",
        s.edge_pixel_count, s.vertex_count, s.triangle_count, s.timings_ms.total
    );
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), Error> {
    let img = load(&args.input)?;
    let base = PipelineConfig {
        seed: args.seed,
        include_frame: !args.no_frame,
        ..PipelineConfig::default()
    };
    let cells = sweep(&img, &args.thresholds, &args.densities, &base)?;
    let rows: Vec<_> = cells.iter().map(|c| c.row(args.seed)).collect();

    let write_csv = |w: Box<dyn std::io::Write>| -> Result<(), Error> {
        let mut csv = csv::Writer::from_writer(w);
        for row in &rows {
            csv.serialize(row).map_err(|e| Error::Io(e.into()))?;
        }
        csv.flush()?;
        Ok(())
    };
    match &args.csv {
        Some(path) => {
            write_csv(Box::new(std::fs::File::create(path)?))?;
            log::info!("wrote {}", path.display());
        }
        None => write_csv(Box::new(std::io::stdout()))?,
    }
    if let Some(path) = &args.json {
        std::fs::write(path, serde_json::to_string_pretty(&cells).expect("cells serialize"))?;
    }
    Ok(())
}

fn run_serve(args: ServeArgs) -> Result<(), Error> {
    let config = lowpoly::service::ServiceConfig {
        cache_bytes: args.cache_mb << 20,
        max_upload_bytes: args.max_upload_mb << 20,
        ui_dir: args.ui_dir,
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(lowpoly::service::serve(addr, config))?;
    Ok(())
}
