//! The `adrt` command line tool.
//!
//! Exit codes: 0 success, 1 usage or format error, 2 validation failure or
//! out-of-range inverse, 3 integer overflow.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{AdrtError, Result};
use crate::format::{read_image, write_any, AnyImage, FileSample};
use crate::grid::{rewindow, Kind, SquareImage, StripImage};
use crate::inverse::{
    default_probe_point, delta_inverse_profile, divergence_probe, inverse_with, loglog_slope,
    InverseOptions,
};
use crate::lines::{digital_line_closed, digital_line_recursive, dual_line_closed, dual_line_recursive};
use crate::range::{validate, ConstraintId, RangeReport};
use crate::sample::Sample;
use crate::transform::{backproject, forward, forward_bruteforce, forward_strip, full_adrt};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "adrt", version, about = "Approximate discrete Radon transform tool")]
struct Cli {
    /// Worker thread cap (0 lets the runtime decide).
    #[arg(long, global = true, env = "ADRT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Io {
    /// Input file, `-` for stdin.
    input: PathBuf,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write the binary container instead of text.
    #[arg(long)]
    binary: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-quadrant transform of an image (or of a strip image).
    Forward {
        #[command(flatten)]
        io: Io,
        /// Use direct summation over digital lines.
        #[arg(long)]
        oracle: bool,
    },
    /// Exact inverse of a sinogram.
    Inverse {
        #[command(flatten)]
        io: Io,
        /// Drop values that leave the square instead of failing.
        #[arg(long)]
        allow_out_of_range: bool,
        /// Relative tolerance for float data.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Back-projection through levels m..1.
    Backproject {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        m: Option<u32>,
        /// Keep the whole back-projected strip instead of the square.
        #[arg(long)]
        strip: bool,
    },
    /// All four quadrant transforms.
    Fulladrt {
        input: PathBuf,
        /// Output prefix; writes PREFIX.q0.adrt .. PREFIX.q3.adrt. Without
        /// it the four sinograms go to stdout one after another.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        binary: bool,
    },
    /// Check whether a sinogram is the transform of a square image.
    Validate {
        input: PathBuf,
        /// Relative tolerance for float data.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Dump every residual as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print digital lines as `t k(t)` rows.
    Lines {
        #[arg(long)]
        n: u32,
        #[arg(long, requires = "s", allow_hyphen_values = true)]
        h: Option<i64>,
        #[arg(long, requires = "h")]
        s: Option<usize>,
        #[arg(long)]
        dual: bool,
        #[arg(long)]
        closed_form: bool,
    },
    /// Inverse of a sinogram delta on a window of heights.
    Invdelta {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        h: i64,
        #[arg(long)]
        s: usize,
        /// Heights LO:HI, half open.
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Error of transforming a truncated delta inverse, k = 1..kmax (CSV).
    Divergence {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        kmax: u64,
        #[arg(long, requires = "s", allow_hyphen_values = true)]
        h: Option<i64>,
        #[arg(long, requires = "h")]
        s: Option<usize>,
    },
    /// Median-of-repeats forward timings (CSV).
    Bench {
        /// Comma separated image sizes, powers of two.
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

/// Runs the tool with `std` streams and returns the exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with(
    args: impl IntoIterator<Item = OsString>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let threads = cli.threads.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "adrt: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    let mut obuf = Vec::new();
    let mut ebuf = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut obuf, &mut ebuf));
    let _ = out.write_all(&obuf);
    let _ = err.write_all(&ebuf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "adrt: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &AdrtError) -> i32 {
    match e {
        AdrtError::Overflow(_) => EXIT_OVERFLOW,
        AdrtError::OutOfRange { .. } => EXIT_INVALID,
        _ => EXIT_USAGE,
    }
}

fn load(path: &PathBuf) -> Result<AnyImage> {
    if path.as_os_str() == "-" {
        read_image(io::stdin().lock())
    } else {
        let file = File::open(path).map_err(|e| AdrtError::Io(format!("{}: {e}", path.display())))?;
        read_image(BufReader::new(file))
    }
}

fn store(f: &AnyImage, output: &Option<PathBuf>, binary: bool, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| AdrtError::Io(format!("{}: {e}", path.display())))?;
            let mut w = io::BufWriter::new(file);
            write_any(f, binary, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => write_any(f, binary, out),
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Forward { io, oracle } => {
            let g = match load(&io.input)? {
                AnyImage::I64(f) => AnyImage::I64(forward_any(&f, oracle)?),
                AnyImage::F64(f) => AnyImage::F64(forward_any(&f, oracle)?),
            };
            store(&g, &io.output, io.binary, out)?;
            Ok(EXIT_OK)
        }
        Command::Inverse {
            io,
            allow_out_of_range,
            tol,
        } => {
            let opts = InverseOptions {
                allow_out_of_range,
                tol,
            };
            let f = match load(&io.input)? {
                AnyImage::I64(g) => AnyImage::I64(inverse_any(&g, opts, err)?),
                AnyImage::F64(g) => AnyImage::F64(inverse_any(&g, opts, err)?),
            };
            store(&f, &io.output, io.binary, out)?;
            Ok(EXIT_OK)
        }
        Command::Backproject { io, m, strip } => {
            let f = match load(&io.input)? {
                AnyImage::I64(g) => AnyImage::I64(backproject_any(&g, m, strip)?),
                AnyImage::F64(g) => AnyImage::F64(backproject_any(&g, m, strip)?),
            };
            store(&f, &io.output, io.binary, out)?;
            Ok(EXIT_OK)
        }
        Command::Fulladrt {
            input,
            output,
            binary,
        } => {
            let quadrants: Vec<AnyImage> = match load(&input)? {
                AnyImage::I64(f) => full_adrt(&square(&f)?)?.into_iter().map(Into::into).collect(),
                AnyImage::F64(f) => full_adrt(&square(&f)?)?.into_iter().map(Into::into).collect(),
            };
            for (q, g) in quadrants.iter().enumerate() {
                let path = output.as_ref().map(|p| {
                    let mut name = p.clone().into_os_string();
                    name.push(format!(".q{q}.adrt"));
                    PathBuf::from(name)
                });
                store(g, &path, binary, out)?;
            }
            Ok(EXIT_OK)
        }
        Command::Validate { input, tol, json } => match load(&input)? {
            AnyImage::I64(g) => report(&validate(&g, tol)?, json, out),
            AnyImage::F64(g) => report(&validate(&g, tol)?, json, out),
        },
        Command::Lines {
            n,
            h,
            s,
            dual,
            closed_form,
        } => {
            let size = 1i64 << n;
            let make = |h: i64, s: usize| match (dual, closed_form) {
                (false, false) => digital_line_recursive(n, n, 0, h, s),
                (false, true) => digital_line_closed(n, h, s),
                (true, false) => dual_line_recursive(n, n, 0, h, s),
                (true, true) => dual_line_closed(n, h, s),
            };
            let mut text = String::new();
            match (h, s) {
                (Some(h), Some(s)) => {
                    for (t, k) in make(h, s)?.heights().iter().enumerate() {
                        text.push_str(&format!("{t} {k}\n"));
                    }
                }
                _ => {
                    text.push_str("h s t k\n");
                    for s in 0..size as usize {
                        for h in -(size - 1)..size {
                            for (t, k) in make(h, s)?.heights().iter().enumerate() {
                                text.push_str(&format!("{h} {s} {t} {k}\n"));
                            }
                        }
                    }
                }
            }
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Invdelta {
            n,
            h,
            s,
            window,
            output,
        } => {
            let (lo, hi) = parse_window(&window)?;
            let f = delta_inverse_profile::<i64>(n, h, s, lo, hi)?;
            store(&AnyImage::I64(f), &output, false, out)?;
            Ok(EXIT_OK)
        }
        Command::Divergence { n, kmax, h, s } => {
            let (h, s) = match (h, s) {
                (Some(h), Some(s)) => (h, s),
                _ => default_probe_point(n),
            };
            let mut text = String::from("k,sup,restricted\n");
            let mut points = Vec::new();
            for k in 1..=kmax {
                let p = divergence_probe::<i64>(n, k, h, s)?;
                text.push_str(&format!("{},{},{}\n", p.k, p.sup, p.restricted));
                points.push((k as f64, p.sup));
            }
            out.write_all(text.as_bytes())?;
            if points.len() >= 2 && points.iter().all(|p| p.1 > 0.0) {
                writeln!(err, "log-log slope of sup over k: {:.4}", loglog_slope(&points))?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench { sizes, repeats } => {
            let mut text = String::from("n,N,median_seconds,ratio\n");
            let mut previous: Option<f64> = None;
            for size in sizes {
                if !size.is_power_of_two() {
                    return Err(AdrtError::Argument(format!("size {size} is not a power of two")));
                }
                let n = size.trailing_zeros();
                let t = bench_forward(n, repeats.max(1))?;
                let ratio = previous.map_or(String::new(), |p| format!("{:.3}", t / p));
                text.push_str(&format!("{n},{size},{t:.6},{ratio}\n"));
                previous = Some(t);
            }
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn square<T: Sample>(f: &StripImage<T>) -> Result<SquareImage<T>> {
    if f.kind() != Kind::Image {
        return Err(AdrtError::Argument("expected an image file".into()));
    }
    f.to_square()
}

fn forward_any<T: Sample>(f: &StripImage<T>, oracle: bool) -> Result<StripImage<T>> {
    match (f.kind(), oracle) {
        (Kind::Image, false) => forward(&f.to_square()?),
        (Kind::Image, true) => forward_bruteforce(&f.to_square()?),
        (Kind::Sino, false) => Ok(forward_strip(f)?.with_kind(Kind::Sino)),
        (Kind::Sino, true) => Err(AdrtError::Argument(
            "--oracle needs an image file".into(),
        )),
    }
}

fn inverse_any<T: Sample>(
    g: &StripImage<T>,
    opts: InverseOptions,
    err: &mut dyn Write,
) -> Result<StripImage<T>> {
    let outcome = inverse_with(g, opts)?;
    for d in &outcome.discarded {
        writeln!(
            err,
            "discarded stage={} h={} j={} value={}",
            d.stage, d.h, d.column, d.value
        )?;
    }
    Ok(outcome.image.embed())
}

fn backproject_any<T: Sample>(g: &StripImage<T>, m: Option<u32>, strip: bool) -> Result<StripImage<T>> {
    let b = backproject(g, m.unwrap_or(g.n()))?;
    if strip {
        Ok(b.with_kind(Kind::Sino))
    } else {
        let size = b.width() as i64;
        Ok(rewindow(&b, 0, size, true)?.with_kind(Kind::Image))
    }
}

fn parse_window(text: &str) -> Result<(i64, i64)> {
    let bad = || AdrtError::Argument(format!("window must be LO:HI, found {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Serialize)]
struct Record<T> {
    #[serde(flatten)]
    id: ConstraintId,
    value: T,
    magnitude: f64,
}

#[derive(Serialize)]
struct Outside<T> {
    h: i64,
    s: usize,
    value: T,
}

#[derive(Serialize)]
struct JsonReport<T> {
    n: u32,
    passed: bool,
    total: usize,
    mass_count: usize,
    support_count: usize,
    nonzero: usize,
    violations: usize,
    max_abs: f64,
    tol: f64,
    outside_support: Vec<Outside<T>>,
    residuals: Vec<Record<T>>,
}

fn report<T: FileSample + Serialize>(
    r: &RangeReport<T>,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    if json {
        let body = JsonReport {
            n: r.n,
            passed: r.passed,
            total: r.total(),
            mass_count: r.mass_count,
            support_count: r.support_count,
            nonzero: r.nonzero_residuals(),
            violations: r.violations(),
            max_abs: r.max_abs,
            tol: r.tol,
            outside_support: r
                .outside_support
                .iter()
                .map(|&(h, s, value)| Outside { h, s, value })
                .collect(),
            residuals: r
                .residuals
                .iter()
                .map(|(&id, r)| Record {
                    id,
                    value: r.value,
                    magnitude: r.magnitude,
                })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut *out, &body)
            .map_err(|e| AdrtError::Io(e.to_string()))?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "{}: {} constraints ({} mass, {} support), {} violated, max |residual| {:e}, {} values outside the support set",
            if r.passed { "valid" } else { "invalid" },
            r.total(),
            r.mass_count,
            r.support_count,
            r.violations(),
            r.max_abs,
            r.outside_support.len()
        )?;
    }
    Ok(if r.passed { EXIT_OK } else { EXIT_INVALID })
}

/// Median wall time of `forward` on an `N x N` integer image.
pub fn bench_forward(n: u32, repeats: usize) -> Result<f64> {
    let f = SquareImage::from_fn(n, |i, j| ((i * 31 + j * 17) % 255) as i64)?;
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let g = forward(&f)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(g);
    }
    times.sort_by(f64::total_cmp);
    Ok(times[times.len() / 2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("adrt").chain(args.iter().copied()).map(OsString::from);
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn diagonal_line() {
        let (code, out, _) = run_capture(&["lines", "--n", "2", "--h", "0", "--s", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0 0\n1 1\n2 2\n3 3\n");
        let (_, closed, _) = run_capture(&["lines", "--n", "2", "--h", "0", "--s", "3", "--closed-form"]);
        assert_eq!(closed, out);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_capture(&[]).0, 1);
        assert_eq!(run_capture(&["frobnicate"]).0, 1);
        assert_eq!(run_capture(&["lines", "--n", "2", "--h", "0"]).0, 1);
        assert_eq!(run_capture(&["--help"]).0, 0);
    }

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("-3:5").unwrap(), (-3, 5));
        assert!(parse_window("5:3").is_err());
        assert!(parse_window("5").is_err());
    }

    #[test]
    fn invdelta_prints_a_sinogram_file() {
        let (code, out, _) = run_capture(&["invdelta", "--n", "1", "--h", "0", "--s", "0", "--window", "0:3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "ADRT1 sino n=1 hlo=0 hhi=3 dtype=i64\n1 0\n1 -1\n1 -1\n");
    }
}
