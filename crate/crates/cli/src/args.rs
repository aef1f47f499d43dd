use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "isoflag",
    version,
    about = "Moment geometry of generalized real flag manifolds",
    long_about = "Restricted roots, Weyl groups and moment polytopes of isotropy orbits of \
                  symmetric spaces; critical structure of f = |mu - a|^2, sampled fiber \
                  connectivity and the torus criterion for Kirwan surjectivity.\n\n\
                  Vectors are comma-separated decimals in the a-basis of the model."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in symmetric pairs with rank, root type and multiplicities.
    Catalog {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Moment polytope cvx(W.q) and a sampled containment check.
    Polytope {
        #[command(flatten)]
        model: ModelArgs,
        /// Base point q (default: a normalized regular point).
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        q: Option<::std::vec::Vec<f64>>,
        /// Orbit samples for the containment check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Seed for the orbit samples.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Containment tolerance.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Critical components of f = |mu - a|^2 with indices and the degeneracy audit.
    Critical {
        #[command(flatten)]
        model: ModelArgs,
        /// Base point q, regular (default: a normalized regular point).
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        q: Option<::std::vec::Vec<f64>>,
        /// Target a (default: 0).
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        a: Option<::std::vec::Vec<f64>>,
        /// Seed for representative searches.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Residual tolerance for component representatives.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Descent strategy used to build representatives: gradient-flow,
        /// gauss-newton or hybrid.
        #[arg(long, default_value = "hybrid")]
        strategy: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample the fiber mu^-1(a) and decide its connectivity.
    Fiber {
        #[command(flatten)]
        model: ModelArgs,
        /// Base point q, regular (default: a normalized regular point).
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        q: Option<::std::vec::Vec<f64>>,
        /// Target a (default: 0).
        #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
        a: Option<::std::vec::Vec<f64>>,
        /// Number of descent runs.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Seed for the random starting points.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Fiber tolerance on |mu(x) - a|.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Descent strategy: gradient-flow, gauss-newton or hybrid.
        #[arg(long, default_value = "hybrid")]
        strategy: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Torus criterion for surjectivity of the Kirwan-type map.
    Kirwan {
        #[command(flatten)]
        model: ModelArgs,
        /// Seed for the generic torus generators.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run invariant suites; exits with status 4 when a check fails.
    Verify {
        /// Suite name, or `all`.
        #[arg(default_value = "all")]
        suite: String,
        /// Master seed passed to every suite.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override each suite's default sample count.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Catalog model name (see `isoflag catalog`).
    #[arg(long, conflicts_with = "model_file")]
    pub model: Option<String>,
    /// Comma-separated integer parameters (default: the model's defaults).
    #[arg(long, value_parser = parse_params, requires = "model")]
    pub params: Option<::std::vec::Vec<i64>>,
    /// Model document (JSON) instead of a catalog model.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report format; svg is available for `polytope` only.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", t.trim())))
        .collect()
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = parse_list(s)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(v)
}

pub fn parse_params(s: &str) -> Result<Vec<i64>, String> {
    parse_list(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn vectors_parse_with_signs_and_spaces() {
        assert_eq!(parse_vector("-0.5, 1e-3,2").unwrap(), vec![-0.5, 1e-3, 2.0]);
        assert!(parse_vector("1,x").is_err());
        assert!(parse_vector("nan").is_err());
        assert_eq!(parse_params("3,2").unwrap(), vec![3, 2]);
        assert_eq!(parse_params("").unwrap(), Vec::<i64>::new());
    }

    #[test]
    fn negative_targets_are_accepted() {
        let cli = Cli::try_parse_from(["isoflag", "fiber", "--model", "adjoint-su", "--a", "-0.1,0.2"]).unwrap();
        let Command::Fiber { a, .. } = cli.command else { panic!() };
        assert_eq!(a, Some(vec![-0.1, 0.2]));
    }

    #[test]
    fn model_and_file_conflict() {
        assert!(Cli::try_parse_from(["isoflag", "kirwan", "--model", "x", "--model-file", "y.json"]).is_err());
    }
}
