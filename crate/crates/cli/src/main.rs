//! `sgue` - exact, asymptotic and Monte Carlo evaluation of the GUE average
//! `E_N(z,t)` of `prod_j exp(-z^2/(2 x_j^2) + t/x_j)`, plus the verification
//! suites for the equilibrium measure, the outer model matrix, the
//! differential identities and the small-v2 laws.
//!
//! All numeric output is emitted as full-precision decimal strings.
//! Exit codes: 0 success, 1 verification failure, 2 bad flags,
//! 3 insufficient precision after retries.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Float;

use sgue_core::asymptotics::{self, CSV_HEADER};
use sgue_core::elliptic::{curve_data, verify_outer_multi};
use sgue_core::equilibrium::{lagrange_l, solve_branch_points, verify_equilibrium};
use sgue_core::hankel::{b_n, berry_shukla_moment, partition_exact, taylor_coeff};
use sgue_core::moments::{moment_table, ModelParams, MomentCache};
use sgue_core::precision::{decimal_string, PrecisionContext};
use sgue_core::rh::check_identities;
use sgue_core::tolerances as tol;
use sgue_core::{mc, Error};

#[derive(Parser)]
#[command(name = "sgue", version, about)]
struct Cli {
    /// Working mantissa bits (default: $SGUE_DEFAULT_PREC or 512;
    /// verification suites pick leaner defaults when unset)
    #[arg(long, global = true)]
    prec: Option<u32>,

    /// Bypass the moment cache ($SGUE_CACHE_DIR, default ./.sgue-cache)
    #[arg(long, global = true)]
    no_cache: bool,

    /// Output format for tabular results
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Moments mu_0..mu_{2N-2} of the weight
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: String,
        #[arg(long, default_value = "0")]
        t: String,
    },
    /// Exact average E_N(z,t) and partition-function logs
    Partition {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: String,
        #[arg(long, default_value = "0")]
        t: String,
    },
    /// The prefactor B_N = E_N(N^{-1/2}, 0)
    Bn {
        #[arg(long)]
        n: usize,
    },
    /// Branch points, Lagrange constant and the g-function checks
    Equilibrium {
        #[arg(long)]
        v2: String,
    },
    /// Exact value against the large-N prediction at one point
    Asymptotic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: String,
        #[arg(long, default_value = "0")]
        t: String,
        /// lower regime constant in c1 N^{-1/2} < z
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        /// upper regime constant in z < c2 N^{1/4}
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
    },
    /// Convergence table over a list of N (CSV)
    Compare {
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long)]
        z: String,
        #[arg(long, default_value = "0")]
        t: String,
        #[arg(long, default_value_t = 1.0)]
        c1: f64,
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
    },
    /// Taylor coefficient E_{Nm}(z) of the average in t
    Taylor {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: String,
        #[arg(long)]
        m: usize,
    },
    /// Moments M_{Nm} of the repulsion statistic
    Qmoment {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Monte Carlo estimate of E_N(z,t) over sampled spectra
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a verification suite; exits 0 iff every residual is in tolerance
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Override the v2 list for the gfun suite
        #[arg(long)]
        v2: Option<String>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Gfun,
    Outer,
    Smallv2,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::RaisePrecision { .. } => ExitCode::from(3),
                Error::Domain(_) | Error::NoBracket { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn default_bits() -> u32 {
    std::env::var("SGUE_DEFAULT_PREC")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(sgue_core::DEFAULT_MANTISSA_BITS)
}

fn context(prec: Option<u32>) -> PrecisionContext {
    PrecisionContext::new(prec.unwrap_or_else(default_bits))
}

fn parse(ctx: &PrecisionContext, s: &str) -> Result<Float, Error> {
    ctx.parse_real(s)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let cache_store;
    let cache = if cli.no_cache {
        None
    } else {
        cache_store = MomentCache::from_env();
        Some(&cache_store)
    };

    match cli.cmd {
        Cmd::Moments { n, z, t } => {
            let ctx = context(cli.prec);
            let params = ModelParams::new(n, parse(&ctx, &z)?, parse(&ctx, &t)?)?;
            let table = moment_table(&params, &ctx, cache)?;
            match cli.format {
                Format::Json => println!("{}", table.to_json(ctx.bits())),
                Format::Csv => {
                    println!("j,value,error_bound");
                    for (j, (v, e)) in
                        table.entries.iter().zip(&table.error_bounds).enumerate()
                    {
                        println!("{j},{},{}", decimal_string(v), decimal_string(e));
                    }
                }
            }
        }
        Cmd::Partition { n, z, t } => {
            let ctx = context(cli.prec);
            let params = ModelParams::new(n, parse(&ctx, &z)?, parse(&ctx, &t)?)?;
            let r = partition_exact(&params, &ctx, cache)?;
            match cli.format {
                Format::Json => {
                    let (fact, _, used) =
                        sgue_core::hankel::factorization_with_retry(&params, &ctx, cache)?;
                    let _ = used;
                    println!("{}", r.to_json(Some(&fact)));
                }
                Format::Csv => {
                    println!("N,z,t,E_N,log_G_N,log_Z_N");
                    println!(
                        "{n},{z},{t},{},{},{}",
                        decimal_string(&r.e_n),
                        decimal_string(&r.log_g_n),
                        decimal_string(&r.log_z_n)
                    );
                }
            }
        }
        Cmd::Bn { n } => {
            let ctx = context(cli.prec);
            let b = b_n(n, &ctx, cache)?;
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "N": n, "B_N": decimal_string(&b) })
                ),
                Format::Csv => {
                    println!("N,B_N");
                    println!("{n},{}", decimal_string(&b));
                }
            }
        }
        Cmd::Equilibrium { v2 } => {
            let ctx = context(cli.prec);
            let v2 = parse(&ctx, &v2)?;
            let mut eq = solve_branch_points(&v2, &ctx)?;
            lagrange_l(&mut eq, &ctx)?;
            let report = verify_equilibrium(&eq, tol::VERIFY_GRID, &ctx)?;
            println!("{}", report.to_json());
        }
        Cmd::Asymptotic { n, z, t, c1, c2 } => {
            let ctx = context(cli.prec);
            let params = ModelParams::new(n, parse(&ctx, &z)?, parse(&ctx, &t)?)?;
            let r = asymptotics::predict(&params, c1, c2, &ctx, cache)?;
            println!("{}", r.to_json());
        }
        Cmd::Compare {
            n_list,
            z,
            t,
            c1,
            c2,
        } => {
            let ctx = context(cli.prec);
            let mut rows = Vec::new();
            let mut ns = n_list;
            ns.sort_unstable();
            for n in ns {
                let bits = if n >= 48 { ctx.bits().max(1024) } else { ctx.bits() };
                let big_ctx = PrecisionContext::new(bits);
                let params =
                    ModelParams::new(n, parse(&big_ctx, &z)?, parse(&big_ctx, &t)?)?;
                let r = asymptotics::predict(&params, c1, c2, &big_ctx, cache)?;
                rows.push(r);
            }
            println!("{CSV_HEADER}");
            for r in &rows {
                println!("{}", r.csv_row());
            }
        }
        Cmd::Taylor { n, z, m } => {
            let ctx = context(cli.prec);
            let z = parse(&ctx, &z)?;
            let coeff = taylor_coeff(n, &z, m, &ctx, cache)?;
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "N": n, "z": decimal_string(&z), "m": m,
                        "E_Nm": decimal_string(&coeff),
                    })
                ),
                Format::Csv => {
                    println!("N,z,m,E_Nm");
                    println!("{n},{},{m},{}", decimal_string(&z), decimal_string(&coeff));
                }
            }
        }
        Cmd::Qmoment { n, m } => {
            // moderate default precision: the z-integral needs only ~1e-8
            let ctx = context(cli.prec.or(Some(320)));
            let v = berry_shukla_moment(n, m, &ctx)?;
            match cli.format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "N": n, "m": m, "M_Nm": decimal_string(&v) })
                ),
                Format::Csv => {
                    println!("N,m,M_Nm");
                    println!("{n},{m},{}", decimal_string(&v));
                }
            }
        }
        Cmd::Mc {
            n,
            z,
            t,
            samples,
            seed,
        } => {
            let r = mc::estimate_en(n, z, t, samples, seed)?;
            println!("{}", r.to_json());
        }
        Cmd::Verify { suite, v2 } => {
            return run_verify(suite, v2, cli.prec);
        }
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

fn run_verify(suite: Suite, v2_flag: Option<String>, prec: Option<u32>) -> Result<ExitCode, Error> {
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{}: {} {}", name, if ok { "PASS" } else { "FAIL" }, detail);
        all_ok &= ok;
    };

    if matches!(suite, Suite::Gfun | Suite::All) {
        let ctx = PrecisionContext::new(prec.unwrap_or(256));
        // branch-point residuals across regimes
        for v2f in [1e-3f64, 0.1, 1.0, 10.0] {
            let eq = solve_branch_points(&ctx.real(v2f), &ctx)?;
            let worst = eq
                .constraint_residuals(&ctx)
                .into_iter()
                .fold(ctx.zero(), |a, b| a.max(&b));
            check(
                &format!("gfun/branch-residuals v2={v2f}"),
                worst.to_f64() < tol::BRANCH_RESIDUAL,
                format!("max residual {:.3e}", worst.to_f64()),
            );
        }
        let v2_list: Vec<f64> = match &v2_flag {
            Some(s) => vec![s.parse().map_err(|_| {
                Error::Domain(format!("cannot parse --v2 value '{s}'"))
            })?],
            None => vec![1.0, 0.01],
        };
        for v2f in v2_list {
            let mut eq = solve_branch_points(&ctx.real(v2f), &ctx)?;
            lagrange_l(&mut eq, &ctx)?;
            let rep = verify_equilibrium(&eq, tol::VERIFY_GRID, &ctx)?;
            check(
                &format!("gfun/jumps-and-margins v2={v2f}"),
                rep.all_passed(tol::G_JUMP_RESIDUAL),
                format!(
                    "support {:.3e} left {:.3e} gap {:.3e} margin {:.3e}",
                    rep.residual_support.to_f64(),
                    rep.residual_far_left_jump.to_f64(),
                    rep.residual_gap_jump.to_f64(),
                    rep.inequality_margin_max.to_f64()
                ),
            );
        }
    }

    if matches!(suite, Suite::Outer | Suite::All) {
        let ctx = PrecisionContext::new(prec.unwrap_or(192));
        let eq = solve_branch_points(&ctx.real(1), &ctx)?;
        let cd = curve_data(&eq, &ctx)?;
        let configs = [
            (8usize, ctx.zero()),
            (9, ctx.zero()),
            (8, ctx.real(0.2)),
            (9, ctx.real(0.2)),
        ];
        for rep in verify_outer_multi(&configs, &cd, tol::VERIFY_GRID, &ctx)? {
            check(
                &format!("outer/N={},v1={}", rep.n, rep.v1.to_f64()),
                rep.all_passed(
                    tol::OUTER_JUMP_RESIDUAL,
                    tol::OUTER_DET_RESIDUAL,
                    tol::OUTER_DECAY_SLACK,
                ),
                format!(
                    "gap {:.3e} cuts {:.3e} det {:.3e} decay {:.2}",
                    rep.jump_residual_gap.to_f64(),
                    rep.jump_residual_cuts.to_f64(),
                    rep.det_residual.to_f64(),
                    rep.decay_ratio.to_f64()
                ),
            );
        }
    }

    if matches!(suite, Suite::Smallv2 | Suite::All) {
        let ctx = PrecisionContext::new(prec.unwrap_or(192));
        let list = [ctx.real(1e-3), ctx.real(1e-6), ctx.real(1e-9)];
        let rep = asymptotics::small_v2_report(&list, &ctx)?;
        check(
            "smallv2/monotone",
            rep.monotone_ok(),
            String::new(),
        );
        let row = &rep.rows[1];
        check(
            "smallv2/spot-checks v2=1e-6",
            row.k0_dev.to_f64() < tol::SMALL_V2_SPOT && row.u_inf_dev.to_f64() < tol::SMALL_V2_SPOT,
            format!(
                "K0 dev {:.3e}, u_inf dev {:.3e}",
                row.k0_dev.to_f64(),
                row.u_inf_dev.to_f64()
            ),
        );
    }

    if matches!(suite, Suite::Identities | Suite::All) {
        let ctx = PrecisionContext::new(prec.unwrap_or(256));
        for (n, zf, tf) in [(4usize, 1.0, 0.3), (6, 0.8, 0.2)] {
            let params = ModelParams::new(n, ctx.real(zf), ctx.real(tf))?;
            let rep = check_identities(&params, &ctx, None)?;
            let ok = rep.id_v1.rel_err.to_f64() < tol::DIFFID_REL
                && rep.id_v2.rel_err.to_f64() < tol::DIFFID_REL
                && rep.det_residual_max.to_f64() < tol::RH_DET_RESIDUAL
                && rep.jump_residual_max.to_f64() < tol::RH_JUMP_RESIDUAL;
            check(
                &format!("identities/N={n},z={zf},t={tf}"),
                ok,
                format!(
                    "v1 rel {:.3e} v2 rel {:.3e} det {:.3e} jump {:.3e}",
                    rep.id_v1.rel_err.to_f64(),
                    rep.id_v2.rel_err.to_f64(),
                    rep.det_residual_max.to_f64(),
                    rep.jump_residual_max.to_f64()
                ),
            );
        }
    }

    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
