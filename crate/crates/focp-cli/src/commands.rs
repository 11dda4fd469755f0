//! Subcommand implementations: solve, compare, tables, and the
//! invariant suite wrapper.

use std::fs;
use std::path::Path;

use wavelet_focp::basis::BasisSpec;
use wavelet_focp::focp_solver::{dynamics_residual, solve_kkt, FocpProblem, FocpSolution};

use crate::format::{csv17, render_table, sig6};
use crate::problem::{self, ProblemFile};
use crate::{CliError, Method, RunArgs, ValidateArgs};

/// Builds the basis for one run; basis-shape errors are configuration
/// errors from the CLI's point of view.
fn basis(args: &RunArgs, method: Method, mu: f64) -> Result<BasisSpec, CliError> {
    BasisSpec::new(args.k, args.m, method.basis_order(mu))
        .map_err(|err| CliError::Config(err.to_string()))
}

fn solve_one(
    file: &ProblemFile,
    args: &RunArgs,
    method: Method,
    mu: f64,
) -> Result<(FocpProblem, FocpSolution), CliError> {
    let spec = basis(args, method, mu)?;
    let prob = file.build(spec, mu)?;
    let sol = solve_kkt(&prob, args.quad_order)?;
    Ok((prob, sol))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|err| CliError::Config(format!("cannot write {}: {err}", path.display())))
}

fn ensure_out_dir(args: &RunArgs) -> Result<(), CliError> {
    fs::create_dir_all(&args.out).map_err(|err| {
        CliError::Config(format!("cannot create output directory {}: {err}", args.out.display()))
    })
}

pub fn solve(args: &RunArgs) -> Result<(), CliError> {
    args.check()?;
    let file = problem::load(&args.problem)?;
    ensure_out_dir(args)?;
    let grid = args.grid();
    let multiple = args.mu.len() > 1;

    let mut summary_csv = String::from("mu,method,k,M,J,kkt_residual,dynamics_residual\n");
    let mut display_rows = Vec::new();
    for &mu in &args.mu {
        let (prob, sol) = solve_one(&file, args, args.method, mu)?;
        let residual = dynamics_residual(&sol, &prob, &grid);

        let mut solution_csv = String::from("zeta,x1,x2,u\n");
        for &z in &grid {
            let (x1, x2, u) = sol.evaluate(z);
            solution_csv.push_str(&format!(
                "{},{},{},{}\n",
                csv17(z),
                csv17(x1),
                csv17(x2),
                csv17(u)
            ));
        }
        let name =
            if multiple { format!("solution_mu{mu}.csv") } else { "solution.csv".to_string() };
        write_file(&args.out, &name, &solution_csv)?;

        summary_csv.push_str(&format!(
            "{mu},{},{},{},{},{},{}\n",
            args.method.label(),
            args.k,
            args.m,
            csv17(sol.cost),
            csv17(sol.kkt_residual),
            csv17(residual)
        ));
        display_rows.push(vec![
            mu.to_string(),
            args.method.label().to_string(),
            sig6(sol.cost),
            format!("{:.2e}", sol.kkt_residual),
            format!("{residual:.2e}"),
        ]);
    }
    write_file(&args.out, "summary.csv", &summary_csv)?;

    let header = ["mu", "method", "J", "kkt residual", "dynamics residual"]
        .map(String::from)
        .to_vec();
    print!("{}", render_table(&header, &display_rows));
    println!("wrote {} file(s) to {}", args.mu.len() + 1, args.out.display());
    Ok(())
}

pub fn compare(args: &RunArgs) -> Result<(), CliError> {
    args.check()?;
    let file = problem::load(&args.problem)?;
    ensure_out_dir(args)?;

    let mut csv = String::from("mu,J_obw,J_fbw\n");
    let mut display_rows = Vec::new();
    for &mu in &args.mu {
        let (_, uniform) = solve_one(&file, args, Method::Obw, mu)?;
        let (_, fractional) = solve_one(&file, args, Method::Fbw, mu)?;
        csv.push_str(&format!(
            "{mu},{},{}\n",
            csv17(uniform.cost),
            csv17(fractional.cost)
        ));
        display_rows.push(vec![
            mu.to_string(),
            sig6(uniform.cost),
            sig6(fractional.cost),
        ]);
    }
    write_file(&args.out, "compare.csv", &csv)?;

    let header = ["mu", "J_obw", "J_fbw"].map(String::from).to_vec();
    print!("{}", render_table(&header, &display_rows));
    println!("wrote compare.csv to {}", args.out.display());
    Ok(())
}

pub fn tables(args: &RunArgs) -> Result<(), CliError> {
    args.check()?;
    let file = problem::load(&args.problem)?;
    ensure_out_dir(args)?;
    let grid = args.grid();

    let mut labels = Vec::new();
    let mut columns: Vec<Vec<(f64, f64, f64)>> = Vec::new();
    for &mu in &args.mu {
        for method in [Method::Obw, Method::Fbw] {
            let (_, sol) = solve_one(&file, args, method, mu)?;
            labels.push(format!("{}_mu{mu}", method.label()));
            columns.push(grid.iter().map(|&z| sol.evaluate(z)).collect());
        }
    }

    for (file_name, pick) in [
        ("table_x1.csv", 0usize),
        ("table_x2.csv", 1usize),
        ("table_u.csv", 2usize),
    ] {
        let mut csv = format!("zeta,{}\n", labels.join(","));
        for (row, &z) in grid.iter().enumerate() {
            let cells: Vec<String> = columns
                .iter()
                .map(|col| {
                    let (x1, x2, u) = col[row];
                    csv17([x1, x2, u][pick])
                })
                .collect();
            csv.push_str(&format!("{},{}\n", csv17(z), cells.join(",")));
        }
        write_file(&args.out, file_name, &csv)?;
    }
    println!(
        "wrote table_x1.csv, table_x2.csv, table_u.csv ({} columns each) to {}",
        labels.len(),
        args.out.display()
    );
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    crate::validate::run(args)
}
