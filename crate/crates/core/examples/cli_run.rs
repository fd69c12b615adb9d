//! Drives the command-line front end in-process.

fn main() {
    let code = bdkin::cli::run([
        "bdkin", "equilibrium", "--family", "custom", "--a-table", "1", "--b-table", "1", "--rho", "2", "--format", "json",
    ]);
    println!("exit code {code}");
}
