use std::io::{stdout, BufWriter};

fn main() {
    env_logger::init();
    let mut out = BufWriter::new(stdout().lock());
    let code = fitfem_cli::run_cli(std::env::args(), &mut out);
    drop(out);
    std::process::exit(code);
}
