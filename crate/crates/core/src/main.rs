use std::io::Write;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let report = superham::frontend::run_command(&argv);
    let text = report.render();
    if report.error.is_some() && report.format == superham::frontend::cli::Format::Text {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    let _ = std::io::stdout().flush();
    std::process::exit(report.exit_code);
}
