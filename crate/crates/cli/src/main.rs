fn main() {
    vcf_cli::init_logging();
    std::process::exit(vcf_cli::run(std::env::args_os()));
}
