fn main() {
    std::process::exit(ssg::cli::run(std::env::args_os()));
}
