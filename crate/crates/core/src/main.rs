fn main() {
    std::process::exit(phy_agents::cli::main_with_env());
}
