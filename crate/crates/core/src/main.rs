fn main() {
    ptspec::cli::main()
}
