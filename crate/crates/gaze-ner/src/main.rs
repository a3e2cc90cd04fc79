fn main() {
    // placeholder while the CLI layer is built
}
