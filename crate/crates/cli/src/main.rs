fn main() {
    println!("p2h: not yet implemented");
}
