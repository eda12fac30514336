fn main() {
    println!("calibrate: not yet implemented");
}
