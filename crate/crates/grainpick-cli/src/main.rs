fn main() {
    println!("grainpick");
}
