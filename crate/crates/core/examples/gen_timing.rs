use cauchy_kmf::mesh::generate_disk_mesh;
use std::f64::consts::PI;
use std::time::Instant;
fn main() {
    for &n in &[64usize, 128, 256] {
        let t0 = Instant::now();
        let mesh = generate_disk_mesh::<f64>(n, PI / 3.0).unwrap();
        println!("n={n}: {:?} V={} minangle={:.1}", t0.elapsed(), mesh.vertex_count(), mesh.min_interior_angle().to_degrees());
    }
}
