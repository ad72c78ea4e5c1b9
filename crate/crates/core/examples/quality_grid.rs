use cauchy_kmf::mesh::generate_disk_mesh;
use std::f64::consts::PI;
fn main() {
    for &n in &[8usize, 9, 10, 12, 16, 24, 32, 48, 64, 96, 128, 192, 256] {
        for &theta in &[0.05, 0.1, 0.2, 0.3, 0.4, 0.5, PI/6.0, PI/4.0, PI/3.0, PI/2.0, 2.0, 2.5, PI, 3.5, 4.0, 4.5, 5.0, 5.5, 5.8, 6.0, 6.2] {
            let Ok(mesh) = generate_disk_mesh::<f64>(n, theta) else { continue };
            let deg = mesh.min_interior_angle().to_degrees();
            if deg < 21.0 { println!("n={n:4} th={theta:5.3}: {deg:6.2}"); }
        }
    }
    println!("grid done");
}
