use cauchy_kmf::mesh::generate_disk_mesh;
use std::f64::consts::PI;
fn main() {
    let mesh = generate_disk_mesh::<f64>(8, PI / 6.0).unwrap();
    let v = mesh.vertices();
    println!("V={} T={}", v.len(), mesh.triangles().len());
    let mut worst = (f64::INFINITY, 0usize);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        for k in 0..3 {
            let p = v[tri[k]]; let q = v[tri[(k+1)%3]]; let r = v[tri[(k+2)%3]];
            let u = (q.x-p.x, q.y-p.y); let w = (r.x-p.x, r.y-p.y);
            let ang = (u.0*w.1-u.1*w.0).abs().atan2(u.0*w.0+u.1*w.1).to_degrees();
            if ang < worst.0 { worst = (ang, t); }
        }
    }
    let tri = mesh.triangles()[worst.1];
    println!("worst {:.2} deg: tri {:?}", worst.0, tri);
    for &i in &tri {
        println!("  v{i}: ({:.4}, {:.4}) r={:.4} ang={:.4}", v[i].x, v[i].y, (v[i].x*v[i].x+v[i].y*v[i].y).sqrt(), v[i].angle());
    }
}
