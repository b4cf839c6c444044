use p2e::engine::{CompletionConfig, Diagram, Region};
use p2e::rational::{q, qi, Q};

fn main() {
    let t0 = std::time::Instant::now();
    let order = 4;
    let region = Region::standard();
    let pad = qi(1);
    let window = p2e::engine::auto_window(order, &region, &pad);
    eprintln!("window: {:?}", window);
    let mut d: Diagram<Q> = Diagram::initial(3, order, window, region);
    d.complete(&CompletionConfig { pad, ..Default::default() }).unwrap();
    eprintln!("rays: {}, processed: {}, elapsed: {:?}", d.rays.len(), d.processed.len(), t0.elapsed());
    let verts = d.vertical_rays(4).unwrap();
    for ((dd, chi), c) in &verts {
        eprintln!("(d,chi)=({dd},{chi}) x={} coeff={}", q(*chi, *dd) - q(3, 2), c);
    }
}
