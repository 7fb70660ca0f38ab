mod common;

use common::ScalarInstance;
use rsmc::numerics::RandomStream;

#[test]
fn scalar_subproblems_match_grid_search() {
    let mut st = RandomStream::new(77, &["conic-grid".into()]);
    for i in 0..6 {
        let inst = ScalarInstance::random(1 + i % 3, &mut st);
        let (objective, attained) = inst.solve();
        let grid = inst.grid_optimum(1e-3);
        assert!((objective - grid).abs() < 1e-3, "instance {i}: {objective} vs grid {grid}");
        assert!(attained >= grid - 1e-6);
        assert!((attained - objective).abs() < 1e-6);
    }
}
