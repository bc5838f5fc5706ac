use fgqa::capnet::{
    build_capacitances, extract, oracle_charging_energy, oracle_ising_extract, CellGeometry, GapMap, GapMaterial,
    LatticeSpec,
};
use fgqa::ising::{spins_from_index, IsingModel};

fn spec(rows: usize, cols: usize) -> LatticeSpec {
    let mut s = LatticeSpec::new(rows, cols, CellGeometry::default());
    s.voltages.v_cg = (0..rows * cols).map(|k| 0.004 * k as f64).collect();
    s
}

#[test]
fn pair_closed_form_matches_oracle_exactly() {
    let s = spec(1, 2);
    let closed = extract(&s).unwrap().model;
    let exact = oracle_ising_extract(&s).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(closed.coupling(0, 1), exact.coupling(0, 1)) < 1e-9);
    for k in 0..2 {
        assert!(rel(closed.field(k), exact.field(k)) < 1e-9);
    }
}

#[test]
fn walsh_model_reproduces_oracle_energy_differences() {
    // The Ising model is the exact restriction of the charging energy to
    // occupations n0 + (1 + s)/2, up to a constant.
    let s = spec(2, 2);
    let m: IsingModel = oracle_ising_extract(&s).unwrap();
    let energy = |idx: usize| {
        let spins = spins_from_index(idx, 4);
        let occ: Vec<i64> = spins.iter().map(|&x| i64::from(x > 0)).collect();
        (oracle_charging_energy(&s, &occ).unwrap(), m.energy(&spins).unwrap())
    };
    let (u0, e0) = energy(0);
    for idx in 1..16 {
        let (u, e) = energy(idx);
        assert!(((u - u0) - (e - e0)).abs() < 1e-12, "state {idx}");
    }
}

#[test]
fn air_diagonals_weaken_diagonal_coupling() {
    let oxide = spec(2, 2);
    let air = spec(2, 2).with_gap_map(GapMap::uniform(GapMaterial::Oxide, GapMaterial::Air));
    let (jo, ja) = (extract(&oxide).unwrap().model.coupling(0, 3), extract(&air).unwrap().model.coupling(0, 3));
    assert!(ja.abs() < jo.abs());
    let c = build_capacitances(&air).unwrap();
    assert!(c.get(0, 0).j < build_capacitances(&oxide).unwrap().get(0, 0).j);
}
